//! Parsing of `--grid` specifications.
//!
//! A grid is a `;`-separated list of `key=value` entries with keys `n`, `m`
//! and `l`. Values are comma lists (`4,5`) or inclusive ranges with an
//! optional step (`13..51:2`). `m` and `l` are base-2 exponents, and the lower
//! end of the `m` range may be `auto`, meaning `ceil(log2(16 N))` per `N`.

use oddqft::verify::{ExponentRange, GridSpec};
use oddqft::Seed;

pub const DEFAULT_GRID: &str = "n=13..51:2;m=auto..16;l=4,5";

fn parse_list(value: &str) -> Result<Vec<u64>, String> {
    if let Some((range, step)) = value.split_once("..") {
        let (hi, step) = match step.split_once(':') {
            Some((hi, s)) => (hi, s.parse::<u64>().map_err(|_| format!("bad step in '{value}'"))?),
            None => (step, 1),
        };
        let lo: u64 = range.parse().map_err(|_| format!("bad range start in '{value}'"))?;
        let hi: u64 = hi.parse().map_err(|_| format!("bad range end in '{value}'"))?;
        if step == 0 || lo > hi {
            return Err(format!("empty range '{value}'"));
        }
        return Ok((lo..=hi).step_by(step as usize).collect());
    }
    value
        .split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|_| format!("bad number '{v}'")))
        .collect()
}

fn parse_m(value: &str) -> Result<ExponentRange, String> {
    let (lo, hi) = match value.split_once("..") {
        Some((lo, hi)) => (lo, hi),
        None => (value, value),
    };
    let lo = if lo == "auto" {
        None
    } else {
        Some(lo.parse::<u32>().map_err(|_| format!("bad m exponent '{lo}'"))?)
    };
    let hi = hi.parse::<u32>().map_err(|_| format!("bad m exponent '{hi}'"))?;
    if hi > 40 || lo.is_some_and(|lo| lo > hi) {
        return Err(format!("m range '{value}' must be increasing and at most 40"));
    }
    Ok(ExponentRange { lo, hi })
}

pub fn parse_grid(spec: &str, trials: u64, seed: Seed) -> Result<GridSpec, String> {
    let mut n_values = None;
    let mut m_exponents = None;
    let mut l_exponents = None;
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (key, value) = entry.split_once('=').ok_or_else(|| format!("grid entry '{entry}' is not key=value"))?;
        match key.trim() {
            "n" | "N" => n_values = Some(parse_list(value.trim())?),
            "m" => m_exponents = Some(parse_m(value.trim())?),
            "l" => {
                let ls = parse_list(value.trim())?;
                if ls.iter().any(|&l| l == 0 || l > 40) {
                    return Err("l exponents must lie in 1..=40".into());
                }
                l_exponents = Some(ls.into_iter().map(|l| l as u32).collect())
            }
            other => return Err(format!("unknown grid key '{other}'")),
        }
    }
    let grid = GridSpec {
        n_values: n_values.ok_or("grid needs an n entry")?,
        m_exponents: m_exponents.ok_or("grid needs an m entry")?,
        l_exponents: l_exponents.unwrap_or_else(|| vec![4]),
        trials,
        seed,
    };
    if grid.n_values.is_empty() {
        return Err("grid has no N values".into());
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_parses() {
        let g = parse_grid(DEFAULT_GRID, 100, Seed(0)).unwrap();
        assert_eq!(g.n_values.len(), 20);
        assert_eq!(g.n_values[0], 13);
        assert_eq!(*g.n_values.last().unwrap(), 51);
        assert_eq!(g.m_exponents, ExponentRange { lo: None, hi: 16 });
        assert_eq!(g.l_exponents, vec![4, 5]);
    }

    #[test]
    fn explicit_lists() {
        let g = parse_grid("n=13,15; m=10..12", 1, Seed(1)).unwrap();
        assert_eq!(g.n_values, vec![13, 15]);
        assert_eq!(g.m_exponents, ExponentRange { lo: Some(10), hi: 12 });
    }

    #[test]
    fn bad_grids() {
        for bad in ["", "n=13", "m=10", "n=13;m=12..10", "n=x;m=4", "n=13;m=4;q=1", "n=20..10;m=5", "n=13;m=4;l=0"] {
            assert!(parse_grid(bad, 1, Seed(0)).is_err(), "{bad}");
        }
    }
}
