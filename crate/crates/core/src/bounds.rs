//! Closed-form error bounds and parameter selection.
//!
//! Bound formulas use the natural log; qubit formulas use base-2 logs.

use serde::Serialize;

use crate::error::{Error, Result};

/// Lower end of the `L` constant window, `L = c1 sqrt(N) / eps^2` with `c1 in [65, 130]`.
pub const C1_LOW: f64 = 65.0;
/// Lower end of the `M` constant window, `M = c2 N^{3/2} / eps^3` with `c2 in [735, 1470]`.
pub const C2_LOW: f64 = 735.0;
pub const C1_RANGE: (f64, f64) = (C1_LOW, 2.0 * C1_LOW);
pub const C2_RANGE: (f64, f64) = (C2_LOW, 2.0 * C2_LOW);
/// Additive constant of the sufficient qubit count.
pub const QUBIT_CONSTANT: f64 = 12.53;
/// Smallest `L` exponent the main theorem allows (`L >= 16`).
pub const MIN_L_EXPONENT: u32 = 4;

/// Which hypotheses of the main theorem a triple `(N, M, L)` satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub n_odd_ge_13: bool,
    pub l_ge_16: bool,
    pub m_ge_ln: bool,
    pub m_ge_16n: bool,
}

impl Hypotheses {
    pub fn evaluate(n: u64, m: u64, l: u64) -> Self {
        let (n, m, l) = (n as u128, m as u128, l as u128);
        Self {
            n_odd_ge_13: n >= 13 && n % 2 == 1,
            l_ge_16: l >= 16,
            m_ge_ln: m >= l * n,
            m_ge_16n: m >= 16 * n,
        }
    }

    pub fn all(&self) -> bool {
        self.n_odd_ge_13 && self.l_ge_16 && self.m_ge_ln && self.m_ge_16n
    }

    /// Hypotheses of the tail bound alone (`N >= 13` odd, `M >= 16 N`).
    pub fn tail(&self) -> bool {
        self.n_odd_ge_13 && self.m_ge_16n
    }

    /// Human readable list of the failed hypotheses.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.n_odd_ge_13 {
            out.push("N must be odd and at least 13");
        }
        if !self.l_ge_16 {
            out.push("L must be at least 16");
        }
        if !self.m_ge_ln {
            out.push("M must be at least L N");
        }
        if !self.m_ge_16n {
            out.push("M must be at least 16 N");
        }
        out
    }
}

/// Evaluated bounds for one `(N, M, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub m: u64,
    pub l: u64,
    pub tail: f64,
    pub shift: f64,
    pub main: f64,
    pub target: Option<f64>,
    pub hypotheses: Hypotheses,
}

impl BoundReport {
    /// Attaches the `eps / sqrt(2)` target.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.target = Some(epsilon / std::f64::consts::SQRT_2);
        self
    }

    /// Bound on the distance to the normalized product state, `sqrt(2) * main`.
    pub fn normalized(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.main
    }

    pub fn meets_target(&self) -> Option<bool> {
        self.target.map(|t| self.main <= t)
    }
}

/// `(2/pi) sqrt(22 ln^2 N / L + 32 N^2 / (L M))`.
pub fn tail_bound(n: u64, m: u64, l: u64) -> f64 {
    let (n, m, l) = (n as f64, m as f64, l as f64);
    let ln = n.ln();
    std::f64::consts::FRAC_2_PI * (22.0 * ln * ln / l + 32.0 * n * n / (l * m)).sqrt()
}

/// `pi L N / (M sqrt(3))`.
pub fn shift_bound(n: u64, m: u64, l: u64) -> f64 {
    std::f64::consts::PI * l as f64 * n as f64 / (m as f64 * 3f64.sqrt())
}

pub fn main_bound(n: u64, m: u64, l: u64) -> BoundReport {
    let tail = tail_bound(n, m, l);
    let shift = shift_bound(n, m, l);
    BoundReport {
        n,
        m,
        l,
        tail,
        shift,
        main: tail + shift,
        target: None,
        hypotheses: Hypotheses::evaluate(n, m, l),
    }
}

fn check_n_eps(n: u64, epsilon: f64) -> Result<()> {
    if n < 13 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!("N = {n} must be odd and at least 13")));
    }
    if !(epsilon > 0.0 && epsilon <= std::f64::consts::SQRT_2) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

/// Exponents `(g, l_cf)` with `2^g = c2 N^{3/2} / eps^3` for the unique
/// `c2 in [735, 1470)` and `2^l_cf = c1 sqrt(N) / eps^2` for `c1 in [65, 130)`.
pub fn closed_form_exponents(n: u64, epsilon: f64) -> Result<(u32, u32)> {
    check_n_eps(n, epsilon)?;
    let nf = n as f64;
    let g = (C2_LOW * nf.powf(1.5) / epsilon.powi(3)).log2().ceil();
    let l = (C1_LOW * nf.sqrt() / epsilon.powi(2)).log2().ceil();
    Ok((g as u32, l as u32))
}

/// Smallest `m` for which some `l` with `L >= 16`, `M >= L N` meets the main
/// bound `tail + shift <= eps / sqrt(2)`; the smallest such `l` at that `m`.
pub fn minimal_exponents(n: u64, epsilon: f64) -> Result<(u32, u32)> {
    let (g, _) = closed_form_exponents(n, epsilon)?;
    let target = epsilon / std::f64::consts::SQRT_2;
    for m_exp in MIN_L_EXPONENT..=g {
        let m = 1u64 << m_exp;
        for l_exp in MIN_L_EXPONENT..=m_exp {
            let l = 1u64 << l_exp;
            if (l as u128) * (n as u128) > m as u128 {
                break;
            }
            if main_bound(n, m, l).main <= target {
                return Ok((m_exp, l_exp));
            }
        }
    }
    Err(Error::Infeasible(g))
}

/// Every `l` meeting the bound at the given `m`.
pub fn valid_l_exponents(n: u64, epsilon: f64, m_exp: u32) -> Vec<u32> {
    let target = epsilon / std::f64::consts::SQRT_2;
    let m = 1u64 << m_exp;
    (MIN_L_EXPONENT..=m_exp)
        .take_while(|&l_exp| ((1u128 << l_exp) * n as u128) <= m as u128)
        .filter(|&l_exp| main_bound(n, m, 1 << l_exp).main <= target)
        .collect()
}

/// Qubits used by the algorithm for a power-of-two `M`: `log2 M + 2`.
pub fn qubit_count(m: u64) -> u32 {
    m.trailing_zeros() + 2
}

/// Sufficient qubit count from the closed-form parameters,
/// `ceil(12.53 + 3 log2(sqrt(N) / eps))`.
pub fn qubit_estimate(n: u64, epsilon: f64) -> u32 {
    (QUBIT_CONSTANT + 3.0 * ((n as f64).sqrt() / epsilon).log2()).ceil() as u32
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Qubits actually needed by the two-register layout:
/// `ceil(log N) + max(ceil(log L), ceil(log(2 alpha + 1)))`.
pub fn register_qubits(n: u64, m: u64, l: u64) -> u32 {
    let alpha = (m + n) / (2 * n);
    ceil_log2(n) + ceil_log2(l).max(ceil_log2(2 * alpha + 1))
}

/// Total variation bound for states at distance `eps`: `2 eps + eps^2`.
pub fn tv_bound(epsilon: f64) -> f64 {
    2.0 * epsilon + epsilon * epsilon
}

/// `gamma = 1/2 - N/M`.
pub fn gamma(n: u64, m: u64) -> f64 {
    0.5 - n as f64 / m as f64
}

/// Bound on `sum_{i : k not in (i)} 1 / |k - M i / N|_M`.
///
/// `general = true` gives `(2N/M)(1/gamma + ln|(N-1)/(2 gamma) + 1|)`
/// (needs `N > 2` odd, `M > 2N`); otherwise `4 N ln N / M` (needs `N >= 13`
/// odd, `M >= 16 N`).
pub fn denominator_sum_bound(n: u64, m: u64, general: bool) -> Result<f64> {
    let (nf, mf) = (n as f64, m as f64);
    if general {
        if n <= 2 || n.is_multiple_of(2) || m as u128 <= 2 * n as u128 {
            return Err(Error::Domain(format!("general sum bound needs odd N > 2, M > 2N (N = {n}, M = {m})")));
        }
        let g = gamma(n, m);
        Ok(2.0 * nf / mf * (1.0 / g + ((nf - 1.0) / (2.0 * g) + 1.0).abs().ln()))
    } else {
        if n < 13 || n.is_multiple_of(2) || (m as u128) < 16 * n as u128 {
            return Err(Error::Domain(format!("sum bound needs odd N >= 13, M >= 16N (N = {n}, M = {m})")));
        }
        Ok(4.0 * nf * nf.ln() / mf)
    }
}

/// `22 N ln^2 N / M + 32 N^3 / M^2`.
pub fn weighted_sum_bound(n: u64, m: u64) -> Result<f64> {
    if n < 13 || n.is_multiple_of(2) || (m as u128) < 16 * n as u128 {
        return Err(Error::Domain(format!("weighted sum bound needs odd N >= 13, M >= 16N (N = {n}, M = {m})")));
    }
    let (nf, mf) = (n as f64, m as f64);
    let ln = nf.ln();
    Ok(22.0 * nf * ln * ln / mf + 32.0 * nf.powi(3) / (mf * mf))
}

/// Parameter advice for one `(N, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterChoice {
    pub n: u64,
    pub epsilon: f64,
    pub g: u32,
    pub l_closed_form: u32,
    pub m: u32,
    pub l: u32,
    pub qubits: u32,
    pub qubit_estimate: u32,
    pub c1_range: (f64, f64),
    pub c2_range: (f64, f64),
    pub bound: BoundReport,
    pub closed_form_bound: BoundReport,
}

pub fn choose_parameters(n: u64, epsilon: f64) -> Result<ParameterChoice> {
    let (g, l_cf) = closed_form_exponents(n, epsilon)?;
    let (m, l) = minimal_exponents(n, epsilon)?;
    Ok(ParameterChoice {
        n,
        epsilon,
        g,
        l_closed_form: l_cf,
        m,
        l,
        qubits: qubit_count(1 << m),
        qubit_estimate: qubit_estimate(n, epsilon),
        c1_range: C1_RANGE,
        c2_range: C2_RANGE,
        bound: main_bound(n, 1 << m, 1 << l).with_epsilon(epsilon),
        closed_form_bound: main_bound(n, 1 << g, 1 << l_cf).with_epsilon(epsilon),
    })
}

/// The `(N, eps)` grid of the published parameter table.
pub const TABLE1_N: [u64; 6] = [13, 25, 51, 101, 251, 501];
pub const TABLE1_EPSILON: [f64; 7] = [0.001, 0.01, 0.05, 0.10, 0.20, 0.30, 0.40];

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn tail_examples() {
        assert!(close(tail_bound(13, 1 << 25, 1 << 15), 0.04231, 5e-5));
        assert!(close(tail_bound(501, 1 << 27, 1 << 13), 0.2051, 5e-4));
        for l in 1..20 {
            assert!(tail_bound(13, 1 << 30, 1 << (l + 1)) < tail_bound(13, 1 << 30, 1 << l));
        }
    }

    #[test]
    fn shift_examples() {
        assert!(close(shift_bound(13, 1 << 25, 1 << 15), 0.02303, 5e-5));
        assert!(close(shift_bound(501, 1 << 27, 1 << 13), 0.05547, 5e-5));
        let a = shift_bound(13, 1 << 20, 1 << 8);
        assert!(close(shift_bound(13, 1 << 21, 1 << 8), a / 2.0, 1e-15));
    }

    #[test]
    fn main_examples() {
        let target = 0.1 / std::f64::consts::SQRT_2;
        let r = main_bound(13, 1 << 25, 1 << 15);
        assert!(close(r.main, 0.0653, 5e-4) && r.main <= target);
        assert_eq!(r.main, r.tail + r.shift);
        assert!(r.hypotheses.all());
        let r = main_bound(13, 1 << 24, 1 << 15).with_epsilon(0.1);
        assert!(close(r.main, 0.0884, 5e-4));
        assert_eq!(r.meets_target(), Some(false));
        let r = main_bound(501, 1 << 27, 1 << 13).with_epsilon(0.4);
        assert!(close(r.main, 0.2606, 5e-4));
        assert_eq!(r.meets_target(), Some(true));
    }

    #[test]
    fn hypothesis_flags() {
        let h = Hypotheses::evaluate(13, 2048, 4);
        assert!(h.n_odd_ge_13 && !h.l_ge_16 && h.m_ge_ln && h.m_ge_16n);
        assert_eq!(h.violations(), vec!["L must be at least 16"]);
        assert!(!Hypotheses::evaluate(12, 1 << 20, 16).all());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_exponents(13, 0.10).unwrap(), (26, 15));
        assert_eq!(closed_form_exponents(25, 0.30).unwrap(), (22, 12));
        assert_eq!(closed_form_exponents(501, 0.001).unwrap().0, 53);
        assert!(closed_form_exponents(13, 0.0).is_err());
        assert!(closed_form_exponents(13, 1.5).is_err());
        assert!(closed_form_exponents(12, 0.1).is_err());
    }

    #[test]
    fn closed_form_constants_land_in_window() {
        for &n in &TABLE1_N {
            for &e in &TABLE1_EPSILON {
                let (g, l) = closed_form_exponents(n, e).unwrap();
                let c2 = (1u64 << g) as f64 * e.powi(3) / (n as f64).powf(1.5);
                let c1 = (1u64 << l) as f64 * e * e / (n as f64).sqrt();
                assert!((C2_RANGE.0..C2_RANGE.1).contains(&c2));
                assert!((C1_RANGE.0..C1_RANGE.1).contains(&c1));
            }
        }
    }

    #[test]
    fn minimal_examples() {
        assert_eq!(minimal_exponents(13, 0.10).unwrap(), (25, 15));
        assert_eq!(minimal_exponents(501, 0.40).unwrap(), (27, 13));
        assert_eq!(minimal_exponents(13, 0.001).unwrap(), (45, 28));
        assert_eq!(valid_l_exponents(13, 0.10, 25), vec![15]);
        assert!(valid_l_exponents(13, 0.10, 24).is_empty());
    }

    #[test]
    fn qubit_examples() {
        assert_eq!(qubit_count(1 << 25), 27);
        assert_eq!(qubit_estimate(13, 0.1), 29);
        assert_eq!(qubit_count(1024), 12);
        // the M = 1024, N = 65 layout needs every one of those qubits
        assert_eq!(register_qubits(65, 1024, 8), 12);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_bound(0.0), 0.0);
        assert!(close(tv_bound(0.1), 0.21, 1e-15));
        assert_eq!(tv_bound(1.0), 3.0);
    }

    #[test]
    fn denominator_examples() {
        assert!(close(denominator_sum_bound(13, 256, false).unwrap(), 0.5211, 1e-4));
        let general = denominator_sum_bound(13, 256, true).unwrap();
        // (26/256)(1/gamma + ln(12/(2 gamma) + 1)) with gamma = 1/2 - 13/256
        assert!(close(general, 0.496670, 1e-6));
        assert!(denominator_sum_bound(13, 200, false).is_err());
        assert!(denominator_sum_bound(13, 26, true).is_err());
        for n in (13..=101).step_by(2) {
            for e in 8..30 {
                let m = 1u64 << e;
                if m >= 16 * n {
                    assert!(denominator_sum_bound(n, m, false).unwrap() >= denominator_sum_bound(n, m, true).unwrap());
                }
            }
        }
    }

    #[test]
    fn weighted_examples() {
        assert!(close(weighted_sum_bound(13, 2048).unwrap(), 0.9355, 1e-4));
        assert!(close(weighted_sum_bound(13, 256).unwrap(), 8.42269, 1e-5));
        assert!(weighted_sum_bound(13, 4096).unwrap() < weighted_sum_bound(13, 2048).unwrap());
        assert!(weighted_sum_bound(13, 128).is_err());
    }

    #[test]
    fn choice_reports_everything() {
        let c = choose_parameters(13, 0.1).unwrap();
        assert_eq!((c.g, c.m, c.l, c.qubits), (26, 25, 15, 27));
        assert!(c.qubits <= c.qubit_estimate);
        assert_eq!(c.bound.meets_target(), Some(true));
        assert_eq!(c.closed_form_bound.meets_target(), Some(true));
    }
}
