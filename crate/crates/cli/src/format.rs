//! Locale-free number formatting for CSV output.

/// Six significant digits, `%g` style, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding to six digits can carry into the next decade
    let rounded: f64 = format!("{x:.5e}").parse().expect("valid float");
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) { exp + 1 } else { exp };
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        format!("{}e{e}", trim(mantissa.to_string()))
    }
}

/// Shortest representation that parses back to the same value.
pub fn exact(x: f64) -> String {
    format!("{x}")
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digits() {
        assert_eq!(sig6(0.0362329), "0.0362329");
        assert_eq!(sig6(0.1), "0.1");
        assert_eq!(sig6(0.001), "0.001");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(0.0883612345), "0.0883612");
        assert_eq!(sig6(9.9999996), "10");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(1e-7), "1e-7");
    }

    #[test]
    fn exact_round_trips() {
        for x in [0.1, 1.0 / 3.0, 0.036232912345678] {
            assert_eq!(exact(x).parse::<f64>().unwrap(), x);
        }
    }
}
