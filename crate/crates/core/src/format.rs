//! Text formatting shared by the CSV, summary and design-table writers.

/// Number of significant digits written for every real value.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits in scientific notation
/// (`1.23456789012e-3`). Non-finite values are written as `inf`, `-inf`, `nan`.
pub fn sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
    }
}

/// Comma-joined [`sig`] values.
pub fn sig_list(values: &[f64]) -> String {
    values.iter().map(|v| sig(*v)).collect::<Vec<_>>().join(",")
}

/// Loss values in dB, four decimals. Values that round to zero print
/// without a sign.
pub fn db(x: f64) -> String {
    let text = format!("{x:.4}");
    match text.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(sig(-0.00125), "-1.25000000000e-3");
        assert_eq!(sig(f64::INFINITY), "inf");
        let parsed: f64 = sig(1.0 / 3.0).parse().unwrap();
        assert!((parsed - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn db_drops_sign_of_rounded_zero() {
        assert_eq!(db(-1e-9), "0.0000");
        assert_eq!(db(-0.25), "-0.2500");
        assert_eq!(db(1.96120), "1.9612");
    }
}
