//! Deterministic float formatting for emitted files.

/// Formats with 12 significant digits: the value is rounded via scientific
/// notation, then printed in the shortest plain-decimal form of the rounded
/// value. Identical inputs always yield identical bytes.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("round-trip of finite float");
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(10.0f64.ln()), "2.30258509299");
        assert_eq!(fmt_sig(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(fmt_sig(1234.5), "1234.5");
        assert_eq!(fmt_sig(f64::NAN), "nan");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn deterministic_across_calls() {
        for i in 0..1000 {
            let x = (i as f64 * 0.7391).sin() * 10f64.powi(i % 7 - 3);
            assert_eq!(fmt_sig(x), fmt_sig(x));
        }
    }
}
