//! Lossless decimal formatting for f64 output.

/// Formats `v` with 17 significant digits in scientific notation.
///
/// Every finite f64 survives a parse round trip through this form.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.16e}", v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_examples() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(-0.25), "-2.5000000000000000e-1");
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = fmt17(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
