//! Shared numeric text formatting.

/// Formats a float with 17 significant digits in scientific notation.
/// 17 digits are enough to reproduce any `f64` exactly, so values written
/// through this helper survive a parse round-trip bit-for-bit.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_awkward_values_exactly() {
        for &x in &[
            0.0,
            -0.0,
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            -2.2250738585072014e-308,
            1.7976931348623157e308,
            5.0,
        ] {
            let back: f64 = g17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {}", g17(x));
        }
    }

    #[test]
    fn always_emits_seventeen_significant_digits() {
        assert_eq!(g17(2.5), "2.5000000000000000e0");
        assert_eq!(g17(-0.125), "-1.2500000000000000e-1");
    }
}
