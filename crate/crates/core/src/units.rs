//! dBm/watt conversions.
//!
//! All computation inside the library is in SI units; these helpers exist
//! for the I/O boundary only (CLI flags, CSV columns, report fields).

use crate::error::{Error, Result};

/// Convert a power in watts to dBm. Errors on non-positive power.
pub fn dbm_from_watts(power_w: f64) -> Result<f64> {
    if !(power_w > 0.0) {
        return Err(Error::domain(format!(
            "dBm undefined for non-positive power {power_w} W"
        )));
    }
    Ok(10.0 * (power_w * 1e3).log10())
}

/// Convert a power in dBm to watts.
pub fn watts_from_dbm(power_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(power_dbm / 10.0)
}

/// dBm column formatting for CSV exports: zero powers render as `-inf`
/// rather than erroring, everything else goes through [`dbm_from_watts`].
pub fn dbm_or_neg_inf(power_w: f64) -> f64 {
    if power_w > 0.0 {
        10.0 * (power_w * 1e3).log10()
    } else {
        f64::NEG_INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_watt_is_30_dbm() {
        assert_relative_eq!(dbm_from_watts(1.0).unwrap(), 30.0, max_relative = 1e-12);
    }

    #[test]
    fn multi_watt_power_to_dbm() {
        // 5.70450434 W -> 37.5622 dBm.
        let dbm = dbm_from_watts(5.704_504_34).unwrap();
        assert_relative_eq!(dbm, 37.562_179, max_relative = 1e-6);
    }

    #[test]
    fn testbed_cap_13_4_dbm_is_21_88_mw() {
        let w = watts_from_dbm(13.4);
        assert_relative_eq!(w, 21.877_616e-3, max_relative = 1e-6);
    }

    #[test]
    fn round_trip_is_exact_to_1e12() {
        for &p in &[1e-6, 1e-3, 0.5, 4.0, 336.0] {
            let back = watts_from_dbm(dbm_from_watts(p).unwrap());
            assert_relative_eq!(back, p, max_relative = 1e-12);
        }
    }

    #[test]
    fn non_positive_power_is_a_domain_error() {
        assert!(dbm_from_watts(0.0).is_err());
        assert!(dbm_from_watts(-1.0).is_err());
    }

    #[test]
    fn csv_fallback_renders_zero_as_neg_inf() {
        assert_eq!(dbm_or_neg_inf(0.0), f64::NEG_INFINITY);
        assert_relative_eq!(dbm_or_neg_inf(1.0), 30.0);
    }
}
