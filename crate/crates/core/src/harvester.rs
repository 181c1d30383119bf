//! RF-to-DC harvester model and the energy bookkeeping built on it.
//!
//! The rectifier is modelled as an affine map: received RF power `p_rf`
//! yields DC power `alpha * p_rf - beta`, where `alpha` is the conversion
//! efficiency and `beta` the minimum required received RF power expressed
//! as a power cost. The raw model is deliberately *not* clamped at zero —
//! the optimizers keep the `-beta` term inside their constraints and rely
//! on the exact affine algebra. [`rf_to_dc_power_clamped`] exists for
//! reporting, where a negative harvested energy would be unphysical noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::SystemParameters;

/// Affine harvester: DC power = `efficiency` * RF power - `threshold_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvesterModel {
    /// RF-to-DC conversion efficiency alpha (dimensionless, in (0, 1]).
    pub efficiency: f64,
    /// Minimum required received RF power beta [W].
    pub threshold_w: f64,
}

impl Default for HarvesterModel {
    fn default() -> Self {
        Self {
            efficiency: 0.16,
            threshold_w: 1.58e-5,
        }
    }
}

impl From<&SystemParameters> for HarvesterModel {
    fn from(params: &SystemParameters) -> Self {
        Self {
            efficiency: params.harvester_efficiency,
            threshold_w: params.harvester_threshold_w,
        }
    }
}

impl HarvesterModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::config(
                "efficiency",
                format!("must lie in (0, 1], got {}", self.efficiency),
            ));
        }
        if !(self.threshold_w >= 0.0) {
            return Err(Error::config(
                "threshold_w",
                format!("must be >= 0, got {}", self.threshold_w),
            ));
        }
        Ok(())
    }

    /// Input power at which DC output crosses zero: `threshold_w / efficiency`.
    pub fn activation_power_w(&self) -> f64 {
        self.threshold_w / self.efficiency
    }
}

/// Raw affine DC output power [W], possibly negative below the activation
/// point.
pub fn rf_to_dc_power(p_rf_w: f64, model: &HarvesterModel) -> Result<f64> {
    if !(p_rf_w >= 0.0) {
        return Err(Error::domain(format!(
            "received RF power must be non-negative, got {p_rf_w} W"
        )));
    }
    Ok(model.efficiency * p_rf_w - model.threshold_w)
}

/// DC output power clamped at zero, for reporting (a rectifier cannot
/// drain the battery it charges).
pub fn rf_to_dc_power_clamped(p_rf_w: f64, model: &HarvesterModel) -> Result<f64> {
    Ok(rf_to_dc_power(p_rf_w, model)?.max(0.0))
}

/// DC energy [J] harvested over a schedule of per-slot received RF powers,
/// each slot lasting `slot_duration_s`.
///
/// Returns `sum_n T * alpha * p_rf[n] - N_used * T * beta` where `N_used`
/// is the number of slots in the list — the threshold is paid in every
/// listed slot, matching the constraint form the optimizers use.
pub fn delivered_dc_energy(
    p_rf_per_slot: &[f64],
    slot_duration_s: f64,
    model: &HarvesterModel,
) -> Result<f64> {
    if p_rf_per_slot.is_empty() {
        return Err(Error::domain("schedule must contain at least one slot"));
    }
    if !(slot_duration_s > 0.0) {
        return Err(Error::domain(format!(
            "slot duration must be positive, got {slot_duration_s} s"
        )));
    }
    let mut energy = 0.0;
    for (n, &p) in p_rf_per_slot.iter().enumerate() {
        if !(p >= 0.0) {
            return Err(Error::domain(format!(
                "received RF power in slot {n} must be non-negative, got {p} W"
            )));
        }
        energy += slot_duration_s * (model.efficiency * p - model.threshold_w);
    }
    Ok(energy)
}

/// RF-side energy target [J]: the total received RF energy a receiver
/// needs so that `E_j` joules come out DC over `num_slots` slots of
/// `slot_duration_s` each. Equals `(E_j + N*T*beta) / alpha`.
pub fn required_rf_energy(
    e_j: f64,
    num_slots: usize,
    slot_duration_s: f64,
    model: &HarvesterModel,
) -> Result<f64> {
    if !(e_j > 0.0) {
        return Err(Error::domain(format!(
            "required DC energy must be positive, got {e_j} J"
        )));
    }
    let window = num_slots as f64 * slot_duration_s;
    Ok((e_j + window * model.threshold_w) / model.efficiency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model() -> HarvesterModel {
        HarvesterModel::default()
    }

    #[test]
    fn affine_model_values() {
        // 1 mW in: 0.16 * 1e-3 - 1.58e-5 = 1.442e-4 W out.
        assert_relative_eq!(
            rf_to_dc_power(1e-3, &model()).unwrap(),
            1.442e-4,
            max_relative = 1e-12
        );
        // Activation point beta / alpha = 98.75 uW gives exactly zero.
        let p0 = model().activation_power_w();
        assert_relative_eq!(p0, 9.875e-5, max_relative = 1e-12);
        assert_relative_eq!(rf_to_dc_power(p0, &model()).unwrap(), 0.0, epsilon = 1e-20);
        // Zero input leaves the bare intercept, unclamped.
        assert_eq!(rf_to_dc_power(0.0, &model()).unwrap(), -1.58e-5);
        assert_eq!(rf_to_dc_power_clamped(0.0, &model()).unwrap(), 0.0);
    }

    #[test]
    fn negative_input_power_is_rejected() {
        assert!(rf_to_dc_power(-1e-3, &model()).is_err());
        assert!(delivered_dc_energy(&[1e-3, -1e-3], 1.0, &model()).is_err());
    }

    #[test]
    fn delivered_energy_over_slots() {
        let m = model();
        // A slot at the activation point harvests nothing.
        let e = delivered_dc_energy(&[m.activation_power_w()], 1.0, &m).unwrap();
        assert_relative_eq!(e, 0.0, epsilon = 1e-18);
        // Two 1 mW slots of 1 s each.
        let e = delivered_dc_energy(&[1e-3, 1e-3], 1.0, &m).unwrap();
        assert_relative_eq!(e, 2.0 * 1.442e-4, max_relative = 1e-12);
        // Idle slots still pay the threshold.
        let n = 84;
        let t = 43_200.0 / n as f64;
        let e = delivered_dc_energy(&vec![0.0; n], t, &m).unwrap();
        assert_relative_eq!(e, -43_200.0 * 1.58e-5, max_relative = 1e-12);
    }

    #[test]
    fn empty_schedule_and_bad_duration_are_rejected() {
        assert!(delivered_dc_energy(&[], 1.0, &model()).is_err());
        assert!(delivered_dc_energy(&[1e-3], 0.0, &model()).is_err());
    }

    #[test]
    fn rf_energy_target_for_the_reference_budget() {
        // 0.5 J over 12 h: (0.5 + 43200 * 1.58e-5) / 0.16.
        let m = model();
        let e = required_rf_energy(0.5, 84, 43_200.0 / 84.0, &m).unwrap();
        assert_relative_eq!(e, (0.5 + 43_200.0 * 1.58e-5) / 0.16, max_relative = 1e-15);
        assert_relative_eq!(e, 7.391, max_relative = 1e-3);
        // Without the threshold the target is just E / alpha.
        let no_beta = HarvesterModel {
            threshold_w: 0.0,
            ..m
        };
        assert_relative_eq!(
            required_rf_energy(0.5, 84, 1.0, &no_beta).unwrap(),
            0.5 / 0.16,
            max_relative = 1e-15
        );
    }

    #[test]
    fn doubling_slots_at_fixed_duration_adds_the_threshold_energy() {
        let m = model();
        let t = 10.0;
        let n = 50;
        let base = required_rf_energy(0.5, n, t, &m).unwrap();
        let doubled = required_rf_energy(0.5, 2 * n, t, &m).unwrap();
        let extra = n as f64 * t * m.threshold_w / m.efficiency;
        assert_relative_eq!(doubled - base, extra, max_relative = 1e-12);
    }

    #[test]
    fn model_validation() {
        assert!(model().validate().is_ok());
        assert!(HarvesterModel {
            efficiency: 0.0,
            threshold_w: 0.0
        }
        .validate()
        .is_err());
        assert!(HarvesterModel {
            efficiency: 1.5,
            threshold_w: 0.0
        }
        .validate()
        .is_err());
        assert!(HarvesterModel {
            efficiency: 0.5,
            threshold_w: -1.0
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn superposition_pays_the_threshold_once(
            p1 in 0.0f64..1.0,
            p2 in 0.0f64..1.0,
        ) {
            let m = model();
            let lhs = rf_to_dc_power(p1, &m).unwrap()
                + rf_to_dc_power(p2, &m).unwrap()
                + m.threshold_w;
            let rhs = rf_to_dc_power(p1 + p2, &m).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-15 * rhs.abs().max(1.0));
        }

        #[test]
        fn delivered_energy_matches_per_slot_sum(
            powers in proptest::collection::vec(0.0f64..1.0, 1..20),
            t in 0.1f64..1e4,
        ) {
            let m = model();
            let whole = delivered_dc_energy(&powers, t, &m).unwrap();
            let summed: f64 = powers
                .iter()
                .map(|&p| t * rf_to_dc_power(p, &m).unwrap())
                .sum();
            prop_assert!((whole - summed).abs() <= 1e-9 * summed.abs().max(1e-12));
        }

        #[test]
        fn required_energy_feeds_back_exactly(
            e in 1e-3f64..10.0,
            n in 1usize..200,
            t in 0.1f64..1e4,
        ) {
            // Spreading the RF energy target uniformly over the window
            // delivers exactly the requested DC energy.
            let m = model();
            let target = required_rf_energy(e, n, t, &m).unwrap();
            let per_slot = target / (n as f64 * t);
            let harvested = delivered_dc_energy(&vec![per_slot; n], t, &m).unwrap();
            prop_assert!((harvested - e).abs() <= 1e-9 * e);
        }
    }
}
