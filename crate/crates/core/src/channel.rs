//! Indoor line-of-sight channel synthesis.
//!
//! Each antenna–receiver link is a single complex gain
//! `h_{m,k} = sqrt(L_{m,k}) * exp(-j*phi_{m,k})`: a deterministic
//! large-scale amplitude from an indoor-factory LoS path-loss model, and a
//! uniformly random phase drawn from a seeded, portable PRNG. The channel
//! is static over the whole charging window (receivers are shelf labels —
//! nothing moves), so one matrix per scenario instance is all there is.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{AntennaLayout, DeviceLayout, SystemParameters};
use crate::seeding::rng_from_seed;

/// Log-distance path-loss model: `PL_dB = a0 + a1*log10(d_m) + a2*log10(f_GHz)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathlossModel {
    /// Intercept [dB] at d = 1 m, f = 1 GHz.
    pub a0: f64,
    /// Distance slope [dB/decade]; must be positive.
    pub a1: f64,
    /// Frequency slope [dB/decade].
    pub a2: f64,
    /// Free-text provenance of the constants.
    pub reference: String,
}

impl Default for PathlossModel {
    fn default() -> Self {
        Self {
            a0: 31.84,
            a1: 21.50,
            a2: 19.00,
            reference: "3GPP TR 38.901 InF-LoS, no shadow fading".to_string(),
        }
    }
}

impl PathlossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a1 > 0.0) {
            return Err(Error::config(
                "a1",
                format!("distance slope must be positive, got {}", self.a1),
            ));
        }
        Ok(())
    }
}

/// Path loss [dB] at `distance_m` metres and carrier `carrier_hz`.
pub fn pathloss_db(distance_m: f64, carrier_hz: f64, model: &PathlossModel) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::domain(format!(
            "path loss undefined at distance {distance_m} m (antenna and device coincide?)"
        )));
    }
    if !(carrier_hz > 0.0) {
        return Err(Error::domain(format!(
            "carrier frequency must be positive, got {carrier_hz} Hz"
        )));
    }
    Ok(model.a0 + model.a1 * distance_m.log10() + model.a2 * (carrier_hz / 1e9).log10())
}

/// Linear power gain `L = 10^(-PL_dB/10)`.
pub fn large_scale_gain(distance_m: f64, carrier_hz: f64, model: &PathlossModel) -> Result<f64> {
    Ok(10f64.powf(-pathloss_db(distance_m, carrier_hz, model)? / 10.0))
}

/// The complex channel between every antenna and every receiver.
///
/// `entries` is M x K (antennas by receivers); `gains` caches the linear
/// power gains `|h_{m,k}|^2`. The matrix is immutable once synthesized —
/// `frozen` records the static-channel assumption explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub gains: DMatrix<f64>,
    pub seed: u64,
    pub frozen: bool,
}

impl ChannelMatrix {
    pub fn num_antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_receivers(&self) -> usize {
        self.entries.ncols()
    }

    /// Channel vector h_k of receiver `k` (one entry per antenna).
    pub fn receiver_channel(&self, k: usize) -> nalgebra::DVector<Complex64> {
        self.entries.column(k).into_owned()
    }

    /// Restrict to an antenna subset: keeps the rows at `indices`, in the
    /// given order. Phases are untouched, so the subset of a synthesized
    /// channel equals the channel those antennas saw in the full run.
    pub fn subset_rows(&self, indices: &[usize]) -> Result<ChannelMatrix> {
        for &i in indices {
            if i >= self.num_antennas() {
                return Err(Error::domain(format!(
                    "antenna index {i} out of range for {}-antenna channel",
                    self.num_antennas()
                )));
            }
        }
        Ok(ChannelMatrix {
            entries: self.entries.select_rows(indices.iter()),
            gains: self.gains.select_rows(indices.iter()),
            seed: self.seed,
            frozen: self.frozen,
        })
    }

    /// Build a matrix from raw complex entries (e.g. parsed from CSV).
    pub fn from_entries(entries: DMatrix<Complex64>, seed: u64) -> Result<ChannelMatrix> {
        if entries.is_empty() {
            return Err(Error::domain("channel matrix must be non-empty"));
        }
        let gains = entries.map(|h| h.norm_sqr());
        let cm = ChannelMatrix {
            entries,
            gains,
            seed,
            frozen: true,
        };
        cm.validate()?;
        Ok(cm)
    }

    /// Check the structural invariants: gain cache consistent with the
    /// entries, and every gain in (0, 1).
    pub fn validate(&self) -> Result<()> {
        for m in 0..self.num_antennas() {
            for k in 0..self.num_receivers() {
                let g = self.gains[(m, k)];
                let h2 = self.entries[(m, k)].norm_sqr();
                if (g - h2).abs() > 1e-12 * g.abs().max(h2.abs()) {
                    return Err(Error::domain(format!(
                        "gain cache out of sync at ({m}, {k}): {g} vs |h|^2 = {h2}"
                    )));
                }
                if !(g > 0.0 && g < 1.0) {
                    return Err(Error::domain(format!(
                        "linear gain at ({m}, {k}) must lie in (0, 1), got {g}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Synthesize the channel for a scenario.
///
/// Phases are drawn i.i.d. uniform on [0, 2*pi) in row-major order —
/// antennas outer, receivers inner — from a ChaCha8 stream seeded by
/// `seed`, so the matrix is a pure function of (layouts, params, model,
/// seed) and reproducible across platforms.
pub fn synthesize_channel(
    antennas: &AntennaLayout,
    devices: &DeviceLayout,
    params: &SystemParameters,
    model: &PathlossModel,
    seed: u64,
) -> Result<ChannelMatrix> {
    if antennas.is_empty() || devices.is_empty() {
        return Err(Error::domain("layouts must be non-empty"));
    }
    model.validate()?;
    let m_count = antennas.len();
    let k_count = devices.len();
    let mut entries = DMatrix::<Complex64>::zeros(m_count, k_count);
    let mut gains = DMatrix::<f64>::zeros(m_count, k_count);
    let mut rng = rng_from_seed(seed);
    for m in 0..m_count {
        for k in 0..k_count {
            let d = antennas.positions[m].distance(&devices.positions[k]);
            if d <= 0.0 {
                return Err(Error::domain(format!(
                    "antenna {m} and device {k} coincide"
                )));
            }
            let gain = large_scale_gain(d, params.carrier_frequency_hz, model)?;
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            entries[(m, k)] = Complex64::from_polar(gain.sqrt(), -phase);
            gains[(m, k)] = gain;
        }
    }
    let cm = ChannelMatrix {
        entries,
        gains,
        seed,
        frozen: true,
    };
    cm.validate()?;
    Ok(cm)
}
