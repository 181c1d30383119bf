//! File formats: CSV writers/readers for the numeric artifacts, the report
//! JSON, and atomic file writing.
//!
//! Formats are deliberately boring — comma-separated columns with a header
//! line, floats in `{:.16e}` scientific notation (17 significant digits,
//! enough to round-trip an f64 exactly) — so artifacts diff cleanly and a
//! rerun with the same configuration and seeds reproduces every file byte
//! for byte. dBm columns are display-only derivatives of the watt columns
//! and use 6 decimals; zero power renders as `-inf`.
//!
//! Writers return `String`s; [`write_atomic`] puts them on disk via a
//! temp-file-and-rename so a crash never leaves a half-written artifact.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::coherent::PrecoderSchedule;
use crate::error::{Error, Result};
use crate::evaluation::{EnergyReport, ReportMode, SweepOutcome, SweepResult};
use crate::noncoherent::PowerAllocation;
use crate::scenario::{AntennaLayout, DeviceLayout};
use crate::selection::SelectionResult;
use crate::units::dbm_or_neg_inf;

/// Write `bytes` to `path` atomically: the content lands in a `.tmp`
/// sibling first and is renamed into place, so readers only ever see the
/// old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::domain(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_dbm(power_w: f64) -> String {
    format!("{:.6}", dbm_or_neg_inf(power_w))
}

/// Channel matrix as `m,k,re,im`, row-major (antennas outer).
pub fn channel_csv(channel: &ChannelMatrix) -> String {
    let mut out = String::from("m,k,re,im\n");
    for m in 0..channel.num_antennas() {
        for k in 0..channel.num_receivers() {
            let h = channel.entries[(m, k)];
            out.push_str(&format!("{m},{k},{},{}\n", fmt(h.re), fmt(h.im)));
        }
    }
    out
}

/// Parse a channel CSV back into a matrix. Every (m, k) pair up to the
/// largest indices present must appear exactly once. The synthesis seed is
/// not part of the artifact; the result carries seed 0.
pub fn read_channel_csv(text: &str) -> Result<ChannelMatrix> {
    let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut max_m = 0usize;
    let mut max_k = 0usize;
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if row == 1 {
            if line != "m,k,re,im" {
                return Err(Error::Ingest {
                    row,
                    message: format!("expected header `m,k,re,im`, got `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Ingest {
                row,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse_idx = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Ingest {
                row,
                message: format!("`{s}` is not an index"),
            })
        };
        let parse_f = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Ingest {
                row,
                message: format!("`{s}` is not a number"),
            })
        };
        let m = parse_idx(fields[0])?;
        let k = parse_idx(fields[1])?;
        let re = parse_f(fields[2])?;
        let im = parse_f(fields[3])?;
        max_m = max_m.max(m);
        max_k = max_k.max(k);
        rows.push((m, k, Complex64::new(re, im)));
    }
    if rows.is_empty() {
        return Err(Error::Ingest {
            row: 1,
            message: "channel CSV has no data rows".to_string(),
        });
    }
    let (nm, nk) = (max_m + 1, max_k + 1);
    if rows.len() != nm * nk {
        return Err(Error::Ingest {
            row: rows.len() + 1,
            message: format!(
                "expected {} entries for a {nm} x {nk} channel, got {}",
                nm * nk,
                rows.len()
            ),
        });
    }
    let mut entries = DMatrix::from_element(nm, nk, Complex64::new(f64::NAN, 0.0));
    for (m, k, h) in rows {
        if !entries[(m, k)].re.is_nan() {
            return Err(Error::Ingest {
                row: 0,
                message: format!("entry ({m}, {k}) appears more than once"),
            });
        }
        entries[(m, k)] = h;
    }
    ChannelMatrix::from_entries(entries, 0)
}

/// Per-antenna powers as `m,power_w,power_dbm`.
pub fn allocation_csv(allocation: &PowerAllocation) -> String {
    let mut out = String::from("m,power_w,power_dbm\n");
    for (m, &q) in allocation.per_antenna_w.iter().enumerate() {
        out.push_str(&format!("{m},{},{}\n", fmt(q), fmt_dbm(q)));
    }
    out
}

/// Parse an allocation CSV back into per-antenna powers (the dBm column is
/// redundant and ignored).
pub fn read_allocation_csv(text: &str) -> Result<Vec<f64>> {
    let mut powers: Vec<(usize, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if row == 1 {
            if line != "m,power_w,power_dbm" {
                return Err(Error::Ingest {
                    row,
                    message: format!("expected header `m,power_w,power_dbm`, got `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Ingest {
                row,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let m: usize = fields[0].trim().parse().map_err(|_| Error::Ingest {
            row,
            message: format!("`{}` is not an index", fields[0]),
        })?;
        let q: f64 = fields[1].trim().parse().map_err(|_| Error::Ingest {
            row,
            message: format!("`{}` is not a number", fields[1]),
        })?;
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Ingest {
                row,
                message: format!("power must be >= 0 and finite, got {q}"),
            });
        }
        powers.push((m, q));
    }
    if powers.is_empty() {
        return Err(Error::Ingest {
            row: 1,
            message: "allocation CSV has no data rows".to_string(),
        });
    }
    let n = powers.len();
    let mut out = vec![f64::NAN; n];
    for (m, q) in powers {
        if m >= n {
            return Err(Error::Ingest {
                row: 0,
                message: format!("antenna index {m} with only {n} rows"),
            });
        }
        if !out[m].is_nan() {
            return Err(Error::Ingest {
                row: 0,
                message: format!("antenna {m} appears more than once"),
            });
        }
        out[m] = q;
    }
    Ok(out)
}

/// Beamforming schedule as `slot,antenna,re,im,power_w`, one row per
/// antenna weight. Beams occupying several slots are expanded, so `slot`
/// runs over the physical transmit slots; `power_w` is that antenna's
/// share `|w|^2` of the slot's transmit power.
pub fn schedule_csv(schedule: &PrecoderSchedule) -> String {
    let mut out = String::from("slot,antenna,re,im,power_w\n");
    let mut slot = 0usize;
    for (beam, &count) in schedule.beams.iter().zip(&schedule.slot_count_per_beam) {
        for _ in 0..count {
            for (m, w) in beam.iter().enumerate() {
                out.push_str(&format!(
                    "{slot},{m},{},{},{}\n",
                    fmt(w.re),
                    fmt(w.im),
                    fmt(w.norm_sqr())
                ));
            }
            slot += 1;
        }
    }
    out
}

/// Parse a schedule CSV. Each physical slot becomes its own beam with
/// count 1 — delivered energies are identical to the pre-expansion
/// schedule. The slot duration is not part of the artifact and must come
/// from the system parameters.
pub fn read_schedule_csv(text: &str, slot_duration_s: f64) -> Result<PrecoderSchedule> {
    if !(slot_duration_s > 0.0) {
        return Err(Error::domain(format!(
            "slot duration must be positive, got {slot_duration_s}"
        )));
    }
    let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut max_slot = 0usize;
    let mut max_m = 0usize;
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if row == 1 {
            if line != "slot,antenna,re,im,power_w" {
                return Err(Error::Ingest {
                    row,
                    message: format!(
                        "expected header `slot,antenna,re,im,power_w`, got `{line}`"
                    ),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Ingest {
                row,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_idx = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Ingest {
                row,
                message: format!("`{s}` is not an index"),
            })
        };
        let parse_f = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Ingest {
                row,
                message: format!("`{s}` is not a number"),
            })
        };
        let slot = parse_idx(fields[0])?;
        let m = parse_idx(fields[1])?;
        let re = parse_f(fields[2])?;
        let im = parse_f(fields[3])?;
        max_slot = max_slot.max(slot);
        max_m = max_m.max(m);
        rows.push((slot, m, Complex64::new(re, im)));
    }
    if rows.is_empty() {
        return Err(Error::Ingest {
            row: 1,
            message: "schedule CSV has no data rows".to_string(),
        });
    }
    let (slots, m_count) = (max_slot + 1, max_m + 1);
    if rows.len() != slots * m_count {
        return Err(Error::Ingest {
            row: rows.len() + 1,
            message: format!(
                "expected {} rows for {slots} slots x {m_count} antennas, got {}",
                slots * m_count,
                rows.len()
            ),
        });
    }
    let mut beams = vec![DVector::from_element(m_count, Complex64::new(f64::NAN, 0.0)); slots];
    for (slot, m, w) in rows {
        if !beams[slot][m].re.is_nan() {
            return Err(Error::Ingest {
                row: 0,
                message: format!("weight (slot {slot}, antenna {m}) appears more than once"),
            });
        }
        beams[slot][m] = w;
    }
    let total_energy_j = slot_duration_s
        * beams
            .iter()
            .map(|b| b.iter().map(|w| w.norm_sqr()).sum::<f64>())
            .sum::<f64>();
    Ok(PrecoderSchedule {
        slot_count_per_beam: vec![1; beams.len()],
        beams,
        slot_duration_s,
        total_energy_j,
    })
}

/// Antenna layout as `index,x,y,z,pair`.
pub fn antenna_csv(layout: &AntennaLayout) -> String {
    let mut out = String::from("index,x,y,z,pair\n");
    for (i, p) in layout.positions.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            fmt(p.x),
            fmt(p.y),
            fmt(p.z),
            layout.pair_index[i]
        ));
    }
    out
}

/// Device layout as `index,x,y,z,rack,shelf`.
pub fn device_csv(devices: &DeviceLayout) -> String {
    let mut out = String::from("index,x,y,z,rack,shelf\n");
    for (i, p) in devices.positions.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            fmt(p.x),
            fmt(p.y),
            fmt(p.z),
            devices.rack_id[i],
            devices.shelf_id[i]
        ));
    }
    out
}

/// Chosen antenna subset as `rank,antenna_index,x,y`.
pub fn selection_csv(selection: &SelectionResult, layout: &AntennaLayout) -> String {
    let mut out = String::from("rank,antenna_index,x,y\n");
    for (rank, &idx) in selection.chosen_indices.iter().enumerate() {
        let p = layout.positions[idx];
        out.push_str(&format!("{rank},{idx},{},{}\n", fmt(p.x), fmt(p.y)));
    }
    out
}

/// Delivered-energy CDF as `energy_j,fraction`. Negative energies (a
/// harvester cannot drain the battery it feeds) are clamped to zero for
/// display.
pub fn cdf_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("energy_j,fraction\n");
    for &(e, f) in points {
        out.push_str(&format!("{},{}\n", fmt(e.max(0.0)), fmt(f)));
    }
    out
}

/// Header of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str = "m,seed,power_w,power_dbm,active_antennas,used_slots,status";

/// One sweep row (no trailing newline):
/// `m,seed,power_w,power_dbm,active_antennas,used_slots,status`. Failed
/// jobs keep their row with empty numeric fields and the failure kind in
/// the status column.
pub fn sweep_row(point: &crate::evaluation::SweepPoint) -> String {
    match &point.outcome {
        SweepOutcome::Report { report } => format!(
            "{},{},{},{},{},{},optimal",
            point.antenna_count,
            point.seed,
            fmt(report.total_avg_tx_power_w),
            fmt_dbm(report.total_avg_tx_power_w),
            report.active_antennas,
            report.used_slots
        ),
        SweepOutcome::Infeasible { worst_receiver } => format!(
            "{},{},,,,,infeasible(receiver {})",
            point.antenna_count, point.seed, worst_receiver
        ),
        SweepOutcome::NumericalFailure => format!(
            "{},{},,,,,numerical_failure",
            point.antenna_count, point.seed
        ),
    }
}

/// All sweep rows under [`SWEEP_CSV_HEADER`].
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in &sweep.points {
        out.push_str(&sweep_row(p));
        out.push('\n');
    }
    out
}

/// The report JSON schema: the run summary plus the per-receiver energies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    pub mode: ReportMode,
    pub total_avg_tx_power_w: f64,
    /// Absent when the power is zero (dBm undefined).
    pub total_avg_tx_power_dbm: Option<f64>,
    pub active_antennas: usize,
    pub used_slots: usize,
    /// Delivered DC energy per receiver [J], clamped at zero for display.
    pub energies: Vec<f64>,
}

impl From<&EnergyReport> for ReportJson {
    fn from(report: &EnergyReport) -> Self {
        ReportJson {
            mode: report.mode,
            total_avg_tx_power_w: report.total_avg_tx_power_w,
            total_avg_tx_power_dbm: (report.total_avg_tx_power_w > 0.0)
                .then(|| dbm_or_neg_inf(report.total_avg_tx_power_w)),
            active_antennas: report.active_antennas,
            used_slots: report.used_slots,
            energies: report
                .per_receiver_energy_j
                .iter()
                .map(|&e| e.max(0.0))
                .collect(),
        }
    }
}

/// Serialize a report to pretty JSON (trailing newline included).
pub fn report_json(report: &EnergyReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&ReportJson::from(report))?;
    text.push('\n');
    Ok(text)
}
