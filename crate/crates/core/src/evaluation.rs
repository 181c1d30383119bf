//! Performance metrics, antenna-count sweeps, and measurement ingestion.
//!
//! Everything an optimized schedule gets judged by lives here: the
//! per-receiver DC energy over the charging window, the total transmit
//! power under the continuous-transmission convention (total energy over
//! the whole window, as if the array never paused), the number of antennas
//! carrying real power, and the number of occupied time slots. On top of
//! the single-run report sit the empirical CDF of delivered energy, the
//! antenna-count sweep (selection, channel restriction, solve, evaluate —
//! averaged over seeds), and the ingestion path that turns measured
//! average RF powers into the same report shape, so simulated and measured
//! runs can be compared file against file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{synthesize_channel, ChannelMatrix, PathlossModel};
use crate::coherent::{
    build_coherent_problem, recover_precoders, solve_sdp, CoherentStatus, PrecoderSchedule,
    DEFAULT_EPSILON_RANK,
};
use crate::error::{Error, Result};
use crate::harvester::HarvesterModel;
use crate::noncoherent::{
    active_antenna_count, expected_dc_power, solve_noncoherent, NoncoherentProblem,
    PowerAllocation, SolveStatus,
};
use crate::scenario::{AntennaLayout, DeviceLayout, SystemParameters};
use crate::sdp::SdpOptions;
use crate::seeding::job_seed;
use crate::selection::select_subset;

/// Antennas count as active when they carry more than this fraction of
/// the largest per-antenna power (or energy, for beamformed schedules).
pub const ACTIVE_ANTENNA_REL_THRESHOLD: f64 = 0.01;

/// Which pipeline produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    Noncoherent,
    Coherent,
    Measured,
}

/// Transmission strategy for solves and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Noncoherent,
    Coherent,
}

impl SolveMode {
    pub fn report_mode(self) -> ReportMode {
        match self {
            SolveMode::Noncoherent => ReportMode::Noncoherent,
            SolveMode::Coherent => ReportMode::Coherent,
        }
    }
}

/// What one schedule delivers, and what it costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// DC energy each receiver collects over the window [J], length K.
    pub per_receiver_energy_j: Vec<f64>,
    /// Total transmit energy divided by the whole window N*T [W] — the
    /// continuous-transmission convention, so coherent schedules that idle
    /// most slots are still comparable to always-on ones.
    pub total_avg_tx_power_w: f64,
    /// Antennas above [`ACTIVE_ANTENNA_REL_THRESHOLD`].
    pub active_antennas: usize,
    /// Time slots actually transmitting.
    pub used_slots: usize,
    pub mode: ReportMode,
}

impl EnergyReport {
    /// Smallest delivered energy [J].
    pub fn min_energy_j(&self) -> f64 {
        self.per_receiver_energy_j
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest delivered energy [J].
    pub fn max_energy_j(&self) -> f64 {
        self.per_receiver_energy_j
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One sweep job: a (antenna count, seed) pair and how it ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub antenna_count: usize,
    pub seed: u64,
    pub outcome: SweepOutcome,
}

/// Terminal state of a sweep job. Failures stay in the record — a sweep
/// never aborts because one subset could not reach the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepOutcome {
    Report { report: EnergyReport },
    Infeasible { worst_receiver: usize },
    NumericalFailure,
}

/// Seed-averaged sweep over antenna counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Counts with at least one successful seed, strictly increasing.
    pub antenna_counts: Vec<usize>,
    /// Per-count report, averaged over the seeds that succeeded.
    pub reports: Vec<EnergyReport>,
    pub seeds: Vec<u64>,
    /// Every (count, seed) job, successes and failures alike; counts
    /// outer, seeds inner, both in input order.
    pub points: Vec<SweepPoint>,
}

/// Judge a non-coherent power allocation.
///
/// Each receiver's energy is `N*T*(alpha * sum_m g_mk q_m - beta)`; the
/// same static powers run in every slot, so all N slots are used and the
/// average transmit power is simply `sum_m q_m`.
pub fn evaluate_noncoherent(
    allocation: &PowerAllocation,
    problem: &NoncoherentProblem,
) -> Result<EnergyReport> {
    if !allocation.status.is_optimal() {
        return Err(Error::domain(
            "only optimal allocations are worth reporting on",
        ));
    }
    let window = problem.params.window_s;
    let per_receiver_energy_j: Vec<f64> = expected_dc_power(allocation, problem)?
        .into_iter()
        .map(|p| window * p)
        .collect();
    Ok(EnergyReport {
        per_receiver_energy_j,
        total_avg_tx_power_w: allocation.total_power_w(),
        active_antennas: active_antenna_count(allocation, ACTIVE_ANTENNA_REL_THRESHOLD),
        used_slots: problem.params.num_slots,
        mode: ReportMode::Noncoherent,
    })
}

/// Judge a beamforming schedule against the channel it was designed for.
///
/// Receiver k collects `sum_s count_s * T * alpha * |h_k' w_s|^2` minus the
/// threshold cost `N*T*beta` of sitting through the whole window; the
/// average transmit power spreads the schedule's energy over all N slots.
pub fn evaluate_coherent(
    schedule: &PrecoderSchedule,
    channel: &ChannelMatrix,
    params: &SystemParameters,
    harvester: &HarvesterModel,
) -> Result<EnergyReport> {
    let m = channel.num_antennas();
    let k_count = channel.num_receivers();
    if schedule.beams.is_empty() {
        return Err(Error::domain("schedule has no beams"));
    }
    for (s, beam) in schedule.beams.iter().enumerate() {
        if beam.len() != m {
            return Err(Error::config(
                "schedule",
                format!(
                    "beam {s} drives {} antennas but the channel has {m}",
                    beam.len()
                ),
            ));
        }
    }
    let t = schedule.slot_duration_s;
    let alpha = harvester.efficiency;
    let window_cost = params.num_slots as f64 * t * harvester.threshold_w;
    let mut per_receiver_energy_j = vec![-window_cost; k_count];
    for (beam, &count) in schedule.beams.iter().zip(&schedule.slot_count_per_beam) {
        for (k, energy) in per_receiver_energy_j.iter_mut().enumerate() {
            let h = channel.entries.column(k);
            let inner: num_complex::Complex64 =
                h.iter().zip(beam.iter()).map(|(a, b)| a * b).sum();
            *energy += count as f64 * t * alpha * inner.norm_sqr();
        }
    }
    // Active antennas by their share of transmit energy across the
    // schedule, same relative threshold as the static strategy.
    let mut per_antenna_energy = vec![0.0f64; m];
    for (beam, &count) in schedule.beams.iter().zip(&schedule.slot_count_per_beam) {
        for (mm, w) in beam.iter().enumerate() {
            per_antenna_energy[mm] += count as f64 * t * w.norm_sqr();
        }
    }
    let max_energy = per_antenna_energy.iter().copied().fold(0.0f64, f64::max);
    let active_antennas = if max_energy > 0.0 {
        per_antenna_energy
            .iter()
            .filter(|&&e| e > ACTIVE_ANTENNA_REL_THRESHOLD * max_energy)
            .count()
    } else {
        0
    };
    Ok(EnergyReport {
        per_receiver_energy_j,
        total_avg_tx_power_w: schedule.total_energy_j / params.window_s,
        active_antennas,
        used_slots: schedule.used_slots(),
        mode: ReportMode::Coherent,
    })
}

/// Empirical CDF: values ascending, fraction i/K at the i-th smallest.
pub fn cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::domain("CDF of an empty sample is undefined"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect())
}

/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty sample is undefined"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Interquartile range of a sample.
pub fn interquartile_range(values: &[f64]) -> Result<f64> {
    Ok(quantile(values, 0.75)? - quantile(values, 0.25)?)
}

/// Run the full pipeline once for an antenna subset of size `count`:
/// select, restrict the channel, solve in `mode`, evaluate.
///
/// The channel must be the full-array synthesis; the subset keeps the rows
/// the chosen antennas had there, so `count = M` is exactly the
/// no-selection run.
pub fn run_subset_job(
    full_channel: &ChannelMatrix,
    antennas: &AntennaLayout,
    params: &SystemParameters,
    count: usize,
    selection_seed: u64,
    mode: SolveMode,
) -> Result<SweepOutcome> {
    let selection = select_subset(antennas, count, selection_seed)?;
    let sub = full_channel.subset_rows(&selection.chosen_indices)?;
    let harvester = HarvesterModel::from(params);
    match mode {
        SolveMode::Noncoherent => {
            let problem = NoncoherentProblem::from_channel(&sub, params)?;
            let allocation = solve_noncoherent(&problem)?;
            match allocation.status {
                SolveStatus::Optimal => Ok(SweepOutcome::Report {
                    report: evaluate_noncoherent(&allocation, &problem)?,
                }),
                SolveStatus::Infeasible { worst_receiver, .. } => {
                    Ok(SweepOutcome::Infeasible { worst_receiver })
                }
                SolveStatus::NumericalFailure => Ok(SweepOutcome::NumericalFailure),
            }
        }
        SolveMode::Coherent => {
            let problem = build_coherent_problem(&sub, params, &harvester)?;
            let solution = solve_sdp(&problem, &SdpOptions::default())?;
            match solution.status {
                CoherentStatus::Optimal => {
                    let schedule = recover_precoders(
                        &solution,
                        &problem.params,
                        &harvester,
                        DEFAULT_EPSILON_RANK,
                    )?;
                    Ok(SweepOutcome::Report {
                        report: evaluate_coherent(&schedule, &sub, &problem.params, &harvester)?,
                    })
                }
                CoherentStatus::Infeasible { receiver } => Ok(SweepOutcome::Infeasible {
                    worst_receiver: receiver,
                }),
                CoherentStatus::NumericalFailure => Ok(SweepOutcome::NumericalFailure),
            }
        }
    }
}

/// Sweep the antenna count: for every count and seed, pick a subset,
/// restrict that seed's channel to it, solve, and evaluate.
///
/// Per-job randomness is derived as `job_seed(seed, count)` for the
/// selection while the channel itself is the seed's full-array synthesis,
/// so jobs are independent of execution order and `count = M` reproduces
/// the unrestricted run bit for bit. Failures are recorded in place and
/// the sweep carries on; a count appears in the averaged lists only if at
/// least one of its seeds succeeded.
pub fn sweep_antennas(
    params: &SystemParameters,
    antennas: &AntennaLayout,
    devices: &DeviceLayout,
    pathloss: &PathlossModel,
    counts: &[usize],
    seeds: &[u64],
    mode: SolveMode,
) -> Result<SweepResult> {
    if counts.is_empty() || seeds.is_empty() {
        return Err(Error::domain("sweep needs at least one count and one seed"));
    }
    if !counts.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("antenna counts must be strictly increasing"));
    }
    if *counts.last().unwrap() > antennas.len() {
        return Err(Error::domain(format!(
            "count {} exceeds the {}-antenna layout",
            counts.last().unwrap(),
            antennas.len()
        )));
    }

    let mut channels: BTreeMap<u64, ChannelMatrix> = BTreeMap::new();
    for &seed in seeds {
        channels
            .entry(seed)
            .or_insert(synthesize_channel(antennas, devices, params, pathloss, seed)?);
    }

    let mut points = Vec::with_capacity(counts.len() * seeds.len());
    let mut antenna_counts = Vec::new();
    let mut reports = Vec::new();
    for &count in counts {
        let mut successes: Vec<&EnergyReport> = Vec::new();
        for &seed in seeds {
            let outcome = run_subset_job(
                &channels[&seed],
                antennas,
                params,
                count,
                job_seed(seed, count),
                mode,
            )?;
            points.push(SweepPoint {
                antenna_count: count,
                seed,
                outcome,
            });
        }
        for point in &points[points.len() - seeds.len()..] {
            if let SweepOutcome::Report { report } = &point.outcome {
                successes.push(report);
            }
        }
        if let Some(avg) = average_reports(&successes) {
            antenna_counts.push(count);
            reports.push(avg);
        }
    }
    Ok(SweepResult {
        antenna_counts,
        reports,
        seeds: seeds.to_vec(),
        points,
    })
}

/// Element-wise mean of reports (integer fields rounded to nearest).
fn average_reports(reports: &[&EnergyReport]) -> Option<EnergyReport> {
    let first = reports.first()?;
    let n = reports.len() as f64;
    let k = first.per_receiver_energy_j.len();
    let mut per_receiver_energy_j = vec![0.0f64; k];
    let mut power = 0.0f64;
    let mut active = 0.0f64;
    let mut slots = 0.0f64;
    for r in reports {
        for (acc, &e) in per_receiver_energy_j.iter_mut().zip(&r.per_receiver_energy_j) {
            *acc += e / n;
        }
        power += r.total_avg_tx_power_w / n;
        active += r.active_antennas as f64 / n;
        slots += r.used_slots as f64 / n;
    }
    Some(EnergyReport {
        per_receiver_energy_j,
        total_avg_tx_power_w: power,
        active_antennas: active.round() as usize,
        used_slots: slots.round() as usize,
        mode: first.mode,
    })
}

/// Rescale an allocation so its largest per-antenna power equals `cap_w`,
/// keeping all power ratios exactly (one shared multiplication).
///
/// The allocation problem is homogeneous — scaling every power by s is
/// optimal for the target scaled by s — so the result is the optimum of
/// the correspondingly scaled requirement and the duals carry over
/// unchanged.
pub fn scale_allocation_to_cap(
    allocation: &PowerAllocation,
    cap_w: f64,
) -> Result<PowerAllocation> {
    if !(cap_w > 0.0) {
        return Err(Error::domain(format!(
            "power cap must be positive, got {cap_w} W"
        )));
    }
    let max = allocation
        .per_antenna_w
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::domain(
            "cannot rescale an all-zero allocation to a cap",
        ));
    }
    let scale = cap_w / max;
    Ok(PowerAllocation {
        per_antenna_w: allocation.per_antenna_w.iter().map(|&q| q * scale).collect(),
        objective_j: allocation.objective_j * scale,
        status: allocation.status,
        stats: allocation.stats,
        duals: allocation.duals.clone(),
    })
}

/// Parse a measurement CSV (`receiver_id,avg_rf_power_w`, header required)
/// into an energy report.
///
/// Measured DC energy follows the testbed convention: `alpha * p_rf * N*T`
/// with the activation threshold omitted — a metering harness reports what
/// the rectifier actually put out, so the model's `-beta` term must not be
/// subtracted twice. Every receiver 0..K-1 must appear exactly once. The
/// transmit side is not part of the measurement schema, so the power,
/// active-antenna and slot fields are reported as zero.
pub fn ingest_measurements(
    csv: &str,
    params: &SystemParameters,
    harvester: &HarvesterModel,
) -> Result<EnergyReport> {
    let k = params.num_receivers;
    let mut lines = csv.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((i, line)) if line.trim().is_empty() => {
                return Err(Error::Ingest {
                    row: i + 1,
                    message: "blank line where the header should be".to_string(),
                })
            }
            Some((_, line)) => break line,
            None => {
                return Err(Error::Ingest {
                    row: 1,
                    message: "empty file".to_string(),
                })
            }
        }
    };
    let expected_header = "receiver_id,avg_rf_power_w";
    if header.trim() != expected_header {
        return Err(Error::Ingest {
            row: 1,
            message: format!("expected header `{expected_header}`, got `{}`", header.trim()),
        });
    }
    let mut powers: Vec<Option<f64>> = vec![None; k];
    for (i, line) in lines {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (id_str, power_str) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(Error::Ingest {
                    row,
                    message: format!("expected 2 comma-separated fields, got `{line}`"),
                })
            }
        };
        let id: usize = id_str.parse().map_err(|_| Error::Ingest {
            row,
            message: format!("receiver id `{id_str}` is not an integer"),
        })?;
        if id >= k {
            return Err(Error::Ingest {
                row,
                message: format!("receiver id {id} outside 0..{k}"),
            });
        }
        let p: f64 = power_str.parse().map_err(|_| Error::Ingest {
            row,
            message: format!("power `{power_str}` is not a number"),
        })?;
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::Ingest {
                row,
                message: format!("average RF power must be >= 0 and finite, got {p}"),
            });
        }
        if powers[id].is_some() {
            return Err(Error::Ingest {
                row,
                message: format!("receiver {id} appears more than once"),
            });
        }
        powers[id] = Some(p);
    }
    let mut per_receiver_energy_j = Vec::with_capacity(k);
    for (id, p) in powers.iter().enumerate() {
        match p {
            Some(p) => {
                per_receiver_energy_j.push(harvester.efficiency * p * params.window_s);
            }
            None => {
                return Err(Error::Ingest {
                    row: k + 1,
                    message: format!("receiver {id} has no measurement row"),
                })
            }
        }
    }
    Ok(EnergyReport {
        per_receiver_energy_j,
        total_avg_tx_power_w: 0.0,
        active_antennas: 0,
        used_slots: 0,
        mode: ReportMode::Measured,
    })
}
