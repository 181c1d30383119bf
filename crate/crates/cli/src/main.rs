//! `wpt` — plan and judge wireless charging schedules for shelf labels.
//!
//! Subcommands mirror the pipeline stages: `scenario` writes the
//! deployment geometry, `channel` synthesizes the propagation matrix,
//! `select` picks an antenna subset, `solve` runs one optimization end to
//! end, `sweep` repeats it over antenna counts and seeds, `evaluate`
//! recomputes a report from artifact files, and `ingest` converts measured
//! RF powers into the same report shape.
//!
//! Exit codes: 0 solved/finished, 1 configuration or I/O problem, 2 the
//! energy target is infeasible, 3 the solver failed numerically. All
//! numbers inside are SI; dBm exists only in output columns. Every
//! artifact is reproducible byte for byte from the configuration and
//! seeds, and files are written atomically (temp file, then rename).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use wpt_core::channel::{synthesize_channel, ChannelMatrix, PathlossModel};
use wpt_core::coherent::{
    build_coherent_problem, enforce_slot_power_cap, kkt_report, recover_precoders, solve_sdp,
    CoherentStatus, DEFAULT_EPSILON_RANK,
};
use wpt_core::error::Error;
use wpt_core::evaluation::{
    cdf, evaluate_coherent, evaluate_noncoherent, ingest_measurements, run_subset_job, SolveMode,
    SweepPoint,
};
use wpt_core::harvester::HarvesterModel;
use wpt_core::io as artifacts;
use wpt_core::noncoherent::{
    solve_noncoherent, NoncoherentProblem, PowerAllocation, SolveStatus, SolverStats,
};
use wpt_core::scenario::{build_default_scenario, ParameterOverrides};
use wpt_core::sdp::SdpOptions;
use wpt_core::seeding::job_seed;
use wpt_core::selection::select_subset;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "WPT_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "wpt",
    version,
    about = "Minimum-energy transmit schedules for wirelessly charged shelf labels"
)]
struct Cli {
    /// Output directory for artifacts (default: $WPT_OUT_DIR, else `.`;
    /// a config file's `output_dir` sits between the flag and the
    /// environment).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// JSON run configuration (scenario overrides, mode, counts, seeds,
    /// solver knobs). Unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the deployment geometry and parameters
    /// (params.json, antennas.csv, devices.csv).
    Scenario,
    /// Synthesize the channel matrix for a seed (channel.csv).
    Channel {
        /// Channel phase seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Choose an evenly spread antenna subset (selection.csv).
    Select {
        /// Subset size.
        #[arg(long)]
        count: usize,
        /// Clustering seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve one charging problem end to end (channel.csv,
    /// allocation.csv or schedule.csv, solution.json, report.json,
    /// cdf.csv).
    Solve {
        /// Transmission strategy.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Channel phase seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Split beams whose per-slot power exceeds the P_max parameter
        /// (coherent mode only; delivered energies are unchanged).
        #[arg(long)]
        enforce_cap: bool,
    },
    /// Solve across antenna counts and seeds (sweep.csv). Reruns with the
    /// same output directory skip rows that are already on disk.
    Sweep {
        /// Transmission strategy.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Antenna counts, comma separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<usize>>,
        /// Seeds, comma separated.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Recompute report.json and cdf.csv from artifact files.
    Evaluate {
        /// Channel CSV the schedule was designed for.
        #[arg(long)]
        channel: PathBuf,
        /// Per-antenna power CSV (static strategy).
        #[arg(long)]
        allocation: Option<PathBuf>,
        /// Beam schedule CSV (coherent strategy).
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Convert a measurement CSV (receiver_id,avg_rf_power_w) into
    /// report.json and cdf.csv.
    Ingest {
        /// Measurement CSV path.
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Noncoherent,
    Coherent,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Noncoherent => SolveMode::Noncoherent,
            ModeArg::Coherent => SolveMode::Coherent,
        }
    }
}

/// The JSON run configuration. Every field is optional; unknown keys are
/// a hard error so typos cannot silently fall back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    /// Scenario parameter overrides (see `ParameterOverrides`).
    scenario: ParameterOverrides,
    /// Transmission strategy when the --mode flag is absent.
    mode: Option<SolveMode>,
    /// Sweep antenna counts when --counts is absent.
    antenna_counts: Option<Vec<usize>>,
    /// Seeds: the first one backs single-seed commands, the whole list
    /// backs sweeps.
    seeds: Option<Vec<u64>>,
    solver: SolverConfig,
    /// Output directory when the --out flag is absent.
    output_dir: Option<PathBuf>,
    /// Apply the per-slot power cap repair after coherent solves.
    enforce_power_cap: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverConfig {
    /// Relative residual tolerance of the semidefinite solver.
    sdp_rel_tolerance: Option<f64>,
    /// Iteration cap of the semidefinite solver.
    sdp_max_iterations: Option<usize>,
    /// Relative eigenvalue cutoff for beam recovery.
    epsilon_rank: Option<f64>,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self, Error> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))
    }

    fn sdp_options(&self) -> SdpOptions {
        let mut opts = SdpOptions::default();
        if let Some(t) = self.solver.sdp_rel_tolerance {
            opts.rel_tolerance = t;
        }
        if let Some(n) = self.solver.sdp_max_iterations {
            opts.max_iterations = n;
        }
        opts
    }

    fn epsilon_rank(&self) -> f64 {
        self.solver.epsilon_rank.unwrap_or(DEFAULT_EPSILON_RANK)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Infeasible { .. } => 2,
                Error::NumericalFailure(_) => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;

    let (params, antennas, devices) = build_default_scenario(&config.scenario)?;
    let pathloss = PathlossModel::default();
    let harvester = HarvesterModel::from(&params);
    let write = |name: &str, content: &str| -> Result<(), Error> {
        artifacts::write_atomic(&out_dir.join(name), content.as_bytes())
    };

    match cli.command {
        Command::Scenario => {
            let mut params_json = serde_json::to_string_pretty(&params)?;
            params_json.push('\n');
            write("params.json", &params_json)?;
            write("antennas.csv", &artifacts::antenna_csv(&antennas))?;
            write("devices.csv", &artifacts::device_csv(&devices))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Channel { seed } => {
            let seed = resolve_seed(seed, &config);
            let channel = synthesize_channel(&antennas, &devices, &params, &pathloss, seed)?;
            write("channel.csv", &artifacts::channel_csv(&channel))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Select { count, seed } => {
            let seed = resolve_seed(seed, &config);
            let selection = select_subset(&antennas, count, seed)?;
            write("selection.csv", &artifacts::selection_csv(&selection, &antennas))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            mode,
            seed,
            enforce_cap,
        } => {
            let mode = resolve_mode(mode, &config);
            let seed = resolve_seed(seed, &config);
            let enforce_cap = enforce_cap || config.enforce_power_cap;
            let channel = synthesize_channel(&antennas, &devices, &params, &pathloss, seed)?;
            write("channel.csv", &artifacts::channel_csv(&channel))?;
            match mode {
                SolveMode::Noncoherent => {
                    let problem = NoncoherentProblem::from_channel(&channel, &params)?;
                    let allocation = solve_noncoherent(&problem)?;
                    match allocation.status {
                        SolveStatus::Optimal => {}
                        SolveStatus::Infeasible {
                            worst_receiver,
                            shortfall_w,
                        } => {
                            eprintln!(
                                "infeasible: receiver {worst_receiver} misses the target by \
                                 {shortfall_w:.3e} W of received RF power"
                            );
                            return Ok(ExitCode::from(2));
                        }
                        SolveStatus::NumericalFailure => {
                            eprintln!("numerical failure in the allocation solver");
                            return Ok(ExitCode::from(3));
                        }
                    }
                    write("allocation.csv", &artifacts::allocation_csv(&allocation))?;
                    let summary = serde_json::json!({
                        "mode": "noncoherent",
                        "objective_j": allocation.objective_j,
                        "total_power_w": allocation.total_power_w(),
                        "iterations": allocation.stats.iterations,
                        "max_primal_residual": allocation.stats.max_primal_residual,
                        "max_dual_residual": allocation.stats.max_dual_residual,
                        "max_complementarity": allocation.stats.max_complementarity,
                    });
                    let mut text = serde_json::to_string_pretty(&summary)?;
                    text.push('\n');
                    write("solution.json", &text)?;
                    let report = evaluate_noncoherent(&allocation, &problem)?;
                    write("report.json", &artifacts::report_json(&report)?)?;
                    write("cdf.csv", &artifacts::cdf_csv(&cdf(&report.per_receiver_energy_j)?))?;
                    Ok(ExitCode::SUCCESS)
                }
                SolveMode::Coherent => {
                    let problem = build_coherent_problem(&channel, &params, &harvester)?;
                    let solution = solve_sdp(&problem, &config.sdp_options())?;
                    match solution.status {
                        CoherentStatus::Optimal => {}
                        CoherentStatus::Infeasible { receiver } => {
                            eprintln!("infeasible: receiver {receiver} can never harvest energy");
                            return Ok(ExitCode::from(2));
                        }
                        CoherentStatus::NumericalFailure => {
                            eprintln!(
                                "numerical failure: splitting solver stopped at iteration {} \
                                 with residuals {:.2e}/{:.2e}",
                                solution.iterations,
                                solution.primal_residual,
                                solution.dual_residual
                            );
                            return Ok(ExitCode::from(3));
                        }
                    }
                    let mut schedule = recover_precoders(
                        &solution,
                        &problem.params,
                        &harvester,
                        config.epsilon_rank(),
                    )?;
                    if enforce_cap {
                        schedule = enforce_slot_power_cap(
                            &schedule,
                            params.max_power_per_antenna_w,
                            params.num_slots,
                        )?;
                    }
                    write("schedule.csv", &artifacts::schedule_csv(&schedule))?;
                    let kkt = kkt_report(&problem, &solution);
                    let summary = serde_json::json!({
                        "mode": "coherent",
                        "objective_j": solution.objective_j,
                        "total_energy_j": schedule.total_energy_j,
                        "used_slots": schedule.used_slots(),
                        "iterations": solution.iterations,
                        "primal_residual": solution.primal_residual,
                        "dual_residual": solution.dual_residual,
                        "duality_gap": solution.duality_gap,
                        "kkt": kkt,
                    });
                    let mut text = serde_json::to_string_pretty(&summary)?;
                    text.push('\n');
                    write("solution.json", &text)?;
                    let report =
                        evaluate_coherent(&schedule, &channel, &problem.params, &harvester)?;
                    write("report.json", &artifacts::report_json(&report)?)?;
                    write("cdf.csv", &artifacts::cdf_csv(&cdf(&report.per_receiver_energy_j)?))?;
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Sweep {
            mode,
            counts,
            seeds,
        } => {
            let mode = resolve_mode(mode, &config);
            let counts = counts
                .or_else(|| config.antenna_counts.clone())
                .ok_or_else(|| {
                    Error::config("antenna_counts", "sweep needs --counts or a config list")
                })?;
            let seeds = seeds.or_else(|| config.seeds.clone()).unwrap_or(vec![0]);
            if !counts.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::config(
                    "antenna_counts",
                    "counts must be strictly increasing",
                ));
            }
            cmd_sweep(
                &out_dir, &params, &antennas, &devices, &pathloss, &counts, &seeds, mode,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            channel,
            allocation,
            schedule,
        } => {
            let channel = artifacts::read_channel_csv(&std::fs::read_to_string(&channel)?)?;
            let report = match (allocation, schedule) {
                (Some(path), None) => {
                    let powers =
                        artifacts::read_allocation_csv(&std::fs::read_to_string(&path)?)?;
                    let problem = NoncoherentProblem::from_channel(&channel, &params)?;
                    let allocation = reconstructed_allocation(powers, &problem)?;
                    evaluate_noncoherent(&allocation, &problem)?
                }
                (None, Some(path)) => {
                    let schedule = artifacts::read_schedule_csv(
                        &std::fs::read_to_string(&path)?,
                        params.slot_duration_s(),
                    )?;
                    let mut params = params.clone();
                    params.num_antennas = channel.num_antennas();
                    params.num_receivers = channel.num_receivers();
                    evaluate_coherent(&schedule, &channel, &params, &harvester)?
                }
                _ => {
                    return Err(Error::config(
                        "evaluate",
                        "pass exactly one of --allocation or --schedule",
                    ))
                }
            };
            write("report.json", &artifacts::report_json(&report)?)?;
            write("cdf.csv", &artifacts::cdf_csv(&cdf(&report.per_receiver_energy_j)?))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ingest { csv } => {
            let text = std::fs::read_to_string(&csv)?;
            let report = ingest_measurements(&text, &params, &harvester)?;
            write("report.json", &artifacts::report_json(&report)?)?;
            write("cdf.csv", &artifacts::cdf_csv(&cdf(&report.per_receiver_energy_j)?))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve_seed(flag: Option<u64>, config: &RunConfig) -> u64 {
    flag.or_else(|| config.seeds.as_ref().and_then(|s| s.first().copied()))
        .unwrap_or(0)
}

fn resolve_mode(flag: Option<ModeArg>, config: &RunConfig) -> SolveMode {
    flag.map(SolveMode::from)
        .or(config.mode)
        .unwrap_or(SolveMode::Noncoherent)
}

/// Wrap powers parsed from an allocation CSV so the evaluator accepts
/// them. The artifact does not carry the solve's certificate, so the stats
/// and duals are blank; only the delivered energies matter here.
fn reconstructed_allocation(
    powers: Vec<f64>,
    problem: &NoncoherentProblem,
) -> Result<PowerAllocation, Error> {
    if powers.len() != problem.gains.nrows() {
        return Err(Error::config(
            "allocation",
            format!(
                "{} antenna rows in the CSV but the channel has {}",
                powers.len(),
                problem.gains.nrows()
            ),
        ));
    }
    let total: f64 = powers.iter().sum();
    Ok(PowerAllocation {
        per_antenna_w: powers,
        objective_j: problem.params.window_s * total,
        status: SolveStatus::Optimal,
        stats: SolverStats {
            iterations: 0,
            max_primal_residual: 0.0,
            max_dual_residual: 0.0,
            max_complementarity: 0.0,
        },
        duals: vec![],
    })
}

/// Run the sweep, reusing rows already present in `sweep.csv`. Rows are
/// keyed by (count, seed); jobs for missing rows run, rows on disk are
/// kept verbatim, and the file is rewritten in canonical order (counts
/// outer, seeds inner, input order). A completed sweep rerun is therefore
/// byte-identical, and an interrupted one picks up where it stopped.
#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    out_dir: &Path,
    params: &wpt_core::scenario::SystemParameters,
    antennas: &wpt_core::scenario::AntennaLayout,
    devices: &wpt_core::scenario::DeviceLayout,
    pathloss: &PathlossModel,
    counts: &[usize],
    seeds: &[u64],
    mode: SolveMode,
) -> Result<(), Error> {
    let path = out_dir.join("sweep.csv");
    let mut existing: BTreeMap<(usize, u64), String> = BTreeMap::new();
    if let Ok(text) = std::fs::read_to_string(&path) {
        let mut lines = text.lines();
        if lines.next() == Some(artifacts::SWEEP_CSV_HEADER) {
            for line in lines {
                let mut fields = line.split(',');
                if let (Some(m), Some(seed)) = (fields.next(), fields.next()) {
                    if let (Ok(m), Ok(seed)) = (m.parse::<usize>(), seed.parse::<u64>()) {
                        existing.insert((m, seed), line.to_string());
                    }
                }
            }
        }
    }

    let mut channels: BTreeMap<u64, ChannelMatrix> = BTreeMap::new();
    let mut rows = String::from(artifacts::SWEEP_CSV_HEADER);
    rows.push('\n');
    for &count in counts {
        for &seed in seeds {
            if let Some(line) = existing.get(&(count, seed)) {
                rows.push_str(line);
                rows.push('\n');
                continue;
            }
            if !channels.contains_key(&seed) {
                channels.insert(
                    seed,
                    synthesize_channel(antennas, devices, params, pathloss, seed)?,
                );
            }
            let outcome = run_subset_job(
                &channels[&seed],
                antennas,
                params,
                count,
                job_seed(seed, count),
                mode,
            )?;
            let point = SweepPoint {
                antenna_count: count,
                seed,
                outcome,
            };
            rows.push_str(&artifacts::sweep_row(&point));
            rows.push('\n');
            // Land progress after every job so an interrupted sweep
            // resumes instead of starting over.
            artifacts::write_atomic(&path, rows.as_bytes())?;
        }
    }
    artifacts::write_atomic(&path, rows.as_bytes())?;
    Ok(())
}
