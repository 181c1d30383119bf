//! Non-coherent minimum-energy power allocation.
//!
//! When antennas transmit mutually independent signals, received *powers*
//! add: receiver k collects `sum_m gains[m][k] * p_m` RF watts. Because
//! the channel is static over the whole charging window and the harvested
//! energy is linear in the per-slot powers, any feasible time-varying
//! schedule can be averaged over slots into a constant allocation with the
//! same total energy and the same per-receiver delivery — so the optimizer
//! works on one power value per antenna, not one per antenna and slot.
//! The resulting problem is a small linear program:
//!
//! ```text
//! min sum_m q_m   s.t.   alpha * sum_m gains[m][k] * q_m >= E/(N*T) + beta   for all k
//!                        0 <= q_m <= P_max
//! ```
//!
//! solved exactly by the bounded-variable simplex in [`crate::simplex`].
//! A vertex solution concentrates power on few antennas, which is the
//! observed sparsity behaviour of this strategy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::harvester::HarvesterModel;
use crate::scenario::SystemParameters;
use crate::simplex::{self, LinearProgram, LpOptions, LpStatus};

/// The non-coherent allocation problem: linear power gains, system
/// scalars, harvester model.
#[derive(Debug, Clone)]
pub struct NoncoherentProblem {
    /// |h_{m,k}|^2, antennas by receivers.
    pub gains: DMatrix<f64>,
    pub params: SystemParameters,
    pub harvester: HarvesterModel,
}

impl NoncoherentProblem {
    pub fn new(
        gains: DMatrix<f64>,
        params: SystemParameters,
        harvester: HarvesterModel,
    ) -> Result<Self> {
        let p = Self {
            gains,
            params,
            harvester,
        };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor from a synthesized channel (phases are
    /// irrelevant to this strategy; only the gains survive).
    pub fn from_channel(channel: &ChannelMatrix, params: &SystemParameters) -> Result<Self> {
        let mut params = params.clone();
        params.num_antennas = channel.num_antennas();
        params.num_receivers = channel.num_receivers();
        Self::new(
            channel.gains.clone(),
            params.clone(),
            HarvesterModel::from(&params),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.harvester.validate()?;
        if self.gains.nrows() != self.params.num_antennas {
            return Err(Error::config(
                "gains",
                format!(
                    "expected {} antenna rows, got {}",
                    self.params.num_antennas,
                    self.gains.nrows()
                ),
            ));
        }
        if self.gains.ncols() != self.params.num_receivers {
            return Err(Error::config(
                "gains",
                format!(
                    "expected {} receiver columns, got {}",
                    self.params.num_receivers,
                    self.gains.ncols()
                ),
            ));
        }
        if self.gains.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::domain(
                "channel gains must be strictly positive and finite",
            ));
        }
        Ok(())
    }
}

/// Terminal state of an optimization run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SolveStatus {
    Optimal,
    /// Even transmitting at full power on every antenna leaves
    /// `worst_receiver` short by `shortfall_w` watts of received RF power.
    Infeasible {
        worst_receiver: usize,
        shortfall_w: f64,
    },
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, SolveStatus::Optimal)
    }
}

/// Certificate quality of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    pub max_complementarity: f64,
}

/// Result of the non-coherent optimization: one transmit power per
/// antenna, held constant over all slots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// q_m [W], length M.
    pub per_antenna_w: Vec<f64>,
    /// Total transmit energy over the window [J]: N*T*sum(q) when optimal.
    pub objective_j: f64,
    pub status: SolveStatus,
    pub stats: SolverStats,
    /// Shadow price per receiver constraint (energy cost of tightening
    /// receiver k's requirement), from the LP dual.
    pub duals: Vec<f64>,
}

impl PowerAllocation {
    /// Total transmit power summed over antennas [W].
    pub fn total_power_w(&self) -> f64 {
        self.per_antenna_w.iter().sum()
    }
}

/// Reduce the full antennas-by-slots problem to its static form: the LP
/// over one power per antenna described in the module docs. Any feasible
/// time-varying schedule averages (over slots) to a feasible point of this
/// LP with identical objective, and any static solution is trivially a
/// schedule, so the reduction is exact.
pub fn reduce_to_static(problem: &NoncoherentProblem) -> LinearProgram {
    let m = problem.gains.nrows();
    let k = problem.gains.ncols();
    let alpha = problem.harvester.efficiency;
    let rhs_power = problem.params.required_energy_j / problem.params.window_s
        + problem.harvester.threshold_w;
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|kk| (0..m).map(|mm| alpha * problem.gains[(mm, kk)]).collect())
        .collect();
    LinearProgram {
        objective: vec![1.0; m],
        rows,
        rhs: vec![rhs_power; k],
        upper: vec![problem.params.max_power_per_antenna_w; m],
    }
}

/// Solve the non-coherent problem to optimality (or report why not).
pub fn solve_noncoherent(problem: &NoncoherentProblem) -> Result<PowerAllocation> {
    problem.validate()?;
    let lp = reduce_to_static(problem);
    let sol = simplex::solve(&lp, &LpOptions::default())?;
    let window = problem.params.window_s;
    let status = match sol.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible { row, shortfall } => SolveStatus::Infeasible {
            worst_receiver: row,
            // The LP works on received power scaled by alpha; report the
            // shortfall in received RF watts.
            shortfall_w: shortfall / problem.harvester.efficiency,
        },
        LpStatus::IterationLimit | LpStatus::Singular => SolveStatus::NumericalFailure,
    };
    Ok(PowerAllocation {
        per_antenna_w: sol.x.clone(),
        objective_j: window * sol.objective,
        status,
        stats: SolverStats {
            iterations: sol.iterations,
            max_primal_residual: sol.max_primal_residual,
            max_dual_residual: sol.max_dual_residual,
            max_complementarity: sol.max_complementarity,
        },
        duals: sol.duals,
    })
}

/// Expected harvested DC power per receiver [W] under an allocation:
/// `p_k = alpha * sum_m gains[m][k] * q_m - beta`.
pub fn expected_dc_power(
    allocation: &PowerAllocation,
    problem: &NoncoherentProblem,
) -> Result<Vec<f64>> {
    if allocation.per_antenna_w.len() != problem.gains.nrows() {
        return Err(Error::config(
            "allocation",
            format!(
                "expected {} antenna powers, got {}",
                problem.gains.nrows(),
                allocation.per_antenna_w.len()
            ),
        ));
    }
    let alpha = problem.harvester.efficiency;
    let beta = problem.harvester.threshold_w;
    Ok((0..problem.gains.ncols())
        .map(|k| {
            let rf: f64 = allocation
                .per_antenna_w
                .iter()
                .enumerate()
                .map(|(m, &q)| problem.gains[(m, k)] * q)
                .sum();
            alpha * rf - beta
        })
        .collect())
}

/// Number of antennas carrying non-negligible power: those with
/// `q_m > rel_threshold * max_m q_m`. Zero when everything is off.
pub fn active_antenna_count(allocation: &PowerAllocation, rel_threshold: f64) -> usize {
    let max = allocation
        .per_antenna_w
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    allocation
        .per_antenna_w
        .iter()
        .filter(|&&q| q > rel_threshold * max)
        .count()
}
