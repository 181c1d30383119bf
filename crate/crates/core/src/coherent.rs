//! Coherent minimum-energy beamforming.
//!
//! With phase-synchronized antennas and full channel knowledge, the
//! received RF power of receiver k in slot n is `|h_k' w_n|^2` for beam
//! vector `w_n` — amplitudes add, not powers. Lifting the beams into the
//! PSD matrix `X = alpha*T * sum_n w_n w_n^H` makes the total transmit
//! energy `tr(X)/alpha` and each receiver's collected RF energy a linear
//! functional `tr(G_k X)` with `G_k = conj(h_k) h_k'` rank one, so the
//! schedule design becomes a semidefinite program:
//!
//! ```text
//! min tr(X)   s.t.   tr(G_k X) >= E + N*T*beta   for all k,   X PSD
//! ```
//!
//! solved by the splitting method in [`crate::sdp`]. Beams are recovered
//! from the eigendecomposition of the optimal `X`: each eigenvalue above a
//! relative cutoff becomes one time slot transmitting its (scaled)
//! eigenvector, which typically occupies only a few of the available slots.
//! A separate repair pass splits any over-power beam across several equal
//! slots, leaving every receiver's delivered energy unchanged.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::harvester::HarvesterModel;
use crate::scenario::SystemParameters;
use crate::sdp::{solve_rank_one_sdp, RankOneTraceProblem, SdpOptions, SdpStatus};

/// Relative eigenvalue cutoff separating "used" beams from numerical
/// noise during recovery; sits well above the solver's residual floor.
pub const DEFAULT_EPSILON_RANK: f64 = 1e-7;

/// The coherent design problem: per-receiver constraint directions (the
/// conjugated channel vectors), the shared energy target, and the system
/// scalars.
#[derive(Debug, Clone)]
pub struct CoherentProblem {
    /// Column k is `conj(h_k)`; `G_k` is its outer product (M x K).
    pub directions: DMatrix<Complex64>,
    /// Right-hand side of every coverage constraint: E + N*T*beta [J].
    pub rhs_j: f64,
    pub params: SystemParameters,
    pub harvester: HarvesterModel,
}

impl CoherentProblem {
    /// Materialize the Gram matrix `G_k = conj(h_k) h_k'` of receiver `k`.
    pub fn gram_matrix(&self, k: usize) -> DMatrix<Complex64> {
        let u = self.directions.column(k);
        let m = self.directions.nrows();
        DMatrix::from_fn(m, m, |r, c| u[r] * u[c].conj())
    }

    /// Collected RF energy of receiver `k` under lifted schedule `x`:
    /// `tr(G_k x) = u_k^H x u_k` [J].
    pub fn collected_energy_j(&self, k: usize, x: &DMatrix<Complex64>) -> f64 {
        let u = self.directions.column(k);
        let xu = x * u;
        let quad: Complex64 = u.iter().zip(xu.iter()).map(|(a, b)| a.conj() * b).sum();
        quad.re
    }
}

/// Terminal state of the coherent optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CoherentStatus {
    Optimal,
    /// A receiver with an identically zero channel can never collect
    /// energy, no matter the transmit power.
    Infeasible { receiver: usize },
    /// Iteration cap reached before the residuals met tolerance.
    NumericalFailure,
}

impl CoherentStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, CoherentStatus::Optimal)
    }
}

/// Optimal lifted schedule with its dual certificate.
#[derive(Debug, Clone)]
pub struct PsdSolution {
    pub status: CoherentStatus,
    /// Hermitian PSD M x M matrix; units are joules of RF energy
    /// (X = alpha*T*sum of beam outer products).
    pub x: DMatrix<Complex64>,
    /// tr(x) [J]: alpha times the total transmit energy.
    pub objective_j: f64,
    /// Non-negative price per receiver constraint, scaled so the weighted
    /// Gram sum stays below the identity; rhs * sum(duals) lower-bounds
    /// the objective.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Solver consensus residuals (relative) at exit.
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// |tr(X) - rhs*sum(duals)| / tr(X).
    pub duality_gap: f64,
}

/// Per-slot beams recovered from the lifted solution.
#[derive(Debug, Clone)]
pub struct PrecoderSchedule {
    /// One complex weight vector per distinct beam [sqrt(W) per entry].
    pub beams: Vec<DVector<Complex64>>,
    /// How many identical slots each beam occupies.
    pub slot_count_per_beam: Vec<usize>,
    /// Slot length T [s].
    pub slot_duration_s: f64,
    /// T * sum_s count_s * ||w_s||^2 [J] — total transmit energy.
    pub total_energy_j: f64,
}

impl PrecoderSchedule {
    /// Number of occupied time slots.
    pub fn used_slots(&self) -> usize {
        self.slot_count_per_beam.iter().sum()
    }

    /// Per-slot transmit power ||w_s||^2 of beam `s` [W].
    pub fn beam_power_w(&self, s: usize) -> f64 {
        self.beams[s].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Reassemble the lifted matrix alpha*T*sum_n w_n w_n^H this schedule
    /// realizes [J].
    pub fn lifted_matrix(&self, harvester: &HarvesterModel) -> DMatrix<Complex64> {
        let m = self.beams.first().map_or(0, |b| b.len());
        let mut x = DMatrix::zeros(m, m);
        for (beam, &count) in self.beams.iter().zip(&self.slot_count_per_beam) {
            let scale = Complex64::from(
                self.slot_duration_s * harvester.efficiency * count as f64,
            );
            for c in 0..m {
                let s = beam[c].conj() * scale;
                for r in 0..m {
                    x[(r, c)] += beam[r] * s;
                }
            }
        }
        x
    }
}

/// KKT residuals of a coherent solution, in the problem's own units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KktReport {
    /// max_k (rhs - tr(G_k X))_+ / rhs.
    pub max_coverage_violation_rel: f64,
    /// lambda_max(sum_k y_k G_k) - 1; dual feasibility asks <= 0.
    pub dual_matrix_excess: f64,
    /// sum_k y_k (tr(G_k X) - rhs) [J]; zero at exact optimality.
    pub complementary_slackness_j: f64,
    /// |tr(X) - rhs*sum(y)| / tr(X).
    pub duality_gap_rel: f64,
}

/// Assemble the coherent problem from a synthesized channel. The receiver
/// count and antenna count are taken from the channel itself.
pub fn build_coherent_problem(
    channel: &ChannelMatrix,
    params: &SystemParameters,
    harvester: &HarvesterModel,
) -> Result<CoherentProblem> {
    let mut params = params.clone();
    params.num_antennas = channel.num_antennas();
    params.num_receivers = channel.num_receivers();
    params.validate()?;
    harvester.validate()?;
    let m = channel.num_antennas();
    let k = channel.num_receivers();
    let mut directions = DMatrix::zeros(m, k);
    for kk in 0..k {
        let mut norm_sq = 0.0;
        for mm in 0..m {
            let h = channel.entries[(mm, kk)];
            directions[(mm, kk)] = h.conj();
            norm_sq += h.norm_sqr();
        }
        if !(norm_sq > 0.0) {
            return Err(Error::domain(format!(
                "receiver {kk} has a zero channel vector and can never be served"
            )));
        }
    }
    let rhs_j = params.required_energy_j + params.window_s * harvester.threshold_w;
    Ok(CoherentProblem {
        directions,
        rhs_j,
        params,
        harvester: *harvester,
    })
}

/// Solve the coherent design SDP and certify it.
pub fn solve_sdp(problem: &CoherentProblem, opts: &SdpOptions) -> Result<PsdSolution> {
    let k = problem.directions.ncols();
    for kk in 0..k {
        let norm_sq: f64 = problem.directions.column(kk).iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq > 0.0) {
            return Ok(PsdSolution {
                status: CoherentStatus::Infeasible { receiver: kk },
                x: DMatrix::zeros(problem.directions.nrows(), problem.directions.nrows()),
                objective_j: 0.0,
                duals: vec![0.0; k],
                iterations: 0,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
                duality_gap: f64::INFINITY,
            });
        }
    }
    let engine_problem = RankOneTraceProblem {
        vectors: problem.directions.clone(),
        rhs: vec![problem.rhs_j; k],
    };
    let sol = solve_rank_one_sdp(&engine_problem, opts)?;

    // Dual polish: scaling the multipliers down by lambda_max(sum y G)
    // makes them exactly dual feasible, so the reported gap is a true
    // optimality sandwich rather than an estimate.
    let mut duals = sol.duals.clone();
    let excess = dual_matrix_lambda_max(&problem.directions, &duals);
    if excess > 1.0 {
        for y in duals.iter_mut() {
            *y /= excess;
        }
    }
    let dual_objective: f64 = problem.rhs_j * duals.iter().sum::<f64>();
    let duality_gap = (sol.objective - dual_objective).abs() / sol.objective.max(f64::MIN_POSITIVE);

    Ok(PsdSolution {
        status: match sol.status {
            SdpStatus::Optimal => CoherentStatus::Optimal,
            SdpStatus::IterationLimit => CoherentStatus::NumericalFailure,
        },
        x: sol.x,
        objective_j: sol.objective,
        duals,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        duality_gap,
    })
}

/// Largest eigenvalue of `sum_k y_k u_k u_k^H`.
fn dual_matrix_lambda_max(directions: &DMatrix<Complex64>, duals: &[f64]) -> f64 {
    let m = directions.nrows();
    let mut weighted = DMatrix::<Complex64>::zeros(m, m);
    for (j, &y) in duals.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        let col = directions.column(j);
        for c in 0..m {
            let s = col[c].conj() * Complex64::from(y);
            for r in 0..m {
                weighted[(r, c)] += col[r] * s;
            }
        }
    }
    weighted
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Turn the lifted solution into per-slot beams: eigenvalues above
/// `epsilon_rank * lambda_max` each become one slot, eigenvalues below are
/// noise and dropped, and the kept spectrum is rescaled to preserve the
/// trace (hence the total transmit energy) exactly.
pub fn recover_precoders(
    solution: &PsdSolution,
    params: &SystemParameters,
    harvester: &HarvesterModel,
    epsilon_rank: f64,
) -> Result<PrecoderSchedule> {
    if !solution.status.is_optimal() {
        return Err(Error::domain(
            "beam recovery needs an optimal lifted solution",
        ));
    }
    if !(epsilon_rank > 0.0 && epsilon_rank < 1.0) {
        return Err(Error::config(
            "epsilon_rank",
            format!("must lie in (0, 1), got {epsilon_rank}"),
        ));
    }
    let eig = solution.x.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    if !(lam_max > 0.0) {
        return Err(Error::numerical("lifted solution has no positive eigenvalue"));
    }
    let lam_min = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.min(b));
    if lam_min < -1e-8 * lam_max {
        return Err(Error::numerical(format!(
            "lifted solution is not PSD: eigenvalue {lam_min:.3e} against maximum {lam_max:.3e}"
        )));
    }

    // Beams sorted by descending eigenvalue; ties keep the lower index.
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let cutoff = epsilon_rank * lam_max;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > cutoff)
        .collect();
    let trace: f64 = eig.eigenvalues.iter().filter(|&&l| l > 0.0).sum();
    let kept_sum: f64 = kept.iter().map(|&i| eig.eigenvalues[i]).sum();
    let rescale = trace / kept_sum;

    let slot_duration = params.slot_duration_s();
    let energy_scale = harvester.efficiency * slot_duration;
    let mut beams = Vec::with_capacity(kept.len());
    for &i in &kept {
        let lam = eig.eigenvalues[i] * rescale;
        let amp = (lam / energy_scale).sqrt();
        beams.push(eig.eigenvectors.column(i).map(|c| c * Complex64::from(amp)));
    }
    let slot_count_per_beam = vec![1usize; beams.len()];
    if beams.len() > params.num_slots {
        return Err(Error::ScheduleOverflow {
            required_slots: beams.len(),
            available_slots: params.num_slots,
        });
    }
    let total_energy_j = slot_duration
        * beams
            .iter()
            .map(|b| b.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum::<f64>();
    Ok(PrecoderSchedule {
        beams,
        slot_count_per_beam,
        slot_duration_s: slot_duration,
        total_energy_j,
    })
}

/// Split any beam whose per-slot power exceeds `p_max_w` across enough
/// equal slots to respect the cap. Receiver energies are invariant: c
/// slots at power p/c deliver exactly what one slot at p did, because
/// received power is linear in beam power. Fails if the split schedule
/// would need more than `num_slots` slots.
pub fn enforce_slot_power_cap(
    schedule: &PrecoderSchedule,
    p_max_w: f64,
    num_slots: usize,
) -> Result<PrecoderSchedule> {
    if !(p_max_w > 0.0) {
        return Err(Error::config("p_max_w", "must be positive"));
    }
    let mut beams = Vec::with_capacity(schedule.beams.len());
    let mut counts = Vec::with_capacity(schedule.beams.len());
    for (beam, &count) in schedule.beams.iter().zip(&schedule.slot_count_per_beam) {
        let power: f64 = beam.iter().map(|c| c.norm_sqr()).sum();
        if power <= p_max_w {
            beams.push(beam.clone());
            counts.push(count);
            continue;
        }
        let split = (power / p_max_w).ceil() as usize;
        let scale = Complex64::from((1.0 / split as f64).sqrt());
        beams.push(beam.map(|c| c * scale));
        counts.push(count * split);
    }
    let used: usize = counts.iter().sum();
    if used > num_slots {
        return Err(Error::ScheduleOverflow {
            required_slots: used,
            available_slots: num_slots,
        });
    }
    let total_energy_j = schedule.slot_duration_s
        * beams
            .iter()
            .zip(&counts)
            .map(|(b, &c)| c as f64 * b.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum::<f64>();
    Ok(PrecoderSchedule {
        beams,
        slot_count_per_beam: counts,
        slot_duration_s: schedule.slot_duration_s,
        total_energy_j,
    })
}

/// Certify a solution against the problem: coverage, dual feasibility,
/// complementary slackness, and the optimality gap.
pub fn kkt_report(problem: &CoherentProblem, solution: &PsdSolution) -> KktReport {
    let k = problem.directions.ncols();
    let rhs = problem.rhs_j;
    let mut worst_violation = 0.0f64;
    let mut slackness = 0.0f64;
    for kk in 0..k {
        let attained = problem.collected_energy_j(kk, &solution.x);
        worst_violation = worst_violation.max((rhs - attained) / rhs);
        slackness += solution.duals[kk] * (attained - rhs);
    }
    let excess = dual_matrix_lambda_max(&problem.directions, &solution.duals) - 1.0;
    let trace: f64 = (0..solution.x.nrows()).map(|d| solution.x[(d, d)].re).sum();
    let dual_objective: f64 = rhs * solution.duals.iter().sum::<f64>();
    KktReport {
        max_coverage_violation_rel: worst_violation.max(0.0),
        dual_matrix_excess: excess,
        complementary_slackness_j: slackness,
        duality_gap_rel: (trace - dual_objective).abs() / trace.max(f64::MIN_POSITIVE),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    use crate::seeding::rng_from_seed;

    /// Small channel with controlled entries; gains must sit in (0, 1).
    fn channel_from_columns(cols: &[DVector<Complex64>]) -> ChannelMatrix {
        ChannelMatrix::from_entries(DMatrix::from_columns(cols), 0).expect("valid channel")
    }

    fn small_params(m: usize, k: usize) -> SystemParameters {
        SystemParameters {
            num_antennas: m,
            num_receivers: k,
            num_slots: 16,
            window_s: 3600.0,
            required_energy_j: 0.01,
            ..SystemParameters::default()
        }
    }

    fn random_channel_column(m: usize, rng: &mut impl Rng) -> DVector<Complex64> {
        DVector::from_fn(m, |_, _| {
            Complex64::from_polar(
                0.01 * (0.5 + rng.random::<f64>()),
                rng.random::<f64>() * std::f64::consts::TAU,
            )
        })
    }

    /// Gram matrices are Hermitian rank-one with trace ||h||^2.
    #[test]
    fn gram_matrices_are_rank_one_outer_products() {
        let mut rng = rng_from_seed(5);
        let cols: Vec<_> = (0..3).map(|_| random_channel_column(4, &mut rng)).collect();
        let channel = channel_from_columns(&cols);
        let params = small_params(4, 3);
        let harvester = HarvesterModel::from(&params);
        let problem = build_coherent_problem(&channel, &params, &harvester).unwrap();
        for k in 0..3 {
            let g = problem.gram_matrix(k);
            // Hermitian.
            for r in 0..4 {
                for c in 0..4 {
                    let diff = (g[(r, c)] - g[(c, r)].conj()).norm();
                    assert!(diff <= 1e-12, "gram {k} not Hermitian at ({r},{c})");
                }
            }
            // Rank one: second eigenvalue negligible against the first.
            let eig = g.clone().symmetric_eigen();
            let mut lams: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            lams.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(lams[1].abs() <= 1e-10 * lams[0]);
            // Trace equals the squared channel norm.
            let trace: f64 = (0..4).map(|d| g[(d, d)].re).sum();
            let norm_sq: f64 = cols[k].iter().map(|c| c.norm_sqr()).sum();
            assert_relative_eq!(trace, norm_sq, max_relative = 1e-12);
        }
    }

    /// tr(G_k X) equals alpha*T*|h_k' w|^2 when X lifts a single beam —
    /// the identity that makes the lifted constraints mean "collected RF
    /// energy".
    #[test]
    fn lifted_constraint_equals_received_energy() {
        let mut rng = rng_from_seed(17);
        for _ in 0..10 {
            let m = 3;
            let h = random_channel_column(m, &mut rng);
            let w = DVector::from_fn(m, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let channel = channel_from_columns(&[h.clone()]);
            let params = small_params(m, 1);
            let harvester = HarvesterModel::from(&params);
            let problem = build_coherent_problem(&channel, &params, &harvester).unwrap();
            let t = params.slot_duration_s();
            let alpha = harvester.efficiency;
            // X = alpha*T * w w^H.
            let mut x = DMatrix::zeros(m, m);
            for c in 0..m {
                for r in 0..m {
                    x[(r, c)] += w[r] * w[c].conj() * Complex64::from(alpha * t);
                }
            }
            let via_trace = problem.collected_energy_j(0, &x);
            let inner: Complex64 = h.iter().zip(w.iter()).map(|(hk, wk)| hk * wk).sum();
            let direct = alpha * t * inner.norm_sqr();
            assert_relative_eq!(via_trace, direct, max_relative = 1e-12);
        }
    }

    /// A receiver with an identically zero channel is rejected by name.
    #[test]
    fn zero_channel_column_is_rejected() {
        let mut rng = rng_from_seed(3);
        let good = random_channel_column(2, &mut rng);
        let zero = DVector::from_element(2, Complex64::from(0.0));
        // from_entries validates gains, so assemble the matrix directly.
        let channel = ChannelMatrix {
            entries: DMatrix::from_columns(&[good, zero]),
            gains: DMatrix::from_element(2, 2, 1e-4),
            seed: 0,
            frozen: false,
        };
        let params = small_params(2, 2);
        let harvester = HarvesterModel::from(&params);
        let err = build_coherent_problem(&channel, &params, &harvester).unwrap_err();
        assert!(err.to_string().contains("receiver 1"));
    }

    /// Single receiver: the optimum is the matched-filter rank-one
    /// solution with tr(X) = rhs/||h||^2, recovering exactly one beam.
    #[test]
    fn single_receiver_matches_matched_filter() {
        let mut rng = rng_from_seed(23);
        let m = 4;
        let h = random_channel_column(m, &mut rng);
        let norm_sq: f64 = h.iter().map(|c| c.norm_sqr()).sum();
        let channel = channel_from_columns(&[h.clone()]);
        let params = small_params(m, 1);
        let harvester = HarvesterModel::from(&params);
        let problem = build_coherent_problem(&channel, &params, &harvester).unwrap();
        let sol = solve_sdp(&problem, &SdpOptions::default()).unwrap();
        assert!(sol.status.is_optimal());
        assert_relative_eq!(
            sol.objective_j,
            problem.rhs_j / norm_sq,
            max_relative = 1e-6
        );
        let schedule =
            recover_precoders(&sol, &problem.params, &harvester, DEFAULT_EPSILON_RANK).unwrap();
        assert_eq!(schedule.beams.len(), 1);
        assert_eq!(schedule.used_slots(), 1);
        assert_relative_eq!(
            schedule.total_energy_j,
            sol.objective_j / harvester.efficiency,
            max_relative = 1e-9
        );
        // The beam actually delivers the required energy.
        let inner: Complex64 = h
            .iter()
            .zip(schedule.beams[0].iter())
            .map(|(hk, wk)| hk * wk)
            .sum();
        let collected =
            harvester.efficiency * schedule.slot_duration_s * inner.norm_sqr();
        assert_relative_eq!(collected, problem.rhs_j, max_relative = 1e-6);
    }

    /// Two receivers with orthogonal equal-gain channels cannot share a
    /// beam, so the objectives of the two rank-one problems add.
    #[test]
    fn orthogonal_receivers_decouple() {
        let m = 2;
        let g: f64 = 1e-3;
        let amp = Complex64::from(g.sqrt());
        let h1 = DVector::from_column_slice(&[amp, Complex64::from(0.0)]);
        let h2 = DVector::from_column_slice(&[Complex64::from(0.0), amp]);
        // Exact zero entries fail the synthesized-gain validation, so
        // assemble the struct directly.
        let entries = DMatrix::from_columns(&[h1, h2]);
        let gains = entries.map(|h| h.norm_sqr());
        let channel = ChannelMatrix {
            entries,
            gains,
            seed: 0,
            frozen: false,
        };
        let params = small_params(m, 2);
        let harvester = HarvesterModel::from(&params);
        let problem = build_coherent_problem(&channel, &params, &harvester).unwrap();
        let sol = solve_sdp(&problem, &SdpOptions::default()).unwrap();
        assert!(sol.status.is_optimal());
        assert_relative_eq!(
            sol.objective_j,
            2.0 * problem.rhs_j / g,
            max_relative = 1e-6
        );
    }

    /// Rotating a channel column by a unit phase changes no observable:
    /// same objective, same collected energies, same iteration count.
    #[test]
    fn channel_phases_do_not_matter() {
        let mut rng = rng_from_seed(31);
        let m = 3;
        let cols: Vec<_> = (0..2).map(|_| random_channel_column(m, &mut rng)).collect();
        let rotated: Vec<_> = cols
            .iter()
            .enumerate()
            .map(|(i, c)| c.map(|x| x * Complex64::from_polar(1.0, 0.7 + i as f64)))
            .collect();
        let params = small_params(m, 2);
        let harvester = HarvesterModel::from(&params);
        let p1 = build_coherent_problem(&channel_from_columns(&cols), &params, &harvester).unwrap();
        let p2 =
            build_coherent_problem(&channel_from_columns(&rotated), &params, &harvester).unwrap();
        let s1 = solve_sdp(&p1, &SdpOptions::default()).unwrap();
        let s2 = solve_sdp(&p2, &SdpOptions::default()).unwrap();
        assert_relative_eq!(s1.objective_j, s2.objective_j, max_relative = 1e-9);
        assert_eq!(s1.iterations, s2.iterations);
        for k in 0..2 {
            assert_relative_eq!(
                p1.collected_energy_j(k, &s1.x),
                p2.collected_energy_j(k, &s2.x),
                max_relative = 1e-9
            );
        }
    }

    /// Synthesizing X from known orthogonal beams and recovering gives the
    /// same beams back (up to phase), and the lifted round trip matches.
    #[test]
    fn recovery_round_trips_a_synthetic_two_beam_solution() {
        let m = 4;
        let params = small_params(m, 1);
        let harvester = HarvesterModel::from(&params);
        let t = params.slot_duration_s();
        let alpha = harvester.efficiency;
        // Orthogonal beams with distinct powers.
        let w1 = DVector::from_column_slice(&[
            Complex64::from(2.0),
            Complex64::from(0.0),
            Complex64::from(0.0),
            Complex64::from(0.0),
        ]);
        let w2 = DVector::from_column_slice(&[
            Complex64::from(0.0),
            Complex64::new(0.0, 1.0),
            Complex64::from(0.0),
            Complex64::from(0.0),
        ]);
        let mut x = DMatrix::zeros(m, m);
        for w in [&w1, &w2] {
            for c in 0..m {
                for r in 0..m {
                    x[(r, c)] += w[r] * w[c].conj() * Complex64::from(alpha * t);
                }
            }
        }
        let sol = PsdSolution {
            status: CoherentStatus::Optimal,
            x: x.clone(),
            objective_j: (0..m).map(|d| x[(d, d)].re).sum(),
            duals: vec![],
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            duality_gap: 0.0,
        };
        let schedule = recover_precoders(&sol, &params, &harvester, DEFAULT_EPSILON_RANK).unwrap();
        assert_eq!(schedule.beams.len(), 2);
        // Descending power: w1 (4 W) before w2 (1 W).
        assert_relative_eq!(schedule.beam_power_w(0), 4.0, max_relative = 1e-9);
        assert_relative_eq!(schedule.beam_power_w(1), 1.0, max_relative = 1e-9);
        let rebuilt = schedule.lifted_matrix(&harvester);
        let rel = (&rebuilt - &x).norm() / x.norm();
        assert!(rel <= 1e-9, "lifted round trip off by {rel:.3e}");
    }

    /// Eigenvalues straddling the cutoff: below is dropped, above is kept,
    /// and the kept spectrum absorbs the dropped trace.
    #[test]
    fn rank_cutoff_separates_noise_from_beams() {
        let m = 3;
        let params = small_params(m, 1);
        let harvester = HarvesterModel::from(&params);
        let lam_max = 1.0;
        for (noise_rel, expect_beams) in [(0.5e-7, 1usize), (2.0e-7, 2usize)] {
            let mut x = DMatrix::zeros(m, m);
            x[(0, 0)] = Complex64::from(lam_max);
            x[(1, 1)] = Complex64::from(noise_rel * lam_max);
            let trace: f64 = lam_max + noise_rel * lam_max;
            let sol = PsdSolution {
                status: CoherentStatus::Optimal,
                x,
                objective_j: trace,
                duals: vec![],
                iterations: 0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                duality_gap: 0.0,
            };
            let schedule =
                recover_precoders(&sol, &params, &harvester, DEFAULT_EPSILON_RANK).unwrap();
            assert_eq!(schedule.beams.len(), expect_beams, "noise {noise_rel}");
            // Trace is preserved regardless of what was dropped.
            assert_relative_eq!(
                schedule.total_energy_j,
                trace / harvester.efficiency,
                max_relative = 1e-9
            );
        }
    }

    /// Splitting an over-cap beam conserves every receiver's energy and
    /// respects the cap; under-cap schedules pass through untouched.
    #[test]
    fn power_cap_splits_conserve_delivered_energy() {
        let m = 2;
        let params = small_params(m, 1);
        let harvester = HarvesterModel::from(&params);
        let p_max = 4.0f64;
        // One beam at 2.5 * P_max.
        let amp = (2.5 * p_max / 2.0).sqrt();
        let beam = DVector::from_element(m, Complex64::from(amp));
        let schedule = PrecoderSchedule {
            beams: vec![beam.clone()],
            slot_count_per_beam: vec![1],
            slot_duration_s: params.slot_duration_s(),
            total_energy_j: params.slot_duration_s() * 2.5 * p_max,
        };
        let capped = enforce_slot_power_cap(&schedule, p_max, params.num_slots).unwrap();
        assert_eq!(capped.slot_count_per_beam, vec![3]);
        let per_slot = capped.beam_power_w(0);
        assert!(per_slot <= p_max + 1e-12);
        assert_relative_eq!(per_slot, 2.5 * p_max / 3.0, max_relative = 1e-12);
        // Energy to an arbitrary receiver is unchanged.
        let mut rng = rng_from_seed(8);
        let h = DVector::from_fn(m, |_, _| {
            Complex64::from_polar(0.01, rng.random::<f64>() * std::f64::consts::TAU)
        });
        let energy = |s: &PrecoderSchedule| -> f64 {
            s.beams
                .iter()
                .zip(&s.slot_count_per_beam)
                .map(|(w, &c)| {
                    let inner: Complex64 = h.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                    c as f64 * s.slot_duration_s * harvester.efficiency * inner.norm_sqr()
                })
                .sum()
        };
        let before = energy(&schedule);
        let after = energy(&capped);
        assert_relative_eq!(before, after, max_relative = 1e-12);
        assert_relative_eq!(
            capped.total_energy_j,
            schedule.total_energy_j,
            max_relative = 1e-12
        );

        // Under the cap: bit-identical pass-through.
        let mild = PrecoderSchedule {
            beams: vec![DVector::from_element(m, Complex64::from(1.0))],
            slot_count_per_beam: vec![1],
            slot_duration_s: params.slot_duration_s(),
            total_energy_j: params.slot_duration_s() * 2.0,
        };
        let same = enforce_slot_power_cap(&mild, p_max, params.num_slots).unwrap();
        for (a, b) in mild.beams[0].iter().zip(same.beams[0].iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }

        // Exceeding the slot budget is an error.
        let err = enforce_slot_power_cap(&schedule, p_max, 2).unwrap_err();
        assert!(err.to_string().contains("slots"));
    }

    /// KKT report on the analytic single-receiver optimum is clean; a
    /// perturbed primal shows up as a gap; an empty dual gives gap one.
    #[test]
    fn kkt_report_grades_solutions() {
        let mut rng = rng_from_seed(77);
        let m = 3;
        let h = random_channel_column(m, &mut rng);
        let norm_sq: f64 = h.iter().map(|c| c.norm_sqr()).sum();
        let channel = channel_from_columns(&[h.clone()]);
        let params = small_params(m, 1);
        let harvester = HarvesterModel::from(&params);
        let problem = build_coherent_problem(&channel, &params, &harvester).unwrap();
        // Analytic optimum: X = rhs * u u^H / ||h||^2 (u = conj(h)/||h||),
        // dual y = 1/||h||^2.
        let rhs = problem.rhs_j;
        let mut x = DMatrix::zeros(m, m);
        for c in 0..m {
            for r in 0..m {
                x[(r, c)] += h[r].conj() * h[c] * Complex64::from(rhs / (norm_sq * norm_sq));
            }
        }
        let exact = PsdSolution {
            status: CoherentStatus::Optimal,
            x: x.clone(),
            objective_j: rhs / norm_sq,
            duals: vec![1.0 / norm_sq],
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            duality_gap: 0.0,
        };
        let report = kkt_report(&problem, &exact);
        assert!(report.max_coverage_violation_rel <= 1e-10);
        assert!(report.dual_matrix_excess.abs() <= 1e-10);
        assert!(report.complementary_slackness_j.abs() <= 1e-10 * rhs);
        assert!(report.duality_gap_rel <= 1e-10);

        // Inflate the primal by 1%: the gap says so.
        let inflated = PsdSolution {
            x: x.map(|c| c * Complex64::from(1.01)),
            objective_j: 1.01 * rhs / norm_sq,
            ..exact.clone()
        };
        let report = kkt_report(&problem, &inflated);
        assert_relative_eq!(report.duality_gap_rel, 0.01 / 1.01, max_relative = 1e-6);

        // No dual at all: gap is 100%.
        let undual = PsdSolution {
            duals: vec![0.0],
            ..exact
        };
        let report = kkt_report(&problem, &undual);
        assert_relative_eq!(report.duality_gap_rel, 1.0, max_relative = 1e-12);
    }
}
