//! Operator-splitting solver for rank-one-constrained trace minimization.
//!
//! Solves the semidefinite program
//!
//! ```text
//! min tr(X)   s.t.   tr((v_k v_k^H) X) >= rhs_k  for all k,   X PSD
//! ```
//!
//! where every constraint matrix is a complex rank-one outer product. This
//! is the lifted form of a multicast energy-beamforming problem: `X`
//! aggregates beamformer outer products, and each constraint demands that
//! receiver `k` collect enough energy. The rank-one structure is what
//! makes a first-order method practical here:
//!
//! * the X-minimization step reduces, by the Woodbury identity, to one
//!   K×K symmetric positive-definite solve whose matrix
//!   `I + [|u_j^H u_k|^2]` does not depend on the penalty parameter, so it
//!   is factorized exactly once per problem;
//! * the PSD projection is a single Hermitian eigendecomposition of an
//!   M×M matrix per iteration, with M in the tens.
//!
//! The iteration is ADMM on the consensus form `min tr(X) + I_PSD(Z) +
//! I_{t >= rhs}(t)` subject to `X = Z`, `A(X) = t`, with over-relaxation
//! and a ratio-based adaptive penalty. Constraint directions are
//! unit-normalized and the problem globally rescaled before iterating, so
//! tolerances act on quantities of order one; the returned solution is in
//! the original units.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `min tr(X) s.t. tr((v_k v_k^H) X) >= rhs[k], X PSD`, with `v_k` the
/// k-th column of `vectors`.
#[derive(Debug, Clone)]
pub struct RankOneTraceProblem {
    /// Constraint directions, one column per constraint (M x K).
    pub vectors: DMatrix<Complex64>,
    /// Constraint right-hand sides; strictly positive.
    pub rhs: Vec<f64>,
}

/// Solver knobs; defaults match the documented tolerances.
#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Stop when both relative residuals drop below this.
    pub rel_tolerance: f64,
    /// Hard iteration cap.
    pub max_iterations: usize,
    /// Over-relaxation factor in (1, 2).
    pub over_relaxation: f64,
    /// Check the residual ratio every this many iterations.
    pub rho_update_interval: usize,
    /// Multiply/divide the penalty by this factor when rebalancing.
    pub rho_update_factor: f64,
    /// Rebalance when one residual exceeds the other by this ratio.
    pub rho_ratio_threshold: f64,
    /// Stop rebalancing after this many penalty changes. A frozen penalty
    /// restores the plain-iteration convergence guarantee; an unbounded
    /// schedule can cycle forever on near-degenerate instances.
    pub rho_max_updates: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-7,
            max_iterations: 50_000,
            over_relaxation: 1.6,
            rho_update_interval: 25,
            rho_update_factor: 2.0,
            rho_ratio_threshold: 10.0,
            rho_max_updates: 40,
        }
    }
}

/// Termination state of the splitting iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// Residuals met the tolerance.
    Optimal,
    /// Iteration cap reached first; the solution carries the residuals
    /// actually attained.
    IterationLimit,
}

/// Primal-dual solution in original units.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Hermitian PSD matrix (M x M).
    pub x: DMatrix<Complex64>,
    /// tr(x).
    pub objective: f64,
    /// One non-negative dual per constraint; feasible duals satisfy
    /// `sum_k y_k v_k v_k^H <= I` and `rhs' y` lower-bounds the optimum.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Relative combined primal residual at exit.
    pub primal_residual: f64,
    /// Relative combined dual residual at exit.
    pub dual_residual: f64,
}

/// Solve the rank-one-constrained trace minimization by ADMM.
pub fn solve_rank_one_sdp(problem: &RankOneTraceProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    validate(problem, opts)?;
    let m = problem.vectors.nrows();
    let k = problem.vectors.ncols();

    // Normalize: unit constraint directions u_k, per-constraint targets
    // beta_k = rhs_k / ||v_k||^2, and a global scale theta (geometric mean
    // of the targets) so the working variable sits near unit magnitude.
    let mut u = problem.vectors.clone();
    let mut beta = vec![0.0f64; k];
    for j in 0..k {
        let norm_sq: f64 = u.column(j).iter().map(|c| c.norm_sqr()).sum();
        let norm = norm_sq.sqrt();
        for i in 0..m {
            u[(i, j)] /= Complex64::from(norm);
        }
        beta[j] = problem.rhs[j] / norm_sq;
    }
    let theta = geometric_mean(&beta);
    for b in beta.iter_mut() {
        *b /= theta;
    }

    // Gram matrix of the constraint set, tr(G_j G_k) = |u_j^H u_k|^2, and
    // the Cholesky factor of I + gram for the X-update solves. Both are
    // independent of the penalty parameter.
    let mut gram = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let inner: Complex64 = u
                .column(a)
                .iter()
                .zip(u.column(b).iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            let val = inner.norm_sqr();
            gram[(a, b)] = val;
            gram[(b, a)] = val;
        }
    }
    let mut system = gram.clone();
    for d in 0..k {
        system[(d, d)] += 1.0;
    }
    let chol: Cholesky<f64, Dyn> = Cholesky::new(system).ok_or_else(|| {
        Error::numerical("constraint Gram system is not positive definite")
    })?;

    let alpha = opts.over_relaxation;
    let mut rho = 1.0f64;
    let mut z: DMatrix<Complex64> = DMatrix::zeros(m, m);
    let mut uu: DMatrix<Complex64> = DMatrix::zeros(m, m); // scaled dual of X = Z
    let mut t = DVector::from_column_slice(&beta);
    let mut v = DVector::zeros(k); // scaled dual of A(X) = t
    let beta_vec = DVector::from_column_slice(&beta);
    let beta_norm = beta_vec.norm();

    let mut iterations = 0usize;
    let mut rho_updates = 0usize;
    let mut rel_primal = f64::INFINITY;
    let mut rel_dual = f64::INFINITY;
    let mut status = SdpStatus::IterationLimit;
    while iterations < opts.max_iterations {
        // X-update: minimize tr(X) + (rho/2)(||X - Z + U||^2 + ||A(X) - t + v||^2).
        // Stationarity gives X = R - sum_k nu_k u_k u_k^H with
        // (I + gram) nu = A(R) - (t - v), R = Z - U - I/rho.
        let mut r_mat = &z - &uu;
        for d in 0..m {
            r_mat[(d, d)] -= Complex64::from(1.0 / rho);
        }
        let a_of_r = apply_constraints(&u, &r_mat);
        let w = &t - &v;
        let nu = chol.solve(&(&a_of_r - &w));
        let mut x = r_mat;
        rank_one_downdate(&mut x, &u, &nu);
        hermitize(&mut x);
        // A(X) without touching X: A(X) = A(R) - gram*nu.
        let a_of_x = &a_of_r - &gram * &nu;

        // Over-relaxed consensus inputs.
        let x_or = x.map(|c| c * alpha) + z.map(|c| c * (1.0 - alpha));
        let a_or = a_of_x.map(|s| s * alpha) + t.map(|s| s * (1.0 - alpha));

        // Z-update: PSD projection; t-update: clip to the targets.
        let z_prev_norm_diff;
        {
            let candidate = &x_or + &uu;
            let z_new = project_psd(&candidate)?;
            z_prev_norm_diff = (&z_new - &z).norm();
            z = z_new;
        }
        let mut dt_norm_sq = 0.0;
        for j in 0..k {
            let proposed = a_or[j] + v[j];
            let clipped = proposed.max(beta[j]);
            dt_norm_sq += (clipped - t[j]).powi(2);
            t[j] = clipped;
        }

        // Scaled dual ascent.
        uu += &x_or - &z;
        for j in 0..k {
            v[j] += a_or[j] - t[j];
        }
        iterations += 1;

        // Residuals: primal against the consensus splits, dual from the
        // change of the (Z, t) block scaled by the penalty.
        let primal = ((&x - &z).norm_squared() + (&a_of_x - &t).norm_squared()).sqrt();
        let dual = rho * (z_prev_norm_diff.powi(2) + dt_norm_sq).sqrt();
        let primal_scale = 1.0 + x.norm().max(z.norm()).max(t.norm()).max(beta_norm);
        let dual_scale = 1.0 + rho * (uu.norm() + v.norm());
        rel_primal = primal / primal_scale;
        rel_dual = dual / dual_scale;
        if rel_primal < opts.rel_tolerance && rel_dual < opts.rel_tolerance {
            status = SdpStatus::Optimal;
            break;
        }

        // Ratio-based penalty rebalancing; scaled duals shrink or grow
        // inversely so the unscaled duals rho*U, rho*v are preserved. The
        // budget keeps the penalty eventually constant, without which the
        // iteration can cycle on near-degenerate active sets.
        if rho_updates < opts.rho_max_updates && iterations % opts.rho_update_interval == 0 {
            let f = opts.rho_update_factor;
            if rel_primal > opts.rho_ratio_threshold * rel_dual {
                rho *= f;
                uu /= Complex64::from(f);
                v /= f;
                rho_updates += 1;
            } else if rel_dual > opts.rho_ratio_threshold * rel_primal {
                rho /= f;
                uu *= Complex64::from(f);
                v *= f;
                rho_updates += 1;
            }
        }
    }

    // The PSD-exact iterate Z is the returned point. Polish: scale by the
    // smallest factor restoring every constraint, which lands exactly on
    // the worst one (the factor is a hair above or below 1 at
    // convergence).
    let attained = apply_constraints(&u, &z);
    let mut polish = 0.0f64;
    for j in 0..k {
        if attained[j] <= 0.0 {
            return Err(Error::numerical(format!(
                "constraint {j} attained a non-positive value; the iterate is not usable"
            )));
        }
        polish = polish.max(beta[j] / attained[j]);
    }
    let x_final = z.map(|c| c * Complex64::from(polish * theta));
    let objective = trace_real(&x_final);

    // Unscale the duals. The scaled dual update leaves v = -mu/rho at a
    // binding target (mu the multiplier of t >= beta), so the normalized
    // multiplier is -rho*v; dividing by the squared direction norm prices
    // the original, un-normalized constraint.
    let mut duals = vec![0.0f64; k];
    for j in 0..k {
        let norm_sq: f64 = problem.vectors.column(j).iter().map(|c| c.norm_sqr()).sum();
        duals[j] = (-rho * v[j] / norm_sq).max(0.0);
    }

    Ok(SdpSolution {
        status,
        x: x_final,
        objective,
        duals,
        iterations,
        primal_residual: rel_primal,
        dual_residual: rel_dual,
    })
}

/// `A(X)_k = u_k^H X u_k` for all k (real parts; exact for Hermitian X).
fn apply_constraints(u: &DMatrix<Complex64>, x: &DMatrix<Complex64>) -> DVector<f64> {
    let k = u.ncols();
    let mut out = DVector::zeros(k);
    let xu = x * u; // M x K
    for j in 0..k {
        let quad: Complex64 = u
            .column(j)
            .iter()
            .zip(xu.column(j).iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        out[j] = quad.re;
    }
    out
}

/// `x -= sum_k nu[k] * u_k u_k^H`.
fn rank_one_downdate(x: &mut DMatrix<Complex64>, u: &DMatrix<Complex64>, nu: &DVector<f64>) {
    let m = x.nrows();
    for j in 0..u.ncols() {
        let w = nu[j];
        if w == 0.0 {
            continue;
        }
        let col = u.column(j);
        for c in 0..m {
            let s = col[c].conj() * Complex64::from(w);
            for r in 0..m {
                x[(r, c)] -= col[r] * s;
            }
        }
    }
}

fn hermitize(x: &mut DMatrix<Complex64>) {
    let m = x.nrows();
    for r in 0..m {
        for c in (r + 1)..m {
            let avg = (x[(r, c)] + x[(c, r)].conj()) * Complex64::from(0.5);
            x[(r, c)] = avg;
            x[(c, r)] = avg.conj();
        }
        x[(r, r)] = Complex64::from(x[(r, r)].re);
    }
}

/// Nearest PSD matrix: Hermitian eigendecomposition with negative
/// eigenvalues clipped to zero.
fn project_psd(x: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let mut h = x.clone();
    hermitize(&mut h);
    let eig = h
        .symmetric_eigen()
        ;
    let m = x.nrows();
    let mut out = DMatrix::zeros(m, m);
    for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let q = eig.eigenvectors.column(idx);
        for c in 0..m {
            let s = q[c].conj() * Complex64::from(lam);
            for r in 0..m {
                out[(r, c)] += q[r] * s;
            }
        }
    }
    Ok(out)
}

fn trace_real(x: &DMatrix<Complex64>) -> f64 {
    (0..x.nrows()).map(|d| x[(d, d)].re).sum()
}

fn geometric_mean(values: &[f64]) -> f64 {
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    (log_sum / values.len() as f64).exp()
}

fn validate(problem: &RankOneTraceProblem, opts: &SdpOptions) -> Result<()> {
    let k = problem.vectors.ncols();
    if k == 0 {
        return Err(Error::config("vectors", "need at least one constraint"));
    }
    if problem.rhs.len() != k {
        return Err(Error::config(
            "rhs",
            format!("expected {k} entries, got {}", problem.rhs.len()),
        ));
    }
    for (j, &b) in problem.rhs.iter().enumerate() {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config(
                "rhs",
                format!("entry {j} must be positive and finite, got {b}"),
            ));
        }
    }
    for j in 0..k {
        let norm_sq: f64 = problem.vectors.column(j).iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::config(
                "vectors",
                format!("constraint direction {j} must be nonzero and finite"),
            ));
        }
    }
    if !(opts.over_relaxation > 0.0 && opts.over_relaxation < 2.0) {
        return Err(Error::config(
            "over_relaxation",
            format!("must lie in (0, 2), got {}", opts.over_relaxation),
        ));
    }
    if !(opts.rel_tolerance > 0.0) {
        return Err(Error::config("rel_tolerance", "must be positive"));
    }
    Ok(())
}
