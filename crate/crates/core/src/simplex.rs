//! Dense bounded-variable primal simplex for coverage linear programs.
//!
//! Solves `min c'x  s.t.  A x >= b,  0 <= x <= u` where every entry of `A`
//! is non-negative and every `b_k` is positive — the shape of "each
//! receiver must collect enough power" constraints. The structure buys two
//! things:
//!
//! * a free starting vertex: at `x = u` the left-hand sides are maximal,
//!   so either all constraints hold (a feasible basic solution with the
//!   surplus variables basic) or some constraint is violated even at full
//!   power, which is a certificate of infeasibility naming the worst row;
//! * a sound presolve: with non-negative costs no optimum ever lifts a
//!   variable above the smallest level at which its column alone covers
//!   every row it touches, so the box can be shrunk to those caps before
//!   pivoting starts.
//!
//! The solver then equilibrates: variables are mapped onto `[0, 1]` by
//! dividing through the tightened bounds, each row is divided by its
//! largest scaled coefficient, and the objective by its largest scaled
//! entry. All internal quantities — basic values, prices, reduced costs —
//! are then of order one, which is what makes fixed tolerances meaningful.
//! Without this, a right-hand side many orders below the row mass (a
//! nearly-zero energy target, say) leaves the optimal basics so far below
//! the starting magnitudes that they drown in rounding error.
//!
//! The implementation is a textbook revised simplex with explicit basis
//! inverse: Dantzig pricing with a Bland fallback against cycling, a ratio
//! test aware of both variable bounds (including bound flips that change
//! no basis), rank-1 basis-inverse updates with periodic refactorization,
//! and a dual certificate (row prices and reduced costs) extracted at
//! termination. Sizes here are tiny (tens of variables, hundreds of
//! rows), so a dense inverse is the simple and fast choice.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `min objective'x  s.t.  rows[k]'x >= rhs[k] for all k,  0 <= x <= upper`.
///
/// All row coefficients must be non-negative and all right-hand sides
/// strictly positive; upper bounds must be finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Optimal,
    /// Some constraint fails even at `x = upper`; `row` is the most
    /// violated constraint and `shortfall` how far its left-hand side
    /// falls below `rhs[row]` (in the row's original units).
    Infeasible { row: usize, shortfall: f64 },
    /// Pivot cap exhausted.
    IterationLimit,
    /// Basis became numerically singular.
    Singular,
}

/// Primal-dual solution with certificate quality metrics. The dual vector
/// has one non-negative price per constraint; `reduced_costs` cover the
/// structural variables. Residuals are relative and should sit at or
/// below the solver tolerances for `status = Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    pub max_complementarity: f64,
}

/// Solver knobs; the defaults match the documented tolerances (1e-8
/// relative feasibility/optimality, one million pivot cap).
#[derive(Debug, Clone)]
pub struct LpOptions {
    /// Reduced-cost threshold for pricing.
    pub optimality_tol: f64,
    /// Relative feasibility tolerance for the certificate check.
    pub feasibility_tol: f64,
    /// Smallest usable pivot magnitude.
    pub pivot_tol: f64,
    /// Hard cap on simplex pivots.
    pub max_iterations: usize,
    /// Refactorize the basis inverse every this many pivots.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            optimality_tol: 1e-9,
            feasibility_tol: 1e-8,
            pivot_tol: 1e-10,
            max_iterations: 1_000_000,
            refactor_every: 64,
            bland_after: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Variables are indexed 0..n for structural and n..n+k for the surplus
/// variable of each row (column `-e_k`, bounds `[0, inf)`).
///
/// Everything inside the workspace lives in the equilibrated space:
/// structural variables range over `[0, 1]`, matrix entries over `[0, 1]`,
/// and the objective over `[-1, 1]`. The `scale_*` fields map back to the
/// original units.
struct Workspace {
    n: usize,
    k: usize,
    /// Equilibrated constraint matrix (k x n):
    /// a[r][j] = rows[r][j] * scale_x[j] / scale_row[r].
    a: DMatrix<f64>,
    /// Equilibrated objective: cost[j] = objective[j] * scale_x[j] / scale_cost.
    cost: Vec<f64>,
    /// Structural upper bounds in the equilibrated space (all ones).
    upper: Vec<f64>,
    /// Equilibrated right-hand side: b_hat[r] = rhs[r] / scale_row[r].
    b_hat: DVector<f64>,
    /// Tightened original-unit bounds; x[j] = x_hat[j] * scale_x[j].
    scale_x: Vec<f64>,
    /// Row divisors; duals[r] = y_hat[r] * scale_cost / scale_row[r].
    scale_row: Vec<f64>,
    scale_cost: f64,
    state: Vec<VarState>,
    /// Variable occupying each basis row.
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    x_basic: DVector<f64>,
}

impl Workspace {
    fn is_surplus(&self, var: usize) -> bool {
        var >= self.n
    }

    fn upper_of(&self, var: usize) -> f64 {
        if self.is_surplus(var) {
            f64::INFINITY
        } else {
            self.upper[var]
        }
    }

    fn cost_of(&self, var: usize) -> f64 {
        if self.is_surplus(var) {
            0.0
        } else {
            self.cost[var]
        }
    }

    /// Column of variable `var` in the scaled constraint matrix.
    fn column(&self, var: usize) -> DVector<f64> {
        if self.is_surplus(var) {
            let mut col = DVector::zeros(self.k);
            col[var - self.n] = -1.0;
            col
        } else {
            self.a.column(var).into_owned()
        }
    }

    /// Row prices y' = c_B' B^{-1} for the scaled problem.
    fn prices(&self) -> DVector<f64> {
        let mut y = DVector::zeros(self.k);
        for r in 0..self.k {
            let cb = self.cost_of(self.basis[r]);
            if cb != 0.0 {
                for i in 0..self.k {
                    y[i] += cb * self.binv[(r, i)];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, var: usize, y: &DVector<f64>) -> f64 {
        if self.is_surplus(var) {
            // c = 0, column = -e_k.
            y[var - self.n]
        } else {
            let mut d = self.cost[var];
            for k in 0..self.k {
                d -= y[k] * self.a[(k, var)];
            }
            d
        }
    }

    /// Basic values implied by the current basis inverse and bound
    /// states. Recomputed from scratch after every pivot: incremental
    /// updates would carry absolute rounding error from early iterations
    /// (where values can be enormous) into late ones (where they can be
    /// tiny), while a fresh product keeps the error relative to the
    /// current magnitudes.
    fn recompute_basics(&mut self) {
        // Right-hand side minus nonbasic-at-upper contributions (only
        // structural variables have finite uppers).
        let mut r_vec = self.b_hat.clone();
        for j in 0..self.n {
            if self.state[j] == VarState::AtUpper {
                let col = self.a.column(j);
                for i in 0..self.k {
                    r_vec[i] -= col[i] * self.upper[j];
                }
            }
        }
        self.x_basic = &self.binv * r_vec;
    }

    /// Rebuild the basis inverse and basic values from scratch.
    fn refactor(&mut self) -> Result<()> {
        let mut b = DMatrix::zeros(self.k, self.k);
        for r in 0..self.k {
            b.set_column(r, &self.column(self.basis[r]));
        }
        let binv = b
            .try_inverse()
            .ok_or_else(|| Error::numerical("singular simplex basis during refactorization"))?;
        self.binv = binv;
        self.recompute_basics();
        Ok(())
    }
}

/// Solve the coverage LP. Dimension or sign errors in the problem are
/// reported as configuration errors; numerical breakdowns surface as
/// `LpStatus::Singular`/`IterationLimit` in the returned solution.
pub fn solve(lp: &LinearProgram, opts: &LpOptions) -> Result<LpSolution> {
    validate(lp)?;
    let n = lp.objective.len();
    let k = lp.rows.len();

    // No constraints: each variable sits at whichever bound its cost
    // prefers.
    if k == 0 {
        let x: Vec<f64> = lp
            .objective
            .iter()
            .zip(&lp.upper)
            .map(|(&c, &u)| if c < 0.0 { u } else { 0.0 })
            .collect();
        let objective = dot(&lp.objective, &x);
        return Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            duals: vec![],
            reduced_costs: lp.objective.clone(),
            iterations: 0,
            max_primal_residual: 0.0,
            max_dual_residual: 0.0,
            max_complementarity: 0.0,
        });
    }

    // Test the all-upper vertex in original units; a violated row is a
    // certificate of infeasibility.
    let mut worst_row = 0;
    let mut worst_violation = 0.0f64;
    for r in 0..k {
        let lhs = dot(&lp.rows[r], &lp.upper);
        let violation = (lp.rhs[r] - lhs) / lp.rhs[r];
        if violation > worst_violation {
            worst_violation = violation;
            worst_row = r;
        }
    }
    if worst_violation > opts.feasibility_tol {
        let shortfall = lp.rhs[worst_row] - dot(&lp.rows[worst_row], &lp.upper);
        return Ok(LpSolution {
            status: LpStatus::Infeasible {
                row: worst_row,
                shortfall,
            },
            x: lp.upper.clone(),
            objective: dot(&lp.objective, &lp.upper),
            duals: vec![0.0; k],
            reduced_costs: lp.objective.clone(),
            iterations: 0,
            max_primal_residual: worst_violation,
            max_dual_residual: 0.0,
            max_complementarity: 0.0,
        });
    }

    // Presolve bound tightening: with a non-negative cost, no optimum
    // ever puts x_j above cap_j = max_r rhs[r]/rows[r][j] — at that level
    // column j alone over-covers every row it touches, so clipping any
    // feasible point to the cap stays feasible and never costs more. The
    // box is shrunk to twice the caps: still redundant (hence harmless),
    // and the factor of two keeps every optimum strictly inside any
    // artificial bound, so terminal dual certificates never lean on a
    // bound the original problem does not have. The tightened bounds also
    // anchor the equilibration below.
    let mut scale_x = lp.upper.clone();
    for j in 0..n {
        if lp.objective[j] < 0.0 {
            continue;
        }
        let mut cap = 0.0f64;
        let mut has_positive = false;
        for r in 0..k {
            if lp.rows[r][j] > 0.0 {
                has_positive = true;
                cap = cap.max(lp.rhs[r] / lp.rows[r][j]);
            }
        }
        if has_positive {
            scale_x[j] = scale_x[j].min(2.0 * cap);
        }
    }

    // Equilibrate: x = scale_x .* x_hat maps the box onto [0, 1]^n, each
    // row is divided by its largest scaled coefficient (entries in
    // [0, 1], right-hand side of order one), and the objective by its
    // largest scaled entry.
    let mut scale_row = vec![0.0f64; k];
    let mut a = DMatrix::zeros(k, n);
    let mut b_hat = DVector::zeros(k);
    for r in 0..k {
        let mut s = 0.0f64;
        for j in 0..n {
            s = s.max(lp.rows[r][j] * scale_x[j]);
        }
        // s == 0 would mean an all-zero row, which the certificate check
        // above already rejected (its rhs is positive).
        scale_row[r] = s;
        for j in 0..n {
            a[(r, j)] = lp.rows[r][j] * scale_x[j] / s;
        }
        b_hat[r] = lp.rhs[r] / s;
    }
    let mut scale_cost = 0.0f64;
    for j in 0..n {
        scale_cost = scale_cost.max(lp.objective[j].abs() * scale_x[j]);
    }
    if scale_cost == 0.0 {
        scale_cost = 1.0;
    }
    let cost: Vec<f64> = (0..n)
        .map(|j| lp.objective[j] * scale_x[j] / scale_cost)
        .collect();

    // Start at x_hat = 1 with all surplus variables basic: B = -I. The
    // tightened vertex is the clip of the original one, so it inherits
    // feasibility (up to roundoff, hence the clamp).
    let mut x_basic = DVector::zeros(k);
    for r in 0..k {
        let mut lhs = 0.0;
        for j in 0..n {
            lhs += a[(r, j)];
        }
        x_basic[r] = (lhs - b_hat[r]).max(0.0);
    }
    let mut state = vec![VarState::AtUpper; n];
    state.extend((0..k).map(VarState::Basic));
    let mut ws = Workspace {
        n,
        k,
        a,
        cost,
        upper: vec![1.0; n],
        b_hat,
        scale_x,
        scale_row,
        scale_cost,
        state,
        basis: (n..n + k).collect(),
        binv: -DMatrix::<f64>::identity(k, k),
        x_basic,
    };

    let mut iterations = 0usize;
    let mut degenerate_run = 0usize;
    let mut pivots_since_refactor = 0usize;
    // Whether binv is freshly factorized with no pivots applied since.
    // Optimality is only ever declared on a clean basis: rank-1 updates
    // drift, and a termination decision made on a drifted inverse can be
    // wrong even when every individual pivot was sound.
    let mut clean = true;
    let status = loop {
        if iterations >= opts.max_iterations {
            break LpStatus::IterationLimit;
        }
        if pivots_since_refactor >= opts.refactor_every {
            if ws.refactor().is_err() {
                break LpStatus::Singular;
            }
            pivots_since_refactor = 0;
            clean = true;
        }

        let y = ws.prices();
        let bland = degenerate_run > opts.bland_after;
        let mut entering: Option<(usize, f64)> = None;
        for var in 0..(n + k) {
            let improvement = match ws.state[var] {
                VarState::Basic(_) => continue,
                VarState::AtLower => -ws.reduced_cost(var, &y),
                VarState::AtUpper => ws.reduced_cost(var, &y),
            };
            if improvement > opts.optimality_tol {
                match entering {
                    None => entering = Some((var, improvement)),
                    Some((_, best)) if !bland && improvement > best => {
                        entering = Some((var, improvement))
                    }
                    _ => {}
                }
                if bland {
                    // Bland's rule: first eligible index wins.
                    break;
                }
            }
        }
        let Some((e, _)) = entering else {
            if !clean {
                // No candidate on a drifted inverse proves nothing;
                // refactorize and price again before concluding.
                if ws.refactor().is_err() {
                    break LpStatus::Singular;
                }
                pivots_since_refactor = 0;
                clean = true;
                continue;
            }
            // Pricing is clean, so the point is dual feasible. Primal
            // feasibility can still have been lost: in extreme-range
            // problems the ratio test cannot always resolve near-ties
            // (the blocking information sits below f64 resolution at the
            // running magnitudes), and the recomputed basics then reveal
            // a violated row. Repair with dual-simplex pivots, which keep
            // the clean reduced costs while driving basics back into
            // their bounds.
            let mut worst = None;
            for r in 0..k {
                let xb = ws.x_basic[r];
                let ub = ws.upper_of(ws.basis[r]);
                let violation = if xb < -opts.feasibility_tol {
                    -xb
                } else if xb > ub + opts.feasibility_tol {
                    xb - ub
                } else {
                    continue;
                };
                match worst {
                    None => worst = Some((r, violation)),
                    Some((_, v)) if violation > v => worst = Some((r, violation)),
                    _ => {}
                }
            }
            let Some((r, _)) = worst else {
                break LpStatus::Optimal;
            };
            let below = ws.x_basic[r] < 0.0;
            let Some(e) = dual_entering(&ws, r, below, &y, opts, bland) else {
                break LpStatus::Singular;
            };
            let w = &ws.binv * ws.column(e);
            let pivot = w[r];
            if pivot.abs() < opts.pivot_tol {
                break LpStatus::Singular;
            }
            let lv = ws.basis[r];
            ws.state[lv] = if below {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            ws.basis[r] = e;
            ws.state[e] = VarState::Basic(r);
            for c in 0..k {
                ws.binv[(r, c)] /= pivot;
            }
            for i in 0..k {
                if i != r {
                    let factor = w[i];
                    if factor != 0.0 {
                        for c in 0..k {
                            ws.binv[(i, c)] -= factor * ws.binv[(r, c)];
                        }
                    }
                }
            }
            degenerate_run += 1;
            // Repairs are rare; refactorize immediately so the next
            // pricing round works from an exact inverse.
            if ws.refactor().is_err() {
                break LpStatus::Singular;
            }
            pivots_since_refactor = 0;
            clean = true;
            iterations += 1;
            continue;
        };

        let sigma = if ws.state[e] == VarState::AtLower {
            1.0
        } else {
            -1.0
        };
        let w = &ws.binv * ws.column(e);
        // Moving the entering variable by t >= 0 changes basics by -sigma*w*t.
        let mut t_best = ws.upper_of(e); // bound-flip distance
        let mut leaving: Option<(usize, bool, f64)> = None; // (row, hits_upper, |pivot|)
        for r in 0..k {
            let v = sigma * w[r];
            let xb = ws.x_basic[r];
            let ub = ws.upper_of(ws.basis[r]);
            let (t, hits_upper) = if v > opts.pivot_tol {
                ((xb.max(0.0)) / v, false)
            } else if v < -opts.pivot_tol && ub.is_finite() {
                ((xb - ub).min(0.0) / v, true)
            } else {
                continue;
            };
            let better = match leaving {
                _ if t < t_best - 1e-12 => true,
                Some((_, _, mag)) if (t - t_best).abs() <= 1e-12 => {
                    if bland {
                        ws.basis[r] < ws.basis[leaving.unwrap().0]
                    } else {
                        v.abs() > mag
                    }
                }
                None if t <= t_best + 1e-12 => true,
                _ => false,
            };
            if better {
                t_best = t.min(t_best);
                leaving = Some((r, hits_upper, v.abs()));
            }
        }

        if !t_best.is_finite() {
            // Cannot happen for coverage problems with boxed structural
            // variables, but bail out cleanly rather than loop.
            break LpStatus::Singular;
        }
        if t_best <= 1e-12 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }

        match leaving {
            None => {
                // Bound flip: the entering variable crossed its whole
                // range without any basic variable blocking.
                ws.state[e] = if sigma > 0.0 {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
            }
            Some((r, hits_upper, _)) => {
                let lv = ws.basis[r];
                ws.state[lv] = if hits_upper {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
                ws.basis[r] = e;
                ws.state[e] = VarState::Basic(r);
                // Rank-1 update of the basis inverse: pivot on w[r].
                let pivot = w[r];
                if pivot.abs() < opts.pivot_tol {
                    break LpStatus::Singular;
                }
                for c in 0..k {
                    ws.binv[(r, c)] /= pivot;
                }
                for i in 0..k {
                    if i != r {
                        let factor = w[i];
                        if factor != 0.0 {
                            for c in 0..k {
                                ws.binv[(i, c)] -= factor * ws.binv[(r, c)];
                            }
                        }
                    }
                }
                pivots_since_refactor += 1;
                clean = false;
            }
        }
        // A basic variable that left at its upper bound changes the
        // right-hand side, and the basis may have changed: refresh the
        // basic values from the current inverse and bound states.
        ws.recompute_basics();
        iterations += 1;
    };

    // A final clean refactorization tightens the certificate before
    // extraction (skip if the basis went singular).
    if status == LpStatus::Optimal {
        let _ = ws.refactor();
    }
    Ok(extract(lp, &ws, status, iterations, opts))
}

fn extract(
    lp: &LinearProgram,
    ws: &Workspace,
    status: LpStatus,
    iterations: usize,
    opts: &LpOptions,
) -> LpSolution {
    let n = ws.n;
    let k = ws.k;
    let mut x = vec![0.0; n];
    for j in 0..n {
        let x_hat = match ws.state[j] {
            VarState::Basic(r) => ws.x_basic[r].clamp(0.0, ws.upper[j]),
            VarState::AtLower => 0.0,
            VarState::AtUpper => ws.upper[j],
        };
        x[j] = x_hat * ws.scale_x[j];
    }
    let y_scaled = ws.prices();
    // Undo the equilibration: original objective units are scale_cost
    // times the internal ones and original rhs units scale_row times, so
    // the original-units price is y * scale_cost / scale_row.
    let mut duals = vec![0.0; k];
    for r in 0..k {
        duals[r] = (y_scaled[r] * ws.scale_cost / ws.scale_row[r]).max(0.0);
    }
    let mut reduced_costs = vec![0.0; n];
    for j in 0..n {
        let mut d = lp.objective[j];
        for r in 0..k {
            d -= duals[r] * lp.rows[r][j];
        }
        reduced_costs[j] = d;
    }

    let mut max_primal = 0.0f64;
    let mut max_compl = 0.0f64;
    for r in 0..k {
        let lhs = dot(&lp.rows[r], &x);
        let violation = (lp.rhs[r] - lhs) / lp.rhs[r];
        max_primal = max_primal.max(violation);
        let slack = (lhs - lp.rhs[r]).max(0.0);
        max_compl = max_compl.max(duals[r] * slack / lp.rhs[r].max(1.0));
    }
    let mut max_dual = 0.0f64;
    for j in 0..n {
        let scale = lp.objective[j].abs().max(1.0);
        let violation = match ws.state[j] {
            VarState::AtLower => (-reduced_costs[j]).max(0.0),
            VarState::AtUpper => reduced_costs[j].max(0.0),
            VarState::Basic(_) => reduced_costs[j].abs(),
        };
        max_dual = max_dual.max(violation / scale);
        // Complementarity of the bound multipliers.
        match ws.state[j] {
            VarState::Basic(_) => {
                let interior = x[j].min(lp.upper[j] - x[j]).max(0.0);
                max_compl = max_compl.max(reduced_costs[j].abs() * interior / scale);
            }
            _ => {}
        }
    }

    let status = match status {
        LpStatus::Optimal if max_primal > opts.feasibility_tol => LpStatus::Singular,
        s => s,
    };
    LpSolution {
        status,
        objective: dot(&lp.objective, &x),
        x,
        duals,
        reduced_costs,
        iterations,
        max_primal_residual: max_primal,
        max_dual_residual: max_dual,
        max_complementarity: max_compl,
    }
}

/// Entering variable for a dual-simplex repair pivot on basis row `r`,
/// whose basic variable violates its lower bound (`below`) or upper bound.
/// The dual ratio test picks the nonbasic variable that can absorb the
/// violation with the least reduced-cost movement, so reduced-cost signs
/// (dual feasibility) survive the pivot.
fn dual_entering(
    ws: &Workspace,
    r: usize,
    below: bool,
    y: &DVector<f64>,
    opts: &LpOptions,
    bland: bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for var in 0..(ws.n + ws.k) {
        let at_lower = match ws.state[var] {
            VarState::Basic(_) => continue,
            VarState::AtLower => true,
            VarState::AtUpper => false,
        };
        // alpha = (row r of B^{-1}) . column(var).
        let alpha = if ws.is_surplus(var) {
            -ws.binv[(r, var - ws.n)]
        } else {
            let mut s = 0.0;
            for i in 0..ws.k {
                s += ws.binv[(r, i)] * ws.a[(i, var)];
            }
            s
        };
        // To raise x_B[r], an at-lower variable must push it up when
        // increasing (alpha < 0) or an at-upper variable when decreasing
        // (alpha > 0); mirrored when x_B[r] must come down.
        let eligible = if below {
            (at_lower && alpha < -opts.pivot_tol) || (!at_lower && alpha > opts.pivot_tol)
        } else {
            (at_lower && alpha > opts.pivot_tol) || (!at_lower && alpha < -opts.pivot_tol)
        };
        if !eligible {
            continue;
        }
        let ratio = ws.reduced_cost(var, y).abs() / alpha.abs();
        match best {
            None => best = Some((var, ratio)),
            Some((_, b)) if !bland && ratio < b => best = Some((var, ratio)),
            // Under Bland, ties keep the first (smallest) index seen.
            Some((_, b)) if bland && ratio < b - 1e-12 => best = Some((var, ratio)),
            _ => {}
        }
    }
    best.map(|(var, _)| var)
}

fn validate(lp: &LinearProgram) -> Result<()> {
    let n = lp.objective.len();
    if lp.upper.len() != n {
        return Err(Error::config(
            "upper",
            format!("expected {n} bounds, got {}", lp.upper.len()),
        ));
    }
    if lp.rhs.len() != lp.rows.len() {
        return Err(Error::config(
            "rhs",
            format!("expected {} entries, got {}", lp.rows.len(), lp.rhs.len()),
        ));
    }
    for (j, &u) in lp.upper.iter().enumerate() {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::config(
                "upper",
                format!("bound {j} must be positive and finite, got {u}"),
            ));
        }
    }
    for (idx, c) in lp.objective.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::config(
                "objective",
                format!("coefficient {idx} is not finite"),
            ));
        }
    }
    for (r, row) in lp.rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::config(
                "rows",
                format!("row {r} has {} coefficients, expected {n}", row.len()),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(
                    "rows",
                    format!("coefficient ({r}, {j}) must be non-negative, got {v}"),
                ));
            }
        }
        if !(lp.rhs[r] > 0.0) || !lp.rhs[r].is_finite() {
            return Err(Error::config(
                "rhs",
                format!("entry {r} must be strictly positive, got {}", lp.rhs[r]),
            ));
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn solve_default(lp: &LinearProgram) -> LpSolution {
        solve(lp, &LpOptions::default()).unwrap()
    }

    /// KKT conditions certify LP optimality, so checking them validates
    /// the solver without an external reference.
    fn assert_kkt(lp: &LinearProgram, sol: &LpSolution, tol: f64) {
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.max_primal_residual <= tol, "primal {}", sol.max_primal_residual);
        assert!(sol.max_dual_residual <= tol.sqrt(), "dual {}", sol.max_dual_residual);
        assert!(
            sol.max_complementarity <= tol.sqrt(),
            "compl {}",
            sol.max_complementarity
        );
        for &y in &sol.duals {
            assert!(y >= 0.0);
        }
        // Strong duality with upper bounds: the dual objective is
        // b'y - sum_j u_j * max(0, -d_j).
        let dual_obj: f64 = lp
            .rhs
            .iter()
            .zip(&sol.duals)
            .map(|(b, y)| b * y)
            .sum::<f64>()
            - lp.upper
                .iter()
                .zip(&sol.reduced_costs)
                .map(|(u, d)| u * (-d).max(0.0))
                .sum::<f64>();
        let scale = sol.objective.abs().max(1.0);
        assert!(
            (sol.objective - dual_obj).abs() <= 1e-6 * scale,
            "duality gap: primal {} dual {}",
            sol.objective,
            dual_obj
        );
    }

    #[test]
    fn two_by_two_interior_optimum() {
        // min x1 + x2, x1 + 2 x2 >= 2, 2 x1 + x2 >= 2 -> x = (2/3, 2/3).
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            rows: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            rhs: vec![2.0, 2.0],
            upper: vec![10.0, 10.0],
        };
        let sol = solve_default(&lp);
        assert_kkt(&lp, &sol, 1e-8);
        assert_relative_eq!(sol.objective, 4.0 / 3.0, max_relative = 1e-9);
        assert_relative_eq!(sol.x[0], 2.0 / 3.0, max_relative = 1e-9);
        assert_relative_eq!(sol.x[1], 2.0 / 3.0, max_relative = 1e-9);
        assert_relative_eq!(sol.duals[0], 1.0 / 3.0, max_relative = 1e-6);
        assert_relative_eq!(sol.duals[1], 1.0 / 3.0, max_relative = 1e-6);
    }

    #[test]
    fn upper_bound_binds() {
        // min 2 x1 + x2, x1 + x2 >= 3, u = (5, 1): fill the cheap variable
        // to its cap, cover the rest with the expensive one.
        let lp = LinearProgram {
            objective: vec![2.0, 1.0],
            rows: vec![vec![1.0, 1.0]],
            rhs: vec![3.0],
            upper: vec![5.0, 1.0],
        };
        let sol = solve_default(&lp);
        assert_kkt(&lp, &sol, 1e-8);
        assert_relative_eq!(sol.x[0], 2.0, max_relative = 1e-9);
        assert_relative_eq!(sol.x[1], 1.0, max_relative = 1e-9);
        assert_relative_eq!(sol.objective, 5.0, max_relative = 1e-9);
    }

    #[test]
    fn infeasibility_names_the_worst_row() {
        // x <= 1 but the second constraint needs x >= 2.
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![vec![2.0], vec![1.0]],
            rhs: vec![1.0, 2.0],
            upper: vec![1.0],
        };
        let sol = solve_default(&lp);
        match sol.status {
            LpStatus::Infeasible { row, shortfall } => {
                assert_eq!(row, 1);
                assert_relative_eq!(shortfall, 1.0, max_relative = 1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn no_constraints_means_all_at_preferred_bound() {
        let lp = LinearProgram {
            objective: vec![1.0, -1.0],
            rows: vec![],
            rhs: vec![],
            upper: vec![3.0, 4.0],
        };
        let sol = solve_default(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![0.0, 4.0]);
        assert_relative_eq!(sol.objective, -4.0, max_relative = 1e-12);
    }

    #[test]
    fn duplicated_rows_stay_stable() {
        // Heavily degenerate: the same constraint five times.
        let lp = LinearProgram {
            objective: vec![1.0, 1.0, 1.0],
            rows: vec![vec![1.0, 1.0, 1.0]; 5],
            rhs: vec![2.0; 5],
            upper: vec![1.0, 1.0, 1.0],
        };
        let sol = solve_default(&lp);
        assert_kkt(&lp, &sol, 1e-8);
        assert_relative_eq!(sol.objective, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn bad_problems_are_rejected() {
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![vec![-1.0]],
            rhs: vec![1.0],
            upper: vec![1.0],
        };
        assert!(solve(&lp, &LpOptions::default()).is_err());
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![vec![1.0]],
            rhs: vec![0.0],
            upper: vec![1.0],
        };
        assert!(solve(&lp, &LpOptions::default()).is_err());
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![vec![1.0]],
            rhs: vec![1.0],
            upper: vec![f64::INFINITY],
        };
        assert!(solve(&lp, &LpOptions::default()).is_err());
    }

    #[test]
    fn scenario_sized_problem_satisfies_kkt() {
        // Dimensions and magnitudes of the real coverage problem:
        // 84 variables, 240 rows, coefficients around 1e-6..1e-3.
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(99);
        let n = 84;
        let k = 240;
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| 1e-6 + 1e-3 * rng.random::<f64>()).collect())
            .collect();
        let lp = LinearProgram {
            objective: vec![1.0; n],
            rows,
            rhs: vec![2.7e-5; k],
            upper: vec![4.0; n],
        };
        let sol = solve_default(&lp);
        assert_kkt(&lp, &sol, 1e-8);
        assert!(sol.objective > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_coverage_lps_satisfy_kkt(
            n in 1usize..6,
            k in 0usize..8,
            seed in 0u64..1000,
        ) {
            use rand::Rng;
            let mut rng = crate::seeding::rng_from_seed(seed);
            let rows: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| 0.1 + 9.9 * rng.random::<f64>()).collect())
                .collect();
            let lp = LinearProgram {
                objective: (0..n).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect(),
                rows,
                rhs: (0..k).map(|_| 0.5 + 4.5 * rng.random::<f64>()).collect(),
                upper: (0..n).map(|_| 0.5 + 3.5 * rng.random::<f64>()).collect(),
            };
            let sol = solve(&lp, &LpOptions::default()).unwrap();
            match sol.status {
                LpStatus::Optimal => assert_kkt(&lp, &sol, 1e-7),
                LpStatus::Infeasible { row, shortfall } => {
                    // Verify the certificate: the named row really is
                    // violated at x = upper.
                    let lhs = dot(&lp.rows[row], &lp.upper);
                    prop_assert!(lhs < lp.rhs[row]);
                    prop_assert!((lp.rhs[row] - lhs - shortfall).abs() <= 1e-9 * lp.rhs[row]);
                }
                other => prop_assert!(false, "unexpected status {:?}", other),
            }
        }
    }
}
