//! Dense revised simplex.
//!
//! Problems arrive as [`LinearProgram`]s (`min cᵗx s.t. Ax ≤ b`, per-variable
//! sign restrictions) and are brought into the standard form
//! `M w = E, w ≥ 0` where `M = [A_scaled | I]`: rows are scaled by their
//! largest magnitude, free variables are split into two nonnegative columns
//! and every row gets its own slack.
//!
//! Feasibility comes from a phase 1 with one artificial per row whose
//! right-hand side is negative. Pricing is Dantzig's rule until the solver
//! stalls, after which Bland's rule takes over for the rest of the solve.
//! The basis inverse is kept explicitly and refreshed from scratch every
//! `refactor_every` pivots.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{dot, Matrix};
use crate::model::{LambdaInterval, LinearProgram, VarBound};

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// `None` means `50 · (rows + columns)`.
    pub max_pivots: Option<usize>,
    /// Non-improving pivots tolerated before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            max_pivots: None,
            bland_after: 200,
            refactor_every: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

/// Where a standard-form column comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ColumnOrigin {
    /// `sign · x[var]`; free variables own one column of each sign.
    Structural { var: usize, sign: f64 },
    Slack { row: usize },
}

/// `M w = E, w ≥ 0` with `M = [A_scaled | I]`.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub m: Matrix,
    pub rhs: Vec<f64>,
    pub origins: Vec<ColumnOrigin>,
    /// Row `i` of `A` was divided by `row_scale[i]`.
    pub row_scale: Vec<f64>,
    pub num_vars: usize,
    source: LinearProgram,
}

impl StandardForm {
    pub fn new(lp: &LinearProgram) -> Self {
        assert!(lp.is_dimensionally_valid(), "dimension mismatch in LP");
        let rows = lp.num_rows();
        let n = lp.num_vars();
        let mut origins = Vec::new();
        for (var, bound) in lp.bounds.iter().enumerate() {
            origins.push(ColumnOrigin::Structural { var, sign: 1.0 });
            if *bound == VarBound::Free {
                origins.push(ColumnOrigin::Structural { var, sign: -1.0 });
            }
        }
        let num_struct = origins.len();
        origins.extend((0..rows).map(|row| ColumnOrigin::Slack { row }));

        let row_scale: Vec<f64> = lp
            .a
            .iter_rows()
            .map(|r| {
                let s = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let mut m = Matrix::zeros(rows, origins.len());
        for i in 0..rows {
            for (k, o) in origins[..num_struct].iter().enumerate() {
                if let ColumnOrigin::Structural { var, sign } = *o {
                    m[(i, k)] = sign * lp.a[(i, var)] / row_scale[i];
                }
            }
            m[(i, num_struct + i)] = 1.0;
        }
        let rhs = lp.b.iter().zip(&row_scale).map(|(b, s)| b / s).collect();
        StandardForm {
            m,
            rhs,
            origins,
            row_scale,
            num_vars: n,
            source: lp.clone(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.m.rows()
    }

    pub fn num_columns(&self) -> usize {
        self.m.cols()
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.source
    }

    /// Spreads a per-variable vector over the standard-form columns (slacks get 0).
    pub fn expand(&self, per_var: &[f64]) -> Vec<f64> {
        assert_eq!(per_var.len(), self.num_vars, "objective length mismatch");
        self.origins
            .iter()
            .map(|o| match *o {
                ColumnOrigin::Structural { var, sign } => sign * per_var[var],
                ColumnOrigin::Slack { .. } => 0.0,
            })
            .collect()
    }

    fn collapse(&self, w: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars];
        for (o, v) in self.origins.iter().zip(w) {
            if let ColumnOrigin::Structural { var, sign } = *o {
                x[var] += sign * v;
            }
        }
        x
    }

    fn basis_inverse(&self, basic: &[usize]) -> Option<Matrix> {
        let rows = self.num_rows();
        let mut b = Matrix::zeros(rows, rows);
        for (k, &j) in basic.iter().enumerate() {
            for i in 0..rows {
                b[(i, k)] = self.m[(i, j)];
            }
        }
        b.inverse(1e-11)
    }
}

/// Ordered basic columns (one per row) and the complementary nonbasic set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub nonbasic: Vec<usize>,
}

/// Proof of infeasibility: `u ≥ 0`, `uᵗA` vanishes on free columns and is
/// nonnegative on sign-restricted ones, and `uᵗb < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub u: Vec<f64>,
}

impl FarkasCertificate {
    /// `(uᵗA, uᵗb)` against the original (unscaled) data.
    pub fn evaluate(&self, lp: &LinearProgram) -> (Vec<f64>, f64) {
        (lp.a.tr_mul_vec(&self.u), dot(&self.u, &lp.b))
    }

    /// Checks the certificate against `lp` at absolute tolerance `tol`.
    pub fn verify(&self, lp: &LinearProgram, tol: f64) -> bool {
        if self.u.len() != lp.num_rows() || self.u.iter().any(|&v| v < -tol) {
            return false;
        }
        let (ua, ub) = self.evaluate(lp);
        let cols_ok = ua.iter().zip(&lp.bounds).all(|(v, bound)| match bound {
            VarBound::Free => v.abs() <= tol,
            VarBound::NonNegative => *v >= -tol,
        });
        cols_ok && ub <= -tol
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub status: Status,
    /// Primal point in the original variables (empty unless Optimal or Unbounded).
    pub x: Vec<f64>,
    /// `cᵗx + offset` when Optimal; ±∞ for Infeasible/Unbounded; NaN on IterLimit.
    pub objective: f64,
    /// One multiplier per original row, `μ ≥ 0`, entering as `+μᵗ(Ax − b)`.
    pub duals: Vec<f64>,
    /// Reduced costs over all standard-form columns (0 on basic ones).
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub pivots: usize,
    pub farkas: Option<FarkasCertificate>,
    /// Direction `r` (original variables) with `cᵗr < 0` along which the problem is unbounded.
    pub ray: Option<Vec<f64>>,
    pub form: Arc<StandardForm>,
    /// Standard-form cost vector the outcome was optimized for.
    pub cost: Vec<f64>,
}

impl SimplexOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Optimal value or `None`.
    pub fn value(&self) -> Option<f64> {
        self.is_optimal().then_some(self.objective)
    }

    /// `−μᵗb + offset`, the dual objective; equals the primal one at optimality.
    pub fn dual_objective(&self) -> f64 {
        -dot(&self.duals, &self.form.lp().b) + self.form.lp().offset
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("warm start needs an optimal previous outcome, got {0:?}")]
    NotOptimal(Status),
    #[error("objective has {found} entries, problem has {expected} variables")]
    ObjectiveLength { expected: usize, found: usize },
}

/// Solves `lp` from scratch.
pub fn solve(lp: &LinearProgram) -> SimplexOutcome {
    solve_with(lp, &SimplexOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SimplexOptions) -> SimplexOutcome {
    let form = Arc::new(StandardForm::new(lp));
    let cost = form.expand(&lp.c);
    let out = Engine::cold(form.clone(), cost.clone(), opts).run();
    retry_if_singular(out, form, cost, opts)
}

fn pivot_limit(opts: &SimplexOptions, form: &StandardForm) -> usize {
    opts.max_pivots
        .unwrap_or(50 * (form.num_rows() + form.num_columns()).max(1))
}

/// A basis that went singular before the pivot limit gets one more cold
/// attempt with the inverse refactored at every pivot.
fn retry_if_singular(
    out: SimplexOutcome,
    form: Arc<StandardForm>,
    cost: Vec<f64>,
    opts: &SimplexOptions,
) -> SimplexOutcome {
    if out.status != Status::IterLimit || opts.refactor_every <= 1 || out.pivots >= pivot_limit(opts, &form) {
        return out;
    }
    log::debug!("singular basis after {} pivots; retrying with refactoring at every pivot", out.pivots);
    let careful = SimplexOptions {
        refactor_every: 1,
        ..opts.clone()
    };
    Engine::cold(form, cost, &careful).run()
}

/// Re-optimizes the same constraints under a new objective, starting from
/// the optimal basis of `prev`.
pub fn resolve_with_objective(
    prev: &SimplexOutcome,
    new_objective: &[f64],
) -> Result<SimplexOutcome, SimplexError> {
    resolve_with_objective_opts(prev, new_objective, &SimplexOptions::default())
}

pub fn resolve_with_objective_opts(
    prev: &SimplexOutcome,
    new_objective: &[f64],
    opts: &SimplexOptions,
) -> Result<SimplexOutcome, SimplexError> {
    if prev.status != Status::Optimal {
        return Err(SimplexError::NotOptimal(prev.status));
    }
    if new_objective.len() != prev.form.num_vars {
        return Err(SimplexError::ObjectiveLength {
            expected: prev.form.num_vars,
            found: new_objective.len(),
        });
    }
    let cost = prev.form.expand(new_objective);
    let mut engine = Engine::cold(prev.form.clone(), cost.clone(), opts);
    let out = if engine.install_basis(&prev.basis.basic) {
        engine.run_phase2_only()
    } else {
        Engine::cold(prev.form.clone(), cost.clone(), opts).run()
    };
    Ok(retry_if_singular(out, prev.form.clone(), cost, opts))
}

/// Ratio test behind [`reduced_cost_range`]: the offsets `(δ_lo, δ_hi)` for
/// which `r + δ v ≥ 0` componentwise (`r` clamped at 0).
pub fn drift_offsets(r: &[f64], v: &[f64], tol: f64) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&ri, &vi) in r.iter().zip(v) {
        let ri = ri.max(0.0);
        if vi < -tol {
            hi = hi.min(-ri / vi);
        } else if vi > tol {
            lo = lo.max(-ri / vi);
        }
    }
    (lo, hi)
}

/// Range of λ around `lambda1` on which the optimal basis of `outcome` stays
/// optimal when the objective moves as `cost + (λ − λ1)·drift`.
///
/// `drift` is given per original variable; slack columns never drift.
pub fn reduced_cost_range(
    outcome: &SimplexOutcome,
    drift: &[f64],
    lambda1: f64,
) -> LambdaInterval {
    let form = &outcome.form;
    let drift_std = form.expand(drift);
    if drift_std.iter().all(|&d| d == 0.0) || form.num_columns() == 0 {
        return LambdaInterval::new(f64::NEG_INFINITY, f64::INFINITY);
    }
    let basic = &outcome.basis.basic;
    let w: Vec<f64> = match form.basis_inverse(basic) {
        Some(binv) => {
            let db: Vec<f64> = basic.iter().map(|&j| drift_std[j]).collect();
            binv.tr_mul_vec(&db)
        }
        None => return LambdaInterval::new(lambda1, lambda1),
    };
    let wm = form.m.tr_mul_vec(&w);
    let nb = &outcome.basis.nonbasic;
    let v: Vec<f64> = nb.iter().map(|&j| drift_std[j] - wm[j]).collect();
    let r: Vec<f64> = nb.iter().map(|&j| outcome.reduced_costs[j]).collect();
    let (lo, hi) = drift_offsets(&r, &v, 1e-12);
    LambdaInterval::new(lambda1 + lo, lambda1 + hi)
}

struct Engine<'o> {
    form: Arc<StandardForm>,
    cost: Vec<f64>,
    opts: &'o SimplexOptions,
    /// Basic column per row; indices `>= ncols` are phase-1 artificials.
    basic: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Matrix,
    xb: Vec<f64>,
    /// Row served by each artificial column (offset by `ncols`).
    art_rows: Vec<usize>,
    pivots: usize,
    since_refactor: usize,
    max_pivots: usize,
}

enum Phase {
    One,
    Two,
}

enum StepResult {
    Optimal,
    Unbounded { entering: usize, direction: Vec<f64> },
    IterLimit,
    Singular,
}

impl<'o> Engine<'o> {
    fn cold(form: Arc<StandardForm>, cost: Vec<f64>, opts: &'o SimplexOptions) -> Self {
        let rows = form.num_rows();
        let ncols = form.num_columns();
        let num_struct = ncols - rows;
        let mut basic = Vec::with_capacity(rows);
        let mut art_rows = Vec::new();
        let mut diag = Matrix::identity(rows);
        let mut xb = Vec::with_capacity(rows);
        for i in 0..rows {
            let e = form.rhs[i];
            if e >= 0.0 {
                basic.push(num_struct + i);
                xb.push(e);
            } else {
                basic.push(ncols + art_rows.len());
                art_rows.push(i);
                diag[(i, i)] = -1.0;
                xb.push(-e);
            }
        }
        let mut is_basic = vec![false; ncols + art_rows.len()];
        for &j in &basic {
            is_basic[j] = true;
        }
        let max_pivots = pivot_limit(opts, &form);
        Engine {
            form,
            cost,
            opts,
            basic,
            is_basic,
            binv: diag,
            xb,
            art_rows,
            pivots: 0,
            since_refactor: 0,
            max_pivots,
        }
    }

    fn ncols(&self) -> usize {
        self.form.num_columns()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let rows = self.form.num_rows();
        if j < self.ncols() {
            self.form.m.column(j)
        } else {
            let mut e = vec![0.0; rows];
            e[self.art_rows[j - self.ncols()]] = -1.0;
            e
        }
    }

    fn install_basis(&mut self, basic: &[usize]) -> bool {
        if basic.len() != self.form.num_rows() || basic.iter().any(|&j| j >= self.ncols()) {
            return false;
        }
        let Some(binv) = self.form.basis_inverse(basic) else {
            return false;
        };
        let xb = binv.mul_vec(&self.form.rhs);
        let scale = 1.0 + self.form.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if xb.iter().any(|&v| v < -1e3 * self.opts.feas_tol * scale) {
            return false;
        }
        self.art_rows.clear();
        self.is_basic = vec![false; self.ncols()];
        for &j in basic {
            self.is_basic[j] = true;
        }
        self.basic = basic.to_vec();
        self.binv = binv;
        self.xb = xb.into_iter().map(|v| v.max(0.0)).collect();
        true
    }

    fn phase_cost(&self, phase: &Phase, j: usize) -> f64 {
        match phase {
            Phase::One => {
                if j >= self.ncols() {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => self.cost[j],
        }
    }

    fn duals(&self, phase: &Phase) -> Vec<f64> {
        let cb: Vec<f64> = self.basic.iter().map(|&j| self.phase_cost(phase, j)).collect();
        self.binv.tr_mul_vec(&cb)
    }

    /// Reduced costs of every real (non-artificial) column.
    fn reduced_costs(&self, phase: &Phase, y: &[f64]) -> Vec<f64> {
        let ym = self.form.m.tr_mul_vec(y);
        (0..self.ncols())
            .map(|j| {
                if self.is_basic[j] {
                    0.0
                } else {
                    self.phase_cost(phase, j) - ym[j]
                }
            })
            .collect()
    }

    fn refactor(&mut self) -> bool {
        let rows = self.form.num_rows();
        let mut b = Matrix::zeros(rows, rows);
        for (k, &j) in self.basic.iter().enumerate() {
            let col = self.column(j);
            for i in 0..rows {
                b[(i, k)] = col[i];
            }
        }
        match b.inverse(1e-11) {
            Some(inv) => {
                self.xb = inv
                    .mul_vec(&self.form.rhs)
                    .into_iter()
                    .map(|v| if v < 0.0 && v > -self.opts.feas_tol { 0.0 } else { v })
                    .collect();
                self.binv = inv;
                self.since_refactor = 0;
                true
            }
            None => false,
        }
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &[f64]) {
        let rows = self.form.num_rows();
        let theta = self.xb[row].max(0.0) / alpha[row];
        for i in 0..rows {
            if i != row {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-12 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[row] = theta;
        let piv = alpha[row];
        for j in 0..rows {
            self.binv[(row, j)] /= piv;
        }
        let prow: Vec<f64> = self.binv.row(row).to_vec();
        for i in 0..rows {
            if i == row || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for (b, p) in self.binv.row_mut(i).iter_mut().zip(&prow) {
                *b -= f * p;
            }
        }
        let leaving = self.basic[row];
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
        self.basic[row] = entering;
        self.pivots += 1;
        self.since_refactor += 1;
    }

    fn iterate(&mut self, phase: Phase) -> StepResult {
        let rows = self.form.num_rows();
        let mut stalled = 0usize;
        let mut bland = false;
        loop {
            if self.pivots >= self.max_pivots {
                return StepResult::IterLimit;
            }
            if self.since_refactor >= self.opts.refactor_every && !self.refactor() {
                return StepResult::Singular;
            }
            let y = self.duals(&phase);
            let d = self.reduced_costs(&phase, &y);
            let entering = if bland {
                (0..self.ncols()).find(|&j| !self.is_basic[j] && d[j] < -self.opts.opt_tol)
            } else {
                (0..self.ncols())
                    .filter(|&j| !self.is_basic[j] && d[j] < -self.opts.opt_tol)
                    .min_by(|&a, &b| d[a].total_cmp(&d[b]))
            };
            let Some(q) = entering else {
                return StepResult::Optimal;
            };
            let alpha = self.binv.mul_vec(&self.column(q));

            // Harris two-pass ratio test: bound the step with relaxed
            // feasibility, then take the largest pivot within that bound.
            let piv_tol = 1e-9;
            let relax = self.opts.feas_tol;
            let ncols = self.ncols();
            let mut theta_max = f64::INFINITY;
            for i in 0..rows {
                if alpha[i] > piv_tol {
                    theta_max = theta_max.min((self.xb[i].max(0.0) + relax) / alpha[i]);
                }
            }
            if theta_max == f64::INFINITY {
                return StepResult::Unbounded {
                    entering: q,
                    direction: alpha,
                };
            }
            let art = |i: usize| self.basic[i] < ncols;
            let row = (0..rows)
                .filter(|&i| alpha[i] > piv_tol && self.xb[i].max(0.0) / alpha[i] <= theta_max)
                .min_by(|&a, &b| {
                    art(a).cmp(&art(b)).then_with(|| {
                        if bland {
                            let ra = self.xb[a].max(0.0) / alpha[a];
                            let rb = self.xb[b].max(0.0) / alpha[b];
                            ra.total_cmp(&rb).then(self.basic[a].cmp(&self.basic[b]))
                        } else {
                            alpha[b].total_cmp(&alpha[a])
                        }
                    })
                })
                .expect("a candidate row exists");
            let min_ratio = self.xb[row].max(0.0) / alpha[row];

            if min_ratio <= 1e-12 {
                stalled += 1;
                if stalled >= self.opts.bland_after {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
            self.pivot(row, q, &alpha);
        }
    }

    /// Pivots artificials that are basic at level zero out of the basis.
    fn drive_out_artificials(&mut self) -> bool {
        let rows = self.form.num_rows();
        let ncols = self.ncols();
        for r in 0..rows {
            if self.basic[r] < ncols {
                continue;
            }
            let rho: Vec<f64> = self.binv.row(r).to_vec();
            let alpha_r = self.form.m.tr_mul_vec(&rho);
            let cand = (0..ncols)
                .filter(|&j| !self.is_basic[j] && alpha_r[j].abs() > 1e-9)
                .max_by(|&a, &b| alpha_r[a].abs().total_cmp(&alpha_r[b].abs()));
            match cand {
                Some(j) => {
                    let alpha = self.binv.mul_vec(&self.column(j));
                    // Degenerate pivot: force the entering value to zero.
                    self.xb[r] = 0.0;
                    self.pivot(r, j, &alpha);
                }
                None => return false,
            }
        }
        self.art_rows.clear();
        self.is_basic.truncate(ncols);
        self.refactor()
    }

    fn run(mut self) -> SimplexOutcome {
        if !self.art_rows.is_empty() {
            match self.iterate(Phase::One) {
                StepResult::Optimal => {}
                StepResult::IterLimit | StepResult::Singular => return self.finish_limit(),
                StepResult::Unbounded { .. } => unreachable!("phase 1 is bounded below by 0"),
            }
            let infeas: f64 = self
                .basic
                .iter()
                .zip(&self.xb)
                .filter(|(&j, _)| j >= self.ncols())
                .map(|(_, v)| v)
                .sum();
            let scale = 1.0 + self.form.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if infeas > self.opts.feas_tol * scale {
                return self.finish_infeasible();
            }
            if !self.drive_out_artificials() {
                return self.finish_limit();
            }
        }
        self.run_phase2_only()
    }

    fn run_phase2_only(mut self) -> SimplexOutcome {
        match self.iterate(Phase::Two) {
            StepResult::Optimal => {
                if self.since_refactor > 0 && !self.refactor() {
                    return self.finish_limit();
                }
                self.finish_optimal()
            }
            StepResult::Unbounded {
                entering,
                direction,
            } => self.finish_unbounded(entering, &direction),
            StepResult::IterLimit | StepResult::Singular => self.finish_limit(),
        }
    }

    fn basis(&self) -> Basis {
        let ncols = self.ncols();
        Basis {
            basic: self.basic.clone(),
            nonbasic: (0..ncols).filter(|&j| !self.is_basic[j]).collect(),
        }
    }

    fn outcome(&self, status: Status) -> SimplexOutcome {
        SimplexOutcome {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            basis: self.basis(),
            pivots: self.pivots,
            farkas: None,
            ray: None,
            form: self.form.clone(),
            cost: self.cost.clone(),
        }
    }

    fn primal_point(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.ncols()];
        for (&j, &v) in self.basic.iter().zip(&self.xb) {
            if j < self.ncols() {
                w[j] = v;
            }
        }
        self.form.collapse(&w)
    }

    fn finish_optimal(&self) -> SimplexOutcome {
        let y = self.duals(&Phase::Two);
        let mut out = self.outcome(Status::Optimal);
        out.reduced_costs = self.reduced_costs(&Phase::Two, &y);
        out.x = self.primal_point();
        out.objective = self
            .basic
            .iter()
            .zip(&self.xb)
            .map(|(&j, v)| self.cost[j] * v)
            .sum::<f64>()
            + self.form.lp().offset;
        out.duals = y
            .iter()
            .zip(&self.form.row_scale)
            .map(|(yi, s)| (-yi / s).max(0.0))
            .collect();
        out
    }

    fn finish_infeasible(&self) -> SimplexOutcome {
        let y = self.duals(&Phase::One);
        let mut u: Vec<f64> = y
            .iter()
            .zip(&self.form.row_scale)
            .map(|(yi, s)| (-yi / s).max(0.0))
            .collect();
        let top = u.iter().fold(0.0f64, |m, v| m.max(*v));
        if top > 0.0 {
            u.iter_mut().for_each(|v| *v /= top);
        }
        let mut out = self.outcome(Status::Infeasible);
        out.objective = f64::INFINITY;
        out.farkas = Some(FarkasCertificate { u });
        out
    }

    fn finish_unbounded(&self, entering: usize, alpha: &[f64]) -> SimplexOutcome {
        let mut dir = vec![0.0; self.ncols()];
        dir[entering] = 1.0;
        for (&j, a) in self.basic.iter().zip(alpha) {
            if j < self.ncols() {
                dir[j] -= a;
            }
        }
        let mut out = self.outcome(Status::Unbounded);
        out.x = self.primal_point();
        out.objective = f64::NEG_INFINITY;
        out.ray = Some(self.form.collapse(&dir));
        out
    }

    fn finish_limit(&self) -> SimplexOutcome {
        self.outcome(Status::IterLimit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toys;

    fn lp(c: &[f64], rows: &[&[f64]], b: &[f64], nonneg: bool) -> LinearProgram {
        let a = Matrix::from_rows(c.len(), rows);
        LinearProgram::new(c.to_vec(), a, b.to_vec(), nonneg)
    }

    #[test]
    fn single_lower_bound() {
        // min x s.t. x ≥ 3, x ≥ 0
        let out = solve(&lp(&[1.0], &[&[-1.0]], &[-3.0], true));
        assert_eq!(out.status, Status::Optimal);
        assert!((out.x[0] - 3.0).abs() < 1e-12);
        assert!((out.objective - 3.0).abs() < 1e-12);
        assert!((out.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_with_ray() {
        // min −x − y s.t. x − y ≤ 1
        let p = lp(&[-1.0, -1.0], &[&[1.0, -1.0]], &[1.0], true);
        let out = solve(&p);
        assert_eq!(out.status, Status::Unbounded);
        let ray = out.ray.unwrap();
        assert!(dot(&p.c, &ray) < 0.0);
        assert!(p.a.mul_vec(&ray)[0] <= 1e-12);
        assert!(ray.iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn infeasible_with_certificate() {
        // x ≤ 1 and x ≥ 2
        let p = lp(&[1.0], &[&[1.0], &[-1.0]], &[1.0, -2.0], false);
        let out = solve(&p);
        assert_eq!(out.status, Status::Infeasible);
        assert!(out.farkas.unwrap().verify(&p, 1e-8));
    }

    #[test]
    fn zero_row_problems() {
        let bounded = lp(&[1.0, 0.0], &[], &[], true);
        let out = solve(&bounded);
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.objective, 0.0);
        let free = lp(&[1.0], &[], &[], false);
        assert_eq!(solve(&free).status, Status::Unbounded);
    }

    #[test]
    fn zero_row_infeasible() {
        let p = lp(&[1.0], &[&[0.0]], &[-1.0], true);
        let out = solve(&p);
        assert_eq!(out.status, Status::Infeasible);
        assert!(out.farkas.unwrap().verify(&p, 1e-8));
    }

    #[test]
    fn example1_unbounded_at_one() {
        // A1 = 0, D = −A2: at λ = 1 every row collapses to 0 ≤ b2.
        let p = toys::toy1();
        let q = crate::model::ParametricLp {
            a1: Matrix::zeros(0, 2),
            b1: vec![],
            d: p.a2.scaled(-1.0),
            b2: vec![1.0; p.m2()],
            ..p
        };
        let out = solve(&q.instantiate(1.0));
        assert_eq!(out.status, Status::Unbounded);
        let q_neg = crate::model::ParametricLp {
            b2: vec![-1.0; q.m2()],
            ..q
        };
        assert_eq!(solve(&q_neg.instantiate(1.0)).status, Status::Infeasible);
    }

    #[test]
    fn drift_offsets_hand_example() {
        let (lo, hi) = drift_offsets(&[1.0, 2.0], &[-1.0, 0.5], 1e-12);
        assert_eq!(hi, 1.0);
        assert_eq!(lo, -4.0);
    }

    #[test]
    fn zero_drift_gives_whole_line() {
        let out = solve(&toys::toy1().instantiate(0.0));
        let r = reduced_cost_range(&out, &[0.0, 0.0], 0.0);
        assert_eq!(r.lo, f64::NEG_INFINITY);
        assert_eq!(r.hi, f64::INFINITY);
    }

    #[test]
    fn warm_start_same_objective_is_free() {
        let p = toys::toy2().instantiate(0.3);
        let out = solve(&p);
        let again = resolve_with_objective(&out, &p.c).unwrap();
        assert_eq!(again.pivots, 0);
        assert!((again.objective - out.objective).abs() < 1e-12);
        assert_eq!(again.basis, out.basis);
    }

    #[test]
    fn warm_start_rejects_non_optimal() {
        let p = lp(&[1.0], &[&[1.0], &[-1.0]], &[1.0, -2.0], false);
        let out = solve(&p);
        assert_eq!(
            resolve_with_objective(&out, &[1.0]).unwrap_err(),
            SimplexError::NotOptimal(Status::Infeasible)
        );
    }

    #[test]
    fn negated_objective_moves_to_other_vertex() {
        // Unit square: min x + y at (0,0); min −x − y at (1,1).
        let p = lp(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 1.0], true);
        let out = solve(&p);
        assert!((out.objective).abs() < 1e-12);
        let flipped = resolve_with_objective(&out, &[-1.0, -1.0]).unwrap();
        assert_eq!(flipped.status, Status::Optimal);
        assert!((flipped.objective + 2.0).abs() < 1e-12);
        assert!((flipped.x[0] - 1.0).abs() < 1e-12 && (flipped.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let opts = SimplexOptions {
            max_pivots: Some(0),
            ..SimplexOptions::default()
        };
        let out = solve_with(&toys::toy1().instantiate(0.0), &opts);
        assert_eq!(out.status, Status::IterLimit);
    }
}
