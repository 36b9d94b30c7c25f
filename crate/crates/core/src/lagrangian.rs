//! Lower bounds from Lagrangian relaxation of the λ-dependent rows.
//!
//! Multipliers are kept as `μ ≥ 0` entering the objective as
//! `+μᵗ((A2 + λD)x − b2)`; for any such `μ` the relaxed optimum `h(μ, λ)`
//! is at most `f(λ)`.

use serde::{Deserialize, Serialize};

use crate::bound::{BoundFunction, Provenance, Segment, Side};
use crate::matrix::dot;
use crate::model::{LambdaInterval, LinearProgram, ParametricLp};
use crate::simplex::{self, SimplexOutcome, Status};
use crate::truth::TruthOracle;

const MULTIPLIER_TOL: f64 = 1e-9;

/// `min (c + (A2+λD)ᵗμ)ᵗx − μᵗb2 s.t. A1x ≤ b1` (plus sign restrictions).
pub fn relaxation_lp(p: &ParametricLp, mu: &[f64], lambda: f64) -> LinearProgram {
    LinearProgram {
        c: relaxed_objective(p, mu, lambda),
        a: p.a1.clone(),
        b: p.b1.clone(),
        bounds: p.var_bounds(),
        offset: p.offset - dot(mu, &p.b2),
    }
}

fn relaxed_objective(p: &ParametricLp, mu: &[f64], lambda: f64) -> Vec<f64> {
    let base = p.a2.tr_mul_vec(mu);
    let slope = p.d.tr_mul_vec(mu);
    p.c.iter()
        .zip(base.iter().zip(&slope))
        .map(|(c, (a, d))| c + a + lambda * d)
        .collect()
}

pub fn lagrangian_relaxation(p: &ParametricLp, mu: &[f64], lambda: f64) -> SimplexOutcome {
    simplex::solve(&relaxation_lp(p, mu, lambda))
}

/// `h(μ, λ)` with `−∞` for an unbounded relaxation (and for solver failure,
/// which can only make the bound weaker).
pub fn relaxation_value(p: &ParametricLp, mu: &[f64], lambda: f64) -> f64 {
    let out = lagrangian_relaxation(p, mu, lambda);
    match out.status {
        Status::Optimal => out.objective,
        Status::Infeasible => f64::INFINITY,
        Status::Unbounded | Status::IterLimit => f64::NEG_INFINITY,
    }
}

/// Constant lower bound on `iv` from the endpoint multipliers.
pub fn lagrangian_flat(oracle: &TruthOracle, iv: LambdaInterval) -> BoundFunction {
    let p = oracle.problem();
    let prov = Provenance::new("lagrangian-flat");
    let (Some(f_lo), Some(f_hi), Some(mu_lo), Some(mu_hi)) = (
        oracle.value(iv.lo),
        oracle.value(iv.hi),
        oracle.a2_duals(iv.lo),
        oracle.a2_duals(iv.hi),
    ) else {
        return BoundFunction::unavailable(Side::Lower, iv, prov).with_note("P is not optimal at an endpoint");
    };
    let left = f_lo.min(relaxation_value(p, &mu_lo, iv.hi));
    let right = f_hi.min(relaxation_value(p, &mu_hi, iv.lo));
    let value = left.max(right);
    if value.is_finite() {
        BoundFunction::constant(Side::Lower, iv, value, prov)
    } else {
        BoundFunction::unavailable(Side::Lower, iv, prov).with_note("both relaxations unbounded")
    }
}

/// `μ(λ) = μ0 + μ1·λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPolynomial {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
}

impl MultiplierPolynomial {
    pub fn constant(mu: Vec<f64>) -> Self {
        let m = mu.len();
        MultiplierPolynomial {
            mu0: mu,
            mu1: vec![0.0; m],
        }
    }

    /// The line through `(lo, mu_lo)` and `(hi, mu_hi)`.
    pub fn interpolating(iv: LambdaInterval, mu_lo: &[f64], mu_hi: &[f64]) -> Self {
        if iv.width() <= 0.0 {
            return MultiplierPolynomial::constant(mu_lo.to_vec());
        }
        let w = iv.width();
        MultiplierPolynomial {
            mu0: mu_lo
                .iter()
                .zip(mu_hi)
                .map(|(a, b)| (a * iv.hi - b * iv.lo) / w)
                .collect(),
            mu1: mu_lo.iter().zip(mu_hi).map(|(a, b)| (b - a) / w).collect(),
        }
    }

    pub fn at(&self, lambda: f64) -> Vec<f64> {
        self.mu0.iter().zip(&self.mu1).map(|(a, b)| a + lambda * b).collect()
    }

    /// `μ(λ) ≥ 0` on all of `iv` (checked at the ends, where a line attains its minimum).
    pub fn is_nonnegative_on(&self, iv: LambdaInterval) -> bool {
        [iv.lo, iv.hi]
            .iter()
            .all(|&l| self.at(l).iter().all(|&v| v >= -MULTIPLIER_TOL))
    }
}

/// Minimizes (or maximizes) `gᵗx + k` over `{A1x ≤ b1}` for each term.
struct TermSolver<'a> {
    p: &'a ParametricLp,
    warm: Option<SimplexOutcome>,
}

impl TermSolver<'_> {
    fn extremum(&mut self, g: &[f64], k: f64, maximize: bool) -> Option<f64> {
        if g.iter().all(|&v| v == 0.0) {
            return Some(k);
        }
        let obj: Vec<f64> = if maximize { g.iter().map(|v| -v).collect() } else { g.to_vec() };
        let out = match &self.warm {
            Some(prev) => simplex::resolve_with_objective(prev, &obj).ok()?,
            None => {
                let lp = LinearProgram {
                    c: obj,
                    a: self.p.a1.clone(),
                    b: self.p.b1.clone(),
                    bounds: self.p.var_bounds(),
                    offset: 0.0,
                };
                simplex::solve(&lp)
            }
        };
        if !out.is_optimal() {
            return None;
        }
        let v = out.objective;
        self.warm = Some(out);
        Some(if maximize { -v } else { v } + k)
    }
}

/// Lower bound `c0 + c1·λ + c2·λ²` from a degree-1 multiplier, one piece per sign of λ.
pub fn lagrangian_polynomial(p: &ParametricLp, mp: &MultiplierPolynomial, iv: LambdaInterval) -> BoundFunction {
    let prov = Provenance::new("lagrangian-polynomial");
    if !mp.is_nonnegative_on(iv) {
        return BoundFunction::unavailable(Side::Lower, iv, prov).with_note("multiplier turns negative on the interval");
    }
    let g0: Vec<f64> = p.c.iter().zip(p.a2.tr_mul_vec(&mp.mu0)).map(|(c, a)| c + a).collect();
    let k0 = -dot(&mp.mu0, &p.b2);
    let g1: Vec<f64> = p
        .d
        .tr_mul_vec(&mp.mu0)
        .iter()
        .zip(p.a2.tr_mul_vec(&mp.mu1))
        .map(|(d, a)| d + a)
        .collect();
    let k1 = -dot(&mp.mu1, &p.b2);
    let g2 = p.d.tr_mul_vec(&mp.mu1);

    let mut solver = TermSolver { p, warm: None };
    let mut piece = |lo: f64, hi: f64, negative: bool| -> Segment {
        let c0 = solver.extremum(&g0, k0, false);
        let c1 = solver.extremum(&g1, k1, negative);
        let c2 = solver.extremum(&g2, 0.0, false);
        match (c0, c1, c2) {
            (Some(c0), Some(c1), Some(c2)) => Segment::new(lo, hi, Some([c0 + p.offset, c1, c2])),
            _ => Segment::unavailable(lo, hi),
        }
    };
    let segments = if iv.lo < 0.0 && iv.hi > 0.0 {
        vec![piece(iv.lo, 0.0, true), piece(0.0, iv.hi, false)]
    } else {
        vec![piece(iv.lo, iv.hi, iv.hi <= 0.0 && iv.lo < 0.0)]
    };
    BoundFunction::new(Side::Lower, segments, prov)
}

/// Polynomial bound with the constant multiplier of `P(anchor)`.
pub fn lagrangian_line(oracle: &TruthOracle, iv: LambdaInterval, anchor: f64) -> BoundFunction {
    let mut bf = match oracle.a2_duals(anchor) {
        Some(mu) => lagrangian_polynomial(oracle.problem(), &MultiplierPolynomial::constant(mu), iv),
        None => BoundFunction::unavailable(Side::Lower, iv, Provenance::new(""))
            .with_note(format!("P({anchor}) is not optimal")),
    };
    bf.provenance.method = "lagrangian-line".into();
    bf
}

/// Polynomial bound with the multiplier interpolating the endpoint duals.
pub fn lagrangian_quadratic(oracle: &TruthOracle, iv: LambdaInterval) -> BoundFunction {
    let mut bf = match (oracle.a2_duals(iv.lo), oracle.a2_duals(iv.hi)) {
        (Some(a), Some(b)) => lagrangian_polynomial(
            oracle.problem(),
            &MultiplierPolynomial::interpolating(iv, &a, &b),
            iv,
        ),
        _ => BoundFunction::unavailable(Side::Lower, iv, Provenance::new(""))
            .with_note("P is not optimal at an endpoint"),
    };
    bf.provenance.method = "lagrangian-quadratic".into();
    bf
}

const MAX_WALK_STEPS: usize = 10_000;

/// Exact `h(μ*, λ)` on `iv` for the multipliers `μ*` of `P(λ̲)`, as a concave
/// piecewise-linear function.
pub fn lagrangian_envelope(oracle: &TruthOracle, iv: LambdaInterval) -> BoundFunction {
    let p = oracle.problem();
    let prov = Provenance::new("lagrangian-envelope");
    let Some(mu) = oracle.a2_duals(iv.lo) else {
        return BoundFunction::unavailable(Side::Lower, iv, prov).with_note(format!("P({}) is not optimal", iv.lo));
    };
    let mut out = lagrangian_relaxation(p, &mu, iv.lo);
    if !out.is_optimal() {
        return BoundFunction::unavailable(Side::Lower, iv, prov)
            .with_note(format!("relaxation at λ = {} is {:?}", iv.lo, out.status));
    }
    let mut notes = Vec::new();
    let f_lo = oracle.value(iv.lo).expect("optimal above");
    if (out.objective - f_lo).abs() > 1e-6 * (1.0 + f_lo.abs()) {
        notes.push(format!("h(μ*, λ̲) = {:e} differs from f(λ̲) = {f_lo:e}", out.objective));
    }
    let drift = p.d.tr_mul_vec(&mu);

    let eps0 = 1e-6 * iv.width();
    let mut eps = eps0;
    let mut segments: Vec<Segment> = Vec::new();
    let mut cur = iv.lo;
    let mut at = iv.lo;
    let mut prev: Option<(f64, f64)> = None;
    let mut steps = 0;
    loop {
        let c1 = dot(&drift, &out.x);
        let c0 = out.objective - at * c1;
        let range = simplex::reduced_cost_range(&out, &drift, at);
        let start = range.lo.min(at).max(cur);
        if let Some((p0, p1)) = prev {
            if start > cur {
                // Concavity puts h above the chord between two exact points.
                let (ya, yb) = (p0 + p1 * cur, c0 + c1 * start);
                let slope = (yb - ya) / (start - cur);
                segments.push(Segment::linear(cur, start, ya - slope * cur, slope));
            }
        }
        let end = range.hi.max(at).min(iv.hi);
        if end >= iv.hi || eps0 == 0.0 {
            segments.push(Segment::linear(start, iv.hi, c0, c1));
            break;
        }
        if end > start {
            segments.push(Segment::linear(start, end, c0, c1));
        }
        if end <= at {
            eps *= 2.0;
        } else {
            eps = eps0;
        }
        cur = end;
        prev = Some((c0, c1));
        steps += 1;
        at = (end + eps).min(iv.hi);
        let next = if steps >= MAX_WALK_STEPS {
            notes.push("walk step limit reached; chord to λ̄".into());
            at = iv.hi;
            lagrangian_relaxation(p, &mu, at)
        } else {
            simplex::resolve_with_objective(&out, &relaxed_objective(p, &mu, at)).expect("previous outcome is optimal")
        };
        if !next.is_optimal() {
            notes.push(format!("relaxation at λ = {at:e} is {:?}", next.status));
            if end <= start {
                segments.push(Segment::linear(end, end, c0, c1));
            }
            segments.push(Segment::unavailable(cur, iv.hi));
            break;
        }
        out = next;
    }
    let mut bf = BoundFunction::new(Side::Lower, segments, prov);
    bf.provenance.notes = notes;
    bf.coalesced()
}
