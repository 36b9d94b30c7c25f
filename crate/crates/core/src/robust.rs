//! Upper bounds from robust counterparts.
//!
//! A point feasible for every `λ` in the interval bounds `f` from above by
//! its objective (constant bound). An affine family `x(λ) = y + λz` feasible
//! for every `λ` gives the linear bound `cᵗ(y + λz)`; the best such line at
//! each `λ` is traced by walking bases of the affine counterpart.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::{BoundFunction, Provenance, Segment, Side};
use crate::matrix::{dot, Matrix};
use crate::model::{LambdaInterval, LinearProgram, ParametricLp, VarBound};
use crate::simplex::{self, SimplexOutcome, Status};
use crate::truth::TruthOracle;

#[derive(Debug, Error, PartialEq)]
pub enum RobustError {
    #[error("robust counterpart on {0} is unbounded; the problem is ill-posed there")]
    UnboundedCounterpart(LambdaInterval),
}

/// `min cᵗx s.t. A1x ≤ b1, (A2+λ̲D)x ≤ b2, (A2+λ̄D)x ≤ b2`.
pub fn flat_counterpart(p: &ParametricLp, iv: LambdaInterval) -> LinearProgram {
    let a = p
        .a1
        .vstack(&p.perturbed_a2(iv.lo))
        .vstack(&p.perturbed_a2(iv.hi));
    let mut b = p.b1.clone();
    b.extend_from_slice(&p.b2);
    b.extend_from_slice(&p.b2);
    LinearProgram {
        c: p.c.clone(),
        a,
        b,
        bounds: p.var_bounds(),
        offset: p.offset,
    }
}

/// Constant upper bound valid on the whole of `iv`.
pub fn robust_flat(p: &ParametricLp, iv: LambdaInterval) -> Result<BoundFunction, RobustError> {
    let out = simplex::solve(&flat_counterpart(p, iv));
    let prov = Provenance::new("robust-flat");
    match out.status {
        Status::Optimal => Ok(BoundFunction::constant(Side::Upper, iv, out.objective, prov)),
        Status::Infeasible => Ok(BoundFunction::unavailable(Side::Upper, iv, prov)
            .with_note(format!("no constant robust solution on {iv}"))),
        Status::Unbounded => Err(RobustError::UnboundedCounterpart(iv)),
        Status::IterLimit => Ok(BoundFunction::unavailable(Side::Upper, iv, prov)
            .with_note("iteration limit in the constant robust counterpart")),
    }
}

/// `max{q(x1), q(x2), a·x1·x2 + b·(x1+x2)/2 + c}` for `q(x) = ax² + bx + c`,
/// an upper bound on `max q` over `[x1, x2]`.
pub fn quadratic_tangent_bound(a: f64, b: f64, c: f64, x1: f64, x2: f64) -> f64 {
    let q = |x: f64| a * x * x + b * x + c;
    q(x1).max(q(x2)).max(a * x1 * x2 + b * 0.5 * (x1 + x2) + c)
}

/// The affine robust pair behind a linear bound `cᵗ(y + λz)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineSolution {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl AffineSolution {
    /// Splits the `(y, z)` point of an affine-counterpart outcome.
    pub fn from_point(w: &[f64]) -> Self {
        let n = w.len() / 2;
        AffineSolution {
            y: w[..n].to_vec(),
            z: w[n..].to_vec(),
        }
    }

    pub fn at(&self, lambda: f64) -> Vec<f64> {
        self.y.iter().zip(&self.z).map(|(y, z)| y + lambda * z).collect()
    }

    /// `(cᵗy + offset, cᵗz)`
    pub fn line(&self, p: &ParametricLp) -> (f64, f64) {
        (dot(&p.c, &self.y) + p.offset, dot(&p.c, &self.z))
    }
}

/// The affine counterpart over `iv` in the variables `(y, z)`, minimizing
/// `cᵗ(y + objective_lambda·z)`.
pub fn affine_counterpart(p: &ParametricLp, iv: LambdaInterval, objective_lambda: f64) -> LinearProgram {
    let n = p.num_vars();
    let (lo, hi) = (iv.lo, iv.hi);
    let mid = 0.5 * (lo + hi);
    let mut a = Matrix::zeros(0, 2 * n);
    let mut b = Vec::new();
    let mut push = |y: &[f64], z: &[f64], rhs: f64| {
        let mut row = y.to_vec();
        row.extend_from_slice(z);
        a.push_row(&row);
        b.push(rhs);
    };
    let times = |r: &[f64], s: f64| r.iter().map(|v| v * s).collect::<Vec<_>>();
    for l in [lo, hi] {
        for i in 0..p.m1() {
            let r = p.a1.row(i);
            push(r, &times(r, l), p.b1[i]);
        }
    }
    for l in [lo, hi] {
        let a2l = p.perturbed_a2(l);
        for i in 0..p.m2() {
            let r = a2l.row(i);
            push(r, &times(r, l), p.b2[i]);
        }
    }
    for i in 0..p.m2() {
        let (ai, di) = (p.a2.row(i), p.d.row(i));
        let y: Vec<f64> = ai.iter().zip(di).map(|(a, d)| a + mid * d).collect();
        let z: Vec<f64> = ai.iter().zip(di).map(|(a, d)| lo * hi * d + mid * a).collect();
        push(&y, &z, p.b2[i]);
    }
    if p.nonneg {
        for l in [lo, hi] {
            for j in 0..n {
                let mut y = vec![0.0; n];
                let mut z = vec![0.0; n];
                y[j] = -1.0;
                z[j] = -l;
                push(&y, &z, 0.0);
            }
        }
    }
    let mut c = p.c.clone();
    c.extend(p.c.iter().map(|v| v * objective_lambda));
    LinearProgram {
        c,
        a,
        b,
        bounds: vec![VarBound::Free; 2 * n],
        offset: p.offset,
    }
}

pub fn robust_affine_problem(p: &ParametricLp, iv: LambdaInterval, objective_lambda: f64) -> SimplexOutcome {
    simplex::solve(&affine_counterpart(p, iv, objective_lambda))
}

/// How a single line is picked among the affine robust solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AffineStrategy {
    /// Tightest at `λ̲`, then smallest slope.
    LineLeft,
    /// Tightest at `λ̄`, then largest slope.
    LineRight,
    FixedSlope(f64),
    /// Slope of the chord between `f(λ̲)` and `f(λ̄)`.
    FixedSlopePairwise,
    /// Fixed slope 0.
    YzFlat,
}

impl AffineStrategy {
    pub fn name(self) -> &'static str {
        match self {
            AffineStrategy::LineLeft => "robust-line-left",
            AffineStrategy::LineRight => "robust-line-right",
            AffineStrategy::FixedSlope(_) => "robust-fixed-slope",
            AffineStrategy::FixedSlopePairwise => "robust-fixed-slope-pairwise",
            AffineStrategy::YzFlat => "robust-yzflat",
        }
    }
}

fn line_bound(p: &ParametricLp, iv: LambdaInterval, sol: &AffineSolution, prov: Provenance) -> BoundFunction {
    let (c0, c1) = sol.line(p);
    BoundFunction::new(Side::Upper, vec![Segment::linear(iv.lo, iv.hi, c0, c1)], prov)
}

fn objective_row(p: &ParametricLp, y_scale: f64, z_scale: f64) -> Vec<f64> {
    let mut row: Vec<f64> = p.c.iter().map(|v| v * y_scale).collect();
    row.extend(p.c.iter().map(|v| v * z_scale));
    row
}

/// Linear upper bound on `iv` from one affine robust solution.
///
/// `oracle` supplies `f` at the endpoints for the pairwise slope.
pub fn select_affine(oracle: &TruthOracle, iv: LambdaInterval, strategy: AffineStrategy) -> BoundFunction {
    let p = oracle.problem();
    let prov = Provenance::new(strategy.name());
    let unavailable = |note: String| BoundFunction::unavailable(Side::Upper, iv, prov.clone()).with_note(note);
    match strategy {
        AffineStrategy::LineLeft | AffineStrategy::LineRight => {
            let (first, second) = match strategy {
                AffineStrategy::LineLeft => (iv.lo, iv.hi),
                _ => (iv.hi, iv.lo),
            };
            let mut lp = affine_counterpart(p, iv, first);
            let out = simplex::solve(&lp);
            if !out.is_optimal() {
                return unavailable(format!("affine counterpart at λ = {first} is {:?}", out.status));
            }
            let h = out.objective - p.offset;
            lp.a.push_row(&objective_row(p, 1.0, first));
            lp.b.push(h + 1e-9 * (1.0 + h.abs()));
            lp.c = objective_row(p, 1.0, second);
            let refined = simplex::solve(&lp);
            let secondary = match strategy {
                AffineStrategy::LineLeft => "min cᵗz",
                _ => "max cᵗz",
            };
            if refined.is_optimal() {
                line_bound(p, iv, &AffineSolution::from_point(&refined.x), prov)
                    .with_note(format!("secondary objective {secondary}"))
            } else {
                line_bound(p, iv, &AffineSolution::from_point(&out.x), prov)
                    .with_note(format!("slope refinement {:?}; kept first solution", refined.status))
            }
        }
        AffineStrategy::FixedSlope(delta) => fixed_slope(p, iv, delta, prov),
        AffineStrategy::YzFlat => fixed_slope(p, iv, 0.0, prov),
        AffineStrategy::FixedSlopePairwise => {
            let (Some(fl), Some(fh)) = (oracle.value(iv.lo), oracle.value(iv.hi)) else {
                return unavailable("f is not finite at an endpoint".into());
            };
            let delta = if iv.width() > 0.0 {
                (fh - fl) / iv.width()
            } else {
                0.0
            };
            fixed_slope(p, iv, delta, prov).with_note(format!("slope {delta:e}"))
        }
    }
}

fn fixed_slope(p: &ParametricLp, iv: LambdaInterval, delta: f64, prov: Provenance) -> BoundFunction {
    let mut lp = affine_counterpart(p, iv, iv.lo);
    let slack = 1e-9 * (1.0 + delta.abs());
    lp.a.push_row(&objective_row(p, 0.0, 1.0));
    lp.b.push(delta + slack);
    lp.a.push_row(&objective_row(p, 0.0, -1.0));
    lp.b.push(-delta + slack);
    let out = simplex::solve(&lp);
    if out.is_optimal() {
        line_bound(p, iv, &AffineSolution::from_point(&out.x), prov)
    } else {
        BoundFunction::unavailable(Side::Upper, iv, prov)
            .with_note(format!("no affine robust solution with slope {delta:e} ({:?})", out.status))
    }
}

const MAX_WALK_STEPS: usize = 10_000;
const MAX_SPLIT_DEPTH: usize = 4;

/// Pointwise best affine robust bound on `iv`, as a concave piecewise-linear function.
pub fn robust_envelope(p: &ParametricLp, iv: LambdaInterval) -> BoundFunction {
    let mut notes = Vec::new();
    let segments = envelope_walk(p, iv, 0, &mut notes);
    let mut bf = BoundFunction::new(Side::Upper, segments, Provenance::new("robust-envelope"));
    bf.provenance.notes = notes;
    bf.coalesced()
}

fn envelope_walk(p: &ParametricLp, iv: LambdaInterval, depth: usize, notes: &mut Vec<String>) -> Vec<Segment> {
    let mut out = robust_affine_problem(p, iv, iv.lo);
    if !out.is_optimal() {
        notes.push(format!("affine counterpart at λ = {} is {:?}", iv.lo, out.status));
        return vec![Segment::unavailable(iv.lo, iv.hi)];
    }
    let mut drift = vec![0.0; p.num_vars()];
    drift.extend_from_slice(&p.c);

    let eps0 = 1e-6 * iv.width();
    let mut eps = eps0;
    let mut segments: Vec<Segment> = Vec::new();
    let mut cur = iv.lo;
    let mut at = iv.lo;
    let mut stalls = 0;
    for _ in 0..MAX_WALK_STEPS {
        let (c0, c1) = AffineSolution::from_point(&out.x).line(p);
        let range = simplex::reduced_cost_range(&out, &drift, at);
        let end = range.hi.max(at).min(iv.hi);
        if end >= iv.hi || eps0 == 0.0 {
            segments.push(Segment::linear(cur, iv.hi, c0, c1));
            return segments;
        }
        if end > cur {
            segments.push(Segment::linear(cur, end, c0, c1));
        }
        if end <= at {
            stalls += 1;
            eps *= 2.0;
        } else {
            stalls = 0;
            eps = eps0;
        }
        cur = end;
        if stalls >= 2 && depth < MAX_SPLIT_DEPTH {
            notes.push(format!("walk stalled at λ = {cur:e}; split there"));
            segments.extend(envelope_walk(p, LambdaInterval::new(cur, iv.hi), depth + 1, notes));
            return segments;
        }
        at = (end + eps).min(iv.hi);
        let next = simplex::resolve_with_objective(&out, &objective_row(p, 1.0, at))
            .expect("previous outcome is optimal");
        if !next.is_optimal() {
            notes.push(format!(
                "affine counterpart at λ = {at:e} is {:?}; last line extended",
                next.status
            ));
            extend_last(&mut segments, cur, iv.hi, (c0, c1));
            return segments;
        }
        out = next;
    }
    notes.push("walk step limit reached; last line extended".into());
    let (c0, c1) = AffineSolution::from_point(&out.x).line(p);
    extend_last(&mut segments, cur, iv.hi, (c0, c1));
    segments
}

fn extend_last(segments: &mut Vec<Segment>, from: f64, to: f64, line: (f64, f64)) {
    match segments.last_mut() {
        Some(last) => last.hi = to,
        None => segments.push(Segment::linear(from, to, line.0, line.1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toys;

    fn sampled_f(p: &ParametricLp, iv: LambdaInterval) -> Vec<(f64, f64)> {
        let oracle = TruthOracle::new(p.clone());
        (0..100)
            .map(|i| iv.lo + i as f64 / 99.0 * iv.width())
            .filter_map(|l| oracle.value(l).map(|f| (l, f)))
            .collect()
    }

    #[test]
    fn toy4_has_no_constant_robust_solution() {
        let p = toys::toy4();
        let b = robust_flat(&p, p.interval).unwrap();
        assert!(b.is_unavailable_everywhere());
    }

    #[test]
    fn degenerate_interval_gives_f() {
        let p = toys::toy2();
        let iv = LambdaInterval::new(0.7, 0.7);
        let b = robust_flat(&p, iv).unwrap();
        let f = TruthOracle::new(p).value(0.7).unwrap();
        assert!((b.value_at(0.7).unwrap() - f).abs() < 1e-9);
    }

    #[test]
    fn toy1_flat_dominates_samples() {
        let p = toys::toy1();
        let b = robust_flat(&p, p.interval).unwrap();
        let v = b.value_at(0.0).unwrap();
        for (_, f) in sampled_f(&p, p.interval) {
            assert!(v >= f - 1e-6 * (1.0 + f.abs()));
        }
    }

    #[test]
    fn toy4_affine_counterpart_is_feasible() {
        let p = toys::toy4();
        let out = robust_affine_problem(&p, p.interval, p.interval.lo);
        assert_eq!(out.status, Status::Optimal);
        let sol = AffineSolution::from_point(&out.x);
        for i in 0..=40 {
            let l = -2.0 + 0.1 * i as f64;
            assert!(p.instantiate(l).max_violation(&sol.at(l)) <= 1e-7, "violated at {l}");
        }
    }

    #[test]
    fn affine_with_zero_d_on_a_point_is_f() {
        let mut p = toys::toy2();
        p.d = Matrix::zeros(p.m2(), 2);
        let p = p.with_lambda_free(true);
        let out = robust_affine_problem(&p, LambdaInterval::new(0.0, 0.0), 0.0);
        let f = TruthOracle::new(p).value(0.0).unwrap();
        assert!((out.objective - f).abs() < 1e-9);
    }

    #[test]
    fn yzflat_on_toy4_is_available() {
        let oracle = TruthOracle::new(toys::toy4());
        let b = select_affine(&oracle, oracle.problem().interval, AffineStrategy::YzFlat);
        assert!(b.is_available_everywhere());
        assert!(b.segments[0].coeffs.unwrap()[1].abs() < 1e-8);
    }

    #[test]
    fn line_left_is_tight_at_left_end() {
        let p = toys::toy1();
        let oracle = TruthOracle::new(p.clone());
        let b = select_affine(&oracle, p.interval, AffineStrategy::LineLeft);
        let h = robust_affine_problem(&p, p.interval, p.interval.lo).objective;
        assert!((b.value_at(p.interval.lo).unwrap() - h).abs() < 1e-7);
    }

    #[test]
    fn line_left_has_smallest_slope_through_anchor() {
        // Any other feasible line through (λ̲, h) has a slope at least as large:
        // probing slopes just below the chosen one must be infeasible.
        let p = toys::toy1();
        let iv = p.interval;
        let oracle = TruthOracle::new(p.clone());
        let b = select_affine(&oracle, iv, AffineStrategy::LineLeft);
        let slope = b.segments[0].coeffs.unwrap()[1];
        let h = robust_affine_problem(&p, iv, iv.lo).objective;
        let mut probe = affine_counterpart(&p, iv, iv.lo);
        probe.a.push_row(&objective_row(&p, 1.0, iv.lo));
        probe.b.push(h + 1e-9 * (1.0 + h.abs()));
        probe.a.push_row(&objective_row(&p, 0.0, 1.0));
        probe.b.push(slope - 1e-3);
        assert_eq!(simplex::solve(&probe).status, Status::Infeasible);
    }

    #[test]
    fn envelope_zero_d_is_flat_f() {
        let mut p = toys::toy1();
        p.d = Matrix::zeros(p.m2(), 2);
        let p = p.with_lambda_free(true);
        let b = robust_envelope(&p, p.interval);
        assert_eq!(b.segments.len(), 1);
        let f = TruthOracle::new(p.clone()).value(0.0).unwrap();
        let c = b.segments[0].coeffs.unwrap();
        assert!((c[0] - f).abs() < 1e-9 && c[1].abs() < 1e-9);
    }

    #[test]
    fn envelope_is_concave_and_below_lines() {
        for (name, p) in toys::all() {
            let oracle = TruthOracle::new(p.clone());
            let env = robust_envelope(&p, p.interval);
            assert!(env.is_concave_piecewise_linear(1e-9), "{name}");
            for s in [
                AffineStrategy::LineLeft,
                AffineStrategy::LineRight,
                AffineStrategy::YzFlat,
                AffineStrategy::FixedSlopePairwise,
            ] {
                let other = select_affine(&oracle, p.interval, s);
                for i in 0..100 {
                    let l = p.interval.lo + i as f64 / 99.0 * p.interval.width();
                    if let (Some(e), Some(o)) = (env.value_at(l), other.value_at(l)) {
                        assert!(e <= o + 1e-7, "{name} {s:?} at {l}: {e} > {o}");
                    }
                }
            }
        }
    }

    #[test]
    fn toy1_envelope_matches_sampled_affine_bound() {
        let p = toys::toy1();
        let env = robust_envelope(&p, p.interval);
        let sampled_h = |l: f64| robust_affine_problem(&p, p.interval, l).objective;
        for i in 0..=80 {
            let l = -4.0 + 0.1 * i as f64;
            let h = sampled_h(l);
            assert!((env.value_at(l).unwrap() - h).abs() < 1e-6 * (1.0 + h.abs()), "at {l}");
        }
    }

    #[test]
    fn tangent_lemma_examples() {
        assert_eq!(quadratic_tangent_bound(-1.0, 0.0, 0.0, -1.0, 1.0), 1.0);
        assert_eq!(quadratic_tangent_bound(1.0, 0.0, 0.0, 0.0, 2.0), 4.0);
    }
}
