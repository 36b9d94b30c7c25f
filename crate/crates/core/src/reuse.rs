//! Reusing one optimal solution: the λ-range on which it stays feasible
//! gives a constant upper bound there.

use thiserror::Error;

use crate::bound::{BoundFunction, Provenance, Segment, Side};
use crate::matrix::dot;
use crate::model::{LambdaInterval, ParametricLp};
use crate::truth::TruthOracle;

const SIGN_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum ReuseError {
    #[error("x* violates P({lambda}) by {violation:e}")]
    Infeasible { lambda: f64, violation: f64 },
}

/// Largest interval around `lambda1` (within the problem's interval) on which
/// `x_star` satisfies every row of `P(λ)`.
pub fn feasibility_interval(
    p: &ParametricLp,
    x_star: &[f64],
    lambda1: f64,
) -> Result<LambdaInterval, ReuseError> {
    let lp = p.instantiate(lambda1);
    let violation = lp.max_violation(x_star);
    if violation > FEAS_TOL * (1.0 + lp.b.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
        return Err(ReuseError::Infeasible { lambda: lambda1, violation });
    }
    let mut lo = p.interval.lo;
    let mut hi = p.interval.hi;
    for i in 0..p.m2() {
        let dx = dot(p.d.row(i), x_star);
        let limit = (p.b2[i] - dot(p.a2.row(i), x_star)) / dx;
        if dx > SIGN_TOL {
            hi = hi.min(limit);
        } else if dx < -SIGN_TOL {
            lo = lo.max(limit);
        }
    }
    // Rounding in the ratios must not push λ1 itself out.
    Ok(LambdaInterval::new(lo.min(lambda1), hi.max(lambda1)))
}

/// Constant bound `f(lambda1)` on the feasibility interval of `x*(lambda1)`,
/// unavailable on the rest of `p.interval`.
pub fn reuse_bound(oracle: &TruthOracle, lambda1: f64) -> BoundFunction {
    let p = oracle.problem();
    let dom = p.interval;
    let prov = Provenance::new("reuse");
    let out = oracle.outcome(lambda1);
    if !out.is_optimal() {
        return BoundFunction::unavailable(Side::Upper, dom, prov)
            .with_note(format!("P({lambda1}) is {:?}", out.status));
    }
    let fi = match feasibility_interval(p, &out.x, lambda1) {
        Ok(fi) => fi.intersect(&dom),
        Err(e) => return BoundFunction::unavailable(Side::Upper, dom, prov).with_note(e.to_string()),
    };
    let mut segments = Vec::new();
    if fi.lo > dom.lo {
        segments.push(Segment::unavailable(dom.lo, fi.lo));
    }
    segments.push(Segment::constant(fi.lo, fi.hi, out.objective));
    if fi.hi < dom.hi {
        segments.push(Segment::unavailable(fi.hi, dom.hi));
    }
    BoundFunction::new(Side::Upper, segments, prov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::toys;

    fn one_row(d: f64) -> ParametricLp {
        ParametricLp::new(
            vec![-1.0],
            Matrix::zeros(0, 1),
            vec![],
            Matrix::from_rows(1, &[[0.0]]),
            vec![4.0],
            Matrix::from_rows(1, &[[d]]),
            LambdaInterval::new(-10.0, 10.0),
            true,
        )
    }

    #[test]
    fn single_ratio_upper_limit() {
        let iv = feasibility_interval(&one_row(2.0), &[1.0], 0.0).unwrap();
        assert_eq!(iv.hi, 2.0);
        assert_eq!(iv.lo, -10.0);
    }

    #[test]
    fn insensitive_solution_keeps_whole_interval() {
        let p = toys::toy1();
        let iv = feasibility_interval(&p, &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(iv, p.interval);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        assert!(matches!(
            feasibility_interval(&one_row(2.0), &[5.0], 1.0),
            Err(ReuseError::Infeasible { .. })
        ));
    }

    #[test]
    fn toy3_matches_feasibility_scan() {
        let p = toys::toy3();
        let oracle = TruthOracle::new(p.clone());
        let x = oracle.outcome(0.0).x.clone();
        let iv = feasibility_interval(&p, &x, 0.0).unwrap();
        let feasible = |l: f64| p.instantiate(l).max_violation(&x) <= 1e-9;
        let mut scan_lo = 0.0;
        while scan_lo - 1e-3 >= p.interval.lo && feasible(scan_lo - 1e-3) {
            scan_lo -= 1e-3;
        }
        let mut scan_hi = 0.0;
        while scan_hi + 1e-3 <= p.interval.hi && feasible(scan_hi + 1e-3) {
            scan_hi += 1e-3;
        }
        assert!((iv.lo - scan_lo).abs() <= 1.01e-3, "{} vs {}", iv.lo, scan_lo);
        assert!((iv.hi - scan_hi).abs() <= 1.01e-3, "{} vs {}", iv.hi, scan_hi);
    }

    #[test]
    fn zero_perturbation_gives_constant_f() {
        let mut p = toys::toy2();
        p.d = Matrix::zeros(p.m2(), 2);
        let p = p.with_lambda_free(true);
        let oracle = TruthOracle::new(p.clone());
        let b = reuse_bound(&oracle, p.interval.lo);
        assert!(b.is_available_everywhere());
        assert_eq!(b.segments.len(), 1);
        assert_eq!(b.value_at(1.0), oracle.value(0.0));
    }

    #[test]
    fn infeasible_anchor_is_unavailable() {
        let mut p = one_row(2.0);
        p.b2 = vec![-1.0];
        let b = reuse_bound(&TruthOracle::new(p), 0.0);
        assert!(b.is_unavailable_everywhere());
    }
}
