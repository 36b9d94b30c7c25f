//! Method registry, side routing through the dual, and interval splitting.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::{BoundError, BoundFunction, Route, Side};
use crate::exec::Execution;
use crate::lagrangian;
use crate::model::{LambdaInterval, ModelError, ParametricLp};
use crate::reuse;
use crate::robust::{self, AffineStrategy, RobustError};
use crate::truth::TruthOracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Reuse,
    RobustFlat,
    RobustLineLeft,
    RobustLineRight,
    RobustYzflat,
    RobustFixedSlopePairwise,
    RobustEnvelope,
    LagrangianFlat,
    LagrangianLine,
    LagrangianQuadratic,
    LagrangianEnvelope,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Reuse,
        Method::RobustFlat,
        Method::RobustLineLeft,
        Method::RobustLineRight,
        Method::RobustYzflat,
        Method::RobustFixedSlopePairwise,
        Method::RobustEnvelope,
        Method::LagrangianFlat,
        Method::LagrangianLine,
        Method::LagrangianQuadratic,
        Method::LagrangianEnvelope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Reuse => "reuse",
            Method::RobustFlat => "robust-flat",
            Method::RobustLineLeft => "robust-line-left",
            Method::RobustLineRight => "robust-line-right",
            Method::RobustYzflat => "robust-yzflat",
            Method::RobustFixedSlopePairwise => "robust-fixed-slope-pairwise",
            Method::RobustEnvelope => "robust-envelope",
            Method::LagrangianFlat => "lagrangian-flat",
            Method::LagrangianLine => "lagrangian-line",
            Method::LagrangianQuadratic => "lagrangian-quadratic",
            Method::LagrangianEnvelope => "lagrangian-envelope",
        }
    }

    /// The side the method produces on the problem itself.
    pub fn native_side(self) -> Side {
        match self {
            Method::LagrangianFlat
            | Method::LagrangianLine
            | Method::LagrangianQuadratic
            | Method::LagrangianEnvelope => Side::Lower,
            _ => Side::Upper,
        }
    }

    pub fn is_robust(self) -> bool {
        self.name().starts_with("robust")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = MethodError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MethodError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MethodError {
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("interval {0} is not inside the problem's interval")]
    OutsideInterval(LambdaInterval),
    #[error("number of splits must be positive")]
    ZeroSplits,
}

/// A problem with its memoized truth solves, plus the same for its dual.
#[derive(Debug)]
pub struct BoundContext {
    primal: TruthOracle,
    dual: OnceLock<Result<TruthOracle, ModelError>>,
}

impl BoundContext {
    pub fn new(problem: ParametricLp) -> Result<Self, ModelError> {
        problem.ensure_valid()?;
        Ok(BoundContext {
            primal: TruthOracle::new(problem),
            dual: OnceLock::new(),
        })
    }

    pub fn problem(&self) -> &ParametricLp {
        self.primal.problem()
    }

    pub fn truth(&self) -> &TruthOracle {
        &self.primal
    }

    fn dual(&self) -> Result<&TruthOracle, ModelError> {
        self.dual
            .get_or_init(|| self.problem().dual_route().map(TruthOracle::new))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `method` on one subinterval, delivered on `side`.
    pub fn bound_on(&self, method: Method, side: Side, iv: LambdaInterval) -> Result<BoundFunction, MethodError> {
        let whole = self.problem().interval;
        let tol = 1e-12 * (1.0 + whole.lo.abs().max(whole.hi.abs()));
        if !iv.is_valid() || iv.lo < whole.lo - tol || iv.hi > whole.hi + tol {
            return Err(MethodError::OutsideInterval(iv));
        }
        if side == method.native_side() {
            Ok(native(&self.primal, method, iv))
        } else {
            let mut bf = native(self.dual()?, method, iv).negated();
            bf.provenance.route = Route::Dual;
            Ok(bf)
        }
    }

    /// `method` on `n` uniform subintervals of the problem's interval, merged.
    pub fn bound(&self, method: Method, side: Side, n: usize, exec: Execution) -> Result<BoundFunction, MethodError> {
        if n == 0 {
            return Err(MethodError::ZeroSplits);
        }
        let parts = self.problem().interval.split(n);
        let pieces = exec.map(&parts, |iv| self.bound_on(method, side, *iv));
        let pieces = pieces.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(BoundFunction::merge(pieces)?)
    }
}

fn native(oracle: &TruthOracle, method: Method, iv: LambdaInterval) -> BoundFunction {
    let p = oracle.problem();
    let mut bf = match method {
        Method::Reuse => reuse::reuse_bound(&oracle_on(oracle, iv), iv.lo),
        Method::RobustFlat => match robust::robust_flat(p, iv) {
            Ok(b) => b,
            Err(e @ RobustError::UnboundedCounterpart(_)) => {
                BoundFunction::unavailable(Side::Upper, iv, Default::default()).with_note(e.to_string())
            }
        },
        Method::RobustLineLeft => robust::select_affine(oracle, iv, AffineStrategy::LineLeft),
        Method::RobustLineRight => robust::select_affine(oracle, iv, AffineStrategy::LineRight),
        Method::RobustYzflat => robust::select_affine(oracle, iv, AffineStrategy::YzFlat),
        Method::RobustFixedSlopePairwise => robust::select_affine(oracle, iv, AffineStrategy::FixedSlopePairwise),
        Method::RobustEnvelope => robust::robust_envelope(p, iv),
        Method::LagrangianFlat => lagrangian::lagrangian_flat(oracle, iv),
        Method::LagrangianLine => lagrangian::lagrangian_line(oracle, iv, iv.lo),
        Method::LagrangianQuadratic => lagrangian::lagrangian_quadratic(oracle, iv),
        Method::LagrangianEnvelope => lagrangian::lagrangian_envelope(oracle, iv),
    };
    bf.provenance.method = method.name().to_string();
    bf
}

/// Reuse clips its feasibility interval to the problem's interval, so it
/// needs an oracle whose problem carries the subinterval.
fn oracle_on(oracle: &TruthOracle, iv: LambdaInterval) -> TruthOracle {
    let sub = TruthOracle::new(oracle.problem().clone().with_interval(iv));
    // Share the one solve reuse needs.
    sub.seed(iv.lo, oracle.outcome(iv.lo));
    sub
}

/// One-shot convenience: validate, split into `n`, compute and merge.
pub fn compute_bound(
    p: &ParametricLp,
    method: Method,
    side: Side,
    n: usize,
    exec: Execution,
) -> Result<BoundFunction, MethodError> {
    BoundContext::new(p.clone())?.bound(method, side, n, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toys;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("robust-round".parse::<Method>(), Err(MethodError::UnknownMethod(_))));
    }

    #[test]
    fn eleven_methods_with_native_sides() {
        assert_eq!(Method::ALL.len(), 11);
        assert_eq!(Method::ALL.iter().filter(|m| m.native_side() == Side::Lower).count(), 4);
    }

    #[test]
    fn dual_route_is_recorded() {
        let ctx = BoundContext::new(toys::toy2()).unwrap();
        let b = ctx.bound(Method::RobustFlat, Side::Lower, 1, Execution::Sequential).unwrap();
        assert_eq!(b.side, Side::Lower);
        assert_eq!(b.provenance.route, Route::Dual);
        let u = ctx.bound(Method::RobustFlat, Side::Upper, 1, Execution::Sequential).unwrap();
        assert_eq!(u.provenance.route, Route::Primal);
    }

    #[test]
    fn splits_tile_the_interval() {
        let ctx = BoundContext::new(toys::toy1()).unwrap();
        let b = ctx.bound(Method::RobustYzflat, Side::Upper, 5, Execution::Parallel).unwrap();
        assert_eq!(b.provenance.splits, 5);
        assert_eq!(b.domain().unwrap(), ctx.problem().interval);
    }

    #[test]
    fn parallel_equals_sequential() {
        let ctx = BoundContext::new(toys::toy3()).unwrap();
        for m in [Method::RobustEnvelope, Method::LagrangianQuadratic] {
            let a = ctx.bound(m, Side::Upper, 10, Execution::Sequential).unwrap();
            let b = ctx.bound(m, Side::Upper, 10, Execution::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn toy1_lower_envelope_has_several_pieces() {
        let ctx = BoundContext::new(toys::toy1()).unwrap();
        let b = ctx.bound(Method::RobustEnvelope, Side::Lower, 1, Execution::Sequential).unwrap();
        assert!(b.segments.len() >= 2);
    }

    #[test]
    fn invalid_problem_is_rejected() {
        let mut p = toys::toy1();
        p.b2.pop();
        assert!(matches!(BoundContext::new(p), Err(ModelError::Invalid(_))));
    }
}
