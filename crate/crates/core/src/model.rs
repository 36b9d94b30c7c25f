//! Parametric LP data model.
//!
//! A [`ParametricLp`] describes the family of problems
//!
//! ```text
//! f(λ) = min cᵗx + offset
//!        s.t. A1 x ≤ b1
//!             (A2 + λ D) x ≤ b2
//!             x ≥ 0            (only when `nonneg` is set)
//! ```
//!
//! for λ in a closed interval. Everything downstream consumes this type.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

/// Closed interval of the perturbation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl LambdaInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        LambdaInterval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lo && lambda <= self.hi
    }

    pub fn is_valid(&self) -> bool {
        self.lo <= self.hi
    }

    pub fn intersect(&self, other: &LambdaInterval) -> LambdaInterval {
        LambdaInterval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Uniform split into `n` closed subintervals. Adjacent pieces share the
    /// exact same boundary value and the last piece ends exactly at `hi`.
    pub fn split(&self, n: usize) -> Vec<LambdaInterval> {
        assert!(n > 0, "cannot split into zero pieces");
        let point = |i: usize| {
            if i == n {
                self.hi
            } else {
                self.lo + (i as f64 / n as f64) * self.width()
            }
        };
        (0..n)
            .map(|i| LambdaInterval::new(point(i), point(i + 1)))
            .collect()
    }
}

impl fmt::Display for LambdaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Sign restriction of a variable in a frozen LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarBound {
    NonNegative,
    Free,
}

/// A fixed LP `min cᵗx + offset s.t. A x ≤ b` with per-variable sign restrictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a: Matrix,
    pub b: Vec<f64>,
    pub bounds: Vec<VarBound>,
    pub offset: f64,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>, a: Matrix, b: Vec<f64>, nonneg: bool) -> Self {
        let bound = if nonneg {
            VarBound::NonNegative
        } else {
            VarBound::Free
        };
        let n = c.len();
        LinearProgram {
            c,
            a,
            b,
            bounds: vec![bound; n],
            offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn is_dimensionally_valid(&self) -> bool {
        self.a.cols() == self.c.len()
            && self.a.rows() == self.b.len()
            && self.bounds.len() == self.c.len()
    }

    /// Largest violation of `A x ≤ b` and of the sign restrictions.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .a
            .mul_vec(x)
            .iter()
            .zip(&self.b)
            .map(|(ax, b)| ax - b)
            .fold(0.0f64, f64::max);
        let signs = x
            .iter()
            .zip(&self.bounds)
            .filter(|(_, b)| **b == VarBound::NonNegative)
            .map(|(v, _)| -v)
            .fold(0.0f64, f64::max);
        rows.max(signs)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        crate::matrix::dot(&self.c, x) + self.offset
    }
}

/// The parametric problem family consumed by every bounding method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricLp {
    pub c: Vec<f64>,
    pub a1: Matrix,
    pub b1: Vec<f64>,
    pub a2: Matrix,
    pub b2: Vec<f64>,
    pub d: Matrix,
    pub interval: LambdaInterval,
    /// When set, every variable carries an implicit `x ≥ 0`.
    pub nonneg: bool,
    /// Constant added to every reported objective value.
    #[serde(default)]
    pub offset: f64,
    /// Declares an intentionally unperturbed problem (an all-zero `d` is then legal).
    #[serde(default)]
    pub lambda_free: bool,
}

/// One broken invariant of a [`ParametricLp`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },
    ZeroPerturbation,
    ReversedInterval {
        lo: f64,
        hi: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected {expected}, found {found}"),
            Violation::NonFinite { what, row, col } => {
                write!(f, "{what}: non-finite entry at ({row}, {col})")
            }
            Violation::ZeroPerturbation => {
                write!(f, "d is identically zero but the problem is not declared λ-free")
            }
            Violation::ReversedInterval { lo, hi } => {
                write!(f, "reversed λ interval [{lo}, {hi}]")
            }
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parametric LP: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("dualization needs x ≥ 0 on every variable; split free variables first")]
    NotNonNegative,
}

impl ParametricLp {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: Vec<f64>,
        a1: Matrix,
        b1: Vec<f64>,
        a2: Matrix,
        b2: Vec<f64>,
        d: Matrix,
        interval: LambdaInterval,
        nonneg: bool,
    ) -> Self {
        ParametricLp {
            c,
            a1,
            b1,
            a2,
            b2,
            d,
            interval,
            nonneg,
            offset: 0.0,
            lambda_free: false,
        }
    }

    pub fn with_lambda_free(mut self, free: bool) -> Self {
        self.lambda_free = free;
        self
    }

    pub fn with_interval(mut self, interval: LambdaInterval) -> Self {
        self.interval = interval;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn m1(&self) -> usize {
        self.b1.len()
    }

    pub fn m2(&self) -> usize {
        self.b2.len()
    }

    pub fn var_bounds(&self) -> Vec<VarBound> {
        let b = if self.nonneg {
            VarBound::NonNegative
        } else {
            VarBound::Free
        };
        vec![b; self.num_vars()]
    }

    /// Lists every broken invariant; empty means the problem is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.c.len();
        let mut dim = |what, expected, found| {
            if expected != found {
                out.push(Violation::Dimension {
                    what,
                    expected,
                    found,
                });
            }
        };
        dim("a1 columns", n, self.a1.cols());
        dim("a2 columns", n, self.a2.cols());
        dim("d columns", n, self.d.cols());
        dim("b1 length (rows of a1)", self.a1.rows(), self.b1.len());
        dim("b2 length (rows of a2)", self.a2.rows(), self.b2.len());
        dim("d rows (rows of a2)", self.a2.rows(), self.d.rows());

        for (what, m) in [("a1", &self.a1), ("a2", &self.a2), ("d", &self.d)] {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    if !m[(i, j)].is_finite() {
                        out.push(Violation::NonFinite { what, row: i, col: j });
                    }
                }
            }
        }
        for (what, v) in [("c", &self.c), ("b1", &self.b1), ("b2", &self.b2)] {
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    out.push(Violation::NonFinite { what, row: i, col: 0 });
                }
            }
        }
        if !self.lambda_free && self.d.is_zero() {
            out.push(Violation::ZeroPerturbation);
        }
        if !(self.interval.lo <= self.interval.hi) {
            out.push(Violation::ReversedInterval {
                lo: self.interval.lo,
                hi: self.interval.hi,
            });
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(v))
        }
    }

    /// `A2 + λ D`
    pub fn perturbed_a2(&self, lambda: f64) -> Matrix {
        self.a2.add_scaled(&self.d, lambda)
    }

    /// Freezes λ, returning `min cᵗx s.t. [A1; A2+λD] x ≤ [b1; b2]`.
    pub fn instantiate(&self, lambda: f64) -> LinearProgram {
        let a = self.a1.vstack(&self.perturbed_a2(lambda));
        let mut b = self.b1.clone();
        b.extend_from_slice(&self.b2);
        LinearProgram {
            c: self.c.clone(),
            a,
            b,
            bounds: self.var_bounds(),
            offset: self.offset,
        }
    }

    /// Rewrites free variables as differences of two nonnegative ones.
    /// Column `j` becomes columns `j` (positive part) and `n + j` (negative part).
    /// Problems that already have `nonneg` set are returned unchanged.
    pub fn split_free(&self) -> ParametricLp {
        if self.nonneg {
            return self.clone();
        }
        let neg = |m: &Matrix| m.hstack(&m.scaled(-1.0));
        let mut c = self.c.clone();
        c.extend(self.c.iter().map(|v| -v));
        ParametricLp {
            c,
            a1: neg(&self.a1),
            b1: self.b1.clone(),
            a2: neg(&self.a2),
            b2: self.b2.clone(),
            d: neg(&self.d),
            interval: self.interval,
            nonneg: true,
            offset: self.offset,
            lambda_free: self.lambda_free,
        }
    }

    /// LP dual, rewritten as a minimization in the same parametric shape.
    ///
    /// For `min cᵗx s.t. A(λ)x ≤ b, x ≥ 0` the dual is `max −bᵗu s.t. A(λ)ᵗu ≥ −c, u ≥ 0`,
    /// returned as `min bᵗu s.t. −A(λ)ᵗu ≤ c, u ≥ 0`, whose optimum is `−f(λ)`.
    /// Every dual row depends on λ, so all of them land in the `a2` block.
    pub fn dualize(&self) -> Result<ParametricLp, ModelError> {
        if !self.nonneg {
            return Err(ModelError::NotNonNegative);
        }
        let n = self.num_vars();
        let (m1, m2) = (self.m1(), self.m2());
        let a = self.a1.vstack(&self.a2);
        let a2_dual = a.transpose().scaled(-1.0);
        let mut d_dual = Matrix::zeros(n, m1 + m2);
        for j in 0..n {
            for i in 0..m2 {
                d_dual[(j, m1 + i)] = -self.d[(i, j)];
            }
        }
        let mut c_dual = self.b1.clone();
        c_dual.extend_from_slice(&self.b2);
        Ok(ParametricLp {
            c: c_dual,
            a1: Matrix::zeros(0, m1 + m2),
            b1: Vec::new(),
            a2: a2_dual,
            b2: self.c.clone(),
            d: d_dual,
            interval: self.interval,
            nonneg: true,
            offset: -self.offset,
            lambda_free: self.lambda_free,
        })
    }

    /// Problem whose bounds, negated with sides swapped, bound this one:
    /// free variables are split first when needed.
    pub fn dual_route(&self) -> Result<ParametricLp, ModelError> {
        self.split_free().dualize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toys;

    #[test]
    fn toy3_validates() {
        assert!(toys::toy3().validate().is_empty());
    }

    #[test]
    fn b1_length_mismatch_is_one_violation() {
        let mut p = toys::toy1();
        p.b1.pop();
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Dimension { .. }));
    }

    #[test]
    fn reversed_interval_is_one_violation() {
        let p = toys::toy1().with_interval(LambdaInterval::new(2.0, -2.0));
        assert_eq!(
            p.validate(),
            vec![Violation::ReversedInterval { lo: 2.0, hi: -2.0 }]
        );
    }

    #[test]
    fn zero_d_requires_declaration() {
        let mut p = toys::toy1();
        p.d = Matrix::zeros(p.m2(), p.num_vars());
        assert_eq!(p.validate(), vec![Violation::ZeroPerturbation]);
        assert!(p.with_lambda_free(true).validate().is_empty());
    }

    #[test]
    fn instantiate_toy4_at_zero() {
        let lp = toys::toy4().instantiate(0.0);
        assert_eq!(lp.num_rows(), 4);
        assert_eq!(lp.a.row(2), &[-5.0, -2.0]);
        assert_eq!(lp.a.row(3), &[1.0, 4.0]);
    }

    #[test]
    fn instantiate_toy3_at_one() {
        let p = toys::toy3();
        let lp = p.instantiate(1.0);
        assert_eq!(lp.a.row(p.m1()), &[1.0, -3.0]);
    }

    #[test]
    fn instantiate_is_affine() {
        let p = toys::toy1();
        let (la, lb) = (-1.5, 3.25);
        let mid = p.instantiate(0.5 * (la + lb));
        let (a, b) = (p.instantiate(la), p.instantiate(lb));
        for i in 0..mid.num_rows() {
            for j in 0..mid.num_vars() {
                let avg = 0.5 * (a.a[(i, j)] + b.a[(i, j)]);
                assert_eq!(mid.a[(i, j)], avg);
            }
        }
    }

    #[test]
    fn dualize_requires_nonneg() {
        assert_eq!(toys::toy1().dualize(), Err(ModelError::NotNonNegative));
    }

    #[test]
    fn dual_shape() {
        let p = toys::toy1().split_free();
        let q = p.dualize().unwrap();
        assert_eq!(q.m1(), 0);
        assert_eq!(q.m2(), p.num_vars());
        assert_eq!(q.num_vars(), p.m1() + p.m2());
        assert!(q.validate().is_empty());
    }

    #[test]
    fn split_preserves_perturbation_zero_pattern() {
        let p = toys::toy2().split_free();
        let n = p.num_vars() / 2;
        for i in 0..p.m2() {
            for j in 0..n {
                assert_eq!(p.d[(i, j)], -p.d[(i, n + j)]);
            }
        }
    }

    #[test]
    fn uniform_split_is_exact_at_the_ends() {
        let iv = LambdaInterval::new(-4.0, 4.0);
        let parts = iv.split(10);
        assert_eq!(parts[0].lo, -4.0);
        assert_eq!(parts[9].hi, 4.0);
        for w in parts.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }
}
