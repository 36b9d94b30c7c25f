//! The four two-variable illustrative problems, plus their bundled MPS and
//! perturbation fixtures. All four have free variables.

use crate::matrix::Matrix;
use crate::model::{LambdaInterval, ParametricLp};

#[allow(clippy::too_many_arguments)]
fn build(
    c: [f64; 2],
    a1: &[[f64; 2]],
    b1: &[f64],
    a2: &[[f64; 2]],
    d: &[[f64; 2]],
    b2: &[f64],
    lo: f64,
    hi: f64,
) -> ParametricLp {
    ParametricLp::new(
        c.to_vec(),
        Matrix::from_rows(2, a1),
        b1.to_vec(),
        Matrix::from_rows(2, a2),
        b2.to_vec(),
        Matrix::from_rows(2, d),
        LambdaInterval::new(lo, hi),
        false,
    )
}

pub fn toy1() -> ParametricLp {
    build(
        [-1.0, 2.0],
        &[
            [-2.0, -1.0],
            [1.0, 2.0],
            [-1.0, 1.0],
            [1.0, -1.0],
            [1.0, -3.0],
            [2.0, 0.0],
        ],
        &[3.0, 0.0, 2.0, 1.0, 1.0, 3.0],
        &[
            [3.0, -1.0],
            [-3.0, 1.0],
            [-2.0, 1.0],
            [2.0, -1.0],
            [-1.0, -2.0],
            [-1.0, -3.0],
        ],
        &[
            [3.0, 3.0],
            [3.0, -2.0],
            [2.0, 3.0],
            [2.0, -1.0],
            [-2.0, 1.0],
            [0.0, -2.0],
        ],
        &[0.0, 0.0, 0.0, 3.0, 3.0, 1.0],
        -4.0,
        4.0,
    )
}

pub fn toy2() -> ParametricLp {
    build(
        [0.0, 1.0],
        &[
            [-2.0, 0.0],
            [2.0, 2.0],
            [-1.0, 0.0],
            [-1.0, -1.0],
            [0.0, 1.0],
            [-3.0, -2.0],
        ],
        &[1.0, 2.0, 2.0, 3.0, 3.0, 1.0],
        &[
            [2.0, 3.0],
            [0.0, 1.0],
            [1.0, -3.0],
            [0.0, -3.0],
            [3.0, 0.0],
            [-2.0, 3.0],
        ],
        &[
            [3.0, 3.0],
            [0.0, 2.0],
            [-2.0, -1.0],
            [2.0, 1.0],
            [2.0, 0.0],
            [2.0, 2.0],
        ],
        &[3.0, 1.0, 2.0, 3.0, 3.0, 1.0],
        -4.0,
        4.0,
    )
}

pub fn toy3() -> ParametricLp {
    build(
        [2.0, -2.0],
        &[[-2.0, 2.0], [-1.0, 0.0]],
        &[4.0, 1.0],
        &[[2.0, 1.0], [-2.0, -3.0], [2.0, 2.0], [-1.0, -4.0]],
        &[[-1.0, -4.0], [0.0, 4.0], [-4.0, -3.0], [2.0, 4.0]],
        &[4.0, 2.0, 0.0, 2.0],
        -10.0,
        9.0,
    )
}

/// The conflicting-constraints example, with both λ-independent rows.
pub fn toy4() -> ParametricLp {
    build(
        [-2.0, -2.0],
        &[[3.0, 1.0], [0.0, -1.0]],
        &[3.0, 3.0],
        &[[-5.0, -2.0], [1.0, 4.0]],
        &[[-3.0, -2.0], [-3.0, 0.0]],
        &[0.0, -3.0],
        -2.0,
        2.0,
    )
}

/// `(name, problem)` for all four toys, in order.
pub fn all() -> Vec<(&'static str, ParametricLp)> {
    vec![
        ("toy1", toy1()),
        ("toy2", toy2()),
        ("toy3", toy3()),
        ("toy4", toy4()),
    ]
}

/// Bundled `(mps, perturbation json)` text for a toy, by name.
pub fn fixture(name: &str) -> Option<(&'static str, &'static str)> {
    Some(match name {
        "toy1" => (
            include_str!("../fixtures/toys/toy1.mps"),
            include_str!("../fixtures/toys/toy1.perturb.json"),
        ),
        "toy2" => (
            include_str!("../fixtures/toys/toy2.mps"),
            include_str!("../fixtures/toys/toy2.perturb.json"),
        ),
        "toy3" => (
            include_str!("../fixtures/toys/toy3.mps"),
            include_str!("../fixtures/toys/toy3.perturb.json"),
        ),
        "toy4" => (
            include_str!("../fixtures/toys/toy4.mps"),
            include_str!("../fixtures/toys/toy4.perturb.json"),
        ),
        _ => return None,
    })
}

/// The six-row robust counterpart of toy 4 over [−2, 2], written out with
/// the right-hand sides in the order they are printed alongside the
/// infeasibility witness `u = [2, 0, 0, 7, 5, 0]`.
pub fn toy4_printed_counterpart() -> (Matrix, Vec<f64>) {
    (
        Matrix::from_rows(
            2,
            &[
                [3.0, 1.0],
                [0.0, -1.0],
                [1.0, 2.0],
                [7.0, 4.0],
                [-11.0, -6.0],
                [-5.0, 4.0],
            ],
        ),
        vec![3.0, 3.0, 0.0, 0.0, -3.0, -3.0],
    )
}
