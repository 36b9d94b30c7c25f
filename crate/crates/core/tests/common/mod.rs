//! Brute-force reference solver: enumerate every vertex of the polyhedron
//! cut down by a large box, and compare two box sizes to detect unboundedness.

#![allow(dead_code)]

use lpbound::ParametricLp;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

impl Reference {
    /// `+∞` infeasible, `−∞` unbounded.
    pub fn extended(self) -> f64 {
        match self {
            Reference::Optimal(v) => v,
            Reference::Infeasible => f64::INFINITY,
            Reference::Unbounded => f64::NEG_INFINITY,
        }
    }
}

const SMALL_BOX: f64 = 1e6;
const LARGE_BOX: f64 = 1e7;

/// `min cᵗx s.t. Ax ≤ b` (and `x ≥ 0` when `nonneg`).
pub fn brute_force(c: &[f64], a: &[Vec<f64>], b: &[f64], nonneg: bool) -> Reference {
    let small = boxed_min(c, a, b, nonneg, SMALL_BOX);
    let large = boxed_min(c, a, b, nonneg, LARGE_BOX);
    match (small, large) {
        (None, None) => Reference::Infeasible,
        (Some(s), Some(l)) if l < s - 1e-6 * (1.0 + s.abs()) => Reference::Unbounded,
        (Some(s), Some(_)) => Reference::Optimal(s),
        (None, Some(_)) => Reference::Unbounded,
        (Some(s), None) => Reference::Optimal(s),
    }
}

/// `f(λ)` of a parametric problem, assembled row by row from its fields.
pub fn parametric_value(p: &ParametricLp, lambda: f64) -> Reference {
    let n = p.num_vars();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..p.m1() {
        rows.push((0..n).map(|j| p.a1[(i, j)]).collect());
        rhs.push(p.b1[i]);
    }
    for i in 0..p.m2() {
        rows.push((0..n).map(|j| p.a2[(i, j)] + lambda * p.d[(i, j)]).collect());
        rhs.push(p.b2[i]);
    }
    match brute_force(&p.c, &rows, &rhs, p.nonneg) {
        Reference::Optimal(v) => Reference::Optimal(v + p.offset),
        other => other,
    }
}

fn boxed_min(c: &[f64], a: &[Vec<f64>], b: &[f64], nonneg: bool, m: f64) -> Option<f64> {
    let n = c.len();
    let mut rows: Vec<Vec<f64>> = a.to_vec();
    let mut rhs: Vec<f64> = b.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push(e.clone());
        rhs.push(m);
        e[j] = -1.0;
        rows.push(e);
        rhs.push(if nonneg { 0.0 } else { m });
    }
    let feasible = |x: &[f64]| {
        rows.iter().zip(&rhs).all(|(r, &bi)| {
            let lhs: f64 = r.iter().zip(x).map(|(a, x)| a * x).sum();
            let mag: f64 = r.iter().zip(x).map(|(a, x)| (a * x).abs()).sum();
            lhs <= bi + 1e-9 * (1.0 + bi.abs() + mag)
        })
    };
    let mut best: Option<f64> = None;
    for_each_subset(rows.len(), n, |idx| {
        let sys: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let r: Vec<f64> = idx.iter().map(|&i| rhs[i]).collect();
        if let Some(x) = solve_square(sys, r) {
            if feasible(&x) {
                let v: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

fn for_each_subset(total: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > total {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < total - k + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when (nearly) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                let (top, rest) = a.split_at_mut(i);
                for (x, p) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * p;
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// The 100 benchmark sample points of an interval.
pub fn samples(lo: f64, hi: f64) -> Vec<f64> {
    (0..100).map(|i| if i == 99 { hi } else { lo + i as f64 / 99.0 * (hi - lo) }).collect()
}

#[test]
fn subsets_are_complete() {
    let mut count = 0;
    for_each_subset(6, 3, |_| count += 1);
    assert_eq!(count, 20);
}

#[test]
fn square_solve() {
    let x = solve_square(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
    assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    assert!(solve_square(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
}

#[test]
fn reference_statuses() {
    let unit = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    assert_eq!(brute_force(&[1.0, 1.0], &unit, &[1.0, 1.0], true), Reference::Optimal(0.0));
    assert_eq!(brute_force(&[-1.0, -1.0], &unit, &[1.0, 1.0], true), Reference::Optimal(-2.0));
    assert_eq!(brute_force(&[1.0, 1.0], &unit, &[1.0, 1.0], false), Reference::Unbounded);
    assert_eq!(brute_force(&[1.0, 0.0], &[vec![1.0, 0.0]], &[-1.0], true), Reference::Infeasible);
}
