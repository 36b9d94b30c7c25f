//! Perturbation sidecar and assembly of a [`ParametricLp`] from a named LP.

use serde::{Deserialize, Serialize};

use crate::io::mps::NamedLp;
use crate::io::IoError;
use crate::matrix::Matrix;
use crate::model::{LambdaInterval, ParametricLp, VarBound};

/// Which rows move with λ, by how much, and over which interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub a2_rows: Vec<String>,
    /// `(row, column, value)` entries of `D`.
    pub d: Vec<(String, String, f64)>,
    pub lambda: [f64; 2],
}

impl PerturbationSpec {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn interval(&self) -> LambdaInterval {
        LambdaInterval::new(self.lambda[0], self.lambda[1])
    }

    /// Every name the spec mentions that `lp` does not define (or that the
    /// spec itself does not list as perturbed).
    pub fn dangling(&self, lp: &NamedLp) -> Vec<String> {
        let mut out = Vec::new();
        let mut note = |s: String| {
            if !out.contains(&s) {
                out.push(s);
            }
        };
        for r in &self.a2_rows {
            if !lp.has_row(r) {
                note(r.clone());
            }
        }
        for (r, c, _) in &self.d {
            if !lp.has_row(r) || !self.a2_rows.contains(r) {
                note(r.clone());
            }
            if lp.column_index(c).is_none() {
                note(c.clone());
            }
        }
        out
    }
}

/// Rows named in the spec (in spec order) form the perturbed block, every
/// other row the fixed block. Problems mixing free and sign-restricted
/// variables get their free variables split.
pub fn assemble(lp: &NamedLp, spec: &PerturbationSpec) -> Result<ParametricLp, IoError> {
    let dangling = spec.dangling(lp);
    if !dangling.is_empty() {
        return Err(IoError::Assembly(dangling));
    }
    let n = lp.lp.num_vars();
    let a2_idx: Vec<usize> = spec
        .a2_rows
        .iter()
        .flat_map(|name| {
            lp.rows
                .iter()
                .enumerate()
                .filter(move |(_, r)| r.constraint_name() == Some(name.as_str()))
                .map(|(i, _)| i)
        })
        .collect();
    let a1_idx: Vec<usize> = (0..lp.rows.len()).filter(|i| !a2_idx.contains(i)).collect();

    let mut d = Matrix::zeros(a2_idx.len(), n);
    for (k, &i) in a2_idx.iter().enumerate() {
        let crate::io::mps::RowOrigin::Constraint { name, sign } = &lp.rows[i] else {
            unreachable!("perturbed rows are constraints");
        };
        for (_, c, v) in spec.d.iter().filter(|(r, _, _)| r == name) {
            let j = lp.column_index(c).expect("checked above");
            d[(k, j)] += sign * v;
        }
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| lp.lp.b[i]).collect::<Vec<_>>();
    let mut p = ParametricLp::new(
        lp.lp.c.clone(),
        lp.lp.a.select_rows(&a1_idx),
        pick(&a1_idx),
        lp.lp.a.select_rows(&a2_idx),
        pick(&a2_idx),
        d,
        spec.interval(),
        true,
    );
    p.offset = lp.lp.offset;
    p.lambda_free = spec.d.iter().all(|t| t.2 == 0.0);

    let free: Vec<usize> = (0..n).filter(|&j| lp.lp.bounds[j] == VarBound::Free).collect();
    if free.len() == n && n > 0 {
        p.nonneg = false;
    } else if !free.is_empty() {
        p = split_columns(p, &free);
    }
    Ok(p)
}

/// Appends a negated copy of each listed column (the negative part).
fn split_columns(p: ParametricLp, cols: &[usize]) -> ParametricLp {
    let extend = |m: &Matrix| {
        let mut extra = Matrix::zeros(m.rows(), cols.len());
        for i in 0..m.rows() {
            for (k, &j) in cols.iter().enumerate() {
                extra[(i, k)] = -m[(i, j)];
            }
        }
        m.hstack(&extra)
    };
    let mut c = p.c.clone();
    c.extend(cols.iter().map(|&j| -p.c[j]));
    ParametricLp {
        c,
        a1: extend(&p.a1),
        a2: extend(&p.a2),
        d: extend(&p.d),
        ..p
    }
}
