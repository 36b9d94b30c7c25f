//! Side-tagged piecewise polynomial bounds of degree ≤ 2 in λ.
//!
//! A shared boundary belongs to the segment on its left.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::LambdaInterval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lower" => Ok(Side::Lower),
            "upper" => Ok(Side::Upper),
            other => Err(format!("unknown side '{other}' (expected lower or upper)")),
        }
    }
}

/// `c0 + c1·λ + c2·λ²` on `[lo, hi]`, or unavailable there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Option<[f64; 3]>,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, coeffs: Option<[f64; 3]>) -> Self {
        Segment { lo, hi, coeffs }
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Self {
        Segment::new(lo, hi, Some([value, 0.0, 0.0]))
    }

    pub fn linear(lo: f64, hi: f64, c0: f64, c1: f64) -> Self {
        Segment::new(lo, hi, Some([c0, c1, 0.0]))
    }

    pub fn unavailable(lo: f64, hi: f64) -> Self {
        Segment::new(lo, hi, None)
    }

    pub fn is_available(&self) -> bool {
        self.coeffs.is_some()
    }

    pub fn interval(&self) -> LambdaInterval {
        LambdaInterval::new(self.lo, self.hi)
    }

    pub fn value(&self, lambda: f64) -> Option<f64> {
        self.coeffs.map(|c| poly(&c, lambda))
    }
}

pub fn poly(c: &[f64; 3], lambda: f64) -> f64 {
    c[0] + lambda * (c[1] + lambda * c[2])
}

/// Which problem a bound was computed on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    #[default]
    Primal,
    /// Computed on the dual problem and mapped back with `−bound`.
    Dual,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub splits: usize,
    pub route: Route,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(method: impl Into<String>) -> Self {
        Provenance {
            method: method.into(),
            splits: 1,
            route: Route::Primal,
            notes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFunction {
    pub side: Side,
    pub segments: Vec<Segment>,
    pub provenance: Provenance,
}

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("λ = {lambda} lies outside the bound's domain [{lo}, {hi}]")]
    Domain { lambda: f64, lo: f64, hi: f64 },
    #[error("cannot merge an empty list of bounds")]
    EmptyMerge,
    #[error("cannot merge a {0} bound with a {1} bound")]
    SideMismatch(Side, Side),
    #[error("pieces do not tile: one ends at {left_hi}, the next starts at {right_lo}")]
    NotAdjacent { left_hi: f64, right_lo: f64 },
}

fn domain_tol(lo: f64, hi: f64) -> f64 {
    1e-12 * (1.0 + lo.abs().max(hi.abs()))
}

impl BoundFunction {
    pub fn new(side: Side, segments: Vec<Segment>, provenance: Provenance) -> Self {
        BoundFunction {
            side,
            segments,
            provenance,
        }
    }

    pub fn constant(side: Side, iv: LambdaInterval, value: f64, provenance: Provenance) -> Self {
        BoundFunction::new(side, vec![Segment::constant(iv.lo, iv.hi, value)], provenance)
    }

    pub fn unavailable(side: Side, iv: LambdaInterval, provenance: Provenance) -> Self {
        BoundFunction::new(side, vec![Segment::unavailable(iv.lo, iv.hi)], provenance)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.provenance.notes.push(note.into());
        self
    }

    pub fn domain(&self) -> Option<LambdaInterval> {
        Some(LambdaInterval::new(
            self.segments.first()?.lo,
            self.segments.last()?.hi,
        ))
    }

    /// Segment covering `lambda` under the left-closed convention.
    pub fn segment_at(&self, lambda: f64) -> Result<&Segment, BoundError> {
        let dom = self.domain().ok_or(BoundError::Domain {
            lambda,
            lo: f64::NAN,
            hi: f64::NAN,
        })?;
        let tol = domain_tol(dom.lo, dom.hi);
        if !(lambda >= dom.lo - tol && lambda <= dom.hi + tol) {
            return Err(BoundError::Domain {
                lambda,
                lo: dom.lo,
                hi: dom.hi,
            });
        }
        Ok(self
            .segments
            .iter()
            .find(|s| lambda <= s.hi)
            .unwrap_or_else(|| self.segments.last().expect("non-empty")))
    }

    /// `Ok(None)` means unavailable at `lambda`.
    pub fn evaluate(&self, lambda: f64) -> Result<Option<f64>, BoundError> {
        Ok(self.segment_at(lambda)?.value(lambda))
    }

    /// Like [`evaluate`](Self::evaluate) but treats out-of-domain as unavailable.
    pub fn value_at(&self, lambda: f64) -> Option<f64> {
        self.evaluate(lambda).ok().flatten()
    }

    pub fn is_available_everywhere(&self) -> bool {
        self.segments.iter().all(Segment::is_available)
    }

    pub fn is_unavailable_everywhere(&self) -> bool {
        !self.segments.iter().any(Segment::is_available)
    }

    /// The opposite-side bound of the negated function.
    pub fn negated(mut self) -> Self {
        self.side = self.side.flipped();
        for s in &mut self.segments {
            if let Some(c) = &mut s.coeffs {
                for v in c.iter_mut() {
                    *v = -*v;
                }
            }
        }
        self
    }

    /// Joins neighbouring segments that carry identical coefficients.
    pub fn coalesced(mut self) -> Self {
        let mut out: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for s in self.segments {
            match out.last_mut() {
                Some(last) if last.coeffs == s.coeffs => last.hi = s.hi,
                _ => out.push(s),
            }
        }
        self.segments = out;
        self
    }

    /// Concatenates bounds over adjacent subintervals.
    pub fn merge(parts: Vec<BoundFunction>) -> Result<BoundFunction, BoundError> {
        let n = parts.len();
        let mut it = parts.into_iter();
        let mut out = it.next().ok_or(BoundError::EmptyMerge)?;
        for part in it {
            if part.side != out.side {
                return Err(BoundError::SideMismatch(out.side, part.side));
            }
            if let (Some(l), Some(r)) = (out.domain(), part.domain()) {
                if (l.hi - r.lo).abs() > domain_tol(l.hi, r.lo) {
                    return Err(BoundError::NotAdjacent {
                        left_hi: l.hi,
                        right_lo: r.lo,
                    });
                }
            }
            out.segments.extend(part.segments);
            for note in part.provenance.notes {
                if !out.provenance.notes.contains(&note) {
                    out.provenance.notes.push(note);
                }
            }
        }
        out.provenance.splits = n;
        Ok(out)
    }

    /// Whether consecutive available pieces are linear with non-increasing slopes.
    pub fn is_concave_piecewise_linear(&self, tol: f64) -> bool {
        let pieces: Vec<[f64; 3]> = self.segments.iter().filter_map(|s| s.coeffs).collect();
        pieces.iter().all(|c| c[2] == 0.0) && pieces.windows(2).all(|w| w[1][1] <= w[0][1] + tol)
    }
}

/// Largest `ub(λ) − lb(λ)` over `iv`, as `(λ*, gap)`; the leftmost maximizer wins.
///
/// The gap is `+∞` as soon as either side is unavailable somewhere on `iv`.
pub fn max_gap(ub: &BoundFunction, lb: &BoundFunction, iv: LambdaInterval) -> (f64, f64) {
    let tol = domain_tol(iv.lo, iv.hi);
    let touches = |s: &Segment| {
        if iv.width() > tol {
            s.hi > iv.lo + tol && s.lo < iv.hi - tol
        } else {
            s.lo <= iv.lo + tol && s.hi >= iv.lo - tol
        }
    };
    let unavailable = |bf: &BoundFunction| {
        bf.segments.iter().any(|s| touches(s) && !s.is_available())
            || bf.domain().is_none_or(|d| d.lo > iv.lo + tol || d.hi < iv.hi - tol)
    };
    if unavailable(ub) || unavailable(lb) {
        return (iv.lo, f64::INFINITY);
    }

    let mut cuts: Vec<f64> = vec![iv.lo, iv.hi];
    for s in ub.segments.iter().chain(&lb.segments) {
        for p in [s.lo, s.hi] {
            if p > iv.lo && p < iv.hi {
                cuts.push(p);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut best = (iv.lo, f64::NEG_INFINITY);
    let mut consider = |lambda: f64, gap: f64| {
        if gap > best.1 {
            best = (lambda, gap);
        }
    };
    if cuts.len() == 1 || iv.width() <= tol {
        let gap = ub.value_at(iv.lo).unwrap_or(f64::INFINITY) - lb.value_at(iv.lo).unwrap_or(f64::NEG_INFINITY);
        return (iv.lo, gap);
    }
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let (Ok(su), Ok(sl)) = (ub.segment_at(mid), lb.segment_at(mid)) else {
            return (iv.lo, f64::INFINITY);
        };
        let (Some(cu), Some(cl)) = (su.coeffs, sl.coeffs) else {
            return (iv.lo, f64::INFINITY);
        };
        let diff = [cu[0] - cl[0], cu[1] - cl[1], cu[2] - cl[2]];
        consider(a, poly(&diff, a));
        if diff[2] != 0.0 {
            let t = -diff[1] / (2.0 * diff[2]);
            if t > a && t < b {
                consider(t, poly(&diff, t));
            }
        }
        consider(b, poly(&diff, b));
    }
    best
}
