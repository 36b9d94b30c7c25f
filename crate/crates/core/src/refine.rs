//! Anytime refinement: repeatedly bisect the subinterval with the widest
//! gap between a lower and an upper bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::{max_gap, BoundFunction, Side};
use crate::exec::Execution;
use crate::methods::{BoundContext, Method, MethodError};
use crate::model::LambdaInterval;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    /// Subintervals this narrow get a truth point instead of a bisection.
    pub epsilon_lambda: f64,
    pub time_limit: Duration,
    pub lower_method: Method,
    pub upper_method: Method,
    /// Retire subintervals whose gap is at most this; `None` never retires on gap.
    pub target_gap: Option<f64>,
    pub max_iterations: Option<usize>,
    pub execution: Execution,
}

impl RefineConfig {
    pub fn new(lower_method: Method, upper_method: Method, epsilon_lambda: f64, time_limit: Duration) -> Self {
        RefineConfig {
            epsilon_lambda,
            time_limit,
            lower_method,
            upper_method,
            target_gap: None,
            max_iterations: None,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RefineError {
    #[error("epsilon_lambda must be positive, got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Method(#[from] MethodError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Bisected,
    TruthPoint,
    GapReached,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub interval: LambdaInterval,
    /// Priority the interval was popped with.
    pub gap: f64,
    pub action: Action,
}

/// A subinterval that is no longer being refined, with its final bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub interval: LambdaInterval,
    pub gap: f64,
    pub lower: BoundFunction,
    pub upper: BoundFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineResult {
    /// Every lower bound computed, in order of computation.
    pub lower: Vec<BoundFunction>,
    pub upper: Vec<BoundFunction>,
    /// Truth points `(λ, f(λ))`; `f` is ±∞ for infeasible/unbounded.
    pub points: Vec<(f64, f64)>,
    pub trace: Vec<TraceEntry>,
    /// Current partition of the interval: retired and still-queued pieces, sorted.
    pub leaves: Vec<Leaf>,
    pub elapsed: Duration,
}

impl RefineResult {
    /// Largest gap over the current partition.
    pub fn max_gap(&self) -> f64 {
        self.leaves.iter().map(|l| l.gap).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Popped priorities, in order.
    pub fn priorities(&self) -> Vec<f64> {
        self.trace.iter().map(|t| t.gap).collect()
    }
}

struct Entry {
    leaf: Leaf,
}

impl Entry {
    fn key(&self) -> f64 {
        if self.leaf.gap.is_nan() {
            f64::INFINITY
        } else {
            self.leaf.gap
        }
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Larger gap first; on ties the leftmost interval.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key()
            .total_cmp(&other.key())
            .then_with(|| other.leaf.interval.lo.total_cmp(&self.leaf.interval.lo))
    }
}

fn bound_pair(ctx: &BoundContext, cfg: &RefineConfig, iv: LambdaInterval) -> Result<Leaf, MethodError> {
    let (lower, upper) = cfg.execution.join(
        || ctx.bound_on(cfg.lower_method, Side::Lower, iv),
        || ctx.bound_on(cfg.upper_method, Side::Upper, iv),
    );
    let (lower, upper) = (lower?, upper?);
    let gap = max_gap(&upper, &lower, iv).1;
    Ok(Leaf {
        interval: iv,
        gap,
        lower,
        upper,
    })
}

pub fn refine(ctx: &BoundContext, cfg: &RefineConfig) -> Result<RefineResult, RefineError> {
    if !(cfg.epsilon_lambda > 0.0) {
        return Err(RefineError::Epsilon(cfg.epsilon_lambda));
    }
    let start = Instant::now();
    let whole = ctx.problem().interval;
    ctx.truth().outcome(whole.lo);
    ctx.truth().outcome(whole.hi);

    let mut result = RefineResult {
        lower: Vec::new(),
        upper: Vec::new(),
        points: Vec::new(),
        trace: Vec::new(),
        leaves: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let mut queue = BinaryHeap::new();
    let first = bound_pair(ctx, cfg, whole)?;
    result.lower.push(first.lower.clone());
    result.upper.push(first.upper.clone());
    queue.push(Entry { leaf: first });

    let mut iteration = 0;
    while let Some(top) = queue.peek() {
        if start.elapsed() >= cfg.time_limit || cfg.max_iterations.is_some_and(|m| iteration >= m) {
            break;
        }
        let _ = top;
        let Entry { leaf } = queue.pop().expect("peeked");
        iteration += 1;
        let iv = leaf.interval;
        let action = if cfg.target_gap.is_some_and(|t| leaf.gap <= t) {
            result.leaves.push(leaf.clone());
            Action::GapReached
        } else if iv.width() > cfg.epsilon_lambda {
            let mid = iv.midpoint();
            let (left, right) = cfg.execution.join(
                || bound_pair(ctx, cfg, LambdaInterval::new(iv.lo, mid)),
                || bound_pair(ctx, cfg, LambdaInterval::new(mid, iv.hi)),
            );
            for child in [left?, right?] {
                result.lower.push(child.lower.clone());
                result.upper.push(child.upper.clone());
                queue.push(Entry { leaf: child });
            }
            Action::Bisected
        } else {
            let mid = iv.midpoint();
            result.points.push((mid, ctx.truth().extended_value(mid)));
            result.leaves.push(leaf.clone());
            Action::TruthPoint
        };
        log::debug!("iteration {iteration}: {iv} gap {:e} -> {action:?}", leaf.gap);
        result.trace.push(TraceEntry {
            iteration,
            interval: iv,
            gap: leaf.gap,
            action,
        });
    }
    result.leaves.extend(queue.into_iter().map(|e| e.leaf));
    result.leaves.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));
    result.elapsed = start.elapsed();
    Ok(result)
}
