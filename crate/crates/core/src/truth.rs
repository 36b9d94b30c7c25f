//! Memoized ground-truth solves of `P(λ)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::model::ParametricLp;
use crate::simplex::{self, SimplexOutcome, Status};

/// Shares `P(λ)` solves between every method that needs them.
#[derive(Debug)]
pub struct TruthOracle {
    problem: ParametricLp,
    cache: Mutex<HashMap<u64, Arc<SimplexOutcome>>>,
}

impl TruthOracle {
    pub fn new(problem: ParametricLp) -> Self {
        TruthOracle {
            problem,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn problem(&self) -> &ParametricLp {
        &self.problem
    }

    /// Full outcome of `P(λ)`.
    pub fn outcome(&self, lambda: f64) -> Arc<SimplexOutcome> {
        let key = key(lambda);
        if let Some(hit) = self.cache.lock().expect("truth cache poisoned").get(&key) {
            return hit.clone();
        }
        let out = Arc::new(simplex::solve(&self.problem.instantiate(lambda)));
        self.cache
            .lock()
            .expect("truth cache poisoned")
            .entry(key)
            .or_insert(out)
            .clone()
    }

    /// Installs an already computed outcome for `lambda`.
    pub fn seed(&self, lambda: f64, outcome: Arc<SimplexOutcome>) {
        self.cache
            .lock()
            .expect("truth cache poisoned")
            .insert(key(lambda), outcome);
    }

    /// `f(λ)` when `P(λ)` is solved to optimality.
    pub fn value(&self, lambda: f64) -> Option<f64> {
        self.outcome(lambda).value()
    }

    /// `f(λ)` with the usual conventions: `+∞` infeasible, `−∞` unbounded, NaN on failure.
    pub fn extended_value(&self, lambda: f64) -> f64 {
        let out = self.outcome(lambda);
        match out.status {
            Status::Optimal => out.objective,
            Status::Infeasible => f64::INFINITY,
            Status::Unbounded => f64::NEG_INFINITY,
            Status::IterLimit => f64::NAN,
        }
    }

    /// Multipliers of the λ-dependent rows at an optimal `P(λ)`.
    pub fn a2_duals(&self, lambda: f64) -> Option<Vec<f64>> {
        let out = self.outcome(lambda);
        out.is_optimal()
            .then(|| out.duals[self.problem.m1()..].to_vec())
    }

    pub fn cached_points(&self) -> usize {
        self.cache.lock().expect("truth cache poisoned").len()
    }
}

// -0.0 and 0.0 are the same problem.
fn key(lambda: f64) -> u64 {
    if lambda == 0.0 {
        0
    } else {
        lambda.to_bits()
    }
}
