//! Benchmark protocol: instance generation, truth sampling, normalization
//! and the availability / RMSE / relative-time metrics.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::{BoundFunction, Side};
use crate::exec::{self, Execution};
use crate::io::mps::{normalize as normalize_mps, MpsModel, RowSense};
use crate::io::perturb::{assemble, PerturbationSpec};
use crate::methods::{BoundContext, Method};
use crate::model::{LambdaInterval, ParametricLp};
use crate::simplex::{self, Status};
use crate::truth::TruthOracle;

pub const SAMPLE_POINTS: usize = 100;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("no finite samples to normalize")]
    NoFiniteSamples,
}

/// `f` on 100 uniform points of the interval, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub interval: LambdaInterval,
    pub lambdas: Vec<f64>,
    /// `f(λ)`: `+∞` infeasible, `−∞` unbounded, NaN on iteration limit.
    pub values: Vec<f64>,
    pub statuses: Vec<Status>,
    pub elapsed: Duration,
}

impl SampleSet {
    pub fn finite_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| v.is_finite())
    }
}

pub fn sample_lambdas(iv: LambdaInterval) -> Vec<f64> {
    let last = SAMPLE_POINTS - 1;
    (0..SAMPLE_POINTS)
        .map(|i| {
            if i == last {
                iv.hi
            } else {
                iv.lo + (i as f64 / last as f64) * (iv.hi - iv.lo)
            }
        })
        .collect()
}

/// Solves `P(λ)` at every sample point from scratch; the total time is the
/// relative-timing baseline.
pub fn sample_truth(p: &ParametricLp) -> SampleSet {
    let lambdas = sample_lambdas(p.interval);
    let start = Instant::now();
    let (values, statuses) = lambdas
        .iter()
        .map(|&l| {
            let out = simplex::solve(&p.instantiate(l));
            let v = match out.status {
                Status::Optimal => out.objective,
                Status::Infeasible => f64::INFINITY,
                Status::Unbounded => f64::NEG_INFINITY,
                Status::IterLimit => f64::NAN,
            };
            (v, out.status)
        })
        .unzip();
    SampleSet {
        interval: p.interval,
        lambdas,
        values,
        statuses,
        elapsed: start.elapsed(),
    }
}

/// `x ↦ (x − shift) / range + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub shift: f64,
    pub range: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { shift: 1.0, range: 1.0 };

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.shift) / self.range + 1.0
    }
}

/// Sends the smallest finite sample to 1 and the largest to 2; a constant
/// profile is only shifted onto 1.
pub fn normalize(values: impl IntoIterator<Item = f64>) -> Result<AffineMap, BenchError> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return Err(BenchError::NoFiniteSamples);
    }
    let range = hi - lo;
    Ok(AffineMap {
        shift: lo,
        range: if range > 0.0 { range } else { 1.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub problem: String,
    pub method: Method,
    pub side: Side,
    #[serde(rename = "N")]
    pub n: usize,
    pub availability: f64,
    pub rmse: f64,
    pub rel_time: f64,
    pub timeout: bool,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scores {
    pub availability: f64,
    /// `∞` when no point is available.
    pub rmse: f64,
}

/// Availability counts sample points where the bound is finite; RMSE (+1)
/// runs over those of them where `f` is finite too, in normalized units.
pub fn score(bound: &BoundFunction, samples: &SampleSet, map: AffineMap) -> Scores {
    let mut available = 0usize;
    let mut sq = 0.0;
    let mut count = 0usize;
    for (&l, &f) in samples.lambdas.iter().zip(&samples.values) {
        let Some(b) = bound.value_at(l).filter(|b| b.is_finite()) else {
            continue;
        };
        available += 1;
        if f.is_finite() {
            let e = map.apply(b) - map.apply(f);
            sq += e * e;
            count += 1;
        }
    }
    Scores {
        availability: available as f64 / samples.lambdas.len() as f64 * 100.0,
        rmse: if count == 0 {
            f64::INFINITY
        } else {
            (sq / count as f64).sqrt() + 1.0
        },
    }
}

/// Scores plus relative timing; an over-time bound counts as unavailable.
pub fn metrics(
    bound: &BoundFunction,
    samples: &SampleSet,
    map: AffineMap,
    bound_time: Duration,
    timeout: Duration,
) -> (Scores, f64, bool) {
    let rel = bound_time.as_secs_f64() / samples.elapsed.as_secs_f64().max(1e-9);
    if bound_time > timeout {
        let none = Scores {
            availability: 0.0,
            rmse: f64::INFINITY,
        };
        return (none, rel, true);
    }
    (score(bound, samples, map), rel, false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchProblem {
    pub name: String,
    pub problem: ParametricLp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub sides: Vec<Side>,
    pub splits: Vec<usize>,
    pub timeout: Duration,
    pub seed: u64,
    /// Threads across problems; 0 uses the global pool.
    pub workers: usize,
    pub execution: Execution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: Method::ALL.to_vec(),
            sides: vec![Side::Upper, Side::Lower],
            splits: vec![1, 5, 10],
            timeout: DEFAULT_TIMEOUT,
            seed: 0,
            workers: 0,
            execution: Execution::Parallel,
        }
    }
}

fn bench_problem(bp: &BenchProblem, cfg: &BenchConfig) -> Vec<BenchmarkRecord> {
    let samples = sample_truth(&bp.problem);
    let map = normalize(samples.finite_values()).unwrap_or(AffineMap::IDENTITY);
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &side in &cfg.sides {
            for &n in &cfg.splits {
                // A fresh context per cell so no cell profits from another's solves.
                let start = Instant::now();
                let bound = BoundContext::new(bp.problem.clone())
                    .map_err(Into::into)
                    .and_then(|ctx| ctx.bound(method, side, n, Execution::Sequential));
                let elapsed = start.elapsed();
                let (scores, rel_time, timeout) = match &bound {
                    Ok(b) => metrics(b, &samples, map, elapsed, cfg.timeout),
                    Err(e) => {
                        log::warn!("{}: {method} {side} N={n}: {e}", bp.name);
                        let none = Scores {
                            availability: 0.0,
                            rmse: f64::INFINITY,
                        };
                        (none, elapsed.as_secs_f64() / samples.elapsed.as_secs_f64().max(1e-9), false)
                    }
                };
                out.push(BenchmarkRecord {
                    problem: bp.name.clone(),
                    method,
                    side,
                    n,
                    availability: scores.availability,
                    rmse: scores.rmse,
                    rel_time,
                    timeout,
                    seed: cfg.seed,
                });
            }
        }
    }
    out
}

/// Every (problem, method, side, N) cell, ordered by problem name and then
/// by configuration order.
pub fn run_benchmark(problems: &[BenchProblem], cfg: &BenchConfig) -> Vec<BenchmarkRecord> {
    let mut sorted: Vec<&BenchProblem> = problems.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let per_problem = exec::with_workers(cfg.workers, || cfg.execution.map(&sorted, |bp| bench_problem(bp, cfg)));
    per_problem.into_iter().flatten().collect()
}

/// CSV with columns problem, method, side, N, availability, rmse, rel_time,
/// timeout, seed; `rel_time` is left blank unless `timing` is set.
pub fn write_csv<W: Write>(records: &[BenchmarkRecord], timing: bool, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["problem", "method", "side", "N", "availability", "rmse", "rel_time", "timeout", "seed"])?;
    for r in records {
        out.write_record([
            r.problem.clone(),
            r.method.name().to_string(),
            r.side.as_str().to_string(),
            r.n.to_string(),
            r.availability.to_string(),
            r.rmse.to_string(),
            if timing { r.rel_time.to_string() } else { String::new() },
            r.timeout.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowFilter {
    #[default]
    Any,
    EqualityOnly,
    InequalityOnly,
}

impl RowFilter {
    fn admits(self, sense: RowSense) -> bool {
        match self {
            RowFilter::Any => true,
            RowFilter::EqualityOnly => sense == RowSense::Eq,
            RowFilter::InequalityOnly => sense != RowSense::Eq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Rejected {
    /// No row passes the filter.
    EmptyFilter,
    /// The chosen rows have no structural nonzeros.
    NoNonzeros,
    NotFeasibleBounded { lambda: f64, status: Status },
    /// Largest normalized deviation from the chord is too small.
    Linear { deviation: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance {
    pub problem: ParametricLp,
    pub spec: PerturbationSpec,
    pub seed: u64,
}

pub const MAX_PERTURBED_ROWS: usize = 100;
pub const COEFFS_PER_ROW: usize = 3;
pub const NONLINEARITY_THRESHOLD: f64 = 1e-4;

/// Draws a random perturbation of `model` and keeps it only if `f` is finite
/// at −1, 0, 1 and visibly nonlinear on [−1, 1].
pub fn generate_instance(model: &MpsModel, seed: u64, filter: RowFilter) -> Result<GeneratedInstance, Rejected> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<usize> = (0..model.rows.len()).filter(|&i| filter.admits(model.rows[i].1)).collect();
    if eligible.is_empty() {
        return Err(Rejected::EmptyFilter);
    }
    let take = eligible.len().min(MAX_PERTURBED_ROWS);
    let mut chosen: Vec<usize> = index::sample(&mut rng, eligible.len(), take)
        .into_iter()
        .map(|k| eligible[k])
        .collect();
    chosen.sort_unstable();

    let mut coeffs = vec![vec![0.0; model.columns.len()]; model.rows.len()];
    for &(row, j, v) in &model.entries {
        if let Some(i) = row {
            coeffs[i][j] += v;
        }
    }
    let mut d = Vec::new();
    for &i in &chosen {
        let nz: Vec<usize> = (0..model.columns.len()).filter(|&j| coeffs[i][j] != 0.0).collect();
        let mut picks: Vec<usize> = index::sample(&mut rng, nz.len(), nz.len().min(COEFFS_PER_ROW))
            .into_iter()
            .map(|k| nz[k])
            .collect();
        picks.sort_unstable();
        for j in picks {
            let u: f64 = rng.random_range(0.1..0.9);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            d.push((model.rows[i].0.clone(), model.columns[j].clone(), sign * u * coeffs[i][j]));
        }
    }
    if d.is_empty() {
        return Err(Rejected::NoNonzeros);
    }
    let spec = PerturbationSpec {
        a2_rows: chosen.iter().map(|&i| model.rows[i].0.clone()).collect(),
        d,
        lambda: [-1.0, 1.0],
    };
    let problem = assemble(&normalize_mps(model), &spec).expect("generated names exist");

    let oracle = TruthOracle::new(problem.clone());
    for l in [-1.0, 0.0, 1.0] {
        let out = oracle.outcome(l);
        if !out.is_optimal() {
            return Err(Rejected::NotFeasibleBounded {
                lambda: l,
                status: out.status,
            });
        }
    }
    let deviation = chord_deviation(&[-1.0, -0.5, 0.0, 0.5, 1.0].map(|l| (l, oracle.extended_value(l))));
    if !(deviation > NONLINEARITY_THRESHOLD) {
        return Err(Rejected::Linear { deviation });
    }
    Ok(GeneratedInstance { problem, spec, seed })
}

/// Largest distance of the points from the chord through the first and last
/// one, relative to the spread of the finite values; `∞` if an inner value
/// is not finite, 0 for a constant profile.
pub fn chord_deviation(points: &[(f64, f64)]) -> f64 {
    let (&(l0, f0), &(l1, f1)) = (points.first().expect("points"), points.last().expect("points"));
    let (lo, hi) = points
        .iter()
        .filter(|p| p.1.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let spread = hi - lo;
    if !(spread > 0.0) {
        return 0.0;
    }
    points
        .iter()
        .map(|&(l, f)| {
            let chord = f0 + (f1 - f0) * (l - l0) / (l1 - l0);
            (f - chord).abs() / spread
        })
        .fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::{Provenance, Segment};
    use crate::matrix::Matrix;
    use crate::toys;

    fn constant_samples(value: f64) -> SampleSet {
        let iv = LambdaInterval::new(0.0, 1.0);
        SampleSet {
            interval: iv,
            lambdas: sample_lambdas(iv),
            values: vec![value; SAMPLE_POINTS],
            statuses: vec![Status::Optimal; SAMPLE_POINTS],
            elapsed: Duration::from_millis(10),
        }
    }

    #[test]
    fn hundred_points_with_exact_endpoints() {
        let iv = LambdaInterval::new(-2.0, 2.0);
        let l = sample_lambdas(iv);
        assert_eq!(l.len(), 100);
        assert_eq!(l[0], -2.0);
        assert_eq!(l[99], 2.0);
    }

    #[test]
    fn normalize_examples() {
        let m = normalize([3.0, 5.0]).unwrap();
        assert_eq!((m.apply(3.0), m.apply(5.0), m.apply(4.0)), (1.0, 2.0, 1.5));
        let c = normalize([7.0, 7.0]).unwrap();
        assert_eq!(c.apply(7.0), 1.0);
        assert_eq!(c.apply(9.0), 3.0);
        assert_eq!(normalize([f64::INFINITY, f64::NAN]), Err(BenchError::NoFiniteSamples));
    }

    #[test]
    fn normalize_is_idempotent() {
        let s = sample_truth(&toys::toy2());
        let m = normalize(s.finite_values()).unwrap();
        let once: Vec<f64> = s.finite_values().map(|v| m.apply(v)).collect();
        assert_eq!(once.iter().cloned().fold(f64::INFINITY, f64::min), 1.0);
        assert_eq!(once.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 2.0);
        let again = normalize(once.iter().copied()).unwrap();
        for v in &once {
            assert!((again.apply(*v) - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn metric_examples() {
        let s = constant_samples(1.0);
        let map = AffineMap::IDENTITY;
        let exact = BoundFunction::constant(Side::Upper, s.interval, 1.0, Provenance::new("e"));
        assert_eq!(score(&exact, &s, map), Scores { availability: 100.0, rmse: 1.0 });
        let off = BoundFunction::constant(Side::Upper, s.interval, 2.0, Provenance::new("o"));
        assert_eq!(score(&off, &s, map).rmse, 2.0);
        let cut = 0.5 * (s.lambdas[49] + s.lambdas[50]);
        let half = BoundFunction::new(
            Side::Upper,
            vec![Segment::constant(0.0, cut, 1.0), Segment::unavailable(cut, 1.0)],
            Provenance::new("h"),
        );
        assert_eq!(score(&half, &s, map).availability, 50.0);
        let none = BoundFunction::unavailable(Side::Upper, s.interval, Provenance::new("n"));
        assert_eq!(score(&none, &s, map), Scores { availability: 0.0, rmse: f64::INFINITY });
    }

    #[test]
    fn timeout_makes_everything_unavailable() {
        let s = constant_samples(1.0);
        let exact = BoundFunction::constant(Side::Upper, s.interval, 1.0, Provenance::new("e"));
        let (scores, rel, hit) = metrics(&exact, &s, AffineMap::IDENTITY, Duration::from_millis(5), Duration::from_millis(1));
        assert!(hit);
        assert_eq!(scores.availability, 0.0);
        assert!((rel - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_samples_are_constant() {
        let mut p = toys::toy1();
        p.d = Matrix::zeros(p.m2(), p.num_vars());
        let s = sample_truth(&p);
        assert!(s.values.iter().all(|v| *v == s.values[0]));
    }

    #[test]
    fn toy3_spikes_above_the_chord() {
        let p = toys::toy3();
        let s = sample_truth(&p);
        let (f0, f1) = (s.values[0], s.values[99]);
        let iv = p.interval;
        let above = s
            .lambdas
            .iter()
            .zip(&s.values)
            .filter(|(l, _)| **l > 0.5 && **l < 1.0)
            .map(|(&l, &f)| f - (f0 + (f1 - f0) * (l - iv.lo) / iv.width()))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(above > 0.0, "{above}");
    }

    #[test]
    fn chord_deviation_cases() {
        assert_eq!(chord_deviation(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]), 0.0);
        assert_eq!(chord_deviation(&[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]), 0.0);
        assert_eq!(chord_deviation(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]), 1.0);
        assert_eq!(chord_deviation(&[(0.0, 0.0), (0.5, f64::INFINITY), (1.0, 1.0)]), f64::INFINITY);
    }

    #[test]
    fn csv_has_blank_time_without_timing() {
        let r = BenchmarkRecord {
            problem: "toy1".into(),
            method: Method::RobustFlat,
            side: Side::Upper,
            n: 5,
            availability: 100.0,
            rmse: 1.25,
            rel_time: 3.0,
            timeout: false,
            seed: 7,
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "problem,method,side,N,availability,rmse,rel_time,timeout,seed\ntoy1,robust-flat,upper,5,100,1.25,,false,7\n"
        );
    }
}
