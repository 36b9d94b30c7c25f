//! Every method on either side stays on the correct side of `f` when the
//! toys' perturbations are rescaled, and the benchmark is worker-independent.

mod common;

use std::time::Duration;

use common::parametric_value;
use lpbound::bench::{run_benchmark, write_csv, BenchConfig, BenchProblem};
use lpbound::{toys, BoundContext, Execution, Method, Side};
use proptest::prelude::*;

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    (0..=8).map(|k| lo + k as f64 / 8.0 * (hi - lo)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bounds_sandwich_rescaled_toys(toy in 0usize..4, scale in 0.2f64..1.5, n in 1usize..4) {
        let (name, mut p) = toys::all().swap_remove(toy);
        p.d = p.d.scaled(scale);
        let iv = p.interval;
        let truth: Vec<(f64, f64)> = grid(iv.lo, iv.hi)
            .into_iter()
            .map(|l| (l, parametric_value(&p, l).extended()))
            .collect();
        let ctx = BoundContext::new(p).unwrap();
        for method in Method::ALL {
            for side in [Side::Upper, Side::Lower] {
                let bf = ctx.bound(method, side, n, Execution::Sequential).unwrap();
                for &(l, f) in &truth {
                    let Some(v) = bf.value_at(l) else { continue };
                    let tol = 1e-6 * (1.0 + if f.is_finite() { f.abs() } else { 0.0 });
                    let ok = match side {
                        Side::Upper => v >= f - tol,
                        Side::Lower => v <= f + tol,
                    };
                    prop_assert!(ok, "{name} x{scale} {method} {side} N={n} at {l}: bound {v}, f {f}");
                }
            }
        }
    }
}

#[test]
fn benchmark_csv_is_worker_independent() {
    let problems: Vec<BenchProblem> = toys::all()
        .into_iter()
        .map(|(name, problem)| BenchProblem { name: name.into(), problem })
        .collect();
    let csv = |workers| {
        let cfg = BenchConfig {
            methods: vec![Method::RobustYzflat, Method::LagrangianEnvelope],
            splits: vec![1, 4],
            timeout: Duration::from_secs(600),
            workers,
            ..BenchConfig::default()
        };
        let records = run_benchmark(&problems, &cfg);
        assert_eq!(records.len(), 4 * 2 * 2 * 2);
        let mut out = Vec::new();
        write_csv(&records, false, &mut out).unwrap();
        out
    };
    assert_eq!(csv(1), csv(4));
}
