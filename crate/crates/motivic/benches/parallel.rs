//! Compares the rayon data-parallel core against the sequential fallback on
//! the two hot paths: truncated series multiplication and the full Euler
//! product expansion over the projective line. Run with
//! `cargo bench -p motivic`; build with `--no-default-features` to confirm
//! the sequential-only configuration still compiles and runs.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use motivic::curvezeta::{euler_product_over_curve, CurveData};
use motivic::exec::set_parallel;
use motivic::motive::MotiveElt;
use motivic::mvseries::{graded_indices, DegreeForm, MSeries, MultiIndex, VarSet};

/// A dense two-variable series with small Laurent coefficients.
fn dense_series(bound: u64) -> MSeries {
    let vars = VarSet::plain(&["x".to_owned(), "y".to_owned()]);
    let form = DegreeForm::new(vec![1, 1]).unwrap();
    let mut s = MSeries::zero(Arc::clone(&vars), form.clone(), bound).unwrap();
    for m in graded_indices(2, &form, bound) {
        let (i, j) = (m.0[0] as i64, m.0[1] as i64);
        let c = MotiveElt::lefschetz(i - j).add(&MotiveElt::lefschetz((i + j) % 3));
        s.set_coeff(m, c).unwrap();
    }
    s
}

/// A one-variable local factor with full support through degree 5.
fn wide_factor(bound: u64) -> MSeries {
    let vars = VarSet::plain(&["t".to_owned()]);
    let form = DegreeForm::new(vec![1]).unwrap();
    let mut f = MSeries::one(Arc::clone(&vars), form, bound).unwrap();
    for m in 1u32..=5 {
        let c = MotiveElt::lefschetz(m as i64 - 2).sub(&MotiveElt::lefschetz(-(m as i64)));
        f.set_coeff(MultiIndex(vec![m]), c).unwrap();
    }
    f
}

fn bench_series_mul(c: &mut Criterion) {
    let a = dense_series(14);
    let b = dense_series(14);
    let mut group = c.benchmark_group("series-mul");
    for &par in &[true, false] {
        let name = if par { "parallel" } else { "sequential" };
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |bench, &par| {
            let prev = set_parallel(par);
            bench.iter(|| a.series_mul(&b).unwrap());
            set_parallel(prev);
        });
    }
    group.finish();
}

fn bench_euler_product(c: &mut Criterion) {
    let f = wide_factor(10);
    let curve = CurveData::projective_line();
    let mut group = c.benchmark_group("euler-product");
    for &par in &[true, false] {
        let name = if par { "parallel" } else { "sequential" };
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |bench, &par| {
            let prev = set_parallel(par);
            bench.iter(|| euler_product_over_curve(&f, &[], &curve).unwrap());
            set_parallel(prev);
        });
    }
    group.finish();
}

criterion_group!(benches, bench_series_mul, bench_euler_product);
criterion_main!(benches);
