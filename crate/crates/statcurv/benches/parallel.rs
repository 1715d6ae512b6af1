//! Parallel vs sequential point sweeps on the heaviest per-point kernel
//! (full conformal-projective tensors). `map_items` uses rayon under the
//! default `parallel` feature; `map_items_seq` is the reference path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use statcurv::conformal::cp_tensors_at;
use statcurv::exec::{map_items, map_items_seq};
use statcurv::gallery;
use statcurv::structure::build_structure;

fn bench_point_sweep(c: &mut Criterion) {
    let entry = gallery::lookup("perturbed_poincare_ball4").unwrap();
    let s = build_structure(&entry.spec).unwrap();
    let points = s.sample_points(64);

    let mut group = c.benchmark_group("cp_tensor_sweep");
    group.bench_with_input(
        BenchmarkId::new("parallel", points.len()),
        &points,
        |b, pts| {
            b.iter(|| {
                let out = map_items(pts, |p| cp_tensors_at(&s, p).unwrap().w.max_abs());
                criterion::black_box(out)
            })
        },
    );
    group.bench_with_input(
        BenchmarkId::new("sequential", points.len()),
        &points,
        |b, pts| {
            b.iter(|| {
                let out = map_items_seq(pts, |p| cp_tensors_at(&s, p).unwrap().w.max_abs());
                criterion::black_box(out)
            })
        },
    );
    group.finish();
}

criterion_group!(benches, bench_point_sweep);
criterion_main!(benches);
