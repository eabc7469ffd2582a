use coorbit::cover::{adjacency, build_induced_cover, CoverParams};
use coorbit::equiv::{coorbit_equivalence, CompareOptions};
use coorbit::matgroup::{GroupSpec, Mat};
use coorbit::RunConfig;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let seq = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let par = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", seq), ("parallel", par)]
}

fn bench_adjacency(c: &mut Criterion) {
    let spec = GroupSpec::cyclic(Mat::diag(&[3.0, 2.0, 2.0])).unwrap();
    let params = CoverParams::default();
    let cover = build_induced_cover(&spec, 16, &params).unwrap();
    let mut group = c.benchmark_group("adjacency");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| adjacency(&cover, params.budget).unwrap()))
        });
    }
    group.finish();
}

fn bench_compare(c: &mut Criterion) {
    let a = GroupSpec::cyclic(Mat::diag(&[3.0, 2.0, 2.0])).unwrap();
    let b = GroupSpec::cyclic(Mat::diag(&[2.0, 2.0, 3.0])).unwrap();
    let cfg = RunConfig { window: 4, ..RunConfig::default() };
    let opts = CompareOptions::default();
    let mut group = c.benchmark_group("compare");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |bch| {
            bch.iter(|| pool.install(|| coorbit_equivalence(&a, &b, &cfg, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_adjacency, bench_compare);
criterion_main!(benches);
