use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use conred::selftest::{self, Mode};

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (label, mode) in [("parallel", Mode::Parallel), ("sequential", Mode::Sequential)] {
        group.bench_with_input(BenchmarkId::new("reduction_functoriality", label), &mode, |b, &m| {
            b.iter(|| selftest::reduction_functoriality(1, 40, m))
        });
        group.bench_with_input(BenchmarkId::new("dirac_oracle", label), &mode, |b, &m| b.iter(|| selftest::dirac_oracle(1, 20, m)));
        group.bench_with_input(BenchmarkId::new("canonical_isos", label), &mode, |b, &m| {
            b.iter(|| selftest::canonical_isos(1, 60, m))
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
