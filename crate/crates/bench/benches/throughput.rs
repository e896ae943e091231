use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use logcorr_core::averaging::{averaged_trace_real, AverageKind, CheckpointSchedule};
use logcorr_core::correlations;
use logcorr_core::multfun::MultFnSpec;
use logcorr_core::numeric::Fixed128;
use logcorr_core::sequences::Generator;
use logcorr_core::sieve::{SegmentedFactorSieve, Window};

fn sieve_windows(c: &mut Criterion) {
    let sieve = SegmentedFactorSieve::build(20_000_000).unwrap();
    let mut g = c.benchmark_group("sieve");
    for n in [1_000_000u64, 10_000_000] {
        g.throughput(Throughput::Elements(n));
        g.bench_with_input(BenchmarkId::new("arithmetic_table", n), &n, |b, &n| {
            b.iter(|| {
                let t = sieve.arithmetic_table(Window::new(1, n).unwrap()).unwrap();
                black_box(t.lambda.len())
            })
        });
    }
    g.finish();
}

fn log_trace(c: &mut Criterion) {
    let sieve = SegmentedFactorSieve::build(2_000_100).unwrap();
    let sampler = MultFnSpec::liouville()
        .sampler(Window::new(1, 2_000_100).unwrap(), &sieve)
        .unwrap();
    let mut g = c.benchmark_group("averaging");
    let n = 2_000_000u64;
    g.throughput(Throughput::Elements(n));
    g.bench_function("two_point_log_trace_2e6", |b| {
        b.iter(|| {
            let t = averaged_trace_real(AverageKind::Logarithmic, &[n], |m| {
                sampler.get_real(m) * sampler.get_real(m + 1)
            });
            black_box(t.final_value())
        })
    });
    g.finish();
}

fn beatty_eval(c: &mut Criterion) {
    let alpha = Fixed128::parse("sqrt2").unwrap();
    let mut g = c.benchmark_group("fixed_point");
    g.throughput(Throughput::Elements(1_000_000));
    g.bench_function("beatty_floor_1e6", |b| {
        b.iter(|| {
            let mut acc = 0u64;
            for n in 1..=1_000_000u64 {
                acc = acc.wrapping_add(alpha.floor_mul(n).unwrap());
            }
            black_box(acc)
        })
    });
    g.finish();
}

fn composition_correlation(c: &mut Criterion) {
    let sieve = SegmentedFactorSieve::build(1_500_000).unwrap();
    let beatty = Generator::parse("beatty:sqrt2:0").unwrap();
    let sched = CheckpointSchedule::single(1_000_000);
    let lam = MultFnSpec::liouville();
    c.bench_function("beatty_composition_corr_1e6", |b| {
        b.iter(|| {
            let r = correlations::corr_along_deterministic(
                &[lam.clone(), lam.clone()],
                &beatty,
                &[1, 2],
                &sched,
                &sieve,
            )
            .unwrap();
            black_box(r.report.final_value())
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sieve_windows, log_trace, beatty_eval, composition_correlation
}
criterion_main!(benches);
