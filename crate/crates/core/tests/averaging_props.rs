//! Property tests for the averaging engines.

use logcorr_core::averaging::{self, AverageKind};
use logcorr_core::numeric;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im)), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_avg_is_linear(xs in complex_vec(500), ys in complex_vec(500), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let combo: Vec<Complex64> = xs.iter().zip(&ys).map(|(x, y)| x * a + y * b).collect();
        let lhs = averaging::log_avg(&combo).unwrap();
        let rhs = averaging::log_avg(&xs).unwrap() * a + averaging::log_avg(&ys).unwrap() * b;
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn log_avg_bounded_by_sup(xs in complex_vec(300)) {
        let sup = xs.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let avg = averaging::log_avg(&xs).unwrap();
        prop_assert!(avg.norm() <= sup + 1e-12);
    }

    #[test]
    fn cesaro_of_constant_is_exact(re in -1.0f64..1.0, n in 1usize..2000) {
        let xs = vec![Complex64::new(re, 0.0); n];
        let v = averaging::cesaro_avg(&xs).unwrap();
        prop_assert!((v.re - re).abs() <= 1e-13);
    }

    #[test]
    fn weighted_trace_matches_reverse_reference(n in 100u64..20_000) {
        let t = numeric::weighted_trace(&[n], |m| (m as f64).cos(), |m| 1.0 / m as f64);
        let mut num = 0f64;
        let mut den = 0f64;
        for m in (1..=n).rev() {
            num += (m as f64).cos() / m as f64;
            den += 1.0 / m as f64;
        }
        prop_assert!((t[0].1 - num).abs() < 1e-10);
        prop_assert!((t[0].2 - den).abs() < 1e-10);
    }
}

#[test]
fn parallel_blocks_reproduce_single_thread_bits() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            averaging::averaged_trace_real(
                AverageKind::Logarithmic,
                &[123, 45_678, 300_000],
                |m| ((m * m % 101) as f64 - 50.0) / 50.0,
            )
        })
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        let multi = run(threads);
        for (a, b) in one.points.iter().zip(&multi.points) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.re.to_bits(), b.1.re.to_bits());
        }
    }
}

#[test]
fn scale_stability_of_even_indicator() {
    // |logavg(1_even, N) - 1/2| <= 2/ln N for N >= 100
    for n in [100u64, 1000, 10_000, 1_000_000] {
        let r = averaging::averaged_trace_real(AverageKind::Logarithmic, &[n], |m| {
            f64::from(m % 2 == 0)
        });
        let gap = (r.final_value().re - 0.5).abs();
        assert!(gap <= 2.0 / (n as f64).ln(), "N = {n}: gap {gap}");
    }
}
