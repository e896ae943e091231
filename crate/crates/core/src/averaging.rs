//! Cesaro and logarithmic averaging with checkpointed convergence traces.
//!
//! Limits in the underlying statements are replaced by traces along a
//! geometric checkpoint schedule; a report records the values plus a crude
//! tail summary. Nothing here ever asserts that a limit exists.

use crate::error::{Error, Result};
use crate::multfun::MultFnSpec;
use crate::numeric::{weighted_trace, Kahan};
use crate::sieve::{SegmentedFactorSieve, Window};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageKind {
    Cesaro,
    Logarithmic,
}

impl AverageKind {
    pub fn name(&self) -> &'static str {
        match self {
            AverageKind::Cesaro => "cesaro",
            AverageKind::Logarithmic => "logarithmic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cesaro" => Ok(AverageKind::Cesaro),
            "logarithmic" | "log" => Ok(AverageKind::Logarithmic),
            other => Err(Error::parse(format!("unknown average kind `{other}`"))),
        }
    }
}

/// Geometric checkpoint grid N_k = ceil(N_0 * r^k), capped at and always
/// including N_max.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSchedule {
    pub start: u64,
    pub ratio: f64,
    pub n_max: u64,
}

impl CheckpointSchedule {
    pub fn new(start: u64, ratio: f64, n_max: u64) -> Result<Self> {
        if start == 0 || n_max < start {
            return Err(Error::domain(format!(
                "bad schedule bounds: start {start}, max {n_max}"
            )));
        }
        if ratio <= 1.0 || !ratio.is_finite() {
            return Err(Error::domain(format!("schedule ratio {ratio} must be > 1")));
        }
        let count = ((n_max as f64 / start as f64).ln() / ratio.ln()).ceil();
        if count > 100_000.0 {
            return Err(Error::resource(format!(
                "schedule would have ~{count:.0} checkpoints; raise the ratio"
            )));
        }
        Ok(CheckpointSchedule { start, ratio, n_max })
    }

    /// A single-point schedule, for callers that only want the final value.
    pub fn single(n: u64) -> Self {
        CheckpointSchedule { start: n, ratio: 2.0, n_max: n }
    }

    /// Strictly increasing checkpoint list ending at n_max.
    pub fn points(&self) -> Vec<u64> {
        let mut pts = Vec::new();
        let mut x = self.start as f64;
        loop {
            let n = x.ceil() as u64;
            if n >= self.n_max {
                break;
            }
            if pts.last() != Some(&n) {
                pts.push(n);
            }
            x *= self.ratio;
        }
        pts.push(self.n_max);
        pts
    }
}

/// Crude convergence summary over the final checkpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendSummary {
    /// max |value| over the last three checkpoints
    pub tail_max_abs: f64,
    /// sign of |last| - |first|: negative means the magnitude is shrinking
    pub drift: f64,
}

/// Per-checkpoint values of one averaged quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub kind: AverageKind,
    pub points: Vec<(u64, Complex64)>,
    pub trend: TrendSummary,
}

impl ConvergenceReport {
    pub fn from_points(kind: AverageKind, points: Vec<(u64, Complex64)>) -> Self {
        let tail = points.len().saturating_sub(3);
        let tail_max_abs = points[tail..]
            .iter()
            .map(|(_, v)| v.norm())
            .fold(0.0f64, f64::max);
        let drift = match (points.first(), points.last()) {
            (Some((_, a)), Some((_, b))) => (b.norm() - a.norm()).signum(),
            _ => 0.0,
        };
        ConvergenceReport { kind, points, trend: TrendSummary { tail_max_abs, drift } }
    }

    pub fn final_value(&self) -> Complex64 {
        self.points.last().expect("non-empty report").1
    }

    /// CSV with columns `N,re,im`.
    pub fn to_csv(&self) -> String {
        crate::report::Series::from_report("trace", self).to_csv()
    }

    /// JSON rows `[[N, re, im], ...]`.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, &(n, v)) in self.points.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "[{n},{},{}]",
                crate::report::fmt_f64(v.re),
                crate::report::fmt_f64(v.im)
            ));
        }
        out.push(']');
        out
    }
}

/// Checkpointed average of `term(m)` over m in [1, N_k].
pub fn averaged_trace<F>(kind: AverageKind, checkpoints: &[u64], term: F) -> ConvergenceReport
where
    F: Fn(u64) -> Complex64 + Sync,
{
    let raw = match kind {
        AverageKind::Cesaro => weighted_trace(checkpoints, term, |_| 1.0),
        AverageKind::Logarithmic => weighted_trace(checkpoints, term, |m| 1.0 / m as f64),
    };
    let points = raw.into_iter().map(|(n, num, den)| (n, num / den)).collect();
    ConvergenceReport::from_points(kind, points)
}

/// Real-valued fast path of [`averaged_trace`].
pub fn averaged_trace_real<F>(kind: AverageKind, checkpoints: &[u64], term: F) -> ConvergenceReport
where
    F: Fn(u64) -> f64 + Sync,
{
    let raw = match kind {
        AverageKind::Cesaro => weighted_trace(checkpoints, term, |_| 1.0),
        AverageKind::Logarithmic => weighted_trace(checkpoints, term, |m| 1.0 / m as f64),
    };
    let points = raw
        .into_iter()
        .map(|(n, num, den)| (n, Complex64::new(num / den, 0.0)))
        .collect();
    ConvergenceReport::from_points(kind, points)
}

/// Cesaro mean (1/N) sum_{n<=N} a(n) of a slice holding a(1..=N).
pub fn cesaro_avg(samples: &[Complex64]) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::domain("cesaro average over empty range".to_string()));
    }
    let n = samples.len() as u64;
    let trace = averaged_trace(AverageKind::Cesaro, &[n], |m| samples[(m - 1) as usize]);
    Ok(trace.final_value())
}

/// Logarithmic mean of a slice holding a(1..=N): numerator and denominator
/// run through the same compensated reduction order.
pub fn log_avg(samples: &[Complex64]) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::domain("logarithmic average over empty range".to_string()));
    }
    let n = samples.len() as u64;
    let trace = averaged_trace(AverageKind::Logarithmic, &[n], |m| samples[(m - 1) as usize]);
    Ok(trace.final_value())
}

/// Logarithmically weighted prime mean: sum over the given primes of
/// a(p)/p, normalized by sum 1/p.
pub fn log_avg_primes<F>(primes: &[u64], a: F) -> Result<Complex64>
where
    F: Fn(u64) -> Complex64,
{
    if primes.is_empty() {
        return Err(Error::domain("no primes in range for prime log-average".to_string()));
    }
    let mut num = Kahan::<Complex64>::new();
    let mut den = Kahan::<f64>::new();
    for &p in primes {
        let w = 1.0 / p as f64;
        num.add(a(p) * w);
        den.add(w);
    }
    Ok(num.total() / den.total())
}

/// E_{n in [N]^r} |c(n)|, the finite-scale density diagnostic.
pub fn density_diagnostic<F>(n: u64, r: usize, c: F) -> Result<f64>
where
    F: Fn(&[u64]) -> Complex64 + Sync,
{
    if !(1..=3).contains(&r) {
        return Err(Error::domain(format!("density diagnostic arity {r} not in 1..=3")));
    }
    if n == 0 {
        return Err(Error::domain("density diagnostic over empty box".to_string()));
    }
    let total = (n as u128).pow(r as u32);
    if total > 1u128 << 33 {
        return Err(Error::resource(format!(
            "density box [{n}]^{r} has {total} points; shrink N or r"
        )));
    }
    let count = total as u64;
    // flatten the box walk so the block reduction stays deterministic
    let sum = crate::numeric::block_sum(count, |idx0| {
        let mut idx = idx0 - 1;
        let mut point = [0u64; 3];
        for slot in point.iter_mut().take(r) {
            *slot = idx % n + 1;
            idx /= n;
        }
        c(&point[..r]).norm()
    });
    Ok(sum / count as f64)
}

/// Short-interval variance E_{m<=M} |E_{n<=Nw} f(n+m) - alpha|^2 with
/// alpha = E_{n<=M} f(n), via one sliding prefix-sum pass over any real
/// sequence. The window at m covers the indices m+1 ..= m+Nw.
pub fn short_interval_variance_seq<F>(f: F, window_len: u64, outer: u64) -> Result<f64>
where
    F: Fn(u64) -> f64,
{
    if window_len == 0 || window_len >= outer {
        return Err(Error::domain(format!(
            "window length {window_len} must be in [1, M) with M = {outer}"
        )));
    }
    let top = outer + window_len;
    let mut prefix = vec![0f64; (top + 1) as usize];
    let mut acc = Kahan::<f64>::new();
    for n in 1..=top {
        acc.add(f(n));
        prefix[n as usize] = acc.total();
    }
    let alpha = prefix[outer as usize] / outer as f64;
    let mut var = Kahan::<f64>::new();
    for m in 1..=outer {
        let s = prefix[(m + window_len) as usize] - prefix[m as usize];
        let d = s / window_len as f64 - alpha;
        var.add(d * d);
    }
    Ok(var.total() / outer as f64)
}

/// [`short_interval_variance_seq`] for a real-valued multiplicative
/// function evaluated through sieve tables.
pub fn short_interval_variance(
    f: &MultFnSpec,
    window_len: u64,
    outer: u64,
    sieve: &SegmentedFactorSieve,
) -> Result<f64> {
    if !f.is_real_valued() {
        return Err(Error::domain("short-interval variance needs a real-valued function".to_string()));
    }
    if window_len == 0 || window_len >= outer {
        return Err(Error::domain(format!(
            "window length {window_len} must be in [1, M) with M = {outer}"
        )));
    }
    let sampler = f.sampler(Window::new(1, outer + window_len)?, sieve)?;
    short_interval_variance_seq(|n| sampler.get_real(n), window_len, outer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn schedule_spans_and_ends_at_max() {
        let s = CheckpointSchedule::new(1000, 10.0, 10_000_000).unwrap();
        assert_eq!(s.points(), vec![1000, 10_000, 100_000, 1_000_000, 10_000_000]);
        let s = CheckpointSchedule::new(10, 3.0, 100).unwrap();
        let p = s.points();
        assert_eq!(*p.last().unwrap(), 100);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(CheckpointSchedule::new(10, 1.0, 100).is_err());
        assert!(CheckpointSchedule::new(0, 2.0, 100).is_err());
        assert!(CheckpointSchedule::new(10, 2.0, 5).is_err());
    }

    #[test]
    fn cesaro_basics() {
        let xs: Vec<Complex64> = (0..50).map(|_| c(2.5)).collect();
        assert_eq!(cesaro_avg(&xs).unwrap(), c(2.5));
        let alt: Vec<Complex64> = (1..=10).map(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
        assert_eq!(cesaro_avg(&alt).unwrap(), c(0.0));
        assert!(cesaro_avg(&[]).is_err());
    }

    #[test]
    fn log_avg_oracle_values() {
        let ones: Vec<Complex64> = (0..100).map(|_| c(1.0)).collect();
        assert!((log_avg(&ones).unwrap() - c(1.0)).norm() < 1e-14);
        // (-1)^n at N = 10: -0.645635/2.928968 (alternating harmonic over H_10)
        let alt: Vec<Complex64> = (1..=10).map(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let v = log_avg(&alt).unwrap();
        // rational oracle: num = -1627/2520, den = 7381/2520
        let expect = -1627f64 / 7381f64;
        assert!((v.re - expect).abs() < 1e-12);
        assert!((v.re + 0.220431).abs() < 1e-6);
    }

    #[test]
    fn prime_log_avg_constants() {
        let sieve = SegmentedFactorSieve::build(100).unwrap();
        let primes = sieve.primes_up_to(100, None).unwrap();
        let one = log_avg_primes(&primes, |_| c(1.0)).unwrap();
        assert!((one - c(1.0)).norm() < 1e-14);
        let neg = log_avg_primes(&primes, |_| c(-1.0)).unwrap();
        assert!((neg - c(-1.0)).norm() < 1e-14);
        assert!(log_avg_primes(&[], |_| c(1.0)).is_err());
    }

    #[test]
    fn density_diagnostic_examples() {
        assert_eq!(density_diagnostic(10, 1, |_| c(0.0)).unwrap(), 0.0);
        assert!((density_diagnostic(7, 2, |_| c(1.0)).unwrap() - 1.0).abs() < 1e-14);
        let v = density_diagnostic(10, 1, |p| c(1.0 / p[0] as f64)).unwrap();
        assert!((v - 0.2928968253968254).abs() < 1e-12); // H_10 / 10
        assert!(density_diagnostic(10, 4, |_| c(0.0)).is_err());
    }

    #[test]
    fn short_interval_variance_controls() {
        let sieve = SegmentedFactorSieve::build(200_000).unwrap();
        let one = MultFnSpec::one();
        assert_eq!(short_interval_variance(&one, 10, 1000, &sieve).unwrap(), 0.0);
        // (-1)^n control with even window: exact cancellation per window
        let v = short_interval_variance_seq(
            |n| if n % 2 == 0 { 1.0 } else { -1.0 },
            10,
            1000,
        )
        .unwrap();
        assert_eq!(v, 0.0);
        assert!(short_interval_variance(&MultFnSpec::archimedean(0.5).unwrap(), 10, 100, &sieve).is_err());
        let lam = MultFnSpec::liouville();
        let v10 = short_interval_variance(&lam, 10, 100_000, &sieve).unwrap();
        let v100 = short_interval_variance(&lam, 100, 100_000, &sieve).unwrap();
        assert!(v100 < v10, "variance shrinks with window length: {v100} vs {v10}");
        assert!(short_interval_variance(&lam, 100, 100, &sieve).is_err());
    }

    #[test]
    fn trace_scale_stability_even_indicator() {
        // |logavg(1_even, N) - 1/2| <= 2 / ln N for N >= 100
        for n in [100u64, 1000, 31623] {
            let r = averaged_trace_real(AverageKind::Logarithmic, &[n], |m| {
                if m % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            });
            let gap = (r.final_value().re - 0.5).abs();
            assert!(gap <= 2.0 / (n as f64).ln(), "N={n}: {gap}");
        }
    }

    #[test]
    fn harmonic_matches_known_value() {
        assert!((crate::numeric::harmonic(10) - 2.9289682539682538).abs() < 1e-14);
    }
}
