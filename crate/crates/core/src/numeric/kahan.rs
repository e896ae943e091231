//! Compensated summation with a fixed blockwise reduction order.
//!
//! Sums of 10^7..10^8 terms of size ~1/n lose digits under naive f64
//! accumulation, and the test contract requires bit-identical results for
//! any worker count. Both problems are solved the same way: the canonical
//! sum is defined as Kahan summation inside fixed blocks of [`BLOCK_LEN`]
//! indices, followed by a sequential Kahan fold of the block totals in
//! index order. Parallel execution only distributes the per-block sums,
//! which are independent, so the result never depends on thread count.

use num_complex::Complex64;
use rayon::prelude::*;

/// Indices per reduction block. The fold order is part of the output
/// contract; changing this changes results at the last-ulp level.
pub const BLOCK_LEN: u64 = 1 << 12;

/// Element types the compensated accumulator can carry.
pub trait Summand:
    Copy
    + Default
    + Send
    + Sync
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
{
}

impl Summand for f64 {}
impl Summand for Complex64 {}

/// Kahan (compensated) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan<T: Summand> {
    sum: T,
    comp: T,
}

impl<T: Summand> Kahan<T> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> T {
        self.sum
    }
}

/// One weighted block sum: numerator carries `weight(m) * term(m)`, the
/// denominator carries the bare weights.
#[derive(Debug, Clone, Copy, Default)]
struct BlockSum<T: Summand> {
    num: T,
    den: f64,
}

fn block_bounds(lo: u64, hi: u64, cuts: &[u64]) -> Vec<(u64, u64)> {
    // Grid of half-open (a, b] pieces: BLOCK_LEN-aligned boundaries plus
    // every cut (checkpoint), so snapshots land exactly between blocks.
    let mut bounds = Vec::new();
    let mut a = lo - 1;
    let mut cut_iter = cuts.iter().copied().filter(|&c| c >= lo && c <= hi).peekable();
    while a < hi {
        let aligned = (a / BLOCK_LEN + 1) * BLOCK_LEN;
        let mut b = aligned.min(hi);
        if let Some(&c) = cut_iter.peek() {
            if c > a && c <= b {
                b = c;
            }
        }
        if cut_iter.peek() == Some(&b) {
            cut_iter.next();
        }
        bounds.push((a + 1, b));
        a = b;
    }
    bounds
}

/// Weighted compensated reduction of `term(m)` for `m` in `1..=n_max` with
/// snapshots at each checkpoint.
///
/// `weight(m)` multiplies the numerator and is accumulated on its own as
/// the denominator, so the caller gets `(sum w(m) term(m), sum w(m))` per
/// checkpoint. Checkpoints must be strictly increasing, ending at `n_max`.
pub fn weighted_trace<T, F, W>(checkpoints: &[u64], term: F, weight: W) -> Vec<(u64, T, f64)>
where
    T: Summand + std::ops::Mul<f64, Output = T>,
    F: Fn(u64) -> T + Sync,
    W: Fn(u64) -> f64 + Sync,
{
    assert!(!checkpoints.is_empty(), "empty checkpoint list");
    let n_max = *checkpoints.last().unwrap();
    let bounds = block_bounds(1, n_max, checkpoints);

    let blocks: Vec<BlockSum<T>> = bounds
        .par_iter()
        .map(|&(a, b)| {
            let mut num = Kahan::<T>::new();
            let mut den = Kahan::<f64>::new();
            for m in a..=b {
                let w = weight(m);
                num.add(term(m) * w);
                den.add(w);
            }
            BlockSum { num: num.total(), den: den.total() }
        })
        .collect();

    let mut fold_num = Kahan::<T>::new();
    let mut fold_den = Kahan::<f64>::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0usize;
    for (i, blk) in blocks.iter().enumerate() {
        fold_num.add(blk.num);
        fold_den.add(blk.den);
        while next_cp < checkpoints.len() && checkpoints[next_cp] == bounds[i].1 {
            out.push((checkpoints[next_cp], fold_num.total(), fold_den.total()));
            next_cp += 1;
        }
    }
    debug_assert_eq!(out.len(), checkpoints.len());
    out
}

/// Unweighted variant: compensated sum of `term(m)` over `1..=n`.
pub fn block_sum<T, F>(n: u64, term: F) -> T
where
    T: Summand + std::ops::Mul<f64, Output = T>,
    F: Fn(u64) -> T + Sync,
{
    if n == 0 {
        return T::default();
    }
    weighted_trace(&[n], term, |_| 1.0)[0].1
}

/// Compensated harmonic sum H_n = sum_{m<=n} 1/m.
pub fn harmonic(n: u64) -> f64 {
    block_sum(n, |m| 1.0 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_harmonic() {
        let n = 1_000_000u64;
        let mut naive = 0f64;
        for m in 1..=n {
            naive += 1.0 / m as f64;
        }
        let kahan = harmonic(n);
        // Reference from reverse (ascending-magnitude) summation.
        let mut rev = 0f64;
        for m in (1..=n).rev() {
            rev += 1.0 / m as f64;
        }
        assert!((kahan - rev).abs() <= (naive - rev).abs());
        assert!((kahan - rev).abs() < 1e-11);
    }

    #[test]
    fn blocks_cover_checkpoints() {
        let b = block_bounds(1, 10_000, &[5, 4096, 5000, 10_000]);
        let mut prev = 0;
        for &(a, x) in &b {
            assert_eq!(a, prev + 1);
            prev = x;
        }
        assert_eq!(prev, 10_000);
        for cp in [5u64, 4096, 5000, 10_000] {
            assert!(b.iter().any(|&(_, x)| x == cp));
        }
    }

    #[test]
    fn trace_matches_direct_sum() {
        let cps = [7u64, 100, 12345];
        let trace = weighted_trace(&cps, |m| (m % 3) as f64, |m| 1.0 / m as f64);
        for &(n, num, den) in &trace {
            let mut dn = 0f64;
            let mut dd = 0f64;
            for m in (1..=n).rev() {
                dn += (m % 3) as f64 / m as f64;
                dd += 1.0 / m as f64;
            }
            assert!((num - dn).abs() < 1e-10, "num at {n}");
            assert!((den - dd).abs() < 1e-10, "den at {n}");
        }
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                weighted_trace(&[999, 100_000], |m| (m as f64).sin(), |m| 1.0 / m as f64)
            })
        };
        let a = run(1);
        let b = run(4);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.1.to_bits(), y.1.to_bits());
            assert_eq!(x.2.to_bits(), y.2.to_bits());
        }
    }
}
