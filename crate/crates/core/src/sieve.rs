//! Segmented smallest-prime-factor sieve producing lambda / mu / Omega
//! tables and prime lists over arbitrary windows of `[1, limit]`.
//!
//! A single pass per window accumulates, for every n, the number of prime
//! factors counted with multiplicity (so the Liouville function comes out
//! directly), the squarefree flag, and the product of all prime-power
//! divisors with p <= sqrt(window end). Whatever remains after that product
//! is either 1 or a single prime above the window root, which closes the
//! multiplicity count without any per-element trial division.
//!
//! Windows are independent: sieving `[a, b]` yields the same bytes whether
//! it is done in one piece or as any concatenation of sub-windows, which is
//! what makes parallel window sieving safe.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Entries per internal segment; scratch is ~10 bytes per entry, so this
/// keeps the working set near the L2 cache.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 18;

/// Memory ceiling for `build`; the base-prime list plus per-segment scratch
/// must fit under it.
#[derive(Debug, Clone, Copy)]
pub struct SieveBudget {
    pub max_bytes: u64,
}

impl Default for SieveBudget {
    fn default() -> Self {
        SieveBudget { max_bytes: 2 << 30 }
    }
}

/// Closed integer interval `[lo, hi]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
}

impl Window {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::domain(format!("invalid window [{lo}, {hi}]")));
        }
        Ok(Window { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Per-window arithmetic tables, indexed by `n - window.lo`.
///
/// Invariants: `lambda[n] = (-1)^big_omega[n]`, and `mobius[n]` equals
/// `lambda[n]` exactly when n is squarefree and 0 otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithmeticTable {
    pub window: Window,
    pub lambda: Vec<i8>,
    pub mobius: Vec<i8>,
    pub big_omega: Vec<u8>,
}

impl ArithmeticTable {
    #[inline]
    pub fn lambda_at(&self, n: u64) -> i8 {
        self.lambda[(n - self.window.lo) as usize]
    }

    #[inline]
    pub fn mobius_at(&self, n: u64) -> i8 {
        self.mobius[(n - self.window.lo) as usize]
    }

    #[inline]
    pub fn omega_at(&self, n: u64) -> u8 {
        self.big_omega[(n - self.window.lo) as usize]
    }

    /// Little-endian binary dump. Layout: magic `LGCT`, format version u32,
    /// lo u64, hi u64, then the lambda, mobius and big_omega arrays as raw
    /// bytes in that order.
    pub fn write_binary<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"LGCT")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&self.window.lo.to_le_bytes())?;
        w.write_all(&self.window.hi.to_le_bytes())?;
        w.write_all(&self.lambda.iter().map(|&v| v as u8).collect::<Vec<u8>>())?;
        w.write_all(&self.mobius.iter().map(|&v| v as u8).collect::<Vec<u8>>())?;
        w.write_all(&self.big_omega)?;
        Ok(())
    }

    pub fn read_binary<R: std::io::Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 24];
        r.read_exact(&mut head)?;
        if &head[0..4] != b"LGCT" {
            return Err(Error::parse("bad arithmetic-table magic"));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
        if version != 1 {
            return Err(Error::parse(format!("unsupported table version {version}")));
        }
        let lo = u64::from_le_bytes(head[8..16].try_into().unwrap());
        let hi = u64::from_le_bytes(head[16..24].try_into().unwrap());
        let window = Window::new(lo, hi)?;
        let len = window.len();
        let mut buf = vec![0u8; len * 3];
        r.read_exact(&mut buf)?;
        let lambda = buf[0..len].iter().map(|&b| b as i8).collect();
        let mobius = buf[len..2 * len].iter().map(|&b| b as i8).collect();
        let big_omega = buf[2 * len..].to_vec();
        Ok(ArithmeticTable { window, lambda, mobius, big_omega })
    }
}

/// Immutable sieve handle: base primes up to sqrt(limit) plus segmentation
/// parameters. Window sieving and factorization never allocate more than
/// one segment of scratch. An optional preloaded table (for example read
/// back from a cache file) serves window requests it covers by copy.
#[derive(Debug, Clone)]
pub struct SegmentedFactorSieve {
    limit: u64,
    base_primes: Vec<u64>,
    segment_len: usize,
    preloaded: Option<std::sync::Arc<ArithmeticTable>>,
}

impl SegmentedFactorSieve {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with(limit, DEFAULT_SEGMENT_LEN, SieveBudget::default())
    }

    pub fn build_with(limit: u64, segment_len: usize, budget: SieveBudget) -> Result<Self> {
        if limit < 2 {
            return Err(Error::domain(format!("sieve limit {limit} < 2")));
        }
        let root = limit.isqrt();
        // pi(x) <~ 1.3 x / ln x for x >= 17
        let est_primes = if root < 17 { 8 } else { (1.3 * root as f64 / (root as f64).ln()) as u64 };
        let est_bytes = est_primes * 8 + segment_len as u64 * 10;
        if est_bytes > budget.max_bytes {
            return Err(Error::resource(format!(
                "sieve for limit {limit} needs ~{est_bytes} bytes, over the {} byte budget",
                budget.max_bytes
            )));
        }
        let base_primes = simple_primes(root);
        Ok(SegmentedFactorSieve { limit, base_primes, segment_len, preloaded: None })
    }

    /// Install a precomputed table (e.g. loaded from a cache file); later
    /// window requests inside it are served by copy instead of sieving.
    pub fn preload_table(&mut self, table: ArithmeticTable) -> Result<()> {
        if table.window.hi > self.limit {
            return Err(Error::domain(format!(
                "preloaded table reaches {} beyond the sieve limit {}",
                table.window.hi, self.limit
            )));
        }
        let len = table.window.len();
        if table.lambda.len() != len || table.mobius.len() != len || table.big_omega.len() != len {
            return Err(Error::domain("preloaded table arrays disagree with its window".to_string()));
        }
        self.preloaded = Some(std::sync::Arc::new(table));
        Ok(())
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn base_primes(&self) -> &[u64] {
        &self.base_primes
    }

    /// Prime factorization of `n <= limit` as (prime, exponent) pairs in
    /// increasing prime order; empty exactly for n = 1.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n == 0 || n > self.limit {
            return Err(Error::domain(format!("factorize({n}) outside [1, {}]", self.limit)));
        }
        let mut rem = n;
        let mut out = Vec::new();
        for &p in &self.base_primes {
            if p * p > rem {
                break;
            }
            if rem % p == 0 {
                let mut e = 0u32;
                while rem % p == 0 {
                    rem /= p;
                    e += 1;
                }
                out.push((p, e));
            }
        }
        if rem > 1 {
            out.push((rem, 1));
        }
        Ok(out)
    }

    /// Primes `<= n`, optionally restricted to the class `d Z + 1`.
    pub fn primes_up_to(&self, n: u64, class: Option<u64>) -> Result<Vec<u64>> {
        if n > self.limit {
            return Err(Error::domain(format!("prime bound {n} exceeds limit {}", self.limit)));
        }
        let keep = |p: u64| match class {
            None => true,
            Some(0) => true,
            Some(1) => true,
            Some(d) => p % d == 1,
        };
        let mut out = Vec::new();
        if n < 2 {
            return Ok(out);
        }
        let mut lo = 2u64;
        let mut flags = vec![true; self.segment_len];
        while lo <= n {
            let hi = (lo + self.segment_len as u64 - 1).min(n);
            let len = (hi - lo + 1) as usize;
            flags[..len].fill(true);
            for &p in &self.base_primes {
                if p * p > hi {
                    break;
                }
                let start = (p * p).max(lo.div_ceil(p) * p);
                let mut m = start;
                while m <= hi {
                    flags[(m - lo) as usize] = false;
                    m += p;
                }
            }
            for i in 0..len {
                if flags[i] {
                    let p = lo + i as u64;
                    if keep(p) {
                        out.push(p);
                    }
                }
            }
            lo = hi + 1;
        }
        Ok(out)
    }

    /// Lambda / mu / Omega over a window, segmented internally and sieved in
    /// parallel across segments.
    pub fn arithmetic_table(&self, window: Window) -> Result<ArithmeticTable> {
        if window.hi > self.limit {
            return Err(Error::domain(format!(
                "window [{}, {}] outside sieve range [1, {}]",
                window.lo, window.hi, self.limit
            )));
        }
        if let Some(t) = &self.preloaded {
            if t.window.lo <= window.lo && window.hi <= t.window.hi {
                let a = (window.lo - t.window.lo) as usize;
                let b = (window.hi - t.window.lo + 1) as usize;
                return Ok(ArithmeticTable {
                    window,
                    lambda: t.lambda[a..b].to_vec(),
                    mobius: t.mobius[a..b].to_vec(),
                    big_omega: t.big_omega[a..b].to_vec(),
                });
            }
        }
        let len = window.len();
        let mut lambda = vec![0i8; len];
        let mut mobius = vec![0i8; len];
        let mut big_omega = vec![0u8; len];

        let seg = self.segment_len;
        lambda
            .par_chunks_mut(seg)
            .zip(mobius.par_chunks_mut(seg))
            .zip(big_omega.par_chunks_mut(seg))
            .enumerate()
            .for_each(|(ci, ((lam, mob), omg))| {
                let a = window.lo + (ci * seg) as u64;
                let b = a + lam.len() as u64 - 1;
                self.sieve_segment(a, b, lam, mob, omg);
            });

        Ok(ArithmeticTable { window, lambda, mobius, big_omega })
    }

    fn sieve_segment(&self, a: u64, b: u64, lam: &mut [i8], mob: &mut [i8], omg: &mut [u8]) {
        let len = (b - a + 1) as usize;
        let mut part = vec![1u64; len];
        let mut sqfree = vec![true; len];
        let root = b.isqrt();
        for &p in &self.base_primes {
            if p > root {
                break;
            }
            let mut m = a.div_ceil(p) * p;
            while m <= b {
                let i = (m - a) as usize;
                omg[i] += 1;
                part[i] *= p;
                m += p;
            }
            let mut q = p * p;
            loop {
                let mut m = a.div_ceil(q) * q;
                while m <= b {
                    let i = (m - a) as usize;
                    omg[i] += 1;
                    part[i] *= p;
                    sqfree[i] = false;
                    m += q;
                }
                match q.checked_mul(p) {
                    Some(next) if next <= b => q = next,
                    _ => break,
                }
            }
        }
        for i in 0..len {
            let n = a + i as u64;
            let mut o = omg[i];
            if part[i] != n {
                o += 1; // exactly one prime factor above sqrt(b)
                omg[i] = o;
            }
            let l = if o % 2 == 0 { 1 } else { -1 };
            lam[i] = l;
            mob[i] = if sqfree[i] { l } else { 0 };
        }
    }

    /// Visit every n in the window with its full factorization, ascending.
    /// Sequential; meant for custom multiplicative functions.
    pub fn for_each_factorization<F>(&self, window: Window, mut visit: F) -> Result<()>
    where
        F: FnMut(u64, &[(u64, u32)]),
    {
        if window.hi > self.limit {
            return Err(Error::domain(format!(
                "window [{}, {}] outside sieve range [1, {}]",
                window.lo, window.hi, self.limit
            )));
        }
        let seg = self.segment_len as u64;
        let mut a = window.lo;
        let mut factors: Vec<Vec<(u64, u32)>> = Vec::new();
        let mut rem: Vec<u64> = Vec::new();
        while a <= window.hi {
            let b = (a + seg - 1).min(window.hi);
            let len = (b - a + 1) as usize;
            factors.iter_mut().for_each(Vec::clear);
            factors.resize_with(len.max(factors.len()), Vec::new);
            rem.clear();
            rem.extend(a..=b);
            let root = b.isqrt();
            for &p in &self.base_primes {
                if p > root {
                    break;
                }
                let mut m = a.div_ceil(p) * p;
                while m <= b {
                    let i = (m - a) as usize;
                    let mut e = 0u32;
                    while rem[i] % p == 0 {
                        rem[i] /= p;
                        e += 1;
                    }
                    factors[i].push((p, e));
                    m += p;
                }
            }
            for i in 0..len {
                if rem[i] > 1 {
                    factors[i].push((rem[i], 1));
                }
                visit(a + i as u64, &factors[i]);
            }
            a = b + 1;
        }
        Ok(())
    }
}

fn simple_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}
