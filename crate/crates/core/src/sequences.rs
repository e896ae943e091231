//! Integer sequence families on N^r: Beatty, power-floor, polynomial,
//! linear-form, visit-time and explicit-table generators, together with
//! empirical and exact checkers for independence, weak independence, joint
//! congruence equidistribution, and word complexity.
//!
//! Independence of a family cannot be certified by any finite computation,
//! so every verdict carries its (K, N) scope; exact rank certificates are
//! produced only for polynomial and linear-form members, where vanishing of
//! an integer combination is a linear-algebra fact.

use crate::error::{Error, Result};
use crate::numeric::{frac_mul_u64, Fixed128, SignedFixed};
use rayon::prelude::*;
use std::collections::HashSet;

/// Scan ceiling for visit-time searches; irrational rotations always
/// terminate long before this, the cap guards rational inputs.
pub const DEFAULT_VISIT_SCAN_CAP: u64 = 100_000_000;

/// One member of a family: a map N^r -> N.
#[derive(Debug, Clone)]
pub enum Generator {
    /// n -> floor(n*alpha + beta)
    Beatty { alpha: Fixed128, beta: SignedFixed },
    /// n -> floor(n^(num/den)), exponent in lowest terms
    PowerFloor { num: u32, den: u32 },
    /// n -> c_0 + c_1 n + c_2 n^2 + ...
    Polynomial { coeffs: Vec<i64> },
    /// (n_1..n_r) -> sum_i c_i n_i
    LinearForm { coeffs: Vec<i64> },
    /// n -> n-th visit time of {k^d alpha} to [lo, hi), precomputed
    Visit { d: u32, alpha: Fixed128, lo: Fixed128, hi: Fixed128, times: Vec<u64> },
    /// explicit values a(1), a(2), ...
    Table { values: Vec<u64> },
}

impl Generator {
    pub fn beatty(alpha: Fixed128, beta: SignedFixed) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::domain("beatty requires alpha > 0".to_string()));
        }
        Ok(Generator::Beatty { alpha, beta })
    }

    pub fn power_floor(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::domain("power_floor exponent must be positive".to_string()));
        }
        let g = crate::numeric::gcd(num as u64, den as u64) as u32;
        Ok(Generator::PowerFloor { num: num / g, den: den / g })
    }

    pub fn visit(d: u32, alpha: Fixed128, lo: Fixed128, hi: Fixed128, count: usize) -> Result<Self> {
        let times = visit_times(d, alpha, lo, hi, count, DEFAULT_VISIT_SCAN_CAP)?;
        Ok(Generator::Visit { d, alpha, lo, hi, times })
    }

    /// Number of arguments the generator consumes.
    pub fn arity(&self) -> usize {
        match self {
            Generator::LinearForm { coeffs } => coeffs.len(),
            _ => 1,
        }
    }

    /// Exact value at a lattice point.
    pub fn evaluate(&self, point: &[u64]) -> Result<u64> {
        match self {
            Generator::Beatty { alpha, beta } => beatty_floor(alpha, beta, point[0]),
            Generator::PowerFloor { num, den } => power_floor_value(point[0], *num, *den),
            Generator::Polynomial { coeffs } => {
                let n = point[0] as i128;
                let mut acc: i128 = 0;
                let mut pow: i128 = 1;
                for &c in coeffs {
                    acc = acc
                        .checked_add((c as i128).checked_mul(pow).ok_or_else(overflow_err)?)
                        .ok_or_else(overflow_err)?;
                    pow = pow.checked_mul(n).ok_or_else(overflow_err)?;
                }
                u64::try_from(acc).map_err(|_| {
                    Error::domain(format!("polynomial value {acc} outside N at n = {}", point[0]))
                })
            }
            Generator::LinearForm { coeffs } => {
                if coeffs.len() != point.len() {
                    return Err(Error::domain(format!(
                        "linear form arity {} vs point arity {}",
                        coeffs.len(),
                        point.len()
                    )));
                }
                let mut acc: i128 = 0;
                for (&c, &x) in coeffs.iter().zip(point) {
                    acc += c as i128 * x as i128;
                }
                u64::try_from(acc)
                    .map_err(|_| Error::domain(format!("linear form value {acc} outside N")))
            }
            Generator::Visit { times, .. } => {
                let n = point[0] as usize;
                times.get(n - 1).copied().ok_or_else(|| {
                    Error::resource(format!(
                        "visit-time cache holds {} entries, index {n} requested; rebuild with a larger count",
                        times.len()
                    ))
                })
            }
            Generator::Table { values } => {
                let n = point[0] as usize;
                values.get(n - 1).copied().ok_or_else(|| {
                    Error::domain(format!("table sequence has {} entries, index {n} requested", values.len()))
                })
            }
        }
    }

    /// Canonical descriptor; [`Generator::parse`] inverts it.
    pub fn descriptor(&self) -> String {
        match self {
            Generator::Beatty { alpha, beta } => {
                format!("beatty:{}:{}", fixed_desc(alpha), signed_desc(beta))
            }
            Generator::PowerFloor { num, den } => format!("powerfloor:{num}/{den}"),
            Generator::Polynomial { coeffs } => format!(
                "poly:{}",
                coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            ),
            Generator::LinearForm { coeffs } => format!(
                "linform:{}",
                coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            ),
            Generator::Visit { d, alpha, lo, hi, .. } => format!(
                "visit:{d}:{}:{}:{}",
                fixed_desc(alpha),
                fixed_desc(lo),
                fixed_desc(hi)
            ),
            Generator::Table { values } => format!(
                "table:{}",
                values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }

    /// Parse `beatty:sqrt2:0`, `poly:0,0,1`, `powerfloor:1.5` (or `3/2`),
    /// `visit:1:sqrt2:0:0.5`, `linform:1,0`, `table:1,2,4`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        let bad = |m: &str| Error::parse(format!("sequence descriptor `{text}`: {m}"));
        match parts[0] {
            "beatty" => {
                let alpha = Fixed128::parse(parts.get(1).ok_or_else(|| bad("missing alpha"))?)?;
                let beta = match parts.get(2) {
                    Some(s) => SignedFixed::parse(s)?,
                    None => SignedFixed::ZERO,
                };
                Generator::beatty(alpha, beta)
            }
            "powerfloor" => {
                let spec = parts.get(1).ok_or_else(|| bad("missing exponent"))?;
                let (num, den) = parse_rational(spec)?;
                Generator::power_floor(num, den)
            }
            "poly" => {
                let coeffs = parse_i64_list(parts.get(1).ok_or_else(|| bad("missing coefficients"))?)?;
                Ok(Generator::Polynomial { coeffs })
            }
            "linform" => {
                let coeffs = parse_i64_list(parts.get(1).ok_or_else(|| bad("missing coefficients"))?)?;
                Ok(Generator::LinearForm { coeffs })
            }
            "visit" => {
                let d: u32 = parts
                    .get(1)
                    .ok_or_else(|| bad("missing power d"))?
                    .parse()
                    .map_err(|_| bad("bad power d"))?;
                let alpha = Fixed128::parse(parts.get(2).ok_or_else(|| bad("missing alpha"))?)?;
                let lo = Fixed128::parse(parts.get(3).ok_or_else(|| bad("missing interval start"))?)?;
                let hi = Fixed128::parse(parts.get(4).ok_or_else(|| bad("missing interval end"))?)?;
                let count: usize = match parts.get(5) {
                    Some(s) => s.parse().map_err(|_| bad("bad count"))?,
                    None => 1 << 20,
                };
                Generator::visit(d, alpha, lo, hi, count)
            }
            "table" => {
                let values: Vec<u64> = parts
                    .get(1)
                    .ok_or_else(|| bad("missing values"))?
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| bad("bad table value")))
                    .collect::<Result<_>>()?;
                Ok(Generator::Table { values })
            }
            other => Err(bad(&format!("unknown generator `{other}`"))),
        }
    }

    /// Integer polynomial coefficient view for exact certificates:
    /// `Some(c)` when the member is the polynomial sum c_i n^i on r = 1.
    fn poly_coeffs(&self) -> Option<Vec<i64>> {
        match self {
            Generator::Polynomial { coeffs } => Some(coeffs.clone()),
            Generator::LinearForm { coeffs } if coeffs.len() == 1 => Some(vec![0, coeffs[0]]),
            _ => None,
        }
    }
}

fn overflow_err() -> Error {
    Error::overflow("polynomial evaluation exceeded 64-bit range".to_string())
}

fn fixed_desc(x: &Fixed128) -> String {
    for name in ["sqrt2", "sqrt3", "sqrt5", "pi", "e", "phi"] {
        if Fixed128::parse(name).unwrap() == *x {
            return name.to_string();
        }
    }
    // exact decimal expansion of the 128 fractional bits, so descriptors
    // of arbitrary constants re-parse to the same bits
    let mut out = x.int_part().to_string();
    let mut frac = x.frac_bits();
    if frac != 0 {
        out.push('.');
        while frac != 0 {
            let (digit, rest) = frac_mul_u64(frac, 10);
            out.push((b'0' + digit as u8) as char);
            frac = rest;
        }
    }
    out
}

fn signed_desc(x: &SignedFixed) -> String {
    if x.negative {
        format!("-{}", fixed_desc(&x.magnitude))
    } else {
        fixed_desc(&x.magnitude)
    }
}

fn parse_rational(s: &str) -> Result<(u32, u32)> {
    if let Some((a, b)) = s.split_once('/') {
        let num = a.parse().map_err(|_| Error::parse(format!("bad exponent `{s}`")))?;
        let den = b.parse().map_err(|_| Error::parse(format!("bad exponent `{s}`")))?;
        return Ok((num, den));
    }
    // decimal exponent like 1.5 -> 15/10
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if frac.len() > 6 {
        return Err(Error::parse(format!(
            "exponent `{s}` has too many decimals; use an explicit fraction p/q"
        )));
    }
    let scale = 10u64.pow(frac.len() as u32);
    let whole: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| Error::parse(format!("bad exponent `{s}`")))? };
    let fpart: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| Error::parse(format!("bad exponent `{s}`")))? };
    let num = whole * scale + fpart;
    u32::try_from(num)
        .ok()
        .zip(u32::try_from(scale).ok())
        .ok_or_else(|| Error::parse(format!("exponent `{s}` out of range")))
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::parse(format!("bad integer `{t}`"))))
        .collect()
}

/// floor(n*alpha + beta) with exact fixed-point arithmetic.
pub fn beatty_floor(alpha: &Fixed128, beta: &SignedFixed, n: u64) -> Result<u64> {
    let (int, frac) = alpha.mul_u64(n);
    let b = &beta.magnitude;
    let (int, _frac) = if beta.negative {
        let (bf, borrow) = frac.overflowing_sub(b.frac_bits());
        let sub = b.int_part() as u128 + borrow as u128;
        if int < sub {
            return Err(Error::domain(format!(
                "beatty value at n = {n} is negative"
            )));
        }
        (int - sub, bf)
    } else {
        let (sf, carry) = frac.overflowing_add(b.frac_bits());
        (int + b.int_part() as u128 + carry as u128, sf)
    };
    u64::try_from(int).map_err(|_| Error::overflow(format!("beatty value at n = {n} exceeds u64")))
}

/// floor(n^(num/den)) via the exact integer den-th root of n^num.
pub fn power_floor_value(n: u64, num: u32, den: u32) -> Result<u64> {
    if n == 0 {
        return Ok(0);
    }
    let pow = (n as u128)
        .checked_pow(num)
        .ok_or_else(|| Error::overflow(format!("{n}^{num} exceeds u128 in power_floor")))?;
    let root = nth_root_floor(pow, den);
    u64::try_from(root).map_err(|_| Error::overflow(format!("power_floor({n}) exceeds u64")))
}

fn nth_root_floor(x: u128, k: u32) -> u128 {
    if k == 1 || x <= 1 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64) as u128;
    // correct the f64 estimate exactly
    while r > 0 && r.checked_pow(k).is_none_or(|p| p > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|p| p <= x) {
        r += 1;
    }
    r
}

/// First `count` values of {n in N : {n^d alpha} in [lo, hi)}, ascending.
pub fn visit_times(
    d: u32,
    alpha: Fixed128,
    lo: Fixed128,
    hi: Fixed128,
    count: usize,
    scan_cap: u64,
) -> Result<Vec<u64>> {
    if !(lo < hi && hi <= Fixed128::ONE) {
        return Err(Error::domain("visit interval needs 0 <= lo < hi <= 1".to_string()));
    }
    let lo_bits = lo.frac_bits();
    let full = hi == Fixed128::ONE;
    let hi_bits = hi.frac_bits();
    let mut out = Vec::with_capacity(count);
    let mut n = 1u64;
    while out.len() < count {
        if n > scan_cap {
            return Err(Error::resource(format!(
                "visit-time scan passed {scan_cap} without finding {count} values; \
                 the interval may be unreachable for this alpha"
            )));
        }
        let arg = checked_pow_u64(n, d)?;
        let frac = alpha.frac_mul(arg);
        if full || (frac >= lo_bits && frac < hi_bits) {
            out.push(n);
        }
        n += 1;
    }
    Ok(out)
}

fn checked_pow_u64(n: u64, d: u32) -> Result<u64> {
    n.checked_pow(d)
        .ok_or_else(|| Error::overflow(format!("{n}^{d} exceeds u64 in visit scan")))
}

/// l sequences a_1..a_l on N^r.
#[derive(Debug, Clone)]
pub struct SequenceFamily {
    arity: usize,
    members: Vec<Generator>,
}

impl SequenceFamily {
    pub fn new(members: Vec<Generator>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::domain("family needs at least one member".to_string()));
        }
        let arity = members.iter().map(|g| g.arity()).max().unwrap();
        for g in &members {
            if g.arity() != arity && g.arity() != 1 {
                return Err(Error::domain(format!(
                    "member arities disagree: {} vs {arity}",
                    g.arity()
                )));
            }
            if arity > 1 && !matches!(g, Generator::LinearForm { .. }) {
                return Err(Error::domain(
                    "families on N^r with r > 1 support linear-form members only".to_string(),
                ));
            }
        }
        Ok(SequenceFamily { arity, members })
    }

    pub fn parse(descriptors: &[&str]) -> Result<Self> {
        let members = descriptors.iter().map(|d| Generator::parse(d)).collect::<Result<_>>()?;
        SequenceFamily::new(members)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Generator] {
        &self.members
    }

    pub fn member(&self, j: usize) -> Result<&Generator> {
        self.members
            .get(j)
            .ok_or_else(|| Error::domain(format!("member index {j} out of range")))
    }

    pub fn evaluate(&self, j: usize, point: &[u64]) -> Result<u64> {
        if point.len() != self.arity {
            return Err(Error::domain(format!(
                "point arity {} vs family arity {}",
                point.len(),
                self.arity
            )));
        }
        let g = self.member(j)?;
        if g.arity() == 1 {
            g.evaluate(&point[..1])
        } else {
            g.evaluate(point)
        }
    }

    pub fn descriptors(&self) -> Vec<String> {
        self.members.iter().map(|g| g.descriptor()).collect()
    }
}

/// Per-coefficient-vector outcome of an independence scan.
#[derive(Debug, Clone)]
pub struct CoefficientVerdict {
    pub k: Vec<i64>,
    pub solutions: u64,
    pub solutions_half_horizon: u64,
    /// largest |n| (coordinate sum) among solutions, 0 when none
    pub largest_solution: u64,
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndependenceMode {
    Independent,
    WeaklyIndependent,
}

/// Scan outcome with explicit (K, N) scope; `certificate` carries an exact
/// rank argument when one exists, `counterexample` the first failing k.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub mode: IndependenceMode,
    pub coefficient_bound: i64,
    pub horizon: u64,
    pub arity: usize,
    pub per_k: Vec<CoefficientVerdict>,
    pub passed: bool,
    pub certificate: Option<String>,
    pub counterexample: Option<Vec<i64>>,
}

/// Weak-independence pass threshold: density of the zero set must come in
/// under this and shrink from N/2 to N.
pub const WEAK_DENSITY_THRESHOLD: f64 = 1e-2;

/// Enumerate every nonzero k with max |k_j| <= K (up to sign) and count
/// solutions of sum k_j a_j(n) = 0 over [N]^r. Pass verdict: no k keeps
/// solutions beyond the first half of the horizon. For all-polynomial
/// families on r = 1 an exact rational rank certificate decides instead.
pub fn check_independence(family: &SequenceFamily, k_bound: i64, horizon: u64) -> Result<IndependenceReport> {
    scan_independence(family, k_bound, horizon, IndependenceMode::Independent)
}

/// Weak independence: per-k zero-set density must be below
/// [`WEAK_DENSITY_THRESHOLD`] with a decreasing trend between the horizons
/// N/2 and N.
pub fn check_weak_independence(
    family: &SequenceFamily,
    k_bound: i64,
    horizon: u64,
) -> Result<IndependenceReport> {
    scan_independence(family, k_bound, horizon, IndependenceMode::WeaklyIndependent)
}

fn scan_independence(
    family: &SequenceFamily,
    k_bound: i64,
    horizon: u64,
    mode: IndependenceMode,
) -> Result<IndependenceReport> {
    if k_bound < 1 || horizon < 1 {
        return Err(Error::domain("independence scan needs K >= 1 and N >= 1".to_string()));
    }
    let ell = family.len();
    let r = family.arity();
    let total_points = (horizon as u128).pow(r as u32);
    if total_points > 1u128 << 33 {
        return Err(Error::resource(format!(
            "independence scan over [{horizon}]^{r} has {total_points} points; shrink N"
        )));
    }

    // exact rank data: polynomial families on r = 1, linear forms on any r
    let mut poly_rank = None;
    let mut form_rank = None;
    if r == 1 {
        let coeffs: Option<Vec<Vec<i64>>> =
            family.members().iter().map(|g| g.poly_coeffs()).collect();
        if let Some(rows) = coeffs {
            poly_rank = Some(rational_rank(&rows));
        }
    } else {
        let coeffs: Option<Vec<Vec<i64>>> = family
            .members()
            .iter()
            .map(|g| match g {
                Generator::LinearForm { coeffs } => Some(coeffs.clone()),
                _ => None,
            })
            .collect();
        if let Some(rows) = coeffs {
            form_rank = Some(rational_rank(&rows));
        }
    }
    let certificate = match (poly_rank, form_rank) {
        (Some(rank), _) => Some(format!(
            "polynomial members: coefficient rank {rank} of {ell} over Q{}",
            if rank == ell { " (linearly independent)" } else { " (dependent)" }
        )),
        (_, Some(rank)) => Some(format!(
            "linear forms: coefficient rank {rank} of {ell} over Q{}",
            if rank == ell { " (weak independence certified)" } else { " (dependent)" }
        )),
        _ => None,
    };

    // cache member values along the scan order
    let values = family_values(family, horizon)?;

    let ks = half_space_vectors(ell, k_bound);
    let half = horizon / 2;
    let mut per_k: Vec<CoefficientVerdict> = ks
        .par_iter()
        .map(|k| {
            let mut solutions = 0u64;
            let mut solutions_half = 0u64;
            let mut largest = 0u64;
            for (idx, row) in values.chunks_exact(ell).enumerate() {
                let mut acc: i128 = 0;
                for (j, &kj) in k.iter().enumerate() {
                    acc += kj as i128 * row[j] as i128;
                }
                if acc == 0 {
                    solutions += 1;
                    let norm = point_norm(idx as u64, horizon, r);
                    if norm > largest {
                        largest = norm;
                    }
                    if within_half(idx as u64, half, horizon, r) {
                        solutions_half += 1;
                    }
                }
            }
            CoefficientVerdict {
                k: k.clone(),
                solutions,
                solutions_half_horizon: solutions_half,
                largest_solution: largest,
                density: solutions as f64 / total_points as f64,
            }
        })
        .collect();
    per_k.sort_by(|a, b| b.solutions.cmp(&a.solutions).then_with(|| a.k.cmp(&b.k)));

    let empirical_witness =
        || per_k.first().filter(|v| v.solutions > 0).map(|v| v.k.clone());
    let (passed, counterexample) = match mode {
        IndependenceMode::Independent => {
            if let Some(rank) = poly_rank {
                // the certificate replaces enumeration for these families
                if rank == ell {
                    (true, None)
                } else {
                    (false, empirical_witness())
                }
            } else if form_rank.is_some_and(|rank| rank < ell) {
                (false, empirical_witness())
            } else {
                empirical_independent(&per_k, horizon, r)
            }
        }
        IndependenceMode::WeaklyIndependent => {
            let mut bad = None;
            for v in &per_k {
                let half_density = if half == 0 {
                    0.0
                } else {
                    v.solutions_half_horizon as f64 / (half as u128).pow(r as u32) as f64
                };
                let shrinking = v.density <= half_density || v.solutions == 0;
                if v.density > WEAK_DENSITY_THRESHOLD || !shrinking {
                    bad = Some(v.k.clone());
                    break;
                }
            }
            (bad.is_none(), bad)
        }
    };

    Ok(IndependenceReport {
        mode,
        coefficient_bound: k_bound,
        horizon,
        arity: r,
        per_k,
        passed,
        certificate,
        counterexample,
    })
}

fn empirical_independent(
    per_k: &[CoefficientVerdict],
    horizon: u64,
    r: usize,
) -> (bool, Option<Vec<i64>>) {
    let cutoff = horizon * r as u64 / 2;
    for v in per_k {
        if v.solutions > 0 && v.largest_solution > cutoff {
            return (false, Some(v.k.clone()));
        }
    }
    (true, None)
}

/// All nonzero k with max |k_j| <= bound, keeping one of each +-k pair
/// (the zero sets coincide).
fn half_space_vectors(ell: usize, bound: i64) -> Vec<Vec<i64>> {
    let span = (2 * bound + 1) as u64;
    let total = span.pow(ell as u32);
    let mut out = Vec::new();
    'outer: for code in 0..total {
        let mut k = vec![0i64; ell];
        let mut c = code;
        for slot in k.iter_mut() {
            *slot = (c % span) as i64 - bound;
            c /= span;
        }
        for &kj in &k {
            if kj > 0 {
                break;
            }
            if kj < 0 {
                continue 'outer; // mirror of a kept vector
            }
        }
        if k.iter().any(|&kj| kj != 0) {
            out.push(k);
        }
    }
    out
}

/// a_j(n) over the scan order of [N]^r, flattened with stride l.
fn family_values(family: &SequenceFamily, horizon: u64) -> Result<Vec<u64>> {
    let r = family.arity();
    let ell = family.len();
    let total = (horizon as u128).pow(r as u32) as u64;
    let mut values = Vec::with_capacity(total as usize * ell);
    let mut point = vec![1u64; r];
    for idx in 0..total {
        let mut c = idx;
        for slot in point.iter_mut() {
            *slot = c % horizon + 1;
            c /= horizon;
        }
        for j in 0..ell {
            values.push(family.evaluate(j, &point)?);
        }
    }
    Ok(values)
}

fn point_norm(idx: u64, horizon: u64, r: usize) -> u64 {
    let mut c = idx;
    let mut norm = 0u64;
    for _ in 0..r {
        norm += c % horizon + 1;
        c /= horizon;
    }
    norm
}

fn within_half(idx: u64, half: u64, horizon: u64, r: usize) -> bool {
    let mut c = idx;
    for _ in 0..r {
        if c % horizon + 1 > half {
            return false;
        }
        c /= horizon;
    }
    true
}

/// Fraction-free Gaussian elimination rank of integer rows over Q.
fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<i128> = r.iter().map(|&x| x as i128).collect();
            v.resize(width, 0);
            v
        })
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let pv = m[rank][col];
        for i in rank + 1..m.len() {
            let f = m[i][col];
            if f == 0 {
                continue;
            }
            for c in col..width {
                m[i][c] = m[i][c] * pv - m[rank][c] * f;
            }
            // keep entries bounded
            let g = m[i][col..].iter().fold(0i128, |g, &x| gcd_i128(g, x));
            if g > 1 {
                for c in col..width {
                    m[i][c] /= g;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Worst congruence-class discrepancy over moduli u <= u_bound.
#[derive(Debug, Clone)]
pub struct CongruenceReport {
    pub modulus_bound: u64,
    pub horizon: u64,
    /// max over u and k (not all 0 mod u) of |E e(sum k_j a_j(n) / u)|
    pub worst: f64,
    pub worst_modulus: u64,
    pub worst_k: Vec<i64>,
}

/// max_{2<=u<=U} max_{k not = 0 mod u} |E_{n in [N]^r} e(sum k_j a_j(n)/u)|,
/// computed from residue counts so every k costs O(u^l) after one O(N^r)
/// counting pass per u.
pub fn check_congruence_equidistribution(
    family: &SequenceFamily,
    modulus_bound: u64,
    horizon: u64,
) -> Result<CongruenceReport> {
    if modulus_bound < 2 {
        return Err(Error::domain("congruence check needs U >= 2".to_string()));
    }
    let ell = family.len();
    for u in 2..=modulus_bound {
        let classes = (u as u128).pow(ell as u32);
        if classes.saturating_mul(classes) > 1u128 << 28 {
            return Err(Error::resource(format!(
                "congruence enumeration at u = {u} needs {classes} residue classes; \
                 lower U or the family size"
            )));
        }
    }
    let values = family_values(family, horizon)?;
    let total = (values.len() / ell) as f64;

    let mut worst = -1.0f64;
    let mut worst_modulus = 0;
    let mut worst_k = Vec::new();
    for u in 2..=modulus_bound {
        let uu = u as usize;
        let classes = uu.pow(ell as u32);
        let mut counts = vec![0u64; classes];
        for row in values.chunks_exact(ell) {
            let mut code = 0usize;
            for &a in row.iter().rev() {
                code = code * uu + (a % u) as usize;
            }
            counts[code] += 1;
        }
        // precompute residue decode per class lazily inside the k loop
        let roots: Vec<num_complex::Complex64> =
            (0..u).map(|t| crate::numeric::root_of_unity(t as i64, u)).collect();
        let mut k = vec![0i64; ell];
        'k: loop {
            // advance mixed-radix k over {0..u-1}^ell, skipping all-zero
            let mut i = 0;
            loop {
                if i == ell {
                    break 'k;
                }
                k[i] += 1;
                if k[i] < u as i64 {
                    break;
                }
                k[i] = 0;
                i += 1;
            }
            let mut num = crate::numeric::Kahan::<num_complex::Complex64>::new();
            for (code, &cnt) in counts.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                let mut phase = 0u64;
                let mut c = code;
                for &kj in k.iter() {
                    let a = (c % uu) as u64;
                    c /= uu;
                    phase = (phase + (kj as u64) * a) % u;
                }
                num.add(roots[phase as usize] * cnt as f64);
            }
            let stat = num.total().norm() / total;
            if stat > worst {
                worst = stat;
                worst_modulus = u;
                worst_k = k.clone();
            }
        }
    }
    Ok(CongruenceReport { modulus_bound, horizon, worst, worst_modulus, worst_k })
}

/// Count of distinct length-l factors of the binary word w(1..=n).
pub fn word_complexity(w: &[u8], l: usize, n: usize) -> Result<u64> {
    if l == 0 || l > n {
        return Err(Error::domain(format!("factor length {l} not in [1, {n}]")));
    }
    if n > w.len() {
        return Err(Error::domain(format!("word has {} symbols, {n} requested", w.len())));
    }
    if l <= 128 {
        let mut set = HashSet::new();
        let mut cur: u128 = 0;
        let mask: u128 = if l == 128 { u128::MAX } else { (1u128 << l) - 1 };
        for (i, &b) in w[..n].iter().enumerate() {
            cur = ((cur << 1) | (b != 0) as u128) & mask;
            if i + 1 >= l {
                set.insert(cur);
            }
        }
        Ok(set.len() as u64)
    } else {
        let mut set: HashSet<&[u8]> = HashSet::new();
        for i in 0..=(n - l) {
            set.insert(&w[i..i + l]);
        }
        Ok(set.len() as u64)
    }
}

/// Indicator word of the range of a strictly increasing sequence on [1, n]:
/// out[i-1] = 1 iff i is one of the values.
pub fn indicator_of_range(values: &[u64], n: u64) -> Result<Vec<u8>> {
    let mut out = vec![0u8; n as usize];
    let mut prev = 0u64;
    for &a in values {
        if a <= prev {
            return Err(Error::domain(format!(
                "sequence not strictly increasing at value {a}"
            )));
        }
        prev = a;
        if a <= n {
            out[(a - 1) as usize] = 1;
        }
    }
    Ok(out)
}

/// Materialize a(1..=count) from a strictly increasing generator.
pub fn generator_values(g: &Generator, count: u64) -> Result<Vec<u64>> {
    (1..=count).map(|n| g.evaluate(&[n])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beatty_sqrt2() -> Generator {
        Generator::parse("beatty:sqrt2:0").unwrap()
    }

    #[test]
    fn beatty_values() {
        let g = beatty_sqrt2();
        let vals: Vec<u64> = (1..=5).map(|n| g.evaluate(&[n]).unwrap()).collect();
        assert_eq!(vals, vec![1, 2, 4, 5, 7]);
        let shifted = Generator::parse("beatty:sqrt2:-1").unwrap();
        assert_eq!(shifted.evaluate(&[1]).unwrap(), 0);
        let neg = Generator::parse("beatty:0.5:-10").unwrap();
        assert!(neg.evaluate(&[1]).is_err());
    }

    #[test]
    fn power_floor_exact_cases() {
        let g = Generator::parse("powerfloor:1.5").unwrap();
        assert_eq!(g.evaluate(&[4]).unwrap(), 8); // 4^{3/2} = 8 exactly
        assert_eq!(g.evaluate(&[2]).unwrap(), 2); // floor(2.828)
        assert_eq!(g.evaluate(&[10]).unwrap(), 31); // floor(31.62)
        let g = Generator::parse("powerfloor:3/2").unwrap();
        assert_eq!(g.evaluate(&[4]).unwrap(), 8);
    }

    #[test]
    fn polynomial_and_linear_form() {
        let g = Generator::parse("poly:0,0,1").unwrap();
        assert_eq!(g.evaluate(&[7]).unwrap(), 49);
        let lf = Generator::parse("linform:1,0").unwrap();
        assert_eq!(lf.evaluate(&[3, 9]).unwrap(), 3);
        let lf2 = Generator::parse("linform:2,3").unwrap();
        assert_eq!(lf2.evaluate(&[3, 9]).unwrap(), 33);
    }

    #[test]
    fn visit_times_examples() {
        // alpha = sqrt2 - 1: fractional parts 0.4142, 0.8284, 0.2426, ...
        let alpha = Fixed128::parse("0.41421356237309504880168872420969807856967187537694").unwrap();
        let lo = Fixed128::ZERO;
        let hi = Fixed128::parse("0.5").unwrap();
        let v = visit_times(1, alpha, lo, hi, 3, 1000).unwrap();
        assert_eq!(v, vec![1, 3, 5]);
        // full interval: every n
        let v = visit_times(1, alpha, Fixed128::ZERO, Fixed128::ONE, 4, 1000).unwrap();
        assert_eq!(v, vec![1, 2, 3, 4]);
        // d = 2 first visit
        let s2 = Fixed128::parse("sqrt2").unwrap();
        let v = visit_times(2, s2, Fixed128::ZERO, Fixed128::parse("0.5").unwrap(), 1, 1000).unwrap();
        // direct scan oracle over f64
        let oracle = (1u64..)
            .find(|&n| ((n * n) as f64 * 2f64.sqrt()).fract() < 0.5)
            .unwrap();
        assert_eq!(v[0], oracle);
        // defining property holds on the output
        let v = visit_times(1, s2, Fixed128::ZERO, Fixed128::parse("0.25").unwrap(), 50, 100_000).unwrap();
        for &n in &v {
            assert!(s2.frac_mul(n) < Fixed128::parse("0.25").unwrap().frac_bits());
        }
    }

    #[test]
    fn independence_dependent_pair_fails() {
        let fam = SequenceFamily::parse(&["poly:0,1", "poly:0,2"]).unwrap(); // (n, 2n)
        let rep = check_independence(&fam, 2, 100).unwrap();
        assert!(!rep.passed);
        let ce = rep.counterexample.unwrap();
        assert_eq!(ce, vec![2, -1]);
        let worst = &rep.per_k[0];
        assert_eq!(worst.solutions, 100);
    }

    #[test]
    fn independence_exact_certificate() {
        let fam = SequenceFamily::parse(&["poly:0,1", "poly:0,0,1"]).unwrap(); // (n, n^2)
        let rep = check_independence(&fam, 3, 50).unwrap();
        assert!(rep.passed);
        let cert = rep.certificate.unwrap();
        assert!(cert.contains("rank 2"), "{cert}");
    }

    #[test]
    fn weak_independence_examples() {
        // diagonal forms on N^2: density 1/N, passes once 1/N clears the threshold
        let fam = SequenceFamily::parse(&["linform:1,0", "linform:0,1"]).unwrap();
        let rep = check_weak_independence(&fam, 1, 128).unwrap();
        assert!(rep.passed, "{:?}", rep.counterexample);
        let diag = rep
            .per_k
            .iter()
            .find(|v| v.k == vec![1, -1] || v.k == vec![-1, 1])
            .unwrap();
        assert!((diag.density - 1.0 / 128.0).abs() < 1e-12);
        assert!(rep.certificate.unwrap().contains("weak independence certified"));
        // (n, 2n) fails: k = (2, -1) has density 1
        let fam = SequenceFamily::parse(&["poly:0,1", "poly:0,2"]).unwrap();
        let rep = check_weak_independence(&fam, 2, 100).unwrap();
        assert!(!rep.passed);
        // (n, n+1): sums never vanish, density 0 everywhere
        let fam = SequenceFamily::parse(&["poly:0,1", "poly:1,1"]).unwrap();
        let rep = check_weak_independence(&fam, 1, 100).unwrap();
        let v = rep.per_k.iter().find(|v| v.k == vec![1, -1]).unwrap();
        assert_eq!(v.solutions, 0);
    }

    #[test]
    fn congruence_equidistribution_examples() {
        // family (n): |E e(n/2)| <= 1/N
        let fam = SequenceFamily::parse(&["poly:0,1"]).unwrap();
        let rep = check_congruence_equidistribution(&fam, 2, 1000).unwrap();
        assert!(rep.worst <= 1.0 / 1000.0 + 1e-12, "{}", rep.worst);
        // family (n, 2n): k = (0,1) at u = 2 gives statistic 1
        let fam = SequenceFamily::parse(&["poly:0,1", "poly:0,2"]).unwrap();
        let rep = check_congruence_equidistribution(&fam, 2, 500).unwrap();
        assert!((rep.worst - 1.0).abs() < 1e-12);
        assert_eq!(rep.worst_modulus, 2);
        assert_eq!(rep.worst_k, vec![0, 1]);
    }

    #[test]
    fn word_complexity_examples() {
        let w: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        assert_eq!(word_complexity(&w, 3, 100).unwrap(), 2); // 010 and 101
        let zeros = vec![0u8; 50];
        assert_eq!(word_complexity(&zeros, 7, 50).unwrap(), 1);
        assert!(word_complexity(&zeros, 0, 50).is_err());
        assert!(word_complexity(&zeros, 51, 50).is_err());
    }

    #[test]
    fn indicator_and_bridge() {
        let g = beatty_sqrt2();
        let vals = generator_values(&g, 8).unwrap();
        assert_eq!(vals, vec![1, 2, 4, 5, 7, 8, 9, 11]);
        let ind = indicator_of_range(&vals, 8).unwrap();
        assert_eq!(ind, vec![1, 1, 0, 1, 1, 0, 1, 1]);
        let doubles: Vec<u64> = (1..=3).map(|n| 2 * n).collect();
        assert_eq!(indicator_of_range(&doubles, 6).unwrap(), vec![0, 1, 0, 1, 0, 1]);
        assert!(indicator_of_range(&[3, 3], 5).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for d in [
            "beatty:sqrt2:0",
            "beatty:sqrt3:-0.5",
            "poly:0,0,1",
            "powerfloor:3/2",
            "linform:1,0",
            "table:1,2,4",
        ] {
            let g = Generator::parse(d).unwrap();
            let g2 = Generator::parse(&g.descriptor()).unwrap();
            assert_eq!(g.descriptor(), g2.descriptor(), "{d}");
        }
    }
}
