//! Bounded multiplicative functions f: N -> U (closed complex unit disc),
//! extended by f(n) = 0 for n <= 0.
//!
//! Built-ins cover everything the correlation experiments need: Liouville,
//! Moebius, the constant 1, mu^2, the Archimedean characters n^{it}, the
//! completely multiplicative root twists with f(p) a fixed d-th root of
//! unity, and Dirichlet characters stored as exact residue tables. Custom
//! functions are defined by a prime-power rule (p, e) -> value, which is
//! the only data a multiplicative function actually has.

use crate::error::{Error, Result};
use crate::numeric::{gcd, root_of_unity};
use crate::sieve::{SegmentedFactorSieve, Window};
use num_complex::Complex64;
use std::sync::Arc;

type PrimePowerRule = Arc<dyn Fn(u64, u32) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum MultFnKind {
    Liouville,
    Moebius,
    One,
    MuSquared,
    Archimedean { t: f64 },
    RootTwist { order: u32, index: u32 },
    Dirichlet(DirichletCharacter),
    Custom { name: String, completely: bool },
}

impl std::fmt::Debug for MultFnKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MultFnKind::Liouville => write!(f, "Liouville"),
            MultFnKind::Moebius => write!(f, "Moebius"),
            MultFnKind::One => write!(f, "One"),
            MultFnKind::MuSquared => write!(f, "MuSquared"),
            MultFnKind::Archimedean { t } => write!(f, "Archimedean(t={t})"),
            MultFnKind::RootTwist { order, index } => write!(f, "RootTwist({index}/{order})"),
            MultFnKind::Dirichlet(chi) => write!(f, "Dirichlet({}, {})", chi.modulus(), chi.index()),
            MultFnKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A multiplicative function specification; evaluation is pure and cheap to
/// clone, so specs can be shared across worker threads freely.
#[derive(Clone)]
pub struct MultFnSpec {
    kind: MultFnKind,
    rule: Option<PrimePowerRule>,
}

impl std::fmt::Debug for MultFnSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultFnSpec({:?})", self.kind)
    }
}

impl MultFnSpec {
    pub fn liouville() -> Self {
        Self { kind: MultFnKind::Liouville, rule: None }
    }
    pub fn moebius() -> Self {
        Self { kind: MultFnKind::Moebius, rule: None }
    }
    pub fn one() -> Self {
        Self { kind: MultFnKind::One, rule: None }
    }
    pub fn mu_squared() -> Self {
        Self { kind: MultFnKind::MuSquared, rule: None }
    }

    pub fn archimedean(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::domain(format!("archimedean parameter {t} not finite")));
        }
        Ok(Self { kind: MultFnKind::Archimedean { t }, rule: None })
    }

    /// f(p) = e(index/order) at every prime, extended completely
    /// multiplicatively; nontrivial root required.
    pub fn root_twist(order: u32, index: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::domain(format!("root twist order {order} < 2")));
        }
        if index == 0 || index % order == 0 {
            return Err(Error::domain("root twist requires a nontrivial root".to_string()));
        }
        Ok(Self { kind: MultFnKind::RootTwist { order, index: index % order }, rule: None })
    }

    pub fn dirichlet(modulus: u64, index: u64) -> Result<Self> {
        Ok(Self { kind: MultFnKind::Dirichlet(DirichletCharacter::new(modulus, index)?), rule: None })
    }

    pub fn custom(
        name: impl Into<String>,
        completely: bool,
        rule: impl Fn(u64, u32) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: MultFnKind::Custom { name: name.into(), completely },
            rule: Some(Arc::new(rule)),
        }
    }

    pub fn kind(&self) -> &MultFnKind {
        &self.kind
    }

    pub fn is_real_valued(&self) -> bool {
        match &self.kind {
            MultFnKind::Liouville | MultFnKind::Moebius | MultFnKind::One | MultFnKind::MuSquared => true,
            MultFnKind::Archimedean { t } => *t == 0.0,
            MultFnKind::RootTwist { order, .. } => *order == 2,
            MultFnKind::Dirichlet(chi) => chi.is_real(),
            MultFnKind::Custom { .. } => false,
        }
    }

    /// Values in {-1, +1} on every positive integer.
    pub fn is_pm_one(&self) -> bool {
        match &self.kind {
            MultFnKind::Liouville | MultFnKind::One => true,
            MultFnKind::RootTwist { order, .. } => *order == 2,
            MultFnKind::Dirichlet(chi) => chi.modulus() == 1,
            _ => false,
        }
    }

    pub fn is_completely_multiplicative(&self) -> bool {
        match &self.kind {
            MultFnKind::Liouville
            | MultFnKind::One
            | MultFnKind::Archimedean { .. }
            | MultFnKind::RootTwist { .. }
            | MultFnKind::Dirichlet(_) => true,
            MultFnKind::Moebius | MultFnKind::MuSquared => false,
            MultFnKind::Custom { completely, .. } => *completely,
        }
    }

    /// f(p^e) from the prime-power data alone (p assumed prime).
    pub fn at_prime_power(&self, p: u64, e: u32) -> Complex64 {
        match &self.kind {
            MultFnKind::Liouville => {
                if e % 2 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            MultFnKind::Moebius => match e {
                1 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 0.0),
            },
            MultFnKind::One => Complex64::new(1.0, 0.0),
            MultFnKind::MuSquared => match e {
                1 => Complex64::new(1.0, 0.0),
                _ => Complex64::new(0.0, 0.0),
            },
            MultFnKind::Archimedean { t } => {
                Complex64::from_polar(1.0, t * e as f64 * (p as f64).ln())
            }
            MultFnKind::RootTwist { order, index } => {
                root_of_unity((*index as u64 * e as u64 % *order as u64) as i64, *order as u64)
            }
            MultFnKind::Dirichlet(chi) => chi.at(pow_mod(p, e, chi.modulus())),
            MultFnKind::Custom { completely, .. } => {
                let rule = self.rule.as_ref().expect("custom rule present");
                if *completely {
                    let base = rule(p, 1);
                    base.powu(e)
                } else {
                    rule(p, e)
                }
            }
        }
    }

    pub fn at_prime(&self, p: u64) -> Complex64 {
        self.at_prime_power(p, 1)
    }

    /// Value at any integer; zero on n <= 0 per the standard extension.
    pub fn eval(&self, n: i64) -> Complex64 {
        if n <= 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.eval_u64(n as u64)
    }

    pub fn eval_u64(&self, n: u64) -> Complex64 {
        debug_assert!(n >= 1);
        match &self.kind {
            MultFnKind::One => Complex64::new(1.0, 0.0),
            MultFnKind::Archimedean { t } => Complex64::from_polar(1.0, t * (n as f64).ln()),
            MultFnKind::Dirichlet(chi) => chi.at(n % chi.modulus()),
            MultFnKind::Liouville => {
                let o = big_omega_trial(n);
                if o % 2 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            MultFnKind::RootTwist { order, index } => {
                let o = big_omega_trial(n);
                root_of_unity((*index as u64 * (o % *order as u64)) as i64, *order as u64)
            }
            _ => {
                let mut acc = Complex64::new(1.0, 0.0);
                for (p, e) in trial_factorize(n) {
                    acc *= self.at_prime_power(p, e);
                }
                acc
            }
        }
    }

    /// Elementwise values over a window, computed through sieve tables.
    pub fn eval_range(&self, window: Window, sieve: &SegmentedFactorSieve) -> Result<Vec<Complex64>> {
        let s = self.sampler(window, sieve)?;
        Ok((window.lo..=window.hi).map(|n| s.get(n)).collect())
    }

    /// Window-backed evaluator used by the correlation engines. Ownership
    /// is shared so the same table can serve several factors.
    pub fn sampler(&self, window: Window, sieve: &SegmentedFactorSieve) -> Result<Sampler> {
        match &self.kind {
            MultFnKind::One => Ok(Sampler::Const(Complex64::new(1.0, 0.0))),
            MultFnKind::Archimedean { t } => Ok(Sampler::Log { t: *t }),
            MultFnKind::Dirichlet(chi) => Ok(Sampler::Residue {
                q: chi.modulus(),
                table: Arc::new(chi.table().to_vec()),
            }),
            MultFnKind::Liouville => {
                let t = sieve.arithmetic_table(window)?;
                Ok(Sampler::Signs { lo: window.lo, vals: Arc::new(t.lambda) })
            }
            MultFnKind::Moebius => {
                let t = sieve.arithmetic_table(window)?;
                Ok(Sampler::Signs { lo: window.lo, vals: Arc::new(t.mobius) })
            }
            MultFnKind::MuSquared => {
                let t = sieve.arithmetic_table(window)?;
                let sq = t.mobius.iter().map(|&m| (m != 0) as i8).collect();
                Ok(Sampler::Signs { lo: window.lo, vals: Arc::new(sq) })
            }
            MultFnKind::RootTwist { order, index } => {
                let t = sieve.arithmetic_table(window)?;
                let roots: Vec<Complex64> = (0..*order)
                    .map(|r| root_of_unity((*index as u64 * r as u64) as i64, *order as u64))
                    .collect();
                let omega_mod: Vec<u8> =
                    t.big_omega.iter().map(|&o| (o as u32 % *order) as u8).collect();
                Ok(Sampler::OmegaRoot { lo: window.lo, omega_mod: Arc::new(omega_mod), roots })
            }
            MultFnKind::Custom { .. } => {
                let mut vals = Vec::with_capacity(window.len());
                sieve.for_each_factorization(window, |_, f| {
                    let mut acc = Complex64::new(1.0, 0.0);
                    for &(p, e) in f {
                        acc *= self.at_prime_power(p, e);
                    }
                    vals.push(acc);
                })?;
                Ok(Sampler::Dense { lo: window.lo, vals: Arc::new(vals) })
            }
        }
    }

    /// Canonical textual descriptor; `parse` inverts it.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            MultFnKind::Liouville => "liouville".into(),
            MultFnKind::Moebius => "moebius".into(),
            MultFnKind::One => "one".into(),
            MultFnKind::MuSquared => "musq".into(),
            MultFnKind::Archimedean { t } => format!("archimedean:{t}"),
            MultFnKind::RootTwist { order, index } => format!("root_twist:{order}:{index}"),
            MultFnKind::Dirichlet(chi) => format!("dirichlet:{}:{}", chi.modulus(), chi.index()),
            MultFnKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Parse a descriptor like `liouville`, `dirichlet:4:1`,
    /// `archimedean:0.5`, `root_twist:3`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        let bad = |m: &str| Error::parse(format!("function descriptor `{text}`: {m}"));
        match parts[0] {
            "liouville" | "lambda" => Ok(Self::liouville()),
            "moebius" | "mobius" | "mu" => Ok(Self::moebius()),
            "one" => Ok(Self::one()),
            "musq" | "mu2" | "mu_squared" => Ok(Self::mu_squared()),
            "archimedean" => {
                let t: f64 = parts
                    .get(1)
                    .ok_or_else(|| bad("missing t"))?
                    .parse()
                    .map_err(|_| bad("bad t"))?;
                Self::archimedean(t)
            }
            "root_twist" => {
                let order: u32 = parts
                    .get(1)
                    .ok_or_else(|| bad("missing order"))?
                    .parse()
                    .map_err(|_| bad("bad order"))?;
                let index: u32 = match parts.get(2) {
                    Some(s) => s.parse().map_err(|_| bad("bad index"))?,
                    None => 1,
                };
                Self::root_twist(order, index)
            }
            "dirichlet" => {
                let q: u64 = parts
                    .get(1)
                    .ok_or_else(|| bad("missing modulus"))?
                    .parse()
                    .map_err(|_| bad("bad modulus"))?;
                let idx: u64 = parts
                    .get(2)
                    .ok_or_else(|| bad("missing character index"))?
                    .parse()
                    .map_err(|_| bad("bad character index"))?;
                Self::dirichlet(q, idx)
            }
            other => Err(bad(&format!("unknown function kind `{other}`"))),
        }
    }
}

/// Window evaluator. `get` is safe for any n in the window the sampler was
/// built for plus, for table-free kinds, any positive n.
#[derive(Clone)]
pub enum Sampler {
    Const(Complex64),
    Signs { lo: u64, vals: Arc<Vec<i8>> },
    OmegaRoot { lo: u64, omega_mod: Arc<Vec<u8>>, roots: Vec<Complex64> },
    Residue { q: u64, table: Arc<Vec<Complex64>> },
    Log { t: f64 },
    Dense { lo: u64, vals: Arc<Vec<Complex64>> },
}

impl Sampler {
    #[inline]
    pub fn get(&self, n: u64) -> Complex64 {
        match self {
            Sampler::Const(c) => *c,
            Sampler::Signs { lo, vals } => Complex64::new(vals[(n - lo) as usize] as f64, 0.0),
            Sampler::OmegaRoot { lo, omega_mod, roots } => {
                roots[omega_mod[(n - lo) as usize] as usize]
            }
            Sampler::Residue { q, table } => table[(n % q) as usize],
            Sampler::Log { t } => Complex64::from_polar(1.0, t * (n as f64).ln()),
            Sampler::Dense { lo, vals } => vals[(n - lo) as usize],
        }
    }

    /// Real-part fast path; callers must have checked `is_real`.
    #[inline]
    pub fn get_real(&self, n: u64) -> f64 {
        match self {
            Sampler::Const(c) => c.re,
            Sampler::Signs { lo, vals } => vals[(n - lo) as usize] as f64,
            _ => self.get(n).re,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Sampler::Const(c) => c.im == 0.0,
            Sampler::Signs { .. } => true,
            Sampler::Log { t } => *t == 0.0,
            Sampler::OmegaRoot { roots, .. } => roots.iter().all(|z| z.im == 0.0),
            Sampler::Residue { table, .. } => table.iter().all(|z| z.im == 0.0),
            Sampler::Dense { vals, .. } => vals.iter().all(|z| z.im == 0.0),
        }
    }
}

/// Dirichlet character mod q as an explicit residue table, built from the
/// cyclic decomposition of (Z/qZ)*. Index 0 is always the principal
/// character; indices enumerate the dual group in mixed radix over the
/// component orders (odd prime-power components in ascending prime order,
/// then for 2^e >= 8 the {-1} component followed by the 5-power component).
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    index: u64,
    table: Vec<Complex64>,
    real: bool,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.index == other.index
    }
}

struct UnitComponent {
    modulus: u64,   // the p^e it lives in
    order: u64,     // cyclic order
    dlog: Vec<u64>, // residue -> exponent, u64::MAX when not in the cyclic part
}

impl DirichletCharacter {
    pub fn new(modulus: u64, index: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::domain("character modulus must be >= 1".to_string()));
        }
        if modulus > 1_000_000 {
            return Err(Error::resource(format!(
                "character modulus {modulus} above the 10^6 table ceiling"
            )));
        }
        let comps = unit_group_components(modulus);
        let phi: u64 = comps.iter().map(|c| c.order).product::<u64>().max(1);
        if index >= phi {
            return Err(Error::domain(format!(
                "character index {index} out of range (phi({modulus}) = {phi})"
            )));
        }
        // mixed-radix digits of the index over the component orders
        let mut digits = Vec::with_capacity(comps.len());
        let mut rest = index;
        for c in &comps {
            digits.push(rest % c.order);
            rest /= c.order;
        }
        let real = comps
            .iter()
            .zip(&digits)
            .all(|(c, &j)| (2 * j) % c.order == 0);
        let lcm_order = comps.iter().fold(1u64, |l, c| l / gcd(l, c.order) * c.order);
        let mut table = vec![Complex64::new(0.0, 0.0); modulus as usize];
        for n in 0..modulus {
            if modulus == 1 {
                table[0] = Complex64::new(1.0, 0.0);
                break;
            }
            if gcd(n, modulus) != 1 {
                continue;
            }
            let mut num: u128 = 0;
            for (c, &j) in comps.iter().zip(&digits) {
                let a = c.dlog[(n % c.modulus) as usize];
                debug_assert_ne!(a, u64::MAX, "dlog table covers all units");
                num += (j as u128) * (a as u128) * ((lcm_order / c.order) as u128);
            }
            table[n as usize] = root_of_unity((num % lcm_order as u128) as i64, lcm_order);
        }
        Ok(DirichletCharacter { modulus, index, table, real })
    }

    /// Every character of the given modulus, principal first.
    pub fn all(modulus: u64) -> Result<Vec<Self>> {
        let comps = unit_group_components(modulus);
        let phi: u64 = comps.iter().map(|c| c.order).product::<u64>().max(1);
        (0..phi).map(|i| Self::new(modulus, i)).collect()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn index(&self) -> u64 {
        self.index
    }
    pub fn is_principal(&self) -> bool {
        self.index == 0
    }
    pub fn is_real(&self) -> bool {
        self.real
    }
    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    #[inline]
    pub fn at(&self, residue: u64) -> Complex64 {
        self.table[(residue % self.modulus) as usize]
    }
}

fn unit_group_components(q: u64) -> Vec<UnitComponent> {
    let mut comps = Vec::new();
    let mut rest = q;
    let mut two_e = 0u32;
    while rest % 2 == 0 {
        rest /= 2;
        two_e += 1;
    }
    match two_e {
        0 | 1 => {}
        2 => comps.push(cyclic_component(4, 3, 2)),
        e => {
            let m = 1u64 << e;
            comps.push(sign_component(m));
            comps.push(five_component(m));
        }
    }
    // odd prime-power factors in ascending order
    let mut m = rest;
    let mut p = 3u64;
    while p * p <= m {
        if m % p == 0 {
            let mut pe = 1u64;
            while m % p == 0 {
                m /= p;
                pe *= p;
            }
            let order = pe / p * (p - 1);
            let g = primitive_root_prime_power(p, pe);
            comps.push(cyclic_component(pe, g, order));
        }
        p += 2;
    }
    if m > 1 {
        comps.push(cyclic_component(m, primitive_root_prime_power(m, m), m - 1));
    }
    comps
}

fn cyclic_component(modulus: u64, generator: u64, order: u64) -> UnitComponent {
    let mut dlog = vec![u64::MAX; modulus as usize];
    let mut x = 1u64;
    for k in 0..order {
        if dlog[x as usize] == u64::MAX {
            dlog[x as usize] = k;
        }
        x = x * generator % modulus;
    }
    UnitComponent { modulus, order, dlog }
}

/// The {+-1} factor of (Z/2^e Z)* for e >= 3: every unit is +-5^k, and this
/// component records the sign exponent.
fn sign_component(modulus: u64) -> UnitComponent {
    let mut in_five = vec![false; modulus as usize];
    let mut x = 1u64;
    for _ in 0..modulus / 4 {
        in_five[x as usize] = true;
        x = x * 5 % modulus;
    }
    let mut dlog = vec![u64::MAX; modulus as usize];
    for n in (1..modulus).step_by(2) {
        dlog[n as usize] = if in_five[n as usize] { 0 } else { 1 };
    }
    UnitComponent { modulus, order: 2, dlog }
}

/// The 5-power factor of (Z/2^e Z)* for e >= 3: n = +-5^k gets exponent k
/// for either sign.
fn five_component(modulus: u64) -> UnitComponent {
    let order = modulus / 4;
    let mut dlog = vec![u64::MAX; modulus as usize];
    let mut x = 1u64;
    for k in 0..order {
        dlog[x as usize] = k;
        dlog[(modulus - x) as usize] = k;
        x = x * 5 % modulus;
    }
    UnitComponent { modulus, order, dlog }
}

fn primitive_root_prime_power(p: u64, pe: u64) -> u64 {
    let g = primitive_root_mod_p(p);
    if pe == p {
        return g;
    }
    // g stays primitive mod p^e unless g^(p-1) = 1 mod p^2
    if pow_mod(g, (p - 1) as u32, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn primitive_root_mod_p(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let phi = p - 1;
    let prime_divs: Vec<u64> = trial_factorize(phi).into_iter().map(|(q, _)| q).collect();
    'g: for g in 2..p {
        for &q in &prime_divs {
            if pow_mod_u64(g, phi / q, p) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

pub fn pow_mod(base: u64, exp: u32, modulus: u64) -> u64 {
    pow_mod_u64(base, exp as u64, modulus)
}

fn pow_mod_u64(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u128;
    let m = modulus as u128;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

fn trial_factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn big_omega_trial(n: u64) -> u64 {
    trial_factorize(n).iter().map(|&(_, e)| e as u64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn liouville_and_extension() {
        let f = MultFnSpec::liouville();
        assert_eq!(f.eval(12).re, -1.0); // 12 = 2^2 * 3, Omega = 3
        assert_eq!(f.eval(-5), Complex64::new(0.0, 0.0));
        assert_eq!(f.eval(0), Complex64::new(0.0, 0.0));
        assert_eq!(f.eval(1).re, 1.0);
    }

    #[test]
    fn archimedean_formula() {
        let f = MultFnSpec::archimedean(1.0).unwrap();
        let v = f.eval(2);
        let expect = Complex64::from_polar(1.0, 2f64.ln());
        assert!((v - expect).norm() < 1e-15);
        assert!(MultFnSpec::archimedean(f64::NAN).is_err());
    }

    #[test]
    fn root_twist_is_constant_on_primes() {
        let f = MultFnSpec::root_twist(3, 1).unwrap();
        let zeta = root_of_unity(1, 3);
        for p in [2u64, 3, 5, 7, 11, 97] {
            assert!((f.at_prime(p) - zeta).norm() < 1e-15);
        }
        // completely multiplicative: f(12) = zeta^3 = 1
        assert!((f.eval(12) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(MultFnSpec::root_twist(3, 0).is_err());
        assert!(MultFnSpec::root_twist(1, 1).is_err());
    }

    #[test]
    fn nonprincipal_character_mod_4() {
        let f = MultFnSpec::dirichlet(4, 1).unwrap();
        assert_eq!(f.eval(3).re, -1.0);
        assert_eq!(f.eval(2), Complex64::new(0.0, 0.0));
        assert_eq!(f.eval(5).re, 1.0);
        assert_eq!(f.eval(1).re, 1.0);
        assert!(f.is_real_valued());
    }

    #[test]
    fn character_mod_1_is_one() {
        let f = MultFnSpec::dirichlet(1, 0).unwrap();
        for n in 1..10 {
            assert_eq!(f.eval(n).re, 1.0);
        }
        assert!(MultFnSpec::dirichlet(1, 1).is_err());
    }

    #[test]
    fn character_periodicity_and_multiplicativity() {
        for (q, idx) in [(5u64, 2u64), (8, 3), (9, 4), (12, 2), (35, 11)] {
            let chi = DirichletCharacter::new(q, idx).unwrap();
            assert_eq!(chi.at(1), Complex64::new(1.0, 0.0));
            for n in 1..200u64 {
                let a = chi.at(n % q);
                let b = chi.at((n + q) % q);
                assert_eq!(a, b);
                for m in 1..50u64 {
                    let prod = chi.at(n % q) * chi.at(m % q);
                    assert!((chi.at(n * m % q) - prod).norm() < 1e-12, "q={q} idx={idx} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn character_count_is_phi() {
        for q in [1u64, 2, 3, 4, 8, 9, 12, 16, 24, 35, 40] {
            let all = DirichletCharacter::all(q).unwrap();
            let phi = (1..=q).filter(|&n| gcd(n, q) == 1).count();
            assert_eq!(all.len(), phi.max(1), "q={q}");
            assert!(all[0].is_principal());
        }
    }

    #[test]
    fn eval_range_examples() {
        let sieve = SegmentedFactorSieve::build(100).unwrap();
        let mu = MultFnSpec::moebius();
        let vals = mu.eval_range(Window::new(1, 6).unwrap(), &sieve).unwrap();
        let expect = [1.0, -1.0, -1.0, 0.0, -1.0, 1.0];
        for (v, e) in vals.iter().zip(expect) {
            assert_eq!(v.re, e);
        }
        let chi = MultFnSpec::dirichlet(4, 1).unwrap();
        let vals = chi.eval_range(Window::new(1, 8).unwrap(), &sieve).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        for (v, e) in vals.iter().zip(expect) {
            assert_eq!(v.re, e);
        }
    }

    #[test]
    fn descriptor_round_trip() {
        for d in [
            "liouville",
            "moebius",
            "one",
            "musq",
            "archimedean:0.5",
            "root_twist:3:1",
            "root_twist:5:2",
            "dirichlet:4:1",
        ] {
            let f = MultFnSpec::parse(d).unwrap();
            assert_eq!(f.descriptor(), d);
            let again = MultFnSpec::parse(&f.descriptor()).unwrap();
            assert_eq!(again.descriptor(), d);
        }
        assert!(MultFnSpec::parse("dirichlet:4").is_err());
        assert!(MultFnSpec::parse("nope").is_err());
        // aliases normalize
        assert_eq!(MultFnSpec::parse("lambda").unwrap().descriptor(), "liouville");
        assert_eq!(MultFnSpec::parse("root_twist:3").unwrap().descriptor(), "root_twist:3:1");
    }

    #[test]
    fn custom_rule_follows_flag() {
        let sq = MultFnSpec::custom("half_at_primes", true, |_, _| Complex64::new(0.5, 0.0));
        // completely multiplicative: f(4) = f(2)^2
        assert!((sq.eval(4).re - 0.25).abs() < 1e-15);
        let m = MultFnSpec::custom("plain", false, |_, e| {
            Complex64::new(if e == 1 { -1.0 } else { 0.0 }, 0.0)
        });
        assert_eq!(m.eval(4).re, 0.0); // behaves like Moebius
        assert_eq!(m.eval(6).re, 1.0);
    }
}
