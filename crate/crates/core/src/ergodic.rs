//! Exactly solvable dynamical oracles: rotations on Z_u x T^v with closed-
//! form correlation integrals, Weyl exponential sums, prime-phase averages,
//! and the T^2 skew product (x, y) -> (x, y + x).
//!
//! Only the Abelian layer is implemented; it carries all the computable
//! content the finite-scale identity checks need. Orbit iterates use
//! closed-form phase arithmetic in 128-bit fixed point, never repeated
//! addition, so there is no rounding accumulation along 10^6-step orbits.

use crate::error::{Error, Result};
use crate::numeric::{frac_mul_signed, unit_phase, Fixed128, Kahan};
use crate::sieve::SegmentedFactorSieve;
use num_complex::Complex64;

/// Rotation T(x, y) = (x + 1, y + alpha) on Z_u x T^v.
#[derive(Debug, Clone)]
pub struct TorusRotation {
    pub cyclic: u64,
    pub alpha: Vec<Fixed128>,
}

impl TorusRotation {
    pub fn new(cyclic: u64, alpha: Vec<Fixed128>) -> Result<Self> {
        if cyclic == 0 {
            return Err(Error::domain("cyclic part must have order >= 1".to_string()));
        }
        Ok(TorusRotation { cyclic, alpha })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Continued-fraction heuristic for ergodicity: each coordinate should
    /// survive `depth` expansion steps without terminating (a terminating
    /// expansion means the coordinate is rational at the cached precision).
    /// Joint rational independence is not certified, only per-coordinate
    /// irrationality evidence.
    pub fn looks_ergodic(&self, depth: u32) -> bool {
        self.alpha.iter().all(|a| continued_fraction_depth(a, depth) >= depth)
    }
}

fn continued_fraction_depth(alpha: &Fixed128, max_depth: u32) -> u32 {
    // Depth of the continued fraction of frac/2^128 = number of Euclidean
    // steps; a rational with small denominator terminates almost at once.
    let frac = alpha.frac_bits();
    if frac == 0 {
        return 0;
    }
    let mut a = frac;
    let mut b = (u128::MAX % frac + 1) % frac; // 2^128 mod frac
    for step in 1..max_depth {
        if b == 0 {
            return step;
        }
        let t = a % b;
        a = b;
        b = t;
    }
    max_depth
}

/// The function e(k x / u) e(l . y) on Z_u x T^v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrigMonomial {
    pub cyclic_freq: i64,
    pub torus_freq: Vec<i64>,
}

impl TrigMonomial {
    pub fn constant(dim: usize) -> Self {
        TrigMonomial { cyclic_freq: 0, torus_freq: vec![0; dim] }
    }

    pub fn is_constant(&self) -> bool {
        self.cyclic_freq == 0 && self.torus_freq.iter().all(|&l| l == 0)
    }
}

/// E_{n<=N} e(n theta) with exact fixed-point phases.
pub fn weyl_sum(theta: &Fixed128, n: u64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Kahan::<Complex64>::new();
    for m in 1..=n {
        acc.add(unit_phase(theta.frac_mul(m)));
    }
    acc.total() / n as f64
}

/// Theoretical Weyl bound min(1, 1/(2 N dist(theta, Z))).
pub fn weyl_bound(theta: &Fixed128, n: u64) -> f64 {
    let dist = crate::numeric::frac_dist_to_int(theta.frac_bits());
    if dist == 0.0 {
        1.0
    } else {
        (1.0 / (2.0 * n as f64 * dist)).min(1.0)
    }
}

/// E_{p in P_d, p<=P} e(p beta): uniform average over the listed primes.
pub fn prime_phase_average(
    beta: &Fixed128,
    class_d: u64,
    prime_bound: u64,
    sieve: &SegmentedFactorSieve,
) -> Result<Complex64> {
    let primes = sieve.primes_up_to(prime_bound, Some(class_d))?;
    if primes.is_empty() {
        return Err(Error::domain(format!(
            "no primes <= {prime_bound} in the class {class_d}Z+1"
        )));
    }
    let mut acc = Kahan::<Complex64>::new();
    for &p in &primes {
        acc.add(unit_phase(beta.frac_mul(p)));
    }
    Ok(acc.total() / primes.len() as f64)
}

/// Exact correlation integral of monomials under the rotation:
/// int prod_j T^{n_j} F_j dm is 0 unless sum l_j = 0 and sum k_j = 0 mod u,
/// and otherwise e(sum_j n_j l_j . alpha) e(sum_j k_j n_j / u).
pub fn rotation_correlation_analytic(
    rotation: &TorusRotation,
    monomials: &[TrigMonomial],
    shifts: &[i64],
) -> Result<Complex64> {
    validate_monomials(rotation, monomials, shifts)?;
    let u = rotation.cyclic;
    let l_total: Vec<i64> = (0..rotation.dim())
        .map(|i| monomials.iter().map(|f| f.torus_freq[i]).sum())
        .collect();
    let k_total: i64 = monomials.iter().map(|f| f.cyclic_freq).sum();
    if l_total.iter().any(|&l| l != 0) || k_total.rem_euclid(u as i64) != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // torus phase sum_j n_j (l_j . alpha), exact in fixed point
    let mut frac: u128 = 0;
    for (f, &nj) in monomials.iter().zip(shifts) {
        for (i, &li) in f.torus_freq.iter().enumerate() {
            let coeff = (nj as i128) * (li as i128);
            let c64 = i64::try_from(coeff)
                .map_err(|_| Error::overflow("shift * frequency exceeds i64".to_string()))?;
            frac = frac.wrapping_add(frac_mul_signed(rotation.alpha[i].frac_bits(), c64));
        }
    }
    // cyclic phase sum_j k_j n_j / u as an exact rational
    let mut cyc_num: i128 = 0;
    for (f, &nj) in monomials.iter().zip(shifts) {
        cyc_num += f.cyclic_freq as i128 * nj as i128;
    }
    let cyc = crate::numeric::root_of_unity((cyc_num.rem_euclid(u as i128)) as i64, u);
    Ok(unit_phase(frac) * cyc)
}

/// Orbit average E_{m<=N} prod_j F_j(T^{m+n_j}(x0, y0)) with the iterate
/// computed in closed form per m.
#[allow(clippy::too_many_arguments)]
pub fn rotation_correlation_orbit(
    rotation: &TorusRotation,
    monomials: &[TrigMonomial],
    shifts: &[i64],
    n: u64,
    start_cyclic: u64,
    start_torus: &[Fixed128],
) -> Result<Complex64> {
    validate_monomials(rotation, monomials, shifts)?;
    if start_torus.len() != rotation.dim() {
        return Err(Error::domain("start point dimension mismatch".to_string()));
    }
    if n == 0 {
        return Err(Error::domain("orbit average over empty range".to_string()));
    }
    let u = rotation.cyclic;
    let mut acc = Kahan::<Complex64>::new();
    for m in 1..=n {
        let mut frac: u128 = 0;
        let mut cyc_num: i128 = 0;
        for (j, f) in monomials.iter().enumerate() {
            let step = m as i128 + shifts[j] as i128;
            let step64 = i64::try_from(step)
                .map_err(|_| Error::overflow("orbit step exceeds i64".to_string()))?;
            cyc_num += f.cyclic_freq as i128 * (start_cyclic as i128 + step);
            for (i, &li) in f.torus_freq.iter().enumerate() {
                frac = frac.wrapping_add(frac_mul_signed(start_torus[i].frac_bits(), li));
                let c = (step64 as i128) * (li as i128);
                let c64 = i64::try_from(c)
                    .map_err(|_| Error::overflow("orbit frequency exceeds i64".to_string()))?;
                frac = frac.wrapping_add(frac_mul_signed(rotation.alpha[i].frac_bits(), c64));
                // integer parts of y0 and alpha contribute nothing mod 1
            }
        }
        let cyc = crate::numeric::root_of_unity((cyc_num.rem_euclid(u as i128)) as i64, u);
        acc.add(unit_phase(frac) * cyc);
    }
    Ok(acc.total() / n as f64)
}

fn validate_monomials(
    rotation: &TorusRotation,
    monomials: &[TrigMonomial],
    shifts: &[i64],
) -> Result<()> {
    if monomials.is_empty() || monomials.len() != shifts.len() {
        return Err(Error::domain("need one shift per monomial".to_string()));
    }
    for f in monomials {
        if f.torus_freq.len() != rotation.dim() {
            return Err(Error::domain(format!(
                "monomial dimension {} vs rotation dimension {}",
                f.torus_freq.len(),
                rotation.dim()
            )));
        }
    }
    Ok(())
}

/// Finite-scale check of the prime-versus-integer ergodic identity: the
/// prime average of analytic correlations at dilated shifts p*j against
/// the integer average over A_{d,r0} = {m : gcd(m, r0) = 1, m = 1 mod d},
/// both compared with the predicted common limit.
#[derive(Debug, Clone)]
pub struct Ergid2Check {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub predicted: Complex64,
    pub gap: f64,
    pub gap_lhs_predicted: f64,
    pub gap_rhs_predicted: f64,
    pub primes_used: usize,
    pub integers_used: usize,
    /// continued-fraction evidence for the total-ergodicity hypothesis
    pub ergodicity_heuristic: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn ergid2_check(
    rotation: &TorusRotation,
    monomials: &[TrigMonomial],
    shifts: &[i64],
    class_d: u64,
    r0: u64,
    prime_bound: u64,
    integer_bound: u64,
    sieve: &SegmentedFactorSieve,
) -> Result<Ergid2Check> {
    validate_monomials(rotation, monomials, shifts)?;
    if r0 == 0 || class_d == 0 {
        return Err(Error::domain("need r0 >= 1 and d >= 1".to_string()));
    }
    if r0 % rotation.cyclic != 0 {
        return Err(Error::domain(format!(
            "cyclic order {} must divide r0 = {r0} for the component decomposition",
            rotation.cyclic
        )));
    }
    let primes = sieve.primes_up_to(prime_bound, Some(class_d))?;
    if primes.is_empty() {
        return Err(Error::domain(format!(
            "no primes <= {prime_bound} in the class {class_d}Z+1"
        )));
    }
    let dilated = |s: u64| -> Result<Complex64> {
        let dil: Vec<i64> = shifts.iter().map(|&nj| nj * s as i64).collect();
        rotation_correlation_analytic(rotation, monomials, &dil)
    };
    let mut lhs_acc = Kahan::<Complex64>::new();
    for &p in &primes {
        lhs_acc.add(dilated(p)?);
    }
    let lhs = lhs_acc.total() / primes.len() as f64;

    let members: Vec<u64> = (1..=integer_bound)
        .filter(|&m| crate::numeric::gcd(m, r0) == 1 && m % class_d == 1 % class_d)
        .collect();
    if members.is_empty() {
        return Err(Error::domain(format!(
            "A_{{{class_d},{r0}}} has no members up to {integer_bound}"
        )));
    }
    let mut rhs_acc = Kahan::<Complex64>::new();
    for &m in &members {
        rhs_acc.add(dilated(m)?);
    }
    let rhs = rhs_acc.total() / members.len() as f64;

    let predicted = predicted_limit(rotation, monomials, shifts, class_d, r0)?;
    Ok(Ergid2Check {
        lhs,
        rhs,
        predicted,
        gap: (lhs - rhs).norm(),
        gap_lhs_predicted: (lhs - predicted).norm(),
        gap_rhs_predicted: (rhs - predicted).norm(),
        primes_used: primes.len(),
        integers_used: members.len(),
        ergodicity_heuristic: rotation.looks_ergodic(30),
    })
}

/// The common limit of both sides. The analytic correlation at dilated
/// shift s has a fixed phase gamma = sum_j j-weighted frequencies; when the
/// torus part of gamma is present (irrational by the ergodicity
/// hypothesis) the averages tend to 0, otherwise to the mean of the
/// rational rotation over the residues the averages range over.
fn predicted_limit(
    rotation: &TorusRotation,
    monomials: &[TrigMonomial],
    shifts: &[i64],
    class_d: u64,
    r0: u64,
) -> Result<Complex64> {
    let u = rotation.cyclic;
    let l_total: Vec<i64> = (0..rotation.dim())
        .map(|i| monomials.iter().map(|f| f.torus_freq[i]).sum())
        .collect();
    let k_total: i64 = monomials.iter().map(|f| f.cyclic_freq).sum();
    if l_total.iter().any(|&l| l != 0) || k_total.rem_euclid(u as i64) != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // gamma-coefficients of s: torus part c_i = sum_j n_j l_{j,i}
    let torus_coeff: Vec<i128> = (0..rotation.dim())
        .map(|i| {
            monomials
                .iter()
                .zip(shifts)
                .map(|(f, &nj)| f.torus_freq[i] as i128 * nj as i128)
                .sum()
        })
        .collect();
    if torus_coeff.iter().any(|&c| c != 0) {
        // irrational rotation in s: equidistribution kills both averages
        return Ok(Complex64::new(0.0, 0.0));
    }
    // purely rational phase e(q s / u): average over the residues of
    // A_{d, r0} modulo u (eventually periodic with period lcm(d, r0, u))
    let mut cyc_q: i128 = 0;
    for (f, &nj) in monomials.iter().zip(shifts) {
        cyc_q += f.cyclic_freq as i128 * nj as i128;
    }
    let period = lcm(lcm(class_d, r0), u);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    for m in 1..=period {
        if crate::numeric::gcd(m, r0) == 1 && m % class_d == 1 % class_d {
            let phase = (cyc_q * m as i128).rem_euclid(u as i128);
            acc += crate::numeric::root_of_unity(phase as i64, u);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::domain("empty residue system for the predicted limit".to_string()));
    }
    Ok(acc / count as f64)
}

fn lcm(a: u64, b: u64) -> u64 {
    a / crate::numeric::gcd(a, b) * b
}

/// E_{n<=N} F(T^n(x0, y0)) on the skew product T(x, y) = (x, y + x) of
/// T^2, using the closed form T^n(x, y) = (x, y + n x). `freq` is the
/// frequency pair of F(x, y) = e(f1 x + f2 y).
pub fn skew_orbit_average(x0: &Fixed128, y0: &Fixed128, freq: (i64, i64), n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("orbit average over empty range".to_string()));
    }
    let (f1, f2) = freq;
    let mut acc = Kahan::<Complex64>::new();
    let static_frac = frac_mul_signed(x0.frac_bits(), f1)
        .wrapping_add(frac_mul_signed(y0.frac_bits(), f2));
    for m in 1..=n {
        // e(f1 x0 + f2 (y0 + m x0)) = e(static + f2 m {x0})
        let c = (f2 as i128) * (m as i128);
        let c64 = i64::try_from(c)
            .map_err(|_| Error::overflow("skew frequency exceeds i64".to_string()))?;
        let frac = static_frac.wrapping_add(frac_mul_signed(x0.frac_bits(), c64));
        acc.add(unit_phase(frac));
    }
    Ok(acc.total() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> Fixed128 {
        Fixed128::parse("sqrt2").unwrap()
    }

    #[test]
    fn weyl_trivial_and_bound() {
        assert!((weyl_sum(&Fixed128::ZERO, 100) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // theta = 1/2, even N: exact pairwise cancellation
        let half = Fixed128::parse("0.5").unwrap();
        assert!(weyl_sum(&half, 100).norm() < 1e-14);
        // generic theta satisfies the geometric bound
        for (num, den) in [(1u64, 3u64), (2, 7), (5, 11)] {
            let theta = rational_fixed(num, den);
            let v = weyl_sum(&theta, 10_000).norm();
            assert!(v <= weyl_bound(&theta, 10_000) + 1e-12);
        }
        let v = weyl_sum(&s2(), 10_000).norm();
        assert!(v <= weyl_bound(&s2(), 10_000));
    }

    fn rational_fixed(num: u64, den: u64) -> Fixed128 {
        // exact truncated binary expansion of num/den in two 64-bit halves
        let d = den as u128;
        let q1 = ((num as u128) << 64) / d;
        let r1 = ((num as u128) << 64) % d;
        let q2 = (r1 << 64) / d;
        Fixed128::from_parts(0, (q1 << 64) | q2)
    }

    #[test]
    fn prime_phase_examples() {
        let sieve = SegmentedFactorSieve::build(1_000_000).unwrap();
        let v = prime_phase_average(&Fixed128::ZERO, 1, 1000, &sieve).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        // beta = 1/3: primes split between classes 1 and 2 mod 3, average
        // tends to (e(1/3) + e(2/3))/2 = -1/2
        let third = Fixed128::parse(
            "0.33333333333333333333333333333333333333333333333333",
        )
        .unwrap();
        let v = prime_phase_average(&third, 1, 1_000_000, &sieve).unwrap();
        assert!((v - Complex64::new(-0.5, 0.0)).norm() < 0.01, "{v}");
        assert!(prime_phase_average(&s2(), 4, 3, &sieve).is_err());
    }

    #[test]
    fn analytic_rotation_values() {
        // u = 1, v = 1, F_0 = e(y), F_1 = e(-y), shifts (0, n): e(-n alpha)
        let rot = TorusRotation::new(1, vec![s2()]).unwrap();
        let f0 = TrigMonomial { cyclic_freq: 0, torus_freq: vec![1] };
        let f1 = TrigMonomial { cyclic_freq: 0, torus_freq: vec![-1] };
        for n in [0i64, 1, 5, 12] {
            let v = rotation_correlation_analytic(&rot, &[f0.clone(), f1.clone()], &[0, n]).unwrap();
            let expect = unit_phase(frac_mul_signed(s2().frac_bits(), -n));
            assert!((v - expect).norm() < 1e-14, "n = {n}");
        }
        // frequency sums that fail the vanishing conditions give exactly 0
        let v = rotation_correlation_analytic(&rot, &[f0.clone(), f0.clone()], &[0, 1]).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        // constants integrate to 1
        let c = TrigMonomial::constant(1);
        let v = rotation_correlation_analytic(&rot, &[c.clone(), c], &[0, 3]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn analytic_is_translation_invariant() {
        let rot = TorusRotation::new(4, vec![s2(), Fixed128::parse("sqrt3").unwrap()]).unwrap();
        let f0 = TrigMonomial { cyclic_freq: 1, torus_freq: vec![2, -1] };
        let f1 = TrigMonomial { cyclic_freq: 3, torus_freq: vec![-2, 1] };
        let base = rotation_correlation_analytic(&rot, &[f0.clone(), f1.clone()], &[0, 5]).unwrap();
        for h in [1i64, 7, 100] {
            let moved =
                rotation_correlation_analytic(&rot, &[f0.clone(), f1.clone()], &[h, 5 + h]).unwrap();
            assert!((base - moved).norm() < 1e-12, "h = {h}");
        }
    }

    #[test]
    fn orbit_matches_analytic_for_ergodic_rotation() {
        let rot = TorusRotation::new(1, vec![s2()]).unwrap();
        assert!(rot.looks_ergodic(20));
        let f0 = TrigMonomial { cyclic_freq: 0, torus_freq: vec![1] };
        let f1 = TrigMonomial { cyclic_freq: 0, torus_freq: vec![-1] };
        let shifts = [0i64, 1];
        let analytic = rotation_correlation_analytic(&rot, &[f0.clone(), f1.clone()], &shifts).unwrap();
        let orbit = rotation_correlation_orbit(
            &rot,
            &[f0, f1],
            &shifts,
            100_000,
            0,
            &[Fixed128::parse("0.3").unwrap()],
        )
        .unwrap();
        // this pair is constant along the orbit, so they agree exactly
        assert!((analytic - orbit).norm() < 1e-12);
        // a genuinely averaging case: single factor e(y) tends to integral 0
        let f = TrigMonomial { cyclic_freq: 0, torus_freq: vec![1] };
        let orbit =
            rotation_correlation_orbit(&rot, &[f], &[0], 1_000_000, 0, &[Fixed128::ZERO]).unwrap();
        assert!(orbit.norm() < 1e-3, "{}", orbit.norm());
    }

    #[test]
    fn ergid2_structural_cases() {
        let sieve = SegmentedFactorSieve::build(100_000).unwrap();
        let rot = TorusRotation::new(1, vec![s2()]).unwrap();
        // constants: both sides exactly 1
        let c = TrigMonomial::constant(1);
        let r = ergid2_check(&rot, &[c.clone(), c], &[0, 1], 3, 1, 10_000, 10_000, &sieve).unwrap();
        assert!((r.lhs - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(r.gap < 1e-13);
        assert_eq!(r.predicted, Complex64::new(1.0, 0.0));
        // nonvanishing frequency sum: both sides exactly 0
        let f = TrigMonomial { cyclic_freq: 0, torus_freq: vec![1] };
        let r = ergid2_check(&rot, &[f.clone(), f], &[0, 1], 3, 1, 10_000, 10_000, &sieve).unwrap();
        assert_eq!(r.lhs, Complex64::new(0.0, 0.0));
        assert_eq!(r.rhs, Complex64::new(0.0, 0.0));
        // u must divide r0
        let rot4 = TorusRotation::new(4, vec![s2()]).unwrap();
        let c4 = TrigMonomial::constant(1);
        assert!(ergid2_check(&rot4, &[c4.clone(), c4], &[0, 1], 3, 1, 100, 100, &sieve).is_err());
    }

    #[test]
    fn skew_orbit_cases() {
        // constant function
        let v = skew_orbit_average(&s2(), &Fixed128::ZERO, (0, 0), 1000).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        // F = e(y), x0 = sqrt2: |E e(n sqrt2)| obeys the Weyl bound
        let v = skew_orbit_average(&s2(), &Fixed128::ZERO, (0, 1), 10_000).unwrap();
        assert!(v.norm() <= weyl_bound(&s2(), 10_000));
        // rational x0 = 1/4: finite cycle, exact geometric sum
        let quarter = Fixed128::parse("0.25").unwrap();
        let v = skew_orbit_average(&quarter, &Fixed128::ZERO, (0, 1), 4000).unwrap();
        // sum over the 4-cycle e(m/4) vanishes
        assert!(v.norm() < 1e-12);
    }
}
