//! Correlation experiments: fixed-shift averages, composition with
//! deterministic sequences, shifts from independent families, the product
//! identity for real-valued functions, sign-pattern densities, discrepancy
//! growth, and the prime-dilation identity.
//!
//! Finite-scale values are convergence traces, never asserted limits; the
//! desk-scale tolerances quoted in experiment configs are recorded in
//! reports, not built into the math here.

use crate::averaging::{averaged_trace, averaged_trace_real, AverageKind, CheckpointSchedule, ConvergenceReport};
use crate::error::{Error, Result};
use crate::multfun::{MultFnSpec, Sampler};
use crate::numeric::{weighted_trace, Kahan, BLOCK_LEN};
use crate::sequences::Generator;
use crate::sieve::{SegmentedFactorSieve, Window};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

/// Where the shift of each factor comes from.
#[derive(Debug, Clone)]
pub enum ShiftSource {
    /// f_j(m + n_j) with explicit n_0..n_l
    Fixed { shifts: Vec<u64> },
    /// f_0(m) * prod_{j>=1} f_j(m + a_j(point)); n_0 is pinned to 0
    FamilyAt { family: crate::sequences::SequenceFamily, point: Vec<u64> },
    /// prod_j f_j(a(m + n_j)) along a strictly increasing sequence
    Composition { seq: Generator, shifts: Vec<u64> },
}

impl ShiftSource {
    pub fn descriptor(&self) -> String {
        match self {
            ShiftSource::Fixed { shifts } => format!("fixed@{}", join_u64(shifts)),
            ShiftSource::FamilyAt { family, point } => format!(
                "family[{}]@{}",
                family.descriptors().join(";"),
                join_u64(point)
            ),
            ShiftSource::Composition { seq, shifts } => {
                format!("compose[{}]@{}", seq.descriptor(), join_u64(shifts))
            }
        }
    }
}

fn join_u64(xs: &[u64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// One correlation experiment.
#[derive(Debug, Clone)]
pub struct CorrelationSpec {
    pub functions: Vec<MultFnSpec>,
    pub source: ShiftSource,
    pub kind: AverageKind,
    pub schedule: CheckpointSchedule,
}

/// Trace plus the spec echo needed to reproduce it.
#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub functions: Vec<String>,
    pub source: String,
    pub kind: AverageKind,
    pub report: ConvergenceReport,
}

/// Resolved per-factor index rule.
enum IndexPlan<'a> {
    Shifted(&'a [u64]),
    Composed { seq: &'a Generator, shifts: &'a [u64] },
}

impl IndexPlan<'_> {
    #[inline]
    fn index(&self, j: usize, m: u64) -> u64 {
        match self {
            IndexPlan::Shifted(shifts) => m + shifts[j],
            IndexPlan::Composed { seq, shifts } => seq
                .evaluate(&[m + shifts[j]])
                .expect("composition range validated up front"),
        }
    }
}

/// Deduplicate samplers for repeated function specs (two lambdas share one
/// table).
fn build_samplers(
    functions: &[MultFnSpec],
    window: Window,
    sieve: &SegmentedFactorSieve,
) -> Result<Vec<Arc<Sampler>>> {
    let mut cache: HashMap<String, Arc<Sampler>> = HashMap::new();
    let mut out = Vec::with_capacity(functions.len());
    for f in functions {
        let key = f.descriptor();
        let sampler = match cache.get(&key) {
            Some(s) if !key.starts_with("custom:") => s.clone(),
            _ => {
                let s = Arc::new(f.sampler(window, sieve)?);
                cache.insert(key, s.clone());
                s
            }
        };
        out.push(sampler);
    }
    Ok(out)
}

fn check_range(needed: u64, sieve: &SegmentedFactorSieve, what: &str) -> Result<()> {
    if needed > sieve.limit() {
        return Err(Error::domain(format!(
            "{what} needs values up to {needed}, beyond the sieve limit {}",
            sieve.limit()
        )));
    }
    Ok(())
}

/// Validate that a sequence is strictly increasing up to `count` and return
/// its value there (the largest index the experiment touches).
fn validate_increasing(seq: &Generator, count: u64) -> Result<u64> {
    let mut prev = 0u64;
    let mut last = 0u64;
    for n in 1..=count {
        let v = seq.evaluate(&[n])?;
        if n > 1 && v <= prev {
            return Err(Error::domain(format!(
                "sequence {} is not strictly increasing at n = {n}",
                seq.descriptor()
            )));
        }
        prev = v;
        last = v;
    }
    Ok(last)
}

fn trace_product(
    samplers: &[Arc<Sampler>],
    plan: &IndexPlan<'_>,
    kind: AverageKind,
    checkpoints: &[u64],
) -> ConvergenceReport {
    let all_real = samplers.iter().all(|s| s.is_real());
    if all_real {
        averaged_trace_real(kind, checkpoints, |m| {
            let mut acc = 1.0f64;
            for (j, s) in samplers.iter().enumerate() {
                acc *= s.get_real(plan.index(j, m));
            }
            acc
        })
    } else {
        averaged_trace(kind, checkpoints, |m| {
            let mut acc = Complex64::new(1.0, 0.0);
            for (j, s) in samplers.iter().enumerate() {
                acc *= s.get(plan.index(j, m));
            }
            acc
        })
    }
}

/// Run any correlation spec; the per-mode helpers below are the documented
/// entry points.
pub fn run_correlation(spec: &CorrelationSpec, sieve: &SegmentedFactorSieve) -> Result<CorrelationResult> {
    match &spec.source {
        ShiftSource::Fixed { shifts } => {
            corr_fixed_shifts(&spec.functions, shifts, &spec.schedule, spec.kind, sieve)
        }
        ShiftSource::FamilyAt { family, point } => {
            if spec.kind != AverageKind::Logarithmic {
                return Err(Error::domain(
                    "family-shift correlations are logarithmic".to_string(),
                ));
            }
            corr_shifted_by_family(&spec.functions, family, point, &spec.schedule, sieve)
        }
        ShiftSource::Composition { seq, shifts } => {
            if spec.kind != AverageKind::Logarithmic {
                return Err(Error::domain(
                    "deterministic-composition correlations are logarithmic".to_string(),
                ));
            }
            corr_along_deterministic(&spec.functions, seq, shifts, &spec.schedule, sieve)
        }
    }
}

/// (l)E_{m<=N_k} prod_j f_j(m + n_j).
pub fn corr_fixed_shifts(
    functions: &[MultFnSpec],
    shifts: &[u64],
    schedule: &CheckpointSchedule,
    kind: AverageKind,
    sieve: &SegmentedFactorSieve,
) -> Result<CorrelationResult> {
    if functions.is_empty() || functions.len() != shifts.len() {
        return Err(Error::domain(format!(
            "need one shift per function: {} functions, {} shifts",
            functions.len(),
            shifts.len()
        )));
    }
    let checkpoints = schedule.points();
    let n_max = *checkpoints.last().unwrap();
    let max_shift = *shifts.iter().max().unwrap();
    check_range(n_max + max_shift, sieve, "fixed-shift correlation")?;
    let samplers = build_samplers(functions, Window::new(1, n_max + max_shift)?, sieve)?;
    let report = trace_product(&samplers, &IndexPlan::Shifted(shifts), kind, &checkpoints);
    Ok(CorrelationResult {
        functions: functions.iter().map(|f| f.descriptor()).collect(),
        source: ShiftSource::Fixed { shifts: shifts.to_vec() }.descriptor(),
        kind,
        report,
    })
}

/// lE_{m<=N_k} prod_j f_j(a(m + n_j)) for a strictly increasing a, with a
/// evaluated by generator at every m.
pub fn corr_along_deterministic(
    functions: &[MultFnSpec],
    seq: &Generator,
    shifts: &[u64],
    schedule: &CheckpointSchedule,
    sieve: &SegmentedFactorSieve,
) -> Result<CorrelationResult> {
    if functions.is_empty() || functions.len() != shifts.len() {
        return Err(Error::domain(format!(
            "need one shift per function: {} functions, {} shifts",
            functions.len(),
            shifts.len()
        )));
    }
    let checkpoints = schedule.points();
    let n_max = *checkpoints.last().unwrap();
    let max_shift = *shifts.iter().max().unwrap();
    let top = validate_increasing(seq, n_max + max_shift)?;
    check_range(top, sieve, "deterministic composition")?;
    let samplers = build_samplers(functions, Window::new(1, top)?, sieve)?;
    let report = trace_product(
        &samplers,
        &IndexPlan::Composed { seq, shifts },
        AverageKind::Logarithmic,
        &checkpoints,
    );
    Ok(CorrelationResult {
        functions: functions.iter().map(|f| f.descriptor()).collect(),
        source: ShiftSource::Composition { seq: seq.clone(), shifts: shifts.to_vec() }.descriptor(),
        kind: AverageKind::Logarithmic,
        report,
    })
}

/// lE_{m<=N_k} f_0(m) prod_{j>=1} f_j(m + a_j(point)); the j = 0 factor
/// rides at shift 0 by construction.
pub fn corr_shifted_by_family(
    functions: &[MultFnSpec],
    family: &crate::sequences::SequenceFamily,
    point: &[u64],
    schedule: &CheckpointSchedule,
    sieve: &SegmentedFactorSieve,
) -> Result<CorrelationResult> {
    if functions.len() != family.len() + 1 {
        return Err(Error::domain(format!(
            "family mode needs f_0..f_l for l = {} members; got {} functions",
            family.len(),
            functions.len()
        )));
    }
    let mut shifts = vec![0u64];
    for j in 0..family.len() {
        shifts.push(family.evaluate(j, point)?);
    }
    let inner = corr_fixed_shifts(functions, &shifts, schedule, AverageKind::Logarithmic, sieve)?;
    Ok(CorrelationResult {
        source: ShiftSource::FamilyAt { family: family.clone(), point: point.to_vec() }.descriptor(),
        ..inner
    })
}

/// Finite-scale check of the deterministic correlation identity:
/// LHS = lE_{m<=Ni} prod f_j(a(m+n_j)),
/// RHS = lE_{n<=No} lE_{m<=Ni} prod f_j(m + a(n+n_j)).
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

pub fn identity_check_deterministic(
    functions: &[MultFnSpec],
    seq: &Generator,
    shifts: &[u64],
    n_outer: u64,
    n_inner: u64,
    sieve: &SegmentedFactorSieve,
) -> Result<IdentityCheck> {
    if functions.is_empty() || functions.len() != shifts.len() {
        return Err(Error::domain("need one shift per function".to_string()));
    }
    let max_shift = *shifts.iter().max().unwrap();
    let top_a = validate_increasing(seq, n_outer.max(n_inner) + max_shift)?;
    check_range(top_a.max(n_inner + top_a), sieve, "identity check")?;

    let lhs = corr_along_deterministic(
        functions,
        seq,
        shifts,
        &CheckpointSchedule::single(n_inner),
        sieve,
    )?
    .report
    .final_value();

    let samplers = build_samplers(functions, Window::new(1, n_inner + top_a)?, sieve)?;
    let all_real = samplers.iter().all(|s| s.is_real());
    let inner_at = |n: u64| -> Complex64 {
        let s: Vec<u64> = shifts
            .iter()
            .map(|&nj| seq.evaluate(&[n + nj]).expect("validated range"))
            .collect();
        if all_real {
            crate::averaging::averaged_trace_real(
                AverageKind::Logarithmic,
                &[n_inner],
                |m| {
                    let mut acc = 1.0;
                    for (j, smp) in samplers.iter().enumerate() {
                        acc *= smp.get_real(m + s[j]);
                    }
                    acc
                },
            )
            .final_value()
        } else {
            averaged_trace(AverageKind::Logarithmic, &[n_inner], |m| {
                let mut acc = Complex64::new(1.0, 0.0);
                for (j, smp) in samplers.iter().enumerate() {
                    acc *= smp.get(m + s[j]);
                }
                acc
            })
            .final_value()
        }
    };
    let rhs = averaged_trace(AverageKind::Logarithmic, &[n_outer], inner_at).final_value();
    Ok(IdentityCheck { lhs, rhs, gap: (lhs - rhs).norm() })
}

/// Product identity for real-valued functions: outer Cesaro over family
/// shifts against the product of individual logarithmic means. Both
/// right-hand normalizations are reported: the product over j >= 1 and the
/// product over j >= 0.
#[derive(Debug, Clone)]
pub struct ProductIdentityCheck {
    pub lhs: f64,
    /// prod_{j=1}^{l} lE f_j
    pub rhs_product_tail: f64,
    /// prod_{j=0}^{l} lE f_j
    pub rhs_product_full: f64,
    pub individual_means: Vec<f64>,
    pub gap_tail: f64,
    pub gap_full: f64,
}

pub fn product_identity_check(
    functions: &[MultFnSpec],
    family: &crate::sequences::SequenceFamily,
    n_outer: u64,
    n_inner: u64,
    sieve: &SegmentedFactorSieve,
) -> Result<ProductIdentityCheck> {
    if functions.len() != family.len() + 1 {
        return Err(Error::domain(format!(
            "product identity needs f_0..f_l for l = {} members; got {}",
            family.len(),
            functions.len()
        )));
    }
    for f in functions {
        if !f.is_real_valued() {
            return Err(Error::domain(format!(
                "product identity requires real-valued functions; `{}` is complex-valued \
                 (the identity fails for complex inputs)",
                f.descriptor()
            )));
        }
    }
    let r = family.arity();
    let lattice = (n_outer as u128).pow(r as u32);
    if lattice > 1 << 30 {
        return Err(Error::resource(format!(
            "outer lattice [{n_outer}]^{r} has {lattice} points; shrink the outer range"
        )));
    }
    let lattice = lattice as u64;
    // largest shift over the lattice fixes the sampler window
    let mut max_shift = 0u64;
    let mut point = vec![1u64; r];
    for idx in 0..lattice {
        decode_point(idx, n_outer, &mut point);
        for j in 0..family.len() {
            max_shift = max_shift.max(family.evaluate(j, &point)?);
        }
    }
    check_range(n_inner + max_shift, sieve, "product identity")?;
    let samplers = build_samplers(functions, Window::new(1, n_inner + max_shift)?, sieve)?;

    let inner_weights = precomputed_log_weights(n_inner);
    let inner_at = |idx: u64| -> f64 {
        let mut point = vec![1u64; r];
        decode_point(idx - 1, n_outer, &mut point);
        let mut shifts = Vec::with_capacity(functions.len());
        shifts.push(0u64);
        for j in 0..family.len() {
            shifts.push(family.evaluate(j, &point).expect("validated range"));
        }
        let mut num = Kahan::<f64>::new();
        for m in 1..=n_inner {
            let mut acc = inner_weights.w[m as usize];
            for (j, smp) in samplers.iter().enumerate() {
                acc *= smp.get_real(m + shifts[j]);
            }
            num.add(acc);
        }
        num.total() / inner_weights.h
    };
    let lhs = weighted_trace(&[lattice], inner_at, |_| 1.0)[0].1 / lattice as f64;

    let mut individual_means = Vec::with_capacity(functions.len());
    for (j, smp) in samplers.iter().enumerate() {
        let mean = averaged_trace_real(AverageKind::Logarithmic, &[n_inner], |m| smp.get_real(m))
            .final_value()
            .re;
        individual_means.push(mean);
        let _ = j;
    }
    let rhs_product_tail: f64 = individual_means[1..].iter().product();
    let rhs_product_full: f64 = individual_means.iter().product();
    Ok(ProductIdentityCheck {
        lhs,
        rhs_product_tail,
        rhs_product_full,
        individual_means,
        gap_tail: (lhs - rhs_product_tail).abs(),
        gap_full: (lhs - rhs_product_full).abs(),
    })
}

struct LogWeights {
    w: Vec<f64>,
    h: f64,
}

fn precomputed_log_weights(n: u64) -> LogWeights {
    let mut w = vec![0f64; (n + 1) as usize];
    let mut h = Kahan::<f64>::new();
    for m in 1..=n {
        w[m as usize] = 1.0 / m as f64;
        h.add(w[m as usize]);
    }
    LogWeights { w, h: h.total() }
}

fn decode_point(idx: u64, horizon: u64, point: &mut [u64]) {
    let mut c = idx;
    for slot in point.iter_mut() {
        *slot = c % horizon + 1;
        c /= horizon;
    }
}

/// Logarithmic densities of all 2^(l+1) sign patterns in one pass.
#[derive(Debug, Clone)]
pub struct PatternDensities {
    /// epsilon vector (entries +-1, index j = factor j) and its trace
    pub patterns: Vec<(Vec<i8>, ConvergenceReport)>,
}

impl PatternDensities {
    /// The trace of one epsilon vector.
    pub fn density(&self, eps: &[i8]) -> Option<&ConvergenceReport> {
        self.patterns.iter().find(|(e, _)| e == eps).map(|(_, r)| r)
    }
}

/// Per checkpoint, lE_{m<=N_k} prod_j (1 + eps_j f_j(idx_j(m)))/2 for every
/// epsilon at once: each m lands in exactly one pattern bin, so the bins
/// partition the harmonic mass and the densities sum to 1 exactly.
pub fn pattern_density(
    functions: &[MultFnSpec],
    source: &ShiftSource,
    schedule: &CheckpointSchedule,
    sieve: &SegmentedFactorSieve,
) -> Result<PatternDensities> {
    for f in functions {
        if !f.is_pm_one() {
            return Err(Error::domain(format!(
                "sign patterns need {{-1,+1}}-valued functions; `{}` is not",
                f.descriptor()
            )));
        }
    }
    if functions.len() > 6 {
        return Err(Error::resource("pattern fan-out past 2^7 bins".to_string()));
    }
    let checkpoints = schedule.points();
    let n_max = *checkpoints.last().unwrap();
    let (plan_shifts, seq_opt, window_top): (Vec<u64>, Option<&Generator>, u64) = match source {
        ShiftSource::Fixed { shifts } => {
            if shifts.len() != functions.len() {
                return Err(Error::domain("need one shift per function".to_string()));
            }
            let top = n_max + shifts.iter().max().unwrap();
            (shifts.clone(), None, top)
        }
        ShiftSource::Composition { seq, shifts } => {
            if shifts.len() != functions.len() {
                return Err(Error::domain("need one shift per function".to_string()));
            }
            let top = validate_increasing(seq, n_max + shifts.iter().max().unwrap())?;
            (shifts.clone(), Some(seq), top)
        }
        ShiftSource::FamilyAt { family, point } => {
            let mut shifts = vec![0u64];
            for j in 0..family.len() {
                shifts.push(family.evaluate(j, point)?);
            }
            if shifts.len() != functions.len() {
                return Err(Error::domain(format!(
                    "family mode needs f_0..f_l for l = {} members",
                    family.len()
                )));
            }
            let top = n_max + shifts.iter().max().unwrap();
            (shifts, None, top)
        }
    };
    check_range(window_top, sieve, "pattern density")?;
    let samplers = build_samplers(functions, Window::new(1, window_top)?, sieve)?;
    let bins = 1usize << functions.len();

    // fixed-block binned reduction, same order contract as weighted_trace
    let bounds = pattern_blocks(n_max, &checkpoints);
    #[derive(Clone)]
    struct BinSums {
        num: Vec<f64>,
        den: f64,
    }
    let plan_index = |j: usize, m: u64| -> u64 {
        match seq_opt {
            None => m + plan_shifts[j],
            Some(seq) => seq.evaluate(&[m + plan_shifts[j]]).expect("validated range"),
        }
    };
    let block_sums: Vec<BinSums> = bounds
        .par_iter()
        .map(|&(a, b)| {
            let mut num = vec![Kahan::<f64>::new(); bins];
            let mut den = Kahan::<f64>::new();
            for m in a..=b {
                let w = 1.0 / m as f64;
                let mut code = 0usize;
                for (j, s) in samplers.iter().enumerate() {
                    let v = s.get_real(plan_index(j, m));
                    debug_assert!(v == 1.0 || v == -1.0);
                    code |= usize::from(v < 0.0) << j;
                }
                num[code].add(w);
                den.add(w);
            }
            BinSums { num: num.iter().map(|k| k.total()).collect(), den: den.total() }
        })
        .collect();

    let mut fold_num = vec![Kahan::<f64>::new(); bins];
    let mut fold_den = Kahan::<f64>::new();
    let mut per_checkpoint: Vec<Vec<f64>> = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0usize;
    for (i, blk) in block_sums.iter().enumerate() {
        for (f, &v) in fold_num.iter_mut().zip(&blk.num) {
            f.add(v);
        }
        fold_den.add(blk.den);
        while next_cp < checkpoints.len() && checkpoints[next_cp] == bounds[i].1 {
            per_checkpoint.push(fold_num.iter().map(|k| k.total() / fold_den.total()).collect());
            next_cp += 1;
        }
    }

    let mut patterns = Vec::with_capacity(bins);
    for code in 0..bins {
        let eps: Vec<i8> = (0..functions.len())
            .map(|j| if code >> j & 1 == 1 { -1 } else { 1 })
            .collect();
        let points: Vec<(u64, Complex64)> = checkpoints
            .iter()
            .zip(&per_checkpoint)
            .map(|(&n, row)| (n, Complex64::new(row[code], 0.0)))
            .collect();
        patterns.push((eps, ConvergenceReport::from_points(AverageKind::Logarithmic, points)));
    }
    Ok(PatternDensities { patterns })
}

fn pattern_blocks(n_max: u64, cuts: &[u64]) -> Vec<(u64, u64)> {
    // same grid rule as the kahan module: BLOCK_LEN-aligned plus cuts
    let mut bounds = Vec::new();
    let mut a = 0u64;
    let mut cut_iter = cuts.iter().copied().peekable();
    while a < n_max {
        let aligned = (a / BLOCK_LEN + 1) * BLOCK_LEN;
        let mut b = aligned.min(n_max);
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

/// Running maximum of |sum_{k<=n} f(a(k))| at each checkpoint.
pub fn discrepancy_growth(
    f: &MultFnSpec,
    seq: &Generator,
    schedule: &CheckpointSchedule,
    sieve: &SegmentedFactorSieve,
) -> Result<Vec<(u64, f64)>> {
    let checkpoints = schedule.points();
    let n_max = *checkpoints.last().unwrap();
    let top = validate_increasing(seq, n_max)?;
    check_range(top, sieve, "discrepancy growth")?;
    let sampler = f.sampler(Window::new(1, top)?, sieve)?;
    let mut sum = Kahan::<Complex64>::new();
    let mut running_max = 0f64;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut cp = 0usize;
    for n in 1..=n_max {
        sum.add(sampler.get(seq.evaluate(&[n])?));
        running_max = running_max.max(sum.total().norm());
        if cp < checkpoints.len() && checkpoints[cp] == n {
            out.push((n, running_max));
            cp += 1;
        }
    }
    Ok(out)
}

/// Finite-scale check of the prime-dilation identity:
/// LHS = lE_{m<=N} prod f_j(m + n_j),
/// RHS = E_{p in P_d, p<=P} lE_{m<=N} prod f_j(m + p n_j).
#[derive(Debug, Clone)]
pub struct PrimeDilationCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
    pub primes_used: usize,
}

pub fn prime_dilation_identity_check(
    functions: &[MultFnSpec],
    shifts: &[u64],
    class_d: u64,
    prime_bound: u64,
    n: u64,
    sieve: &SegmentedFactorSieve,
) -> Result<PrimeDilationCheck> {
    if functions.is_empty() || functions.len() != shifts.len() {
        return Err(Error::domain("need one shift per function".to_string()));
    }
    let max_shift = *shifts.iter().max().unwrap();
    check_range(n + prime_bound * max_shift, sieve, "prime dilation identity")?;
    let primes = sieve.primes_up_to(prime_bound, Some(class_d))?;
    if primes.is_empty() {
        return Err(Error::domain(format!(
            "no primes <= {prime_bound} in the class {class_d}Z+1"
        )));
    }
    let samplers = build_samplers(functions, Window::new(1, n + prime_bound * max_shift)?, sieve)?;
    let all_real = samplers.iter().all(|s| s.is_real());
    let corr_at = |dilation: u64| -> Complex64 {
        if all_real {
            averaged_trace_real(AverageKind::Logarithmic, &[n], |m| {
                let mut acc = 1.0;
                for (j, s) in samplers.iter().enumerate() {
                    acc *= s.get_real(m + dilation * shifts[j]);
                }
                acc
            })
            .final_value()
        } else {
            averaged_trace(AverageKind::Logarithmic, &[n], |m| {
                let mut acc = Complex64::new(1.0, 0.0);
                for (j, s) in samplers.iter().enumerate() {
                    acc *= s.get(m + dilation * shifts[j]);
                }
                acc
            })
            .final_value()
        }
    };
    let lhs = corr_at(1);
    let mut acc = Kahan::<Complex64>::new();
    for &p in &primes {
        acc.add(corr_at(p));
    }
    let rhs = acc.total() / primes.len() as f64;
    Ok(PrimeDilationCheck { lhs, rhs, gap: (lhs - rhs).norm(), primes_used: primes.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve() -> SegmentedFactorSieve {
        SegmentedFactorSieve::build(200_000).unwrap()
    }

    fn lam() -> MultFnSpec {
        MultFnSpec::liouville()
    }

    #[test]
    fn sieve_range_violations_are_rejected() {
        let s = sieve();
        let sched = CheckpointSchedule::single(400_000);
        let err = corr_fixed_shifts(
            &[lam(), lam()],
            &[0, 1],
            &sched,
            AverageKind::Logarithmic,
            &SegmentedFactorSieve::build(100_000).unwrap(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("sieve limit"), "{err}");
        let _ = s;
    }

    #[test]
    fn all_ones_is_one_everywhere() {
        let s = sieve();
        let sched = CheckpointSchedule::new(10, 10.0, 1000).unwrap();
        let r = corr_fixed_shifts(
            &[MultFnSpec::one(), MultFnSpec::one()],
            &[0, 1],
            &sched,
            AverageKind::Logarithmic,
            &s,
        )
        .unwrap();
        for (_, v) in &r.report.points {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn two_point_log_hand_oracle_at_ten() {
        // lE_{m<=10} lambda(m) lambda(m+1) from the lambda table on [1,11]:
        // products -1,1,-1,-1,-1,-1,1,-1,1,-1 weighted 1/m over H_10.
        let s = sieve();
        let sched = CheckpointSchedule::single(10);
        let r = corr_fixed_shifts(&[lam(), lam()], &[0, 1], &sched, AverageKind::Logarithmic, &s)
            .unwrap();
        let v = r.report.final_value().re;
        let num = -1.0 + 0.5 - 1.0 / 3.0 - 0.25 - 0.2 - 1.0 / 6.0 + 1.0 / 7.0 - 0.125 + 1.0 / 9.0
            - 0.1;
        let expect = num / 2.9289682539682538;
        assert!((v - expect).abs() < 1e-12);
        assert!((v + 0.485165).abs() < 1e-6);
    }

    #[test]
    fn identity_composition_matches_fixed_bitwise() {
        let s = sieve();
        let sched = CheckpointSchedule::new(100, 10.0, 50_000).unwrap();
        let fixed = corr_fixed_shifts(
            &[lam(), lam()],
            &[0, 2],
            &sched,
            AverageKind::Logarithmic,
            &s,
        )
        .unwrap();
        let ident = Generator::parse("poly:0,1").unwrap();
        let composed =
            corr_along_deterministic(&[lam(), lam()], &ident, &[0, 2], &sched, &s).unwrap();
        for ((n1, v1), (n2, v2)) in fixed.report.points.iter().zip(&composed.report.points) {
            assert_eq!(n1, n2);
            assert_eq!(v1.re.to_bits(), v2.re.to_bits());
            assert_eq!(v1.im.to_bits(), v2.im.to_bits());
        }
    }

    #[test]
    fn family_mode_pins_zero_shift() {
        let s = sieve();
        let fam = crate::sequences::SequenceFamily::parse(&["beatty:sqrt2:0", "beatty:sqrt3:0"]).unwrap();
        let sched = CheckpointSchedule::single(10_000);
        let r = corr_shifted_by_family(&[lam(), lam(), lam()], &fam, &[100], &sched, &s).unwrap();
        // same thing through fixed shifts
        let a1 = fam.evaluate(0, &[100]).unwrap();
        let a2 = fam.evaluate(1, &[100]).unwrap();
        let fixed = corr_fixed_shifts(
            &[lam(), lam(), lam()],
            &[0, a1, a2],
            &sched,
            AverageKind::Logarithmic,
            &s,
        )
        .unwrap();
        assert_eq!(r.report.final_value(), fixed.report.final_value());
        // arity mismatch is rejected
        assert!(corr_shifted_by_family(&[lam(), lam()], &fam, &[100], &sched, &s).is_err());
    }

    #[test]
    fn correlations_stay_in_unit_disc_and_real_for_real_inputs() {
        let s = sieve();
        let sched = CheckpointSchedule::new(10, 4.0, 10_000).unwrap();
        let r = corr_fixed_shifts(
            &[lam(), MultFnSpec::moebius()],
            &[1, 3],
            &sched,
            AverageKind::Logarithmic,
            &s,
        )
        .unwrap();
        for (_, v) in &r.report.points {
            assert!(v.norm() <= 1.0 + 1e-12);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn pattern_densities_partition_unity() {
        let s = sieve();
        let sched = CheckpointSchedule::new(100, 10.0, 100_000).unwrap();
        let src = ShiftSource::Fixed { shifts: vec![0, 1, 2] };
        let d = pattern_density(&[lam(), lam(), lam()], &src, &sched, &s).unwrap();
        assert_eq!(d.patterns.len(), 8);
        let k = d.patterns[0].1.points.len();
        for i in 0..k {
            let total: f64 = d.patterns.iter().map(|(_, r)| r.points[i].1.re).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // constant +1 function: all-plus pattern has density 1
        let d = pattern_density(
            &[MultFnSpec::one()],
            &ShiftSource::Fixed { shifts: vec![0] },
            &sched,
            &s,
        )
        .unwrap();
        assert_eq!(d.density(&[1]).unwrap().final_value().re, 1.0);
        assert_eq!(d.density(&[-1]).unwrap().final_value().re, 0.0);
        // mu is not +-1-valued
        assert!(pattern_density(
            &[MultFnSpec::moebius()],
            &ShiftSource::Fixed { shifts: vec![0] },
            &sched,
            &s
        )
        .is_err());
    }

    #[test]
    fn discrepancy_hand_values() {
        let s = sieve();
        let ident = Generator::parse("poly:0,1").unwrap();
        // lambda partial sums on [1,10]: 1,0,-1,0,-1,0,-1,-2,-1,0
        let d = discrepancy_growth(&lam(), &ident, &CheckpointSchedule::single(10), &s).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].1 - 2.0).abs() < 1e-14);
        // constant one: max = N
        let d = discrepancy_growth(&MultFnSpec::one(), &ident, &CheckpointSchedule::single(50), &s)
            .unwrap();
        assert!((d[0].1 - 50.0).abs() < 1e-12);
    }

    #[test]
    fn prime_dilation_trivial_cases() {
        let s = sieve();
        let r = prime_dilation_identity_check(
            &[MultFnSpec::one(), MultFnSpec::one()],
            &[0, 2],
            1,
            100,
            10_000,
            &s,
        )
        .unwrap();
        assert!(r.gap < 1e-13);
        // l = 0 case: a single factor at shift 0 is invariant under dilation
        let r = prime_dilation_identity_check(&[lam()], &[0], 1, 100, 10_000, &s).unwrap();
        assert!(r.gap < 1e-15);
        assert_eq!(r.primes_used, 25);
    }

    #[test]
    fn identity_check_trivial_and_shift_stability() {
        let s = sieve();
        let ident = Generator::parse("poly:0,1").unwrap();
        let r = identity_check_deterministic(
            &[MultFnSpec::one()],
            &ident,
            &[0],
            100,
            10_000,
            &s,
        )
        .unwrap();
        assert!((r.lhs.re - 1.0).abs() < 1e-13);
        assert!(r.gap < 1e-13);
        // lambda with a(n) = n: both sides are log-averages over aligned
        // windows; the gap is an edge effect of size O(1/log N). The
        // spec-scale bound (0.05 at N_inner = 10^6) runs in the
        // integration suite; this small instance just pins the order.
        let r =
            identity_check_deterministic(&[lam()], &ident, &[0], 100, 100_000, &s).unwrap();
        assert!(r.gap <= 0.15, "gap {}", r.gap);
    }

    #[test]
    fn product_identity_rejects_complex_and_handles_ones() {
        let s = sieve();
        let fam = crate::sequences::SequenceFamily::parse(&["beatty:sqrt2:0", "beatty:sqrt3:0"]).unwrap();
        let ones = [MultFnSpec::one(), MultFnSpec::one(), MultFnSpec::one()];
        let r = product_identity_check(&ones, &fam, 100, 1000, &s).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs_product_tail - 1.0).abs() < 1e-12);
        assert!((r.rhs_product_full - 1.0).abs() < 1e-12);
        let complex_f = [
            MultFnSpec::archimedean(1.0).unwrap(),
            MultFnSpec::one(),
            MultFnSpec::one(),
        ];
        let err = product_identity_check(&complex_f, &fam, 10, 100, &s).unwrap_err();
        assert!(err.to_string().contains("complex"));
    }
}
