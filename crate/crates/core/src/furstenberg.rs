//! Finite-scale Furstenberg correspondence: moment tables of empirical
//! systems, log-correlation admission tests, and the indicator machinery
//! (tau_y, k_y) behind the correspondence identity.
//!
//! The weak-star measure of a joint Furstenberg system never appears as an
//! object here; it is represented entirely by its finite-dimensional
//! moments, which is what every statistic downstream consumes. Different
//! checkpoint schedules legitimately stabilize to different moment tables
//! (a sequence tuple may have several non-isomorphic F-systems), so the
//! schedule is part of the system, not a tuning knob.
//!
//! Index conventions: the binary sequence y is 0-based on Z_+, sequences
//! a are 1-based, and the bridge is tau_y(j) = a(j+1) for the indicator
//! y = 1_A of the range A of a.

use crate::averaging::{averaged_trace, AverageKind, CheckpointSchedule, ConvergenceReport};
use crate::error::{Error, Result};
use crate::sequences::Generator;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Component = Arc<dyn Fn(u64) -> Complex64 + Send + Sync>;

/// One factor of a joint moment: component index, shift, conjugation flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MomentFactor {
    pub shift: i64,
    pub component: usize,
    pub conjugate: bool,
}

/// A joint moment specification prod_j x_{c_j}(m + n_j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSpec {
    pub factors: Vec<MomentFactor>,
}

impl MomentSpec {
    pub fn new(shifts: &[i64], components: &[usize], conjugate: &[bool]) -> Result<Self> {
        if shifts.len() != components.len() || shifts.len() != conjugate.len() || shifts.is_empty() {
            return Err(Error::domain("moment spec arrays must share a positive length".to_string()));
        }
        let factors = shifts
            .iter()
            .zip(components)
            .zip(conjugate)
            .map(|((&shift, &component), &conjugate)| MomentFactor { shift, component, conjugate })
            .collect();
        Ok(MomentSpec { factors })
    }

    /// Shift-translated (min shift -> 0) and sorted form; safe because the
    /// target measure is shift-invariant and the product is commutative.
    pub fn canonical(&self) -> MomentSpec {
        let min = self.factors.iter().map(|f| f.shift).min().unwrap_or(0);
        let mut factors: Vec<MomentFactor> = self
            .factors
            .iter()
            .map(|f| MomentFactor { shift: f.shift - min, ..*f })
            .collect();
        factors.sort();
        MomentSpec { factors }
    }

    /// Canonical table key, e.g. `n0.c0;n1.c0*`.
    pub fn key(&self) -> String {
        self.canonical()
            .factors
            .iter()
            .map(|f| format!("n{}.c{}{}", f.shift, f.component, if f.conjugate { "*" } else { "" }))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Finite-scale joint system: component sequences plus the append-only
/// moment table along one checkpoint schedule.
pub struct EmpiricalSystem {
    components: Vec<Component>,
    schedule: CheckpointSchedule,
    /// largest shift the component domain supports beyond n_max
    shift_slack: u64,
    table: BTreeMap<String, Vec<(u64, Complex64)>>,
}

impl EmpiricalSystem {
    /// `components[c]` must be defined on [1, schedule.n_max + shift_slack].
    pub fn new(components: Vec<Component>, schedule: CheckpointSchedule, shift_slack: u64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("empirical system needs at least one component".to_string()));
        }
        Ok(EmpiricalSystem { components, schedule, shift_slack, table: BTreeMap::new() })
    }

    pub fn schedule(&self) -> &CheckpointSchedule {
        &self.schedule
    }

    pub fn table(&self) -> &BTreeMap<String, Vec<(u64, Complex64)>> {
        &self.table
    }

    /// The moment table as JSON keyed by canonical spec strings, each key
    /// mapping to its `[N, re, im]` checkpoint rows.
    pub fn table_json(&self) -> String {
        let mut out = String::from("{");
        for (i, (key, points)) in self.table.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\n  \"{key}\": ["));
            for (j, &(n, v)) in points.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "[{n},{},{}]",
                    crate::report::fmt_f64(v.re),
                    crate::report::fmt_f64(v.im)
                ));
            }
            out.push(']');
        }
        out.push_str("\n}\n");
        out
    }

    fn factor_value(&self, f: &MomentFactor, m: u64) -> Complex64 {
        let v = (self.components[f.component])(m + f.shift as u64);
        if f.conjugate {
            v.conj()
        } else {
            v
        }
    }

    /// Trace of a moment with the shifts used literally (no translation).
    /// All shifts must be nonnegative and within the slack.
    pub fn raw_moment(&self, spec: &MomentSpec) -> Result<ConvergenceReport> {
        for f in &spec.factors {
            if f.component >= self.components.len() {
                return Err(Error::domain(format!("unknown component index {}", f.component)));
            }
            if f.shift < 0 || f.shift as u64 > self.shift_slack {
                return Err(Error::domain(format!(
                    "raw shift {} outside the configured window [0, {}]",
                    f.shift, self.shift_slack
                )));
            }
        }
        let checkpoints = self.schedule.points();
        Ok(averaged_trace(AverageKind::Logarithmic, &checkpoints, |m| {
            let mut acc = Complex64::new(1.0, 0.0);
            for f in &spec.factors {
                acc *= self.factor_value(f, m);
            }
            acc
        }))
    }

    /// Canonicalized moment, memoized in the table. A duplicate submission
    /// recomputes and must reproduce the stored trace bit for bit.
    pub fn moment(&mut self, spec: &MomentSpec) -> Result<ConvergenceReport> {
        let canon = spec.canonical();
        let key = canon.key();
        let report = self.raw_moment(&canon)?;
        if let Some(stored) = self.table.get(&key) {
            let same = stored.len() == report.points.len()
                && stored.iter().zip(&report.points).all(|(a, b)| {
                    a.0 == b.0
                        && a.1.re.to_bits() == b.1.re.to_bits()
                        && a.1.im.to_bits() == b.1.im.to_bits()
                });
            if !same {
                return Err(Error::Determinism(format!(
                    "moment `{key}` reproduced with different values"
                )));
            }
        } else {
            self.table.insert(key, report.points.clone());
        }
        Ok(report)
    }

    /// Max over the sample specs of |moment(shifts) - moment(shifts + h)|
    /// at the final checkpoint, computed on raw (untranslated) shifts.
    pub fn shift_invariance_check(&self, specs: &[MomentSpec], h: u64) -> Result<f64> {
        if h == 0 {
            return Err(Error::domain("translation amount must be >= 1".to_string()));
        }
        let mut worst = 0f64;
        for spec in specs {
            let base = self.raw_moment(spec)?.final_value();
            let shifted = MomentSpec {
                factors: spec
                    .factors
                    .iter()
                    .map(|f| MomentFactor { shift: f.shift + h as i64, ..*f })
                    .collect(),
            };
            let moved = self.raw_moment(&shifted)?.final_value();
            worst = worst.max((base - moved).norm());
        }
        Ok(worst)
    }

    /// Stabilization verdict per spec: the last three checkpoint values
    /// must move by less than the tolerance between consecutive points.
    pub fn admission_test(&self, specs: &[MomentSpec], tolerance: f64) -> Result<Vec<(String, bool)>> {
        if self.schedule.points().len() < 3 {
            return Err(Error::domain("admission test needs at least three checkpoints".to_string()));
        }
        specs
            .iter()
            .map(|spec| {
                let report = self.raw_moment(&spec.canonical())?;
                let k = report.points.len();
                let tail = &report.points[k - 3..];
                let ok = (tail[1].1 - tail[0].1).norm() <= tolerance
                    && (tail[2].1 - tail[1].1).norm() <= tolerance;
                Ok((spec.key(), ok))
            })
            .collect()
    }
}

/// The correspondence between strictly increasing sequences and points of
/// {0,1}^(Z_+): y(i) = 1 iff i lies in the range, tau_y(n) = position of
/// the (n+1)-th one, k_y(m) = number of ones among y(0..m-1).
pub struct IndicatorCorrespondence {
    bits: Vec<u8>,
    ones: Vec<u64>,
    finite: bool,
}

impl IndicatorCorrespondence {
    /// From a cached prefix of the bit sequence. `finite` declares the full
    /// sequence has finite support (y in Z), which pins tau to 0.
    pub fn from_bits(bits: Vec<u8>, finite: bool) -> Self {
        let ones = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(i, _)| i as u64)
            .collect();
        IndicatorCorrespondence { bits, ones, finite }
    }

    /// Indicator of the range of a strictly increasing sequence, cached on
    /// [0, max_index].
    pub fn from_range(values: &[u64], max_index: u64) -> Result<Self> {
        let mut bits = vec![0u8; (max_index + 1) as usize];
        let mut prev = None;
        for &a in values {
            if prev.is_some_and(|p| a <= p) {
                return Err(Error::domain(format!("range values not strictly increasing at {a}")));
            }
            prev = Some(a);
            if a <= max_index {
                bits[a as usize] = 1;
            }
        }
        Ok(Self::from_bits(bits, false))
    }

    /// tau_y(n): index of the (n+1)-th one, or 0 for finite-support y.
    pub fn tau(&self, n: u64) -> Result<u64> {
        if self.finite {
            return Ok(0);
        }
        self.ones.get(n as usize).copied().ok_or_else(|| {
            Error::resource(format!(
                "tau({n}) needs {} ones but the cache holds {}; extend the cached prefix",
                n + 1,
                self.ones.len()
            ))
        })
    }

    /// k_y(m) = sum_{j<m} y(j); k_y(0) = 0.
    pub fn running_count(&self, m: u64) -> Result<u64> {
        if m as usize > self.bits.len() {
            return Err(Error::resource(format!(
                "running count at {m} outside the cached prefix of length {}",
                self.bits.len()
            )));
        }
        Ok(self.ones.partition_point(|&i| i < m) as u64)
    }

    pub fn bit(&self, i: u64) -> u8 {
        self.bits.get(i as usize).copied().unwrap_or(0)
    }
}

/// Finite-scale check of the correspondence identity
/// lE_{m<=N} prod_j F_{j,n_j}(R^m b, S^m y_a)
///   = alpha * lE_{m<=N} prod_j b_j(a(m+n_j)),
/// with alpha the empirical density of the range of a in [1, N].
#[derive(Debug, Clone)]
pub struct CorrespondenceCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub alpha_hat: f64,
    pub gap: f64,
}

pub fn correspondence_identity_check(
    components: &[Component],
    seq: &Generator,
    shifts: &[u64],
    n: u64,
) -> Result<CorrespondenceCheck> {
    if components.is_empty() || components.len() != shifts.len() {
        return Err(Error::domain("need one shift per component".to_string()));
    }
    let max_shift = *shifts.iter().max().unwrap();

    // a(1), ..., a(N + max_shift + 1): covers both the right side (which
    // reads a(m + n_j) for m <= N) and every tau index the orbit hits
    // (k_y(N) + n_j <= N + max_shift).
    let count = n + max_shift + 1;
    let mut avals: Vec<u64> = Vec::with_capacity(count as usize);
    let mut prev = 0u64;
    for idx in 1..=count {
        let v = seq.evaluate(&[idx])?;
        if idx > 1 && v <= prev {
            return Err(Error::domain(format!(
                "sequence {} is not strictly increasing at n = {idx}",
                seq.descriptor()
            )));
        }
        prev = v;
        avals.push(v);
    }
    let in_range = count_upto(&avals, n);
    if in_range == 0 {
        return Err(Error::domain(format!(
            "range of {} has no points in [1, {n}]",
            seq.descriptor()
        )));
    }
    let alpha_hat = in_range as f64 / n as f64;

    // y over [0, n] plus the running count k_y(m) for every m in [1, n]
    let mut y = vec![0u8; (n + 1) as usize];
    for &a in &avals {
        if a <= n {
            y[a as usize] = 1;
        }
    }
    let mut ky = vec![0u32; (n + 1) as usize];
    let mut c = 0u32;
    for m in 1..=n as usize {
        c += y[m - 1] as u32; // ones among indices 0..m-1
        ky[m] = c;
    }

    let lhs = averaged_trace(AverageKind::Logarithmic, &[n], |m| {
        if y[m as usize] == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let base = ky[m as usize] as u64;
        let mut acc = Complex64::new(1.0, 0.0);
        for (j, b) in components.iter().enumerate() {
            // tau_y(k_y(m) + n_j) = a(k_y(m) + n_j + 1) = avals[k_y(m) + n_j]
            acc *= b(avals[(base + shifts[j]) as usize]);
        }
        acc
    })
    .final_value();

    let rhs_mean = averaged_trace(AverageKind::Logarithmic, &[n], |m| {
        let mut acc = Complex64::new(1.0, 0.0);
        for (j, b) in components.iter().enumerate() {
            acc *= b(avals[(m - 1 + shifts[j]) as usize]);
        }
        acc
    })
    .final_value();
    let rhs = rhs_mean * alpha_hat;

    Ok(CorrespondenceCheck { lhs, rhs, alpha_hat, gap: (lhs - rhs).norm() })
}

fn count_upto(sorted: &[u64], n: u64) -> u64 {
    sorted.partition_point(|&v| v <= n) as u64
}

/// Parallel-safe constant component.
pub fn constant_component(value: Complex64) -> Component {
    Arc::new(move |_| value)
}

/// Component from a window sampler.
pub fn sampler_component(sampler: crate::multfun::Sampler) -> Component {
    Arc::new(move |n| sampler.get(n))
}
