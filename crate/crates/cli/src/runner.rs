//! Experiment dispatch: build inputs from a config, run the experiment,
//! emit CSV/JSON/plotdata reports, and evaluate assert-mode gates.

use crate::config::Config;
use logcorr_core::averaging::AverageKind;
use logcorr_core::correlations::{self, ShiftSource};
use logcorr_core::ergodic::{self, TorusRotation, TrigMonomial};
use logcorr_core::error::{Error, Result};
use logcorr_core::furstenberg::{self, MomentSpec};
use logcorr_core::numeric::Fixed128;
use logcorr_core::pretentious::{self, TwistSearchConfig};
use logcorr_core::report::{ExperimentReport, Series};
use logcorr_core::sequences::{self, Generator, SequenceFamily};
use logcorr_core::sieve::{ArithmeticTable, SegmentedFactorSieve, Window};
use logcorr_core::MultFnSpec;
use std::path::{Path, PathBuf};

pub const EXPERIMENT_KINDS: &[&str] = &[
    "corr-fixed",
    "corr-deterministic",
    "corr-family",
    "identity-deterministic",
    "product-identity",
    "pattern-density",
    "discrepancy",
    "prime-dilation",
    "pretentious",
    "aperiodicity-scan",
    "furstenberg-moment",
    "correspondence-check",
    "ergodic-oracle",
    "sequence-check",
];

pub struct RunOptions {
    pub out_dir: PathBuf,
    pub sieve_cache: Option<PathBuf>,
}

pub struct RunOutcome {
    pub report_paths: Vec<PathBuf>,
    pub gate_failures: Vec<String>,
}

/// Run one experiment config. The kind must match the subcommand when both
/// are present.
pub fn run_experiment(kind: &str, config: &Config, opts: &RunOptions) -> Result<RunOutcome> {
    if let Some(declared) = config.get_opt("kind") {
        if declared != kind {
            return Err(Error::parse(format!(
                "config declares kind `{declared}` but the `{kind}` subcommand was invoked"
            )));
        }
    }
    if !EXPERIMENT_KINDS.contains(&kind) {
        return Err(Error::parse(format!("unknown experiment kind `{kind}`")));
    }

    let mut report = ExperimentReport {
        config_text: config.text.clone(),
        ..Default::default()
    };
    let mut gates: Vec<(String, bool)> = Vec::new();

    match kind {
        "corr-fixed" => run_corr_fixed(config, opts, &mut report, &mut gates)?,
        "corr-deterministic" => run_corr_deterministic(config, opts, &mut report, &mut gates)?,
        "corr-family" => run_corr_family(config, opts, &mut report, &mut gates)?,
        "identity-deterministic" => run_identity(config, opts, &mut report, &mut gates)?,
        "product-identity" => run_product_identity(config, opts, &mut report, &mut gates)?,
        "pattern-density" => run_pattern_density(config, opts, &mut report, &mut gates)?,
        "discrepancy" => run_discrepancy(config, opts, &mut report, &mut gates)?,
        "prime-dilation" => run_prime_dilation(config, opts, &mut report, &mut gates)?,
        "pretentious" => run_pretentious(config, opts, &mut report, &mut gates)?,
        "aperiodicity-scan" => run_aperiodicity(config, opts, &mut report, &mut gates)?,
        "furstenberg-moment" => run_furstenberg_moment(config, opts, &mut report, &mut gates)?,
        "correspondence-check" => run_correspondence(config, opts, &mut report, &mut gates)?,
        "ergodic-oracle" => run_ergodic_oracle(config, opts, &mut report, &mut gates)?,
        "sequence-check" => run_sequence_check(config, &mut report, &mut gates)?,
        _ => unreachable!(),
    }

    for (name, pass) in &gates {
        report.push_scalar(format!("gate.{name}"), if *pass { 1.0 } else { 0.0 });
    }
    report.push_metadata("kind", kind);
    report.push_metadata(
        "timestamp_unix",
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default(),
    );
    report.push_metadata("version", env!("CARGO_PKG_VERSION"));
    report.push_metadata("threads", rayon::current_num_threads().to_string());

    let label = config.get_opt("label").unwrap_or(kind).to_string();
    let paths = write_reports(&opts.out_dir, &label, &report)?;

    let gate_failures: Vec<String> = gates
        .iter()
        .filter(|(_, pass)| !pass)
        .map(|(name, _)| name.clone())
        .collect();
    Ok(RunOutcome { report_paths: paths, gate_failures })
}

fn write_reports(dir: &Path, label: &str, report: &ExperimentReport) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let json_path = dir.join(format!("{label}.json"));
    std::fs::write(&json_path, report.to_json())?;
    paths.push(json_path);
    for s in &report.series {
        let stem = if report.series.len() == 1 {
            label.to_string()
        } else {
            format!("{label}.{}", sanitize(&s.name))
        };
        let csv_path = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, s.to_csv())?;
        let plot_path = dir.join(format!("{stem}.plot"));
        std::fs::write(&plot_path, s.to_plotdata())?;
        paths.push(csv_path);
        paths.push(plot_path);
    }
    Ok(paths)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

// ---- shared builders ----------------------------------------------------

fn parse_functions(config: &Config, key: &str) -> Result<Vec<MultFnSpec>> {
    config.get_list(key)?.iter().map(|d| MultFnSpec::parse(d)).collect()
}

fn parse_family(config: &Config, key: &str) -> Result<SequenceFamily> {
    let descs = config.get_list(key)?;
    let refs: Vec<&str> = descs.iter().map(String::as_str).collect();
    SequenceFamily::parse(&refs)
}

fn build_sieve(config: &Config, opts: &RunOptions, needed: u64) -> Result<SegmentedFactorSieve> {
    let limit = config.get_u64_or("sieve-limit", needed)?;
    if limit < needed {
        return Err(Error::parse(format!(
            "sieve-limit {limit} below the {needed} this experiment needs"
        )));
    }
    let mut sieve = SegmentedFactorSieve::build(limit)?;
    if let Some(cache_dir) = &opts.sieve_cache {
        std::fs::create_dir_all(cache_dir)?;
        let path = cache_dir.join(format!("arith-v1-{limit}.bin"));
        let table = if path.exists() {
            ArithmeticTable::read_binary(std::io::BufReader::new(std::fs::File::open(&path)?))?
        } else {
            let t = sieve.arithmetic_table(Window::new(1, limit)?)?;
            t.write_binary(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            t
        };
        sieve.preload_table(table)?;
    }
    Ok(sieve)
}

fn twist_config(config: &Config) -> Result<TwistSearchConfig> {
    let d = TwistSearchConfig::default();
    Ok(TwistSearchConfig {
        t_max: config.get_f64_or("t-max", d.t_max)?,
        grid_step: config.get_f64_or("grid-step", d.grid_step)?,
        refine_iters: config.get_u64_or("refine", d.refine_iters as u64)? as u32,
    })
}

fn push_trace_gate(
    config: &Config,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
    result: &logcorr_core::CorrelationResult,
) -> Result<()> {
    let final_abs = result.report.final_value().norm();
    report.push_scalar("final_abs", final_abs);
    if let Some(tol) = config.get_opt("tolerance") {
        let tol: f64 = tol.parse().map_err(|_| Error::parse("bad tolerance".to_string()))?;
        report.push_scalar("tolerance", tol);
        gates.push(("final_abs_within_tolerance".to_string(), final_abs <= tol));
    }
    Ok(())
}

// ---- per-kind runners ----------------------------------------------------

fn run_corr_fixed(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let shifts = config.get_u64_list("shifts")?;
    let schedule = config.get_schedule("schedule")?;
    let kind = AverageKind::parse(config.get_opt("average").unwrap_or("logarithmic"))?;
    let needed = schedule.n_max + shifts.iter().max().copied().unwrap_or(0);
    let sieve = build_sieve(config, opts, needed)?;
    let r = correlations::corr_fixed_shifts(&functions, &shifts, &schedule, kind, &sieve)?;
    report.push_series(Series::from_report("correlation", &r.report));
    push_trace_gate(config, report, gates, &r)
}

fn run_corr_deterministic(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let seq = Generator::parse(config.get("sequence")?)?;
    let shifts = config.get_u64_list("shifts")?;
    let schedule = config.get_schedule("schedule")?;
    let top = seq.evaluate(&[schedule.n_max + shifts.iter().max().copied().unwrap_or(0)])?;
    let sieve = build_sieve(config, opts, top)?;
    let r = correlations::corr_along_deterministic(&functions, &seq, &shifts, &schedule, &sieve)?;
    report.push_series(Series::from_report("correlation", &r.report));
    push_trace_gate(config, report, gates, &r)
}

fn run_corr_family(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let family = parse_family(config, "family")?;
    let point = config.get_u64_list("point")?;
    let schedule = config.get_schedule("schedule")?;
    let mut max_shift = 0;
    for j in 0..family.len() {
        max_shift = max_shift.max(family.evaluate(j, &point)?);
    }
    let sieve = build_sieve(config, opts, schedule.n_max + max_shift)?;
    let r = correlations::corr_shifted_by_family(&functions, &family, &point, &schedule, &sieve)?;
    report.push_series(Series::from_report("correlation", &r.report));
    push_trace_gate(config, report, gates, &r)
}

fn run_identity(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let seq = Generator::parse(config.get("sequence")?)?;
    let shifts = config.get_u64_list("shifts")?;
    let n_outer = config.get_u64("n-outer")?;
    let n_inner = config.get_u64("n-inner")?;
    let max_shift = shifts.iter().max().copied().unwrap_or(0);
    let top = seq.evaluate(&[n_outer.max(n_inner) + max_shift])?;
    let sieve = build_sieve(config, opts, n_inner + top)?;
    let r = correlations::identity_check_deterministic(
        &functions, &seq, &shifts, n_outer, n_inner, &sieve,
    )?;
    report.push_scalar("lhs_re", r.lhs.re);
    report.push_scalar("lhs_im", r.lhs.im);
    report.push_scalar("rhs_re", r.rhs.re);
    report.push_scalar("rhs_im", r.rhs.im);
    report.push_scalar("gap", r.gap);
    if config.has("tolerance") {
        let tol = config.get_f64("tolerance")?;
        report.push_scalar("tolerance", tol);
        gates.push(("identity_gap_within_tolerance".to_string(), r.gap <= tol));
    }
    Ok(())
}

fn run_product_identity(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let family = parse_family(config, "family")?;
    let n_outer = config.get_u64("n-outer")?;
    let n_inner = config.get_u64("n-inner")?;
    // range estimate from the far corner of the outer lattice; the core
    // re-validates against its own exact lattice scan
    let corner = vec![n_outer; family.arity()];
    let mut max_shift = 0u64;
    for j in 0..family.len() {
        max_shift = max_shift.max(family.evaluate(j, &corner)?);
    }
    let sieve = build_sieve(config, opts, n_inner + max_shift)?;
    let check = correlations::product_identity_check(&functions, &family, n_outer, n_inner, &sieve)?;
    report.push_scalar("lhs", check.lhs);
    report.push_scalar("rhs_product_tail", check.rhs_product_tail);
    report.push_scalar("rhs_product_full", check.rhs_product_full);
    for (j, m) in check.individual_means.iter().enumerate() {
        report.push_scalar(format!("mean_f{j}"), *m);
    }
    report.push_scalar("gap_tail", check.gap_tail);
    report.push_scalar("gap_full", check.gap_full);
    if config.has("tolerance") {
        let tol = config.get_f64("tolerance")?;
        report.push_scalar("tolerance", tol);
        gates.push(("product_gap_full_within_tolerance".to_string(), check.gap_full <= tol));
    }
    Ok(())
}

fn run_pattern_density(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let shifts = config.get_u64_list("shifts")?;
    let schedule = config.get_schedule("schedule")?;
    let (source, needed) = if config.has("sequence") {
        let seq = Generator::parse(config.get("sequence")?)?;
        let top = seq.evaluate(&[schedule.n_max + shifts.iter().max().copied().unwrap_or(0)])?;
        (ShiftSource::Composition { seq, shifts }, top)
    } else {
        let top = schedule.n_max + shifts.iter().max().copied().unwrap_or(0);
        (ShiftSource::Fixed { shifts }, top)
    };
    let sieve = build_sieve(config, opts, needed)?;
    let densities = correlations::pattern_density(&functions, &source, &schedule, &sieve)?;
    let target = 0.5f64.powi(functions.len() as i32);
    let mut worst = 0f64;
    for (eps, trace) in &densities.patterns {
        let name: String = eps.iter().map(|&e| if e > 0 { 'p' } else { 'm' }).collect();
        report.push_series(Series::from_report(format!("pattern_{name}"), trace));
        worst = worst.max((trace.final_value().re - target).abs());
    }
    report.push_scalar("target_density", target);
    report.push_scalar("worst_deviation", worst);
    if config.has("tolerance") {
        let tol = config.get_f64("tolerance")?;
        report.push_scalar("tolerance", tol);
        gates.push(("all_patterns_within_tolerance".to_string(), worst <= tol));
    }
    Ok(())
}

fn run_discrepancy(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let f = MultFnSpec::parse(config.get("function")?)?;
    let seq = Generator::parse(config.get("sequence")?)?;
    let schedule = config.get_schedule("schedule")?;
    let top = seq.evaluate(&[schedule.n_max])?;
    let sieve = build_sieve(config, opts, top)?;
    let trace = correlations::discrepancy_growth(&f, &seq, &schedule, &sieve)?;
    report.push_series(Series::from_real_points("max_partial_sum", &trace));
    let increasing = trace.windows(2).all(|w| w[1].1 > w[0].1);
    report.push_scalar("strictly_increasing", if increasing { 1.0 } else { 0.0 });
    gates.push(("discrepancy_strictly_increasing".to_string(), increasing));
    Ok(())
}

fn run_prime_dilation(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let shifts = config.get_u64_list("shifts")?;
    let d = config.get_u64_or("d", 1)?;
    let prime_bound = config.get_u64("prime-bound")?;
    let n = config.get_u64("n")?;
    let max_shift = shifts.iter().max().copied().unwrap_or(0);
    let sieve = build_sieve(config, opts, n + prime_bound * max_shift)?;
    let check = correlations::prime_dilation_identity_check(
        &functions, &shifts, d, prime_bound, n, &sieve,
    )?;
    report.push_scalar("lhs_re", check.lhs.re);
    report.push_scalar("rhs_re", check.rhs.re);
    report.push_scalar("gap", check.gap);
    report.push_scalar("primes_used", check.primes_used as f64);
    if config.has("tolerance") {
        let tol = config.get_f64("tolerance")?;
        report.push_scalar("tolerance", tol);
        gates.push(("dilation_gap_within_tolerance".to_string(), check.gap <= tol));
    }
    Ok(())
}

fn run_pretentious(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    _gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let n = config.get_u64("n")?;
    let sieve = build_sieve(config, opts, n)?;
    match functions.len() {
        2 => {
            let d = pretentious::pretentious_distance_sq(&functions[0], &functions[1], n, &sieve)?;
            report.push_scalar("distance_sq", d);
        }
        1 => {
            let cfg = twist_config(config)?;
            let m = pretentious::archimedean_min(&functions[0], n, cfg, &sieve)?;
            report.push_scalar("t_star", m.t_star);
            report.push_scalar("twist_min", m.value);
            report.push_scalar("t_max_scope", cfg.t_max);
        }
        _ => {
            return Err(Error::parse(
                "pretentious kind takes one function (twist minimum) or two (distance)".to_string(),
            ))
        }
    }
    Ok(())
}

fn run_aperiodicity(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let f = MultFnSpec::parse(config.get("function")?)?;
    let q = config.get_u64("modulus-bound")?;
    let schedule = config.get_schedule("schedule")?;
    let cfg = twist_config(config)?;
    let sieve = build_sieve(config, opts, schedule.n_max)?;
    let scan = pretentious::aperiodicity_scan(&f, q, &schedule, cfg, &sieve)?;
    for row in &scan.rows {
        report.push_series(Series::from_real_points(
            format!("chi_{}_{}", row.modulus, row.character_index),
            &row.values,
        ));
        report.push_scalar(
            format!("growing_chi_{}_{}", row.modulus, row.character_index),
            if row.growing { 1.0 } else { 0.0 },
        );
    }
    gates.push(("all_characters_growing".to_string(), scan.all_growing));
    Ok(())
}

fn run_furstenberg_moment(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let shifts = config.get_i64_list("shifts")?;
    let components: Vec<usize> = config
        .get_u64_list("components")?
        .into_iter()
        .map(|c| c as usize)
        .collect();
    let conj: Vec<bool> = match config.get_opt("conj") {
        Some(_) => config.get_u64_list("conj")?.into_iter().map(|b| b != 0).collect(),
        None => vec![false; shifts.len()],
    };
    let schedule = config.get_schedule("schedule")?;
    let slack = config.get_u64_or(
        "shift-slack",
        shifts.iter().map(|&s| s.unsigned_abs()).max().unwrap_or(0),
    )?;
    let sieve = build_sieve(config, opts, schedule.n_max + slack)?;
    let window = Window::new(1, schedule.n_max + slack)?;
    let comps: Vec<furstenberg::Component> = functions
        .iter()
        .map(|f| f.sampler(window, &sieve).map(furstenberg::sampler_component))
        .collect::<Result<_>>()?;
    let mut sys = furstenberg::EmpiricalSystem::new(comps, schedule, slack)?;
    let spec = MomentSpec::new(&shifts, &components, &conj)?;
    let trace = sys.moment(&spec)?;
    report.push_series(Series::from_report(format!("moment_{}", spec.key()), &trace));
    if config.has("tolerance") {
        let tol = config.get_f64("tolerance")?;
        report.push_scalar("tolerance", tol);
        let verdicts = sys.admission_test(std::slice::from_ref(&spec), tol)?;
        gates.push(("moment_stabilizing".to_string(), verdicts[0].1));
    }
    Ok(())
}

fn run_correspondence(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let functions = parse_functions(config, "functions")?;
    let seq = Generator::parse(config.get("sequence")?)?;
    let shifts = config.get_u64_list("shifts")?;
    let n = config.get_u64("n")?;
    let max_shift = shifts.iter().max().copied().unwrap_or(0);
    let top = seq.evaluate(&[n + max_shift + 1])?;
    let sieve = build_sieve(config, opts, top)?;
    let window = Window::new(1, top)?;
    let comps: Vec<furstenberg::Component> = functions
        .iter()
        .map(|f| f.sampler(window, &sieve).map(furstenberg::sampler_component))
        .collect::<Result<_>>()?;
    let check = furstenberg::correspondence_identity_check(&comps, &seq, &shifts, n)?;
    report.push_scalar("lhs_re", check.lhs.re);
    report.push_scalar("rhs_re", check.rhs.re);
    report.push_scalar("alpha_hat", check.alpha_hat);
    report.push_scalar("gap", check.gap);
    if config.has("tolerance") {
        let tol = config.get_f64("tolerance")?;
        report.push_scalar("tolerance", tol);
        gates.push(("correspondence_gap_within_tolerance".to_string(), check.gap <= tol));
    }
    Ok(())
}

fn parse_monomials(config: &Config, dim: usize) -> Result<Vec<TrigMonomial>> {
    // each monomial is `k` or `k:l1,l2,...`
    config
        .get_list("monomials")?
        .iter()
        .map(|m| {
            let (k_str, l_str) = match m.split_once(':') {
                Some((a, b)) => (a, b),
                None => (m.as_str(), ""),
            };
            let cyclic_freq: i64 =
                k_str.parse().map_err(|_| Error::parse(format!("bad monomial `{m}`")))?;
            let torus_freq: Vec<i64> = if l_str.is_empty() {
                vec![0; dim]
            } else {
                l_str
                    .split(',')
                    .map(|t| t.parse().map_err(|_| Error::parse(format!("bad monomial `{m}`"))))
                    .collect::<Result<_>>()?
            };
            if torus_freq.len() != dim {
                return Err(Error::parse(format!(
                    "monomial `{m}` has {} torus frequencies, rotation has {dim}",
                    torus_freq.len()
                )));
            }
            Ok(TrigMonomial { cyclic_freq, torus_freq })
        })
        .collect()
}

fn run_ergodic_oracle(
    config: &Config,
    opts: &RunOptions,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    match config.get("mode")? {
        "weyl" => {
            let theta = Fixed128::parse(config.get("theta")?)?;
            let n = config.get_u64("n")?;
            let v = ergodic::weyl_sum(&theta, n);
            let bound = ergodic::weyl_bound(&theta, n);
            report.push_scalar("re", v.re);
            report.push_scalar("im", v.im);
            report.push_scalar("abs", v.norm());
            report.push_scalar("weyl_bound", bound);
            gates.push(("weyl_bound_satisfied".to_string(), v.norm() <= bound));
        }
        "prime-phase" => {
            let beta = Fixed128::parse(config.get("beta")?)?;
            let d = config.get_u64_or("d", 1)?;
            let p = config.get_u64("prime-bound")?;
            let sieve = build_sieve(config, opts, p)?;
            let v = ergodic::prime_phase_average(&beta, d, p, &sieve)?;
            report.push_scalar("re", v.re);
            report.push_scalar("im", v.im);
            report.push_scalar("abs", v.norm());
        }
        "rotation" => {
            let rot = parse_rotation(config)?;
            let monomials = parse_monomials(config, rot.dim())?;
            let shifts = config.get_i64_list("shifts")?;
            let analytic = ergodic::rotation_correlation_analytic(&rot, &monomials, &shifts)?;
            report.push_scalar("analytic_re", analytic.re);
            report.push_scalar("analytic_im", analytic.im);
            if config.has("orbit-n") {
                let n = config.get_u64("orbit-n")?;
                let start: Vec<Fixed128> = match config.get_opt("start") {
                    Some(_) => config
                        .get_list("start")?
                        .iter()
                        .map(|s| Fixed128::parse(s))
                        .collect::<Result<_>>()?,
                    None => vec![Fixed128::ZERO; rot.dim()],
                };
                let orbit =
                    ergodic::rotation_correlation_orbit(&rot, &monomials, &shifts, n, 0, &start)?;
                report.push_scalar("orbit_re", orbit.re);
                report.push_scalar("orbit_im", orbit.im);
                let gap = (orbit - analytic).norm();
                report.push_scalar("orbit_gap", gap);
                if config.has("tolerance") {
                    let tol = config.get_f64("tolerance")?;
                    gates.push(("orbit_matches_analytic".to_string(), gap <= tol));
                }
            }
        }
        "ergid2" => {
            let rot = parse_rotation(config)?;
            let monomials = parse_monomials(config, rot.dim())?;
            let shifts = config.get_i64_list("shifts")?;
            let d = config.get_u64_or("d", 1)?;
            let r0 = config.get_u64_or("r0", 1)?;
            let p = config.get_u64("prime-bound")?;
            let m = config.get_u64("integer-bound")?;
            let sieve = build_sieve(config, opts, p.max(m))?;
            let check = ergodic::ergid2_check(&rot, &monomials, &shifts, d, r0, p, m, &sieve)?;
            report.push_scalar("lhs_re", check.lhs.re);
            report.push_scalar("lhs_im", check.lhs.im);
            report.push_scalar("rhs_re", check.rhs.re);
            report.push_scalar("rhs_im", check.rhs.im);
            report.push_scalar("predicted_re", check.predicted.re);
            report.push_scalar("gap", check.gap);
            report.push_scalar("gap_lhs_predicted", check.gap_lhs_predicted);
            report.push_scalar("gap_rhs_predicted", check.gap_rhs_predicted);
            report.push_scalar(
                "ergodicity_heuristic",
                if check.ergodicity_heuristic { 1.0 } else { 0.0 },
            );
            if config.has("tolerance") {
                let tol = config.get_f64("tolerance")?;
                report.push_scalar("tolerance", tol);
                gates.push(("ergid2_gap_within_tolerance".to_string(), check.gap <= tol));
            }
        }
        "skew" => {
            let x0 = Fixed128::parse(config.get("x0")?)?;
            let y0 = Fixed128::parse(config.get_opt("y0").unwrap_or("0"))?;
            let freq = config.get_i64_list("freq")?;
            if freq.len() != 2 {
                return Err(Error::parse("skew mode needs freq = f1 f2".to_string()));
            }
            let n = config.get_u64("n")?;
            let v = ergodic::skew_orbit_average(&x0, &y0, (freq[0], freq[1]), n)?;
            report.push_scalar("re", v.re);
            report.push_scalar("im", v.im);
            report.push_scalar("abs", v.norm());
        }
        other => {
            return Err(Error::parse(format!(
                "unknown ergodic-oracle mode `{other}` (weyl, prime-phase, rotation, ergid2, skew)"
            )))
        }
    }
    Ok(())
}

fn parse_rotation(config: &Config) -> Result<TorusRotation> {
    let u = config.get_u64_or("u", 1)?;
    let alpha: Vec<Fixed128> = config
        .get_list("alpha")?
        .iter()
        .map(|s| Fixed128::parse(s))
        .collect::<Result<_>>()?;
    TorusRotation::new(u, alpha)
}

fn run_sequence_check(
    config: &Config,
    report: &mut ExperimentReport,
    gates: &mut Vec<(String, bool)>,
) -> Result<()> {
    let family = parse_family(config, "family")?;
    let k_bound = config.get_u64_or("k-bound", 3)? as i64;
    let horizon = config.get_u64("horizon")?;
    let ind = sequences::check_independence(&family, k_bound, horizon)?;
    report.push_scalar("independent", if ind.passed { 1.0 } else { 0.0 });
    if let Some(cert) = &ind.certificate {
        report.push_metadata("certificate", cert.clone());
    }
    let weak = sequences::check_weak_independence(&family, k_bound, horizon)?;
    report.push_scalar("weakly_independent", if weak.passed { 1.0 } else { 0.0 });
    let worst = ind.per_k.first();
    if let Some(w) = worst {
        report.push_scalar("worst_k_solutions", w.solutions as f64);
        report.push_metadata(
            "worst_k",
            w.k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        );
    }
    gates.push(("independent_up_to_scope".to_string(), ind.passed));
    gates.push(("weakly_independent_up_to_scope".to_string(), weak.passed));
    if config.has("modulus-bound") {
        let u = config.get_u64("modulus-bound")?;
        let eq = sequences::check_congruence_equidistribution(&family, u, horizon)?;
        report.push_scalar("congruence_worst", eq.worst);
        report.push_metadata(
            "congruence_worst_at",
            format!(
                "u={} k={}",
                eq.worst_modulus,
                eq.worst_k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
        );
        if config.has("tolerance") {
            let tol = config.get_f64("tolerance")?;
            gates.push(("congruence_equidistributed".to_string(), eq.worst <= tol));
        }
    }
    if config.has("word-length") {
        let l = config.get_u64("word-length")? as usize;
        let n = horizon.min(1_000_000);
        let values = sequences::generator_values(family.member(0)?, n)?;
        let max_v = *values.last().unwrap();
        let w = sequences::indicator_of_range(&values, max_v)?;
        let c = sequences::word_complexity(&w, l, max_v as usize)?;
        report.push_scalar("word_complexity", c as f64);
        report.push_scalar("word_length", l as f64);
    }
    Ok(())
}
