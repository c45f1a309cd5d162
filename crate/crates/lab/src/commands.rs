//! Subcommand drivers shared by the binary and the tests.

use std::fs;
use std::path::PathBuf;

use fpp_core::capacities::sample_capacities;
use fpp_core::lattice::{build_cylinder, CylinderFamily};
use fpp_core::maxflow::{phi, tau};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{cylinder_family, family_id, Config, ConfigError, CYLINDER_KEYS};
use crate::dimacs::write_instance;
use crate::montecarlo::{
    estimate_nu, pilot_lambda, regime_fit, sample_tau, sub_seed, tail_scan, MonteCarloError, NuRecord, ScalingFit,
    TauSample,
};
use crate::output::{run_id, ResultRow, RunDir};
use crate::verify::{run_verify, Injection, VerifyOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("computation error: {0}")]
    Compute(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl From<MonteCarloError> for CliError {
    fn from(e: MonteCarloError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EstimateNu,
    TailScan,
    RegimeFit,
    Verify,
    DumpInstance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EstimateNu => "estimate-nu",
            Command::TailScan => "tail-scan",
            Command::RegimeFit => "regime-fit",
            Command::Verify => "verify",
            Command::DumpInstance => "dump-instance",
        }
    }
}

/// What a command produced: its run directory and the lines to print.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub run_dir: Option<PathBuf>,
    pub lines: Vec<String>,
}

pub fn run(command: Command, config: &Config, workers: usize) -> Result<Report, CliError> {
    match command {
        Command::EstimateNu => cmd_estimate_nu(config, workers),
        Command::TailScan => cmd_tail_scan(config, workers),
        Command::RegimeFit => cmd_regime_fit(config, workers),
        Command::Verify => cmd_verify(config),
        Command::DumpInstance => cmd_dump_instance(config),
    }
}

fn allowed(extra: &[&'static str]) -> Vec<&'static str> {
    CYLINDER_KEYS.iter().chain(extra).copied().collect()
}

/// The experiment's identity: the config with the effective seed written
/// back and the output location dropped.
fn effective(config: &Config, seed: u64) -> Config {
    let mut c = config.clone();
    c.set("seed", &seed.to_string());
    c.remove("output_dir");
    c
}

struct Context {
    family: CylinderFamily,
    spec_id: String,
    seed: u64,
    canonical: String,
}

fn context(config: &Config, default_seed: Option<u64>) -> Result<Context, CliError> {
    let family = cylinder_family(config)?;
    let seed = config.seed(default_seed)?;
    Ok(Context {
        spec_id: family_id(&family),
        family,
        seed,
        canonical: effective(config, seed).canonical(),
    })
}

fn reps(config: &Config) -> Result<u64, CliError> {
    let reps: u64 = config.required("reps")?;
    if reps == 0 {
        return Err(ConfigError::Invalid {
            key: "reps".into(),
            reason: "must be at least 1".into(),
        }
        .into());
    }
    Ok(reps)
}

fn n_list(config: &Config) -> Result<Vec<u32>, CliError> {
    let list: Vec<u32> = config.list("n_list")?.ok_or_else(|| ConfigError::Missing("n_list".into()))?;
    if list.is_empty() || list.contains(&0) {
        return Err(ConfigError::Invalid {
            key: "n_list".into(),
            reason: "scales must be positive".into(),
        }
        .into());
    }
    Ok(list)
}

fn open_run(config: &Config, command: Command, canonical: &str) -> Result<RunDir, CliError> {
    Ok(RunDir::create(&config.output_dir()?, command.name(), &run_id(command.name(), canonical))?)
}

const NU_KEYS: &[&str] = &["dist", "seed", "n_list", "reps", "output_dir"];

pub fn cmd_estimate_nu(config: &Config, workers: usize) -> Result<Report, CliError> {
    config.check_keys(&allowed(NU_KEYS))?;
    let ctx = context(config, None)?;
    let dist = config.distribution()?;
    let reps = reps(config)?;
    let ns = n_list(config)?;
    config.output_dir()?;

    let records = estimate_nu(&ctx.family, &ctx.spec_id, &dist, &ns, reps, ctx.seed, workers)?;
    let run = open_run(config, Command::EstimateNu, &ctx.canonical)?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    let mut lines = Vec::new();
    for record in &records {
        match record {
            NuRecord::Estimate(e) => {
                let row = |statistic: &str, value: f64, ci: Option<(f64, f64)>| ResultRow {
                    run_id: run.id.clone(),
                    spec: ctx.spec_id.clone(),
                    dist: dist.to_string(),
                    n: Some(e.n),
                    h: Some(e.height),
                    reps: Some(reps),
                    seed: ctx.seed,
                    statistic: statistic.into(),
                    value,
                    ci_lo: ci.map(|c| c.0),
                    ci_hi: ci.map(|c| c.1),
                };
                rows.push(row("nu", e.mean, Some((e.mean - 1.96 * e.se, e.mean + 1.96 * e.se))));
                rows.push(row("nu_se", e.se, None));
                plot.push((f64::from(e.n), e.mean));
                lines.push(format!("n={} h={} nu={} se={}", e.n, e.height, e.mean, e.se));
            }
            NuRecord::Skipped { n, reason } => lines.push(format!("warning: n={n} skipped: {reason}")),
        }
    }
    run.write_results(&rows)?;
    run.write_plot("nu_vs_n", ("n", "nu"), &plot)?;
    run.write_metadata(&json!({
        "command": Command::EstimateNu.name(),
        "run_id": run.id,
        "config": effective(config, ctx.seed).entries(),
        "spec": ctx.spec_id,
        "dist": dist.to_string(),
        "moment_class": dist.moment_class().label(),
        "seed": ctx.seed,
        "records": records,
        "version": env!("CARGO_PKG_VERSION"),
    }))?;
    lines.push(format!("results in {}", run.path.display()));
    Ok(Report {
        run_dir: Some(run.path),
        lines,
    })
}

const TAIL_KEYS: &[&str] = &[
    "dist",
    "seed",
    "n_list",
    "reps",
    "output_dir",
    "lambda",
    "lambda_offset",
    "pilot_reps",
    "recalibrate",
];

/// How the threshold was chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub rule: String,
    pub pilot_n: Option<u32>,
    pub pilot_reps: Option<u64>,
    pub pilot_nu: Option<f64>,
    pub offset: Option<f64>,
    pub initial_lambda: f64,
    pub lambda: f64,
    pub recalibrated: bool,
}

/// Pilot-run seed, kept apart from the main replications.
fn pilot_seed(seed: u64) -> u64 {
    sub_seed(seed, u32::MAX)
}

struct Scan {
    samples: Vec<TauSample>,
    calibration: Calibration,
    estimates: Vec<crate::montecarlo::TailEstimate>,
}

fn run_scan(config: &Config, ctx: &Context, workers: usize) -> Result<Scan, CliError> {
    let dist = config.distribution()?;
    let reps = reps(config)?;
    let ns = n_list(config)?;
    let rule = config.get("lambda").unwrap_or("calibrated");
    let offset: f64 = config.parsed("lambda_offset")?.unwrap_or(0.3);
    let pilot_reps: u64 = config.parsed("pilot_reps")?.unwrap_or(1000);
    let recalibrate: bool = config.parsed("recalibrate")?.unwrap_or(true);
    if pilot_reps == 0 {
        return Err(ConfigError::Invalid {
            key: "pilot_reps".into(),
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let mut calibration = Calibration {
        rule: rule.to_string(),
        pilot_n: None,
        pilot_reps: None,
        pilot_nu: None,
        offset: None,
        initial_lambda: 0.0,
        lambda: 0.0,
        recalibrated: false,
    };
    let lambda = if rule == "calibrated" {
        let largest = *ns.iter().max().expect("n_list is nonempty");
        let pilot = sample_tau(&ctx.family, &dist, largest, pilot_reps, pilot_seed(ctx.seed), workers)?;
        let nu = crate::montecarlo::mean_se(&pilot.values).0;
        calibration.pilot_n = Some(largest);
        calibration.pilot_reps = Some(pilot_reps);
        calibration.pilot_nu = Some(nu);
        calibration.offset = Some(offset);
        pilot_lambda(nu, offset)
    } else {
        let value: f64 = rule.parse().map_err(|_| ConfigError::Invalid {
            key: "lambda".into(),
            reason: format!("expected `calibrated` or a number, got `{rule}`"),
        })?;
        if value.is_nan() || value <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "lambda".into(),
                reason: "must be positive".into(),
            }
            .into());
        }
        value
    };
    let samples = ns
        .iter()
        .map(|&n| sample_tau(&ctx.family, &dist, n, reps, ctx.seed, workers))
        .collect::<Result<Vec<_>, _>>()?;
    let scan = tail_scan(&samples, ctx.family.dim(), lambda, recalibrate)?;
    calibration.initial_lambda = scan.initial_lambda;
    calibration.lambda = scan.lambda;
    calibration.recalibrated = scan.recalibrated;
    Ok(Scan {
        samples,
        calibration,
        estimates: scan.estimates,
    })
}

pub fn cmd_tail_scan(config: &Config, workers: usize) -> Result<Report, CliError> {
    config.check_keys(&allowed(TAIL_KEYS))?;
    let ctx = context(config, None)?;
    let dist = config.distribution()?;
    config.output_dir()?;
    let scan = run_scan(config, &ctx, workers)?;

    let run = open_run(config, Command::TailScan, &ctx.canonical)?;
    let mut rows = Vec::new();
    let mut lines = vec![format!(
        "lambda = {}{}",
        scan.calibration.lambda,
        if scan.calibration.recalibrated {
            format!(" (recalibrated from {})", scan.calibration.initial_lambda)
        } else {
            String::new()
        }
    )];
    for e in &scan.estimates {
        let row = |statistic: &str, value: f64, ci: Option<(f64, f64)>| ResultRow {
            run_id: run.id.clone(),
            spec: ctx.spec_id.clone(),
            dist: dist.to_string(),
            n: Some(e.n),
            h: Some(e.height),
            reps: Some(e.reps),
            seed: ctx.seed,
            statistic: statistic.into(),
            value,
            ci_lo: ci.map(|c| c.0),
            ci_hi: ci.map(|c| c.1),
        };
        rows.push(row("lambda", e.lambda, None));
        rows.push(row("p_hat", e.p_hat, Some((e.ci_lo, e.ci_hi))));
        rows.push(row("neg_log_p", e.neg_log, Some((-e.ci_hi.ln(), -e.ci_lo.ln()))));
        lines.push(format!(
            "n={} hits={}/{} p={} [{}, {}] -log p={}",
            e.n, e.hits, e.reps, e.p_hat, e.ci_lo, e.ci_hi, e.neg_log
        ));
    }
    run.write_results(&rows)?;
    let finite: Vec<_> = scan.estimates.iter().filter(|e| e.p_hat > 0.0 && e.p_hat < 1.0).collect();
    run.write_plot(
        "neglogp_vs_n",
        ("n", "neg_log_p"),
        &finite.iter().map(|e| (f64::from(e.n), e.neg_log)).collect::<Vec<_>>(),
    )?;
    run.write_plot(
        "loglog",
        ("log_n", "log_neg_log_p"),
        &finite
            .iter()
            .filter(|e| e.neg_log > 0.0)
            .map(|e| (f64::from(e.n).ln(), e.neg_log.ln()))
            .collect::<Vec<_>>(),
    )?;
    run.write_metadata(&json!({
        "command": Command::TailScan.name(),
        "run_id": run.id,
        "config": effective(config, ctx.seed).entries(),
        "spec": ctx.spec_id,
        "dist": dist.to_string(),
        "seed": ctx.seed,
        "calibration": scan.calibration,
        "estimates": scan.estimates,
        "sample_sizes": scan.samples.iter().map(|s| (s.n, s.values.len())).collect::<Vec<_>>(),
        "version": env!("CARGO_PKG_VERSION"),
    }))?;
    lines.push(format!("results in {}", run.path.display()));
    Ok(Report {
        run_dir: Some(run.path),
        lines,
    })
}

/// Parses `n:value` pairs separated by commas.
fn parse_points(text: &str) -> Result<Vec<(u32, f64)>, ConfigError> {
    text.split(',')
        .map(|pair| {
            let invalid = || ConfigError::Invalid {
                key: "points".into(),
                reason: format!("expected n:neg_log_p, got `{}`", pair.trim()),
            };
            let (n, v) = pair.split_once(':').ok_or_else(invalid)?;
            Ok((n.trim().parse().map_err(|_| invalid())?, v.trim().parse().map_err(|_| invalid())?))
        })
        .collect()
}

pub fn cmd_regime_fit(config: &Config, workers: usize) -> Result<Report, CliError> {
    let mut keys = TAIL_KEYS.to_vec();
    keys.push("points");
    config.check_keys(&allowed(&keys))?;
    let synthetic = config.get("points").is_some();
    // fitted points need no sampling, so no seed either
    let ctx = context(config, synthetic.then_some(0))?;
    config.output_dir()?;
    let growth = ctx.family.rule().growth_exponent();
    let (points, calibration, dist) = if let Some(text) = config.get("points") {
        (parse_points(text)?, None, config.get("dist").unwrap_or("").to_string())
    } else {
        let scan = run_scan(config, &ctx, workers)?;
        let points = scan.estimates.iter().map(|e| (e.n, e.neg_log)).collect();
        (points, Some(scan.calibration), config.distribution()?.to_string())
    };
    let fit: ScalingFit = regime_fit(&points, ctx.family.dim(), growth)?;

    let run = open_run(config, Command::RegimeFit, &ctx.canonical)?;
    let row = |statistic: &str, n: Option<u32>, value: f64| ResultRow {
        run_id: run.id.clone(),
        spec: ctx.spec_id.clone(),
        dist: dist.clone(),
        n,
        h: n.map(|n| fpp_core::exact::to_f64(&ctx.family.height(n))),
        reps: config.parsed("reps").ok().flatten(),
        seed: ctx.seed,
        statistic: statistic.into(),
        value,
        ci_lo: None,
        ci_hi: None,
    };
    let mut rows = vec![row("e_fit", None, fit.exponent), row("intercept", None, fit.intercept)];
    for (&(n, nl), r) in fit.points.iter().zip(&fit.residuals) {
        rows.push(row("neg_log_p", Some(n), nl));
        rows.push(row("residual", Some(n), *r));
    }
    run.write_results(&rows)?;
    run.write_plot(
        "loglog_fit",
        ("log_n", "log_neg_log_p"),
        &fit.points.iter().map(|&(n, nl)| (f64::from(n).ln(), nl.ln())).collect::<Vec<_>>(),
    )?;
    run.write_metadata(&json!({
        "command": Command::RegimeFit.name(),
        "run_id": run.id,
        "config": effective(config, ctx.seed).entries(),
        "spec": ctx.spec_id,
        "seed": ctx.seed,
        "calibration": calibration,
        "fit": fit,
        "classification": fit.classification.label(),
        "version": env!("CARGO_PKG_VERSION"),
    }))?;
    Ok(Report {
        run_dir: Some(run.path.clone()),
        lines: vec![
            format!("exponent {}", fit.exponent),
            format!(
                "candidates surface {} min-regime {} volume {}",
                fit.candidates[0], fit.candidates[1], fit.candidates[2]
            ),
            format!("classification {}", fit.classification.label()),
            format!("results in {}", run.path.display()),
        ],
    })
}

const VERIFY_KEYS: &[&str] = &[
    "seed",
    "inject",
    "output_dir",
    "oracle_instances",
    "stream_instances",
    "gluing_decompositions",
];

pub fn cmd_verify(config: &Config) -> Result<Report, CliError> {
    config.check_keys(VERIFY_KEYS)?;
    let seed = config.seed(Some(0))?;
    let defaults = VerifyOptions::new(seed);
    let options = VerifyOptions {
        oracle_instances: config.parsed("oracle_instances")?.unwrap_or(defaults.oracle_instances),
        stream_instances: config.parsed("stream_instances")?.unwrap_or(defaults.stream_instances),
        gluing_decompositions: config.parsed("gluing_decompositions")?.unwrap_or(defaults.gluing_decompositions),
        inject: config.parsed::<Injection>("inject")?.unwrap_or(Injection::None),
        ..defaults
    };
    let outcomes = run_verify(&options);
    let lines: Vec<String> = outcomes
        .iter()
        .map(|o| format!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail))
        .collect();
    let mut run_dir = None;
    if config.get("output_dir").is_some() {
        let canonical = effective(config, seed).canonical();
        let run = open_run(config, Command::Verify, &canonical)?;
        let rows: Vec<ResultRow> = outcomes
            .iter()
            .map(|o| ResultRow {
                run_id: run.id.clone(),
                spec: String::new(),
                dist: String::new(),
                n: None,
                h: None,
                reps: None,
                seed,
                statistic: format!("check:{}", o.name),
                value: if o.passed { 1.0 } else { 0.0 },
                ci_lo: None,
                ci_hi: None,
            })
            .collect();
        run.write_results(&rows)?;
        run.write_metadata(&json!({
            "command": Command::Verify.name(),
            "run_id": run.id,
            "options": options,
            "checks": outcomes,
            "version": env!("CARGO_PKG_VERSION"),
        }))?;
        run_dir = Some(run.path);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(Report { run_dir, lines })
    } else {
        for line in &lines {
            eprintln!("{line}");
        }
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}

const DUMP_KEYS: &[&str] = &["dist", "seed", "n", "replication", "scale", "terminals", "output_dir"];

pub fn cmd_dump_instance(config: &Config) -> Result<Report, CliError> {
    config.check_keys(&allowed(DUMP_KEYS))?;
    let ctx = context(config, None)?;
    let dist = config.distribution()?;
    let n: u32 = config.required("n")?;
    let replication: u64 = config.parsed("replication")?.unwrap_or(0);
    let scale: f64 = config.parsed("scale")?.unwrap_or(1000.0);
    let terminals = config.get("terminals").unwrap_or("tau");
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(ConfigError::Invalid {
            key: "scale".into(),
            reason: "must be a positive number".into(),
        }
        .into());
    }
    if terminals != "tau" && terminals != "phi" {
        return Err(ConfigError::Invalid {
            key: "terminals".into(),
            reason: format!("expected tau or phi, got `{terminals}`"),
        }
        .into());
    }
    config.output_dir()?;
    let compute = |e: &dyn std::fmt::Display| CliError::Compute(e.to_string());
    let spec = ctx.family.at(n).map_err(|e| compute(&e))?;
    let graph = build_cylinder(&spec).map_err(|e| compute(&e))?;
    let caps = sample_capacities(graph.edge_count(), &dist, sub_seed(ctx.seed, n), replication)
        .map_err(|e| compute(&e))?
        .quantized(scale);
    let (sources, sinks, value) = if terminals == "tau" {
        (graph.upper_half(), graph.lower_half(), tau(&graph, &caps).map_err(|e| compute(&e))?.value)
    } else {
        (graph.bottom(), graph.top(), phi(&graph, &caps).map_err(|e| compute(&e))?.value)
    };
    let comments = vec![
        format!("{} instance, spec {}, n {n}", terminals, ctx.spec_id),
        format!("dist {dist}, seed {}, replication {replication}, scale {scale}", ctx.seed),
        format!("max flow {value}"),
    ];
    let text = write_instance(&graph, &caps, &sources, &sinks, &comments);
    let run = open_run(config, Command::DumpInstance, &ctx.canonical)?;
    let file = run.path.join("instance.max");
    fs::write(&file, text)?;
    run.write_results(&[ResultRow {
        run_id: run.id.clone(),
        spec: ctx.spec_id.clone(),
        dist: dist.to_string(),
        n: Some(n),
        h: Some(fpp_core::exact::to_f64(spec.height())),
        reps: Some(1),
        seed: ctx.seed,
        statistic: format!("{terminals}_quantized"),
        value: value as f64,
        ci_lo: None,
        ci_hi: None,
    }])?;
    run.write_metadata(&json!({
        "command": Command::DumpInstance.name(),
        "run_id": run.id,
        "config": effective(config, ctx.seed).entries(),
        "vertices": graph.vertex_count(),
        "edges": graph.edge_count(),
        "max_flow": value,
        "version": env!("CARGO_PKG_VERSION"),
    }))?;
    Ok(Report {
        run_dir: Some(run.path),
        lines: vec![format!("max flow {value}"), format!("instance in {}", file.display())],
    })
}
