//! Command-line toolkit for competing-risks BART: fit models, predict
//! survival and cumulative incidence, compute partial-dependence summaries,
//! generate closed-form simulation scenarios, run replicate benchmarks and
//! report variable-selection probabilities.
//!
//! Every command is a pure function of its input files, flags and seed, and
//! ends by printing a one-line machine-readable JSON summary. Exit codes:
//! 0 success, 2 validation error, 3 runtime/numeric error.

use clap::{Args, Parser, Subcommand};
use crbart::crisk::{
    self, individual_differences, partial_dependence, pd_difference, summarize_draws,
    CompetingRisksFit, FittedModel, Functional,
};
use crbart::discrete::{coarsen_grid, Cause, CompetingRisksRecord};
use crbart::eval::{run_replicates, BenchMethod, BenchSpec};
use crbart::io::{
    load_model, read_cohort_csv, read_covariates_csv, save_model, sha256_hex, write_cohort_csv,
    write_metric_csv, write_metric_long_csv, ConfigFile, ModelArtifact,
};
use crbart::probit::McmcConfig;
use crbart::simgen::{generate, Scenario, ScenarioConfig};
use crbart::{Error, Result};
use std::path::{Path, PathBuf};
use std::time::Instant;

const SEED_ENV: &str = "CRBART_SEED";
const THREADS_ENV: &str = "CRBART_THREADS";

#[derive(Parser)]
#[command(
    name = "crbart",
    version,
    about = "Bayesian additive regression trees for competing risks data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a competing-risks BART model to a cohort CSV.
    Fit(FitArgs),
    /// Predict survival and cumulative incidence for new covariate rows.
    Predict(PredictArgs),
    /// Partial-dependence curves and contrasts between two covariate settings.
    Pd(PdArgs),
    /// Generate a cohort from a closed-form scenario, with its true CIF.
    Simulate(SimulateArgs),
    /// Replicate benchmark: bias/RMSE/coverage/width against the truth.
    Bench(BenchArgs),
    /// Variable-selection probabilities of a fitted model.
    Varsel(VarselArgs),
}

#[derive(Args, Clone)]
struct McmcArgs {
    /// Number of trees per BART function.
    #[arg(long)]
    trees: Option<usize>,
    /// Leaf-scale tuning parameter kappa.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Kept posterior draws per chain.
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    /// Use the sparse Dirichlet split-variable prior.
    #[arg(long)]
    dart: bool,
}

impl McmcArgs {
    fn apply(&self, mut cfg: McmcConfig) -> McmcConfig {
        if let Some(v) = self.trees {
            cfg.trees = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if let Some(v) = self.burn_in {
            cfg.burn_in = v;
        }
        if let Some(v) = self.thin {
            cfg.thin = v;
        }
        if let Some(v) = self.draws {
            cfg.draws = v;
        }
        if let Some(v) = self.chains {
            cfg.chains = v;
        }
        if self.dart {
            cfg.dart = true;
        }
        cfg
    }
}

#[derive(Args)]
struct FitArgs {
    /// Cohort CSV (time,status,cause,covariates...).
    #[arg(long)]
    data: PathBuf,
    /// Output model artifact path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Competing-risks formulation (m1 or m2; default m1).
    #[arg(long)]
    method: Option<String>,
    /// Optional key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coarsen observation times to multiples of this unit before fitting.
    #[arg(long)]
    coarsen: Option<f64>,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Covariate CSV with the model's training columns.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Credible level for the posterior bands.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PdArgs {
    #[arg(long)]
    model: PathBuf,
    /// Cohort CSV supplying the complement-covariate distribution.
    #[arg(long)]
    data: PathBuf,
    /// First covariate setting, e.g. "group=0" or "age=40,group=1".
    #[arg(long)]
    set_a: String,
    /// Second covariate setting.
    #[arg(long)]
    set_b: String,
    /// Functional: f1, f2 or s.
    #[arg(long, default_value = "f1")]
    functional: String,
    /// Evaluation time for the contrast (snapped down to the grid).
    #[arg(long)]
    time: Option<f64>,
    /// Also emit per-subject contrasts at the evaluation time.
    #[arg(long)]
    individual: bool,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Scenario family: case1, case2, case3 or friedman.
    #[arg(long)]
    case: String,
    #[arg(long)]
    lambda01: Option<f64>,
    #[arg(long)]
    lambda02: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    /// Covariate count for the friedman scenario (even, >= 6).
    #[arg(long)]
    p: Option<usize>,
    /// Cohort size.
    #[arg(long, default_value_t = 250)]
    n: usize,
    /// Target censoring proportion in (0,1), or "none".
    #[arg(long, default_value = "0.2")]
    censoring: String,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario> {
        let s = match self.case.to_ascii_lowercase().as_str() {
            "case1" => Scenario::ProportionalCauseHazards {
                lambda01: self.lambda01.unwrap_or(1.0),
                lambda02: self.lambda02.unwrap_or(1.0),
                beta1: self.beta1.unwrap_or(0.0),
                beta2: self.beta2.unwrap_or(0.0),
            },
            "case2" => Scenario::ProportionalSubdistribution {
                beta1: self.beta1.unwrap_or(0.0),
                p0: self.p0.unwrap_or(0.5),
                gamma0: self.gamma0.unwrap_or(2.0),
            },
            "case3" => Scenario::WeibullShapes {
                beta1: self.beta1.unwrap_or(0.0),
                beta2: self.beta2.unwrap_or(0.0),
                p0: self.p0.unwrap_or(0.5),
                gamma0: self.gamma0.unwrap_or(2.0),
            },
            "friedman" => Scenario::FriedmanSurface {
                p: self.p.unwrap_or(10),
                p0: self.p0.unwrap_or(0.2),
                gamma0: self.gamma0.unwrap_or(2.5),
            },
            other => return Err(Error::invalid(format!("unknown case '{other}'"))),
        };
        s.validate()?;
        Ok(s)
    }

    fn censor_target(&self) -> Result<Option<f64>> {
        match self.censoring.to_ascii_lowercase().as_str() {
            "none" | "0" => Ok(None),
            text => {
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::invalid(format!("censoring '{text}' is not a number")))?;
                Ok(Some(v))
            }
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output cohort CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional true-CIF CSV.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma-separated methods: m1,m2,aj.
    #[arg(long, default_value = "m1,aj")]
    methods: String,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[command(flatten)]
    mcmc: McmcArgs,
    /// Coarsen replicate cohorts before BART fits.
    #[arg(long)]
    coarsen: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Metric table CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional plot-ready long-format CSV.
    #[arg(long)]
    long: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VarselArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Pd(args) => cmd_pd(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Varsel(args) => cmd_varsel(args),
    };
    match result {
        Ok(summary) => {
            let elapsed = started.elapsed().as_secs_f64();
            println!(
                "{}",
                serde_json::json!({
                    "command": command_name(&cli.command),
                    "status": "ok",
                    "elapsed_s": (elapsed * 1000.0).round() / 1000.0,
                    "outputs": summary.outputs,
                    "seed": summary.seed,
                })
            );
        }
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Invalid(_) | Error::Csv(_) | Error::Config(_) | Error::Degenerate(_) => 2,
                _ => 3,
            };
            std::process::exit(code);
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fit(_) => "fit",
        Command::Predict(_) => "predict",
        Command::Pd(_) => "pd",
        Command::Simulate(_) => "simulate",
        Command::Bench(_) => "bench",
        Command::Varsel(_) => "varsel",
    }
}

struct Summary {
    outputs: Vec<String>,
    seed: Option<u64>,
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

/// Seed precedence: explicit flag, then CRBART_SEED, then config, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> u64 {
    flag.or_else(|| env_u64(SEED_ENV)).or(config).unwrap_or(0)
}

/// Thread-count precedence mirrors the seed; 0 or absent means "all cores".
fn init_threads(flag: Option<usize>, config: Option<usize>) -> Result<()> {
    let threads = flag.or_else(|| env_usize(THREADS_ENV)).or(config).unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn parse_method(name: &str) -> Result<&'static str> {
    match name.to_ascii_lowercase().as_str() {
        "m1" => Ok("m1"),
        "m2" => Ok("m2"),
        other => Err(Error::invalid(format!("method must be m1 or m2, got '{other}'"))),
    }
}

fn cmd_fit(args: &FitArgs) -> Result<Summary> {
    let config = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    init_threads(args.threads, config.run.threads)?;
    // Method precedence: CLI flag, then config file, then m1.
    let method_name = args
        .method
        .clone()
        .or_else(|| config.run.method.clone())
        .unwrap_or_else(|| "m1".to_string());
    let method = parse_method(&method_name)?;
    let mut mcmc = config.mcmc_config(McmcConfig::default());
    mcmc = args.mcmc.apply(mcmc);
    mcmc.seed = resolve_seed(args.seed, config.run.seed);
    mcmc.validate()?;
    let coarsen = args.coarsen.or(config.run.coarsen);

    let raw = std::fs::read(&args.data)?;
    let data_sha256 = sha256_hex(&raw);
    let (records, covariates) = read_cohort_csv(&args.data)?;
    let records = match coarsen {
        Some(unit) => coarsen_grid(&records, unit)?.0,
        None => records,
    };
    let fit = match method {
        "m1" => FittedModel::M1(crisk::fit_m1(&records, &mcmc)?),
        _ => FittedModel::M2(crisk::fit_m2(&records, &mcmc)?),
    };
    let seed = mcmc.seed;
    let artifact = ModelArtifact::from_fit(&fit, covariates, mcmc, coarsen, data_sha256);
    save_model(&artifact, &args.out)?;
    Ok(Summary { outputs: vec![args.out.display().to_string()], seed: Some(seed) })
}

fn cmd_predict(args: &PredictArgs) -> Result<Summary> {
    init_threads(args.threads, None)?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(Error::invalid("credible level must be in (0,1)"));
    }
    let artifact = load_model(&args.model)?;
    let model = artifact.to_fit()?;
    let (x, _) = read_covariates_csv(&args.data, Some(&artifact.covariates))?;
    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record([
        "subject", "time", "s_mean", "s_lower", "s_upper", "f1_mean", "f1_lower", "f1_upper",
        "f2_mean", "f2_lower", "f2_upper",
    ])
    .map_err(Error::from)?;
    for i in 0..x.n_rows() {
        let curves = model.curves(x.row(i))?;
        let s = curves.functional(Functional::Survival).summarize(args.level);
        let f1 = curves.functional(Functional::Cif(Cause::Cause1)).summarize(args.level);
        let f2 = curves.functional(Functional::Cif(Cause::Cause2)).summarize(args.level);
        for j in 0..s.times.len() {
            w.write_record([
                format!("{i}"),
                format!("{}", s.times[j]),
                format!("{}", s.mean[j]),
                format!("{}", s.lower[j]),
                format!("{}", s.upper[j]),
                format!("{}", f1.mean[j]),
                format!("{}", f1.lower[j]),
                format!("{}", f1.upper[j]),
                format!("{}", f2.mean[j]),
                format!("{}", f2.lower[j]),
                format!("{}", f2.upper[j]),
            ])
            .map_err(Error::from)?;
        }
    }
    w.flush()?;
    Ok(Summary { outputs: vec![args.out.display().to_string()], seed: None })
}

fn parse_setting(spec: &str, names: &[String]) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("setting '{part}' is not name=value")))?;
        let idx = names
            .iter()
            .position(|n| n == name.trim())
            .ok_or_else(|| Error::invalid(format!("unknown covariate '{}'", name.trim())))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("value '{}' is not numeric", value.trim())))?;
        out.push((idx, value));
    }
    if out.is_empty() {
        return Err(Error::invalid("empty covariate setting"));
    }
    Ok(out)
}

fn parse_functional(name: &str) -> Result<Functional> {
    match name.to_ascii_lowercase().as_str() {
        "f1" => Ok(Functional::Cif(Cause::Cause1)),
        "f2" => Ok(Functional::Cif(Cause::Cause2)),
        "s" => Ok(Functional::Survival),
        other => Err(Error::invalid(format!("functional must be f1, f2 or s, got '{other}'"))),
    }
}

fn cmd_pd(args: &PdArgs) -> Result<Summary> {
    init_threads(args.threads, None)?;
    let artifact = load_model(&args.model)?;
    let model = artifact.to_fit()?;
    let (records, names) = read_cohort_csv(&args.data)?;
    if names != artifact.covariates {
        return Err(Error::invalid(format!(
            "cohort covariates {names:?} do not match the model's {:?}",
            artifact.covariates
        )));
    }
    let cohort = crbart::data::Matrix::from_rows(
        &records.iter().map(|r| r.covariates.clone()).collect::<Vec<_>>(),
    )?;
    let set_a = parse_setting(&args.set_a, &names)?;
    let set_b = parse_setting(&args.set_b, &names)?;
    let functional = parse_functional(&args.functional)?;

    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record(["series", "subject", "time", "mean", "lower", "upper"])
        .map_err(Error::from)?;
    for (label, setting) in [("a", &set_a), ("b", &set_b)] {
        let pd = partial_dependence(&model, setting, &cohort, functional)?;
        let summary = pd.summarize(args.level);
        for j in 0..summary.times.len() {
            w.write_record([
                label.to_string(),
                String::new(),
                format!("{}", summary.times[j]),
                format!("{}", summary.mean[j]),
                format!("{}", summary.lower[j]),
                format!("{}", summary.upper[j]),
            ])
            .map_err(Error::from)?;
        }
    }
    if let Some(t_star) = args.time {
        let diffs = pd_difference(&model, &set_a, &set_b, &cohort, functional, t_star)?;
        let summary = summarize_draws(&diffs, args.level);
        let snapped = model
            .grid()
            .floor_index(t_star)
            .map(|j| model.grid().times()[j])
            .unwrap_or(0.0);
        w.write_record([
            "diff".to_string(),
            String::new(),
            format!("{snapped}"),
            format!("{}", summary.mean),
            format!("{}", summary.lower),
            format!("{}", summary.upper),
        ])
        .map_err(Error::from)?;
        if args.individual {
            let per_subject = individual_differences(
                &model, &cohort, &set_a, &set_b, functional, t_star, args.level,
            )?;
            for (i, c) in per_subject.iter().enumerate() {
                w.write_record([
                    "individual_diff".to_string(),
                    format!("{i}"),
                    format!("{snapped}"),
                    format!("{}", c.mean),
                    format!("{}", c.lower),
                    format!("{}", c.upper),
                ])
                .map_err(Error::from)?;
            }
        }
    } else if args.individual {
        return Err(Error::invalid("--individual requires --time"));
    }
    w.flush()?;
    Ok(Summary { outputs: vec![args.out.display().to_string()], seed: None })
}

fn scenario_covariate_names(scenario: &Scenario) -> Vec<String> {
    match scenario {
        Scenario::FriedmanSurface { p, .. } => (1..=*p).map(|k| format!("x{k}")).collect(),
        _ => vec!["group".to_string()],
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Summary> {
    let scenario = args.scenario.scenario()?;
    let seed = resolve_seed(args.seed, None);
    let cfg = ScenarioConfig {
        scenario: scenario.clone(),
        n: args.scenario.n,
        censor_target: args.scenario.censor_target()?,
        seed,
    };
    let cohort = generate(&cfg)?;
    let names = scenario_covariate_names(&scenario);
    write_cohort_csv(&args.out, &cohort.records, &names)?;
    let mut outputs = vec![args.out.display().to_string()];
    if let Some(truth_path) = &args.truth {
        write_truth_csv(truth_path, &scenario, &cohort.records)?;
        outputs.push(truth_path.display().to_string());
    }
    Ok(Summary { outputs, seed: Some(seed) })
}

/// True CIF export: per-group curves on a uniform time grid for the
/// two-sample scenarios, per-subject curves at the observed-event-time
/// quantiles for the regression surface.
fn write_truth_csv(
    path: &Path,
    scenario: &Scenario,
    records: &[CompetingRisksRecord],
) -> Result<()> {
    let truth = scenario.true_cif();
    let t_max = records.iter().map(|r| r.time).fold(0.0f64, f64::max);
    let mut w = csv::Writer::from_path(path)?;
    match scenario {
        Scenario::FriedmanSurface { .. } => {
            w.write_record(["subject", "time", "f1", "f2", "s"]).map_err(Error::from)?;
            let times: Vec<f64> = (1..=5).map(|k| t_max * k as f64 / 5.0).collect();
            for (i, r) in records.iter().enumerate() {
                for &t in &times {
                    let (f1, f2) = truth.cif(t, &r.covariates);
                    w.write_record([
                        format!("{i}"),
                        format!("{t}"),
                        format!("{f1}"),
                        format!("{f2}"),
                        format!("{}", 1.0 - f1 - f2),
                    ])
                    .map_err(Error::from)?;
                }
            }
        }
        _ => {
            w.write_record(["group", "time", "f1", "f2", "s"]).map_err(Error::from)?;
            for g in [0.0, 1.0] {
                for k in 0..=200 {
                    let t = t_max * k as f64 / 200.0;
                    let (f1, f2) = truth.cif(t, &[g]);
                    w.write_record([
                        format!("{g}"),
                        format!("{t}"),
                        format!("{f1}"),
                        format!("{f2}"),
                        format!("{}", 1.0 - f1 - f2),
                    ])
                    .map_err(Error::from)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<Summary> {
    init_threads(args.threads, None)?;
    let scenario = args.scenario.scenario()?;
    let seed = resolve_seed(args.seed, None);
    let methods: Vec<BenchMethod> = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(BenchMethod::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::invalid("no methods selected"));
    }
    let mcmc = args.mcmc.apply(McmcConfig {
        trees: 50,
        burn_in: 100,
        thin: 2,
        draws: 250,
        ..McmcConfig::default()
    });
    let spec = BenchSpec {
        scenario: ScenarioConfig {
            scenario,
            n: args.scenario.n,
            censor_target: args.scenario.censor_target()?,
            seed,
        },
        methods,
        replicates: args.replicates,
        mcmc,
        quantiles: vec![0.1, 0.3, 0.5, 0.7, 0.9],
        level: args.level,
        coarsen_unit: args.coarsen,
    };
    let table = run_replicates(&spec)?;
    write_metric_csv(&table, &args.out)?;
    let mut outputs = vec![args.out.display().to_string()];
    if let Some(long) = &args.long {
        write_metric_long_csv(&table, long)?;
        outputs.push(long.display().to_string());
    }
    Ok(Summary { outputs, seed: Some(seed) })
}

fn cmd_varsel(args: &VarselArgs) -> Result<Summary> {
    let artifact = load_model(&args.model)?;
    let model = artifact.to_fit()?;
    let vs = crisk::varsel(&model);
    // Fit covariates are [time, training covariates...].
    let mut names = vec!["time".to_string()];
    names.extend(artifact.covariates.iter().cloned());
    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record(["fit", "variable", "name", "mean_probability", "used_fraction"])
        .map_err(Error::from)?;
    let mut blocks: Vec<(&str, &crisk::VarSelSummary)> =
        vs.per_fit.iter().map(|(n, s)| (*n, s)).collect();
    blocks.push(("pooled", &vs.pooled));
    for (label, summary) in blocks {
        for (k, name) in names.iter().enumerate() {
            w.write_record([
                label.to_string(),
                format!("{k}"),
                name.clone(),
                format!("{}", summary.mean_probability[k]),
                format!("{}", summary.used_fraction[k]),
            ])
            .map_err(Error::from)?;
        }
    }
    w.flush()?;
    Ok(Summary { outputs: vec![args.out.display().to_string()], seed: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_parse() {
        let names = vec!["age".to_string(), "group".to_string()];
        let s = parse_setting("group=1", &names).unwrap();
        assert_eq!(s, vec![(1, 1.0)]);
        let s = parse_setting("age=40.5, group=0", &names).unwrap();
        assert_eq!(s, vec![(0, 40.5), (1, 0.0)]);
        assert!(parse_setting("height=2", &names).is_err());
        assert!(parse_setting("age=tall", &names).is_err());
        assert!(parse_setting("", &names).is_err());
    }

    #[test]
    fn scenario_args_build() {
        let args = ScenarioArgs {
            case: "case3".into(),
            lambda01: None,
            lambda02: None,
            beta1: Some(-(3.0f64).ln()),
            beta2: Some((3.0f64).ln()),
            p0: Some(0.5),
            gamma0: Some(2.0),
            p: None,
            n: 100,
            censoring: "0.2".into(),
        };
        assert!(matches!(args.scenario().unwrap(), Scenario::WeibullShapes { .. }));
        assert_eq!(args.censor_target().unwrap(), Some(0.2));
        let none = ScenarioArgs { censoring: "none".into(), ..args };
        assert_eq!(none.censor_target().unwrap(), None);
    }
}
