//! Replicate-study runner and metric suite: bias, RMSE, interval coverage and
//! width at event-free-survival quantiles, Lin's concordance, and the
//! Aalen-Johansen nonparametric baseline.

use crate::crisk::{fit_m1, fit_m2, CompetingRisksFit, CriskFitM1, CriskFitM2};
use crate::discrete::{coarsen_grid, Cause, CompetingRisksRecord, EventStatus};
use crate::math::{credible_interval, derive_seed, mean};
use crate::probit::McmcConfig;
use crate::simgen::{generate, Scenario, ScenarioConfig};
use crate::{Error, Result};
use rayon::prelude::*;

/// Times `t_q` with `1 - S(t_q) = q`, found by bisection to 1e-8.
pub fn eval_times(survival: impl Fn(f64) -> f64, quantiles: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(quantiles.len());
    for &q in quantiles {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid(format!("quantile {q} must be in (0,1)")));
        }
        let target = 1.0 - q;
        let mut hi = 1.0;
        while survival(hi) > target {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::invalid(format!(
                    "survival never falls to {target}; quantile {q} unattainable"
                )));
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            if survival(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// `(mean(est) - truth, sqrt(mean((est - truth)^2)))`.
pub fn bias_rmse(estimates: &[f64], truth: f64) -> Result<(f64, f64)> {
    if estimates.is_empty() {
        return Err(Error::invalid("no replicate estimates"));
    }
    let bias = mean(estimates) - truth;
    let mse = estimates.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>()
        / estimates.len() as f64;
    Ok((bias, mse.sqrt()))
}

/// Fraction of intervals containing the truth, and their mean width.
pub fn coverage_width(intervals: &[(f64, f64)], truth: f64) -> Result<(f64, f64)> {
    if intervals.is_empty() {
        return Err(Error::invalid("no replicate intervals"));
    }
    if intervals.iter().any(|(lo, hi)| lo > hi) {
        return Err(Error::invalid("malformed interval with lower > upper"));
    }
    let n = intervals.len() as f64;
    let covered = intervals.iter().filter(|(lo, hi)| *lo <= truth && truth <= *hi).count();
    let width = intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / n;
    Ok((covered as f64 / n, width))
}

/// Lin's concordance correlation coefficient with population (1/n) moments:
/// `2 cov / (var_p + var_t + (mean_p - mean_t)^2)`.
pub fn lin_ccc(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.len() < 2 {
        return Err(Error::invalid("concordance needs two aligned samples of length >= 2"));
    }
    let n = pred.len() as f64;
    let mp = mean(pred);
    let mt = mean(truth);
    let mut var_p = 0.0;
    let mut var_t = 0.0;
    let mut cov = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        var_p += (p - mp) * (p - mp);
        var_t += (t - mt) * (t - mt);
        cov += (p - mp) * (t - mt);
    }
    var_p /= n;
    var_t /= n;
    cov /= n;
    let denom = var_p + var_t + (mp - mt) * (mp - mt);
    if denom == 0.0 {
        return Err(Error::invalid("concordance undefined: both samples constant and equal"));
    }
    Ok(2.0 * cov / denom)
}

/// Nonparametric step estimates of `F_1`, `F_2` and `S` on the distinct
/// observed times of the given records.
#[derive(Debug, Clone, PartialEq)]
pub struct AjEstimate {
    pub times: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub s: Vec<f64>,
}

impl AjEstimate {
    fn step_at(&self, values: &[f64], t: f64, before: f64) -> f64 {
        match self.times.partition_point(|&g| g <= t).checked_sub(1) {
            Some(j) => values[j],
            None => before,
        }
    }

    pub fn f1_at(&self, t: f64) -> f64 {
        self.step_at(&self.f1, t, 0.0)
    }

    pub fn f2_at(&self, t: f64) -> f64 {
        self.step_at(&self.f2, t, 0.0)
    }

    pub fn s_at(&self, t: f64) -> f64 {
        self.step_at(&self.s, t, 1.0)
    }
}

/// Aalen-Johansen estimator: `F_k` jumps by `S(t-) d_k / n` at each event
/// time, with the Kaplan-Meier survivor for the event-free time. Deaths at a
/// tied time are processed before the censorings at that time leave the risk
/// set.
pub fn aalen_johansen(records: &[CompetingRisksRecord]) -> Result<AjEstimate> {
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].time.total_cmp(&records[b].time));
    let mut times = Vec::new();
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    let mut s = Vec::new();
    let mut at_risk = records.len() as f64;
    let mut surv = 1.0;
    let mut cum1 = 0.0;
    let mut cum2 = 0.0;
    let mut i = 0;
    while i < order.len() {
        let t = records[order[i]].time;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let mut c = 0.0;
        let mut j = i;
        while j < order.len() && records[order[j]].time == t {
            match records[order[j]].status {
                EventStatus::Event(Cause::Cause1) => d1 += 1.0,
                EventStatus::Event(Cause::Cause2) => d2 += 1.0,
                EventStatus::Censored => c += 1.0,
            }
            j += 1;
        }
        cum1 += surv * d1 / at_risk;
        cum2 += surv * d2 / at_risk;
        // Product form keeps exact binary fractions exact (e.g. 2/3 * 1/2).
        surv *= (at_risk - d1 - d2) / at_risk;
        times.push(t);
        f1.push(cum1);
        f2.push(cum2);
        s.push(surv);
        at_risk -= d1 + d2 + c;
        i = j;
    }
    Ok(AjEstimate { times, f1, f2, s })
}

/// Methods a benchmark run can include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    M1,
    M2,
    AalenJohansen,
}

impl BenchMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BenchMethod::M1 => "m1",
            BenchMethod::M2 => "m2",
            BenchMethod::AalenJohansen => "aj",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m1" => Ok(BenchMethod::M1),
            "m2" => Ok(BenchMethod::M2),
            "aj" | "aalen-johansen" | "aalen_johansen" => Ok(BenchMethod::AalenJohansen),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

/// Replicate benchmark specification over a two-sample scenario.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    /// Scenario, cohort size, censoring, and the master seed.
    pub scenario: ScenarioConfig,
    pub methods: Vec<BenchMethod>,
    pub replicates: usize,
    pub mcmc: McmcConfig,
    /// Event-free-survival quantiles defining the evaluation times.
    pub quantiles: Vec<f64>,
    /// Credible level for coverage/width.
    pub level: f64,
    /// Optional time coarsening applied to each replicate before BART fits.
    pub coarsen_unit: Option<f64>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            scenario: ScenarioConfig {
                scenario: Scenario::WeibullShapes { beta1: 0.0, beta2: 0.0, p0: 0.5, gamma0: 2.0 },
                n: 250,
                censor_target: Some(0.2),
                seed: 0,
            },
            methods: vec![BenchMethod::M1, BenchMethod::AalenJohansen],
            replicates: 10,
            mcmc: McmcConfig::default(),
            quantiles: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            level: 0.95,
            coarsen_unit: None,
        }
    }
}

/// Per-functional replicate metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSet {
    pub bias: f64,
    pub rmse: f64,
    pub coverage: Option<f64>,
    pub width: Option<f64>,
}

/// One cell of the benchmark table: a (method, group, quantile) combination
/// with metrics for `F_1` and for `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub method: BenchMethod,
    pub group: f64,
    pub quantile: f64,
    pub eval_time: f64,
    pub truth_f1: f64,
    pub truth_s: f64,
    pub f1: MetricSet,
    pub s: MetricSet,
    pub replicates: usize,
}

/// Benchmark output: one row per (method, group, quantile), plus per-method
/// counts of replicates whose fit failed (excluded, never silently dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
    pub failures: Vec<(BenchMethod, usize)>,
    pub master_seed: u64,
}

/// Seed-derivation rule recorded alongside benchmark outputs.
pub const SEED_RULE: &str = "replicate r uses splitmix64(master ^ (r+1)); fits derive further streams";

#[derive(Debug, Clone)]
struct RepEstimate {
    /// `[group][quantile] -> (f1_est, f1_lo, f1_hi, s_est, s_lo, s_hi)`.
    cells: Vec<Vec<(f64, f64, f64, f64, f64, f64)>>,
}

enum FitKind {
    M1(CriskFitM1),
    M2(CriskFitM2),
}

/// Run the replicate study: generate, fit each method, evaluate posterior
/// mean and credible interval of `F_1` and `S` at the evaluation times for
/// each group, and accumulate the metric table.
pub fn run_replicates(spec: &BenchSpec) -> Result<MetricTable> {
    spec.scenario.scenario.validate()?;
    spec.mcmc.validate()?;
    if matches!(spec.scenario.scenario, Scenario::FriedmanSurface { .. }) {
        return Err(Error::invalid(
            "the replicate benchmark is defined for the two-sample scenarios",
        ));
    }
    if spec.replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    if !(spec.level > 0.0 && spec.level < 1.0) {
        return Err(Error::invalid("credible level must be in (0,1)"));
    }
    let truth = spec.scenario.scenario.true_cif();
    let groups = [0.0, 1.0];
    // Evaluation times from the true event-free survival, per group.
    let mut times = Vec::new();
    let mut truth_f1 = Vec::new();
    let mut truth_s = Vec::new();
    for &g in &groups {
        let t_g = eval_times(|t| truth.survival(t, &[g]), &spec.quantiles)?;
        truth_f1.push(t_g.iter().map(|&t| truth.cif(t, &[g]).0).collect::<Vec<f64>>());
        truth_s.push(t_g.iter().map(|&t| truth.survival(t, &[g])).collect::<Vec<f64>>());
        times.push(t_g);
    }

    let master = spec.scenario.seed;
    let results: Vec<Vec<Option<RepEstimate>>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(master, 1 + r as u64);
            let cohort_cfg = ScenarioConfig { seed: rep_seed, ..spec.scenario.clone() };
            let cohort = generate(&cohort_cfg).expect("validated scenario");
            spec.methods
                .iter()
                .enumerate()
                .map(|(mi, method)| {
                    run_one_method(spec, *method, &cohort.records, &times, rep_seed, mi)
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures: Vec<(BenchMethod, usize)> =
        spec.methods.iter().map(|&m| (m, 0)).collect();
    for (mi, &method) in spec.methods.iter().enumerate() {
        let ok: Vec<&RepEstimate> =
            results.iter().filter_map(|rep| rep[mi].as_ref()).collect();
        failures[mi].1 = spec.replicates - ok.len();
        if ok.is_empty() {
            continue;
        }
        for (gi, &g) in groups.iter().enumerate() {
            for (qi, &q) in spec.quantiles.iter().enumerate() {
                let f1_est: Vec<f64> = ok.iter().map(|e| e.cells[gi][qi].0).collect();
                let s_est: Vec<f64> = ok.iter().map(|e| e.cells[gi][qi].3).collect();
                let (f1_bias, f1_rmse) = bias_rmse(&f1_est, truth_f1[gi][qi])?;
                let (s_bias, s_rmse) = bias_rmse(&s_est, truth_s[gi][qi])?;
                let (f1_cov, f1_width, s_cov, s_width) = if method == BenchMethod::AalenJohansen
                {
                    (None, None, None, None)
                } else {
                    let f1_ints: Vec<(f64, f64)> =
                        ok.iter().map(|e| (e.cells[gi][qi].1, e.cells[gi][qi].2)).collect();
                    let s_ints: Vec<(f64, f64)> =
                        ok.iter().map(|e| (e.cells[gi][qi].4, e.cells[gi][qi].5)).collect();
                    let (fc, fw) = coverage_width(&f1_ints, truth_f1[gi][qi])?;
                    let (sc, sw) = coverage_width(&s_ints, truth_s[gi][qi])?;
                    (Some(fc), Some(fw), Some(sc), Some(sw))
                };
                rows.push(MetricRow {
                    method,
                    group: g,
                    quantile: q,
                    eval_time: times[gi][qi],
                    truth_f1: truth_f1[gi][qi],
                    truth_s: truth_s[gi][qi],
                    f1: MetricSet {
                        bias: f1_bias,
                        rmse: f1_rmse,
                        coverage: f1_cov,
                        width: f1_width,
                    },
                    s: MetricSet { bias: s_bias, rmse: s_rmse, coverage: s_cov, width: s_width },
                    replicates: ok.len(),
                });
            }
        }
    }
    Ok(MetricTable { rows, failures, master_seed: master })
}

fn run_one_method(
    spec: &BenchSpec,
    method: BenchMethod,
    records: &[CompetingRisksRecord],
    times: &[Vec<f64>],
    rep_seed: u64,
    method_index: usize,
) -> Option<RepEstimate> {
    match method {
        BenchMethod::AalenJohansen => {
            let mut cells = Vec::with_capacity(2);
            for g in [0.0, 1.0] {
                let sub: Vec<CompetingRisksRecord> =
                    records.iter().filter(|r| r.covariates[0] == g).cloned().collect();
                let est = aalen_johansen(&sub).ok()?;
                cells.push(
                    times[usize::from(g == 1.0)]
                        .iter()
                        .map(|&t| {
                            let f1 = est.f1_at(t);
                            let s = est.s_at(t);
                            (f1, f64::NAN, f64::NAN, s, f64::NAN, f64::NAN)
                        })
                        .collect(),
                );
            }
            Some(RepEstimate { cells })
        }
        BenchMethod::M1 | BenchMethod::M2 => {
            let fit_records = match spec.coarsen_unit {
                Some(unit) => coarsen_grid(records, unit).ok()?.0,
                None => records.to_vec(),
            };
            let mut mcmc = spec.mcmc.clone();
            mcmc.seed = derive_seed(rep_seed, 101 + method_index as u64);
            let fit: FitKind = match method {
                BenchMethod::M1 => FitKind::M1(fit_m1(&fit_records, &mcmc).ok()?),
                BenchMethod::M2 => FitKind::M2(fit_m2(&fit_records, &mcmc).ok()?),
                BenchMethod::AalenJohansen => unreachable!(),
            };
            let mut cells = Vec::with_capacity(2);
            for (gi, g) in [0.0, 1.0].into_iter().enumerate() {
                let curves = match &fit {
                    FitKind::M1(f) => f.curves(&[g]).ok()?,
                    FitKind::M2(f) => f.curves(&[g]).ok()?,
                };
                let f1 = curves.functional(crate::crisk::Functional::Cif(Cause::Cause1));
                let s = curves.functional(crate::crisk::Functional::Survival);
                cells.push(
                    times[gi]
                        .iter()
                        .map(|&t| {
                            let f1_draws = f1.draws_at(t, 0.0);
                            let s_draws = s.draws_at(t, 1.0);
                            let (f1_lo, f1_hi) = credible_interval(&f1_draws, spec.level);
                            let (s_lo, s_hi) = credible_interval(&s_draws, spec.level);
                            (mean(&f1_draws), f1_lo, f1_hi, mean(&s_draws), s_lo, s_hi)
                        })
                        .collect(),
                );
            }
            Some(RepEstimate { cells })
        }
    }
}
