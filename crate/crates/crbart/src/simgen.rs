//! Closed-form competing-risks scenario generators and their true cumulative
//! incidence functions, plus censoring-rate calibration.
//!
//! Three two-sample scenarios (proportional cause-specific hazards,
//! proportional subdistribution hazards, group-dependent Weibull shapes) and
//! a sparse nonlinear regression surface built on the subdistribution forms.

use crate::discrete::{Cause, CompetingRisksRecord, EventStatus};
use crate::math::derive_seed;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Scenario family and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Scenario {
    /// Constant cause-specific hazards `lambda_k(x) = lambda0k exp(x beta_k)`
    /// with a binary group covariate.
    ProportionalCauseHazards { lambda01: f64, lambda02: f64, beta1: f64, beta2: f64 },
    /// Proportional subdistribution hazards with directly specified CIFs.
    ProportionalSubdistribution { beta1: f64, p0: f64, gamma0: f64 },
    /// Cause drawn with probability `p0`, then a Weibull time whose shape
    /// depends on the group: nonproportional on both hazard scales.
    WeibullShapes { beta1: f64, beta2: f64, p0: f64, gamma0: f64 },
    /// Sparse nonlinear surface: the subdistribution forms with
    /// `x beta_1` replaced by `friedman_function(x)` over `p` covariates
    /// (half uniform on [-1,1], half random signs).
    FriedmanSurface { p: usize, p0: f64, gamma0: f64 },
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Scenario::ProportionalCauseHazards { lambda01, lambda02, .. } => {
                if lambda01 <= 0.0 || lambda02 <= 0.0 {
                    return Err(Error::invalid("baseline hazard rates must be > 0"));
                }
            }
            Scenario::ProportionalSubdistribution { p0, gamma0, .. }
            | Scenario::WeibullShapes { p0, gamma0, .. } => {
                if !(p0 > 0.0 && p0 < 1.0) {
                    return Err(Error::invalid("p0 must lie in (0,1)"));
                }
                if gamma0 <= 0.0 {
                    return Err(Error::invalid("gamma0 must be > 0"));
                }
            }
            Scenario::FriedmanSurface { p, p0, gamma0 } => {
                if p % 2 != 0 || p < 6 {
                    return Err(Error::invalid("friedman scenario needs an even p >= 6"));
                }
                if !(p0 > 0.0 && p0 < 1.0) || gamma0 <= 0.0 {
                    return Err(Error::invalid("p0 in (0,1) and gamma0 > 0 required"));
                }
            }
        }
        Ok(())
    }

    /// Number of covariates a generated record carries.
    pub fn n_covariates(&self) -> usize {
        match self {
            Scenario::FriedmanSurface { p, .. } => *p,
            _ => 1,
        }
    }

    pub fn true_cif(&self) -> TrueCif {
        TrueCif { scenario: self.clone() }
    }
}

/// Full scenario specification: parameters, cohort size, censoring target
/// and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    /// Overall censoring proportion to calibrate an independent exponential
    /// censoring rate against; `None` disables censoring.
    pub censor_target: Option<f64>,
    pub seed: u64,
}

/// Generated cohort together with its truth handles.
#[derive(Debug, Clone)]
pub struct GeneratedCohort {
    pub records: Vec<CompetingRisksRecord>,
    pub truth: TrueCif,
    /// Calibrated exponential censoring rate, when censoring was applied.
    pub censoring_rate: Option<f64>,
    /// Uncensored event time and cause per subject (for diagnostics).
    pub latent: Vec<(f64, Cause)>,
}

/// Closed-form cumulative incidence evaluator for a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueCif {
    scenario: Scenario,
}

/// The sparse five-coordinate test surface used by the regression scenario:
/// `0.5 sin(pi x1 x_(p/2+1)) + x2^2 + 0.5 x_(p/2+2) + 0.25 x3^2 - 1.25`
/// (1-based coordinates; the first half of `x` is continuous, the second
/// half binary).
pub fn friedman_function(x: &[f64]) -> f64 {
    let p = x.len();
    assert!(p >= 6 && p % 2 == 0, "friedman surface needs an even p >= 6");
    let half = p / 2;
    0.5 * (std::f64::consts::PI * x[0] * x[half]).sin() + x[1] * x[1] + 0.5 * x[half + 1]
        + 0.25 * x[2] * x[2]
        - 1.25
}

/// Subdistribution CIF pair for linear predictor `eta = exp(score)`:
/// `F1 = 1 - [1 - p0(1 - e^{-g t})]^eta`, `F2 = (1-p0)^eta (1 - e^{-g t})`.
fn subdistribution_cif(t: f64, eta: f64, p0: f64, gamma0: f64) -> (f64, f64) {
    let decay = 1.0 - (-gamma0 * t).exp();
    let f1 = 1.0 - (1.0 - p0 * decay).powf(eta);
    let f2 = (1.0 - p0).powf(eta) * decay;
    (f1, f2)
}

impl TrueCif {
    /// `(F_1(t, x), F_2(t, x))`. Two-sample scenarios read the group from
    /// `x[0]`; the regression surface uses the full vector.
    pub fn cif(&self, t: f64, x: &[f64]) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        match &self.scenario {
            Scenario::ProportionalCauseHazards { lambda01, lambda02, beta1, beta2 } => {
                let g = x[0];
                let l1 = lambda01 * (g * beta1).exp();
                let l2 = lambda02 * (g * beta2).exp();
                let total = l1 + l2;
                let shared = 1.0 - (-total * t).exp();
                (l1 / total * shared, l2 / total * shared)
            }
            Scenario::ProportionalSubdistribution { beta1, p0, gamma0 } => {
                subdistribution_cif(t, (x[0] * beta1).exp(), *p0, *gamma0)
            }
            Scenario::WeibullShapes { beta1, beta2, p0, gamma0 } => {
                let g = x[0];
                let a1 = (g * beta1).exp();
                let a2 = (g * beta2).exp();
                let f1 = p0 * (1.0 - (-gamma0 * t.powf(a1)).exp());
                let f2 = (1.0 - p0) * (1.0 - (-gamma0 * t.powf(a2)).exp());
                (f1, f2)
            }
            Scenario::FriedmanSurface { p0, gamma0, .. } => {
                subdistribution_cif(t, friedman_function(x).exp(), *p0, *gamma0)
            }
        }
    }

    /// Event-free survival `1 - F_1 - F_2`.
    pub fn survival(&self, t: f64, x: &[f64]) -> f64 {
        let (f1, f2) = self.cif(t, x);
        1.0 - f1 - f2
    }
}

/// Inverse of the cause-conditional subdistribution CDFs: maps `v in (0,1)`
/// to a time.
fn invert_subdistribution(v: f64, cause: Cause, eta: f64, p0: f64, gamma0: f64) -> f64 {
    match cause {
        Cause::Cause1 => {
            // F1(t)/F1(inf) = v  =>  t in closed form.
            let f1_inf = 1.0 - (1.0 - p0).powf(eta);
            let w = 1.0 - v * f1_inf;
            let inner = 1.0 - (1.0 - w.powf(1.0 / eta)) / p0;
            -inner.ln() / gamma0
        }
        // F2(t)/F2(inf) = 1 - e^{-g t}.
        Cause::Cause2 => -(1.0 - v).ln() / gamma0,
    }
}

fn sample_subdistribution<R: Rng + ?Sized>(
    eta: f64,
    p0: f64,
    gamma0: f64,
    rng: &mut R,
) -> (f64, Cause) {
    let p_cause1 = 1.0 - (1.0 - p0).powf(eta);
    let cause = if rng.random::<f64>() < p_cause1 { Cause::Cause1 } else { Cause::Cause2 };
    let v: f64 = rng.random();
    let t = invert_subdistribution(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON), cause, eta, p0, gamma0);
    (t.max(f64::MIN_POSITIVE), cause)
}

/// Draw covariates and an uncensored `(time, cause)` pair for one subject.
fn sample_subject<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> (Vec<f64>, f64, Cause) {
    match *scenario {
        Scenario::ProportionalCauseHazards { lambda01, lambda02, beta1, beta2 } => {
            let g = f64::from(rng.random::<bool>());
            let l1 = lambda01 * (g * beta1).exp();
            let l2 = lambda02 * (g * beta2).exp();
            let total = l1 + l2;
            let u: f64 = rng.random();
            let t = -(1.0 - u).ln() / total;
            let cause =
                if rng.random::<f64>() < l1 / total { Cause::Cause1 } else { Cause::Cause2 };
            (vec![g], t.max(f64::MIN_POSITIVE), cause)
        }
        Scenario::ProportionalSubdistribution { beta1, p0, gamma0 } => {
            let g = f64::from(rng.random::<bool>());
            let (t, cause) = sample_subdistribution((g * beta1).exp(), p0, gamma0, rng);
            (vec![g], t, cause)
        }
        Scenario::WeibullShapes { beta1, beta2, p0, gamma0 } => {
            let g = f64::from(rng.random::<bool>());
            let cause = if rng.random::<f64>() < p0 { Cause::Cause1 } else { Cause::Cause2 };
            let beta = match cause {
                Cause::Cause1 => beta1,
                Cause::Cause2 => beta2,
            };
            let u: f64 = rng.random();
            let e = -(1.0 - u).ln();
            let t = (e / gamma0).powf((-g * beta).exp());
            (vec![g], t.max(f64::MIN_POSITIVE), cause)
        }
        Scenario::FriedmanSurface { p, p0, gamma0 } => {
            let half = p / 2;
            let mut x = Vec::with_capacity(p);
            for _ in 0..half {
                x.push(rng.random::<f64>() * 2.0 - 1.0);
            }
            for _ in 0..half {
                x.push(if rng.random::<bool>() { 1.0 } else { -1.0 });
            }
            let (t, cause) = sample_subdistribution(friedman_function(&x).exp(), p0, gamma0, rng);
            (x, t, cause)
        }
    }
}

/// Solve `P(C < T) = target` for an exponential censoring rate. Closed form
/// for the constant-hazard scenario, otherwise bisection on a seeded
/// 10^5-sample Monte Carlo estimate of the censoring probability.
pub fn calibrate_censoring(scenario: &Scenario, target: f64, seed: u64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("censoring target {target} must be in (0,1)")));
    }
    scenario.validate()?;
    if let Scenario::ProportionalCauseHazards { lambda01, lambda02, beta1, beta2 } = *scenario {
        let rate0 = lambda01 + lambda02;
        let rate1 = lambda01 * beta1.exp() + lambda02 * beta2.exp();
        if (rate0 - rate1).abs() < 1e-12 {
            // Racing exponentials: P(C < T) = c / (c + rate).
            return Ok(target * rate0 / (1.0 - target));
        }
        // Equal-probability group mixture of racing exponentials.
        let censor_prob =
            |c: f64| 0.5 * (c / (c + rate0) + c / (c + rate1));
        return Ok(bisect_rate(censor_prob, target));
    }
    let n_mc = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xCA11));
    let times: Vec<f64> = (0..n_mc).map(|_| sample_subject(scenario, &mut rng).1).collect();
    let censor_prob = move |c: f64| {
        times.iter().map(|&t| 1.0 - (-c * t).exp()).sum::<f64>() / n_mc as f64
    };
    Ok(bisect_rate(censor_prob, target))
}

fn bisect_rate(censor_prob: impl Fn(f64) -> f64, target: f64) -> f64 {
    let mut hi = 1.0;
    while censor_prob(hi) < target && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if censor_prob(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generate a cohort under the scenario config. Deterministic in the seed;
/// censoring is independent of the event process.
pub fn generate(cfg: &ScenarioConfig) -> Result<GeneratedCohort> {
    cfg.scenario.validate()?;
    if cfg.n == 0 {
        return Err(Error::invalid("cohort size must be >= 1"));
    }
    let censoring_rate = match cfg.censor_target {
        Some(target) => Some(calibrate_censoring(&cfg.scenario, target, cfg.seed)?),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::with_capacity(cfg.n);
    let mut latent = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let (x, t, cause) = sample_subject(&cfg.scenario, &mut rng);
        latent.push((t, cause));
        let (time, status) = match censoring_rate {
            Some(rate) => {
                let u: f64 = rng.random();
                let c = (-(1.0 - u).ln() / rate).max(f64::MIN_POSITIVE);
                if c < t {
                    (c, EventStatus::Censored)
                } else {
                    (t, EventStatus::Event(cause))
                }
            }
            None => (t, EventStatus::Event(cause)),
        };
        records.push(CompetingRisksRecord::new(time, status, x)?);
    }
    Ok(GeneratedCohort { records, truth: cfg.scenario.true_cif(), censoring_rate, latent })
}

/// The twelve two-sample parameter rows studied in the benchmark scenarios.
pub fn two_sample_parameter_rows() -> Vec<Scenario> {
    let log2 = (2.0f64).ln();
    let log3 = (3.0f64).ln();
    vec![
        Scenario::ProportionalCauseHazards { lambda01: 1.0, lambda02: 1.0, beta1: 0.0, beta2: 0.0 },
        Scenario::ProportionalCauseHazards {
            lambda01: 1.0,
            lambda02: 1.0,
            beta1: -log2,
            beta2: log2,
        },
        Scenario::ProportionalCauseHazards { lambda01: 2.0, lambda02: 0.5, beta1: 0.0, beta2: 0.0 },
        Scenario::ProportionalCauseHazards {
            lambda01: 2.0,
            lambda02: 0.5,
            beta1: -log2,
            beta2: log2,
        },
        Scenario::ProportionalSubdistribution { beta1: 0.0, p0: 0.5, gamma0: 2.0 },
        Scenario::ProportionalSubdistribution { beta1: -log2, p0: 0.5, gamma0: 2.0 },
        Scenario::ProportionalSubdistribution { beta1: 0.0, p0: 0.8, gamma0: 2.5 },
        Scenario::ProportionalSubdistribution { beta1: log2, p0: 0.2, gamma0: 2.5 },
        Scenario::WeibullShapes { beta1: 0.0, beta2: 0.0, p0: 0.5, gamma0: 2.0 },
        Scenario::WeibullShapes { beta1: -log3, beta2: log3, p0: 0.5, gamma0: 2.0 },
        Scenario::WeibullShapes { beta1: 0.0, beta2: 0.0, p0: 0.8, gamma0: 2.5 },
        Scenario::WeibullShapes { beta1: -log3, beta2: log3, p0: 0.2, gamma0: 2.5 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log2() -> f64 {
        (2.0f64).ln()
    }

    /// Empirical CIF by direct counting on uncensored data.
    fn empirical_cif(latent: &[(f64, Cause)], t: f64, cause: Cause) -> f64 {
        latent.iter().filter(|&&(ti, c)| ti <= t && c == cause).count() as f64
            / latent.len() as f64
    }

    #[test]
    fn case1_closed_form_values() {
        let s = Scenario::ProportionalCauseHazards {
            lambda01: 2.0,
            lambda02: 0.5,
            beta1: 0.0,
            beta2: 0.0,
        };
        let truth = s.true_cif();
        let (f1_inf, _) = truth.cif(1e9, &[0.0]);
        assert!((f1_inf - 0.8).abs() < 1e-9);
        assert_eq!(truth.cif(0.0, &[0.0]), (0.0, 0.0));

        let equal = Scenario::ProportionalCauseHazards {
            lambda01: 1.0,
            lambda02: 1.0,
            beta1: 0.0,
            beta2: 0.0,
        };
        let (f1, _) = equal.true_cif().cif(1.0, &[0.0]);
        assert!((f1 - 0.5 * (1.0 - (-2.0f64).exp())).abs() < 1e-12);
        assert!((f1 - 0.432332).abs() < 1e-6);
    }

    #[test]
    fn case1_monte_carlo_limits() {
        let s = Scenario::ProportionalCauseHazards {
            lambda01: 1.0,
            lambda02: 1.0,
            beta1: -log2(),
            beta2: log2(),
        };
        let cohort = generate(&ScenarioConfig {
            scenario: s,
            n: 100_000,
            censor_target: None,
            seed: 5,
        })
        .unwrap();
        // Limiting incidence per group: p_0 = 0.5 and p_1 = 0.2.
        let groups: Vec<f64> = cohort.records.iter().map(|r| r.covariates[0]).collect();
        for (g, want) in [(0.0, 0.5), (1.0, 0.2)] {
            let idx: Vec<usize> = (0..groups.len()).filter(|&i| groups[i] == g).collect();
            let hits = idx
                .iter()
                .filter(|&&i| cohort.latent[i].1 == Cause::Cause1)
                .count() as f64;
            let frac = hits / idx.len() as f64;
            assert!((frac - want).abs() < 0.01, "group {g}: {frac}");
        }
    }

    #[test]
    fn case2_closed_form_values() {
        let s = Scenario::ProportionalSubdistribution { beta1: -log2(), p0: 0.5, gamma0: 2.0 };
        let truth = s.true_cif();
        // x = 0, t -> inf: F1 -> p0.
        let (f1_inf, _) = truth.cif(1e6, &[0.0]);
        assert!((f1_inf - 0.5).abs() < 1e-9);
        // Direct formula evaluation at x=1, t=1.
        let (f1, _) = truth.cif(1.0, &[1.0]);
        let want = 1.0 - (1.0 - 0.5 * (1.0 - (-2.0f64).exp())).powf(0.5);
        assert!((f1 - want).abs() < 1e-12);
        assert!((f1 - 0.246563).abs() < 1e-6);
        // Subdistribution property F1 + F2 <= 1 over random inputs.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let p0 = 0.05 + 0.9 * rng.random::<f64>();
            let gamma0 = 0.1 + 3.0 * rng.random::<f64>();
            let beta1 = 2.0 * rng.random::<f64>() - 1.0;
            let t = 5.0 * rng.random::<f64>();
            let g = f64::from(rng.random::<bool>());
            let truth =
                Scenario::ProportionalSubdistribution { beta1, p0, gamma0 }.true_cif();
            let (f1, f2) = truth.cif(t, &[g]);
            assert!(f1 + f2 <= 1.0 + 1e-12);
            assert!(f1 >= 0.0 && f2 >= 0.0);
        }
    }

    #[test]
    fn case2_inversion_round_trip() {
        let (p0, gamma0) = (0.5, 2.0);
        for &eta in &[1.0, 0.5, 2.0] {
            for &v in &[0.05, 0.3, 0.7, 0.95] {
                let t = invert_subdistribution(v, Cause::Cause1, eta, p0, gamma0);
                let (f1, _) = subdistribution_cif(t, eta, p0, gamma0);
                let f1_inf = 1.0 - (1.0 - p0).powf(eta);
                assert!((f1 / f1_inf - v).abs() < 1e-9, "eta {eta} v {v}");

                let t2 = invert_subdistribution(v, Cause::Cause2, eta, p0, gamma0);
                let (_, f2) = subdistribution_cif(t2, eta, p0, gamma0);
                let f2_inf = (1.0 - p0).powf(eta);
                assert!((f2 / f2_inf - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn case2_cause_probability_with_zero_beta() {
        let s = Scenario::ProportionalSubdistribution { beta1: 0.0, p0: 0.3, gamma0: 2.0 };
        let cohort =
            generate(&ScenarioConfig { scenario: s, n: 50_000, censor_target: None, seed: 8 })
                .unwrap();
        let frac = cohort.latent.iter().filter(|&&(_, c)| c == Cause::Cause1).count() as f64
            / cohort.latent.len() as f64;
        assert!((frac - 0.3).abs() < 0.01, "cause-1 fraction {frac}");
    }

    #[test]
    fn case3_closed_form_values() {
        let log3 = (3.0f64).ln();
        let s = Scenario::WeibullShapes { beta1: -log3, beta2: log3, p0: 0.5, gamma0: 2.0 };
        let truth = s.true_cif();
        // Group 0 has unit shapes: F1(t, 0) = p0 (1 - e^{-gamma0 t}).
        let (f1, _) = truth.cif(0.7, &[0.0]);
        assert!((f1 - 0.5 * (1.0 - (-1.4f64).exp())).abs() < 1e-12);
        // t = 1 is a fixed point of t^a, so the shape drops out.
        let (f1, _) = truth.cif(1.0, &[1.0]);
        assert!((f1 - 0.432332).abs() < 1e-6);
        // Same limiting incidence in both groups.
        for g in [0.0, 1.0] {
            let (f1_inf, f2_inf) = truth.cif(1e9, &[g]);
            assert!((f1_inf - 0.5).abs() < 1e-9);
            assert!((f2_inf - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn friedman_surface_properties() {
        let p = 10;
        // All continuous coordinates zero, both relevant signs +1.
        let mut x = vec![0.0; p];
        x[p / 2] = 1.0;
        x[p / 2 + 1] = 1.0;
        assert!((friedman_function(&x) - (-0.75)).abs() < 1e-12);
        // Exactly five relevant coordinates.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut x: Vec<f64> = (0..p / 2).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            x.extend((0..p / 2).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }));
            let f = friedman_function(&x);
            let mut y = x.clone();
            for j in [3, 4, p / 2 + 2, p - 1] {
                y[j] = -y[j] * 0.37;
            }
            assert_eq!(friedman_function(&y), f);
        }
        // Empirical range exceeds the nominal [-1, 1] band on the low side.
        let corner = {
            let mut x = vec![0.0; p];
            x[0] = 1.0;
            x[p / 2] = -1.0; // sin term at its minimum... pi*(-1)
            x[p / 2 + 1] = -1.0;
            x
        };
        assert!(friedman_function(&corner) < -1.0);
    }

    #[test]
    fn friedman_generation_matches_truth() {
        let scenario = Scenario::FriedmanSurface { p: 10, p0: 0.2, gamma0: 2.5 };
        let cohort = generate(&ScenarioConfig {
            scenario: scenario.clone(),
            n: 20_000,
            censor_target: None,
            seed: 10,
        })
        .unwrap();
        // Average true CIF against the empirical CIF at a few times.
        let truth = scenario.true_cif();
        for &t in &[0.2, 0.5, 1.0] {
            let mean_truth: f64 = cohort
                .records
                .iter()
                .map(|r| truth.cif(t, &r.covariates).0)
                .sum::<f64>()
                / cohort.records.len() as f64;
            let emp = empirical_cif(&cohort.latent, t, Cause::Cause1);
            assert!((mean_truth - emp).abs() < 0.015, "t={t}: {mean_truth} vs {emp}");
        }
        assert!(Scenario::FriedmanSurface { p: 7, p0: 0.2, gamma0: 2.5 }.validate().is_err());
        assert!(Scenario::FriedmanSurface { p: 4, p0: 0.2, gamma0: 2.5 }.validate().is_err());
    }

    #[test]
    fn censoring_calibration_closed_forms() {
        let exp1 = Scenario::ProportionalCauseHazards {
            lambda01: 0.5,
            lambda02: 0.5,
            beta1: 0.0,
            beta2: 0.0,
        };
        // T ~ Exp(1): target 0.2 gives c = 0.25 exactly, target 0.5 gives 1.
        assert_eq!(calibrate_censoring(&exp1, 0.2, 0).unwrap(), 0.25);
        assert_eq!(calibrate_censoring(&exp1, 0.5, 0).unwrap(), 1.0);
        let tiny = calibrate_censoring(&exp1, 1e-4, 0).unwrap();
        assert!(tiny < 2e-4, "rate {tiny}");
        assert!(calibrate_censoring(&exp1, 1.2, 0).is_err());
    }

    #[test]
    fn censoring_rates_hit_targets() {
        for scenario in [
            Scenario::ProportionalCauseHazards {
                lambda01: 1.0,
                lambda02: 1.0,
                beta1: -log2(),
                beta2: log2(),
            },
            Scenario::WeibullShapes { beta1: -(3.0f64).ln(), beta2: (3.0f64).ln(), p0: 0.5, gamma0: 2.0 },
            Scenario::ProportionalSubdistribution { beta1: log2(), p0: 0.2, gamma0: 2.5 },
        ] {
            for target in [0.2, 0.5] {
                let cohort = generate(&ScenarioConfig {
                    scenario: scenario.clone(),
                    n: 100_000,
                    censor_target: Some(target),
                    seed: 11,
                })
                .unwrap();
                let censored = cohort
                    .records
                    .iter()
                    .filter(|r| r.status == EventStatus::Censored)
                    .count() as f64;
                let frac = censored / cohort.records.len() as f64;
                assert!((frac - target).abs() < 0.01, "{scenario:?} target {target}: {frac}");
            }
        }
    }

    #[test]
    fn censoring_independent_of_cause() {
        let s = Scenario::WeibullShapes { beta1: 0.0, beta2: 0.0, p0: 0.5, gamma0: 2.0 };
        let cohort = generate(&ScenarioConfig {
            scenario: s,
            n: 100_000,
            censor_target: Some(0.5),
            seed: 12,
        })
        .unwrap();
        // Chi-square independence between the latent cause and the censoring
        // label; critical value at alpha = 0.001 with 1 df is 10.828.
        let mut table = [[0.0f64; 2]; 2];
        for (r, &(_, cause)) in cohort.records.iter().zip(&cohort.latent) {
            let i = usize::from(r.status == EventStatus::Censored);
            let j = usize::from(cause == Cause::Cause2);
            table[i][j] += 1.0;
        }
        let n: f64 = table.iter().flatten().sum();
        let mut chi2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let row: f64 = table[i].iter().sum();
                let col: f64 = table[0][j] + table[1][j];
                let expect = row * col / n;
                chi2 += (table[i][j] - expect).powi(2) / expect;
            }
        }
        assert!(chi2 < 10.828, "chi-square {chi2}");
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ScenarioConfig {
            scenario: Scenario::WeibullShapes { beta1: 0.3, beta2: -0.2, p0: 0.4, gamma0: 1.5 },
            n: 500,
            censor_target: Some(0.2),
            seed: 99,
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.censoring_rate, b.censoring_rate);
    }

    #[test]
    fn parameter_rows_round_trip_through_serialization() {
        for scenario in two_sample_parameter_rows() {
            let cfg = ScenarioConfig {
                scenario: scenario.clone(),
                n: 250,
                censor_target: Some(0.2),
                seed: 1,
            };
            let json = serde_json::to_string(&cfg).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(cfg, back);
            // Total incidence reaches 1 in the long-time limit.
            let truth = scenario.true_cif();
            for g in [0.0, 1.0] {
                let (f1, f2) = truth.cif(1e3, &[g]);
                assert!((f1 + f2 - 1.0).abs() < 1e-6, "{scenario:?} group {g}");
            }
        }
    }
}
