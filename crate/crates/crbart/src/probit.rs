//! Binary-outcome BART via truncated-normal latent augmentation.
//!
//! The Gibbs sampler alternates a latent draw `z | f` with one
//! grow/prune-and-leaf-update sweep per tree on the latent residuals
//! (`f | z`), with the error standard deviation fixed at 1.

use crate::data::{BinaryDataset, Matrix};
use crate::ensemble::{
    dart_update_s, dart_update_theta, draw_leaf_values, leaf_scale_probit, mh_step, CutpointGrid,
    DartParams, Ensemble, SplitCounts, SplitProbs, Tree, TreePrior, DEFAULT_CUTPOINTS,
};
use crate::math::{self, normal_cdf, normal_quantile};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// MCMC run settings. `draws` counts kept draws per chain, so a fit stores
/// `draws * chains` ensembles after burn-in and thinning.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McmcConfig {
    /// Number of trees in the ensemble.
    pub trees: usize,
    /// Leaf-scale tuning parameter; probit mode uses `tau = 3/kappa`.
    pub kappa: f64,
    pub burn_in: usize,
    pub thin: usize,
    /// Kept draws per chain.
    pub draws: usize,
    pub chains: usize,
    pub seed: u64,
    /// Replace the uniform split-variable prior with the sparse Dirichlet.
    pub dart: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            trees: 200,
            kappa: 2.0,
            burn_in: 100,
            thin: 10,
            draws: 2000,
            chains: 1,
            seed: 0,
            dart: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 || self.thin == 0 || self.draws == 0 || self.chains == 0 {
            return Err(Error::invalid(
                "trees, thin, draws and chains must all be at least 1",
            ));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::invalid("kappa must be > 0"));
        }
        Ok(())
    }

    pub fn total_draws(&self) -> usize {
        self.draws * self.chains
    }
}

/// One stored posterior draw: the frozen ensemble plus the variable
/// split-count trace (and the Dirichlet split probabilities under DART).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PosteriorDraw {
    pub ensemble: Ensemble,
    pub split_counts: Vec<u32>,
    pub split_probs: Option<Vec<f64>>,
}

/// Posterior sample of a probit BART fit.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProbitFit {
    pub draws: Vec<PosteriorDraw>,
    pub mu0: f64,
    pub n_vars: usize,
    pub config: McmcConfig,
}

/// Probit offset `Phi^{-1}(ybar)`.
pub fn probit_offset(ybar: f64) -> Result<f64> {
    if !(ybar > 0.0 && ybar < 1.0) {
        return Err(Error::degenerate(format!(
            "outcome mean {ybar} admits no probit offset (all-0 or all-1 response)"
        )));
    }
    Ok(normal_quantile(ybar))
}

/// Latent augmentation draw: `z ~ N(mean, 1)` truncated to `[0, inf)` when
/// `y = 1` and to `(-inf, 0]` when `y = 0`.
pub fn latent_draw<R: rand::Rng + ?Sized>(y: u8, mean: f64, rng: &mut R) -> f64 {
    math::sample_unit_normal_sign_truncated(mean, y == 1, rng)
}

/// Fit probit BART. Requires both outcome classes to be present.
pub fn fit_probit(data: &BinaryDataset, cfg: &McmcConfig) -> Result<ProbitFit> {
    fit_probit_impl(data, cfg, true)
}

/// As [`fit_probit`] but tolerating a single-class outcome vector (the
/// outcome mean is clamped to `[1/(N+1), N/(N+1)]` before the probit offset).
/// Used for conditional factors of competing-risks models where one class may
/// legitimately be absent.
pub fn fit_probit_any_class(data: &BinaryDataset, cfg: &McmcConfig) -> Result<ProbitFit> {
    fit_probit_impl(data, cfg, false)
}

fn fit_probit_impl(
    data: &BinaryDataset,
    cfg: &McmcConfig,
    require_both_classes: bool,
) -> Result<ProbitFit> {
    cfg.validate()?;
    if require_both_classes && !data.has_both_classes() {
        let class = data.y[0];
        return Err(Error::degenerate(format!(
            "all {} outcomes equal {class}; a probit fit needs both classes",
            data.n_rows()
        )));
    }
    let n = data.n_rows() as f64;
    // Rare events per interval can make ybar extreme in expanded survival
    // data; clamp before the offset.
    let ybar = data.outcome_mean().clamp(1.0 / (n + 1.0), n / (n + 1.0));
    let mu0 = probit_offset(ybar)?;
    let cuts = CutpointGrid::from_data(&data.x, DEFAULT_CUTPOINTS);
    let tau = leaf_scale_probit(cfg.kappa);

    let chain_draws: Vec<Vec<PosteriorDraw>> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| {
            let chain_seed = math::derive_seed(cfg.seed, chain as u64);
            run_chain(data, cfg, &cuts, mu0, tau, chain_seed)
        })
        .collect();

    let draws: Vec<PosteriorDraw> = chain_draws.into_iter().flatten().collect();
    Ok(ProbitFit { draws, mu0, n_vars: data.n_vars(), config: cfg.clone() })
}

fn run_chain(
    data: &BinaryDataset,
    cfg: &McmcConfig,
    cuts: &CutpointGrid,
    mu0: f64,
    tau: f64,
    chain_seed: u64,
) -> Vec<PosteriorDraw> {
    let n = data.n_rows();
    let p = data.n_vars();
    let m = cfg.trees;
    let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);

    let mut prior = TreePrior::probit_defaults(p);
    if cfg.dart {
        prior.dart = Some(DartParams::sparse_defaults(p));
    }

    let sigma2 = 1.0;
    let sigma_mu2 = tau * tau / m as f64;

    let mut trees = vec![Tree::root_leaf(0.0); m];
    let mut fits = vec![mu0; n];
    let mut z: Vec<f64> = (0..n).map(|i| latent_draw(data.y[i], fits[i], &mut rng)).collect();

    let mut assign: Vec<u32> = Vec::with_capacity(n);
    let mut g_old = vec![0.0f64; n];
    let mut resid = vec![0.0f64; n];

    let total_iters = cfg.burn_in + cfg.draws * cfg.thin;
    let mut kept = Vec::with_capacity(cfg.draws);

    for it in 0..total_iters {
        for i in 0..n {
            z[i] = latent_draw(data.y[i], fits[i], &mut rng);
        }

        for j in 0..m {
            trees[j].assign_rows(&data.x, &mut assign);
            for i in 0..n {
                g_old[i] = trees[j].leaf_value(assign[i]);
                resid[i] = z[i] - fits[i] + g_old[i];
            }
            let outcome = mh_step(
                &mut trees[j],
                &data.x,
                cuts,
                &assign,
                &resid,
                &prior,
                sigma2,
                sigma_mu2,
                &mut rng,
            );
            if outcome.changed() {
                trees[j].assign_rows(&data.x, &mut assign);
            }
            draw_leaf_values(&mut trees[j], &assign, &resid, sigma2, sigma_mu2, &mut rng);
            for i in 0..n {
                fits[i] += trees[j].leaf_value(assign[i]) - g_old[i];
            }
        }

        if let Some(dart) = prior.dart.clone() {
            let counts = SplitCounts::from_trees(&trees, p);
            let s = dart_update_s(&counts, dart.theta, &mut rng);
            if dart.theta_random {
                let theta = dart_update_theta(&s, dart.rho, dart.a, dart.b, &mut rng);
                prior.dart.as_mut().expect("dart enabled").theta = theta;
            }
            prior.split_probs = SplitProbs::Weights(s);
        }

        if it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0 {
            let frozen: Vec<Tree> = trees
                .iter()
                .map(|t| {
                    let mut c = t.clone();
                    c.compact();
                    c
                })
                .collect();
            let counts = SplitCounts::from_trees(&frozen, p);
            let split_probs = match &prior.split_probs {
                SplitProbs::Weights(w) if cfg.dart => Some(w.clone()),
                _ => None,
            };
            kept.push(PosteriorDraw {
                ensemble: Ensemble { trees: frozen, mu0, tau, sigma: 1.0 },
                split_counts: counts.counts,
                split_probs,
            });
        }
    }
    kept
}

impl ProbitFit {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    /// Success probabilities `Phi(mu0 + f_d(x*))` for every stored draw `d`
    /// and every row of `x`: a `(draws x rows)` matrix with entries strictly
    /// inside (0, 1).
    pub fn predict_prob(&self, x: &Matrix) -> Result<Matrix> {
        if x.n_cols() != self.n_vars {
            return Err(Error::invalid(format!(
                "prediction rows have {} columns, fit used {}",
                x.n_cols(),
                self.n_vars
            )));
        }
        let n = x.n_rows();
        let rows: Vec<Vec<f64>> = self
            .draws
            .par_iter()
            .map(|d| (0..n).map(|i| clamp_prob(normal_cdf(d.ensemble.eval(x.row(i))))).collect())
            .collect();
        Matrix::from_rows(&rows)
    }

    /// Posterior draws of the success probability at one covariate vector.
    pub fn prob_draws_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_vars {
            return Err(Error::invalid(format!(
                "input has {} entries, fit used {}",
                x.len(),
                self.n_vars
            )));
        }
        Ok(self
            .draws
            .iter()
            .map(|d| clamp_prob(normal_cdf(d.ensemble.eval(x))))
            .collect())
    }
}

#[inline]
pub(crate) fn clamp_prob(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}
