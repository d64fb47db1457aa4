//! Sparse-Dirichlet split-probability updates (the DART prior).

use super::SplitCounts;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

/// Draw the split-probability vector from its Dirichlet full conditional
/// `Dirichlet(theta/P + counts_1, ..., theta/P + counts_P)`.
pub fn dart_update_s<R: Rng + ?Sized>(
    counts: &SplitCounts,
    theta: f64,
    rng: &mut R,
) -> Vec<f64> {
    let p = counts.counts.len();
    let base = theta / p as f64;
    let mut draws = Vec::with_capacity(p);
    let mut total = 0.0;
    for &c in &counts.counts {
        let g = Gamma::new(base + c as f64, 1.0).unwrap().sample(rng);
        total += g;
        draws.push(g);
    }
    if total <= 0.0 {
        return vec![1.0 / p as f64; p];
    }
    for d in &mut draws {
        *d /= total;
    }
    draws
}

const THETA_GRID: usize = 1000;
const U_LOW: f64 = 0.001;
const U_HIGH: f64 = 0.999;

/// Log density of `Dirichlet(theta/P, ..., theta/P)` at `s`, up to terms
/// constant in `theta`.
fn dirichlet_symmetric_logpdf(s: &[f64], theta: f64) -> f64 {
    let p = s.len() as f64;
    let a = theta / p;
    let sum_log_s: f64 = s.iter().map(|&v| v.max(1e-300).ln()).sum();
    ln_gamma(theta) - p * ln_gamma(a) + (a - 1.0) * sum_log_s
}

fn theta_grid_draw<R: Rng + ?Sized>(
    s: Option<&[f64]>,
    rho: f64,
    a: f64,
    b: f64,
    rng: &mut R,
) -> f64 {
    // Uniform grid on u = theta/(theta+rho) strictly inside (0,1); the prior
    // is u ~ Beta(a, b).
    let mut log_weights = [0.0f64; THETA_GRID];
    let mut max_lw = f64::NEG_INFINITY;
    for (k, lw) in log_weights.iter_mut().enumerate() {
        let u = U_LOW + (U_HIGH - U_LOW) * (k as f64 + 0.5) / THETA_GRID as f64;
        let theta = rho * u / (1.0 - u);
        let mut w = (a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln();
        if let Some(s) = s {
            w += dirichlet_symmetric_logpdf(s, theta);
        }
        *lw = w;
        max_lw = max_lw.max(w);
    }
    let mut total = 0.0;
    let weights: Vec<f64> = log_weights.iter().map(|&lw| (lw - max_lw).exp()).collect();
    for w in &weights {
        total += w;
    }
    let target: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut idx = THETA_GRID - 1;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            idx = k;
            break;
        }
    }
    let u = U_LOW + (U_HIGH - U_LOW) * (idx as f64 + 0.5) / THETA_GRID as f64;
    rho * u / (1.0 - u)
}

/// Draw the Dirichlet concentration `theta` from a discrete-grid
/// approximation of its posterior given the current split probabilities.
pub fn dart_update_theta<R: Rng + ?Sized>(
    s: &[f64],
    rho: f64,
    a: f64,
    b: f64,
    rng: &mut R,
) -> f64 {
    theta_grid_draw(Some(s), rho, a, b, rng)
}

/// Draw `theta` from the prior alone (same grid, likelihood term skipped).
pub fn dart_theta_prior_draw<R: Rng + ?Sized>(rho: f64, a: f64, b: f64, rng: &mut R) -> f64 {
    theta_grid_draw(None, rho, a, b, rng)
}
