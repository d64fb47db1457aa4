//! Sum-of-trees model: tree/ensemble representations, the BART and DART
//! priors, and the Markov-chain transition kernel.

mod dart;
mod kernel;
mod tree;

pub use dart::{dart_theta_prior_draw, dart_update_s, dart_update_theta};
pub use kernel::{
    draw_leaf_values, leaf_marginal_loglik, leaf_posterior_draw, propose_and_accept,
    sample_tree_from_prior, sigma_draw, MoveOutcome,
};
pub(crate) use kernel::mh_step;
pub use tree::{NestedNode, Node, Tree};

use crate::data::Matrix;
use crate::math::chi_squared_quantile;
use crate::{Error, Result};
use rand::Rng;

/// Probability that a node at the given depth is grown into a branch.
pub fn grow_prob(depth: u16, alpha: f64, gamma: f64) -> f64 {
    alpha * (1.0 + depth as f64).powf(-gamma)
}

/// Split-variable distribution: uniform over variables, or an explicit
/// probability vector (the DART posterior draw).
#[derive(Debug, Clone)]
pub enum SplitProbs {
    Uniform { n_vars: usize },
    Weights(Vec<f64>),
}

impl SplitProbs {
    pub fn n_vars(&self) -> usize {
        match self {
            SplitProbs::Uniform { n_vars } => *n_vars,
            SplitProbs::Weights(w) => w.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SplitProbs::Uniform { n_vars } => {
                if *n_vars == 0 {
                    return Err(Error::invalid("need at least one split variable"));
                }
            }
            SplitProbs::Weights(w) => {
                if w.is_empty() {
                    return Err(Error::invalid("empty split-probability vector"));
                }
                if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                    return Err(Error::invalid("split probabilities must be nonnegative"));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "split probabilities sum to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Hyperparameters of the sparse-Dirichlet split-variable prior.
#[derive(Debug, Clone, PartialEq)]
pub struct DartParams {
    /// Current Dirichlet concentration; the vector parameter is `theta/P`.
    pub theta: f64,
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    /// Whether `theta` is resampled each iteration from its grid posterior.
    pub theta_random: bool,
}

impl DartParams {
    /// Sparse defaults: `rho = P`, `a = 0.5`, `b = 1`, random `theta`
    /// initialized at `rho`.
    pub fn sparse_defaults(n_vars: usize) -> Self {
        let rho = n_vars as f64;
        DartParams { theta: rho, rho, a: 0.5, b: 1.0, theta_random: true }
    }

    fn validate(&self) -> Result<()> {
        if self.theta <= 0.0 || self.rho <= 0.0 || self.a <= 0.0 || self.b <= 0.0 {
            return Err(Error::invalid("DART parameters must be positive"));
        }
        Ok(())
    }
}

/// Prior over tree structure and leaf/noise scales.
#[derive(Debug, Clone)]
pub struct TreePrior {
    /// Depth penalty base: root grows with probability `alpha`.
    pub alpha: f64,
    /// Depth penalty exponent.
    pub gamma: f64,
    /// Error-variance prior degrees of freedom (continuous outcomes only).
    pub nu: f64,
    /// Error-variance prior scale (continuous outcomes only).
    pub lambda: f64,
    pub split_probs: SplitProbs,
    pub dart: Option<DartParams>,
}

impl TreePrior {
    pub fn new(
        alpha: f64,
        gamma: f64,
        nu: f64,
        lambda: f64,
        split_probs: SplitProbs,
        dart: Option<DartParams>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha must be in (0,1)"));
        }
        if gamma < 0.0 {
            return Err(Error::invalid("gamma must be >= 0"));
        }
        if nu <= 0.0 || lambda <= 0.0 {
            return Err(Error::invalid("nu and lambda must be > 0"));
        }
        split_probs.validate()?;
        if let Some(d) = &dart {
            d.validate()?;
        }
        Ok(TreePrior { alpha, gamma, nu, lambda, split_probs, dart })
    }

    /// Defaults for probit outcomes (`lambda` is unused there).
    pub fn probit_defaults(n_vars: usize) -> Self {
        TreePrior {
            alpha: 0.95,
            gamma: 2.0,
            nu: 3.0,
            lambda: 1.0,
            split_probs: SplitProbs::Uniform { n_vars },
            dart: None,
        }
    }

    /// Defaults for continuous outcomes with `lambda` calibrated so that the
    /// prior puts 90% of its mass on error variances below the marginal data
    /// variance `data_sd^2`.
    pub fn regression_defaults(n_vars: usize, data_sd: f64) -> Self {
        let nu = 3.0;
        let lambda = chi_squared_quantile(0.1, nu) * data_sd * data_sd / nu;
        TreePrior {
            alpha: 0.95,
            gamma: 2.0,
            nu,
            lambda,
            split_probs: SplitProbs::Uniform { n_vars },
            dart: None,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.split_probs.n_vars()
    }
}

/// Draw a split-variable index from the prior's current distribution.
pub fn sample_split_variable<R: Rng + ?Sized>(prior: &TreePrior, rng: &mut R) -> usize {
    match &prior.split_probs {
        SplitProbs::Uniform { n_vars } => rng.random_range(0..*n_vars),
        SplitProbs::Weights(w) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (j, &p) in w.iter().enumerate() {
                acc += p;
                if u < acc {
                    return j;
                }
            }
            w.len() - 1
        }
    }
}

/// Number of branch rules in the current ensemble using each variable; the
/// sufficient statistic for the DART split-probability update.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCounts {
    pub counts: Vec<u32>,
}

impl SplitCounts {
    pub fn from_trees(trees: &[Tree], n_vars: usize) -> Self {
        let mut counts = vec![0u32; n_vars];
        for t in trees {
            t.accumulate_split_counts(&mut counts);
        }
        SplitCounts { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Per-variable cutpoint candidates, computed once from training data.
///
/// Continuous variables use a quantile-spaced grid; variables with exactly two
/// observed values get the single midpoint cutpoint (0.5 for 0/1 coding);
/// constant variables are unsplittable.
#[derive(Debug, Clone)]
pub struct CutpointGrid {
    cuts: Vec<Vec<f64>>,
}

/// Default number of quantile-based cutpoints per continuous variable.
pub const DEFAULT_CUTPOINTS: usize = 100;

impl CutpointGrid {
    pub fn from_data(x: &Matrix, max_cuts: usize) -> Self {
        let mut cuts = Vec::with_capacity(x.n_cols());
        for j in 0..x.n_cols() {
            let mut col = x.column(j);
            col.sort_by(|a, b| a.total_cmp(b));
            let mut distinct = col.clone();
            distinct.dedup();
            let var_cuts = match distinct.len() {
                0 | 1 => Vec::new(),
                2 => vec![0.5 * (distinct[0] + distinct[1])],
                _ => {
                    let mut grid = Vec::with_capacity(max_cuts);
                    for k in 1..=max_cuts {
                        let q = k as f64 / (max_cuts + 1) as f64;
                        grid.push(crate::math::quantile(&col, q));
                    }
                    grid.sort_by(|a, b| a.total_cmp(b));
                    grid.dedup();
                    let lo = distinct[0];
                    grid.retain(|&c| c > lo);
                    grid
                }
            };
            cuts.push(var_cuts);
        }
        CutpointGrid { cuts }
    }

    pub fn n_vars(&self) -> usize {
        self.cuts.len()
    }

    pub fn cuts(&self, var: usize) -> &[f64] {
        &self.cuts[var]
    }
}

/// A fixed-size additive collection of trees: the sampler state and the unit
/// stored per posterior draw.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ensemble {
    pub trees: Vec<Tree>,
    /// Additive offset; `ybar` for continuous outcomes, `probit(ybar)` for
    /// binary ones.
    pub mu0: f64,
    /// Leaf prior scale: leaves are `N(0, tau^2/m)`.
    pub tau: f64,
    /// Residual standard deviation; fixed at 1 in probit mode.
    pub sigma: f64,
}

impl Ensemble {
    /// All-root-only ensemble with zero-valued leaves.
    pub fn root_only(m: usize, mu0: f64, tau: f64, sigma: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("ensemble needs at least one tree"));
        }
        if tau <= 0.0 || sigma <= 0.0 {
            return Err(Error::invalid("tau and sigma must be > 0"));
        }
        Ok(Ensemble { trees: vec![Tree::root_leaf(0.0); m], mu0, tau, sigma })
    }

    pub fn m(&self) -> usize {
        self.trees.len()
    }

    /// `mu0 + sum_j g_j(x)`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.mu0 + self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn max_var_index(&self) -> Option<usize> {
        self.trees.iter().filter_map(|t| t.max_var_index()).max()
    }

    pub fn split_counts(&self, n_vars: usize) -> SplitCounts {
        SplitCounts::from_trees(&self.trees, n_vars)
    }
}

/// Leaf prior scale `tau` for continuous outcomes rescaled to `[-0.5, 0.5]`.
pub fn leaf_scale_continuous(kappa: f64) -> f64 {
    0.5 / kappa
}

/// Leaf prior scale `tau` for probit outcomes: 0.95 prior mass on
/// `f(x) in (-3, 3)` at the default `kappa = 2`.
pub fn leaf_scale_probit(kappa: f64) -> f64 {
    3.0 / kappa
}

/// Dimension-checked single-tree evaluation.
pub fn tree_traverse(tree: &Tree, x: &[f64]) -> Result<f64> {
    if let Some(max_var) = tree.max_var_index() {
        if x.len() <= max_var {
            return Err(Error::invalid(format!(
                "input has {} entries but the tree splits on variable {}",
                x.len(),
                max_var
            )));
        }
    }
    Ok(tree.eval(x))
}

/// Dimension-checked ensemble evaluation.
pub fn ensemble_eval(ens: &Ensemble, x: &[f64]) -> Result<f64> {
    if let Some(max_var) = ens.max_var_index() {
        if x.len() <= max_var {
            return Err(Error::invalid(format!(
                "input has {} entries but the ensemble splits on variable {}",
                x.len(),
                max_var
            )));
        }
    }
    Ok(ens.eval(x))
}

#[cfg(test)]
mod tests {
    use super::tree::fixtures::{example_tree_center, example_tree_left};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grow_prob_formula() {
        assert_eq!(grow_prob(0, 0.95, 2.0), 0.95);
        assert!((grow_prob(1, 0.95, 2.0) - 0.2375).abs() < 1e-15);
        assert!((grow_prob(3, 0.95, 2.0) - 0.059375).abs() < 1e-15);
    }

    #[test]
    fn traverse_examples() {
        let left = example_tree_left();
        assert_eq!(tree_traverse(&left, &[5.0, 3.0]).unwrap(), 20.0);
        assert_eq!(tree_traverse(&Tree::root_leaf(0.0), &[]).unwrap(), 0.0);
        let center = example_tree_center();
        assert_eq!(tree_traverse(&center, &[5.0, 3.0]).unwrap(), 60.0);
        // Dimension mismatch is an input error.
        assert!(tree_traverse(&left, &[1.0]).is_err());
    }

    #[test]
    fn ensemble_eval_sums_trees() {
        let ens = Ensemble {
            trees: vec![example_tree_left(), example_tree_center()],
            mu0: 0.0,
            tau: 1.0,
            sigma: 1.0,
        };
        assert_eq!(ensemble_eval(&ens, &[5.0, 3.0]).unwrap(), 80.0);
        assert_eq!(ensemble_eval(&ens, &[0.5, 0.3]).unwrap(), 30.0);

        let flat = Ensemble::root_only(2, 1.5, 1.0, 1.0).unwrap();
        assert_eq!(ensemble_eval(&flat, &[9.0]).unwrap(), 1.5);
    }

    #[test]
    fn two_tree_sum_reproduces_refined_partition() {
        let ens = Ensemble {
            trees: vec![example_tree_left(), example_tree_center()],
            mu0: 0.0,
            tau: 1.0,
            sigma: 1.0,
        };
        // Representative points of the six refined regions and their values.
        let cases = [
            ([0.5, 0.5], 30.0),
            ([2.0, 0.5], 50.0),
            ([5.0, 0.5], 60.0),
            ([0.5, 3.0], 70.0),
            ([5.0, 3.0], 80.0),
            ([5.0, 5.0], 90.0),
        ];
        for (x, want) in cases {
            assert_eq!(ens.eval(&x), want, "at {x:?}");
        }
        // Any input routes to exactly one leaf in each tree.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x = [rng.random::<f64>() * 8.0, rng.random::<f64>() * 8.0];
            let v = ens.eval(&x);
            assert!([30.0, 50.0, 60.0, 70.0, 80.0, 90.0].contains(&v));
        }
    }

    #[test]
    fn split_variable_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let uniform_one =
            TreePrior::new(0.95, 2.0, 3.0, 1.0, SplitProbs::Uniform { n_vars: 1 }, None).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_split_variable(&uniform_one, &mut rng), 0);
        }
        let degenerate = TreePrior::new(
            0.95,
            2.0,
            3.0,
            1.0,
            SplitProbs::Weights(vec![1.0, 0.0, 0.0]),
            None,
        )
        .unwrap();
        for _ in 0..100 {
            assert_eq!(sample_split_variable(&degenerate, &mut rng), 0);
        }
        let half = TreePrior::new(0.95, 2.0, 3.0, 1.0, SplitProbs::Weights(vec![0.5, 0.5]), None)
            .unwrap();
        let n = 100_000;
        let zeros = (0..n).filter(|_| sample_split_variable(&half, &mut rng) == 0).count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn split_probs_validation() {
        assert!(SplitProbs::Weights(vec![0.5, 0.5]).validate().is_ok());
        assert!(SplitProbs::Weights(vec![0.5, 0.6]).validate().is_err());
        assert!(SplitProbs::Weights(vec![-0.1, 1.1]).validate().is_err());
    }

    #[test]
    fn cutpoint_grid_shapes() {
        // Binary column gets the midpoint cut, constant column none.
        let rows: Vec<Vec<f64>> =
            (0..50).map(|i| vec![i as f64, (i % 2) as f64, 7.0]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let grid = CutpointGrid::from_data(&x, 10);
        assert_eq!(grid.cuts(1), &[0.5]);
        assert!(grid.cuts(2).is_empty());
        let c = grid.cuts(0);
        assert!(!c.is_empty() && c.len() <= 10);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.iter().all(|&v| v > 0.0 && v <= 49.0));
    }

    #[test]
    fn regression_lambda_calibration() {
        // Prior P(sigma^2 < data variance) should be 0.90.
        let prior = TreePrior::regression_defaults(3, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let below = (0..n)
            .filter(|_| {
                let s = sigma_draw(&[], prior.nu, prior.lambda, &mut rng);
                s * s < 4.0
            })
            .count();
        let frac = below as f64 / n as f64;
        assert!((frac - 0.9).abs() < 0.01, "fraction below: {frac}");
    }
}
