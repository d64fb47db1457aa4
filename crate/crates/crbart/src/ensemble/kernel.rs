//! Markov-chain transition kernel for a single tree: GROW/PRUNE
//! Metropolis-Hastings with leaf values analytically integrated out under the
//! conjugate normal leaf prior, plus the conditional leaf and error-variance
//! draws.

use super::tree::{Node, Tree};
use super::{grow_prob, sample_split_variable, CutpointGrid, TreePrior};
use crate::data::Matrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Non-cancelling part of a leaf's log marginal likelihood given the count
/// and sum of its residuals: the `(2*pi*sigma^2)^{-n/2} exp(-sum r^2/2s^2)`
/// factors are shared between numerator and denominator of any grow/prune
/// ratio and are dropped here.
#[inline]
fn leaf_log_marginal_core(n: f64, sum: f64, sigma2: f64, sigma_mu2: f64) -> f64 {
    let denom = sigma2 + n * sigma_mu2;
    0.5 * (sigma2 / denom).ln() + sigma_mu2 * sum * sum / (2.0 * sigma2 * denom)
}

/// Full log marginal likelihood of one leaf's residuals with the leaf value
/// integrated out: `int prod_i N(r_i; mu, sigma^2) N(mu; 0, sigma_mu2) dmu`.
pub fn leaf_marginal_loglik(resid: &[f64], sigma: f64, sigma_mu2: f64) -> f64 {
    let n = resid.len() as f64;
    let sigma2 = sigma * sigma;
    let sum: f64 = resid.iter().sum();
    let ss: f64 = resid.iter().map(|r| r * r).sum();
    -0.5 * n * (2.0 * std::f64::consts::PI * sigma2).ln() - ss / (2.0 * sigma2)
        + leaf_log_marginal_core(n, sum, sigma2, sigma_mu2)
}

/// Draw a leaf value from its conjugate posterior given the residuals routed
/// to it. With no residuals this falls back to the `N(0, tau^2/m)` prior.
pub fn leaf_posterior_draw<R: Rng + ?Sized>(
    leaf_resid: &[f64],
    sigma: f64,
    tau: f64,
    m: usize,
    rng: &mut R,
) -> f64 {
    let sum: f64 = leaf_resid.iter().sum();
    draw_leaf_from_stats(leaf_resid.len() as f64, sum, sigma * sigma, tau * tau / m as f64, rng)
}

#[inline]
fn draw_leaf_from_stats<R: Rng + ?Sized>(
    n: f64,
    sum: f64,
    sigma2: f64,
    sigma_mu2: f64,
    rng: &mut R,
) -> f64 {
    let precision = n / sigma2 + 1.0 / sigma_mu2;
    let mean = (sum / sigma2) / precision;
    let z: f64 = rng.sample(StandardNormal);
    mean + z / precision.sqrt()
}

/// Draw the error standard deviation from its scaled inverse chi-square
/// posterior. Continuous-outcome models only; probit fixes `sigma = 1`.
pub fn sigma_draw<R: Rng + ?Sized>(resid: &[f64], nu: f64, lambda: f64, rng: &mut R) -> f64 {
    let n = resid.len() as f64;
    let ss: f64 = resid.iter().map(|r| r * r).sum();
    let df = nu + n;
    let chi2 = Gamma::new(df / 2.0, 2.0).unwrap().sample(rng);
    ((nu * lambda + ss) / chi2).sqrt()
}

/// Outcome of one transition-kernel step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveOutcome {
    Grown,
    Pruned,
    Rejected,
}

impl MoveOutcome {
    pub fn changed(self) -> bool {
        !matches!(self, MoveOutcome::Rejected)
    }
}

/// One GROW/PRUNE Metropolis-Hastings step on `tree`, with moves proposed
/// with probability 1/2 each (GROW forced at a root-only tree). Split rules
/// are proposed from the prior restricted to cutpoints that leave both
/// children nonempty, so the rule terms cancel in the acceptance ratio and
/// proposals that would create an empty leaf are never made; a node with no
/// valid cutpoint makes the move a rejection.
///
/// `assign` must hold the leaf index of every row under the current tree.
/// Returns the move outcome; the tree is mutated only on acceptance.
pub(crate) fn mh_step<R: Rng + ?Sized>(
    tree: &mut Tree,
    x: &Matrix,
    cuts: &CutpointGrid,
    assign: &[u32],
    resid: &[f64],
    prior: &TreePrior,
    sigma2: f64,
    sigma_mu2: f64,
    rng: &mut R,
) -> MoveOutcome {
    let root_only = tree.is_root_only();
    let do_grow = root_only || rng.random::<f64>() < 0.5;
    if do_grow {
        grow_move(tree, x, cuts, assign, resid, prior, sigma2, sigma_mu2, root_only, rng)
    } else {
        prune_move(tree, assign, resid, prior, sigma2, sigma_mu2, rng)
    }
}

#[allow(clippy::too_many_arguments)]
fn grow_move<R: Rng + ?Sized>(
    tree: &mut Tree,
    x: &Matrix,
    cuts: &CutpointGrid,
    assign: &[u32],
    resid: &[f64],
    prior: &TreePrior,
    sigma2: f64,
    sigma_mu2: f64,
    forced: bool,
    rng: &mut R,
) -> MoveOutcome {
    let leaves = tree.leaves();
    let leaf = leaves[rng.random_range(0..leaves.len())];

    // Stats of the rows in the chosen leaf.
    let mut n = 0.0;
    let mut sum = 0.0;
    for (i, &a) in assign.iter().enumerate() {
        if a == leaf {
            n += 1.0;
            sum += resid[i];
        }
    }
    if n < 2.0 {
        return MoveOutcome::Rejected;
    }

    let var = sample_split_variable(prior, rng);
    let var_cuts = cuts.cuts(var);
    if var_cuts.is_empty() {
        return MoveOutcome::Rejected;
    }

    // Valid cutpoints lie strictly inside the node's observed range for the
    // chosen variable: both children keep at least one row.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &a) in assign.iter().enumerate() {
        if a == leaf {
            let v = x.get(i, var);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let start = var_cuts.partition_point(|&c| c <= lo);
    let end = var_cuts.partition_point(|&c| c <= hi);
    if start >= end {
        return MoveOutcome::Rejected;
    }
    let cut = var_cuts[start + rng.random_range(0..end - start)];

    let mut n_left = 0.0;
    let mut sum_left = 0.0;
    for (i, &a) in assign.iter().enumerate() {
        if a == leaf && x.get(i, var) < cut {
            n_left += 1.0;
            sum_left += resid[i];
        }
    }
    let n_right = n - n_left;
    let sum_right = sum - sum_left;
    debug_assert!(n_left > 0.0 && n_right > 0.0);

    let log_ml = leaf_log_marginal_core(n_left, sum_left, sigma2, sigma_mu2)
        + leaf_log_marginal_core(n_right, sum_right, sigma2, sigma_mu2)
        - leaf_log_marginal_core(n, sum, sigma2, sigma_mu2);

    let depth = tree.depth_of(leaf);
    let pg = grow_prob(depth, prior.alpha, prior.gamma);
    let pg_child = grow_prob(depth + 1, prior.alpha, prior.gamma);
    let log_prior = pg.ln() + 2.0 * (1.0 - pg_child).ln() - (1.0 - pg).ln();

    // Transition ratio: reverse move is a PRUNE of the new nog among the
    // post-move nog nodes; forward picked a leaf uniformly.
    let nogs_after = {
        let parent_was_nog = tree
            .parent_of(leaf)
            .map(|p| {
                let ns = tree.nodes();
                match ns[p as usize] {
                    Node::Branch { left, right, .. } => {
                        matches!(ns[left as usize], Node::Leaf { .. })
                            && matches!(ns[right as usize], Node::Leaf { .. })
                    }
                    Node::Leaf { .. } => false,
                }
            })
            .unwrap_or(false);
        tree.nog_nodes().len() + 1 - usize::from(parent_was_nog)
    };
    let p_grow_here: f64 = if forced { 1.0 } else { 0.5 };
    let log_transition = (0.5f64).ln() - (nogs_after as f64).ln() - p_grow_here.ln()
        + (leaves.len() as f64).ln();

    let log_accept = log_ml + log_prior + log_transition;
    if rng.random::<f64>().ln() < log_accept {
        tree.grow(leaf, var as u32, cut);
        MoveOutcome::Grown
    } else {
        MoveOutcome::Rejected
    }
}

fn prune_move<R: Rng + ?Sized>(
    tree: &mut Tree,
    assign: &[u32],
    resid: &[f64],
    prior: &TreePrior,
    sigma2: f64,
    sigma_mu2: f64,
    rng: &mut R,
) -> MoveOutcome {
    let nogs = tree.nog_nodes();
    if nogs.is_empty() {
        return MoveOutcome::Rejected;
    }
    let nog = nogs[rng.random_range(0..nogs.len())];
    let (left, right) = match tree.nodes()[nog as usize] {
        Node::Branch { left, right, .. } => (left, right),
        Node::Leaf { .. } => unreachable!("nog nodes are branches"),
    };

    let mut n_left = 0.0;
    let mut sum_left = 0.0;
    let mut n_right = 0.0;
    let mut sum_right = 0.0;
    for (i, &a) in assign.iter().enumerate() {
        if a == left {
            n_left += 1.0;
            sum_left += resid[i];
        } else if a == right {
            n_right += 1.0;
            sum_right += resid[i];
        }
    }
    let n = n_left + n_right;
    let sum = sum_left + sum_right;

    let log_ml = leaf_log_marginal_core(n, sum, sigma2, sigma_mu2)
        - leaf_log_marginal_core(n_left, sum_left, sigma2, sigma_mu2)
        - leaf_log_marginal_core(n_right, sum_right, sigma2, sigma_mu2);

    let depth = tree.depth_of(nog);
    let pg = grow_prob(depth, prior.alpha, prior.gamma);
    let pg_child = grow_prob(depth + 1, prior.alpha, prior.gamma);
    let log_prior = (1.0 - pg).ln() - pg.ln() - 2.0 * (1.0 - pg_child).ln();

    // Reverse move is a GROW of the collapsed leaf; forced when pruning to a
    // root-only tree.
    let leaves_after = tree.n_leaves() - 1;
    let p_grow_back: f64 = if leaves_after == 1 { 1.0 } else { 0.5 };
    let log_transition = p_grow_back.ln() - (leaves_after as f64).ln() - (0.5f64).ln()
        + (nogs.len() as f64).ln();

    let log_accept = log_ml + log_prior + log_transition;
    if rng.random::<f64>().ln() < log_accept {
        tree.prune(nog, 0.0);
        MoveOutcome::Pruned
    } else {
        MoveOutcome::Rejected
    }
}

/// Spec-level transition step: returns the accepted tree or a copy of the
/// original. Leaf values of structurally new nodes are zero until the next
/// leaf update.
#[allow(clippy::too_many_arguments)]
pub fn propose_and_accept<R: Rng + ?Sized>(
    tree: &Tree,
    resid: &[f64],
    x: &Matrix,
    cuts: &CutpointGrid,
    prior: &TreePrior,
    sigma: f64,
    tau: f64,
    m: usize,
    rng: &mut R,
) -> Tree {
    assert_eq!(resid.len(), x.n_rows(), "residuals must align with data rows");
    let mut assign = Vec::new();
    tree.assign_rows(x, &mut assign);
    let mut out = tree.clone();
    mh_step(&mut out, x, cuts, &assign, resid, prior, sigma * sigma, tau * tau / m as f64, rng);
    out
}

/// Draw all leaf values of `tree` from their conjugate conditionals given the
/// residuals. `assign` must match the current structure; leaves with no rows
/// draw from the prior.
pub fn draw_leaf_values<R: Rng + ?Sized>(
    tree: &mut Tree,
    assign: &[u32],
    resid: &[f64],
    sigma2: f64,
    sigma_mu2: f64,
    rng: &mut R,
) {
    let n_nodes = tree.nodes().len();
    let mut counts = vec![0.0f64; n_nodes];
    let mut sums = vec![0.0f64; n_nodes];
    for (i, &a) in assign.iter().enumerate() {
        counts[a as usize] += 1.0;
        sums[a as usize] += resid[i];
    }
    for leaf in tree.leaves() {
        let value =
            draw_leaf_from_stats(counts[leaf as usize], sums[leaf as usize], sigma2, sigma_mu2, rng);
        tree.set_leaf_value(leaf, value);
    }
}

/// Sample a tree directly from the structural prior (no data): nodes grow
/// with probability `alpha (1+d)^{-gamma}`, split variables follow the
/// prior's current distribution, cutpoints are uniform over the variable's
/// grid, and leaves are `N(0, tau^2/m)`.
pub fn sample_tree_from_prior<R: Rng + ?Sized>(
    prior: &TreePrior,
    cuts: &CutpointGrid,
    tau: f64,
    m: usize,
    rng: &mut R,
) -> Tree {
    let sigma_mu = tau / (m as f64).sqrt();
    let mut tree = Tree::root_leaf(0.0);
    let mut pending = vec![0u32];
    while let Some(node) = pending.pop() {
        let depth = tree.depth_of(node);
        if rng.random::<f64>() < grow_prob(depth, prior.alpha, prior.gamma) {
            let var = sample_split_variable(prior, rng);
            let var_cuts = cuts.cuts(var);
            if var_cuts.is_empty() {
                continue;
            }
            let cut = var_cuts[rng.random_range(0..var_cuts.len())];
            tree.grow(node, var as u32, cut);
            if let Node::Branch { left, right, .. } = tree.nodes()[node as usize] {
                pending.push(left);
                pending.push(right);
            }
        }
    }
    for leaf in tree.leaves() {
        let v: f64 = rng.sample::<f64, _>(StandardNormal) * sigma_mu;
        tree.set_leaf_value(leaf, v);
    }
    tree
}
