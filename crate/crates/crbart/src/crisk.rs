//! Competing-risks models built from two probit BART fits, and the posterior
//! functionals derived from them: event-free survival, cause-specific
//! cumulative incidence, conditional quantiles, partial dependence, subgroup
//! and individual contrasts, and variable-selection summaries.

use crate::data::Matrix;
use crate::discrete::{
    build_time_grid, expand_crisk_m1, expand_crisk_m2, Cause, CompetingRisksRecord, TimeGrid,
};
use crate::math::{credible_interval, derive_seed, mean};
use crate::probit::{fit_probit_any_class, McmcConfig, ProbitFit};
use crate::{Error, Result};

/// Which functional of the fitted model to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Survival,
    Cif(Cause),
}

/// Posterior step-function draws of one functional on the time grid.
#[derive(Debug, Clone)]
pub struct CifCurve {
    pub times: Vec<f64>,
    /// `(draws x J)` values.
    pub draws: Matrix,
}

/// Pointwise posterior mean and equal-tailed credible band of a curve.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

impl CifCurve {
    pub fn n_draws(&self) -> usize {
        self.draws.n_rows()
    }

    /// Step-function value of one draw at an arbitrary time (snapped down;
    /// `before_grid` is the value left of the first grid point: 1 for
    /// survival curves, 0 for CIFs).
    pub fn value_at(&self, draw: usize, t: f64, before_grid: f64) -> f64 {
        match self.times.partition_point(|&g| g <= t).checked_sub(1) {
            Some(j) => self.draws.get(draw, j),
            None => before_grid,
        }
    }

    /// Per-draw values at an arbitrary time.
    pub fn draws_at(&self, t: f64, before_grid: f64) -> Vec<f64> {
        (0..self.n_draws()).map(|d| self.value_at(d, t, before_grid)).collect()
    }

    pub fn summarize(&self, level: f64) -> PosteriorSummary {
        let j_count = self.times.len();
        let mut means = Vec::with_capacity(j_count);
        let mut lower = Vec::with_capacity(j_count);
        let mut upper = Vec::with_capacity(j_count);
        for j in 0..j_count {
            let col = self.draws.column(j);
            means.push(mean(&col));
            let (lo, hi) = credible_interval(&col, level);
            lower.push(lo);
            upper.push(hi);
        }
        PosteriorSummary { times: self.times.clone(), mean: means, lower, upper, level }
    }

    /// Posterior-mean curve.
    pub fn mean_curve(&self) -> Vec<f64> {
        (0..self.times.len()).map(|j| mean(&self.draws.column(j))).collect()
    }
}

/// Per-draw survival and cumulative incidence curves at one covariate value.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub times: Vec<f64>,
    pub survival: Matrix,
    pub cif1: Matrix,
    pub cif2: Matrix,
}

impl CurveSet {
    fn zeros(times: Vec<f64>, n_draws: usize) -> Self {
        let j = times.len();
        CurveSet {
            times,
            survival: Matrix::zeros(n_draws, j),
            cif1: Matrix::zeros(n_draws, j),
            cif2: Matrix::zeros(n_draws, j),
        }
    }

    fn scale(&mut self, factor: f64) {
        for m in [&mut self.survival, &mut self.cif1, &mut self.cif2] {
            for i in 0..m.n_rows() {
                for j in 0..m.n_cols() {
                    m.set(i, j, m.get(i, j) * factor);
                }
            }
        }
    }

    fn add(&mut self, other: &CurveSet) {
        for (m, o) in [
            (&mut self.survival, &other.survival),
            (&mut self.cif1, &other.cif1),
            (&mut self.cif2, &other.cif2),
        ] {
            for i in 0..m.n_rows() {
                for j in 0..m.n_cols() {
                    m.set(i, j, m.get(i, j) + o.get(i, j));
                }
            }
        }
    }

    pub fn functional(&self, f: Functional) -> CifCurve {
        let draws = match f {
            Functional::Survival => self.survival.clone(),
            Functional::Cif(Cause::Cause1) => self.cif1.clone(),
            Functional::Cif(Cause::Cause2) => self.cif2.clone(),
        };
        CifCurve { times: self.times.clone(), draws }
    }
}

/// Common surface of the two competing-risks formulations: everything
/// downstream (functionals, partial dependence, benchmarks) works through
/// this trait.
pub trait CompetingRisksFit: Sync {
    fn grid(&self) -> &TimeGrid;
    fn n_draws(&self) -> usize;
    /// Covariate dimension excluding the time coordinate.
    fn n_covariates(&self) -> usize;
    /// Survival and CIF draws at one covariate vector.
    fn curves(&self, x: &[f64]) -> Result<CurveSet>;
    /// The underlying probit fits, labeled.
    fn sub_fits(&self) -> Vec<(&'static str, &ProbitFit)>;
}

/// How Method 1 accumulates cause-specific incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M1CifIncrement {
    /// `S(t_(l-1)) * p_y(t_(l)) * psi(t_(l))`: the cause share of the
    /// probability of an event in the interval. Satisfies `F1 + F2 + S = 1`.
    HazardWeighted,
    /// `S(t_(l-1)) * psi(t_(l))`: omits the any-event probability factor.
    /// Does not satisfy the additivity identity; kept for side-by-side
    /// comparison.
    Unweighted,
}

/// Method 1: an any-event discrete hazard fit plus a cause-given-event fit.
#[derive(Debug, Clone)]
pub struct CriskFitM1 {
    pub fit_any: ProbitFit,
    pub fit_cause: ProbitFit,
    pub grid: TimeGrid,
}

/// Method 2: a cause-1 hazard fit plus a conditional cause-2 hazard fit.
#[derive(Debug, Clone)]
pub struct CriskFitM2 {
    pub fit_cause1: ProbitFit,
    pub fit_cause2: ProbitFit,
    pub grid: TimeGrid,
}

fn check_pair(a: &ProbitFit, b: &ProbitFit) -> Result<()> {
    if a.n_vars != b.n_vars {
        return Err(Error::invalid("sub-fits disagree on covariate dimension"));
    }
    if a.n_draws() != b.n_draws() {
        return Err(Error::invalid("sub-fits disagree on draw count"));
    }
    Ok(())
}

/// Grid-time design matrix `[t_(j), x...]` for one covariate vector.
fn grid_design(grid: &TimeGrid, x: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(0, x.len() + 1);
    let mut row = vec![0.0; x.len() + 1];
    row[1..].copy_from_slice(x);
    for &t in grid.times() {
        row[0] = t;
        m.push_row(&row);
    }
    m
}

fn check_x(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::invalid(format!(
            "covariate vector has {} entries, fit used {expected}",
            x.len()
        )));
    }
    Ok(())
}

impl CriskFitM1 {
    pub fn new(fit_any: ProbitFit, fit_cause: ProbitFit, grid: TimeGrid) -> Result<Self> {
        check_pair(&fit_any, &fit_cause)?;
        Ok(CriskFitM1 { fit_any, fit_cause, grid })
    }

    /// Curves under a chosen CIF increment.
    pub fn curves_with(&self, x: &[f64], increment: M1CifIncrement) -> Result<CurveSet> {
        check_x(x, self.n_covariates())?;
        let design = grid_design(&self.grid, x);
        let p_any = self.fit_any.predict_prob(&design)?;
        let psi = self.fit_cause.predict_prob(&design)?;
        let j_count = self.grid.len();
        let n_draws = p_any.n_rows();
        let mut out = CurveSet::zeros(self.grid.times().to_vec(), n_draws);
        for d in 0..n_draws {
            let mut s_prev = 1.0;
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            for j in 0..j_count {
                let p = p_any.get(d, j);
                let share = psi.get(d, j);
                let (inc1, inc2) = match increment {
                    M1CifIncrement::HazardWeighted => {
                        (s_prev * p * share, s_prev * p * (1.0 - share))
                    }
                    M1CifIncrement::Unweighted => (s_prev * share, s_prev * (1.0 - share)),
                };
                f1 += inc1;
                f2 += inc2;
                s_prev *= 1.0 - p;
                out.survival.set(d, j, s_prev);
                out.cif1.set(d, j, f1);
                out.cif2.set(d, j, f2);
            }
        }
        Ok(out)
    }
}

impl CompetingRisksFit for CriskFitM1 {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn n_draws(&self) -> usize {
        self.fit_any.n_draws()
    }

    fn n_covariates(&self) -> usize {
        self.fit_any.n_vars - 1
    }

    fn curves(&self, x: &[f64]) -> Result<CurveSet> {
        self.curves_with(x, M1CifIncrement::HazardWeighted)
    }

    fn sub_fits(&self) -> Vec<(&'static str, &ProbitFit)> {
        vec![("any_event", &self.fit_any), ("cause_given_event", &self.fit_cause)]
    }
}

impl CompetingRisksFit for CriskFitM2 {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn n_draws(&self) -> usize {
        self.fit_cause1.n_draws()
    }

    fn n_covariates(&self) -> usize {
        self.fit_cause1.n_vars - 1
    }

    fn curves(&self, x: &[f64]) -> Result<CurveSet> {
        check_x(x, self.n_covariates())?;
        let design = grid_design(&self.grid, x);
        let p1 = self.fit_cause1.predict_prob(&design)?;
        let p2 = self.fit_cause2.predict_prob(&design)?;
        let j_count = self.grid.len();
        let n_draws = p1.n_rows();
        let mut out = CurveSet::zeros(self.grid.times().to_vec(), n_draws);
        for d in 0..n_draws {
            let mut s_prev = 1.0;
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            for j in 0..j_count {
                let q1 = p1.get(d, j);
                let q2 = p2.get(d, j);
                f1 += s_prev * q1;
                f2 += s_prev * (1.0 - q1) * q2;
                s_prev *= (1.0 - q1) * (1.0 - q2);
                out.survival.set(d, j, s_prev);
                out.cif1.set(d, j, f1);
                out.cif2.set(d, j, f2);
            }
        }
        Ok(out)
    }

    fn sub_fits(&self) -> Vec<(&'static str, &ProbitFit)> {
        vec![("cause1_hazard", &self.fit_cause1), ("cause2_hazard", &self.fit_cause2)]
    }
}

impl CriskFitM2 {
    pub fn new(fit_cause1: ProbitFit, fit_cause2: ProbitFit, grid: TimeGrid) -> Result<Self> {
        check_pair(&fit_cause1, &fit_cause2)?;
        Ok(CriskFitM2 { fit_cause1, fit_cause2, grid })
    }
}

/// Fit Method 1 on a cohort: expansions from the discrete-time layer fed into
/// two probit BART fits with aligned draw counts.
pub fn fit_m1(records: &[CompetingRisksRecord], cfg: &McmcConfig) -> Result<CriskFitM1> {
    let grid = build_time_grid(records)?;
    let (any, cause) = expand_crisk_m1(records, &grid)?;
    if cause.is_empty() {
        return Err(Error::degenerate(
            "no events in the cohort: the cause-given-event factor has no data",
        ));
    }
    let mut cfg_any = cfg.clone();
    cfg_any.seed = derive_seed(cfg.seed, 1);
    let mut cfg_cause = cfg.clone();
    cfg_cause.seed = derive_seed(cfg.seed, 2);
    let fit_any = fit_probit_any_class(&any.into_dataset()?, &cfg_any)?;
    let fit_cause = fit_probit_any_class(&cause.into_dataset()?, &cfg_cause)?;
    CriskFitM1::new(fit_any, fit_cause, grid)
}

/// Fit Method 2 on a cohort. Each cause-specific factor needs at least one
/// event of its cause.
pub fn fit_m2(records: &[CompetingRisksRecord], cfg: &McmcConfig) -> Result<CriskFitM2> {
    let grid = build_time_grid(records)?;
    let n_cause1 = records.iter().filter(|r| r.status.cause() == Some(Cause::Cause1)).count();
    let n_cause2 = records.iter().filter(|r| r.status.cause() == Some(Cause::Cause2)).count();
    if n_cause1 == 0 {
        return Err(Error::degenerate(
            "no cause-1 events in the cohort: the cause-1 hazard factor has no signal",
        ));
    }
    if n_cause2 == 0 {
        return Err(Error::degenerate(
            "no cause-2 events in the cohort: the cause-2 hazard factor has no signal",
        ));
    }
    let (c1, c2) = expand_crisk_m2(records, &grid)?;
    let mut cfg1 = cfg.clone();
    cfg1.seed = derive_seed(cfg.seed, 1);
    let mut cfg2 = cfg.clone();
    cfg2.seed = derive_seed(cfg.seed, 2);
    let fit_cause1 = fit_probit_any_class(&c1.into_dataset()?, &cfg1)?;
    let fit_cause2 = fit_probit_any_class(&c2.into_dataset()?, &cfg2)?;
    CriskFitM2::new(fit_cause1, fit_cause2, grid)
}

/// A fitted model of either formulation, as persisted in model artifacts.
#[derive(Debug, Clone)]
pub enum FittedModel {
    M1(CriskFitM1),
    M2(CriskFitM2),
}

impl FittedModel {
    pub fn method_label(&self) -> &'static str {
        match self {
            FittedModel::M1(_) => "m1",
            FittedModel::M2(_) => "m2",
        }
    }
}

impl CompetingRisksFit for FittedModel {
    fn grid(&self) -> &TimeGrid {
        match self {
            FittedModel::M1(f) => f.grid(),
            FittedModel::M2(f) => f.grid(),
        }
    }

    fn n_draws(&self) -> usize {
        match self {
            FittedModel::M1(f) => f.n_draws(),
            FittedModel::M2(f) => f.n_draws(),
        }
    }

    fn n_covariates(&self) -> usize {
        match self {
            FittedModel::M1(f) => f.n_covariates(),
            FittedModel::M2(f) => f.n_covariates(),
        }
    }

    fn curves(&self, x: &[f64]) -> Result<CurveSet> {
        match self {
            FittedModel::M1(f) => f.curves(x),
            FittedModel::M2(f) => f.curves(x),
        }
    }

    fn sub_fits(&self) -> Vec<(&'static str, &ProbitFit)> {
        match self {
            FittedModel::M1(f) => f.sub_fits(),
            FittedModel::M2(f) => f.sub_fits(),
        }
    }
}

/// Event-free survival draws at `x`.
pub fn survival<F: CompetingRisksFit + ?Sized>(fit: &F, x: &[f64]) -> Result<CifCurve> {
    Ok(fit.curves(x)?.functional(Functional::Survival))
}

/// Cumulative incidence draws for one cause at `x`.
pub fn cif<F: CompetingRisksFit + ?Sized>(fit: &F, x: &[f64], cause: Cause) -> Result<CifCurve> {
    Ok(fit.curves(x)?.functional(Functional::Cif(cause)))
}

/// Per-draw conditional quantile `inf { t : F(t) >= tau_q }`; `None` when the
/// draw's curve never reaches `tau_q` ("not reached").
pub fn conditional_quantile(curve: &CifCurve, tau_q: f64) -> Result<Vec<Option<f64>>> {
    if !(tau_q > 0.0 && tau_q < 1.0) {
        return Err(Error::invalid("quantile level must be in (0,1)"));
    }
    Ok((0..curve.n_draws())
        .map(|d| {
            (0..curve.times.len())
                .find(|&j| curve.draws.get(d, j) >= tau_q)
                .map(|j| curve.times[j])
        })
        .collect())
}

/// Fixed-covariate override `(index, value)` pairs defining a subgroup.
pub type SubsetSpec = [(usize, f64)];

fn apply_overrides(base: &[f64], overrides: &SubsetSpec) -> Vec<f64> {
    let mut x = base.to_vec();
    for &(idx, value) in overrides {
        x[idx] = value;
    }
    x
}

fn validate_overrides(overrides: &SubsetSpec, n_covariates: usize) -> Result<()> {
    for &(idx, _) in overrides {
        if idx >= n_covariates {
            return Err(Error::invalid(format!(
                "override index {idx} out of range for {n_covariates} covariates"
            )));
        }
    }
    Ok(())
}

/// Friedman-style partial dependence: the selected functional averaged over
/// the cohort rows with the subset covariates overridden.
pub fn partial_dependence<F: CompetingRisksFit + ?Sized>(
    fit: &F,
    overrides: &SubsetSpec,
    cohort: &Matrix,
    functional: Functional,
) -> Result<CifCurve> {
    validate_overrides(overrides, fit.n_covariates())?;
    if cohort.n_rows() == 0 {
        return Err(Error::invalid("partial dependence needs a nonempty cohort"));
    }
    if cohort.n_cols() != fit.n_covariates() {
        return Err(Error::invalid(format!(
            "cohort has {} covariates, fit used {}",
            cohort.n_cols(),
            fit.n_covariates()
        )));
    }
    let mut acc: Option<CurveSet> = None;
    for i in 0..cohort.n_rows() {
        let x = apply_overrides(cohort.row(i), overrides);
        let c = fit.curves(&x)?;
        match &mut acc {
            None => acc = Some(c),
            Some(a) => a.add(&c),
        }
    }
    let mut total = acc.expect("nonempty cohort");
    total.scale(1.0 / cohort.n_rows() as f64);
    Ok(total.functional(functional))
}

/// Posterior draws of the partial-dependence contrast
/// `PD(t* | a) - PD(t* | b)` for the selected functional, with `t*` snapped
/// down to the grid.
pub fn pd_difference<F: CompetingRisksFit + ?Sized>(
    fit: &F,
    overrides_a: &SubsetSpec,
    overrides_b: &SubsetSpec,
    cohort: &Matrix,
    functional: Functional,
    t_star: f64,
) -> Result<Vec<f64>> {
    let pd_a = partial_dependence(fit, overrides_a, cohort, functional)?;
    let pd_b = partial_dependence(fit, overrides_b, cohort, functional)?;
    let before = match functional {
        Functional::Survival => 1.0,
        Functional::Cif(_) => 0.0,
    };
    let a = pd_a.draws_at(t_star, before);
    let b = pd_b.draws_at(t_star, before);
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}

/// Posterior mean and credible interval of a scalar contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastSummary {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

pub fn summarize_draws(draws: &[f64], level: f64) -> ContrastSummary {
    let (lower, upper) = credible_interval(draws, level);
    ContrastSummary { mean: mean(draws), lower, upper, level }
}

/// Per-subject posterior summaries of the functional contrast between two
/// covariate overrides, without averaging over the cohort.
pub fn individual_differences<F: CompetingRisksFit + ?Sized>(
    fit: &F,
    cohort: &Matrix,
    overrides_a: &SubsetSpec,
    overrides_b: &SubsetSpec,
    functional: Functional,
    t_star: f64,
    level: f64,
) -> Result<Vec<ContrastSummary>> {
    validate_overrides(overrides_a, fit.n_covariates())?;
    validate_overrides(overrides_b, fit.n_covariates())?;
    let before = match functional {
        Functional::Survival => 1.0,
        Functional::Cif(_) => 0.0,
    };
    let mut out = Vec::with_capacity(cohort.n_rows());
    for i in 0..cohort.n_rows() {
        let xa = apply_overrides(cohort.row(i), overrides_a);
        let xb = apply_overrides(cohort.row(i), overrides_b);
        let ca = fit.curves(&xa)?.functional(functional);
        let cb = fit.curves(&xb)?.functional(functional);
        let diffs: Vec<f64> = ca
            .draws_at(t_star, before)
            .iter()
            .zip(cb.draws_at(t_star, before).iter())
            .map(|(a, b)| a - b)
            .collect();
        out.push(summarize_draws(&diffs, level));
    }
    Ok(out)
}

/// Variable-selection summary of one probit fit.
#[derive(Debug, Clone, PartialEq)]
pub struct VarSelSummary {
    /// Mean posterior selection probability per variable: the DART Dirichlet
    /// draw when available, else the variable's share of branch rules.
    pub mean_probability: Vec<f64>,
    /// Fraction of draws in which the variable appears in at least one rule.
    pub used_fraction: Vec<f64>,
}

pub fn varsel_probabilities(fit: &ProbitFit) -> VarSelSummary {
    varsel_from_draws(fit.n_vars, fit.draws.iter())
}

fn varsel_from_draws<'a>(
    n_vars: usize,
    draws: impl Iterator<Item = &'a crate::probit::PosteriorDraw>,
) -> VarSelSummary {
    let mut prob_acc = vec![0.0f64; n_vars];
    let mut used_acc = vec![0.0f64; n_vars];
    let mut n_draws = 0usize;
    for d in draws {
        n_draws += 1;
        match &d.split_probs {
            Some(s) => {
                for (a, &v) in prob_acc.iter_mut().zip(s) {
                    *a += v;
                }
            }
            None => {
                let total: u64 = d.split_counts.iter().map(|&c| c as u64).sum();
                if total == 0 {
                    for a in prob_acc.iter_mut() {
                        *a += 1.0 / n_vars as f64;
                    }
                } else {
                    for (a, &c) in prob_acc.iter_mut().zip(&d.split_counts) {
                        *a += c as f64 / total as f64;
                    }
                }
            }
        }
        for (a, &c) in used_acc.iter_mut().zip(&d.split_counts) {
            if c >= 1 {
                *a += 1.0;
            }
        }
    }
    let nf = n_draws.max(1) as f64;
    VarSelSummary {
        mean_probability: prob_acc.into_iter().map(|v| v / nf).collect(),
        used_fraction: used_acc.into_iter().map(|v| v / nf).collect(),
    }
}

/// Variable-selection summaries per sub-fit and pooled over both.
#[derive(Debug, Clone)]
pub struct CriskVarSel {
    pub per_fit: Vec<(&'static str, VarSelSummary)>,
    pub pooled: VarSelSummary,
}

pub fn varsel<F: CompetingRisksFit + ?Sized>(fit: &F) -> CriskVarSel {
    let subs = fit.sub_fits();
    let n_vars = subs[0].1.n_vars;
    let per_fit: Vec<(&'static str, VarSelSummary)> =
        subs.iter().map(|(name, f)| (*name, varsel_probabilities(f))).collect();
    let pooled = varsel_from_draws(n_vars, subs.iter().flat_map(|(_, f)| f.draws.iter()));
    CriskVarSel { per_fit, pooled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::BinaryDataset;
    use crate::discrete::EventStatus;
    use crate::ensemble::{Ensemble, NestedNode, Tree};
    use crate::math::normal_quantile;
    use crate::probit::PosteriorDraw;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A ProbitFit whose single draw produces the given probabilities on the
    /// given time grid (probability `probs[j]` for grid time `j`, for any x).
    fn fixed_time_fit(grid_times: &[f64], probs: &[f64], n_vars: usize) -> ProbitFit {
        assert_eq!(grid_times.len(), probs.len());
        // Right-leaning comb over the time coordinate: leaf k applies on
        // [t_k, t_{k+1}).
        fn comb(times: &[f64], values: &[f64], k: usize) -> NestedNode {
            if k + 1 == times.len() {
                return NestedNode::Leaf { value: values[k] };
            }
            NestedNode::Branch {
                var: 0,
                cut: times[k + 1],
                left: Box::new(NestedNode::Leaf { value: values[k] }),
                right: Box::new(comb(times, values, k + 1)),
            }
        }
        let values: Vec<f64> = probs.iter().map(|&p| normal_quantile(p)).collect();
        let tree: Tree = if grid_times.len() == 1 {
            Tree::root_leaf(values[0])
        } else {
            comb(grid_times, &values, 0).into()
        };
        let ensemble = Ensemble { trees: vec![tree], mu0: 0.0, tau: 1.5, sigma: 1.0 };
        ProbitFit {
            draws: vec![PosteriorDraw {
                ensemble,
                split_counts: {
                    let mut c = vec![0u32; n_vars];
                    c[0] = grid_times.len().saturating_sub(1) as u32;
                    c
                },
                split_probs: None,
            }],
            mu0: 0.0,
            n_vars,
            config: McmcConfig::default(),
        }
    }

    fn m1_from_probs(times: &[f64], p_any: &[f64], psi: &[f64]) -> CriskFitM1 {
        CriskFitM1::new(
            fixed_time_fit(times, p_any, 2),
            fixed_time_fit(times, psi, 2),
            TimeGrid::new(times.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn m2_from_probs(times: &[f64], p1: &[f64], p2: &[f64]) -> CriskFitM2 {
        CriskFitM2::new(
            fixed_time_fit(times, p1, 2),
            fixed_time_fit(times, p2, 2),
            TimeGrid::new(times.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn survival_product_rule() {
        let fit = m1_from_probs(&[1.0, 2.0], &[0.1, 0.1], &[0.5, 0.5]);
        let s = survival(&fit, &[0.0]).unwrap();
        assert!((s.draws.get(0, 0) - 0.9).abs() < 1e-9);
        assert!((s.draws.get(0, 1) - 0.81).abs() < 1e-9);

        let fit = m1_from_probs(&[1.0, 2.0, 3.0], &[0.2, 0.5, 0.1], &[0.5, 0.5, 0.5]);
        let s = survival(&fit, &[0.0]).unwrap();
        for (j, want) in [0.8, 0.4, 0.36].into_iter().enumerate() {
            assert!((s.draws.get(0, j) - want).abs() < 1e-9);
        }

        // p == 0 (through the probability floor) gives S == 1.
        let flat = m1_from_probs(&[1.0, 2.0], &[1e-300, 1e-300], &[0.5, 0.5]);
        let s = survival(&flat, &[0.0]).unwrap();
        assert_eq!(s.draws.get(0, 1), 1.0);
    }

    #[test]
    fn m1_cif_examples() {
        // p_y = (1) and psi = (1): everything fails from cause 1 at t_(1).
        let all = m1_from_probs(&[1.0], &[1.0 - 1e-13], &[1.0 - 1e-13]);
        let f1 = cif(&all, &[0.0], Cause::Cause1).unwrap();
        assert!((f1.draws.get(0, 0) - 1.0).abs() < 1e-9);

        // Hand-telescoped constants.
        let fit = m1_from_probs(&[1.0, 2.0], &[0.5, 0.5], &[0.5, 0.5]);
        let c = fit.curves(&[0.0]).unwrap();
        for (j, (want1, want_s)) in [(0.25, 0.5), (0.375, 0.25)].into_iter().enumerate() {
            assert!((c.cif1.get(0, j) - want1).abs() < 1e-12);
            assert!((c.cif2.get(0, j) - want1).abs() < 1e-12);
            assert!((c.survival.get(0, j) - want_s).abs() < 1e-12);
            let total = c.cif1.get(0, j) + c.cif2.get(0, j) + c.survival.get(0, j);
            assert!((total - 1.0).abs() < 1e-12);
        }

        // psi == 1: F1 = 1 - S and F2 == 0.
        let skew = m1_from_probs(&[1.0, 2.0], &[0.3, 0.4], &[1.0 - 1e-14, 1.0 - 1e-14]);
        let c = skew.curves(&[0.0]).unwrap();
        for j in 0..2 {
            assert!((c.cif1.get(0, j) - (1.0 - c.survival.get(0, j))).abs() < 1e-9);
            assert!(c.cif2.get(0, j) < 1e-9);
        }
    }

    #[test]
    fn m1_unweighted_increment_drops_hazard_factor() {
        let fit = m1_from_probs(&[1.0, 2.0], &[0.5, 0.5], &[0.5, 0.5]);
        let c = fit.curves_with(&[0.0], M1CifIncrement::Unweighted).unwrap();
        // First step: S(0) * psi = 0.5, not 0.25.
        assert!((c.cif1.get(0, 0) - 0.5).abs() < 1e-12);
        let total = c.cif1.get(0, 1) + c.cif2.get(0, 1) + c.survival.get(0, 1);
        assert!((total - 1.0).abs() > 0.1, "unweighted form is not additive");
    }

    #[test]
    fn m2_cif_examples() {
        let fit = m2_from_probs(&[1.0], &[0.5], &[1e-300]);
        let c = fit.curves(&[0.0]).unwrap();
        assert!((c.cif1.get(0, 0) - 0.5).abs() < 1e-9);
        assert!((c.survival.get(0, 0) - 0.5).abs() < 1e-9);

        let fit = m2_from_probs(&[1.0, 2.0], &[0.1, 0.1], &[0.2, 0.2]);
        let c = fit.curves(&[0.0]).unwrap();
        let wants = [(0.72, 0.1, 0.18), (0.5184, 0.172, 0.3096)];
        for (j, (s, f1, f2)) in wants.into_iter().enumerate() {
            assert!((c.survival.get(0, j) - s).abs() < 1e-8, "S at {j}");
            assert!((c.cif1.get(0, j) - f1).abs() < 1e-8, "F1 at {j}");
            assert!((c.cif2.get(0, j) - f2).abs() < 1e-8, "F2 at {j}");
            let total = c.survival.get(0, j) + c.cif1.get(0, j) + c.cif2.get(0, j);
            assert!((total - 1.0).abs() < 1e-12);
        }

        // p2 == 0 reduces to the single-risk product formulas.
        let reduced = m2_from_probs(&[1.0, 2.0], &[0.2, 0.5], &[1e-300, 1e-300]);
        let c = reduced.curves(&[0.0]).unwrap();
        assert!((c.survival.get(0, 1) - 0.4).abs() < 1e-9);
        assert!((c.cif1.get(0, 1) - 0.6).abs() < 1e-9);
        assert!(c.cif2.get(0, 1) < 1e-12);
    }

    #[test]
    fn quantile_step_search() {
        let curve = CifCurve {
            times: vec![1.0, 2.0, 3.0],
            draws: Matrix::from_rows(&[vec![0.1, 0.3, 0.6]]).unwrap(),
        };
        assert_eq!(conditional_quantile(&curve, 0.5).unwrap(), vec![Some(3.0)]);
        assert_eq!(conditional_quantile(&curve, 0.95).unwrap(), vec![None]);
        // Exactly attained: inf with >= picks the attaining time.
        assert_eq!(conditional_quantile(&curve, 0.3).unwrap(), vec![Some(2.0)]);
        assert!(conditional_quantile(&curve, 0.0).is_err());
    }

    /// A two-draw, two-region fit whose cause-1 hazard depends on covariate
    /// 1 (0 vs 1) through a single split.
    fn two_region_m2() -> CriskFitM2 {
        let tree: Tree = NestedNode::Branch {
            var: 1,
            cut: 0.5,
            left: Box::new(NestedNode::Leaf { value: normal_quantile(0.2) }),
            right: Box::new(NestedNode::Leaf { value: normal_quantile(0.4) }),
        }
        .into();
        let hazard = ProbitFit {
            draws: vec![PosteriorDraw {
                ensemble: Ensemble { trees: vec![tree], mu0: 0.0, tau: 1.5, sigma: 1.0 },
                split_counts: vec![0, 1],
                split_probs: None,
            }],
            mu0: 0.0,
            n_vars: 2,
            config: McmcConfig::default(),
        };
        let flat = fixed_time_fit(&[1.0], &[0.1], 2);
        CriskFitM2::new(hazard, flat, TimeGrid::new(vec![1.0]).unwrap()).unwrap()
    }

    #[test]
    fn partial_dependence_averages_cohort_curves() {
        let fit = two_region_m2();
        // Single row: PD equals the plain functional at the composite value.
        let one = Matrix::from_rows(&[vec![0.0]]).unwrap();
        let pd = partial_dependence(&fit, &[(0, 1.0)], &one, Functional::Cif(Cause::Cause1))
            .unwrap();
        let direct = cif(&fit, &[1.0], Cause::Cause1).unwrap();
        assert!((pd.draws.get(0, 0) - direct.draws.get(0, 0)).abs() < 1e-15);

        // Two rows: PD is the arithmetic mean of the two curves.
        let cohort = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let pd = partial_dependence(&fit, &[], &cohort, Functional::Cif(Cause::Cause1)).unwrap();
        let a = cif(&fit, &[0.0], Cause::Cause1).unwrap();
        let b = cif(&fit, &[1.0], Cause::Cause1).unwrap();
        let want = 0.5 * (a.draws.get(0, 0) + b.draws.get(0, 0));
        assert!((pd.draws.get(0, 0) - want).abs() < 1e-15);

        // Functional constant in the complement: PD equals it exactly.
        let pd0 = partial_dependence(&fit, &[(0, 0.0)], &cohort, Functional::Cif(Cause::Cause1))
            .unwrap();
        assert!((pd0.draws.get(0, 0) - a.draws.get(0, 0)).abs() < 1e-15);

        assert!(partial_dependence(
            &fit,
            &[(5, 1.0)],
            &cohort,
            Functional::Cif(Cause::Cause1)
        )
        .is_err());
    }

    #[test]
    fn pd_difference_contrast() {
        let fit = two_region_m2();
        let cohort = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let same = pd_difference(&fit, &[(0, 1.0)], &[(0, 1.0)], &cohort, Functional::Cif(Cause::Cause1), 1.0)
            .unwrap();
        assert!(same.iter().all(|&d| d == 0.0));

        let ab = pd_difference(&fit, &[(0, 0.0)], &[(0, 1.0)], &cohort, Functional::Cif(Cause::Cause1), 1.0)
            .unwrap();
        let ba = pd_difference(&fit, &[(0, 1.0)], &[(0, 0.0)], &cohort, Functional::Cif(Cause::Cause1), 1.0)
            .unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x + y).abs() < 1e-15, "antisymmetry");
        }
        // Hand contrast through the CIF algebra: F1(t1) = p1, so the
        // difference is 0.2 - 0.4.
        assert!((ab[0] - (0.2 - 0.4)).abs() < 1e-9);
    }

    #[test]
    fn individual_differences_match_pd_by_linearity() {
        let fit = two_region_m2();
        let cohort = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![0.0]]).unwrap();
        let f = Functional::Cif(Cause::Cause1);
        let individual =
            individual_differences(&fit, &cohort, &[(0, 0.0)], &[(0, 1.0)], f, 1.0, 0.95)
                .unwrap();
        let pd = pd_difference(&fit, &[(0, 0.0)], &[(0, 1.0)], &cohort, f, 1.0).unwrap();
        let mean_of_means =
            individual.iter().map(|c| c.mean).sum::<f64>() / individual.len() as f64;
        assert!((mean_of_means - mean(&pd)).abs() < 1e-12);
        // Constant model across subjects: all summaries identical. The
        // hazard here depends only on the override, so every subject agrees.
        for c in &individual {
            assert!((c.mean - individual[0].mean).abs() < 1e-15);
        }
        // Single subject reduces to pd_difference with N = 1.
        let single = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let ind =
            individual_differences(&fit, &single, &[(0, 0.0)], &[(0, 1.0)], f, 1.0, 0.95).unwrap();
        let pd1 = pd_difference(&fit, &[(0, 0.0)], &[(0, 1.0)], &single, f, 1.0).unwrap();
        assert!((ind[0].mean - mean(&pd1)).abs() < 1e-15);
    }

    #[test]
    fn varsel_edge_cases() {
        // P = 1: probability 1 regardless of counts.
        let flat = fixed_time_fit(&[1.0], &[0.5], 1);
        let vs = varsel_probabilities(&flat);
        assert_eq!(vs.mean_probability, vec![1.0]);
        // Root-only trees: used fraction 0 everywhere.
        let root = ProbitFit {
            draws: vec![PosteriorDraw {
                ensemble: Ensemble::root_only(3, 0.0, 1.5, 1.0).unwrap(),
                split_counts: vec![0, 0],
                split_probs: None,
            }],
            mu0: 0.0,
            n_vars: 2,
            config: McmcConfig::default(),
        };
        let vs = varsel_probabilities(&root);
        assert_eq!(vs.used_fraction, vec![0.0, 0.0]);
        assert_eq!(vs.mean_probability, vec![0.5, 0.5]);
    }

    #[test]
    fn varsel_finds_planted_signal() {
        // p(x) depends on covariate 0 only. Plain BART spreads splits across
        // variables; the sparse Dirichlet prior concentrates them, so the
        // planted variable dominates both summaries.
        let n = 600;
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<u8> = (0..n)
            .map(|i| u8::from(rng.random::<f64>() < crate::math::normal_cdf(2.0 * x.get(i, 0))))
            .collect();
        let data = BinaryDataset::new(x, y).unwrap();
        let cfg = McmcConfig {
            trees: 50,
            burn_in: 200,
            thin: 2,
            draws: 150,
            seed: 3,
            dart: true,
            ..McmcConfig::default()
        };
        let fit = crate::probit::fit_probit(&data, &cfg).unwrap();
        let vs = varsel_probabilities(&fit);
        assert!(
            vs.used_fraction[0] >= vs.used_fraction[1]
                && vs.used_fraction[0] >= vs.used_fraction[2],
            "signal variable should rank first: {:?}",
            vs.used_fraction
        );
        assert!(vs.mean_probability[0] > 0.4, "{:?}", vs.mean_probability);
        assert!(
            vs.mean_probability[0] > 2.0 * vs.mean_probability[1]
                && vs.mean_probability[0] > 2.0 * vs.mean_probability[2],
            "{:?}",
            vs.mean_probability
        );
    }

    fn case3_cohort(n: usize, seed: u64) -> Vec<CompetingRisksRecord> {
        let scenario = crate::simgen::Scenario::WeibullShapes {
            beta1: -(3.0f64).ln(),
            beta2: (3.0f64).ln(),
            p0: 0.5,
            gamma0: 2.0,
        };
        let cfg = crate::simgen::ScenarioConfig {
            scenario,
            n,
            censor_target: Some(0.2),
            seed,
        };
        crate::simgen::generate(&cfg).unwrap().records
    }

    #[test]
    fn additivity_and_monotonicity_on_fitted_models() {
        let cohort = case3_cohort(120, 5);
        let cfg = McmcConfig {
            trees: 10,
            burn_in: 30,
            thin: 1,
            draws: 40,
            seed: 11,
            ..McmcConfig::default()
        };
        let m1 = fit_m1(&cohort, &cfg).unwrap();
        let m2 = fit_m2(&cohort, &cfg).unwrap();
        for x in [[0.0], [1.0]] {
            for curves in [m1.curves(&x).unwrap(), m2.curves(&x).unwrap()] {
                for d in 0..curves.survival.n_rows() {
                    let mut prev_s = 1.0;
                    let mut prev_f1 = 0.0;
                    let mut prev_f2 = 0.0;
                    for j in 0..curves.times.len() {
                        let s = curves.survival.get(d, j);
                        let f1 = curves.cif1.get(d, j);
                        let f2 = curves.cif2.get(d, j);
                        assert!((s + f1 + f2 - 1.0).abs() < 1e-12);
                        assert!(s <= prev_s + 1e-15 && (0.0..=1.0).contains(&s));
                        assert!(f1 >= prev_f1 - 1e-15 && (0.0..=1.0).contains(&f1));
                        assert!(f2 >= prev_f2 - 1e-15 && (0.0..=1.0).contains(&f2));
                        prev_s = s;
                        prev_f1 = f1;
                        prev_f2 = f2;
                    }
                }
            }
        }
    }

    #[test]
    fn single_risk_degeneracy_matches_survival_product() {
        // All events cause 1: Method 1's survival equals the product formula
        // applied to the any-event fit on the same draws.
        let mut cohort = case3_cohort(80, 9);
        for r in &mut cohort {
            if r.status.is_event() {
                r.status = EventStatus::Event(Cause::Cause1);
            }
        }
        let cfg = McmcConfig {
            trees: 10,
            burn_in: 20,
            thin: 1,
            draws: 25,
            seed: 13,
            ..McmcConfig::default()
        };
        let m1 = fit_m1(&cohort, &cfg).unwrap();
        let s = survival(&m1, &[1.0]).unwrap();
        let design = {
            let mut m = Matrix::zeros(0, 2);
            for &t in m1.grid.times() {
                m.push_row(&[t, 1.0]);
            }
            m
        };
        let p = m1.fit_any.predict_prob(&design).unwrap();
        for d in 0..s.n_draws() {
            let mut prod = 1.0;
            for j in 0..m1.grid.len() {
                prod *= 1.0 - p.get(d, j);
                assert_eq!(s.draws.get(d, j), prod);
            }
        }
    }

    #[test]
    fn m1_and_m2_agree_on_a_two_group_cohort() {
        // Posterior-mean F1 curves from the two factorizations stay within a
        // Monte Carlo sup-norm tolerance of each other.
        let cohort = case3_cohort(500, 21);
        let (coarse, _) = crate::discrete::coarsen_grid(&cohort, 0.05).unwrap();
        let cfg = McmcConfig {
            trees: 30,
            burn_in: 100,
            thin: 1,
            draws: 150,
            seed: 17,
            ..McmcConfig::default()
        };
        let m1 = fit_m1(&coarse, &cfg).unwrap();
        let m2 = fit_m2(&coarse, &cfg).unwrap();
        for x in [[0.0], [1.0]] {
            let f1_m1 = cif(&m1, &x, Cause::Cause1).unwrap().mean_curve();
            let f1_m2 = cif(&m2, &x, Cause::Cause1).unwrap().mean_curve();
            let sup = f1_m1
                .iter()
                .zip(&f1_m2)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(sup < 0.05, "sup-norm disagreement {sup} for x={x:?}");
        }
    }

    #[test]
    fn fit_errors_name_the_degenerate_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        // No cause-2 events: fit_m2 errors on the cause-2 factor, fit_m1 runs.
        let cohort: Vec<CompetingRisksRecord> = (0..40)
            .map(|_| {
                let t = 0.5 + rng.random::<f64>();
                let status = if rng.random::<f64>() < 0.6 {
                    EventStatus::Event(Cause::Cause1)
                } else {
                    EventStatus::Censored
                };
                CompetingRisksRecord::new(t, status, vec![rng.random::<f64>()]).unwrap()
            })
            .collect();
        let cfg =
            McmcConfig { trees: 5, burn_in: 5, thin: 1, draws: 5, ..McmcConfig::default() };
        let err = fit_m2(&cohort, &cfg).unwrap_err();
        assert!(err.to_string().contains("cause-2"), "{err}");
        assert!(fit_m1(&cohort, &cfg).is_ok());

        // No events at all: fit_m1 errors on the cause-given-event factor.
        let censored: Vec<CompetingRisksRecord> = (0..10)
            .map(|i| {
                CompetingRisksRecord::new(1.0 + i as f64, EventStatus::Censored, vec![0.0])
                    .unwrap()
            })
            .collect();
        let err = fit_m1(&censored, &cfg).unwrap_err();
        assert!(err.to_string().contains("cause-given-event"), "{err}");
    }

    #[test]
    fn fits_are_deterministic() {
        let cohort = case3_cohort(60, 33);
        let cfg = McmcConfig {
            trees: 8,
            burn_in: 10,
            thin: 1,
            draws: 10,
            seed: 99,
            ..McmcConfig::default()
        };
        let a = fit_m1(&cohort, &cfg).unwrap();
        let b = fit_m1(&cohort, &cfg).unwrap();
        let fa = cif(&a, &[0.0], Cause::Cause1).unwrap();
        let fb = cif(&b, &[0.0], Cause::Cause1).unwrap();
        assert_eq!(fa.draws, fb.draws);
    }
}
