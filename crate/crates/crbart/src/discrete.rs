//! Time-grid construction and the person-period expansions that convert
//! competing-risks records into binary datasets.
//!
//! A cohort record is `(t_i, delta_i, epsilon_i, x_i)`. The grid holds the
//! distinct observation times `t_(1) < ... < t_(J)` (events and censorings),
//! with `t_(0) = 0` implicit. Each subject contributes one binary row per
//! grid time up to and including its own observation time, with the grid
//! time prepended to the covariates.

use crate::data::{BinaryDataset, Matrix};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Failure cause in a two-cause competing-risks setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cause {
    Cause1,
    Cause2,
}

/// Outcome of one subject: censored, or an event of one of two causes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventStatus {
    Censored,
    Event(Cause),
}

impl EventStatus {
    pub fn is_event(self) -> bool {
        matches!(self, EventStatus::Event(_))
    }

    pub fn cause(self) -> Option<Cause> {
        match self {
            EventStatus::Event(c) => Some(c),
            EventStatus::Censored => None,
        }
    }

    /// Decode the `(status, cause)` integer pair used in cohort files:
    /// status 0 with cause 0 is censoring, status 1 with cause 1/2 an event.
    pub fn from_status_cause(status: u8, cause: u8) -> Result<Self> {
        match (status, cause) {
            (0, 0) => Ok(EventStatus::Censored),
            (1, 1) => Ok(EventStatus::Event(Cause::Cause1)),
            (1, 2) => Ok(EventStatus::Event(Cause::Cause2)),
            _ => Err(Error::invalid(format!(
                "inconsistent status/cause pair ({status}, {cause}); expected (0,0), (1,1) or (1,2)"
            ))),
        }
    }

    /// The `(status, cause)` integer pair for cohort files.
    pub fn to_status_cause(self) -> (u8, u8) {
        match self {
            EventStatus::Censored => (0, 0),
            EventStatus::Event(Cause::Cause1) => (1, 1),
            EventStatus::Event(Cause::Cause2) => (1, 2),
        }
    }
}

/// One subject's observation: time, status and covariate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetingRisksRecord {
    pub time: f64,
    pub status: EventStatus,
    pub covariates: Vec<f64>,
}

impl CompetingRisksRecord {
    pub fn new(time: f64, status: EventStatus, covariates: Vec<f64>) -> Result<Self> {
        if !(time > 0.0) || !time.is_finite() {
            return Err(Error::invalid(format!("observation time {time} must be positive")));
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariates must be finite"));
        }
        Ok(CompetingRisksRecord { time, status, covariates })
    }
}

/// Strictly increasing positive grid of distinct observation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("time grid must have at least one point"));
        }
        if times[0] <= 0.0 || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("grid times must be positive and finite"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid times must be strictly increasing"));
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the largest grid time `<= t`, or `None` if `t` precedes the
    /// grid (step-function convention: snap downward).
    pub fn floor_index(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&g| g <= t);
        k.checked_sub(1)
    }

    /// `n_i`: the number of grid times at or before `t`.
    pub fn n_periods(&self, t: f64) -> usize {
        self.times.partition_point(|&g| g <= t)
    }
}

fn validate_cohort(records: &[CompetingRisksRecord]) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    let width = records[0].covariates.len();
    for (i, r) in records.iter().enumerate() {
        if !(r.time > 0.0) || !r.time.is_finite() {
            return Err(Error::invalid(format!("record {i}: nonpositive time {}", r.time)));
        }
        if r.covariates.len() != width {
            return Err(Error::invalid(format!(
                "record {i}: {} covariates, expected {width}",
                r.covariates.len()
            )));
        }
    }
    Ok(width)
}

/// Sorted distinct observation times of the cohort (events and censorings).
pub fn build_time_grid(records: &[CompetingRisksRecord]) -> Result<TimeGrid> {
    validate_cohort(records)?;
    let mut times: Vec<f64> = records.iter().map(|r| r.time).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    TimeGrid::new(times)
}

/// Coarsen observation times to multiples of `unit` with a ceiling mapping
/// (no event moves before its true time) and build the grid on the distinct
/// coarsened values. Returns the rewritten records together with the grid.
pub fn coarsen_grid(
    records: &[CompetingRisksRecord],
    unit: f64,
) -> Result<(Vec<CompetingRisksRecord>, TimeGrid)> {
    if !(unit > 0.0) || !unit.is_finite() {
        return Err(Error::invalid(format!("coarsening unit {unit} must be positive")));
    }
    validate_cohort(records)?;
    let coarsened: Vec<CompetingRisksRecord> = records
        .iter()
        .map(|r| {
            let mut c = r.clone();
            c.time = unit * (r.time / unit).ceil();
            c
        })
        .collect();
    let grid = build_time_grid(&coarsened)?;
    Ok((coarsened, grid))
}

/// Person-period rows: binary outcomes with covariates `[t_(j), x...]` and
/// the bookkeeping needed to trace rows back to subjects and grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct LongBinaryData {
    /// Covariates per row; column 0 is the grid time.
    pub x: Matrix,
    pub y: Vec<u8>,
    /// Subject index (input order) per row.
    pub subject: Vec<usize>,
    /// 1-based grid index `j` per row.
    pub grid_index: Vec<usize>,
    /// `n_i` per subject.
    pub n_periods: Vec<usize>,
}

impl LongBinaryData {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn into_dataset(self) -> Result<BinaryDataset> {
        BinaryDataset::new(self.x, self.y)
    }
}

/// Conditional cause-of-failure data for Method 1: one row per event subject
/// with covariates `[t_i, x_i]` and outcome `u_i = I(epsilon_i = 1)`. May be
/// empty when the cohort has no events.
#[derive(Debug, Clone, PartialEq)]
pub struct CauseConditionalData {
    pub x: Matrix,
    pub u: Vec<u8>,
    pub subject: Vec<usize>,
}

impl CauseConditionalData {
    pub fn n_rows(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn into_dataset(self) -> Result<BinaryDataset> {
        BinaryDataset::new(self.x, self.u)
    }
}

enum OutcomeRule {
    AnyEvent,
    CauseOnly(Cause),
}

fn expand_with_rule(
    records: &[CompetingRisksRecord],
    grid: &TimeGrid,
    rule: OutcomeRule,
    drop_after_cause1: bool,
) -> Result<LongBinaryData> {
    let width = validate_cohort(records)?;
    let mut x = Matrix::zeros(0, width + 1);
    let mut y = Vec::new();
    let mut subject = Vec::new();
    let mut grid_index = Vec::new();
    let mut n_periods = Vec::with_capacity(records.len());
    let mut row = vec![0.0; width + 1];
    for (i, r) in records.iter().enumerate() {
        let n_i = grid.n_periods(r.time);
        if n_i == 0 {
            return Err(Error::invalid(format!(
                "record {i}: time {} precedes the first grid point",
                r.time
            )));
        }
        n_periods.push(n_i);
        for j in 1..=n_i {
            let outcome = if j == n_i {
                match rule {
                    OutcomeRule::AnyEvent => u8::from(r.status.is_event()),
                    OutcomeRule::CauseOnly(c) => u8::from(r.status.cause() == Some(c)),
                }
            } else {
                0
            };
            // Method 2's second factor: once a cause-1 event happens at
            // t_(j) the subject is no longer at risk of a cause-2 event
            // there, so that row is not constructed.
            if drop_after_cause1 && j == n_i && r.status.cause() == Some(Cause::Cause1) {
                continue;
            }
            row[0] = grid.times()[j - 1];
            row[1..].copy_from_slice(&r.covariates);
            x.push_row(&row);
            y.push(outcome);
            subject.push(i);
            grid_index.push(j);
        }
    }
    Ok(LongBinaryData { x, y, subject, grid_index, n_periods })
}

/// Single-risk (or any-event) expansion: `y_ij = 0` for `j < n_i` and
/// `y_{i n_i} = delta_i`.
pub fn expand_survival(
    records: &[CompetingRisksRecord],
    grid: &TimeGrid,
) -> Result<LongBinaryData> {
    expand_with_rule(records, grid, OutcomeRule::AnyEvent, false)
}

/// Method 1 data construction: an any-event person-period dataset
/// (`y_ij. = y_ij1 + y_ij2`) plus the cause-conditional dataset over event
/// subjects (`u_i` against covariates `[t_i, x_i]`).
pub fn expand_crisk_m1(
    records: &[CompetingRisksRecord],
    grid: &TimeGrid,
) -> Result<(LongBinaryData, CauseConditionalData)> {
    let any_event = expand_survival(records, grid)?;
    let width = records[0].covariates.len();
    let mut x = Matrix::zeros(0, width + 1);
    let mut u = Vec::new();
    let mut subject = Vec::new();
    let mut row = vec![0.0; width + 1];
    for (i, r) in records.iter().enumerate() {
        if let Some(cause) = r.status.cause() {
            row[0] = r.time;
            row[1..].copy_from_slice(&r.covariates);
            x.push_row(&row);
            u.push(u8::from(cause == Cause::Cause1));
            subject.push(i);
        }
    }
    Ok((any_event, CauseConditionalData { x, u, subject }))
}

/// Method 2 data construction: a cause-1 person-period dataset (`y_ij1`) and
/// a cause-2 dataset (`y_ij2`) that excludes the rows where `y_ij1 = 1`.
pub fn expand_crisk_m2(
    records: &[CompetingRisksRecord],
    grid: &TimeGrid,
) -> Result<(LongBinaryData, LongBinaryData)> {
    let cause1 = expand_with_rule(records, grid, OutcomeRule::CauseOnly(Cause::Cause1), false)?;
    let cause2 = expand_with_rule(records, grid, OutcomeRule::CauseOnly(Cause::Cause2), true)?;
    Ok((cause1, cause2))
}
