//! Validation of model ownership against observed page ownership.
//!
//! Effort per edit is estimated from an edit log as `beta_i = s_i / e_i`,
//! the model's equilibrium ownership is compared with the observed sentence
//! shares, and a least-squares line fitted on training pages is scored on
//! held-out pages.

mod editlog;
mod stats;
mod validation;

use thiserror::Error;

use crate::game::GameError;
use crate::wiki_sim::{ContributorId, SimError};

pub use editlog::{
    estimate_beta, estimate_beta_for, read_census_csv, write_census_csv, BetaEstimate,
    ContributorTotals, EditLog, EditRecord,
};
pub use stats::{equivalence_classes, holdout_error, inject_noise, linear_fit, pearson, LinearFit};
pub use validation::{
    analyze_page, predict_ownership, validate, write_page_dir, HoldoutError, PageAnalysis,
    PageData, PageRole, ValidationReport, CENSUS_FILE, DEFAULT_CLASS_TOL, EDITS_FILE, HISTORY_FILE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmpiricsError {
    #[error("contributor {0} has no edits in the log")]
    ZeroEdits(ContributorId),
    #[error("effort of a record by contributor {0} must be positive, got {1}")]
    NonPositiveEffort(ContributorId, f64),
    #[error("edit log is empty")]
    EmptyLog,
    #[error("page {0:?} has no sentences")]
    EmptyCensus(String),
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("correlation is undefined for a constant vector")]
    ZeroVariance,
    #[error("least-squares fit is singular: regressor is constant")]
    ConstantRegressor,
    #[error("holdout set is empty")]
    EmptyHoldout,
    #[error("mean observed ownership is zero")]
    ZeroMeanObserved,
    #[error("at least one training page is required")]
    NoTrainingPages,
    #[error("tolerance must be non-negative and finite, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl EmpiricsError {
    /// Statistics that cannot be computed from the given vectors.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            EmpiricsError::ZeroVariance
                | EmpiricsError::ConstantRegressor
                | EmpiricsError::TooFewPoints(_)
                | EmpiricsError::ZeroMeanObserved
                | EmpiricsError::EmptyCensus(_)
        )
    }
}
