use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::editlog::{estimate_beta_for, read_census_csv, write_census_csv, EditLog};
use super::stats::{equivalence_classes, holdout_error, linear_fit, pearson, LinearFit};
use super::EmpiricsError;
use crate::equilibrium::closed_form;
use crate::game::EffortProfile;
use crate::wiki_sim::{
    history_records, write_history, ContributorId, OwnershipCensus, RecordedEdit, WikiPage,
};

pub const HISTORY_FILE: &str = "history.tsv";
pub const EDITS_FILE: &str = "edits.csv";
pub const CENSUS_FILE: &str = "census.csv";

/// Default tolerance for grouping model ownership (exact ties).
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// Model ownership at equilibrium for each contributor of `efforts`.
pub fn predict_ownership(efforts: &EffortProfile) -> Result<Vec<f64>, EmpiricsError> {
    Ok(closed_form(efforts)?.ownership)
}

/// Everything the validator needs about one page.
#[derive(Debug, Clone, PartialEq)]
pub struct PageData {
    pub name: String,
    pub log: EditLog,
    pub census: OwnershipCensus,
}

impl PageData {
    /// Replays a generated history into a page record.
    pub fn from_history(
        name: impl Into<String>,
        history: &[RecordedEdit],
    ) -> Result<Self, EmpiricsError> {
        let page = WikiPage::replay(history.iter().map(|r| &r.edit))?;
        Ok(Self {
            name: name.into(),
            log: EditLog::from_history(history)?,
            census: page.census(),
        })
    }

    pub fn load(dir: &Path) -> Result<Self, EmpiricsError> {
        let open = |f: &str| {
            File::open(dir.join(f))
                .map(BufReader::new)
                .map_err(|e| EmpiricsError::Io(format!("{}: {e}", dir.join(f).display())))
        };
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        Ok(Self {
            name,
            log: EditLog::read_csv(open(EDITS_FILE)?)?,
            census: read_census_csv(open(CENSUS_FILE)?)?,
        })
    }
}

/// Writes `history.tsv`, `edits.csv` and `census.csv` for a generated page.
pub fn write_page_dir(
    dir: &Path,
    history: &[RecordedEdit],
) -> Result<OwnershipCensus, EmpiricsError> {
    let io = |e: std::io::Error| EmpiricsError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let create = |f: &str| File::create(dir.join(f)).map(BufWriter::new).map_err(io);

    let records = history_records(history.iter().map(|r| &r.edit));
    let mut out = create(HISTORY_FILE)?;
    write_history(&mut out, &records).map_err(io)?;
    out.flush().map_err(io)?;

    EditLog::from_history(history)?.write_csv(create(EDITS_FILE)?)?;

    let census = WikiPage::replay(history.iter().map(|r| &r.edit))?.census();
    write_census_csv(&census, create(CENSUS_FILE)?)?;
    Ok(census)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PageRole {
    Train,
    Holdout,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageAnalysis {
    pub name: String,
    pub role: PageRole,
    pub contributors: Vec<ContributorId>,
    pub betas: Vec<f64>,
    /// Model ownership `a_i`.
    pub predicted: Vec<f64>,
    /// Observed ownership `d_i = p_i / sum(p)`.
    pub observed: Vec<f64>,
    /// `None` when either vector is constant on this page.
    pub pearson: Option<f64>,
    pub predicted_classes: Vec<Vec<ContributorId>>,
    pub observed_classes: Vec<Vec<ContributorId>>,
}

impl PageAnalysis {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.predicted
            .iter()
            .copied()
            .zip(self.observed.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutError {
    pub page: String,
    pub error_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pages: Vec<PageAnalysis>,
    pub pooled_pearson: f64,
    /// Present only when holdout pages were given.
    pub fit: Option<LinearFit>,
    pub training_error_percent: Option<f64>,
    pub holdout_errors: Vec<HoldoutError>,
}

/// Compares model and observed ownership on one page. Every contributor
/// with sentences must appear in the edit log.
pub fn analyze_page(
    page: &PageData,
    role: PageRole,
    class_tol: f64,
) -> Result<PageAnalysis, EmpiricsError> {
    let mut roster: Vec<ContributorId> = page.log.totals().iter().map(|t| t.contributor).collect();
    for owner in page.census.counts.keys() {
        if !roster.contains(owner) {
            roster.push(*owner);
        }
    }
    let estimate = estimate_beta_for(&page.log, &roster)?;
    let predicted = predict_ownership(&estimate.profile()?)?;

    let total = page.census.total();
    if total == 0 {
        return Err(EmpiricsError::EmptyCensus(page.name.clone()));
    }
    let observed: Vec<f64> = roster
        .iter()
        .map(|&c| page.census.get(c) as f64 / total as f64)
        .collect();

    let pearson = match pearson(&predicted, &observed) {
        Ok(r) => Some(r),
        Err(EmpiricsError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    let label = |classes: Vec<Vec<usize>>| -> Vec<Vec<ContributorId>> {
        classes
            .into_iter()
            .map(|c| c.into_iter().map(|i| roster[i]).collect())
            .collect()
    };
    Ok(PageAnalysis {
        name: page.name.clone(),
        role,
        predicted_classes: label(equivalence_classes(&predicted, class_tol)?),
        observed_classes: label(equivalence_classes(&observed, class_tol)?),
        contributors: roster,
        betas: estimate.betas,
        predicted,
        observed,
        pearson,
    })
}

/// Runs the train/holdout protocol: per-page and pooled correlation, a
/// least-squares correction fitted on the training pages, and its error on
/// every holdout page. Pages are analyzed in parallel; output order follows
/// the input.
pub fn validate(
    train: &[PageData],
    holdout: &[PageData],
    class_tol: f64,
) -> Result<ValidationReport, EmpiricsError> {
    if train.is_empty() {
        return Err(EmpiricsError::NoTrainingPages);
    }
    let jobs: Vec<(&PageData, PageRole)> = train
        .iter()
        .map(|p| (p, PageRole::Train))
        .chain(holdout.iter().map(|p| (p, PageRole::Holdout)))
        .collect();
    let pages = jobs
        .par_iter()
        .map(|(p, role)| analyze_page(p, *role, class_tol))
        .collect::<Result<Vec<_>, _>>()?;

    let pooled: Vec<(f64, f64)> = pages.iter().flat_map(|p| p.points()).collect();
    let (a, d): (Vec<f64>, Vec<f64>) = pooled.iter().copied().unzip();
    let pooled_pearson = pearson(&a, &d)?;

    let (fit, training_error_percent, holdout_errors) = if holdout.is_empty() {
        (None, None, Vec::new())
    } else {
        let train_points: Vec<(f64, f64)> = pages
            .iter()
            .filter(|p| p.role == PageRole::Train)
            .flat_map(|p| p.points())
            .collect();
        let fit = linear_fit(&train_points)?;
        let training = holdout_error(&fit, &train_points)?;
        let errors = pages
            .iter()
            .filter(|p| p.role == PageRole::Holdout)
            .map(|p| {
                Ok(HoldoutError {
                    page: p.name.clone(),
                    error_percent: holdout_error(&fit, &p.points())?,
                })
            })
            .collect::<Result<Vec<_>, EmpiricsError>>()?;
        (Some(fit), Some(training), errors)
    };

    Ok(ValidationReport {
        pages,
        pooled_pearson,
        fit,
        training_error_percent,
        holdout_errors,
    })
}
