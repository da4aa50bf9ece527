use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::EmpiricsError;
use crate::game::EffortProfile;
use crate::wiki_sim::{ContributorId, EditKind, OwnershipCensus, RecordedEdit, Scope};

/// One row of an edit log: `contributor,kind,scope,effort`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditRecord {
    pub contributor: ContributorId,
    pub kind: EditKind,
    pub scope: Scope,
    pub effort: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributorTotals {
    pub contributor: ContributorId,
    /// Total effort `s_i`.
    pub effort: f64,
    /// Number of edits `e_i`.
    pub edits: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EditLog {
    records: Vec<EditRecord>,
}

impl EditLog {
    pub fn new(records: Vec<EditRecord>) -> Result<Self, EmpiricsError> {
        if let Some(r) = records
            .iter()
            .find(|r| !(r.effort.is_finite() && r.effort > 0.0))
        {
            return Err(EmpiricsError::NonPositiveEffort(r.contributor, r.effort));
        }
        Ok(Self { records })
    }

    pub fn from_history(history: &[RecordedEdit]) -> Result<Self, EmpiricsError> {
        Self::new(
            history
                .iter()
                .map(|r| EditRecord {
                    contributor: r.edit.editor,
                    kind: r.edit.kind,
                    scope: r.edit.scope,
                    effort: r.effort,
                })
                .collect(),
        )
    }

    pub fn records(&self) -> &[EditRecord] {
        &self.records
    }

    /// Per-contributor totals, ordered by contributor id.
    pub fn totals(&self) -> Vec<ContributorTotals> {
        let mut acc: BTreeMap<ContributorId, (f64, usize)> = BTreeMap::new();
        for r in &self.records {
            let e = acc.entry(r.contributor).or_insert((0.0, 0));
            e.0 += r.effort;
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(contributor, (effort, edits))| ContributorTotals {
                contributor,
                effort,
                edits,
            })
            .collect()
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, EmpiricsError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let records = rdr
            .deserialize()
            .collect::<Result<Vec<EditRecord>, _>>()
            .map_err(|e| EmpiricsError::Parse(e.to_string()))?;
        Self::new(records)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EmpiricsError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)
                .map_err(|e| EmpiricsError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| EmpiricsError::Io(e.to_string()))
    }
}

/// Effort per edit `beta_i = s_i / e_i`, keyed by contributor.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaEstimate {
    pub contributors: Vec<ContributorId>,
    pub betas: Vec<f64>,
}

impl BetaEstimate {
    pub fn profile(&self) -> Result<EffortProfile, EmpiricsError> {
        Ok(EffortProfile::new(self.betas.clone())?)
    }

    pub fn get(&self, who: ContributorId) -> Option<f64> {
        self.contributors
            .iter()
            .position(|c| *c == who)
            .map(|i| self.betas[i])
    }
}

/// Estimates every contributor present in the log, ordered by id.
pub fn estimate_beta(log: &EditLog) -> Result<BetaEstimate, EmpiricsError> {
    let totals = log.totals();
    if totals.is_empty() {
        return Err(EmpiricsError::EmptyLog);
    }
    Ok(BetaEstimate {
        contributors: totals.iter().map(|t| t.contributor).collect(),
        betas: totals.iter().map(|t| t.effort / t.edits as f64).collect(),
    })
}

/// Estimates the listed contributors in the given order; each must have
/// at least one edit in the log.
pub fn estimate_beta_for(
    log: &EditLog,
    roster: &[ContributorId],
) -> Result<BetaEstimate, EmpiricsError> {
    let all = estimate_beta(log)?;
    let betas = roster
        .iter()
        .map(|&c| all.get(c).ok_or(EmpiricsError::ZeroEdits(c)))
        .collect::<Result<_, _>>()?;
    Ok(BetaEstimate {
        contributors: roster.to_vec(),
        betas,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CensusRow {
    revision: u64,
    contributor: ContributorId,
    sentences: usize,
}

pub fn write_census_csv<W: Write>(census: &OwnershipCensus, out: W) -> Result<(), EmpiricsError> {
    let mut w = csv::Writer::from_writer(out);
    for (&contributor, &sentences) in &census.counts {
        w.serialize(CensusRow {
            revision: census.revision,
            contributor,
            sentences,
        })
        .map_err(|e| EmpiricsError::Io(e.to_string()))?;
    }
    if census.counts.is_empty() {
        w.write_record(["revision", "contributor", "sentences"])
            .map_err(|e| EmpiricsError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| EmpiricsError::Io(e.to_string()))
}

pub fn read_census_csv<R: Read>(input: R) -> Result<OwnershipCensus, EmpiricsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut census = OwnershipCensus::default();
    for row in rdr.deserialize() {
        let row: CensusRow = row.map_err(|e| EmpiricsError::Parse(e.to_string()))?;
        census.revision = row.revision;
        if row.sentences > 0 {
            *census.counts.entry(row.contributor).or_insert(0) += row.sentences;
        }
    }
    Ok(census)
}
