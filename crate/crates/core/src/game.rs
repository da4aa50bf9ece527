//! Contest game between page contributors.
//!
//! Each contributor `i` places an amount of content `x_i >= 0` on the page and
//! pays `beta_i` per unit. Ownership is the contributor's share of all
//! content; net utility is ownership minus effort spent.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("a game needs at least 2 contributors, got {0}")]
    TooFewContributors(usize),
    #[error("effort of contributor {index} must be positive and finite, got {value}")]
    NonPositiveEffort { index: usize, value: f64 },
    #[error("contribution of contributor {index} must be non-negative and finite, got {value}")]
    NegativeContribution { index: usize, value: f64 },
    #[error("dimension mismatch: {strategies} contributions for {efforts} effort coefficients")]
    DimensionMismatch { strategies: usize, efforts: usize },
    #[error("total content is zero; ownership shares are undefined")]
    ZeroTotalContent,
    #[error("opposing content must be positive for a best response to exist, got {0}")]
    NonPositiveOpposition(f64),
    #[error("pruning infeasible contributors leaves {0} active, at least 2 are required")]
    PrunedBelowTwo(usize),
    #[error("contributor {0} is infeasible; prune the active set first")]
    Infeasible(usize),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("best-response dynamics did not converge in {iterations} sweeps (last change {last_change:e})")]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        last: Vec<f64>,
    },
}

/// Per-unit effort coefficients `beta_i`, one per contributor.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortProfile {
    betas: Vec<f64>,
}

impl EffortProfile {
    pub fn new(betas: Vec<f64>) -> Result<Self, GameError> {
        if betas.len() < 2 {
            return Err(GameError::TooFewContributors(betas.len()));
        }
        if let Some((index, &value)) = betas
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.is_finite() && **b > 0.0))
        {
            return Err(GameError::NonPositiveEffort { index, value });
        }
        Ok(Self { betas })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.betas.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.len() as f64
    }

    /// Restricts the game to the given contributors, keeping their order.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self, GameError> {
        Self::new(indices.iter().map(|&i| self.betas[i]).collect())
    }
}

impl fmt::Display for EffortProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.betas.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Content amounts `x_i` chosen by each contributor.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    contributions: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(contributions: Vec<f64>) -> Result<Self, GameError> {
        if let Some((index, &value)) = contributions
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
        {
            return Err(GameError::NegativeContribution { index, value });
        }
        Ok(Self { contributions })
    }

    pub fn contributions(&self) -> &[f64] {
        &self.contributions
    }

    pub fn len(&self) -> usize {
        self.contributions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributions.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.contributions.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.contributions
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    /// Fractional ownership `u_i`.
    pub ownership: Vec<f64>,
    /// Net utility `n_i = u_i - beta_i * x_i`.
    pub net: Vec<f64>,
}

fn checked_total(profile: &StrategyProfile, efforts: &EffortProfile) -> Result<f64, GameError> {
    if profile.len() != efforts.len() {
        return Err(GameError::DimensionMismatch {
            strategies: profile.len(),
            efforts: efforts.len(),
        });
    }
    let total = profile.total();
    if total <= 0.0 {
        return Err(GameError::ZeroTotalContent);
    }
    Ok(total)
}

pub fn utility(
    profile: &StrategyProfile,
    efforts: &EffortProfile,
) -> Result<UtilityVector, GameError> {
    let total = checked_total(profile, efforts)?;
    let ownership: Vec<f64> = profile.contributions().iter().map(|x| x / total).collect();
    let net = ownership
        .iter()
        .zip(profile.contributions())
        .zip(efforts.betas())
        .map(|((u, x), b)| u - b * x)
        .collect();
    Ok(UtilityVector { ownership, net })
}

/// Marginal net utility of each contributor: `S_{-i} / S^2 - beta_i`.
///
/// Every entry vanishes at an interior equilibrium.
pub fn foc_residual(
    profile: &StrategyProfile,
    efforts: &EffortProfile,
) -> Result<Vec<f64>, GameError> {
    let total = checked_total(profile, efforts)?;
    let sq = total * total;
    Ok(profile
        .contributions()
        .iter()
        .zip(efforts.betas())
        .map(|(x, b)| (total - x) / sq - b)
        .collect())
}
