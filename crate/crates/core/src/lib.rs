//! Content-ownership contest among page contributors.
//!
//! Contributors add content at a per-unit effort cost and are rewarded by
//! their share of the page. This crate computes the Nash equilibrium of that
//! game by several independent routes, simulates sentence-level page
//! histories with ownership attribution, and validates model ownership
//! against observed ownership.
//!
//! * [`game`]: effort and strategy profiles, utility and first-order residuals.
//! * [`equilibrium`]: closed form, eigenbasis route, best-response dynamics.
//! * [`wiki_sim`]: page model, ownership transfer rule, seeded histories.
//! * [`empirics`]: effort estimation, correlation, linear fit, classes.

pub mod empirics;
pub mod equilibrium;
pub mod game;
pub mod wiki_sim;

pub use equilibrium::{
    asymptotic_ownership, best_response, best_response_dynamics, closed_form, feasibility,
    prune_active, spectral_solve, EquilibriumSolution, Method,
};
pub use game::{foc_residual, utility, EffortProfile, GameError, StrategyProfile, UtilityVector};
