//! Nash equilibrium of the contribution game.
//!
//! Three independent routes are provided:
//!
//! * [`closed_form`]: the explicit equilibrium over the pruned active set,
//!   `x_i = (N-1) (B - (N-1) beta_i) / B^2` with `B = sum(beta)`.
//! * [`spectral_solve`]: the same point reached through the orthonormal
//!   eigenbasis of the all-ones matrix, `x = P z`.
//! * [`best_response_dynamics`]: relaxed Gauss-Seidel best-response iteration.
//!
//! A contributor is feasible when `(N-1) beta_i < sum(beta)`. Infeasible
//! contributors are removed (largest effort first) until the remaining set is
//! feasible; the removed ones contribute nothing at equilibrium.

use nalgebra::{DMatrix, DVector};

use crate::game::{EffortProfile, GameError, StrategyProfile};

pub const DEFAULT_DYNAMICS_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
const STALL_SWEEPS: usize = 20;
const MIN_STEP: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Spectral,
    BestResponseDynamics,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Spectral => "spectral",
            Method::BestResponseDynamics => "best_response_dynamics",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub strategies: Vec<f64>,
    pub ownership: Vec<f64>,
    /// Contributors with strictly positive equilibrium content, ascending.
    pub active: Vec<usize>,
    pub method: Method,
    /// Number of sweeps, for iterative routes.
    pub iterations: Option<usize>,
}

impl EquilibriumSolution {
    pub fn total_content(&self) -> f64 {
        self.strategies.iter().sum()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active.binary_search(&i).is_ok()
    }
}

/// Whether each contributor would contribute positively if everyone played.
pub fn feasibility(efforts: &EffortProfile) -> Vec<bool> {
    let total = efforts.total();
    let others = (efforts.len() - 1) as f64;
    efforts.betas().iter().map(|b| others * b < total).collect()
}

/// Removes the largest-effort violator of the feasibility condition until
/// every remaining contributor is feasible. Returns surviving indices in
/// ascending order.
pub fn prune_active(efforts: &EffortProfile) -> Result<Vec<usize>, GameError> {
    let betas = efforts.betas();
    let mut active: Vec<usize> = (0..betas.len()).collect();
    loop {
        if active.len() < 2 {
            return Err(GameError::PrunedBelowTwo(active.len()));
        }
        let total: f64 = active.iter().map(|&i| betas[i]).sum();
        let others = (active.len() - 1) as f64;
        let worst = active
            .iter()
            .enumerate()
            .filter(|(_, &i)| others * betas[i] >= total)
            .max_by(|a, b| betas[*a.1].total_cmp(&betas[*b.1]))
            .map(|(pos, _)| pos);
        match worst {
            Some(pos) => {
                active.remove(pos);
            }
            None => break,
        }
    }
    debug_assert!({
        let total: f64 = active.iter().map(|&i| betas[i]).sum();
        let content = (active.len() - 1) as f64 / total;
        (0..betas.len())
            .filter(|i| active.binary_search(i).is_err())
            .all(|i| best_response(content, betas[i]) == Ok(0.0))
    });
    Ok(active)
}

/// Equilibrium from the explicit formula, evaluated on the pruned active set.
pub fn closed_form(efforts: &EffortProfile) -> Result<EquilibriumSolution, GameError> {
    let active = prune_active(efforts)?;
    let betas = efforts.betas();
    let total: f64 = active.iter().map(|&i| betas[i]).sum();
    let others = (active.len() - 1) as f64;

    let mut strategies = vec![0.0; betas.len()];
    let mut ownership = vec![0.0; betas.len()];
    for &i in &active {
        strategies[i] = others * (total - others * betas[i]) / (total * total);
        ownership[i] = 1.0 - others * betas[i] / total;
    }
    Ok(EquilibriumSolution {
        strategies,
        ownership,
        active,
        method: Method::ClosedForm,
        iterations: None,
    })
}

/// Intermediate quantities of the eigenbasis derivation.
#[derive(Debug, Clone)]
pub struct SpectralWork {
    /// Orthogonal matrix whose columns are the eigenvectors `y_1..y_N` of `1 1^T`.
    pub basis: DMatrix<f64>,
    /// Equilibrium coordinates in that basis.
    pub coords: DVector<f64>,
    /// `G = sum(1/alpha_j) = sum(beta_j)`.
    pub g: f64,
    /// `alpha_i = 1/beta_i`.
    pub alphas: Vec<f64>,
}

/// `y_1 = 1/sqrt(N)`; for `j >= 2`, `y_j` has `1/sqrt(j(j-1))` above row `j`,
/// `-(j-1)/sqrt(j(j-1))` at row `j`, zero below (1-based).
pub fn eigenbasis(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |row, col| {
        if col == 0 {
            return 1.0 / (n as f64).sqrt();
        }
        let j = (col + 1) as f64;
        let norm = (j * (j - 1.0)).sqrt();
        match row.cmp(&col) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -(j - 1.0) / norm,
            std::cmp::Ordering::Greater => 0.0,
        }
    })
}

impl SpectralWork {
    pub fn new(efforts: &EffortProfile) -> Result<Self, GameError> {
        if let Some(i) = feasibility(efforts).iter().position(|f| !f) {
            return Err(GameError::Infeasible(i));
        }
        let n = efforts.len();
        let nf = n as f64;
        let alphas: Vec<f64> = efforts.betas().iter().map(|b| 1.0 / b).collect();
        let g: f64 = alphas.iter().map(|a| 1.0 / a).sum();

        // tail[k] = sum_{j > k} 1/alpha_j (0-based)
        let mut tail = vec![0.0; n];
        for k in (0..n - 1).rev() {
            tail[k] = tail[k + 1] + 1.0 / alphas[k + 1];
        }

        let mut coords = DVector::zeros(n);
        coords[0] = (nf - 1.0) / nf.sqrt() / g;
        for idx in 1..n {
            let k = (idx + 1) as f64;
            let kk = k * (k - 1.0);
            let bracket = (k / alphas[idx] + tail[idx]) / g - 1.0;
            coords[idx] = kk.sqrt() * (nf - 1.0).powi(2) / kk / g * bracket;
        }

        Ok(Self {
            basis: eigenbasis(n),
            coords,
            g,
            alphas,
        })
    }

    pub fn strategies(&self) -> DVector<f64> {
        &self.basis * &self.coords
    }
}

/// Equilibrium reconstructed as `P z`. Every contributor must be feasible.
pub fn spectral_solve(efforts: &EffortProfile) -> Result<EquilibriumSolution, GameError> {
    let work = SpectralWork::new(efforts)?;
    // clamp round-off near the feasibility boundary
    let strategies: Vec<f64> = work.strategies().iter().map(|x| x.max(0.0)).collect();
    let total: f64 = strategies.iter().sum();
    let ownership = strategies.iter().map(|x| x / total).collect();
    Ok(EquilibriumSolution {
        active: (0..strategies.len()).collect(),
        strategies,
        ownership,
        method: Method::Spectral,
        iterations: None,
    })
}

/// Maximizer of `x/(x+S) - beta x` over `x >= 0`.
pub fn best_response(opponent_total: f64, beta: f64) -> Result<f64, GameError> {
    if !(opponent_total.is_finite() && opponent_total > 0.0) {
        return Err(GameError::NonPositiveOpposition(opponent_total));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(GameError::NonPositiveEffort {
            index: 0,
            value: beta,
        });
    }
    Ok(((opponent_total / beta).sqrt() - opponent_total).max(0.0))
}

/// `x_i = 1/(N beta_i)`.
pub fn default_start(efforts: &EffortProfile) -> StrategyProfile {
    let n = efforts.len() as f64;
    StrategyProfile::new(efforts.betas().iter().map(|b| 1.0 / (n * b)).collect())
        .expect("positive efforts give positive start")
}

/// Sequential best-response sweeps in index order until the largest change
/// in a sweep drops below `tol`.
pub fn best_response_dynamics(
    efforts: &EffortProfile,
    init: &StrategyProfile,
    tol: f64,
    max_iters: usize,
) -> Result<EquilibriumSolution, GameError> {
    if init.len() != efforts.len() {
        return Err(GameError::DimensionMismatch {
            strategies: init.len(),
            efforts: efforts.len(),
        });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(GameError::InvalidTolerance(tol));
    }
    let mut x = init.contributions().to_vec();
    let mut total: f64 = x.iter().sum();
    if total <= 0.0 {
        return Err(GameError::ZeroTotalContent);
    }

    // Plain sequential best responses can cycle, so each move is relaxed
    // toward the best response by `step`, halved whenever the largest move
    // has not shrunk for a while. Fixed points are unchanged.
    let mut step = 1.0;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut last_change = f64::INFINITY;
    let mut prev_change = f64::INFINITY;
    for sweep in 1..=max_iters {
        last_change = 0.0;
        for (i, &beta) in efforts.betas().iter().enumerate() {
            let others = total - x[i];
            // With no opposing content the payoff is maximized only in the
            // limit x -> 0+; play a probe amount of `tol` instead.
            let target = if others > 0.0 {
                best_response(others, beta)?
            } else {
                tol
            };
            let gap = (target - x[i]).abs();
            last_change = last_change.max(gap);
            let next = if gap < tol {
                target
            } else {
                x[i] + step * (target - x[i])
            };
            x[i] = next;
            total = others + next;
        }
        // Re-sum to keep the running total from drifting.
        total = x.iter().sum();
        // Distance to the fixed point is about change * q / (1 - q) for an
        // observed contraction rate q, which matters when q is close to 1.
        let rate = last_change / prev_change;
        prev_change = last_change;
        let converged = last_change < tol && rate < 1.0 && last_change * rate < tol * (1.0 - rate);
        if last_change < best {
            best = last_change;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_SWEEPS && step > MIN_STEP {
                step *= 0.5;
                stalled = 0;
            }
        }
        if converged || last_change == 0.0 {
            let ownership = x.iter().map(|v| v / total).collect();
            let active = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
            return Ok(EquilibriumSolution {
                strategies: x,
                ownership,
                active,
                method: Method::BestResponseDynamics,
                iterations: Some(sweep),
            });
        }
    }
    Err(GameError::NoConvergence {
        iterations: max_iters,
        last_change,
        last: x,
    })
}

/// Large-population ownership `(1 - beta_i / mean(beta))^+`.
pub fn asymptotic_ownership(efforts: &EffortProfile) -> Vec<f64> {
    let mean = efforts.mean();
    efforts
        .betas()
        .iter()
        .map(|b| (1.0 - b / mean).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::foc_residual;

    fn efforts(b: &[f64]) -> EffortProfile {
        EffortProfile::new(b.to_vec()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    /// Maximizes `x/(x+S) - beta x` on a fine grid of `[0, 10]`.
    fn grid_best_response(s: f64, beta: f64) -> f64 {
        let steps = 2_000_000;
        (0..=steps)
            .map(|k| 10.0 * k as f64 / steps as f64)
            .max_by(|a, b| {
                let fa = a / (a + s) - beta * a;
                let fb = b / (b + s) - beta * b;
                fa.total_cmp(&fb)
            })
            .unwrap()
    }

    #[test]
    fn closed_form_symmetric_two_player() {
        let sol = closed_form(&efforts(&[1.0, 1.0])).unwrap();
        assert_eq!(sol.strategies, vec![0.25, 0.25]);
        assert_eq!(sol.ownership, vec![0.5, 0.5]);
        assert_eq!(sol.active, vec![0, 1]);
    }

    #[test]
    fn closed_form_equal_effort_four_players() {
        let sol = closed_form(&efforts(&[2.0; 4])).unwrap();
        // (N-1)(4b - 3b)/(4b)^2 = 3/32
        assert_close(&sol.strategies, &[0.09375; 4], 1e-15);
        assert_eq!(sol.ownership, vec![0.25; 4]);
    }

    #[test]
    fn closed_form_three_player_matches_dynamics_and_foc() {
        let e = efforts(&[1.0, 1.5, 2.0]);
        let sol = closed_form(&e).unwrap();
        assert_close(
            &sol.strategies,
            &[20.0 / 81.0, 12.0 / 81.0, 4.0 / 81.0],
            1e-15,
        );
        assert_close(&sol.ownership, &[5.0 / 9.0, 3.0 / 9.0, 1.0 / 9.0], 1e-15);

        let x = StrategyProfile::new(sol.strategies.clone()).unwrap();
        let r = foc_residual(&x, &e).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");

        let init = StrategyProfile::new(vec![1.0, 1.0, 1.0]).unwrap();
        let dyn_sol = best_response_dynamics(&e, &init, 1e-10, 100_000).unwrap();
        assert_close(&dyn_sol.strategies, &sol.strategies, 1e-6);
    }

    #[test]
    fn feasibility_examples() {
        assert_eq!(feasibility(&efforts(&[0.7; 5])), vec![true; 5]);
        assert_eq!(
            feasibility(&efforts(&[1.0, 1.0, 2.0])),
            vec![true, true, false]
        );
        assert_eq!(
            feasibility(&efforts(&[1.0, 1.5, 2.0])),
            vec![true, true, true]
        );
    }

    #[test]
    fn prune_examples() {
        assert_eq!(
            prune_active(&efforts(&[1.0, 1.5, 2.0])).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(
            prune_active(&efforts(&[1.0, 1.0, 2.0])).unwrap(),
            vec![0, 1]
        );
        assert_eq!(
            prune_active(&efforts(&[1.0, 1.0, 1.0, 100.0])).unwrap(),
            vec![0, 1, 2]
        );
        // Player 3 against the surviving pair: S = 0.5.
        assert_eq!(best_response(0.5, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn prune_removes_largest_first() {
        // 1,1,1 active; 3 and 5 both violate initially, 5 goes first, then 3.
        let sol = closed_form(&efforts(&[1.0, 5.0, 1.0, 3.0, 1.0])).unwrap();
        assert_eq!(sol.active, vec![0, 2, 4]);
        assert_eq!(sol.ownership[1], 0.0);
        assert_eq!(sol.ownership[3], 0.0);
        let s = sol.total_content();
        assert_eq!(best_response(s, 3.0).unwrap(), 0.0);
        assert_eq!(best_response(s, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn spectral_matches_closed_form() {
        for b in [
            &[1.0, 1.0][..],
            &[1.0, 1.5, 2.0],
            &[0.4, 0.5, 0.45, 0.55, 0.42],
        ] {
            let e = efforts(b);
            let a = closed_form(&e).unwrap();
            let s = spectral_solve(&e).unwrap();
            assert_close(&s.strategies, &a.strategies, 1e-12);
            assert_close(&s.ownership, &a.ownership, 1e-12);
        }
        assert_close(
            &spectral_solve(&efforts(&[1.0, 1.0])).unwrap().strategies,
            &[0.25, 0.25],
            1e-15,
        );
    }

    #[test]
    fn spectral_rejects_infeasible() {
        assert_eq!(
            spectral_solve(&efforts(&[1.0, 1.0, 2.0])).unwrap_err(),
            GameError::Infeasible(2)
        );
    }

    #[test]
    fn eigenbasis_is_orthogonal_and_diagonalizes_ones() {
        for n in [2, 3, 7] {
            let p = eigenbasis(n);
            let ptp = p.transpose() * &p;
            assert!((ptp - DMatrix::identity(n, n)).abs().max() < 1e-12);
            let ones = DMatrix::from_element(n, n, 1.0);
            let d = p.transpose() * ones * &p;
            let mut want = DMatrix::zeros(n, n);
            want[(0, 0)] = n as f64;
            assert!((d - want).abs().max() < 1e-10);
        }
    }

    #[test]
    fn spectral_first_coordinate() {
        let w = SpectralWork::new(&efforts(&[1.0, 1.5, 2.0])).unwrap();
        assert_eq!(w.g, 4.5);
        assert!((w.coords[0] - 2.0 / 3f64.sqrt() / 4.5).abs() < 1e-15);
        assert_eq!(w.alphas, vec![1.0, 1.0 / 1.5, 0.5]);
    }

    #[test]
    fn best_response_examples_against_grid() {
        for &(s, b, want) in &[(0.5, 2.0, 0.0), (0.25, 1.0, 0.25), (0.25, 4.0, 0.0)] {
            let got = best_response(s, b).unwrap();
            assert!((got - want).abs() < 1e-15);
            assert!((grid_best_response(s, b) - want).abs() < 1e-5);
        }
        let got = best_response(0.1, 0.7).unwrap();
        assert!((got - grid_best_response(0.1, 0.7)).abs() < 1e-5);
        assert!(best_response(0.0, 1.0).is_err());
        assert!(best_response(-1.0, 1.0).is_err());
    }

    #[test]
    fn dynamics_symmetric() {
        let e = efforts(&[1.0, 1.0]);
        let init = StrategyProfile::new(vec![1.0, 1.0]).unwrap();
        let sol = best_response_dynamics(&e, &init, 1e-10, 10_000).unwrap();
        assert_close(&sol.strategies, &[0.25, 0.25], 1e-9);
        assert_eq!(sol.method, Method::BestResponseDynamics);
        assert!(sol.iterations.unwrap() >= 1);
    }

    #[test]
    fn dynamics_boundary_player_goes_to_zero() {
        let e = efforts(&[1.0, 1.0, 2.0]);
        let init = StrategyProfile::new(vec![1.0, 1.0, 1.0]).unwrap();
        let sol = best_response_dynamics(&e, &init, 1e-10, 100_000).unwrap();
        let cf = closed_form(&e).unwrap();
        assert_close(&sol.strategies, &cf.strategies, 1e-9);
        assert!(sol.strategies[2] < 1e-9);
    }

    #[test]
    fn dynamics_survives_single_nonzero_start() {
        let e = efforts(&[1.0, 2.0, 1.5]);
        let init = StrategyProfile::new(vec![1.0, 0.0, 0.0]).unwrap();
        let sol = best_response_dynamics(&e, &init, 1e-12, 100_000).unwrap();
        assert_close(&sol.strategies, &closed_form(&e).unwrap().strategies, 1e-9);
    }

    #[test]
    fn dynamics_errors() {
        let e = efforts(&[1.0, 1.0]);
        let zero = StrategyProfile::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            best_response_dynamics(&e, &zero, 1e-10, 10).unwrap_err(),
            GameError::ZeroTotalContent
        );
        let init = StrategyProfile::new(vec![5.0, 1.0]).unwrap();
        match best_response_dynamics(&e, &init, 1e-14, 1) {
            Err(GameError::NoConvergence {
                iterations, last, ..
            }) => {
                assert_eq!(iterations, 1);
                assert_eq!(last.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(best_response_dynamics(&e, &init, 0.0, 10).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(asymptotic_ownership(&efforts(&[3.0; 6])), vec![0.0; 6]);
        assert_close(
            &asymptotic_ownership(&efforts(&[1.0, 1.5, 2.0])),
            &[1.0 / 3.0, 0.0, 0.0],
            1e-15,
        );
    }
}
