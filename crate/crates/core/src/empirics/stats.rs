use rand::Rng;
use serde::Serialize;

use super::EmpiricsError;

/// Product-moment correlation of two equally long samples.
pub fn pearson(a: &[f64], d: &[f64]) -> Result<f64, EmpiricsError> {
    if a.len() != d.len() {
        return Err(EmpiricsError::LengthMismatch(a.len(), d.len()));
    }
    if a.len() < 2 {
        return Err(EmpiricsError::TooFewPoints(a.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let md = d.iter().sum::<f64>() / n;
    let (mut sad, mut saa, mut sdd) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(d) {
        let (dx, dy) = (x - ma, y - md);
        sad += dx * dy;
        saa += dx * dx;
        sdd += dy * dy;
    }
    if saa == 0.0 || sdd == 0.0 {
        return Err(EmpiricsError::ZeroVariance);
    }
    Ok((sad / (saa.sqrt() * sdd.sqrt())).clamp(-1.0, 1.0))
}

/// Least-squares line `d = rho * a + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub rho: f64,
    pub delta: f64,
}

impl LinearFit {
    pub fn predict(&self, a: f64) -> f64 {
        self.rho * a + self.delta
    }
}

pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit, EmpiricsError> {
    if points.len() < 2 {
        return Err(EmpiricsError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let ma = points.iter().map(|p| p.0).sum::<f64>() / n;
    let md = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sad, mut saa) = (0.0, 0.0);
    for &(a, d) in points {
        sad += (a - ma) * (d - md);
        saa += (a - ma) * (a - ma);
    }
    if saa == 0.0 {
        return Err(EmpiricsError::ConstantRegressor);
    }
    let rho = sad / saa;
    Ok(LinearFit {
        rho,
        delta: md - rho * ma,
    })
}

/// Mean absolute prediction error as a percentage of the mean observed value.
pub fn holdout_error(fit: &LinearFit, holdout: &[(f64, f64)]) -> Result<f64, EmpiricsError> {
    if holdout.is_empty() {
        return Err(EmpiricsError::EmptyHoldout);
    }
    let m = holdout.len() as f64;
    let mae = holdout
        .iter()
        .map(|&(a, d)| (d - fit.predict(a)).abs())
        .sum::<f64>()
        / m;
    let mean_obs = holdout.iter().map(|p| p.1).sum::<f64>() / m;
    if mean_obs == 0.0 {
        return Err(EmpiricsError::ZeroMeanObserved);
    }
    Ok(100.0 * mae / mean_obs)
}

/// Groups indices whose values chain together within `tol` (single linkage
/// over the sorted values). Classes come out by descending value; members of
/// a class are in descending value, ties by index.
pub fn equivalence_classes(values: &[f64], tol: f64) -> Result<Vec<Vec<usize>>, EmpiricsError> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(EmpiricsError::InvalidTolerance(tol));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for i in order {
        match prev {
            Some(p) if p - values[i] <= tol => classes.last_mut().unwrap().push(i),
            _ => classes.push(vec![i]),
        }
        prev = Some(values[i]);
    }
    Ok(classes)
}

/// Perturbs ownership shares by uniform noise of amplitude `eta`, clips at
/// zero and renormalizes to sum 1.
pub fn inject_noise<R: Rng + ?Sized>(observed: &[f64], eta: f64, rng: &mut R) -> Vec<f64> {
    let noisy: Vec<f64> = observed
        .iter()
        .map(|d| (d + eta * rng.random_range(-1.0..=1.0)).max(0.0))
        .collect();
    let total: f64 = noisy.iter().sum();
    if total > 0.0 {
        noisy.iter().map(|v| v / total).collect()
    } else {
        observed.to_vec()
    }
}
