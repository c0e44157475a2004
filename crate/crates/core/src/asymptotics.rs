//! Limits of `n^α E_n`: least-squares extrapolation, the Bernstein constant
//! `σ_α` on `[−1, 1]`, and the Vasiliev–Totik identity
//! `lim n^α E_n(|x − x₀|^α, E) = h(x₀)^{−α} σ_α`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::comb_map::h_at;
use crate::equilibrium::{EquilibriumData, DEFAULT_QUAD_POINTS};
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::minimax::{en_sequence, is_even_integer, DEFAULT_TOL};

pub const DEFAULT_LADDER: [usize; 6] = [20, 28, 40, 56, 80, 112];
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub alpha: f64,
    pub x0: f64,
    /// `(n, n^α E_n)`.
    pub samples: Vec<(usize, f64)>,
    pub extrapolated_limit: f64,
    /// Largest sample over the upper half of the ladder.
    pub limsup_estimate: f64,
    pub fit_residual: f64,
}

/// Fits `value(n) = L + a/n + b/n²` by least squares; returns `L` and the RMS residual.
pub fn extrapolate_rate(samples: &[(usize, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::param(
            "samples",
            format!("{} samples, extrapolation needs at least 4", samples.len()),
        ));
    }
    fit(samples, 3)
}

/// Least squares in the first `terms` of `1, 1/n, 1/n²`.
fn fit(samples: &[(usize, f64)], terms: usize) -> Result<(f64, f64)> {
    let mut distinct: Vec<usize> = samples.iter().map(|s| s.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.contains(&0) {
        return Err(Error::param("samples", "degree 0 has no rate"));
    }
    if distinct.len() < terms {
        return Err(Error::DegenerateFit {
            reason: format!("{} distinct degrees for {terms} fit terms", distinct.len()),
        });
    }
    let a = DMatrix::from_fn(samples.len(), terms, |i, j| {
        (samples[i].0 as f64).powi(-(j as i32))
    });
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::DegenerateFit {
            reason: e.to_string(),
        })?;
    let resid = &a * &coef - &y;
    let rms = (resid.norm_squared() / samples.len() as f64).sqrt();
    Ok((coef[0], rms))
}

/// Degrees used for a rate on `(E, x₀)`: the even members of `degrees` when `E`
/// is symmetric about `x₀` (where `E_{2k} = E_{2k+1}`), otherwise every
/// integer between the smallest and largest entry.
pub fn ladder_for(set: &IntervalSet, x0: f64, degrees: &[usize]) -> Vec<usize> {
    let (Some(&lo), Some(&hi)) = (degrees.iter().min(), degrees.iter().max()) else {
        return Vec::new();
    };
    if set.is_symmetric_about(x0, SYMMETRY_TOL * set.diameter()) {
        let mut even: Vec<usize> = degrees.iter().copied().filter(|n| n % 2 == 0).collect();
        even.sort_unstable();
        even.dedup();
        even
    } else {
        (lo..=hi).collect()
    }
}

/// `n^α E_n(|x − x₀|^α, E)` over `degrees` and its extrapolated limit.
pub fn rate_report(
    set: &IntervalSet,
    x0: f64,
    alpha: f64,
    degrees: &[usize],
    tol: f64,
) -> Result<RateReport> {
    if is_even_integer(alpha) {
        return Err(Error::EvenIntegerAlpha { alpha });
    }
    if degrees.is_empty() {
        return Err(Error::param("degrees", "empty degree list"));
    }
    let seq = en_sequence(set, x0, alpha, degrees, tol)?;
    let samples: Vec<(usize, f64)> = seq
        .iter()
        .map(|s| (s.n, (s.n as f64).powf(alpha) * s.error))
        .collect();
    // short ladders get the richest model they determine
    let (limit, residual) = fit(&samples, samples.len().min(3))?;
    if !(limit >= 0.0) {
        return Err(Error::DegenerateFit {
            reason: format!("negative extrapolated limit {limit}"),
        });
    }
    let tail = &samples[samples.len() / 2..];
    let limsup_estimate = tail.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateReport {
        alpha,
        x0,
        samples,
        extrapolated_limit: limit,
        limsup_estimate,
        fit_residual: residual,
    })
}

/// `σ_α = lim n^α E_n(|x|^α, [−1, 1])` from an even degree ladder.
pub fn sigma_alpha(alpha: f64, degrees: &[usize], tol: f64) -> Result<RateReport> {
    if degrees.iter().any(|n| n % 2 == 1) {
        return Err(Error::param(
            "degrees",
            "the Bernstein ladder uses even degrees only",
        ));
    }
    let set = IntervalSet::segment(-1.0, 1.0)?;
    rate_report(&set, 0.0, alpha, degrees, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VtReport {
    pub lhs_limit: f64,
    /// `h(x₀)^{−α} σ_α`.
    pub rhs: f64,
    /// `|lhs − rhs| / rhs`.
    pub relative_gap: f64,
    pub h: f64,
    pub sigma: f64,
    pub lhs: RateReport,
}

/// Compares the extrapolated rate on `E` with `h(x₀)^{−α} σ_α`. The degrees
/// pass through [`ladder_for`]; `σ_α` uses their even members.
pub fn vt_check(set: &IntervalSet, x0: f64, alpha: f64, degrees: &[usize]) -> Result<VtReport> {
    let even: Vec<usize> = ladder_for(&IntervalSet::segment(-1.0, 1.0)?, 0.0, degrees);
    let sigma = sigma_alpha(alpha, &even, DEFAULT_TOL)?;
    vt_check_with_sigma(set, x0, alpha, degrees, &sigma)
}

/// [`vt_check`] against a precomputed `σ_α` report.
pub fn vt_check_with_sigma(
    set: &IntervalSet,
    x0: f64,
    alpha: f64,
    degrees: &[usize],
    sigma: &RateReport,
) -> Result<VtReport> {
    if !set.interior_contains(x0) {
        return Err(Error::NotInterior { x: x0 });
    }
    if sigma.alpha != alpha {
        return Err(Error::param(
            "sigma",
            format!("report is for alpha {} not {alpha}", sigma.alpha),
        ));
    }
    let eq = EquilibriumData::solve(set, DEFAULT_QUAD_POINTS)?;
    let h = h_at(&eq, x0)?;
    let lhs = rate_report(set, x0, alpha, &ladder_for(set, x0, degrees), DEFAULT_TOL)?;
    let rhs = h.powf(-alpha) * sigma.extrapolated_limit;
    Ok(VtReport {
        lhs_limit: lhs.extrapolated_limit,
        rhs,
        relative_gap: (lhs.extrapolated_limit - rhs).abs() / rhs,
        h,
        sigma: sigma.extrapolated_limit,
        lhs,
    })
}
