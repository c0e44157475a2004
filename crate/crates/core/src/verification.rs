//! The constant chain `c, c₁, …, c₅` attached to `(E, x₀)` and numerical
//! checks of the bounds it controls: tooth heights, the comb ratio bound,
//! the local Lipschitz bound for `F` and `g`, the far-field bound, Green's
//! function monotonicity along an exhaustion, and the rate/Lipschitz
//! dichotomy table.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comb_map::{comb_geometry, f_at, h_at, CombGeometry};
use crate::equilibrium::{EquilibriumData, DEFAULT_QUAD_POINTS};
use crate::error::{Error, Result};
use crate::interval_set::{ExhaustionSequence, IntervalSet};
use crate::minimax::{en_sequence, is_even_integer, DEFAULT_TOL};

/// Slack keeping the strict inequalities `h(x₀) ≤ c`, `cap(E) > 1/c` strict in floating point.
pub const SAFETY: f64 = 1e-4;
pub const DEFAULT_Y_MIN: f64 = 1e-8;
pub const DEFAULT_Y_MAX: f64 = 10.0;
pub const POINTS_PER_DECADE: usize = 8;
pub const DEFAULT_LEMMA23_SAMPLES: usize = 200;
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `None` when `c₄` exceeds the `f64` range; see `ln_c4`.
    pub c4: Option<f64>,
    pub ln_c4: f64,
    pub c5: f64,
    pub h: f64,
    pub capacity: f64,
    pub z0: Complex64,
    /// `Im F(z₀) = g(z₀)`.
    pub w0_im: f64,
    /// `|F(z₀) − η₀|`.
    #[serde(rename = "R0")]
    pub r0: f64,
}

/// The pure arithmetic part of the chain: `(c₁, c₂, c₃, ln c₄, c₅)` from `c`.
pub fn constant_chain(c: f64) -> (f64, f64, f64, f64, f64) {
    let c1 = 4.0 * PI + (2.0 * c).ln();
    let c2 = (c * c / c1).ln() / PI + 7.0;
    let c3 = 4.0 * (3.0 * PI * c2).exp();
    let c5 = c2 + 4.0 + 2.0 * PI * c3 * c3;
    let ln_c4 = ((c1 + 1.0) / c).ln() + PI * c5;
    (c1, c2, c3, ln_c4, c5)
}

/// Builds the ledger for `(E, x₀)` and asserts `c > 2`, `h(x₀) ≤ c`,
/// `cap(E) > 1/c` and `c₁ < Im F(z₀) < 2c₁`.
pub fn build_constants(eq: &EquilibriumData, geom: &CombGeometry) -> Result<ConstantsLedger> {
    let x0 = geom.x0;
    let h = h_at(eq, x0)?;
    let capacity = eq.capacity();
    let c = (2.0 + SAFETY).max(h).max((1.0 + SAFETY) / capacity);
    let (c1, c2, c3, ln_c4, c5) = constant_chain(c);
    let c4 = Some(ln_c4.exp()).filter(|v| v.is_finite());
    let z0 = Complex64::new(x0, 2.0 * c * (4.0 * PI).exp());
    let w0_im = eq.green_at(z0)?;
    let w0 = f_at(eq, geom, z0)?;
    let r0 = Complex64::new(w0.re - geom.eta0, w0_im).norm();

    if !(c > 2.0 && h <= c && capacity > 1.0 / c) {
        return Err(Error::BoundViolation {
            context: format!("c = {c} fails c > 2, h = {h} <= c, cap = {capacity} > 1/c"),
        });
    }
    if !(c1 < w0_im && w0_im < 2.0 * c1) {
        return Err(Error::BoundViolation {
            context: format!("Im F(z0) = {w0_im} outside ({c1}, {})", 2.0 * c1),
        });
    }
    Ok(ConstantsLedger {
        c,
        c1,
        c2,
        c3,
        c4,
        ln_c4,
        c5,
        h,
        capacity,
        z0,
        w0_im,
        r0,
    })
}

/// `v_j < log(2c)` for every tooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToothReport {
    pub heights: Vec<f64>,
    pub bound: f64,
    /// `log(2c) − max v_j` (the bound itself when there are no teeth).
    pub margin: f64,
    pub passed: bool,
}

pub fn tooth_check(geom: &CombGeometry, ledger: &ConstantsLedger) -> ToothReport {
    let bound = (2.0 * ledger.c).ln();
    let top = geom.v.iter().cloned().fold(0.0f64, f64::max);
    ToothReport {
        heights: geom.v.clone(),
        bound,
        margin: bound - top,
        passed: geom.v.iter().all(|&v| v < bound),
    }
}

/// `√((η₀ − u_j)² + v_j²) / |η₀ − u_j| ≤ c₃` for the interior teeth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma22Report {
    pub ratios: Vec<f64>,
    pub c3: f64,
    /// `log c₃ − log max ratio`.
    pub margin: f64,
    pub passed: bool,
}

pub fn lemma22_check(geom: &CombGeometry, ledger: &ConstantsLedger) -> Lemma22Report {
    let ratios: Vec<f64> = geom
        .v
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let d = (geom.eta0 - geom.u[k + 1]).abs();
            d.hypot(v) / d
        })
        .collect();
    let top = ratios.iter().cloned().fold(1.0f64, f64::max);
    Lemma22Report {
        passed: ratios.iter().all(|&r| r <= ledger.c3),
        margin: ledger.c3.ln() - top.ln(),
        ratios,
        c3: ledger.c3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub z: Complex64,
    pub reason: String,
}

/// `|F(z) − η₀| ≤ c₄|z − x₀|` and `g(z) ≤ c₄|z − x₀|` on half circles
/// around `x₀` with log-spaced radii in `[1e−6, 2c)`. Comparisons are in log
/// space since `c₄` overflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma23Report {
    pub samples: usize,
    pub ln_c4: f64,
    /// `max log(|F(z) − η₀| / |z − x₀|)`.
    pub max_log_ratio: f64,
    /// `max log(g(z) / |z − x₀|)`.
    pub max_log_green_ratio: f64,
    pub failures: Vec<SampleFailure>,
    /// `ln c₄ − max log ratio` over both bounds.
    pub margin: f64,
    pub passed: bool,
    pub lipschitz_passed: bool,
}

pub fn lemma23_check(
    eq: &EquilibriumData,
    geom: &CombGeometry,
    ledger: &ConstantsLedger,
    sample_count: usize,
) -> Result<Lemma23Report> {
    if sample_count == 0 {
        return Err(Error::param("sample_count", "need at least one sample"));
    }
    let x0 = geom.x0;
    let radii_count = (sample_count as f64).sqrt().ceil() as usize;
    let angle_count = sample_count.div_ceil(radii_count);
    let (r_lo, r_hi) = (1e-6f64, 2.0 * ledger.c);
    let mut max_log_ratio = f64::NEG_INFINITY;
    let mut max_log_green_ratio = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let mut taken = 0;
    'outer: for i in 0..radii_count {
        // right end open: the largest radius stays below 2c
        let r = r_lo * (r_hi / r_lo).powf(i as f64 / radii_count as f64);
        for j in 0..angle_count {
            if taken == sample_count {
                break 'outer;
            }
            taken += 1;
            let theta = PI * (j as f64 + 0.5) / angle_count as f64;
            let z = Complex64::new(x0, 0.0) + Complex64::from_polar(r, theta);
            match f_at(eq, geom, z).and_then(|w| Ok((w, eq.green_at(z)?))) {
                Ok((w, g)) => {
                    let lr = ((w - geom.eta0).norm() / r).ln();
                    max_log_ratio = max_log_ratio.max(lr);
                    if g > 0.0 {
                        max_log_green_ratio = max_log_green_ratio.max((g / r).ln());
                    }
                }
                Err(e) => failures.push(SampleFailure {
                    z,
                    reason: e.to_string(),
                }),
            }
        }
    }
    let worst = max_log_ratio.max(max_log_green_ratio);
    Ok(Lemma23Report {
        samples: taken,
        ln_c4: ledger.ln_c4,
        max_log_ratio,
        max_log_green_ratio,
        margin: ledger.ln_c4 - worst,
        passed: failures.is_empty() && max_log_ratio <= ledger.ln_c4,
        lipschitz_passed: failures.is_empty() && max_log_green_ratio <= ledger.ln_c4,
        failures,
    })
}

/// `y_max·10^{−k/s}` down to `y_min`. Anchoring at `y_max` makes the grid for
/// a smaller `y_min`, or for `2s` points per decade, a superset.
fn log_grid(y_min: f64, y_max: f64, per_decade: usize) -> Vec<f64> {
    let mut ys = Vec::new();
    let mut k = 0;
    loop {
        let y = y_max * 10f64.powf(-(k as f64) / per_decade as f64);
        if y < y_min * (1.0 - 1e-12) {
            break;
        }
        ys.push(y);
        k += 1;
    }
    ys
}

/// Lower estimate of `sup g(z)/|z − x₀|` from `z = x₀ + iy` and the 45° and
/// 135° rays at radii `y` (log grid, `samples` per decade), plus gap midpoints.
pub fn lipschitz_sup(
    eq: &EquilibriumData,
    x0: f64,
    y_min: f64,
    y_max: f64,
    samples: usize,
) -> Result<f64> {
    if !(y_min > 0.0 && y_min < y_max) {
        return Err(Error::param(
            "y_min",
            format!("need 0 < y_min < y_max, got {y_min}, {y_max}"),
        ));
    }
    if samples == 0 {
        return Err(Error::param(
            "samples",
            "need at least one point per decade",
        ));
    }
    let directions = [
        Complex64::i(),
        Complex64::from_polar(1.0, PI / 4.0),
        Complex64::from_polar(1.0, 3.0 * PI / 4.0),
    ];
    let mut sup: f64 = 0.0;
    for y in log_grid(y_min, y_max, samples) {
        for d in directions {
            let g = eq.green_at(Complex64::new(x0, 0.0) + d * y)?;
            sup = sup.max(g / y);
        }
    }
    for gap in eq.set().gaps() {
        let g = eq.green_at_real(gap.mid())?;
        sup = sup.max(g / (gap.mid() - x0).abs());
    }
    Ok(sup)
}

/// `g(z) ≤ log(2c|z − x₀|)` on circles of radius `≥ 2c` about `x₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldReport {
    pub radii: Vec<f64>,
    /// `min log(2c|z − x₀|) − g(z)`.
    pub margin: f64,
    pub passed: bool,
}

pub const FARFIELD_ANGLES: usize = 16;

pub fn farfield_check(
    eq: &EquilibriumData,
    ledger: &ConstantsLedger,
    x0: f64,
    radii: &[f64],
) -> Result<FarFieldReport> {
    if radii.is_empty() {
        return Err(Error::param("radii", "empty radius list"));
    }
    if let Some(&r) = radii.iter().find(|&&r| !(r >= 2.0 * ledger.c)) {
        return Err(Error::param(
            "radii",
            format!("radius {r} < 2c = {}", 2.0 * ledger.c),
        ));
    }
    let mut margin = f64::INFINITY;
    for &r in radii {
        for k in 0..FARFIELD_ANGLES {
            let theta = PI * (k as f64 + 0.5) / FARFIELD_ANGLES as f64;
            let z = Complex64::new(x0, 0.0) + Complex64::from_polar(r, theta);
            let g = eq.green_at(z)?;
            margin = margin.min((2.0 * ledger.c * r).ln() - g);
        }
    }
    Ok(FarFieldReport {
        radii: radii.to_vec(),
        margin,
        passed: margin > 0.0,
    })
}

/// `g_{C∖E_j}(z)` along an exhaustion at each sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub z: Vec<Complex64>,
    /// `values[k][j] = g_{C∖E_j}(z_k)`.
    pub values: Vec<Vec<f64>>,
    /// `differences[k][j] = values[k][j+1] − values[k][j]`.
    pub differences: Vec<Vec<f64>>,
}

/// Errors with [`Error::Monotonicity`] if some `g_{C∖E_j}(z)` decreases by
/// more than `1e−9` as `j` grows.
pub fn exhaustion_green_check(
    exh: &ExhaustionSequence,
    z_samples: &[Complex64],
) -> Result<ExhaustionReport> {
    if exh.levels.len() < 2 {
        return Err(Error::param("levels", "need at least two levels"));
    }
    let eqs = exh
        .levels
        .par_iter()
        .map(|set| EquilibriumData::solve(set, DEFAULT_QUAD_POINTS))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(z_samples.len());
    let mut differences = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        let g = eqs
            .iter()
            .map(|eq| eq.green_at(z))
            .collect::<Result<Vec<_>>>()?;
        let d: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(j) = d.iter().position(|&x| x < -MONOTONE_SLACK) {
            return Err(Error::Monotonicity {
                context: format!(
                    "g at {z} drops from {} to {} at level {}",
                    g[j],
                    g[j + 1],
                    j + 1
                ),
            });
        }
        values.push(g);
        differences.push(d);
    }
    Ok(ExhaustionReport {
        z: z_samples.to_vec(),
        values,
        differences,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyLevel {
    pub level: usize,
    pub bands: usize,
    /// `(n, n^α E_n)` on this level.
    pub rates: Vec<(usize, f64)>,
    /// `(y_min, lipschitz_sup)` for each floor.
    pub sup_estimates: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub x0: f64,
    pub alpha: f64,
    pub levels: Vec<DichotomyLevel>,
}

/// Per exhaustion level, the rate ladder `n^α E_n` next to `lipschitz_sup`
/// at decreasing floors `y_min`. Reports trends only.
pub fn dichotomy_report(
    exh: &ExhaustionSequence,
    x0: f64,
    alpha: f64,
    degrees: &[usize],
    y_floors: &[f64],
) -> Result<DichotomyReport> {
    if is_even_integer(alpha) {
        return Err(Error::EvenIntegerAlpha { alpha });
    }
    if let Some(set) = exh.levels.iter().find(|s| !s.interior_contains(x0)) {
        let _ = set;
        return Err(Error::NotInterior { x: x0 });
    }
    let mut floors = y_floors.to_vec();
    floors.sort_by(|a, b| b.total_cmp(a));
    let levels = exh
        .levels
        .iter()
        .enumerate()
        .map(|(level, set)| {
            let seq = en_sequence(set, x0, alpha, degrees, DEFAULT_TOL)?;
            let rates = seq
                .iter()
                .map(|s| (s.n, (s.n as f64).powf(alpha) * s.error))
                .collect();
            let eq = EquilibriumData::solve(set, DEFAULT_QUAD_POINTS)?;
            let sup_estimates = floors
                .iter()
                .map(|&y| {
                    Ok((
                        y,
                        lipschitz_sup(&eq, x0, y, DEFAULT_Y_MAX, POINTS_PER_DECADE)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DichotomyLevel {
                level,
                bands: set.len(),
                rates,
                sup_estimates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DichotomyReport { x0, alpha, levels })
}

/// A random union of `2..=4` bands tiling `[−1, 1]` with bands and gaps
/// at least `0.05` long, and `x₀` the midpoint of a random band.
pub fn random_set(rng: &mut impl Rng) -> Result<(IntervalSet, f64)> {
    const MIN_PIECE: f64 = 0.05;
    let m: usize = rng.random_range(2..=4);
    let pieces = 2 * m - 1;
    // uniform on the simplex via normalized exponentials
    let e: Vec<f64> = (0..pieces)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = e.iter().sum();
    let free = 2.0 - MIN_PIECE * pieces as f64;
    let mut bands = Vec::with_capacity(m);
    let mut x = -1.0;
    for (k, &w) in e.iter().enumerate() {
        let next = if k + 1 == pieces {
            1.0
        } else {
            x + MIN_PIECE + free * w / total
        };
        if k % 2 == 0 {
            bands.push((x, next));
        }
        x = next;
    }
    let set = IntervalSet::normalize(&bands)?;
    let x0 = set.bands()[rng.random_range(0..m)].mid();
    Ok((set, x0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub set: IntervalSet,
    pub x0: f64,
    pub ledger: ConstantsLedger,
    pub teeth: ToothReport,
    pub lemma22: Lemma22Report,
    pub lemma23: Lemma23Report,
    pub farfield: FarFieldReport,
    pub passed: bool,
}

/// Radii, as multiples of `c`, used for the far-field check in trials.
pub const FARFIELD_MULTIPLES: [f64; 3] = [2.0, 10.0, 1000.0];

/// The proved-bound suite on one `(E, x₀)`. Numerical failures propagate;
/// bound failures show up as `passed == false`.
pub fn verify_set(
    set: &IntervalSet,
    x0: f64,
    trial: usize,
    lemma23_samples: usize,
) -> Result<TrialReport> {
    let eq = EquilibriumData::solve(set, DEFAULT_QUAD_POINTS)?;
    let geom = comb_geometry(&eq, x0)?;
    let ledger = build_constants(&eq, &geom)?;
    let teeth = tooth_check(&geom, &ledger);
    let lemma22 = lemma22_check(&geom, &ledger);
    let lemma23 = lemma23_check(&eq, &geom, &ledger, lemma23_samples)?;
    let radii: Vec<f64> = FARFIELD_MULTIPLES.iter().map(|k| k * ledger.c).collect();
    let farfield = farfield_check(&eq, &ledger, x0, &radii)?;
    let passed = teeth.passed
        && lemma22.passed
        && lemma23.passed
        && lemma23.lipschitz_passed
        && farfield.passed;
    Ok(TrialReport {
        trial,
        set: set.clone(),
        x0,
        ledger,
        teeth,
        lemma22,
        lemma23,
        farfield,
        passed,
    })
}

/// `count` independent trials on random sets; trial `k` draws from
/// ChaCha8 stream `k` of `seed`.
pub fn random_trials(seed: u64, count: usize, lemma23_samples: usize) -> Result<Vec<TrialReport>> {
    (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let (set, x0) = random_set(&mut rng)?;
            verify_set(&set, x0, k, lemma23_samples)
        })
        .collect()
}
