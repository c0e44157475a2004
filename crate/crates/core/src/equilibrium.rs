//! Equilibrium measure, capacity and Green's function of a finite union of
//! intervals.
//!
//! For `E = ⋃ [a_j, b_j]` put `R(t) = ∏ (t − a_j)(t − b_j)`. The equilibrium
//! density is `ω(t) = |q(t)| / (π √|R(t)|)` where `q` is the monic polynomial
//! of degree `m − 1` whose gap integrals `∫_{b_j}^{a_{j+1}} q/√|R|` all vanish.
//! Every integral over a band or gap uses `t = c + h·cos θ`, which absorbs the
//! inverse square roots at the two ends of that band or gap.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interval_set::{Band, IntervalSet};
use crate::quadrature::{graded, GaussLegendre};

pub const DEFAULT_QUAD_POINTS: usize = 256;

const MIN_QUAD_POINTS: usize = 32;
/// Complex `θ`-distance below which the logarithmic kernel gets graded panels.
const NEAR_FIELD: f64 = 1.0;
/// Closer than this to an endpoint the Green potential is not evaluated.
const ENDPOINT_GUARD: f64 = 1e-13;
const GAP_RESIDUAL_LIMIT: f64 = 1e-8;
const MASS_LIMIT: f64 = 1e-9;
const CAPACITY_CROSS_CHECK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EquilibriumData {
    set: IntervalSet,
    q_coeffs: Vec<f64>,
    gap_zeros: Vec<f64>,
    log_capacity: f64,
    total_mass: f64,
    gap_residual: f64,
    quad_points: usize,
    rule: GaussLegendre,
}

/// Convenience wrapper for [`EquilibriumData::solve`].
pub fn solve_equilibrium(set: &IntervalSet, quad_points: usize) -> Result<EquilibriumData> {
    EquilibriumData::solve(set, quad_points)
}

impl EquilibriumData {
    pub fn solve(set: &IntervalSet, quad_points: usize) -> Result<Self> {
        if quad_points < MIN_QUAD_POINTS {
            return Err(Error::param(
                "quad_points",
                format!("{quad_points} < {MIN_QUAD_POINTS}"),
            ));
        }
        let rule = GaussLegendre::new(quad_points);
        let gap_zeros = if set.len() == 1 {
            Vec::new()
        } else {
            solve_gap_zeros(set, &rule)?
        };
        let q_coeffs = monic_from_roots(&gap_zeros);

        let mut eq = EquilibriumData {
            set: set.clone(),
            q_coeffs,
            gap_zeros,
            log_capacity: 0.0,
            total_mass: 0.0,
            gap_residual: 0.0,
            quad_points,
            rule,
        };

        eq.gap_residual = eq
            .gap_integrals()
            .into_iter()
            .fold(0.0, |acc: f64, r| acc.max(r.abs()));
        if eq.gap_residual > GAP_RESIDUAL_LIMIT {
            return Err(Error::Quadrature {
                context: format!(
                    "gap conditions hold only to {:.3e} after the solve",
                    eq.gap_residual
                ),
            });
        }
        eq.total_mass = (0..set.len()).map(|k| eq.band_mass(k)).sum();
        if (eq.total_mass - 1.0).abs() > MASS_LIMIT {
            return Err(Error::Quadrature {
                context: format!("equilibrium mass integrates to {}", eq.total_mass),
            });
        }
        eq.log_capacity = eq.robin_log_capacity();
        Ok(eq)
    }

    pub fn set(&self) -> &IntervalSet {
        &self.set
    }

    /// Monomial coefficients of `q`, lowest degree first; the last one is 1.
    pub fn q_coeffs(&self) -> &[f64] {
        &self.q_coeffs
    }

    /// The zero of `q` inside each gap.
    pub fn gap_zeros(&self) -> &[f64] {
        &self.gap_zeros
    }

    pub fn capacity(&self) -> f64 {
        self.log_capacity.exp()
    }

    pub fn log_capacity(&self) -> f64 {
        self.log_capacity
    }

    /// `∫_E ω` as computed by band quadrature.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Largest `|∫_gap q/√|R||` after the solve.
    pub fn gap_residual(&self) -> f64 {
        self.gap_residual
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    /// `q(t)` in product form.
    pub fn q_at(&self, t: f64) -> f64 {
        self.gap_zeros.iter().map(|z| t - z).product()
    }

    pub fn q_at_complex(&self, z: Complex64) -> Complex64 {
        self.gap_zeros
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &r| acc * (z - r))
    }

    /// `∏ |t − e|` over all endpoints except those of band or gap `skip`.
    fn reduced_abs_r(&self, t: f64, skip: (f64, f64)) -> f64 {
        self.set
            .endpoints()
            .filter(|&e| e != skip.0 && e != skip.1)
            .map(|e| (t - e).abs())
            .product()
    }

    /// `π ω(t) dt / dθ` on band `k`, as a function of `θ`.
    fn band_weight(&self, k: usize, theta: f64) -> f64 {
        let b = self.set.bands()[k];
        let t = b.mid() + b.half_width() * theta.cos();
        self.q_at(t).abs() / self.reduced_abs_r(t, (b.lo, b.hi)).sqrt()
    }

    fn band_mass(&self, k: usize) -> f64 {
        self.rule.integrate(0.0, PI, |th| self.band_weight(k, th)) / PI
    }

    /// The gap integrals `∫_{b_j}^{a_{j+1}} q(t)/√|R(t)| dt`.
    pub fn gap_integrals(&self) -> Vec<f64> {
        self.set
            .gaps()
            .map(|gap| {
                self.rule.integrate(0.0, PI, |th| {
                    let t = gap.mid() + gap.half_width() * th.cos();
                    self.q_at(t) / self.reduced_abs_r(t, (gap.lo, gap.hi)).sqrt()
                })
            })
            .collect()
    }

    /// Equilibrium density at an interior point.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        if !self.set.interior_contains(x) {
            return Err(Error::NotInterior { x });
        }
        let r: f64 = self.set.endpoints().map(|e| (x - e).abs()).product();
        Ok(self.q_at(x).abs() / (PI * r.sqrt()))
    }

    /// `μ_E([a, b])`.
    pub fn mass_of(&self, a: f64, b: f64) -> f64 {
        if !(a <= b) {
            return 0.0;
        }
        let mut total = 0.0;
        for (k, band) in self.set.bands().iter().enumerate() {
            let lo = a.max(band.lo);
            let hi = b.min(band.hi);
            if lo >= hi {
                continue;
            }
            if lo == band.lo && hi == band.hi {
                total += self.band_mass(k);
                continue;
            }
            let theta = |t: f64| {
                ((t - band.mid()) / band.half_width())
                    .clamp(-1.0, 1.0)
                    .acos()
            };
            let (th_lo, th_hi) = (theta(hi), theta(lo));
            total += self
                .rule
                .integrate(th_lo, th_hi, |th| self.band_weight(k, th))
                / PI;
        }
        total
    }

    /// `μ_E((−∞, x])`.
    pub fn cumulative_mass(&self, x: f64) -> f64 {
        self.mass_of(self.set.carrier().lo, x)
    }

    /// `log cap(E)` from the Robin constant of the real-axis primitive:
    /// `g(t) = ∫_{b_m}^t q/√R` for `t > b_m` and `log cap = lim (log t − g(t))`.
    fn robin_log_capacity(&self) -> f64 {
        let b = self.set.carrier().hi;
        let scale = self.set.diameter();
        let ratio = |t: f64| -> f64 {
            // q/√R for t > b_m, pairing each zero with one band
            let bands = self.set.bands();
            let mut acc = 1.0;
            for (j, band) in bands.iter().enumerate() {
                let den = ((t - band.lo) * (t - band.hi)).sqrt();
                acc *= match self.gap_zeros.get(j) {
                    Some(z) => (t - z) / den,
                    None => 1.0 / den,
                };
            }
            acc
        };
        // t = b + L s², s ∈ [0, 1]: the 1/√(t − b) factor is absorbed
        let near = self.rule.integrate(0.0, 1.0, |s| {
            let t = b + scale * s * s;
            let rest: f64 = self
                .set
                .endpoints()
                .filter(|&e| e != b)
                .map(|e| t - e)
                .product();
            2.0 * scale.sqrt() * self.q_at(t) / rest.sqrt() - 2.0 * s / (s * s + 1.0)
        });
        // t = b + L/v, v ∈ (0, 1]
        let far = self.rule.integrate(0.0, 1.0, |v| {
            let t = b + scale / v;
            (ratio(t) - v / (scale * (1.0 + v))) * scale / (v * v)
        });
        scale.ln() - (near + far)
    }

    /// `cap(E)`, cross-checked against the logarithmic potential, which must
    /// equal `log cap(E)` at every point of `E`.
    pub fn capacity_of(&self) -> Result<f64> {
        let bands = self.set.bands();
        let probes = [bands[0].mid(), bands[bands.len() - 1].mid()];
        for x in probes {
            let potential = self.log_potential(Complex64::new(x, 0.0));
            let diff = (potential - self.log_capacity).abs();
            if diff > CAPACITY_CROSS_CHECK {
                return Err(Error::Quadrature {
                    context: format!(
                        "capacity cross-check at x = {x}: potential {potential} vs Robin {}",
                        self.log_capacity
                    ),
                });
            }
        }
        Ok(self.capacity())
    }

    /// `∫ log|z − t| dμ_E(t)`.
    pub fn log_potential(&self, z: Complex64) -> f64 {
        let mut total = 0.0;
        for (k, band) in self.set.bands().iter().enumerate() {
            let (c, h) = (band.mid(), band.half_width());
            let kernel = |th: f64| {
                let t = c + h * th.cos();
                (z - t).norm().ln() * self.band_weight(k, th)
            };
            // preimage of z under θ ↦ c + h cos θ locates the log singularity
            let theta_z = ((z - c) / h).acos();
            let dist = theta_z.im.abs();
            let part = if dist < NEAR_FIELD {
                graded(0.0, PI, theta_z.re.clamp(0.0, PI), dist, kernel)
            } else {
                self.rule.integrate(0.0, PI, kernel)
            };
            total += part / PI;
        }
        total
    }

    /// Green's function of `C \ E` with pole at infinity.
    pub fn green_at(&self, z: Complex64) -> Result<f64> {
        if z.im == 0.0 && self.set.contains(z.re) {
            return Ok(0.0);
        }
        let (endpoint, _) = self.set.endpoint_distance(z.re);
        let distance = (z - endpoint).norm();
        if distance < ENDPOINT_GUARD {
            return Err(Error::NearEndpoint { endpoint, distance });
        }
        Ok((self.log_potential(z) - self.log_capacity).max(0.0))
    }

    pub fn green_at_real(&self, x: f64) -> Result<f64> {
        self.green_at(Complex64::new(x, 0.0))
    }
}

/// Chebyshev polynomials `T_0..T_n` at `x`.
fn chebyshev_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        out.push(2.0 * x * out[k - 1] - out[k - 2]);
    }
    out
}

/// Solves the gap conditions for the zeros of `q`.
///
/// In the carrier variable `x = (t − c)/h`, `q` is proportional to
/// `T_{m−1}(x)/2^{m−2} + Σ_{k<m−1} d_k T_k(x)`; the gap conditions are linear
/// in the `d_k`.
fn solve_gap_zeros(set: &IntervalSet, rule: &GaussLegendre) -> Result<Vec<f64>> {
    let m = set.len();
    let deg = m - 1;
    let carrier = set.carrier();
    let (cc, hc) = (carrier.mid(), carrier.half_width());
    let lead = 0.5f64.powi(deg as i32 - 1);
    let gaps: Vec<Band> = set.gaps().collect();
    let endpoints: Vec<f64> = set.endpoints().collect();

    let mut a = DMatrix::<f64>::zeros(deg, deg);
    let mut rhs = DVector::<f64>::zeros(deg);
    for (j, gap) in gaps.iter().enumerate() {
        for (node, w) in rule.mapped(0.0, PI) {
            let t = gap.mid() + gap.half_width() * node.cos();
            let reduced: f64 = endpoints
                .iter()
                .filter(|&&e| e != gap.lo && e != gap.hi)
                .map(|e| (t - e).abs())
                .product();
            let scale = w / reduced.sqrt();
            let tk = chebyshev_values(deg, (t - cc) / hc);
            for k in 0..deg {
                a[(j, k)] += scale * tk[k];
            }
            rhs[j] -= scale * lead * tk[deg];
        }
    }

    let sv = a.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| {
        (hi.max(s), lo.min(s))
    });
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition > 1e14 {
        return Err(Error::SingularSystem { condition });
    }
    let d = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { condition })?;

    let q_reduced = |t: f64| {
        let tk = chebyshev_values(deg, (t - cc) / hc);
        lead * tk[deg] + (0..deg).map(|k| d[k] * tk[k]).sum::<f64>()
    };
    gaps.iter()
        .map(|gap| bisect(&q_reduced, gap.lo, gap.hi))
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Quadrature {
            context: format!("gap polynomial has no sign change on [{lo}, {hi}]"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monomial coefficients (lowest first) of `∏ (t − r)`.
fn monic_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c
}
