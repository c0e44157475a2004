//! The conformal map `F` of the upper half-plane onto the comb
//! `{0 < Re w < π, Im w > 0}` minus the vertical teeth `[u_j, u_j + i v_j]`.
//!
//! `F' = i q / √R` with `√R = ∏ √(z − e)` (principal roots, one per endpoint).
//! Each factor is analytic in the open upper half-plane, so the product needs
//! no branch bookkeeping there; it is positive on `(b_m, ∞)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumData;
use crate::error::{Error, Result};
use crate::quadrature::adaptive;

/// Height of the horizontal path leg, relative to `diam(E)`.
const PATH_OFFSET: f64 = 1e-6;
const PATH_REL_TOL: f64 = 1e-10;
const PATH_ABS_TOL: f64 = 1e-15;
const MAX_SEGMENTS: usize = 20_000;
const ENDPOINT_GUARD: f64 = 1e-12;

/// Teeth abscissae `u_0..u_m`, tooth heights `v_1..v_{m-1}` and `η₀ = F(x₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombGeometry {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eta0: f64,
    pub x0: f64,
}

pub fn comb_geometry(eq: &EquilibriumData, x0: f64) -> Result<CombGeometry> {
    let set = eq.set();
    if !set.interior_contains(x0) {
        return Err(Error::NotInterior { x: x0 });
    }
    let mut u = Vec::with_capacity(set.len() + 1);
    u.push(0.0);
    let mut acc = 0.0;
    for band in set.bands() {
        acc += eq.mass_of(band.lo, band.hi);
        u.push(PI * acc);
    }
    let v = eq
        .gap_zeros()
        .iter()
        .map(|&z| eq.green_at_real(z))
        .collect::<Result<Vec<_>>>()?;
    let eta0 = PI * eq.cumulative_mass(x0);
    Ok(CombGeometry { u, v, eta0, x0 })
}

/// `h(x₀) = F'(x₀) = π ω_E(x₀)`.
pub fn h_at(eq: &EquilibriumData, x0: f64) -> Result<f64> {
    Ok(PI * eq.density_at(x0)?)
}

fn sqrt_r(eq: &EquilibriumData, t: Complex64) -> Complex64 {
    eq.set()
        .endpoints()
        .fold(Complex64::new(1.0, 0.0), |acc, e| acc * (t - e).sqrt())
}

fn derivative(eq: &EquilibriumData, t: Complex64) -> Complex64 {
    Complex64::i() * eq.q_at_complex(t) / sqrt_r(eq, t)
}

/// Bisects until adjacent samples of `√R` differ in argument by less than
/// `π/4`; a jump of `π/2` or more at the resolution floor is a branch failure.
fn check_branch(eq: &EquilibriumData, from: Complex64, to: Complex64) -> Result<()> {
    let floor = 1e-14 * eq.set().diameter().max(from.norm()).max(to.norm());
    let mut stack = vec![(from, to, sqrt_r(eq, from), sqrt_r(eq, to))];
    let mut work = 0usize;
    while let Some((p, q, rp, rq)) = stack.pop() {
        let turn = rq * rp.conj();
        // a zero sample sits exactly on an endpoint and carries no branch information
        let jump = if turn.norm() == 0.0 {
            0.0
        } else {
            turn.arg().abs()
        };
        if jump < PI / 4.0 {
            continue;
        }
        work += 1;
        if (q - p).norm() < floor || work > 100_000 {
            if jump >= PI / 2.0 {
                return Err(Error::BranchTracking {
                    at: format!("{} {:+}i", p.re, p.im),
                });
            }
            continue;
        }
        let mid = 0.5 * (p + q);
        let rm = sqrt_r(eq, mid);
        stack.push((p, mid, rp, rm));
        stack.push((mid, q, rm, rq));
    }
    Ok(())
}

/// `∫ F'` along the straight segment `from → to`. With `singular_end` the
/// segment ends at an endpoint of `E` and `t = to + (from − to) s²` absorbs
/// the inverse square root there.
fn leg(
    eq: &EquilibriumData,
    from: Complex64,
    to: Complex64,
    singular_end: bool,
) -> Result<Complex64> {
    if from == to {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_branch(eq, from, to)?;
    let delta = to - from;
    let integral = if singular_end {
        let back = from - to;
        adaptive(
            |s| {
                let t = to + back * (s * s);
                derivative(eq, t) * back * (2.0 * s)
            },
            0.0,
            1.0,
            PATH_REL_TOL,
            PATH_ABS_TOL,
            MAX_SEGMENTS,
        )?
        .value
            * -1.0
    } else {
        adaptive(
            |s| derivative(eq, from + delta * s) * delta,
            0.0,
            1.0,
            PATH_REL_TOL,
            PATH_ABS_TOL,
            MAX_SEGMENTS,
        )?
        .value
    };
    Ok(integral)
}

fn path_value(
    eq: &EquilibriumData,
    geom: &CombGeometry,
    z: Complex64,
    endpoint: bool,
) -> Result<Complex64> {
    let x0 = Complex64::new(geom.x0, 0.0);
    if z == x0 {
        return Ok(Complex64::new(geom.eta0, 0.0));
    }
    let delta = PATH_OFFSET * eq.set().diameter();
    let mut w = Complex64::new(geom.eta0, 0.0);
    if z.im >= delta {
        let corner = Complex64::new(geom.x0, z.im);
        w += leg(eq, x0, corner, false)?;
        w += leg(eq, corner, z, false)?;
    } else {
        let c1 = Complex64::new(geom.x0, delta);
        let c2 = Complex64::new(z.re, delta);
        w += leg(eq, x0, c1, false)?;
        w += leg(eq, c1, c2, false)?;
        w += leg(eq, c2, z, endpoint)?;
    }
    if w.im < -1e-8 {
        return Err(Error::BranchTracking {
            at: format!("Im F({} {:+}i) = {}", z.re, z.im, w.im),
        });
    }
    Ok(w)
}

/// `F(z)` for `Im z ≥ 0`, by path integration from `x₀`.
pub fn f_at(eq: &EquilibriumData, geom: &CombGeometry, z: Complex64) -> Result<Complex64> {
    if z.im < 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::param(
            "z",
            format!("{z} is not in the closed upper half-plane"),
        ));
    }
    let (endpoint, _) = eq.set().endpoint_distance(z.re);
    let distance = (z - endpoint).norm();
    if distance < ENDPOINT_GUARD {
        return Err(Error::NearEndpoint { endpoint, distance });
    }
    path_value(eq, geom, z, false)
}

/// `F` at an endpoint of `E`, where the integrand has an inverse square-root
/// singularity.
pub fn f_at_endpoint(
    eq: &EquilibriumData,
    geom: &CombGeometry,
    endpoint: f64,
) -> Result<Complex64> {
    if !eq.set().endpoints().any(|e| e == endpoint) {
        return Err(Error::param(
            "endpoint",
            format!("{endpoint} is not an endpoint of the set"),
        ));
    }
    path_value(eq, geom, Complex64::new(endpoint, 0.0), true)
}

/// Largest deviations found by [`check_comb_identities`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombReport {
    /// `max |Im F − g|` over samples off `E`.
    pub green_identity: f64,
    /// `max |Im F|` over samples on `E`.
    pub real_on_set: f64,
    /// `max |F(a_j) − u_{j−1}|, |F(b_j) − u_j|`.
    pub vertices: f64,
    /// `|F'(x₀) − h(x₀)| / h(x₀)` with `F'` by central difference.
    pub derivative: f64,
    pub samples: usize,
}

pub fn check_comb_identities(
    eq: &EquilibriumData,
    geom: &CombGeometry,
    sample_count: usize,
) -> Result<CombReport> {
    let set = eq.set();
    let carrier = set.carrier();
    let diam = set.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut green_identity: f64 = 0.0;
    let mut real_on_set: f64 = 0.0;
    for _ in 0..sample_count {
        let re = rng.random_range(carrier.lo - 0.25 * diam..carrier.hi + 0.25 * diam);
        let im = diam * 10f64.powf(rng.random_range(-3.0..0.0));
        let z = Complex64::new(re, im);
        let f = f_at(eq, geom, z)?;
        green_identity = green_identity.max((f.im - eq.green_at(z)?).abs());

        let band = set.bands()[rng.random_range(0..set.len())];
        let pad = 1e-6 * band.len();
        let x = rng.random_range(band.lo + pad..band.hi - pad);
        real_on_set = real_on_set.max(f_at(eq, geom, Complex64::new(x, 0.0))?.im.abs());
    }

    let mut vertices: f64 = 0.0;
    for (j, band) in set.bands().iter().enumerate() {
        let left = f_at_endpoint(eq, geom, band.lo)?;
        let right = f_at_endpoint(eq, geom, band.hi)?;
        vertices = vertices
            .max((left - geom.u[j]).norm())
            .max((right - geom.u[j + 1]).norm());
    }

    let x0 = geom.x0;
    let band = set.bands()[set.band_index(x0).expect("x0 is interior")];
    let step = 1e-6 * band.len();
    let fp = f_at(eq, geom, Complex64::new(x0 + step, 0.0))?;
    let fm = f_at(eq, geom, Complex64::new(x0 - step, 0.0))?;
    let numeric = (fp.re - fm.re) / (2.0 * step);
    let h = h_at(eq, x0)?;

    Ok(CombReport {
        green_identity,
        real_on_set,
        vertices,
        derivative: (numeric - h).abs() / h,
        samples: sample_count,
    })
}
