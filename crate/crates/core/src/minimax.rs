//! Best uniform approximation of `f(x) = |x − x₀|^α` on a union of intervals
//! by polynomials of degree `≤ n`, via the Remez exchange algorithm.
//!
//! The polynomial is held in barycentric form on the current reference of
//! `n + 2` points: the levelled error is `h = Σ wᵢ fᵢ / Σ wᵢ (−1)ⁱ` and `p`
//! interpolates `fᵢ − (−1)ⁱ h`. Unlike a coefficient basis on the carrier,
//! this stays well conditioned when `E` has gaps, where a degree-`n`
//! polynomial bounded on `E` can reach `e^{n·g}` on the gaps.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::equilibrium::{EquilibriumData, DEFAULT_QUAD_POINTS};
use crate::error::{Error, Result};
use crate::interval_set::{Band, IntervalSet};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;
/// Degrees above this accumulate barycentric sums in double-double.
const EXTENDED_PRECISION_DEGREE: usize = 60;
const TIE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxProblem {
    pub set: IntervalSet,
    pub x0: f64,
    pub alpha: f64,
    pub degree: usize,
}

impl MinimaxProblem {
    pub fn new(set: IntervalSet, x0: f64, alpha: f64, degree: usize) -> Result<Self> {
        if !set.contains(x0) {
            return Err(Error::NotInSet { x: x0 });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(
                "alpha",
                format!("{alpha} is not a positive real"),
            ));
        }
        Ok(MinimaxProblem {
            set,
            x0,
            alpha,
            degree,
        })
    }

    pub fn with_degree(&self, degree: usize) -> Self {
        MinimaxProblem {
            degree,
            ..self.clone()
        }
    }

    pub fn target(&self, x: f64) -> f64 {
        (x - self.x0).abs().powf(self.alpha)
    }

    /// `|x − x₀|^α` is a polynomial of degree `α` when `α` is an even integer.
    pub fn is_polynomial_target(&self) -> bool {
        is_even_integer(self.alpha) && self.degree as f64 >= self.alpha
    }

    /// Default per-band grid size `max(2000/m, 30(n+1)/m)`.
    pub fn default_grid(&self) -> usize {
        let m = self.set.len();
        (2000 / m).max((30 * (self.degree + 1)).div_ceil(m))
    }

    fn min_grid(&self) -> usize {
        (10 * (self.degree + 1)).div_ceil(self.set.len()).max(2)
    }
}

pub fn is_even_integer(alpha: f64) -> bool {
    alpha.fract() == 0.0 && (alpha as i64) % 2 == 0
}

/// Polynomial in barycentric form on distinct nodes.
///
/// Inside the node hull's bands the second (true) barycentric formula is used;
/// in gaps and outside, where its denominator cancels, the first form
/// `ℓ(x) Σ wᵢ yᵢ / (x − xᵢ)` with `ℓ(x) = ∏(x − xᵢ)` accumulated in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barycentric {
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// `1/∏(xᵢ − xⱼ)` scaled by `e^{−log_scale}`.
    weights: Vec<f64>,
    log_scale: f64,
    extended: bool,
}

impl Barycentric {
    fn new(nodes: Vec<f64>, values: Vec<f64>, extended: bool) -> Self {
        let n = nodes.len();
        let logs: Vec<f64> = (0..n)
            .map(|i| {
                -(0..n)
                    .filter(|&j| j != i)
                    .map(|j| (nodes[i] - nodes[j]).abs().ln())
                    .sum::<f64>()
            })
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = logs
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                // sign of ∏_{j≠i}(xᵢ − xⱼ) for sorted nodes
                let sign = if (n - 1 - i).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (l - top).exp()
            })
            .collect();
        Barycentric {
            nodes,
            values,
            weights,
            log_scale: top,
            extended,
        }
    }

    /// `(Σ wᵢ yᵢ/(x − xᵢ), Σ wᵢ/(x − xᵢ))`.
    fn sums(&self, x: f64) -> (f64, f64) {
        if self.extended {
            let mut num = DoubleDouble::ZERO;
            let mut den = DoubleDouble::ZERO;
            for ((&xi, &yi), &wi) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
                let c = wi / (x - xi);
                num += DoubleDouble::from_product(c, yi);
                den += c;
            }
            (num.to_f64(), den.to_f64())
        } else {
            let mut num = 0.0;
            let mut den = 0.0;
            for ((&xi, &yi), &wi) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
                let c = wi / (x - xi);
                num += c * yi;
                den += c;
            }
            (num, den)
        }
    }

    /// Second barycentric formula; accurate where the nodes are dense around `x`.
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(i) = self.nodes.iter().position(|&xi| xi == x) {
            return self.values[i];
        }
        let (num, den) = self.sums(x);
        num / den
    }

    /// First barycentric formula; stable in gaps between node clusters.
    pub fn eval_first_form(&self, x: f64) -> f64 {
        if let Some(i) = self.nodes.iter().position(|&xi| xi == x) {
            return self.values[i];
        }
        let (num, _) = self.sums(x);
        let mut log_l = self.log_scale;
        let mut negative = false;
        for &xi in &self.nodes {
            let d = x - xi;
            log_l += d.abs().ln();
            negative ^= d < 0.0;
        }
        let l = log_l.exp();
        if negative {
            -l * num
        } else {
            l * num
        }
    }

    /// [`Self::eval`] on `set`, [`Self::eval_first_form`] off it.
    pub fn eval_on(&self, set: &IntervalSet, x: f64) -> f64 {
        if set.contains(x) {
            self.eval(x)
        } else {
            self.eval_first_form(x)
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub degree: usize,
    /// Maximum of `|f − p|` over the grid and the refined extrema: `E_n`.
    pub error: f64,
    /// `|h|` of the last levelling step.
    pub levelled_error: f64,
    /// Smallest `|f − p|` on the alternation set (de la Vallée Poussin bound).
    pub lower_bound: f64,
    /// Chebyshev coefficients of `p` on the carrier interval. On a set with
    /// gaps they grow like `e^{n·g}` with `g` the Green function on the gaps, so
    /// evaluating through them on `E` loses that many digits; [`Self::eval`]
    /// does not.
    pub coefficients: Vec<f64>,
    pub carrier: Band,
    /// `n + 2` points where `f − p` alternates in sign.
    pub alternation_points: Vec<f64>,
    pub iterations: usize,
    pub set: IntervalSet,
    x0: f64,
    alpha: f64,
    poly: Barycentric,
}

impl MinimaxResult {
    /// `p(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval_on(&self.set, x)
    }

    /// `f(x) − p(x)`.
    pub fn residual(&self, x: f64) -> f64 {
        (x - self.x0).abs().powf(self.alpha) - self.eval(x)
    }

    /// `p` via its Chebyshev coefficients (Clenshaw).
    pub fn eval_chebyshev(&self, x: f64) -> f64 {
        let s = (x - self.carrier.mid()) / self.carrier.half_width();
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coefficients[0]
    }
}

struct Extremum {
    x: f64,
    r: f64,
}

/// `E_n(|x − x₀|^α, E)` by Remez exchange on a cosine grid with `grid_points_per_band`
/// nodes per band; every interior grid extremum is refined by golden-section
/// search, so the reported error is the maximum over the grid and the refined
/// points.
pub fn remez(
    problem: &MinimaxProblem,
    grid_points_per_band: usize,
    tol: f64,
) -> Result<MinimaxResult> {
    if !(tol >= 1e-13) {
        return Err(Error::param("tol", format!("{tol} < 1e-13")));
    }
    if grid_points_per_band < problem.min_grid() {
        return Err(Error::param(
            "grid_points_per_band",
            format!(
                "{grid_points_per_band} < 10(n+1)/m = {}",
                problem.min_grid()
            ),
        ));
    }
    let n = problem.degree;
    let set = &problem.set;
    let extended = n > EXTENDED_PRECISION_DEGREE;
    let f = |x: f64| problem.target(x);

    let mut grid = set.chebyshev_grid(grid_points_per_band);
    grid.push(problem.x0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let fgrid: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    // grid index ranges of each band
    let ranges: Vec<(usize, usize)> = set
        .bands()
        .iter()
        .map(|b| {
            let lo = grid.partition_point(|&x| x < b.lo);
            let hi = grid.partition_point(|&x| x <= b.hi);
            (lo, hi)
        })
        .collect();

    let mut reference = initial_reference(set, n + 2)?;

    if problem.is_polynomial_target() {
        let values: Vec<f64> = reference.iter().map(|&x| f(x)).collect();
        let poly = Barycentric::new(reference.clone(), values, extended);
        return Ok(finish(problem, poly, reference, 0.0, 0.0, 0.0, 0));
    }

    let diam = set.diameter();
    let mut last_excess = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let (poly, h) = level(&reference, &f, extended)?;
        let residual = |x: f64| f(x) - poly.eval(x);
        let rgrid: Vec<f64> = grid
            .iter()
            .zip(&fgrid)
            .map(|(&x, &fx)| fx - poly.eval(x))
            .collect();

        let mut candidates: Vec<Extremum> = Vec::new();
        let mut emax = rgrid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        for &(lo, hi) in &ranges {
            for i in lo..hi {
                let r = rgrid[i];
                let left = (i > lo).then(|| rgrid[i - 1]);
                let right = (i + 1 < hi).then(|| rgrid[i + 1]);
                let is_max = left.is_none_or(|l| r >= l) && right.is_none_or(|rr| r >= rr);
                let is_min = left.is_none_or(|l| r <= l) && right.is_none_or(|rr| r <= rr);
                if !(is_max || is_min) || r == 0.0 {
                    continue;
                }
                let mut best = Extremum { x: grid[i], r };
                let interior = left.is_some() && right.is_some() && grid[i] != problem.x0;
                if interior {
                    let sign = r.signum();
                    let (x, v) = golden_max(
                        |x| sign * residual(x),
                        grid[i - 1],
                        grid[i + 1],
                        1e-10 * diam,
                    );
                    if v > r.abs() {
                        best = Extremum { x, r: sign * v };
                    }
                }
                emax = emax.max(best.r.abs());
                candidates.push(best);
            }
        }
        // the previous reference alternates with |h|, so it guarantees n + 2 sign runs
        for &x in &reference {
            candidates.push(Extremum { x, r: residual(x) });
        }
        candidates.sort_by(|a, b| a.x.total_cmp(&b.x));
        candidates.dedup_by(|a, b| a.x == b.x);

        let alternating = select_alternating(candidates, n + 2)?;
        let next: Vec<f64> = alternating.iter().map(|e| e.x).collect();
        let hab = h.abs();
        let excess = if hab > 0.0 {
            emax / hab - 1.0
        } else if emax == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };

        let stalled =
            next == reference || (excess >= last_excess && excess < 1e-6 && iteration > 5);
        if excess < tol || stalled {
            let lower = alternating
                .iter()
                .fold(f64::INFINITY, |m, e| m.min(e.r.abs()));
            return Ok(finish(problem, poly, next, emax, hab, lower, iteration));
        }
        last_excess = excess;
        reference = next;
    }
    let (poly, h) = level(&reference, &f, extended)?;
    let emax = grid
        .iter()
        .fold(0.0f64, |m, &x| m.max((f(x) - poly.eval(x)).abs()));
    Err(Error::RemezCycling {
        iterations: MAX_ITERATIONS,
        excess: emax / h.abs() - 1.0,
    })
}

/// Remez with the default grid and tolerance.
pub fn remez_default(problem: &MinimaxProblem) -> Result<MinimaxResult> {
    remez(problem, problem.default_grid(), DEFAULT_TOL)
}

fn finish(
    problem: &MinimaxProblem,
    poly: Barycentric,
    alternation_points: Vec<f64>,
    error: f64,
    levelled_error: f64,
    lower_bound: f64,
    iterations: usize,
) -> MinimaxResult {
    let carrier = problem.set.carrier();
    let coefficients = chebyshev_coefficients(&poly, &problem.set, problem.degree);
    MinimaxResult {
        degree: problem.degree,
        error,
        levelled_error,
        lower_bound: if lower_bound.is_finite() {
            lower_bound
        } else {
            0.0
        },
        coefficients,
        carrier,
        alternation_points,
        iterations,
        set: problem.set.clone(),
        x0: problem.x0,
        alpha: problem.alpha,
        poly,
    }
}

/// Levelling on the reference: returns `p` and the signed levelled error `h`.
fn level(reference: &[f64], f: &impl Fn(f64) -> f64, extended: bool) -> Result<(Barycentric, f64)> {
    if reference.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::IllConditioned {
            reason: "reference points are not distinct".into(),
        });
    }
    let fvals: Vec<f64> = reference.iter().map(|&x| f(x)).collect();
    let mut poly = Barycentric::new(reference.to_vec(), fvals, extended);
    let mut num = DoubleDouble::ZERO;
    let mut den = DoubleDouble::ZERO;
    for (i, (&w, &fx)) in poly.weights.iter().zip(&poly.values).enumerate() {
        num += DoubleDouble::from_product(w, fx);
        den += if i % 2 == 0 { w } else { -w };
    }
    let den = den.to_f64();
    if !(den.abs() > 0.0) || !den.is_finite() {
        return Err(Error::IllConditioned {
            reason: format!("levelling denominator {den}"),
        });
    }
    let h = num.to_f64() / den;
    for (i, y) in poly.values.iter_mut().enumerate() {
        *y += if i % 2 == 0 { -h } else { h };
    }
    Ok((poly, h))
}

/// Keeps the largest `|r|` in every run of equal sign, then trims to `count`
/// points by dropping the weakest end point or the weakest adjacent pair.
fn select_alternating(candidates: Vec<Extremum>, count: usize) -> Result<Vec<Extremum>> {
    let mut runs: Vec<Extremum> = Vec::new();
    for c in candidates.into_iter().filter(|c| c.r != 0.0) {
        match runs.last_mut() {
            Some(last) if last.r.signum() == c.r.signum() => {
                // strictly larger wins, so near-ties keep the leftmost
                if c.r.abs() > last.r.abs() * (1.0 + TIE) {
                    *last = c;
                }
            }
            _ => runs.push(c),
        }
    }
    if runs.len() < count {
        return Err(Error::IllConditioned {
            reason: format!(
                "only {} alternations for {} reference points",
                runs.len(),
                count
            ),
        });
    }
    while runs.len() > count {
        let k = runs.len();
        let (weak, _) = runs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.r.abs().total_cmp(&b.1.r.abs()))
            .expect("nonempty");
        if weak == 0 || weak == k - 1 {
            runs.remove(weak);
        } else if runs.len() - count == 1 {
            // one too many: an end point must go to keep alternation
            let drop = if runs[0].r.abs() <= runs[k - 1].r.abs() {
                0
            } else {
                k - 1
            };
            runs.remove(drop);
        } else {
            let partner = if runs[weak - 1].r.abs() <= runs[weak + 1].r.abs() {
                weak - 1
            } else {
                weak + 1
            };
            let first = weak.min(partner);
            runs.drain(first..first + 2);
        }
    }
    Ok(runs)
}

fn golden_max(phi: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = phi(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `count` points at the equilibrium-measure quantiles `i/count`, `i < count`.
///
/// Dropping the right end keeps the reference off any symmetry of `E`: a
/// symmetric reference of even size levels an even target to `h = 0`.
fn initial_reference(set: &IntervalSet, count: usize) -> Result<Vec<f64>> {
    let mut points = quantile_points(set, count + 1)?;
    points.pop();
    Ok(points)
}

/// `count` points at the equilibrium-measure quantiles `i/(count − 1)`.
fn quantile_points(set: &IntervalSet, count: usize) -> Result<Vec<f64>> {
    let carrier = set.carrier();
    let eq = EquilibriumData::solve(set, DEFAULT_QUAD_POINTS)?;
    let mut band_mass = Vec::with_capacity(set.len());
    let mut acc = 0.0;
    for b in set.bands() {
        acc += eq.mass_of(b.lo, b.hi);
        band_mass.push(acc);
    }
    let total = acc;
    let mut points = Vec::with_capacity(count);
    points.push(carrier.lo);
    for i in 1..count - 1 {
        let target = total * i as f64 / (count - 1) as f64;
        let k = band_mass
            .partition_point(|&m| m < target)
            .min(set.len() - 1);
        let band = set.bands()[k];
        let before = if k == 0 { 0.0 } else { band_mass[k - 1] };
        let need = target - before;
        // bisection in θ, where band mass is monotone and smooth
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let t = band.mid() - band.half_width() * mid.cos();
            if eq.mass_of(band.lo, t) < need {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push(band.mid() - band.half_width() * (0.5 * (lo + hi)).cos());
    }
    points.push(carrier.hi);
    // quantiles falling at a gap collapse onto a band end; spread any ties
    for i in 1..points.len() {
        if points[i] <= points[i - 1] {
            let b = set.bands()[set.band_index(points[i - 1]).unwrap_or(0)];
            points[i] = (points[i - 1] + 1e-9 * b.len()).min(carrier.hi);
        }
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::IllConditioned {
            reason: "could not place distinct initial reference points".into(),
        });
    }
    Ok(points)
}

/// Chebyshev coefficients of `p` on `carrier`, from its values at the
/// `degree + 1` first-kind Chebyshev points.
fn chebyshev_coefficients(poly: &Barycentric, set: &IntervalSet, degree: usize) -> Vec<f64> {
    let carrier = set.carrier();
    let n = degree + 1;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let theta = PI * (k as f64 + 0.5) / n as f64;
            (
                theta,
                poly.eval_on(set, carrier.mid() + carrier.half_width() * theta.cos()),
            )
        })
        .collect();
    (0..n)
        .map(|j| {
            let s: f64 = samples
                .iter()
                .map(|&(th, v)| v * (j as f64 * th).cos())
                .sum();
            let c = 2.0 * s / n as f64;
            if j == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// One point of an `E_n` sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnSample {
    pub n: usize,
    pub error: f64,
    pub iterations: usize,
}

/// `E_n` for each degree in `degrees` (increasing), computed concurrently.
/// Fails if the sequence increases by more than `1e-12`.
pub fn en_sequence(
    set: &IntervalSet,
    x0: f64,
    alpha: f64,
    degrees: &[usize],
    tol: f64,
) -> Result<Vec<EnSample>> {
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("degrees", "must be strictly increasing"));
    }
    let base = MinimaxProblem::new(set.clone(), x0, alpha, 0)?;
    let samples = degrees
        .par_iter()
        .map(|&n| {
            let problem = base.with_degree(n);
            let result = remez(&problem, problem.default_grid(), tol)?;
            Ok(EnSample {
                n,
                error: result.error,
                iterations: result.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = samples.windows(2).find(|w| w[1].error > w[0].error + 1e-12) {
        return Err(Error::Monotonicity {
            context: format!(
                "E_{} = {} exceeds E_{} = {}",
                w[1].n, w[1].error, w[0].n, w[0].error
            ),
        });
    }
    Ok(samples)
}
