//! Independent oracles shared by the integration tests and the acceptance
//! harness: closed forms and a tanh-sinh quadrature that never touches the
//! library's own rules.

#![allow(dead_code)]

use std::f64::consts::PI;

use potapprox::{Complex64, IntervalSet};

/// `g(z)` for `C ∖ [−1, 1]`: `log|z + √(z² − 1)|` on the branch with `|·| ≥ 1`.
pub fn green_segment(z: Complex64) -> f64 {
    let s = (z - 1.0).sqrt() * (z + 1.0).sqrt();
    (z + s).norm().ln().max((z - s).norm().ln())
}

/// `E = [−1, −a] ∪ [a, 1]` is the preimage of `[a², 1]` under `z²`.
pub fn green_two_band(a: f64, z: Complex64) -> f64 {
    let w = (z * z * 2.0 - 1.0 - a * a) / (1.0 - a * a);
    0.5 * green_segment(w)
}

pub fn density_two_band(a: f64, x: f64) -> f64 {
    x.abs() / (PI * ((x * x - a * a) * (1.0 - x * x)).abs().sqrt())
}

pub fn density_segment(x: f64) -> f64 {
    1.0 / (PI * (1.0 - x * x).sqrt())
}

/// The three-band set `{x : |λ T₃(x)| ≤ 1}` for `λ > 1`.
pub struct ChebyshevPreimage {
    pub lambda: f64,
    pub set: IntervalSet,
}

impl ChebyshevPreimage {
    pub fn new(lambda: f64) -> Self {
        // T₃(cos θ) = cos 3θ; band ends solve cos 3θ = ±1/λ
        let t = |c: f64, k: f64| ((c.acos() + 2.0 * PI * k) / 3.0).cos();
        let p = 1.0 / lambda;
        let mut ends = [
            t(p, 0.0),
            t(-p, 0.0),
            t(p, 1.0),
            t(-p, 1.0),
            t(p, 2.0),
            t(-p, 2.0),
        ];
        ends.sort_by(f64::total_cmp);
        let bands: Vec<(f64, f64)> = ends.chunks(2).map(|c| (c[0], c[1])).collect();
        ChebyshevPreimage {
            lambda,
            set: IntervalSet::normalize(&bands).unwrap(),
        }
    }

    fn poly(&self, z: Complex64) -> Complex64 {
        (z * z * z * 4.0 - z * 3.0) * self.lambda
    }

    /// `cap = (cap[−1,1] / |lead|)^{1/3}` with leading coefficient `4λ`.
    pub fn capacity(&self) -> f64 {
        (0.5 / (4.0 * self.lambda)).cbrt()
    }

    pub fn green(&self, z: Complex64) -> f64 {
        green_segment(self.poly(z)) / 3.0
    }
}

/// Tanh-sinh quadrature on `[a, b]`. The integrand receives `(t, t − a, b − t)`
/// with the endpoint distances formed without cancellation.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let step = 1.0 / 64.0;
    let mut sum = 0.0;
    let mut k = 0i64;
    loop {
        let s = k as f64 * step;
        let u = 0.5 * PI * s.sinh();
        let cosh_u = u.cosh();
        let w = 0.5 * PI * s.cosh() / (cosh_u * cosh_u);
        // 1 − tanh u = 2 / (e^{2u} + 1)
        let near = half * 2.0 / ((2.0 * u).exp() + 1.0);
        if near <= 0.0 || w * half < 1e-300 {
            break;
        }
        let far = (b - a) - near;
        let right = f(b - near, far, near);
        let mut term = right;
        if k > 0 {
            term += f(a + near, near, far);
        }
        sum += w * term;
        k += 1;
        if k > 4000 {
            break;
        }
    }
    sum * half * step
}

/// `∫ q/√|R|` over `[lo, hi]`, where `lo`/`hi` are consecutive endpoints of `E`
/// and `q` is monic with the given zeros.
pub fn weighted_integral(
    set: &IntervalSet,
    zeros: &[f64],
    lo: f64,
    hi: f64,
    absolute: bool,
) -> f64 {
    let ends: Vec<f64> = set.endpoints().collect();
    tanh_sinh(lo, hi, |t, dl, dr| {
        let q: f64 = zeros.iter().map(|z| t - z).product();
        let r: f64 = ends
            .iter()
            .map(|&e| {
                if e == lo {
                    dl
                } else if e == hi {
                    dr
                } else {
                    (t - e).abs()
                }
            })
            .product();
        let v = q / r.sqrt();
        if absolute {
            v.abs()
        } else {
            v
        }
    })
}

/// A few fixed sets with one to five bands.
pub fn fixed_sets() -> Vec<IntervalSet> {
    [
        "-1,1",
        "-1,-0.5;0.5,1",
        "-1,-0.6;-0.2,0.3;0.5,1",
        "0,0.4;0.45,0.5;0.9,2;3,3.1",
        "-2,-1.9;-1,-0.5;0,0.1;0.2,0.7;1,3",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}
