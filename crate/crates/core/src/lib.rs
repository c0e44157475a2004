//! Potential theory on finite unions of real intervals and best uniform
//! approximation of `|x − x₀|^α` on such sets.
//!
//! * [`interval_set`]: the sets, their grids and Cantor-type exhaustions.
//! * [`equilibrium`]: equilibrium measure, capacity and Green's function.
//! * [`comb_map`]: the conformal map of the upper half-plane onto a comb.
//! * [`minimax`]: Remez exchange for `E_n(|x − x₀|^α, E)`.
//! * [`asymptotics`]: rate extrapolation and the Vasiliev–Totik limit.
//! * [`verification`]: constant chains and bound checks.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod comb_map;
pub mod dd;
pub mod equilibrium;
pub mod error;
pub mod interval_set;
pub mod minimax;
pub mod quadrature;
pub mod verification;

pub use asymptotics::{extrapolate_rate, sigma_alpha, vt_check, RateReport, VtReport};
pub use equilibrium::{solve_equilibrium, EquilibriumData, DEFAULT_QUAD_POINTS};
pub use error::{Error, Result};
pub use interval_set::{Band, ExhaustionSequence, IntervalSet};
pub use minimax::{en_sequence, remez, EnSample, MinimaxProblem, MinimaxResult};
pub use num_complex::Complex64;
