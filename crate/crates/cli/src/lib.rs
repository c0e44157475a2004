//! Command-line front end: argument grammar, run configuration, output schemas
//! and rendering. `main.rs` only parses, runs and maps errors to exit codes.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};

use potapprox::asymptotics::{ladder_for, rate_report, vt_check, DEFAULT_LADDER};
use potapprox::comb_map::comb_geometry;
use potapprox::minimax::{remez, DEFAULT_TOL};
use potapprox::verification::{
    dichotomy_report, random_trials, verify_set, DichotomyReport, TrialReport,
    DEFAULT_LEMMA23_SAMPLES,
};
use potapprox::{
    Complex64, EquilibriumData, Error, ExhaustionSequence, IntervalSet, MinimaxProblem,
    DEFAULT_QUAD_POINTS,
};
use serde::{Deserialize, Serialize};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_BOUND: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "potapprox",
    version,
    about = "Potential theory and polynomial approximation on unions of intervals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium measure data and capacity.
    Eq(Common),
    /// Green's function at points of the plane.
    Green {
        #[command(flatten)]
        common: Common,
        /// Points as "re,im" pairs joined by ";".
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Comb geometry: teeth abscissae u, heights v and eta0 = F(x0).
    Comb(Common),
    /// Best uniform approximation errors E_n.
    Remez {
        #[command(flatten)]
        common: Common,
        /// Single degree (alternative to --degrees).
        #[arg(long, conflicts_with = "degrees")]
        n: Option<usize>,
    },
    /// Rate ladder n^alpha E_n and its extrapolated limit.
    Rate {
        #[command(flatten)]
        common: Common,
        /// Also compare with h(x0)^-alpha sigma_alpha.
        #[arg(long)]
        vt: bool,
    },
    /// Constant chain and proved-bound checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run this many random sets instead of --set/--x0.
        #[arg(long)]
        random: Option<usize>,
        /// Samples for the local Lipschitz checks.
        #[arg(long, default_value_t = DEFAULT_LEMMA23_SAMPLES)]
        samples: usize,
    },
    /// Rate ladders and Lipschitz estimates along an exhaustion.
    Dichotomy {
        #[command(flatten)]
        common: Common,
        /// Use Cantor levels 0..=L of the carrier of --set.
        #[arg(long)]
        cantor: Option<usize>,
        /// Central fraction removed at each Cantor step.
        #[arg(long, default_value_t = 1.0 / 3.0)]
        ratio: f64,
        /// y_min floors, comma separated.
        #[arg(long, default_value = "1e-4,1e-6,1e-8")]
        floors: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Interval union, e.g. "-1,-0.5;0.5,1".
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    pub set: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Degrees: "a:b:even", "a:b:all" or a comma list.
    #[arg(long)]
    pub degrees: Option<String>,
    /// Remez grid points per band (default depends on n).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_QUAD_POINTS)]
    pub quad_points: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized verification.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Validated inputs shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub set_spec: String,
    pub set: IntervalSet,
    pub x0: f64,
    pub alpha: f64,
    pub degrees: Option<Vec<usize>>,
    pub grid: Option<usize>,
    pub quad_points: usize,
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<Self, Error> {
        let set: IntervalSet = c.set.parse()?;
        let degrees = c.degrees.as_deref().map(parse_degrees).transpose()?;
        Ok(RunConfig {
            set_spec: c.set.clone(),
            set,
            x0: c.x0,
            alpha: c.alpha,
            degrees,
            grid: c.grid,
            quad_points: c.quad_points,
            tol: c.tol,
            format: c.format,
            seed: c.seed,
        })
    }

    fn equilibrium(&self) -> Result<EquilibriumData, Error> {
        EquilibriumData::solve(&self.set, self.quad_points)
    }

    /// Explicit degrees, or the default ladder adapted to `(E, x₀)`.
    fn degrees_or_default(&self) -> Vec<usize> {
        self.degrees
            .clone()
            .unwrap_or_else(|| ladder_for(&self.set, self.x0, &DEFAULT_LADDER))
    }
}

fn arg_error(name: &'static str, spec: &str, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        reason: format!("{spec:?}: {reason}"),
    }
}

fn degree_error(spec: &str, reason: &str) -> Error {
    arg_error("degrees", spec, reason)
}

/// `"a:b:even"`, `"a:b:all"`, or a comma list; the result is strictly increasing.
pub fn parse_degrees(spec: &str) -> Result<Vec<usize>, Error> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| degree_error(spec, "degrees are nonnegative integers"))
    };
    let mut out: Vec<usize> = match parts.as_slice() {
        [a, b, kind] => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(degree_error(spec, "range start exceeds its end"));
            }
            match *kind {
                "even" => (a..=b).filter(|n| n % 2 == 0).collect(),
                "all" => (a..=b).collect(),
                _ => return Err(degree_error(spec, "range kind must be even or all")),
            }
        }
        [list] => list
            .split(',')
            .map(|s| num(s.trim()))
            .collect::<Result<_, _>>()?,
        _ => {
            return Err(degree_error(
                spec,
                "expected a:b:even, a:b:all or a comma list",
            ))
        }
    };
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(degree_error(spec, "no degrees selected"));
    }
    Ok(out)
}

fn parse_points(spec: &str) -> Result<Vec<Complex64>, Error> {
    spec.split(';')
        .map(|pair| {
            let nums: Vec<f64> = pair
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| arg_error("z", spec, &e.to_string()))?;
            match nums.as_slice() {
                [re, im] => Ok(Complex64::new(*re, *im)),
                _ => Err(arg_error("z", spec, "points are \"re,im\" pairs")),
            }
        })
        .collect()
}

fn parse_floors(spec: &str) -> Result<Vec<f64>, Error> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| arg_error("floors", spec, &e.to_string()))
        })
        .collect()
}

// ---- output schemas -------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqOutput {
    pub set: IntervalSet,
    pub capacity: f64,
    pub log_capacity: f64,
    pub gap_zeros: Vec<f64>,
    pub q_coeffs: Vec<f64>,
    pub band_masses: Vec<f64>,
    pub total_mass: f64,
    pub gap_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenPoint {
    pub re: f64,
    pub im: f64,
    pub green: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenOutput {
    pub points: Vec<GreenPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombOutput {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezRow {
    pub n: usize,
    pub error: f64,
    pub levelled_error: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub alternation_points: Vec<f64>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezOutput {
    pub x0: f64,
    pub alpha: f64,
    pub results: Vec<RemezRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VtSummary {
    pub h: f64,
    pub sigma: f64,
    pub rhs: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateOutput {
    pub alpha: f64,
    pub x0: f64,
    pub samples: Vec<(usize, f64)>,
    pub extrapolated_limit: f64,
    pub limsup_estimate: f64,
    pub fit_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vt: Option<VtSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub passed: bool,
    pub trials: Vec<TrialReport>,
}

/// One subcommand's result, ready to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Output {
    Eq(EqOutput),
    Green(GreenOutput),
    Comb(CombOutput),
    Remez(RemezOutput),
    Rate(RateOutput),
    Verify(VerifyOutput),
    Dichotomy(DichotomyReport),
}

impl Output {
    /// True unless a proved-bound check failed.
    pub fn bounds_hold(&self) -> bool {
        match self {
            Output::Verify(v) => v.passed,
            _ => true,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("outputs are serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> String {
        let mut s = String::new();
        let mut line = |fields: &[String]| {
            let _ = writeln!(s, "{}", fields.join(","));
        };
        let f = |x: f64| x.to_string();
        match self {
            Output::Eq(e) => {
                line(&["lo".into(), "hi".into(), "mass".into()]);
                for (b, m) in e.set.bands().iter().zip(&e.band_masses) {
                    line(&[f(b.lo), f(b.hi), f(*m)]);
                }
            }
            Output::Green(g) => {
                line(&["re".into(), "im".into(), "green".into()]);
                for p in &g.points {
                    line(&[f(p.re), f(p.im), f(p.green)]);
                }
            }
            Output::Comb(c) => {
                line(&["kind".into(), "index".into(), "value".into()]);
                for (j, u) in c.u.iter().enumerate() {
                    line(&["u".into(), j.to_string(), f(*u)]);
                }
                for (j, v) in c.v.iter().enumerate() {
                    line(&["v".into(), (j + 1).to_string(), f(*v)]);
                }
                line(&["eta0".into(), "0".into(), f(c.eta0)]);
            }
            Output::Remez(r) => {
                line(&["n".into(), "error".into(), "iterations".into()]);
                for row in &r.results {
                    line(&[row.n.to_string(), f(row.error), row.iterations.to_string()]);
                }
            }
            Output::Rate(r) => {
                line(&["n".into(), "n^alpha_En".into()]);
                for (n, v) in &r.samples {
                    line(&[n.to_string(), f(*v)]);
                }
            }
            Output::Verify(v) => {
                line(
                    &[
                        "trial",
                        "passed",
                        "c",
                        "sandwich_margin",
                        "teeth_margin",
                        "lemma22_margin",
                        "lemma23_margin",
                        "farfield_margin",
                    ]
                    .map(String::from),
                );
                for t in &v.trials {
                    let l = &t.ledger;
                    line(&[
                        t.trial.to_string(),
                        t.passed.to_string(),
                        f(l.c),
                        f((l.w0_im - l.c1).min(2.0 * l.c1 - l.w0_im)),
                        f(t.teeth.margin),
                        f(t.lemma22.margin),
                        f(t.lemma23.margin),
                        f(t.farfield.margin),
                    ]);
                }
            }
            Output::Dichotomy(d) => {
                line(&["level".into(), "kind".into(), "key".into(), "value".into()]);
                for l in &d.levels {
                    for (n, v) in &l.rates {
                        line(&[l.level.to_string(), "rate".into(), n.to_string(), f(*v)]);
                    }
                    for (y, v) in &l.sup_estimates {
                        line(&[l.level.to_string(), "sup".into(), f(*y), f(*v)]);
                    }
                }
            }
        }
        s
    }
}

pub fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Eq(c) | Command::Comb(c) => c,
        Command::Green { common, .. }
        | Command::Remez { common, .. }
        | Command::Rate { common, .. }
        | Command::Verify { common, .. }
        | Command::Dichotomy { common, .. } => common,
    }
}

pub fn run(cmd: &Command) -> Result<Output, Error> {
    let cfg = RunConfig::from_common(common(cmd))?;
    match cmd {
        Command::Eq(_) => {
            let eq = cfg.equilibrium()?;
            Ok(Output::Eq(EqOutput {
                band_masses: cfg
                    .set
                    .bands()
                    .iter()
                    .map(|b| eq.mass_of(b.lo, b.hi))
                    .collect(),
                set: cfg.set.clone(),
                capacity: eq.capacity(),
                log_capacity: eq.log_capacity(),
                gap_zeros: eq.gap_zeros().to_vec(),
                q_coeffs: eq.q_coeffs().to_vec(),
                total_mass: eq.total_mass(),
                gap_residual: eq.gap_residual(),
            }))
        }
        Command::Green { z, .. } => {
            let eq = cfg.equilibrium()?;
            let points = parse_points(z)?
                .into_iter()
                .map(|p| {
                    Ok(GreenPoint {
                        re: p.re,
                        im: p.im,
                        green: eq.green_at(p)?,
                    })
                })
                .collect::<Result<_, Error>>()?;
            Ok(Output::Green(GreenOutput { points }))
        }
        Command::Comb(_) => {
            let eq = cfg.equilibrium()?;
            let g = comb_geometry(&eq, cfg.x0)?;
            Ok(Output::Comb(CombOutput {
                u: g.u,
                v: g.v,
                eta0: g.eta0,
            }))
        }
        Command::Remez { n, .. } => {
            let degrees = match n {
                Some(n) => vec![*n],
                None => cfg.degrees.clone().ok_or_else(|| Error::InvalidParameter {
                    name: "degrees",
                    reason: "give --n or --degrees".into(),
                })?,
            };
            let base = MinimaxProblem::new(cfg.set.clone(), cfg.x0, cfg.alpha, 0)?;
            let results = degrees
                .iter()
                .map(|&n| {
                    let p = base.with_degree(n);
                    let r = remez(&p, cfg.grid.unwrap_or_else(|| p.default_grid()), cfg.tol)?;
                    Ok(RemezRow {
                        n,
                        error: r.error,
                        levelled_error: r.levelled_error,
                        lower_bound: r.lower_bound,
                        iterations: r.iterations,
                        alternation_points: r.alternation_points,
                        coefficients: r.coefficients,
                    })
                })
                .collect::<Result<_, Error>>()?;
            Ok(Output::Remez(RemezOutput {
                x0: cfg.x0,
                alpha: cfg.alpha,
                results,
            }))
        }
        Command::Rate { vt, .. } => {
            let degrees = cfg.degrees_or_default();
            let r = rate_report(&cfg.set, cfg.x0, cfg.alpha, &degrees, cfg.tol)?;
            let vt = if *vt {
                let v = vt_check(&cfg.set, cfg.x0, cfg.alpha, &degrees)?;
                Some(VtSummary {
                    h: v.h,
                    sigma: v.sigma,
                    rhs: v.rhs,
                    relative_gap: v.relative_gap,
                })
            } else {
                None
            };
            Ok(Output::Rate(RateOutput {
                alpha: r.alpha,
                x0: r.x0,
                samples: r.samples,
                extrapolated_limit: r.extrapolated_limit,
                limsup_estimate: r.limsup_estimate,
                fit_residual: r.fit_residual,
                vt,
            }))
        }
        Command::Verify {
            random, samples, ..
        } => {
            let trials = match random {
                Some(count) => random_trials(cfg.seed, *count, *samples)?,
                None => vec![verify_set(&cfg.set, cfg.x0, 0, *samples)?],
            };
            Ok(Output::Verify(VerifyOutput {
                passed: trials.iter().all(|t| t.passed),
                trials,
            }))
        }
        Command::Dichotomy {
            cantor,
            ratio,
            floors,
            ..
        } => {
            let exh = match cantor {
                Some(levels) => {
                    let c = cfg.set.carrier();
                    ExhaustionSequence::cantor(*ratio, *levels, (c.lo, c.hi))?
                }
                None => ExhaustionSequence::constant(cfg.set.clone(), 1),
            };
            let degrees = cfg
                .degrees
                .clone()
                .unwrap_or_else(|| DEFAULT_LADDER.to_vec());
            let report =
                dichotomy_report(&exh, cfg.x0, cfg.alpha, &degrees, &parse_floors(floors)?)?;
            Ok(Output::Dichotomy(report))
        }
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_usage() {
        EXIT_USAGE
    } else if matches!(e, Error::BoundViolation { .. }) {
        EXIT_BOUND
    } else {
        EXIT_NUMERIC
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_grammar() {
        assert_eq!(parse_degrees("20:26:even").unwrap(), vec![20, 22, 24, 26]);
        assert_eq!(parse_degrees("3:5:all").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_degrees("7, 2,7").unwrap(), vec![2, 7]);
        for bad in ["5:3:all", "1:4:odd", "x", "1:2", "3:3:even"] {
            assert!(parse_degrees(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn point_grammar() {
        let p = parse_points("0,1;-0.5,2").unwrap();
        assert_eq!(p, vec![Complex64::new(0.0, 1.0), Complex64::new(-0.5, 2.0)]);
        assert!(parse_points("1").is_err());
    }
}
