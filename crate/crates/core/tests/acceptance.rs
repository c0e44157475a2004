//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use potapprox::asymptotics::{sigma_alpha, vt_check_with_sigma, DEFAULT_LADDER};
use potapprox::comb_map::{check_comb_identities, comb_geometry};
use potapprox::minimax::{remez_default, DEFAULT_TOL};
use potapprox::verification::{
    dichotomy_report, exhaustion_green_check, random_trials, DEFAULT_LEMMA23_SAMPLES,
};
use potapprox::{
    Complex64, EquilibriumData, ExhaustionSequence, IntervalSet, MinimaxProblem, RateReport,
    DEFAULT_QUAD_POINTS,
};
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn solve(set: &IntervalSet) -> Result<EquilibriumData, String> {
    EquilibriumData::solve(set, DEFAULT_QUAD_POINTS).map_err(|e| e.to_string())
}

fn parse(spec: &str) -> IntervalSet {
    spec.parse().expect("fixed set spec")
}

fn closed_forms() -> Outcome {
    let seg = solve(&parse("-1,1"))?;
    let two = solve(&parse("-1,-0.5;0.5,1"))?;
    let cap_seg = (seg.capacity() - 0.5).abs();
    let cap_two = (two.capacity() - 0.75f64.sqrt() / 2.0).abs();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = (k as f64 + 0.5) / 100.0;
        let x = -1.0 + 2.0 * t;
        worst = worst.max(
            (seg.density_at(x).map_err(|e| e.to_string())? - density_segment(x)).abs()
                * (1.0 - x * x).sqrt(),
        );
        let y = if k % 2 == 0 {
            0.5 + 0.5 * t
        } else {
            -0.5 - 0.5 * t
        };
        let want = density_two_band(0.5, y);
        worst =
            worst.max((two.density_at(y).map_err(|e| e.to_string())? - want).abs() / want.max(1.0));
        let z = Complex64::new(3.0 * (t - 0.5), 0.02 + t);
        worst = worst.max((seg.green_at(z).map_err(|e| e.to_string())? - green_segment(z)).abs());
        worst =
            worst.max((two.green_at(z).map_err(|e| e.to_string())? - green_two_band(0.5, z)).abs());
    }
    Ok((
        cap_seg <= 1e-9 && cap_two <= 1e-8 && worst <= 1e-7,
        format!("|cap-0.5|={cap_seg:.1e} |cap-sqrt(0.75)/2|={cap_two:.1e} max density/green dev={worst:.1e}"),
    ))
}

fn conformal_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (spec, x0) in [
        ("-1,1", 0.3),
        ("-1,-0.5;0.5,1", 0.75),
        ("-1,-0.6;-0.2,0.3;0.5,1", 0.0),
    ] {
        let eq = solve(&parse(spec))?;
        let geom = comb_geometry(&eq, x0).map_err(|e| e.to_string())?;
        let r = check_comb_identities(&eq, &geom, 100).map_err(|e| e.to_string())?;
        worst = worst.max(r.green_identity);
    }
    Ok((
        worst < 1e-7,
        format!("max |Im F - g| = {worst:.2e} over 3 x 100 samples"),
    ))
}

fn remez_exactness() -> Outcome {
    let set = parse("-1,1");
    let results: Vec<(usize, f64, f64, bool)> = (1..=120usize)
        .into_par_iter()
        .map(|n| {
            let p = MinimaxProblem::new(set.clone(), 0.0, 1.0, n).map_err(|e| e.to_string())?;
            let r = remez_default(&p).map_err(|e| e.to_string())?;
            let vals: Vec<f64> = r
                .alternation_points
                .iter()
                .map(|&x| r.residual(x))
                .collect();
            let ok = vals.len() == n + 2
                && r.alternation_points.windows(2).all(|w| w[0] < w[1])
                && vals.windows(2).all(|w| w[0] * w[1] < 0.0);
            let lower = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            Ok((n, r.error, lower, ok))
        })
        .collect::<Result<_, String>>()?;
    let exact = [(1usize, 0.5), (2, 0.125), (3, 0.125)];
    let dev = exact
        .iter()
        .map(|&(n, want)| (results[n - 1].1 - want).abs())
        .fold(0.0f64, f64::max);
    let bad: Vec<usize> = results
        .iter()
        .filter(|(_, e, lower, ok)| !ok || *lower < (1.0 - 1e-6) * e)
        .map(|r| r.0)
        .collect();
    let worst_gap = results
        .iter()
        .map(|(_, e, lower, _)| (e - lower) / e)
        .fold(0.0f64, f64::max);
    Ok((
        dev <= 1e-9 && bad.is_empty(),
        format!("max |E_n - exact| (n=1,2,3) = {dev:.1e}; certificate gap max {worst_gap:.1e}; failing degrees {bad:?}"),
    ))
}

fn bernstein_constant(sigma: &RateReport) -> Outcome {
    let even = |lo: usize, hi: usize| -> Vec<usize> { (lo..=hi).filter(|n| n % 2 == 0).collect() };
    let a = sigma_alpha(1.0, &even(20, 80), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let b = sigma_alpha(1.0, &even(40, 120), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let agree = (a.extrapolated_limit - b.extrapolated_limit).abs();
    let increasing = sigma.samples.windows(2).all(|w| w[1].1 > w[0].1 - 1e-10);
    let bounded = sigma
        .samples
        .iter()
        .all(|s| s.1 <= sigma.extrapolated_limit + 1e-3);
    Ok((
        agree < 1e-3 && increasing && bounded,
        format!(
            "sigma_1 = {:.7} (20-120); windows 20-80 {:.7} vs 40-120 {:.7}, diff {agree:.1e}; 2nE_2n increasing: {increasing}",
            sigma.extrapolated_limit, a.extrapolated_limit, b.extrapolated_limit
        ),
    ))
}

fn vasiliev_totik() -> Outcome {
    let sigma = sigma_alpha(1.0, &DEFAULT_LADDER, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (spec, x0, limit) in [
        ("-1,1", 0.0, 0.01),
        ("-1,1", 0.6, 0.01),
        ("-1,-0.5;0.5,1", 0.75, 0.02),
    ] {
        let r = vt_check_with_sigma(&parse(spec), x0, 1.0, &DEFAULT_LADDER, &sigma)
            .map_err(|e| e.to_string())?;
        ok &= r.relative_gap < limit;
        detail.push(format!(
            "[{spec}] x0={x0}: lhs {:.5} rhs {:.5} gap {:.2}%",
            r.lhs_limit,
            r.rhs,
            100.0 * r.relative_gap
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn proved_bounds() -> Outcome {
    let trials = random_trials(0, 100, DEFAULT_LEMMA23_SAMPLES).map_err(|e| e.to_string())?;
    let failed: Vec<usize> = trials
        .iter()
        .filter(|t| !t.passed)
        .map(|t| t.trial)
        .collect();
    let min = |f: &dyn Fn(&potapprox::verification::TrialReport) -> f64| {
        trials.iter().map(f).fold(f64::INFINITY, f64::min)
    };
    let sandwich = min(&|t| (t.ledger.w0_im - t.ledger.c1).min(2.0 * t.ledger.c1 - t.ledger.w0_im));
    let teeth = min(&|t| t.teeth.margin);
    let l22 = min(&|t| t.lemma22.margin);
    let l23 = min(&|t| t.lemma23.margin);
    let far = min(&|t| t.farfield.margin);
    let positive = [sandwich, teeth, l22, l23, far].iter().all(|&m| m > 0.0);
    Ok((
        failed.is_empty() && positive && trials.len() == 100,
        format!(
            "{} trials, failed {failed:?}; min margins: sandwich {sandwich:.3} teeth {teeth:.3} lemma22(log) {l22:.1} lemma23(log) {l23:.2e} farfield {far:.3}",
            trials.len()
        ),
    ))
}

fn exhaustion() -> Outcome {
    let exh = ExhaustionSequence::cantor(1.0 / 3.0, 4, (-1.0, 1.0)).map_err(|e| e.to_string())?;
    let r = exhaustion_green_check(&exh, &[Complex64::new(0.0, 1.0)]).map_err(|e| e.to_string())?;
    let d = &r.differences[0];
    let increasing = d.iter().all(|&x| x > 0.0);
    let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
    let shrinking = ratios.iter().all(|&q| q >= 1.2);
    Ok((
        increasing && shrinking,
        format!(
            "g(i) by level {:?}; difference ratios {:?}",
            r.values[0], ratios
        ),
    ))
}

fn dichotomy(sigma: &RateReport) -> Outcome {
    let s1 = sigma.extrapolated_limit;
    let seg = ExhaustionSequence::constant(parse("-1,1"), 1);
    let floors = [1e-4, 1e-6, 1e-8];
    let r =
        dichotomy_report(&seg, 0.0, 1.0, &DEFAULT_LADDER, &floors).map_err(|e| e.to_string())?;
    let level = &r.levels[0];
    let in_band = level
        .rates
        .iter()
        .filter(|(n, _)| *n >= 40)
        .all(|(_, v)| (0.9 * s1..=1.1 * s1).contains(v));
    let sup = |y: f64| {
        level
            .sup_estimates
            .iter()
            .find(|s| s.0 == y)
            .map(|s| s.1)
            .unwrap_or(f64::NAN)
    };
    let plateau = (sup(1e-6) - sup(1e-8)).abs();

    let cantor =
        ExhaustionSequence::cantor(1.0 / 3.0, 4, (-1.0, 1.0)).map_err(|e| e.to_string())?;
    let x0 = cantor.levels[4].bands()[0].mid();
    let c =
        dichotomy_report(&cantor, x0, 1.0, &DEFAULT_LADDER, &floors).map_err(|e| e.to_string())?;
    let monotone = c
        .levels
        .iter()
        .all(|l| l.sup_estimates.windows(2).all(|w| w[1].1 >= w[0].1));
    let last = c.levels.last().expect("levels");
    Ok((
        in_band && plateau < 1e-3 && monotone && c.levels.len() == 5,
        format!(
            "segment rates in [0.9,1.1]sigma for n>=40: {in_band}; sup plateau {plateau:.1e}; cantor x0={x0:.6}: level-4 sups {:?}, rates {:?}",
            last.sup_estimates.iter().map(|s| s.1).collect::<Vec<_>>(),
            last.rates
        ),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let even_ladder: Vec<usize> = (10..=60).map(|k| 2 * k).collect();
    let sigma = match sigma_alpha(1.0, &even_ladder, DEFAULT_TOL) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL sigma oracle: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!(
        "sigma_1 oracle over even degrees 20-120 computed in {:.1?}",
        start.elapsed()
    );

    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 closed-form potential theory", Box::new(closed_forms)),
        ("2 conformal identity", Box::new(conformal_identity)),
        (
            "3 Remez exactness and certificates",
            Box::new(remez_exactness),
        ),
        (
            "4 Bernstein constant stability",
            Box::new(|| bernstein_constant(&sigma)),
        ),
        ("5 Vasiliev-Totik limit", Box::new(vasiliev_totik)),
        ("6 proved-bound suite", Box::new(proved_bounds)),
        ("7 exhaustion monotonicity", Box::new(exhaustion)),
        ("8 dichotomy exhibit", Box::new(|| dichotomy(&sigma))),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let t = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!(
            "{} criterion {name} [{:.1?}]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    println!("acceptance total {:.1?}", start.elapsed());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
