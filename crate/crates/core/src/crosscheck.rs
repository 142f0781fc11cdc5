//! Verification harness: named identity checks run over parameter grids,
//! aggregated into machine-readable reports.
//!
//! Every check compares two independently obtained quantities per point.
//! Points that are outside a check's domain are listed with the reason in
//! `filtered`; points whose evaluation fails are listed in `failures` and
//! count as infinite defects. A check never stops part-way through its grid.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{estimate_bound, log_grid, tail_remainder, Expansion};
use crate::closedforms::{
    collapse_defect, density_integral_closed, m1_closed, m1_quadrature, m2_closed, m2_quadrature,
    mellin_sine_values, trig_identity_defect, Route,
};
use crate::error::{MlError, Result};
use crate::kernel::{density, POLE_MARGIN_MIN};
use crate::mp::robust_scaled_series;
use crate::numerics::{MLParams, RegionClass};
use crate::representation::{
    density_integral, eval_at_zero, eval_j, eval_repr, laplace_horizon, laplace_pair_values,
    zero_limit,
};
use crate::series::{scaled_argument, Z_MAX};

type C64 = Complex<f64>;

/// Named coordinates of one evaluated point.
pub type Point = BTreeMap<String, f64>;

/// Registered check names, in the order `all` runs them.
pub const CHECK_NAMES: [&str; 13] = [
    "series_vs_repr",
    "t_zero_limit",
    "m1_routes",
    "m2_routes",
    "theorem34_collapse",
    "trig_identity",
    "mellin_sine",
    "laplace_pair",
    "density_relation",
    "asymptotic_order",
    "bound_24",
    "bound_25",
    "J_decay",
];

pub const DEFAULT_SEED: u64 = 20_240_917;

/// One `(α, β, λ, t)` grid entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: C64,
    pub t: f64,
}

impl GridPoint {
    fn point(&self) -> Point {
        point(&[
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("lambda_re", self.lambda.re),
            ("lambda_im", self.lambda.im),
            ("t", self.t),
        ])
    }

    fn params_point(&self) -> Point {
        let mut p = self.point();
        p.remove("t");
        p
    }
}

/// Inputs shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub grid: Vec<GridPoint>,
    pub seed: u64,
    /// Overrides the sample count of the randomized checks.
    pub samples: Option<usize>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            seed: DEFAULT_SEED,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilteredPoint {
    pub point: Point,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub point: Point,
    pub error: String,
}

/// Both compared quantities at one evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub point: Point,
    pub first: C64,
    pub second: C64,
    pub abs_defect: f64,
    pub rel_defect: f64,
}

/// Aggregated result of one check.
///
/// Failed points enter the maxima as infinite defects, which serialize as
/// `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub grid_points: usize,
    pub max_rel_defect: f64,
    pub max_abs_defect: f64,
    pub worst_case: Point,
    pub passed: bool,
    pub threshold: f64,
    pub seed: Option<u64>,
    pub filtered: Vec<FilteredPoint>,
    pub failures: Vec<PointFailure>,
    /// Auxiliary maxima specific to the check.
    pub stats: BTreeMap<String, f64>,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

enum Outcome {
    Value {
        first: C64,
        second: C64,
        abs: f64,
        rel: f64,
        aux: Vec<(&'static str, f64)>,
    },
    Filtered(String),
    Failed(String),
}

impl Outcome {
    fn compare(first: C64, second: C64) -> Self {
        let abs = (first - second).norm();
        Outcome::Value {
            first,
            second,
            abs,
            rel: abs / second.norm().max(1.0),
            aux: Vec::new(),
        }
    }

    fn with_aux(mut self, name: &'static str, x: f64) -> Self {
        if let Outcome::Value { aux, .. } = &mut self {
            aux.push((name, x));
        }
        self
    }
}

fn point(pairs: &[(&str, f64)]) -> Point {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn real(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// α∈{0.3,0.5,0.7,0.9}, β∈{α/2, α, 1, 1+α/2, 1+0.9α},
/// λ∈{1, 3, −1, −5, re^{±0.8iπα} for r∈{0.5, 2}}, t∈{0.01, 0.1, 1, 5, 20}.
pub fn default_grid() -> Vec<GridPoint> {
    let mut grid = Vec::with_capacity(800);
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let theta = 0.8 * PI * alpha;
        let mut lambdas = vec![real(1.0), real(3.0), real(-1.0), real(-5.0)];
        for r in [0.5, 2.0] {
            lambdas.push(Complex::from_polar(r, theta));
            lambdas.push(Complex::from_polar(r, -theta));
        }
        for beta in [alpha / 2.0, alpha, 1.0, 1.0 + alpha / 2.0, 1.0 + 0.9 * alpha] {
            for &lambda in &lambdas {
                for t in [0.01, 0.1, 1.0, 5.0, 20.0] {
                    grid.push(GridPoint { alpha, beta, lambda, t });
                }
            }
        }
    }
    grid
}

/// Threshold each check is judged against by default.
pub fn default_threshold(name: &str) -> Result<f64> {
    Ok(match name {
        "series_vs_repr" => 1e-7,
        "t_zero_limit" => 1e-6,
        "m1_routes" | "m2_routes" | "theorem34_collapse" => 1e-8,
        "trig_identity" => 1e-13,
        "mellin_sine" | "laplace_pair" => 1e-8,
        "density_relation" => 1e-12,
        "asymptotic_order" => 3.0,
        "bound_24" | "bound_25" => 0.01,
        "J_decay" => 1e-3,
        _ => return Err(unknown(name)),
    })
}

fn unknown(name: &str) -> MlError {
    MlError::UnknownCheck {
        name: name.to_string(),
        valid: CHECK_NAMES.join(", "),
    }
}

/// Runs the named check over `config` and judges it against `threshold`.
pub fn run_check(name: &str, config: &CheckConfig, threshold: f64) -> Result<CheckReport> {
    let index = CHECK_NAMES.iter().position(|&n| n == name).ok_or_else(|| unknown(name))?;
    let seed = config.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let samples = |n: usize| config.samples.unwrap_or(n);
    let (results, seeded) = match name {
        "series_vs_repr" => (series_vs_repr(&config.grid), false),
        "t_zero_limit" => (t_zero_limit(&config.grid), false),
        "m1_routes" => (moment_routes(&config.grid, Moment::First), false),
        "m2_routes" => (moment_routes(&config.grid, Moment::Second), false),
        "theorem34_collapse" => (collapse(&config.grid), false),
        "trig_identity" => (trig_identity(&mut rng, samples(1000)), true),
        "mellin_sine" => (mellin_sine(&mut rng, samples(20)), true),
        "laplace_pair" => (laplace_pair(&mut rng, samples(20)), true),
        "density_relation" => (density_relation(&mut rng, samples(200)), true),
        "asymptotic_order" => (asymptotic_order(), false),
        "bound_24" => (bounds(true), false),
        "bound_25" => (bounds(false), false),
        "J_decay" => (j_decay(), false),
        _ => unreachable!(),
    };
    Ok(assemble(name, threshold, seeded.then_some(seed), results))
}

/// Runs each named check with its default threshold; `"all"` selects every
/// registered check.
pub fn run_checks(names: &[String], config: &CheckConfig) -> Result<Vec<CheckReport>> {
    let selected: Vec<&str> = if names.iter().any(|n| n == "all") {
        CHECK_NAMES.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    for name in &selected {
        default_threshold(name)?;
    }
    selected
        .into_iter()
        .map(|name| run_check(name, config, default_threshold(name)?))
        .collect()
}

fn assemble(name: &str, threshold: f64, seed: Option<u64>, results: Vec<(Point, Outcome)>) -> CheckReport {
    let mut report = CheckReport {
        check_name: name.to_string(),
        grid_points: 0,
        max_rel_defect: 0.0,
        max_abs_defect: 0.0,
        worst_case: Point::new(),
        passed: false,
        threshold,
        seed,
        filtered: Vec::new(),
        failures: Vec::new(),
        stats: BTreeMap::new(),
        rows: Vec::new(),
    };
    let mut worst = -1.0;
    for (pt, outcome) in results {
        let (abs, rel) = match outcome {
            Outcome::Filtered(reason) => {
                report.filtered.push(FilteredPoint { point: pt, reason });
                continue;
            }
            Outcome::Failed(error) => {
                report.failures.push(PointFailure { point: pt.clone(), error });
                (f64::INFINITY, f64::INFINITY)
            }
            Outcome::Value { first, second, abs, rel, aux } => {
                for (k, x) in aux {
                    let e = report.stats.entry(k.to_string()).or_insert(x);
                    *e = e.max(x);
                }
                report.rows.push(Row {
                    point: pt.clone(),
                    first,
                    second,
                    abs_defect: abs,
                    rel_defect: rel,
                });
                // NaN defects are failures too
                let nan = |x: f64| if x.is_nan() { f64::INFINITY } else { x };
                (nan(abs), nan(rel))
            }
        };
        report.grid_points += 1;
        report.max_abs_defect = report.max_abs_defect.max(abs);
        report.max_rel_defect = report.max_rel_defect.max(rel);
        if rel > worst {
            worst = rel;
            report.worst_case = pt;
        }
    }
    report.passed = report.max_rel_defect <= threshold || report.max_abs_defect <= threshold;
    report
}

fn par_map<I, F>(inputs: Vec<I>, f: F) -> Vec<(Point, Outcome)>
where
    I: Send + Sync,
    F: Fn(&I) -> Vec<(Point, Outcome)> + Sync + Send,
{
    let nested: Vec<Vec<(Point, Outcome)>> = inputs.par_iter().map(f).collect();
    nested.into_iter().flatten().collect()
}

/// Validates a grid entry and applies the pole-margin filter.
fn admit(g: &GridPoint) -> std::result::Result<MLParams<f64>, String> {
    let p = MLParams::new(g.alpha, g.beta, g.lambda).map_err(|e| e.to_string())?;
    if p.region() == RegionClass::OutOfScope {
        return Err("lambda = 0 has no integral representation".into());
    }
    if p.region() != RegionClass::ResidueAbsentNegativeReal && p.pole_margin().abs() < POLE_MARGIN_MIN {
        return Err(format!(
            "pole margin {:.3e} is below {POLE_MARGIN_MIN:e}",
            p.pole_margin()
        ));
    }
    Ok(p)
}

/// Grid entries with distinct `(α, β, λ)`, first occurrence kept.
fn distinct_params(grid: &[GridPoint]) -> Vec<GridPoint> {
    let mut seen = std::collections::HashSet::new();
    grid.iter()
        .filter(|g| seen.insert([g.alpha, g.beta, g.lambda.re, g.lambda.im].map(f64::to_bits)))
        .copied()
        .collect()
}

fn failed_or_filtered(e: MlError) -> Outcome {
    match e {
        MlError::Overflow => Outcome::Filtered("value exceeds double range".into()),
        e => Outcome::Failed(e.to_string()),
    }
}

fn series_vs_repr(grid: &[GridPoint]) -> Vec<(Point, Outcome)> {
    par_map(grid.to_vec(), |g| {
        let outcome = (|| {
            let p = match admit(g) {
                Ok(p) => p,
                Err(reason) => return Outcome::Filtered(reason),
            };
            let z = scaled_argument(g.t, &p).norm();
            if z > Z_MAX {
                return Outcome::Filtered(format!("|lambda t^alpha| = {z:.4} exceeds {Z_MAX}"));
            }
            let reference = match robust_scaled_series(g.t, &p, 1e-15) {
                Ok(v) => v,
                Err(e) => return failed_or_filtered(e),
            };
            match eval_repr(g.t, &p, 1e-11) {
                Ok(r) => Outcome::compare(r.value, reference),
                Err(e) => failed_or_filtered(e),
            }
        })();
        vec![(g.point(), outcome)]
    })
}

const APPROACH_TIMES: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

fn t_zero_limit(grid: &[GridPoint]) -> Vec<(Point, Outcome)> {
    par_map(distinct_params(grid), |g| {
        let outcome = (|| {
            let p = match admit(g) {
                Ok(p) => p,
                Err(reason) => return Outcome::Filtered(reason),
            };
            if !(p.beta() >= 1.0) {
                return Outcome::Filtered("the limit at t = 0 needs beta in [1, 1+alpha)".into());
            }
            if p.region() == RegionClass::ResidueAbsentExtended {
                return Outcome::Filtered("the t = 0 representation needs |arg lambda| < pi*alpha or lambda < 0".into());
            }
            let limit = match zero_limit(&p) {
                Ok(l) => real(l),
                Err(e) => return Outcome::Failed(e.to_string()),
            };
            let at_zero = match eval_at_zero(&p, 1e-12) {
                Ok(v) => v.value,
                Err(e) => return Outcome::Failed(e.to_string()),
            };
            let limit_defect = (at_zero - limit).norm();
            let mut tracking: f64 = 0.0;
            let mut gaps = Vec::with_capacity(APPROACH_TIMES.len());
            for t in APPROACH_TIMES {
                let r = match eval_repr(t, &p, 1e-12) {
                    Ok(r) => r.value,
                    Err(e) => return Outcome::Failed(format!("t = {t:e}: {e}")),
                };
                let s = match robust_scaled_series(t, &p, 1e-15) {
                    Ok(s) => s,
                    Err(e) => return Outcome::Failed(format!("t = {t:e}: {e}")),
                };
                tracking = tracking.max((r - s).norm());
                gaps.push((r - limit).norm());
            }
            let (first_gap, last_gap) = (gaps[0], gaps[gaps.len() - 1]);
            if !(last_gap < first_gap) {
                return Outcome::Failed(format!(
                    "distance to the limit grows from {first_gap:.3e} to {last_gap:.3e} as t shrinks"
                ));
            }
            let abs = limit_defect.max(tracking);
            Outcome::Value {
                first: at_zero,
                second: limit,
                abs,
                rel: abs / limit.norm().max(1.0),
                aux: vec![("limit_abs_defect", limit_defect), ("approach_abs_defect", tracking)],
            }
        })();
        vec![(g.params_point(), outcome)]
    })
}

#[derive(Clone, Copy)]
enum Moment {
    First,
    Second,
}

fn moment_routes(grid: &[GridPoint], which: Moment) -> Vec<(Point, Outcome)> {
    par_map(distinct_params(grid), |g| {
        let outcome = (|| {
            let p = match admit(g) {
                Ok(p) => p,
                Err(reason) => return Outcome::Filtered(reason),
            };
            let (a, b) = (p.alpha(), p.beta());
            let in_range = match which {
                Moment::First => b > 1.0 && b < 1.0 + a,
                Moment::Second => b >= 1.0 && b < 1.0 + a,
            };
            if !in_range {
                let range = match which {
                    Moment::First => "(1, 1+alpha)",
                    Moment::Second => "[1, 1+alpha)",
                };
                return Outcome::Filtered(format!("the moment needs beta in {range}"));
            }
            if p.region() != RegionClass::ResiduePresent {
                return Outcome::Filtered("the closed forms need |arg lambda| < pi*alpha".into());
            }
            let closed = |route| match which {
                Moment::First => m1_closed(&p, route),
                Moment::Second => m2_closed(&p, route),
            };
            let quad = match which {
                Moment::First => m1_quadrature(&p, 1e-13),
                Moment::Second => m2_quadrature(&p, 1e-13),
            };
            let (contour, quad) = match (closed(Route::Contour), quad) {
                (Ok(c), Ok(q)) => (c, q.value),
                (Err(e), _) | (_, Err(e)) => return Outcome::Failed(e.to_string()),
            };
            let route_defect = match closed(Route::Mellin) {
                Ok(m) => (m - contour).norm() / contour.norm(),
                Err(e) => return Outcome::Failed(format!("Mellin route: {e}")),
            };
            let mellin_regime = a > 0.5 && p.lambda().re > 0.0;
            let abs = (quad - contour).norm();
            let out = Outcome::Value {
                first: quad,
                second: contour,
                abs,
                rel: abs / contour.norm(),
                aux: Vec::new(),
            };
            if mellin_regime {
                if route_defect > 1e-12 {
                    return Outcome::Failed(format!(
                        "contour and Mellin closed forms differ by {route_defect:.3e} relative"
                    ));
                }
                out.with_aux("route_rel_defect", route_defect)
            } else {
                out.with_aux("route_rel_defect_outside_mellin_regime", route_defect)
            }
        })();
        vec![(g.params_point(), outcome)]
    })
}

fn collapse(grid: &[GridPoint]) -> Vec<(Point, Outcome)> {
    par_map(distinct_params(grid), |g| {
        let outcome = (|| {
            let p = match admit(g) {
                Ok(p) => p,
                Err(reason) => return Outcome::Filtered(reason),
            };
            let (a, b) = (p.alpha(), p.beta());
            if b == a {
                return match (density_integral(&p, 1e-12), density_integral_closed(&p)) {
                    (Err(MlError::Divergent), Err(MlError::Divergent)) => {
                        Outcome::compare(real(0.0), real(0.0))
                    }
                    _ => Outcome::Failed("beta = alpha did not report divergence".into()),
                };
            }
            if b < 1.0 {
                return Outcome::Filtered("the undamped integral needs beta in [1, 1+alpha)".into());
            }
            if p.region() != RegionClass::ResiduePresent {
                return Outcome::Filtered("the closed values need |arg lambda| < pi*alpha".into());
            }
            let (quad, closed) = match (density_integral(&p, 1e-12), density_integral_closed(&p)) {
                (Ok(q), Ok(c)) => (q.value, c),
                (Err(e), _) | (_, Err(e)) => return Outcome::Failed(e.to_string()),
            };
            let abs = (quad - closed).norm();
            let out = Outcome::Value {
                first: quad,
                second: closed,
                abs,
                rel: abs / closed.norm(),
                aux: Vec::new(),
            };
            if b == 1.0 {
                return out;
            }
            match collapse_defect(&p) {
                Ok(d) if d <= 1e-12 * closed.norm().max(1.0) => out.with_aux("collapse_abs_defect", d),
                Ok(d) => Outcome::Failed(format!("moment assembly misses the closed value by {d:.3e}")),
                Err(e) => Outcome::Failed(e.to_string()),
            }
        })();
        vec![(g.params_point(), outcome)]
    })
}

fn trig_identity(rng: &mut ChaCha8Rng, n: usize) -> Vec<(Point, Outcome)> {
    (0..n)
        .map(|_| {
            let alpha = rng.gen_range(f64::EPSILON..1.0);
            let beta = rng.gen_range(f64::EPSILON..1.0 + alpha);
            let d = trig_identity_defect(alpha, beta);
            let outcome = Outcome::Value {
                first: real(d),
                second: real(0.0),
                abs: d,
                rel: d,
                aux: Vec::new(),
            };
            (point(&[("alpha", alpha), ("beta", beta)]), outcome)
        })
        .collect()
}

fn mellin_sine(rng: &mut ChaCha8Rng, n: usize) -> Vec<(Point, Outcome)> {
    let inputs: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.2..3.0), rng.gen_range(-1.2..1.2)))
        .collect();
    par_map(inputs, |&(s, phi)| {
        let outcome = match mellin_sine_values(s, phi, 1e-12) {
            Ok((integral, exact)) => Outcome::compare(real(integral), real(exact)),
            Err(e) => Outcome::Failed(e.to_string()),
        };
        vec![(point(&[("s", s), ("phi", phi)]), outcome)]
    })
}

fn laplace_pair(rng: &mut ChaCha8Rng, n: usize) -> Vec<(Point, Outcome)> {
    let mut inputs = Vec::with_capacity(n);
    while inputs.len() < n {
        let alpha: f64 = rng.gen_range(0.3..0.95);
        let beta = rng.gen_range(0.2..1.0 + alpha);
        let lambda = if inputs.len() % 2 == 0 {
            let l: f64 = rng.gen_range(0.1..3.0);
            real(if rng.gen_bool(0.5) { l } else { -l })
        } else {
            Complex::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(-PI..PI))
        };
        let Ok(p) = MLParams::new(alpha, beta, lambda) else { continue };
        if admit_params(&p).is_err() {
            continue;
        }
        let s = (1.5 * p.pole_modulus()).max(0.5) * rng.gen_range(1.0..2.0);
        inputs.push((p, s));
    }
    par_map(inputs, |(p, s)| {
        let s = *s;
        let tol = 1e-10;
        let outcome = match laplace_pair_values(s, p, laplace_horizon(s, p, tol), tol) {
            Ok((numeric, closed)) => Outcome::compare(numeric, closed),
            Err(e) => Outcome::Failed(e.to_string()),
        };
        let l = p.lambda();
        let pt = point(&[
            ("alpha", p.alpha()),
            ("beta", p.beta()),
            ("lambda_re", l.re),
            ("lambda_im", l.im),
            ("s", s),
        ]);
        vec![(pt, outcome)]
    })
}

fn admit_params(p: &MLParams<f64>) -> std::result::Result<(), String> {
    let l = p.lambda();
    admit(&GridPoint {
        alpha: p.alpha(),
        beta: p.beta(),
        lambda: l,
        t: 0.0,
    })
    .map(|_| ())
}

fn density_relation(rng: &mut ChaCha8Rng, n: usize) -> Vec<(Point, Outcome)> {
    (0..n)
        .map(|_| {
            let v = 10f64.powf(rng.gen_range(-3.0..3.0));
            let alpha = rng.gen_range(0.05..0.95);
            let lambda = Complex::from_polar(10f64.powf(rng.gen_range(-1.0..1.0)), rng.gen_range(-PI..PI));
            let pt = point(&[
                ("v", v),
                ("alpha", alpha),
                ("lambda_re", lambda.re),
                ("lambda_im", lambda.im),
            ]);
            let p = match MLParams::new(alpha, alpha, lambda) {
                Ok(p) => p,
                Err(e) => return (pt, Outcome::Filtered(e.to_string())),
            };
            let outcome = match admit_params(&p) {
                Err(reason) => Outcome::Filtered(reason),
                Ok(()) => match (density(v, &p), p.with_beta(1.0).and_then(|q| density(v, &q))) {
                    (Ok(f_aa), Ok(f_a1)) => Outcome::compare(f_aa, -f_a1 * v / lambda),
                    (Err(e), _) | (_, Err(e)) => Outcome::Failed(e.to_string()),
                },
            };
            (pt, outcome)
        })
        .collect()
}

const ASYMPTOTIC_ORDER: usize = 3;

fn asymptotic_order() -> Vec<(Point, Outcome)> {
    let mut inputs = Vec::new();
    for alpha in [0.5, 0.7] {
        for lambda in [-1.0, 1.0] {
            for beta in [1.0, alpha] {
                inputs.push(MLParams::real(alpha, beta, lambda).expect("fixed parameters are valid"));
            }
        }
    }
    par_map(inputs, |p| {
        let k = ASYMPTOTIC_ORDER;
        let alpha = p.alpha();
        // the remainder after K terms decays like t^{-(K+1)α}, one power
        // of t faster for the β = α expansion
        let weight = match Expansion::for_params(p) {
            Ok(Expansion::BetaOne) => (k + 1) as f64 * alpha,
            _ => (k + 1) as f64 * alpha + 1.0,
        };
        let times: Vec<f64> = (0..7).map(|i| 10.0 * 2f64.powi(i)).collect();
        let scaled: Vec<Result<f64>> = times
            .iter()
            .map(|&t| Ok(tail_remainder(t, p, k, 1e-13)?.value.norm() * t.powf(weight)))
            .collect();
        times
            .windows(2)
            .zip(scaled.windows(2))
            .map(|(t, r)| {
                let pt = point(&[
                    ("alpha", alpha),
                    ("beta", p.beta()),
                    ("lambda_re", p.lambda().re),
                    ("lambda_im", 0.0),
                    ("t", t[1]),
                ]);
                let outcome = match (&r[0], &r[1]) {
                    (Ok(a), Ok(b)) => {
                        let factor = (b / a).max(a / b);
                        Outcome::Value {
                            first: real(*a),
                            second: real(*b),
                            abs: factor,
                            rel: factor,
                            aux: Vec::new(),
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => Outcome::Failed(e.to_string()),
                };
                (pt, outcome)
            })
            .collect()
    })
}

/// Bound constants on `[1e-2, 1e3]` against `[1e-2, 2e3]` with the same
/// point density.
fn bounds(beta_one: bool) -> Vec<(Point, Outcome)> {
    let mut inputs = Vec::new();
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        for lambda in [-1.0, 1.0, 2.0] {
            let beta = if beta_one { 1.0 } else { alpha };
            inputs.push(MLParams::real(alpha, beta, lambda).expect("fixed parameters are valid"));
        }
    }
    let short = log_grid(1e-2, 1e3, 100);
    let long = log_grid(1e-2, 2e3, 106);
    par_map(inputs, |p| {
        let pt = point(&[
            ("alpha", p.alpha()),
            ("beta", p.beta()),
            ("lambda_re", p.lambda().re),
            ("lambda_im", 0.0),
        ]);
        let outcome = match (estimate_bound(p, &short, 1e-12), estimate_bound(p, &long, 1e-12)) {
            (Ok(a), Ok(b)) => {
                let change = (b.constant / a.constant - 1.0).abs();
                Outcome::Value {
                    first: real(a.constant),
                    second: real(b.constant),
                    abs: change,
                    rel: change,
                    aux: vec![
                        ("t_star", b.t_star),
                        ("tail_limit_over_constant", b.tail_limit / b.constant),
                    ],
                }
            }
            (Err(e), _) | (_, Err(e)) => Outcome::Failed(e.to_string()),
        };
        vec![(pt, outcome)]
    })
}

const J_TIMES: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

fn j_decay() -> Vec<(Point, Outcome)> {
    let mut inputs = Vec::new();
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        for lambda in [0.5, 1.0, 2.0] {
            inputs.push(MLParams::real(alpha, 1.0, lambda).expect("fixed parameters are valid"));
        }
    }
    par_map(inputs, |p| {
        let pt = point(&[("alpha", p.alpha()), ("lambda_re", p.lambda().re), ("lambda_im", 0.0)]);
        let j = |t: f64| eval_j(t, p, 1e-12).map(|q| q.value.norm());
        let outcome = (|| {
            let j0 = match j(0.0) {
                Ok(v) if v.is_finite() => v,
                Ok(v) => return Outcome::Failed(format!("J(0) = {v}")),
                Err(e) => return Outcome::Failed(format!("J(0): {e}")),
            };
            let mut aux = Vec::new();
            if p.alpha() == 0.5 && p.lambda().re == 1.0 {
                let d = (j0 - PI).abs();
                if d > 1e-8 {
                    return Outcome::Failed(format!("J(0) = {j0} differs from pi by {d:.3e}"));
                }
                aux.push(("j0_pi_abs_defect", d));
            }
            let mut last = f64::INFINITY;
            for t in J_TIMES {
                match j(t) {
                    Ok(v) if v < last => last = v,
                    Ok(v) => return Outcome::Failed(format!("J({t}) = {v} does not decrease")),
                    Err(e) => return Outcome::Failed(format!("J({t}): {e}")),
                }
            }
            match (j(1.0), j(100.0)) {
                (Ok(j1), Ok(j100)) => {
                    let ratio = j100 / j1;
                    Outcome::Value {
                        first: real(j1),
                        second: real(j100),
                        abs: ratio,
                        rel: ratio,
                        aux,
                    }
                }
                (Err(e), _) | (_, Err(e)) => Outcome::Failed(e.to_string()),
            }
        })();
        vec![(pt, outcome)]
    })
}

/// `x` in scientific notation with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", digits.saturating_sub(1), x)
    } else {
        x.to_string()
    }
}

fn format_point(p: &Point) -> String {
    p.iter()
        .map(|(k, v)| format!("{k}={}", format_sig(*v, 17)))
        .collect::<Vec<_>>()
        .join(";")
}

/// The reports as one JSON array.
pub fn reports_to_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// One CSV row per evaluated point of every report.
pub fn reports_to_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("check,point,first_re,first_im,second_re,second_im,abs_defect,rel_defect\n");
    for r in reports {
        for row in &r.rows {
            let f = |x: f64| format_sig(x, 17);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.check_name,
                format_point(&row.point),
                f(row.first.re),
                f(row.first.im),
                f(row.second.re),
                f(row.second.im),
                f(row.abs_defect),
                f(row.rel_defect)
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> CheckConfig {
        CheckConfig {
            grid: default_grid().into_iter().filter(|g| g.alpha == 0.5).collect(),
            seed: 7,
            samples: Some(12),
        }
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_grid();
        assert_eq!(grid.len(), 800);
        assert_eq!(distinct_params(&grid).len(), 160);
    }

    #[test]
    fn unknown_check_is_rejected() {
        let err = run_check("no_such_check", &small_config(), 1.0).unwrap_err();
        assert!(matches!(err, MlError::UnknownCheck { .. }));
        assert!(err.to_string().contains("trig_identity"));
        assert!(default_threshold("nope").is_err());
        assert!(run_checks(&["trig_identity".into(), "nope".into()], &small_config()).is_err());
    }

    #[test]
    fn passed_matches_thresholds() {
        let cfg = small_config();
        for name in ["trig_identity", "density_relation", "series_vs_repr"] {
            let r = run_check(name, &cfg, default_threshold(name).unwrap()).unwrap();
            assert_eq!(r.passed, r.max_rel_defect <= r.threshold || r.max_abs_defect <= r.threshold);
            assert!(r.passed, "{name}: {:?}", r.failures);
            let strict = run_check(name, &cfg, 0.0).unwrap();
            assert_eq!(strict.passed, strict.max_rel_defect == 0.0 || strict.max_abs_defect == 0.0);
        }
    }

    #[test]
    fn every_point_accounted_for() {
        let cfg = CheckConfig {
            grid: default_grid().into_iter().filter(|g| g.alpha == 0.9).collect(),
            ..small_config()
        };
        let r = run_check("series_vs_repr", &cfg, 1e-7).unwrap();
        assert_eq!(r.grid_points + r.filtered.len(), cfg.grid.len());
        assert_eq!(r.rows.len() + r.failures.len(), r.grid_points);
        assert!(r.filtered.iter().all(|f| !f.reason.is_empty()));
        assert!(r.filtered.iter().any(|f| f.reason.contains("exceeds 30")));
    }

    #[test]
    fn randomized_checks_are_deterministic() {
        let cfg = small_config();
        let a = run_check("density_relation", &cfg, 1e-12).unwrap();
        let b = run_check("density_relation", &cfg, 1e-12).unwrap();
        assert_eq!(reports_to_json(&[a.clone()]), reports_to_json(&[b]));
        assert_eq!(a.seed, Some(7));
        let other = run_check("density_relation", &CheckConfig { seed: 8, ..cfg }, 1e-12).unwrap();
        assert_ne!(a.rows, other.rows);
    }

    #[test]
    fn failures_degrade_instead_of_abort() {
        let mut r = assemble(
            "x",
            1e-3,
            None,
            vec![
                (point(&[("a", 1.0)]), Outcome::compare(real(1.0), real(1.0))),
                (point(&[("a", 2.0)]), Outcome::Failed("boom".into())),
                (point(&[("a", 3.0)]), Outcome::Filtered("skip".into())),
            ],
        );
        assert_eq!(r.grid_points, 2);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.filtered.len(), 1);
        assert!(!r.passed);
        assert_eq!(r.worst_case["a"], 2.0);
        r.rows.clear();
        let json = reports_to_json(&[r]);
        assert!(json.contains("\"max_abs_defect\": null"));
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let r = run_check("trig_identity", &small_config(), 1e-13).unwrap();
        let csv = reports_to_csv(&[r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 13);
        assert!(lines[1].starts_with("trig_identity,alpha="));
        assert_eq!(lines[1].split(',').count(), 8);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.1, 17), "1.0000000000000001e-1");
        assert_eq!(format_sig(PI, 10), "3.141592654e0");
        assert_eq!(format_sig(f64::INFINITY, 17), "inf");
        assert_eq!(format_sig(0.1, 17).parse::<f64>().unwrap(), 0.1);
    }
}
