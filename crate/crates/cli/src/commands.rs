use std::time::Instant;

use lerw_core::actions::{c_bc_prime, SpinModel, GRASSMANN_MAX_VERTICES};
use lerw_core::graph::WeightedGraph;
use lerw_core::heaps::{verify_bijection, verify_heaps_ratio, verify_viennot};
use lerw_core::lattice::{limit_run, Ball, Point};
use lerw_core::lerw::lerw_probability;
use lerw_core::loop_model::{
    chiral_numerator_enumerate, gamma, gamma_coloured_enumerate, gamma_prime, mask_of, theta, theta_bound,
    theta_coloured_enumerate, z_cycle_sum, Method, COLOURED_MAX_VERTICES, ENUMERATE_MAX_VERTICES,
};
use lerw_core::rational::format_rational;
use lerw_core::sampler::{log_log_fit, stopped_lerw_hits, SampleReport};
use lerw_core::walks::self_avoiding_walks;
use lerw_core::{Error, Rational, Result};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{fingerprint, Check, Status, VerificationReport};

/// Walks in the exhaustive bijection check have at most this many steps.
pub const BIJECTION_MAX_STEPS: usize = 8;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub degree: usize,
    pub triples: Option<usize>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { degree: 8, triples: None, seed: 0 }
    }
}

/// All ordered triples of distinct vertices, or `k` of them chosen by `seed`.
pub fn select_triples(n: usize, k: Option<usize>, seed: u64) -> Vec<(usize, usize, usize)> {
    let mut all = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a != b && b != c && a != c {
                    all.push((a, b, c));
                }
            }
        }
    }
    if let Some(k) = k.filter(|&k| k < all.len()) {
        all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        all.truncate(k);
        all.sort();
    }
    all
}

fn triple_name(g: &WeightedGraph, a: usize, b: usize, c: usize) -> String {
    format!("({},{},{})", g.name(a), g.name(b), g.name(c))
}

fn partition_checks(g: &WeightedGraph, z: &Rational, models: &Option<(SpinModel, SpinModel)>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if g.len() <= ENUMERATE_MAX_VERTICES {
        checks.push(Check::equal("Z cycle enumeration = determinant", &z_cycle_sum(g, Method::Enumerate)?, z));
    } else {
        checks.push(Check::skipped("Z cycle enumeration = determinant", "size"));
    }
    match models {
        Some((sym, chiral)) => {
            checks.push(Check::equal("Z' grassmann = cycle sum", &chiral.partition(), z));
            checks.push(Check::equal("Z grassmann = cycle sum", &sym.partition(), z));
        }
        None => {
            checks.push(Check::skipped("Z' grassmann = cycle sum", "size"));
            checks.push(Check::skipped("Z grassmann = cycle sum", "size"));
        }
    }
    Ok(checks)
}

fn triple_checks(
    g: &WeightedGraph,
    z: &Rational,
    models: &Option<(SpinModel, SpinModel)>,
    (a, b, c): (usize, usize, usize),
) -> Result<Vec<Check>> {
    let t = triple_name(g, a, b, c);
    let n = g.len();
    let mut checks = Vec::new();
    let gd = gamma(g, a, b, c, Method::Determinant)?;
    let th = theta(g, a, b, c)?;
    if n <= ENUMERATE_MAX_VERTICES {
        checks.push(Check::equal(format!("gamma enumerate = determinant {t}"), &gamma(g, a, b, c, Method::Enumerate)?, &gd));
    }
    if n <= COLOURED_MAX_VERTICES {
        let gc = gamma_coloured_enumerate(g, a, b, c)?;
        checks.push(Check::equal(format!("gamma coloured = determinant {t}"), &gc, &gd));
        checks.push(Check::equal(format!("theta coloured = walk triples {t}"), &theta_coloured_enumerate(g, a, b, c)?, &th));
        if let Some((sym, chiral)) = models {
            checks.push(Check::equal(format!("numerator = gamma + theta {t}"), &sym.numerator(a, b, c), &(gc + &th)));
            let split = chiral_numerator_enumerate(g, a, b, c)?;
            let gp = gamma_prime(g, a, b, c, Method::Determinant)?;
            checks.push(
                Check::equal(format!("numerator' = expansion {t}"), &chiral.numerator(a, b, c), &split.total())
                    .note(format!(
                        "self-avoiding part {} (gamma' {}), through c {}",
                        format_rational(&split.self_avoiding),
                        format_rational(&gp),
                        format_rational(&split.through_c)
                    )),
            );
        }
    }
    if g.kill(c).is_zero() {
        return Ok(checks);
    }
    let exact = match lerw_probability(g, a, b, c) {
        Ok(p) => Some(p),
        Err(Error::TooLarge { .. }) => {
            checks.push(Check::skipped(format!("U' = lerw {t}"), "size"));
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(p) = &exact {
        let loop_u = c_bc_prime(g, b, c) * gamma_prime(g, a, b, c, Method::Determinant)? / z;
        checks.push(Check::equal(format!("U' loop model = lerw {t}"), &loop_u, p));
        if let Some((_, chiral)) = models {
            let u = lerw_core::actions::observable_from(chiral, g, a, b, c);
            checks.push(Check::equal(format!("U' grassmann = lerw {t}"), &u, p));
        }
    }
    let bound = theta_bound(g, a, b, c)?;
    checks.push(Check::with_status(
        format!("theta bound {t}"),
        bound.holds,
        format_rational(&bound.lhs),
        format_rational(&bound.rhs),
    ));
    Ok(checks)
}

fn heap_checks(g: &WeightedGraph, degree: usize) -> Result<Vec<Check>> {
    let n = g.len();
    let mut checks = Vec::new();
    let mut sets: Vec<(String, u64)> = (0..n).map(|x| (g.name(x).to_string(), 1u64 << x)).collect();
    sets.push(("all".into(), mask_of(&(0..n).collect::<Vec<_>>())));
    for (name, v) in sets {
        let r = verify_heaps_ratio(g, v, degree)?;
        checks.push(series_check(format!("heaps ratio V={name} to degree {degree}"), &r));
    }
    for gamma in self_avoiding_walks(g, 0, n - 1) {
        let r = verify_viennot(g, &gamma, degree)?;
        checks.push(series_check(format!("walks with erasure {} to degree {degree}", gamma.display(g)), &r));
    }
    let steps = degree.min(BIJECTION_MAX_STEPS);
    let b = verify_bijection(g, steps);
    checks.push(
        Check::with_status(
            format!("decompose/reconstruct bijection, walks <= {steps} steps"),
            b.holds(),
            b.walks.to_string(),
            b.walks.to_string(),
        )
        .note(format!(
            "round trip {}, weight {}, collisions {}, audit {}, outside H_gamma {}",
            b.round_trip_failures, b.weight_failures, b.collisions, b.audit_failures, b.outside_h_gamma
        )),
    );
    Ok(checks)
}

fn series_check(name: String, r: &lerw_core::heaps::SeriesCheck) -> Check {
    match r.first_mismatch {
        None => Check::with_status(name, true, r.lhs.join(" "), r.rhs.join(" ")),
        Some(k) => Check::with_status(name, false, r.lhs[k].clone(), r.rhs[k].clone())
            .note(format!("first mismatch at degree {k}")),
    }
}

pub fn verify(g: &WeightedGraph, opts: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    if opts.degree > lerw_core::heaps::MAX_DEGREE {
        return Err(Error::Invalid(format!("degree {} exceeds {}", opts.degree, lerw_core::heaps::MAX_DEGREE)));
    }
    g.require_absorption()?;
    let mut report = VerificationReport::new("verify");
    report.fingerprint = Some(fingerprint(g));
    if opts.triples.is_some() {
        report.seed = Some(opts.seed);
    }
    let models = if g.len() <= GRASSMANN_MAX_VERTICES {
        Some((SpinModel::symmetric(g)?, SpinModel::chiral(g)?))
    } else {
        None
    };
    let z = z_cycle_sum(g, Method::Determinant)?;
    report.checks.extend(partition_checks(g, &z, &models)?);
    let triples = select_triples(g.len(), opts.triples, opts.seed);
    let per_triple: Vec<Vec<Check>> =
        triples.par_iter().map(|&t| triple_checks(g, &z, &models, t)).collect::<Result<_>>()?;
    report.checks.extend(per_triple.into_iter().flatten());
    report.checks.extend(heap_checks(g, opts.degree)?);
    report.wall_time_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn parse_point(text: &str, dimension: usize) -> Result<Point> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != dimension {
        return Err(Error::Parse(format!("'{text}' is not a point in dimension {dimension}")));
    }
    let mut p = [0i32; 3];
    for (k, s) in parts.iter().enumerate() {
        p[k] = s.parse().map_err(|_| Error::Parse(format!("bad coordinate '{s}'")))?;
    }
    Ok(p)
}

/// Ratio window for successive errors when `m2` quadruples.
pub const DECAY_RATIO: (f64, f64) = (3.0, 5.0);

pub fn limit(dimension: usize, radius: u32, schedule: &[Rational], a: Point, b: Point) -> Result<VerificationReport> {
    let start = Instant::now();
    if schedule.is_empty() {
        return Err(Error::Invalid("empty schedule".into()));
    }
    let ball = Ball::new(dimension, radius)?;
    let run = limit_run(&ball, ball.index_of(a)?, ball.index_of(b)?, schedule)?;
    let mut report = VerificationReport::new("limit");
    let last = run.rows.last().unwrap();
    let first = &run.rows[0];
    report.checks.push(Check::with_status(
        "error does not grow along the schedule",
        run.rows.windows(2).all(|w| w[1].error <= w[0].error),
        format_rational(&first.error),
        format_rational(&last.error),
    ));
    for (k, ratio) in run.ratios.iter().enumerate() {
        let name = format!("error ratio m2={} -> {}", format_rational(&run.rows[k].m2), format_rational(&run.rows[k + 1].m2));
        let check = match ratio {
            Some(x) => Check::with_status(
                name,
                (DECAY_RATIO.0..=DECAY_RATIO.1).contains(x),
                format!("{x:.4}"),
                format!("[{}, {}]", DECAY_RATIO.0, DECAY_RATIO.1),
            ),
            None => Check::with_status(name, false, "undefined".into(), format!("[{}, {}]", DECAY_RATIO.0, DECAY_RATIO.1))
                .note(if run.rows[k].error.is_zero() {
                    "both errors are exactly zero"
                } else {
                    "later error is exactly zero"
                }),
        };
        report.checks.push(check);
    }
    report.details = Some(serde_json::to_value(&run).expect("limit reports serialize"));
    report.wall_time_ms = start.elapsed().as_millis();
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub radius: u32,
    pub distances: Vec<i32>,
    pub hits: Vec<u64>,
    pub probabilities: Vec<f64>,
    pub exponent: Option<f64>,
    pub standard_error: Option<f64>,
}

/// Expected one-point decay exponents `d - dim`: `2 - 5/4` in the plane,
/// `3 - 1.62` in space (the latter only as a reference value).
pub fn expected_exponent(dimension: usize) -> Option<f64> {
    match dimension {
        2 => Some(0.75),
        3 => Some(3.0 - 1.62),
        _ => None,
    }
}

pub const EXPONENT_TOLERANCE: f64 = 0.1;

/// Default target distances: powers of two up to a quarter of the radius,
/// away from the boundary.
pub fn default_distances(radius: u32) -> Vec<i32> {
    let mut out = Vec::new();
    let mut r = 1;
    while 4 * r <= radius as i32 {
        out.push(r);
        r *= 2;
    }
    if out.len() < 2 {
        out = (1..radius as i32).collect();
    }
    out
}

pub fn scaling(
    dimension: usize,
    radii: &[u32],
    samples: u64,
    seed: u64,
    distances: Option<&[i32]>,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let expected = expected_exponent(dimension)
        .ok_or_else(|| Error::Invalid(format!("scaling runs in dimension 2 or 3, not {dimension}")))?;
    if samples == 0 {
        return Err(Error::Invalid("samples must be positive".into()));
    }
    if radii.is_empty() {
        return Err(Error::Invalid("no radii".into()));
    }
    let mut report = VerificationReport::new("scaling");
    report.seed = Some(seed);
    let mut rows = Vec::new();
    for &radius in radii {
        let ball = Ball::new(dimension, radius)?;
        let ds = distances.map(<[i32]>::to_vec).unwrap_or_else(|| default_distances(radius));
        let s = stopped_lerw_hits(&ball, &ds, seed, samples)?;
        let ps: Vec<f64> = s.hits.iter().map(|&h| h as f64 / samples as f64).collect();
        let xs: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
        let name = format!("one-point decay exponent d={dimension} R={radius}");
        let fit = log_log_fit(&xs, &ps);
        let (exponent, se) = match &fit {
            Ok((slope, se)) => (Some(-slope), Some(*se)),
            Err(_) => (None, None),
        };
        let mut check = match exponent {
            Some(e) if dimension == 2 => Check::with_status(
                name,
                (e - expected).abs() <= EXPONENT_TOLERANCE,
                format!("{e:.4}"),
                format!("{expected} +- {EXPONENT_TOLERANCE}"),
            ),
            Some(e) => Check::info(name, format!("{e:.4}"), format!("{expected:.2}")).note("reference value only"),
            None => Check::info(name, "none".into(), format!("{expected}")),
        };
        if let Err(e) = fit {
            check = check.note(e.to_string());
        } else if let Some(se) = se {
            let note = if check.note.is_empty() { String::new() } else { format!("{}; ", check.note) };
            check = check.note(format!("{note}standard error {se:.4}"));
        }
        report.checks.push(check);
        rows.push(ScalingRow { radius, distances: ds, hits: s.hits, probabilities: ps, exponent, standard_error: se });
    }
    // only the largest radius gates a planar run
    if dimension == 2 {
        let n = report.checks.len();
        for c in &mut report.checks[..n - 1] {
            if c.status == Status::Fail {
                c.status = Status::Info;
            }
        }
    }
    report.details = Some(serde_json::to_value(&rows).expect("scaling rows serialize"));
    report.wall_time_ms = start.elapsed().as_millis();
    Ok(report)
}

pub fn sample(g: &WeightedGraph, from: usize, samples: u64, seed: u64) -> Result<SampleReport> {
    lerw_core::sampler::lerw_sample(g, from, seed, samples)
}
