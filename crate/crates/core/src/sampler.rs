//! Monte Carlo sampling of loop-erased walks.
//!
//! Samples are drawn in blocks; block `k` uses ChaCha8 seeded with `seed` on
//! stream `k`, so results do not depend on how blocks are scheduled.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::lattice::Ball;
use crate::rational::to_f64;
use crate::walks::LoopErasure;

pub const BLOCK: u64 = 4096;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn blocks(n: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let count = n.div_ceil(BLOCK);
    (0..count).into_par_iter().map(move |k| (k, BLOCK.min(n - k * BLOCK)))
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleCount {
    pub saw: Vec<String>,
    pub exit: String,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub seed: u64,
    pub n_samples: u64,
    pub counts: Vec<SampleCount>,
    #[serde(skip)]
    raw: BTreeMap<Vec<usize>, u64>,
}

impl SampleReport {
    /// Samples whose erased path contains `b` and ends at `c`.
    pub fn one_point(&self, b: usize, c: usize) -> u64 {
        self.raw.iter().filter(|(p, _)| p.last() == Some(&c) && p.contains(&b)).map(|(_, n)| n).sum()
    }

    pub fn paths(&self) -> &BTreeMap<Vec<usize>, u64> {
        &self.raw
    }
}

/// `n` independent loop-erased killed walks from `a`. The exit vertex is
/// where the walk is killed, i.e. the end of its erasure.
pub fn lerw_sample(g: &WeightedGraph, a: usize, seed: u64, n: u64) -> Result<SampleReport> {
    g.require_absorption()?;
    if a >= g.len() {
        return Err(Error::Invalid("start vertex out of range".into()));
    }
    let q = g.step_matrix();
    // cumulative step table; the remainder of the unit interval is death
    let table: Vec<Vec<(f64, usize)>> = (0..g.len())
        .map(|x| {
            let mut acc = 0.0;
            q.row(x)
                .iter()
                .map(|(y, w)| {
                    acc += to_f64(w);
                    (acc, *y)
                })
                .collect()
        })
        .collect();
    let raw = blocks(n)
        .map(|(k, size)| {
            let mut rng = block_rng(seed, k);
            let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
            for _ in 0..size {
                let mut le = LoopErasure::new(g.len(), a);
                let mut x = a;
                loop {
                    let u: f64 = rng.random();
                    match table[x].iter().find(|(c, _)| u < *c) {
                        Some(&(_, y)) => {
                            le.push(y);
                            x = y;
                        }
                        None => break,
                    }
                }
                *counts.entry(le.path().to_vec()).or_default() += 1;
            }
            counts
        })
        .reduce(BTreeMap::new, |mut acc, m| {
            for (k, v) in m {
                *acc.entry(k).or_default() += v;
            }
            acc
        });
    let counts = raw
        .iter()
        .map(|(p, &count)| SampleCount {
            saw: p.iter().map(|&x| g.name(x).to_string()).collect(),
            exit: g.name(*p.last().unwrap()).to_string(),
            count,
        })
        .collect();
    Ok(SampleReport { seed, n_samples: n, counts, raw })
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Hit counts of `targets` on the erasure of simple random walks from the
/// origin of `ball`, stopped on reaching the boundary.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingSample {
    pub seed: u64,
    pub n_samples: u64,
    pub distances: Vec<i32>,
    pub hits: Vec<u64>,
}

pub fn stopped_lerw_hits(ball: &Ball, distances: &[i32], seed: u64, n: u64) -> Result<ScalingSample> {
    if n == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let targets: Vec<usize> = distances.iter().map(|&r| ball.on_axis(r)).collect::<Result<_>>()?;
    let size = ball.len();
    let origin = ball.origin();
    let boundary = ball.boundary();
    let hits = blocks(n)
        .map(|(k, count)| {
            let mut rng = block_rng(seed, k);
            let mut hits = vec![0u64; targets.len()];
            // erased path with the position of each vertex on it
            let mut path: Vec<usize> = Vec::new();
            let mut slot = vec![usize::MAX; size];
            for _ in 0..count {
                for &x in &path {
                    slot[x] = usize::MAX;
                }
                path.clear();
                path.push(origin);
                slot[origin] = 0;
                let mut x = origin;
                while !boundary[x] {
                    let nb = ball.neighbours(x);
                    let y = nb[rng.random_range(0..nb.len())];
                    if slot[y] != usize::MAX {
                        for &z in &path[slot[y] + 1..] {
                            slot[z] = usize::MAX;
                        }
                        path.truncate(slot[y] + 1);
                    } else {
                        slot[y] = path.len();
                        path.push(y);
                    }
                    x = y;
                }
                for (h, &t) in hits.iter_mut().zip(&targets) {
                    if slot[t] != usize::MAX {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .reduce(|| vec![0; targets.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(ScalingSample { seed, n_samples: n, distances: distances.to_vec(), hits })
}

/// Least-squares slope of `log y` against `log x`, with its standard error.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("a fit needs at least two points".into()));
    }
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::Invalid("insufficient samples: a target was never hit".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let se = if lx.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_graphs::{k3, p3};

    #[test]
    fn p3_has_one_outcome() {
        let g = p3();
        let r = lerw_sample(&g, 0, 7, 10_000).unwrap();
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts[0].saw, ["a", "b", "c"]);
        assert_eq!(r.counts[0].exit, "c");
        assert_eq!(r.counts[0].count, 10_000);
        assert!(lerw_sample(&g, 0, 7, 0).unwrap().counts.is_empty());
    }

    #[test]
    fn reproducible_from_seed() {
        let g = k3();
        let x = lerw_sample(&g, 0, 11, 5000).unwrap();
        let y = lerw_sample(&g, 0, 11, 5000).unwrap();
        assert_eq!(x.raw, y.raw);
        assert_ne!(x.raw, lerw_sample(&g, 0, 12, 5000).unwrap().raw);
    }

    #[test]
    fn k3_frequency_near_exact() {
        let g = k3();
        let exact = to_f64(&crate::lerw::lerw_probability(&g, 0, 1, 2).unwrap());
        let n = 100_000;
        let r = lerw_sample(&g, 0, 1, n).unwrap();
        let p = r.one_point(1, 2) as f64 / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((p - exact).abs() < 3.0 * se, "{p} vs {exact}");
    }

    #[test]
    fn wilson_interval_basics() {
        let (lo, hi) = wilson_interval(50, 100, Z_99);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!(wilson_interval(0, 10, Z_99).0 < 1e-12);
    }

    #[test]
    fn fit_recovers_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.75)).collect();
        let (slope, se) = log_log_fit(&xs, &ys).unwrap();
        assert!((slope + 0.75).abs() < 1e-12 && se < 1e-9);
        assert!(log_log_fit(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn stopped_walk_on_line() {
        // b = 1 on the erasure iff the walk leaves through 2
        let ball = Ball::new(1, 2).unwrap();
        let s = stopped_lerw_hits(&ball, &[1], 3, 20_000).unwrap();
        let p = s.hits[0] as f64 / 20_000.0;
        assert!((p - 0.5).abs() < 0.02);
        assert!(stopped_lerw_hits(&ball, &[1], 3, 0).is_err());
    }
}
