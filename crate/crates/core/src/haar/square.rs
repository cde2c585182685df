//! Square functions.
//!
//! The scalar square function is `S(f) = (Σ a_I² 1_I)^{1/2}`. For a vector
//! valued series the square function averages over Rademacher signs:
//! `𝕊(f)(t)² = E_ε ‖Σ ε_I x_I h_I(t)‖²`. At a point `t` only the chain of
//! support intervals containing `t` contributes, and `h_I(t) = ±1` there is
//! absorbed by the symmetric signs, so `𝕊` is constant on every region of
//! the support tree that no deeper support interval splits. Exact mode still
//! averages over every sign pattern of the whole support; signs of intervals
//! off the chain leave the norm unchanged, so each pattern class is counted
//! with its exact multiplicity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HaarVector, NormedSpace, StepFunction};
use crate::dyadic::{DyadicInterval, IntervalCollection};
use crate::error::{Error, Result};

/// Default cap on the Haar support size for exact Rademacher averages
/// (`2^20` sign patterns).
pub const EXACT_RADEMACHER_CAP: usize = 20;

/// Sign patterns per Monte Carlo work unit. Fixed so that results do not
/// depend on the number of worker threads.
const MC_CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RademacherMode {
    Exact,
    /// Average over `samples` sign patterns drawn from ChaCha8 seeded with
    /// `seed`; work unit `c` uses stream `c` of that generator.
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

/// A maximal piece of the grid on which the set of support intervals
/// containing the point does not change.
#[derive(Clone, Debug)]
struct Region {
    cells: std::ops::Range<usize>,
    chain: Vec<usize>,
}

/// Default grid for the square function of `f`: one level below its deepest
/// support interval.
pub fn square_grid_level(f: &HaarVector) -> u32 {
    f.max_level().map_or(0, |l| l + 1)
}

fn regions(f: &HaarVector, grid: u32) -> Vec<Region> {
    let support: Vec<DyadicInterval> = f.support().iter().copied().collect();
    let index: std::collections::BTreeMap<DyadicInterval, usize> =
        support.iter().enumerate().map(|(k, i)| (*i, k)).collect();
    let mut splits = IntervalCollection::new();
    for i in &support {
        splits.extend(i.ancestors());
    }
    let mut out = Vec::new();
    let mut chain = Vec::new();
    walk(
        DyadicInterval::UNIT,
        grid,
        &index,
        &splits,
        &mut chain,
        &mut out,
    );
    out
}

fn walk(
    node: DyadicInterval,
    grid: u32,
    index: &std::collections::BTreeMap<DyadicInterval, usize>,
    splits: &IntervalCollection,
    chain: &mut Vec<usize>,
    out: &mut Vec<Region>,
) {
    let pushed = index.get(&node).map(|k| chain.push(*k)).is_some();
    if splits.contains(&node) {
        walk(node.left(), grid, index, splits, chain, out);
        walk(node.right(), grid, index, splits, chain, out);
    } else {
        out.push(Region {
            cells: node.cell_range(grid),
            chain: chain.clone(),
        });
    }
    if pushed {
        chain.pop();
    }
}

/// `S(f)` for a scalar series, on grid level `max level + 1`.
pub fn scalar_square_function(f: &HaarVector) -> Result<StepFunction> {
    f.require_scalar("the scalar square function (use vector_square_function)")?;
    let grid = square_grid_level(f);
    let mut sq = vec![0.0; 1 << grid];
    for (i, x) in f.terms() {
        let a2 = x[0] * x[0];
        for v in &mut sq[i.cell_range(grid)] {
            *v += a2;
        }
    }
    StepFunction::new(grid, sq.into_iter().map(f64::sqrt).collect())
}

/// Exact `E_ε ‖Σ ε_k v_k‖^power` over all `2^n` sign patterns.
pub fn rademacher_average(vectors: &[&[f64]], space: &NormedSpace, power: f64) -> Result<f64> {
    if vectors.len() > 30 {
        return Err(Error::Capacity {
            what: "exact Rademacher average",
            size: vectors.len(),
            cap: 30,
        });
    }
    Ok(rademacher_moment(vectors, space, power))
}

/// `E_ε ‖Σ ε_k v_k‖^power`; the first sign is fixed to `+1` by symmetry.
fn rademacher_moment(vectors: &[&[f64]], space: &NormedSpace, power: f64) -> f64 {
    let n = vectors.len();
    if n == 0 {
        return 0.0;
    }
    let dim = space.dim();
    let patterns = 1u64 << (n - 1);
    let mut acc = vec![0.0; dim];
    let mut total = 0.0;
    for mask in 0..patterns {
        acc.copy_from_slice(vectors[0]);
        for (k, v) in vectors[1..].iter().enumerate() {
            if mask >> k & 1 == 1 {
                acc.iter_mut().zip(v.iter()).for_each(|(a, x)| *a -= x);
            } else {
                acc.iter_mut().zip(v.iter()).for_each(|(a, x)| *a += x);
            }
        }
        total += if power == 2.0 {
            space.norm_sq(&acc)
        } else if power == 1.0 {
            space.norm(&acc)
        } else {
            space.norm(&acc).powf(power)
        };
    }
    total / patterns as f64
}

/// `𝕊(f)` with the default exact cap.
pub fn vector_square_function(f: &HaarVector, mode: RademacherMode) -> Result<StepFunction> {
    vector_square_function_with_cap(f, mode, EXACT_RADEMACHER_CAP)
}

pub fn vector_square_function_with_cap(
    f: &HaarVector,
    mode: RademacherMode,
    cap: usize,
) -> Result<StepFunction> {
    match mode {
        RademacherMode::Exact => exact_vector_square_function(f, cap),
        RademacherMode::MonteCarlo { samples, seed } => {
            Ok(monte_carlo_square_function(f, samples, seed)?.estimate)
        }
    }
}

fn exact_vector_square_function(f: &HaarVector, cap: usize) -> Result<StepFunction> {
    if f.support_len() > cap {
        return Err(Error::Capacity {
            what: "exact Rademacher support",
            size: f.support_len(),
            cap,
        });
    }
    let grid = square_grid_level(f);
    let coeffs: Vec<&[f64]> = f.terms().map(|(_, x)| x.as_slice()).collect();
    let space = f.space();
    let regions = regions(f, grid);
    let region_values: Vec<f64> = regions
        .par_iter()
        .map(|r| {
            let chain: Vec<&[f64]> = r.chain.iter().map(|k| coeffs[*k]).collect();
            rademacher_moment(&chain, &space, 2.0).sqrt()
        })
        .collect();
    let mut values = vec![0.0; 1 << grid];
    for (r, v) in regions.iter().zip(region_values) {
        values[r.cells.clone()].fill(v);
    }
    StepFunction::new(grid, values)
}

/// Monte Carlo estimate of `𝕊(f)` with per-cell statistics of the averaged
/// squared norm.
#[derive(Clone, Debug)]
pub struct MonteCarloSquare {
    pub estimate: StepFunction,
    /// Sample mean of `‖Σ ε_I x_I h_I(t)‖²` per cell.
    pub mean_sq: Vec<f64>,
    /// Standard error of `mean_sq` per cell.
    pub stderr_sq: Vec<f64>,
    pub samples: usize,
}

pub fn monte_carlo_square_function(
    f: &HaarVector,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloSquare> {
    if samples < 2 {
        return Err(Error::domain("Monte Carlo mode needs at least 2 samples"));
    }
    let grid = square_grid_level(f);
    let coeffs: Vec<&[f64]> = f.terms().map(|(_, x)| x.as_slice()).collect();
    let space = f.space();
    let regions = regions(f, grid);
    let n_chunks = samples.div_ceil(MC_CHUNK);

    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut sum = vec![0.0; regions.len()];
            let mut sum_sq = vec![0.0; regions.len()];
            let mut signs = vec![1.0; coeffs.len()];
            let mut acc = vec![0.0; space.dim()];
            for _ in 0..count {
                for s in signs.iter_mut() {
                    *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
                for (k, r) in regions.iter().enumerate() {
                    acc.fill(0.0);
                    for &j in &r.chain {
                        let s = signs[j];
                        acc.iter_mut().zip(coeffs[j]).for_each(|(a, x)| *a += s * x);
                    }
                    let v = space.norm_sq(&acc);
                    sum[k] += v;
                    sum_sq[k] += v * v;
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = vec![0.0; regions.len()];
    let mut sum_sq = vec![0.0; regions.len()];
    for (s, q) in &partials {
        for k in 0..regions.len() {
            sum[k] += s[k];
            sum_sq[k] += q[k];
        }
    }
    let n = samples as f64;
    let mut mean_sq = vec![0.0; 1 << grid];
    let mut stderr_sq = vec![0.0; 1 << grid];
    for (k, r) in regions.iter().enumerate() {
        let mean = sum[k] / n;
        let var = ((sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        mean_sq[r.cells.clone()].fill(mean);
        stderr_sq[r.cells.clone()].fill((var / n).sqrt());
    }
    let estimate = StepFunction::new(grid, mean_sq.iter().map(|v| v.sqrt()).collect())?;
    Ok(MonteCarloSquare {
        estimate,
        mean_sq,
        stderr_sq,
        samples,
    })
}

/// `S(f)` for scalar series, `𝕊(f)` otherwise.
pub fn square_function(f: &HaarVector, mode: RademacherMode) -> Result<StepFunction> {
    if f.space().is_scalar() {
        scalar_square_function(f)
    } else {
        vector_square_function(f, mode)
    }
}
