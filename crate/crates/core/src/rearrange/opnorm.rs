//! Lower bounds for `‖T_{τ,p} ⊗ Id_X : H^p_X → H^p_X‖` and for the BMO norm
//! of `S_σ`.
//!
//! The `H^p` unit ball is not convex for `p < 1` and the ratio is not smooth,
//! so the search is a derivative-free multistart coordinate ascent. Every
//! reported value is the ratio of two `hp_norm` evaluations of an explicit
//! candidate, hence a certified lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_s_sigma, apply_t, Rearrangement};
use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::haar::{
    bmo_norm, hp_norm, HaarVector, NormedSpace, RademacherMode, EXACT_RADEMACHER_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Cap on coordinate sweeps per restart.
    pub iterations: usize,
    pub seed: u64,
    /// Cap on the candidate support. Defaults to the exact Rademacher cap for
    /// vector spaces and to all of `domain(τ)` for scalars.
    pub support_cap: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            iterations: 200,
            seed: 0,
            support_cap: None,
        }
    }
}

/// Stop a restart once a sweep improves the ratio by less than this.
const REL_IMPROVEMENT_STOP: f64 = 1e-10;
const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct OpNormEstimate {
    pub bound: f64,
    /// The maximizing candidate, normalized to `‖f‖_{H^p_X} = 1`.
    pub witness: HaarVector,
    /// Largest ratio among all evaluated candidates (equals `bound`).
    pub max_candidate: f64,
    pub evaluations: usize,
    pub best_restart: usize,
}

struct Run {
    ratio: f64,
    coeffs: Vec<f64>,
    evaluations: usize,
    max_candidate: f64,
}

fn candidate(support: &[DyadicInterval], space: NormedSpace, depth: u32, x: &[f64]) -> HaarVector {
    let m = space.dim();
    HaarVector::from_terms(
        space,
        depth,
        support
            .iter()
            .enumerate()
            .map(|(k, i)| (*i, x[k * m..(k + 1) * m].to_vec())),
    )
    .expect("candidate support lies in the domain")
}

/// Certified lower bound on the `H^p_X` operator norm of `T_{τ,p} ⊗ Id_X`.
pub fn opnorm_lower(
    tau: &Rearrangement,
    p: f64,
    space: NormedSpace,
    search: &SearchConfig,
) -> Result<OpNormEstimate> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::domain(format!("p must lie in (0, 2], got {p}")));
    }
    if tau.is_empty() {
        return Err(Error::domain("τ has an empty domain"));
    }
    if search.restarts == 0 {
        return Err(Error::domain("at least one restart is required"));
    }
    let cap = search.support_cap.unwrap_or(if space.is_scalar() {
        usize::MAX
    } else {
        EXACT_RADEMACHER_CAP
    });
    let support: Vec<DyadicInterval> = tau.domain().iter().copied().take(cap).collect();
    let depth = tau.depth();

    let ratio = |x: &[f64]| -> Result<f64> {
        let f = candidate(&support, space, depth, x);
        let denom = hp_norm(&f, p, RademacherMode::Exact)?;
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok(hp_norm(&apply_t(&f, tau, p)?, p, RademacherMode::Exact)? / denom)
    };

    let runs: Vec<Result<Run>> = (0..search.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
            rng.set_stream(restart as u64);
            let mut x: Vec<f64> = (0..support.len() * space.dim())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let mut current = ratio(&x)?;
            let mut evaluations = 1;
            let mut max_candidate = current;
            let mut step = INITIAL_STEP;
            for _ in 0..search.iterations {
                let before = current;
                for k in 0..x.len() {
                    let orig = x[k];
                    let mut best = (current, orig);
                    for trial in [orig + step, orig - step] {
                        x[k] = trial;
                        let r = ratio(&x)?;
                        evaluations += 1;
                        max_candidate = max_candidate.max(r);
                        if r > best.0 {
                            best = (r, trial);
                        }
                    }
                    x[k] = best.1;
                    current = best.0;
                }
                if current - before <= REL_IMPROVEMENT_STOP * before.abs() {
                    if step <= MIN_STEP {
                        break;
                    }
                    step *= 0.5;
                }
            }
            Ok(Run {
                ratio: current,
                coeffs: x,
                evaluations,
                max_candidate,
            })
        })
        .collect();

    let mut best: Option<(usize, Run)> = None;
    let mut evaluations = 0;
    let mut max_candidate: f64 = 0.0;
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        evaluations += run.evaluations;
        max_candidate = max_candidate.max(run.max_candidate);
        if best.as_ref().map_or(true, |(_, b)| run.ratio > b.ratio) {
            best = Some((k, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    let f = candidate(&support, space, depth, &run.coeffs);
    let norm = hp_norm(&f, p, RademacherMode::Exact)?;
    let witness = if norm > 0.0 { f.scaled(1.0 / norm) } else { f };
    Ok(OpNormEstimate {
        bound: run.ratio,
        witness,
        max_candidate,
        evaluations,
        best_restart,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BmoLowerBound {
    /// `max ‖S_σ f‖_BMO / ‖f‖_BMO` over the usable witnesses (0 if none).
    pub bound: f64,
    pub best_witness: Option<usize>,
    /// Indices of zero witnesses that were skipped.
    pub skipped: Vec<usize>,
}

/// Lower bound on `‖S_σ : BMO → BMO‖` from the supplied scalar witnesses.
pub fn bmo_opnorm_lower(tau: &Rearrangement, witnesses: &[HaarVector]) -> Result<BmoLowerBound> {
    let mut out = BmoLowerBound {
        bound: 0.0,
        best_witness: None,
        skipped: Vec::new(),
    };
    for (k, f) in witnesses.iter().enumerate() {
        let denom = bmo_norm(f)?;
        if denom == 0.0 {
            out.skipped.push(k);
            continue;
        }
        let r = bmo_norm(&apply_s_sigma(f, tau)?)? / denom;
        if out.best_witness.is_none() || r > out.bound {
            out.bound = r;
            out.best_witness = Some(k);
        }
    }
    Ok(out)
}
