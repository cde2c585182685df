//! Named verification suites over seeded corpora.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::atoms::{atomic_decomposition, validate_decomposition};
use crate::dyadic::{DyadicRational, Fraction};
use crate::error::{Error, Result};
use crate::haar::{
    scalar_square_function, square_function, vector_square_function_with_cap, NormedSpace,
    RademacherMode,
};
use crate::maximal::{
    c1, mu_grid_integral, mu_integral, mu_integral_by_tree, resolve, witness_f,
    witness_image_norms, MaximalReport, SupMode,
};
use crate::rearrange::{opnorm_lower, Rearrangement, SearchConfig};

use super::config::{CaseRecord, ExperimentConfig, VerificationReport};
use super::corpus::{case_rng, random_atom_case, random_series, random_subset, random_tau};
use super::verify::{
    verify_atom_h1, verify_factorization, verify_holder_atom, verify_holder_chain,
};

pub const SUITES: [&str; 9] = [
    "maximal",
    "factorization",
    "holder",
    "atom-h1",
    "atoms",
    "isometry",
    "hilbert",
    "contraction",
    "c1",
];

/// Largest `τ(D)` the atom corpus draws, so that `C₁` stays exact.
pub const ATOM_DOMAIN_CAP: usize = 16;
const HOLDER_SUPPORT: usize = 12;
const CONTRACTION_SUPPORT: usize = 10;

type CaseFn = fn(&ExperimentConfig, &mut ChaCha8Rng, &mut CaseRecord) -> Result<()>;

/// Runs a suite; cases run in parallel and are reported in index order.
pub fn run_suite(name: &str, config: &ExperimentConfig) -> Result<VerificationReport> {
    let (case, slack, bands): (CaseFn, f64, &[&str]) = match name {
        "maximal" => (maximal_case, 0.0, &["ratio"]),
        "factorization" => (factorization_case, 1e-9, &["worst_ratio"]),
        "holder" => (holder_case, 1e-9, &["worst_ratio"]),
        "atom-h1" => (atom_h1_case, 1e-9, &["h1_over_middle", "middle_over_right"]),
        "atoms" => (atoms_case, 0.0, &["norm_ratio", "block_constant"]),
        "isometry" => (isometry_case, 1e-6, &["bound"]),
        "hilbert" => (hilbert_case, 1e-12, &["worst_error"]),
        "contraction" => (contraction_case, 1e-12, &["worst_ratio"]),
        "c1" => (c1_case, 0.0, &["c1_random"]),
        _ => {
            return Err(Error::domain(format!(
                "unknown suite {name:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let records: Vec<CaseRecord> = (0..config.cases)
        .into_par_iter()
        .map(|index| {
            let seed = config.case_seed(index);
            let mut rng = case_rng(seed);
            let mut rec = CaseRecord::new(index, seed, slack);
            case(config, &mut rng, &mut rec)?;
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new(name, config, records);
    for b in bands {
        report.band(b);
    }
    Ok(report)
}

fn case_depth(config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> u32 {
    rng.gen_range(1..=config.depth.max(1))
}

fn maximal_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = case_depth(config, rng);
    let tau = random_tau(rng, depth)?;
    let density = rng.gen_range(0.05..0.6);
    let h = random_subset(rng, &tau.image(), density);
    let closed = mu_integral(&h, &tau)?;
    let grid = mu_grid_integral(&h, &tau)?;
    let tree = mu_integral_by_tree(&h, &tau)?;
    let b = resolve(&h, &tau)?;
    let (squares, _) = witness_f(&b, depth)?;
    let bmo = crate::haar::bmo_norm_squared_exact(&squares);
    let (image_bmo, energy) = witness_image_norms(&squares, &tau)?;
    let report = MaximalReport::new(&h, &tau)?;
    rec.set("depth", depth);
    rec.set("h", &h);
    rec.set("integral", closed);
    rec.set("ratio", crate::dyadic::fraction_to_f64(&report.ratio));
    rec.check("closed_equals_grid", closed == grid);
    rec.check("closed_equals_tree", closed == tree);
    rec.check("witness_bmo_is_one", bmo == DyadicRational::ONE);
    rec.check("witness_energy_equals_integral", energy == closed);
    rec.check(
        "sandwich",
        closed.to_fraction() <= image_bmo.to_fraction() * report.sigma_cover.to_fraction(),
    );
    Ok(())
}

fn factorization_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = case_depth(config, rng);
    let tau = random_tau(rng, depth)?;
    let f = random_series(rng, NormedSpace::scalar(), depth, 24)?;
    let mut worst: f64 = 0.0;
    for (p, q) in config.exponent_pairs() {
        let r = verify_factorization(&f, &tau, p, q)?;
        worst = worst.max(r.worst_ratio);
        rec.check(&format!("pointwise_p{p}_q{q}"), r.passed);
    }
    rec.set("depth", depth);
    rec.set("support", f.support_len());
    rec.set("worst_ratio", worst);
    Ok(())
}

fn holder_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = case_depth(config, rng);
    let tau = random_tau(rng, depth)?;
    let cap = config.rademacher_cap;
    let f = random_series(rng, config.space, depth, HOLDER_SUPPORT.min(cap))?;
    let mut worst: f64 = 0.0;
    for (p, q) in config.exponent_pairs().into_iter().filter(|(p, q)| q < p) {
        let r = verify_holder_chain(&f, &tau, p, q, config.mode, cap)?;
        worst = worst.max(r.lhs / r.rhs);
        rec.check(&format!("integrated_p{p}_q{q}"), r.passed);
        let atom = random_atom_case(rng, config.space, q, depth, usize::MAX)?;
        if atom.f.support_len() <= cap {
            let a = verify_holder_atom(&atom.f, &atom.tau, &atom.interval, p, q, config.mode, cap)?;
            rec.check(&format!("atom_root_p{p}_q{q}"), a.passed);
        }
    }
    rec.set("depth", depth);
    rec.set("worst_ratio", worst);
    Ok(())
}

fn atom_h1_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = case_depth(config, rng);
    let atom = random_atom_case(
        rng,
        NormedSpace::scalar(),
        1.0,
        depth,
        ATOM_DOMAIN_CAP.min(config.c1_max_intervals),
    )?;
    let r = verify_atom_h1(&atom.f, &atom.tau, config.c1_max_intervals)?;
    rec.set("interval", atom.interval);
    rec.set("c1", crate::dyadic::fraction_string(&r.c1));
    rec.set("h1_over_middle", r.h1_norm / r.middle);
    rec.set("middle_over_right", r.middle / r.right);
    rec.check("c1_exact", r.c1_exact);
    rec.check("first", r.first_passed);
    rec.check("second", r.second_passed);
    Ok(())
}

fn atoms_case(config: &ExperimentConfig, rng: &mut ChaCha8Rng, rec: &mut CaseRecord) -> Result<()> {
    let depth = case_depth(config, rng);
    let f = random_series(rng, NormedSpace::scalar(), depth, 24)?;
    let p = config.p_list[rec.index % config.p_list.len()];
    let d = atomic_decomposition(&f, p)?;
    let v = validate_decomposition(&f, p, &d)?;
    rec.set("p", p);
    rec.set("norm_ratio", v.norm_ratio);
    rec.set("block_constant", v.block_constant);
    rec.set("stopping_count", v.stopping_count);
    for check in [
        "packing",
        "block-sup",
        "partition",
        "reconstruction",
        "atom",
    ] {
        rec.check(check, v.failures.iter().all(|e| e.check != check));
    }
    Ok(())
}

fn isometry_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = rng.gen_range(1..=config.depth.clamp(1, 4));
    let tau = random_tau(rng, depth)?;
    let search = SearchConfig {
        restarts: 4,
        iterations: 30,
        seed: rec.seed,
        support_cap: Some(12),
    };
    let e = opnorm_lower(&tau, 2.0, NormedSpace::scalar(), &search)?;
    rec.set("bound", e.bound);
    rec.check("bound_is_one", (e.bound - 1.0).abs() <= 1e-6);
    rec.check("no_candidate_above_one", e.max_candidate <= 1.0 + 1e-9);
    Ok(())
}

fn hilbert_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = case_depth(config, rng);
    let m = rng.gen_range(1..=4);
    let space = NormedSpace::lr(2.0, m)?;
    let f = random_series(rng, space, depth, HOLDER_SUPPORT)?;
    let s = vector_square_function_with_cap(&f, RademacherMode::Exact, config.rademacher_cap)?;
    let grid = s.grid_level();
    let mut worst: f64 = 0.0;
    for (cell, v) in s.values().iter().enumerate() {
        let energy: f64 = f
            .terms()
            .filter(|(i, _)| i.cell_range(grid).contains(&cell))
            .map(|(_, x)| x.iter().map(|a| a * a).sum::<f64>())
            .sum();
        let want = energy.sqrt();
        if want > 0.0 {
            worst = worst.max((v - want).abs() / want);
        } else {
            worst = worst.max(v.abs());
        }
    }
    rec.set("m", m);
    rec.set("worst_error", worst);
    rec.check("matches_hilbert_formula", worst <= 1e-12);
    Ok(())
}

fn contraction_case(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    rec: &mut CaseRecord,
) -> Result<()> {
    let depth = case_depth(config, rng);
    let f = random_series(rng, config.space, depth, CONTRACTION_SUPPORT)?;
    let mut g = f.clone();
    for (i, x) in f.terms() {
        let a: f64 = rng.gen_range(-1.0..=1.0);
        g.set(*i, x.iter().map(|v| v * a).collect())?;
    }
    let (sf, sg) = if f.space().is_scalar() {
        (scalar_square_function(&f)?, scalar_square_function(&g)?)
    } else {
        (
            square_function(&f, RademacherMode::Exact)?,
            square_function(&g, RademacherMode::Exact)?,
        )
    };
    let grid = sf.grid_level().max(sg.grid_level());
    let (sf, sg) = (sf.refined(grid)?, sg.refined(grid)?);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (a, b) in sg.values().iter().zip(sf.values()) {
        ok &= *a <= b * (1.0 + 1e-12);
        if *b > 0.0 {
            worst = worst.max(a / b);
        }
    }
    rec.set("worst_ratio", worst);
    rec.check("never_increases", ok);
    Ok(())
}

fn c1_case(config: &ExperimentConfig, rng: &mut ChaCha8Rng, rec: &mut CaseRecord) -> Result<()> {
    let exact = SupMode::Exact {
        max_intervals: config.c1_max_intervals,
    };
    let id_depth = (rec.index % 4) as u32;
    let id = c1(&Rearrangement::identity(id_depth), exact)?;
    rec.check(
        "identity_is_one",
        id.value == Fraction::from_integer(1) && id.exhaustive,
    );
    let depth = 2 + (rec.index % 2) as u32;
    let tau = random_tau(rng, depth)?;
    let keep = random_subset(rng, &tau.domain(), 0.7);
    let tau = Rearrangement::new(
        depth,
        tau.pairs()
            .filter(|(i, _)| keep.contains(i))
            .map(|(i, j)| (*i, *j)),
    )?;
    let e = c1(&tau, exact)?;
    let g = c1(&tau, SupMode::greedy(rec.seed))?;
    rec.set("c1_random", crate::dyadic::fraction_to_f64(&e.value));
    rec.set("c1_exact", crate::dyadic::fraction_string(&e.value));
    rec.set("c1_greedy", crate::dyadic::fraction_string(&g.value));
    rec.check("greedy_at_most_exact", g.value <= e.value);
    Ok(())
}
