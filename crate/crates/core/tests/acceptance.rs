//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Reference values come from the small oracles below, which recompute every
//! quantity from definitions (cell by cell, sign pattern by sign pattern,
//! subset by subset) without calling the kernels under test.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::Rng;

use haarlab_core::atoms::{atomic_decomposition, validate_decomposition};
use haarlab_core::haar::{
    bmo_norm, hp_norm, is_atom, square_function, vector_square_function_with_cap, Exponent,
};
use haarlab_core::lab::{
    case_rng, random_atom_case, random_series, random_subset, random_tau, run_suite,
    verify_atom_h1, verify_factorization, verify_holder_atom, verify_holder_chain,
    ExperimentConfig,
};
use haarlab_core::maximal::{
    c1, mu_grid_integral, mu_integral, resolve, witness_f, witness_image_norms, SupMode,
};
use haarlab_core::rearrange::{opnorm_lower, SearchConfig};
use haarlab_core::{
    iv, DyadicInterval, HaarVector, IntervalCollection, NormedSpace, RademacherMode, Rearrangement,
};

type Q = Ratio<i128>;

// ---------------------------------------------------------------- oracles

fn len(i: &DyadicInterval) -> Q {
    Q::new(1, 1i128 << i.level())
}

fn holds(i: &DyadicInterval, grid: u32, cell: usize) -> bool {
    (cell as u64 >> (grid - i.level())) == i.pos()
}

fn sigma(tau: &Rearrangement, j: &DyadicInterval) -> DyadicInterval {
    tau.pairs()
        .find(|(_, t)| *t == j)
        .map(|(i, _)| *i)
        .expect("j in τ(D)")
}

/// `μ_H` cell by cell at `grid`.
fn oracle_mu(h: &IntervalCollection, tau: &Rearrangement, grid: u32) -> Vec<Q> {
    let ratios: Vec<(DyadicInterval, Q)> = h
        .iter()
        .map(|j| (*j, len(&sigma(tau, j)) / len(j)))
        .collect();
    (0..1usize << grid)
        .map(|c| {
            ratios
                .iter()
                .filter(|(j, _)| holds(j, grid, c))
                .map(|(_, r)| *r)
                .max()
                .unwrap_or_else(Q::zero)
        })
        .collect()
}

fn oracle_mu_integral(h: &IntervalCollection, tau: &Rearrangement) -> Q {
    let grid = tau.depth();
    oracle_mu(h, tau, grid).into_iter().sum::<Q>() / Q::from_integer(1i128 << grid)
}

fn cover(c: &IntervalCollection, grid: u32) -> Q {
    let n = (0..1usize << grid)
        .filter(|cell| c.iter().any(|j| holds(j, grid, *cell)))
        .count();
    Q::new(n as i128, 1i128 << grid)
}

/// `C₁` by trying every nonempty `H ⊆ τ(D)`.
fn oracle_c1(tau: &Rearrangement) -> Q {
    let grid = tau.depth();
    let items: Vec<DyadicInterval> = tau.image().iter().copied().collect();
    let ratio: Vec<Q> = items.iter().map(|j| len(&sigma(tau, j)) / len(j)).collect();
    let cells = 1usize << grid;
    let inside: Vec<Vec<bool>> = items
        .iter()
        .map(|j| (0..cells).map(|c| holds(j, grid, c)).collect())
        .collect();
    let sig: Vec<Vec<bool>> = items
        .iter()
        .map(|j| {
            let s = sigma(tau, j);
            (0..cells).map(|c| holds(&s, grid, c)).collect()
        })
        .collect();
    let mut best = Q::zero();
    for mask in 1u64..(1u64 << items.len()) {
        let mut integral = Q::zero();
        let mut covered = 0i128;
        for c in 0..cells {
            let mut m = Q::zero();
            let mut cov = false;
            for k in 0..items.len() {
                if mask >> k & 1 == 1 {
                    if inside[k][c] && ratio[k] > m {
                        m = ratio[k];
                    }
                    cov |= sig[k][c];
                }
            }
            integral += m;
            covered += cov as i128;
        }
        let r = integral / Q::from_integer(covered);
        if r > best {
            best = r;
        }
    }
    best
}

fn norm(space: &NormedSpace, x: &[f64]) -> f64 {
    match space.exponent() {
        Exponent::Infinity => x.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        Exponent::Finite(r) => x.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r),
    }
}

/// `𝕊(g)` at `grid`, averaging over every sign pattern of the chain at each cell.
fn oracle_square(g: &HaarVector, grid: u32) -> Vec<f64> {
    let space = g.space();
    (0..1usize << grid)
        .map(|c| {
            let chain: Vec<&Vec<f64>> = g
                .terms()
                .filter(|(j, _)| holds(j, grid, c))
                .map(|(_, x)| x)
                .collect();
            let k = chain.len();
            let mut total = 0.0;
            for signs in 0u64..(1u64 << k) {
                let mut y = vec![0.0; space.dim()];
                for (b, x) in chain.iter().enumerate() {
                    let s = if signs >> b & 1 == 1 { -1.0 } else { 1.0 };
                    for (yi, xi) in y.iter_mut().zip(x.iter()) {
                        *yi += s * xi;
                    }
                }
                let n = norm(&space, &y);
                total += n * n;
            }
            (total / (1u64 << k) as f64).sqrt()
        })
        .collect()
}

/// `T_{τ,p} ⊗ Id` from the definition.
fn oracle_t(f: &HaarVector, tau: &Rearrangement, p: f64) -> HaarVector {
    let mut out = HaarVector::zero(f.space(), tau.depth().max(f.depth()));
    for (j, x) in f.terms() {
        let t = tau.tau(j).expect("support inside domain");
        let w = ((t.level() as f64 - j.level() as f64) / p).exp2();
        out.set(t, x.iter().map(|v| v * w).collect()).unwrap();
    }
    out
}

fn integrate_pow(values: &[f64], grid: u32, p: f64) -> f64 {
    values.iter().map(|v| v.powf(p)).sum::<f64>() / (1u64 << grid) as f64
}

fn carleson(c: &IntervalCollection) -> Q {
    c.iter()
        .map(|i| c.iter().filter(|j| i.contains(j)).map(len).sum::<Q>() / len(i))
        .max()
        .unwrap_or_else(Q::zero)
}

fn q_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- harness

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn corpus_tau(seed: u64, max_depth: u32) -> (u32, Rearrangement, rand_chacha::ChaCha8Rng) {
    let mut rng = case_rng(seed);
    let depth = 1 + (seed % max_depth as u64) as u32;
    let tau = random_tau(&mut rng, depth).unwrap();
    (depth, tau, rng)
}

fn maximal_corpus() -> Vec<(u32, Rearrangement, IntervalCollection)> {
    (0..500u64)
        .map(|seed| {
            let (depth, tau, mut rng) = corpus_tau(seed, 6);
            let density = rng.gen_range(0.05..0.6);
            let h = random_subset(&mut rng, &tau.image(), density);
            (depth, tau, h)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    for (_, tau, h) in maximal_corpus() {
        let want = oracle_mu_integral(&h, &tau);
        let closed = mu_integral(&h, &tau).unwrap().to_fraction();
        let grid = mu_grid_integral(&h, &tau).unwrap().to_fraction();
        bad += (closed != want || grid != want) as usize;
    }
    let t = start.elapsed();
    outcome(
        bad == 0 && t < Duration::from_secs(60),
        format!(
            "500 cases, {bad} mismatches against cell-by-cell integration, {:.2?}",
            t
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut bad = 0;
    for (depth, tau, h) in maximal_corpus() {
        let b = resolve(&h, &tau).unwrap();
        let (squares, f) = witness_f(&b, depth).unwrap();
        let sq: BTreeMap<DyadicInterval, Q> =
            squares.iter().map(|(j, c)| (*j, c.to_fraction())).collect();
        // BMO² = sup over dyadic I of |I|^{-1} Σ_{J⊆I} c_J² |J|
        let bmo = DyadicInterval::all_up_to(depth)
            .map(|i| {
                sq.iter()
                    .filter(|(j, _)| i.contains(j))
                    .map(|(j, c)| *c * len(j))
                    .sum::<Q>()
                    / len(&i)
            })
            .max()
            .unwrap();
        let energy: Q = sq.iter().map(|(j, c)| *c * len(&sigma(&tau, j))).sum();
        let coeffs_ok = f
            .terms()
            .all(|(j, x)| rel_close(x[0] * x[0], q_f64(sq[j]), 1e-12));
        let (_, lib_energy) = witness_image_norms(&squares, &tau).unwrap();
        bad += !(bmo == Q::one()
            && energy == oracle_mu_integral(&h, &tau)
            && lib_energy.to_fraction() == energy
            && coeffs_ok) as usize;
    }
    outcome(
        bad == 0,
        format!("500 cases, {bad} where BMO ≠ 1 or energy ≠ ∫μ_H"),
    )
}

fn criterion_3() -> Outcome {
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let (depth, tau, mut rng) = corpus_tau(seed, 6);
        let f = random_series(&mut rng, NormedSpace::scalar(), depth, 24).unwrap();
        let h = f.support().map(|i| Ok(tau.tau(i).unwrap())).unwrap();
        let m = oracle_mu(&h, &tau, depth);
        for (p, q) in [(2.0, 1.0), (2.0, 0.5), (1.5, 1.0)] {
            let sq = oracle_square(&oracle_t(&f, &tau, q), depth);
            let sp = oracle_square(&oracle_t(&f, &tau, p), depth);
            let mut ok = true;
            for c in 0..sq.len() {
                let rhs = q_f64(m[c]).powf(1.0 / q - 1.0 / p) * sp[c];
                ok &= sq[c] <= rhs * (1.0 + 1e-9);
                if rhs > 0.0 {
                    worst = worst.max(sq[c] / rhs);
                }
            }
            let lib = verify_factorization(&f, &tau, p, q).unwrap();
            bad += !(ok && lib.passed) as usize;
        }
    }
    outcome(
        bad == 0,
        format!("600 (case, exponent) checks, {bad} failures, worst lhs/rhs {worst:.6}"),
    )
}

fn spaces() -> [NormedSpace; 3] {
    [
        NormedSpace::lr(1.0, 2).unwrap(),
        NormedSpace::lr(2.0, 3).unwrap(),
        NormedSpace::linf(2).unwrap(),
    ]
}

fn criterion_4() -> Outcome {
    let mut bad = 0;
    for seed in 0..100u64 {
        let (depth, tau, mut rng) = corpus_tau(seed, 4);
        let tau = if seed % 5 == 0 {
            Rearrangement::identity(depth)
        } else {
            tau
        };
        let space = spaces()[seed as usize % 3];
        let f = random_series(&mut rng, space, depth, 12).unwrap();
        let h = f.support().map(|i| Ok(tau.tau(i).unwrap())).unwrap();
        let mu = q_f64(oracle_mu_integral(&h, &tau));
        for (p, q) in [(2.0, 1.0), (1.5, 1.0)] {
            let lq = integrate_pow(&oracle_square(&oracle_t(&f, &tau, q), depth), depth, q);
            let lp = integrate_pow(&oracle_square(&oracle_t(&f, &tau, p), depth), depth, p);
            let rhs = mu.powf(1.0 - q / p) * lp.powf(q / p);
            let lib = verify_holder_chain(&f, &tau, p, q, RademacherMode::Exact, 20).unwrap();
            bad += !(lq <= rhs * (1.0 + 1e-9)
                && lib.passed
                && rel_close(lib.lhs, lq, 1e-9)
                && rel_close(lib.rhs, rhs, 1e-9)) as usize;
        }
    }
    let mut atom_bad = 0;
    for seed in 0..100u64 {
        let mut rng = case_rng(10_000 + seed);
        let space = spaces()[seed as usize % 3];
        let depth = 1 + (seed % 4) as u32;
        let a = random_atom_case(&mut rng, space, 1.0, depth, 20).unwrap();
        let grid = a.tau.depth();
        let h = a.f.support().map(|i| Ok(a.tau.tau(i).unwrap())).unwrap();
        let mu = q_f64(oracle_mu_integral(&h, &a.tau));
        for p in [2.0, 1.5] {
            let lhs = integrate_pow(
                &oracle_square(&oracle_t(&a.f, &a.tau, 1.0), grid),
                grid,
                1.0,
            );
            let rhs = mu.powf(1.0 - 1.0 / p)
                * integrate_pow(&oracle_square(&oracle_t(&a.f, &a.tau, p), grid), grid, p)
                    .powf(1.0 / p);
            let lib =
                verify_holder_atom(&a.f, &a.tau, &a.interval, p, 1.0, RademacherMode::Exact, 20)
                    .unwrap();
            atom_bad += !(lhs <= rhs * (1.0 + 1e-9) && lib.passed) as usize;
        }
    }
    outcome(
        bad == 0 && atom_bad == 0,
        format!("200 integrated checks with {bad} failures; 200 atom root checks with {atom_bad} failures"),
    )
}

fn criterion_5() -> Outcome {
    let mut bad = 0;
    let mut oracle_c1_runs = 0;
    for seed in 0..200u64 {
        let mut rng = case_rng(20_000 + seed);
        let depth = 1 + (seed % 5) as u32;
        let a = random_atom_case(&mut rng, NormedSpace::scalar(), 1.0, depth, 16).unwrap();
        let lib = verify_atom_h1(&a.f, &a.tau, 20).unwrap();
        let grid = a.tau.depth();
        let h = a.f.support().map(|i| Ok(a.tau.tau(i).unwrap())).unwrap();
        let mu = oracle_mu_integral(&h, &a.tau);
        let h1 = integrate_pow(
            &oracle_square(&oracle_t(&a.f, &a.tau, 1.0), grid),
            grid,
            1.0,
        );
        let t2: f64 = oracle_t(&a.f, &a.tau, 2.0)
            .terms()
            .map(|(j, x)| x[0] * x[0] * q_f64(len(j)))
            .sum();
        let f2: f64 = a.f.terms().map(|(j, x)| x[0] * x[0] * q_f64(len(j))).sum();
        let c = if a.tau.len() <= 12 {
            oracle_c1_runs += 1;
            let c = oracle_c1(&a.tau);
            if c != lib.c1 {
                bad += 1;
            }
            c
        } else {
            lib.c1
        };
        let sig = cover(&a.f.support(), grid);
        let middle = q_f64(mu).sqrt() * t2.sqrt();
        let right = (q_f64(c) * q_f64(sig)).sqrt() * f2.sqrt();
        bad += !(lib.c1_exact
            && lib.passed
            && h1 <= middle * (1.0 + 1e-9)
            && middle <= right * (1.0 + 1e-9)) as usize;
    }
    outcome(
        bad == 0,
        format!(
            "200 atoms, {bad} failures; C₁ matched subset enumeration on {oracle_c1_runs} of them"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let (_, tau, _) = corpus_tau(seed, 4);
        let search = SearchConfig {
            restarts: 4,
            iterations: 30,
            seed,
            support_cap: Some(12),
        };
        let e = opnorm_lower(&tau, 2.0, NormedSpace::scalar(), &search).unwrap();
        // Parseval on the witness: ‖T_2 w‖₂² = Σ (a w)² |τJ|
        let num: f64 = oracle_t(&e.witness, &tau, 2.0)
            .terms()
            .map(|(j, x)| x[0] * x[0] * q_f64(len(j)))
            .sum();
        let den: f64 = e
            .witness
            .terms()
            .map(|(j, x)| x[0] * x[0] * q_f64(len(j)))
            .sum();
        worst = worst.max((e.bound - 1.0).abs());
        bad += !((e.bound - 1.0).abs() <= 1e-6
            && e.max_candidate <= 1.0 + 1e-9
            && rel_close((num / den).sqrt(), e.bound, 1e-9)) as usize;
    }
    outcome(
        bad == 0,
        format!("50 rearrangements, {bad} failures, max |bound − 1| = {worst:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut bad = 0;
    for seed in 0..100u64 {
        let mut rng = case_rng(30_000 + seed);
        let depth = 1 + (seed % 6) as u32;
        let space = NormedSpace::lr(2.0, 1 + (seed % 4) as usize).unwrap();
        let f = random_series(&mut rng, space, depth, 16).unwrap();
        let s = vector_square_function_with_cap(&f, RademacherMode::Exact, 20)
            .unwrap()
            .refined(depth + 1)
            .unwrap();
        let ok = s.values().iter().enumerate().all(|(c, v)| {
            let e: f64 = f
                .terms()
                .filter(|(j, _)| holds(j, depth + 1, c))
                .map(|(_, x)| x.iter().map(|a| a * a).sum::<f64>())
                .sum();
            if e == 0.0 {
                *v == 0.0
            } else {
                rel_close(*v, e.sqrt(), 1e-12)
            }
        });
        bad += !ok as usize;
    }
    outcome(
        bad == 0,
        format!("100 cases, {bad} with a cell off by more than 1e-12"),
    )
}

fn criterion_8() -> Outcome {
    let mut bad = 0;
    for seed in 0..100u64 {
        let mut rng = case_rng(40_000 + seed);
        let depth = 1 + (seed % 6) as u32;
        let space = spaces()[seed as usize % 3];
        let f = random_series(&mut rng, space, depth, 10).unwrap();
        let mut g = f.clone();
        for (j, x) in f.terms() {
            let a: f64 = rng.gen_range(-1.0..=1.0);
            g.set(*j, x.iter().map(|v| v * a).collect()).unwrap();
        }
        let sf = square_function(&f, RademacherMode::Exact)
            .unwrap()
            .refined(depth + 1)
            .unwrap();
        let sg = square_function(&g, RademacherMode::Exact)
            .unwrap()
            .refined(depth + 1)
            .unwrap();
        let of = oracle_square(&f, depth + 1);
        let ok = sg
            .values()
            .iter()
            .zip(sf.values())
            .all(|(a, b)| *a <= b * (1.0 + 1e-12))
            && sf
                .values()
                .iter()
                .zip(&of)
                .all(|(a, b)| rel_close(*a, *b, 1e-12) || (*a == 0.0 && *b == 0.0));
        bad += !ok as usize;
    }
    outcome(
        bad == 0,
        format!("100 cases, {bad} where a contraction increased 𝕊 or 𝕊 missed the oracle"),
    )
}

fn criterion_9() -> Outcome {
    let mut bad = 0;
    let mut ratios = Vec::new();
    for seed in 0..200u64 {
        let mut rng = case_rng(50_000 + seed);
        let depth = 1 + (seed % 6) as u32;
        let f = random_series(&mut rng, NormedSpace::scalar(), depth, 24).unwrap();
        let p = [1.0, 0.5, 1.5, 2.0][seed as usize % 4];
        let d = atomic_decomposition(&f, p).unwrap();
        let report = validate_decomposition(&f, p, &d).unwrap();
        ratios.push(report.norm_ratio);

        let packing = carleson(&d.stopping) <= Q::from_integer(4);
        let mut seen = IntervalCollection::new();
        let mut partition = true;
        for (i, b) in &d.blocks {
            partition &= b.maximal_members().iter().eq([i]);
            for j in b.iter() {
                partition &= seen.insert(*j);
            }
        }
        partition &= seen == f.support() && d.stopping.iter().eq(d.blocks.keys());
        let grid = depth;
        let mut pointwise = true;
        for (i, b) in &d.blocks {
            let bound = BigRational::from_integer(4.into()).pow(d.exponents[i]);
            for c in 0..1usize << grid {
                let e: BigRational = b
                    .iter()
                    .filter(|j| holds(j, grid, c))
                    .map(|j| BigRational::from_float(f.scalar_coeff(j)).unwrap().pow(2))
                    .sum();
                pointwise &= e <= bound;
            }
        }
        let mut recon = true;
        for (i, b) in &d.blocks {
            for j in b.iter() {
                let got = d.scalars[i] * d.atoms[i].scalar_coeff(j);
                recon &=
                    (got - f.scalar_coeff(j)).abs() <= 4.0 * f64::EPSILON * f.scalar_coeff(j).abs();
            }
        }
        let atoms = d.atoms.iter().all(|(i, a)| is_atom(a, p, i).unwrap());
        bad += !(packing && partition && pointwise && recon && atoms && report.passed) as usize;
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    outcome(
        bad == 0,
        format!("200 cases, {bad} failures; norm ratio band [{lo:.4}, {hi:.4}]"),
    )
}

fn swap_example() -> Rearrangement {
    Rearrangement::new(
        2,
        DyadicInterval::all_up_to(2).map(|i| match (i.level(), i.pos()) {
            (1, 0) => (i, iv(2, 0)),
            (2, 0) => (i, iv(1, 0)),
            _ => (i, i),
        }),
    )
    .unwrap()
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for depth in 0..=4 {
        let r = c1(
            &Rearrangement::identity(depth),
            SupMode::Exact { max_intervals: 31 },
        )
        .unwrap();
        let good = r.value == Q::one() && r.exhaustive;
        ok &= good;
        if !good {
            notes.push(format!("identity depth {depth} gave {}", r.value));
        }
    }
    let swap = c1(&swap_example(), SupMode::exact()).unwrap();
    let oracle = oracle_c1(&swap_example());
    ok &= swap.value == Q::new(5, 4);
    notes.push(format!(
        "swap example C₁ = {} (subset enumeration {}, expected 5/4)",
        swap.value, oracle
    ));
    let mut greedy_bad = 0;
    for seed in 0..50u64 {
        let mut rng = case_rng(60_000 + seed);
        let depth = 2 + (seed % 2) as u32;
        let tau = random_tau(&mut rng, depth).unwrap();
        let keep = random_subset(&mut rng, &tau.domain(), 0.7);
        let tau = Rearrangement::new(
            depth,
            tau.pairs()
                .filter(|(i, _)| keep.contains(i))
                .map(|(i, j)| (*i, *j)),
        )
        .unwrap();
        let e = c1(&tau, SupMode::exact()).unwrap();
        let g = c1(&tau, SupMode::greedy(seed)).unwrap();
        greedy_bad += !(g.value <= e.value && e.value == oracle_c1(&tau)) as usize;
    }
    ok &= greedy_bad == 0;
    notes.push(format!(
        "greedy ≤ exact = enumeration failed on {greedy_bad} of 50"
    ));
    outcome(ok, notes.join("; "))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn per_call(n: u32, mut f: impl FnMut()) -> Duration {
    let start = Instant::now();
    for _ in 0..n {
        f();
    }
    start.elapsed() / n
}

fn criterion_11() -> Outcome {
    let mut notes = Vec::new();
    let configs = [
        (
            "factorization",
            ExperimentConfig {
                cases: 20,
                ..ExperimentConfig::default()
            },
        ),
        (
            "holder",
            ExperimentConfig {
                cases: 10,
                depth: 4,
                space: NormedSpace::lr(1.0, 2).unwrap(),
                ..ExperimentConfig::default()
            },
        ),
        (
            "atom-h1",
            ExperimentConfig {
                cases: 10,
                ..ExperimentConfig::default()
            },
        ),
        (
            "c1",
            ExperimentConfig {
                cases: 8,
                ..ExperimentConfig::default()
            },
        ),
    ];
    let mut deterministic = true;
    for (name, cfg) in &configs {
        let runs: Vec<String> = [1, 2, 8]
            .iter()
            .map(|t| in_pool(*t, || run_suite(name, cfg).unwrap().to_json()))
            .collect();
        deterministic &= runs.windows(2).all(|w| w[0] == w[1]);
    }
    notes.push(format!(
        "byte-identical reports under 1/2/8 threads: {deterministic}"
    ));

    let mut rng = case_rng(7);
    let full = HaarVector::scalar(
        8,
        DyadicInterval::all_up_to(8)
            .map(|i| (i, rng.gen_range(-1.0..1.0)))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let norms = per_call(20, || {
        hp_norm(&full, 1.0, RademacherMode::Exact).unwrap();
        hp_norm(&full, 2.0, RademacherMode::Exact).unwrap();
        bmo_norm(&full).unwrap();
    }) / 3;
    notes.push(format!("depth-8 scalar norm {:.2?}/call", norms));

    let chain = HaarVector::from_terms(
        NormedSpace::lr(1.0, 2).unwrap(),
        15,
        (0..16)
            .map(|k| {
                (
                    iv(k, 0),
                    vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                )
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let rademacher = per_call(3, || {
        vector_square_function_with_cap(&chain, RademacherMode::Exact, 16).unwrap();
    });
    notes.push(format!("exact Rademacher, 16-chain {:.2?}", rademacher));

    let mut c1_time = Duration::ZERO;
    for tau in [Rearrangement::identity(3), random_tau(&mut rng, 3).unwrap()] {
        let start = Instant::now();
        let r = c1(&tau, SupMode::exact()).unwrap();
        assert!(r.exhaustive);
        c1_time = c1_time.max(start.elapsed());
    }
    notes.push(format!("exact C₁ on 15 intervals {:.2?}", c1_time));

    outcome(
        deterministic
            && norms < Duration::from_millis(10)
            && rademacher < Duration::from_secs(1)
            && c1_time < Duration::from_secs(5),
        notes.join("; "),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form maximal integral", criterion_1),
        ("witness chain", criterion_2),
        ("pointwise factorization", criterion_3),
        ("Hölder chain", criterion_4),
        ("atom H¹ bound", criterion_5),
        ("H² isometry", criterion_6),
        ("Hilbert-case square function", criterion_7),
        ("contraction principle", criterion_8),
        ("atomic decomposition", criterion_9),
        ("C₁ baseline", criterion_10),
        ("determinism and performance", criterion_11),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let n = k + 1;
        if !filter.is_empty() && !filter.iter().any(|f| *f == n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {status} {name}: {} [{:.1?}]",
            o.detail,
            start.elapsed()
        );
        failed += !o.ok as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
