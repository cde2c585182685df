//! Extrapolation sweeps and the witnesses `s_i`, `ρ_i`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dyadic::{
    fraction_to_f64, DyadicInterval, DyadicRational, Fraction, IntervalCollection,
};
use crate::error::{Error, Result};
use crate::haar::{HaarVector, NormedSpace};
use crate::maximal::{c1, SupMode};
use crate::rearrange::{apply_t, opnorm_lower, Rearrangement, SearchConfig};

use super::verify::INEQUALITY_SLACK;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    /// Searched lower bound for `‖T_q ⊗ Id‖`.
    pub lower_q: f64,
    pub lower_p: f64,
    #[serde(serialize_with = "crate::dyadic::serialize_fraction")]
    pub c1: Fraction,
    pub c1_exact: bool,
    /// `C₁^{1/q-1/p} · lower_p`.
    pub bound: f64,
    /// `lower_q / bound`.
    pub implied_constant: f64,
    /// `certified` when the row carries a hard assertion, else `empirical`.
    pub status: &'static str,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub space: NormedSpace,
    pub rows: Vec<SweepRow>,
    /// Per `p`: searched `‖T_q‖` lower bounds are nondecreasing as `q` decreases.
    /// Reported only.
    pub monotone_in_q: bool,
}

impl Sweep {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.holds != Some(false))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "p",
            "q",
            "lower_q",
            "lower_p",
            "c1",
            "c1_exact",
            "bound",
            "implied_constant",
            "status",
            "holds",
        ])
        .map_err(csv_error)?;
        for r in &self.rows {
            w.write_record([
                r.p.to_string(),
                r.q.to_string(),
                r.lower_q.to_string(),
                r.lower_p.to_string(),
                crate::dyadic::fraction_string(&r.c1),
                r.c1_exact.to_string(),
                r.bound.to_string(),
                r.implied_constant.to_string(),
                r.status.to_string(),
                r.holds.map_or(String::new(), |b| b.to_string()),
            ])
            .map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::domain(format!("csv: {e}"))
}

fn is_identity(tau: &Rearrangement) -> bool {
    tau.pairs().all(|(i, j)| i == j)
}

/// Norm lower bounds and `C₁` for every `(p, q)` with `q ≤ p`. The only hard
/// assertion is for `τ` the identity on its domain, where `‖T_p‖ ≤ 1` is known.
pub fn extrapolation_sweep(
    tau: &Rearrangement,
    p_list: &[f64],
    q_list: &[f64],
    space: NormedSpace,
    search: &SearchConfig,
    c1_mode: SupMode,
) -> Result<Sweep> {
    if let Some(x) = p_list
        .iter()
        .chain(q_list)
        .find(|x| !(**x > 0.0 && **x < 2.0))
    {
        return Err(Error::domain(format!(
            "sweep exponents must lie in (0, 2), got {x}"
        )));
    }
    let c = c1(tau, c1_mode)?;
    let c1f = fraction_to_f64(&c.value);
    let mut lower: BTreeMap<u64, f64> = BTreeMap::new();
    let mut lower_of = |x: f64| -> Result<f64> {
        if let Some(v) = lower.get(&x.to_bits()) {
            return Ok(*v);
        }
        let v = opnorm_lower(tau, x, space, search)?.bound;
        lower.insert(x.to_bits(), v);
        Ok(v)
    };
    let certified = is_identity(tau);
    let mut rows = Vec::new();
    for &p in p_list {
        for &q in q_list.iter().filter(|q| **q <= p) {
            let lower_q = lower_of(q)?;
            let lower_p = lower_of(p)?;
            let bound = c1f.powf(1.0 / q - 1.0 / p) * lower_p;
            let holds = certified
                .then(|| lower_q <= c1f.powf(1.0 / q - 1.0 / p) * (1.0 + INEQUALITY_SLACK));
            rows.push(SweepRow {
                p,
                q,
                lower_q,
                lower_p,
                c1: c.value,
                c1_exact: c.exhaustive,
                bound,
                implied_constant: lower_q / bound,
                status: if certified { "certified" } else { "empirical" },
                holds,
            });
        }
    }
    let mut qs: Vec<f64> = q_list.to_vec();
    qs.sort_by(|a, b| b.total_cmp(a));
    qs.dedup();
    let mut monotone = true;
    for w in qs.windows(2) {
        monotone &= lower_of(w[1])? >= lower_of(w[0])? * (1.0 - INEQUALITY_SLACK);
    }
    Ok(Sweep {
        space,
        rows,
        monotone_in_q: monotone,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessGeneration {
    pub i: u32,
    /// `F_i = G_i(K | τ(C))`.
    pub f: IntervalCollection,
    /// `E_i = σ(F_i)`.
    pub e: IntervalCollection,
    pub rho: HaarVector,
    pub s: HaarVector,
    /// Largest coefficient error of `T_p s_i` against `ρ_i`, in ulps of 1.
    pub max_ulps: f64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeWitnessReport {
    pub n: u32,
    pub p: f64,
    pub carleson_c: DyadicRational,
    pub carleson_tau_c: DyadicRational,
    /// Whether `⟦τ(C)⟧ ≥ n²`.
    pub packing_filter_met: bool,
    pub k: DyadicInterval,
    /// `|G_n(K | τ(C))*| / |K|`.
    pub generation_score: DyadicRational,
    #[serde(serialize_with = "crate::dyadic::serialize_fraction")]
    pub threshold: Fraction,
    pub meets_threshold: bool,
    pub degenerate: bool,
    pub union_in_c: bool,
    pub generations: Vec<WitnessGeneration>,
    pub passed: bool,
}

/// Matching coefficients of `T_p s_i` and `ρ_i` may differ by this many ulps.
pub const WITNESS_ULPS: f64 = 4.0;

/// Builds `F_i`, `E_i`, `ρ_i` and `s_i` for `i = 1..=n` and checks
/// `T_p s_i = ρ_i` and `∪E_i ⊆ C`.
pub fn type_witnesses(
    tau: &Rearrangement,
    c: &IntervalCollection,
    n: u32,
    p: f64,
) -> Result<TypeWitnessReport> {
    if n == 0 {
        return Err(Error::domain("n must be a positive integer"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!(
            "exponent p must be positive, got {p}"
        )));
    }
    let carleson_c = c.carleson_constant()?;
    if carleson_c > DyadicRational::from_int(4) {
        return Err(Error::domain(format!(
            "the witnesses need ⟦C⟧ ≤ 4, but ⟦C⟧ = {carleson_c}"
        )));
    }
    let tau_c = c.map(|i| tau.tau_checked(i))?;
    let carleson_tau_c = tau_c.carleson_constant()?;
    let (k, generation_score) = tau_c.condensation_score(n)?;
    let depth = tau.depth();
    let mut generations = Vec::new();
    let mut union = IntervalCollection::new();
    for i in 1..=n {
        let f = tau_c.gn(&k, i);
        let e = f.map(|j| tau.sigma_checked(j))?;
        let rho = HaarVector::scalar(depth, f.iter().map(|j| (*j, 1.0)))?;
        let s = HaarVector::scalar(
            depth,
            e.iter().map(|j| {
                let t = tau.tau(j).expect("in domain");
                (*j, ((j.level() as f64 - t.level() as f64) / p).exp2())
            }),
        )?;
        let image = apply_t(&s, tau, p)?;
        let mut matches = image.support() == rho.support();
        let mut max_ulps: f64 = 0.0;
        for (j, x) in image.terms() {
            let ulps = (x[0] - rho.scalar_coeff(j)).abs() / f64::EPSILON;
            max_ulps = max_ulps.max(ulps);
        }
        matches &= max_ulps <= WITNESS_ULPS;
        for j in e.iter() {
            union.insert(*j);
        }
        generations.push(WitnessGeneration {
            i,
            f,
            e,
            rho,
            s,
            max_ulps,
            matches,
        });
    }
    let threshold = Fraction::new(n as i128 - 1, n as i128);
    let union_in_c = union.is_subset(c);
    let degenerate = generations.iter().all(|g| g.f.is_empty());
    let n2 = DyadicRational::from_int((n as i128) * (n as i128));
    Ok(TypeWitnessReport {
        n,
        p,
        carleson_c,
        carleson_tau_c,
        packing_filter_met: carleson_tau_c >= n2,
        k,
        meets_threshold: generation_score.to_fraction() >= threshold,
        generation_score,
        threshold,
        degenerate,
        union_in_c,
        passed: union_in_c && generations.iter().all(|g| g.matches),
        generations,
    })
}
