use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::haar::{NormedSpace, RademacherMode, EXACT_RADEMACHER_CAP};
use crate::maximal::DEFAULT_MAX_INTERVALS;

/// Everything a run depends on. Equal configs give byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub depth: u32,
    pub p_list: Vec<f64>,
    pub q_list: Vec<f64>,
    pub space: NormedSpace,
    pub mode: RademacherMode,
    /// Case `i` uses seed `seed + i`.
    pub seed: u64,
    pub cases: usize,
    pub rademacher_cap: usize,
    pub c1_max_intervals: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            depth: 5,
            p_list: vec![2.0, 1.5],
            q_list: vec![1.0, 0.5],
            space: NormedSpace::scalar(),
            mode: RademacherMode::Exact,
            seed: 0,
            cases: 200,
            rademacher_cap: EXACT_RADEMACHER_CAP,
            c1_max_intervals: DEFAULT_MAX_INTERVALS,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn case_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }

    /// The `(p, q)` pairs with `q ≤ p`.
    pub fn exponent_pairs(&self) -> Vec<(f64, f64)> {
        self.p_list
            .iter()
            .flat_map(|p| {
                self.q_list
                    .iter()
                    .filter(move |q| **q <= *p)
                    .map(move |q| (*p, *q))
            })
            .collect()
    }
}

/// One verified case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    pub index: usize,
    pub seed: u64,
    pub passed: bool,
    /// Relative slack allowed by the hard assertions of this case.
    pub slack: f64,
    pub values: BTreeMap<String, serde_json::Value>,
}

impl CaseRecord {
    pub fn new(index: usize, seed: u64, slack: f64) -> Self {
        Self {
            index,
            seed,
            passed: true,
            slack,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("serializable value");
        self.values.insert(key.to_string(), v);
    }

    /// Records a hard assertion; a failing one fails the case.
    pub fn check(&mut self, key: &str, ok: bool) {
        self.set(key, ok);
        self.passed &= ok;
    }
}

/// Observed extremes of a reported quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

impl Band {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Band> {
        values
            .into_iter()
            .filter(|v| v.is_finite())
            .fold(None, |b, v| {
                Some(match b {
                    None => Band { min: v, max: v },
                    Some(b) => Band {
                        min: b.min.min(v),
                        max: b.max.max(v),
                    },
                })
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config: ExperimentConfig,
    pub cases: Vec<CaseRecord>,
    pub failures: usize,
    /// Reported, never asserted.
    pub bands: BTreeMap<String, Band>,
}

impl VerificationReport {
    pub fn new(suite: &str, config: &ExperimentConfig, cases: Vec<CaseRecord>) -> Self {
        Self {
            suite: suite.to_string(),
            config: config.clone(),
            failures: cases.iter().filter(|c| !c.passed).count(),
            cases,
            bands: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Adds the band of a numeric per-case value.
    pub fn band(&mut self, key: &str) {
        let values = self
            .cases
            .iter()
            .filter_map(|c| c.values.get(key).and_then(|v| v.as_f64()));
        if let Some(b) = Band::of(values) {
            self.bands.insert(key.to_string(), b);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    /// Seeds of failing cases.
    pub fn failing_seeds(&self) -> Vec<u64> {
        self.cases
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.seed)
            .collect()
    }
}
