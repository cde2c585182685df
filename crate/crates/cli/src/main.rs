use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use haarlab_core::atoms::{atomic_decomposition, validate_decomposition};
use haarlab_core::lab::{
    extrapolation_sweep, random_series, run_suite, type_witnesses, ExperimentConfig,
    VerificationReport, SUITES,
};
use haarlab_core::maximal::{
    c1, carleson_ratio_sup, mu_exact, MaximalReport, SupMode, DEFAULT_GREEDY_RESTARTS,
};
use haarlab_core::rearrange::{generate, opnorm_lower, GeneratorKind, SearchConfig};
use haarlab_core::{HaarVector, IntervalCollection, NormedSpace, RademacherMode, Rearrangement};

#[derive(Parser, Debug)]
#[command(
    name = "haarlab",
    version,
    about = "Dyadic Haar rearrangement experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Truncation depth.
    #[arg(long, global = true, default_value_t = 5)]
    depth: u32,
    /// Comma separated exponents p.
    #[arg(long = "p", global = true, value_delimiter = ',', default_values_t = [2.0, 1.5])]
    p: Vec<f64>,
    /// Comma separated exponents q.
    #[arg(long = "q", global = true, value_delimiter = ',', default_values_t = [1.0, 0.5])]
    q: Vec<f64>,
    /// Coefficient space `r,m` (`inf,m` for the sup norm).
    #[arg(long, global = true, default_value = "2,1")]
    space: NormedSpace,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Monte Carlo sign patterns per cell.
    #[arg(long, global = true, default_value_t = 4096)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Rearrangement file (`depth N` header, then `n:k -> n':k'` lines).
    #[arg(long, global = true)]
    tau: Option<PathBuf>,
    /// Generator family used when no `--tau` is given; the identity otherwise.
    #[arg(long, global = true)]
    gen: Option<GeneratorKind>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Objective {
    C1,
    CarlesonRatio,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Carleson constant and optional condensation score of a collection.
    Carleson {
        /// Intervals as `n:k` items, e.g. `0:0,1:0,2:1`.
        collection: IntervalCollection,
        /// Generation index for the condensation score.
        #[arg(long)]
        n: Option<u32>,
    },
    /// `μ_H` on its grid, its integral and the resolving collection.
    Mu {
        /// `H ⊆ τ(D)` as `n:k` items.
        h: IntervalCollection,
    },
    /// `C₁` or the Carleson-ratio supremum of `τ`.
    C1 {
        #[arg(long, value_enum, default_value_t = Objective::C1)]
        objective: Objective,
        /// Use seeded local search instead of exhaustive enumeration.
        #[arg(long)]
        greedy: bool,
        /// Largest `τ(D)` enumerated exhaustively.
        #[arg(long, default_value_t = haarlab_core::maximal::DEFAULT_MAX_INTERVALS)]
        max_intervals: usize,
    },
    /// Searched lower bound for `‖T_{τ,p} ⊗ Id‖` at the first `--p`.
    Opnorm {
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
    },
    /// Atomic decomposition of a series file, or of a seeded random series.
    Atoms {
        /// Series file (`space r m depth` header, then `n:k v1 .. vm` lines).
        #[arg(long)]
        series: Option<PathBuf>,
        /// Support size of the random series when no file is given.
        #[arg(long, default_value_t = 16)]
        support: usize,
    },
    /// Runs verification suites and reports every case.
    Verify {
        /// Suite name, or `all`.
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
    /// Extrapolation table over all `(p, q)` with `q ≤ p`.
    Sweep {
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 60)]
        iterations: usize,
        #[arg(long)]
        greedy: bool,
    },
    /// Writes a seeded rearrangement in the file format read by `--tau`.
    GenTau {
        /// levelperm, blockshift, randominjection or carlesondistorter.
        kind: GeneratorKind,
    },
    /// Witnesses `s_i`, `ρ_i` for a collection with `⟦C⟧ ≤ 4`.
    TypeWitness {
        collection: IntervalCollection,
        #[arg(long)]
        n: u32,
    },
}

impl Common {
    fn rademacher(&self) -> RademacherMode {
        match self.mode {
            Mode::Exact => RademacherMode::Exact,
            Mode::Mc => RademacherMode::MonteCarlo {
                samples: self.samples,
                seed: self.seed,
            },
        }
    }

    fn rearrangement(&self) -> Result<Rearrangement> {
        if let Some(path) = &self.tau {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(Rearrangement::parse_text(&text)?);
        }
        Ok(match self.gen {
            Some(kind) => generate(kind, self.depth, self.seed)?,
            None => Rearrangement::identity(self.depth),
        })
    }

    fn first_p(&self) -> Result<f64> {
        self.p
            .first()
            .copied()
            .ok_or_else(|| anyhow!("--p needs at least one value"))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                print!("{text}");
                if !text.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }

    fn emit_json(&self, value: &impl Serialize) -> Result<()> {
        self.require_json()?;
        self.emit(&serde_json::to_string_pretty(value)?)
    }

    fn require_json(&self) -> Result<()> {
        if self.format == Format::Csv {
            bail!("this subcommand only writes JSON");
        }
        Ok(())
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn reports_csv(reports: &[VerificationReport]) -> Result<String> {
    let rows = reports.iter().flat_map(|r| {
        r.cases.iter().map(move |c| {
            vec![
                r.suite.clone(),
                c.index.to_string(),
                c.seed.to_string(),
                c.passed.to_string(),
                c.slack.to_string(),
                serde_json::to_string(&c.values).expect("serializable"),
            ]
        })
    });
    csv_text(
        &["suite", "index", "seed", "passed", "slack", "values"],
        rows,
    )
}

/// Returns whether every hard assertion passed.
fn run(cli: Cli) -> Result<bool> {
    let common = &cli.common;
    match cli.command {
        Command::Carleson { collection, n } => {
            let constant = collection.carleson_constant()?;
            let condensation = n
                .map(|n| {
                    collection
                        .condensation_score(n)
                        .map(|(k, s)| json!({ "n": n, "k": k, "score": s }))
                })
                .transpose()?;
            common.emit_json(&json!({
                "collection": collection,
                "carleson": constant,
                "condensation": condensation,
            }))?;
            Ok(true)
        }
        Command::Mu { h } => {
            let tau = common.rearrangement()?;
            let report = MaximalReport::new(&h, &tau)?;
            let (grid, values) = mu_exact(&h, &tau)?;
            match common.format {
                Format::Json => {
                    common.emit_json(&json!({ "report": report, "grid": grid, "mu": values }))?
                }
                Format::Csv => common.emit(&csv_text(
                    &["cell", "mu"],
                    values
                        .iter()
                        .enumerate()
                        .map(|(c, v)| vec![c.to_string(), v.to_string()]),
                )?)?,
            }
            Ok(true)
        }
        Command::C1 {
            objective,
            greedy,
            max_intervals,
        } => {
            let tau = common.rearrangement()?;
            let mode = if greedy {
                SupMode::Greedy {
                    seed: common.seed,
                    restarts: DEFAULT_GREEDY_RESTARTS,
                }
            } else {
                SupMode::Exact { max_intervals }
            };
            let r = match objective {
                Objective::C1 => c1(&tau, mode)?,
                Objective::CarlesonRatio => carleson_ratio_sup(&tau, mode)?,
            };
            common.emit_json(&r)?;
            Ok(true)
        }
        Command::Opnorm {
            restarts,
            iterations,
        } => {
            let tau = common.rearrangement()?;
            let search = SearchConfig {
                restarts,
                iterations,
                seed: common.seed,
                support_cap: None,
            };
            let e = opnorm_lower(&tau, common.first_p()?, common.space, &search)?;
            common.emit_json(&e)?;
            Ok(true)
        }
        Command::Atoms { series, support } => {
            let f = match series {
                Some(path) => HaarVector::parse_text(
                    &fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?,
                )?,
                None => {
                    let mut rng = haarlab_core::lab::case_rng(common.seed);
                    random_series(&mut rng, common.space, common.depth, support)?
                }
            };
            let p = common.first_p()?;
            let d = atomic_decomposition(&f, p)?;
            let report = validate_decomposition(&f, p, &d)?;
            common.emit_json(&json!({ "decomposition": d, "report": report }))?;
            Ok(report.passed)
        }
        Command::Verify { suite, cases } => {
            let config = ExperimentConfig {
                depth: common.depth,
                p_list: common.p.clone(),
                q_list: common.q.clone(),
                space: common.space,
                mode: common.rademacher(),
                seed: common.seed,
                cases,
                output: common.out.clone(),
                ..ExperimentConfig::default()
            };
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let reports: Vec<VerificationReport> = names
                .iter()
                .map(|n| run_suite(n, &config))
                .collect::<haarlab_core::Result<_>>()?;
            for r in &reports {
                eprintln!(
                    "{}: {} cases, {} failed{}",
                    r.suite,
                    r.cases.len(),
                    r.failures,
                    if r.failures > 0 {
                        format!(" (seeds {:?})", r.failing_seeds())
                    } else {
                        String::new()
                    }
                );
            }
            match common.format {
                Format::Json => common.emit(&serde_json::to_string_pretty(&reports)?)?,
                Format::Csv => common.emit(&reports_csv(&reports)?)?,
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
        Command::Sweep {
            restarts,
            iterations,
            greedy,
        } => {
            let tau = common.rearrangement()?;
            let search = SearchConfig {
                restarts,
                iterations,
                seed: common.seed,
                support_cap: None,
            };
            let mode = if greedy {
                SupMode::greedy(common.seed)
            } else {
                SupMode::exact()
            };
            let s = extrapolation_sweep(&tau, &common.p, &common.q, common.space, &search, mode)?;
            match common.format {
                Format::Json => common.emit(&serde_json::to_string_pretty(&s)?)?,
                Format::Csv => common.emit(&s.to_csv()?)?,
            }
            Ok(s.passed())
        }
        Command::GenTau { kind } => {
            common.emit(&generate(kind, common.depth, common.seed)?.to_text())?;
            Ok(true)
        }
        Command::TypeWitness { collection, n } => {
            let tau = common.rearrangement()?;
            let r = type_witnesses(&tau, &collection, n, common.first_p()?)?;
            common.emit_json(&r)?;
            Ok(r.passed)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HAARLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("HAARLAB_THREADS={v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
