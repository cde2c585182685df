//! Seeded corpora, verification suites, sweeps and reports.

mod config;
mod corpus;
mod suites;
mod sweep;
mod verify;

pub use config::{Band, CaseRecord, ExperimentConfig, VerificationReport};
pub use corpus::{case_rng, random_atom_case, random_series, random_subset, random_tau, AtomCase};
pub use suites::{run_suite, ATOM_DOMAIN_CAP, SUITES};
pub use sweep::{
    extrapolation_sweep, type_witnesses, Sweep, SweepRow, TypeWitnessReport, WitnessGeneration,
    WITNESS_ULPS,
};
pub use verify::{
    enclosing_interval, image_of_support, verify_atom_h1, verify_factorization, verify_holder_atom,
    verify_holder_chain, AtomH1Check, AtomRootCheck, FactorizationCheck, HolderCheck,
    INEQUALITY_SLACK,
};
