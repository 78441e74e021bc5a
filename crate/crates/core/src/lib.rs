//! Centered varimax rotation recovery and its phase-transition harness.
//!
//! Given data `Z_hat = Z R*` whose rows are i.i.d. with independent
//! coordinates of unit variance and excess-kurtosis parameter `kappa`, the
//! centered varimax objective
//!
//! ```text
//! v(Z_hat; R) = (1/n) * sum_{i,j} ((Z_hat R^T)_{ij})^4
//! ```
//!
//! is maximized over the orthogonal group to recover the planted rotation
//! `R*` up to a signed permutation. This crate provides:
//!
//! - dense matrix/rotation types with exact text serialization ([`matrix`],
//!   [`rotation`]);
//! - QR, SVD-backed polar projection, and Haar sampling ([`linalg`]);
//! - data generation for laws of prescribed kurtosis ([`datagen`]);
//! - the objective and a monotone majorize-maximize solver with random
//!   restarts ([`varimax`]);
//! - signed-permutation-invariant distance and the fourth-power gap
//!   functional ([`metrics`]);
//! - an adversarial half-identity witness that certifies failure regimes
//!   ([`adversarial`]);
//! - a deterministic Monte Carlo sweep harness with CSV output
//!   ([`harness`]) and an SVG phase-diagram renderer ([`heatmap`]);
//! - direct numerical verification of the analytic identities the phase
//!   transition rests on ([`theory`]).
//!
//! Everything is deterministic given seeds: sweeps produce byte-identical
//! CSV and SVG output regardless of thread count.

pub mod adversarial;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod heatmap;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod rotation;
pub mod seed;
pub mod theory;
pub mod varimax;

pub use adversarial::{build_witness, expected_objective, witness_beats_truth, AdversarialWitness};
pub use datagen::{make_instance, sample_law, sample_moments, Instance, KurtosisLaw, Moments};
pub use error::{Error, Result};
pub use harness::{
    parse_sweep_config, records_from_csv, records_to_csv, run_sweep, run_trial, summarize,
    summary_to_csv, trial_seed, CellSummary, ParsedSweepConfig, SweepConfig, TrialParams,
    TrialRecord, RECORDS_HEADER, SUMMARY_HEADER,
};
pub use heatmap::render_heatmap;
pub use linalg::{haar_rotation, polar_project, qr_decompose, qr_full};
pub use matrix::Matrix;
pub use metrics::{
    best_signed_permutation, brute_force_signed_permutation, fourth_power_gap, rotation_distance,
    DistanceResult, GapReport,
};
pub use rotation::{Rotation, SignedPermutation};
pub use seed::derive_seed;
pub use theory::{check_theory, check_theory_with_gap, CheckResult, TheoryReport};
pub use varimax::{directional_objective, objective, optimize, OptimizeOptions, VarimaxSolution};
