//! Exact leakage certificates for polar codewords whose coordinates are
//! partly published on a public channel.
//!
//! Frozen bits are treated as a fresh uniform secret shared with the
//! receiver. For a published set `P` the crate computes the exact number of
//! information bits leaked, `rank(G_P) - rank(G_{F,P})`, builds the
//! eavesdropper's extractor, picks low-leakage publish sets, and simulates
//! the whole scheme over binary erasure channels.
//!
//! Library APIs use 0-based indices; the file formats in [`formats`] are
//! 1-based.

pub mod bec_sim;
pub mod error;
pub mod formats;
pub mod gf2;
pub mod leakage;
pub mod polar;
pub mod selection;

pub use bec_sim::{
    adversary_observe, run_experiment, sc_decode, transmit, ChannelAssignment,
    ExperimentSettings, SimulationReport, Symbol,
};
pub use error::{Error, Result};
pub use formats::{CertificateFile, CodeDescriptor, ExperimentConfig};
pub use gf2::{extend_basis, BitMatrix, RowBasis};
pub use leakage::{
    build_extractor, exhaustive_mi_oracle, leakage, leaked_equation_report, verify_certificate,
    LeakageCertificate, LeakageCounts, VerificationReport,
};
pub use polar::{bec_reliability, encode, polar_transform, Delta, Design, PolarCode};
pub use selection::{
    brute_force_min_leakage, score_greedy, score_table, sweep_report, BruteForceOptions, Method,
    ScoreTable, SelectionResult, SweepRow,
};
