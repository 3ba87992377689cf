//! Permutation-based disclosure analysis for numeric microdata.
//!
//! Any anonymization of a table `X` into `Y` can be replayed as a permutation
//! of `X` (the reverse-mapped table `Z`, whose attributes hold exactly the
//! original values in the ranks of `Y`) followed by noise too small to change
//! any rank. This crate builds on that view:
//!
//! - [`reverse`]: reverse mapping `Y -> Z`.
//! - [`decomposition`]: the `(Z, E', E)` split and rank-correlation risk.
//! - [`privacy`]: permutation distance and (d, v)-permuted privacy, for a single
//!   subject or a whole data set.
//! - [`linkage`]: the maximum-knowledge intruder's record linkage against `Z`.
//! - [`baseline`]: random-record baselines to judge whether linkages are better
//!   than chance.
//! - [`masking`]: synthetic originals and Gaussian noise masking.
//! - [`io`]: CSV, JSON reports, histograms and run configuration.
//!
//! ```
//! use permuted_privacy::{fixture::RunningExample, privacy::certify_dataset};
//!
//! let ex = RunningExample::load();
//! let cert = certify_dataset(&ex.original, &ex.anonymized, 0, None).unwrap();
//! assert_eq!(cert.dataset_distance, 1);
//! ```

pub mod baseline;
pub mod decomposition;
pub mod demo;
pub mod error;
pub mod fixture;
pub mod io;
pub mod linkage;
pub mod masking;
pub mod privacy;
pub mod reverse;
pub mod rng;
pub mod table;

pub use error::{Error, Result};
pub use table::{compute_ranks, value_at_rank, MicrodataTable, RankProfile, RankVector, Role};
