//! Targeted image steganalysis workbench built around subsequent embedding.
//!
//! The crate provides the full pipeline: embedding-change simulators (LSB
//! matching and a HILL-cost adaptive sender), residual/SPAM/minmax feature
//! extraction, a random-subspace FLD ensemble classifier, the
//! detection-of-classifier-inconsistencies (DCI) machinery with its error
//! estimators, message-length search, multi-rate fusion, ATS unsupervised
//! detection, and a numerical theory engine for the expected-histogram
//! operators and sign-direction predictions that justify the whole approach.

pub mod classifier;
pub mod dci;
pub mod embed;
pub mod error;
pub mod features;
pub mod imaging;
pub mod protocols;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use imaging::{DatasetManifest, GrayImage, Label, ManifestEntry};
pub use rng::SeededRng;
