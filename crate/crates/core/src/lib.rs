//! Phoneme frequency distributions at two scales.
//!
//! * [`dirichlet`]: rank–frequency curves as order statistics of a
//!   symmetric Dirichlet, the entropy ↔ concentration relation, and the
//!   inventory-size scaling law.
//! * [`entropy`]: plug-in and Chao–Wang–Jost entropy estimates.
//! * [`lexicon`] and [`features`]: per-phoneme physical cost, segmental
//!   information and conditional lexical diversity from a phonemized lexicon.
//! * [`maxent`]: the maximum-entropy distribution under feature
//!   expectation constraints, solved through its convex dual.
//! * [`analysis`]: cross-language regression, correlation tests and the
//!   compensation report.

pub mod analysis;
pub mod dirichlet;
pub mod entropy;
pub mod error;
pub mod features;
pub mod formats;
pub mod lexicon;
pub mod maxent;
pub mod quadrature;
pub mod roots;
pub mod special;

pub use error::{Error, Result};
