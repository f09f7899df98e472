//! Analysis toolkit for conclusive LOCC state discrimination and marking.
//!
//! The crate decides, for small multipartite ensembles of pure or mixed
//! quantum states, whether the ensemble can be conclusively discriminated
//! (or marked) by local operations and classical communication, and emits
//! machine-checkable evidence for every verdict:
//!
//! - [`numkernel`] — dense complex linear algebra on small tensor-factor
//!   spaces (inner products, tensor products, factor regrouping, numerical
//!   rank, orthocomplements, Schmidt rank).
//! - [`ensembles`] — construction, validation and JSON (de)serialization of
//!   ensembles, including a registry of named ensembles from the literature.
//! - [`marking`] — the derived marking set of ordered m-tuples, linear
//!   (in)dependence verdicts and explicit dependence witnesses.
//! - [`detect`] — product detecting states: exact branch enumeration for
//!   product ensembles, a seeded alternating heuristic for the rest, and
//!   the discrimination/marking verdicts assembled from them.
//! - [`upb`] — extendibility of product ensembles by partition-rank
//!   enumeration and UB/GUB/UPB/GUPB classification.
//! - [`protocol`] — POVMs, finite local-measurement protocol trees, exact
//!   simulation on pure and mixed hypotheses, and the named protocols.

pub mod detect;
pub mod ensembles;
pub mod jsonutil;
pub mod marking;
pub mod numkernel;
pub mod protocol;
pub mod upb;

pub use numkernel::{Operator, StateVector, ToleranceConfig, C64};
