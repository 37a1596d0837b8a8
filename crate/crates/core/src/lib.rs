//! Causal fault localization for distributed request-dependency systems.
//!
//! The model reduces a service topology to a single relation: each request
//! type succeeds iff its dependency expression over component health holds.
//! On top of that sit three localization engines:
//!
//! - [`satdiag`]: deterministic fail-stop localization as a Boolean
//!   assignment problem, minimizing the number of failed components.
//! - [`bayes`]: Beta-Binomial posterior inference over component health from
//!   windowed request success counts, with do-style intervention scoring and
//!   ranked diagnoses.
//! - [`simulate`]: a seeded fail-stop fault-injection simulator used to
//!   generate call records for the above, including a library of canned
//!   scenarios.
//!
//! [`ingest`] turns call-record streams into windowed observations and
//! symptom patterns. All state is explicit and all operations are pure, so
//! values can be shared freely across threads.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature is
//! on by default.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bayes;
pub mod ingest;
pub mod model;
pub mod satdiag;
pub mod simulate;

pub use model::{
    Component, ComponentKind, DependencyExpr, DependencyTerm, ModelError, RequestType,
    SymptomPattern, Topology,
};
