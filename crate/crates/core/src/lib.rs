//! A pluggable four-stage pipeline for factoid question answering, and a
//! reference system built on it.
//!
//! The stages are information source preparation ([`index`]), question
//! processing ([`analysis`], [`classifier`]), answer retrieval
//! ([`retrieval`]) and evaluation ([`evaluation`]). [`pipeline`] holds the
//! framework and [`system`] the default component for each stage.

pub mod analysis;
pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod index;
pub mod pipeline;
pub mod question;
pub mod retrieval;
pub mod synthetic;
pub mod system;
pub mod taxonomy;
pub mod text;

pub use error::{Error, Result};
