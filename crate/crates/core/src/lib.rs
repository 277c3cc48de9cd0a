//! Geographic and mobility analytics over location-based check-in corpora.
//!
//! The pipeline loads a [`corpus::Corpus`], computes per-venue features
//! ([`features`]), labels venues by the sign of their abnormal event-window
//! check-ins ([`returns`]) and evaluates rankings and classifiers
//! ([`ml`]). [`synth`] generates seeded corpora with a planted event effect.

pub mod analytics;
pub mod corpus;
pub mod features;
pub mod geo;
pub mod ml;
pub mod mobility;
pub mod returns;
pub mod synth;

#[cfg(test)]
pub(crate) mod testutil;
