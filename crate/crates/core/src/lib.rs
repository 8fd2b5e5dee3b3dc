//! Exact finite approximations of infinite groups arising in dynamics.
//!
//! The crate builds compressed sofic witnesses for subgroups of the full
//! group of the dyadic odometer, LEF witnesses for topological full groups
//! of minimal substitution subshifts, and local embeddings of generalized
//! lamplighter groups over free-product Schreier graphs. Every defining
//! inequality and identity is checked exactly, in integer and rational
//! arithmetic; no verdict ever depends on floating point.
//!
//! Module map:
//!
//! * [`words`] — reduced-word arithmetic for free groups and free products
//!   of order-2 cyclic groups.
//! * [`finactions`] — finite self-maps, the normalized Hamming metric,
//!   tensor-power amplification, and the sofic / LEF / compressed witness
//!   checkers.
//! * [`ballstats`] — rooted labeled balls, canonical codes, and empirical
//!   local statistics of finite actions.
//! * [`subshift`] — minimal substitution subshifts: lazy two-sided points,
//!   language queries, repetitivity windows.
//! * [`fullgroup`] — elements of the topological full group of a subshift,
//!   orbit permutations, and the LEF-quotient pipeline.
//! * [`odometer`] — dyadic maps over the add-one-with-carry odometer,
//!   exact fixed-point measures, and the compressed-representation
//!   pipeline.
//! * [`lamps`] — Schreier-graph balls of free-product actions, truncated
//!   lamplighter groups, and local-embedding verification.
//! * [`report`] — structured, deterministic, machine-parseable reports.
//! * [`acceptance`] — the bundled end-to-end verification suite.

pub mod acceptance;
pub mod ballstats;
pub mod budget;
pub mod finactions;
pub mod fullgroup;
pub mod lamps;
pub mod odometer;
pub mod ratio;
pub mod report;
pub mod subshift;
pub mod words;
