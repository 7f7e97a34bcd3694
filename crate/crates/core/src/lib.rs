// SPDX-License-Identifier: Apache-2.0

//! Team recruitment for collaborative mobile crowdsourcing.
//!
//! The crate forms teams of skilled, socially connected workers for a
//! project in two ways:
//!
//! * [`exact`] solves the recruitment integer program exactly, for both the
//!   platform-based and the leader-based strategy, by depth-first
//!   branch-and-bound over skill slots (with a brute-force oracle).
//! * The low-complexity pipeline embeds the social graph ([`embed`]),
//!   clusters the embedding and selects a reduced candidate pool
//!   ([`cluster`]), then runs a genetic algorithm over that pool ([`ga`]).
//!
//! [`graph`] holds the social network model, [`domain`] the worker/project
//! model and the objective, and [`dataset`] the semi-synthetic attribute
//! generator used by the benchmark harness.

pub mod cluster;
pub mod dataset;
pub mod domain;
pub mod embed;
pub mod error;
pub mod exact;
pub mod ga;
pub mod graph;
pub mod seed;

pub use error::{Error, Result};
