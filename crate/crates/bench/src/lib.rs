// SPDX-License-Identifier: Apache-2.0

//! Experiment harness for the recruitment engine: dataset preparation,
//! pipeline glue, the four comparison experiments and their statistics.

pub mod data;
pub mod error;
pub mod experiments;
pub mod pipeline;
pub mod spec;
pub mod stats;

pub use error::{BenchError, Result};
