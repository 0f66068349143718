//! Eager entity alignment for RML+FnO knowledge graph pipelines.
//!
//! Mapping documents that call alignment functions are translated into
//! function-free RML: every call is evaluated once per distinct input,
//! materialized as a two-column CSV and joined back in.

#![allow(clippy::result_large_err)]

pub mod cli;
pub mod dataset;
pub mod eval;
pub mod functions;
pub mod linker;
pub mod materializer;
pub mod metrics;
pub mod pipeline;
pub mod rml;
pub mod translator;
