//! Student development agents: framework types, the education taxonomy
//! pipeline, findings retrieval, prompt assembly and the period loop.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod engine;
mod error;
pub mod files;
pub mod knowledge;
pub mod promptkit;
pub mod sampling;
pub mod taxonomy;

pub use domain::{
    standardize_score, validate_profile, ActionRule, ActionSpec, AgentState, BehaviorRecord,
    DevelopmentalState, Dimension, DimensionSet, EndowmentProfile, EnvironmentSpec, SpeakerRole,
    StudentProfile, Utterance, Violation,
};
pub use error::{CoreError, Result};
pub use sampling::{assign_strata, stratified_sample, SampledAgent};
pub use taxonomy::{Branch, Subcategory, Taxonomy};
