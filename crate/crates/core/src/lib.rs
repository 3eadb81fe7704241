//! Hate speech prediction from the argumentative structure of messages.
//!
//! Messages are encoded purely from their annotations (premise/conclusion
//! layout, checkworthiness labels, component hatefulness) and classified
//! with small models under stratified cross-validation.

pub mod classifiers;
pub mod cli;
pub mod domain;
pub mod encoding;
pub mod evaluation;
pub mod experiment;
pub mod synthgen;
