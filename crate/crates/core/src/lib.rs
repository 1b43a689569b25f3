//! Obfuscation, symbolic-execution artifacts, dataset construction and
//! scoring for deobfuscation experiments on a small C subset.

pub mod artifacts;
pub mod dataset;
pub mod frontend;
pub mod metrics;
pub mod report;
pub mod symexec;
pub mod transforms;
