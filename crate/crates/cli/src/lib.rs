//! Configuration loading, scenario execution, and table emission behind the
//! `foldtail` binary. Everything here is deterministic: the same config and
//! seed produce byte-identical output files regardless of worker count.

pub mod config;
pub mod run;
pub mod tables;
