//! File formats, replicate runner and reports for the blossom thinning simulator.

pub mod annotation;
pub mod config;
pub mod decision_log;
pub mod report;
pub mod runner;
