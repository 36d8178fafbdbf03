//! Command-line pipeline and HTTP editing service.

pub mod cli;
pub mod service;
