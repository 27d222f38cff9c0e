//! Command line and HTTP front end for `lexpand-core`.

pub mod commands;
pub mod resources;
pub mod service;
pub mod session;
