//! Files, parallel drivers and the `ccs` command-line tool on top of
//! [`ccs_core`].

pub mod cli;
pub mod config;
pub mod drivers;
pub mod formats;
pub mod jobs;
