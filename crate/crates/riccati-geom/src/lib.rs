//! Problem files, reports and the command implementations behind the
//! `riccati-geom` binary.

pub mod commands;
pub mod number;
pub mod problem;
pub mod report;
pub mod text;

pub use commands::{
    cmd_check, cmd_simulate, cmd_solve, cmd_stabilize, cmd_verify, cmd_zeros, CliError, Options,
};
pub use problem::{Problem, ProblemError, ProblemFile};
pub use report::Report;
