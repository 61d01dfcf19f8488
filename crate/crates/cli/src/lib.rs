//! Library half of the command line front end: file schemas, command
//! dispatch, and report rendering. The binary in `main.rs` only parses
//! arguments and maps outcomes to exit codes.

pub mod report;
pub mod run;
pub mod specfile;
