//! Problem-file language and command implementations for the `msumma` tool.

pub mod commands;
pub mod dsl;

pub use commands::{run, CliError, Command, Flags, Outcome};
pub use dsl::{parse_problem, ParseError, ProblemFile};
