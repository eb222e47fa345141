//! Framework documents, built-in examples, reports and the command line.

pub mod builtin;
pub mod cli;
pub mod document;
pub mod report;
