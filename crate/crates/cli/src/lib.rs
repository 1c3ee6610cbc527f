//! Library side of the `eigensense` command-line tool.

pub mod commands;
pub mod config;
pub mod matrix_file;
