//! The `haarsf` command line: detection, benchmarks, evaluation and the
//! annotation server.

pub mod args;
pub mod commands;
pub mod frames;
pub mod server;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use frames::{list_frames, EmptyInput, Frame};

/// Parse `argv` and run the selected command, returning the process exit
/// code: 0 on success, 1 on usage or I/O errors, 2 when the input directory
/// holds no frames.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<EmptyInput>().is_some() {
                2
            } else {
                1
            }
        }
    }
}
