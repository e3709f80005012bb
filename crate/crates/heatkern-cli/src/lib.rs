//! Config-driven comparison of heat-trace asymptotics against exact oracles.

pub mod config;
pub mod error;
pub mod model;
pub mod run;

use std::path::Path;

pub use config::{RunConfig, Task};
pub use error::CliError;
pub use run::{execute, render, RunResult};

/// Parses `text`, runs `task` and renders the artifact; returns the exit code and the output.
pub fn run_text(task: Task, text: &str, threads: Option<usize>) -> (i32, Result<String, CliError>) {
    let outcome = RunConfig::parse(text).and_then(|cfg| {
        let result = execute(task, &cfg, threads)?;
        Ok((result.exit_code(), render(&result, cfg.format)))
    });
    match outcome {
        Ok((code, out)) => (code, Ok(out)),
        Err(e) => (1, Err(e)),
    }
}

/// Full command: reads the config, writes the artifact and reports on stderr.
pub fn run_command(task: Task, config: &Path, out: Option<&Path>) -> i32 {
    let go = || -> Result<i32, CliError> {
        let cfg = RunConfig::from_file(config)?;
        let threads = run::thread_limit()?;
        let result = execute(task, &cfg, threads)?;
        let text = render(&result, cfg.format);
        match out.map(Path::to_path_buf).or_else(|| cfg.path.as_ref().map(Into::into)) {
            Some(path) => std::fs::write(&path, text)?,
            None => print!("{text}"),
        }
        if let Some(s) = &result.summary {
            eprintln!(
                "{task}: {} points, max abs err {}, max rel err {}, {}",
                result.rows.len(),
                run::fmt_real(s.max_abs_err),
                run::fmt_real(s.max_rel_err),
                run::status_line(s)
            );
        }
        Ok(result.exit_code())
    };
    match go() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
