//! The `prophetlab` command line: instance files, canonical reports and the
//! subcommands that drive the core library.

pub mod commands;
pub mod io;
pub mod report;

use std::path::Path;

use clap::Parser;

pub use commands::Cli;
pub use report::{emit_report, Report};

/// Everything a command can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] prophetlab_core::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 2,
            "parse" => 3,
            "domain" => 4,
            "precondition" => 5,
            "capacity" => 6,
            "resolution" => 7,
            "io" => 8,
            _ => 9,
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`
    pub fn to_json(&self) -> String {
        serde_json::json!({"error": {"kind": self.kind(), "message": self.to_string()}}).to_string()
    }
}

/// Parses `argv` (program name first), runs the command and writes its
/// report. Returns the exit code and, on success, the report.
pub fn dispatch<I, T>(argv: I) -> (i32, Option<Report>)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return (0, None);
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return (err.exit_code(), None);
        }
    };
    match cli.execute() {
        Ok(report) => (0, Some(report)),
        Err(err) => {
            eprintln!("{}", err.to_json());
            (err.exit_code(), None)
        }
    }
}

/// [`dispatch`] inside a thread pool sized by `PROPHETLAB_THREADS` when set.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let threads = std::env::var("PROPHETLAB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(argv).0),
            Err(e) => {
                let err = CliError::Usage(format!("PROPHETLAB_THREADS: {e}"));
                eprintln!("{}", err.to_json());
                err.exit_code()
            }
        },
        _ => dispatch(argv).0,
    }
}
