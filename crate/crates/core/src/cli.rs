//! The `vmpt` command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or config error,
//! 3 I/O or parse error. `-` stands for stdin/stdout in `--in`/`--out`.

use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, Mode};
use crate::environments::{enumerate_environments, EnvironmentId};
use crate::generator::{generate, paper_fixture, FixtureId, GeneratorConfig};
use crate::model::Trace;
use crate::trace_io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vmpt", version, about = "Workload traces for dynamic VM placement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trace.
    Generate {
        /// Environment as E,O or (E,O).
        #[arg(long)]
        env: Option<EnvironmentId>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        dcs: Option<u32>,
        /// JSON generator config; flags above override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inject each enabled dynamic at least once.
        #[arg(long)]
        guarantee_dynamics: bool,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Write one of the worked-example traces.
    Fixture {
        /// 0,1 | 0,2 | 1,0 | 2,0
        #[arg(long)]
        id: FixtureId,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Check a trace against structural rules and an environment.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "strict")]
        mode: Mode,
        /// Defaults to the environment in the trace header.
        #[arg(long)]
        declared: Option<EnvironmentId>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Print the smallest environment consistent with a trace.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Count a service arriving while another is alive as horizontal elasticity.
        #[arg(long)]
        arrival_as_horizontal: bool,
    },
    /// Per-datacenter requested and utilized totals per tick.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Re-encode a trace.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Print the 16 environments.
    ListEnvs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Csv,
    Jsonl,
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn io_failure(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_IO,
        message: message.to_string(),
    }
}

/// Parses `args` (including the program name) and runs one subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let mut text = e.render().to_string();
            if code == EXIT_USAGE && !text.contains("Usage:") {
                text.push_str(&format!("\n{}\n", Cli::command().render_usage()));
            }
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "vmpt: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Generate {
            env,
            seed,
            horizon,
            dcs,
            config,
            guarantee_dynamics,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
                    GeneratorConfig::from_json(&text)
                        .map_err(|e| usage(format!("{}: {e}", path.display())))?
                }
                None => GeneratorConfig::default(),
            };
            if let Some(env) = env {
                cfg.environment = env;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(horizon) = horizon {
                cfg.horizon = horizon;
            }
            if let Some(dcs) = dcs {
                cfg.num_datacenters = dcs;
            }
            cfg.guarantee_dynamics |= guarantee_dynamics;
            let trace = generate(&cfg).map_err(usage)?;
            emit_trace(&trace, &out, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Fixture { id, out } => {
            emit_trace(&paper_fixture(id), &out, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Validate {
            input,
            mode,
            declared,
            format,
        } => {
            let trace = load(&input)?;
            let declared = declared.unwrap_or(trace.header.environment);
            let report = analysis::validate_as(&trace, mode, declared);
            let text = match format {
                Format::Json => report.to_json(),
                Format::Table => report.render_table(),
            };
            stdout.write_all(text.as_bytes()).map_err(io_failure)?;
            Ok(if report.ok { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Classify {
            input,
            arrival_as_horizontal,
        } => {
            let trace = load(&input)?;
            match analysis::classify(&trace, arrival_as_horizontal) {
                Ok(env) => {
                    writeln!(stdout, "{env}").map_err(io_failure)?;
                    Ok(EXIT_OK)
                }
                Err(e) => Err(Failure {
                    code: EXIT_INVALID,
                    message: e.to_string(),
                }),
            }
        }
        Command::Stats { input, format, out } => {
            let trace = load(&input)?;
            let series = analysis::stats(&trace);
            let text = match format {
                Format::Json => series.to_json(),
                Format::Table => series.render_table(),
            };
            emit(&out, stdout, |w| w.write_all(text.as_bytes()))?;
            Ok(EXIT_OK)
        }
        Command::Convert { input, to, out } => {
            let trace = load(&input)?;
            match to {
                Target::Jsonl => emit_trace(&trace, &out, stdout)?,
                Target::Csv => emit(&out, stdout, |w| {
                    trace_io::write_csv(&trace, w).map_err(io::Error::other)
                })?,
            }
            Ok(EXIT_OK)
        }
        Command::ListEnvs => {
            for env in enumerate_environments() {
                writeln!(stdout, "{}", env.table_row()).map_err(io_failure)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn load(path: &Path) -> Result<Trace, Failure> {
    let name = path.display();
    let result = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .lock()
            .read_to_end(&mut buf)
            .map_err(|e| io_failure(format!("stdin: {e}")))?;
        trace_io::from_bytes(&buf)
    } else {
        let file = fs::File::open(path).map_err(|e| io_failure(format!("{name}: {e}")))?;
        trace_io::read_trace(BufReader::new(file))
    };
    result.map_err(|e| io_failure(format!("{name}: {e}")))
}

fn emit_trace(trace: &Trace, out: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    emit(out, stdout, |w| {
        trace_io::write_trace(trace, w).map(drop).map_err(io::Error::other)
    })
}

/// Writes to stdout for `-`, otherwise to a temporary file in the target
/// directory that replaces `out` only once writing succeeded.
fn emit(
    out: &Path,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    if out == Path::new("-") {
        return write(stdout).and_then(|_| stdout.flush()).map_err(io_failure);
    }
    let name = out.display();
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| io_failure(format!("{name}: {e}")))?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        write(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_failure(format!("{name}: {e}")))?;
    }
    tmp.persist(out)
        .map_err(|e| io_failure(format!("{name}: {}", e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("vmpt").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn list_envs() {
        let (code, out, _) = run_capture(&["list-envs"]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[0], "(0,0) Not Considered / Not Considered");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["generate", "--env", "4,0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["generate", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        let (code, _, err) = run_capture(&["fixture", "--id", "3,3"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"), "{err}");
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn fixture_to_stdout() {
        let (code, out, _) = run_capture(&["fixture", "--id", "(0,2)"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("{\"type\":\"header\""));
        assert_eq!(trace_io::from_bytes(out.as_bytes()).unwrap(), paper_fixture(FixtureId::Example2Env02));
    }

    #[test]
    fn unsatisfiable_config_is_usage_error() {
        let (code, _, err) = run_capture(&["generate", "--env", "1,0", "--horizon", "1", "--guarantee-dynamics"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("horizontal"), "{err}");
    }
}
