//! Command-line front end.
//!
//! Exit codes: 0 when every check passes (documented discrepancies
//! included), 1 on a mismatch or evaluation error, 2 on usage, file or
//! parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dsl;
use crate::genus2::{self, ExpectedValue, LookupError, Suite};
use crate::hodge::SignConvention;

/// Environment variable naming an alternative expected-values file.
pub const EXPECTED_ENV: &str = "EPOLY_EXPECTED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "epoly", version, about = "E-polynomials of stratified varieties, with a reproducible audit")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Default sign convention. A `convention` statement in a program takes
    /// precedence; the audit always uses the conventions stored with each
    /// expected value.
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a .sx program.
    Eval { file: PathBuf },
    /// Run the bundled genus-2 suites against the expected values.
    Audit {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Betti numbers of a suite value: an expected-value label (IE.SL), a
    /// qualified binding (gl:Mt) or an unambiguous binding name.
    Betti {
        name: String,
        #[arg(long)]
        dim: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Signed,
    Unsigned,
}

impl From<ConventionArg> for SignConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Signed => SignConvention::Signed,
            ConventionArg::Unsigned => SignConvention::Unsigned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Sl,
    Gl,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Sl => vec![Suite::Sl],
            SuiteArg::Gl => vec![Suite::Gl],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

fn expected_values() -> Result<Vec<ExpectedValue>, String> {
    match std::env::var_os(EXPECTED_ENV) {
        None => Ok(genus2::bundled_expected()),
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", PathBuf::from(&path).display()))?;
            genus2::load_expected(&text).map_err(|e| e.to_string())
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_OK
            } else {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            };
        }
    };
    let code = execute(&config, out, err);
    let _ = out.flush();
    code
}

fn execute(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let convention = config.convention.map(SignConvention::from);
    match &config.command {
        Command::Eval { file } => {
            let source = match std::fs::read_to_string(file) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot read {}: {e}", file.display());
                    return EXIT_USAGE;
                }
            };
            let mut program = match dsl::parse(&source) {
                Ok(p) => p,
                Err(e) => {
                    let _ = writeln!(err, "{}:{e}", file.display());
                    return EXIT_USAGE;
                }
            };
            if program.convention.is_none() {
                program.convention = convention;
            }
            let report = dsl::run(&program);
            let _ = match config.format {
                Format::Text => write!(out, "{}", report.render_text()),
                Format::Json => writeln!(out, "{}", report.to_json()),
            };
            if report.failures() == 0 {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Command::Audit { suite } => {
            let expected = match expected_values() {
                Ok(e) => e,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_USAGE;
                }
            };
            let report = genus2::audit_with(&expected, &suite.suites());
            let _ = match config.format {
                Format::Text => write!(out, "{}", report.render_text()),
                Format::Json => writeln!(out, "{}", report.to_json()),
            };
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Command::Betti { name, dim } => {
            let expected = match expected_values() {
                Ok(e) => e,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_USAGE;
                }
            };
            match genus2::betti_of(name, *dim, convention, &expected) {
                Ok(b) => {
                    let _ = match config.format {
                        Format::Text => {
                            let parts: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                            writeln!(out, "{}", parts.join(" "))
                        }
                        Format::Json => {
                            let nums: Vec<serde_json::Value> = b
                                .iter()
                                .map(|x| match u64::try_from(x) {
                                    Ok(n) => n.into(),
                                    Err(_) => x.to_string().into(),
                                })
                                .collect();
                            let v = serde_json::json!({ "name": name, "dim": dim, "betti": nums });
                            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializes"))
                        }
                    };
                    EXIT_OK
                }
                Err(e @ (LookupError::Unknown(_) | LookupError::Ambiguous(_))) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_USAGE
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_FAILED
                }
            }
        }
    }
}
