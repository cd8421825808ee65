//! Argument parsing and subcommand dispatch.
//!
//! Exit codes: 0 when everything passed, 1 when a bound check failed or a
//! computation broke down, 2 for bad input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covergap_core::cover::{CoverConfig, Starts};
use covergap_core::verify::{VerifyConfig, VerifyReport};
use covergap_core::{ChainSpec, Check, Error, HittingData};

use crate::canonical::{self, float, Csv};
use crate::engine::{self, AnalyzeReport, CoverReport};
use crate::spec_file::{family_from_parts, params_from_pairs, SpecSource};
use crate::InputError;

#[derive(Debug, Parser)]
#[command(name = "covergap", version, about = "Spectral, hitting, mixing and cover-time analysis of reversible Markov chains")]
pub struct Cli {
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral data, hitting times, mixing profile and cover bounds.
    Analyze {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_delimiter = ',', default_values_t = covergap_core::mixing::DEFAULT_EPS_GRID)]
        eps_grid: Vec<f64>,
        /// Include the eigenfunctions in the JSON report.
        #[arg(long)]
        eigenvectors: bool,
    },
    /// Monte Carlo cover times with bound checks.
    Cover {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        mc: McArgs,
        /// all, single, or a comma-separated list of states.
        #[arg(long, default_value = "all")]
        starts: String,
    },
    /// Cover-time sweep over torus widths.
    Sweep {
        /// Torus height.
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Every identity and inequality check, one row each.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Trials per start for the cover rows; 0 skips them.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = covergap_core::verify::default_eps_grid())]
        eps_grid: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Chain-spec JSON file.
    #[arg(long, conflicts_with_all = ["family", "params"], required_unless_present = "family")]
    pub spec: Option<PathBuf>,
    /// Family name, e.g. cycle, grid_torus, hypercube, complete, two_state.
    #[arg(long)]
    pub family: Option<String>,
    /// Family parameters as K=V.
    #[arg(long, num_args = 1.., requires = "family")]
    pub params: Vec<String>,
}

impl SpecArgs {
    pub fn source(&self) -> Result<SpecSource, InputError> {
        match (&self.spec, &self.family) {
            (Some(path), None) => SpecSource::read(path),
            (None, Some(name)) => Ok(SpecSource::Family(family_from_parts(
                name,
                params_from_pairs(&self.params)?,
                None,
            )?)),
            _ => Err(InputError("give exactly one of --spec or --family".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of --out, else the command's usual format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Trials per start.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl OutArgs {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or_else(|| match self.out.as_deref().and_then(Path::extension) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => default,
        })
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Failure::Input(InputError(format!("cannot write {}: {e}", p.display())))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::Input(InputError(format!("cannot write stdout: {e}"))))
            }
        }
    }
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    Input(InputError),
    Core(Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Core(e) => match e {
                Error::BadParams(_)
                | Error::NonStochastic(_)
                | Error::Disconnected(_)
                | Error::NotReversible { .. }
                | Error::NotTransitiveEvidence { .. }
                | Error::RegimeViolation(_)
                | Error::DisconnectedComplement { .. } => 2,
                _ => 1,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Input(e) => format!("input: {e}"),
            Failure::Core(e) => format!("{}: {e}", module_of(e)),
        }
    }
}

fn module_of(e: &Error) -> &'static str {
    match e {
        Error::BadParams(_) => "input",
        Error::NonStochastic(_)
        | Error::Disconnected(_)
        | Error::NotReversible { .. }
        | Error::NotTransitiveEvidence { .. } => "chain_core",
        Error::SingularSolve(_) => "linalg",
        Error::NoConvergence { .. } => "spectral",
        Error::HittingMismatch(_) => "hitting",
        Error::RegimeViolation(_) => "mixing",
        Error::RunawayTrial { .. } => "cover",
        Error::DisconnectedComplement { .. } | Error::NullConditioning { .. } => "tails",
        Error::BoundViolated { .. } => "check",
    }
}

/// Parses `all`, `single` or `0,3,5`.
pub fn parse_starts(s: &str) -> Result<Starts, InputError> {
    match s.trim() {
        "all" => Ok(Starts::All),
        "single" => Ok(Starts::Single),
        list => list
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(Starts::List)
            .map_err(|_| InputError(format!("--starts {s:?} is not all, single or a list of states"))),
    }
}

fn build(spec: &SpecArgs) -> Result<ChainSpec, Failure> {
    Ok(spec.source()?.build()?)
}

fn checks_csv(checks: &[Check]) -> String {
    let mut csv = Csv::new(&["id", "lhs", "rhs", "slack", "verdict", "note"]);
    for c in checks {
        let verdict = serde_json::to_value(c.verdict).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        csv.row(&[
            c.id.clone(),
            float(c.lhs),
            float(c.rhs),
            float(c.slack),
            verdict,
            c.note.replace([',', '\n'], ";"),
        ]);
    }
    csv.finish()
}

fn hitting_csv(hd: &HittingData) -> String {
    let n = hd.n();
    let mut header = vec!["state".to_owned(), "pi".to_owned(), "alpha_x".to_owned()];
    header.extend((0..n).map(|y| format!("ET_{y}")));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&refs);
    for x in 0..n {
        let mut row = vec![x.to_string(), float(hd.pi[x]), float(hd.alpha_x[x])];
        row.extend((0..n).map(|y| float(hd.et[(x, y)])));
        csv.row(&row);
    }
    csv.finish()
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    canonical::to_string(v).map_err(|e| Failure::Input(InputError(format!("serializing report: {e}"))))
}

fn summary(quiet: bool, line: impl FnOnce() -> String) {
    if !quiet {
        eprintln!("{}", line());
    }
}

fn verify_summary(r: &VerifyReport) -> String {
    let mut s = format!("{} passed, {} failed, {} skipped", r.passed, r.failed, r.skipped);
    for c in r.checks.iter().filter(|c| !c.passed()) {
        s.push_str(&format!("\nFAIL {} lhs={} rhs={} slack={} {}", c.id, float(c.lhs), float(c.rhs), float(c.slack), c.note));
    }
    s
}

/// Runs one parsed command and returns the exit status (0 or 1).
pub fn run(cli: &Cli) -> Result<u8, Failure> {
    let quiet = cli.quiet;
    match &cli.command {
        Command::Analyze {
            spec,
            out,
            eps_grid,
            eigenvectors,
        } => {
            let chain = build(spec)?;
            let (report, hd): (AnalyzeReport, HittingData) = engine::analyze(&chain, eps_grid, *eigenvectors)?;
            let text = match out.format(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => hitting_csv(&hd),
            };
            out.emit(&text)?;
            summary(quiet, || {
                format!(
                    "gap={} alpha={} H={}",
                    float(report.spectral.gap),
                    float(report.hitting.alpha_hitting),
                    float(report.hitting.h)
                )
            });
            Ok(0)
        }
        Command::Cover { spec, out, mc, starts } => {
            let chain = build(spec)?;
            let cfg = CoverConfig {
                trials: mc.trials,
                seed: mc.seed,
                starts: parse_starts(starts)?,
                ..CoverConfig::default()
            };
            let pool = engine::thread_pool()?;
            let report: CoverReport = engine::cover(&pool, &chain, &cfg)?;
            let text = match out.format(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["start", "mean", "stderr"]);
                    for (k, &x) in report.stats.starts.iter().enumerate() {
                        csv.row(&[x.to_string(), float(report.stats.per_start_mean[k]), float(report.stats.per_start_stderr[k])]);
                    }
                    csv.finish()
                }
            };
            out.emit(&text)?;
            summary(quiet, || {
                format!(
                    "tcov_hat={} stderr={} cv={} {}",
                    float(report.stats.tcov_hat),
                    float(report.stats.tcov_stderr),
                    float(report.stats.cv),
                    report.concentration.verdict
                )
            });
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Sweep { n, m_list, out, mc } => {
            let cfg = CoverConfig {
                trials: mc.trials,
                seed: mc.seed,
                ..CoverConfig::default()
            };
            let pool = engine::thread_pool()?;
            let report = engine::sweep(&pool, *n, m_list, &cfg)?;
            let text = match out.format(Format::Csv) {
                Format::Json => json(&report)?,
                Format::Csv => report.to_csv(),
            };
            out.emit(&text)?;
            summary(quiet, || {
                let mut s = String::new();
                for c in report.checks.iter().filter(|c| !c.passed()) {
                    s.push_str(&format!("FAIL {} {}\n", c.id, c.note));
                }
                s.push_str(&format!("{} widths", report.rows.len()));
                s
            });
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Verify {
            spec,
            out,
            trials,
            seed,
            eps_grid,
        } => {
            let chain = build(spec)?;
            let vcfg = VerifyConfig {
                eps_grid: eps_grid.clone(),
                ..VerifyConfig::default()
            };
            let ccfg = (*trials > 0).then(|| CoverConfig {
                trials: *trials,
                seed: *seed,
                ..CoverConfig::default()
            });
            let pool = engine::thread_pool()?;
            let report = engine::verify(&pool, &chain, &vcfg, ccfg.as_ref())?;
            let text = match out.format(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => checks_csv(&report.checks),
            };
            out.emit(&text)?;
            summary(quiet, || verify_summary(&report));
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

/// Process entry point.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("covergap: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_parse() {
        assert_eq!(parse_starts("all").unwrap(), Starts::All);
        assert_eq!(parse_starts("single").unwrap(), Starts::Single);
        assert_eq!(parse_starts("0, 4").unwrap(), Starts::List(vec![0, 4]));
        assert!(parse_starts("x").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["covergap", "sweep", "--n", "8", "--m-list", "1,2,4"]).unwrap();
        assert!(matches!(c.command, Command::Sweep { ref m_list, .. } if m_list == &[1, 2, 4]));
        assert!(Cli::try_parse_from(["covergap", "analyze"]).is_err());
        assert!(Cli::try_parse_from(["covergap", "analyze", "--spec", "a.json", "--family", "cycle"]).is_err());
    }
}
