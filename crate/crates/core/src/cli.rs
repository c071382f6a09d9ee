//! Command-line interface. [`run`] takes the argument list and output
//! streams so that it can be driven from tests.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dataio;
use crate::enterprise;
use crate::error::{Error, Result};
use crate::estimator::{self, FitConfig, FitResult};
use crate::model::{ParamDomain, StudyWindow};
use crate::oracle;
use crate::simulator::{self, SimConfig};

/// Exit code for a mismatch against reference values or a failed check.
pub const EXIT_MISMATCH: i32 = 1;
/// Exit code for bad input, bad flags or a failed fit.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "trunclife",
    version,
    about = "Exponential lifespan estimation under double truncation and censoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the rate to a record CSV (`y,l,r[,weight]`).
    Estimate {
        /// Record file, or `-` for standard input.
        #[arg(long)]
        input: PathBuf,
        /// Study length.
        #[arg(long)]
        s: f64,
        /// Cohort span, longer than the study.
        #[arg(long = "G")]
        g: f64,
        /// Lower end of the rate domain; the upper end is its reciprocal.
        #[arg(long, default_value_t = ParamDomain::DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Refit the bundled enterprise table and compare with the published rows.
    ReproduceEnterprise {
        /// Cohort spans, comma separated.
        #[arg(long = "G", value_delimiter = ',', default_values_t = enterprise::default_spans())]
        g: Vec<f64>,
        #[arg(long, default_value_t = enterprise::STUDY_YEARS)]
        s: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Draw one observed sample and write it as CSV.
    Simulate {
        #[arg(long)]
        theta0: f64,
        #[arg(long)]
        s: f64,
        #[arg(long = "G")]
        g: f64,
        /// Latent population size.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Repeated simulate-and-fit study.
    McStudy {
        #[arg(long)]
        theta0: f64,
        #[arg(long)]
        s: f64,
        #[arg(long = "G")]
        g: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        reps: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the standardized estimates, one per line, to this file.
        #[arg(long)]
        standardized: Option<PathBuf>,
    },
    /// Run the numerical self-checks.
    Verify {
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
    /// Expand an annual count table (JSON) into a weighted record CSV.
    ExpandTable {
        /// Table file; the bundled enterprise table when absent.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = enterprise::STUDY_YEARS)]
        s: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Parse `args` (program name first) and execute. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "error: {first}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Estimate {
            input,
            s,
            g,
            eps,
            tol,
            level,
            format,
        } => {
            let w = StudyWindow::new(s, g)?;
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "tolerance must be positive, got {tol}"
                )));
            }
            let cfg = FitConfig {
                domain: ParamDomain::new(eps)?,
                tol,
                level,
            };
            let records = if input.as_os_str() == "-" {
                let mut text = Vec::new();
                io::stdin().lock().read_to_end(&mut text)?;
                dataio::parse_records(text.as_slice())?
            } else {
                dataio::read_records(&input)?
            };
            let stats = estimator::summarize(&records, &w)?;
            let fit = estimator::fit_mle(&stats, &w, &cfg)?;
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&fit)?)?,
                Format::Text => write_fit_text(out, &fit, &w)?,
            }
            Ok(0)
        }
        Command::ReproduceEnterprise { g, s, format } => {
            if s != enterprise::STUDY_YEARS {
                return Err(Error::InvalidConfig(format!(
                    "the enterprise table covers a study of {} years, got --s {s}",
                    enterprise::STUDY_YEARS
                )));
            }
            let rows = enterprise::reproduce(&g, &FitConfig::default())?;
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
                Format::Text => {
                    writeln!(
                        out,
                        "{:>6} {:>10} {:>10} {:>8} {:>12} {:>6}",
                        "G", "theta_hat", "life_exp", "alpha", "se(1e-4)", "match"
                    )?;
                    for r in &rows {
                        let verdict = match r.verdicts {
                            None => "n/a",
                            Some(v) if v.all() => "yes",
                            Some(_) => "NO",
                        };
                        writeln!(
                            out,
                            "{:>6} {:>10.4} {:>10.2} {:>8.3} {:>12.3} {:>6}",
                            r.g,
                            r.fit.theta_hat,
                            r.fit.life_expectancy,
                            r.fit.alpha_hat,
                            r.fit.se * 1e4,
                            verdict
                        )?;
                    }
                }
            }
            Ok(if rows.iter().all(|r| r.passed()) {
                0
            } else {
                EXIT_MISMATCH
            })
        }
        Command::Simulate {
            theta0,
            s,
            g,
            n,
            seed,
            output,
        } => {
            let cfg = SimConfig::new(theta0, StudyWindow::new(s, g)?, n, seed)?;
            let sample = simulator::simulate_sample(&cfg)?;
            match output {
                Some(path) => {
                    dataio::write_records(&sample.records, BufWriter::new(create(&path)?))?
                }
                None => dataio::write_records(&sample.records, &mut *out)?,
            }
            Ok(0)
        }
        Command::McStudy {
            theta0,
            s,
            g,
            n,
            seed,
            reps,
            level,
            format,
            standardized,
        } => {
            let cfg = SimConfig::new(theta0, StudyWindow::new(s, g)?, n, seed)?;
            let report = simulator::mc_study(&cfg, reps, level)?;
            if let Some(path) = standardized {
                let mut f = BufWriter::new(create(&path)?);
                for z in &report.standardized {
                    writeln!(f, "{z}")?;
                }
                f.flush()?;
            }
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
                Format::Text => {
                    writeln!(out, "replications  {}", report.replications)?;
                    writeln!(out, "failures      {}", report.failures)?;
                    writeln!(out, "mean_theta    {}", report.mean_theta)?;
                    writeln!(out, "sd_theta      {}", report.sd_theta)?;
                    writeln!(out, "mean_se       {}", report.mean_se)?;
                    writeln!(out, "coverage      {}", report.coverage)?;
                    writeln!(out, "mean_observed {}", report.mean_observed)?;
                }
            }
            Ok(0)
        }
        Command::Verify { seed } => {
            let report = oracle::run_registry(seed)?;
            write!(out, "{report}")?;
            let failed = report.failures().count();
            writeln!(out, "{} checks, {} failed", report.checks.len(), failed)?;
            Ok(if failed == 0 { 0 } else { EXIT_MISMATCH })
        }
        Command::ExpandTable { table, s, output } => {
            let t = match table {
                Some(path) => dataio::AnnualCountsTable::read(&path)?,
                None => dataio::enterprise_table()?,
            };
            let w = StudyWindow::new(s, s + 1.0)?;
            let records = dataio::expand_annual_counts(&t, &w)?;
            match output {
                Some(path) => dataio::write_records(&records, BufWriter::new(create(&path)?))?,
                None => dataio::write_records(&records, &mut *out)?,
            }
            Ok(0)
        }
    }
}

fn create(path: &std::path::Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })
}

fn write_fit_text(out: &mut dyn Write, fit: &FitResult, w: &StudyWindow) -> Result<()> {
    writeln!(out, "s               {}", w.s())?;
    writeln!(out, "G               {}", w.g())?;
    writeln!(out, "m               {}", fit.m)?;
    writeln!(out, "theta_hat       {}", fit.theta_hat)?;
    writeln!(out, "se              {}", fit.se)?;
    writeln!(out, "ci_low          {}", fit.ci_low)?;
    writeln!(out, "ci_high         {}", fit.ci_high)?;
    writeln!(out, "level           {}", fit.level)?;
    writeln!(out, "life_expectancy {}", fit.life_expectancy)?;
    writeln!(out, "alpha_hat       {}", fit.alpha_hat)?;
    writeln!(out, "n_hat           {}", fit.n_hat)?;
    writeln!(out, "objective       {}", fit.objective_at_max)?;
    writeln!(out, "converged       {}", fit.converged)?;
    writeln!(out, "at_boundary     {}", fit.at_boundary)?;
    Ok(())
}
