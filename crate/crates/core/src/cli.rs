//! Command-line front end.
//!
//! Every command writes plot-ready data (CSV or JSON) to standard output or
//! to `--out`. Exit status is 0 on success, 1 on invalid input and 2 when an
//! internal check fails.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    self, compare, fmt_f64, infimum, phi_from_g, phi_hat_from_g, sample_points, samples_csv, sweep,
    CompareRow, InfimumResult, Method, Solution,
};
use crate::error::{Error, Result};
use crate::reduction::reduction_report;
use crate::symmetry::SymmetryGroup;
use crate::verify::{run_suite, VerifyConfig};

/// Optimal one-level density test functions for the classical compact groups.
#[derive(Debug, Parser)]
#[command(name = "onelevel", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Nystrom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Solution method.
    #[arg(long, value_enum, default_value = "closed")]
    pub method: MethodArg,
    /// Number of Nyström subintervals.
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output path (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the optimal g.
    Solve {
        #[arg(long)]
        group: SymmetryGroup,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Infimum of the one-level density functional.
    Infimum {
        #[arg(long)]
        group: SymmetryGroup,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Infimum against σ, with the naive-pair bound and a monotonicity verdict.
    Sweep {
        #[arg(long)]
        group: SymmetryGroup,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, allow_negative_numbers = true)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Samples of the optimal test function φ.
    Phi {
        #[arg(long)]
        group: SymmetryGroup,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        /// Number of sample points.
        #[arg(long, default_value_t = 401)]
        samples: usize,
        /// Half-width of the sampled interval.
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        range: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Samples of φ̂ = g ∗ ǧ (closed form only).
    Phihat {
        #[arg(long)]
        group: SymmetryGroup,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        range: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Interval systems, outside ODEs, dimension and breakpoint count (JSON).
    Reduce {
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        /// Group whose indicator coefficient drives the reduction.
        #[arg(long, default_value = "SO(even)")]
        group: SymmetryGroup,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Naive-pair bound versus the optimal infimum over a σ grid.
    Compare {
        /// Restrict to one group (default: SO(even), Sp, SO(odd)).
        #[arg(long)]
        group: Option<SymmetryGroup>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite; exit status 0 iff every check passes.
    Verify {
        /// Nyström subintervals used by the oracle checks.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(
            name,
            format!("must be a positive number, got {v}"),
        ))
    }
}

fn method_of(common: &Common) -> Result<Method> {
    match common.method {
        MethodArg::Closed => Ok(Method::ClosedForm),
        MethodArg::Nystrom if common.n >= 2 => Ok(Method::Nystrom(common.n)),
        MethodArg::Nystrom => Err(Error::invalid(
            "n",
            format!("must be at least 2, got {}", common.n),
        )),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))
}

fn samples_json(samples: &[(f64, f64)]) -> Result<String> {
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let vs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    to_json(&json!({ "x": xs, "value": vs }))
}

/// Renders the artifact for a parsed command; returns the text and whether
/// every certified check passed (only `verify` can report `false`).
pub fn render(command: &Command) -> Result<(String, bool, Option<PathBuf>)> {
    let text = match command {
        Command::Solve {
            group,
            sigma,
            common,
        } => {
            let sigma = positive("sigma", *sigma)?;
            let method = method_of(common)?;
            let out = match (analysis::solve(*group, sigma, method)?, common.format) {
                (Solution::Closed(g), Format::Json) => to_json(&g)?,
                (Solution::Closed(g), Format::Csv) => {
                    let mut s = String::from("x,g\n");
                    for x in sample_points(common.n + 1, sigma) {
                        s.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(g.eval(x))));
                    }
                    s
                }
                (Solution::Grid(g), Format::Csv) => g.to_csv(),
                (Solution::Grid(g), Format::Json) => to_json(&json!({
                    "group": group,
                    "sigma": sigma,
                    "n": g.grid().n(),
                    "x": g.grid().nodes(),
                    "g": g.values(),
                }))?,
            };
            return Ok((out, true, common.out.clone()));
        }
        Command::Infimum {
            group,
            sigma,
            common,
        } => {
            let r = infimum(*group, positive("sigma", *sigma)?, method_of(common)?)?;
            let out = match common.format {
                Format::Csv => format!("{}\n{}\n", InfimumResult::CSV_HEADER, r.csv_row()),
                Format::Json => to_json(&r)?,
            };
            return Ok((out, true, common.out.clone()));
        }
        Command::Sweep {
            group,
            from,
            to,
            step,
            common,
        } => {
            let s = sweep(*group, *from, *to, *step, method_of(common)?)?;
            let out = match common.format {
                Format::Csv => s.to_csv(),
                Format::Json => to_json(&s)?,
            };
            return Ok((out, true, common.out.clone()));
        }
        Command::Phi {
            group,
            sigma,
            samples,
            range,
            common,
        } => {
            let sigma = positive("sigma", *sigma)?;
            let xs = sample_grid(*samples, *range)?;
            let values = match analysis::solve(*group, sigma, method_of(common)?)? {
                Solution::Closed(g) => phi_from_g(&g, &xs)?,
                Solution::Grid(g) => phi_from_g(&g, &xs)?,
            };
            let out = match common.format {
                Format::Csv => samples_csv(&values),
                Format::Json => samples_json(&values)?,
            };
            return Ok((out, true, common.out.clone()));
        }
        Command::Phihat {
            group,
            sigma,
            samples,
            range,
            common,
        } => {
            let sigma = positive("sigma", *sigma)?;
            if common.method != MethodArg::Closed {
                return Err(Error::invalid(
                    "method",
                    "phihat is computed from the closed form only",
                ));
            }
            let ys = sample_grid(*samples, *range)?;
            let g = crate::closedform::closed_form_g(*group, sigma)?;
            let values = phi_hat_from_g(&g, &ys);
            let out = match common.format {
                Format::Csv => samples_csv(&values),
                Format::Json => samples_json(&values)?,
            };
            return Ok((out, true, common.out.clone()));
        }
        Command::Reduce { sigma, group, out } => {
            let r = reduction_report(positive("sigma", *sigma)?, *group)?;
            return Ok((to_json(&r)?, true, out.clone()));
        }
        Command::Compare {
            group,
            from,
            to,
            step,
            common,
        } => {
            let groups: Vec<SymmetryGroup> = match group {
                Some(g) => vec![*g],
                None => SymmetryGroup::NON_ORTHOGONAL.to_vec(),
            };
            let sigmas = analysis::sigma_grid(*from, *to, *step)?;
            let rows = compare(&groups, &sigmas, method_of(common)?)?;
            let out = match common.format {
                Format::Csv => {
                    let mut s = format!("{}\n", CompareRow::CSV_HEADER);
                    for r in &rows {
                        s.push_str(&r.csv_row());
                        s.push('\n');
                    }
                    s
                }
                Format::Json => to_json(&rows)?,
            };
            return Ok((out, true, common.out.clone()));
        }
        Command::Verify { n, seed, out } => {
            if *n < 8 {
                return Err(Error::invalid("n", format!("must be at least 8, got {n}")));
            }
            let report = run_suite(&VerifyConfig { n: *n, seed: *seed });
            (report.render(), report.all_passed(), out.clone())
        }
    };
    Ok(text)
}

fn sample_grid(samples: usize, range: f64) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    Ok(sample_points(samples, positive("range", range)?))
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match render(&cli.command) {
        Ok((text, passed, out)) => {
            let written = match out {
                Some(path) => fs::write(&path, text.as_bytes())
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| format!("cannot write output: {e}")),
            };
            match written {
                Err(msg) => {
                    eprintln!("error: {msg}");
                    1
                }
                Ok(()) if passed => 0,
                Ok(()) => 2,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

/// Parses `args` and runs; clap usage errors exit with 1, help/version with 0.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
