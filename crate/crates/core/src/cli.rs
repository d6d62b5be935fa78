//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::counting::{approx_count, CountError};
use crate::exact::{exact_knapsack_count, exact_path_count};
use crate::float::{floor_ratio, mantissa_length, ApproxFloat, Epsilon, FloatError, Problem};
use crate::generation::{GenerationError, Generator};
use crate::knapsack::{approx_count_knapsack, KnapsackError, KnapsackInstance};
use crate::paths::{approx_count_paths, DepthBudget, GraphError, PathError, WeightedMultiDag};
use crate::rng::stream;
use crate::table::{CountTable, Family, TableError};
use crate::verify::{run_suite, Suite, DEFAULT_BUDGET};

#[derive(Parser, Debug)]
#[command(name = "fpcount", version, about = "Approximate counting and sampling with truncated floating point")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Accuracy {
    /// Relative error in (0, 1]
    #[arg(long, default_value = "0.1", conflicts_with = "exact")]
    pub eps: Epsilon,
    /// Use exact big-integer arithmetic
    #[arg(long)]
    pub exact: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Dag,
    Essdag,
    Extdag,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Dag => Family::Dag,
            FamilyArg::Essdag => Family::EssDag,
            FamilyArg::Extdag => Family::ExtDag,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Edges,
    JsonLines,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Float,
    Tables,
    Knapsack,
    Paths,
    Sampling,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count the labeled graphs of a family on n vertices
    Count {
        family: FamilyArg,
        #[arg(value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[command(flatten)]
        accuracy: Accuracy,
    },
    /// Draw random graphs of a family on n vertices
    Sample {
        family: FamilyArg,
        #[arg(value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[command(flatten)]
        accuracy: Accuracy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, value_enum, default_value_t = Format::Edges)]
        format: Format,
    },
    /// Count knapsack solutions; file holds `n C` then the n weights
    Knapsack {
        file: PathBuf,
        #[command(flatten)]
        accuracy: Accuracy,
    },
    /// Count s,t-paths of weight at most C; file holds `n m s t C` then m lines `u v w`
    Pathcount {
        file: PathBuf,
        #[command(flatten)]
        accuracy: Accuracy,
        /// Size the mantissa from the analytic depth bound instead of the longest path
        #[arg(long)]
        analytic_depth: bool,
    },
    /// Run oracle-backed property suites
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Knapsack { path: PathBuf, source: KnapsackError },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Float(#[from] FloatError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => 2,
            _ => 1,
        }
    }
}

pub struct Outcome {
    pub stdout: String,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

/// `value`, `float`, `precision` and `interval` lines for an approximation
/// `Z` of an integer `F` with `(1 − ε)F ≤ Z ≤ F`.
pub fn render_approx(z: &ApproxFloat, eps: &Epsilon) -> String {
    let ratio = z.to_ratio();
    let lo = -floor_ratio(&-ratio.clone());
    let complement = eps.complement();
    let hi = if complement.is_zero() {
        "inf".to_string()
    } else {
        floor_ratio(&(&ratio / &complement)).to_string()
    };
    let mut out = String::new();
    let _ = writeln!(out, "value {}", z.to_decimal_string());
    let _ = writeln!(out, "float {}", z.to_hex_string());
    let _ = writeln!(out, "precision {}", z.precision());
    let _ = writeln!(out, "interval {lo} {hi}");
    out
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let stdout = match cli.command {
        Command::Count { family, n, accuracy } => {
            let family = Family::from(family);
            let n = n as usize;
            if accuracy.exact {
                let table = CountTable::exact(family, n)?;
                format!("{}\n", table.exact_total(n).expect("exact table"))
            } else {
                render_approx(&approx_count(family, n, &accuracy.eps)?.value, &accuracy.eps)
            }
        }
        Command::Sample {
            family,
            n,
            accuracy,
            seed,
            count,
            format,
        } => {
            let family = Family::from(family);
            let n = n as usize;
            let table = if accuracy.exact {
                CountTable::exact(family, n)?
            } else {
                let t = mantissa_length(Problem::DagGenerate, n as u64, &accuracy.eps)?;
                CountTable::approx(family, n, t)?
            };
            let generator = Generator::new(table);
            let graphs: Vec<String> = (0..count)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream(seed, j);
                    let s = generator.sample(n, &mut rng)?;
                    Ok(match format {
                        Format::Edges => s.dag.to_edge_list(),
                        Format::JsonLines => format!("{}\n", s.dag.to_json_line(&s.dag.sources())),
                    })
                })
                .collect::<Result<_, GenerationError>>()?;
            graphs.concat()
        }
        Command::Knapsack { file, accuracy } => {
            let inst = KnapsackInstance::parse(&read(&file)?).map_err(|source| CliError::Knapsack {
                path: file.clone(),
                source,
            })?;
            if accuracy.exact {
                format!("{}\n", exact_knapsack_count(&inst))
            } else {
                render_approx(&approx_count_knapsack(&inst, &accuracy.eps)?, &accuracy.eps)
            }
        }
        Command::Pathcount {
            file,
            accuracy,
            analytic_depth,
        } => {
            let (g, cap) = WeightedMultiDag::parse(&read(&file)?).map_err(|source| CliError::Graph {
                path: file.clone(),
                source,
            })?;
            if accuracy.exact {
                let count = exact_path_count(&g, &cap).map_err(PathError::from)?;
                format!("{count}\n")
            } else {
                let budget = if analytic_depth {
                    DepthBudget::Analytic
                } else {
                    DepthBudget::Actual
                };
                render_approx(&approx_count_paths(&g, &cap, &accuracy.eps, budget)?.value, &accuracy.eps)
            }
        }
        Command::Verify { suite, budget, seed } => {
            let suites: Vec<Suite> = match suite {
                SuiteArg::All => Suite::ALL.to_vec(),
                SuiteArg::Float => vec![Suite::Float],
                SuiteArg::Tables => vec![Suite::Tables],
                SuiteArg::Knapsack => vec![Suite::Knapsack],
                SuiteArg::Paths => vec![Suite::Paths],
                SuiteArg::Sampling => vec![Suite::Sampling],
            };
            let mut out = String::new();
            let mut ok = true;
            for s in suites {
                let report = run_suite(s, budget, seed);
                ok &= report.passed();
                for line in report.lines() {
                    let _ = writeln!(out, "{line}");
                }
            }
            if !ok {
                print!("{out}");
                return Err(CliError::Verification);
            }
            out
        }
    };
    Ok(Outcome { stdout })
}
