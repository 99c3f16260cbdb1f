//! Run configuration: command-line flags over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use kernel_stability::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

/// Every option, shared by all subcommands. Unset values fall back to the
/// config file, then to the documented default.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// TOML file with any of these options as keys (kebab-case)
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Inline matrix, rows separated by ';' (e.g. "2 1; 1 2")
    #[arg(long, global = true)]
    pub matrix: Option<String>,

    /// Trapezoid bandwidth in (0, 1/2); without it a matrix gives the
    /// piecewise-constant kernel
    #[arg(long, global = true)]
    pub epsilon: Option<String>,

    /// Kernel file (TOML)
    #[arg(long, global = true)]
    pub kernel_file: Option<PathBuf>,

    /// Number of counterexample blocks [default: 4]
    #[arg(long, global = true)]
    pub h_max: Option<u64>,

    /// Partial-sum horizon for the series [default: h-max]
    #[arg(long, global = true)]
    pub horizon: Option<u64>,

    /// Piece width of candidate inputs in the adversarial search [default: 1/2]
    #[arg(long, global = true)]
    pub resolution: Option<String>,

    /// Accepted flips per search restart [default: 10000]
    #[arg(long, global = true)]
    pub budget: Option<usize>,

    /// Search restarts [default: 1]
    #[arg(long, global = true)]
    pub restarts: Option<usize>,

    /// Seed for every randomized step [default: fixed]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output format [default: table]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for parallel steps [default: all cores]
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Input segments lo:hi:value, comma separated (e.g. "0:2:1,2:4:-1")
    #[arg(long, global = true)]
    pub input: Option<String>,

    /// Input CSV with header x,value
    #[arg(long, global = true)]
    pub input_file: Option<PathBuf>,

    /// Output grid step [default: 1/8]
    #[arg(long, global = true)]
    pub grid_step: Option<String>,

    /// Force quadrature in the operator command
    #[arg(long, global = true)]
    pub quadrature: bool,

    /// Run the adversarial search instead of applying one input
    #[arg(long, global = true)]
    pub search: bool,

    /// Negate the kernel (verification demo)
    #[arg(long, global = true)]
    pub negate: bool,

    /// Eigenvalue tolerance [default: 1e-8]
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Random pairs for the symmetry/continuity probe [default: 1000]
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Probe step [default: 1e-6]
    #[arg(long, global = true)]
    pub delta: Option<f64>,

    /// Random Gram points [default: 20]
    #[arg(long, global = true)]
    pub count: Option<usize>,

    /// Explicit Gram points, comma separated
    #[arg(long, global = true)]
    pub points: Option<String>,

    /// Also write the counterexample spec (JSON) here
    #[arg(long, global = true)]
    pub spec_out: Option<PathBuf>,
}

macro_rules! prefer {
    ($a:ident, $b:ident; $($f:ident),*) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f; } )*
    };
}

impl Options {
    /// Flags win; the file fills what they leave unset. Boolean switches
    /// are on if either turns them on.
    pub fn resolve(mut self) -> Result<Self, Error> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = load(&path)?;
        prefer!(self, file; matrix, epsilon, kernel_file, h_max, horizon, resolution, budget,
            restarts, seed, format, output, workers, input, input_file, grid_step, tol,
            samples, delta, count, points, spec_out);
        self.quadrature |= file.quadrature;
        self.search |= file.search;
        self.negate |= file.negate;
        Ok(self)
    }
}

fn load(path: &Path) -> Result<Options, Error> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| {
            let before = &text[..s.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            (line, col)
        });
        Error::Parse {
            line,
            column,
            message: format!("{}: {}", path.display(), e.message()),
        }
    })
}
