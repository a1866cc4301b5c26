use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipfree::{Float, Rational};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "lipfree",
    version,
    about = "Free-space norms, Lipschitz surgeries and diametral certificates"
)]
pub struct Cli {
    /// Numeric backend.
    #[arg(long, value_enum, default_value_t = Mode::Exact, global = true)]
    pub mode: Mode,
    /// Comparison tolerance in float mode.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tol: f64,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the metric axioms of a space file.
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
    /// Lipschitz norm of a function file.
    Lipnorm {
        #[arg(long)]
        function: PathBuf,
        /// Space for functions that reference theirs by hash.
        #[arg(long)]
        space: Option<PathBuf>,
    },
    /// Free-space norm of an element, with its dual witness and transport plan.
    Freenorm {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Free-space distance between two elements, or a CSV table over all molecule pairs.
    Dist {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, required_unless_present = "molecule_table")]
        a: Option<PathBuf>,
        #[arg(long, required_unless_present = "molecule_table")]
        b: Option<PathBuf>,
        /// Emit `||m_uv - m_pq||` next to its closed form for every pair of molecules.
        #[arg(long, conflicts_with_all = ["a", "b"])]
        molecule_table: bool,
    },
    /// McShane extension of a partial assignment.
    Extend {
        #[arg(long)]
        space: PathBuf,
        /// `{"values": {"label": "scalar", ...}}`.
        #[arg(long)]
        partial: PathBuf,
        /// Lipschitz constant; defaults to that of the partial data.
        #[arg(long)]
        lip: Option<String>,
        #[arg(long, value_enum, default_value_t = Side::Lower)]
        direction: Side,
    },
    /// Molecules in the slice `{f > 1 - alpha}`.
    Slice {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        alpha: String,
    },
    #[command(subcommand)]
    Construct(Construct),
    #[command(subcommand)]
    Certify(Certify),
    /// Per-eps classification of slice molecules as a CSV table.
    ScanDichotomy {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1/10,1/4,1/2")]
        eps: Vec<String>,
        #[arg(long, default_value = "4")]
        radius: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
pub enum Construct {
    /// Recursive norm-one function on annuli pairs.
    Daugavet(AnnuliSource),
    /// Hat functions on a generated space of separated pairs.
    DeltaHat {
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value = "1")]
        a: String,
        /// Extra points at distance `a` from everything.
        #[arg(long, default_value_t = 0)]
        extra: usize,
    },
    /// Distance to the nearest site; the base point is always a site.
    Nearest {
        #[arg(long)]
        space: PathBuf,
        /// Comma-separated point labels.
        #[arg(long, value_delimiter = ',', required = true)]
        sites: Vec<String>,
    },
}

/// Either the built-in nested annuli or a space with a pairs file.
#[derive(Args, Debug)]
pub struct AnnuliSource {
    #[arg(long, default_value_t = 4, conflicts_with_all = ["space", "pairs"])]
    pub stages: usize,
    #[arg(long, requires = "pairs")]
    pub space: Option<PathBuf>,
    /// `[{"u": label, "v": label, "set": [labels]}, ...]`.
    #[arg(long, requires = "space")]
    pub pairs: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Certify {
    /// Non-w*-Daugavet certificate on the truncated naturals.
    Example1 {
        #[arg(long = "N", default_value_t = 24)]
        big_n: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Certify this function instead of random samples.
        #[arg(long)]
        function: Option<PathBuf>,
    },
    /// Four-family space: plateau witnesses and per-pair LP maxima.
    Example2 {
        /// Family length; defaults to `n + 1`.
        #[arg(long = "N")]
        big_n: Option<usize>,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1/4,1/2")]
        alpha: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1/10,1/5,2/5")]
        eps: Vec<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Hat-function family on separated pairs.
    DeltaExist {
        #[arg(long, default_value_t = 16)]
        k: usize,
        /// Scale of the generated space.
        #[arg(long, default_value = "1", conflicts_with = "space")]
        a: String,
        /// Extract the pairs from this space instead.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, default_value = "1/8")]
        extract_tol: String,
    },
    /// Stage bounds of the recursive construction.
    DaugRec {
        #[command(flatten)]
        source: AnnuliSource,
        /// Random elements used to certify the hypothesis.
        #[arg(long, default_value_t = 4)]
        battery: usize,
    },
    /// Nearest-point function with two anchors per site.
    TwoAnchor {
        #[arg(long = "N", default_value_t = 8)]
        big_n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1/4,1/2")]
        delta: Vec<String>,
    },
    /// Separated-annuli hypothesis and conclusion on a test battery.
    Annuli {
        #[command(flatten)]
        source: AnnuliSource,
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value_t = 50)]
        battery: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.mode {
        Mode::Exact => commands::run::<Rational>(&cli),
        Mode::Float => {
            lipfree::scalar::set_float_tolerance(cli.tol);
            commands::run::<Float>(&cli)
        }
    };
    match result {
        Ok(out) => {
            if let Err(e) = commands::emit(&cli, &out.body) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            match out.failure {
                None => {
                    if let Some(s) = out.summary {
                        eprintln!("PASS {s}");
                    }
                    ExitCode::SUCCESS
                }
                Some(f) => {
                    eprintln!("FAIL {f}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
