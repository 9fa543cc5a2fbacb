use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "elliptic-dm", version, about = "Partition functions of the elliptic supersymmetric face model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the lattice partition function W.
    EvalW {
        #[command(flatten)]
        run: PointArgs,
        #[arg(long, value_enum, default_value_t = Method::Dp)]
        method: Method,
    },
    /// Evaluate the closed form G (and its Schur-type part E).
    EvalG {
        #[command(flatten)]
        run: PointArgs,
        #[arg(long, value_enum, default_value_t = Form::Det)]
        form: Form,
    },
    /// Compare W against G at one parameter point.
    Compare {
        #[command(flatten)]
        run: PointArgs,
    },
    /// Run every check over all specs up to the bounds.
    Suite {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Compare lattice and closed form over all specs up to the bounds.
    Sweep {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Check the Yang-Baxter relation on random hexagons.
    Ybr {
        #[command(flatten)]
        context: ContextArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random hexagons.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dp,
    Bruteforce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Det,
    Perm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    #[arg(long, default_value_t = 0.3)]
    pub q: f64,
    #[arg(long = "lambda-re", default_value_t = 1.0)]
    pub lambda_re: f64,
    #[arg(long = "lambda-im", default_value_t = 0.0)]
    pub lambda_im: f64,
    #[arg(long = "trunc-eps", default_value_t = 1e-16)]
    pub trunc_eps: f64,
    /// Multiplier applied to every tolerance.
    #[arg(long = "tol-scale", default_value_t = 1.0)]
    pub tol_scale: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub context: ContextArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
    /// Bottom boundary positions, comma-separated and strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<usize>,
    #[arg(long = "a12-re", allow_hyphen_values = true)]
    pub a12_re: Option<f64>,
    #[arg(long = "a12-im", allow_hyphen_values = true)]
    pub a12_im: Option<f64>,
    /// Spectral parameters as `re:im` items, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Inhomogeneities as `re:im` items, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Read parameters from a JSON file written by `--dump-params`.
    #[arg(long = "params-file", conflicts_with_all = ["u", "v", "a12_re", "a12_im"])]
    pub params_file: Option<PathBuf>,
    /// Write the parameters used to this JSON file.
    #[arg(long = "dump-params")]
    pub dump_params: Option<PathBuf>,
    /// Seed for sampling generic parameters when none are given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub context: ContextArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long = "Mmax")]
    pub m_max: usize,
    #[arg(long = "Nmax")]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
