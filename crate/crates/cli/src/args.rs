use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "mtquant", version, about = "Center-outward quantiles on spheres, tori and their products")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Manifold such as s2, t2 or s1xs2.
    #[arg(long, global = true)]
    pub manifold: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Iid,
    Equispaced,
    Fibered,
}

impl From<Mode> for mtquant::GridMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Iid => mtquant::GridMode::Iid,
            Mode::Equispaced => mtquant::GridMode::Equispaced,
            Mode::Fibered => mtquant::GridMode::Fibered,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Knn,
    Kernel,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    TrimmedGaussian,
    Box,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Draw a sample from a named design.
    Sample(SampleArgs),
    /// Fit empirical quantiles, ranks and signs.
    Fit(FitArgs),
    /// Conditional quantile contours at one or more covariate values.
    Regress(RegressArgs),
    /// Cap and strip fits on comet orbit angles.
    Comets(CometsArgs),
    /// Built-in diagnostics, reported as JSON.
    Check(CheckArgs),
    /// Tabulate the cap latitude profile s(tau).
    STau(STauArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    /// Design name (T1..T3, S1..S3, Ta..Tc, Sa..Sc) or "uniform".
    #[arg(long, default_value = "uniform")]
    pub preset: String,
    #[arg(short = 'n', long)]
    pub n: usize,
}

/// Grid factorization and center choice shared by fit-like commands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1)]
    pub n0: usize,
    #[arg(long)]
    pub nr: usize,
    #[arg(long)]
    pub ns: usize,
    /// cap, strip[:factor], polycap[:factor], pole:<coords>, equator:<factor>:<angle>.
    #[arg(long, default_value = "cap")]
    pub center: String,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Orders r to export; all orders when omitted.
    #[arg(long, value_delimiter = ',')]
    pub contours: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitArgs {
    /// Points file (CSV or JSON); otherwise a preset is sampled.
    #[arg(long, conflicts_with = "preset")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Sample size for a preset; defaults to n0 + nr * ns.
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RegressArgs {
    /// Regression design (TS1, SS1, TR1, ...).
    #[arg(long, conflicts_with = "data")]
    pub model: Option<String>,
    /// CSV with columns x0.. and the response coordinates.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Covariate space of a data file: a manifold string or e<d> for R^d.
    #[arg(long)]
    pub covariates: Option<String>,
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    /// Query point, comma separated; repeatable.
    #[arg(long = "query", allow_hyphen_values = true)]
    pub queries: Vec<String>,
    /// CSV of query points, one per row.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WeightKind::Knn)]
    pub weights: WeightKind,
    /// Neighbours for k-NN weights; defaults to the grid size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Kernel bandwidth.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, value_enum, default_value_t = KernelArg::TrimmedGaussian)]
    pub kernel: KernelArg,
    /// Worker threads for the query sweep; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CometsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding the longitude of the ascending node, in degrees.
    #[arg(long, default_value = "om")]
    pub om_col: String,
    /// Column holding the argument of perihelion, in degrees.
    #[arg(long, default_value = "w")]
    pub w_col: String,
    /// Column with the comet designation, if present.
    #[arg(long, default_value = "full_name")]
    pub name_col: String,
    /// Cap fit factorization n0,nR,nS.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 39, 100])]
    pub cap: Vec<usize>,
    /// Strip fit factorization n0,nR,nS.
    #[arg(long, value_delimiter = ',', default_values_t = [61, 40, 96])]
    pub strip: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 10, 18, 26, 34])]
    pub contours: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CheckArgs {
    /// Random instances per size for the brute-force comparison.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Add a deliberately suboptimal plan, which must fail the monotonicity check.
    #[arg(long)]
    pub inject_suboptimal: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct STauArgs {
    /// Sphere dimension.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Levels; an even sweep of --steps levels when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
}
