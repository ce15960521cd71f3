//! Command-line flags and the TOML file mirroring them.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "mvmedian", version, about = "Multivariate medians, median filters and their PDE limits")]
pub struct Cli {
    /// Worker threads [default: available cores]
    #[arg(long, global = true, env = "MVMEDIAN_THREADS")]
    pub threads: Option<usize>,

    /// TOML file with defaults for any flag; command-line flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Median of a point set read from CSV
    Median(MedianArgs),
    /// Iterated median filter of a PGM, PPM or PFM image
    Filter(FilterArgs),
    /// Explicit evolution of a limit PDE, or the curve flow of a density
    Pde(PdeArgs),
    /// Run a consistency or equivariance experiment
    Verify(VerifyArgs),
    /// Rasterise half-space depth of a point set
    Depth(DepthArgs),
}

/// Contents of a `--config` file: `threads` plus one table per subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub threads: Option<usize>,
    #[serde(default)]
    pub median: MedianArgs,
    #[serde(default)]
    pub filter: FilterArgs,
    #[serde(default)]
    pub pde: PdeArgs,
    #[serde(default)]
    pub verify: VerifyArgs,
    #[serde(default)]
    pub depth: DepthArgs,
}

/// Fills every unset field of `self` from `fallback`.
pub trait Merge {
    fn merge(self, fallback: Self) -> Self;
}

macro_rules! mergeable {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl Merge for $t {
            fn merge(self, fallback: Self) -> Self {
                Self { $($f: self.$f.or(fallback.$f)),* }
            }
        }
    };
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MedianArgs {
    /// Input CSV with header x[,y[,z]][,w]
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// rank, componentwise, l1, trl1, oja, oja23, halfspace, chs or medoid [default: l1]
    #[arg(long)]
    pub method: Option<String>,
    /// Use the weight column instead of unit weights [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub weighted: Option<bool>,
    /// Output JSON file [default: standard output]
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(MedianArgs { input, method, weighted, out });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FilterArgs {
    /// Input image (PGM, PPM or PFM)
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Output image; PFM if the name ends in .pfm, else PGM/PPM
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// rank, componentwise, l1, trl1, oja, oja23, halfspace, chs or medoid [default: rank]
    #[arg(long)]
    pub aggregator: Option<String>,
    /// disc or amoeba [default: disc]
    #[arg(long)]
    pub shape: Option<String>,
    /// Disc radius or amoeba reach in pixels [default: 1.5 for disc, 3 for amoeba]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Contrast weight of the amoeba metric [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of filter passes [default: 1]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// mirror, clamp or skip [default: mirror]
    #[arg(long)]
    pub boundary: Option<String>,
}
mergeable!(FilterArgs { input, out, aggregator, shape, radius, beta, iterations, boundary });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PdeArgs {
    /// mcm, selfsnakes, l1_22, oja_22, oja_33, oja_23, amoeba_oja_22 or chs_curve
    #[arg(long)]
    pub rhs: Option<String>,
    /// Input PFM: the image, or the density for chs_curve
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Time step [default: 0.9 of the stability bound; adaptive for chs_curve]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of steps [default: 10; 1000000 for chs_curve, which stops when the curve vanishes]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Contrast weight of selfsnakes and amoeba_oja_22 [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Write a snapshot every this many steps [default: only the first and last]
    #[arg(long)]
    pub every: Option<usize>,
    /// Slices stacked vertically in the input of oja_33 [default: 1]
    #[arg(long)]
    pub slices: Option<usize>,
    /// Density floor of chs_curve [default: 1e-3 of the maximal density]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Prefix of the output files
    #[arg(long)]
    pub out: Option<String>,
}
mergeable!(PdeArgs { rhs, input, dt, steps, beta, every, slices, epsilon, out });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Experiment name, or equivariance:<median>:<family>
    #[arg(long)]
    pub experiment: Option<String>,
    /// Comma-separated, strictly decreasing radii [default: per experiment]
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Samples per selector [default: 200000 unless the experiment says otherwise]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random seed [default: 20240917]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per radius, or equivariance trials [default: per experiment; 100 for equivariance]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Number of randomly warped jets [default: per experiment]
    #[arg(long)]
    pub jets: Option<usize>,
    /// Cap for doubling the sample count; 0 disables doubling [default: per experiment]
    #[arg(long)]
    pub max_samples: Option<usize>,
    /// Condition number bound of random affine maps [default: 100]
    #[arg(long)]
    pub cond_bound: Option<f64>,
    /// Report file; per-trial CSV goes next to it [default: report.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(VerifyArgs { experiment, radii, samples, seed, trials, jets, max_samples, cond_bound, out });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DepthArgs {
    /// Input CSV with header x,y[,w]
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Raster width and height [default: 256 256]
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    pub grid: Option<Vec<usize>>,
    /// Use the weight column instead of unit weights [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub weighted: Option<bool>,
    /// Output PFM
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(DepthArgs { input, grid, weighted, out });
