//! Command line and config file schema.
//!
//! Every experiment's parameters are one struct used both as clap
//! arguments and as a TOML table, so the defaults printed by `--help` are
//! the defaults of the config file.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// Parses an empty command line into `T`, giving the clap defaults.
fn clap_defaults<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults"));
    let matches = cmd
        .try_get_matches_from(["defaults"])
        .expect("every argument has a default");
    T::from_arg_matches(&matches).expect("defaults parse")
}

macro_rules! clap_default {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                clap_defaults()
            }
        }
    )*};
}

clap_default!(
    SpectrumArgs,
    TracesArgs,
    PressureArgs,
    EnsembleArgs,
    CorrelateArgs,
    AverageArgs,
    ThresholdsArgs
);

#[derive(Parser, Debug)]
#[command(name = "twistlab", version, about = "Twisted transfer operators of toral Anosov maps")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs every parallel section sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Random seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues, singular values, traces and Fredholm coefficients of L_q.
    Spectrum(SpectrumArgs),
    /// Periodic-orbit trace sums, optionally against matrix traces.
    Traces(TracesArgs),
    /// Pressure of the unstable jacobian from periodic orbits.
    Pressure(PressureArgs),
    /// Ensemble mean of |trace sum|², closed form and Monte Carlo.
    Ensemble(EnsembleArgs),
    /// Correlation series and decay base, or the threshold sweep.
    Correlate(CorrelateArgs),
    /// Frequency-averaged trace sums against the diagonal bound.
    Average(AverageArgs),
    /// Rate thresholds λ^(-1/2) and λ^(-5/2).
    Thresholds(ThresholdsArgs),
    /// Runs the experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    /// cat, cat+shear:EPS, linear:a,b,c,d or a JSON file.
    #[arg(long, default_value = "cat")]
    pub map: String,
    /// Roof function: zero, one, test, mode:a1,a2, cos:a1,a2,amp, sin:a1,a2,amp, sums with +, or a JSON file.
    #[arg(long, default_value = "test")]
    pub tau: String,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub q: i64,
    /// Weight radius of the anisotropic space.
    #[arg(long, default_value_t = 0.02)]
    pub r: f64,
    /// Truncation box |α|∞ ≤ K.
    #[arg(long = "K", default_value_t = 16)]
    #[serde(rename = "K")]
    pub k: usize,
    /// Fixed FFT grid; the aliasing gate then fails instead of refining.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Smallest grid tried when --grid is absent.
    #[arg(long, default_value_t = 64)]
    pub min_grid: usize,
    /// Traces and Fredholm coefficients up to this order.
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
    /// Gate on |Tr T²| computed from eigenvalues against the matrix product.
    #[arg(long, default_value_t = 1e-8)]
    pub trace_tol: f64,
    /// Second truncation for the K-stability gate.
    #[arg(long = "K-check")]
    #[serde(rename = "K_check")]
    pub k_check: Option<usize>,
    /// Leading eigenvalues compared by the K-stability gate.
    #[arg(long, default_value_t = 5)]
    pub stability_count: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub stability_limit: f64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TracesArgs {
    #[arg(long, default_value = "cat")]
    pub map: String,
    #[arg(long, default_value = "zero")]
    pub tau: String,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub q: i64,
    /// Periods 1..=nmax.
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Also compute matrix traces on the box |α|∞ ≤ K.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    pub r: f64,
    #[arg(long, default_value_t = 64)]
    pub min_grid: usize,
    /// Gate on the gap between orbit sums and matrix traces.
    #[arg(long, default_value_t = 1e-6)]
    pub trace_tol: f64,
    /// Write the period-n points to orbits_n.csv.
    #[arg(long)]
    pub dump_orbits: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PressureArgs {
    #[arg(long, default_value = "cat")]
    pub map: String,
    /// Period of the orbit set.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 1.5, 2.0])]
    pub sigma: Vec<f64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleArgs {
    #[arg(long, default_value = "cat")]
    pub map: String,
    /// Laplace eigenvalue cutoff of the roof ensemble.
    #[arg(long = "N", default_value_t = 4.0 * PI * PI)]
    #[serde(rename = "N")]
    pub cutoff: f64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub q: i64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 20000)]
    pub samples: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateArgs {
    #[arg(long, default_value = "cat")]
    pub map: String,
    #[arg(long, default_value = "test")]
    pub tau: String,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub q: i64,
    #[arg(long, default_value = "mode:1,0")]
    pub f: String,
    #[arg(long, default_value = "mode:-1,0")]
    pub g: String,
    /// Correlations C(0..=N).
    #[arg(long = "N", default_value_t = 40)]
    #[serde(rename = "N")]
    pub n_max: usize,
    #[arg(long = "K", default_value_t = 16)]
    #[serde(rename = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 0.02)]
    pub r: f64,
    #[arg(long, default_value_t = 64)]
    pub min_grid: usize,
    /// Also integrate directly on this quadrature grid.
    #[arg(long)]
    pub direct_grid: Option<usize>,
    /// Run the ensemble sweep instead of a single series.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 4.0 * PI * PI)]
    pub sweep_cutoff: f64,
    #[arg(long, default_value_t = 100)]
    pub sweep_samples: usize,
    #[arg(long, default_value_t = 20)]
    pub sweep_q_max: i64,
    #[arg(long, default_value_t = 8)]
    pub sweep_k: usize,
    #[arg(long, default_value_t = 20)]
    pub sweep_n_max: usize,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct AverageArgs {
    #[arg(long, default_value = "cat")]
    pub map: String,
    #[arg(long, default_value = "test")]
    pub tau: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Averaging scale; frequencies |q| ≤ 2T enter.
    #[arg(long = "T", default_value_t = 8.0)]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 2001)]
    pub bump_nodes: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsArgs {
    #[arg(long, default_value = "cat")]
    pub map: String,
}

/// A resolved experiment.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum(SpectrumArgs),
    Traces(TracesArgs),
    Pressure(PressureArgs),
    Ensemble(EnsembleArgs),
    Correlate(CorrelateArgs),
    Average(AverageArgs),
    Thresholds(ThresholdsArgs),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum(_) => "spectrum",
            Experiment::Traces(_) => "traces",
            Experiment::Pressure(_) => "pressure",
            Experiment::Ensemble(_) => "ensemble",
            Experiment::Correlate(_) => "correlate",
            Experiment::Average(_) => "average",
            Experiment::Thresholds(_) => "thresholds",
        }
    }
}

/// Layout of a `run --config` file: optional `seed`, `out` and `threads`
/// at the top level and exactly one experiment table.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub spectrum: Option<SpectrumArgs>,
    pub traces: Option<TracesArgs>,
    pub pressure: Option<PressureArgs>,
    pub ensemble: Option<EnsembleArgs>,
    pub correlate: Option<CorrelateArgs>,
    pub average: Option<AverageArgs>,
    pub thresholds: Option<ThresholdsArgs>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn experiment(&self) -> Result<Experiment, String> {
        let mut found = Vec::new();
        if let Some(a) = &self.spectrum {
            found.push(Experiment::Spectrum(a.clone()));
        }
        if let Some(a) = &self.traces {
            found.push(Experiment::Traces(a.clone()));
        }
        if let Some(a) = &self.pressure {
            found.push(Experiment::Pressure(a.clone()));
        }
        if let Some(a) = &self.ensemble {
            found.push(Experiment::Ensemble(a.clone()));
        }
        if let Some(a) = &self.correlate {
            found.push(Experiment::Correlate(a.clone()));
        }
        if let Some(a) = &self.average {
            found.push(Experiment::Average(a.clone()));
        }
        if let Some(a) = &self.thresholds {
            found.push(Experiment::Thresholds(a.clone()));
        }
        match found.len() {
            1 => Ok(found.pop().unwrap()),
            0 => Err("config names no experiment; add one of [spectrum], [traces], [pressure], \
                      [ensemble], [correlate], [average], [thresholds]"
                .into()),
            _ => Err(format!(
                "config names {} experiments ({}); exactly one is allowed",
                found.len(),
                found.iter().map(Experiment::name).collect::<Vec<_>>().join(", ")
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn empty_table_gives_clap_defaults() {
        let c = ConfigFile::parse("[spectrum]\n").unwrap();
        assert_eq!(c.experiment().unwrap(), Experiment::Spectrum(SpectrumArgs::default()));
        assert_eq!(SpectrumArgs::default().k, 16);
        assert_eq!(EnsembleArgs::default().cutoff, 4.0 * PI * PI);
        assert_eq!(PressureArgs::default().sigma, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn config_keys() {
        let c = ConfigFile::parse("seed = 4\n[spectrum]\nK = 6\nq = -2\ntau = \"cos:1,1,0.3\"\n").unwrap();
        let Experiment::Spectrum(s) = c.experiment().unwrap() else {
            panic!()
        };
        assert_eq!((s.k, s.q, c.seed), (6, -2, Some(4)));
        let e = ConfigFile::parse("[spectrum]\nkay = 6\n").unwrap_err();
        assert!(e.contains("kay"), "{e}");
        let e = ConfigFile::parse("[spectrum]\nK = \"six\"\n").unwrap_err();
        assert!(e.contains("K"), "{e}");
        let e = ConfigFile::parse("sed = 1\n[traces]\n").unwrap_err();
        assert!(e.contains("sed"), "{e}");
    }

    #[test]
    fn exactly_one_experiment() {
        assert!(ConfigFile::parse("seed = 1\n").unwrap().experiment().is_err());
        let two = ConfigFile::parse("[traces]\n[pressure]\n").unwrap();
        assert!(two.experiment().unwrap_err().contains("traces, pressure"));
    }
}
