//! Flag parsing and the validated run configuration.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fou_core::constants::{rate_exponent, ModelParams, DEFAULT_EPSILON};
use fou_core::fgn::Discretization;
use fou_core::montecarlo::{MCConfig, StatisticMethod};

use crate::error::CliError;

pub const DEFAULT_DT: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "fou", version, about = "Fractional Ornstein-Uhlenbeck drift estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// One path per horizon on the grid nodes.
    Simulate(Flags),
    /// One drift estimate per horizon.
    Estimate(Flags),
    /// The three bound terms and their ingredients.
    Bounds(Flags),
    /// Measured quantities against their large-T limits.
    Asymptotics(Flags),
    /// Monte Carlo Kolmogorov distance to the standard normal.
    Kolmogorov(Flags),
    /// Log-log fit of the Kolmogorov distance against T.
    RateFit(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long, required_unless_present = "input", allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, required_unless_present = "input", allow_negative_numbers = true)]
    hurst: Option<f64>,
    /// Horizons; repeat the flag or give a comma list.
    #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    #[arg(long, conflicts_with = "n", allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Method::ChaosRatio)]
    method: Method,
    /// Kolmogorov CSV to fit instead of running the simulation (rate-fit only).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Estimate,
    Bounds,
    Asymptotics,
    Kolmogorov,
    RateFit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Bounds => "bounds",
            Command::Asymptotics => "asymptotics",
            Command::Kolmogorov => "kolmogorov",
            Command::RateFit => "rate-fit",
        }
    }

    fn runs_monte_carlo(self) -> bool {
        matches!(self, Command::Kolmogorov | Command::RateFit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    ChaosRatio,
    Pathwise,
}

impl From<Method> for StatisticMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::ChaosRatio => StatisticMethod::ChaosRatio,
            Method::Pathwise => StatisticMethod::Pathwise,
        }
    }
}

/// Everything a run needs, validated before any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` only for `rate-fit --input`.
    pub theta: Option<f64>,
    pub hurst: Option<f64>,
    pub discretization: Discretization<f64>,
    pub t_list: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub epsilon: f64,
    pub method: Method,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub input_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn params(&self, horizon: f64) -> Result<ModelParams<f64>, CliError> {
        match (self.theta, self.hurst) {
            (Some(theta), Some(hurst)) => Ok(ModelParams::new(theta, hurst, horizon)?),
            _ => Err(CliError::Usage("--theta and --hurst are required".into())),
        }
    }

    pub fn mc_config(&self) -> Result<MCConfig<f64>, CliError> {
        let params = self.params(1.0)?;
        Ok(MCConfig {
            theta: params.theta(),
            hurst: params.hurst(),
            t_list: self.t_list.clone(),
            discretization: self.discretization,
            replications: self.replications,
            master_seed: self.master_seed,
            method: self.method.into(),
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.input_path.is_some() {
            if self.command != Command::RateFit {
                return Err(CliError::Usage("--input is only accepted by rate-fit".into()));
            }
            if let Some(hurst) = self.hurst {
                rate_exponent(hurst, self.epsilon)?;
            }
            return Ok(());
        }
        let params = self.params(1.0)?;
        rate_exponent(params.hurst(), self.epsilon)?;
        if self.t_list.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Usage("--t must be strictly increasing".into()));
        }
        let log_scaled = params.hurst() == 0.75 && self.command != Command::Simulate;
        for &t in &self.t_list {
            params.with_horizon(t)?;
            self.discretization.grid(t)?;
            if log_scaled && !(t > 1.0) {
                return Err(CliError::Usage(format!("at hurst 0.75 every T must exceed 1, got {t}")));
            }
        }
        if self.command.runs_monte_carlo() {
            self.mc_config()?.validate()?;
        }
        Ok(())
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn show<T: fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let grid = match self.discretization {
            Discretization::Step(dt) => format!("dt={dt}"),
            Discretization::Cells(n) => format!("n={n}"),
        };
        let method = match self.method {
            Method::ChaosRatio => "chaos-ratio",
            Method::Pathwise => "pathwise",
        };
        let format = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        write!(
            f,
            "command={} theta={} hurst={} t=[{}] {} reps={} seed={} eps={} method={} format={} out={}",
            self.command.name(),
            show(&self.theta),
            show(&self.hurst),
            join(&self.t_list),
            grid,
            self.replications,
            self.master_seed,
            self.epsilon,
            method,
            format,
            self.output_path.as_ref().map_or("<stdout>".into(), |p| p.display().to_string()),
        )?;
        if let Some(input) = &self.input_path {
            write!(f, " input={}", input.display())?;
        }
        Ok(())
    }
}

/// Parses and validates `argv` (including the program name).
///
/// `Err(clap::Error)` carries help and version requests as well as usage errors.
pub fn parse_args<I, S>(argv: I) -> Result<Result<RunConfig, CliError>, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, flags) = match cli.command {
        Cmd::Simulate(f) => (Command::Simulate, f),
        Cmd::Estimate(f) => (Command::Estimate, f),
        Cmd::Bounds(f) => (Command::Bounds, f),
        Cmd::Asymptotics(f) => (Command::Asymptotics, f),
        Cmd::Kolmogorov(f) => (Command::Kolmogorov, f),
        Cmd::RateFit(f) => (Command::RateFit, f),
    };
    let discretization = match flags.n {
        Some(n) => Discretization::Cells(n),
        None => Discretization::Step(flags.dt.unwrap_or(DEFAULT_DT)),
    };
    let config = RunConfig {
        command,
        theta: flags.theta,
        hurst: flags.hurst,
        discretization,
        t_list: flags.t,
        replications: flags.reps,
        master_seed: flags.seed,
        epsilon: flags.eps,
        method: flags.method,
        output_path: flags.out,
        format: flags.format,
        input_path: flags.input,
    };
    Ok(config.validate().map(|_| config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        let argv = std::iter::once("fou").chain(args.iter().copied());
        parse_args(argv).expect("clap accepts")
    }

    #[test]
    fn kolmogorov_example_has_three_horizons() {
        let cfg = parse(&[
            "kolmogorov", "--theta", "1", "--hurst", "0.5", "--t", "50,100,200", "--reps", "5000", "--seed", "7",
        ])
        .unwrap();
        assert_eq!(cfg.command, Command::Kolmogorov);
        assert_eq!(cfg.t_list, vec![50.0, 100.0, 200.0]);
        assert_eq!(cfg.replications, 5000);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.discretization, Discretization::Step(DEFAULT_DT));
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn repeated_and_comma_horizons_combine() {
        let cfg = parse(&["bounds", "--theta", "1", "--hurst", "0.6", "--t", "10", "--t", "20,40"]).unwrap();
        assert_eq!(cfg.t_list, vec![10.0, 20.0, 40.0]);
    }

    #[test]
    fn defaults_are_resolved() {
        let cfg = parse(&["estimate", "--theta", "2", "--hurst", "0.7", "--t", "10"]).unwrap();
        assert_eq!(cfg.replications, 1000);
        assert_eq!(cfg.master_seed, 42);
        assert_eq!(cfg.epsilon, DEFAULT_EPSILON);
        assert_eq!(cfg.method, Method::ChaosRatio);
        assert!(cfg.output_path.is_none());
        let line = cfg.to_string();
        assert!(line.contains("dt=0.05") && line.contains("reps=1000") && line.contains("seed=42"));
    }

    #[test]
    fn cells_replace_the_step() {
        let cfg = parse(&["bounds", "--theta", "1", "--hurst", "0.7", "--t", "100", "--n", "2048"]).unwrap();
        assert_eq!(cfg.discretization, Discretization::Cells(2048));
    }

    #[test]
    fn hurst_out_of_range_names_the_interval() {
        let err = parse(&["bounds", "--theta", "1", "--hurst", "0.9", "--t", "10"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("hurst must be in [0.5, 0.75]"));
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for args in [
            &["bounds", "--theta", "-1", "--hurst", "0.5", "--t", "10"][..],
            &["bounds", "--theta", "1", "--hurst", "0.5", "--t", "20,10"],
            &["bounds", "--theta", "1", "--hurst", "0.5", "--t", "10", "--dt", "0"],
            &["kolmogorov", "--theta", "1", "--hurst", "0.5", "--t", "10", "--reps", "10"],
            &["asymptotics", "--theta", "1", "--hurst", "0.75", "--t", "1"],
            &["bounds", "--theta", "1", "--hurst", "0.5", "--eps", "0.5"],
            &["bounds", "--theta", "1", "--hurst", "0.5", "--input", "x.csv"],
        ] {
            let err = parse(args).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn clap_rejects_unknown_and_missing_flags() {
        for args in [
            &["fou", "bounds", "--theta", "1", "--hurst", "0.5", "--bogus"][..],
            &["fou", "bounds", "--theta", "1"],
            &["fou", "bounds", "--theta", "1", "--hurst", "0.5", "--dt", "0.1", "--n", "10"],
            &["fou"],
        ] {
            assert!(parse_args(args.iter().copied()).is_err(), "{args:?}");
        }
    }

    #[test]
    fn rate_fit_input_needs_no_model() {
        let cfg = parse(&["rate-fit", "--input", "ks.csv"]).unwrap();
        assert_eq!(cfg.theta, None);
        assert_eq!(cfg.input_path, Some(PathBuf::from("ks.csv")));
    }

    #[test]
    fn empty_horizon_list_is_valid() {
        let cfg = parse(&["kolmogorov", "--theta", "1", "--hurst", "0.5"]).unwrap();
        assert!(cfg.t_list.is_empty());
    }
}
