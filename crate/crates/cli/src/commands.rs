//! One function per subcommand, each producing a report table.

use std::path::Path;

use fou_core::bounds::{asymptotics_report, psi_terms};
use fou_core::constants::rate_exponent;
use fou_core::fgn::FgnSampler;
use fou_core::montecarlo::{self, rate_fit, MCReport, RateFit};
use fou_core::process::{estimate_pathwise, simulate_fou, ChaosRatio, EstimatorMethod, EstimatorResult};
use fou_core::rng::stream_seed;

use crate::args::{Command, Method, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const KOLMOGOROV_COLUMNS: [&str; 6] = ["T", "ks_distance", "sample_mean", "sample_var", "reps", "seed"];
pub const BOUNDS_COLUMNS: [&str; 12] = [
    "T", "psi1", "psi2", "psi3", "max_psi", "b_T", "norm_f2", "norm_f1f", "norm_f1g", "inner_fg", "norm_g2", "norm_g1g",
];
pub const ASYMPTOTICS_COLUMNS: [&str; 5] = ["T", "quantity", "measured", "paper_limit", "ratio"];
pub const SIMULATE_COLUMNS: [&str; 4] = ["T", "t", "x", "seed"];
pub const ESTIMATE_COLUMNS: [&str; 6] = ["T", "method", "theta_hat", "numerator", "denominator", "seed"];
pub const RATE_FIT_COLUMNS: [&str; 5] = ["beta_hat", "c_hat", "r_squared", "beta_theory", "horizons"];

pub fn execute(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::Estimate => estimate(cfg),
        Command::Bounds => bounds(cfg),
        Command::Asymptotics => asymptotics(cfg),
        Command::Kolmogorov => kolmogorov(cfg),
        Command::RateFit => fitted_rate(cfg),
    }
}

/// Each horizon gets its own noise stream derived from the master seed.
fn path_seed(cfg: &RunConfig, index: usize) -> u64 {
    stream_seed(cfg.master_seed, &[index as u64])
}

fn simulate(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&SIMULATE_COLUMNS);
    for (i, &t) in cfg.t_list.iter().enumerate() {
        let params = cfg.params(t)?;
        let grid = cfg.discretization.grid(t)?;
        let seed = path_seed(cfg, i);
        let noise = FgnSampler::new(&grid, params.hurst())?.sample(seed);
        let path = simulate_fou(&grid, &params, &noise)?;
        for (k, &x) in path.x.iter().enumerate() {
            table.push(vec![t.into(), grid.node(k).into(), x.into(), seed.into()]);
        }
    }
    Ok(table)
}

fn method_name(m: EstimatorMethod) -> &'static str {
    match m {
        EstimatorMethod::PathwiseIto => "pathwise-ito",
        EstimatorMethod::SkorohodOracle => "skorohod-oracle",
        EstimatorMethod::ChaosRatio => "chaos-ratio",
    }
}

fn estimate(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&ESTIMATE_COLUMNS);
    for (i, &t) in cfg.t_list.iter().enumerate() {
        let params = cfg.params(t)?;
        let grid = cfg.discretization.grid(t)?;
        let seed = path_seed(cfg, i);
        let noise = FgnSampler::new(&grid, params.hurst())?.sample(seed);
        let result: EstimatorResult<f64> = match cfg.method {
            Method::Pathwise => estimate_pathwise(&simulate_fou(&grid, &params, &noise)?)?,
            Method::ChaosRatio => ChaosRatio::new(&params, &grid)?.estimate(&noise)?,
        };
        table.push(vec![
            t.into(),
            method_name(result.method).into(),
            result.theta_hat.into(),
            result.numerator.into(),
            result.denominator.into(),
            seed.into(),
        ]);
    }
    Ok(table)
}

fn bounds(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&BOUNDS_COLUMNS);
    for &t in &cfg.t_list {
        let params = cfg.params(t)?;
        let grid = cfg.discretization.grid(t)?;
        let b = psi_terms(&params, &grid)?;
        let ing = b.ingredients;
        table.push(
            [
                t, b.psi1, b.psi2, b.psi3, b.max_psi, ing.b_t, ing.norm_f2, ing.norm_f1f, ing.norm_f1g, ing.inner_fg,
                ing.norm_g2, ing.norm_g1g,
            ]
            .into_iter()
            .map(Cell::from)
            .collect(),
        );
    }
    Ok(table)
}

fn asymptotics(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&ASYMPTOTICS_COLUMNS);
    if cfg.t_list.is_empty() {
        return Ok(table);
    }
    let params = cfg.params(cfg.t_list[0])?;
    for row in asymptotics_report(&params, &cfg.t_list, cfg.discretization)? {
        table.push(vec![
            row.horizon.into(),
            row.quantity.name().into(),
            row.measured.into(),
            row.paper_limit.into(),
            row.ratio.into(),
        ]);
    }
    Ok(table)
}

fn monte_carlo(cfg: &RunConfig) -> Result<MCReport<f64>, CliError> {
    if cfg.t_list.is_empty() {
        return Ok(MCReport {
            records: Vec::new(),
            fitted: None,
        });
    }
    Ok(montecarlo::run(&cfg.mc_config()?)?)
}

fn kolmogorov(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&KOLMOGOROV_COLUMNS);
    for rec in monte_carlo(cfg)?.records {
        table.push(vec![
            rec.horizon.into(),
            rec.ks_distance.into(),
            rec.sample_mean.into(),
            rec.sample_var.into(),
            rec.samples.len().into(),
            cfg.master_seed.into(),
        ]);
    }
    Ok(table)
}

/// `(T, ks_distance)` pairs from a kolmogorov CSV.
pub fn read_distances(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let name = path.display().to_string();
    let malformed = |message: String| CliError::Input {
        path: name.clone(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: name.clone(),
            source,
        },
        other => malformed(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let column = |key: &str| {
        headers
            .iter()
            .position(|h| h == key)
            .ok_or_else(|| malformed(format!("missing column {key}")))
    };
    let (it, ik) = (column("T")?, column("ks_distance")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let field = |i: usize| -> Result<f64, CliError> {
            let s = record.get(i).unwrap_or("");
            s.trim().parse().map_err(|_| malformed(format!("not a number: {s:?}")))
        };
        rows.push((field(it)?, field(ik)?));
    }
    Ok(rows)
}

fn fitted_rate(cfg: &RunConfig) -> Result<Table, CliError> {
    let rows: Vec<(f64, f64)> = match &cfg.input_path {
        Some(path) => read_distances(path)?,
        None => monte_carlo(cfg)?.records.iter().map(|r| (r.horizon, r.ks_distance)).collect(),
    };
    let RateFit {
        beta_hat,
        c_hat,
        r_squared,
    } = rate_fit(&rows)?;
    let beta_theory = match cfg.hurst {
        Some(h) => rate_exponent(h, cfg.epsilon)?.beta(),
        None => None,
    };
    let mut table = Table::new(&RATE_FIT_COLUMNS);
    table.push(vec![
        beta_hat.into(),
        c_hat.into(),
        r_squared.into(),
        beta_theory.into(),
        rows.len().into(),
    ]);
    Ok(table)
}
