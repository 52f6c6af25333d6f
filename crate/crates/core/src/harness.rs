//! Seeded Monte-Carlo experiment runner.
//!
//! A sweep varies one scenario dimension (paths per link, elements per
//! surface, or surface count), runs the selected algorithms on the same
//! seeded channel realizations, and aggregates achievable rates and optimizer
//! wall times into CSV rows. Per-trial seeds are derived from the master seed
//! by index, so trials are order-independent and the output is identical
//! across thread counts.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DVector, RowDVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::sample_realization;
use crate::config::SystemConfig;
use crate::optim::{
    OptimizerParams, RunResult, hpb_ao, hpb_es, hpb_spp, pb_sca, random_phases,
};
use crate::phase::dirichlet_gain;
use crate::{C64, Error, Result};

/// log₂(1 + |h^H w|²/σ²) in bits/s/Hz.
pub fn achievable_rate(h_row: &RowDVector<C64>, w: &DVector<C64>, sigma2: f64) -> f64 {
    let received = (h_row * w)[(0, 0)].norm_sqr();
    (1.0 + received / sigma2).log2()
}

/// Rate reached by the matched beamformer: |h^H w|² = p·‖v^H H‖².
pub fn rate_from_objective(p: f64, objective: f64, sigma2: f64) -> f64 {
    (1.0 + p * objective / sigma2).log2()
}

/// Algorithm selector for trials and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    PbSca,
    HpbAo,
    HpbEs,
    HpbSpp,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::PbSca,
        Algorithm::HpbAo,
        Algorithm::HpbEs,
        Algorithm::HpbSpp,
        Algorithm::Random,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::PbSca => "pb-sca",
            Algorithm::HpbAo => "hpb-ao",
            Algorithm::HpbEs => "hpb-es",
            Algorithm::HpbSpp => "hpb-spp",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Which scenario dimension a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepVariable {
    /// Paths per link P.
    Paths,
    /// Reflecting elements per surface L² (values must be squares of even L).
    Elements,
    /// Surface count N.
    Ris,
}

impl SweepVariable {
    pub fn id(&self) -> &'static str {
        match self {
            SweepVariable::Paths => "paths",
            SweepVariable::Elements => "elements",
            SweepVariable::Ris => "ris",
        }
    }

    /// Applies one sweep value to a base configuration.
    pub fn apply(&self, base: &SystemConfig, value: usize) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            SweepVariable::Paths => cfg.paths = value,
            SweepVariable::Elements => {
                let l = (value as f64).sqrt().round() as usize;
                if l * l != value || l % 2 != 0 {
                    return Err(Error::InvalidConfig(format!(
                        "element count {value} is not the square of an even side"
                    )));
                }
                cfg.ura_side = l;
            }
            SweepVariable::Ris => cfg = cfg.with_num_ris(value),
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [SweepVariable::Paths, SweepVariable::Elements, SweepVariable::Ris]
            .into_iter()
            .find(|v| v.id() == s)
            .ok_or_else(|| Error::UnknownSweepVariable(s.to_string()))
    }
}

/// Per-trial options shared by all algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOptions {
    pub params: OptimizerParams,
    /// Inner draws averaged by the random-phase baseline.
    pub random_draws: usize,
    /// When false, wall times are reported as 0 so output is byte-stable.
    pub measure_time: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            params: OptimizerParams::default(),
            random_draws: 100,
            measure_time: true,
        }
    }
}

/// Samples one seeded realization and runs one algorithm on it.
///
/// The wall time covers the optimizer only (including any channel-matrix
/// assembly the algorithm needs), not the realization sampling.
pub fn run_trial(
    config: &SystemConfig,
    algorithm: Algorithm,
    seed: u64,
    opts: &TrialOptions,
) -> Result<RunResult> {
    config.validate()?;
    opts.params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let realization = sample_realization(config, &mut rng)?;
    let start = Instant::now();
    let mut result = match algorithm {
        Algorithm::PbSca => pb_sca(&realization, config)?,
        Algorithm::HpbAo => hpb_ao(&realization, config, &opts.params, &mut rng)?,
        Algorithm::HpbEs => hpb_es(&realization, config, opts.params.es_grid)?,
        Algorithm::HpbSpp => hpb_spp(&realization, config)?,
        Algorithm::Random => random_phases(&realization, config, &mut rng, opts.random_draws)?,
    };
    result.wall_time = if opts.measure_time {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(result)
}

/// A full sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep: SweepVariable,
    pub values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Channel realizations per sweep point.
    pub trials: usize,
    pub master_seed: u64,
    pub opts: TrialOptions,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one value and one algorithm".into(),
            ));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        Ok(())
    }

    /// Seed of trial `i`, mixed from the master seed by index.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.master_seed ^ trial as u64
    }
}

/// One aggregated output point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_var: SweepVariable,
    pub sweep_value: usize,
    pub algorithm: Algorithm,
    pub mean_rate: f64,
    pub std_rate: f64,
    pub mean_time: f64,
    pub n_realizations: usize,
}

fn aggregate(
    sweep: SweepVariable,
    value: usize,
    algorithm: Algorithm,
    results: &[RunResult],
) -> SweepRow {
    let n = results.len();
    let mean_rate = results.iter().map(|r| r.rate).sum::<f64>() / n as f64;
    let var = if n > 1 {
        results
            .iter()
            .map(|r| (r.rate - mean_rate).powi(2))
            .sum::<f64>()
            / (n - 1) as f64
    } else {
        0.0
    };
    let mean_time = results.iter().map(|r| r.wall_time).sum::<f64>() / n as f64;
    SweepRow {
        sweep_var: sweep,
        sweep_value: value,
        algorithm,
        mean_rate,
        std_rate: var.sqrt(),
        mean_time,
        n_realizations: n,
    }
}

/// Runs every (sweep value, algorithm, trial) combination and aggregates.
///
/// All algorithms at a sweep point see the same realizations (paired
/// comparison). Trials run in parallel when the `parallel` feature is on;
/// aggregation order is fixed by trial index either way. Errors abort the
/// sweep; no partial rows are returned.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut values = spec.values.clone();
    values.sort_unstable();
    values.dedup();
    let mut algorithms = spec.algorithms.clone();
    algorithms.sort_by_key(|a| a.id());
    algorithms.dedup();

    for &value in &values {
        let cfg = spec.sweep.apply(&spec.base, value)?;
        let trial_results: Vec<Vec<RunResult>> = run_trials(spec, &cfg, &algorithms)?;
        for (ai, algorithm) in algorithms.iter().enumerate() {
            let per_algo: Vec<RunResult> = trial_results
                .iter()
                .map(|trial| trial[ai].clone())
                .collect();
            rows.push(aggregate(spec.sweep, value, *algorithm, &per_algo));
        }
    }
    Ok(rows)
}

fn run_one(
    spec: &ExperimentSpec,
    cfg: &SystemConfig,
    algorithms: &[Algorithm],
    trial: usize,
) -> Result<Vec<RunResult>> {
    let seed = spec.trial_seed(trial);
    algorithms
        .iter()
        .map(|a| run_trial(cfg, *a, seed, &spec.opts))
        .collect()
}

#[cfg(feature = "parallel")]
fn run_trials(
    spec: &ExperimentSpec,
    cfg: &SystemConfig,
    algorithms: &[Algorithm],
) -> Result<Vec<Vec<RunResult>>> {
    use rayon::prelude::*;
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| run_one(spec, cfg, algorithms, trial))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_trials(
    spec: &ExperimentSpec,
    cfg: &SystemConfig,
    algorithms: &[Algorithm],
) -> Result<Vec<Vec<RunResult>>> {
    (0..spec.trials)
        .map(|trial| run_one(spec, cfg, algorithms, trial))
        .collect()
}

pub const CSV_HEADER: &str =
    "sweep_var,sweep_value,algorithm,mean_rate_bps_hz,std_rate,mean_time_s,n_realizations";

/// Serializes rows to CSV with 9 significant digits per float.
pub fn results_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.8e},{:.8e},{:.8e},{}\n",
            row.sweep_var,
            row.sweep_value,
            row.algorithm,
            row.mean_rate,
            row.std_rate,
            row.mean_time,
            row.n_realizations
        ));
    }
    out
}

/// Writes the CSV table, creating or truncating `path`.
pub fn write_results(rows: &[SweepRow], path: &std::path::Path) -> Result<()> {
    std::fs::write(path, results_to_csv(rows)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a CSV table produced by [`results_to_csv`].
pub fn parse_results(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "unexpected header {:?}",
                other.unwrap_or("")
            )));
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "line {}: expected 7 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let float = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}: {s:?}", idx + 2)))
        };
        let int = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}: {s:?}", idx + 2)))
        };
        rows.push(SweepRow {
            sweep_var: fields[0].parse()?,
            sweep_value: int(fields[1])?,
            algorithm: fields[2].parse()?,
            mean_rate: float(fields[3])?,
            std_rate: float(fields[4])?,
            mean_time: float(fields[5])?,
            n_realizations: int(fields[6])?,
        });
    }
    Ok(rows)
}

/// Plot-ready beam pattern table: the two-axis reflection gain over a square
/// grid of direction offsets in [−range, range]².
pub fn pattern_csv(l: usize, delta: f64, range: f64, points: usize) -> String {
    let mut out = String::from("s_x,s_y,gain\n");
    for i in 0..points {
        let sx = -range + 2.0 * range * i as f64 / (points - 1).max(1) as f64;
        let gx = dirichlet_gain(sx, l, delta);
        for j in 0..points {
            let sy = -range + 2.0 * range * j as f64 / (points - 1).max(1) as f64;
            let gain = gx * dirichlet_gain(sy, l, delta);
            out.push_str(&format!("{sx:.8e},{sy:.8e},{gain:.8e}\n"));
        }
    }
    out
}
