//! Replicated selector comparisons on simulated trajectories.
//!
//! Each `(system, n, replication)` task draws its own trajectory from a seed
//! derived from the master seed, so tasks run in any order (and in parallel)
//! without changing the report. Within a task every selector works on the
//! same sample and the same bandwidth grid, which makes the baseline's AME a
//! lower bound for every other selector's.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{ame_values, AME_POINTS};
use crate::bandwidth::{select_bandwidth, select_oracle, BandwidthGrid, ScoreConfig, SelectorId, DEFAULT_GRID_COUNT};
use crate::density::Density;
use crate::dynsys::{MapSystem, SystemKind, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::estimator::{DensityEstimate, PreparedSample};
use crate::io::{format_float, write_table};
use crate::kernels::{KernelKind, NormalizedKernel};
use crate::quadrature::UniformGrid;

fn default_systems() -> Vec<SystemKind> {
    vec![SystemKind::Logistic, SystemKind::Gauss]
}

fn default_sizes() -> Vec<usize> {
    vec![500, 1000, 5000, 10_000]
}

fn default_replications() -> usize {
    20
}

fn default_sigma() -> f64 {
    0.01
}

fn default_selectors() -> Vec<SelectorId> {
    SelectorId::ALL.to_vec()
}

fn default_ame_m() -> usize {
    AME_POINTS
}

fn default_grid_count() -> usize {
    DEFAULT_GRID_COUNT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_systems")]
    pub systems: Vec<SystemKind>,
    #[serde(default = "default_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_selectors")]
    pub selectors: Vec<SelectorId>,
    #[serde(default)]
    pub master_seed: u64,
    /// Points of the AME grid.
    #[serde(default = "default_ame_m")]
    pub ame_m: usize,
    /// Candidate bandwidths per replication.
    #[serde(default = "default_grid_count")]
    pub grid_count: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            systems: default_systems(),
            sample_sizes: default_sizes(),
            replications: default_replications(),
            sigma: default_sigma(),
            selectors: default_selectors(),
            master_seed: 0,
            ame_m: default_ame_m(),
            grid_count: default_grid_count(),
        }
    }
}

fn list<T: FromStr<Err = Error>>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: Error| Error::Config(format!("{key}: {e}"))))
        .collect()
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a valid number")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Lists are
    /// comma-separated. Unset keys keep their defaults.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "systems" => cfg.systems = list(key, value)?,
                "sample_sizes" => {
                    cfg.sample_sizes = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| number(key, s))
                        .collect::<Result<_>>()?
                }
                "replications" => cfg.replications = number(key, value)?,
                "sigma" => cfg.sigma = number(key, value)?,
                "selectors" => cfg.selectors = list(key, value)?,
                "master_seed" => cfg.master_seed = number(key, value)?,
                "ame_m" => cfg.ame_m = number(key, value)?,
                "grid_count" => cfg.grid_count = number(key, value)?,
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads JSON if the file starts with `{`, key/value text otherwise.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_key_values(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.systems.is_empty() {
            return fail("no systems selected".into());
        }
        if let Some(s) = self.systems.iter().find(|s| **s == SystemKind::Beta) {
            return fail(format!("experiments cover logistic and gauss only, not {s}"));
        }
        if self.sample_sizes.is_empty() {
            return fail("no sample sizes".into());
        }
        if let Some(n) = self.sample_sizes.iter().find(|n| **n < 4) {
            return fail(format!("sample size {n} is below the minimum of 4"));
        }
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if self.selectors.is_empty() {
            return fail("no selectors".into());
        }
        if self.ame_m == 0 {
            return fail("ame_m must be positive".into());
        }
        if self.grid_count < 2 {
            return fail("grid_count must be at least 2".into());
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `master ⊕ hash(system, n, replication)`.
pub fn replication_seed(master: u64, system: SystemKind, n: usize, replication: usize) -> u64 {
    let tag = match system {
        SystemKind::Logistic => 1,
        SystemKind::Gauss => 2,
        SystemKind::Beta => 3,
    };
    master ^ splitmix64(splitmix64(splitmix64(tag) ^ n as u64) ^ replication as u64)
}

/// Outcome of one selector on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorOutcome {
    pub selector: SelectorId,
    pub h_star: f64,
    pub ame: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub system: SystemKind,
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_degenerate: bool,
    pub outcomes: Vec<SelectorOutcome>,
}

/// Runs every selector of `cfg` on one simulated trajectory.
pub fn run_replication(cfg: &ExperimentConfig, system: SystemKind, n: usize, replication: usize) -> Result<ReplicationResult> {
    let seed = replication_seed(cfg.master_seed, system, n, replication);
    let with_seed = |e: Error| match e {
        Error::DegenerateOrbit(msg) => Error::DegenerateOrbit(format!("{msg}; {system} n={n} replication {replication}")),
        other => other,
    };
    let sys = MapSystem::from_kind(system, crate::dynsys::GOLDEN_RATIO)?;
    let sample = sys
        .generate_trajectory(&TrajectoryConfig::new(n, cfg.sigma, seed))
        .map_err(with_seed)?;
    let data = PreparedSample::new(&sample)?;
    let kernel = NormalizedKernel::univariate(KernelKind::Gaussian);
    let grid = BandwidthGrid::for_sample(&data, &kernel, cfg.grid_count)?;
    let metric = UniformGrid::unit(cfg.ame_m)?;
    let truth = sys.density_on_grid(&metric);
    let score_cfg = ScoreConfig::default();

    let mut outcomes = Vec::with_capacity(cfg.selectors.len());
    for &selector in &cfg.selectors {
        let h_star = if selector.is_oracle() {
            select_oracle(&data, &kernel, &grid, &sys, &metric)?.h_star
        } else {
            select_bandwidth(selector, &data, &kernel, &grid, &score_cfg)?.h_star
        };
        let est = DensityEstimate::from_prepared(data.clone(), kernel, h_star)?;
        let ame = ame_values(&est.density_on_grid(&metric), &truth);
        outcomes.push(SelectorOutcome { selector, h_star, ame });
    }
    Ok(ReplicationResult {
        system,
        n,
        replication,
        seed,
        grid_lo: grid.h_lo,
        grid_hi: grid.h_hi,
        grid_degenerate: grid.degenerate,
        outcomes,
    })
}

/// Aggregate of one `(system, n, selector)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub system: SystemKind,
    pub n: usize,
    pub selector: SelectorId,
    pub mean_ame: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for one replication.
    pub std_ame: f64,
    pub ames: Vec<f64>,
    pub h_stars: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs all replications (in parallel) and aggregates them in
/// `(system, n, selector)` order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let tasks: Vec<(SystemKind, usize, usize)> = cfg
        .systems
        .iter()
        .flat_map(|&s| {
            cfg.sample_sizes
                .iter()
                .flat_map(move |&n| (0..cfg.replications).map(move |r| (s, n, r)))
        })
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(s, n, r)| run_replication(cfg, s, n, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(cfg, &results))
}

fn assemble(cfg: &ExperimentConfig, results: &[ReplicationResult]) -> ExperimentReport {
    let mut rows = Vec::new();
    for chunk in results.chunks(cfg.replications) {
        let first = &chunk[0];
        for (k, &selector) in cfg.selectors.iter().enumerate() {
            let ames: Vec<f64> = chunk.iter().map(|r| r.outcomes[k].ame).collect();
            let (mean_ame, std_ame) = mean_std(&ames);
            rows.push(ReportRow {
                system: first.system,
                n: first.n,
                selector,
                mean_ame,
                std_ame,
                ames,
                h_stars: chunk.iter().map(|r| r.outcomes[k].h_star).collect(),
                seeds: chunk.iter().map(|r| r.seed).collect(),
            });
        }
    }
    ExperimentReport { config: cfg.clone(), rows }
}

impl ExperimentReport {
    /// Replications in which some selector beat the baseline's AME. Always
    /// empty when the baseline was not run.
    pub fn oracle_violations(&self) -> Vec<(SystemKind, usize, SelectorId, usize)> {
        let mut out = Vec::new();
        for base in self.rows.iter().filter(|r| r.selector == SelectorId::Baseline) {
            for row in self
                .rows
                .iter()
                .filter(|r| r.system == base.system && r.n == base.n && r.selector != SelectorId::Baseline)
            {
                for (rep, (b, a)) in base.ames.iter().zip(&row.ames).enumerate() {
                    if b > a {
                        out.push((row.system, row.n, row.selector, rep));
                    }
                }
            }
        }
        out
    }

    pub fn row(&self, system: SystemKind, n: usize, selector: SelectorId) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.system == system && r.n == n && r.selector == selector)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["system", "n", "selector", "mean_ame", "std_ame"])?;
        for r in &self.rows {
            w.write_record([
                r.system.name().to_string(),
                r.n.to_string(),
                r.selector.name().to_string(),
                format_float(r.mean_ame),
                format_float(r.std_ame),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Parse(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Csv => report.write_csv(fs::File::create(path)?),
        ReportFormat::Json => Ok(fs::write(path, report.to_json()?)?),
    }
}

/// Settings for [`density_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub system: SystemKind,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    /// Points of the plotted midpoint grid.
    pub points: usize,
    /// Points of the grid the baseline minimizes AME on.
    pub ame_m: usize,
    pub grid_count: usize,
}

impl CurveConfig {
    pub fn new(system: SystemKind, n: usize, seed: u64) -> Self {
        Self {
            system,
            n,
            sigma: default_sigma(),
            seed,
            points: 100,
            ame_m: AME_POINTS,
            grid_count: DEFAULT_GRID_COUNT,
        }
    }
}

/// True density and the baseline and DKM estimates on a midpoint grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub u: Vec<f64>,
    pub f_true: Vec<f64>,
    pub f_baseline: Vec<f64>,
    pub f_dkm: Vec<f64>,
    pub h_baseline: f64,
    pub h_dkm: f64,
}

pub fn density_curve(cfg: &CurveConfig) -> Result<DensityCurve> {
    let sys = MapSystem::from_kind(cfg.system, crate::dynsys::GOLDEN_RATIO)?;
    let sample = sys.generate_trajectory(&TrajectoryConfig::new(cfg.n, cfg.sigma, cfg.seed))?;
    let data = PreparedSample::new(&sample)?;
    let kernel = NormalizedKernel::univariate(KernelKind::Gaussian);
    let grid = BandwidthGrid::for_sample(&data, &kernel, cfg.grid_count)?;
    let metric = UniformGrid::unit(cfg.ame_m)?;
    let h_baseline = select_oracle(&data, &kernel, &grid, &sys, &metric)?.h_star;
    let h_dkm = select_bandwidth(SelectorId::Dkm, &data, &kernel, &grid, &ScoreConfig::default())?.h_star;
    let plot = UniformGrid::unit(cfg.points)?;
    let estimate = |h| -> Result<Vec<f64>> {
        Ok(DensityEstimate::from_prepared(data.clone(), kernel, h)?.density_on_grid(&plot))
    };
    Ok(DensityCurve {
        u: plot.points(),
        f_true: sys.density_on_grid(&plot),
        f_baseline: estimate(h_baseline)?,
        f_dkm: estimate(h_dkm)?,
        h_baseline,
        h_dkm,
    })
}

impl DensityCurve {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..self.u.len())
            .map(|i| vec![self.u[i], self.f_true[i], self.f_baseline[i], self.f_dkm[i]])
            .collect();
        write_table(out, &["u", "f_true", "f_baseline", "f_dkm"], &rows)
    }
}

pub fn emit_density_curve(cfg: &CurveConfig, path: &Path) -> Result<DensityCurve> {
    let curve = density_curve(cfg)?;
    curve.write_csv(fs::File::create(path)?)?;
    Ok(curve)
}
