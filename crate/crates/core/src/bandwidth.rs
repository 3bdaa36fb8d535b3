//! Candidate bandwidth grids and the selectors that pick one of them.
//!
//! Every selector scores each grid value independently and returns the
//! smallest minimizer. The cross-validation scores are
//!
//! ```text
//! LSCV(h)  = ∫ f_{D,h}² − (2/n) Σᵢ f̂_{−i,h}(xᵢ)
//! MLSCV(h) = ∫ f_{D,h}² − (2/n) Σᵢ f̂_{−i,h,l}(xᵢ)      (l = 1 or 2)
//! DKM(h)   = ∫ |f_{D,h,K} − f_{D,h,L}|                  (K epanechnikov, L triangle)
//! ```
//!
//! with the integrals taken over the estimate's support: exactly by piecewise
//! Gauss–Legendre for `∫f²` with compact kernels, by the midpoint rule
//! otherwise.
//! The baseline "selector" needs the true density and lives in
//! [`select_oracle`], apart from the data-driven ones.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ame_values;
use crate::density::Density;
use crate::error::{Error, Result};
use crate::estimator::{DensityEstimate, EvalMode, LeaveOutSums, PreparedSample, QuadratureConfig};
use crate::kernels::{check_bandwidth, KernelKind, NormalizedKernel};
use crate::quadrature::{pairwise_sum_by, UniformGrid};

/// Lower grid endpoint used when two observations coincide.
pub const MIN_BANDWIDTH: f64 = 1e-12;

/// Default number of candidate bandwidths.
pub const DEFAULT_GRID_COUNT: usize = 100;

/// Equispaced candidate bandwidths `h_lo = values[0] < … < values[count-1] = h_hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    pub h_lo: f64,
    pub h_hi: f64,
    pub values: Vec<f64>,
    /// Set when the oversmoothing bound fell below the smallest gap and the
    /// upper end was replaced by `2 h_lo`.
    pub degenerate: bool,
}

impl BandwidthGrid {
    pub fn new(h_lo: f64, h_hi: f64, count: usize) -> Result<Self> {
        check_bandwidth(h_lo)?;
        check_bandwidth(h_hi)?;
        if count < 2 {
            return Err(Error::invalid("a bandwidth grid needs at least two values"));
        }
        if h_hi <= h_lo {
            return Err(Error::invalid(format!("empty bandwidth range [{h_lo}, {h_hi}]")));
        }
        let step = (h_hi - h_lo) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|k| h_lo + k as f64 * step).collect();
        values[count - 1] = h_hi;
        Ok(Self {
            h_lo,
            h_hi,
            values,
            degenerate: false,
        })
    }

    /// `h_lo` = smallest gap between sorted observations, `h_hi` = the
    /// oversmoothed bandwidth `3 σ̂ (R(K̄) / (35 n))^{1/5}`.
    pub fn for_sample(data: &PreparedSample, kernel: &NormalizedKernel, count: usize) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::invalid("a bandwidth grid needs at least two observations"));
        }
        let sorted = data.sorted();
        let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let h_lo = gap.max(MIN_BANDWIDTH);

        let x = data.temporal();
        let mean = pairwise_sum_by(n, |i| x[i]) / n as f64;
        let var = pairwise_sum_by(n, |i| (x[i] - mean).powi(2)) / (n - 1) as f64;
        if !(var > 0.0) {
            return Err(Error::ZeroVariance);
        }
        let h_os = 3.0 * var.sqrt() * (kernel.l2_norm() / (35.0 * n as f64)).powf(0.2);
        if h_os <= h_lo {
            let mut grid = Self::new(h_lo, 2.0 * h_lo, count)?;
            grid.degenerate = true;
            return Ok(grid);
        }
        Self::new(h_lo, h_os, count)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A bandwidth selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorId {
    Lscv,
    Mlscv1,
    Mlscv2,
    Dkm,
    /// AME-minimizing bandwidth; requires the true density.
    Baseline,
}

impl SelectorId {
    pub const ALL: [SelectorId; 5] = [
        SelectorId::Lscv,
        SelectorId::Mlscv1,
        SelectorId::Mlscv2,
        SelectorId::Dkm,
        SelectorId::Baseline,
    ];

    pub const DATA_DRIVEN: [SelectorId; 4] = [
        SelectorId::Lscv,
        SelectorId::Mlscv1,
        SelectorId::Mlscv2,
        SelectorId::Dkm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectorId::Lscv => "lscv",
            SelectorId::Mlscv1 => "mlscv1",
            SelectorId::Mlscv2 => "mlscv2",
            SelectorId::Dkm => "dkm",
            SelectorId::Baseline => "baseline",
        }
    }

    pub fn is_oracle(self) -> bool {
        self == SelectorId::Baseline
    }
}

impl fmt::Display for SelectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectorId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown selector `{s}`")))
    }
}

/// How scores are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreConfig {
    pub quad: QuadratureConfig,
    pub mode: EvalMode,
}

impl ScoreConfig {
    pub fn direct() -> Self {
        Self {
            mode: EvalMode::Direct,
            ..Self::default()
        }
    }
}

/// Score curve over a grid and its smallest minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selector: SelectorId,
    pub h_star: f64,
    /// Position of `h_star` in the grid.
    pub index: usize,
    pub scores: Vec<(f64, f64)>,
}

impl SelectionResult {
    fn from_scores(selector: SelectorId, grid: &BandwidthGrid, scores: Vec<f64>) -> Result<Self> {
        let index = argmin(&scores).ok_or(Error::AllNan)?;
        Ok(Self {
            selector,
            h_star: grid.values[index],
            index,
            scores: grid.values.iter().copied().zip(scores).collect(),
        })
    }
}

/// Index of the smallest non-NaN value; the first one on ties.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if values[b] <= v => {}
            _ => best = Some(i),
        }
    }
    best
}

fn integrated_square(data: &PreparedSample, kernel: &NormalizedKernel, h: f64, cfg: &ScoreConfig) -> Result<f64> {
    DensityEstimate::from_prepared(data.clone(), *kernel, h)?.integrated_square(&cfg.quad, cfg.mode)
}

/// Least-squares cross-validation score.
pub fn lscv_score(data: &PreparedSample, kernel: &NormalizedKernel, h: f64, cfg: &ScoreConfig) -> Result<f64> {
    let sq = integrated_square(data, kernel, h, cfg)?;
    let sums = LeaveOutSums::compute(data, kernel, h, cfg.mode)?;
    Ok(sq - 2.0 * sums.mean_loo())
}

/// Cross-validation score leaving out the `l` temporal neighbours on each side.
pub fn mlscv_score(
    data: &PreparedSample,
    kernel: &NormalizedKernel,
    h: f64,
    l: usize,
    cfg: &ScoreConfig,
) -> Result<f64> {
    let n = data.len();
    if n < 2 * l + 2 {
        return Err(Error::invalid(format!(
            "MLSCV with l = {l} needs at least {} observations, got {n}",
            2 * l + 2
        )));
    }
    let sq = integrated_square(data, kernel, h, cfg)?;
    let sums = LeaveOutSums::compute(data, kernel, h, cfg.mode)?;
    Ok(sq - 2.0 * sums.mean_mloo(data, kernel, l, cfg.mode)?)
}

/// `∫ |f_{D,h,K} − f_{D,h,L}|` over the union of both supports.
pub fn dkm_score(
    data: &PreparedSample,
    h: f64,
    k: &NormalizedKernel,
    l: &NormalizedKernel,
    cfg: &ScoreConfig,
) -> Result<f64> {
    let ek = DensityEstimate::from_prepared(data.clone(), *k, h)?;
    let el = ek.with_kernel(*l)?;
    let reach = ek.reach().max(el.reach());
    let grids = cfg.quad.grids(data, reach, h)?;
    let mut total = 0.0;
    for g in &grids {
        let a = ek.evaluate_grid(g, cfg.mode);
        let b = el.evaluate_grid(g, cfg.mode);
        total += g.step * pairwise_sum_by(a.len(), |i| (a[i] - b[i]).abs());
    }
    Ok(total)
}

/// The scoring kernel pair of the double-kernel method.
pub fn dkm_kernels() -> (NormalizedKernel, NormalizedKernel) {
    (
        NormalizedKernel::univariate(KernelKind::Epanechnikov),
        NormalizedKernel::univariate(KernelKind::Triangle),
    )
}

/// Score of a data-driven selector at one bandwidth. `kernel` is the
/// estimator kernel; DKM uses its own pair regardless.
pub fn score(
    selector: SelectorId,
    data: &PreparedSample,
    kernel: &NormalizedKernel,
    h: f64,
    cfg: &ScoreConfig,
) -> Result<f64> {
    match selector {
        SelectorId::Lscv => lscv_score(data, kernel, h, cfg),
        SelectorId::Mlscv1 => mlscv_score(data, kernel, h, 1, cfg),
        SelectorId::Mlscv2 => mlscv_score(data, kernel, h, 2, cfg),
        SelectorId::Dkm => {
            let (k, l) = dkm_kernels();
            dkm_score(data, h, &k, &l, cfg)
        }
        SelectorId::Baseline => Err(Error::invalid(
            "the baseline needs the true density; use select_oracle",
        )),
    }
}

/// Scores every grid value (in parallel, assembled in grid order) and
/// returns the smallest minimizer.
pub fn select_bandwidth(
    selector: SelectorId,
    data: &PreparedSample,
    kernel: &NormalizedKernel,
    grid: &BandwidthGrid,
    cfg: &ScoreConfig,
) -> Result<SelectionResult> {
    if selector.is_oracle() {
        return Err(Error::invalid(
            "the baseline needs the true density; use select_oracle",
        ));
    }
    let scores = grid
        .values
        .par_iter()
        .map(|&h| score(selector, data, kernel, h, cfg))
        .collect::<Result<Vec<f64>>>()?;
    SelectionResult::from_scores(selector, grid, scores)
}

/// The grid bandwidth minimizing the absolute mean error against `truth` on
/// `metric_grid`. Simulation only.
pub fn select_oracle(
    data: &PreparedSample,
    kernel: &NormalizedKernel,
    grid: &BandwidthGrid,
    truth: &dyn Density,
    metric_grid: &UniformGrid,
) -> Result<SelectionResult> {
    let truth_values = truth.density_on_grid(metric_grid);
    let scores = grid
        .values
        .par_iter()
        .map(|&h| {
            let est = DensityEstimate::from_prepared(data.clone(), *kernel, h)?;
            Ok(ame_values(&est.density_on_grid(metric_grid), &truth_values))
        })
        .collect::<Result<Vec<f64>>>()?;
    SelectionResult::from_scores(SelectorId::Baseline, grid, scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{MapSystem, TrajectoryConfig};
    use crate::Sample;

    fn data(v: &[f64]) -> PreparedSample {
        PreparedSample::from_values(v).unwrap()
    }

    fn k(kind: KernelKind) -> NormalizedKernel {
        NormalizedKernel::univariate(kind)
    }

    #[test]
    fn grid_endpoints() {
        let d = data(&[0.1, 0.4, 0.9]);
        let g = BandwidthGrid::for_sample(&d, &k(KernelKind::Gaussian), 100).unwrap();
        assert!((g.h_lo - 0.3).abs() < 1e-15);
        let sd = 0.404145188432738f64;
        let r = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let expect = 3.0 * sd * (r / 105.0).powf(0.2);
        assert!((g.h_hi - expect).abs() < 1e-12);
        assert!((g.h_hi - 0.39776).abs() < 5e-5);
        assert_eq!(g.len(), 100);
        assert_eq!(g.values[0], g.h_lo);
        assert_eq!(g.values[99], g.h_hi);
        assert!(g.values.windows(2).all(|w| w[0] < w[1]));
        assert!(!g.degenerate);
    }

    #[test]
    fn grid_errors_and_degenerate_case() {
        let kern = k(KernelKind::Gaussian);
        assert!(BandwidthGrid::for_sample(&data(&[0.5]), &kern, 100).is_err());
        assert!(matches!(
            BandwidthGrid::for_sample(&data(&[0.5, 0.5, 0.5]), &kern, 100),
            Err(Error::ZeroVariance)
        ));
        // Two far-apart points: the only gap exceeds the oversmoothing bound.
        let g = BandwidthGrid::for_sample(&data(&[0.0, 1.0]), &kern, 10).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.h_hi, 2.0 * g.h_lo);
        // Tied observations floor the lower end.
        let g = BandwidthGrid::for_sample(&data(&[0.2, 0.2, 0.7]), &kern, 10).unwrap();
        assert_eq!(g.h_lo, MIN_BANDWIDTH);
    }

    #[test]
    fn lscv_hand_values() {
        let cfg = ScoreConfig::default();
        let naive = k(KernelKind::Naive);
        let v = lscv_score(&data(&[0.25, 0.75]), &naive, 0.25, &cfg).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        let v = lscv_score(&data(&[0.5, 0.5]), &naive, 0.5, &cfg).unwrap();
        assert!((v + 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mlscv_hand_values() {
        let cfg = ScoreConfig::default();
        let naive = k(KernelKind::Naive);
        let v = mlscv_score(&data(&[0.1, 0.4, 0.6, 0.9]), &naive, 0.25, 1, &cfg).unwrap();
        assert!((v - 0.85).abs() < 1e-9, "{v}");
        assert!(mlscv_score(&data(&[0.1, 0.4, 0.6]), &naive, 0.25, 1, &cfg).is_err());
        let d = data(&[0.1, 0.4, 0.6, 0.9, 0.3]);
        let g = k(KernelKind::Gaussian);
        assert_eq!(
            mlscv_score(&d, &g, 0.1, 0, &cfg).unwrap(),
            lscv_score(&d, &g, 0.1, &cfg).unwrap()
        );
    }

    #[test]
    fn dkm_single_point() {
        let (ke, kt) = dkm_kernels();
        let cfg = ScoreConfig::default();
        for h in [1e-3, 0.05, 0.3, 2.0] {
            let v = dkm_score(&data(&[0.5]), h, &ke, &kt, &cfg).unwrap();
            assert!((v - 4.0 / 27.0).abs() < 1e-6, "h={h}: {v}");
            assert_eq!(dkm_score(&data(&[0.5]), h, &ke, &ke, &cfg).unwrap(), 0.0);
        }
        let grid = BandwidthGrid::new(0.01, 0.5, 20).unwrap();
        let scores: Vec<f64> = grid
            .values
            .iter()
            .map(|&h| dkm_score(&data(&[0.5]), h, &ke, &kt, &cfg).unwrap())
            .collect();
        assert!(scores.iter().all(|s| (s - 4.0 / 27.0).abs() < 1e-6));
    }

    #[test]
    fn dkm_is_symmetric() {
        let s = MapSystem::gauss()
            .generate_trajectory(&TrajectoryConfig::new(300, 0.01, 9))
            .unwrap();
        let d = PreparedSample::new(&s).unwrap();
        let (ke, kt) = dkm_kernels();
        let cfg = ScoreConfig::default();
        for h in [0.002, 0.04, 0.2] {
            let a = dkm_score(&d, h, &ke, &kt, &cfg).unwrap();
            let b = dkm_score(&d, h, &kt, &ke, &cfg).unwrap();
            assert_eq!(a, b);
            assert!((0.0..=2.0).contains(&a));
        }
    }

    #[test]
    fn argmin_ties_and_nan() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(argmin(&[f64::NAN, 2.0, f64::NAN, 2.0]), Some(1));
        assert_eq!(argmin(&[f64::NAN, f64::NAN]), None);
        assert_eq!(argmin(&[]), None);
    }

    #[test]
    fn selector_names_roundtrip() {
        for id in SelectorId::ALL {
            assert_eq!(id.name().parse::<SelectorId>().unwrap(), id);
        }
        assert!("plugin".parse::<SelectorId>().is_err());
    }

    #[test]
    fn baseline_refused_without_truth() {
        let d = data(&[0.1, 0.4, 0.9]);
        let g = BandwidthGrid::new(0.1, 0.2, 3).unwrap();
        assert!(select_bandwidth(SelectorId::Baseline, &d, &k(KernelKind::Gaussian), &g, &ScoreConfig::default()).is_err());
    }

    #[test]
    fn dkm_curve_is_flat_for_single_point() {
        let grid = BandwidthGrid::new(0.01, 0.5, 20).unwrap();
        let r = select_bandwidth(
            SelectorId::Dkm,
            &data(&[0.5]),
            &k(KernelKind::Gaussian),
            &grid,
            &ScoreConfig::default(),
        );
        // Scores agree only to rounding, so the argmin may sit anywhere; the
        // curve itself must be flat.
        let r = r.unwrap();
        assert!(r.scores.iter().all(|(_, s)| (s - 4.0 / 27.0).abs() < 1e-6));
    }

    #[test]
    fn oracle_selection_is_argmin_of_ame() {
        let sys = MapSystem::gauss();
        let s: Sample = sys.generate_trajectory(&TrajectoryConfig::new(400, 0.01, 2)).unwrap();
        let d = PreparedSample::new(&s).unwrap();
        let kern = k(KernelKind::Gaussian);
        let grid = BandwidthGrid::for_sample(&d, &kern, 30).unwrap();
        let m = UniformGrid::unit(2000).unwrap();
        let r = select_oracle(&d, &kern, &grid, &sys, &m).unwrap();
        assert!(r.scores.iter().all(|(_, a)| r.scores[r.index].1 <= *a));
        assert_eq!(r.h_star, grid.values[r.index]);
    }
}
