//! The kernel density estimator
//!
//! ```text
//! f_{D,h}(x) = 1/(n h^d) Σᵢ K̄(‖x − xᵢ‖ / h),
//! ```
//!
//! its leave-one-out and leave-window-out variants used by cross-validation,
//! and the population smoothing `f_{P,h} = K_h * f`.
//!
//! In one dimension the sample is sorted once and every evaluation only
//! touches sample points within `h · R` of the query, where `R` is the kernel
//! support radius (8.5 for the gaussian). [`EvalMode::Direct`] switches every
//! routine to the plain O(n) sum so the two routes can be compared.

use std::sync::Arc;

use rayon::prelude::*;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::kernels::{check_bandwidth, KernelKind, NormalizedKernel};
use crate::quadrature::{gauss_kronrod_with_breaks, pairwise_sum_by, UniformGrid};
use crate::Sample;

/// Which summation route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Sorted-window search (compact kernels) or truncation at 8.5h (gaussian).
    #[default]
    Windowed,
    /// Every sample point, no truncation.
    Direct,
}

/// Re-anchor the gaussian recurrence with exact `exp` calls this often.
const RECURRENCE_ANCHOR: usize = 512;

/// Queries per parallel chunk in [`DensityEstimate::evaluate_many`].
const QUERY_CHUNK: usize = 1024;

/// A sample in temporal order together with a sorted copy.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    temporal: Arc<[f64]>,
    sorted: Arc<[f64]>,
    /// `order[p]` = temporal index of the `p`-th smallest value.
    order: Arc<[u32]>,
}

impl PreparedSample {
    pub fn new(sample: &Sample) -> Result<Self> {
        Self::from_values(sample.values())
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.len() > u32::MAX as usize {
            return Err(Error::invalid("sample too large"));
        }
        let mut order: Vec<u32> = (0..values.len() as u32).collect();
        order.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));
        let sorted: Vec<f64> = order.iter().map(|&i| values[i as usize]).collect();
        Ok(Self {
            temporal: values.into(),
            sorted: sorted.into(),
            order: order.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.temporal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temporal.is_empty()
    }

    pub fn temporal(&self) -> &[f64] {
        &self.temporal
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Index range of sorted values within `[lo, hi]`.
    fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.sorted.partition_point(|&v| v < lo);
        let end = self.sorted.partition_point(|&v| v <= hi);
        start..end.max(start)
    }

    /// Maximal intervals covered by `[xᵢ − r, xᵢ + r]`.
    pub fn support_clusters(&self, r: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &x in self.sorted.iter() {
            let (lo, hi) = (x - r, x + r);
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        out
    }
}

/// Settings for the fixed-step quadratures over an estimate's support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Midpoints spread over the support union.
    pub points: usize,
    /// Upper bound on the cell width, in units of the bandwidth.
    pub min_points_per_bandwidth: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            points: 1 << 14,
            min_points_per_bandwidth: 8.0,
        }
    }
}

impl QuadratureConfig {
    pub fn with_points(points: usize) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }

    /// Midpoint grids covering the merged supports `[xᵢ − radius, xᵢ + radius]`.
    ///
    /// The cell width is `min(L / points, h / min_points_per_bandwidth)` where
    /// `L` is the total covered length, so a single cluster gets exactly
    /// `points` cells unless the bandwidth is tiny.
    pub fn grids(&self, data: &PreparedSample, radius: f64, h: f64) -> Result<Vec<UniformGrid>> {
        if self.points == 0 || !(self.min_points_per_bandwidth > 0.0) {
            return Err(Error::invalid("quadrature needs a positive point count"));
        }
        let clusters = data.support_clusters(radius);
        let total: f64 = clusters.iter().map(|(a, b)| b - a).sum();
        let spacing = (total / self.points as f64).min(h / self.min_points_per_bandwidth);
        clusters
            .into_iter()
            .map(|(a, b)| {
                let count = (((b - a) / spacing) - 1e-9).ceil().max(1.0) as usize;
                UniformGrid::covering(a, b, count)
            })
            .collect()
    }
}

/// `f_{D,h}` for a one-dimensional sample.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    data: PreparedSample,
    kernel: NormalizedKernel,
    h: f64,
}

impl DensityEstimate {
    pub fn new(sample: &Sample, kernel: NormalizedKernel, h: f64) -> Result<Self> {
        Self::from_prepared(PreparedSample::new(sample)?, kernel, h)
    }

    pub fn from_prepared(data: PreparedSample, kernel: NormalizedKernel, h: f64) -> Result<Self> {
        check_bandwidth(h)?;
        if kernel.dim() != 1 {
            return Err(Error::invalid(
                "univariate estimator needs a d = 1 kernel; use MultivariateEstimate",
            ));
        }
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { data, kernel, h })
    }

    /// Same sample and kernel, new bandwidth.
    pub fn with_bandwidth(&self, h: f64) -> Result<Self> {
        Self::from_prepared(self.data.clone(), self.kernel, h)
    }

    /// Same sample and bandwidth, new kernel.
    pub fn with_kernel(&self, kernel: NormalizedKernel) -> Result<Self> {
        Self::from_prepared(self.data.clone(), kernel, self.h)
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> &NormalizedKernel {
        &self.kernel
    }

    pub fn data(&self) -> &PreparedSample {
        &self.data
    }

    /// Distance beyond which a sample point does not contribute.
    pub fn reach(&self) -> f64 {
        self.kernel.effective_radius() * self.h
    }

    fn norm(&self) -> f64 {
        self.data.len() as f64 * self.h
    }

    /// Contribution `K̄(|d| / h)` of a point at distance `d`, honoring the
    /// gaussian truncation.
    #[inline]
    fn term(&self, d: f64) -> f64 {
        let d = d.abs();
        if self.kernel.kind() == KernelKind::Gaussian && d > self.reach() {
            0.0
        } else {
            self.kernel.value(d / self.h)
        }
    }

    /// Windowed evaluation at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let reach = self.reach();
        // Slightly widened search; `term` decides membership exactly.
        let slack = reach * 1e-12 + f64::EPSILON * x.abs();
        let range = self.data.window(x - reach - slack, x + reach + slack);
        let sorted = &self.data.sorted[range];
        pairwise_sum_by(sorted.len(), |i| self.term(x - sorted[i])) / self.norm()
    }

    /// O(n) evaluation at `x` without windowing or truncation.
    pub fn evaluate_direct(&self, x: f64) -> f64 {
        let sorted = &self.data.sorted;
        pairwise_sum_by(sorted.len(), |i| self.kernel.value((x - sorted[i]).abs() / self.h))
            / self.norm()
    }

    pub fn evaluate_with(&self, x: f64, mode: EvalMode) -> f64 {
        match mode {
            EvalMode::Windowed => self.evaluate(x),
            EvalMode::Direct => self.evaluate_direct(x),
        }
    }

    /// Evaluates every query, in parallel over fixed chunks. Each value is
    /// computed independently, so the output does not depend on scheduling.
    pub fn evaluate_many(&self, queries: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; queries.len()];
        out.par_chunks_mut(QUERY_CHUNK)
            .zip(queries.par_chunks(QUERY_CHUNK))
            .for_each(|(o, q)| {
                for (slot, &x) in o.iter_mut().zip(q) {
                    *slot = self.evaluate(x);
                }
            });
        out
    }

    /// Values on a midpoint grid.
    ///
    /// The windowed route scatters each sample point onto the grid cells
    /// within reach. For the gaussian, consecutive values `e^{-t²}` along the
    /// grid are produced by a two-multiplication recurrence, re-anchored with
    /// exact exponentials every 512 cells.
    pub fn evaluate_grid(&self, grid: &UniformGrid, mode: EvalMode) -> Vec<f64> {
        match mode {
            EvalMode::Direct => (0..grid.count)
                .map(|k| self.evaluate_direct(grid.point(k)))
                .collect(),
            EvalMode::Windowed => self.scatter(grid),
        }
    }

    fn scatter(&self, grid: &UniformGrid) -> Vec<f64> {
        let mut acc = vec![0.0; grid.count];
        if grid.count == 0 {
            return acc;
        }
        let h = self.h;
        let reach = self.reach();
        let last = grid.count as isize - 1;
        let kind = self.kernel.kind();
        let delta = grid.step / h;
        let use_recurrence = kind == KernelKind::Gaussian && delta <= 0.5;
        let decay4 = (-32.0 * delta * delta).exp();

        // Only points within reach of the grid can contribute; the margin
        // matches the two-cell slack of the window below.
        let sorted = &self.data.sorted;
        let lo_x = grid.origin - reach - 2.0 * grid.step;
        let hi_x = grid.origin + grid.count as f64 * grid.step + reach + 2.0 * grid.step;
        let first = sorted.partition_point(|&x| x < lo_x);
        let end = first + sorted[first..].partition_point(|&x| x <= hi_x);
        for &x in &sorted[first..end] {
            let lo_f = ((x - reach - grid.origin) / grid.step - 0.5).floor() as isize - 1;
            let hi_f = ((x + reach - grid.origin) / grid.step - 0.5).ceil() as isize + 1;
            if hi_f < 0 || lo_f > last {
                continue;
            }
            let mut k_lo = lo_f.max(0) as usize;
            let mut k_hi = hi_f.min(last) as usize;
            if kind == KernelKind::Gaussian {
                // Trim to the exact truncation window.
                while k_lo <= k_hi && (grid.point(k_lo) - x).abs() > reach {
                    k_lo += 1;
                }
                while k_hi > k_lo && (grid.point(k_hi) - x).abs() > reach {
                    k_hi -= 1;
                }
                if k_lo > k_hi || (grid.point(k_hi) - x).abs() > reach {
                    continue;
                }
            }
            let cells = &mut acc[k_lo..=k_hi];
            let t0 = (grid.point(k_lo) - x) / h;
            match kind {
                KernelKind::Gaussian if use_recurrence => {
                    gaussian_run(cells, t0, delta, decay4);
                }
                KernelKind::Epanechnikov => polynomial_run(cells, t0, delta, |t| (1.0 - t * t).max(0.0)),
                KernelKind::Triangle => polynomial_run(cells, t0, delta, |t| (1.0 - t.abs()).max(0.0)),
                _ => {
                    for (j, slot) in cells.iter_mut().enumerate() {
                        *slot += kind.profile((grid.point(k_lo + j) - x).abs() / h);
                    }
                }
            }
        }
        let scale = self.kernel.kappa() * self.norm();
        for v in acc.iter_mut() {
            *v /= scale;
        }
        acc
    }

    /// Midpoint grids covering the estimate's support.
    pub fn support_grids(&self, quad: &QuadratureConfig) -> Result<Vec<UniformGrid>> {
        quad.grids(&self.data, self.reach(), self.h)
    }

    /// `∫ f_{D,h}` over the support, as a sanity check of normalization.
    /// Compact kernels take the exact piecewise route of
    /// [`integrated_square`](Self::integrated_square).
    pub fn integral(&self, quad: &QuadratureConfig, mode: EvalMode) -> Result<f64> {
        if self.kernel.kind() != KernelKind::Gaussian {
            return Ok(self.piecewise_integral(mode, |v| v));
        }
        let grids = self.support_grids(quad)?;
        Ok(grids
            .iter()
            .map(|g| g.integrate(&self.evaluate_grid(g, mode)))
            .sum())
    }

    /// `∫ f_{D,h}²` over the support.
    ///
    /// For compact kernels the estimate is a polynomial of degree at most 2
    /// between consecutive points of `{xᵢ − h, xᵢ, xᵢ + h}`, so three-point
    /// Gauss–Legendre on each piece is exact. The gaussian uses the midpoint
    /// rule on the support grids.
    pub fn integrated_square(&self, quad: &QuadratureConfig, mode: EvalMode) -> Result<f64> {
        if self.kernel.kind() == KernelKind::Gaussian {
            let grids = self.support_grids(quad)?;
            return Ok(grids
                .iter()
                .map(|g| {
                    let v = self.evaluate_grid(g, mode);
                    g.step * pairwise_sum_by(v.len(), |i| v[i] * v[i])
                })
                .sum());
        }
        Ok(self.piecewise_integral(mode, |v| v * v))
    }

    fn piecewise_integral(&self, mode: EvalMode, g: impl Fn(f64) -> f64) -> f64 {
        let h = self.h;
        let mut breaks: Vec<f64> = self
            .data
            .sorted
            .iter()
            .flat_map(|&x| [x - h, x, x + h])
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        pairwise_sum_by(breaks.len().saturating_sub(1), |p| {
            let (a, b) = (breaks[p], breaks[p + 1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut acc = 0.0;
            for (t, w) in nodes.iter().zip(weights) {
                acc += w * g(self.evaluate_with(mid + half * t, mode));
            }
            half * acc
        })
    }
}

/// Adds `profile(t)` for `t = t0, t0 + δ, …` to `cells`, stepping four
/// interleaved lanes so the loop vectorizes.
#[inline(always)]
fn polynomial_run(cells: &mut [f64], t0: f64, delta: f64, profile: impl Fn(f64) -> f64) {
    let mut t = [t0, t0 + delta, t0 + 2.0 * delta, t0 + 3.0 * delta];
    let step = 4.0 * delta;
    let mut quads = cells.chunks_exact_mut(4);
    for quad in &mut quads {
        for j in 0..4 {
            quad[j] += profile(t[j]);
            t[j] += step;
        }
    }
    for (slot, &tj) in quads.into_remainder().iter_mut().zip(&t) {
        *slot += profile(tj);
    }
}

/// Adds `e^{-t²}` for `t = t0, t0 + δ, …` to `cells`.
///
/// Four interleaved lanes each step by `4δ`: with `g(t) = e^{-t²}`,
/// `g(t + 4δ) = g(t) r(t)` where `r(t) = e^{-(8tδ + 16δ²)}` and
/// `r(t + 4δ) = r(t) e^{-32δ²}`. Every block is re-anchored with exact
/// exponentials.
fn gaussian_run(cells: &mut [f64], t0: f64, delta: f64, decay4: f64) {
    for (b, block) in cells.chunks_mut(RECURRENCE_ANCHOR).enumerate() {
        let start = t0 + (b * RECURRENCE_ANCHOR) as f64 * delta;
        if block.len() < 8 {
            for (j, slot) in block.iter_mut().enumerate() {
                let t = start + j as f64 * delta;
                *slot += (-t * t).exp();
            }
            continue;
        }
        let mut g = [0.0; 4];
        let mut r = [0.0; 4];
        for j in 0..4 {
            let t = start + j as f64 * delta;
            g[j] = (-t * t).exp();
            r[j] = (-(8.0 * t * delta + 16.0 * delta * delta)).exp();
        }
        let mut quads = block.chunks_exact_mut(4);
        for quad in &mut quads {
            for j in 0..4 {
                quad[j] += g[j];
                g[j] *= r[j];
                r[j] *= decay4;
            }
        }
        for (slot, v) in quads.into_remainder().iter_mut().zip(g) {
            *slot += v;
        }
    }
}

impl Density for DensityEstimate {
    fn density(&self, x: f64) -> f64 {
        self.evaluate(x)
    }

    fn density_on_grid(&self, grid: &UniformGrid) -> Vec<f64> {
        self.evaluate_grid(grid, EvalMode::Windowed)
    }
}

/// `f_{D,h}` for points in `ℝ^d`, by direct summation.
#[derive(Debug, Clone)]
pub struct MultivariateEstimate {
    points: Vec<f64>,
    dim: usize,
    kernel: NormalizedKernel,
    h: f64,
}

impl MultivariateEstimate {
    /// `points` holds one observation per row.
    pub fn new(points: &[Vec<f64>], kernel: NormalizedKernel, h: f64) -> Result<Self> {
        check_bandwidth(h)?;
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        let dim = kernel.dim();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid(format!("every point must have dimension {dim}")));
        }
        Ok(Self {
            points: points.iter().flatten().copied().collect(),
            dim,
            kernel,
            h,
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!("query must have dimension {}", self.dim)));
        }
        let n = self.points.len() / self.dim;
        let sum = pairwise_sum_by(n, |i| {
            let p = &self.points[i * self.dim..(i + 1) * self.dim];
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            self.kernel.value(d2.sqrt() / self.h)
        });
        Ok(sum / (n as f64 * self.h.powi(self.dim as i32)))
    }
}

/// `f̂_{−i,h}(xᵢ) = 1/(n−1) Σ_{j≠i} K_h(xᵢ − x_j)`, with `i` zero-based.
pub fn loo_evaluate(sample: &Sample, kernel: &NormalizedKernel, h: f64, i: usize) -> Result<f64> {
    mloo_evaluate(sample, kernel, h, i, 0)
}

/// `f̂_{−i,h,l}(xᵢ)`: average of `K_h(xᵢ − x_j)` over `|j − i| > l`
/// (zero-based `i`). With `l = 0` this is the leave-one-out estimate.
pub fn mloo_evaluate(
    sample: &Sample,
    kernel: &NormalizedKernel,
    h: f64,
    i: usize,
    l: usize,
) -> Result<f64> {
    check_bandwidth(h)?;
    let x = sample.values();
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("leave-out estimates need at least two observations"));
    }
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let count = exclusion_count(n, i, l);
    if count == 0 {
        return Err(Error::EmptyExclusion { index: i, window: l, len: n });
    }
    let xi = x[i];
    let sum = pairwise_sum_by(n, |j| {
        if j.abs_diff(i) > l {
            kernel.value((xi - x[j]).abs() / h)
        } else {
            0.0
        }
    });
    Ok(sum / (count as f64 * h))
}

/// `#{j : |j − i| > l}` for zero-based `i` in a sample of length `n`.
pub fn exclusion_count(n: usize, i: usize, l: usize) -> usize {
    let near = i.min(l) + (n - 1 - i).min(l);
    n - 1 - near
}

/// Per-observation kernel sums used by the cross-validation scores.
///
/// `sums[i] = Σ_{j≠i} K̄(|xᵢ − x_j| / h)` in temporal indexing.
#[derive(Debug, Clone)]
pub struct LeaveOutSums {
    h: f64,
    sums: Vec<f64>,
}

impl LeaveOutSums {
    pub fn compute(data: &PreparedSample, kernel: &NormalizedKernel, h: f64, mode: EvalMode) -> Result<Self> {
        check_bandwidth(h)?;
        let n = data.len();
        if n < 2 {
            return Err(Error::invalid("leave-out estimates need at least two observations"));
        }
        let sums = match mode {
            EvalMode::Direct => {
                let x = data.temporal();
                (0..n)
                    .map(|i| {
                        pairwise_sum_by(n, |j| {
                            if j == i {
                                0.0
                            } else {
                                kernel.value((x[i] - x[j]).abs() / h)
                            }
                        })
                    })
                    .collect()
            }
            EvalMode::Windowed => {
                let s = data.sorted();
                let reach = kernel.effective_radius() * h;
                let slack = reach * 1e-12;
                let gaussian = kernel.kind() == KernelKind::Gaussian;
                let mut acc = vec![0.0; n];
                for p in 0..n {
                    let xp = s[p];
                    for q in p + 1..n {
                        let d = s[q] - xp;
                        if d > reach + slack {
                            break;
                        }
                        if gaussian && d > reach {
                            continue;
                        }
                        let v = kernel.value(d / h);
                        acc[p] += v;
                        acc[q] += v;
                    }
                }
                let mut sums = vec![0.0; n];
                for (p, &orig) in data.order.iter().enumerate() {
                    sums[orig as usize] = acc[p];
                }
                sums
            }
        };
        Ok(Self { h, sums })
    }

    /// `(1/n) Σᵢ f̂_{−i,h}(xᵢ)`.
    pub fn mean_loo(&self) -> f64 {
        let n = self.sums.len();
        pairwise_sum_by(n, |i| self.sums[i]) / ((n as f64 - 1.0) * self.h * n as f64)
    }

    /// `(1/n) Σᵢ f̂_{−i,h,l}(xᵢ)`, removing temporal neighbours from the
    /// windowed sums. In direct mode the sums are recomputed from scratch.
    pub fn mean_mloo(
        &self,
        data: &PreparedSample,
        kernel: &NormalizedKernel,
        l: usize,
        mode: EvalMode,
    ) -> Result<f64> {
        let n = self.sums.len();
        if n < 2 * l + 2 {
            return Err(Error::EmptyExclusion { index: n / 2, window: l, len: n });
        }
        if l == 0 {
            return Ok(self.mean_loo());
        }
        let x = data.temporal();
        let h = self.h;
        let reach = kernel.effective_radius() * h;
        let gaussian = kernel.kind() == KernelKind::Gaussian;
        let value = |i: usize| -> f64 {
            let count = exclusion_count(n, i, l) as f64;
            let s = match mode {
                EvalMode::Direct => pairwise_sum_by(n, |j| {
                    if j.abs_diff(i) > l {
                        kernel.value((x[i] - x[j]).abs() / h)
                    } else {
                        0.0
                    }
                }),
                EvalMode::Windowed => {
                    let lo = i.saturating_sub(l);
                    let hi = (i + l).min(n - 1);
                    let mut near = 0.0;
                    for j in lo..=hi {
                        if j == i {
                            continue;
                        }
                        let d = (x[i] - x[j]).abs();
                        if gaussian && d > reach {
                            continue;
                        }
                        near += kernel.value(d / h);
                    }
                    // Rounding can leave a tiny negative remainder.
                    (self.sums[i] - near).max(0.0)
                }
            };
            s / (count * h)
        };
        Ok(pairwise_sum_by(n, value) / n as f64)
    }
}

/// `f_{P,h}(x) = ∫ K_h(x − y) f(y) dy` by adaptive Gauss–Kronrod over the
/// part of the density's support within reach of `x`.
pub fn smoothed_density(
    truth: &dyn Density,
    kernel: &NormalizedKernel,
    h: f64,
    x: f64,
) -> Result<f64> {
    check_bandwidth(h)?;
    let reach = kernel.effective_radius() * h;
    let (lo, hi) = match truth.support() {
        Some((a, b)) => ((x - reach).max(a), (x + reach).min(b)),
        None => (x - reach, x + reach),
    };
    if hi <= lo {
        return Ok(0.0);
    }
    let mut breaks = truth.breakpoints(lo, hi);
    breaks.push(x);
    gauss_kronrod_with_breaks(
        |y| kernel.scaled_1d(h, x - y) * truth.density(y),
        lo,
        hi,
        &breaks,
        1e-8,
        1e-13,
    )
}
