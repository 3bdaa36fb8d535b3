//! Error metrics and the theoretical bandwidth schedules.
//!
//! Metrics are taken on the midpoint grid `u_i = (i − 1/2)/m` of `(0, 1)`,
//! which never touches the endpoints where the logistic density blows up.

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::estimator::smoothed_density;
use crate::kernels::NormalizedKernel;
use crate::quadrature::{pairwise_sum_by, UniformGrid};

/// Default number of AME grid points.
pub const AME_POINTS: usize = 10_000;

/// Largest sample size [`min_sample_size`] will scan to.
pub const SCAN_LIMIT: u64 = 1_000_000_000;

/// `(1/m) Σᵢ |a_i − b_i|` for values already on a common grid.
pub fn ame_values(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "AME needs values on one grid");
    pairwise_sum_by(a.len(), |i| (a[i] - b[i]).abs()) / a.len() as f64
}

/// Absolute mean error `(1/m) Σᵢ |f̂(uᵢ) − f(uᵢ)|`.
pub fn ame(estimate: &dyn Density, truth: &dyn Density, grid: &UniformGrid) -> f64 {
    ame_values(&estimate.density_on_grid(grid), &truth.density_on_grid(grid))
}

/// Which norm [`lp_distance`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    LInf,
}

/// `‖f1 − f2‖₁` by the midpoint rule on `grid`, or the maximum over its points.
pub fn lp_distance(f1: &dyn Density, f2: &dyn Density, norm: Norm, grid: &UniformGrid) -> f64 {
    let a = f1.density_on_grid(grid);
    let b = f2.density_on_grid(grid);
    match norm {
        Norm::L1 => grid.step * pairwise_sum_by(a.len(), |i| (a[i] - b[i]).abs()),
        Norm::LInf => a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
    }
}

/// Integrated squared error `∫ (f1 − f2)²` by the midpoint rule.
pub fn ise(f1: &dyn Density, f2: &dyn Density, grid: &UniformGrid) -> f64 {
    let a = f1.density_on_grid(grid);
    let b = f2.density_on_grid(grid);
    grid.step * pairwise_sum_by(a.len(), |i| (a[i] - b[i]).powi(2))
}

/// Logarithmic exponent used in the exponential-tail schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpTailExponent {
    /// `d/γ`, as written in the rate statement.
    #[default]
    Theorem,
    /// `d/η`, as derived in its proof.
    Proof,
}

/// Tail regime of the convergence-rate schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateCase {
    /// `P(H_r) ≲ r^{−ηd}`.
    PolyTail { eta: f64 },
    /// `P(H_r) ≲ e^{−a r^η}`; `a` does not enter the schedule.
    ExpTail { a: f64, eta: f64, exponent: ExpTailExponent },
    /// Compactly supported density.
    Compact,
    /// Sup-norm rate for a bounded, compactly supported density.
    LInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub case: RateCase,
    pub n: u64,
    pub alpha: f64,
    pub d: u32,
    pub gamma: f64,
}

/// Bandwidth `h_n` and error bound `ε_n` of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub h: f64,
    pub eps: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Evaluates the schedule for `q`. With `B = (ln n)^{(2+γ)/γ} / n` and
/// `s = 2α + d`:
///
/// | case     | `h_n`                                 | `ε_n`                                 |
/// |----------|---------------------------------------|---------------------------------------|
/// | compact  | `B^{1/s}`                             | `B^{α/s}`                             |
/// | linf     | `B^{1/s}`                             | `B^{α/s}`                             |
/// | poly     | `B^{(1+η)/((1+η)s−α)}`                | `B^{αη/((1+η)s−α)}`                   |
/// | exp      | `B^{1/s} (ln n)^{−(d/c)/s}`           | `B^{α/s} (ln n)^{(d/c)(α+d)/s}`       |
///
/// where `c` is `γ` or `η` according to [`ExpTailExponent`].
pub fn rate_schedule(q: &RateQuery) -> Result<Schedule> {
    if q.n < 3 {
        return Err(Error::invalid(format!("rates need n ≥ 3 so that ln n > 1, got {}", q.n)));
    }
    positive("alpha", q.alpha)?;
    positive("gamma", q.gamma)?;
    if q.alpha > 1.0 {
        return Err(Error::invalid(format!("alpha must be in (0, 1], got {}", q.alpha)));
    }
    if q.d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let n = q.n as f64;
    let log_n = n.ln();
    let (alpha, d, gamma) = (q.alpha, q.d as f64, q.gamma);
    let base = log_n.powf((2.0 + gamma) / gamma) / n;
    let s = 2.0 * alpha + d;
    Ok(match q.case {
        RateCase::Compact | RateCase::LInf => Schedule {
            h: base.powf(1.0 / s),
            eps: base.powf(alpha / s),
        },
        RateCase::PolyTail { eta } => {
            positive("eta", eta)?;
            let denom = (1.0 + eta) * s - alpha;
            Schedule {
                h: base.powf((1.0 + eta) / denom),
                eps: base.powf(alpha * eta / denom),
            }
        }
        RateCase::ExpTail { a, eta, exponent } => {
            positive("a", a)?;
            positive("eta", eta)?;
            let c = match exponent {
                ExpTailExponent::Theorem => gamma,
                ExpTailExponent::Proof => eta,
            };
            Schedule {
                h: base.powf(1.0 / s) * log_n.powf(-(d / c) / s),
                eps: base.powf(alpha / s) * log_n.powf((d / c) * (alpha + d) / s),
            }
        }
    })
}

/// Constants of a geometrically mixing process, `d_n = c₀ exp(−b n^γ)`,
/// together with `K0 = K(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingConstants {
    pub c0: f64,
    pub b: f64,
    pub gamma: f64,
    pub k0: f64,
}

/// Which sample-size threshold to compute.
pub enum ThresholdMode<'a> {
    /// `m ≥ (808 c₀ (3 h^{−d} φ(h) + K0) / (2 K0))^{1/(d+1)}`, floor `e^{(d+1)/b}`.
    N1 { h: f64, d: u32, phi: &'a dyn Fn(f64) -> f64 },
    /// Same inequality as `N1`, used by the sup-norm bound.
    N0Star { h: f64, d: u32, phi: &'a dyn Fn(f64) -> f64 },
    /// `m² ≥ 808 c₀ (3 ψ(r) + 1)`, floor `e^{3/b}`.
    N2 { r: f64, psi: &'a dyn Fn(f64) -> f64 },
}

/// `φ(h) = c / h`.
pub fn default_phi(c: f64) -> impl Fn(f64) -> f64 {
    move |h| c / h
}

/// `ψ(r) = 4 / (3r)`.
pub fn default_psi(r: f64) -> f64 {
    4.0 / (3.0 * r)
}

fn log_condition(m: u64, gamma: f64) -> bool {
    let m = m as f64;
    m / m.ln().powf(2.0 / gamma) >= 4.0
}

/// The smallest `m ≥ 3` at which both threshold inequalities hold (and
/// still hold at `m + 1`), raised to the exponential floor.
pub fn min_sample_size(mc: &MixingConstants, mode: &ThresholdMode<'_>) -> Result<u64> {
    positive("c0", mc.c0)?;
    positive("b", mc.b)?;
    positive("gamma", mc.gamma)?;
    positive("K0", mc.k0)?;
    let (first, floor_exp) = match *mode {
        ThresholdMode::N1 { h, d, phi } | ThresholdMode::N0Star { h, d, phi } => {
            positive("h", h)?;
            if h > 1.0 {
                return Err(Error::invalid(format!("h must be at most 1, got {h}")));
            }
            if d == 0 {
                return Err(Error::invalid("dimension must be at least 1"));
            }
            let p = phi(h);
            positive("phi(h)", p)?;
            let inner = 808.0 * mc.c0 * (3.0 * h.powi(-(d as i32)) * p + mc.k0) / (2.0 * mc.k0);
            (inner.powf(1.0 / (d as f64 + 1.0)), d as f64 + 1.0)
        }
        ThresholdMode::N2 { r, psi } => {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::invalid(format!("r must be at least 1, got {r}")));
            }
            let p = psi(r);
            positive("psi(r)", p)?;
            ((808.0 * mc.c0 * (3.0 * p + 1.0)).sqrt(), 3.0)
        }
    };
    // The first inequality is monotone in m, so the scan can start at its
    // threshold; a few steps back guard against rounding in the root.
    let mut m = (first.ceil() as u64).saturating_sub(2).max(3);
    let holds = |m: u64| -> bool {
        let first_ok = match *mode {
            ThresholdMode::N2 { .. } => (m as f64) * (m as f64) >= first * first,
            _ => m as f64 >= first,
        };
        first_ok && log_condition(m, mc.gamma)
    };
    loop {
        if m > SCAN_LIMIT {
            return Err(Error::ScanLimit { limit: SCAN_LIMIT });
        }
        if holds(m) && holds(m + 1) {
            break;
        }
        m += 1;
    }
    let floor = (floor_exp / mc.b).exp().ceil();
    if floor > SCAN_LIMIT as f64 {
        return Err(Error::ScanLimit { limit: SCAN_LIMIT });
    }
    Ok(m.max(floor as u64))
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn log_log_slope(hs: &[f64], errs: &[f64]) -> Result<f64> {
    if hs.len() != errs.len() || hs.len() < 2 {
        return Err(Error::DegenerateRegression("need at least two (h, error) pairs".into()));
    }
    if let Some(e) = errs.iter().find(|e| !(**e > 1e-12) || !e.is_finite()) {
        return Err(Error::DegenerateRegression(format!(
            "error {e} is too small to take a logarithm"
        )));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateRegression("all bandwidths are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Sup-norm smoothing bias `max_u |f_{P,h}(u) − f(u)|` over `grid_points`.
pub fn smoothing_bias(
    truth: &dyn Density,
    kernel: &NormalizedKernel,
    h: f64,
    grid_points: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &u in grid_points {
        let smoothed = smoothed_density(truth, kernel, h, u)?;
        worst = worst.max((smoothed - truth.density(u)).abs());
    }
    Ok(worst)
}

/// Fits the decay exponent of the sup-norm smoothing bias over a geometric
/// bandwidth sequence. Returns `(slope, errors)`.
pub fn holder_decay_check(
    truth: &dyn Density,
    kernel: &NormalizedKernel,
    hs: &[f64],
    grid_points: &[f64],
) -> Result<(f64, Vec<f64>)> {
    kernel.require_holder()?;
    if hs.len() < 4 {
        return Err(Error::invalid("the decay check needs at least four bandwidths"));
    }
    if grid_points.is_empty() {
        return Err(Error::invalid("the decay check needs grid points"));
    }
    let ratio = hs[1] / hs[0];
    if hs.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) || ratio == 1.0 {
        return Err(Error::invalid("bandwidths must form a geometric sequence"));
    }
    let errs = hs
        .iter()
        .map(|&h| smoothing_bias(truth, kernel, h, grid_points))
        .collect::<Result<Vec<f64>>>()?;
    Ok((log_log_slope(hs, &errs)?, errs))
}
