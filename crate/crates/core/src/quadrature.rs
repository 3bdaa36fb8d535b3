//! Numerical integration and summation helpers.
//!
//! Three tools live here:
//!
//! * [`pairwise_sum`] / [`pairwise_sum_by`]: cascade summation with a fixed
//!   split tree, so a sum does not depend on how callers chunk the work.
//! * [`adaptive_simpson`]: recursive Simpson with interval bisection, used for
//!   smooth integrands on closed intervals.
//! * [`gauss_kronrod`]: adaptive 7/15-point Gauss–Kronrod. Its nodes are
//!   interior, so integrable endpoint singularities (the logistic-map density)
//!   are handled by bisection alone.
//!
//! [`UniformGrid`] describes the midpoint grids used for every fixed-step
//! quadrature and metric in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 32;

/// Sums `values` with a fixed binary split tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

/// Pairwise sum of `term(0) + ... + term(len - 1)`.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(len: usize, term: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, term: &F) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += term(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, term) + rec(mid, hi, term)
        }
    }
    rec(0, len, &term)
}

/// Equispaced midpoint grid: `count` cells of width `step` starting at
/// `origin`; point `k` sits at `origin + (k + 1/2) * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformGrid {
    /// Midpoint grid with `count` cells covering `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::invalid(format!("grid interval [{lo}, {hi}] is empty")));
        }
        if count == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        Ok(Self {
            origin: lo,
            step: (hi - lo) / count as f64,
            count,
        })
    }

    /// The unit-interval grid `u_i = (i - 1/2) / m`, `i = 1..m`.
    pub fn unit(m: usize) -> Result<Self> {
        Self::covering(0.0, 1.0, m)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.origin + (k as f64 + 0.5) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.point(k)).collect()
    }

    pub fn upper(&self) -> f64 {
        self.origin + self.count as f64 * self.step
    }

    /// Midpoint-rule integral of already-evaluated values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.count);
        self.step * pairwise_sum(values)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 50;

    struct Ctx<'a, F> {
        f: &'a F,
        failed: bool,
    }

    fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
        width / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        ctx: &mut Ctx<'_, F>,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (ctx.f)(lm);
        let frm = (ctx.f)(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-15 {
            return left + right + delta / 15.0;
        }
        if depth >= MAX_DEPTH {
            ctx.failed = true;
            return left + right + delta / 15.0;
        }
        rec(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + rec(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }

    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let coarse = simpson(fa, fm, fb, b - a);
    // A rough magnitude from a 33-point pass keeps the tolerance relative
    // even when the three-point estimate happens to vanish.
    let scale = {
        let n = 32;
        let w = (b - a) / n as f64;
        pairwise_sum_by(n, |i| f(a + (i as f64 + 0.5) * w).abs()) * w
    };
    let tol = rel_tol * scale.max(coarse.abs()).max(f64::MIN_POSITIVE);
    let mut ctx = Ctx { f: &f, failed: false };
    let value = rec(&mut ctx, a, b, fa, fm, fb, coarse, tol, 0);
    if ctx.failed || !value.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            lo: a,
            hi: b,
            estimate: value,
            error: f64::NAN,
        });
    }
    Ok(value)
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Subintervals are bisected largest-error-first until the summed error
/// estimate drops below `rel_tol * |I|` (or `abs_tol`, whichever is larger).
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    gauss_kronrod_with_breaks(f, a, b, &[], rel_tol, abs_tol)
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// [`gauss_kronrod`] with the interval pre-split at `breaks` (points outside
/// `(a, b)` are ignored). Known kinks and jumps belong here.
pub fn gauss_kronrod_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const MAX_PIECES: usize = 20_000;
    if a == b {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap = std::collections::BinaryHeap::new();
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        let (value, error) = gk15(&f, lo, hi);
        heap.push(Piece { lo, hi, value, error });
        lo = hi;
    }
    let fail = |heap: &std::collections::BinaryHeap<Piece>| {
        let v: Vec<&Piece> = heap.iter().collect();
        Error::QuadratureNonConvergence {
            lo: a,
            hi: b,
            estimate: pairwise_sum_by(v.len(), |i| v[i].value),
            error: pairwise_sum_by(v.len(), |i| v[i].error),
        }
    };
    let mut iterations = 0usize;
    loop {
        // Totals are recomputed exactly; the heap is small relative to the
        // cost of the integrand in every caller.
        let pieces: Vec<&Piece> = heap.iter().collect();
        let total = pairwise_sum_by(pieces.len(), |i| pieces[i].value);
        let err = pairwise_sum_by(pieces.len(), |i| pieces[i].error);
        if !total.is_finite() || !err.is_finite() {
            return Err(fail(&heap));
        }
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            return Ok(total);
        }
        if heap.len() >= MAX_PIECES {
            return Err(fail(&heap));
        }
        // Split several of the worst pieces per round to amortize the totals.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let worst = heap.pop().expect("non-empty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                heap.push(worst);
                return Err(fail(&heap));
            }
            let (v1, e1) = gk15(&f, worst.lo, mid);
            let (v2, e2) = gk15(&f, mid, worst.hi);
            heap.push(Piece { lo: worst.lo, hi: mid, value: v1, error: e1 });
            heap.push(Piece { lo: mid, hi: worst.hi, value: v2, error: e2 });
        }
        iterations += 1;
        debug_assert!(iterations < 1_000_000);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let total = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((total - 2.0).abs() < 1e-14);
        let gauss = 2.0 * (WG[0] + WG[1] + WG[2]) + WG[3];
        assert!((gauss - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_polynomial_and_exp() {
        let v = adaptive_simpson(|x| x * x * x - x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive_simpson(|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn kronrod_handles_inverse_sqrt_endpoint() {
        // ∫₀¹ x^{-1/2} dx = 2
        let v = gauss_kronrod(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn kronrod_reports_divergence() {
        let r = gauss_kronrod(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10, 0.0);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 4950.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn unit_grid_points() {
        let g = UniformGrid::unit(4).unwrap();
        assert_eq!(g.points(), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.upper(), 1.0);
    }
}
