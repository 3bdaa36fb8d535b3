//! Anything that can be evaluated as a density on the real line.

use crate::quadrature::UniformGrid;

pub trait Density: Sync {
    /// Density value at `x`; zero outside the support.
    fn density(&self, x: f64) -> f64;

    /// Values at every point of `grid`. Estimators override this with a
    /// faster route; the result must equal pointwise evaluation up to rounding.
    fn density_on_grid(&self, grid: &UniformGrid) -> Vec<f64> {
        (0..grid.count).map(|k| self.density(grid.point(k))).collect()
    }

    /// Interval outside which the density vanishes, if bounded.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    /// Points inside `(lo, hi)` where the density jumps or has a kink.
    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// The uniform density on `(0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitUniform;

impl Density for UnitUniform {
    fn density(&self, x: f64) -> f64 {
        if x > 0.0 && x < 1.0 {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((0.0, 1.0))
    }
}

impl<F: Fn(f64) -> f64 + Sync> Density for F {
    fn density(&self, x: f64) -> f64 {
        self(x)
    }
}
