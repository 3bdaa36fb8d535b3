//! Radial smoothing kernels and their normalization.
//!
//! A kernel is a profile `K(r)` on `[0, ∞)` applied to the Euclidean norm of a
//! point in `ℝ^d`. The raw profiles are kept as written (the gaussian is
//! `e^{-r²}`, not a standard normal density); [`NormalizedKernel`] divides by
//!
//! ```text
//! κ = d · τ_d · ∫₀^∞ K(r) r^{d-1} dr,    τ_d = π^{d/2} / Γ(d/2 + 1),
//! ```
//!
//! so that `K̄ = K / κ` integrates to one over `ℝ^d`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Gaussian contributions are dropped beyond this many bandwidths:
/// `e^{-8.5²} < 1e-31`.
pub const GAUSSIAN_TRUNCATION: f64 = 8.5;

/// The supported kernel profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `1_{[0,1]}(r)`
    Naive,
    /// `(1 - r) 1_{[0,1]}(r)`
    Triangle,
    /// `(1 - r²) 1_{[0,1]}(r)`
    Epanechnikov,
    /// `e^{-r²}`
    Gaussian,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Naive,
        KernelKind::Triangle,
        KernelKind::Epanechnikov,
        KernelKind::Gaussian,
    ];

    /// The raw (unnormalized) profile `K(r)`.
    #[inline]
    pub fn profile(self, r: f64) -> f64 {
        match self {
            KernelKind::Naive => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Triangle => {
                if r <= 1.0 {
                    1.0 - r
                } else {
                    0.0
                }
            }
            KernelKind::Epanechnikov => {
                if r <= 1.0 {
                    1.0 - r * r
                } else {
                    0.0
                }
            }
            KernelKind::Gaussian => (-r * r).exp(),
        }
    }

    /// Radius of the support, `None` when unbounded.
    pub fn support_radius(self) -> Option<f64> {
        match self {
            KernelKind::Gaussian => None,
            _ => Some(1.0),
        }
    }

    /// Radius (in units of the bandwidth) beyond which evaluation treats the
    /// kernel as zero.
    pub fn effective_radius(self) -> f64 {
        self.support_radius().unwrap_or(GAUSSIAN_TRUNCATION)
    }

    /// Hölder exponent of the profile; the naive kernel is discontinuous.
    pub fn holder_exponent(self) -> f64 {
        match self {
            KernelKind::Naive => 0.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Naive => "naive",
            KernelKind::Triangle => "triangle",
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" | "box" | "uniform" => Ok(KernelKind::Naive),
            "triangle" | "triangular" => Ok(KernelKind::Triangle),
            "epanechnikov" | "epa" => Ok(KernelKind::Epanechnikov),
            "gaussian" | "gauss" => Ok(KernelKind::Gaussian),
            other => Err(Error::UnsupportedKernel {
                kernel: other.to_string(),
                reason: "unknown kernel name".into(),
            }),
        }
    }
}

/// `Γ(d/2 + 1)` for a positive integer `d`.
fn gamma_half_plus_one(d: usize) -> f64 {
    // Γ(1) = 1, Γ(3/2) = √π / 2, Γ(x + 1) = x Γ(x)
    let (mut x, mut g) = if d.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (1.5, PI.sqrt() / 2.0)
    };
    let target = d as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the Euclidean unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half_plus_one(d)
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::invalid("kernel dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// The raw integral `κ = ∫_{ℝ^d} K(‖x‖) dx`.
pub fn normalization_constant(kind: KernelKind, d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    let tau = unit_ball_volume(d);
    Ok(match kind {
        KernelKind::Naive => tau,
        KernelKind::Triangle => tau / (df + 1.0),
        KernelKind::Epanechnikov => 2.0 * tau / (df + 2.0),
        KernelKind::Gaussian => PI.powf(df / 2.0),
    })
}

/// `κ` by adaptive Simpson on the radial integral, for cross-checking the
/// closed forms.
pub fn normalization_constant_by_quadrature(kind: KernelKind, d: usize) -> Result<f64> {
    check_dim(d)?;
    let radial = radial_moment(kind, d, |r| kind.profile(r))?;
    Ok(d as f64 * unit_ball_volume(d) * radial)
}

/// `∫₀^R g(r) r^{d-1} dr` where `R` is the profile's effective support.
fn radial_moment<G: Fn(f64) -> f64>(kind: KernelKind, d: usize, g: G) -> Result<f64> {
    let upper = kind.support_radius().unwrap_or(12.0);
    let p = d as i32 - 1;
    adaptive_simpson(|r| g(r) * r.powi(p), 0.0, upper, 1e-10)
}

/// A kernel profile together with a dimension and its normalizing constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedKernel {
    kind: KernelKind,
    dim: usize,
    kappa: f64,
}

impl NormalizedKernel {
    pub fn new(kind: KernelKind, dim: usize) -> Result<Self> {
        let kappa = normalization_constant(kind, dim)?;
        Ok(Self { kind, dim, kappa })
    }

    /// One-dimensional kernel; never fails.
    pub fn univariate(kind: KernelKind) -> Self {
        Self::new(kind, 1).expect("d = 1 is always valid")
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn holder_exponent(&self) -> f64 {
        self.kind.holder_exponent()
    }

    pub fn effective_radius(&self) -> f64 {
        self.kind.effective_radius()
    }

    /// Normalized profile `K̄(r) = K(r) / κ`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.kind.profile(r) / self.kappa
    }

    /// `K̄(0)`.
    pub fn peak(&self) -> f64 {
        self.value(0.0)
    }

    /// Rejects kernels whose Hölder exponent is zero.
    pub fn require_holder(&self) -> Result<()> {
        if self.holder_exponent() > 0.0 {
            Ok(())
        } else {
            Err(Error::UnsupportedKernel {
                kernel: self.kind.to_string(),
                reason: "operation needs a Hölder-continuous kernel (β > 0)".into(),
            })
        }
    }

    /// `K_h(x) = h^{-d} K̄(‖x‖ / h)`.
    pub fn scaled(&self, h: f64, x: &[f64]) -> Result<f64> {
        check_bandwidth(h)?;
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has dimension {}, kernel has {}",
                x.len(),
                self.dim
            )));
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(self.value(norm / h) / h.powi(self.dim as i32))
    }

    /// `K_h` for `d = 1`, skipping the dimension check.
    #[inline]
    pub fn scaled_1d(&self, h: f64, x: f64) -> f64 {
        self.value(x.abs() / h) / h
    }

    /// `R(K̄) = ∫_{ℝ^d} K̄(‖x‖)² dx`.
    pub fn l2_norm(&self) -> f64 {
        let d = self.dim as f64;
        let tau = unit_ball_volume(self.dim);
        match self.kind {
            KernelKind::Naive => 1.0 / tau,
            KernelKind::Triangle => 2.0 * (d + 1.0) / ((d + 2.0) * tau),
            KernelKind::Epanechnikov => 2.0 * (d + 2.0) / ((d + 4.0) * tau),
            KernelKind::Gaussian => (2.0 * PI).powf(-d / 2.0),
        }
    }

    /// `R(K̄)` by quadrature of the radial integral.
    pub fn l2_norm_by_quadrature(&self) -> Result<f64> {
        let radial = radial_moment(self.kind, self.dim, |r| self.value(r).powi(2))?;
        Ok(self.dim as f64 * unit_ball_volume(self.dim) * radial)
    }
}

pub(crate) fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("bandwidth must be positive and finite, got {h}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalization_constant(KernelKind::Naive, 1).unwrap(), 2.0);
        assert!(close(
            normalization_constant(KernelKind::Epanechnikov, 1).unwrap(),
            4.0 / 3.0,
            1e-15
        ));
        assert!(close(
            normalization_constant(KernelKind::Gaussian, 1).unwrap(),
            1.772_453_850_905_516,
            1e-14
        ));
        assert!(close(normalization_constant(KernelKind::Gaussian, 2).unwrap(), PI, 1e-14));
        assert!(normalization_constant(KernelKind::Naive, 0).is_err());
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for kind in KernelKind::ALL {
            for d in 1..=5 {
                let exact = normalization_constant(kind, d).unwrap();
                let quad = normalization_constant_by_quadrature(kind, d).unwrap();
                assert!(close(exact, quad, 1e-9 * exact), "{kind} d={d}: {exact} vs {quad}");
                let k = NormalizedKernel::new(kind, d).unwrap();
                let r = k.l2_norm();
                let rq = k.l2_norm_by_quadrature().unwrap();
                assert!(close(r, rq, 1e-9 * r), "{kind} d={d}: R {r} vs {rq}");
            }
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!(close(unit_ball_volume(1), 2.0, 1e-15));
        assert!(close(unit_ball_volume(2), PI, 1e-15));
        assert!(close(unit_ball_volume(3), 4.0 / 3.0 * PI, 1e-14));
        assert!(close(unit_ball_volume(4), PI * PI / 2.0, 1e-14));
    }

    #[test]
    fn scaled_kernel_examples() {
        let naive = NormalizedKernel::univariate(KernelKind::Naive);
        assert_eq!(naive.scaled(0.5, &[0.2]).unwrap(), 1.0);
        assert_eq!(naive.scaled(0.5, &[0.51]).unwrap(), 0.0);
        let gauss = NormalizedKernel::univariate(KernelKind::Gaussian);
        assert!(close(gauss.scaled(1.0, &[0.0]).unwrap(), 0.564_189_583_547_756_3, 1e-15));
        for kind in [KernelKind::Triangle, KernelKind::Epanechnikov] {
            let k = NormalizedKernel::univariate(kind);
            assert_eq!(k.scaled(0.3, &[0.31]).unwrap(), 0.0);
        }
        assert!(gauss.scaled(0.0, &[0.1]).is_err());
        assert!(gauss.scaled(-1.0, &[0.1]).is_err());
        assert!(gauss.scaled(1.0, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn l2_examples() {
        let r = |k| NormalizedKernel::univariate(k).l2_norm();
        assert!(close(r(KernelKind::Naive), 0.5, 1e-15));
        assert!(close(r(KernelKind::Gaussian), 0.398_942_280_401_432_7, 1e-15));
        assert!(close(r(KernelKind::Triangle), 2.0 / 3.0, 1e-15));
        assert!(close(r(KernelKind::Epanechnikov), 0.6, 1e-15));
    }

    #[test]
    fn naive_kernel_rejected_where_holder_needed() {
        assert!(NormalizedKernel::univariate(KernelKind::Naive).require_holder().is_err());
        assert!(NormalizedKernel::univariate(KernelKind::Triangle).require_holder().is_ok());
    }

    #[test]
    fn kernels_integrate_to_one_over_space() {
        // Integrate K̄(‖x‖) in d = 1 and d = 2 directly on a Cartesian grid,
        // independently of the radial formula.
        for kind in KernelKind::ALL {
            let k1 = NormalizedKernel::univariate(kind);
            let reach = kind.effective_radius();
            let v = adaptive_simpson(|x| k1.value(x.abs()), -reach, 0.0, 1e-12).unwrap()
                + adaptive_simpson(|x| k1.value(x.abs()), 0.0, reach, 1e-12).unwrap();
            assert!(close(v, 1.0, 1e-6), "{kind} d=1: {v}");

            let k2 = NormalizedKernel::new(kind, 2).unwrap();
            let m = 1200;
            let step = 2.0 * reach / m as f64;
            let mut acc = 0.0;
            for i in 0..m {
                let x = -reach + (i as f64 + 0.5) * step;
                for j in 0..m {
                    let y = -reach + (j as f64 + 0.5) * step;
                    acc += k2.value((x * x + y * y).sqrt());
                }
            }
            let v2 = acc * step * step;
            // Cartesian midpoint cells straddle the disc edge for compact
            // kernels; the naive kernel's jump dominates the error.
            let tol = if kind == KernelKind::Naive { 5e-3 } else { 1e-4 };
            assert!(close(v2, 1.0, tol), "{kind} d=2: {v2}");
        }
    }

    #[test]
    fn profiles_are_monotone_and_nonnegative() {
        for kind in KernelKind::ALL {
            let mut prev = f64::INFINITY;
            for i in 0..=2000 {
                let r = i as f64 * 0.005;
                let v = kind.profile(r);
                assert!(v >= 0.0 && v <= prev, "{kind} at r={r}");
                prev = v;
            }
        }
    }

    #[test]
    fn kernel_name_roundtrip() {
        for kind in KernelKind::ALL {
            assert_eq!(kind.name().parse::<KernelKind>().unwrap(), kind);
        }
        assert!("cosine".parse::<KernelKind>().is_err());
    }

    proptest! {
        #[test]
        fn scaling_identity(x in -3.0f64..3.0, kind_idx in 0usize..4, hi in 0usize..3) {
            let kind = KernelKind::ALL[kind_idx];
            let h = [0.1, 0.5, 2.0][hi];
            let k = NormalizedKernel::univariate(kind);
            let lhs = k.scaled(h, &[x]).unwrap();
            let rhs = k.scaled(1.0, &[x / h]).unwrap() / h;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn monotone_in_norm(a in 0.0f64..3.0, b in 0.0f64..3.0, kind_idx in 0usize..4) {
            let k = NormalizedKernel::new(KernelKind::ALL[kind_idx], 2).unwrap();
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            let vn = k.scaled(0.7, &[near, 0.0]).unwrap();
            let vf = k.scaled(0.7, &[0.0, far]).unwrap();
            prop_assert!(vn >= vf);
        }
    }
}
