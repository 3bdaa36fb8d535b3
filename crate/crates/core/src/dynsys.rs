//! Example chaotic maps on `(0, 1)`: iteration, invariant densities, initial
//! states drawn from the invariant law, and noisy trajectories
//! `x_i = T^i(x_0) + ε_i` with `ε_i ~ N(0, σ²)`.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};

/// Orbit values at or below this are treated as having collapsed onto the
/// fixed point 0 (or, for the Gauss map, onto its pole).
pub const COLLAPSE_TOLERANCE: f64 = 1e-15;

/// How many times a trajectory redraws `x_0` after a collapsed orbit.
pub const MAX_ORBIT_RETRIES: usize = 100;

/// Burn-in length for initial states of maps without a closed-form inverse CDF.
pub const BURN_IN: usize = 1000;

const BETA_TAIL: f64 = 1e-12;
const BETA_SNAP: f64 = 1e-12;

/// The golden ratio, the default β for the β-map.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Logistic,
    Gauss,
    Beta,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Logistic => "logistic",
            SystemKind::Gauss => "gauss",
            SystemKind::Beta => "beta",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(SystemKind::Logistic),
            "gauss" => Ok(SystemKind::Gauss),
            "beta" => Ok(SystemKind::Beta),
            other => Err(Error::invalid(format!("unknown system {other:?}"))),
        }
    }
}

/// Truncated invariant-density series of the β-map,
/// `f(x) = c_β Σ_{i≥0} β^{-(i+1)} 1_{[0, T^i(1)]}(x)`.
#[derive(Debug, Clone, PartialEq)]
struct BetaSeries {
    /// `(T^i(1), β^{-(i+1)})`, sorted by threshold.
    terms: Vec<(f64, f64)>,
    /// `tail[k]` = sum of weights of `terms[k..]`.
    tail: Vec<f64>,
    c_beta: f64,
}

// Error-free transforms for the β-map orbit of 1.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl BetaSeries {
    fn new(beta: f64) -> Self {
        // Number of terms: smallest N with β^{-(N+1)} / (1 - 1/β) < tol.
        let ratio = 1.0 / beta;
        let mut n_terms = 0usize;
        while ratio.powi(n_terms as i32 + 1) / (1.0 - ratio) >= BETA_TAIL {
            n_terms += 1;
        }
        let mut terms = Vec::with_capacity(n_terms);
        let (mut hi, mut lo) = (1.0f64, 0.0f64);
        let mut weight = ratio;
        for _ in 0..n_terms {
            terms.push((hi + lo, weight));
            weight *= ratio;
            // (hi, lo) ← frac(β · (hi + lo)) in double-double.
            let p = beta * hi;
            let e = beta.mul_add(hi, -p);
            let (s_hi, s_lo) = quick_two_sum(p, e + beta * lo);
            let k = s_hi.floor();
            let (mut f_hi, mut f_lo) = two_sum(s_hi - k, s_lo);
            if f_hi < 0.0 {
                let (a, b) = two_sum(f_hi + 1.0, f_lo);
                f_hi = a;
                f_lo = b;
            }
            let v = f_hi + f_lo;
            if !(BETA_SNAP..=1.0 - BETA_SNAP).contains(&v) {
                // The orbit of 1 lands on 0: every later term is empty.
                break;
            }
            hi = f_hi;
            lo = f_lo;
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut tail = vec![0.0; terms.len() + 1];
        for k in (0..terms.len()).rev() {
            tail[k] = tail[k + 1] + terms[k].1;
        }
        let mass: f64 = terms.iter().map(|(t, w)| t * w).sum();
        Self {
            terms,
            tail,
            c_beta: 1.0 / mass,
        }
    }

    fn density(&self, x: f64) -> f64 {
        let first = self.terms.partition_point(|(t, _)| *t < x);
        self.c_beta * self.tail[first]
    }

    fn cdf(&self, x: f64) -> f64 {
        self.c_beta * self.terms.iter().map(|(t, w)| w * x.min(*t)).sum::<f64>()
    }
}

/// One of the example maps together with its invariant density.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSystem {
    kind: SystemKind,
    param: f64,
    beta_series: Option<BetaSeries>,
}

impl MapSystem {
    /// The logistic map with λ = 4.
    pub fn logistic() -> Self {
        Self {
            kind: SystemKind::Logistic,
            param: 4.0,
            beta_series: None,
        }
    }

    /// The logistic map with a general λ ∈ (0, 4]. Only λ = 4 has a known
    /// invariant density.
    pub fn logistic_with_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 4.0) {
            return Err(Error::invalid(format!("logistic λ must lie in (0, 4], got {lambda}")));
        }
        Ok(Self {
            kind: SystemKind::Logistic,
            param: lambda,
            beta_series: None,
        })
    }

    pub fn gauss() -> Self {
        Self {
            kind: SystemKind::Gauss,
            param: f64::NAN,
            beta_series: None,
        }
    }

    pub fn beta(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("β-map needs β > 1, got {beta}")));
        }
        Ok(Self {
            kind: SystemKind::Beta,
            param: beta,
            beta_series: Some(BetaSeries::new(beta)),
        })
    }

    /// Builds a system by kind; `beta` is only read for the β-map.
    pub fn from_kind(kind: SystemKind, beta: f64) -> Result<Self> {
        match kind {
            SystemKind::Logistic => Ok(Self::logistic()),
            SystemKind::Gauss => Ok(Self::gauss()),
            SystemKind::Beta => Self::beta(beta),
        }
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    /// λ for the logistic map, β for the β-map, `None` for the Gauss map.
    pub fn param(&self) -> Option<f64> {
        match self.kind {
            SystemKind::Gauss => None,
            _ => Some(self.param),
        }
    }

    /// Map step without the domain check; `x` may sit on the closed interval.
    #[inline]
    fn step(&self, x: f64) -> f64 {
        match self.kind {
            SystemKind::Logistic => self.param * x * (1.0 - x),
            SystemKind::Gauss => {
                let y = 1.0 / x;
                y - y.floor()
            }
            SystemKind::Beta => {
                let y = self.param * x;
                y - y.floor()
            }
        }
    }

    /// `T(x)` for `x ∈ (0, 1)`.
    pub fn iterate(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::invalid(format!("state {x} outside (0, 1)")));
        }
        if self.kind == SystemKind::Gauss && x < 1e-300 {
            return Err(Error::DegenerateOrbit(format!("Gauss map at x = {x:e} overflows")));
        }
        Ok(self.step(x))
    }

    fn check_density_available(&self) -> Result<()> {
        if self.kind == SystemKind::Logistic && self.param != 4.0 {
            return Err(Error::invalid(format!(
                "no invariant density for the logistic map with λ = {}",
                self.param
            )));
        }
        Ok(())
    }

    /// Invariant density `f(x)` for `x ∈ (0, 1)`.
    pub fn invariant_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::invalid(format!("x = {x} outside (0, 1)")));
        }
        self.check_density_available()?;
        Ok(self.density_unchecked(x))
    }

    #[inline]
    fn density_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            SystemKind::Logistic => 1.0 / (PI * (x * (1.0 - x)).sqrt()),
            SystemKind::Gauss => 1.0 / (LN_2 * (1.0 + x)),
            SystemKind::Beta => self.beta_series.as_ref().expect("β series").density(x),
        }
    }

    /// Invariant distribution function on `[0, 1]`.
    pub fn invariant_cdf(&self, x: f64) -> Result<f64> {
        self.check_density_available()?;
        let x = x.clamp(0.0, 1.0);
        Ok(match self.kind {
            SystemKind::Logistic => 2.0 / PI * x.sqrt().asin(),
            SystemKind::Gauss => (1.0 + x).log2(),
            SystemKind::Beta => self.beta_series.as_ref().expect("β series").cdf(x),
        })
    }

    /// Inverse-CDF map for the systems that have one: logistic
    /// `sin²(πu/2)`, Gauss `2^u − 1`. `None` for the β-map.
    pub fn initial_from_uniform(&self, u: f64) -> Option<f64> {
        match self.kind {
            SystemKind::Logistic if self.param == 4.0 => {
                let s = (PI * u / 2.0).sin();
                Some(s * s)
            }
            SystemKind::Gauss => Some(u.exp2() - 1.0),
            _ => None,
        }
    }

    /// Draws `x_0` from the invariant law. Maps without an inverse CDF are
    /// started from a uniform point and iterated [`BURN_IN`] steps; `None`
    /// if that burn-in collapses.
    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let u: f64 = rng.random();
        if let Some(x) = self.initial_from_uniform(u) {
            return Some(x);
        }
        let mut x = u;
        for _ in 0..BURN_IN {
            if !(x > COLLAPSE_TOLERANCE && x < 1.0) {
                return None;
            }
            x = self.step(x);
        }
        (x > COLLAPSE_TOLERANCE && x < 1.0).then_some(x)
    }

    /// Orbit `T(x0), …, T^n(x0)`, or `None` if it collapses.
    fn orbit(&self, x0: f64, n: usize) -> Option<Vec<f64>> {
        if !(x0 > COLLAPSE_TOLERANCE && x0 < 1.0) {
            return None;
        }
        let mut out = Vec::with_capacity(n);
        let mut x = x0;
        for _ in 0..n {
            // A value of exactly 1 (logistic, from 1/2) maps to 0 and is
            // caught on the next step.
            x = self.step(x);
            if !(x > COLLAPSE_TOLERANCE) || !x.is_finite() {
                return None;
            }
            out.push(x);
        }
        Some(out)
    }

    /// Noisy trajectory seeded from `cfg.seed`.
    pub fn generate_trajectory(&self, cfg: &TrajectoryConfig) -> Result<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        self.generate_trajectory_with_rng(cfg, &mut rng)
    }

    /// Noisy trajectory drawing `x_0` (unless fixed) and the noise from `rng`.
    pub fn generate_trajectory_with_rng<R: Rng + ?Sized>(
        &self,
        cfg: &TrajectoryConfig,
        rng: &mut R,
    ) -> Result<Sample> {
        cfg.validate()?;
        let mut attempt = 0;
        let (x0, mut values) = loop {
            let x0 = match cfg.x0 {
                Some(x) => Some(x),
                None => self.sample_initial(rng),
            };
            if let Some(x0) = x0 {
                if let Some(orbit) = self.orbit(x0, cfg.n) {
                    break (x0, orbit);
                }
            }
            if cfg.x0.is_some() {
                return Err(Error::DegenerateOrbit(format!(
                    "{} orbit from fixed x0 = {:?} collapses (seed {})",
                    self.kind, cfg.x0, cfg.seed
                )));
            }
            attempt += 1;
            if attempt > MAX_ORBIT_RETRIES {
                return Err(Error::DegenerateOrbit(format!(
                    "{} orbit collapsed {attempt} times (seed {})",
                    self.kind, cfg.seed
                )));
            }
        };
        if cfg.sigma > 0.0 {
            let noise = Normal::new(0.0, cfg.sigma).map_err(|e| Error::invalid(e.to_string()))?;
            for v in values.iter_mut() {
                *v += noise.sample(rng);
            }
        }
        Ok(Sample {
            values,
            meta: SampleMeta {
                system: Some(self.kind),
                param: self.param(),
                sigma: cfg.sigma,
                seed: Some(cfg.seed),
                x0: Some(x0),
            },
        })
    }
}

impl Density for MapSystem {
    fn density(&self, x: f64) -> f64 {
        if x > 0.0 && x < 1.0 {
            self.density_unchecked(x)
        } else {
            0.0
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((0.0, 1.0))
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.beta_series {
            Some(series) => series
                .terms
                .iter()
                .map(|(t, _)| *t)
                .filter(|&t| t > lo && t < hi)
                .collect(),
            None => Vec::new(),
        }
    }
}

/// Parameters of one simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub x0: Option<f64>,
}

impl TrajectoryConfig {
    pub fn new(n: usize, sigma: f64, seed: u64) -> Self {
        Self {
            n,
            sigma,
            seed,
            x0: None,
        }
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("trajectory length must be at least 1"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("noise σ must be ≥ 0, got {}", self.sigma)));
        }
        if let Some(x0) = self.x0 {
            if !(x0 > 0.0 && x0 < 1.0) {
                return Err(Error::invalid(format!("x0 = {x0} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Where a sample came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub system: Option<SystemKind>,
    pub param: Option<f64>,
    pub sigma: f64,
    pub seed: Option<u64>,
    pub x0: Option<f64>,
}

/// An ordered sequence of real observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    meta: SampleMeta,
}

impl Sample {
    /// Wraps observed values (temporal order preserved).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite observation {bad}")));
        }
        Ok(Self {
            values,
            meta: SampleMeta::default(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Standard deviation with the `n − 1` denominator.
    pub fn std_dev(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    }
}
