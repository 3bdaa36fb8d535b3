//! Kernel density estimation for observations generated by ergodic
//! dynamical systems.
//!
//! The crate simulates noisy trajectories of the logistic, Gauss and β-maps
//! ([`dynsys`]), estimates their invariant densities with kernel estimators
//! ([`kernels`], [`estimator`]), picks bandwidths by cross-validation or the
//! double-kernel method ([`bandwidth`]), and measures the result against the
//! known density ([`analysis`], [`harness`]).
//!
//! ```
//! use dynkde::{DensityEstimate, KernelKind, MapSystem, NormalizedKernel, TrajectoryConfig};
//!
//! let system = MapSystem::gauss();
//! let sample = system.generate_trajectory(&TrajectoryConfig::new(2000, 0.01, 7))?;
//! let kernel = NormalizedKernel::univariate(KernelKind::Gaussian);
//! let estimate = DensityEstimate::new(&sample, kernel, 0.05)?;
//! let truth = system.invariant_density(0.5)?;
//! assert!((estimate.evaluate(0.5) - truth).abs() < 0.2);
//! # Ok::<(), dynkde::Error>(())
//! ```

pub mod analysis;
pub mod bandwidth;
pub mod density;
pub mod dynsys;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod kernels;
pub mod quadrature;

pub use bandwidth::{BandwidthGrid, ScoreConfig, SelectionResult, SelectorId};
pub use density::{Density, UnitUniform};
pub use dynsys::{MapSystem, Sample, SampleMeta, SystemKind, TrajectoryConfig};
pub use error::{Error, Result};
pub use estimator::{DensityEstimate, EvalMode, PreparedSample, QuadratureConfig};
pub use harness::{ExperimentConfig, ExperimentReport};
pub use kernels::{KernelKind, NormalizedKernel};
pub use quadrature::UniformGrid;
