//! Library results against oracles written independently of the library
//! code: closed forms, brute-force scans and frozen values from an external
//! quadrature.

use std::f64::consts::PI;

use dynkde::analysis::{
    default_phi, default_psi, min_sample_size, smoothing_bias, MixingConstants, ThresholdMode,
};
use dynkde::bandwidth::{dkm_kernels, dkm_score, lscv_score, mlscv_score, ScoreConfig};
use dynkde::estimator::{mloo_evaluate, smoothed_density};
use dynkde::{KernelKind, MapSystem, NormalizedKernel, PreparedSample, Sample, TrajectoryConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trajectory(system: MapSystem, n: usize, seed: u64) -> Sample {
    system
        .generate_trajectory(&TrajectoryConfig::new(n, 0.01, seed))
        .unwrap()
}

/// LSCV for the gaussian kernel in closed form: `K_h * K_h` is the normal
/// density with variance `h²`, so both terms are double sums.
fn gaussian_lscv_closed_form(x: &[f64], h: f64) -> f64 {
    let n = x.len() as f64;
    let mut square = 0.0;
    let mut loo = 0.0;
    for (i, a) in x.iter().enumerate() {
        for (j, b) in x.iter().enumerate() {
            let d = a - b;
            square += (-d * d / (2.0 * h * h)).exp() / ((2.0 * PI).sqrt() * h);
            if i != j {
                loo += (-d * d / (h * h)).exp() / (PI.sqrt() * h);
            }
        }
    }
    square / (n * n) - 2.0 * loo / (n * (n - 1.0))
}

#[test]
fn gaussian_lscv_matches_closed_form() {
    for (seed, system) in [(1, MapSystem::logistic()), (2, MapSystem::gauss())] {
        let s = trajectory(system, 300, seed);
        let data = PreparedSample::new(&s).unwrap();
        let k = NormalizedKernel::univariate(KernelKind::Gaussian);
        for h in [0.003, 0.02, 0.1] {
            let lib = lscv_score(&data, &k, h, &ScoreConfig::default()).unwrap();
            let oracle = gaussian_lscv_closed_form(s.values(), h);
            assert!((lib - oracle).abs() < 1e-8 * oracle.abs().max(1.0), "h={h}: {lib} vs {oracle}");
        }
    }
}

#[test]
fn compact_lscv_matches_direct_double_sum() {
    // ∫f² on a very fine midpoint grid plus the leave-one-out double sum.
    let s = trajectory(MapSystem::gauss(), 80, 6);
    let x = s.values();
    let data = PreparedSample::new(&s).unwrap();
    for kind in [KernelKind::Epanechnikov, KernelKind::Triangle] {
        let k = NormalizedKernel::univariate(kind);
        let h = 0.07;
        let n = x.len() as f64;
        let f = |u: f64| x.iter().map(|xi| k.value((u - xi).abs() / h)).sum::<f64>() / (n * h);
        let (lo, hi) = (-0.2, 1.2);
        let m = 400_000;
        let step = (hi - lo) / m as f64;
        let square: f64 = (0..m).map(|i| f(lo + (i as f64 + 0.5) * step).powi(2)).sum::<f64>() * step;
        let mut loo = 0.0;
        for (i, a) in x.iter().enumerate() {
            for (j, b) in x.iter().enumerate() {
                if i != j {
                    loo += k.value((a - b).abs() / h) / h;
                }
            }
        }
        let oracle = square - 2.0 * loo / (n * (n - 1.0));
        let lib = lscv_score(&data, &k, h, &ScoreConfig::default()).unwrap();
        assert!((lib - oracle).abs() < 1e-6, "{kind}: {lib} vs {oracle}");
    }
}

#[test]
fn mlscv_window_matches_pointwise_definition() {
    let s = trajectory(MapSystem::logistic(), 150, 3);
    let data = PreparedSample::new(&s).unwrap();
    let k = NormalizedKernel::univariate(KernelKind::Gaussian);
    let cfg = ScoreConfig::default();
    let h = 0.04;
    let lscv = lscv_score(&data, &k, h, &cfg).unwrap();
    let loo_mean = {
        let n = s.len();
        (0..n).map(|i| mloo_evaluate(&s, &k, h, i, 0).unwrap()).sum::<f64>() / n as f64
    };
    let square = lscv + 2.0 * loo_mean;
    for l in [1, 2] {
        let n = s.len();
        let mean = (0..n).map(|i| mloo_evaluate(&s, &k, h, i, l).unwrap()).sum::<f64>() / n as f64;
        let lib = mlscv_score(&data, &k, h, l, &cfg).unwrap();
        assert!((lib - (square - 2.0 * mean)).abs() < 1e-10, "l={l}");
    }
}

#[test]
fn dkm_single_point_closed_form() {
    // ∫ |3/4 (1 − t²) − (1 − |t|)| dt over [−1, 1]: the curves cross at
    // |t| = 1/3, giving 2 (1/27 + 1/27) = 4/27.
    let (e, t) = dkm_kernels();
    let data = PreparedSample::from_values(&[0.5]).unwrap();
    let mut brute = 0.0;
    let m = 2_000_000;
    for i in 0..m {
        let u = -1.0 + (i as f64 + 0.5) * 2.0 / m as f64;
        brute += (0.75 * (1.0 - u * u) - (1.0 - u.abs())).abs() * 2.0 / m as f64;
    }
    assert!((brute - 4.0 / 27.0).abs() < 1e-9);
    for h in [0.001, 0.01, 0.3, 5.0] {
        let v = dkm_score(&data, h, &e, &t, &ScoreConfig::default()).unwrap();
        assert!((v - 4.0 / 27.0).abs() < 1e-6, "h={h}: {v}");
    }
}

/// Frozen sup-norm smoothing errors `max |f_{P,h} − f|` for the Gauss map and
/// the triangle kernel on `linspace(0.1, 0.9, 161)`, computed with an
/// external adaptive quadrature.
const GAUSS_TRIANGLE_BIAS: [(f64, f64); 4] = [
    (0.2, 0.1793445989853033),
    (0.1, 0.0018125288068859824),
    (0.05, 0.000452006220963419),
    (0.025, 0.00011293147389856983),
];

#[test]
fn smoothing_bias_matches_external_quadrature() {
    let g = MapSystem::gauss();
    let tri = NormalizedKernel::univariate(KernelKind::Triangle);
    let pts: Vec<f64> = (0..161).map(|i| 0.1 + 0.8 * i as f64 / 160.0).collect();
    for (h, expected) in GAUSS_TRIANGLE_BIAS {
        let got = smoothing_bias(&g, &tri, h, &pts).unwrap();
        assert!((got - expected).abs() < 1e-7 * expected.max(1e-3), "h={h}: {got} vs {expected}");
    }
}

#[test]
fn smoothed_gauss_density_closed_form_with_naive_kernel() {
    // f_{P,h}(x) = (F(x+h) − F(x−h)) / (2h) with F(x) = log₂(1 + x).
    let g = MapSystem::gauss();
    let naive = NormalizedKernel::univariate(KernelKind::Naive);
    for (x, h) in [(0.3, 0.1), (0.5, 0.45), (0.95, 0.2), (0.02, 0.05)] {
        let cdf = |y: f64| (1.0 + y.clamp(0.0, 1.0)).log2();
        let expected = (cdf(x + h) - cdf(x - h)) / (2.0 * h);
        let got = smoothed_density(&g, &naive, h, x).unwrap();
        assert!((got - expected).abs() < 1e-9, "x={x} h={h}: {got} vs {expected}");
    }
}

/// First `m ≥ 3` satisfying both raw inequalities, by plain upward scan.
fn brute_force_scan(first: impl Fn(f64) -> bool, gamma: f64, floor: f64) -> u64 {
    let mut m = 3u64;
    loop {
        let mf = m as f64;
        if first(mf) && mf / mf.ln().powf(2.0 / gamma) >= 4.0 {
            break;
        }
        m += 1;
    }
    m.max(floor.ceil() as u64)
}

#[test]
fn threshold_scan_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let c0 = rng.random_range(0.1..10.0);
        let b = rng.random_range(0.2..5.0);
        let gamma = rng.random_range(0.5..3.0);
        let k0 = rng.random_range(0.2..2.0);
        let d: u32 = rng.random_range(1..=3);
        let h = rng.random_range(0.1..1.0);
        let r = rng.random_range(1.0..5.0);
        let phi_c = rng.random_range(0.5..2.0);
        let mc = MixingConstants { c0, b, gamma, k0 };
        let phi = default_phi(phi_c);

        let n1 = min_sample_size(&mc, &ThresholdMode::N1 { h, d, phi: &phi }).unwrap();
        let rhs = 808.0 * c0 * (3.0 * h.powi(-(d as i32)) * phi_c / h + k0) / (2.0 * k0);
        let oracle = brute_force_scan(
            |m| m.powi(d as i32 + 1) >= rhs,
            gamma,
            ((d as f64 + 1.0) / b).exp(),
        );
        assert_eq!(n1, oracle, "n1 c0={c0} b={b} gamma={gamma} d={d} h={h}");

        let n2 = min_sample_size(&mc, &ThresholdMode::N2 { r, psi: &default_psi }).unwrap();
        let rhs = 808.0 * c0 * (3.0 * 4.0 / (3.0 * r) + 1.0);
        let oracle = brute_force_scan(|m| m * m >= rhs, gamma, (3.0 / b).exp());
        assert_eq!(n2, oracle, "n2 c0={c0} b={b} gamma={gamma} r={r}");
    }
}

#[test]
fn threshold_worked_example() {
    // (808 · 13 / 2)^{1/2} ≈ 72.47; m / (ln m)² first reaches 4 at m = 75.
    let rhs: f64 = 808.0 * (3.0 * 2.0 * 2.0 + 1.0) / 2.0;
    assert!((rhs.sqrt() - 72.47).abs() < 0.01);
    let ratio = |m: f64| m / m.ln().powi(2);
    assert!(ratio(74.0) < 4.0 && ratio(75.0) >= 4.0);
    let oracle = brute_force_scan(|m| m * m >= rhs, 1.0, 2f64.exp());
    assert_eq!(oracle, 75);
}
