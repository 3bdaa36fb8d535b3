use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dynkde::analysis::{
    default_phi, default_psi, min_sample_size, rate_schedule, ExpTailExponent, MixingConstants, RateCase,
    RateQuery, ThresholdMode,
};
use dynkde::bandwidth::{select_bandwidth, select_oracle, BandwidthGrid, ScoreConfig, SelectorId};
use dynkde::dynsys::GOLDEN_RATIO;
use dynkde::harness::{emit_density_curve, emit_report, run_experiment, CurveConfig, ExperimentConfig, ReportFormat};
use dynkde::io::{format_float, read_sample_file, write_sample, write_table};
use dynkde::{
    DensityEstimate, Error, KernelKind, MapSystem, NormalizedKernel, PreparedSample, SystemKind, TrajectoryConfig,
    UniformGrid,
};

#[derive(Parser)]
#[command(name = "dynkde", version, about = "Kernel density estimation for chaotic-map trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a noisy trajectory as `i,x` CSV.
    Simulate {
        #[arg(long)]
        system: SystemKind,
        /// Base of the β-map.
        #[arg(long, default_value_t = GOLDEN_RATIO)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed initial state instead of a draw from the invariant law.
        #[arg(long)]
        x0: Option<f64>,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the density estimate at query points as `x,fhat` CSV.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "gaussian")]
        kernel: KernelKind,
        #[arg(long)]
        h: f64,
        /// A CSV of query points, or `grid:M` for the M-point midpoint grid of (0, 1).
        #[arg(long, default_value = "grid:100")]
        queries: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a bandwidth grid and report the selected bandwidth.
    Select {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        selector: SelectorId,
        #[arg(long, default_value = "gaussian")]
        kernel: KernelKind,
        /// True system, required by the baseline.
        #[arg(long)]
        system: Option<SystemKind>,
        #[arg(long, default_value_t = GOLDEN_RATIO)]
        beta: f64,
        #[arg(long, default_value_t = 100)]
        grid_count: usize,
        /// Points of the AME grid used by the baseline.
        #[arg(long, default_value_t = 10_000)]
        ame_m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bandwidth and rate schedules of the convergence theorems.
    Rates {
        #[arg(long = "case")]
        case: CaseArg,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        /// Logarithmic exponent of the exponential-tail case.
        #[arg(long, value_enum, default_value_t = ExponentArg::Theorem)]
        exp_exponent: ExponentArg,
    },
    /// Minimal sample sizes from the concentration bounds.
    Thresholds {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Kernel value at the origin.
        #[arg(long, default_value_t = 1.0)]
        k0: f64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        /// Constant `c` in φ(h) = c / h.
        #[arg(long, default_value_t = 1.0)]
        phi_c: f64,
    },
    /// Run a replicated selector comparison.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_report: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Worker threads; all cores if omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// True density with baseline and DKM estimates as `u,f_true,f_baseline,f_dkm` CSV.
    Curves {
        #[arg(long)]
        system: SystemKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Poly,
    Exp,
    Compact,
    Linf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExponentArg {
    Theorem,
    Proof,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    N1,
    N2,
    #[value(name = "n0star")]
    N0Star,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn output(path: Option<&Path>) -> dynkde::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn queries(spec: &str) -> dynkde::Result<Vec<f64>> {
    if let Some(m) = spec.strip_prefix("grid:") {
        let m: usize = m
            .parse()
            .map_err(|_| Error::Parse(format!("`{spec}`: expected grid:<count>")))?;
        return Ok(UniformGrid::unit(m)?.points());
    }
    Ok(read_sample_file(Path::new(spec))?.values().to_vec())
}

fn need(name: &str, v: Option<f64>) -> dynkde::Result<f64> {
    v.ok_or_else(|| Error::InvalidParameter(format!("--{name} is required here")))
}

fn run(cli: Cli) -> dynkde::Result<()> {
    match cli.command {
        Command::Simulate { system, beta, n, sigma, seed, x0, out } => {
            let sys = MapSystem::from_kind(system, beta)?;
            let mut cfg = TrajectoryConfig::new(n, sigma, seed);
            if let Some(x0) = x0 {
                cfg = cfg.with_x0(x0);
            }
            let sample = sys.generate_trajectory(&cfg)?;
            write_sample(&sample, output(out.as_deref())?)
        }
        Command::Estimate { input, kernel, h, queries: spec, out } => {
            let sample = read_sample_file(&input)?;
            let est = DensityEstimate::new(&sample, NormalizedKernel::univariate(kernel), h)?;
            let xs = queries(&spec)?;
            let values = est.evaluate_many(&xs);
            let rows: Vec<Vec<f64>> = xs.iter().zip(values).map(|(&x, f)| vec![x, f]).collect();
            write_table(output(out.as_deref())?, &["x", "fhat"], &rows)
        }
        Command::Select { input, selector, kernel, system, beta, grid_count, ame_m, out } => {
            let sample = read_sample_file(&input)?;
            let data = PreparedSample::new(&sample)?;
            let kernel = NormalizedKernel::univariate(kernel);
            let grid = BandwidthGrid::for_sample(&data, &kernel, grid_count)?;
            if grid.degenerate {
                eprintln!("warning: oversmoothing bound below the smallest gap; grid is [h_L, 2 h_L]");
            }
            let result = if selector.is_oracle() {
                let system = system.ok_or_else(|| {
                    Error::InvalidParameter("the baseline needs --system for the true density".into())
                })?;
                let sys = MapSystem::from_kind(system, beta)?;
                select_oracle(&data, &kernel, &grid, &sys, &UniformGrid::unit(ame_m)?)?
            } else {
                select_bandwidth(selector, &data, &kernel, &grid, &ScoreConfig::default())?
            };
            let mut w = output(out.as_deref())?;
            writeln!(w, "h,score")?;
            for (h, s) in &result.scores {
                writeln!(w, "{},{}", format_float(*h), format_float(*s))?;
            }
            writeln!(w, "h_star,{}", format_float(result.h_star))?;
            w.flush()?;
            Ok(())
        }
        Command::Rates { case, n, alpha, d, gamma, eta, a, exp_exponent } => {
            let case = match case {
                CaseArg::Compact => RateCase::Compact,
                CaseArg::Linf => RateCase::LInf,
                CaseArg::Poly => RateCase::PolyTail { eta: need("eta", eta)? },
                CaseArg::Exp => RateCase::ExpTail {
                    a: need("a", a)?,
                    eta: need("eta", eta)?,
                    exponent: match exp_exponent {
                        ExponentArg::Theorem => ExpTailExponent::Theorem,
                        ExponentArg::Proof => ExpTailExponent::Proof,
                    },
                },
            };
            let s = rate_schedule(&RateQuery { case, n, alpha, d, gamma })?;
            println!("h_n,{}", format_float(s.h));
            println!("eps_n,{}", format_float(s.eps));
            Ok(())
        }
        Command::Thresholds { mode, c0, b, gamma, d, k0, h, r, phi_c } => {
            let mc = MixingConstants { c0, b, gamma, k0 };
            let phi = default_phi(phi_c);
            let m = match mode {
                ModeArg::N1 => min_sample_size(&mc, &ThresholdMode::N1 { h: need("h", h)?, d, phi: &phi })?,
                ModeArg::N0Star => {
                    min_sample_size(&mc, &ThresholdMode::N0Star { h: need("h", h)?, d, phi: &phi })?
                }
                ModeArg::N2 => min_sample_size(&mc, &ThresholdMode::N2 { r: need("r", r)?, psi: &default_psi })?,
            };
            println!("{m}");
            Ok(())
        }
        Command::Experiment { config, out_report, format, threads } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            if let Some(t) = threads {
                if t == 0 {
                    return Err(Error::Config("--threads must be at least 1".into()));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
            let report = run_experiment(&cfg)?;
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Json => ReportFormat::Json,
            };
            emit_report(&report, format, &out_report)?;
            let violations = report.oracle_violations();
            if !violations.is_empty() {
                eprintln!("warning: {} replications where a selector beat the baseline", violations.len());
            }
            Ok(())
        }
        Command::Curves { system, n, seed, sigma, points, out } => {
            let mut cfg = CurveConfig::new(system, n, seed);
            cfg.sigma = sigma;
            cfg.points = points;
            let curve = emit_density_curve(&cfg, &out)?;
            eprintln!(
                "h_baseline = {}, h_dkm = {}",
                format_float(curve.h_baseline),
                format_float(curve.h_dkm)
            );
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
