use clap::{Args, Parser, Subcommand, ValueEnum};
use nodallab::analytics::{self, BoundCertificate};
use nodallab::diagnostics::{self, Prefactors, RareEventOptions};
use nodallab::ensembles::{
    read_grid, reference_grid, sample, write_grid, EnsembleSpec, ReferenceKind, Variant, DEFAULT_PAD, DEFAULT_SPACING,
};
use nodallab::harness::{self, ExperimentConfig, ExportFormat};
use nodallab::measures::{lattice_points, SpectralMeasure};
use nodallab::nodal::{self, decompose};
use nodallab::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nodallab", version, about = "Nodal sets of Gaussian Laplace eigenfunctions")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sample-parallel work.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EnsembleArgs {
    #[arg(long, value_enum, default_value_t = Ensemble::Mrw)]
    ensemble: Ensemble,
    /// `uniform`, `density:<file>`, or `arw:<n>`.
    #[arg(long, default_value = "uniform")]
    measure: String,
    /// Degree of the spherical ensemble.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SPACING)]
    h: f64,
    #[arg(long, default_value_t = DEFAULT_PAD)]
    pad: f64,
    /// Bessel-series truncation (default: per radius).
    #[arg(long)]
    truncation: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ensemble {
    Mrw,
    Rsh,
    Arw,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one field (or a reference field) on a grid.
    Sample {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long = "R", default_value_t = 10.0)]
        r: f64,
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// `radial_j0`, `disc_quadratic`, `bessel_mode:<n>` or `f0tilde`.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Decompose a stored grid and export component and domain records.
    Decompose {
        #[arg(long)]
        grid: PathBuf,
        /// Counting radius (default: the grid's window radius).
        #[arg(long = "R")]
        r: Option<f64>,
    },
    /// Concentration experiment over a radius schedule.
    Experiment {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Configuration file; overrides the ensemble flags.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated radii.
        #[arg(long = "R", value_delimiter = ',', default_value = "20")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.02")]
        eps: Vec<f64>,
    },
    /// Empirical tree-end distribution at one radius.
    Treeends {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long = "R", default_value_t = 40.0)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Run one certificate.
    Validate {
        #[arg(value_enum)]
        target: Target,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Parameter schedule, unstable discs or the rare-event construction.
    Diagnose {
        #[arg(value_enum)]
        kind: Diagnosis,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "R", default_value_t = 20.0)]
        r: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        /// Disc radius for `unstable`.
        #[arg(long, default_value_t = 1.0)]
        disc: f64,
        #[arg(long, default_value_t = 0.0004)]
        rho: f64,
        #[arg(long, default_value_t = 0.02)]
        kappa: f64,
        #[arg(long, default_value_t = 5)]
        draws: u64,
    },
    /// Lattice points of a norm `n = a² + b²`.
    Lattice {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    LegendreL2,
    Normalization,
    Bernstein,
    ExpDecay,
    Ode,
    Bessel,
    NormMrw,
    NormRsh,
    EquiArw,
    FaberKrahn,
    ScalingLimit,
    Sandwich,
    Yau,
}

#[derive(Clone, Copy, ValueEnum)]
enum Diagnosis {
    Schedule,
    Unstable,
    Rare,
}

impl EnsembleArgs {
    fn spec(&self, r: f64, seed: u64) -> Result<EnsembleSpec> {
        let variant = match self.ensemble {
            Ensemble::Mrw => {
                if self.measure.starts_with("arw:") {
                    return Err(Error::InvalidSpec("arw:<n> measures need --ensemble arw".into()));
                }
                let measure = harness::parse_measure(&self.measure)?;
                let truncation = self.truncation.unwrap_or(nodallab::ensembles::default_truncation(r));
                Variant::Mrw { measure, truncation }
            }
            Ensemble::Rsh => Variant::Rsh {
                n: self
                    .degree
                    .ok_or_else(|| Error::InvalidSpec("--ensemble rsh needs --degree".into()))?,
            },
            Ensemble::Arw => {
                let n = self
                    .measure
                    .strip_prefix("arw:")
                    .ok_or_else(|| Error::InvalidSpec("--ensemble arw needs --measure arw:<n>".into()))?;
                Variant::Arw {
                    n: n.parse().map_err(|_| Error::Parse(format!("bad lattice norm '{n}'")))?,
                }
            }
        };
        EnsembleSpec::new(variant, r, self.h, self.pad, seed)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn reference_kind(name: &str) -> Result<ReferenceKind> {
    Ok(match name {
        "radial_j0" => ReferenceKind::RadialJ0,
        "disc_quadratic" => ReferenceKind::DiscQuadratic,
        "f0tilde" => ReferenceKind::F0Tilde(SpectralMeasure::Uniform),
        other => match other.strip_prefix("bessel_mode:") {
            Some(n) => ReferenceKind::BesselMode(n.parse().map_err(|_| Error::Parse(format!("bad order '{n}'")))?),
            None => return Err(Error::Parse(format!("unknown reference '{other}'"))),
        },
    })
}

fn rpw_decompositions(
    r: f64,
    pad: f64,
    count: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<nodal::NodalDecomposition>> {
    use rayon::prelude::*;
    let spec = EnsembleSpec::rpw(r, DEFAULT_SPACING, pad, seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(e.to_string()))?;
    pool.install(|| {
        (0..count as u64)
            .into_par_iter()
            .map(|i| decompose(&sample(&spec, i)?))
            .collect()
    })
}

fn validate(
    target: Target,
    nmax: Option<usize>,
    trials: Option<usize>,
    seed: u64,
    workers: usize,
) -> Result<Vec<BoundCertificate>> {
    let trials = trials.unwrap_or(20);
    Ok(match target {
        Target::LegendreL2 => {
            vec![analytics::certify_legendre_l2(nmax.unwrap_or(150), 64)?.certificate]
        }
        Target::Normalization => vec![analytics::certify_legendre_normalization(nmax.unwrap_or(100))?],
        Target::Bernstein => vec![analytics::certify_bernstein(nmax.unwrap_or(150), 1024)?],
        Target::ExpDecay => {
            vec![analytics::certify_exponential_decay(5, nmax.unwrap_or(40), 256)?.certificate]
        }
        Target::Ode => vec![analytics::certify_ode_residual(2, nmax.unwrap_or(10))?.certificate],
        Target::Bessel => {
            let rep = analytics::certify_bessel(20, nmax.unwrap_or(100), 64)?;
            vec![rep.growth, rep.recurrence]
        }
        Target::NormMrw => {
            vec![
                analytics::certify_norm_relation_mrw(&SpectralMeasure::Uniform, &[10.0, 20.0, 40.0], trials, seed)?
                    .certificate,
            ]
        }
        Target::NormRsh => {
            vec![analytics::certify_norm_relation_rsh(nmax.unwrap_or(50), 30.0, trials, seed)?.certificate]
        }
        Target::EquiArw => {
            vec![analytics::certify_equidistribution_arw(5525, 80.0, trials, seed)?.certificate]
        }
        Target::FaberKrahn => rpw_decompositions(30.0, 1.0, trials, seed, workers)?
            .iter()
            .map(analytics::faber_krahn_check)
            .collect::<Result<_>>()?,
        Target::ScalingLimit => {
            let pairs = analytics::scaling_pairs(40, 5.0);
            vec![analytics::scaling_limit_check(&[100, nmax.unwrap_or(400)], &pairs, 0.02)?.certificate]
        }
        Target::Sandwich => rpw_decompositions(30.0, 11.0, trials, seed, workers)?
            .iter()
            .map(|d| analytics::sandwich_check(d, 5.0, 30.0, None).map(|r| r.certificate))
            .collect::<Result<_>>()?,
        Target::Yau => {
            let mut samples = Vec::new();
            for n in [50usize, 100, 200] {
                let spec = EnsembleSpec::new(Variant::Rsh { n }, 15.0, DEFAULT_SPACING, 1.0, seed)?;
                let decs = (0..trials.max(analytics::YAU_MIN_SAMPLES) as u64)
                    .map(|i| decompose(&sample(&spec, i)?))
                    .collect::<Result<Vec<_>>>()?;
                samples.push((n, decs));
            }
            vec![analytics::yau_band_check(&samples, 15.0)?.certificate]
        }
    })
}

fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Sample {
            ensemble,
            r,
            index,
            reference,
        } => {
            let grid = match reference {
                Some(name) => reference_grid(&reference_kind(&name)?, r, ensemble.pad, ensemble.h)?,
                None => sample(&ensemble.spec(r, seed)?, index)?,
            };
            match &cli.out {
                Some(p) => write_grid(&grid, p)?,
                None => print!("{}", grid.to_text()),
            }
        }
        Command::Decompose { grid, r } => {
            let g = read_grid(&grid)?;
            let radius = r.unwrap_or(g.window_radius);
            emit(&cli.out, &nodal::export(&decompose(&g)?, radius))?;
        }
        Command::Experiment {
            ensemble,
            config,
            r,
            samples,
            eps,
        } => {
            let mut cfg = match config {
                Some(path) => harness::load_config(&path)?,
                None => {
                    let top = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut c = ExperimentConfig::new(ensemble.spec(top, seed)?, samples, r.clone())?;
                    c.truncation = ensemble.truncation;
                    c.eps_list = eps;
                    c
                }
            };
            cfg.workers = cli.workers;
            if cli.out.is_some() {
                cfg.output = cli.out.clone();
            }
            let rec = harness::run_concentration(&cfg)?;
            if cfg.output.is_none() {
                print!("{}", harness::export(&rec, ExportFormat::Rows));
            }
            print!("{}", harness::export(&rec, ExportFormat::Summary));
        }
        Command::Treeends { ensemble, r, samples } => {
            let dist = harness::tree_end_distribution(&ensemble.spec(r, seed)?, r, samples, cli.workers)?;
            let mut text = format!(
                "R={} samples={} components={}\n",
                dist.r, dist.samples, dist.total_components
            );
            for (t, p) in &dist.histogram {
                text.push_str(&format!(
                    "tree_end={} vertices={} frequency={p}\n",
                    t.canonical, t.vertex_count
                ));
            }
            for (t, d) in &dist.top_densities {
                text.push_str(&format!("density tree_end={} per_area={d}\n", t.canonical));
            }
            emit(&cli.out, &text)?;
        }
        Command::Validate { target, nmax, trials } => {
            let certs = validate(target, nmax, trials, seed, cli.workers)?;
            let text: String = certs.iter().map(|c| format!("{c}\n")).collect();
            emit(&cli.out, &text)?;
            if cli.out.is_some() {
                print!("{text}");
            }
            return Ok(certs.iter().all(|c| c.pass));
        }
        Command::Diagnose {
            kind,
            eps,
            r,
            alpha,
            beta,
            disc,
            rho,
            kappa,
            draws,
        } => {
            let text = match kind {
                Diagnosis::Schedule => {
                    let p = diagnostics::ns_parameters(eps, Prefactors::default())?;
                    let mut t = format!(
                        "eps={} alpha={:e} beta={:e} gamma={:e} delta={:e} tau={:e} r={:e} rho={:e} min_square={:e}\n",
                        p.eps, p.alpha, p.beta, p.gamma, p.delta, p.tau, p.r, p.rho, p.min_square
                    );
                    for c in &p.constraints {
                        t.push_str(&format!(
                            "constraint {} lhs={:e} rhs={:e} satisfied={}\n",
                            c.label, c.lhs, c.rhs, c.satisfied
                        ));
                    }
                    t
                }
                Diagnosis::Unstable => {
                    let g = sample(&EnsembleSpec::rpw(r, DEFAULT_SPACING, 1.0, seed)?, 0)?;
                    let rep = diagnostics::find_unstable(&g, alpha, beta, disc)?;
                    format!(
                        "unstable_points={} unstable_discs={} discs={} disc_radius={}\n",
                        rep.unstable_points.len(),
                        rep.unstable_disc_count,
                        rep.disc_count,
                        rep.disc_radius
                    )
                }
                Diagnosis::Rare => {
                    let mut t = String::new();
                    for d in 0..draws {
                        let rep = diagnostics::rare_event_demo(
                            &SpectralMeasure::Uniform,
                            r,
                            rho,
                            kappa,
                            seed,
                            d,
                            &RareEventOptions::default(),
                        )?;
                        t.push_str(&format!(
                            "draw={d} xi0={} block_norm_sq={:e} count={} ratio={} profile_ratio={} below_target={}\n",
                            rep.xi0, rep.block_norm_sq, rep.count, rep.ratio, rep.profile_ratio, rep.below_target
                        ));
                    }
                    t
                }
            };
            emit(&cli.out, &text)?;
        }
        Command::Lattice { n } => {
            let set = lattice_points(n)?;
            let mut text = format!(
                "n={} size={} half_size={}\n",
                set.n,
                set.points.len(),
                set.half_set.len()
            );
            for (a, b) in &set.points {
                text.push_str(&format!("{a} {b}\n"));
            }
            emit(&cli.out, &text)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
