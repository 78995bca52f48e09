use bbdet_cli::output::{emit, Format};
use bbdet_cli::{list_presets, run_experiment, run_preset, with_workers, CliError, CliResult, Experiment, PresetOptions, RunConfig, RunManifest};
use bbdet_core::{PerturbationConfig, PotentialSpec, ReplicaPlan, Statistics};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bbdet", version, about = "Brownian-bridge determinant estimates of fermionic partition functions and mean-field energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact partition function and mean-field energy of the harmonic trap.
    ExactHo(RunArgs),
    /// Partition function estimate.
    EstimateZ(RunArgs),
    /// Mean-field energy estimate (the partition function comes along).
    EstimateH(RunArgs),
    /// Full permutation-sum estimate, n <= 8.
    Tensor(RunArgs),
    /// Perturbation indicator next to the plain estimate.
    Perturb(RunArgs),
    /// Independent replicas of the partition function estimate.
    Replicas(RunArgs),
    /// Runs a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
        /// Replica count (fig-histogram) or independent seeds (fig1).
        #[arg(long)]
        replicas: Option<u64>,
    },
    /// Lists presets.
    #[command(alias = "list")]
    Presets,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count M_x.
    #[arg(long)]
    samples: Option<u64>,
    /// Time step Δt.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialArg {
    Harmonic,
    HarmonicCoulomb,
    Free,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatisticsArg {
    Fermion,
    Boson,
    Distinguishable,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Coulomb coupling; implies harmonic-coulomb unless --potential says otherwise.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    potential: Option<PotentialArg>,
    #[arg(long, value_enum)]
    statistics: Option<StatisticsArg>,
    /// Per-particle spins, e.g. 0.5,0.5,-0.5.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    spins: Option<Vec<f64>>,
    /// Value to report relative differences against.
    #[arg(long)]
    reference: Option<f64>,
    /// Replica count M1 (replicas); M2 is --samples.
    #[arg(long)]
    m1: Option<u64>,
    #[arg(long)]
    c_star: Option<f64>,
    #[arg(long)]
    n_xi: Option<usize>,
    #[arg(long)]
    delta_beta: Option<f64>,
}

fn build_config(experiment: Experiment, a: &RunArgs) -> CliResult<RunConfig> {
    let mut cfg = match &a.common.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let (Some(n), Some(beta)) = (a.n, a.beta) else {
                return Err(CliError::Invalid("pass --config or at least --n and --beta".into()));
            };
            RunConfig::new(experiment, n, 3, beta, PotentialSpec::harmonic())
        }
    };
    cfg.experiment = experiment;
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(d) = a.dim {
        cfg.d = d;
    }
    if let Some(b) = a.beta {
        cfg.beta = b;
    }
    let lambda = a.lambda.unwrap_or(cfg.potential.lambda);
    match (a.potential, a.lambda) {
        (Some(PotentialArg::Harmonic), _) => cfg.potential = PotentialSpec::harmonic(),
        (Some(PotentialArg::Free), _) => cfg.potential = PotentialSpec::free(),
        (Some(PotentialArg::HarmonicCoulomb), _) | (None, Some(_)) => cfg.potential = PotentialSpec::harmonic_coulomb(lambda),
        (None, None) => {}
    }
    if let Some(s) = a.statistics {
        cfg.statistics = match s {
            StatisticsArg::Fermion => Statistics::Fermion,
            StatisticsArg::Boson => Statistics::Boson,
            StatisticsArg::Distinguishable => Statistics::Distinguishable,
        };
    }
    if a.spins.is_some() {
        cfg.spins = a.spins.clone();
    }
    if a.reference.is_some() {
        cfg.reference = a.reference;
    }
    let c = &a.common;
    if let Some(dt) = c.dt {
        cfg = cfg.with_dt(dt);
    }
    if let Some(s) = c.samples {
        cfg.samples = s;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
    if c.out.is_some() {
        cfg.output = c.out.clone();
    }
    if a.c_star.is_some() || a.n_xi.is_some() || a.delta_beta.is_some() {
        let mut p = cfg.perturbation.unwrap_or_default();
        p.c_star = a.c_star.unwrap_or(p.c_star);
        p.n_xi = a.n_xi.unwrap_or(p.n_xi);
        p.delta_beta = a.delta_beta.unwrap_or(p.delta_beta);
        cfg.perturbation = Some(p);
    } else if experiment == Experiment::Perturb && cfg.perturbation.is_none() {
        cfg.perturbation = Some(PerturbationConfig::default());
    }
    if let Some(m1) = a.m1 {
        cfg.replicas = Some(ReplicaPlan { m1, m2: cfg.samples });
    } else if let Some(plan) = &mut cfg.replicas {
        if c.samples.is_some() {
            plan.m2 = cfg.samples;
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<(RunManifest, Option<PathBuf>, Format)> {
    let (experiment, args) = match cli.command {
        Command::Presets => {
            for line in list_presets() {
                println!("{line}");
            }
            std::process::exit(0);
        }
        Command::Preset { name, common, replicas } => {
            if common.config.is_some() {
                return Err(CliError::Invalid("presets carry their own configuration; drop --config".into()));
            }
            let opts = PresetOptions { samples: common.samples, seed: common.seed, replicas, delta_t: common.dt };
            let m = with_workers(common.workers, || run_preset(&name, &opts))??;
            return Ok((m, common.out, common.format));
        }
        Command::ExactHo(a) => (Experiment::ExactHo, a),
        Command::EstimateZ(a) => (Experiment::EstimateZ, a),
        Command::EstimateH(a) => (Experiment::EstimateH, a),
        Command::Tensor(a) => (Experiment::Tensor, a),
        Command::Perturb(a) => (Experiment::Perturb, a),
        Command::Replicas(a) => (Experiment::Replicas, a),
    };
    let cfg = build_config(experiment, &args)?;
    let m = with_workers(cfg.workers, || run_experiment(&cfg))??;
    Ok((m, cfg.output.clone(), args.common.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(m, out, format)| {
        emit(&m, out.as_deref(), format)?;
        Ok(m)
    });
    match result {
        Ok(m) if m.failures.is_empty() => ExitCode::SUCCESS,
        Ok(m) => {
            for f in &m.failures {
                eprintln!("estimation failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
