//! `jobs`: command-line front end for jobs-core.
//!
//! stdout carries only machine-readable output (CSV rows or single values);
//! diagnostics go to stderr. Exit codes: 0 success, 1 parameter or domain
//! error, 2 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jobs_core::analysis::{
    bagging_error_bound, brip_jobs_with_cap, jobs_error_bound, rip_constant_exhaustive,
    sample_complexity_jobs, BoundInputs, RipQuery, DEFAULT_ENUMERATION_CAP,
};
use jobs_core::estimators::PreparedRecovery;
use jobs_core::experiments::{
    generate_instance, log_grid, recovery_snr, run_sweep, InstanceSpec, NoiseCalibration,
    SweepSpec,
};
use jobs_core::sampling::{distinct_count_pmf, distinct_lower_bound, distinct_tail, generate_subsets};
use jobs_core::{io, linalg, Error, Method, Result, SamplingPlan, Scheme, SensingProblem, SolverConfig};

#[derive(Parser)]
#[command(name = "jobs", version, about = "Joint-sparse recovery from bootstrap samples")]
struct Cli {
    /// Worker threads for parallel sections (0 = one per core). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write A.txt, x_star.txt, y.txt and z.txt.
    Generate(GenerateArgs),
    /// Run one recovery method on a stored problem.
    Solve(SolveArgs),
    /// Run a (method x m x K x L/m) sweep and append results to a CSV file.
    Sweep(SweepArgs),
    /// Exhaustive RIP constant of a matrix, or the JOBS block-RIP constant.
    Rip(RipArgs),
    /// Evaluate the JOBS or Bagging error bound and its probability.
    Bounds(BoundsArgs),
    /// Distinct-measurement count required by the JOBS sample-complexity condition.
    Complexity(ComplexityArgs),
    /// Distribution of the number of distinct indices among L draws from m.
    Birthday(BirthdayArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of measurements (rows of A).
    #[arg(long)]
    m: usize,
    /// Signal dimension (columns of A).
    #[arg(long)]
    n: usize,
    /// Number of nonzeros in x*.
    #[arg(long)]
    s: usize,
    /// Measurement SNR in dB; `inf` for noiseless data.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: f64,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Use σ² = 10^(-SNR/10)‖Ax*‖² without dividing by m.
    #[arg(long)]
    literal_noise: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Jobs,
    Bagging,
    Bolasso,
    L1,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Jobs => Method::Jobs,
            MethodArg::Bagging => Method::Bagging,
            MethodArg::Bolasso => Method::Bolasso,
            MethodArg::L1 => Method::L1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Bootstrap,
    Subsample,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Bootstrap => Scheme::Bootstrap,
            SchemeArg::Subsample => Scheme::Subsample,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// ADMM penalty parameter.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// ADMM iteration limit.
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Absolute residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps_abs: f64,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-4)]
    eps_rel: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Sensing matrix file (m x n).
    #[arg(long)]
    a: PathBuf,
    /// Measurement file (m x 1).
    #[arg(long)]
    y: PathBuf,
    /// Ground truth file (n x 1); enables the rsnr_db column.
    #[arg(long)]
    x_star: Option<PathBuf>,
    /// Regularization weight λ (dimensionless, same units as y).
    #[arg(long)]
    lambda: f64,
    /// Number of index sets (ensemble methods).
    #[arg(long = "K")]
    k: Option<usize>,
    /// Index-set size (ensemble methods); alternative to --ratio.
    #[arg(long = "L", conflicts_with = "ratio")]
    l: Option<usize>,
    /// Index-set size as a fraction of m, rounded, at least 1.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long, value_enum, default_value = "bootstrap")]
    scheme: SchemeArg,
    /// Seed for the index sets (ensemble methods).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative support threshold for Bolasso.
    #[arg(long, default_value_t = linalg::DEFAULT_SUPPORT_TOL)]
    rel_tol: f64,
    /// Write the estimate here (n x 1).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep specification; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (appended to; completed cells are skipped).
    #[arg(long)]
    out: PathBuf,
    /// Measurement counts.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    /// SNR values in dB (`inf` allowed).
    #[arg(long = "snr-db", value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    methods: Option<Vec<MethodArg>>,
    /// Numbers of index sets.
    #[arg(long = "K", value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Index-set sizes as fractions of m, in (0, 1].
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Explicit ascending λ grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["lambda_min", "lambda_max", "lambda_count"])]
    lambdas: Option<Vec<f64>>,
    /// Smallest λ of a log-spaced grid.
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Largest λ of a log-spaced grid.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Number of log-spaced λ values.
    #[arg(long)]
    lambda_count: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    literal_noise: bool,
    /// Solve every λ from zero instead of from the next larger λ.
    #[arg(long)]
    no_warm_start: bool,
    /// Fill the wall_ms column (makes the CSV run-dependent).
    #[arg(long)]
    record_wall_time: bool,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eps_abs: Option<f64>,
    #[arg(long)]
    eps_rel: Option<f64>,
}

#[derive(Args)]
struct RipArgs {
    /// Matrix file.
    #[arg(long)]
    a: PathBuf,
    /// Sparsity order.
    #[arg(long)]
    s: usize,
    /// Scale columns to unit norm first (otherwise they must already be unit).
    #[arg(long)]
    normalize: bool,
    /// Maximum number of column subsets to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
    /// Block-RIP of JOBS with this many index sets.
    #[arg(long = "K", requires = "l")]
    k: Option<usize>,
    /// Index-set size for block-RIP.
    #[arg(long = "L", requires = "k")]
    l: Option<usize>,
    #[arg(long, value_enum, default_value = "bootstrap")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Theorem {
    JobsExact,
    JobsGeneral,
    BaggingExact,
    BaggingGeneral,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    theorem: Theorem,
    /// RIP constant, in [0, sqrt(2)-1).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long = "K", default_value_t = 1)]
    k: usize,
    /// Slack τ > 0.
    #[arg(long)]
    tau: f64,
    /// ‖z‖₂ (for jobs-general: ‖Ae + z‖₂).
    #[arg(long, default_value_t = 0.0)]
    z_l2: f64,
    /// ‖z‖∞.
    #[arg(long, default_value_t = 0.0)]
    z_linf: f64,
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// ‖e‖₁ of the sparse-approximation error.
    #[arg(long, default_value_t = 0.0)]
    e_l1: f64,
    /// ‖e‖₂.
    #[arg(long, default_value_t = 0.0)]
    e_l2: f64,
    /// ‖e‖∞.
    #[arg(long, default_value_t = 0.0)]
    e_linf: f64,
    /// Largest row l1 norm of A.
    #[arg(long, default_value_t = 0.0)]
    a_inf1: f64,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: usize,
    #[arg(long = "K")]
    k: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    mu: f64,
    /// Universal constant; results are comparative only.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
struct BirthdayArgs {
    /// Population size.
    #[arg(long)]
    m: usize,
    /// Number of draws.
    #[arg(long = "L")]
    l: usize,
    /// Print P(V >= d) instead of the pmf.
    #[arg(long, conflicts_with = "alpha")]
    tail: Option<usize>,
    /// Print the largest d with P(V >= d) >= 1 - alpha.
    #[arg(long)]
    alpha: Option<f64>,
}

fn solver_config(lambda: f64, s: &SolverArgs) -> SolverConfig {
    SolverConfig {
        lambda,
        rho: s.rho,
        max_iter: s.max_iter,
        eps_abs: s.eps_abs,
        eps_rel: s.eps_rel,
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let inst = generate_instance(&InstanceSpec {
        m: args.m,
        n: args.n,
        s: args.s,
        snr_db: args.snr_db,
        seed: args.seed,
        noise: if args.literal_noise {
            NoiseCalibration::Literal
        } else {
            NoiseCalibration::PerMeasurement
        },
    })?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        message: e.to_string(),
    })?;
    io::write_matrix(args.out.join("A.txt"), &inst.a)?;
    io::write_vector(args.out.join("x_star.txt"), &inst.x_star)?;
    io::write_vector(args.out.join("y.txt"), &inst.y)?;
    io::write_vector(args.out.join("z.txt"), &inst.z)?;
    eprintln!("wrote A.txt, x_star.txt, y.txt, z.txt to {}", args.out.display());
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let method: Method = args.method.into();
    if method.is_ensemble() && args.k.is_none() {
        return Err(Error::Parameter(format!("{method} needs --K")));
    }
    let problem = SensingProblem::new(io::read_matrix(&args.a)?, io::read_vector(&args.y)?)?;
    let x_star = args.x_star.as_deref().map(io::read_vector).transpose()?;
    let cfg = solver_config(args.lambda, &args.solver);
    cfg.validate()?;
    let subsets = if method.is_ensemble() {
        let k = args.k.unwrap_or_default();
        let l = match (args.l, args.ratio) {
            (Some(l), _) => l,
            (None, Some(r)) if r > 0.0 && r <= 1.0 => {
                jobs_core::experiments::subset_size(r, problem.m())
            }
            (None, Some(r)) => return Err(Error::Parameter(format!("ratio {r} must lie in (0, 1]"))),
            (None, None) => return Err(Error::Parameter(format!("{method} needs --L or --ratio"))),
        };
        generate_subsets(&SamplingPlan {
            m: problem.m(),
            subset_size: l,
            count: k,
            scheme: args.scheme.into(),
            master_seed: args.seed,
        })?
    } else {
        Vec::new()
    };
    let res = PreparedRecovery::new(method, &problem, &subsets, cfg.rho)?
        .with_support_tol(args.rel_tol)?
        .recover(&cfg, None)?;
    let rsnr = match &x_star {
        Some(x) => recovery_snr(res.x_hat.as_slice(), x.as_slice())?.to_string(),
        None => String::new(),
    };
    if let Some(out) = &args.out {
        io::write_vector(out, &res.x_hat)?;
    }
    println!("method,lambda,rsnr_db,support_size,iterations,converged");
    println!(
        "{},{},{},{},{},{}",
        method,
        args.lambda,
        rsnr,
        res.support.len(),
        res.iterations(),
        res.converged()
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(p) => SweepSpec::load(p)?,
        None => SweepSpec::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field.clone() { spec.$field = v; })* };
    }
    set!(m, n, s, snr_db, k, ratios, lambdas, trials, seed, rho, max_iter, eps_abs, eps_rel);
    if let Some(methods) = &args.methods {
        spec.methods = methods.iter().map(|&m| m.into()).collect();
    }
    if let Some(s) = args.scheme {
        spec.scheme = s.into();
    }
    if args.lambda_min.is_some() || args.lambda_max.is_some() || args.lambda_count.is_some() {
        spec.lambdas = log_grid(
            args.lambda_min.unwrap_or(0.01),
            args.lambda_max.unwrap_or(200.0),
            args.lambda_count.unwrap_or(30),
        )?;
    }
    spec.literal_noise |= args.literal_noise;
    spec.warm_start &= !args.no_warm_start;
    spec.record_wall_time |= args.record_wall_time;
    let records = run_sweep(&spec, &args.out)?;
    eprintln!("{} rows in {}", records.len(), args.out.display());
    Ok(())
}

fn rip(args: RipArgs) -> Result<()> {
    let a = io::read_matrix(&args.a)?;
    let value = match (args.k, args.l) {
        (Some(k), Some(l)) => {
            let subsets = generate_subsets(&SamplingPlan {
                m: a.rows(),
                subset_size: l,
                count: k,
                scheme: args.scheme.into(),
                master_seed: args.seed,
            })?;
            brip_jobs_with_cap(&a, &subsets, args.s, args.cap)?
        }
        _ => {
            let a = if args.normalize {
                linalg::normalize_columns(&a)?.0
            } else {
                a
            };
            rip_constant_exhaustive(&RipQuery {
                a,
                s: args.s,
                cap: args.cap,
            })?
        }
    };
    println!("{value}");
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let inputs = BoundInputs {
        delta: args.delta,
        l: args.l,
        m: args.m,
        k: args.k,
        tau: args.tau,
        z_l2: args.z_l2,
        z_linf: args.z_linf,
        s: args.s,
        e_l1: args.e_l1,
        e_l2: args.e_l2,
        e_linf: args.e_linf,
        a_inf1: args.a_inf1,
    };
    let out = match args.theorem {
        Theorem::JobsExact => jobs_error_bound(&inputs, true)?,
        Theorem::JobsGeneral => jobs_error_bound(&inputs, false)?,
        Theorem::BaggingExact => bagging_error_bound(&inputs, true)?,
        Theorem::BaggingGeneral => bagging_error_bound(&inputs, false)?,
    };
    if out.clamped {
        eprintln!("note: the probability expression fell outside [0, 1] and was clamped");
    }
    println!("bound,probability");
    println!("{},{}", out.error_bound, out.probability_lower_bound);
    Ok(())
}

fn complexity(args: ComplexityArgs) -> Result<()> {
    let d = sample_complexity_jobs(args.n, args.s, args.k, args.alpha, args.mu, args.beta, args.delta)?;
    println!("{d}");
    Ok(())
}

fn birthday(args: BirthdayArgs) -> Result<()> {
    if let Some(d) = args.tail {
        println!("{}", distinct_tail(args.m, args.l, d)?);
    } else if let Some(alpha) = args.alpha {
        println!("{}", distinct_lower_bound(args.m, args.l, alpha)?);
    } else {
        println!("v,p");
        for (i, p) in distinct_count_pmf(args.m, args.l)?.iter().enumerate() {
            println!("{},{}", i + 1, p);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Rip(a) => rip(a),
        Command::Bounds(a) => bounds(a),
        Command::Complexity(a) => complexity(a),
        Command::Birthday(a) => birthday(a),
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_io() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: cannot configure {} threads: {e}", cli.threads);
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
