//! `sqrbm` — dataset generation, training, benchmark experiments, and
//! oracle verification for semi-quantum restricted Boltzmann machines.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric failure, 5 verification
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sqrbm_core::datasets::{DatasetFile, DatasetKind, DatasetSpec};
use sqrbm_core::experiments::{compare_table, run_experiment, write_outputs, ExperimentPlan};
use sqrbm_core::model;
use sqrbm_core::oracle;
use sqrbm_core::training::{train, Algorithm, TrainConfig, TrainRecord};
use sqrbm_core::{kl_divergence, Error, Params, VisibleDistribution, Xoshiro256StarStar};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(
    name = "sqrbm",
    version = concat!(env!("CARGO_PKG_VERSION"), " (prng: xoshiro256**)"),
    about = "Exact em and gradient-descent training for semi-quantum RBMs"
)]
struct Cli {
    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset file.
    GenData(GenDataArgs),
    /// Train one model on a dataset file.
    Train(TrainArgs),
    /// Run a multi-run benchmark plan.
    Experiment(ExperimentArgs),
    /// Cross-check every closed form against the dense oracle.
    Verify(VerifyArgs),
    /// Convert a training record to its curve CSV.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Bernoulli,
    RandomSupport,
    Cardinality,
    Parity,
}

impl From<KindArg> for DatasetKind {
    fn from(k: KindArg) -> DatasetKind {
        match k {
            KindArg::Bernoulli => DatasetKind::BernoulliMixture,
            KindArg::RandomSupport => DatasetKind::RandomSupport,
            KindArg::Cardinality => DatasetKind::Cardinality,
            KindArg::Parity => DatasetKind::Parity,
        }
    }
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Number of visible units.
    #[arg(long)]
    n: usize,
    /// Mixture components (bernoulli only).
    #[arg(long)]
    k: Option<usize>,
    /// Alignment probability (bernoulli only).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Gd,
    Em,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Sqrbm,
    Rbm,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset JSON file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    n_hidden: usize,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Freeze transverse fields at zero with `rbm`.
    #[arg(long, value_enum, default_value = "sqrbm")]
    model: ModelArg,
    #[arg(long, default_value_t = 0.2)]
    eta: f64,
    #[arg(long, default_value_t = 1e-7)]
    epsilon: f64,
    #[arg(long)]
    epochs: usize,
    #[arg(long, default_value_t = 1000)]
    epochs_m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5.0)]
    init_range: f64,
    /// Record JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Curve CSV output path (defaults to the record path with a .csv
    /// extension).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Plan JSON file.
    #[arg(long)]
    plan: PathBuf,
    /// Results directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for parallel runs.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct ExportArgs {
    /// Training record JSON file.
    #[arg(long)]
    record: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let code = match cli.command {
        Command::GenData(args) => cmd_gen_data(args, quiet),
        Command::Train(args) => cmd_train(args, quiet),
        Command::Experiment(args) => cmd_experiment(args, quiet),
        Command::Verify(args) => cmd_verify(args, quiet),
        Command::Export(args) => cmd_export(args, quiet),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn classify(err: Error) -> Failure {
    let code = match &err {
        Error::Io { .. } => EXIT_IO,
        Error::Numeric { .. }
        | Error::DivergenceInfinite { .. }
        | Error::EigenNonConvergence { .. }
        | Error::NotSymmetric { .. }
        | Error::ZeroProbabilityCondition { .. }
        | Error::Experiment { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    };
    Failure::new(code, err.to_string())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                Failure::new(EXIT_IO, format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn cmd_gen_data(args: GenDataArgs, quiet: bool) -> Result<(), Failure> {
    let spec = DatasetSpec {
        kind: args.kind.into(),
        n: args.n,
        k: args.k,
        p: args.p,
        seed: args.seed,
    };
    spec.validate()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let dataset = spec.generate().map_err(classify)?;
    let file = DatasetFile::new(&dataset, &spec);
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Failure::new(EXIT_NUMERIC, e.to_string()))?;
    write_file(&args.out, &json)?;
    if !quiet {
        println!(
            "wrote {} ({}, n={}, support={}, entropy={:.6} nats)",
            args.out.display(),
            spec.kind,
            spec.n,
            dataset.dist.support_size(),
            dataset.dist.entropy()
        );
    }
    Ok(())
}

fn load_distribution(path: &Path) -> Result<VisibleDistribution, Failure> {
    let text = read_file(path)?;
    let file: DatasetFile = serde_json::from_str(&text).map_err(|e| {
        Failure::new(
            EXIT_USAGE,
            format!("{} is not a dataset file: {e}", path.display()),
        )
    })?;
    file.distribution()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

#[derive(Serialize)]
struct RecordFile<'a> {
    #[serde(flatten)]
    record: &'a TrainRecord,
    wall_time_secs: f64,
}

fn csv_sibling(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn cmd_train(args: TrainArgs, quiet: bool) -> Result<(), Failure> {
    let data = load_distribution(&args.data)?;
    let cfg = TrainConfig {
        algorithm: match args.algo {
            AlgoArg::Gd => Algorithm::Gd,
            AlgoArg::Em => Algorithm::Em,
        },
        eta: args.eta,
        epsilon: args.epsilon,
        n_epochs: args.epochs,
        n_epochs_m: args.epochs_m,
        seed: args.seed,
        init_range: args.init_range,
        freeze_gamma: matches!(args.model, ModelArg::Rbm),
    };
    cfg.validate()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    let started = Instant::now();
    let outcome = train(&data, args.n_hidden, &cfg);
    let wall_time_secs = started.elapsed().as_secs_f64();

    let csv_path = args.csv.clone().unwrap_or_else(|| csv_sibling(&args.out));
    let write_record = |record: &TrainRecord| -> Result<(), Failure> {
        let file = RecordFile {
            record,
            wall_time_secs,
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| Failure::new(EXIT_NUMERIC, e.to_string()))?;
        write_file(&args.out, &json)?;
        write_file(&csv_path, &record.curve_csv())
    };

    match outcome {
        Ok(record) => {
            write_record(&record)?;
            if !quiet {
                println!(
                    "final KL {} after {} epochs (converged: {})",
                    record.final_kl(),
                    record.epochs_run,
                    record.converged
                );
            }
            Ok(())
        }
        Err(abort) => {
            write_record(&abort.partial)?;
            Err(Failure::new(EXIT_NUMERIC, abort.to_string()))
        }
    }
}

/// A plan file holds either one plan or a list of plans (one per dataset).
#[derive(serde::Deserialize)]
#[serde(untagged)]
enum PlanFileContents {
    One(ExperimentPlan),
    Many(Vec<ExperimentPlan>),
}

fn cmd_experiment(args: ExperimentArgs, quiet: bool) -> Result<(), Failure> {
    let text = read_file(&args.plan)?;
    let contents: PlanFileContents = serde_json::from_str(&text).map_err(|e| {
        Failure::new(
            EXIT_USAGE,
            format!("{} is not a plan file: {e}", args.plan.display()),
        )
    })?;
    let plans = match contents {
        PlanFileContents::One(plan) => vec![plan],
        PlanFileContents::Many(plans) => plans,
    };
    if plans.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "plan file contains no plans"));
    }
    for plan in &plans {
        plan.validate()
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    }

    let started = Instant::now();
    let mut results = Vec::with_capacity(plans.len());
    if plans.len() == 1 {
        let result = run_experiment(&plans[0], args.workers).map_err(classify)?;
        let runtime = started.elapsed().as_secs_f64();
        write_outputs(&result, &args.out, runtime).map_err(classify)?;
        results.push(result);
    } else {
        // one fully populated results directory per plan, plus a combined
        // top-level table
        for (idx, plan) in plans.iter().enumerate() {
            let plan_started = Instant::now();
            let result = run_experiment(plan, args.workers).map_err(classify)?;
            let subdir = args.out.join(format!("{idx:02}_{}", plan.dataset.kind));
            write_outputs(&result, &subdir, plan_started.elapsed().as_secs_f64())
                .map_err(classify)?;
            results.push(result);
        }
        let table_path = args.out.join("table.csv");
        write_file(
            &table_path,
            &sqrbm_core::experiments::compare_table_csv(&results),
        )?;
    }
    let runtime = started.elapsed().as_secs_f64();
    if !quiet {
        print!("{}", compare_table(&results));
        println!(
            "results written to {} in {:.2}s",
            args.out.display(),
            runtime
        );
    }
    Ok(())
}

fn random_params(n: usize, m: usize, rng: &mut Xoshiro256StarStar) -> Params {
    let scale = 2.0;
    Params::new(
        (0..n).map(|_| rng.uniform_symmetric(scale)).collect(),
        (0..m).map(|_| rng.uniform_symmetric(scale)).collect(),
        (0..m).map(|_| rng.uniform_symmetric(scale)).collect(),
        (0..n)
            .map(|_| (0..m).map(|_| rng.uniform_symmetric(scale)).collect())
            .collect(),
    )
    .expect("finite draws form valid parameters")
}

fn random_dist(n: usize, rng: &mut Xoshiro256StarStar) -> VisibleDistribution {
    let weights: Vec<f64> = (0..1usize << n).map(|_| rng.next_f64() + 1e-3).collect();
    VisibleDistribution::from_weights(n, weights).expect("positive weights normalize")
}

fn cmd_verify(args: VerifyArgs, quiet: bool) -> Result<(), Failure> {
    if args.n == 0 || args.n + args.m > oracle::MAX_QUBITS {
        return Err(Failure::new(
            EXIT_USAGE,
            format!(
                "need 1 <= n and n + m <= {}; got n={}, m={}",
                oracle::MAX_QUBITS,
                args.n,
                args.m
            ),
        ));
    }
    if args.trials == 0 {
        if !quiet {
            println!("warning: 0 trials requested; nothing verified (vacuous pass)");
        }
        return Ok(());
    }

    let names = [
        "visible marginal",
        "positive phase",
        "negative phase",
        "conditional states",
        "joint objective",
        "bound gradient",
        "data processing",
    ];
    let mut worst = [0.0f64; 7];
    let mut rng = Xoshiro256StarStar::new(args.seed);
    let mut run_trial = || -> sqrbm_core::Result<[f64; 7]> {
        let p1 = random_params(args.n, args.m, &mut rng);
        let p2 = random_params(args.n, args.m, &mut rng);
        let data = random_dist(args.n, &mut rng);

        let h1 = oracle::build_hamiltonian(&p1)?;
        let rho1 = oracle::gibbs_state(&h1)?;
        let h2 = oracle::build_hamiltonian(&p2)?;
        let rho2 = oracle::gibbs_state(&h2)?;

        let mut devs = [0.0f64; 7];

        let closed_marginal = model::visible_marginal(&p1);
        let dense_marginal = oracle::reduce_to_visible(&rho1, args.n)?;
        devs[0] = closed_marginal
            .probs()
            .iter()
            .zip(dense_marginal.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);

        devs[1] = model::positive_phase(&p1, &data)?
            .max_abs_diff(&oracle::dense_positive_phase(&p1, &data)?);
        devs[2] = model::negative_phase(&p1).max_abs_diff(&oracle::dense_negative_phase(&p1)?);

        for v in 0..1usize << args.n {
            let cfg = sqrbm_core::SpinConfig::from_index(v, args.n)?;
            let dense = oracle::conditional_hidden_state(&rho1, &cfg)?;
            let closed = oracle::closed_form_conditional(&p1, &cfg)?;
            devs[3] = devs[3].max(dense.max_abs_diff(&closed));
        }

        let closed_joint = model::joint_objective(&p1, &p2, &data)?;
        let mixed = oracle::mixture_state(&data, &rho1, args.n)?;
        let dense_joint = oracle::quantum_relative_entropy(&mixed, &rho2)?;
        devs[4] = (closed_joint - dense_joint).abs();

        let bound = oracle::golden_thompson_bound_gradient(&p1, &data)?;
        let pos = model::positive_phase(&p1, &data)?;
        let neg = model::negative_phase(&p1);
        devs[5] = bound
            .flatten()
            .iter()
            .zip(pos.flatten().iter().zip(neg.flatten()))
            .map(|(g, (a, b))| (g - (a - b)).abs())
            .fold(0.0, f64::max);

        let visible_kl = kl_divergence(&data, &model::visible_marginal(&p2))?;
        devs[6] = (visible_kl - dense_joint).max(0.0);
        Ok(devs)
    };

    for trial in 0..args.trials {
        let devs = run_trial()
            .map_err(|e| Failure::new(EXIT_NUMERIC, format!("trial {trial} failed: {e}")))?;
        for (w, d) in worst.iter_mut().zip(devs) {
            *w = w.max(d);
        }
    }

    let mut all_pass = true;
    if !quiet {
        println!(
            "verification: n={}, m={}, {} trials, tolerance {:.1e}",
            args.n, args.m, args.trials, args.tol
        );
        println!("{:<20} {:>14} {:>8}", "check", "max deviation", "status");
    }
    for (name, &dev) in names.iter().zip(&worst) {
        let pass = dev < args.tol;
        all_pass &= pass;
        if !quiet {
            println!(
                "{:<20} {:>14.3e} {:>8}",
                name,
                dev,
                if pass { "pass" } else { "FAIL" }
            );
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "oracle verification failed"))
    }
}

fn cmd_export(args: ExportArgs, quiet: bool) -> Result<(), Failure> {
    let text = read_file(&args.record)?;
    let record: TrainRecord = serde_json::from_str(&text).map_err(|e| {
        Failure::new(
            EXIT_USAGE,
            format!("{} is not a training record: {e}", args.record.display()),
        )
    })?;
    write_file(&args.out, &record.curve_csv())?;
    if !quiet {
        println!(
            "wrote {} ({} epochs)",
            args.out.display(),
            record.kl_curve.len()
        );
    }
    Ok(())
}
