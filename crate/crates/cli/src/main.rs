use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use groverlab::catalog::classical_one_oracle;
use groverlab::experiment::{run_plan, sweep, TargetSource, TrialProtocol};
use groverlab::metrics::{j_exp, j_max, write_csv, ExperimentRecord};
use groverlab::noise::NoiseModel;
use groverlab::optimize::{minimize_expected_depth, OptimizeBounds, MAX_ORACLES};
use groverlab::search::{build_stage_circuit, closed_form_success, needs_ancilla, plan_success_probability};
use groverlab::transpile::{lower_with, Backend, LowerOptions};
use groverlab::{BitString, Error, SearchPlan};

#[derive(Parser)]
#[command(name = "groverlab", version, about = "Grover search with partial diffusion: theory, noisy runs and depth optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Theoretical success probability of a plan.
    Theory {
        plan: String,
        #[arg(long)]
        n: usize,
    },
    /// Noisy trials of one plan.
    Run {
        plan: String,
        #[command(flatten)]
        opts: RunOpts,
        /// Also write one row per trial.
        #[arg(long)]
        trials_csv: Option<PathBuf>,
    },
    /// Runs the whole catalog for `--n` and fits the degraded ratio against CNOT count.
    Sweep {
        #[command(flatten)]
        opts: RunOpts,
        /// Comma-separated multipliers applied to the CNOT error rates.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        scales: Vec<f64>,
    },
    /// Exhaustive expected-depth minimization.
    Optimize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        backend: Option<String>,
        #[arg(long, default_value_t = 2)]
        max_oracles: usize,
        #[arg(long, default_value_t = 2)]
        stages: usize,
        #[arg(long)]
        force_global: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rows of the ranking to print (0 prints all).
        #[arg(long, default_value_t = 0)]
        top: usize,
    },
    /// Prints a stage circuit, abstract or lowered.
    Circuit {
        plan: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 0)]
        stage: usize,
        /// Lower onto this backend instead of printing the abstract circuit.
        #[arg(long)]
        backend: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prints a backend description in file form.
    Backend { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Paper,
    Random,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    n: usize,
    /// Builtin name (vigo, athens, guadalupe) or path to a backend file.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, default_value_t = 8192)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "paper")]
    fixture: Fixture,
    /// Noise override file.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Turns on T1/T2 relaxation.
    #[arg(long)]
    relaxation: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Feed each stage the majority outcome of the previous one.
    #[arg(long)]
    chained: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Argument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn default_backend(n: usize) -> &'static str {
    if n + usize::from(needs_ancilla(n)) <= 5 {
        "vigo"
    } else {
        "guadalupe"
    }
}

fn backend_for(name: Option<&str>, n: usize) -> Result<Backend, Failure> {
    Ok(Backend::resolve(name.unwrap_or(default_backend(n)))?)
}

fn protocol(opts: &RunOpts, backend: &Backend) -> Result<TrialProtocol, Failure> {
    let mut noise = match &opts.noise {
        Some(path) => NoiseModel::load(path, backend)?,
        None => NoiseModel::from_backend(backend),
    };
    if opts.relaxation {
        noise = noise.with_relaxation(backend);
    }
    Ok(TrialProtocol {
        trials: opts.trials,
        shots: opts.shots,
        targets: match opts.fixture {
            Fixture::Paper => TargetSource::Fixture,
            Fixture::Random => TargetSource::Random,
        },
        seed: opts.seed,
        chained: opts.chained,
        noise,
    })
}

fn write_rows<T: serde::Serialize>(rows: &[T], path: &Path) -> CliResult {
    let file = File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    write_csv(rows, io::BufWriter::new(file))?;
    Ok(())
}

fn print_record(out: &mut impl Write, r: &ExperimentRecord) -> io::Result<()> {
    writeln!(out, "circuit              {}", r.circuit_name)?;
    writeln!(out, "backend              {} ({} mode, {} trials x {} shots)", r.backend, r.mode, r.trials, r.shots)?;
    writeln!(out, "p_theo               {:.4}", r.p_theo)?;
    writeln!(out, "p_sim                {:.4} +- {:.4}", r.p_sim, r.p_sim_std)?;
    writeln!(out, "degraded ratio       {:.4}", r.degraded_ratio)?;
    writeln!(out, "selectivity          {:.3}", r.selectivity)?;
    if r.depth_stage2 > 0.0 {
        writeln!(out, "depth                {:.2}, {:.2}", r.depth, r.depth_stage2)?;
    } else {
        writeln!(out, "depth                {:.2}", r.depth)?;
    }
    writeln!(out, "cx count             {:.2}", r.cx_count)?;
    writeln!(out, "expected depth       {:.2} (theory), {:.2} (simulated)", r.expected_depth_theo, r.expected_depth_sim)
}

fn execute(cli: Cli) -> CliResult {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Theory { plan, n } => {
            let plan = SearchPlan::parse(&plan, n)?;
            let p = plan_success_probability(&plan)?;
            writeln!(out, "plan           {plan}")?;
            writeln!(out, "qubits         {n}")?;
            writeln!(out, "oracles        {}", plan.oracle_count())?;
            writeln!(out, "p_theo         {p:.4}")?;
            writeln!(out, "j_max          {} (p = {:.4})", j_max(n), closed_form_success(n, j_max(n)))?;
            writeln!(out, "j_exp          {}", j_exp(n))?;
            writeln!(out, "classical      {:.4}", classical_one_oracle(n))?;
        }
        Command::Run { plan, opts, trials_csv } => {
            let plan = SearchPlan::parse(&plan, opts.n)?;
            let backend = backend_for(opts.backend.as_deref(), opts.n)?;
            let report = run_plan(&plan, &backend, &protocol(&opts, &backend)?)?;
            print_record(&mut out, &report.record)?;
            writeln!(out, "classical one-oracle baseline {:.4}", classical_one_oracle(opts.n))?;
            if let Some(path) = &opts.csv {
                write_rows(std::slice::from_ref(&report.record), path)?;
            }
            if let Some(path) = &trials_csv {
                write_rows(&report.trials, path)?;
            }
        }
        Command::Sweep { opts, scales } => {
            let backend = backend_for(opts.backend.as_deref(), opts.n)?;
            let report = sweep(opts.n, &backend, &protocol(&opts, &backend)?, &scales)?;
            writeln!(out, "{:<12} {:>8} {:>8} {:>8} {:>8}", "circuit", "cx", "p_theo", "p_sim", "ratio")?;
            for r in &report.records {
                writeln!(
                    out,
                    "{:<12} {:>8.2} {:>8.4} {:>8.4} {:>8.4}",
                    r.circuit_name, r.cx_count, r.p_theo, r.p_sim, r.degraded_ratio
                )?;
            }
            match report.spearman {
                Some(rho) => writeln!(out, "spearman(cx, ratio) {rho:.4}")?,
                None => writeln!(out, "spearman(cx, ratio) undefined")?,
            }
            match &report.fit {
                Some(f) => writeln!(
                    out,
                    "logistic a={:.6} b={:.6} c={:.6} d={:.6} r2={:.4}",
                    f.a, f.b, f.c, f.d, f.r_squared
                )?,
                None => writeln!(out, "logistic fit degenerate")?,
            }
            if let Some(path) = &opts.csv {
                write_rows(&report.records, path)?;
            }
        }
        Command::Optimize { n, backend, max_oracles, stages, force_global, seed, top } => {
            if max_oracles == 0 || max_oracles > MAX_ORACLES || !(1..=2).contains(&stages) {
                return Err(Failure::Usage(format!(
                    "need 1 <= --max-oracles <= {MAX_ORACLES} and --stages 1 or 2"
                )));
            }
            let backend = backend_for(backend.as_deref(), n)?;
            let bounds = OptimizeBounds { max_oracles, max_stages: stages, force_global };
            let report = minimize_expected_depth(n, &backend, &bounds, seed)?;
            writeln!(out, "best {} expected depth {:.2}", report.best.name, report.best.expected_depth)?;
            writeln!(out, "{:<4} {:<16} {:>8} {:>16} {:>12}", "rank", "plan", "p_theo", "depths", "exp. depth")?;
            let shown = if top == 0 { report.ranking.len() } else { top.min(report.ranking.len()) };
            for (i, e) in report.ranking[..shown].iter().enumerate() {
                let depths: Vec<String> = e.stage_depths.iter().map(|d| format!("{d:.1}")).collect();
                writeln!(
                    out,
                    "{:<4} {:<16} {:>8.4} {:>16} {:>12.2}",
                    i + 1,
                    e.name,
                    e.p_theo,
                    depths.join("+"),
                    e.expected_depth
                )?;
            }
        }
        Command::Circuit { plan, n, target, stage, backend, seed } => {
            let plan = SearchPlan::parse(&plan, n)?;
            let t: BitString = target.parse()?;
            if stage >= plan.stages().len() {
                return Err(Failure::Usage(format!("plan has {} stage(s)", plan.stages().len())));
            }
            let det = plan.stage_layout(stage).determined.len();
            let c = build_stage_circuit(&plan, stage, &t, &t.slice(0..det))?;
            match backend {
                None => write!(out, "{}", c.to_text())?,
                Some(name) => {
                    let b = Backend::resolve(&name)?;
                    let tc = lower_with(&c, &b, None, seed, &LowerOptions::for_execution())?;
                    writeln!(out, "# {} on {}: depth {} cx {}", plan, b.name, tc.depth(), tc.cx_count())?;
                    writeln!(out, "# initial layout {:?}", tc.initial_layout)?;
                    let (compact, used) = tc.compact();
                    writeln!(out, "# physical qubits {used:?}")?;
                    write!(out, "{}", compact.to_text())?;
                }
            }
        }
        Command::Backend { name } => {
            write!(out, "{}", Backend::resolve(&name)?.to_text())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
