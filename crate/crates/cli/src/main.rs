use anyhow::{Context, Result, bail};
use clap::{Args, Parser, Subcommand, ValueEnum};
use planarz_core::bp::{BpConfig, BpResult, Schedule, run_bp, run_bp_multistart};
use planarz_core::experiment::{parse_config, run_experiment};
use planarz_core::gen::{
    ModelParams, grid_factor_graph, reduce_planar, reduced_forney, spiderweb_factor_graph,
};
use planarz_core::model::io::{ModelFile, parse_model, write_factor_graph, write_forney};
use planarz_core::model::{ForneyGraph, exact_log_z_factor_graph, exact_log_z_forney};
use planarz_core::series::{enumerate_loops, pfaffian_series, term_log, z_empty};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Partial failure: some instances or methods did not produce a value.
const EXIT_PARTIAL: u8 = 2;

#[derive(Parser)]
#[command(name = "planarz", version, about = "Partition functions of binary planar models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write CSV rows.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate log Z of a model file.
    Solve(SolveArgs),
    /// Write a random Ising instance.
    Gen(GenArgs),
    /// Brute-force reference values for small models.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Bp,
    ZEmpty,
    Pfaffian,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "z-empty")]
    method: SolveMethod,
    /// Largest |Ψ| evaluated by the Pfaffian series.
    #[arg(long, default_value_t = 2)]
    max_psi: usize,
    /// Term budget for the Pfaffian series.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// BP schedule; every schedule is tried in turn when omitted.
    #[arg(long)]
    schedule: Option<Schedule>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-14)]
    threshold: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Print one line per Pfaffian term.
    #[arg(long)]
    terms: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("shape").required(true))]
struct GenArgs {
    /// Side length of a square grid.
    #[arg(long, group = "shape", value_name = "N")]
    grid: Option<usize>,
    /// Number of rings and hub degree of a spider web.
    #[arg(long, group = "shape", num_args = 2, value_names = ["R", "D"])]
    spiderweb: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Non-negative couplings and fields.
    #[arg(long)]
    attractive: bool,
    /// Write the reduced Forney graph instead of the factor graph.
    #[arg(long)]
    forney: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("kind").required(true))]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Sum the full loop series over BP beliefs.
    #[arg(long, group = "kind")]
    loops: bool,
    /// Enumerate all configurations.
    #[arg(long, group = "kind")]
    exact: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_reduced(path: &Path) -> Result<(ModelFile, ForneyGraph)> {
    let model = parse_model(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let g = match &model {
        ModelFile::FactorGraph(fg) => reduced_forney(fg)?,
        ModelFile::Forney(g) => reduce_planar(g)?,
    };
    Ok((model, g))
}

fn bp_config(args: &SolveArgs) -> BpConfig {
    BpConfig {
        schedule: args.schedule.unwrap_or(Schedule::FixedSequential),
        threshold: args.threshold,
        max_iterations: args.max_iterations,
        seed: args.seed,
    }
}

fn solve_bp(g: &ForneyGraph, cfg: &BpConfig, fixed: bool) -> Result<BpResult> {
    Ok(if fixed { run_bp(g, cfg)? } else { run_bp_multistart(g, cfg)? })
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let (_, g) = load_reduced(&args.model)?;
    let res = solve_bp(&g, &bp_config(args), args.schedule.is_some())?;
    println!("schedule {}", res.schedule);
    println!("converged {}", res.converged);
    println!("iterations {}", res.iterations);
    println!("log_z_bp {:.12e}", res.log_z);
    let log_z = match args.method {
        SolveMethod::Bp => res.log_z,
        SolveMethod::ZEmpty => z_empty(&g, &res)?.ln().map_or(f64::NAN, |l| res.log_z + l),
        SolveMethod::Pfaffian => {
            let series = pfaffian_series(&g, &res, args.max_psi, args.budget)?;
            println!("terms {}", series.terms.len());
            println!("truncated {}", series.truncated);
            if args.terms {
                print!("{}", term_log(&series.terms));
            }
            series.log_z(&res)
        }
    };
    println!("log_z {log_z:.12e}");
    Ok(if log_z.is_finite() && res.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    })
}

fn generate(args: &GenArgs) -> Result<()> {
    let mut params = ModelParams::new(args.beta, args.theta, args.seed);
    if args.attractive {
        params = params.attractive();
    }
    let fg = match (&args.grid, &args.spiderweb) {
        (Some(n), _) => grid_factor_graph(*n, &params)?,
        (None, Some(rd)) => spiderweb_factor_graph(rd[0], rd[1], &params)?,
        (None, None) => bail!("one of --grid or --spiderweb is required"),
    };
    let text = if args.forney {
        write_forney(&reduced_forney(&fg)?)
    } else {
        write_factor_graph(&fg)
    };
    emit(args.out.as_deref(), &text)
}

fn oracle(args: &OracleArgs) -> Result<()> {
    if args.exact {
        let model = parse_model(&read(&args.model)?)?;
        let log_z = match &model {
            ModelFile::FactorGraph(fg) => exact_log_z_factor_graph(fg)?,
            ModelFile::Forney(g) => exact_log_z_forney(g)?,
        };
        println!("log_z {log_z:.12e}");
        return Ok(());
    }
    let (_, g) = load_reduced(&args.model)?;
    let res = run_bp_multistart(&g, &BpConfig::default())?;
    let loops = enumerate_loops(&g, &res, false)?;
    let regular = loops.iter().filter(|l| l.is_regular(&g)).count();
    let sum: f64 = loops.iter().map(|l| l.r).sum();
    println!("loops {}", loops.len());
    println!("regular_loops {regular}");
    println!("log_z_bp {:.12e}", res.log_z);
    println!("log_z {:.12e}", res.log_z + (1.0 + sum).ln());
    Ok(())
}

fn run(config: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let cfg = parse_config(&read(config)?).with_context(|| format!("parsing {}", config.display()))?;
    let outcome = match out {
        Some(p) => {
            let file = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            run_experiment(&cfg, std::io::BufWriter::new(file))?
        }
        None => run_experiment(&cfg, std::io::stdout().lock())?,
    };
    if outcome.failures > 0 {
        eprintln!("{} of {} rows failed", outcome.failures, outcome.rows.len());
        return Ok(ExitCode::from(EXIT_PARTIAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => run(config, out.as_deref()),
        Command::Solve(args) => solve(args),
        Command::Gen(args) => generate(args).map(|()| ExitCode::SUCCESS),
        Command::Oracle(args) => oracle(args).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
