use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splitvi_cli::{cmd_generate, cmd_run, cmd_verify, run_suite, suite_status, ProblemRef, RunManifest, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "splitvi", version, about = "Hybrid projection solver for split monotone variational inclusions")]
struct Cli {
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver and write a trace CSV and a summary JSON
    Run(RunArgs),
    /// Re-check a trace CSV
    Verify {
        trace: PathBuf,
    },
    /// Write a generated problem as JSON
    Generate {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the suite problems
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Generator address (`box:7`, `singleton-5x3:2`, `l1-8:3`) or problem JSON path
    #[arg(long, required_unless_present = "suite", conflicts_with = "suite")]
    problem: Option<String>,
    /// Run every suite problem in parallel
    #[arg(long)]
    suite: bool,
    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting, applied after the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Trace CSV path
    #[arg(long, conflicts_with = "suite")]
    out: Option<PathBuf>,
    /// Summary JSON path
    #[arg(long, conflicts_with = "suite")]
    summary: Option<PathBuf>,
    /// Directory for outputs without an explicit path
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
}

fn overrides(args: &RunArgs) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for s in &args.set {
        let (k, v) = s.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{s}`"))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let flags = [("gamma", args.gamma.map(|v| v.to_string())), ("lambda", args.lambda.map(|v| v.to_string())), (
        "max_iter",
        args.max_iter.map(|v| v.to_string()),
    )];
    pairs.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    Ok(pairs)
}

fn run(args: RunArgs) -> u8 {
    let pairs = match overrides(&args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if args.suite {
        let reports = run_suite(&args.out_dir, args.config.as_deref(), &pairs);
        for (name, r) in &reports {
            println!("{:<20} exit {}  {}", name, r.status.code(), r.message.lines().next().unwrap_or(""));
        }
        return suite_status(&reports).code();
    }

    let problem = ProblemRef::parse(args.problem.as_deref().unwrap_or_default());
    let mut manifest = RunManifest::with_defaults(problem, &args.out_dir);
    manifest.config = args.config;
    manifest.overrides = pairs;
    if let Some(out) = args.out {
        manifest.trace_out = out;
    }
    if let Some(summary) = args.summary {
        manifest.summary_out = summary;
    }
    let report = cmd_run(&manifest);
    if report.status.code() == 0 {
        println!("{}", report.message);
    } else {
        eprintln!("{}", report.message);
    }
    report.status.code()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let code = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify { trace } => {
            let report = cmd_verify(&trace);
            if report.status.code() == 1 {
                eprintln!("{}", report.text);
            } else {
                print!("{}", report.text);
            }
            report.status.code()
        }
        Command::Generate { problem, out } => match cmd_generate(&problem, &out) {
            Ok(_) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::List => {
            for name in splitvi::problems::suite() {
                println!("{name}");
            }
            0
        }
    };
    ExitCode::from(code)
}
