use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beltrami::exec::Execution;
use beltrami::extension::{extend_bundle, extend_nq, extend_scalar, DeformationFamily, ExtensionReport};
use beltrami::random::Shape;
use beltrami::scenario::{parse_scenario, print_scenario, random_scenario, run_batch, run_suites, DeformationScenario, RandomParams, Report, Suite};
use beltrami::KernelError;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "beltrami", version, about = "Exact verifier for Beltrami deformation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct ExecArgs {
    /// Run suites one after another instead of in parallel.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on a scenario file.
    Verify {
        file: PathBuf,
        /// Suite to run (repeatable); defaults to the scenario's list.
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
        /// Write the machine-readable report here.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Generate seeded geometric scenarios and run their default suites.
    Random {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long = "N", default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Maximum monomial degree in z, zb.
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Monomials per coefficient.
        #[arg(long, default_value_t = 2)]
        terms: usize,
        /// Print the scenarios instead of running them.
        #[arg(long)]
        print: bool,
        /// Write the reports as a JSON array here.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Extend a declared form order by order in t.
    Extend {
        file: PathBuf,
        #[arg(long, value_name = "NAME")]
        form: String,
        #[arg(long, value_name = "N")]
        order: usize,
        /// Solve the (n,q) equation dbar(s) + d i_phi s = 0 instead.
        #[arg(long)]
        nq: bool,
    },
}

fn input_error(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    INPUT
}

fn load(path: &Path) -> Result<DeformationScenario, u8> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let parsed = parse_scenario(&text).map_err(|e| input_error(format!("{}:{e}", path.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed.scenario)
}

fn write_json(path: &Path, text: &str) -> Result<(), u8> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn verify(file: &Path, suites: &[String], json: Option<&Path>, exec: Execution) -> Result<u8, u8> {
    let mut scenario = load(file)?;
    if !suites.is_empty() {
        let mut chosen = Vec::new();
        for s in suites {
            chosen.push(s.parse::<Suite>().map_err(input_error)?);
        }
        scenario.suites = chosen;
    }
    let report = run_suites(&scenario, exec);
    print!("{}", report.render_text());
    if let Some(out) = json {
        write_json(out, &report.to_json())?;
    }
    Ok(summary(&report))
}

fn summary(report: &Report) -> u8 {
    let passed = report.suites.iter().filter(|s| s.status == beltrami::scenario::Status::Pass).count();
    println!("{passed}/{} suites passed", report.suites.len());
    if report.passed() {
        PASS
    } else {
        FAIL
    }
}

fn random(params: RandomParams, seed: u64, count: u64, print: bool, json: Option<&Path>, exec: Execution) -> Result<u8, u8> {
    let mut scenarios = Vec::new();
    for k in 0..count {
        scenarios.push(random_scenario(params, seed.wrapping_add(k)).map_err(input_error)?);
    }
    if print {
        for s in &scenarios {
            print!("{}", print_scenario(s));
        }
        return Ok(PASS);
    }
    let reports = run_batch(&scenarios, exec);
    let mut failed = 0;
    for r in &reports {
        let bad: Vec<&str> = r.suites.iter().filter(|s| s.status != beltrami::scenario::Status::Pass).map(|s| s.suite.name()).collect();
        if bad.is_empty() {
            println!("seed {}: pass ({} suites)", r.seed, r.suites.len());
        } else {
            failed += 1;
            println!("seed {}: FAIL [{}]", r.seed, bad.join(", "));
            print!("{}", r.render_text());
        }
    }
    println!("{}/{} scenarios passed", reports.len() - failed, reports.len());
    if let Some(out) = json {
        let all: Vec<_> = reports.iter().map(Report::to_json_value).collect();
        let mut text = serde_json::to_string_pretty(&all).expect("serializable");
        text.push('\n');
        write_json(out, &text)?;
    }
    Ok(if failed == 0 { PASS } else { FAIL })
}

fn extend(file: &Path, name: &str, order: usize, nq: bool) -> Result<u8, u8> {
    let scenario = load(file)?;
    let form = scenario.forms.get(name).ok_or_else(|| input_error(format!("no form named `{name}`")))?;
    if order > scenario.chart.order {
        eprintln!("warning: order {order} exceeds N = {}; stopping at N", scenario.chart.order);
    }
    let family = DeformationFamily::from_series(scenario.phi().clone(), scenario.psi().cloned()).map_err(input_error)?;
    let result = if !form.value.word().is_empty() {
        extend_bundle(&family, &scenario.connection, &form.value, order)
    } else if nq {
        extend_nq(&family, &form.value.component_at(&[]), order)
    } else {
        extend_scalar(&family, &form.value.component_at(&[]), order)
    };
    match result {
        Ok(report) => Ok(print_extension(name, &report)),
        Err(e @ KernelError::Obstructed { .. }) => {
            println!("{name}: {e}");
            Ok(FAIL)
        }
        Err(e) => Err(input_error(e)),
    }
}

fn print_extension(name: &str, r: &ExtensionReport) -> u8 {
    for step in &r.steps {
        println!("order {}: rhs = {}", step.order, step.rhs);
        println!("         solution = {}", step.solution);
    }
    let sigma = if r.sigma.word().is_empty() { r.sigma.component_at(&[]).to_string() } else { r.sigma.to_string() };
    println!("{name}(t) = {sigma}");
    if r.residual_is_zero() {
        println!("residual: 0");
        PASS
    } else {
        println!("residual: {}", r.residual);
        FAIL
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.exec.sequential { Execution::Sequential } else { Execution::default() };
    let code = match cli.command {
        Command::Verify { file, suites, json } => verify(&file, &suites, json.as_deref(), exec),
        Command::Random { n, r, order, seed, count, degree, terms, print, json } => {
            let params = RandomParams { n, r, order, shape: Shape { degree, terms } };
            random(params, seed, count, print, json.as_deref(), exec)
        }
        Command::Extend { file, form, order, nq } => extend(&file, &form, order, nq),
    };
    ExitCode::from(code.unwrap_or_else(|c| c))
}
