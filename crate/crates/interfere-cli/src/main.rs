//! Command-line front end: simulate scenarios, sweep state families, check
//! exponent-series factorizability, sample Wigner grids, run conditional
//! preparation, and execute the built-in self test.
//!
//! Exit codes are a stable contract: 0 success, 1 usage or input error,
//! 2 verdict failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use interfere::experiments::{
    self, factorizability_sweep, Analysis, RunOptions, Scenario,
};
use interfere::fock::BeamSplitter;
use interfere::tensor::{check_factorizable, ExponentSeries};
use interfere::wigner::{wigner, GridSpec, ThermalPair};
use interfere::StateKind;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VERDICT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "interfere",
    about = "Two-mode beam-splitter interference in truncated Fock space",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and emit its report as JSON
    Simulate(SimulateArgs),
    /// Cross two lists of states and tabulate factorizability per cell
    Sweep(SweepArgs),
    /// Evaluate the factorizability conditions on two exponent-series files
    CheckFactorizable(CheckArgs),
    /// Sample the Wigner function of a state on a grid
    Wigner(WignerArgs),
    /// Conditional preparation: mix two thermal fields, project one arm
    Conditional(ConditionalArgs),
    /// Run the acceptance criteria and print one line per criterion
    SelfTest(SelfTestArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// State descriptor for arm a (e.g. thermal:1, coherent:0.3,0.7)
    #[arg(long)]
    state_a: String,
    /// State descriptor for arm b
    #[arg(long)]
    state_b: String,
    /// Mixing angle in radians, or `half` for the 50:50 splitter
    #[arg(long)]
    theta: String,
    /// Per-mode Fock cutoff (INTERFERE_CUTOFF overrides the default 30)
    #[arg(long)]
    cutoff: Option<usize>,
    /// Comma list: mutual-information, trace-distance, covariance-cross,
    /// wigner-grid, moment-conditions, conditional-prep:<n>
    #[arg(long, default_value = "mutual-information")]
    analyses: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for run artifacts (report + Wigner CSVs), content-addressed
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Exit 2 if any analysis verdict fails
    #[arg(long)]
    strict: bool,
    /// Suppress wall-time so identical runs emit identical bytes
    #[arg(long)]
    reproducible: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// State family: thermal, squeezed, or gaussian
    #[arg(long)]
    family: String,
    /// Arm-a parameter list; floats for thermal/squeezed, semicolon-separated
    /// mu_re,mu_im,tau triples for gaussian
    #[arg(long)]
    values: String,
    /// Arm-b parameter list (defaults to --values)
    #[arg(long)]
    values_b: Option<String>,
    #[arg(long)]
    theta: String,
    #[arg(long)]
    cutoff: Option<usize>,
    /// Parallel scenario workers (0 = library default)
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Exponent-series JSON for arm a
    #[arg(long)]
    f: PathBuf,
    /// Exponent-series JSON for arm b
    #[arg(long)]
    g: PathBuf,
    #[arg(long)]
    theta: String,
    /// Residual tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct WignerArgs {
    /// State descriptor
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = -5.0)]
    qmin: f64,
    #[arg(long, default_value_t = 5.0)]
    qmax: f64,
    #[arg(long, default_value_t = -5.0)]
    pmin: f64,
    #[arg(long, default_value_t = 5.0)]
    pmax: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; the summary line goes to stdout
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    cutoff: Option<usize>,
    /// Exit 1 when more than 1% of the state falls outside the window
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ConditionalArgs {
    #[arg(long)]
    nbar_a: f64,
    #[arg(long)]
    nbar_b: f64,
    #[arg(long)]
    theta: String,
    /// Fock outcome the b arm is projected onto
    #[arg(long, default_value_t = 1)]
    project_b: usize,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelfTestArgs {
    /// Reduced sizes, same thresholds
    #[arg(long)]
    fast: bool,
    /// Run a single criterion by id (1..=10)
    #[arg(long)]
    only: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> interfere::Result<u8> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::CheckFactorizable(args) => check(args),
        Command::Wigner(args) => wigner_cmd(args),
        Command::Conditional(args) => conditional(args),
        Command::SelfTest(args) => self_test(args),
    }
}

/// Radians, with `half` as the 50:50 alias (t = r = 1/√2 at θ = π/2).
fn parse_theta(s: &str) -> interfere::Result<f64> {
    if s.trim() == "half" {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    s.trim().parse::<f64>().map_err(|e| {
        interfere::Error::DescriptorParse(s.into(), format!("bad angle (radians or `half`): {e}"))
    })
}

fn default_cutoff(flag: Option<usize>) -> interfere::Result<usize> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var("INTERFERE_CUTOFF") {
        Ok(v) => v.parse::<usize>().map_err(|e| {
            interfere::Error::DescriptorParse(
                v.clone(),
                format!("INTERFERE_CUTOFF must be an integer: {e}"),
            )
        }),
        Err(_) => Ok(30),
    }
}

/// Sorted-key JSON for any serializable value.
fn canonical_pretty<T: serde::Serialize>(value: &T) -> interfere::Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)?)
}

fn emit(text: &str, out: &Option<PathBuf>) -> interfere::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> interfere::Result<u8> {
    let analyses: Vec<Analysis> = args
        .analyses
        .split(',')
        .map(|s| s.parse())
        .collect::<interfere::Result<_>>()?;
    let mut scenario = Scenario::new(
        args.state_a.parse()?,
        args.state_b.parse()?,
        parse_theta(&args.theta)?,
        default_cutoff(args.cutoff)?,
    )
    .with_analyses(analyses);
    scenario.seed = args.seed;
    let report = experiments::run(
        &scenario,
        &RunOptions {
            out_dir: args.out_dir,
            reproducible: args.reproducible,
        },
    )?;
    emit(&report.to_json_string(), &args.out)?;
    if args.strict && report.any_failed() {
        return Ok(EXIT_VERDICT);
    }
    Ok(EXIT_OK)
}

fn parse_family(family: &str, list: &str) -> interfere::Result<Vec<StateKind>> {
    let bad = |msg: String| interfere::Error::DescriptorParse(list.into(), msg);
    match family {
        "thermal" => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map(StateKind::Thermal)
                    .map_err(|e| bad(format!("bad mean photon number `{v}`: {e}")))
            })
            .collect(),
        "squeezed" => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map(|amp| StateKind::Squeezed { amp, phase: 0.0 })
                    .map_err(|e| bad(format!("bad squeezing amplitude `{v}`: {e}")))
            })
            .collect(),
        "gaussian" => list
            .split(';')
            .map(|triple| {
                let parts: Vec<&str> = triple.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(bad(format!(
                        "gaussian values are mu_re,mu_im,tau triples, got `{triple}`"
                    )));
                }
                let nums: Vec<f64> = parts
                    .iter()
                    .map(|p| {
                        p.parse::<f64>()
                            .map_err(|e| bad(format!("bad number `{p}`: {e}")))
                    })
                    .collect::<interfere::Result<_>>()?;
                let g = interfere::GaussianParams::new(
                    num_complex::Complex64::new(nums[0], nums[1]),
                    nums[2],
                    num_complex::Complex64::new(0.0, 0.0),
                );
                g.check_physical()?;
                Ok(StateKind::Gaussian(g))
            })
            .collect(),
        other => Err(bad(format!(
            "unknown family `{other}` (thermal, squeezed, gaussian)"
        ))),
    }
}

fn sweep(args: SweepArgs) -> interfere::Result<u8> {
    let arm_a = parse_family(&args.family, &args.values)?;
    let arm_b = match &args.values_b {
        Some(v) => parse_family(&args.family, v)?,
        None => arm_a.clone(),
    };
    let table = factorizability_sweep(
        &arm_a,
        &arm_b,
        &BeamSplitter::new(parse_theta(&args.theta)?),
        default_cutoff(args.cutoff)?,
        args.workers,
    )?;
    emit(&canonical_pretty(&table)?, &args.out)?;
    Ok(EXIT_OK)
}

fn check(args: CheckArgs) -> interfere::Result<u8> {
    let load = |path: &PathBuf| -> interfere::Result<ExponentSeries> {
        let text = std::fs::read_to_string(path)?;
        ExponentSeries::from_json(&serde_json::from_str(&text)?)
    };
    let f = load(&args.f)?;
    let g = load(&args.g)?;
    let bs = BeamSplitter::new(parse_theta(&args.theta)?);
    let report = check_factorizable(&f, &g, &bs, args.tol)?;
    println!("{}", canonical_pretty(&report)?);
    Ok(if report.pass { EXIT_OK } else { EXIT_VERDICT })
}

fn wigner_cmd(args: WignerArgs) -> interfere::Result<u8> {
    let kind: StateKind = args.state.parse()?;
    let rho = kind.make(default_cutoff(args.cutoff)?)?;
    let spec = GridSpec {
        qmin: args.qmin,
        qmax: args.qmax,
        pmin: args.pmin,
        pmax: args.pmax,
        steps: args.steps,
    };
    let grid = wigner(&rho, &spec)?;
    match args.format.as_str() {
        "csv" => std::fs::write(&args.out, grid.to_csv())?,
        "json" => std::fs::write(&args.out, serde_json::to_string_pretty(&grid.to_json())?)?,
        other => {
            return Err(interfere::Error::DescriptorParse(
                other.into(),
                "format must be csv or json".into(),
            ))
        }
    }
    let integral = grid.integral();
    println!(
        "min {} integral {} file {}",
        grid.min_value(),
        integral,
        args.out.display()
    );
    if args.strict && (1.0 - integral).abs() > 0.01 {
        eprintln!(
            "error: grid window holds only {integral:.4} of the state (strict mode)"
        );
        return Ok(EXIT_USAGE);
    }
    Ok(EXIT_OK)
}

fn conditional(args: ConditionalArgs) -> interfere::Result<u8> {
    let pair = ThermalPair::new(args.nbar_a, args.nbar_b)?;
    let report = experiments::conditional_prep(
        &pair,
        &BeamSplitter::new(parse_theta(&args.theta)?),
        args.project_b,
        default_cutoff(args.cutoff)?,
    )?;
    emit(&canonical_pretty(&report)?, &args.out)?;
    Ok(EXIT_OK)
}

fn self_test(args: SelfTestArgs) -> interfere::Result<u8> {
    let outcomes = match args.only {
        Some(id) => match interfere::acceptance::run_by_id(id, args.fast) {
            Some(o) => vec![o],
            None => {
                return Err(interfere::Error::InvalidState(format!(
                    "no criterion with id {id} (expected 1..=10)"
                )))
            }
        },
        None => interfere::acceptance::run_all(args.fast),
    };
    let mut all_pass = true;
    for o in &outcomes {
        println!("{}", o.summary_line());
        all_pass &= o.pass;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_VERDICT })
}
