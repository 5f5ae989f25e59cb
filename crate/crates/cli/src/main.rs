//! `rotund`: solve, cross-check, tabulate and verify from the command line.
//!
//! Exit status is 0 on success, 1 when a verification check fails and 2 on
//! bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use rotund::norm::{local_modulus, tangent_second_derivative, unit_direction, CURVATURE_THRESHOLD};
use rotund::quasihyp::{quasihyp_distance, quasihyp_regularity_report, QuasihypResult, RegularityReport};
use rotund::solver::{geodesic_solve, grid_oracle, steiner_solve, GridOracleParams, Neighborhood, SolveParams};
use rotund::svg::to_svg;
use rotund::verify::{run_suite, Suite};
use rotund::{Domain, Gauge, ModulusCurve, NormSpec, SearchParams, WeightField};

#[derive(Parser)]
#[command(
    name = "rotund",
    version,
    about = "Weighted geodesics and Steiner networks in l_p spaces"
)]
struct Cli {
    /// Seed for every random choice; replaces `params.seed` in instances.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for `verify all` (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize weighted length.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Quasihyperbolic distance and geodesic in a domain.
    Quasihyp(QuasihypArgs),
    /// Independent estimates to compare solver output against.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Tabulate the modulus of rotundity of a norm.
    Modulus(ModulusArgs),
    /// Evaluate a gauge, its mean slope or its Dini property.
    Gauge(GaugeArgs),
    /// Run verification suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Two-terminal geodesic.
    Geodesic(SolveArgs),
    /// Steiner network on 3 or 4 terminals.
    Steiner(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Result JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct QuasihypArgs {
    /// Domain JSON.
    #[arg(long)]
    domain: PathBuf,
    /// Start point as comma-separated coordinates.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    from: Point,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    to: Point,
    /// Solver parameters JSON.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Also compare the geodesic's tangent oscillation with its modulus.
    #[arg(long)]
    regularity: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Dijkstra on a lattice over the domain.
    Grid(GridArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    /// Stencil size, 8 or 16.
    #[arg(long, default_value_t = 8)]
    neighborhood: u8,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModulusArgs {
    /// Norm JSON.
    #[arg(long)]
    norm: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Tabulate the directional modulus over a sweep of unit directions.
    #[arg(long)]
    local: bool,
    #[arg(long, default_value_t = 720, requires = "local")]
    sweep: usize,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("query").required(true).args(["eval", "mean_slope", "dini"])))]
struct GaugeArgs {
    /// Gauge JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    eval: Option<f64>,
    #[arg(long)]
    mean_slope: Option<f64>,
    #[arg(long)]
    dini: bool,
    /// Ratio of the geometric scales in the Dini test.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Terms of the dyadic series in the Dini test.
    #[arg(long, default_value_t = 32)]
    terms: usize,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Every check of a suite.
    All(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: PathBuf,
    /// Directory for `summary.json` and the per-check CSV files.
    #[arg(long)]
    report: PathBuf,
}

/// A solve or oracle problem.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Instance {
    terminals: Vec<Vec<f64>>,
    weight: WeightField,
    #[serde(default)]
    domain: Option<Domain>,
    norm: NormSpec,
    #[serde(default)]
    params: SolveParams,
}

enum Failure {
    /// Bad arguments, unreadable or malformed files, or a library error.
    Input(String),
    /// A verification suite ran and failed.
    Check,
}

impl From<rotund::Error> for Failure {
    fn from(e: rotund::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// A point given on the command line as `x,y[,...]`.
#[derive(Clone)]
struct Point(Vec<f64>);

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coordinate {c:?}: {e}"))
        })
        .collect::<Result<_, _>>()
        .map(Point)
}

/// Parses a JSON file, naming the failing field and position on error.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        // flattened and validated types report the root path only
        let at = match e.path().to_string() {
            p if p == "." => String::new(),
            p => format!(" at `{p}`"),
        };
        Failure::Input(format!("{}{at}: {}", path.display(), e.inner()))
    })?;
    de.end()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(value)
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn write_svg(path: Option<&Path>, net: &rotund::Network) -> Outcome {
    match path {
        Some(p) => write_text(Some(p), &to_svg(net)?),
        None => Ok(()),
    }
}

fn solve(cmd: &SolveCommand, seed: u64) -> Outcome {
    let (args, steiner) = match cmd {
        SolveCommand::Geodesic(a) => (a, false),
        SolveCommand::Steiner(a) => (a, true),
    };
    let inst: Instance = read_json(&args.instance)?;
    let params = SolveParams { seed, ..inst.params };
    if let Some(d) = &inst.domain {
        if let Some(p) = inst
            .terminals
            .iter()
            .find(|p| p.len() == d.norm().dim() && !d.contains(p))
        {
            return Err(Failure::Input(format!("terminal {p:?} lies outside the domain")));
        }
    }
    if steiner {
        let r = steiner_solve(&inst.terminals, &inst.weight, &inst.norm, &params)?;
        write_json(args.out.as_deref(), &r)?;
        write_svg(args.svg.as_deref(), &r.network)
    } else {
        let [x0, x1] = inst.terminals.as_slice() else {
            return Err(Failure::Input(format!(
                "a geodesic needs 2 terminals, got {}",
                inst.terminals.len()
            )));
        };
        let r = geodesic_solve(x0, x1, &inst.weight, &inst.norm, &params)?;
        write_json(args.out.as_deref(), &r)?;
        write_svg(args.svg.as_deref(), &r.polyline.to_network()?)
    }
}

#[derive(Serialize)]
struct QuasihypOutput {
    #[serde(flatten)]
    result: QuasihypResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    regularity: Option<RegularityReport>,
}

fn quasihyp(args: &QuasihypArgs, seed: u64) -> Outcome {
    let domain: Domain = read_json(&args.domain)?;
    let base: SolveParams = match &args.params {
        Some(p) => read_json(p)?,
        None => SolveParams::default(),
    };
    let params = SolveParams { seed, ..base };
    let result = quasihyp_distance(&domain, &args.from.0, &args.to.0, &params)?;
    let regularity = if args.regularity {
        let curve = ModulusCurve::tabulate(domain.norm(), &ModulusCurve::default_grid(), &SearchParams::default())?;
        Some(quasihyp_regularity_report(&result.geodesic, &domain, &curve)?)
    } else {
        None
    };
    write_svg(args.svg.as_deref(), &result.geodesic.to_network()?)?;
    write_json(args.out.as_deref(), &QuasihypOutput { result, regularity })
}

fn oracle(cmd: &OracleCommand) -> Outcome {
    let OracleCommand::Grid(args) = cmd;
    let inst: Instance = read_json(&args.instance)?;
    let domain = inst
        .domain
        .as_ref()
        .ok_or_else(|| Failure::Input("the grid oracle needs a domain".into()))?;
    let [x0, x1] = inst.terminals.as_slice() else {
        return Err(Failure::Input(format!(
            "the grid oracle needs 2 terminals, got {}",
            inst.terminals.len()
        )));
    };
    let params = GridOracleParams {
        resolution: args.resolution,
        neighborhood: Neighborhood::try_from(args.neighborhood)?,
    };
    let r = grid_oracle(x0, x1, &inst.weight, domain, &inst.norm, &params)?;
    write_json(args.out.as_deref(), &r)
}

fn modulus(args: &ModulusArgs) -> Outcome {
    let norm: NormSpec = read_json(&args.norm)?;
    if !args.local {
        let curve = ModulusCurve::tabulate(&norm, &ModulusCurve::default_grid(), &SearchParams::default())?;
        return write_text(Some(&args.out), &curve.to_csv());
    }
    if args.sweep == 0 {
        return Err(Failure::Input("--sweep must be at least 1".into()));
    }
    let mut csv = String::from("theta,curvature,in_g,eps,delta\n");
    for i in 0..args.sweep {
        let theta = std::f64::consts::TAU * i as f64 / args.sweep as f64;
        let v = unit_direction(&norm, theta);
        let curvature = tangent_second_derivative(&norm, &v)?;
        for k in 1..=8 {
            let eps = 0.5f64.powi(k);
            let delta = local_modulus(&norm, &v, eps)?;
            csv.push_str(&format!(
                "{theta},{curvature},{},{eps},{delta}\n",
                curvature > CURVATURE_THRESHOLD
            ));
        }
    }
    write_text(Some(&args.out), &csv)
}

fn gauge(args: &GaugeArgs) -> Outcome {
    let g: Gauge = read_json(&args.spec)?;
    if let Some(r) = args.eval {
        println!("{:?}", g.eval(r)?);
    } else if let Some(r) = args.mean_slope {
        println!("{:?}", g.mean_slope(r)?);
    } else {
        let verdict = g.dini_test(args.beta, args.terms)?;
        println!(
            "{}",
            serde_json::to_string(&verdict).map_err(|e| Failure::Input(e.to_string()))?
        );
    }
    Ok(())
}

fn verify(cmd: &VerifyCommand, seed: u64, jobs: usize) -> Outcome {
    let VerifyCommand::All(args) = cmd;
    let suite: Suite = read_json(&args.suite)?;
    let outcome = run_suite(&suite, seed, jobs, Some(&args.report))?;
    for r in &outcome.reports {
        let verdict = if r.passed() { "pass" } else { "FAIL" };
        let kind = if r.planted { " (planted)" } else { "" };
        println!(
            "{verdict} {}{kind}: {} violations in {} rows",
            r.check_name, r.violations, r.instances
        );
    }
    if outcome.passed {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Solve(cmd) => solve(cmd, cli.seed),
        Command::Quasihyp(args) => quasihyp(args, cli.seed),
        Command::Oracle(cmd) => oracle(cmd),
        Command::Modulus(args) => modulus(args),
        Command::Gauge(args) => gauge(args),
        Command::Verify(cmd) => verify(cmd, cli.seed, cli.jobs),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
