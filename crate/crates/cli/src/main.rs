//! `flagvol` command-line interface.

mod bodies;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flagvol::constants::ball_volume;
use flagvol::flag_measure::Body;
use flagvol::kernel::{c_constants, CSource, PhiTable};
use flagvol::mc::McConfig;
use flagvol::mixed_volume::{v_kl_direct, v_kl_eps, v_kl_flag};
use flagvol::multilinear::binomial;
use flagvol::oracle::{minkowski_poly_3d, zonotope_mixed};
use flagvol::sampling::sample_rotation;
use flagvol::{Error, Result};
use serde::Serialize;
use serde_json::json;

use bodies::{parse_pair, BodySpec, BUILTINS};
use report::{Format, Report, Row, RunConfig};
use verify::{Budget, Item};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

/// Streams reserved for the optional random rotations; batch streams count up from 0.
const ROTATE_K_STREAM: u64 = u64::MAX;
const ROTATE_L_STREAM: u64 = u64::MAX - 1;

/// Sample budget for Monte Carlo constants when no closed form exists.
const CONSTANT_SAMPLES: u64 = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "flagvol", version, about = "Mixed volumes through flag-measure integrals")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo sample budget (per estimate).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Directory for cached constant tables.
    #[arg(long, global = true, env = "FLAGVOL_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grassmann moment constants, D matrices and the kernel coefficients.
    Constants(ConstantsArgs),
    /// Estimate V_{k,l}(K, L).
    Mixedvol(MixedvolArgs),
    /// Run the reference checks and print one line per item.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct ConstantsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    /// Use closed-form constants (available for k in {0, 1, d-1, d}).
    #[arg(long)]
    exact_c: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
enum ModeArg {
    #[value(name = "flag_IR1")]
    #[serde(rename = "flag_IR1")]
    FlagIr1,
    #[value(name = "flag_IR2")]
    #[serde(rename = "flag_IR2")]
    FlagIr2,
    #[value(name = "direct_IR")]
    #[serde(rename = "direct_IR")]
    DirectIr,
}

#[derive(Args, Debug, Serialize)]
struct MixedvolArgs {
    /// First body.
    #[arg(long = "K", help = format!("First body: {BUILTINS}"))]
    k_body: String,
    /// Second body.
    #[arg(long = "L", help = format!("Second body: {BUILTINS}"))]
    l_body: String,
    #[arg(long = "rotate-K")]
    rotate_k: bool,
    #[arg(long = "rotate-L")]
    rotate_l: bool,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::FlagIr2)]
    mode: ModeArg,
    /// Cut-off for flag_IR1.
    #[arg(long, required_if_eq("mode", "flag_IR1"))]
    eps: Option<f64>,
    /// Compare with an independent reference value.
    #[arg(long)]
    oracle: bool,
    /// Accept bodies outside general relative position.
    #[arg(long)]
    acknowledge_rotation: bool,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Run only these items (repeatable).
    #[arg(long, value_enum)]
    item: Vec<Item>,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        Error::Precondition(_)
        | Error::NotGeneralPosition { .. }
        | Error::Dimension(_)
        | Error::IndexOutOfRange { .. }
        | Error::InvalidPolytope(_)
        | Error::InvalidFlag(_)
        | Error::Unsupported(_)
        | Error::Grade { .. } => EXIT_PRECONDITION,
        _ => EXIT_NUMERIC,
    }
}

fn run_config(common: &Common, command: &str, params: impl Serialize) -> RunConfig {
    RunConfig {
        command: command.into(),
        params: serde_json::to_value(params).unwrap_or_default(),
        seed: common.seed,
        samples: common.samples,
        threads: common.threads,
        cache_dir: cache_dir(common),
        output: common.output.clone(),
        format: common.format,
    }
}

fn cache_dir(common: &Common) -> Option<PathBuf> {
    common
        .cache_dir
        .clone()
        .or_else(|| dirs::cache_dir().map(|d| d.join("flagvol")))
}

fn mc_config(common: &Common, default_samples: u64) -> McConfig {
    let cfg = McConfig::new(common.samples.unwrap_or(default_samples), common.seed);
    match common.threads {
        Some(t) => cfg.with_threads(t),
        None => cfg,
    }
}

/// Exact constants when they exist, cached Monte Carlo ones otherwise.
fn kernel_table(common: &Common, d: usize, k: usize) -> Result<PhiTable> {
    let dir = cache_dir(common);
    match PhiTable::load_or_build(dir.as_deref(), d, k, &CSource::Exact) {
        Err(Error::Unsupported(_)) => {
            let source = CSource::MonteCarlo(McConfig::new(CONSTANT_SAMPLES, common.seed));
            PhiTable::load_or_build(dir.as_deref(), d, k, &source)
        }
        other => other,
    }
}

fn table_provenance(t: &PhiTable) -> serde_json::Value {
    json!({
        "table": format!("phi d={} k={}", t.d, t.k),
        "k": t.provenance_k,
        "l": t.provenance_l,
        "seed": t.seed,
        "n": t.n,
    })
}

fn cmd_constants(common: &Common, args: &ConstantsArgs) -> Result<Report> {
    let mut report = Report::new(run_config(common, "constants", args));
    let source = if args.exact_c {
        CSource::Exact
    } else {
        CSource::MonteCarlo(mc_config(common, CONSTANT_SAMPLES))
    };
    let mut details = json!({});
    match c_constants(args.d, args.k, &source) {
        Ok(c) => {
            for (i, (v, e)) in c.values.iter().zip(&c.std_errors).enumerate() {
                report.rows.push(Row::value(format!("c^{}_{{{},{i}}}", args.d, args.k), *v).err(*e));
            }
            report.provenance.push(json!({ "c": format!("d={} k={}", args.d, args.k), "provenance": c.provenance }));
            details["c"] = serde_json::to_value(&c)?;
        }
        // the kernel table below may still have exact inputs
        Err(Error::Unsupported(msg)) if args.k >= 1 && args.k < args.d => report.notes.push(msg),
        Err(e) => return Err(e),
    }
    if args.k >= 1 && args.k < args.d {
        let dir = cache_dir(common);
        let table = PhiTable::load_or_build(dir.as_deref(), args.d, args.k, &source)?;
        for (name, c) in [("c_k", &table.c_k), ("c_l", &table.c_l)] {
            for (i, v) in c.iter().enumerate() {
                report.rows.push(Row::value(format!("{name}[{i}]"), *v));
            }
        }
        for (name, m) in [("D_k", &table.d_k), ("D_l", &table.d_l), ("alpha", &table.alpha)] {
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    report.rows.push(Row::value(format!("{name}[{i}][{j}]"), *v));
                }
            }
        }
        report.notes.push(format!(
            "alpha system residual {:.1e}, condition {:.1e}",
            table.errors.residual, table.errors.condition
        ));
        if let Some(dir) = dir {
            report.notes.push(format!("table cached under {}", dir.display()));
        }
        report.provenance.push(table_provenance(&table));
        details["table"] = serde_json::to_value(&table)?;
    }
    report.details = details;
    Ok(report)
}

fn rotation_for(spec: BodySpec, rotate: bool, seed: u64, stream: u64) -> Result<BodySpec> {
    if !rotate {
        return Ok(spec);
    }
    let rho = sample_rotation(spec.body.dim(), &mut McConfig::new(1, seed).stream(stream));
    spec.rotate(&rho)
}

fn ball_radius(b: &Body) -> Option<f64> {
    match b {
        Body::Ball { radius, .. } => Some(*radius),
        Body::Polytope(_) => None,
    }
}

/// Reference value for `V_{k,d−k}(K, L)` when one is available.
fn oracle_value(k_spec: &BodySpec, l_spec: &BodySpec, k: usize) -> Result<Option<(f64, &'static str)>> {
    let d = k_spec.body.dim();
    let l = d - k;
    let (kb, lb) = (&k_spec.body, &l_spec.body);
    let kappa = |j: usize| ball_volume(j);
    Ok(match (ball_radius(kb), ball_radius(lb)) {
        (Some(r), Some(s)) => Some((
            binomial(d, k) as f64 * kappa(d) * r.powi(k as i32) * s.powi(l as i32),
            "ball mixed volume",
        )),
        (Some(r), None) => Some((kappa(k) * lb.intrinsic_volume(l) * r.powi(k as i32), "ball identity")),
        (None, Some(s)) => Some((kappa(l) * kb.intrinsic_volume(k) * s.powi(l as i32), "ball identity")),
        (None, None) => match (&k_spec.generators, &l_spec.generators) {
            (Some(gk), Some(gl)) => Some((zonotope_mixed(gk, gl, k)?, "zonotope determinants")),
            _ if d == 3 => {
                let fit = minkowski_poly_3d(
                    kb.as_polytope().unwrap(),
                    lb.as_polytope().unwrap(),
                    &[0.5, 1.0, 1.5, 2.0, 3.0],
                )?;
                Some((fit.get(k), "Minkowski-sum polynomial"))
            }
            _ => None,
        },
    })
}

fn cmd_mixedvol(common: &Common, args: &MixedvolArgs) -> Result<Report> {
    let mut report = Report::new(run_config(common, "mixedvol", args));
    let (k_spec, l_spec) = parse_pair(&args.k_body, &args.l_body)?;
    let k_spec = rotation_for(k_spec, args.rotate_k, common.seed, ROTATE_K_STREAM)?;
    let l_spec = rotation_for(l_spec, args.rotate_l, common.seed, ROTATE_L_STREAM)?;
    let d = k_spec.body.dim();
    if l_spec.body.dim() != d {
        return Err(Error::Dimension(format!("K lies in R^{d}, L in R^{}", l_spec.body.dim())));
    }
    if args.k == 0 || args.k >= d {
        return Err(Error::IndexOutOfRange { index: args.k, max: d - 1 });
    }
    let name = format!("V_{{{},{}}}({}, {})", args.k, d - args.k, k_spec.name, l_spec.name);
    let cfg = mc_config(common, 1_000_000);
    let mut details = json!({});
    let est = match args.mode {
        ModeArg::DirectIr => {
            let (Some(p), Some(q)) = (k_spec.body.as_polytope(), l_spec.body.as_polytope()) else {
                return Err(Error::Precondition("direct_IR needs two polytopes".into()));
            };
            v_kl_direct(p, q, args.k, &cfg)?
        }
        ModeArg::FlagIr1 | ModeArg::FlagIr2 => {
            let table = kernel_table(common, d, args.k)?;
            report.provenance.push(table_provenance(&table));
            if args.mode == ModeArg::FlagIr1 {
                let eps = args.eps.expect("clap enforces --eps");
                v_kl_eps(&k_spec.body, &l_spec.body, args.k, eps, &table, &cfg)?
            } else {
                let rep = v_kl_flag(&k_spec.body, &l_spec.body, args.k, &table, &cfg, args.acknowledge_rotation)?;
                report.notes.extend(rep.preconditions_checked.iter().cloned());
                if let Some(g) = rep.guard {
                    report.rows.push(Row::value("guard integral", g.mean).err(g.std_error));
                }
                details["flag_report"] = serde_json::to_value(&rep)?;
                rep.estimate()
            }
        }
    };
    let mut row = Row::value(name, est.mean).err(est.std_error);
    if args.oracle {
        match oracle_value(&k_spec, &l_spec, args.k)? {
            Some((target, method)) => {
                let tol = (3.0 * est.std_error).max(0.02 * target.abs());
                let pass = (est.mean - target).abs() <= tol;
                report.notes.push(format!(
                    "oracle ({method}) {target:.6}: {} within max(3 sigma, 2%)",
                    if pass { "agrees" } else { "does NOT agree" }
                ));
                details["oracle"] = json!({ "value": target, "method": method });
                row = row.target(target, pass);
            }
            None => report.notes.push("no oracle available for this pair".into()),
        }
    }
    report.rows.insert(0, row);
    details["estimate"] = serde_json::to_value(est)?;
    report.details = details;
    Ok(report)
}

fn cmd_verify(common: &Common, args: &VerifyArgs) -> Result<Report> {
    let mut report = Report::new(run_config(common, "verify", args));
    let budget = Budget {
        samples: common.samples,
        seed: common.seed,
        threads: common.threads,
    };
    let items: Vec<Item> = if args.item.is_empty() {
        Item::value_variants().to_vec()
    } else {
        args.item.clone()
    };
    let mut ledger = Vec::new();
    for item in items {
        let rows = verify::run(item, &budget)?;
        let pass = rows.iter().all(|r| r.pass != Some(false));
        eprintln!("{:<11} {}", item.name(), if pass { "PASS" } else { "FAIL" });
        ledger.push(json!({ "item": item.name(), "pass": pass }));
        report
            .rows
            .extend(rows.into_iter().map(|r| Row { name: format!("{}: {}", item.name(), r.name), ..r }));
    }
    report.provenance.push(json!({ "tables": "closed-form or Monte Carlo constants built per item" }));
    report.details = json!({ "items": ledger });
    if let Some(path) = &args.json {
        std::fs::write(path, report.render(Format::Json)?)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = &cli.common;
    let result = match &cli.command {
        Command::Constants(a) => cmd_constants(common, a),
        Command::Mixedvol(a) => cmd_mixedvol(common, a),
        Command::Verify(a) => cmd_verify(common, a),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = report.emit() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_IO);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC)
    }
}
