//! Batch front door: wires kernels, solvers and simulators to CSV/JSON files.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.

use clap::{Args, Parser, Subcommand};
use gfcalc::diffusion::{self, ZRoute};
use gfcalc::kernel::{check_admissibility, ConditionReport, KernelSpec, KernelWire};
use gfcalc::laplace::InversionConfig;
use gfcalc::relaxation;
use gfcalc::renewal::{self, SubordinatorSpec};
use gfcalc::sampled::{lin_grid, log_grid, Interpolation, SampledFunction};
use gfcalc::sonine;
use gfcalc::verify;
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gfcalc", version, about = "memory-kernel fractional calculus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the admissibility of a kernel and emit the probe report
    KernelCheck(KernelCheckArgs),
    /// Tabulate the conjugate kernel and the pair-identity residual
    Sonine(SonineArgs),
    /// Solve the relaxation problem and tabulate u(t)
    Relax(RelaxArgs),
    /// Tabulate the fundamental solution Z(t, x) or solve for initial data
    Heat(HeatArgs),
    /// Simulate renewal waiting times of the time-changed Poisson process
    Renew(RenewArgs),
    /// Run the full acceptance suite and print a pass/fail table
    VerifyAll(VerifyArgs),
}

#[derive(Args)]
struct KernelArg {
    /// Kernel: `caputo:0.5`, `log:0.5`, `dist:0.3@0.5,0.8@0.5`, `box`,
    /// inline JSON, or `@file.json`
    #[arg(long)]
    kernel: String,
}

#[derive(Args)]
struct KernelCheckArgs {
    #[command(flatten)]
    kernel: KernelArg,
    /// Write the JSON report here as well as to stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SonineArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long, default_value_t = 0.01)]
    tmin: f64,
    #[arg(long, default_value_t = 100.0)]
    tmax: f64,
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// CSV output path for (t, kappa)
    #[arg(long)]
    out: Option<String>,
    /// JSON envelope path
    #[arg(long)]
    json: Option<String>,
}

#[derive(Args)]
struct RelaxArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-2)]
    tmin: f64,
    #[arg(long)]
    tmax: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Inversion route: stehfest or talbot
    #[arg(long, default_value = "stehfest")]
    method: String,
    /// CSV output path for (t, u)
    #[arg(long)]
    out: Option<String>,
    /// JSON envelope path
    #[arg(long)]
    json: Option<String>,
}

#[derive(Args)]
struct HeatArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 12.0)]
    xmax: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Z construction: subordination or laplace
    #[arg(long, default_value = "subordination")]
    route: String,
    /// Optional initial-datum CSV (x, value); output switches to (x, w)
    #[arg(long)]
    w0: Option<String>,
    /// CSV output path
    #[arg(long)]
    out: Option<String>,
    /// JSON envelope path
    #[arg(long)]
    json: Option<String>,
}

#[derive(Args)]
struct RenewArgs {
    /// Stable index; mutually exclusive with --kernel
    #[arg(long)]
    alpha: Option<f64>,
    /// Kernel-derived subordinator (exponent s·𝒦(s))
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long, default_value_t = 10)]
    jumps: usize,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path for waiting times
    #[arg(long)]
    out: Option<String>,
    /// JSON envelope path
    #[arg(long)]
    json: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON results path
    #[arg(long)]
    json: Option<String>,
}

#[derive(Serialize)]
struct Envelope {
    command: String,
    kernel: Option<KernelWire>,
    condition_report: Option<ConditionReport>,
    params: serde_json::Value,
    outputs: Vec<String>,
    results: serde_json::Value,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: msg.into(),
        }
    }
}

impl From<gfcalc::Error> for Failure {
    fn from(e: gfcalc::Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::KernelCheck(a) => kernel_check(a),
        Command::Sonine(a) => sonine_cmd(a),
        Command::Relax(a) => relax_cmd(a),
        Command::Heat(a) => heat_cmd(a),
        Command::Renew(a) => renew_cmd(a),
        Command::VerifyAll(a) => verify_cmd(a),
    }
}

fn parse_kernel(s: &str) -> Result<KernelSpec, Failure> {
    let text = s.trim();
    if let Some(path) = text.strip_prefix('@') {
        let body = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("--kernel file `{path}`: {e}")))?;
        return KernelSpec::from_json(&body).map_err(|e| Failure::config(format!("--kernel: {e}")));
    }
    if text.starts_with('{') {
        return KernelSpec::from_json(text).map_err(|e| Failure::config(format!("--kernel: {e}")));
    }
    let lower = text.to_ascii_lowercase();
    if lower == "box" {
        return Ok(KernelSpec::box_kernel());
    }
    if let Some(rest) = lower.strip_prefix("caputo:") {
        let alpha: f64 = rest
            .parse()
            .map_err(|_| Failure::config(format!("--kernel: bad order `{rest}`")))?;
        return KernelSpec::caputo(alpha).map_err(|e| Failure::config(format!("--kernel: {e}")));
    }
    if let Some(rest) = lower.strip_prefix("log:") {
        let beta: f64 = rest
            .parse()
            .map_err(|_| Failure::config(format!("--kernel: bad exponent `{rest}`")))?;
        return KernelSpec::log_bernstein(beta)
            .map_err(|e| Failure::config(format!("--kernel: {e}")));
    }
    if let Some(rest) = lower.strip_prefix("dist:") {
        let mut atoms = Vec::new();
        for part in rest.split(',') {
            let (a, w) = part.split_once('@').ok_or_else(|| {
                Failure::config(format!("--kernel: atom `{part}` needs alpha@weight"))
            })?;
            let alpha: f64 = a
                .parse()
                .map_err(|_| Failure::config(format!("--kernel: bad alpha `{a}`")))?;
            let weight: f64 = w
                .parse()
                .map_err(|_| Failure::config(format!("--kernel: bad weight `{w}`")))?;
            atoms.push((alpha, weight));
        }
        return KernelSpec::distributed(atoms)
            .map_err(|e| Failure::config(format!("--kernel: {e}")));
    }
    Err(Failure::config(format!(
        "--kernel: unrecognized spec `{text}` (expected caputo:A, log:B, dist:a@w,..., box, JSON, or @file)"
    )))
}

fn write_envelope(env: &Envelope, extra_path: Option<&str>) -> Result<(), Failure> {
    let body = serde_json::to_string_pretty(env)
        .map_err(|e| Failure::config(format!("serialization: {e}")))?;
    println!("{body}");
    if let Some(path) = extra_path {
        fs::write(path, body.as_bytes())
            .map_err(|e| Failure::config(format!("--json `{path}`: {e}")))?;
    }
    Ok(())
}

fn write_csv(sf: &SampledFunction, path: &str, header: (&str, &str)) -> Result<(), Failure> {
    let mut buf = Vec::new();
    sf.write_csv_with_header(&mut buf, header.0, header.1)
        .map_err(Failure::from)?;
    fs::write(path, buf).map_err(|e| Failure::config(format!("--out `{path}`: {e}")))?;
    Ok(())
}

fn kernel_check(a: KernelCheckArgs) -> Result<(), Failure> {
    let spec = parse_kernel(&a.kernel.kernel)?;
    let report = check_admissibility(&spec);
    let env = Envelope {
        command: "kernel-check".into(),
        kernel: Some(spec.to_wire()),
        condition_report: Some(report.clone()),
        params: json!({}),
        outputs: a.out.iter().cloned().collect(),
        results: json!({ "passed": report.passed }),
    };
    write_envelope(&env, a.out.as_deref())?;
    Ok(())
}

fn sonine_cmd(a: SonineArgs) -> Result<(), Failure> {
    if !(a.tmin > 0.0 && a.tmax > a.tmin) {
        return Err(Failure::config("--tmin/--tmax: need 0 < tmin < tmax"));
    }
    if a.points < 2 {
        return Err(Failure::config("--points: need at least 2"));
    }
    let spec = parse_kernel(&a.kernel.kernel)?;
    let report = check_admissibility(&spec);
    let kappa = sonine::build_kappa(&spec)?;
    let grid = log_grid(a.tmin, a.tmax, a.points);
    let mut kappa_vals = Vec::with_capacity(grid.len());
    let mut residuals = Vec::with_capacity(grid.len());
    for &t in &grid {
        kappa_vals.push(kappa.eval_kappa(t)?);
        residuals.push(sonine::sonine_residual_with(&spec, &kappa, t)?);
    }
    let sf = SampledFunction::new(grid.clone(), kappa_vals, Interpolation::PiecewiseLinear)?;
    if let Some(path) = &a.out {
        write_csv(&sf, path, ("t", "value"))?;
    }
    let max_residual = residuals.iter().cloned().fold(0.0_f64, |m, r| m.max(r.abs()));
    let env = Envelope {
        command: "sonine".into(),
        kernel: Some(spec.to_wire()),
        condition_report: Some(report),
        params: json!({ "tmin": a.tmin, "tmax": a.tmax, "points": a.points }),
        outputs: a.out.iter().cloned().collect(),
        results: json!({
            "max_abs_pair_residual": max_residual,
            "grid": grid,
            "pair_residuals": residuals,
        }),
    };
    write_envelope(&env, a.json.as_deref())?;
    Ok(())
}

fn relax_cmd(a: RelaxArgs) -> Result<(), Failure> {
    if a.lambda < 0.0 {
        return Err(Failure::config(format!(
            "--lambda: must be >= 0, got {}",
            a.lambda
        )));
    }
    if !(a.tmin > 0.0 && a.tmax > a.tmin) {
        return Err(Failure::config("--tmin/--tmax: need 0 < tmin < tmax"));
    }
    if a.points < 2 {
        return Err(Failure::config("--points: need at least 2"));
    }
    let cfg = match a.method.as_str() {
        "stehfest" => InversionConfig::default(),
        "talbot" => InversionConfig::talbot(),
        other => {
            return Err(Failure::config(format!(
                "--method: `{other}` is not one of stehfest, talbot"
            )))
        }
    };
    let spec = parse_kernel(&a.kernel.kernel)?;
    let report = check_admissibility(&spec);
    let grid = log_grid(a.tmin, a.tmax, a.points);
    let sol = relaxation::solve_relaxation(&spec, a.lambda, grid, &cfg)?;
    if let Some(path) = &a.out {
        write_csv(&sol.samples, path, ("t", "value"))?;
    }
    let env = Envelope {
        command: "relax".into(),
        kernel: Some(spec.to_wire()),
        condition_report: Some(report),
        params: json!({
            "lambda": a.lambda,
            "tmin": a.tmin,
            "tmax": a.tmax,
            "points": a.points,
            "method": a.method,
        }),
        outputs: a.out.iter().cloned().collect(),
        results: json!({
            "u_at_zero": sol.u_at_zero,
            "diagnostics": sol.diagnostics,
            "u_first": sol.samples.values().first(),
            "u_last": sol.samples.values().last(),
        }),
    };
    write_envelope(&env, a.json.as_deref())?;
    Ok(())
}

fn heat_cmd(a: HeatArgs) -> Result<(), Failure> {
    if a.points < 3 {
        return Err(Failure::config("--points: need at least 3"));
    }
    if !(a.xmax > 0.0) {
        return Err(Failure::config("--xmax: must be positive"));
    }
    let route = match a.route.as_str() {
        "subordination" => ZRoute::Subordination,
        "laplace" => ZRoute::LaplaceClosedForm,
        other => {
            return Err(Failure::config(format!(
                "--route: `{other}` is not one of subordination, laplace"
            )))
        }
    };
    let spec = parse_kernel(&a.kernel.kernel)?;
    let report = check_admissibility(&spec);

    let (sf, header, results) = if let Some(w0_path) = &a.w0 {
        let file = fs::File::open(w0_path)
            .map_err(|e| Failure::config(format!("--w0 `{w0_path}`: {e}")))?;
        let w0 = SampledFunction::read_csv(file, Interpolation::PiecewiseLinear)?;
        let sol = diffusion::solve_heat(&spec, &w0, a.t, a.dim, None)?;
        let w = sol.w_values.clone().expect("solve_heat fills w");
        let sf = SampledFunction::new(sol.x_grid.clone(), w, Interpolation::PiecewiseLinear)?;
        let results = json!({
            "mass": sol.diagnostics.mass,
            "min_z": sol.diagnostics.min_z,
            "holder": sol.holder,
            "notes": sol.diagnostics.notes,
        });
        (sf, ("x", "w"), results)
    } else {
        let grid = if a.dim == 1 {
            lin_grid(-a.xmax, a.xmax, a.points)
        } else {
            // radial grid, origin excluded
            lin_grid(a.xmax / a.points as f64, a.xmax, a.points)
        };
        let sol = diffusion::heat_kernel_profile(&spec, a.t, &grid, a.dim, route)?;
        let sf = SampledFunction::new(
            sol.x_grid.clone(),
            sol.z_values.clone(),
            Interpolation::PiecewiseLinear,
        )?;
        let results = json!({
            "mass": sol.diagnostics.mass,
            "min_z": sol.diagnostics.min_z,
            "notes": sol.diagnostics.notes,
        });
        (sf, ("x", "Z"), results)
    };
    if let Some(path) = &a.out {
        write_csv(&sf, path, header)?;
    }
    let env = Envelope {
        command: "heat".into(),
        kernel: Some(spec.to_wire()),
        condition_report: Some(report),
        params: json!({
            "t": a.t,
            "xmax": a.xmax,
            "points": a.points,
            "dim": a.dim,
            "route": a.route,
            "w0": a.w0,
        }),
        outputs: a.out.iter().cloned().collect(),
        results,
    };
    write_envelope(&env, a.json.as_deref())?;
    Ok(())
}

fn renew_cmd(a: RenewArgs) -> Result<(), Failure> {
    let (sub, spec) = match (&a.alpha, &a.kernel) {
        (Some(alpha), None) => {
            let sub = SubordinatorSpec::stable(*alpha)?;
            let spec = sub.matching_kernel()?;
            (sub, spec)
        }
        (None, Some(kernel)) => {
            let spec = parse_kernel(kernel)?;
            (SubordinatorSpec::from_kernel(spec.clone())?, spec)
        }
        _ => {
            return Err(Failure::config(
                "--alpha or --kernel: exactly one must be given",
            ))
        }
    };
    if a.lambda <= 0.0 {
        return Err(Failure::config(format!(
            "--lambda: must be positive, got {}",
            a.lambda
        )));
    }
    let report = check_admissibility(&spec);
    let sample = renewal::simulate_waiting_times(&sub, a.lambda, a.jumps, a.paths, a.step, a.seed)?;

    if let Some(path) = &a.out {
        let mut buf = Vec::new();
        writeln!(&mut buf, "index,waiting_time").map_err(gfcalc::Error::from)?;
        for (i, j) in sample.waiting_times.iter().enumerate() {
            writeln!(&mut buf, "{i},{j}").map_err(gfcalc::Error::from)?;
        }
        fs::write(path, buf).map_err(|e| Failure::config(format!("--out `{path}`: {e}")))?;
    }

    // distance statistic against the solver's own survival curve
    let cfg = InversionConfig::default();
    let mut sorted = sample.waiting_times.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite waiting times"));
    let lo = sorted[(sorted.len() as f64 * 0.01) as usize].max(1e-3);
    let hi = sorted[(sorted.len() as f64 * 0.99) as usize]
        .min(1e3)
        .max(lo * 10.0);
    let oracle_grid = log_grid(lo, hi, 50);
    let mut oracle_curve = Vec::with_capacity(oracle_grid.len());
    for &t in &oracle_grid {
        oracle_curve.push(relaxation::renewal_survival(&spec, a.lambda, t, &cfg)?);
    }
    let distance = renewal::survival_distance(
        &sample,
        |t| relaxation::renewal_survival(&spec, a.lambda, t, &cfg).unwrap_or(f64::NAN),
        (lo, hi),
    )?;

    let env = Envelope {
        command: "renew".into(),
        kernel: Some(spec.to_wire()),
        condition_report: Some(report),
        params: json!({
            "lambda": a.lambda,
            "paths": a.paths,
            "jumps": a.jumps,
            "step": a.step,
            "seed": a.seed,
        }),
        outputs: a.out.iter().cloned().collect(),
        results: json!({
            "n_waiting_times": sample.waiting_times.len(),
            "complete": sample.complete,
            "survival_distance": distance,
            "window": [lo, hi],
            "oracle_grid": oracle_grid,
            "oracle_survival": oracle_curve,
        }),
    };
    write_envelope(&env, a.json.as_deref())?;
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<(), Failure> {
    let results = verify::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let all_pass = results.iter().all(|r| r.passed);
    println!(
        "{}: {}/{} criteria passed",
        if all_pass { "OK" } else { "FAILED" },
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    if let Some(path) = &a.json {
        let body = serde_json::to_string_pretty(&results)
            .map_err(|e| Failure::config(format!("serialization: {e}")))?;
        fs::write(path, body).map_err(|e| Failure::config(format!("--json `{path}`: {e}")))?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "acceptance criteria failed".into(),
        })
    }
}
