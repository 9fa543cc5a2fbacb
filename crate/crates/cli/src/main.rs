mod args;
mod wire;

use std::fs;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use elliptic_dm::closed_form::{e_function, elliptic_vandermonde, EForm};
use elliptic_dm::partition::{evaluate_w_bruteforce_capped, DEFAULT_ENUM_CAP};
use elliptic_dm::verify::checks::random_hexagon;
use elliptic_dm::verify::{
    property_campaign, sample_generic, theorem_sweep, ComplexBox, GenericitySampler, SuiteOptions, Tolerances,
    VerificationReport,
};
use elliptic_dm::{check_yang_baxter, evaluate_w_dp, g_closed_form, relative_residual, BoundarySpec, EllipticContext, ModelParams};

use args::{Cli, Command, ContextArgs, Form, Format, Method, OutputArgs, PointArgs, SweepArgs};
use wire::{parse_complex_list, report_csv, write_atomic, Row, WireComplex, WireParams};

const ENUM_CAP_VAR: &str = "ELLIPTIC_DM_MAX_ENUM";

/// Bad input on the command line; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Runs one subcommand; `Ok(false)` means a check failed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::EvalW { run, method } => eval_w(&run, method),
        Command::EvalG { run, form } => eval_g(&run, form),
        Command::Compare { run } => compare(&run),
        Command::Suite { sweep } => campaign(&sweep, property_campaign),
        Command::Sweep { sweep } => campaign(&sweep, theorem_sweep),
        Command::Ybr { context, output, seed, count } => ybr(&context, &output, seed, count),
    }
}

fn context(args: &ContextArgs) -> Result<EllipticContext> {
    if !(args.tol_scale.is_finite() && args.tol_scale > 0.0) {
        return usage(format!("--tol-scale must be positive, got {}", args.tol_scale));
    }
    EllipticContext::new(args.q, Complex64::new(args.lambda_re, args.lambda_im), args.trunc_eps)
        .map_err(|e| Usage(format!("elliptic context: {e}")).into())
}

fn enum_cap() -> Result<u64> {
    match std::env::var(ENUM_CAP_VAR) {
        Ok(text) => text.trim().parse().map_err(|_| Usage(format!("{ENUM_CAP_VAR} must be an integer, got {text:?}")).into()),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn emit(output: &OutputArgs, json: String, csv: impl FnOnce() -> Result<Vec<u8>>) -> Result<()> {
    let bytes = match output.format {
        Format::Json => json.into_bytes(),
        Format::Csv => csv()?,
    };
    match &output.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

fn emit_row(output: &OutputArgs, row: &Row) -> Result<()> {
    emit(output, row.json(), || row.csv())
}

struct Point {
    spec: BoundarySpec,
    params: ModelParams,
    ctx: EllipticContext,
}

fn point(args: &PointArgs) -> Result<Point> {
    let ctx = context(&args.context)?;
    let spec = BoundarySpec::new(args.m, args.n, args.x.clone()).map_err(|e| Usage(format!("boundary: {e}")))?;
    let params = if let Some(path) = &args.params_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let wire: WireParams = serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        wire.into()
    } else if args.u.is_some() || args.v.is_some() || args.a12_re.is_some() {
        let (Some(u), Some(v), Some(a12_re)) = (&args.u, &args.v, args.a12_re) else {
            return usage("explicit parameters need --u, --v and --a12-re together");
        };
        let u = parse_complex_list(u).map_err(|e| Usage(format!("--u: {e}")))?;
        let v = parse_complex_list(v).map_err(|e| Usage(format!("--v: {e}")))?;
        ModelParams::new(u, v, Complex64::new(a12_re, args.a12_im.unwrap_or(0.0)))
    } else {
        sample_generic(&spec, &GenericitySampler::default().with_seed(args.seed), &ctx)?
    };
    if params.u.len() != spec.n() || params.v.len() != spec.m() {
        return usage(format!(
            "expected {} u values and {} v values, got {} and {}",
            spec.n(),
            spec.m(),
            params.u.len(),
            params.v.len()
        ));
    }
    if let Some(path) = &args.dump_params {
        let mut text = serde_json::to_string_pretty(&WireParams::from(&params))?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    Ok(Point { spec, params, ctx })
}

fn header(pt: &Point, seed: u64) -> Row {
    let mut row = Row::default();
    row.push("M", pt.spec.m());
    row.push("N", pt.spec.n());
    row.push("x", pt.spec.x());
    row.push("q", pt.ctx.q());
    row.push("seed", seed);
    row
}

fn eval_w(args: &PointArgs, method: Method) -> Result<bool> {
    let pt = point(args)?;
    let w = match method {
        Method::Dp => evaluate_w_dp(&pt.spec, &pt.params, &pt.ctx)?,
        Method::Bruteforce => evaluate_w_bruteforce_capped(&pt.spec, &pt.params, &pt.ctx, enum_cap()?)?,
    };
    let mut row = header(&pt, args.seed);
    row.push("method", if method == Method::Dp { "dp" } else { "bruteforce" });
    row.push("W", WireComplex::from(w));
    emit_row(&args.output, &row)?;
    Ok(true)
}

fn eval_g(args: &PointArgs, form: Form) -> Result<bool> {
    let pt = point(args)?;
    let eform = match form {
        Form::Det => EForm::Determinant,
        Form::Perm => EForm::PermutationSum,
    };
    let mut br = &pt.ctx;
    let vandermonde = elliptic_vandermonde(&pt.params.u, &mut br)?;
    let e = e_function(&pt.spec, &pt.params, eform, &mut br)?;
    let mut row = header(&pt, args.seed);
    row.push("form", if form == Form::Det { "det" } else { "perm" });
    row.push("vandermonde", WireComplex::from(vandermonde));
    row.push("E", WireComplex::from(e));
    row.push("G", WireComplex::from(vandermonde * e));
    emit_row(&args.output, &row)?;
    Ok(true)
}

fn compare(args: &PointArgs) -> Result<bool> {
    let pt = point(args)?;
    let w = evaluate_w_dp(&pt.spec, &pt.params, &pt.ctx)?;
    let g = g_closed_form(&pt.spec, &pt.params, &pt.ctx)?;
    let residual = relative_residual(w, g);
    let tol = Tolerances::default().scaled(args.context.tol_scale).lattice;
    let pass = residual <= tol;
    let mut row = header(&pt, args.seed);
    row.push("W", WireComplex::from(w));
    row.push("G", WireComplex::from(g));
    row.push("residual", residual);
    row.push("tol", tol);
    row.push("pass", pass);
    emit_row(&args.output, &row)?;
    Ok(pass)
}

type Campaign = fn(usize, usize, u64, &GenericitySampler, &EllipticContext, &SuiteOptions) -> VerificationReport;

fn campaign(args: &SweepArgs, driver: Campaign) -> Result<bool> {
    let n_max = args.n_max.unwrap_or(args.m_max);
    if args.m_max == 0 || n_max == 0 {
        return usage("--Mmax and --Nmax must be at least 1");
    }
    if args.seeds == 0 {
        return usage("--seeds must be at least 1");
    }
    let ctx = context(&args.context)?;
    let options = SuiteOptions {
        tolerances: Tolerances::default().scaled(args.context.tol_scale),
        enum_cap: enum_cap()?,
    };
    let sampler = GenericitySampler::default().with_seed(args.seed);
    let report = driver(args.m_max, n_max, args.seeds, &sampler, &ctx, &options);
    emit(&args.output, report.to_json_lines(), || report_csv(&report))?;
    let failures = report.failures().count();
    if failures > 0 {
        eprintln!("{failures} of {} records failed", report.records.len());
    }
    Ok(failures == 0)
}

fn ybr(args: &ContextArgs, output: &OutputArgs, seed: u64, count: usize) -> Result<bool> {
    let ctx = context(args)?;
    let tol = Tolerances::default().scaled(args.tol_scale).lattice;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectral = ComplexBox::default();
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let hex = random_hexagon(&mut rng);
        let a12 = spectral.draw(&mut rng, &ctx);
        let consts = ModelParams::new(Vec::new(), Vec::new(), a12).constants();
        let (u1, u2, u3) = (spectral.draw(&mut rng, &ctx), spectral.draw(&mut rng, &ctx), spectral.draw(&mut rng, &ctx));
        worst = worst.max(check_yang_baxter(&hex, u1, u2, u3, &consts, &ctx)?.residual);
    }
    let pass = worst <= tol;
    let mut row = Row::default();
    row.push("q", ctx.q());
    row.push("seed", seed);
    row.push("count", count);
    row.push("worst_residual", worst);
    row.push("tol", tol);
    row.push("pass", pass);
    emit_row(output, &row)?;
    Ok(pass)
}
