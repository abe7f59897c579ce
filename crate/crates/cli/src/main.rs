//! `bethe-scalar`: compute scalar products, run verification suites, solve Bethe equations.
//!
//! Exit status: 0 pass, 1 verification failure, 2 configuration error,
//! 3 numerical singularity.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bethe_scalar::bethe::{bethe_residual_norm, bethe_residuals, solve_bethe, BetheRootSet};
use bethe_scalar::funceq::ONSHELL_ROOT_TOLERANCE;
use bethe_scalar::contour::{evaluate_integral, s1_closed, IntegralValue, Variant};
use bethe_scalar::numeric::rel_diff;
use bethe_scalar::oracle::scalar_product_raw;
use bethe_scalar::report::{CheckRecord, Environment, VerificationReport};
use bethe_scalar::sampling::{spectral, stream};
use bethe_scalar::suites::{run_suite, Suite, SuiteConfig};
use bethe_scalar::{Error, ModelParams, C64};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{ConfigError, Method, RawConfig, RunConfig};

#[derive(Parser)]
#[command(name = "bethe-scalar", version, about = "Scalar products of Bethe vectors for the six-vertex model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed for sampled inputs [default: 42, or the config value]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Print the report as JSON on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate S_n(X|Y) by the chosen method.
    Compute {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Run a verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// yang-baxter, vacuum, commutation, lemmas, funceq-a, funceq-d,
        /// recursion-step9, integral-offshell, onshell, asymptotics or all
        #[arg(long, value_name = "NAME")]
        suite: String,
        /// Trials per suite [default: 20, or the config value]
        #[arg(long)]
        trials: Option<usize>,
        /// Run with a deliberately perturbed scalar-product evaluator.
        #[arg(long)]
        negative_control: bool,
    },
    /// Solve the Bethe equations from an initial guess.
    Bethe {
        #[command(flatten)]
        common: Common,
        /// Initial root as `re,im`; repeat once per root.
        #[arg(long, value_name = "RE,IM", value_parser = parse_complex, allow_hyphen_values = true)]
        initial: Vec<C64>,
    },
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got '{s}'"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{re}: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{im}: {e}"))?;
    Ok(C64::new(re, im))
}

enum Failure {
    Config(String),
    Singular(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_singular() {
            Failure::Singular(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

type Outcome = Result<bool, Failure>;

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let raw = match &common.config {
        Some(p) => config::load(p)?,
        None => RawConfig::default(),
    };
    let mut cfg = raw.validate()?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn set_threads(threads: usize) -> Result<(), Failure> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Config(format!("threads: {e}")))?;
    }
    Ok(())
}

fn need_params(cfg: &RunConfig) -> Result<&ModelParams, Failure> {
    cfg.params.as_ref().ok_or_else(|| Failure::Config("params: required for this command".into()))
}

fn fmt_c(z: C64) -> String {
    format!("{:+.16e} {:+.16e}i", z.re, z.im)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn print_checks(report: &VerificationReport) {
    for c in &report.checks {
        println!(
            "{:<4} {:<48} residual {:.3e}  scale {:.3e}  tol {:.1e}  {}",
            if c.pass { "ok" } else { "FAIL" },
            c.id,
            c.residual,
            c.scale,
            c.tolerance,
            c.anchor
        );
        if let Some(d) = &c.detail {
            println!("     {d}");
        }
    }
}

#[derive(Serialize)]
struct ComputeOutput {
    method: Method,
    n: usize,
    sites: usize,
    lambda_c: Vec<C64>,
    lambda_b: Vec<C64>,
    value: C64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cancellation_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residues: Option<usize>,
    report: VerificationReport,
}

fn compute(common: &Common, method: Option<Method>) -> Outcome {
    let mut cfg = load(common)?;
    if let Some(m) = method {
        cfg.method = m;
    }
    set_threads(common.threads)?;
    let params = need_params(&cfg)?.clone();
    let (x, y) = match &cfg.sets {
        Some((x, y)) => (x.clone(), y.clone()),
        None => {
            if cfg.method == Method::IntegralOnshell {
                return Err(Failure::Config("sets: integral-onshell needs lambda_b set to Bethe roots".into()));
            }
            let n = cfg.n.ok_or_else(|| Failure::Config("n: required when sets are not given".into()))?;
            let mut rng = stream(cfg.seed, "compute", 0);
            let x = spectral(&mut rng, &params, n, &[]);
            let y = spectral(&mut rng, &params, n, &x);
            (x, y)
        }
    };
    let n = x.len();
    if cfg.method == Method::ClosedN1 && n != 1 {
        return Err(Failure::Config(format!("method: closed-n1 requires n = 1, got n = {n}")));
    }
    if cfg.method == Method::IntegralOnshell {
        let worst = bethe_residual_norm(&y, &params)?;
        if worst > ONSHELL_ROOT_TOLERANCE {
            return Err(Failure::Config(format!(
                "sets.lambda_b: not Bethe roots (residual {worst:.3e} > {ONSHELL_ROOT_TOLERANCE:.0e})"
            )));
        }
    }

    let oracle = scalar_product_raw(&x, &y, &params);
    let mut integral: Option<IntegralValue> = None;
    let (value, tol_name) = match cfg.method {
        Method::Oracle => (oracle, None),
        Method::ClosedN1 => (s1_closed(x[0], y[0], &params)?, Some("closed-n1")),
        Method::IntegralOffshell => {
            let i = evaluate_integral(&x, &y, &params, Variant::OffShell)?;
            integral = Some(i);
            (i.value, Some("integral-offshell"))
        }
        Method::IntegralOnshell => {
            let i = evaluate_integral(&x, &y, &params, Variant::OnShell)?;
            integral = Some(i);
            (i.value, Some("integral-onshell"))
        }
    };
    let env = Environment {
        precision: "f64 complex",
        seed: cfg.seed,
        trials: 1,
        threads: common.threads,
        negative_control: false,
    };
    let (report, delta) = match tol_name {
        Some(t) => {
            let d = rel_diff(value, oracle);
            let rec = CheckRecord::new(format!("compute/{}", cfg.method), "agreement with the operator-product oracle", d, oracle.norm(), cfg.tolerances.get(t));
            (VerificationReport::new("compute", vec![rec], env), Some(d))
        }
        None => {
            let mut r = VerificationReport::new("compute", vec![], env);
            r.pass = true;
            (r, None)
        }
    };
    let pass = report.pass;
    let out = ComputeOutput {
        method: cfg.method,
        n,
        sites: params.len(),
        lambda_c: x,
        lambda_b: y,
        value,
        oracle: tol_name.map(|_| oracle),
        relative_delta: delta,
        cancellation_ratio: integral.map(|i| i.cancellation_ratio),
        residues: integral.map(|i| i.terms),
        report,
    };
    if common.json {
        print_json(&out);
    } else {
        println!("value  {}", fmt_c(out.value));
        if let (Some(o), Some(d)) = (out.oracle, out.relative_delta) {
            println!("oracle {}", fmt_c(o));
            println!("relative delta {d:.3e}");
        }
        if let Some(c) = out.cancellation_ratio {
            println!("cancellation ratio {c:.3e} over {} residues", out.residues.unwrap_or(0));
        }
    }
    eprintln!(
        "compute: method {}, n = {n}, L = {}{}",
        out.method,
        out.sites,
        match delta {
            Some(d) => format!(", oracle delta {d:.3e}, {}", if pass { "pass" } else { "FAIL" }),
            None => String::new(),
        }
    );
    Ok(pass)
}

fn verify(common: &Common, suite: &str, trials: Option<usize>, negative_control: bool) -> Outcome {
    let suite: Suite = suite.parse().map_err(|e: Error| Failure::Config(e.to_string().replace("invalid input: ", "suite: ")))?;
    let cfg = load(common)?;
    let sc = SuiteConfig {
        seed: cfg.seed,
        trials: trials.unwrap_or(cfg.trials),
        tolerances: cfg.tolerances.clone(),
        negative_control,
        threads: common.threads,
    };
    if sc.trials == 0 {
        return Err(Failure::Config("trials: must be at least 1".into()));
    }
    if negative_control && !suite.uses_evaluator() {
        eprintln!("note: suite {suite} does not use a scalar-product evaluator; --negative-control has no effect");
    }
    let start = Instant::now();
    let report = run_suite(suite, &sc)?;
    if common.json {
        print_json(&report);
    } else {
        print_checks(&report);
    }
    let failed = report.failures().count();
    eprintln!(
        "suite {suite}: {} checks, {failed} failed, {} in {:.2} s (seed {}, {} trials)",
        report.checks.len(),
        if report.pass { "pass" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        sc.seed,
        sc.trials
    );
    if let Some(f) = &report.fitted_constant {
        if !report.pass || f.spread > 1e-8 || (f.mean - C64::new(1.0, 0.0)).norm() > 1e-8 {
            eprintln!(
                "fitted constant integral/oracle: {} (spread {:.3e} over {} draws)",
                fmt_c(f.mean),
                f.spread,
                f.draws
            );
        }
    }
    Ok(report.pass)
}

#[derive(Serialize)]
struct BetheOutput {
    n: usize,
    sites: usize,
    initial: Vec<C64>,
    #[serde(flatten)]
    result: BetheRootSet,
    residuals: Vec<C64>,
}

fn bethe(common: &Common, initial: Vec<C64>) -> Outcome {
    let cfg = load(common)?;
    let params = need_params(&cfg)?.clone();
    let initial = if initial.is_empty() {
        cfg.initial.clone().ok_or_else(|| Failure::Config("initial: give --initial RE,IM once per root or set \"initial\" in the config".into()))?
    } else {
        initial
    };
    if let Some(n) = cfg.n {
        if n != initial.len() {
            return Err(Failure::Config(format!("n: {n} disagrees with {} initial values", initial.len())));
        }
    }
    let n = initial.len();
    if n > params.len() {
        return Err(Failure::Config(format!("initial: {n} roots exceed the lattice length {}", params.len())));
    }
    let tol = cfg.tolerances.get("bethe-residual");
    let r = solve_bethe(n, &params, &initial, cfg.max_iter, tol)?;
    let residuals = bethe_residuals(&r.roots, &params).unwrap_or_default();
    let converged = r.converged;
    let certified = r.eigen_certificate.is_some_and(|e| e <= cfg.tolerances.get("eigen-certificate"));
    let out = BetheOutput {
        n,
        sites: params.len(),
        initial,
        result: r,
        residuals,
    };
    if common.json {
        print_json(&out);
    } else {
        for (i, z) in out.result.roots.iter().enumerate() {
            println!("root {}  {}", i + 1, fmt_c(*z));
        }
        println!("residual {:.3e}", out.result.residual);
        match out.result.eigen_certificate {
            Some(e) => println!("eigen certificate {e:.3e}"),
            None => println!("eigen certificate unavailable"),
        }
    }
    eprintln!(
        "bethe: {} after {} iterations ({:?}), residual {:.3e}{}",
        if converged { "converged" } else { "not converged" },
        out.result.iterations,
        out.result.status,
        out.result.residual,
        if converged && !certified { ", eigen certificate FAILED" } else { "" }
    );
    Ok(converged && certified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute { common, method } => compute(common, *method),
        Command::Verify {
            common,
            suite,
            trials,
            negative_control,
        } => verify(common, suite, *trials, *negative_control),
        Command::Bethe { common, initial } => bethe(common, initial.clone()),
    };
    match outcome {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Singular(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
