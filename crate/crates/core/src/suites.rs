//! Verification suites: randomized checks of every identity, grouped by topic.
//!
//! Each trial draws its parameters from its own stream keyed by
//! `(seed, suite, trial)`, so trials are independent of each other and of
//! the thread count. Trials run in parallel; records are assembled in trial
//! order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bethe::{solve_bethe, BetheRootSet, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::contour::{
    evaluate_integral, h_n1, h_offshell, h_offshell_recursive, h_onshell, h_onshell_stepwise,
    non_injective_residue, s1_closed, Variant,
};
use crate::error::{Error, Result};
use crate::funceq::{
    extract_v, extract_w, pole_matching_residual, residual_onshell, residual_type_a, residual_type_d,
    step9_reconstruction, step9_residue_limit,
};
use crate::monodromy::{
    build_monodromy, build_monodromy_direct, commutation_residuals, operator_polynomial_residual, rtt_residual,
    transfer_commutator_residual, vacuum_action_residuals, Entry, ModelParams,
};
use crate::numeric::rel_diff;
use crate::oracle::{
    scalar_product_raw, symmetry_residual, verify_asymptotics, verify_polynomial_structure, verify_special_zeroes,
    DirectOracle, PerturbedEvaluator, ScalarProductEvaluator, Side, SpectralSets, Variable,
};
use crate::report::{CheckRecord, Environment, FittedConstant, Tolerances, VerificationReport};
use crate::sampling::{complex_in_box, gamma, generic_set, model, spectral, stream};
use crate::weights::{unitarity_residual, yang_baxter_residual, Anisotropy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    YangBaxter,
    Vacuum,
    Commutation,
    Lemmas,
    FuncEqA,
    FuncEqD,
    RecursionStep9,
    IntegralOffshell,
    Onshell,
    Asymptotics,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 10] = [
        Suite::YangBaxter,
        Suite::Vacuum,
        Suite::Commutation,
        Suite::Lemmas,
        Suite::FuncEqA,
        Suite::FuncEqD,
        Suite::RecursionStep9,
        Suite::IntegralOffshell,
        Suite::Onshell,
        Suite::Asymptotics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::YangBaxter => "yang-baxter",
            Suite::Vacuum => "vacuum",
            Suite::Commutation => "commutation",
            Suite::Lemmas => "lemmas",
            Suite::FuncEqA => "funceq-a",
            Suite::FuncEqD => "funceq-d",
            Suite::RecursionStep9 => "recursion-step9",
            Suite::IntegralOffshell => "integral-offshell",
            Suite::Onshell => "onshell",
            Suite::Asymptotics => "asymptotics",
            Suite::All => "all",
        }
    }

    /// Whether `--negative-control` changes anything for this suite.
    pub fn uses_evaluator(self) -> bool {
        matches!(
            self,
            Suite::FuncEqA | Suite::FuncEqD | Suite::RecursionStep9 | Suite::IntegralOffshell | Suite::Onshell | Suite::All
        )
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::INDIVIDUAL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::INDIVIDUAL.iter().map(|x| x.name()).chain(["all"]).collect();
                Error::InvalidInput(format!("unknown suite '{s}', expected one of: {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub tolerances: Tolerances,
    /// Replace the scalar-product evaluator by a perturbed one.
    pub negative_control: bool,
    /// 0 uses the global pool.
    pub threads: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            trials: 20,
            tolerances: Tolerances::default(),
            negative_control: false,
            threads: 0,
        }
    }
}

#[derive(Default)]
struct TrialOutput {
    checks: Vec<CheckRecord>,
    ratios: Vec<C64>,
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    suite: &'static str,
    trial: usize,
    out: TrialOutput,
}

impl Ctx<'_> {
    fn rng(&self) -> ChaCha8Rng {
        stream(self.cfg.seed, self.suite, self.trial as u64)
    }

    fn id(&self, name: &str) -> String {
        format!("{}/t{:02}/{}", self.suite, self.trial, name)
    }

    fn tol(&self, name: &str) -> f64 {
        self.cfg.tolerances.get(name)
    }

    fn check(&mut self, name: &str, tol: &str, residual: f64, scale: f64, anchor: &str) -> &mut CheckRecord {
        let rec = CheckRecord::new(self.id(name), anchor, residual, scale, self.tol(tol));
        self.out.checks.push(rec);
        self.out.checks.last_mut().unwrap()
    }

    fn fail(&mut self, name: &str, anchor: &str, detail: String) {
        self.out.checks.push(CheckRecord::failed(self.id(name), anchor, detail));
    }
}

fn pick<T: Copy>(list: &[T], t: usize) -> T {
    list[t % list.len()]
}

/// All `(n, L)` with `1 <= n <= L`, `n <= max_n`, `L <= max_l`, small `L` first.
fn shapes(max_n: usize, max_l: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for l in 1..=max_l {
        for n in 1..=max_n.min(l) {
            v.push((n, l));
        }
    }
    v
}

fn draw_sets(rng: &mut ChaCha8Rng, p: &ModelParams, n: usize) -> (Vec<C64>, Vec<C64>) {
    let x = spectral(rng, p, n, &[]);
    let y = spectral(rng, p, n, &x);
    (x, y)
}

fn all_of(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().chain(y).copied().collect()
}

/// The evaluator under test: the oracle, or a perturbed oracle.
fn evaluator(cfg: &SuiteConfig) -> Box<dyn ScalarProductEvaluator> {
    if cfg.negative_control {
        Box::new(PerturbedEvaluator {
            inner: DirectOracle,
            strength: 2.0,
        })
    } else {
        Box::new(DirectOracle)
    }
}

fn yang_baxter(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let aniso = Anisotropy::new(gamma(&mut rng))?;
    let l: Vec<C64> = (0..3).map(|_| complex_in_box(&mut rng, 2.0)).collect();
    let yb = yang_baxter_residual(l[0], l[1], l[2], &aniso);
    ctx.check("yang-baxter", "yang-baxter", yb, 1.0, "Yang-Baxter equation");
    let u = unitarity_residual(l[0], &aniso);
    ctx.check("unitarity", "unitarity", u, 1.0, "R(λ)R(-λ) = a(λ)a(-λ)");
    let sites = 1 + ctx.trial % 6;
    let p = model(&mut rng, sites)?;
    let r = rtt_residual(l[0], l[1], &p)?;
    ctx.check(&format!("rtt-L{sites}"), "rtt", r, 1.0, "RTT relation");
    Ok(())
}

fn vacuum(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let sites = 1 + ctx.trial % 5;
    let p = model(&mut rng, sites)?;
    let lambda = spectral(&mut rng, &p, 1, &[])[0];
    let v = vacuum_action_residuals(lambda, &p);
    ctx.check(&format!("vacuum-L{sites}"), "vacuum", v.max(), 1.0, "action of A, B, C, D on the pseudo-vacuum");
    let m = build_monodromy(lambda, &p);
    let d = build_monodromy_direct(lambda, &p);
    ctx.check("dual-construction", "dual-construction", m.relative_deviation(&d), 1.0, "recursive vs direct monodromy");
    let blocks = m
        .b
        .magnon_block_violation(1)
        .max(m.c.magnon_block_violation(-1))
        .max(m.a.magnon_block_violation(0))
        .max(m.d.magnon_block_violation(0));
    ctx.check("magnon-blocks", "magnon-blocks", blocks, 1.0, "magnon-number block structure");
    for entry in [Entry::B, Entry::C] {
        let r = operator_polynomial_residual(entry, &p)?;
        ctx.check(&format!("laurent-{entry:?}"), "polynomial", r, 1.0, "Laurent structure of B and C");
    }
    Ok(())
}

fn commutation(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let sites = 1 + ctx.trial % 5;
    let p = model(&mut rng, sites)?;
    let l = spectral(&mut rng, &p, 2, &[]);
    let r = commutation_residuals(l[0], l[1], &p)?;
    for (name, v) in [("BB", r.bb), ("CC", r.cc), ("AB", r.ab), ("CA", r.ca), ("DB", r.db), ("CD", r.cd)] {
        ctx.check(&format!("{name}-L{sites}"), "commutation", v, 1.0, "exchange relation");
    }
    let t = transfer_commutator_residual(l[0], l[1], &p);
    ctx.check("transfer-commute", "transfer-commute", t, 1.0, "commuting transfer matrices");
    Ok(())
}

fn lemmas(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let t = ctx.trial;

    let (n, l) = pick(&[(1, 2), (2, 4), (3, 5)], t);
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, n);
    let sets = SpectralSets::generic(x, y, &p)?;
    let mut worst = 0.0f64;
    let mut cond = 0.0f64;
    for side in [Side::B, Side::C] {
        for index in 0..n {
            let r = verify_polynomial_structure(&p, &sets, Variable { side, index })?;
            worst = worst.max(r.worst());
            cond = cond.max(r.vandermonde_condition);
        }
    }
    ctx.check(&format!("polynomial-n{n}-L{l}"), "polynomial", worst, 1.0, "polynomial structure in every variable")
        .detail = Some(format!("vandermonde condition {cond:.3e}"));

    let (n, l) = pick(&[(2, 2), (2, 3), (3, 3), (2, 4), (3, 4), (2, 5), (3, 5), (2, 6), (3, 6)], t);
    let p = model(&mut rng, l)?;
    let z = verify_special_zeroes(&p, n, 1, rng.gen())?;
    let b = z.b_side.iter().copied().fold(0.0, f64::max);
    let c = z.c_side.iter().copied().fold(0.0, f64::max);
    ctx.check(&format!("special-zero-B-n{n}-L{l}"), "special-zeroes", b, 1.0, "special zeroes, B side");
    ctx.check(&format!("special-zero-C-n{n}-L{l}"), "special-zeroes", c, 1.0, "special zeroes, C side");

    let (n, l) = pick(&shapes(3, 6), t);
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, n);
    let base = scalar_product_raw(&x, &y, &p);
    let (mut xs, mut ys) = (x.clone(), y.clone());
    xs.shuffle(&mut rng);
    ys.shuffle(&mut rng);
    let perm = rel_diff(base, scalar_product_raw(&xs, &ys, &p));
    let adjacent = symmetry_residual(&SpectralSets::generic(x, y, &p)?, &p);
    ctx.check(&format!("symmetry-n{n}-L{l}"), "symmetry", perm.max(adjacent), base.norm(), "double symmetry");

    let l = 1 + t % 3;
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, l + 1);
    let s = scalar_product_raw(&x, &y, &p);
    ctx.check(&format!("beyond-sites-L{l}"), "magnon-blocks", s.norm(), 1.0, "S_n = 0 for n > L");
    Ok(())
}

fn asymptotics(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let (n, l) = pick(&[(1, 2), (2, 4)], ctx.trial);
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, n);
    let sets = SpectralSets::generic(x, y, &p)?;
    let r = verify_asymptotics(&p, &sets, 10.0)?;
    ctx.check(&format!("deviation-n{n}-L{l}"), "asymptotics", r.deviation, 1.0, "asymptotic coefficient");
    let e = (-2.0f64).exp();
    let off = (r.decay_ratio / e).max(e / r.decay_ratio);
    ctx.check(&format!("decay-n{n}-L{l}"), "asymptotic-decay", off, 1.0, "e^{-2} decay of the deviation")
        .detail = Some(format!("ratio {:.4e} at lambda0 = 11", r.decay_ratio));
    Ok(())
}

fn funceq(ctx: &mut Ctx, type_a: bool) -> Result<()> {
    let mut rng = ctx.rng();
    let (n, l) = pick(&shapes(3, 6), ctx.trial);
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, n);
    let l0 = spectral(&mut rng, &p, 1, &all_of(&x, &y))[0];
    let ev = evaluator(ctx.cfg);
    let (r, anchor) = if type_a {
        (residual_type_a(l0, &x, &y, &p, ev.as_ref())?, "type-A functional equation")
    } else {
        (residual_type_d(l0, &x, &y, &p, ev.as_ref())?, "type-D functional equation")
    };
    ctx.check(&format!("n{n}-L{l}"), "funceq", r.residual, r.scale, anchor);
    Ok(())
}

fn step9(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let (n, l) = pick(&[(1, 2), (2, 2), (2, 3), (2, 4), (3, 4), (3, 5)], ctx.trial);
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, n);
    let ev = evaluator(ctx.cfg);
    let tag = format!("n{n}-L{l}");
    let r = step9_reconstruction(&x, &y, &p, ev.as_ref())?;
    ctx.check(&format!("theta-phi-{tag}"), "step9-reconstruction", r.theta_phi.residual, r.theta_phi.scale, "reconstruction from V and W");
    ctx.check(&format!("k-omega-{tag}"), "step9-reconstruction", r.k_omega.residual, r.k_omega.scale, "reconstruction through K and Omega");
    ctx.check(&format!("consistency-{tag}"), "step9-consistency", r.consistency, 1.0, "K Omega = (Theta + Phi^T)/F");
    if n >= 2 {
        let (xr, yr) = (&x[1..], &y[1..]);
        let v = extract_v(xr, yr, &p, ev.as_ref())?;
        let w = extract_w(xr, yr, &p, ev.as_ref())?;
        ctx.check(&format!("v-equals-w-{tag}"), "v-equals-w", rel_diff(v, w), v.norm(), "V = W");
    }
    let pm = pole_matching_residual(&x, &y, &p, 1e-5)?;
    ctx.check(&format!("pole-matching-{tag}"), "pole-matching", pm, 1.0, "pole matching of M_0 and N_i");
    if n >= 2 {
        let lim = step9_residue_limit(&x, &y, &p, ev.as_ref())?;
        ctx.check(&format!("residue-limit-{tag}"), "residue-limit", lim.spread, 1.0, "finite limit on F = 0")
            .detail = Some(format!("|F| down to {:.1e}", lim.f_values.last().copied().unwrap_or(0.0)));
    }
    Ok(())
}

fn integral_offshell(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let (n, l) = pick(&shapes(3, 6), ctx.trial);
    let p = model(&mut rng, l)?;
    let (x, y) = draw_sets(&mut rng, &p, n);
    let tag = format!("n{n}-L{l}");
    let reference = evaluator(ctx.cfg).evaluate(&x, &y, &p)?;
    let i = evaluate_integral(&x, &y, &p, Variant::OffShell)?;
    ctx.check(&format!("integral-{tag}"), "integral-offshell", rel_diff(i.value, reference), reference.norm(), "off-shell contour integral")
        .detail = Some(format!("cancellation ratio {:.3e}, {} residues", i.cancellation_ratio, i.terms));
    if reference.norm() > 0.0 {
        ctx.out.ratios.push(i.value / reference);
    }

    let (w, v) = draw_sets(&mut rng, &p, n);
    let h1 = h_offshell(&w, &v, &p)?;
    let h2 = h_offshell_recursive(&w, &v, &p)?;
    ctx.check(&format!("h-recursive-{tag}"), "h-recursive", rel_diff(h1, h2), h1.norm(), "closed vs recursive H");

    if n == 1 {
        let s = s1_closed(x[0], y[0], &p)?;
        ctx.check(&format!("closed-n1-L{l}"), "closed-n1", rel_diff(s, reference), reference.norm(), "n = 1 closed form");
        let h = h_n1(x[0], y[0], &p)?;
        ctx.check(&format!("single-residue-L{l}"), "single-residue", rel_diff(s, h), s.norm(), "n = 1 closed form vs single residue");
    }
    if n == 2 {
        let worst = (0..2)
            .map(|m| non_injective_residue(&x, &y, m, &p, 64, 1e-2))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        ctx.check(&format!("non-injective-{tag}"), "non-injective", worst, 1.0, "vanishing double-pole residues");
    }
    Ok(())
}

/// Multi-start Newton from random points of the unit box.
pub fn search_roots(n: usize, params: &ModelParams, rng: &mut ChaCha8Rng, attempts: usize) -> Option<BetheRootSet> {
    let mut best: Option<BetheRootSet> = None;
    for _ in 0..attempts {
        let init = generic_set(rng, n, params.mu(), 0.1);
        let Ok(r) = solve_bethe(n, params, &init, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE) else {
            continue;
        };
        if r.converged {
            return Some(r);
        }
        if best.as_ref().is_none_or(|b| r.residual < b.residual) {
            best = Some(r);
        }
    }
    best
}

fn onshell(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let (n, l) = pick(&[(1, 2), (1, 3), (2, 2), (1, 4), (2, 3), (2, 4)], ctx.trial);
    let tag = format!("n{n}-L{l}");
    let p = model(&mut rng, l)?;
    let roots = match search_roots(n, &p, &mut rng, 64) {
        Some(r) if r.converged => r,
        Some(r) => {
            ctx.fail(&format!("root-search-{tag}"), "Bethe equations", format!("best residual {:.3e}", r.residual));
            return Ok(());
        }
        None => {
            ctx.fail(&format!("root-search-{tag}"), "Bethe equations", "no admissible start".into());
            return Ok(());
        }
    };
    let y = roots.roots.clone();
    ctx.check(&format!("bethe-residual-{tag}"), "bethe-residual", roots.residual, 1.0, "Bethe equations");
    match roots.eigen_certificate {
        Some(e) => {
            ctx.check(&format!("eigen-certificate-{tag}"), "eigen-certificate", e, 1.0, "transfer-matrix eigenvector");
        }
        None => ctx.fail(&format!("eigen-certificate-{tag}"), "transfer-matrix eigenvector", "no usable probe point".into()),
    }

    let x = spectral(&mut rng, &p, n, &y);
    let l0 = spectral(&mut rng, &p, 1, &all_of(&x, &y))[0];
    let ev = evaluator(ctx.cfg);
    let r = residual_onshell(l0, &x, &y, &p, ev.as_ref())?;
    ctx.check(&format!("cancellation-{tag}"), "onshell-cancellation", r.b_cancellation, 1.0, "phi1 N^B + phi2 N~^B = 0");
    ctx.check(&format!("equation-{tag}"), "onshell-equation", r.equation.residual, r.equation.scale, "on-shell functional equation");

    let reference = ev.evaluate(&x, &y, &p)?;
    let i = evaluate_integral(&x, &y, &p, Variant::OnShell)?;
    ctx.check(&format!("integral-{tag}"), "integral-onshell", rel_diff(i.value, reference), reference.norm(), "on-shell contour integral")
        .detail = Some(format!("cancellation ratio {:.3e}", i.cancellation_ratio));

    let h1 = h_onshell(&x, &y, &p)?;
    let h2 = h_onshell_stepwise(&x, &y, &p)?;
    ctx.check(&format!("h-stepwise-{tag}"), "h-stepwise", rel_diff(h1, h2), h1.norm(), "closed vs stepwise on-shell H");
    if n == 1 {
        let h0 = h_n1(x[0], y[0], &p)?;
        ctx.check(&format!("h-n1-rewrite-{tag}"), "h-stepwise", rel_diff(h1, h0), h0.norm(), "on-shell rewrite of the n = 1 integrand");
    }
    Ok(())
}

fn run_trial(suite: Suite, cfg: &SuiteConfig, trial: usize) -> Result<TrialOutput> {
    let mut ctx = Ctx {
        cfg,
        suite: suite.name(),
        trial,
        out: TrialOutput::default(),
    };
    match suite {
        Suite::YangBaxter => yang_baxter(&mut ctx)?,
        Suite::Vacuum => vacuum(&mut ctx)?,
        Suite::Commutation => commutation(&mut ctx)?,
        Suite::Lemmas => lemmas(&mut ctx)?,
        Suite::FuncEqA => funceq(&mut ctx, true)?,
        Suite::FuncEqD => funceq(&mut ctx, false)?,
        Suite::RecursionStep9 => step9(&mut ctx)?,
        Suite::IntegralOffshell => integral_offshell(&mut ctx)?,
        Suite::Onshell => onshell(&mut ctx)?,
        Suite::Asymptotics => asymptotics(&mut ctx)?,
        Suite::All => unreachable!(),
    }
    Ok(ctx.out)
}

fn run_single(suite: Suite, cfg: &SuiteConfig) -> Result<(Vec<CheckRecord>, Vec<C64>)> {
    let outputs: Vec<Result<TrialOutput>> = (0..cfg.trials).into_par_iter().map(|t| run_trial(suite, cfg, t)).collect();
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    for o in outputs {
        let o = o?;
        checks.extend(o.checks);
        ratios.extend(o.ratios);
    }
    Ok((checks, ratios))
}

fn run_in_pool(suite: Suite, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let list: Vec<Suite> = match suite {
        Suite::All => Suite::INDIVIDUAL.to_vec(),
        s => vec![s],
    };
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    for s in list {
        let (c, r) = run_single(s, cfg)?;
        checks.extend(c);
        ratios.extend(r);
    }
    let env = Environment {
        precision: "f64 complex",
        seed: cfg.seed,
        trials: cfg.trials,
        threads: cfg.threads,
        negative_control: cfg.negative_control,
    };
    let mut report = VerificationReport::new(suite.name(), checks, env);
    report.fitted_constant = FittedConstant::from_ratios(&ratios);
    Ok(report)
}

/// Runs a suite. Numerical singularities abort with an error; failed
/// identities are reported in the returned report.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<VerificationReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if cfg.threads == 0 {
        return run_in_pool(suite, cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(suite, cfg))
}
