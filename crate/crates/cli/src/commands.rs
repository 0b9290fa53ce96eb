use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use hyperlab::fup::experiment::{fup_experiment, log_phase_grid, CoreSpec, ExperimentConfig};
use hyperlab::fup::sphere::{cantor_arc, sphere_porosity_check, Atlas, CapUnion};
use hyperlab::fup::{log_phase, log_phase_hessian_formula, mixed_hessian_det};
use hyperlab::lorentz::relations::{
    flow_compatibility, horocyclic_commutation, verify_commutator_table,
};
use hyperlab::lorentz::{
    exp_flow, exp_general, kan_decompose, labelled, normalizer_decompose, normalizer_member,
    normalizer_member_by_conjugation, pi_k0, random_group_element, random_standard_element, Label,
};
use hyperlab::porosity::{
    ball_porosity_check, line_porosity_check, PorosityKind, SetSpec, Verdict,
};
use hyperlab::stable::{kappa, theta_translation_residual, PhasePoint};
use hyperlab::words::{bound_check, parse_rational};
use hyperlab::Sign;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Cli, Command, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Counterexample,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Counterexample => 2,
            Outcome::Inconclusive => 3,
        }
    }

    fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::CertifiedPorous => Outcome::Pass,
            Verdict::CounterexampleFound => Outcome::Counterexample,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }

    fn pass_if(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Counterexample
        }
    }
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModeArg {
    Ball,
    Line,
}

impl From<ModeArg> for PorosityKind {
    fn from(m: ModeArg) -> PorosityKind {
        match m {
            ModeArg::Ball => PorosityKind::Ball,
            ModeArg::Line => PorosityKind::Line,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AlgebraArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    /// Random samples for the flow suites.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Negate one generator (negative control), e.g. `U1+`.
    #[arg(long)]
    pub flip: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct FlowTraceArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Coordinates near the boundary lose about `e^{2t}` in relative precision.
    #[arg(long, default_value_t = 2.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Dimension of the standard subgroup `W_l`.
    #[arg(long, default_value_t = 2)]
    pub l: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PorosityArgs {
    /// Set-spec file (TOML, or JSON when the extension is `.json`).
    pub setfile: PathBuf,
    #[arg(long)]
    pub nu: f64,
    #[arg(long)]
    pub alpha0: f64,
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Ball)]
    pub mode: ModeArg,
    /// Directions for line checks; defaults to `2n`.
    #[arg(long)]
    pub directions: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SphereSet {
    Empty,
    Full,
    /// Middle-third Cantor set on a quarter of a great circle, fattened.
    Cantor,
}

#[derive(Debug, Args, Serialize)]
pub struct SphereArgs {
    /// Sphere dimension (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = SphereSet::Cantor)]
    pub set: SphereSet,
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    /// Fattening radius of the Cantor band.
    #[arg(long, default_value_t = 0.005)]
    pub band: f64,
    #[arg(long)]
    pub nu: f64,
    /// Chart-space scales `[alpha0, alpha1]` on the dyadic-half ladder.
    #[arg(long, default_value_t = 0.2)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha1: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Ball)]
    pub mode: ModeArg,
    /// Cells per axis in each chart image.
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
    /// Lower bi-Lipschitz constant assumed for the charts.
    #[arg(long, default_value_t = 2.0)]
    pub c2: f64,
    /// Number of charts on the 2-sphere.
    #[arg(long, default_value_t = 64)]
    pub charts: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FupArgs {
    /// Experiment config (TOML).
    pub config: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FioArgs {
    /// Energies `w`, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.125, 1.0, 8.0])]
    pub w: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub depth_min: u32,
    /// Largest depth; defaults to the largest with at most 4096 grid points.
    #[arg(long)]
    pub depth_max: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct WordsArgs {
    /// Threshold α as a decimal or fraction.
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub rho: f64,
    /// Ladder `h = 2^{−j}` for `j = j_min..=j_max`.
    #[arg(long)]
    pub j_min: u32,
    #[arg(long)]
    pub j_max: u32,
    #[arg(long, default_value_t = 0.1)]
    pub slack: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct HessianArgs {
    /// Sphere dimension (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub min_separation: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

pub fn dispatch(cli: &Cli) -> Result<Report> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::AlgebraVerify(a) => algebra_verify(a, cli, out),
        Command::FlowTrace(a) => flow_trace(a, cli, out),
        Command::GroupDecompose(a) => group_decompose(a, cli, out),
        Command::PorosityCheck(a) => porosity_check(a, out),
        Command::SpherePorosity(a) => sphere_porosity(a, out),
        Command::FupScan(a) => fup_scan(a, cli, out),
        Command::FioSphere(a) => fio_sphere(a, cli, out),
        Command::WordsCount(a) => words_count(a, out),
        Command::HessianCheck(a) => hessian_check(a, cli, out),
        Command::Replay(a) => {
            let (same, lines) = crate::replay(&a.manifest, out)?;
            for l in lines {
                println!("{l}");
            }
            Ok(Report {
                outcome: Outcome::pass_if(same),
                inputs: vec![],
                outputs: vec![],
            })
        }
    }
}

fn algebra_verify(a: &AlgebraArgs, cli: &Cli, out: &Path) -> Result<Report> {
    ensure!(
        a.n_min >= 1 && a.n_min <= a.n_max && a.n_max <= 16,
        "need 1 ≤ n-min ≤ n-max ≤ 16"
    );
    let flip = a
        .flip
        .as_deref()
        .map(|s| s.parse::<Label>())
        .transpose()
        .context("--flip")?;
    let tol = cli.tol.unwrap_or(1e-12);
    let mut csv = String::from("n,suite,relation,exact_residual,float_residual,pass\n");
    let mut ok = true;
    for n in a.n_min..=a.n_max {
        for c in verify_commutator_table(n, flip)? {
            let pass = c.holds(tol);
            if !pass {
                eprintln!("FAIL n={n} {}", c.name);
            }
            ok &= pass;
            let _ = writeln!(
                csv,
                "{n},commutator,{},{},{},{pass}",
                c.name,
                c.exact_residual,
                f(c.float_residual)
            );
        }
        let flow = flow_compatibility(n, a.samples, cli.seed)?;
        let horo = horocyclic_commutation(n, a.samples.min(100), cli.seed)?;
        for (suite, v, lim) in [
            ("flow-compatibility", flow, 1e-9),
            ("horocyclic-commutation", horo, 1e-8),
        ] {
            let pass = v <= lim;
            if !pass {
                eprintln!("FAIL n={n} {suite}: {v:e}");
            }
            ok &= pass;
            let _ = writeln!(csv, "{n},{suite},max,0,{},{pass}", f(v));
        }
    }
    Ok(Report {
        outcome: Outcome::pass_if(ok),
        inputs: vec![],
        outputs: vec![write_out(out, "algebra.csv", &csv)?],
    })
}

fn flow_trace(a: &FlowTraceArgs, cli: &Cli, out: &Path) -> Result<Report> {
    ensure!(
        a.steps >= 1 && a.t_max.is_finite(),
        "need steps ≥ 1 and finite t-max"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let g = random_group_element(a.n, &mut rng)?;
    let p = PhasePoint::from_frame(&g);
    let x = labelled(Label::X, a.n)?;
    let sign: Sign = a.sign.into();
    let tol = cli.tol.unwrap_or(1e-8);
    let mut csv = String::from("t,theta,theta_residual,flow_gap");
    for k in 0..a.n + 2 {
        let _ = write!(csv, ",x{k}");
    }
    for k in 0..a.n + 2 {
        let _ = write!(csv, ",xi{k}");
    }
    csv.push('\n');
    let mut ok = true;
    for s in 0..=a.steps {
        let t = a.t_max * s as f64 / a.steps as f64;
        let q = p.flow(t);
        let (x2, xi2) = pi_k0(&g.mul(&exp_general(&x, t)?));
        let scale = x2.coords().amax().max(1.0);
        let gap = q.x().max_abs_diff(&x2).max(q.xi().max_abs_diff(&xi2)) / scale;
        let theta = kappa(&q, sign)?.theta;
        let res = theta_translation_residual(&p, sign, t)?;
        ok &= res <= tol && gap <= 1e-9;
        let _ = write!(csv, "{},{},{},{}", f(t), f(theta), f(res), f(gap));
        for v in q.x().as_slice().iter().chain(q.xi().as_slice()) {
            let _ = write!(csv, ",{}", f(*v));
        }
        csv.push('\n');
    }
    Ok(Report {
        outcome: Outcome::pass_if(ok),
        inputs: vec![],
        outputs: vec![write_out(out, "flow.csv", &csv)?],
    })
}

fn group_decompose(a: &DecomposeArgs, cli: &Cli, out: &Path) -> Result<Report> {
    ensure!((2..=a.n).contains(&a.l), "need 2 ≤ l ≤ n");
    let tol = cli.tol.unwrap_or(1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut csv = String::from("sample,kind,residual,block_member,conjugation_member\n");
    let mut ok = true;
    for i in 0..a.samples {
        let g = random_group_element(a.n, &mut rng)?;
        for sign in [Sign::Plus, Sign::Minus] {
            let r = kan_decompose(&g, sign)?.product().distance(&g);
            ok &= r <= tol;
            let _ = writeln!(csv, "{i},kan{sign},{},,", f(r));
        }
        let mut h = random_standard_element(a.l, a.n, &mut rng)?;
        if a.l + 2 <= a.n + 1 {
            h = h.mul(&exp_flow(
                &labelled(Label::R(a.l + 1, a.l + 2), a.n)?,
                rng.random_range(-3.0..3.0),
            )?);
        }
        if rng.random::<bool>() {
            h = h.mul(&exp_flow(
                &labelled(Label::R(a.l, a.l + 1), a.n)?,
                std::f64::consts::PI,
            )?);
        }
        for (label, elem) in [("normalizer", &h), ("generic", &g)] {
            let block = normalizer_member(elem, a.l);
            let conj = normalizer_member_by_conjugation(elem, a.l, 8);
            let residual = if block {
                let (w, k, _) = normalizer_decompose(elem, a.l)?;
                w.mul(&k).distance(elem)
            } else {
                0.0
            };
            ok &= block == conj && residual <= tol && (label == "generic" || block);
            let _ = writeln!(csv, "{i},{label},{},{block},{conj}", f(residual));
        }
    }
    Ok(Report {
        outcome: Outcome::pass_if(ok),
        inputs: vec![],
        outputs: vec![write_out(out, "decompose.csv", &csv)?],
    })
}

fn read_set(path: &Path) -> Result<SetSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn porosity_check(a: &PorosityArgs, out: &Path) -> Result<Report> {
    let set = read_set(&a.setfile)?.build()?;
    let report = match a.mode {
        ModeArg::Ball => ball_porosity_check(&set, a.nu, a.alpha0, a.alpha1)?,
        ModeArg::Line => {
            let d = a.directions.unwrap_or(2 * set.n());
            line_porosity_check(&set, a.nu, a.alpha0, a.alpha1, d)?
        }
    };
    println!("{}", report.verdict);
    Ok(Report {
        outcome: Outcome::from_verdict(report.verdict),
        inputs: vec![a.setfile.clone()],
        outputs: vec![write_out(out, "porosity.txt", &report.to_text())?],
    })
}

fn sphere_porosity(a: &SphereArgs, out: &Path) -> Result<Report> {
    ensure!(a.dim == 1 || a.dim == 2, "sphere dimension must be 1 or 2");
    let ambient = a.dim + 1;
    let omega = match a.set {
        SphereSet::Empty => CapUnion::empty(ambient),
        SphereSet::Full => CapUnion::full(ambient),
        SphereSet::Cantor => CapUnion::along_circle(
            ambient,
            &cantor_arc(0.0, std::f64::consts::FRAC_PI_2, a.depth),
            a.band,
        ),
    };
    let atlas = if a.dim == 1 {
        Atlas::circle()
    } else {
        Atlas::sphere(a.charts)?
    };
    let scales = hyperlab::porosity::scale_ladder(a.alpha0, a.alpha1)?;
    let rep = sphere_porosity_check(
        &omega,
        &atlas,
        a.nu,
        a.c2,
        a.mode.into(),
        &scales,
        a.resolution,
        2 * a.dim,
    )?;
    let mut text = format!(
        "# nu = {}\n# c2 = {}\n# nu_chart = {}\n# verdict = {}\nchart,scale,margin,verdict\n",
        f(a.nu),
        f(rep.c2),
        f(rep.nu_chart),
        rep.verdict
    );
    for (k, c) in rep.charts.iter().enumerate() {
        for s in &c.scales {
            let _ = writeln!(text, "{k},{},{},{}", f(s.scale), f(s.margin), s.verdict);
        }
    }
    println!("{}", rep.verdict);
    Ok(Report {
        outcome: Outcome::from_verdict(rep.verdict),
        inputs: vec![],
        outputs: vec![write_out(out, "sphere.txt", &text)?],
    })
}

fn fup_scan(a: &FupArgs, cli: &Cli, out: &Path) -> Result<Report> {
    let text =
        fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg: ExperimentConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", a.config.display()))?;
    cfg.seed ^= cli.seed;
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    let res = fup_experiment(&cfg)?;
    let ok = res
        .rows
        .iter()
        .all(|r| r.converged && r.dense.is_none_or(|d| (d - r.norm).abs() <= 1e-6));
    if let Some(fit) = &res.fit {
        println!("beta = {}", f(fit.beta));
    }
    Ok(Report {
        outcome: Outcome::pass_if(ok),
        inputs: vec![a.config.clone()],
        outputs: vec![write_out(out, "fup.csv", &res.to_csv())?],
    })
}

fn fio_sphere(a: &FioArgs, cli: &Cli, out: &Path) -> Result<Report> {
    ensure!(!a.w.is_empty(), "need at least one w");
    ensure!(
        a.w.iter().all(|w| (0.125..=8.0).contains(w)),
        "w must lie in [1/8, 8]"
    );
    let runs: Vec<Result<(f64, hyperlab::fup::experiment::ExperimentResult)>> = a
        .w
        .par_iter()
        .map(|&w| {
            let top = a.depth_max.unwrap_or_else(|| {
                (1..=12)
                    .take_while(|&k| log_phase_grid(w, k) <= 4096)
                    .last()
                    .unwrap_or(1)
            });
            ensure!(a.depth_min <= top, "empty depth range for w = {w}");
            let mut cfg =
                ExperimentConfig::cantor(CoreSpec::LogPhase { w }, (a.depth_min..=top).collect());
            cfg.seed = cli.seed;
            Ok((w, fup_experiment(&cfg)?))
        })
        .collect();
    let mut outputs = Vec::new();
    let mut all_decay = true;
    for r in runs {
        let (w, res) = r?;
        let beta = res.fit.as_ref().map(|f| f.beta);
        println!(
            "w = {w}: beta = {}",
            beta.map(f).unwrap_or_else(|| "n/a".into())
        );
        all_decay &= beta.is_some_and(|b| b > 0.0);
        outputs.push(write_out(out, &format!("fio_w{w}.csv"), &res.to_csv())?);
    }
    Ok(Report {
        outcome: if all_decay {
            Outcome::Pass
        } else {
            Outcome::Inconclusive
        },
        inputs: vec![],
        outputs,
    })
}

fn words_count(a: &WordsArgs, out: &Path) -> Result<Report> {
    ensure!(a.j_min >= 1 && a.j_min <= a.j_max, "need 1 ≤ j-min ≤ j-max");
    let alpha = parse_rational(&a.alpha)?;
    let ladder: Vec<f64> = (a.j_min..=a.j_max)
        .map(|j| j as f64 * std::f64::consts::LN_2)
        .collect();
    let rows = bound_check(a.rho, &alpha, &ladder, a.slack)?;
    let mut csv = String::from("alpha,rho,h,T0,count,ratio,logC\n");
    for (j, r) in (a.j_min..).zip(&rows) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.alpha,
            f(r.rho),
            f(0.5f64.powi(j as i32)),
            r.t0,
            r.count,
            f(r.ratio),
            f(r.log_c)
        );
    }
    if let Some(last) = rows.last() {
        println!(
            "final ratio = {} (within bound: {})",
            f(last.ratio),
            last.within
        );
    }
    Ok(Report {
        outcome: Outcome::Pass,
        inputs: vec![],
        outputs: vec![write_out(out, "words.csv", &csv)?],
    })
}

fn random_unit(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.into_iter().map(|a| a / r).collect();
        }
    }
}

fn hessian_check(a: &HessianArgs, cli: &Cli, out: &Path) -> Result<Report> {
    if !(a.dim == 1 || a.dim == 2) {
        bail!("sphere dimension must be 1 or 2");
    }
    let tol = cli.tol.unwrap_or(1e-4);
    let m = a.dim + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let phi = log_phase(a.w);
    let mut csv = String::from("pair,fd,formula,rel_err\n");
    let (mut worst, mut margin) = (0.0f64, f64::INFINITY);
    let mut i = 0;
    while i < a.pairs {
        let (y, yp) = (random_unit(&mut rng, m), random_unit(&mut rng, m));
        let sep = y
            .iter()
            .zip(&yp)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        if sep < a.min_separation {
            continue;
        }
        let fd = mixed_hessian_det(&phi, &y, &yp, a.step)?;
        let exact = log_phase_hessian_formula(a.w, &y, &yp);
        let rel = (fd - exact).abs() / exact.abs();
        worst = worst.max(rel);
        margin = margin.min(exact.abs());
        let _ = writeln!(csv, "{i},{},{},{}", f(fd), f(exact), f(rel));
        i += 1;
    }
    let _ = writeln!(
        csv,
        "# max_rel_err = {}\n# min_abs_det = {}",
        f(worst),
        f(margin)
    );
    println!("max relative error {worst:e}, smallest |det| {margin:e}");
    Ok(Report {
        outcome: Outcome::pass_if(worst <= tol && margin > 0.0),
        inputs: vec![],
        outputs: vec![write_out(out, "hessian.csv", &csv)?],
    })
}
