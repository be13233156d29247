//! Batch front end. Data goes to `--out` or stdout, messages to stderr.
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure (including a
//! verification or condition check that came back FAIL).

mod settings;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use demon_lab::experiments::{self, SweepValues};
use demon_lab::mazery::{self, toy, Estimator, EstimatorMode, Mazery};
use demon_lab::params::{self, ExponentSet};
use demon_lab::rng::{gen_bernoulli, gen_walk, BitSequence, ColorSequence, RngStream};
use demon_lab::scheduling::{self, Schedule};
use demon_lab::LabError;

use settings::{Invalid, Settings};

const SIGMA1: f64 = 0.0;
const Q1: f64 = 0.05;
/// Trials `schedule` scans for an instance with an open origin and an escape path.
const SCHEDULE_SEARCH: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "demon-lab",
    version,
    about = "Clairvoyant scheduling of random walks on K_m"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// key=value file; command-line flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed (default: $DEMON_LAB_SEED, else 1)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Escape-probability curves for walks on K_m (CSV)
    Simulate {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        /// Comma list of horizons, ascending
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        loops: bool,
        /// Also write power-law and exponential tail fits of the first-blocking mass
        #[arg(long)]
        fit: Option<PathBuf>,
    },
    /// Compatibility frequency of two Bernoulli(p) sequences over a p sweep (CSV)
    Binary {
        /// Comma list of probabilities
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Find an escaping instance, extract its schedule, verify it and write it
    Schedule {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        loops: bool,
        /// Binary variant with this p instead of walks
        #[arg(long)]
        p: Option<f64>,
        /// First trial (stream index) to try
        #[arg(long)]
        trial: Option<u64>,
    },
    /// Toy mazery tower: condition report, optional dump of the top level
    Scaleup(TowerArgs),
    /// Level parameters of the schedule
    Params {
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        level: Option<u32>,
        /// Exponent override key=value (repeatable)
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Check the exponent inequalities
    CheckInequalities {
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Re-check a schedule file or a mazery dump
    Verify {
        path: PathBuf,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        loops: bool,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        trial: Option<u64>,
    },
    /// Monte Carlo probability diagnostics of a toy mazery (advisory)
    Diagnostics {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long)]
        trials: Option<u64>,
    },
}

#[derive(Args)]
struct TowerArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    window: Option<usize>,
    /// Top level of the tower (1 to 3)
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, value_parser = ["exact", "mc"])]
    estimator: Option<String>,
    #[arg(long)]
    mc_samples: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let invalid = e.downcast_ref::<Invalid>().is_some()
                || matches!(
                    e.downcast_ref::<LabError>(),
                    Some(LabError::InvalidParameter(_) | LabError::Parse { .. })
                );
            ExitCode::from(if invalid { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let mut s = Settings::load(cli.common.config.as_deref())?;
    s.out = cli.common.out.or(s.path("out")?);
    let threads = s.pick(cli.common.threads, "threads")?;
    s.seed = match s.pick(cli.common.seed, "seed")? {
        Some(v) => v,
        None => match std::env::var("DEMON_LAB_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| Invalid(format!("DEMON_LAB_SEED={v}: {e}")))?,
            Err(_) => 1,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            bail!(Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool")?;
    }
    match cli.cmd {
        Cmd::Simulate {
            m,
            n,
            n_list,
            trials,
            loops,
            fit,
        } => simulate(&mut s, m, n, n_list, trials, loops, fit),
        Cmd::Binary { p, horizon, trials } => binary(&mut s, p, horizon, trials),
        Cmd::Schedule {
            m,
            n,
            loops,
            p,
            trial,
        } => schedule(&mut s, m, n, loops, p, trial),
        Cmd::Scaleup(t) => scaleup(&mut s, &t),
        Cmd::Params { r0, level, set } => show_params(&mut s, r0, level, &set),
        Cmd::CheckInequalities { r0, set } => inequalities(&mut s, r0, &set),
        Cmd::Verify {
            path,
            m,
            loops,
            p,
            trial,
        } => verify(&mut s, &path, m, loops, p, trial),
        Cmd::Diagnostics { tower, trials } => diagnostics(&mut s, &tower, trials),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| Invalid(format!("{what} entry {t:?}: {e}")).into())
        })
        .collect()
}

fn simulate(
    s: &mut Settings,
    m: Option<u32>,
    n: Option<usize>,
    n_list: Option<String>,
    trials: Option<u64>,
    loops: bool,
    fit: Option<PathBuf>,
) -> anyhow::Result<u8> {
    let m = s.pick(m, "m")?.unwrap_or(5);
    let trials = s.pick(trials, "trials")?.unwrap_or(1000);
    let loops = loops || s.flag("loops")?;
    let list_text: Option<String> = s.pick(n_list, "n-list")?;
    let n_list: Vec<usize> = match (s.pick(n, "n")?, list_text) {
        (Some(_), Some(_)) => bail!(Invalid("give either --n or --n-list".into())),
        (Some(n), None) => vec![n],
        (None, Some(l)) => parse_list(&l, "n-list")?,
        (None, None) => vec![16, 32, 64, 128, 256],
    };
    let fit = fit.or(s.path("fit")?);
    s.finish(&[
        ("command", "simulate".into()),
        ("m", m.to_string()),
        ("n-list", join(&n_list)),
        ("trials", trials.to_string()),
        ("loops", loops.to_string()),
        (
            "fit",
            fit.as_ref().map_or("-".into(), |p| p.display().to_string()),
        ),
    ])?;
    let mut fit_file = fit.as_deref().map(create).transpose()?;
    let mut out = s.output()?;
    let curve = experiments::blocking_curve(m, &n_list, trials, s.seed, loops)?;
    experiments::write_csv(&mut out, &curve)?;
    if let Some(f) = fit_file.as_mut() {
        match experiments::tail_fit(&experiments::first_blocking_mass(&curve)) {
            Ok(rep) => write!(f, "{rep}")?,
            Err(e) => {
                eprintln!("warning: no tail fit: {e}");
                writeln!(f, "error={e}")?;
            }
        }
    }
    Ok(0)
}

fn binary(
    s: &mut Settings,
    p: Option<String>,
    horizon: Option<usize>,
    trials: Option<u64>,
) -> anyhow::Result<u8> {
    let ps: Vec<f64> = match s.pick(p, "p")? {
        Some(t) => parse_list(&t, "p")?,
        None => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
    };
    let horizon = s.pick(horizon, "horizon")?.unwrap_or(1000);
    let trials = s.pick(trials, "trials")?.unwrap_or(1000);
    s.finish(&[
        ("command", "binary".into()),
        ("p", join(&ps)),
        ("horizon", horizon.to_string()),
        ("trials", trials.to_string()),
    ])?;
    let mut out = s.output()?;
    let pts = experiments::sweep(&SweepValues::P(ps), horizon, trials, s.seed)?;
    experiments::write_csv(&mut out, &pts)?;
    Ok(0)
}

/// The sequences of one trial, drawn exactly as the Monte Carlo harness draws them.
enum Instance {
    Walks(ColorSequence, ColorSequence),
    Bits(BitSequence, BitSequence),
}

fn instance(
    seed: u64,
    trial: u64,
    m: u32,
    loops: bool,
    p: Option<f64>,
    len: usize,
) -> anyhow::Result<Instance> {
    let mut st = RngStream::new(seed, trial);
    Ok(match p {
        Some(p) => Instance::Bits(
            gen_bernoulli(p, len, &mut st)?,
            gen_bernoulli(p, len, &mut st)?,
        ),
        None => Instance::Walks(
            gen_walk(m, len, loops, &mut st)?,
            gen_walk(m, len, loops, &mut st)?,
        ),
    })
}

fn schedule(
    s: &mut Settings,
    m: Option<u32>,
    n: Option<usize>,
    loops: bool,
    p: Option<f64>,
    trial: Option<u64>,
) -> anyhow::Result<u8> {
    let m = s.pick(m, "m")?.unwrap_or(5);
    let n = s.pick(n, "n")?.unwrap_or(64);
    let loops = loops || s.flag("loops")?;
    let p = s.pick(p, "p")?;
    let start = s.pick(trial, "trial")?.unwrap_or(0);
    s.finish(&[
        ("command", "schedule".into()),
        (
            "variant",
            if p.is_some() { "binary" } else { "walks" }.into(),
        ),
        ("m", m.to_string()),
        ("p", p.map_or("-".into(), |p| p.to_string())),
        ("n", n.to_string()),
        ("loops", loops.to_string()),
        ("trial", start.to_string()),
    ])?;
    // validate the model before the search
    instance(0, 0, m, loops, p, 1)?;
    let mut out = s.output()?;
    // n + 1 walk values reach distance n; the bit variant uses n bits, like the sweep
    let len = if p.is_some() { n } else { n + 1 };
    for trial in start..start + SCHEDULE_SEARCH {
        let found = match instance(s.seed, trial, m, loops, p, len)? {
            Instance::Walks(x, y) => {
                if x.values[0] == y.values[0] {
                    continue;
                }
                scheduling::extract_schedule(&x, &y, n)?
                    .map(|(_, sc)| -> anyhow::Result<_> {
                        let ok = scheduling::verify_no_collision(&x, &y, &sc)?;
                        Ok((sc, ok))
                    })
                    .transpose()?
            }
            Instance::Bits(z0, z1) => scheduling::extract_binary_schedule(&z0, &z1, n)?
                .map(|sc| -> anyhow::Result<_> {
                    let ok = scheduling::verify_binary_schedule(&z0, &z1, &sc)?;
                    Ok((sc, ok))
                })
                .transpose()?,
        };
        if let Some((sc, ok)) = found {
            eprintln!(
                "trial={trial} len0={} len1={} verified={ok}",
                sc.t0.len(),
                sc.t1.len()
            );
            write!(out, "{sc}")?;
            return Ok(if ok { 0 } else { 2 });
        }
    }
    bail!(
        "no instance with an open origin and an escape path in trials {start}..{}",
        start + SCHEDULE_SEARCH
    )
}

fn estimator(s: &mut Settings, t: &TowerArgs) -> anyhow::Result<Estimator> {
    let mut est = Estimator {
        seed: s.seed,
        ..Estimator::default()
    };
    match s.pick(t.estimator.clone(), "estimator")?.as_deref() {
        None | Some("exact") => est.mode = EstimatorMode::Exact,
        Some("mc") => est.mode = EstimatorMode::MonteCarlo,
        Some(other) => bail!(Invalid(format!(
            "estimator {other:?}: expected exact or mc"
        ))),
    }
    if let Some(k) = s.pick(t.mc_samples, "mc-samples")? {
        if k == 0 {
            bail!(Invalid("--mc-samples must be positive".into()));
        }
        est.samples = k;
    }
    Ok(est)
}

fn build_tower(
    s: &mut Settings,
    t: &TowerArgs,
    extra: &[(&str, String)],
) -> anyhow::Result<Vec<Mazery>> {
    let m = s.pick(t.m, "m")?.unwrap_or(4);
    let window = s.pick(t.window, "window")?.unwrap_or(1024);
    let level = s.pick(t.level, "level")?.unwrap_or(2);
    let est = estimator(s, t)?;
    if !(1..=3).contains(&level) {
        bail!(Invalid(format!(
            "level {level}: toy towers reach levels 1 to 3"
        )));
    }
    let mut cfg = vec![
        ("m", m.to_string()),
        ("window", window.to_string()),
        ("level", level.to_string()),
        ("estimator", est.mode.to_string()),
        ("mc-samples", est.samples.to_string()),
    ];
    cfg.extend(extra.iter().cloned());
    s.finish(&cfg)?;
    let mut st = RngStream::new(s.seed, 0);
    let x = gen_walk(m, window, false, &mut st)?;
    let y = gen_walk(m, window, false, &mut st)?;
    let tower = toy::tower(&x, &y, window, level, &est)?;
    for mz in &tower[1..] {
        for l in &mz.log {
            eprintln!("level {}: {l}", mz.level());
        }
    }
    Ok(tower)
}

fn scaleup(s: &mut Settings, t: &TowerArgs) -> anyhow::Result<u8> {
    let tower = build_tower(s, t, &[("command", "scaleup".into())])?;
    let mut out = s.output_file();
    let mut report = String::new();
    let mut ok = true;
    for mz in &tower {
        let r = mazery::check_conditions(mz);
        ok &= r.all_pass();
        write!(report, "{r}")?;
    }
    match out.as_mut() {
        Some(f) => {
            f.write_all(mazery::dump(tower.last().unwrap())?.as_bytes())?;
            print!("{report}");
        }
        None => print!("{report}"),
    }
    Ok(if ok { 0 } else { 2 })
}

fn diagnostics(s: &mut Settings, t: &TowerArgs, trials: Option<u64>) -> anyhow::Result<u8> {
    let trials = s.pick(trials, "trials")?.unwrap_or(2000);
    let tower = build_tower(
        s,
        t,
        &[
            ("command", "diagnostics".into()),
            ("trials", trials.to_string()),
        ],
    )?;
    let mut st = RngStream::new(s.seed, 1);
    let rep = mazery::probability_diagnostics(tower.last().unwrap(), trials, &mut st);
    let mut out = s.output()?;
    write!(out, "{rep}")?;
    Ok(0)
}

fn exponents(s: &mut Settings, r0: Option<f64>, set: &[String]) -> anyhow::Result<ExponentSet> {
    let mut e = ExponentSet::default();
    for &k in ExponentSet::keys() {
        if let Some(v) = s.raw(k) {
            e.set(k, &v)?;
        }
    }
    for kv in set {
        let Some((k, v)) = kv.split_once('=') else {
            bail!(Invalid(format!("--set {kv:?}: expected key=value")));
        };
        e.set(k.trim(), v)?;
    }
    if let Some(r) = s.pick(r0, "r0")? {
        e.r0 = r;
    }
    e.validate()?;
    Ok(e)
}

fn show_params(
    s: &mut Settings,
    r0: Option<f64>,
    level: Option<u32>,
    set: &[String],
) -> anyhow::Result<u8> {
    let e = exponents(s, r0, set)?;
    let k = s.pick(level, "level")?.unwrap_or(1);
    s.finish(&[
        ("command", "params".into()),
        ("level", k.to_string()),
        ("exponents", e.to_string()),
    ])?;
    let lp = params::level_params(&e, k, SIGMA1, Q1)?;
    let (lo, hi, life) = params::rank_bounds(&e, k);
    let mut text = String::new();
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| v.to_string());
    for (key, v) in [
        ("level", lp.level.to_string()),
        ("R", lp.r.to_string()),
        ("T", opt(lp.t)),
        ("Delta", lp.delta.to_string()),
        ("f", lp.f.to_string()),
        ("g", lp.g.to_string()),
        ("g_prime", lp.g_prime.to_string()),
        ("lambda1", lp.lambda1.to_string()),
        ("lambda2", lp.lambda2.to_string()),
        ("L1", lp.l1.to_string()),
        ("L2", lp.l2.to_string()),
        ("L3", lp.l3.to_string()),
        ("w", lp.w.to_string()),
        ("sigma", lp.sigma.to_string()),
        ("q", lp.q.to_string()),
        ("R_star", lp.r_star.to_string()),
        ("R_hat", lp.r_hat.to_string()),
        ("p_bar", opt(lp.p_bar)),
        ("Delta_star", lp.delta_star.to_string()),
        ("rank_window", format!("{lo},{hi}")),
        ("rank_lifetime", life.to_string()),
        ("d", join(&params::distance_table(&e, 8)?)),
    ] {
        writeln!(text, "{key}={v}")?;
    }
    match params::min_colors(&e) {
        Ok(mc) => {
            writeln!(text, "min_colors_bound={}", mc.bound)?;
            writeln!(text, "min_colors_bound_value={}", mc.bound_value)?;
        }
        Err(err) => eprintln!("warning: {err}"),
    }
    s.output()?.write_all(text.as_bytes())?;
    Ok(0)
}

fn inequalities(s: &mut Settings, r0: Option<f64>, set: &[String]) -> anyhow::Result<u8> {
    let e = exponents(s, r0, set)?;
    s.finish(&[
        ("command", "check-inequalities".into()),
        ("exponents", e.to_string()),
    ])?;
    let rep = params::check_inequalities(&e);
    write!(s.output()?, "{rep}")?;
    Ok(if rep.all_pass() { 0 } else { 1 })
}

fn verify(
    s: &mut Settings,
    path: &std::path::Path,
    m: Option<u32>,
    loops: bool,
    p: Option<f64>,
    trial: Option<u64>,
) -> anyhow::Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.starts_with("mazery-dump") {
        s.finish(&[
            ("command", "verify".into()),
            ("dump", path.display().to_string()),
        ])?;
        let rep = mazery::check_dump(&text)?;
        write!(s.output()?, "{rep}")?;
        return Ok(if rep.all_pass() { 0 } else { 2 });
    }
    let sc: Schedule = text.parse()?;
    let m = s.pick(m, "m")?.unwrap_or(5);
    let loops = loops || s.flag("loops")?;
    let p = s.pick(p, "p")?;
    let trial = s.pick(trial, "trial")?.unwrap_or(0);
    s.finish(&[
        ("command", "verify".into()),
        ("schedule", path.display().to_string()),
        ("m", m.to_string()),
        ("p", p.map_or("-".into(), |p| p.to_string())),
        ("loops", loops.to_string()),
        ("trial", trial.to_string()),
    ])?;
    let len = sc.t0.len().max(sc.t1.len());
    let ok = match instance(s.seed, trial, m, loops, p, len)? {
        Instance::Walks(x, y) => scheduling::verify_no_collision(&x, &y, &sc)?,
        Instance::Bits(z0, z1) => scheduling::verify_binary_schedule(&z0, &z1, &sc)?,
    };
    writeln!(s.output()?, "verified={ok}")?;
    Ok(if ok { 0 } else { 2 })
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn create(p: &std::path::Path) -> anyhow::Result<fs::File> {
    fs::File::create(p).map_err(|e| Invalid(format!("cannot write {}: {e}", p.display())).into())
}
