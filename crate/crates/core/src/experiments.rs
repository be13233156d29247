//! Monte Carlo harness: escape curves, binary sweeps, tail fits, CSV output.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};
use crate::percolation::{binary_compatible, escape_record};
use crate::rng::{gen_bernoulli, gen_walk, RngStream};

pub const CSV_HEADER: &str = "kind,m_or_p,n,trials,successes,estimate,ci_low,ci_high,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// Origin escapes `[0,n]^2` (walks on K_m).
    Escape,
    /// Binary sequences compatible up to horizon `n`.
    Binary,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Escape => "escape",
            CurveKind::Binary => "binary",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub kind: CurveKind,
    /// `m` for escape curves, `p` for binary sweeps.
    pub param: f64,
    pub n: usize,
    pub trials: u64,
    pub escapes: u64,
    pub p_escape: f64,
    pub standard_error: f64,
    pub ci: (f64, f64),
    pub seed: u64,
}

impl CurvePoint {
    fn new(kind: CurveKind, param: f64, n: usize, trials: u64, escapes: u64, seed: u64) -> Self {
        let p = escapes as f64 / trials as f64;
        CurvePoint {
            kind,
            param,
            n,
            trials,
            escapes,
            p_escape: p,
            standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
            ci: wilson(escapes, trials),
            seed,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            self.kind,
            self.param,
            self.n,
            self.trials,
            self.escapes,
            self.p_escape,
            self.ci.0,
            self.ci.1,
            self.seed
        )
    }
}

/// Wilson score interval at 95%.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Escape frequencies at every `n` of `n_list`, one walk pair per trial
/// (stream index = trial number, X drawn before Y).
pub fn blocking_curve(
    m: u32,
    n_list: &[usize],
    trials: u64,
    master_seed: u64,
    loops: bool,
) -> Result<Vec<CurvePoint>> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return invalid("n_list must be non-empty, positive and strictly ascending");
    }
    let nmax = *n_list.last().unwrap();
    // validates m / loops once up front
    gen_walk(m, 1, loops, &mut RngStream::new(0, 0))?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut s = RngStream::new(master_seed, trial);
            let x = gen_walk(m, nmax + 1, loops, &mut s).expect("validated");
            let y = gen_walk(m, nmax + 1, loops, &mut s).expect("validated");
            let rec = escape_record(&x, &y, nmax).expect("lengths match");
            n_list
                .iter()
                .map(|&n| rec.escape(n) as u64)
                .collect::<Vec<u64>>()
        })
        .reduce(|| vec![0; n_list.len()], add_counts);
    Ok(n_list
        .iter()
        .zip(counts)
        .map(|(&n, c)| CurvePoint::new(CurveKind::Escape, m as f64, n, trials, c, master_seed))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepValues {
    M(Vec<u32>),
    P(Vec<f64>),
}

/// One point per value at the fixed horizon. Binary trials reuse the same streams
/// across `p` values (common random numbers).
pub fn sweep(
    values: &SweepValues,
    horizon: usize,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    match values {
        SweepValues::M(ms) => {
            if ms.is_empty() {
                return invalid("empty sweep");
            }
            let mut out = Vec::new();
            for &m in ms {
                out.extend(blocking_curve(m, &[horizon], trials, master_seed, false)?);
            }
            Ok(out)
        }
        SweepValues::P(ps) => {
            if ps.is_empty() {
                return invalid("empty sweep");
            }
            for &p in ps {
                crate::rng::BernoulliThreshold::new(p)?;
            }
            if horizon == 0 {
                return invalid("horizon must be at least 1");
            }
            let counts = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    ps.iter()
                        .map(|&p| {
                            let mut s = RngStream::new(master_seed, trial);
                            let z0 = gen_bernoulli(p, horizon, &mut s).expect("validated");
                            let z1 = gen_bernoulli(p, horizon, &mut s).expect("validated");
                            binary_compatible(&z0, &z1, horizon).expect("lengths match") as u64
                        })
                        .collect::<Vec<u64>>()
                })
                .reduce(|| vec![0; ps.len()], add_counts);
            Ok(ps
                .iter()
                .zip(counts)
                .map(|(&p, c)| {
                    CurvePoint::new(CurveKind::Binary, p, horizon, trials, c, master_seed)
                })
                .collect())
        }
    }
}

pub fn write_csv<W: Write>(mut out: W, points: &[CurvePoint]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in points {
        writeln!(out, "{}", p.csv_row())?;
    }
    Ok(())
}

/// First-blocking mass `q_n = p(n_prev) - p(n)` from adjacent points of one curve.
pub fn first_blocking_mass(curve: &[CurvePoint]) -> Vec<(f64, f64)> {
    curve
        .windows(2)
        .map(|w| (w[1].n as f64, w[0].p_escape - w[1].p_escape))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailFit {
    /// Slope: power-law exponent, or log-rate per unit `n` for the exponential fit.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub power: TailFit,
    pub exponential: TailFit,
}

impl fmt::Display for TailReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "points={}", self.power.points_used)?;
        writeln!(f, "power_exponent={}", self.power.exponent)?;
        writeln!(f, "power_intercept={}", self.power.intercept)?;
        writeln!(f, "power_r_squared={}", self.power.r_squared)?;
        writeln!(f, "exp_rate={}", self.exponential.exponent)?;
        writeln!(f, "exp_intercept={}", self.exponential.intercept)?;
        writeln!(f, "exp_r_squared={}", self.exponential.r_squared)
    }
}

fn least_squares(pts: &[(f64, f64)]) -> TailFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    TailFit {
        exponent: slope,
        intercept,
        r_squared,
        points_used: pts.len(),
    }
}

/// Power-law (log-log) and exponential (log-linear) fits over the positive masses.
pub fn tail_fit(mass: &[(f64, f64)]) -> Result<TailReport> {
    let pos: Vec<(f64, f64)> = mass
        .iter()
        .copied()
        .filter(|&(n, q)| q > 0.0 && n > 0.0)
        .collect();
    if pos.len() < 3 {
        return Err(LabError::InsufficientData(format!(
            "{} strictly positive mass points, need 3",
            pos.len()
        )));
    }
    let ll: Vec<(f64, f64)> = pos.iter().map(|&(n, q)| (n.ln(), q.ln())).collect();
    let lin: Vec<(f64, f64)> = pos.iter().map(|&(n, q)| (n, q.ln())).collect();
    if ll.iter().all(|p| p.0 == ll[0].0) {
        return Err(LabError::InsufficientData("all points share one n".into()));
    }
    Ok(TailReport {
        power: least_squares(&ll),
        exponential: least_squares(&lin),
    })
}
