//! Per-level parameter schedule, exponent inequalities, rank windows and bound functions.

use std::fmt;

use crate::error::{invalid, LabError, Result};

/// Relative slack used when a float lands within rounding noise of an integer
/// or of the other side of a non-strict comparison.
const REL_EPS: f64 = 1e-9;

/// Exponents and constants of the parameter schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentSet {
    pub delta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub omega: f64,
    pub chi: f64,
    /// Base of all exponentials in the schedule.
    pub lambda: f64,
    /// Slope growth constant.
    pub slope_const: f64,
    /// Channel constant.
    pub channel_const: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub r0: f64,
    /// Enforce `tau = 2 - phi` and the size cap `3f <= Delta*`.
    pub faithful: bool,
}

impl Default for ExponentSet {
    fn default() -> Self {
        ExponentSet {
            delta: 0.15,
            gamma: 0.2,
            phi: 0.25,
            tau: 1.75,
            tau_prime: 2.5,
            omega: 4.5,
            chi: 0.015,
            lambda: std::f64::consts::SQRT_2,
            slope_const: 500.0,
            channel_const: 12.0,
            c1: 1.0,
            c2: 0.29,
            c3: 1.0,
            r0: 4.0,
            faithful: false,
        }
    }
}

impl ExponentSet {
    /// `2 tau / (tau - 1)`: the factor bounding every rank relative to the level's `R`.
    pub fn tau_bar(&self) -> f64 {
        2.0 * self.tau / (self.tau - 1.0)
    }

    pub fn rank(&self, k: u32) -> f64 {
        self.r0 * self.tau.powi(k as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta,
            self.gamma,
            self.phi,
            self.tau,
            self.tau_prime,
            self.omega,
            self.chi,
            self.lambda,
            self.slope_const,
            self.channel_const,
            self.c1,
            self.c2,
            self.c3,
            self.r0,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite exponent");
        }
        if self.lambda <= 1.0 {
            return invalid(format!("lambda = {} must exceed 1", self.lambda));
        }
        if self.tau <= 1.0 {
            return invalid(format!("tau = {} must exceed 1", self.tau));
        }
        if self.r0 <= 1.0 {
            return invalid(format!("r0 = {} must exceed 1", self.r0));
        }
        if self.faithful && (self.tau - (2.0 - self.phi)).abs() > REL_EPS {
            return invalid(format!(
                "faithful mode requires tau = 2 - phi, got tau = {}",
                self.tau
            ));
        }
        Ok(())
    }

    /// Sets one field from a `key=value` pair (config files, CLI overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|e| LabError::InvalidParameter(format!("{key}={value}: {e}")))
        };
        match key {
            "delta" => self.delta = num()?,
            "gamma" => self.gamma = num()?,
            "phi" => self.phi = num()?,
            "tau" => self.tau = num()?,
            "tau_prime" => self.tau_prime = num()?,
            "omega" => self.omega = num()?,
            "chi" => self.chi = num()?,
            "lambda" => self.lambda = num()?,
            "slope_const" => self.slope_const = num()?,
            "channel_const" => self.channel_const = num()?,
            "c1" => self.c1 = num()?,
            "c2" => self.c2 = num()?,
            "c3" => self.c3 = num()?,
            "r0" => self.r0 = num()?,
            "faithful" => {
                self.faithful = value
                    .trim()
                    .parse()
                    .map_err(|e| LabError::InvalidParameter(format!("{key}={value}: {e}")))?
            }
            _ => return invalid(format!("unknown exponent key {key:?}")),
        }
        Ok(())
    }

    pub fn keys() -> &'static [&'static str] {
        &[
            "delta",
            "gamma",
            "phi",
            "tau",
            "tau_prime",
            "omega",
            "chi",
            "lambda",
            "slope_const",
            "channel_const",
            "c1",
            "c2",
            "c3",
            "r0",
            "faithful",
        ]
    }
}

impl fmt::Display for ExponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={} gamma={} phi={} tau={} tau_prime={} omega={} chi={} lambda={} slope_const={} \
             channel_const={} c1={} c2={} c3={} r0={} faithful={}",
            self.delta, self.gamma, self.phi, self.tau, self.tau_prime, self.omega, self.chi,
            self.lambda, self.slope_const, self.channel_const, self.c1, self.c2, self.c3, self.r0,
            self.faithful
        )
    }
}

/// Numeric parameters of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelParams {
    pub level: u32,
    /// Rank lower bound `R`.
    pub r: f64,
    /// `lambda^R`; absent for directly constructed toy levels.
    pub t: Option<f64>,
    /// Size bound of walls and traps.
    pub delta: f64,
    pub f: f64,
    pub g: f64,
    pub g_prime: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub w: f64,
    pub sigma: f64,
    pub q: f64,
    /// Next level's rank bound (light/heavy threshold).
    pub r_star: f64,
    /// Rank of emerging walls.
    pub r_hat: f64,
    pub p_bar: Option<f64>,
    /// Next level's size bound.
    pub delta_star: f64,
}

fn derived(level: u32, r: f64, delta: f64, f: f64, g: f64, exps: &ExponentSet) -> LevelParams {
    let g_prime = 2.2 * g;
    let lambda1 = 7.0 * delta;
    let lambda2 = g_prime;
    LevelParams {
        level,
        r,
        t: None,
        delta,
        f,
        g,
        g_prime,
        lambda1,
        lambda2,
        l1: 4.0 * lambda1,
        l2: 4.0 * lambda2,
        l3: g,
        w: f64::NAN,
        sigma: 0.0,
        q: 0.0,
        r_star: exps.tau * r,
        r_hat: exps.tau_prime * r,
        p_bar: None,
        delta_star: delta.powf(exps.tau),
    }
}

/// Level `k` of the schedule from the exponents (`sigma1`, `q1` seed the recursions).
pub fn level_params(exps: &ExponentSet, k: u32, sigma1: f64, q1: f64) -> Result<LevelParams> {
    exps.validate()?;
    if k == 0 {
        return invalid("levels start at 1");
    }
    let (mut sigma, mut q) = (sigma1, q1);
    for j in 1..=k {
        let r = exps.rank(j);
        let t = exps.lambda.powf(r);
        if !t.is_finite() {
            return Err(LabError::Range {
                level: j,
                what: format!("T = lambda^{r} overflows"),
            });
        }
        let mut lp = derived(
            j,
            r,
            t.powf(exps.delta),
            t.powf(exps.phi),
            t.powf(exps.gamma),
            exps,
        );
        lp.t = Some(t);
        lp.w = t.powf(-exps.omega);
        lp.p_bar = Some(1.0 / t);
        lp.sigma = sigma;
        lp.q = q;
        if !lp.delta_star.is_finite() || lp.w == 0.0 {
            return Err(LabError::Range {
                level: j,
                what: "derived value leaves the f64 range".into(),
            });
        }
        if j == k {
            if exps.faithful && 3.0 * lp.f > lp.delta_star {
                return invalid(format!(
                    "size cap violated at level {j}: 3f = {} > Delta* = {}",
                    3.0 * lp.f,
                    lp.delta_star
                ));
            }
            return Ok(lp);
        }
        sigma += exps.slope_const * lp.g / lp.f;
        q += lp.delta_star / t;
    }
    unreachable!()
}

/// Natural logarithms of the level quantities; never overflows.
#[derive(Clone, Debug, PartialEq)]
pub struct LogLevel {
    pub level: u32,
    pub r: f64,
    pub ln_t: f64,
    pub ln_delta: f64,
    pub ln_f: f64,
    pub ln_g: f64,
    pub ln_w: f64,
    pub sigma: f64,
    pub q: f64,
}

/// Levels `1..=kmax` evaluated in the log domain (for large `R0`).
pub fn log_schedule(exps: &ExponentSet, kmax: u32, sigma1: f64, q1: f64) -> Result<Vec<LogLevel>> {
    exps.validate()?;
    let (mut sigma, mut q) = (sigma1, q1);
    let mut out = Vec::with_capacity(kmax as usize);
    for k in 1..=kmax {
        let r = exps.rank(k);
        if !r.is_finite() {
            return Err(LabError::Range {
                level: k,
                what: "rank overflows".into(),
            });
        }
        let ln_t = r * exps.lambda.ln();
        let lv = LogLevel {
            level: k,
            r,
            ln_t,
            ln_delta: exps.delta * ln_t,
            ln_f: exps.phi * ln_t,
            ln_g: exps.gamma * ln_t,
            ln_w: -exps.omega * ln_t,
            sigma,
            q,
        };
        sigma += exps.slope_const * (lv.ln_g - lv.ln_f).exp();
        q += ((exps.tau * exps.delta - 1.0) * ln_t).exp();
        out.push(lv);
    }
    Ok(out)
}

impl LogLevel {
    /// `Delta/g <= g/f`, compared in the log domain with rounding slack.
    pub fn gap_ratio_ok(&self) -> bool {
        let lhs = self.ln_delta - self.ln_g;
        let rhs = self.ln_g - self.ln_f;
        lhs <= rhs + REL_EPS * rhs.abs().max(1.0)
    }
}

/// Explicit small parameters for desk-scale constructions.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyLevel {
    pub level: u32,
    pub delta: f64,
    pub f: f64,
    pub g: f64,
    pub w: f64,
    pub q: f64,
    pub r: f64,
    pub sigma: f64,
    /// Size bound of the next level.
    pub delta_star: f64,
}

impl LevelParams {
    /// Toy level with the relaxed check `Delta <= g <= f`, `3f <= Delta*`, `sigma < 0.5`.
    pub fn toy(spec: &ToyLevel, exps: &ExponentSet) -> Result<LevelParams> {
        let ToyLevel {
            level,
            delta,
            f,
            g,
            w,
            q,
            r,
            sigma,
            delta_star,
        } = spec.clone();
        if !(delta <= g && g <= f) {
            return invalid(format!(
                "toy level {level}: need Delta <= g <= f, got {delta}, {g}, {f}"
            ));
        }
        if 3.0 * f > delta_star {
            return invalid(format!(
                "toy level {level}: 3f = {} exceeds Delta* = {delta_star}",
                3.0 * f
            ));
        }
        if !(0.0..0.5).contains(&sigma) {
            return invalid(format!(
                "toy level {level}: sigma = {sigma} outside [0, 0.5)"
            ));
        }
        if !(w > 0.0 && w <= 1.0) {
            return invalid(format!("toy level {level}: w = {w} outside (0, 1]"));
        }
        if r <= 0.0 {
            return invalid(format!("toy level {level}: rank bound must be positive"));
        }
        let mut lp = derived(level, r, delta, f, g, exps);
        lp.w = w;
        lp.q = q;
        lp.sigma = sigma;
        lp.delta_star = delta_star;
        Ok(lp)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect()
    }
}

impl fmt::Display for InequalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<22} {:<32} lhs={} rhs={}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.statement,
                c.lhs,
                c.rhs
            )?;
        }
        Ok(())
    }
}

fn lt(lhs: f64, rhs: f64) -> bool {
    lhs < rhs
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_EPS * rhs.abs().max(1.0)
}

/// Every exponent inequality the schedule relies on.
pub fn check_inequalities(e: &ExponentSet) -> InequalityReport {
    let tb = e.tau_bar();
    let mut checks = Vec::new();
    let mut push = |name, statement, lhs: f64, rhs: f64, pass: bool| {
        checks.push(InequalityCheck {
            name,
            statement,
            lhs,
            rhs,
            pass,
        })
    };
    push(
        "rank-growth-lower",
        "tau < tau'",
        e.tau,
        e.tau_prime,
        lt(e.tau, e.tau_prime),
    );
    push(
        "rank-growth-upper",
        "tau' < tau^2",
        e.tau_prime,
        e.tau * e.tau,
        lt(e.tau_prime, e.tau * e.tau),
    );
    let order = 0.0 < e.delta && e.delta < e.gamma && e.gamma < e.phi && e.phi < 1.0;
    push(
        "exponent-order",
        "0 < delta < gamma < phi < 1",
        e.delta,
        e.phi,
        order,
    );
    push(
        "growth-cap",
        "tau <= 2 - phi",
        e.tau,
        2.0 - e.phi,
        le(e.tau, 2.0 - e.phi),
    );
    push(
        "size-cap",
        "phi < tau*delta",
        e.phi,
        e.tau * e.delta,
        lt(e.phi, e.tau * e.delta),
    );
    let mid = (e.delta + e.phi) / 2.0;
    push(
        "midpoint",
        "gamma >= (delta+phi)/2",
        e.gamma,
        mid,
        le(mid, e.gamma),
    );
    let (l, r) = (4.0 * (e.gamma + e.delta), e.omega * (4.0 - e.tau));
    push(
        "correlated-trap",
        "4(gamma+delta) < omega(4-tau)",
        l,
        r,
        lt(l, r),
    );
    push("tau-below-two", "tau < 2", e.tau, 2.0, lt(e.tau, 2.0));
    let l = 4.0 * e.gamma + 6.0 * e.delta + e.tau_prime;
    push(
        "emerging-size",
        "4gamma+6delta+tau' < omega",
        l,
        e.omega,
        lt(l, e.omega),
    );
    let l = e.tau * (e.delta + 1.0);
    push(
        "emerging-rank",
        "tau(delta+1) < tau'",
        l,
        e.tau_prime,
        lt(l, e.tau_prime),
    );
    let (l, r) = (e.tau * e.chi, e.gamma - e.delta);
    push("hole-gap", "tau*chi < gamma-delta", l, r, lt(l, r));
    let (l, r) = (tb * e.chi, 1.0 - e.tau * e.delta);
    push("hole-clean", "taubar*chi < 1-tau*delta", l, r, lt(l, r));
    let (l, r) = (tb * e.chi, e.omega - 2.0 * e.tau * e.delta);
    push("hole-trap", "taubar*chi < omega-2tau*delta", l, r, lt(l, r));
    InequalityReport { checks }
}

/// Least number of colors: the closed-form upper bound `ceil(2 lambda^{R0 omega tau})`
/// and the exact `ceil(1/w1 + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinColors {
    pub bound: u64,
    pub bound_value: f64,
    pub exact: u64,
}

pub fn min_colors(e: &ExponentSet) -> Result<MinColors> {
    e.validate()?;
    let inv_w1 = e.lambda.powf(e.r0 * e.omega * e.tau);
    let bound_value = 2.0 * inv_w1;
    if !bound_value.is_finite() || bound_value >= u64::MAX as f64 {
        return Err(LabError::Range {
            level: 1,
            what: "color bound overflows".into(),
        });
    }
    Ok(MinColors {
        bound: ceil_guarded(bound_value),
        bound_value,
        exact: min_colors_for_w(1.0 / inv_w1)?,
    })
}

/// `ceil(1/w + 1)`.
pub fn min_colors_for_w(w: f64) -> Result<u64> {
    if !(w > 0.0 && w.is_finite()) {
        return invalid(format!("w = {w} must be positive"));
    }
    let v = 1.0 / w + 1.0;
    if v >= u64::MAX as f64 {
        return Err(LabError::Range {
            level: 1,
            what: "1/w overflows".into(),
        });
    }
    Ok(ceil_guarded(v))
}

/// Ceiling that ignores float noise around exact integers.
fn ceil_guarded(v: f64) -> u64 {
    let r = v.round();
    if (v - r).abs() <= REL_EPS * r.abs().max(1.0) {
        r as u64
    } else {
        v.ceil() as u64
    }
}

/// Rank window `[R_k, taubar R_k]` and the number of levels a rank can stay relevant.
pub fn rank_bounds(e: &ExponentSet, k: u32) -> (f64, f64, u32) {
    let r = e.rank(k);
    let tb = e.tau_bar();
    let life = (tb.ln() / e.tau.ln()).ceil() as u32;
    (r, tb * r, life)
}

/// Wall-start bound `c2 r^{-c1} lambda^{-r}`.
pub fn wall_prob(e: &ExponentSet, r: f64) -> f64 {
    e.c2 * r.powf(-e.c1) * e.lambda.powf(-r)
}

/// Hole bound `c3 lambda^{-chi r}`.
pub fn hole_prob(e: &ExponentSet, r: f64) -> f64 {
    e.c3 * e.lambda.powf(-e.chi * r)
}

/// Distance classes: `d_0 = 0`, `d_1 = 1`, `d_i = ceil(lambda^i)`.
pub fn distance_table(e: &ExponentSet, len: usize) -> Result<Vec<u64>> {
    if len > 128 {
        return invalid("distance table limited to 128 entries");
    }
    Ok((0..len)
        .map(|i| match i {
            0 => 0,
            1 => 1,
            _ => ceil_guarded(e.lambda.powi(i as i32)),
        })
        .collect())
}

/// Class `i` with `d_i <= d < d_{i+1}`.
pub fn distance_class(table: &[u64], d: u64) -> usize {
    table.partition_point(|&di| di <= d) - 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundValues {
    pub p: f64,
    pub h: f64,
    pub d: Vec<u64>,
}

pub fn bound_functions(e: &ExponentSet, r: f64, table_len: usize) -> Result<BoundValues> {
    if r <= 0.0 {
        return invalid("rank must be positive");
    }
    Ok(BoundValues {
        p: wall_prob(e, r),
        h: hole_prob(e, r),
        d: distance_table(e, table_len)?,
    })
}
