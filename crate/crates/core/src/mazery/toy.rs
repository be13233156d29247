//! Toy parameter schedule for desk-scale towers.
//!
//! The faithful schedule has astronomical sizes, so toy levels pick the
//! smallest integers the construction tolerates: `Delta_1 = 1`, `g_1 = 2`,
//! `f_1 = 4`, and `Delta_{k+1}` the largest object size the scale-up can
//! produce from level `k`. Ranks follow `R_k = r0 tau^k` with `r0 = 20`, large
//! enough for the compound rank window to clear the next threshold.

use super::{base_mazery_with, scale_up, Estimator, Mazery, MazeryParams};
use crate::error::{invalid, Result};
use crate::params::{ExponentSet, LevelParams, ToyLevel};
use crate::rng::ColorSequence;

pub fn toy_exponents() -> ExponentSet {
    ExponentSet {
        r0: 20.0,
        ..ExponentSet::default()
    }
}

/// Largest wall or trap the scale-up from a level with these sizes can create.
pub fn size_bound(delta: i64, f: i64, g: i64) -> i64 {
    let lambda = [7 * delta, (2.2 * g as f64 - 1e-9).ceil() as i64];
    let big_l = [4 * lambda[0], 4 * lambda[1], g];
    let emerging = big_l.iter().max().unwrap() + 4 * delta;
    let uncorrelated = delta + f;
    let correlated = (4 * lambda[0]).max(4 * lambda[1]).max(5 * delta);
    let missing = g.max(3 * delta);
    let compound = 2 * delta + 2 * f + emerging.max(delta);
    [emerging, uncorrelated, correlated, missing, compound]
        .into_iter()
        .max()
        .unwrap()
}

/// Levels `1..=levels` of the toy schedule.
pub fn toy_schedule(exps: &ExponentSet, levels: u32) -> Result<Vec<LevelParams>> {
    if levels == 0 || levels > 3 {
        return invalid("toy schedules cover levels 1 to 3");
    }
    let w = [0.9, 0.8, 0.8];
    let sigma = [0.0, 0.2, 0.35];
    let q = [0.05, 0.1, 0.15];
    let mut out = Vec::new();
    let (mut delta, mut g, mut f) = (1i64, 2i64, 4i64);
    for k in 1..=levels {
        let i = (k - 1) as usize;
        let next = size_bound(delta, f, g);
        let spec = ToyLevel {
            level: k,
            delta: delta as f64,
            f: f as f64,
            g: g as f64,
            w: w[i],
            q: q[i],
            r: exps.rank(k),
            sigma: sigma[i],
            delta_star: next as f64,
        };
        let lp = LevelParams::toy(&spec, exps)?;
        let floor = 2.0 * lp.r - (f as f64).ln() / exps.lambda.ln();
        if exps.rank(k + 1) > floor {
            return invalid(format!(
                "toy level {k}: next rank {} exceeds 2R - log f = {floor}; raise r0",
                exps.rank(k + 1)
            ));
        }
        out.push(lp);
        delta = next;
        g = 2 * delta + 1;
        f = g + 5;
    }
    Ok(out)
}

/// Toy mazeries of levels `1..=top` on the first `window` values of `x`, `y`.
pub fn tower(
    x: &ColorSequence,
    y: &ColorSequence,
    window: usize,
    top: u32,
    est: &Estimator,
) -> Result<Vec<Mazery>> {
    let exps = toy_exponents();
    let sched = toy_schedule(&exps, top)?;
    let params = sched
        .iter()
        .map(|lp| MazeryParams::from_level(lp, &exps))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![base_mazery_with(x, y, window, params[0].clone())?];
    for p in &params[1..] {
        let next = scale_up(out.last().unwrap(), est, p)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_sizes() {
        let s = toy_schedule(&toy_exponents(), 3).unwrap();
        assert_eq!(s[0].delta_star, 42.0);
        assert_eq!(s[1].delta, 42.0);
        assert_eq!(s[1].g, 85.0);
        assert_eq!(s[1].delta_star, 1608.0);
        assert!((s[0].r - 35.0).abs() < 1e-12);
        assert!(s[0].r_hat < s[1].r_star);
    }

    #[test]
    fn small_r0_rejected() {
        let e = ExponentSet {
            r0: 4.0,
            ..ExponentSet::default()
        };
        assert!(toy_schedule(&e, 2).is_err());
    }
}
