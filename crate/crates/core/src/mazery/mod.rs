//! Desk-scale mazeries: traps, barriers and walls, cleanness, holes, and the
//! scale-up `M -> M*`, with checkers for the combinatorial conditions.
//!
//! Coordinates are 0-based sequence indices; a window is `[0, n)` in both
//! directions and starts at the true beginning of both walks, so only the
//! right/top edge is artificial. Objects that would need values past the edge
//! are not created, and checks ignore the last `margin` positions.

pub mod clean;
pub mod colorset;
pub mod conditions;
pub mod dump;
pub mod estimate;
pub mod geom;
mod holes;
mod level1;
mod level2;
mod scale;
pub mod toy;
pub mod traps;
pub mod walls;

use std::sync::Arc;

pub use clean::{CleanLayer, CleannessRelations, Corner, End};
pub use colorset::Condition;
pub use conditions::{
    check_conditions, check_conditions_with, probability_diagnostics, ConditionCheck,
    ConditionReport, DiagVerdict, Diagnostic, DiagnosticsReport,
};
pub use dump::{check_dump, dump, parse_dump};
pub use estimate::{
    estimate_cond_prob, CondProbEstimate, Estimator, EstimatorMode, Verdict, WalkWindow,
};
pub use geom::{minslope, Dir, Interval, Rect};
pub use holes::{find_hole, Hole};
pub use scale::{
    derive_compound, derive_emerging, detect_correlated, detect_missing_hole, detect_uncorrelated,
    detect_uncorrelated_in, scale_cleanness, scale_up, Emerging, ObjectSet,
};
pub use traps::{Seqs, Trap, TrapKind, TrapLayer, TrapStore};
pub use walls::{BarrierGroup, BarrierSet, WallKind, WallList, WallStatus, WallValue};

use crate::error::{invalid, Result};
use crate::params::{distance_table, ExponentSet, LevelParams};
use crate::rng::ColorSequence;

/// Integer view of one level's parameters, as the constructions use them.
#[derive(Clone, Debug, PartialEq)]
pub struct MazeryParams {
    pub level: u32,
    /// Size bound of walls and traps.
    pub delta: i64,
    pub f: f64,
    pub g: f64,
    /// `lambda_1 = 7 Delta`, `lambda_2 = ceil(2.2 g)`.
    pub lambda: [i64; 2],
    /// `L_1 = 4 lambda_1`, `L_2 = 4 lambda_2`, `L_3 = g`.
    pub big_l: [i64; 3],
    pub w: f64,
    pub sigma: f64,
    pub q: f64,
    /// Rank lower bound `R`.
    pub r: f64,
    /// Rank upper bound `taubar R`.
    pub rank_cap: f64,
    /// Light/heavy threshold, the next level's `R`.
    pub r_star: f64,
    /// Rank of emerging barriers created from this level.
    pub r_hat: f64,
    pub delta_star: i64,
    /// Base of the logarithm in the compound rank window.
    pub log_base: f64,
    /// Distance classes `d_0 < d_1 < ...`, extended past `f`.
    pub d: Vec<u64>,
    /// Exponents the level was derived from (for the bound functions).
    pub exps: ExponentSet,
}

fn ceil_int(v: f64) -> i64 {
    (v - 1e-9).ceil() as i64
}

impl MazeryParams {
    pub fn from_level(lp: &LevelParams, exps: &ExponentSet) -> Result<Self> {
        if !lp.delta.is_finite() || lp.delta < 1.0 || lp.delta_star > 1e9 {
            return Err(crate::LabError::Range {
                level: lp.level,
                what: "mazeries are desk-scale only (1 <= Delta, Delta* <= 1e9)".into(),
            });
        }
        if !(lp.w > 0.0 && lp.w <= 1.0) {
            return invalid(format!("w = {} outside (0, 1]", lp.w));
        }
        let delta = (lp.delta + 1e-9).floor() as i64;
        let lambda = [ceil_int(lp.lambda1), ceil_int(lp.lambda2)];
        let mut len = 2;
        let d = loop {
            let t = distance_table(exps, len)?;
            if *t.last().unwrap() as f64 > lp.f || len >= 128 {
                break t;
            }
            len += 1;
        };
        Ok(MazeryParams {
            level: lp.level,
            delta,
            f: lp.f,
            g: lp.g,
            lambda,
            big_l: [4 * lambda[0], 4 * lambda[1], ceil_int(lp.g)],
            w: lp.w,
            sigma: lp.sigma,
            q: lp.q,
            r: lp.r,
            rank_cap: exps.tau_bar() * lp.r,
            r_star: lp.r_star,
            r_hat: lp.r_hat,
            delta_star: (lp.delta_star + 1e-9).floor() as i64,
            log_base: exps.lambda,
            d,
            exps: exps.clone(),
        })
    }

    /// `floor(f)` as a distance cap.
    pub fn f_int(&self) -> i64 {
        (self.f + 1e-9).floor() as i64
    }

    pub fn g_int(&self) -> i64 {
        ceil_int(self.g)
    }

    /// Distance class `i` with `d_i <= d < d_{i+1}`.
    pub fn class_of(&self, d: i64) -> u32 {
        crate::params::distance_class(&self.d, d as u64) as u32
    }
}

/// How the objects of a level depend on the sequences, for re-deriving them on
/// sampled sequences inside the conditional-probability estimates.
#[derive(Clone, Debug)]
pub(crate) enum Model {
    Base,
    FromBase(Arc<level1::BaseWorld>),
    /// Hand-built or level 3: no sampling model.
    Opaque,
}

/// A mazery on the window `[0, n)^2`.
#[derive(Clone, Debug)]
pub struct Mazery {
    pub params: MazeryParams,
    pub seqs: Arc<Seqs>,
    pub n: usize,
    pub traps: Arc<TrapStore>,
    pub walls: [Arc<WallList>; 2],
    pub barriers: [Arc<BarrierSet>; 2],
    pub cleanness: CleannessRelations,
    /// Positions `> n - 1 - margin` are boundary-indeterminate.
    pub margin: i64,
    /// Warnings and erasure records from the construction.
    pub log: Vec<String>,
    pub(crate) model: Model,
}

impl Mazery {
    pub fn level(&self) -> u32 {
        self.params.level
    }

    /// Largest coordinate whose verdicts do not depend on the window edge.
    pub fn core_hi(&self) -> i64 {
        self.n as i64 - 1 - self.margin
    }

    pub fn walls(&self, d: Dir) -> &WallList {
        &self.walls[d.idx()]
    }

    pub fn barriers(&self, d: Dir) -> &BarrierSet {
        &self.barriers[d.idx()]
    }

    /// The sequence walls of direction `d` are functions of.
    pub fn seq(&self, d: Dir) -> &[u32] {
        match d {
            Dir::Vertical => &self.seqs.x,
            Dir::Horizontal => &self.seqs.y,
        }
    }

    /// Assemble a mazery from explicit parts (fixtures, parsed dumps). It has no
    /// sampling model, so it cannot be scaled up.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: MazeryParams,
        seqs: Seqs,
        traps: TrapStore,
        walls: [Vec<WallValue>; 2],
        barriers: [BarrierSet; 2],
        cleanness: CleannessRelations,
        margin: i64,
    ) -> Result<Self> {
        let n = seqs.x.len();
        if seqs.y.len() != n {
            return invalid("mazery windows are square");
        }
        let [wv, wh] = walls;
        let [bv, bh] = barriers;
        Ok(Mazery {
            params,
            seqs: Arc::new(seqs),
            n,
            traps: Arc::new(traps),
            walls: [
                Arc::new(WallList::new(Dir::Vertical, wv)),
                Arc::new(WallList::new(Dir::Horizontal, wh)),
            ],
            barriers: [Arc::new(bv), Arc::new(bh)],
            cleanness,
            margin,
            log: Vec::new(),
            model: Model::Opaque,
        })
    }

    /// Every barrier as a value (walls carry status `Wall`).
    pub fn wall_values(&self, d: Dir) -> Vec<WallValue> {
        let walls = self.walls(d);
        self.barriers(d)
            .iter()
            .map(|mut b| {
                if walls
                    .with_left_in(b.body.a, b.body.a)
                    .iter()
                    .any(|w| w.body == b.body && w.rank == b.rank)
                {
                    b.status = WallStatus::Wall;
                }
                b
            })
            .collect()
    }
}

/// Level-1 parameters for a base mazery with the given `w` and toy defaults otherwise.
pub fn base_params(w: f64) -> Result<MazeryParams> {
    let sched = toy::toy_schedule(&toy::toy_exponents(), 1)?;
    let mut p = MazeryParams::from_level(&sched[0], &toy::toy_exponents())?;
    p.w = w;
    Ok(p)
}

/// The base mazery: traps are the closed points, no walls, everything clean.
pub fn base_mazery(x: &ColorSequence, y: &ColorSequence, window: usize, w: f64) -> Result<Mazery> {
    base_mazery_with(x, y, window, base_params(w)?)
}

pub fn base_mazery_with(
    x: &ColorSequence,
    y: &ColorSequence,
    window: usize,
    params: MazeryParams,
) -> Result<Mazery> {
    if x.m != y.m || x.loops != y.loops {
        return invalid("both sequences must come from the same walk model");
    }
    let m = x.m;
    let w = params.w;
    if m < 3 || !(w > 1.0 / (m as f64 - 1.0) && w < 1.0) {
        return invalid(format!(
            "base mazery needs 1/(m-1) < w < 1, got w = {w}, m = {m}"
        ));
    }
    if window == 0 || window > x.len() || window > y.len() {
        return invalid(format!(
            "window {window} outside the sequences ({}, {})",
            x.len(),
            y.len()
        ));
    }
    if params.delta != 1 || params.sigma != 0.0 {
        return invalid("base level has Delta = 1 and sigma = 0");
    }
    let seqs = Seqs::new(
        m,
        x.loops,
        x.values[..window].to_vec(),
        y.values[..window].to_vec(),
    );
    Ok(Mazery {
        params,
        seqs: Arc::new(seqs),
        n: window,
        traps: Arc::new(TrapStore::closed_points()),
        walls: [
            Arc::new(WallList::new(Dir::Vertical, vec![])),
            Arc::new(WallList::new(Dir::Horizontal, vec![])),
        ],
        barriers: [
            Arc::new(BarrierSet::new(Dir::Vertical)),
            Arc::new(BarrierSet::new(Dir::Horizontal)),
        ],
        cleanness: CleannessRelations::base(),
        margin: 0,
        log: Vec::new(),
        model: Model::Base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_traps_are_equal_colors() {
        let x = ColorSequence::from_values(3, false, vec![1, 2]).unwrap();
        let y = ColorSequence::from_values(3, false, vec![2, 1]).unwrap();
        let m = base_mazery(&x, &y, 2, 0.9).unwrap();
        let traps = m
            .traps
            .collect_in(&m.seqs, Rect::new(0, 1, 0, 1), 100)
            .unwrap();
        let pts: Vec<Rect> = traps.iter().map(|t| t.rect).collect();
        assert_eq!(pts, vec![Rect::point(0, 1), Rect::point(1, 0)]);
        assert!(base_mazery(&x, &y, 2, 0.4).is_err());
        assert!(base_mazery(&x, &y, 3, 0.9).is_err());
    }

    #[test]
    fn disjoint_colors_no_traps() {
        let x = ColorSequence::from_values(4, false, vec![1, 2, 1, 2]).unwrap();
        let y = ColorSequence::from_values(4, false, vec![3, 4, 3, 4]).unwrap();
        let m = base_mazery(&x, &y, 4, 0.9).unwrap();
        assert!(m
            .traps
            .collect_in(&m.seqs, Rect::new(0, 3, 0, 3), 100)
            .unwrap()
            .is_empty());
    }
}
