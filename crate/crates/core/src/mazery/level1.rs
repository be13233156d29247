//! Scale-up from the base level. Base traps are closed points, so the events
//! behind correlated traps and emerging barriers only see the color set of the
//! short `Y` window; their conditional probabilities are exact sums over color
//! sets. The tables built here are also the dependency model of level 2.

use std::collections::HashMap;

use super::colorset::{
    all_dists, family_at, hit_table, mask_of, sup_and_initial, window_masks, MAX_SET_COLORS,
};
use super::estimate::{EstimatorMode, Verdict, WalkWindow};
use super::geom::{Dir, Rect};
use super::scale::{pooled_verdicts, Badness};
use super::traps::{Trap, TrapKind};
use super::{Estimator, Mazery, MazeryParams};
use crate::error::{invalid, Result};

/// Tables for one sequence playing the fixed role.
#[derive(Clone, Debug)]
pub(crate) struct SideTables {
    /// `fam[j][a]`: color sets hitting every sub-window of `[a, a + 4 lambda_j]`.
    pub fam: [Vec<u64>; 2],
    pub badness: [Badness; 2],
    /// `cs[i]`: color set of `seq[i ..= i + 5 Delta]`.
    pub cs: Vec<u64>,
}

/// The base level's rules, reusable on sampled sequences.
#[derive(Clone, Debug)]
pub(crate) struct BaseWorld {
    pub m: u32,
    pub p: MazeryParams,
    /// Color-set distributions of a `5 Delta + 1` window, conditions `1..=m` then initial.
    pub dists: Vec<Vec<f64>>,
    pub hits: Vec<u64>,
    pub full: u64,
    /// Indexed by `Dir::idx()`: x for vertical, y for horizontal.
    pub sides: [SideTables; 2],
}

pub(crate) fn jlen(p: &MazeryParams) -> usize {
    5 * p.delta as usize + 1
}

impl BaseWorld {
    /// Verdict of `sup_s P <= w^2` and of the initial-condition probability.
    pub fn family_verdict(&self, fam: u64) -> (Verdict, Verdict) {
        let (sup, init) = sup_and_initial(&self.dists, fam);
        let t = self.p.w * self.p.w;
        let v = |p: f64| if p > t { Verdict::High } else { Verdict::Low };
        (v(sup), v(init))
    }

    /// Families of every position of `seq` for type `j` (0-based).
    pub fn families(&self, seq: &[u32], j: usize) -> Vec<u64> {
        families(seq, self.p.lambda[j] as usize, &self.hits, self.full)
    }
}

fn families(seq: &[u32], lam: usize, hits: &[u64], full: u64) -> Vec<u64> {
    let masks = window_masks(seq, lam);
    let n = seq.len();
    if n < 4 * lam + 1 {
        return Vec::new();
    }
    (0..=n - 1 - 4 * lam)
        .map(|a| family_at(&masks, hits, full, a, lam))
        .collect()
}

pub(crate) fn colorsets(seq: &[u32], len: usize) -> Vec<u64> {
    if seq.len() < len {
        return Vec::new();
    }
    (0..=seq.len() - len)
        .map(|i| mask_of(&seq[i..i + len]))
        .collect()
}

/// Verdicts by pooled Monte Carlo: one sampled window serves every position.
fn pooled_family_verdicts(
    fam: &[u64],
    win: WalkWindow,
    threshold: f64,
    est: &Estimator,
    tag: u64,
) -> (Vec<Verdict>, Vec<Verdict>) {
    pooled_verdicts(
        fam.len(),
        win,
        threshold,
        est,
        tag,
        &mut |w, _, pending, out| {
            let s = mask_of(w);
            out.extend(pending.iter().map(|&a| fam[a] >> s & 1 == 1));
        },
    )
}

impl SideTables {
    #[allow(clippy::too_many_arguments)]
    fn build(
        seq: &[u32],
        p: &MazeryParams,
        win: WalkWindow,
        hits: &[u64],
        full: u64,
        dists: &[Vec<f64>],
        est: &Estimator,
        tag: u64,
    ) -> Self {
        let t = p.w * p.w;
        let mut fam: [Vec<u64>; 2] = Default::default();
        let mut badness: [Badness; 2] = Default::default();
        for j in 0..2 {
            fam[j] = families(seq, p.lambda[j] as usize, hits, full);
            let (verdict, init) = match est.mode {
                EstimatorMode::Exact => fam[j]
                    .iter()
                    .map(|&f| {
                        let (sup, init) = sup_and_initial(dists, f);
                        let v = |p: f64| if p > t { Verdict::High } else { Verdict::Low };
                        (v(sup), v(init))
                    })
                    .unzip(),
                EstimatorMode::MonteCarlo => {
                    pooled_family_verdicts(&fam[j], win, t, est, tag ^ (j as u64) << 4)
                }
            };
            badness[j] = Badness {
                l: p.big_l[j],
                verdict,
                init,
            };
        }
        SideTables {
            fam,
            badness,
            cs: colorsets(seq, jlen(p)),
        }
    }
}

pub(crate) fn build_world(m: &Mazery, est: &Estimator) -> Result<BaseWorld> {
    let mm = m.seqs.m;
    if mm > MAX_SET_COLORS {
        return invalid(format!(
            "toy scale-up supports m <= {MAX_SET_COLORS}, got {mm}"
        ));
    }
    let p = m.params.clone();
    let dists = all_dists(mm, m.seqs.loops, jlen(&p))?;
    let hits = hit_table(mm);
    let full = if mm == 6 {
        u64::MAX
    } else {
        (1u64 << (1u64 << mm)) - 1
    };
    let win = WalkWindow {
        m: mm,
        loops: m.seqs.loops,
        len: jlen(&p),
    };
    let sides = [
        SideTables::build(&m.seqs.x, &p, win, &hits, full, &dists, est, 0x11),
        SideTables::build(&m.seqs.y, &p, win, &hits, full, &dists, est, 0x12),
    ];
    Ok(BaseWorld {
        m: mm,
        p,
        dists,
        hits,
        full,
        sides,
    })
}

/// Correlated traps realized on the window: event on the data plus a low verdict.
pub(crate) fn correlated_traps(world: &BaseWorld, budget: usize) -> Result<Vec<Trap>> {
    let p = &world.p;
    let jl = jlen(p) as i64 - 1;
    let mut out = Vec::new();
    for d in Dir::BOTH {
        let along = &world.sides[d.idx()];
        let across = &world.sides[1 - d.idx()];
        for j in 0..2 {
            let l = p.big_l[j];
            let kind = if j == 0 {
                TrapKind::Correlated1
            } else {
                TrapKind::Correlated2
            };
            let bad = &along.badness[j];
            for (a, &fam) in along.fam[j].iter().enumerate() {
                let (sup_ok, init_ok) =
                    (bad.verdict[a] == Verdict::Low, bad.init[a] == Verdict::Low);
                if !sup_ok && !init_ok {
                    continue;
                }
                for (b, &s) in across.cs.iter().enumerate() {
                    let ok = if b == 0 { init_ok } else { sup_ok };
                    if ok && fam >> s & 1 == 1 {
                        let r = Rect::new(a as i64, a as i64 + l, b as i64, b as i64 + jl);
                        out.push(Trap {
                            rect: if d == Dir::Vertical { r } else { r.transpose() },
                            kind,
                        });
                        if out.len() > budget {
                            return invalid(format!(
                                "more than {budget} correlated traps; use a smaller window or a smaller w"
                            ));
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Memo of `(verdict, initial verdict)` per family, for sampled sequences.
#[derive(Default)]
pub(crate) struct FamilyMemo {
    map: HashMap<u64, (Verdict, Verdict)>,
}

impl FamilyMemo {
    pub fn get(&mut self, world: &BaseWorld, fam: u64) -> (Verdict, Verdict) {
        *self
            .map
            .entry(fam)
            .or_insert_with(|| world.family_verdict(fam))
    }
}
