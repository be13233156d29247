//! The scale-up `M -> M*`: new traps, emerging and compound barriers and walls,
//! the removal of light objects, and one more cleanness layer.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::clean::{CleanLayer, CleannessRelations};
use super::colorset::Condition;
use super::estimate::{sample_window, SeqTest, Verdict, WalkWindow};
use super::geom::{Dir, Interval, Rect};
use super::level1::{self, BaseWorld};
use super::level2;
use super::traps::{Trap, TrapLayer, TrapStore};
use super::walls::{BarrierGroup, BarrierSet, WallKind, WallList, WallStatus, WallValue};
use super::{Estimator, Mazery, MazeryParams, Model};
use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Largest number of explicitly listed traps a scale-up may produce.
pub(crate) const OBJECT_BUDGET: usize = 1 << 23;

/// Independent stream for one estimation task.
pub(crate) fn stream_for(seed: u64, tag: u64) -> RngStream {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    RngStream::new(z ^ (z >> 31), tag)
}

/// Verdicts of the `> w^2` comparison for the intervals `[a, a + l]`, one per `a`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Badness {
    pub l: i64,
    /// Supremum over the value before the window.
    pub verdict: Vec<Verdict>,
    /// The window starts the walk.
    pub init: Vec<Verdict>,
}

/// Verdicts of `P(event at a) > threshold` for every position `a`: the supremum
/// over the value before the window, and the walk-start case. One sampled
/// window serves all positions still undecided; `hits(window, initial,
/// pending, out)` fills `out[k]` for position `pending[k]`.
pub(crate) fn pooled_verdicts(
    npos: usize,
    win: WalkWindow,
    threshold: f64,
    est: &Estimator,
    tag: u64,
    hits: &mut dyn FnMut(&[u32], bool, &[usize], &mut Vec<bool>),
) -> (Vec<Verdict>, Vec<Verdict>) {
    let mut conds: Vec<Condition> = (1..=win.m).map(Condition::Previous).collect();
    conds.push(Condition::Initial);
    let mut sup = vec![Verdict::Low; npos];
    let mut init = vec![Verdict::Low; npos];
    let (mut buf, mut out) = (Vec::new(), Vec::new());
    for (ci, &cond) in conds.iter().enumerate() {
        let initial = cond == Condition::Initial;
        let mut pending: Vec<usize> = (0..npos).filter(|&a| initial || !sup[a].high()).collect();
        let mut tests = vec![SeqTest::default(); npos];
        let mut stream = stream_for(est.seed, tag ^ (ci as u64) << 8);
        let mut i = 0;
        while !pending.is_empty() {
            sample_window(win, cond, &mut stream, &mut buf);
            out.clear();
            hits(&buf, initial, &pending, &mut out);
            i += 1;
            for (&a, &h) in pending.iter().zip(&out) {
                tests[a].record(h);
            }
            if i % 8 == 0 || i >= est.samples {
                pending.retain(|&a| match tests[a].decide(threshold, est.samples) {
                    None => true,
                    Some(v) => {
                        let slot = if initial { &mut init[a] } else { &mut sup[a] };
                        if v.high() || *slot == Verdict::Low {
                            *slot = v;
                        }
                        false
                    }
                });
            }
        }
    }
    (sup, init)
}

/// Everything the scale-up needs from the probability side.
pub(crate) struct Evaluation {
    /// `[direction][type]`; `None` when the event cannot occur.
    pub bad: [[Option<Badness>; 3]; 2],
    pub correlated: Vec<Trap>,
    pub missing: Vec<Trap>,
    pub world: Option<Arc<BaseWorld>>,
    pub warnings: Vec<String>,
}

fn count_undecided(b: &Badness) -> usize {
    b.verdict
        .iter()
        .chain(&b.init)
        .filter(|v| !v.decided())
        .count()
}

pub(crate) fn evaluate(m: &Mazery, est: &Estimator) -> Result<Evaluation> {
    let mut ev = match &m.model {
        Model::Base => {
            let world = Arc::new(level1::build_world(m, est)?);
            let correlated = level1::correlated_traps(&world, OBJECT_BUDGET)?;
            let mut bad: [[Option<Badness>; 3]; 2] = Default::default();
            for d in Dir::BOTH {
                for j in 0..2 {
                    bad[d.idx()][j] = Some(world.sides[d.idx()].badness[j].clone());
                }
            }
            Evaluation { bad, correlated, missing: Vec::new(), world: Some(world), warnings: Vec::new() }
        }
        Model::FromBase(world) => level2::evaluate(m, world, est)?,
        Model::Opaque => {
            return invalid(format!(
                "level-{} mazery has no sampling model (hand-built, parsed, or above level 2); it cannot be scaled up",
                m.level()
            ))
        }
    };
    let undecided: usize = ev.bad.iter().flatten().flatten().map(count_undecided).sum();
    if undecided > 0 {
        ev.warnings.push(format!(
            "{undecided} conditional-probability verdicts undecided at the sample cap; \
             their barriers are kept without wall designation and no traps are created from them"
        ));
    }
    Ok(ev)
}

/// Uncorrelated traps of `M*` over the whole window.
pub fn detect_uncorrelated(m: &Mazery) -> Result<Vec<Trap>> {
    let hi = m.n as i64 - 1;
    detect_uncorrelated_in(m, Rect::new(0, hi, 0, hi))
}

/// Uncorrelated traps of `M*` contained in `region`.
pub fn detect_uncorrelated_in(m: &Mazery, region: Rect) -> Result<Vec<Trap>> {
    let store = TrapStore {
        layers: vec![TrapLayer::Uncorrelated {
            base: m.traps.clone(),
            f: m.params.f_int(),
        }],
    };
    store
        .collect_in(&m.seqs, region, OBJECT_BUDGET)
        .ok_or_else(|| {
            crate::LabError::InvalidParameter(format!(
                "more than {OBJECT_BUDGET} uncorrelated traps in {region}; query a smaller region"
            ))
        })
}

pub fn detect_correlated(m: &Mazery, est: &Estimator) -> Result<Vec<Trap>> {
    Ok(evaluate(m, est)?.correlated)
}

pub fn detect_missing_hole(m: &Mazery, est: &Estimator) -> Result<Vec<Trap>> {
    Ok(evaluate(m, est)?.missing)
}

/// Emerging barriers and the walls designated among them.
#[derive(Clone, Debug)]
pub struct Emerging {
    pub barriers: [BarrierSet; 2],
    pub walls: [Vec<WallValue>; 2],
    /// Barriers coming only from undecided estimates (never designated).
    pub undecided: u64,
}

/// Barriers and walls of one construction step.
#[derive(Clone, Debug)]
pub struct ObjectSet {
    pub barriers: [BarrierSet; 2],
    pub walls: [Vec<WallValue>; 2],
}

/// Interval predicates of `M` along one direction.
pub(crate) struct Line<'a> {
    pub m: &'a Mazery,
    pub d: Dir,
}

impl Line<'_> {
    fn walls(&self) -> &WallList {
        self.m.walls(self.d)
    }

    /// `(p, q]` intersects no wall.
    pub fn external(&self, p: i64, q: i64) -> bool {
        q <= p || self.walls().intersecting(p, q).next().is_none()
    }

    pub fn contains_wall(&self, p: i64, q: i64) -> bool {
        self.walls()
            .with_left_in(p, q - 1)
            .iter()
            .any(|w| w.body.b <= q)
    }

    /// Inner clean and containing no wall; empty intervals are hops.
    pub fn hop(&self, p: i64, q: i64) -> bool {
        q <= p || (!self.contains_wall(p, q) && self.m.cleanness.inner_clean(self.d, p, q))
    }

    pub fn external_hop(&self, p: i64, q: i64) -> bool {
        q <= p || (self.external(p, q) && self.m.cleanness.inner_clean(self.d, p, q))
    }

    fn scan(&self) -> i64 {
        self.m.cleanness.reach() + 1
    }

    /// Some external hop `(p, u]` of size `>= Delta` ends at `u`.
    pub fn external_hop_left(&self, u: i64) -> bool {
        let top = u - self.m.params.delta;
        if top < -1 {
            return false;
        }
        let cl = &self.m.cleanness;
        for p in ((top - self.scan()).max(-1)..=top).rev() {
            if !self.external(p, u) || !cl.clean_right(self.d, p, u, false) {
                return false;
            }
            if cl.clean_left(self.d, p, u, false) {
                return true;
            }
        }
        false
    }

    /// Some external hop `(v, q]` of size `>= Delta` starts at `v`.
    pub fn external_hop_right(&self, v: i64) -> bool {
        let bottom = v + self.m.params.delta;
        let last = self.m.n as i64 - 1;
        if bottom > last {
            return false;
        }
        let cl = &self.m.cleanness;
        for q in bottom..=(bottom + self.scan()).min(last) {
            if !self.external(v, q) || !cl.clean_left(self.d, v, q, false) {
                return false;
            }
            if cl.clean_right(self.d, v, q, false) {
                return true;
            }
        }
        false
    }

    /// Surrounded by external intervals of size `>= Delta` (or reaching `-1` on the left).
    pub fn dominant(&self, w: &WallValue) -> bool {
        let delta = self.m.params.delta;
        let right = w.body.b + delta;
        right <= self.m.n as i64 - 1
            && self.external((w.body.a - delta).max(-1), w.body.a)
            && self.external(w.body.b, right)
    }

    fn adjacent_left(&self, u: i64) -> bool {
        let ms = self.walls().max_size();
        self.walls().any_with(u - ms, u - 1, u, u) || self.external_hop_left(u)
    }

    fn adjacent_right(&self, v: i64) -> bool {
        !self.walls().with_left_in(v, v).is_empty() || self.external_hop_right(v)
    }

    /// Conditions (a) and (b) of an emerging pre-wall with body `(u, v]`.
    pub fn pre_wall(&self, u: i64, v: i64) -> bool {
        let mut inter = self.walls().intersecting(u, v);
        let first = inter.next();
        let inner = match (first, inter.next()) {
            (None, _) => self.m.cleanness.inner_clean(self.d, u, v),
            (Some(w), None) => {
                let delta = self.m.params.delta;
                let (left, right) = (w.body.a - u, v - w.body.b);
                let side = |p: i64, q: i64| q == p || (q - p >= delta && self.external_hop(p, q));
                left >= 0
                    && right >= 0
                    && left + right > 0
                    && w.rank < self.m.params.r_star
                    && self.dominant(w)
                    && side(u, w.body.a)
                    && side(w.body.b, v)
            }
            _ => false,
        };
        inner && self.adjacent_left(u) && self.adjacent_right(v)
    }
}

/// Barrier groups of type `j` (0-based) from the verdicts kept by `keep`.
fn emerging_groups(
    bad: &Badness,
    j: usize,
    n: i64,
    delta: i64,
    rank: f64,
    keep: fn(Verdict) -> bool,
) -> Vec<BarrierGroup> {
    let mut slots: Vec<Option<BarrierGroup>> = vec![None; n as usize + 1];
    let kind = WallKind::Emerging(j as u8 + 1);
    for (a, &v) in bad.verdict.iter().enumerate() {
        if !keep(v) {
            continue;
        }
        let a = a as i64;
        let (lo, hi) = (a + bad.l, (a + bad.l + 2 * delta - 1).min(n - 1));
        if lo > hi {
            continue;
        }
        for u in (a - 2 * delta).max(-1)..a {
            slots[(u + 1) as usize]
                .get_or_insert_with(|| BarrierGroup::new(u, rank, kind))
                .insert_range(lo, hi);
        }
    }
    slots.into_iter().flatten().collect()
}

/// Greedy designation: types 1, 3, 2, each in window order.
fn designate(line: &Line, by_type: &[Vec<BarrierGroup>; 3]) -> Vec<WallValue> {
    let mut taken: BTreeMap<i64, i64> = BTreeMap::new();
    let mut out = Vec::new();
    for j in [0, 2, 1] {
        for g in &by_type[j] {
            for v in g.ends() {
                if taken.range(..v).next_back().is_some_and(|(_, &b)| b > g.a) {
                    break;
                }
                if line.pre_wall(g.a, v) {
                    taken.insert(g.a, v);
                    out.push(WallValue {
                        body: Interval { a: g.a, b: v },
                        rank: g.rank,
                        dir: line.d,
                        status: WallStatus::Wall,
                        kind: g.kind,
                    });
                    break;
                }
            }
        }
    }
    out
}

pub(crate) fn emerging_from(m: &Mazery, ev: &Evaluation) -> Emerging {
    let p = &m.params;
    let n = m.n as i64;
    let mut barriers: [BarrierSet; 2] = [
        BarrierSet::new(Dir::Vertical),
        BarrierSet::new(Dir::Horizontal),
    ];
    let mut walls: [Vec<WallValue>; 2] = Default::default();
    let mut undecided = 0;
    for d in Dir::BOTH {
        let mut all = Vec::new();
        let mut decided: [Vec<BarrierGroup>; 3] = Default::default();
        for j in 0..3 {
            let Some(bad) = &ev.bad[d.idx()][j] else {
                continue;
            };
            let groups = emerging_groups(bad, j, n, p.delta, p.r_hat, Verdict::high);
            if bad.verdict.iter().any(|v| *v == Verdict::UndecidedHigh) {
                decided[j] = emerging_groups(bad, j, n, p.delta, p.r_hat, |v| v == Verdict::High);
                let kept: u64 = decided[j].iter().map(|g| g.count()).sum();
                undecided += groups.iter().map(|g| g.count()).sum::<u64>() - kept;
            } else {
                decided[j] = groups.clone();
            }
            all.extend(groups);
        }
        walls[d.idx()] = designate(&Line { m, d }, &decided);
        barriers[d.idx()] = BarrierSet::from_groups(d, all);
    }
    Emerging {
        barriers,
        walls,
        undecided,
    }
}

pub fn derive_emerging(m: &Mazery, est: &Estimator) -> Result<Emerging> {
    Ok(emerging_from(m, &evaluate(m, est)?))
}

/// `(i, lo, hi)`: distances `lo..=hi` (capped at `f`) belong to class `i`.
fn classes(p: &MazeryParams) -> Vec<(u32, i64, i64)> {
    let f = p.f_int();
    p.d.windows(2)
        .enumerate()
        .take_while(|(_, w)| w[0] as i64 <= f)
        .map(|(i, w)| (i as u32, w[0] as i64, (w[1] as i64 - 1).min(f)))
        .collect()
}

/// Range-OR over the right ends of barrier groups, indexed by left end.
struct EndTable {
    first: i64,
    /// `levels[k][x - first]`: ends of the groups with left end in `[x, x + 2^k)`,
    /// bit `j` standing for the end `x + 1 + j`.
    levels: Vec<Vec<Vec<u64>>>,
}

impl EndTable {
    fn new<'a>(groups: impl Iterator<Item = &'a BarrierGroup>) -> Option<Self> {
        let groups: Vec<&BarrierGroup> = groups.collect();
        let first = groups.iter().map(|g| g.a).min()?;
        let last = groups.iter().map(|g| g.a).max()?;
        let len = (last - first + 1) as usize;
        let mut base = vec![Vec::new(); len];
        for g in groups {
            crate::bits::or_shifted(&mut base[(g.a - first) as usize], &g.ends, 0);
        }
        let mut levels = vec![base];
        let mut h = 1;
        while 2 * h <= len {
            let prev = levels.last().unwrap();
            let next = (0..=len - 2 * h)
                .map(|x| {
                    let mut v = prev[x].clone();
                    crate::bits::or_shifted(&mut v, &prev[x + h], h);
                    v
                })
                .collect();
            levels.push(next);
            h *= 2;
        }
        Some(EndTable { first, levels })
    }

    /// OR into `g` the ends of every group with left end in `[lo, hi]`.
    fn or_range(&self, g: &mut BarrierGroup, lo: i64, hi: i64) {
        let lo = lo.max(self.first);
        let hi = hi.min(self.first + self.levels[0].len() as i64 - 1);
        if lo > hi {
            return;
        }
        let k = 63 - ((hi - lo + 1) as u64).leading_zeros() as usize;
        for x in [lo, hi - (1 << k) + 1] {
            g.or_bits(x + 1, &self.levels[k][(x - self.first) as usize]);
        }
    }
}

/// Maximal runs `[lo, hi]` of consecutive right ends.
fn end_runs(g: &BarrierGroup, out: &mut Vec<(i64, i64)>) {
    out.clear();
    for b in g.ends() {
        match out.last_mut() {
            Some((_, hi)) if *hi + 1 == b => *hi = b,
            _ => out.push((b, b)),
        }
    }
}

/// Compound barriers `W1 + W2` for `W1` in `first`, `W2` in `second`: for each
/// distance class, the admissible left ends of `W2` are the runs of `W1`'s
/// right ends widened by the class range, and the products' right ends are
/// the union of the ends of `second` over those left ends.
fn compound_pass(
    first: &[BarrierGroup],
    second: &BarrierSet,
    cls: &[(u32, i64, i64)],
) -> Vec<BarrierGroup> {
    let mut ranks: Vec<f64> = second.groups().iter().map(|g| g.rank).collect();
    ranks.sort_by(f64::total_cmp);
    ranks.dedup_by(|p, q| p.to_bits() == q.to_bits());
    let tables: Vec<(f64, EndTable)> = ranks
        .into_iter()
        .filter_map(|r| {
            let groups = second
                .groups()
                .iter()
                .filter(move |g| g.rank.to_bits() == r.to_bits());
            EndTable::new(groups).map(|t| (r, t))
        })
        .collect();
    let mut out = Vec::new();
    let mut runs = Vec::new();
    for g1 in first {
        end_runs(g1, &mut runs);
        if runs.is_empty() {
            continue;
        }
        for (r2, table) in &tables {
            for &(i, dlo, dhi) in cls {
                let kind = WallKind::Compound {
                    r1: g1.rank,
                    r2: *r2,
                    i,
                };
                let mut g = BarrierGroup::new(g1.a, g1.rank + r2 - i as f64, kind);
                let mut cur: Option<(i64, i64)> = None;
                for &(rl, rh) in &runs {
                    let (x, y) = (rl + dlo, rh + dhi);
                    cur = match cur {
                        Some((cx, cy)) if x <= cy + 1 => Some((cx, cy.max(y))),
                        Some((cx, cy)) => {
                            table.or_range(&mut g, cx, cy);
                            Some((x, y))
                        }
                        None => Some((x, y)),
                    };
                }
                if let Some((cx, cy)) = cur {
                    table.or_range(&mut g, cx, cy);
                }
                if !g.is_empty() {
                    out.push(g);
                }
            }
        }
    }
    // products of different first groups may share a key; the set merges them
    BarrierSet::from_groups(second.dir, out).groups().to_vec()
}

fn compound_walls(line: &Line, first: &[WallValue], second: &WallList) -> Vec<WallValue> {
    let p = &line.m.params;
    let f = p.f_int();
    let mut out = Vec::new();
    for w1 in first {
        for w2 in second.with_left_in(w1.body.b, w1.body.b + f) {
            if line.hop(w1.body.b, w2.body.a) {
                let i = p.class_of(w2.body.a - w1.body.b);
                out.push(WallValue {
                    body: Interval {
                        a: w1.body.a,
                        b: w2.body.b,
                    },
                    rank: w1.rank + w2.rank - i as f64,
                    dir: line.d,
                    status: WallStatus::Wall,
                    kind: WallKind::Compound {
                        r1: w1.rank,
                        r2: w2.rank,
                        i,
                    },
                });
            }
        }
    }
    out
}

pub fn derive_compound(m: &Mazery, emerging: &Emerging) -> ObjectSet {
    let p = &m.params;
    let cls = classes(p);
    let mut barriers: [BarrierSet; 2] = [
        BarrierSet::new(Dir::Vertical),
        BarrierSet::new(Dir::Horizontal),
    ];
    let mut walls: [Vec<WallValue>; 2] = Default::default();
    for d in Dir::BOTH {
        let line = Line { m, d };
        let light: Vec<BarrierGroup> = m
            .barriers(d)
            .groups()
            .iter()
            .filter(|g| g.rank < p.r_star)
            .cloned()
            .collect();
        let light_set = BarrierSet::from_groups(d, light.clone());
        let mut any: Vec<BarrierGroup> = m.barriers(d).groups().to_vec();
        any.extend(emerging.barriers[d.idx()].groups().iter().cloned());
        let any_set = BarrierSet::from_groups(d, any);
        let first = compound_pass(&light, &any_set, &cls);
        let mut w1: Vec<BarrierGroup> = any_set.groups().to_vec();
        w1.extend(first.iter().cloned());
        let second = compound_pass(&w1, &light_set, &cls);
        let mut groups = first;
        groups.extend(second);
        barriers[d.idx()] = BarrierSet::from_groups(d, groups);

        let light_walls: Vec<WallValue> = m
            .walls(d)
            .as_slice()
            .iter()
            .filter(|w| w.rank < p.r_star)
            .copied()
            .collect();
        let light_list = WallList::new(d, light_walls.clone());
        let mut any_walls: Vec<WallValue> = m.walls(d).as_slice().to_vec();
        any_walls.extend(emerging.walls[d.idx()].iter().copied());
        let any_list = WallList::new(d, any_walls);
        let first = compound_walls(&line, &light_walls, &any_list);
        let mut w1 = any_list.as_slice().to_vec();
        w1.extend(first.iter().copied());
        let second = compound_walls(&line, &w1, &light_list);
        let mut all = first;
        all.extend(second);
        walls[d.idx()] = WallList::new(d, all).as_slice().to_vec();
    }
    ObjectSet { barriers, walls }
}

/// One more cleanness layer made of the objects of `M`.
pub fn scale_cleanness(m: &Mazery) -> CleannessRelations {
    m.cleanness.with_layer(CleanLayer {
        level: m.level(),
        delta: m.params.delta,
        f: m.params.f,
        g: m.params.g,
        walls: m.walls.clone(),
        barriers: m.barriers.clone(),
        traps: m.traps.clone(),
    })
}

fn check_next(m: &Mazery, next: &MazeryParams) -> Result<()> {
    let p = &m.params;
    if next.level != p.level + 1 {
        return invalid(format!(
            "next parameters are for level {}, expected {}",
            next.level,
            p.level + 1
        ));
    }
    if (next.r - p.r_star).abs() > 1e-9 * p.r_star.abs().max(1.0) {
        return invalid(format!(
            "next R = {} differs from the light threshold R* = {}",
            next.r, p.r_star
        ));
    }
    if next.delta != p.delta_star {
        return invalid(format!(
            "next Delta = {} differs from Delta* = {}",
            next.delta, p.delta_star
        ));
    }
    if 3.0 * p.f > next.delta as f64 + 1e-9 {
        return invalid(format!(
            "3f = {} exceeds Delta* = {}",
            3.0 * p.f,
            next.delta
        ));
    }
    Ok(())
}

pub fn scale_up(m: &Mazery, est: &Estimator, next: &MazeryParams) -> Result<Mazery> {
    check_next(m, next)?;
    let ev = evaluate(m, est)?;
    let emerging = emerging_from(m, &ev);
    let compound = derive_compound(m, &emerging);
    let p = &m.params;
    let mut log = ev.warnings.clone();
    let built = Dir::BOTH.map(|d| {
        let line = Line { m, d };
        let old = m.walls(d).as_slice();
        let dominant_light: Vec<&WallValue> = old
            .iter()
            .filter(|w| w.rank < p.r_star && line.dominant(w))
            .collect();
        let mut new_walls: Vec<WallValue> = Vec::new();
        for w in old.iter().filter(|w| w.rank >= p.r_star) {
            if let Some(l) = dominant_light.iter().find(|l| l.body.contains(&w.body)) {
                log.push(format!("erased {w}: inside dominant light wall {}", l.body));
                continue;
            }
            new_walls.push(WallValue {
                kind: WallKind::Inherited,
                ..*w
            });
        }
        new_walls.extend(emerging.walls[d.idx()].iter().copied());
        new_walls.extend(compound.walls[d.idx()].iter().copied());

        let mut groups: Vec<BarrierGroup> = m
            .barriers(d)
            .groups()
            .iter()
            .filter(|g| g.rank >= p.r_star)
            .map(|g| BarrierGroup {
                kind: WallKind::Inherited,
                ..g.clone()
            })
            .collect();
        groups.extend(emerging.barriers[d.idx()].groups().iter().cloned());
        groups.extend(compound.barriers[d.idx()].groups().iter().cloned());
        (
            Arc::new(WallList::new(d, new_walls)),
            Arc::new(BarrierSet::from_groups(d, groups)),
        )
    });
    let [(wv, bv), (wh, bh)] = built;
    let (walls, barriers) = ([wv, wh], [bv, bh]);
    if emerging.undecided > 0 {
        log.push(format!(
            "{} emerging barriers from undecided estimates left undesignated",
            emerging.undecided
        ));
    }
    let mut explicit = ev.correlated;
    explicit.extend(ev.missing);
    explicit.sort_unstable();
    explicit.dedup();
    let traps = TrapStore {
        layers: vec![
            TrapLayer::Uncorrelated {
                base: m.traps.clone(),
                f: p.f_int(),
            },
            TrapLayer::Explicit(explicit),
        ],
    };
    let model = match (&m.model, ev.world) {
        (Model::Base, Some(world)) => Model::FromBase(world),
        _ => Model::Opaque,
    };
    let mut out = Mazery {
        params: next.clone(),
        seqs: m.seqs.clone(),
        n: m.n,
        traps: Arc::new(traps),
        walls,
        barriers,
        cleanness: scale_cleanness(m),
        margin: m.margin + 2 * next.delta,
        log,
        model,
    };
    for c in super::conditions::object_checks(&out) {
        out.log
            .extend(c.examples.iter().map(|e| format!("violation: {e}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mazery::toy::{toy_exponents, toy_schedule};

    #[test]
    fn distance_classes_cover_zero_to_f() {
        let s = toy_schedule(&toy_exponents(), 2).unwrap();
        let p = MazeryParams::from_level(&s[1], &toy_exponents()).unwrap();
        let cls = classes(&p);
        let mut next = 0;
        for &(i, lo, hi) in &cls {
            assert_eq!(lo, next);
            for d in lo..=hi {
                assert_eq!(p.class_of(d), i);
            }
            next = hi + 1;
        }
        assert_eq!(next, p.f_int() + 1);
    }

    /// Per-pair reference: every `W1` end followed within a class range by a
    /// `W2` left end yields the product.
    fn compound_pairs(
        first: &[BarrierGroup],
        second: &BarrierSet,
        cls: &[(u32, i64, i64)],
    ) -> Vec<BarrierGroup> {
        let mut out = Vec::new();
        for g1 in first {
            for g2 in second.groups() {
                for &(i, dlo, dhi) in cls {
                    if g1.any_end_in(g2.a - dhi, g2.a - dlo) {
                        let kind = WallKind::Compound {
                            r1: g1.rank,
                            r2: g2.rank,
                            i,
                        };
                        let mut g = BarrierGroup::new(g1.a, g1.rank + g2.rank - i as f64, kind);
                        g.or_ends(g2);
                        out.push(g);
                    }
                }
            }
        }
        BarrierSet::from_groups(second.dir, out).groups().to_vec()
    }

    fn random_groups(s: &mut RngStream, n: usize) -> Vec<BarrierGroup> {
        (0..n)
            .map(|_| {
                let a = s.below(200) as i64;
                let rank = [5.0, 7.0, 9.5][s.below(3) as usize];
                let mut g = BarrierGroup::new(a, rank, WallKind::Inherited);
                for _ in 0..1 + s.below(4) {
                    let b = a + 1 + s.below(90) as i64;
                    g.insert_range(b, b + s.below(5) as i64);
                }
                g
            })
            .collect()
    }

    #[test]
    fn range_or_compound_matches_pairs() {
        let cls = [(0, 0, 0), (1, 1, 2), (2, 3, 9), (3, 10, 40)];
        let mut s = RngStream::new(11, 4);
        for _ in 0..60 {
            let n1 = s.below(12) as usize;
            let n2 = s.below(40) as usize;
            let first = random_groups(&mut s, n1);
            let second = BarrierSet::from_groups(Dir::Vertical, random_groups(&mut s, n2));
            let got = compound_pass(&first, &second, &cls);
            let want = compound_pairs(&first, &second, &cls);
            assert_eq!(got.len(), want.len());
            for (a, b) in got.iter().zip(&want) {
                assert_eq!((a.a, a.rank, a.kind), (b.a, b.rank, b.kind));
                assert_eq!(a.ends().collect::<Vec<_>>(), b.ends().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn compound_rank_from_distance_class() {
        // r1 = 10, r2 = 12 at distance 3: d_3 = 3 <= 3 < d_4 = 4, rank 19
        let mut g1 = BarrierGroup::new(0, 10.0, WallKind::Inherited);
        g1.insert(5);
        let mut g2 = BarrierGroup::new(8, 12.0, WallKind::Inherited);
        g2.insert(12);
        let s = toy_schedule(&toy_exponents(), 1).unwrap();
        let p = MazeryParams::from_level(&s[0], &toy_exponents()).unwrap();
        let out = compound_pass(
            &[g1.clone()],
            &BarrierSet::from_groups(Dir::Vertical, vec![g2.clone()]),
            &classes(&p),
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rank, 19.0);
        assert_eq!(
            out[0].kind,
            WallKind::Compound {
                r1: 10.0,
                r2: 12.0,
                i: 3
            }
        );
        assert_eq!(out[0].ends().collect::<Vec<_>>(), vec![12]);
        // adjacent: d = 0, rank r1 + r2
        let mut g3 = BarrierGroup::new(5, 12.0, WallKind::Inherited);
        g3.insert(9);
        let out = compound_pass(
            &[g1.clone()],
            &BarrierSet::from_groups(Dir::Vertical, vec![g3]),
            &classes(&p),
        );
        assert_eq!(out[0].rank, 22.0);
        // too far
        let mut g4 = BarrierGroup::new(10, 12.0, WallKind::Inherited);
        g4.insert(11);
        assert!(compound_pass(
            &[g1],
            &BarrierSet::from_groups(Dir::Vertical, vec![g4]),
            &classes(&p)
        )
        .is_empty());
    }
}
