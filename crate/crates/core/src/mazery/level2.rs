//! Scale-up from level 2. The traps of a level-2 mazery are pairs of closed
//! points and the correlated traps of level 1, and its walls are level-1
//! emerging walls, so every event behind a new trap or barrier is decided from
//! the colors of a strip `I x J` alone. Probabilities over the strip's
//! sequence are estimated by sampling it; one sample serves every position of
//! the fixed sequence.

use std::sync::Arc;

use super::estimate::{EstimatorMode, Verdict, WalkWindow};
use super::geom::{Dir, Rect};
use super::holes::{axes, crossing_ends, hole_good};
use super::level1::{colorsets, jlen, BaseWorld, FamilyMemo, SideTables};
use super::scale::{pooled_verdicts, Badness, Evaluation, OBJECT_BUDGET};
use super::traps::{Seqs, Trap, TrapKind};
use super::{Estimator, Mazery};
use crate::bits;
use crate::error::{invalid, Result};

const NONE: i64 = i64::MAX;

/// Level-1 tables of the sequence crossing a strip, in strip coordinates.
pub(crate) struct Strip<'a> {
    pub vals: &'a [u32],
    /// Color sets of the level-1 windows `[p, p + 5 Delta_1]`.
    pub cs: Vec<u64>,
    /// Level-1 families at `p` (window `[p, p + L_j]` inside the strip).
    pub fam: [Vec<u64>; 2],
    /// `(sup, initial)` verdicts of the families.
    pub ver: [Vec<(Verdict, Verdict)>; 2],
    /// The strip starts the walk.
    pub at_start: bool,
}

impl<'a> Strip<'a> {
    /// A sampled strip; family verdicts are exact.
    pub fn sampled(w: &BaseWorld, vals: &'a [u32], at_start: bool, memo: &mut FamilyMemo) -> Self {
        let fam = [w.families(vals, 0), w.families(vals, 1)];
        let ver = [0, 1].map(|j| fam[j].iter().map(|&f| memo.get(w, f)).collect());
        Strip {
            vals,
            cs: colorsets(vals, jlen(&w.p)),
            fam,
            ver,
            at_start,
        }
    }

    /// The realized strip `[b, b + vals.len())` of the sequence with tables `t`.
    pub fn real(w: &BaseWorld, t: &SideTables, vals: &'a [u32], b: usize) -> Self {
        let len = vals.len();
        let ncs = (len + 1).saturating_sub(jlen(&w.p));
        let fam: [Vec<u64>; 2] = [0, 1].map(|j| {
            let k = (len as i64 - w.p.big_l[j]).max(0) as usize;
            t.fam[j].get(b..b + k).map_or(Vec::new(), |s| s.to_vec())
        });
        let ver = [0, 1].map(|j| {
            let bad = &t.badness[j];
            (b..b + fam[j].len())
                .map(|a| (bad.verdict[a], bad.init[a]))
                .collect()
        });
        Strip {
            vals,
            cs: t.cs[b..b + ncs].to_vec(),
            fam,
            ver,
            at_start: b == 0,
        }
    }
}

/// `e[x]`: smallest right end `x1` of a level-2 trap `[x, x1] x [..]` lying in
/// the strip (`NONE` if there is none). `along` is the fixed sequence.
pub(crate) fn trap_ends(w: &BaseWorld, t: &SideTables, along: &[u32], strip: &Strip) -> Vec<i64> {
    let n = along.len();
    let mut e = vec![NONE; n];
    let (f, mm) = (w.p.f_int(), w.m as usize + 1);
    // two closed points with distinct rows within f, columns colored c and c'
    let mut near = vec![false; mm * mm];
    for (p, &c) in strip.vals.iter().enumerate() {
        for &c2 in strip.vals.iter().skip(p + 1).take(f as usize) {
            near[c as usize * mm + c2 as usize] = true;
            near[c2 as usize * mm + c as usize] = true;
        }
    }
    for x in 0..n {
        let c = along[x] as usize;
        if let Some(k) = (1..=f as usize)
            .take_while(|k| x + k < n)
            .find(|k| near[c * mm + along[x + k] as usize])
        {
            e[x] = (x + k) as i64;
        }
    }
    // correlated traps whose family lies on the fixed sequence
    let (mut sup, mut init) = (0u64, 0u64);
    for (p, &s) in strip.cs.iter().enumerate() {
        if strip.at_start && p == 0 {
            init |= 1 << s;
        } else {
            sup |= 1 << s;
        }
    }
    for j in 0..2 {
        let (l, bad) = (w.p.big_l[j], &t.badness[j]);
        for (a, &fam) in t.fam[j].iter().enumerate() {
            if (bad.verdict[a] == Verdict::Low && fam & sup != 0)
                || (bad.init[a] == Verdict::Low && fam & init != 0)
            {
                e[a] = e[a].min(a as i64 + l);
            }
        }
    }
    // correlated traps whose family lies on the strip
    let (mut fsup, mut finit) = (0u64, 0u64);
    for j in 0..2 {
        for (&fam, &(vs, vi)) in strip.fam[j].iter().zip(&strip.ver[j]) {
            if vs == Verdict::Low {
                fsup |= fam;
            }
            if vi == Verdict::Low {
                finit |= fam;
            }
        }
    }
    let jl = jlen(&w.p) as i64 - 1;
    for (x, &s) in t.cs.iter().enumerate() {
        let fam = if x == 0 { finit } else { fsup };
        if fam >> s & 1 == 1 {
            e[x] = e[x].min(x as i64 + jl);
        }
    }
    e
}

/// For every `a` with `a + 4 lam < n`: each `(c, c + lam]`, `c` in `[a, a + 3 lam]`,
/// contains the column range of some trap.
pub(crate) fn windows_hit(e: &[i64], lam: usize) -> Vec<bool> {
    let n = e.len();
    if n < 4 * lam + 1 {
        return Vec::new();
    }
    let mut suffix = vec![NONE; n + 1];
    for x in (0..n).rev() {
        suffix[x] = suffix[x + 1].min(e[x]);
    }
    // misses[c]: number of c' < c whose window holds no trap
    let mut misses = vec![0u32; n + 1];
    for c in 0..n {
        let ok = suffix[c + 1] <= (c + lam) as i64;
        misses[c + 1] = misses[c] + !ok as u32;
    }
    (0..n - 4 * lam)
        .map(|a| misses[a + 3 * lam + 1] == misses[a])
        .collect()
}

/// Right ends of the light potential walls with left end `u` (strip
/// coordinates). At level 2 every barrier is a level-1 emerging barrier and
/// every such barrier is a pre-wall, so a barrier can be designated unless a
/// barrier inside its body comes first in processing order; those inside the
/// body exist whatever the rest of the sequence is.
pub(crate) fn potential_walls(w: &BaseWorld, strip: &Strip, u: i64) -> Vec<i64> {
    let p = &w.p;
    let d1 = p.delta;
    let len = strip.vals.len() as i64;
    let high = |j: usize, a: i64| {
        a >= 0 && (a as usize) < strip.ver[j].len() && strip.ver[j][a as usize].0.high()
    };
    // smallest right end of a type-j barrier with left end u
    let first_end = |j: usize| {
        (u + 1..=u + 2 * d1)
            .filter(|&a| high(j, a))
            .map(|a| a + p.big_l[j])
            .min()
            .filter(|&v| v < len)
    };
    let mut out = Vec::new();
    if let Some(v) = first_end(0) {
        out.push(v);
    }
    if let Some(v) = first_end(1) {
        // a type-1 barrier (u2, v2] with u <= u2 and v2 <= v precedes it
        let inner = (u + 1..=v - p.big_l[0]).any(|a| high(0, a));
        if !inner && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Smallest good exits of holes through one wall, computed on demand.
struct HoleEnds<'a> {
    m: &'a Mazery,
    wall_dir: Dir,
    a1: i64,
    b1: i64,
    max_width: i64,
    memo: Vec<Option<i64>>,
}

impl<'a> HoleEnds<'a> {
    fn new(m: &'a Mazery, wall_dir: Dir, a1: i64, b1: i64, max_width: i64) -> Self {
        HoleEnds {
            m,
            wall_dir,
            a1,
            b1,
            max_width: max_width.min(b1 - a1),
            memo: vec![None; m.n],
        }
    }

    /// Smallest `t` such that `(d, t]` is a good hole (`NONE` if there is none).
    fn get(&mut self, d: i64) -> i64 {
        if let Some(t) = self.memo[d as usize] {
            return t;
        }
        let last = self.m.n as i64 - 1;
        let width = self.max_width.min(last - d);
        let (along, across) = axes(self.m, self.wall_dir);
        let row = crossing_ends(along, across, d, self.a1, self.b1, width);
        let t = if row.is_empty() {
            NONE
        } else {
            (1..=width)
                .find(|&k| {
                    bits::get(&row, k as usize)
                        && hole_good(self.m, self.wall_dir, d, d + k, self.a1, self.b1)
                })
                .map_or(NONE, |k| d + k)
        };
        self.memo[d as usize] = Some(t);
        t
    }
}

/// For each position in `positions`: no good hole `(d, t]` with
/// `(d - Delta, t + Delta]` inside `[a, a + g]` passes through the wall.
fn no_fitting_hole(holes: &mut HoleEnds, delta: i64, g: i64, positions: &[usize]) -> Vec<bool> {
    positions
        .iter()
        .map(|&a| {
            let a = a as i64;
            let tmax = a + g - delta;
            (a + delta - 1..tmax).all(|d| holes.get(d) > tmax)
        })
        .collect()
}

/// The missing-hole event at every position in `positions` for the strip
/// `[b, b + 3 Delta]` of the crossing sequence; `m` carries that strip's values.
fn missing_hole_event(
    m: &Mazery,
    w: &BaseWorld,
    d: Dir,
    strip: &Strip,
    b: usize,
    positions: &[usize],
) -> Vec<bool> {
    let (delta, g) = (m.params.delta, m.params.g_int());
    let mut out = vec![false; positions.len()];
    for v in potential_walls(w, strip, delta) {
        let (a1, b1) = (b as i64 + delta, b as i64 + v);
        let mut holes = HoleEnds::new(m, d.other(), a1, b1, g - 2 * delta + 1);
        for (o, miss) in out
            .iter_mut()
            .zip(no_fitting_hole(&mut holes, delta, g, positions))
        {
            *o |= miss;
        }
    }
    out
}

/// `m` with the crossing sequence replaced by `vals` from position `b` on.
fn patched(m: &Mazery, d: Dir, vals: &[u32], b: usize) -> Mazery {
    let s = &m.seqs;
    let mut cross: Vec<u32> = match d {
        Dir::Vertical => s.y.to_vec(),
        Dir::Horizontal => s.x.to_vec(),
    };
    cross[b..b + vals.len()].copy_from_slice(vals);
    let seqs = match d {
        Dir::Vertical => Seqs {
            m: s.m,
            loops: s.loops,
            x: s.x.clone(),
            y: cross.into(),
        },
        Dir::Horizontal => Seqs {
            m: s.m,
            loops: s.loops,
            x: cross.into(),
            y: s.y.clone(),
        },
    };
    let mut out = m.clone();
    out.seqs = Arc::new(seqs);
    out
}

fn trap_rect(d: Dir, a: usize, l: i64, b: usize, h: i64) -> Rect {
    let r = Rect::new(a as i64, a as i64 + l, b as i64, b as i64 + h);
    if d == Dir::Vertical {
        r
    } else {
        r.transpose()
    }
}

fn push_trap(out: &mut Vec<Trap>, t: Trap) -> Result<()> {
    out.push(t);
    if out.len() > OBJECT_BUDGET {
        return invalid(format!(
            "more than {OBJECT_BUDGET} new traps; use a smaller window"
        ));
    }
    Ok(())
}

fn low_at(bad: &Badness, a: usize, b: usize) -> bool {
    (if b == 0 { bad.init[a] } else { bad.verdict[a] }) == Verdict::Low
}

/// Missing-hole traps at the positions whose event probability was judged low
/// and where the realized strip has the event.
fn missing_traps(
    m: &Mazery,
    w: &BaseWorld,
    d: Dir,
    b3: &Badness,
    cross_t: &SideTables,
    cross: &[u32],
) -> Result<Vec<Trap>> {
    let p = &m.params;
    let (len, g) = (3 * p.delta as usize + 1, p.g_int());
    let mut out = Vec::new();
    if !b3
        .verdict
        .iter()
        .chain(&b3.init)
        .any(|v| *v == Verdict::Low)
        || cross.len() < len
    {
        return Ok(out);
    }
    for y in 0..=cross.len() - len {
        let lows: Vec<usize> = (0..b3.verdict.len())
            .filter(|&a| low_at(b3, a, y))
            .collect();
        if lows.is_empty() {
            continue;
        }
        let strip = Strip::real(w, cross_t, &cross[y..y + len], y);
        let ev = missing_hole_event(m, w, d, &strip, y, &lows);
        for (&a, &h) in lows.iter().zip(&ev) {
            if h {
                let rect = trap_rect(d, a, g, y, len as i64 - 1);
                push_trap(
                    &mut out,
                    Trap {
                        rect,
                        kind: TrapKind::MissingHole,
                    },
                )?;
            }
        }
    }
    Ok(out)
}

pub(crate) fn evaluate(m: &Mazery, world: &Arc<BaseWorld>, est: &Estimator) -> Result<Evaluation> {
    let w: &BaseWorld = world;
    if m.level() != 2 || w.p.level != 1 {
        return invalid("the level-2 evaluation needs a level-2 mazery built from the base level");
    }
    let p = &m.params;
    let n = m.n;
    let (delta, g) = (p.delta as usize, p.g_int());
    let threshold = p.w * p.w;
    let mut warnings = Vec::new();
    if est.mode == EstimatorMode::Exact {
        warnings.push(format!(
            "exact enumeration over {}^{} strip continuations is out of reach at level 2; using Monte Carlo",
            m.seqs.m,
            5 * delta + 1
        ));
    }
    let light = w.p.r_hat < p.r_star;
    let mut bad: [[Option<Badness>; 3]; 2] = Default::default();
    let mut correlated = Vec::new();
    let mut missing = Vec::new();
    let mut memo = FamilyMemo::default();
    for d in Dir::BOTH {
        let t = &w.sides[d.idx()];
        let cross_t = &w.sides[1 - d.idx()];
        let along: &[u32] = m.seq(d);
        let cross: &[u32] = m.seq(d.other());

        // types 1 and 2: every lambda-window of I meets a trap in I x J
        let len = 5 * delta + 1;
        let win = WalkWindow {
            m: m.seqs.m,
            loops: m.seqs.loops,
            len,
        };
        for j in 0..2 {
            let lam = p.lambda[j] as usize;
            let npos = (n + 1).saturating_sub(4 * lam + 1);
            let tag = 0x200 | (d.idx() as u64) << 4 | j as u64;
            let (verdict, init) = pooled_verdicts(
                npos,
                win,
                threshold,
                est,
                tag,
                &mut |vals, initial, pending, out| {
                    let strip = Strip::sampled(w, vals, initial, &mut memo);
                    let hit = windows_hit(&trap_ends(w, t, along, &strip), lam);
                    out.extend(pending.iter().map(|&a| hit[a]));
                },
            );
            let b = Badness {
                l: p.big_l[j],
                verdict,
                init,
            };
            if b.verdict.iter().chain(&b.init).any(|v| *v == Verdict::Low) && n >= len {
                let kind = if j == 0 {
                    TrapKind::Correlated1
                } else {
                    TrapKind::Correlated2
                };
                for y in 0..=n - len {
                    let strip = Strip::real(w, cross_t, &cross[y..y + len], y);
                    let hit = windows_hit(&trap_ends(w, t, along, &strip), lam);
                    for (a, &h) in hit.iter().enumerate() {
                        if h && low_at(&b, a, y) {
                            let rect = trap_rect(d, a, p.big_l[j], y, len as i64 - 1);
                            push_trap(&mut correlated, Trap { rect, kind })?;
                        }
                    }
                }
            }
            bad[d.idx()][j] = Some(b);
        }

        // type 3: a light potential wall starts at b + Delta with no good hole fitting it
        if !light {
            continue;
        }
        let len = 3 * delta + 1;
        let npos = (n + 1).saturating_sub(g as usize + 1);
        if n < len + 1 {
            bad[d.idx()][2] = Some(Badness {
                l: g,
                verdict: vec![Verdict::Low; npos],
                init: vec![Verdict::Low; npos],
            });
            continue;
        }
        let win = WalkWindow {
            m: m.seqs.m,
            loops: m.seqs.loops,
            len,
        };
        let tag = 0x300 | (d.idx() as u64) << 4;
        let (verdict, init) = pooled_verdicts(
            npos,
            win,
            threshold,
            est,
            tag,
            &mut |vals, initial, pending, out| {
                let b = if initial { 0 } else { 1 };
                let strip = Strip::sampled(w, vals, initial, &mut memo);
                let tmp = patched(m, d, vals, b);
                out.extend(missing_hole_event(&tmp, w, d, &strip, b, pending));
            },
        );
        let b3 = Badness {
            l: g,
            verdict,
            init,
        };
        missing.extend(missing_traps(m, w, d, &b3, cross_t, cross)?);
        bad[d.idx()][2] = Some(b3);
    }
    correlated.sort_unstable();
    correlated.dedup();
    missing.sort_unstable();
    missing.dedup();
    Ok(Evaluation {
        bad,
        correlated,
        missing,
        world: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mazery::geom::Rect;
    use crate::mazery::{toy, Model};
    use crate::rng::{gen_walk, ColorSequence, RngStream};

    fn level2(x: Vec<u32>, y: Vec<u32>, m: u32, loops: bool) -> (Mazery, Arc<BaseWorld>) {
        let n = x.len();
        let x = ColorSequence::from_values(m, loops, x).unwrap();
        let y = ColorSequence::from_values(m, loops, y).unwrap();
        let est = Estimator {
            mode: EstimatorMode::MonteCarlo,
            ..Estimator::default()
        };
        let mut t = toy::tower(&x, &y, n, 2, &est).unwrap();
        let m2 = t.pop().unwrap();
        let Model::FromBase(w) = &m2.model else {
            panic!("level 2 keeps its base world")
        };
        let w = w.clone();
        (m2, w)
    }

    fn random_level2(m: u32, n: usize, seed: u64) -> (Mazery, Arc<BaseWorld>) {
        let mut s = RngStream::new(seed, 0);
        let x = gen_walk(m, n, false, &mut s).unwrap().values;
        let y = gen_walk(m, n, false, &mut s).unwrap().values;
        level2(x, y, m, false)
    }

    #[test]
    fn windows_hit_matches_brute_force() {
        let mut s = RngStream::new(3, 3);
        for _ in 0..200 {
            let n = 1 + s.below(40) as usize;
            let lam = 1 + s.below(5) as usize;
            let e: Vec<i64> = (0..n)
                .map(|x| {
                    if s.below(4) == 0 {
                        x as i64 + s.below(6) as i64
                    } else {
                        NONE
                    }
                })
                .collect();
            let got = windows_hit(&e, lam);
            let want: Vec<bool> = (0..(n + 1).saturating_sub(4 * lam + 1))
                .map(|a| (a..=a + 3 * lam).all(|c| (c + 1..n).any(|x| e[x] <= (c + lam) as i64)))
                .collect();
            assert_eq!(got, want, "n {n} lam {lam} e {e:?}");
        }
    }

    /// Smallest right end per left end of the traps listed by the trap store.
    fn stored_ends(m: &Mazery, d: Dir, y: usize, len: usize) -> Vec<i64> {
        let n = m.n as i64;
        let region = Rect::new(0, n - 1, y as i64, (y + len) as i64 - 1);
        let region = if d == Dir::Vertical {
            region
        } else {
            region.transpose()
        };
        let traps = m.traps.collect_in(&m.seqs, region, 1 << 24).unwrap();
        let mut e = vec![NONE; m.n];
        for t in traps {
            let r = if d == Dir::Vertical {
                t.rect
            } else {
                t.rect.transpose()
            };
            e[r.x0 as usize] = e[r.x0 as usize].min(r.x1);
        }
        e
    }

    #[test]
    fn trap_ends_match_trap_store() {
        for (m, seed) in [(3, 1), (4, 2), (5, 3)] {
            let (mz, w) = random_level2(m, 320, seed);
            let len = 5 * mz.params.delta as usize + 1;
            for d in Dir::BOTH {
                let t = &w.sides[d.idx()];
                let cross_t = &w.sides[1 - d.idx()];
                let (along, cross) = (mz.seq(d), mz.seq(d.other()));
                for y in [0, 1, 7, mz.n - len] {
                    let strip = Strip::real(&w, cross_t, &cross[y..y + len], y);
                    assert_eq!(
                        trap_ends(&w, t, along, &strip),
                        stored_ends(&mz, d, y, len),
                        "m {m} {} strip at {y}",
                        d.name()
                    );
                }
            }
        }
    }

    #[test]
    fn potential_walls_need_a_high_family() {
        let (mz, w) = random_level2(3, 200, 5);
        let len = 3 * mz.params.delta as usize + 1;
        let cross_t = &w.sides[1];
        let strip = Strip::real(&w, cross_t, &mz.seqs.y[10..10 + len], 10);
        let u = mz.params.delta;
        let walls = potential_walls(&w, &strip, u);
        assert!(!walls.is_empty(), "level 1 saturates at m = 3");
        for v in walls {
            assert!((0..2).any(|j| {
                let a = v - w.p.big_l[j];
                (u + 1..=u + 2 * w.p.delta).contains(&a) && strip.ver[j][a as usize].0.high()
            }));
        }
    }

    const N: usize = 300;
    const A: usize = 100;
    const Y: usize = 100;

    /// X constant 1 (walk with loops); Y constant 2 except one fully closed row
    /// in the middle of the wall body. `open` recolors one column of X so that a
    /// single crossing of width 1 opens up inside the admissible hole range.
    fn planted(open: bool) -> (Mazery, Arc<BaseWorld>) {
        let mut x = vec![1; N];
        let mut y = vec![2; N];
        y[Y + 57] = 1;
        if open {
            x[A + 42] = 3;
        }
        level2(x, y, 3, true)
    }

    fn event(open: bool) -> (bool, Vec<i64>) {
        let (mz, w) = planted(open);
        let len = 3 * mz.params.delta as usize + 1;
        let strip = Strip::real(&w, &w.sides[1], &mz.seqs.y[Y..Y + len], Y);
        let walls = potential_walls(&w, &strip, mz.params.delta);
        let ev = missing_hole_event(&mz, &w, Dir::Vertical, &strip, Y, &[A]);
        (ev[0], walls)
    }

    #[test]
    fn blocked_strip_misses_every_hole() {
        let (ev, walls) = event(false);
        assert!(
            !walls.is_empty(),
            "the constant strip carries a light potential wall"
        );
        assert!(ev);
    }

    #[test]
    fn one_good_crossing_clears_the_event() {
        let (mz, _) = planted(true);
        let (d, a1) = (A as i64 + 41, Y as i64 + mz.params.delta);
        assert!(hole_good(&mz, Dir::Horizontal, d, d + 1, a1, a1 + 30));
        let (ev, walls) = event(true);
        assert!(!walls.is_empty());
        assert!(!ev);
    }

    #[test]
    fn one_low_position_gives_one_trap() {
        let (mz, w) = planted(false);
        let p = &mz.params;
        let npos = N + 1 - (p.g_int() as usize + 1);
        let mut verdict = vec![Verdict::High; npos];
        verdict[A] = Verdict::Low;
        let b3 = Badness {
            l: p.g_int(),
            verdict,
            init: vec![Verdict::High; npos],
        };
        let traps = missing_traps(&mz, &w, Dir::Vertical, &b3, &w.sides[1], &mz.seqs.y).unwrap();
        // every strip start whose body holds the closed row reports it; the one
        // planted strip must be among them, at the planted position
        assert!(traps
            .iter()
            .all(|t| t.rect.x0 == A as i64 && t.kind == TrapKind::MissingHole));
        let at_y: Vec<&Trap> = traps.iter().filter(|t| t.rect.y0 == Y as i64).collect();
        assert_eq!(at_y.len(), 1);
        assert_eq!(
            at_y[0].rect,
            Rect::new(
                A as i64,
                A as i64 + p.g_int(),
                Y as i64,
                Y as i64 + 3 * p.delta
            )
        );
        let (mz, w) = planted(true);
        let open = missing_traps(&mz, &w, Dir::Vertical, &b3, &w.sides[1], &mz.seqs.y).unwrap();
        assert!(open.iter().all(|t| t.rect.y0 != Y as i64));
    }
}
