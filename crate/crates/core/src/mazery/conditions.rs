//! Machine checks of the combinatorial conditions on a built mazery, and
//! Monte Carlo diagnostics of its probability bounds.
//!
//! Everything is evaluated on the core window `[0, core_hi]`: intervals and
//! rectangles reaching past it depend on values beyond the window edge.

use std::fmt;

use super::clean::Corner;
use super::geom::{minslope, Dir, Rect};
use super::holes::{axes, crossing_ends};
use super::scale::Line;
use super::walls::{WallKind, WallValue};
use super::Mazery;
use crate::experiments::wilson;
use crate::params::{hole_prob, wall_prob};
use crate::percolation::{rect_reach, RectKind};
use crate::rng::RngStream;

const MAX_EXAMPLES: usize = 8;

/// Outcome of one condition over all the cases it applies to.
#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub name: &'static str,
    /// Cases examined.
    pub checked: u64,
    pub failed: u64,
    /// The first few counterexamples with coordinates.
    pub examples: Vec<String>,
}

impl ConditionCheck {
    fn new(name: &'static str) -> Self {
        ConditionCheck {
            name,
            checked: 0,
            failed: 0,
            examples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub level: u32,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn failures(&self) -> Vec<&ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "conditions at level {}:", self.level)?;
        for c in &self.checks {
            let st = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "  {st} {:<24} checked {:>8}  failed {}",
                c.name, c.checked, c.failed
            )?;
            for e in &c.examples {
                writeln!(f, "       {e}")?;
            }
        }
        Ok(())
    }
}

/// Sizes, walls inside barriers, rank windows.
pub(crate) fn object_checks(m: &Mazery) -> Vec<ConditionCheck> {
    let p = &m.params;
    let tol = 1e-9 * p.rank_cap.max(1.0);
    let log_f = p_log(m);
    let mut sizes = ConditionCheck::new("object-sizes");
    let mut subset = ConditionCheck::new("walls-are-barriers");
    let mut ranks = ConditionCheck::new("rank-window");
    let mut compound = ConditionCheck::new("compound-rank-window");
    let mut disjoint = ConditionCheck::new("emerging-disjoint");
    for d in Dir::BOTH {
        for g in m.barriers(d).groups() {
            let top = g.max_end().unwrap_or(g.a + 1);
            sizes.record(top - g.a <= p.delta, || {
                format!(
                    "{} barrier ({}, {top}] larger than Delta = {}",
                    d.name(),
                    g.a,
                    p.delta
                )
            });
            ranks.record(g.rank >= p.r - tol && g.rank <= p.rank_cap + tol, || {
                format!(
                    "{} barrier at {} has rank {} outside [{}, {}]",
                    d.name(),
                    g.a,
                    g.rank,
                    p.r,
                    p.rank_cap
                )
            });
            if let WallKind::Compound { r1, r2, i } = g.kind {
                // the floor uses the f of the level the compound was formed at
                let ok = g.rank <= r1 + r2 + tol
                    && g.rank >= r1 + r2 - log_f - tol
                    && (r1 + r2 - i as f64 - g.rank).abs() <= tol;
                compound.record(ok, || {
                    format!(
                        "{} compound at {} of type <{r1},{r2},{i}> has rank {}",
                        d.name(),
                        g.a,
                        g.rank
                    )
                });
            }
        }
        let walls = m.walls(d).as_slice();
        for w in walls {
            sizes.record(w.body.size() <= p.delta, || {
                format!("{w} larger than Delta = {}", p.delta)
            });
            subset.record(m.barriers(d).contains(w.body, w.rank), || {
                format!("{w} is not a barrier")
            });
        }
        let em: Vec<&WallValue> = walls
            .iter()
            .filter(|w| matches!(w.kind, WallKind::Emerging(_)))
            .collect();
        for pair in em.windows(2) {
            disjoint.record(pair[0].body.b <= pair[1].body.a, || {
                format!("{} overlaps {}", pair[0], pair[1])
            });
        }
    }
    for t in m.traps.explicit() {
        sizes.record(t.rect.size() <= p.delta, || {
            format!("trap {t} larger than Delta = {}", p.delta)
        });
    }
    vec![sizes, subset, ranks, compound, disjoint]
}

/// `log_lambda f` of the level the compound objects were formed at.
fn p_log(m: &Mazery) -> f64 {
    let f = m.cleanness.layers.last().map_or(m.params.f, |l| l.f);
    f.ln() / m.params.log_base.ln()
}

/// Maximal external intervals `(p, q]` before each run of intersecting walls.
fn external_gaps(walls: &[WallValue]) -> Vec<(i64, i64)> {
    let mut gaps = Vec::new();
    let mut cur: Option<i64> = None;
    for w in walls {
        match cur {
            Some(b) if w.body.a < b => cur = Some(b.max(w.body.b)),
            Some(b) => {
                gaps.push((b, w.body.a));
                cur = Some(w.body.b);
            }
            None => {
                gaps.push((-1, w.body.a));
                cur = Some(w.body.b);
            }
        }
    }
    gaps
}

fn last_end(walls: &[WallValue]) -> i64 {
    walls.iter().map(|w| w.body.b).max().unwrap_or(-1)
}

fn structure_checks(m: &Mazery) -> Vec<ConditionCheck> {
    let delta = m.params.delta;
    let hi = m.core_hi();
    let cl = &m.cleanness;
    let mut inner = ConditionCheck::new("external-inner-clean");
    let mut spanned = ConditionCheck::new("spanned-by-neighbors");
    let mut dense = ConditionCheck::new("clean-point-1d");
    for d in Dir::BOTH {
        let line = Line { m, d };
        let walls = m.walls(d).as_slice();
        let gaps = external_gaps(walls);
        let big = |&(p, q): &(i64, i64)| q - p >= delta || p == -1;
        for &(p, q) in &gaps {
            if q > p && q <= hi && big(&(p, q)) {
                inner.record(cl.inner_clean(d, p, q), || {
                    format!("{} external ({p}, {q}] not inner clean", d.name())
                });
            }
        }
        // runs between big gaps; the last run is closed by the final (infinite) gap
        let mut bounds: Vec<(i64, i64)> = gaps.iter().copied().filter(big).collect();
        bounds.push((last_end(walls), i64::MAX));
        for pair in bounds.windows(2) {
            let (start, stop) = (pair[0].1, pair[1].0);
            if stop <= start || stop > hi {
                continue;
            }
            let inside: Vec<&WallValue> = walls
                .iter()
                .filter(|w| w.body.a >= start && w.body.b <= stop)
                .collect();
            let mut ok = vec![false; inside.len()];
            for k in 0..inside.len() {
                ok[k] = inside[k].body.a == start
                    || (0..k).any(|j| {
                        ok[j]
                            && inside[j].body.b <= inside[k].body.a
                            && line.hop(inside[j].body.b, inside[k].body.a)
                    });
            }
            let done = (0..inside.len()).any(|k| ok[k] && inside[k].body.b == stop);
            spanned.record(done, || {
                format!(
                    "{} ({start}, {stop}] not spanned by neighbor walls",
                    d.name()
                )
            });
        }
        if 3 * delta > hi {
            continue;
        }
        let clean: Vec<bool> = (0..=hi)
            .map(|x| cl.left_clean(d, x, false) && cl.right_clean(d, x, false))
            .collect();
        let mut pre = vec![0u32; clean.len() + 1];
        for (x, &c) in clean.iter().enumerate() {
            pre[x + 1] = pre[x] + c as u32;
        }
        for p in -1..=hi - 3 * delta {
            if line.contains_wall(p, p + 3 * delta) {
                continue;
            }
            let (lo, up) = ((p + delta + 1) as usize, (p + 2 * delta) as usize);
            dense.record(pre[up + 1] > pre[lo], || {
                format!(
                    "{} ({p}, {}] has no clean point in its middle third",
                    d.name(),
                    p + 3 * delta
                )
            });
        }
    }
    vec![inner, spanned, dense]
}

fn upper_right_clean(m: &Mazery, a: i64, b: i64) -> bool {
    let cl = &m.cleanness;
    let r = cl.reach().max(m.params.delta);
    let last = m.n as i64 - 1;
    cl.right_clean(Dir::Vertical, a, false)
        && cl.right_clean(Dir::Horizontal, b, false)
        && cl.trap_clean(
            &m.seqs,
            (a, b),
            ((a + r).min(last), (b + r).min(last)),
            RectKind::Closed,
            Corner::LowerLeft,
        )
}

fn sampled_checks(m: &Mazery, samples: usize) -> Vec<ConditionCheck> {
    let delta = m.params.delta;
    let hi = m.core_hi();
    let cl = &m.cleanness;
    let mut s = RngStream::new(0x5eed ^ m.level() as u64, 0);
    let mut plane = ConditionCheck::new("clean-point-2d");
    let mut reach = ConditionCheck::new("reachability");
    let side = 3 * delta;
    if side <= hi {
        for _ in 0..samples {
            let p = s.below((hi - side + 1) as u64) as i64;
            let q = s.below((hi - side + 1) as u64) as i64;
            let region = Rect::new(p + 1, p + side, q + 1, q + side);
            if (Line {
                m,
                d: Dir::Horizontal,
            })
            .contains_wall(q, q + side)
                || m.traps.any_in(&m.seqs, region, &|_| true)
            {
                continue;
            }
            for a in p + delta + 1..=p + 2 * delta {
                if !cl.right_clean(Dir::Vertical, a, false) {
                    continue;
                }
                let found = (q + delta + 1..=q + 2 * delta).any(|b| upper_right_clean(m, a, b));
                plane.record(found, || {
                    format!(
                        "no upper right clean ({a}, b) with b in the middle third of ({q}, {}]",
                        q + side
                    )
                });
            }
        }
    }
    let sigma = m.params.sigma;
    let span = (3 * delta).max(4);
    for _ in 0..samples {
        if hi < 1 {
            break;
        }
        let u = (s.below(hi as u64) as i64, s.below(hi as u64) as i64);
        let v = (
            (u.0 + s.below(span as u64 + 1) as i64).min(hi),
            (u.1 + s.below(span as u64 + 1) as i64).min(hi),
        );
        if u == v || minslope(u, v) < sigma {
            continue;
        }
        let kind =
            [RectKind::Closed, RectKind::LeftOpen, RectKind::BottomOpen][s.below(3) as usize];
        let q = Rect::from_corners(u, v, kind);
        if q.is_empty() {
            continue;
        }
        let hop = !m.traps.any_in(&m.seqs, q, &|_| true)
            && !Line {
                m,
                d: Dir::Vertical,
            }
            .contains_wall(u.0, v.0)
            && !Line {
                m,
                d: Dir::Horizontal,
            }
            .contains_wall(u.1, v.1)
            && cl.clean_2d(&m.seqs, u, v, kind, Corner::LowerLeft)
            && cl.clean_2d(&m.seqs, u, v, kind, Corner::UpperRight);
        if !hop {
            continue;
        }
        let xs = &m.seqs.x[u.0 as usize..=v.0 as usize];
        let ys = &m.seqs.y[u.1 as usize..=v.1 as usize];
        reach.record(rect_reach(xs, ys, kind), || {
            format!("hop {kind:?} {u:?} -> {v:?} not crossed")
        });
    }
    vec![plane, reach]
}

/// All structural checks, with 300 sampled rectangles for the two-dimensional ones.
pub fn check_conditions(m: &Mazery) -> ConditionReport {
    check_conditions_with(m, 300)
}

pub fn check_conditions_with(m: &Mazery, samples: usize) -> ConditionReport {
    let mut checks = object_checks(m);
    checks.extend(structure_checks(m));
    checks.extend(sampled_checks(m, samples));
    ConditionReport {
        level: m.level(),
        checks,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagVerdict {
    Pass,
    Indeterminate,
    Fail,
}

impl fmt::Display for DiagVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagVerdict::Pass => "pass",
            DiagVerdict::Indeterminate => "indeterminate",
            DiagVerdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub name: String,
    pub estimate: f64,
    pub ci: (f64, f64),
    pub samples: u64,
    pub bound: f64,
    /// The bound is a lower bound (holes) rather than an upper bound.
    pub lower: bool,
    pub verdict: DiagVerdict,
}

impl Diagnostic {
    fn new(name: String, hits: u64, n: u64, bound: f64, lower: bool) -> Self {
        let ci = if n == 0 { (0.0, 1.0) } else { wilson(hits, n) };
        let estimate = if n == 0 {
            f64::NAN
        } else {
            hits as f64 / n as f64
        };
        let verdict = match (lower, n) {
            (_, 0) => DiagVerdict::Indeterminate,
            (false, _) if ci.1 <= bound => DiagVerdict::Pass,
            (false, _) if ci.0 > bound => DiagVerdict::Fail,
            (true, _) if ci.0 >= bound => DiagVerdict::Pass,
            (true, _) if ci.1 < bound => DiagVerdict::Fail,
            _ => DiagVerdict::Indeterminate,
        };
        Diagnostic {
            name,
            estimate,
            ci,
            samples: n,
            bound,
            lower,
            verdict,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagnosticsReport {
    pub level: u32,
    pub items: Vec<Diagnostic>,
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "probability diagnostics at level {} (advisory):",
            self.level
        )?;
        for d in &self.items {
            let rel = if d.lower { ">=" } else { "<=" };
            writeln!(
                f,
                "  {:<13} {:<34} est {:.5} [{:.5}, {:.5}] n={:<7} bound {rel} {:.3e}",
                d.verdict.to_string(),
                d.name,
                d.estimate,
                d.ci.0,
                d.ci.1,
                d.samples,
                d.bound
            )?;
        }
        Ok(())
    }
}

/// Frequencies behind the probability conditions, measured over the window by
/// sampling `trials` positions per statistic. The bounds are only guaranteed for
/// astronomically large m; verdicts are advisory.
pub fn probability_diagnostics(
    m: &Mazery,
    trials: u64,
    stream: &mut RngStream,
) -> DiagnosticsReport {
    let p = &m.params;
    let hi = m.core_hi();
    let mut items = Vec::new();
    if hi < 2 {
        return DiagnosticsReport {
            level: m.level(),
            items,
        };
    }
    let pick = |s: &mut RngStream, lo: i64| lo + s.below((hi - lo + 1) as u64) as i64;

    // trap start given the value before the window, worst color
    let mm = m.seqs.m as usize;
    let mut by_color = vec![(0u64, 0u64); mm + 1];
    for _ in 0..trials {
        let (a, b) = (pick(stream, 0), pick(stream, 1));
        let region = Rect::new(a, (a + p.delta).min(hi), b, (b + p.delta).min(hi));
        let hit = m
            .traps
            .any_in(&m.seqs, region, &|t| t.rect.x0 == a && t.rect.y0 == b);
        let c = m.seqs.y[b as usize - 1] as usize;
        by_color[c].0 += hit as u64;
        by_color[c].1 += 1;
    }
    let worst = (1..=mm)
        .filter(|&c| by_color[c].1 > 0)
        .max_by(|&i, &j| {
            let r = |c: usize| by_color[c].0 as f64 / by_color[c].1 as f64;
            r(i).total_cmp(&r(j))
        })
        .unwrap_or(1);
    let (h, n) = by_color[worst];
    items.push(Diagnostic::new(
        format!("trap start | Y(b-1)={worst}"),
        h,
        n,
        p.w,
        false,
    ));

    // barrier start per rank
    for d in Dir::BOTH {
        let mut rank_list: Vec<f64> = m.barriers(d).groups().iter().map(|g| g.rank).collect();
        rank_list.sort_by(f64::total_cmp);
        rank_list.dedup();
        for &r in rank_list.iter().take(4) {
            let mut hits = 0;
            for _ in 0..trials {
                let a = pick(stream, -1);
                hits += m.barriers(d).groups_in(a, a).iter().any(|g| g.rank == r) as u64;
            }
            items.push(Diagnostic::new(
                format!("{} barrier start, rank {r}", d.name()),
                hits,
                trials,
                wall_prob(&p.exps, r),
                false,
            ));
        }
    }

    // strong uncleanness in an interval of size Delta, and trap-uncleanness of corners
    let cl = &m.cleanness;
    let mut unclean = 0;
    let mut n_unclean = 0;
    let mut trap_unclean = 0;
    let mut n_trap = 0;
    for _ in 0..trials {
        let d = if stream.below(2) == 0 {
            Dir::Vertical
        } else {
            Dir::Horizontal
        };
        let a = pick(stream, -1);
        if a + p.delta <= hi {
            let b = a + p.delta;
            let ok = cl.clean_left(d, a, b, true) && cl.clean_right(d, a, b, true);
            unclean += !ok as u64;
            n_unclean += 1;
        }
        let u = (pick(stream, 0), pick(stream, 0));
        let v = ((u.0 + p.delta).min(hi), (u.1 + p.delta).min(hi));
        let ok = cl.trap_clean(&m.seqs, u, v, RectKind::LeftOpen, Corner::LowerLeft)
            && cl.trap_clean(&m.seqs, u, v, RectKind::LeftOpen, Corner::UpperRight);
        trap_unclean += !ok as u64;
        n_trap += 1;
    }
    items.push(Diagnostic::new(
        "not strongly clean (size Delta)".into(),
        unclean,
        n_unclean,
        p.q / 2.0,
        false,
    ));
    items.push(Diagnostic::new(
        "not trap-clean (square Delta)".into(),
        trap_unclean,
        n_trap,
        p.q / 2.0,
        false,
    ));

    // a hole starting at a given point, per wall rank
    for d in Dir::BOTH {
        let walls: Vec<WallValue> = m
            .walls(d)
            .as_slice()
            .iter()
            .filter(|w| w.body.b <= hi && w.body.a >= 0)
            .copied()
            .collect();
        if walls.is_empty() {
            continue;
        }
        let mut rank_list: Vec<f64> = walls.iter().map(|w| w.rank).collect();
        rank_list.sort_by(f64::total_cmp);
        rank_list.dedup();
        let (along, across) = axes(m, d);
        for &r in rank_list.iter().take(4) {
            let of_rank: Vec<&WallValue> = walls.iter().filter(|w| w.rank == r).collect();
            let mut hits = 0;
            for _ in 0..trials {
                let w = of_rank[stream.below(of_rank.len() as u64) as usize];
                let a = pick(stream, 0);
                let row = crossing_ends(along, across, a, w.body.a, w.body.b, w.body.size());
                hits += row
                    .iter()
                    .enumerate()
                    .any(|(k, &word)| if k == 0 { word & !1 != 0 } else { word != 0 })
                    as u64;
            }
            items.push(Diagnostic::new(
                format!("{} hole at a point, rank {r}", d.name()),
                hits,
                trials,
                hole_prob(&p.exps, r),
                true,
            ));
        }
    }
    DiagnosticsReport {
        level: m.level(),
        items,
    }
}
