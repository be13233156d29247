//! Trap storage: closed points of the base level, the implicit pair rule for
//! uncorrelated traps, and explicit lists for everything else.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use super::geom::Rect;

/// The two sequences a mazery is built on (0-based indices, colors `1..=m`).
#[derive(Clone, Debug)]
pub struct Seqs {
    pub m: u32,
    pub loops: bool,
    pub x: Arc<[u32]>,
    pub y: Arc<[u32]>,
}

impl Seqs {
    pub fn new(m: u32, loops: bool, x: Vec<u32>, y: Vec<u32>) -> Self {
        Seqs {
            m,
            loops,
            x: x.into(),
            y: y.into(),
        }
    }

    #[inline]
    pub fn closed(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.x.len()
            && (j as usize) < self.y.len()
            && self.x[i as usize] == self.y[j as usize]
    }

    pub fn transposed(&self) -> Seqs {
        Seqs {
            m: self.m,
            loops: self.loops,
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrapKind {
    Base,
    Uncorrelated,
    Correlated1,
    Correlated2,
    MissingHole,
}

impl TrapKind {
    pub fn name(self) -> &'static str {
        match self {
            TrapKind::Base => "base",
            TrapKind::Uncorrelated => "uncorrelated",
            TrapKind::Correlated1 => "correlated-1",
            TrapKind::Correlated2 => "correlated-2",
            TrapKind::MissingHole => "missing-hole",
        }
    }

    pub fn parse(s: &str) -> Option<TrapKind> {
        [
            TrapKind::Base,
            TrapKind::Uncorrelated,
            TrapKind::Correlated1,
            TrapKind::Correlated2,
            TrapKind::MissingHole,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trap {
    pub rect: Rect,
    pub kind: TrapKind,
}

impl fmt::Display for Trap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.name(), self.rect)
    }
}

/// One family of traps of a level.
#[derive(Clone, Debug)]
pub enum TrapLayer {
    /// Every `(i, j)` with `X(i) = Y(j)`.
    ClosedPoints,
    /// Bounding boxes of pairs of `base` traps with disjoint projections whose
    /// lower-left corners are within sup-distance `f`.
    Uncorrelated { base: Arc<TrapStore>, f: i64 },
    /// Sorted by `(x0, y0, ...)`.
    Explicit(Vec<Trap>),
}

/// The traps of one level as a union of layers.
#[derive(Clone, Debug, Default)]
pub struct TrapStore {
    pub layers: Vec<TrapLayer>,
}

impl TrapStore {
    pub fn closed_points() -> Self {
        TrapStore {
            layers: vec![TrapLayer::ClosedPoints],
        }
    }

    pub fn is_empty_rule(&self) -> bool {
        self.layers
            .iter()
            .all(|l| matches!(l, TrapLayer::Explicit(v) if v.is_empty()))
    }

    /// Visit every trap contained in `region` (duplicates possible across pair layers).
    pub fn for_each_in(
        &self,
        seqs: &Seqs,
        region: Rect,
        f: &mut dyn FnMut(&Trap) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if region.is_empty() {
            return ControlFlow::Continue(());
        }
        for layer in &self.layers {
            match layer {
                TrapLayer::ClosedPoints => {
                    let r = region.intersect(&Rect::new(
                        0,
                        seqs.x.len() as i64 - 1,
                        0,
                        seqs.y.len() as i64 - 1,
                    ));
                    if r.is_empty() {
                        continue;
                    }
                    for i in r.x0..=r.x1 {
                        let c = seqs.x[i as usize];
                        for j in r.y0..=r.y1 {
                            if seqs.y[j as usize] == c {
                                f(&Trap {
                                    rect: Rect::point(i, j),
                                    kind: TrapKind::Base,
                                })?;
                            }
                        }
                    }
                }
                TrapLayer::Uncorrelated { base, f: dist } => {
                    let mut pts = Vec::new();
                    let _ = base.for_each_in(seqs, region, &mut |t| {
                        pts.push(t.rect);
                        ControlFlow::Continue(())
                    });
                    pts.sort_unstable();
                    pts.dedup();
                    pair_boxes(&pts, *dist, &mut |r| {
                        f(&Trap {
                            rect: r,
                            kind: TrapKind::Uncorrelated,
                        })
                    })?;
                }
                TrapLayer::Explicit(v) => {
                    let lo = v.partition_point(|t| t.rect.x0 < region.x0);
                    for t in &v[lo..] {
                        if t.rect.x0 > region.x1 {
                            break;
                        }
                        if region.contains(&t.rect) {
                            f(t)?;
                        }
                    }
                }
            }
        }
        ControlFlow::Continue(())
    }

    pub fn any_in(&self, seqs: &Seqs, region: Rect, pred: &dyn Fn(&Trap) -> bool) -> bool {
        self.for_each_in(seqs, region, &mut |t| {
            if pred(t) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
    }

    /// Deduplicated, sorted list of the traps inside `region`; `None` past `budget`.
    pub fn collect_in(&self, seqs: &Seqs, region: Rect, budget: usize) -> Option<Vec<Trap>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let flow = self.for_each_in(seqs, region, &mut |t| {
            if seen.insert(*t) {
                out.push(*t);
                if out.len() > budget {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        if flow.is_break() {
            return None;
        }
        out.sort_unstable();
        Some(out)
    }

    pub fn explicit(&self) -> impl Iterator<Item = &Trap> {
        self.layers.iter().flat_map(|l| match l {
            TrapLayer::Explicit(v) => v.iter(),
            _ => [].iter(),
        })
    }
}

/// Bounding boxes of pairs with disjoint projections and start distance `<= f`.
/// `pts` must be sorted by `x0`.
pub(crate) fn pair_boxes(
    pts: &[Rect],
    f: i64,
    emit: &mut dyn FnMut(Rect) -> ControlFlow<()>,
) -> ControlFlow<()> {
    for (k, p) in pts.iter().enumerate() {
        // the partner to the right has x0 > p.x1 and x0 <= p.x0 + f
        for q in &pts[k + 1..] {
            if q.x0 > p.x0 + f {
                break;
            }
            if q.x0 <= p.x1 || (q.y0 - p.y0).abs() > f {
                continue;
            }
            if q.y0 > p.y1 || p.y0 > q.y1 {
                emit(p.hull(q))?;
            }
        }
    }
    ControlFlow::Continue(())
}
