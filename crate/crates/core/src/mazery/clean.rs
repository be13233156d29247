//! Cleanness relations, built up one layer per lower level.
//!
//! Layer `j` remembers the walls, barriers and traps of level `j` together with
//! its `f` and `g`. A point is clean for level `k` when no layer `j < k` has a
//! wall (barrier, for strong cleanness) inside the interval within `f_j/3` of
//! it, and trap-clean when no layer has a trap inside the rectangle within
//! distance `g_j` of it. The base level has no layers: everything is clean.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::geom::{Dir, Rect};
use super::traps::{Seqs, TrapStore};
use super::walls::{BarrierSet, WallList};
use crate::percolation::RectKind;

#[derive(Clone, Debug)]
pub struct CleanLayer {
    pub level: u32,
    pub delta: i64,
    pub f: f64,
    pub g: f64,
    pub walls: [Arc<WallList>; 2],
    pub barriers: [Arc<BarrierSet>; 2],
    pub traps: Arc<TrapStore>,
}

/// Which end of an interval a point is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    /// `x` as the left end of `(x, b]`.
    Left,
    /// `x` as the right end of `(a, x]`.
    Right,
}

/// Which corner of a rectangle a point is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    LowerLeft,
    UpperRight,
}

#[derive(Clone, Debug, Default)]
pub struct CleannessRelations {
    pub layers: Vec<CleanLayer>,
    /// Points whose one-dimensional cleanness record was deleted (fault injection).
    pub revoked: BTreeSet<(Dir, i64, End)>,
}

/// Smallest integer strictly greater than `x - d`.
fn above(x: i64, d: f64) -> i64 {
    (x as f64 - d).floor() as i64 + 1
}

/// Largest integer strictly smaller than `x + d`.
fn below(x: i64, d: f64) -> i64 {
    (x as f64 + d).ceil() as i64 - 1
}

impl CleannessRelations {
    pub fn base() -> Self {
        CleannessRelations::default()
    }

    pub fn with_layer(&self, layer: CleanLayer) -> Self {
        let mut layers = self.layers.clone();
        layers.push(layer);
        CleannessRelations {
            layers,
            revoked: self.revoked.clone(),
        }
    }

    pub fn revoke(&mut self, dir: Dir, x: i64, end: End) {
        self.revoked.insert((dir, x, end));
    }

    /// `x` clean (or strongly clean) in `(a, x]`.
    pub fn clean_right(&self, dir: Dir, a: i64, x: i64, strong: bool) -> bool {
        if self.revoked.contains(&(dir, x, End::Right)) {
            return false;
        }
        self.layers.iter().all(|l| {
            let lo_b = above(x, l.f / 3.0);
            let d = dir.idx();
            if strong {
                !l.barriers[d].any_with(a, x - 1, lo_b, x)
            } else {
                !l.walls[d].any_with(a, x - 1, lo_b, x)
            }
        })
    }

    /// `x` clean (or strongly clean) in `(x, b]`.
    pub fn clean_left(&self, dir: Dir, x: i64, b: i64, strong: bool) -> bool {
        if self.revoked.contains(&(dir, x, End::Left)) {
            return false;
        }
        self.layers.iter().all(|l| {
            let hi_a = below(x, l.f / 3.0);
            let d = dir.idx();
            if strong {
                !l.barriers[d].any_with(x, hi_a, x + 1, b)
            } else {
                !l.walls[d].any_with(x, hi_a, x + 1, b)
            }
        })
    }

    /// Both ends of `(a, b]` clean in it.
    pub fn inner_clean(&self, dir: Dir, a: i64, b: i64) -> bool {
        self.clean_left(dir, a, b, false) && self.clean_right(dir, a, b, false)
    }

    /// Largest interval size any layer can see; cleanness is constant beyond it.
    pub fn reach(&self) -> i64 {
        self.layers
            .iter()
            .map(|l| (l.f / 3.0).ceil() as i64 + l.delta + (l.g.ceil() as i64) + l.delta)
            .max()
            .unwrap_or(0)
    }

    /// Left-clean: clean in every `(a, x]`.
    pub fn left_clean(&self, dir: Dir, x: i64, strong: bool) -> bool {
        self.clean_right(dir, (x - self.reach()).max(-1), x, strong)
    }

    /// Right-clean: clean in every `(x, b]`.
    pub fn right_clean(&self, dir: Dir, x: i64, strong: bool) -> bool {
        self.clean_left(dir, x, x + self.reach(), strong)
    }

    /// Trap-cleanness of the given corner of `Rect^kind(u, v)`.
    pub fn trap_clean(
        &self,
        seqs: &Seqs,
        u: (i64, i64),
        v: (i64, i64),
        kind: RectKind,
        corner: Corner,
    ) -> bool {
        let q = Rect::from_corners(u, v, kind);
        if q.is_empty() {
            return true;
        }
        self.layers.iter().all(|l| {
            let gi = l.g.ceil() as i64 - 1 + l.delta;
            let (region, p) = match corner {
                Corner::LowerLeft => (q.intersect(&Rect::new(u.0, u.0 + gi, u.1, u.1 + gi)), u),
                Corner::UpperRight => (q.intersect(&Rect::new(v.0 - gi, v.0, v.1 - gi, v.1)), v),
            };
            let g = l.g;
            !l.traps.any_in(seqs, region, &|t| {
                let d = match corner {
                    Corner::LowerLeft => (t.rect.x0 - p.0).max(t.rect.y0 - p.1),
                    Corner::UpperRight => (p.0 - t.rect.x1).max(p.1 - t.rect.y1),
                };
                (d as f64) < g
            })
        })
    }

    /// H-cleanness (trap-clean plus strongly clean x projection); V-cleanness when
    /// `dir` is `Horizontal`, i.e. the projection on the y axis is used.
    pub fn hv_clean(
        &self,
        seqs: &Seqs,
        u: (i64, i64),
        v: (i64, i64),
        kind: RectKind,
        corner: Corner,
        dir: Dir,
    ) -> bool {
        let (p0, p1) = match dir {
            Dir::Vertical => (u.0, v.0),
            Dir::Horizontal => (u.1, v.1),
        };
        let proj = match corner {
            Corner::LowerLeft => self.clean_left(dir, p0, p1, true),
            Corner::UpperRight => self.clean_right(dir, p0, p1, true),
        };
        proj && self.trap_clean(seqs, u, v, kind, corner)
    }

    /// Full two-dimensional cleanness of a corner (trap-clean, both projections clean).
    pub fn clean_2d(
        &self,
        seqs: &Seqs,
        u: (i64, i64),
        v: (i64, i64),
        kind: RectKind,
        corner: Corner,
    ) -> bool {
        let proj = match corner {
            Corner::LowerLeft => {
                self.clean_left(Dir::Vertical, u.0, v.0, false)
                    && self.clean_left(Dir::Horizontal, u.1, v.1, false)
            }
            Corner::UpperRight => {
                self.clean_right(Dir::Vertical, u.0, v.0, false)
                    && self.clean_right(Dir::Horizontal, u.1, v.1, false)
            }
        };
        proj && self.trap_clean(seqs, u, v, kind, corner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mazery::geom::Interval;
    use crate::mazery::walls::{BarrierGroup, WallKind, WallStatus, WallValue};

    fn layer_with_wall(a: i64, b: i64, f: f64) -> CleanLayer {
        let w = WallValue {
            body: Interval { a, b },
            rank: 10.0,
            dir: Dir::Vertical,
            status: WallStatus::Wall,
            kind: WallKind::Emerging(1),
        };
        let mut g = BarrierGroup::new(a, 10.0, WallKind::Emerging(1));
        g.insert(b);
        CleanLayer {
            level: 1,
            delta: 5,
            f,
            g: 2.0,
            walls: [
                Arc::new(WallList::new(Dir::Vertical, vec![w])),
                Arc::new(WallList::new(Dir::Horizontal, vec![])),
            ],
            barriers: [
                Arc::new(BarrierSet::from_groups(Dir::Vertical, vec![g])),
                Arc::new(BarrierSet::new(Dir::Horizontal)),
            ],
            traps: Arc::new(TrapStore::default()),
        }
    }

    #[test]
    fn wall_near_right_end_spoils_cleanness() {
        // f/3 = 4: a wall ending at x-3 is closer than f/3, one ending at x-4 is not
        let c = CleannessRelations::base().with_layer(layer_with_wall(10, 17, 12.0));
        assert!(!c.clean_right(Dir::Vertical, 0, 20, false));
        assert!(c.clean_right(Dir::Vertical, 0, 21, false));
        // the wall must be inside the interval
        assert!(c.clean_right(Dir::Vertical, 11, 20, false));
        // horizontal direction unaffected
        assert!(c.clean_right(Dir::Horizontal, 0, 20, false));
        // left end: wall starting 3 to the right of x
        assert!(!c.clean_left(Dir::Vertical, 7, 30, false));
        assert!(c.clean_left(Dir::Vertical, 6, 30, false));
        assert!(c.clean_left(Dir::Vertical, 7, 16, false));
    }

    #[test]
    fn base_everything_clean() {
        let c = CleannessRelations::base();
        let seqs = Seqs::new(2, false, vec![1, 2], vec![2, 1]);
        assert!(c.left_clean(Dir::Vertical, 3, true));
        assert!(c.trap_clean(&seqs, (0, 0), (1, 1), RectKind::Closed, Corner::LowerLeft));
    }

    #[test]
    fn trap_distance_rule() {
        // one closed point at (2, 0): x = (1,1,2), y = (2, 1) with loops
        let seqs = Seqs::new(
            2,
            true,
            vec![1, 1, 2, 1, 1, 1, 1],
            vec![2, 1, 1, 1, 1, 1, 1],
        );
        let layer = CleanLayer {
            level: 1,
            delta: 1,
            f: 4.0,
            g: 5.0,
            walls: [
                Arc::new(WallList::new(Dir::Vertical, vec![])),
                Arc::new(WallList::new(Dir::Horizontal, vec![])),
            ],
            barriers: [
                Arc::new(BarrierSet::new(Dir::Vertical)),
                Arc::new(BarrierSet::new(Dir::Horizontal)),
            ],
            traps: Arc::new(TrapStore::closed_points()),
        };
        let c = CleannessRelations::base().with_layer(layer);
        // closed points: y(0)=2 matches x(2); y(j>0)=1 matches x(i != 2)
        assert!(!c.trap_clean(&seqs, (0, 0), (6, 0), RectKind::Closed, Corner::LowerLeft));
        assert!(c.trap_clean(&seqs, (3, 0), (6, 0), RectKind::Closed, Corner::LowerLeft));
    }

    #[test]
    fn strong_implies_clean_under_growth() {
        let c = CleannessRelations::base().with_layer(layer_with_wall(10, 17, 12.0));
        for x in 0..40 {
            let mut prev = true;
            for a in (-1..x).rev() {
                let s = c.clean_right(Dir::Vertical, a, x, true);
                let w = c.clean_right(Dir::Vertical, a, x, false);
                assert!(!s || w);
                // non-increasing as the interval grows
                assert!(prev || !w);
                prev = w;
            }
        }
    }
}
