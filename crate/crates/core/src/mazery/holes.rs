//! Holes through walls. A hole `(d, t]` through a horizontal wall with body
//! `(a1, b1]` is a crossing from `(d, a1)` to `(t, b1)` inside
//! `(d, t] x [a1, b1]` with `t - d` at most the wall's size; vertical walls
//! are handled in the transposed picture.

use super::clean::Corner;
use super::geom::{Dir, Interval};
use super::walls::WallValue;
use super::Mazery;
use crate::bits;
use crate::error::{invalid, Result};
use crate::percolation::{rect_reach_row, RectKind};

#[derive(Clone, Debug, PartialEq)]
pub struct Hole {
    /// Projection of the crossing on the axis the wall does not occupy.
    pub interval: Interval,
    pub wall: WallValue,
    pub good: bool,
}

/// Bit `k` set iff `(d, a1)` reaches `(d + k, b1)` inside `(d, d + k] x [a1, b1]`.
/// `along` is the sequence of the hole's axis, `across` that of the wall's axis.
pub(crate) fn crossing_ends(
    along: &[u32],
    across: &[u32],
    d: i64,
    a1: i64,
    b1: i64,
    width: i64,
) -> Vec<u64> {
    let hi = (d + width).min(along.len() as i64 - 1);
    if d < 0 || hi <= d || a1 < 0 || b1 >= across.len() as i64 || b1 <= a1 {
        return Vec::new();
    }
    rect_reach_row(
        &along[d as usize..=hi as usize],
        &across[a1 as usize..=b1 as usize],
        RectKind::LeftOpen,
    )
}

/// Sequences of the hole axis and the wall axis.
pub(crate) fn axes(m: &Mazery, wall_dir: Dir) -> (&[u32], &[u32]) {
    match wall_dir {
        // body on x: the hole runs along y
        Dir::Vertical => (&m.seqs.y, &m.seqs.x),
        Dir::Horizontal => (&m.seqs.x, &m.seqs.y),
    }
}

/// Goodness of the hole `(d, t]` through a wall of direction `wall_dir` with
/// body `(a1, b1]`: the entry corner is H-clean (V-clean for vertical walls)
/// as the upper right corner of every rectangle ending there, and the exit
/// corner as the lower left corner of every rectangle starting there.
pub(crate) fn hole_good(m: &Mazery, wall_dir: Dir, d: i64, t: i64, a1: i64, b1: i64) -> bool {
    let r = m.cleanness.reach().max(m.params.delta);
    let last = m.n as i64 - 1;
    // (hole coordinate, wall coordinate) -> lattice point
    let pt = |h: i64, w: i64| match wall_dir {
        Dir::Horizontal => (h, w),
        Dir::Vertical => (w, h),
    };
    let (kind, proj) = match wall_dir {
        Dir::Horizontal => (RectKind::LeftOpen, Dir::Vertical),
        Dir::Vertical => (RectKind::BottomOpen, Dir::Horizontal),
    };
    let entry = pt(d, a1);
    let from = pt((d - r).max(0), (a1 - r).max(0));
    let exit = pt(t, b1);
    let to = pt((t + r).min(last), (b1 + r).min(last));
    let seqs = &m.seqs;
    m.cleanness
        .hv_clean(seqs, from, entry, kind, Corner::UpperRight, proj)
        && m.cleanness
            .hv_clean(seqs, exit, to, kind, Corner::LowerLeft, proj)
}

/// Leftmost hole `(d, t]` inside `search` through `wall` (smallest `d`, then smallest `t`).
pub fn find_hole(m: &Mazery, wall: &WallValue, search: Interval) -> Result<Option<Hole>> {
    let last = m.n as i64 - 1;
    if search.a < -1 || search.b > last {
        return invalid(format!(
            "search interval {search} outside the window [0, {last}]"
        ));
    }
    if wall.body.b > last {
        return invalid(format!("wall {} outside the window", wall.body));
    }
    let (along, across) = axes(m, wall.dir);
    let (a1, b1) = (wall.body.a, wall.body.b);
    for d in search.a.max(0)..search.b {
        let width = wall.body.size().min(search.b - d).min(last - d);
        let row = crossing_ends(along, across, d, a1, b1, width);
        if row.is_empty() {
            continue;
        }
        if let Some(k) = (1..=width as usize).find(|&k| bits::get(&row, k)) {
            let t = d + k as i64;
            return Ok(Some(Hole {
                interval: Interval { a: d, b: t },
                wall: *wall,
                good: hole_good(m, wall.dir, d, t, a1, b1),
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(along: &[u32], across: &[u32], d: usize, a1: usize, b1: usize, t: usize) -> bool {
        // monotone path from (d, a1) to (t, b1), never re-entering column d above row a1
        let w = t - d + 1;
        let h = b1 - a1 + 1;
        let mut r = vec![vec![false; w]; h];
        for j in 0..h {
            for i in 0..w {
                if i == 0 && j == 0 {
                    r[0][0] = true;
                    continue;
                }
                if i == 0 {
                    continue;
                }
                let open = along[d + i] != across[a1 + j];
                let from = r[j][i - 1] || (j > 0 && r[j - 1][i]);
                r[j][i] = open && from;
            }
        }
        r[h - 1][w - 1]
    }

    #[test]
    fn crossing_ends_match_brute_force() {
        let mut s = crate::rng::RngStream::new(5, 0);
        for _ in 0..200 {
            let m = 2 + s.below(3) as u32;
            let along: Vec<u32> = (0..20).map(|_| 1 + s.below(m as u64) as u32).collect();
            let across: Vec<u32> = (0..12).map(|_| 1 + s.below(m as u64) as u32).collect();
            let d = s.below(6) as i64;
            let (a1, b1) = (s.below(4) as i64, 5 + s.below(6) as i64);
            let width = b1 - a1;
            let row = crossing_ends(&along, &across, d, a1, b1, width);
            for k in 1..=width {
                let t = d + k;
                if t >= along.len() as i64 {
                    break;
                }
                let want = brute(
                    &along,
                    &across,
                    d as usize,
                    a1 as usize,
                    b1 as usize,
                    t as usize,
                );
                assert_eq!(
                    bits::get(&row, k as usize),
                    want,
                    "d={d} t={t} a1={a1} b1={b1}"
                );
            }
        }
    }
}
