//! Closed points, oriented reachability in the lattice, escape statistics and
//! the binary alignment decision.

use crate::bits::{self, words_for};
use crate::error::{invalid, Result};
use crate::rng::{BitSequence, ColorSequence};
use crate::scheduling::{Path, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub x: usize,
    pub y: usize,
}

impl LatticePoint {
    pub fn new(x: usize, y: usize) -> Self {
        LatticePoint { x, y }
    }

    /// Sup-metric distance.
    pub fn dist(self, o: LatticePoint) -> usize {
        self.x.abs_diff(o.x).max(self.y.abs_diff(o.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RectKind {
    /// `[a0,b0] x [a1,b1]`
    Closed,
    /// `(a0,b0] x [a1,b1]`
    LeftOpen,
    /// `[a0,b0] x (a1,b1]`
    BottomOpen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RectSpec {
    pub start: LatticePoint,
    pub end: LatticePoint,
    pub kind: RectKind,
}

impl RectSpec {
    pub fn new(start: LatticePoint, end: LatticePoint, kind: RectKind) -> Result<Self> {
        if start.x > end.x || start.y > end.y {
            return invalid(format!("malformed rectangle {start:?} -> {end:?}"));
        }
        Ok(RectSpec { start, end, kind })
    }
}

pub fn closed_point(x: &ColorSequence, y: &ColorSequence, i: usize, j: usize) -> Result<bool> {
    if i >= x.len() || j >= y.len() {
        return invalid(format!("point ({i},{j}) outside sequences"));
    }
    Ok(x.values[i] == y.values[j])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Left,
    Below,
    None,
}

/// Reachability from the origin over `[0,n]^2`, one packed row per `y`.
#[derive(Clone, Debug)]
pub struct ReachSet {
    pub n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl ReachSet {
    fn row(&self, j: usize) -> &[u64] {
        &self.rows[j * self.words..(j + 1) * self.words]
    }

    pub fn reach(&self, i: usize, j: usize) -> bool {
        i <= self.n && j <= self.n && bits::get(self.row(j), i)
    }

    /// Predecessor direction; "left" preferred when both are reachable.
    pub fn witness(&self, i: usize, j: usize) -> Witness {
        if !self.reach(i, j) || (i == 0 && j == 0) {
            return Witness::None;
        }
        if i > 0 && self.reach(i - 1, j) {
            Witness::Left
        } else if j > 0 && self.reach(i, j - 1) {
            Witness::Below
        } else {
            Witness::None
        }
    }

    /// Origin-to-target path following witnesses backwards.
    pub fn witness_path(&self, mut i: usize, mut j: usize) -> Option<Path> {
        if !self.reach(i, j) {
            return None;
        }
        let mut steps = Vec::with_capacity(i + j);
        while (i, j) != (0, 0) {
            match self.witness(i, j) {
                Witness::Left => {
                    steps.push(Step::Right);
                    i -= 1;
                }
                Witness::Below => {
                    steps.push(Step::Up);
                    j -= 1;
                }
                Witness::None => unreachable!("reachable cell without predecessor"),
            }
        }
        steps.reverse();
        Some(Path { steps })
    }

    /// Some reachable point with `max(x, y) = n`, preferring the smallest such `y`, then `x`.
    pub fn boundary_point(&self, n: usize) -> Option<LatticePoint> {
        if n > self.n {
            return None;
        }
        for j in 0..n {
            if self.reach(n, j) {
                return Some(LatticePoint::new(n, j));
            }
        }
        (0..=n)
            .find(|&i| self.reach(i, n))
            .map(|i| LatticePoint::new(i, n))
    }
}

fn open_row(xs: &[u32], yj: u32, words: usize, out: &mut [u64]) {
    out[..words].fill(0);
    for (i, &xv) in xs.iter().enumerate() {
        if xv != yj {
            bits::set(out, i);
        }
    }
}

fn check_len(x: &ColorSequence, y: &ColorSequence, need: usize) -> Result<()> {
    if x.len() < need || y.len() < need {
        return invalid(format!(
            "sequences of length {}/{} shorter than required {need}",
            x.len(),
            y.len()
        ));
    }
    Ok(())
}

pub fn reach_set(x: &ColorSequence, y: &ColorSequence, n: usize) -> Result<ReachSet> {
    check_len(x, y, n + 1)?;
    let xs = &x.values[..=n];
    let words = words_for(n + 1);
    let mut rows = vec![0u64; words * (n + 1)];
    let mut open = vec![0u64; words];
    let mut seed = vec![0u64; words];
    for j in 0..=n {
        open_row(xs, y.values[j], words, &mut open);
        if j == 0 {
            seed.fill(0);
            bits::set(&mut seed, 0);
            bits::set(&mut open, 0);
        } else {
            let prev = &rows[(j - 1) * words..j * words];
            for k in 0..words {
                seed[k] = prev[k] & open[k];
            }
        }
        let out = &mut rows[j * words..(j + 1) * words];
        bits::run_fill(&open, &seed, out);
    }
    Ok(ReachSet { n, words, rows })
}

/// Escape flags: `flags[n]` is true iff some reachable point has `max(x,y) = n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockingRecord {
    pub n_max: usize,
    flags: Vec<bool>,
}

impl BlockingRecord {
    pub fn escape(&self, n: usize) -> bool {
        self.flags[n]
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Smallest `n` with no escape, if any.
    pub fn first_blocked(&self) -> Option<usize> {
        self.flags.iter().position(|&f| !f)
    }
}

/// Single-pass escape record: per-row hits for the part with `x <= y`,
/// an accumulated column mask for `x > y`.
pub fn escape_record(x: &ColorSequence, y: &ColorSequence, n_max: usize) -> Result<BlockingRecord> {
    check_len(x, y, n_max + 1)?;
    Ok(escape_flags(&x.values[..=n_max], &y.values[..=n_max]))
}

pub(crate) fn escape_flags(xs: &[u32], ys: &[u32]) -> BlockingRecord {
    let n = xs.len() - 1;
    let words = words_for(n + 1);
    let mut prev = vec![0u64; words];
    let mut cur = vec![0u64; words];
    let mut open = vec![0u64; words];
    let mut seed = vec![0u64; words];
    let mut col_hit = vec![0u64; words];
    let mut flags = vec![false; n + 1];
    for j in 0..=n {
        open_row(xs, ys[j], words, &mut open);
        if j == 0 {
            seed.fill(0);
            bits::set(&mut seed, 0);
            bits::set(&mut open, 0);
        } else {
            for k in 0..words {
                seed[k] = prev[k] & open[k];
            }
        }
        bits::run_fill(&open, &seed, &mut cur);
        if cur.iter().all(|&w| w == 0) {
            // nothing above can be reached either
            break;
        }
        flags[j] = bits::any_in(&cur, 0, j + 1);
        // columns strictly right of the diagonal
        let w0 = (j + 1) >> 6;
        if w0 < words {
            col_hit[w0] |= cur[w0] & (u64::MAX << ((j + 1) & 63));
            for k in w0 + 1..words {
                col_hit[k] |= cur[k];
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    for (i, f) in flags.iter_mut().enumerate() {
        *f |= bits::get(&col_hit, i);
    }
    flags[0] = true;
    BlockingRecord { n_max: n, flags }
}

/// Reachability from `rect.start` to `rect.end`; with `confined` every point after
/// the first lies in the rectangle per its kind, otherwise the closed box is used
/// (monotone paths cannot leave it anyway).
pub fn reachable_in_rect(
    x: &ColorSequence,
    y: &ColorSequence,
    rect: RectSpec,
    confined: bool,
) -> Result<bool> {
    let RectSpec { start, end, kind } = RectSpec::new(rect.start, rect.end, rect.kind)?;
    if end.x >= x.len() || end.y >= y.len() {
        return invalid("rectangle outside sequences");
    }
    let kind = if confined { kind } else { RectKind::Closed };
    Ok(rect_reach(
        &x.values[start.x..=end.x],
        &y.values[start.y..=end.y],
        kind,
    ))
}

/// Box reachability on slices: start is `(0,0)`, target the far corner.
pub(crate) fn rect_reach(xs: &[u32], ys: &[u32], kind: RectKind) -> bool {
    if xs.len() == 1 && ys.len() == 1 {
        return true;
    }
    bits::get(&rect_reach_row(xs, ys, kind), xs.len() - 1)
}

/// Reachable cells of the top row of the box (start `(0,0)`), as a bitset.
pub(crate) fn rect_reach_row(xs: &[u32], ys: &[u32], kind: RectKind) -> Vec<u64> {
    let w = xs.len();
    let words = words_for(w);
    let mut prev = vec![0u64; words];
    let mut cur = vec![0u64; words];
    let mut open = vec![0u64; words];
    let mut seed = vec![0u64; words];
    for (j, &yj) in ys.iter().enumerate() {
        open_row(xs, yj, words, &mut open);
        if kind == RectKind::LeftOpen && j > 0 {
            open[0] &= !1;
        }
        if j == 0 {
            if kind == RectKind::BottomOpen {
                open.fill(0);
            }
            seed.fill(0);
            bits::set(&mut seed, 0);
            bits::set(&mut open, 0);
        } else {
            for k in 0..words {
                seed[k] = prev[k] & open[k];
            }
        }
        bits::run_fill(&open, &seed, &mut cur);
        if cur.iter().all(|&v| v == 0) {
            return cur;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}

fn check_bits(z0: &BitSequence, z1: &BitSequence, n: usize) -> Result<()> {
    if z0.len() < n || z1.len() < n {
        return invalid(format!("bit sequences shorter than horizon {n}"));
    }
    Ok(())
}

/// Alignment reachability rows: state `(i, j)` = symbols consumed from `z0`, `z1`.
/// Row `j` holds the reachable `i` values.
fn alignment_rows(z0: &[u8], z1: &[u8], anchored: bool) -> (usize, Vec<u64>) {
    let n = z0.len();
    let words = words_for(n + 1);
    // p bit i: state i may be entered horizontally (z0[i-1] = 0)
    let mut p = vec![0u64; words];
    let mut ones = vec![0u64; words]; // bit i+1 set iff z0[i] = 0 (diagonal allowed past a 1)
    for i in 0..n {
        if z0[i] == 0 {
            bits::set(&mut p, i + 1);
            bits::set(&mut ones, i + 1);
        }
    }
    let mut rows = vec![0u64; words * (n + 1)];
    let mut seed = vec![0u64; words];
    let mut open = vec![0u64; words];
    let mut sh = vec![0u64; words];
    for j in 0..=n {
        seed.fill(0);
        if j == 0 {
            if !anchored {
                bits::set(&mut seed, 0);
            }
        } else {
            let prev = &rows[(j - 1) * words..j * words];
            if z1[j - 1] == 0 {
                seed.copy_from_slice(prev);
            }
            bits::shl1(prev, &mut sh);
            if z1[j - 1] == 0 {
                for k in 0..words {
                    seed[k] |= sh[k];
                }
            } else {
                for k in 0..words {
                    seed[k] |= sh[k] & ones[k];
                }
            }
            if anchored && j == 1 {
                // the first move must be the pair (0,0)
                seed.fill(0);
                if !(z0[0] == 1 && z1[0] == 1) {
                    bits::set(&mut seed, 1);
                }
            }
        }
        for k in 0..words {
            open[k] = p[k] | seed[k];
        }
        bits::run_fill(&open, &seed, &mut rows[j * words..(j + 1) * words]);
    }
    (words, rows)
}

pub fn binary_compatible(z0: &BitSequence, z1: &BitSequence, n: usize) -> Result<bool> {
    check_bits(z0, z1, n)?;
    if n == 0 {
        return Ok(true);
    }
    let (words, rows) = alignment_rows(&z0.values[..n], &z1.values[..n], false);
    Ok(bits::get(&rows[n * words..], n))
}

/// Alignment moves of a witness run for the binary variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlignMove {
    Skip0,
    Skip1,
    Pair,
}

/// A full alignment of the first `n` symbols that starts with the pair move
/// (so both delay sequences start at time 0), if one exists.
pub fn binary_alignment(
    z0: &BitSequence,
    z1: &BitSequence,
    n: usize,
) -> Result<Option<Vec<AlignMove>>> {
    check_bits(z0, z1, n)?;
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let (a, b) = (&z0.values[..n], &z1.values[..n]);
    let (words, rows) = alignment_rows(a, b, true);
    let r = |i: usize, j: usize| bits::get(&rows[j * words..(j + 1) * words], i);
    if !r(n, n) {
        return Ok(None);
    }
    let mut moves = Vec::new();
    let (mut i, mut j) = (n, n);
    while (i, j) != (1, 1) {
        if i > 1 && j > 1 && !(a[i - 1] == 1 && b[j - 1] == 1) && r(i - 1, j - 1) {
            moves.push(AlignMove::Pair);
            i -= 1;
            j -= 1;
        } else if i > 1 && a[i - 1] == 0 && r(i - 1, j) {
            moves.push(AlignMove::Skip0);
            i -= 1;
        } else if j > 1 && b[j - 1] == 0 && r(i, j - 1) {
            moves.push(AlignMove::Skip1);
            j -= 1;
        } else {
            unreachable!("alignment witness broken at ({i},{j})");
        }
    }
    moves.push(AlignMove::Pair);
    moves.reverse();
    Ok(Some(moves))
}
