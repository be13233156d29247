//! Wall values and barrier sets.
//!
//! Emerging and compound barriers come in dense families (many right ends per
//! left end), so a barrier set stores, per `(left end, rank, kind)`, a bitset of
//! right ends. Walls are few and kept as a sorted list.

use std::fmt;

use super::geom::{Dir, Interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WallStatus {
    Barrier,
    Wall,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WallKind {
    Emerging(u8),
    Compound { r1: f64, r2: f64, i: u32 },
    Inherited,
}

impl WallKind {
    pub fn label(&self) -> String {
        match self {
            WallKind::Emerging(j) => format!("emerging-{j}"),
            WallKind::Compound { r1, r2, i } => format!("compound<{r1},{r2},{i}>"),
            WallKind::Inherited => "inherited".into(),
        }
    }

    pub fn parse(s: &str) -> Option<WallKind> {
        if let Some(j) = s.strip_prefix("emerging-") {
            return j
                .parse()
                .ok()
                .filter(|j| (1..=3).contains(j))
                .map(WallKind::Emerging);
        }
        if s == "inherited" {
            return Some(WallKind::Inherited);
        }
        let inner = s.strip_prefix("compound<")?.strip_suffix('>')?;
        let mut it = inner.split(',');
        let r1 = it.next()?.parse().ok()?;
        let r2 = it.next()?.parse().ok()?;
        let i = it.next()?.parse().ok()?;
        if it.next().is_some() {
            return None;
        }
        Some(WallKind::Compound { r1, r2, i })
    }

    /// Total order used for grouping and dumps.
    pub(crate) fn key(&self) -> (u8, u64, u64, u32) {
        match *self {
            WallKind::Emerging(j) => (0, j as u64, 0, 0),
            WallKind::Compound { r1, r2, i } => (1, r1.to_bits(), r2.to_bits(), i),
            WallKind::Inherited => (2, 0, 0, 0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallValue {
    pub body: Interval,
    pub rank: f64,
    pub dir: Dir,
    pub status: WallStatus,
    pub kind: WallKind,
}

impl WallValue {
    pub fn sort_key(&self) -> (i64, i64, u64, (u8, u64, u64, u32)) {
        (
            self.body.a,
            self.body.b,
            self.rank.to_bits(),
            self.kind.key(),
        )
    }
}

impl fmt::Display for WallValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = match self.status {
            WallStatus::Barrier => "barrier",
            WallStatus::Wall => "wall",
        };
        write!(
            f,
            "{} {} {} {} rank {}",
            self.dir.name(),
            st,
            self.kind.label(),
            self.body,
            self.rank
        )
    }
}

/// All barriers of one direction sharing a left end, rank and kind.
#[derive(Clone, Debug)]
pub struct BarrierGroup {
    pub a: i64,
    pub rank: f64,
    pub kind: WallKind,
    /// Bit `k` stands for the right end `a + 1 + k`.
    pub ends: Vec<u64>,
}

impl BarrierGroup {
    pub fn new(a: i64, rank: f64, kind: WallKind) -> Self {
        BarrierGroup {
            a,
            rank,
            kind,
            ends: Vec::new(),
        }
    }

    fn slot(&self, b: i64) -> Option<usize> {
        (b > self.a).then(|| (b - self.a - 1) as usize)
    }

    pub fn insert(&mut self, b: i64) {
        let k = self.slot(b).expect("right end must exceed left end");
        if k >> 6 >= self.ends.len() {
            self.ends.resize((k >> 6) + 1, 0);
        }
        self.ends[k >> 6] |= 1 << (k & 63);
    }

    pub fn insert_range(&mut self, lo: i64, hi: i64) {
        let lo = lo.max(self.a + 1);
        if hi < lo {
            return;
        }
        let (s, e) = ((lo - self.a - 1) as usize, (hi - self.a - 1) as usize);
        if e >> 6 >= self.ends.len() {
            self.ends.resize((e >> 6) + 1, 0);
        }
        for w in s >> 6..=e >> 6 {
            let from = if w == s >> 6 { s & 63 } else { 0 };
            let to = if w == e >> 6 { e & 63 } else { 63 };
            let mask = if to - from == 63 {
                u64::MAX
            } else {
                ((1u64 << (to - from + 1)) - 1) << from
            };
            self.ends[w] |= mask;
        }
    }

    pub fn has(&self, b: i64) -> bool {
        match self.slot(b) {
            Some(k) => k >> 6 < self.ends.len() && self.ends[k >> 6] >> (k & 63) & 1 == 1,
            None => false,
        }
    }

    /// Is some right end in `[lo, hi]`?
    pub fn any_end_in(&self, lo: i64, hi: i64) -> bool {
        let lo = lo.max(self.a + 1);
        if hi < lo {
            return false;
        }
        let top = (self.ends.len() * 64) as i64 + self.a;
        let hi = hi.min(top);
        if hi < lo {
            return false;
        }
        crate::bits::any_in(
            &self.ends,
            (lo - self.a - 1) as usize,
            (hi - self.a) as usize,
        )
    }

    pub fn ends(&self) -> impl Iterator<Item = i64> + '_ {
        let a = self.a;
        self.ends.iter().enumerate().flat_map(move |(w, &word)| {
            let mut v = word;
            std::iter::from_fn(move || {
                if v == 0 {
                    return None;
                }
                let t = v.trailing_zeros() as i64;
                v &= v - 1;
                Some(a + 1 + w as i64 * 64 + t)
            })
        })
    }

    pub fn min_end(&self) -> Option<i64> {
        self.ends().next()
    }

    pub fn max_end(&self) -> Option<i64> {
        for (w, &word) in self.ends.iter().enumerate().rev() {
            if word != 0 {
                return Some(self.a + 1 + w as i64 * 64 + 63 - word.leading_zeros() as i64);
            }
        }
        None
    }

    pub fn count(&self) -> u64 {
        self.ends.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.iter().all(|&w| w == 0)
    }

    /// OR in the right ends `origin + k` for the set bits `k` of `bits`.
    pub(crate) fn or_bits(&mut self, origin: i64, bits: &[u64]) {
        let shift = origin - self.a - 1;
        debug_assert!(shift >= 0);
        crate::bits::or_shifted(&mut self.ends, bits, shift as usize);
    }

    /// OR in the ends of `other` (absolute positions).
    pub fn or_ends(&mut self, other: &BarrierGroup) {
        self.or_bits(other.a + 1, &other.ends);
    }
}

/// Barriers of one direction.
#[derive(Clone, Debug)]
pub struct BarrierSet {
    pub dir: Dir,
    /// Sorted by `(a, rank, kind)`, no empty groups.
    groups: Vec<BarrierGroup>,
    max_size: i64,
}

impl BarrierSet {
    pub fn new(dir: Dir) -> Self {
        BarrierSet {
            dir,
            groups: Vec::new(),
            max_size: 0,
        }
    }

    pub fn from_groups(dir: Dir, mut groups: Vec<BarrierGroup>) -> Self {
        groups.retain(|g| !g.is_empty());
        groups.sort_by(|p, q| {
            (p.a, p.rank.to_bits(), p.kind.key()).cmp(&(q.a, q.rank.to_bits(), q.kind.key()))
        });
        // merge duplicates
        let mut merged: Vec<BarrierGroup> = Vec::with_capacity(groups.len());
        for g in groups {
            if let Some(last) = merged.last_mut() {
                if last.a == g.a
                    && last.rank.to_bits() == g.rank.to_bits()
                    && last.kind.key() == g.kind.key()
                {
                    last.or_ends(&g);
                    continue;
                }
            }
            merged.push(g);
        }
        let max_size = merged
            .iter()
            .filter_map(|g| g.max_end().map(|b| b - g.a))
            .max()
            .unwrap_or(0);
        BarrierSet {
            dir,
            groups: merged,
            max_size,
        }
    }

    pub fn groups(&self) -> &[BarrierGroup] {
        &self.groups
    }

    pub fn max_size(&self) -> i64 {
        self.max_size
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn count(&self) -> u64 {
        self.groups.iter().map(|g| g.count()).sum()
    }

    /// Groups with left end in `[lo, hi]`.
    pub fn groups_in(&self, lo: i64, hi: i64) -> &[BarrierGroup] {
        let s = self.groups.partition_point(|g| g.a < lo);
        let e = self.groups.partition_point(|g| g.a <= hi);
        &self.groups[s..e.max(s)]
    }

    pub fn contains(&self, body: Interval, rank: f64) -> bool {
        self.groups_in(body.a, body.a)
            .iter()
            .any(|g| g.rank.to_bits() == rank.to_bits() && g.has(body.b))
    }

    /// Is there a barrier with left end in `[a_lo, a_hi]` and right end in `[b_lo, b_hi]`?
    pub fn any_with(&self, a_lo: i64, a_hi: i64, b_lo: i64, b_hi: i64) -> bool {
        self.groups_in(a_lo, a_hi)
            .iter()
            .any(|g| g.any_end_in(b_lo, b_hi))
    }

    pub fn iter(&self) -> impl Iterator<Item = WallValue> + '_ {
        let dir = self.dir;
        self.groups.iter().flat_map(move |g| {
            g.ends().map(move |b| WallValue {
                body: Interval { a: g.a, b },
                rank: g.rank,
                dir,
                status: WallStatus::Barrier,
                kind: g.kind,
            })
        })
    }
}

/// Sorted explicit wall list with windowed queries.
#[derive(Clone, Debug)]
pub struct WallList {
    pub dir: Dir,
    walls: Vec<WallValue>,
    max_size: i64,
}

impl WallList {
    pub fn new(dir: Dir, mut walls: Vec<WallValue>) -> Self {
        walls.sort_by(|p, q| p.sort_key().cmp(&q.sort_key()));
        walls.dedup_by(|p, q| p.sort_key() == q.sort_key());
        let max_size = walls.iter().map(|w| w.body.size()).max().unwrap_or(0);
        WallList {
            dir,
            walls,
            max_size,
        }
    }

    pub fn as_slice(&self) -> &[WallValue] {
        &self.walls
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    pub fn max_size(&self) -> i64 {
        self.max_size
    }

    pub fn with_left_in(&self, lo: i64, hi: i64) -> &[WallValue] {
        let s = self.walls.partition_point(|w| w.body.a < lo);
        let e = self.walls.partition_point(|w| w.body.a <= hi);
        &self.walls[s..e.max(s)]
    }

    pub fn any_with(&self, a_lo: i64, a_hi: i64, b_lo: i64, b_hi: i64) -> bool {
        self.with_left_in(a_lo, a_hi)
            .iter()
            .any(|w| w.body.b >= b_lo && w.body.b <= b_hi)
    }

    /// Walls intersecting `(p, q]`.
    pub fn intersecting(&self, p: i64, q: i64) -> impl Iterator<Item = &WallValue> {
        self.with_left_in(p - self.max_size, q - 1)
            .iter()
            .filter(move |w| w.body.b > p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_bitset_queries() {
        let mut g = BarrierGroup::new(10, 5.0, WallKind::Emerging(1));
        g.insert(11);
        g.insert(80);
        g.insert(200);
        assert!(g.has(80) && !g.has(79));
        assert!(g.any_end_in(70, 90));
        assert!(!g.any_end_in(12, 79));
        assert!(!g.any_end_in(201, 1000));
        assert_eq!(g.ends().collect::<Vec<_>>(), vec![11, 80, 200]);
        assert_eq!(g.max_end(), Some(200));
        let mut h = BarrierGroup::new(3, 5.0, WallKind::Emerging(1));
        h.or_ends(&g);
        assert_eq!(h.ends().collect::<Vec<_>>(), vec![11, 80, 200]);
    }

    #[test]
    fn range_insert_matches_pointwise() {
        for (lo, hi) in [(1, 1), (5, 70), (64, 64), (60, 200), (0, 130), (3, 2)] {
            let mut g = BarrierGroup::new(0, 1.0, WallKind::Inherited);
            g.insert_range(lo, hi);
            let want: Vec<i64> = (lo.max(1)..=hi).collect();
            assert_eq!(g.ends().collect::<Vec<_>>(), want, "{lo}..{hi}");
        }
    }

    #[test]
    fn set_merges_and_queries() {
        let mut g1 = BarrierGroup::new(0, 2.0, WallKind::Emerging(2));
        g1.insert_range(5, 7);
        let mut g2 = BarrierGroup::new(0, 2.0, WallKind::Emerging(2));
        g2.insert(9);
        let s = BarrierSet::from_groups(Dir::Vertical, vec![g2, g1]);
        assert_eq!(s.groups().len(), 1);
        assert_eq!(s.count(), 4);
        assert!(s.contains(Interval { a: 0, b: 9 }, 2.0));
        assert!(!s.contains(Interval { a: 0, b: 8 }, 2.0));
        assert!(s.any_with(0, 0, 8, 9));
        assert_eq!(s.max_size(), 9);
    }

    #[test]
    fn kind_labels_round_trip() {
        for k in [
            WallKind::Emerging(3),
            WallKind::Inherited,
            WallKind::Compound {
                r1: 35.0,
                r2: 87.5,
                i: 2,
            },
        ] {
            assert_eq!(WallKind::parse(&k.label()), Some(k));
        }
        assert_eq!(WallKind::parse("emerging-4"), None);
    }
}
