//! Slow, literal reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use demon_lab::mazery::{Condition, Dir, MazeryParams, Rect, TrapKind};
use demon_lab::scheduling::Schedule;

/// Reachability in `[0,n]^2` by breadth-first search; `out[j * (n + 1) + i]`.
pub fn bfs_reach(x: &[u32], y: &[u32], n: usize) -> Vec<bool> {
    let w = n + 1;
    let mut seen = vec![false; w * w];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    seen[0] = true;
    while let Some((i, j)) = queue.pop_front() {
        for (a, b) in [(i + 1, j), (i, j + 1)] {
            if a <= n && b <= n && !seen[b * w + a] && x[a] != y[b] {
                seen[b * w + a] = true;
                queue.push_back((a, b));
            }
        }
    }
    seen
}

/// The collision definition taken literally: some `(a, n, k)` with
/// `t_a(n) <= t_b(k) < t_a(n+1)` and equal values; past the last index the
/// next time is infinite.
pub fn collides_literal(z0: &[u32], z1: &[u32], s: &Schedule) -> bool {
    let seqs = [z0, z1];
    let times = [&s.t0, &s.t1];
    for a in 0..2 {
        let b = 1 - a;
        let ha = times[a].len().min(seqs[a].len());
        let hb = times[b].len().min(seqs[b].len());
        for n in 0..ha {
            let next = if n + 1 < ha {
                times[a][n + 1]
            } else {
                u64::MAX
            };
            for k in 0..hb {
                let t = times[b][k];
                if times[a][n] <= t && t < next && seqs[b][k] == seqs[a][n] {
                    return true;
                }
            }
        }
    }
    false
}

/// Binary collision definition taken literally: a 1 at `(a, n)` with no 0 of
/// the other sequence at the same time.
pub fn binary_ok_literal(z0: &[u8], z1: &[u8], s: &Schedule) -> bool {
    let seqs = [z0, z1];
    let times = [&s.t0, &s.t1];
    for a in 0..2 {
        let b = 1 - a;
        let ha = times[a].len().min(seqs[a].len());
        let hb = times[b].len().min(seqs[b].len());
        for n in 0..ha {
            if seqs[a][n] == 1 && !(0..hb).any(|k| seqs[b][k] == 0 && times[b][k] == times[a][n]) {
                return false;
            }
        }
    }
    true
}

/// Deletion search: delete equally many 0s from both length-`n` prefixes so
/// that no position holds a 1 in both remainders.
pub fn binary_by_deletion(z0: &[u8], z1: &[u8], n: usize) -> bool {
    let zeros = |z: &[u8]| -> Vec<usize> { (0..n).filter(|&i| z[i] == 0).collect() };
    let (p0, p1) = (zeros(z0), zeros(z1));
    let keep = |z: &[u8], zs: &[usize], mask: u32| -> Vec<u8> {
        let del: BTreeSet<usize> = zs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &i)| i)
            .collect();
        (0..n).filter(|i| !del.contains(i)).map(|i| z[i]).collect()
    };
    for m0 in 0..1u32 << p0.len() {
        for m1 in 0..1u32 << p1.len() {
            if m0.count_ones() != m1.count_ones() {
                continue;
            }
            let (r0, r1) = (keep(z0, &p0, m0), keep(z1, &p1, m1));
            if r0.iter().zip(&r1).all(|(&a, &b)| !(a == 1 && b == 1)) {
                return true;
            }
        }
    }
    false
}

/// Every walk word of length `len` after `cond`, as (set of colors, probability).
/// Colors are bit `c` of the set.
pub fn word_sets(m: u32, loops: bool, len: usize, cond: Condition) -> HashMap<u64, f64> {
    let mut out = HashMap::new();
    fn rec(
        m: u32,
        loops: bool,
        left: usize,
        prev: Option<u32>,
        set: u64,
        wt: f64,
        out: &mut HashMap<u64, f64>,
    ) {
        if left == 0 {
            *out.entry(set).or_insert(0.0) += wt;
            return;
        }
        let choices: Vec<u32> = (1..=m)
            .filter(|&c| loops || prev.is_none_or(|p| p != c))
            .collect();
        let w = wt / choices.len() as f64;
        for c in choices {
            rec(m, loops, left - 1, Some(c), set | 1 << c, w, out);
        }
    }
    let first = match cond {
        Condition::Previous(s) => Some(s),
        Condition::Initial => None,
    };
    rec(m, loops, len, first, 0, 1.0, &mut out);
    out
}

/// Every `lam`-window `(c, c + lam]`, `c` in `[a, a + 3 lam]`, meets `set`.
fn hits_every_window(along: &[u32], a: usize, lam: usize, set: u64) -> bool {
    (a..=a + 3 * lam).all(|c| (c + 1..=c + lam).any(|i| set >> along[i] & 1 == 1))
}

/// Objects of the first scale-up, recomputed from the definitions.
#[derive(Debug, Default, PartialEq)]
pub struct Inventory {
    pub uncorrelated: BTreeSet<Rect>,
    pub correlated: BTreeSet<(Rect, TrapKind)>,
    /// `(dir, u, v, type)`
    pub barriers: BTreeSet<(Dir, i64, i64, u8)>,
    pub walls: BTreeSet<(Dir, i64, i64, u8)>,
}

/// Level-1 inventory: uncorrelated pairs of closed points, correlated traps and
/// emerging barriers by enumerating every window continuation, walls by the
/// greedy rule (types 1 then 2, left to right; at level 1 every barrier not
/// touching the window edges is a pre-wall).
pub fn level1_inventory(x: &[u32], y: &[u32], m: u32, loops: bool, p: &MazeryParams) -> Inventory {
    let n = x.len();
    let f = p.f as i64;
    let mut inv = Inventory::default();

    let closed: Vec<(i64, i64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| x[i] == y[j])
        .map(|(i, j)| (i as i64, j as i64))
        .collect();
    for &(i0, j0) in &closed {
        for &(i1, j1) in &closed {
            if i0 != i1 && j0 != j1 && (i0 - i1).abs().max((j0 - j1).abs()) <= f {
                inv.uncorrelated
                    .insert(Rect::new(i0.min(i1), i0.max(i1), j0.min(j1), j0.max(j1)));
            }
        }
    }

    let jlen = 5 * p.delta as usize + 1;
    let t = p.w * p.w;
    let conds: Vec<Condition> = (1..=m).map(Condition::Previous).collect();
    let prev: Vec<HashMap<u64, f64>> = conds
        .iter()
        .map(|&c| word_sets(m, loops, jlen, c))
        .collect();
    let init = word_sets(m, loops, jlen, Condition::Initial);
    let prob = |d: &HashMap<u64, f64>, along: &[u32], a, lam| -> f64 {
        d.iter()
            .filter(|(&s, _)| hits_every_window(along, a, lam, s))
            .map(|(_, &w)| w)
            .sum()
    };
    let mut by_type: [Vec<(Dir, i64, i64, u8)>; 2] = Default::default();
    for d in Dir::BOTH {
        let (along, across) = match d {
            Dir::Vertical => (x, y),
            Dir::Horizontal => (y, x),
        };
        for j in 0..2 {
            let lam = p.lambda[j] as usize;
            let l = p.big_l[j];
            let kind = [TrapKind::Correlated1, TrapKind::Correlated2][j];
            if n < 4 * lam + 1 {
                continue;
            }
            for a in 0..=n - 1 - 4 * lam {
                let sup = prev
                    .iter()
                    .map(|dd| prob(dd, along, a, lam))
                    .fold(0.0, f64::max);
                let p_init = prob(&init, along, a, lam);
                for b in 0..=n - jlen {
                    let set = across[b..b + jlen].iter().fold(0u64, |s, &c| s | 1 << c);
                    let low = if b == 0 { p_init <= t } else { sup <= t };
                    if low && hits_every_window(along, a, lam, set) {
                        let r =
                            Rect::new(a as i64, a as i64 + l, b as i64, b as i64 + jlen as i64 - 1);
                        let r = if d == Dir::Vertical {
                            r
                        } else {
                            Rect::new(r.y0, r.y1, r.x0, r.x1)
                        };
                        inv.correlated.insert((r, kind));
                    }
                }
                if sup > t {
                    let a = a as i64;
                    let delta = p.delta;
                    for u in (a - 2 * delta).max(-1)..a {
                        for v in a + l..=(a + l + 2 * delta - 1).min(n as i64 - 1) {
                            inv.barriers.insert((d, u, v, j as u8 + 1));
                            by_type[j].push((d, u, v, j as u8 + 1));
                        }
                    }
                }
            }
        }
    }

    for d in Dir::BOTH {
        let mut taken: Vec<(i64, i64)> = Vec::new();
        for list in &by_type {
            let mut mine: Vec<(i64, i64, u8)> = list
                .iter()
                .filter(|b| b.0 == d)
                .map(|b| (b.1, b.2, b.3))
                .collect();
            mine.sort();
            mine.dedup();
            let mut done_u = BTreeSet::new();
            for &(u, v, ty) in &mine {
                if done_u.contains(&u) {
                    continue;
                }
                if taken.iter().any(|&(a, b)| a < v && u < b) {
                    done_u.insert(u);
                    continue;
                }
                if u >= 0 && v <= n as i64 - 2 {
                    taken.push((u, v));
                    inv.walls.insert((d, u, v, ty));
                    done_u.insert(u);
                }
            }
        }
    }
    inv
}
