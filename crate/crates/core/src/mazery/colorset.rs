//! Exact distribution of the set of colors a walk visits in a window.
//!
//! Base-level correlated events only ask whether the colors of a short `Y`
//! window meet every sub-window color set of a fixed `x` segment, so their
//! conditional probability is a sum over at most `2^m` color sets.

use crate::error::{invalid, Result};

/// Largest `m` for which color sets fit the `u64` family encoding (`2^m` bits).
pub const MAX_SET_COLORS: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// The value just before the window is `s` (1-based color).
    Previous(u32),
    /// The window starts the walk: its first value is uniform.
    Initial,
}

/// `dist[S]` is the probability that the `len` values after the condition have
/// color set `S` (bit `c-1` for color `c`).
pub fn colorset_dist(m: u32, loops: bool, len: usize, cond: Condition) -> Result<Vec<f64>> {
    if m == 0 || m > MAX_SET_COLORS {
        return invalid(format!(
            "color-set distributions need 1 <= m <= {MAX_SET_COLORS}"
        ));
    }
    if len == 0 {
        return invalid("window length must be positive");
    }
    let (mu, sets) = (m as usize, 1usize << m);
    let step = if loops {
        1.0 / m as f64
    } else {
        1.0 / (m as f64 - 1.0)
    };
    // p[c * sets + S]: current color c (0-based), visited set S
    let mut p = vec![0.0; mu * sets];
    match cond {
        Condition::Previous(s) => {
            if s == 0 || s > m {
                return invalid(format!("color {s} outside 1..={m}"));
            }
            for c in 0..mu {
                if loops || c + 1 != s as usize {
                    p[c * sets + (1 << c)] = step;
                }
            }
        }
        Condition::Initial => {
            for c in 0..mu {
                p[c * sets + (1 << c)] = 1.0 / m as f64;
            }
        }
    }
    let mut q = vec![0.0; mu * sets];
    for _ in 1..len {
        q.fill(0.0);
        for c in 0..mu {
            for s in 0..sets {
                let v = p[c * sets + s];
                if v == 0.0 {
                    continue;
                }
                for c2 in 0..mu {
                    if loops || c2 != c {
                        q[c2 * sets + (s | 1 << c2)] += v * step;
                    }
                }
            }
        }
        std::mem::swap(&mut p, &mut q);
    }
    let mut out = vec![0.0; sets];
    for c in 0..mu {
        for s in 0..sets {
            out[s] += p[c * sets + s];
        }
    }
    Ok(out)
}

/// Color set of a slice of 1-based colors.
#[inline]
pub fn mask_of(vals: &[u32]) -> u64 {
    vals.iter().fold(0u64, |acc, &c| acc | 1 << (c - 1))
}

/// `hits[W]`: the family of sets `S` with `S & W != 0`, as a bitset over `S`.
pub fn hit_table(m: u32) -> Vec<u64> {
    let sets = 1usize << m;
    (0..sets)
        .map(|w| {
            let mut fam = 0u64;
            for s in 0..sets {
                if s & w != 0 {
                    fam |= 1 << s;
                }
            }
            fam
        })
        .collect()
}

/// Color masks of every length-`lam` window: entry `t` covers `seq[t..t+lam]`.
pub fn window_masks(seq: &[u32], lam: usize) -> Vec<u64> {
    if seq.len() < lam || lam == 0 {
        return Vec::new();
    }
    (0..=seq.len() - lam)
        .map(|t| mask_of(&seq[t..t + lam]))
        .collect()
}

/// Family of color sets meeting all windows `(c, c+lam]`, `c` in `[a, a+3 lam]`,
/// i.e. window masks `t = c+1` in `a+1 ..= a+3 lam+1`.
#[inline]
pub fn family_at(masks: &[u64], hits: &[u64], full: u64, a: usize, lam: usize) -> u64 {
    let mut fam = full;
    for &w in &masks[a + 1..=a + 3 * lam + 1] {
        fam &= hits[w as usize];
        if fam == 0 {
            break;
        }
    }
    fam
}

/// `sum_{S in fam} dist[S]`.
#[inline]
pub fn family_prob(dist: &[f64], fam: u64) -> f64 {
    let mut f = fam;
    let mut p = 0.0;
    while f != 0 {
        let s = f.trailing_zeros() as usize;
        p += dist[s];
        f &= f - 1;
    }
    p
}

/// Distributions for every condition `Previous(1..=m)` followed by `Initial`.
pub fn all_dists(m: u32, loops: bool, len: usize) -> Result<Vec<Vec<f64>>> {
    let mut v = Vec::with_capacity(m as usize + 1);
    for s in 1..=m {
        v.push(colorset_dist(m, loops, len, Condition::Previous(s))?);
    }
    v.push(colorset_dist(m, loops, len, Condition::Initial)?);
    Ok(v)
}

/// `(sup over s, initial)` probabilities of a family.
pub fn sup_and_initial(dists: &[Vec<f64>], fam: u64) -> (f64, f64) {
    let m = dists.len() - 1;
    let sup = dists[..m]
        .iter()
        .map(|d| family_prob(d, fam))
        .fold(0.0, f64::max);
    (sup, family_prob(&dists[m], fam))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enumerate(m: u32, loops: bool, len: usize, cond: Condition) -> Vec<f64> {
        let sets = 1usize << m;
        let mut out = vec![0.0; sets];
        fn rec(
            m: u32,
            loops: bool,
            left: usize,
            prev: Option<u32>,
            mask: usize,
            w: f64,
            out: &mut [f64],
        ) {
            if left == 0 {
                out[mask] += w;
                return;
            }
            let choices: Vec<u32> = (1..=m).filter(|&c| loops || Some(c) != prev).collect();
            let pw = w / choices.len() as f64;
            for c in choices {
                rec(m, loops, left - 1, Some(c), mask | 1 << (c - 1), pw, out);
            }
        }
        match cond {
            Condition::Previous(s) => rec(m, loops, len, Some(s), 0, 1.0, &mut out),
            Condition::Initial => {
                for c in 1..=m {
                    rec(
                        m,
                        loops,
                        len - 1,
                        Some(c),
                        1 << (c - 1),
                        1.0 / m as f64,
                        &mut out,
                    );
                }
            }
        }
        out
    }

    #[test]
    fn dp_matches_enumeration() {
        for m in 2..=4 {
            for loops in [false, true] {
                for len in 1..=5 {
                    for cond in [
                        Condition::Previous(1),
                        Condition::Previous(m),
                        Condition::Initial,
                    ] {
                        let a = colorset_dist(m, loops, len, cond).unwrap();
                        let b = enumerate(m, loops, len, cond);
                        for (x, y) in a.iter().zip(&b) {
                            assert!((x - y).abs() < 1e-12);
                        }
                        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn single_step_without_loops() {
        // after color 1 with m=3, one step lands on {2} or {3}
        let d = colorset_dist(3, false, 1, Condition::Previous(1)).unwrap();
        assert_eq!(d[0b010], 0.5);
        assert_eq!(d[0b100], 0.5);
    }

    #[test]
    fn family_of_full_windows() {
        // x cycles through all 3 colors: every window meets every nonempty set
        let x: Vec<u32> = (0..40).map(|i| (i % 3) as u32 + 1).collect();
        let masks = window_masks(&x, 3);
        let hits = hit_table(3);
        let fam = family_at(&masks, &hits, (1u64 << 8) - 1, 0, 3);
        assert_eq!(fam, 0b1111_1110);
        let dists = all_dists(3, false, 6).unwrap();
        let (sup, init) = sup_and_initial(&dists, fam);
        assert!((sup - 1.0).abs() < 1e-12 && (init - 1.0).abs() < 1e-12);
    }
}
