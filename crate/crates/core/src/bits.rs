//! Word-packed row helpers shared by the lattice dynamic programs.

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn get(row: &[u64], i: usize) -> bool {
    row[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
pub(crate) fn set(row: &mut [u64], i: usize) {
    row[i >> 6] |= 1 << (i & 63);
}

/// Rightward run fill: every bit of `open` reachable from a seed by moving to
/// higher indices through consecutive `open` bits. Seeds must be inside `open`.
/// Computes `(((open + seed) ^ open) | seed) & open` with a multiword add.
#[inline]
pub(crate) fn run_fill(open: &[u64], seed: &[u64], out: &mut [u64]) {
    let mut carry = 0u64;
    for k in 0..open.len() {
        let (s1, c1) = open[k].overflowing_add(seed[k]);
        let (s2, c2) = s1.overflowing_add(carry);
        carry = (c1 | c2) as u64;
        out[k] = ((s2 ^ open[k]) | seed[k]) & open[k];
    }
}

/// `row << 1` across words.
#[inline]
pub(crate) fn shl1(row: &[u64], out: &mut [u64]) {
    let mut carry = 0u64;
    for k in 0..row.len() {
        out[k] = (row[k] << 1) | carry;
        carry = row[k] >> 63;
    }
}

/// `dst |= src << shift`, growing `dst` as needed.
pub(crate) fn or_shifted(dst: &mut Vec<u64>, src: &[u64], shift: usize) {
    let Some(top) = src.iter().rposition(|&w| w != 0) else {
        return;
    };
    let hi = shift + top * 64 + 63 - src[top].leading_zeros() as usize;
    if hi >> 6 >= dst.len() {
        dst.resize((hi >> 6) + 1, 0);
    }
    let (ws, bs) = (shift >> 6, (shift & 63) as u32);
    for (w, &word) in src[..=top].iter().enumerate() {
        if word == 0 {
            continue;
        }
        dst[w + ws] |= word << bs;
        if bs > 0 && w + ws + 1 < dst.len() {
            dst[w + ws + 1] |= word >> (64 - bs);
        }
    }
}

pub(crate) fn any_in(row: &[u64], lo: usize, hi: usize) -> bool {
    if lo >= hi {
        return false;
    }
    let (wl, wh) = (lo >> 6, (hi - 1) >> 6);
    for k in wl..=wh {
        let mut w = row[k];
        if k == wl {
            w &= u64::MAX << (lo & 63);
        }
        if k == wh {
            let top = (hi - 1) & 63;
            if top < 63 {
                w &= (1u64 << (top + 1)) - 1;
            }
        }
        if w != 0 {
            return true;
        }
    }
    false
}
