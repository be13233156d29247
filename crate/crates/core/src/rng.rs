//! Seeded stream generator and the two source processes (walks on K_m, Bernoulli bits).

use crate::error::{invalid, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 stream; the draw sequence is a pure function of `(master_seed, stream_index)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    state: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let state = master_seed.wrapping_add(stream_index.wrapping_mul(GOLDEN));
        RngStream {
            master_seed,
            stream_index,
            state,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, k)` by rejection: accept `u < 2^64 - (2^64 mod k)`.
    #[inline]
    pub fn below(&mut self, k: u64) -> u64 {
        assert!(k > 0, "below(0)");
        let rem = ((u64::MAX % k) + 1) % k; // 2^64 mod k
        loop {
            let u = self.next_u64();
            if rem == 0 || u < rem.wrapping_neg() {
                return u % k;
            }
        }
    }

    /// Bernoulli draw with the contract `u < floor(p * 2^64)`, `p = 1` forcing 1.
    #[inline]
    pub fn bernoulli(&mut self, threshold: BernoulliThreshold) -> bool {
        let u = self.next_u64();
        match threshold {
            BernoulliThreshold::Always => true,
            BernoulliThreshold::Below(t) => u < t,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum BernoulliThreshold {
    Always,
    Below(u64),
}

impl BernoulliThreshold {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return invalid(format!("p = {p} outside [0,1]"));
        }
        if p >= 1.0 {
            return Ok(BernoulliThreshold::Always);
        }
        // p * 2^64 < 2^64 here; the f64 -> u64 cast floors.
        Ok(BernoulliThreshold::Below(
            (p * 18_446_744_073_709_551_616.0) as u64,
        ))
    }
}

/// A finite walk on the complete graph K_m, colors in `1..=m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorSequence {
    pub m: u32,
    pub loops: bool,
    pub values: Vec<u32>,
}

impl ColorSequence {
    /// Wraps explicit values after checking the sequence invariants.
    pub fn from_values(m: u32, loops: bool, values: Vec<u32>) -> Result<Self> {
        if m == 0 || (!loops && m < 2) {
            return invalid(format!("m = {m} too small (loops = {loops})"));
        }
        if let Some(v) = values.iter().find(|&&v| v == 0 || v > m) {
            return invalid(format!("color {v} outside 1..={m}"));
        }
        if !loops {
            if let Some(i) = values.windows(2).position(|w| w[0] == w[1]) {
                return invalid(format!("repeated color at index {i} without loops"));
            }
        }
        Ok(ColorSequence { m, loops, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.values[i]
    }
}

/// A finite 0/1 sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct BitSequence {
    pub p: f64,
    pub values: Vec<u8>,
}

impl BitSequence {
    pub fn from_values(values: Vec<u8>) -> Result<Self> {
        if values.iter().any(|&b| b > 1) {
            return invalid("bit values must be 0 or 1");
        }
        let p = if values.is_empty() {
            0.0
        } else {
            values.iter().map(|&b| b as f64).sum::<f64>() / values.len() as f64
        };
        Ok(BitSequence { p, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One step of the walk from `current` (1-based).
#[inline]
pub fn walk_step(m: u32, loops: bool, current: u32, stream: &mut RngStream) -> u32 {
    if loops {
        stream.below(m as u64) as u32 + 1
    } else {
        let r = stream.below(m as u64 - 1) as u32;
        if r + 1 < current {
            r + 1
        } else {
            r + 2
        }
    }
}

pub fn gen_walk(m: u32, n: usize, loops: bool, stream: &mut RngStream) -> Result<ColorSequence> {
    if m == 0 || (!loops && m < 2) {
        return invalid(format!("m = {m} too small (loops = {loops})"));
    }
    if n == 0 {
        return invalid("walk length must be at least 1");
    }
    let mut values = Vec::with_capacity(n);
    let mut cur = stream.below(m as u64) as u32 + 1;
    values.push(cur);
    for _ in 1..n {
        cur = walk_step(m, loops, cur, stream);
        values.push(cur);
    }
    Ok(ColorSequence { m, loops, values })
}

pub fn gen_bernoulli(p: f64, n: usize, stream: &mut RngStream) -> Result<BitSequence> {
    let t = BernoulliThreshold::new(p)?;
    if n == 0 {
        return invalid("bit sequence length must be at least 1");
    }
    let values = (0..n).map(|_| stream.bernoulli(t) as u8).collect();
    Ok(BitSequence { p, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values of the plain SplitMix64 generator seeded with 0
    // (the stream state starts at the seed and is advanced before mixing).
    #[test]
    fn splitmix_reference_values() {
        let mut s = RngStream::new(0, 0);
        assert_eq!(s.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(s.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(s.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn stream_offset_is_golden_multiple() {
        let mut a = RngStream::new(5, 3);
        let mut b = RngStream::new(5u64.wrapping_add(3u64.wrapping_mul(GOLDEN)), 0);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn below_power_of_two_accepts_everything() {
        let mut a = RngStream::new(9, 1);
        let mut b = a.clone();
        for _ in 0..100 {
            assert_eq!(a.below(8), b.next_u64() % 8);
        }
    }

    #[test]
    fn k2_walk_alternates() {
        for seed in 0..20 {
            let w = gen_walk(2, 6, false, &mut RngStream::new(seed, 0)).unwrap();
            for i in 1..6 {
                assert_eq!(w.values[i], 3 - w.values[i - 1]);
            }
        }
    }

    #[test]
    fn single_color_with_loops() {
        let w = gen_walk(1, 3, true, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(w.values, vec![1, 1, 1]);
    }

    #[test]
    fn parameter_errors() {
        assert!(gen_walk(1, 3, false, &mut RngStream::new(0, 0)).is_err());
        assert!(gen_walk(3, 0, false, &mut RngStream::new(0, 0)).is_err());
        assert!(gen_bernoulli(1.5, 3, &mut RngStream::new(0, 0)).is_err());
        assert!(gen_bernoulli(-0.1, 3, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn degenerate_bernoulli() {
        let z = gen_bernoulli(0.0, 5, &mut RngStream::new(3, 0)).unwrap();
        assert_eq!(z.values, vec![0; 5]);
        let o = gen_bernoulli(1.0, 5, &mut RngStream::new(3, 0)).unwrap();
        assert_eq!(o.values, vec![1; 5]);
    }
}
