//! Conditional probabilities of events of a `Y` window given the value just
//! before it: exact enumeration of walk continuations, or Monte Carlo with a
//! Wilson interval.

use std::fmt;

use super::colorset::Condition;
use crate::error::{invalid, Result};
use crate::experiments::wilson;
use crate::rng::{walk_step, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorMode {
    Exact,
    MonteCarlo,
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorMode::Exact => "exact",
            EstimatorMode::MonteCarlo => "mc",
        })
    }
}

/// How the scale-up evaluates its conditional probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimator {
    pub mode: EstimatorMode,
    /// Largest number of continuations exact mode may enumerate.
    pub budget: u64,
    /// Monte Carlo sample cap (per position and condition).
    pub samples: u32,
    pub seed: u64,
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator {
            mode: EstimatorMode::Exact,
            budget: 1 << 22,
            samples: 400,
            seed: 1,
        }
    }
}

/// The walk the window is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkWindow {
    pub m: u32,
    pub loops: bool,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondProbEstimate {
    pub value: f64,
    pub mode: EstimatorMode,
    pub samples: u64,
    pub ci: (f64, f64),
    pub warning: Option<String>,
}

impl CondProbEstimate {
    /// Point-estimate comparison against a threshold.
    pub fn exceeds(&self, threshold: f64) -> bool {
        self.value > threshold
    }
}

fn continuation_count(win: WalkWindow, cond: Condition) -> Option<u64> {
    let step = if win.loops {
        win.m as u64
    } else {
        win.m as u64 - 1
    };
    let first = match cond {
        Condition::Previous(_) => step,
        Condition::Initial => win.m as u64,
    };
    let mut total = first;
    for _ in 1..win.len {
        total = total.checked_mul(step)?;
    }
    Some(total)
}

/// Draw a window of `win.len` values following the condition.
pub fn sample_window(win: WalkWindow, cond: Condition, stream: &mut RngStream, out: &mut Vec<u32>) {
    out.clear();
    let mut cur = match cond {
        Condition::Previous(s) => walk_step(win.m, win.loops, s, stream),
        Condition::Initial => 1 + stream.below(win.m as u64) as u32,
    };
    out.push(cur);
    for _ in 1..win.len {
        cur = walk_step(win.m, win.loops, cur, stream);
        out.push(cur);
    }
}

fn enumerate(
    win: WalkWindow,
    prev: Option<u32>,
    buf: &mut Vec<u32>,
    w: f64,
    event: &dyn Fn(&[u32]) -> bool,
) -> f64 {
    if buf.len() == win.len {
        return if event(buf) { w } else { 0.0 };
    }
    let choices: Vec<u32> = (1..=win.m)
        .filter(|&c| win.loops || Some(c) != prev)
        .collect();
    let pw = w / choices.len() as f64;
    let mut total = 0.0;
    for c in choices {
        buf.push(c);
        total += enumerate(win, Some(c), buf, pw, event);
        buf.pop();
    }
    total
}

/// `P(event(Y window) | condition)`.
pub fn estimate_cond_prob(
    event: &dyn Fn(&[u32]) -> bool,
    win: WalkWindow,
    condition: Condition,
    mode: EstimatorMode,
    budget: u64,
    samples: u32,
    stream: &mut RngStream,
) -> Result<CondProbEstimate> {
    if win.m < 2 && !win.loops {
        return invalid("walks without loops need m >= 2");
    }
    if win.len == 0 {
        return invalid("window length must be positive");
    }
    if let Condition::Previous(s) = condition {
        if s == 0 || s > win.m {
            return invalid(format!("condition color {s} outside 1..={}", win.m));
        }
    }
    let mut warning = None;
    if mode == EstimatorMode::Exact {
        match continuation_count(win, condition) {
            Some(c) if c <= budget => {
                let prev = match condition {
                    Condition::Previous(s) => Some(s),
                    Condition::Initial => None,
                };
                let v = enumerate(win, prev, &mut Vec::with_capacity(win.len), 1.0, event);
                let v = v.clamp(0.0, 1.0);
                return Ok(CondProbEstimate {
                    value: v,
                    mode,
                    samples: c,
                    ci: (v, v),
                    warning: None,
                });
            }
            _ => {
                warning = Some(format!(
                    "exact enumeration of {} continuations exceeds budget {budget}; using Monte Carlo",
                    continuation_count(win, condition).map_or("more than 2^64".to_string(), |c| c.to_string())
                ));
            }
        }
    }
    if samples == 0 {
        return invalid("Monte Carlo needs at least one sample");
    }
    let mut buf = Vec::with_capacity(win.len);
    let mut hits = 0u64;
    for _ in 0..samples {
        sample_window(win, condition, stream, &mut buf);
        if event(&buf) {
            hits += 1;
        }
    }
    let n = samples as u64;
    Ok(CondProbEstimate {
        value: hits as f64 / n as f64,
        mode: EstimatorMode::MonteCarlo,
        samples: n,
        ci: wilson(hits, n),
        warning,
    })
}

/// Verdict of a `> w^2` comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Probability at most the threshold.
    Low,
    /// Probability above the threshold.
    High,
    /// Sampling stopped at the cap with the interval straddling the threshold;
    /// the point estimate said low.
    UndecidedLow,
    /// As above, the point estimate said high.
    UndecidedHigh,
}

impl Verdict {
    pub fn high(self) -> bool {
        matches!(self, Verdict::High | Verdict::UndecidedHigh)
    }

    pub fn decided(self) -> bool {
        matches!(self, Verdict::Low | Verdict::High)
    }
}

/// Sequential decision for one position: Wilson interval against the threshold.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct SeqTest {
    pub hits: u32,
    pub n: u32,
}

impl SeqTest {
    pub fn record(&mut self, hit: bool) {
        self.n += 1;
        self.hits += hit as u32;
    }

    pub fn decide(&self, threshold: f64, cap: u32) -> Option<Verdict> {
        let (lo, hi) = wilson(self.hits as u64, self.n as u64);
        if lo > threshold {
            Some(Verdict::High)
        } else if hi <= threshold {
            Some(Verdict::Low)
        } else if self.n >= cap {
            let p = self.hits as f64 / self.n as f64;
            Some(if p > threshold {
                Verdict::UndecidedHigh
            } else {
                Verdict::UndecidedLow
            })
        } else {
            None
        }
    }
}
