//! Delay sequences from lattice paths, and the collision predicates for both variants.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, LabError, Result};
use crate::percolation::{self, binary_alignment, AlignMove};
use crate::rng::{BitSequence, ColorSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Right,
    Up,
}

/// Oriented lattice path from the origin.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Path {
    pub steps: Vec<Step>,
}

impl Path {
    pub fn end(&self) -> (usize, usize) {
        let r = self.steps.iter().filter(|&&s| s == Step::Right).count();
        (r, self.steps.len() - r)
    }
}

/// A pair of delay sequences; `t0` times the values of the first walk, `t1` the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub t0: Vec<u64>,
    pub t1: Vec<u64>,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        for t in [&self.t0, &self.t1] {
            if t.first() != Some(&0) {
                return invalid("delay sequence must start at time 0");
            }
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return invalid("delay sequence not strictly increasing");
            }
        }
        Ok(())
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in [&self.t0, &self.t1] {
            let line: Vec<String> = t.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Schedule {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<&str> = s.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != 2 {
            return Err(LabError::Parse {
                line: lines.len(),
                msg: "expected exactly two lines".into(),
            });
        }
        let parse = |idx: usize| -> Result<Vec<u64>> {
            lines[idx]
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u64>().map_err(|e| LabError::Parse {
                        line: idx + 1,
                        msg: format!("{tok:?}: {e}"),
                    })
                })
                .collect()
        };
        let sched = Schedule {
            t0: parse(0)?,
            t1: parse(1)?,
        };
        sched.validate()?;
        Ok(sched)
    }
}

/// `t_d(n)` = first step index at which coordinate `d` of the walked position equals `n`.
pub fn path_to_schedule(path: &Path) -> Schedule {
    let mut t0 = vec![0u64];
    let mut t1 = vec![0u64];
    for (s, step) in path.steps.iter().enumerate() {
        match step {
            Step::Right => t0.push(s as u64 + 1),
            Step::Up => t1.push(s as u64 + 1),
        }
    }
    Schedule { t0, t1 }
}

/// True iff no `(a, n, k)` has `t_a(n) <= t_b(k) < t_a(n+1)` with equal colors.
/// Horizon: the indices covered by both the schedule and the sequence.
pub fn verify_no_collision(
    z0: &ColorSequence,
    z1: &ColorSequence,
    sched: &Schedule,
) -> Result<bool> {
    sched.validate()?;
    let h0 = sched.t0.len().min(z0.len());
    let h1 = sched.t1.len().min(z1.len());
    let (t0, t1) = (&sched.t0[..h0], &sched.t1[..h1]);
    // walk a over b's arrival times with a single moving pointer
    let clash = |ta: &[u64], za: &[u32], tb: &[u64], zb: &[u32]| {
        let mut n = 0usize;
        for (k, &time) in tb.iter().enumerate() {
            if ta.is_empty() || time < ta[0] {
                continue;
            }
            while n + 1 < ta.len() && ta[n + 1] <= time {
                n += 1;
            }
            if za[n] == zb[k] {
                return true;
            }
        }
        false
    };
    Ok(!clash(t0, &z0.values, t1, &z1.values) && !clash(t1, &z1.values, t0, &z0.values))
}

/// Binary variant: a 1 at `(a, n)` needs a 0 of the other sequence at the same time.
pub fn verify_binary_schedule(
    z0: &BitSequence,
    z1: &BitSequence,
    sched: &Schedule,
) -> Result<bool> {
    sched.validate()?;
    let h0 = sched.t0.len().min(z0.len());
    let h1 = sched.t1.len().min(z1.len());
    let ok = |ta: &[u64], za: &[u8], tb: &[u64], zb: &[u8]| {
        ta.iter()
            .zip(za)
            .all(|(&time, &bit)| bit == 0 || matches!(tb.binary_search(&time), Ok(k) if zb[k] == 0))
    };
    Ok(ok(&sched.t0[..h0], &z0.values, &sched.t1[..h1], &z1.values)
        && ok(&sched.t1[..h1], &z1.values, &sched.t0[..h0], &z0.values))
}

/// Escape path to distance `n` turned into a schedule. `Ok(None)` when the origin
/// cannot escape; refuses instances whose origin is closed.
pub fn extract_schedule(
    x: &ColorSequence,
    y: &ColorSequence,
    n: usize,
) -> Result<Option<(Path, Schedule)>> {
    if x.is_empty() || y.is_empty() {
        return invalid("empty sequence");
    }
    if x.values[0] == y.values[0] {
        return invalid("closed origin: the walks collide at time 0");
    }
    let reach = percolation::reach_set(x, y, n)?;
    let Some(p) = reach.boundary_point(n) else {
        return Ok(None);
    };
    let path = reach
        .witness_path(p.x, p.y)
        .expect("boundary point is reachable");
    let sched = path_to_schedule(&path);
    Ok(Some((path, sched)))
}

/// Binary alignment turned into delay sequences (one move per time unit).
pub fn extract_binary_schedule(
    z0: &BitSequence,
    z1: &BitSequence,
    n: usize,
) -> Result<Option<Schedule>> {
    let Some(moves) = binary_alignment(z0, z1, n)? else {
        return Ok(None);
    };
    let (mut t0, mut t1) = (Vec::new(), Vec::new());
    for (s, mv) in moves.iter().enumerate() {
        let s = s as u64;
        match mv {
            AlignMove::Skip0 => t0.push(s),
            AlignMove::Skip1 => t1.push(s),
            AlignMove::Pair => {
                t0.push(s);
                t1.push(s);
            }
        }
    }
    if n == 0 {
        t0.push(0);
        t1.push(0);
    }
    Ok(Some(Schedule { t0, t1 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Step::{Right as R, Up as U};

    fn cs(v: &[u32]) -> ColorSequence {
        ColorSequence {
            m: 9,
            loops: true,
            values: v.to_vec(),
        }
    }

    #[test]
    fn hand_traced_paths() {
        let s = path_to_schedule(&Path {
            steps: vec![R, R, U, U],
        });
        assert_eq!(s.t0, vec![0, 1, 2]);
        assert_eq!(s.t1, vec![0, 3, 4]);
        let s = path_to_schedule(&Path {
            steps: vec![U, R, U, R],
        });
        assert_eq!(s.t0, vec![0, 2, 4]);
        assert_eq!(s.t1, vec![0, 1, 3]);
        let s = path_to_schedule(&Path::default());
        assert_eq!((s.t0, s.t1), (vec![0], vec![0]));
    }

    #[test]
    fn disjoint_colors_never_collide() {
        let s = path_to_schedule(&Path {
            steps: vec![R, R, U, U],
        });
        assert!(verify_no_collision(&cs(&[1, 2, 1]), &cs(&[3, 4, 3]), &s).unwrap());
    }

    #[test]
    fn equal_start_collides() {
        let s = path_to_schedule(&Path { steps: vec![R, U] });
        assert!(!verify_no_collision(&cs(&[1, 2]), &cs(&[1, 3]), &s).unwrap());
    }

    #[test]
    fn rejects_bad_schedules() {
        let bad = Schedule {
            t0: vec![0, 2, 2],
            t1: vec![0],
        };
        assert!(verify_no_collision(&cs(&[1, 2, 3]), &cs(&[4]), &bad).is_err());
        let bad = Schedule {
            t0: vec![1],
            t1: vec![0],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn binary_predicates() {
        let zero = BitSequence::from_values(vec![0, 0]).unwrap();
        let id = Schedule {
            t0: vec![0, 1],
            t1: vec![0, 1],
        };
        assert!(verify_binary_schedule(&zero, &zero, &id).unwrap());
        let one = BitSequence::from_values(vec![1]).unwrap();
        let s = Schedule {
            t0: vec![0],
            t1: vec![0],
        };
        assert!(!verify_binary_schedule(&one, &one, &s).unwrap());
        let a = BitSequence::from_values(vec![1, 0]).unwrap();
        let b = BitSequence::from_values(vec![0, 1]).unwrap();
        let s = extract_binary_schedule(&a, &b, 2).unwrap().unwrap();
        assert!(verify_binary_schedule(&a, &b, &s).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let s = Schedule {
            t0: vec![0, 1, 5],
            t1: vec![0, 2],
        };
        let text = s.to_string();
        assert_eq!(text, "0 1 5\n0 2\n");
        assert_eq!(text.parse::<Schedule>().unwrap(), s);
        assert!("0 1\n".parse::<Schedule>().is_err());
        assert!("0 x\n0\n".parse::<Schedule>().is_err());
    }

    #[test]
    fn closed_origin_refused() {
        assert!(extract_schedule(&cs(&[1, 2, 3]), &cs(&[1, 3, 2]), 2).is_err());
    }
}
