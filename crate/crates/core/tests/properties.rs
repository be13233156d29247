mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use demon_lab::experiments::blocking_curve;
use demon_lab::mazery::{toy, Dir, Estimator, Mazery};
use demon_lab::percolation::{
    binary_compatible, escape_record, reach_set, reachable_in_rect, LatticePoint, RectKind,
    RectSpec, Witness,
};
use demon_lab::rng::{gen_bernoulli, gen_walk, BitSequence, ColorSequence, RngStream};
use demon_lab::scheduling::{
    extract_binary_schedule, extract_schedule, verify_binary_schedule, verify_no_collision,
    Schedule,
};

fn walks(m: u32, len: usize, loops: bool, seed: u64) -> (ColorSequence, ColorSequence) {
    let mut s = RngStream::new(seed, 0);
    let x = gen_walk(m, len, loops, &mut s).unwrap();
    let y = gen_walk(m, len, loops, &mut s).unwrap();
    (x, y)
}

fn random_schedule(s: &mut RngStream, len0: usize, len1: usize) -> Schedule {
    let mut seq = |len: usize| {
        let mut t = vec![0u64];
        while t.len() < len {
            let last = *t.last().unwrap();
            t.push(last + 1 + s.below(3));
        }
        t
    };
    Schedule {
        t0: seq(len0),
        t1: seq(len1),
    }
}

fn bits(v: &[u8]) -> BitSequence {
    BitSequence::from_values(v.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reach_matches_bfs(m in 2u32..=6, n in 0usize..=64, loops: bool, seed: u64) {
        let (x, y) = walks(m, n + 1, loops, seed);
        let r = reach_set(&x, &y, n).unwrap();
        let bfs = common::bfs_reach(&x.values, &y.values, n);
        for j in 0..=n {
            for i in 0..=n {
                prop_assert_eq!(r.reach(i, j), bfs[j * (n + 1) + i], "cell ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn witnesses_are_sound(m in 2u32..=5, n in 1usize..=40, seed: u64) {
        let (x, y) = walks(m, n + 1, false, seed);
        let r = reach_set(&x, &y, n).unwrap();
        for j in 0..=n {
            for i in 0..=n {
                if !r.reach(i, j) || (i, j) == (0, 0) {
                    continue;
                }
                prop_assert!(x.values[i] != y.values[j]);
                let ok = match r.witness(i, j) {
                    Witness::Left => r.reach(i - 1, j),
                    Witness::Below => r.reach(i, j - 1),
                    Witness::None => false,
                };
                prop_assert!(ok, "cell ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn escape_is_monotone_and_matches_reach(m in 2u32..=6, n in 1usize..=80, seed: u64) {
        let (x, y) = walks(m, n + 1, false, seed);
        let rec = escape_record(&x, &y, n).unwrap();
        let r = reach_set(&x, &y, n).unwrap();
        for k in 0..=n {
            let direct = (0..=k).any(|t| r.reach(k, t) || r.reach(t, k));
            prop_assert_eq!(rec.escape(k), direct, "n = {}", k);
            if k < n {
                prop_assert!(!rec.escape(k + 1) || rec.escape(k));
            }
        }
    }

    #[test]
    fn disjoint_colors_reach_everything(n in 1usize..=40, seed: u64) {
        let mut s = RngStream::new(seed, 1);
        let x = gen_walk(3, n + 1, false, &mut s).unwrap();
        let y = ColorSequence::from_values(
            9,
            false,
            gen_walk(3, n + 1, false, &mut s).unwrap().values.iter().map(|v| v + 3).collect(),
        )
        .unwrap();
        let r = reach_set(&x, &y, n).unwrap();
        prop_assert!((0..=n).all(|j| (0..=n).all(|i| r.reach(i, j))));
    }

    #[test]
    fn confined_reach_implies_free_reach(m in 2u32..=4, seed: u64, a in 0usize..8, b in 0usize..8, w in 0usize..10, h in 0usize..10, k in 0usize..3) {
        let (x, y) = walks(m, 20, false, seed);
        let kind = [RectKind::Closed, RectKind::LeftOpen, RectKind::BottomOpen][k];
        let rect = RectSpec::new(LatticePoint::new(a, b), LatticePoint::new(a + w, b + h), kind).unwrap();
        let confined = reachable_in_rect(&x, &y, rect, true).unwrap();
        let free = reachable_in_rect(&x, &y, rect, false).unwrap();
        prop_assert!(!confined || free);
        if (a, b) == (0, 0) && kind == RectKind::Closed {
            let r = reach_set(&x, &y, 19).unwrap();
            prop_assert_eq!(confined, r.reach(w, h));
        }
    }

    #[test]
    fn extracted_schedules_avoid_collisions(m in 3u32..=6, n in 1usize..=60, seed: u64) {
        let (x, y) = walks(m, n + 1, false, seed);
        prop_assume!(x.values[0] != y.values[0]);
        if let Some((path, sched)) = extract_schedule(&x, &y, n).unwrap() {
            let (i, j) = path.end();
            prop_assert_eq!(i.max(j), n);
            sched.validate().unwrap();
            prop_assert_eq!(sched.t0[0], 0);
            prop_assert_eq!(sched.t1[0], 0);
            prop_assert!(verify_no_collision(&x, &y, &sched).unwrap());
            prop_assert!(!common::collides_literal(&x.values, &y.values, &sched));
            let text = sched.to_string();
            prop_assert_eq!(text.parse::<Schedule>().unwrap(), sched);
        }
    }

    #[test]
    fn collision_check_is_the_literal_definition(m in 2u32..=4, l0 in 1usize..12, l1 in 1usize..12, seed: u64) {
        let mut s = RngStream::new(seed, 7);
        let z0 = gen_walk(m, l0, false, &mut s).unwrap();
        let z1 = gen_walk(m, l1, false, &mut s).unwrap();
        let sched = random_schedule(&mut s, l0, l1);
        prop_assert_eq!(
            verify_no_collision(&z0, &z1, &sched).unwrap(),
            !common::collides_literal(&z0.values, &z1.values, &sched)
        );
    }

    #[test]
    fn binary_matches_deletion_search(n in 1usize..=6, v0 in 0u32..64, v1 in 0u32..64) {
        let z0: Vec<u8> = (0..n).map(|i| (v0 >> i & 1) as u8).collect();
        let z1: Vec<u8> = (0..n).map(|i| (v1 >> i & 1) as u8).collect();
        prop_assert_eq!(
            binary_compatible(&bits(&z0), &bits(&z1), n).unwrap(),
            common::binary_by_deletion(&z0, &z1, n)
        );
    }

    #[test]
    fn binary_schedules_pass_the_literal_check(p in 0.0f64..0.6, n in 1usize..80, seed: u64) {
        let mut s = RngStream::new(seed, 3);
        let z0 = gen_bernoulli(p, n, &mut s).unwrap();
        let z1 = gen_bernoulli(p, n, &mut s).unwrap();
        if let Some(sched) = extract_binary_schedule(&z0, &z1, n).unwrap() {
            sched.validate().unwrap();
            prop_assert!(binary_compatible(&z0, &z1, n).unwrap());
            prop_assert!(verify_binary_schedule(&z0, &z1, &sched).unwrap());
            prop_assert!(common::binary_ok_literal(&z0.values, &z1.values, &sched));
        }
    }

    #[test]
    fn binary_check_is_the_literal_definition(l0 in 1usize..12, l1 in 1usize..12, seed: u64) {
        let mut s = RngStream::new(seed, 4);
        let z0 = gen_bernoulli(0.4, l0, &mut s).unwrap();
        let z1 = gen_bernoulli(0.4, l1, &mut s).unwrap();
        let sched = random_schedule(&mut s, l0, l1);
        prop_assert_eq!(
            verify_binary_schedule(&z0, &z1, &sched).unwrap(),
            common::binary_ok_literal(&z0.values, &z1.values, &sched)
        );
    }

    #[test]
    fn streams_are_reproducible(seed: u64, idx: u64, m in 2u32..=8, n in 1usize..200, loops: bool) {
        let a = gen_walk(m, n, loops, &mut RngStream::new(seed, idx)).unwrap();
        let b = gen_walk(m, n, loops, &mut RngStream::new(seed, idx)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.values.iter().all(|&v| (1..=m).contains(&v)));
        if !loops {
            prop_assert!(a.values.windows(2).all(|w| w[0] != w[1]));
        }
        let p = gen_bernoulli(0.3, n, &mut RngStream::new(seed, idx)).unwrap();
        let q = gen_bernoulli(0.3, n, &mut RngStream::new(seed, idx)).unwrap();
        prop_assert_eq!(p, q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curves_are_deterministic_and_non_increasing(m in 3u32..=5, seed: u64) {
        let ns = [4, 8, 16, 32];
        let a = blocking_curve(m, &ns, 200, seed, false).unwrap();
        let b = blocking_curve(m, &ns, 200, seed, false).unwrap();
        prop_assert_eq!(&a, &b);
        for w in a.windows(2) {
            prop_assert!(w[1].escapes <= w[0].escapes);
        }
        for p in &a {
            prop_assert!(p.escapes <= p.trials);
        }
    }
}

/// A level-3 mazery, built once: its cleanness carries the level-2 walls.
fn level3() -> &'static Mazery {
    static M: OnceLock<Mazery> = OnceLock::new();
    M.get_or_init(|| {
        let (x, y) = walks(4, 1024, false, 11);
        toy::tower(&x, &y, 1024, 3, &Estimator::default())
            .unwrap()
            .pop()
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cleanness_is_graded_and_monotone(horizontal: bool, pick in 0usize..1000, off in -30i64..60, len in 1i64..200, strong: bool) {
        let m = level3();
        let d = if horizontal { Dir::Horizontal } else { Dir::Vertical };
        let lower = &m.cleanness.layers[1].walls[d.idx()];
        prop_assume!(!lower.is_empty());
        let w = lower.as_slice()[pick % lower.len()];
        let x = (w.body.b + off).clamp(0, m.n as i64 - 2);
        let cl = &m.cleanness;
        let delta = m.params.delta;
        // as the right end of (a, x]
        let a = (x - len).max(-1);
        prop_assert!(!cl.clean_right(d, a, x, true) || cl.clean_right(d, a, x, false));
        if a > -1 {
            prop_assert!(!cl.clean_right(d, a - 1, x, strong) || cl.clean_right(d, a, x, strong));
        }
        let floor = (x - delta).max(-1);
        prop_assert_eq!(cl.clean_right(d, floor, x, strong), cl.clean_right(d, -1, x, strong));
        // as the left end of (x, b]
        let b = (x + len).min(m.n as i64 - 1);
        prop_assert!(!cl.clean_left(d, x, b, true) || cl.clean_left(d, x, b, false));
        if b < m.n as i64 - 1 {
            prop_assert!(!cl.clean_left(d, x, b + 1, strong) || cl.clean_left(d, x, b, strong));
        }
        let far = m.n as i64 - 1;
        if x + delta <= far {
            prop_assert_eq!(cl.clean_left(d, x, x + delta, strong), cl.clean_left(d, x, far, strong));
        }
    }
}

/// Walks with loops over six colors whose `x` is constant on a stretch, so that
/// the level-2 mazery has correlated traps.
fn planted(seed: u64, n: usize) -> (ColorSequence, ColorSequence) {
    let (mut x, y) = walks(6, n, true, seed);
    for v in &mut x.values[10..=40] {
        *v = 1;
    }
    (x, y)
}

fn level2(x: &ColorSequence, y: &ColorSequence) -> Mazery {
    toy::tower(x, y, x.len(), 2, &Estimator::default())
        .unwrap()
        .pop()
        .unwrap()
}

fn resample_outside(v: &mut [u32], lo: i64, hi: i64, s: &mut RngStream) {
    for (i, c) in v.iter_mut().enumerate() {
        if (i as i64) < lo || (i as i64) > hi {
            *c = 1 + s.below(6) as u32;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trap_verdicts_depend_only_on_their_rectangle(seed: u64, pick: usize, re: u64) {
        let (x, y) = planted(seed, 96);
        let m2 = level2(&x, &y);
        let traps: Vec<_> = m2.traps.explicit().copied().collect();
        prop_assume!(!traps.is_empty());
        let t = traps[pick % traps.len()];
        let mut s = RngStream::new(re, 0);
        let (mut x2, mut y2) = (x.clone(), y.clone());
        resample_outside(&mut x2.values, t.rect.x0, t.rect.x1, &mut s);
        resample_outside(&mut y2.values, t.rect.y0, t.rect.y1, &mut s);
        let again = level2(&x2, &y2);
        prop_assert!(again.traps.explicit().any(|u| *u == t), "{} lost", t);
    }

    #[test]
    fn barrier_verdicts_depend_only_on_their_body(seed: u64, pick: usize, re: u64, horizontal: bool) {
        let (x, y) = planted(seed, 96);
        let m2 = level2(&x, &y);
        let d = if horizontal { Dir::Horizontal } else { Dir::Vertical };
        let all: Vec<_> = m2.barriers(d).iter().collect();
        prop_assume!(!all.is_empty());
        let b = all[pick % all.len()];
        let mut s = RngStream::new(re, 0);
        let (mut x2, mut y2) = (x.clone(), y.clone());
        let seq = if horizontal { &mut y2.values } else { &mut x2.values };
        resample_outside(seq, b.body.a + 1, b.body.b, &mut s);
        let again = level2(&x2, &y2);
        prop_assert!(again.barriers(d).contains(b.body, b.rank), "{} lost", b.body);
    }
}
