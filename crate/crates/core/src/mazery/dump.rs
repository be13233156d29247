//! Line-oriented text dump of a mazery, including the lower-level objects its
//! cleanness is made of. Objects are listed in a stable order, so dumps of the
//! same construction are byte-identical.
//!
//! ```text
//! mazery-dump 1
//! seqs m=3 loops=false n=6
//! x 1 2 3 1 2 3
//! y 2 1 2 3 1 2
//! exps delta=0.15 ...
//! layer level=1 delta=1 f=4 g=2
//! traps closed-points
//! top
//! params level=2 delta=42 ...
//! margin 84
//! traps uncorrelated f=4 base=1
//! traps explicit
//! trap correlated-1 0 28 5 10
//! barrier vertical emerging-1 5 87.5 12-20,25
//! wall vertical emerging-1 5 20 87.5
//! end
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use super::clean::{CleanLayer, CleannessRelations, End};
use super::conditions::{check_conditions, ConditionReport};
use super::geom::{Dir, Interval, Rect};
use super::traps::{Seqs, Trap, TrapKind, TrapLayer, TrapStore};
use super::walls::{BarrierGroup, BarrierSet, WallKind, WallList, WallStatus, WallValue};
use super::{Mazery, MazeryParams};
use crate::error::{invalid, LabError, Result};
use crate::params::ExponentSet;

const HEADER: &str = "mazery-dump 1";

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn ranges(g: &BarrierGroup) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut run: Option<(i64, i64)> = None;
    for b in g.ends() {
        run = match run {
            Some((lo, hi)) if b == hi + 1 => Some((lo, b)),
            Some((lo, hi)) => {
                out.push(if lo == hi {
                    lo.to_string()
                } else {
                    format!("{lo}-{hi}")
                });
                Some((b, b))
            }
            None => Some((b, b)),
        };
    }
    if let Some((lo, hi)) = run {
        out.push(if lo == hi {
            lo.to_string()
        } else {
            format!("{lo}-{hi}")
        });
    }
    out.join(",")
}

fn dump_store(out: &mut String, store: &TrapStore, layers: &[CleanLayer]) -> Result<()> {
    let mut explicit: Vec<Trap> = Vec::new();
    for l in &store.layers {
        match l {
            TrapLayer::ClosedPoints => out.push_str("traps closed-points\n"),
            TrapLayer::Uncorrelated { base, f } => {
                let k = layers
                    .iter()
                    .find(|c| Arc::ptr_eq(&c.traps, base))
                    .ok_or_else(|| {
                        LabError::InvalidParameter(
                            "uncorrelated trap layer over a store that is not a lower level".into(),
                        )
                    })?;
                writeln!(out, "traps uncorrelated f={f} base={}", k.level).unwrap();
            }
            TrapLayer::Explicit(v) => explicit.extend(v.iter().copied()),
        }
    }
    explicit.sort_unstable();
    explicit.dedup();
    out.push_str("traps explicit\n");
    for t in explicit {
        let r = t.rect;
        writeln!(
            out,
            "trap {} {} {} {} {}",
            t.kind.name(),
            r.x0,
            r.x1,
            r.y0,
            r.y1
        )
        .unwrap();
    }
    Ok(())
}

fn dump_objects(out: &mut String, walls: &[Arc<WallList>; 2], barriers: &[Arc<BarrierSet>; 2]) {
    for d in Dir::BOTH {
        for g in barriers[d.idx()].groups() {
            writeln!(
                out,
                "barrier {} {} {} {} {}",
                d.name(),
                g.kind.label(),
                g.a,
                g.rank,
                ranges(g)
            )
            .unwrap();
        }
        for w in walls[d.idx()].as_slice() {
            writeln!(
                out,
                "wall {} {} {} {} {}",
                d.name(),
                w.kind.label(),
                w.body.a,
                w.body.b,
                w.rank
            )
            .unwrap();
        }
    }
}

fn params_line(p: &MazeryParams) -> String {
    format!(
        "params level={} delta={} f={} g={} lambda={} big_l={} w={} sigma={} q={} r={} rank_cap={} r_star={} \
         r_hat={} delta_star={} log_base={} d={}",
        p.level,
        p.delta,
        p.f,
        p.g,
        join(&p.lambda, ","),
        join(&p.big_l, ","),
        p.w,
        p.sigma,
        p.q,
        p.r,
        p.rank_cap,
        p.r_star,
        p.r_hat,
        p.delta_star,
        p.log_base,
        join(&p.d, ",")
    )
}

pub fn dump(m: &Mazery) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "seqs m={} loops={} n={}", m.seqs.m, m.seqs.loops, m.n).unwrap();
    writeln!(out, "x {}", join(&m.seqs.x, " ")).unwrap();
    writeln!(out, "y {}", join(&m.seqs.y, " ")).unwrap();
    writeln!(out, "exps {}", m.params.exps).unwrap();
    let layers = &m.cleanness.layers;
    for (k, l) in layers.iter().enumerate() {
        writeln!(
            out,
            "layer level={} delta={} f={} g={}",
            l.level, l.delta, l.f, l.g
        )
        .unwrap();
        dump_store(&mut out, &l.traps, &layers[..k])?;
        dump_objects(&mut out, &l.walls, &l.barriers);
    }
    out.push_str("top\n");
    writeln!(out, "{}", params_line(&m.params)).unwrap();
    writeln!(out, "margin {}", m.margin).unwrap();
    dump_store(&mut out, &m.traps, layers)?;
    dump_objects(&mut out, &m.walls, &m.barriers);
    for (d, x, end) in &m.cleanness.revoked {
        let e = match end {
            End::Left => "left",
            End::Right => "right",
        };
        writeln!(out, "revoke {} {x} {e}", d.name()).unwrap();
    }
    for l in &m.log {
        writeln!(out, "log {}", l.replace('\n', " ")).unwrap();
    }
    out.push_str("end\n");
    Ok(out)
}

enum LayerSpec {
    ClosedPoints,
    Uncorrelated { base: u32, f: i64 },
}

struct Section {
    level: u32,
    delta: i64,
    f: f64,
    g: f64,
    store: Vec<LayerSpec>,
    explicit: Vec<Trap>,
    walls: [Vec<WallValue>; 2],
    groups: [Vec<BarrierGroup>; 2],
}

impl Section {
    fn new() -> Self {
        Section {
            level: 0,
            delta: 0,
            f: 0.0,
            g: 0.0,
            store: Vec::new(),
            explicit: Vec::new(),
            walls: Default::default(),
            groups: Default::default(),
        }
    }
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parse {
        line,
        msg: msg.into(),
    })
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| LabError::Parse {
        line,
        msg: format!("{s:?}: {e}"),
    })
}

fn kv<'a>(line: usize, tok: &'a str, key: &str) -> Result<&'a str> {
    match tok.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => perr(line, format!("expected {key}=..., got {tok:?}")),
    }
}

fn list<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|t| num(line, t)).collect()
}

fn parse_params(line: usize, toks: &[&str], exps: &ExponentSet) -> Result<MazeryParams> {
    let keys = [
        "level",
        "delta",
        "f",
        "g",
        "lambda",
        "big_l",
        "w",
        "sigma",
        "q",
        "r",
        "rank_cap",
        "r_star",
        "r_hat",
        "delta_star",
        "log_base",
        "d",
    ];
    if toks.len() != keys.len() {
        return perr(line, format!("params needs {} fields", keys.len()));
    }
    let v: Vec<&str> = toks
        .iter()
        .zip(keys)
        .map(|(t, k)| kv(line, t, k))
        .collect::<Result<_>>()?;
    let lambda: Vec<i64> = list(line, v[4])?;
    let big_l: Vec<i64> = list(line, v[5])?;
    if lambda.len() != 2 || big_l.len() != 3 {
        return perr(line, "lambda needs 2 and big_l 3 entries");
    }
    Ok(MazeryParams {
        level: num(line, v[0])?,
        delta: num(line, v[1])?,
        f: num(line, v[2])?,
        g: num(line, v[3])?,
        lambda: [lambda[0], lambda[1]],
        big_l: [big_l[0], big_l[1], big_l[2]],
        w: num(line, v[6])?,
        sigma: num(line, v[7])?,
        q: num(line, v[8])?,
        r: num(line, v[9])?,
        rank_cap: num(line, v[10])?,
        r_star: num(line, v[11])?,
        r_hat: num(line, v[12])?,
        delta_star: num(line, v[13])?,
        log_base: num(line, v[14])?,
        d: list(line, v[15])?,
        exps: exps.clone(),
    })
}

fn parse_ends(line: usize, a: i64, s: &str, g: &mut BarrierGroup) -> Result<()> {
    for part in s.split(',') {
        let (lo, hi) = match part.split_once('-') {
            Some((lo, hi)) => (num::<i64>(line, lo)?, num::<i64>(line, hi)?),
            None => {
                let b = num::<i64>(line, part)?;
                (b, b)
            }
        };
        if lo <= a || hi < lo {
            return perr(
                line,
                format!("bad right-end range {part:?} for left end {a}"),
            );
        }
        g.insert_range(lo, hi);
    }
    Ok(())
}

fn seq_line(line: usize, s: &str, tag: &str, m: u32, n: usize) -> Result<Vec<u32>> {
    let rest = s.strip_prefix(tag).ok_or_else(|| LabError::Parse {
        line,
        msg: format!("expected {tag:?} line"),
    })?;
    let v: Vec<u32> = rest
        .split_whitespace()
        .map(|t| num(line, t))
        .collect::<Result<_>>()?;
    if v.len() != n || v.iter().any(|&c| c == 0 || c > m) {
        return perr(line, format!("sequence needs {n} colors in 1..={m}"));
    }
    Ok(v)
}

/// Rebuild a mazery (without sampling model) from its dump.
pub fn parse_dump(text: &str) -> Result<Mazery> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().copied() != Some(HEADER) {
        return perr(1, format!("missing header {HEADER:?}"));
    }
    let get = |i: usize| {
        lines.get(i).copied().ok_or(LabError::Parse {
            line: i + 1,
            msg: "unexpected end".into(),
        })
    };
    let st: Vec<&str> = get(1)?.split_whitespace().collect();
    if st.len() != 4 || st[0] != "seqs" {
        return perr(2, "expected seqs m=.. loops=.. n=..");
    }
    let m: u32 = num(2, kv(2, st[1], "m")?)?;
    let loops: bool = num(2, kv(2, st[2], "loops")?)?;
    let n: usize = num(2, kv(2, st[3], "n")?)?;
    let x = seq_line(3, get(2)?, "x", m, n)?;
    let y = seq_line(4, get(3)?, "y", m, n)?;
    let mut exps = ExponentSet::default();
    let et = get(4)?.strip_prefix("exps ").ok_or(LabError::Parse {
        line: 5,
        msg: "expected exps".into(),
    })?;
    for tok in et.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or(LabError::Parse {
            line: 5,
            msg: format!("bad {tok:?}"),
        })?;
        exps.set(k, v).map_err(|e| LabError::Parse {
            line: 5,
            msg: e.to_string(),
        })?;
    }

    let mut sections: Vec<Section> = Vec::new();
    let mut top: Option<(MazeryParams, i64)> = None;
    let mut in_top = false;
    let mut revoked = Vec::new();
    let mut log = Vec::new();
    let mut cur = Section::new();
    let mut ended = false;
    for (i, &l) in lines.iter().enumerate().skip(5) {
        let ln = i + 1;
        if ended {
            if !l.trim().is_empty() {
                return perr(ln, "content after end");
            }
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.first().copied() {
            Some("layer") => {
                if in_top {
                    return perr(ln, "layer after top");
                }
                if toks.len() != 5 {
                    return perr(ln, "layer needs level, delta, f, g");
                }
                if cur.level > 0 {
                    sections.push(std::mem::replace(&mut cur, Section::new()));
                }
                cur.level = num(ln, kv(ln, toks[1], "level")?)?;
                cur.delta = num(ln, kv(ln, toks[2], "delta")?)?;
                cur.f = num(ln, kv(ln, toks[3], "f")?)?;
                cur.g = num(ln, kv(ln, toks[4], "g")?)?;
            }
            Some("top") => {
                if cur.level > 0 {
                    sections.push(std::mem::replace(&mut cur, Section::new()));
                }
                in_top = true;
            }
            Some("params") if in_top => top = Some((parse_params(ln, &toks[1..], &exps)?, 0)),
            Some("margin") if in_top => {
                let t = top.as_mut().ok_or(LabError::Parse {
                    line: ln,
                    msg: "margin before params".into(),
                })?;
                t.1 = num(ln, toks.get(1).copied().unwrap_or(""))?;
            }
            Some("traps") => match toks.get(1).copied() {
                Some("closed-points") => cur.store.push(LayerSpec::ClosedPoints),
                Some("uncorrelated") if toks.len() == 4 => {
                    let f = num(ln, kv(ln, toks[2], "f")?)?;
                    let base = num(ln, kv(ln, toks[3], "base")?)?;
                    cur.store.push(LayerSpec::Uncorrelated { base, f });
                }
                Some("explicit") => {}
                _ => return perr(ln, format!("unknown trap layer {l:?}")),
            },
            Some("trap") => {
                if toks.len() != 6 {
                    return perr(ln, "trap needs kind x0 x1 y0 y1");
                }
                let kind = TrapKind::parse(toks[1]).ok_or(LabError::Parse {
                    line: ln,
                    msg: format!("trap kind {:?}", toks[1]),
                })?;
                let c: Vec<i64> = toks[2..]
                    .iter()
                    .map(|t| num(ln, t))
                    .collect::<Result<_>>()?;
                let rect = Rect::new(c[0], c[1], c[2], c[3]);
                if rect.is_empty() {
                    return perr(ln, "empty trap rectangle");
                }
                cur.explicit.push(Trap { rect, kind });
            }
            Some("barrier") => {
                if toks.len() != 6 {
                    return perr(ln, "barrier needs dir kind a rank ends");
                }
                let d = Dir::parse(toks[1]).ok_or(LabError::Parse {
                    line: ln,
                    msg: format!("direction {:?}", toks[1]),
                })?;
                let kind = WallKind::parse(toks[2]).ok_or(LabError::Parse {
                    line: ln,
                    msg: format!("kind {:?}", toks[2]),
                })?;
                let a: i64 = num(ln, toks[3])?;
                if a < -1 {
                    return perr(ln, "left end below -1");
                }
                let mut g = BarrierGroup::new(a, num(ln, toks[4])?, kind);
                parse_ends(ln, a, toks[5], &mut g)?;
                cur.groups[d.idx()].push(g);
            }
            Some("wall") => {
                if toks.len() != 6 {
                    return perr(ln, "wall needs dir kind a b rank");
                }
                let d = Dir::parse(toks[1]).ok_or(LabError::Parse {
                    line: ln,
                    msg: format!("direction {:?}", toks[1]),
                })?;
                let kind = WallKind::parse(toks[2]).ok_or(LabError::Parse {
                    line: ln,
                    msg: format!("kind {:?}", toks[2]),
                })?;
                let body = Interval::new(num(ln, toks[3])?, num(ln, toks[4])?).map_err(|e| {
                    LabError::Parse {
                        line: ln,
                        msg: e.to_string(),
                    }
                })?;
                cur.walls[d.idx()].push(WallValue {
                    body,
                    rank: num(ln, toks[5])?,
                    dir: d,
                    status: WallStatus::Wall,
                    kind,
                });
            }
            Some("revoke") if in_top => {
                if toks.len() != 4 {
                    return perr(ln, "revoke needs dir x end");
                }
                let d = Dir::parse(toks[1]).ok_or(LabError::Parse {
                    line: ln,
                    msg: format!("direction {:?}", toks[1]),
                })?;
                let end = match toks[3] {
                    "left" => End::Left,
                    "right" => End::Right,
                    e => return perr(ln, format!("end {e:?}")),
                };
                revoked.push((d, num::<i64>(ln, toks[2])?, end));
            }
            Some("log") if in_top => log.push(l.strip_prefix("log ").unwrap_or("").to_string()),
            Some("end") if in_top => ended = true,
            _ => return perr(ln, format!("unexpected line {l:?}")),
        }
    }
    if !ended {
        return perr(lines.len(), "missing end");
    }
    let (params, margin) = top.ok_or(LabError::Parse {
        line: lines.len(),
        msg: "missing params".into(),
    })?;

    let mut clean = CleannessRelations::base();
    let mut stores: Vec<(u32, Arc<TrapStore>)> = Vec::new();
    let build_store =
        |sec: &mut Section, stores: &[(u32, Arc<TrapStore>)]| -> Result<TrapStore> {
            let mut layers = Vec::new();
            for l in sec.store.drain(..) {
                layers.push(match l {
                    LayerSpec::ClosedPoints => TrapLayer::ClosedPoints,
                    LayerSpec::Uncorrelated { base, f } => {
                        let b = stores.iter().find(|(k, _)| *k == base).ok_or_else(|| {
                            LabError::Parse {
                                line: 0,
                                msg: format!("uncorrelated layer refers to missing level {base}"),
                            }
                        })?;
                        TrapLayer::Uncorrelated {
                            base: b.1.clone(),
                            f,
                        }
                    }
                });
            }
            let mut ex = std::mem::take(&mut sec.explicit);
            ex.sort_unstable();
            layers.push(TrapLayer::Explicit(ex));
            Ok(TrapStore { layers })
        };
    for mut sec in sections {
        let store = Arc::new(build_store(&mut sec, &stores)?);
        stores.push((sec.level, store.clone()));
        let [wv, wh] = std::mem::take(&mut sec.walls);
        let [gv, gh] = std::mem::take(&mut sec.groups);
        clean = clean.with_layer(CleanLayer {
            level: sec.level,
            delta: sec.delta,
            f: sec.f,
            g: sec.g,
            walls: [
                Arc::new(WallList::new(Dir::Vertical, wv)),
                Arc::new(WallList::new(Dir::Horizontal, wh)),
            ],
            barriers: [
                Arc::new(BarrierSet::from_groups(Dir::Vertical, gv)),
                Arc::new(BarrierSet::from_groups(Dir::Horizontal, gh)),
            ],
            traps: store,
        });
    }
    let store = build_store(&mut cur, &stores)?;
    for (d, x, e) in revoked {
        clean.revoke(d, x, e);
    }
    let [wv, wh] = std::mem::take(&mut cur.walls);
    let [gv, gh] = std::mem::take(&mut cur.groups);
    let mut out = Mazery::from_parts(
        params,
        Seqs::new(m, loops, x, y),
        store,
        [wv, wh],
        [
            BarrierSet::from_groups(Dir::Vertical, gv),
            BarrierSet::from_groups(Dir::Horizontal, gh),
        ],
        clean,
        margin,
    )?;
    out.log = log;
    Ok(out)
}

/// Parse a dump and re-run the condition checks on it.
pub fn check_dump(text: &str) -> Result<ConditionReport> {
    let m = parse_dump(text)?;
    if m.n == 0 {
        return invalid("empty window");
    }
    Ok(check_conditions(&m))
}
