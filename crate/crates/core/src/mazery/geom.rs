//! Right-closed intervals, closed rectangles and the two wall directions.

use std::fmt;

use crate::error::{invalid, Result};
use crate::percolation::RectKind;

/// The right-closed interval `(a, b]`, with `a >= -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub a: i64,
    pub b: i64,
}

impl Interval {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a < -1 || b <= a {
            return invalid(format!("interval ({a},{b}] needs b > a >= -1"));
        }
        Ok(Interval { a, b })
    }

    pub fn size(&self) -> i64 {
        self.b - self.a
    }

    /// Containment of `(o.a, o.b]` in `(a, b]` as sets of reals.
    pub fn contains(&self, o: &Interval) -> bool {
        o.a >= self.a && o.b <= self.b
    }

    pub fn intersects(&self, o: &Interval) -> bool {
        o.a < self.b && self.a < o.b
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}]", self.a, self.b)
    }
}

/// Vertical walls have bodies on the x axis and depend on `X`; horizontal ones on `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Vertical,
    Horizontal,
}

impl Dir {
    pub const BOTH: [Dir; 2] = [Dir::Vertical, Dir::Horizontal];

    pub fn idx(self) -> usize {
        match self {
            Dir::Vertical => 0,
            Dir::Horizontal => 1,
        }
    }

    pub fn other(self) -> Dir {
        match self {
            Dir::Vertical => Dir::Horizontal,
            Dir::Horizontal => Dir::Vertical,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dir::Vertical => "vertical",
            Dir::Horizontal => "horizontal",
        }
    }

    pub fn parse(s: &str) -> Option<Dir> {
        match s {
            "vertical" => Some(Dir::Vertical),
            "horizontal" => Some(Dir::Horizontal),
            _ => None,
        }
    }
}

/// Closed lattice rectangle `[x0,x1] x [y0,y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, x1: i64, y0: i64, y1: i64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn point(x: i64, y: i64) -> Self {
        Rect {
            x0: x,
            x1: x,
            y0: y,
            y1: y,
        }
    }

    /// The lattice points of `Rect^kind(u, v)` as a closed rectangle (possibly empty).
    pub fn from_corners(u: (i64, i64), v: (i64, i64), kind: RectKind) -> Self {
        match kind {
            RectKind::Closed => Rect::new(u.0, v.0, u.1, v.1),
            RectKind::LeftOpen => Rect::new(u.0 + 1, v.0, u.1, v.1),
            RectKind::BottomOpen => Rect::new(u.0, v.0, u.1 + 1, v.1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }

    /// Sup-metric distance between the corners.
    pub fn size(&self) -> i64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    pub fn contains(&self, o: &Rect) -> bool {
        o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1
    }

    pub fn intersect(&self, o: &Rect) -> Rect {
        Rect::new(
            self.x0.max(o.x0),
            self.x1.min(o.x1),
            self.y0.max(o.y0),
            self.y1.min(o.y1),
        )
    }

    pub fn hull(&self, o: &Rect) -> Rect {
        Rect::new(
            self.x0.min(o.x0),
            self.x1.max(o.x1),
            self.y0.min(o.y0),
            self.y1.max(o.y1),
        )
    }

    pub fn transpose(&self) -> Rect {
        Rect::new(self.y0, self.y1, self.x0, self.x1)
    }

    /// The projection on the axis of walls of direction `d`.
    pub fn along(&self, d: Dir) -> (i64, i64) {
        match d {
            Dir::Vertical => (self.x0, self.x1),
            Dir::Horizontal => (self.y0, self.y1),
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]x[{},{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// `min(slope, 1/slope)` for `u <= v` coordinatewise; zero when one side is flat.
pub fn minslope(u: (i64, i64), v: (i64, i64)) -> f64 {
    let dx = (v.0 - u.0) as f64;
    let dy = (v.1 - u.1) as f64;
    if dx <= 0.0 || dy <= 0.0 {
        return 0.0;
    }
    (dy / dx).min(dx / dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_set_relations() {
        let i = Interval::new(-1, 5).unwrap();
        assert_eq!(i.size(), 6);
        assert!(i.contains(&Interval::new(2, 5).unwrap()));
        assert!(!i.contains(&Interval::new(2, 6).unwrap()));
        assert!(!Interval::new(0, 3)
            .unwrap()
            .intersects(&Interval::new(3, 4).unwrap()));
        assert!(Interval::new(0, 3)
            .unwrap()
            .intersects(&Interval::new(2, 4).unwrap()));
        assert!(Interval::new(-2, 3).is_err());
        assert!(Interval::new(3, 3).is_err());
    }

    #[test]
    fn corners_to_lattice_rect() {
        let r = Rect::from_corners((1, 2), (4, 6), RectKind::LeftOpen);
        assert_eq!(r, Rect::new(2, 4, 2, 6));
        let r = Rect::from_corners((1, 2), (4, 6), RectKind::BottomOpen);
        assert_eq!(r, Rect::new(1, 4, 3, 6));
        assert_eq!(Rect::new(0, 2, 0, 3).size(), 3);
        assert!(Rect::from_corners((3, 3), (3, 3), RectKind::LeftOpen).is_empty());
    }

    #[test]
    fn minslope_is_symmetric() {
        assert_eq!(minslope((0, 0), (4, 2)), 0.5);
        assert_eq!(minslope((0, 0), (2, 4)), 0.5);
        assert_eq!(minslope((0, 0), (3, 0)), 0.0);
    }
}
