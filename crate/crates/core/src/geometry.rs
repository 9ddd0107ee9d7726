//! Exact planar predicates on coordinates that share one power-of-two
//! denominator. Only the numerators are stored; every predicate here is
//! scale invariant, so the denominator never enters the arithmetic.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the plane, stored as integer numerators over the denominator
/// of the graph it belongs to. The derived order is lexicographic, x first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coordinate {
    pub x: i64,
    pub y: i64,
}

impl Coordinate {
    pub const fn new(x: i64, y: i64) -> Self {
        Coordinate { x, y }
    }

    pub fn offset(self, dx: i64, dy: i64) -> Self {
        Coordinate::new(self.x + dx, self.y + dy)
    }

    /// Difference vector `self - other` in numerator units.
    pub fn minus(self, other: Coordinate) -> (i64, i64) {
        (self.x - other.x, self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

fn sign_of(v: i128) -> Sign {
    match v.cmp(&0) {
        Ordering::Less => Sign::Negative,
        Ordering::Equal => Sign::Zero,
        Ordering::Greater => Sign::Positive,
    }
}

fn cross(a: (i64, i64), b: (i64, i64)) -> i128 {
    a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128
}

fn dot(a: (i64, i64), b: (i64, i64)) -> i128 {
    a.0 as i128 * b.0 as i128 + a.1 as i128 * b.1 as i128
}

/// Orientation of the triple: positive when `c` lies to the left of `a -> b`.
pub fn orient2d(a: Coordinate, b: Coordinate, c: Coordinate) -> Sign {
    sign_of(cross(b.minus(a), c.minus(a)))
}

/// True when `p` lies strictly inside the segment `a b`.
pub fn in_segment_interior(p: Coordinate, a: Coordinate, b: Coordinate) -> bool {
    if p == a || p == b || orient2d(a, b, p) != Sign::Zero {
        return false;
    }
    let within = |lo: i64, hi: i64, v: i64| lo.min(hi) <= v && v <= lo.max(hi);
    within(a.x, b.x, p.x) && within(a.y, b.y, p.y)
}

/// Segments `a b` and `c d` cross at a point that is an endpoint of neither.
///
/// Segments that share an endpoint never cross. Touching configurations
/// (an endpoint on the other segment) are not crossings; graphs reject them
/// separately because they put a vertex on an edge.
pub fn segments_cross(a: Coordinate, b: Coordinate, c: Coordinate, d: Coordinate) -> bool {
    if a == c || a == d || b == c || b == d {
        return false;
    }
    let opposite = |s: Sign, t: Sign| {
        matches!(
            (s, t),
            (Sign::Positive, Sign::Negative) | (Sign::Negative, Sign::Positive)
        )
    };
    opposite(orient2d(a, b, c), orient2d(a, b, d)) && opposite(orient2d(c, d, a), orient2d(c, d, b))
}

/// Index of a lattice direction (axis or diagonal), counted counterclockwise
/// from east in eighth turns.
fn lattice_direction(v: (i64, i64)) -> Option<i32> {
    let (dx, dy) = v;
    if dx == 0 && dy == 0 {
        return None;
    }
    if dx != 0 && dy != 0 && dx.abs() != dy.abs() {
        return None;
    }
    Some(match (dx.signum(), dy.signum()) {
        (1, 0) => 0,
        (1, 1) => 1,
        (0, 1) => 2,
        (-1, 1) => 3,
        (-1, 0) => 4,
        (-1, -1) => 5,
        (0, -1) => 6,
        _ => 7,
    })
}

/// Signed angle, counterclockwise positive, from vector `a` to vector `b`.
/// Fails when either vector is zero or `b` points straight back along `a`.
pub fn vector_turn(a: (i64, i64), b: (i64, i64)) -> Result<f64> {
    if a == (0, 0) || b == (0, 0) {
        return Err(Error::Geometry("zero-length step".into()));
    }
    let c = cross(a, b);
    if c == 0 && dot(a, b) < 0 {
        return Err(Error::Geometry("turn of angle pi (backtracking)".into()));
    }
    if let (Some(ia), Some(ib)) = (lattice_direction(a), lattice_direction(b)) {
        let mut k = (ib - ia).rem_euclid(8);
        if k > 4 {
            k -= 8;
        }
        return Ok(k as f64 * FRAC_PI_4);
    }
    Ok((c as f64).atan2(dot(a, b) as f64))
}

/// Turning angle at `v` when walking `u -> v -> w`.
pub fn turning_angle(u: Coordinate, v: Coordinate, w: Coordinate) -> Result<f64> {
    vector_turn(v.minus(u), w.minus(v))
}

fn upper_half(v: (i64, i64)) -> bool {
    v.1 > 0 || (v.1 == 0 && v.0 > 0)
}

/// Compares the arguments of two nonzero vectors in `[0, 2pi)`.
pub fn argument_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    match (upper_half(a), upper_half(b)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => 0.cmp(&cross(a, b)),
    }
}

/// True when direction `p` lies strictly inside the counterclockwise arc that
/// starts at direction `from` and ends at direction `to`.
pub fn strictly_inside_ccw_arc(from: (i64, i64), to: (i64, i64), p: (i64, i64)) -> bool {
    let after_from = argument_cmp(from, p) == Ordering::Less;
    let before_to = argument_cmp(p, to) == Ordering::Less;
    match argument_cmp(from, to) {
        Ordering::Less => after_from && before_to,
        Ordering::Greater => after_from || before_to,
        Ordering::Equal => argument_cmp(from, p) != Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(x: i64, y: i64) -> Coordinate {
        Coordinate::new(x, y)
    }

    #[test]
    fn turning_angles_follow_ccw_convention() {
        assert_eq!(turning_angle(c(0, 0), c(1, 0), c(1, 1)).unwrap(), FRAC_PI_2);
        assert_eq!(turning_angle(c(0, 0), c(1, 0), c(2, 0)).unwrap(), 0.0);
        assert_eq!(turning_angle(c(0, 0), c(1, 0), c(1, -1)).unwrap(), -FRAC_PI_2);
        assert!(turning_angle(c(0, 0), c(1, 0), c(0, 0)).is_err());
        assert!(turning_angle(c(0, 0), c(2, 0), c(1, 0)).is_err());
    }

    #[test]
    fn off_lattice_turn_uses_atan2() {
        let t = turning_angle(c(0, 0), c(2, 0), c(3, 2)).unwrap();
        assert!((t - 2f64.atan2(1.0)).abs() < 1e-15);
    }

    #[test]
    fn diagonals_of_unit_square_cross() {
        assert!(segments_cross(c(0, 0), c(1, 1), c(0, 1), c(1, 0)));
        assert!(!segments_cross(c(0, 0), c(1, 1), c(1, 1), c(2, 0)));
        assert!(!segments_cross(c(0, 0), c(1, 0), c(0, 1), c(1, 1)));
    }

    #[test]
    fn touching_is_not_crossing() {
        assert!(!segments_cross(c(0, 0), c(2, 0), c(1, 0), c(1, 1)));
        assert!(in_segment_interior(c(1, 0), c(0, 0), c(2, 0)));
        assert!(!in_segment_interior(c(2, 0), c(0, 0), c(2, 0)));
    }

    #[test]
    fn arcs() {
        assert!(strictly_inside_ccw_arc((1, 0), (0, 1), (1, 1)));
        assert!(!strictly_inside_ccw_arc((1, 0), (0, 1), (-1, -1)));
        assert!(strictly_inside_ccw_arc((0, 1), (1, 0), (-1, -1)));
        assert!(!strictly_inside_ccw_arc((0, 1), (1, 0), (0, 1)));
    }
}
