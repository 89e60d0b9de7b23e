//! Planar primitives: vectors, poses, wall segments, ray casting.
//!
//! All distances are meters, all angles radians. Headings live in
//! `[-pi, pi)`. Range readings are tagged: a beam either hits within its
//! max range or reports [`Reading::OutOfRange`] — there is no sentinel
//! "large number", callers must branch.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// 2D vector / point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Direction angle, `atan2(y, x)`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Normalize an angle into `[-pi, pi)`.
pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    // rem_euclid can return exactly two_pi's upper bound after rounding.
    if r >= std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Robot pose: position plus heading in `[-pi, pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Pose {
            position,
            heading: normalize_angle(heading),
        }
    }
}

/// Wall segment between two endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

/// One range-beam result: a hit distance in meters, or out of range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reading {
    Hit(f64),
    OutOfRange,
}

impl Reading {
    /// The hit distance, if any.
    pub fn hit(self) -> Option<f64> {
        match self {
            Reading::Hit(r) => Some(r),
            Reading::OutOfRange => None,
        }
    }

    pub fn is_out_of_range(self) -> bool {
        matches!(self, Reading::OutOfRange)
    }
}

/// Distance along a ray from `origin` in direction `dir` (unit vector) to
/// segment `s`, if they intersect with t >= 0.
pub fn ray_segment_intersection(origin: Vec2, dir: Vec2, s: &Segment) -> Option<f64> {
    let e = s.b - s.a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        // Parallel (collinear grazing has measure zero; treat as a miss).
        return None;
    }
    let ao = s.a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Cast a ray against a wall set. Returns the nearest hit strictly inside
/// `max_range`, else [`Reading::OutOfRange`].
pub fn ray_cast(origin: Vec2, direction: f64, walls: &[Segment], max_range: f64) -> Reading {
    let dir = Vec2::from_angle(direction);
    let mut best = f64::INFINITY;
    for w in walls {
        if let Some(t) = ray_segment_intersection(origin, dir, w) {
            if t < best {
                best = t;
            }
        }
    }
    if best < max_range {
        Reading::Hit(best)
    } else {
        Reading::OutOfRange
    }
}

/// Euclidean distance from point `p` to segment `s`.
pub fn segment_distance(p: Vec2, s: &Segment) -> f64 {
    let e = s.b - s.a;
    let len_sq = e.norm_sq();
    if len_sq == 0.0 {
        return p.dist(s.a);
    }
    let t = ((p - s.a).dot(e) / len_sq).clamp(0.0, 1.0);
    p.dist(s.a + e * t)
}

fn on_segment(p: Vec2, s: &Segment) -> bool {
    p.x >= s.a.x.min(s.b.x) - 1e-12
        && p.x <= s.a.x.max(s.b.x) + 1e-12
        && p.y >= s.a.y.min(s.b.y) - 1e-12
        && p.y <= s.a.y.max(s.b.y) + 1e-12
}

/// True iff two segments share at least one point.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    let d1 = s1.b - s1.a;
    let d2 = s2.b - s2.a;
    let denom = d1.cross(d2);
    let ao = s2.a - s1.a;
    if denom.abs() < 1e-15 {
        // Parallel: intersect only if collinear and overlapping.
        if ao.cross(d1).abs() > 1e-12 {
            return false;
        }
        return on_segment(s2.a, s1)
            || on_segment(s2.b, s1)
            || on_segment(s1.a, s2)
            || on_segment(s1.b, s2);
    }
    let t = ao.cross(d2) / denom;
    let u = ao.cross(d1) / denom;
    (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)
}

/// Minimum distance between two segments (0 when they intersect).
pub fn segment_segment_distance(s1: &Segment, s2: &Segment) -> f64 {
    if segments_intersect(s1, s2) {
        return 0.0;
    }
    segment_distance(s1.a, s2)
        .min(segment_distance(s1.b, s2))
        .min(segment_distance(s2.a, s1))
        .min(segment_distance(s2.b, s1))
}

/// True iff the motion step `prev -> cur` intersects the line segment
/// `m_line` or passes within `tol` of it. Symmetric in `prev`/`cur`.
pub fn crosses_m_line(prev: Vec2, cur: Vec2, m_line: &Segment, tol: f64) -> bool {
    let step = Segment::new(prev, cur);
    segment_segment_distance(&step, m_line) <= tol
}
