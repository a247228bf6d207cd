//! Planar primitives for midsagittal measurements.
//!
//! Coordinates are millimeters with `+x` anterior and `+y` superior, origin at
//! the maxillary incisor tip. Everything here is a pure function of its
//! inputs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Twice-triangle-area threshold (mm²) below which three points count as collinear.
pub const TOL_COLLINEAR: f64 = 1e-6;

/// Minimum separation (mm) for an angle to be measurable.
pub const TOL_ANGLE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("points are collinear (twice triangle area {area:.3e} mm² below tolerance)")]
    CollinearPoints { area: f64 },
    #[error("circle fit normal equations are singular")]
    DegenerateFit,
    #[error("ray does not intersect the polyline")]
    NoIntersection,
    #[error("angle undefined: point within {TOL_ANGLE:e} mm of reference center")]
    DegenerateAngle,
    #[error("invalid circle: radius {0} must be positive and finite")]
    InvalidCircle(f64),
    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),
}

/// A position in the midsagittal plane, millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Linear interpolation, `t = 0` gives `self`, `t = 1` gives `other`.
    pub fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2D {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2D {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2D,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point2D, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(GeometryError::InvalidCircle(radius));
        }
        Ok(Self { center, radius })
    }

    /// Point on the circle at angle `theta` measured from `+y` toward `+x`.
    pub fn point_at(&self, theta: f64) -> Point2D {
        let (s, c) = theta.sin_cos();
        self.center + Point2D::new(s, c) * self.radius
    }
}

/// Ordered point sequence with at least two points and no zero-length segments.
///
/// Anatomical traces are stored anterior-most first (palate) or
/// superior-most first (pharyngeal walls).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2D>", into = "Vec<Point2D>")]
pub struct Polyline {
    points: Vec<Point2D>,
}

impl Polyline {
    pub fn new(points: Vec<Point2D>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::InvalidPolyline(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidPolyline(format!(
                "point {i} is not finite"
            )));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::InvalidPolyline(format!(
                "points {i} and {} coincide",
                i + 1
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point2D {
        self.points[0]
    }

    pub fn last(&self) -> Point2D {
        self.points[self.points.len() - 1]
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Iterates `(start, end)` pairs in order.
    pub fn segments(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn translated(&self, offset: Point2D) -> Self {
        Self {
            points: self.points.iter().map(|&p| p + offset).collect(),
        }
    }

    pub fn into_points(self) -> Vec<Point2D> {
        self.points
    }
}

impl TryFrom<Vec<Point2D>> for Polyline {
    type Error = GeometryError;
    fn try_from(points: Vec<Point2D>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<Polyline> for Vec<Point2D> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

/// Minimizer of a clearance query against a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearanceResult {
    /// Signed for circles (negative = penetration), non-negative for points.
    pub distance: f64,
    pub closest_trace_point: Point2D,
    pub closest_object_point: Point2D,
    pub segment_index: usize,
}

pub fn distance(p: Point2D, q: Point2D) -> f64 {
    (p - q).norm()
}

/// Circle through three points.
pub fn circumcircle(a: Point2D, b: Point2D, c: Point2D) -> Result<Circle, GeometryError> {
    let ab = b - a;
    let ac = c - a;
    let area2 = ab.cross(ac);
    if area2.abs() < TOL_COLLINEAR {
        return Err(GeometryError::CollinearPoints { area: area2.abs() });
    }
    let d = 2.0 * area2;
    let ab2 = ab.norm_squared();
    let ac2 = ac.norm_squared();
    // center relative to `a`
    let u = Point2D::new(
        (ac.y * ab2 - ab.y * ac2) / d,
        (ab.x * ac2 - ac.x * ab2) / d,
    );
    Circle::new(a + u, u.norm())
}

/// Algebraic least-squares (Kåsa) circle fit.
///
/// Minimizes `Σ (‖pᵢ − c‖² − r²)²`. The data are centered on their centroid
/// before forming the 2×2 normal equations, which keeps the system well
/// conditioned for traces far from the origin. Exact (to rounding) when all
/// points lie on one circle.
pub fn fit_circle(points: &[Point2D]) -> Result<Circle, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateFit);
    }
    check_spread(points)?;

    let n = points.len() as f64;
    let mean = points
        .iter()
        .fold(Point2D::default(), |acc, &p| acc + p)
        * (1.0 / n);

    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    let (mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0);
    for &p in points {
        let u = p.x - mean.x;
        let v = p.y - mean.y;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }

    let det = suu * svv - suv * suv;
    let scale = (suu + svv) * (suu + svv);
    if det.is_nan() || det.abs() <= 1e-14 * scale {
        return Err(GeometryError::DegenerateFit);
    }
    let rhs_u = 0.5 * (suuu + suvv);
    let rhs_v = 0.5 * (svvv + svuu);
    let uc = (rhs_u * svv - rhs_v * suv) / det;
    let vc = (suu * rhs_v - suv * rhs_u) / det;

    let radius = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    Circle::new(mean + Point2D::new(uc, vc), radius)
}

/// Rejects point sets whose spread is collinear under [`TOL_COLLINEAR`].
///
/// Takes the chord between the first point and the point farthest from it;
/// the set is collinear when every point makes a triangle with that chord of
/// twice-area below tolerance.
fn check_spread(points: &[Point2D]) -> Result<(), GeometryError> {
    let a = points[0];
    let b = points
        .iter()
        .copied()
        .max_by(|p, q| distance(a, *p).total_cmp(&distance(a, *q)))
        .unwrap_or(a);
    let chord = b - a;
    let area = points
        .iter()
        .map(|&p| chord.cross(p - a).abs())
        .fold(0.0, f64::max);
    if area < TOL_COLLINEAR {
        Err(GeometryError::CollinearPoints { area })
    } else {
        Ok(())
    }
}

/// Distance from `p` to segment `[a, b]` and the attaining point.
pub fn point_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> (f64, Point2D) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let closest = if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        a + ab * t
    };
    (distance(p, closest), closest)
}

/// Minimum distance from `p` to `trace`; ties go to the lowest segment index.
pub fn point_polyline_clearance(p: Point2D, trace: &Polyline) -> ClearanceResult {
    let mut best = ClearanceResult {
        distance: f64::INFINITY,
        closest_trace_point: trace.first(),
        closest_object_point: p,
        segment_index: 0,
    };
    for (i, (a, b)) in trace.segments().enumerate() {
        let (d, q) = point_segment_distance(p, a, b);
        if d < best.distance {
            best.distance = d;
            best.closest_trace_point = q;
            best.segment_index = i;
        }
    }
    best
}

/// Signed clearance between a circle boundary and a polyline.
///
/// `distance` is the closest approach of the trace to the circle center minus
/// the radius, so it is negative when the trace enters the disc.
/// `closest_object_point` lies on the circle along the ray from the center to
/// the closest trace point. If the trace passes exactly through the center
/// that ray is undefined and the left normal of the closest segment is used.
pub fn circle_polyline_clearance(circle: &Circle, trace: &Polyline) -> ClearanceResult {
    let mut result = point_polyline_clearance(circle.center, trace);
    let offset = result.closest_trace_point - circle.center;
    let reach = offset.norm();
    let direction = if reach > 0.0 {
        offset * (1.0 / reach)
    } else {
        let seg = trace.points()[result.segment_index + 1] - trace.points()[result.segment_index];
        Point2D::new(-seg.y, seg.x) * (1.0 / seg.norm())
    };
    result.distance = reach - circle.radius;
    result.closest_object_point = circle.center + direction * circle.radius;
    result
}

/// First crossing of the ray from `b` along `b − a` with `wall`.
///
/// Returns the intersection point and the wall segment index. The ray starts
/// at parameter zero, so `b` lying on the wall is itself a hit. Among equal
/// parameters the lowest segment index wins.
pub fn extend_line_to_polyline(
    a: Point2D,
    b: Point2D,
    wall: &Polyline,
) -> Result<(Point2D, usize), GeometryError> {
    let dir = b - a;
    let dir_len = dir.norm();
    if dir_len == 0.0 {
        return Err(GeometryError::NoIntersection);
    }
    // relative slack on the unit-length parameters
    const EPS: f64 = 1e-12;

    let mut best: Option<(f64, Point2D, usize)> = None;
    for (i, (p, q)) in wall.segments().enumerate() {
        let e = q - p;
        let denom = dir.cross(e);
        let bp = p - b;
        let hit = if denom.abs() > EPS * dir_len * e.norm() {
            // b + t·dir = p + s·e
            let t = bp.cross(e) / denom;
            let s = bp.cross(dir) / denom;
            if t >= -EPS && (-EPS..=1.0 + EPS).contains(&s) {
                let s = s.clamp(0.0, 1.0);
                let point = if s == 0.0 {
                    p
                } else if s == 1.0 {
                    q
                } else {
                    p + e * s
                };
                Some((t.max(0.0), point))
            } else {
                None
            }
        } else if bp.cross(dir).abs() <= EPS * dir_len * bp.norm().max(1.0) {
            // collinear: nearest part of the segment that is ahead of b
            let inv = 1.0 / dir.norm_squared();
            let tp = (p - b).dot(dir) * inv;
            let tq = (q - b).dot(dir) * inv;
            let (lo, hi) = if tp <= tq { (tp, tq) } else { (tq, tp) };
            if hi < 0.0 {
                None
            } else if lo >= 0.0 {
                Some((lo, if tp <= tq { p } else { q }))
            } else {
                Some((0.0, b))
            }
        } else {
            None
        };
        if let Some((t, point)) = hit {
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, point, i));
            }
        }
    }
    best.map(|(_, p, i)| (p, i))
        .ok_or(GeometryError::NoIntersection)
}

/// Angle of the ray `center → p` measured from `+y`, positive toward `+x`.
///
/// Range is `(−π, π]`.
pub fn angle_from_reference(center: Point2D, p: Point2D) -> Result<f64, GeometryError> {
    let d = p - center;
    if d.norm() < TOL_ANGLE {
        return Err(GeometryError::DegenerateAngle);
    }
    let theta = d.x.atan2(d.y);
    Ok(if theta <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        theta
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn pt(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    fn line(points: &[(f64, f64)]) -> Polyline {
        Polyline::new(points.iter().map(|&(x, y)| pt(x, y)).collect()).unwrap()
    }

    fn rotate(p: Point2D, angle: f64, shift: Point2D) -> Point2D {
        let (s, c) = angle.sin_cos();
        pt(c * p.x - s * p.y, s * p.x + c * p.y) + shift
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(pt(0.0, 0.0), pt(3.0, 4.0)), 5.0);
        assert_eq!(distance(pt(2.0, 7.0), pt(2.0, 7.0)), 0.0);
        assert_eq!(distance(pt(-1.5, 2.0), pt(4.5, -6.0)), 10.0);
    }

    #[test]
    fn circumcircle_examples() {
        let c = circumcircle(pt(1.0, 0.0), pt(0.0, 1.0), pt(-1.0, 0.0)).unwrap();
        assert!(distance(c.center, pt(0.0, 0.0)) < 1e-15);
        assert!((c.radius - 1.0).abs() < 1e-15);

        let err = circumcircle(pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)).unwrap_err();
        assert!(matches!(err, GeometryError::CollinearPoints { .. }));

        let c = circumcircle(pt(0.0, 0.0), pt(2.0, 0.0), pt(0.0, 2.0)).unwrap();
        assert!(distance(c.center, pt(1.0, 1.0)) < 1e-15);
        assert!((c.radius - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn circumcircle_rejects_near_collinear() {
        // twice-area 5e-7 < 1e-6
        let err = circumcircle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, 5e-7)).unwrap_err();
        assert!(matches!(err, GeometryError::CollinearPoints { .. }));
        assert!(circumcircle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, 2e-6)).is_ok());
    }

    #[test]
    fn fit_circle_three_points_matches_circumcircle() {
        let (a, b, c) = (pt(-3.0, 1.0), pt(4.0, 2.5), pt(0.5, -6.0));
        let fit = fit_circle(&[a, b, c]).unwrap();
        let cc = circumcircle(a, b, c).unwrap();
        assert!(distance(fit.center, cc.center) < 1e-9 * cc.radius);
        assert!((fit.radius - cc.radius).abs() < 1e-9 * cc.radius);
    }

    #[test]
    fn fit_circle_exact_sixteen_points() {
        let truth = Circle::new(pt(3.0, -2.0), 5.0).unwrap();
        let pts: Vec<_> = (0..16)
            .map(|k| truth.point_at(k as f64 * 2.0 * PI / 16.0))
            .collect();
        let fit = fit_circle(&pts).unwrap();
        assert!(distance(fit.center, truth.center) < 1e-9 * 5.0);
        assert!((fit.radius - 5.0).abs() < 1e-9 * 5.0);
    }

    /// Kåsa objective evaluated directly from its definition.
    fn kasa_objective(points: &[Point2D], cx: f64, cy: f64, r: f64) -> f64 {
        points
            .iter()
            .map(|p| {
                let d2 = (p.x - cx).powi(2) + (p.y - cy).powi(2);
                (d2 - r * r).powi(2)
            })
            .sum()
    }

    /// Coarse-to-fine grid search over (cx, cy, r).
    fn kasa_grid_search(points: &[Point2D], guess: (f64, f64, f64)) -> (f64, f64, f64) {
        let (mut cx, mut cy, mut r) = guess;
        let mut half = 0.5;
        for _ in 0..12 {
            let step = half / 10.0;
            let mut best = (f64::INFINITY, cx, cy, r);
            for i in -10..=10 {
                for j in -10..=10 {
                    for k in -10..=10 {
                        let (x, y, rr) = (
                            cx + i as f64 * step,
                            cy + j as f64 * step,
                            r + k as f64 * step,
                        );
                        let f = kasa_objective(points, x, y, rr);
                        if f < best.0 {
                            best = (f, x, y, rr);
                        }
                    }
                }
            }
            (cx, cy, r) = (best.1, best.2, best.3);
            half = step * 2.0;
        }
        (cx, cy, r)
    }

    #[test]
    fn fit_circle_noisy_matches_grid_search_oracle() {
        let center = pt(12.0, -4.0);
        let radius = 8.0;
        let eps = 0.05;
        let pts: Vec<_> = (0..24)
            .map(|k| {
                let theta = k as f64 * 2.0 * PI / 24.0;
                let r = if k % 2 == 0 { radius + eps } else { radius - eps };
                Circle::new(center, r).unwrap().point_at(theta)
            })
            .collect();
        let fit = fit_circle(&pts).unwrap();
        let (gx, gy, gr) = kasa_grid_search(&pts, (center.x + 0.2, center.y - 0.1, radius + 0.3));
        assert!((fit.center.x - gx).abs() < 1e-6, "{} vs {gx}", fit.center.x);
        assert!((fit.center.y - gy).abs() < 1e-6, "{} vs {gy}", fit.center.y);
        assert!((fit.radius - gr).abs() < 1e-6, "{} vs {gr}", fit.radius);
        assert!(distance(fit.center, center) <= 2.0 * eps);
    }

    #[test]
    fn fit_circle_rejects_collinear() {
        let pts: Vec<_> = (0..10).map(|i| pt(i as f64, 2.0 * i as f64 - 1.0)).collect();
        assert!(matches!(
            fit_circle(&pts),
            Err(GeometryError::CollinearPoints { .. })
        ));
        assert!(fit_circle(&pts[..2]).is_err());
    }

    #[test]
    fn point_segment_examples() {
        let (d, q) = point_segment_distance(pt(0.0, 1.0), pt(-1.0, 0.0), pt(1.0, 0.0));
        assert_eq!((d, q), (1.0, pt(0.0, 0.0)));
        let (d, q) = point_segment_distance(pt(3.0, 1.0), pt(-1.0, 0.0), pt(1.0, 0.0));
        assert!((d - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(q, pt(1.0, 0.0));
        let (d, q) = point_segment_distance(pt(0.25, 0.0), pt(-1.0, 0.0), pt(1.0, 0.0));
        assert_eq!((d, q), (0.0, pt(0.25, 0.0)));
    }

    #[test]
    fn point_polyline_examples() {
        let r = point_polyline_clearance(pt(0.0, 0.0), &line(&[(-1.0, 2.0), (1.0, 2.0)]));
        assert_eq!(r.distance, 2.0);
        assert_eq!(r.closest_trace_point, pt(0.0, 2.0));

        let trace = line(&[(-1.0, 2.0), (1.0, 2.0), (3.0, 0.0)]);
        let r = point_polyline_clearance(pt(1.0, 2.0), &trace);
        assert_eq!(r.distance, 0.0);
        // shared vertex: lowest segment index wins
        assert_eq!(r.segment_index, 0);
    }

    #[test]
    fn point_polyline_dense_half_circle() {
        let pts: Vec<_> = (0..721)
            .map(|k| {
                let theta = -PI / 2.0 + k as f64 * PI / 720.0;
                Circle::new(pt(0.0, 0.0), 10.0).unwrap().point_at(theta)
            })
            .collect();
        let trace = Polyline::new(pts).unwrap();
        let r = point_polyline_clearance(pt(0.0, 0.0), &trace);
        assert!((r.distance - 10.0).abs() < 5e-3);

        // brute force: 10⁶ samples spread along the trace
        let per_seg = 1_000_000 / trace.segment_count();
        let brute = trace
            .segments()
            .flat_map(|(a, b)| (0..=per_seg).map(move |k| a.lerp(b, k as f64 / per_seg as f64)))
            .map(|q| q.norm())
            .fold(f64::INFINITY, f64::min);
        assert!((r.distance - brute).abs() < 1e-6);
    }

    #[test]
    fn circle_polyline_examples() {
        let arc: Vec<_> = (0..721)
            .map(|k| {
                let theta = -PI / 2.0 + k as f64 * PI / 720.0;
                Circle::new(pt(0.0, 0.0), 10.0).unwrap().point_at(theta)
            })
            .collect();
        let trace = Polyline::new(arc).unwrap();
        let circle = Circle::new(pt(0.0, 0.0), 4.0).unwrap();
        let r = circle_polyline_clearance(&circle, &trace);
        assert!((r.distance - 6.0).abs() < 5e-3);

        // brute force: 10⁵ circle samples against exact segment distances
        let brute = (0..100_000)
            .map(|k| circle.point_at(k as f64 * 2.0 * PI / 1e5))
            .map(|q| point_polyline_clearance(q, &trace).distance)
            .fold(f64::INFINITY, f64::min);
        assert!((r.distance - brute).abs() < 1e-3);

        let tangent = line(&[(-3.0, 4.0), (0.0, 4.0), (3.0, 5.0)]);
        let r = circle_polyline_clearance(&circle, &tangent);
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.closest_object_point, pt(0.0, 4.0));

        let through = line(&[(-3.0, 3.0), (0.0, 2.0), (3.0, 3.0)]);
        let r = circle_polyline_clearance(&circle, &through);
        assert_eq!(r.distance, -2.0);
        assert_eq!(r.closest_trace_point, pt(0.0, 2.0));
        assert_eq!(r.closest_object_point, pt(0.0, 4.0));
    }

    #[test]
    fn circle_polyline_through_center_uses_segment_normal() {
        let circle = Circle::new(pt(0.0, 0.0), 2.0).unwrap();
        let r = circle_polyline_clearance(&circle, &line(&[(-1.0, 0.0), (1.0, 0.0)]));
        assert_eq!(r.distance, -2.0);
        assert!(distance(r.closest_object_point, pt(0.0, 2.0)) < 1e-15);
    }

    #[test]
    fn extend_line_examples() {
        let wall = line(&[(-74.2, 40.0), (-74.2, -40.0)]);
        let (p, i) = extend_line_to_polyline(pt(-20.0, 15.0), pt(-25.0, 14.0), &wall).unwrap();
        assert_eq!(i, 0);
        assert_eq!(p.x, -74.2);
        assert!((p.y - 4.16).abs() < 1e-9);

        // parallel, non-collinear
        let err = extend_line_to_polyline(pt(-70.0, 10.0), pt(-70.0, 5.0), &wall).unwrap_err();
        assert_eq!(err, GeometryError::NoIntersection);

        // b already on the wall
        let (p, _) = extend_line_to_polyline(pt(-60.0, 3.0), pt(-74.2, 3.0), &wall).unwrap();
        assert_eq!(p, pt(-74.2, 3.0));

        // ray pointing away
        let err = extend_line_to_polyline(pt(-25.0, 14.0), pt(-20.0, 15.0), &wall).unwrap_err();
        assert_eq!(err, GeometryError::NoIntersection);
    }

    #[test]
    fn extend_line_takes_first_crossing() {
        let wall = line(&[(-50.0, 20.0), (-50.0, -20.0), (-80.0, -20.0), (-80.0, 20.0)]);
        let (p, i) = extend_line_to_polyline(pt(0.0, 0.0), pt(-10.0, 0.0), &wall).unwrap();
        assert_eq!(i, 0);
        assert_eq!(p, pt(-50.0, 0.0));
    }

    #[test]
    fn extend_line_collinear_wall() {
        let wall = line(&[(-30.0, 0.0), (-40.0, 0.0)]);
        let (p, _) = extend_line_to_polyline(pt(0.0, 0.0), pt(-10.0, 0.0), &wall).unwrap();
        assert_eq!(p, pt(-30.0, 0.0));
    }

    #[test]
    fn angle_examples() {
        let o = pt(0.0, 0.0);
        assert_eq!(angle_from_reference(o, pt(0.0, 1.0)).unwrap(), 0.0);
        assert!((angle_from_reference(o, pt(1.0, 1.0)).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((angle_from_reference(o, pt(-1.0, -1.0)).unwrap() + 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert_eq!(angle_from_reference(o, pt(0.0, -1.0)).unwrap(), PI);
        assert_eq!(angle_from_reference(o, pt(-0.0, -1.0)).unwrap(), PI);
        assert_eq!(
            angle_from_reference(o, pt(1e-10, 0.0)),
            Err(GeometryError::DegenerateAngle)
        );
    }

    #[test]
    fn polyline_rejects_bad_input() {
        assert!(Polyline::new(vec![pt(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![pt(0.0, 0.0), pt(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![pt(0.0, 0.0), pt(f64::NAN, 1.0)]).is_err());
        assert!(Circle::new(pt(0.0, 0.0), 0.0).is_err());
        assert!(Circle::new(pt(0.0, 0.0), f64::INFINITY).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -50.0..50.0f64
    }

    fn point() -> impl Strategy<Value = Point2D> {
        (coord(), coord()).prop_map(|(x, y)| pt(x, y))
    }

    fn polyline() -> impl Strategy<Value = Polyline> {
        (point(), prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..8)).prop_filter_map(
            "degenerate",
            |(start, steps)| {
                let mut pts = vec![start];
                for (dx, dy) in steps {
                    let last = *pts.last().unwrap();
                    pts.push(last + pt(dx, dy));
                }
                Polyline::new(pts).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(p in point(), q in point(), r in point()) {
            prop_assert_eq!(distance(p, q), distance(q, p));
            prop_assert!(distance(p, q) >= 0.0);
            prop_assert!(distance(p, r) <= distance(p, q) + distance(q, r) + 1e-12);
        }

        #[test]
        fn circumcircle_is_equidistant(a in point(), b in point(), c in point()) {
            prop_assume!((b - a).cross(c - a).abs() >= TOL_COLLINEAR);
            let circle = circumcircle(a, b, c).unwrap();
            for p in [a, b, c] {
                prop_assert!((distance(circle.center, p) - circle.radius).abs() <= 1e-9 * circle.radius);
            }
        }

        #[test]
        fn point_clearance_matches_brute_force(p in point(), trace in polyline()) {
            let got = point_polyline_clearance(p, &trace);
            prop_assume!(got.distance >= 0.25);
            let brute = trace
                .segments()
                .flat_map(|(a, b)| (0..=10_000).map(move |k| a.lerp(b, k as f64 / 1e4)))
                .map(|q| distance(p, q))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(got.distance <= brute + 1e-12);
            prop_assert!((got.distance - brute).abs() <= 1e-6);
            let (a, b) = (trace.points()[got.segment_index], trace.points()[got.segment_index + 1]);
            prop_assert!(point_segment_distance(got.closest_trace_point, a, b).0 <= 1e-9);
        }

        #[test]
        fn rigid_motion_equivariance(
            a in point(), b in point(), c in point(),
            trace in polyline(),
            angle in -PI..PI,
            shift in point(),
            radius in 0.5..20.0f64,
        ) {
            prop_assume!((b - a).cross(c - a).abs() >= 1.0);
            let m = |p: Point2D| rotate(p, angle, shift);
            let rel = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);

            prop_assert!(rel(distance(a, b), distance(m(a), m(b))));
            prop_assert!(rel(
                circumcircle(a, b, c).unwrap().radius,
                circumcircle(m(a), m(b), m(c)).unwrap().radius
            ));
            prop_assert!(rel(
                fit_circle(&[a, b, c, a.lerp(b, 0.3)]).unwrap().radius,
                fit_circle(&[m(a), m(b), m(c), m(a.lerp(b, 0.3))]).unwrap().radius
            ));

            let moved = Polyline::new(trace.points().iter().map(|&p| m(p)).collect()).unwrap();
            prop_assert!(rel(
                point_polyline_clearance(a, &trace).distance,
                point_polyline_clearance(m(a), &moved).distance
            ));
            let circle = Circle::new(a, radius).unwrap();
            let moved_circle = Circle::new(m(a), radius).unwrap();
            prop_assert!(rel(
                circle_polyline_clearance(&circle, &trace).distance,
                circle_polyline_clearance(&moved_circle, &moved).distance
            ));

            // rotation by +angle in the xy-plane turns +y toward −x, so the
            // clockwise-from-+y angle shifts by −angle
            prop_assume!(distance(a, b) > 1e-3);
            let before = angle_from_reference(a, b).unwrap();
            let after = angle_from_reference(m(a), m(b)).unwrap();
            let delta = (after - before + angle).rem_euclid(2.0 * PI);
            prop_assert!(delta < 1e-9 || 2.0 * PI - delta < 1e-9);
        }

        #[test]
        fn extension_hit_lies_on_ray_and_wall(
            a in point(), b in point(), trace in polyline()
        ) {
            prop_assume!(distance(a, b) > 1e-3);
            if let Ok((hit, i)) = extend_line_to_polyline(a, b, &trace) {
                let (p, q) = (trace.points()[i], trace.points()[i + 1]);
                prop_assert!(point_segment_distance(hit, p, q).0 <= 1e-9);
                let dir = (b - a) * (1.0 / distance(a, b));
                prop_assert!(dir.cross(hit - b).abs() <= 1e-9);
                prop_assert!(dir.dot(hit - b) >= -1e-9);
            }
        }
    }
}
