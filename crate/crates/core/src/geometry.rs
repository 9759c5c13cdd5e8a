//! Cone arithmetic, bisector projections, canonical triangles and the
//! negative-routing regions.
//!
//! Every computation is carried out in a *canonical frame*: the plane is
//! rotated so that the bisector of the relevant positive cone points along
//! `+y` and the apex sits at the origin. In that frame a canonical triangle is
//! `{ (x, y) : 0 <= y <= h, |x| <= y / sqrt(3) }`, its upper-left corner is
//! `a = (-h/sqrt(3), h)` and its upper-right corner is `b = (h/sqrt(3), h)`.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI, TAU};
use std::fmt;

use thiserror::Error;

/// Absolute tolerance used by region and triangle membership tests.
pub const EPS: f64 = 1e-9;

pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate pair: points {0} and {1} coincide")]
    DegeneratePair(Point, Point),
    #[error("swap arguments: {far} lies in a negative cone of {apex}")]
    SwapArguments { apex: Point, far: Point },
    #[error("use positive-routing path: {target} lies in a positive cone of {from}")]
    UsePositiveRouting { from: Point, target: Point },
    #[error("non-finite coordinate in {0}")]
    NonFinite(Point),
}

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(&self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation about the origin.
    pub fn rotate(&self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn unit(angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c, s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Polar angle of `v` normalized to `(0, 2π]`.
pub fn polar_angle(v: Point) -> f64 {
    let mut a = v.y.atan2(v.x);
    if a <= 0.0 {
        a += TAU;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// One of the six cones around an apex: `C_i` (positive) or `C̄_i` (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cone {
    pub sign: Sign,
    pub index: u8,
}

impl Cone {
    pub const fn positive(index: u8) -> Self {
        Cone { sign: Sign::Positive, index }
    }

    pub const fn negative(index: u8) -> Self {
        Cone { sign: Sign::Negative, index }
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    /// The antipodal cone: `C_i <-> C̄_i`.
    pub fn opposite(&self) -> Cone {
        match self.sign {
            Sign::Positive => Cone::negative(self.index),
            Sign::Negative => Cone::positive(self.index),
        }
    }

    /// Sector number in counter-clockwise order from the positive x-axis:
    /// `C̄1, C0, C̄2, C1, C̄0, C2`.
    pub fn sector(&self) -> usize {
        match (self.sign, self.index) {
            (Sign::Negative, 1) => 0,
            (Sign::Positive, 0) => 1,
            (Sign::Negative, 2) => 2,
            (Sign::Positive, 1) => 3,
            (Sign::Negative, 0) => 4,
            (Sign::Positive, 2) => 5,
            _ => unreachable!("cone index out of range"),
        }
    }

    pub fn from_sector(sector: usize) -> Cone {
        const ORDER: [Cone; 6] = [
            Cone::negative(1),
            Cone::positive(0),
            Cone::negative(2),
            Cone::positive(1),
            Cone::negative(0),
            Cone::positive(2),
        ];
        ORDER[sector % 6]
    }

    pub const ALL: [Cone; 6] = [
        Cone::positive(0),
        Cone::positive(1),
        Cone::positive(2),
        Cone::negative(0),
        Cone::negative(1),
        Cone::negative(2),
    ];
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Positive => write!(f, "C{}", self.index),
            Sign::Negative => write!(f, "N{}", self.index),
        }
    }
}

/// A system of six cones whose boundaries sit at `rotation + j·π/3`.
///
/// The default system (`rotation = 0`) is the one the half-θ6-graph is
/// defined on; rotated systems back the full-θ6-graph and k-fold unions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConeSystem {
    pub rotation: f64,
}

impl ConeSystem {
    pub const STANDARD: ConeSystem = ConeSystem { rotation: 0.0 };

    pub fn rotated(rotation: f64) -> Self {
        ConeSystem { rotation }
    }

    /// Cone of `apex` containing `other`. Cones are half-open: a direction
    /// lying exactly on a boundary ray belongs to the cone clockwise of it.
    pub fn cone_of(&self, apex: Point, other: Point) -> Result<Cone, GeometryError> {
        check_pair(apex, other)?;
        let mut rel = polar_angle(other.sub(apex)) - self.rotation;
        while rel <= 0.0 {
            rel += TAU;
        }
        while rel > TAU {
            rel -= TAU;
        }
        let sector = ((rel / FRAC_PI_3).ceil() as usize).clamp(1, 6) - 1;
        Ok(Cone::from_sector(sector))
    }

    /// Direction of the bisector of `cone`.
    pub fn bisector_angle(&self, cone: Cone) -> f64 {
        self.rotation + FRAC_PI_6 + cone.sector() as f64 * FRAC_PI_3
    }

    /// Angle by which world vectors are rotated clockwise to bring the
    /// bisector of positive cone `index` onto `+y`.
    fn frame_angle(&self, index: u8) -> f64 {
        self.rotation + f64::from(index) * 2.0 * FRAC_PI_3
    }

    /// Length of the projection of `other - apex` onto the bisector of the
    /// cone containing it.
    pub fn projection_distance(&self, apex: Point, other: Point) -> Result<f64, GeometryError> {
        let cone = self.cone_of(apex, other)?;
        Ok(self.projection_onto(apex, other, cone))
    }

    /// Projection of `other - apex` onto the bisector of an explicit cone.
    pub fn projection_onto(&self, apex: Point, other: Point, cone: Cone) -> f64 {
        other.sub(apex).dot(Point::unit(self.bisector_angle(cone)))
    }

    /// Signed offset of `other - apex` perpendicular to the bisector of `cone`.
    pub fn perpendicular_offset(&self, apex: Point, other: Point, cone: Cone) -> f64 {
        Point::unit(self.bisector_angle(cone)).cross(other.sub(apex))
    }

    pub fn canonical_triangle(&self, u: Point, v: Point) -> Result<CanonicalTriangle, GeometryError> {
        let cone = self.cone_of(u, v)?;
        if !cone.is_positive() {
            return Err(GeometryError::SwapArguments { apex: u, far: v });
        }
        let frame = Frame { origin: u, angle: self.frame_angle(cone.index) };
        let local = frame.to_local(v);
        let h = local.y;
        let half = h / SQRT3;
        Ok(CanonicalTriangle {
            apex: u,
            far_vertex: v,
            corner_a: frame.to_world(Point::new(-half, h)),
            corner_b: frame.to_world(Point::new(half, h)),
            midpoint_m: frame.to_world(Point::new(0.0, h)),
            side_length: 2.0 * half,
            alpha: local.x.abs().atan2(h),
            cone,
            frame,
        })
    }

    /// The unique canonical triangle of an unordered pair.
    pub fn pair_triangle(&self, p: Point, q: Point) -> Result<CanonicalTriangle, GeometryError> {
        if self.cone_of(p, q)?.is_positive() {
            self.canonical_triangle(p, q)
        } else {
            self.canonical_triangle(q, p)
        }
    }

    pub fn alpha_of(&self, u: Point, w: Point) -> Result<f64, GeometryError> {
        Ok(self.canonical_triangle(u, w)?.alpha)
    }

    pub fn regions(&self, s: Point, t: Point) -> Result<RegionSet, GeometryError> {
        let cone = self.cone_of(s, t)?;
        if cone.is_positive() {
            return Err(GeometryError::UsePositiveRouting { from: s, target: t });
        }
        let triangle = self.canonical_triangle(t, s)?;
        let local_s = triangle.frame.to_local(s);
        let j = cone.index;
        Ok(RegionSet {
            source: s,
            target: t,
            x0_cone: cone,
            x1_cone: Cone::positive((j + 1) % 3),
            x2_cone: Cone::positive((j + 2) % 3),
            corner_a: triangle.corner_a,
            corner_b: triangle.corner_b,
            height: local_s.y,
            source_x: local_s.x,
            triangle,
        })
    }
}

fn check_pair(p: Point, q: Point) -> Result<(), GeometryError> {
    if !p.is_finite() {
        return Err(GeometryError::NonFinite(p));
    }
    if !q.is_finite() {
        return Err(GeometryError::NonFinite(q));
    }
    if p == q {
        return Err(GeometryError::DegeneratePair(p, q));
    }
    Ok(())
}

/// Rigid motion taking world coordinates to a canonical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Point,
    pub angle: f64,
}

impl Frame {
    pub fn to_local(&self, p: Point) -> Point {
        p.sub(self.origin).rotate(-self.angle)
    }

    pub fn to_world(&self, p: Point) -> Point {
        p.rotate(self.angle).add(self.origin)
    }
}

/// The equilateral triangle `T_uv` bounded by the positive cone of `apex`
/// containing `far_vertex` and the perpendicular to its bisector through
/// `far_vertex`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalTriangle {
    pub apex: Point,
    pub far_vertex: Point,
    /// Upper-left corner in the canonical frame.
    pub corner_a: Point,
    /// Upper-right corner in the canonical frame.
    pub corner_b: Point,
    pub midpoint_m: Point,
    pub side_length: f64,
    /// Unsigned angle between `apex -> far_vertex` and `apex -> midpoint_m`.
    pub alpha: f64,
    pub cone: Cone,
    pub frame: Frame,
}

impl CanonicalTriangle {
    /// Height of the triangle, `|apex m|`.
    pub fn height(&self) -> f64 {
        self.side_length * SQRT3 / 2.0
    }

    /// Closed membership with `EPS` slack toward inclusion.
    pub fn contains(&self, p: Point) -> bool {
        let l = self.frame.to_local(p);
        let h = self.height();
        l.y >= -EPS && l.y <= h + EPS && l.x.abs() <= l.y / SQRT3 + EPS
    }

    /// Open membership with `EPS` slack toward exclusion.
    pub fn strictly_contains(&self, p: Point) -> bool {
        let l = self.frame.to_local(p);
        let h = self.height();
        l.y > EPS && l.y < h - EPS && l.x.abs() < l.y / SQRT3 - EPS
    }

    pub fn area(&self) -> f64 {
        SQRT3 / 4.0 * self.side_length * self.side_length
    }
}

/// `√3·cos α + sin α`: spanning and positive-routing bound at angle `α`.
pub fn positive_bound(alpha: f64) -> f64 {
    SQRT3 * alpha.cos() + alpha.sin()
}

/// `5/√3·cos α − sin α`: negative-routing bound at angle `α`.
pub fn negative_bound(alpha: f64) -> f64 {
    5.0 / SQRT3 * alpha.cos() - alpha.sin()
}

/// Spanning bound of the union of `k` rotated copies.
pub fn union_bound(k: usize) -> f64 {
    positive_bound(PI / (6.0 * k as f64))
}

/// One of the three parts into which the cones of `s` cut `T_ts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    X0,
    X1,
    X2,
}

/// The two sides of `T_ts` next to `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    X1,
    X2,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::X1 => Side::X2,
            Side::X2 => Side::X1,
        }
    }

    pub fn region(self) -> Region {
        match self {
            Side::X1 => Region::X1,
            Side::X2 => Region::X2,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::X1 => f.write_str("X1"),
            Side::X2 => f.write_str("X2"),
        }
    }
}

/// Split of `T_ts` by the cones of `s` when `t` lies in a negative cone of `s`.
///
/// `X0` is the negative cone of `s` containing `t`, `X1` is the equilateral
/// triangle `(a, s, ·)` of side `|as|` and `X2` the one of side `|sb|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSet {
    pub source: Point,
    pub target: Point,
    pub triangle: CanonicalTriangle,
    pub x0_cone: Cone,
    pub x1_cone: Cone,
    pub x2_cone: Cone,
    pub corner_a: Point,
    pub corner_b: Point,
    height: f64,
    source_x: f64,
}

impl RegionSet {
    pub fn dist_as(&self) -> f64 {
        self.source_x + self.height / SQRT3
    }

    pub fn dist_sb(&self) -> f64 {
        self.height / SQRT3 - self.source_x
    }

    pub fn dist_ta(&self) -> f64 {
        self.triangle.side_length
    }

    pub fn side_cone(&self, side: Side) -> Cone {
        match side {
            Side::X1 => self.x1_cone,
            Side::X2 => self.x2_cone,
        }
    }

    pub fn corner(&self, side: Side) -> Point {
        match side {
            Side::X1 => self.corner_a,
            Side::X2 => self.corner_b,
        }
    }

    /// Distance from `s` to the corner on `side`.
    pub fn corner_dist(&self, side: Side) -> f64 {
        match side {
            Side::X1 => self.dist_as(),
            Side::X2 => self.dist_sb(),
        }
    }

    /// The side with the shorter corner distance; ties go to `X1`.
    pub fn smaller_side(&self) -> Side {
        if self.dist_as() <= self.dist_sb() {
            Side::X1
        } else {
            Side::X2
        }
    }

    /// Region of `T_ts \ {s}` containing `p`, with `EPS` slack toward
    /// inclusion; `None` outside the triangle or at `s`.
    pub fn classify(&self, p: Point) -> Option<Region> {
        if p == self.source || !self.triangle.contains(p) {
            return None;
        }
        let l = self.triangle.frame.to_local(p);
        let dx = l.x - self.source_x;
        let dy = l.y - self.height;
        if dx.abs() <= -dy / SQRT3 + EPS {
            Some(Region::X0)
        } else if dx < 0.0 {
            Some(Region::X1)
        } else {
            Some(Region::X2)
        }
    }

    pub fn contains(&self, region: Region, p: Point) -> bool {
        self.classify(p) == Some(region)
    }

    /// Which side of the line `s -> t` a point outside `T_ts` falls on when
    /// viewed from `s`: `X1` for the side of corner `a`.
    pub fn side_of_line(&self, p: Point) -> Side {
        let l = self.triangle.frame.to_local(p);
        let ls = Point::new(self.source_x, self.height);
        // t is the frame origin
        if ls.scale(-1.0).cross(l.sub(ls)) < 0.0 {
            Side::X1
        } else {
            Side::X2
        }
    }

    /// Polygon corners of a region in world coordinates (counter-clockwise).
    pub fn polygon(&self, region: Region) -> Vec<Point> {
        let s = self.source;
        let ray_left = Point::unit(4.0 * FRAC_PI_3);
        let ray_right = Point::unit(5.0 * FRAC_PI_3);
        let f = &self.triangle.frame;
        let ls = f.to_local(s);
        let p1 = f.to_world(ls.add(ray_left.scale(self.dist_as())));
        let p2 = f.to_world(ls.add(ray_right.scale(self.dist_sb())));
        match region {
            Region::X0 => vec![s, p1, self.target, p2],
            Region::X1 => vec![self.corner_a, p1, s],
            Region::X2 => vec![s, p2, self.corner_b],
        }
    }

    /// Unsigned area of a region.
    pub fn area(&self, region: Region) -> f64 {
        polygon_area(&self.polygon(region)).abs()
    }

    /// Polar angle of `p` around `s` inside the frame of `T_ts`, in `(0, 2π]`.
    /// Within `X0`, decreasing angle is clockwise order around `s`.
    pub fn angle_around_source(&self, p: Point) -> f64 {
        let f = &self.triangle.frame;
        polar_angle(f.to_local(p).sub(f.to_local(self.source)))
    }
}

/// Signed shoelace area.
pub fn polygon_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum::<f64>() / 2.0
}

pub fn cone_of(apex: Point, other: Point) -> Result<Cone, GeometryError> {
    ConeSystem::STANDARD.cone_of(apex, other)
}

pub fn projection_distance(apex: Point, other: Point) -> Result<f64, GeometryError> {
    ConeSystem::STANDARD.projection_distance(apex, other)
}

pub fn canonical_triangle(u: Point, v: Point) -> Result<CanonicalTriangle, GeometryError> {
    ConeSystem::STANDARD.canonical_triangle(u, v)
}

pub fn alpha_of(u: Point, w: Point) -> Result<f64, GeometryError> {
    ConeSystem::STANDARD.alpha_of(u, w)
}

pub fn regions(s: Point, t: Point) -> Result<RegionSet, GeometryError> {
    ConeSystem::STANDARD.regions(s, t)
}
