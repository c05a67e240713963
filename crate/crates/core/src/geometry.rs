//! Fermat–Torricelli points of triangles.
//!
//! The Fermat–Torricelli point minimizes `|AF| + |BF| + |CF|`. When every
//! interior angle is below 120° it is the unique interior point seeing each
//! side under 120° and has a closed form; otherwise it is the vertex with the
//! wide angle. Degenerate triangles are resolved to their exact geometric
//! medians. [`weiszfeld`] solves the same minimization iteratively for any
//! number of points and serves as the reference the closed form is checked
//! against.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::par;

/// Default tolerance used by [`classify`].
pub const DEFAULT_ANGLE_TOL: f64 = 1e-12;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (*self - other).norm()
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// An ordered vertex triple. Vertex order is preserved as given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Point2; 3],
}

impl Triangle {
    pub fn new(a: impl Into<Point2>, b: impl Into<Point2>, c: impl Into<Point2>) -> Self {
        Triangle {
            v: [a.into(), b.into(), c.into()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(Point2::is_finite)
    }

    pub fn centroid(&self) -> Point2 {
        let [a, b, c] = self.v;
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Interior angle at vertex `i` in radians.
    pub fn angle(&self, i: usize) -> f64 {
        vertex_cosine(&self.v, i).clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Collinear,
    CoincidentVertices,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleClass {
    /// All angles below 120°; the Fermat–Torricelli point is interior.
    InteriorCase,
    /// The angle at this vertex is at least 120°.
    ObtuseVertex(usize),
    Degenerate(Degeneracy),
}

/// Pairwise vertex distances `(v0,v1)`, `(v0,v2)`, `(v1,v2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLengths {
    pub r12: f64,
    pub r13: f64,
    pub r23: f64,
}

impl SideLengths {
    pub fn max(&self) -> f64 {
        self.r12.max(self.r13).max(self.r23)
    }
}

pub fn side_lengths(t: &Triangle) -> SideLengths {
    let [a, b, c] = t.v;
    SideLengths {
        r12: a.distance(b),
        r13: a.distance(c),
        r23: b.distance(c),
    }
}

/// `S = x1 y2 + x3 y1 + x2 y3 - x1 y3 - x2 y1 - x3 y2`, twice the signed area.
/// Positive for counter-clockwise vertex order.
pub fn signed_area_2x(t: &Triangle) -> f64 {
    let [p1, p2, p3] = t.v;
    let (x1, y1, x2, y2, x3, y3) = (p1.x, p1.y, p2.x, p2.y, p3.x, p3.y);
    x1 * y2 + x3 * y1 + x2 * y3 - x1 * y3 - x2 * y1 - x3 * y2
}

fn vertex_cosine(v: &[Point2; 3], i: usize) -> f64 {
    let p = v[i];
    let u = v[(i + 1) % 3] - p;
    let w = v[(i + 2) % 3] - p;
    u.dot(w) / (u.norm() * w.norm())
}

pub fn classify(t: &Triangle, angle_tol: f64) -> TriangleClass {
    let sides = side_lengths(t);
    let longest = sides.max();
    if longest == 0.0 || sides.r12.min(sides.r13).min(sides.r23) <= angle_tol * longest {
        return TriangleClass::Degenerate(Degeneracy::CoincidentVertices);
    }
    // Twice the area, computed relative to v0 to avoid cancellation far from the origin.
    let [a, b, c] = t.v;
    let area2 = (b - a).cross(c - a);
    if area2.abs() <= angle_tol * longest * longest {
        return TriangleClass::Degenerate(Degeneracy::Collinear);
    }
    let (widest, cosine) = (0..3)
        .map(|i| (i, vertex_cosine(&t.v, i)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three vertices");
    if cosine <= -0.5 + angle_tol {
        TriangleClass::ObtuseVertex(widest)
    } else {
        TriangleClass::InteriorCase
    }
}

/// Closed-form Fermat–Torricelli point for a triangle whose angles are all
/// below 120°.
///
/// With `d = (r12² + r13² + r23²)/2 + √3·|S|` the point is
/// `(X, Y) / (2√3·d)` where
///
/// ```text
/// X = √3(x1 r23² + x2 r13² + x3 r12²) + (x1 + x2 + x3)|S|
///     + 3 sign(S) [(y2 - y1)(x1x2 + y1y2) + (y1 - y3)(x1x3 + y1y3) + (y3 - y2)(x2x3 + y2y3)]
/// Y = √3(y1 r23² + y2 r13² + y3 r12²) + (y1 + y2 + y3)|S|
///     + 3 sign(S) [(x1 - x2)(x1x2 + y1y2) + (x3 - x1)(x1x3 + y1y3) + (x2 - x3)(x2x3 + y2y3)]
/// ```
///
/// The formula is evaluated in coordinates centred on the centroid.
pub fn fermat_point_closed_form(t: &Triangle) -> Result<Point2> {
    match classify(t, DEFAULT_ANGLE_TOL) {
        TriangleClass::InteriorCase => {}
        other => {
            return Err(Error::Domain(format!(
                "closed form requires all angles below 120 degrees, triangle is {other:?}"
            )))
        }
    }
    let origin = t.centroid();
    let local = Triangle {
        v: t.v.map(|p| p - origin),
    };
    let [p1, p2, p3] = local.v;
    let (x1, y1, x2, y2, x3, y3) = (p1.x, p1.y, p2.x, p2.y, p3.x, p3.y);

    let sq12 = (x1 - x2).powi(2) + (y1 - y2).powi(2);
    let sq13 = (x1 - x3).powi(2) + (y1 - y3).powi(2);
    let sq23 = (x2 - x3).powi(2) + (y2 - y3).powi(2);
    let s = signed_area_2x(&local);
    let abs_s = s.abs();
    let sign_s = s.signum();
    let d = (sq12 + sq13 + sq23) / 2.0 + abs_s * SQRT_3;

    let k12 = x1 * x2 + y1 * y2;
    let k13 = x1 * x3 + y1 * y3;
    let k23 = x2 * x3 + y2 * y3;

    let big_x = SQRT_3 * (x1 * sq23 + x2 * sq13 + x3 * sq12)
        + (x1 + x2 + x3) * abs_s
        + 3.0 * sign_s * ((y2 - y1) * k12 + (y1 - y3) * k13 + (y3 - y2) * k23);
    let big_y = SQRT_3 * (y1 * sq23 + y2 * sq13 + y3 * sq12)
        + (y1 + y2 + y3) * abs_s
        + 3.0 * sign_s * ((x1 - x2) * k12 + (x3 - x1) * k13 + (x2 - x3) * k23);

    let denom = 2.0 * d * SQRT_3;
    Ok(Point2::new(big_x / denom, big_y / denom) + origin)
}

/// Fermat–Torricelli point of any finite triangle.
pub fn fermat_point(t: &Triangle) -> Point2 {
    match classify(t, DEFAULT_ANGLE_TOL) {
        TriangleClass::InteriorCase => {
            fermat_point_closed_form(t).expect("classified as interior case")
        }
        TriangleClass::ObtuseVertex(i) => t.v[i],
        TriangleClass::Degenerate(Degeneracy::Collinear) => collinear_median(t),
        TriangleClass::Degenerate(Degeneracy::CoincidentVertices) => repeated_vertex(t),
    }
}

/// Fermat–Torricelli points of a batch of triangles, in input order.
pub fn fermat_points(triangles: &[Triangle]) -> Vec<Point2> {
    par::map(triangles, fermat_point)
}

pub fn fermat_points_sequential(triangles: &[Triangle]) -> Vec<Point2> {
    triangles.iter().map(fermat_point).collect()
}

// The vertex whose projection onto the longest side lies between the other two.
fn collinear_median(t: &Triangle) -> Point2 {
    let [a, b, c] = t.v;
    let sides = side_lengths(t);
    let (from, to) = if sides.r12 >= sides.r13 && sides.r12 >= sides.r23 {
        (a, b)
    } else if sides.r13 >= sides.r23 {
        (a, c)
    } else {
        (b, c)
    };
    let dir = to - from;
    let proj = t.v.map(|p| (p - from).dot(dir));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| proj[i].total_cmp(&proj[j]));
    t.v[order[1]]
}

fn repeated_vertex(t: &Triangle) -> Point2 {
    let sides = side_lengths(t);
    // Vertex 0 belongs to the shortest side unless that side is r23.
    if sides.r23 < sides.r12 && sides.r23 < sides.r13 {
        t.v[1]
    } else {
        t.v[0]
    }
}

/// `Σ ‖vᵢ − p‖`.
pub fn objective(points: &[Point2], p: Point2) -> f64 {
    points.iter().map(|v| v.distance(p)).sum()
}

/// Norm of the sum of unit vectors from `p` towards each point. Points
/// coinciding with `p` are skipped.
pub fn stationarity_residual(points: &[Point2], p: Point2) -> f64 {
    unit_vector_sum(points, p, 0.0).0.norm()
}

// Sum of unit vectors from `p` to points farther than `snap`, and the number
// of points within `snap` of `p`.
fn unit_vector_sum(points: &[Point2], p: Point2, snap: f64) -> (Point2, usize) {
    let mut sum = Point2::default();
    let mut coincident = 0;
    for &v in points {
        let d = v.distance(p);
        if d <= snap {
            coincident += 1;
        } else {
            sum = sum + (v - p) * (1.0 / d);
        }
    }
    (sum, coincident)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiszfeldOptions {
    /// Stop once a step is shorter than `tol` times the point-cloud scale.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WeiszfeldOptions {
    fn default() -> Self {
        WeiszfeldOptions {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// Geometric median of `points` by Weiszfeld iteration.
///
/// Input points are first tested for optimality (`‖Σ_{j≠i} uᵢⱼ‖ ≤ mult(i)`
/// where `uᵢⱼ` are unit vectors and `mult(i)` the number of copies of point
/// `i`). Otherwise iteration starts at the centroid; an iterate landing on an
/// input point takes the Vardi–Zhang modified step.
///
/// Near a point whose angle is close to 120° the fixed-point map contracts
/// very slowly, so the iterate is periodically handed to a safeguarded Newton
/// refinement of the (smooth, off the data) objective, which is accepted only
/// when it drives the gradient to rounding level.
pub fn weiszfeld(points: &[Point2], opts: WeiszfeldOptions) -> Result<Point2> {
    if points.is_empty() {
        return Err(Error::Domain("weiszfeld needs at least one point".into()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(Error::InvalidArgument(format!(
            "weiszfeld requires tol > 0 and max_iter >= 1, got {opts:?}"
        )));
    }
    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(Point2::default(), |acc, &p| acc + p * (1.0 / n));
    let scale = points
        .iter()
        .map(|p| p.distance(centroid))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(points[0]);
    }
    let snap = opts.tol * scale;

    for &v in points {
        let (pull, copies) = unit_vector_sum(points, v, snap);
        if pull.norm() <= copies as f64 {
            return Ok(v);
        }
    }

    let mut y = centroid;
    let mut step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        if iter % NEWTON_INTERVAL == NEWTON_INTERVAL - 1 {
            if let Some(p) = newton_refine(points, y, snap) {
                return Ok(p);
            }
        }
        let mut num = Point2::default();
        let mut den = 0.0;
        let mut landed = 0usize;
        let mut pull = Point2::default();
        for &v in points {
            let d = v.distance(y);
            if d <= snap {
                landed += 1;
            } else {
                num = num + v * (1.0 / d);
                den += 1.0 / d;
                pull = pull + (v - y) * (1.0 / d);
            }
        }
        residual = pull.norm();
        let target = num * (1.0 / den);
        let next = if landed == 0 {
            target
        } else {
            let eta = landed as f64;
            if residual <= eta {
                return Ok(y);
            }
            let w = eta / residual;
            target * (1.0 - w) + y * w
        };
        step = next.distance(y);
        y = next;
        if step <= snap {
            return Ok(newton_refine(points, y, snap).unwrap_or(y));
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        last: y,
        step,
        residual,
    })
}

const NEWTON_INTERVAL: usize = 100;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_GRADIENT_TOL: f64 = 1e-13;
const NEWTON_STALL_TOL: f64 = 1e-7;

// Gradient and Hessian of Σ‖vᵢ − p‖, or None if p sits on a data point.
fn gradient_hessian(points: &[Point2], p: Point2, snap: f64) -> Option<(Point2, [f64; 3])> {
    let mut g = Point2::default();
    let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
    for &v in points {
        let r = p - v;
        let d = r.norm();
        if d <= snap {
            return None;
        }
        let u = r * (1.0 / d);
        g = g + u;
        hxx += (1.0 - u.x * u.x) / d;
        hxy -= u.x * u.y / d;
        hyy += (1.0 - u.y * u.y) / d;
    }
    Some((g, [hxx, hxy, hyy]))
}

// Newton iteration on the objective with step halving on the gradient norm.
// Returns a point only if the gradient reaches NEWTON_GRADIENT_TOL, or stalls
// below NEWTON_STALL_TOL.
fn newton_refine(points: &[Point2], start: Point2, snap: f64) -> Option<Point2> {
    let mut p = start;
    let (mut g, mut h) = gradient_hessian(points, p, snap)?;
    for _ in 0..NEWTON_MAX_ITER {
        if g.norm() <= NEWTON_GRADIENT_TOL {
            return Some(p);
        }
        let det = h[0] * h[2] - h[1] * h[1];
        if det.is_nan() || det <= 0.0 {
            return None;
        }
        let dir = Point2::new(
            -(h[2] * g.x - h[1] * g.y) / det,
            -(-h[1] * g.x + h[0] * g.y) / det,
        );
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let q = p + dir * scale;
            if let Some((gq, hq)) = gradient_hessian(points, q, snap) {
                if gq.norm() < g.norm() {
                    accepted = Some((q, gq, hq));
                    break;
                }
            }
            scale *= 0.5;
        }
        // No further decrease: the gradient is at its rounding floor.
        let Some((q, gq, hq)) = accepted else {
            return (g.norm() <= NEWTON_STALL_TOL).then_some(p);
        };
        p = q;
        g = gq;
        h = hq;
    }
    (g.norm() <= NEWTON_GRADIENT_TOL).then_some(p)
}
