//! Poincaré-disc and unit-sphere primitives.
//!
//! Points on H² are stored in Poincaré coordinates (`|x| < 1`); points on S²
//! are unit vectors in R³. Geodesic polar coordinates `(s, θ)` are taken about
//! the origin of the disc and about the north pole `(0, 0, 1)` of the sphere.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::jet::{Elementary, Jet};
use crate::{Error, Result};

/// Margin kept between disc points and the ideal boundary.
pub const DISC_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Geometry {
    H2,
    S2,
}

/// Curvature sign of a model space; selects hyperbolic or circular functions
/// in the radial calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    Hyperbolic,
    Spherical,
}

impl Geometry {
    pub fn space(self) -> Space {
        match self {
            Geometry::H2 => Space::Hyperbolic,
            Geometry::S2 => Space::Spherical,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::H2 => "H2",
            Geometry::S2 => "S2",
        }
    }

    /// Length element of the geodesic circle of radius `s` per unit angle,
    /// i.e. `sinh s` or `sin s`.
    pub fn circle_density(self, s: f64) -> f64 {
        self.space().sine(s)
    }
}

impl Space {
    /// `sinh` or `sin`.
    pub fn sine(self, s: f64) -> f64 {
        match self {
            Space::Hyperbolic => s.sinh(),
            Space::Spherical => s.sin(),
        }
    }

    /// `cosh` or `cos`.
    pub fn cosine(self, s: f64) -> f64 {
        match self {
            Space::Hyperbolic => s.cosh(),
            Space::Spherical => s.cos(),
        }
    }

    /// `coth` or `cot`.
    pub fn cotangent(self, s: f64) -> f64 {
        match self {
            Space::Hyperbolic => 1.0 / s.tanh(),
            Space::Spherical => 1.0 / s.tan(),
        }
    }

    pub fn sine_jet(self, base: f64, order: usize) -> Jet {
        let x = Jet::variable(base, order as i64).expect("non-negative order");
        match self {
            Space::Hyperbolic => x.apply(Elementary::Sinh),
            Space::Spherical => x.apply(Elementary::Sin),
        }
        .expect("sine is entire")
    }

    pub fn cosine_jet(self, base: f64, order: usize) -> Jet {
        let x = Jet::variable(base, order as i64).expect("non-negative order");
        match self {
            Space::Hyperbolic => x.apply(Elementary::Cosh),
            Space::Spherical => x.apply(Elementary::Cos),
        }
        .expect("cosine is entire")
    }

    pub fn cotangent_jet(self, base: f64, order: usize) -> Result<Jet> {
        let x = Jet::variable(base, order as i64)?;
        match self {
            Space::Hyperbolic => x.apply(Elementary::Coth),
            Space::Spherical => x.apply(Elementary::Cot),
        }
    }
}

/// A point of H² (Poincaré disc) or S² (unit sphere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Disc([f64; 2]),
    Sphere([f64; 3]),
}

impl Point {
    pub fn disc(x1: f64, x2: f64) -> Result<Self> {
        let r2 = x1 * x1 + x2 * x2;
        if !(r2.is_finite() && r2.sqrt() < 1.0 - DISC_MARGIN) {
            return Err(arg_err!("disc point ({x1}, {x2}) is not inside the unit disc"));
        }
        Ok(Point::Disc([x1, x2]))
    }

    pub fn sphere(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(arg_err!("cannot normalize {v:?} onto the unit sphere"));
        }
        Ok(Point::Sphere([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    pub fn origin(geometry: Geometry) -> Self {
        match geometry {
            Geometry::H2 => Point::Disc([0.0, 0.0]),
            Geometry::S2 => Point::Sphere([0.0, 0.0, 1.0]),
        }
    }

    /// Point at geodesic distance `s` from the origin (north pole) in direction `theta`.
    pub fn polar(geometry: Geometry, s: f64, theta: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(arg_err!("geodesic radius must be non-negative and finite, got {s}"));
        }
        let (st, ct) = theta.sin_cos();
        match geometry {
            Geometry::H2 => {
                let rho = (0.5 * s).tanh();
                Point::disc(rho * ct, rho * st)
            }
            Geometry::S2 => {
                if s > PI {
                    return Err(arg_err!("polar angle {s} exceeds pi"));
                }
                let (ss, cs) = s.sin_cos();
                Ok(Point::Sphere([ss * ct, ss * st, cs]))
            }
        }
    }

    /// Geodesic polar coordinates `(s, θ)` about the origin (north pole).
    pub fn to_polar(&self) -> (f64, f64) {
        match *self {
            Point::Disc([x, y]) => {
                let rho = (x * x + y * y).sqrt();
                (2.0 * rho.atanh(), y.atan2(x))
            }
            Point::Sphere([x, y, z]) => {
                let rho = (x * x + y * y).sqrt();
                (rho.atan2(z), y.atan2(x))
            }
        }
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            Point::Disc(_) => Geometry::H2,
            Point::Sphere(_) => Geometry::S2,
        }
    }
}

/// Geodesic distance between two points of the same model.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    match (x, y) {
        (Point::Disc(a), Point::Disc(b)) => Ok(disc_distance(*a, *b)),
        (Point::Sphere(a), Point::Sphere(b)) => Ok(sphere_distance(*a, *b)),
        _ => Err(arg_err!("distance between points of different geometries")),
    }
}

pub(crate) fn disc_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1];
    let na = a[0] * a[0] + a[1] * a[1];
    let nb = b[0] * b[0] + b[1] * b[1];
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let diff = (dx * dx + dy * dy).sqrt();
    let root = (1.0 - 2.0 * dot + na * nb).max(0.0).sqrt();
    ((root + diff) / (root - diff)).ln()
}

pub(crate) fn sphere_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot)
}

/// Disc automorphism `z -> (z + a) / (1 + conj(a) z)`, which maps 0 to `a`.
pub fn mobius_translate(a: &Point, z: &Point) -> Result<Point> {
    match (a, z) {
        (Point::Disc(a), Point::Disc(z)) => {
            let w = mobius(*a, *z);
            Point::disc(w[0], w[1])
        }
        _ => Err(arg_err!("Möbius translation is defined on the disc only")),
    }
}

fn mobius(a: [f64; 2], z: [f64; 2]) -> [f64; 2] {
    let num = [z[0] + a[0], z[1] + a[1]];
    // 1 + conj(a) z
    let den = [1.0 + a[0] * z[0] + a[1] * z[1], a[0] * z[1] - a[1] * z[0]];
    let d2 = den[0] * den[0] + den[1] * den[1];
    [
        (num[0] * den[0] + num[1] * den[1]) / d2,
        (num[1] * den[0] - num[0] * den[1]) / d2,
    ]
}

/// Signed horospherical distance `log((1 - |x|²) / |x - η|²)` from the
/// origin to the horocycle through `x` tangent to the boundary at `η`.
pub fn horospherical_bracket(x: &Point, eta: [f64; 2]) -> Result<f64> {
    let Point::Disc(x) = x else {
        return Err(arg_err!("horospherical bracket needs a disc point"));
    };
    let norm = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(arg_err!("boundary direction must have unit length, got |eta| = {norm}"));
    }
    let dx = x[0] - eta[0];
    let dy = x[1] - eta[1];
    let gap = dx * dx + dy * dy;
    let inner = 1.0 - x[0] * x[0] - x[1] * x[1];
    if gap == 0.0 || inner <= 0.0 {
        return Err(Error::Domain { function: "horospherical bracket", value: x[0].hypot(x[1]) });
    }
    Ok((inner / gap).ln())
}

/// Equal-weight quadrature rule on a geodesic circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleQuadrature {
    pub center: Point,
    pub radius: f64,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl CircleQuadrature {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted mean of `f` over the circle.
    pub fn mean<F: FnMut(&Point) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(p);
        }
        acc / self.total_measure()
    }
}

/// Circle of geodesic radius `r` about `center`, sampled at `n` nodes that are
/// the isometric image of equispaced angles on the circle about the origin.
pub fn geodesic_circle_quadrature(center: &Point, r: f64, n: usize) -> Result<CircleQuadrature> {
    if n < 8 {
        return Err(arg_err!("circle quadrature needs at least 8 nodes, got {n}"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(arg_err!("circle radius must be positive and finite, got {r}"));
    }
    let mut nodes = Vec::with_capacity(n);
    let measure = match center {
        Point::Disc(a) => {
            let rho = (0.5 * r).tanh();
            for j in 0..n {
                let phi = 2.0 * PI * j as f64 / n as f64;
                let (s, c) = phi.sin_cos();
                let w = mobius(*a, [rho * c, rho * s]);
                let p = Point::disc(w[0], w[1])
                    .map_err(|_| arg_err!("circle of radius {r} leaves the representable disc"))?;
                nodes.push(p);
            }
            2.0 * PI * r.sinh()
        }
        Point::Sphere(c) => {
            if r >= PI {
                return Err(arg_err!("circle radius on the sphere must lie in (0, pi), got {r}"));
            }
            let rot = Rotation::taking_pole_to(*c);
            let (sr, cr) = r.sin_cos();
            for j in 0..n {
                let phi = 2.0 * PI * j as f64 / n as f64;
                let (s, c) = phi.sin_cos();
                nodes.push(Point::Sphere(rot.apply([sr * c, sr * s, cr])));
            }
            2.0 * PI * r.sin()
        }
    };
    let weights = alloc::vec![measure / n as f64; n];
    Ok(CircleQuadrature { center: *center, radius: r, nodes, weights })
}

/// Rotation of R³ sending the north pole to a given unit vector (axis-angle form).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rotation {
    axis: [f64; 3],
    sin: f64,
    cos: f64,
}

impl Rotation {
    pub(crate) fn taking_pole_to(c: [f64; 3]) -> Self {
        // axis = e_z x c
        let ax = [-c[1], c[0], 0.0];
        let s = (ax[0] * ax[0] + ax[1] * ax[1]).sqrt();
        if s < 1e-15 {
            if c[2] > 0.0 {
                return Rotation { axis: [1.0, 0.0, 0.0], sin: 0.0, cos: 1.0 };
            }
            return Rotation { axis: [1.0, 0.0, 0.0], sin: 0.0, cos: -1.0 };
        }
        Rotation { axis: [ax[0] / s, ax[1] / s, 0.0], sin: s, cos: c[2] }
    }

    pub(crate) fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let k = self.axis;
        let kxv = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
        let kdv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = v[i] * self.cos + kxv[i] * self.sin + k[i] * kdv * (1.0 - self.cos);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disc_distance_from_origin() {
        let o = Point::disc(0.0, 0.0).unwrap();
        let y = Point::disc(0.5, 0.0).unwrap();
        assert_relative_eq!(distance(&o, &y).unwrap(), 3.0f64.ln(), max_relative = 1e-15);
        let p = Point::disc(0.3, 0.0).unwrap();
        assert_eq!(distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn sphere_quarter_circle() {
        let n = Point::sphere([0.0, 0.0, 1.0]).unwrap();
        let e = Point::sphere([1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(distance(&n, &e).unwrap(), PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn mixed_geometries_rejected() {
        let a = Point::origin(Geometry::H2);
        let b = Point::origin(Geometry::S2);
        assert!(distance(&a, &b).is_err());
    }

    #[test]
    fn boundary_points_rejected() {
        assert!(Point::disc(1.0, 0.0).is_err());
        assert!(Point::disc(0.6, 0.8).is_err());
        assert!(Point::sphere([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn translation_of_origin() {
        let a = Point::disc(0.4, 0.1).unwrap();
        let o = Point::origin(Geometry::H2);
        let t = mobius_translate(&a, &o).unwrap();
        assert_eq!(t, a);
        let z = Point::disc(-0.2, 0.35).unwrap();
        assert_eq!(mobius_translate(&o, &z).unwrap(), z);
    }

    #[test]
    fn origin_circle_nodes_and_measure() {
        let q = geodesic_circle_quadrature(&Point::origin(Geometry::H2), 1.0, 64).unwrap();
        for p in &q.nodes {
            let Point::Disc([x, y]) = *p else { unreachable!() };
            assert_relative_eq!(x.hypot(y), 0.46211715726000974, max_relative = 1e-14);
        }
        assert_relative_eq!(q.total_measure(), 2.0 * PI * 1.0f64.sinh(), max_relative = 1e-12);
        assert_relative_eq!(q.mean(|_| 1.0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn circle_argument_errors() {
        let o = Point::origin(Geometry::H2);
        assert!(geodesic_circle_quadrature(&o, 1.0, 7).is_err());
        assert!(geodesic_circle_quadrature(&o, 0.0, 16).is_err());
        assert!(geodesic_circle_quadrature(&o, 80.0, 16).is_err());
        let n = Point::origin(Geometry::S2);
        assert!(geodesic_circle_quadrature(&n, PI, 16).is_err());
    }

    #[test]
    fn sphere_circle_about_south_pole() {
        let s = Point::sphere([0.0, 0.0, -1.0]).unwrap();
        let q = geodesic_circle_quadrature(&s, 0.4, 32).unwrap();
        for p in &q.nodes {
            assert_relative_eq!(distance(&s, p).unwrap(), 0.4, max_relative = 1e-12);
        }
    }

    #[test]
    fn bracket_values() {
        let o = Point::origin(Geometry::H2);
        assert_eq!(horospherical_bracket(&o, [1.0, 0.0]).unwrap(), 0.0);
        let eta = [0.6, 0.8];
        let t = 0.7;
        let x = Point::disc(t * eta[0], t * eta[1]).unwrap();
        let expect = ((1.0 + t) / (1.0 - t)).ln();
        assert_relative_eq!(horospherical_bracket(&x, eta).unwrap(), expect, max_relative = 1e-14);
        assert_relative_eq!(distance(&o, &x).unwrap(), expect, max_relative = 1e-14);
        assert!(horospherical_bracket(&x, [0.5, 0.5]).is_err());
    }

    #[test]
    fn polar_round_trip() {
        for g in [Geometry::H2, Geometry::S2] {
            let p = Point::polar(g, 0.8, 2.1).unwrap();
            let (s, t) = p.to_polar();
            assert_relative_eq!(s, 0.8, max_relative = 1e-14);
            assert_relative_eq!(t, 2.1, max_relative = 1e-14);
            assert_relative_eq!(distance(&Point::origin(g), &p).unwrap(), 0.8, max_relative = 1e-14);
        }
    }
}
