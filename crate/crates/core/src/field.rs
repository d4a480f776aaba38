//! Scalar fields on H² and S²: closed-form phantoms and angular-mode
//! representations `f(s, θ) = Σ F_m(s) Y_m(θ)` about the origin.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::geometry::{distance, Geometry, Point};
use crate::quadrature::simpson_weights;
use crate::Result;

/// Angular parity of a circular harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Cos,
    Sin,
}

/// Angular order and parity; orders before parities (`cos` first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeKey {
    pub m: usize,
    pub parity: Parity,
}

impl ModeKey {
    pub fn new(m: usize, parity: Parity) -> Self {
        ModeKey { m, parity }
    }

    /// All keys with order at most `m_max` (no `sin` for `m = 0`).
    pub fn up_to(m_max: usize) -> Vec<ModeKey> {
        let mut out = vec![ModeKey::new(0, Parity::Cos)];
        for m in 1..=m_max {
            out.push(ModeKey::new(m, Parity::Cos));
            out.push(ModeKey::new(m, Parity::Sin));
        }
        out
    }

    /// Orthonormal circular harmonic on `[0, 2π)`: `1/√(2π)`, `cos(mθ)/√π`, `sin(mθ)/√π`.
    pub fn angular(&self, theta: f64) -> f64 {
        if self.m == 0 {
            return match self.parity {
                Parity::Cos => 1.0 / (2.0 * PI).sqrt(),
                Parity::Sin => 0.0,
            };
        }
        let x = self.m as f64 * theta;
        let v = match self.parity {
            Parity::Cos => x.cos(),
            Parity::Sin => x.sin(),
        };
        v / PI.sqrt()
    }
}

/// Coefficients `c_m = ∫ f Y_m dθ` of equispaced samples `f(2πj/N)`, for
/// all orders below the Nyquist limit and at most `m_max`.
pub fn angular_modes(samples: &[f64], m_max: usize) -> Vec<(ModeKey, f64)> {
    let n = samples.len();
    let limit = if n == 0 { 0 } else { (n - 1) / 2 };
    let dtheta = 2.0 * PI / n as f64;
    ModeKey::up_to(m_max.min(limit))
        .into_iter()
        .map(|key| {
            let mut acc = 0.0;
            for (j, v) in samples.iter().enumerate() {
                acc += v * key.angular(j as f64 * dtheta);
            }
            (key, acc * dtheta)
        })
        .collect()
}

/// A scalar field with compact support about the origin.
pub trait Field {
    fn geometry(&self) -> Geometry;
    /// Radius of a geodesic ball about the origin outside of which the field vanishes.
    fn support_radius(&self) -> f64;
    fn value(&self, p: &Point) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `A exp(-(d²/2w²) / (1 - (d/3w)²))`, smooth of all orders.
    GaussianBump,
    /// `A (1 - (d/3w)²)^8`, seven times continuously differentiable.
    PolynomialBump,
}

/// A radial bump of geodesic distance `d` from its center, supported in `d < 3w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub kind: BumpKind,
    pub center: Point,
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn profile(&self, d: f64) -> f64 {
        let x = d / (3.0 * self.width);
        if x >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - x * x;
        match self.kind {
            BumpKind::GaussianBump => self.amplitude * (-(d * d) / (2.0 * self.width * self.width) / q).exp(),
            BumpKind::PolynomialBump => self.amplitude * q.powi(8),
        }
    }

    pub fn support_radius(&self) -> f64 {
        let origin = Point::origin(self.center.geometry());
        distance(&origin, &self.center).expect("same geometry") + 3.0 * self.width
    }
}

/// Sum of bumps on one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub geometry: Geometry,
    pub bumps: Vec<Bump>,
}

impl Phantom {
    pub fn new(geometry: Geometry, bumps: Vec<Bump>) -> Result<Self> {
        for b in &bumps {
            if b.center.geometry() != geometry {
                return Err(arg_err!("bump center {:?} does not lie on {}", b.center, geometry.name()));
            }
            if !(b.width > 0.0 && b.width.is_finite() && b.amplitude.is_finite()) {
                return Err(arg_err!("bump width must be positive and amplitude finite"));
            }
        }
        Ok(Phantom { geometry, bumps })
    }

    pub fn single(kind: BumpKind, center: Point, width: f64, amplitude: f64) -> Result<Self> {
        Phantom::new(center.geometry(), vec![Bump { kind, center, width, amplitude }])
    }
}

impl Field for Phantom {
    fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn support_radius(&self) -> f64 {
        self.bumps.iter().map(Bump::support_radius).fold(0.0, f64::max)
    }

    fn value(&self, p: &Point) -> f64 {
        self.bumps
            .iter()
            .map(|b| b.profile(distance(&b.center, p).expect("same geometry")))
            .sum()
    }
}

/// A field given by radial profiles of its circular harmonics about the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeField {
    pub geometry: Geometry,
    /// Support radius; profiles vanish for `s ≥ r`.
    pub r: f64,
    /// Uniform grid `0 = s_0 < … < s_max`.
    pub s_grid: Vec<f64>,
    pub modes: BTreeMap<ModeKey, Vec<f64>>,
    pub description: String,
}

impl ModeField {
    pub fn zero(geometry: Geometry, r: f64, s_grid: Vec<f64>) -> Self {
        ModeField { geometry, r, s_grid, modes: BTreeMap::new(), description: String::new() }
    }

    /// Projects a field onto circular harmonics up to order `m_max` on each
    /// circle `s = s_i`, using `n_theta` equispaced angles.
    pub fn from_field<F: Field + ?Sized>(field: &F, r: f64, s_grid: Vec<f64>, m_max: usize, n_theta: usize) -> Result<Self> {
        if n_theta < 2 * m_max + 1 {
            return Err(arg_err!("{n_theta} angles cannot resolve order {m_max}"));
        }
        let geometry = field.geometry();
        let mut modes: BTreeMap<ModeKey, Vec<f64>> = BTreeMap::new();
        let keys = ModeKey::up_to(m_max);
        for key in &keys {
            modes.insert(*key, vec![0.0; s_grid.len()]);
        }
        let mut ring = vec![0.0; n_theta];
        for (i, &s) in s_grid.iter().enumerate() {
            if s >= r {
                continue;
            }
            for (j, v) in ring.iter_mut().enumerate() {
                let p = Point::polar(geometry, s, 2.0 * PI * j as f64 / n_theta as f64)?;
                *v = field.value(&p);
            }
            for (key, c) in angular_modes(&ring, m_max) {
                modes.get_mut(&key).expect("key inserted")[i] = c;
            }
        }
        Ok(ModeField { geometry, r, s_grid, modes, description: String::new() })
    }

    pub fn step(&self) -> f64 {
        self.s_grid[1] - self.s_grid[0]
    }

    /// Radial profile of one mode; zero if absent.
    pub fn profile(&self, key: ModeKey) -> Vec<f64> {
        self.modes.get(&key).cloned().unwrap_or_else(|| vec![0.0; self.s_grid.len()])
    }

    /// Value of `F_key` at radius `s` by local cubic interpolation.
    pub fn profile_at(&self, key: ModeKey, s: f64) -> f64 {
        match self.modes.get(&key) {
            Some(f) => interpolate_uniform(&self.s_grid, f, s),
            None => 0.0,
        }
    }

    /// Sets samples at `s ≥ r` to zero.
    pub fn enforce_support(&mut self) {
        let cut = self.r;
        for f in self.modes.values_mut() {
            for (v, s) in f.iter_mut().zip(&self.s_grid) {
                if *s >= cut {
                    *v = 0.0;
                }
            }
        }
    }

    /// Largest sample magnitude at `s ≥ r`.
    pub fn support_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for f in self.modes.values() {
            for (v, s) in f.iter().zip(&self.s_grid) {
                if *s >= self.r {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// `‖f‖_{L²}` by Simpson's rule in `s` with the area element of the geometry.
    pub fn l2_norm(&self) -> f64 {
        let w = self.radial_weights();
        self.modes
            .values()
            .map(|f| f.iter().zip(&w).map(|(v, w)| v * v * w).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Relative L² distance `‖self - other‖ / ‖other‖` on a shared grid.
    pub fn rel_l2_error(&self, other: &ModeField) -> Result<f64> {
        if self.s_grid.len() != other.s_grid.len() || self.geometry != other.geometry {
            return Err(arg_err!("mode fields live on different grids"));
        }
        let w = self.radial_weights();
        let mut keys: Vec<ModeKey> = self.modes.keys().chain(other.modes.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        let mut diff = 0.0;
        for key in keys {
            let a = self.profile(key);
            let b = other.profile(key);
            diff += a.iter().zip(&b).zip(&w).map(|((x, y), w)| (x - y) * (x - y) * w).sum::<f64>();
        }
        let norm = other.l2_norm();
        Ok(if norm == 0.0 { diff.sqrt() } else { diff.sqrt() / norm })
    }

    /// Simpson weights times the circle density `sinh s` or `sin s`.
    pub fn radial_weights(&self) -> Vec<f64> {
        let mut w = simpson_weights(self.s_grid.len(), self.step());
        for (wi, s) in w.iter_mut().zip(&self.s_grid) {
            *wi *= self.geometry.circle_density(*s);
        }
        w
    }
}

impl Field for ModeField {
    fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn support_radius(&self) -> f64 {
        self.r
    }

    fn value(&self, p: &Point) -> f64 {
        let (s, theta) = p.to_polar();
        if s >= self.r {
            return 0.0;
        }
        self.modes.iter().map(|(key, f)| interpolate_uniform(&self.s_grid, f, s) * key.angular(theta)).sum()
    }
}

/// Four-point Lagrange interpolation on a uniform grid; zero outside it.
pub fn interpolate_uniform(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    if n == 0 || x < grid[0] || x > grid[n - 1] {
        return 0.0;
    }
    if n < 4 {
        return values[0];
    }
    let h = grid[1] - grid[0];
    let t = (x - grid[0]) / h;
    let i = (t.floor() as usize).min(n - 2);
    let start = i.saturating_sub(1).min(n - 4);
    let mut acc = 0.0;
    for a in start..start + 4 {
        let mut basis = 1.0;
        for b in start..start + 4 {
            if a != b {
                basis *= (t - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += basis * values[a];
    }
    acc
}

/// A field given by a closure.
pub struct FnField<F> {
    pub geometry: Geometry,
    pub support: f64,
    pub f: F,
}

impl<F: Fn(&Point) -> f64> Field for FnField<F> {
    fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn support_radius(&self) -> f64 {
        self.support
    }

    fn value(&self, p: &Point) -> f64 {
        (self.f)(p)
    }
}
