//! Boundary data `g(θ_j, r_k)` on the detector circle times a radius window.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::geometry::Geometry;
use crate::quadrature::trapezoid_weights;
use crate::Result;

/// Samples on `θ_j = 2πj/n_theta`, `r_k = k r_max/(n_r - 1)`, stored
/// row-major in `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sinogram {
    pub geometry: Geometry,
    /// Geodesic radius of the detector circle.
    pub r: f64,
    pub n_theta: usize,
    pub n_r: usize,
    pub r_max: f64,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn new(geometry: Geometry, r: f64, n_theta: usize, n_r: usize, r_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(arg_err!("detector radius must be positive, got {r}"));
        }
        if geometry == Geometry::S2 && r >= PI {
            return Err(arg_err!("detector radius on S2 must be below pi, got {r}"));
        }
        if n_theta < 1 || n_r < 2 {
            return Err(arg_err!("sinogram grid needs n_theta >= 1 and n_r >= 2, got {n_theta} x {n_r}"));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(arg_err!("r_max must be positive, got {r_max}"));
        }
        if values.len() != n_theta * n_r {
            return Err(arg_err!("expected n_theta * n_r = {} values, got {}", n_theta * n_r, values.len()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(arg_err!("sinogram contains non-finite value {bad}"));
        }
        Ok(Sinogram { geometry, r, n_theta, n_r, r_max, values })
    }

    pub fn zeros(geometry: Geometry, r: f64, n_theta: usize, n_r: usize, r_max: f64) -> Result<Self> {
        Sinogram::new(geometry, r, n_theta, n_r, r_max, vec![0.0; n_theta * n_r])
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn radius(&self, k: usize) -> f64 {
        if k + 1 == self.n_r {
            self.r_max
        } else {
            self.r_max * k as f64 / (self.n_r - 1) as f64
        }
    }

    pub fn r_step(&self) -> f64 {
        self.r_max / (self.n_r - 1) as f64
    }

    pub fn r_grid(&self) -> Vec<f64> {
        (0..self.n_r).map(|k| self.radius(k)).collect()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_r + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.values[j * self.n_r + k] = v;
    }

    /// Samples at fixed angle index `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_r..(j + 1) * self.n_r]
    }

    /// Samples at fixed radius index `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_theta).map(|j| self.get(j, k)).collect()
    }

    pub fn same_grid(&self, other: &Sinogram) -> bool {
        self.geometry == other.geometry
            && self.r == other.r
            && self.n_theta == other.n_theta
            && self.n_r == other.n_r
            && self.r_max == other.r_max
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Sinogram, b: f64) -> Result<Sinogram> {
        if !self.same_grid(other) {
            return Err(arg_err!("sinograms live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Sinogram { values, ..self.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `(∫∫ g² dθ dr)^{1/2}` with periodic trapezoid in `θ` and trapezoid in `r`.
    pub fn l2_norm(&self) -> f64 {
        let wr = trapezoid_weights(self.n_r, self.r_step());
        let dtheta = 2.0 * PI / self.n_theta as f64;
        let mut acc = 0.0;
        for j in 0..self.n_theta {
            acc += self.row(j).iter().zip(&wr).map(|(v, w)| v * v * w).sum::<f64>();
        }
        (acc * dtheta).sqrt()
    }

    /// Relative L² distance `‖self - other‖ / ‖other‖`.
    pub fn rel_l2_error(&self, other: &Sinogram) -> Result<f64> {
        let d = self.combine(1.0, other, -1.0)?;
        let n = other.l2_norm();
        Ok(if n == 0.0 { d.l2_norm() } else { d.l2_norm() / n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values_and_counts() {
        assert!(Sinogram::new(Geometry::H2, 1.0, 2, 2, 2.0, vec![0.0; 3]).is_err());
        assert!(Sinogram::new(Geometry::H2, 1.0, 2, 2, 2.0, vec![0.0, 1.0, f64::NAN, 0.0]).is_err());
        assert!(Sinogram::new(Geometry::S2, 3.2, 2, 2, 2.0, vec![0.0; 4]).is_err());
    }

    #[test]
    fn grid_and_norm() {
        let mut g = Sinogram::zeros(Geometry::H2, 1.0, 8, 5, 2.0).unwrap();
        assert_eq!(g.radius(4), 2.0);
        assert_eq!(g.r_step(), 0.5);
        for j in 0..8 {
            for k in 0..5 {
                g.set(j, k, 1.0);
            }
        }
        let expect = (2.0 * PI * 2.0f64).sqrt();
        assert!((g.l2_norm() - expect).abs() < 1e-14);
    }
}
