//! Fourier–Legendre transform `v̂(λ) = ∫ v h_λ w dr`, its intertwining with
//! the radial operator `B_r`, and the map `T` between radial functions and
//! even functions of time.
//!
//! The weight `w` is `sinh^{n-1}(r)` on H^n and `sin(r)/2` on S².

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{arg_err, num_err};
use crate::geometry::Space;
use crate::quadrature::{dot, legendre_table, simpson_weights};
use crate::radial::{check_space_dimension, RadialPropagator, SpectralParameter};
use crate::Result;

/// Default relative bound on `|ĝ|` near `λ_max` in [`TInverse::apply`].
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Default number of `λ` intervals for [`TInverse`].
pub const DEFAULT_LAMBDA_INTERVALS: usize = 2048;

/// `λ_max = 60 / a` for data supported in `[0, a]`.
pub fn default_lambda_max(support: f64) -> f64 {
    60.0 / support
}

fn measure(space: Space, n: usize, r: f64) -> f64 {
    match space {
        Space::Hyperbolic => r.sinh().powi(n as i32 - 1),
        Space::Spherical => 0.5 * r.sin(),
    }
}

fn integer_order(lambda: f64) -> Option<usize> {
    (lambda >= 0.0 && (lambda - lambda.round()).abs() < 1e-12).then(|| lambda.round() as usize)
}

fn uniform(r_max: f64, count: usize) -> Vec<f64> {
    let h = r_max / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { r_max } else { i as f64 * h }).collect()
}

/// Quadrature rows `h_λ(r_i) w(r_i) ω_i` (Simpson weights `ω_i`) on a
/// uniform grid of `[0, r_max]`, one row per order.
#[derive(Debug, Clone)]
pub struct FlKernel {
    pub space: Space,
    pub n: usize,
    pub r_max: f64,
    pub count: usize,
    pub lambdas: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl FlKernel {
    /// Non-negative integer orders on S² use `P_λ(cos r)` directly (valid up
    /// to `r_max = π`); every other order integrates the radial equation.
    pub fn new(space: Space, n: usize, r_max: f64, count: usize, lambdas: &[f64]) -> Result<Self> {
        check_space_dimension(space, n)?;
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(arg_err!("window must be positive and finite, got r_max = {r_max}"));
        }
        if count < 3 {
            return Err(arg_err!("need at least 3 samples, got {count}"));
        }
        let grid = uniform(r_max, count);
        let mut base = simpson_weights(count, grid[1]);
        for (b, r) in base.iter_mut().zip(&grid) {
            *b *= measure(space, n, *r);
        }
        let legendre = space == Space::Spherical;
        let top = lambdas
            .iter()
            .filter_map(|&l| if legendre { integer_order(l) } else { None })
            .max();
        let table: Vec<Vec<f64>> = match top {
            Some(k) => grid.iter().map(|r| legendre_table(k, r.cos())).collect(),
            None => Vec::new(),
        };
        let cap = lambdas
            .iter()
            .filter(|&&l| !(legendre && integer_order(l).is_some()))
            .fold(None, |acc: Option<f64>, &l| Some(acc.map_or(l.abs(), |a| a.max(l.abs()))));
        let propagator = match cap {
            Some(c) => Some(RadialPropagator::new(space, n, 0, r_max, count.max(64), c)?),
            None => None,
        };
        if propagator.is_some() && count < 64 {
            return Err(arg_err!("non-integer orders need at least 64 samples, got {count}"));
        }
        let mut rows = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            let h: Vec<f64> = match (legendre, integer_order(l)) {
                (true, Some(k)) => table.iter().map(|t| t[k]).collect(),
                _ => propagator.as_ref().expect("propagator for real orders").solve(l)?.values,
            };
            rows.push(h.iter().zip(&base).map(|(h, b)| h * b).collect());
        }
        Ok(FlKernel { space, n, r_max, count, lambdas: lambdas.to_vec(), rows })
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.count {
            return Err(arg_err!("kernel expects {} samples, got {}", self.count, v.len()));
        }
        Ok(self.rows.iter().map(|row| dot(row, v)).collect())
    }
}

/// `v̂(λ)` for samples `v` on a uniform grid of `[0, r_max]`.
pub fn fl_transform(v: &[f64], r_max: f64, space: Space, n: usize, lambda: f64) -> Result<f64> {
    Ok(FlKernel::new(space, n, r_max, v.len(), &[lambda])?.apply(v)?[0])
}

/// `v̂` at several orders sharing one integration mesh.
pub fn fl_transform_many(v: &[f64], r_max: f64, space: Space, n: usize, lambdas: &[f64]) -> Result<Vec<f64>> {
    FlKernel::new(space, n, r_max, v.len(), lambdas)?.apply(v)
}

/// `B_r v = v'' + (n-1) coth(r) v'` (`cot` on S²) by fourth-order centered
/// differences, with `v` reflected evenly at 0 and continued by zero past
/// `r_max`. At `r = 0` (and at `r = π` on S²) the limit `n v''` is used.
pub fn radial_operator(v: &[f64], r_max: f64, space: Space, n: usize) -> Result<Vec<f64>> {
    check_space_dimension(space, n)?;
    let count = v.len();
    if count < 5 {
        return Err(arg_err!("need at least 5 samples, got {count}"));
    }
    let h = r_max / (count - 1) as f64;
    let antipodal = space == Space::Spherical && (r_max - PI).abs() < 1e-12;
    let at = |i: isize| -> f64 {
        let last = count as isize - 1;
        if i < 0 {
            v[(-i) as usize]
        } else if i > last {
            if antipodal { v[(2 * last - i) as usize] } else { 0.0 }
        } else {
            v[i as usize]
        }
    };
    let c = (n - 1) as f64;
    let mut out = vec![0.0; count];
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as isize;
        let (m2, m1, z, p1, p2) = (at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2));
        let d2 = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * h * h);
        let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        let r = i as f64 * h;
        *o = if i == 0 || (antipodal && i + 1 == count) {
            n as f64 * d2
        } else {
            d2 + c * space.cotangent(r) * d1
        };
    }
    Ok(out)
}

/// `max_λ |(B_r v)^(λ) - eigenvalue(λ) v̂(λ)| / max_λ |v̂(λ)|`.
pub fn intertwine_residual(v: &[f64], r_max: f64, space: Space, n: usize, lambdas: &[f64]) -> Result<f64> {
    let kernel = FlKernel::new(space, n, r_max, v.len(), lambdas)?;
    let bv = radial_operator(v, r_max, space, n)?;
    let vh = kernel.apply(v)?;
    let bh = kernel.apply(&bv)?;
    let scale = vh.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for ((l, a), b) in lambdas.iter().zip(&vh).zip(&bh) {
        let e = SpectralParameter::new(space, n, *l)?.energy();
        worst = worst.max((b + e * a).abs());
    }
    Ok(worst / scale)
}

/// Half-integer shift of the `T` map: `ĝ(λ) = ũ(λ)` on H^n and
/// `ĝ(λ) = ũ(λ + 1/2)` on S².
pub fn t_shift(space: Space) -> f64 {
    match space {
        Space::Hyperbolic => 0.0,
        Space::Spherical => 0.5,
    }
}

/// `T⁻¹ g (t) = (1/π) ∫_0^{λ_max} ĝ(λ - shift) cos(λt) dλ` for a fixed
/// radial grid and output grid.
#[derive(Debug, Clone)]
pub struct TInverse {
    pub t_grid: Vec<f64>,
    pub lambda_max: f64,
    pub n_lambda: usize,
    pub tail_tolerance: f64,
    kernel: FlKernel,
    /// Simpson weight times `cos(λ_j t_i)/π`, row-major in `t`.
    synthesis: Vec<f64>,
}

impl TInverse {
    pub fn new(space: Space, n: usize, r_max: f64, count: usize, t_grid: Vec<f64>, lambda_max: f64, n_lambda: usize) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(arg_err!("lambda_max must be positive, got {lambda_max}"));
        }
        if n_lambda < 2 {
            return Err(arg_err!("need at least 2 lambda intervals, got {n_lambda}"));
        }
        let dl = lambda_max / n_lambda as f64;
        let shift = t_shift(space);
        let lambdas: Vec<f64> = (0..=n_lambda).map(|j| j as f64 * dl).collect();
        let orders: Vec<f64> = lambdas.iter().map(|l| l - shift).collect();
        let kernel = FlKernel::new(space, n, r_max, count, &orders)?;
        let w = simpson_weights(n_lambda + 1, dl);
        let mut synthesis = Vec::with_capacity(t_grid.len() * lambdas.len());
        for t in &t_grid {
            synthesis.extend(lambdas.iter().zip(&w).map(|(l, w)| w * (l * t).cos() / PI));
        }
        Ok(TInverse { t_grid, lambda_max, n_lambda, tail_tolerance: TAIL_TOLERANCE, kernel, synthesis })
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    /// `ĝ(λ_j - shift)` on the `λ` nodes.
    pub fn spectrum(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.kernel.apply(g)
    }

    /// Largest `|ĝ|` on the top 5% of the `λ` range relative to `max |ĝ|`.
    pub fn tail_ratio(&self, spectrum: &[f64]) -> f64 {
        let peak = spectrum.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let start = spectrum.len() - (spectrum.len() / 20).max(1);
        spectrum[start..].iter().fold(0.0f64, |a, x| a.max(x.abs())) / peak
    }

    pub fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        let spec = self.spectrum(g)?;
        let tail = self.tail_ratio(&spec);
        if tail > self.tail_tolerance {
            return Err(num_err!(
                "transform has not decayed at lambda_max = {}: |g^| = {:.3e} of its peak (tolerance {:.1e})",
                self.lambda_max,
                tail,
                self.tail_tolerance
            ));
        }
        Ok(self.synthesize(&spec))
    }

    /// The cosine synthesis without the tail check.
    pub fn synthesize(&self, spectrum: &[f64]) -> Vec<f64> {
        let width = self.n_lambda + 1;
        self.synthesis.chunks(width).map(|row| dot(row, spectrum)).collect()
    }
}

/// One-shot [`TInverse`] for samples `g` on a uniform grid of `[0, r_max]`.
pub fn t_inverse(g: &[f64], r_max: f64, space: Space, n: usize, t_grid: &[f64], lambda_max: f64, n_lambda: usize) -> Result<Vec<f64>> {
    TInverse::new(space, n, r_max, g.len(), t_grid.to_vec(), lambda_max, n_lambda)?.apply(g)
}

/// Forward `T` on S²: `Σ_{m ≤ m_max} (2m+1) ũ(m + 1/2) P_m(cos r)` with
/// `ũ(ω) = 2 ∫_0^{t_max} u(t) cos(ωt) dt` for even `u` sampled on a uniform
/// grid of `[0, t_max]`.
pub fn t_forward_sphere(u: &[f64], t_max: f64, m_max: usize, r_grid: &[f64]) -> Result<Vec<f64>> {
    if u.len() < 3 {
        return Err(arg_err!("need at least 3 time samples, got {}", u.len()));
    }
    let dt = t_max / (u.len() - 1) as f64;
    let w = simpson_weights(u.len(), dt);
    let coeffs: Vec<f64> = (0..=m_max)
        .map(|m| {
            let om = m as f64 + 0.5;
            let ut: f64 = u.iter().zip(&w).enumerate().map(|(i, (u, w))| u * w * (om * i as f64 * dt).cos()).sum();
            (2 * m + 1) as f64 * 2.0 * ut
        })
        .collect();
    Ok(r_grid
        .iter()
        .map(|r| {
            let p = legendre_table(m_max, r.cos());
            dot(&p, &coeffs)
        })
        .collect())
}
