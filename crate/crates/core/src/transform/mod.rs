//! Forward operators: spherical means by circle quadrature, the same data
//! by evolving the Darboux equation, and the Fourier–Legendre layer.

mod darboux;
mod fourier;

pub use darboux::{darboux_forward_mode, substeps, DarbouxGrid, ForwardModeSolution, CFL_LIMIT};
pub use fourier::{
    default_lambda_max, fl_transform, fl_transform_many, intertwine_residual, radial_operator, t_forward_sphere,
    t_inverse, t_shift, FlKernel, TInverse, DEFAULT_LAMBDA_INTERVALS, TAIL_TOLERANCE,
};

pub(crate) use darboux::{r_faces, Stencil};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::arg_err;
use crate::field::{angular_modes, Field, ModeKey};
use crate::geometry::{geodesic_circle_quadrature, Geometry, Point};
use crate::sinogram::Sinogram;
use crate::Result;

/// Target arc length between quadrature nodes in [`forward_sinogram`].
pub const ARC_STEP: f64 = 0.01;
/// Smallest node count per circle in [`forward_sinogram`].
pub const MIN_NODES: usize = 64;

/// Mean of `f` over the geodesic circle of radius `r` about `x`, with `n`
/// nodes. Points outside the declared support of `f` contribute 0.
pub fn spherical_mean<F: Field + ?Sized>(f: &F, x: &Point, r: f64, n: usize) -> Result<f64> {
    if x.geometry() != f.geometry() {
        return Err(arg_err!("center lies in {}, field in {}", x.geometry().name(), f.geometry().name()));
    }
    let support = f.support_radius();
    let eval = |p: &Point| if p.to_polar().0 >= support { 0.0 } else { f.value(p) };
    if r == 0.0 {
        return Ok(eval(x));
    }
    if r < 0.0 {
        return Err(arg_err!("circle radius must be non-negative, got {r}"));
    }
    Ok(geodesic_circle_quadrature(x, r, n)?.mean(eval))
}

/// Node count for a circle of radius `r` at arc spacing `arc_step`, rounded
/// up to a multiple of 8.
pub fn nodes_for_radius(geometry: Geometry, r: f64, arc_step: f64) -> usize {
    let length = 2.0 * PI * geometry.circle_density(r);
    let n = ((length / arc_step).ceil() as usize).max(MIN_NODES);
    n.div_ceil(8) * 8
}

/// Rejects fields not supported in the closed ball of radius `r` and
/// windows shorter than `2r`.
pub fn check_forward_inputs<F: Field + ?Sized>(f: &F, r: f64, r_max: f64) -> Result<()> {
    if f.support_radius() > r * (1.0 + 1e-12) {
        return Err(arg_err!(
            "field support radius {} exceeds the detector radius {r}",
            f.support_radius()
        ));
    }
    if r_max < 2.0 * r * (1.0 - 1e-12) {
        return Err(arg_err!("r_max = {r_max} must be at least 2R = {}", 2.0 * r));
    }
    Ok(())
}

/// `g(θ_j, r_k)`: means over circles of radius `r_k` about `x(θ_j)` on the
/// detector circle of radius `r`. Rejects fields not supported in the
/// closed ball and windows shorter than `2r`.
pub fn forward_sinogram<F: Field + ?Sized>(f: &F, r: f64, n_theta: usize, n_r: usize, r_max: f64) -> Result<Sinogram> {
    check_forward_inputs(f, r, r_max)?;
    forward_sinogram_unchecked(f, r, n_theta, n_r, r_max, ARC_STEP)
}

/// [`forward_sinogram`] without the support and window checks, with an
/// explicit node spacing.
pub fn forward_sinogram_unchecked<F: Field + ?Sized>(
    f: &F,
    r: f64,
    n_theta: usize,
    n_r: usize,
    r_max: f64,
    arc_step: f64,
) -> Result<Sinogram> {
    let mut g = Sinogram::zeros(f.geometry(), r, n_theta, n_r, r_max)?;
    for j in 0..n_theta {
        let row = sinogram_row(f, r, g.theta(j), n_r, r_max, arc_step)?;
        g.values[j * n_r..(j + 1) * n_r].copy_from_slice(&row);
    }
    Ok(g)
}

/// One row `k ↦ g(θ, r_k)` of a sinogram on `n_r` uniform radii of `[0, r_max]`.
pub fn sinogram_row<F: Field + ?Sized>(f: &F, r: f64, theta: f64, n_r: usize, r_max: f64, arc_step: f64) -> Result<Vec<f64>> {
    let geometry = f.geometry();
    if geometry == Geometry::S2 && r_max >= PI {
        return Err(arg_err!("spherical window must end before pi, got {r_max}"));
    }
    if !(arc_step > 0.0) {
        return Err(arg_err!("arc step must be positive, got {arc_step}"));
    }
    if n_r < 2 {
        return Err(arg_err!("need at least 2 radii, got {n_r}"));
    }
    let x = Point::polar(geometry, r, theta)?;
    (0..n_r)
        .map(|k| {
            let rk = if k + 1 == n_r { r_max } else { r_max * k as f64 / (n_r - 1) as f64 };
            spherical_mean(f, &x, rk, nodes_for_radius(geometry, rk, arc_step))
        })
        .collect()
}

/// Grid for a Darboux evolution serving a sinogram with `n_r` radii on
/// `[0, r_max]` and `n_s` nominal samples on `[0, R + r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxLayout {
    pub grid: DarbouxGrid,
    /// Steps of size `grid.dr` per sinogram radius interval.
    pub substeps: usize,
    /// Intervals of size `grid.ds` in `[0, R]`.
    pub ball_cells: usize,
    pub s_max: f64,
}

impl DarbouxLayout {
    pub fn new(r: f64, r_max: f64, n_r: usize, n_s: usize) -> Result<Self> {
        if n_s < 16 || n_r < 2 {
            return Err(arg_err!("Darboux grid needs n_s >= 16 and n_r >= 2, got n_s = {n_s}, n_r = {n_r}"));
        }
        let ball_cells = (((n_s - 1) as f64 * r / (r + r_max)).round() as usize).max(8);
        let ds = r / ball_cells as f64;
        let out_dr = r_max / (n_r - 1) as f64;
        let q = substeps(out_dr, ds, CFL_LIMIT);
        let cells = ((r + r_max) / ds - 1e-9).ceil() as usize;
        Ok(DarbouxLayout { grid: DarbouxGrid { ds, dr: out_dr / q as f64 }, substeps: q, ball_cells, s_max: cells as f64 * ds })
    }

    /// Uniform nodes of `[0, s_max]`.
    pub fn s_grid(&self) -> Vec<f64> {
        let cells = (self.s_max / self.grid.ds).round() as usize;
        (0..=cells).map(|i| i as f64 * self.grid.ds).collect()
    }
}

/// Forward sinogram by per-mode Darboux evolution of the field's circular
/// harmonics up to order `m_max`.
pub fn darboux_forward_sinogram<F: Field + ?Sized>(
    f: &F,
    r: f64,
    n_theta: usize,
    n_r: usize,
    r_max: f64,
    n_s: usize,
    m_max: usize,
) -> Result<Sinogram> {
    let geometry = f.geometry();
    let layout = DarbouxLayout::new(r, r_max, n_r, n_s)?;
    let s_grid = layout.s_grid();
    let n_angles = n_theta.max(2 * m_max + 2);
    let field = crate::field::ModeField::from_field(f, r, s_grid, m_max, n_angles)?;
    let mut traces = BTreeMap::new();
    for (key, profile) in &field.modes {
        let sol = darboux_forward_mode(profile, key.m, geometry, r, layout.grid, layout.s_max, r_max)?;
        let trace: Vec<f64> = (0..n_r).map(|k| sol.trace[k * layout.substeps]).collect();
        traces.insert(*key, trace);
    }
    sinogram_from_modes(geometry, r, n_theta, r_max, n_r, &traces)
}

/// `g(θ_j, r_k) = Σ g_key(r_k) Y_key(θ_j)`.
pub fn sinogram_from_modes(
    geometry: Geometry,
    r: f64,
    n_theta: usize,
    r_max: f64,
    n_r: usize,
    modes: &BTreeMap<ModeKey, Vec<f64>>,
) -> Result<Sinogram> {
    let mut g = Sinogram::zeros(geometry, r, n_theta, n_r, r_max)?;
    for (key, profile) in modes {
        if profile.len() != n_r {
            return Err(arg_err!("mode ({}, {:?}) has {} samples, expected {n_r}", key.m, key.parity, profile.len()));
        }
        for j in 0..n_theta {
            let y = key.angular(g.theta(j));
            for (k, p) in profile.iter().enumerate() {
                g.values[j * n_r + k] += y * p;
            }
        }
    }
    Ok(g)
}

/// Circular-harmonic coefficients `g_key(r_k) = ∫ g(θ, r_k) Y_key(θ) dθ`.
pub fn sinogram_modes(g: &Sinogram, m_max: usize) -> BTreeMap<ModeKey, Vec<f64>> {
    let mut out: BTreeMap<ModeKey, Vec<f64>> = BTreeMap::new();
    for k in 0..g.n_r {
        for (key, c) in angular_modes(&g.column(k), m_max) {
            out.entry(key).or_insert_with(|| vec![0.0; g.n_r])[k] = c;
        }
    }
    out
}
