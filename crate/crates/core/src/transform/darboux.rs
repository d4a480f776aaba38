//! Finite-difference evolution of the mode Darboux equation
//!
//! ```text
//! U_rr + (n-1) coth(r) U_r = U_ss + (n-1) coth(s) U_s - M/sinh²(s) U
//! ```
//!
//! (`cot`/`sin` on S²) by leapfrog in `r` with a conservative three-point
//! stencil in `s`. The `r`-part uses the same conservative form as `s`
//! (`w⁻¹ ∂_r (w ∂_r)`), which keeps the singular drift implicit, and the
//! angular potential is averaged over the outer levels.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::geometry::{Geometry, Space};
use crate::linalg::solve_tridiagonal;
use crate::Result;

/// Largest admitted `Δr / Δs`.
pub const CFL_LIMIT: f64 = 0.9;
/// Dimension of the implemented geometries.
const N: usize = 2;

/// Step sizes of a Darboux grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxGrid {
    pub ds: f64,
    pub dr: f64,
}

impl DarbouxGrid {
    pub fn cfl(&self) -> f64 {
        self.dr / self.ds
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !(self.ds > 0.0 && self.dr > 0.0) {
            return Err(arg_err!("grid steps must be positive, got ds = {}, dr = {}", self.ds, self.dr));
        }
        if self.cfl() > CFL_LIMIT + 1e-12 {
            return Err(arg_err!(
                "CFL violation: dr / ds = {:.4} exceeds {CFL_LIMIT} (dr = {}, ds = {})",
                self.cfl(),
                self.dr,
                self.ds
            ));
        }
        Ok(())
    }
}

/// Conservative discretization of `D_{m,s}` on `s_i = i Δs`, `i < ns`.
pub(crate) struct Stencil {
    pub ns: usize,
    pub m: usize,
    /// face weights `w(s_i - Δs/2)` and `w(s_i + Δs/2)` over `w(s_i) Δs²`
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// `M / w(s_i)²`
    pub potential: Vec<f64>,
}

impl Stencil {
    pub fn new(space: Space, m: usize, ds: f64, ns: usize) -> Self {
        let big_m = (m * (m + N - 2)) as f64;
        let h2 = ds * ds;
        let mut lower = vec![0.0; ns];
        let mut upper = vec![0.0; ns];
        let mut potential = vec![0.0; ns];
        // centre: U_ss + (n-1)coth(s) U_s -> n U_ss with U_s = 0
        lower[0] = 0.0;
        upper[0] = 2.0 * N as f64 / h2;
        for i in 1..ns {
            let s = i as f64 * ds;
            let w = space.sine(s);
            lower[i] = space.sine(s - 0.5 * ds) / (w * h2);
            upper[i] = space.sine(s + 0.5 * ds) / (w * h2);
            potential[i] = big_m / (w * w);
        }
        Stencil { ns, m, lower, upper, potential }
    }

    /// First index not pinned by the centre condition.
    pub fn first(&self) -> usize {
        if self.m == 0 { 0 } else { 1 }
    }

    /// Potential-free part of the operator at node `i` (`0 < i < ns - 1`, or the centre).
    #[inline]
    pub fn l0(&self, u: &[f64], i: usize) -> f64 {
        if i == 0 {
            return self.upper[0] * (u[1] - u[0]);
        }
        self.upper[i] * (u[i + 1] - u[i]) - self.lower[i] * (u[i] - u[i - 1])
    }

    /// Leapfrog update for the level `r + σΔr` given levels `r` and `r - σΔr`,
    /// on interior nodes, with the `r`-part in the conservative form
    /// `(a_next (X - U) - a_prev (U - Y)) / Δr²`, `a = w(r ± σΔr/2) / w(r)`.
    /// Boundary nodes of `next` are left to the caller.
    pub fn leapfrog(&self, cur: &[f64], prev: &[f64], next: &mut [f64], faces: (f64, f64), dr: f64) {
        let (a_next, a_prev) = faces;
        let h2 = dr * dr;
        for i in self.first()..self.ns - 1 {
            let p = 0.5 * h2 * self.potential[i];
            let rhs = (a_next + a_prev) * cur[i] - a_prev * prev[i] + h2 * self.l0(cur, i) - p * prev[i];
            next[i] = rhs / (a_next + p);
        }
        if self.m > 0 {
            next[0] = 0.0;
        }
    }

    /// The step out of `r = 0` with `U_r = 0`: `U¹ = U⁰ + a (L0 U⁰ - P (U⁰ + U¹)/2)`, `a = Δr²/(2n)`.
    pub fn start(&self, u0: &[f64], u1: &mut [f64], dr: f64) {
        let a = dr * dr / (2.0 * N as f64);
        for i in self.first()..self.ns - 1 {
            let p = 0.5 * a * self.potential[i];
            u1[i] = (u0[i] + a * self.l0(u0, i) - p * u0[i]) / (1.0 + p);
        }
        if self.m > 0 {
            u1[0] = 0.0;
        }
    }

    /// Mismatch between the flux `w ∂_r U` across `r = Δr/2` implied by the
    /// recursion at `r = Δr` and the one imposed by the step out of `r = 0`.
    pub fn origin_flux(&self, u0: &[f64], u1: &[f64], u2: &[f64], dr: f64, space: Space) -> Vec<f64> {
        let (w_half, w_one, w_three) = (space.sine(0.5 * dr), space.sine(dr), space.sine(1.5 * dr));
        let mut out = vec![0.0; self.ns];
        for i in self.first()..self.ns - 1 {
            let source = self.l0(u1, i) - 0.5 * self.potential[i] * (u2[i] + u0[i]);
            let march = w_three * (u2[i] - u1[i]) / dr - dr * w_one * source;
            let centre = w_half * (u1[i] - u0[i]) / dr;
            out[i] = march - centre;
        }
        out
    }

    /// Inverts [`Stencil::start`]: recovers `U⁰` from `U¹` with the Dirichlet
    /// value `edge` at the last node.
    pub fn finish(&self, u1: &[f64], edge: f64, dr: f64) -> Result<Vec<f64>> {
        let a = dr * dr / (2.0 * N as f64);
        let lo = self.first();
        let hi = self.ns - 1;
        let count = hi - lo;
        let mut sub = vec![0.0; count];
        let mut diag = vec![0.0; count];
        let mut sup = vec![0.0; count];
        let mut rhs = vec![0.0; count];
        for (row, i) in (lo..hi).enumerate() {
            let p = 0.5 * a * self.potential[i];
            rhs[row] = (1.0 + p) * u1[i];
            if i == 0 {
                diag[row] = 1.0 - a * self.upper[0] - p;
                sup[row] = a * self.upper[0];
                continue;
            }
            diag[row] = 1.0 - a * (self.upper[i] + self.lower[i]) - p;
            if i > lo {
                sub[row] = a * self.lower[i];
            }
            if i + 1 < hi {
                sup[row] = a * self.upper[i];
            } else {
                rhs[row] -= a * self.upper[i] * edge;
            }
        }
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut u0 = vec![0.0; self.ns];
        u0[lo..hi].copy_from_slice(&x);
        u0[hi] = edge;
        Ok(u0)
    }
}

/// `(w(r + σΔr/2), w(r - σΔr/2)) / w(r)` with `w = sinh` or `sin`.
pub(crate) fn r_faces(space: Space, r: f64, dr: f64, sigma: f64) -> (f64, f64) {
    let w = space.sine(r);
    (space.sine(r + 0.5 * sigma * dr) / w, space.sine(r - 0.5 * sigma * dr) / w)
}

/// Number of substeps per output interval so that the CFL bound holds.
pub fn substeps(output_dr: f64, ds: f64, cfl: f64) -> usize {
    (output_dr / (cfl * ds) - 1e-12).ceil().max(1.0) as usize
}

/// Forward mode evolution sampled on the output radii `k · out_dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardModeSolution {
    pub m: usize,
    pub grid: DarbouxGrid,
    pub s_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// `u[k * s_grid.len() + i] = G(s_i, r_k)`
    pub u: Vec<f64>,
    /// `G(R, r_k)`
    pub trace: Vec<f64>,
}

impl ForwardModeSolution {
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.u[k * self.s_grid.len() + i]
    }
}

/// Evolves the initial profile `f` (samples on `s_i = i Δs`, `s_i ≤ s_max`)
/// with `G(·, 0) = f`, `G_r(·, 0) = 0`, and returns `G` on `r_k = k Δr`.
/// `R` must be a grid node. The outer boundary carries `G(s_max, r) = 0`.
pub fn darboux_forward_mode(
    f: &[f64],
    m: usize,
    geometry: Geometry,
    r: f64,
    grid: DarbouxGrid,
    s_max: f64,
    r_max: f64,
) -> Result<ForwardModeSolution> {
    grid.check()?;
    let ds = grid.ds;
    let ns = (s_max / ds).round() as usize + 1;
    if ((ns - 1) as f64 * ds - s_max).abs() > 1e-9 * s_max {
        return Err(arg_err!("s_max = {s_max} is not a multiple of ds = {ds}"));
    }
    if f.len() != ns {
        return Err(arg_err!("initial profile has {} samples, the s grid has {ns}", f.len()));
    }
    if s_max + 1e-12 < r + r_max {
        return Err(arg_err!("s_max = {s_max} is below R + r_max = {}", r + r_max));
    }
    if geometry == Geometry::S2 && s_max >= PI {
        return Err(arg_err!("spherical s grid must end before pi, got {s_max}"));
    }
    let ir = (r / ds).round() as usize;
    if ((ir as f64) * ds - r).abs() > 1e-9 * r {
        return Err(arg_err!("R = {r} does not lie on the s grid"));
    }
    let steps = (r_max / grid.dr).round() as usize;
    if ((steps as f64) * grid.dr - r_max).abs() > 1e-9 * r_max {
        return Err(arg_err!("r_max = {r_max} is not a multiple of dr = {}", grid.dr));
    }
    let space = geometry.space();
    let st = Stencil::new(space, m, ds, ns);
    let mut u = Vec::with_capacity(ns * (steps + 1));
    let mut prev = f.to_vec();
    prev[ns - 1] = 0.0;
    if m > 0 {
        prev[0] = 0.0;
    }
    u.extend_from_slice(&prev);
    let mut cur = vec![0.0; ns];
    st.start(&prev, &mut cur, grid.dr);
    if steps >= 1 {
        u.extend_from_slice(&cur);
    }
    let mut next = vec![0.0; ns];
    for k in 1..steps {
        st.leapfrog(&cur, &prev, &mut next, r_faces(space, k as f64 * grid.dr, grid.dr, 1.0), grid.dr);
        next[ns - 1] = 0.0;
        u.extend_from_slice(&next);
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
    }
    let s_grid: Vec<f64> = (0..ns).map(|i| i as f64 * ds).collect();
    let r_grid: Vec<f64> = (0..=steps).map(|k| k as f64 * grid.dr).collect();
    let trace = (0..=steps).map(|k| u[k * ns + ir]).collect();
    Ok(ForwardModeSolution { m, grid, s_grid, r_grid, u, trace })
}
