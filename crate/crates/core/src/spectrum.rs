//! Dirichlet eigenpairs of the Laplace–Beltrami operator on a geodesic
//! ball `B_R` about the origin, by shooting on the radial equation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, num_err};
use crate::field::{ModeKey, Parity};
use crate::geometry::{Geometry, Space};
use crate::linalg::tridiagonal_lowest_eigenvalues;
use crate::quadrature::simpson_weights;
use crate::radial::{RadialPropagator, RadialSolution, SpectralParameter};
use crate::{Error, Result};

/// Version tag of the serialized basis layout.
pub const BASIS_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_RADIAL_NODES: usize = 1025;
pub const SCAN_STEP: f64 = 0.05;
pub const BISECTION_TOL: f64 = 1e-10;

fn check_ball(geometry: Geometry, r: f64) -> Result<()> {
    match geometry {
        Geometry::H2 if r > 0.0 && r.is_finite() => Ok(()),
        Geometry::S2 if r > 0.0 && r < 0.5 * PI => Ok(()),
        Geometry::H2 => Err(arg_err!("ball radius must be positive, got {r}")),
        Geometry::S2 => Err(arg_err!("spherical cap radius must lie in (0, pi/2), got {r}")),
    }
}

/// Roots of `λ ↦ h_{m,λ}(R)` on `(0, lambda_max]` from a fixed propagator.
struct Shooter {
    prop: RadialPropagator,
}

impl Shooter {
    fn new(geometry: Geometry, r: f64, m: usize, lambda_max: f64, nodes: usize) -> Result<Self> {
        Ok(Shooter { prop: RadialPropagator::new(geometry.space(), 2, m, r, nodes, lambda_max)? })
    }

    fn f(&self, lambda: f64) -> Result<f64> {
        Ok(self.prop.endpoint(lambda)?.0)
    }

    fn roots(&self, lambda_max: f64, step: f64) -> Result<Vec<f64>> {
        let steps = (lambda_max / step).ceil() as usize;
        let mut roots = Vec::new();
        let mut a = 0.0;
        let mut fa = self.f(a)?;
        for j in 1..=steps {
            let b = (j as f64 * step).min(lambda_max);
            let fb = self.f(b)?;
            if fb == 0.0 {
                roots.push(b);
            } else if fa != 0.0 && fa.signum() != fb.signum() {
                roots.push(self.bisect(a, b, fa)?);
            }
            a = b;
            fa = fb;
        }
        Ok(roots)
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
        while b - a > BISECTION_TOL {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = self.f(mid)?;
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// The first `count` Dirichlet roots `λ_k` of angular order `m`.
pub fn mode_spectrum(geometry: Geometry, r: f64, m: usize, count: usize, lambda_max: f64) -> Result<Vec<f64>> {
    mode_spectrum_with(geometry, r, m, count, lambda_max, DEFAULT_RADIAL_NODES)
}

pub fn mode_spectrum_with(geometry: Geometry, r: f64, m: usize, count: usize, lambda_max: f64, nodes: usize) -> Result<Vec<f64>> {
    Ok(mode_roots(geometry, r, m, count, lambda_max, nodes)?.0)
}

fn mode_roots(geometry: Geometry, r: f64, m: usize, count: usize, lambda_max: f64, nodes: usize) -> Result<(Vec<f64>, Shooter)> {
    check_ball(geometry, r)?;
    if count == 0 {
        return Err(arg_err!("root count must be at least 1"));
    }
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(arg_err!("lambda_max must be positive, got {lambda_max}"));
    }
    let shooter = Shooter::new(geometry, r, m, lambda_max, nodes)?;
    // oscillation count of h at lambda_max = number of roots below it
    let top = shooter.prop.solve(lambda_max)?;
    let expected = top.zeros_before_end();
    let mut step = SCAN_STEP;
    let mut roots = shooter.roots(lambda_max, step)?;
    let mut refinements = 0;
    loop {
        let below = roots.iter().filter(|&&x| x < lambda_max).count();
        if below == expected {
            break;
        }
        if refinements == 4 {
            return Err(num_err!(
                "scan found {below} roots below {lambda_max} but the oscillation count is {expected} (m = {m})"
            ));
        }
        refinements += 1;
        step *= 0.25;
        roots = shooter.roots(lambda_max, step)?;
    }
    if roots.len() < count {
        return Err(Error::Range(alloc::format!(
            "only {} roots below lambda_max = {lambda_max} for m = {m}; increase lambda_max",
            roots.len()
        )));
    }
    roots.truncate(count);
    Ok((roots, shooter))
}

/// One Dirichlet eigenfunction `φ = c h(s) Y(θ)` with `∫_B φ² dV = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntry {
    pub m: usize,
    pub parity: Parity,
    pub k: usize,
    pub lambda: f64,
    pub eigenvalue: f64,
    /// Radial factor `c h(s)` on `[0, R]`, already normalized.
    pub radial_profile: RadialSolution,
    /// `d/ds` of the normalized radial factor at `s = R`.
    pub normal_derivative_at_r: f64,
    pub l2_norm_check: f64,
}

impl SpectralEntry {
    pub fn key(&self) -> ModeKey {
        ModeKey::new(self.m, self.parity)
    }

    pub fn angular(&self, theta: f64) -> f64 {
        self.key().angular(theta)
    }

    /// `∂_ν φ(R, θ)`.
    pub fn normal_derivative(&self, theta: f64) -> f64 {
        self.normal_derivative_at_r * self.angular(theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBasis {
    pub version: u32,
    pub geometry: Geometry,
    pub r: f64,
    pub m_max: usize,
    pub k_max: usize,
    pub nodes: usize,
    /// Sorted by eigenvalue magnitude, `cos` before `sin`.
    pub entries: Vec<SpectralEntry>,
}

/// Initial upper bound for the `k`-th root of order `m`, from the flat
/// Bessel-zero asymptotics.
fn lambda_guess(r: f64, m: usize, k: usize) -> f64 {
    1.2 * (k as f64 + 0.5 * m as f64 + 1.0) * PI / r + 2.0
}

pub fn assemble_basis(geometry: Geometry, r: f64, m_max: usize, k_max: usize) -> Result<SpectralBasis> {
    assemble_basis_with(geometry, r, m_max, k_max, DEFAULT_RADIAL_NODES)
}

pub fn assemble_basis_with(geometry: Geometry, r: f64, m_max: usize, k_max: usize, nodes: usize) -> Result<SpectralBasis> {
    check_ball(geometry, r)?;
    if k_max == 0 {
        return Err(arg_err!("k_max must be at least 1"));
    }
    let mut entries = Vec::new();
    for m in 0..=m_max {
        let mut lambda_max = lambda_guess(r, m, k_max);
        let (roots, shooter) = loop {
            match mode_roots(geometry, r, m, k_max, lambda_max, nodes) {
                Ok(found) => break found,
                Err(Error::Range(_)) if lambda_max < 1e4 => lambda_max *= 2.0,
                Err(e) => return Err(e),
            }
        };
        for (idx, &lambda) in roots.iter().enumerate() {
            let sol = shooter.prop.solve(lambda)?;
            let (profile, dnu, check) = normalize_profile(geometry, sol);
            let parities: &[Parity] = if m == 0 { &[Parity::Cos] } else { &[Parity::Cos, Parity::Sin] };
            for &parity in parities {
                entries.push(SpectralEntry {
                    m,
                    parity,
                    k: idx + 1,
                    lambda,
                    eigenvalue: profile.param.eigenvalue,
                    radial_profile: profile.clone(),
                    normal_derivative_at_r: dnu,
                    l2_norm_check: check,
                });
            }
        }
    }
    entries.sort_by(|a, b| {
        b.eigenvalue
            .total_cmp(&a.eigenvalue)
            .then(a.m.cmp(&b.m))
            .then(a.parity.cmp(&b.parity))
            .then(a.k.cmp(&b.k))
    });
    Ok(SpectralBasis { version: BASIS_FORMAT_VERSION, geometry, r, m_max, k_max, nodes, entries })
}

/// Scales `h` to unit `∫ h² w ds` and returns it with its derivative at `R`
/// and the re-measured norm.
fn normalize_profile(geometry: Geometry, mut sol: RadialSolution) -> (RadialSolution, f64, f64) {
    let weights = radial_weights(geometry, &sol.grid);
    let norm2: f64 = sol.values.iter().zip(&weights).map(|(h, w)| h * h * w).sum();
    let c = 1.0 / norm2.sqrt();
    sol.values.iter_mut().for_each(|v| *v *= c);
    sol.derivs.iter_mut().for_each(|v| *v *= c);
    let check: f64 = sol.values.iter().zip(&weights).map(|(h, w)| h * h * w).sum::<f64>().sqrt();
    let dnu = *sol.derivs.last().expect("non-empty");
    (sol, dnu, check)
}

fn radial_weights(geometry: Geometry, grid: &[f64]) -> Vec<f64> {
    let mut w = simpson_weights(grid.len(), grid[1] - grid[0]);
    for (wi, s) in w.iter_mut().zip(grid) {
        *wi *= geometry.circle_density(*s);
    }
    w
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sharing a key, in increasing `k`.
    pub fn mode(&self, key: ModeKey) -> Vec<&SpectralEntry> {
        let mut out: Vec<&SpectralEntry> = self.entries.iter().filter(|e| e.key() == key).collect();
        out.sort_by_key(|e| e.k);
        out
    }

    /// Inner product of a field's radial mode profile with every entry of the
    /// same key, `∫ F(s) φ_k(s) w(s) ds`, with `F` sampled on the basis grid.
    pub fn project_profile(&self, key: ModeKey, profile: &[f64]) -> Vec<f64> {
        self.mode(key)
            .iter()
            .map(|e| {
                let w = radial_weights(self.geometry, &e.radial_profile.grid);
                profile.iter().zip(&e.radial_profile.values).zip(&w).map(|((f, h), w)| f * h * w).sum()
            })
            .collect()
    }
}

/// `max |G_ij - δ_ij|` for the Gram matrix of the first `subset` entries,
/// computed by a product rule: periodic trapezoid in `θ`, Simpson in `s`.
pub fn gram_residual(basis: &SpectralBasis, subset: usize) -> f64 {
    let subset = subset.min(basis.entries.len());
    let entries = &basis.entries[..subset];
    let m_top = entries.iter().map(|e| e.m).max().unwrap_or(0);
    let n_theta = 4 * (m_top + 1);
    let dtheta = 2.0 * PI / n_theta as f64;
    let thetas: Vec<f64> = (0..n_theta).map(|j| j as f64 * dtheta).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in entries.iter().enumerate() {
        let w = radial_weights(basis.geometry, &a.radial_profile.grid);
        for b in &entries[i..] {
            let ang: f64 = thetas.iter().map(|&t| a.angular(t) * b.angular(t)).sum::<f64>() * dtheta;
            let rad: f64 = a
                .radial_profile
                .values
                .iter()
                .zip(&b.radial_profile.values)
                .zip(&w)
                .map(|((x, y), w)| x * y * w)
                .sum();
            let same = a.key() == b.key() && a.k == b.k;
            let target = if same { 1.0 } else { 0.0 };
            worst = worst.max((ang * rad - target).abs());
        }
    }
    worst
}

/// Independent eigenvalue oracle: cell-centred finite volumes for
/// `-(w h')'/w + M h/w² = E h` on `points` cells of `[0, R]` with the
/// Dirichlet face at `R`, solved by Sturm bisection of the symmetrized
/// tridiagonal matrix. Returns the first `count` values of `λ`.
pub fn dense_oracle(geometry: Geometry, r: f64, m: usize, count: usize, points: usize) -> Result<Vec<f64>> {
    check_ball(geometry, r)?;
    if points < 16 {
        return Err(arg_err!("dense oracle needs at least 16 cells"));
    }
    let space = geometry.space();
    let h = r / points as f64;
    let big_m = (m * m) as f64;
    let face = |i: usize| space.sine(i as f64 * h);
    let mut diag = vec![0.0; points];
    let mut off = vec![0.0; points - 1];
    let centre: Vec<f64> = (0..points).map(|i| space.sine((i as f64 + 0.5) * h)).collect();
    for i in 0..points {
        let left = face(i);
        let right = face(i + 1);
        let mut k = (left + right) / (h * h) + big_m / centre[i];
        if i + 1 == points {
            k += right / (h * h);
        }
        diag[i] = k / centre[i];
        if i + 1 < points {
            off[i] = -right / (h * h) / (centre[i] * centre[i + 1]).sqrt();
        }
    }
    let energies = tridiagonal_lowest_eigenvalues(&diag, &off, count);
    energies
        .into_iter()
        .map(|e| match space {
            Space::Hyperbolic => {
                if e < 0.25 {
                    Err(num_err!("oracle energy {e} lies below the continuum threshold"))
                } else {
                    Ok((e - 0.25).sqrt())
                }
            }
            Space::Spherical => Ok(0.5 * (-1.0 + (1.0 + 4.0 * e).sqrt())),
        })
        .collect()
}

/// The eigenvalue that `λ` labels in two dimensions.
pub fn eigenvalue_of(geometry: Geometry, lambda: f64) -> f64 {
    SpectralParameter::new(geometry.space(), 2, lambda).map(|p| p.eigenvalue).unwrap_or(f64::NAN)
}
