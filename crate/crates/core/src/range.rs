//! Range certification for sinograms: support and smoothness diagnostics,
//! and the orthogonality residuals against the Dirichlet eigenfunctions of
//! the ball.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::field::{angular_modes, ModeKey, Parity};
use crate::geometry::Geometry;
use crate::quadrature::{fd_weights, trapezoid_weights};
use crate::radial::RadialPropagator;
use crate::sinogram::Sinogram;
use crate::spectrum::{SpectralBasis, SpectralEntry};
use crate::transform::{t_shift, FlKernel};
use crate::Result;

/// Derivatives checked at `r = 0` by default.
pub const ORIGIN_ORDERS: usize = 4;
/// Upper end of the real-axis window for the Paley–Wiener proxy.
pub const PW_WINDOW: f64 = 30.0;
/// Spectral coefficients below this fraction of the largest are not fitted.
pub const SPECTRAL_FLOOR: f64 = 1e-10;

/// Certification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// All normalized residuals at or below this pass.
    pub pass: f64,
    /// Any normalized residual at or above this fails.
    pub fail: f64,
    /// `sup |g|` on `r ≥ 2R` relative to `‖g‖∞`.
    pub support: f64,
    /// Relative size below which a scaled derivative at `r = 0` counts as zero.
    pub vanishing: f64,
    /// Smallest admitted Sobolev index estimate.
    pub smoothness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { pass: 5e-3, fail: 5e-2, support: 1e-6, vanishing: 1e-6, smoothness: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    InRange,
    OutOfRange,
    Inconclusive,
}

/// Regularity estimates from spectral decay. A Sobolev index is the fitted
/// algebraic decay rate of the spectrum minus ½, and `None` when the
/// spectrum reaches [`SPECTRAL_FLOOR`] too quickly to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessProxy {
    pub angular_index: Option<f64>,
    pub radial_index: Option<f64>,
    /// Largest `|ĝ(θ_j, λ)|` on the top tenth of `[0, PW_WINDOW]` relative to
    /// the largest overall.
    pub pw_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub support_pass: bool,
    /// `sup |g|` on `r ≥ 2R`.
    pub support_sup: f64,
    pub support_sup_relative: f64,
    /// Per `θ_j`: leading derivatives `∂_r^p g(θ_j, 0)`, `p < orders`, that vanish.
    pub origin_vanishing_orders: Vec<usize>,
    pub orders: usize,
    pub smoothness: SmoothnessProxy,
}

impl SupportReport {
    pub fn origin_pass(&self) -> bool {
        self.origin_vanishing_orders.iter().all(|&o| o >= self.orders)
    }

    pub fn smoothness_pass(&self, tol: &Tolerances) -> bool {
        let ok = |i: Option<f64>| i.is_none_or(|v| v >= tol.smoothness);
        ok(self.smoothness.angular_index) && ok(self.smoothness.radial_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityEntry {
    pub m: usize,
    pub parity: Parity,
    pub k: usize,
    pub lambda: f64,
    pub residual: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub geometry: Geometry,
    pub r: f64,
    pub support: SupportReport,
    pub orthogonality: Vec<OrthogonalityEntry>,
    pub max_normalized_residual: f64,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
}

fn check_window(g: &Sinogram, r: f64) -> Result<()> {
    if (g.r - r).abs() > 1e-12 * r.max(1.0) {
        return Err(arg_err!("sinogram detector radius {} differs from R = {r}", g.r));
    }
    if g.r_max < 2.0 * r * (1.0 - 1e-12) {
        return Err(arg_err!("sinogram window [0, {}] does not reach 2R = {}", g.r_max, 2.0 * r));
    }
    if g.n_r < 64 {
        return Err(arg_err!("range diagnostics need at least 64 radii, got {}", g.n_r));
    }
    Ok(())
}

/// Support, vanishing at `r = 0` up to `orders` derivatives, and spectral
/// smoothness of `g`.
pub fn support_smoothness_report(g: &Sinogram, r: f64, orders: usize, tol: &Tolerances) -> Result<SupportReport> {
    check_window(g, r)?;
    let dr = g.r_step();
    let peak = g.max_abs();
    let mut support_sup = 0.0f64;
    for j in 0..g.n_theta {
        for k in 0..g.n_r {
            if g.radius(k) >= 2.0 * r * (1.0 - 1e-12) {
                support_sup = support_sup.max(g.get(j, k).abs());
            }
        }
    }
    let support_sup_relative = if peak > 0.0 { support_sup / peak } else { 0.0 };

    // second-order one-sided stencils: p + 2 nodes for the p-th derivative
    let stencils: Vec<Vec<f64>> = (0..orders)
        .map(|p| {
            let nodes: Vec<f64> = (0..p + 2).map(|i| i as f64).collect();
            fd_weights(&nodes, p)
        })
        .collect();
    let mut factorial = 1.0;
    let scales: Vec<f64> = (0..orders)
        .map(|p| {
            if p > 0 {
                factorial *= p as f64;
            }
            r.powi(p as i32) / (factorial * dr.powi(p as i32))
        })
        .collect();
    let origin_vanishing_orders = (0..g.n_theta)
        .map(|j| {
            let row = g.row(j);
            stencils
                .iter()
                .zip(&scales)
                .take_while(|(w, scale)| {
                    let d: f64 = w.iter().zip(row).map(|(w, v)| w * v).sum();
                    (d * **scale).abs() <= tol.vanishing * peak
                })
                .count()
        })
        .collect();

    let smoothness = SmoothnessProxy {
        angular_index: angular_index(g),
        radial_index: radial_index(g),
        pw_tail: pw_tail(g)?,
    };
    Ok(SupportReport {
        support_pass: support_sup_relative <= tol.support,
        support_sup,
        support_sup_relative,
        origin_vanishing_orders,
        orders,
        smoothness,
    })
}

/// Least-squares slope of `log a_j` against `log j` over the running tail
/// maximum of `a` on `j ∈ [lo, hi)`, stopping at the floor; `None` with
/// fewer than four usable points.
fn decay_rate(a: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let hi = hi.min(a.len());
    let top = a.iter().fold(0.0f64, |x, v| x.max(*v));
    if top == 0.0 || hi <= lo {
        return None;
    }
    let mut envelope = a[..hi].to_vec();
    for j in (0..hi - 1).rev() {
        envelope[j] = envelope[j].max(envelope[j + 1]);
    }
    let pts: Vec<(f64, f64)> = (lo..hi)
        .take_while(|&j| envelope[j] > SPECTRAL_FLOOR * top)
        .map(|j| ((j as f64).ln(), envelope[j].ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(-sxy / sxx)
}

fn angular_index(g: &Sinogram) -> Option<f64> {
    let m_top = (g.n_theta - 1) / 2;
    let mut mags = vec![0.0f64; m_top + 1];
    for k in 0..g.n_r {
        for (key, c) in angular_modes(&g.column(k), m_top) {
            mags[key.m] = mags[key.m].max(c.abs());
        }
    }
    decay_rate(&mags, 2, m_top / 2 + 1).map(|a| a - 0.5)
}

/// Cosine coefficients `∫_0^{r_max} g cos(jπr/r_max) dr` of every row.
fn radial_index(g: &Sinogram) -> Option<f64> {
    let w = trapezoid_weights(g.n_r, g.r_step());
    let count = g.n_r / 4;
    let mut mags = vec![0.0f64; count];
    let grid = g.r_grid();
    let basis: Vec<Vec<f64>> = (0..count)
        .map(|j| grid.iter().zip(&w).map(|(r, w)| w * (j as f64 * PI * r / g.r_max).cos()).collect())
        .collect();
    for jt in 0..g.n_theta {
        let row = g.row(jt);
        for (mag, b) in mags.iter_mut().zip(&basis) {
            let c: f64 = b.iter().zip(row).map(|(b, v)| b * v).sum();
            *mag = mag.max(c.abs());
        }
    }
    decay_rate(&mags, 4, count).map(|a| a - 0.5)
}

fn pw_tail(g: &Sinogram) -> Result<f64> {
    let space = g.geometry.space();
    let shift = t_shift(space);
    let lambdas: Vec<f64> = (0..=60).map(|j| j as f64 * PW_WINDOW / 60.0 - shift).collect();
    let kernel = FlKernel::new(space, 2, g.r_max, g.n_r, &lambdas)?;
    let (mut peak, mut tail) = (0.0f64, 0.0f64);
    for j in 0..g.n_theta {
        for (i, v) in kernel.apply(g.row(j))?.into_iter().enumerate() {
            peak = peak.max(v.abs());
            if i >= 54 {
                tail = tail.max(v.abs());
            }
        }
    }
    Ok(if peak > 0.0 { tail / peak } else { 0.0 })
}

/// `∫_0^{r_max} ∫_S g ∂_ν φ_k h_{λ_k} w(r) dσ dr` for the first `count`
/// basis entries, with trapezoid weights, normalized by
/// `‖g‖ ‖∂_ν φ_k‖_{L²(S)} ‖h_{λ_k} w‖_{L²[0, 2R]}`.
pub fn orthogonality_residuals(g: &Sinogram, basis: &SpectralBasis, count: usize) -> Result<Vec<OrthogonalityEntry>> {
    if basis.geometry != g.geometry {
        return Err(arg_err!("basis lives in {}, sinogram in {}", basis.geometry.name(), g.geometry.name()));
    }
    check_window(g, basis.r)?;
    if count > basis.len() {
        return Err(arg_err!("requested {count} basis entries, the basis has {}", basis.len()));
    }
    let geometry = g.geometry;
    let r = basis.r;
    let entries = &basis.entries[..count];
    let sigma = geometry.circle_density(r);
    let dtheta = 2.0 * PI / g.n_theta as f64;
    let wr = trapezoid_weights(g.n_r, g.r_step());
    let g_norm = (g.values.chunks(g.n_r).map(|row| row.iter().zip(&wr).map(|(v, w)| v * v * w).sum::<f64>()).sum::<f64>()
        * dtheta
        * sigma)
        .sqrt();

    let m_top = entries.iter().map(|e| e.m).max().unwrap_or(0);
    let mut projected: Vec<Vec<f64>> = Vec::new();
    let mut keys: Vec<ModeKey> = Vec::new();
    for k in 0..g.n_r {
        for (key, c) in angular_modes(&g.column(k), m_top) {
            let idx = match keys.iter().position(|x| *x == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    projected.push(vec![0.0; g.n_r]);
                    keys.len() - 1
                }
            };
            projected[idx][k] = c;
        }
    }

    let cap = entries.iter().fold(0.0f64, |a, e| a.max(e.lambda.abs()));
    let prop = RadialPropagator::new(geometry.space(), 2, 0, g.r_max, g.n_r, cap)?;
    let grid = g.r_grid();
    let inside = grid.iter().take_while(|&&x| x <= 2.0 * r * (1.0 + 1e-12)).count();
    let w_in = trapezoid_weights(inside, g.r_step());
    let mut kernels: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut out = Vec::with_capacity(count);
    for e in entries {
        let pos = kernels.iter().position(|(l, _, _)| *l == e.lambda);
        let (_, kernel, kernel_norm) = match pos {
            Some(i) => &kernels[i],
            None => {
                let h = prop.solve(e.lambda)?.values;
                let hw: Vec<f64> = h.iter().zip(&grid).map(|(h, r)| h * geometry.circle_density(*r)).collect();
                let norm = hw[..inside].iter().zip(&w_in).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
                let kernel: Vec<f64> = hw.iter().zip(&wr).map(|(v, w)| v * w).collect();
                kernels.push((e.lambda, kernel, norm));
                kernels.last().expect("just pushed")
            }
        };
        let residual = match keys.iter().position(|k| *k == e.key()) {
            Some(i) => sigma * e.normal_derivative_at_r * projected[i].iter().zip(kernel).map(|(a, b)| a * b).sum::<f64>(),
            None => 0.0,
        };
        let dnu_norm = e.normal_derivative_at_r.abs() * sigma.sqrt();
        let denom = g_norm * dnu_norm * kernel_norm;
        let normalized = if denom > 0.0 { residual.abs() / denom } else { 0.0 };
        out.push(OrthogonalityEntry { m: e.m, parity: e.parity, k: e.k, lambda: e.lambda, residual, normalized });
    }
    Ok(out)
}

/// Both conditions and the verdict: out of range if the support check fails
/// or any normalized residual reaches `tol.fail`; in range if every residual
/// is within `tol.pass` and the origin and smoothness checks pass;
/// inconclusive otherwise.
pub fn certify(g: &Sinogram, basis: &SpectralBasis, count: usize, tol: &Tolerances) -> Result<RangeReport> {
    let support = support_smoothness_report(g, basis.r, ORIGIN_ORDERS, tol)?;
    let orthogonality = orthogonality_residuals(g, basis, count)?;
    let max_normalized_residual = orthogonality.iter().fold(0.0f64, |a, e| a.max(e.normalized));
    let verdict = if !support.support_pass || max_normalized_residual >= tol.fail {
        Verdict::OutOfRange
    } else if max_normalized_residual <= tol.pass && support.origin_pass() && support.smoothness_pass(tol) {
        Verdict::InRange
    } else {
        Verdict::Inconclusive
    };
    Ok(RangeReport {
        geometry: g.geometry,
        r: basis.r,
        support,
        orthogonality,
        max_normalized_residual,
        verdict,
        tolerances: *tol,
    })
}

/// `g(θ, r) = ∂_ν φ(θ) h_λ(r) w(r) χ(r)` for a basis entry, with the smooth
/// cutoff `χ(r) = exp(1 - 1/(1 - (r/2R)²))` on `[0, 2R)`.
pub fn adversarial_sinogram(entry: &SpectralEntry, geometry: Geometry, r: f64, n_theta: usize, n_r: usize, r_max: f64) -> Result<Sinogram> {
    let mut g = Sinogram::zeros(geometry, r, n_theta, n_r, r_max)?;
    let h = RadialPropagator::new(geometry.space(), 2, 0, r_max, n_r, entry.lambda.abs())?.solve(entry.lambda)?.values;
    for k in 0..n_r {
        let rk = g.radius(k);
        let x = rk / (2.0 * r);
        let chi = if x < 1.0 { (1.0 - 1.0 / (1.0 - x * x)).exp() } else { 0.0 };
        let radial = h[k] * geometry.circle_density(rk) * chi;
        for j in 0..n_theta {
            let v = entry.normal_derivative(g.theta(j)) * radial;
            g.set(j, k, v);
        }
    }
    Ok(g)
}
