use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::SpectralParameter;
use crate::error::{arg_err, num_err};
use crate::geometry::Space;
use crate::jet::Jet;
use crate::Result;

const SERIES_MAX_TERMS: usize = 400;
const SERIES_REL_TOL: f64 = 1e-16;
/// Phase advance per RK4 substep at the largest wavenumber of a mesh.
const PHASE_STEP: f64 = 0.01;
/// Substep bound relative to the distance from a singular endpoint.
const SINGULAR_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `h(0) = 1`, used for `m = 0`.
    UnitAtZero,
    /// `h(s) = s^m + O(s^{m+2})`, used for `m ≥ 1`.
    FrobeniusLeadingOne,
}

/// Samples of `h_{m,λ}` and `h'_{m,λ}` on a uniform radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub space: Space,
    pub n: usize,
    pub m: usize,
    pub param: SpectralParameter,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub normalization: Normalization,
}

struct Segment {
    steps: usize,
    delta: f64,
    /// drift `p` and potential `M/w²` at the half-step nodes of the segment
    drift: Vec<f64>,
    potential: Vec<f64>,
}

/// Fixed integration mesh for the radial equation
/// `h'' + (n-1) w'/w h' - M/w² h + E h = 0` on `[0, r_max]`.
///
/// The mesh depends only on the largest spectral parameter it must serve,
/// so the endpoint value is a smooth function of `λ` across a scan.
pub struct RadialPropagator {
    space: Space,
    n: usize,
    m: usize,
    grid: Vec<f64>,
    handoff: f64,
    series_nodes: usize,
    segments: Vec<Segment>,
}

pub(crate) fn check_space_dimension(space: Space, n: usize) -> Result<()> {
    if n < 2 {
        return Err(arg_err!("dimension must be at least 2, got {n}"));
    }
    if space == Space::Spherical && n != 2 {
        return Err(arg_err!("spherical radial equations are implemented for n = 2 only"));
    }
    Ok(())
}

fn uniform_grid(r_max: f64, count: usize) -> Vec<f64> {
    let h = r_max / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { r_max } else { i as f64 * h }).collect()
}

impl RadialPropagator {
    /// Builds the mesh for `count` grid nodes on `[0, r_max]`, accurate for
    /// all `|λ| ≤ lambda_cap`.
    pub fn new(space: Space, n: usize, m: usize, r_max: f64, count: usize, lambda_cap: f64) -> Result<Self> {
        check_space_dimension(space, n)?;
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(arg_err!("r_max must be positive and finite, got {r_max}"));
        }
        if space == Space::Spherical && r_max >= PI {
            return Err(arg_err!("spherical radial grid must end before pi, got r_max = {r_max}"));
        }
        if count < 64 {
            return Err(arg_err!("radial grid needs at least 64 nodes, got {count}"));
        }
        let grid = uniform_grid(r_max, count);
        let dr = grid[1];
        let cap = SpectralParameter::new(space, n, lambda_cap.abs())?;
        let k_eff = cap.energy().max(1.0).sqrt();

        let snap = (5usize).max((0.01 / dr).ceil() as usize).min(count - 1);
        let mut handoff = grid[snap].min(0.5).min(1.5 / k_eff);
        let mut series_nodes = grid.iter().take_while(|&&r| r <= handoff).count();
        if series_nodes == count {
            handoff = grid[count - 2];
            series_nodes = count - 1;
        }

        let mmn = (m + n) as f64;
        let mut stations = Vec::with_capacity(count - series_nodes + 1);
        stations.push(handoff);
        stations.extend_from_slice(&grid[series_nodes..]);
        let mut segments = Vec::with_capacity(stations.len() - 1);
        let c = (n - 1) as f64;
        let big_m = (m * (m + n - 2)) as f64;
        for w in stations.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut dist = a;
            if space == Space::Spherical {
                dist = dist.min(PI - b);
            }
            let bound = (PHASE_STEP / k_eff).min(SINGULAR_STEP * dist / mmn);
            let steps = ((b - a) / bound).ceil().max(1.0) as usize;
            let delta = (b - a) / steps as f64;
            let mut drift = Vec::with_capacity(2 * steps + 1);
            let mut potential = Vec::with_capacity(2 * steps + 1);
            for j in 0..=2 * steps {
                let r = if j == 2 * steps { b } else { a + 0.5 * delta * j as f64 };
                let s = space.sine(r);
                drift.push(c * space.cotangent(r));
                potential.push(big_m / (s * s));
            }
            segments.push(Segment { steps, delta, drift, potential });
        }
        Ok(RadialPropagator { space, n, m, grid, handoff, series_nodes, segments })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn handoff_radius(&self) -> f64 {
        self.handoff
    }

    fn march<F: FnMut(usize, f64, f64)>(&self, energy: f64, mut record: F) -> Result<(f64, f64)> {
        let (mut h, mut g) = frobenius(self.space, self.n, self.m, energy, self.handoff)?;
        for (idx, seg) in self.segments.iter().enumerate() {
            let d = seg.delta;
            for j in 0..seg.steps {
                let (p0, q0) = (seg.drift[2 * j], seg.potential[2 * j] - energy);
                let (p1, q1) = (seg.drift[2 * j + 1], seg.potential[2 * j + 1] - energy);
                let (p2, q2) = (seg.drift[2 * j + 2], seg.potential[2 * j + 2] - energy);
                let k1h = g;
                let k1g = -p0 * g + q0 * h;
                let (h2, g2) = (h + 0.5 * d * k1h, g + 0.5 * d * k1g);
                let k2h = g2;
                let k2g = -p1 * g2 + q1 * h2;
                let (h3, g3) = (h + 0.5 * d * k2h, g + 0.5 * d * k2g);
                let k3h = g3;
                let k3g = -p1 * g3 + q1 * h3;
                let (h4, g4) = (h + d * k3h, g + d * k3g);
                let k4h = g4;
                let k4g = -p2 * g4 + q2 * h4;
                h += d / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
                g += d / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            }
            record(self.series_nodes + idx, h, g);
        }
        if !(h.is_finite() && g.is_finite()) {
            return Err(num_err!("radial integration overflowed (m = {}, E = {energy})", self.m));
        }
        Ok((h, g))
    }

    /// `(h(r_max), h'(r_max))` for the given `λ`.
    pub fn endpoint(&self, lambda: f64) -> Result<(f64, f64)> {
        let param = SpectralParameter::new(self.space, self.n, lambda)?;
        self.march(param.energy(), |_, _, _| {})
    }

    pub fn solve(&self, lambda: f64) -> Result<RadialSolution> {
        let param = SpectralParameter::new(self.space, self.n, lambda)?;
        let energy = param.energy();
        let count = self.grid.len();
        let mut values = vec![0.0; count];
        let mut derivs = vec![0.0; count];
        for i in 0..self.series_nodes {
            let (h, g) = if i == 0 {
                origin_values(self.m)
            } else {
                frobenius(self.space, self.n, self.m, energy, self.grid[i])?
            };
            values[i] = h;
            derivs[i] = g;
        }
        self.march(energy, |i, h, g| {
            values[i] = h;
            derivs[i] = g;
        })?;
        Ok(RadialSolution {
            space: self.space,
            n: self.n,
            m: self.m,
            param,
            grid: self.grid.clone(),
            values,
            derivs,
            normalization: if self.m == 0 { Normalization::UnitAtZero } else { Normalization::FrobeniusLeadingOne },
        })
    }
}

fn origin_values(m: usize) -> (f64, f64) {
    match m {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        _ => (0.0, 0.0),
    }
}

/// Solves the radial eigenfunction equation on `N` uniform nodes of `[0, r_max]`.
pub fn solve_radial(space: Space, n: usize, m: usize, lambda: f64, r_max: f64, count: usize) -> Result<RadialSolution> {
    RadialPropagator::new(space, n, m, r_max, count, lambda)?.solve(lambda)
}

/// Taylor coefficients of `w²` and `w w'` about 0 (`w = sinh` or `sin`).
fn weight_series(space: Space, len: usize) -> (Vec<f64>, Vec<f64>) {
    let sign = match space {
        Space::Hyperbolic => 1.0,
        Space::Spherical => -1.0,
    };
    let mut p = vec![0.0; len];
    let mut q = vec![0.0; len];
    // w² = Σ_{k≥1} ±^{k+1} 2^{2k-1} r^{2k}/(2k)!,  w w' = Σ_{k≥0} ±^k 2^{2k} r^{2k+1}/(2k+1)!
    let mut pk = 1.0;
    let mut qk = 1.0;
    let mut k = 1;
    while 2 * k < len {
        p[2 * k] = pk;
        pk *= sign * 4.0 / ((2 * k + 2) as f64 * (2 * k + 1) as f64);
        k += 1;
    }
    let mut k = 0;
    while 2 * k + 1 < len {
        q[2 * k + 1] = qk;
        qk *= sign * 4.0 / ((2 * k + 3) as f64 * (2 * k + 2) as f64);
        k += 1;
    }
    (p, q)
}

/// Frobenius series `h = r^m Σ c_J r^J`, `c_0 = 1`, summed at `r > 0`.
/// Returns `(h(r), h'(r))`.
pub(crate) fn frobenius(space: Space, n: usize, m: usize, energy: f64, r: f64) -> Result<(f64, f64)> {
    const KMAX: usize = 64;
    let (p, q) = weight_series(space, KMAX);
    let nf = (n - 1) as f64;
    let mf = m as f64;
    // d_J = c_J r^J
    let mut d: Vec<f64> = Vec::with_capacity(64);
    d.push(1.0);
    let mut sum_h = 1.0;
    let mut sum_g = mf;
    let mut quiet = 0;
    for jj in 1..SERIES_MAX_TERMS {
        let jf = jj as f64;
        let mut acc = 0.0;
        for k in 4..KMAX.min(jj + 3) {
            if p[k] != 0.0 {
                let idx = jj + 2 - k;
                let e = mf + (idx as f64);
                acc += p[k] * r.powi(k as i32 - 2) * d[idx] * e * (e - 1.0);
            }
        }
        for k in 3..KMAX.min(jj + 2) {
            if q[k] != 0.0 {
                let idx = jj + 1 - k;
                acc += nf * q[k] * r.powi(k as i32 - 1) * d[idx] * (mf + idx as f64);
            }
        }
        for k in 2..KMAX.min(jj + 1) {
            if p[k] != 0.0 {
                acc += energy * p[k] * r.powi(k as i32) * d[jj - k];
            }
        }
        let dj = -acc / (jf * (2.0 * mf + jf + (n as f64) - 2.0));
        d.push(dj);
        sum_h += dj;
        sum_g += (mf + jf) * dj;
        if jj % 2 == 0 {
            let small = dj.abs() <= SERIES_REL_TOL * sum_h.abs().max(f64::MIN_POSITIVE)
                && ((mf + jf) * dj).abs() <= SERIES_REL_TOL * sum_g.abs().max(sum_h.abs());
            if small && jj >= 4 {
                quiet += 1;
                if quiet >= 2 {
                    let rm = r.powi(m as i32);
                    return Ok((rm * sum_h, rm * sum_g / r));
                }
            } else {
                quiet = 0;
            }
        }
    }
    Err(num_err!(
        "Frobenius series did not converge at handoff radius {r} (m = {m}, E = {energy}) within {SERIES_MAX_TERMS} terms"
    ))
}

/// Taylor coefficients at `base` of the solution of `y'' + p y' + q y = 0`
/// with `y(base) = y0`, `y'(base) = y1`, given jets of `p` and `q`.
pub(crate) fn taylor_solution(p: &Jet, q: &Jet, y0: f64, y1: f64) -> Vec<f64> {
    let order = p.order().min(q.order()) + 2;
    let pc = p.coeffs();
    let qc = q.coeffs();
    let mut a = vec![0.0; order + 1];
    a[0] = y0;
    a[1] = y1;
    for j in 0..=order - 2 {
        let mut s = 0.0;
        for l in 0..=j {
            s += pc[l] * (j - l + 1) as f64 * a[j - l + 1] + qc[l] * a[j - l];
        }
        a[j + 2] = -s / ((j + 2) as f64 * (j + 1) as f64);
    }
    a
}

impl RadialSolution {
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().expect("grid is non-empty")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Jets of the drift and the zero-order coefficient at `base`.
    pub(crate) fn coefficient_jets(space: Space, n: usize, m: usize, energy: f64, base: f64, order: usize) -> Result<(Jet, Jet)> {
        let p = space.cotangent_jet(base, order)?.scale((n - 1) as f64);
        let w = space.sine_jet(base, order);
        let big_m = (m * (m + n - 2)) as f64;
        let inv = w.powi(-2)?.scale(-big_m);
        let q = &inv + &Jet::constant(base, order, energy);
        Ok((p, q))
    }

    /// Largest discrepancy between consecutive grid samples and a
    /// high-order Taylor continuation of the equation from the earlier node,
    /// relative to `max |h|`. Nodes too close to a singular endpoint for the
    /// local series to converge are skipped.
    pub fn ode_residual(&self) -> Result<f64> {
        const ORDER: usize = 30;
        let dr = self.step();
        let energy = self.param.energy();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 1..self.grid.len() - 1 {
            let r = self.grid[i];
            let mut dist = r;
            if self.space == Space::Spherical {
                dist = dist.min(PI - r);
            }
            if dr > 0.25 * dist {
                continue;
            }
            let (p, q) = Self::coefficient_jets(self.space, self.n, self.m, energy, r, ORDER)?;
            let a = taylor_solution(&p, &q, self.values[i], self.derivs[i]);
            let mut v = 0.0;
            for c in a.iter().rev() {
                v = v * dr + c;
            }
            worst = worst.max((v - self.values[i + 1]).abs() / scale);
        }
        Ok(worst)
    }

    /// Number of sign changes of `h` strictly inside `(0, r_max)`, read off
    /// the interior samples.
    pub fn interior_zero_count(&self) -> usize {
        sign_changes(&self.values[1..self.values.len() - 1], self.max_abs())
    }

    /// Number of zeros of `h` in `(0, r_max)` including any in the last grid
    /// cell, located through the sign of `h(r_max)`. By Sturm oscillation this
    /// is the number of Dirichlet roots below `λ` when `h(r_max) ≠ 0`.
    pub fn zeros_before_end(&self) -> usize {
        sign_changes(&self.values[1..], self.max_abs())
    }
}

fn sign_changes(values: &[f64], scale: f64) -> usize {
    let mut count = 0;
    let mut last = 0.0;
    for &v in values {
        if v.abs() <= 1e-13 * scale {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            count += 1;
        }
        last = v.signum();
    }
    count
}
