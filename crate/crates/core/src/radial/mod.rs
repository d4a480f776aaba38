//! Radial eigenfunctions `h_{m,λ}` and the radial operator calculus.
//!
//! On H^n the radial part of an eigenfunction of the Laplace–Beltrami
//! operator with angular order `m` solves
//!
//! ```text
//! h'' + (n-1) coth(r) h' - m(m+n-2)/sinh²(r) h + ((n-1)² + 4λ²)/4 h = 0,
//! ```
//!
//! and on S² the same equation with `cot`, `sin` and `λ(λ+1)`.

mod identities;
mod ode;
mod operators;

pub use identities::{
    kappa, lemma_matrices, u_jet, verify_identity, Identity, IdentityReport, LemmaMatrices, RANK_THRESHOLD,
};
pub use ode::{solve_radial, Normalization, RadialPropagator, RadialSolution};
pub use operators::{apply_operator, apply_operator_magnitude, OperatorKind, OperatorSpec};

pub(crate) use ode::check_space_dimension;

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, num_err};
use crate::geometry::Space;
use crate::quadrature::gauss_legendre;
use crate::Result;

/// A real spectral parameter `λ` together with the eigenvalue it labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParameter {
    pub lambda: f64,
    pub n: usize,
    pub space: Space,
    /// Laplace–Beltrami eigenvalue, `-((n-1)² + 4λ²)/4` or `-λ(λ+1)`.
    pub eigenvalue: f64,
}

impl SpectralParameter {
    pub fn new(space: Space, n: usize, lambda: f64) -> Result<Self> {
        check_space_dimension(space, n)?;
        if !lambda.is_finite() {
            return Err(arg_err!("spectral parameter must be finite, got {lambda}"));
        }
        let eigenvalue = match space {
            Space::Hyperbolic => -(((n - 1) * (n - 1)) as f64 + 4.0 * lambda * lambda) / 4.0,
            Space::Spherical => -lambda * (lambda + 1.0),
        };
        Ok(SpectralParameter { lambda, n, space, eigenvalue })
    }

    /// `μ = (2iλ + n - 1)/2` as `(re, im)`.
    pub fn mu(&self) -> (f64, f64) {
        (0.5 * (self.n - 1) as f64, self.lambda)
    }

    /// The constant `E = -eigenvalue` multiplying `h` in the radial equation.
    pub fn energy(&self) -> f64 {
        -self.eigenvalue
    }
}

/// Boundary average `(1/ω_{n-1}) ∫ e^{μ⟨x,η⟩} dη` for `x` at geodesic
/// distance `r` from the origin, `ω_{n-1}` the total measure of the unit
/// sphere. `n = 2` uses the periodic trapezoid rule, `n = 3` Gauss–Legendre
/// in the polar cosine.
pub fn horospherical_oracle(n: usize, lambda: f64, r: f64, nodes: usize) -> Result<f64> {
    if !(n == 2 || n == 3) {
        return Err(arg_err!("horospherical oracle supports n = 2 or 3, got {n}"));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(arg_err!("radius must be non-negative and finite, got {r}"));
    }
    if nodes < 8 {
        return Err(arg_err!("horospherical oracle needs at least 8 nodes, got {nodes}"));
    }
    let rho = (0.5 * r).tanh();
    let half = 0.5 * (n - 1) as f64;
    // ⟨x,η⟩ with x = ρ e_1 and η·e_1 = t
    let bracket = |t: f64| ((1.0 - rho * rho) / (1.0 - 2.0 * rho * t + rho * rho)).ln();
    let kernel = |t: f64| {
        let b = bracket(t);
        let amp = (half * b).exp();
        let (s, c) = (lambda * b).sin_cos();
        (amp * c, amp * s)
    };
    let (re, im) = if n == 2 {
        let mut acc = (0.0, 0.0);
        for j in 0..nodes {
            let (a, b) = kernel((2.0 * PI * j as f64 / nodes as f64).cos());
            acc.0 += a;
            acc.1 += b;
        }
        (acc.0 / nodes as f64, acc.1 / nodes as f64)
    } else {
        let (t, w): (Vec<f64>, Vec<f64>) = gauss_legendre(nodes);
        let mut acc = (0.0, 0.0);
        for (ti, wi) in t.iter().zip(&w) {
            let (a, b) = kernel(*ti);
            acc.0 += wi * a;
            acc.1 += wi * b;
        }
        (0.5 * acc.0, 0.5 * acc.1)
    };
    if im.abs() > 1e-8 {
        return Err(num_err!("horospherical integral has imaginary part {im} at lambda = {lambda}, r = {r}"));
    }
    Ok(re)
}
