use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::operators::{apply_operator, apply_operator_magnitude, OperatorKind, OperatorSpec};
use crate::error::arg_err;
use crate::jet::{Elementary, Jet};
use crate::linalg::singular_values;
use crate::Result;

/// Operator identities checked pointwise through jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "identity", rename_all = "snake_case")]
pub enum Identity {
    /// `Γ_k D_k = D_{k-1} Γ_k` on `{sinh^a cosh^b : a + b ≤ 3}`.
    Commutation { k: usize },
    /// `(D_m - κ_i) u_i = -i(i-1) u_{i-2}`.
    PropDm { m: usize, i: usize },
    /// `Q_m u_i = 0` for `i < m`.
    PropQm { m: usize, i: usize },
    /// `Γ_k[cosh^i sinh^{-n-k+2}] = i cosh^{i-1} sinh^{-n-k+3}`.
    GammaLadder { k: usize, i: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    #[serde(flatten)]
    pub identity: Identity,
    pub n: usize,
    pub sample_points: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// `κ_i = (m - i - 1)(m + n - 2 - i)`.
pub fn kappa(m: usize, n: usize, i: usize) -> f64 {
    let (m, n, i) = (m as f64, n as f64, i as f64);
    (m - i - 1.0) * (m + n - 2.0 - i)
}

/// Jet of `cosh^i(s) sinh^{-n-m+2}(s)` at `base`, evaluated as
/// `2^{k-i} e^{(i-k)s} (1 + e^{-2s})^i (1 - e^{-2s})^{-k}` with `k = n + m - 2`.
/// Multiplying the `cosh` and `sinh` jets directly loses the high-order
/// coefficients to cancellation once `cosh ≈ sinh`.
pub fn u_jet(m: usize, n: usize, i: usize, base: f64, order: usize) -> Result<Jet> {
    let k = (n + m - 2) as i32;
    let i = i as i32;
    let s = Jet::variable(base, order as i64)?;
    let decay = s.scale(-2.0).apply(Elementary::Exp)?;
    let one = Jet::constant(base, order, 1.0);
    let mut gap = (&one - &decay).coeffs().to_vec();
    gap[0] = -(-2.0 * base).exp_m1();
    let gap = Jet::from_coeffs(base, gap)?;
    let lead = s.scale((i - k) as f64).apply(Elementary::Exp)?;
    let u = &(&lead * &(&one + &decay).powi(i)?) * &gap.powi(-k)?;
    Ok(u.scale(2f64.powi(k - i)))
}

fn cosh_sinh_jet(a: i32, b: i32, base: f64, order: usize) -> Result<Jet> {
    let s = Jet::variable(base, order as i64)?;
    let c = s.apply(Elementary::Cosh)?.powi(a)?;
    let sh = s.apply(Elementary::Sinh)?.powi(b)?;
    Ok(&c * &sh)
}

/// One side of an identity: the value jet and the matching magnitude jet.
struct Side {
    value: Jet,
    magnitude: Jet,
}

impl Side {
    fn of(spec: &OperatorSpec, f: &Jet) -> Result<Side> {
        Ok(Side { value: apply_operator(spec, f)?, magnitude: apply_operator_magnitude(spec, f)? })
    }

    fn plain(f: Jet) -> Side {
        Side { magnitude: f.abs(), value: f }
    }

    fn plus(self, other: Side) -> Side {
        Side { value: &self.value + &other.value, magnitude: &self.magnitude + &other.magnitude }
    }

    fn scaled(self, c: f64) -> Side {
        Side { value: self.value.scale(c), magnitude: self.magnitude.scale(c.abs()) }
    }
}

/// Coefficientwise `|L - R| / (|L| + |R|)`, maximized over the jet.
fn relative_gap(lhs: &Side, rhs: &Side) -> f64 {
    let order = lhs.value.order().min(rhs.value.order());
    let mut worst: f64 = 0.0;
    for j in 0..=order {
        let diff = (lhs.value.coeffs()[j] - rhs.value.coeffs()[j]).abs();
        let scale = lhs.magnitude.coeffs()[j] + rhs.magnitude.coeffs()[j];
        if diff == 0.0 {
            continue;
        }
        worst = worst.max(if scale > 0.0 { diff / scale } else { f64::INFINITY });
    }
    worst
}

fn zero_side(base: f64, order: usize) -> Side {
    Side::plain(Jet::constant(base, order, 0.0))
}

fn residual_at(identity: Identity, n: usize, s: f64) -> Result<f64> {
    let h = |kind| OperatorSpec::hyperbolic(kind, n);
    match identity {
        Identity::Commutation { k } => {
            let order = 8;
            let mut worst: f64 = 0.0;
            for a in 0..=3i32 {
                for b in 0..=(3 - a) {
                    let f = cosh_sinh_jet(b, a, s, order)?;
                    let dk = apply_operator(&h(OperatorKind::D { m: k }), &f)?;
                    let dk_mag = apply_operator_magnitude(&h(OperatorKind::D { m: k }), &f)?;
                    let gam = h(OperatorKind::Gamma { k });
                    // Γ_k applied to D_k f, with magnitudes chained through both steps
                    let lhs = Side { value: apply_operator(&gam, &dk)?, magnitude: apply_operator_magnitude(&gam, &dk_mag)? };
                    let gk = apply_operator(&gam, &f)?;
                    let gk_mag = apply_operator_magnitude(&gam, &f)?;
                    let dkm1 = h(OperatorKind::D { m: k - 1 });
                    let rhs = Side { value: apply_operator(&dkm1, &gk)?, magnitude: apply_operator_magnitude(&dkm1, &gk_mag)? };
                    worst = worst.max(relative_gap(&lhs, &rhs));
                }
            }
            Ok(worst)
        }
        Identity::PropDm { m, i } => {
            let order = 2 * m + 4;
            let u = u_jet(m, n, i, s, order)?;
            let du = Side::of(&h(OperatorKind::D { m }), &u)?;
            let lhs = du.plus(Side::plain(u.clone()).scaled(-kappa(m, n, i)));
            let rhs = if i >= 2 {
                Side::plain(u_jet(m, n, i - 2, s, order)?).scaled(-((i * (i - 1)) as f64))
            } else {
                zero_side(s, order)
            };
            Ok(relative_gap(&lhs, &rhs))
        }
        Identity::PropQm { m, i } => {
            let order = 2 * m + 4;
            let u = u_jet(m, n, i, s, order)?;
            let lhs = Side::of(&h(OperatorKind::Q { m }), &u)?;
            Ok(relative_gap(&lhs, &zero_side(s, order)))
        }
        Identity::GammaLadder { k, i } => {
            let order = 8;
            let f = cosh_sinh_jet(i as i32, -(n as i32) - k as i32 + 2, s, order)?;
            let lhs = Side::of(&h(OperatorKind::Gamma { k }), &f)?;
            let rhs = if i == 0 {
                zero_side(s, order)
            } else {
                Side::plain(cosh_sinh_jet(i as i32 - 1, -(n as i32) - k as i32 + 3, s, order)?).scaled(i as f64)
            };
            Ok(relative_gap(&lhs, &rhs))
        }
    }
}

fn precondition(identity: Identity, n: usize, points: &[f64]) -> Option<String> {
    if n < 2 {
        return Some(format!("dimension n = {n} is below 2"));
    }
    if let Some(p) = points.iter().find(|&&p| !(p > 0.05 && p <= 3.0)) {
        return Some(format!("sample point {p} lies outside (0.05, 3]"));
    }
    match identity {
        Identity::Commutation { k: 0 } | Identity::GammaLadder { k: 0, .. } => Some("k must be at least 1".into()),
        Identity::PropDm { m, i } | Identity::PropQm { m, i } if i >= m => Some(format!("requires i < m, got i = {i}, m = {m}")),
        _ => None,
    }
}

/// Evaluates an identity at each sample point; the report carries failures.
pub fn verify_identity(identity: Identity, n: usize, sample_points: &[f64], tolerance: f64) -> IdentityReport {
    let mut report = IdentityReport {
        identity,
        n,
        sample_points: sample_points.to_vec(),
        residuals: Vec::with_capacity(sample_points.len()),
        max_residual: 0.0,
        tolerance,
        pass: false,
        note: precondition(identity, n, sample_points),
    };
    if report.note.is_some() {
        report.max_residual = f64::INFINITY;
        return report;
    }
    for &s in sample_points {
        match residual_at(identity, n, s) {
            Ok(r) => report.residuals.push(r),
            Err(e) => {
                report.residuals.push(f64::INFINITY);
                report.note = Some(format!("{e}"));
            }
        }
    }
    report.max_residual = report.residuals.iter().fold(0.0, |a: f64, &b| a.max(b));
    report.pass = report.note.is_none() && report.max_residual <= tolerance;
    report
}

/// Coefficient matrices relating `[d^l Q_m F](R)` and `[D_m^l F](R)` to the
/// Taylor data `F^{(i)}(R)`, `i < 2m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaMatrices {
    pub m: usize,
    pub n: usize,
    pub r: f64,
    /// `m × 2m`, row `l` from `d^l Q_m`
    pub a: Vec<Vec<f64>>,
    /// `m × 2m`, row `l` from `D_m^l`
    pub b: Vec<Vec<f64>>,
    pub stacked_rank: usize,
    pub min_singular_value: f64,
    /// Singular values after row and column equilibration.
    pub singular_values: Vec<f64>,
    /// Smallest singular value with row normalization alone.
    pub row_normalized_min_singular_value: f64,
}

pub const RANK_THRESHOLD: f64 = 1e-8;

pub fn lemma_matrices(m: usize, n: usize, r: f64) -> Result<LemmaMatrices> {
    if m == 0 {
        return Err(arg_err!("lemma matrices need m >= 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(arg_err!("base radius must be positive, got {r}"));
    }
    let order = 2 * m + 4;
    let width = 2 * m;
    let mut a = vec![vec![0.0; width]; m];
    let mut b = vec![vec![0.0; width]; m];
    let q = OperatorSpec::hyperbolic(OperatorKind::Q { m }, n);
    let d = OperatorSpec::hyperbolic(OperatorKind::D { m }, n);
    for i in 0..width {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[i] = 1.0 / crate::jet::factorial(i);
        let e = Jet::from_coeffs(r, coeffs)?;
        let mut qe = apply_operator(&q, &e)?;
        let mut de = e.clone();
        for l in 0..m {
            if l > 0 {
                qe = qe.differentiate()?;
                de = apply_operator(&d, &de)?;
            }
            a[l][i] = qe.value();
            b[l][i] = de.value();
        }
    }
    let mut stacked = Vec::with_capacity(width * width);
    for row in a.iter().chain(b.iter()) {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        stacked.extend(row.iter().map(|x| x / norm));
    }
    let row_normalized = singular_values(&stacked, width, width);
    equilibrate(&mut stacked, width);
    let sv = singular_values(&stacked, width, width);
    let rank = sv.iter().filter(|&&s| s > RANK_THRESHOLD).count();
    Ok(LemmaMatrices {
        m,
        n,
        r,
        a,
        b,
        stacked_rank: rank,
        min_singular_value: *sv.last().expect("non-empty"),
        singular_values: sv,
        row_normalized_min_singular_value: *row_normalized.last().expect("non-empty"),
    })
}

/// Alternating row and column max-norm scaling of a square matrix, finished
/// with unit Euclidean rows. Each entry is computed to relative precision,
/// so singular values of the scaled matrix measure rank against rounding.
fn equilibrate(a: &mut [f64], width: usize) {
    for _ in 0..40 {
        for i in 0..width {
            let s = a[i * width..(i + 1) * width].iter().fold(0.0f64, |m, x| m.max(x.abs())).sqrt();
            if s > 0.0 {
                a[i * width..(i + 1) * width].iter_mut().for_each(|x| *x /= s);
            }
        }
        for j in 0..width {
            let s = (0..width).fold(0.0f64, |m, i| m.max(a[i * width + j].abs())).sqrt();
            if s > 0.0 {
                (0..width).for_each(|i| a[i * width + j] /= s);
            }
        }
    }
    for i in 0..width {
        let row = &mut a[i * width..(i + 1) * width];
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x /= norm);
    }
}
