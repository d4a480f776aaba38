use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::geometry::Space;
use crate::jet::Jet;
use crate::Result;

/// Radial differential operators in the geodesic variable `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// `d/ds`
    Ds,
    /// `d² + (n-1) coth d`
    Br,
    /// `Γ_k = d + (n+k-2) coth`
    Gamma { k: usize },
    /// `D_m = d² + (n-1) coth d - m(m+n-2)/sinh²`
    D { m: usize },
    /// `Q_m = Γ_1 Γ_2 … Γ_m`, with `Γ_m` applied first
    Q { m: usize },
    /// `Σ_j c_j D_m^j`
    PolyInD { m: usize, coeffs: Vec<f64> },
    /// `d^l`
    PowerOfDs { l: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub n: usize,
    /// Selects `coth`/`sinh` or `cot`/`sin` in the coefficients.
    pub space: Space,
}

impl OperatorSpec {
    pub fn hyperbolic(kind: OperatorKind, n: usize) -> Self {
        OperatorSpec { kind, n, space: Space::Hyperbolic }
    }

    pub fn differential_order(&self) -> usize {
        match &self.kind {
            OperatorKind::Ds => 1,
            OperatorKind::Br | OperatorKind::D { .. } => 2,
            OperatorKind::Gamma { .. } => 1,
            OperatorKind::Q { m } => *m,
            OperatorKind::PolyInD { coeffs, .. } => 2 * coeffs.len().saturating_sub(1),
            OperatorKind::PowerOfDs { l } => *l,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(arg_err!("operator dimension must be at least 2, got {}", self.n));
        }
        if let OperatorKind::Gamma { k: 0 } = self.kind {
            return Err(arg_err!("Gamma_k requires k >= 1"));
        }
        Ok(())
    }
}

/// Evaluates operators on jets. In magnitude mode every coefficient jet and
/// the input are replaced by their absolute values and subtractions become
/// additions, which bounds the size of each term that entered the result.
struct Calculus {
    space: Space,
    n: usize,
    magnitude: bool,
}

impl Calculus {
    fn coef(&self, j: Jet) -> Jet {
        if self.magnitude { j.abs() } else { j }
    }

    fn sub(&self, a: &Jet, b: &Jet) -> Jet {
        if self.magnitude { a + b } else { a - b }
    }

    fn cot(&self, base: f64, order: usize) -> Result<Jet> {
        Ok(self.coef(self.space.cotangent_jet(base, order)?))
    }

    fn d(&self, f: &Jet) -> Result<Jet> {
        f.differentiate()
    }

    fn gamma(&self, k: usize, f: &Jet) -> Result<Jet> {
        let df = self.d(f)?;
        let c = (self.n + k - 2) as f64;
        let cot = self.cot(f.base(), df.order())?;
        Ok(&df + &(&cot * f).scale(c))
    }

    fn br(&self, f: &Jet) -> Result<Jet> {
        self.dm(0, f)
    }

    fn dm(&self, m: usize, f: &Jet) -> Result<Jet> {
        let df = self.d(f)?;
        let d2f = self.d(&df)?;
        let order = d2f.order();
        let cot = self.cot(f.base(), order)?;
        let mut out = &d2f + &(&cot * &df).scale((self.n - 1) as f64);
        let big_m = (m * (m + self.n - 2)) as f64;
        if big_m != 0.0 {
            let w = self.space.sine_jet(f.base(), order);
            let inv = self.coef(w.powi(-2)?);
            out = self.sub(&out, &(&inv * f).scale(big_m));
        }
        Ok(out)
    }

    fn q(&self, m: usize, f: &Jet) -> Result<Jet> {
        let mut g = f.clone();
        for k in (1..=m).rev() {
            g = self.gamma(k, &g)?;
        }
        Ok(g)
    }

    fn apply(&self, kind: &OperatorKind, f: &Jet) -> Result<Jet> {
        match kind {
            OperatorKind::Ds => self.d(f),
            OperatorKind::Br => self.br(f),
            OperatorKind::Gamma { k } => self.gamma(*k, f),
            OperatorKind::D { m } => self.dm(*m, f),
            OperatorKind::Q { m } => self.q(*m, f),
            OperatorKind::PowerOfDs { l } => {
                let mut g = f.clone();
                for _ in 0..*l {
                    g = self.d(&g)?;
                }
                Ok(g)
            }
            OperatorKind::PolyInD { m, coeffs } => {
                let mut power = f.clone();
                let mut terms: Vec<Jet> = Vec::with_capacity(coeffs.len());
                for (j, &c) in coeffs.iter().enumerate() {
                    if j > 0 {
                        power = self.dm(*m, &power)?;
                    }
                    let c = if self.magnitude { c.abs() } else { c };
                    terms.push(power.scale(c));
                }
                let mut acc = Jet::constant(f.base(), power.order(), 0.0);
                for t in &terms {
                    acc = &acc + t;
                }
                Ok(acc)
            }
        }
    }
}

fn run(spec: &OperatorSpec, f: &Jet, magnitude: bool) -> Result<Jet> {
    spec.validate()?;
    let need = spec.differential_order();
    if f.order() < need {
        return Err(arg_err!(
            "operator of differential order {need} needs a jet of order at least {need}, got {}",
            f.order()
        ));
    }
    let calc = Calculus { space: spec.space, n: spec.n, magnitude };
    let input = if magnitude { f.abs() } else { f.clone() };
    calc.apply(&spec.kind, &input)
}

/// Applies a radial operator to a jet; the result has order reduced by the
/// operator's differential order.
pub fn apply_operator(spec: &OperatorSpec, f: &Jet) -> Result<Jet> {
    run(spec, f, false)
}

/// Same expression tree as [`apply_operator`] evaluated on absolute values
/// with all signs positive. Used as the scale for relative residuals.
pub fn apply_operator_magnitude(spec: &OperatorSpec, f: &Jet) -> Result<Jet> {
    run(spec, f, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Elementary;
    use approx::assert_relative_eq;

    fn var(base: f64, order: i64) -> Jet {
        Jet::variable(base, order).unwrap()
    }

    #[test]
    fn gamma_one_of_coth_is_one() {
        let coth = var(0.8, 6).apply(Elementary::Coth).unwrap();
        let out = apply_operator(&OperatorSpec::hyperbolic(OperatorKind::Gamma { k: 1 }, 2), &coth).unwrap();
        assert_eq!(out.order(), 5);
        assert_relative_eq!(out.value(), 1.0, max_relative = 1e-14);
        for c in &out.coeffs()[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn order_shortfall_is_reported() {
        let f = var(1.0, 2);
        let err = apply_operator(&OperatorSpec::hyperbolic(OperatorKind::Q { m: 3 }, 2), &f).unwrap_err();
        assert!(alloc::format!("{err}").contains("at least 3"));
    }

    #[test]
    fn coth_singular_at_zero() {
        let f = var(0.0, 4);
        assert!(apply_operator(&OperatorSpec::hyperbolic(OperatorKind::Br, 2), &f).is_err());
    }

    #[test]
    fn closed_form_eigenfunction_n3() {
        // h = sin(λs) / (λ sinh s) solves B h = -(1 + λ²) h for n = 3
        let lam = 2.0;
        let s = var(0.9, 10);
        let num = s.scale(lam).apply(Elementary::Sin).unwrap();
        let den = s.apply(Elementary::Sinh).unwrap().scale(lam);
        let h = num.try_div(&den).unwrap();
        let bh = apply_operator(&OperatorSpec::hyperbolic(OperatorKind::Br, 3), &h).unwrap();
        for (a, b) in bh.coeffs().iter().zip(h.coeffs()) {
            assert!((a + (1.0 + lam * lam) * b).abs() < 1e-10);
        }
    }

    #[test]
    fn poly_in_d_matches_composition() {
        let f = var(1.1, 10).apply(Elementary::Cosh).unwrap().powi(3).unwrap();
        let d = OperatorSpec::hyperbolic(OperatorKind::D { m: 2 }, 2);
        let d1 = apply_operator(&d, &f).unwrap();
        let d2 = apply_operator(&d, &d1).unwrap();
        let poly = OperatorSpec::hyperbolic(OperatorKind::PolyInD { m: 2, coeffs: alloc::vec![0.5, -2.0, 3.0] }, 2);
        let p = apply_operator(&poly, &f).unwrap();
        let expect = 0.5 * f.value() - 2.0 * d1.value() + 3.0 * d2.value();
        assert_relative_eq!(p.value(), expect, max_relative = 1e-13);
    }
}
