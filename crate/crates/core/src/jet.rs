//! Truncated Taylor series ("jets") of a real function at a base point.
//!
//! A jet of order `K` stores the normalized coefficients `a_j = f^(j)(s0) / j!`
//! for `j = 0..=K`. Arithmetic on jets propagates these coefficients exactly
//! (up to rounding), so high-order differential operators can be evaluated on
//! closed-form functions without any finite-difference error.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::arg_err;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    base: f64,
    coeffs: Vec<f64>,
}

/// Elementary functions with a jet extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Sin,
    Cos,
    Cot,
    Exp,
    Log,
    Power(f64),
}

impl Jet {
    /// Jet of the identity function `s -> s` at `base`.
    pub fn variable(base: f64, order: i64) -> Result<Self> {
        let order = check_order(order)?;
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = base;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Ok(Self { base, coeffs })
    }

    pub fn constant(base: f64, order: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { base, coeffs }
    }

    /// Builds a jet from normalized Taylor coefficients `a_0..=a_K`.
    pub fn from_coeffs(base: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(arg_err!("a jet needs at least one coefficient"));
        }
        Ok(Self { base, coeffs })
    }

    /// Builds a jet from derivative values `f(s0), f'(s0), ..., f^(K)(s0)`.
    pub fn from_derivatives(base: f64, derivs: &[f64]) -> Result<Self> {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(j, d)| {
                if j > 0 {
                    fact *= j as f64;
                }
                d / fact
            })
            .collect();
        Self::from_coeffs(base, coeffs)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// The `k`-th derivative of the represented function at the base point.
    pub fn derivative_value(&self, k: i64) -> Result<f64> {
        if k < 0 || k as usize > self.order() {
            return Err(arg_err!(
                "derivative index {k} outside 0..={} for this jet",
                self.order()
            ));
        }
        let k = k as usize;
        Ok(factorial(k) * self.coeffs[k])
    }

    /// Jet of `f'`; the order drops by one.
    pub fn differentiate(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(arg_err!("cannot differentiate a zero-order jet"));
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(j, a)| (j + 1) as f64 * a)
            .collect();
        Ok(Self { base: self.base, coeffs })
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Self { base: self.base, coeffs: self.coeffs[..keep].to_vec() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { base: self.base, coeffs: self.coeffs.iter().map(|a| c * a).collect() }
    }

    /// Coefficient-wise absolute value. Used to bound the magnitude of the
    /// terms that enter an operator evaluation.
    pub fn abs(&self) -> Self {
        Self { base: self.base, coeffs: self.coeffs.iter().map(|a| a.abs()).collect() }
    }

    /// Evaluates the truncated series at `base + t`.
    pub fn eval_offset(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    pub fn try_div(&self, rhs: &Jet) -> Result<Jet> {
        self.check_base(rhs);
        let b0 = rhs.coeffs[0];
        if b0 == 0.0 {
            return Err(Error::Domain { function: "division", value: self.base });
        }
        let order = self.order().min(rhs.order());
        let mut q = vec![0.0; order + 1];
        for k in 0..=order {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Ok(Jet { base: self.base, coeffs: q })
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(self.base, self.order(), 1.0).try_div(self)
    }

    pub fn powi(&self, p: i32) -> Result<Jet> {
        if p < 0 {
            return self.powi(-p)?.recip();
        }
        let mut result = Jet::constant(self.base, self.order(), 1.0);
        let mut square = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &square;
            }
            e >>= 1;
            if e > 0 {
                square = &square * &square;
            }
        }
        Ok(result)
    }

    pub fn apply(&self, f: Elementary) -> Result<Jet> {
        let a0 = self.coeffs[0];
        match f {
            Elementary::Sinh => Ok(self.sinh_cosh().0),
            Elementary::Cosh => Ok(self.sinh_cosh().1),
            Elementary::Tanh => {
                let (s, c) = self.sinh_cosh();
                s.try_div(&c)
            }
            Elementary::Coth => {
                if a0 == 0.0 {
                    return Err(Error::Domain { function: "coth", value: a0 });
                }
                let (s, c) = self.sinh_cosh();
                c.try_div(&s)
            }
            Elementary::Sin => Ok(self.sin_cos().0),
            Elementary::Cos => Ok(self.sin_cos().1),
            Elementary::Cot => {
                let (s, c) = self.sin_cos();
                if s.coeffs[0] == 0.0 {
                    return Err(Error::Domain { function: "cot", value: a0 });
                }
                c.try_div(&s)
            }
            Elementary::Exp => Ok(self.exp()),
            Elementary::Log => self.ln(),
            Elementary::Power(p) => self.powf(p),
        }
    }

    fn check_base(&self, other: &Jet) {
        assert!(
            self.base == other.base,
            "jets expanded at different base points ({} vs {})",
            self.base,
            other.base
        );
    }

    // y' = x' y, y_k = (1/k) sum_{j=1..k} j x_j y_{k-j}
    fn exp(&self) -> Jet {
        let a = &self.coeffs;
        let mut y = vec![0.0; a.len()];
        y[0] = a[0].exp();
        for k in 1..a.len() {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * y[k - j];
            }
            y[k] = acc / k as f64;
        }
        Jet { base: self.base, coeffs: y }
    }

    fn ln(&self) -> Result<Jet> {
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::Domain { function: "log", value: a[0] });
        }
        let mut y = vec![0.0; a.len()];
        y[0] = a[0].ln();
        for k in 1..a.len() {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * y[j] * a[k - j];
            }
            y[k] = (a[k] - acc / k as f64) / a[0];
        }
        Ok(Jet { base: self.base, coeffs: y })
    }

    fn powf(&self, p: f64) -> Result<Jet> {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            if p < 0.0 && self.coeffs[0] == 0.0 {
                return Err(Error::Domain { function: "power", value: 0.0 });
            }
            return self.powi(p as i32);
        }
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::Domain { function: "power", value: a[0] });
        }
        // k a_0 y_k = sum_{j=1..k} (p j - (k - j)) a_j y_{k-j}
        let mut y = vec![0.0; a.len()];
        y[0] = a[0].powf(p);
        for k in 1..a.len() {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (p * j as f64 - (k - j) as f64) * a[j] * y[k - j];
            }
            y[k] = acc / (k as f64 * a[0]);
        }
        Ok(Jet { base: self.base, coeffs: y })
    }

    fn sin_cos(&self) -> (Jet, Jet) {
        self.trig_pair(-1.0, self.coeffs[0].sin(), self.coeffs[0].cos())
    }

    fn sinh_cosh(&self) -> (Jet, Jet) {
        self.trig_pair(1.0, self.coeffs[0].sinh(), self.coeffs[0].cosh())
    }

    // s' = x' c, c' = sign * x' s
    fn trig_pair(&self, sign: f64, s0: f64, c0: f64) -> (Jet, Jet) {
        let a = &self.coeffs;
        let mut s = vec![0.0; a.len()];
        let mut c = vec![0.0; a.len()];
        s[0] = s0;
        c[0] = c0;
        for k in 1..a.len() {
            let (mut sa, mut ca) = (0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * a[j];
                sa += w * c[k - j];
                ca += w * s[k - j];
            }
            s[k] = sa / k as f64;
            c[k] = sign * ca / k as f64;
        }
        (Jet { base: self.base, coeffs: s }, Jet { base: self.base, coeffs: c })
    }
}

fn check_order(order: i64) -> Result<usize> {
    if order < 0 {
        return Err(arg_err!("jet order must be non-negative, got {order}"));
    }
    Ok(order as usize)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_base(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeffs[j] + rhs.coeffs[j]).collect();
        Jet { base: self.base, coeffs }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_base(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeffs[j] - rhs.coeffs[j]).collect();
        Jet { base: self.base, coeffs }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_base(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        Jet { base: self.base, coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
