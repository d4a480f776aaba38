use proptest::prelude::*;

use sphmean_core::{Elementary, Jet};

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `f^(k)(s)` for `k ≤ 8` from hand-written derivative tables.
fn closed_form(f: Elementary, s: f64, k: usize) -> f64 {
    match f {
        Elementary::Sinh => [s.sinh(), s.cosh()][k % 2],
        Elementary::Cosh => [s.cosh(), s.sinh()][k % 2],
        Elementary::Sin => [s.sin(), s.cos(), -s.sin(), -s.cos()][k % 4],
        Elementary::Cos => [s.cos(), -s.sin(), -s.cos(), s.sin()][k % 4],
        Elementary::Exp => s.exp(),
        Elementary::Log => {
            if k == 0 {
                s.ln()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * factorial(k - 1) / s.powi(k as i32)
            }
        }
        Elementary::Power(p) => {
            let falling: f64 = (0..k).map(|j| p - j as f64).product();
            falling * s.powf(p - k as f64)
        }
        Elementary::Tanh => {
            let c = s.cosh();
            pair_chain(s.tanh(), 1.0 / (c * c), 1.0, k)
        }
        Elementary::Coth => {
            let sh = s.sinh();
            pair_chain(1.0 / s.tanh(), 1.0 / (sh * sh), -1.0, k)
        }
        Elementary::Cot => {
            let sn = s.sin();
            pair_chain(1.0 / s.tan(), 1.0 / (sn * sn), -1.0, k)
        }
    }
}

/// k-th derivative of `y` when `y' = σ z` and `z' = -2 y z` (tanh with sech²,
/// coth with csch², cot with csc²), carried as polynomials in `(y, z)`.
fn pair_chain(y: f64, z: f64, sigma: f64, k: usize) -> f64 {
    let size = k + 2;
    let mut p = vec![vec![0.0; size]; size];
    p[1][0] = 1.0;
    for _ in 0..k {
        let mut next = vec![vec![0.0; size]; size];
        for a in 0..size {
            for b in 0..size {
                let c = p[a][b];
                if c == 0.0 {
                    continue;
                }
                if a > 0 {
                    next[a - 1][b + 1] += sigma * a as f64 * c;
                }
                if b > 0 {
                    next[a + 1][b] -= 2.0 * b as f64 * c;
                }
            }
        }
        p = next;
    }
    let mut acc = 0.0;
    for (a, row) in p.iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            acc += c * y.powi(a as i32) * z.powi(b as i32);
        }
    }
    acc
}

fn check_against_closed_form(f: Elementary, s: f64) {
    let jet = Jet::variable(s, 8).unwrap().apply(f).unwrap();
    for k in 0..=8 {
        let got = jet.derivative_value(k as i64).unwrap();
        let want = closed_form(f, s, k);
        let tol = 1e-12 * want.abs().max(1.0);
        assert!((got - want).abs() <= tol, "{f:?} at {s}, k = {k}: {got} vs {want}");
    }
}

#[test]
fn sinh_at_zero() {
    let j = Jet::variable(0.0, 3).unwrap().apply(Elementary::Sinh).unwrap();
    assert_eq!(j.coeffs().len(), 4);
    let want = [0.0, 1.0, 0.0, 1.0 / 6.0];
    for (a, b) in j.coeffs().iter().zip(want) {
        assert!((a - b).abs() <= 1e-15);
    }
    assert!((j.derivative_value(3).unwrap() - 1.0).abs() <= 1e-15);
}

#[test]
fn coth_at_one() {
    let j = Jet::variable(1.0, 2).unwrap().apply(Elementary::Coth).unwrap();
    let s = 1.0f64.sinh();
    assert!((j.coeffs()[0] - 1.0f64.cosh() / s).abs() <= 1e-15);
    assert!((j.coeffs()[1] + 1.0 / (s * s)).abs() <= 1e-14);
}

#[test]
fn sinh_cosh_product() {
    let x = Jet::variable(0.4, 6).unwrap();
    let p = &x.apply(Elementary::Sinh).unwrap() * &x.apply(Elementary::Cosh).unwrap();
    // (1/2) sinh(2s): k-th Taylor coefficient 2^(k-1) sinh^(k)(0.8) / k!
    for (k, a) in p.coeffs().iter().enumerate() {
        let d = if k % 2 == 0 { 0.8f64.sinh() } else { 0.8f64.cosh() };
        let want = 2f64.powi(k as i32 - 1) * d / factorial(k);
        assert!((a - want).abs() <= 1e-14, "k = {k}: {a} vs {want}");
    }
}

#[test]
fn low_order_derivatives() {
    let id = Jet::variable(1.2, 5).unwrap();
    assert_eq!(id.derivative_value(1).unwrap(), 1.0);
    assert_eq!(id.derivative_value(2).unwrap(), 0.0);
    let c = Jet::variable(0.0, 3).unwrap().apply(Elementary::Cosh).unwrap();
    assert_eq!(c.derivative_value(1).unwrap(), 0.0);
    assert!(Jet::variable(0.0, 0).unwrap().coeffs() == [0.0]);
    assert!(Jet::variable(0.7, -1).is_err());
}

#[test]
fn division_needs_nonzero_head() {
    let x = Jet::variable(0.0, 4).unwrap();
    let one = Jet::constant(0.0, 4, 1.0);
    assert!(one.try_div(&x).is_err());
    assert!(x.apply(Elementary::Coth).is_err());
    assert!(x.apply(Elementary::Cot).is_err());
    assert!(x.apply(Elementary::Log).is_err());
}

const NAMES: [Elementary; 10] = [
    Elementary::Sinh,
    Elementary::Cosh,
    Elementary::Tanh,
    Elementary::Coth,
    Elementary::Sin,
    Elementary::Cos,
    Elementary::Cot,
    Elementary::Exp,
    Elementary::Log,
    Elementary::Power(2.5),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matches_hand_derivatives(idx in 0usize..NAMES.len(), s in 0.1f64..2.5) {
        let f = NAMES[idx];
        // keep cot away from its poles and the exponential tail moderate
        let s = if matches!(f, Elementary::Cot) { 0.1 + (s - 0.1) * (2.9 - 0.1) / 2.4 } else { s };
        check_against_closed_form(f, s);
    }

    #[test]
    fn distributive(a in prop::collection::vec(-2.0f64..2.0, 7), b in prop::collection::vec(-2.0f64..2.0, 7), c in prop::collection::vec(-2.0f64..2.0, 7)) {
        let x = Jet::from_coeffs(0.3, a).unwrap();
        let y = Jet::from_coeffs(0.3, b).unwrap();
        let z = Jet::from_coeffs(0.3, c).unwrap();
        let lhs = &(&x + &y) * &z;
        let rhs = &(&x * &z) + &(&y * &z);
        for (l, r) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((l - r).abs() <= 1e-13 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn leibniz(s in 0.2f64..2.0, k in 0usize..8) {
        let x = Jet::variable(s, 8).unwrap();
        let f = x.apply(Elementary::Sin).unwrap();
        let g = x.apply(Elementary::Exp).unwrap();
        let fg = &f * &g;
        let want: f64 = (0..=k)
            .map(|j| factorial(k) / (factorial(j) * factorial(k - j)) * f.derivative_value(j as i64).unwrap() * g.derivative_value((k - j) as i64).unwrap())
            .sum();
        let got = fg.derivative_value(k as i64).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn quotient_inverts_product(a in prop::collection::vec(-2.0f64..2.0, 6), b in prop::collection::vec(0.5f64..2.0, 6)) {
        let x = Jet::from_coeffs(1.0, a).unwrap();
        let y = Jet::from_coeffs(1.0, b).unwrap();
        let back = &x.try_div(&y).unwrap() * &y;
        for (l, r) in back.coeffs().iter().zip(x.coeffs()) {
            prop_assert!((l - r).abs() <= 1e-10 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn closure_keeps_base_and_order(order in 0usize..10, s in -1.0f64..1.0) {
        let x = Jet::variable(s, order as i64).unwrap();
        let y = x.apply(Elementary::Exp).unwrap();
        for j in [&x + &y, &x - &y, &x * &y, x.try_div(&y).unwrap()] {
            prop_assert_eq!(j.order(), order);
            prop_assert_eq!(j.base(), s);
            prop_assert_eq!(j.coeffs().len(), order + 1);
        }
    }
}
