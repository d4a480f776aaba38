use std::f64::consts::PI;

use sphmean_core::field::FnField;
use sphmean_core::geometry::Space;
use sphmean_core::transform::{
    darboux_forward_mode, darboux_forward_sinogram, default_lambda_max, fl_transform, fl_transform_many, forward_sinogram,
    intertwine_residual, sinogram_modes, spherical_mean, t_forward_sphere, t_inverse, DarbouxGrid, DarbouxLayout,
};
use sphmean_core::{BumpKind, Geometry, ModeField, Phantom, Point};

/// `exp(-1 / (1 - x²))` rescaled to `[a, b]`.
fn bump(r: f64, a: f64, b: f64) -> f64 {
    let x = (2.0 * r - a - b) / (b - a);
    if x.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - x * x)).exp() }
}

fn grid(r_max: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 * r_max / (count - 1) as f64).collect()
}

fn legendre(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    for j in 1..k {
        let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn constant_and_zero_fields() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let one = FnField { geometry, support: f64::INFINITY, f: |_: &Point| 1.0 };
        let zero = FnField { geometry, support: f64::INFINITY, f: |_: &Point| 0.0 };
        let x = Point::polar(geometry, 0.4, 2.0).unwrap();
        for r in [0.0, 0.3, 1.1] {
            assert!((spherical_mean(&one, &x, r, 128).unwrap() - 1.0).abs() <= 1e-14);
            assert_eq!(spherical_mean(&zero, &x, r, 128).unwrap(), 0.0);
        }
    }
}

#[test]
fn centered_radial_phantom_returns_its_profile() {
    let f = Phantom::single(BumpKind::GaussianBump, Point::origin(Geometry::H2), 0.2, 1.0).unwrap();
    let b = f.bumps[0];
    for r in [0.05, 0.2, 0.45] {
        let got = spherical_mean(&f, &Point::origin(Geometry::H2), r, 64).unwrap();
        assert!((got - b.profile(r)).abs() <= 1e-14);
    }
}

#[test]
fn off_center_mean_stable_under_refinement() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let f = Phantom::single(BumpKind::GaussianBump, Point::polar(geometry, 0.3, 0.4).unwrap(), 0.15, 1.0).unwrap();
        let x = Point::polar(geometry, 0.7, 1.9).unwrap();
        let a = spherical_mean(&f, &x, 0.6, 128).unwrap();
        let b = spherical_mean(&f, &x, 0.6, 256).unwrap();
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn sinogram_of_centered_phantom_is_angle_free() {
    let f = Phantom::single(BumpKind::PolynomialBump, Point::origin(Geometry::H2), 0.25, 1.0).unwrap();
    let g = forward_sinogram(&f, 1.0, 16, 65, 2.0).unwrap();
    for k in 0..g.n_r {
        for j in 1..g.n_theta {
            assert!((g.get(j, k) - g.get(0, k)).abs() <= 1e-12);
        }
    }
}

#[test]
fn sinogram_vanishes_on_detector_and_past_twice_radius() {
    let f = Phantom::single(BumpKind::GaussianBump, Point::polar(Geometry::S2, 0.2, 0.3).unwrap(), 0.15, 1.0).unwrap();
    let g = forward_sinogram(&f, 0.7, 12, 81, 1.6).unwrap();
    for j in 0..g.n_theta {
        assert_eq!(g.get(j, 0), 0.0);
        for k in 0..g.n_r {
            if g.radius(k) >= 1.4 {
                assert_eq!(g.get(j, k), 0.0);
            }
        }
    }
}

#[test]
fn forward_rejects_bad_support_and_window() {
    let f = Phantom::single(BumpKind::GaussianBump, Point::polar(Geometry::H2, 0.8, 0.0).unwrap(), 0.2, 1.0).unwrap();
    assert!(forward_sinogram(&f, 1.0, 8, 33, 2.0).is_err());
    let f = Phantom::single(BumpKind::GaussianBump, Point::origin(Geometry::H2), 0.2, 1.0).unwrap();
    assert!(forward_sinogram(&f, 1.0, 8, 33, 1.5).is_err());
}

#[test]
fn cfl_violation_names_the_bound() {
    let f = vec![0.0; 41];
    let err = darboux_forward_mode(&f, 0, Geometry::H2, 1.0, DarbouxGrid { ds: 0.05, dr: 0.05 }, 2.0, 1.0).unwrap_err();
    assert!(err.to_string().contains("0.9"), "{err}");
}

#[test]
fn darboux_zero_and_initial_data() {
    let ds = 0.025;
    let ns = 81;
    let zero = darboux_forward_mode(&vec![0.0; ns], 1, Geometry::H2, 0.5, DarbouxGrid { ds, dr: 0.02 }, 2.0, 1.5).unwrap();
    assert!(zero.u.iter().all(|v| *v == 0.0));

    let f: Vec<f64> = (0..ns).map(|i| bump(i as f64 * ds, 0.1, 0.6)).collect();
    let sol = darboux_forward_mode(&f, 2, Geometry::H2, 0.5, DarbouxGrid { ds, dr: 0.02 }, 2.0, 1.5).unwrap();
    for i in 1..ns - 1 {
        assert_eq!(sol.at(i, 0), f[i]);
        // G_r(s, 0) = 0: the first step is O(dr²)
        assert!((sol.at(i, 1) - f[i]).abs() <= 2.0 * 0.02 * 0.02 * 400.0);
    }
}

#[test]
fn darboux_trace_matches_quadrature_at_second_order() {
    let r = 1.0;
    let f = Phantom::single(BumpKind::GaussianBump, Point::polar(Geometry::H2, 0.3, 0.7).unwrap(), 0.2, 1.0).unwrap();
    let mut errs = Vec::new();
    for (nt, nr, ns) in [(32, 64, 64), (64, 128, 128), (128, 256, 256)] {
        let quad = forward_sinogram(&f, r, nt, nr, 2.0 * r).unwrap();
        let pde = darboux_forward_sinogram(&f, r, nt, nr, 2.0 * r, ns, 24).unwrap();
        errs.push(pde.rel_l2_error(&quad).unwrap());
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn darboux_layout_meets_cfl() {
    let layout = DarbouxLayout::new(1.0, 2.0, 512, 512).unwrap();
    assert!(layout.grid.cfl() <= 0.9);
    assert!((layout.ball_cells as f64 * layout.grid.ds - 1.0).abs() < 1e-12);
    assert!(layout.s_max >= 3.0 - 1e-12);
}

#[test]
fn mode_decomposition_of_quadrature_sinogram_is_parseval() {
    let f = Phantom::single(BumpKind::GaussianBump, Point::polar(Geometry::H2, 0.4, 0.2).unwrap(), 0.15, 1.0).unwrap();
    let g = forward_sinogram(&f, 1.0, 33, 33, 2.0).unwrap();
    let modes = sinogram_modes(&g, 16);
    let dtheta = 2.0 * PI / 33.0;
    for k in 0..g.n_r {
        let direct: f64 = g.column(k).iter().map(|v| v * v).sum::<f64>() * dtheta;
        let split: f64 = modes.values().map(|p| p[k] * p[k]).sum();
        assert!((direct - split).abs() <= 1e-12 * direct.max(1e-300).max(1.0));
    }
}

#[test]
fn fl_transform_zero_and_even() {
    let v: Vec<f64> = grid(2.0, 257).iter().map(|r| bump(*r, 0.3, 1.7)).collect();
    assert_eq!(fl_transform(&vec![0.0; 257], 2.0, Space::Hyperbolic, 2, 1.3).unwrap(), 0.0);
    for l in [0.5, 2.0, 7.5] {
        let a = fl_transform(&v, 2.0, Space::Hyperbolic, 2, l).unwrap();
        let b = fl_transform(&v, 2.0, Space::Hyperbolic, 2, -l).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3));
    }
}

#[test]
fn sphere_legendre_orthogonality() {
    let count = 2049;
    let r = grid(PI, count);
    for k in 0..5 {
        let v: Vec<f64> = r.iter().map(|r| legendre(k, r.cos())).collect();
        let orders: Vec<f64> = (0..7).map(|j| j as f64).collect();
        let vh = fl_transform_many(&v, PI, Space::Spherical, 2, &orders).unwrap();
        for (j, x) in vh.iter().enumerate() {
            let want = if j == k { 1.0 / (2 * k + 1) as f64 } else { 0.0 };
            assert!((x - want).abs() <= 1e-9, "j = {j}, k = {k}: {x}");
        }
        let back: Vec<f64> = r
            .iter()
            .map(|r| vh.iter().enumerate().map(|(m, c)| (2 * m + 1) as f64 * c * legendre(m, r.cos())).sum())
            .collect();
        assert!(rel_l2(&back, &v) <= 1e-8);
    }
}

#[test]
fn intertwining_on_bumps() {
    let v: Vec<f64> = grid(2.0, 1025).iter().map(|r| bump(*r, 0.3, 1.7)).collect();
    let res = intertwine_residual(&v, 2.0, Space::Hyperbolic, 2, &[0.5, 1.0, 2.0, 5.0]).unwrap();
    assert!(res <= 1e-6, "{res}");
    let v: Vec<f64> = grid(PI, 1025).iter().map(|r| bump(*r, 0.3, 1.7)).collect();
    let orders: Vec<f64> = (0..=8).map(|j| j as f64).collect();
    let res = intertwine_residual(&v, PI, Space::Spherical, 2, &orders).unwrap();
    assert!(res <= 1e-6, "{res}");
    assert_eq!(intertwine_residual(&vec![0.0; 65], 2.0, Space::Hyperbolic, 2, &[1.0]).unwrap(), 0.0);
}

#[test]
fn fl_transform_decays_on_real_axis() {
    let v: Vec<f64> = grid(2.0, 1025).iter().map(|r| gaussian(r - 1.0, 0.12, 0.9)).collect();
    let lambdas: Vec<f64> = (0..=80).map(|j| j as f64 * 0.5).collect();
    let vh = fl_transform_many(&v, 2.0, Space::Hyperbolic, 2, &lambdas).unwrap();
    for k in 0..=4 {
        let weighted: Vec<f64> = lambdas.iter().zip(&vh).map(|(l, x)| x.abs() * (1.0 + l).powi(k)).collect();
        let body = weighted[..60].iter().cloned().fold(0.0, f64::max);
        let tail = weighted[60..].iter().cloned().fold(0.0, f64::max);
        assert!(tail <= body, "k = {k}: {tail} > {body}");
    }
}

/// `exp(-r²/2σ²)`, cut to zero at `|r| = a` where it is negligible.
fn gaussian(r: f64, sigma: f64, a: f64) -> f64 {
    if r.abs() < a { (-(r * r) / (2.0 * sigma * sigma)).exp() } else { 0.0 }
}

#[test]
fn t_inverse_of_zero_and_support() {
    let t: Vec<f64> = grid(2.0, 201);
    let zero = t_inverse(&vec![0.0; 321], 1.6, Space::Hyperbolic, 2, &t, 50.0, 2048).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));

    // Simpson in r is fourth order, so the tail bound needs a fine radial grid
    let rg = grid(1.6, 4097);
    let g: Vec<f64> = rg.iter().map(|r| gaussian(*r, 0.15, 1.2)).collect();
    let u = t_inverse(&g, 1.6, Space::Hyperbolic, 2, &t, default_lambda_max(1.2), 2048).unwrap();
    let peak = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tail = t.iter().zip(&u).filter(|(t, _)| **t > 1.3).fold(0.0f64, |a, (_, x)| a.max(x.abs()));
    assert!(tail <= 1e-6 * peak, "{tail} of {peak}");
}

#[test]
fn t_inverse_rejects_slow_tails() {
    let rg = grid(1.6, 321);
    let g: Vec<f64> = rg.iter().map(|r| bump(*r, -1.2, 1.2)).collect();
    let t = grid(1.6, 11);
    let err = t_inverse(&g, 1.6, Space::Spherical, 2, &t, 20.0, 1024).unwrap_err();
    assert!(err.to_string().contains("lambda_max"), "{err}");
}

#[test]
fn sphere_t_round_trip() {
    let rg = grid(1.6, 2561);
    let g: Vec<f64> = rg.iter().map(|r| gaussian(*r, 0.2, 1.5)).collect();
    let t = grid(1.6, 641);
    let u = t_inverse(&g, 1.6, Space::Spherical, 2, &t, 40.0, 2048).unwrap();
    let back = t_forward_sphere(&u, 1.6, 40, &rg).unwrap();
    let err = rel_l2(&back, &g);
    assert!(err <= 1e-4, "{err}");
}

#[test]
fn truncated_modes_reproduce_phantom_samples() {
    let f = Phantom::single(BumpKind::GaussianBump, Point::polar(Geometry::S2, 0.2, 0.0).unwrap(), 0.1, 1.0).unwrap();
    let s_grid = grid(0.7, 71);
    let field = ModeField::from_field(&f, 0.7, s_grid, 24, 64).unwrap();
    assert!(field.support_violation() <= 1e-12);
}
