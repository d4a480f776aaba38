use std::f64::consts::PI;

use sphmean_core::field::interpolate_uniform;
use sphmean_core::range::adversarial_sinogram;
use sphmean_core::spectrum::assemble_basis;
use sphmean_core::timereversal::{
    assemble_reconstruction, backward_solve_mode, energy_trace, mode_decompose, reconstruct, solution_diagnostics,
    wave_equivalence_residual, WaveOptions,
};
use sphmean_core::transform::{forward_sinogram, DarbouxGrid, DarbouxLayout};
use sphmean_core::{BumpKind, Geometry, ModeField, ModeKey, Parity, Phantom, Point, Sinogram};

fn phantom(geometry: Geometry, r: f64) -> Phantom {
    Phantom::single(BumpKind::GaussianBump, Point::polar(geometry, 0.2 * r, 0.7).unwrap(), 0.25 * r, 1.0).unwrap()
}

fn truth(p: &Phantom, r: f64, s_grid: Vec<f64>) -> ModeField {
    ModeField::from_field(p, r, s_grid, 48, 128).unwrap()
}

#[test]
fn decomposition_of_simple_sinograms() {
    let mut flat = Sinogram::zeros(Geometry::H2, 1.0, 17, 40, 2.0).unwrap();
    let mut two = flat.clone();
    for j in 0..17 {
        for k in 0..40 {
            let c = (k as f64 * 0.1).sin();
            flat.set(j, k, c);
            two.set(j, k, (2.0 * flat.theta(j)).cos() * c);
        }
    }
    let modes = mode_decompose(&flat);
    for (key, p) in &modes {
        let peak = p.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if *key == ModeKey::new(0, Parity::Cos) {
            assert!(peak > 0.1);
        } else {
            assert!(peak <= 1e-13, "{key:?}");
        }
    }
    let modes = mode_decompose(&two);
    let c2 = &modes[&ModeKey::new(2, Parity::Cos)];
    for (k, v) in c2.iter().enumerate() {
        assert!((v - PI.sqrt() * (k as f64 * 0.1).sin()).abs() <= 1e-13);
    }
    assert!(modes.iter().filter(|(k, _)| k.m != 2 || k.parity != Parity::Cos).all(|(_, p)| p.iter().all(|v| v.abs() <= 1e-13)));

    let total: f64 = two.values.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / 17.0;
    let split: f64 = modes.values().flatten().map(|v| v * v).sum();
    assert!((total - split).abs() <= 1e-12 * total);
}

#[test]
fn zero_data_gives_zero_everything() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = if geometry == Geometry::S2 { 0.7 } else { 1.0 };
        let grid = DarbouxGrid { ds: r / 32.0, dr: r / 64.0 };
        let sol = backward_solve_mode(&vec![0.0; 129], 2.0 * r, ModeKey::new(1, Parity::Sin), geometry, r, grid).unwrap();
        assert!(sol.u.iter().all(|v| *v == 0.0));
        let report = solution_diagnostics(std::slice::from_ref(&sol), geometry).unwrap();
        assert_eq!(report.boundary_max, [0.0; 5]);
        assert_eq!(report.dod_sup, 0.0);
        assert_eq!(report.symmetry_residual, 0.0);
        assert_eq!(wave_equivalence_residual(&sol, 2, &WaveOptions::default()).unwrap(), 0.0);
        if geometry == Geometry::S2 {
            let e = energy_trace(std::slice::from_ref(&sol));
            assert!(e.iter().all(|v| *v <= 1e-12));
        }
        let field = assemble_reconstruction(&[sol], geometry, r, 32).unwrap();
        assert_eq!(field.l2_norm(), 0.0);
    }
}

#[test]
fn terminal_and_lateral_data_imposed() {
    let r = 1.0;
    let g = forward_sinogram(&phantom(Geometry::H2, r), r, 32, 129, 2.0 * r).unwrap();
    let rec = reconstruct(&g, 129, 16).unwrap();
    let modes = mode_decompose(&g);
    for sol in &rec.solutions {
        assert_eq!(sol.boundary(), modes[&sol.key]);
        let last = sol.r_grid.len() - 1;
        for i in 0..sol.s_grid.len() - 1 {
            assert_eq!(sol.at(i, last), 0.0);
        }
    }
}

#[test]
fn round_trip_converges_at_second_order() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = if geometry == Geometry::S2 { 0.7 } else { 1.0 };
        let p = phantom(geometry, r);
        let mut errs = Vec::new();
        for (nt, nr, ns) in [(32, 65, 65), (64, 129, 129), (128, 257, 257)] {
            let g = forward_sinogram(&p, r, nt, nr, 2.0 * r).unwrap();
            let rec = reconstruct(&g, ns, 32).unwrap();
            errs.push(rec.field.rel_l2_error(&truth(&p, r, rec.field.s_grid.clone())).unwrap());
        }
        assert!(errs[2] <= 2e-2, "{errs:?}");
        let ratio = errs[1] / errs[2];
        assert!((3.2..=4.8).contains(&ratio), "{geometry:?} {errs:?}");
    }
}

#[test]
fn diagnostics_on_range_data() {
    let r = 1.0;
    let g = forward_sinogram(&phantom(Geometry::H2, r), r, 64, 257, 2.0 * r).unwrap();
    let rec = reconstruct(&g, 257, 32).unwrap();
    let report = solution_diagnostics(&rec.solutions, Geometry::H2).unwrap();
    for k in 0..=3 {
        assert!(report.boundary_max[k] <= 5e-3, "k = {k}: {:?}", report.boundary_max);
    }
    assert!(report.dod_sup <= 1e-3, "{}", report.dod_sup);
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
}

#[test]
fn diagnostics_flag_adversarial_data() {
    let r = 1.0;
    let basis = assemble_basis(Geometry::H2, r, 2, 2).unwrap();
    let g = adversarial_sinogram(&basis.entries[0], Geometry::H2, r, 32, 257, 2.0 * r).unwrap();
    let rec = reconstruct(&g, 257, 8).unwrap();
    let report = solution_diagnostics(&rec.solutions, Geometry::H2).unwrap();
    assert!(report.boundary_max[0] > 0.05 || report.boundary_max[1] > 0.05, "{:?}", report.boundary_max);
}

#[test]
fn reconstruction_is_linear() {
    let r = 0.7;
    let a = forward_sinogram(&phantom(Geometry::S2, r), r, 32, 129, 2.0 * r).unwrap();
    let other = Phantom::single(BumpKind::PolynomialBump, Point::polar(Geometry::S2, 0.3, 2.5).unwrap(), 0.1, -0.5).unwrap();
    let b = forward_sinogram(&other, r, 32, 129, 2.0 * r).unwrap();
    let (alpha, beta) = (1.7, -0.6);
    let mix = a.combine(alpha, &b, beta).unwrap();
    let fa = reconstruct(&a, 129, 15).unwrap().field;
    let fb = reconstruct(&b, 129, 15).unwrap().field;
    let fm = reconstruct(&mix, 129, 15).unwrap().field;
    let scale = fm.l2_norm();
    for (key, p) in &fm.modes {
        let pa = fa.profile(*key);
        let pb = fb.profile(*key);
        for i in 0..p.len() {
            assert!((p[i] - alpha * pa[i] - beta * pb[i]).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn staggered_grids_agree_to_scheme_order() {
    let r = 1.0;
    let p = phantom(Geometry::H2, r);
    let key = ModeKey::new(1, Parity::Cos);
    let g = forward_sinogram(&p, r, 32, 241, 2.0 * r).unwrap();
    let data = &mode_decompose(&g)[&key];
    let solve = |cells: usize| {
        let ds = r / cells as f64;
        let out_dr = 2.0 * r / 240.0;
        let q = (out_dr / (0.9 * ds)).ceil();
        backward_solve_mode(data, 2.0 * r, key, Geometry::H2, r, DarbouxGrid { ds, dr: out_dr / q }).unwrap().profile()
    };
    let on = |f: &[f64], cells: usize, s: f64| {
        let grid: Vec<f64> = (0..=cells).map(|i| i as f64 * r / cells as f64).collect();
        interpolate_uniform(&grid, f, s)
    };
    let (a, b, fine) = (solve(60), solve(64), solve(128));
    let probe: Vec<f64> = (0..=60).map(|i| i as f64 * r / 60.0).collect();
    let norm: f64 = probe.iter().map(|s| on(&fine, 128, *s).powi(2)).sum::<f64>().sqrt();
    let diff: f64 = probe.iter().map(|s| (on(&a, 60, *s) - on(&b, 64, *s)).powi(2)).sum::<f64>().sqrt() / norm;
    let truncation: f64 = probe.iter().map(|s| (on(&b, 64, *s) - on(&fine, 128, *s)).powi(2)).sum::<f64>().sqrt() / norm;
    assert!(diff <= 4.0 * truncation, "{diff} vs {truncation}");
}

#[test]
fn sphere_energy_of_zero_data_stays_zero() {
    let r = 0.7;
    let g = Sinogram::zeros(Geometry::S2, r, 16, 129, 2.0 * r).unwrap();
    let layout = DarbouxLayout::new(r, 2.0 * r, 129, 129).unwrap();
    let sols: Vec<_> = ModeKey::up_to(3)
        .into_iter()
        .map(|key| backward_solve_mode(&vec![0.0; g.n_r], g.r_max, key, Geometry::S2, r, layout.grid).unwrap())
        .collect();
    let e = energy_trace(&sols);
    assert_eq!(e.len(), 129);
    assert!(e.iter().all(|v| *v <= 1e-12));
}

#[test]
fn cfl_violation_rejected() {
    let err = backward_solve_mode(&[0.0; 65], 2.0, ModeKey::new(0, Parity::Cos), Geometry::H2, 1.0, DarbouxGrid { ds: 1.0 / 32.0, dr: 1.0 / 32.0 })
        .unwrap_err();
    assert!(err.to_string().contains("CFL"), "{err}");
}

#[test]
fn data_past_twice_radius_warns() {
    let mut data = vec![0.0; 65];
    data[64] = 1.0;
    data[20] = 1.0;
    let sol = backward_solve_mode(&data, 2.0, ModeKey::new(0, Parity::Cos), Geometry::H2, 1.0, DarbouxGrid { ds: 1.0 / 16.0, dr: 1.0 / 32.0 }).unwrap();
    assert_eq!(sol.warnings.len(), 1);
}
