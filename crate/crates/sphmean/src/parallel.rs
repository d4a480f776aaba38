//! Row- and mode-parallel drivers. Results are collected in index order, so
//! output does not depend on the thread count.

use rayon::prelude::*;
use sphmean_core::field::Field;
use sphmean_core::timereversal::{assemble_reconstruction, backward_solve_mode, mode_decompose, truncate_modes, Reconstruction};
use sphmean_core::transform::{check_forward_inputs, sinogram_row, DarbouxLayout, ARC_STEP};
use sphmean_core::Sinogram;

/// Same values as `sphmean_core::transform::forward_sinogram`.
pub fn forward_sinogram<F: Field + Sync + ?Sized>(
    f: &F,
    r: f64,
    n_theta: usize,
    n_r: usize,
    r_max: f64,
) -> sphmean_core::Result<Sinogram> {
    check_forward_inputs(f, r, r_max)?;
    let mut g = Sinogram::zeros(f.geometry(), r, n_theta, n_r, r_max)?;
    let rows = (0..n_theta)
        .into_par_iter()
        .map(|j| sinogram_row(f, r, g.theta(j), n_r, r_max, ARC_STEP))
        .collect::<sphmean_core::Result<Vec<_>>>()?;
    for (j, row) in rows.into_iter().enumerate() {
        g.values[j * n_r..(j + 1) * n_r].copy_from_slice(&row);
    }
    Ok(g)
}

/// Same result as `sphmean_core::timereversal::reconstruct`.
pub fn reconstruct(g: &Sinogram, n_s: usize, m_cap: usize) -> sphmean_core::Result<Reconstruction> {
    let layout = DarbouxLayout::new(g.r, g.r_max, g.n_r, n_s)?;
    let modes: Vec<_> = truncate_modes(&mode_decompose(g), m_cap).into_iter().collect();
    let solutions = modes
        .par_iter()
        .map(|(key, profile)| backward_solve_mode(profile, g.r_max, *key, g.geometry, g.r, layout.grid))
        .collect::<sphmean_core::Result<Vec<_>>>()?;
    let field = assemble_reconstruction(&solutions, g.geometry, g.r, layout.ball_cells)?;
    Ok(Reconstruction { field, solutions })
}
