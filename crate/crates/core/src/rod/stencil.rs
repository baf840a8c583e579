use nalgebra::DVector;

use super::RodGrid;
use crate::error::{Error, Result};

/// Centered periodic difference weights for orders 1 to 4, offsets −2..=2,
/// before division by `Δs^order`.
const STENCILS: [[f64; 5]; 4] = [
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

/// Periodic centered derivative of nodal values.
pub fn spatial_derivs(u: &DVector<f64>, order: usize, grid: &RodGrid) -> Result<DVector<f64>> {
    spatial_derivs_lifted(u, 0.0, order, grid)
}

/// Derivative of a quasi-periodic field with `u_{j+N} = u_j + jump`.
pub fn spatial_derivs_lifted(
    u: &DVector<f64>,
    jump: f64,
    order: usize,
    grid: &RodGrid,
) -> Result<DVector<f64>> {
    if !(1..=4).contains(&order) {
        return Err(Error::Parameter {
            name: "order",
            reason: format!("derivative order must be 1..=4, got {order}"),
        });
    }
    let n = grid.n_nodes();
    if u.len() != n {
        return Err(Error::dim("nodal vector", n, u.len()));
    }
    let weights = &STENCILS[order - 1];
    let scale = grid.spacing().powi(order as i32);
    let n_i = n as isize;
    let out = DVector::from_fn(n, |j, _| {
        let mut acc = 0.0;
        for (m, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let idx = j as isize + m as isize - 2;
            let wrapped = idx.rem_euclid(n_i);
            let laps = idx.div_euclid(n_i) as f64;
            acc += w * (u[wrapped as usize] + laps * jump);
        }
        acc / scale
    });
    Ok(out)
}
