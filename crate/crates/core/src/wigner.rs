//! Wigner quasi-probability `W(x, p) = (2/π) ∫ ψ*(x+y) ψ(x-y) e^{4ipy} dy`
//! under the `[x, p] = i/2` convention.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::SingleModeState;

/// Evaluates `W` on the tensor grid `xs × ps` (rows `x`, columns `p`).
pub fn wigner(state: &SingleModeState, xs: &[f64], ps: &[f64]) -> Result<Array2<f64>> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: state.norm_sq() });
    }
    let grid = state.grid();
    let h = grid.step();
    let n = grid.n_points();
    let amps = state.amplitudes();

    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| {
            // c_j = ψ*(x + j h) ψ(x - j h), j ≥ 0; c_{-j} = conj(c_j)
            let corr: Vec<C64> = (0..n)
                .map(|j| {
                    let y = j as f64 * h;
                    grid.interpolate(amps, x + y).conj() * grid.interpolate(amps, x - y)
                })
                .collect();
            ps.iter()
                .map(|&p| {
                    let step = C64::from_polar(1.0, 4.0 * p * h);
                    let mut phase = C64::new(1.0, 0.0);
                    let mut acc = 0.0;
                    for (j, c) in corr.iter().enumerate() {
                        if j > 0 {
                            phase *= step;
                            acc += 2.0 * (c * phase).re;
                        } else {
                            acc += c.re;
                        }
                    }
                    2.0 / PI * h * acc
                })
                .collect()
        })
        .collect();

    let mut out = Array2::zeros((xs.len(), ps.len()));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    Ok(out)
}
