//! Photon-number eigenfunctions in the quadrature representation.
//!
//! With `[x, p] = i/2` the number states are
//! `psi_n(x) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) x) exp(-x^2)`.
//! They are generated with the three-term recurrence for normalized Hermite
//! functions, which stays finite where `H_n` and `n!` would overflow.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;

use crate::grid::QuadratureGrid;

/// Largest supported photon number.
pub const MAX_PHOTONS: usize = 20;

/// Values of `psi_0 ..= psi_n_max` at `x`.
pub fn fock_values(x: f64, n_max: usize) -> Vec<f64> {
    let y = SQRT_2 * x;
    let mut out = Vec::with_capacity(n_max + 1);
    // standard Hermite functions phi_n(y), rescaled by 2^{1/4}
    let scale = 2f64.powf(0.25);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * y * y).exp();
    out.push(scale * cur);
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * y * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(scale * cur);
    }
    out
}

/// Value of `psi_n` at `x`.
pub fn fock_value(n: usize, x: f64) -> f64 {
    fock_values(x, n)[n]
}

/// Number-state samples on `xs`: row `n` holds `psi_n(xs[k])`.
pub fn fock_table(xs: &[f64], n_max: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![Vec::with_capacity(xs.len()); n_max + 1];
    for &x in xs {
        for (row, v) in rows.iter_mut().zip(fock_values(x, n_max)) {
            row.push(v);
        }
    }
    rows
}

/// Unnormalized weights `|<n|ψ>|²` of samples `amps` on `grid`, given the
/// basis `table` from [`fock_table`] on the same grid.
pub fn fock_weights(table: &[Vec<f64>], grid: &QuadratureGrid, amps: &[C64]) -> Vec<f64> {
    table
        .iter()
        .map(|basis| {
            let prod: Vec<C64> = basis.iter().zip(amps).map(|(b, a)| a * *b).collect();
            grid.integrate_complex(&prod).norm_sqr()
        })
        .collect()
}
