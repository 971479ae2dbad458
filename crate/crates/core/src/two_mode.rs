//! Two-mode wavefunctions `Ψ(x_S, x_M)`: beam-splitter mixing of a signal
//! with a meter mode, homodyne conditioning on the meter quadrature, and
//! marginals.
//!
//! The beam splitter with transmission amplitude `q` and reflection
//! amplitude `r = sqrt(1 - q²)` is the orthogonal change of coordinates
//!
//! ```text
//! Ψ(x_S, x_M) = signal(q x_S + r x_M) · meter(r x_S - q x_M)
//! ```
//!
//! which has unit Jacobian. With a vacuum meter the meter factor is
//! `exp[-(1 - q²)(x_S - q x_M / r)²]`.

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{fock_table, fock_weights};
use crate::grid::{lagrange_eval, QuadratureGrid};
use crate::state::{Guard, SingleModeState, NORM_DRIFT_TOL};

pub(crate) fn check_transmission(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("transmission amplitude must lie in (0, 1), got {q}")));
    }
    Ok((1.0 - q * q).sqrt())
}

/// Joint wavefunction, rows indexed by `x_S`, columns by `x_M`.
#[derive(Clone, Debug)]
pub struct TwoModeState {
    grid_s: QuadratureGrid,
    grid_m: QuadratureGrid,
    amps: Array2<C64>,
}

/// Mixes `signal` and `meter` on a beam splitter of transmission amplitude
/// `q`. Both inputs must share one grid.
pub fn beam_splitter(signal: &SingleModeState, meter: &SingleModeState, q: f64) -> Result<TwoModeState> {
    beam_splitter_guarded(signal, meter, q, &mut Guard::Strict)
}

pub(crate) fn beam_splitter_guarded(
    signal: &SingleModeState,
    meter: &SingleModeState,
    q: f64,
    guard: &mut Guard<'_>,
) -> Result<TwoModeState> {
    let r = check_transmission(q)?;
    if signal.grid() != meter.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *signal.grid();
    let xs = grid.points();
    let n = grid.n_points();
    let h = grid.step();
    let x0 = grid.x_min();
    let (sig, met) = (signal.amplitudes(), meter.amplitudes());

    let mut amps = Array2::<C64>::zeros((n, n));
    amps.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(xs.par_iter())
        .for_each(|(mut row, &x_s)| {
            for (cell, &x_m) in row.iter_mut().zip(&xs) {
                let u = q * x_s + r * x_m;
                let v = r * x_s - q * x_m;
                *cell = lagrange_eval(sig, (u - x0) / h) * lagrange_eval(met, (v - x0) / h);
            }
        });

    let out = TwoModeState { grid_s: grid, grid_m: grid, amps };
    let expected = signal.norm_sq() * meter.norm_sq();
    if expected > 0.0 {
        let drift = (out.norm_sq() - expected).abs() / expected;
        if !(drift <= NORM_DRIFT_TOL) {
            guard.raise(Error::NormDrift { op: "beam splitter", drift })?;
        }
    }
    Ok(out)
}

/// Beam splitter followed by conditioning on the rescaled meter outcome
/// `x_m = x_M / r`, evaluated only along the line `x_M = r x_m`.
///
/// Equal to `beam_splitter(..).condition_meter(x_m, q)` without building
/// the joint grid. Returns the unnormalized conditional signal state and
/// the outcome density `P(x_m)` (its squared norm).
pub fn beam_splitter_conditioned(
    signal: &SingleModeState,
    meter: &SingleModeState,
    q: f64,
    x_m: f64,
) -> Result<(SingleModeState, f64)> {
    let r = check_transmission(q)?;
    if signal.grid() != meter.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *signal.grid();
    let x_meter = r * x_m;
    if !grid.contains(x_meter) {
        return Err(Error::OutOfGrid { value: x_meter, x_min: grid.x_min(), x_max: grid.x_max() });
    }
    let jac = r.sqrt();
    let amps = grid
        .points()
        .iter()
        .map(|&x_s| {
            let u = q * x_s + r * x_meter;
            let v = r * x_s - q * x_meter;
            grid.interpolate(signal.amplitudes(), u) * grid.interpolate(meter.amplitudes(), v) * jac
        })
        .collect();
    let psi = SingleModeState::from_amplitudes(grid, amps)?;
    let density = psi.norm_sq();
    Ok((psi, density))
}

impl TwoModeState {
    pub fn from_amplitudes(grid_s: QuadratureGrid, grid_m: QuadratureGrid, amps: Array2<C64>) -> Result<Self> {
        if amps.dim() != (grid_s.n_points(), grid_m.n_points()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid_s, grid_m, amps })
    }

    /// Product state `a(x_S) b(x_M)`.
    pub fn product(a: &SingleModeState, b: &SingleModeState) -> Self {
        let amps = Array2::from_shape_fn((a.grid().n_points(), b.grid().n_points()), |(i, j)| {
            a.amplitudes()[i] * b.amplitudes()[j]
        });
        Self { grid_s: *a.grid(), grid_m: *b.grid(), amps }
    }

    pub fn grid_signal(&self) -> &QuadratureGrid { &self.grid_s }

    pub fn grid_meter(&self) -> &QuadratureGrid { &self.grid_m }

    pub fn amplitudes(&self) -> &Array2<C64> { &self.amps }

    /// `∫∫|Ψ|² dx_S dx_M`.
    pub fn norm_sq(&self) -> f64 {
        let rows: Vec<f64> = self
            .amps
            .axis_iter(Axis(0))
            .map(|row| self.grid_m.integrate(&row.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()))
            .collect();
        self.grid_s.integrate(&rows)
    }

    /// Sup-norm distance between amplitude arrays.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.amps.dim() != other.amps.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Homodyne density of the meter quadrature, `ρ(x_M) = ∫|Ψ|² dx_S`.
    pub fn meter_marginal(&self) -> Vec<f64> {
        self.amps
            .axis_iter(Axis(1))
            .map(|col| self.grid_s.integrate(&col.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()))
            .collect()
    }

    /// `∫|Ψ|² dx_M` as a function of `x_S`.
    pub fn signal_marginal(&self) -> Vec<f64> {
        self.amps
            .axis_iter(Axis(0))
            .map(|row| self.grid_m.integrate(&row.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()))
            .collect()
    }

    /// Signal slice `Ψ(·, x_M)` interpolated along the meter axis; zero
    /// outside the meter grid.
    pub(crate) fn slice_at_meter(&self, x_meter: f64) -> Vec<C64> {
        let s = (x_meter - self.grid_m.x_min()) / self.grid_m.step();
        self.amps
            .axis_iter(Axis(0))
            .map(|row| match row.as_slice() {
                Some(vals) => lagrange_eval(vals, s),
                None => lagrange_eval(&row.to_vec(), s),
            })
            .collect()
    }

    /// Conditions on the homodyne outcome `x_m` of the meter, rescaled so
    /// that `x_M = sqrt(1 - q²) x_m`.
    ///
    /// The returned state is unnormalized; its squared norm is the outcome
    /// density `P(x_m)` in the rescaled variable (the Jacobian
    /// `sqrt(1 - q²)` of `x_M -> x_m` is folded into the amplitudes) and is
    /// returned alongside.
    pub fn condition_meter(&self, x_m: f64, q: f64) -> Result<(SingleModeState, f64)> {
        let r = check_transmission(q)?;
        let x_meter = r * x_m;
        if !self.grid_m.contains(x_meter) {
            return Err(Error::OutOfGrid {
                value: x_meter,
                x_min: self.grid_m.x_min(),
                x_max: self.grid_m.x_max(),
            });
        }
        Ok(self.condition_unchecked(x_meter, r))
    }

    /// Conditioning without the range check; outside the grid the state is
    /// zero.
    pub(crate) fn condition_unchecked(&self, x_meter: f64, r: f64) -> (SingleModeState, f64) {
        let jac = r.sqrt();
        let amps = self.slice_at_meter(x_meter).into_iter().map(|a| a * jac).collect();
        let psi = SingleModeState::from_amplitudes(self.grid_s, amps).expect("row length matches grid");
        let density = psi.norm_sq();
        (psi, density)
    }

    /// Photon-number weights of the signal mode with the meter traced out:
    /// `p_n = ∫ dx_M |<n|Ψ(·, x_M)>|²` for `n = 0..=n_max`.
    pub fn signal_fock_weights(&self, n_max: usize) -> Vec<f64> {
        let xs = self.grid_s.points();
        let table = fock_table(&xs, n_max);
        let per_column: Vec<Vec<f64>> = self
            .amps
            .axis_iter(Axis(1))
            .into_par_iter()
            .map(|col| {
                let col: Vec<C64> = col.iter().copied().collect();
                fock_weights(&table, &self.grid_s, &col)
            })
            .collect();
        (0..=n_max)
            .map(|n| self.grid_m.integrate(&per_column.iter().map(|w| w[n]).collect::<Vec<_>>()))
            .collect()
    }
}
