//! Uniform sampling of a quadrature axis.
//!
//! Every state in the crate is a set of samples on a [`QuadratureGrid`].
//! Integrals use the trapezoid rule; off-grid evaluation uses local
//! Lagrange interpolation, with samples outside the box taken as zero.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted number of grid points.
pub const MIN_POINTS: usize = 16;

/// Points used by the local interpolation stencil.
pub const STENCIL: usize = 6;

/// Uniform grid `x_k = x_min + k h`, `k = 0..n_points`, with `x_min = -x_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl QuadratureGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= 0.0 || x_min != -x_max {
            return Err(Error::AsymmetricGrid { x_min, x_max });
        }
        if n_points < MIN_POINTS {
            return Err(Error::TooFewPoints { n_points, min: MIN_POINTS });
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> f64 { self.x_min }

    pub fn x_max(&self) -> f64 { self.x_max }

    pub fn n_points(&self) -> usize { self.n_points }

    pub fn len(&self) -> usize { self.n_points }

    pub fn is_empty(&self) -> bool { false }

    /// Grid step `h`.
    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_points).map(|k| self.x_min + k as f64 * h).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Trapezoid quadrature of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.step())
    }

    pub fn integrate_complex(&self, values: &[C64]) -> C64 {
        let n = values.len();
        if n == 0 {
            return C64::new(0.0, 0.0);
        }
        let inner: C64 = values.iter().sum();
        (inner - 0.5 * (values[0] + values[n - 1])) * self.step()
    }

    /// Interpolates samples `values` (living on this grid) at `x`.
    #[inline]
    pub fn interpolate(&self, values: &[C64], x: f64) -> C64 {
        lagrange_eval(values, (x - self.x_min) / self.step())
    }
}

/// Trapezoid rule on uniform spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let inner: f64 = values.iter().sum();
    (inner - 0.5 * (values[0] + values[n - 1])) * h
}

/// Trapezoid rule on arbitrary sorted abscissae.
pub fn trapezoid_nonuniform(xs: &[f64], values: &[f64]) -> f64 {
    xs.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

const LEFT: isize = -(STENCIL as isize / 2 - 1);

/// `1 / Π_{k≠j} (n_j - n_k)` for the stencil nodes `n_j = LEFT + j`.
const INV_DENOMINATORS: [f64; STENCIL] = {
    let mut out = [0.0; STENCIL];
    let mut j = 0;
    while j < STENCIL {
        let mut den = 1.0;
        let mut k = 0;
        while k < STENCIL {
            if k != j {
                den *= (j as isize - k as isize) as f64;
            }
            k += 1;
        }
        out[j] = 1.0 / den;
        j += 1;
    }
    out
};

/// Lagrange weights for the stencil nodes at fractional position `t`
/// (in units of the step) past node `0`.
#[inline]
fn lagrange_weights(t: f64) -> [f64; STENCIL] {
    let mut prefix = [1.0; STENCIL + 1];
    let mut suffix = [1.0; STENCIL + 1];
    for k in 0..STENCIL {
        prefix[k + 1] = prefix[k] * (t - (LEFT + k as isize) as f64);
        let m = STENCIL - 1 - k;
        suffix[m] = suffix[m + 1] * (t - (LEFT + m as isize) as f64);
    }
    let mut w = [0.0; STENCIL];
    for j in 0..STENCIL {
        w[j] = prefix[j] * suffix[j + 1] * INV_DENOMINATORS[j];
    }
    w
}

/// Evaluates the local interpolant of `values` at fractional index `s`.
/// Samples outside `0..len` count as zero.
#[inline]
pub(crate) fn lagrange_eval(values: &[C64], s: f64) -> C64 {
    let n = values.len() as isize;
    if !(s >= 0.0 && s <= (n - 1) as f64) {
        return C64::new(0.0, 0.0);
    }
    let base = s.floor();
    let i = base as isize;
    let t = s - base;
    if t == 0.0 {
        return values[i as usize];
    }
    let w = lagrange_weights(t);
    let left = i + LEFT;
    if left >= 0 && left + (STENCIL as isize) <= n {
        let window = &values[left as usize..left as usize + STENCIL];
        let (mut re, mut im) = (0.0, 0.0);
        for (v, wj) in window.iter().zip(&w) {
            re += v.re * wj;
            im += v.im * wj;
        }
        return C64::new(re, im);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (j, wj) in w.iter().enumerate() {
        let idx = left + j as isize;
        if idx >= 0 && idx < n {
            acc += values[idx as usize] * *wj;
        }
    }
    acc
}
