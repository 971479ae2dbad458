//! Single-mode pure states sampled on a quadrature grid.
//!
//! Convention: `[x, p] = i/2`, so the vacuum has `Var(x) = Var(p) = 1/4`
//! and `p` acts as `-(i/2) d/dx`. Momentum moments use spectral
//! differentiation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{fock_values, MAX_PHOTONS};
use crate::grid::QuadratureGrid;
use crate::spectral;

/// Allowed `|norm^2 - 1|` for a state treated as normalized.
pub const NORMALIZED_TOL: f64 = 1e-9;
/// Allowed boundary amplitude relative to the peak amplitude.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Allowed relative norm change of a unitary resampling.
pub const NORM_DRIFT_TOL: f64 = 1e-6;

/// First and second quadrature moments of a normalized state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
    /// Symmetrized covariance `<(x p + p x)/2> - <x><p>`.
    pub cov_xp: f64,
}

impl Moments {
    /// Moments after the squeeze `x -> s x`, `p -> p / s`.
    pub fn squeezed(&self, s: f64) -> Self {
        Self {
            mean_x: s * self.mean_x,
            var_x: s * s * self.var_x,
            mean_p: self.mean_p / s,
            var_p: self.var_p / (s * s),
            cov_xp: self.cov_xp,
        }
    }
}

/// Unnormalized expectation integrals `∫ψ* O ψ dx`. Summing these over
/// outcomes gives the moments of a classical mixture.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RawMoments {
    pub norm_sq: f64,
    pub x: f64,
    pub x2: f64,
    pub p: f64,
    pub p2: f64,
    /// `Re <ψ| x p |ψ>`
    pub xp: f64,
}

impl RawMoments {
    pub fn scaled(&self, w: f64) -> Self {
        Self {
            norm_sq: w * self.norm_sq,
            x: w * self.x,
            x2: w * self.x2,
            p: w * self.p,
            p2: w * self.p2,
            xp: w * self.xp,
        }
    }

    /// Integrals after the squeeze `x -> s x`, `p -> p / s`.
    pub fn squeezed(&self, s: f64) -> Self {
        Self {
            norm_sq: self.norm_sq,
            x: s * self.x,
            x2: s * s * self.x2,
            p: self.p / s,
            p2: self.p2 / (s * s),
            xp: self.xp,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            norm_sq: self.norm_sq + o.norm_sq,
            x: self.x + o.x,
            x2: self.x2 + o.x2,
            p: self.p + o.p,
            p2: self.p2 + o.p2,
            xp: self.xp + o.xp,
        }
    }

    /// Central moments of the (possibly mixed) state these integrals
    /// describe, normalized by `norm_sq`.
    pub fn central(&self) -> Moments {
        let n = self.norm_sq;
        let mean_x = self.x / n;
        let mean_p = self.p / n;
        Moments {
            mean_x,
            var_x: self.x2 / n - mean_x * mean_x,
            mean_p,
            var_p: self.p2 / n - mean_p * mean_p,
            cov_xp: self.xp / n - mean_x * mean_p,
        }
    }
}

/// What a numerical-quality check does on failure: return the error, or
/// record it and carry on (used to report residuals on grids too coarse for
/// the checks to pass).
pub(crate) enum Guard<'a> {
    Strict,
    Record(&'a mut Vec<Error>),
}

impl Guard<'_> {
    pub(crate) fn raise(&mut self, e: Error) -> Result<()> {
        match self {
            Self::Strict => Err(e),
            Self::Record(log) => {
                log.push(e);
                Ok(())
            }
        }
    }

    pub(crate) fn check(&mut self, r: Result<()>) -> Result<()> {
        r.or_else(|e| self.raise(e))
    }
}

/// A pure single-mode state `ψ(x_k)`, possibly unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeState {
    grid: QuadratureGrid,
    amps: Vec<C64>,
    norm_sq: f64,
}

impl SingleModeState {
    /// Wraps raw samples. No boundary check is made.
    pub fn from_amplitudes(grid: QuadratureGrid, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != grid.n_points() {
            return Err(Error::GridMismatch);
        }
        let norm_sq = grid.integrate(&amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>());
        Ok(Self { grid, amps, norm_sq })
    }

    pub fn from_fn(grid: QuadratureGrid, f: impl Fn(f64) -> C64) -> Self {
        let amps = grid.points().into_iter().map(f).collect();
        Self::from_amplitudes(grid, amps).expect("length matches grid")
    }

    /// The vacuum `(2/π)^{1/4} e^{-x²}`.
    pub fn vacuum(grid: QuadratureGrid) -> Result<Self> {
        Self::coherent(grid, 0.0, 0.0)
    }

    /// Coherent state with `<x> = x0`, `<p> = p0`.
    pub fn coherent(grid: QuadratureGrid, x0: f64, p0: f64) -> Result<Self> {
        let c = (2.0 / PI).powf(0.25);
        let s = Self::from_fn(grid, |x| {
            C64::from_polar(c * (-(x - x0) * (x - x0)).exp(), 2.0 * p0 * x)
        });
        s.check_boundary("coherent state preparation")?;
        Ok(s)
    }

    /// Number state `|n>`, `n <= 20`.
    pub fn fock(grid: QuadratureGrid, n: usize) -> Result<Self> {
        Self::superposition(grid, &one_hot(n))
    }

    /// Normalized `Σ c_n |n>`.
    pub fn superposition(grid: QuadratureGrid, coefficients: &[C64]) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() > MAX_PHOTONS + 1 {
            return Err(Error::InvalidParameter(format!(
                "superposition needs 1..={} coefficients, got {}",
                MAX_PHOTONS + 1,
                coefficients.len()
            )));
        }
        let weight: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter("superposition coefficients vanish".into()));
        }
        let n_max = coefficients.len() - 1;
        let scale = weight.sqrt().recip();
        let s = Self::from_fn(grid, |x| {
            fock_values(x, n_max)
                .iter()
                .zip(coefficients)
                .map(|(f, c)| c * *f)
                .sum::<C64>()
                * scale
        });
        if (s.norm_sq - 1.0).abs() > NORMALIZED_TOL {
            return Err(Error::NotNormalized { norm_sq: s.norm_sq });
        }
        s.check_boundary("number-state preparation")?;
        Ok(s)
    }

    pub fn grid(&self) -> &QuadratureGrid { &self.grid }

    pub fn amplitudes(&self) -> &[C64] { &self.amps }

    /// Cached `∫|ψ|² dx`.
    pub fn norm_sq(&self) -> f64 { self.norm_sq }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq - 1.0).abs() <= NORMALIZED_TOL
    }

    /// `|ψ(x_k)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// The state divided by its own norm.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.norm_sq > 0.0) {
            return Err(Error::Numerical("cannot normalize a null state".into()));
        }
        Ok(self.scaled(C64::new(self.norm_sq.sqrt().recip(), 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        let amps = self.amps.iter().map(|a| a * c).collect();
        Self { grid: self.grid, amps, norm_sq: self.norm_sq * c.norm_sqr() }
    }

    /// `<self|other>` by trapezoid quadrature.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        self.same_grid(other)?;
        let prod: Vec<C64> = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).collect();
        Ok(self.grid.integrate_complex(&prod))
    }

    /// L2 distance `‖self - other‖`, no renormalization.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        let diff: Vec<f64> = self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).collect();
        Ok(self.grid.integrate(&diff).sqrt())
    }

    /// Expectation integrals without normalization.
    pub fn raw_moments(&self) -> RawMoments {
        let h = self.grid.step();
        let xs = self.grid.points();
        let d = spectral::derivative(&self.amps, h);
        let dens = self.density();
        let x: Vec<f64> = xs.iter().zip(&dens).map(|(x, r)| x * r).collect();
        let x2: Vec<f64> = xs.iter().zip(&dens).map(|(x, r)| x * x * r).collect();
        // p ψ = -(i/2) ψ'
        let pvals: Vec<C64> = d.iter().map(|v| C64::new(0.0, -0.5) * v).collect();
        let p: Vec<f64> = self.amps.iter().zip(&pvals).map(|(a, b)| (a.conj() * b).re).collect();
        let p2: Vec<f64> = pvals.iter().map(|v| v.norm_sqr()).collect();
        let xp: Vec<f64> = xs
            .iter()
            .zip(self.amps.iter().zip(&pvals))
            .map(|(x, (a, b))| x * (a.conj() * b).re)
            .collect();
        RawMoments {
            norm_sq: self.norm_sq,
            x: self.grid.integrate(&x),
            x2: self.grid.integrate(&x2),
            p: self.grid.integrate(&p),
            p2: self.grid.integrate(&p2),
            xp: self.grid.integrate(&xp),
        }
    }

    /// Quadrature moments; the state must be normalized.
    pub fn moments(&self) -> Result<Moments> {
        if !self.is_normalized() {
            return Err(Error::NotNormalized { norm_sq: self.norm_sq });
        }
        Ok(self.raw_moments().central())
    }

    /// Translation `ψ(x) -> ψ(x - dx)`, done spectrally.
    pub fn displace(&self, dx: f64) -> Result<Self> {
        self.displace_guarded(dx, &mut Guard::Strict)
    }

    pub(crate) fn displace_guarded(&self, dx: f64, guard: &mut Guard<'_>) -> Result<Self> {
        if !dx.is_finite() {
            return Err(Error::InvalidParameter(format!("displacement {dx}")));
        }
        if dx == 0.0 {
            return Ok(self.clone());
        }
        // weight that would be pushed past the edge of the box
        let leaked: Vec<f64> = self
            .grid
            .points()
            .iter()
            .zip(&self.amps)
            .map(|(x, a)| if self.grid.contains(x + dx) { 0.0 } else { a.norm_sqr() })
            .collect();
        let leak = self.grid.integrate(&leaked);
        if self.norm_sq > 0.0 && leak > NORM_DRIFT_TOL * self.norm_sq {
            guard.raise(Error::BoundaryLeak { op: "displacement", ratio: leak / self.norm_sq })?;
        }
        let amps = spectral::translate(&self.amps, self.grid.step(), dx);
        let out = Self::from_amplitudes(self.grid, amps)?;
        guard.check(out.check_boundary("displacement"))?;
        Ok(out)
    }

    /// Squeeze `ψ(x) -> s^{-1/2} ψ(x / s)`, so `x -> s x` and `p -> p / s`.
    pub fn squeeze(&self, s: f64) -> Result<Self> {
        self.squeeze_guarded(s, &mut Guard::Strict)
    }

    pub(crate) fn squeeze_guarded(&self, s: f64, guard: &mut Guard<'_>) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("squeeze factor must be positive, got {s}")));
        }
        if s == 1.0 {
            return Ok(self.clone());
        }
        let c = s.sqrt().recip();
        let amps = self
            .grid
            .points()
            .iter()
            .map(|&x| self.grid.interpolate(&self.amps, x / s) * c)
            .collect();
        let out = Self::from_amplitudes(self.grid, amps)?;
        guard.check(out.check_drift("squeeze", self.norm_sq))?;
        guard.check(out.check_boundary("squeeze"))?;
        Ok(out)
    }

    /// Applies the Gaussian measurement operator
    /// `(2π δx²)^{-1/4} exp[-(x_m - x)² / (4 δx²)]`, diagonal in `x`.
    pub fn apply_qnd_kraus(&self, x_m: f64, delta_x: f64) -> Result<Self> {
        if !(delta_x > 0.0 && delta_x.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolution must be positive, got {delta_x}")));
        }
        if !x_m.is_finite() {
            return Err(Error::InvalidParameter(format!("outcome {x_m}")));
        }
        let amps = self
            .grid
            .points()
            .iter()
            .zip(&self.amps)
            .map(|(&x, a)| a * kraus_kernel(x_m, x, delta_x))
            .collect();
        Self::from_amplitudes(self.grid, amps)
    }

    pub(crate) fn check_drift(&self, op: &'static str, reference: f64) -> Result<()> {
        if reference > 0.0 {
            let drift = (self.norm_sq - reference).abs() / reference;
            if !(drift <= NORM_DRIFT_TOL) {
                return Err(Error::NormDrift { op, drift });
            }
        }
        Ok(())
    }

    /// Fails when the boundary samples are not negligible against the peak.
    pub fn check_boundary(&self, op: &'static str) -> Result<()> {
        let peak = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(());
        }
        let n = self.amps.len();
        let edge = self.amps[0].norm().max(self.amps[n - 1].norm());
        let ratio = edge / peak;
        if ratio > BOUNDARY_TOL {
            return Err(Error::BoundaryLeak { op, ratio });
        }
        Ok(())
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Kernel of the measurement operator at `x` for outcome `x_m`.
#[inline]
pub fn kraus_kernel(x_m: f64, x: f64, delta_x: f64) -> f64 {
    let d2 = delta_x * delta_x;
    (2.0 * PI * d2).powf(-0.25) * (-(x_m - x) * (x_m - x) / (4.0 * d2)).exp()
}

fn one_hot(n: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = C64::new(1.0, 0.0);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference() -> QuadratureGrid {
        QuadratureGrid::new(-8.0, 8.0, 1024).unwrap()
    }

    /// Independent moment oracle: plain Riemann sums of the closed-form
    /// Gaussian density on a much finer grid.
    fn gaussian_moment(order: i32, center: f64) -> f64 {
        let n = 200_001;
        let h = 20.0 / (n - 1) as f64;
        let mut s = 0.0;
        for k in 0..n {
            let x = -10.0 + k as f64 * h;
            s += x.powi(order) * (2.0 / PI).sqrt() * (-2.0 * (x - center) * (x - center)).exp() * h;
        }
        s
    }

    #[test]
    fn vacuum_moments() {
        let vac = SingleModeState::vacuum(reference()).unwrap();
        let m = vac.moments().unwrap();
        let oracle_var = gaussian_moment(2, 0.0);
        assert_abs_diff_eq!(oracle_var, 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(m.var_x, oracle_var, epsilon = 1e-8);
        assert_abs_diff_eq!(m.mean_x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.mean_p, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.var_p, 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(vac.norm_sq(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn vacuum_in_tiny_box_leaks() {
        let g = QuadratureGrid::new(-1.0, 1.0, 64).unwrap();
        assert!(matches!(SingleModeState::vacuum(g), Err(Error::BoundaryLeak { .. })));
    }

    #[test]
    fn coherent_states() {
        let g = reference();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert_eq!(SingleModeState::coherent(g, 0.0, 0.0).unwrap(), vac);

        let c = SingleModeState::coherent(g, 0.5, 0.0).unwrap().moments().unwrap();
        assert_abs_diff_eq!(c.mean_x, gaussian_moment(1, 0.5), epsilon = 1e-8);
        assert_abs_diff_eq!(c.mean_x, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(c.var_x, 0.25, epsilon = 1e-8);

        let c = SingleModeState::coherent(g, 0.0, 0.7).unwrap().moments().unwrap();
        assert_abs_diff_eq!(c.mean_p, 0.7, epsilon = 1e-6);

        let c = SingleModeState::coherent(g, 0.3, -0.2).unwrap().moments().unwrap();
        assert_abs_diff_eq!(c.mean_x, 0.3, epsilon = 1e-5);
        assert_abs_diff_eq!(c.var_x, 0.25, epsilon = 1e-5);
        assert_abs_diff_eq!(c.mean_p, -0.2, epsilon = 1e-5);
        assert_abs_diff_eq!(c.var_p, 0.25, epsilon = 1e-5);
    }

    #[test]
    fn number_states() {
        let g = reference();
        let f0 = SingleModeState::fock(g, 0).unwrap();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert!(f0.distance(&vac).unwrap() < 1e-14);

        let f1 = SingleModeState::fock(g, 1).unwrap();
        let m = f1.moments().unwrap();
        assert_abs_diff_eq!(m.var_x, 0.75, epsilon = 1e-7);
        assert_abs_diff_eq!(m.mean_x, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.mean_p, 0.0, epsilon = 1e-5);
        assert_abs_diff_eq!(m.var_p, 0.75, epsilon = 1e-5);
        assert_abs_diff_eq!(f1.inner_product(&vac).unwrap().norm(), 0.0, epsilon = 1e-10);
        assert!(SingleModeState::fock(g, 21).is_err());
    }

    #[test]
    fn number_state_variance_law() {
        let g = reference();
        for n in 0..=10 {
            let m = SingleModeState::fock(g, n).unwrap().moments().unwrap();
            assert_abs_diff_eq!(m.var_x, (2 * n + 1) as f64 / 4.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn fock_orthonormality() {
        let g = reference();
        let basis: Vec<_> = (0..=10).map(|n| SingleModeState::fock(g, n).unwrap()).collect();
        for (m, a) in basis.iter().enumerate() {
            for (n, b) in basis.iter().enumerate() {
                let want = if m == n { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(a.inner_product(b).unwrap().norm(), want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn inner_products() {
        let g = reference();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert_abs_diff_eq!(vac.inner_product(&vac).unwrap().re, 1.0, epsilon = 1e-9);
        let c = SingleModeState::coherent(g, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(c.inner_product(&vac).unwrap().norm(), (-0.125f64).exp(), epsilon = 1e-6);
        let other = SingleModeState::vacuum(QuadratureGrid::new(-8.0, 8.0, 512).unwrap()).unwrap();
        assert_eq!(vac.inner_product(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn moments_reject_unnormalized() {
        let vac = SingleModeState::vacuum(reference()).unwrap();
        let half = vac.scaled(C64::new(0.5, 0.0));
        assert!(matches!(half.moments(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn displacement() {
        let g = reference();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert_eq!(vac.displace(0.0).unwrap(), vac);
        let d = vac.displace(1.5).unwrap();
        let m = d.moments().unwrap();
        assert_abs_diff_eq!(m.mean_x, 1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(m.var_x, 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(m.var_p, 0.25, epsilon = 1e-6);
        assert!(matches!(vac.displace(100.0), Err(Error::BoundaryLeak { .. })));
    }

    #[test]
    fn displacement_keeps_momentum() {
        let g = reference();
        let c = SingleModeState::coherent(g, -0.4, 0.9).unwrap();
        let d = c.displace(0.3 + 0.37 * g.step()).unwrap().moments().unwrap();
        assert_abs_diff_eq!(d.mean_x, -0.1 + 0.37 * g.step(), epsilon = 1e-8);
        assert_abs_diff_eq!(d.mean_p, 0.9, epsilon = 1e-8);
        assert_abs_diff_eq!(d.var_p, 0.25, epsilon = 1e-8);
    }

    #[test]
    fn squeezing() {
        let g = reference();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert_eq!(vac.squeeze(1.0).unwrap(), vac);
        let sq = vac.squeeze(0.5).unwrap().moments().unwrap();
        assert_abs_diff_eq!(sq.var_x, 0.0625, epsilon = 1e-6);
        assert_abs_diff_eq!(sq.var_p, 1.0, epsilon = 1e-4);
        // the stretched tail reaches the edge of [-8, 8]
        let wide = QuadratureGrid::new(-10.0, 10.0, 1280).unwrap();
        let c = SingleModeState::coherent(wide, 0.4, 0.0).unwrap().squeeze(2.0).unwrap();
        assert_abs_diff_eq!(c.moments().unwrap().mean_x, 0.8, epsilon = 1e-6);
        assert!(matches!(
            SingleModeState::coherent(g, 0.4, 0.0).unwrap().squeeze(2.0),
            Err(Error::BoundaryLeak { .. })
        ));
        assert!(vac.squeeze(0.0).is_err());
        assert!(vac.squeeze(-1.0).is_err());
    }

    #[test]
    fn squeeze_undersampled_is_reported() {
        let g = QuadratureGrid::new(-8.0, 8.0, 64).unwrap();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert!(matches!(vac.squeeze(0.05), Err(Error::NormDrift { .. })));
    }

    #[test]
    fn kraus_flat_limit() {
        let vac = SingleModeState::vacuum(reference()).unwrap();
        let big = 1e6;
        let out = vac.apply_qnd_kraus(0.0, big).unwrap();
        let want = (2.0 * PI * big * big).powf(-0.5);
        assert_abs_diff_eq!(out.norm_sq() / want, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn kraus_vacuum_probability() {
        let vac = SingleModeState::vacuum(reference()).unwrap();
        let out = vac.apply_qnd_kraus(0.0, 0.5).unwrap();
        // closed form: Gaussian of variance 1/4 + 1/4 evaluated at 0
        assert_abs_diff_eq!(out.norm_sq(), PI.sqrt().recip(), epsilon = 1e-6);
        assert!(vac.apply_qnd_kraus(0.0, 0.0).is_err());
        assert!(vac.apply_qnd_kraus(0.0, -1.0).is_err());
    }

    #[test]
    fn kraus_composition_law() {
        let g = reference();
        let s = SingleModeState::superposition(
            g,
            &[C64::new(0.3, 0.1), C64::new(-0.5, 0.2), C64::new(0.0, 0.7)],
        )
        .unwrap();
        let dx = 0.4;
        let twice = s.apply_qnd_kraus(0.3, dx).unwrap().apply_qnd_kraus(0.3, dx).unwrap();
        let once = s.apply_qnd_kraus(0.3, dx / 2f64.sqrt()).unwrap();
        // K_δ(x_m)² = (2πδ²)^{-1/2} (πδ²)^{1/4} K_{δ/√2}(x_m)
        let c = (2.0 * PI * dx * dx).powf(-0.5) * (PI * dx * dx).powf(0.25);
        let rescaled = once.scaled(C64::new(c, 0.0));
        assert!(twice.distance(&rescaled).unwrap() < 1e-12);
    }
}
