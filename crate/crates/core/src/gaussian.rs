//! Exact first- and second-moment propagation for Gaussian states.
//!
//! Moments are ordered `(x, p)` per mode and interleaved across modes:
//! `(x_S, p_S, x_M, p_M)` for two modes. The transformations mirror the
//! grid operations in [`crate::state`] and [`crate::two_mode`], so this
//! module serves as an independent analytic reference for them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::protocol::{feedback_shift, resolution_from_q, run_conditioned};
use crate::state::SingleModeState;
use crate::two_mode::check_transmission;

/// Vacuum variance of either quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMoments {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianMoments {
    /// Validates symmetry, positivity and the single-mode uncertainty bound
    /// `det(cov_mode) >= 1/16`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || d % 2 != 0 || cov.shape() != (d, d) {
            return Err(Error::InvalidParameter("moment dimensions must be 2 per mode".into()));
        }
        if (&cov - cov.transpose()).abs().max() > 1e-12 * cov.abs().max().max(1.0) {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        let eig = cov.clone().symmetric_eigenvalues();
        if eig.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidParameter("covariance is not positive definite".into()));
        }
        for m in 0..d / 2 {
            let det = cov.fixed_view::<2, 2>(2 * m, 2 * m).determinant();
            if det < 1.0 / 16.0 - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "mode {m} violates the uncertainty bound: det = {det}"
                )));
            }
        }
        Ok(Self { mean, cov })
    }

    pub fn vacuum() -> Self {
        Self::coherent(0.0, 0.0)
    }

    pub fn coherent(x0: f64, p0: f64) -> Self {
        Self {
            mean: DVector::from_vec(vec![x0, p0]),
            cov: DMatrix::from_diagonal_element(2, 2, VACUUM_VARIANCE),
        }
    }

    pub fn modes(&self) -> usize { self.mean.len() / 2 }

    pub fn mean(&self) -> &DVector<f64> { &self.mean }

    pub fn cov(&self) -> &DMatrix<f64> { &self.cov }

    pub fn mean_x(&self) -> f64 { self.mean[0] }

    pub fn mean_p(&self) -> f64 { self.mean[1] }

    pub fn var_x(&self) -> f64 { self.cov[(0, 0)] }

    pub fn var_p(&self) -> f64 { self.cov[(1, 1)] }

    pub fn cov_xp(&self) -> f64 { self.cov[(0, 1)] }

    pub fn det(&self) -> f64 { self.cov.determinant() }

    fn single_mode(&self) -> Result<()> {
        if self.modes() != 1 {
            return Err(Error::InvalidParameter("operation needs a single-mode state".into()));
        }
        Ok(())
    }

    /// `mean -> S mean`, `cov -> S cov S^T`.
    fn transformed(&self, s: &DMatrix<f64>) -> Self {
        let cov = s * &self.cov * s.transpose();
        // restore exact symmetry lost to rounding
        let cov = 0.5 * (&cov + cov.transpose());
        Self { mean: s * &self.mean, cov }
    }
}

/// Beam splitter `(u, v) -> (q u + r v, r u - q v)` applied to both
/// quadratures of a signal `sig` and meter `met`.
pub fn g_beam_splitter(sig: &GaussianMoments, met: &GaussianMoments, q: f64) -> Result<GaussianMoments> {
    let r = check_transmission(q)?;
    sig.single_mode()?;
    met.single_mode()?;
    let mut mean = DVector::zeros(4);
    mean.rows_mut(0, 2).copy_from(&sig.mean);
    mean.rows_mut(2, 2).copy_from(&met.mean);
    let mut cov = DMatrix::zeros(4, 4);
    cov.view_mut((0, 0), (2, 2)).copy_from(&sig.cov);
    cov.view_mut((2, 2), (2, 2)).copy_from(&met.cov);
    #[rustfmt::skip]
    let s = DMatrix::from_row_slice(4, 4, &[
        q,   0.0, r,   0.0,
        0.0, q,   0.0, r,
        r,   0.0, -q,  0.0,
        0.0, r,   0.0, -q,
    ]);
    Ok(GaussianMoments { mean, cov }.transformed(&s))
}

/// Conditions the signal of a two-mode Gaussian on the meter value
/// `x_M = x_meter` (meter momentum integrated out). Returns the
/// conditional signal moments and the normal density of `x_M` at
/// `x_meter`.
pub fn g_condition_x(two: &GaussianMoments, x_meter: f64) -> Result<(GaussianMoments, f64)> {
    if two.modes() != 2 {
        return Err(Error::InvalidParameter("conditioning needs a two-mode state".into()));
    }
    let var_b = two.cov[(2, 2)];
    if !(var_b > 0.0) {
        return Err(Error::Numerical("singular conditioning variance".into()));
    }
    let cross = two.cov.view((0, 2), (2, 1)).into_owned();
    let resid = x_meter - two.mean[2];
    let mean = two.mean.rows(0, 2) + &cross * (resid / var_b);
    let cov = two.cov.view((0, 0), (2, 2)) - &cross * cross.transpose() / var_b;
    let cov = 0.5 * (&cov + cov.transpose());
    let density = (-(resid * resid) / (2.0 * var_b)).exp() / (2.0 * PI * var_b).sqrt();
    Ok((GaussianMoments { mean, cov }, density))
}

/// Conditioning in the rescaled outcome `x_m = x_M / sqrt(1 - q²)`; the
/// density carries the Jacobian so it integrates to one over `x_m`.
pub fn g_condition_rescaled(two: &GaussianMoments, x_m: f64, q: f64) -> Result<(GaussianMoments, f64)> {
    let r = check_transmission(q)?;
    let (g, dens) = g_condition_x(two, r * x_m)?;
    Ok((g, r * dens))
}

pub fn g_displace(g: &GaussianMoments, dx: f64) -> Result<GaussianMoments> {
    g.single_mode()?;
    let mut out = g.clone();
    out.mean[0] += dx;
    Ok(out)
}

/// `x -> s x`, `p -> p / s`.
pub fn g_squeeze(g: &GaussianMoments, s: f64) -> Result<GaussianMoments> {
    g.single_mode()?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("squeeze factor must be positive, got {s}")));
    }
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![s, 1.0 / s]));
    Ok(g.transformed(&m))
}

/// Intermediate and final moments of the three-step protocol.
#[derive(Clone, Debug)]
pub struct GaussianTrace {
    pub two_mode: GaussianMoments,
    pub conditioned: GaussianMoments,
    pub feedback: GaussianMoments,
    pub output: GaussianMoments,
    /// Outcome density `P(x_m)`.
    pub density: f64,
}

/// Beam splitter with a vacuum meter, conditioning on `x_m`, feedback
/// displacement and squeezing by `q`.
pub fn g_run_protocol_trace(g_in: &GaussianMoments, q: f64, x_m: f64) -> Result<GaussianTrace> {
    let two_mode = g_beam_splitter(g_in, &GaussianMoments::vacuum(), q)?;
    let (conditioned, density) = g_condition_rescaled(&two_mode, x_m, q)?;
    let feedback = g_displace(&conditioned, feedback_shift(q, x_m)?)?;
    let output = g_squeeze(&feedback, q)?;
    Ok(GaussianTrace { two_mode, conditioned, feedback, output, density })
}

pub fn g_run_protocol(g_in: &GaussianMoments, q: f64, x_m: f64) -> Result<(GaussianMoments, f64)> {
    let t = g_run_protocol_trace(g_in, q, x_m)?;
    Ok((t.output, t.density))
}

/// Outcome density for a Gaussian input: normal with mean `<x_in>` and
/// variance `Var(x_in) + δx²`.
pub fn g_outcome_density(g_in: &GaussianMoments, q: f64, x_m: f64) -> Result<f64> {
    g_in.single_mode()?;
    let d = resolution_from_q(q)?;
    let var = g_in.var_x() + d * d;
    let z = x_m - g_in.mean_x();
    Ok((-(z * z) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}

/// Largest deviations between grid and oracle over the three protocol
/// stages (conditioned, post-feedback, output).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleAgreement {
    /// Over `<x>`, `<p>`.
    pub mean: f64,
    /// Over `Var(x)`, `Var(p)`, `Cov(x, p)`.
    pub cov: f64,
    /// `|P_grid(x_m) - P_oracle(x_m)|`.
    pub density: f64,
}

/// Runs the protocol on the grid and through the oracle and compares the
/// normalized moments stage by stage.
pub fn oracle_agreement(g_in: &GaussianMoments, psi_in: &SingleModeState, q: f64, x_m: f64) -> Result<OracleAgreement> {
    let g = g_run_protocol_trace(g_in, q, x_m)?;
    let vacuum = SingleModeState::vacuum(*psi_in.grid())?;
    let run = run_conditioned(psi_in, &vacuum, q, x_m)?;
    let mut agreement = OracleAgreement { mean: 0.0, cov: 0.0, density: (run.density - g.density).abs() };
    for (psi, gm) in [(&run.psi_bs, &g.conditioned), (&run.psi_fb, &g.feedback), (&run.psi_out, &g.output)] {
        let m = psi.normalized()?.moments()?;
        agreement.mean = agreement.mean.max((m.mean_x - gm.mean_x()).abs()).max((m.mean_p - gm.mean_p()).abs());
        agreement.cov = agreement
            .cov
            .max((m.var_x - gm.var_x()).abs())
            .max((m.var_p - gm.var_p()).abs())
            .max((m.cov_xp - gm.cov_xp()).abs());
    }
    Ok(agreement)
}
