//! The QND measurement as a three-step sequence and as a single Gaussian
//! measurement operator, plus the residuals of the identities relating the
//! two descriptions.

use crate::error::{Error, Result};
use crate::grid::{trapezoid_nonuniform, QuadratureGrid};
use crate::state::{kraus_kernel, Guard, SingleModeState};
use crate::two_mode::{beam_splitter, beam_splitter_conditioned, beam_splitter_guarded, check_transmission, TwoModeState};

/// Resolution `δx = q / (2 sqrt(1 - q²))`, i.e. `4 δx² = q² / (1 - q²)`.
pub fn resolution_from_q(q: f64) -> Result<f64> {
    let r = check_transmission(q)?;
    Ok(q / (2.0 * r))
}

/// Feedback displacement `Δx = (1 - q²) / q · x_m`.
pub fn feedback_shift(q: f64, x_m: f64) -> Result<f64> {
    check_transmission(q)?;
    Ok((1.0 - q * q) / q * x_m)
}

/// Transmission amplitude and the constants derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolParams {
    q: f64,
    delta_x: f64,
    gain: f64,
}

impl ProtocolParams {
    pub fn new(q: f64) -> Result<Self> {
        Ok(Self { q, delta_x: resolution_from_q(q)?, gain: (1.0 - q * q) / q })
    }

    pub fn q(&self) -> f64 { self.q }

    /// Beam-splitter reflectivity `1 - q²`.
    pub fn reflectivity(&self) -> f64 { 1.0 - self.q * self.q }

    pub fn delta_x(&self) -> f64 { self.delta_x }

    /// Feedback gain `Δx / x_m`.
    pub fn gain(&self) -> f64 { self.gain }
}

/// Every intermediate state of one conditioned protocol run.
#[derive(Clone, Debug)]
pub struct ProtocolTrace {
    pub psi_in: SingleModeState,
    pub two_mode: TwoModeState,
    /// Conditional signal after homodyne detection, unnormalized.
    pub psi_bs: SingleModeState,
    /// After the feedback displacement, unnormalized.
    pub psi_fb: SingleModeState,
    /// After squeezing, unnormalized.
    pub psi_out: SingleModeState,
    pub psi_out_normalized: SingleModeState,
    pub x_m: f64,
    /// Outcome density `P(x_m) = <psi_bs|psi_bs>`.
    pub density: f64,
}

/// Conditional states of a protocol run, without the joint state.
#[derive(Clone, Debug)]
pub struct ConditionedRun {
    pub psi_bs: SingleModeState,
    pub psi_fb: SingleModeState,
    pub psi_out: SingleModeState,
    pub density: f64,
}

fn feedback_and_squeeze(
    psi_bs: &SingleModeState,
    q: f64,
    x_m: f64,
    guard: &mut Guard<'_>,
) -> Result<(SingleModeState, SingleModeState)> {
    let psi_fb = psi_bs.displace_guarded(feedback_shift(q, x_m)?, guard)?;
    let psi_out = psi_fb.squeeze_guarded(q, guard)?;
    Ok((psi_fb, psi_out))
}

/// Runs the measurement on `psi_in` with a vacuum meter, conditioned on
/// outcome `x_m`.
pub fn run_protocol(psi_in: &SingleModeState, q: f64, x_m: f64) -> Result<ProtocolTrace> {
    run_protocol_guarded(psi_in, q, x_m, &mut Guard::Strict)
}

fn run_protocol_guarded(psi_in: &SingleModeState, q: f64, x_m: f64, guard: &mut Guard<'_>) -> Result<ProtocolTrace> {
    let vacuum = SingleModeState::vacuum(*psi_in.grid())?;
    let two_mode = beam_splitter_guarded(psi_in, &vacuum, q, guard)?;
    let (psi_bs, density) = two_mode.condition_meter(x_m, q)?;
    let (psi_fb, psi_out) = feedback_and_squeeze(&psi_bs, q, x_m, guard)?;
    let psi_out_normalized = psi_out.normalized()?;
    Ok(ProtocolTrace {
        psi_in: psi_in.clone(),
        two_mode,
        psi_bs,
        psi_fb,
        psi_out,
        psi_out_normalized,
        x_m,
        density,
    })
}

/// Same steps as [`run_protocol`] but evaluates the joint state only on the
/// conditioning line, which is what trajectory sampling needs.
pub fn run_conditioned(psi_in: &SingleModeState, vacuum: &SingleModeState, q: f64, x_m: f64) -> Result<ConditionedRun> {
    let (psi_bs, density) = beam_splitter_conditioned(psi_in, vacuum, q, x_m)?;
    let (psi_fb, psi_out) = feedback_and_squeeze(&psi_bs, q, x_m, &mut Guard::Strict)?;
    Ok(ConditionedRun { psi_bs, psi_fb, psi_out, density })
}

/// Which route(s) [`pm_distribution`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistributionRoute {
    /// `<ψ|K(x_m)²|ψ>` from the measurement operator.
    Kraus,
    /// Norm of the homodyne-conditioned signal state.
    Meter,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub x_m: Vec<f64>,
    pub kraus: Option<Vec<f64>>,
    pub meter: Option<Vec<f64>>,
}

impl OutcomeDistribution {
    /// The Kraus route when present, otherwise the meter route.
    pub fn primary(&self) -> &[f64] {
        self.kraus.as_deref().or(self.meter.as_deref()).expect("at least one route")
    }

    pub fn total(&self) -> f64 {
        trapezoid_nonuniform(&self.x_m, self.primary())
    }

    /// Largest `|P_kraus - P_meter|` relative to the peak of `P`.
    pub fn route_discrepancy(&self) -> Option<f64> {
        let (a, b) = (self.kraus.as_ref()?, self.meter.as_ref()?);
        let peak = a.iter().cloned().fold(0.0, f64::max);
        Some(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / peak)
    }
}

/// Tolerance on `∫P dx_m = 1`.
pub const COMPLETENESS_TOL: f64 = 1e-5;

/// Uniform outcome grid spanning the box plus `8 δx` on each side.
pub fn outcome_grid(grid: &QuadratureGrid, q: f64, n_nodes: usize) -> Result<Vec<f64>> {
    let d = resolution_from_q(q)?;
    let span = grid.x_max() + 8.0 * d;
    Ok(QuadratureGrid::symmetric(span, n_nodes.max(crate::grid::MIN_POINTS))?.points())
}

/// Outcome density `P(x_m) = <ψ|K(x_m)²|ψ>` at each node of `xm_grid`.
pub fn pm_distribution(psi_in: &SingleModeState, q: f64, xm_grid: &[f64], route: DistributionRoute) -> Result<OutcomeDistribution> {
    let d = resolution_from_q(q)?;
    let kraus = matches!(route, DistributionRoute::Kraus | DistributionRoute::Both)
        .then(|| kraus_probabilities(psi_in, d, xm_grid));
    let meter = if matches!(route, DistributionRoute::Meter | DistributionRoute::Both) {
        let r = check_transmission(q)?;
        let vacuum = SingleModeState::vacuum(*psi_in.grid())?;
        let two = beam_splitter(psi_in, &vacuum, q)?;
        Some(xm_grid.iter().map(|&x_m| two.condition_unchecked(r * x_m, r).1).collect())
    } else {
        None
    };
    let dist = OutcomeDistribution { x_m: xm_grid.to_vec(), kraus, meter };
    for values in [dist.kraus.as_deref(), dist.meter.as_deref()].into_iter().flatten() {
        let total = trapezoid_nonuniform(xm_grid, values);
        if !((total - 1.0).abs() <= COMPLETENESS_TOL) {
            return Err(Error::Incomplete { total });
        }
    }
    Ok(dist)
}

fn kraus_probabilities(psi: &SingleModeState, delta_x: f64, xm_grid: &[f64]) -> Vec<f64> {
    let grid = psi.grid();
    let xs = grid.points();
    let dens = psi.density();
    xm_grid
        .iter()
        .map(|&x_m| {
            let w: Vec<f64> = xs
                .iter()
                .zip(&dens)
                .map(|(&x, r)| {
                    let k = kraus_kernel(x_m, x, delta_x);
                    k * k * r
                })
                .collect();
            grid.integrate(&w)
        })
        .collect()
}

/// L2 residuals of the operator identities at one outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    /// Protocol output vs. measurement operator.
    pub r7: f64,
    /// Bare beam-splitter state vs. `D(-Δx) S(1/q) K`.
    pub r11: f64,
    /// Post-feedback state vs. `S(1/q) K`.
    pub r12: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.r7.max(self.r11).max(self.r12)
    }
}

pub fn identity_residuals(psi_in: &SingleModeState, q: f64, x_m: f64) -> Result<Residuals> {
    let trace = run_protocol(psi_in, q, x_m)?;
    residuals_from_trace(&trace, q)
}

/// Like [`identity_residuals`], but failed boundary and norm-drift checks
/// are returned alongside the residuals instead of aborting, so that
/// under-resolved grids still yield numbers. Other errors still abort.
pub fn identity_residuals_lenient(psi_in: &SingleModeState, q: f64, x_m: f64) -> Result<(Residuals, Vec<Error>)> {
    let mut log = Vec::new();
    let mut guard = Guard::Record(&mut log);
    let trace = run_protocol_guarded(psi_in, q, x_m, &mut guard)?;
    let res = residuals_guarded(&trace, q, &mut guard)?;
    Ok((res, log))
}

/// Residuals computed from an existing trace.
pub fn residuals_from_trace(trace: &ProtocolTrace, q: f64) -> Result<Residuals> {
    residuals_guarded(trace, q, &mut Guard::Strict)
}

fn residuals_guarded(trace: &ProtocolTrace, q: f64, guard: &mut Guard<'_>) -> Result<Residuals> {
    let d = resolution_from_q(q)?;
    let kraus = trace.psi_in.apply_qnd_kraus(trace.x_m, d)?;
    let amplified = kraus.squeeze_guarded(1.0 / q, guard)?;
    let unfed = amplified.displace_guarded(-feedback_shift(q, trace.x_m)?, guard)?;
    Ok(Residuals {
        r7: trace.psi_out.distance(&kraus)?,
        r11: trace.psi_bs.distance(&unfed)?,
        r12: trace.psi_fb.distance(&amplified)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn resolution_values() {
        assert_abs_diff_eq!(resolution_from_q(FRAC_1_SQRT_2).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(resolution_from_q(0.6).unwrap(), 0.375, epsilon = 1e-15);
        assert!(resolution_from_q(1e-9).unwrap() < 1e-8);
        assert!(resolution_from_q(0.0).is_err());
        assert!(resolution_from_q(1.0).is_err());
    }

    #[test]
    fn feedback_values() {
        assert_abs_diff_eq!(feedback_shift(0.5, 2.0).unwrap(), 3.0, epsilon = 1e-15);
        assert_eq!(feedback_shift(0.3, 0.0).unwrap(), 0.0);
        // (1 - 1/2) / (1/√2) = √2 / 2
        assert_abs_diff_eq!(feedback_shift(FRAC_1_SQRT_2, 1.0).unwrap(), 0.5 * 2f64.sqrt(), epsilon = 1e-15);
        assert!(feedback_shift(1.2, 1.0).is_err());
    }

    #[test]
    fn params_invariants() {
        for &q in &[0.1, 0.3, 0.5, FRAC_1_SQRT_2, 0.9, 0.99] {
            let p = ProtocolParams::new(q).unwrap();
            assert_abs_diff_eq!(4.0 * p.delta_x().powi(2), q * q / (1.0 - q * q), epsilon = 1e-12);
            assert_abs_diff_eq!(p.gain() * p.q(), p.reflectivity(), epsilon = 1e-15);
        }
    }

    #[test]
    fn vacuum_run_gives_gaussian_posterior() {
        let g = crate::reference_grid();
        let vac = SingleModeState::vacuum(g).unwrap();
        let t = run_protocol(&vac, FRAC_1_SQRT_2, 1.0).unwrap();
        let m = t.psi_out_normalized.moments().unwrap();
        assert_abs_diff_eq!(m.mean_x, 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(m.var_x, 0.125, epsilon = 1e-4);
        for s in [&t.psi_bs, &t.psi_fb, &t.psi_out] {
            assert_abs_diff_eq!(s.norm_sq(), t.density, epsilon = 1e-6);
        }
    }

    #[test]
    fn weak_limit_is_identity() {
        let g = crate::reference_grid();
        let c = SingleModeState::coherent(g, 0.3, 0.1).unwrap();
        // outcome density peaks at <x> = 0.3
        let t = run_protocol(&c, 0.99, 0.3).unwrap();
        let f = c.inner_product(&t.psi_out_normalized).unwrap().norm_sqr();
        assert!(f >= 0.999, "fidelity {f}");
    }

    #[test]
    fn conditioned_run_matches_full_run() {
        let g = crate::reference_grid();
        let c = SingleModeState::coherent(g, -0.2, 0.4).unwrap();
        let vac = SingleModeState::vacuum(g).unwrap();
        let full = run_protocol(&c, 0.55, 0.8).unwrap();
        let line = run_conditioned(&c, &vac, 0.55, 0.8).unwrap();
        assert!(full.psi_out.distance(&line.psi_out).unwrap() < 1e-6);
        assert_abs_diff_eq!(full.density, line.density, epsilon = 1e-6);
    }

    #[test]
    fn vacuum_distribution() {
        let g = crate::reference_grid();
        let vac = SingleModeState::vacuum(g).unwrap();
        let q = FRAC_1_SQRT_2;
        let xm = outcome_grid(&g, q, 1024).unwrap();
        let dist = pm_distribution(&vac, q, &xm, DistributionRoute::Both).unwrap();
        assert_abs_diff_eq!(dist.total(), 1.0, epsilon = 1e-5);
        assert!(dist.route_discrepancy().unwrap() < 1e-5);
        let p0 = pm_distribution(&vac, q, &[0.0], DistributionRoute::Kraus);
        // a single node cannot carry the distribution
        assert!(matches!(p0, Err(Error::Incomplete { .. })));
        let p = kraus_probabilities(&vac, 0.5, &[0.0])[0];
        assert_abs_diff_eq!(p, (PI).sqrt().recip(), epsilon = 1e-4);
    }

    #[test]
    fn residuals_are_small_for_vacuum() {
        let g = crate::reference_grid();
        let vac = SingleModeState::vacuum(g).unwrap();
        let r = identity_residuals(&vac, 0.6, 0.5).unwrap();
        assert!(r.r7 < 1e-5 && r.r11 < 1e-5 && r.r12 < 1e-5, "{r:?}");
    }

    #[test]
    fn residuals_for_single_photon_strong_measurement() {
        let g = crate::reference_grid();
        let f1 = SingleModeState::fock(g, 1).unwrap();
        let r = identity_residuals(&f1, 0.3, -1.0).unwrap();
        assert!(r.max() < 1e-4, "{r:?}");
    }

    #[test]
    fn conditioning_point_outside_box() {
        let g = crate::reference_grid();
        let vac = SingleModeState::vacuum(g).unwrap();
        assert!(identity_residuals(&vac, 0.6, 50.0).is_err());
    }
}
