//! The identity-verification matrix: inputs × transmissions × outcomes,
//! with the operator-identity residuals of each case.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::InputState;
use crate::grid::QuadratureGrid;
use crate::protocol::{identity_residuals_lenient, Residuals};

pub const VERIFY_QS: [f64; 4] = [0.3, 0.5, FRAC_1_SQRT_2, 0.9];
pub const VERIFY_XMS: [f64; 3] = [-2.0, 0.0, 0.7];
pub const RANDOM_SUPERPOSITIONS: usize = 20;
pub const RANDOM_MAX_PHOTONS: usize = 3;
pub const DEFAULT_VERIFY_SEED: u64 = 2024;

/// Vacuum, coherent(0.5, 0), fock(1), then `n_random` seeded random
/// superpositions of `|0> .. |3>`.
pub fn default_inputs(seed: u64, n_random: usize) -> Vec<InputState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = vec![InputState::Vacuum, InputState::Coherent { x0: 0.5, p0: 0.0 }, InputState::Fock { n: 1 }];
    inputs.extend((0..n_random).map(|_| InputState::random_superposition(&mut rng, RANDOM_MAX_PHOTONS)));
    inputs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyCase {
    pub input: InputState,
    /// Row label; random superpositions are numbered.
    pub label: String,
    pub q: f64,
    pub x_m: f64,
}

pub fn cases(inputs: &[InputState], qs: &[f64], xms: &[f64]) -> Vec<VerifyCase> {
    let mut out = Vec::with_capacity(inputs.len() * qs.len() * xms.len());
    let mut n_super = 0;
    for input in inputs {
        let label = match input {
            InputState::Superposition { .. } => {
                n_super += 1;
                format!("superposition{n_super}")
            }
            other => other.label(),
        };
        for &q in qs {
            for &x_m in xms {
                out.push(VerifyCase { input: input.clone(), label: label.clone(), q, x_m });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub case: VerifyCase,
    pub n_points: usize,
    /// Residuals, or the error that stopped the case.
    pub outcome: Result<Residuals, String>,
    /// Boundary and norm-drift checks that failed along the way; any entry
    /// fails the case even if the residuals are small.
    pub violations: Vec<String>,
}

impl VerifyRow {
    /// Largest residual; `NaN` for failed cases.
    pub fn max_residual(&self) -> f64 {
        self.outcome.as_ref().map_or(f64::NAN, Residuals::max)
    }

    pub fn passes(&self, threshold: f64) -> bool {
        self.violations.is_empty() && self.max_residual() <= threshold
    }
}

/// Residuals of every case on `grid`, in case order. Cases whose numerical
/// checks fail still report residuals where they can be computed.
pub fn run_matrix(grid: QuadratureGrid, cases: &[VerifyCase]) -> Vec<VerifyRow> {
    cases
        .par_iter()
        .map(|case| {
            let run = case.input.prepare(grid).and_then(|psi| identity_residuals_lenient(&psi, case.q, case.x_m));
            let (outcome, violations) = match run {
                Ok((res, log)) => (Ok(res), log.iter().map(ToString::to_string).collect()),
                Err(e) => (Err(e.to_string()), Vec::new()),
            };
            VerifyRow { case: case.clone(), n_points: grid.n_points(), outcome, violations }
        })
        .collect()
}
