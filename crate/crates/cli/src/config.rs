//! JSON run configuration. Unknown keys are rejected and every physical
//! parameter is re-validated after command-line overrides are applied.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cvqnd::ensemble::{InputState, DEFAULT_OUTCOME_NODES};
use cvqnd::fock::MAX_PHOTONS;
use cvqnd::verify::{DEFAULT_VERIFY_SEED, RANDOM_SUPERPOSITIONS, VERIFY_QS, VERIFY_XMS};
use cvqnd::QuadratureGrid;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn symmetric(half_width: f64, n_points: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, n_points }
    }

    pub fn build(&self) -> anyhow::Result<QuadratureGrid> {
        QuadratureGrid::new(self.x_min, self.x_max, self.n_points).context("invalid grid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerSpec {
    pub half_width: f64,
    /// Points per axis; odd so that the origin is sampled.
    pub points: usize,
}

impl Default for WignerSpec {
    fn default() -> Self {
        Self { half_width: 4.0, points: 81 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    /// Replaces the default input list when present.
    pub inputs: Option<Vec<InputState>>,
    pub random_superpositions: usize,
    pub random_seed: u64,
    pub q_values: Vec<f64>,
    pub x_m_values: Vec<f64>,
    pub threshold: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            inputs: None,
            random_superpositions: RANDOM_SUPERPOSITIONS,
            random_seed: DEFAULT_VERIFY_SEED,
            q_values: VERIFY_QS.to_vec(),
            x_m_values: VERIFY_XMS.to_vec(),
            threshold: cvqnd::IDENTITY_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Defaults to `[-8, 8]` for `run` and `[-12, 12]` for `verify` and
    /// `ensemble`, both with 1024 points.
    pub grid: Option<GridSpec>,
    pub input: InputState,
    pub q: f64,
    pub x_m: f64,
    /// Mandatory for `ensemble`.
    pub seed: Option<u64>,
    /// `0` selects exact quadrature over outcomes.
    pub n_trajectories: usize,
    pub outcome_nodes: usize,
    pub photon_cutoff: usize,
    pub out_dir: PathBuf,
    pub distribution: bool,
    pub wigner: bool,
    pub wigner_grid: WignerSpec,
    pub verify: VerifySpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: None,
            input: InputState::Vacuum,
            q: FRAC_1_SQRT_2,
            x_m: 0.0,
            seed: None,
            n_trajectories: 10_000,
            outcome_nodes: DEFAULT_OUTCOME_NODES,
            photon_cutoff: MAX_PHOTONS,
            out_dir: PathBuf::from("out"),
            distribution: false,
            wigner: false,
            wigner_grid: WignerSpec::default(),
            verify: VerifySpec::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn grid_or(&self, default: GridSpec) -> GridSpec {
        self.grid.unwrap_or(default)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        check_q(self.q)?;
        if !self.x_m.is_finite() {
            bail!("x_m must be finite");
        }
        if let Some(g) = &self.grid {
            g.build()?;
        }
        if self.outcome_nodes < 16 {
            bail!("outcome_nodes must be at least 16");
        }
        if self.photon_cutoff > MAX_PHOTONS {
            bail!("photon_cutoff must not exceed {MAX_PHOTONS}");
        }
        let w = &self.wigner_grid;
        if !(w.half_width > 0.0 && w.half_width.is_finite()) || w.points < 3 || w.points % 2 == 0 {
            bail!("wigner_grid needs a positive half_width and an odd point count >= 3");
        }
        let v = &self.verify;
        if v.q_values.is_empty() || v.x_m_values.is_empty() {
            bail!("verify matrix is empty");
        }
        for &q in &v.q_values {
            check_q(q)?;
        }
        if v.x_m_values.iter().any(|x| !x.is_finite()) {
            bail!("verify x_m values must be finite");
        }
        if !(v.threshold > 0.0) {
            bail!("verify threshold must be positive");
        }
        Ok(())
    }
}

fn check_q(q: f64) -> anyhow::Result<()> {
    if !(q > 0.0 && q < 1.0) {
        bail!("q must satisfy 0 < q < 1, got {q}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"q": 0.5, "qq": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"verify": {"threshold": 1e-4, "extra": 0}}"#).is_err());
    }

    #[test]
    fn inputs_parse() {
        let c: RunConfig = serde_json::from_str(
            r#"{"input": {"kind": "superposition", "coefficients": [[1, 0], [0, 1]]}, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(c.input, InputState::Superposition { coefficients: vec![[1.0, 0.0], [0.0, 1.0]] });
        assert_eq!(c.seed, Some(3));
        c.validate().unwrap();
    }

    #[test]
    fn validation() {
        let mut c = RunConfig { q: 1.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
        c.q = 0.5;
        c.grid = Some(GridSpec { x_min: -4.0, x_max: 8.0, n_points: 256 });
        assert!(c.validate().is_err());
        c.grid = Some(GridSpec::symmetric(8.0, 1024));
        c.wigner_grid.points = 80;
        assert!(c.validate().is_err());
    }
}
