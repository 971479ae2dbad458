//! Monte Carlo trajectories of the measurement and the statistics built
//! from them, including the gain and SNR of the feedback amplifier.
//!
//! Trajectory `i` of a run with seed `s` draws from its own ChaCha8 stream
//! (`seed = s`, `stream = i`), so results do not depend on scheduling.
//! Passing `n_trajectories = 0` selects the exact mode: outcome averages are
//! then taken by quadrature over the tabulated outcome density instead of
//! by sampling, using the one-shot measurement operator for each outcome.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{fock_table, fock_weights, MAX_PHOTONS};
use crate::gaussian::GaussianMoments;
use crate::grid::{trapezoid_nonuniform, QuadratureGrid};
use crate::protocol::{outcome_grid, pm_distribution, resolution_from_q, run_conditioned, DistributionRoute};
use crate::state::{Moments, RawMoments, SingleModeState};
use crate::two_mode::beam_splitter;

/// Default number of outcome nodes for tabulated distributions.
pub const DEFAULT_OUTCOME_NODES: usize = 2048;
/// Largest accepted `|1 - Σ p_n|` of a photon-number distribution.
pub const PHOTON_RESIDUAL_TOL: f64 = 1e-3;

/// Input state specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputState {
    Vacuum,
    Coherent { x0: f64, p0: f64 },
    Fock { n: usize },
    /// Number-state amplitudes `[re, im]` for `n = 0, 1, ...`; normalized
    /// on preparation.
    Superposition { coefficients: Vec<[f64; 2]> },
}

impl InputState {
    pub fn prepare(&self, grid: QuadratureGrid) -> Result<SingleModeState> {
        match self {
            Self::Vacuum => SingleModeState::vacuum(grid),
            Self::Coherent { x0, p0 } => SingleModeState::coherent(grid, *x0, *p0),
            Self::Fock { n } => {
                if *n > MAX_PHOTONS {
                    return Err(Error::InvalidParameter(format!("photon number {n} exceeds {MAX_PHOTONS}")));
                }
                SingleModeState::fock(grid, *n)
            }
            Self::Superposition { coefficients } => {
                let c: Vec<C64> = coefficients.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                SingleModeState::superposition(grid, &c)
            }
        }
    }

    /// Short label for tables.
    pub fn label(&self) -> String {
        match self {
            Self::Vacuum => "vacuum".into(),
            Self::Coherent { x0, p0 } => format!("coherent({x0},{p0})"),
            Self::Fock { n } => format!("fock({n})"),
            Self::Superposition { coefficients } => format!("superposition[{}]", coefficients.len()),
        }
    }

    /// Analytic moments for Gaussian inputs.
    pub fn gaussian(&self) -> Option<GaussianMoments> {
        match self {
            Self::Vacuum => Some(GaussianMoments::vacuum()),
            Self::Coherent { x0, p0 } => Some(GaussianMoments::coherent(*x0, *p0)),
            _ => None,
        }
    }

    /// Random superposition of `|0> .. |n_max>` with Gaussian complex
    /// amplitudes.
    pub fn random_superposition<R: Rng>(rng: &mut R, n_max: usize) -> Self {
        let coefficients = (0..=n_max)
            .map(|_| {
                let (a, b) = gaussian_pair(rng);
                [a, b]
            })
            .collect();
        Self::Superposition { coefficients }
    }
}

/// Box-Muller pair of standard normals.
fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    let rad = (-2.0 * u.ln()).sqrt();
    let ang = 2.0 * std::f64::consts::PI * v;
    (rad * ang.cos(), rad * ang.sin())
}

/// Random stream for trajectory `index` of a run seeded with `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF sampler over a tabulated outcome density; the CDF is the
/// cumulative trapezoid integral, linearly interpolated between nodes.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    x_m: Vec<f64>,
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn from_table(x_m: &[f64], density: &[f64]) -> Result<Self> {
        if x_m.len() < 2 || x_m.len() != density.len() {
            return Err(Error::Numerical("outcome table needs at least two matching nodes".into()));
        }
        let mut cdf = Vec::with_capacity(x_m.len());
        cdf.push(0.0);
        for k in 1..x_m.len() {
            let step = 0.5 * (x_m[k] - x_m[k - 1]) * (density[k] + density[k - 1]);
            if !(step >= 0.0 && step.is_finite()) {
                return Err(Error::Numerical(format!("outcome CDF is not monotone at x_m = {}", x_m[k])));
            }
            cdf.push(cdf[k - 1] + step);
        }
        let total = cdf[cdf.len() - 1];
        if !(total > 0.0) {
            return Err(Error::Numerical("outcome density vanishes".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { x_m: x_m.to_vec(), cdf })
    }

    /// Tabulates `P(x_m)` for `psi_in` on `n_nodes` outcome nodes.
    pub fn for_state(psi_in: &SingleModeState, q: f64, n_nodes: usize) -> Result<Self> {
        let xm = outcome_grid(psi_in.grid(), q, n_nodes)?;
        let dist = pm_distribution(psi_in, q, &xm, DistributionRoute::Kraus)?;
        Self::from_table(&dist.x_m, dist.primary())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let (c0, c1) = (self.cdf[k], self.cdf[k + 1]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.x_m[k] + frac * (self.x_m[k + 1] - self.x_m[k])
    }

    /// Model CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.x_m.len();
        if x <= self.x_m[0] {
            return 0.0;
        }
        if x >= self.x_m[n - 1] {
            return 1.0;
        }
        let k = self.x_m.partition_point(|&v| v <= x) - 1;
        let t = (x - self.x_m[k]) / (self.x_m[k + 1] - self.x_m[k]);
        self.cdf[k] + t * (self.cdf[k + 1] - self.cdf[k])
    }

    /// Smallest `x` with `cdf(x) >= u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1) - 1;
        let (c0, c1) = (self.cdf[k], self.cdf[k + 1]);
        let frac = if c1 > c0 { ((u - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        self.x_m[k] + frac * (self.x_m[k + 1] - self.x_m[k])
    }
}

/// Draws one homodyne outcome for `psi_in` measured with transmission `q`.
pub fn sample_xm<R: Rng>(psi_in: &SingleModeState, q: f64, rng: &mut R) -> Result<f64> {
    Ok(OutcomeSampler::for_state(psi_in, q, DEFAULT_OUTCOME_NODES)?.sample(rng))
}

/// Photon-number probabilities of a normalized state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub probabilities: Vec<f64>,
    /// `1 - Σ p_n`.
    pub residual: f64,
}

impl PhotonDistribution {
    fn checked(probabilities: Vec<f64>, total: f64) -> Result<Self> {
        let residual = total - probabilities.iter().sum::<f64>();
        if !(residual.abs() <= PHOTON_RESIDUAL_TOL) {
            return Err(Error::Truncation { residual });
        }
        Ok(Self { probabilities, residual })
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// `p_n = |<n|ψ>|²` for `n = 0..=n_max`.
pub fn photon_number_distribution(state: &SingleModeState, n_max: usize) -> Result<PhotonDistribution> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: state.norm_sq() });
    }
    check_photon_cutoff(n_max)?;
    let table = fock_table(&state.grid().points(), n_max);
    PhotonDistribution::checked(fock_weights(&table, state.grid(), state.amplitudes()), 1.0)
}

/// Photon-number distribution of the transmitted signal after a bare beam
/// splitter with a vacuum meter, meter traced out.
pub fn transmitted_photon_distribution(psi_in: &SingleModeState, q: f64, n_max: usize) -> Result<PhotonDistribution> {
    check_photon_cutoff(n_max)?;
    let vacuum = SingleModeState::vacuum(*psi_in.grid())?;
    let two = beam_splitter(psi_in, &vacuum, q)?;
    PhotonDistribution::checked(two.signal_fock_weights(n_max), psi_in.norm_sq())
}

fn check_photon_cutoff(n_max: usize) -> Result<()> {
    if n_max > MAX_PHOTONS {
        return Err(Error::InvalidParameter(format!("photon cutoff {n_max} exceeds {MAX_PHOTONS}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub grid: QuadratureGrid,
    pub input: InputState,
    pub q: f64,
    /// `0` selects exact quadrature over outcomes.
    pub n_trajectories: usize,
    pub seed: u64,
    pub outcome_nodes: usize,
    pub photon_cutoff: usize,
}

impl EnsembleConfig {
    /// Config on the verification grid; post-feedback states are amplified by
    /// `1/q` and need the wider box.
    pub fn new(input: InputState, q: f64, n_trajectories: usize, seed: u64) -> Self {
        Self {
            grid: crate::verification_grid(),
            input,
            q,
            n_trajectories,
            seed,
            outcome_nodes: DEFAULT_OUTCOME_NODES,
            photon_cutoff: MAX_PHOTONS,
        }
    }

    pub fn is_exact(&self) -> bool { self.n_trajectories == 0 }
}

/// A statistic with its standard error. Exact-mode values carry a zero
/// error; the error is `None` where it is undefined (one sample).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_err: Some(0.0) }
    }

    /// Sample mean and its standard error.
    pub fn mean_of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std_err = (xs.len() > 1).then(|| (sample_variance(xs, mean) / n).sqrt());
        Self { value: mean, std_err }
    }

    /// Unbiased sample variance; normal-theory standard error.
    pub fn variance_of(xs: &[f64]) -> Self {
        if xs.len() < 2 {
            return Self { value: 0.0, std_err: None };
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = sample_variance(xs, mean);
        Self { value: var, std_err: Some(var * (2.0 / (xs.len() - 1) as f64).sqrt()) }
    }

    fn scaled(&self, c: f64) -> Self {
        Self { value: c * self.value, std_err: self.std_err.map(|e| e * c.abs()) }
    }
}

fn sample_variance(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Per-trajectory record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub x_m: f64,
    /// Moments of the normalized output state.
    pub out: Moments,
    /// Moments of the normalized post-feedback (pre-squeeze) state.
    pub feedback: Moments,
    pub photons: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mode: String,
    pub n_trajectories: usize,
    pub seed: u64,
    pub q: f64,
    pub delta_x: f64,
    pub input_label: String,
    pub input_moments: Moments,

    pub xm_mean: Estimate,
    pub xm_var: Estimate,

    /// Outcome-averaged moments of the selective output states.
    pub selective_mean_x: Estimate,
    pub selective_var_x: Estimate,
    pub selective_mean_p: Estimate,
    pub selective_var_p: Estimate,
    /// Outcome-averaged `<x>` of the post-feedback states.
    pub feedback_mean_x: Estimate,

    /// Moments of the outcome-averaged (non-selective) output state.
    pub nonselective_mean_x: Estimate,
    pub nonselective_var_x: Estimate,
    pub nonselective_mean_p: Estimate,
    pub nonselective_var_p: Estimate,
    /// `Var(p)` increase over the input, and the expected `1/(16 δx²)`.
    pub backaction_var_p: Estimate,
    pub backaction_expected: f64,
    /// Largest pointwise deviation of the non-selective output `x`-density
    /// from the input density.
    pub marginal_max_dev: f64,

    /// Non-selective output photon-number distribution.
    pub photon_distribution: Vec<Estimate>,
    pub input_mean_photons: f64,
    /// Bare beam splitter, meter traced out.
    pub transmitted_photon_distribution: Vec<f64>,
    pub transmitted_mean_photons: f64,

    /// `<x>_fb / <x>_in`; absent for inputs with `<x>_in = 0`.
    pub gain: Option<Estimate>,
    pub snr_in: Option<f64>,
    pub snr_out: Option<Estimate>,
}

#[derive(Clone, Debug)]
pub struct EnsembleReport {
    pub stats: EnsembleStats,
    /// Empty in exact mode.
    pub trajectories: Vec<TrajectoryRecord>,
    /// Non-selective output `x`-density on the state grid.
    pub nonselective_density: Vec<f64>,
}

/// Runs the ensemble described by `cfg`.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    let delta_x = resolution_from_q(cfg.q)?;
    check_photon_cutoff(cfg.photon_cutoff)?;
    let psi_in = cfg.input.prepare(cfg.grid)?;
    let input_moments = psi_in.moments()?;
    let table = fock_table(&cfg.grid.points(), cfg.photon_cutoff);
    let input_photons = PhotonDistribution::checked(fock_weights(&table, &cfg.grid, psi_in.amplitudes()), 1.0)?;
    let transmitted = transmitted_photon_distribution(&psi_in, cfg.q, cfg.photon_cutoff)?;

    let base = BaseStats {
        cfg,
        delta_x,
        input_moments,
        input_photons: &input_photons,
        transmitted: &transmitted,
    };
    if cfg.is_exact() {
        exact_ensemble(&psi_in, &table, base)
    } else {
        sampled_ensemble(&psi_in, &table, base)
    }
}

struct BaseStats<'a> {
    cfg: &'a EnsembleConfig,
    delta_x: f64,
    input_moments: Moments,
    input_photons: &'a PhotonDistribution,
    transmitted: &'a PhotonDistribution,
}

/// Selective and non-selective quantities shared by both modes.
struct Aggregate {
    xm_mean: Estimate,
    xm_var: Estimate,
    sel: [Estimate; 4],
    fb_mean_x: Estimate,
    fb_total_var: Estimate,
    ns: [Estimate; 4],
    marginal_max_dev: f64,
    photons: Vec<Estimate>,
}

fn finish(base: BaseStats<'_>, mode: &str, agg: Aggregate) -> EnsembleStats {
    let cfg = base.cfg;
    let x0 = base.input_moments.mean_x;
    let has_signal = x0.abs() > 1e-12;
    let gain = has_signal.then(|| agg.fb_mean_x.scaled(1.0 / x0));
    let snr_in = has_signal.then(|| x0 * x0 / base.input_moments.var_x);
    let snr_out = has_signal.then(|| {
        let m = agg.fb_mean_x.value;
        let v = agg.fb_total_var.value;
        let value = m * m / v;
        // first-order propagation of both standard errors
        let std_err = match (agg.fb_mean_x.std_err, agg.fb_total_var.std_err) {
            (Some(em), Some(ev)) => Some(value * ((2.0 * em / m).powi(2) + (ev / v).powi(2)).sqrt()),
            _ => None,
        };
        Estimate { value, std_err }
    });
    let expected = 1.0 / (16.0 * base.delta_x * base.delta_x);
    let backaction = Estimate {
        value: agg.ns[3].value - base.input_moments.var_p,
        std_err: agg.ns[3].std_err,
    };
    EnsembleStats {
        mode: mode.into(),
        n_trajectories: cfg.n_trajectories,
        seed: cfg.seed,
        q: cfg.q,
        delta_x: base.delta_x,
        input_label: cfg.input.label(),
        input_moments: base.input_moments,
        xm_mean: agg.xm_mean,
        xm_var: agg.xm_var,
        selective_mean_x: agg.sel[0],
        selective_var_x: agg.sel[1],
        selective_mean_p: agg.sel[2],
        selective_var_p: agg.sel[3],
        feedback_mean_x: agg.fb_mean_x,
        nonselective_mean_x: agg.ns[0],
        nonselective_var_x: agg.ns[1],
        nonselective_mean_p: agg.ns[2],
        nonselective_var_p: agg.ns[3],
        backaction_var_p: backaction,
        backaction_expected: expected,
        marginal_max_dev: agg.marginal_max_dev,
        photon_distribution: agg.photons,
        input_mean_photons: base.input_photons.mean(),
        transmitted_photon_distribution: base.transmitted.probabilities.clone(),
        transmitted_mean_photons: base.transmitted.mean(),
        gain,
        snr_in,
        snr_out,
    }
}

fn sampled_ensemble(psi_in: &SingleModeState, table: &[Vec<f64>], base: BaseStats<'_>) -> Result<EnsembleReport> {
    let cfg = base.cfg;
    let grid = cfg.grid;
    let sampler = OutcomeSampler::for_state(psi_in, cfg.q, cfg.outcome_nodes)?;
    let vacuum = SingleModeState::vacuum(grid)?;

    let runs: Vec<(TrajectoryRecord, Vec<f64>)> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|index| {
            let mut rng = trajectory_rng(cfg.seed, index as u64);
            let x_m = sampler.sample(&mut rng);
            let run = run_conditioned(psi_in, &vacuum, cfg.q, x_m)?;
            let out = run.psi_out.normalized()?;
            let feedback = run.psi_fb.normalized()?.moments()?;
            let photons = fock_weights(table, &grid, out.amplitudes());
            let record = TrajectoryRecord { index, x_m, out: out.moments()?, feedback, photons };
            Ok((record, out.density()))
        })
        .collect::<Result<_>>()?;

    let n = runs.len();
    let column = |f: &dyn Fn(&TrajectoryRecord) -> f64| runs.iter().map(|(t, _)| f(t)).collect::<Vec<_>>();
    let xm = column(&|t| t.x_m);
    let mx = column(&|t| t.out.mean_x);
    let vx = column(&|t| t.out.var_x);
    let mp = column(&|t| t.out.mean_p);
    let vp = column(&|t| t.out.var_p);
    let fb = column(&|t| t.feedback.mean_x);
    let fb2 = column(&|t| t.feedback.var_x + t.feedback.mean_x * t.feedback.mean_x);
    let x2 = column(&|t| t.out.var_x + t.out.mean_x * t.out.mean_x);
    let p2 = column(&|t| t.out.var_p + t.out.mean_p * t.out.mean_p);

    let mix_var = |second: &[f64], first: &Estimate| {
        let m2 = Estimate::mean_of(second);
        Estimate { value: m2.value - first.value * first.value, std_err: m2.std_err }
    };
    let ns_mx = Estimate::mean_of(&mx);
    let ns_mp = Estimate::mean_of(&mp);
    let fb_mean = Estimate::mean_of(&fb);

    let mut density = vec![0.0; grid.n_points()];
    for (_, d) in &runs {
        density.iter_mut().zip(d).for_each(|(acc, v)| *acc += v / n as f64);
    }
    let marginal_max_dev = max_dev(&density, &psi_in.density());
    let photons = (0..=cfg.photon_cutoff)
        .map(|k| Estimate::mean_of(&runs.iter().map(|(t, _)| t.photons[k]).collect::<Vec<_>>()))
        .collect();

    let agg = Aggregate {
        xm_mean: Estimate::mean_of(&xm),
        xm_var: Estimate::variance_of(&xm),
        sel: [Estimate::mean_of(&mx), Estimate::mean_of(&vx), Estimate::mean_of(&mp), Estimate::mean_of(&vp)],
        fb_mean_x: fb_mean,
        fb_total_var: mix_var(&fb2, &fb_mean),
        ns: [ns_mx, mix_var(&x2, &ns_mx), ns_mp, mix_var(&p2, &ns_mp)],
        marginal_max_dev,
        photons,
    };
    let stats = finish(base, "sampled", agg);
    Ok(EnsembleReport {
        stats,
        trajectories: runs.into_iter().map(|(t, _)| t).collect(),
        nonselective_density: density,
    })
}

/// Per-outcome quantities of the exact mode.
struct Node {
    weight: f64,
    raw: RawMoments,
    density: Vec<f64>,
    photons: Vec<f64>,
}

fn exact_ensemble(psi_in: &SingleModeState, table: &[Vec<f64>], base: BaseStats<'_>) -> Result<EnsembleReport> {
    let cfg = base.cfg;
    let grid = cfg.grid;
    let q = cfg.q;
    let xm = outcome_grid(&grid, q, cfg.outcome_nodes)?;
    let nodes: Vec<Node> = xm
        .par_iter()
        .map(|&x_m| {
            let out = psi_in.apply_qnd_kraus(x_m, base.delta_x)?;
            Ok(Node {
                weight: out.norm_sq(),
                raw: out.raw_moments(),
                density: out.density(),
                photons: fock_weights(table, &grid, out.amplitudes()),
            })
        })
        .collect::<Result<_>>()?;

    let integrate = |f: &dyn Fn(&Node) -> f64| trapezoid_nonuniform(&xm, &nodes.iter().map(f).collect::<Vec<_>>());
    let total = integrate(&|n| n.weight);
    if !((total - 1.0).abs() <= crate::protocol::COMPLETENESS_TOL) {
        return Err(Error::Incomplete { total });
    }

    // selective moments, weighted by P(x_m); negligible outcomes skipped
    let peak = nodes.iter().map(|n| n.weight).fold(0.0, f64::max);
    let selective = |f: &dyn Fn(&Moments) -> f64| {
        integrate(&|n| if n.weight > 1e-15 * peak { n.weight * f(&n.raw.central()) } else { 0.0 })
    };

    let mix = nodes.iter().zip(&xm).enumerate().fold(RawMoments::default(), |acc, (k, (n, _))| {
        let w = node_weight(&xm, k);
        acc.add(&n.raw.scaled(w))
    });
    let ns = mix.central();
    let fb = mix.squeezed(1.0 / q).central();

    let mut density = vec![0.0; grid.n_points()];
    for (k, n) in nodes.iter().enumerate() {
        let w = node_weight(&xm, k);
        density.iter_mut().zip(&n.density).for_each(|(acc, v)| *acc += w * v);
    }
    let marginal_max_dev = max_dev(&density, &psi_in.density());
    let photons = (0..=cfg.photon_cutoff).map(|k| Estimate::exact(integrate(&|n| n.photons[k]))).collect();

    let xm_mean = trapezoid_nonuniform(&xm, &nodes.iter().zip(&xm).map(|(n, x)| n.weight * x).collect::<Vec<_>>());
    let xm_second = trapezoid_nonuniform(&xm, &nodes.iter().zip(&xm).map(|(n, x)| n.weight * x * x).collect::<Vec<_>>());

    let agg = Aggregate {
        xm_mean: Estimate::exact(xm_mean),
        xm_var: Estimate::exact(xm_second - xm_mean * xm_mean),
        sel: [
            Estimate::exact(selective(&|m| m.mean_x)),
            Estimate::exact(selective(&|m| m.var_x)),
            Estimate::exact(selective(&|m| m.mean_p)),
            Estimate::exact(selective(&|m| m.var_p)),
        ],
        fb_mean_x: Estimate::exact(fb.mean_x),
        fb_total_var: Estimate::exact(fb.var_x),
        ns: [
            Estimate::exact(ns.mean_x),
            Estimate::exact(ns.var_x),
            Estimate::exact(ns.mean_p),
            Estimate::exact(ns.var_p),
        ],
        marginal_max_dev,
        photons,
    };
    Ok(EnsembleReport { stats: finish(base, "exact", agg), trajectories: Vec::new(), nonselective_density: density })
}

/// Trapezoid weight of node `k` on abscissae `xs`.
fn node_weight(xs: &[f64], k: usize) -> f64 {
    let left = if k > 0 { xs[k] - xs[k - 1] } else { 0.0 };
    let right = if k + 1 < xs.len() { xs[k + 1] - xs[k] } else { 0.0 };
    0.5 * (left + right)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Signal-to-noise figures of the feedback amplifier on the `x` quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    /// `<x>² / Var(x)` of the input.
    pub snr_in: f64,
    /// Same ratio for the outcome-averaged post-feedback state.
    pub snr_out: Estimate,
    /// Outcome-averaged post-feedback `<x>` over the input `<x>`.
    pub gain: Estimate,
}

pub fn snr_report(cfg: &EnsembleConfig) -> Result<SnrReport> {
    match cfg.input {
        InputState::Coherent { x0, .. } if x0 != 0.0 => {}
        _ => {
            return Err(Error::InvalidParameter(
                "SNR needs a coherent input with nonzero x0".into(),
            ))
        }
    }
    let stats = run_ensemble(cfg)?.stats;
    match (stats.snr_in, stats.snr_out, stats.gain) {
        (Some(snr_in), Some(snr_out), Some(gain)) => Ok(SnrReport { snr_in, snr_out, gain }),
        _ => Err(Error::Numerical("input mean vanished on the grid".into())),
    }
}
