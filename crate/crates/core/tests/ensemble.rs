use std::f64::consts::FRAC_1_SQRT_2;

use cvqnd::ensemble::{
    photon_number_distribution, run_ensemble, snr_report, transmitted_photon_distribution, EnsembleConfig,
    InputState, OutcomeSampler, trajectory_rng,
};
use cvqnd::{reference_grid, SingleModeState};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn coherent(x0: f64) -> InputState {
    InputState::Coherent { x0, p0: 0.0 }
}

#[test]
fn gain_at_half_transmission() {
    let cfg = EnsembleConfig::new(coherent(0.5), 0.5, 10_000, 42);
    let s = run_ensemble(&cfg).unwrap().stats;
    let gain = s.gain.unwrap().value;
    assert!((gain - 2.0).abs() <= 0.02 * 2.0, "gain {gain}");
    assert!((s.feedback_mean_x.value - 1.0).abs() <= 0.02);
}

#[test]
fn gain_at_weak_coupling() {
    let cfg = EnsembleConfig::new(coherent(0.5), 0.9, 10_000, 42);
    let gain = snr_report(&cfg).unwrap().gain.value;
    assert!((gain - 1.0 / 0.9).abs() <= 0.02 / 0.9, "gain {gain}");
}

#[test]
fn snr_preserved_in_weak_limit() {
    let cfg = EnsembleConfig::new(coherent(0.5), 0.99, 0, 0);
    let r = snr_report(&cfg).unwrap();
    let ratio = r.snr_out.value / r.snr_in;
    assert!((ratio - 1.0).abs() <= 0.02, "ratio {ratio}");
}

#[test]
fn exact_gain_matches_inverse_transmission() {
    for &q in &[0.5, 0.9] {
        let cfg = EnsembleConfig::new(coherent(0.5), q, 0, 0);
        let g = run_ensemble(&cfg).unwrap().stats.gain.unwrap().value;
        assert!((g - 1.0 / q).abs() < 1e-6, "q {q}: {g}");
    }
}

#[test]
fn seeded_runs_are_identical() {
    let cfg = EnsembleConfig::new(InputState::Fock { n: 1 }, 0.6, 64, 1234);
    let a = run_ensemble(&cfg).unwrap();
    let b = run_ensemble(&cfg).unwrap();
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.trajectories, b.trajectories);
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = EnsembleConfig::new(coherent(0.3), 0.7, 40, 99);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| run_ensemble(&cfg).unwrap());
    let b = wide.install(|| run_ensemble(&cfg).unwrap());
    assert_eq!(a.stats, b.stats);
}

#[test]
fn outcome_histogram_passes_chi_square() {
    let psi = SingleModeState::fock(reference_grid(), 1).unwrap();
    let sampler = OutcomeSampler::for_state(&psi, 0.6, 2048).unwrap();
    let bins = 50;
    let edges: Vec<f64> = (1..bins).map(|k| sampler.quantile(k as f64 / bins as f64)).collect();
    let n = 100_000;
    let mut counts = vec![0usize; bins];
    let mut rng = trajectory_rng(2024, 0);
    for _ in 0..n {
        let x = sampler.sample(&mut rng);
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    let probs: Vec<f64> = (0..bins)
        .map(|k| {
            let lo = if k == 0 { 0.0 } else { sampler.cdf(edges[k - 1]) };
            let hi = if k + 1 == bins { 1.0 } else { sampler.cdf(edges[k]) };
            hi - lo
        })
        .collect();
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "chi2 {stat} >= {critical}");
}

#[test]
fn nondemolition_marginal() {
    let inputs = [InputState::Vacuum, InputState::Fock { n: 1 }, coherent(0.5)];
    for input in &inputs {
        for &q in &[0.3, FRAC_1_SQRT_2, 0.9] {
            let cfg = EnsembleConfig::new(input.clone(), q, 0, 0);
            let dev = run_ensemble(&cfg).unwrap().stats.marginal_max_dev;
            assert!(dev <= 1e-6, "{} q={q}: {dev}", input.label());
        }
    }
}

#[test]
fn backaction_on_momentum() {
    for input in [InputState::Vacuum, coherent(0.5)] {
        for &q in &[0.5, FRAC_1_SQRT_2] {
            let s = run_ensemble(&EnsembleConfig::new(input.clone(), q, 0, 0)).unwrap().stats;
            let rel = (s.backaction_var_p.value - s.backaction_expected).abs() / s.backaction_expected;
            assert!(rel <= 0.01, "{} q={q}: {rel}", input.label());
        }
    }
}

#[test]
fn sampled_backaction_is_consistent() {
    let cfg = EnsembleConfig::new(InputState::Vacuum, FRAC_1_SQRT_2, 2000, 3);
    let s = run_ensemble(&cfg).unwrap().stats;
    let err = s.nonselective_var_p.std_err.unwrap();
    assert!((s.nonselective_var_p.value - 0.5).abs() < 5.0 * err + 1e-3);
    assert!((s.xm_var.value - 0.5).abs() < 5.0 * s.xm_var.std_err.unwrap());
}

#[test]
fn transmitted_photon_number() {
    let grid = reference_grid();
    for &q in &[0.3, 0.6, 0.9] {
        for input in [InputState::Fock { n: 1 }, coherent(0.5)] {
            let psi = input.prepare(grid).unwrap();
            let n_in = photon_number_distribution(&psi, 20).unwrap().mean();
            let n_out = transmitted_photon_distribution(&psi, q, 20).unwrap().mean();
            assert!((n_out - q * q * n_in).abs() <= 1e-3, "{} q={q}", input.label());
        }
    }
}
