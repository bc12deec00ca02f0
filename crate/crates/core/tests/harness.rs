use sfp_core::config::Experiment;
use sfp_core::harness::{asymptotic_fidelity, run_ensemble, run_single};
use sfp_core::presets;
use sfp_core::SpectrumEstimator;

/// Least-squares slope and its standard error.
fn slope_with_error(ys: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = (0..ys.len()).map(|i| (i as f64 - xm).powi(2)).sum();
    let sxy: f64 = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (i as f64 - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let resid: f64 = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (y - ym - slope * (i as f64 - xm)).powi(2))
        .sum();
    (slope, (resid / (n - 2.0) / sxx).sqrt())
}

#[test]
fn fig2_mean_trace_rises_before_convergence() {
    let exp = Experiment::new(presets::fig2()).unwrap();
    let ens = run_ensemble(&exp).unwrap();
    let mean = &ens.mean_fidelity;
    let converged = mean.iter().position(|f| *f > 0.99).unwrap();
    assert!(converged > 200);
    for start in (0..converged - 200).step_by(50) {
        let (slope, err) = slope_with_error(&mean[start..start + 200]);
        assert!(
            slope > 3.0 * err,
            "window at {start}: slope {slope:.3e} ± {err:.3e}"
        );
    }
}

#[test]
fn identical_seeds_give_identical_records() {
    let cfg = presets::fig3()
        .with_overrides(&["cycles=500".into()])
        .unwrap();
    let a = run_ensemble(&Experiment::new(cfg.clone()).unwrap()).unwrap();
    let b = run_ensemble(&Experiment::new(cfg.clone()).unwrap()).unwrap();
    assert_eq!(a.records, b.records);
    let other = cfg.with_overrides(&["master_seed=2".into()]).unwrap();
    let c = run_single(&Experiment::new(other).unwrap(), 0).unwrap();
    assert_ne!(c.fidelity, a.records[0].fidelity);
}

#[test]
fn free_rabi_spectrum_peaks_at_drive_frequency() {
    let cfg = presets::fig4()
        .with_overrides(&[
            "measure=false".into(),
            "feedback=false".into(),
            "runs=1".into(),
            "cycles=5000".into(),
        ])
        .unwrap();
    let exp = Experiment::new(cfg).unwrap();
    let ens = run_ensemble(&exp).unwrap();
    let s = ens
        .spectrum(exp.config.tau, SpectrumEstimator::SingleRun)
        .unwrap();
    assert!((s.peak - 1.0).abs() <= s.resolution, "peak {}", s.peak);
}

#[test]
fn fig3_noise_free_asymptote_is_one() {
    let cfg = presets::fig3()
        .with_overrides(&["noise.relative_rms=0.0".into(), "runs=2".into()])
        .unwrap();
    let exp = Experiment::new(cfg).unwrap();
    let ens = run_ensemble(&exp).unwrap();
    let stats = asymptotic_fidelity(&ens.records, exp.config.burn_in).unwrap();
    assert!(stats.mean > 0.999, "{stats:?}");
    assert_eq!(stats.samples, 2 * 4000);
}

#[test]
fn moving_target_feedback_tracks_rabi_target() {
    // with no detuning the actual state locks onto the target
    let cfg = presets::fig4()
        .with_overrides(&[
            "runs=2".into(),
            "cycles=3000".into(),
            "target.omega=1.0".into(),
        ])
        .unwrap();
    let exp = Experiment::new(cfg).unwrap();
    let ens = run_ensemble(&exp).unwrap();
    let tail = &ens.mean_fidelity[2000..];
    assert!(tail.iter().sum::<f64>() / tail.len() as f64 > 0.98);
}
