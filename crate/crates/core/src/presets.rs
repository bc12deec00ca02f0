//! Ready-made configurations for the standard experiments.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use crate::config::{
    CycleOrder, DriveSpec, MeasurementSpec, NoiseSpec, SfpConfig, StateSpec, TargetSpec,
};
use crate::dynamics::{DEFAULT_AZIMUTH_AMPLITUDE, DEFAULT_POLAR_AMPLITUDE};
use crate::error::{Result, SfpError};
use crate::noise::NoiseKind;
use crate::spectrum::SpectrumEstimator;

pub const PRESET_NAMES: [&str; 5] = ["fig2", "fig3", "fig4", "fig5", "fig6"];

const P0: f64 = 0.45;

fn base(cycles: usize, runs: usize, tau: f64, target: TargetSpec, initial: StateSpec) -> SfpConfig {
    SfpConfig {
        dimension: 2,
        cycles,
        runs,
        tau,
        master_seed: 1,
        burn_in: 1.0 / 3.0,
        measure: true,
        feedback: true,
        order: CycleOrder::EvolveFirst,
        record_bloch: false,
        spectrum: None,
        measurement: MeasurementSpec::SigmaZ { p0: P0 },
        target,
        initial,
        drive: None,
        noise: None,
    }
}

/// Static target reached from the orthogonal state at γ = 0.01.
pub fn fig2() -> SfpConfig {
    base(
        3000,
        200,
        1.0,
        TargetSpec::Static {
            state: StateSpec::Rotated {
                axis: [1.0, 0.0, 0.0],
                angle: FRAC_PI_4,
                from: 0,
            },
        },
        StateSpec::OrthogonalToTarget {},
    )
}

/// Equator target under dephasing noise at half the reversal angle. Sweeps
/// vary `noise.kind` and `noise.relative_rms`.
pub fn fig3() -> SfpConfig {
    let mut cfg = base(
        6000,
        4,
        1.0,
        TargetSpec::Static {
            state: StateSpec::Vector {
                amplitudes: vec![[FRAC_1_SQRT_2, 0.0], [0.0, FRAC_1_SQRT_2]],
            },
        },
        StateSpec::Basis { index: 0 },
    );
    cfg.noise = Some(NoiseSpec {
        kind: NoiseKind::Dephasing,
        rms: None,
        relative_rms: Some(0.5),
    });
    cfg
}

/// Rabi drive at 1.00 steered toward a target oscillating at 1.01, γ = 0.1.
pub fn fig4() -> SfpConfig {
    let detuning: f64 = 0.01;
    let tau = 0.1;
    let cycles = (6.0 * 2.0 * PI / detuning / tau).ceil() as usize;
    let mut cfg = base(
        cycles,
        200,
        tau,
        TargetSpec::Rabi {
            initial: StateSpec::Basis { index: 1 },
            omega: 1.01,
            axis: [1.0, 0.0, 0.0],
        },
        StateSpec::Basis { index: 0 },
    );
    cfg.drive = Some(DriveSpec {
        omega: 1.0,
        axis: [1.0, 0.0, 0.0],
        dt: tau,
    });
    cfg.spectrum = Some(SpectrumEstimator::AveragedPower);
    cfg
}

/// Noisy Rabi drive, 40 measurements per oscillation. Setting
/// `measure = false` and `feedback = false` gives the unprotected reference.
pub fn fig5() -> SfpConfig {
    let tau = 2.0 * PI / 40.0;
    let mut cfg = base(
        8000,
        400,
        tau,
        TargetSpec::Rabi {
            initial: StateSpec::Basis { index: 0 },
            omega: 1.0,
            axis: [1.0, 0.0, 0.0],
        },
        StateSpec::Basis { index: 0 },
    );
    cfg.drive = Some(DriveSpec {
        omega: 1.0,
        axis: [1.0, 0.0, 0.0],
        dt: tau,
    });
    cfg.noise = Some(NoiseSpec {
        kind: NoiseKind::DriveAmplitude,
        rms: Some(0.5),
        relative_rms: None,
    });
    cfg.spectrum = Some(SpectrumEstimator::MeanTrace);
    cfg
}

/// Figure-eight target, 10⁴ measurements per period, three starting states.
pub fn fig6() -> SfpConfig {
    let period = 1.0;
    let cycles = 10_000;
    let mut cfg = base(
        cycles,
        3,
        period / cycles as f64,
        TargetSpec::FigureEight {
            period,
            azimuth_amplitude: DEFAULT_AZIMUTH_AMPLITUDE,
            polar_amplitude: DEFAULT_POLAR_AMPLITUDE,
        },
        StateSpec::List {
            states: vec![
                StateSpec::Basis { index: 0 },
                StateSpec::Basis { index: 1 },
                StateSpec::OrthogonalToTarget {},
            ],
        },
    );
    cfg.record_bloch = true;
    cfg
}

pub fn preset(name: &str) -> Result<SfpConfig> {
    match name {
        "fig2" => Ok(fig2()),
        "fig3" => Ok(fig3()),
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        other => Err(SfpError::UnknownPreset(other.to_string())),
    }
}

pub fn preset_with_overrides(name: &str, overrides: &[String]) -> Result<SfpConfig> {
    preset(name)?.with_overrides(overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(SfpConfig::from_toml_str(&text, &[]).unwrap(), cfg, "{name}");
            Experiment::new(cfg).unwrap();
        }
        assert!(matches!(preset("fig7"), Err(SfpError::UnknownPreset(_))));
    }

    #[test]
    fn fig2_gamma() {
        let exp = Experiment::new(fig2()).unwrap();
        assert_abs_diff_eq!(exp.gamma().unwrap(), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn fig4_resolves_detuning() {
        let cfg = fig4();
        let exp = Experiment::new(cfg.clone()).unwrap();
        assert_abs_diff_eq!(exp.gamma().unwrap(), 0.1, epsilon = 1e-14);
        let run_length = cfg.cycles as f64 * cfg.tau;
        assert!(run_length >= 6.0 * 2.0 * PI / 0.01);
    }

    #[test]
    fn fig5_measurements_per_rabi_cycle() {
        let cfg = fig5();
        let exp = Experiment::new(cfg.clone()).unwrap();
        let per_cycle = 2.0 * PI / cfg.drive.as_ref().unwrap().omega / cfg.tau;
        assert_abs_diff_eq!(per_cycle, 40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exp.gamma_per_drive_period().unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn fig6_measurements_per_period() {
        let cfg = fig6();
        let exp = Experiment::new(cfg.clone()).unwrap();
        let TargetSpec::FigureEight { period, .. } = cfg.target else {
            panic!("figure-eight target expected");
        };
        assert_eq!((period / cfg.tau).round() as usize, 10_000);
        assert_abs_diff_eq!(exp.gamma().unwrap() * period, 100.0, epsilon = 1e-9);
        assert_eq!(exp.initial.len(), 3);
    }
}
