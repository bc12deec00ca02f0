//! Rabi drive and target trajectories.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use crate::error::{Result, SfpError};
use crate::noise::NoiseChannel;
use crate::qubit;
use crate::rng::RandomStream;
use crate::state::PureState;

/// Tolerance on `duration / dt` being an integer.
pub const STEP_TOL: f64 = 1e-9;

pub const DEFAULT_AZIMUTH_AMPLITUDE: f64 = FRAC_PI_4;
pub const DEFAULT_POLAR_AMPLITUDE: f64 = FRAC_PI_8;

/// Bare rotation of a qubit about `axis` at angular rate `omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiDrive {
    pub omega: f64,
    pub axis: [f64; 3],
    pub dt: f64,
}

impl RabiDrive {
    pub fn new(omega: f64, dt: f64) -> Self {
        RabiDrive {
            omega,
            axis: [1.0, 0.0, 0.0],
            dt,
        }
    }

    pub fn with_axis(mut self, axis: [f64; 3]) -> Self {
        self.axis = axis;
        self
    }

    /// Number of `dt` steps in `duration`.
    pub fn steps(&self, duration: f64) -> Result<usize> {
        let ratio = duration / self.dt;
        let n = ratio.round();
        if duration < 0.0 || !ratio.is_finite() || (ratio - n).abs() > STEP_TOL * n.max(1.0) {
            return Err(SfpError::NonCommensurateDuration {
                duration,
                dt: self.dt,
            });
        }
        Ok(n as usize)
    }
}

/// Evolves under the drive for `duration`. With an amplitude-noise channel
/// each `dt` step uses rate Ω(1 + ξ) with a fresh Gaussian ξ.
pub fn evolve_drive(
    state: &PureState,
    drive: &RabiDrive,
    duration: f64,
    noise: Option<&NoiseChannel>,
    rng: &mut RandomStream,
) -> Result<PureState> {
    if state.dim() != 2 {
        return Err(SfpError::UnsupportedDimension(state.dim()));
    }
    let steps = drive.steps(duration)?;
    match noise {
        Some(ch) if ch.rms > 0.0 => {
            let mut s = state.clone();
            for _ in 0..steps {
                let xi = ch.rms * rng.gaussian();
                let angle = drive.omega * (1.0 + xi) * drive.dt;
                s = s.evolve(&qubit::rotation(drive.axis, angle));
            }
            Ok(s)
        }
        _ => {
            let angle = drive.omega * drive.dt * steps as f64;
            Ok(state.evolve(&qubit::rotation(drive.axis, angle)))
        }
    }
}

/// Where the target state is at each time.
#[derive(Clone, Debug)]
pub enum TargetTrajectory {
    Static(PureState),
    Rabi {
        initial: PureState,
        omega: f64,
        axis: [f64; 3],
    },
    /// Bloch-angle Lissajous: polar π/2 + β sin(4πt/T), azimuth α sin(2πt/T).
    FigureEight {
        period: f64,
        azimuth_amplitude: f64,
        polar_amplitude: f64,
    },
    /// Sample-and-hold through `(time, state)` pairs sorted by time.
    Custom {
        times: Vec<f64>,
        states: Vec<PureState>,
    },
}

impl TargetTrajectory {
    pub fn figure_eight(period: f64) -> Self {
        TargetTrajectory::FigureEight {
            period,
            azimuth_amplitude: DEFAULT_AZIMUTH_AMPLITUDE,
            polar_amplitude: DEFAULT_POLAR_AMPLITUDE,
        }
    }

    pub fn is_static(&self) -> bool {
        match self {
            TargetTrajectory::Static(_) => true,
            TargetTrajectory::Rabi { omega, .. } => *omega == 0.0,
            TargetTrajectory::Custom { states, .. } => states.len() == 1,
            TargetTrajectory::FigureEight { .. } => false,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetTrajectory::Static(s) => s.dim(),
            TargetTrajectory::Rabi { initial, .. } => initial.dim(),
            TargetTrajectory::FigureEight { .. } => 2,
            TargetTrajectory::Custom { states, .. } => states.first().map_or(0, PureState::dim),
        }
    }
}

pub fn target_at(traj: &TargetTrajectory, t: f64) -> PureState {
    match traj {
        TargetTrajectory::Static(s) => s.clone(),
        TargetTrajectory::Rabi {
            initial,
            omega,
            axis,
        } => initial.evolve(&qubit::rotation(*axis, omega * t)),
        TargetTrajectory::FigureEight {
            period,
            azimuth_amplitude,
            polar_amplitude,
        } => {
            let phase = 2.0 * PI * t / period;
            let polar = FRAC_PI_2 + polar_amplitude * (2.0 * phase).sin();
            let azimuth = azimuth_amplitude * phase.sin();
            qubit::from_bloch_angles(polar, azimuth)
        }
        TargetTrajectory::Custom { times, states } => {
            let idx = times.partition_point(|&s| s <= t);
            states[idx.saturating_sub(1)].clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::protocol::fidelity;
    use approx::assert_abs_diff_eq;

    fn rng() -> RandomStream {
        RandomStream::new(1, 0)
    }

    #[test]
    fn full_period_returns() {
        let d = RabiDrive::new(1.0, 2.0 * PI / 1000.0);
        let s = evolve_drive(&qubit::down(), &d, 2.0 * PI, None, &mut rng()).unwrap();
        assert_abs_diff_eq!(fidelity(&s, &qubit::down()).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn pi_pulse_flips() {
        let d = RabiDrive::new(1.0, PI / 100.0);
        let s = evolve_drive(&qubit::down(), &d, PI, None, &mut rng()).unwrap();
        assert_abs_diff_eq!(s.upper_population(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stepwise_matches_single_step() {
        let d = RabiDrive::new(1.3, 0.01).with_axis([0.2, 0.4, 1.0]);
        let zero = NoiseChannel::drive_amplitude(0.0);
        let mut s = qubit::down();
        for _ in 0..500 {
            s = s.evolve(&qubit::rotation(d.axis, d.omega * d.dt));
        }
        let once = evolve_drive(&qubit::down(), &d, 5.0, Some(&zero), &mut rng()).unwrap();
        assert!((s.vector() - once.vector()).norm() < 1e-8);
    }

    #[test]
    fn rabi_formula() {
        let d = RabiDrive::new(1.0, 0.05);
        for k in 0..40 {
            let t = k as f64 * 0.35;
            let s = evolve_drive(&qubit::down(), &d, t, None, &mut rng()).unwrap();
            assert_abs_diff_eq!(
                s.upper_population(),
                (t / 2.0).sin().powi(2),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn non_commensurate_duration_rejected() {
        let d = RabiDrive::new(1.0, 0.1);
        let err = evolve_drive(&qubit::down(), &d, 0.25, None, &mut rng()).unwrap_err();
        assert!(matches!(err, SfpError::NonCommensurateDuration { .. }));
        assert_eq!(d.steps(0.0).unwrap(), 0);
    }

    #[test]
    fn noisy_drive_preserves_norm() {
        let d = RabiDrive::new(1.0, 0.01);
        let ch = NoiseChannel::drive_amplitude(0.5);
        let s = evolve_drive(&qubit::down(), &d, 3.0, Some(&ch), &mut rng()).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn figure_eight_closed_and_crossing() {
        let traj = TargetTrajectory::figure_eight(2.0);
        let a = target_at(&traj, 0.0);
        let b = target_at(&traj, 2.0);
        assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), 1.0, epsilon = 1e-10);
        let mid = qubit::bloch_vector(&target_at(&traj, 1.0)).unwrap();
        assert_abs_diff_eq!(mid[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mid[2], 0.0, epsilon = 1e-12);
        // quarter points sit on opposite lobes
        let q1 = qubit::bloch_vector(&target_at(&traj, 0.5)).unwrap();
        let q3 = qubit::bloch_vector(&target_at(&traj, 1.5)).unwrap();
        assert!(q1[1] * q3[1] < 0.0);
    }

    #[test]
    fn rabi_target_matches_drive() {
        let traj = TargetTrajectory::Rabi {
            initial: qubit::up(),
            omega: 1.01,
            axis: [1.0, 0.0, 0.0],
        };
        let d = RabiDrive::new(1.01, 0.1);
        let s = evolve_drive(&qubit::up(), &d, 12.3, None, &mut rng()).unwrap();
        assert!((target_at(&traj, 12.3).vector() - s.vector()).norm() < 1e-10);
    }

    #[test]
    fn static_and_custom() {
        let s = PureState::normalize(CVector::from_real(&[1.0, 2.0])).unwrap();
        let traj = TargetTrajectory::Static(s.clone());
        assert!(traj.is_static());
        assert_eq!(target_at(&traj, 5.0), s);
        let custom = TargetTrajectory::Custom {
            times: vec![0.0, 1.0],
            states: vec![qubit::down(), qubit::up()],
        };
        assert_eq!(target_at(&custom, 0.5), qubit::down());
        assert_eq!(target_at(&custom, 1.0), qubit::up());
        assert_eq!(target_at(&custom, 7.0), qubit::up());
    }
}
