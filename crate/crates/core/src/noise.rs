//! White-noise channels realized as random unitary kicks on pure states.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SfpError};
use crate::linalg::CMatrix;
use crate::protocol::ReversalFeedback;
use crate::qubit;
use crate::rng::RandomStream;
use crate::state::PureState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Rotation about z by a Gaussian angle once per cycle.
    Dephasing,
    /// Gaussian jitter of each reversal's rotation angle.
    ReversalAngle,
    /// Relative Gaussian error on the drive rate, resampled every `dt`.
    DriveAmplitude,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    /// RMS rotation angle in radians, or the relative RMS for drive noise.
    pub rms: f64,
}

impl NoiseChannel {
    pub fn dephasing(rms: f64) -> Self {
        NoiseChannel {
            kind: NoiseKind::Dephasing,
            rms,
        }
    }

    pub fn reversal_angle(rms: f64) -> Self {
        NoiseChannel {
            kind: NoiseKind::ReversalAngle,
            rms,
        }
    }

    pub fn drive_amplitude(rms: f64) -> Self {
        NoiseChannel {
            kind: NoiseKind::DriveAmplitude,
            rms,
        }
    }
}

/// exp(−i(ϑ/2)σ_z) with ϑ ~ N(0, rms²).
pub fn apply_dephasing(
    state: &PureState,
    channel: &NoiseChannel,
    rng: &mut RandomStream,
) -> Result<PureState> {
    if state.dim() != 2 {
        return Err(SfpError::UnsupportedDimension(state.dim()));
    }
    let angle = channel.rms * rng.gaussian();
    Ok(state.evolve(&qubit::rotation([0.0, 0.0, 1.0], angle)))
}

/// The reversal for `outcome` followed by an extra rotation about its own
/// axis by a Gaussian angle, so only the feedback angle is perturbed.
pub fn perturb_reversal(
    feedback: &ReversalFeedback,
    channel: &NoiseChannel,
    outcome: usize,
    rng: &mut RandomStream,
) -> Result<CMatrix> {
    let u = feedback.unitary(outcome);
    if u.dim() != 2 {
        return Err(SfpError::UnsupportedDimension(u.dim()));
    }
    if channel.rms == 0.0 {
        return Ok(u.clone());
    }
    let axis = feedback.bloch_rotation(outcome)?.axis;
    let jitter = qubit::rotation(axis, channel.rms * rng.gaussian());
    Ok(&jitter * u)
}
