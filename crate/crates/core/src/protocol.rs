//! The measurement-reversal feedback cycle and its diagnostics.
//!
//! After outcome `i` the feedback applies `U_i`, chosen so that the target
//! would be returned to itself: `U_i √E_i |ψ_T⟩ / √w_i = |ψ_T⟩` with
//! `w_i = ⟨ψ_T|E_i|ψ_T⟩`. `U_i` is the smallest rotation doing this. It acts
//! only on span{√E_i|ψ_T⟩, |ψ_T⟩} and is the identity on the complement.

use crate::error::{Result, SfpError};
use crate::linalg::{
    cr, determinant, orthogonal_complement, orthonormal_span, CMatrix, CVector, Role, ALGEBRA_TOL,
    C64, STRUCT_TOL,
};
use crate::measurement::{apply_measurement, sample_outcome, Povm, ZERO_PROBABILITY};
use crate::qubit;
use crate::rng::RandomStream;
use crate::state::PureState;

/// Minimum target weight on an effect for a reversal to be well defined.
pub const W_MIN: f64 = 1e-10;

/// Numerical rank threshold for the spanning test.
pub const RANK_TOL: f64 = 1e-10;

/// Below this sinθ the rotation is dropped and only the phase corrected.
const COLLINEAR_TOL: f64 = 1e-12;

/// Per-outcome reversal unitaries for one target state.
#[derive(Clone, Debug)]
pub struct ReversalFeedback {
    target: PureState,
    unitaries: Vec<CMatrix>,
    weights: Vec<f64>,
    angles: Vec<f64>,
}

/// A qubit reversal viewed as a Bloch-sphere rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochRotation {
    pub axis: [f64; 3],
    pub angle: f64,
}

impl ReversalFeedback {
    pub fn target(&self) -> &PureState {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitary(&self, outcome: usize) -> &CMatrix {
        &self.unitaries[outcome]
    }

    /// `w_i = ⟨ψ_T|E_i|ψ_T⟩`
    pub fn weight(&self, outcome: usize) -> f64 {
        self.weights[outcome]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// θ_R,i = arccos Re⟨ψ_T|U_i†|ψ_T⟩
    pub fn reversal_angle(&self, outcome: usize) -> f64 {
        self.angles[outcome]
    }

    pub fn reversal_angles(&self) -> &[f64] {
        &self.angles
    }

    /// The scalar reversal angle used to scale noise: the largest θ_R,i.
    pub fn max_reversal_angle(&self) -> f64 {
        self.angles.iter().cloned().fold(0.0, f64::max)
    }

    /// Axis and Bloch angle of `U_i` (qubits only). A zero rotation has no
    /// axis of its own; it is assigned ẑ × b_T, the axis along which unsharp
    /// σ_z reversals act on this target.
    pub fn bloch_rotation(&self, outcome: usize) -> Result<BlochRotation> {
        let (axis, angle) = qubit::rotation_axis_angle(&self.unitaries[outcome])?;
        let axis = match axis {
            Some(a) => a,
            None => fallback_axis(&self.target)?,
        };
        Ok(BlochRotation { axis, angle })
    }
}

fn fallback_axis(target: &PureState) -> Result<[f64; 3]> {
    let b = qubit::bloch_vector(target)?;
    let axis = qubit::cross([0.0, 0.0, 1.0], b);
    let n = qubit::norm3(axis);
    if n < 1e-9 {
        Ok([1.0, 0.0, 0.0])
    } else {
        Ok([axis[0] / n, axis[1] / n, axis[2] / n])
    }
}

/// Unitary carrying the unit vector `from` exactly onto `to`, acting as the
/// identity on the complement of their span.
fn minimal_rotation(from: &CVector, to: &CVector) -> CMatrix {
    let dim = to.dim();
    let overlap = to.dot(from);
    let cos_t = overlap.norm();
    let phase = if cos_t > 0.0 {
        overlap / cos_t
    } else {
        cr(1.0)
    };
    let back = phase.conj();

    // from = e^{iα}(cosθ |to⟩ + sinθ |r⟩)
    let mut r = from.scale(back);
    r.axpy(cr(-cos_t), to);
    let drift = to.dot(&r);
    r.axpy(-drift, to);
    let sin_t = r.norm();

    if sin_t <= COLLINEAR_TOL {
        // pure phase correction on the ray of `from`
        let p = CMatrix::projector(from);
        let u = &CMatrix::identity(dim) + &p.scale(back - cr(1.0));
        return u.tagged(Role::Unitary);
    }
    let r = r.scale(cr(1.0 / sin_t));

    let mut u = CMatrix::identity(dim);
    for a in 0..dim {
        for b in 0..dim {
            let tt = to[a] * to[b].conj();
            let rr = r[a] * r[b].conj();
            let tr = to[a] * r[b].conj();
            let rt = r[a] * to[b].conj();
            u[(a, b)] += -(tt + rr) + back * ((tt + rr) * cos_t + (tr - rt) * sin_t);
        }
    }
    u.tagged(Role::Unitary)
}

/// Builds the reversal feedback for `target`.
pub fn build_reversal(povm: &Povm, target: &PureState) -> Result<ReversalFeedback> {
    if target.dim() != povm.dim() {
        return Err(SfpError::DimensionMismatch {
            expected: povm.dim(),
            got: target.dim(),
        });
    }
    let t = target.vector();
    let mut unitaries = Vec::with_capacity(povm.len());
    let mut weights = Vec::with_capacity(povm.len());
    let mut angles = Vec::with_capacity(povm.len());
    for i in 0..povm.len() {
        let kicked = povm.sqrt_effect(i).apply(t);
        let w = kicked.norm_sqr();
        if w < W_MIN {
            return Err(SfpError::TargetAnnihilated {
                outcome: i,
                weight: w,
            });
        }
        let phi = kicked.scale(cr(1.0 / w.sqrt()));
        let u = minimal_rotation(&phi, t);
        let back = u.sandwich(t, t).conj();
        angles.push(back.re.clamp(-1.0, 1.0).acos());
        unitaries.push(u);
        weights.push(w);
    }
    Ok(ReversalFeedback {
        target: target.clone(),
        unitaries,
        weights,
        angles,
    })
}

/// Applies `U` to a state after measurement.
pub fn apply_feedback(state: &PureState, u: &CMatrix) -> PureState {
    state.evolve(u)
}

/// One measurement-feedback cycle: sample from the actual state, apply the
/// Kraus modulus, then the reversal for the observed outcome.
pub fn sfp_cycle(
    state: &PureState,
    povm: &Povm,
    feedback: &ReversalFeedback,
    rng: &mut RandomStream,
) -> Result<(PureState, usize)> {
    if feedback.len() != povm.len() {
        return Err(SfpError::DimensionMismatch {
            expected: povm.len(),
            got: feedback.len(),
        });
    }
    let outcome = sample_outcome(povm, state, rng)?;
    let measured = apply_measurement(povm, state, outcome)?;
    Ok((
        apply_feedback(&measured, feedback.unitary(outcome)),
        outcome,
    ))
}

/// F = |⟨a|b⟩|²
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(SfpError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.overlap(b).norm_sqr().min(1.0))
}

/// Both algebraic forms of the outcome-averaged fidelity change.
#[derive(Clone, Copy, Debug)]
pub struct FidelityChange {
    /// Σ_i |⟨ψ|(𝕀 − |ψ_T⟩⟨ψ_T|)E_i|ψ_T⟩|² / w_i, a sum of non-negative terms.
    pub projected: f64,
    /// Σ_i |⟨ψ|E_i|ψ_T⟩|² / w_i − |⟨ψ|ψ_T⟩|²
    pub direct: f64,
}

pub fn fidelity_change_forms(
    state: &PureState,
    target: &PureState,
    povm: &Povm,
) -> Result<FidelityChange> {
    if state.dim() != povm.dim() || target.dim() != povm.dim() {
        return Err(SfpError::DimensionMismatch {
            expected: povm.dim(),
            got: if state.dim() != povm.dim() {
                state.dim()
            } else {
                target.dim()
            },
        });
    }
    let psi = state.vector();
    let t = target.vector();
    let base = psi.dot(t);
    let mut projected = 0.0;
    let mut direct = 0.0;
    for (i, e) in povm.effects().iter().enumerate() {
        let et = e.apply(t);
        let w = t.dot(&et).re;
        let a = psi.dot(&et);
        let num = (a - base * w).norm_sqr();
        if w < ZERO_PROBABILITY {
            if num < ZERO_PROBABILITY * ZERO_PROBABILITY {
                continue;
            }
            return Err(SfpError::DegenerateTarget(i));
        }
        projected += num / w;
        direct += a.norm_sqr() / w;
    }
    direct -= base.norm_sqr();
    Ok(FidelityChange { projected, direct })
}

/// ΔF, the fidelity change from one cycle averaged over outcomes.
pub fn avg_fidelity_change(state: &PureState, target: &PureState, povm: &Povm) -> Result<f64> {
    let forms = fidelity_change_forms(state, target, povm)?;
    if (forms.projected - forms.direct).abs() > ALGEBRA_TOL {
        return Err(SfpError::Numerical(format!(
            "fidelity change forms disagree: {} vs {}",
            forms.projected, forms.direct
        )));
    }
    Ok(forms.projected)
}

/// Whether repeated cycles can drive every state into the target.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub dimension: usize,
    /// Numerical rank of [E_0|ψ_T⟩ … E_{n−1}|ψ_T⟩].
    pub rank: usize,
    pub spans_hilbert_space: bool,
    /// Π_l ⟨o_l|ψ_T⟩ for POVMs built from an observable.
    pub det_psi: Option<C64>,
    /// det λ for square mixing matrices.
    pub det_lambda: Option<C64>,
    /// Rank of the effects as vectors in operator space.
    pub operator_rank: usize,
    pub informationally_complete: bool,
    /// A unit vector orthogonal to every E_i|ψ_T⟩, when one exists.
    pub failing_direction: Option<PureState>,
}

impl ConvergenceReport {
    pub fn satisfied(&self) -> bool {
        self.spans_hilbert_space
    }
}

pub fn check_convergence_criterion(povm: &Povm, target: &PureState) -> Result<ConvergenceReport> {
    let dim = povm.dim();
    if target.dim() != dim {
        return Err(SfpError::DimensionMismatch {
            expected: dim,
            got: target.dim(),
        });
    }
    if (target.norm_sqr() - 1.0).abs() > STRUCT_TOL {
        return Err(SfpError::NotNormalized(target.norm_sqr()));
    }
    let columns: Vec<CVector> = povm
        .effects()
        .iter()
        .map(|e| e.apply(target.vector()))
        .collect();
    let span = orthonormal_span(&columns, RANK_TOL);
    let rank = span.len();
    let failing_direction = orthogonal_complement(&span, dim)
        .into_iter()
        .next()
        .map(PureState::from_unit);

    let ops: Vec<CVector> = povm.effects().iter().map(CMatrix::vectorize).collect();
    let operator_rank = orthonormal_span(&ops, RANK_TOL).len();

    let (det_psi, det_lambda) = match povm.structure() {
        Some(s) => {
            let det_psi = s
                .basis
                .iter()
                .map(|o| o.dot(target.vector()))
                .fold(cr(1.0), |acc, z| acc * z);
            let det_lambda = s.mixing_matrix().map(|m| determinant(&m));
            (Some(det_psi), det_lambda)
        }
        None => (None, None),
    };

    Ok(ConvergenceReport {
        dimension: dim,
        rank,
        spans_hilbert_space: rank == dim,
        det_psi,
        det_lambda,
        operator_rank,
        informationally_complete: operator_rank == dim * dim,
        failing_direction,
    })
}
