//! Two-level helpers. Basis ordering is (|↓⟩, |↑⟩) = (e₀, e₁), so
//! σ_z = |↑⟩⟨↑| − |↓⟩⟨↓| = diag(−1, +1) and σ_y is fixed by σ_x σ_y = iσ_z.

use crate::error::{Result, SfpError};
use crate::linalg::{c, cr, CMatrix, CVector, Role, C64};
use crate::state::PureState;

pub const DOWN: usize = 0;
pub const UP: usize = 1;

pub fn sigma_x() -> CMatrix {
    CMatrix::from_rows(&[vec![cr(0.0), cr(1.0)], vec![cr(1.0), cr(0.0)]]).tagged(Role::Unitary)
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_rows(&[vec![cr(0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), cr(0.0)]])
        .tagged(Role::Unitary)
}

pub fn sigma_z() -> CMatrix {
    CMatrix::diag_real(&[-1.0, 1.0]).tagged(Role::Unitary)
}

pub fn down() -> PureState {
    PureState::basis(2, DOWN)
}

pub fn up() -> PureState {
    PureState::basis(2, UP)
}

fn unit(axis: [f64; 3]) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    [axis[0] / n, axis[1] / n, axis[2] / n]
}

/// exp(−i (angle/2) n·σ): a Bloch-sphere rotation by `angle` about `axis`.
pub fn rotation(axis: [f64; 3], angle: f64) -> CMatrix {
    let [nx, ny, nz] = unit(axis);
    let (s, co) = (0.5 * angle).sin_cos();
    // n·σ = [[−nz, nx + i ny], [nx − i ny, nz]]
    let mut m = CMatrix::zeros(2);
    m[(0, 0)] = c(co, s * nz);
    m[(1, 1)] = c(co, -s * nz);
    m[(0, 1)] = c(0.0, -s) * c(nx, ny);
    m[(1, 0)] = c(0.0, -s) * c(nx, -ny);
    m.tagged(Role::Unitary)
}

/// (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)
pub fn bloch_vector(state: &PureState) -> Result<[f64; 3]> {
    if state.dim() != 2 {
        return Err(SfpError::UnsupportedDimension(state.dim()));
    }
    let a = state.amplitudes()[DOWN];
    let b = state.amplitudes()[UP];
    let cross = a.conj() * b;
    Ok([2.0 * cross.re, -2.0 * cross.im, b.norm_sqr() - a.norm_sqr()])
}

/// State with polar angle `theta` from the +z (|↑⟩) pole and azimuth `phi`.
pub fn from_bloch_angles(theta: f64, phi: f64) -> PureState {
    let (s, co) = (0.5 * theta).sin_cos();
    PureState::from_unit(CVector(vec![cr(s), C64::from_polar(co, -phi)]))
}

/// Rotation content of a 2×2 unitary: U = e^{−iα}(cos(η/2)𝕀 − i sin(η/2) n·σ)
/// with η ∈ [0, π], returned as (axis, η). `axis` is `None` when η is
/// numerically zero.
pub fn rotation_axis_angle(u: &CMatrix) -> Result<(Option<[f64; 3]>, f64)> {
    if u.dim() != 2 {
        return Err(SfpError::UnsupportedDimension(u.dim()));
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    // e^{iα} removes the global phase: det U = e^{−2iα}
    let phase_fix = det.sqrt().inv();
    let v = u.scale(phase_fix);
    let mut a0 = 0.5 * v.trace().re;
    let mut a = [
        0.5 * (c(0.0, 1.0) * (&v * &sigma_x()).trace()).re,
        0.5 * (c(0.0, 1.0) * (&v * &sigma_y()).trace()).re,
        0.5 * (c(0.0, 1.0) * (&v * &sigma_z()).trace()).re,
    ];
    if a0 < 0.0 {
        a0 = -a0;
        a = [-a[0], -a[1], -a[2]];
    }
    let s = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let angle = 2.0 * s.atan2(a0);
    if s < 1e-12 {
        Ok((None, angle))
    } else {
        Ok((Some([a[0] / s, a[1] / s, a[2] / s]), angle))
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
