use crate::error::{Result, SfpError};
use crate::linalg::{cr, CMatrix, CVector, C64, STRUCT_TOL};

/// Normalized state vector |ψ⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    /// Wraps amplitudes that are already normalized within `STRUCT_TOL`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = CVector(amplitudes);
        let n2 = v.norm_sqr();
        if (n2 - 1.0).abs() > STRUCT_TOL {
            return Err(SfpError::NotNormalized(n2));
        }
        Ok(PureState(v))
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalize(amplitudes: CVector) -> Result<Self> {
        amplitudes
            .normalized()
            .map(PureState)
            .ok_or(SfpError::NotNormalized(0.0))
    }

    pub(crate) fn from_unit(v: CVector) -> Self {
        PureState(v)
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        PureState(CVector::basis(dim, index))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0 .0
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.0.dot(&other.0)
    }

    /// Applies a unitary and renormalizes away roundoff drift.
    pub fn evolve(&self, u: &CMatrix) -> PureState {
        let v = u.apply(&self.0);
        let n = v.norm();
        PureState(v.scale(cr(1.0 / n)))
    }

    /// Population of the highest basis state, |⟨d−1|ψ⟩|². For a qubit in
    /// the (|↓⟩, |↑⟩) ordering this is P_up.
    pub fn upper_population(&self) -> f64 {
        self.0 .0.last().map_or(0.0, |z| z.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    /// The qubit state orthogonal to this one, (−b*, a*) for (a, b).
    pub fn qubit_orthogonal(&self) -> Result<PureState> {
        if self.dim() != 2 {
            return Err(SfpError::UnsupportedDimension(self.dim()));
        }
        let a = self.0[0];
        let b = self.0[1];
        Ok(PureState(CVector(vec![-b.conj(), a.conj()])))
    }
}
