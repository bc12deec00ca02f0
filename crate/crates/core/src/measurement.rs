//! Generalized measurements: POVMs, unsharp observables, outcome sampling
//! and the Kraus-modulus state update.
//!
//! The measurement itself is phase-free, `M_i = √E_i`. Any unitary applied
//! after the measurement belongs to the feedback in [`crate::protocol`].

use crate::error::{Result, SfpError};
use crate::linalg::{
    cr, determinant, inverse, operator_sqrt, CMatrix, CVector, Role, ALGEBRA_TOL, STRUCT_TOL,
};
use crate::rng::RandomStream;
use crate::state::PureState;

/// Outcomes with probability at or below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Commuting-effect structure carried by POVMs built from an observable:
/// `E_i = Σ_j λ_ij |o_j⟩⟨o_j|`.
#[derive(Clone, Debug)]
pub struct ObservableStructure {
    pub basis: Vec<CVector>,
    /// n × d, rows indexed by outcome.
    pub mixing: Vec<Vec<f64>>,
}

impl ObservableStructure {
    pub fn mixing_matrix(&self) -> Option<CMatrix> {
        let d = self.basis.len();
        if self.mixing.len() != d {
            return None;
        }
        Some(CMatrix::from_real_rows(&self.mixing))
    }
}

/// A POVM with its effect square roots cached.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<CMatrix>,
    sqrt_effects: Vec<CMatrix>,
    structure: Option<ObservableStructure>,
}

impl Povm {
    /// Validates positivity and completeness, then caches `√E_i`.
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let dim = effects
            .first()
            .map(CMatrix::dim)
            .ok_or_else(|| SfpError::Config("a POVM needs at least one effect".to_string()))?;
        let mut total = CMatrix::zeros(dim);
        let mut checked = Vec::with_capacity(effects.len());
        for e in effects {
            if e.dim() != dim {
                return Err(SfpError::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            total = &total + &e;
            checked.push(e.with_role(Role::Positive)?);
        }
        let residual = (&total - &CMatrix::identity(dim)).frobenius_norm();
        if residual > ALGEBRA_TOL {
            return Err(SfpError::IncompletePovm(residual));
        }
        let sqrt_effects = checked
            .iter()
            .map(operator_sqrt)
            .collect::<Result<Vec<_>>>()?;
        Ok(Povm {
            effects: checked,
            sqrt_effects,
            structure: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &CMatrix {
        &self.effects[i]
    }

    /// Cached `|M_i| = √E_i`.
    pub fn sqrt_effect(&self, i: usize) -> &CMatrix {
        &self.sqrt_effects[i]
    }

    pub fn structure(&self) -> Option<&ObservableStructure> {
        self.structure.as_ref()
    }

    fn check_state(&self, state: &PureState) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(SfpError::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        Ok(())
    }
}

/// Strength of a single unsharp two-outcome measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementStrength {
    pub p0: f64,
    pub delta_p_squared: f64,
}

impl MeasurementStrength {
    pub fn from_p0(p0: f64) -> Result<Self> {
        check_p0(p0)?;
        Ok(MeasurementStrength {
            p0,
            delta_p_squared: (2.0 * p0 - 1.0).powi(2),
        })
    }

    /// Rate of information extraction for measurements repeated every `tau`.
    pub fn gamma(&self, tau: f64) -> f64 {
        self.delta_p_squared / tau
    }
}

fn check_p0(p0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p0) || p0.is_nan() {
        return Err(SfpError::OutOfRange {
            name: "p0",
            value: p0,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// An unsharp measurement of a non-degenerate observable.
#[derive(Clone, Debug)]
pub struct UnsharpObservable {
    pub eigenvalues: Vec<f64>,
    povm: Povm,
}

impl UnsharpObservable {
    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn into_povm(self) -> Povm {
        self.povm
    }

    pub fn basis(&self) -> &[CVector] {
        &self.structure().basis
    }

    pub fn mixing(&self) -> &[Vec<f64>] {
        &self.structure().mixing
    }

    fn structure(&self) -> &ObservableStructure {
        self.povm
            .structure
            .as_ref()
            .expect("built from an observable")
    }

    /// det λ for square mixing matrices.
    pub fn mixing_determinant(&self) -> Option<f64> {
        self.structure().mixing_matrix().map(|m| determinant(&m).re)
    }

    /// Recovers the eigenbasis populations |⟨o_j|ψ⟩|² from outcome
    /// probabilities by inverting λ. `None` if λ is not square or singular.
    pub fn basis_probabilities(&self, outcome_probabilities: &[f64]) -> Option<Vec<f64>> {
        let lambda = self.structure().mixing_matrix()?;
        if determinant(&lambda).norm() <= STRUCT_TOL {
            return None;
        }
        let inv = inverse(&lambda)?;
        let p = CVector::from_real(outcome_probabilities);
        Some(inv.apply(&p).0.iter().map(|z| z.re).collect())
    }
}

/// Unsharp σ_z with `E₀ = (1−p₀)|↓⟩⟨↓| + p₀|↑⟩⟨↑|`, `E₁ = p₀|↓⟩⟨↓| + (1−p₀)|↑⟩⟨↑|`.
pub fn make_unsharp_sigma_z(p0: f64) -> Result<UnsharpObservable> {
    check_p0(p0)?;
    make_unsharp_observable(
        vec![CVector::basis(2, 0), CVector::basis(2, 1)],
        vec![-1.0, 1.0],
        vec![vec![1.0 - p0, p0], vec![p0, 1.0 - p0]],
    )
}

/// General unsharp observable; `mixing` is n × d with columns summing to one.
pub fn make_unsharp_observable(
    basis: Vec<CVector>,
    eigenvalues: Vec<f64>,
    mixing: Vec<Vec<f64>>,
) -> Result<UnsharpObservable> {
    let d = basis.len();
    if d < 2 {
        return Err(SfpError::Config("observable needs d >= 2".into()));
    }
    if eigenvalues.len() != d {
        return Err(SfpError::DimensionMismatch {
            expected: d,
            got: eigenvalues.len(),
        });
    }
    for v in &basis {
        if v.dim() != d {
            return Err(SfpError::DimensionMismatch {
                expected: d,
                got: v.dim(),
            });
        }
    }
    let mut worst: f64 = 0.0;
    for (a, va) in basis.iter().enumerate() {
        for (b, vb) in basis.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((va.dot(vb) - cr(target)).norm());
        }
    }
    if worst > ALGEBRA_TOL {
        return Err(SfpError::NotOrthonormal(worst));
    }
    if mixing.is_empty() {
        return Err(SfpError::InvalidMixing("no outcomes".into()));
    }
    for (i, row) in mixing.iter().enumerate() {
        if row.len() != d {
            return Err(SfpError::InvalidMixing(format!(
                "row {i} has {} entries, expected {d}",
                row.len()
            )));
        }
        if let Some(x) = row.iter().find(|x| **x < 0.0 || x.is_nan()) {
            return Err(SfpError::InvalidMixing(format!(
                "negative entry {x} in row {i}"
            )));
        }
    }
    for j in 0..d {
        let col: f64 = mixing.iter().map(|row| row[j]).sum();
        if (col - 1.0).abs() > ALGEBRA_TOL {
            return Err(SfpError::InvalidMixing(format!("column {j} sums to {col}")));
        }
    }
    let effects: Vec<CMatrix> = mixing
        .iter()
        .map(|row| CMatrix::spectral_sum(row, &basis))
        .collect();
    let mut povm = Povm::new(effects)?;
    povm.structure = Some(ObservableStructure { basis, mixing });
    Ok(UnsharpObservable { eigenvalues, povm })
}

/// `p_i = ⟨ψ|E_i|ψ⟩`, roundoff negatives clamped to zero.
pub fn outcome_probabilities(povm: &Povm, state: &PureState) -> Result<Vec<f64>> {
    povm.check_state(state)?;
    let mut probs = Vec::with_capacity(povm.len());
    for e in povm.effects() {
        let p = e.sandwich(state.vector(), state.vector()).re;
        if p < -STRUCT_TOL {
            return Err(SfpError::Numerical(format!("negative probability {p}")));
        }
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > ALGEBRA_TOL {
        return Err(SfpError::Numerical(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    Ok(probs)
}

/// Inverse-CDF draw from a probability vector; consumes exactly one uniform.
pub fn sample_from_probabilities(probs: &[f64], rng: &mut RandomStream) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut last_possible = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_possible = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_possible
}

pub fn sample_outcome(povm: &Povm, state: &PureState, rng: &mut RandomStream) -> Result<usize> {
    let probs = outcome_probabilities(povm, state)?;
    Ok(sample_from_probabilities(&probs, rng))
}

/// `√E_i|ψ⟩ / √p_i`.
pub fn apply_measurement(povm: &Povm, state: &PureState, outcome: usize) -> Result<PureState> {
    povm.check_state(state)?;
    let v = povm.sqrt_effect(outcome).apply(state.vector());
    let p = v.norm_sqr();
    if p <= ZERO_PROBABILITY {
        return Err(SfpError::ZeroProbabilityOutcome {
            outcome,
            probability: p,
        });
    }
    Ok(PureState::from_unit(v.scale(cr(1.0 / p.sqrt()))))
}
