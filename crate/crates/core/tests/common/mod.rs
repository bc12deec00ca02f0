#![allow(dead_code)]

use sfp_core::linalg::{c, orthonormal_span, CVector};
use sfp_core::measurement::{apply_measurement, make_unsharp_observable, outcome_probabilities};
use sfp_core::protocol::{build_reversal, fidelity};
use sfp_core::{Povm, PureState, RandomStream, UnsharpObservable};

pub fn random_vector(dim: usize, rng: &mut RandomStream) -> CVector {
    CVector(
        (0..dim)
            .map(|_| c(rng.gaussian(), rng.gaussian()))
            .collect(),
    )
}

pub fn random_state(dim: usize, rng: &mut RandomStream) -> PureState {
    PureState::normalize(random_vector(dim, rng)).unwrap()
}

/// Orthonormal basis from Gram-Schmidt on Gaussian vectors.
pub fn random_basis(dim: usize, rng: &mut RandomStream) -> Vec<CVector> {
    loop {
        let vs: Vec<CVector> = (0..dim).map(|_| random_vector(dim, rng)).collect();
        let basis = orthonormal_span(&vs, 1e-6);
        if basis.len() == dim {
            return basis;
        }
    }
}

/// `outcomes` × `dim` column-stochastic matrix with entries bounded away from 0.
pub fn random_mixing(outcomes: usize, dim: usize, rng: &mut RandomStream) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; dim]; outcomes];
    for j in 0..dim {
        let col: Vec<f64> = (0..outcomes).map(|_| 0.05 + rng.uniform()).collect();
        let s: f64 = col.iter().sum();
        for (row, x) in m.iter_mut().zip(&col) {
            row[j] = x / s;
        }
    }
    m
}

pub fn random_observable(dim: usize, outcomes: usize, rng: &mut RandomStream) -> UnsharpObservable {
    let basis = random_basis(dim, rng);
    let eigenvalues = (0..dim).map(|j| j as f64).collect();
    make_unsharp_observable(basis, eigenvalues, random_mixing(outcomes, dim, rng)).unwrap()
}

/// Σ_i p_i F(ψ_i, ψ_T) − F(ψ, ψ_T) by enumerating every outcome.
pub fn brute_force_fidelity_change(state: &PureState, target: &PureState, povm: &Povm) -> f64 {
    let fb = build_reversal(povm, target).unwrap();
    let probs = outcome_probabilities(povm, state).unwrap();
    let mut after = 0.0;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 1e-14 {
            continue;
        }
        let post = apply_measurement(povm, state, i)
            .unwrap()
            .evolve(fb.unitary(i));
        after += p * fidelity(&post, target).unwrap();
    }
    after - fidelity(state, target).unwrap()
}
