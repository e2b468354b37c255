//! Heralded two-atom states and their entanglement.
//!
//! Basis order is `|11⟩, |12⟩, |21⟩, |22⟩` throughout. Mixed-state
//! entanglement is measured with the Wootters spin-flip concurrence.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{envelope_norm, overlap, PulseEnvelope};
use crate::C64;

/// Herald probabilities at or below this are treated as "never fires".
pub const MIN_HERALD_PROBABILITY: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Labels of the product basis, in storage order.
pub const BASIS_LABELS: [&str; 4] = ["11", "12", "21", "22"];

/// Index of `|kℓ⟩` (with `k, ℓ ∈ {1, 2}`) in the product basis.
pub fn basis_index(k: u8, l: u8) -> usize {
    debug_assert!((1..=2).contains(&k) && (1..=2).contains(&l));
    2 * (k as usize - 1) + (l as usize - 1)
}

/// Number of atoms in the coupled state `|1⟩` for each basis state.
pub const COUPLED_COUNT: [u32; 4] = [2, 1, 1, 0];

/// Two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<C64>,
}

impl TwoQubitState {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let state = Self { rho };
        state.check()?;
        Ok(state)
    }

    pub fn pure(amplitudes: [C64; 4]) -> Result<Self> {
        let v = Vector4::from(amplitudes);
        let n = v.norm_squared();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n));
        }
        Self::new(v * v.adjoint())
    }

    /// 16 entries in row-major order.
    pub fn from_row_major(entries: &[C64]) -> Result<Self> {
        if entries.len() != 16 {
            return Err(Error::InvalidParams(format!("need 16 entries, got {}", entries.len())));
        }
        Self::new(Matrix4::from_row_slice(entries))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    pub fn row_major(&self) -> Vec<C64> {
        (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| self.rho[(i, j)]).collect()
    }

    pub fn check(&self) -> Result<()> {
        let herm = (self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParams(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.rho.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidParams(format!("density matrix trace {tr}")));
        }
        let min_eig = self.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidParams(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Eigenvector of the largest eigenvalue, with its first nonzero
    /// component made real and positive.
    pub fn dominant_eigenvector(&self) -> [C64; 4] {
        let eig = SymmetricEigen::new(self.hermitian_part());
        let top = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(top).into_owned();
        let pivot = v.iter().copied().find(|z| z.norm() > 1e-12).unwrap_or(C64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        [v[0] * phase, v[1] * phase, v[2] * phase, v[3] * phase]
    }

    /// Same state with the two atoms exchanged.
    pub fn swapped(&self) -> Self {
        let perm = [0usize, 2, 1, 3];
        Self { rho: Matrix4::from_fn(|i, j| self.rho[(perm[i], perm[j])]) }
    }

    fn hermitian_part(&self) -> Matrix4<C64> {
        (self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0)
    }
}

/// Initial amplitudes `w_{kℓ}` of the two atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomWeights {
    w: [C64; 4],
}

impl AtomWeights {
    pub fn new(w: [C64; 4]) -> Result<Self> {
        let n: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("squared norm {n} != 1")));
        }
        Ok(Self { w })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(w: [C64; 4]) -> Result<Self> {
        let n: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidWeights("all weights vanish".into()));
        }
        Self::new(w.map(|z| z / n))
    }

    /// Product of independent single-atom superpositions `u_k v_ℓ`.
    pub fn product(u: [C64; 2], v: [C64; 2]) -> Result<Self> {
        Self::normalized([u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]])
    }

    /// Both atoms in `(|1⟩ + |2⟩)/√2`.
    pub fn balanced() -> Self {
        Self { w: [C64::new(0.5, 0.0); 4] }
    }

    /// Atoms prepared in `|kℓ⟩`.
    pub fn basis(k: u8, l: u8) -> Self {
        let mut w = [C64::new(0.0, 0.0); 4];
        w[basis_index(k, l)] = C64::new(1.0, 0.0);
        Self { w }
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.w
    }

    pub fn get(&self, k: u8, l: u8) -> C64 {
        self.w[basis_index(k, l)]
    }

    /// Whether the weights factor as `u_k v_ℓ` (vanishing 2×2 determinant).
    pub fn is_product(&self) -> bool {
        (self.w[0] * self.w[3] - self.w[1] * self.w[2]).norm() < 1e-12
    }
}

/// Builds the normalized atomic state heralded by a click from the four
/// branch envelopes `A_{kℓ}(t)`, one per atomic basis state:
/// `ρ_{kℓ,pq} = ∫ A_{kℓ} A_{pq}* dt / P`, with `P = Σ ∫|A_{kℓ}|² dt`.
pub fn assemble_heralded_state(branches: &[PulseEnvelope; 4]) -> Result<(TwoQubitState, f64)> {
    let probability: f64 = branches.iter().map(envelope_norm).sum();
    if probability.is_nan() || probability <= MIN_HERALD_PROBABILITY {
        return Err(Error::VanishingProbability(probability));
    }
    let mut rho = Matrix4::<C64>::zeros();
    for i in 0..4 {
        for j in i..4 {
            let value = overlap(&branches[j], &branches[i])? / probability;
            rho[(i, j)] = value;
            rho[(j, i)] = value.conj();
        }
        rho[(i, i)].im = 0.0;
    }
    Ok((TwoQubitState::new(rho)?, probability))
}

/// Wootters concurrence `max(0, λ1 - λ2 - λ3 - λ4)`.
///
/// The λ are the decreasing square roots of the eigenvalues of
/// `ρ (Y⊗Y) ρ* (Y⊗Y)`. They are obtained as the singular values of
/// `Aᵀ (Y⊗Y) A` for the factorization `ρ = A A†` built from the clamped
/// eigendecomposition of ρ, which avoids square roots of tiny eigenvalues.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    let eig = SymmetricEigen::new(state.hermitian_part());
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let factor = eig.eigenvectors * Matrix4::from_diagonal(&roots);
    // Y⊗Y is antidiagonal (-1, 1, 1, -1)
    let yy = Matrix4::from_fn(|i, j| match (i, j) {
        (0, 3) | (3, 0) => C64::new(-1.0, 0.0),
        (1, 2) | (2, 1) => C64::new(1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let tau = factor.transpose() * yy * factor;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// `2|ad - bc|` for the pure state `a|11⟩ + b|12⟩ + c|21⟩ + d|22⟩`.
pub fn pure_concurrence(a: C64, b: C64, c: C64, d: C64) -> Result<f64> {
    let n = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n));
    }
    Ok(2.0 * (a * d - b * c).norm())
}

/// `Tr ρ²`.
pub fn purity(state: &TwoQubitState) -> f64 {
    (state.rho * state.rho).trace().re
}

/// Entanglement entropy, in ebits, of the bipartite pure state whose
/// amplitudes on a 2×2 product basis are the entries of `amplitudes`.
pub fn schmidt_entropy_2d(amplitudes: &Matrix2<C64>) -> Result<f64> {
    let n = amplitudes.norm_squared();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n));
    }
    let sv = amplitudes.svd(false, false).singular_values;
    Ok(sv
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}
