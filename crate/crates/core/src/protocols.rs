//! End-to-end entanglement protocols.
//!
//! * Same cavity: both atoms share one cavity and a single click heralds
//!   the gate.
//! * Remote cavities: the photon is split by a 50:50 beam splitter, scatters
//!   off two cavities at once, recombines on the same beam splitter and is
//!   detected at port I (`D1`) or port II (`D2`).
//! * GHZ clouds: the remote circuit applied to two atomic clouds prepared in
//!   GHZ states, described in the effective basis `{|1…1⟩, |2…2⟩}` of each
//!   cloud.
//!
//! The scattering dynamics is linear in the input, so each coupling sector
//! is integrated once for a unit input and branch envelopes are obtained by
//! scaling with the initial atomic amplitudes.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_sector, CavityParams};
use crate::error::{Error, Result};
use crate::pulse::{envelope_norm, PulseEnvelope};
use crate::quantum::{
    assemble_heralded_state, basis_index, concurrence, purity, schmidt_entropy_2d, AtomWeights,
    TwoQubitState, COUPLED_COUNT,
};
use crate::C64;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    SameCavity,
    Remote,
    GhzCloud,
}

impl ProtocolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolKind::SameCavity => "same-cavity",
            ProtocolKind::Remote => "remote",
            ProtocolKind::GhzCloud => "ghz-cloud",
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "same-cavity" => Ok(ProtocolKind::SameCavity),
            "remote" => Ok(ProtocolKind::Remote),
            "ghz-cloud" => Ok(ProtocolKind::GhzCloud),
            other => Err(format!("unknown protocol '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsDirection {
    /// Ports I, II → III, IV.
    Forward,
    /// Ports III, IV → I, II.
    Backward,
}

/// Lossless 50:50 beam splitter, traversed once in each direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterConvention {
    forward: Matrix2<C64>,
    backward: Matrix2<C64>,
}

impl Default for BeamSplitterConvention {
    /// `forward = [[1, i], [i, 1]]/√2`, `backward = forward⁻¹`. A photon
    /// entering port I leaves as `(|III⟩ + i|IV⟩)/√2`; returning through
    /// III it exits as `(|I⟩ - i|II⟩)/√2` and through IV as
    /// `(-i|I⟩ + |II⟩)/√2`.
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (one, i) = (C64::new(h, 0.0), C64::new(0.0, h));
        Self {
            forward: Matrix2::new(one, i, i, one),
            backward: Matrix2::new(one, -i, -i, one),
        }
    }
}

impl BeamSplitterConvention {
    pub fn new(forward: Matrix2<C64>, backward: Matrix2<C64>) -> Result<Self> {
        let conv = Self { forward, backward };
        let id = Matrix2::<C64>::identity();
        let dev = |m: Matrix2<C64>| (m - id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev(forward.adjoint() * forward) > UNITARY_TOL || dev(backward.adjoint() * backward) > UNITARY_TOL {
            return Err(Error::InvalidParams("beam splitter matrices must be unitary".into()));
        }
        if dev(backward * forward) > UNITARY_TOL {
            return Err(Error::InvalidParams("backward pass must invert the forward pass".into()));
        }
        Ok(conv)
    }

    pub fn forward(&self) -> &Matrix2<C64> {
        &self.forward
    }

    pub fn backward(&self) -> &Matrix2<C64> {
        &self.backward
    }

    /// Sends a photon in through port I, reflects the two output arms with
    /// amplitudes `r_iii` and `r_iv`, and returns the amplitudes at ports
    /// I and II after the second pass.
    pub fn round_trip(&self, r_iii: C64, r_iv: C64) -> [C64; 2] {
        let [to_iii, to_iv] = beam_splitter_transform(BsDirection::Forward, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], self);
        beam_splitter_transform(BsDirection::Backward, [to_iii * r_iii, to_iv * r_iv], self)
    }
}

pub fn beam_splitter_transform(direction: BsDirection, amps: [C64; 2], conv: &BeamSplitterConvention) -> [C64; 2] {
    let m = match direction {
        BsDirection::Forward => &conv.forward,
        BsDirection::Backward => &conv.backward,
    };
    [m[(0, 0)] * amps[0] + m[(0, 1)] * amps[1], m[(1, 0)] * amps[0] + m[(1, 1)] * amps[1]]
}

/// What is learned from one detector click.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldBranch {
    pub label: String,
    /// Click probability, including detector efficiency.
    pub probability: f64,
    /// `None` when the click (almost) never happens.
    pub state: Option<TwoQubitState>,
    pub concurrence: Option<f64>,
    /// Output envelope attached to each atomic basis state.
    pub envelopes: [PulseEnvelope; 4],
}

impl HeraldBranch {
    fn assemble(label: &str, envelopes: [PulseEnvelope; 4], efficiency: f64) -> Result<Self> {
        let (state, raw) = match assemble_heralded_state(&envelopes) {
            Ok((state, p)) => (Some(state), p),
            Err(Error::VanishingProbability(p)) => (None, p),
            Err(e) => return Err(e),
        };
        let concurrence = state.as_ref().map(concurrence);
        Ok(Self { label: label.to_string(), probability: raw * efficiency, state, concurrence, envelopes })
    }

    pub fn purity(&self) -> Option<f64> {
        self.state.as_ref().map(purity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub kind: ProtocolKind,
    pub branches: Vec<HeraldBranch>,
    pub total_probability: f64,
    /// Probability of any click when the atoms start in each basis state
    /// `|11⟩, |12⟩, |21⟩, |22⟩`.
    pub basis_probabilities: [f64; 4],
    pub params: CavityParams,
    pub tau_p: Option<f64>,
    pub weights: AtomWeights,
}

impl ProtocolOutcome {
    pub fn branch(&self, label: &str) -> Option<&HeraldBranch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn cooperativity(&self) -> f64 {
        self.params.cooperativity()
    }
}

/// Output envelopes for a unit input, one per requested sector, evaluated
/// concurrently.
fn sector_outputs(params: &CavityParams, input: &PulseEnvelope, sectors: &[u32]) -> Result<Vec<PulseEnvelope>> {
    sectors
        .par_iter()
        .map(|&m| evolve_sector(m, params, input).map(|t| t.alpha_out))
        .collect()
}

/// Both atoms in one cavity; the click heralds
/// `ρ ∝ Σ ∫ A_{kℓ} A_{pq}* |kℓ⟩⟨pq|` with `A_{kℓ} = w_{kℓ} α_out^{(M)}`.
pub fn run_same_cavity(params: &CavityParams, pulse: &PulseEnvelope, weights: &AtomWeights) -> Result<ProtocolOutcome> {
    params.validate()?;
    let outputs = sector_outputs(params, pulse, &[0, 1, 2])?;
    let w = weights.amplitudes();
    let envelopes: [PulseEnvelope; 4] =
        std::array::from_fn(|i| outputs[COUPLED_COUNT[i] as usize].scaled(w[i]));
    let eff = params.detector_efficiency;
    let branch = HeraldBranch::assemble("D", envelopes, eff)?;
    let basis_probabilities = COUPLED_COUNT.map(|m| envelope_norm(&outputs[m as usize]) * eff);
    Ok(ProtocolOutcome {
        kind: ProtocolKind::SameCavity,
        total_probability: branch.probability,
        branches: vec![branch],
        basis_probabilities,
        params: *params,
        tau_p: pulse.tau_p(),
        weights: *weights,
    })
}

/// Pointwise beam-splitter round trip for each atomic basis state `|kℓ⟩`,
/// where cavity A (arm III) responds with `arm_a[k-1]` and cavity B (arm
/// IV) with `arm_b[ℓ-1]`. Returns the port-I and port-II branch envelopes.
fn parallel_circuit(
    arm_a: [&PulseEnvelope; 2],
    arm_b: [&PulseEnvelope; 2],
    weights: &AtomWeights,
    conv: &BeamSplitterConvention,
) -> Result<[[PulseEnvelope; 4]; 2]> {
    let grid = *arm_a[0].grid();
    if arm_a.iter().chain(arm_b.iter()).any(|e| *e.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let mut ports: [Vec<Vec<C64>>; 2] = [Vec::with_capacity(4), Vec::with_capacity(4)];
    for k in 1..=2u8 {
        for l in 1..=2u8 {
            let w = weights.get(k, l);
            let (a, b) = (arm_a[k as usize - 1].amplitudes(), arm_b[l as usize - 1].amplitudes());
            let (mut d1, mut d2) = (Vec::with_capacity(a.len()), Vec::with_capacity(a.len()));
            for (&ra, &rb) in a.iter().zip(b) {
                let [p1, p2] = conv.round_trip(ra, rb);
                d1.push(w * p1);
                d2.push(w * p2);
            }
            ports[0].push(d1);
            ports[1].push(d2);
        }
    }
    let [d1, d2] = ports;
    let wrap = |v: Vec<Vec<C64>>| -> Result<[PulseEnvelope; 4]> {
        let mut it = v.into_iter().map(|amp| PulseEnvelope::from_samples(grid, amp));
        Ok([it.next().unwrap()?, it.next().unwrap()?, it.next().unwrap()?, it.next().unwrap()?])
    };
    Ok([wrap(d1)?, wrap(d2)?])
}

/// One atom in each of two identical cavities, interfered on a beam
/// splitter. Weights must describe independently prepared atoms.
pub fn run_remote(params: &CavityParams, pulse: &PulseEnvelope, weights: &AtomWeights) -> Result<ProtocolOutcome> {
    run_remote_with(params, params, pulse, weights, &BeamSplitterConvention::default())
}

/// [`run_remote`] with separate parameters for cavity A (arm III) and
/// cavity B (arm IV). Detector efficiency is taken from cavity A.
pub fn run_remote_with(
    params_a: &CavityParams,
    params_b: &CavityParams,
    pulse: &PulseEnvelope,
    weights: &AtomWeights,
    conv: &BeamSplitterConvention,
) -> Result<ProtocolOutcome> {
    if !weights.is_product() {
        return Err(Error::InvalidWeights("remote atoms must start in a product state".into()));
    }
    params_a.validate()?;
    params_b.validate()?;
    // arm index 0 ↔ atom in |1⟩ (one coupled atom), 1 ↔ |2⟩ (empty cavity)
    let arm_a = sector_outputs(params_a, pulse, &[1, 0])?;
    let arm_b = if params_a == params_b { arm_a.clone() } else { sector_outputs(params_b, pulse, &[1, 0])? };
    let [d1, d2] = parallel_circuit([&arm_a[0], &arm_a[1]], [&arm_b[0], &arm_b[1]], weights, conv)?;

    let eff = params_a.detector_efficiency;
    let d1 = HeraldBranch::assemble("D1", d1, eff)?;
    let d2 = HeraldBranch::assemble("D2", d2, eff)?;
    let basis_probabilities: [f64; 4] = std::array::from_fn(|i| {
        let (k, l) = (i / 2, i % 2);
        0.5 * (envelope_norm(&arm_a[k]) + envelope_norm(&arm_b[l])) * eff
    });
    Ok(ProtocolOutcome {
        kind: ProtocolKind::Remote,
        total_probability: d1.probability + d2.probability,
        branches: vec![d1, d2],
        basis_probabilities,
        params: *params_a,
        tau_p: pulse.tau_p(),
        weights: *weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloudMode {
    /// Perfect phase flip: reflection −1 if any atom is coupled, +1 otherwise.
    Ideal,
    /// Reflection envelopes from the collective sectors `M = N` and `M = 0`.
    FiniteC,
}

impl std::str::FromStr for CloudMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ideal" => Ok(CloudMode::Ideal),
            "finite-c" => Ok(CloudMode::FiniteC),
            other => Err(format!("unknown cloud mode '{other}'")),
        }
    }
}

/// Two clouds of `n_a` and `n_b` atoms, each prepared in
/// `(|1⟩^⊗N + e^{iφ}|2⟩^⊗N)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    pub n_a: u32,
    pub n_b: u32,
    pub phi_a: f64,
    pub phi_b: f64,
    pub mode: CloudMode,
}

impl CloudSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_b == 0 {
            return Err(Error::InvalidCloud("clouds need at least one atom".into()));
        }
        if !self.phi_a.is_finite() || !self.phi_b.is_finite() {
            return Err(Error::InvalidCloud("GHZ phases must be finite".into()));
        }
        Ok(())
    }

    /// Cloud amplitudes on `|1…1⟩ ⊗ |1…1⟩, |1…1⟩ ⊗ |2…2⟩, ...`.
    pub fn weights(&self) -> AtomWeights {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = [C64::new(h, 0.0), C64::from_polar(h, self.phi_a)];
        let v = [C64::new(h, 0.0), C64::from_polar(h, self.phi_b)];
        AtomWeights::product(u, v).expect("GHZ weights are normalized")
    }
}

/// Heralded cloud state in the effective two-qubit basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudBranch {
    pub label: String,
    pub probability: f64,
    pub state: Option<TwoQubitState>,
    /// Pure-state amplitudes `a_{kℓ}` (row: cloud A, column: cloud B); in
    /// finite-C mode the dominant eigenvector of the heralded state.
    pub amplitudes: Option<Matrix2<C64>>,
    pub schmidt_entropy: Option<f64>,
    pub concurrence: Option<f64>,
    pub purity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudOutcome {
    pub spec: CloudSpec,
    pub branches: Vec<CloudBranch>,
    pub total_probability: f64,
    pub params: CavityParams,
    pub tau_p: Option<f64>,
}

impl CloudOutcome {
    pub fn branch(&self, label: &str) -> Option<&CloudBranch> {
        self.branches.iter().find(|b| b.label == label)
    }
}

fn pure_cloud_branch(label: &str, amps: [C64; 4], efficiency: f64) -> Result<CloudBranch> {
    let p: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if p <= crate::quantum::MIN_HERALD_PROBABILITY {
        return Ok(CloudBranch {
            label: label.into(),
            probability: p * efficiency,
            state: None,
            amplitudes: None,
            schmidt_entropy: None,
            concurrence: None,
            purity: None,
        });
    }
    let psi = amps.map(|z| z / p.sqrt());
    let matrix = Matrix2::new(psi[0], psi[1], psi[2], psi[3]);
    let state = TwoQubitState::pure(psi)?;
    Ok(CloudBranch {
        label: label.into(),
        probability: p * efficiency,
        concurrence: Some(concurrence(&state)),
        purity: Some(1.0),
        schmidt_entropy: Some(schmidt_entropy_2d(&matrix)?),
        amplitudes: Some(matrix),
        state: Some(state),
    })
}

fn mixed_cloud_branch(branch: HeraldBranch) -> Result<CloudBranch> {
    let (amplitudes, schmidt_entropy, purity) = match &branch.state {
        Some(state) => {
            let v = state.dominant_eigenvector();
            let m = Matrix2::new(v[0], v[1], v[2], v[3]);
            let m = m / C64::new(m.norm(), 0.0);
            (Some(m), Some(schmidt_entropy_2d(&m)?), Some(crate::quantum::purity(state)))
        }
        None => (None, None, None),
    };
    Ok(CloudBranch {
        label: branch.label,
        probability: branch.probability,
        concurrence: branch.concurrence,
        state: branch.state,
        amplitudes,
        schmidt_entropy,
        purity,
    })
}

/// Entangles two GHZ-prepared clouds with the remote parallel circuit.
pub fn run_ghz_cloud(spec: &CloudSpec, params: &CavityParams, pulse: &PulseEnvelope) -> Result<CloudOutcome> {
    spec.validate()?;
    params.validate()?;
    let weights = spec.weights();
    let conv = BeamSplitterConvention::default();
    let eff = params.detector_efficiency;
    let branches = match spec.mode {
        CloudMode::Ideal => {
            // index 0: all atoms coupled, index 1: all atoms dark
            let r = [C64::new(-1.0, 0.0), C64::new(1.0, 0.0)];
            let mut d1 = [C64::new(0.0, 0.0); 4];
            let mut d2 = [C64::new(0.0, 0.0); 4];
            for k in 1..=2u8 {
                for l in 1..=2u8 {
                    let i = basis_index(k, l);
                    let [p1, p2] = conv.round_trip(r[k as usize - 1], r[l as usize - 1]);
                    d1[i] = weights.get(k, l) * p1;
                    d2[i] = weights.get(k, l) * p2;
                }
            }
            vec![pure_cloud_branch("D1", d1, eff)?, pure_cloud_branch("D2", d2, eff)?]
        }
        CloudMode::FiniteC => {
            let arm_a = sector_outputs(params, pulse, &[spec.n_a, 0])?;
            let arm_b = sector_outputs(params, pulse, &[spec.n_b, 0])?;
            let [d1, d2] = parallel_circuit([&arm_a[0], &arm_a[1]], [&arm_b[0], &arm_b[1]], &weights, &conv)?;
            vec![
                mixed_cloud_branch(HeraldBranch::assemble("D1", d1, eff)?)?,
                mixed_cloud_branch(HeraldBranch::assemble("D2", d2, eff)?)?,
            ]
        }
    };
    Ok(CloudOutcome {
        spec: *spec,
        total_probability: branches.iter().map(|b| b.probability).sum(),
        branches,
        params: *params,
        tau_p: pulse.tau_p(),
    })
}
