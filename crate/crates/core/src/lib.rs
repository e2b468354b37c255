//! Simulation of heralded atom–atom entanglement generated by scattering a
//! single photon off single-sided optical cavities.
//!
//! Units: the cavity field decay rate κ is fixed to 1, so every rate is in
//! units of κ and every time in units of κ⁻¹.
//!
//! Two-atom states always use the ordered basis `|11⟩, |12⟩, |21⟩, |22⟩`,
//! where `|1⟩` is the cavity-coupled ground state and `|2⟩` the dark one.
//!
//! The crate is layered bottom-up:
//!
//! * [`pulse`]: time grids and single-photon temporal envelopes.
//! * [`dynamics`]: amplitude equations for one coupling sector, the
//!   input–output relation, and two independent oracles for them.
//! * [`quantum`]: heralded density matrices and entanglement measures.
//! * [`protocols`]: same-cavity, remote-cavity and GHZ-cloud protocols.
//! * [`sweep`]: parameter sweeps producing tabular data.

pub mod dynamics;
pub mod error;
pub mod protocols;
pub mod pulse;
pub mod quantum;
pub mod sweep;

pub use num_complex::Complex64 as C64;

pub use dynamics::{
    evolve_sector, frequency_reflection, semianalytic_output, CavityParams, GridSpec,
    SectorTrajectory,
};
pub use error::{Error, Result};
pub use protocols::{
    beam_splitter_transform, run_ghz_cloud, run_remote, run_remote_with, run_same_cavity,
    BeamSplitterConvention, BsDirection, CloudBranch, CloudMode, CloudOutcome, CloudSpec, HeraldBranch, ProtocolKind, ProtocolOutcome,
};
pub use pulse::{envelope_norm, gaussian_pulse, overlap, PulseEnvelope, TimeGrid};
pub use quantum::{
    assemble_heralded_state, concurrence, pure_concurrence, purity, schmidt_entropy_2d,
    AtomWeights, TwoQubitState,
};
pub use sweep::{sweep_cooperativity, sweep_pulse_duration, SweepAxis, SweepSpec, SweepTable};
