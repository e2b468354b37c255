//! Scattering of a single-photon wavepacket off a single-sided cavity that
//! holds `M` atoms in the coupled ground state `|1⟩`.
//!
//! With a single excitation in the system, the atoms only ever reach the
//! symmetric collective excited state, so a sector is described by two
//! amplitudes: `c_cav` (one photon inside the cavity) and `c_exc` (one
//! collective atomic excitation). Spontaneous emission is a non-Hermitian
//! decay at rate Γ3 = Γ31 + Γ32, and the reservoir has been eliminated in
//! the Markov limit, which leaves
//!
//! ```text
//! ċ_cav = -κ c_cav - i g√M c_exc + √(2κ) α_in(t)
//! ċ_exc = -Γ3 c_exc - i g√M c_cav
//! α_out = √(2κ) c_cav - α_in
//! ```
//!
//! [`evolve_sector`] integrates these with fixed-step RK4. The other two
//! entry points are independent checks of it: [`semianalytic_output`] is the
//! closed-form convolution valid at Γ3 = κ and [`frequency_reflection`] is
//! the monochromatic steady state. Frequencies follow the `e^{-iωt}`
//! convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{PulseEnvelope, TimeGrid, MIN_POINTS_PER_TAU, WINDOW_HALF_WIDTHS};
use crate::C64;

/// Largest allowed amplitude left in the system at the end of the window.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Bound on `dt·ρ` below which RK4 is stable for any eigenvalue of modulus
/// at most `ρ` in the left half plane.
const RK4_STABILITY: f64 = 2.5;

const I: C64 = C64::new(0.0, 1.0);

/// Rates of one atom–cavity system, in units of κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub detector_efficiency: f64,
}

impl CavityParams {
    pub fn new(g: f64, gamma31: f64, gamma32: f64) -> Result<Self> {
        let p = Self { g, kappa: 1.0, gamma31, gamma32, detector_efficiency: 1.0 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with a given cooperativity `C = g²/(2κΓ3)` and total
    /// atomic decay Γ3, split evenly between the two channels.
    pub fn from_cooperativity(c: f64, gamma3: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("cooperativity must be >= 0, got {c}")));
        }
        if !(gamma3 > 0.0 && gamma3.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "a finite cooperativity needs gamma3 > 0, got {gamma3}"
            )));
        }
        Self::new((2.0 * gamma3 * c).sqrt(), 0.5 * gamma3, 0.5 * gamma3)
    }

    pub fn with_detector_efficiency(mut self, eff: f64) -> Result<Self> {
        self.detector_efficiency = eff;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParams(format!("{what} = {v}")));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be positive, got kappa", self.kappa);
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return bad("g must be non-negative, got g", self.g);
        }
        if !(self.gamma31 >= 0.0 && self.gamma31.is_finite()) {
            return bad("gamma31 must be non-negative, got gamma31", self.gamma31);
        }
        if !(self.gamma32 >= 0.0 && self.gamma32.is_finite()) {
            return bad("gamma32 must be non-negative, got gamma32", self.gamma32);
        }
        if !(0.0..=1.0).contains(&self.detector_efficiency) {
            return bad("detector efficiency must lie in [0, 1], got", self.detector_efficiency);
        }
        Ok(())
    }

    pub fn gamma3(&self) -> f64 {
        self.gamma31 + self.gamma32
    }

    /// `g²/(2κΓ3)`; infinite for a lossless atom with nonzero coupling.
    pub fn cooperativity(&self) -> f64 {
        let gamma3 = self.gamma3();
        if gamma3 > 0.0 {
            self.g * self.g / (2.0 * self.kappa * gamma3)
        } else if self.g > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    /// Collective coupling `g√M` of a sector.
    pub fn collective_coupling(&self, m: u32) -> f64 {
        self.g * (m as f64).sqrt()
    }

    /// Smallest decay rate among the normal modes of a sector.
    pub fn slowest_decay_rate(&self, m: u32) -> f64 {
        let coupling = self.collective_coupling(m);
        if coupling == 0.0 {
            return self.kappa;
        }
        let mean = 0.5 * (self.kappa + self.gamma3());
        let half_diff = 0.5 * (self.kappa - self.gamma3());
        let disc = half_diff * half_diff - coupling * coupling;
        if disc >= 0.0 {
            mean - disc.sqrt()
        } else {
            mean
        }
    }
}

/// How to lay out the simulation window around a Gaussian pulse.
///
/// The default window is `[t0 - 4τ_p, t0 + 8τ_p + ring-down]` with a step
/// that resolves the pulse, the fastest Rabi oscillation and the atomic
/// decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tau_p: f64,
    pub t0: f64,
    /// Step override.
    pub dt: Option<f64>,
    /// Total window length override.
    pub span: Option<f64>,
}

impl GridSpec {
    pub fn new(tau_p: f64, t0: f64) -> Self {
        Self { tau_p, t0, dt: None, span: None }
    }

    pub fn default_dt(&self, params: &CavityParams, m_max: u32) -> f64 {
        let mut dt = 0.01f64.min(self.tau_p / (2.5 * MIN_POINTS_PER_TAU));
        let coupling = params.collective_coupling(m_max);
        if coupling > 0.0 {
            dt = dt.min(1.0 / (50.0 * coupling));
        }
        if params.gamma3() > 0.0 {
            dt = dt.min(1.0 / (50.0 * params.gamma3()));
        }
        dt.min(1.0 / (50.0 * params.kappa))
    }

    /// Time after the pulse tail for every sector up to `m_max` to ring down
    /// well below [`RESIDUAL_TOLERANCE`].
    pub fn ring_down(params: &CavityParams, m_max: u32) -> f64 {
        let slowest = (0..=m_max).map(|m| params.slowest_decay_rate(m)).fold(f64::INFINITY, f64::min);
        20.0f64.max(20.0 / slowest)
    }

    pub fn build(&self, params: &CavityParams, m_max: u32) -> Result<TimeGrid> {
        let start = self.t0 - WINDOW_HALF_WIDTHS * self.tau_p;
        let end = match self.span {
            Some(span) => start + span,
            None => self.t0 + 8.0 * self.tau_p + Self::ring_down(params, m_max),
        };
        let dt = self.dt.unwrap_or_else(|| self.default_dt(params, m_max));
        TimeGrid::spanning(start, end, dt)
    }
}

/// Amplitudes of one sector over the time grid, plus the scattered envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorTrajectory {
    pub m: u32,
    pub c_cav: Vec<C64>,
    pub c_exc: Vec<C64>,
    pub alpha_out: PulseEnvelope,
}

impl SectorTrajectory {
    /// Population still inside the cavity or the atoms at the last grid point.
    pub fn residual_population(&self) -> f64 {
        self.c_cav.last().map_or(0.0, |c| c.norm_sqr())
            + self.c_exc.last().map_or(0.0, |c| c.norm_sqr())
    }
}

/// Integrates the sector equations with RK4 from empty initial amplitudes
/// and applies the input–output relation. Detector efficiency is not
/// applied here.
pub fn evolve_sector(m: u32, params: &CavityParams, input: &PulseEnvelope) -> Result<SectorTrajectory> {
    params.validate()?;
    let grid = *input.grid();
    let kappa = params.kappa;
    let gamma3 = params.gamma3();
    let coupling = params.collective_coupling(m);
    let drive = (2.0 * kappa).sqrt();
    let dt = grid.dt();
    let n = grid.n_points();
    let stable_dt = RK4_STABILITY / (kappa.max(gamma3) + coupling);
    if dt > stable_dt {
        return Err(Error::InvalidGrid(format!("dt={dt} exceeds the RK4 stability limit {stable_dt:.4} for M={m}")));
    }

    let rhs = |cav: C64, exc: C64, a_in: C64| -> (C64, C64) {
        (
            -kappa * cav - I * coupling * exc + drive * a_in,
            -gamma3 * exc - I * coupling * cav,
        )
    };

    let mut c_cav = Vec::with_capacity(n);
    let mut c_exc = Vec::with_capacity(n);
    let (mut cav, mut exc) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    c_cav.push(cav);
    c_exc.push(exc);

    let mut a_now = input.eval(grid.time(0));
    for i in 0..n - 1 {
        let t = grid.time(i);
        let a_mid = input.eval(t + 0.5 * dt);
        let a_next = input.eval(grid.time(i + 1));

        let (k1c, k1e) = rhs(cav, exc, a_now);
        let (k2c, k2e) = rhs(cav + 0.5 * dt * k1c, exc + 0.5 * dt * k1e, a_mid);
        let (k3c, k3e) = rhs(cav + 0.5 * dt * k2c, exc + 0.5 * dt * k2e, a_mid);
        let (k4c, k4e) = rhs(cav + dt * k3c, exc + dt * k3e, a_next);
        cav += dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        exc += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);

        c_cav.push(cav);
        c_exc.push(exc);
        a_now = a_next;
    }

    let cav_end = cav.norm();
    let exc_end = exc.norm();
    if !(cav_end < RESIDUAL_TOLERANCE && exc_end < RESIDUAL_TOLERANCE) {
        return Err(Error::NonConvergent { m, cav: cav_end, exc: exc_end });
    }

    let out: Vec<C64> = c_cav
        .iter()
        .zip(input.amplitudes())
        .map(|(c, a)| drive * c - a)
        .collect();
    let alpha_out = PulseEnvelope::from_samples(grid, out)?;
    Ok(SectorTrajectory { m, c_cav, c_exc, alpha_out })
}

/// Output envelope from the closed-form response at Γ3 = κ,
///
/// `α_out(t) = 2κ ∫_{-∞}^{t} cos(g√M (t-s)) e^{-κ(t-s)} α_in(s) ds - α_in(t)`.
///
/// The kernel is split into two complex exponentials, each propagated
/// exactly from one grid point to the next with Simpson's rule for the
/// freshly injected slice of input.
pub fn semianalytic_output(m: u32, params: &CavityParams, input: &PulseEnvelope) -> Result<PulseEnvelope> {
    params.validate()?;
    let kappa = params.kappa;
    if (params.gamma3() - kappa).abs() >= 1e-12 {
        return Err(Error::InvalidRegime { gamma3: params.gamma3(), kappa });
    }
    let grid = *input.grid();
    let h = grid.dt();
    let coupling = params.collective_coupling(m);
    let rates = [C64::new(-kappa, coupling), C64::new(-kappa, -coupling)];
    let full: [C64; 2] = rates.map(|l| (l * h).exp());
    let half: [C64; 2] = rates.map(|l| (l * 0.5 * h).exp());

    let mut acc = [C64::new(0.0, 0.0); 2];
    let mut out = Vec::with_capacity(grid.n_points());
    out.push(kappa * (acc[0] + acc[1]) - input.eval(grid.time(0)));
    let mut a_now = input.eval(grid.time(0));
    for i in 0..grid.n_points() - 1 {
        let t = grid.time(i);
        let a_mid = input.eval(t + 0.5 * h);
        let a_next = input.eval(grid.time(i + 1));
        for k in 0..2 {
            let slice = h / 6.0 * (full[k] * a_now + 4.0 * half[k] * a_mid + a_next);
            acc[k] = full[k] * acc[k] + slice;
        }
        // 2κ cos(x) = κ (e^{ix} + e^{-ix})
        out.push(kappa * (acc[0] + acc[1]) - a_next);
        a_now = a_next;
    }
    PulseEnvelope::from_samples(grid, out)
}

/// Reflection coefficient of the sector for a monochromatic input at
/// detuning `omega` from the cavity resonance,
/// `r_M(ω) = 2κ / (κ - iω + M g²/(Γ3 - iω)) - 1`.
pub fn frequency_reflection(m: u32, params: &CavityParams, omega: f64) -> C64 {
    let kappa = params.kappa;
    let gamma3 = params.gamma3();
    let coupling_sq = params.g * params.g * m as f64;
    let mut denom = C64::new(kappa, -omega);
    if coupling_sq > 0.0 {
        let atom = C64::new(gamma3, -omega);
        if atom.norm() == 0.0 {
            // the atomic pole sits exactly on resonance: the cavity cannot be entered
            return C64::new(-1.0, 0.0);
        }
        denom += coupling_sq / atom;
    }
    2.0 * kappa / denom - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unstable_step_is_rejected() {
        let params = CavityParams::from_cooperativity(3.0, 1.0).unwrap();
        let grid = GridSpec { dt: Some(2.0), ..GridSpec::new(50.0, 0.0) }.build(&params, 2).unwrap();
        let pulse = gaussian_pulse(50.0, 0.0, grid).unwrap();
        assert!(matches!(evolve_sector(2, &params, &pulse), Err(Error::InvalidGrid(_))));
        assert!(evolve_sector(0, &params, &pulse).is_ok());
    }
    use crate::pulse::{envelope_norm, gaussian_pulse, overlap};
    use approx::assert_abs_diff_eq;

    fn pulse_for(params: &CavityParams, tau_p: f64, m_max: u32) -> PulseEnvelope {
        let grid = GridSpec::new(tau_p, 0.0).build(params, m_max).unwrap();
        gaussian_pulse(tau_p, 0.0, grid).unwrap()
    }

    #[test]
    fn cooperativity_round_trip() {
        let p = CavityParams::from_cooperativity(3.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.g, 6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.cooperativity(), 3.0, epsilon = 1e-14);
        assert_eq!(CavityParams::new(1.0, 0.0, 0.0).unwrap().cooperativity(), f64::INFINITY);
        assert!(CavityParams::from_cooperativity(1.0, 0.0).is_err());
        assert!(CavityParams::new(-1.0, 0.5, 0.5).is_err());
        assert!(CavityParams::new(1.0, 0.5, 0.5).unwrap().with_detector_efficiency(1.5).is_err());
    }

    #[test]
    fn only_total_decay_matters() {
        let split_a = CavityParams::new(2.0, 0.9, 0.1).unwrap();
        let split_b = CavityParams::new(2.0, 0.2, 0.8).unwrap();
        let input = pulse_for(&split_a, 20.0, 1);
        let a = evolve_sector(1, &split_a, &input).unwrap();
        let b = evolve_sector(1, &split_b, &input).unwrap();
        assert_eq!(a.alpha_out, b.alpha_out);
    }

    #[test]
    fn sector_suppression_at_half_collective_cooperativity() {
        for &(m, c) in &[(1u32, 0.5), (2, 0.25)] {
            let params = CavityParams::from_cooperativity(c, 1.0).unwrap();
            let input = pulse_for(&params, 50.0, m);
            let traj = evolve_sector(m, &params, &input).unwrap();
            assert!(envelope_norm(&traj.alpha_out) <= 0.01, "M={m}, C={c}");
        }
    }

    #[test]
    fn empty_sector_transmits_without_phase() {
        for &c in &[0.1, 3.0, 50.0] {
            let params = CavityParams::from_cooperativity(c, 1.0).unwrap();
            let input = pulse_for(&params, 50.0, 2);
            let traj = evolve_sector(0, &params, &input).unwrap();
            assert_abs_diff_eq!(envelope_norm(&traj.alpha_out), 1.0, epsilon = 1e-4);
            let ov = overlap(&traj.alpha_out, &input).unwrap();
            assert!(ov.re >= 0.99 && ov.im.abs() < 1e-6, "overlap {ov}");
        }
    }

    #[test]
    fn zero_coupling_equals_empty_sector() {
        let params = CavityParams::new(0.0, 0.5, 0.5).unwrap();
        let input = pulse_for(&params, 20.0, 2);
        let empty = evolve_sector(0, &params, &input).unwrap();
        for m in 1..=3 {
            let traj = evolve_sector(m, &params, &input).unwrap();
            assert_eq!(traj.alpha_out, empty.alpha_out);
            assert!(traj.c_exc.iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn short_window_is_reported() {
        // weak lossless coupling leaves a slow polariton with rate g²/κ
        let params = CavityParams::new(0.05, 0.0, 0.0).unwrap();
        let tight = GridSpec { span: Some(8.0 * 5.0 + 1.0), ..GridSpec::new(5.0, 0.0) };
        let input = gaussian_pulse(5.0, 0.0, tight.build(&params, 1).unwrap()).unwrap();
        assert!(matches!(evolve_sector(1, &params, &input), Err(Error::NonConvergent { m: 1, .. })));

        let roomy = pulse_for(&params, 5.0, 1);
        let traj = evolve_sector(1, &params, &roomy).unwrap();
        assert!(traj.residual_population() < 1e-12);
    }

    #[test]
    fn lossless_scattering_conserves_the_photon() {
        let params = CavityParams::new(6f64.sqrt(), 0.0, 0.0).unwrap();
        let input = pulse_for(&params, 50.0, 2);
        for m in 0..=2 {
            let traj = evolve_sector(m, &params, &input).unwrap();
            let total = envelope_norm(&traj.alpha_out) + traj.residual_population();
            assert_abs_diff_eq!(total, envelope_norm(&input), epsilon = 1e-6);
        }
    }

    #[test]
    fn closed_form_requires_matched_decay() {
        let params = CavityParams::from_cooperativity(3.0, 2.0).unwrap();
        let input = pulse_for(&params, 50.0, 1);
        assert!(matches!(
            semianalytic_output(1, &params, &input),
            Err(Error::InvalidRegime { .. })
        ));
    }

    #[test]
    fn closed_form_matches_integrator() {
        let params = CavityParams::from_cooperativity(3.0, 1.0).unwrap();
        let input = pulse_for(&params, 50.0, 2);
        for m in 0..=2 {
            let ode = evolve_sector(m, &params, &input).unwrap();
            let closed = semianalytic_output(m, &params, &input).unwrap();
            let max_diff = ode
                .alpha_out
                .amplitudes()
                .iter()
                .zip(closed.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(max_diff < 1e-5, "M={m}: {max_diff:e}");
        }
    }

    #[test]
    fn closed_form_kernel_frequency_is_collective() {
        // With a delta-like kick the response is 2κ cos(g√M t) e^{-κt}.
        let params = CavityParams::from_cooperativity(3.0, 1.0).unwrap();
        let grid = TimeGrid::spanning(-1.0, 40.0, 1e-3).unwrap();
        let mut samples = vec![C64::new(0.0, 0.0); grid.n_points()];
        let kick = 1000;
        samples[kick] = C64::new(1.0 / grid.dt(), 0.0);
        let impulse = PulseEnvelope::from_samples(grid, samples).unwrap();
        let out = semianalytic_output(2, &params, &impulse).unwrap();
        let freq = params.g * 2f64.sqrt();
        for i in (kick + 2000..grid.n_points()).step_by(3001) {
            let tau = grid.time(i) - grid.time(kick);
            let expected = 2.0 * (freq * tau).cos() * (-tau).exp();
            // the kick is smeared over one step by linear interpolation
            assert_abs_diff_eq!(out.amplitudes()[i].re, expected, epsilon = 5e-3 * (-tau).exp() + 1e-12);
        }
    }

    #[test]
    fn monochromatic_reflection() {
        let any = CavityParams::from_cooperativity(7.0, 1.0).unwrap();
        assert_abs_diff_eq!(frequency_reflection(0, &any, 0.0).re, 1.0, epsilon = 1e-15);
        let half = CavityParams::from_cooperativity(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(frequency_reflection(1, &half, 0.0).norm(), 0.0, epsilon = 1e-15);
        let three = CavityParams::from_cooperativity(3.0, 1.0).unwrap();
        assert_abs_diff_eq!(frequency_reflection(1, &three, 0.0).re, -5.0 / 7.0, epsilon = 1e-14);
        let huge = CavityParams::from_cooperativity(1e9, 1.0).unwrap();
        assert_abs_diff_eq!(frequency_reflection(1, &huge, 0.0).re, -1.0, epsilon = 1e-8);
        let lossless = CavityParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(frequency_reflection(1, &lossless, 0.0), C64::new(-1.0, 0.0));
    }

    #[test]
    fn reflection_depends_only_on_cooperativity_at_resonance() {
        let a = CavityParams::new(6f64.sqrt(), 1.0, 0.0).unwrap();
        let b = CavityParams::new(12f64.sqrt(), 2.0, 0.0).unwrap();
        for m in 0..=2 {
            let (ra, rb) = (frequency_reflection(m, &a, 0.0), frequency_reflection(m, &b, 0.0));
            assert!((ra - rb).norm() < 1e-15, "M={m}: {ra} vs {rb}");
        }
    }

    #[test]
    fn lossless_reflection_is_all_pass() {
        let params = CavityParams::new(2.3, 0.0, 0.0).unwrap();
        for m in 0..=3 {
            for k in -40..=40 {
                let r = frequency_reflection(m, &params, k as f64 * 0.37);
                assert_abs_diff_eq!(r.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn long_pulse_limit_approaches_monochromatic_reflection() {
        let params = CavityParams::from_cooperativity(3.0, 1.0).unwrap();
        let input = pulse_for(&params, 200.0, 2);
        for m in 0..=2 {
            let traj = evolve_sector(m, &params, &input).unwrap();
            let ratio = overlap(&input, &traj.alpha_out).unwrap() / envelope_norm(&input);
            let r0 = frequency_reflection(m, &params, 0.0);
            assert!((ratio.re - r0.re).abs() < 5e-3, "M={m}: {ratio} vs {r0}");
        }
    }

    /// Unreduced |11⟩ sector: the cavity couples to both c13 and c31.
    fn evolve_unreduced_pair(params: &CavityParams, input: &PulseEnvelope) -> (Vec<C64>, Vec<[C64; 2]>) {
        let grid = *input.grid();
        let (kappa, gamma3, g) = (params.kappa, params.gamma3(), params.g);
        let drive = (2.0 * kappa).sqrt();
        let f = |y: [C64; 3], a: C64| -> [C64; 3] {
            [
                -kappa * y[0] - I * g * y[1] - I * g * y[2] + drive * a,
                -gamma3 * y[1] - I * g * y[0],
                -gamma3 * y[2] - I * g * y[0],
            ]
        };
        let add = |y: [C64; 3], k: [C64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
        let dt = grid.dt();
        let mut y = [C64::new(0.0, 0.0); 3];
        let mut cav = vec![y[0]];
        let mut atoms = vec![[y[1], y[2]]];
        for i in 0..grid.n_points() - 1 {
            let t = grid.time(i);
            let (a0, am, a1) = (input.eval(t), input.eval(t + 0.5 * dt), input.eval(t + dt));
            let k1 = f(y, a0);
            let k2 = f(add(y, k1, 0.5 * dt), am);
            let k3 = f(add(y, k2, 0.5 * dt), am);
            let k4 = f(add(y, k3, dt), a1);
            for j in 0..3 {
                y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            cav.push(y[0]);
            atoms.push([y[1], y[2]]);
        }
        (cav, atoms)
    }

    #[test]
    fn unreduced_pair_sector_is_symmetric_and_matches_reduction() {
        let params = CavityParams::from_cooperativity(1.0, 1.0).unwrap();
        let input = pulse_for(&params, 20.0, 2);
        let (cav, atoms) = evolve_unreduced_pair(&params, &input);
        let reduced = evolve_sector(2, &params, &input).unwrap();
        for (i, [c13, c31]) in atoms.iter().enumerate() {
            assert!((c13 - c31).norm() < 1e-10);
            let symmetric = (c13 + c31) / 2f64.sqrt();
            assert!((symmetric - reduced.c_exc[i]).norm() < 1e-10);
            assert!((cav[i] - reduced.c_cav[i]).norm() < 1e-10);
        }
    }
}
