//! Self-contained oracle suite behind `caps validate`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use caps_core::dynamics::GridSpec;
use caps_core::protocols::BeamSplitterConvention;
use caps_core::pulse::eta_from_tau;
use caps_core::{
    envelope_norm, evolve_sector, frequency_reflection, gaussian_pulse, overlap, run_ghz_cloud, run_remote,
    run_same_cavity, semianalytic_output, AtomWeights, CavityParams, CloudMode, CloudSpec, PulseEnvelope, Result, C64,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn pulse_for(params: &CavityParams, tau_p: f64, m_max: u32) -> Result<PulseEnvelope> {
    gaussian_pulse(tau_p, 0.0, GridSpec::new(tau_p, 0.0).build(params, m_max)?)
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

fn closed_form() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for c in [0.25, 0.5, 1.0, 3.0, 10.0] {
        let params = CavityParams::from_cooperativity(c, 1.0)?;
        let pulse = pulse_for(&params, 50.0, 2)?;
        for m in 0..=2 {
            let ode = evolve_sector(m, &params, &pulse)?.alpha_out;
            let exact = semianalytic_output(m, &params, &pulse)?;
            worst = worst.max(max_abs(ode.amplitudes().iter().zip(exact.amplitudes()).map(|(a, b)| (a - b).norm())));
        }
    }
    Ok(Check { name: "ODE vs closed-form kernel", passed: worst < 1e-5, detail: format!("max|Δα_out| = {worst:.2e}") })
}

/// `∫ |α̃(ω)|² f(ω) dω` for the Gaussian spectrum of a pulse with width `eta`.
fn spectral_average(eta: f64, f: impl Fn(f64) -> C64) -> C64 {
    let n = 20_000;
    let half = 10.0 / eta;
    let h = 2.0 * half / n as f64;
    (0..=n)
        .map(|i| {
            let w = -half + i as f64 * h;
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            f(w) * (weight * eta / PI.sqrt() * (-(w * eta).powi(2)).exp())
        })
        .sum::<C64>()
        * h
}

fn frequency_domain() -> Result<Check> {
    let tau_p = 10.0;
    let eta = eta_from_tau(tau_p);
    let mut worst: f64 = 0.0;
    for c in [0.25, 1.0, 3.0] {
        let params = CavityParams::from_cooperativity(c, 1.0)?;
        let pulse = pulse_for(&params, tau_p, 2)?;
        for m in 0..=2 {
            let out = evolve_sector(m, &params, &pulse)?.alpha_out;
            let amp = spectral_average(eta, |w| frequency_reflection(m, &params, w));
            let norm = spectral_average(eta, |w| C64::new(frequency_reflection(m, &params, w).norm_sqr(), 0.0)).re;
            worst = worst.max((overlap(&pulse, &out)? - amp).norm()).max((envelope_norm(&out) - norm).abs());
        }
    }
    Ok(Check {
        name: "ODE vs frequency-domain reflection",
        passed: worst < 1e-6,
        detail: format!("max deviation of ⟨α_in|α_out⟩ and ‖α_out‖² = {worst:.2e}"),
    })
}

fn conservation() -> Result<Check> {
    let lossless = CavityParams::new(6f64.sqrt(), 0.0, 0.0)?;
    let pulse = pulse_for(&lossless, 50.0, 2)?;
    let mut norm_dev: f64 = 0.0;
    for m in 0..=2 {
        norm_dev = norm_dev.max((envelope_norm(&evolve_sector(m, &lossless, &pulse)?.alpha_out) - 1.0).abs());
    }
    let mut budget: f64 = 0.0;
    for c in [0.25, 1.0, 3.0] {
        let params = CavityParams::from_cooperativity(c, 1.0)?;
        let pulse = pulse_for(&params, 50.0, 2)?;
        let dt = pulse.grid().dt();
        for m in 0..=2 {
            let tr = evolve_sector(m, &params, &pulse)?;
            let n = tr.c_exc.len();
            let emitted: f64 = tr
                .c_exc
                .iter()
                .enumerate()
                .map(|(i, z)| if i == 0 || i + 1 == n { 0.5 } else { 1.0 } * z.norm_sqr())
                .sum::<f64>()
                * 2.0
                * params.gamma3()
                * dt;
            budget = budget.max((envelope_norm(&tr.alpha_out) + emitted + tr.residual_population() - 1.0).abs());
        }
    }
    Ok(Check {
        name: "photon number conservation",
        passed: norm_dev <= 1e-6 && budget <= 1e-6,
        detail: format!("Γ3=0: {norm_dev:.1e}; reflected+emitted-1: {budget:.1e}"),
    })
}

fn long_pulse_limit() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for c in [1.0, 4.1] {
        let params = CavityParams::from_cooperativity(c, 1.0)?;
        let out = run_same_cavity(&params, &pulse_for(&params, 200.0, 2)?, &AtomWeights::balanced())?;
        let r = |m: f64| (1.0 - 2.0 * m * c) / (1.0 + 2.0 * m * c);
        let expected = (r(2.0).powi(2) + 2.0 * r(1.0).powi(2) + 1.0) / 4.0;
        worst = worst.max((out.total_probability - expected).abs());
    }
    Ok(Check {
        name: "long-pulse success probability",
        passed: worst <= 2e-3,
        detail: format!("max|P_s - (r2²+2r1²+1)/4| = {worst:.1e}"),
    })
}

fn singlet() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for c in [0.1, 1.0, 3.0, 10.0] {
        let params = CavityParams::from_cooperativity(c, 1.0)?;
        let out = run_remote(&params, &pulse_for(&params, 20.0, 1)?, &AtomWeights::balanced())?;
        let e = out.branch("D2").and_then(|b| b.concurrence).unwrap_or(0.0);
        worst = worst.max((e - 1.0).abs());
    }
    Ok(Check { name: "remote D2 singlet", passed: worst <= 1e-9, detail: format!("max|E-1| = {worst:.1e}") })
}

fn beam_splitter() -> Check {
    let conv = BeamSplitterConvention::default();
    let (p, m) = (C64::new(1.0, 0.0), C64::new(-1.0, 0.0));
    let same = conv.round_trip(p, p)[0].norm_sqr();
    let opposite = conv.round_trip(p, m)[1].norm_sqr();
    let inverse = max_abs((conv.backward() * conv.forward()).iter().enumerate().map(|(i, z)| {
        let id = if i % 3 == 0 { 1.0 } else { 0.0 };
        (z - id).norm()
    }));
    let passed = (same - 1.0).abs() < 1e-12 && (opposite - 1.0).abs() < 1e-12 && inverse < 1e-12;
    Check { name: "beam splitter round trip", passed, detail: format!("P(D1|equal)={same:.15}, P(D2|opposite)={opposite:.15}") }
}

fn ghz() -> Result<Check> {
    let params = CavityParams::from_cooperativity(3.0, 1.0)?;
    let pulse = pulse_for(&params, 10.0, 1)?;
    let mut worst: f64 = 0.0;
    for (n_a, n_b, phi_a, phi_b) in [(1, 1, 0.0, 0.0), (2, 5, PI / 2.0, PI), (7, 3, 3.0 * PI / 2.0, FRAC_1_SQRT_2)] {
        let out = run_ghz_cloud(&CloudSpec { n_a, n_b, phi_a, phi_b, mode: CloudMode::Ideal }, &params, &pulse)?;
        for b in &out.branches {
            worst = worst.max((b.schmidt_entropy.unwrap_or(0.0) - 1.0).abs());
        }
    }
    Ok(Check { name: "ideal GHZ clouds", passed: worst <= 1e-12, detail: format!("max|S-1| = {worst:.1e}") })
}

pub fn run_suite() -> Result<Vec<Check>> {
    Ok(vec![
        closed_form()?,
        frequency_domain()?,
        conservation()?,
        long_pulse_limit()?,
        singlet()?,
        beam_splitter(),
        ghz()?,
    ])
}
