//! Single-photon temporal envelopes on uniform time grids.
//!
//! An envelope is the slowly varying amplitude of the photon wavepacket at
//! the cavity resonance frequency, normalized so that `∫|α(t)|² dt` is the
//! probability that the photon is present. Quadratures use the trapezoid
//! rule on the grid.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Minimum number of grid points per FWHM of a Gaussian pulse.
pub const MIN_POINTS_PER_TAU: f64 = 20.0;

/// Half-width, in units of `tau_p`, that the window must cover around the
/// pulse peak.
pub const WINDOW_HALF_WIDTHS: f64 = 4.0;

/// Relative amplitude allowed at the first and last grid points.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

const MIN_POINTS: usize = 16;

/// Uniform time grid `t_i = t_start + i·dt`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n_points: usize) -> Result<Self> {
        if !t_start.is_finite() {
            return Err(Error::InvalidGrid(format!("t_start must be finite, got {t_start}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self { t_start, dt, n_points })
    }

    /// Grid covering `[t_start, t_end]` with step at most `max_dt`. The step
    /// is shrunk slightly so that the window is an integer number of steps.
    pub fn spanning(t_start: f64, t_end: f64, max_dt: f64) -> Result<Self> {
        if t_end.is_nan() || t_start.is_nan() || t_end <= t_start {
            return Err(Error::InvalidGrid(format!("empty window [{t_start}, {t_end}]")));
        }
        if max_dt.is_nan() || max_dt <= 0.0 {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {max_dt}")));
        }
        let steps = ((t_end - t_start) / max_dt).ceil().max(1.0) as usize;
        let dt = (t_end - t_start) / steps as f64;
        Self::new(t_start, dt, steps + 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_points - 1)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }
}

/// Gaussian width parameter η for a given intensity FWHM `tau_p`.
pub fn eta_from_tau(tau_p: f64) -> f64 {
    tau_p / (2.0 * LN_2.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `scale · (η√π)^{-1/2} exp(-(t-t0)²/(2η²))`
    Gaussian { t0: f64, eta: f64, scale: C64 },
    Tabulated,
}

/// Complex temporal envelope sampled on a [`TimeGrid`].
///
/// Gaussian envelopes remember their closed form so that integrators can
/// evaluate them exactly between grid points; tabulated envelopes are
/// linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEnvelope {
    grid: TimeGrid,
    amp: Vec<C64>,
    shape: Shape,
}

/// Unit-norm Gaussian pulse with intensity FWHM `tau_p` peaking at `t0`.
pub fn gaussian_pulse(tau_p: f64, t0: f64, grid: TimeGrid) -> Result<PulseEnvelope> {
    if !(tau_p > 0.0 && tau_p.is_finite()) || !t0.is_finite() {
        return Err(Error::InvalidGrid(format!("bad pulse parameters tau_p={tau_p}, t0={t0}")));
    }
    let max_dt = tau_p / MIN_POINTS_PER_TAU;
    if grid.dt() > max_dt {
        return Err(Error::StepTooCoarse { tau_p, dt: grid.dt(), max_dt });
    }
    let lo = t0 - WINDOW_HALF_WIDTHS * tau_p;
    let hi = t0 + WINDOW_HALF_WIDTHS * tau_p;
    if grid.t_start() > lo || grid.t_end() < hi {
        return Err(Error::WindowTooSmall(format!(
            "window [{}, {}] does not contain [{lo}, {hi}]",
            grid.t_start(),
            grid.t_end()
        )));
    }
    let shape = Shape::Gaussian { t0, eta: eta_from_tau(tau_p), scale: C64::new(1.0, 0.0) };
    let amp = grid.times().map(|t| shape_value(&shape, t)).collect();
    let pulse = PulseEnvelope { grid, amp, shape };
    pulse.check_boundaries()?;
    Ok(pulse)
}

fn shape_value(shape: &Shape, t: f64) -> C64 {
    match *shape {
        Shape::Gaussian { t0, eta, scale } => {
            let x = (t - t0) / eta;
            scale * ((eta * PI.sqrt()).powf(-0.5) * (-0.5 * x * x).exp())
        }
        Shape::Tabulated => unreachable!("tabulated envelopes have no closed form"),
    }
}

impl PulseEnvelope {
    /// Arbitrary input envelope given by its samples. The samples must carry
    /// at most one photon and vanish at both ends of the window.
    pub fn tabulated(grid: TimeGrid, amp: Vec<C64>) -> Result<Self> {
        let pulse = Self::from_samples(grid, amp)?;
        let norm = envelope_norm(&pulse);
        if norm > 1.0 + 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        pulse.check_boundaries()?;
        Ok(pulse)
    }

    /// Samples without the input-pulse checks; used for computed outputs.
    pub fn from_samples(grid: TimeGrid, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != grid.n_points() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                amp.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, amp, shape: Shape::Tabulated })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    /// Peak time, for Gaussian envelopes.
    pub fn t0(&self) -> Option<f64> {
        match self.shape {
            Shape::Gaussian { t0, .. } => Some(t0),
            Shape::Tabulated => None,
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match self.shape {
            Shape::Gaussian { eta, .. } => Some(eta),
            Shape::Tabulated => None,
        }
    }

    /// Intensity FWHM `2η√(ln 2)`, for Gaussian envelopes.
    pub fn tau_p(&self) -> Option<f64> {
        self.eta().map(|eta| 2.0 * eta * LN_2.sqrt())
    }

    /// Amplitude at an arbitrary time. Exact for Gaussians, linear
    /// interpolation otherwise, and zero outside the window.
    pub fn eval(&self, t: f64) -> C64 {
        if let Shape::Gaussian { .. } = self.shape {
            return shape_value(&self.shape, t);
        }
        let x = (t - self.grid.t_start()) / self.grid.dt();
        if x < 0.0 || x > (self.grid.n_points() - 1) as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(self.grid.n_points() - 2);
        let frac = x - i as f64;
        self.amp[i] * (1.0 - frac) + self.amp[i + 1] * frac
    }

    /// Envelope multiplied by a complex constant.
    pub fn scaled(&self, factor: C64) -> Self {
        let shape = match self.shape {
            Shape::Gaussian { t0, eta, scale } => Shape::Gaussian { t0, eta, scale: scale * factor },
            Shape::Tabulated => Shape::Tabulated,
        };
        Self { grid: self.grid, amp: self.amp.iter().map(|a| a * factor).collect(), shape }
    }

    /// Full width at half maximum of `|α|²`, located by linear interpolation
    /// between grid points.
    pub fn intensity_fwhm(&self) -> Option<f64> {
        let intensity: Vec<f64> = self.amp.iter().map(|a| a.norm_sqr()).collect();
        let (peak, max) = intensity
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if max <= 0.0 {
            return None;
        }
        let half = 0.5 * max;
        let cross = |i: usize, j: usize| {
            let (a, b) = (intensity[i], intensity[j]);
            let ti = self.grid.time(i);
            ti + (half - a) / (b - a) * (self.grid.time(j) - ti)
        };
        let left = (1..=peak).rev().find(|&i| intensity[i - 1] < half).map(|i| cross(i - 1, i))?;
        let right =
            (peak..self.amp.len() - 1).find(|&i| intensity[i + 1] < half).map(|i| cross(i, i + 1))?;
        Some(right - left)
    }

    fn check_boundaries(&self) -> Result<()> {
        let max = self.amp.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let first = self.amp[0].norm();
        let last = self.amp[self.amp.len() - 1].norm();
        if first > BOUNDARY_TOLERANCE * max || last > BOUNDARY_TOLERANCE * max {
            return Err(Error::WindowTooSmall(format!(
                "edge amplitudes {first:.3e}, {last:.3e} exceed {BOUNDARY_TOLERANCE:e} of peak {max:.3e}"
            )));
        }
        Ok(())
    }
}

fn trapezoid<I: Iterator<Item = C64>>(values: I, n: usize, dt: f64) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    for (i, v) in values.enumerate() {
        sum += if i == 0 || i + 1 == n { v * 0.5 } else { v };
    }
    sum * dt
}

/// `∫|α(t)|² dt`, the photon number carried by the envelope.
pub fn envelope_norm(p: &PulseEnvelope) -> f64 {
    let n = p.amp.len();
    trapezoid(p.amp.iter().map(|a| C64::new(a.norm_sqr(), 0.0)), n, p.grid.dt()).re
}

/// `∫ p*(t) q(t) dt`.
pub fn overlap(p: &PulseEnvelope, q: &PulseEnvelope) -> Result<C64> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch);
    }
    let n = p.amp.len();
    Ok(trapezoid(p.amp.iter().zip(&q.amp).map(|(a, b)| a.conj() * b), n, p.grid.dt()))
}
