//! Error norms, convergence-order fits, spectra and pulse diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{ComplexEnvelope, FiberParams, SimGrid, SPEED_OF_LIGHT};
use crate::linear_op::spectrum;

/// Largest instantaneous power `max_j |A_j|²`, W.
pub fn peak_power(a: &ComplexEnvelope) -> f64 {
    a.samples().iter().map(|s| s.norm_sqr()).fold(0.0, f64::max)
}

/// Pulse energy `Σ_j |A_j|² ΔT`, W·ps.
pub fn pulse_energy(a: &ComplexEnvelope) -> f64 {
    a.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() * a.grid().dt()
}

/// Intensity-weighted mean time, ps.
pub fn centroid(a: &ComplexEnvelope) -> Result<f64> {
    let g = a.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for (t, s) in g.times().zip(a.samples()) {
        let i = s.norm_sqr();
        num += t * i;
        den += i;
    }
    if den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(num / den)
}

/// `E∞ = max_j |I_j - I_ref(T_j)|` with the reference sampled on a finer
/// nested grid by index, not interpolation.
pub fn error_maxnorm(candidate: &ComplexEnvelope, reference: &ComplexEnvelope) -> Result<f64> {
    let (gc, gr) = (candidate.grid(), reference.grid());
    let ratio = gc.nesting_ratio(gr).ok_or_else(|| {
        Error::NotNested(format!(
            "candidate n_half {} on ±{} ps vs reference n_half {} on ±{} ps",
            gc.n_half(),
            gc.half_width(),
            gr.n_half(),
            gr.half_width()
        ))
    })?;
    // candidate index i sits at (i - Nc) dt_c = (i r - Nr) dt_r
    let r = reference.samples();
    Ok(candidate
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.norm_sqr() - r[i * ratio].norm_sqr()).abs())
        .fold(0.0, f64::max))
}

/// Resolution of one run in a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub n_half: usize,
    pub h: f64,
    pub m_steps: usize,
}

impl Resolution {
    /// Doubles the point count and halves the step, keeping the distance.
    pub fn refined(&self, times: u32) -> Self {
        let f = 1usize << times;
        Self { n_half: self.n_half * f, h: self.h / f as f64, m_steps: self.m_steps * f }
    }
}

/// One measured rung.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rung {
    pub resolution: Resolution,
    pub e_inf: f64,
}

/// Errors of successively refined runs against a common reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLadder {
    pub rungs: Vec<Rung>,
    pub reference: Resolution,
}

impl ConvergenceLadder {
    pub fn validate(&self) -> Result<()> {
        for pair in self.rungs.windows(2) {
            let (a, b) = (pair[0].resolution, pair[1].resolution);
            if b.n_half != 2 * a.n_half || (a.h / b.h - 2.0).abs() > 1e-12 {
                return Err(Error::InvalidLadder(format!(
                    "rung (N={}, h={}) does not double (N={}, h={})",
                    b.n_half, b.h, a.n_half, a.h
                )));
            }
        }
        if let Some(r) = self.rungs.iter().find(|r| !(r.e_inf >= 0.0)) {
            return Err(Error::InvalidLadder(format!("negative or NaN error {}", r.e_inf)));
        }
        Ok(())
    }

    pub fn steps(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.resolution.h).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.e_inf).collect()
    }
}

/// Least-squares slope of `log E` against `log h`.
pub fn fit_order(h: &[f64], e: &[f64]) -> Result<f64> {
    if h.len() != e.len() {
        return Err(Error::InvalidLadder(format!("{} steps but {} errors", h.len(), e.len())));
    }
    if h.len() < 3 {
        return Err(Error::TooFewRungs(h.len()));
    }
    if let Some(i) = (0..h.len()).find(|&i| !(h[i] > 0.0 && e[i] > 0.0)) {
        return Err(Error::InvalidLadder(format!("rung {i} has non-positive step or error")));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Fitted convergence order of a ladder.
pub fn convergence_order(ladder: &ConvergenceLadder) -> Result<f64> {
    ladder.validate()?;
    fit_order(&ladder.steps(), &ladder.errors())
}

/// One spectral bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    /// Angular frequency offset from the carrier, rad/ps.
    pub omega: f64,
    /// Frequency offset, THz.
    pub freq_offset_thz: f64,
    /// Vacuum wavelength in nm when the carrier is known and the absolute
    /// frequency is positive.
    pub wavelength_nm: Option<f64>,
    /// `ΔT |Ã_k|² / 2N`, so the bins sum to the pulse energy (W·ps).
    pub power: f64,
    /// `power` divided by the largest bin.
    pub power_norm: f64,
}

/// Power spectrum in ascending frequency. `lambda0` is the carrier
/// wavelength in m.
pub fn power_spectrum(a: &ComplexEnvelope, lambda0: Option<f64>) -> Vec<SpectralSample> {
    let g = *a.grid();
    let spec = spectrum(a);
    let len = g.len();
    let scale = g.dt() / len as f64;
    let order = (g.n_half()..len).chain(0..g.n_half());
    let mut out: Vec<SpectralSample> = order
        .map(|k| {
            let omega = g.bin_omega(k);
            let wavelength_nm = lambda0.and_then(|l0| {
                let omega0 = 2.0 * PI * SPEED_OF_LIGHT / l0 * 1e-12;
                let w = omega0 + omega;
                (w > 0.0).then(|| 2.0 * PI * SPEED_OF_LIGHT * 1e-12 / w * 1e9)
            });
            SpectralSample {
                omega,
                freq_offset_thz: omega / (2.0 * PI),
                wavelength_nm,
                power: spec[k].norm_sqr() * scale,
                power_norm: 0.0,
            }
        })
        .collect();
    let peak = out.iter().map(|s| s.power).fold(0.0, f64::max);
    if peak > 0.0 {
        for s in &mut out {
            s.power_norm = s.power / peak;
        }
    }
    out
}

/// `L_d = T0² / |β₂|`, m.
pub fn dispersion_length(t0: f64, beta2: f64) -> f64 {
    t0 * t0 / beta2.abs()
}

/// `L_d' = T0³ / |β₃|`, m.
pub fn third_order_length(t0: f64, beta3: f64) -> f64 {
    t0.powi(3) / beta3.abs()
}

/// `L_nl = 1 / (γ P0)`, m.
pub fn nonlinear_length(gamma: f64, p0: f64) -> f64 {
    1.0 / (gamma * p0).abs()
}

/// The three characteristic lengths of a pulse in a fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthScales {
    pub dispersion: f64,
    pub third_order: f64,
    pub nonlinear: f64,
}

pub fn length_scales(fiber: &FiberParams, t0: f64, p0: f64) -> LengthScales {
    LengthScales {
        dispersion: dispersion_length(t0, fiber.beta2),
        third_order: third_order_length(t0, fiber.beta3),
        nonlinear: nonlinear_length(fiber.gamma, p0),
    }
}

/// Mean distance between the maxima of a sampled trace.
///
/// Samples above the mid-level `(min + max) / 2` are grouped into
/// contiguous runs and the largest sample of each run is taken as one
/// maximum. Returns `None` with fewer than two maxima.
pub fn oscillation_period(z: &[f64], values: &[f64]) -> Option<f64> {
    if z.len() != values.len() || values.is_empty() {
        return None;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    let mid = 0.5 * (lo + hi);
    let mut peaks = Vec::new();
    let mut run: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v > mid {
            run = Some(match run {
                Some(best) if values[best] >= v => best,
                _ => i,
            });
        } else if let Some(best) = run.take() {
            peaks.push(z[best]);
        }
    }
    if let Some(best) = run {
        peaks.push(z[best]);
    }
    // a run touching either end may be a truncated maximum
    if peaks.len() >= 3 {
        if values[0] > mid {
            peaks.remove(0);
        }
        if values[values.len() - 1] > mid && peaks.len() >= 3 {
            peaks.pop();
        }
    }
    (peaks.len() >= 2).then(|| (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

/// Max-norm of `a - b` relative to the max-norm of `b`.
pub fn relative_maxnorm(a: &ComplexEnvelope, b: &ComplexEnvelope) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("fields on different grids".into()));
    }
    let scale = b.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
    let diff = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Intensity sampled on a nested coarser grid.
pub fn restrict_intensity(fine: &ComplexEnvelope, coarse: SimGrid) -> Result<Vec<f64>> {
    let ratio = coarse
        .nesting_ratio(fine.grid())
        .ok_or_else(|| Error::NotNested("grids are not nested".into()))?;
    Ok((0..coarse.len()).map(|i| fine.samples()[i * ratio].norm_sqr()).collect())
}
