//! Spectral application of the linear dispersion/loss half-step.
//!
//! Transform convention: `F(A)(ω) = Σ_j A_j e^{+iωT_j}` and
//! `F⁻¹(Â)(T) = (2N)⁻¹ Σ_k Â_k e^{-iω_k T}`. Under this convention the
//! multiplier `exp[(h/2)(iβ₂ω²/2 − iβ₃ω³/6 − α/2 − iδω)]` moves field
//! content to earlier retarded time when `δ > 0`. Multipliers are stored
//! in the transform's natural bin order (see [`SimGrid::bin_index`]).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexEnvelope, SimGrid};

/// Linear coefficients entering one half-step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearCoefficients {
    pub alpha: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub delta: f64,
}

impl LinearCoefficients {
    /// Exponent rate of the linear operator at angular frequency `omega`.
    pub fn rate(&self, omega: f64) -> Complex64 {
        let w2 = omega * omega;
        Complex64::new(
            -0.5 * self.alpha,
            0.5 * self.beta2 * w2 - self.beta3 * w2 * omega / 6.0 - self.delta * omega,
        )
    }
}

/// Forward/inverse DFT pair of one grid size.
#[derive(Clone)]
pub struct Transform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform").field("len", &self.len).finish()
    }
}

impl Transform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        // rustfft's `Inverse` is the e^{+i} kernel, which is our forward map.
        Self {
            len,
            forward: planner.plan_fft(len, FftDirection::Inverse),
            inverse: planner.plan_fft(len, FftDirection::Forward),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        scratch.resize(self.forward.get_inplace_scratch_len(), Complex64::default());
        self.forward.process_with_scratch(data, scratch);
    }

    /// Inverse transform in place, including the `1/(2N)` factor.
    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        scratch.resize(self.inverse.get_inplace_scratch_len(), Complex64::default());
        self.inverse.process_with_scratch(data, scratch);
        let norm = 1.0 / self.len as f64;
        data.iter_mut().for_each(|z| *z *= norm);
    }
}

/// Pre-computed per-bin factors of one linear half-step.
#[derive(Debug, Clone)]
pub struct LinearHalfStepPlan {
    grid: SimGrid,
    coefficients: LinearCoefficients,
    h: f64,
    multipliers: Vec<Complex64>,
    transform: Transform,
}

/// Builds the half-step plan `exp[(h/2) D(ω)]` for a full step length `h`.
pub fn build_plan(grid: SimGrid, coefficients: LinearCoefficients, h: f64) -> Result<LinearHalfStepPlan> {
    build_plan_with(grid, coefficients, h, Transform::new(grid.len()))
}

pub(crate) fn build_plan_with(
    grid: SimGrid,
    coefficients: LinearCoefficients,
    h: f64,
    transform: Transform,
) -> Result<LinearHalfStepPlan> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter { name: "h", reason: format!("must be > 0, got {h}") });
    }
    let c = coefficients;
    for (name, v) in [("alpha", c.alpha), ("beta2", c.beta2), ("beta3", c.beta3), ("delta", c.delta)] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter { name, reason: "not finite".into() });
        }
    }
    debug_assert_eq!(transform.len(), grid.len());
    let multipliers = (0..grid.len())
        .map(|k| (0.5 * h * c.rate(grid.bin_omega(k))).exp())
        .collect();
    Ok(LinearHalfStepPlan { grid, coefficients, h, multipliers, transform })
}

impl LinearHalfStepPlan {
    pub fn grid(&self) -> &SimGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> LinearCoefficients {
        self.coefficients
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    /// `F⁻¹(m ⊙ F(data))` in place.
    pub fn apply_in_place(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.transform.forward(data, scratch);
        for (z, m) in data.iter_mut().zip(&self.multipliers) {
            *z *= m;
        }
        self.transform.inverse(data, scratch);
    }
}

/// Returns `F⁻¹(multipliers ⊙ F(A))`.
pub fn apply_linear_half_step(a: &ComplexEnvelope, plan: &LinearHalfStepPlan) -> Result<ComplexEnvelope> {
    if a.grid() != plan.grid() {
        return Err(Error::GridMismatch(format!(
            "field on {:?}, plan on {:?}",
            a.grid(),
            plan.grid()
        )));
    }
    let mut out = a.clone();
    let mut scratch = Vec::new();
    plan.apply_in_place(out.samples_mut(), &mut scratch);
    out.check_finite()?;
    Ok(out)
}

/// Spectrum of `a` in natural bin order (unnormalized forward transform).
pub fn spectrum(a: &ComplexEnvelope) -> Vec<Complex64> {
    let t = Transform::new(a.grid().len());
    let mut data = a.samples().to_vec();
    t.forward(&mut data, &mut Vec::new());
    data
}
