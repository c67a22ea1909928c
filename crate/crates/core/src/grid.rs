//! Temporal grid, complex field storage, the Madelung (intensity/phase)
//! representation and Gaussian initial conditions.
//!
//! Internal units are fixed: time in ps, distance in m, power in W. The
//! field envelope is stored in √W so that `|A|²` is instantaneous power.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform temporal grid with `2 * n_half` samples.
///
/// Array index `i` holds the sample `j = i - n_half`, located at
/// `T_j = j * dt`, so the window is `[-n_half * dt, (n_half - 1) * dt]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    n_half: usize,
    dt: f64,
}

impl SimGrid {
    /// Grid of `2 * n_half` points covering `[-half_width, half_width - dt]`.
    pub fn new(n_half: usize, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "window half-width must be positive, got {half_width}"
            )));
        }
        Self::with_spacing(n_half, half_width / n_half as f64)
    }

    pub fn with_spacing(n_half: usize, dt: f64) -> Result<Self> {
        if n_half < 2 {
            return Err(Error::InvalidGrid(format!("n_half must be >= 2, got {n_half}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { n_half, dt })
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    /// Number of samples, `2 * n_half`.
    pub fn len(&self) -> usize {
        2 * self.n_half
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_min(&self) -> f64 {
        -(self.n_half as f64) * self.dt
    }

    pub fn half_width(&self) -> f64 {
        self.n_half as f64 * self.dt
    }

    /// Time of array index `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.n_half as f64) * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    /// Spectral spacing `π / (N ΔT)` in rad/ps.
    pub fn d_omega(&self) -> f64 {
        PI / (self.n_half as f64 * self.dt)
    }

    /// Angular frequency of DFT bin `k` in the transform's natural order:
    /// bins `0..N` carry `j = k`, bins `N..2N` carry `j = k - 2N`.
    pub fn bin_omega(&self, k: usize) -> f64 {
        self.bin_index(k) as f64 * self.d_omega()
    }

    /// Signed frequency index `j ∈ [-N, N-1]` of DFT bin `k`.
    pub fn bin_index(&self, k: usize) -> isize {
        let n = self.n_half as isize;
        let k = k as isize;
        if k < n {
            k
        } else {
            k - 2 * n
        }
    }

    /// Ratio `r` such that `finer` has `r` times the points of `self` on the
    /// same window, with `r` a power of two; `None` otherwise.
    pub fn nesting_ratio(&self, finer: &SimGrid) -> Option<usize> {
        if !finer.n_half.is_multiple_of(self.n_half) {
            return None;
        }
        let ratio = finer.n_half / self.n_half;
        if !ratio.is_power_of_two() {
            return None;
        }
        let rel = (self.half_width() - finer.half_width()).abs() / self.half_width();
        (rel <= 1e-12).then_some(ratio)
    }
}

/// Sampled complex field envelope on a [`SimGrid`], in √W.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope {
    grid: SimGrid,
    samples: Vec<Complex64>,
}

impl ComplexEnvelope {
    pub fn zeros(grid: SimGrid) -> Self {
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_samples(grid: SimGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if let Some(i) = samples.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &SimGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Instantaneous power `|A_j|²` in W.
    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|z| z * factor).collect() }
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.samples.iter().position(|z| !z.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }
}

/// Intensity/phase representation `A = √I e^{iφ}`.
///
/// The phase is kept unwrapped while a nonlinear sub-step runs; the
/// reduction modulo 2π happens when converting back.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarState {
    pub intensity: Vec<f64>,
    pub phase: Vec<f64>,
}

impl PolarState {
    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }
}

/// `I_j = |A_j|²`, `φ_j = arg A_j ∈ (-π, π]`, with `φ_j = 0` where `A_j = 0`.
pub fn madelung_forward(a: &ComplexEnvelope) -> PolarState {
    let mut intensity = Vec::with_capacity(a.samples.len());
    let mut phase = Vec::with_capacity(a.samples.len());
    for z in &a.samples {
        let i = z.norm_sqr();
        intensity.push(i);
        phase.push(if i == 0.0 { 0.0 } else { z.arg() });
    }
    PolarState { intensity, phase }
}

/// `A_j = √I_j e^{iφ_j}`.
pub fn madelung_inverse(p: &PolarState, grid: SimGrid) -> Result<ComplexEnvelope> {
    if p.intensity.len() != grid.len() || p.phase.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "polar state of length {}/{} for a grid of {} points",
            p.intensity.len(),
            p.phase.len(),
            grid.len()
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for (index, (&i, &phi)) in p.intensity.iter().zip(&p.phase).enumerate() {
        if i < 0.0 {
            return Err(Error::NegativeIntensity { index, value: i });
        }
        samples.push(Complex64::from_polar(i.sqrt(), phi));
    }
    ComplexEnvelope::from_samples(grid, samples)
}

/// Gaussian pulse `√P0 exp(-(1 + iC)/2 · T²/T0²)`.
pub fn gaussian_pulse(grid: SimGrid, p0: f64, t0: f64, chirp: f64) -> Result<ComplexEnvelope> {
    if !(p0 >= 0.0 && p0.is_finite()) {
        return Err(Error::InvalidParameter { name: "p0", reason: format!("must be >= 0, got {p0}") });
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidParameter { name: "t0", reason: format!("must be > 0, got {t0}") });
    }
    if !chirp.is_finite() {
        return Err(Error::InvalidParameter { name: "chirp", reason: "must be finite".into() });
    }
    let amp = p0.sqrt();
    let coef = Complex64::new(-0.5, -0.5 * chirp);
    let samples = grid
        .times()
        .map(|t| amp * (coef * (t * t / (t0 * t0))).exp())
        .collect();
    ComplexEnvelope::from_samples(grid, samples)
}

/// Physical coefficients of one fiber mode in canonical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    /// Linear loss, 1/m.
    pub alpha: f64,
    /// Group-velocity dispersion, ps²/m.
    pub beta2: f64,
    /// Third-order dispersion, ps³/m.
    pub beta3: f64,
    /// Nonlinearity, 1/(W·m).
    pub gamma: f64,
    /// Self-steepening `S = 1/ω0`, ps.
    pub s_steep: f64,
    /// Raman response time, ps.
    pub t_raman: f64,
    /// Carrier wavelength, m. Only used to derive `s_steep` and spectral axes.
    pub lambda0: Option<f64>,
}

impl Default for FiberParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta2: 0.0,
            beta3: 0.0,
            gamma: 0.0,
            s_steep: 0.0,
            t_raman: 0.0,
            lambda0: None,
        }
    }
}

impl FiberParams {
    /// Sets the carrier wavelength and derives `S = λ0 / (2πc)`.
    pub fn with_wavelength(mut self, lambda0: f64) -> Self {
        self.lambda0 = Some(lambda0);
        self.s_steep = self_steepening(lambda0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("gamma", self.gamma),
            ("s_steep", self.s_steep),
            ("t_raman", self.t_raman),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("not finite: {v}") });
            }
        }
        if self.s_steep < 0.0 {
            return Err(Error::InvalidParameter {
                name: "s_steep",
                reason: format!("must be >= 0, got {}", self.s_steep),
            });
        }
        if self.t_raman < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t_raman",
                reason: format!("must be >= 0, got {}", self.t_raman),
            });
        }
        if let Some(l) = self.lambda0 {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter { name: "lambda0", reason: format!("must be > 0, got {l}") });
            }
        }
        Ok(())
    }
}

/// `S = λ0 / (2πc)` converted to ps.
pub fn self_steepening(lambda0: f64) -> f64 {
    lambda0 / (2.0 * PI * SPEED_OF_LIGHT) * 1e12
}

/// Parameters of the coupled two-mode model. Field 1 defines the retarded
/// frame, so the group-velocity mismatch `delta` only enters field 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    pub modes: [FiberParams; 2],
    /// Group-velocity mismatch `(v1 - v2)/(v1 v2)`, ps/m.
    pub delta: f64,
    pub b_xpm: [f64; 2],
    pub c_xpm: [f64; 2],
}

impl TwoModeParams {
    pub fn validate(&self) -> Result<()> {
        for m in &self.modes {
            m.validate()?;
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter { name: "delta", reason: "not finite".into() });
        }
        for (name, pair) in [("b_xpm", self.b_xpm), ("c_xpm", self.c_xpm)] {
            if pair.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {pair:?}") });
            }
        }
        Ok(())
    }
}
