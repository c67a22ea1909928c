//! WebAssembly bindings for the browser demo in `www/`.
//!
//! All inputs use the units shown on the page (fs, mW, km, ps²/km, ...).

use fiberprop::analysis::power_spectrum;
use fiberprop::benchmarks::{preset, simulate, RunOutput};
use fiberprop::config::{MapElement, RunSpec};
use fiberprop::ComplexEnvelope;
use wasm_bindgen::prelude::*;

/// Curves of one field: time axis, initial and final intensity, spectrum.
#[wasm_bindgen]
pub struct PulseCurves {
    time_ps: Vec<f64>,
    initial_w: Vec<f64>,
    final_w: Vec<f64>,
    freq_thz: Vec<f64>,
    initial_spectrum: Vec<f64>,
    final_spectrum: Vec<f64>,
}

#[wasm_bindgen]
impl PulseCurves {
    #[wasm_bindgen(getter)]
    pub fn time_ps(&self) -> Vec<f64> {
        self.time_ps.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn initial_w(&self) -> Vec<f64> {
        self.initial_w.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn final_w(&self) -> Vec<f64> {
        self.final_w.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn freq_thz(&self) -> Vec<f64> {
        self.freq_thz.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn initial_spectrum(&self) -> Vec<f64> {
        self.initial_spectrum.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn final_spectrum(&self) -> Vec<f64> {
        self.final_spectrum.clone()
    }
}

/// Peak power along the fiber.
#[wasm_bindgen]
pub struct PeakTrace {
    z_km: Vec<f64>,
    peak_mw: Vec<f64>,
}

#[wasm_bindgen]
impl PeakTrace {
    #[wasm_bindgen(getter)]
    pub fn z_km(&self) -> Vec<f64> {
        self.z_km.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn peak_mw(&self) -> Vec<f64> {
        self.peak_mw.clone()
    }
}

type Outcome<T> = Result<T, String>;

fn err(e: fiberprop::Error) -> String {
    e.to_string()
}

fn curves(initial: &ComplexEnvelope, fin: &ComplexEnvelope) -> PulseCurves {
    let si = power_spectrum(initial, None);
    let sf = power_spectrum(fin, None);
    PulseCurves {
        time_ps: initial.grid().times().collect(),
        initial_w: initial.intensity(),
        final_w: fin.intensity(),
        freq_thz: si.iter().map(|s| s.freq_offset_thz).collect(),
        initial_spectrum: si.iter().map(|s| s.power_norm).collect(),
        final_spectrum: sf.iter().map(|s| s.power_norm).collect(),
    }
}

fn run(spec: &RunSpec) -> Outcome<(Vec<ComplexEnvelope>, RunOutput)> {
    let initial = spec.initial_fields().map_err(err)?;
    let out = simulate(spec).map_err(err)?;
    Ok((initial, out))
}

fn steps_for(length_km: f64, h_m: f64) -> Outcome<usize> {
    if !(length_km > 0.0 && h_m > 0.0) {
        return Err("length and step must be positive".into());
    }
    Ok(((length_km * 1e3) / h_m).round().max(1.0) as usize)
}

#[allow(clippy::too_many_arguments)]
fn propagate_pulse_impl(
    peak_mw: f64,
    width_fs: f64,
    beta2_ps2_km: f64,
    beta3_ps3_km: f64,
    gamma_per_w_km: f64,
    length_km: f64,
    n_half: usize,
    step_m: f64,
) -> Outcome<PulseCurves> {
    let mut spec = preset(1).map_err(err)?;
    spec.grid = fiberprop::SimGrid::new(n_half, spec.grid.half_width()).map_err(err)?;
    spec.h = step_m;
    spec.m_steps = steps_for(length_km, step_m)?;
    spec.diagnostics_every = 0;
    let f = &mut spec.fields[0];
    f.pulse.peak_power = peak_mw * 1e-3;
    f.pulse.width = width_fs * 1e-3;
    f.fiber.beta2 = beta2_ps2_km * 1e-3;
    f.fiber.beta3 = beta3_ps3_km * 1e-3;
    f.fiber.gamma = gamma_per_w_km * 1e-3;
    let (initial, out) = run(&spec)?;
    Ok(curves(&initial[0], &out.fields[0]))
}

/// Single pulse in a uniform fiber (benchmark 1 defaults).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn propagate_pulse(
    peak_mw: f64,
    width_fs: f64,
    beta2_ps2_km: f64,
    beta3_ps3_km: f64,
    gamma_per_w_km: f64,
    length_km: f64,
    n_half: usize,
    step_m: f64,
) -> Result<PulseCurves, JsError> {
    propagate_pulse_impl(peak_mw, width_fs, beta2_ps2_km, beta3_ps3_km, gamma_per_w_km, length_km, n_half, step_m).map_err(|e| JsError::new(&e))
}

fn dispersion_managed_trace_impl(
    segment_km: f64,
    length_km: f64,
    gamma_per_w_km: f64,
    n_half: usize,
    step_m: f64,
) -> Outcome<PeakTrace> {
    let mut spec = preset(2).map_err(err)?;
    spec.grid = fiberprop::SimGrid::new(n_half, spec.grid.half_width()).map_err(err)?;
    spec.h = step_m;
    spec.m_steps = steps_for(length_km, step_m)?;
    spec.diagnostics_every = 1;
    spec.fields[0].fiber.gamma = gamma_per_w_km * 1e-3;
    spec.dispersion_map = if segment_km > 0.0 {
        let l = segment_km * 1e3;
        vec![MapElement { length: l, dispersion_scale: 1.0 }, MapElement { length: l, dispersion_scale: -1.0 }]
    } else {
        Vec::new()
    };
    let (_, out) = run(&spec)?;
    Ok(PeakTrace {
        z_km: out.diagnostics[0].iter().map(|d| d.z * 1e-3).collect(),
        peak_mw: out.diagnostics[0].iter().map(|d| d.peak_power * 1e3).collect(),
    })
}

/// Peak power over distance on a line whose dispersion flips sign every
/// `segment_km` (benchmark 2 defaults). `segment_km = 0` gives a uniform
/// fiber.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn dispersion_managed_trace(
    segment_km: f64,
    length_km: f64,
    gamma_per_w_km: f64,
    n_half: usize,
    step_m: f64,
) -> Result<PeakTrace, JsError> {
    dispersion_managed_trace_impl(segment_km, length_km, gamma_per_w_km, n_half, step_m).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
fn coupled_pulses_impl(
    peak2_mw: f64,
    delta_fs_m: f64,
    xpm: f64,
    length_km: f64,
    n_half: usize,
    step_m: f64,
    which: usize,
) -> Outcome<PulseCurves> {
    if !(1..=2).contains(&which) {
        return Err("which must be 1 or 2".into());
    }
    let mut spec = preset(3).map_err(err)?;
    spec.grid = fiberprop::SimGrid::new(n_half, spec.grid.half_width()).map_err(err)?;
    spec.h = step_m;
    spec.m_steps = steps_for(length_km, step_m)?;
    spec.diagnostics_every = 0;
    spec.fields[1].pulse.peak_power = peak2_mw * 1e-3;
    spec.coupling.delta = delta_fs_m * 1e-3;
    spec.coupling.b_xpm = [xpm; 2];
    spec.coupling.c_xpm = [xpm; 2];
    let (initial, out) = run(&spec)?;
    Ok(curves(&initial[which - 1], &out.fields[which - 1]))
}

/// Two coupled pulses (benchmark 3 defaults). Returns the curves of pulse
/// `which` (1 or 2).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn coupled_pulses(
    peak2_mw: f64,
    delta_fs_m: f64,
    xpm: f64,
    length_km: f64,
    n_half: usize,
    step_m: f64,
    which: usize,
) -> Result<PulseCurves, JsError> {
    coupled_pulses_impl(peak2_mw, delta_fs_m, xpm, length_km, n_half, step_m, which).map_err(|e| JsError::new(&e))
}

/// Peak-power reduction factor of a pulse (initial over final peak).
#[wasm_bindgen]
pub fn reduction_factor(initial_w: &[f64], final_w: &[f64]) -> f64 {
    let p = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    p(initial_w) / p(final_w)
}
