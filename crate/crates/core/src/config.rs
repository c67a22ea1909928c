//! Run configuration documents.
//!
//! Configurations are TOML. Every physical quantity is a string carrying
//! its unit, e.g. `beta2 = "0.5 ps^2/km"`; unknown keys are rejected.
//! See `presets/` for complete examples.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{gaussian_pulse, self_steepening, ComplexEnvelope, FiberParams, SimGrid};
use crate::nonlinear_single::Scheme;
use crate::propagator::{DispersionMap, ModeKind, SimConfig, TwoModeFiber};
use crate::units::{parse_as, Kind};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    mode: Option<String>,
    scheme: Option<String>,
    grid: RawGrid,
    propagation: RawPropagation,
    fiber: RawFiber,
    #[serde(rename = "field")]
    fields: Vec<RawField>,
    coupling: Option<RawCoupling>,
    dispersion_map: Option<RawMap>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_half: usize,
    half_width: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    step: String,
    steps: usize,
    diagnostics_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiber {
    alpha: Option<String>,
    beta2: Option<String>,
    beta3: Option<String>,
    gamma: Option<String>,
    raman_time: Option<String>,
    self_steepening: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    peak_power: String,
    width: String,
    chirp: Option<f64>,
    wavelength: Option<String>,
    alpha: Option<String>,
    beta2: Option<String>,
    beta3: Option<String>,
    gamma: Option<String>,
    raman_time: Option<String>,
    self_steepening: Option<String>,
}

impl RawField {
    fn overrides(&self) -> RawFiber {
        RawFiber {
            alpha: self.alpha.clone(),
            beta2: self.beta2.clone(),
            beta3: self.beta3.clone(),
            gamma: self.gamma.clone(),
            raman_time: self.raman_time.clone(),
            self_steepening: self.self_steepening.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    delta: String,
    b_xpm: [f64; 2],
    c_xpm: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    #[serde(rename = "segment")]
    segments: Vec<RawSegment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    length: String,
    /// Factor applied to β₂ and β₃ inside the segment.
    dispersion_scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

/// Initial Gaussian pulse of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// W
    pub peak_power: f64,
    /// ps
    pub width: f64,
    pub chirp: f64,
    /// Carrier wavelength, m.
    pub wavelength: Option<f64>,
}

/// One field: its initial pulse and the fiber it sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub pulse: PulseSpec,
    pub fiber: FiberParams,
}

/// One period element of a dispersion map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapElement {
    /// m
    pub length: f64,
    pub dispersion_scale: f64,
}

/// Coupling between the two fields of a two-mode run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coupling {
    /// ps/m
    pub delta: f64,
    pub b_xpm: [f64; 2],
    pub c_xpm: [f64; 2],
}

/// Fully validated run description in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: ModeKind,
    pub scheme: Scheme,
    pub grid: SimGrid,
    /// m
    pub h: f64,
    pub m_steps: usize,
    pub diagnostics_every: usize,
    pub fields: Vec<FieldSpec>,
    pub coupling: Coupling,
    /// Repeated until the end of the run; empty means uniform fiber.
    pub dispersion_map: Vec<MapElement>,
    pub output_dir: Option<PathBuf>,
}

fn opt(field: &str, text: &Option<String>, kind: Kind) -> Result<Option<f64>> {
    text.as_deref().map(|t| parse_as(field, t, kind)).transpose()
}

fn fiber_from(base: &RawFiber, over: &RawFiber, wavelength: Option<f64>, k: usize) -> Result<FiberParams> {
    let pick = |name: &str, o: &Option<String>, b: &Option<String>, kind: Kind| -> Result<Option<f64>> {
        if o.is_some() {
            opt(&format!("field[{k}].{name}"), o, kind)
        } else {
            opt(&format!("fiber.{name}"), b, kind)
        }
    };
    let s_explicit = pick("self_steepening", &over.self_steepening, &base.self_steepening, Kind::Time)?;
    let fiber = FiberParams {
        alpha: pick("alpha", &over.alpha, &base.alpha, Kind::Attenuation)?.unwrap_or(0.0),
        beta2: pick("beta2", &over.beta2, &base.beta2, Kind::Beta2)?.unwrap_or(0.0),
        beta3: pick("beta3", &over.beta3, &base.beta3, Kind::Beta3)?.unwrap_or(0.0),
        gamma: pick("gamma", &over.gamma, &base.gamma, Kind::Gamma)?
            .ok_or_else(|| Error::Config(format!("missing key `gamma` for field {k} (set fiber.gamma)")))?,
        t_raman: pick("raman_time", &over.raman_time, &base.raman_time, Kind::Time)?.unwrap_or(0.0),
        s_steep: s_explicit.or(wavelength.map(self_steepening)).unwrap_or(0.0),
        lambda0: wavelength,
    };
    fiber.validate()?;
    Ok(fiber)
}

fn parse_mode(s: Option<&str>) -> Result<ModeKind> {
    match s {
        None | Some("single") => Ok(ModeKind::SingleMode),
        Some("two-mode") => Ok(ModeKind::TwoMode),
        Some(other) => Err(Error::Config(format!("mode must be \"single\" or \"two-mode\", got \"{other}\""))),
    }
}

fn parse_scheme(s: Option<&str>) -> Result<Scheme> {
    match s {
        None | Some("muscl") => Ok(Scheme::MusclVanAlbada),
        Some("upwind") => Ok(Scheme::FirstOrderUpwind),
        Some(other) => Err(Error::Config(format!("scheme must be \"muscl\" or \"upwind\", got \"{other}\""))),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mode = parse_mode(raw.mode.as_deref())?;
    let scheme = parse_scheme(raw.scheme.as_deref())?;
    let grid = SimGrid::new(raw.grid.n_half, parse_as("grid.half_width", &raw.grid.half_width, Kind::Time)?)?;
    let h = parse_as("propagation.step", &raw.propagation.step, Kind::Length)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter { name: "propagation.step", reason: format!("must be > 0, got {h}") });
    }

    let expected = match mode {
        ModeKind::SingleMode => 1,
        ModeKind::TwoMode => 2,
    };
    if raw.fields.len() != expected {
        return Err(Error::Config(format!("mode needs {expected} [[field]] table(s), found {}", raw.fields.len())));
    }
    let mut fields = Vec::new();
    for (k, f) in raw.fields.iter().enumerate() {
        let wavelength = opt(&format!("field[{k}].wavelength"), &f.wavelength, Kind::Length)?;
        let pulse = PulseSpec {
            peak_power: parse_as(&format!("field[{k}].peak_power"), &f.peak_power, Kind::Power)?,
            width: parse_as(&format!("field[{k}].width"), &f.width, Kind::Time)?,
            chirp: f.chirp.unwrap_or(0.0),
            wavelength,
        };
        if !(pulse.peak_power >= 0.0) || !(pulse.width > 0.0) || !pulse.chirp.is_finite() {
            return Err(Error::Config(format!("field[{k}]: need peak_power >= 0, width > 0, finite chirp")));
        }
        fields.push(FieldSpec { pulse, fiber: fiber_from(&raw.fiber, &f.overrides(), wavelength, k)? });
    }

    let coupling = match (mode, raw.coupling) {
        (ModeKind::TwoMode, Some(c)) => Coupling {
            delta: parse_as("coupling.delta", &c.delta, Kind::Delta)?,
            b_xpm: c.b_xpm,
            c_xpm: c.c_xpm,
        },
        (ModeKind::TwoMode, None) => return Err(Error::Config("two-mode runs need a [coupling] table".into())),
        (ModeKind::SingleMode, Some(_)) => return Err(Error::Config("[coupling] is only valid with mode = \"two-mode\"".into())),
        (ModeKind::SingleMode, None) => Coupling::default(),
    };

    let dispersion_map = match raw.dispersion_map {
        None => Vec::new(),
        Some(m) => m
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let length = parse_as(&format!("dispersion_map.segment[{i}].length"), &s.length, Kind::Length)?;
                if !(length > 0.0) || !s.dispersion_scale.is_finite() {
                    return Err(Error::Config(format!("dispersion_map.segment[{i}]: need length > 0 and finite scale")));
                }
                Ok(MapElement { length, dispersion_scale: s.dispersion_scale })
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let spec = RunSpec {
        mode,
        scheme,
        grid,
        h,
        m_steps: raw.propagation.steps,
        diagnostics_every: raw.propagation.diagnostics_every.unwrap_or(1),
        fields,
        coupling,
        dispersion_map,
        output_dir: raw.output.and_then(|o| o.dir).map(PathBuf::from),
    };
    if spec.m_steps > 0 {
        spec.field_map(0)?;
    }
    Ok(spec)
}

impl RunSpec {
    /// Total distance `M h`, m.
    pub fn l_max(&self) -> f64 {
        self.m_steps as f64 * self.h
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(self.grid, self.h, self.m_steps, self.scheme)?;
        cfg.mode = self.mode;
        cfg.diagnostics_every = self.diagnostics_every;
        Ok(cfg)
    }

    pub fn initial_fields(&self) -> Result<Vec<ComplexEnvelope>> {
        self.fields
            .iter()
            .map(|f| gaussian_pulse(self.grid, f.pulse.peak_power, f.pulse.width, f.pulse.chirp))
            .collect()
    }

    /// Fiber seen by field `k` over the whole run.
    pub fn field_map(&self, k: usize) -> Result<DispersionMap> {
        let base = self.fields[k].fiber;
        let l_max = self.l_max();
        if self.dispersion_map.is_empty() {
            return DispersionMap::constant(base, l_max);
        }
        let pattern: Vec<(f64, FiberParams)> = self
            .dispersion_map
            .iter()
            .map(|e| {
                let mut p = base;
                p.beta2 *= e.dispersion_scale;
                p.beta3 *= e.dispersion_scale;
                (e.length, p)
            })
            .collect();
        DispersionMap::periodic(&pattern, l_max)
    }

    pub fn two_mode_fiber(&self) -> Result<TwoModeFiber> {
        if self.fields.len() != 2 {
            return Err(Error::Config("two-mode fiber needs two fields".into()));
        }
        Ok(TwoModeFiber {
            maps: [self.field_map(0)?, self.field_map(1)?],
            delta: self.coupling.delta,
            b_xpm: self.coupling.b_xpm,
            c_xpm: self.coupling.c_xpm,
        })
    }

    /// Same run on `n_half` points (same window) with step `h` (same length).
    pub fn with_resolution(&self, n_half: usize, h: f64) -> Result<Self> {
        let l_max = self.l_max();
        let m = (l_max / h).round();
        if !(h > 0.0) || (m * h - l_max).abs() > 1e-9 * l_max.max(1.0) {
            return Err(Error::InvalidParameter { name: "h", reason: format!("{h} m does not divide the run length {l_max} m") });
        }
        let mut out = self.clone();
        out.grid = SimGrid::new(n_half, self.grid.half_width())?;
        out.h = h;
        out.m_steps = m as usize;
        Ok(out)
    }

    /// Same run with a different number of steps of the current size.
    pub fn with_steps(&self, m_steps: usize) -> Self {
        Self { m_steps, ..self.clone() }
    }

    /// Sets γ of every field.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        let mut out = self.clone();
        for f in &mut out.fields {
            f.fiber.gamma = gamma;
        }
        out
    }

    pub fn with_peak_power(&self, field: usize, p0: f64) -> Self {
        let mut out = self.clone();
        out.fields[field].pulse.peak_power = p0;
        out
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.coupling.delta = delta;
        out
    }
}
