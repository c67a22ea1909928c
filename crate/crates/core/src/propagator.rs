//! Symmetric split-step propagation for one or two fields.
//!
//! Each step of length `h` starting at `z` applies a linear half-step with
//! coefficients averaged over `[z, z + h/2]`, the nonlinear operator with
//! coefficients averaged over `[z, z + h]`, and a linear half-step averaged
//! over `[z + h/2, z + h]`.

use crate::analysis::{peak_power, pulse_energy};
use crate::error::{Error, Result};
use crate::grid::{madelung_forward, madelung_inverse, ComplexEnvelope, FiberParams, SimGrid, TwoModeParams};
use crate::linear_op::{build_plan_with, LinearCoefficients, LinearHalfStepPlan, Transform};
use crate::nonlinear_single::{apply_polar, NonlinearStepParams, Scheme};
use crate::nonlinear_twomode::{coupled_nonlinear_apply, TwoModePolar};

/// One piece of a piecewise-constant fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub z_start: f64,
    pub z_end: f64,
    pub params: FiberParams,
}

/// Piecewise-constant fiber coefficients covering `[0, l_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionMap {
    segments: Vec<Segment>,
}

const Z_TOL: f64 = 1e-9;

impl DispersionMap {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments.first().ok_or_else(|| Error::InvalidMap("no segments".into()))?;
        if first.z_start != 0.0 {
            return Err(Error::InvalidMap(format!("map starts at {} m, not 0", first.z_start)));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.z_end > s.z_start) || !s.z_end.is_finite() {
                return Err(Error::InvalidMap(format!("segment {i} has z_end {} <= z_start {}", s.z_end, s.z_start)));
            }
            if i > 0 && segments[i - 1].z_end != s.z_start {
                return Err(Error::InvalidMap(format!(
                    "gap or overlap between segment {} (ends {}) and {i} (starts {})",
                    i - 1,
                    segments[i - 1].z_end,
                    s.z_start
                )));
            }
            s.params.validate()?;
        }
        Ok(Self { segments })
    }

    pub fn constant(params: FiberParams, l_max: f64) -> Result<Self> {
        Self::new(vec![Segment { z_start: 0.0, z_end: l_max, params }])
    }

    /// Repeats `pattern` (pairs of length and parameters) until `l_max`;
    /// the last piece is cut at `l_max`.
    pub fn periodic(pattern: &[(f64, FiberParams)], l_max: f64) -> Result<Self> {
        if pattern.is_empty() || pattern.iter().any(|(len, _)| !(*len > 0.0)) {
            return Err(Error::InvalidMap("pattern needs positive segment lengths".into()));
        }
        if !(l_max > 0.0 && l_max.is_finite()) {
            return Err(Error::InvalidMap(format!("l_max must be positive, got {l_max}")));
        }
        let mut segments = Vec::new();
        let mut z = 0.0;
        // accumulate lengths by multiples of the period to avoid drift
        let period: f64 = pattern.iter().map(|(l, _)| l).sum();
        let mut rep = 0usize;
        'outer: loop {
            let mut offset = rep as f64 * period;
            for (len, params) in pattern {
                let end = (offset + len).min(l_max);
                segments.push(Segment { z_start: z, z_end: end, params: *params });
                z = end;
                offset += len;
                if end >= l_max {
                    break 'outer;
                }
            }
            rep += 1;
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn l_max(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.z_end)
    }

    /// Length-weighted mean of every coefficient over `[z0, z1]`.
    pub fn average(&self, z0: f64, z1: f64) -> Result<FiberParams> {
        let l_max = self.l_max();
        let tol = Z_TOL * l_max.max(1.0);
        if !(z0 >= -tol && z1 <= l_max + tol && z1 > z0) {
            return Err(Error::OutsideMap { z0, z1, l_max });
        }
        let (z0, z1) = (z0.max(0.0), z1.min(l_max));
        let first = self.segments.partition_point(|s| s.z_end <= z0).min(self.segments.len() - 1);
        let seg = &self.segments[first];
        if z1 <= seg.z_end {
            return Ok(seg.params);
        }
        let mut acc = [0.0f64; 6];
        for s in &self.segments[first..] {
            if s.z_start >= z1 {
                break;
            }
            let w = s.z_end.min(z1) - s.z_start.max(z0);
            if w <= 0.0 {
                continue;
            }
            let p = &s.params;
            for (a, v) in acc.iter_mut().zip([p.alpha, p.beta2, p.beta3, p.gamma, p.s_steep, p.t_raman]) {
                *a += w * v;
            }
        }
        let len = z1 - z0;
        Ok(FiberParams {
            alpha: acc[0] / len,
            beta2: acc[1] / len,
            beta3: acc[2] / len,
            gamma: acc[3] / len,
            s_steep: acc[4] / len,
            t_raman: acc[5] / len,
            lambda0: seg.params.lambda0,
        })
    }
}

/// Exact length-weighted parameter average over `[z0, z1]`.
pub fn average_params(map: &DispersionMap, z0: f64, z1: f64) -> Result<FiberParams> {
    map.average(z0, z1)
}

/// Fiber description for the coupled two-mode model.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFiber {
    pub maps: [DispersionMap; 2],
    pub delta: f64,
    pub b_xpm: [f64; 2],
    pub c_xpm: [f64; 2],
}

impl TwoModeFiber {
    pub fn constant(params: TwoModeParams, l_max: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            maps: [
                DispersionMap::constant(params.modes[0], l_max)?,
                DispersionMap::constant(params.modes[1], l_max)?,
            ],
            delta: params.delta,
            b_xpm: params.b_xpm,
            c_xpm: params.c_xpm,
        })
    }

    pub fn params_over(&self, z0: f64, z1: f64) -> Result<TwoModeParams> {
        let p = TwoModeParams {
            modes: [self.maps[0].average(z0, z1)?, self.maps[1].average(z0, z1)?],
            delta: self.delta,
            b_xpm: self.b_xpm,
            c_xpm: self.c_xpm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn l_max(&self) -> f64 {
        self.maps[0].l_max().min(self.maps[1].l_max())
    }
}

/// Which equation set a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeKind {
    #[default]
    SingleMode,
    TwoMode,
}

/// Temporal grid and propagation plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub grid: SimGrid,
    /// Spatial step, m.
    pub h: f64,
    pub m_steps: usize,
    pub scheme: Scheme,
    pub mode: ModeKind,
    /// Record diagnostics every this many steps; 0 disables them.
    pub diagnostics_every: usize,
}

impl SimConfig {
    pub fn new(grid: SimGrid, h: f64, m_steps: usize, scheme: Scheme) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter { name: "h", reason: format!("must be > 0, got {h}") });
        }
        Ok(Self { grid, h, m_steps, scheme, mode: ModeKind::SingleMode, diagnostics_every: 1 })
    }

    pub fn l_max(&self) -> f64 {
        self.m_steps as f64 * self.h
    }

    fn z_at(&self, step: usize) -> f64 {
        step as f64 * self.h
    }
}

/// Per-step record of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub z: f64,
    /// `max_j |A_j|²`, W.
    pub peak_power: f64,
    /// `Σ_j |A_j|² ΔT`, W·ps.
    pub energy: f64,
    /// Nonlinear substeps taken in the step ending at `z` (0 at `z = 0`).
    pub substeps: usize,
}

impl Diagnostic {
    fn of(a: &ComplexEnvelope, z: f64, substeps: usize) -> Self {
        Self { z, peak_power: peak_power(a), energy: pulse_energy(a), substeps }
    }
}

/// Linear plans keyed on their exact coefficients and step.
#[derive(Debug)]
struct PlanCache {
    grid: SimGrid,
    transform: Transform,
    plans: Vec<LinearHalfStepPlan>,
}

const PLAN_CACHE_SIZE: usize = 8;

impl PlanCache {
    fn new(grid: SimGrid) -> Self {
        Self { grid, transform: Transform::new(grid.len()), plans: Vec::new() }
    }

    fn get(&mut self, coefficients: LinearCoefficients, h: f64) -> Result<&LinearHalfStepPlan> {
        if let Some(i) = self.plans.iter().position(|p| p.coefficients() == coefficients && p.step() == h) {
            return Ok(&self.plans[i]);
        }
        if self.plans.len() == PLAN_CACHE_SIZE {
            self.plans.remove(0);
        }
        self.plans.push(build_plan_with(self.grid, coefficients, h, self.transform.clone())?);
        Ok(self.plans.last().unwrap())
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.plans.len()
    }
}

fn linear_coefficients(p: &FiberParams, delta: f64) -> LinearCoefficients {
    LinearCoefficients { alpha: p.alpha, beta2: p.beta2, beta3: p.beta3, delta }
}

fn nonlinear_params(p: &FiberParams, scheme: Scheme) -> NonlinearStepParams {
    NonlinearStepParams { gamma: p.gamma, s_steep: p.s_steep, t_raman: p.t_raman, scheme }
}

fn check_step(z: f64, h: f64, l_max: f64) -> Result<()> {
    if !(h > 0.0) || z + h > l_max * (1.0 + Z_TOL) + Z_TOL {
        return Err(Error::OutsideMap { z0: z, z1: z + h, l_max });
    }
    Ok(())
}

/// Reusable single-mode stepper holding plan cache and FFT scratch.
#[derive(Debug)]
pub struct SingleModeStepper<'a> {
    map: &'a DispersionMap,
    scheme: Scheme,
    cache: PlanCache,
    scratch: Vec<num_complex::Complex64>,
}

impl<'a> SingleModeStepper<'a> {
    pub fn new(map: &'a DispersionMap, grid: SimGrid, scheme: Scheme) -> Self {
        Self { map, scheme, cache: PlanCache::new(grid), scratch: Vec::new() }
    }

    /// Advances `a` from `z` to `z + h`; returns the nonlinear substep count.
    pub fn step(&mut self, a: &mut ComplexEnvelope, z: f64, h: f64) -> Result<usize> {
        if *a.grid() != self.cache.grid {
            return Err(Error::GridMismatch("field and stepper grids differ".into()));
        }
        check_step(z, h, self.map.l_max())?;
        let first = self.map.average(z, z + 0.5 * h)?;
        let middle = self.map.average(z, z + h)?;
        let second = self.map.average(z + 0.5 * h, z + h)?;

        self.cache
            .get(linear_coefficients(&first, 0.0), h)?
            .apply_in_place(a.samples_mut(), &mut self.scratch);

        let mut polar = madelung_forward(a);
        let k = apply_polar(&mut polar, &nonlinear_params(&middle, self.scheme), h, a.grid().dt())?;
        *a = madelung_inverse(&polar, *a.grid())?;

        self.cache
            .get(linear_coefficients(&second, 0.0), h)?
            .apply_in_place(a.samples_mut(), &mut self.scratch);
        a.check_finite()?;
        Ok(k)
    }
}

/// Reusable two-mode stepper.
#[derive(Debug)]
pub struct TwoModeStepper<'a> {
    fiber: &'a TwoModeFiber,
    scheme: Scheme,
    cache: PlanCache,
    scratch: Vec<num_complex::Complex64>,
}

impl<'a> TwoModeStepper<'a> {
    pub fn new(fiber: &'a TwoModeFiber, grid: SimGrid, scheme: Scheme) -> Self {
        Self { fiber, scheme, cache: PlanCache::new(grid), scratch: Vec::new() }
    }

    fn linear(&mut self, fields: &mut [ComplexEnvelope; 2], params: &TwoModeParams, h: f64) -> Result<()> {
        for (k, field) in fields.iter_mut().enumerate() {
            if field.samples().iter().all(|s| s.re == 0.0 && s.im == 0.0) {
                continue;
            }
            // field 1 defines the retarded frame
            let delta = if k == 1 { params.delta } else { 0.0 };
            self.cache
                .get(linear_coefficients(&params.modes[k], delta), h)?
                .apply_in_place(field.samples_mut(), &mut self.scratch);
        }
        Ok(())
    }

    /// Advances both fields from `z` to `z + h`; returns per-field substep counts.
    pub fn step(&mut self, fields: &mut [ComplexEnvelope; 2], z: f64, h: f64) -> Result<[usize; 2]> {
        for f in fields.iter() {
            if *f.grid() != self.cache.grid {
                return Err(Error::GridMismatch("field and stepper grids differ".into()));
            }
        }
        check_step(z, h, self.fiber.l_max())?;
        let first = self.fiber.params_over(z, z + 0.5 * h)?;
        let middle = self.fiber.params_over(z, z + h)?;
        let second = self.fiber.params_over(z + 0.5 * h, z + h)?;

        self.linear(fields, &first, h)?;
        let grid = *fields[0].grid();
        let mut polar = TwoModePolar { field: [madelung_forward(&fields[0]), madelung_forward(&fields[1])] };
        let k = coupled_nonlinear_apply(&mut polar, &middle, h, grid.dt(), self.scheme)?;
        let [p1, p2] = &polar.field;
        fields[0] = madelung_inverse(p1, grid)?;
        fields[1] = madelung_inverse(p2, grid)?;
        self.linear(fields, &second, h)?;
        for f in fields.iter() {
            f.check_finite()?;
        }
        Ok([k.max_field1(), k.field2])
    }
}

/// One symmetric split step of a single field.
pub fn ssfm_step_single(a: &ComplexEnvelope, map: &DispersionMap, z: f64, h: f64, cfg: &SimConfig) -> Result<ComplexEnvelope> {
    let mut out = a.clone();
    SingleModeStepper::new(map, *a.grid(), cfg.scheme).step(&mut out, z, h)?;
    Ok(out)
}

/// One symmetric split step of both fields.
pub fn ssfm_step_two_mode(
    fields: &[ComplexEnvelope; 2],
    fiber: &TwoModeFiber,
    z: f64,
    h: f64,
    cfg: &SimConfig,
) -> Result<[ComplexEnvelope; 2]> {
    let mut out = fields.clone();
    TwoModeStepper::new(fiber, *fields[0].grid(), cfg.scheme).step(&mut out, z, h)?;
    Ok(out)
}

/// Result of a single-mode run.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub field: ComplexEnvelope,
    pub diagnostics: Vec<Diagnostic>,
}

/// Result of a two-mode run.
#[derive(Debug, Clone)]
pub struct TwoModePropagation {
    pub fields: [ComplexEnvelope; 2],
    pub diagnostics: [Vec<Diagnostic>; 2],
}

fn record(cfg: &SimConfig, step: usize) -> bool {
    cfg.diagnostics_every > 0 && (step.is_multiple_of(cfg.diagnostics_every) || step == cfg.m_steps)
}

/// Applies `cfg.m_steps` steps of size `cfg.h` starting at `z = 0`.
pub fn propagate(initial: &ComplexEnvelope, cfg: &SimConfig, map: &DispersionMap) -> Result<Propagation> {
    if *initial.grid() != cfg.grid {
        return Err(Error::GridMismatch("initial field is not on the configured grid".into()));
    }
    let mut field = initial.clone();
    let mut diagnostics = Vec::new();
    if record(cfg, 0) {
        diagnostics.push(Diagnostic::of(&field, 0.0, 0));
    }
    let mut stepper = SingleModeStepper::new(map, cfg.grid, cfg.scheme);
    for n in 0..cfg.m_steps {
        let k = stepper.step(&mut field, cfg.z_at(n), cfg.h)?;
        if record(cfg, n + 1) {
            diagnostics.push(Diagnostic::of(&field, cfg.z_at(n + 1), k));
        }
    }
    Ok(Propagation { field, diagnostics })
}

/// Two-mode counterpart of [`propagate`].
pub fn propagate_two_mode(initial: &[ComplexEnvelope; 2], cfg: &SimConfig, fiber: &TwoModeFiber) -> Result<TwoModePropagation> {
    if initial.iter().any(|f| *f.grid() != cfg.grid) {
        return Err(Error::GridMismatch("initial fields are not on the configured grid".into()));
    }
    let mut fields = initial.clone();
    let mut diagnostics = [Vec::new(), Vec::new()];
    let push = |diagnostics: &mut [Vec<Diagnostic>; 2], fields: &[ComplexEnvelope; 2], z: f64, k: [usize; 2]| {
        for i in 0..2 {
            diagnostics[i].push(Diagnostic::of(&fields[i], z, k[i]));
        }
    };
    if record(cfg, 0) {
        push(&mut diagnostics, &fields, 0.0, [0, 0]);
    }
    let mut stepper = TwoModeStepper::new(fiber, cfg.grid, cfg.scheme);
    for n in 0..cfg.m_steps {
        let k = stepper.step(&mut fields, cfg.z_at(n), cfg.h)?;
        if record(cfg, n + 1) {
            push(&mut diagnostics, &fields, cfg.z_at(n + 1), k);
        }
    }
    Ok(TwoModePropagation { fields, diagnostics })
}
