//! Embedded benchmark presets and the measurements made on them.

use std::fmt;

use rayon::prelude::*;

use crate::analysis::{
    centroid, error_maxnorm, length_scales, oscillation_period, peak_power, pulse_energy, relative_maxnorm,
    ConvergenceLadder, Resolution, Rung,
};
use crate::config::{parse_config, RunSpec};
use crate::error::{Error, Result};
use crate::grid::ComplexEnvelope;
use crate::propagator::{propagate, propagate_two_mode, Diagnostic, ModeKind};

const PRESETS: [&str; 4] = [
    include_str!("../presets/benchmark1.toml"),
    include_str!("../presets/benchmark2.toml"),
    include_str!("../presets/benchmark3.toml"),
    include_str!("../presets/benchmark4.toml"),
];

/// Configuration text of benchmark `id` (1 to 4).
pub fn preset_text(id: u8) -> Option<&'static str> {
    PRESETS.get(usize::from(id).checked_sub(1)?).copied()
}

pub fn preset(id: u8) -> Result<RunSpec> {
    let text = preset_text(id).ok_or_else(|| Error::Config(format!("no benchmark {id}; choose 1 to 4")))?;
    parse_config(text)
}

/// Final fields and per-field diagnostics of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub fields: Vec<ComplexEnvelope>,
    pub diagnostics: Vec<Vec<Diagnostic>>,
}

/// Runs `spec` from its initial pulses to the end of the fiber.
pub fn simulate(spec: &RunSpec) -> Result<RunOutput> {
    let cfg = spec.sim_config()?;
    let initial = spec.initial_fields()?;
    match spec.mode {
        ModeKind::SingleMode => {
            let out = propagate(&initial[0], &cfg, &spec.field_map(0)?)?;
            Ok(RunOutput { fields: vec![out.field], diagnostics: vec![out.diagnostics] })
        }
        ModeKind::TwoMode => {
            let pair = [initial[0].clone(), initial[1].clone()];
            let out = propagate_two_mode(&pair, &cfg, &spec.two_mode_fiber()?)?;
            let [a, b] = out.fields;
            let [da, db] = out.diagnostics;
            Ok(RunOutput { fields: vec![a, b], diagnostics: vec![da, db] })
        }
    }
}

/// One compared quantity of a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub pass: bool,
}

/// Outcome of a benchmark run: pass/fail checks and informational notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(title: &str) -> Self {
        Self { title: title.to_string(), ..Default::default() }
    }

    fn check(&mut self, name: &str, value: f64, expected: String, pass: bool) {
        self.checks.push(Check { name: name.to_string(), value, expected, pass });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "  [{tag}] {}: {:.6e} (expected {})", c.name, c.value, c.expected)?;
        }
        Ok(())
    }
}

/// Peak-power reduction factor expected for benchmark 1.
pub const B1_PEAK_REDUCTION: f64 = 13.9;

/// Benchmark 1: peak reduction after 1 km and the characteristic lengths.
pub fn benchmark1(spec: &RunSpec) -> Result<Report> {
    let mut r = Report::new("benchmark 1: ultra-short pulse in uniform fiber");
    let pulse = spec.fields[0].pulse;
    let l = length_scales(&spec.fields[0].fiber, pulse.width, pulse.peak_power);
    r.notes.push(format!(
        "L_d = {:.4} m, third-order length = {:.4} m, L_nl = {:.1} m",
        l.dispersion, l.third_order, l.nonlinear
    ));
    let initial = &spec.initial_fields()?[0];
    let out = simulate(spec)?;
    let fin = &out.fields[0];
    let factor = peak_power(initial) / peak_power(fin);
    let drift = (pulse_energy(fin) / pulse_energy(initial) - 1.0).abs();
    r.notes.push(format!("N = {}, h = {} m, M = {}", spec.grid.n_half(), spec.h, spec.m_steps));
    r.check(
        "peak power reduction factor",
        factor,
        format!("{B1_PEAK_REDUCTION} ± 3%"),
        (factor / B1_PEAK_REDUCTION - 1.0).abs() <= 0.03,
    );
    r.check("relative energy drift", drift, "< 5e-3".into(), drift < 5e-3);
    Ok(r)
}

/// Peak-power oscillation period of one field's diagnostics.
pub fn peak_trace_period(diagnostics: &[Diagnostic]) -> Option<f64> {
    let z: Vec<f64> = diagnostics.iter().map(|d| d.z).collect();
    let p: Vec<f64> = diagnostics.iter().map(|d| d.peak_power).collect();
    oscillation_period(&z, &p)
}

/// Benchmark 2: peak-power oscillation period and exact recovery without
/// nonlinearity.
pub fn benchmark2(spec: &RunSpec) -> Result<Report> {
    let mut r = Report::new("benchmark 2: dispersion-managed line");
    let period_len: f64 = 2.0 * spec.dispersion_map.iter().map(|e| e.length).sum::<f64>() / spec.dispersion_map.len().max(1) as f64;
    let mut spec = spec.clone();
    spec.diagnostics_every = 1;
    let out = simulate(&spec)?;
    let period = peak_trace_period(&out.diagnostics[0]).unwrap_or(f64::NAN);
    r.check(
        "peak-power oscillation period [m]",
        period,
        format!("{period_len} ± {} m", spec.h),
        (period - period_len).abs() <= spec.h,
    );
    let recovery = gamma_zero_recovery(&spec)?;
    r.check("max-norm relative recovery error with gamma = 0", recovery, "< 1e-8".into(), recovery < 1e-8);
    Ok(r)
}

/// Relative max-norm distance between initial and final field with γ = 0.
pub fn gamma_zero_recovery(spec: &RunSpec) -> Result<f64> {
    let mut linear = spec.with_gamma(0.0);
    linear.diagnostics_every = 0;
    let initial = linear.initial_fields()?;
    let out = simulate(&linear)?;
    relative_maxnorm(&out.fields[0], &initial[0])
}

/// Two-mode run with a dark second field against the single-mode run of
/// field 1: max-norm intensity difference, W.
pub fn single_field_reduction(spec: &RunSpec) -> Result<f64> {
    let mut coupled = spec.with_peak_power(1, 0.0);
    coupled.diagnostics_every = 0;
    let mut single = coupled.clone();
    single.mode = ModeKind::SingleMode;
    single.fields.truncate(1);
    let (a, b) = rayon::join(|| simulate(&coupled), || simulate(&single));
    error_maxnorm(&a?.fields[0], &b?.fields[0])
}

/// Centroid of field 2 with the configured δ minus that with δ = 0, ps.
pub fn walk_off_shift(spec: &RunSpec) -> Result<f64> {
    let mut with = spec.clone();
    with.diagnostics_every = 0;
    let without = with.with_delta(0.0);
    let (a, b) = rayon::join(|| simulate(&with), || simulate(&without));
    Ok(centroid(&a?.fields[1])? - centroid(&b?.fields[1])?)
}

/// Benchmark 3: single-field reduction and the group-velocity walk-off.
pub fn benchmark3(spec: &RunSpec) -> Result<Report> {
    let mut r = Report::new("benchmark 3: two interacting pulses");
    let reduction = single_field_reduction(spec)?;
    r.check("two-mode vs single-mode, dark field 2 [W]", reduction, "< 1e-12".into(), reduction < 1e-12);
    let shift = walk_off_shift(spec)?;
    let expected = -spec.coupling.delta * spec.l_max();
    r.check(
        "pulse 2 centroid shift vs delta = 0 [ps]",
        shift,
        format!("{expected} ± 0.02"),
        (shift - expected).abs() <= 0.02,
    );
    Ok(r)
}

/// Benchmark 4: coupled pulses on the dispersion-managed line.
pub fn benchmark4(spec: &RunSpec) -> Result<Report> {
    let mut r = Report::new("benchmark 4: coupled pulses, dispersion-managed line");
    let period_len: f64 = 2.0 * spec.dispersion_map.iter().map(|e| e.length).sum::<f64>() / spec.dispersion_map.len().max(1) as f64;
    let mut spec = spec.clone();
    spec.diagnostics_every = 1;
    let initial = spec.initial_fields()?;
    let out = simulate(&spec)?;
    let walk = -spec.coupling.delta * spec.l_max();
    for (k, (fin, start)) in out.fields.iter().zip(&initial).enumerate() {
        let period = peak_trace_period(&out.diagnostics[k]).unwrap_or(f64::NAN);
        r.check(
            &format!("pulse {} peak-power oscillation period [m]", k + 1),
            period,
            format!("{period_len} ± {} m", spec.h),
            (period - period_len).abs() <= spec.h,
        );
        let frame = if k == 1 { walk } else { 0.0 };
        let delay = centroid(fin)? - centroid(start)? - frame;
        r.notes.push(format!("pulse {} centroid delay beyond walk-off: {:.4} fs", k + 1, delay * 1e3));
    }
    Ok(r)
}

/// Runs the benchmark with the given id.
pub fn run_benchmark(id: u8, spec: &RunSpec) -> Result<Report> {
    match id {
        1 => benchmark1(spec),
        2 => benchmark2(spec),
        3 => benchmark3(spec),
        4 => benchmark4(spec),
        _ => Err(Error::Config(format!("no benchmark {id}; choose 1 to 4"))),
    }
}

/// Refinement study plan: `rungs` runs starting at `base`, each doubling
/// the points and halving the step, against a reference refined
/// `reference_refinements` times beyond `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderPlan {
    pub base: Resolution,
    pub rungs: u32,
    pub reference_refinements: u32,
}

impl LadderPlan {
    pub fn new(spec: &RunSpec, n_half: usize, h: f64, rungs: u32, reference_refinements: u32) -> Result<Self> {
        let probe = spec.with_resolution(n_half, h)?;
        if reference_refinements < rungs {
            return Err(Error::InvalidLadder(format!(
                "reference must be at least as fine as the last rung ({reference_refinements} < {rungs})"
            )));
        }
        Ok(Self { base: Resolution { n_half, h, m_steps: probe.m_steps }, rungs, reference_refinements })
    }

    fn resolutions(&self) -> Vec<Resolution> {
        (0..self.rungs).map(|i| self.base.refined(i)).collect()
    }

    pub fn reference(&self) -> Resolution {
        self.base.refined(self.reference_refinements)
    }
}

/// Runs every rung and the reference (concurrently) and returns one
/// ladder per field of `spec`.
pub fn convergence_study(spec: &RunSpec, plan: &LadderPlan) -> Result<Vec<ConvergenceLadder>> {
    let mut all = plan.resolutions();
    let reference = plan.reference();
    if reference.n_half != all.last().map_or(0, |r| r.n_half) {
        all.push(reference);
    }
    let mut quiet = spec.clone();
    quiet.diagnostics_every = 0;
    // largest first so the long run starts early
    let outputs: Vec<Result<RunOutput>> = all
        .par_iter()
        .rev()
        .map(|res| simulate(&quiet.with_resolution(res.n_half, res.h)?))
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let outputs: Vec<RunOutput> = outputs.into_iter().collect::<Result<_>>()?;
    let ref_out = outputs.last().expect("reference run");
    let fields = spec.fields.len();
    (0..fields)
        .map(|k| {
            let rungs = plan
                .resolutions()
                .iter()
                .zip(&outputs)
                .map(|(res, out)| Ok(Rung { resolution: *res, e_inf: error_maxnorm(&out.fields[k], &ref_out.fields[k])? }))
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceLadder { rungs, reference })
        })
        .collect()
}
