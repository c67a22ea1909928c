//! Nonlinear sub-operator of the single-mode equation, solved in the
//! Madelung variables `(I, φ)`.
//!
//! Under `A = √I e^{iφ}` the Kerr, self-steepening and Raman terms become
//! the quasilinear system
//!
//! ```text
//! ∂z I + 3γS I ∂T I                 = 0
//! ∂z φ +  γS I ∂T φ + γT_R ∂T I     = γ I
//! ```
//!
//! whose characteristic speeds `3γSI` and `γSI` share the sign of `γ`. The
//! homogeneous part is advanced with one-sided differences taken against
//! that direction; the source is integrated separately.
//!
//! The kernel below is written for one field with an optional frozen
//! partner intensity `I_l` and cross-coupling factors `B`, `C`. With no
//! partner it is the single-mode scheme; the two-mode operator drives the
//! same code with a partner present.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::grid::{madelung_forward, madelung_inverse, ComplexEnvelope, PolarState};

/// Numerical scheme for the homogeneous advection part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    FirstOrderUpwind,
    #[default]
    MusclVanAlbada,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearStepParams {
    /// 1/(W·m)
    pub gamma: f64,
    /// ps
    pub s_steep: f64,
    /// ps
    pub t_raman: f64,
    pub scheme: Scheme,
}

impl NonlinearStepParams {
    pub(crate) fn coefficients(&self) -> FieldCoefficients {
        FieldCoefficients {
            gamma: self.gamma,
            s_steep: self.s_steep,
            t_raman: self.t_raman,
            b_xpm: 0.0,
            c_xpm: 0.0,
        }
    }
}

/// Coefficients of one field's sub-operator, including the coupling to a
/// frozen partner field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FieldCoefficients {
    pub gamma: f64,
    pub s_steep: f64,
    pub t_raman: f64,
    pub b_xpm: f64,
    pub c_xpm: f64,
}

/// Phase difference `φ_b − φ_a` reduced to the representative of smallest
/// magnitude among `{Δθ, Δθ + 2π, Δθ − 2π}`, ties resolved in that order.
pub fn phase_delta(phi_a: f64, phi_b: f64) -> f64 {
    wrap_phase_difference(phi_b - phi_a)
}

pub(crate) fn wrap_phase_difference(mut d: f64) -> f64 {
    let a = d.abs();
    if a <= PI {
        return d;
    }
    if a > 3.0 * PI {
        // unwrapped phases can drift apart by more than one turn
        d -= TAU * (d / TAU).round();
    }
    let plus = d + TAU;
    let minus = d - TAU;
    let mut best = d;
    if plus.abs() < best.abs() {
        best = plus;
    }
    if minus.abs() < best.abs() {
        best = minus;
    }
    best
}

/// van Albada limiter `Φ(r) = max(0, (r² + r)/(1 + r²))`; `Φ(±∞) = 1`.
pub fn limiter_van_albada(r: f64) -> f64 {
    if r.is_infinite() {
        return 1.0;
    }
    if r.is_nan() {
        return 0.0;
    }
    ((r * r + r) / (1.0 + r * r)).max(0.0)
}

/// Limited slope `σ = Φ(Δ₋/Δ₊)Δ₊ + Φ(Δ₊/Δ₋)Δ₋` in division-safe form.
///
/// Each term equals `Δ₋Δ₊(Δ₋+Δ₊)/(Δ₋²+Δ₊²)` when its limiter argument
/// is on the positive branch and zero otherwise: both terms are active
/// for slopes of equal sign, one term for slopes of opposite sign.
pub fn limited_slope(d_minus: f64, d_plus: f64) -> f64 {
    let scale = d_minus.abs().max(d_plus.abs());
    if scale == 0.0 {
        return 0.0;
    }
    let a = d_minus / scale;
    let b = d_plus / scale;
    let sum = a + b;
    let active = (a * sum > 0.0) as u8 + (b * sum > 0.0) as u8;
    if active == 0 {
        return 0.0;
    }
    f64::from(active) * scale * (a * b * sum / (a * a + b * b))
}

/// CFL number `|γ| S max_j(3 I + B I_l) dz / ΔT` of one field.
pub(crate) fn cfl_number(c: &FieldCoefficients, speed_bound: f64, dz: f64, dt: f64) -> f64 {
    c.gamma.abs() * c.s_steep * speed_bound * dz / dt
}

/// `max_j (3 I_j + B I_{l,j})`.
pub(crate) fn speed_bound(state: &PolarState, partner: Option<&[f64]>, b_xpm: f64) -> f64 {
    let mut bound = 0.0f64;
    for (j, &i) in state.intensity.iter().enumerate() {
        bound = bound.max(3.0 * i + b_xpm * partner_at(partner, j));
    }
    bound
}

pub(crate) fn substeps_for(c: &FieldCoefficients, speed_bound: f64, h: f64, dt: f64) -> Result<usize> {
    let ratio = cfl_number(c, speed_bound, h, dt);
    if !ratio.is_finite() {
        return Err(Error::CflViolation { ratio });
    }
    let mut k = (ratio.ceil() as usize).max(1);
    while cfl_number(c, speed_bound, h / k as f64, dt) > 1.0 {
        k += 1;
    }
    Ok(k)
}

/// Smallest `k ≥ 1` with `3|γ| S i_max (h/k) / ΔT ≤ 1`.
pub fn cfl_substep_count(params: &NonlinearStepParams, i_max: f64, h: f64, dt: f64) -> Result<usize> {
    substeps_for(&params.coefficients(), 3.0 * i_max, h, dt)
}

#[inline]
fn partner_at(partner: Option<&[f64]>, j: usize) -> f64 {
    match partner {
        Some(p) => p[j],
        None => 0.0,
    }
}

/// Indices `(lo, hi)` of the one-sided difference at cell `j`: backward
/// for `γ > 0`, forward for `γ < 0`, periodic on the window.
#[inline]
fn stencil(j: usize, n: usize, gamma: f64) -> (usize, usize) {
    if gamma > 0.0 {
        (if j == 0 { n - 1 } else { j - 1 }, j)
    } else {
        (j, if j + 1 == n { 0 } else { j + 1 })
    }
}

fn check_inputs(state: &PolarState, partner: Option<&[f64]>) -> Result<()> {
    let n = state.intensity.len();
    if state.phase.len() != n || partner.is_some_and(|p| p.len() != n) {
        return Err(Error::GridMismatch("state and partner lengths differ".into()));
    }
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
    }
    if let Some((index, &value)) = state.intensity.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeIntensity { index, value });
    }
    Ok(())
}

fn check_cfl(state: &PolarState, partner: Option<&[f64]>, c: &FieldCoefficients, dz: f64, dt: f64) -> Result<()> {
    let ratio = cfl_number(c, speed_bound(state, partner, c.b_xpm), dz, dt);
    if ratio > 1.0 + 1e-12 || ratio.is_nan() {
        return Err(Error::CflViolation { ratio });
    }
    Ok(())
}

/// First-order upwind update of the homogeneous system, no source.
pub(crate) fn homogeneous_upwind(
    state: &PolarState,
    partner: Option<&[f64]>,
    c: &FieldCoefficients,
    dz: f64,
    dt: f64,
) -> PolarState {
    let n = state.len();
    let mut out = state.clone();
    if c.gamma == 0.0 {
        return out;
    }
    let (g, s, tr, b) = (c.gamma, c.s_steep, c.t_raman, c.b_xpm);
    let r = dz / dt;
    let (ii, ph) = (&state.intensity, &state.phase);
    for j in 0..n {
        let (lo, hi) = stencil(j, n, g);
        let i_avg = 0.5 * (ii[lo] + ii[hi]);
        let d_i = ii[hi] - ii[lo];
        let d_phi = wrap_phase_difference(ph[hi] - ph[lo]);
        let (l_lo, l_hi) = (partner_at(partner, lo), partner_at(partner, hi));
        let l_avg = 0.5 * (l_lo + l_hi);
        let d_l = l_hi - l_lo;
        out.intensity[j] = ii[j] - r * g * s * ((3.0 * i_avg + b * l_avg) * d_i + 2.0 * b * i_avg * d_l);
        out.phase[j] = ph[j] - r * g * (tr * (d_i + b * d_l) + s * (i_avg + b * l_avg) * d_phi);
    }
    out
}

/// Explicit source update `φ += dz γ (I + C I_l)`.
fn apply_source(state: &mut PolarState, partner: Option<&[f64]>, c: &FieldCoefficients, dz: f64) {
    if c.gamma == 0.0 {
        return;
    }
    for (j, (phi, &i)) in state.phase.iter_mut().zip(&state.intensity).enumerate() {
        *phi += dz * c.gamma * (i + c.c_xpm * partner_at(partner, j));
    }
}

pub(crate) fn first_order_field_step(
    state: &PolarState,
    partner: Option<&[f64]>,
    c: &FieldCoefficients,
    dz: f64,
    dt: f64,
) -> Result<PolarState> {
    check_inputs(state, partner)?;
    check_cfl(state, partner, c, dz, dt)?;
    let mut next = homogeneous_upwind(state, partner, c, dz, dt);
    apply_source(&mut next, partner, c, dz);
    Ok(next)
}

pub(crate) fn muscl_field_step(
    state: &PolarState,
    partner: Option<&[f64]>,
    c: &FieldCoefficients,
    dz: f64,
    dt: f64,
) -> Result<PolarState> {
    check_inputs(state, partner)?;
    check_cfl(state, partner, c, dz, dt)?;
    if c.gamma == 0.0 {
        return Ok(state.clone());
    }
    let n = state.len();
    let mut start = state.clone();
    apply_source(&mut start, partner, c, 0.5 * dz);

    // predictor: half a first-order step
    let bar = homogeneous_upwind(&start, partner, c, 0.5 * dz, dt);

    let prev = |j: usize| if j == 0 { n - 1 } else { j - 1 };
    let next = |j: usize| if j + 1 == n { 0 } else { j + 1 };
    let mut slope_i = vec![0.0; n];
    let mut slope_phi = vec![0.0; n];
    for j in 0..n {
        let (p, q) = (prev(j), next(j));
        slope_i[j] = limited_slope(bar.intensity[j] - bar.intensity[p], bar.intensity[q] - bar.intensity[j]);
        slope_phi[j] = limited_slope(
            wrap_phase_difference(bar.phase[j] - bar.phase[p]),
            wrap_phase_difference(bar.phase[q] - bar.phase[j]),
        );
    }

    let (g, s, tr, b) = (c.gamma, c.s_steep, c.t_raman, c.b_xpm);
    let r = dz / dt;
    let mut out = start.clone();
    for j in 0..n {
        let (lo, hi) = stencil(j, n, g);
        // interface term, coefficients at the mean of the predictor states
        let i_avg = 0.5 * (bar.intensity[lo] + bar.intensity[hi]);
        let d_i = (bar.intensity[hi] - bar.intensity[lo]) - 0.25 * (slope_i[hi] + slope_i[lo]);
        let d_phi = wrap_phase_difference(bar.phase[hi] - bar.phase[lo]) - 0.25 * (slope_phi[hi] + slope_phi[lo]);
        let (l_lo, l_hi) = (partner_at(partner, lo), partner_at(partner, hi));
        let l_avg = 0.5 * (l_lo + l_hi);
        let d_l = l_hi - l_lo;
        // cell term q^r - q^l, coefficients at the predictor state
        let i_cell = bar.intensity[j];
        let l_cell = partner_at(partner, j);
        let d_i_cell = 0.5 * slope_i[j];
        let d_phi_cell = 0.5 * slope_phi[j];

        out.intensity[j] = start.intensity[j]
            - r * g * s
                * ((3.0 * i_avg + b * l_avg) * d_i
                    + 2.0 * b * i_avg * d_l
                    + (3.0 * i_cell + b * l_cell) * d_i_cell);
        out.phase[j] = start.phase[j]
            - r * g
                * (tr * (d_i + b * d_l)
                    + s * (i_avg + b * l_avg) * d_phi
                    + tr * d_i_cell
                    + s * (i_cell + b * l_cell) * d_phi_cell);
    }
    clamp_roundoff(&mut out.intensity, state.max_intensity());
    apply_source(&mut out, partner, c, 0.5 * dz);
    Ok(out)
}

/// The reconstruction is not positivity preserving at the level of
/// rounding; negatives this small relative to the peak are set to zero.
/// Larger ones are left for the caller's intensity check to reject.
fn clamp_roundoff(intensity: &mut [f64], scale: f64) {
    let floor = -ROUNDOFF_FLOOR * scale;
    for v in intensity.iter_mut() {
        if *v < 0.0 && *v >= floor {
            *v = 0.0;
        }
    }
}

const ROUNDOFF_FLOOR: f64 = 1e-12;

pub(crate) fn field_step(
    state: &PolarState,
    partner: Option<&[f64]>,
    c: &FieldCoefficients,
    scheme: Scheme,
    dz: f64,
    dt: f64,
) -> Result<PolarState> {
    match scheme {
        Scheme::FirstOrderUpwind => first_order_field_step(state, partner, c, dz, dt),
        Scheme::MusclVanAlbada => muscl_field_step(state, partner, c, dz, dt),
    }
}

/// Advances one field over `h`, splitting into CFL-safe substeps computed
/// from the state at entry. Returns the number of substeps taken.
pub(crate) fn advance_field(
    state: &mut PolarState,
    partner: Option<&[f64]>,
    c: &FieldCoefficients,
    scheme: Scheme,
    h: f64,
    dt: f64,
) -> Result<usize> {
    if c.gamma == 0.0 {
        return Ok(1);
    }
    let k = substeps_for(c, speed_bound(state, partner, c.b_xpm), h, dt)?;
    if k > 1 {
        log::debug!("nonlinear step of {h} m split into {k} substeps");
    }
    let dz = h / k as f64;
    for _ in 0..k {
        *state = field_step(state, partner, c, scheme, dz, dt)?;
    }
    Ok(k)
}

/// One first-order upwind step of size `dz`, including the source update.
pub fn upwind_first_order_step(
    state: &PolarState,
    params: &NonlinearStepParams,
    dz: f64,
    dt: f64,
) -> Result<PolarState> {
    first_order_field_step(state, None, &params.coefficients(), dz, dt)
}

/// Homogeneous (source-free) first-order upwind step.
pub fn homogeneous_upwind_step(
    state: &PolarState,
    params: &NonlinearStepParams,
    dz: f64,
    dt: f64,
) -> Result<PolarState> {
    let c = params.coefficients();
    check_inputs(state, None)?;
    check_cfl(state, None, &c, dz, dt)?;
    Ok(homogeneous_upwind(state, None, &c, dz, dt))
}

/// One slope-limited high-resolution step of size `dz`, with the source
/// split symmetrically around it.
pub fn muscl_step(state: &PolarState, params: &NonlinearStepParams, dz: f64, dt: f64) -> Result<PolarState> {
    muscl_field_step(state, None, &params.coefficients(), dz, dt)
}

/// Advances a polar state over `h` with the configured scheme and CFL
/// substepping. Returns the substep count.
pub fn apply_polar(state: &mut PolarState, params: &NonlinearStepParams, h: f64, dt: f64) -> Result<usize> {
    check_inputs(state, None)?;
    advance_field(state, None, &params.coefficients(), params.scheme, h, dt)
}

/// Nonlinear sub-operator over a step `h`: Madelung transform, substepped
/// scheme, transform back.
pub fn nonlinear_operator_apply(a: &ComplexEnvelope, params: &NonlinearStepParams, h: f64) -> Result<ComplexEnvelope> {
    let mut state = madelung_forward(a);
    apply_polar(&mut state, params, h, a.grid().dt())?;
    madelung_inverse(&state, *a.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian_pulse, SimGrid};

    fn params(gamma: f64, s: f64, tr: f64, scheme: Scheme) -> NonlinearStepParams {
        NonlinearStepParams { gamma, s_steep: s, t_raman: tr, scheme }
    }

    #[test]
    fn phase_delta_examples() {
        assert_eq!(phase_delta(0.0, 0.0), 0.0);
        assert!((phase_delta(0.0, 3.5) - (3.5 - TAU)).abs() < 1e-15);
        assert!((phase_delta(0.0, 3.5) + 2.7832).abs() < 1e-4);
        assert_eq!(phase_delta(0.0, 3.0), 3.0);
        assert_eq!(phase_delta(0.0, -3.0), -3.0);
        assert_eq!(phase_delta(0.0, TAU), 0.0);
        // tie at exactly π keeps Δθ
        assert_eq!(phase_delta(0.0, PI), PI);
        assert!(phase_delta(0.0, 10.0).abs() <= PI);
    }

    #[test]
    fn limiter_values() {
        assert_eq!(limiter_van_albada(1.0), 1.0);
        assert_eq!(limiter_van_albada(-1.0), 0.0);
        assert!((limiter_van_albada(2.0) - 1.2).abs() < 1e-15);
        assert_eq!(limiter_van_albada(-0.5), 0.0);
        assert_eq!(limiter_van_albada(f64::INFINITY), 1.0);
        assert!((limiter_van_albada(-3.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn slope_matches_limiter_form() {
        let cases = [(1.0, 1.0), (1.0, 2.0), (-2.0, -0.5), (3.0, -1.0), (-1.0, 4.0), (0.7, -0.7)];
        for (dm, dp) in cases {
            let direct = limiter_van_albada(dm / dp) * dp + limiter_van_albada(dp / dm) * dm;
            assert!((limited_slope(dm, dp) - direct).abs() < 1e-14, "{dm} {dp}");
        }
        assert_eq!(limited_slope(0.0, 0.0), 0.0);
        assert_eq!(limited_slope(0.0, 2.0), 0.0);
        assert_eq!(limited_slope(-3.0, 0.0), 0.0);
        // linear data: the slope is twice the difference
        assert_eq!(limited_slope(0.25, 0.25), 0.5);
        // tiny differences must not underflow into NaN
        assert!((limited_slope(1e-200, 1e-200) - 2e-200).abs() < 1e-214);
    }

    #[test]
    fn cfl_counts() {
        let p = params(1.0, 0.0, 0.0, Scheme::MusclVanAlbada);
        assert_eq!(cfl_substep_count(&p, 5.0, 10.0, 0.1).unwrap(), 1);
        let p = params(1.0, 1.0, 0.0, Scheme::MusclVanAlbada);
        assert_eq!(cfl_substep_count(&p, 0.0, 10.0, 0.1).unwrap(), 1);
        // 3 · 1 · 1 · (2.5/3) · 1 / 1 = 2.5
        let p = params(1.0, 1.0, 0.0, Scheme::MusclVanAlbada);
        assert_eq!(cfl_substep_count(&p, 2.5 / 3.0, 1.0, 1.0).unwrap(), 3);
        assert_eq!(cfl_substep_count(&p, 1.0 / 3.0, 1.0, 1.0).unwrap(), 1);
    }

    #[test]
    fn zero_gamma_is_identity() {
        let state = PolarState { intensity: vec![1.0, 2.0, 0.5, 0.0], phase: vec![0.1, -0.2, 3.0, 0.0] };
        for scheme in [Scheme::FirstOrderUpwind, Scheme::MusclVanAlbada] {
            let p = params(0.0, 1.0, 0.5, scheme);
            assert_eq!(upwind_first_order_step(&state, &p, 0.1, 1.0).unwrap(), state);
            assert_eq!(muscl_step(&state, &p, 0.1, 1.0).unwrap(), state);
        }
    }

    #[test]
    fn pure_kerr_rotation() {
        let state = PolarState { intensity: vec![1.0, 2.0, 0.5, 0.0], phase: vec![0.1, -0.2, 3.0, 0.0] };
        let p = params(0.7, 0.0, 0.0, Scheme::FirstOrderUpwind);
        let dz = 0.3;
        let out = upwind_first_order_step(&state, &p, dz, 1.0).unwrap();
        assert_eq!(out.intensity, state.intensity);
        for j in 0..4 {
            assert!((out.phase[j] - (state.phase[j] + dz * 0.7 * state.intensity[j])).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_state_under_muscl() {
        let state = PolarState { intensity: vec![0.8; 8], phase: vec![1.1; 8] };
        let p = params(2.0, 0.05, 0.01, Scheme::MusclVanAlbada);
        let dz = 0.5;
        let out = muscl_step(&state, &p, dz, 1.0).unwrap();
        for j in 0..8 {
            assert_eq!(out.intensity[j], 0.8);
            assert!((out.phase[j] - (1.1 + dz * 2.0 * 0.8)).abs() < 1e-14);
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let state = PolarState { intensity: vec![1.0, 2.0, 1.0, 1.0], phase: vec![0.0; 4] };
        let p = params(1.0, 1.0, 0.0, Scheme::FirstOrderUpwind);
        // 3 · 2 · dz / dt = 6 > 1
        assert!(matches!(upwind_first_order_step(&state, &p, 1.0, 1.0), Err(Error::CflViolation { .. })));
        assert!(matches!(muscl_step(&state, &p, 1.0, 1.0), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn operator_substeps_when_needed() {
        let mut state = PolarState { intensity: vec![1.0, 2.0, 1.0, 1.0], phase: vec![0.0; 4] };
        let p = params(1.0, 1.0, 0.0, Scheme::MusclVanAlbada);
        let k = apply_polar(&mut state, &p, 1.0, 1.0).unwrap();
        assert_eq!(k, 6);
        assert!(state.intensity.iter().all(|i| i.is_finite() && *i >= 0.0));
    }

    #[test]
    fn kerr_operator_closed_form() {
        let g = SimGrid::new(64, 2.0).unwrap();
        let a = gaussian_pulse(g, 0.3, 0.4, 1.5).unwrap();
        let h = 12.0;
        let gamma = 0.9;
        for scheme in [Scheme::FirstOrderUpwind, Scheme::MusclVanAlbada] {
            let out = nonlinear_operator_apply(&a, &params(gamma, 0.0, 0.0, scheme), h).unwrap();
            for (x, y) in a.samples().iter().zip(out.samples()) {
                let exact = x * num_complex::Complex64::new(0.0, gamma * x.norm_sqr() * h).exp();
                assert!((exact - y).norm() <= 1e-13 * x.norm().max(1e-300), "{exact} {y}");
            }
        }
    }
}
