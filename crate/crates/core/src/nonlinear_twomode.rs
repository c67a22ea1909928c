//! Coupled nonlinear sub-operator of the two-mode model.
//!
//! The full system in `u = (I₁, φ₁, I₂, φ₂)` is
//!
//! ```text
//! ∂z u + B(u) ∂T u = r(u)
//!
//!        | γ₁S₁(3I₁+B₁I₂)  0               2γ₁S₁B₁I₁        0              |
//! B(u) = | γ₁T_R           γ₁S₁(I₁+B₁I₂)   γ₁T_R B₁         0              |
//!        | 2γ₂S₂B₂I₂       0               γ₂S₂(3I₂+B₂I₁)   0              |
//!        | γ₂T_R B₂        0               γ₂T_R            γ₂S₂(I₂+B₂I₁)  |
//! ```
//!
//! It is not solved unsplit. Each field is advanced on its own with the
//! partner intensity frozen, using the single-field upwind/MUSCL kernel of
//! [`crate::nonlinear_single`], and the three partial updates are composed
//! symmetrically: field 1 over `h/2`, field 2 over `h`, field 1 over `h/2`.

use crate::error::{Error, Result};
use crate::grid::{FiberParams, PolarState, TwoModeParams};
use crate::nonlinear_single::{advance_field, field_step, FieldCoefficients, Scheme};

/// Intensity/phase state of both fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModePolar {
    pub field: [PolarState; 2],
}

impl TwoModePolar {
    fn validate(&self) -> Result<()> {
        let n = self.field[0].len();
        for f in &self.field {
            if f.intensity.len() != n || f.phase.len() != n {
                return Err(Error::GridMismatch("two-mode fields differ in length".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn coefficients(mode: &FiberParams, b_xpm: f64, c_xpm: f64) -> FieldCoefficients {
    FieldCoefficients {
        gamma: mode.gamma,
        s_steep: mode.s_steep,
        t_raman: mode.t_raman,
        b_xpm,
        c_xpm,
    }
}

/// Advection speeds `(γS(3I + B I_l), γS(I + B I_l))` of one field.
pub fn advection_speeds(mode: &FiberParams, b_xpm: f64, own: f64, other: f64) -> (f64, f64) {
    let gs = mode.gamma * mode.s_steep;
    (gs * (3.0 * own + b_xpm * other), gs * (own + b_xpm * other))
}

/// One step of size `dz` for field `k` with the partner intensity frozen.
///
/// `scheme` selects the first-order or the slope-limited update; the
/// partner intensity is never reconstructed.
#[allow(clippy::too_many_arguments)]
pub fn single_field_step(
    own: &PolarState,
    other_intensity: &[f64],
    k_params: &FiberParams,
    b_k: f64,
    c_k: f64,
    dz: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<PolarState> {
    field_step(own, Some(other_intensity), &coefficients(k_params, b_k, c_k), scheme, dz, dt)
}

/// Substep counts of the three fractional updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoupledSubsteps {
    pub field1_first: usize,
    pub field2: usize,
    pub field1_second: usize,
}

impl CoupledSubsteps {
    pub fn max_field1(&self) -> usize {
        self.field1_first.max(self.field1_second)
    }
}

/// Symmetric fractional-step coupling over `h`.
///
/// A field with no intensity at entry stays dark through the whole step
/// and is not updated; its phase carries no information. When field 2 is
/// dark, none of field 1's coupling terms are active and the two
/// half-updates of field 1 are taken as one update over `h`, so the result
/// is identical to the single-mode operator.
pub fn coupled_nonlinear_apply(
    state: &mut TwoModePolar,
    params: &TwoModeParams,
    h: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<CoupledSubsteps> {
    state.validate()?;
    let [m1, m2] = &params.modes;
    let c1 = coefficients(m1, params.b_xpm[0], params.c_xpm[0]);
    let c2 = coefficients(m2, params.b_xpm[1], params.c_xpm[1]);
    let [f1, f2] = &mut state.field;

    let dark = |p: &PolarState| p.intensity.iter().all(|&i| i == 0.0);
    match (dark(f1), dark(f2)) {
        (true, true) => return Ok(CoupledSubsteps { field1_first: 0, field2: 0, field1_second: 0 }),
        (false, true) => {
            let k1 = advance_field(f1, Some(&f2.intensity), &c1, scheme, h, dt)?;
            return Ok(CoupledSubsteps { field1_first: k1, field2: 0, field1_second: 0 });
        }
        (true, false) => {
            let k2 = advance_field(f2, Some(&f1.intensity), &c2, scheme, h, dt)?;
            return Ok(CoupledSubsteps { field1_first: 0, field2: k2, field1_second: 0 });
        }
        (false, false) => {}
    }

    let field1_first = advance_field(f1, Some(&f2.intensity), &c1, scheme, 0.5 * h, dt)?;
    let field2 = advance_field(f2, Some(&f1.intensity), &c2, scheme, h, dt)?;
    let field1_second = advance_field(f1, Some(&f2.intensity), &c1, scheme, 0.5 * h, dt)?;
    Ok(CoupledSubsteps { field1_first, field2, field1_second })
}
