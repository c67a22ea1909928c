//! Straight-line transcriptions of the nonlinear update formulas, shared
//! by the property and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::TAU;

use fiberprop::{FiberParams, NonlinearStepParams, PolarState, Scheme};

pub const N: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct Coef {
    pub g: f64,
    pub s: f64,
    pub tr: f64,
    pub b: f64,
    pub c: f64,
}

impl Coef {
    pub fn fiber(&self) -> FiberParams {
        FiberParams { gamma: self.g, s_steep: self.s, t_raman: self.tr, ..Default::default() }
    }

    pub fn single(&self, scheme: Scheme) -> NonlinearStepParams {
        NonlinearStepParams { gamma: self.g, s_steep: self.s, t_raman: self.tr, scheme }
    }

    // M(I, I_l) applied to (ΔI, Δφ, ΔI_l)
    pub fn m_apply(&self, i: f64, l: f64, di: f64, dphi: f64, dl: f64) -> (f64, f64) {
        let Coef { g, s, tr, b, .. } = *self;
        (
            g * s * (3.0 * i + b * l) * di + 2.0 * g * s * b * i * dl,
            g * tr * di + g * s * (i + b * l) * dphi + g * tr * b * dl,
        )
    }
}

pub fn wrap(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

pub fn prev(j: usize) -> usize {
    (j + N - 1) % N
}

pub fn next(j: usize) -> usize {
    (j + 1) % N
}

/// Homogeneous first-order upwind, written out per sign of γ.
pub fn oracle_homogeneous(i: &[f64], phi: &[f64], l: &[f64], co: &Coef, dz: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let r = dz / dt;
    let mut i_new = vec![0.0; N];
    let mut phi_new = vec![0.0; N];
    for j in 0..N {
        let (a, b) = if co.g > 0.0 { (prev(j), j) } else { (j, next(j)) };
        let (mi, mphi) = co.m_apply(
            0.5 * (i[a] + i[b]),
            0.5 * (l[a] + l[b]),
            i[b] - i[a],
            wrap(phi[b] - phi[a]),
            l[b] - l[a],
        );
        i_new[j] = i[j] - r * mi;
        phi_new[j] = phi[j] - r * mphi;
    }
    (i_new, phi_new)
}

pub fn oracle_source(phi: &mut [f64], i: &[f64], l: &[f64], co: &Coef, dz: f64) {
    for j in 0..N {
        phi[j] += dz * co.g * (i[j] + co.c * l[j]);
    }
}

pub fn oracle_first_order(st: &PolarState, l: &[f64], co: &Coef, dz: f64, dt: f64) -> PolarState {
    let (i_new, mut phi_new) = oracle_homogeneous(&st.intensity, &st.phase, l, co, dz, dt);
    oracle_source(&mut phi_new, &i_new, l, co, dz);
    PolarState { intensity: i_new, phase: phi_new }
}

pub fn van_albada(r: f64) -> f64 {
    ((r * r + r) / (1.0 + r * r)).max(0.0)
}

pub fn sigma(dm: f64, dp: f64) -> f64 {
    van_albada(dm / dp) * dp + van_albada(dp / dm) * dm
}

pub fn oracle_muscl(st: &PolarState, l: &[f64], co: &Coef, dz: f64, dt: f64) -> PolarState {
    let i0 = st.intensity.clone();
    let mut phi0 = st.phase.clone();
    oracle_source(&mut phi0, &i0, l, co, 0.5 * dz);
    let (ib, phib) = oracle_homogeneous(&i0, &phi0, l, co, 0.5 * dz, dt);

    // neighbour phases lifted onto the branch of cell j
    let lift = |j: usize, k: usize| phib[j] + wrap(phib[k] - phib[j]);
    let si: Vec<f64> = (0..N).map(|j| sigma(ib[j] - ib[prev(j)], ib[next(j)] - ib[j])).collect();
    let sphi: Vec<f64> = (0..N).map(|j| sigma(phib[j] - lift(j, prev(j)), lift(j, next(j)) - phib[j])).collect();

    let r = dz / dt;
    let mut i_new = vec![0.0; N];
    let mut phi_new = vec![0.0; N];
    for j in 0..N {
        let il_j = ib[j] - si[j] / 4.0;
        let ir_j = ib[j] + si[j] / 4.0;
        let pl_j = phib[j] - sphi[j] / 4.0;
        let pr_j = phib[j] + sphi[j] / 4.0;
        let (iface_i, iface_phi) = if co.g > 0.0 {
            // M̂⁺ Δq*_{j-1/2}, Δq* = q^l_j - q^r_{j-1}
            let k = prev(j);
            let ir_k = ib[k] + si[k] / 4.0;
            let pr_k = lift(j, k) + sphi[k] / 4.0;
            co.m_apply(0.5 * (ib[k] + ib[j]), 0.5 * (l[k] + l[j]), il_j - ir_k, pl_j - pr_k, l[j] - l[k])
        } else {
            // M̂⁻ Δq*_{j+1/2}, Δq* = q^l_{j+1} - q^r_j
            let k = next(j);
            let il_k = ib[k] - si[k] / 4.0;
            let pl_k = lift(j, k) - sphi[k] / 4.0;
            co.m_apply(0.5 * (ib[j] + ib[k]), 0.5 * (l[j] + l[k]), il_k - ir_j, pl_k - pr_j, l[k] - l[j])
        };
        let (cell_i, cell_phi) = co.m_apply(ib[j], l[j], ir_j - il_j, pr_j - pl_j, 0.0);
        i_new[j] = i0[j] - r * (iface_i + cell_i);
        phi_new[j] = phi0[j] - r * (iface_phi + cell_phi);
    }
    oracle_source(&mut phi_new, &i_new, l, co, 0.5 * dz);
    PolarState { intensity: i_new, phase: phi_new }
}

pub fn assert_close(a: &PolarState, b: &PolarState, tol: f64) {
    for j in 0..a.len() {
        let di = (a.intensity[j] - b.intensity[j]).abs();
        let dp = (a.phase[j] - b.phase[j]).abs();
        assert!(di <= tol * b.intensity[j].abs().max(1.0), "I[{j}]: {} vs {}", a.intensity[j], b.intensity[j]);
        assert!(dp <= tol * b.phase[j].abs().max(1.0), "φ[{j}]: {} vs {}", a.phase[j], b.phase[j]);
    }
}

/// Largest deviation, relative to `max(1, |b|)`, over both components.
pub fn max_deviation(a: &PolarState, b: &PolarState) -> f64 {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
    (0..a.len())
        .map(|j| rel(a.intensity[j], b.intensity[j]).max(rel(a.phase[j], b.phase[j])))
        .fold(0.0, f64::max)
}

/// Step size at CFL fraction `frac`.
pub fn cfl_step(st: &PolarState, l: &[f64], co: &Coef, dt: f64, frac: f64) -> f64 {
    let bound = (0..N).map(|j| 3.0 * st.intensity[j] + co.b * l[j]).fold(0.0, f64::max);
    frac * dt / (co.g.abs() * co.s * bound)
}
