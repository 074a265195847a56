//! Exact integration of the space-homogeneous Shakhov relaxation.
//!
//! With `ρ, u, θ` (and hence `τ`) frozen, the nine coefficients
//! `f_{e_i+2e_j}` obey a linear system driven by the heat flux, whose
//! solution is
//! `f(t) = q_i(t₀)/5 · e^{-Pr Δt/τ} - (q_i(t₀)/5 - f(t₀)) · e^{-Δt/τ}`;
//! every other coefficient of grade ≥ 2 decays as `e^{-Δt/τ}`.

use crate::error::{positive, Result};
use crate::moments::{MomentState, MultiIndex};

/// `(5/16) √(2π/θ) Kn / ρ`, the hard-sphere relaxation time.
pub fn relaxation_time(rho: f64, theta: f64, kn: f64) -> Result<f64> {
    positive("rho", rho)?;
    positive("theta", theta)?;
    positive("Knudsen number", kn)?;
    Ok(5.0 / 16.0 * (2.0 * std::f64::consts::PI / theta).sqrt() * kn / rho)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionParams {
    pub tau: f64,
    pub prandtl: f64,
    pub dt: f64,
}

/// Shakhov relaxation over `params.dt`. Grades 0 and 1 are untouched.
pub fn collide(state: &MomentState, params: CollisionParams) -> MomentState {
    let mut out = state.clone();
    collide_in_place(&mut out, params);
    out
}

pub fn collide_in_place(state: &mut MomentState, params: CollisionParams) {
    let decay = (-params.dt / params.tau).exp();
    let heat_decay = (-params.prandtl * params.dt / params.tau).exp();
    // snapshot before any of the coupled slots is overwritten
    let q = state.heat_flux();
    let coupled: Vec<(MultiIndex, f64, f64)> = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut a = [0usize; 3];
            a[i] += 1;
            a[j] += 2;
            let alpha = MultiIndex(a);
            (alpha, state.get(alpha), q[i])
        })
        .collect();
    let first = state.space().grade_range(2).start;
    state.coeffs_mut()[first..]
        .iter_mut()
        .for_each(|c| *c *= decay);
    if params.prandtl == 1.0 {
        // the coupled solution collapses to the plain decay
        return;
    }
    for (alpha, f0, qi) in coupled {
        let fifth = qi / 5.0;
        state.set(alpha, fifth * heat_decay - (fifth - f0) * decay);
    }
}

/// Plain BGK relaxation: every grade ≥ 2 decays with `e^{-Δt/τ}`.
pub fn bgk_decay(state: &MomentState, tau: f64, dt: f64) -> MomentState {
    let mut out = state.clone();
    let decay = (-dt / tau).exp();
    let first = out.space().grade_range(2).start;
    out.coeffs_mut()[first..]
        .iter_mut()
        .for_each(|c| *c *= decay);
    out
}
