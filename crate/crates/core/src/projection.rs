//! Re-expansion of a Hermite series about a different velocity and
//! temperature.
//!
//! The basis function of degree `n` about `(u, θ)` is `(-∂_ξ)ⁿ` of the
//! normalized Gaussian with mean `u` and variance `θ`. In Fourier space,
//! moving the center to `(u', θ')` multiplies the series by
//! `exp(s Δu + Δθ s²/2)` with `s = -ik`, `Δu = u - u'`, `Δθ = θ - θ'`.
//! The Taylor coefficients `h_n` of that factor satisfy
//! `n h_n = Δu h_{n-1} + Δθ h_{n-2}`, and the new coefficients are
//! `f'_β = Σ_{γ+δ=β} f_γ Π_d h^{(d)}_{δ_d}`. The kernel is lower
//! triangular, so truncation at any grade is exact for the retained grades.

use std::sync::Arc;

use crate::error::{positive, Result};
use crate::moments::{MomentSpace, MomentState, MultiIndex};

/// Per-dimension shift coefficients for one change of center.
#[derive(Clone, Debug)]
pub struct ShiftKernel {
    h: [Vec<f64>; 3],
}

impl ShiftKernel {
    pub fn new(du: [f64; 3], dtheta: f64, max_degree: usize) -> Self {
        let h = du.map(|du| {
            let mut h = Vec::with_capacity(max_degree + 1);
            h.push(1.0);
            for n in 1..=max_degree {
                let prev2 = if n >= 2 { h[n - 2] } else { 0.0 };
                h.push((du * h[n - 1] + dtheta * prev2) / n as f64);
            }
            h
        });
        Self { h }
    }

    /// Kernel taking an expansion about `(u, theta)` to `(u_new, theta_new)`.
    pub fn between(
        u: [f64; 3],
        theta: f64,
        u_new: [f64; 3],
        theta_new: f64,
        max_degree: usize,
    ) -> Self {
        let du = [u[0] - u_new[0], u[1] - u_new[1], u[2] - u_new[2]];
        Self::new(du, theta - theta_new, max_degree)
    }

    pub fn coefficients(&self, d: usize) -> &[f64] {
        &self.h[d]
    }

    pub fn is_identity(&self) -> bool {
        self.h.iter().all(|h| h.iter().skip(1).all(|&c| c == 0.0))
    }
}

/// Apply a kernel to the first `len` slots of `coeffs` in place. `len` must
/// be a whole number of grades (e.g. `space.evolved_len()` or
/// `space.len()`); slots beyond it are left untouched.
pub fn apply_kernel(space: &MomentSpace, kernel: &ShiftKernel, coeffs: &mut [f64], len: usize) {
    if kernel.is_identity() {
        return;
    }
    let mut scratch = coeffs[..len].to_vec();
    for d in 0..3 {
        let h = kernel.coefficients(d);
        if h.iter().skip(1).all(|&c| c == 0.0) {
            continue;
        }
        for (i, out) in coeffs[..len].iter_mut().enumerate() {
            let beta = space.index(i);
            let mut acc = scratch[i];
            let mut j = i;
            for &hk in h.iter().take(beta.0[d] + 1).skip(1) {
                // every index below a retained one is retained
                j = space.lower(j, d).expect("lower index present");
                acc += scratch[j] * hk;
            }
            *out = acc;
        }
        scratch.copy_from_slice(&coeffs[..len]);
    }
}

/// Re-expand `state` about `(u_new, theta_new)`. All stored grades
/// (through `M+1`) are carried; `f'_0 = f_0` exactly.
pub fn project(state: &MomentState, u_new: [f64; 3], theta_new: f64) -> Result<MomentState> {
    positive("theta_new", theta_new)?;
    let space = Arc::clone(state.space());
    let kernel = ShiftKernel::between(state.u, state.theta, u_new, theta_new, space.order() + 1);
    let mut coeffs = state.coeffs().to_vec();
    let len = space.len();
    apply_kernel(&space, &kernel, &mut coeffs, len);
    Ok(MomentState::from_parts(space, u_new, theta_new, coeffs))
}

/// Given coefficients `g` of some distribution about `(u_ref, theta_ref)`,
/// return the state expressed in the distribution's own frame (its mean
/// velocity and temperature), keeping grades `0..=M`.
///
/// The frame follows from `ρ = g_0`, `ρ(u - u_ref) = g_{e_d}` and
/// `3ρθ = 3ρθ_ref + 2 Σ_d g_{2e_d} - ρ|u - u_ref|²`.
pub fn recenter(
    space: &Arc<MomentSpace>,
    u_ref: [f64; 3],
    theta_ref: f64,
    mut g: Vec<f64>,
) -> std::result::Result<MomentState, (f64, f64)> {
    let rho = g[0];
    let mut u = u_ref;
    let mut du2 = 0.0;
    let mut trace = 0.0;
    for d in 0..3 {
        let shift = g[space.position(MultiIndex::unit(d)).unwrap()] / rho;
        u[d] += shift;
        du2 += shift * shift;
        let mut a = [0usize; 3];
        a[d] = 2;
        trace += g[space.position(MultiIndex(a)).unwrap()];
    }
    let theta = theta_ref + (2.0 * trace - rho * du2) / (3.0 * rho);
    if !(rho > 0.0 && theta > 0.0) {
        return Err((rho, theta));
    }
    let evolved = space.evolved_len();
    g[evolved..].iter_mut().for_each(|c| *c = 0.0);
    let kernel = ShiftKernel::between(u_ref, theta_ref, u, theta, space.order());
    apply_kernel(space, &kernel, &mut g, evolved);
    let mut state = MomentState::from_parts(Arc::clone(space), u, theta, g);
    normalize_frame(&mut state);
    Ok(state)
}

/// Remove round-off from the frame constraints: `f_{e_d} = 0` and a
/// traceless second grade.
pub fn normalize_frame(state: &mut MomentState) {
    for d in 0..3 {
        state.set(MultiIndex::unit(d), 0.0);
    }
    let mean = state.trace_moment() / 3.0;
    if mean != 0.0 {
        for d in 0..3 {
            let mut a = [0usize; 3];
            a[d] = 2;
            let alpha = MultiIndex(a);
            let v = state.get(alpha);
            state.set(alpha, v - mean);
        }
    }
}
