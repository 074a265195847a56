//! Maxwell wall boundary condition for the moment system.
//!
//! All formulas are derived for a wall whose outer normal is `+y` (the
//! right end of the domain). The left wall is handled by reflecting
//! `ξ_2 → -ξ_2`, applying the right-wall map, and reflecting back.
//!
//! For a boundary state expanded about `(u, θ)` with `u_2 = u_2^W`, the
//! coefficients with odd `α_2` are replaced by
//! `2χ/(2-χ) [p_α + Σ_k S(α_2, 2k) θ^{α_2/2-k} f_{α+(2k-α_2)e_2}]`, where
//! `p_α` expands the incoming half of the wall Maxwellian and `S` holds
//! the one-dimensional half-space integrals of products of Hermite
//! polynomials. Coefficients with even `α_2` are kept.

use std::sync::Arc;

use crate::error::{positive, Error, Result};
use crate::hermite::{HermiteTable, INV_SQRT_2PI};
use crate::moments::{MomentSpace, MomentState, MultiIndex};

/// `S(m, n) = 1/(√(2π) m!) ∫_0^∞ He_m He_n e^{-x²/2} dx` for
/// `0 ≤ m, n ≤ max`.
#[derive(Clone, Debug)]
pub struct HalfSpaceTable {
    size: usize,
    values: Vec<f64>,
}

impl HalfSpaceTable {
    /// Fill the table with the four-case recursion seeded by
    /// `K(m, n) = (2π)^{-1/2}/m! · He_{m-1}(0) He_n(0)`.
    pub fn build(max: usize) -> Self {
        let size = max + 1;
        let he = HermiteTable::build(max + 1);
        let mut factorial = vec![1.0; size + 1];
        for m in 1..=size {
            factorial[m] = factorial[m - 1] * m as f64;
        }
        let k = |m: usize, n: usize| {
            INV_SQRT_2PI / factorial[m] * he.at_zero(m as i32 - 1) * he.at_zero(n as i32)
        };
        let mut values = vec![0.0; size * size];
        for m in 0..size {
            for n in 0..size {
                values[m * size + n] = match (m, n) {
                    (0, 0) => 0.5,
                    (0, n) => k(1, n - 1),
                    (m, 0) => k(m, 0),
                    (m, n) => k(m, n) + values[(m - 1) * size + n - 1] * n as f64 / m as f64,
                };
            }
        }
        Self { size, values }
    }

    pub fn max(&self) -> usize {
        self.size - 1
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.size + n]
    }
}

/// Which end of the 1-D domain a wall closes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A Maxwell wall: accommodation `chi`, velocity and temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallSpec {
    pub chi: f64,
    pub u_wall: [f64; 3],
    pub theta_wall: f64,
    pub side: Side,
}

impl WallSpec {
    pub fn new(chi: f64, u_wall: [f64; 3], theta_wall: f64, side: Side) -> Result<Self> {
        let wall = Self {
            chi,
            u_wall,
            theta_wall,
            side,
        };
        wall.check()?;
        Ok(wall)
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(Error::Accommodation(self.chi));
        }
        positive("wall temperature", self.theta_wall)?;
        Ok(())
    }

    /// The same wall seen in the frame reflected through `y → -y`.
    pub fn mirrored(&self) -> Self {
        Self {
            u_wall: [self.u_wall[0], -self.u_wall[1], self.u_wall[2]],
            side: match self.side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            },
            ..*self
        }
    }
}

/// Reflect `ξ_2 → -ξ_2`: negate `u_2` and every coefficient with odd `α_2`.
pub fn mirror(state: &MomentState) -> MomentState {
    let mut out = state.clone();
    out.u[1] = -out.u[1];
    let space = Arc::clone(state.space());
    for (c, a) in out.coeffs_mut().iter_mut().zip(space.indices()) {
        if a.0[1] % 2 == 1 {
            *c = -*c;
        }
    }
    out
}

/// Hermite coefficients of the half-space cut-off `q(ξ) = f(ξ)·[v_2 ≥ 0]`,
/// truncated to grade `M+1`.
///
/// Only `β = (α_1, β_2, α_3)` with `α_2 - β_2` zero or odd contribute.
pub fn half_space_cutoff(state: &MomentState) -> Vec<f64> {
    let space = state.space();
    let table = space.half_space();
    let top = state.order() + 1;
    let sqrt_theta = state.theta.sqrt();
    space
        .indices()
        .iter()
        .map(|a| {
            let [a1, a2, a3] = a.0;
            (0..=top - a1 - a3)
                .filter_map(|b2| {
                    let s = table.get(a2, b2);
                    (s != 0.0).then(|| {
                        s * sqrt_theta.powi(a2 as i32 - b2 as i32)
                            * state.get(MultiIndex([a1, b2, a3]))
                    })
                })
                .sum()
        })
        .collect()
}

/// Density `ρ^W` of the re-emitted wall Maxwellian that makes the normal
/// mass flux vanish. Expects a right-wall frame.
pub fn wall_density(state: &MomentState, wall: &WallSpec) -> f64 {
    let space = state.space();
    let table = space.half_space();
    let m = state.order();
    let theta = state.theta;
    let kmax = m.div_ceil(2);
    let sum: f64 = (0..=kmax)
        .filter(|k| 2 * k <= m + 1)
        .map(|k| {
            table.get(1, 2 * k) * theta.powf(0.5 - k as f64) * state.get(MultiIndex([0, 2 * k, 0]))
        })
        .sum();
    (2.0 * std::f64::consts::PI / wall.theta_wall).sqrt() * sum
}

/// `J_s(x)`, `s = 0..=s_max`, the full-line moments of the wall Gaussian
/// against `He_s`.
pub fn j_series(s_max: usize, x: f64, theta: f64, theta_wall: f64) -> Vec<f64> {
    let dtheta = theta_wall - theta;
    let mut j = Vec::with_capacity(s_max + 1);
    j.push(1.0);
    for s in 1..=s_max {
        let prev2 = if s >= 2 { j[s - 2] } else { 0.0 };
        j.push((dtheta * prev2 + x * j[s - 1]) / s as f64);
    }
    j
}

/// `J̃_s(x)`, `s = 0..=s_max`: the same moments over the half-line `y < 0`.
pub fn jtilde_series(s_max: usize, x: f64, theta: f64, theta_wall: f64) -> Vec<f64> {
    let dtheta = theta_wall - theta;
    let h = h_series(s_max, x, theta, theta_wall);
    let mut j = Vec::with_capacity(s_max + 1);
    j.push(0.5 * statrs::function::erf::erfc(x / (2.0 * theta_wall).sqrt()));
    for s in 1..=s_max {
        let prev2 = if s >= 2 { j[s - 2] } else { 0.0 };
        j.push((dtheta * prev2 + x * j[s - 1]) / s as f64 - h[s]);
    }
    j
}

fn h_series(s_max: usize, x: f64, theta: f64, theta_wall: f64) -> Vec<f64> {
    let mut h = vec![0.0; s_max + 1];
    if s_max >= 1 {
        h[1] = (theta_wall / (2.0 * std::f64::consts::PI)).sqrt()
            * (-x * x / (2.0 * theta_wall)).exp();
    }
    for s in 2..=s_max {
        let sf = s as f64;
        h[s] = -(sf - 2.0) / (sf * (sf - 1.0)) * theta * h[s - 2];
    }
    h
}

/// `Ĵ_s = J̃_s(0)`, the normal factor of the half-Maxwellian when
/// `u_2 = u_2^W`.
pub fn jhat_series(s_max: usize, theta: f64, theta_wall: f64) -> Vec<f64> {
    let dtheta = theta_wall - theta;
    let mut hh = vec![0.0; s_max + 1];
    if s_max >= 1 {
        hh[1] = (theta_wall / (2.0 * std::f64::consts::PI)).sqrt();
    }
    for s in 2..=s_max {
        let sf = s as f64;
        hh[s] = -(sf - 2.0) / (sf * (sf - 1.0)) * theta * hh[s - 2];
    }
    let mut j = Vec::with_capacity(s_max + 1);
    j.push(0.5);
    for s in 1..=s_max {
        let prev2 = if s >= 2 { j[s - 2] } else { 0.0 };
        j.push(dtheta * prev2 / s as f64 - hh[s]);
    }
    j
}

/// Coefficients `p_α` of the incoming wall half-Maxwellian about the
/// state's `(u, θ)`, for all stored grades. Expects a right-wall frame with
/// `u_2 = u_2^W`.
pub fn half_maxwellian_coeffs(wall: &WallSpec, state: &MomentState, rho_wall: f64) -> Vec<f64> {
    let top = state.order() + 1;
    let theta = state.theta;
    let j1 = j_series(top, wall.u_wall[0] - state.u[0], theta, wall.theta_wall);
    let j2 = jhat_series(top, theta, wall.theta_wall);
    let j3 = j_series(top, wall.u_wall[2] - state.u[2], theta, wall.theta_wall);
    state
        .space()
        .indices()
        .iter()
        .map(|a| rho_wall * j1[a.0[0]] * j2[a.0[1]] * j3[a.0[2]])
        .collect()
}

/// Apply the boundary map: returns `f^b` about `u^b = (u_1, u_2^W, u_3)`,
/// `θ^b = θ`.
pub fn apply_wall_bc(state: &MomentState, wall: &WallSpec) -> Result<MomentState> {
    apply_wall_bc_counted(state, wall).map(|(s, _)| s)
}

/// As [`apply_wall_bc`], also returning the number of coefficient products
/// spent on the half-space sums and the half-Maxwellian.
pub fn apply_wall_bc_counted(state: &MomentState, wall: &WallSpec) -> Result<(MomentState, usize)> {
    wall.check()?;
    match wall.side {
        Side::Right => Ok(apply_right(state, wall)),
        Side::Left => {
            let (out, ops) = apply_right(&mirror(state), &wall.mirrored());
            Ok((mirror(&out), ops))
        }
    }
}

fn apply_right(state: &MomentState, wall: &WallSpec) -> (MomentState, usize) {
    let mut framed = state.clone();
    framed.u[1] = wall.u_wall[1];
    let space = Arc::clone(framed.space());
    let table = space.half_space();
    let top = framed.order() + 1;
    let m = framed.order();
    let sqrt_theta = framed.theta.sqrt();

    let rho_wall = wall_density(&framed, wall);
    let p = half_maxwellian_coeffs(wall, &framed, rho_wall);
    let mut ops = m.div_ceil(2) + 1 + p.len();

    let factor = 2.0 * wall.chi / (2.0 - wall.chi);
    let mut out = framed.clone();
    for (i, a) in space.indices().iter().enumerate() {
        let [a1, a2, a3] = a.0;
        if a2 % 2 == 0 {
            continue;
        }
        let rest = m - (a1 + a3).min(m);
        let kmax = rest.div_ceil(2);
        let mut sum = p[i];
        for k in 0..=kmax {
            if a1 + 2 * k + a3 > top {
                break;
            }
            sum += table.get(a2, 2 * k)
                * sqrt_theta.powi(a2 as i32 - 2 * k as i32)
                * framed.get(MultiIndex([a1, 2 * k, a3]));
            ops += 1;
        }
        out.coeffs_mut()[i] = factor * sum;
    }
    (out, ops)
}

/// Ghost-cell state `2 f^b - f` about `(2u^b - u, θ)`.
pub fn ghost_state(state: &MomentState, wall: &WallSpec) -> Result<MomentState> {
    let fb = apply_wall_bc(state, wall)?;
    Ok(ghost_from(state, &fb))
}

pub(crate) fn ghost_from(state: &MomentState, fb: &MomentState) -> MomentState {
    let coeffs = fb
        .coeffs()
        .iter()
        .zip(state.coeffs())
        .map(|(b, f)| 2.0 * b - f)
        .collect();
    let u = std::array::from_fn(|d| 2.0 * fb.u[d] - state.u[d]);
    MomentState::from_parts(Arc::clone(state.space()), u, state.theta, coeffs)
}

/// Shared tables for one order, precomputed eagerly.
pub fn warm_tables(space: &MomentSpace) {
    let _ = space.half_space();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall(chi: f64) -> WallSpec {
        WallSpec::new(chi, [0.3, 0.0, -0.1], 1.0, Side::Right).unwrap()
    }

    #[test]
    fn table_special_values() {
        let t = HalfSpaceTable::build(13);
        assert_eq!(t.get(0, 0), 0.5);
        assert_eq!(t.get(2, 4), 0.0);
        assert!((t.get(1, 0) - INV_SQRT_2PI).abs() < 1e-16);
        for n in 0..=13 {
            assert!((t.get(n, n) - 0.5).abs() < 1e-14, "S({n},{n})");
        }
        for m in 0..=13usize {
            for n in 0..=13usize {
                let diff = m.abs_diff(n);
                if diff != 0 && diff % 2 == 0 {
                    assert_eq!(t.get(m, n), 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_accommodation() {
        assert!(matches!(
            WallSpec::new(1.5, [0.0; 3], 1.0, Side::Right),
            Err(Error::Accommodation(_))
        ));
        let space = MomentSpace::new(3).unwrap();
        let s = MomentState::maxwellian(&space, 1.0, [0.0; 3], 1.0).unwrap();
        let bad = WallSpec {
            chi: -0.1,
            u_wall: [0.0; 3],
            theta_wall: 1.0,
            side: Side::Left,
        };
        assert!(apply_wall_bc(&s, &bad).is_err());
    }

    #[test]
    fn wall_density_of_equilibrium() {
        let space = MomentSpace::new(4).unwrap();
        let s = MomentState::maxwellian(&space, 1.3, [0.0; 3], 1.0).unwrap();
        assert!((wall_density(&s, &wall(1.0)) - 1.3).abs() < 1e-14);
        let hot = MomentState::maxwellian(&space, 1.3, [0.0; 3], 4.0).unwrap();
        assert!((wall_density(&hot, &wall(1.0)) - 2.6).abs() < 1e-14);
    }

    #[test]
    fn half_maxwellian_low_slots() {
        let space = MomentSpace::new(5).unwrap();
        let s = MomentState::maxwellian(&space, 1.0, [0.1, 0.0, 0.2], 1.4).unwrap();
        let w = wall(1.0);
        let p = half_maxwellian_coeffs(&w, &s, 0.9);
        assert!((p[0] - 0.45).abs() < 1e-15);
        let e2 = space.position(MultiIndex::unit(1)).unwrap();
        assert!((p[e2] + 0.9 * (1.0 / (2.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jhat_is_jtilde_at_zero() {
        let a = jhat_series(13, 0.7, 1.3);
        let b = jtilde_series(13, 0.0, 0.7, 1.3);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn specular_wall_zeroes_odd_slots() {
        let space = MomentSpace::new(4).unwrap();
        let mut s = MomentState::maxwellian(&space, 1.0, [0.2, 0.0, 0.0], 1.1).unwrap();
        s.set(MultiIndex::new(1, 1, 0), 0.1);
        s.set(MultiIndex::new(0, 3, 0), 0.05);
        s.set(MultiIndex::new(2, 0, 0), 0.02);
        s.set(MultiIndex::new(0, 0, 2), -0.02);
        let fb = apply_wall_bc(&s, &wall(0.0)).unwrap();
        for (a, c) in space.indices().iter().zip(fb.coeffs()) {
            if a.0[1] % 2 == 1 {
                assert_eq!(*c, 0.0);
            }
        }
        assert_eq!(fb.get(MultiIndex::new(2, 0, 0)), 0.02);
    }

    #[test]
    fn wall_equilibrium_is_fixed() {
        let space = MomentSpace::new(6).unwrap();
        let w = WallSpec::new(1.0, [0.4, 0.0, 0.0], 1.2, Side::Right).unwrap();
        let s = MomentState::maxwellian(&space, 0.8, w.u_wall, w.theta_wall).unwrap();
        let fb = apply_wall_bc(&s, &w).unwrap();
        for (x, y) in fb.coeffs().iter().zip(s.coeffs()) {
            assert!((x - y).abs() < 1e-14, "{x} vs {y}");
        }
        let g = ghost_state(&s, &w).unwrap();
        for (x, y) in g.coeffs().iter().zip(s.coeffs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn mirror_is_involution() {
        let space = MomentSpace::new(3).unwrap();
        let mut s = MomentState::maxwellian(&space, 1.0, [0.1, 0.3, 0.0], 1.0).unwrap();
        s.set(MultiIndex::new(0, 3, 0), 0.2);
        s.set(MultiIndex::new(1, 2, 0), -0.1);
        let m = mirror(&s);
        assert_eq!(m.u[1], -0.3);
        assert_eq!(m.get(MultiIndex::new(0, 3, 0)), -0.2);
        assert_eq!(m.get(MultiIndex::new(1, 2, 0)), -0.1);
        let mm = mirror(&m);
        assert_eq!(mm.coeffs(), s.coeffs());
        assert_eq!(mm.u, s.u);
    }

    #[test]
    fn ghost_has_same_density_and_reflected_normal_velocity() {
        let space = MomentSpace::new(5).unwrap();
        let mut s = MomentState::maxwellian(&space, 1.2, [0.1, 0.35, 0.0], 0.9).unwrap();
        s.set(MultiIndex::new(1, 1, 0), 0.05);
        s.set(MultiIndex::new(0, 3, 0), 0.02);
        for side in [Side::Left, Side::Right] {
            let w = WallSpec::new(0.7, [0.2, 0.0, 0.0], 1.0, side).unwrap();
            let g = ghost_state(&s, &w).unwrap();
            assert_eq!(g.rho(), s.rho());
            assert_eq!(g.u[1], -s.u[1]);
        }
    }
}
