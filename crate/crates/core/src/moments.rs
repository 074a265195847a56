//! Multi-index bookkeeping and the per-cell moment state.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::boundary::HalfSpaceTable;
use crate::error::{positive, Error, Result};
use crate::hermite::{basis_factors, HermiteTable};

/// Index `α ∈ ℕ³` of a Hermite coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub [usize; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    pub fn new(a1: usize, a2: usize, a3: usize) -> Self {
        Self([a1, a2, a3])
    }

    /// Unit index `e_d`, `d ∈ {0, 1, 2}`.
    pub fn unit(d: usize) -> Self {
        let mut a = [0; 3];
        a[d] = 1;
        Self(a)
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn signed(&self) -> [i32; 3] {
        self.0.map(|a| a as i32)
    }
}

impl From<[usize; 3]> for MultiIndex {
    fn from(a: [usize; 3]) -> Self {
        Self(a)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Number of indices with `|α| ≤ k`.
pub fn count_up_to(k: usize) -> usize {
    (k + 1) * (k + 2) * (k + 3) / 6
}

/// All coefficient slots for a moment system of order `M`: the evolved
/// grades `0..=M` followed by the closure grade `M+1`.
///
/// Ordering is graded, lexicographic within a grade, and fixed.
#[derive(Debug)]
pub struct MomentSpace {
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: Vec<u32>,
    side: usize,
    lower: Vec<[u32; 3]>,
    upper: Vec<[u32; 3]>,
    he_zero: HermiteTable,
    half_space: OnceLock<HalfSpaceTable>,
}

const NONE: u32 = u32::MAX;

impl MomentSpace {
    pub fn new(order: usize) -> Result<Arc<Self>> {
        if order < 3 {
            return Err(Error::OrderTooLow(order));
        }
        let top = order + 1;
        let side = top + 1;
        let mut indices = Vec::with_capacity(count_up_to(top));
        for grade in 0..=top {
            for a1 in 0..=grade {
                for a2 in 0..=grade - a1 {
                    indices.push(MultiIndex([a1, a2, grade - a1 - a2]));
                }
            }
        }
        let mut lookup = vec![NONE; side * side * side];
        for (i, a) in indices.iter().enumerate() {
            lookup[(a.0[0] * side + a.0[1]) * side + a.0[2]] = i as u32;
        }
        let at = |a: [usize; 3]| -> u32 {
            if a.iter().any(|&x| x >= side) {
                NONE
            } else {
                lookup[(a[0] * side + a[1]) * side + a[2]]
            }
        };
        let lower = indices
            .iter()
            .map(|a| {
                std::array::from_fn(|d| {
                    if a.0[d] == 0 {
                        NONE
                    } else {
                        let mut b = a.0;
                        b[d] -= 1;
                        at(b)
                    }
                })
            })
            .collect();
        let upper = indices
            .iter()
            .map(|a| {
                std::array::from_fn(|d| {
                    let mut b = a.0;
                    b[d] += 1;
                    at(b)
                })
            })
            .collect();
        Ok(Arc::new(Self {
            order,
            indices,
            lookup,
            side,
            lower,
            upper,
            he_zero: HermiteTable::build(top + 1),
            half_space: OnceLock::new(),
        }))
    }

    /// The moment order `M`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Total number of stored slots, `|α| ≤ M+1`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of evolved slots, `|α| ≤ M`.
    pub fn evolved_len(&self) -> usize {
        count_up_to(self.order)
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index(&self, i: usize) -> MultiIndex {
        self.indices[i]
    }

    pub fn position(&self, alpha: MultiIndex) -> Option<usize> {
        let [a, b, c] = alpha.0;
        if a >= self.side || b >= self.side || c >= self.side {
            return None;
        }
        match self.lookup[(a * self.side + b) * self.side + c] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    /// Position of a possibly out-of-range index; `None` for negative
    /// components or orders above `M+1`.
    pub fn position_signed(&self, alpha: [i32; 3]) -> Option<usize> {
        if alpha.iter().any(|&a| a < 0) {
            return None;
        }
        self.position(MultiIndex(alpha.map(|a| a as usize)))
    }

    /// Position of `α - e_d` for the slot `i`, if stored.
    #[inline]
    pub fn lower(&self, i: usize, d: usize) -> Option<usize> {
        match self.lower[i][d] {
            NONE => None,
            j => Some(j as usize),
        }
    }

    /// Position of `α + e_d` for the slot `i`, if stored.
    #[inline]
    pub fn upper(&self, i: usize, d: usize) -> Option<usize> {
        match self.upper[i][d] {
            NONE => None,
            j => Some(j as usize),
        }
    }

    /// Range of slot positions holding grade `k`.
    pub fn grade_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = if k == 0 { 0 } else { count_up_to(k - 1) };
        start..count_up_to(k)
    }

    pub fn he_zero(&self) -> &HermiteTable {
        &self.he_zero
    }

    /// Half-space integral table for this order, built on first use.
    pub fn half_space(&self) -> &HalfSpaceTable {
        self.half_space
            .get_or_init(|| HalfSpaceTable::build(self.order + 1))
    }
}

/// Relaxation parameters of the gas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    pub prandtl: f64,
    pub knudsen: f64,
}

impl GasModel {
    pub fn new(prandtl: f64, knudsen: f64) -> Result<Self> {
        if !(prandtl > 0.0 && prandtl <= 1.0) {
            return Err(Error::Config(format!(
                "Prandtl number must lie in (0, 1], got {prandtl}"
            )));
        }
        positive("Knudsen number", knudsen)?;
        Ok(Self { prandtl, knudsen })
    }

    /// Hard-sphere relaxation time at the given density and temperature.
    pub fn relaxation_time(&self, rho: f64, theta: f64) -> Result<f64> {
        crate::collision::relaxation_time(rho, theta, self.knudsen)
    }
}

/// A violated coefficient invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveDensity(f64),
    NonPositiveTemperature(f64),
    /// `f_{e_i} ≠ 0`
    VelocityMoment {
        dim: usize,
        value: f64,
    },
    /// `Σ_d f_{2e_d} ≠ 0`
    TraceMoment(f64),
    NotFinite {
        slot: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveDensity(v) => write!(f, "rho = {v} ≤ 0"),
            Violation::NonPositiveTemperature(v) => write!(f, "theta = {v} ≤ 0"),
            Violation::VelocityMoment { dim, value } => {
                write!(f, "f_{{e_i}} ≠ 0 (i = {}, value {value:e})", dim + 1)
            }
            Violation::TraceMoment(v) => write!(f, "Σ f_{{2e_d}} ≠ 0 (value {v:e})"),
            Violation::NotFinite { slot } => write!(f, "coefficient {slot} is not finite"),
        }
    }
}

impl std::error::Error for Violation {}

/// Hermite-coefficient representation of the distribution in one cell.
///
/// `coeffs[0]` is the density. The grade `M+1` block is filled by the
/// closure (or a boundary construction) and never evolved.
#[derive(Clone, Debug)]
pub struct MomentState {
    space: Arc<MomentSpace>,
    pub u: [f64; 3],
    pub theta: f64,
    coeffs: Vec<f64>,
}

impl MomentState {
    /// A state with the given center and raw coefficients (any frame).
    pub fn from_parts(space: Arc<MomentSpace>, u: [f64; 3], theta: f64, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.len(), "coefficient vector length");
        Self {
            space,
            u,
            theta,
            coeffs,
        }
    }

    /// Local Maxwellian: `f_0 = ρ`, everything else zero.
    pub fn maxwellian(space: &Arc<MomentSpace>, rho: f64, u: [f64; 3], theta: f64) -> Result<Self> {
        positive("rho", rho)?;
        positive("theta", theta)?;
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = rho;
        Ok(Self {
            space: Arc::clone(space),
            u,
            theta,
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<MomentSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn rho(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, alpha: MultiIndex) -> f64 {
        self.space.position(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    /// Coefficient with the convention that negative or out-of-range
    /// indices read as zero.
    pub fn get_signed(&self, alpha: [i32; 3]) -> f64 {
        self.space
            .position_signed(alpha)
            .map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set(&mut self, alpha: MultiIndex, value: f64) {
        let i = self
            .space
            .position(alpha)
            .unwrap_or_else(|| panic!("index {alpha} outside the moment space"));
        self.coeffs[i] = value;
    }

    /// Zero the closure grade.
    pub fn clear_closure(&mut self) {
        let r = self.space.grade_range(self.order() + 1);
        self.coeffs[r].iter_mut().for_each(|c| *c = 0.0);
    }

    /// Pressure deviator `σ`.
    pub fn stress(&self) -> [[f64; 3]; 3] {
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut a = [0usize; 3];
                a[i] += 1;
                a[j] += 1;
                let v = self.get(MultiIndex(a));
                s[i][j] = if i == j { 2.0 * v } else { v };
            }
        }
        s
    }

    /// Heat flux `q_i = 2 f_{3e_i} + Σ_d f_{2e_d+e_i}`.
    pub fn heat_flux(&self) -> [f64; 3] {
        let mut q = [0.0; 3];
        for (i, qi) in q.iter_mut().enumerate() {
            let mut a = [0usize; 3];
            a[i] = 3;
            *qi = 2.0 * self.get(MultiIndex(a));
            for d in 0..3 {
                let mut b = [0usize; 3];
                b[d] += 2;
                b[i] += 1;
                *qi += self.get(MultiIndex(b));
            }
        }
        q
    }

    /// Check the coefficient invariants of a state expressed in its own
    /// frame, with absolute tolerance `1e-12 · max(1, ρ)`.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        self.validate_with(1e-12)
    }

    pub fn validate_with(&self, tol: f64) -> std::result::Result<(), Violation> {
        if let Some(slot) = self.coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Violation::NotFinite { slot });
        }
        if self.rho() <= 0.0 {
            return Err(Violation::NonPositiveDensity(self.rho()));
        }
        if self.theta.is_nan() || self.theta <= 0.0 {
            return Err(Violation::NonPositiveTemperature(self.theta));
        }
        let tol = tol * self.rho().max(1.0);
        for d in 0..3 {
            let value = self.coeffs[1 + d_slot(d)];
            if value.abs() > tol {
                return Err(Violation::VelocityMoment { dim: d, value });
            }
        }
        let trace = self.trace_moment();
        if trace.abs() > tol {
            return Err(Violation::TraceMoment(trace));
        }
        Ok(())
    }

    /// `Σ_d f_{2e_d}`
    pub fn trace_moment(&self) -> f64 {
        (0..3)
            .map(|d| {
                let mut a = [0usize; 3];
                a[d] = 2;
                self.get(MultiIndex(a))
            })
            .sum()
    }

    /// Point value of the truncated Hermite series at velocity `xi`.
    pub fn expansion_eval(&self, xi: [f64; 3]) -> f64 {
        let top = self.order() + 1;
        let st = self.theta.sqrt();
        let f: Vec<Vec<f64>> = (0..3)
            .map(|d| basis_factors(top, self.theta, (xi[d] - self.u[d]) / st))
            .collect();
        self.space
            .indices()
            .iter()
            .zip(&self.coeffs)
            .map(|(a, &c)| c * f[0][a.0[0]] * f[1][a.0[1]] * f[2][a.0[2]])
            .sum()
    }

    /// Mean of `|f_α|` over each grade `k = 1..=M`.
    pub fn grade_averages(&self) -> Vec<f64> {
        (1..=self.order())
            .map(|k| {
                let r = self.space.grade_range(k);
                let n = r.len() as f64;
                self.coeffs[r].iter().map(|c| c.abs()).sum::<f64>() / n
            })
            .collect()
    }
}

/// Position of `e_d` within grade 1 (lexicographic: e_3, e_2, e_1).
fn d_slot(d: usize) -> usize {
    2 - d
}
