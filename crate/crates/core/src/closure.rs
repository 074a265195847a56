//! Regularized prediction of the grade `M+1` coefficients from spatial
//! gradients of the evolved state.
//!
//! Only `y` (the second coordinate) derivatives exist in the 1-D setting;
//! the velocity space stays three-dimensional, so the dimension count in
//! the formula is 3.

use crate::moments::{MomentState, MultiIndex};

/// Where the gradients feeding the closure are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClosureMode {
    /// At each interface, from the two adjoining cell values.
    #[default]
    Interface,
    /// At cell centers, by central differences; interface traces take the
    /// cell value.
    Center,
}

impl std::str::FromStr for ClosureMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "interface" => Ok(Self::Interface),
            "center" => Ok(Self::Center),
            _ => Err(crate::Error::Unknown {
                kind: "closure mode",
                name: s.to_string(),
            }),
        }
    }
}

/// `y`-derivatives of the quantities entering the closure.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub rho_theta: f64,
    pub u: [f64; 3],
    pub theta: f64,
    /// Derivatives of the evolved coefficients, grades `0..=M`.
    pub coeffs: Vec<f64>,
}

impl Gradients {
    /// `(b - a) / dist` for every quantity.
    pub fn difference(a: &MomentState, b: &MomentState, dist: f64) -> Self {
        let n = a.space().evolved_len();
        let inv = 1.0 / dist;
        Self {
            rho_theta: (b.rho() * b.theta - a.rho() * a.theta) * inv,
            u: std::array::from_fn(|d| (b.u[d] - a.u[d]) * inv),
            theta: (b.theta - a.theta) * inv,
            coeffs: a.coeffs()[..n]
                .iter()
                .zip(&b.coeffs()[..n])
                .map(|(x, y)| (y - x) * inv)
                .collect(),
        }
    }

    pub fn zero(state: &MomentState) -> Self {
        Self {
            rho_theta: 0.0,
            u: [0.0; 3],
            theta: 0.0,
            coeffs: vec![0.0; state.space().evolved_len()],
        }
    }
}

/// Three neighboring cells and the spacing between their centers.
#[derive(Clone, Debug)]
pub struct GradientStencil<'a> {
    pub left: &'a MomentState,
    pub center: &'a MomentState,
    pub right: &'a MomentState,
    pub dx: f64,
}

impl GradientStencil<'_> {
    pub fn gradients(&self) -> Gradients {
        Gradients::difference(self.left, self.right, 2.0 * self.dx)
    }
}

/// Closure at the stencil center with central-difference gradients.
pub fn close(stencil: &GradientStencil<'_>, tau: f64) -> Vec<f64> {
    closure_values(stencil.center, &stencil.gradients(), tau)
}

/// Grade `M+1` coefficients of `state` for the given gradients, in the
/// slot order of that grade.
pub fn closure_values(state: &MomentState, grad: &Gradients, tau: f64) -> Vec<f64> {
    closure_terms(state, grad, tau, true)
}

/// The closure without its `-θ ∂f_{α-e_2}` part, the only term linear in
/// the gradient of a grade-`M` coefficient. Solvers that treat that part
/// implicitly use this for the explicit remainder.
pub fn closure_offdiagonal(state: &MomentState, grad: &Gradients, tau: f64) -> Vec<f64> {
    closure_terms(state, grad, tau, false)
}

fn closure_terms(state: &MomentState, grad: &Gradients, tau: f64, diagonal: bool) -> Vec<f64> {
    let space = state.space();
    let top = state.order() + 1;
    let rho = state.rho();
    let theta = state.theta;
    let f = |a: [i32; 3]| state.get_signed(a);
    let df = |a: [i32; 3]| {
        space
            .position_signed(a)
            .and_then(|i| grad.coeffs.get(i).copied())
            .unwrap_or(0.0)
    };
    let pressure_term = grad.rho_theta / rho;
    let dilatation_term = theta / 3.0 * grad.u[1];

    space
        .grade_range(top)
        .map(|i| {
            let alpha = space.index(i).signed();
            let shift = |delta: [i32; 3]| {
                [
                    alpha[0] + delta[0],
                    alpha[1] + delta[1],
                    alpha[2] + delta[2],
                ]
            };
            let minus_e2 = shift([0, -1, 0]);
            let mut value = pressure_term * f(minus_e2);
            if diagonal {
                value -= theta * df(minus_e2);
            }
            let a2p1 = f64::from(alpha[1] + 1);
            for d in 0..3 {
                let mut e = [0i32; 3];
                e[d] = 1;
                let minus_2ed = shift([-2 * e[0], -2 * e[1], -2 * e[2]]);
                value += dilatation_term * f(minus_2ed);
                let minus_ed_e2 = shift([-e[0], -e[1] - 1, -e[2]]);
                value -= grad.u[d] * theta * f(minus_ed_e2);
                let minus_2ed_e2 = shift([-2 * e[0], -2 * e[1] - 1, -2 * e[2]]);
                let minus_2ed_plus_e2 = shift([-2 * e[0], -2 * e[1] + 1, -2 * e[2]]);
                value -= 0.5 * grad.theta * (theta * f(minus_2ed_e2) + a2p1 * f(minus_2ed_plus_e2));
            }
            tau * value
        })
        .collect()
}

/// Write the closure into the state's grade `M+1` block.
pub fn fill_closure(state: &mut MomentState, grad: &Gradients, tau: f64) {
    let values = closure_values(state, grad, tau);
    let r = state.space().grade_range(state.order() + 1);
    state.coeffs_mut()[r].copy_from_slice(&values);
}

/// Convenience for tests and diagnostics: the closure coefficient for `alpha`.
pub fn closure_at(state: &MomentState, grad: &Gradients, tau: f64, alpha: MultiIndex) -> f64 {
    let space = state.space();
    let r = space.grade_range(state.order() + 1);
    let pos = space.position(alpha).expect("closure index");
    closure_values(state, grad, tau)[pos - r.start]
}
