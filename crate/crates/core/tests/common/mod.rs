//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use nrxx::boundary::{wall_density, WallSpec};
use nrxx::moments::{MomentSpace, MomentState, MultiIndex};
use nrxx::projection::normalize_frame;
use rand::Rng;

/// `He_n(x)` from the explicit sum
/// `n! Σ_k (-1)^k x^{n-2k} / (k! (n-2k)! 2^k)`.
pub fn he_explicit(n: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..=n / 2 {
        let mut c = 1.0;
        // n! / (k! (n-2k)! 2^k)
        for j in (n - 2 * k + 1)..=n {
            c *= j as f64;
        }
        for j in 1..=k {
            c /= j as f64 * 2.0;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c * x.powi((n - 2 * k) as i32);
    }
    sum
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Nodes and weights of a symmetric Jacobi matrix (Golub–Welsch).
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss rule for `∫ g(x) e^{-x²/2} dx` over the real line; exact for
/// polynomials of degree `< 2n`.
/// Eigenvalue nodes are polished by Newton steps, symmetrized, and the
/// weights taken from `√(2π) n! / (n He_{n-1}(x))²`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // orthonormal recurrence, to stay in range for large n
    let he_pair = |x: f64| {
        let (mut p0, mut p1) = (0.0, 1.0);
        for k in 0..n {
            let p2 = (x * p1 - (k as f64).sqrt() * p0) / ((k + 1) as f64).sqrt();
            p0 = p1;
            p1 = p2;
        }
        (p1, p0)
    };
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let (mut x, _) = golub_welsch(&vec![0.0; n], &off, (2.0 * std::f64::consts::PI).sqrt());
    for xi in x.iter_mut() {
        for _ in 0..3 {
            let (pn, pm) = he_pair(*xi);
            *xi -= pn / ((n as f64).sqrt() * pm);
        }
    }
    for i in 0..n / 2 {
        let a = 0.5 * (x[n - 1 - i] - x[i]);
        x[i] = -a;
        x[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let c = (2.0 * std::f64::consts::PI).sqrt();
    let w = x
        .iter()
        .map(|xi| c / (n as f64 * he_pair(*xi).1.powi(2)))
        .collect();
    (x, w)
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&vec![0.0; n], &off, 2.0)
}

/// Composite Gauss–Legendre on `[a, b]`.
pub struct Composite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Composite {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Weighted 1-D basis function `(2π)^{-1/2} θ^{-(n+1)/2} He_n(v) e^{-v²/2}`
/// with `v = (ξ - u)/√θ`.
pub fn basis_1d(n: usize, u: f64, theta: f64, xi: f64) -> f64 {
    let v = (xi - u) / theta.sqrt();
    (2.0 * std::f64::consts::PI).powf(-0.5)
        * theta.powf(-(n as f64 + 1.0) / 2.0)
        * he_explicit(n, v)
        * (-0.5 * v * v).exp()
}

/// Point value of the series `Σ f_α Π_d basis_1d(α_d)` written out term by
/// term.
pub fn series_value(s: &MomentState, xi: [f64; 3]) -> f64 {
    s.space()
        .indices()
        .iter()
        .zip(s.coeffs())
        .map(|(a, c)| {
            c * (0..3)
                .map(|d| basis_1d(a.0[d], s.u[d], s.theta, xi[d]))
                .product::<f64>()
        })
        .sum()
}

/// `∫ g(ξ) dξ` by Gauss–Hermite in `ξ = u + √θ v` per axis (exact when
/// `g` is a polynomial times the Gaussian of `(u, θ)`). With `y_range`,
/// the `ξ_2` axis instead uses composite Gauss–Legendre over that range.
pub fn integrate3(
    g: impl Fn([f64; 3]) -> f64,
    u: [f64; 3],
    theta: f64,
    nodes: usize,
    y_range: Option<(f64, f64)>,
) -> f64 {
    let (x, w) = gauss_hermite(nodes);
    let st = theta.sqrt();
    let gh: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(v, wv)| (*v, st * wv * (0.5 * v * v).exp()))
        .collect();
    let axis = |d: usize| -> Vec<(f64, f64)> {
        match (d, y_range) {
            (1, Some((lo, hi))) => Composite::new(lo, hi, 40, 12).points().collect(),
            _ => gh.iter().map(|(v, wv)| (u[d] + st * v, *wv)).collect(),
        }
    };
    let (a0, a1, a2) = (axis(0), axis(1), axis(2));
    let mut sum = 0.0;
    for (x0, w0) in &a0 {
        for (x1, w1) in &a1 {
            for (x2, w2) in &a2 {
                sum += w0 * w1 * w2 * g([*x0, *x1, *x2]);
            }
        }
    }
    sum
}

/// Coefficient `f_α` of `f` about `(u, θ)`:
/// `θ^{|α|/2} / α! ∫ f(ξ) He_α((ξ-u)/√θ) dξ`. Quadrature is set up in the
/// frame `quad = (u_q, θ_q)` that `f`'s Gaussian factor belongs to.
pub fn coefficient_by_quadrature(
    f: impl Fn([f64; 3]) -> f64,
    alpha: [usize; 3],
    u: [f64; 3],
    theta: f64,
    quad: ([f64; 3], f64),
    y_range: Option<(f64, f64)>,
) -> f64 {
    let st = theta.sqrt();
    let g = |xi: [f64; 3]| {
        f(xi)
            * (0..3)
                .map(|d| he_explicit(alpha[d], (xi[d] - u[d]) / st))
                .product::<f64>()
    };
    let afact: f64 = alpha.iter().map(|&k| factorial(k)).product();
    theta.powf(alpha.iter().sum::<usize>() as f64 / 2.0) / afact
        * integrate3(g, quad.0, quad.1, 24, y_range)
}

/// A Maxwellian plus a frame-preserving perturbation of size `amp` in
/// grades `2..=M`, scaled down by grade.
pub fn random_state(rng: &mut impl Rng, order: usize, amp: f64) -> MomentState {
    let space = MomentSpace::new(order).unwrap();
    let rho = rng.gen_range(0.5..2.0);
    let u = [
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
    ];
    let theta = rng.gen_range(0.5..2.0);
    random_perturbed(rng, &space, rho, u, theta, amp)
}

pub fn random_perturbed(
    rng: &mut impl Rng,
    space: &Arc<MomentSpace>,
    rho: f64,
    u: [f64; 3],
    theta: f64,
    amp: f64,
) -> MomentState {
    let mut s = MomentState::maxwellian(space, rho, u, theta).unwrap();
    for k in 2..=space.order() {
        let scale = amp * rho * theta.powf(k as f64 / 2.0) / factorial(k).sqrt();
        for i in space.grade_range(k) {
            s.coeffs_mut()[i] = scale * rng.gen_range(-1.0..1.0);
        }
    }
    normalize_frame(&mut s);
    s
}

pub fn slot(a1: usize, a2: usize, a3: usize) -> MultiIndex {
    MultiIndex::new(a1, a2, a3)
}

/// Net mass flux into a right wall, `∫ (ξ_2 - u_2^W) f dξ`, where the
/// outgoing half is the state and the incoming half is
/// `χ ρ^W M^W + (1-χ)` times the reflected state. Only the `(0, k, 0)`
/// coefficients survive the `ξ_1, ξ_3` integrals.
pub fn wall_mass_flux(s: &MomentState, wall: &WallSpec) -> f64 {
    let mut framed = s.clone();
    framed.u[1] = wall.u_wall[1];
    let rho_w = wall_density(&framed, wall);
    let uw = wall.u_wall[1];
    let marginal = |xi2: f64| -> f64 {
        framed
            .space()
            .indices()
            .iter()
            .zip(framed.coeffs())
            .filter(|(a, _)| a.0[0] == 0 && a.0[2] == 0)
            .map(|(a, c)| c * basis_1d(a.0[1], uw, framed.theta, xi2))
            .sum()
    };
    let tw = wall.theta_wall;
    let maxw = |xi2: f64| {
        (2.0 * std::f64::consts::PI * tw).powf(-0.5) * (-(xi2 - uw).powi(2) / (2.0 * tw)).exp()
    };
    let reach = 14.0 * framed.theta.max(tw).sqrt();
    let out = Composite::new(uw, uw + reach, 60, 12).integrate(|x| (x - uw) * marginal(x));
    let back = Composite::new(uw - reach, uw, 60, 12).integrate(|x| {
        (x - uw) * (wall.chi * rho_w * maxw(x) + (1.0 - wall.chi) * marginal(2.0 * uw - x))
    });
    out + back
}
