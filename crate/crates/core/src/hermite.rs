//! Probabilists' Hermite polynomials and the weighted Hermite basis.
//!
//! `He_n` follows the convention `He_n(x) = (-1)^n e^{x²/2} dⁿ/dxⁿ e^{-x²/2}`,
//! evaluated by the upward three-term recursion
//! `He_{n+1}(x) = x He_n(x) - n He_{n-1}(x)`. Negative degrees are zero.

use crate::error::{positive, Result};

/// `(2π)^{-1/2}`
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Value of `He_n(x)`; zero for `n < 0`.
pub fn he_eval(n: i32, x: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = x * cur - f64::from(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_0(x), …, He_max(x)` in one pass.
pub fn he_values(max_degree: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0);
    if max_degree >= 1 {
        out.push(x);
    }
    for n in 1..max_degree {
        let next = x * out[n] - n as f64 * out[n - 1];
        out.push(next);
    }
    out
}

/// One-dimensional basis factors
/// `(2π)^{-1/2} θ^{-(n+1)/2} He_n(v) e^{-v²/2}` for `n = 0..=max_degree`.
pub fn basis_factors(max_degree: usize, theta: f64, v: f64) -> Vec<f64> {
    let he = he_values(max_degree, v);
    let gauss = INV_SQRT_2PI * (-0.5 * v * v).exp() / theta.sqrt();
    let inv_theta_half = 1.0 / theta.sqrt();
    let mut scale = gauss;
    he.into_iter()
        .map(|h| {
            let value = h * scale;
            scale *= inv_theta_half;
            value
        })
        .collect()
}

/// Cached `He_n(0)` for `n ≤ max_degree`.
///
/// `He_n(0) = 0` for odd `n` and `(-1)^k (2k-1)!!` for `n = 2k`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    at_zero: Vec<f64>,
}

impl HermiteTable {
    pub fn build(max_degree: usize) -> Self {
        Self {
            at_zero: he_values(max_degree, 0.0),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.at_zero.len() - 1
    }

    /// `He_n(0)`, zero for negative `n`. Panics above the table size.
    pub fn at_zero(&self, n: i32) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.at_zero[n as usize]
        }
    }
}

/// Basis function `H_{θ,α}(v)`; zero if any component of `alpha` is negative.
pub fn basis_eval(alpha: [i32; 3], theta: f64, v: [f64; 3]) -> Result<f64> {
    let theta = positive("theta", theta)?;
    if alpha.iter().any(|&a| a < 0) {
        return Ok(0.0);
    }
    Ok(alpha
        .iter()
        .zip(v.iter())
        .map(|(&a, &x)| {
            INV_SQRT_2PI
                * theta.powf(-(f64::from(a) + 1.0) / 2.0)
                * he_eval(a, x)
                * (-0.5 * x * x).exp()
        })
        .product())
}

/// Largest root of `He_n` (`n ≥ 1`), by Newton iteration started above
/// the known bound `√(4n+2)`. Convexity beyond the last root makes the
/// iteration monotone.
pub fn largest_root(n: usize) -> f64 {
    assert!(n >= 1, "He_0 has no roots");
    if n == 1 {
        return 0.0;
    }
    let mut x = (4.0 * n as f64 + 2.0).sqrt();
    for _ in 0..200 {
        let he = he_values(n, x);
        let step = he[n] / (n as f64 * he[n - 1]);
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Explicit sum from expanding the Rodrigues form.
    fn he_explicit(n: u32, x: f64) -> f64 {
        let nf = factorial(n);
        (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * x.powi((n - 2 * k) as i32)
                    / (factorial(k) * factorial(n - 2 * k) * 2f64.powi(k as i32))
            })
            .sum::<f64>()
            * nf
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(he_eval(0, 3.7), 1.0);
        assert_eq!(he_eval(2, 0.0), -1.0);
        assert_eq!(he_eval(-1, 2.0), 0.0);
        assert_eq!(he_eval(1, -0.25), -0.25);
    }

    #[test]
    fn recursion_matches_explicit_form() {
        for n in 0..=8 {
            for &x in &[-2.1, -0.3, 0.0, 1.3, 2.7] {
                let a = he_eval(n as i32, x);
                let b = he_explicit(n, x);
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "n={n} x={x}: {a} vs {b}"
                );
            }
        }
        let v = he_eval(6, 1.3);
        assert!((v - he_explicit(6, 1.3)).abs() < 1e-12);
    }

    #[test]
    fn values_at_zero() {
        let table = HermiteTable::build(14);
        let mut double_factorial = 1.0;
        for k in 0..=7 {
            if k > 0 {
                double_factorial *= f64::from(2 * k - 1);
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(table.at_zero(2 * k), sign * double_factorial);
            if 2 * k < 14 {
                assert_eq!(table.at_zero(2 * k + 1), 0.0);
            }
        }
        assert_eq!(table.at_zero(-1), 0.0);
    }

    #[test]
    fn derivative_relation_by_finite_differences() {
        let h = 1e-5;
        for n in 1..=10 {
            for &x in &[-1.7, -0.4, 0.9, 2.2] {
                let fd = (he_eval(n, x + h) - he_eval(n, x - h)) / (2.0 * h);
                let exact = f64::from(n) * he_eval(n - 1, x);
                assert!(
                    (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn weighted_derivative_shifts_degree() {
        let h = 1e-5;
        let g = |n: i32, x: f64| he_eval(n, x) * (-0.5 * x * x).exp();
        for n in 0..=8 {
            for &x in &[-1.1, 0.3, 1.8] {
                let fd = (g(n, x + h) - g(n, x - h)) / (2.0 * h);
                assert!((fd + g(n + 1, x)).abs() < 1e-7, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn basis_at_origin_and_negative_index() {
        let v = basis_eval([0, 0, 0], 1.0, [0.0; 3]).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).powf(-1.5)).abs() < 1e-15);
        assert_eq!(basis_eval([1, -1, 0], 2.0, [0.3, 0.1, 0.2]).unwrap(), 0.0);
        assert!(basis_eval([0, 0, 0], 0.0, [0.0; 3]).is_err());
    }

    #[test]
    fn basis_matches_independent_product() {
        // H_{2,(2,0,0)}(1,0,0) = (2π)^{-3/2} 2^{-3/2} (1-1) e^{-1/2} 2^{-1/2} 2^{-1/2} = 0
        let v = basis_eval([2, 0, 0], 2.0, [1.0, 0.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-16);
        let x = 1.5;
        let expected = INV_SQRT_2PI.powi(3)
            * 2f64.powf(-1.5)
            * (x * x - 1.0)
            * (-0.5 * x * x).exp()
            * 2f64.powf(-0.5)
            * 2f64.powf(-0.5);
        let v = basis_eval([2, 0, 0], 2.0, [x, 0.0, 0.0]).unwrap();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn basis_factors_agree_with_pointwise() {
        let f = basis_factors(6, 1.7, 0.8);
        for (n, &b) in f.iter().enumerate() {
            let direct = INV_SQRT_2PI
                * 1.7f64.powf(-(n as f64 + 1.0) / 2.0)
                * he_eval(n as i32, 0.8)
                * (-0.32f64).exp();
            assert!((b - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn largest_roots() {
        assert!((largest_root(2) - 1.0).abs() < 1e-14);
        assert!((largest_root(3) - 3f64.sqrt()).abs() < 1e-14);
        // He_4 = x⁴ - 6x² + 3, largest root √(3+√6)
        assert!((largest_root(4) - (3.0 + 6f64.sqrt()).sqrt()).abs() < 1e-13);
        for n in 2..=14 {
            let r = largest_root(n);
            assert!(he_eval(n as i32, r).abs() < 1e-8 * he_eval(n as i32, r + 1.0).abs());
            assert!(r > largest_root(n - 1));
        }
    }
}
