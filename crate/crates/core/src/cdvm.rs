//! Conservative discrete-velocity solver for the 1-D Shakhov equation,
//! used as a reference for the moment method.
//!
//! The distribution is sampled on a Cartesian velocity grid with
//! trapezoidal weights. A step is upwind transport in `y` followed by an
//! implicit relaxation toward a Shakhov target whose Maxwellian parameters
//! are adjusted so the discrete mass, momentum and energy of the target
//! equal those of the transported state.

use std::sync::Arc;

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::boundary::{Side, WallSpec};
use crate::collision::relaxation_time;
use crate::error::{positive, Error, Result};
use crate::solver1d::{Boundary, StopRule};

/// Tensor-product velocity grid.
#[derive(Clone, Debug)]
pub struct DvGrid {
    nodes: [Vec<f64>; 3],
    weights: [Vec<f64>; 3],
}

impl DvGrid {
    /// `n[d]` equispaced nodes on `[lo[d], hi[d]]`. The `ξ_2` range must be
    /// symmetric so that reflection maps nodes onto nodes.
    pub fn new(n: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for d in 0..3 {
            if n[d] < 2 {
                return Err(Error::Config(format!(
                    "velocity axis {d} needs at least 2 nodes"
                )));
            }
            positive("velocity range", hi[d] - lo[d])?;
        }
        if (lo[1] + hi[1]).abs() > 1e-12 * hi[1].abs() {
            return Err(Error::Config(
                "the ξ_2 range must be symmetric about 0".into(),
            ));
        }
        let axis = |d: usize| {
            let h = (hi[d] - lo[d]) / (n[d] - 1) as f64;
            let nodes: Vec<f64> = (0..n[d]).map(|i| lo[d] + i as f64 * h).collect();
            let mut w = vec![h; n[d]];
            w[0] = 0.5 * h;
            w[n[d] - 1] = 0.5 * h;
            (nodes, w)
        };
        let (n0, w0) = axis(0);
        let (n1, w1) = axis(1);
        let (n2, w2) = axis(2);
        Ok(Self {
            nodes: [n0, n1, n2],
            weights: [w0, w1, w2],
        })
    }

    /// `n³` nodes on `[-half_width, half_width]³`.
    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        Self::new([n; 3], [-half_width; 3], [half_width; 3])
    }

    pub fn shape(&self) -> [usize; 3] {
        [
            self.nodes[0].len(),
            self.nodes[1].len(),
            self.nodes[2].len(),
        ]
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.nodes[d]
    }

    pub fn axis_weights(&self, d: usize) -> &[f64] {
        &self.weights[d]
    }

    pub fn max_normal_speed(&self) -> f64 {
        self.nodes[1].iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Flat index of `(i, j, k)`; the last axis runs fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [_, n2, n3] = self.shape();
        (i * n2 + j) * n3 + k
    }

    /// Sample `f(ξ)` at every node.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.nodes[0] {
            for &b in &self.nodes[1] {
                for &c in &self.nodes[2] {
                    out.push(f([a, b, c]));
                }
            }
        }
        out
    }

    /// Maxwellian with the given parameters at every node.
    pub fn maxwellian(&self, rho: f64, u: [f64; 3], theta: f64) -> Vec<f64> {
        let g = self.gaussian_factors(u, theta);
        let amp = rho / (2.0 * std::f64::consts::PI * theta).powf(1.5);
        self.outer(&g, |_, _| amp)
    }

    fn gaussian_factors(&self, u: [f64; 3], theta: f64) -> [Vec<f64>; 3] {
        std::array::from_fn(|d| {
            self.nodes[d]
                .iter()
                .map(|x| (-(x - u[d]) * (x - u[d]) / (2.0 * theta)).exp())
                .collect()
        })
    }

    /// `Π_d g_d(ξ_d) · h(ξ, Π g)` over all nodes.
    fn outer(&self, g: &[Vec<f64>; 3], h: impl Fn([f64; 3], f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for (a, ga) in self.nodes[0].iter().zip(&g[0]) {
            for (b, gb) in self.nodes[1].iter().zip(&g[1]) {
                let gab = ga * gb;
                for (c, gc) in self.nodes[2].iter().zip(&g[2]) {
                    let p = gab * gc;
                    out.push(p * h([*a, *b, *c], p));
                }
            }
        }
        out
    }
}

/// Macroscopic quantities of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DvMoments {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub sigma: [[f64; 3]; 3],
    pub q: [f64; 3],
}

/// Raw discrete sums `Σ w f`, `Σ w ξ f` and `Σ w |ξ|² f`.
pub fn conserved_sums(grid: &DvGrid, f: &[f64]) -> [f64; 5] {
    let mut s = [0.0; 5];
    let [n1, n2, n3] = grid.shape();
    let mut idx = 0;
    for i in 0..n1 {
        let (a, wa) = (grid.nodes[0][i], grid.weights[0][i]);
        for j in 0..n2 {
            let (b, wb) = (grid.nodes[1][j], grid.weights[1][j]);
            let wab = wa * wb;
            for k in 0..n3 {
                let (c, wc) = (grid.nodes[2][k], grid.weights[2][k]);
                let wf = wab * wc * f[idx];
                idx += 1;
                s[0] += wf;
                s[1] += a * wf;
                s[2] += b * wf;
                s[3] += c * wf;
                s[4] += (a * a + b * b + c * c) * wf;
            }
        }
    }
    s
}

/// Quadrature of the defining integrals of `ρ, u, θ, σ, q`.
pub fn dv_moments(grid: &DvGrid, f: &[f64]) -> DvMoments {
    let s = conserved_sums(grid, f);
    let rho = s[0];
    let u = [s[1] / rho, s[2] / rho, s[3] / rho];
    let mut p = [[0.0; 3]; 3];
    let mut q = [0.0; 3];
    let [n1, n2, n3] = grid.shape();
    let mut idx = 0;
    for i in 0..n1 {
        let (a, wa) = (grid.nodes[0][i] - u[0], grid.weights[0][i]);
        for j in 0..n2 {
            let (b, wb) = (grid.nodes[1][j] - u[1], grid.weights[1][j]);
            let wab = wa * wb;
            for k in 0..n3 {
                let (c, wc) = (grid.nodes[2][k] - u[2], grid.weights[2][k]);
                let wf = wab * wc * f[idx];
                idx += 1;
                let cv = [a, b, c];
                let c2 = a * a + b * b + c * c;
                for x in 0..3 {
                    for y in x..3 {
                        p[x][y] += cv[x] * cv[y] * wf;
                    }
                    q[x] += 0.5 * c2 * cv[x] * wf;
                }
            }
        }
    }
    let theta = (p[0][0] + p[1][1] + p[2][2]) / (3.0 * rho);
    let mut sigma = [[0.0; 3]; 3];
    for x in 0..3 {
        for y in x..3 {
            let v = p[x][y] - if x == y { rho * theta } else { 0.0 };
            sigma[x][y] = v;
            sigma[y][x] = v;
        }
    }
    DvMoments {
        rho,
        u,
        theta,
        sigma,
        q,
    }
}

/// Parameters of a Shakhov target:
/// `ρ/(2πθ)^{3/2} e^{-|c|²/2θ} [1 + (1-Pr) (c·q)/(5ρθ²) (|c|²/θ - 5)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShakhovParams {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub q: [f64; 3],
    pub prandtl: f64,
}

impl ShakhovParams {
    fn coefficient(&self) -> f64 {
        (1.0 - self.prandtl) / (5.0 * self.rho * self.theta * self.theta)
    }

    /// The target at every node.
    pub fn sample(&self, grid: &DvGrid) -> Vec<f64> {
        let g = grid.gaussian_factors(self.u, self.theta);
        let amp = self.rho / (2.0 * std::f64::consts::PI * self.theta).powf(1.5);
        let beta = self.coefficient();
        let (u, q, theta) = (self.u, self.q, self.theta);
        grid.outer(&g, |xi, _| {
            let c = [xi[0] - u[0], xi[1] - u[1], xi[2] - u[2]];
            let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            let cq = c[0] * q[0] + c[1] * q[1] + c[2] * q[2];
            amp * (1.0 + beta * cq * (c2 / theta - 5.0))
        })
    }

    /// Discrete `Σ w f`, `Σ w ξ f`, `Σ w |ξ|² f` of the target, from 1-D sums.
    pub fn conserved_sums(&self, grid: &DvGrid) -> [f64; 5] {
        let (u, theta) = (self.u, self.theta);
        // m[d][k] = Σ_i w_i (ξ_i - u_d)^k exp(-(ξ_i - u_d)²/2θ)
        let m: [[f64; 6]; 3] = std::array::from_fn(|d| {
            let mut row = [0.0; 6];
            for (x, w) in grid.nodes[d].iter().zip(&grid.weights[d]) {
                let c = x - u[d];
                let mut p = w * (-c * c / (2.0 * theta)).exp();
                for r in row.iter_mut() {
                    *r += p;
                    p *= c;
                }
            }
            row
        });
        let e = |p: [usize; 3]| m[0][p[0]] * m[1][p[1]] * m[2][p[2]];
        let add = |a: [usize; 3], b: [usize; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let unit = |d: usize| {
            let mut a = [0; 3];
            a[d] = 1;
            a
        };
        let two = |d: usize| {
            let mut a = [0; 3];
            a[d] = 2;
            a
        };
        let beta = self.coefficient();
        // Σ w P(c) (1 + β Σ_i q_i c_i (|c|²/θ - 5)) Gaussian
        let weighted = |base: [usize; 3]| {
            let mut v = e(base);
            for i in 0..3 {
                let bi = add(base, unit(i));
                let mut corr = -5.0 * e(bi);
                for d in 0..3 {
                    corr += e(add(bi, two(d))) / theta;
                }
                v += beta * self.q[i] * corr;
            }
            v
        };
        let amp = self.rho / (2.0 * std::f64::consts::PI * theta).powf(1.5);
        let s0 = weighted([0; 3]);
        let s1: [f64; 3] = std::array::from_fn(|j| weighted(unit(j)));
        let s2: f64 = (0..3).map(|k| weighted(two(k))).sum();
        let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        let us1 = u[0] * s1[0] + u[1] * s1[1] + u[2] * s1[2];
        [
            amp * s0,
            amp * (u[0] * s0 + s1[0]),
            amp * (u[1] * s0 + s1[1]),
            amp * (u[2] * s0 + s1[2]),
            amp * (u2 * s0 + 2.0 * us1 + s2),
        ]
    }

    /// Adjust `ρ, u, θ` (keeping `q`) until the discrete conserved sums of
    /// the target equal `target`. Newton with a difference Jacobian.
    pub fn match_sums(mut self, grid: &DvGrid, target: [f64; 5]) -> Self {
        let scale = [
            target[0].abs(),
            target[0].abs(),
            target[0].abs(),
            target[0].abs(),
            target[4].abs(),
        ];
        let pack = |p: &Self| [p.rho, p.u[0], p.u[1], p.u[2], p.theta];
        let unpack = |p: &Self, x: [f64; 5]| Self {
            rho: x[0],
            u: [x[1], x[2], x[3]],
            theta: x[4],
            ..*p
        };
        for _ in 0..20 {
            let s = self.conserved_sums(grid);
            let r: [f64; 5] = std::array::from_fn(|i| s[i] - target[i]);
            if (0..5).all(|i| r[i].abs() <= 1e-15 * scale[i]) {
                break;
            }
            let x = pack(&self);
            let mut jac = [[0.0; 5]; 5];
            for c in 0..5 {
                let h = 1e-7 * x[c].abs().max(1e-3);
                let mut xp = x;
                xp[c] += h;
                let sp = unpack(&self, xp).conserved_sums(grid);
                for row in 0..5 {
                    jac[row][c] = (sp[row] - s[row]) / h;
                }
            }
            let Some(dx) = solve5(jac, r) else { break };
            let next: [f64; 5] = std::array::from_fn(|i| x[i] - dx[i]);
            if !(next[0] > 0.0 && next[4] > 0.0) {
                break;
            }
            self = unpack(&self, next);
        }
        self
    }
}

/// Gaussian elimination with partial pivoting for a 5×5 system.
fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..5 {
            let f = a[row][col] / a[col][col];
            for k in col..5 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let s: f64 = (row + 1..5).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Distribution values per spatial cell.
#[derive(Clone, Debug)]
pub struct DvField {
    pub grid: Arc<DvGrid>,
    pub y_lo: f64,
    pub y_hi: f64,
    pub cells: Vec<Vec<f64>>,
}

impl DvField {
    pub fn from_fn(
        grid: Arc<DvGrid>,
        y_lo: f64,
        y_hi: f64,
        n: usize,
        init: impl Fn(f64) -> (f64, [f64; 3], f64),
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 cells, got {n}")));
        }
        positive("domain length", y_hi - y_lo)?;
        let dx = (y_hi - y_lo) / n as f64;
        let cells = (0..n)
            .map(|j| {
                let (rho, u, theta) = init(y_lo + (j as f64 + 0.5) * dx);
                grid.maxwellian(rho, u, theta)
            })
            .collect();
        Ok(Self {
            grid,
            y_lo,
            y_hi,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dx(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.cells.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.len())
            .map(|j| self.y_lo + (j as f64 + 0.5) * dx)
            .collect()
    }

    pub fn moments(&self) -> Vec<DvMoments> {
        self.cells
            .par_iter()
            .map(|f| dv_moments(&self.grid, f))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.cells
            .iter()
            .map(|f| conserved_sums(&self.grid, f)[0])
            .sum::<f64>()
            * self.dx()
    }
}

/// Values entering the domain through a wall, for every node; entries for
/// outgoing velocities are left as in `cell`. Returns the ghost values and
/// `ρ^W`.
pub fn wall_ghost(grid: &DvGrid, cell: &[f64], wall: &WallSpec) -> (Vec<f64>, f64) {
    let [n1, n2, n3] = grid.shape();
    let xi2 = grid.axis(1);
    let w2 = grid.axis_weights(1);
    // incoming means moving away from the wall into the gas
    let incoming = |j: usize| match wall.side {
        Side::Right => xi2[j] < 0.0,
        Side::Left => xi2[j] > 0.0,
    };
    let unit = grid.maxwellian(1.0, wall.u_wall, wall.theta_wall);
    let mut out_flux = 0.0;
    let mut in_unit = 0.0;
    for i in 0..n1 {
        let wa = grid.weights[0][i];
        for j in 0..n2 {
            let wb = wa * w2[j] * xi2[j];
            for k in 0..n3 {
                let idx = grid.index(i, j, k);
                let w = wb * grid.weights[2][k];
                if incoming(j) {
                    in_unit += w * unit[idx];
                } else {
                    out_flux += w * cell[idx];
                }
            }
        }
    }
    let rho_wall = if in_unit != 0.0 {
        -out_flux / in_unit
    } else {
        0.0
    };
    let mut ghost = cell.to_vec();
    for i in 0..n1 {
        for j in (0..n2).filter(|&j| incoming(j)) {
            let jm = n2 - 1 - j;
            for k in 0..n3 {
                let idx = grid.index(i, j, k);
                let mirror = cell[grid.index(i, jm, k)];
                ghost[idx] = wall.chi * rho_wall * unit[idx] + (1.0 - wall.chi) * mirror;
            }
        }
    }
    (ghost, rho_wall)
}

#[derive(Clone, Debug)]
pub struct DvConfig {
    pub kn: f64,
    pub prandtl: f64,
    pub cfl: f64,
    pub left: Boundary,
    pub right: Boundary,
    /// Minmod-limited second-order transport.
    pub second_order: bool,
    pub collisionless: bool,
    pub stop: StopRule,
    /// Keep a copy of the field every this many steps (0: final only).
    pub snapshot_every: usize,
}

impl DvConfig {
    pub fn new(kn: f64, left: Boundary, right: Boundary) -> Self {
        Self {
            kn,
            prandtl: 2.0 / 3.0,
            cfl: 0.95,
            left,
            right,
            second_order: false,
            collisionless: false,
            stop: StopRule::Steady {
                threshold: DV_STEADY_THRESHOLD,
                max_steps: 1_000_000,
            },
            snapshot_every: 0,
        }
    }

    pub fn check(&self) -> Result<()> {
        positive("Knudsen number", self.kn)?;
        positive("Prandtl number", self.prandtl)?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!(
                "CFL must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        for b in [self.left, self.right] {
            if let Boundary::Wall(w) = b {
                w.check()?;
            }
        }
        Ok(())
    }
}

/// Default for the steady rule of [`dv_run`]: the largest relative change
/// of `ρ`, `u`, `θ` per unit time.
pub const DV_STEADY_THRESHOLD: f64 = 1e-6;

pub fn dv_timestep(field: &DvField, cfl: f64) -> f64 {
    cfl * field.dx() / field.grid.max_normal_speed()
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Upwind transport over `dt`.
pub fn dv_transport(field: &DvField, config: &DvConfig, dt: f64) -> Vec<Vec<f64>> {
    let grid = &field.grid;
    let n = field.len();
    let ghost = |b: &Boundary, cell: &[f64]| match b {
        Boundary::Free => cell.to_vec(),
        Boundary::Wall(w) => wall_ghost(grid, cell, w).0,
    };
    let left = ghost(&config.left, &field.cells[0]);
    let right = ghost(&config.right, &field.cells[n - 1]);
    let at = |j: isize| -> &[f64] {
        if j < 0 {
            &left
        } else if j as usize >= n {
            &right
        } else {
            &field.cells[j as usize]
        }
    };
    let ratio = dt / field.dx();
    let [n1, n2, n3] = grid.shape();
    let xi2 = grid.axis(1);
    let second = config.second_order;

    // flux through face j - 1/2 for j = 0..=n
    let face = |j: usize| -> Vec<f64> {
        let (l, r) = (at(j as isize - 1), at(j as isize));
        let boundary = j == 0 || j == n;
        let mut out = vec![0.0; grid.len()];
        for i in 0..n1 {
            for b in 0..n2 {
                let v = xi2[b];
                let nu = v.abs() * ratio;
                for k in 0..n3 {
                    let idx = grid.index(i, b, k);
                    let value = if v > 0.0 {
                        let mut val = l[idx];
                        if second && !boundary {
                            let ll = at(j as isize - 2)[idx];
                            val += 0.5 * (1.0 - nu) * minmod(l[idx] - ll, r[idx] - l[idx]);
                        }
                        val
                    } else {
                        let mut val = r[idx];
                        if second && !boundary {
                            let rr = at(j as isize + 1)[idx];
                            val -= 0.5 * (1.0 - nu) * minmod(r[idx] - l[idx], rr - r[idx]);
                        }
                        val
                    };
                    out[idx] = v * value;
                }
            }
        }
        out
    };
    let faces: Vec<Vec<f64>> = (0..=n).into_par_iter().map(face).collect();
    field
        .cells
        .par_iter()
        .enumerate()
        .map(|(j, f)| {
            f.iter()
                .zip(&faces[j])
                .zip(&faces[j + 1])
                .map(|((v, fl), fr)| v - ratio * (fr - fl))
                .collect()
        })
        .collect()
}

/// Implicit Shakhov relaxation of one cell over `dt`, conserving the
/// discrete mass, momentum and energy.
pub fn dv_collide(grid: &DvGrid, f: &mut [f64], kn: f64, prandtl: f64, dt: f64) -> Result<()> {
    let m = dv_moments(grid, f);
    let tau = relaxation_time(m.rho, m.theta, kn)?;
    let a = dt / tau;
    let q = m.q.map(|qi| qi / (1.0 + prandtl * a));
    let sums = conserved_sums(grid, f);
    let target = ShakhovParams {
        rho: m.rho,
        u: m.u,
        theta: m.theta,
        q,
        prandtl,
    }
    .match_sums(grid, sums);
    let t = target.sample(grid);
    let inv = 1.0 / (1.0 + a);
    for (fi, ti) in f.iter_mut().zip(&t) {
        *fi = (*fi + a * ti) * inv;
    }
    Ok(())
}

/// Transport then relaxation over `dt`.
pub fn dv_step(field: &mut DvField, config: &DvConfig, dt: f64) -> Result<()> {
    field.cells = dv_transport(field, config, dt);
    if !config.collisionless {
        let grid = Arc::clone(&field.grid);
        field
            .cells
            .par_iter_mut()
            .try_for_each(|f| dv_collide(&grid, f, config.kn, config.prandtl, dt))?;
    }
    let worst = field
        .cells
        .iter()
        .enumerate()
        .map(|(j, f)| (j, f.iter().copied().fold(f64::INFINITY, f64::min)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((j, v)) = worst {
        let scale = field.cells[j].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v < -1e-8 * scale {
            warn!("negative distribution value {v:.3e} in cell {j}");
        }
    }
    Ok(())
}

fn macro_residual(old: &[DvMoments], new: &[DvMoments], dt: f64) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| {
            let mut r = ((b.rho - a.rho) / a.rho)
                .abs()
                .max(((b.theta - a.theta) / a.theta).abs());
            for d in 0..3 {
                r = r.max((b.u[d] - a.u[d]).abs());
            }
            r
        })
        .fold(0.0, f64::max)
        / dt
}

#[derive(Clone, Debug)]
pub struct DvRunOutput {
    pub field: DvField,
    pub time: f64,
    pub steps: usize,
    pub dt_history: Vec<f64>,
    /// Zero for fixed-time runs.
    pub residuals: Vec<f64>,
    /// `(step, time, field)`.
    pub snapshots: Vec<(usize, f64, DvField)>,
}

/// Advance until the stop rule fires. For [`StopRule::Steady`] the
/// residual is the largest relative change of `ρ`, `u`, `θ` per unit time.
pub fn dv_run(mut field: DvField, config: &DvConfig) -> Result<DvRunOutput> {
    config.check()?;
    let mut time = 0.0;
    let mut steps = 0usize;
    let mut dt_history = Vec::new();
    let mut residuals = Vec::new();
    let mut snapshots = Vec::new();
    let mut moments = field.moments();
    loop {
        let mut dt = dv_timestep(&field, config.cfl);
        if let StopRule::EndTime(t_end) = config.stop {
            if time >= t_end * (1.0 - 1e-14) {
                break;
            }
            dt = dt.min(t_end - time);
        }
        dv_step(&mut field, config, dt)?;
        time += dt;
        steps += 1;
        dt_history.push(dt);
        if config.snapshot_every > 0 && steps.is_multiple_of(config.snapshot_every) {
            snapshots.push((steps, time, field.clone()));
        }
        if let StopRule::EndTime(_) = config.stop {
            residuals.push(0.0);
        }
        if let StopRule::Steady {
            threshold,
            max_steps,
        } = config.stop
        {
            let next = field.moments();
            let r = macro_residual(&moments, &next, dt);
            moments = next;
            residuals.push(r);
            if steps.is_multiple_of(500) {
                debug!("cdvm step {steps} t={time:.4} residual={r:.3e}");
            }
            if !r.is_finite() || steps >= max_steps {
                return Err(Error::NotConverged { steps, residual: r });
            }
            if r < threshold {
                info!("cdvm steady after {steps} steps, t={time:.4}");
                break;
            }
        }
    }
    Ok(DvRunOutput {
        field,
        time,
        steps,
        dt_history,
        residuals,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxwellian_moments_on_grid() {
        let grid = DvGrid::cube(24, 8.0).unwrap();
        let f = grid.maxwellian(1.3, [0.2, -0.1, 0.0], 0.9);
        let m = dv_moments(&grid, &f);
        assert!((m.rho - 1.3).abs() < 1e-10);
        assert!((m.u[0] - 0.2).abs() < 1e-10);
        assert!((m.theta - 0.9).abs() < 1e-10);
        assert!(m.q.iter().all(|q| q.abs() < 1e-10));
    }

    #[test]
    fn target_sums_match_direct_quadrature() {
        let grid = DvGrid::new([12, 14, 10], [-6.0, -7.0, -5.0], [6.5, 7.0, 5.5]).unwrap();
        let p = ShakhovParams {
            rho: 1.1,
            u: [0.3, -0.2, 0.1],
            theta: 1.2,
            q: [0.05, -0.1, 0.02],
            prandtl: 2.0 / 3.0,
        };
        let direct = conserved_sums(&grid, &p.sample(&grid));
        let fast = p.conserved_sums(&grid);
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-13 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn collision_conserves() {
        let grid = DvGrid::cube(16, 7.0).unwrap();
        let mut f = grid.sample(|xi| {
            let c2 = xi[0] * xi[0] + (xi[1] - 0.3) * (xi[1] - 0.3) + xi[2] * xi[2];
            (-c2 / 2.0).exp() * (1.0 + 0.1 * xi[0] * xi[1])
                + 0.2 * (-c2).exp() * (1.0 + 0.3 * xi[1])
        });
        let before = conserved_sums(&grid, &f);
        dv_collide(&grid, &mut f, 0.3, 2.0 / 3.0, 0.05).unwrap();
        let after = conserved_sums(&grid, &f);
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_asymmetric_normal_range() {
        assert!(DvGrid::new([8; 3], [-5.0, -4.0, -5.0], [5.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn wall_ghost_balances_mass() {
        let grid = DvGrid::cube(16, 7.0).unwrap();
        let f = grid.maxwellian(0.9, [0.1, 0.2, 0.0], 1.3);
        for side in [Side::Left, Side::Right] {
            let wall = WallSpec::new(0.8, [0.4, 0.0, 0.0], 1.0, side).unwrap();
            let (g, _) = wall_ghost(&grid, &f, &wall);
            let incoming = |v: f64| {
                if side == Side::Right {
                    v < 0.0
                } else {
                    v > 0.0
                }
            };
            let mut flux = 0.0;
            for i in 0..16 {
                for j in 0..16 {
                    for k in 0..16 {
                        let v = grid.axis(1)[j];
                        let idx = grid.index(i, j, k);
                        let val = if incoming(v) { g[idx] } else { f[idx] };
                        flux += grid.axis_weights(0)[i]
                            * grid.axis_weights(1)[j]
                            * grid.axis_weights(2)[k]
                            * v
                            * val;
                    }
                }
            }
            assert!(flux.abs() < 1e-14, "{flux}");
        }
    }
}
