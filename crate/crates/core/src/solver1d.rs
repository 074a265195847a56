//! Finite-volume time integration of the regularized moment system on a
//! uniform 1-D grid in `y`.
//!
//! One step: ghost fill, linear reconstruction of `u`, `θ` and the
//! coefficients through grade `M`, closure of grade `M+1` at the interface
//! traces, HLL transport with each face flux projected into the receiving
//! cell's frame, analytic Shakhov relaxation, and a shift of `u` by the
//! force.

use std::sync::Arc;

use log::{debug, info};
use rayon::prelude::*;

use crate::boundary::{apply_wall_bc, ghost_from, WallSpec};
use crate::closure::{closure_offdiagonal, closure_values, fill_closure, ClosureMode, Gradients};
use crate::collision::{collide_in_place, relaxation_time, CollisionParams};
use crate::error::{positive, Error, Result};
use crate::hermite::largest_root;
use crate::limiter::{SlopeLimiter, Unlimited};
use crate::moments::{MomentSpace, MomentState};
use crate::projection::{apply_kernel, project, recenter, ShiftKernel};

/// Condition at one end of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    Wall(WallSpec),
    /// Zero-gradient outflow: the ghost copies the adjacent cell.
    Free,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Splitting {
    /// transport, collision, acceleration
    #[default]
    Lie,
    /// half acceleration, transport, collision, half acceleration
    Strang,
}

impl std::str::FromStr for Splitting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lie" => Ok(Self::Lie),
            "strang" => Ok(Self::Strang),
            _ => Err(Error::Unknown {
                kind: "splitting",
                name: s.to_string(),
            }),
        }
    }
}

/// Grade `M+1` block of the two boundary cells, which the wall condition
/// and the boundary-face fluxes read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeClosure {
    /// Left at zero.
    #[default]
    None,
    /// Closure from the one-sided difference with the neighboring cell.
    /// Explicit; unstable at the CFL limit once `τ` is of order `Δx`.
    OneSided,
}

impl std::str::FromStr for EdgeClosure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "one-sided" => Ok(Self::OneSided),
            _ => Err(Error::Unknown {
                kind: "edge closure",
                name: s.to_string(),
            }),
        }
    }
}

/// Uniform cells over `[y_lo, y_hi]`.
#[derive(Clone, Debug)]
pub struct Grid1D {
    pub y_lo: f64,
    pub y_hi: f64,
    pub cells: Vec<MomentState>,
}

impl Grid1D {
    pub fn new(y_lo: f64, y_hi: f64, cells: Vec<MomentState>) -> Result<Self> {
        if cells.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 cells, got {}",
                cells.len()
            )));
        }
        positive("domain length", y_hi - y_lo)?;
        Ok(Self { y_lo, y_hi, cells })
    }

    /// Every cell set from `init(y)` evaluated at its center.
    pub fn from_fn(
        y_lo: f64,
        y_hi: f64,
        n: usize,
        mut init: impl FnMut(f64) -> Result<MomentState>,
    ) -> Result<Self> {
        let dx = (y_hi - y_lo) / n as f64;
        let cells = (0..n)
            .map(|j| init(y_lo + (j as f64 + 0.5) * dx))
            .collect::<Result<Vec<_>>>()?;
        Self::new(y_lo, y_hi, cells)
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

    pub fn space(&self) -> &Arc<MomentSpace> {
        self.cells[0].space()
    }

    /// `Σ ρ Δx`, summed left to right.
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.rho()).sum::<f64>() * self.dx()
    }

    /// `Σ ρ u_d Δx`.
    pub fn total_momentum(&self, d: usize) -> f64 {
        self.cells.iter().map(|c| c.rho() * c.u[d]).sum::<f64>() * self.dx()
    }
}

/// Default for [`StopRule::Steady`]. Round-off alone keeps [`residual`]
/// near `1e-16 / 1e-8 / Δt`, a few `1e-6` at typical steps.
pub const STEADY_THRESHOLD: f64 = 1e-4;

/// When a run stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    EndTime(f64),
    /// Stop once the per-step residual drops below `threshold`; fail with
    /// [`Error::NotConverged`] after `max_steps`.
    Steady {
        threshold: f64,
        max_steps: usize,
    },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub order: usize,
    pub kn: f64,
    pub prandtl: f64,
    pub cfl: f64,
    /// Multiplier on the largest root of `He_{M+1}`.
    pub speed_factor: f64,
    pub left: Boundary,
    pub right: Boundary,
    pub force: [f64; 3],
    pub limiter: Arc<dyn SlopeLimiter>,
    pub splitting: Splitting,
    pub closure: ClosureMode,
    pub collisionless: bool,
    /// Treat the `-τθ ∂f` part of the interface closure implicitly. Without
    /// it the step is bounded by `Δx² / τ` rather than the CFL condition.
    pub implicit_closure: bool,
    pub edge_closure: EdgeClosure,
    /// Half-step predictor on the reconstructed traces. Without it, limited
    /// linear reconstruction with a forward-Euler step needs CFL ≲ 0.6.
    pub predictor: bool,
    pub stop: StopRule,
    /// Keep a copy of the grid every this many steps (0: final only).
    pub snapshot_every: usize,
}

impl RunConfig {
    pub fn new(order: usize, kn: f64, left: Boundary, right: Boundary) -> Self {
        Self {
            order,
            kn,
            prandtl: 2.0 / 3.0,
            cfl: 0.95,
            speed_factor: 1.2,
            left,
            right,
            force: [0.0; 3],
            limiter: Arc::new(Unlimited),
            splitting: Splitting::Lie,
            closure: ClosureMode::Interface,
            collisionless: false,
            implicit_closure: true,
            edge_closure: EdgeClosure::None,
            predictor: true,
            stop: StopRule::Steady {
                threshold: STEADY_THRESHOLD,
                max_steps: 1_000_000,
            },
            snapshot_every: 0,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.order < 3 {
            return Err(Error::OrderTooLow(self.order));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!(
                "CFL must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        positive("Knudsen number", self.kn)?;
        positive("Prandtl number", self.prandtl)?;
        positive("speed factor", self.speed_factor)?;
        for b in [self.left, self.right] {
            if let Boundary::Wall(w) = b {
                w.check()?;
            }
        }
        Ok(())
    }

    /// Signal-speed constant `c`.
    pub fn signal_speed(&self) -> f64 {
        self.speed_factor * largest_root(self.order + 1)
    }
}

/// `θ f_{α-e_2} + u_2 f_α + (α_2+1) f_{α+e_2}` for every `|α| ≤ M`.
pub fn flux_vector(state: &MomentState) -> Vec<f64> {
    let space = state.space();
    let f = state.coeffs();
    let u2 = state.u[1];
    (0..space.evolved_len())
        .map(|i| {
            let a2 = space.index(i).0[1] as f64;
            let down = space.lower(i, 1).map_or(0.0, |j| f[j]);
            let up = space.upper(i, 1).map_or(0.0, |j| f[j]);
            state.theta * down + u2 * f[i] + (a2 + 1.0) * up
        })
        .collect()
}

/// Lower and upper signal speeds at one face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalSpeeds {
    pub left: f64,
    pub right: f64,
}

impl SignalSpeeds {
    pub fn estimate(left: &MomentState, right: &MomentState, c: f64) -> Self {
        let lo = |s: &MomentState| s.u[1] - c * s.theta.sqrt();
        let hi = |s: &MomentState| s.u[1] + c * s.theta.sqrt();
        Self {
            left: lo(left).min(lo(right)),
            right: hi(left).max(hi(right)),
        }
    }
}

/// HLL combination of two states sharing one center.
pub fn hll_flux(left: &MomentState, right: &MomentState, speeds: SignalSpeeds) -> Vec<f64> {
    let SignalSpeeds {
        left: sl,
        right: sr,
    } = speeds;
    let fl = flux_vector(left);
    if sl >= 0.0 {
        return fl;
    }
    let fr = flux_vector(right);
    if sr <= 0.0 {
        return fr;
    }
    let inv = 1.0 / (sr - sl);
    fl.iter()
        .zip(&fr)
        .zip(left.coeffs().iter().zip(right.coeffs()))
        .map(|((a, b), (ql, qr))| (sr * a - sl * b + sl * sr * (qr - ql)) * inv)
        .collect()
}

/// A face flux expressed about the face center.
#[derive(Clone, Debug)]
pub struct FaceFlux {
    pub u: [f64; 3],
    pub theta: f64,
    pub values: Vec<f64>,
    pub speeds: SignalSpeeds,
    /// HLL-weighted `τθ` of the two traces, for the implicit closure part;
    /// zero when that part is already in `values`.
    pub diffusivity: f64,
}

/// Project both traces to their mean center and combine with HLL. Speeds
/// come from the traces before projection.
pub fn interface_flux(left: &MomentState, right: &MomentState, c: f64) -> Result<FaceFlux> {
    let speeds = SignalSpeeds::estimate(left, right, c);
    let u = std::array::from_fn(|d| 0.5 * (left.u[d] + right.u[d]));
    let theta = 0.5 * (left.theta + right.theta);
    let l = project(left, u, theta)?;
    let r = project(right, u, theta)?;
    Ok(FaceFlux {
        u,
        theta,
        values: hll_flux(&l, &r, speeds),
        speeds,
        diffusivity: 0.0,
    })
}

/// `cfl · Δx / max_j (|u_2| + c √θ)`.
pub fn cfl_timestep(grid: &Grid1D, cfl: f64, c: f64) -> f64 {
    let speed = grid
        .cells
        .iter()
        .map(|s| s.u[1].abs() + c * s.theta.sqrt())
        .fold(0.0, f64::max);
    cfl * grid.dx() / speed
}

/// Cells padded with one ghost on each side, with the boundary cells'
/// closure block set per [`EdgeClosure`] before the wall map reads it.
pub fn with_ghosts(grid: &Grid1D, config: &RunConfig) -> Result<Vec<MomentState>> {
    let n = grid.len();
    let dx = grid.dx();
    let mut first = grid.cells[0].clone();
    let mut last = grid.cells[n - 1].clone();
    let tau_first = relaxation_time(first.rho(), first.theta, config.kn)?;
    let tau_last = relaxation_time(last.rho(), last.theta, config.kn)?;
    let close_edge = |cell: &mut MomentState, grad: Gradients, tau: f64| match config.edge_closure {
        EdgeClosure::None => {}
        EdgeClosure::OneSided => fill_closure(cell, &grad, tau),
    };
    close_edge(
        &mut first,
        Gradients::difference(&grid.cells[0], &grid.cells[1], dx),
        tau_first,
    );
    close_edge(
        &mut last,
        Gradients::difference(&grid.cells[n - 2], &grid.cells[n - 1], dx),
        tau_last,
    );

    let ghost = |cell: &MomentState, b: &Boundary| -> Result<MomentState> {
        match b {
            Boundary::Free => Ok(cell.clone()),
            Boundary::Wall(w) => Ok(ghost_from(cell, &apply_wall_bc(cell, w)?)),
        }
    };
    let mut ext = Vec::with_capacity(n + 2);
    ext.push(ghost(&first, &config.left)?);
    ext.push(first);
    ext.extend(grid.cells[1..n - 1].iter().cloned());
    ext.push(last.clone());
    ext.push(ghost(&last, &config.right)?);
    Ok(ext)
}

/// Left and right traces at every face `j - 1/2`, `j = 0..=N`, for the
/// padded cells `ext`. The boundary faces take cell values; interior
/// traces are linear with limited slopes. The closure block is left as in
/// the cell.
///
/// With `predictor = Some(Δt/Δx)` both traces of a cell are advanced by
/// half a step with the flux difference across the cell (MUSCL–Hancock).
pub fn reconstruct(
    ext: &[MomentState],
    limiter: &dyn SlopeLimiter,
    predictor: Option<f64>,
) -> Vec<(MomentState, MomentState)> {
    let n = ext.len() - 2;
    let evolved = ext[0].space().evolved_len();
    // traces of interior cell j (ext index j+1): (low side, high side)
    let traces: Vec<(MomentState, MomentState)> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let (a, b, c) = (&ext[k - 1], &ext[k], &ext[k + 1]);
            let mut lo = b.clone();
            let mut hi = b.clone();
            for d in 0..3 {
                let s = 0.5 * limiter.slope(b.u[d] - a.u[d], c.u[d] - b.u[d]);
                lo.u[d] -= s;
                hi.u[d] += s;
            }
            let s = 0.5 * limiter.slope(b.theta - a.theta, c.theta - b.theta);
            lo.theta -= s;
            hi.theta += s;
            {
                let (fa, fb, fc) = (a.coeffs(), b.coeffs(), c.coeffs());
                let lo_c = lo.coeffs_mut();
                for i in 0..evolved {
                    let s = 0.5 * limiter.slope(fb[i] - fa[i], fc[i] - fb[i]);
                    lo_c[i] -= s;
                }
                let hi_c = hi.coeffs_mut();
                for i in 0..evolved {
                    let s = 0.5 * limiter.slope(fb[i] - fa[i], fc[i] - fb[i]);
                    hi_c[i] += s;
                }
            }
            let ok = |s: &MomentState| s.rho() > 0.0 && s.theta > 0.0;
            if !ok(&lo) || !ok(&hi) {
                return (b.clone(), b.clone());
            }
            match predictor.and_then(|ratio| predict(b, &lo, &hi, 0.5 * ratio)) {
                Some(pair) => pair,
                None => (lo, hi),
            }
        })
        .collect();

    (0..=n)
        .map(|j| {
            if j == 0 {
                (ext[0].clone(), ext[1].clone())
            } else if j == n {
                (ext[n].clone(), ext[n + 1].clone())
            } else {
                (traces[j - 1].1.clone(), traces[j].0.clone())
            }
        })
        .collect()
}

/// Both traces moved by `-half_ratio (F(hi) - F(lo))`, the fluxes taken in
/// the cell's frame without the closure block. `None` if a trace loses
/// positivity.
fn predict(
    cell: &MomentState,
    lo: &MomentState,
    hi: &MomentState,
    half_ratio: f64,
) -> Option<(MomentState, MomentState)> {
    let space = cell.space();
    let evolved = space.evolved_len();
    let to_cell = |s: &MomentState| {
        let mut s = s.clone();
        s.clear_closure();
        project(&s, cell.u, cell.theta).ok()
    };
    let (plo, phi) = (to_cell(lo)?, to_cell(hi)?);
    let (flo, fhi) = (flux_vector(&plo), flux_vector(&phi));
    let top = space.grade_range(space.order() + 1);
    let advance = |p: MomentState, trace: &MomentState| {
        let mut g = p.into_coeffs();
        for i in 0..evolved {
            g[i] -= half_ratio * (fhi[i] - flo[i]);
        }
        let mut out = recenter(space, cell.u, cell.theta, g).ok()?;
        out.coeffs_mut()[top.clone()].copy_from_slice(&trace.coeffs()[top.clone()]);
        Some(out)
    };
    Some((advance(plo, lo)?, advance(phi, hi)?))
}

/// Face fluxes for one transport pass over the padded cells.
pub fn face_fluxes(
    ext: &[MomentState],
    config: &RunConfig,
    dx: f64,
    dt: f64,
) -> Result<Vec<FaceFlux>> {
    let n = ext.len() - 2;
    let c = config.signal_speed();
    let predictor = config.predictor.then_some(dt / dx);
    let mut pairs = reconstruct(ext, config.limiter.as_ref(), predictor);
    let mut diffusivity = vec![0.0; n + 1];
    let space = Arc::clone(ext[0].space());
    let top = space.grade_range(config.order + 1);

    match config.closure {
        ClosureMode::Interface => {
            let implicit = config.implicit_closure;
            let inner = pairs[1..n]
                .par_iter_mut()
                .enumerate()
                .map(|(k, (l, r))| -> Result<f64> {
                    let j = k + 1;
                    let grad = Gradients::difference(&ext[j], &ext[j + 1], dx);
                    let tl = relaxation_time(l.rho(), l.theta, config.kn)?;
                    let tr = relaxation_time(r.rho(), r.theta, config.kn)?;
                    if !implicit {
                        fill_closure(l, &grad, tl);
                        fill_closure(r, &grad, tr);
                        return Ok(0.0);
                    }
                    let bl = closure_offdiagonal(l, &grad, tl);
                    let br = closure_offdiagonal(r, &grad, tr);
                    l.coeffs_mut()[top.clone()].copy_from_slice(&bl);
                    r.coeffs_mut()[top.clone()].copy_from_slice(&br);
                    let (wl, wr) = hll_weights(SignalSpeeds::estimate(l, r, c));
                    Ok(wl * tl * l.theta + wr * tr * r.theta)
                })
                .collect::<Result<Vec<_>>>()?;
            diffusivity[1..n].copy_from_slice(&inner);
        }
        ClosureMode::Center => {
            let blocks = (1..=n)
                .into_par_iter()
                .map(|k| {
                    let grad = Gradients::difference(&ext[k - 1], &ext[k + 1], 2.0 * dx);
                    let tau = relaxation_time(ext[k].rho(), ext[k].theta, config.kn)?;
                    Ok(closure_values(&ext[k], &grad, tau))
                })
                .collect::<Result<Vec<_>>>()?;
            for j in 1..n {
                pairs[j].0.coeffs_mut()[top.clone()].copy_from_slice(&blocks[j - 1]);
                pairs[j].1.coeffs_mut()[top.clone()].copy_from_slice(&blocks[j]);
            }
        }
    }

    pairs
        .par_iter()
        .zip(diffusivity)
        .map(|((l, r), d)| {
            let mut f = interface_flux(l, r, c)?;
            f.diffusivity = d;
            Ok(f)
        })
        .collect()
}

/// Weights of the left and right flux in the HLL combination.
fn hll_weights(speeds: SignalSpeeds) -> (f64, f64) {
    let SignalSpeeds {
        left: sl,
        right: sr,
    } = speeds;
    if sl >= 0.0 {
        (1.0, 0.0)
    } else if sr <= 0.0 {
        (0.0, 1.0)
    } else {
        (sr / (sr - sl), -sl / (sr - sl))
    }
}

/// Backward-Euler diffusion of every grade-`M` coefficient:
/// `g_j - (α_2+1) Δt/Δx² [D_{j+½}(g_{j+1}-g_j) - D_{j-½}(g_j-g_{j-1})] = g*_j`.
fn implicit_diffusion(
    space: &MomentSpace,
    g: &mut [Vec<f64>],
    fluxes: &[FaceFlux],
    ratio: f64,
    dx: f64,
) {
    if fluxes.iter().all(|f| f.diffusivity == 0.0) {
        return;
    }
    let n = g.len();
    let range = space.grade_range(space.order());
    let columns: Vec<Vec<f64>> = range
        .clone()
        .into_par_iter()
        .map(|i| {
            let k = (space.index(i).0[1] as f64 + 1.0) * ratio / dx;
            let lower: Vec<f64> = (0..n).map(|j| -k * fluxes[j].diffusivity).collect();
            let upper: Vec<f64> = (0..n).map(|j| -k * fluxes[j + 1].diffusivity).collect();
            let diag: Vec<f64> = (0..n).map(|j| 1.0 - lower[j] - upper[j]).collect();
            let rhs: Vec<f64> = g.iter().map(|c| c[i]).collect();
            solve_tridiagonal(&lower, &diag, &upper, rhs)
        })
        .collect();
    for (i, col) in range.zip(columns) {
        for (cell, v) in g.iter_mut().zip(col) {
            cell[i] = v;
        }
    }
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = upper[0] / beta;
    rhs[0] /= beta;
    for j in 1..n {
        beta = diag[j] - lower[j] * c[j - 1];
        c[j] = upper[j] / beta;
        rhs[j] = (rhs[j] - lower[j] * rhs[j - 1]) / beta;
    }
    for j in (0..n - 1).rev() {
        rhs[j] -= c[j] * rhs[j + 1];
    }
    rhs
}

/// Transport update of every cell over `dt`.
pub fn transport(grid: &Grid1D, config: &RunConfig, dt: f64) -> Result<Vec<MomentState>> {
    let dx = grid.dx();
    let ext = with_ghosts(grid, config)?;
    let fluxes = face_fluxes(&ext, config, dx, dt)?;
    let space = Arc::clone(grid.space());
    let evolved = space.evolved_len();
    let order = space.order();
    let ratio = dt / dx;

    let mut gs: Vec<Vec<f64>> = grid
        .cells
        .par_iter()
        .enumerate()
        .map(|(j, cell)| {
            let mut g = cell.coeffs().to_vec();
            g[evolved..].iter_mut().for_each(|c| *c = 0.0);
            for (face, sign) in [(&fluxes[j], 1.0), (&fluxes[j + 1], -1.0)] {
                let mut v = face.values.clone();
                let kernel = ShiftKernel::between(face.u, face.theta, cell.u, cell.theta, order);
                apply_kernel(&space, &kernel, &mut v, evolved);
                for (gi, vi) in g.iter_mut().zip(&v) {
                    *gi += sign * ratio * vi;
                }
            }
            g
        })
        .collect();
    implicit_diffusion(&space, &mut gs, &fluxes, ratio, dx);
    grid.cells
        .par_iter()
        .zip(gs)
        .enumerate()
        .map(|(j, (cell, g))| {
            recenter(&space, cell.u, cell.theta, g).map_err(|(rho, theta)| Error::Positivity {
                cell: j,
                stage: "transport",
                rho,
                theta,
            })
        })
        .collect()
}

fn accelerate(cells: &mut [MomentState], force: [f64; 3], dt: f64) {
    if force == [0.0; 3] {
        return;
    }
    for c in cells {
        for d in 0..3 {
            c.u[d] += force[d] * dt;
        }
    }
}

fn relax(cells: &mut [MomentState], config: &RunConfig, dt: f64) -> Result<()> {
    if config.collisionless {
        return Ok(());
    }
    cells.par_iter_mut().try_for_each(|c| -> Result<()> {
        let tau = relaxation_time(c.rho(), c.theta, config.kn)?;
        collide_in_place(
            c,
            CollisionParams {
                tau,
                prandtl: config.prandtl,
                dt,
            },
        );
        Ok(())
    })
}

/// Advance `grid` by one step of length `dt`.
pub fn step_with(grid: &mut Grid1D, config: &RunConfig, dt: f64) -> Result<()> {
    let half = match config.splitting {
        Splitting::Lie => None,
        Splitting::Strang => Some(0.5 * dt),
    };
    if let Some(h) = half {
        accelerate(&mut grid.cells, config.force, h);
    }
    grid.cells = transport(grid, config, dt)?;
    relax(&mut grid.cells, config, dt)?;
    accelerate(&mut grid.cells, config.force, half.unwrap_or(dt));
    Ok(())
}

/// One CFL-limited step; returns the step length used.
pub fn step(grid: &mut Grid1D, config: &RunConfig) -> Result<f64> {
    let dt = cfl_timestep(grid, config.cfl, config.signal_speed());
    step_with(grid, config, dt)?;
    Ok(dt)
}

/// `max |Δq| / (|q| + 1e-8) / Δt` over cells, `u`, `θ` and coefficients
/// through grade `M`.
pub fn residual(old: &Grid1D, new: &Grid1D, dt: f64) -> f64 {
    let evolved = old.space().evolved_len();
    let rel = |a: f64, b: f64| (b - a).abs() / (a.abs() + 1e-8);
    old.cells
        .iter()
        .zip(&new.cells)
        .map(|(a, b)| {
            let mut m = rel(a.theta, b.theta);
            for d in 0..3 {
                m = m.max(rel(a.u[d], b.u[d]));
            }
            for (x, y) in a.coeffs()[..evolved].iter().zip(&b.coeffs()[..evolved]) {
                m = m.max(rel(*x, *y));
            }
            m
        })
        .fold(0.0, f64::max)
        / dt
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub grid: Grid1D,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub grid: Grid1D,
    pub time: f64,
    pub steps: usize,
    pub dt_history: Vec<f64>,
    pub residuals: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

/// Advance until the stop rule fires.
pub fn run(mut grid: Grid1D, config: &RunConfig) -> Result<RunOutput> {
    config.check()?;
    if grid.space().order() != config.order {
        return Err(Error::SpaceMismatch(grid.space().order(), config.order));
    }
    let c = config.signal_speed();
    let mut out = RunOutput {
        grid: grid.clone(),
        time: 0.0,
        steps: 0,
        dt_history: Vec::new(),
        residuals: Vec::new(),
        snapshots: Vec::new(),
    };
    loop {
        let mut dt = cfl_timestep(&grid, config.cfl, c);
        if let StopRule::EndTime(t_end) = config.stop {
            if out.time >= t_end * (1.0 - 1e-14) {
                break;
            }
            dt = dt.min(t_end - out.time);
        }
        let before = matches!(config.stop, StopRule::Steady { .. }).then(|| grid.clone());
        step_with(&mut grid, config, dt)?;
        out.time += dt;
        out.steps += 1;
        out.dt_history.push(dt);
        let res = before.map_or(0.0, |b| residual(&b, &grid, dt));
        out.residuals.push(res);
        if config.snapshot_every > 0 && out.steps.is_multiple_of(config.snapshot_every) {
            out.snapshots.push(Snapshot {
                step: out.steps,
                time: out.time,
                grid: grid.clone(),
            });
        }
        if out.steps.is_multiple_of(1000) {
            debug!(
                "step {} t={:.6} dt={:.3e} residual={:.3e}",
                out.steps, out.time, dt, res
            );
        }
        if !res.is_finite() {
            return Err(Error::NotConverged {
                steps: out.steps,
                residual: res,
            });
        }
        if let StopRule::Steady {
            threshold,
            max_steps,
        } = config.stop
        {
            if res < threshold {
                info!("steady after {} steps, t={:.4}", out.steps, out.time);
                break;
            }
            if out.steps >= max_steps {
                return Err(Error::NotConverged {
                    steps: out.steps,
                    residual: res,
                });
            }
        }
    }
    out.grid = grid;
    Ok(out)
}
