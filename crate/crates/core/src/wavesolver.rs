//! Explicit solver for the 1-D nonlinear viscoelastic wave equation
//!
//! `u_tt - u_xx + a u_t + int_0^t g(t-s) u_xx(s) ds = |u|^(p-2) u`
//!
//! on an interval, clamped at the left end and closed at the right end by
//! either a homogeneous Dirichlet condition or the fractional flux condition
//! `u_x(L, t) = -b1 int phi mu dxi` fed by the diffusive ODE family.
//! Leapfrog core, frictional damping averaged implicitly, nonlinear source
//! at the current level.  The memory Laplacian is evaluated with a zero
//! ghost flux so that the prescribed flux acts on the combined viscoelastic
//! stress; this keeps the semi-discrete energy balance exact up to time
//! discretization.

use crate::config::RunConfig;
use crate::diagnostics::{self, Snapshot};
use crate::error::{ConfigError, Error};
use crate::fracdiff::{output_o, DiffusiveGrid, DiffusiveState};
use crate::series::{FunctionalSeries, Row};
use crate::viscomem::{g_circ_grad, update_accumulators, ExpKernel, MemoryAccumulators};

/// Uniform interval grid; node 0 is the clamped end, node `nx - 1` the
/// damped/free end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain1D {
    length: f64,
    nx: usize,
    dx: f64,
}

impl Domain1D {
    pub fn new(length: f64, nx: usize) -> Result<Self, ConfigError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(ConfigError::Validation(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if nx < 3 {
            return Err(ConfigError::Validation(format!(
                "nx must be at least 3, got {nx}"
            )));
        }
        Ok(Self {
            length,
            nx,
            dx: length / (nx - 1) as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    fn node_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx - 1 {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoid-weighted `int u v dx`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.nx);
        debug_assert_eq!(v.len(), self.nx);
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(i, (&a, &b))| self.node_weight(i) * a * b)
            .sum()
    }

    /// Trapezoid-weighted `|u|_2^2`.
    pub fn l2_sq(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }

    /// Trapezoid-weighted `|u|_p^p`.
    pub fn lp_norm_p(&self, u: &[f64], p: f64) -> f64 {
        u.iter()
            .enumerate()
            .map(|(i, &a)| self.node_weight(i) * a.abs().powf(p))
            .sum()
    }

    /// Cell-centered first differences, length `nx - 1`.
    pub fn cell_gradient(&self, u: &[f64]) -> Vec<f64> {
        u.windows(2).map(|w| (w[1] - w[0]) / self.dx).collect()
    }

    /// `|du/dx|_2^2` with the cell-difference gradient.
    pub fn grad_l2_sq(&self, u: &[f64]) -> f64 {
        u.windows(2)
            .map(|w| (w[1] - w[0]) / self.dx)
            .map(|d| d * d)
            .sum::<f64>()
            * self.dx
    }
}

/// Trapezoid `|u|_2^2`, cell-difference `|du/dx|_2^2`, and `|u|_p^p`.
pub fn discrete_norms(u: &[f64], domain: &Domain1D, p: f64) -> (f64, f64, f64) {
    (
        domain.l2_sq(u),
        domain.grad_l2_sq(u),
        domain.lp_norm_p(u, p),
    )
}

/// Three-point Laplacian with a clamped left end and a ghost node enforcing
/// `u_x(L) = boundary_flux` on the right.
pub fn laplacian_1d(u: &[f64], domain: &Domain1D, boundary_flux: f64) -> Vec<f64> {
    let nx = domain.nx;
    let dx2 = domain.dx * domain.dx;
    let mut out = vec![0.0; nx];
    for i in 1..nx - 1 {
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / dx2;
    }
    // ghost value u[nx-2] + 2 dx flux closes the stencil at the right end
    out[nx - 1] = (2.0 * u[nx - 2] - 2.0 * u[nx - 1] + 2.0 * domain.dx * boundary_flux) / dx2;
    out
}

/// Pointwise `|u|^(p-2) u`; odd in `u`.
pub fn source_term(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&v| v.abs().powf(p - 2.0) * v).collect()
}

/// Closure of the right end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightBoundary {
    /// `u_x(L) = -b1 int phi mu dxi`, the fractional damping condition.
    FractionalFlux,
    /// `u(L) = 0`, used by the conservative test harness.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    Completed,
    BlowUp,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Termination {
    pub reason: TerminationReason,
    pub t_final: f64,
    pub detail: String,
}

/// `true` once the gradient norm reaches the threshold (closed condition).
/// A non-finite norm is an instability, not a detected crossing.
pub fn detect_blowup(grad_l2: f64, threshold: f64) -> bool {
    debug_assert!(threshold > 0.0);
    grad_l2.is_finite() && grad_l2 >= threshold
}

/// Refine the numerical blow-up time from the last three samples of
/// `1/|grad u|_2` by fitting `y = C (T - t)^q` (log-slope extrapolation of
/// `y` toward zero); falls back to secant extrapolation, then to the last
/// sample time.
pub fn refine_blowup_time(times: &[f64; 3], inv_grad: &[f64; 3]) -> f64 {
    let (t1, t2, t3) = (times[0], times[1], times[2]);
    let (y1, y2, y3) = (inv_grad[0], inv_grad[1], inv_grad[2]);
    let secant = if y2 > y3 && y3 > 0.0 {
        t3 + y3 * (t3 - t2) / (y2 - y3)
    } else {
        t3
    };
    if !(y1 > y2 && y2 > y3 && y3 > 0.0) {
        return secant;
    }
    let lhs = (y2 / y3).ln();
    let rhs = (y1 / y2).ln();
    let f = |t_star: f64| ((t_star - t1) / (t_star - t2)).ln() * lhs - ((t_star - t2) / (t_star - t3)).ln() * rhs;
    let mut lo = t3 + 1e-12 * (t3 - t1).max(1e-300);
    let mut hi = t3 + 10.0 * (t3 - t1);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return secant;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if !fm.is_finite() {
            return secant;
        }
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Discrete trajectory state: the two field levels the leapfrog needs, the
/// diffusive boundary states, the memory accumulators, and every running
/// time integral the trajectory functionals consume.
#[derive(Debug, Clone)]
pub struct SimState {
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub t: f64,
    pub step: usize,
    pub diffusive: DiffusiveState,
    pub mem: MemoryAccumulators,
    pub int_ut_l2sq: f64,
    pub int_u_l2sq: f64,
    pub h_accum: f64,
    pub int_phi_diss: f64,
}

/// One simulation: configuration, discretization, and mutable state.
pub struct Simulation {
    cfg: RunConfig,
    domain: Domain1D,
    grid: DiffusiveGrid,
    kernel: Option<ExpKernel>,
    state: SimState,
    u1: Vec<f64>,
    // cached per-node exponential integrator coefficients for the phi family
    phi_decay: Vec<f64>,
    phi_gain: Vec<f64>,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let domain = Domain1D::new(cfg.length, cfg.nx)?;
        let grid = DiffusiveGrid::build(cfg.frac, &cfg.grid_spec)?;
        let kernel = cfg.kernel;
        let u0 = cfg.initial_displacement(&domain);
        let u1 = cfg.initial_velocity(&domain);
        let dt = cfg.dt;
        let eta = cfg.frac.eta();
        let phi_decay: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| (-(x * x + eta) * dt).exp())
            .collect();
        let phi_gain: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(&phi_decay)
            .map(|(&x, &d)| (1.0 - d) / (x * x + eta))
            .collect();
        let state = SimState {
            u_prev: u0.clone(),
            u: u0,
            t: 0.0,
            step: 0,
            diffusive: grid.new_state(),
            mem: MemoryAccumulators::new(domain.nx(), domain.dx()),
            int_ut_l2sq: 0.0,
            int_u_l2sq: 0.0,
            h_accum: 0.0,
            int_phi_diss: 0.0,
        };
        Ok(Self {
            cfg: cfg.clone(),
            domain,
            grid,
            kernel,
            state,
            u1,
            phi_decay,
            phi_gain,
        })
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn grid(&self) -> &DiffusiveGrid {
        &self.grid
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn initial_velocity(&self) -> &[f64] {
        &self.u1
    }

    /// Prescribed right-end flux at the current time.
    pub fn boundary_flux(&self) -> f64 {
        match self.cfg.right_bc {
            RightBoundary::Dirichlet => 0.0,
            RightBoundary::FractionalFlux => -self.cfg.b * output_o(&self.state.diffusive, &self.grid),
        }
    }

    /// Stages 1-4 of a step: assemble the right-hand side at the current
    /// level and produce the candidate next field.
    pub fn compute_next(&self) -> Vec<f64> {
        let st = &self.state;
        let cfg = &self.cfg;
        let dom = &self.domain;
        let dt = cfg.dt;
        let flux = self.boundary_flux();
        let lap_u = laplacian_1d(&st.u, dom, flux);
        let mem_term: Option<Vec<f64>> = self
            .kernel
            .map(|k| crate::viscomem::memory_laplacian(&st.mem, &k, |r| laplacian_1d(r, dom, 0.0)));
        let src: Option<Vec<f64>> = cfg.source_on.then(|| source_term(&st.u, cfg.p));
        let nx = dom.nx();
        let mut next = vec![0.0; nx];
        let a = cfg.a;
        for i in 0..nx {
            let mut rhs = lap_u[i];
            if let Some(m) = &mem_term {
                rhs -= m[i];
            }
            if let Some(s) = &src {
                rhs += s[i];
            }
            if let Some(f) = &cfg.forcing {
                rhs += f.eval(dom.x(i), st.t);
            }
            next[i] = if st.step == 0 {
                st.u[i] + dt * self.u1[i] + 0.5 * dt * dt * (rhs - a * self.u1[i])
            } else {
                (2.0 * st.u[i] - (1.0 - 0.5 * a * dt) * st.u_prev[i] + dt * dt * rhs)
                    / (1.0 + 0.5 * a * dt)
            };
        }
        next[0] = 0.0;
        if cfg.right_bc == RightBoundary::Dirichlet {
            next[nx - 1] = 0.0;
        }
        next
    }

    /// Stages 5-8: advance the boundary family with the one-sided boundary
    /// velocity of the step just computed, update the memory accumulators
    /// and every running integral, then shift the field levels.
    pub fn commit(&mut self, next: Vec<f64>) {
        let dt = self.cfg.dt;
        let st = &mut self.state;
        let nx = self.domain.nx();
        let v_b = (next[nx - 1] - st.u[nx - 1]) / dt;

        let psi2_old = self.grid.psi2(&st.diffusive);
        let diss_old = self.grid.phi_dissipation(&st.diffusive);
        for k in 0..self.grid.len() {
            let new = self.phi_decay[k] * st.diffusive.phi[k]
                + self.phi_gain[k] * self.grid.mu_values()[k] * v_b;
            st.diffusive.phi_time_integral[k] += 0.5 * dt * (st.diffusive.phi[k] + new);
            st.diffusive.phi[k] = new;
        }
        st.diffusive.t += dt;
        st.h_accum += 0.5 * dt * (psi2_old + self.grid.psi2(&st.diffusive));
        st.int_phi_diss += 0.5 * dt * (diss_old + self.grid.phi_dissipation(&st.diffusive));

        if let Some(k) = &self.kernel {
            update_accumulators(&mut st.mem, k, &st.u, &next, dt)
                .expect("accumulator grids match the domain");
        } else {
            st.mem.t += dt;
        }

        let mut diff_sq = 0.0;
        for i in 0..nx {
            let d = (next[i] - st.u[i]) / dt;
            diff_sq += self.domain.node_weight(i) * d * d;
        }
        st.int_ut_l2sq += dt * diff_sq;
        st.int_u_l2sq += 0.5 * dt * (self.domain.l2_sq(&st.u) + self.domain.l2_sq(&next));

        st.u_prev = std::mem::replace(&mut st.u, next);
        st.t += dt;
        st.step += 1;
    }

    /// Full step (compute + commit).
    pub fn step(&mut self) {
        let next = self.compute_next();
        self.commit(next);
    }

    /// Diagnostics snapshot at the current time, with the velocity supplied
    /// by the caller (centered difference during a run, the configured
    /// initial velocity at step 0).
    pub fn snapshot(&self, ut: &[f64]) -> Snapshot {
        let st = &self.state;
        let dom = &self.domain;
        let grad_now = dom.cell_gradient(&st.u);
        let g_circ = match &self.kernel {
            Some(k) => g_circ_grad(&st.mem, k, &grad_now),
            None => 0.0,
        };
        let kernel_mass = self.kernel.map_or(0.0, |k| k.mass_integral(st.t));
        Snapshot {
            t: st.t,
            ut_l2sq: dom.l2_sq(ut),
            u_l2sq: dom.l2_sq(&st.u),
            grad_l2sq: dom.grad_l2_sq(&st.u),
            u_lp_p: dom.lp_norm_p(&st.u, self.cfg.p),
            g_circ,
            kernel_mass,
            phi_l2sq: self.grid.phi_l2_sq(&st.diffusive),
            phi_diss: self.grid.phi_dissipation(&st.diffusive),
            psi1: dom.inner(ut, &st.u),
            psi2: self.grid.psi2(&st.diffusive),
            o_boundary: output_o(&st.diffusive, &self.grid),
            u_boundary: st.u[dom.nx() - 1],
            int_ut_l2sq: st.int_ut_l2sq,
            int_u_l2sq: st.int_u_l2sq,
            int_phi_diss: st.int_phi_diss,
            h_accum: st.h_accum,
        }
    }
}

/// Drive a configured simulation to `t_end`, blow-up, or instability,
/// emitting one diagnostics row per step.
pub fn run(cfg: &RunConfig) -> Result<(FunctionalSeries, Termination), Error> {
    let mut sim = Simulation::new(cfg)?;
    let dt = cfg.dt;
    let mut series = FunctionalSeries::new();
    let n_steps = (cfg.t_end / dt).round() as i64;
    if n_steps <= 0 {
        return Ok((
            series,
            Termination {
                reason: TerminationReason::Completed,
                t_final: 0.0,
                detail: "zero-length run".into(),
            },
        ));
    }

    let dom = *sim.domain();
    let nx = dom.nx();
    let mut inv_grad_hist: Vec<(f64, f64)> = Vec::with_capacity(3);
    let termination;
    let mut n: i64 = 0;
    loop {
        let next = sim.compute_next();
        let grad_next_sq = dom.grad_l2_sq(&next);
        if !next.iter().all(|v| v.is_finite()) || !grad_next_sq.is_finite() {
            termination = Termination {
                reason: TerminationReason::Unstable,
                t_final: sim.state().t + dt,
                detail: format!("non-finite field at step {}", n + 1),
            };
            break;
        }
        let ut: Vec<f64> = if n == 0 {
            sim.initial_velocity().to_vec()
        } else {
            (0..nx)
                .map(|i| (next[i] - sim.state().u_prev[i]) / (2.0 * dt))
                .collect()
        };
        let snap = sim.snapshot(&ut);
        series.push(Row::from_snapshot(&snap, cfg));

        let grad_next = grad_next_sq.sqrt();
        let grad_now = snap.grad_l2sq.sqrt();
        if grad_now > 0.0 {
            inv_grad_hist.push((snap.t, 1.0 / grad_now));
            if inv_grad_hist.len() > 2 {
                inv_grad_hist.remove(0);
            }
        }
        if detect_blowup(grad_next, cfg.blowup_threshold) {
            let t_cross = snap.t + dt;
            let t_final = if inv_grad_hist.len() == 2 && grad_next > 0.0 {
                let (ta, ya) = inv_grad_hist[0];
                let (tb, yb) = inv_grad_hist[1];
                refine_blowup_time(&[ta, tb, t_cross], &[ya, yb, 1.0 / grad_next])
            } else {
                t_cross
            };
            termination = Termination {
                reason: TerminationReason::BlowUp,
                t_final,
                detail: format!(
                    "gradient norm {grad_next:.3e} reached threshold {:.3e} at t = {t_cross:.6}",
                    cfg.blowup_threshold
                ),
            };
            break;
        }
        if n == n_steps {
            termination = Termination {
                reason: TerminationReason::Completed,
                t_final: snap.t,
                detail: String::new(),
            };
            break;
        }
        sim.commit(next);
        n += 1;
    }
    diagnostics::fill_dissipation_residuals(&mut series, cfg);
    Ok((series, termination))
}
