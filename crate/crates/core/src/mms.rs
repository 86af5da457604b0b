//! Manufactured-solution forcing and the grid/time refinement study.
//!
//! The target field is `u = cos(omega t) sin(beta x)` with
//! `beta = pi / (2 L)`, which satisfies the clamped left end and a zero
//! right-end flux, so the study runs with the fractional coupling off
//! (`b = 0`) while friction, memory, and the nonlinear source stay active.

use crate::config::RunConfig;
use crate::error::Error;
use crate::wavesolver::{self, Simulation};

/// Additive forcing that makes `cos(omega t) sin(beta x)` an exact solution
/// of the momentum equation with the configured `a`, `p`, and kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedForcing {
    omega: f64,
    beta: f64,
    a: f64,
    p: f64,
    g0: f64,
    kappa: f64,
}

impl ManufacturedForcing {
    pub fn for_config(cfg: &RunConfig, omega: f64) -> Self {
        Self {
            omega,
            beta: std::f64::consts::PI / (2.0 * cfg.length),
            a: cfg.a,
            p: cfg.p,
            g0: cfg.kernel_g0(),
            kappa: cfg.kernel.map_or(1.0, |k| k.kappa()),
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Exact field.
    pub fn exact(&self, x: f64, t: f64) -> f64 {
        (self.omega * t).cos() * (self.beta * x).sin()
    }

    /// `u_tt - u_xx + a u_t + int_0^t g(t-s) u_xx(s) ds - |u|^(p-2) u`
    /// evaluated on the exact field.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let (w, b) = (self.omega, self.beta);
        let sx = (b * x).sin();
        let ct = (w * t).cos();
        let u = ct * sx;
        let mut s = (b * b - w * w) * u - self.a * w * (w * t).sin() * sx;
        if self.g0 > 0.0 {
            let k = self.kappa;
            let conv = (k * ct + w * (w * t).sin() - k * (-k * t).exp()) / (k * k + w * w);
            s -= b * b * self.g0 * conv * sx;
        }
        s - u.abs().powf(self.p - 2.0) * u
    }
}

fn mms_config(base: &RunConfig, nx: usize, dt: f64, t_end: f64, omega: f64) -> RunConfig {
    let mut cfg = base.clone();
    cfg.nx = nx;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.b = 0.0;
    cfg.source_on = true;
    cfg.cfl_safety = 1.0;
    cfg.u0 = crate::config::Profile::Sine {
        amplitude: 1.0,
        mode: 0.5,
    };
    cfg.u1 = crate::config::Profile::Zero;
    cfg.forcing = Some(ManufacturedForcing::for_config(&cfg, omega));
    cfg
}

fn final_field(cfg: &RunConfig) -> Result<Vec<f64>, Error> {
    let mut sim = Simulation::new(cfg)?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    for _ in 0..steps {
        sim.step();
    }
    Ok(sim.state().u.clone())
}

fn max_err_vs_exact(cfg: &RunConfig, forcing: &ManufacturedForcing) -> Result<f64, Error> {
    let u = final_field(cfg)?;
    let dom = wavesolver::Domain1D::new(cfg.length, cfg.nx)?;
    Ok(u.iter()
        .enumerate()
        .map(|(i, &v)| (v - forcing.exact(dom.x(i), cfg.t_end)).abs())
        .fold(0.0_f64, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementLevel {
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub spatial: Vec<RefinementLevel>,
    pub spatial_orders: Vec<f64>,
    /// Least-squares slope of log error against log h.
    pub spatial_order: f64,
    pub temporal: Vec<RefinementLevel>,
    pub temporal_orders: Vec<f64>,
    pub temporal_order: f64,
}

fn ls_slope(levels: &[RefinementLevel]) -> f64 {
    let n = levels.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for l in levels {
        let x = l.h.ln();
        let y = l.error.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn pairwise_orders(levels: &[RefinementLevel]) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln())
        .collect()
}

/// Run the manufactured-solution refinement study: `levels` grids halving
/// `h` against the exact field (temporal error held negligible), and
/// `levels` time steps halving `dt` on a fixed grid compared
/// self-consistently.  The runs within each sweep execute on their own
/// threads.
pub fn convergence_study(base: &RunConfig, levels: usize) -> Result<ConvergenceReport, Error> {
    assert!(levels >= 2, "need at least two refinement levels");
    let omega = std::f64::consts::PI;
    let t_end = 0.5;

    // spatial sweep: nx-1 in {25, 50, 100, ...}, one small dt for all
    let coarse_cells = 25usize;
    let nxs: Vec<usize> = (0..levels).map(|j| coarse_cells * (1 << j) + 1).collect();
    let h_min = base.length / (nxs[levels - 1] - 1) as f64;
    // small enough that the shared temporal error never contaminates the
    // spatial trend
    let dt_spatial = 0.05 * h_min;
    let n_sub = (t_end / dt_spatial).round();
    let dt_spatial = t_end / n_sub;

    let spatial_errs: Vec<Result<f64, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = nxs
            .iter()
            .map(|&nx| {
                let cfg = mms_config(base, nx, dt_spatial, t_end, omega);
                scope.spawn(move || {
                    let f = cfg.forcing.clone().unwrap();
                    max_err_vs_exact(&cfg, &f)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut spatial = Vec::new();
    for (nx, err) in nxs.iter().zip(spatial_errs) {
        spatial.push(RefinementLevel {
            h: base.length / (nx - 1) as f64,
            error: err?,
        });
    }

    // temporal sweep: fixed fine grid, dt halving, self-convergence
    let nx_t = 201usize;
    let h_t = base.length / (nx_t - 1) as f64;
    let dts: Vec<f64> = (0..=levels).map(|j| 0.5 * h_t / (1 << j) as f64).collect();
    let fields: Vec<Result<Vec<f64>, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = dts
            .iter()
            .map(|&dt| {
                let cfg = mms_config(base, nx_t, dt, t_end, omega);
                scope.spawn(move || final_field(&cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut temporal = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for (dt, field) in dts.iter().zip(fields) {
        let field = field?;
        if let Some(p) = prev {
            let diff = p
                .iter()
                .zip(&field)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            temporal.push(RefinementLevel {
                h: *dt * 2.0,
                error: diff,
            });
        }
        prev = Some(field);
    }

    Ok(ConvergenceReport {
        spatial_orders: pairwise_orders(&spatial),
        spatial_order: ls_slope(&spatial),
        spatial,
        temporal_orders: pairwise_orders(&temporal),
        temporal_order: ls_slope(&temporal),
        temporal,
    })
}
