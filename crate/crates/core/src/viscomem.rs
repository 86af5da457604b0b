//! Exponential relaxation kernel `g(t) = g0 e^(-kappa t)` and the O(1)
//! recursive evaluation of its convolutions against the displacement
//! history.  A dense trapezoidal convolution over the stored history is
//! kept alongside as the oracle for the recursive path.

use crate::error::KernelError;

/// Single-exponential relaxation kernel.  `g0 = 0` is the memory-free
/// limit; otherwise the kernel is positive, nonincreasing, and leaves a
/// positive residual mass `l = 1 - g0/kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpKernel {
    g0: f64,
    kappa: f64,
}

impl ExpKernel {
    pub fn new(g0: f64, kappa: f64) -> Result<Self, KernelError> {
        if !(g0 >= 0.0) || !g0.is_finite() {
            return Err(KernelError::BadG0(g0));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(KernelError::BadKappa(kappa));
        }
        let k = Self { g0, kappa };
        let l = k.l_residual();
        if !(l > 0.0) {
            return Err(KernelError::NonpositiveResidual(l));
        }
        Ok(k)
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `g(t)`.
    pub fn value(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        self.g0 * (-self.kappa * t).exp()
    }

    /// `l = 1 - int_0^inf g`.
    pub fn l_residual(&self) -> f64 {
        1.0 - self.g0 / self.kappa
    }

    /// `int_0^t g(s) ds = g0 (1 - e^(-kappa t)) / kappa`.
    pub fn mass_integral(&self, t: f64) -> f64 {
        self.g0 * (1.0 - (-self.kappa * t).exp()) / self.kappa
    }
}

/// Running exponentially-weighted history integrals:
/// `R = int e^(-kappa(t-s)) u(.,s) ds` on the nodes,
/// `P = int e^(-kappa(t-s)) du/dx(.,s) ds` on the cells,
/// `Q = int e^(-kappa(t-s)) |du/dx(s)|_2^2 ds`,
/// `mass = int e^(-kappa(t-s)) ds`.
/// Each advances by one trapezoid-in-step recursion per time step, so all
/// four share one set of quadrature weights; the quadratic form assembled
/// from them in [`g_circ_grad`] is then nonnegative by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryAccumulators {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub q: f64,
    pub mass: f64,
    pub t: f64,
    dx: f64,
}

impl MemoryAccumulators {
    pub fn new(nx: usize, dx: f64) -> Self {
        Self {
            r: vec![0.0; nx],
            p: vec![0.0; nx.saturating_sub(1)],
            q: 0.0,
            mass: 0.0,
            t: 0.0,
            dx,
        }
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }
}

fn cell_gradient(u: &[f64], dx: f64) -> Vec<f64> {
    u.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
}

fn grad_l2_sq(u: &[f64], dx: f64) -> f64 {
    u.windows(2).map(|w| (w[1] - w[0]) / dx).map(|d| d * d).sum::<f64>() * dx
}

/// Advance all three accumulators across one step `[t, t+dt]` given the
/// fields at both ends of the step:
/// `X <- e^(-kappa dt) (X + dt/2 f_old) + dt/2 f_new`.
pub fn update_accumulators(
    acc: &mut MemoryAccumulators,
    kernel: &ExpKernel,
    u_old: &[f64],
    u_new: &[f64],
    dt: f64,
) -> Result<(), KernelError> {
    if u_old.len() != acc.r.len() || u_new.len() != acc.r.len() {
        return Err(KernelError::GridMismatch {
            want: acc.r.len(),
            got: if u_old.len() != acc.r.len() {
                u_old.len()
            } else {
                u_new.len()
            },
        });
    }
    let decay = (-kernel.kappa() * dt).exp();
    let half = 0.5 * dt;
    for (r, (&uo, &un)) in acc.r.iter_mut().zip(u_old.iter().zip(u_new)) {
        *r = decay * (*r + half * uo) + half * un;
    }
    let dx = acc.dx;
    let go = cell_gradient(u_old, dx);
    let gn = cell_gradient(u_new, dx);
    for (p, (&a, &b)) in acc.p.iter_mut().zip(go.iter().zip(&gn)) {
        *p = decay * (*p + half * a) + half * b;
    }
    acc.q = decay * (acc.q + half * grad_l2_sq(u_old, dx)) + half * grad_l2_sq(u_new, dx);
    acc.mass = decay * (acc.mass + half) + half;
    acc.t += dt;
    Ok(())
}

/// Memory term of the momentum equation, `int_0^t g(t-s) Lap u(s) ds`,
/// evaluated as `g0 * Lap(R)` since the Laplacian commutes with the time
/// convolution.  The caller supplies the Laplacian (and with it the ghost
/// flux convention for the boundary node).
pub fn memory_laplacian<F>(
    acc: &MemoryAccumulators,
    kernel: &ExpKernel,
    laplacian_op: F,
) -> Vec<f64>
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    let mut out = laplacian_op(&acc.r);
    for v in out.iter_mut() {
        *v *= kernel.g0();
    }
    out
}

/// `(g o grad u)(t) = int_0^t g(t-s) |grad u(t) - grad u(s)|_2^2 ds`,
/// expanded against the accumulators:
/// `g0 (|grad u|^2 mass - 2 <grad u, P> + Q)`.
/// The shared quadrature weights make this the discrete quadratic form
/// `sum_s w_s g(t - t_s) |grad u(t) - grad u(t_s)|^2 >= 0`; `mass`
/// approximates `(1 - e^(-kappa t))/kappa` to second order.
/// `grad_u_now` is the cell gradient of the current field.
pub fn g_circ_grad(acc: &MemoryAccumulators, kernel: &ExpKernel, grad_u_now: &[f64]) -> f64 {
    debug_assert_eq!(grad_u_now.len(), acc.p.len());
    let dx = acc.dx;
    let gsq: f64 = grad_u_now.iter().map(|d| d * d).sum::<f64>() * dx;
    let cross: f64 = grad_u_now.iter().zip(&acc.p).map(|(a, b)| a * b).sum::<f64>() * dx;
    kernel.g0() * (gsq * acc.mass - 2.0 * cross + acc.q)
}

/// `(g' o grad u)(t) = -kappa (g o grad u)(t)`, exact for the exponential
/// kernel.
pub fn g_prime_circ_grad(g_circ_value: f64, kernel: &ExpKernel) -> f64 {
    -kernel.kappa() * g_circ_value
}

/// Dense-history trapezoidal convolution `int_0^t g(t-s) h(s) ds` over
/// uniformly sampled scalars; O(n) per call, the oracle for the recursions.
pub fn direct_convolution(
    history: &[f64],
    kernel: &ExpKernel,
    dt: f64,
) -> Result<f64, KernelError> {
    if history.is_empty() {
        return Err(KernelError::EmptyHistory);
    }
    let n = history.len() - 1;
    let t = n as f64 * dt;
    let mut sum = 0.0;
    for (m, &h) in history.iter().enumerate() {
        let w = if m == 0 || m == n { 0.5 } else { 1.0 };
        sum += w * kernel.value(t - m as f64 * dt) * h;
    }
    Ok(sum * dt)
}

/// Field-valued version of [`direct_convolution`].
pub fn direct_convolution_field(
    history: &[Vec<f64>],
    kernel: &ExpKernel,
    dt: f64,
) -> Result<Vec<f64>, KernelError> {
    if history.is_empty() {
        return Err(KernelError::EmptyHistory);
    }
    let n = history.len() - 1;
    let t = n as f64 * dt;
    let mut out = vec![0.0; history[0].len()];
    for (m, h) in history.iter().enumerate() {
        let w = if m == 0 || m == n { 0.5 } else { 1.0 };
        let c = w * kernel.value(t - m as f64 * dt) * dt;
        for (o, &v) in out.iter_mut().zip(h) {
            *o += c * v;
        }
    }
    Ok(out)
}
