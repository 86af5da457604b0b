//! Trajectory functionals and the property checks built on them: the
//! energy balance, global-existence conditions, the Lyapunov sandwich and
//! decay fit, and the blow-up classification with its closed-form time
//! bounds.

pub mod bounds;

use crate::config::RunConfig;
use crate::error::DiagnosticsError;
use crate::fracdiff::{DiffusiveGrid, DiffusiveState};
use crate::series::FunctionalSeries;
use crate::wavesolver::Domain1D;
use statrs::function::gamma::gamma;

/// Raw per-time quantities every functional is assembled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub ut_l2sq: f64,
    pub u_l2sq: f64,
    pub grad_l2sq: f64,
    pub u_lp_p: f64,
    /// `(g o grad u)(t)`.
    pub g_circ: f64,
    /// `int_0^t g(s) ds`.
    pub kernel_mass: f64,
    pub phi_l2sq: f64,
    pub phi_diss: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub o_boundary: f64,
    pub u_boundary: f64,
    pub int_ut_l2sq: f64,
    pub int_u_l2sq: f64,
    pub int_phi_diss: f64,
    pub h_accum: f64,
}

/// The source's contribution to the potential terms; zero when the run has
/// the nonlinear source switched off, so the functionals match the
/// equation actually solved.
fn source_norm(s: &Snapshot, cfg: &RunConfig) -> f64 {
    if cfg.source_on {
        s.u_lp_p
    } else {
        0.0
    }
}

/// Total energy: kinetic + history-weighted potential + memory + source
/// + boundary family.
pub fn energy(s: &Snapshot, cfg: &RunConfig) -> f64 {
    0.5 * s.ut_l2sq + 0.5 * (1.0 - s.kernel_mass) * s.grad_l2sq + 0.5 * s.g_circ
        - source_norm(s, cfg) / cfg.p
        + 0.5 * cfg.b1() * s.phi_l2sq
}

/// `I = (1 - int g) |grad u|^2 + (g o grad u) - |u|_p^p`.
pub fn functional_i(s: &Snapshot, cfg: &RunConfig) -> f64 {
    (1.0 - s.kernel_mass) * s.grad_l2sq + s.g_circ - source_norm(s, cfg)
}

/// `J = 1/2 [(1 - int g) |grad u|^2 + (g o grad u)] - |u|_p^p / p`.
pub fn functional_j(s: &Snapshot, cfg: &RunConfig) -> f64 {
    0.5 * ((1.0 - s.kernel_mass) * s.grad_l2sq + s.g_circ) - source_norm(s, cfg) / cfg.p
}

/// `F = |u|^2 + a int |u|^2 - 1/2 (1 - int g)|grad u|^2 - 1/2 (g o grad u) + b1 H`.
pub fn functional_f(s: &Snapshot, cfg: &RunConfig) -> f64 {
    s.u_l2sq + cfg.a * s.int_u_l2sq
        - 0.5 * (1.0 - s.kernel_mass) * s.grad_l2sq
        - 0.5 * s.g_circ
        + cfg.b1() * s.h_accum
}

/// Right-hand side of the energy balance:
/// `-a |u_t|^2 - 1/2 g(t) |grad u|^2 + 1/2 (g' o grad u) - b1 int (xi^2+eta)|phi|^2`.
pub fn dissipation_rhs(
    t: f64,
    ut_l2sq: f64,
    grad_l2sq: f64,
    g_circ: f64,
    phi_diss: f64,
    cfg: &RunConfig,
) -> f64 {
    let (g_t, kappa) = match &cfg.kernel {
        Some(k) => (k.value(t), k.kappa()),
        None => (0.0, 0.0),
    };
    -cfg.a * ut_l2sq - 0.5 * g_t * grad_l2sq - 0.5 * kappa * g_circ - cfg.b1() * phi_diss
}

/// Backward-looking residual of the energy balance per step,
/// `(E_n - E_{n-1})/dt - (RHS_{n-1} + RHS_n)/2`; stored on row `n`, zero on
/// the first row.
pub fn fill_dissipation_residuals(series: &mut FunctionalSeries, cfg: &RunConfig) {
    let rhs: Vec<f64> = series
        .rows()
        .iter()
        .map(|r| dissipation_rhs(r.t, r.ut_l2sq, r.grad_l2sq, r.g_circ, r.phi_energy, cfg))
        .collect();
    let es: Vec<(f64, f64)> = series.rows().iter().map(|r| (r.t, r.e)).collect();
    for (n, row) in series.rows_mut().iter_mut().enumerate() {
        row.dedt_residual = if n == 0 {
            0.0
        } else {
            let dt = es[n].0 - es[n - 1].0;
            (es[n].1 - es[n - 1].1) / dt - 0.5 * (rhs[n] + rhs[n - 1])
        };
    }
}

// ---------------------------------------------------------------------------
// domain constants
// ---------------------------------------------------------------------------

/// Embedding constants of the discrete space with a clamped left end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainConstants {
    /// `max |u|_2 / |u_x|_2`.
    pub c_star: f64,
    /// `max |u(L)| / |u_x|_2`.
    pub b_q: f64,
    /// Diffusive-family constant `quad_a(0) -> eta^(alpha-1)`; needs
    /// `eta > 0`.
    pub a0: f64,
}

/// Solve `K u = f` for the stiffness form `dx sum D_i(u) D_i(v)` on
/// unknowns `u_1..u_{nx-1}` (`u_0 = 0`, free right end): tridiagonal
/// Thomas sweep.
fn solve_stiffness(nx: usize, dx: f64, f: &[f64]) -> Vec<f64> {
    let n = nx - 1;
    debug_assert_eq!(f.len(), n);
    let inv = 1.0 / dx;
    // diag: 2/dx except 1/dx at the last row; off-diagonals -1/dx
    let mut c = vec![0.0; n]; // superdiagonal after elimination
    let mut d = vec![0.0; n];
    let mut diag0 = 2.0 * inv;
    if n == 1 {
        diag0 = inv;
    }
    c[0] = -inv / diag0;
    d[0] = f[0] / diag0;
    for i in 1..n {
        let diag = if i == n - 1 { inv } else { 2.0 * inv };
        let denom = diag + inv * c[i - 1];
        if i < n - 1 {
            c[i] = -inv / denom;
        }
        d[i] = (f[i] + inv * d[i - 1]) / denom;
    }
    let mut u = vec![0.0; n];
    u[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    u
}

/// Largest value of `|u|_2 / |u_x|_2` over the discrete space, by power
/// iteration on the inverse-stiffness-times-mass operator.
pub fn poincare_constant(domain: &Domain1D) -> Result<f64, DiagnosticsError> {
    let nx = domain.nx();
    let dx = domain.dx();
    let n = nx - 1;
    let mass: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { 0.5 * dx } else { dx })
        .collect();
    let mut v: Vec<f64> = (0..n).map(|i| (i + 1) as f64 * dx).collect();
    let mut lam_prev = 0.0;
    let max_iter = 2000;
    for it in 0..max_iter {
        let mv: Vec<f64> = v.iter().zip(&mass).map(|(a, m)| a * m).collect();
        let w = solve_stiffness(nx, dx, &mv);
        let num: f64 = w.iter().zip(&mass).map(|(a, m)| a * a * m).sum();
        // <Kw, w> = <Mv, w>
        let den: f64 = mv.iter().zip(&w).map(|(a, b)| a * b).sum();
        let lam = num / den;
        let norm = num.sqrt();
        for x in v.iter_mut().zip(&w) {
            *x.0 = x.1 / norm;
        }
        if (lam - lam_prev).abs() <= 1e-14 * lam.abs() && it > 2 {
            return Ok(lam.sqrt());
        }
        lam_prev = lam;
    }
    Err(DiagnosticsError::NoConvergence(max_iter))
}

/// Largest value of `|u(L)| / |u_x|_2`: the maximizer solves `K u = e_L`,
/// and the ratio is `sqrt(u(L))`.
pub fn trace_constant(domain: &Domain1D) -> Result<f64, DiagnosticsError> {
    let n = domain.nx() - 1;
    let mut e_l = vec![0.0; n];
    e_l[n - 1] = 1.0;
    let u = solve_stiffness(domain.nx(), domain.dx(), &e_l);
    let v = u[n - 1];
    if !(v > 0.0) {
        return Err(DiagnosticsError::NoConvergence(0));
    }
    Ok(v.sqrt())
}

impl DomainConstants {
    pub fn compute(domain: &Domain1D, grid: &DiffusiveGrid) -> Result<Self, DiagnosticsError> {
        if !(grid.params().eta() > 0.0) {
            return Err(DiagnosticsError::EtaRequired);
        }
        Ok(Self {
            c_star: poincare_constant(domain)?,
            b_q: trace_constant(domain)?,
            a0: grid.quad_a(0.0).map_err(|_| DiagnosticsError::EtaRequired)?,
        })
    }
}

// ---------------------------------------------------------------------------
// global-existence check
// ---------------------------------------------------------------------------

/// Smallness condition for global existence: `beta < 1` together with
/// `I(u0) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalCheck {
    pub e0: f64,
    /// `C*^p ((2p/(p-2)) E(0))^((p-2)/2)`; NaN when `E(0) < 0`.
    pub beta: f64,
    pub i0_positive: bool,
    /// `false` when `E(0) < 0` (the blow-up pipeline applies instead).
    pub applicable: bool,
}

pub fn check_global_conditions(
    u0: &[f64],
    u1: &[f64],
    cfg: &RunConfig,
    constants: &DomainConstants,
) -> GlobalCheck {
    let dom = cfg.domain();
    let grad0 = dom.grad_l2_sq(u0);
    let lp0 = dom.lp_norm_p(u0, cfg.p);
    let e0 = 0.5 * dom.l2_sq(u1) + 0.5 * grad0 - lp0 / cfg.p;
    let i0_positive = grad0 - lp0 > 0.0;
    if e0 < 0.0 {
        return GlobalCheck {
            e0,
            beta: f64::NAN,
            i0_positive,
            applicable: false,
        };
    }
    let p = cfg.p;
    let beta = constants.c_star.powf(p) * (2.0 * p / (p - 2.0) * e0).powf((p - 2.0) / 2.0);
    GlobalCheck {
        e0,
        beta,
        i0_positive,
        applicable: true,
    }
}

// ---------------------------------------------------------------------------
// Lyapunov functional
// ---------------------------------------------------------------------------

/// Decay-rate bookkeeping attached to the Lyapunov parameters when the
/// potential-well condition holds and `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    pub delta_prime: f64,
    pub d_margin: f64,
    pub m_rate: f64,
}

/// Weights of `L = eps1 E + eps2 psi1 + (eps2 b1 / 2) psi2` together with
/// the equivalence constants `alpha1 E <= L <= alpha2 E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    pub eps1: f64,
    pub eps2: f64,
    pub n_coef: f64,
    pub delta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub decay: Option<DecayRate>,
}

impl LyapunovParams {
    /// Build the weights 5% above their admissibility floors:
    /// `N > max{(2d+1)/(2d eta), 2p(A0 Bq b1 (2d+1) + C*)/(p-2), 1}` and
    /// `eps1 >= N eps2` (plus the decay-rate floor on `eps1` when the
    /// potential well applies).
    pub fn build(
        cfg: &RunConfig,
        constants: &DomainConstants,
        e0: f64,
    ) -> Result<Self, DiagnosticsError> {
        let eta = cfg.frac.eta();
        if !(eta > 0.0) {
            return Err(DiagnosticsError::EtaRequired);
        }
        let delta = 1.0;
        let eps2 = 1.0;
        let p = cfg.p;
        let b1 = cfg.b1();
        let n_floor = ((2.0 * delta + 1.0) / (2.0 * delta * eta))
            .max(2.0 * p * (constants.a0 * constants.b_q * b1 * (2.0 * delta + 1.0) + constants.c_star) / (p - 2.0))
            .max(1.0);
        let n_coef = 1.05 * n_floor;

        let decay = if cfg.a > 0.0 && e0 >= 0.0 {
            let beta = constants.c_star.powf(p) * (2.0 * p / (p - 2.0) * e0).powf((p - 2.0) / 2.0);
            if beta < 1.0 {
                let delta_prime = (1.0 - beta) / (2.0 * constants.c_star * cfg.a);
                let d_margin = 0.5 * (1.0 - beta);
                let m_rate = 0.95 * (2.0 * d_margin).min(2.0);
                Some(DecayRate {
                    delta_prime,
                    d_margin,
                    m_rate,
                })
            } else {
                None
            }
        } else {
            None
        };

        let mut eps1_floor = n_coef * eps2;
        if let Some(d) = &decay {
            eps1_floor =
                eps1_floor.max(eps2 * (1.0 + cfg.a / (4.0 * d.delta_prime) + 0.5 * d.m_rate) / cfg.a);
        }
        let eps1 = 1.05 * eps1_floor;
        Ok(Self {
            eps1,
            eps2,
            n_coef,
            delta,
            alpha1: eps1 - n_coef * eps2,
            alpha2: eps1 + n_coef * eps2,
            decay,
        })
    }
}

/// `L` value from one row's stored pieces.
pub fn lyapunov_value(e: f64, psi1: f64, psi2: f64, params: &LyapunovParams, b1: f64) -> f64 {
    params.eps1 * e + params.eps2 * psi1 + 0.5 * params.eps2 * b1 * psi2
}

/// Fill the `Lyap` column of a series.
pub fn attach_lyapunov(series: &mut FunctionalSeries, params: &LyapunovParams, cfg: &RunConfig) {
    let b1 = cfg.b1();
    for row in series.rows_mut() {
        row.lyap = lyapunov_value(row.e, row.psi1, row.psi2, params, b1);
    }
}

// ---------------------------------------------------------------------------
// decay fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Prefactor of `K e^{-k t}`.
    pub k_coef: f64,
    /// Rate `k`.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares line through `(t, ln E)` on the window `[lo, hi]`.
pub fn fit_decay(
    series: &FunctionalSeries,
    window: (f64, f64),
) -> Result<DecayFit, DiagnosticsError> {
    let pts: Vec<(f64, f64)> = series
        .rows()
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1)
        .map(|r| (r.t, r.e))
        .collect();
    if pts.len() < 10 {
        return Err(DiagnosticsError::WindowTooShort(format!(
            "need at least 10 samples in [{}, {}], got {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, e)| !(e > 0.0)) {
        return Err(DiagnosticsError::NonpositiveEnergy);
    }
    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, e) in &pts {
        let y = e.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;
    let ybar = sy / n;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(t, e) in &pts {
        let y = e.ln();
        ss_res += (y - slope * t - intercept) * (y - slope * t - intercept);
        ss_tot += (y - ybar) * (y - ybar);
    }
    Ok(DecayFit {
        k_coef: intercept.exp(),
        rate: -slope,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        samples: pts.len(),
    })
}

// ---------------------------------------------------------------------------
// diffusive identity
// ---------------------------------------------------------------------------

/// Residual of the boundary-family identity
/// `int (xi^2+eta) phi Phi dxi = u(L) int phi mu dxi - int |phi|^2 dxi`
/// where `Phi` is the running time integral of `phi`.  Exact for the
/// continuum system when the boundary trace starts at zero.
pub fn diffusive_identity_residual(
    state: &DiffusiveState,
    grid: &DiffusiveGrid,
    u_boundary: f64,
) -> f64 {
    let eta = grid.params().eta();
    let lam = grid.density_weights();
    let mu = grid.mu_values();
    let nodes = grid.nodes();
    let mut lhs = 0.0;
    let mut phi_mu = 0.0;
    let mut phi_sq = 0.0;
    for k in 0..grid.len() {
        lhs += lam[k] * (nodes[k] * nodes[k] + eta) * state.phi[k] * state.phi_time_integral[k];
        phi_mu += lam[k] * mu[k] * state.phi[k];
        phi_sq += lam[k] * state.phi[k] * state.phi[k];
    }
    lhs - (u_boundary * phi_mu - phi_sq)
}

// ---------------------------------------------------------------------------
// growth-bound checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HBoundCheck {
    pub holds: bool,
    pub observed: f64,
    pub bound: f64,
}

/// One-sided diagnostic bound on the accumulated boundary functional `H`:
/// `H(t) <= 1/2 C1 Bq e^(-eta C2) [C2^(2a-1) a + C2^(3-2a) eta] Gamma(a) T^4`
/// with `C1 = max{sup |grad u|^2, 1}` measured from the series.
pub fn h_bound_check(
    series: &FunctionalSeries,
    cfg: &RunConfig,
    constants: &DomainConstants,
    t_horizon: f64,
    c2: f64,
) -> Result<HBoundCheck, DiagnosticsError> {
    if series.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let alpha = cfg.frac.alpha();
    let eta = cfg.frac.eta();
    let c1 = series
        .rows()
        .iter()
        .map(|r| r.grad_l2sq)
        .fold(1.0_f64, f64::max);
    let observed = series.rows().last().unwrap().h_func;
    let bound = 0.5
        * c1
        * constants.b_q
        * (-eta * c2).exp()
        * (c2.powf(2.0 * alpha - 1.0) * alpha + c2.powf(3.0 - 2.0 * alpha) * eta)
        * gamma(alpha)
        * t_horizon.powi(4);
    Ok(HBoundCheck {
        holds: observed <= bound,
        observed,
        bound,
    })
}

/// Margins of the second-difference convexity estimate for `F`: for each
/// interior row, `F'' - [(p+2)|u_t|^2 + 2p{ -E(0) + a int |u_s|^2 -
/// 1/2 (1-int g)|grad u|^2 - 1/2 (g o grad u) + b1 int (xi^2+eta)|phi|^2 }]`.
/// Nonnegative margins (up to discretization slack) confirm the estimate.
pub fn f_convexity_margins(series: &FunctionalSeries, cfg: &RunConfig) -> Vec<f64> {
    let rows = series.rows();
    if rows.len() < 3 {
        return Vec::new();
    }
    let e0 = rows[0].e;
    let b1 = cfg.b1();
    let p = cfg.p;
    let mut out = Vec::with_capacity(rows.len() - 2);
    for n in 1..rows.len() - 1 {
        let dt = rows[n].t - rows[n - 1].t;
        let fpp = (rows[n + 1].f_func - 2.0 * rows[n].f_func + rows[n - 1].f_func) / (dt * dt);
        let r = &rows[n];
        let rhs = (p + 2.0) * r.ut_l2sq
            + 2.0
                * p
                * (-e0 + cfg.a * r.int_ut_l2sq
                    - 0.5 * (1.0 - r.kernel_mass) * r.grad_l2sq
                    - 0.5 * r.g_circ
                    + b1 * r.int_phi_diss);
        out.push(fpp - rhs);
    }
    out
}

// ---------------------------------------------------------------------------
// blow-up classification and bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupCase {
    NegativeEnergy,
    ZeroEnergy,
    PositiveEnergy,
    NotClassified,
}

impl BlowupCase {
    pub fn name(&self) -> &'static str {
        match self {
            BlowupCase::NegativeEnergy => "NegativeEnergy",
            BlowupCase::ZeroEnergy => "ZeroEnergy",
            BlowupCase::PositiveEnergy => "PositiveEnergy",
            BlowupCase::NotClassified => "NotClassified",
        }
    }
}

/// One closed-form upper bound on the blow-up time, or the reason it does
/// not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEstimate {
    pub formula: &'static str,
    pub value: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupAssessment {
    pub case: BlowupCase,
    pub t0: f64,
    /// Lower bound on the blow-up time (negative-energy case only;
    /// zero otherwise).
    pub lower_t_star: f64,
    pub gamma1: f64,
    pub sigma: Option<f64>,
    pub b_coef: Option<f64>,
    pub j0: Option<f64>,
    pub bounds: Vec<BoundEstimate>,
    pub t_numeric: Option<f64>,
    pub e0: f64,
    pub f_prime0: f64,
}

/// Analytic slope of `F` at `t = 0`: `2 <u0, u1> + a |u0|^2 +
/// 1/2 g(0) |grad u0|^2` (memory and boundary terms vanish there).
fn f_prime_at_zero(series: &FunctionalSeries, cfg: &RunConfig) -> f64 {
    let r0 = &series.rows()[0];
    2.0 * r0.psi1 + cfg.a * r0.u_l2sq + 0.5 * cfg.kernel_g0() * r0.grad_l2sq
}

/// Classify the initial-energy case for the blow-up analysis.  The zero
/// band is `1e-10` of the magnitude scale of the energy terms.
pub fn classify_blowup_case(
    series: &FunctionalSeries,
    cfg: &RunConfig,
) -> Result<BlowupAssessment, DiagnosticsError> {
    if series.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let r0 = &series.rows()[0];
    let e0 = r0.e;
    let scale = 0.5 * r0.ut_l2sq + 0.5 * r0.grad_l2sq + r0.u_lp_p / cfg.p + f64::MIN_POSITIVE;
    let band = 1e-10 * scale;
    let fp0 = f_prime_at_zero(series, cfg);
    let a_u0 = cfg.a * r0.u_l2sq;
    let p = cfg.p;

    let (case, t0, t_star) = if e0 < -band {
        let t_star = (0.0_f64).max((fp0 - a_u0) / (2.0 * p * e0));
        (BlowupCase::NegativeEnergy, t_star, t_star)
    } else if e0 <= band {
        if fp0 > a_u0 {
            (BlowupCase::ZeroEnergy, 0.0, 0.0)
        } else {
            (BlowupCase::NotClassified, 0.0, 0.0)
        }
    } else {
        // positive energy: strict slope condition with the printed factor
        // r = p - 2 sqrt(p^2 - p) on [F(0) + l0]
        let r = p - 2.0 * (p * p - p).sqrt();
        let l0 = a_u0 - 2.0 * e0;
        if fp0 > r * (r0.f_func + l0) + a_u0 {
            (BlowupCase::PositiveEnergy, 0.0, 0.0)
        } else {
            (BlowupCase::NotClassified, 0.0, 0.0)
        }
    };
    Ok(BlowupAssessment {
        case,
        t0,
        lower_t_star: t_star,
        gamma1: (p - 4.0) / 4.0,
        sigma: None,
        b_coef: None,
        j0: None,
        bounds: Vec::new(),
        t_numeric: None,
        e0,
        f_prime0: fp0,
    })
}

/// The auxiliary trajectory `J(t) = [F(t) + a (T - t) |u0|^2]^(-gamma1)`
/// sampled on the series rows up to `t_window`, with centered slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct JSeries {
    pub ts: Vec<f64>,
    pub j: Vec<f64>,
    pub jp: Vec<f64>,
}

pub fn j_series(
    series: &FunctionalSeries,
    cfg: &RunConfig,
    t_window: f64,
) -> Result<JSeries, DiagnosticsError> {
    let gamma1 = (cfg.p - 4.0) / 4.0;
    if !(gamma1 > 0.0) {
        return Err(DiagnosticsError::WindowTooShort(format!(
            "auxiliary exponent requires p > 4, got p = {}",
            cfg.p
        )));
    }
    let rows = series.rows();
    if rows.len() < 3 {
        return Err(DiagnosticsError::WindowTooShort(
            "need at least 3 rows for slopes".into(),
        ));
    }
    let u0_l2 = rows[0].u_l2sq;
    let mut ts = Vec::new();
    let mut j = Vec::new();
    for r in rows.iter().take_while(|r| r.t <= t_window + 1e-12) {
        let base = r.f_func + cfg.a * (t_window - r.t) * u0_l2;
        if !(base > 0.0) {
            return Err(DiagnosticsError::WindowTooShort(format!(
                "auxiliary function undefined at t = {}: base = {base}",
                r.t
            )));
        }
        ts.push(r.t);
        j.push(base.powf(-gamma1));
    }
    let n = ts.len();
    let mut jp = vec![0.0; n];
    for i in 0..n {
        jp[i] = if i == 0 {
            (j[1] - j[0]) / (ts[1] - ts[0])
        } else if i == n - 1 {
            (j[n - 1] - j[n - 2]) / (ts[n - 1] - ts[n - 2])
        } else {
            (j[i + 1] - j[i - 1]) / (ts[i + 1] - ts[i - 1])
        };
    }
    Ok(JSeries { ts, j, jp })
}

fn nearest_index(ts: &[f64], t: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &ti) in ts.iter().enumerate() {
        let d = (ti - t).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

/// Fill `sigma`, `b`, and every applicable closed-form upper bound on the
/// blow-up time into the assessment.  `t_window` is the horizon `T` the
/// auxiliary function is built with, usually the measured numerical
/// blow-up time.
pub fn blowup_bounds(
    mut assess: BlowupAssessment,
    series: &FunctionalSeries,
    cfg: &RunConfig,
    t_window: f64,
) -> BlowupAssessment {
    let p = cfg.p;
    let gamma1 = assess.gamma1;
    if assess.case == BlowupCase::NotClassified {
        assess.bounds.push(BoundEstimate {
            formula: "-",
            value: None,
            note: "no admissible energy case".into(),
        });
        return assess;
    }
    assess.b_coef = Some(p * (p - 4.0) * (p - 4.0) / (2.0 * p - 4.0) * assess.e0);
    if !(gamma1 > 0.0) {
        for f in ["(5.34)", "(5.35)", "(5.36)", "(5.37)", "(5.38)", "(5.39)"] {
            assess.bounds.push(BoundEstimate {
                formula: f,
                value: None,
                note: format!("auxiliary exponent requires p > 4, got p = {p}"),
            });
        }
        return assess;
    }
    let js = match j_series(series, cfg, t_window) {
        Ok(js) => js,
        Err(e) => {
            assess.bounds.push(BoundEstimate {
                formula: "-",
                value: None,
                note: e.to_string(),
            });
            return assess;
        }
    };
    let i0 = nearest_index(&js.ts, assess.t0);
    let j0 = js.j[i0];
    let jp0 = js.jp[i0];
    assess.j0 = Some(j0);

    // slope of F at t0: analytic at zero, centered difference inside
    let fp_t0 = if assess.t0 == 0.0 {
        assess.f_prime0
    } else {
        let rows = series.rows();
        let k = nearest_index(&js.ts, assess.t0).clamp(1, rows.len().saturating_sub(2));
        (rows[k + 1].f_func - rows[k - 1].f_func) / (rows[k + 1].t - rows[k - 1].t)
    };
    let u0_l2 = series.rows()[0].u_l2sq;
    let b_coef = assess.b_coef.unwrap();
    let sigma = (gamma1 * gamma1 * (fp_t0 - u0_l2) * (fp_t0 - u0_l2)
        - b_coef * j0.powf(-1.0 / gamma1))
        * j0.powf(2.0 + 2.0 / gamma1);
    assess.sigma = Some(sigma);

    let push = |bounds: &mut Vec<BoundEstimate>, formula: &'static str, value: Option<f64>, why: &str| {
        bounds.push(BoundEstimate {
            formula,
            value,
            note: if value.is_some() { String::new() } else { why.to_string() },
        });
    };
    let t0 = assess.t0;
    match assess.case {
        BlowupCase::NegativeEnergy => {
            push(
                &mut assess.bounds,
                "(5.34)",
                bounds::t_upper_slope(t0, j0, jp0),
                "requires J'(t0) < 0",
            );
            push(
                &mut assess.bounds,
                "(5.35)",
                bounds::t_upper_log(t0, j0, sigma, b_coef),
                "requires b < 0 and J(t0) < min{1, sqrt(sigma/-b)}",
            );
        }
        BlowupCase::ZeroEnergy => {
            push(
                &mut assess.bounds,
                "(5.36)",
                bounds::t_upper_slope(t0, j0, jp0),
                "requires J'(t0) < 0",
            );
            push(
                &mut assess.bounds,
                "(5.37)",
                bounds::t_upper_slope_plus(t0, j0, jp0),
                "requires J'(t0) != 0",
            );
        }
        BlowupCase::PositiveEnergy => {
            push(
                &mut assess.bounds,
                "(5.38)",
                bounds::t_upper_sqrt(j0, sigma),
                "requires sigma > 0",
            );
            push(
                &mut assess.bounds,
                "(5.39)",
                bounds::t_upper_exp_alt(t0, j0, sigma, b_coef, gamma1),
                "requires sigma > 0, b > 0, and c J(t0) <= 1",
            );
        }
        BlowupCase::NotClassified => unreachable!(),
    }
    assess
}

/// Per-row residual of the differential inequality
/// `J'(t)^2 >= sigma + b J(t)^(2 + 1/gamma1)`; nonnegative residuals (up
/// to discretization slack) along genuine blow-up trajectories.
pub fn blowup_inequality_residual(js: &JSeries, sigma: f64, b_coef: f64, gamma1: f64) -> Vec<f64> {
    js.j
        .iter()
        .zip(&js.jp)
        .map(|(&j, &jp)| jp * jp - sigma - b_coef * j.powf(2.0 + 1.0 / gamma1))
        .collect()
}
