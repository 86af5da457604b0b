//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them all).

use fracwave::config::{preset, ScenarioId};
use fracwave::diagnostics::{
    attach_lyapunov, blowup_bounds, blowup_inequality_residual, classify_blowup_case, fit_decay,
    j_series, poincare_constant, trace_constant, BlowupCase, DomainConstants, LyapunovParams,
};
use fracwave::fracdiff::{caputo_direct, closed_form_a, output_o, step_phi, DiffusiveGrid, FracParams, GridSpec};
use fracwave::wavesolver::{run, Domain1D, TerminationReason};
use statrs::function::gamma::gamma;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:2} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_quadrature_calibration() {
    let t0 = std::time::Instant::now();
    let mut worst = 0.0_f64;
    for alpha in [0.3, 0.5, 0.7] {
        for eta in [0.5, 1.0] {
            let params = FracParams::new(alpha, eta).unwrap();
            let grid = DiffusiveGrid::build(params, &GridSpec::default()).unwrap();
            for lambda in [0.5, 1.0, 2.0] {
                let target = (eta + lambda).powf(alpha - 1.0);
                let got = grid.quad_a(lambda).unwrap();
                worst = worst.max((got - target).abs() / target);
            }
        }
    }
    let pass = worst <= 1e-3 && t0.elapsed().as_secs_f64() < 1.0;
    report(
        1,
        "quadrature calibration",
        pass,
        &format!(
            "max rel err {worst:.3e} (tol 1e-3), {:.3} s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_operator_oracle() {
    let t0 = std::time::Instant::now();
    let dt = 1e-3;
    let n = 1000;
    let samples: Vec<f64> = (0..=n).map(|i| (i as f64 * dt).powi(2)).collect();
    let mut worst_pair = 0.0_f64;
    let mut worst_analytic = 0.0_f64;
    for alpha in [0.3, 0.5, 0.7] {
        for eta in [0.0, 1.0] {
            let params = FracParams::new(alpha, eta).unwrap();
            let grid = DiffusiveGrid::build(params, &GridSpec::default()).unwrap();
            let mut state = grid.new_state();
            for k in 0..n {
                let lo = k as f64 * dt;
                let hi = (k + 1) as f64 * dt;
                let v = (hi * hi - lo * lo) / dt;
                step_phi(&mut state, &grid, v, dt);
            }
            let o = output_o(&state, &grid);
            let cap = caputo_direct(&samples, dt, &params, n).unwrap();
            worst_pair = worst_pair.max((o - cap).abs() / cap.abs());
            if eta == 0.0 {
                let exact = 2.0 / gamma(3.0 - alpha);
                worst_analytic = worst_analytic.max((cap - exact).abs() / exact);
            }
        }
    }
    let pass = worst_pair <= 2e-2 && worst_analytic <= 1e-3 && t0.elapsed().as_secs_f64() < 5.0;
    report(
        2,
        "operator oracle",
        pass,
        &format!(
            "diffusive-vs-direct {worst_pair:.3e} (tol 2e-2), direct-vs-analytic {worst_analytic:.3e} (tol 1e-3), {:.2} s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_conservation_limit() {
    let t0 = std::time::Instant::now();
    let job = preset(ScenarioId::Conservative);
    let (series, term) = run(&job.run).unwrap();
    assert_eq!(term.reason, TerminationReason::Completed);
    let e0 = series.rows()[0].e;
    let drift = series
        .rows()
        .iter()
        .map(|r| (r.e - e0).abs() / e0)
        .fold(0.0_f64, f64::max);
    let pass = drift <= 1e-3 && t0.elapsed().as_secs_f64() < 5.0;
    report(
        3,
        "conservation limit",
        pass,
        &format!(
            "max |E - E0|/E0 = {drift:.3e} over t in [0, 10], {:.2} s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_dissipation_identity() {
    let t0 = std::time::Instant::now();
    let job = preset(ScenarioId::GlobalDecay);

    // monotone energy at per-step slack 1e-8 E(0)
    let (series, _) = run(&job.run).unwrap();
    let e0 = series.rows()[0].e;
    let max_rise = series
        .rows()
        .windows(2)
        .map(|w| w[1].e - w[0].e)
        .fold(f64::NEG_INFINITY, f64::max);
    let monotone = max_rise <= 1e-8 * e0;

    // residual of the balance shrinks at order >= 1 under dt refinement
    let mut maxres = Vec::new();
    for level in 0..3 {
        let mut cfg = job.run.clone();
        cfg.t_end = 2.0;
        cfg.dt = job.run.dt / (1 << level) as f64;
        let (s, _) = run(&cfg).unwrap();
        maxres.push(
            s.rows()
                .iter()
                .map(|r| r.dedt_residual.abs())
                .fold(0.0_f64, f64::max),
        );
    }
    let order = (maxres[0] / maxres[2]).log2() / 2.0;
    let pass = monotone && order >= 1.0 && t0.elapsed().as_secs_f64() < 30.0;
    report(
        4,
        "dissipation identity",
        pass,
        &format!(
            "max energy rise {max_rise:.3e} (slack {:.1e}), residuals {maxres:?} order {order:.2}, {:.2} s",
            1e-8 * e0,
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_05_global_regime_suite() {
    let t0 = std::time::Instant::now();
    let job = preset(ScenarioId::GlobalDecay);
    let cfg = &job.run;
    let (mut series, term) = run(cfg).unwrap();
    assert_eq!(term.reason, TerminationReason::Completed);

    // positivity of I along the run
    let min_i = series
        .rows()
        .iter()
        .map(|r| r.i_func)
        .fold(f64::INFINITY, f64::min);
    let i_positive = min_i > 0.0;

    // uniform bound with C1 = max{2/b1, 2p/(p-2), 2} at 1% slack
    let e0 = series.rows()[0].e;
    let b1 = cfg.b1();
    let c1 = (2.0 / b1).max(2.0 * cfg.p / (cfg.p - 2.0)).max(2.0);
    let worst_bound = series
        .rows()
        .iter()
        .map(|r| (r.ut_l2sq + r.grad_l2sq + b1 * r.phi_l2sq) / (c1 * e0))
        .fold(0.0_f64, f64::max);
    let bound_ok = worst_bound <= 1.01;

    // Lyapunov sandwich with parameters built from the measured constants
    let sim = fracwave::Simulation::new(cfg).unwrap();
    let constants = DomainConstants::compute(sim.domain(), sim.grid()).unwrap();
    let params = LyapunovParams::build(cfg, &constants, e0).unwrap();
    attach_lyapunov(&mut series, &params, cfg);
    let slack = 1e-9 * e0;
    let sandwich = series
        .rows()
        .iter()
        .all(|r| params.alpha1 * r.e <= r.lyap + slack && r.lyap <= params.alpha2 * r.e + slack);

    let pass = i_positive && bound_ok && sandwich && t0.elapsed().as_secs_f64() < 30.0;
    report(
        5,
        "global-regime functional suite",
        pass,
        &format!(
            "min I = {min_i:.3e}, bound ratio {worst_bound:.4} (<= 1.01), sandwich [{:.3}, {:.3}] {}, {:.2} s",
            params.alpha1,
            params.alpha2,
            if sandwich { "holds" } else { "violated" },
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_06_exponential_decay() {
    let t0 = std::time::Instant::now();
    let job = preset(ScenarioId::GlobalDecay);
    let (series, _) = run(&job.run).unwrap();
    let fit = fit_decay(&series, (2.0, 20.0)).unwrap();
    let pass = fit.rate > 0.0 && fit.r_squared >= 0.99 && t0.elapsed().as_secs_f64() < 30.0;
    report(
        6,
        "exponential decay",
        pass,
        &format!(
            "k = {:.4}, K = {:.4e}, R^2 = {:.5} on [2, 20], {:.2} s",
            fit.rate,
            fit.k_coef,
            fit.r_squared,
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_07_blowup_negative_energy() {
    let t0 = std::time::Instant::now();
    let job = preset(ScenarioId::BlowupNegE);
    let cfg = &job.run;
    let (series, term) = run(cfg).unwrap();
    let blew_up = term.reason == TerminationReason::BlowUp && term.t_final < cfg.t_end;

    let assess = classify_blowup_case(&series, cfg).unwrap();
    let case_ok = assess.case == BlowupCase::NegativeEnergy;
    let t_numeric = term.t_final;
    let lower_ok = t_numeric >= assess.lower_t_star;

    let assess = blowup_bounds(assess, &series, cfg, t_numeric);
    let js = j_series(&series, cfg, t_numeric).unwrap();
    let t0_case = assess.t0;
    let j0 = assess.j0.unwrap();
    let mut monotone = true;
    for w in js
        .ts
        .iter()
        .zip(&js.j)
        .filter(|(t, _)| **t >= t0_case)
        .collect::<Vec<_>>()
        .windows(2)
    {
        if *w[1].1 > *w[0].1 + 1e-12 * j0 {
            monotone = false;
            break;
        }
    }

    let sigma = assess.sigma.unwrap();
    let b_coef = assess.b_coef.unwrap();
    let res = blowup_inequality_residual(&js, sigma, b_coef, assess.gamma1);
    let quarter_start = t_numeric - 0.25 * (t_numeric - t0_case);
    let min_res = js
        .ts
        .iter()
        .zip(&res)
        .filter(|(t, _)| **t >= quarter_start)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    let residual_ok = min_res >= -1e-2 * sigma.abs();

    let pass =
        blew_up && case_ok && lower_ok && monotone && residual_ok && t0.elapsed().as_secs_f64() < 60.0;
    report(
        7,
        "blow-up, negative energy",
        pass,
        &format!(
            "T_numeric = {t_numeric:.4} (t* = {:.4}), E(0) = {:.4}, J monotone: {monotone}, min final-quarter residual {min_res:.3e} vs {:.3e}, {:.2} s",
            assess.lower_t_star,
            assess.e0,
            -1e-2 * sigma.abs(),
            t0.elapsed().as_secs_f64()
        ),
    );
}

mod bound_oracle {
    //! Independently coded arithmetic for the closed-form time bounds,
    //! written in log/exp form so shared mistakes with the production
    //! formulas are unlikely.

    pub fn smallest_root(d: f64) -> f64 {
        2.0 * (d + 1.0) - 2.0 * (0.5 * ((d + 1.0).ln() + d.ln())).exp()
    }

    pub fn log_bound(t0: f64, j0: f64, alpha: f64, b: f64) -> f64 {
        let s = (0.5 * (alpha.ln() - (-b).ln())).exp();
        t0 + (s.ln() - (s - j0).ln()) / (0.5 * (-b).ln()).exp()
    }

    pub fn zero_b_bound(t0: f64, j0: f64, alpha: f64) -> f64 {
        t0 + j0 * (-0.5 * alpha.ln()).exp()
    }

    pub fn sqrt_bound(j0: f64, alpha: f64) -> f64 {
        j0 * (-0.5 * alpha.ln()).exp()
    }

    pub fn exp_bound(t0: f64, j0: f64, alpha: f64, b: f64, d: f64) -> f64 {
        let c = ((d / (2.0 + d)) * (b.ln() - alpha.ln())).exp();
        let lead = (((3.0 * d + 1.0) / (2.0 * d)) * 2.0_f64.ln()).exp() * d * c
            / (0.5 * alpha.ln()).exp();
        t0 + lead * (1.0 - ((1.0 / (2.0 * d)) * (1.0 + c * j0).ln()).exp())
    }

    pub fn exp_bound_alt(t0: f64, j0: f64, alpha: f64, b: f64, d: f64) -> f64 {
        let c = ((d / (2.0 + d)) * (b.ln() - alpha.ln())).exp();
        let lead = (((3.0 * d + 1.0) / (2.0 * d)) * 2.0_f64.ln()).exp() * d * c
            / (0.5 * alpha.ln()).exp();
        t0 + lead * (1.0 - ((1.0 / (2.0 * d)) * (1.0 - c * j0).ln()).exp())
    }

    pub fn slope_bound(t0: f64, j0: f64, jp0: f64) -> f64 {
        t0 + j0 * (-1.0 / jp0)
    }

    pub fn slope_plus_bound(t0: f64, j0: f64, jp0: f64) -> f64 {
        t0 - j0 * (-1.0 / jp0)
    }
}

#[test]
fn criterion_08_bound_formula_regression() {
    use fracwave::diagnostics::bounds;
    let t0c = std::time::Instant::now();

    // deterministic linear-congruential stream keeps the inputs reproducible
    let mut state = 0x9e3779b97f4a7c15_u64;
    let mut unit = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1_u64 << 53) as f64)
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let t0 = 2.0 * unit();
        let alpha = 0.1 + 9.9 * unit();
        let delta = 0.1 + 3.0 * unit();
        let jp0 = -(0.05 + 2.0 * unit());

        // negative-b family
        let bneg = -(0.1 + 9.9 * unit());
        let j0 = 0.9 * (alpha / -bneg).sqrt().min(1.0) * (0.1 + 0.9 * unit());
        worst = worst.max(rel(
            bounds::t_upper_log(t0, j0, alpha, bneg).unwrap(),
            bound_oracle::log_bound(t0, j0, alpha, bneg),
        ));

        // zero-b and positive-b families
        let j0 = 0.05 + 0.9 * unit();
        worst = worst.max(rel(
            bounds::t_upper_b_zero(t0, j0, alpha).unwrap(),
            bound_oracle::zero_b_bound(t0, j0, alpha),
        ));
        worst = worst.max(rel(
            bounds::t_upper_sqrt(j0, alpha).unwrap(),
            bound_oracle::sqrt_bound(j0, alpha),
        ));
        let bpos = 0.1 + 9.9 * unit();
        worst = worst.max(rel(
            bounds::t_upper_exp(t0, j0, alpha, bpos, delta).unwrap(),
            bound_oracle::exp_bound(t0, j0, alpha, bpos, delta),
        ));
        let c = (bpos / alpha).powf(delta / (2.0 + delta));
        let j0_alt = (0.9 / c).min(0.95) * (0.1 + 0.9 * unit());
        worst = worst.max(rel(
            bounds::t_upper_exp_alt(t0, j0_alt, alpha, bpos, delta).unwrap(),
            bound_oracle::exp_bound_alt(t0, j0_alt, alpha, bpos, delta),
        ));

        worst = worst.max(rel(
            bounds::t_upper_slope(t0, j0, jp0).unwrap(),
            bound_oracle::slope_bound(t0, j0, jp0),
        ));
        worst = worst.max(rel(
            bounds::t_upper_slope_plus(t0, j0, jp0).unwrap(),
            bound_oracle::slope_plus_bound(t0, j0, jp0),
        ));
        worst = worst.max(rel(bounds::smallest_root(delta), bound_oracle::smallest_root(delta)));
    }

    // spot values
    let spot = bounds::t_upper_b_zero(0.0, 1.0, 4.0).unwrap();
    let root = bounds::smallest_root(1.0);
    let spot_ok = spot == 0.5 && (root - 1.17157).abs() < 5e-6
        && root == 2.0 * 2.0 - 2.0 * 2.0_f64.sqrt();

    let pass = worst <= 1e-12 && spot_ok && t0c.elapsed().as_secs_f64() < 1.0;
    report(
        8,
        "bound formula regression",
        pass,
        &format!(
            "max rel deviation {worst:.3e} over 100 random inputs; spot T* = {spot}, root = {root:.6}, {:.3} s",
            t0c.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_09_convergence_orders() {
    let t0 = std::time::Instant::now();
    let base = preset(ScenarioId::Convergence).run;
    let report_data = fracwave::mms::convergence_study(&base, 4).unwrap();
    let pass = report_data.spatial_order >= 1.8
        && report_data.temporal_order >= 1.8
        && t0.elapsed().as_secs_f64() < 120.0;
    report(
        9,
        "manufactured-solution convergence",
        pass,
        &format!(
            "spatial order {:.2} (pairwise {:?}), temporal order {:.2} (pairwise {:?}), {:.1} s",
            report_data.spatial_order,
            report_data
                .spatial_orders
                .iter()
                .map(|o| (o * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            report_data.temporal_order,
            report_data
                .temporal_orders
                .iter()
                .map(|o| (o * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_10_domain_constants() {
    let t0 = std::time::Instant::now();
    let dom = Domain1D::new(1.0, 801).unwrap();
    let c_star = poincare_constant(&dom).unwrap();
    let b_q = trace_constant(&dom).unwrap();
    let c_target = 2.0 / std::f64::consts::PI;
    let c_err = (c_star - c_target).abs() / c_target;
    let b_err = (b_q - 1.0).abs();
    let pass = c_err <= 0.01 && b_err <= 0.01 && t0.elapsed().as_secs_f64() < 5.0;
    report(
        10,
        "domain constants",
        pass,
        &format!(
            "C* = {c_star:.6} (2/pi within {c_err:.2e}), B = {b_q:.6} (1 within {b_err:.2e}), {:.2} s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

// keep the closed-form reference available to this suite
#[allow(dead_code)]
fn reference_closed_form(lambda: f64, alpha: f64, eta: f64) -> f64 {
    closed_form_a(lambda, &FracParams::new(alpha, eta).unwrap()).unwrap()
}
