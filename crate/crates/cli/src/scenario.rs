//! Orchestration of single runs, the quadrature check, the refinement
//! study, and the blow-up report.

use crate::report::{self, ReportBundle};
use crate::AppError;
use fracwave::config::JobConfig;
use fracwave::diagnostics::{
    attach_lyapunov, blowup_bounds, blowup_inequality_residual, check_global_conditions,
    classify_blowup_case, fit_decay, j_series, BlowupCase, DomainConstants, LyapunovParams,
};
use fracwave::fracdiff::{DiffusiveGrid, FracParams, GridSpec};
use fracwave::mms::convergence_study;
use fracwave::wavesolver::{run, Simulation, TerminationReason};
use std::path::Path;

/// Execute one configured run, evaluate every applicable diagnostic, and
/// write the series and report files into the job's output directory.
pub fn run_job(job: &JobConfig, stem: &str) -> Result<ReportBundle, AppError> {
    let cfg = &job.run;
    let (mut series, termination) = run(cfg)?;

    let sim = Simulation::new(cfg)?;
    let constants = DomainConstants::compute(sim.domain(), sim.grid()).ok();

    let dom = cfg.domain();
    let u0 = cfg.initial_displacement(&dom);
    let u1 = cfg.initial_velocity(&dom);
    let global = constants
        .as_ref()
        .map(|c| check_global_conditions(&u0, &u1, cfg, c));

    let e0 = series.rows().first().map(|r| r.e);
    let lyap = match (&constants, e0) {
        (Some(c), Some(e0)) => LyapunovParams::build(cfg, c, e0).ok(),
        _ => None,
    };
    if let Some(p) = &lyap {
        attach_lyapunov(&mut series, p, cfg);
    }

    let fit = if termination.reason == TerminationReason::Completed && !series.is_empty() {
        fit_decay(&series, (0.1 * cfg.t_end, cfg.t_end)).ok()
    } else {
        None
    };

    let assessment = if series.is_empty() {
        None
    } else {
        let assess = classify_blowup_case(&series, cfg)
            .map_err(|e| AppError::Config(e.to_string()))?;
        let t_window = match termination.reason {
            TerminationReason::BlowUp => termination.t_final,
            _ => cfg.t_end,
        };
        let mut assess = blowup_bounds(assess, &series, cfg, t_window);
        if termination.reason == TerminationReason::BlowUp {
            assess.t_numeric = Some(termination.t_final);
        }
        Some(assess)
    };

    std::fs::create_dir_all(&job.output_dir)
        .map_err(|e| AppError::Io(format!("creating {}: {e}", job.output_dir)))?;
    let series_path = Path::new(&job.output_dir).join(format!("{stem}.csv"));
    let file = std::fs::File::create(&series_path)
        .map_err(|e| AppError::Io(format!("creating {}: {e}", series_path.display())))?;
    series
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| AppError::Io(e.to_string()))?;

    let bundle = ReportBundle {
        series_path: series_path.display().to_string(),
        rows: series.len(),
        constants,
        global,
        lyap,
        fit,
        assessment,
        termination,
    };
    let report_path = Path::new(&job.output_dir).join(format!("{stem}.report.jsonl"));
    report::write_report(&bundle, &report_path)?;
    Ok(bundle)
}

pub fn print_summary(bundle: &ReportBundle) {
    println!(
        "run: {:?} at t = {:.6} ({} rows) -> {}",
        bundle.termination.reason, bundle.termination.t_final, bundle.rows, bundle.series_path
    );
    if let Some(c) = &bundle.constants {
        println!(
            "constants: C* = {:.6}, B = {:.6}, A0 = {:.6}",
            c.c_star, c.b_q, c.a0
        );
    }
    if let Some(g) = &bundle.global {
        println!(
            "well condition: beta = {:.4}, I(u0) > 0: {}, applicable: {}",
            g.beta, g.i0_positive, g.applicable
        );
    }
    if let Some(f) = &bundle.fit {
        println!(
            "decay fit: K = {:.4e}, k = {:.4}, R^2 = {:.5}",
            f.k_coef, f.rate, f.r_squared
        );
    }
    if let Some(a) = &bundle.assessment {
        println!(
            "energy case: {} (E0 = {:.4e}, t0 = {:.4}, t* = {:.4})",
            a.case.name(),
            a.e0,
            a.t0,
            a.lower_t_star
        );
        for b in &a.bounds {
            match b.value {
                Some(v) => println!("  bound {} = {:.6}", b.formula, v),
                None => println!("  bound {} not applicable: {}", b.formula, b.note),
            }
        }
    }
}

pub fn exit_on_instability(bundle: &ReportBundle) -> Result<(), AppError> {
    if bundle.termination.reason == TerminationReason::Unstable {
        return Err(AppError::Instability(bundle.termination.detail.clone()));
    }
    Ok(())
}

/// Calibration table of the diffusive quadrature against the closed form
/// over the acceptance parameter box; fails (exit 4) above `tol`.
pub fn verify_quadrature(tol: f64, job: &JobConfig) -> Result<(), AppError> {
    println!("{:>6} {:>6} {:>6} {:>14} {:>14} {:>12}", "alpha", "eta", "lambda", "quadrature", "closed form", "rel err");
    let mut worst = 0.0_f64;
    let spec = GridSpec {
        calibration_tol: tol.max(1.0), // defer the verdict to this table
        ..job.run.grid_spec
    };
    for alpha in [0.3, 0.5, 0.7] {
        for eta in [0.5, 1.0] {
            let params =
                FracParams::new(alpha, eta).map_err(|e| AppError::Config(e.to_string()))?;
            let grid =
                DiffusiveGrid::build(params, &spec).map_err(|e| AppError::Config(e.to_string()))?;
            for lambda in [0.5, 1.0, 2.0] {
                let target = (eta + lambda).powf(alpha - 1.0);
                let got = grid.quad_a(lambda).map_err(|e| AppError::Config(e.to_string()))?;
                let rel = (got - target).abs() / target;
                worst = worst.max(rel);
                println!(
                    "{alpha:>6.2} {eta:>6.2} {lambda:>6.2} {got:>14.8} {target:>14.8} {rel:>12.3e}"
                );
            }
        }
    }
    println!("max relative error: {worst:.3e} (tolerance {tol:.1e})");
    if worst > tol {
        return Err(AppError::CheckFailed(format!(
            "quadrature calibration {worst:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    Ok(())
}

/// Manufactured-solution refinement study; fails (exit 4) below order 1.8.
pub fn convergence(job: &JobConfig, levels: usize) -> Result<(), AppError> {
    if levels < 2 {
        return Err(AppError::Config(format!(
            "need at least 2 refinement levels, got {levels}"
        )));
    }
    let report = convergence_study(&job.run, levels)?;
    println!("spatial refinement (error vs exact field):");
    for l in &report.spatial {
        println!("  h = {:>10.6}  err = {:.6e}", l.h, l.error);
    }
    println!(
        "  pairwise orders {:?}, least-squares order {:.3}",
        report.spatial_orders, report.spatial_order
    );
    println!("temporal refinement (successive differences):");
    for l in &report.temporal {
        println!("  dt = {:>10.6}  diff = {:.6e}", l.h, l.error);
    }
    println!(
        "  pairwise orders {:?}, least-squares order {:.3}",
        report.temporal_orders, report.temporal_order
    );
    std::fs::create_dir_all(&job.output_dir)
        .map_err(|e| AppError::Io(format!("creating {}: {e}", job.output_dir)))?;
    let path = Path::new(&job.output_dir).join("convergence.report.jsonl");
    report::write_convergence(&report, &path)?;
    if report.spatial_order < 1.8 || report.temporal_order < 1.8 {
        return Err(AppError::CheckFailed(format!(
            "measured orders (spatial {:.2}, temporal {:.2}) fall below 1.8",
            report.spatial_order, report.temporal_order
        )));
    }
    Ok(())
}

/// Run a blow-up configuration and print the full assessment, including
/// the differential-inequality residual over the final quarter.
pub fn blowup_study(job: &JobConfig, stem: &str) -> Result<(), AppError> {
    let bundle = run_job(job, stem)?;
    print_summary(&bundle);
    let assess = match &bundle.assessment {
        Some(a) if a.case != BlowupCase::NotClassified => a,
        _ => {
            println!("no admissible blow-up case; nothing further to report");
            return exit_on_instability(&bundle);
        }
    };
    if let (Some(sigma), Some(b_coef), Some(t_numeric)) =
        (assess.sigma, assess.b_coef, assess.t_numeric)
    {
        // reload the emitted series for the residual trace
        let text = std::fs::read_to_string(&bundle.series_path)?;
        let series = fracwave::series::FunctionalSeries::parse_csv(&text)
            .map_err(|e| AppError::Config(e.to_string()))?;
        if let Ok(js) = j_series(&series, &job.run, t_numeric) {
            let res = blowup_inequality_residual(&js, sigma, b_coef, assess.gamma1);
            let quarter = t_numeric - 0.25 * (t_numeric - assess.t0);
            let min_res = js
                .ts
                .iter()
                .zip(&res)
                .filter(|(t, _)| **t >= quarter)
                .map(|(_, r)| *r)
                .fold(f64::INFINITY, f64::min);
            println!(
                "differential-inequality residual over the final quarter: min {min_res:.4e} (sigma = {sigma:.4e}, b = {b_coef:.4e})"
            );
        }
    }
    exit_on_instability(&bundle)
}
