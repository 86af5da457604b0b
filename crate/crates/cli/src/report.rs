//! JSON-lines report emission: one record per diagnostics artifact, each
//! tagged with a `paper_ref` naming the identity it realizes.

use crate::AppError;
use fracwave::diagnostics::{BlowupAssessment, DecayFit, DomainConstants, GlobalCheck, LyapunovParams};
use fracwave::mms::ConvergenceReport;
use fracwave::wavesolver::Termination;
use serde_json::json;
use std::io::Write;
use std::path::Path;

pub struct ReportBundle {
    pub series_path: String,
    pub rows: usize,
    pub constants: Option<DomainConstants>,
    pub global: Option<GlobalCheck>,
    pub lyap: Option<LyapunovParams>,
    pub fit: Option<DecayFit>,
    pub assessment: Option<BlowupAssessment>,
    pub termination: Termination,
}

pub fn write_report(bundle: &ReportBundle, path: &Path) -> Result<(), AppError> {
    let mut records: Vec<serde_json::Value> = Vec::new();
    records.push(json!({
        "kind": "series",
        "path": bundle.series_path,
        "rows": bundle.rows,
        "paper_ref": "(3.1), (5.2), (5.3)",
    }));
    records.push(json!({
        "kind": "termination",
        "reason": format!("{:?}", bundle.termination.reason),
        "t_final": bundle.termination.t_final,
        "detail": bundle.termination.detail,
        "paper_ref": "(2.15)",
    }));
    if let Some(c) = &bundle.constants {
        records.push(json!({
            "kind": "constants",
            "C_star": c.c_star,
            "B_q": c.b_q,
            "A0": c.a0,
            "paper_ref": "Lemma 1, Lemma 2, (4.12)",
        }));
    }
    if let Some(g) = &bundle.global {
        records.push(json!({
            "kind": "global_check",
            "E0": g.e0,
            "beta": if g.beta.is_nan() { serde_json::Value::Null } else { json!(g.beta) },
            "I0_positive": g.i0_positive,
            "applicable": g.applicable,
            "paper_ref": "(3.5)",
        }));
    }
    if let Some(p) = &bundle.lyap {
        records.push(json!({
            "kind": "lyapunov_params",
            "eps1": p.eps1,
            "eps2": p.eps2,
            "N": p.n_coef,
            "delta": p.delta,
            "alpha1": p.alpha1,
            "alpha2": p.alpha2,
            "M": p.decay.map(|d| d.m_rate),
            "paper_ref": "(4.1), (4.5)",
        }));
    }
    if let Some(f) = &bundle.fit {
        records.push(json!({
            "kind": "decay_fit",
            "K": f.k_coef,
            "k": f.rate,
            "r_squared": f.r_squared,
            "samples": f.samples,
            "paper_ref": "(4.17)",
        }));
    }
    if let Some(a) = &bundle.assessment {
        records.push(json!({
            "kind": "blowup_assessment",
            "case": a.case.name(),
            "t0": a.t0,
            "t_star": a.lower_t_star,
            "gamma1": a.gamma1,
            "sigma": a.sigma,
            "b": a.b_coef,
            "J0": a.j0,
            "T_numeric": a.t_numeric,
            "E0": a.e0,
            "F_prime0": a.f_prime0,
            "paper_ref": "Lemma 12, (5.23), (5.54)",
        }));
        for b in &a.bounds {
            records.push(json!({
                "kind": "blowup_bound",
                "formula": b.formula,
                "value": b.value,
                "note": b.note,
                "paper_ref": b.formula,
            }));
        }
    }

    let file = std::fs::File::create(path)
        .map_err(|e| AppError::Io(format!("creating {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        writeln!(w, "{r}").map_err(|e| AppError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn write_convergence(report: &ConvergenceReport, path: &Path) -> Result<(), AppError> {
    let file = std::fs::File::create(path)
        .map_err(|e| AppError::Io(format!("creating {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let rec = json!({
        "kind": "convergence",
        "spatial": report.spatial.iter().map(|l| json!({"h": l.h, "error": l.error})).collect::<Vec<_>>(),
        "spatial_order": report.spatial_order,
        "temporal": report.temporal.iter().map(|l| json!({"dt": l.h, "diff": l.error})).collect::<Vec<_>>(),
        "temporal_order": report.temporal_order,
        "paper_ref": "(2.21)",
    });
    writeln!(w, "{rec}").map_err(|e| AppError::Io(e.to_string()))?;
    Ok(())
}
