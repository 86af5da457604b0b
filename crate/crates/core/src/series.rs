//! Per-step trajectory functionals and their CSV form.

use crate::config::RunConfig;
use crate::diagnostics::{self, Snapshot};
use crate::error::ConfigError;
use std::io::{self, Write};

/// Exact CSV header, one column per emitted functional.
pub const CSV_HEADER: &str =
    "t,E,I,J,Lyap,F,H,u_l2sq,grad_l2sq,u_lp_p,ut_l2sq,g_circ,phi_energy,O_boundary,dEdt_residual";

/// One diagnostics row.  The first block mirrors the CSV schema; the fields
/// after it are retained for downstream checks but never serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub e: f64,
    pub i_func: f64,
    pub j_func: f64,
    /// Filled by `diagnostics::attach_lyapunov`; NaN until then.
    pub lyap: f64,
    pub f_func: f64,
    pub h_func: f64,
    pub u_l2sq: f64,
    pub grad_l2sq: f64,
    pub u_lp_p: f64,
    pub ut_l2sq: f64,
    pub g_circ: f64,
    /// Boundary dissipation density `int (xi^2+eta) |phi|^2 dxi`.
    pub phi_energy: f64,
    pub o_boundary: f64,
    /// Backward-looking residual of the energy balance; 0 on the first row.
    pub dedt_residual: f64,

    // -- not serialized --
    pub psi1: f64,
    pub psi2: f64,
    pub phi_l2sq: f64,
    pub int_ut_l2sq: f64,
    pub int_u_l2sq: f64,
    pub int_phi_diss: f64,
    pub u_boundary: f64,
    pub kernel_mass: f64,
}

impl Row {
    pub fn from_snapshot(s: &Snapshot, cfg: &RunConfig) -> Self {
        Row {
            t: s.t,
            e: diagnostics::energy(s, cfg),
            i_func: diagnostics::functional_i(s, cfg),
            j_func: diagnostics::functional_j(s, cfg),
            lyap: f64::NAN,
            f_func: diagnostics::functional_f(s, cfg),
            h_func: s.h_accum,
            u_l2sq: s.u_l2sq,
            grad_l2sq: s.grad_l2sq,
            u_lp_p: s.u_lp_p,
            ut_l2sq: s.ut_l2sq,
            g_circ: s.g_circ,
            phi_energy: s.phi_diss,
            o_boundary: s.o_boundary,
            dedt_residual: 0.0,
            psi1: s.psi1,
            psi2: s.psi2,
            phi_l2sq: s.phi_l2sq,
            int_ut_l2sq: s.int_ut_l2sq,
            int_u_l2sq: s.int_u_l2sq,
            int_phi_diss: s.int_phi_diss,
            u_boundary: s.u_boundary,
            kernel_mass: s.kernel_mass,
        }
    }

    fn csv_fields(&self) -> [f64; 15] {
        [
            self.t,
            self.e,
            self.i_func,
            self.j_func,
            self.lyap,
            self.f_func,
            self.h_func,
            self.u_l2sq,
            self.grad_l2sq,
            self.u_lp_p,
            self.ut_l2sq,
            self.g_circ,
            self.phi_energy,
            self.o_boundary,
            self.dedt_residual,
        ]
    }
}

/// Time series of diagnostics rows emitted by a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionalSeries {
    rows: Vec<Row>,
}

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl FunctionalSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Row] {
        &mut self.rows
    }

    /// Deterministic CSV emission: 17 significant digits, `.` separator,
    /// `\n` line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(CSV_HEADER.as_bytes())?;
        w.write_all(b"\n")?;
        let mut line = String::with_capacity(24 * 15);
        for row in &self.rows {
            line.clear();
            for (i, v) in row.csv_fields().iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format_float(*v));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Parse a CSV produced by [`FunctionalSeries::write_csv`].  The
    /// non-serialized fields come back zeroed.
    pub fn parse_csv(text: &str) -> Result<Self, ConfigError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| ConfigError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        if header.trim() != CSV_HEADER {
            return Err(ConfigError::Parse {
                line: 1,
                msg: format!("unexpected header {header:?}"),
            });
        }
        let mut series = FunctionalSeries::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| ConfigError::Parse {
                line: idx + 1,
                msg: format!("bad float: {e}"),
            })?;
            if vals.len() != 15 {
                return Err(ConfigError::Parse {
                    line: idx + 1,
                    msg: format!("expected 15 fields, got {}", vals.len()),
                });
            }
            series.push(Row {
                t: vals[0],
                e: vals[1],
                i_func: vals[2],
                j_func: vals[3],
                lyap: vals[4],
                f_func: vals[5],
                h_func: vals[6],
                u_l2sq: vals[7],
                grad_l2sq: vals[8],
                u_lp_p: vals[9],
                ut_l2sq: vals[10],
                g_circ: vals[11],
                phi_energy: vals[12],
                o_boundary: vals[13],
                dedt_residual: vals[14],
                psi1: 0.0,
                psi2: 0.0,
                phi_l2sq: 0.0,
                int_ut_l2sq: 0.0,
                int_u_l2sq: 0.0,
                int_phi_diss: 0.0,
                u_boundary: 0.0,
                kernel_mass: 0.0,
            });
        }
        Ok(series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy_row(t: f64) -> Row {
        Row {
            t,
            e: 1.0 / 3.0,
            i_func: -2.5e-7,
            j_func: 0.125,
            lyap: f64::NAN,
            f_func: 7.0,
            h_func: 0.0,
            u_l2sq: 1e300,
            grad_l2sq: 1e-300,
            u_lp_p: 0.1 + t,
            ut_l2sq: 2.0,
            g_circ: 3.0,
            phi_energy: 4.0,
            o_boundary: -5.0,
            dedt_residual: 6.0,
            psi1: 0.0,
            psi2: 0.0,
            phi_l2sq: 0.0,
            int_ut_l2sq: 0.0,
            int_u_l2sq: 0.0,
            int_phi_diss: 0.0,
            u_boundary: 0.0,
            kernel_mass: 0.0,
        }
    }

    #[test]
    fn header_only_when_empty() {
        let s = FunctionalSeries::new();
        assert_eq!(s.to_csv_string(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn three_rows_make_four_lines() {
        let mut s = FunctionalSeries::new();
        for i in 0..3 {
            s.push(dummy_row(i as f64));
        }
        assert_eq!(s.to_csv_string().lines().count(), 4);
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let mut s = FunctionalSeries::new();
        for i in 0..5 {
            s.push(dummy_row(0.1 * i as f64 + std::f64::consts::PI));
        }
        let text = s.to_csv_string();
        let parsed = FunctionalSeries::parse_csv(&text).unwrap();
        assert_eq!(parsed.to_csv_string(), text);
        for (a, b) in s.rows().iter().zip(parsed.rows()) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.e.to_bits(), b.e.to_bits());
            assert_eq!(a.u_l2sq.to_bits(), b.u_l2sq.to_bits());
            assert_eq!(a.grad_l2sq.to_bits(), b.grad_l2sq.to_bits());
        }
    }
}
