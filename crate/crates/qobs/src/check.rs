use std::fmt::Write as _;
use std::path::Path;

use qobs_core::{min_vacuum_rank, skew_riccati_transform, stilde, Mat, QuantumLinearSystem};

use crate::error::Result;
use crate::format::load_system;

/// Residual norm at or below which a system counts as physically realizable.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub residual_norm: f64,
    pub s_tilde: Mat,
    pub n_v2: usize,
    /// `Ok(())` when the skew Riccati transformation exists.
    pub transform: std::result::Result<(), String>,
}

impl CheckReport {
    pub fn passes(&self) -> bool {
        self.residual_norm <= RESIDUAL_TOL
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "commutation residual: {:e}", self.residual_norm).unwrap();
        writeln!(
            out,
            "physically realizable: {}",
            if self.passes() { "yes" } else { "no" }
        )
        .unwrap();
        writeln!(out, "S_tilde:").unwrap();
        for r in self.s_tilde.row_iter() {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:>14.6e}")).collect();
            writeln!(out, "  {}", cells.join(" ")).unwrap();
        }
        writeln!(out, "minimal n_v2: {}", self.n_v2).unwrap();
        match &self.transform {
            Ok(()) => writeln!(out, "state transformation: exists (n_v2 = 0 possible)").unwrap(),
            Err(e) => writeln!(out, "state transformation: unavailable ({e})").unwrap(),
        }
        out
    }
}

pub fn check(sys: &QuantumLinearSystem) -> CheckReport {
    let s_tilde = stilde(sys.a(), sys.b(), sys.c(), sys.theta());
    let n_v2 = min_vacuum_rank(&s_tilde);
    let transform = skew_riccati_transform(sys.a(), sys.b(), sys.c(), sys.theta())
        .map(|_| ())
        .map_err(|e| e.to_string());
    CheckReport {
        residual_norm: sys.commutation_residual().norm(),
        s_tilde,
        n_v2,
        transform,
    }
}

pub fn check_system(path: &Path) -> Result<CheckReport> {
    Ok(check(&load_system(path)?))
}
