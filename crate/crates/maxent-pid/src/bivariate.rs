//! Two-source decomposition via mutual-information minimization.
//!
//! Splits `MI(T; A, B)` into shared, unique and complementary parts:
//! with `m = min MI_Q(T; A, B)` over distributions matching the `(T,A)`
//! and `(T,B)` marginals,
//! `CI = MI(T;A,B) - m`, `UI_A = m - MI(T;B)`, `UI_B = m - MI(T;A)`,
//! `SI = MI(T;A) + MI(T;B) - m`.

use crate::dist::{JointDistribution, MarginalSpec};
use crate::info::mutual_information;
use crate::solver::{build_program, solve, SolveReport, SolveStatus, Tolerances};
use crate::{Error, Result};

/// Result of a two-source decomposition. `first` refers to source 1,
/// `second` to source 2 of the input distribution.
#[derive(Debug, Clone)]
pub struct BivariatePid {
    pub si: f64,
    pub ui_first: f64,
    pub ui_second: f64,
    pub ci: f64,
    /// Total `MI(T; A, B)` of the input.
    pub mi: f64,
    /// Minimized `MI_Q(T; A, B)`.
    pub min_mi: f64,
    pub report: SolveReport,
}

/// Decompose a two-source distribution. Fails with `SolverFailed` when
/// the cone solve cannot certify even the relaxed tolerances.
pub fn broja(d: &JointDistribution, tols: &Tolerances) -> Result<BivariatePid> {
    if d.arity() != 2 {
        return Err(Error::ArityMismatch { expected: 2, got: d.arity() });
    }
    let spec = MarginalSpec::pairwise(d)?;
    let program = build_program(d, &spec, &[1, 2])?;
    let report = solve(&program, tols)?;
    if report.status == SolveStatus::Failed {
        return Err(Error::SolverFailed(format!(
            "two-source minimization: pres {:.3e} dres {:.3e} gap {:.3e} after {} iterations",
            report.pres, report.dres, report.gap, report.iterations
        )));
    }
    let mi = mutual_information(d, &[0], &[1, 2])?;
    let mi_a = mutual_information(d, &[0], &[1])?;
    let mi_b = mutual_information(d, &[0], &[2])?;
    let min_mi = report.mi_bits;
    Ok(BivariatePid {
        si: mi_a + mi_b - min_mi,
        ui_first: min_mi - mi_b,
        ui_second: min_mi - mi_a,
        ci: mi - min_mi,
        mi,
        min_mi,
        report,
    })
}
