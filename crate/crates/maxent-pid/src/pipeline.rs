//! The three-source decomposition pipeline.
//!
//! Four cone programs over the same polytope (pinned `(T,X)`, `(T,Y)`,
//! `(T,Z)` marginals) minimize `MI(T;X,Y,Z)` and the three pairwise
//! `MI(T;Xi,Xj)`. The eight coarse parts follow from linear identities:
//! synergy is the gap between total and minimized full information, each
//! unique part is the gap between the full minimum and the opposite-pair
//! minimum, and the shared/redundant-unique parts solve the remaining
//! linear system. A final equality-constrained least-squares repair
//! projects the parts onto exact consistency with the measured mutual
//! informations.

use std::io::Write;

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;

use crate::dist::{JointDistribution, MarginalSpec};
use crate::info::mutual_information;
use crate::solver::{
    build_program, marginal_violations, solve, SolveReport, SolveStatus, Tolerances,
};
use crate::{Error, Result};

/// Labels for the four minimization subproblems, in report order.
pub const PROBLEM_LABELS: [&str; 4] = ["XYZ", "XY", "XZ", "YZ"];

/// Worst pinned-marginal violation of one subproblem's optimizer.
#[derive(Debug, Clone)]
pub struct Violation {
    pub problem: &'static str,
    /// Pinned source group (1-based indices).
    pub group: Vec<usize>,
    pub max_abs: f64,
}

/// The eight coarse parts plus solve certificates.
#[derive(Debug, Clone)]
pub struct PidResult {
    pub ci: f64,
    pub ui_x: f64,
    pub ui_y: f64,
    pub ui_z: f64,
    pub ui_xy: f64,
    pub ui_xz: f64,
    pub ui_yz: f64,
    pub si: f64,
    /// `MI(T;X,Y,Z)` of the input, in bits.
    pub mi: f64,
    pub mi_x: f64,
    pub mi_y: f64,
    pub mi_z: f64,
    /// Parts as derived from the minimized values, before any
    /// least-squares consistency repair, in [`PidResult::parts`] order.
    pub raw_parts: [f64; 8],
    /// Whether the repair projection was applied (it triggers only when
    /// some certificate exceeds the relaxed tolerances).
    pub repaired: bool,
    /// Worst verdict over the four subproblems.
    pub status: SolveStatus,
    /// Wall-clock seconds spent in the build / solve / derive phases.
    pub phase_secs: [f64; 3],
    /// Certificates in [`PROBLEM_LABELS`] order.
    pub reports: [SolveReport; 4],
    pub violations: Vec<Violation>,
    /// Support sizes of the four programs.
    pub n_atoms: [usize; 4],
}

impl PidResult {
    /// Parts in canonical order `[CI, UIX, UIY, UIZ, UIXY, UIXZ, UIYZ, SI]`.
    pub fn parts(&self) -> [f64; 8] {
        [
            self.ci, self.ui_x, self.ui_y, self.ui_z, self.ui_xy, self.ui_xz, self.ui_yz,
            self.si,
        ]
    }

    /// `[pres, dres, gap]` of subproblem `k` (see [`PROBLEM_LABELS`]).
    pub fn num_err(&self, k: usize) -> [f64; 3] {
        let r = &self.reports[k];
        [r.pres, r.dres, r.gap]
    }
}

/// Decompose a three-source distribution. With `parallel` the four cone
/// programs are built and solved on a rayon pool; results are
/// bit-identical to the sequential path because every subproblem is
/// independent and reassembled in a fixed order.
pub fn pid(d: &JointDistribution, tols: &Tolerances, parallel: bool) -> Result<PidResult> {
    if d.arity() != 3 {
        return Err(Error::ArityMismatch { expected: 3, got: d.arity() });
    }
    tols.validate()?;
    let spec = MarginalSpec::pairwise(d)?;
    let objectives: [&[usize]; 4] = [&[1, 2, 3], &[1, 2], &[1, 3], &[2, 3]];

    let t_build = std::time::Instant::now();
    let build = |obj: &&[usize]| build_program(d, &spec, obj);
    let programs: Vec<_> = if parallel {
        objectives.par_iter().map(build).collect::<Result<_>>()?
    } else {
        objectives.iter().map(build).collect::<Result<_>>()?
    };
    let build_secs = t_build.elapsed().as_secs_f64();

    let t_solve = std::time::Instant::now();
    let run = |p: &crate::solver::ConeProgram| solve(p, tols);
    let reports: Vec<SolveReport> = if parallel {
        programs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        programs.iter().map(run).collect::<Result<_>>()?
    };
    let solve_secs = t_solve.elapsed().as_secs_f64();

    let t_derive = std::time::Instant::now();
    let status = reports
        .iter()
        .map(|r| r.status)
        .max_by_key(|s| match s {
            SolveStatus::Optimal => 0,
            SolveStatus::Inaccurate => 1,
            SolveStatus::Failed => 2,
        })
        .unwrap();

    let mut viols = Vec::new();
    for (k, (p, r)) in programs.iter().zip(reports.iter()).enumerate() {
        for (g, v) in spec.groups().iter().zip(marginal_violations(p, &r.q)) {
            viols.push(Violation {
                problem: PROBLEM_LABELS[k],
                group: g.clone(),
                max_abs: v,
            });
        }
    }

    let mi = mutual_information(d, &[0], &[1, 2, 3])?;
    let mi_x = mutual_information(d, &[0], &[1])?;
    let mi_y = mutual_information(d, &[0], &[2])?;
    let mi_z = mutual_information(d, &[0], &[3])?;
    let (m_full, m_xy, m_xz, m_yz) = (
        reports[0].mi_bits,
        reports[1].mi_bits,
        reports[2].mi_bits,
        reports[3].mi_bits,
    );

    let ci = mi - m_full;
    let ui_x = m_full - m_yz;
    let ui_y = m_full - m_xz;
    let ui_z = m_full - m_xy;
    let r1 = mi_x - ui_x;
    let r2 = mi_y - ui_y;
    let r3 = mi_z - ui_z;
    let rt = mi - ci - ui_x - ui_y - ui_z;
    let si = r1 + r2 + r3 - 2.0 * rt;
    let ui_yz = rt - r1;
    let ui_xz = rt - r2;
    let ui_xy = rt - r3;

    let raw_parts = [ci, ui_x, ui_y, ui_z, ui_xy, ui_xz, ui_yz, si];
    // repair only when some certificate left the relaxed tolerance band
    let repaired = status == SolveStatus::Failed;
    let [ci, ui_x, ui_y, ui_z, ui_xy, ui_xz, ui_yz, si] = if repaired {
        qp_repair(&raw_parts, &[mi, mi_x, mi_y, mi_z])
    } else {
        raw_parts
    };

    let n_atoms = [
        programs[0].n_atoms(),
        programs[1].n_atoms(),
        programs[2].n_atoms(),
        programs[3].n_atoms(),
    ];
    let reports: [SolveReport; 4] = reports.try_into().expect("four reports");
    let derive_secs = t_derive.elapsed().as_secs_f64();
    Ok(PidResult {
        ci,
        ui_x,
        ui_y,
        ui_z,
        ui_xy,
        ui_xz,
        ui_yz,
        si,
        mi,
        mi_x,
        mi_y,
        mi_z,
        raw_parts,
        repaired,
        status,
        phase_secs: [build_secs, solve_secs, derive_secs],
        reports,
        violations: viols,
        n_atoms,
    })
}

/// Project parts `[CI, UIX, UIY, UIZ, UIXY, UIXZ, UIYZ, SI]` onto the
/// consistency constraints (Euclidean, minimum-norm correction):
/// the eight parts sum to `MI(T;X,Y,Z)` and each source's four-part sum
/// equals its `MI(T;Xi)`. `targets = [MI, MI_X, MI_Y, MI_Z]`.
pub fn qp_repair(parts: &[f64; 8], targets: &[f64; 4]) -> [f64; 8] {
    // constraint rows over the part vector
    const ROWS: [[f64; 8]; 4] = [
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0],
    ];
    let residual = Vector4::from_fn(|r, _| {
        ROWS[r].iter().zip(parts.iter()).map(|(a, v)| a * v).sum::<f64>() - targets[r]
    });
    // E * E^T for the rows above
    let gram = Matrix4::new(
        8.0, 4.0, 4.0, 4.0, //
        4.0, 4.0, 2.0, 2.0, //
        4.0, 2.0, 4.0, 2.0, //
        4.0, 2.0, 2.0, 4.0,
    );
    let lambda = gram.lu().solve(&residual).expect("gram matrix is invertible");
    let mut out = *parts;
    for (i, v) in out.iter_mut().enumerate() {
        let corr: f64 = (0..4).map(|r| ROWS[r][i] * lambda[r]).sum();
        *v -= corr;
    }
    out
}

/// Render a finished decomposition at verbosity `level`: 0 prints the
/// eight values only, 1 adds phase timings and brief solver statistics,
/// 2 adds per-subproblem detail, 3 adds the certificate table.
pub fn run_modes<W: Write>(res: &PidResult, level: u8, out: &mut W) -> Result<()> {
    if level > 3 {
        return Err(Error::BadLevel(level));
    }
    for (label, v) in [
        ("Synergistic information CI", res.ci),
        ("Unique information UIX", res.ui_x),
        ("Unique information UIY", res.ui_y),
        ("Unique information UIZ", res.ui_z),
        ("Redundant-unique information UIXY", res.ui_xy),
        ("Redundant-unique information UIXZ", res.ui_xz),
        ("Redundant-unique information UIYZ", res.ui_yz),
        ("Shared information SI", res.si),
    ] {
        writeln!(out, "{label}: {v}")?;
    }
    if level >= 1 {
        writeln!(
            out,
            "status {:?}{}  MI {:.9} bits  build {:.3}s solve {:.3}s derive {:.3}s",
            res.status,
            if res.repaired { " (repaired)" } else { "" },
            res.mi,
            res.phase_secs[0],
            res.phase_secs[1],
            res.phase_secs[2]
        )?;
        let worst_gap = res.reports.iter().map(|r| r.gap).fold(0.0, f64::max);
        let worst_pres = res.reports.iter().map(|r| r.pres).fold(0.0, f64::max);
        writeln!(out, "worst gap {worst_gap:.3e}  worst pres {worst_pres:.3e}")?;
    }
    if level >= 2 {
        for (k, label) in PROBLEM_LABELS.iter().enumerate() {
            let r = &res.reports[k];
            writeln!(
                out,
                "min MI(T;{label}): {:.9} bits, {} atoms, {} iterations{}",
                r.mi_bits,
                res.n_atoms[k],
                r.iterations,
                if r.presolved { " (presolved)" } else { "" }
            )?;
        }
        let worst = res
            .violations
            .iter()
            .map(|v| v.max_abs)
            .fold(0.0, f64::max);
        writeln!(out, "worst marginal violation {worst:.3e}")?;
    }
    if level >= 3 {
        // final certificate per subproblem; the backend keeps no
        // per-iteration history to replay here
        writeln!(out, "problem  pcost dcost gap pres dres")?;
        for (k, label) in PROBLEM_LABELS.iter().enumerate() {
            let r = &res.reports[k];
            writeln!(
                out,
                "{label:<8} {:>13.6e} {:>13.6e} {:>10.3e} {:>10.3e} {:>10.3e}",
                r.obj_nats, r.obj_nats_dual, r.gap, r.pres, r.dres
            )?;
        }
    }
    Ok(())
}
