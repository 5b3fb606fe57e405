//! The full eighteen-atom decomposition on the redundancy lattice.
//!
//! The coarse parts already provide seven atoms (the three pair-shared
//! parts, the three singleton-with-pair parts follow from the unique
//! parts, and the all-shared part). The eight synergy atoms are carved
//! out of `CI` by decomposing grouped two-source subsystems:
//!
//! * the top atom is the gap between `MI(T;X,Y,Z)` and its minimum over
//!   distributions pinned on all three joint pair marginals;
//! * synergy visible to two overlapping coalitions (e.g. the `YZ` atom)
//!   is the two-source synergy of the corresponding coalition pair minus
//!   the top atom;
//! * synergy shared between sibling coalitions (e.g. `XZ.YZ`) comes from
//!   coalition-versus-singleton splits;
//! * the bottom synergy atom absorbs the remainder of `CI`.
//!
//! Unique singles (e.g. the `Z` atom) are the unique part of the
//! singleton in the same coalition-versus-singleton split.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bivariate::broja;
use crate::dist::{JointDistribution, MarginalSpec};
use crate::info::mutual_information;
use crate::lattice::{accumulate, Collection};
use crate::pipeline::PidResult;
use crate::solver::{build_program, solve, SolveStatus, Tolerances};
use crate::{Error, Result};

/// Values for all eighteen lattice atoms of a three-source decomposition.
#[derive(Debug, Clone)]
pub struct FineAtoms {
    values: BTreeMap<Collection, f64>,
}

impl FineAtoms {
    pub fn get(&self, at: &Collection) -> Result<f64> {
        self.values
            .get(at)
            .copied()
            .ok_or_else(|| Error::MissingAtom(at.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Collection, f64)> {
        self.values.iter().map(|(c, &v)| (c, v))
    }

    pub fn as_map(&self) -> &BTreeMap<Collection, f64> {
        &self.values
    }

    /// Sum of atoms at or below `at` in the redundancy order.
    pub fn cumulative(&self, at: &Collection) -> Result<f64> {
        accumulate(&self.values, at)
    }
}

enum Job {
    /// Minimize `MI(T;X,Y,Z)` pinning all three joint pair marginals.
    PairPinned,
    /// Two-source decomposition after grouping sources into two parts.
    Grouped(Vec<usize>, Vec<usize>),
}

fn run_job(d: &JointDistribution, tols: &Tolerances, job: &Job) -> Result<(f64, f64)> {
    match job {
        Job::PairPinned => {
            let spec =
                MarginalSpec::from_dist(d, &[vec![1, 2], vec![1, 3], vec![2, 3]])?;
            let program = build_program(d, &spec, &[1, 2, 3])?;
            let report = solve(&program, tols)?;
            if report.status == SolveStatus::Failed {
                return Err(Error::SolverFailed(format!(
                    "pair-pinned minimization: pres {:.3e} dres {:.3e} gap {:.3e}",
                    report.pres, report.dres, report.gap
                )));
            }
            Ok((report.mi_bits, 0.0))
        }
        Job::Grouped(a, b) => {
            let grouped = d.group_sources(&[a.clone(), b.clone()])?;
            let r = broja(&grouped, tols)?;
            Ok((r.ci, r.ui_second))
        }
    }
}

/// Refine a coarse decomposition of `d` into all eighteen atoms.
pub fn fine_decompose(
    d: &JointDistribution,
    coarse: &PidResult,
    tols: &Tolerances,
    parallel: bool,
) -> Result<FineAtoms> {
    if d.arity() != 3 {
        return Err(Error::ArityMismatch { expected: 3, got: d.arity() });
    }
    let jobs = [
        Job::PairPinned,
        Job::Grouped(vec![1, 2], vec![1, 3]),
        Job::Grouped(vec![1, 2], vec![2, 3]),
        Job::Grouped(vec![1, 3], vec![2, 3]),
        Job::Grouped(vec![1, 2], vec![3]),
        Job::Grouped(vec![1, 3], vec![2]),
        Job::Grouped(vec![2, 3], vec![1]),
    ];
    let outs: Vec<(f64, f64)> = if parallel {
        jobs.par_iter().map(|j| run_job(d, tols, j)).collect::<Result<_>>()?
    } else {
        jobs.iter().map(|j| run_job(d, tols, j)).collect::<Result<_>>()?
    };

    let d_xyz = coarse.mi - outs[0].0;
    let d_yz = outs[1].0 - d_xyz;
    let d_xz = outs[2].0 - d_xyz;
    let d_xy = outs[3].0 - d_xyz;
    let d_xz_yz = outs[4].0 - d_xyz - d_xz - d_yz;
    let d_xy_yz = outs[5].0 - d_xyz - d_xy - d_yz;
    let d_xy_xz = outs[6].0 - d_xyz - d_xy - d_xz;
    let d_xy_xz_yz =
        coarse.ci - (d_xyz + d_xy + d_xz + d_yz + d_xy_xz + d_xy_yz + d_xz_yz);
    let (d_z, d_y, d_x) = (outs[4].1, outs[5].1, outs[6].1);

    let c = |sets: &[&[usize]]| Collection::from_sets(3, sets);
    let mut values = BTreeMap::new();
    let mut put = |sets: &[&[usize]], v: f64| -> Result<()> {
        values.insert(c(sets)?, v);
        Ok(())
    };
    put(&[&[1, 2, 3]], d_xyz)?;
    put(&[&[1, 2]], d_xy)?;
    put(&[&[1, 3]], d_xz)?;
    put(&[&[2, 3]], d_yz)?;
    put(&[&[1, 2], &[1, 3]], d_xy_xz)?;
    put(&[&[1, 2], &[2, 3]], d_xy_yz)?;
    put(&[&[1, 3], &[2, 3]], d_xz_yz)?;
    put(&[&[1, 2], &[1, 3], &[2, 3]], d_xy_xz_yz)?;
    put(&[&[1]], d_x)?;
    put(&[&[2]], d_y)?;
    put(&[&[3]], d_z)?;
    put(&[&[1], &[2, 3]], coarse.ui_x - d_x)?;
    put(&[&[2], &[1, 3]], coarse.ui_y - d_y)?;
    put(&[&[3], &[1, 2]], coarse.ui_z - d_z)?;
    put(&[&[1], &[2]], coarse.ui_xy)?;
    put(&[&[1], &[3]], coarse.ui_xz)?;
    put(&[&[2], &[3]], coarse.ui_yz)?;
    put(&[&[1], &[2], &[3]], coarse.si)?;
    Ok(FineAtoms { values })
}

/// Residuals between cumulative atom sums and the directly measured
/// mutual informations, for every single- and multi-source collection.
pub fn consistency_report(
    d: &JointDistribution,
    fine: &FineAtoms,
) -> Result<Vec<(Collection, f64)>> {
    let checks: [(&[&[usize]], &[usize]); 7] = [
        (&[&[1, 2, 3]], &[1, 2, 3]),
        (&[&[1, 2]], &[1, 2]),
        (&[&[1, 3]], &[1, 3]),
        (&[&[2, 3]], &[2, 3]),
        (&[&[1]], &[1]),
        (&[&[2]], &[2]),
        (&[&[3]], &[3]),
    ];
    let mut out = Vec::with_capacity(checks.len());
    for (sets, vars) in checks {
        let at = Collection::from_sets(3, sets)?;
        let cum = fine.cumulative(&at)?;
        let mi = mutual_information(d, &[0], vars)?;
        out.push((at, cum - mi));
    }
    Ok(out)
}
