//! Exponential-cone programs for mutual-information minimization.
//!
//! Given a reference distribution `P`, a set of pinned target-source
//! marginals and an objective group `G` of sources, we minimize
//! `MI_Q(T; G)` over all `Q` matching the pinned marginals. Since every
//! pinned group contains the target, `H(T)` is constant on the polytope
//! and the problem is equivalent to maximizing the concave `H_Q(T | G)`,
//! whose hypograph is exponential-cone representable: per conditioning
//! cell `(t, g)` the scalar inequality `r <= m ln(w / m)` is the cone
//! membership `(r, m, w) in Kexp` with `m` the cell mass and `w` the
//! `G`-marginal mass of the cell.
//!
//! Two presolve shortcuts avoid the interior-point solver entirely:
//! * if every support atom is the unique atom of some pinned cell the
//!   polytope is the single point `{P}`;
//! * if the objective group coincides with a pinned group the objective
//!   is constant on the polytope.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::*,
};

use crate::dist::{JointDistribution, MarginalSpec};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Stopping and classification tolerances. The strict triple gates the
/// `Optimal` verdict, the `_inacc` triple gates `Inaccurate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub feastol_inacc: f64,
    pub abstol_inacc: f64,
    pub reltol_inacc: f64,
    pub max_iter: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feastol: 1e-7,
            abstol: 1e-6,
            reltol: 1e-6,
            feastol_inacc: 1e-3,
            abstol_inacc: 1e-4,
            reltol_inacc: 1e-4,
            max_iter: 100,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let strict = [self.feastol, self.abstol, self.reltol];
        let relaxed = [self.feastol_inacc, self.abstol_inacc, self.reltol_inacc];
        for t in strict.iter().chain(relaxed.iter()) {
            if !t.is_finite() || *t <= 0.0 {
                return Err(Error::BadTolerances(format!("tolerance {t} must be positive")));
            }
        }
        for (s, r) in strict.iter().zip(relaxed.iter()) {
            if r < s {
                return Err(Error::BadTolerances(
                    "relaxed (_inacc) tolerances must not be tighter than strict ones".into(),
                ));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::BadTolerances("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Verdict of a single cone solve, classified from the returned
/// certificate residuals rather than the backend's own status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Inaccurate,
    Failed,
}

/// Certificate and optimizer of one mutual-information minimization.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Minimized mutual information `MI(T;G)` in bits.
    pub mi_bits: f64,
    /// Raw cone objective `-H(T|G)` in nats.
    pub obj_nats: f64,
    /// Dual objective in nats (equals `obj_nats` for presolved answers).
    pub obj_nats_dual: f64,
    /// Primal residual of the returned point.
    pub pres: f64,
    /// Dual residual.
    pub dres: f64,
    /// Absolute duality gap in nats.
    pub gap: f64,
    pub iterations: u32,
    /// Whether a presolve shortcut produced the answer exactly.
    pub presolved: bool,
    /// Optimizer masses over the program's support atoms.
    pub q: Vec<f64>,
}

/// A built (but unsolved) minimization instance.
#[derive(Debug, Clone)]
pub struct ConeProgram {
    dist: JointDistribution,
    /// Full product-space atoms on which all pinned marginals are positive.
    support: Vec<Vec<u32>>,
    /// Pinned groups with their table cells; per row: atoms it covers.
    eq_rows: Vec<Vec<usize>>,
    eq_rhs: Vec<f64>,
    /// Group boundaries into `eq_rows` (one span per pinned group).
    group_spans: Vec<(usize, usize)>,
    /// Objective group (sorted source indices).
    obj_group: Vec<usize>,
    /// Per-atom conditioning cell `(t, g)` index and `g`-only index.
    atom_cell: Vec<usize>,
    atom_wcell: Vec<usize>,
    n_cells: usize,
    n_wcells: usize,
    /// True when atoms and cells are in bijection (no `m` variables).
    bijective: bool,
    h_t_bits: f64,
    /// Exact optimizer known before solving, if any.
    shortcut: Option<Vec<f64>>,
}

/// Build the minimization of `MI_Q(T; objective_group)` over the polytope
/// of distributions matching `spec`'s pinned marginals.
pub fn build_program(
    dist: &JointDistribution,
    spec: &MarginalSpec,
    objective_group: &[usize],
) -> Result<ConeProgram> {
    let mut obj_group: Vec<usize> = objective_group.to_vec();
    obj_group.sort_unstable();
    obj_group.dedup();
    if obj_group.is_empty() {
        return Err(Error::EmptyPart);
    }
    for &v in &obj_group {
        if v == 0 || v > dist.arity() {
            return Err(Error::BadIndex(v));
        }
    }

    // Support: atoms of the full product space whose every pinned cell is
    // positive. Enumerated with an odometer over the alphabet sizes.
    let sizes = dist.alphabet_sizes();
    let tables: Vec<_> = (0..spec.len()).map(|j| spec.table(j)).collect();
    let mut support: Vec<Vec<u32>> = Vec::new();
    let mut codes = vec![0u32; sizes.len()];
    'outer: loop {
        let ok = tables.iter().all(|t| {
            let key: Vec<u32> = t.vars().iter().map(|&v| codes[v]).collect();
            t.prob(&key) > 0.0
        });
        if ok {
            support.push(codes.clone());
        }
        let mut k = sizes.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            codes[k] += 1;
            if (codes[k] as usize) < sizes[k] {
                break;
            }
            codes[k] = 0;
        }
    }
    if support.is_empty() {
        return Err(Error::InfeasibleSpec);
    }

    // Pinned-marginal equality rows, grouped.
    let mut eq_rows: Vec<Vec<usize>> = Vec::new();
    let mut eq_rhs: Vec<f64> = Vec::new();
    let mut group_spans = Vec::new();
    for t in &tables {
        let start = eq_rows.len();
        let mut row_of: std::collections::BTreeMap<Vec<u32>, usize> = Default::default();
        for (cell, mass) in t.iter() {
            row_of.insert(cell.to_vec(), eq_rows.len());
            eq_rows.push(Vec::new());
            eq_rhs.push(mass);
        }
        for (i, atom) in support.iter().enumerate() {
            let key: Vec<u32> = t.vars().iter().map(|&v| atom[v]).collect();
            eq_rows[row_of[&key]].push(i);
        }
        group_spans.push((start, eq_rows.len()));
    }

    // Conditioning cells for the objective.
    let mut cell_of: std::collections::BTreeMap<Vec<u32>, usize> = Default::default();
    let mut wcell_of: std::collections::BTreeMap<Vec<u32>, usize> = Default::default();
    let mut atom_cell = Vec::with_capacity(support.len());
    let mut atom_wcell = Vec::with_capacity(support.len());
    for atom in &support {
        let g: Vec<u32> = obj_group.iter().map(|&v| atom[v]).collect();
        let mut tg = vec![atom[0]];
        tg.extend_from_slice(&g);
        let n = cell_of.len();
        atom_cell.push(*cell_of.entry(tg).or_insert(n));
        let n = wcell_of.len();
        atom_wcell.push(*wcell_of.entry(g).or_insert(n));
    }
    let n_cells = cell_of.len();
    let n_wcells = wcell_of.len();
    let bijective = n_cells == support.len();

    let h_t_bits = crate::info::entropy(dist, &[0])?;

    let mut program = ConeProgram {
        dist: dist.clone(),
        support,
        eq_rows,
        eq_rhs,
        group_spans,
        obj_group,
        atom_cell,
        atom_wcell,
        n_cells,
        n_wcells,
        bijective,
        h_t_bits,
        shortcut: None,
    };
    program.shortcut = program.detect_shortcut(spec);
    Ok(program)
}

impl ConeProgram {
    pub fn support(&self) -> &[Vec<u32>] {
        &self.support
    }

    pub fn n_atoms(&self) -> usize {
        self.support.len()
    }

    pub fn objective_group(&self) -> &[usize] {
        &self.obj_group
    }

    pub fn has_shortcut(&self) -> bool {
        self.shortcut.is_some()
    }

    /// The reference distribution's mass at each support atom.
    pub fn reference_masses(&self) -> Vec<f64> {
        self.support.iter().map(|a| self.dist.prob(a)).collect()
    }

    fn detect_shortcut(&self, spec: &MarginalSpec) -> Option<Vec<f64>> {
        // Polytope is a point when every atom is pinned alone in some cell.
        let all_pinned = (0..self.support.len()).all(|i| {
            self.eq_rows
                .iter()
                .any(|row| row.len() == 1 && row[0] == i)
        });
        // Objective constant when its group is itself pinned.
        let degenerate = spec.groups().iter().any(|g| g == &self.obj_group);
        if all_pinned || degenerate {
            Some(self.reference_masses())
        } else {
            None
        }
    }

    /// `-H(T|G)` in nats at masses `q`.
    pub fn objective_nats(&self, q: &[f64]) -> f64 {
        let (m, w) = self.cell_masses(q);
        let mut h = 0.0;
        for (i, &mi) in m.iter().enumerate() {
            if mi > 0.0 {
                h += mi * (w[self.cell_w(i)] / mi).ln();
            }
        }
        -h
    }

    /// Gradient of `-H(T|G)` with respect to the atom masses.
    pub fn objective_gradient(&self, q: &[f64]) -> Vec<f64> {
        let (m, w) = self.cell_masses(q);
        (0..q.len())
            .map(|i| {
                let mi = m[self.atom_cell[i]];
                let wi = w[self.atom_wcell[i]];
                if mi > 0.0 {
                    -(wi / mi).ln()
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn cell_masses(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut m = vec![0.0; self.n_cells];
        let mut w = vec![0.0; self.n_wcells];
        for (i, &qi) in q.iter().enumerate() {
            m[self.atom_cell[i]] += qi;
            w[self.atom_wcell[i]] += qi;
        }
        (m, w)
    }

    /// The `w`-cell index feeding cone cell `c` (cells and atoms share
    /// index maps, so look it up through any atom of the cell).
    fn cell_w(&self, c: usize) -> usize {
        // cells were assigned in first-seen atom order, so find one atom
        self.atom_cell
            .iter()
            .position(|&x| x == c)
            .map(|i| self.atom_wcell[i])
            .expect("cell has an atom")
    }

    /// Mutual information `MI(T;G)` in bits at masses `q`.
    pub fn mi_bits(&self, q: &[f64]) -> f64 {
        self.h_t_bits + self.objective_nats(q) / LN2
    }

    /// Materialize an optimizer as a distribution over the original labels.
    pub fn optimizer(&self, q: &[f64]) -> JointDistribution {
        let coded: Vec<(Vec<u32>, f64)> = self
            .support
            .iter()
            .zip(q.iter())
            .map(|(c, &p)| (c.clone(), p))
            .collect();
        self.dist.with_coded(&coded)
    }
}

/// The certificate triple `(pres, dres, gap)` attached to results
/// downstream as the `Num_Err_*` entries. Reported as-is for any
/// completed solve, including failed ones.
pub fn violations(report: &SolveReport) -> (f64, f64, f64) {
    (report.pres, report.dres, report.gap)
}

/// Per pinned group, the maximum absolute deviation of `q`'s marginal
/// from the pinned table.
pub fn marginal_violations(program: &ConeProgram, q: &[f64]) -> Vec<f64> {
    program
        .group_spans
        .iter()
        .map(|&(lo, hi)| {
            (lo..hi)
                .map(|r| {
                    let got: f64 = program.eq_rows[r].iter().map(|&i| q[i]).sum();
                    (got - program.eq_rhs[r]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Solve a built program. Returns a report even when the verdict is
/// `Inaccurate`; `SolverFailed` is left to callers that require better.
pub fn solve(program: &ConeProgram, tols: &Tolerances) -> Result<SolveReport> {
    tols.validate()?;

    if let Some(q) = &program.shortcut {
        let pres = marginal_violations(program, q).into_iter().fold(0.0, f64::max);
        let obj_nats = program.objective_nats(q);
        return Ok(SolveReport {
            status: SolveStatus::Optimal,
            mi_bits: program.h_t_bits + obj_nats / LN2,
            obj_nats,
            obj_nats_dual: obj_nats,
            pres,
            dres: 0.0,
            gap: 0.0,
            iterations: 0,
            presolved: true,
            q: q.clone(),
        });
    }

    let n_q = program.n_atoms();
    let n_m = if program.bijective { 0 } else { program.n_cells };
    let n_w = program.n_wcells;
    let n_r = program.n_cells;
    let n = n_q + n_m + n_w + n_r;
    let m_col = |c: usize| n_q + c;
    let w_col = |g: usize| n_q + n_m + g;
    let r_col = |c: usize| n_q + n_m + n_w + c;

    // Triplets as (col, row, val); rows ordered: zero cone, nonneg, exp.
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut row = 0usize;

    for (r, atoms) in program.eq_rows.iter().enumerate() {
        for &i in atoms {
            trip.push((i, row, 1.0));
        }
        b.push(program.eq_rhs[r]);
        row += 1;
    }
    if !program.bijective {
        for c in 0..program.n_cells {
            trip.push((m_col(c), row, -1.0));
            b.push(0.0);
            row += 1;
        }
        for (i, &c) in program.atom_cell.iter().enumerate() {
            trip.push((i, row - program.n_cells + c, 1.0));
        }
    }
    let w_row0 = row;
    for g in 0..n_w {
        trip.push((w_col(g), row, -1.0));
        b.push(0.0);
        row += 1;
    }
    for (i, &g) in program.atom_wcell.iter().enumerate() {
        trip.push((i, w_row0 + g, 1.0));
    }
    let n_eq = row;

    for i in 0..n_q {
        trip.push((i, row, -1.0));
        b.push(0.0);
        row += 1;
    }

    for c in 0..program.n_cells {
        trip.push((r_col(c), row, -1.0));
        b.push(0.0);
        row += 1;
        if program.bijective {
            let atom = program.atom_cell.iter().position(|&x| x == c).unwrap();
            trip.push((atom, row, -1.0));
        } else {
            trip.push((m_col(c), row, -1.0));
        }
        b.push(0.0);
        row += 1;
        trip.push((w_col(program.cell_w(c)), row, -1.0));
        b.push(0.0);
        row += 1;
    }

    let m_rows = row;
    trip.sort_by_key(|t| (t.0, t.1));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(trip.len());
    let mut nzval = Vec::with_capacity(trip.len());
    for (c, r, v) in trip {
        colptr[c + 1] += 1;
        rowval.push(r);
        nzval.push(v);
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    let a = CscMatrix::new(m_rows, n, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((n, n));
    let mut q_lin = vec![0.0; n];
    for c in 0..program.n_cells {
        q_lin[r_col(c)] = -1.0;
    }

    let mut cones = vec![ZeroConeT(n_eq), NonnegativeConeT(n_q)];
    cones.extend((0..program.n_cells).map(|_| ExponentialConeT()));

    // aim well past the classification thresholds so that differences of
    // minima (the PID parts) keep more accuracy than a single solve;
    // the verdict below still uses the caller's tolerances
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(tols.max_iter)
        .tol_feas(tols.feastol * 1e-2)
        .tol_gap_abs(tols.abstol * 1e-2)
        .tol_gap_rel(tols.reltol * 1e-2)
        .reduced_tol_feas(tols.feastol_inacc)
        .reduced_tol_gap_abs(tols.abstol_inacc)
        .reduced_tol_gap_rel(tols.reltol_inacc)
        .build()
        .map_err(|e| Error::BadTolerances(e.to_string()))?;

    let mut solver = DefaultSolver::new(&p, &q_lin, &a, &b, &cones, settings);
    solver.solve();
    let sol = &solver.solution;

    let certificate_bad = matches!(
        sol.status,
        SolverStatus::PrimalInfeasible
            | SolverStatus::DualInfeasible
            | SolverStatus::AlmostPrimalInfeasible
            | SolverStatus::AlmostDualInfeasible
            | SolverStatus::NumericalError
    );
    let q: Vec<f64> = sol.x[..n_q].iter().map(|&v| v.max(0.0)).collect();
    let obj_nats = sol.obj_val;
    let pres = sol.r_prim;
    let dres = sol.r_dual;
    let gap = (sol.obj_val - sol.obj_val_dual).abs();

    let within = |f: f64, a: f64, r: f64| {
        pres <= f && dres <= f && gap <= a.max(r * obj_nats.abs())
    };
    let status = if certificate_bad {
        SolveStatus::Failed
    } else if within(tols.feastol, tols.abstol, tols.reltol) {
        SolveStatus::Optimal
    } else if within(tols.feastol_inacc, tols.abstol_inacc, tols.reltol_inacc) {
        SolveStatus::Inaccurate
    } else {
        SolveStatus::Failed
    };

    Ok(SolveReport {
        status,
        mi_bits: program.h_t_bits + obj_nats / LN2,
        obj_nats,
        obj_nats_dual: sol.obj_val_dual,
        pres,
        dres,
        gap,
        iterations: sol.iterations,
        presolved: false,
        q,
    })
}
