//! Independent oracles used to cross-check the cone-solver pipeline.
//!
//! `min_mi_oracle` minimizes mutual information over the pinned-marginal
//! polytope by entropic mirror descent (multiplicative updates) with
//! iterative proportional fitting as the projection step — a completely
//! different algorithm from the interior-point backend. `ecls_oracle`
//! solves the consistency-repair projection through an explicit 12x12
//! KKT system with hand-rolled Gaussian elimination.

use maxent_pid::{JointDistribution, MarginalSpec};

const LN2: f64 = std::f64::consts::LN_2;

struct Polytope {
    support: Vec<Vec<u32>>,
    /// Per pinned group: (row index per atom, row targets).
    groups: Vec<(Vec<usize>, Vec<f64>)>,
    atom_cell: Vec<usize>,
    atom_wcell: Vec<usize>,
    n_cells: usize,
    n_wcells: usize,
    h_t_bits: f64,
}

fn polytope(d: &JointDistribution, pins: &[Vec<usize>], objective: &[usize]) -> Polytope {
    let spec = MarginalSpec::from_dist(d, pins).unwrap();
    let sizes = d.alphabet_sizes();
    let mut support = Vec::new();
    let mut codes = vec![0u32; sizes.len()];
    'outer: loop {
        let ok = (0..spec.len()).all(|j| {
            let t = spec.table(j);
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

    let mut groups = Vec::new();
    for j in 0..spec.len() {
        let t = spec.table(j);
        let mut row_of: std::collections::BTreeMap<Vec<u32>, usize> = Default::default();
        let mut targets = Vec::new();
        for (cell, mass) in t.iter() {
            row_of.insert(cell.to_vec(), targets.len());
            targets.push(mass);
        }
        let rows: Vec<usize> = support
            .iter()
            .map(|a| {
                let key: Vec<u32> = t.vars().iter().map(|&v| a[v]).collect();
                row_of[&key]
            })
            .collect();
        groups.push((rows, targets));
    }

    let mut cell_of: std::collections::BTreeMap<Vec<u32>, usize> = Default::default();
    let mut wcell_of: std::collections::BTreeMap<Vec<u32>, usize> = Default::default();
    let mut atom_cell = Vec::new();
    let mut atom_wcell = Vec::new();
    for a in &support {
        let g: Vec<u32> = objective.iter().map(|&v| a[v]).collect();
        let mut tg = vec![a[0]];
        tg.extend_from_slice(&g);
        let n = cell_of.len();
        atom_cell.push(*cell_of.entry(tg).or_insert(n));
        let n = wcell_of.len();
        atom_wcell.push(*wcell_of.entry(g).or_insert(n));
    }

    let h_t_bits = {
        let m = d.marginal(&[0]).unwrap();
        -m.probs().filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>() / LN2
    };

    Polytope {
        support,
        groups,
        atom_cell,
        atom_wcell,
        n_cells: cell_of.len(),
        n_wcells: wcell_of.len(),
        h_t_bits,
    }
}

impl Polytope {
    fn neg_cond_entropy_nats(&self, q: &[f64]) -> f64 {
        let (m, w) = self.cells(q);
        let mut h = 0.0;
        for (i, &mi) in m.iter().enumerate() {
            if mi > 0.0 {
                h += mi * (self.wval(&w, i) / mi).ln();
            }
        }
        -h
    }

    fn cells(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut m = vec![0.0; self.n_cells];
        let mut w = vec![0.0; self.n_wcells];
        for (i, &qi) in q.iter().enumerate() {
            m[self.atom_cell[i]] += qi;
            w[self.atom_wcell[i]] += qi;
        }
        (m, w)
    }

    fn wval(&self, w: &[f64], cell: usize) -> f64 {
        let atom = self.atom_cell.iter().position(|&c| c == cell).unwrap();
        w[self.atom_wcell[atom]]
    }

    /// One IPF pass per group until the pins hold to `tol`.
    fn project(&self, q: &mut [f64], tol: f64) {
        for _ in 0..2000 {
            let mut worst: f64 = 0.0;
            for (rows, targets) in &self.groups {
                let mut cur = vec![0.0; targets.len()];
                for (i, &r) in rows.iter().enumerate() {
                    cur[r] += q[i];
                }
                for (i, &r) in rows.iter().enumerate() {
                    if cur[r] > 0.0 {
                        q[i] *= targets[r] / cur[r];
                    }
                }
                for (c, &t) in cur.iter().zip(targets.iter()) {
                    worst = worst.max((c - t).abs());
                }
            }
            if worst < tol {
                return;
            }
        }
    }
}

/// Minimize `MI_Q(T; objective)` in bits over distributions matching the
/// pinned `(T, group)` marginals of `d`, by mirror descent.
pub fn min_mi_oracle(d: &JointDistribution, pins: &[Vec<usize>], objective: &[usize]) -> f64 {
    let poly = polytope(d, pins, objective);
    let n = poly.support.len();
    let mut q = vec![1.0 / n as f64; n];
    poly.project(&mut q, 1e-13);
    let mut f_prev = poly.neg_cond_entropy_nats(&q);
    let mut stall = 0;
    for _ in 0..200_000 {
        let (m, w) = poly.cells(&q);
        for i in 0..n {
            let mi = m[poly.atom_cell[i]];
            let wi = w[poly.atom_wcell[i]];
            if mi > 0.0 && wi > 0.0 {
                // exp(-grad) of the objective -H(T|G)
                q[i] *= wi / mi;
            }
        }
        poly.project(&mut q, 1e-13);
        let f = poly.neg_cond_entropy_nats(&q);
        if (f_prev - f).abs() < 1e-14 {
            stall += 1;
            if stall > 50 {
                break;
            }
        } else {
            stall = 0;
        }
        f_prev = f;
    }
    poly.h_t_bits + f_prev / LN2
}

/// Minimized `MI(T;X,Y,Z)` and pairwise values over the singleton-pinned
/// polytope, plus the derived eight parts — all without the cone solver.
#[allow(dead_code)]
pub fn pid_oracle(d: &JointDistribution) -> [f64; 8] {
    let pins = vec![vec![1], vec![2], vec![3]];
    let m_full = min_mi_oracle(d, &pins, &[1, 2, 3]);
    let m_xy = min_mi_oracle(d, &pins, &[1, 2]);
    let m_xz = min_mi_oracle(d, &pins, &[1, 3]);
    let m_yz = min_mi_oracle(d, &pins, &[2, 3]);
    let mi = maxent_pid::info::mutual_information(d, &[0], &[1, 2, 3]).unwrap();
    let mi_x = maxent_pid::info::mutual_information(d, &[0], &[1]).unwrap();
    let mi_y = maxent_pid::info::mutual_information(d, &[0], &[2]).unwrap();
    let mi_z = maxent_pid::info::mutual_information(d, &[0], &[3]).unwrap();
    let ci = mi - m_full;
    let ui_x = m_full - m_yz;
    let ui_y = m_full - m_xz;
    let ui_z = m_full - m_xy;
    let r1 = mi_x - ui_x;
    let r2 = mi_y - ui_y;
    let r3 = mi_z - ui_z;
    let rt = mi - ci - ui_x - ui_y - ui_z;
    [
        ci,
        ui_x,
        ui_y,
        ui_z,
        rt - r3,
        rt - r2,
        rt - r1,
        r1 + r2 + r3 - 2.0 * rt,
    ]
}

/// Dense equality-constrained least squares: minimize `||x - v||` subject
/// to `E x = c`, via the KKT system `[[I, E^T], [E, 0]] [x; l] = [v; c]`
/// solved by Gaussian elimination with partial pivoting.
#[allow(dead_code)]
pub fn ecls_oracle(v: &[f64; 8], c: &[f64; 4]) -> [f64; 8] {
    const ROWS: [[f64; 8]; 4] = [
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0],
    ];
    let n = 12;
    let mut a = [[0.0f64; 13]; 12];
    for i in 0..8 {
        a[i][i] = 1.0;
        for r in 0..4 {
            a[i][8 + r] = ROWS[r][i];
            a[8 + r][i] = ROWS[r][i];
        }
        a[i][12] = v[i];
    }
    for r in 0..4 {
        a[8 + r][12] = c[r];
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for row in 0..n {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col] / p;
                let pivot = a[col];
                for (t, &s) in a[row][col..=n].iter_mut().zip(&pivot[col..=n]) {
                    *t -= f * s;
                }
            }
        }
    }
    let mut x = [0.0; 8];
    for i in 0..8 {
        x[i] = a[i][12] / a[i][i];
    }
    x
}
