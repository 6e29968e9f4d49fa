//! Exact two-phase primal simplex over BigRational with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::rat::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpRow {
    pub coeffs: Vec<Rat>,
    pub sense: RowSense,
    pub rhs: Rat,
}

/// `min` (or `max`) of `objective . x` subject to rows and variable bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardLP {
    pub objective: Vec<Rat>,
    pub maximize: bool,
    pub rows: Vec<LpRow>,
    /// `None` means unbounded in that direction.
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LPResult {
    pub status: LpStatus,
    /// Objective value; zero unless the status is `Optimal` (or a feasible
    /// point was found by `feasibility`).
    pub optimum: Rat,
    /// Values of the original variables (empty when infeasible).
    pub solution: Vec<Rat>,
    /// Basic columns of the internal standard form at termination.
    pub basis: Vec<usize>,
}

impl StandardLP {
    /// An LP over `nvars` nonnegative variables with no rows.
    pub fn new(nvars: usize) -> Self {
        StandardLP {
            objective: vec![Rat::zero(); nvars],
            maximize: false,
            rows: Vec::new(),
            lower: vec![Some(Rat::zero()); nvars],
            upper: vec![None; nvars],
        }
    }

    pub fn nvars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<Rat>, sense: RowSense, rhs: Rat) {
        assert_eq!(coeffs.len(), self.nvars(), "row length mismatch");
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    pub fn is_feasible_point(&self, x: &[Rat]) -> bool {
        if x.len() != self.nvars() {
            return false;
        }
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            self.lower[j].as_ref().is_none_or(|l| v >= l)
                && self.upper[j].as_ref().is_none_or(|u| v <= u)
        });
        bounds_ok
            && self.rows.iter().all(|r| {
                let lhs: Rat = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match r.sense {
                    RowSense::Le => lhs <= r.rhs,
                    RowSense::Eq => lhs == r.rhs,
                    RowSense::Ge => lhs >= r.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// x = offset + col
    Shifted(usize, Rat),
    /// x = offset - col
    Mirrored(usize, Rat),
    /// x = pos - neg
    Free(usize, usize),
}

struct Tableau {
    /// rows[i] has `ncols + 1` entries; the last one is the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule to optimality; returns false if unbounded.
    fn optimize(&mut self, cost: &[Rat], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.ncols).find(|&j| {
                allowed[j] && !self.basis.contains(&j) && self.reduced_cost(cost, j).is_negative()
            });
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn reduced_cost(&self, cost: &[Rat], j: usize) -> Rat {
        let mut d = cost[j].clone();
        for (i, row) in self.rows.iter().enumerate() {
            if !row[j].is_zero() && !cost[self.basis[i]].is_zero() {
                d -= &cost[self.basis[i]] * &row[j];
            }
        }
        d
    }

    fn objective(&self, cost: &[Rat]) -> Rat {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost[b] * &self.rows[i][self.ncols])
            .sum()
    }

    fn column_values(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rows[i][self.ncols].clone();
        }
        x
    }
}

struct Prepared {
    tableau: Tableau,
    maps: Vec<VarMap>,
    /// Standard-form cost (minimization) and constant offset.
    cost: Vec<Rat>,
    offset: Rat,
    artificial_start: usize,
}

fn prepare(lp: &StandardLP) -> Prepared {
    let n = lp.nvars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    // extra rows for finite upper bounds on shifted variables: (col, bound)
    let mut bound_rows: Vec<(usize, Rat)> = Vec::new();
    for j in 0..n {
        match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), u) => {
                maps.push(VarMap::Shifted(ncols, l.clone()));
                if let Some(u) = u {
                    bound_rows.push((ncols, u - l));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Mirrored(ncols, u.clone()));
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Free(ncols, ncols + 1));
                ncols += 2;
            }
        }
    }
    let structural = ncols;
    // express rows in structural columns: coefficient vector and adjusted rhs
    let mut rows: Vec<(Vec<Rat>, RowSense, Rat)> = Vec::new();
    for r in &lp.rows {
        let mut coeffs = vec![Rat::zero(); structural];
        let mut rhs = r.rhs.clone();
        for (j, a) in r.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Shifted(c, l) => {
                    coeffs[*c] += a;
                    rhs -= a * l;
                }
                VarMap::Mirrored(c, u) => {
                    coeffs[*c] -= a;
                    rhs -= a * u;
                }
                VarMap::Free(p, q) => {
                    coeffs[*p] += a;
                    coeffs[*q] -= a;
                }
            }
        }
        rows.push((coeffs, r.sense, rhs));
    }
    for (c, u) in bound_rows {
        let mut coeffs = vec![Rat::zero(); structural];
        coeffs[c] = Rat::one();
        rows.push((coeffs, RowSense::Le, u));
    }
    // flip rows to nonnegative rhs
    for (coeffs, sense, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for v in coeffs.iter_mut() {
                *v = -v.clone();
            }
            *rhs = -rhs.clone();
            *sense = match sense {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
    }
    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
    let nart = rows.iter().filter(|r| r.1 != RowSense::Le).count();
    let total = structural + nslack + nart;
    let artificial_start = structural + nslack;
    let mut trows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (structural, artificial_start);
    for (coeffs, sense, rhs) in rows {
        let mut row = coeffs;
        row.resize(total + 1, Rat::zero());
        row[total] = rhs;
        match sense {
            RowSense::Le => {
                row[s] = Rat::one();
                basis.push(s);
                s += 1;
            }
            RowSense::Ge => {
                row[s] = -Rat::one();
                s += 1;
                row[a] = Rat::one();
                basis.push(a);
                a += 1;
            }
            RowSense::Eq => {
                row[a] = Rat::one();
                basis.push(a);
                a += 1;
            }
        }
        trows.push(row);
    }
    let mut cost = vec![Rat::zero(); total];
    let mut offset = Rat::zero();
    for (j, c) in lp.objective.iter().enumerate() {
        let c = if lp.maximize { -c.clone() } else { c.clone() };
        match &maps[j] {
            VarMap::Shifted(col, l) => {
                offset += &c * l;
                cost[*col] += &c;
            }
            VarMap::Mirrored(col, u) => {
                offset += &c * u;
                cost[*col] -= &c;
            }
            VarMap::Free(p, q) => {
                cost[*p] += &c;
                cost[*q] -= &c;
            }
        }
    }
    Prepared {
        tableau: Tableau {
            rows: trows,
            basis,
            ncols: total,
        },
        maps,
        cost,
        offset,
        artificial_start,
    }
}

/// Phase one. Returns false if the system is infeasible; otherwise the
/// tableau holds a feasible basis without artificial columns.
fn phase_one(prep: &mut Prepared) -> bool {
    let t = &mut prep.tableau;
    let total = t.ncols;
    let art = prep.artificial_start;
    let mut cost = vec![Rat::zero(); total];
    for c in cost.iter_mut().skip(art) {
        *c = Rat::one();
    }
    let allowed = vec![true; total];
    t.optimize(&cost, &allowed);
    if !t.objective(&cost).is_zero() {
        return false;
    }
    // drive zero-valued artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= art {
            match (0..art).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    true
}

fn extract(prep: &Prepared) -> Vec<Rat> {
    let cols = prep.tableau.column_values();
    prep.maps
        .iter()
        .map(|m| match m {
            VarMap::Shifted(c, l) => l + &cols[*c],
            VarMap::Mirrored(c, u) => u - &cols[*c],
            VarMap::Free(p, q) => &cols[*p] - &cols[*q],
        })
        .collect()
}

fn infeasible() -> LPResult {
    LPResult {
        status: LpStatus::Infeasible,
        optimum: Rat::zero(),
        solution: Vec::new(),
        basis: Vec::new(),
    }
}

/// Exact optimum by two-phase simplex with Bland's least-index rule.
pub fn solve(lp: &StandardLP) -> LPResult {
    if let Some(r) = contradictory_bounds(lp) {
        return r;
    }
    let mut prep = prepare(lp);
    if !phase_one(&mut prep) {
        return infeasible();
    }
    let total = prep.tableau.ncols;
    let allowed: Vec<bool> = (0..total).map(|j| j < prep.artificial_start).collect();
    let cost = prep.cost.clone();
    if !prep.tableau.optimize(&cost, &allowed) {
        return LPResult {
            status: LpStatus::Unbounded,
            optimum: Rat::zero(),
            solution: extract(&prep),
            basis: prep.tableau.basis.clone(),
        };
    }
    let solution = extract(&prep);
    let optimum = lp.objective_value(&solution);
    debug_assert_eq!(
        if lp.maximize {
            -&optimum
        } else {
            optimum.clone()
        },
        prep.tableau.objective(&cost) + &prep.offset
    );
    LPResult {
        status: LpStatus::Optimal,
        optimum,
        solution,
        basis: prep.tableau.basis.clone(),
    }
}

/// Phase one only: a feasible point, or `Infeasible`.
pub fn feasibility(lp: &StandardLP) -> LPResult {
    if let Some(r) = contradictory_bounds(lp) {
        return r;
    }
    let mut prep = prepare(lp);
    if !phase_one(&mut prep) {
        return infeasible();
    }
    let solution = extract(&prep);
    LPResult {
        status: LpStatus::Optimal,
        optimum: lp.objective_value(&solution),
        solution,
        basis: prep.tableau.basis.clone(),
    }
}

fn contradictory_bounds(lp: &StandardLP) -> Option<LPResult> {
    let bad = lp
        .lower
        .iter()
        .zip(&lp.upper)
        .any(|(l, u)| matches!((l, u), (Some(l), Some(u)) if l > u));
    bad.then(infeasible)
}
