//! Fraction-free revised simplex for equality-form LPs with integer data:
//! `min cost . x  s.t.  A x = b, x >= 0`.
//!
//! The basis inverse is kept as an integer adjugate `adj` and determinant
//! `det` (`B^{-1} = adj / det`), updated by Bareiss-style exact division.
//! Primal phases use Bland's rule; changing only `b` restarts from the last
//! basis with the least-index dual simplex rule.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::borrow::Cow;
use std::cmp::Ordering;

use crate::rat::Rat;

/// Sparse integer column: (row, value) pairs with distinct rows.
pub type SparseCol = Vec<(u32, i64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqStatus {
    Optimal,
    /// No x >= 0 satisfies A x = b.
    Infeasible,
    /// Feasible, but the objective decreases without bound.
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct EqSolution {
    pub status: EqStatus,
    /// Optimal value `cost . x` (zero unless optimal).
    pub value: Rat,
    /// Basic (column, value) pairs; artificial columns are omitted.
    pub basic: Vec<(usize, Rat)>,
    /// Simplex multipliers `pi` with `pi . a_j <= cost_j` for all j at optimality.
    pub multipliers: Vec<Rat>,
    pub pivots: usize,
}

pub struct EqLp {
    nrows: usize,
    cols: Vec<SparseCol>,
    cost: Vec<i64>,
    /// Row sign flips applied when phase one started (so the initial b is >= 0).
    signs: Vec<i64>,
    state: Option<Basis>,
    pub pivot_limit: usize,
}

#[derive(Clone)]
struct Basis {
    /// basic column per row; columns >= ncols are artificials (ncols + row).
    head: Vec<usize>,
    adj: Adj,
    det: BigInt,
    /// adj * (signs . b)
    xhat: Vec<BigInt>,
}

/// Largest entry magnitude kept in the small representation.
const SMALL_LIMIT: i128 = 1 << 62;

/// The adjugate, kept in machine integers until an entry grows too large.
#[derive(Clone)]
enum Adj {
    /// rows plus the largest entry magnitude
    Small(Vec<Vec<i64>>, i64),
    Big(Vec<Vec<BigInt>>),
}

impl Adj {
    fn identity(n: usize) -> Adj {
        Adj::Small(
            (0..n)
                .map(|i| {
                    let mut row = vec![0i64; n];
                    row[i] = 1;
                    row
                })
                .collect(),
            1,
        )
    }

    fn to_big(&self) -> Vec<Vec<BigInt>> {
        match self {
            Adj::Small(m, _) => m
                .iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
            Adj::Big(m) => m.clone(),
        }
    }

    fn row(&self, r: usize) -> Dense {
        match self {
            Adj::Small(m, _) => Dense::Small(m[r].iter().map(|&v| v as i128).collect()),
            Adj::Big(m) => Dense::new(m[r].clone()),
        }
    }

    fn nrows(&self) -> usize {
        match self {
            Adj::Small(m, _) => m.len(),
            Adj::Big(m) => m.len(),
        }
    }

    /// `adj * col`.
    fn ftran(&self, col: &SparseCol) -> Vec<BigInt> {
        (0..self.nrows()).map(|i| self.row_dot(i, col)).collect()
    }

    fn row_dot(&self, i: usize, col: &SparseCol) -> BigInt {
        match self {
            Adj::Small(m, _) => {
                let row = &m[i];
                let mut acc: i128 = 0;
                for &(r, v) in col {
                    match (row[r as usize] as i128)
                        .checked_mul(v as i128)
                        .and_then(|t| acc.checked_add(t))
                    {
                        Some(a) => acc = a,
                        None => {
                            return col
                                .iter()
                                .map(|&(r, v)| BigInt::from(row[r as usize]) * v)
                                .sum();
                        }
                    }
                }
                BigInt::from(acc)
            }
            Adj::Big(m) => col.iter().map(|&(r, v)| &m[i][r as usize] * v).sum(),
        }
    }

    /// `sum_i weights[i] * adj_i`.
    fn combine(&self, weights: &[i64]) -> Dense {
        if let Adj::Small(m, _) = self {
            let mut out = vec![0i128; m.len()];
            let mut ok = true;
            'rows: for (i, &w) in weights.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                for (o, &a) in out.iter_mut().zip(&m[i]) {
                    if a != 0 {
                        match (a as i128)
                            .checked_mul(w as i128)
                            .and_then(|t| o.checked_add(t))
                        {
                            Some(v) => *o = v,
                            None => {
                                ok = false;
                                break 'rows;
                            }
                        }
                    }
                }
            }
            if ok {
                return Dense::Small(out);
            }
        }
        let big = self.to_big();
        let mut out = vec![BigInt::zero(); big.len()];
        for (i, &w) in weights.iter().enumerate() {
            if w != 0 {
                for (o, a) in out.iter_mut().zip(&big[i]) {
                    if !a.is_zero() {
                        *o += a * w;
                    }
                }
            }
        }
        Dense::Big(out)
    }

    fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        match self {
            Adj::Small(m, _) => m
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(v)
                        .filter(|(a, _)| **a != 0)
                        .map(|(&a, x)| x * a)
                        .sum()
                })
                .collect(),
            Adj::Big(m) => m
                .iter()
                .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
                .collect(),
        }
    }

    /// Bareiss update for a pivot on row `r` with column `alpha = adj * a_q`:
    /// row r is unchanged and row i becomes `(ar * adj_i - alpha_i * adj_r) / det`.
    fn pivot(&mut self, r: usize, alpha: &[BigInt], det: &BigInt) {
        if let Adj::Small(m, maxabs) = self {
            let small: Option<Vec<i64>> = alpha.iter().map(|a| a.to_i64()).collect();
            if let (Some(al), Some(d)) = (small, det.to_i64()) {
                let ar = al[r];
                let amax = al
                    .iter()
                    .map(|a| a.unsigned_abs() as i128)
                    .max()
                    .unwrap_or(0);
                // every new entry is bounded by maxabs * (|ar| + max|alpha|) / |det|
                let bound = *maxabs as i128 * (ar.unsigned_abs() as i128 + amax);
                if bound / (d.unsigned_abs() as i128) < SMALL_LIMIT {
                    *maxabs = pivot_small(m, r, &al, d, bound < i64::MAX as i128);
                    return;
                }
            }
            *self = Adj::Big(self.to_big());
        }
        let Adj::Big(m) = self else { unreachable!() };
        let ar = &alpha[r];
        let adj_r = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let ai = &alpha[i];
            if ai.is_zero() {
                if ar == det {
                    continue;
                }
                for v in row.iter_mut() {
                    if !v.is_zero() {
                        *v = (&*v * ar).div_floor(det);
                    }
                }
            } else {
                for (v, w) in row.iter_mut().zip(&adj_r) {
                    if v.is_zero() && w.is_zero() {
                        continue;
                    }
                    *v = (&*v * ar - ai * w).div_floor(det);
                }
            }
        }
    }
}

/// In-place small update; `narrow` means every intermediate fits in i64.
/// Returns the new largest entry magnitude.
fn pivot_small(m: &mut [Vec<i64>], r: usize, alpha: &[i64], det: i64, narrow: bool) -> i64 {
    let ar = alpha[r];
    let adj_r = m[r].clone();
    let mut maxabs = adj_r.iter().map(|v| v.abs()).max().unwrap_or(0);
    for (i, row) in m.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let ai = alpha[i];
        if ai == 0 && ar == det {
            maxabs = maxabs.max(row.iter().map(|v| v.abs()).max().unwrap_or(0));
            continue;
        }
        for (v, &w) in row.iter_mut().zip(&adj_r) {
            if *v == 0 && (ai == 0 || w == 0) {
                continue;
            }
            *v = if narrow {
                (*v * ar - ai * w) / det
            } else {
                ((*v as i128 * ar as i128 - ai as i128 * w as i128) / det as i128) as i64
            };
            maxabs = maxabs.max(v.abs());
        }
    }
    maxabs
}

fn sgn(v: &BigInt) -> i32 {
    match v.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// Dense integer vector that uses i128 arithmetic when all entries are small.
enum Dense {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl Dense {
    fn new(v: Vec<BigInt>) -> Self {
        let small: Option<Vec<i128>> = v
            .iter()
            .map(|x| if x.bits() <= 80 { x.to_i128() } else { None })
            .collect();
        match small {
            Some(s) => Dense::Small(s),
            None => Dense::Big(v),
        }
    }

    fn into_big(self) -> Vec<BigInt> {
        match self {
            Dense::Small(s) => s.into_iter().map(BigInt::from).collect(),
            Dense::Big(b) => b,
        }
    }

    /// The dot product in machine integers, if it fits.
    fn dot_small(&self, col: &SparseCol) -> Option<i128> {
        let Dense::Small(s) = self else { return None };
        let mut acc: i128 = 0;
        for &(r, v) in col {
            acc = acc.checked_add(s[r as usize].checked_mul(v as i128)?)?;
        }
        Some(acc)
    }

    /// `det * cost - self . col` (a scaled reduced cost).
    fn reduced(&self, det: &BigInt, det_small: Option<i128>, cost: i64, col: &SparseCol) -> BigInt {
        if let (Some(d), Some(dot)) = (det_small, self.dot_small(col)) {
            if let Some(v) = d.checked_mul(cost as i128).and_then(|x| x.checked_sub(dot)) {
                return BigInt::from(v);
            }
        }
        det * cost - self.dot(col)
    }

    fn reduced_sign(
        &self,
        det: &BigInt,
        det_small: Option<i128>,
        cost: i64,
        col: &SparseCol,
    ) -> i32 {
        if let (Some(d), Some(dot)) = (det_small, self.dot_small(col)) {
            if let Some(v) = d.checked_mul(cost as i128).and_then(|x| x.checked_sub(dot)) {
                return v.signum() as i32;
            }
        }
        sgn(&(det * cost - self.dot(col)))
    }

    fn dot_sign(&self, col: &SparseCol) -> i32 {
        match self.dot_small(col) {
            Some(v) => v.signum() as i32,
            None => sgn(&self.dot(col)),
        }
    }

    fn dot(&self, col: &SparseCol) -> BigInt {
        match self {
            Dense::Small(s) => {
                let mut acc: i128 = 0;
                let mut overflow = false;
                for &(r, v) in col {
                    match s[r as usize]
                        .checked_mul(v as i128)
                        .and_then(|t| acc.checked_add(t))
                    {
                        Some(a) => acc = a,
                        None => {
                            overflow = true;
                            break;
                        }
                    }
                }
                if !overflow {
                    return BigInt::from(acc);
                }
                col.iter()
                    .map(|&(r, v)| BigInt::from(s[r as usize]) * v)
                    .sum()
            }
            Dense::Big(b) => col.iter().map(|&(r, v)| &b[r as usize] * v).sum(),
        }
    }
}

impl EqLp {
    pub fn new(nrows: usize, cols: Vec<SparseCol>, cost: Vec<i64>) -> Self {
        assert_eq!(cols.len(), cost.len());
        EqLp {
            nrows,
            cols,
            cost,
            signs: vec![1; nrows],
            state: None,
            pivot_limit: usize::MAX,
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Column `j` of the sign-adjusted system (artificials are unit columns).
    fn column(&self, j: usize) -> Cow<'_, SparseCol> {
        if j < self.cols.len() {
            Cow::Borrowed(&self.cols[j])
        } else {
            Cow::Owned(vec![((j - self.cols.len()) as u32, 1)])
        }
    }

    /// Flips stored rows so that the system matches new row signs.
    fn set_signs(&mut self, signs: Vec<i64>) {
        let flip: Vec<i64> = signs.iter().zip(&self.signs).map(|(a, b)| a * b).collect();
        if flip.iter().any(|&f| f < 0) {
            for col in self.cols.iter_mut() {
                for e in col.iter_mut() {
                    e.1 *= flip[e.0 as usize];
                }
            }
        }
        self.signs = signs;
    }

    /// `adj * a_j` for a (sign-adjusted) column.
    fn ftran(&self, basis: &Basis, col: &SparseCol) -> Vec<BigInt> {
        basis.adj.ftran(col)
    }

    fn pivot(basis: &mut Basis, r: usize, alpha: &[BigInt], entering: usize) {
        let ar = alpha[r].clone();
        let det = basis.det.clone();
        basis.adj.pivot(r, alpha, &det);
        let x_r = basis.xhat[r].clone();
        for (i, x) in basis.xhat.iter_mut().enumerate() {
            if i != r {
                *x = (&*x * &ar - &alpha[i] * &x_r).div_floor(&det);
            }
        }
        basis.det = ar;
        basis.head[r] = entering;
    }

    fn multipliers_hat(&self, basis: &Basis, cost: &dyn Fn(usize) -> i64) -> Dense {
        let weights: Vec<i64> = basis.head.iter().map(|&h| cost(h)).collect();
        basis.adj.combine(&weights)
    }

    /// Primal simplex with Bland's rule over columns `0..limit` (artificials
    /// excluded when `limit == ncols`). Returns false if unbounded.
    fn primal(
        &self,
        basis: &mut Basis,
        cost: &dyn Fn(usize) -> i64,
        limit: usize,
        pivots: &mut usize,
    ) -> bool {
        let dsign = |b: &Basis| sgn(&b.det);
        loop {
            let dense = self.multipliers_hat(basis, cost);
            let mut in_basis = vec![false; limit];
            for &h in &basis.head {
                if h < limit {
                    in_basis[h] = true;
                }
            }
            let ds = dsign(basis);
            let det = basis.det.clone();
            let det_small = det.to_i128();
            let mut entering = None;
            for (j, &inb) in in_basis.iter().enumerate() {
                if inb {
                    continue;
                }
                let col = self.column(j);
                // reduced cost * det = det * c_j - pihat . a_j
                if dense.reduced_sign(&det, det_small, cost(j), &col) * ds < 0 {
                    entering = Some((j, col));
                    break;
                }
            }
            let Some((q, col)) = entering else {
                return true;
            };
            let alpha = self.ftran(basis, &col);
            let mut best: Option<usize> = None;
            for i in 0..self.nrows {
                if sgn(&alpha[i]) * ds <= 0 {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(b) => {
                        // compare xhat_i / alpha_i with xhat_b / alpha_b (both ratios >= 0)
                        let lhs = basis.xhat[i].abs() * alpha[b].abs();
                        let rhs = basis.xhat[b].abs() * alpha[i].abs();
                        match lhs.cmp(&rhs) {
                            Ordering::Less => Some(i),
                            Ordering::Equal if basis.head[i] < basis.head[b] => Some(i),
                            _ => Some(b),
                        }
                    }
                };
            }
            let Some(r) = best else {
                return false;
            };
            Self::pivot(basis, r, &alpha, q);
            *pivots += 1;
            if *pivots > self.pivot_limit {
                panic!("pivot limit exceeded");
            }
        }
    }

    /// Dual simplex with least-index leaving row and min-ratio entering
    /// column (ties to the least index). Returns false if primal infeasible.
    fn dual(&self, basis: &mut Basis, pivots: &mut usize) -> bool {
        let ncols = self.cols.len();
        let cost = |j: usize| if j < ncols { self.cost[j] } else { 0 };
        loop {
            let ds = sgn(&basis.det);
            let leaving = (0..self.nrows)
                .filter(|&i| sgn(&basis.xhat[i]) * ds < 0)
                .min_by_key(|&i| basis.head[i]);
            let Some(r) = leaving else {
                return true;
            };
            let dense_pi = self.multipliers_hat(basis, &cost);
            let dense_row = basis.adj.row(r);
            let mut in_basis = vec![false; ncols];
            for &h in &basis.head {
                if h < ncols {
                    in_basis[h] = true;
                }
            }
            let det = basis.det.clone();
            let det_small = det.to_i128();
            // entering: rho_j < 0, minimizing |D_j| / |R_j|
            let mut best: Option<(usize, BigInt, BigInt)> = None;
            for j in 0..ncols {
                if in_basis[j] {
                    continue;
                }
                let col = self.column(j);
                if dense_row.dot_sign(&col) * ds >= 0 {
                    continue;
                }
                let rj = dense_row.dot(&col).abs();
                let dj = dense_pi.reduced(&det, det_small, cost(j), &col).abs();
                let better = match &best {
                    None => true,
                    Some((_, bd, br)) => &dj * br < bd * &rj,
                };
                if better {
                    best = Some((j, dj, rj));
                }
            }
            let Some((q, _, _)) = best else {
                return false;
            };
            let col = self.column(q);
            let alpha = self.ftran(basis, &col);
            Self::pivot(basis, r, &alpha, q);
            *pivots += 1;
            if *pivots > self.pivot_limit {
                panic!("pivot limit exceeded");
            }
        }
    }

    fn finish(&self, basis: &Basis, status: EqStatus, pivots: usize) -> EqSolution {
        let ncols = self.cols.len();
        if status != EqStatus::Optimal {
            return EqSolution {
                status,
                value: Rat::zero(),
                basic: Vec::new(),
                multipliers: Vec::new(),
                pivots,
            };
        }
        let det = &basis.det;
        let basic: Vec<(usize, Rat)> = basis
            .head
            .iter()
            .zip(&basis.xhat)
            .filter(|(h, _)| **h < ncols)
            .map(|(&h, x)| (h, Rat::new(x.clone(), det.clone())))
            .collect();
        let value = basic
            .iter()
            .map(|(h, x)| x * Rat::from_integer(BigInt::from(self.cost[*h])))
            .sum();
        let cost = |j: usize| if j < ncols { self.cost[j] } else { 0 };
        let pihat = self.multipliers_hat(basis, &cost);
        let multipliers = pihat
            .into_big()
            .into_iter()
            .zip(&self.signs)
            .map(|(p, &s)| Rat::new(p * s, det.clone()))
            .collect();
        EqSolution {
            status,
            value,
            basic,
            multipliers,
            pivots,
        }
    }

    /// Cold start: phase one from an artificial basis, then phase two.
    pub fn solve(&mut self, b: &[BigInt]) -> EqSolution {
        assert_eq!(b.len(), self.nrows);
        let ncols = self.cols.len();
        self.set_signs(
            b.iter()
                .map(|v| if v.is_negative() { -1 } else { 1 })
                .collect(),
        );
        let n = self.nrows;
        let mut basis = Basis {
            head: (0..n).map(|i| ncols + i).collect(),
            adj: Adj::identity(n),
            det: BigInt::one(),
            xhat: b.iter().map(|v| v.abs()).collect(),
        };
        let mut pivots = 0;
        let phase1 = |j: usize| if j >= ncols { 1 } else { 0 };
        self.primal(&mut basis, &phase1, ncols + n, &mut pivots);
        let infeasible = basis
            .head
            .iter()
            .zip(&basis.xhat)
            .any(|(&h, x)| h >= ncols && !x.is_zero());
        if infeasible {
            self.state = None;
            return self.finish(&basis, EqStatus::Infeasible, pivots);
        }
        // pivot zero-level artificials out where possible
        for r in 0..n {
            if basis.head[r] < ncols {
                continue;
            }
            let row = basis.adj.row(r);
            let in_basis: std::collections::HashSet<usize> = basis.head.iter().copied().collect();
            let found = (0..ncols)
                .filter(|j| !in_basis.contains(j))
                .find(|&j| !row.dot(&self.column(j)).is_zero());
            if let Some(q) = found {
                let alpha = self.ftran(&basis, &self.column(q));
                Self::pivot(&mut basis, r, &alpha, q);
                pivots += 1;
            }
        }
        let cost = |j: usize| if j < ncols { self.cost[j] } else { 0 };
        let bounded = self.primal(&mut basis, &cost, ncols, &mut pivots);
        let status = if bounded {
            EqStatus::Optimal
        } else {
            EqStatus::Unbounded
        };
        let out = self.finish(&basis, status, pivots);
        self.state = bounded.then_some(basis);
        out
    }

    /// Re-solves for a new right-hand side from the last optimal basis,
    /// falling back to a cold start when there is none.
    pub fn resolve(&mut self, b: &[BigInt]) -> EqSolution {
        let Some(mut basis) = self.state.take() else {
            return self.solve(b);
        };
        let ncols = self.cols.len();
        let signed: Vec<BigInt> = b.iter().zip(&self.signs).map(|(v, &s)| v * s).collect();
        basis.xhat = basis.adj.mul_vec(&signed);
        // artificials left in the basis mark redundant rows; a new b that
        // needs them is outside the column span
        let redundant_violated = basis
            .head
            .iter()
            .zip(&basis.xhat)
            .any(|(&h, x)| h >= ncols && !x.is_zero());
        if redundant_violated {
            return self.solve(b);
        }
        let mut pivots = 0;
        let feasible = self.dual(&mut basis, &mut pivots);
        if !feasible {
            self.state = Some(basis.clone());
            return self.finish(&basis, EqStatus::Infeasible, pivots);
        }
        let out = self.finish(&basis, EqStatus::Optimal, pivots);
        self.state = Some(basis);
        out
    }
}
