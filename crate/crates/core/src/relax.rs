//! Generalized Sherali-Adams relaxations built from a spanning set.
//!
//! The moment functional `y` lives on `W = span(T_SA)` where
//! `T_SA = {x_i * q : q in S, i in {0..n}}` (multilinearized). Functionals on
//! `W` are represented by weights `z` on a set of pivot points `P` with
//! `y[f] = sum_{p in P} z_p f(p)`; `P` is chosen so that restriction
//! `W -> Q^P` is injective, which makes this parametrization exact.
//!
//! Optima are certified: the solver returns a dual combination
//! `c = t + sum_k w_k row_k` with `w >= 0`, and that identity is checked on
//! the whole hypercube, so `t` is a proven lower bound that `z` attains.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::delta::DeltaStructured;
use crate::error::{Error, Result};
use crate::instances::{Constraint, LinearInequality, LinearSystem, Sense};
use crate::limits::Limits;
use crate::lpcore::{EqLp, EqStatus, SparseCol};
use crate::poly::MultilinearPoly;
use crate::rat::{denom_lcm, fmt_rat, int, Rat};
use crate::simplex::LpStatus;
use crate::spanning::SpanningSet;
use crate::varset::VarSet;

const PRIME: u64 = 2_147_483_647;
/// Dense elimination budget in stored cells (rank * 2^n).
const ELIMINATION_CELLS: usize = 1 << 25;

/// A generator `x_var * member` of T_SA (`var = None` for the member itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Generator {
    pub member: usize,
    pub var: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct MomentBasis {
    pub nvars: usize,
    /// Distinct generators (as functions), in member-major order.
    pub generators: Vec<Generator>,
    /// Indices into `generators` of a basis of the span.
    pub basis: Vec<usize>,
    /// Pivot points, one per basis element.
    pub points: Vec<u64>,
    gen_bits: Vec<Vec<u64>>,
    vars_in_span: Vec<bool>,
}

fn bit(bits: &[u64], p: usize) -> bool {
    bits[p / 64] >> (p % 64) & 1 == 1
}

fn var_bits(nvars: usize, j: usize) -> Vec<u64> {
    let size = 1usize << nvars;
    let mut out = vec![0u64; size.div_ceil(64)];
    for p in 0..size {
        if p >> j & 1 == 1 {
            out[p / 64] |= 1 << (p % 64);
        }
    }
    out
}

/// Incremental row echelon form modulo a prime over dense vectors.
struct ModpEchelon {
    dim: usize,
    pivots: Vec<(usize, Vec<u64>)>,
}

fn inv_mod(a: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a % PRIME, PRIME - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % PRIME;
        }
        base = base * base % PRIME;
        e >>= 1;
    }
    acc
}

impl ModpEchelon {
    fn reduce(&self, bits: &[u64]) -> Vec<u64> {
        let mut v: Vec<u64> = (0..self.dim).map(|p| bit(bits, p) as u64).collect();
        for (c, row) in &self.pivots {
            let coef = v[*c];
            if coef == 0 {
                continue;
            }
            let neg = PRIME - coef;
            for (x, r) in v.iter_mut().zip(row) {
                if *r != 0 {
                    *x = (*x + neg * r) % PRIME;
                }
            }
        }
        v
    }

    /// Adds the vector if independent; returns its pivot column.
    fn insert(&mut self, bits: &[u64]) -> Option<usize> {
        let mut v = self.reduce(bits);
        let c = v.iter().position(|&x| x != 0)?;
        let inv = inv_mod(v[c]);
        for x in v.iter_mut() {
            *x = *x * inv % PRIME;
        }
        self.pivots.push((c, v));
        Some(c)
    }

    fn contains(&self, bits: &[u64]) -> bool {
        self.reduce(bits).iter().all(|&x| x == 0)
    }
}

impl MomentBasis {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn generator_bits(&self, g: usize) -> &[u64] {
        &self.gen_bits[g]
    }

    pub fn generator_poly(&self, s: &SpanningSet, g: usize) -> Result<MultilinearPoly> {
        let gen = self.generators[g];
        let q = s.members[gen.member].poly.expand(self.nvars)?;
        Ok(match gen.var {
            None => q,
            Some(j) => q.mul_monomial(VarSet::singleton(j)),
        })
    }

    /// Whether `x_j` lies in the span (so it may appear in an objective).
    pub fn var_in_span(&self, j: usize) -> bool {
        self.vars_in_span[j]
    }

    /// Exact basis matrix restricted to the pivot points: row i = basis_i on P.
    fn pivot_matrix(&self) -> Vec<Vec<Rat>> {
        self.basis
            .iter()
            .map(|&g| {
                self.points
                    .iter()
                    .map(|&p| {
                        if bit(&self.gen_bits[g], p as usize) {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Coordinates of every generator in the basis, computed exactly.
    pub fn coords(&self) -> Result<Vec<Vec<Rat>>> {
        let r = self.rank();
        // Solve coords * M = v|_P by inverting M^T once.
        let m = self.pivot_matrix();
        let mut aug: Vec<Vec<Rat>> = (0..r)
            .map(|i| {
                let mut row: Vec<Rat> = (0..r).map(|k| m[k][i].clone()).collect();
                row.extend((0..r).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
                row
            })
            .collect();
        for col in 0..r {
            let piv = (col..r).find(|&i| !aug[i][col].is_zero()).ok_or_else(|| {
                Error::Construction("moment basis is singular on its pivot points".into())
            })?;
            aug.swap(col, piv);
            let inv = aug[col][col].recip();
            for x in aug[col].iter_mut() {
                *x *= &inv;
            }
            let prow = aug[col].clone();
            for (i, row) in aug.iter_mut().enumerate() {
                if i != col && !row[col].is_zero() {
                    let f = row[col].clone();
                    for (x, p) in row.iter_mut().zip(&prow) {
                        *x -= &f * p;
                    }
                }
            }
        }
        let inv_t: Vec<Vec<Rat>> = aug.into_iter().map(|row| row[r..].to_vec()).collect();
        Ok((0..self.generators.len())
            .map(|g| {
                let v: Vec<bool> = self
                    .points
                    .iter()
                    .map(|&p| bit(&self.gen_bits[g], p as usize))
                    .collect();
                (0..r)
                    .map(|k| {
                        v.iter()
                            .enumerate()
                            .filter(|(_, &b)| b)
                            .fold(Rat::zero(), |acc, (i, _)| acc + &inv_t[k][i])
                    })
                    .collect()
            })
            .collect())
    }

    /// Checks the defining invariants exactly over the rationals: the basis
    /// is independent and every generator's coordinate expansion reproduces
    /// its values on the whole hypercube.
    pub fn verify_exact(&self) -> Result<bool> {
        let coords = self.coords()?;
        let size = 1usize << self.nvars;
        for (g, c) in coords.iter().enumerate() {
            for p in 0..size {
                let v: Rat = self
                    .basis
                    .iter()
                    .zip(c)
                    .filter(|(&b, _)| bit(&self.gen_bits[b], p))
                    .fold(Rat::zero(), |acc, (_, x)| acc + x);
                let want = if bit(&self.gen_bits[g], p) {
                    Rat::one()
                } else {
                    Rat::zero()
                };
                if v != want {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Builds T_SA for the spanning set and extracts a basis with pivot points.
pub fn build_moment_basis(s: &SpanningSet, limits: &Limits) -> Result<MomentBasis> {
    let n = s.nvars;
    limits.check_hypercube(n)?;
    let dim = 1usize << n;
    let vars: Vec<Vec<u64>> = (0..n).map(|j| var_bits(n, j)).collect();
    let mut generators = Vec::new();
    let mut gen_bits: Vec<Vec<u64>> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for (mi, m) in s.members.iter().enumerate() {
        let qb = m.poly.point_bits(n);
        let mut push = |var: Option<usize>, bits: Vec<u64>| {
            if bits.iter().all(|&w| w == 0) || seen.contains_key(&bits) {
                return;
            }
            seen.insert(bits.clone(), generators.len());
            generators.push(Generator { member: mi, var });
            gen_bits.push(bits);
        };
        push(None, qb.clone());
        for (j, xb) in vars.iter().enumerate() {
            push(Some(j), qb.iter().zip(xb).map(|(a, b)| a & b).collect());
        }
    }
    if generators.len() > limits.generators {
        return Err(Error::SizeGuard(format!(
            "{} generators exceed the limit of {}; raise it with PITCHFORGE_LIMITS=gen=...",
            generators.len(),
            limits.generators
        )));
    }
    let mut ech = ModpEchelon {
        dim,
        pivots: Vec::new(),
    };
    let mut basis = Vec::new();
    let mut points = Vec::new();
    for (g, bits) in gen_bits.iter().enumerate() {
        if points.len() == dim {
            break;
        }
        if (points.len() + 1) * dim > ELIMINATION_CELLS {
            return Err(Error::SizeGuard(format!(
                "moment basis elimination over 2^{n} points exceeds the memory budget"
            )));
        }
        if let Some(c) = ech.insert(bits) {
            basis.push(g);
            points.push(c as u64);
        }
    }
    let ones = vec![u64::MAX; dim.div_ceil(64)];
    let ones: Vec<u64> = if dim < 64 {
        vec![(1u64 << dim) - 1]
    } else {
        ones
    };
    if !ech.contains(&ones) {
        return Err(Error::Construction(
            "the constant polynomial 1 is not in the span of the generators".into(),
        ));
    }
    let vars_in_span = vars.iter().map(|b| ech.contains(b)).collect();
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by_key(|&i| points[i]);
    let basis = order.iter().map(|&i| basis[i]).collect();
    let points = order.iter().map(|&i| points[i]).collect();
    Ok(MomentBasis {
        nvars: n,
        generators,
        basis,
        points,
        gen_bits,
        vars_in_span,
    })
}

/// Which constraint multiplies a member in a product row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstraintRef {
    /// The i-th constraint of the system (0-based).
    Row { index: usize },
    /// `x_j >= 0` (0-based).
    NonNeg { var: usize },
    /// `1 - x_j >= 0` (0-based), present for packing systems.
    Upper { var: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `y[1] = 1`.
    Normalization,
    /// `y[q] >= 0`.
    Positivity { member: usize },
    /// `y[q * g] >= 0`.
    Product {
        member: usize,
        constraint: ConstraintRef,
    },
}

/// Result of optimizing a linear objective over the relaxation.
#[derive(Clone, Debug)]
pub struct RelaxOutcome {
    pub status: LpStatus,
    /// Minimum of `sum_i c_i y[x_i]` when optimal.
    pub optimum: Option<Rat>,
    pub functional: Option<Functional>,
    /// Lower-bound certificate: nonnegative weights on rows plus a constant.
    pub dual: Option<DualCertificate>,
}

#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub constant: Rat,
    pub weights: Vec<(RowKind, Rat)>,
}

/// A moment functional given by weights on points.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub nvars: usize,
    pub points: Vec<u64>,
    pub weights: Vec<Rat>,
}

impl Functional {
    pub fn eval_fn(&self, f: impl Fn(u64) -> Rat) -> Rat {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| !w.is_zero())
            .fold(Rat::zero(), |acc, (&p, w)| acc + w * f(p))
    }

    pub fn eval_poly(&self, f: &MultilinearPoly) -> Rat {
        self.eval_fn(|p| f.eval_mask(p))
    }

    pub fn eval_delta(&self, d: &DeltaStructured) -> Rat {
        self.eval_fn(|p| {
            if d.eval_mask(p) {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
    }

    /// `(y[x_1], ..., y[x_n])`.
    pub fn projected(&self) -> Vec<Rat> {
        (0..self.nvars)
            .map(|j| {
                self.eval_fn(|p| {
                    if p >> j & 1 == 1 {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
            })
            .collect()
    }

    /// Values on the basis elements of a moment basis.
    pub fn basis_values(&self, basis: &MomentBasis) -> Vec<Rat> {
        basis
            .basis
            .iter()
            .map(|&g| {
                let bits = basis.generator_bits(g);
                self.eval_fn(|p| {
                    if bit(bits, p as usize) {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
            })
            .collect()
    }
}

struct Solver {
    points: Vec<u64>,
    /// kept row indices (into `RelaxationLP::rows`), one per LP column
    columns: Vec<usize>,
    lp: EqLp,
}

pub struct RelaxationLP {
    pub nvars: usize,
    pub basis: MomentBasis,
    pub spanning: SpanningSet,
    pub constraints: Vec<Constraint>,
    pub rows: Vec<RowKind>,
    member_bits: Vec<Vec<u64>>,
    var_bits: Vec<Vec<u64>>,
    /// integer constraint data: (scaled coefficients, scaled constant)
    scaled: Vec<(Vec<i64>, i64)>,
    solver: RefCell<Option<Solver>>,
    cache: RefCell<HashMap<Vec<Rat>, Rat>>,
}

fn scale_constraint(c: &Constraint) -> Result<(Vec<i64>, i64)> {
    let all: Vec<Rat> = c
        .coeffs
        .iter()
        .chain(std::iter::once(&c.constant))
        .cloned()
        .collect();
    let l = denom_lcm(&all);
    let ints: Vec<BigInt> = all
        .iter()
        .map(|x| (x * Rat::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |a, b| a.gcd(b));
    let g = if g.is_zero() { BigInt::one() } else { g };
    let out: Option<Vec<i64>> = ints.iter().map(|x| (x / &g).to_i64()).collect();
    let out = out.ok_or_else(|| Error::Invalid("constraint coefficients too large".into()))?;
    let (coeffs, constant) = out.split_at(c.coeffs.len());
    Ok((coeffs.to_vec(), constant[0]))
}

/// Builds the relaxation: `y[1] = 1`, `y[q] >= 0` and `y[q * g] >= 0` for every
/// member `q` and every constraint `g` of the system, `x_j >= 0` or, for
/// upper-bounded systems, `1 - x_j >= 0`.
pub fn build_sa_lp(
    sys: &dyn LinearSystem,
    s: &SpanningSet,
    limits: &Limits,
) -> Result<RelaxationLP> {
    let n = sys.nvars();
    if s.nvars != n {
        return Err(Error::NvarsMismatch(s.nvars, n));
    }
    let basis = build_moment_basis(s, limits)?;
    let constraints = sys.constraints();
    let scaled = constraints
        .iter()
        .map(scale_constraint)
        .collect::<Result<Vec<_>>>()?;
    // Every product q * g = sum_j c_j (x_j q) + c_0 q is a combination of
    // generators, so all rows below are expressible in the basis.
    let mut rows = vec![RowKind::Normalization];
    for member in 0..s.len() {
        rows.push(RowKind::Positivity { member });
        for index in 0..constraints.len() {
            rows.push(RowKind::Product {
                member,
                constraint: ConstraintRef::Row { index },
            });
        }
        for var in 0..n {
            rows.push(RowKind::Product {
                member,
                constraint: ConstraintRef::NonNeg { var },
            });
        }
        if sys.upper_bounded() {
            for var in 0..n {
                rows.push(RowKind::Product {
                    member,
                    constraint: ConstraintRef::Upper { var },
                });
            }
        }
    }
    let member_bits = s.members.iter().map(|m| m.poly.point_bits(n)).collect();
    Ok(RelaxationLP {
        nvars: n,
        basis,
        spanning: s.clone(),
        constraints,
        rows,
        member_bits,
        var_bits: (0..n).map(|j| var_bits(n, j)).collect(),
        scaled,
        solver: RefCell::new(None),
        cache: RefCell::new(HashMap::new()),
    })
}

/// The degree-`d` Sherali-Adams relaxation (members = monomials of degree <= d).
pub fn build_standard_sa(
    sys: &dyn LinearSystem,
    d: usize,
    limits: &Limits,
) -> Result<RelaxationLP> {
    build_sa_lp(sys, &SpanningSet::monomials(sys.nvars(), d), limits)
}

impl RelaxationLP {
    /// Integer value of a row at a point (rows are scaled by positive constants).
    fn row_value_int(&self, row: RowKind, p: u64) -> i64 {
        match row {
            RowKind::Normalization => 1,
            RowKind::Positivity { member } => bit(&self.member_bits[member], p as usize) as i64,
            RowKind::Product { member, constraint } => {
                if !bit(&self.member_bits[member], p as usize) {
                    return 0;
                }
                match constraint {
                    ConstraintRef::NonNeg { var } => (p >> var & 1) as i64,
                    ConstraintRef::Upper { var } => 1 - (p >> var & 1) as i64,
                    ConstraintRef::Row { index } => {
                        let (c, c0) = &self.scaled[index];
                        c0 + c
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| p >> j & 1 == 1)
                            .map(|(_, v)| v)
                            .sum::<i64>()
                    }
                }
            }
        }
    }

    /// Exact (unscaled) value of a row's polynomial at a point.
    pub fn row_value(&self, row: RowKind, p: u64) -> Rat {
        match row {
            RowKind::Product {
                member,
                constraint: ConstraintRef::Row { index },
            } => {
                if bit(&self.member_bits[member], p as usize) {
                    self.constraints[index].eval_mask(p)
                } else {
                    Rat::zero()
                }
            }
            _ => int(self.row_value_int(row, p)),
        }
    }

    /// Row as a vector over the pivot-point coordinates.
    pub fn row_vector(&self, row: RowKind) -> Vec<Rat> {
        self.basis
            .points
            .iter()
            .map(|&p| self.row_value(row, p))
            .collect()
    }

    /// Whether `q` forces some `x_j = 1` that alone satisfies constraint `g`;
    /// then `q * g` is a nonnegative combination of other rows.
    fn implied(&self, member: usize, index: usize) -> bool {
        let (c, c0) = &self.scaled[index];
        if c.iter().any(|&v| v < 0) {
            return false;
        }
        let qb = &self.member_bits[member];
        (0..self.nvars).any(|j| {
            c[j] > 0 && c[j] + c0 >= 0 && qb.iter().zip(&self.var_bits[j]).all(|(q, x)| q & !x == 0)
        })
    }

    /// Kept rows for a point set: drops rows that vanish there, rows implied
    /// by others and positive multiples of earlier rows.
    fn presolve(&self, points: &[u64]) -> (Vec<usize>, Vec<SparseCol>) {
        let mut kept = Vec::new();
        let mut cols = Vec::new();
        let mut seen: HashMap<SparseCol, ()> = HashMap::new();
        for (k, &row) in self.rows.iter().enumerate() {
            if row == RowKind::Normalization {
                continue;
            }
            if let RowKind::Product {
                member,
                constraint: ConstraintRef::Row { index },
            } = row
            {
                if self.implied(member, index) {
                    continue;
                }
            }
            let col: SparseCol = points
                .iter()
                .enumerate()
                .filter_map(|(i, &p)| {
                    let v = self.row_value_int(row, p);
                    (v != 0).then_some((i as u32, v))
                })
                .collect();
            if col.is_empty() {
                continue;
            }
            let g = col.iter().fold(0i64, |a, &(_, v)| a.gcd(&v));
            let key: SparseCol = col.iter().map(|&(i, v)| (i, v / g)).collect();
            if seen.insert(key, ()).is_some() {
                continue;
            }
            kept.push(k);
            cols.push(col);
        }
        (kept, cols)
    }

    fn make_solver(&self, points: Vec<u64>) -> Solver {
        let (columns, mut cols) = self.presolve(&points);
        let ones: SparseCol = (0..points.len() as u32).map(|i| (i, 1)).collect();
        cols.push(ones.clone());
        cols.push(ones.into_iter().map(|(i, v)| (i, -v)).collect());
        let mut cost = vec![0i64; cols.len()];
        let k = columns.len();
        cost[k] = -1;
        cost[k + 1] = 1;
        Solver {
            lp: EqLp::new(points.len(), cols, cost),
            points,
            columns,
        }
    }

    /// Number of LP columns after presolve (for reporting).
    pub fn presolved_rows(&self) -> usize {
        self.ensure_solver();
        self.solver
            .borrow()
            .as_ref()
            .map(|s| s.columns.len())
            .unwrap_or(0)
    }

    fn ensure_solver(&self) {
        if self.solver.borrow().is_none() {
            *self.solver.borrow_mut() = Some(self.make_solver(self.basis.points.clone()));
        }
    }

    /// Minimizes `sum_i c_i y[x_i]` over the relaxation.
    pub fn optimize(&self, objective: &[Rat]) -> Result<RelaxOutcome> {
        if objective.len() != self.nvars {
            return Err(Error::NvarsMismatch(objective.len(), self.nvars));
        }
        for (j, c) in objective.iter().enumerate() {
            if !c.is_zero() && !self.basis.var_in_span(j) {
                return Err(Error::Invalid(format!(
                    "x{} is outside the span of the relaxation",
                    j + 1
                )));
            }
        }
        self.ensure_solver();
        let mut guard = self.solver.borrow_mut();
        let solver = guard.as_mut().expect("solver initialized");
        if let Some(out) = self.solve_with(solver, objective, true)? {
            return Ok(out);
        }
        // The pivot points were not exact for this objective (a modular
        // accident); fall back to the full hypercube, which always is.
        let full: Vec<u64> = (0..1u64 << self.nvars).collect();
        *solver = self.make_solver(full);
        self.solve_with(solver, objective, false)?
            .ok_or_else(|| Error::Lp("certificate check failed on the full hypercube".into()))
    }

    fn solve_with(
        &self,
        solver: &mut Solver,
        objective: &[Rat],
        warm: bool,
    ) -> Result<Option<RelaxOutcome>> {
        let l = Rat::from_integer(denom_lcm(objective));
        let cvals: Vec<Rat> = (0..1u64 << self.nvars)
            .map(|p| {
                objective
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| p >> j & 1 == 1)
                    .fold(Rat::zero(), |a, (_, c)| a + c)
                    * &l
            })
            .collect();
        let rhs: Vec<BigInt> = solver
            .points
            .iter()
            .map(|&p| cvals[p as usize].to_integer())
            .collect();
        let sol = if warm {
            solver.lp.resolve(&rhs)
        } else {
            solver.lp.solve(&rhs)
        };
        let full = solver.points.len() == 1usize << self.nvars;
        match sol.status {
            EqStatus::Optimal => {}
            // the dual form is infeasible: the relaxation is unbounded
            EqStatus::Infeasible if full => {
                return Ok(Some(RelaxOutcome {
                    status: LpStatus::Unbounded,
                    optimum: None,
                    functional: None,
                    dual: None,
                }))
            }
            EqStatus::Unbounded if full => {
                return Ok(Some(RelaxOutcome {
                    status: LpStatus::Infeasible,
                    optimum: None,
                    functional: None,
                    dual: None,
                }))
            }
            _ => return Ok(None),
        }
        let k = solver.columns.len();
        let mut t = Rat::zero();
        let mut weights = Vec::new();
        for (col, x) in &sol.basic {
            if *col == k {
                t += x;
            } else if *col == k + 1 {
                t -= x;
            } else if !x.is_zero() {
                weights.push((solver.columns[*col], x.clone()));
            }
        }
        // certify c * L = t + sum_k w_k row_k (scaled rows) on every point
        let ok = (0..1u64 << self.nvars).all(|p| {
            let lhs = weights.iter().fold(t.clone(), |acc, (row, w)| {
                let v = self.row_value_int(self.rows[*row], p);
                if v == 0 {
                    acc
                } else {
                    acc + w * int(v)
                }
            });
            lhs == cvals[p as usize]
        });
        if !ok {
            return Ok(None);
        }
        let optimum = -sol.value / &l;
        let z: Vec<Rat> = sol.multipliers.iter().map(|m| -m).collect();
        debug_assert_eq!(t.clone() / &l, optimum);
        // unscale the row weights: scaled row = s * row with s > 0
        let dual_weights = weights
            .into_iter()
            .map(|(row, w)| {
                let kind = self.rows[row];
                let scale = self.row_scale(kind);
                (kind, w * scale / &l)
            })
            .collect();
        Ok(Some(RelaxOutcome {
            status: LpStatus::Optimal,
            optimum: Some(optimum.clone()),
            functional: Some(Functional {
                nvars: self.nvars,
                points: solver.points.clone(),
                weights: z,
            }),
            dual: Some(DualCertificate {
                constant: optimum,
                weights: dual_weights,
            }),
        }))
    }

    /// Ratio (integer row value) / (exact row value), positive.
    fn row_scale(&self, row: RowKind) -> Rat {
        match row {
            RowKind::Product {
                constraint: ConstraintRef::Row { index },
                ..
            } => {
                let c = &self.constraints[index];
                let (sc, s0) = &self.scaled[index];
                if !c.constant.is_zero() {
                    int(*s0) / &c.constant
                } else {
                    let j = sc.iter().position(|&v| v != 0).expect("nonzero constraint");
                    int(sc[j]) / &c.coeffs[j]
                }
            }
            _ => Rat::one(),
        }
    }

    /// Minimum of the inequality's slack over the relaxation (covering:
    /// `a.y - a0`, packing: `a0 - a.y`); nonnegative means it is satisfied.
    pub fn check_inequality(&self, ineq: &LinearInequality) -> Result<Rat> {
        if ineq.nvars() != self.nvars {
            return Err(Error::NvarsMismatch(ineq.nvars(), self.nvars));
        }
        let objective: Vec<Rat> = match ineq.sense {
            Sense::Covering => ineq.coeffs.clone(),
            Sense::Packing => ineq.coeffs.iter().map(|c| -c).collect(),
        };
        let cached = self.cache.borrow().get(&objective).cloned();
        let opt = match cached {
            Some(v) => v,
            None => {
                let out = self.optimize(&objective)?;
                let v = out
                    .optimum
                    .ok_or_else(|| Error::Lp(format!("relaxation is {:?}", out.status)))?;
                self.cache.borrow_mut().insert(objective, v.clone());
                v
            }
        };
        Ok(match ineq.sense {
            Sense::Covering => opt - &ineq.rhs,
            Sense::Packing => &ineq.rhs + opt,
        })
    }

    /// Checks that a functional satisfies every row (not only the kept ones).
    pub fn is_feasible_functional(&self, y: &Functional) -> bool {
        self.rows.iter().all(|&row| {
            let v = y.eval_fn(|p| self.row_value(row, p));
            match row {
                RowKind::Normalization => v.is_one(),
                _ => !v.is_negative(),
            }
        })
    }

    /// The functional of a 0/1 point: `y[f] = f(point)`.
    pub fn point_functional(&self, point: u64) -> Functional {
        Functional {
            nvars: self.nvars,
            points: vec![point],
            weights: vec![Rat::one()],
        }
    }

    fn row_label(&self, row: RowKind) -> String {
        match row {
            RowKind::Normalization => "norm".into(),
            RowKind::Positivity { member } => format!("pos_q{}", member + 1),
            RowKind::Product {
                member,
                constraint: ConstraintRef::Row { index },
            } => {
                format!("prod_q{}_g{}", member + 1, index + 1)
            }
            RowKind::Product {
                member,
                constraint: ConstraintRef::NonNeg { var },
            } => {
                format!("prod_q{}_x{}", member + 1, var + 1)
            }
            RowKind::Product {
                member,
                constraint: ConstraintRef::Upper { var },
            } => {
                format!("prod_q{}_u{}", member + 1, var + 1)
            }
        }
    }

    fn point_label(&self, p: u64) -> String {
        format!("z{}", VarSet(p))
    }

    /// Self-describing JSON dump: coordinates, every row, its sense.
    pub fn to_json(&self) -> serde_json::Value {
        let coords: Vec<String> = self
            .basis
            .points
            .iter()
            .map(|&p| self.point_label(p))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|&row| {
                let (sense, rhs) = match row {
                    RowKind::Normalization => ("=", "1"),
                    _ => (">=", "0"),
                };
                serde_json::json!({
                    "label": self.row_label(row),
                    "coeffs": self.row_vector(row).iter().map(fmt_rat).collect::<Vec<_>>(),
                    "sense": sense,
                    "rhs": rhs,
                })
            })
            .collect();
        let objective_hooks: Vec<Vec<String>> = (0..self.nvars)
            .map(|j| {
                self.basis
                    .points
                    .iter()
                    .map(|&p| {
                        if p >> j & 1 == 1 {
                            "1".to_string()
                        } else {
                            "0".to_string()
                        }
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "nvars": self.nvars,
            "spanning_set_size": self.spanning.len(),
            "generators": self.basis.generators.len(),
            "coordinates": coords,
            "coordinate_meaning": "z{S} is the weight of the point whose true variables are S; y[f] = sum_S z{S} f(S)",
            "objective_hooks": objective_hooks,
            "rows": rows,
        })
    }

    /// Plain-text LP export; see the README for the format.
    pub fn to_lp_text(&self, objective: &[Rat]) -> String {
        let labels: Vec<String> = self
            .basis
            .points
            .iter()
            .map(|&p| self.point_label(p))
            .collect();
        let render = |coeffs: &[Rat]| -> String {
            let terms: Vec<String> = coeffs
                .iter()
                .zip(&labels)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, l)| {
                    if c.is_negative() {
                        format!("- {} {l}", fmt_rat(&-c))
                    } else {
                        format!("+ {} {l}", fmt_rat(c))
                    }
                })
                .collect();
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join(" ")
            }
        };
        let obj: Vec<Rat> = self
            .basis
            .points
            .iter()
            .map(|&p| {
                objective
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| p >> j & 1 == 1)
                    .fold(Rat::zero(), |a, (_, c)| a + c)
            })
            .collect();
        let mut out = String::from("minimize\n");
        out += &format!("  obj: {}\n", render(&obj));
        out += "subject to\n";
        for &row in &self.rows {
            let v = self.row_vector(row);
            let tail = if row == RowKind::Normalization {
                "= 1"
            } else {
                ">= 0"
            };
            out += &format!("  {}: {} {tail}\n", self.row_label(row), render(&v));
        }
        out += "free\n";
        out += &format!("  {}\n", labels.join(" "));
        out += "end\n";
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_full_circulant, gen_symmetric_knapsack, CoverInstance};
    use crate::rat::frac;
    use crate::spanning::build_spanning_set;

    fn ones(n: usize) -> Vec<Rat> {
        vec![Rat::one(); n]
    }

    #[test]
    fn unit_set_basis_has_affine_generators() {
        let b = build_moment_basis(&SpanningSet::unit(2), &Limits::default()).unwrap();
        assert_eq!(b.generators.len(), 3);
        assert_eq!(b.rank(), 3);
        assert!(b.verify_exact().unwrap());
    }

    #[test]
    fn degree_one_monomials_span_everything_for_two_vars() {
        let b = build_moment_basis(&SpanningSet::monomials(2, 1), &Limits::default()).unwrap();
        assert_eq!(b.rank(), 4);
        assert!(b.verify_exact().unwrap());
    }

    #[test]
    fn partition_of_unity_creates_dependency() {
        // 1 together with the cardinality indicators summing to 1
        let mut s = SpanningSet::cardinality(3);
        s.members.insert(0, SpanningSet::unit(3).members[0].clone());
        let b = build_moment_basis(&s, &Limits::default()).unwrap();
        assert!(b.rank() < b.generators.len());
        assert!(b.verify_exact().unwrap());
    }

    #[test]
    fn plain_lp_on_fc4() {
        let inst = gen_full_circulant(4).unwrap();
        let lp = build_sa_lp(&inst, &SpanningSet::unit(4), &Limits::default()).unwrap();
        let out = lp.optimize(&ones(4)).unwrap();
        assert_eq!(out.optimum, Some(frac(4, 3)));
        let y = out.functional.unwrap();
        assert!(lp.is_feasible_functional(&y));
        assert_eq!(y.projected().iter().sum::<Rat>(), frac(4, 3));
    }

    #[test]
    fn zero_objective_and_tautology() {
        let inst = gen_full_circulant(4).unwrap();
        let lp = build_sa_lp(&inst, &SpanningSet::unit(4), &Limits::default()).unwrap();
        assert_eq!(
            lp.optimize(&vec![Rat::zero(); 4]).unwrap().optimum,
            Some(Rat::zero())
        );
        let taut = LinearInequality::covering(vec![Rat::zero(); 4], Rat::zero());
        assert_eq!(lp.check_inequality(&taut).unwrap(), Rat::zero());
    }

    #[test]
    fn negative_objective_is_unbounded_without_upper_bounds() {
        let inst = gen_full_circulant(4).unwrap();
        let lp = build_sa_lp(&inst, &SpanningSet::unit(4), &Limits::default()).unwrap();
        let out = lp.optimize(&[int(-1), int(0), int(0), int(0)]).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn pitch_two_set_closes_the_gap_on_small_circulants() {
        for n in 4..=6 {
            let inst = gen_full_circulant(n).unwrap();
            let s = build_spanning_set(&inst, 2, &Limits::default()).unwrap();
            let lp = build_sa_lp(&inst, &s, &Limits::default()).unwrap();
            let out = lp.optimize(&ones(n)).unwrap();
            assert_eq!(out.optimum, Some(int(2)), "n = {n}");
            assert!(lp.is_feasible_functional(out.functional.as_ref().unwrap()));
        }
    }

    #[test]
    fn dual_certificate_reproduces_objective() {
        let inst = gen_full_circulant(5).unwrap();
        let s = build_spanning_set(&inst, 2, &Limits::default()).unwrap();
        let lp = build_sa_lp(&inst, &s, &Limits::default()).unwrap();
        let c = vec![int(1), int(2), int(1), int(3), int(1)];
        let out = lp.optimize(&c).unwrap();
        let dual = out.dual.unwrap();
        for p in 0..32u64 {
            let lhs = dual
                .weights
                .iter()
                .fold(dual.constant.clone(), |acc, (row, w)| {
                    acc + w * lp.row_value(*row, p)
                });
            let rhs: Rat = (0..5)
                .filter(|j| p >> j & 1 == 1)
                .map(|j| c[j].clone())
                .sum();
            assert_eq!(lhs, rhs);
            assert!(dual.weights.iter().all(|(_, w)| !w.is_negative()));
        }
    }

    #[test]
    fn integer_points_are_feasible_functionals() {
        let inst =
            CoverInstance::new(4, vec![VarSet(0b0011), VarSet(0b0110), VarSet(0b1100)]).unwrap();
        let s = build_spanning_set(&inst, 2, &Limits::default()).unwrap();
        let lp = build_sa_lp(&inst, &s, &Limits::default()).unwrap();
        for p in inst.feasible_points(&Limits::default()).unwrap() {
            assert!(lp.is_feasible_functional(&lp.point_functional(p)));
        }
    }

    #[test]
    fn knapsack_unit_rows() {
        let k = gen_symmetric_knapsack(4, frac(3, 2)).unwrap();
        let lp = build_sa_lp(&k, &SpanningSet::unit(4), &Limits::default()).unwrap();
        // norm, y[1] >= 0, y[1*g] >= 0 and four y[x_j] >= 0
        assert_eq!(lp.rows.len(), 1 + 1 + 1 + 4);
        assert_eq!(lp.optimize(&ones(4)).unwrap().optimum, Some(frac(3, 2)));
        let sym = build_sa_lp(&k, &SpanningSet::cardinality(4), &Limits::default()).unwrap();
        assert_eq!(sym.optimize(&ones(4)).unwrap().optimum, Some(int(2)));
    }

    #[test]
    fn full_degree_sa_is_the_integer_hull() {
        let inst =
            CoverInstance::new(4, vec![VarSet(0b0011), VarSet(0b0110), VarSet(0b1101)]).unwrap();
        let lp = build_standard_sa(&inst, 4, &Limits::default()).unwrap();
        let c = vec![int(3), int(1), int(2), int(2)];
        let best = inst
            .feasible_points(&Limits::default())
            .unwrap()
            .into_iter()
            .map(|p| {
                (0..4)
                    .filter(|j| p >> j & 1 == 1)
                    .map(|j| c[j].clone())
                    .sum::<Rat>()
            })
            .min()
            .unwrap();
        assert_eq!(lp.optimize(&c).unwrap().optimum, Some(best));
    }

    #[test]
    fn text_export_lists_every_row() {
        let inst = gen_full_circulant(4).unwrap();
        let lp = build_sa_lp(&inst, &SpanningSet::unit(4), &Limits::default()).unwrap();
        let text = lp.to_lp_text(&ones(4));
        assert!(text.starts_with("minimize\n"));
        assert_eq!(
            text.lines()
                .filter(|l| l.contains(">= 0") || l.contains("= 1"))
                .count(),
            lp.rows.len()
        );
        let json = lp.to_json();
        assert_eq!(json["rows"].as_array().unwrap().len(), lp.rows.len());
    }

    #[test]
    fn packing_relaxation_is_bounded_by_the_unit_box() {
        use crate::instances::{PackingInstance, PackingRow};
        let row = PackingRow {
            coeffs: vec![int(1), int(0)],
            bound: int(1),
        };
        let p = PackingInstance::new(2, vec![row]).unwrap();
        let neg = vec![-Rat::one(); 2];
        for d in 0..=2 {
            let lp = build_standard_sa(&p, d, &Limits::default()).unwrap();
            let out = lp.optimize(&neg).unwrap();
            assert_eq!(out.status, LpStatus::Optimal, "d={d}");
            assert_eq!(out.optimum, Some(int(-2)), "d={d}");
        }
    }
}
