//! Covering, packing and symmetric-knapsack systems, with brute-force oracles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::poly::{MultilinearPoly, PartialAssignment};
use crate::rat::{int, Rat};
use crate::varset::{VarSet, MAX_VARS};

/// An affine constraint `sum_j coeffs[j] x_j + constant >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
}

impl Constraint {
    pub fn eval_mask(&self, point: u64) -> Rat {
        let mut v = self.constant.clone();
        for (j, c) in self.coeffs.iter().enumerate() {
            if point >> j & 1 == 1 {
                v += c;
            }
        }
        v
    }

    pub fn to_poly(&self) -> MultilinearPoly {
        MultilinearPoly::affine(&self.coeffs, self.constant.clone())
    }
}

/// A system of affine constraints over binary variables.
pub trait LinearSystem {
    fn nvars(&self) -> usize;
    /// Constraints in `g(x) >= 0` form, in row order.
    fn constraints(&self) -> Vec<Constraint>;
    fn is_feasible(&self, point: u64) -> bool;
    /// Whether the LP relaxation carries `x_j <= 1` for every variable.
    fn upper_bounded(&self) -> bool {
        false
    }

    /// All feasible 0/1 points as masks, in increasing mask order.
    fn feasible_points(&self, limits: &Limits) -> Result<Vec<u64>> {
        limits.check_hypercube(self.nvars())?;
        Ok((0..1u64 << self.nvars())
            .filter(|&p| self.is_feasible(p))
            .collect())
    }
}

/// Set cover system: for every row, `sum_{j in row} x_j >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoverInstance {
    nvars: usize,
    rows: Vec<VarSet>,
}

/// Result of restricting a cover instance; `origin[i]` is the index of the
/// original row that produced row `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub instance: CoverInstance,
    pub origin: Vec<usize>,
}

impl CoverInstance {
    pub fn new(nvars: usize, rows: Vec<VarSet>) -> Result<Self> {
        if nvars > MAX_VARS {
            return Err(Error::SizeGuard(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.is_empty() {
                return Err(Error::EmptyRow(i));
            }
            crate::poly::check_range(*r, nvars)?;
        }
        Ok(CoverInstance { nvars, rows })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rows(&self) -> &[VarSet] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Drops every row whose support contains another row's support
    /// (the first of several equal rows is kept).
    pub fn minimalize(&self) -> CoverInstance {
        let keep = minimal_rows(&self.rows);
        CoverInstance {
            nvars: self.nvars,
            rows: keep.iter().map(|&i| self.rows[i]).collect(),
        }
    }

    pub fn is_minimal(&self) -> bool {
        minimal_rows(&self.rows).len() == self.rows.len()
    }

    /// Removes rows meeting the true set, deletes the false set from the
    /// remaining supports and minimalizes. An emptied row is an error.
    pub fn restrict(&self, sigma: &PartialAssignment) -> Result<Restriction> {
        crate::poly::check_range(sigma.fixed(), self.nvars)?;
        let mut rows = Vec::new();
        let mut origin = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if !r.is_disjoint(sigma.trueset()) {
                continue;
            }
            let rest = *r - sigma.falseset();
            if rest.is_empty() {
                return Err(Error::EmptyRow(i));
            }
            rows.push(rest);
            origin.push(i);
        }
        let keep = minimal_rows(&rows);
        Ok(Restriction {
            instance: CoverInstance {
                nvars: self.nvars,
                rows: keep.iter().map(|&i| rows[i]).collect(),
            },
            origin: keep.iter().map(|&i| origin[i]).collect(),
        })
    }

    /// Union of pairwise intersections of the chosen rows.
    pub fn overlap_set(&self, rows: &[usize]) -> Result<VarSet> {
        for &i in rows {
            if i >= self.rows.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    bound: self.rows.len(),
                });
            }
        }
        let mut v = VarSet::EMPTY;
        for (a, &i) in rows.iter().enumerate() {
            for &j in &rows[a + 1..] {
                if i != j {
                    v = v | (self.rows[i] & self.rows[j]);
                }
            }
        }
        Ok(v)
    }
}

fn minimal_rows(rows: &[VarSet]) -> Vec<usize> {
    (0..rows.len())
        .filter(|&i| {
            !rows
                .iter()
                .enumerate()
                .any(|(j, r)| j != i && r.is_subset(rows[i]) && (*r != rows[i] || j < i))
        })
        .collect()
}

impl LinearSystem for CoverInstance {
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn constraints(&self) -> Vec<Constraint> {
        self.rows
            .iter()
            .map(|r| Constraint {
                coeffs: (0..self.nvars)
                    .map(|j| {
                        if r.contains(j) {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect(),
                constant: -Rat::one(),
            })
            .collect()
    }

    fn is_feasible(&self, point: u64) -> bool {
        self.rows.iter().all(|r| r.0 & point != 0)
    }
}

/// Single-row system `sum_j x_j >= b` with rational `b > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KnapsackInstance {
    nvars: usize,
    bound: Rat,
}

impl KnapsackInstance {
    pub fn new(nvars: usize, bound: Rat) -> Result<Self> {
        if !bound.is_positive() {
            return Err(Error::Invalid("knapsack bound must be positive".into()));
        }
        if nvars > MAX_VARS {
            return Err(Error::SizeGuard(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        Ok(KnapsackInstance { nvars, bound })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn bound(&self) -> &Rat {
        &self.bound
    }

    /// The rounded-up cut `sum_j x_j >= ceil(b)`.
    pub fn ceiling_cut(&self) -> LinearInequality {
        LinearInequality::covering(vec![Rat::one(); self.nvars], self.bound.ceil())
    }
}

impl LinearSystem for KnapsackInstance {
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn constraints(&self) -> Vec<Constraint> {
        vec![Constraint {
            coeffs: vec![Rat::one(); self.nvars],
            constant: -self.bound.clone(),
        }]
    }

    fn is_feasible(&self, point: u64) -> bool {
        int(point.count_ones() as i64) >= self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PackingRow {
    pub coeffs: Vec<Rat>,
    pub bound: Rat,
}

impl PackingRow {
    pub fn load(&self, point: u64) -> Rat {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(j, _)| point >> j & 1 == 1)
            .fold(Rat::zero(), |acc, (_, c)| acc + c)
    }
}

/// Packing system `A x <= b` with nonnegative data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PackingInstance {
    nvars: usize,
    rows: Vec<PackingRow>,
}

impl PackingInstance {
    pub fn new(nvars: usize, rows: Vec<PackingRow>) -> Result<Self> {
        if nvars > MAX_VARS {
            return Err(Error::SizeGuard(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.coeffs.len() != nvars {
                return Err(Error::Invalid(format!(
                    "packing row {i} has {} coefficients, expected {nvars}",
                    r.coeffs.len()
                )));
            }
            if r.coeffs.iter().any(|c| c.is_negative()) || r.bound.is_negative() {
                return Err(Error::NegativeData(format!("packing row {i}")));
            }
        }
        Ok(PackingInstance { nvars, rows })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rows(&self) -> &[PackingRow] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

impl LinearSystem for PackingInstance {
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn upper_bounded(&self) -> bool {
        true
    }

    fn constraints(&self) -> Vec<Constraint> {
        self.rows
            .iter()
            .map(|r| Constraint {
                coeffs: r.coeffs.iter().map(|c| -c).collect(),
                constant: r.bound.clone(),
            })
            .collect()
    }

    fn is_feasible(&self, point: u64) -> bool {
        self.rows.iter().all(|r| r.load(point) <= r.bound)
    }
}

/// Any of the supported systems, as read from an instance file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Cover(CoverInstance),
    Packing(PackingInstance),
    Knapsack(KnapsackInstance),
}

impl Instance {
    pub fn nvars(&self) -> usize {
        self.system().nvars()
    }

    pub fn system(&self) -> &dyn LinearSystem {
        match self {
            Instance::Cover(c) => c,
            Instance::Packing(p) => p,
            Instance::Knapsack(k) => k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `a^T x >= a0`
    Covering,
    /// `a^T x <= a0`
    Packing,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearInequality {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
    pub sense: Sense,
}

impl LinearInequality {
    pub fn covering(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        LinearInequality {
            coeffs,
            rhs,
            sense: Sense::Covering,
        }
    }

    pub fn packing(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        LinearInequality {
            coeffs,
            rhs,
            sense: Sense::Packing,
        }
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn support(&self) -> VarSet {
        VarSet::from_indices(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, _)| j),
        )
    }

    /// `a^T x` at a 0/1 point.
    pub fn lhs(&self, point: u64) -> Rat {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(j, _)| point >> j & 1 == 1)
            .fold(Rat::zero(), |acc, (_, c)| acc + c)
    }

    /// Slack at a point: `a^T x - a0` (covering) or `a0 - a^T x` (packing).
    pub fn slack(&self, point: u64) -> Rat {
        match self.sense {
            Sense::Covering => self.lhs(point) - &self.rhs,
            Sense::Packing => &self.rhs - self.lhs(point),
        }
    }

    pub fn is_satisfied(&self, point: u64) -> bool {
        !self.slack(point).is_negative()
    }

    /// The polynomial that must be nonnegative: the slack as a polynomial.
    pub fn target_form(&self) -> MultilinearPoly {
        let p = MultilinearPoly::affine(&self.coeffs, -self.rhs.clone());
        match self.sense {
            Sense::Covering => p,
            Sense::Packing => -&p,
        }
    }

    fn check_nonneg(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| c.is_negative()) {
            return Err(Error::NegativeData(
                "pitch needs nonnegative coefficients".into(),
            ));
        }
        Ok(())
    }

    /// Support indices sorted by coefficient, ties broken by index.
    pub fn support_by_coefficient(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.support().iter().collect();
        idx.sort_by(|&i, &j| self.coeffs[i].cmp(&self.coeffs[j]).then(i.cmp(&j)));
        idx
    }

    /// Covering: least number of smallest nonzero coefficients whose sum
    /// reaches `a0`. Packing: greatest number whose sum stays within `a0`.
    pub fn pitch(&self) -> Result<usize> {
        self.check_nonneg()?;
        let order = self.support_by_coefficient();
        match self.sense {
            Sense::Covering => {
                if !self.rhs.is_positive() {
                    return Ok(0);
                }
                let mut sum = Rat::zero();
                for (k, &j) in order.iter().enumerate() {
                    sum += &self.coeffs[j];
                    if sum >= self.rhs {
                        return Ok(k + 1);
                    }
                }
                Err(Error::NoFinitePitch)
            }
            Sense::Packing => {
                if self.rhs.is_negative() {
                    return Err(Error::Invalid(
                        "packing inequality with negative right-hand side".into(),
                    ));
                }
                let mut sum = Rat::zero();
                let mut pitch = 0;
                for &j in &order {
                    sum += &self.coeffs[j];
                    if sum > self.rhs {
                        break;
                    }
                    pitch += 1;
                }
                Ok(pitch)
            }
        }
    }

    /// Scales to coprime integers (positive scaling only).
    pub fn normalized(&self) -> LinearInequality {
        let den = crate::rat::denom_lcm(self.coeffs.iter().chain([&self.rhs]));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .chain([&self.rhs])
            .map(|c| (c * Rat::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let scaled: Vec<Rat> = ints.iter().map(|v| Rat::from_integer(v / &g)).collect();
        let (rhs, coeffs) = scaled.split_last().unwrap();
        LinearInequality {
            coeffs: coeffs.to_vec(),
            rhs: rhs.clone(),
            sense: self.sense,
        }
    }
}

/// Whether every feasible point satisfies the inequality.
pub fn is_valid(ineq: &LinearInequality, sys: &dyn LinearSystem, limits: &Limits) -> Result<bool> {
    Ok(violating_point(ineq, sys, limits)?.is_none())
}

/// A feasible point violating the inequality, if any.
pub fn violating_point(
    ineq: &LinearInequality,
    sys: &dyn LinearSystem,
    limits: &Limits,
) -> Result<Option<u64>> {
    if ineq.nvars() != sys.nvars() {
        return Err(Error::NvarsMismatch(ineq.nvars(), sys.nvars()));
    }
    limits.check_hypercube(sys.nvars())?;
    Ok((0..1u64 << sys.nvars()).find(|&p| sys.is_feasible(p) && !ineq.is_satisfied(p)))
}

/// All valid inequalities with integer coefficients in `[0, coef_bound]`,
/// integer right-hand side in `[0, n * coef_bound]` and pitch at most
/// `max_pitch`, deduplicated up to positive scaling.
pub fn enumerate_valid_inequalities(
    sys: &dyn LinearSystem,
    sense: Sense,
    max_pitch: usize,
    coef_bound: u32,
    limits: &Limits,
) -> Result<Vec<LinearInequality>> {
    let n = sys.nvars();
    let feasible = sys.feasible_points(limits)?;
    let base = coef_bound as u64 + 1;
    let total = base
        .checked_pow(n as u32)
        .filter(|t| *t <= 50_000_000)
        .ok_or_else(|| Error::SizeGuard("coefficient grid too large".into()))?;
    let max_rhs = n as i64 * coef_bound as i64;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let coeffs_i: Vec<i64> = (0..n)
            .map(|_| {
                let d = rest % base;
                rest /= base;
                d as i64
            })
            .collect();
        let value = |p: u64| -> i64 {
            (0..n)
                .filter(|j| p >> j & 1 == 1)
                .map(|j| coeffs_i[j])
                .sum()
        };
        // valid right-hand sides form an interval determined by the extreme feasible value
        let (lo, hi) = match sense {
            Sense::Covering => {
                let m = feasible.iter().map(|&p| value(p)).min().unwrap_or(i64::MAX);
                (0, m.min(max_rhs))
            }
            Sense::Packing => {
                let m = feasible.iter().map(|&p| value(p)).max().unwrap_or(0);
                (m.max(0), max_rhs)
            }
        };
        let coeffs: Vec<Rat> = coeffs_i.iter().map(|&c| int(c)).collect();
        for a0 in lo..=hi {
            let ineq = LinearInequality {
                coeffs: coeffs.clone(),
                rhs: int(a0),
                sense,
            };
            match ineq.pitch() {
                Ok(p) if p <= max_pitch => {}
                _ => continue,
            }
            let key = ineq.normalized();
            if seen.insert(key) {
                out.push(ineq);
            }
        }
    }
    Ok(out)
}

/// Full circulant instance: row i covers every variable except i.
pub fn gen_full_circulant(n: usize) -> Result<CoverInstance> {
    if n < 3 {
        return Err(Error::Invalid("full circulant needs n >= 3".into()));
    }
    let full = VarSet::full(n);
    CoverInstance::new(n, (0..n).map(|i| full - VarSet::singleton(i)).collect())
}

pub fn gen_symmetric_knapsack(n: usize, b: Rat) -> Result<KnapsackInstance> {
    KnapsackInstance::new(n, b)
}

/// Random minimal cover instance; each variable joins each row with
/// probability `density`, and an empty row gets one random variable.
pub fn gen_random_cover(n: usize, m: usize, density: f64, seed: u64) -> Result<CoverInstance> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::Invalid(format!(
            "random cover needs 1 <= n <= {MAX_VARS}"
        )));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Invalid("density must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m)
        .map(|_| {
            let mut r: VarSet = (0..n).filter(|_| rng.gen_bool(density)).collect();
            if r.is_empty() {
                r.insert(rng.gen_range(0..n));
            }
            r
        })
        .collect();
    Ok(CoverInstance::new(n, rows)?.minimalize())
}

/// Random packing instance with integer coefficients in `[0, max_coef]`;
/// each bound lies between the largest coefficient of its row and the row sum.
pub fn gen_random_packing(n: usize, m: usize, max_coef: u32, seed: u64) -> Result<PackingInstance> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::Invalid(format!(
            "random packing needs 1 <= n <= {MAX_VARS}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m)
        .map(|_| {
            let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_coef as i64)).collect();
            let sum: i64 = coeffs.iter().sum();
            let top = coeffs.iter().copied().max().unwrap_or(0);
            let bound = if sum <= top {
                top
            } else {
                rng.gen_range(top..sum)
            };
            PackingRow {
                coeffs: coeffs.into_iter().map(int).collect(),
                bound: int(bound),
            }
        })
        .collect();
    PackingInstance::new(n, rows)
}

/// Converts an integral rational to `i64` when it fits.
pub fn rat_to_i64(r: &Rat) -> Option<i64> {
    r.is_integer().then(|| r.to_integer().to_i64()).flatten()
}
