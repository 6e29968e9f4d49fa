//! Nonnegativity certificates `target = sum_t q_t * (lambda . g + gamma . x + mu)`
//! (mod x_i^2 - x_i) with sum-of-squares multipliers `q_t`, their builders and
//! a symbolic verifier.

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::delta::DeltaStructured;
use crate::error::{Error, Result};
use crate::instances::{
    violating_point, Constraint, CoverInstance, Instance, KnapsackInstance, LinearInequality,
    LinearSystem, PackingInstance, Sense,
};
use crate::limits::Limits;
use crate::poly::{MultilinearPoly, PartialAssignment};
use crate::rat::{ceil, int, is_integral, Rat};
use crate::simplex::{self, LpStatus, RowSense, StandardLP};
use crate::spanning::times_delta;
use crate::varset::VarSet;

/// Nonnegative weights on the system's constraints, on `x_j >= 0` and on 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConicCombo {
    pub lambda: Vec<Rat>,
    pub gamma: Vec<Rat>,
    pub mu: Rat,
}

impl ConicCombo {
    pub fn zero(nrows: usize, nvars: usize) -> Self {
        ConicCombo {
            lambda: vec![Rat::zero(); nrows],
            gamma: vec![Rat::zero(); nvars],
            mu: Rat::zero(),
        }
    }

    pub fn constant(nrows: usize, nvars: usize, mu: Rat) -> Self {
        ConicCombo {
            mu,
            ..ConicCombo::zero(nrows, nvars)
        }
    }

    pub fn is_nonneg(&self) -> bool {
        self.lambda
            .iter()
            .chain(&self.gamma)
            .chain([&self.mu])
            .all(|v| !v.is_negative())
    }

    pub fn to_poly(&self, constraints: &[Constraint], nvars: usize) -> MultilinearPoly {
        let mut p = MultilinearPoly::constant(nvars, self.mu.clone());
        for (l, g) in self.lambda.iter().zip(constraints) {
            if !l.is_zero() {
                p.add_scaled(&g.to_poly(), l);
            }
        }
        for (j, c) in self.gamma.iter().enumerate() {
            if !c.is_zero() {
                p.add_term(VarSet::singleton(j), c.clone());
            }
        }
        p
    }

    /// Value at a 0/1 point.
    pub fn eval_mask(&self, constraints: &[Constraint], point: u64) -> Rat {
        let mut v = self.mu.clone();
        for (l, g) in self.lambda.iter().zip(constraints) {
            if !l.is_zero() {
                v += l * g.eval_mask(point);
            }
        }
        for (j, c) in self.gamma.iter().enumerate() {
            if point >> j & 1 == 1 {
                v += c;
            }
        }
        v
    }
}

/// A sum-of-squares multiplier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Multiplier {
    /// A 0/1-valued delta-structured polynomial; it equals its own square.
    Delta(DeltaStructured),
    /// `root^2`, multilinearized.
    Square(MultilinearPoly),
}

impl Multiplier {
    pub fn expand(&self, nvars: usize) -> Result<MultilinearPoly> {
        match self {
            Multiplier::Delta(d) => d.expand(nvars),
            Multiplier::Square(r) => r.mul(r),
        }
    }

    /// Degree of the polynomial being squared.
    pub fn degree(&self, nvars: usize) -> Result<usize> {
        match self {
            Multiplier::Delta(d) => Ok(d.expand(nvars)?.degree()),
            Multiplier::Square(r) => Ok(r.degree()),
        }
    }

    pub fn eval_mask(&self, point: u64) -> Rat {
        match self {
            Multiplier::Delta(d) => {
                if d.eval_mask(point) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            Multiplier::Square(r) => {
                let v = r.eval_mask(point);
                &v * &v
            }
        }
    }
}

/// Where a term came from; recursion branches nest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    /// Pitch-0 target: the multiplier 1.
    Base,
    First {
        core: Vec<usize>,
    },
    Second {
        core: Vec<usize>,
        trueset: VarSet,
        inner: Box<Source>,
    },
    Third {
        core: Vec<usize>,
        fixed: VarSet,
        prefix: VarSet,
        k: usize,
    },
    Cardinality {
        k: usize,
    },
    Interpolation {
        point: u64,
    },
    TruncatedDelta {
        set: VarSet,
    },
    Residual {
        monomial: VarSet,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub multiplier: Multiplier,
    pub combo: ConicCombo,
    pub source: Source,
}

/// What the certificate proves nonnegative over the feasible 0/1 points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Inequality(LinearInequality),
    Poly(MultilinearPoly),
}

impl Target {
    pub fn form(&self) -> MultilinearPoly {
        match self {
            Target::Inequality(i) => i.target_form(),
            Target::Poly(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub instance: Instance,
    pub target: Target,
    pub terms: Vec<Term>,
    /// Every multiplier (the root, for squares) has degree at most this.
    pub degree_bound: usize,
}

/// Outcome of symbolic verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub valid: bool,
    /// `sum of terms - target`, reduced; zero when the identity holds.
    pub residual: MultilinearPoly,
    pub issues: Vec<String>,
}

impl Certificate {
    pub fn nvars(&self) -> usize {
        self.instance.nvars()
    }

    /// The certificate's addends at a 0/1 point.
    pub fn addends_at(&self, point: u64) -> Vec<Rat> {
        let cons = self.instance.system().constraints();
        self.terms
            .iter()
            .map(|t| t.multiplier.eval_mask(point) * t.combo.eval_mask(&cons, point))
            .collect()
    }
}

/// Expands every term, sums, and compares with the target's form; also
/// checks weight signs, vector lengths and the degree bound.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    let n = cert.nvars();
    let cons = cert.instance.system().constraints();
    let mut issues = Vec::new();
    let mut sum = MultilinearPoly::zero(n);
    for (t, term) in cert.terms.iter().enumerate() {
        let c = &term.combo;
        if c.lambda.len() != cons.len() || c.gamma.len() != n {
            issues.push(format!(
                "term {}: weight vectors have the wrong length",
                t + 1
            ));
            continue;
        }
        if !c.is_nonneg() {
            issues.push(format!("term {}: negative weight", t + 1));
        }
        match term.multiplier.degree(n) {
            Ok(d) if d > cert.degree_bound => issues.push(format!(
                "term {}: multiplier degree {d} exceeds {}",
                t + 1,
                cert.degree_bound
            )),
            Ok(_) => {}
            Err(e) => {
                issues.push(format!("term {}: {e}", t + 1));
                continue;
            }
        }
        let product = term
            .multiplier
            .expand(n)
            .and_then(|m| m.mul(&c.to_poly(&cons, n)));
        match product {
            Ok(p) => sum.add_scaled(&p, &Rat::one()),
            Err(e) => issues.push(format!("term {}: {e}", t + 1)),
        }
    }
    let target = cert.target.form();
    let residual = if target.nvars() == n {
        &sum - &target
    } else {
        issues.push("target and instance have different variable counts".into());
        sum
    };
    if !residual.is_zero() {
        issues.push(format!("residual is not zero: {residual}"));
    }
    VerifyReport {
        valid: issues.is_empty(),
        residual,
        issues,
    }
}

// ---------------------------------------------------------------------------
// Set cover

/// A row subset with the overlap set of its rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Core {
    pub rows: Vec<usize>,
    pub overlap: VarSet,
}

fn covering_target(ineq: &LinearInequality) -> Result<()> {
    if ineq.sense != Sense::Covering {
        return Err(Error::Invalid("expected a covering (>=) inequality".into()));
    }
    if ineq.coeffs.iter().any(|c| c.is_negative()) {
        return Err(Error::NegativeData(
            "inequality coefficients must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// Minimum of `(a.x - a0)` with `x_V = 0` over the box intersected with the
/// core rows (with `V` deleted); `None` if that region is empty.
pub fn core_lp_minimum(
    inst: &CoverInstance,
    ineq: &LinearInequality,
    core: &[usize],
    v: VarSet,
) -> Option<Rat> {
    let n = inst.nvars();
    let mut lp = StandardLP::new(n);
    lp.objective = ineq.coeffs.clone();
    lp.upper = (0..n)
        .map(|j| {
            Some(if v.contains(j) {
                Rat::zero()
            } else {
                Rat::one()
            })
        })
        .collect();
    for &i in core {
        let row = inst.rows()[i] - v;
        lp.add_row(
            (0..n)
                .map(|j| {
                    if row.contains(j) {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect(),
            RowSense::Ge,
            Rat::one(),
        );
    }
    let res = simplex::solve(&lp);
    (res.status == LpStatus::Optimal).then(|| res.optimum - &ineq.rhs)
}

/// Whether the three core conditions hold for `core`.
pub fn is_core(inst: &CoverInstance, ineq: &LinearInequality, core: &[usize]) -> Result<bool> {
    let supp = ineq.support();
    if core
        .iter()
        .any(|&i| i >= inst.num_rows() || !inst.rows()[i].is_subset(supp))
    {
        return Ok(false);
    }
    let v = inst.overlap_set(core)?;
    if inst.rows().iter().any(|r| r.is_subset(v)) {
        return Ok(false);
    }
    Ok(core_lp_minimum(inst, ineq, core, v).is_some_and(|m| !m.is_negative()))
}

/// Smallest, then lexicographically first, row subset satisfying the core
/// conditions (rows inside the support, validity over the core region with
/// the overlap set zeroed, and feasibility of the instance with it zeroed).
pub fn find_core(inst: &CoverInstance, ineq: &LinearInequality) -> Result<Core> {
    covering_target(ineq)?;
    let pitch = ineq.pitch()?;
    let supp = ineq.support();
    let eligible: Vec<usize> = (0..inst.num_rows())
        .filter(|&i| inst.rows()[i].is_subset(supp))
        .collect();
    for size in 0..=pitch.min(eligible.len()) {
        for rows in eligible.iter().copied().combinations(size) {
            let v = inst.overlap_set(&rows)?;
            if inst.rows().iter().any(|r| r.is_subset(v)) {
                continue;
            }
            if core_lp_minimum(inst, ineq, &rows, v).is_some_and(|m| !m.is_negative()) {
                return Ok(Core { rows, overlap: v });
            }
        }
    }
    Err(Error::NoCore)
}

/// Weights with `(a.x - a0)` restricted to `x_V = 0` equal to
/// `sum_{i in core} lambda_i (row_i - 1) + gamma . x + mu` on the variables outside V.
fn first_combo(inst: &CoverInstance, ineq: &LinearInequality, core: &Core) -> Result<ConicCombo> {
    let n = inst.nvars();
    let k = core.rows.len();
    let mut lp = StandardLP::new(k);
    for j in (0..n).filter(|&j| !core.overlap.contains(j)) {
        let coeffs = core
            .rows
            .iter()
            .map(|&i| {
                if inst.rows()[i].contains(j) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        lp.add_row(coeffs, RowSense::Le, ineq.coeffs[j].clone());
    }
    lp.add_row(vec![Rat::one(); k], RowSense::Ge, ineq.rhs.clone());
    let res = simplex::feasibility(&lp);
    if res.status != LpStatus::Optimal {
        return Err(Error::Construction(format!(
            "no conic combination for the core {:?}",
            core.rows.iter().map(|i| i + 1).collect::<Vec<_>>()
        )));
    }
    let mut combo = ConicCombo::zero(inst.num_rows(), n);
    let mut total = Rat::zero();
    for (&i, l) in core.rows.iter().zip(&res.solution) {
        combo.lambda[i] = l.clone();
        total += l;
    }
    for j in (0..n).filter(|&j| !core.overlap.contains(j)) {
        let used: Rat = core
            .rows
            .iter()
            .zip(&res.solution)
            .filter(|(&i, _)| inst.rows()[i].contains(j))
            .map(|(_, l)| l.clone())
            .sum();
        combo.gamma[j] = &ineq.coeffs[j] - used;
    }
    combo.mu = total - &ineq.rhs;
    Ok(combo)
}

/// `(a.x - a0)` with `x_T = 1`, `x_F = 0`, as an inequality on the same variables.
fn restrict_inequality(ineq: &LinearInequality, t: VarSet, f: VarSet) -> LinearInequality {
    let mut rhs = ineq.rhs.clone();
    let coeffs = ineq
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if t.contains(j) {
                rhs -= c;
                Rat::zero()
            } else if f.contains(j) {
                Rat::zero()
            } else {
                c.clone()
            }
        })
        .collect();
    LinearInequality::covering(coeffs, rhs)
}

fn cover_terms(inst: &CoverInstance, ineq: &LinearInequality, pi: usize) -> Result<Vec<Term>> {
    let n = inst.nvars();
    let m = inst.num_rows();
    let pitch = ineq.pitch()?;
    if pitch > pi {
        return Err(Error::PitchTooLarge { pitch, limit: pi });
    }
    if pitch == 0 {
        // a0 <= 0: 1 * (a.x + (-a0))
        return Ok(vec![Term {
            multiplier: Multiplier::Delta(DeltaStructured::one()),
            combo: ConicCombo {
                lambda: vec![Rat::zero(); m],
                gamma: ineq.coeffs.clone(),
                mu: -ineq.rhs.clone(),
            },
            source: Source::Base,
        }]);
    }
    let core = find_core(inst, ineq)?;
    let v = core.overlap;
    let mut terms = vec![Term {
        multiplier: Multiplier::Delta(DeltaStructured::single(v, VarSet::EMPTY)?),
        combo: first_combo(inst, ineq, &core)?,
        source: Source::First {
            core: core.rows.clone(),
        },
    }];
    for size in 1..pi.min(v.len() + 1) {
        for j in v.subsets_of_size(size) {
            let sigma = PartialAssignment::new(j, v - j)?;
            let restricted = inst.restrict(&sigma)?;
            let sub = restrict_inequality(ineq, j, v - j);
            let sub_pitch = sub.pitch()?;
            if sub_pitch > pi - size {
                return Err(Error::Construction(format!(
                    "restricted inequality has pitch {sub_pitch} > {}",
                    pi - size
                )));
            }
            for t in cover_terms(&restricted.instance, &sub, pi - size)? {
                let Multiplier::Delta(q) = t.multiplier else {
                    unreachable!("cover certificates use delta multipliers")
                };
                let mut lambda = vec![Rat::zero(); m];
                for (r, l) in t.combo.lambda.iter().enumerate() {
                    lambda[restricted.origin[r]] += l;
                }
                terms.push(Term {
                    multiplier: Multiplier::Delta(times_delta(v, j, q)?),
                    combo: ConicCombo { lambda, ..t.combo },
                    source: Source::Second {
                        core: core.rows.clone(),
                        trueset: j,
                        inner: Box::new(t.source),
                    },
                });
            }
        }
    }
    if v.len() >= pi {
        let order = ineq.support_by_coefficient();
        let smallest: VarSet = order[..pi].iter().copied().collect();
        let a_pi = &ineq.coeffs[order[pi - 1]];
        // a' = a on the pi smallest, a_pi elsewhere in V, 0 outside V
        let a_prime: Vec<Rat> = (0..n)
            .map(|i| {
                if !v.contains(i) {
                    Rat::zero()
                } else if smallest.contains(i) {
                    ineq.coeffs[i].clone()
                } else {
                    a_pi.clone()
                }
            })
            .collect();
        let gamma: Vec<Rat> = (0..n).map(|i| &ineq.coeffs[i] - &a_prime[i]).collect();
        let prefix = v & smallest;
        let free = v - prefix;
        for fixed in prefix.subsets() {
            let base: Rat = fixed.iter().map(|i| a_prime[i].clone()).sum();
            for k in pi.saturating_sub(fixed.len())..=free.len() {
                let mu = &base + a_pi * int(k as i64) - &ineq.rhs;
                debug_assert!(!mu.is_negative());
                terms.push(Term {
                    multiplier: Multiplier::Delta(DeltaStructured::symmetric_sum(
                        v, fixed, prefix, k,
                    )?),
                    combo: ConicCombo {
                        lambda: vec![Rat::zero(); m],
                        gamma: gamma.clone(),
                        mu,
                    },
                    source: Source::Third {
                        core: core.rows.clone(),
                        fixed,
                        prefix,
                        k,
                    },
                });
            }
        }
    }
    Ok(terms)
}

/// Certificate for a valid covering inequality of pitch at most `pi`,
/// following the First / Second / Third split around a core.
pub fn build_cover_certificate(
    inst: &CoverInstance,
    ineq: &LinearInequality,
    pi: usize,
    limits: &Limits,
) -> Result<Certificate> {
    covering_target(ineq)?;
    if ineq.nvars() != inst.nvars() {
        return Err(Error::NvarsMismatch(ineq.nvars(), inst.nvars()));
    }
    limits.check_pitch(pi)?;
    if let Some(p) = violating_point(ineq, inst, limits)? {
        return Err(Error::Invalid(format!(
            "inequality is violated by the feasible point {}",
            VarSet(p)
        )));
    }
    let terms = cover_terms(inst, ineq, pi)?;
    let n = inst.nvars();
    let degree_bound = terms
        .iter()
        .map(|t| t.multiplier.degree(n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(Certificate {
        instance: Instance::Cover(inst.clone()),
        target: Target::Inequality(ineq.clone()),
        terms,
        degree_bound,
    })
}

// ---------------------------------------------------------------------------
// Symmetric knapsack and full interpolation

/// Certificate for `sum x >= ceil(b)` over `sum x >= b` built from the
/// cardinality indicators.
pub fn symmetric_knapsack_certificate(n: usize, b: &Rat) -> Result<Certificate> {
    if is_integral(b) {
        return Err(Error::Invalid(
            "b is integral; there is nothing to round".into(),
        ));
    }
    if !b.is_positive() || *b > int(n as i64) {
        return Err(Error::Invalid("expected 0 < b <= n".into()));
    }
    let inst = KnapsackInstance::new(n, b.clone())?;
    let cb = Rat::from_integer(ceil(b));
    let all = VarSet::full(n);
    let terms = (0..=n)
        .map(|i| {
            let i_r = int(i as i64);
            let combo = if i_r >= cb {
                ConicCombo::constant(1, n, &i_r - &cb)
            } else {
                ConicCombo {
                    lambda: vec![(&i_r - &cb) / (&i_r - b)],
                    gamma: vec![Rat::zero(); n],
                    mu: Rat::zero(),
                }
            };
            Ok(Term {
                multiplier: Multiplier::Delta(DeltaStructured::symmetric_sum(
                    all,
                    VarSet::EMPTY,
                    VarSet::EMPTY,
                    i,
                )?),
                combo,
                source: Source::Cardinality { k: i },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate {
        target: Target::Inequality(inst.ceiling_cut()),
        instance: Instance::Knapsack(inst),
        terms,
        degree_bound: n,
    })
}

/// The point-by-point certificate: `delta_I * p(I)` where `p(I) >= 0`, and
/// `delta_I * (p(I) / g_h(I)) * g_h` with `h` the first constraint violated
/// at `I` otherwise.
pub fn full_interpolation_certificate(
    inst: &Instance,
    p: &MultilinearPoly,
    limits: &Limits,
) -> Result<Certificate> {
    let n = inst.nvars();
    if p.nvars() != n {
        return Err(Error::NvarsMismatch(p.nvars(), n));
    }
    if n > limits.interpolation {
        return Err(Error::SizeGuard(format!(
            "interpolation certificates have 2^n terms; n = {n} exceeds the limit {} (PITCHFORGE_LIMITS=interp=...)",
            limits.interpolation
        )));
    }
    let cons = inst.system().constraints();
    let all = VarSet::full(n);
    let mut terms = Vec::with_capacity(1 << n);
    for point in 0..1u64 << n {
        let value = p.eval_mask(point);
        let combo = if !value.is_negative() {
            ConicCombo::constant(cons.len(), n, value)
        } else {
            let (h, g) = cons
                .iter()
                .enumerate()
                .map(|(h, c)| (h, c.eval_mask(point)))
                .find(|(_, g)| g.is_negative())
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "polynomial is negative at the feasible point {}",
                        VarSet(point)
                    ))
                })?;
            let mut combo = ConicCombo::zero(cons.len(), n);
            combo.lambda[h] = value / g;
            combo
        };
        terms.push(Term {
            multiplier: Multiplier::Delta(DeltaStructured::single(all, VarSet(point))?),
            combo,
            source: Source::Interpolation { point },
        });
    }
    Ok(Certificate {
        instance: inst.clone(),
        target: Target::Poly(p.clone()),
        terms,
        degree_bound: n,
    })
}

// ---------------------------------------------------------------------------
// Packing

/// `delta^S_I` with every monomial `x_K`, `I ∪ K` outside `fits`, removed.
fn truncated_delta(
    n: usize,
    s: VarSet,
    i: VarSet,
    fits: &dyn Fn(VarSet) -> bool,
) -> MultilinearPoly {
    let mut p = MultilinearPoly::zero(n);
    for k in (s - i).subsets() {
        let u = i | k;
        if fits(u) {
            p.add_term(
                u,
                if k.len() % 2 == 0 {
                    Rat::one()
                } else {
                    -Rat::one()
                },
            );
        }
    }
    p
}

fn monomial_root(n: usize, u: VarSet) -> MultilinearPoly {
    MultilinearPoly::monomial(n, u, Rat::one())
}

/// Certificate of degree at most `pitch + 1` for a valid packing inequality.
pub fn packing_certificate(
    inst: &PackingInstance,
    ineq: &LinearInequality,
    limits: &Limits,
) -> Result<Certificate> {
    if ineq.sense != Sense::Packing {
        return Err(Error::Invalid("expected a packing (<=) inequality".into()));
    }
    let n = inst.nvars();
    if ineq.nvars() != n {
        return Err(Error::NvarsMismatch(ineq.nvars(), n));
    }
    let pi = ineq.pitch()?;
    if let Some(p) = violating_point(ineq, inst, limits)? {
        return Err(Error::Invalid(format!(
            "inequality is violated by the feasible point {}",
            VarSet(p)
        )));
    }
    let cons = inst.constraints();
    let m = cons.len();
    let s = ineq.support();
    let load = |u: VarSet| -> Rat { u.iter().map(|j| ineq.coeffs[j].clone()).sum() };
    let fits = |u: VarSet| load(u) <= ineq.rhs;
    let mut terms = Vec::new();
    let mut covered = MultilinearPoly::zero(n);
    for i in s.subsets().filter(|&i| fits(i)) {
        let mu = &ineq.rhs - load(i);
        if mu.is_zero() {
            continue;
        }
        let root = truncated_delta(n, s, i, &fits);
        covered.add_scaled(&root.mul(&root)?, &mu);
        terms.push(Term {
            multiplier: Multiplier::Square(root),
            combo: ConicCombo::constant(m, n, mu),
            source: Source::TruncatedDelta { set: i },
        });
    }
    let residual = &ineq.target_form() - &covered;
    if residual.degree() <= pi + 1 {
        for (&u, f) in residual.terms() {
            terms.push(Term {
                multiplier: Multiplier::Square(monomial_root(n, u)),
                combo: residual_combo(&cons, n, u, f)?,
                source: Source::Residual { monomial: u },
            });
        }
    } else {
        terms.extend(residual_by_lp(&cons, &residual, pi + 1)?);
    }
    Ok(Certificate {
        instance: Instance::Packing(inst.clone()),
        target: Target::Inequality(ineq.clone()),
        terms,
        degree_bound: pi + 1,
    })
}

/// Weights with `x_U * combo ≡ f x_U`: a constant when `f > 0`, otherwise a
/// row (or pair of rows) violated at the point `U`, with `gamma` cancelling
/// the row's other variables.
fn residual_combo(cons: &[Constraint], n: usize, u: VarSet, f: &Rat) -> Result<ConicCombo> {
    let m = cons.len();
    if f.is_positive() {
        return Ok(ConicCombo::constant(m, n, f.clone()));
    }
    let at_u: Vec<Rat> = cons.iter().map(|g| g.eval_mask(u.0)).collect();
    let chosen: Option<Vec<usize>> = (0..m)
        .find(|&r| at_u[r].is_negative())
        .map(|r| vec![r])
        .or_else(|| {
            (0..m)
                .tuple_combinations()
                .find(|&(r, t)| (&at_u[r] + &at_u[t]).is_negative())
                .map(|(r, t)| vec![r, t])
        });
    let rows = chosen.ok_or_else(|| {
        Error::Construction(format!(
            "no violated constraint combination at the point {u}"
        ))
    })?;
    let violation: Rat = rows.iter().map(|&r| at_u[r].clone()).sum();
    let weight = f / violation;
    let mut combo = ConicCombo::zero(m, n);
    for &r in &rows {
        combo.lambda[r] = weight.clone();
        for (j, c) in cons[r].coeffs.iter().enumerate() {
            if !u.contains(j) {
                // packing constraints have nonpositive coefficients
                combo.gamma[j] -= &weight * c;
            }
        }
    }
    Ok(combo)
}

/// Solves for `residual = sum_{|U| <= d} x_U (lambda_U . g + gamma_U . x + mu_U)`
/// with nonnegative weights by an exact LP over the coefficients.
fn residual_by_lp(cons: &[Constraint], residual: &MultilinearPoly, d: usize) -> Result<Vec<Term>> {
    let n = residual.nvars();
    let m = cons.len();
    let roots: Vec<VarSet> = (0..=d.min(n))
        .flat_map(|k| VarSet::full(n).subsets_of_size(k))
        .collect();
    let per = m + n + 1;
    // column (root, slot) -> polynomial x_U * generator
    let generator = |slot: usize| -> MultilinearPoly {
        if slot < m {
            cons[slot].to_poly()
        } else if slot < m + n {
            MultilinearPoly::var(n, slot - m)
        } else {
            MultilinearPoly::one(n)
        }
    };
    let gens: Vec<MultilinearPoly> = (0..per).map(generator).collect();
    let columns: Vec<MultilinearPoly> = roots
        .iter()
        .flat_map(|&u| gens.iter().map(move |g| g.mul_monomial(u)))
        .collect();
    let mut monomials: Vec<VarSet> = columns
        .iter()
        .chain([residual])
        .flat_map(|p| p.terms().map(|(m, _)| *m).collect::<Vec<_>>())
        .collect();
    monomials.sort_by_key(|m| m.0);
    monomials.dedup();
    let mut lp = StandardLP::new(columns.len());
    for &w in &monomials {
        lp.add_row(
            columns.iter().map(|c| c.coef(w)).collect(),
            RowSense::Eq,
            residual.coef(w),
        );
    }
    let res = simplex::feasibility(&lp);
    if res.status != LpStatus::Optimal {
        return Err(Error::Construction(
            "the residual has no nonnegative low-degree representation".into(),
        ));
    }
    let mut terms = Vec::new();
    for (ri, &u) in roots.iter().enumerate() {
        let w = &res.solution[ri * per..(ri + 1) * per];
        if w.iter().all(|v| v.is_zero()) {
            continue;
        }
        terms.push(Term {
            multiplier: Multiplier::Square(monomial_root(n, u)),
            combo: ConicCombo {
                lambda: w[..m].to_vec(),
                gamma: w[m..m + n].to_vec(),
                mu: w[m + n].clone(),
            },
            source: Source::Residual { monomial: u },
        });
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_full_circulant, gen_random_cover, gen_random_packing, PackingRow};
    use crate::rat::frac;
    use crate::spanning::build_spanning_set;

    fn ones(n: usize) -> Vec<Rat> {
        vec![Rat::one(); n]
    }

    fn assert_verifies(cert: &Certificate) {
        let report = verify_certificate(cert);
        assert!(report.valid, "{:?}", report.issues);
        assert!(report.residual.is_zero());
    }

    #[test]
    fn full_circulant_rank_inequality() {
        for n in 4..=8 {
            let inst = gen_full_circulant(n).unwrap();
            let ineq = LinearInequality::covering(ones(n), int(2));
            let cert = build_cover_certificate(&inst, &ineq, 2, &Limits::default()).unwrap();
            assert_verifies(&cert);
            let core = find_core(&inst, &ineq).unwrap();
            assert_eq!(core.rows, vec![0, 1]);
            assert_eq!(core.overlap, VarSet::full(n) - VarSet::from_iter([0, 1]));
        }
    }

    #[test]
    fn multipliers_lie_in_spanning_set() {
        let inst = gen_full_circulant(5).unwrap();
        let ineq = LinearInequality::covering(ones(5), int(2));
        let cert = build_cover_certificate(&inst, &ineq, 2, &Limits::default()).unwrap();
        let span = build_spanning_set(&inst, 2, &Limits::default()).unwrap();
        for t in &cert.terms {
            let Multiplier::Delta(d) = &t.multiplier else {
                panic!()
            };
            assert!(span.contains_function(d), "{:?}", t.source);
        }
    }

    #[test]
    fn tampering_is_detected() {
        let inst = gen_full_circulant(5).unwrap();
        let ineq = LinearInequality::covering(ones(5), int(2));
        let cert = build_cover_certificate(&inst, &ineq, 2, &Limits::default()).unwrap();

        let mut bumped = cert.clone();
        bumped.terms[0].combo.mu += Rat::one();
        let report = verify_certificate(&bumped);
        assert!(!report.valid);
        // the first multiplier is delta^V_{}, so the residual is that delta
        let Multiplier::Delta(d) = &cert.terms[0].multiplier else {
            panic!()
        };
        assert_eq!(report.residual, d.expand(5).unwrap());

        let mut negated = cert.clone();
        let first = &mut negated.terms[0].combo;
        let i = first.lambda.iter().position(|l| l.is_positive()).unwrap();
        first.lambda[i] = -first.lambda[i].clone();
        assert!(!verify_certificate(&negated).valid);

        let mut tight = cert;
        tight.degree_bound = 0;
        assert!(!verify_certificate(&tight).valid);
    }

    #[test]
    fn pitch_zero_and_row_inequalities() {
        let inst = gen_full_circulant(4).unwrap();
        let trivial = LinearInequality::covering(vec![int(1), int(0), int(2), int(0)], int(0));
        let cert = build_cover_certificate(&inst, &trivial, 1, &Limits::default()).unwrap();
        assert_eq!(cert.terms.len(), 1);
        assert_eq!(cert.terms[0].source, Source::Base);
        assert_verifies(&cert);

        let row = LinearInequality::covering(vec![int(0), int(1), int(1), int(1)], int(1));
        let core = find_core(&inst, &row).unwrap();
        assert_eq!(core.rows, vec![0]);
        assert!(core.overlap.is_empty());
        let cert = build_cover_certificate(&inst, &row, 1, &Limits::default()).unwrap();
        assert_verifies(&cert);
    }

    #[test]
    fn rejects_invalid_or_too_steep_inequalities() {
        let inst = gen_full_circulant(4).unwrap();
        let bad = LinearInequality::covering(ones(4), int(3));
        assert!(matches!(
            build_cover_certificate(&inst, &bad, 3, &Limits::default()),
            Err(Error::Invalid(_))
        ));
        let ok = LinearInequality::covering(ones(4), int(2));
        assert!(matches!(
            build_cover_certificate(&inst, &ok, 1, &Limits::default()),
            Err(Error::PitchTooLarge { .. })
        ));
    }

    #[test]
    fn all_small_valid_cover_inequalities() {
        let limits = Limits::default();
        for seed in 0..6 {
            let inst = gen_random_cover(5, 4, 0.5, seed).unwrap();
            let ineqs = enumerate(&inst, 2);
            for ineq in ineqs {
                let pitch = ineq.pitch().unwrap();
                let cert = build_cover_certificate(&inst, &ineq, pitch.max(1), &limits)
                    .unwrap_or_else(|e| panic!("seed {seed} {ineq:?}: {e}"));
                assert_verifies(&cert);
            }
        }
    }

    fn enumerate(inst: &CoverInstance, coef: u32) -> Vec<LinearInequality> {
        crate::instances::enumerate_valid_inequalities(
            inst,
            Sense::Covering,
            3,
            coef,
            &Limits::default(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_knapsack() {
        for (n, b) in [
            (4, frac(3, 2)),
            (3, frac(1, 2)),
            (6, frac(21, 10)),
            (8, frac(301, 100)),
        ] {
            let cert = symmetric_knapsack_certificate(n, &b).unwrap();
            assert_eq!(cert.terms.len(), n + 1);
            assert_verifies(&cert);
        }
        assert!(symmetric_knapsack_certificate(4, &int(2)).is_err());
        assert!(symmetric_knapsack_certificate(4, &frac(9, 2)).is_err());
    }

    #[test]
    fn interpolation() {
        let inst = Instance::Cover(gen_full_circulant(3).unwrap());
        let p = LinearInequality::covering(ones(3), int(2)).target_form();
        let cert = full_interpolation_certificate(&inst, &p, &Limits::default()).unwrap();
        assert_eq!(cert.terms.len(), 8);
        assert_verifies(&cert);
        // x1 x2 x3 - 1 is negative at the feasible point 110
        let q =
            &MultilinearPoly::monomial(3, VarSet::full(3), Rat::one()) - &MultilinearPoly::one(3);
        assert!(full_interpolation_certificate(&inst, &q, &Limits::default()).is_err());
    }

    #[test]
    fn packing_clique_edge() {
        let row = |c: [i64; 3], b| PackingRow {
            coeffs: c.iter().map(|&v| int(v)).collect(),
            bound: int(b),
        };
        let inst = PackingInstance::new(
            3,
            vec![row([1, 1, 0], 1), row([0, 1, 1], 1), row([1, 0, 1], 1)],
        )
        .unwrap();
        for ineq in [
            LinearInequality::packing(vec![int(1), int(1), int(0)], int(1)),
            LinearInequality::packing(ones(3), int(1)),
            LinearInequality::packing(ones(3), int(2)),
        ] {
            let cert = packing_certificate(&inst, &ineq, &Limits::default()).unwrap();
            assert_verifies(&cert);
            assert_eq!(cert.degree_bound, ineq.pitch().unwrap() + 1);
        }
        let invalid = LinearInequality::packing(ones(3), int(0));
        assert!(packing_certificate(&inst, &invalid, &Limits::default()).is_err());
    }

    #[test]
    fn random_packing_inequalities() {
        let limits = Limits::default();
        for seed in 0..5 {
            let inst = gen_random_packing(4, 3, 3, seed).unwrap();
            let ineqs = crate::instances::enumerate_valid_inequalities(
                &inst,
                Sense::Packing,
                2,
                2,
                &limits,
            )
            .unwrap();
            for ineq in ineqs {
                let cert = packing_certificate(&inst, &ineq, &limits)
                    .unwrap_or_else(|e| panic!("seed {seed} {ineq:?}: {e}"));
                assert_verifies(&cert);
            }
        }
    }

    #[test]
    fn addends_sum_to_target() {
        let inst = gen_full_circulant(5).unwrap();
        let ineq = LinearInequality::covering(ones(5), int(2));
        let cert = build_cover_certificate(&inst, &ineq, 2, &Limits::default()).unwrap();
        for p in 0..32u64 {
            let total: Rat = cert.addends_at(p).into_iter().sum();
            assert_eq!(total, ineq.lhs(p) - &ineq.rhs);
        }
    }
}
