//! Chvátal-Gomory cuts: bounded-denominator enumeration (sound, incomplete),
//! the `((d-1)/d)^t` scaling map and the packing closure experiment.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{
    enumerate_valid_inequalities, Constraint, Instance, LinearInequality, LinearSystem,
    PackingInstance, Sense,
};
use crate::limits::Limits;
use crate::rat::{denom_lcm, fmt_rat, Rat};
use crate::simplex::{self, LpStatus, RowSense, StandardLP};

/// Largest multiplier grid walked per enumeration round.
const GRID_CAP: u64 = 1 << 18;

/// A rank-`rank` cut derived from the rows of the previous round's system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CGCut {
    /// Multipliers in `{0, 1/q, ..., (q-1)/q}` on the rows of the system the
    /// cut was derived from (see [`CutRow`]).
    pub lambda: Vec<Rat>,
    pub inequality: LinearInequality,
    pub rank: usize,
}

/// A row `coeffs . x >= rhs` (covering) or `coeffs . x <= rhs` (packing)
/// with nonnegative coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutRow {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

/// The rows CG multipliers act on: covering rows as `a.x >= b`; packing rows
/// as `a.x <= b` followed by the bounds `x_j <= 1`.
pub fn base_rows(sys: &dyn LinearSystem, sense: Sense) -> Vec<CutRow> {
    let n = sys.nvars();
    let mut rows: Vec<CutRow> = sys
        .constraints()
        .into_iter()
        .map(|Constraint { coeffs, constant }| match sense {
            // g = a.x - b >= 0
            Sense::Covering => CutRow {
                coeffs,
                rhs: -constant,
            },
            // g = b - a.x >= 0
            Sense::Packing => CutRow {
                coeffs: coeffs.into_iter().map(|c| -c).collect(),
                rhs: constant,
            },
        })
        .collect();
    if sense == Sense::Packing {
        rows.extend((0..n).map(|j| {
            CutRow {
                coeffs: (0..n)
                    .map(|i| if i == j { Rat::one() } else { Rat::zero() })
                    .collect(),
                rhs: Rat::one(),
            }
        }));
    }
    rows
}

/// The system's sense: packing instances are `<=`, everything else `>=`.
pub fn system_sense(inst: &Instance) -> Sense {
    match inst {
        Instance::Packing(_) => Sense::Packing,
        _ => Sense::Covering,
    }
}

/// All cuts from multipliers on a `1/q` grid with a non-integral combined
/// right-hand side. Fractional coefficient parts are absorbed by `x >= 0`
/// (rounded up for covering, down for packing), which keeps every cut a
/// genuine CG cut. Deduplicated; `lambda = 0` never qualifies.
pub fn cuts_of_rows(rows: &[CutRow], sense: Sense, q: u32, rank: usize) -> Result<Vec<CGCut>> {
    if q < 2 {
        return Err(Error::Invalid(
            "the multiplier denominator must be at least 2".into(),
        ));
    }
    let Some(n) = rows.first().map(|r| r.coeffs.len()) else {
        return Ok(Vec::new());
    };
    let grid = (q as u64)
        .checked_pow(rows.len() as u32)
        .filter(|&g| g <= GRID_CAP)
        .ok_or_else(|| {
            Error::SizeGuard(format!(
                "{q}^{} multiplier vectors exceed the enumeration cap",
                rows.len()
            ))
        })?;
    // rows over a common denominator; entry n is the right-hand side
    let too_big = || Error::SizeGuard("cut enumeration needs data with small denominators".into());
    let lcm = denom_lcm(rows.iter().flat_map(|r| r.coeffs.iter().chain([&r.rhs])));
    let scaled: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            r.coeffs
                .iter()
                .chain([&r.rhs])
                .map(|v| {
                    (v * Rat::from_integer(lcm.clone()))
                        .to_integer()
                        .to_i128()
                        .ok_or_else(too_big)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let den = lcm
        .to_i128()
        .and_then(|l| l.checked_mul(q as i128))
        .ok_or_else(too_big)?;
    let bound = i128::MAX / (2 * (q as i128) * rows.len() as i128);
    if scaled.iter().flatten().any(|v| v.abs() > bound) {
        return Err(too_big());
    }
    let round = |v: i128| match sense {
        Sense::Covering => v.div_euclid(den) + (v.rem_euclid(den) != 0) as i128,
        Sense::Packing => v.div_euclid(den),
    };
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut digits = vec![0u32; rows.len()];
    let mut acc = vec![0i128; n + 1];
    for _ in 1..grid {
        // odometer step, keeping acc = sum digits_i * scaled_i
        for (i, d) in digits.iter_mut().enumerate() {
            if *d + 1 < q {
                *d += 1;
                acc.iter_mut().zip(&scaled[i]).for_each(|(a, v)| *a += v);
                break;
            }
            *d = 0;
            acc.iter_mut()
                .zip(&scaled[i])
                .for_each(|(a, v)| *a -= (q as i128 - 1) * v);
        }
        if acc[n].rem_euclid(den) == 0 {
            continue;
        }
        let coeffs: Vec<i128> = acc[..n].iter().map(|&v| round(v)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let rhs = round(acc[n]);
        if seen.insert((coeffs.clone(), rhs)) {
            out.push(CGCut {
                lambda: digits
                    .iter()
                    .map(|&d| Rat::new(d.into(), q.into()))
                    .collect(),
                inequality: LinearInequality {
                    coeffs: coeffs
                        .into_iter()
                        .map(|c| Rat::from_integer(c.into()))
                        .collect(),
                    rhs: Rat::from_integer(rhs.into()),
                    sense,
                },
                rank,
            });
        }
    }
    Ok(out)
}

/// Whether `a` implies `b` over `x >= 0` by coefficient comparison.
fn dominates(a: &LinearInequality, b: &LinearInequality) -> bool {
    let pairs = || a.coeffs.iter().zip(&b.coeffs);
    match a.sense {
        Sense::Covering => a.rhs >= b.rhs && pairs().all(|(x, y)| x <= y),
        Sense::Packing => a.rhs <= b.rhs && pairs().all(|(x, y)| x >= y),
    }
}

/// Drops every cut implied by another one (the earliest of equals survives).
pub fn undominated(cuts: Vec<CGCut>) -> Vec<CGCut> {
    let keep: Vec<bool> = (0..cuts.len())
        .map(|i| {
            !cuts.iter().enumerate().any(|(j, c)| {
                j != i
                    && dominates(&c.inequality, &cuts[i].inequality)
                    && (j < i || !dominates(&cuts[i].inequality, &c.inequality))
            })
        })
        .collect();
    cuts.into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

/// Rank-1 cuts of the instance's linear relaxation.
pub fn enumerate_cg_cuts(inst: &Instance, q: u32) -> Result<Vec<CGCut>> {
    let sense = system_sense(inst);
    cuts_of_rows(&base_rows(inst.system(), sense), sense, q, 1)
}

/// Undominated cuts of rank `1..=t`: each round derives cuts from the base
/// rows plus earlier cuts. Earlier cuts are admitted in order until the
/// multiplier grid would exceed the cap, so later rounds are partial.
pub fn iterated_cuts(inst: &Instance, q: u32, t: usize) -> Result<Vec<CGCut>> {
    let sense = system_sense(inst);
    let base = base_rows(inst.system(), sense);
    let mut all: Vec<CGCut> = Vec::new();
    for rank in 1..=t {
        let mut rows = base.clone();
        for c in &all {
            if (q as u64)
                .checked_pow(rows.len() as u32 + 1)
                .is_none_or(|g| g > GRID_CAP)
            {
                break;
            }
            rows.push(CutRow {
                coeffs: c.inequality.coeffs.clone(),
                rhs: c.inequality.rhs.clone(),
            });
        }
        let fresh: Vec<CGCut> = undominated(cuts_of_rows(&rows, sense, q, rank)?)
            .into_iter()
            .filter(|c| !all.iter().any(|o| dominates(&o.inequality, &c.inequality)))
            .collect();
        if fresh.is_empty() {
            break;
        }
        all.extend(fresh);
    }
    Ok(all)
}

/// `x * ((d-1)/d)^t`.
pub fn scale_solution(x: &[Rat], d: u32, t: u32) -> Result<Vec<Rat>> {
    if d < 2 {
        return Err(Error::Invalid("scaling needs d >= 2".into()));
    }
    let phi = Rat::new((d - 1).into(), d.into()).pow(t as i32);
    Ok(x.iter().map(|v| v * &phi).collect())
}

/// Least `d >= 2` with `(d/(d-1))^t <= 1 + epsilon`.
pub fn choose_degree(t: u32, epsilon: &Rat) -> Result<u32> {
    if !epsilon.is_positive() {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let bound = Rat::one() + epsilon;
    (2u32..=1_000_000)
        .find(|&d| Rat::new(d.into(), (d - 1).into()).pow(t as i32) <= bound)
        .ok_or_else(|| Error::SizeGuard("epsilon too small for t".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CutCheck {
    pub rank: usize,
    pub coeffs: Vec<String>,
    pub rhs: String,
    pub pitch: usize,
    /// `rhs - coeffs . x` at the scaled point.
    pub slack: String,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub n: usize,
    pub objective: Vec<String>,
    pub t: u32,
    pub epsilon: String,
    pub d: u32,
    pub pitch: usize,
    pub plain_lp: String,
    /// Optimum of the LP intersected with the enumerated valid inequalities of pitch <= d-1.
    pub opt_d: String,
    pub optimal_point: Vec<String>,
    pub scaled_point: Vec<String>,
    pub scaled_value: String,
    /// Optimum over the LP plus every enumerated cut; an upper bound on the t-th closure optimum.
    pub partial_closure: String,
    pub integer_optimum: String,
    /// `opt_d <= (1 + epsilon) * partial_closure`.
    pub bound_holds: bool,
    pub cuts: Vec<CutCheck>,
    pub all_cuts_satisfied: bool,
}

#[derive(Clone, Debug)]
pub struct ClosureParams {
    pub t: u32,
    pub epsilon: Rat,
    /// Multiplier denominator for cut enumeration.
    pub denominator: u32,
    /// Coefficient bound for the enumerated pitch-bounded valid inequalities.
    pub coef_bound: u32,
}

impl Default for ClosureParams {
    fn default() -> Self {
        ClosureParams {
            t: 1,
            epsilon: Rat::one(),
            denominator: 2,
            coef_bound: 2,
        }
    }
}

fn packing_lp(inst: &PackingInstance, c: &[Rat], extra: &[&LinearInequality]) -> StandardLP {
    let n = inst.nvars();
    let mut lp = StandardLP::new(n);
    lp.objective = c.to_vec();
    lp.maximize = true;
    lp.upper = vec![Some(Rat::one()); n];
    for r in inst.rows() {
        lp.add_row(r.coeffs.clone(), RowSense::Le, r.bound.clone());
    }
    for i in extra {
        lp.add_row(i.coeffs.clone(), RowSense::Le, i.rhs.clone());
    }
    lp
}

fn lp_max(lp: &StandardLP) -> Result<(Rat, Vec<Rat>)> {
    let res = simplex::solve(lp);
    match res.status {
        LpStatus::Optimal => Ok((res.optimum, res.solution)),
        s => Err(Error::Construction(format!("packing LP is {s:?}"))),
    }
}

/// Runs the scaling argument on a packing instance: solves the pitch-(d-1)
/// surrogate relaxation, scales its optimum by `((d-1)/d)^t` and checks the
/// result against every enumerated cut of rank at most `t`.
pub fn closure_experiment(
    inst: &PackingInstance,
    c: &[Rat],
    params: &ClosureParams,
    limits: &Limits,
) -> Result<ClosureReport> {
    let n = inst.nvars();
    if c.len() != n {
        return Err(Error::NvarsMismatch(c.len(), n));
    }
    if c.iter().any(|v| v.is_negative()) {
        return Err(Error::NegativeData(
            "closure objectives must be nonnegative".into(),
        ));
    }
    limits.check_hypercube(n)?;
    let d = choose_degree(params.t, &params.epsilon)?;
    let pitch = (d - 1) as usize;
    let wrapped = Instance::Packing(inst.clone());
    let cuts = iterated_cuts(&wrapped, params.denominator, params.t as usize)?;

    // every valid inequality of pitch <= d-1 we know of: the enumerated family
    // plus the cuts that happen to have small pitch
    let mut family =
        enumerate_valid_inequalities(inst, Sense::Packing, pitch, params.coef_bound, limits)?;
    for cut in &cuts {
        if cut.inequality.pitch()? <= pitch {
            family.push(cut.inequality.clone());
        }
    }
    let (plain, _) = lp_max(&packing_lp(inst, c, &[]))?;
    let (opt_d, x_star) = lp_max(&packing_lp(inst, c, &family.iter().collect::<Vec<_>>()))?;
    let scaled = scale_solution(&x_star, d, params.t)?;
    let value = |x: &[Rat]| -> Rat { c.iter().zip(x).map(|(a, b)| a * b).sum() };
    let (partial, _) = lp_max(&packing_lp(
        inst,
        c,
        &cuts.iter().map(|c| &c.inequality).collect::<Vec<_>>(),
    ))?;
    let integer = inst
        .feasible_points(limits)?
        .into_iter()
        .map(|p| {
            (0..n)
                .filter(|j| p >> j & 1 == 1)
                .map(|j| c[j].clone())
                .sum::<Rat>()
        })
        .max()
        .unwrap_or_else(Rat::zero);

    let checks: Vec<CutCheck> = cuts
        .iter()
        .map(|cut| {
            let i = &cut.inequality;
            let slack = &i.rhs - value_of(&i.coeffs, &scaled);
            Ok(CutCheck {
                rank: cut.rank,
                coeffs: i.coeffs.iter().map(fmt_rat).collect(),
                rhs: fmt_rat(&i.rhs),
                pitch: i.pitch()?,
                satisfied: !slack.is_negative(),
                slack: fmt_rat(&slack),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ClosureReport {
        n,
        objective: c.iter().map(fmt_rat).collect(),
        t: params.t,
        epsilon: fmt_rat(&params.epsilon),
        d,
        pitch,
        plain_lp: fmt_rat(&plain),
        bound_holds: opt_d <= (Rat::one() + &params.epsilon) * &partial,
        opt_d: fmt_rat(&opt_d),
        optimal_point: x_star.iter().map(fmt_rat).collect(),
        scaled_value: fmt_rat(&value(&scaled)),
        scaled_point: scaled.iter().map(fmt_rat).collect(),
        partial_closure: fmt_rat(&partial),
        integer_optimum: fmt_rat(&integer),
        all_cuts_satisfied: checks.iter().all(|c| c.satisfied),
        cuts: checks,
    })
}

fn value_of(coeffs: &[Rat], x: &[Rat]) -> Rat {
    coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl ClosureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "t = {}, epsilon = {}, d = {} (pitch <= {})\n\
             plain LP           {}\n\
             pitch-{} relaxation {}\n\
             scaled point value {}\n\
             partial closure    {}\n\
             integer optimum    {}\n\
             opt_d <= (1+eps) * partial closure: {}\n\n\
             rank  pitch  slack      cut\n",
            self.t,
            self.epsilon,
            self.d,
            self.pitch,
            self.plain_lp,
            self.pitch,
            self.opt_d,
            self.scaled_value,
            self.partial_closure,
            self.integer_optimum,
            self.bound_holds,
        );
        for c in &self.cuts {
            s.push_str(&format!(
                "{:>4}  {:>5}  {:<9}  {} <= {}{}\n",
                c.rank,
                c.pitch,
                c.slack,
                c.coeffs.join(" "),
                c.rhs,
                if c.satisfied { "" } else { "   VIOLATED" }
            ));
        }
        s
    }
}

/// Whether `point` satisfies `ineq`.
pub fn satisfies(ineq: &LinearInequality, point: &[Rat]) -> bool {
    let lhs = value_of(&ineq.coeffs, point);
    match ineq.sense {
        Sense::Covering => lhs >= ineq.rhs,
        Sense::Packing => lhs <= ineq.rhs,
    }
}
