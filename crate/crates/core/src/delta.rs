//! Compressed 0/1-valued polynomials built from Kronecker deltas.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{delta, MultilinearPoly};
use crate::rat::Rat;
use crate::varset::VarSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "crate::json::DeltaJson", into = "crate::json::DeltaJson")]
pub enum DeltaStructured {
    /// The delta of `ground` that is 1 exactly on `trueset`.
    Single { ground: VarSet, trueset: VarSet },
    /// Sum of deltas of `ground` whose true set is `fixed` plus exactly `k`
    /// variables of `ground \ prefix`; requires `fixed ⊆ prefix ⊆ ground`.
    SymmetricSum {
        ground: VarSet,
        fixed: VarSet,
        prefix: VarSet,
        k: usize,
    },
    /// A single delta times another member over disjoint variables.
    Product {
        ground: VarSet,
        trueset: VarSet,
        rest: Box<DeltaStructured>,
    },
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl DeltaStructured {
    pub fn one() -> Self {
        DeltaStructured::Single {
            ground: VarSet::EMPTY,
            trueset: VarSet::EMPTY,
        }
    }

    pub fn single(ground: VarSet, trueset: VarSet) -> Result<Self> {
        if !trueset.is_subset(ground) {
            return Err(Error::NotSubset);
        }
        Ok(DeltaStructured::Single { ground, trueset })
    }

    /// The monomial prod_{i in vars} x_i, written as a delta with no false part.
    pub fn monomial(vars: VarSet) -> Self {
        DeltaStructured::Single {
            ground: vars,
            trueset: vars,
        }
    }

    pub fn symmetric_sum(ground: VarSet, fixed: VarSet, prefix: VarSet, k: usize) -> Result<Self> {
        if !fixed.is_subset(prefix) || !prefix.is_subset(ground) {
            return Err(Error::NotSubset);
        }
        Ok(DeltaStructured::SymmetricSum {
            ground,
            fixed,
            prefix,
            k,
        })
    }

    pub fn product(ground: VarSet, trueset: VarSet, rest: DeltaStructured) -> Result<Self> {
        if !trueset.is_subset(ground) {
            return Err(Error::NotSubset);
        }
        if !ground.is_disjoint(rest.vars()) {
            return Err(Error::Invalid(
                "product factors must use disjoint variables".into(),
            ));
        }
        if ground.is_empty() {
            return Ok(rest);
        }
        Ok(DeltaStructured::Product {
            ground,
            trueset,
            rest: Box::new(rest),
        })
    }

    /// Every variable the member depends on.
    pub fn vars(&self) -> VarSet {
        match self {
            DeltaStructured::Single { ground, .. } => *ground,
            DeltaStructured::SymmetricSum { ground, .. } => *ground,
            DeltaStructured::Product { ground, rest, .. } => *ground | rest.vars(),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        match self {
            DeltaStructured::Single { .. } => false,
            DeltaStructured::SymmetricSum {
                ground, prefix, k, ..
            } => *k > (*ground - *prefix).len(),
            DeltaStructured::Product { rest, .. } => rest.is_structurally_zero(),
        }
    }

    /// Value at a 0/1 point given as a bit mask.
    pub fn eval_mask(&self, point: u64) -> bool {
        match self {
            DeltaStructured::Single { ground, trueset } => point & ground.0 == trueset.0,
            DeltaStructured::SymmetricSum {
                ground,
                fixed,
                prefix,
                k,
            } => {
                point & prefix.0 == fixed.0
                    && (point & (ground.0 & !prefix.0)).count_ones() as usize == *k
            }
            DeltaStructured::Product {
                ground,
                trueset,
                rest,
            } => point & ground.0 == trueset.0 && rest.eval_mask(point),
        }
    }

    /// Full multilinear expansion.
    pub fn expand(&self, nvars: usize) -> Result<MultilinearPoly> {
        match self {
            DeltaStructured::Single { ground, trueset } => delta(*ground, *trueset, nvars),
            DeltaStructured::SymmetricSum {
                ground,
                fixed,
                prefix,
                k,
            } => {
                crate::poly::check_range(*ground, nvars)?;
                let free = *ground - *prefix;
                let mut p = MultilinearPoly::zero(nvars);
                if *k > free.len() {
                    return Ok(p);
                }
                // coefficient of x_{fixed ∪ A ∪ B}: C(|B|, k) (-1)^{|A|+|B|-k}
                for a in (*prefix - *fixed).subsets() {
                    for b in free.subsets() {
                        if b.len() < *k {
                            continue;
                        }
                        let mut c = binomial(b.len(), *k);
                        if (a.len() + b.len() - *k) % 2 == 1 {
                            c = -c;
                        }
                        p.add_term(*fixed | a | b, Rat::from_integer(c));
                    }
                }
                Ok(p)
            }
            DeltaStructured::Product {
                ground,
                trueset,
                rest,
            } => {
                let d = delta(*ground, *trueset, nvars)?;
                d.mul(&rest.expand(nvars)?)
            }
        }
    }

    /// Upper bound on the degree of the expansion.
    pub fn degree_bound(&self) -> usize {
        match self {
            DeltaStructured::Single { ground, .. } => ground.len(),
            DeltaStructured::SymmetricSum { .. } if self.is_structurally_zero() => 0,
            DeltaStructured::SymmetricSum { ground, .. } => ground.len(),
            DeltaStructured::Product { ground, rest, .. } => ground.len() + rest.degree_bound(),
        }
    }

    /// Values on all 2^n points packed as bits (bit p of word p/64).
    pub fn point_bits(&self, nvars: usize) -> Vec<u64> {
        let size = 1usize << nvars;
        let mut bits = vec![0u64; size.div_ceil(64)];
        for p in 0..size {
            if self.eval_mask(p as u64) {
                bits[p / 64] |= 1 << (p % 64);
            }
        }
        bits
    }
}
