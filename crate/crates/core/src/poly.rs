//! Multilinear polynomials over the rationals, i.e. elements of Q[x]/(x_i^2 - x_i).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::rat::Rat;
use crate::varset::{VarSet, MAX_VARS};

/// A square-free polynomial in normal form: every stored coefficient is nonzero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultilinearPoly {
    nvars: usize,
    terms: BTreeMap<VarSet, Rat>,
}

/// Fix `trueset` to 1 and `falseset` to 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PartialAssignment {
    trueset: VarSet,
    falseset: VarSet,
}

impl PartialAssignment {
    pub fn new(trueset: VarSet, falseset: VarSet) -> Result<Self> {
        if !trueset.is_disjoint(falseset) {
            return Err(Error::OverlappingAssignment);
        }
        Ok(PartialAssignment { trueset, falseset })
    }

    pub fn trueset(&self) -> VarSet {
        self.trueset
    }

    pub fn falseset(&self) -> VarSet {
        self.falseset
    }

    pub fn fixed(&self) -> VarSet {
        self.trueset | self.falseset
    }

    /// Whether the 0/1 point (as a mask) extends this assignment.
    pub fn agrees(&self, point: u64) -> bool {
        point & self.trueset.0 == self.trueset.0 && point & self.falseset.0 == 0
    }
}

pub(crate) fn check_range(set: VarSet, nvars: usize) -> Result<()> {
    match set.max_index() {
        Some(i) if i >= nvars => Err(Error::IndexOutOfRange {
            index: i,
            bound: nvars,
        }),
        _ => Ok(()),
    }
}

impl MultilinearPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables supported");
        MultilinearPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Self::monomial(nvars, VarSet::EMPTY, c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    /// `c * prod_{i in vars} x_i`; panics if a variable is out of range.
    pub fn monomial(nvars: usize, vars: VarSet, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        check_range(vars, nvars).expect("monomial variable out of range");
        if !c.is_zero() {
            p.terms.insert(vars, c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, VarSet::singleton(i), Rat::one())
    }

    /// Builds a polynomial from (monomial, coefficient) pairs, merging repeats.
    pub fn from_terms<I: IntoIterator<Item = (VarSet, Rat)>>(
        nvars: usize,
        terms: I,
    ) -> Result<Self> {
        if nvars > MAX_VARS {
            return Err(Error::SizeGuard(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            check_range(m, nvars)?;
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// Affine form `c0 + sum_j coeffs[j] x_j`.
    pub fn affine(coeffs: &[Rat], c0: Rat) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (j, c) in coeffs.iter().enumerate() {
            p.add_term(VarSet::singleton(j), c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarSet, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coef(&self, m: VarSet) -> Rat {
        self.terms.get(&m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of the normal form; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    /// Union of all variables that occur in some monomial.
    pub fn support(&self) -> VarSet {
        self.terms.keys().fold(VarSet::EMPTY, |s, &m| s | m)
    }

    pub fn add_term(&mut self, m: VarSet, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &MultilinearPoly, c: &Rat) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(*m, v * c);
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut p = Self::zero(self.nvars);
        if !c.is_zero() {
            p.terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        }
        p
    }

    pub fn try_add(&self, other: &MultilinearPoly) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch(self.nvars, other.nvars));
        }
        let mut p = self.clone();
        p.add_scaled(other, &Rat::one());
        Ok(p)
    }

    /// Product reduced modulo x_i^2 = x_i: monomials multiply by union.
    pub fn mul(&self, other: &MultilinearPoly) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch(self.nvars, other.nvars));
        }
        let mut p = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                p.add_term(*a | *b, x * y);
            }
        }
        Ok(p)
    }

    /// Multiplication by a monomial with coefficient 1.
    pub fn mul_monomial(&self, m: VarSet) -> Self {
        let mut p = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            p.add_term(*a | m, x.clone());
        }
        p
    }

    /// Substitutes 1 for the true set and 0 for the false set.
    pub fn restrict(&self, sigma: &PartialAssignment) -> Result<Self> {
        check_range(sigma.fixed(), self.nvars)?;
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.is_disjoint(sigma.falseset) {
                p.add_term(*m - sigma.trueset, c.clone());
            }
        }
        Ok(p)
    }

    /// Value at a point given as a bit mask (bit i is x_i).
    pub fn eval_mask(&self, point: u64) -> Rat {
        self.terms
            .iter()
            .filter(|(m, _)| m.0 & !point == 0)
            .fold(Rat::zero(), |acc, (_, c)| acc + c)
    }

    pub fn eval(&self, point: &[bool]) -> Result<Rat> {
        if point.len() != self.nvars {
            return Err(Error::PointLength {
                got: point.len(),
                expected: self.nvars,
            });
        }
        Ok(self.eval_mask(point_mask(point)))
    }

    /// Evaluations at all points of {0,1}^n; entry `p` is the point whose bit i is x_i.
    pub fn point_vector(&self) -> Result<Vec<Rat>> {
        self.point_vector_limited(&Limits::default())
    }

    pub fn point_vector_limited(&self, limits: &Limits) -> Result<Vec<Rat>> {
        limits.check_hypercube(self.nvars)?;
        let size = 1usize << self.nvars;
        let mut values = vec![Rat::zero(); size];
        for (m, c) in &self.terms {
            values[m.0 as usize] += c;
        }
        // zeta transform: value(p) = sum of coefficients of monomials inside p
        for i in 0..self.nvars {
            let bit = 1usize << i;
            for p in 0..size {
                if p & bit != 0 {
                    let lower = values[p ^ bit].clone();
                    values[p] += lower;
                }
            }
        }
        Ok(values)
    }

    /// Inverse of `point_vector` (Möbius transform).
    pub fn from_point_vector(nvars: usize, values: &[Rat]) -> Result<Self> {
        if values.len() != 1usize << nvars {
            return Err(Error::PointLength {
                got: values.len(),
                expected: 1usize << nvars,
            });
        }
        let mut coefs = values.to_vec();
        for i in 0..nvars {
            let bit = 1usize << i;
            for p in 0..coefs.len() {
                if p & bit != 0 {
                    let lower = coefs[p ^ bit].clone();
                    coefs[p] -= lower;
                }
            }
        }
        Self::from_terms(
            nvars,
            coefs
                .into_iter()
                .enumerate()
                .map(|(m, c)| (VarSet(m as u64), c)),
        )
    }

    pub fn is_nonneg_everywhere(&self) -> bool {
        (0..1u64 << self.nvars).all(|p| !self.eval_mask(p).is_negative())
    }
}

/// Converts a 0/1 point to its mask (bit i is entry i).
pub fn point_mask(point: &[bool]) -> u64 {
    point
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| if b { acc | 1 << i } else { acc })
}

pub fn mask_point(mask: u64, nvars: usize) -> Vec<bool> {
    (0..nvars).map(|i| mask >> i & 1 == 1).collect()
}

/// Kronecker delta: prod_{i in trueset} x_i * prod_{j in ground \ trueset} (1 - x_j).
pub fn delta(ground: VarSet, trueset: VarSet, nvars: usize) -> Result<MultilinearPoly> {
    if !trueset.is_subset(ground) {
        return Err(Error::NotSubset);
    }
    check_range(ground, nvars)?;
    let mut p = MultilinearPoly::monomial(nvars, trueset, Rat::one());
    for j in (ground - trueset).iter() {
        // p * (1 - x_j) = p - x_j p; monomials already containing j cancel
        let mut next = MultilinearPoly::zero(nvars);
        for (m, c) in &p.terms {
            if m.contains(j) {
                continue;
            }
            next.terms.insert(*m, c.clone());
            next.terms.insert(*m | VarSet::singleton(j), -c.clone());
        }
        p = next;
    }
    Ok(p)
}

impl std::ops::Add for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn add(self, o: &MultilinearPoly) -> MultilinearPoly {
        self.try_add(o).expect("variable count mismatch")
    }
}

impl std::ops::Sub for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn sub(self, o: &MultilinearPoly) -> MultilinearPoly {
        let mut p = self.clone();
        p.add_scaled(o, &-Rat::one());
        p
    }
}

impl std::ops::Mul for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn mul(self, o: &MultilinearPoly) -> MultilinearPoly {
        MultilinearPoly::mul(self, o).expect("variable count mismatch")
    }
}

impl std::ops::Neg for &MultilinearPoly {
    type Output = MultilinearPoly;
    fn neg(self) -> MultilinearPoly {
        self.scale(&-Rat::one())
    }
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            let names: Vec<String> = m.iter().map(|i| format!("x{}", i + 1)).collect();
            write!(f, "{}", names.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultilinearPoly[n={}]({self})", self.nvars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn vs(ix: &[usize]) -> VarSet {
        VarSet::from_indices(ix.iter().copied())
    }

    #[test]
    fn idempotent_and_complementary() {
        let x1 = MultilinearPoly::var(2, 0);
        assert_eq!(&x1 * &x1, x1);
        let one = MultilinearPoly::one(2);
        assert!((&(&one - &x1) * &x1).is_zero());
    }

    #[test]
    fn square_of_sum() {
        let s = &MultilinearPoly::var(2, 0) + &MultilinearPoly::var(2, 1);
        let sq = &s * &s;
        assert_eq!(sq.coef(vs(&[0])), int(1));
        assert_eq!(sq.coef(vs(&[1])), int(1));
        assert_eq!(sq.coef(vs(&[0, 1])), int(2));
        assert_eq!(sq.num_terms(), 3);
    }

    #[test]
    fn mismatched_nvars_is_an_error() {
        let a = MultilinearPoly::one(2);
        let b = MultilinearPoly::one(3);
        assert_eq!(a.mul(&b), Err(Error::NvarsMismatch(2, 3)));
    }

    #[test]
    fn delta_small_cases() {
        assert_eq!(
            delta(VarSet::EMPTY, VarSet::EMPTY, 3).unwrap(),
            MultilinearPoly::one(3)
        );
        let d = delta(vs(&[0]), VarSet::EMPTY, 2).unwrap();
        assert_eq!(d, &MultilinearPoly::one(2) - &MultilinearPoly::var(2, 0));
        assert_eq!(delta(vs(&[0]), vs(&[1]), 2), Err(Error::NotSubset));
        let z = vs(&[0, 1, 2]);
        let mut sum = MultilinearPoly::zero(3);
        for i in z.subsets() {
            sum.add_scaled(&delta(z, i, 3).unwrap(), &int(1));
        }
        assert_eq!(sum, MultilinearPoly::one(3));
    }

    #[test]
    fn delta_is_an_indicator() {
        let z = vs(&[0, 2, 3]);
        let i = vs(&[2]);
        let d = delta(z, i, 4).unwrap();
        for p in 0u64..16 {
            let expect = if p & z.0 == i.0 { 1 } else { 0 };
            assert_eq!(d.eval_mask(p), int(expect));
        }
    }

    #[test]
    fn restrict_examples() {
        let p = &MultilinearPoly::var(3, 0) + &MultilinearPoly::var(3, 1);
        let s = PartialAssignment::new(vs(&[0]), vs(&[1])).unwrap();
        assert_eq!(p.restrict(&s).unwrap(), MultilinearPoly::one(3));
        let q = MultilinearPoly::monomial(3, vs(&[0, 1, 2]), int(1));
        let s = PartialAssignment::new(VarSet::EMPTY, vs(&[1])).unwrap();
        assert!(q.restrict(&s).unwrap().is_zero());
        assert!(PartialAssignment::new(vs(&[1]), vs(&[1])).is_err());
        let s = PartialAssignment::new(vs(&[5]), VarSet::EMPTY).unwrap();
        assert!(q.restrict(&s).is_err());
    }

    #[test]
    fn eval_and_point_vector() {
        let x1 = MultilinearPoly::var(2, 0);
        assert_eq!(
            x1.point_vector().unwrap(),
            vec![int(0), int(1), int(0), int(1)]
        );
        assert_eq!(
            MultilinearPoly::one(2).point_vector().unwrap(),
            vec![int(1); 4]
        );
        assert!(x1.eval(&[true]).is_err());
        assert_eq!(x1.eval(&[true, false]).unwrap(), int(1));
        let big = MultilinearPoly::one(17);
        assert!(big.point_vector().is_err());
    }

    #[test]
    fn point_vector_round_trip() {
        let p = MultilinearPoly::from_terms(
            3,
            [
                (vs(&[]), frac(1, 2)),
                (vs(&[0, 2]), int(-3)),
                (vs(&[1]), int(2)),
            ],
        )
        .unwrap();
        let v = p.point_vector().unwrap();
        assert_eq!(MultilinearPoly::from_point_vector(3, &v).unwrap(), p);
    }

    #[test]
    fn display_uses_one_based_names() {
        let p = MultilinearPoly::from_terms(2, [(vs(&[]), int(-1)), (vs(&[0, 1]), frac(3, 2))])
            .unwrap();
        assert_eq!(p.to_string(), "-1 + 3/2*x1*x2");
    }
}
