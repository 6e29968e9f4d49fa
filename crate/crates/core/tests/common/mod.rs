//! Fixtures shared by the integration tests: the seeded instance suites and an
//! LP oracle that enumerates vertices with integer Cramer's rule.
#![allow(dead_code)]

use pitchforge::instances::{
    gen_full_circulant, gen_random_cover, gen_random_packing, CoverInstance, PackingInstance,
};
use pitchforge::rat::{int, Rat};
use pitchforge::simplex::{RowSense, StandardLP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// FC_4..FC_6 and ten seeded random minimal cover instances (n <= 6, m <= 6).
pub fn cover_suite() -> Vec<(String, CoverInstance)> {
    let mut out: Vec<(String, CoverInstance)> = (4..=6)
        .map(|n| (format!("fc{n}"), gen_full_circulant(n).unwrap()))
        .collect();
    for seed in 0..10u64 {
        let n = 4 + (seed % 3) as usize;
        let m = 3 + (seed % 4) as usize;
        out.push((
            format!("random{seed}"),
            gen_random_cover(n, m, 0.5, seed).unwrap(),
        ));
    }
    out
}

/// Ten seeded packing instances with n <= 5 and coefficients in 0..=3.
pub fn packing_suite() -> Vec<(String, PackingInstance)> {
    (0..10u64)
        .map(|seed| {
            let n = 3 + (seed % 3) as usize;
            let m = 1 + (seed % 3) as usize;
            (
                format!("pack{seed}"),
                gen_random_packing(n, m, 3, seed).unwrap(),
            )
        })
        .collect()
}

/// Integer LP data small enough for the vertex oracle: every variable boxed.
#[derive(Clone, Debug)]
pub struct SmallLp {
    pub objective: Vec<i64>,
    pub maximize: bool,
    pub rows: Vec<(Vec<i64>, RowSense, i64)>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl SmallLp {
    /// Random data; right-hand sides are mostly taken around a hidden point
    /// of the box so that roughly three quarters of the instances are feasible.
    pub fn random(seed: u64) -> SmallLp {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let m = r.gen_range(0..=8);
        let lower: Vec<i64> = (0..n)
            .map(|_| if r.gen_bool(0.7) { 0 } else { -3 })
            .collect();
        let upper: Vec<i64> = (0..n).map(|_| r.gen_range(1..=5)).collect();
        let hidden: Vec<i64> = (0..n).map(|j| r.gen_range(lower[j]..=upper[j])).collect();
        let rows = (0..m)
            .map(|_| {
                let a: Vec<i64> = (0..n).map(|_| r.gen_range(-4..=4)).collect();
                let at: i64 = a.iter().zip(&hidden).map(|(x, y)| x * y).sum();
                let slack = r.gen_range(0..=3);
                let (sense, b) = match r.gen_range(0..10) {
                    0 => (RowSense::Eq, at),
                    1..=4 => (RowSense::Le, at + slack),
                    5..=8 => (RowSense::Ge, at - slack),
                    // occasionally a row that may cut the hidden point off
                    _ => (RowSense::Ge, at + r.gen_range(1..=6)),
                };
                (a, sense, b)
            })
            .collect();
        SmallLp {
            objective: (0..n).map(|_| r.gen_range(-5..=5)).collect(),
            maximize: r.gen_bool(0.5),
            rows,
            lower,
            upper,
        }
    }

    pub fn to_standard(&self) -> StandardLP {
        let n = self.objective.len();
        let mut lp = StandardLP::new(n);
        lp.objective = self.objective.iter().map(|&c| int(c)).collect();
        lp.maximize = self.maximize;
        for (a, sense, b) in &self.rows {
            lp.add_row(a.iter().map(|&v| int(v)).collect(), *sense, int(*b));
        }
        lp.lower = self.lower.iter().map(|&v| Some(int(v))).collect();
        lp.upper = self.upper.iter().map(|&v| Some(int(v))).collect();
        lp
    }

    /// Best objective over all basic feasible points, or `None` when there
    /// are none (the box makes the feasible region a polytope, so that means
    /// infeasible).
    pub fn vertex_optimum(&self) -> Option<Rat> {
        let n = self.objective.len();
        // every vertex is a feasible basic solution of n of these hyperplanes;
        // the feasibility check enforces the equality rows
        let mut planes: Vec<(Vec<i64>, i64)> =
            self.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
        for j in 0..n {
            let e: Vec<i64> = (0..n).map(|k| (k == j) as i64).collect();
            planes.push((e.clone(), self.lower[j]));
            planes.push((e, self.upper[j]));
        }
        let mut best: Option<Rat> = None;
        for active in combinations(planes.len(), n) {
            let a: Vec<Vec<i128>> = active
                .iter()
                .map(|&i| planes[i].0.iter().map(|&v| v as i128).collect())
                .collect();
            let b: Vec<i128> = active.iter().map(|&i| planes[i].1 as i128).collect();
            let Some((num, den)) = cramer(&a, &b) else {
                continue;
            };
            if !self.feasible(&num, den) {
                continue;
            }
            let value = Rat::new(
                self.objective
                    .iter()
                    .zip(&num)
                    .map(|(&c, &x)| c as i128 * x)
                    .sum::<i128>()
                    .into(),
                den.into(),
            );
            best = Some(match best {
                None => value,
                Some(b) if (value > b) == self.maximize && value != b => value,
                Some(b) => b,
            });
        }
        best
    }

    fn feasible(&self, num: &[i128], den: i128) -> bool {
        let rows_ok = self.rows.iter().all(|(a, sense, b)| {
            let lhs: i128 = a.iter().zip(num).map(|(&c, &x)| c as i128 * x).sum();
            let rhs = *b as i128 * den;
            match sense {
                RowSense::Le => lhs <= rhs,
                RowSense::Ge => lhs >= rhs,
                RowSense::Eq => lhs == rhs,
            }
        });
        rows_ok
            && num
                .iter()
                .enumerate()
                .all(|(j, &x)| self.lower[j] as i128 * den <= x && x <= self.upper[j] as i128 * den)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Fraction-free determinant.
fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Solves the square system `a x = b` as `x = num / den` with `den > 0`.
fn cramer(a: &[Vec<i128>], b: &[i128]) -> Option<(Vec<i128>, i128)> {
    let d = det(a.to_vec());
    if d == 0 {
        return None;
    }
    let n = a.len();
    let mut num: Vec<i128> = (0..n)
        .map(|j| {
            let mut m = a.to_vec();
            for (row, &v) in m.iter_mut().zip(b) {
                row[j] = v;
            }
            det(m)
        })
        .collect();
    let mut den = d;
    if den < 0 {
        den = -den;
        num.iter_mut().for_each(|x| *x = -*x);
    }
    Some((num, den))
}
