mod common;

use pitchforge::error::Error;
use pitchforge::instances::{
    enumerate_valid_inequalities, gen_full_circulant, gen_random_cover, gen_random_packing,
    is_valid, CoverInstance, LinearInequality, LinearSystem, Sense,
};
use pitchforge::limits::Limits;
use pitchforge::poly::PartialAssignment;
use pitchforge::rat::{frac, int, Rat};
use pitchforge::varset::VarSet;
use proptest::prelude::*;

fn cover(n: usize) -> impl Strategy<Value = CoverInstance> {
    prop::collection::vec(1u64..1 << n, 1..6).prop_map(move |rows| {
        CoverInstance::new(n, rows.into_iter().map(VarSet).collect()).unwrap()
    })
}

fn inequality(n: usize, sense: Sense) -> impl Strategy<Value = LinearInequality> {
    (prop::collection::vec(0i64..=4, n), 0i64..=8).prop_map(move |(a, b)| LinearInequality {
        coeffs: a.into_iter().map(int).collect(),
        rhs: int(b),
        sense,
    })
}

fn subset_sum(ineq: &LinearInequality, t: VarSet) -> Rat {
    t.iter().map(|j| ineq.coeffs[j].clone()).sum()
}

/// Covering pitch by brute force: the least `k` such that every `k` support
/// variables reach the right-hand side.
fn covering_pitch_oracle(ineq: &LinearInequality) -> Option<usize> {
    let s = ineq.support();
    (0..=s.len()).find(|&k| {
        s.subsets_of_size(k)
            .all(|t| subset_sum(ineq, t) >= ineq.rhs)
    })
}

/// Packing pitch by brute force: the largest `k` such that some `k` support
/// variables stay within the right-hand side.
fn packing_pitch_oracle(ineq: &LinearInequality) -> usize {
    let s = ineq.support();
    (0..=s.len())
        .filter(|&k| {
            s.subsets_of_size(k)
                .any(|t| subset_sum(ineq, t) <= ineq.rhs)
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn full_circulant_shape() {
    let fc = gen_full_circulant(5).unwrap();
    assert_eq!(fc.num_rows(), 5);
    assert!(fc.is_minimal());
    // feasible exactly when at least two variables are set
    let feasible = fc.feasible_points(&Limits::default()).unwrap();
    assert!(feasible.iter().all(|p| p.count_ones() >= 2));
    assert_eq!(feasible.len(), 32 - 1 - 5);
    assert!(gen_full_circulant(2).is_err());
}

#[test]
fn pitch_examples() {
    let cov = LinearInequality::covering(vec![int(1), int(1), int(2), int(0)], int(2));
    assert_eq!(cov.pitch().unwrap(), 2);
    let steep = LinearInequality::covering(vec![int(1), int(1)], int(3));
    assert_eq!(steep.pitch(), Err(Error::NoFinitePitch));
    let pack = LinearInequality::packing(vec![int(2), int(2), int(1)], int(3));
    assert_eq!(pack.pitch().unwrap(), 2);
    let half = LinearInequality::packing(vec![frac(1, 2); 4], int(1));
    assert_eq!(half.pitch().unwrap(), 2);
    assert!(LinearInequality::covering(vec![int(-1)], int(0))
        .pitch()
        .is_err());
}

#[test]
fn enumerated_inequalities_are_valid_and_pitch_bounded() {
    let limits = Limits::default();
    for (name, inst) in common::cover_suite().into_iter().take(6) {
        let all = enumerate_valid_inequalities(&inst, Sense::Covering, 2, 2, &limits).unwrap();
        assert!(!all.is_empty(), "{name}");
        for ineq in &all {
            assert!(ineq.pitch().unwrap() <= 2, "{name}: {ineq:?}");
            let feasible = inst.feasible_points(&limits).unwrap();
            assert!(
                feasible.iter().all(|&p| ineq.is_satisfied(p)),
                "{name}: {ineq:?}"
            );
        }
        // every row is itself a pitch-1 valid inequality
        for row in inst.rows() {
            let coeffs: Vec<Rat> = (0..inst.nvars())
                .map(|j| int(row.contains(j) as i64))
                .collect();
            let key = LinearInequality::covering(coeffs, int(1)).normalized();
            assert!(
                all.iter().any(|i| i.normalized() == key),
                "{name}: row {row}"
            );
        }
    }
    for (name, inst) in common::packing_suite() {
        for ineq in enumerate_valid_inequalities(&inst, Sense::Packing, 2, 2, &limits).unwrap() {
            assert!(ineq.pitch().unwrap() <= 2);
            assert!(is_valid(&ineq, &inst, &limits).unwrap(), "{name}: {ineq:?}");
        }
    }
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(
        gen_random_cover(6, 5, 0.4, 9).unwrap(),
        gen_random_cover(6, 5, 0.4, 9).unwrap()
    );
    assert_eq!(
        gen_random_packing(5, 3, 3, 9).unwrap(),
        gen_random_packing(5, 3, 3, 9).unwrap()
    );
    assert!(gen_random_cover(6, 5, 0.4, 9).unwrap().is_minimal());
}

proptest! {
    #[test]
    fn minimalizing_keeps_the_feasible_set(inst in cover(6)) {
        let limits = Limits::default();
        let min = inst.minimalize();
        prop_assert!(min.is_minimal());
        prop_assert!(min.num_rows() <= inst.num_rows());
        prop_assert_eq!(min.feasible_points(&limits).unwrap(), inst.feasible_points(&limits).unwrap());
    }

    #[test]
    fn restriction_agrees_on_extending_points(inst in cover(6), t in 0u64..64, f in 0u64..64) {
        let sigma = PartialAssignment::new(VarSet(t & !f), VarSet(f)).unwrap();
        match inst.restrict(&sigma) {
            Ok(r) => {
                prop_assert!(r.instance.is_minimal());
                prop_assert_eq!(r.origin.len(), r.instance.num_rows());
                for p in (0..64u64).filter(|&p| sigma.agrees(p)) {
                    prop_assert_eq!(r.instance.is_feasible(p), inst.is_feasible(p));
                }
            }
            // an emptied row means no extension is feasible
            Err(Error::EmptyRow(_)) => {
                prop_assert!((0..64u64).filter(|&p| sigma.agrees(p)).all(|p| !inst.is_feasible(p)));
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn covering_pitch_matches_brute_force(ineq in inequality(5, Sense::Covering)) {
        match covering_pitch_oracle(&ineq) {
            Some(p) => {
                prop_assert_eq!(ineq.pitch().unwrap(), p);
                prop_assert!(p <= ineq.support().len());
            }
            None => prop_assert_eq!(ineq.pitch(), Err(Error::NoFinitePitch)),
        }
    }

    #[test]
    fn packing_pitch_matches_brute_force(ineq in inequality(5, Sense::Packing)) {
        let p = ineq.pitch().unwrap();
        prop_assert_eq!(p, packing_pitch_oracle(&ineq));
        prop_assert!(p <= ineq.support().len());
    }

    #[test]
    fn pitch_and_validity_ignore_positive_scaling(ineq in inequality(5, Sense::Covering), k in 1i64..7, d in 1i64..5) {
        let c = frac(k, d);
        let scaled = LinearInequality {
            coeffs: ineq.coeffs.iter().map(|a| a * &c).collect(),
            rhs: &ineq.rhs * &c,
            sense: ineq.sense,
        };
        prop_assert_eq!(scaled.pitch(), ineq.pitch());
        prop_assert_eq!(scaled.normalized(), ineq.normalized());
        let fc = gen_full_circulant(5).unwrap();
        let limits = Limits::default();
        prop_assert_eq!(is_valid(&scaled, &fc, &limits).unwrap(), is_valid(&ineq, &fc, &limits).unwrap());
    }
}
