mod common;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use pitchforge::certify::{
    build_cover_certificate, find_core, full_interpolation_certificate, is_core,
    packing_certificate, symmetric_knapsack_certificate, verify_certificate, Certificate,
    Multiplier, Source,
};
use pitchforge::instances::{enumerate_valid_inequalities, gen_full_circulant, Instance, Sense};
use pitchforge::json::{certificate_to_json, parse_certificate};
use pitchforge::limits::Limits;
use pitchforge::poly::MultilinearPoly;
use pitchforge::rat::{frac, int, Rat};
use rand::Rng;

/// The identity checked point by point, independently of the symbolic
/// verifier: at every feasible point the addends are nonnegative and sum to
/// the target's value.
fn check_pointwise(cert: &Certificate) {
    let target = cert.target.form();
    let sys = cert.instance.system();
    for p in 0..1u64 << cert.nvars() {
        let addends = cert.addends_at(p);
        assert_eq!(
            addends.iter().sum::<Rat>(),
            target.eval_mask(p),
            "point {p:b}"
        );
        if sys.is_feasible(p) {
            assert!(addends.iter().all(|a| !a.is_negative()), "point {p:b}");
        }
    }
}

fn assert_sound(cert: &Certificate) {
    let report = verify_certificate(cert);
    assert!(report.valid, "{:?}", report.issues);
    assert!(report.residual.is_zero());
    for t in &cert.terms {
        assert!(t.combo.is_nonneg(), "{:?}", t.source);
        assert!(t.multiplier.degree(cert.nvars()).unwrap() <= cert.degree_bound);
    }
    check_pointwise(cert);
}

#[test]
fn cover_certificates_on_the_suite() {
    let limits = Limits::default();
    for (name, inst) in common::cover_suite().into_iter().take(9) {
        let all = enumerate_valid_inequalities(&inst, Sense::Covering, 2, 2, &limits).unwrap();
        for ineq in all {
            let pi = ineq.pitch().unwrap().max(1);
            let cert = build_cover_certificate(&inst, &ineq, pi, &limits)
                .unwrap_or_else(|e| panic!("{name}: {ineq:?}: {e}"));
            assert_sound(&cert);
        }
    }
}

#[test]
fn cores_are_minimal_and_satisfy_the_conditions() {
    let limits = Limits::default();
    for (name, inst) in common::cover_suite().into_iter().take(9) {
        for ineq in enumerate_valid_inequalities(&inst, Sense::Covering, 3, 2, &limits).unwrap() {
            let core = find_core(&inst, &ineq).unwrap_or_else(|e| panic!("{name}: {ineq:?}: {e}"));
            assert!(core.rows.len() <= ineq.pitch().unwrap(), "{name}: {ineq:?}");
            assert_eq!(core.overlap, inst.overlap_set(&core.rows).unwrap());
            assert!(is_core(&inst, &ineq, &core.rows).unwrap());
            // nothing smaller qualifies
            for size in 0..core.rows.len() {
                for smaller in (0..inst.num_rows()).combinations(size) {
                    assert!(
                        !is_core(&inst, &ineq, &smaller).unwrap(),
                        "{name}: {ineq:?} {smaller:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn serialized_certificates_still_verify() {
    let limits = Limits::default();
    let fc = gen_full_circulant(5).unwrap();
    let ineq = pitchforge::textspec::parse_inequality_arg("sum>=2", 5).unwrap();
    let cert = build_cover_certificate(&fc, &ineq, 2, &limits).unwrap();
    let text = certificate_to_json(&cert);
    let back = parse_certificate(&text, None).unwrap();
    assert_eq!(back, cert);
    assert!(verify_certificate(&back).valid);

    let knap = symmetric_knapsack_certificate(5, &frac(5, 2)).unwrap();
    let back = parse_certificate(&certificate_to_json(&knap), None).unwrap();
    assert_eq!(back, knap);
}

#[test]
fn knapsack_certificates() {
    for n in 1..=7usize {
        for p in [2i64, 3, 10] {
            for l in 0..n as i64 {
                let b = int(l) + frac(1, p);
                let cert = symmetric_knapsack_certificate(n, &b).unwrap();
                assert_sound(&cert);
                assert!(cert
                    .terms
                    .iter()
                    .all(|t| matches!(t.source, Source::Cardinality { .. })));
            }
        }
    }
    assert!(symmetric_knapsack_certificate(4, &int(2)).is_err());
}

#[test]
fn interpolation_splits_points_by_sign() {
    let limits = Limits::default();
    let mut r = common::rng(17);
    for (name, inst) in common::cover_suite().into_iter().take(6) {
        let inst = Instance::Cover(inst);
        let n = inst.nvars();
        // random values, made nonnegative on feasible points
        let shifted: Vec<Rat> = (0..1u64 << n)
            .map(|p| {
                let v = int(r.gen_range(-4..=4));
                if inst.system().is_feasible(p) {
                    v.abs()
                } else {
                    v
                }
            })
            .collect();
        let poly = MultilinearPoly::from_point_vector(n, &shifted).unwrap();
        let cert = full_interpolation_certificate(&inst, &poly, &limits).unwrap();
        assert_sound(&cert);
        assert_eq!(cert.terms.len(), 1 << n, "{name}");
        for t in &cert.terms {
            let Source::Interpolation { point } = t.source else {
                panic!()
            };
            let negative = shifted[point as usize].is_negative();
            assert_eq!(
                t.combo.mu.is_zero(),
                negative || shifted[point as usize].is_zero(),
                "{name}"
            );
            assert_eq!(
                t.combo.lambda.iter().filter(|l| !l.is_zero()).count(),
                negative as usize,
                "{name}"
            );
            let Multiplier::Delta(d) = &t.multiplier else {
                panic!()
            };
            assert_eq!(d.degree_bound(), n);
        }
    }
    // negative at a feasible point
    let fc = Instance::Cover(gen_full_circulant(3).unwrap());
    let bad = MultilinearPoly::constant(3, -Rat::one());
    assert!(full_interpolation_certificate(&fc, &bad, &limits).is_err());
}

#[test]
fn packing_certificates_on_the_suite() {
    let limits = Limits::default();
    for (name, inst) in common::packing_suite() {
        for ineq in enumerate_valid_inequalities(&inst, Sense::Packing, 2, 2, &limits).unwrap() {
            let cert = packing_certificate(&inst, &ineq, &limits)
                .unwrap_or_else(|e| panic!("{name}: {ineq:?}: {e}"));
            assert_sound(&cert);
            assert!(cert.degree_bound <= ineq.pitch().unwrap() + 1);
        }
    }
}
