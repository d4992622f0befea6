use lefschetz_core::correspondence::{Correspondence, SheafDatum};
use lefschetz_core::curve::{EllipticCurve, Point, Space};
use lefschetz_core::field::{build_field, Embedding};
use lefschetz_core::semilinear::Budget;
use lefschetz_core::trace_formula::{elliptic_scenario, evaluate, verify, Scenario, VerifyBudget};
use lefschetz_core::witt::WittRing;
use proptest::prelude::*;

fn small_oracle() -> VerifyBudget {
    VerifyBudget {
        field: Budget::default(),
        oracle: Budget {
            max_field_size: 1 << 12,
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_a_ring_map(p in prop::sample::select(vec![2u64, 3, 5]), a in 0u64..25, b in 0u64..25) {
        let small = build_field(p, 2).unwrap();
        let big = build_field(p, 4).unwrap();
        let emb = Embedding::new(&small, &big).unwrap();
        let (x, y) = (small.from_index(a % small.order()), small.from_index(b % small.order()));
        prop_assert_eq!(emb.apply(&small.add(&x, &y)), big.add(&emb.apply(&x), &emb.apply(&y)));
        prop_assert_eq!(emb.apply(&small.mul(&x, &y)), big.mul(&emb.apply(&x), &emb.apply(&y)));
    }

    #[test]
    fn frobenius_after_verschiebung_is_p(p in prop::sample::select(vec![2u64, 3, 5, 7]), c in prop::collection::vec(0i64..7, 3)) {
        let f = build_field(p, 1).unwrap();
        let w = WittRing::new(&f, 3).unwrap();
        let x = w.from_components(c.iter().map(|&v| f.from_int(v)).collect());
        let fv = w.frobenius(&w.verschiebung(&x));
        prop_assert_eq!(fv, w.mul(&w.from_int(p as i64), &x));
    }

    #[test]
    fn affine_maps_balance_mod_p(p in prop::sample::select(vec![2u64, 3, 5, 7]), a in 1i64..7, b in 0i64..7, m in 1usize..3) {
        let f = build_field(p, 1).unwrap();
        prop_assume!(a % p as i64 != 0);
        let corr = Correspondence::affine_line(&f, f.from_int(a), f.from_int(b)).unwrap();
        let s = Scenario::new(corr, SheafDatum::scalar(p, 1, 2, 3), Space::AffineLine, vec![m]).unwrap();
        let report = verify(&s, small_oracle()).unwrap();
        prop_assert_eq!(report.rows[0].lhs, 0);
        prop_assert_eq!(report.rows[0].rhs, 0);
    }

    #[test]
    fn elliptic_sides_agree(p in prop::sample::select(vec![5u64, 7]), c in prop::collection::vec(0i64..7, 3), pick in 0usize..64, sign in prop::sample::select(vec![1i8, -1]), k in 1u64..3) {
        let f = build_field(p, 1).unwrap();
        let Ok(e) = EllipticCurve::from_ints(&f, &c) else { return Ok(()) };
        let pts = e.rational_points();
        let pt = pts[pick % pts.len()];
        for space in [Space::OpenElliptic, Space::ProperElliptic] {
            let s = elliptic_scenario(&e, pt, sign, k, 1, space, vec![1, 2]).unwrap();
            let report = evaluate(&s, small_oracle()).unwrap();
            prop_assert!(report.all_ok(), "{}", report);
        }
    }
}

#[test]
fn wider_coefficients_expose_the_affine_line() {
    // Z/p^2 on the affine line: q^m is not zero mod p^2 at m = 1
    let f = build_field(3, 1).unwrap();
    let corr = Correspondence::affine_line(&f, f.one(), f.one()).unwrap();
    let s = Scenario::new(corr, SheafDatum::scalar(3, 2, 1, 1), Space::AffineLine, vec![1, 2]).unwrap();
    let report = evaluate(&s, small_oracle()).unwrap();
    assert!(!report.rows[0].ok());
    assert_eq!(report.rows[0].rhs, 3);
    assert!(report.rows[1].ok());
    assert!(verify(&s, small_oracle()).is_err());
}

#[test]
fn identity_translation_on_supersingular_curve() {
    let f = build_field(7, 1).unwrap();
    let e = EllipticCurve::from_ints(&f, &[0, 1, 0]).unwrap();
    let s = elliptic_scenario(&e, Point::Infinity, 1, 1, 1, Space::ProperElliptic, vec![1]).unwrap();
    let report = verify(&s, VerifyBudget::default()).unwrap();
    // H^0 only: 1, and #E(F_7) = 8 = 1 mod 7
    assert_eq!((report.rows[0].lhs, report.rows[0].rhs), (1, 1));
    assert_eq!(report.rows[0].oracle_count, Some(8));
}
