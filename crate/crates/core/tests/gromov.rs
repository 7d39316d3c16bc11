use okbody_core::exact::UnimodularAffineMap;
use okbody_core::gromov::{
    search_largest_simplex, simplicial_nobody, unimodular_matrices, verify_packing_certificate,
    verify_simplex_certificate, SimplexCertificate,
};
use okbody_core::scalar::{rat, rat_int};
use okbody_core::QPolytope;
use proptest::prelude::*;

/// Re-expresses a certificate in coordinates moved by `t`.
fn transport(c: &SimplexCertificate, t: &UnimodularAffineMap) -> SimplexCertificate {
    SimplexCertificate {
        map: t.compose(&c.map),
        target: c.target.map(t),
        ..c.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificate_validity_is_unimodular_invariant(
        d in 1i64..=4,
        pick in any::<prop::sample::Index>(),
        shift in (-3i64..=3, -3i64..=3),
    ) {
        let target = simplicial_nobody(2, &rat_int(d)).unwrap();
        let cert = search_largest_simplex(&target, 1).unwrap();
        let ws = unimodular_matrices(2, 2);
        let t = UnimodularAffineMap::new(pick.get(&ws).clone(), vec![rat_int(shift.0), rat(shift.1, 2)]).unwrap();
        let moved = transport(&cert, &t);
        prop_assert!(verify_simplex_certificate(&moved).unwrap().valid);

        // at r_sup the simplex touches the boundary in any coordinates
        let closed = SimplexCertificate { r: cert.r_sup.clone(), ..moved };
        prop_assert!(!verify_simplex_certificate(&closed).unwrap().valid);
    }

    #[test]
    fn interval_search_finds_length(len in 1i64..=9) {
        let target = QPolytope::from_integer_points(&[vec![0], vec![len]]).unwrap();
        let cert = search_largest_simplex(&target, 1).unwrap();
        prop_assert_eq!(cert.r_sup, rat_int(len));
        prop_assert!(cert.r < rat_int(len));
        prop_assert!(cert.open_supremum);
    }
}

#[test]
fn packing_certificates_verify() {
    for n in 1..=3 {
        for d in 1..=4 {
            let c = okbody_core::gromov::packing_subdivision(n, d).unwrap();
            assert_eq!(c.pieces.len(), d as usize);
            assert!(
                verify_packing_certificate(&c).unwrap().all_ok(),
                "n = {n}, d = {d}"
            );
        }
    }
}
