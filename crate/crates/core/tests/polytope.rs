use okbody_core::exact::{LatticeVector, UnimodularAffineMap};
use okbody_core::gromov::{packing_subdivision, unimodular_matrices};
use okbody_core::polytope::{delta_k, volume_gap};
use okbody_core::scalar::{rat, rat_int};
use okbody_core::{QPolytope, Rat};
use proptest::prelude::*;

fn points2() -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(proptest::collection::vec(-4i64..=4, 2), 3..=7)
}

/// Shoelace area of the hull, computed independently by gift wrapping.
fn twice_area(points: &[Vec<i64>]) -> i64 {
    let mut pts: Vec<(i64, i64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort();
    pts.dedup();
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let m = hull.len();
    (0..m)
        .map(|i| hull[i].0 * hull[(i + 1) % m].1 - hull[(i + 1) % m].0 * hull[i].1)
        .sum::<i64>()
        .abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalized_volume_matches_shoelace(pts in points2()) {
        let area2 = twice_area(&pts);
        prop_assume!(area2 > 0);
        let p = QPolytope::from_integer_points(&pts).unwrap();
        prop_assert_eq!(p.normalized_volume().unwrap(), rat_int(area2));
        prop_assert_eq!(p.euclidean_volume().unwrap(), rat(area2, 2));
    }

    #[test]
    fn normalized_volume_is_unimodular_invariant(pts in points2(), pick in any::<prop::sample::Index>(), shift in (-5i64..=5, -5i64..=5)) {
        prop_assume!(twice_area(&pts) > 0);
        let ws = unimodular_matrices(2, 2);
        let w = pick.get(&ws).clone();
        let t = UnimodularAffineMap::new(w, vec![rat_int(shift.0), rat(shift.1, 3)]).unwrap();
        let p = QPolytope::from_integer_points(&pts).unwrap();
        let q = p.map(&t);
        prop_assert_eq!(q.normalized_volume().unwrap(), p.normalized_volume().unwrap());
        prop_assert!(q.map(&t.inverse()).same_set(&p));
    }

    #[test]
    fn delta_k_grows_and_contains_delta_1(values in proptest::collection::btree_set(0i64..=9, 2..=4)) {
        let vals: Vec<i64> = values.into_iter().collect();
        // sums of k values, the value set of the k-th power of a monomial basis
        let mut prev: Option<QPolytope> = None;
        let mut sums = vec![0i64];
        for k in 1..=3 {
            sums = sums.iter().flat_map(|s| vals.iter().map(move |v| s + v)).collect();
            sums.sort();
            sums.dedup();
            let a: Vec<LatticeVector> = sums.iter().map(|&x| LatticeVector(vec![x])).collect();
            let d = delta_k(&a, k).unwrap();
            if let Some(p) = &prev {
                prop_assert!(d.contains_polytope(p));
                prop_assert!(volume_gap(&d, p).unwrap() >= Rat::from_integer(0.into()));
            }
            prev = Some(d);
        }
    }

    #[test]
    fn packing_volumes_add_up(n in 1usize..=3, d in 1i64..=6) {
        let c = packing_subdivision(n, d).unwrap();
        let total: Rat = c
            .pieces
            .iter()
            .map(|p| QPolytope::from_integer_points(&p.vertices).unwrap().normalized_volume().unwrap())
            .sum();
        prop_assert_eq!(total, c.ambient.normalized_volume().unwrap());
        prop_assert_eq!(c.ambient.normalized_volume().unwrap(), rat_int(d));
    }
}

#[test]
fn delta_k_rejects_bad_input() {
    assert!(delta_k(&[], 1).is_err());
    assert!(delta_k(&[LatticeVector(vec![1])], 0).is_err());
    let small = delta_k(&[LatticeVector(vec![0]), LatticeVector(vec![1])], 1).unwrap();
    let big = delta_k(&[LatticeVector(vec![0]), LatticeVector(vec![3])], 1).unwrap();
    assert!(volume_gap(&small, &big).is_err());
    assert_eq!(volume_gap(&big, &small).unwrap(), rat_int(2));
}
