use nalgebra::DVector;
use proptest::prelude::*;
use regrad::oracles::{lmo_box, lmo_simplex};
use regrad::{BallSet, BoxSet, FeasibleSet, SimplexSet, Vector};

const DIM: usize = 4;

fn vec_in(lo: f64, hi: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(lo..hi, DIM).prop_map(DVector::from_vec)
}

fn sets() -> Vec<Box<dyn FeasibleSet>> {
    vec![
        Box::new(
            BoxSet::new(
                DVector::from_vec(vec![-1.0, 0.0, -2.0, 0.5]),
                DVector::from_vec(vec![1.0, 0.0, 3.0, 2.5]),
            )
            .unwrap(),
        ),
        Box::new(BallSet::new(DVector::from_vec(vec![0.5, -1.0, 0.0, 2.0]), 1.5).unwrap()),
        Box::new(SimplexSet::new(DIM).unwrap()),
    ]
}

/// Feasible point of each set built from unconstrained coordinates `u`.
fn feasible_from(set: &dyn FeasibleSet, u: &Vector) -> Vector {
    set.project(u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projection_is_idempotent(x in vec_in(-10.0, 10.0)) {
        for set in sets() {
            let p = set.project(&x).unwrap();
            prop_assert!(set.contains(&p, 1e-10));
            let pp = set.project(&p).unwrap();
            prop_assert!((&pp - &p).norm() <= 1e-12, "{} moved by {}", set.fingerprint(), (&pp - &p).norm());
        }
    }

    #[test]
    fn projection_is_nonexpansive(x in vec_in(-10.0, 10.0), y in vec_in(-10.0, 10.0)) {
        for set in sets() {
            let (px, py) = (set.project(&x).unwrap(), set.project(&y).unwrap());
            prop_assert!((&px - &py).norm() <= (&x - &y).norm() + 1e-12);
        }
    }

    #[test]
    fn projection_variational_inequality(
        x in vec_in(-10.0, 10.0),
        qs in prop::collection::vec(vec_in(-5.0, 5.0), 50),
    ) {
        for set in sets() {
            let p = set.project(&x).unwrap();
            for u in &qs {
                let q = feasible_from(set.as_ref(), u);
                prop_assert!((&x - &p).dot(&(&q - &p)) <= 1e-10);
            }
        }
    }

    #[test]
    fn lmo_minimizes_linear_form(
        g in vec_in(-3.0, 3.0),
        qs in prop::collection::vec(vec_in(-5.0, 5.0), 50),
    ) {
        for set in sets() {
            let s = set.lmo(&g).unwrap();
            prop_assert!(set.contains(&s, 1e-10));
            for u in &qs {
                let q = feasible_from(set.as_ref(), u);
                prop_assert!(g.dot(&s) <= g.dot(&q) + 1e-10);
            }
        }
    }

    #[test]
    fn box_and_simplex_lmo_return_extreme_points(g in vec_in(-3.0, 3.0)) {
        let b = BoxSet::cube(DIM, -1.0, 2.0).unwrap();
        let s = lmo_box(&g, &b).unwrap();
        prop_assert!(s.iter().all(|&v| v == -1.0 || v == 2.0));
        let simplex = SimplexSet::new(DIM).unwrap();
        let v = lmo_simplex(&g, &simplex).unwrap();
        prop_assert_eq!(v.iter().filter(|&&c| c == 1.0).count(), 1);
        prop_assert_eq!(v.iter().filter(|&&c| c == 0.0).count(), DIM - 1);
    }

    #[test]
    fn diameter_bounds_pairwise_distance(x in vec_in(-10.0, 10.0), y in vec_in(-10.0, 10.0)) {
        for set in sets() {
            let (px, py) = (set.project(&x).unwrap(), set.project(&y).unwrap());
            prop_assert!((&px - &py).norm() <= set.diameter().unwrap() + 1e-12);
        }
    }
}
