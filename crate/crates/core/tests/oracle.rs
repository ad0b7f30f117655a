mod common;

use common::{chart_pair, h3_hopf, r3_hopf, s3_great_circles, s3_torus_pair};
use geolink_core::oracle::{crossing_linking_r3, oracle_linking, Polyline};
use geolink_core::submanifolds::ParamSubmanifold;
use geolink_core::Space;
use nalgebra::DVector;

fn fixtures() -> Vec<(&'static str, (ParamSubmanifold, ParamSubmanifold), i64)> {
    vec![
        ("r3 hopf", r3_hopf([0.0; 3]), -1),
        ("r3 split", r3_hopf([0.0, 0.0, 10.0]), 0),
        ("s3 great circles", s3_great_circles(), -1),
        ("s3 torus pair", s3_torus_pair(), -2),
        ("h3 hopf", h3_hopf(0.3), -1),
        ("cp2 chart pair", chart_pair(Space::complex_projective_plane()), 1),
        ("ch2 chart pair", chart_pair(Space::complex_hyperbolic_plane()), 1),
    ]
}

#[test]
fn fixtures_have_their_linking_numbers() {
    for (name, (k, l), want) in fixtures() {
        let got = oracle_linking(&k, &l, 64, 1).unwrap().linking_number;
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn independent_of_projection_and_apex() {
    for (name, (k, l), _) in fixtures() {
        let first = oracle_linking(&k, &l, 48, 0).unwrap().linking_number;
        for seed in 1..12 {
            assert_eq!(oracle_linking(&k, &l, 48, seed).unwrap().linking_number, first, "{name} seed {seed}");
        }
    }
}

#[test]
fn stable_under_refinement() {
    for (name, (k, l), _) in fixtures() {
        let counts: Vec<i64> = [24, 48, 96].iter().map(|&n| oracle_linking(&k, &l, n, 5).unwrap().linking_number).collect();
        assert!(counts.windows(2).all(|w| w[0] == w[1]), "{name}: {counts:?}");
    }
}

#[test]
fn reversing_k_negates() {
    for (name, (k, l), _) in fixtures() {
        let a = oracle_linking(&k, &l, 48, 3).unwrap().linking_number;
        let b = oracle_linking(&k.reversed(), &l, 48, 3).unwrap().linking_number;
        assert_eq!(a, -b, "{name}");
    }
}

#[test]
fn torus_components_link_twice() {
    let (k, l) = s3_torus_pair();
    assert_eq!(oracle_linking(&k, &l, 128, 17).unwrap().linking_number.abs(), 2);
}

#[test]
fn crossing_count_on_square_polylines() {
    let p = |v: [f64; 3]| DVector::from_column_slice(&v);
    let k = Polyline::closed(vec![p([0.0, 0.0, 0.0]), p([2.0, 0.0, 0.0]), p([2.0, 2.0, 0.0]), p([0.0, 2.0, 0.0])]).unwrap();
    let l = Polyline::closed(vec![p([1.0, 1.0, -1.0]), p([1.0, 1.0, 1.0]), p([1.0, 3.0, 1.0]), p([1.0, 3.0, -1.0])]).unwrap();
    let a = crossing_linking_r3(&k, &l, 0).unwrap();
    assert_eq!(a.abs(), 1);
    assert_eq!(crossing_linking_r3(&l, &k, 9).unwrap(), a);
    assert_eq!(crossing_linking_r3(&k.reversed(), &l, 4).unwrap(), -a);
}
