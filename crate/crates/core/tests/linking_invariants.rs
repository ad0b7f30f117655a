mod common;

use common::{chart_pair, h3_hopf, r3_hopf, s3_great_circles, s3_torus_pair};
use geolink_core::kernels::kernel_for;
use geolink_core::linking::{convergence_run, integrate, linking_integral, LinkingOptions, NodeCloud, Resolution};
use geolink_core::submanifolds::{builtin, Family, ParamSubmanifold};
use geolink_core::{Error, Isometry, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Case = (Space, (ParamSubmanifold, ParamSubmanifold), Vec<usize>, Vec<usize>);

fn value(space: Space, k: &ParamSubmanifold, l: &ParamSubmanifold, rk: &[usize], rl: &[usize]) -> f64 {
    let spec = kernel_for(space, k.dim()).unwrap();
    let kc = NodeCloud::from_submanifold(k, rk).unwrap();
    let lc = NodeCloud::from_submanifold(l, rl).unwrap();
    integrate(&spec, &kc, &lc, None).unwrap().value
}

fn moved(g: &Isometry, m: &ParamSubmanifold) -> ParamSubmanifold {
    let (g, m2) = (g.clone(), m.clone());
    ParamSubmanifold::new(m.space(), m.axes().to_vec(), move |u| g.apply_point(&m2.point(u).unwrap()).rep().clone(), None).unwrap()
}

#[test]
fn orientation_reversal_negates() {
    let cases: Vec<Case> = vec![
        (Space::euclidean(3).unwrap(), r3_hopf([0.0; 3]), vec![48], vec![40]),
        (Space::sphere(3).unwrap(), s3_torus_pair(), vec![48], vec![40]),
        (Space::hyperbolic(3).unwrap(), h3_hopf(0.3), vec![32], vec![24]),
        (Space::complex_projective_plane(), chart_pair(Space::complex_projective_plane()), vec![16], vec![12, 16]),
        (Space::complex_hyperbolic_plane(), chart_pair(Space::complex_hyperbolic_plane()), vec![16], vec![12, 16]),
    ];
    for (space, (k, l), rk, rl) in cases {
        let a = value(space, &k, &l, &rk, &rl);
        let b = value(space, &k.reversed(), &l, &rk, &rl);
        let c = value(space, &k, &l.reversed(), &rk, &rl);
        assert!((a + b).abs() <= 1e-14, "{space}: {a} {b}");
        assert!((a + c).abs() <= 1e-14, "{space}: {a} {c}");
    }
}

#[test]
fn additive_over_components() {
    let r3 = Space::euclidean(3).unwrap();
    let (k, l1) = r3_hopf([0.0; 3]);
    let l2 = builtin(r3, &Family::EuclideanCircle { center: vec![-1.0, 0.0, 0.0], frame: [vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]], radius: 1.0 }).unwrap();
    let spec = kernel_for(r3, 1).unwrap();
    let kc = NodeCloud::from_submanifold(&k, &[64]).unwrap();
    let c1 = NodeCloud::from_submanifold(&l1, &[48]).unwrap();
    let c2 = NodeCloud::from_submanifold(&l2, &[56]).unwrap();
    let both = NodeCloud::concat(&[c1.clone(), c2.clone()]).unwrap();
    let v1 = integrate(&spec, &kc, &c1, None).unwrap().value;
    let v2 = integrate(&spec, &kc, &c2, None).unwrap().value;
    let v = integrate(&spec, &kc, &both, None).unwrap().value;
    assert!((v - v1 - v2).abs() <= 1e-10, "{v} vs {v1} + {v2}");
    assert!((v1.abs() - 1.0).abs() < 1e-6 && (v2.abs() - 1.0).abs() < 1e-6, "{v1} {v2}");
}

#[test]
fn isometry_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cases: Vec<Case> = vec![
        (Space::euclidean(3).unwrap(), r3_hopf([0.0; 3]), vec![64], vec![64]),
        (Space::sphere(3).unwrap(), s3_torus_pair(), vec![64], vec![64]),
        (Space::hyperbolic(3).unwrap(), h3_hopf(0.3), vec![64], vec![64]),
        (Space::complex_projective_plane(), chart_pair(Space::complex_projective_plane()), vec![16], vec![12, 16]),
        (Space::complex_hyperbolic_plane(), chart_pair(Space::complex_hyperbolic_plane()), vec![16], vec![12, 16]),
    ];
    for (space, (k, l), rk, rl) in cases {
        let g = Isometry::random(space, 0.8, &mut rng);
        let a = value(space, &k.without_derivative(), &l.without_derivative(), &rk, &rl);
        let b = value(space, &moved(&g, &k), &moved(&g, &l), &rk, &rl);
        assert!((a - b).abs() < 1e-8, "{space}: {a} vs {b}");
    }
}

#[test]
fn exchanging_roles_on_s3_keeps_the_integer() {
    let s3 = Space::sphere(3).unwrap();
    for (k, l) in [s3_great_circles(), s3_torus_pair()] {
        let opts = LinkingOptions::default();
        let kl = linking_integral(s3, &k, &l, &Resolution::uniform(64, 1, 1), &opts).unwrap();
        let lk = linking_integral(s3, &l, &k, &Resolution::uniform(64, 1, 1), &opts).unwrap();
        assert_eq!(kl.nearest_integer, lk.nearest_integer);
        assert!(kl.integer_gap < 1e-2 && lk.integer_gap < 1e-2);
    }
}

#[test]
fn hopf_gap_decreases_with_resolution() {
    let r3 = Space::euclidean(3).unwrap();
    let (k, l) = r3_hopf([0.0; 3]);
    let gaps: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| linking_integral(r3, &k, &l, &Resolution::uniform(n, 1, 1), &LinkingOptions::default()).unwrap().integer_gap)
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn convergence_run_stops_once_converged() {
    let r3 = Space::euclidean(3).unwrap();
    let (k, l) = r3_hopf([0.0; 3]);
    let run = convergence_run(r3, &k, &l, &Resolution::uniform(64, 1, 1), 4, &LinkingOptions::default()).unwrap();
    assert!(run.converged);
    assert_eq!(run.results.len(), 1);
    let run = convergence_run(r3, &k, &l, &Resolution::uniform(4, 1, 1), 6, &LinkingOptions::default()).unwrap();
    let nodes: Vec<usize> = run.results.iter().map(|r| r.nodes_k).collect();
    assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    assert!(run.converged && run.last().nearest_integer == -1);
}

#[test]
fn touching_circles_are_rejected_before_integration() {
    let r3 = Space::euclidean(3).unwrap();
    let k = builtin(r3, &Family::EuclideanCircle { center: vec![0.0; 3], frame: [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], radius: 1.0 }).unwrap();
    let l = builtin(r3, &Family::EuclideanCircle { center: vec![2.0, 0.0, 0.0], frame: [vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]], radius: 1.0 }).unwrap();
    let err = convergence_run(r3, &k, &l, &Resolution::uniform(16, 1, 1), 3, &LinkingOptions::default());
    assert!(matches!(err, Err(Error::Proximity { .. })), "{err:?}");
}
