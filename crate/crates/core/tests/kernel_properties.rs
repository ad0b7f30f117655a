use geolink_core::kernels::kernel_for;
use geolink_core::quadrature::pairwise_sum;
use geolink_core::{Space, SpaceKind};
use proptest::prelude::*;

fn spaces() -> Vec<Space> {
    vec![
        Space::euclidean(3).unwrap(),
        Space::euclidean(4).unwrap(),
        Space::sphere(2).unwrap(),
        Space::sphere(3).unwrap(),
        Space::sphere(4).unwrap(),
        Space::hyperbolic(3).unwrap(),
        Space::complex_hyperbolic_plane(),
        Space::complex_projective_plane(),
    ]
}

proptest! {
    #[test]
    fn kernels_are_negative_below_the_cut(t in 1e-6f64..0.999_999, which in 0usize..8, degree in 1usize..4) {
        let space = spaces()[which];
        let k = if space.kind() == SpaceKind::ComplexProjective2 { 1 } else { 1 + (degree - 1) % (space.dim() - 1) };
        let spec = kernel_for(space, k).unwrap();
        let d = t * space.cut_distance().unwrap_or(8.0);
        let w = spec.weights(d).unwrap();
        prop_assert!(w.scale * w.on_rest < 0.0, "{space} k={k} d={d}: {w:?}");
    }

    #[test]
    fn pairwise_sum_matches_exact_sum_of_integers(values in proptest::collection::vec(-1_000_000i64..1_000_000, 0..300)) {
        let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        prop_assert_eq!(pairwise_sum(&floats), values.iter().sum::<i64>() as f64);
    }
}
