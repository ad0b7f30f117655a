#![allow(dead_code)]

use std::f64::consts::PI;

use geolink_core::submanifolds::{builtin, Family, ParamSubmanifold};
use geolink_core::{
    complex_structure, distance, exp, geodesic_velocity, log_unit, parallel_transport, Isometry, Space, SpaceKind,
    SpacePoint, Tangent,
};
use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn all_spaces() -> Vec<Space> {
    vec![
        Space::euclidean(3).unwrap(),
        Space::sphere(2).unwrap(),
        Space::sphere(3).unwrap(),
        Space::hyperbolic(2).unwrap(),
        Space::hyperbolic(3).unwrap(),
        Space::complex_hyperbolic_plane(),
        Space::complex_projective_plane(),
    ]
}

pub fn basepoint(space: Space) -> SpacePoint {
    let n = space.ambient_dim();
    let mut v = DVector::zeros(n);
    match space.kind() {
        SpaceKind::Euclidean => {}
        SpaceKind::Sphere => v[0] = 1.0,
        _ => v[n - if space.is_complex() { 2 } else { 1 }] = 1.0,
    }
    SpacePoint::new(space, v).unwrap()
}

pub fn random_point(space: Space, reach: f64, rng: &mut ChaCha8Rng) -> SpacePoint {
    Isometry::random(space, reach, rng).apply_point(&basepoint(space))
}

pub fn random_tangent(x: &SpacePoint, rng: &mut ChaCha8Rng) -> Tangent {
    let raw = DVector::from_fn(x.space().ambient_dim(), |_, _| rng.random_range(-1.0..1.0));
    Tangent::projected(x.clone(), raw)
}

pub fn random_unit_tangent(x: &SpacePoint, rng: &mut ChaCha8Rng) -> Tangent {
    loop {
        let v = random_tangent(x, rng);
        if v.norm() > 0.1 {
            return v.scaled(1.0 / v.norm());
        }
    }
}

/// `a` (based at some representative of `y`) re-expressed at the representative `b.base()`, minus `b`,
/// relative to the size of the ambient representative.
pub fn tangent_gap(a: &Tangent, b: &Tangent) -> f64 {
    let space = a.base().space();
    let va = if space.is_complex() {
        let c = space.normalization().unwrap();
        let (ya, yb) = (a.base().rep(), b.base().rep());
        let iy = DVector::from_fn(ya.len(), |i, _| if i % 2 == 0 { -ya[i + 1] } else { ya[i - 1] });
        let re = space.inner(ya, yb) / c;
        let im = space.inner(&iy, yb) / c;
        let ia = complex_structure(a).unwrap();
        a.vec() * re + ia.vec() * im
    } else {
        a.vec().clone()
    };
    (va - b.vec()).norm() / (1.0 + b.base().rep().norm())
}

pub fn phase_shift(x: &SpacePoint, angle: f64) -> SpacePoint {
    let y = x.rep();
    let (c, s) = (angle.cos(), angle.sin());
    let v = DVector::from_fn(y.len(), |i, _| if i % 2 == 0 { c * y[i] - s * y[i + 1] } else { s * y[i - 1] + c * y[i] });
    SpacePoint::new(x.space(), v).unwrap()
}

/// Largest distance the exp/log round trip is checked at.
pub fn reach(space: Space) -> f64 {
    match space.cut_distance() {
        Some(cut) => cut - 1e-3,
        None => 3.0,
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GeometryErrors {
    pub transport_norm: f64,
    pub transport_inner: f64,
    pub transport_velocity: f64,
    pub round_trip_direction: f64,
    pub round_trip_distance: f64,
    pub isometry: f64,
    pub phase: f64,
}

impl GeometryErrors {
    pub fn within_tolerance(&self) -> bool {
        self.transport_norm <= 1e-12
            && self.transport_inner <= 1e-11
            && self.transport_velocity <= 1e-11
            && self.round_trip_direction <= 1e-10
            && self.round_trip_distance <= 1e-10
            && self.isometry <= 1e-10
            && self.phase <= 1e-10
    }
}

/// Seeded random transport, exp/log, isometry and phase checks; returns the worst error of each kind.
pub fn geometry_suite(space: Space, cases: usize, seed: u64) -> GeometryErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = GeometryErrors::default();
    let spread = if space.is_compact() { 0.0 } else { 1.0 };
    for _ in 0..cases {
        let x = random_point(space, spread, &mut rng);
        let t = rng.random_range(1e-3..reach(space));
        let u = random_unit_tangent(&x, &mut rng);
        let y = exp(&x, &u, t).unwrap();
        let (v, w) = (random_tangent(&x, &mut rng), random_tangent(&x, &mut rng));

        let pv = parallel_transport(&x, &y, &v).unwrap();
        let pw = parallel_transport(&x, &y, &w).unwrap();
        e.transport_norm = e.transport_norm.max((pv.norm() - v.norm()).abs());
        e.transport_inner = e.transport_inner.max((pv.inner(&pw) - v.inner(&w)).abs());

        let dir = log_unit(&x, &y).unwrap();
        let d = distance(&x, &y).unwrap();
        let moved = parallel_transport(&x, &y, &dir).unwrap();
        let vel = geodesic_velocity(&x, &dir, d).unwrap();
        e.transport_velocity = e.transport_velocity.max(tangent_gap(&vel, &moved));
        e.round_trip_direction = e.round_trip_direction.max((dir.vec() - u.vec()).norm());
        e.round_trip_distance = e.round_trip_distance.max((d - t).abs());

        let g = Isometry::random(space, spread, &mut rng);
        let (gx, gy) = (g.apply_point(&x), g.apply_point(&y));
        let gu = g.apply_tangent(&u);
        let gy_exp = exp(&gx, &gu, t).unwrap();
        let iso = [
            (gy_exp.rep() - gy.rep()).norm() / (1.0 + gy.rep().norm()),
            (distance(&gx, &gy).unwrap() - d).abs(),
            tangent_gap(&g.apply_tangent(&pv), &parallel_transport(&gx, &gy, &g.apply_tangent(&v)).unwrap()),
            tangent_gap(&g.apply_tangent(&dir), &log_unit(&gx, &gy).unwrap()),
        ];
        e.isometry = iso.into_iter().fold(e.isometry, f64::max);

        if space.is_complex() {
            let xs = phase_shift(&x, rng.random_range(0.0..2.0 * PI));
            let ys = phase_shift(&y, rng.random_range(0.0..2.0 * PI));
            let vs = Tangent::projected(xs.clone(), phase_shift_vec(&x, &xs, &v));
            let ph = [
                (distance(&xs, &ys).unwrap() - d).abs(),
                tangent_gap(&dir, &log_unit(&xs, &ys).unwrap()),
                tangent_gap(&pv, &parallel_transport(&xs, &ys, &vs).unwrap()),
            ];
            e.phase = ph.into_iter().fold(e.phase, f64::max);
        }
    }
    e
}

/// The tangent `v` at `x` moved to the phase-shifted representative `xs`.
fn phase_shift_vec(x: &SpacePoint, xs: &SpacePoint, v: &Tangent) -> DVector<f64> {
    let space = x.space();
    let c = space.normalization().unwrap();
    let (a, b) = (x.rep(), xs.rep());
    let ia = DVector::from_fn(a.len(), |i, _| if i % 2 == 0 { -a[i + 1] } else { a[i - 1] });
    let re = space.inner(a, b) / c;
    let im = space.inner(&ia, b) / c;
    let iv = complex_structure(v).unwrap();
    v.vec() * re + iv.vec() * im
}

fn sub(space: Space, family: Family) -> ParamSubmanifold {
    builtin(space, &family).unwrap()
}

pub fn e(i: usize, n: usize) -> Vec<f64> {
    (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

/// `K = (cos u, sin u, 0)`, `L = (1 + cos v, 0, sin v)`, shifted by `offset`.
pub fn r3_hopf(offset: [f64; 3]) -> (ParamSubmanifold, ParamSubmanifold) {
    let r3 = Space::euclidean(3).unwrap();
    let k = sub(r3, Family::EuclideanCircle { center: vec![0.0; 3], frame: [e(0, 3), e(1, 3)], radius: 1.0 });
    let center = vec![1.0 + offset[0], offset[1], offset[2]];
    let l = sub(r3, Family::EuclideanCircle { center, frame: [e(0, 3), e(2, 3)], radius: 1.0 });
    (k, l)
}

pub fn s3_great_circles() -> (ParamSubmanifold, ParamSubmanifold) {
    let s3 = Space::sphere(3).unwrap();
    (
        sub(s3, Family::GreatCircle { frame: [e(0, 4), e(1, 4)] }),
        sub(s3, Family::GreatCircle { frame: [e(2, 4), e(3, 4)] }),
    )
}

pub fn s3_torus_pair() -> (ParamSubmanifold, ParamSubmanifold) {
    let s3 = Space::sphere(3).unwrap();
    (
        sub(s3, Family::TorusCurveS3 { p: 1, q: 2, split: PI / 4.0, phase: 0.0 }),
        sub(s3, Family::TorusCurveS3 { p: 1, q: 2, split: PI / 4.0, phase: PI }),
    )
}

/// The Euclidean Hopf pair scaled by `s` into the Poincaré ball.
pub fn h3_hopf(s: f64) -> (ParamSubmanifold, ParamSubmanifold) {
    let h3 = Space::hyperbolic(3).unwrap();
    (
        sub(h3, Family::PoincareBallCurve { center: vec![0.0; 3], cos: vec![vec![s, 0.0, 0.0]], sin: vec![vec![0.0, s, 0.0]] }),
        sub(h3, Family::PoincareBallCurve { center: vec![s, 0.0, 0.0], cos: vec![vec![s, 0.0, 0.0]], sin: vec![vec![0.0, 0.0, s]] }),
    )
}

/// A circle through the round 2-sphere of radius 2 in `C^2`, pushed through the chart.
pub fn chart_pair(space: Space) -> (ParamSubmanifold, ParamSubmanifold) {
    (
        sub(space, Family::ChartCurve { center: vec![2.0, 0.0, 0.0, 0.0], cos: vec![e(0, 4)], sin: vec![e(3, 4)] }),
        sub(space, Family::ChartSurface { center: vec![0.0; 4], radius: 2.0, frame: None }),
    )
}
