use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use geolink_core::dinv::{sphere_linear_form, DinvOptions};
use geolink_core::kernels::lambda_sphere;
use geolink_core::linking::{integrate, NodeCloud};
use geolink_core::{builtin, d_inverse_eval, kernel_for, Family, Space, SpacePoint};

fn circle(space: Space, frame: [Vec<f64>; 2]) -> geolink_core::ParamSubmanifold {
    builtin(space, &Family::GreatCircle { frame }).unwrap()
}

fn kernels(c: &mut Criterion) {
    c.bench_function("lambda_sphere n=3 k=1", |b| b.iter(|| lambda_sphere(3, 1, black_box(1.3)).unwrap()));
    c.bench_function("lambda_sphere n=4 k=2", |b| b.iter(|| lambda_sphere(4, 2, black_box(1.3)).unwrap()));
}

fn linking(c: &mut Criterion) {
    let s3 = Space::sphere(3).unwrap();
    let k = circle(s3, [vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]);
    let l = circle(s3, [vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]);
    let spec = kernel_for(s3, 1).unwrap();
    let kc = NodeCloud::from_submanifold(&k, &[128]).unwrap();
    let lc = NodeCloud::from_submanifold(&l, &[128]).unwrap();
    c.bench_function("S3 great circles 128x128", |b| b.iter(|| integrate(&spec, &kc, &lc, Some(1)).unwrap().value));

    let cp2 = Space::complex_projective_plane();
    let curve = builtin(cp2, &Family::ChartCurve { center: vec![2.0, 0.0, 0.0, 0.0], cos: vec![vec![1.0, 0.0, 0.0, 0.0]], sin: vec![vec![0.0, 0.0, 0.0, 1.0]] }).unwrap();
    let surface = builtin(cp2, &Family::ChartSurface { center: vec![0.0; 4], radius: 2.0, frame: None }).unwrap();
    let spec = kernel_for(cp2, 1).unwrap();
    let kc = NodeCloud::from_submanifold(&curve, &[32]).unwrap();
    let lc = NodeCloud::from_submanifold(&surface, &[32, 32]).unwrap();
    c.bench_function("CP2 chart pair 32x(32x32)", |b| b.iter(|| integrate(&spec, &kc, &lc, Some(1)).unwrap().value));
}

fn dinv(c: &mut Criterion) {
    let s2 = Space::sphere(2).unwrap();
    let spec = kernel_for(s2, 1).unwrap();
    let omega = sphere_linear_form([0.3, 0.7, -0.2]);
    let x = SpacePoint::normalized(s2, vec![0.36, -0.48, 0.8]).unwrap();
    let opts = DinvOptions::default();
    c.bench_function("d_inverse_eval S2 default", |b| b.iter(|| d_inverse_eval(&spec, &omega, black_box(&x), &opts).unwrap()));
}

criterion_group!(benches, kernels, linking, dinv);
criterion_main!(benches);
