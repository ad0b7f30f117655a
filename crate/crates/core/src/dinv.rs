//! The right inverse `mu = d^{-1} omega` as an integral operator, and a Stokes check
//! `int_{dD} mu = int_D omega` on embedded disks.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::{gauss_legendre, pairwise_sum, periodic_trapezoid};
use crate::spaces::{distance, orthonormal_frame, Chord, SpaceKind, SpacePoint, Space, Tangent};
use crate::submanifolds::{Axis, ParamSubmanifold};

pub const DEFAULT_RADIAL: usize = 48;
pub const DEFAULT_POLAR: usize = 32;
pub const DEFAULT_AZIMUTH: usize = 32;

const BOUNDARY_TOLERANCE: f64 = 1e-10;

type FormFn = dyn Fn(&DVector<f64>, &[DVector<f64>]) -> f64 + Send + Sync;

/// A differential form, evaluated on ambient representatives of a point and tangent vectors.
#[derive(Clone)]
pub struct FormField {
    space: Space,
    degree: usize,
    eval: Arc<FormFn>,
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormField").field("space", &self.space).field("degree", &self.degree).finish()
    }
}

impl FormField {
    /// `eval(y, vectors)` must be alternating and multilinear in `vectors`.
    pub fn new(
        space: Space,
        degree: usize,
        eval: impl Fn(&DVector<f64>, &[DVector<f64>]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FormField { space, degree, eval: Arc::new(eval) }
    }

    pub fn zero(space: Space, degree: usize) -> Self {
        FormField::new(space, degree, |_, _| 0.0)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        FormField { eval: Arc::new(move |y, v| c * inner(y, v)), ..self.clone() }
    }

    pub fn evaluate(&self, y: &SpacePoint, vectors: &[Tangent]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::Usage(format!("{}-form evaluated on {} vectors", self.degree, vectors.len())));
        }
        let raw: Vec<_> = vectors.iter().map(|v| v.vec().clone()).collect();
        Ok((self.eval)(y.rep(), &raw))
    }

    pub(crate) fn eval_raw(&self, y: &DVector<f64>, vectors: &[DVector<f64>]) -> f64 {
        (self.eval)(y, vectors)
    }
}

/// Region containing the support of a form on a noncompact space.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub center: SpacePoint,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DinvOptions {
    /// Gauss–Legendre nodes in the geodesic radius.
    pub radial: usize,
    /// Gauss–Legendre nodes in the polar angle of the direction sphere (3-dimensional spaces).
    pub polar: usize,
    /// Trapezoid nodes in the azimuth.
    pub azimuth: usize,
    /// Required on `H^n`.
    pub support: Option<Support>,
    /// Ambient vector whose tangent projection at the evaluation point is used as polar axis.
    pub polar_axis: Option<DVector<f64>>,
}

impl Default for DinvOptions {
    fn default() -> Self {
        DinvOptions {
            radial: DEFAULT_RADIAL,
            polar: DEFAULT_POLAR,
            azimuth: DEFAULT_AZIMUTH,
            support: None,
            polar_axis: None,
        }
    }
}

impl DinvOptions {
    /// Every node count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        DinvOptions {
            radial: self.radial * factor,
            polar: self.polar * factor,
            azimuth: self.azimuth * factor,
            ..self.clone()
        }
    }
}

/// A `k`-covector at a point, stored by its values on increasing `k`-subsets of an orthonormal frame.
#[derive(Debug, Clone)]
pub struct Covector {
    base: SpacePoint,
    frame: Vec<Tangent>,
    components: Vec<(Vec<usize>, f64)>,
}

impl Covector {
    pub fn base(&self) -> &SpacePoint {
        &self.base
    }

    pub fn components(&self) -> &[(Vec<usize>, f64)] {
        &self.components
    }

    pub fn frame(&self) -> &[Tangent] {
        &self.frame
    }

    /// Value on `k` tangent vectors (Cauchy–Binet against the frame).
    pub fn apply(&self, vectors: &[Tangent]) -> Result<f64> {
        let raw: Vec<_> = vectors.iter().map(|v| v.vec().clone()).collect();
        self.apply_raw(&raw)
    }

    fn apply_raw(&self, vectors: &[DVector<f64>]) -> Result<f64> {
        let k = self.components.first().map_or(0, |c| c.0.len());
        if vectors.len() != k {
            return Err(Error::Usage(format!("{k}-covector applied to {} vectors", vectors.len())));
        }
        let space = self.base.space();
        let coords: Vec<Vec<f64>> = self.frame.iter().map(|e| vectors.iter().map(|v| space.inner(e.vec(), v)).collect()).collect();
        Ok(self
            .components
            .iter()
            .map(|(idx, c)| {
                let m = DMatrix::from_fn(k, k, |a, b| coords[idx[a]][b]);
                c * m.determinant()
            })
            .sum())
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

/// Unit directions in `T_x M` with their quadrature weights on the direction sphere.
fn directions(x: &SpacePoint, options: &DinvOptions) -> Result<Vec<(DVector<f64>, f64)>> {
    let space = x.space();
    let mut frame: Vec<DVector<f64>> = orthonormal_frame(x).into_iter().map(|t| t.vec().clone()).collect();
    if let Some(axis) = &options.polar_axis {
        let mut a = space.project_tangent(x.rep(), axis);
        let norm = space.inner(&a, &a).max(0.0).sqrt();
        if norm < 1e-12 {
            return Err(Error::Usage("polar axis is normal to the space at the evaluation point".into()));
        }
        a /= norm;
        let mut basis = vec![];
        for e in &frame {
            let mut v = e - &a * space.inner(&a, e);
            for b in &basis {
                v -= b * space.inner(b, &v);
            }
            let n = space.inner(&v, &v).max(0.0).sqrt();
            if n > 1e-6 && basis.len() + 1 < frame.len() {
                basis.push(v / n);
            }
        }
        basis.push(a);
        frame = basis;
    }
    let azimuth = periodic_trapezoid(options.azimuth, TAU);
    match frame.len() {
        2 => Ok(azimuth.iter().map(|(b, w)| (&frame[0] * b.cos() + &frame[1] * b.sin(), w)).collect()),
        3 => {
            let polar = gauss_legendre(options.polar, 0.0, PI);
            let mut out = Vec::with_capacity(polar.len() * azimuth.len());
            for (a, wa) in polar.iter() {
                for (b, wb) in azimuth.iter() {
                    let dir = &frame[0] * (a.sin() * b.cos()) + &frame[1] * (a.sin() * b.sin()) + &frame[2] * a.cos();
                    out.push((dir, wa * wb * a.sin()));
                }
            }
            Ok(out)
        }
        n => Err(Error::Unsupported(format!("d-inverse is implemented for dimensions 2 and 3, got {n}"))),
    }
}

/// `mu_x(v_1..v_k) = int lambda(d) omega_y(P T, P L v_1, ..., P L v_k) dy` in geodesic polar coordinates about `x`.
pub fn d_inverse_eval(spec: &KernelSpec, omega: &FormField, x: &SpacePoint, options: &DinvOptions) -> Result<Covector> {
    let space = spec.space();
    let k = spec.degree();
    if omega.space() != space || x.space() != space {
        return Err(Error::Usage("form, kernel and point must share the space".into()));
    }
    if omega.degree() != k + 1 {
        return Err(Error::Usage(format!("kernel of degree {k} needs a {}-form, got a {}-form", k + 1, omega.degree())));
    }
    let reach = match space.kind() {
        SpaceKind::Sphere if matches!(space.dim(), 2 | 3) => PI,
        SpaceKind::Hyperbolic if matches!(space.dim(), 2 | 3) => {
            let support = options
                .support
                .as_ref()
                .ok_or_else(|| Error::Usage("forms on H^n need a declared support ball".into()))?;
            distance(x, &support.center)? + support.radius
        }
        _ => return Err(Error::Unsupported(format!("d-inverse is not available on {space}"))),
    };
    let frame = orthonormal_frame(x);
    let idx = subsets(space.dim(), k);
    let dirs = directions(x, options)?;
    let radial = gauss_legendre(options.radial, 0.0, reach);
    let n = space.dim() as i32;
    let rows: Vec<Result<Vec<f64>>> = radial
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(r, wr)| {
            let w = spec.weights(r)?;
            let jac = match space.kind() {
                SpaceKind::Sphere => r.sin().powi(n - 1),
                _ => r.sinh().powi(n - 1),
            };
            let mut per_subset: Vec<Vec<f64>> = vec![Vec::with_capacity(dirs.len()); idx.len()];
            for (dir, wd) in &dirs {
                let y = space.geodesic(x.rep(), dir, r);
                let arrive = space.geodesic_velocity(x.rep(), dir, r);
                let chord = Chord { d: r, dir: dir.clone(), arrive: arrive.clone(), y_rep: y.clone(), phase: (1.0, 0.0) };
                let moved: Vec<DVector<f64>> = frame
                    .iter()
                    .map(|e| {
                        let v = e.vec();
                        let a = space.inner(dir, v);
                        let lv = v * w.on_rest + dir * ((w.on_t - w.on_rest) * a);
                        space.transport(&chord, &lv)
                    })
                    .collect();
                for (slot, subset) in per_subset.iter_mut().zip(&idx) {
                    let mut args = Vec::with_capacity(k + 1);
                    args.push(arrive.clone());
                    args.extend(subset.iter().map(|&i| moved[i].clone()));
                    slot.push(wd * omega.eval_raw(&y, &args));
                }
            }
            Ok(per_subset.iter().map(|terms| wr * w.scale * jac * pairwise_sum(terms)).collect())
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let components = idx
        .iter()
        .enumerate()
        .map(|(s, subset)| {
            let col: Vec<f64> = rows.iter().map(|row| row[s]).collect();
            (subset.clone(), pairwise_sum(&col))
        })
        .collect();
    Ok(Covector { base: x.clone(), frame, components })
}

/// A 2-disk `D` with boundary curve `C`: `D` is charted on `[0, 1] x circle` and `C(t) = D(1, t)`.
#[derive(Debug, Clone)]
pub struct DiskChain {
    disk: ParamSubmanifold,
    boundary: ParamSubmanifold,
}

impl DiskChain {
    pub fn new(disk: ParamSubmanifold, boundary: ParamSubmanifold) -> Result<Self> {
        if disk.axes() != [Axis::Interval { lo: 0.0, hi: 1.0 }, Axis::Circle] || boundary.axes() != [Axis::Circle] {
            return Err(Error::Validation("disk must be charted on [0,1] x circle and its boundary on a circle".into()));
        }
        if disk.space() != boundary.space() {
            return Err(Error::Validation("disk and boundary live in different spaces".into()));
        }
        for j in 0..64 {
            let t = TAU * j as f64 / 64.0;
            let a = disk.point(&[1.0, t])?;
            let b = boundary.point(&[t])?;
            let gap = (a.rep() - b.rep()).norm();
            if gap > BOUNDARY_TOLERANCE {
                return Err(Error::Validation(format!("disk boundary misses the curve by {gap:e} at t = {t}")));
            }
        }
        Ok(DiskChain { disk, boundary })
    }

    pub fn disk(&self) -> &ParamSubmanifold {
        &self.disk
    }

    pub fn boundary(&self) -> &ParamSubmanifold {
        &self.boundary
    }
}

/// Node counts for the two sides of a Stokes check.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesResolution {
    pub boundary: usize,
    pub disk_radial: usize,
    pub disk_angular: usize,
    pub dinv: DinvOptions,
}

impl Default for StokesResolution {
    fn default() -> Self {
        StokesResolution { boundary: 64, disk_radial: 32, disk_angular: 64, dinv: DinvOptions::default() }
    }
}

impl StokesResolution {
    /// `levels` resolutions, doubling from a sixteenth of the default.
    pub fn ladder(levels: usize) -> Vec<Self> {
        let d = StokesResolution::default();
        let base = StokesResolution {
            boundary: d.boundary / 16,
            disk_radial: d.disk_radial / 16,
            disk_angular: d.disk_angular / 16,
            dinv: DinvOptions {
                radial: d.dinv.radial / 16,
                polar: d.dinv.polar / 16,
                azimuth: d.dinv.azimuth / 16,
                ..d.dinv
            },
        };
        (0..levels).map(|i| base.refined(1 << i)).collect()
    }

    pub fn refined(&self, factor: usize) -> Self {
        StokesResolution {
            boundary: self.boundary * factor,
            disk_radial: self.disk_radial * factor,
            disk_angular: self.disk_angular * factor,
            dinv: self.dinv.refined(factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesReport {
    pub boundary_integral: f64,
    pub disk_integral: f64,
    /// `|int_C mu - int_D omega| / (1 + |int_D omega|)`.
    pub residual: f64,
}

/// Compares `int_C d^{-1} omega` with `int_D omega`.
pub fn stokes_check(spec: &KernelSpec, omega: &FormField, chain: &DiskChain, resolution: &StokesResolution) -> Result<StokesReport> {
    if spec.degree() != 1 || omega.degree() != 2 {
        return Err(Error::Unsupported("Stokes check is implemented for 2-forms on 2-disks".into()));
    }
    let disk_nodes = chain.disk.sample(&[resolution.disk_radial, resolution.disk_angular])?;
    let disk_terms = disk_nodes
        .nodes
        .par_iter()
        .map(|node| {
            let basis = chain.disk.tangent_basis(&node.u)?;
            Ok(node.weight * omega.evaluate(basis[0].base(), &basis)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let disk_integral = pairwise_sum(&disk_terms);

    let boundary_integral = line_integral(spec, omega, &chain.boundary, resolution.boundary, &resolution.dinv)?;
    let residual = (boundary_integral - disk_integral).abs() / (1.0 + disk_integral.abs());
    Ok(StokesReport { boundary_integral, disk_integral, residual })
}

/// `int_C d^{-1} omega` over a closed curve, with `nodes` trapezoid nodes.
pub fn line_integral(spec: &KernelSpec, omega: &FormField, curve: &ParamSubmanifold, nodes: usize, options: &DinvOptions) -> Result<f64> {
    if curve.dim() != 1 || spec.degree() != 1 {
        return Err(Error::Usage("line integrals need a curve and a degree-1 kernel".into()));
    }
    let samples = curve.sample(&[nodes])?;
    let terms = samples
        .nodes
        .par_iter()
        .map(|node| {
            let basis = curve.tangent_basis(&node.u)?;
            let mu = d_inverse_eval(spec, omega, basis[0].base(), options)?;
            Ok(node.weight * mu.apply(&basis)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// The exact 2-form `2 <a, y> vol_y` on `S^2` (it integrates to zero over the sphere).
pub fn sphere_linear_form(a: [f64; 3]) -> FormField {
    let s2 = Space::sphere(2).expect("S2 exists");
    let a = DVector::from_column_slice(&a);
    FormField::new(s2, 2, move |y, v| {
        let m = DMatrix::from_columns(&[v[0].clone(), v[1].clone(), y.clone()]);
        2.0 * a.dot(y) * m.determinant()
    })
}

/// The geodesic cap of radius `radius` about the unit vector `pole` on `S^2`, as a disk chain.
pub fn sphere_cap(pole: [f64; 3], radius: f64) -> Result<DiskChain> {
    let s2 = Space::sphere(2).expect("S2 exists");
    let p = SpacePoint::normalized(s2, DVector::from_column_slice(&pole))?;
    if !(radius > 0.0 && radius < PI) {
        return Err(Error::Validation(format!("cap radius must lie in (0, pi), got {radius}")));
    }
    let frame = orthonormal_frame(&p);
    let (c, e1, e2) = (p.rep().clone(), frame[0].vec().clone(), frame[1].vec().clone());
    // point and (d/drho, d/dt)
    let cap = Arc::new(move |rho: f64, t: f64| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let a = rho * radius;
        let dir = &e1 * t.cos() + &e2 * t.sin();
        let turn = &e2 * t.cos() - &e1 * t.sin();
        let point = &c * a.cos() + &dir * a.sin();
        let radial = (&c * (-a.sin()) + &dir * a.cos()) * radius;
        (point, radial, turn * a.sin())
    });
    let (c1, c2, c3, c4) = (cap.clone(), cap.clone(), cap.clone(), cap);
    let disk = ParamSubmanifold::new(
        s2,
        vec![Axis::Interval { lo: 0.0, hi: 1.0 }, Axis::Circle],
        move |u| c1(u[0], u[1]).0,
        Some(Arc::new(move |u: &[f64]| {
            let (_, dr, dt) = c2(u[0], u[1]);
            vec![dr, dt]
        })),
    )?;
    let boundary = ParamSubmanifold::new(s2, vec![Axis::Circle], move |u| c3(1.0, u[0]).0, Some(Arc::new(move |u: &[f64]| vec![c4(1.0, u[0]).2])))?;
    DiskChain::new(disk, boundary)
}

/// Thom form of the great circle through the orthonormal pair `(a, b)` in `S^3`, supported in the tube of radius `tau`.
///
/// Each normal disk, oriented so that (disk, circle) is positive, carries total mass one.
pub fn sphere_tube_dual(a: [f64; 4], b: [f64; 4], tau: f64) -> Result<FormField> {
    let s3 = Space::sphere(3).expect("S3 exists");
    if !(tau > 0.0 && tau < PI / 2.0) {
        return Err(Error::Validation(format!("tube radius must lie in (0, pi/2), got {tau}")));
    }
    let (a, b) = (DVector::from_column_slice(&a), DVector::from_column_slice(&b));
    if (a.norm() - 1.0).abs() > 1e-12 || (b.norm() - 1.0).abs() > 1e-12 || a.dot(&b).abs() > 1e-12 {
        return Err(Error::Validation("circle frame must be orthonormal".into()));
    }
    let mut normal = vec![];
    for i in 0..4 {
        let mut v = DVector::from_fn(4, |j, _| if i == j { 1.0 } else { 0.0 });
        for e in [&a, &b].into_iter().chain(normal.iter()) {
            v -= e * e.dot(&v);
        }
        if v.norm() > 1e-6 && normal.len() < 2 {
            normal.push(v.normalize());
        }
    }
    let (c, mut d) = (normal[0].clone(), normal[1].clone());
    // at a point y = a cos t + b sin t of the circle, det[c, d, y', y] = -det[c, d, a, b]
    if DMatrix::from_columns(&[c.clone(), d.clone(), a, b]).determinant() > 0.0 {
        d = -d;
    }
    let s = tau.sin();
    let norm = 140.0 / s.powi(7);
    Ok(FormField::new(s3, 2, move |y, v| {
        let (y1, y2) = (c.dot(y), d.dot(y));
        let r = y1.hypot(y2);
        if r <= 0.0 || r >= s {
            return 0.0;
        }
        let bump = norm * (r * (s - r)).powi(3);
        let area = c.dot(&v[0]) * d.dot(&v[1]) - d.dot(&v[0]) * c.dot(&v[1]);
        bump / (TAU * r) * area
    }))
}

/// A smooth bump `f(r) vol` on `H^2` about the hyperboloid apex, vanishing for `r >= support`.
pub fn hyperbolic_bump_form(support: f64) -> FormField {
    let h2 = Space::hyperbolic(2).expect("H2 exists");
    FormField::new(h2, 2, move |y, v| {
        let r = y[2].max(1.0).acosh();
        let s = r / support;
        if s >= 1.0 {
            return 0.0;
        }
        (1.0 - s * s).powi(4) * h2.volume_raw(y, &[&v[0], &v[1]])
    })
}

/// The geodesic disk of radius `radius` about `center` on `H^2`, as a disk chain.
pub fn hyperbolic_disk(center: &SpacePoint, radius: f64) -> Result<DiskChain> {
    let space = center.space();
    if space.kind() != SpaceKind::Hyperbolic || space.dim() != 2 {
        return Err(Error::Unsupported("hyperbolic disks are built on H^2".into()));
    }
    if radius <= 0.0 {
        return Err(Error::Validation(format!("disk radius must be positive, got {radius}")));
    }
    let frame = orthonormal_frame(center);
    let (c, e1, e2) = (center.rep().clone(), frame[0].vec().clone(), frame[1].vec().clone());
    // point and (d/drho, d/dt)
    let cap = Arc::new(move |rho: f64, t: f64| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let a = rho * radius;
        let dir = &e1 * t.cos() + &e2 * t.sin();
        let turn = &e2 * t.cos() - &e1 * t.sin();
        let point = &c * a.cosh() + &dir * a.sinh();
        let radial = (&c * (a.sinh()) + &dir * a.cosh()) * radius;
        (point, radial, turn * a.sinh())
    });
    let (c1, c2, c3, c4) = (cap.clone(), cap.clone(), cap.clone(), cap);
    let disk = ParamSubmanifold::new(
        space,
        vec![Axis::Interval { lo: 0.0, hi: 1.0 }, Axis::Circle],
        move |u| c1(u[0], u[1]).0,
        Some(Arc::new(move |u: &[f64]| {
            let (_, dr, dt) = c2(u[0], u[1]);
            vec![dr, dt]
        })),
    )?;
    let boundary = ParamSubmanifold::new(space, vec![Axis::Circle], move |u| c3(1.0, u[0]).0, Some(Arc::new(move |u: &[f64]| vec![c4(1.0, u[0]).2])))?;
    DiskChain::new(disk, boundary)
}
