//! Integer linking numbers from elementary topology: signed crossing counts of
//! projected polylines in `R^3`, and signed intersections of a cone over a
//! curve with a triangulated surface in `R^4`.
//!
//! Signs follow the engine's convention, `lk(K, L) = sum sign det(T L, T C)`
//! over the intersections of `L` with a chain `C` bounded by `K`. In `R^3` this
//! is the usual right-handed crossing convention.

use nalgebra::{DVector, Matrix4, Vector3, Vector4};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spaces::{Space, SpaceKind};
use crate::submanifolds::{complex_chart_inverse, hyperboloid_to_ball, Axis, ParamSubmanifold};

/// Width of the band around degenerate configurations that triggers a retry.
pub const DEGENERACY_BAND: f64 = 1e-7;
pub const MAX_RETRIES: usize = 32;
/// Minimal distance from the stereographic pole.
pub const POLE_CLEARANCE: f64 = 1e-6;
const APEX_JITTER: f64 = 1e-6;

/// A closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<DVector<f64>>,
}

impl Polyline {
    /// Builds a closed polyline; a repeated first vertex at the end is dropped.
    pub fn closed(mut points: Vec<DVector<f64>>) -> Result<Self> {
        if points.len() > 1 && (points[0].clone() - points.last().expect("non-empty")).norm() == 0.0 {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::Usage("a closed polyline needs at least 3 distinct vertices".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Usage("polyline vertices have mixed dimensions".into()));
        }
        Ok(Polyline { points })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Polyline { points }
    }

    /// Segments `(p_i, p_{i+1})`, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = (&DVector<f64>, &DVector<f64>)> {
        let n = self.points.len();
        (0..n).map(move |i| (&self.points[i], &self.points[(i + 1) % n]))
    }
}

/// An oriented triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<DVector<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Triangulates the image of a grid on `[lo, hi] x circle` (or `circle x circle`),
    /// merging coincident vertices (e.g. poles) and dropping collapsed triangles.
    pub fn from_grid(
        f: impl Fn(f64, f64) -> Result<DVector<f64>>,
        first: Axis,
        n1: usize,
        n2: usize,
    ) -> Result<Self> {
        if n1 < 1 || n2 < 3 {
            return Err(Error::Usage("mesh grid is too coarse".into()));
        }
        let (rows, periodic) = match first {
            Axis::Interval { .. } => (n1 + 1, false),
            Axis::Circle => (n1, true),
        };
        let s_at = |i: usize| match first {
            Axis::Interval { lo, hi } => lo + (hi - lo) * i as f64 / n1 as f64,
            Axis::Circle => std::f64::consts::TAU * i as f64 / n1 as f64,
        };
        let mut vertices: Vec<DVector<f64>> = Vec::new();
        let mut index = vec![vec![0usize; n2]; rows];
        for (i, row) in index.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let p = f(s_at(i), std::f64::consts::TAU * j as f64 / n2 as f64)?;
                let scale = 1.0 + p.norm();
                let existing = vertices.iter().position(|q| (q - &p).norm() <= 1e-12 * scale);
                *slot = existing.unwrap_or_else(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
            }
        }
        let mut triangles = Vec::new();
        let cells = if periodic { rows } else { rows - 1 };
        for i in 0..cells {
            let i1 = (i + 1) % rows;
            for j in 0..n2 {
                let j1 = (j + 1) % n2;
                for tri in [[index[i][j], index[i1][j], index[i1][j1]], [index[i][j], index[i1][j1], index[i][j1]]] {
                    if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                        triangles.push(tri);
                    }
                }
            }
        }
        Ok(TriMesh { vertices, triangles })
    }

    pub fn reversed(&self) -> Self {
        TriMesh { vertices: self.vertices.clone(), triangles: self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect() }
    }

    /// Every directed edge occurs once and is matched by its reverse (a closed, coherently oriented surface).
    pub fn is_closed_and_oriented(&self) -> bool {
        use std::collections::HashMap;
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *edges.entry((a, b)).or_default() += 1;
            }
        }
        edges.iter().all(|(&(a, b), &c)| c == 1 && edges.get(&(b, a)) == Some(&1))
    }
}

fn unit_vector<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    loop {
        let mut v = [0.0; N];
        for c in v.iter_mut() {
            *c = rng.random_range(-1.0..=1.0);
        }
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (0.1..=1.0).contains(&n) {
            return v.map(|c| c / n);
        }
    }
}

fn v3(p: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(p[0], p[1], p[2])
}

fn v4(p: &DVector<f64>) -> Vector4<f64> {
    Vector4::new(p[0], p[1], p[2], p[3])
}

/// Twice the linking number from one projection direction, or `None` if the projection is degenerate.
fn crossing_sum(k: &[(Vector3<f64>, Vector3<f64>)], l: &[(Vector3<f64>, Vector3<f64>)], u: Vector3<f64>) -> Option<i64> {
    let helper = if u.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
    let e1 = u.cross(&helper).normalize();
    let e2 = u.cross(&e1);
    let proj = |p: &Vector3<f64>| (p.dot(&e1), p.dot(&e2));
    let cross2 = |a: (f64, f64), b: (f64, f64)| a.0 * b.1 - a.1 * b.0;
    let band = DEGENERACY_BAND;
    let mut sum = 0i64;
    for (p0, p1) in k {
        let (a0, a1) = (proj(p0), proj(p1));
        let r = (a1.0 - a0.0, a1.1 - a0.1);
        for (q0, q1) in l {
            let (b0, b1) = (proj(q0), proj(q1));
            let s = (b1.0 - b0.0, b1.1 - b0.1);
            let denom = cross2(r, s);
            let qp = (b0.0 - a0.0, b0.1 - a0.1);
            let rs = r.0.hypot(r.1) * s.0.hypot(s.1);
            if denom.abs() <= 1e-12 * rs {
                // Parallel in projection: degenerate only if the two segments are collinear and close.
                if cross2(qp, r).abs() <= band * rs.max(f64::MIN_POSITIVE) {
                    return None;
                }
                continue;
            }
            let t = cross2(qp, s) / denom;
            let w = cross2(qp, r) / denom;
            if t < -band || t > 1.0 + band || w < -band || w > 1.0 + band {
                continue;
            }
            if t < band || t > 1.0 - band || w < band || w > 1.0 - band {
                return None;
            }
            let hk = u.dot(&(p0 + (p1 - p0) * t));
            let hl = u.dot(&(q0 + (q1 - q0) * w));
            if (hk - hl).abs() < band {
                return None;
            }
            let (dk, dl) = (p1 - p0, q1 - q0);
            let (over, under) = if hk > hl { (dk, dl) } else { (dl, dk) };
            sum += if u.dot(&over.cross(&under)) > 0.0 { 1 } else { -1 };
        }
    }
    (sum % 2 == 0).then_some(sum)
}

/// Linking number of two disjoint closed polylines in `R^3` from signed crossings.
pub fn crossing_linking_r3(k: &Polyline, l: &Polyline, seed: u64) -> Result<i64> {
    crossing_linking_r3_directions(k, l, seed).map(|(lk, _)| lk)
}

/// As [`crossing_linking_r3`], also returning the projection direction used.
pub fn crossing_linking_r3_directions(k: &Polyline, l: &Polyline, seed: u64) -> Result<(i64, [f64; 3])> {
    if k.dim() != 3 || l.dim() != 3 {
        return Err(Error::Usage("crossing oracle needs polylines in R3".into()));
    }
    let ks: Vec<_> = k.segments().map(|(a, b)| (v3(a), v3(b))).collect();
    let ls: Vec<_> = l.segments().map(|(a, b)| (v3(a), v3(b))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let u: [f64; 3] = unit_vector(&mut rng);
        if let Some(sum) = crossing_sum(&ks, &ls, Vector3::from(u)) {
            return Ok((sum / 2, u));
        }
    }
    Err(Error::OracleFailure(format!("no generic projection found in {MAX_RETRIES} attempts")))
}

/// Orthonormal basis `b_1, b_2, b_3` of `p^perp` with `det(b_1, b_2, b_3, p) = -1`, so
/// that stereographic projection from `p` preserves the outward-normal orientation of `S^3`.
fn stereographic_basis(p: &DVector<f64>) -> [DVector<f64>; 3] {
    let drop = (0..4).max_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).expect("4 coordinates");
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(3);
    for i in (0..4).filter(|&i| i != drop) {
        let mut v = DVector::zeros(4);
        v[i] = 1.0;
        v -= p * p.dot(&v);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        basis.push(v.normalize());
    }
    let m = nalgebra::Matrix4::from_columns(&[v4(&basis[0]), v4(&basis[1]), v4(&basis[2]), v4(p)]);
    if m.determinant() > 0.0 {
        basis[2] = -basis[2].clone();
    }
    [basis[0].clone(), basis[1].clone(), basis[2].clone()]
}

/// Maps ambient representatives on `S^3` or `H^3` to `R^3` and closes them into a polyline:
/// stereographic projection from `basepoint` on `S^3`, the Poincaré ball on `H^3`.
pub fn chart_to_r3(space: Space, points: &[DVector<f64>], basepoint: Option<&DVector<f64>>) -> Result<Polyline> {
    if space.dim() != 3 {
        return Err(Error::Unsupported(format!("no R3 chart for {space}")));
    }
    let mapped = match space.kind() {
        SpaceKind::Euclidean => points.to_vec(),
        SpaceKind::Hyperbolic => points.iter().map(hyperboloid_to_ball).collect(),
        SpaceKind::Sphere => {
            let p = basepoint.ok_or_else(|| Error::Usage("stereographic projection needs a basepoint".into()))?;
            let p = p.normalize();
            let basis = stereographic_basis(&p);
            points
                .iter()
                .map(|x| {
                    if (x - &p).norm() < POLE_CLEARANCE {
                        return Err(Error::Chart("curve passes through the projection pole".into()));
                    }
                    let denom = 1.0 - p.dot(x);
                    Ok(DVector::from_fn(3, |i, _| basis[i].dot(x) / denom))
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => return Err(Error::Unsupported(format!("no R3 chart for {space}"))),
    };
    Polyline::closed(mapped)
}

/// Signed intersections of the cone from `apex` over `k` with the mesh `l`, or `None` if degenerate.
fn cone_sum(k: &[(Vector4<f64>, Vector4<f64>)], tris: &[[Vector4<f64>; 3]], apex: Vector4<f64>) -> Option<i64> {
    let band = DEGENERACY_BAND;
    let mut sum = 0i64;
    for (a, b) in k {
        let (e1, e2) = (a - apex, b - apex);
        for [p0, p1, p2] in tris {
            let (f1, f2) = (p1 - p0, p2 - p0);
            let m = Matrix4::from_columns(&[e1, e2, -f1, -f2]);
            let scale = e1.norm() * e2.norm() * f1.norm() * f2.norm();
            let det = m.determinant();
            if det.abs() <= 1e-14 * scale {
                continue;
            }
            let Some(sol) = m.lu().solve(&(p0 - apex)) else { continue };
            let (s, t, sg, ta) = (sol[0], sol[1], sol[2], sol[3]);
            let outside = |x: f64, y: f64| x < -band || y < -band || x + y > 1.0 + band;
            if outside(s, t) || outside(sg, ta) {
                continue;
            }
            let near = |x: f64, y: f64| x < band || y < band || x + y > 1.0 - band;
            if near(s, t) || near(sg, ta) {
                return None;
            }
            let orient = Matrix4::from_columns(&[f1, f2, e1, e2]).determinant();
            sum += if orient > 0.0 { 1 } else { -1 };
        }
    }
    Some(sum)
}

/// Linking number of a closed polyline `k` with a closed oriented triangulated surface `l` in `R^4`.
pub fn cone_linking_r4(k: &Polyline, l: &TriMesh, apex: &DVector<f64>, seed: u64) -> Result<i64> {
    if k.dim() != 4 || apex.len() != 4 || l.vertices.iter().any(|v| v.len() != 4) {
        return Err(Error::Usage("cone oracle works in R4".into()));
    }
    let ks: Vec<_> = k.segments().map(|(a, b)| (v4(a), v4(b))).collect();
    let tris: Vec<[Vector4<f64>; 3]> = l
        .triangles
        .iter()
        .map(|t| [v4(&l.vertices[t[0]]), v4(&l.vertices[t[1]]), v4(&l.vertices[t[2]])])
        .collect();
    let scale = 1.0 + apex.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = v4(apex);
    for _ in 0..MAX_RETRIES {
        if let Some(sum) = cone_sum(&ks, &tris, current) {
            return Ok(sum);
        }
        let jitter: [f64; 4] = unit_vector(&mut rng);
        current = v4(apex) + Vector4::from(jitter) * (APEX_JITTER * scale);
    }
    Err(Error::OracleFailure(format!("cone stayed degenerate after {MAX_RETRIES} apex perturbations")))
}

/// Oracle output for a pair of submanifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub linking_number: i64,
    pub method: &'static str,
}

fn curve_points(m: &ParamSubmanifold, n: usize) -> Result<Vec<DVector<f64>>> {
    (0..n)
        .map(|j| m.point(&[std::f64::consts::TAU * j as f64 / n as f64]).map(|p| p.rep().clone()))
        .collect()
}

fn oriented_curve(m: &ParamSubmanifold, points: Vec<DVector<f64>>, map: impl Fn(Vec<DVector<f64>>) -> Result<Polyline>) -> Result<Polyline> {
    let line = map(points)?;
    Ok(if m.orientation() < 0.0 { line.reversed() } else { line })
}

fn surface_mesh(m: &ParamSubmanifold, n: usize, to_r4: impl Fn(&DVector<f64>) -> Result<DVector<f64>>) -> Result<TriMesh> {
    let axes = m.axes();
    if axes.len() != 2 || axes[1] != Axis::Circle {
        return Err(Error::Unsupported("mesh oracle needs a surface with a circle as second axis".into()));
    }
    let mesh = TriMesh::from_grid(|s, t| to_r4(m.point(&[s, t])?.rep()), axes[0], n, n)?;
    Ok(if m.orientation() < 0.0 { mesh.reversed() } else { mesh })
}

/// Integer linking number of `k` with `l` from the appropriate topological oracle.
///
/// Curves are sampled with `samples` vertices, surfaces with a `samples x samples` grid.
pub fn oracle_linking(k: &ParamSubmanifold, l: &ParamSubmanifold, samples: usize, seed: u64) -> Result<OracleResult> {
    let space = k.space();
    if l.space() != space {
        return Err(Error::Usage("submanifolds live in different spaces".into()));
    }
    if k.dim() + l.dim() + 1 != space.dim() {
        return Err(Error::Validation("dimension constraint k + l + 1 = n violated".into()));
    }
    match (space.kind(), space.dim(), k.dim(), l.dim()) {
        (SpaceKind::Euclidean | SpaceKind::Hyperbolic, 3, 1, 1) => {
            let map = |pts: Vec<DVector<f64>>| chart_to_r3(space, &pts, None);
            let kp = oriented_curve(k, curve_points(k, samples)?, map)?;
            let lp = oriented_curve(l, curve_points(l, samples)?, map)?;
            let method = if space.kind() == SpaceKind::Euclidean { "crossing" } else { "ball_crossing" };
            Ok(OracleResult { linking_number: crossing_linking_r3(&kp, &lp, seed)?, method })
        }
        (SpaceKind::Sphere, 3, 1, 1) => {
            let kpts = curve_points(k, samples)?;
            let lpts = curve_points(l, samples)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for attempt in 0..MAX_RETRIES {
                let pole = DVector::from_column_slice(&unit_vector::<4>(&mut rng));
                let map = |pts: Vec<DVector<f64>>| chart_to_r3(space, &pts, Some(&pole));
                let projected = oriented_curve(k, kpts.clone(), map).and_then(|kp| Ok((kp, oriented_curve(l, lpts.clone(), map)?)));
                match projected {
                    Ok((kp, lp)) => {
                        let lk = crossing_linking_r3(&kp, &lp, seed.wrapping_add(attempt as u64))?;
                        return Ok(OracleResult { linking_number: lk, method: "stereographic_crossing" });
                    }
                    Err(Error::Chart(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::OracleFailure("no admissible stereographic pole found".into()))
        }
        (SpaceKind::Euclidean | SpaceKind::ComplexHyperbolic2 | SpaceKind::ComplexProjective2, 4, 1, 2)
        | (SpaceKind::Euclidean | SpaceKind::ComplexHyperbolic2 | SpaceKind::ComplexProjective2, 4, 2, 1) => {
            let to_r4 = |x: &DVector<f64>| -> Result<DVector<f64>> {
                match space.kind() {
                    SpaceKind::Euclidean => Ok(x.clone()),
                    _ => complex_chart_inverse(space, x),
                }
            };
            let (curve, surface) = if k.dim() == 1 { (k, l) } else { (l, k) };
            let cpts = curve_points(curve, samples)?.iter().map(&to_r4).collect::<Result<Vec<_>>>()?;
            let line = oriented_curve(curve, cpts, Polyline::closed)?;
            let mesh = surface_mesh(surface, samples, to_r4)?;
            let radius = line.points().iter().chain(&mesh.vertices).map(|p| p.norm()).fold(0.0, f64::max);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let apex = DVector::from_column_slice(&unit_vector::<4>(&mut rng)) * (1.5 * radius + 1.0);
            let lk = cone_linking_r4(&line, &mesh, &apex, seed)?;
            // lk(L, K) = (-1)^{(k+1)(l+1)} lk(K, L); with k + l = 3 the factor is +1.
            Ok(OracleResult { linking_number: lk, method: "cone_intersection" })
        }
        _ => Err(Error::Unsupported(format!(
            "no oracle for a ({}, {}) pair in {space}",
            k.dim(),
            l.dim()
        ))),
    }
}
