//! Exact geometry of the rank-one model spaces.
//!
//! Every space is realized inside a real ambient vector space carrying a
//! constant symmetric bilinear form `<.,.>`:
//!
//! | space | ambient | form | points |
//! |-------|---------|------|--------|
//! | `R^n` | `R^n` | Euclidean | any vector |
//! | `S^n` | `R^{n+1}` | Euclidean | `<x,x> = 1` |
//! | `H^n` | `R^{n+1}` | Minkowski, time coordinate last | `<x,x> = -1`, `x_n > 0` |
//! | `CP^2` | `C^3 = R^6` | `Re h`, `h` standard Hermitian | `h(z,z) = 1`, modulo phase |
//! | `CH^2` | `C^3 = R^6` | `Re h`, `h` of signature (2,1) | `h(z,z) = -1`, modulo phase |
//!
//! Complex vectors are stored interleaved, `(Re z1, Im z1, Re z2, Im z2, Re z3, Im z3)`.
//! Tangent vectors of the complex spaces are horizontal lifts: `h(z, v) = 0`.
//! Parallel transport along a minimizing geodesic is the differential of the
//! transvection, which is the identity on the complement of the geodesic's
//! real 2-plane (constant curvature) or complex line (complex spaces).

mod isometry;

pub use isometry::Isometry;

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance to the cut locus below which a pair is treated as conjugate-singular.
pub const CUT_TOLERANCE: f64 = 1e-9;

const CONSTRAINT_TOLERANCE: f64 = 1e-12;
const TANGENCY_TOLERANCE: f64 = 1e-9;
const UNIT_TOLERANCE: f64 = 1e-9;
const SAME_POINT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    ComplexHyperbolic2,
    ComplexProjective2,
}

/// A model space together with its real dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    kind: SpaceKind,
    dim: usize,
}

impl Space {
    pub fn new(kind: SpaceKind, dim: usize) -> Result<Self> {
        match kind {
            SpaceKind::ComplexHyperbolic2 | SpaceKind::ComplexProjective2 if dim != 4 => Err(
                Error::Usage(format!("{kind:?} has real dimension 4, got {dim}")),
            ),
            _ if dim < 2 => Err(Error::Usage(format!("dimension must be >= 2, got {dim}"))),
            _ => Ok(Space { kind, dim }),
        }
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Euclidean, n)
    }

    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Sphere, n)
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Hyperbolic, n)
    }

    pub fn complex_hyperbolic_plane() -> Self {
        Space { kind: SpaceKind::ComplexHyperbolic2, dim: 4 }
    }

    pub fn complex_projective_plane() -> Self {
        Space { kind: SpaceKind::ComplexProjective2, dim: 4 }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Real dimension of the space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Multiplicity of the Jacobi eigenvalue 4 (curvature of complex lines).
    pub fn multiplicity(&self) -> usize {
        if self.is_complex() {
            1
        } else {
            0
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.kind, SpaceKind::ComplexHyperbolic2 | SpaceKind::ComplexProjective2)
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.kind, SpaceKind::Sphere | SpaceKind::ComplexProjective2)
    }

    /// Length of representative vectors.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Euclidean => self.dim,
            SpaceKind::Sphere | SpaceKind::Hyperbolic => self.dim + 1,
            SpaceKind::ComplexHyperbolic2 | SpaceKind::ComplexProjective2 => 6,
        }
    }

    /// Injectivity radius: `pi` on spheres, `pi/2` on `CP^2`, none otherwise.
    pub fn cut_distance(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Sphere => Some(PI),
            SpaceKind::ComplexProjective2 => Some(PI / 2.0),
            _ => None,
        }
    }

    /// Value of `<x,x>` for representatives, if constrained.
    pub fn normalization(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Euclidean => None,
            SpaceKind::Sphere | SpaceKind::ComplexProjective2 => Some(1.0),
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => Some(-1.0),
        }
    }

    fn signature(&self, i: usize) -> f64 {
        match self.kind {
            SpaceKind::Hyperbolic if i == self.dim => -1.0,
            SpaceKind::ComplexHyperbolic2 if i >= 4 => -1.0,
            _ => 1.0,
        }
    }

    /// The ambient bilinear form; restricted to tangent vectors it is the Riemannian metric.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self.kind {
            SpaceKind::Euclidean | SpaceKind::Sphere | SpaceKind::ComplexProjective2 => a.dot(b),
            _ => a.iter().zip(b.iter()).enumerate().map(|(i, (p, q))| self.signature(i) * p * q).sum(),
        }
    }

    pub(crate) fn norm(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Projects an ambient vector onto the (horizontal) tangent space at `x`.
    pub(crate) fn project_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let Some(c) = self.normalization() else {
            return v.clone();
        };
        let mut w = v - x * (self.inner(x, v) / c);
        if self.is_complex() {
            let jx = mul_i(x);
            w -= &jx * (self.inner(&jx, v) / c);
        }
        w
    }

    /// Geodesic data between two representatives.
    pub(crate) fn chord(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<Chord> {
        let (y_rep, phase) = match self.kind {
            SpaceKind::ComplexProjective2 | SpaceKind::ComplexHyperbolic2 => {
                let re = self.inner(x, y);
                let im = self.inner(&mul_i(x), y);
                let m = re.hypot(im);
                if m < 1e-300 {
                    return Err(Error::CutLocus { distance: PI / 2.0, cut: PI / 2.0 });
                }
                // Choose the representative with h(x, y') real; positive on CP^2, negative on CH^2.
                let sign = if self.kind == SpaceKind::ComplexProjective2 { 1.0 } else { -1.0 };
                let phase = (sign * re / m, -sign * im / m);
                (complex_scale(y, phase), phase)
            }
            _ => (y.clone(), (1.0, 0.0)),
        };
        let diff = &y_rep - x;
        let d = match self.kind {
            SpaceKind::Euclidean => diff.norm(),
            SpaceKind::Sphere | SpaceKind::ComplexProjective2 => {
                2.0 * diff.norm().atan2((&y_rep + x).norm())
            }
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => {
                2.0 * (0.5 * self.norm(&diff)).asinh()
            }
        };
        if let Some(cut) = self.cut_distance() {
            if d > cut - CUT_TOLERANCE {
                return Err(Error::CutLocus { distance: d, cut });
            }
        }
        let w = self.project_tangent(x, &diff);
        let wn = self.norm(&w);
        if d == 0.0 || wn == 0.0 {
            return Err(Error::Degenerate("coincident points have no direction".into()));
        }
        let dir = w / wn;
        let arrive = match self.kind {
            SpaceKind::Euclidean => dir.clone(),
            SpaceKind::Sphere | SpaceKind::ComplexProjective2 => x * (-d.sin()) + &dir * d.cos(),
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => x * d.sinh() + &dir * d.cosh(),
        };
        Ok(Chord { d, dir, arrive, y_rep, phase })
    }

    /// Parallel transport of `v` (tangent at `x`) along the chord; result is at `chord.y_rep`.
    pub(crate) fn transport(&self, chord: &Chord, v: &DVector<f64>) -> DVector<f64> {
        if self.kind == SpaceKind::Euclidean {
            return v.clone();
        }
        let mut out = v + (&chord.arrive - &chord.dir) * self.inner(&chord.dir, v);
        if self.is_complex() {
            let jt = mul_i(&chord.dir);
            let coeff = self.inner(&jt, v);
            out += (mul_i(&chord.arrive) - jt) * coeff;
        }
        out
    }

    pub(crate) fn geodesic(&self, x: &DVector<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
        match self.kind {
            SpaceKind::Euclidean => x + v * t,
            SpaceKind::Sphere | SpaceKind::ComplexProjective2 => x * t.cos() + v * t.sin(),
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => x * t.cosh() + v * t.sinh(),
        }
    }

    pub(crate) fn geodesic_velocity(&self, x: &DVector<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
        match self.kind {
            SpaceKind::Euclidean => v.clone(),
            SpaceKind::Sphere | SpaceKind::ComplexProjective2 => x * (-t.sin()) + v * t.cos(),
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => x * t.sinh() + v * t.cosh(),
        }
    }

    /// Columns appended to tangent vectors so that the determinant is the volume form.
    pub(crate) fn normal_columns(&self, y: &DVector<f64>) -> Vec<DVector<f64>> {
        match self.kind {
            SpaceKind::Euclidean => vec![],
            SpaceKind::Sphere | SpaceKind::Hyperbolic => vec![y.clone()],
            SpaceKind::ComplexHyperbolic2 | SpaceKind::ComplexProjective2 => {
                vec![y.clone(), mul_i(y)]
            }
        }
    }

    /// Volume form at representative `y` evaluated on raw ambient tangent vectors.
    pub(crate) fn volume_raw(&self, y: &DVector<f64>, w: &[&DVector<f64>]) -> f64 {
        let n = self.ambient_dim();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (j, col) in w.iter().enumerate() {
            m.set_column(j, col);
        }
        for (j, col) in self.normal_columns(y).iter().enumerate() {
            m.set_column(w.len() + j, col);
        }
        m.determinant()
    }

    fn frame_raw(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let n = self.ambient_dim();
        let unit = |i: usize| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        };
        match self.kind {
            SpaceKind::Euclidean => (0..n).map(unit).collect(),
            SpaceKind::Sphere | SpaceKind::Hyperbolic => {
                let candidates: Vec<usize> = if self.kind == SpaceKind::Sphere {
                    let drop = argmax_abs(x.iter().copied());
                    (0..n).filter(|&i| i != drop).collect()
                } else {
                    (0..self.dim).collect()
                };
                let mut frame: Vec<DVector<f64>> = Vec::with_capacity(self.dim);
                for i in candidates {
                    let mut v = self.project_tangent(x, &unit(i));
                    for f in &frame {
                        v -= f * self.inner(f, &v);
                    }
                    frame.push(&v / self.norm(&v));
                }
                let refs: Vec<&DVector<f64>> = frame.iter().collect();
                if self.volume_raw(x, &refs) < 0.0 {
                    let last = frame.last_mut().expect("frame is non-empty");
                    *last = -last.clone();
                }
                frame
            }
            SpaceKind::ComplexProjective2 | SpaceKind::ComplexHyperbolic2 => {
                let candidates: Vec<usize> = if self.kind == SpaceKind::ComplexProjective2 {
                    let drop = argmax_abs((0..3).map(|j| x[2 * j].hypot(x[2 * j + 1])));
                    (0..3).filter(|&j| j != drop).collect()
                } else {
                    vec![0, 1]
                };
                let mut complex_frame: Vec<DVector<f64>> = Vec::with_capacity(2);
                for j in candidates {
                    let mut v = self.project_tangent(x, &unit(2 * j));
                    for f in &complex_frame {
                        let jf = mul_i(f);
                        v -= f * self.inner(f, &v) + &jf * self.inner(&jf, &v);
                    }
                    complex_frame.push(&v / self.norm(&v));
                }
                complex_frame.iter().flat_map(|f| [f.clone(), mul_i(f)]).collect()
            }
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Euclidean => write!(f, "R{}", self.dim),
            SpaceKind::Sphere => write!(f, "S{}", self.dim),
            SpaceKind::Hyperbolic => write!(f, "H{}", self.dim),
            SpaceKind::ComplexHyperbolic2 => write!(f, "CH2"),
            SpaceKind::ComplexProjective2 => write!(f, "CP2"),
        }
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    /// Parses names like `R3`, `S3`, `H2`, `CH2`, `CP2`.
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "CH2" => return Ok(Space::complex_hyperbolic_plane()),
            "CP2" => return Ok(Space::complex_projective_plane()),
            _ => {}
        }
        let bad = || Error::Usage(format!("unknown space {s:?} (expected R<n>, S<n>, H<n>, CH2, CP2)"));
        let (head, digits) = upper.split_at(1.min(upper.len()));
        let dim: usize = digits.parse().map_err(|_| bad())?;
        let kind = match head {
            "R" | "E" => SpaceKind::Euclidean,
            "S" => SpaceKind::Sphere,
            "H" => SpaceKind::Hyperbolic,
            _ => return Err(bad()),
        };
        Space::new(kind, dim)
    }
}

fn argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best })
        .0
}

/// Multiplication by `i` on interleaved complex vectors.
pub(crate) fn mul_i(v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for j in 0..v.len() / 2 {
        out[2 * j] = -v[2 * j + 1];
        out[2 * j + 1] = v[2 * j];
    }
    out
}

/// Multiplication by the complex scalar `re + i im` on interleaved vectors.
pub(crate) fn complex_scale(v: &DVector<f64>, (re, im): (f64, f64)) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for j in 0..v.len() / 2 {
        let (a, b) = (v[2 * j], v[2 * j + 1]);
        out[2 * j] = re * a - im * b;
        out[2 * j + 1] = re * b + im * a;
    }
    out
}

/// Geodesic data from `x` to `y`.
#[derive(Debug, Clone)]
pub(crate) struct Chord {
    pub d: f64,
    /// Unit initial velocity at `x` (the direction pointing to `y`).
    pub dir: DVector<f64>,
    /// Velocity of the geodesic on arrival at `y_rep`.
    pub arrive: DVector<f64>,
    /// Representative of `y` on which `arrive` and transported vectors live.
    pub y_rep: DVector<f64>,
    /// `y_rep = phase * y` (always `(1, 0)` for real spaces).
    pub phase: (f64, f64),
}

/// A point of a model space, stored as its ambient representative.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacePoint {
    space: Space,
    rep: DVector<f64>,
}

impl SpacePoint {
    /// Wraps a representative, checking length and the normalization constraint.
    pub fn new(space: Space, rep: impl Into<DVector<f64>>) -> Result<Self> {
        let rep = rep.into();
        if rep.len() != space.ambient_dim() {
            return Err(Error::Usage(format!(
                "{space} points have {} ambient coordinates, got {}",
                space.ambient_dim(),
                rep.len()
            )));
        }
        if let Some(c) = space.normalization() {
            let scale = rep.norm_squared().max(1.0);
            if (space.inner(&rep, &rep) - c).abs() > CONSTRAINT_TOLERANCE * scale {
                return Err(Error::Usage(format!("representative violates <x,x> = {c}")));
            }
        }
        if space.kind == SpaceKind::Hyperbolic && rep[space.dim] <= 0.0 {
            return Err(Error::Usage("hyperboloid points need a positive last coordinate".into()));
        }
        Ok(SpacePoint { space, rep })
    }

    /// Rescales an arbitrary ambient vector onto the model (sphere, hyperboloid, unit complex vectors).
    pub fn normalized(space: Space, raw: impl Into<DVector<f64>>) -> Result<Self> {
        let raw = raw.into();
        let Some(c) = space.normalization() else {
            return Self::new(space, raw);
        };
        let q = space.inner(&raw, &raw);
        if q * c <= 0.0 {
            return Err(Error::Usage("vector cannot be normalized onto the model".into()));
        }
        let mut rep = raw / (q / c).sqrt();
        if space.kind == SpaceKind::Hyperbolic && rep[space.dim] < 0.0 {
            rep = -rep;
        }
        Self::new(space, rep)
    }

    pub(crate) fn from_raw_unchecked(space: Space, rep: DVector<f64>) -> Self {
        SpacePoint { space, rep }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn rep(&self) -> &DVector<f64> {
        &self.rep
    }

    /// Equality of points, modulo phase on the complex spaces.
    pub fn same_point(&self, other: &SpacePoint) -> bool {
        if self.space != other.space {
            return false;
        }
        if self.space.is_complex() {
            let re = self.space.inner(&self.rep, &other.rep);
            let im = self.space.inner(&mul_i(&self.rep), &other.rep);
            (re.hypot(im) - 1.0).abs() <= SAME_POINT_TOLERANCE
        } else {
            (&self.rep - &other.rep).norm() <= SAME_POINT_TOLERANCE * (1.0 + self.rep.norm())
        }
    }
}

/// A tangent vector: base point plus an ambient vector in its (horizontal) tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    base: SpacePoint,
    vec: DVector<f64>,
}

impl Tangent {
    pub fn new(base: SpacePoint, vec: impl Into<DVector<f64>>) -> Result<Self> {
        let vec = vec.into();
        let space = base.space;
        if vec.len() != space.ambient_dim() {
            return Err(Error::Usage("tangent vector has the wrong length".into()));
        }
        let drift = (space.project_tangent(&base.rep, &vec) - &vec).norm();
        if drift > TANGENCY_TOLERANCE * (1.0 + vec.norm() * base.rep.norm()) {
            return Err(Error::Usage(format!("vector is not tangent at the base point (drift {drift:e})")));
        }
        Ok(Tangent { base, vec })
    }

    /// Projects an arbitrary ambient vector onto the tangent space at `base`.
    pub fn projected(base: SpacePoint, raw: impl Into<DVector<f64>>) -> Self {
        let vec = base.space.project_tangent(&base.rep, &raw.into());
        Tangent { base, vec }
    }

    pub(crate) fn from_raw_unchecked(base: SpacePoint, vec: DVector<f64>) -> Self {
        Tangent { base, vec }
    }

    pub fn base(&self) -> &SpacePoint {
        &self.base
    }

    pub fn vec(&self) -> &DVector<f64> {
        &self.vec
    }

    pub fn inner(&self, other: &Tangent) -> f64 {
        self.base.space.inner(&self.vec, &other.vec)
    }

    pub fn norm(&self) -> f64 {
        self.base.space.norm(&self.vec)
    }

    pub fn scaled(&self, s: f64) -> Tangent {
        Tangent { base: self.base.clone(), vec: &self.vec * s }
    }

    pub fn plus(&self, other: &Tangent) -> Result<Tangent> {
        require_base(other, &self.base)?;
        Ok(Tangent { base: self.base.clone(), vec: &self.vec + &other.vec })
    }
}

fn require_same_space(x: &SpacePoint, y: &SpacePoint) -> Result<()> {
    if x.space != y.space {
        return Err(Error::Usage(format!("points live in different spaces ({} vs {})", x.space, y.space)));
    }
    Ok(())
}

fn require_base(v: &Tangent, x: &SpacePoint) -> Result<()> {
    require_same_space(&v.base, x)?;
    if !v.base.same_point(x) {
        return Err(Error::Usage("tangent vector is based at a different point".into()));
    }
    Ok(())
}

/// Expresses a vector tangent at `v.base` relative to the representative `x` of the same point.
fn rebase(v: &Tangent, x: &SpacePoint) -> DVector<f64> {
    if !x.space.is_complex() {
        return v.vec.clone();
    }
    // x = c * base with |c| = 1, so the vector transforms by the same phase.
    let space = x.space;
    let c = space.normalization().expect("complex spaces are normalized");
    let re = space.inner(&v.base.rep, &x.rep) / c;
    let im = space.inner(&mul_i(&v.base.rep), &x.rep) / c;
    complex_scale(&v.vec, (re, im))
}

/// Riemannian distance.
pub fn distance(x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    require_same_space(x, y)?;
    match x.space.chord(&x.rep, &y.rep) {
        Ok(ch) => Ok(ch.d),
        Err(Error::Degenerate(_)) => Ok(0.0),
        Err(Error::CutLocus { distance, .. }) => Ok(distance),
        Err(e) => Err(e),
    }
}

/// Unit tangent at `x` of the minimizing geodesic towards `y`.
pub fn log_unit(x: &SpacePoint, y: &SpacePoint) -> Result<Tangent> {
    require_same_space(x, y)?;
    let ch = x.space.chord(&x.rep, &y.rep)?;
    Ok(Tangent::from_raw_unchecked(x.clone(), ch.dir))
}

/// Point at arclength `t` along the unit-speed geodesic from `x` with velocity `v`.
pub fn exp(x: &SpacePoint, v: &Tangent, t: f64) -> Result<SpacePoint> {
    require_base(v, x)?;
    let vx = rebase(v, x);
    if (x.space.inner(&vx, &vx) - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Usage("exp needs a unit tangent vector".into()));
    }
    Ok(SpacePoint::from_raw_unchecked(x.space, x.space.geodesic(&x.rep, &vx, t)))
}

/// Velocity at time `t` of the geodesic `exp(x, v, .)`, based at `exp(x, v, t)`.
pub fn geodesic_velocity(x: &SpacePoint, v: &Tangent, t: f64) -> Result<Tangent> {
    let y = exp(x, v, t)?;
    let vx = rebase(v, x);
    let vel = x.space.geodesic_velocity(&x.rep, &vx, t);
    Ok(Tangent::from_raw_unchecked(y, vel))
}

/// Parallel transport of `v` from `x` to `y` along the minimizing geodesic.
///
/// The result is expressed relative to the representative `y` passed in.
pub fn parallel_transport(x: &SpacePoint, y: &SpacePoint, v: &Tangent) -> Result<Tangent> {
    require_same_space(x, y)?;
    require_base(v, x)?;
    let space = x.space;
    let ch = space.chord(&x.rep, &y.rep)?;
    let moved = space.transport(&ch, &rebase(v, x));
    let back = complex_scale(&moved, (ch.phase.0, -ch.phase.1));
    let vec = if space.is_complex() { back } else { moved };
    Ok(Tangent::from_raw_unchecked(y.clone(), vec))
}

/// Positively oriented orthonormal frame of the tangent space at `x`.
///
/// Spheres: `det(e_1, ..., e_n, x) = +1` (outward normal last). Hyperboloid:
/// `det(e_1, ..., e_n, x) = +1` with `x` future pointing. Complex spaces:
/// `(f_1, i f_1, f_2, i f_2)` for a unitary frame `(f_1, f_2)`.
pub fn orthonormal_frame(x: &SpacePoint) -> Vec<Tangent> {
    x.space
        .frame_raw(&x.rep)
        .into_iter()
        .map(|v| Tangent::from_raw_unchecked(x.clone(), v))
        .collect()
}

/// The Riemannian volume form at `y`.
pub fn volume_form(y: &SpacePoint, w: &[Tangent]) -> Result<f64> {
    if w.len() != y.space.dim {
        return Err(Error::Usage(format!("volume form takes {} vectors, got {}", y.space.dim, w.len())));
    }
    let cols = w
        .iter()
        .map(|v| {
            require_base(v, y)?;
            Ok(rebase(v, y))
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&DVector<f64>> = cols.iter().collect();
    Ok(y.space.volume_raw(&y.rep, &refs))
}

/// Multiplication by `i` on the horizontal tangent spaces of `CP^2` and `CH^2`.
pub fn complex_structure(v: &Tangent) -> Result<Tangent> {
    if !v.base.space.is_complex() {
        return Err(Error::Usage(format!("{} has no complex structure", v.base.space)));
    }
    Ok(Tangent::from_raw_unchecked(v.base.clone(), mul_i(&v.vec)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(space: Space, v: &[f64]) -> SpacePoint {
        SpacePoint::new(space, DVector::from_column_slice(v)).unwrap()
    }

    fn tan(base: &SpacePoint, v: &[f64]) -> Tangent {
        Tangent::new(base.clone(), DVector::from_column_slice(v)).unwrap()
    }

    fn assert_vec(a: &DVector<f64>, b: &[f64], tol: f64) {
        let b = DVector::from_column_slice(b);
        assert!((a - &b).norm() <= tol, "{a} != {b}");
    }

    #[test]
    fn sphere_distance_quarter_circle() {
        let s3 = Space::sphere(3).unwrap();
        let x = pt(s3, &[1.0, 0.0, 0.0, 0.0]);
        let y = pt(s3, &[0.0, 1.0, 0.0, 0.0]);
        assert!((distance(&x, &y).unwrap() - PI / 2.0).abs() < 1e-15);
        let t = log_unit(&x, &y).unwrap();
        assert_vec(t.vec(), &[0.0, 1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn hyperbolic_distance_unit_parameter() {
        let h3 = Space::hyperbolic(3).unwrap();
        let x = pt(h3, &[0.0, 0.0, 0.0, 1.0]);
        let y = pt(h3, &[0.0, 0.0, 1f64.sinh(), 1f64.cosh()]);
        assert!((distance(&x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cp2_orthogonal_lines_realize_the_diameter() {
        let cp2 = Space::complex_projective_plane();
        let x = pt(cp2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let y = pt(cp2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert!((distance(&x, &y).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(matches!(log_unit(&x, &y), Err(Error::CutLocus { .. })));
    }

    #[test]
    fn cp2_log_unit_with_phase() {
        let cp2 = Space::complex_projective_plane();
        let t: f64 = 0.7;
        let x = pt(cp2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // y = e^{0.4 i} (cos t, sin t, 0): same point, rotated representative.
        let (c, s) = (0.4f64.cos(), 0.4f64.sin());
        let y = pt(cp2, &[t.cos() * c, t.cos() * s, t.sin() * c, t.sin() * s, 0.0, 0.0]);
        let dir = log_unit(&x, &y).unwrap();
        assert_vec(dir.vec(), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1e-14);
        let back = exp(&x, &dir, t).unwrap();
        assert!(back.same_point(&y));
        assert!((distance(&x, &y).unwrap() - t).abs() < 1e-14);
    }

    #[test]
    fn antipodes_are_on_the_cut_locus() {
        let s2 = Space::sphere(2).unwrap();
        let x = pt(s2, &[1.0, 0.0, 0.0]);
        let y = pt(s2, &[-1.0, 0.0, 0.0]);
        assert!(matches!(log_unit(&x, &y), Err(Error::CutLocus { .. })));
        assert!(matches!(log_unit(&x, &x), Err(Error::Degenerate(_))));
    }

    #[test]
    fn exp_examples() {
        let s2 = Space::sphere(2).unwrap();
        let x = pt(s2, &[1.0, 0.0, 0.0]);
        let v = tan(&x, &[0.0, 1.0, 0.0]);
        assert_vec(exp(&x, &v, PI).unwrap().rep(), &[-1.0, 0.0, 0.0], 1e-15);
        assert_vec(exp(&x, &v, 0.0).unwrap().rep(), &[1.0, 0.0, 0.0], 0.0);

        let h2 = Space::hyperbolic(2).unwrap();
        let o = pt(h2, &[0.0, 0.0, 1.0]);
        let u = tan(&o, &[1.0, 0.0, 0.0]);
        assert_vec(exp(&o, &u, 1.0).unwrap().rep(), &[1f64.sinh(), 0.0, 1f64.cosh()], 1e-15);

        let long = tan(&x, &[0.0, 2.0, 0.0]);
        assert!(matches!(exp(&x, &long, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn sphere_transport_examples() {
        let s2 = Space::sphere(2).unwrap();
        let x = pt(s2, &[1.0, 0.0, 0.0]);
        let y = pt(s2, &[0.0, 1.0, 0.0]);
        let normal = tan(&x, &[0.0, 0.0, 1.0]);
        assert_vec(parallel_transport(&x, &y, &normal).unwrap().vec(), &[0.0, 0.0, 1.0], 1e-15);
        let along = tan(&x, &[0.0, 1.0, 0.0]);
        assert_vec(parallel_transport(&x, &y, &along).unwrap().vec(), &[-1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn sphere_frame_is_outward_oriented() {
        let s2 = Space::sphere(2).unwrap();
        let x = pt(s2, &[0.0, 0.0, 1.0]);
        let frame = orthonormal_frame(&x);
        assert_vec(frame[0].vec(), &[1.0, 0.0, 0.0], 0.0);
        assert_vec(frame[1].vec(), &[0.0, 1.0, 0.0], 0.0);
        assert!((volume_form(&x, &frame).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn volume_form_is_alternating() {
        for space in [
            Space::euclidean(3).unwrap(),
            Space::sphere(3).unwrap(),
            Space::hyperbolic(3).unwrap(),
            Space::complex_projective_plane(),
            Space::complex_hyperbolic_plane(),
        ] {
            let mut rep = DVector::zeros(space.ambient_dim());
            match space.kind() {
                SpaceKind::Euclidean => rep[0] = 0.3,
                SpaceKind::Sphere => rep[0] = 1.0,
                SpaceKind::Hyperbolic => rep[space.dim()] = 1.0,
                SpaceKind::ComplexProjective2 => rep[0] = 1.0,
                SpaceKind::ComplexHyperbolic2 => rep[4] = 1.0,
            }
            let x = SpacePoint::new(space, rep).unwrap();
            let mut frame = orthonormal_frame(&x);
            assert!((volume_form(&x, &frame).unwrap() - 1.0).abs() < 1e-14, "{space}");
            frame.swap(0, 1);
            assert!((volume_form(&x, &frame).unwrap() + 1.0).abs() < 1e-14, "{space}");
            frame[1] = frame[0].clone();
            assert!(volume_form(&x, &frame).unwrap().abs() < 1e-14, "{space}");
            frame.pop();
            assert!(matches!(volume_form(&x, &frame), Err(Error::Usage(_))));
        }
    }

    #[test]
    fn complex_frame_uses_complex_orientation() {
        let cp2 = Space::complex_projective_plane();
        let x = SpacePoint::normalized(cp2, DVector::from_column_slice(&[0.3, 0.1, -0.5, 0.7, 0.2, -0.4])).unwrap();
        let frame = orthonormal_frame(&x);
        let j0 = complex_structure(&frame[0]).unwrap();
        assert!((&j0.vec - frame[1].vec()).norm() < 1e-14);
        assert!((volume_form(&x, &frame).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn complex_structure_rejects_real_spaces() {
        let s2 = Space::sphere(2).unwrap();
        let x = pt(s2, &[1.0, 0.0, 0.0]);
        let v = tan(&x, &[0.0, 1.0, 0.0]);
        assert!(matches!(complex_structure(&v), Err(Error::Usage(_))));
    }

    #[test]
    fn mismatched_spaces_are_usage_errors() {
        let x = pt(Space::sphere(2).unwrap(), &[1.0, 0.0, 0.0]);
        let y = pt(Space::euclidean(3).unwrap(), &[1.0, 0.0, 0.0]);
        assert!(matches!(distance(&x, &y), Err(Error::Usage(_))));
    }

    #[test]
    fn space_names_round_trip() {
        for name in ["R3", "S2", "H3", "CH2", "CP2"] {
            let s: Space = name.parse().unwrap();
            assert_eq!(s.to_string(), name);
        }
        assert!("Q3".parse::<Space>().is_err());
        assert!("CH3".parse::<Space>().is_err());
    }
}
