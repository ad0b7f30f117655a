//! Oriented closed parametrized curves and surfaces in the model spaces.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, periodic_trapezoid};
use crate::spaces::{Space, SpaceKind, SpacePoint, Tangent};

/// Smallest singular value of the tangent frame below which a chart is degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
/// Relative finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Margin kept between `CP^2` chart images and the basepoint's cut locus.
pub const CP2_CHART_MARGIN: f64 = 0.05;

const FRAME_TOLERANCE: f64 = 1e-10;

/// One factor of a parameter domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// A circle of period `2 pi`.
    Circle,
    Interval { lo: f64, hi: f64 },
}

impl Axis {
    pub fn extent(&self) -> f64 {
        match *self {
            Axis::Circle => TAU,
            Axis::Interval { lo, hi } => hi - lo,
        }
    }
}

type ChartFn = dyn Fn(&[f64]) -> DVector<f64> + Send + Sync;
type DerivativeFn = dyn Fn(&[f64]) -> Vec<DVector<f64>> + Send + Sync;

/// An oriented closed `k`-dimensional submanifold given by a chart on a product domain.
#[derive(Clone)]
pub struct ParamSubmanifold {
    space: Space,
    axes: Vec<Axis>,
    chart: Arc<ChartFn>,
    derivative: Option<Arc<DerivativeFn>>,
    reversed: bool,
}

impl fmt::Debug for ParamSubmanifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSubmanifold")
            .field("space", &self.space)
            .field("axes", &self.axes)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("reversed", &self.reversed)
            .finish()
    }
}

/// A quadrature node in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleNode {
    pub u: Vec<f64>,
    pub weight: f64,
}

/// Tensor-product quadrature nodes of a parameter domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub nodes: Vec<SampleNode>,
    pub resolution: Vec<usize>,
}

impl SampleSet {
    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

impl ParamSubmanifold {
    /// A custom submanifold. The chart must return ambient representatives on
    /// the model; `derivative`, if given, returns one ambient vector per axis.
    pub fn new(
        space: Space,
        axes: Vec<Axis>,
        chart: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
        derivative: Option<Arc<DerivativeFn>>,
    ) -> Result<Self> {
        if axes.is_empty() || axes.len() > space.dim() {
            return Err(Error::Validation(format!(
                "a submanifold of {space} needs 1 to {} parameter axes, got {}",
                space.dim(),
                axes.len()
            )));
        }
        for a in &axes {
            if let Axis::Interval { lo, hi } = a {
                if !(hi > lo) {
                    return Err(Error::Validation(format!("empty parameter interval [{lo}, {hi}]")));
                }
            }
        }
        Ok(ParamSubmanifold { space, axes, chart: Arc::new(chart), derivative, reversed: false })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Dimension `k`.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// `+1` or `-1` relative to the parametrization's orientation.
    pub fn orientation(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }

    /// The same submanifold with the opposite orientation.
    pub fn reversed(&self) -> Self {
        ParamSubmanifold { reversed: !self.reversed, ..self.clone() }
    }

    /// Drops the analytic derivative, forcing finite differences.
    pub fn without_derivative(&self) -> Self {
        ParamSubmanifold { derivative: None, ..self.clone() }
    }

    fn check_param(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.axes.len() {
            return Err(Error::Usage(format!("expected {} parameters, got {}", self.axes.len(), u.len())));
        }
        Ok(())
    }

    pub fn point(&self, u: &[f64]) -> Result<SpacePoint> {
        self.check_param(u)?;
        Ok(SpacePoint::from_raw_unchecked(self.space, (self.chart)(u)))
    }

    /// Partial derivatives of the chart at `u`, orientation applied to the first.
    pub fn tangent_basis(&self, u: &[f64]) -> Result<Vec<Tangent>> {
        let x = self.point(u)?;
        let raw = match &self.derivative {
            Some(der) => der(u),
            None => self.finite_differences(u),
        };
        let mut vecs: Vec<DVector<f64>> = raw
            .into_iter()
            .map(|v| self.space.project_tangent(x.rep(), &v))
            .collect();
        if self.reversed {
            vecs[0] = -&vecs[0];
        }
        let sigma_min = smallest_singular_value(self.space, &vecs);
        if sigma_min < DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateChart { parameter: u.to_vec(), sigma_min });
        }
        Ok(vecs.into_iter().map(|v| Tangent::from_raw_unchecked(x.clone(), v)).collect())
    }

    fn finite_differences(&self, u: &[f64]) -> Vec<DVector<f64>> {
        let mut p = u.to_vec();
        self.axes
            .iter()
            .enumerate()
            .map(|(i, axis)| {
                let h = FD_STEP * axis.extent();
                p[i] = u[i] + h;
                let fwd = (self.chart)(&p);
                p[i] = u[i] - h;
                let bwd = (self.chart)(&p);
                p[i] = u[i];
                (fwd - bwd) / (2.0 * h)
            })
            .collect()
    }

    /// Tensor-product nodes: periodic trapezoid on circles, Gauss–Legendre on intervals.
    ///
    /// The first axis varies slowest.
    pub fn sample(&self, resolution: &[usize]) -> Result<SampleSet> {
        if resolution.len() != self.axes.len() {
            return Err(Error::Usage(format!(
                "resolution needs {} entries, got {}",
                self.axes.len(),
                resolution.len()
            )));
        }
        if resolution.contains(&0) {
            return Err(Error::Usage("resolution entries must be positive".into()));
        }
        let rules: Vec<_> = self
            .axes
            .iter()
            .zip(resolution)
            .map(|(axis, &n)| match *axis {
                Axis::Circle => periodic_trapezoid(n, TAU),
                Axis::Interval { lo, hi } => gauss_legendre(n, lo, hi),
            })
            .collect();
        let mut nodes = vec![SampleNode { u: Vec::new(), weight: 1.0 }];
        for rule in &rules {
            nodes = nodes
                .iter()
                .flat_map(|node| {
                    rule.iter().map(move |(x, w)| {
                        let mut u = node.u.clone();
                        u.push(x);
                        SampleNode { u, weight: node.weight * w }
                    })
                })
                .collect();
        }
        Ok(SampleSet { nodes, resolution: resolution.to_vec() })
    }
}

fn smallest_singular_value(space: Space, vecs: &[DVector<f64>]) -> f64 {
    match vecs {
        [a] => space.inner(a, a).max(0.0).sqrt(),
        [a, b] => {
            let (p, q, r) = (space.inner(a, a), space.inner(a, b), space.inner(b, b));
            let mean = 0.5 * (p + r);
            let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            // Small eigenvalue via det / large one, stable when the two differ a lot.
            let big = mean + disc;
            let small = if big > 0.0 { (p * r - q * q) / big } else { 0.0 };
            small.max(0.0).sqrt()
        }
        _ => {
            let n = vecs.len();
            let gram = nalgebra::DMatrix::from_fn(n, n, |i, j| space.inner(&vecs[i], &vecs[j]));
            gram.symmetric_eigenvalues().min().max(0.0).sqrt()
        }
    }
}

/// Builtin families, as written in scene files (`family = "..."`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `center + radius (cos u f1 + sin u f2)` in `R^n`.
    EuclideanCircle { center: Vec<f64>, frame: [Vec<f64>; 2], radius: f64 },
    /// Round 2-sphere `center + radius (sin t cos p f1 + sin t sin p f2 + cos t f3)`;
    /// the frame defaults to the first three axes.
    EuclideanRoundSphere {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        frame: Option<[Vec<f64>; 3]>,
    },
    /// `a0 + sum_j (cos(j u) c_j + sin(j u) s_j)` in `R^n`.
    EuclideanFourierCurve {
        center: Vec<f64>,
        #[serde(default)]
        cos: Vec<Vec<f64>>,
        #[serde(default)]
        sin: Vec<Vec<f64>>,
    },
    /// `cos u a + sin u b` on `S^n`.
    GreatCircle { frame: [Vec<f64>; 2] },
    /// `(cos a e^{i p u}, sin a e^{i (q u + phase)})` on `S^3`.
    TorusCurveS3 {
        p: i32,
        q: i32,
        split: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Geodesic sphere of the given radius about `center`, spanned by two or three
    /// tangent directions (a small circle or a small 2-sphere) on `S^n`.
    SmallSphere { center: Vec<f64>, radius: f64, frame: Vec<Vec<f64>> },
    /// A Fourier curve in the Poincaré ball, mapped to the hyperboloid model of `H^n`.
    PoincareBallCurve {
        center: Vec<f64>,
        #[serde(default)]
        cos: Vec<Vec<f64>>,
        #[serde(default)]
        sin: Vec<Vec<f64>>,
    },
    /// A Fourier curve in `R^4 = C^2` pushed through the chart of `CH^2` or `CP^2`.
    ChartCurve {
        center: Vec<f64>,
        #[serde(default)]
        cos: Vec<Vec<f64>>,
        #[serde(default)]
        sin: Vec<Vec<f64>>,
    },
    /// A round 2-sphere in `R^4 = C^2` pushed through the chart of `CH^2` or `CP^2`.
    ChartSurface {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        frame: Option<[Vec<f64>; 3]>,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::EuclideanCircle { .. } => "euclidean_circle",
            Family::EuclideanRoundSphere { .. } => "euclidean_round_sphere",
            Family::EuclideanFourierCurve { .. } => "euclidean_fourier_curve",
            Family::GreatCircle { .. } => "great_circle",
            Family::TorusCurveS3 { .. } => "torus_curve_s3",
            Family::SmallSphere { .. } => "small_sphere",
            Family::PoincareBallCurve { .. } => "poincare_ball_curve",
            Family::ChartCurve { .. } => "chart_curve",
            Family::ChartSurface { .. } => "chart_surface",
        }
    }

    /// Dimension of the submanifold this family produces.
    pub fn dim(&self) -> usize {
        match self {
            Family::EuclideanRoundSphere { .. } | Family::ChartSurface { .. } => 2,
            Family::SmallSphere { frame, .. } => frame.len().saturating_sub(1),
            _ => 1,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn vector(v: &[f64], len: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != len {
        return Err(invalid(format!("{what} needs {len} coordinates, got {}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(invalid(format!("{what} has non-finite coordinates")));
    }
    Ok(DVector::from_column_slice(v))
}

fn orthonormal(frame: &[Vec<f64>], len: usize) -> Result<Vec<DVector<f64>>> {
    let vs = frame
        .iter()
        .map(|v| vector(v, len, "frame vector"))
        .collect::<Result<Vec<_>>>()?;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (a.dot(b) - want).abs() > FRAME_TOLERANCE {
                return Err(invalid("frame is not orthonormal"));
            }
        }
    }
    Ok(vs)
}

fn default_frame3(frame: &Option<[Vec<f64>; 3]>, len: usize) -> Result<Vec<DVector<f64>>> {
    match frame {
        Some(f) => orthonormal(f, len),
        None if len >= 3 => Ok((0..3)
            .map(|i| {
                let mut e = DVector::zeros(len);
                e[i] = 1.0;
                e
            })
            .collect()),
        None => Err(invalid("a round 2-sphere needs an ambient dimension of at least 3")),
    }
}

fn positive(r: f64, what: &str) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("{what} must be positive, got {r}")));
    }
    Ok(())
}

fn require_kind(space: Space, kinds: &[SpaceKind], family: &str) -> Result<()> {
    if !kinds.contains(&space.kind()) {
        return Err(invalid(format!("family {family} is not available on {space}")));
    }
    Ok(())
}

/// `center + sum_j cos(j u) c_j + sin(j u) s_j` and its derivative.
#[derive(Debug, Clone)]
struct Fourier {
    center: DVector<f64>,
    cos: Vec<DVector<f64>>,
    sin: Vec<DVector<f64>>,
}

impl Fourier {
    fn new(center: &[f64], cos: &[Vec<f64>], sin: &[Vec<f64>], len: usize) -> Result<Self> {
        let f = Fourier {
            center: vector(center, len, "center")?,
            cos: cos.iter().map(|c| vector(c, len, "cos coefficient")).collect::<Result<_>>()?,
            sin: sin.iter().map(|c| vector(c, len, "sin coefficient")).collect::<Result<_>>()?,
        };
        if f.cos.iter().chain(&f.sin).all(|c| c.norm() == 0.0) {
            return Err(invalid("Fourier curve is constant"));
        }
        Ok(f)
    }

    fn eval(&self, u: f64) -> DVector<f64> {
        let mut out = self.center.clone();
        for (j, c) in self.cos.iter().enumerate() {
            out += c * ((j + 1) as f64 * u).cos();
        }
        for (j, s) in self.sin.iter().enumerate() {
            out += s * ((j + 1) as f64 * u).sin();
        }
        out
    }

    fn deriv(&self, u: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.center.len());
        for (j, c) in self.cos.iter().enumerate() {
            let m = (j + 1) as f64;
            out -= c * (m * (m * u).sin());
        }
        for (j, s) in self.sin.iter().enumerate() {
            let m = (j + 1) as f64;
            out += s * (m * (m * u).cos());
        }
        out
    }

    /// Largest value of `|curve|` over a fine grid.
    fn max_norm(&self) -> f64 {
        (0..4096).map(|i| self.eval(TAU * i as f64 / 4096.0).norm()).fold(0.0, f64::max)
    }
}

/// Round 2-sphere in an affine 3-plane.
#[derive(Debug, Clone)]
struct RoundSphere {
    center: DVector<f64>,
    radius: f64,
    frame: Vec<DVector<f64>>,
}

impl RoundSphere {
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let (t, p) = (u[0], u[1]);
        &self.center
            + (&self.frame[0] * (t.sin() * p.cos()) + &self.frame[1] * (t.sin() * p.sin()) + &self.frame[2] * t.cos())
                * self.radius
    }

    fn deriv(&self, u: &[f64]) -> Vec<DVector<f64>> {
        let (t, p) = (u[0], u[1]);
        let dt = &self.frame[0] * (t.cos() * p.cos()) + &self.frame[1] * (t.cos() * p.sin()) - &self.frame[2] * t.sin();
        let dp = &self.frame[0] * (-t.sin() * p.sin()) + &self.frame[1] * (t.sin() * p.cos());
        vec![dt * self.radius, dp * self.radius]
    }

    fn max_norm(&self) -> f64 {
        self.center.norm() + self.radius
    }
}

/// Domain of round 2-spheres: polar angle (interval) then azimuth (circle).
fn sphere_axes() -> Vec<Axis> {
    vec![Axis::Interval { lo: 0.0, hi: PI }, Axis::Circle]
}

/// Poincaré ball to hyperboloid, `(2b, 1 + |b|^2) / (1 - |b|^2)`, with its differential applied to `db`.
pub fn ball_to_hyperboloid(b: &DVector<f64>, db: Option<&DVector<f64>>) -> (DVector<f64>, Option<DVector<f64>>) {
    let n = b.len();
    let r2 = b.norm_squared();
    let s = 1.0 - r2;
    let mut x = DVector::zeros(n + 1);
    x.rows_mut(0, n).copy_from(&(b * (2.0 / s)));
    x[n] = (1.0 + r2) / s;
    let dx = db.map(|db| {
        let dr2 = 2.0 * b.dot(db);
        let mut v = DVector::zeros(n + 1);
        v.rows_mut(0, n).copy_from(&(db * (2.0 / s) + b * (2.0 * dr2 / (s * s))));
        v[n] = 2.0 * dr2 / (s * s);
        v
    });
    (x, dx)
}

/// Hyperboloid to Poincaré ball, `x_spatial / (1 + x_last)`.
pub fn hyperboloid_to_ball(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len() - 1;
    x.rows(0, n) / (1.0 + x[n])
}

/// The global chart `R^4 = C^2 -> CH^2` or the geodesic-ball chart `C^2 -> CP^2` about `[0:0:1]`,
/// with its differential applied to `dw`.
pub fn complex_chart(space: Space, w: &DVector<f64>, dw: Option<&DVector<f64>>) -> (DVector<f64>, Option<DVector<f64>>) {
    let r2 = w.norm_squared();
    let s = (1.0 + r2).sqrt();
    let mut z = DVector::zeros(6);
    let dz = match space.kind() {
        SpaceKind::ComplexHyperbolic2 => {
            z.rows_mut(0, 4).copy_from(w);
            z[4] = s;
            dw.map(|dw| {
                let mut v = DVector::zeros(6);
                v.rows_mut(0, 4).copy_from(dw);
                v[4] = w.dot(dw) / s;
                v
            })
        }
        _ => {
            z.rows_mut(0, 4).copy_from(&(w / s));
            z[4] = 1.0 / s;
            dw.map(|dw| {
                let ds = w.dot(dw) / s;
                let mut v = DVector::zeros(6);
                v.rows_mut(0, 4).copy_from(&(dw / s - w * (ds / (s * s))));
                v[4] = -ds / (s * s);
                v
            })
        }
    };
    (z, dz)
}

/// Inverse of [`complex_chart`] on its image.
pub fn complex_chart_inverse(space: Space, z: &DVector<f64>) -> Result<DVector<f64>> {
    // Normalize the phase so that z3 is real and positive.
    let (a, b) = (z[4], z[5]);
    let m = a.hypot(b);
    if m < 1e-12 {
        return Err(Error::Chart("point lies outside the chart".into()));
    }
    let phase = (a / m, -b / m);
    let zz = crate::spaces::complex_scale(z, phase);
    let w = zz.rows(0, 4).into_owned();
    Ok(match space.kind() {
        SpaceKind::ComplexHyperbolic2 => w,
        _ => w / zz[4],
    })
}

/// Largest chart radius `|w|` admitted on `CP^2`: geodesic distance `pi/2 - margin` from the basepoint.
pub fn cp2_chart_radius() -> f64 {
    (PI / 2.0 - CP2_CHART_MARGIN).tan()
}

fn check_chart_image(space: Space, max_norm: f64) -> Result<()> {
    if space.kind() == SpaceKind::ComplexProjective2 && max_norm >= cp2_chart_radius() {
        return Err(invalid(format!(
            "chart image reaches |w| = {max_norm:.6}, outside the CP2 chart ball |w| < {:.6}",
            cp2_chart_radius()
        )));
    }
    Ok(())
}

/// Builds a builtin family on `space`.
pub fn builtin(space: Space, family: &Family) -> Result<ParamSubmanifold> {
    let n = space.ambient_dim();
    let name = family.name();
    match family {
        Family::EuclideanCircle { center, frame, radius } => {
            require_kind(space, &[SpaceKind::Euclidean], name)?;
            positive(*radius, "radius")?;
            let c = vector(center, n, "center")?;
            let f = orthonormal(frame, n)?;
            let fourier = Fourier { center: c, cos: vec![&f[0] * *radius], sin: vec![&f[1] * *radius] };
            Ok(fourier_submanifold(space, fourier))
        }
        Family::EuclideanFourierCurve { center, cos, sin } => {
            require_kind(space, &[SpaceKind::Euclidean], name)?;
            Ok(fourier_submanifold(space, Fourier::new(center, cos, sin, n)?))
        }
        Family::EuclideanRoundSphere { center, radius, frame } => {
            require_kind(space, &[SpaceKind::Euclidean], name)?;
            positive(*radius, "radius")?;
            let sphere = RoundSphere { center: vector(center, n, "center")?, radius: *radius, frame: default_frame3(frame, n)? };
            let s2 = sphere.clone();
            ParamSubmanifold::new(space, sphere_axes(), move |u| sphere.eval(u), Some(Arc::new(move |u: &[f64]| s2.deriv(u))))
        }
        Family::GreatCircle { frame } => {
            require_kind(space, &[SpaceKind::Sphere], name)?;
            let f = orthonormal(frame, n)?;
            let fourier = Fourier { center: DVector::zeros(n), cos: vec![f[0].clone()], sin: vec![f[1].clone()] };
            Ok(fourier_submanifold(space, fourier))
        }
        Family::TorusCurveS3 { p, q, split, phase } => {
            require_kind(space, &[SpaceKind::Sphere], name)?;
            if space.dim() != 3 {
                return Err(invalid("torus curves live on S3"));
            }
            if !(0.0..=PI / 2.0).contains(split) {
                return Err(invalid(format!("torus split must lie in [0, pi/2], got {split}")));
            }
            let (ca, sa) = (split.cos(), split.sin());
            let (p, q, phase) = (*p as f64, *q as f64, *phase);
            if (ca * p).hypot(sa * q) < DEGENERACY_THRESHOLD {
                return Err(invalid("torus curve has zero speed"));
            }
            let chart = move |u: &[f64]| {
                let (a, b) = (p * u[0], q * u[0] + phase);
                DVector::from_column_slice(&[ca * a.cos(), ca * a.sin(), sa * b.cos(), sa * b.sin()])
            };
            let der = move |u: &[f64]| {
                let (a, b) = (p * u[0], q * u[0] + phase);
                vec![DVector::from_column_slice(&[-ca * p * a.sin(), ca * p * a.cos(), -sa * q * b.sin(), sa * q * b.cos()])]
            };
            ParamSubmanifold::new(space, vec![Axis::Circle], chart, Some(Arc::new(der)))
        }
        Family::SmallSphere { center, radius, frame } => {
            require_kind(space, &[SpaceKind::Sphere], name)?;
            if !(*radius > 0.0 && *radius < PI) {
                return Err(invalid(format!("small-sphere radius must lie in (0, pi), got {radius}")));
            }
            let c = vector(center, n, "center")?;
            if (c.norm() - 1.0).abs() > FRAME_TOLERANCE {
                return Err(invalid("small-sphere center is not a unit vector"));
            }
            let f = orthonormal(frame, n)?;
            if f.iter().any(|v| v.dot(&c).abs() > FRAME_TOLERANCE) {
                return Err(invalid("small-sphere frame must be orthogonal to the center"));
            }
            let (cr, sr) = (radius.cos(), radius.sin());
            match f.len() {
                2 => {
                    let fourier = Fourier { center: c * cr, cos: vec![&f[0] * sr], sin: vec![&f[1] * sr] };
                    Ok(fourier_submanifold(space, fourier))
                }
                3 => {
                    let sphere = RoundSphere { center: c * cr, radius: sr, frame: f };
                    let s2 = sphere.clone();
                    ParamSubmanifold::new(space, sphere_axes(), move |u| sphere.eval(u), Some(Arc::new(move |u: &[f64]| s2.deriv(u))))
                }
                k => Err(invalid(format!("small-sphere frame needs 2 or 3 vectors, got {k}"))),
            }
        }
        Family::PoincareBallCurve { center, cos, sin } => {
            require_kind(space, &[SpaceKind::Hyperbolic], name)?;
            let fourier = Fourier::new(center, cos, sin, space.dim())?;
            if fourier.max_norm() >= 1.0 - 1e-9 {
                return Err(invalid("Poincare-ball curve leaves the unit ball"));
            }
            let f2 = fourier.clone();
            let chart = move |u: &[f64]| ball_to_hyperboloid(&fourier.eval(u[0]), None).0;
            let der = move |u: &[f64]| {
                let b = f2.eval(u[0]);
                let db = f2.deriv(u[0]);
                vec![ball_to_hyperboloid(&b, Some(&db)).1.expect("derivative requested")]
            };
            ParamSubmanifold::new(space, vec![Axis::Circle], chart, Some(Arc::new(der)))
        }
        Family::ChartCurve { center, cos, sin } => {
            require_kind(space, &[SpaceKind::ComplexHyperbolic2, SpaceKind::ComplexProjective2], name)?;
            let fourier = Fourier::new(center, cos, sin, 4)?;
            check_chart_image(space, fourier.max_norm())?;
            let f2 = fourier.clone();
            let chart = move |u: &[f64]| complex_chart(space, &fourier.eval(u[0]), None).0;
            let der = move |u: &[f64]| {
                let w = f2.eval(u[0]);
                let dw = f2.deriv(u[0]);
                vec![complex_chart(space, &w, Some(&dw)).1.expect("derivative requested")]
            };
            ParamSubmanifold::new(space, vec![Axis::Circle], chart, Some(Arc::new(der)))
        }
        Family::ChartSurface { center, radius, frame } => {
            require_kind(space, &[SpaceKind::ComplexHyperbolic2, SpaceKind::ComplexProjective2], name)?;
            positive(*radius, "radius")?;
            let sphere = RoundSphere { center: vector(center, 4, "center")?, radius: *radius, frame: default_frame3(frame, 4)? };
            check_chart_image(space, sphere.max_norm())?;
            let s2 = sphere.clone();
            let chart = move |u: &[f64]| complex_chart(space, &sphere.eval(u), None).0;
            let der = move |u: &[f64]| {
                let w = s2.eval(u);
                s2.deriv(u)
                    .iter()
                    .map(|dw| complex_chart(space, &w, Some(dw)).1.expect("derivative requested"))
                    .collect()
            };
            ParamSubmanifold::new(space, sphere_axes(), chart, Some(Arc::new(der)))
        }
    }
}

fn fourier_submanifold(space: Space, fourier: Fourier) -> ParamSubmanifold {
    let f2 = fourier.clone();
    ParamSubmanifold::new(
        space,
        vec![Axis::Circle],
        move |u| fourier.eval(u[0]),
        Some(Arc::new(move |u: &[f64]| vec![f2.deriv(u[0])])),
    )
    .expect("curves have one axis")
}
