use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};

use super::{complex_scale, mul_i, Space, SpaceKind, SpacePoint, Tangent};

/// An orientation-preserving isometry acting linearly on ambient representatives
/// (plus a translation on `R^n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    space: Space,
    linear: DMatrix<f64>,
    shift: DVector<f64>,
}

impl Isometry {
    pub fn identity(space: Space) -> Self {
        let n = space.ambient_dim();
        Isometry { space, linear: DMatrix::identity(n, n), shift: DVector::zeros(n) }
    }

    /// Draws a random isometry: a rotation/unitary composed with a translation,
    /// boost or complex boost of size at most `reach`.
    pub fn random<R: Rng + ?Sized>(space: Space, reach: f64, rng: &mut R) -> Self {
        let n = space.ambient_dim();
        let mut iso = Isometry::identity(space);
        match space.kind() {
            SpaceKind::Euclidean => {
                iso.linear = random_rotation(n, rng);
                iso.shift = DVector::from_fn(n, |_, _| rng.random_range(-reach..=reach));
            }
            SpaceKind::Sphere => iso.linear = random_rotation(n, rng),
            SpaceKind::Hyperbolic => {
                let mut spatial = DMatrix::identity(n, n);
                spatial.view_mut((0, 0), (n - 1, n - 1)).copy_from(&random_rotation(n - 1, rng));
                let boost = hyperbolic_boost(n, rng.random_range(0.0..=reach));
                let mut other = DMatrix::identity(n, n);
                other.view_mut((0, 0), (n - 1, n - 1)).copy_from(&random_rotation(n - 1, rng));
                iso.linear = spatial * boost * other;
            }
            SpaceKind::ComplexProjective2 => iso.linear = random_unitary(3, rng),
            SpaceKind::ComplexHyperbolic2 => {
                let a = block_unitary(rng);
                let b = block_unitary(rng);
                iso.linear = a * complex_boost(rng.random_range(0.0..=reach)) * b;
            }
        }
        iso
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn apply_point(&self, x: &SpacePoint) -> SpacePoint {
        SpacePoint::from_raw_unchecked(self.space, &self.linear * x.rep() + &self.shift)
    }

    pub fn apply_tangent(&self, v: &Tangent) -> Tangent {
        Tangent::from_raw_unchecked(self.apply_point(v.base()), &self.linear * v.vec())
    }

    pub fn compose(&self, inner: &Isometry) -> Isometry {
        Isometry {
            space: self.space,
            linear: &self.linear * &inner.linear,
            shift: &self.linear * &inner.shift + &self.shift,
        }
    }
}

fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let raw = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
        let qr = raw.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-3) {
            continue;
        }
        let mut q = qr.q();
        if q.determinant() < 0.0 {
            let c = -q.column(0).into_owned();
            q.set_column(0, &c);
        }
        return q;
    }
}

fn hyperbolic_boost(n: usize, s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    m[(0, 0)] = s.cosh();
    m[(n - 1, n - 1)] = s.cosh();
    m[(0, n - 1)] = s.sinh();
    m[(n - 1, 0)] = s.sinh();
    m
}

/// Complex Gram–Schmidt on interleaved columns; the result is unitary as a real `2n x 2n` matrix.
fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    'retry: loop {
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v = DVector::<f64>::from_fn(2 * n, |_, _| rng.random_range(-1.0..=1.0));
            for c in &cols {
                let jc = mul_i(c);
                v -= c * c.dot(&v) + &jc * jc.dot(&v);
            }
            let norm = v.norm();
            if norm < 1e-3 {
                continue 'retry;
            }
            cols.push(v / norm);
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (j, c) in cols.iter().enumerate() {
            m.set_column(2 * j, c);
            m.set_column(2 * j + 1, &mul_i(c));
        }
        return m;
    }
}

/// `U(2) x U(1)` acting on `(z1, z2)` and `z3`.
fn block_unitary<R: Rng + ?Sized>(rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    m.view_mut((0, 0), (4, 4)).copy_from(&random_unitary(2, rng));
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let e = DVector::from_column_slice(&[1.0, 0.0]);
    let rotated = complex_scale(&e, (theta.cos(), theta.sin()));
    m.view_mut((4, 4), (2, 1)).copy_from(&rotated);
    m.view_mut((4, 5), (2, 1)).copy_from(&mul_i(&rotated));
    m
}

/// Real boost mixing `z1` and `z3`, an element of `U(2,1)`.
fn complex_boost(s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(6, 6);
    for k in 0..2 {
        m[(k, k)] = s.cosh();
        m[(4 + k, 4 + k)] = s.cosh();
        m[(k, 4 + k)] = s.sinh();
        m[(4 + k, k)] = s.sinh();
    }
    m
}
