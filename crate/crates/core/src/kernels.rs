//! The scalar kernel `lambda(d)` and the operator `L_yx` for each model space.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::reference_rule;
use crate::spaces::{log_unit, mul_i, Space, SpaceKind, SpacePoint, Tangent};

const SPHERE_RULE: usize = 64;
/// Below this distance to the cut locus, compact-space kernels switch to series.
pub const SERIES_WINDOW: f64 = 1e-3;

/// Volume of the unit sphere `S^n`.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_volume(n - 2),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Beta function at positive integers.
fn beta(a: usize, b: usize) -> f64 {
    factorial(a - 1) * factorial(b - 1) / factorial(a + b - 1)
}

fn check_degree(n: usize, k: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        return Err(Error::Unsupported(format!("degree {k} needs 1 <= k <= n - 1 = {}", n.saturating_sub(1))));
    }
    Ok(())
}

/// `-1 / (d^{n-1} vol S^{n-1})`.
pub fn lambda_euclidean(n: usize, k: usize, d: f64) -> Result<f64> {
    check_degree(n, k)?;
    if d <= 0.0 {
        return Err(Error::Singular(format!("Euclidean kernel is singular at d = {d}")));
    }
    Ok(-1.0 / (d.powi(n as i32 - 1) * sphere_volume(n - 1)))
}

/// Sphere kernel, `-(1 / (sin^{n-1} d vol S^n)) int_0^{pi-d} sin^{n-1-k}(d+t) sin^k t dt`.
pub fn lambda_sphere(n: usize, k: usize, d: f64) -> Result<f64> {
    check_degree(n, k)?;
    if !(d > 0.0 && d < PI) {
        return Err(Error::Domain(format!("sphere kernel needs 0 < d < pi, got {d}")));
    }
    let eps = PI - d;
    if eps < SERIES_WINDOW {
        return Ok(sphere_series(n, k, eps));
    }
    Ok(sphere_quadrature(n, k, d))
}

fn sphere_quadrature(n: usize, k: usize, d: f64) -> f64 {
    let half = 0.5 * (PI - d);
    let a = (n - 1 - k) as i32;
    let integral: f64 = reference_rule(SPHERE_RULE)
        .iter()
        .map(|&(x, w)| {
            let t = half * (x + 1.0);
            w * (d + t).sin().powi(a) * t.sin().powi(k as i32)
        })
        .sum::<f64>()
        * half;
    -integral / (d.sin().powi(n as i32 - 1) * sphere_volume(n))
}

fn sphere_series(n: usize, k: usize, eps: f64) -> f64 {
    let a = n - 1 - k;
    let b0 = beta(k + 1, n - k);
    let c2 = ((n as f64 - 1.0) * b0 - a as f64 * beta(k + 1, a + 3) - k as f64 * beta(k + 3, a + 1)) / 6.0;
    -(eps / sphere_volume(n)) * (b0 + eps * eps * c2)
}

/// `-2^m / (vol S^{n-1} sinh(2d)^m sinh(d)^{n-m-1})` on `H^n` (m = 0) and `CH^2` (m = 1).
pub fn lambda_negcurved(space: Space, d: f64) -> Result<f64> {
    if !matches!(space.kind(), SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2) {
        return Err(Error::Unsupported(format!("{space} is not negatively curved")));
    }
    if d <= 0.0 {
        return Err(Error::Singular(format!("kernel is singular at d = {d}")));
    }
    let n = space.dim() as i32;
    let m = space.multiplicity() as i32;
    Ok(-(2f64.powi(m)) / (sphere_volume(space.dim() - 1) * (2.0 * d).sinh().powi(m) * d.sinh().powi(n - m - 1)))
}

/// Eigenvalues of `L = exp(-d sqrt(J))` on `T`, `iT` and the rest: `(1, e^{-2d}, e^{-d})`.
pub fn l_negcurved_eigenvalues(d: f64) -> (f64, f64, f64) {
    (1.0, (-2.0 * d).exp(), (-d).exp())
}

/// The two `CP^2` coefficients `(L0, L1)`.
pub fn cp2_coeffs(d: f64) -> Result<(f64, f64)> {
    if !(0.0..=PI / 2.0).contains(&d) {
        return Err(Error::Domain(format!("CP2 coefficients need 0 <= d <= pi/2, got {d}")));
    }
    let l0 = ((PI - 2.0 * d) * (2.0 * d).sin() + 2.0 * (2.0 * d).cos() + 2.0) / 8.0;
    let l1 = ((3.0 * d).cos() + (4.0 * d - 2.0 * PI) * d.sin() + 7.0 * d.cos()) / 16.0;
    Ok((l0, l1))
}

fn lambda_cp2(d: f64) -> f64 {
    -(2.0 / (PI * PI)) / ((2.0 * d).sin() * d.sin().powi(2))
}

/// `(lambda L0, lambda L1)` on `CP^2`, by series within [`SERIES_WINDOW`] of the cut locus.
fn cp2_products(d: f64) -> Result<(f64, f64)> {
    let eps = PI / 2.0 - d;
    if (0.0..SERIES_WINDOW).contains(&eps) {
        let e2 = eps * eps;
        let p0 = -(eps + 7.0 * eps * e2 / 6.0) / (PI * PI);
        let p1 = -e2 * (1.0 + 19.0 * e2 / 15.0) / (3.0 * PI * PI);
        return Ok((p0, p1));
    }
    if d <= 0.0 {
        return Err(Error::Singular(format!("kernel is singular at d = {d}")));
    }
    let (l0, l1) = cp2_coeffs(d)?;
    let lambda = lambda_cp2(d);
    Ok((lambda * l0, lambda * l1))
}

/// Kernel weights as consumed by the integrand: the scalar multiplying the
/// volume form and the eigenvalues of `L` on `T`, `iT` and the complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelWeights {
    pub scale: f64,
    pub on_t: f64,
    pub on_it: f64,
    pub on_rest: f64,
}

/// Per-space kernel `lambda(d)` and operator `L_yx` for contraction degree `k`.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    space: Space,
    k: usize,
}

/// The kernel for `space` and degree `k`.
pub fn kernel_for(space: Space, k: usize) -> Result<KernelSpec> {
    check_degree(space.dim(), k)?;
    if space.kind() == SpaceKind::ComplexProjective2 && k != 1 {
        return Err(Error::Unsupported(format!("CP2 kernel is only available for k = 1, got {k}")));
    }
    Ok(KernelSpec { space, k })
}

impl KernelSpec {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// `lambda(d)` on the open interval `(0, cut)`.
    pub fn lambda(&self, d: f64) -> Result<f64> {
        let n = self.space.dim();
        match self.space.kind() {
            SpaceKind::Euclidean => lambda_euclidean(n, self.k, d),
            SpaceKind::Sphere => lambda_sphere(n, self.k, d),
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => lambda_negcurved(self.space, d),
            SpaceKind::ComplexProjective2 => {
                if !(d > 0.0 && d < PI / 2.0) {
                    return Err(Error::Domain(format!("CP2 kernel needs 0 < d < pi/2, got {d}")));
                }
                Ok(lambda_cp2(d))
            }
        }
    }

    /// Eigenvalues `(e_T, e_iT, e_rest)` of `L_yx`; `e_iT` only matters on complex spaces.
    pub fn eigenvalues(&self, d: f64) -> Result<(f64, f64, f64)> {
        match self.space.kind() {
            SpaceKind::Euclidean | SpaceKind::Sphere => Ok((1.0, 1.0, 1.0)),
            SpaceKind::Hyperbolic | SpaceKind::ComplexHyperbolic2 => Ok(l_negcurved_eigenvalues(d)),
            SpaceKind::ComplexProjective2 => {
                let (l0, l1) = cp2_coeffs(d)?;
                Ok((1.0, l0, l1))
            }
        }
    }

    /// `lambda` and `L` in the factored form used by the linking integrand.
    ///
    /// On `CP^2` the scalar is folded into the eigenvalues so that the products
    /// stay finite up to the cut locus.
    pub fn weights(&self, d: f64) -> Result<KernelWeights> {
        if self.space.kind() == SpaceKind::ComplexProjective2 {
            let (p0, p1) = cp2_products(d)?;
            return Ok(KernelWeights { scale: 1.0, on_t: 0.0, on_it: p0, on_rest: p1 });
        }
        let scale = self.lambda(d)?;
        let (on_t, on_it, on_rest) = self.eigenvalues(d)?;
        Ok(KernelWeights { scale, on_t, on_it, on_rest })
    }

    /// `L_yx v` for `v` tangent at `x`.
    pub fn l_action(&self, x: &SpacePoint, y: &SpacePoint, v: &Tangent) -> Result<Tangent> {
        let t = log_unit(x, y)?;
        let d = crate::spaces::distance(x, y)?;
        let (e_t, e_it, e_rest) = self.eigenvalues(d)?;
        let space = self.space;
        let tv = t.vec();
        let w = v.vec();
        let along = space.inner(tv, w);
        let mut out = w * e_rest + tv * ((e_t - e_rest) * along);
        if space.is_complex() {
            let jt = mul_i(tv);
            out += &jt * ((e_it - e_rest) * space.inner(&jt, w));
        }
        Ok(Tangent::projected(x.clone(), out))
    }

    /// One row `(lambda, e_T, e_iT, e_rest)` of a kernel table, with limits at the interval ends.
    ///
    /// `lambda` is `-inf` where the kernel blows up (`d = 0`, and the `CP^2` cut locus)
    /// and `0` at the sphere's antipode.
    pub fn table_row(&self, d: f64) -> Result<[f64; 4]> {
        let (e_t, e_it, e_rest) = match self.space.kind() {
            SpaceKind::ComplexProjective2 => {
                let (l0, l1) = cp2_coeffs(d)?;
                (1.0, l0, l1)
            }
            _ if d < 0.0 => return Err(Error::Domain(format!("distance must be >= 0, got {d}"))),
            _ => self.eigenvalues(d)?,
        };
        let lambda = match self.space.cut_distance() {
            _ if d == 0.0 => f64::NEG_INFINITY,
            Some(cut) if d > cut => {
                return Err(Error::Domain(format!("distance {d} beyond the cut locus {cut}")))
            }
            Some(cut) if d == cut => {
                if self.space.kind() == SpaceKind::Sphere {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => self.lambda(d)?,
        };
        Ok([lambda, e_t, e_it, e_rest])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn euclidean_examples() {
        assert!((lambda_euclidean(3, 1, 1.0).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((lambda_euclidean(3, 1, 2.0).unwrap() + 1.0 / (16.0 * PI)).abs() < 1e-16);
        assert!(matches!(lambda_euclidean(3, 1, 0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn sphere_example_at_quarter_turn() {
        let v = lambda_sphere(3, 1, PI / 2.0).unwrap();
        assert!((v + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(matches!(lambda_sphere(3, 1, PI), Err(Error::Domain(_))));
        assert!(matches!(lambda_sphere(3, 1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sphere_series_matches_quadrature_near_antipode() {
        for (n, k) in [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (5, 3)] {
            for eps in [5e-4, 1e-3, 2e-3] {
                let q = sphere_quadrature(n, k, PI - eps);
                let s = sphere_series(n, k, eps);
                assert!(((q - s) / q).abs() < 1e-9, "n={n} k={k} eps={eps}: {q} vs {s}");
            }
        }
    }

    #[test]
    fn negcurved_examples() {
        let h3 = Space::hyperbolic(3).unwrap();
        let v = lambda_negcurved(h3, 1.0).unwrap();
        assert!((v - -5.761_899_622_305_818e-2).abs() < 1e-15);
        let ch2 = Space::complex_hyperbolic_plane();
        let w = lambda_negcurved(ch2, 1.0).unwrap();
        assert!((w - -2.022_762_838_084_892_2e-2).abs() < 1e-15);
        assert!(matches!(lambda_negcurved(h3, 0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn negcurved_eigenvalues() {
        assert_eq!(l_negcurved_eigenvalues(0.0), (1.0, 1.0, 1.0));
        let (a, b, c) = l_negcurved_eigenvalues(2f64.ln());
        assert_eq!(a, 1.0);
        assert!((b - 0.25).abs() < 1e-15 && (c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cp2_endpoints() {
        let (a, b) = cp2_coeffs(0.0).unwrap();
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let (a, b) = cp2_coeffs(PI / 2.0).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        assert!(cp2_coeffs(-0.1).is_err() && cp2_coeffs(1.6).is_err());
    }

    #[test]
    fn cp2_products_match_direct_evaluation() {
        let d = PI / 4.0;
        let w = kernel_for(Space::complex_projective_plane(), 1).unwrap().weights(d).unwrap();
        let (l0, l1) = cp2_coeffs(d).unwrap();
        let denom = (2.0 * d).sin() * d.sin().powi(2);
        assert!((w.on_it + 2.0 / (PI * PI) * l0 / denom).abs() < 1e-15);
        assert!((w.on_rest + 2.0 / (PI * PI) * l1 / denom).abs() < 1e-15);
        let near = kernel_for(Space::complex_projective_plane(), 1).unwrap().weights(PI / 2.0 - 1e-12).unwrap();
        assert!(near.on_it.abs() < 1e-12 && near.on_rest.abs() < 1e-20);
    }

    #[test]
    fn unsupported_configurations() {
        assert!(matches!(kernel_for(Space::complex_projective_plane(), 2), Err(Error::Unsupported(_))));
        assert!(matches!(kernel_for(Space::sphere(3).unwrap(), 3), Err(Error::Unsupported(_))));
        assert!(matches!(kernel_for(Space::euclidean(3).unwrap(), 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn table_row_endpoints() {
        let cp2 = kernel_for(Space::complex_projective_plane(), 1).unwrap();
        let row = cp2.table_row(0.0).unwrap();
        assert_eq!(row[0], f64::NEG_INFINITY);
        assert_eq!((row[2], row[3]), (0.5, 0.5));
        let s = kernel_for(Space::sphere(3).unwrap(), 1).unwrap();
        assert_eq!(s.table_row(PI).unwrap()[0], 0.0);
    }
}
