//! One-dimensional quadrature rules and the fixed-tree summation used by every
//! integral in the crate.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Nodes and weights of a quadrature rule on a concrete interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Applies the rule to `f`, summing with [`pairwise_sum`].
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.iter().map(|(x, w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }
}

type SharedRule = Arc<Vec<(f64, f64)>>;

pub(crate) fn reference_rule(n: usize) -> SharedRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, SharedRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let degree = NonZeroUsize::new(n).expect("rule size must be positive");
            let mut pairs = GaussLegendre::new(degree).as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// `n`-point Gauss–Legendre rule on `[lo, hi]`, nodes in increasing order.
///
/// Reference rules on `[-1, 1]` are computed once per size and cached.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Rule {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let pairs = reference_rule(n);
    let nodes = pairs.iter().map(|&(x, _)| mid + half * x).collect();
    let weights = pairs.iter().map(|&(_, w)| half * w).collect();
    Rule { nodes, weights }
}

/// Uniform periodic trapezoid rule on `[0, period)`: `n` nodes, each of weight `period / n`.
pub fn periodic_trapezoid(n: usize, period: f64) -> Rule {
    assert!(n > 0, "trapezoid rule needs at least one node");
    let h = period / n as f64;
    Rule {
        nodes: (0..n).map(|j| j as f64 * h).collect(),
        weights: vec![h; n],
    }
}

const PAIRWISE_BLOCK: usize = 8;

/// Sums `values` by recursive halving at the midpoint.
///
/// The tree depends only on `values.len()`, so results are reproducible no
/// matter how the terms were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_point_rule_on_unit_interval() {
        let rule = gauss_legendre(2, 0.0, 1.0);
        let off = 1.0 / (2.0 * 3f64.sqrt());
        assert!((rule.nodes[0] - (0.5 - off)).abs() < 1e-15);
        assert!((rule.nodes[1] - (0.5 + off)).abs() < 1e-15);
        assert!((rule.weights[0] - 0.5).abs() < 1e-15);
        assert!((rule.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        // An n-point rule integrates degree 2n-1 exactly.
        let rule = gauss_legendre(5, -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0;
        assert!((rule.integrate(|x| x.powi(9)) - exact).abs() < 1e-12);
        let rule64 = gauss_legendre(64, 0.0, PI);
        assert!((rule64.integrate(f64::sin) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_weights_sum_to_period() {
        let rule = periodic_trapezoid(4, 2.0 * PI);
        assert_eq!(rule.len(), 4);
        assert!(rule.weights.iter().all(|&w| (w - PI / 2.0).abs() < 1e-15));
        // Spectral accuracy on analytic periodic functions.
        let r = periodic_trapezoid(32, 2.0 * PI).integrate(|t| (t.cos()).exp());
        let i0 = 2.0 * PI * 1.266_065_877_752_008_4;
        assert!((r - i0).abs() < 1e-13);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..100).map(|i| i as f64 * 0.25).collect();
        assert_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
