//! The double linking integral
//! `lk(K, L) = int_K int_L lambda(d) vol_y(dL, P T, P L v_1, ..., P L v_k)`.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{kernel_for, KernelSpec};
use crate::quadrature::pairwise_sum;
use crate::spaces::{complex_scale, mul_i, Chord, Space, Tangent};
use crate::submanifolds::ParamSubmanifold;

pub const DEFAULT_TOLERANCE: f64 = 1e-2;
pub const PROXIMITY_THRESHOLD: f64 = 1e-4;
/// Smallest per-axis resolution accepted by the engine.
pub const MIN_RESOLUTION: usize = 4;

/// Per-axis node counts for the two submanifolds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub k: Vec<usize>,
    pub l: Vec<usize>,
}

impl Resolution {
    /// The same count on every axis of both submanifolds.
    pub fn uniform(n: usize, dim_k: usize, dim_l: usize) -> Self {
        Resolution { k: vec![n; dim_k], l: vec![n; dim_l] }
    }

    pub fn doubled(&self) -> Self {
        Resolution { k: self.k.iter().map(|n| 2 * n).collect(), l: self.l.iter().map(|n| 2 * n).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkingOptions {
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub proximity_threshold: f64,
    pub tolerance: f64,
}

impl Default for LinkingOptions {
    fn default() -> Self {
        LinkingOptions { threads: None, proximity_threshold: PROXIMITY_THRESHOLD, tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkingResult {
    pub value: f64,
    pub nearest_integer: i64,
    pub integer_gap: f64,
    /// `|value(2r) - value(r)|`.
    pub error_estimate: f64,
    pub nodes_k: usize,
    pub nodes_l: usize,
    pub min_distance: f64,
    /// Node pairs dropped because they sat on the cut locus.
    pub skipped_pairs: usize,
    pub resolution: Resolution,
    pub wall_time: Duration,
}

/// Quadrature nodes of a submanifold with their tangent frames, ready for integration.
#[derive(Debug, Clone)]
pub struct NodeCloud {
    space: Space,
    dim: usize,
    points: Vec<DVector<f64>>,
    tangents: Vec<Vec<DVector<f64>>>,
    weights: Vec<f64>,
}

impl NodeCloud {
    pub fn from_submanifold(m: &ParamSubmanifold, resolution: &[usize]) -> Result<Self> {
        let samples = m.sample(resolution)?;
        let mut cloud = NodeCloud {
            space: m.space(),
            dim: m.dim(),
            points: Vec::with_capacity(samples.nodes.len()),
            tangents: Vec::with_capacity(samples.nodes.len()),
            weights: Vec::with_capacity(samples.nodes.len()),
        };
        for node in &samples.nodes {
            let basis = m.tangent_basis(&node.u)?;
            cloud.points.push(basis[0].base().rep().clone());
            cloud.tangents.push(basis.iter().map(|t| t.vec().clone()).collect());
            cloud.weights.push(node.weight);
        }
        Ok(cloud)
    }

    /// Union of clouds of the same space and dimension (a disconnected submanifold).
    pub fn concat(parts: &[NodeCloud]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Usage("nothing to concatenate".into()))?;
        let mut out = NodeCloud { points: vec![], tangents: vec![], weights: vec![], ..first.clone() };
        for p in parts {
            if p.space != first.space || p.dim != first.dim {
                return Err(Error::Usage("components must share space and dimension".into()));
            }
            out.points.extend(p.points.iter().cloned());
            out.tangents.extend(p.tangents.iter().cloned());
            out.weights.extend(p.weights.iter().copied());
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn check_pair(space: Space, dim_k: usize, dim_l: usize) -> Result<()> {
    if dim_k + dim_l + 1 != space.dim() {
        return Err(Error::Validation(format!(
            "dimension constraint k + l + 1 = n violated: {dim_k} + {dim_l} + 1 != {} ({space})",
            space.dim()
        )));
    }
    Ok(())
}

/// Applies the kernel to the pair `(x, y)`: the integrand without quadrature weights.
fn integrand_raw(
    spec: &KernelSpec,
    x: &DVector<f64>,
    kvs: &[DVector<f64>],
    y: &DVector<f64>,
    lvs: &[DVector<f64>],
) -> Result<f64> {
    let space = spec.space();
    let ch: Chord = space.chord(x, y)?;
    let w = spec.weights(ch.d)?;
    if w.scale == 0.0 {
        return Ok(0.0);
    }
    let n = space.ambient_dim();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut col = 0;
    for l in lvs {
        let l_rep = if space.is_complex() { complex_scale(l, ch.phase) } else { l.clone() };
        m.set_column(col, &l_rep);
        col += 1;
    }
    m.set_column(col, &ch.arrive);
    col += 1;
    let jt = space.is_complex().then(|| mul_i(&ch.dir));
    for v in kvs {
        let a = space.inner(&ch.dir, v);
        let mut lv = v * w.on_rest + &ch.dir * ((w.on_t - w.on_rest) * a);
        if let Some(jt) = &jt {
            let b = space.inner(jt, v);
            lv += jt * ((w.on_it - w.on_rest) * b);
        }
        m.set_column(col, &space.transport(&ch, &lv));
        col += 1;
    }
    for normal in space.normal_columns(&ch.y_rep) {
        m.set_column(col, &normal);
        col += 1;
    }
    Ok(w.scale * m.determinant())
}

/// The linking integrand at a node pair; `x_tangents` are the `k` tangents of `K`,
/// `y_tangents` the `l` tangents of `L`.
///
/// Pairs on the cut locus return [`Error::CutLocus`]; the engine skips them.
pub fn integrand(spec: &KernelSpec, x_tangents: &[Tangent], y_tangents: &[Tangent]) -> Result<f64> {
    let (Some(xt), Some(yt)) = (x_tangents.first(), y_tangents.first()) else {
        return Err(Error::Usage("integrand needs at least one tangent on each side".into()));
    };
    let space = spec.space();
    if xt.base().space() != space || yt.base().space() != space {
        return Err(Error::Usage("tangents live in a different space than the kernel".into()));
    }
    if x_tangents.len() != spec.degree() {
        return Err(Error::Usage(format!("kernel of degree {} got {} K-tangents", spec.degree(), x_tangents.len())));
    }
    check_pair(space, x_tangents.len(), y_tangents.len())?;
    let x = xt.base().rep();
    let y = yt.base().rep();
    let kvs: Vec<_> = x_tangents.iter().map(|t| t.vec().clone()).collect();
    let lvs: Vec<_> = y_tangents.iter().map(|t| t.vec().clone()).collect();
    integrand_raw(spec, x, &kvs, y, &lvs)
}

/// Raw quadrature sum over two clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub skipped_pairs: usize,
}

fn run_in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Smallest distance between nodes of the two clouds.
pub fn min_distance(k: &NodeCloud, l: &NodeCloud, threads: Option<usize>) -> Result<f64> {
    let space = k.space;
    run_in_pool(threads, || {
        k.points
            .par_iter()
            .map(|x| {
                l.points
                    .iter()
                    .map(|y| match space.chord(x, y) {
                        Ok(ch) => ch.d,
                        Err(Error::CutLocus { distance, .. }) => distance,
                        Err(_) => 0.0,
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    })
}

/// Quadrature of the integrand over `k x l`, with a fixed summation tree:
/// one pairwise sum per `K` node, then a pairwise sum of the rows.
pub fn integrate(spec: &KernelSpec, k: &NodeCloud, l: &NodeCloud, threads: Option<usize>) -> Result<Evaluation> {
    if k.space != spec.space() || l.space != spec.space() {
        return Err(Error::Usage("clouds and kernel live in different spaces".into()));
    }
    if k.dim != spec.degree() {
        return Err(Error::Usage(format!("kernel degree {} does not match dim K = {}", spec.degree(), k.dim)));
    }
    check_pair(spec.space(), k.dim, l.dim)?;
    let rows: Vec<Result<(f64, usize)>> = run_in_pool(threads, || {
        (0..k.len())
            .into_par_iter()
            .map(|i| {
                let mut terms = Vec::with_capacity(l.len());
                let mut skipped = 0;
                for j in 0..l.len() {
                    match integrand_raw(spec, &k.points[i], &k.tangents[i], &l.points[j], &l.tangents[j]) {
                        Ok(v) => terms.push(v * l.weights[j]),
                        Err(Error::CutLocus { .. }) => {
                            terms.push(0.0);
                            skipped += 1;
                        }
                        Err(Error::Degenerate(_)) => {
                            return Err(Error::Proximity { min_distance: 0.0, threshold: PROXIMITY_THRESHOLD })
                        }
                        Err(e) => return Err(e),
                    }
                }
                Ok((k.weights[i] * pairwise_sum(&terms), skipped))
            })
            .collect()
    })?;
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(Evaluation { value: pairwise_sum(&values), skipped_pairs: rows.iter().map(|r| r.1).sum() })
}

fn validate(space: Space, k: &ParamSubmanifold, l: &ParamSubmanifold, res: &Resolution) -> Result<KernelSpec> {
    if k.space() != space || l.space() != space {
        return Err(Error::Usage(format!("submanifolds must live in {space}")));
    }
    check_pair(space, k.dim(), l.dim())?;
    if res.k.len() != k.dim() || res.l.len() != l.dim() {
        return Err(Error::Usage("resolution does not match the submanifold dimensions".into()));
    }
    if res.k.iter().chain(&res.l).any(|&n| n < MIN_RESOLUTION) {
        return Err(Error::Usage(format!("resolution must be at least {MIN_RESOLUTION} per axis")));
    }
    kernel_for(space, k.dim())
}

struct Level {
    resolution: Resolution,
    value: f64,
    skipped: usize,
    nodes_k: usize,
    nodes_l: usize,
    min_distance: f64,
}

fn evaluate_level(
    spec: &KernelSpec,
    k: &ParamSubmanifold,
    l: &ParamSubmanifold,
    res: &Resolution,
    options: &LinkingOptions,
) -> Result<Level> {
    let kc = NodeCloud::from_submanifold(k, &res.k)?;
    let lc = NodeCloud::from_submanifold(l, &res.l)?;
    let min_d = min_distance(&kc, &lc, options.threads)?;
    if !(min_d > options.proximity_threshold) {
        return Err(Error::Proximity { min_distance: min_d, threshold: options.proximity_threshold });
    }
    let eval = integrate(spec, &kc, &lc, options.threads)?;
    Ok(Level {
        resolution: res.clone(),
        value: eval.value,
        skipped: eval.skipped_pairs,
        nodes_k: kc.len(),
        nodes_l: lc.len(),
        min_distance: min_d,
    })
}

fn result_from(coarse: &Level, fine: &Level, started: Instant) -> LinkingResult {
    let nearest = coarse.value.round();
    LinkingResult {
        value: coarse.value,
        nearest_integer: nearest as i64,
        integer_gap: (coarse.value - nearest).abs(),
        error_estimate: (fine.value - coarse.value).abs(),
        nodes_k: coarse.nodes_k,
        nodes_l: coarse.nodes_l,
        min_distance: coarse.min_distance,
        skipped_pairs: coarse.skipped,
        resolution: coarse.resolution.clone(),
        wall_time: started.elapsed(),
    }
}

/// The linking integral of `k` with `l` at `resolution`; the error estimate
/// comes from a second evaluation at twice the resolution.
pub fn linking_integral(
    space: Space,
    k: &ParamSubmanifold,
    l: &ParamSubmanifold,
    resolution: &Resolution,
    options: &LinkingOptions,
) -> Result<LinkingResult> {
    let started = Instant::now();
    let spec = validate(space, k, l, resolution)?;
    let coarse = evaluate_level(&spec, k, l, resolution, options)?;
    let fine = evaluate_level(&spec, k, l, &resolution.doubled(), options)?;
    Ok(result_from(&coarse, &fine, started))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub results: Vec<LinkingResult>,
    pub converged: bool,
}

impl ConvergenceRun {
    pub fn last(&self) -> &LinkingResult {
        self.results.last().expect("a run has at least one result")
    }
}

/// Doubles the resolution until `integer_gap < options.tolerance` or `budget` levels were used.
pub fn convergence_run(
    space: Space,
    k: &ParamSubmanifold,
    l: &ParamSubmanifold,
    start: &Resolution,
    budget: usize,
    options: &LinkingOptions,
) -> Result<ConvergenceRun> {
    if budget < 2 {
        return Err(Error::Usage("convergence budget must allow at least 2 refinement levels".into()));
    }
    let spec = validate(space, k, l, start)?;
    let mut started = Instant::now();
    let mut coarse = evaluate_level(&spec, k, l, start, options)?;
    let mut results = Vec::new();
    loop {
        let fine = evaluate_level(&spec, k, l, &coarse.resolution.doubled(), options)?;
        let r = result_from(&coarse, &fine, started);
        let done = r.integer_gap < options.tolerance;
        results.push(r);
        if done || results.len() >= budget {
            return Ok(ConvergenceRun { results, converged: done });
        }
        started = Instant::now();
        coarse = fine;
    }
}
