//! Seeded Monte-Carlo estimators of the influence index for black-box functions,
//! plus a tensor Gauss–Legendre oracle for small dimensions.
//!
//! Every sample index owns an independent ChaCha stream derived from the seed,
//! and samples are accumulated in fixed-size chunks merged in index order, so
//! results are bit-identical regardless of the number of worker threads.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::quadrature::gauss_legendre;

/// Samples per accumulation chunk. Fixed so that merging order never depends on threads.
const CHUNK: u64 = 4096;

/// Redraw budget when a sample lands on a tie of order statistics.
const MAX_REDRAWS: usize = 64;

/// Largest dimension accepted by the tensor quadrature oracle.
pub const MAX_TENSOR_ARITY: usize = 4;

/// A function on `[0, 1]^n`, optionally with its derivative in the direction of
/// the k-th smallest variable on the open simplexes.
pub trait Evaluator: Send + Sync {
    fn arity(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// `D_(k) f(x)` for `x` with pairwise distinct coordinates, `k` 1-based.
    fn slot_derivative(&self, _x: &[f64], _k: usize) -> Option<f64> {
        None
    }

    fn has_slot_derivative(&self) -> bool {
        false
    }
}

type PointFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type SlotFn = dyn Fn(&[f64], usize) -> f64 + Send + Sync;

/// Evaluator backed by closures.
#[derive(Clone)]
pub struct FnEvaluator {
    arity: usize,
    f: Arc<PointFn>,
    derivative: Option<Arc<SlotFn>>,
}

impl FnEvaluator {
    pub fn new(arity: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnEvaluator { arity, f: Arc::new(f), derivative: None }
    }

    pub fn with_slot_derivative(mut self, d: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }
}

impl fmt::Debug for FnEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnEvaluator")
            .field("arity", &self.arity)
            .field("derivative", &self.derivative.is_some())
            .finish()
    }
}

impl Evaluator for FnEvaluator {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn slot_derivative(&self, x: &[f64], k: usize) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x, k))
    }

    fn has_slot_derivative(&self) -> bool {
        self.derivative.is_some()
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Arc<E> {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }

    fn slot_derivative(&self, x: &[f64], k: usize) -> Option<f64> {
        (**self).slot_derivative(x, k)
    }

    fn has_slot_derivative(&self) -> bool {
        (**self).has_slot_derivative()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Average of `f g_k`.
    Covariance,
    /// Average of `h_k D_(k) f`.
    Derivative,
    /// Increment at a uniform point of `[x_(k), x_(k+1)]`.
    DiffQuotientUniform,
    /// Difference quotient at a point drawn from the triangular density.
    DiffQuotientTriangular,
    /// Plain average of `f g`.
    RawInnerProduct,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Covariance => "covariance",
            EstimatorKind::Derivative => "derivative",
            EstimatorKind::DiffQuotientUniform => "diff-quotient-uniform",
            EstimatorKind::DiffQuotientTriangular => "diff-quotient-triangular",
            EstimatorKind::RawInnerProduct => "raw-inner-product",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "covariance" => EstimatorKind::Covariance,
            "derivative" => EstimatorKind::Derivative,
            "diff-quotient-uniform" | "diff-uniform" => EstimatorKind::DiffQuotientUniform,
            "diff-quotient-triangular" | "diff-triangular" => EstimatorKind::DiffQuotientTriangular,
            "raw-inner-product" => EstimatorKind::RawInnerProduct,
            other => return config(format!("unknown estimator {other:?}")),
        })
    }
}

/// A Monte-Carlo estimate with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationEstimate {
    pub value: f64,
    /// Sample standard deviation of the per-sample contributions over `sqrt(samples)`.
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub estimator: EstimatorKind,
}

impl IntegrationEstimate {
    /// `(self - other) / sqrt(se_1^2 + se_2^2)`; zero when both agree exactly.
    pub fn z_score(&self, other: &IntegrationEstimate) -> f64 {
        z_score(self.value - other.value, self.std_error.hypot(other.std_error))
    }

    /// Standardized distance to a reference value.
    pub fn z_against(&self, reference: f64) -> f64 {
        z_score(self.value - reference, self.std_error)
    }
}

pub(crate) fn z_score(diff: f64, scale: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if scale > 0.0 {
        diff / scale
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Running mean and co-moment matrix of a vector-valued sample, merged with
/// Chan's pairwise update.
#[derive(Clone, Debug)]
pub struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Moments { count: 0, mean: vec![0.0; dim], comoment: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, z: &[f64]) {
        let d = self.dim();
        self.count += 1;
        let n = self.count as f64;
        let delta: Vec<f64> = z.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / n;
        }
        for i in 0..d {
            let after = z[i] - self.mean[i];
            for j in 0..d {
                self.comoment[i * d + j] += delta[j] * after;
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let d = self.dim();
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += other.comoment[i * d + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl * nb / n;
        }
        self.count += other.count;
    }

    /// Unbiased sample covariance between components `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.comoment[i * self.dim() + j] / (self.count - 1) as f64
    }

    /// Standard error of the mean of component `i`.
    pub fn std_error(&self, i: usize) -> f64 {
        (self.covariance(i, i).max(0.0) / self.count as f64).sqrt()
    }

    /// Delta-method standard error of a smooth function of the means with gradient `grad`.
    pub fn delta_std_error(&self, grad: &[f64]) -> f64 {
        let d = self.dim();
        let mut var = 0.0;
        for i in 0..d {
            for j in 0..d {
                var += grad[i] * grad[j] * self.covariance(i, j);
            }
        }
        (var.max(0.0) / self.count as f64).sqrt()
    }
}

/// Per-sample random source: an independent ChaCha stream per sample index.
pub struct SampleRng {
    rng: ChaCha8Rng,
}

impl SampleRng {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        SampleRng { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_left(&mut self) -> f64 {
        1.0 - self.rng.gen::<f64>()
    }

    pub fn fill_point(&mut self, x: &mut [f64]) {
        for xi in x.iter_mut() {
            *xi = self.uniform();
        }
    }

    /// Draws a point whose coordinates are pairwise distinct.
    pub fn fill_distinct_point(&mut self, x: &mut [f64], order: &mut Vec<usize>) -> bool {
        for _ in 0..MAX_REDRAWS {
            self.fill_point(x);
            sort_indices(x, order);
            if order.windows(2).all(|w| x[w[0]] < x[w[1]]) {
                return true;
            }
        }
        false
    }
}

pub(crate) fn sort_indices(x: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..x.len());
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
}

/// Runs `per_sample` for indices `0..samples`, each with its own stream and a
/// scratch point of dimension `arity`, accumulating `dim`-vectors.
pub fn run_samples<F>(samples: u64, seed: u64, dim: usize, arity: usize, per_sample: F) -> Result<Moments>
where
    F: Fn(&mut SampleRng, &mut [f64], &mut [f64]) -> Result<()> + Sync,
{
    if samples < 2 {
        return domain("at least two samples are required");
    }
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::new(dim);
            let mut point = vec![0.0; arity];
            let mut z = vec![0.0; dim];
            for index in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = SampleRng::new(seed, index);
                per_sample(&mut rng, &mut point, &mut z)?;
                acc.push(&z);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Moments::new(dim);
    for part in partials {
        total.merge(&part?);
    }
    Ok(total)
}

fn finite(value: f64, point: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::TaintedSample { point: point.to_vec(), value })
    }
}

fn estimate(m: &Moments, seed: u64, estimator: EstimatorKind) -> IntegrationEstimate {
    IntegrationEstimate { value: m.mean[0], std_error: m.std_error(0), samples: m.count, seed, estimator }
}

fn check_k(arity: usize, k: usize) -> Result<()> {
    if k == 0 || k > arity {
        return domain(format!("k = {k} outside [1, {arity}]"));
    }
    Ok(())
}

/// `g_k(x) = -(n+1)(n+2)(x_(k+1) - 2 x_(k) + x_(k-1))` from an ascending vector.
#[inline]
pub(crate) fn g_value(sorted: &[f64], k: usize) -> f64 {
    let n = sorted.len() as f64;
    let s = |j: usize| crate::exact::slot(sorted, j);
    -(n + 1.0) * (n + 2.0) * (s(k + 1) - 2.0 * s(k) + s(k - 1))
}

/// `h_k(x) = (n+1)(n+2)(x_(k+1) - x_(k))(x_(k) - x_(k-1))` from an ascending vector.
#[inline]
pub(crate) fn h_value(sorted: &[f64], k: usize) -> f64 {
    let n = sorted.len() as f64;
    let s = |j: usize| crate::exact::slot(sorted, j);
    (n + 1.0) * (n + 2.0) * (s(k + 1) - s(k)) * (s(k) - s(k - 1))
}

/// Unbiased estimate of `<f, g>` from uniform samples.
pub fn mc_inner_product(
    f: &dyn Evaluator,
    g: &dyn Evaluator,
    samples: u64,
    seed: u64,
) -> Result<IntegrationEstimate> {
    if f.arity() != g.arity() {
        return domain("arity mismatch");
    }
    let m = run_samples(samples, seed, 1, f.arity(), |rng, x, z| {
        rng.fill_point(x);
        let a = finite(f.eval(x), x)?;
        let b = finite(g.eval(x), x)?;
        z[0] = a * b;
        Ok(())
    })?;
    Ok(estimate(&m, seed, EstimatorKind::RawInnerProduct))
}

/// `I(f, k)` as the average of `f g_k`.
pub fn influence_mc_covariance(f: &dyn Evaluator, k: usize, samples: u64, seed: u64) -> Result<IntegrationEstimate> {
    check_k(f.arity(), k)?;
    let m = run_samples(samples, seed, 1, f.arity(), |rng, x, z| {
        rng.fill_point(x);
        let mut s = x.to_vec();
        s.sort_by(f64::total_cmp);
        z[0] = finite(f.eval(x), x)? * g_value(&s, k);
        Ok(())
    })?;
    Ok(estimate(&m, seed, EstimatorKind::Covariance))
}

/// `I(f, k)` as the average of `h_k D_(k) f`.
pub fn influence_mc_derivative(f: &dyn Evaluator, k: usize, samples: u64, seed: u64) -> Result<IntegrationEstimate> {
    check_k(f.arity(), k)?;
    if !f.has_slot_derivative() {
        return config("evaluator has no directional derivative map");
    }
    let m = run_samples(samples, seed, 1, f.arity(), |rng, x, z| {
        let mut order = Vec::with_capacity(x.len());
        if !rng.fill_distinct_point(x, &mut order) {
            z[0] = 0.0;
            return Ok(());
        }
        let sorted: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let d = f
            .slot_derivative(x, k)
            .ok_or_else(|| Error::Configuration("derivative map returned nothing".into()))?;
        z[0] = h_value(&sorted, k) * finite(d, x)?;
        Ok(())
    })?;
    Ok(estimate(&m, seed, EstimatorKind::Derivative))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffQuotientVariant {
    UniformY,
    TriangularY,
}

/// `I(f, k)` from increments of `f` along the k-th smallest coordinate.
///
/// The k-th smallest coordinate is moved up to `y` in `[x_(k), x_(k+1)]`
/// (`x_(n+1) = 1`). Degenerate intervals contribute 0.
pub fn influence_mc_diffquotient(
    f: &dyn Evaluator,
    k: usize,
    samples: u64,
    seed: u64,
    variant: DiffQuotientVariant,
) -> Result<IntegrationEstimate> {
    let n = f.arity();
    check_k(n, k)?;
    let scale = (n as f64 + 1.0) * (n as f64 + 2.0);
    let m = run_samples(samples, seed, 1, n, |rng, x, z| {
        let mut order = Vec::with_capacity(n);
        rng.fill_point(x);
        sort_indices(x, &mut order);
        let pos = order[k - 1];
        let lower = x[pos];
        let upper = if k == n { 1.0 } else { x[order[k]] };
        let len = upper - lower;
        if len <= 0.0 {
            z[0] = 0.0;
            return Ok(());
        }
        let base = finite(f.eval(x), x)?;
        let (y, weight_of) = match variant {
            DiffQuotientVariant::UniformY => {
                let y = lower + len * rng.uniform();
                (y, len)
            }
            DiffQuotientVariant::TriangularY => {
                let y = lower + len * rng.uniform_open_left().sqrt();
                (y, 0.5 * len * len)
            }
        };
        x[pos] = y;
        let moved = finite(f.eval(x), x)?;
        x[pos] = lower;
        let delta = moved - base;
        z[0] = scale
            * match variant {
                DiffQuotientVariant::UniformY => weight_of * delta,
                DiffQuotientVariant::TriangularY => {
                    let h = y - lower;
                    if h > 0.0 {
                        weight_of * delta / h
                    } else {
                        0.0
                    }
                }
            };
        Ok(())
    })?;
    let kind = match variant {
        DiffQuotientVariant::UniformY => EstimatorKind::DiffQuotientUniform,
        DiffQuotientVariant::TriangularY => EstimatorKind::DiffQuotientTriangular,
    };
    Ok(estimate(&m, seed, kind))
}

/// Dispatches to one of the influence estimators by kind.
pub fn influence_mc(
    f: &dyn Evaluator,
    k: usize,
    samples: u64,
    seed: u64,
    kind: EstimatorKind,
) -> Result<IntegrationEstimate> {
    match kind {
        EstimatorKind::Covariance => influence_mc_covariance(f, k, samples, seed),
        EstimatorKind::Derivative => influence_mc_derivative(f, k, samples, seed),
        EstimatorKind::DiffQuotientUniform => {
            influence_mc_diffquotient(f, k, samples, seed, DiffQuotientVariant::UniformY)
        }
        EstimatorKind::DiffQuotientTriangular => {
            influence_mc_diffquotient(f, k, samples, seed, DiffQuotientVariant::TriangularY)
        }
        EstimatorKind::RawInnerProduct => config("raw inner product is not an influence estimator"),
    }
}

/// Per-sample vector for the joint projection estimate:
/// `[f g_1, ..., f g_n, f t, f, f^2]` with `t = (n+1)^2 - (n+1)(n+2) x_(n)`.
pub fn projection_moments(f: &dyn Evaluator, samples: u64, seed: u64) -> Result<Moments> {
    let n = f.arity();
    let dim = n + 3;
    let nf = n as f64;
    run_samples(samples, seed, dim, n, |rng, x, z| {
        rng.fill_point(x);
        let mut s = x.to_vec();
        s.sort_by(f64::total_cmp);
        let v = finite(f.eval(x), x)?;
        for k in 1..=n {
            z[k - 1] = v * g_value(&s, k);
        }
        z[n] = v * ((nf + 1.0) * (nf + 1.0) - (nf + 1.0) * (nf + 2.0) * s[n - 1]);
        z[n + 1] = v;
        z[n + 2] = v * v;
        Ok(())
    })
}

/// Tensor-product Gauss–Legendre integral over `[0, 1]^n`, `n <= 4`.
///
/// The rule is applied separately on each of the `n!` ordered simplexes, mapped
/// from the unit cube by `x_(j) = u_j u_{j+1} ... u_n`, so functions that are
/// smooth on every simplex (order statistics and their polynomials) integrate to
/// high accuracy despite the kinks along the diagonals.
pub fn tensor_quadrature(f: &dyn Evaluator, nodes_per_axis: usize) -> Result<f64> {
    let n = f.arity();
    if n > MAX_TENSOR_ARITY {
        return config(format!("tensor quadrature limited to arity {MAX_TENSOR_ARITY}, got {n}"));
    }
    if nodes_per_axis < 2 {
        return config("at least two nodes per axis");
    }
    let (nodes, weights) = gauss_legendre(nodes_per_axis);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut point = vec![0.0; n];
    let mut total = 0.0;
    loop {
        total += tensor_sum(n, &nodes, &weights, &mut |u| {
            let mut s = 1.0;
            let mut jacobian = 1.0;
            for j in (0..n).rev() {
                s *= u[j];
                point[perm[j]] = s;
                jacobian *= u[j].powi(j as i32);
            }
            jacobian * f.eval(&point)
        });
        if !crate::exact::next_permutation(&mut perm) {
            break;
        }
    }
    Ok(total)
}

/// Tensor rule over the box `prod_i [lo_i, hi_i]`.
pub(crate) fn tensor_box(
    lo: &[f64],
    hi: &[f64],
    nodes: &[f64],
    weights: &[f64],
    f: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    let n = lo.len();
    let volume: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    if volume == 0.0 {
        return 0.0;
    }
    let mut point = vec![0.0; n];
    tensor_sum(n, nodes, weights, &mut |u| {
        for i in 0..n {
            point[i] = lo[i] + (hi[i] - lo[i]) * u[i];
        }
        f(&point)
    }) * volume
}

fn tensor_sum(n: usize, nodes: &[f64], weights: &[f64], f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    let m = nodes.len();
    let total = m.pow(n as u32);
    let mut x = vec![0.0; n];
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rem = idx;
        let mut w = 1.0;
        for xi in x.iter_mut() {
            let j = rem % m;
            rem /= m;
            *xi = nodes[j];
            w *= weights[j];
        }
        acc += w * f(&x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(k: usize, n: usize) -> FnEvaluator {
        FnEvaluator::new(n, move |x| {
            let mut s = x.to_vec();
            s.sort_by(f64::total_cmp);
            s[k - 1]
        })
        .with_slot_derivative(move |_, j| if j == k { 1.0 } else { 0.0 })
    }

    #[test]
    fn constant_inner_product_is_exact() {
        let one = FnEvaluator::new(3, |_| 1.0);
        let est = mc_inner_product(&one, &one, 1000, 7).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.samples, 1000);
    }

    #[test]
    fn min_squared_inner_product() {
        let f = os(1, 2);
        let est = mc_inner_product(&f, &f, 100_000, 3).unwrap();
        assert!(est.z_against(1.0 / 6.0).abs() <= 3.0, "{est:?}");
    }

    #[test]
    fn g_basis_has_zero_mean() {
        for k in 1..=3 {
            let g = FnEvaluator::new(3, move |x| {
                let mut s = x.to_vec();
                s.sort_by(f64::total_cmp);
                g_value(&s, k)
            });
            let one = FnEvaluator::new(3, |_| 1.0);
            let est = mc_inner_product(&one, &g, 100_000, 11).unwrap();
            assert!(est.z_against(0.0).abs() <= 3.0, "k={k}: {est:?}");
        }
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let f = os(2, 3);
        let a = influence_mc_covariance(&f, 2, 20_000, 99).unwrap();
        let b = influence_mc_covariance(&f, 2, 20_000, 99).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| influence_mc_covariance(&f, 2, 20_000, 99).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn order_statistic_has_unit_influence() {
        let f = os(2, 3);
        for kind in [
            EstimatorKind::Covariance,
            EstimatorKind::Derivative,
            EstimatorKind::DiffQuotientUniform,
            EstimatorKind::DiffQuotientTriangular,
        ] {
            let est = influence_mc(&f, 2, 100_000, 5, kind).unwrap();
            assert!(est.z_against(1.0).abs() <= 3.0, "{kind:?}: {est:?}");
        }
        // the increment of x_(k) is exactly y - x_(k), so this estimator has tiny spread
        let d = influence_mc_derivative(&f, 2, 10_000, 1).unwrap();
        assert!(d.value > 0.0);
    }

    #[test]
    fn tainted_samples_are_reported() {
        let f = FnEvaluator::new(2, |x| if x[0] > 0.5 { f64::NAN } else { x[1] });
        let err = influence_mc_covariance(&f, 1, 1000, 1).unwrap_err();
        match err {
            Error::TaintedSample { point, value } => {
                assert!(value.is_nan());
                assert!(point[0] > 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_derivative_is_configuration_error() {
        let f = FnEvaluator::new(2, |x| x[0]);
        assert!(matches!(influence_mc_derivative(&f, 1, 100, 1), Err(Error::Configuration(_))));
        assert!(influence_mc_covariance(&f, 3, 100, 1).is_err());
        assert!(influence_mc_covariance(&f, 1, 1, 1).is_err());
    }

    #[test]
    fn tensor_quadrature_examples() {
        let one = FnEvaluator::new(3, |_| 1.0);
        assert!((tensor_quadrature(&one, 2).unwrap() - 1.0).abs() < 1e-15);
        let prod = FnEvaluator::new(2, |x| x[0] * x[1]);
        assert!((tensor_quadrature(&prod, 2).unwrap() - 0.25).abs() < 1e-15);
        let min = os(1, 2);
        assert!((tensor_quadrature(&min, 64).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        assert!(tensor_quadrature(&FnEvaluator::new(5, |_| 1.0), 4).is_err());
        assert!(tensor_quadrature(&one, 1).is_err());
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let data: Vec<[f64; 2]> = (0..100).map(|i| [i as f64 * 0.37 % 1.0, (i * i) as f64 % 7.0]).collect();
        let mut seq = Moments::new(2);
        data.iter().for_each(|z| seq.push(z));
        let mut a = Moments::new(2);
        let mut b = Moments::new(2);
        data[..37].iter().for_each(|z| a.push(z));
        data[37..].iter().for_each(|z| b.push(z));
        a.merge(&b);
        for i in 0..2 {
            assert!((a.mean[i] - seq.mean[i]).abs() < 1e-12);
            for j in 0..2 {
                assert!((a.covariance(i, j) - seq.covariance(i, j)).abs() < 1e-9);
            }
        }
    }
}
