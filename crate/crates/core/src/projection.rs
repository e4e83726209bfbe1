//! Least-squares projection onto shifted L-statistics: the Gram system of the
//! order statistics, the basis `g_k`, influence profiles and the best approximation.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::closed_forms::{
    influence_multiplicative, influence_power_product, influence_symmetric_multiplicative, power_product_moments,
    variance_profile,
};
use crate::error::{config, domain, Error, Result};
use crate::exact::{inner_product_exact, OrderStatPolynomial};
use crate::function::FunctionSpec;
use crate::lovasz::{lovasz_mean, lovasz_norm_sq, lovasz_profile, MAX_NORM_ARITY};
use crate::montecarlo::{projection_moments, Moments};
use crate::rational::{int, to_f64, Rational};

/// Default sample count for Monte-Carlo projections.
pub const DEFAULT_SAMPLES: u64 = 100_000;

/// Default seed for Monte-Carlo projections.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Gram matrix of `os_1, ..., os_{n+1}` and its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSystem {
    arity: usize,
    gram: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
}

impl GramSystem {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `M_ij = min(i,j)(max(i,j)+1)/((n+1)(n+2))`, 0-based storage.
    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    pub fn inverse(&self) -> &[Vec<Rational>] {
        &self.inverse
    }

    /// `M M^{-1} = I`, checked exactly.
    pub fn is_inverse_exact(&self) -> bool {
        let m = self.arity + 1;
        (0..m).all(|i| {
            (0..m).all(|j| {
                let s = (0..m).fold(Rational::zero(), |acc, l| acc + &self.gram[i][l] * &self.inverse[l][j]);
                if i == j {
                    s.is_one()
                } else {
                    s.is_zero()
                }
            })
        })
    }

    /// `M^{-1} b`.
    pub fn solve(&self, b: &[Rational]) -> Result<Vec<Rational>> {
        if b.len() != self.arity + 1 {
            return domain(format!("right-hand side of length {} for n = {}", b.len(), self.arity));
        }
        Ok(self
            .inverse
            .iter()
            .map(|row| row.iter().zip(b).fold(Rational::zero(), |acc, (m, v)| acc + m * v))
            .collect())
    }

    /// `a^T M a`.
    pub fn quadratic_form(&self, a: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for (i, ai) in a.iter().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                s += ai * &self.gram[i][j] * aj;
            }
        }
        s
    }
}

/// Exact Gram system for arity `n`.
pub fn gram_system(n: usize) -> Result<GramSystem> {
    if n < 1 {
        return domain("n must be at least 1");
    }
    let m = n + 1;
    let scale = int(((n + 1) * (n + 2)) as i64);
    let gram = (1..=m)
        .map(|i| {
            (1..=m)
                .map(|j| int((i.min(j) * (i.max(j) + 1)) as i64) / &scale)
                .collect()
        })
        .collect();
    let mut inverse = vec![vec![Rational::zero(); m]; m];
    for i in 0..m {
        inverse[i][i] = if i + 1 < m {
            int(2) * &scale
        } else {
            int((n + 1) as i64) / int((n + 2) as i64) * &scale
        };
        if i + 1 < m {
            inverse[i][i + 1] = -scale.clone();
            inverse[i + 1][i] = -scale.clone();
        }
    }
    Ok(GramSystem { arity: n, gram, inverse })
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return domain(format!("k = {k} outside [1, {n}]"));
    }
    Ok(())
}

/// `g_k = -(n+1)(n+2)(os_{k+1} - 2 os_k + os_{k-1})`.
pub fn g_basis(n: usize, k: usize) -> Result<OrderStatPolynomial> {
    check_k(n, k)?;
    let os = |j| OrderStatPolynomial::order_stat(n, j);
    let second = &(&os(k + 1)? - &os(k)?.scale(&int(2))) + &os(k - 1)?;
    Ok(second.scale(&-int(((n + 1) * (n + 2)) as i64)))
}

/// `h_k = (n+1)(n+2)(os_{k+1} - os_k)(os_k - os_{k-1})`, a probability density.
pub fn h_density(n: usize, k: usize) -> Result<OrderStatPolynomial> {
    check_k(n, k)?;
    let os = |j| OrderStatPolynomial::order_stat(n, j);
    let upper = &os(k + 1)? - &os(k)?;
    let lower = &os(k)? - &os(k - 1)?;
    Ok((&upper * &lower).scale(&int(((n + 1) * (n + 2)) as i64)))
}

/// `I(f, k) = <f, g_k>`, exactly.
pub fn influence_exact(f: &OrderStatPolynomial, k: usize) -> Result<Rational> {
    inner_product_exact(f, &g_basis(f.arity(), k)?)
}

/// `a_{n+1} = (n+1)^2 <f, 1> - (n+1)(n+2) <f, os_n>`.
pub fn formal_tail_exact(f: &OrderStatPolynomial) -> Result<Rational> {
    let n = f.arity();
    let mean = f.integral();
    let top = inner_product_exact(f, &OrderStatPolynomial::order_stat(n, n)?)?;
    Ok(int(((n + 1) * (n + 1)) as i64) * mean - int(((n + 1) * (n + 2)) as i64) * top)
}

/// `a = M^{-1} b` with `b_i = <f, os_i>`, `i in [n+1]`.
pub fn coefficients_by_gram_solve(f: &OrderStatPolynomial) -> Result<Vec<Rational>> {
    let n = f.arity();
    let b = (1..=n + 1)
        .map(|i| inner_product_exact(f, &OrderStatPolynomial::order_stat(n, i)?))
        .collect::<Result<Vec<_>>>()?;
    gram_system(n)?.solve(&b)
}

/// A computed number, exact when possible, with a standard error when estimated.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub exact: Option<Rational>,
    pub std_error: Option<f64>,
}

impl Quantity {
    pub fn exact(value: Rational) -> Self {
        Quantity { value: to_f64(&value), exact: Some(value), std_error: None }
    }

    pub fn float(value: f64) -> Self {
        Quantity { value, exact: None, std_error: None }
    }

    pub fn estimate(value: f64, std_error: f64) -> Self {
        Quantity { value, exact: None, std_error: Some(std_error) }
    }
}

/// How a quantity was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    Exact,
    ClosedForm,
    MonteCarlo,
}

impl MethodTag {
    pub fn name(self) -> &'static str {
        match self {
            MethodTag::Exact => "exact",
            MethodTag::ClosedForm => "closed-form",
            MethodTag::MonteCarlo => "monte-carlo",
        }
    }
}

/// Requested computation method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Strongest available: exact, then closed form, then Monte Carlo.
    Auto { samples: u64, seed: u64 },
    Exact,
    ClosedForm,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Whether the exact rational engine handles `f`.
pub fn supports_exact(f: &FunctionSpec) -> bool {
    match f {
        FunctionSpec::OrderStat(_) | FunctionSpec::Plain(_) | FunctionSpec::Variance { .. } => true,
        FunctionSpec::SetFunction(_) => true,
        FunctionSpec::Multiplicative(_) | FunctionSpec::PowerProduct { .. } => f.plain_polynomial().is_some(),
        FunctionSpec::BlackBox { .. } => false,
    }
}

/// Whether a closed-form influence formula applies to `f`.
pub fn supports_closed_form(f: &FunctionSpec) -> bool {
    matches!(
        f,
        FunctionSpec::SetFunction(_)
            | FunctionSpec::Multiplicative(_)
            | FunctionSpec::PowerProduct { .. }
            | FunctionSpec::Variance { .. }
    )
}

impl Method {
    /// Resolves `Auto` against the function class.
    pub fn resolve(self, f: &FunctionSpec) -> Result<Method> {
        match self {
            Method::Auto { samples, seed } => Ok(if supports_exact(f) {
                Method::Exact
            } else if supports_closed_form(f) {
                Method::ClosedForm
            } else {
                Method::MonteCarlo { samples, seed }
            }),
            Method::Exact if !supports_exact(f) => config(format!(
                "no exact engine for {} functions with these parameters",
                f.class_name()
            )),
            Method::ClosedForm if !supports_closed_form(f) => {
                config(format!("no closed form for {} functions", f.class_name()))
            }
            other => Ok(other),
        }
    }

    pub fn tag(self) -> Option<MethodTag> {
        match self {
            Method::Auto { .. } => None,
            Method::Exact => Some(MethodTag::Exact),
            Method::ClosedForm => Some(MethodTag::ClosedForm),
            Method::MonteCarlo { .. } => Some(MethodTag::MonteCarlo),
        }
    }
}

/// `I(f, 1..n)`, the formal `a_{n+1}` and the mean `<f, 1>`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceProfile {
    pub arity: usize,
    pub indices: Vec<Quantity>,
    pub formal_tail: Quantity,
    pub mean: Quantity,
    pub method: MethodTag,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl InfluenceProfile {
    /// `(1/(n+1)) sum_{k=1}^{n+1} k a_k - <f, 1>`, zero up to rounding or sampling noise.
    pub fn mean_preservation_gap(&self) -> f64 {
        let n = self.arity;
        let weighted: f64 = self.indices.iter().enumerate().map(|(i, q)| (i + 1) as f64 * q.value).sum::<f64>()
            + (n + 1) as f64 * self.formal_tail.value;
        weighted / (n + 1) as f64 - self.mean.value
    }

    /// Exact version of [`Self::mean_preservation_gap`], when all entries are exact.
    pub fn mean_preservation_gap_exact(&self) -> Option<Rational> {
        let n = self.arity;
        let mut s = Rational::zero();
        for (i, q) in self.indices.iter().enumerate() {
            s += int((i + 1) as i64) * q.exact.as_ref()?;
        }
        s += int((n + 1) as i64) * self.formal_tail.exact.as_ref()?;
        Some(s / int((n + 1) as i64) - self.mean.exact.as_ref()?)
    }
}

/// Everything needed for the projection, before assembling the report.
#[derive(Clone, Debug)]
struct Analysis {
    indices: Vec<Quantity>,
    tail: Quantity,
    mean: Quantity,
    norm_sq: Option<Quantity>,
    method: MethodTag,
    samples: Option<u64>,
    seed: Option<u64>,
    moments: Option<Moments>,
}

fn exact_analysis(f: &FunctionSpec) -> Result<Analysis> {
    let n = f.arity();
    let (indices, tail, mean, norm_sq) = match f {
        FunctionSpec::SetFunction(v) => {
            let norm = if n <= MAX_NORM_ARITY { Some(lovasz_norm_sq(v)?) } else { None };
            (lovasz_profile(v), v.value(0).clone(), lovasz_mean(v), norm)
        }
        FunctionSpec::OrderStat(p) => {
            let indices = (1..=n).map(|k| influence_exact(p, k)).collect::<Result<Vec<_>>>()?;
            (indices, formal_tail_exact(p)?, p.integral(), Some(inner_product_exact(p, p)?))
        }
        _ => {
            let plain = f
                .plain_polynomial()
                .ok_or_else(|| Error::Configuration(format!("no exact engine for {} functions", f.class_name())))?;
            let sym = crate::exact::symmetrize(&plain);
            let indices = (1..=n).map(|k| influence_exact(&sym, k)).collect::<Result<Vec<_>>>()?;
            (indices, formal_tail_exact(&sym)?, plain.integral(), Some(plain.mul(&plain)?.integral()))
        }
    };
    Ok(Analysis {
        indices: indices.into_iter().map(Quantity::exact).collect(),
        tail: Quantity::exact(tail),
        mean: Quantity::exact(mean),
        norm_sq: norm_sq.map(Quantity::exact),
        method: MethodTag::Exact,
        samples: None,
        seed: None,
        moments: None,
    })
}

fn tail_from_mean(mean: f64, indices: &[f64]) -> f64 {
    let n = indices.len();
    mean - indices.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum::<f64>() / (n + 1) as f64
}

fn closed_form_analysis(f: &FunctionSpec) -> Result<Analysis> {
    let n = f.arity();
    let float_analysis = |indices: Vec<f64>, mean: f64, norm: f64| Analysis {
        tail: Quantity::float(tail_from_mean(mean, &indices)),
        indices: indices.into_iter().map(Quantity::float).collect(),
        mean: Quantity::float(mean),
        norm_sq: Some(Quantity::float(norm)),
        method: MethodTag::ClosedForm,
        samples: None,
        seed: None,
        moments: None,
    };
    match f {
        FunctionSpec::SetFunction(_) => {
            let mut a = exact_analysis(f)?;
            a.method = MethodTag::ClosedForm;
            Ok(a)
        }
        FunctionSpec::Variance { arity } => {
            let v = variance_profile(*arity)?;
            let mean = v
                .indices
                .iter()
                .enumerate()
                .fold(v.intercept.clone(), |acc, (i, s)| acc + s * int((i + 1) as i64) / int((n + 1) as i64));
            let plain = f.plain_polynomial().expect("variance is polynomial");
            Ok(Analysis {
                indices: v.indices.into_iter().map(Quantity::exact).collect(),
                tail: Quantity::exact(v.intercept),
                mean: Quantity::exact(mean),
                norm_sq: Some(Quantity::exact(plain.mul(&plain)?.integral())),
                method: MethodTag::ClosedForm,
                samples: None,
                seed: None,
                moments: None,
            })
        }
        FunctionSpec::PowerProduct { exponent, .. } => {
            let indices = (1..=n)
                .map(|k| influence_power_product(*exponent, n, k).map(|p| p.value))
                .collect::<Result<Vec<_>>>()?;
            let (mean, norm) = power_product_moments(*exponent, n);
            Ok(float_analysis(indices, mean, norm))
        }
        FunctionSpec::Multiplicative(spec) => {
            let indices = (1..=n)
                .map(|k| {
                    if spec.is_symmetric() {
                        influence_symmetric_multiplicative(&spec.factors()[0], n, k)
                    } else {
                        influence_multiplicative(spec, k)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(float_analysis(indices, spec.mean()?, spec.norm_sq()?))
        }
        _ => config(format!("no closed form for {} functions", f.class_name())),
    }
}

fn monte_carlo_analysis(f: &FunctionSpec, samples: u64, seed: u64) -> Result<Analysis> {
    let n = f.arity();
    let m = projection_moments(f.evaluator().as_ref(), samples, seed)?;
    let q = |i: usize| Quantity::estimate(m.mean[i], m.std_error(i));
    Ok(Analysis {
        indices: (0..n).map(q).collect(),
        tail: q(n),
        mean: q(n + 1),
        norm_sq: Some(q(n + 2)),
        method: MethodTag::MonteCarlo,
        samples: Some(samples),
        seed: Some(seed),
        moments: Some(m),
    })
}

fn analyze(f: &FunctionSpec, method: Method) -> Result<Analysis> {
    match method.resolve(f)? {
        Method::Exact => exact_analysis(f),
        Method::ClosedForm => closed_form_analysis(f),
        Method::MonteCarlo { samples, seed } => monte_carlo_analysis(f, samples, seed),
        Method::Auto { .. } => unreachable!("resolved above"),
    }
}

/// Influence profile of `f` with the requested method.
pub fn influence_profile(f: &FunctionSpec, method: Method) -> Result<InfluenceProfile> {
    let a = analyze(f, method)?;
    Ok(InfluenceProfile {
        arity: f.arity(),
        indices: a.indices,
        formal_tail: a.tail,
        mean: a.mean,
        method: a.method,
        samples: a.samples,
        seed: a.seed,
    })
}

/// Orthogonal projection of `f` onto the shifted L-statistics.
#[derive(Clone, Debug)]
pub struct Projection {
    pub profile: InfluenceProfile,
    pub norm_sq: Option<Quantity>,
    moments: Option<Moments>,
}

pub fn project(f: &FunctionSpec, method: Method) -> Result<Projection> {
    let a = analyze(f, method)?;
    Ok(Projection {
        profile: InfluenceProfile {
            arity: f.arity(),
            indices: a.indices,
            formal_tail: a.tail,
            mean: a.mean,
            method: a.method,
            samples: a.samples,
            seed: a.seed,
        },
        norm_sq: a.norm_sq,
        moments: a.moments,
    })
}

fn gram_f64(n: usize) -> Vec<Vec<f64>> {
    let s = ((n + 1) * (n + 2)) as f64;
    (1..=n + 1)
        .map(|i| (1..=n + 1).map(|j| (i.min(j) * (i.max(j) + 1)) as f64 / s).collect())
        .collect()
}

impl Projection {
    pub fn arity(&self) -> usize {
        self.profile.arity
    }

    /// `a_1, ..., a_{n+1}` of the basis form `sum_k a_k os_k`.
    pub fn coefficients(&self) -> Vec<Quantity> {
        let mut c = self.profile.indices.clone();
        c.push(self.profile.formal_tail.clone());
        c
    }

    fn exact_coefficients(&self) -> Option<Vec<Rational>> {
        self.coefficients().into_iter().map(|q| q.exact).collect()
    }

    fn float_coefficients(&self) -> Vec<f64> {
        self.coefficients().iter().map(|q| q.value).collect()
    }

    /// `sum_k a_k x_(k) + a_{n+1}`.
    pub fn eval_basis_form(&self, x: &[f64]) -> f64 {
        let s = crate::exact::sorted(x);
        let a = self.float_coefficients();
        s.iter().zip(&a).map(|(v, c)| v * c).sum::<f64>() + a[self.arity()]
    }

    /// `<f, 1> + sum_k I(f, k) (x_(k) - k/(n+1))`.
    pub fn eval_recentered_form(&self, x: &[f64]) -> f64 {
        let n = self.arity();
        let s = crate::exact::sorted(x);
        self.profile.mean.value
            + self
                .profile
                .indices
                .iter()
                .enumerate()
                .map(|(i, q)| q.value * (s[i] - (i + 1) as f64 / (n + 1) as f64))
                .sum::<f64>()
    }

    /// `f_L` as an order-statistic polynomial, for exact coefficients.
    pub fn to_polynomial(&self) -> Option<OrderStatPolynomial> {
        let a = self.exact_coefficients()?;
        let n = self.arity();
        OrderStatPolynomial::linear(n, a[n].clone(), &a[..n]).ok()
    }

    /// `σ²(f) = <f, f> - <f, 1>²`.
    pub fn variance(&self) -> Option<Quantity> {
        let norm = self.norm_sq.as_ref()?;
        let mean = &self.profile.mean;
        if let (Some(nq), Some(mq)) = (&norm.exact, &mean.exact) {
            return Some(Quantity::exact(nq - mq * mq));
        }
        let value = norm.value - mean.value * mean.value;
        match &self.moments {
            Some(m) => {
                let n = self.arity();
                let mut grad = vec![0.0; n + 3];
                grad[n + 1] = -2.0 * mean.value;
                grad[n + 2] = 1.0;
                Some(Quantity::estimate(value, m.delta_std_error(&grad)))
            }
            None => Some(Quantity::float(value)),
        }
    }

    /// `σ²(f_L) = a^T (M - c c^T) a`, `c` the last column of `M`.
    pub fn approximation_variance(&self) -> Quantity {
        let n = self.arity();
        if let Some(a) = self.exact_coefficients() {
            let g = gram_system(n).expect("n >= 1");
            let c: Vec<Rational> = g.gram().iter().map(|row| row[n].clone()).collect();
            let ca = c.iter().zip(&a).fold(Rational::zero(), |acc, (x, y)| acc + x * y);
            return Quantity::exact(g.quadratic_form(&a) - &ca * &ca);
        }
        let (value, grad) = centered_form_f64(n, &self.float_coefficients());
        match &self.moments {
            Some(m) => {
                let mut full = grad;
                full.extend([0.0, 0.0]);
                Quantity::estimate(value, m.delta_std_error(&full))
            }
            None => Quantity::float(value),
        }
    }

    /// `<f - f_L, f - f_L> = <f, f> - <f_L, f_L>`.
    pub fn residual_norm_sq(&self) -> Option<Quantity> {
        let n = self.arity();
        let norm = self.norm_sq.as_ref()?;
        if let (Some(a), Some(nq)) = (self.exact_coefficients(), &norm.exact) {
            let g = gram_system(n).expect("n >= 1");
            return Some(Quantity::exact(nq - g.quadratic_form(&a)));
        }
        let a = self.float_coefficients();
        let m = gram_f64(n);
        let ma: Vec<f64> = m.iter().map(|row| row.iter().zip(&a).map(|(x, y)| x * y).sum()).collect();
        let quad: f64 = ma.iter().zip(&a).map(|(x, y)| x * y).sum();
        let value = norm.value - quad;
        match &self.moments {
            Some(mom) => {
                let mut grad: Vec<f64> = ma.iter().map(|v| -2.0 * v).collect();
                grad.extend([0.0, 1.0]);
                Some(Quantity::estimate(value, mom.delta_std_error(&grad)))
            }
            None => Some(Quantity::float(value)),
        }
    }

    fn nondegenerate_variance(&self) -> Result<Quantity> {
        let var = self
            .variance()
            .ok_or_else(|| Error::Configuration("squared norm of f is not available".into()))?;
        let degenerate = match &var.exact {
            Some(v) => !v.is_positive(),
            None => !(var.value > 0.0),
        };
        if degenerate {
            return Err(Error::DegenerateVariance("f is constant, so its variance vanishes".into()));
        }
        Ok(var)
    }

    /// `R² = σ²(f_L) / σ²(f)`.
    pub fn r_squared(&self) -> Result<Quantity> {
        let var = self.nondegenerate_variance()?;
        let num = self.approximation_variance();
        if let (Some(a), Some(b)) = (&num.exact, &var.exact) {
            return Ok(Quantity::exact(a / b));
        }
        let value = num.value / var.value;
        let Some(m) = &self.moments else {
            return Ok(Quantity::float(value));
        };
        let n = self.arity();
        let (_, grad_a) = centered_form_f64(n, &self.float_coefficients());
        let mean = self.profile.mean.value;
        let mut grad: Vec<f64> = grad_a.iter().map(|g| g / var.value).collect();
        let v2 = var.value * var.value;
        grad.push(num.value * 2.0 * mean / v2);
        grad.push(-num.value / v2);
        Ok(Quantity::estimate(value, m.delta_std_error(&grad)))
    }

    /// `r(f, k) = I(f, k) / (σ(f) sqrt(2(n+1)(n+2)))`.
    pub fn normalized_index(&self, k: usize) -> Result<Quantity> {
        let n = self.arity();
        check_k(n, k)?;
        let var = self.nondegenerate_variance()?;
        let sigma = var.value.sqrt();
        let s = (2.0 * ((n + 1) * (n + 2)) as f64).sqrt();
        let index = self.profile.indices[k - 1].value;
        let value = index / (sigma * s);
        let Some(m) = &self.moments else {
            return Ok(Quantity::float(value));
        };
        let mean = self.profile.mean.value;
        let sigma3 = sigma * var.value;
        let mut grad = vec![0.0; n + 3];
        grad[k - 1] = 1.0 / (sigma * s);
        grad[n + 1] = index * mean / (sigma3 * s);
        grad[n + 2] = -index / (2.0 * sigma3 * s);
        Ok(Quantity::estimate(value, m.delta_std_error(&grad)))
    }
}

/// `a^T (M - c c^T) a` and its gradient in `a`.
fn centered_form_f64(n: usize, a: &[f64]) -> (f64, Vec<f64>) {
    let m = gram_f64(n);
    let c: Vec<f64> = (0..=n).map(|i| m[i][n]).collect();
    let ca: f64 = c.iter().zip(a).map(|(x, y)| x * y).sum();
    let ma: Vec<f64> = m.iter().map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum()).collect();
    let value = ma.iter().zip(a).map(|(x, y)| x * y).sum::<f64>() - ca * ca;
    let grad = ma.iter().zip(&c).map(|(x, ci)| 2.0 * (x - ca * ci)).collect();
    (value, grad)
}

/// Best shifted L-statistic approximation with its quality measures.
#[derive(Clone, Debug)]
pub struct ApproximationResult {
    pub projection: Projection,
    pub r_squared: Quantity,
    pub residual_norm_sq: Quantity,
    pub normalized_indices: Vec<Quantity>,
}

impl ApproximationResult {
    /// `a_1, ..., a_{n+1}`.
    pub fn coefficients(&self) -> Vec<Quantity> {
        self.projection.coefficients()
    }

    /// Constant of the recentered form, `<f, 1>`.
    pub fn mean(&self) -> &Quantity {
        &self.projection.profile.mean
    }

    /// Slopes of the recentered form, `I(f, k)`.
    pub fn slopes(&self) -> &[Quantity] {
        &self.projection.profile.indices
    }
}

/// Projection plus `R²`, residual and normalized indices; a constant `f` is a
/// [`Error::DegenerateVariance`].
pub fn best_approximation(f: &FunctionSpec, method: Method) -> Result<ApproximationResult> {
    let projection = project(f, method)?;
    let r_squared = projection.r_squared()?;
    let residual_norm_sq = projection
        .residual_norm_sq()
        .ok_or_else(|| Error::Configuration("squared norm of f is not available".into()))?;
    let normalized_indices = (1..=f.arity())
        .map(|k| projection.normalized_index(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(ApproximationResult { projection, r_squared, residual_norm_sq, normalized_indices })
}

/// `r(f, k)` with the requested method.
pub fn normalized_index(f: &FunctionSpec, k: usize, method: Method) -> Result<Quantity> {
    check_k(f.arity(), k)?;
    project(f, method)?.normalized_index(k)
}

/// `σ²(g_k)` for the exact basis function, which equals `2(n+1)(n+2)`.
pub fn g_basis_variance(n: usize, k: usize) -> Result<Rational> {
    let g = g_basis(n, k)?;
    let mean = g.integral();
    Ok(inner_product_exact(&g, &g)? - &mean * &mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::builtin;
    use crate::rational::rat;
    use num_bigint::BigInt;

    fn basis_scale(n: usize) -> Rational {
        Rational::from_integer(BigInt::from((n + 1) * (n + 2)))
    }

    fn os(n: usize, k: usize) -> OrderStatPolynomial {
        OrderStatPolynomial::order_stat(n, k).unwrap()
    }

    #[test]
    fn gram_examples() {
        let g = gram_system(2).unwrap();
        assert_eq!(g.gram()[0], vec![rat(1, 6), rat(1, 4), rat(1, 3)]);
        let expect = [[2, -1, 0], [-1, 2, -1]];
        for (i, row) in expect.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(g.inverse()[i][j], int(12 * v));
            }
        }
        assert_eq!(g.inverse()[2][2], int(9));
        assert!(g.is_inverse_exact());
        assert!(gram_system(0).is_err());
    }

    #[test]
    fn basis_examples() {
        let g1 = g_basis(2, 1).unwrap();
        let expect = (&os(2, 2) - &os(2, 1).scale(&int(2))).scale(&int(-12));
        assert_eq!(g1, expect);
        let g2 = g_basis(2, 2).unwrap();
        let expect = (&(&os(2, 3) - &os(2, 2).scale(&int(2))) + &os(2, 1)).scale(&int(-12));
        assert_eq!(g2, expect);
        for n in 1..6 {
            for k in 1..=n {
                assert!(g_basis(n, k).unwrap().integral().is_zero());
                assert!(h_density(n, k).unwrap().integral().is_one());
            }
        }
        assert!(g_basis(2, 3).is_err());
    }

    #[test]
    fn basis_elements_are_fixed() {
        for k in 1..=3 {
            for j in 1..=3 {
                let v = influence_exact(&os(3, j), k).unwrap();
                assert_eq!(v, if j == k { int(1) } else { int(0) });
            }
        }
        let p = influence_profile(&FunctionSpec::OrderStat(os(3, 2)), Method::Exact).unwrap();
        let v: Vec<f64> = p.indices.iter().map(|q| q.value).collect();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn product_of_order_stats() {
        let f = &os(2, 1) * &os(2, 2);
        assert_eq!(influence_exact(&f, 1).unwrap(), rat(4, 5));
        assert_eq!(influence_exact(&f, 2).unwrap(), rat(1, 5));
        let solved = coefficients_by_gram_solve(&f).unwrap();
        assert_eq!(solved[0], rat(4, 5));
        assert_eq!(solved[2], formal_tail_exact(&f).unwrap());
    }

    #[test]
    fn variance_profile_and_intercept() {
        let f = builtin("variance", 2).unwrap();
        let p = project(&f, Method::Exact).unwrap();
        let idx: Vec<Rational> = p.profile.indices.iter().map(|q| q.exact.clone().unwrap()).collect();
        assert_eq!(idx, vec![rat(-1, 5), rat(1, 5)]);
        assert_eq!(p.profile.formal_tail.exact, Some(rat(-1, 40)));
        let c = project(&f, Method::ClosedForm).unwrap();
        assert_eq!(c.profile.formal_tail.exact, Some(rat(-1, 40)));
        assert_eq!(c.profile.mean.exact, p.profile.mean.exact);
    }

    #[test]
    fn constant_function() {
        let f = FunctionSpec::OrderStat(OrderStatPolynomial::constant(3, int(5)));
        let p = influence_profile(&f, Method::Exact).unwrap();
        assert!(p.indices.iter().all(|q| q.exact.as_ref().unwrap().is_zero()));
        assert_eq!(p.formal_tail.exact, Some(int(5)));
        assert_eq!(p.mean_preservation_gap_exact(), Some(int(0)));
        assert!(matches!(best_approximation(&f, Method::Exact), Err(Error::DegenerateVariance(_))));
        assert!(matches!(normalized_index(&f, 1, Method::Exact), Err(Error::DegenerateVariance(_))));
    }

    #[test]
    fn member_of_space_is_fixed() {
        let f = &OrderStatPolynomial::constant(3, int(3)) + &os(3, 1).scale(&int(2));
        let a = best_approximation(&FunctionSpec::OrderStat(f.clone()), Method::Exact).unwrap();
        assert_eq!(a.r_squared.exact, Some(int(1)));
        assert_eq!(a.residual_norm_sq.exact, Some(int(0)));
        assert_eq!(a.projection.to_polynomial().unwrap(), f);
    }

    #[test]
    fn r_squared_two_ways() {
        let f = &os(2, 1) * &os(2, 2);
        let p = project(&FunctionSpec::OrderStat(f.clone()), Method::Exact).unwrap();
        let fl = p.to_polynomial().unwrap();
        let mean = fl.integral();
        let by_definition = (inner_product_exact(&fl, &fl).unwrap() - &mean * &mean)
            / (inner_product_exact(&f, &f).unwrap() - f.integral() * f.integral());
        assert_eq!(p.r_squared().unwrap().exact.unwrap(), by_definition);
    }

    #[test]
    fn normalized_basis_function() {
        for (n, k) in [(2, 1), (3, 2), (4, 4)] {
            let g = FunctionSpec::OrderStat(g_basis(n, k).unwrap());
            let r = normalized_index(&g, k, Method::Exact).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
            assert_eq!(g_basis_variance(n, k).unwrap(), basis_scale(n) * int(2));
        }
    }

    #[test]
    fn monte_carlo_projection_tracks_exact() {
        let f = FunctionSpec::OrderStat(&os(2, 1) * &os(2, 2));
        let exact = best_approximation(&f, Method::Exact).unwrap();
        let mc = best_approximation(&f, Method::MonteCarlo { samples: 200_000, seed: 7 }).unwrap();
        for (e, m) in exact.slopes().iter().zip(mc.slopes()) {
            assert!((e.value - m.value).abs() < 4.0 * m.std_error.unwrap());
        }
        let r2 = &mc.r_squared;
        assert!((r2.value - exact.r_squared.value).abs() < 4.0 * r2.std_error.unwrap());
        let r = &mc.normalized_indices[0];
        assert!((r.value - exact.normalized_indices[0].value).abs() < 4.0 * r.std_error.unwrap());
        assert!(mc.projection.profile.mean_preservation_gap().abs() < 1e-9);
    }

    #[test]
    fn auto_resolution() {
        let auto = Method::Auto { samples: 10, seed: 1 };
        assert_eq!(auto.resolve(&builtin("min", 3).unwrap()).unwrap(), Method::Exact);
        assert_eq!(auto.resolve(&builtin("geometric-mean", 3).unwrap()).unwrap(), Method::ClosedForm);
        assert_eq!(auto.resolve(&builtin("product", 3).unwrap()).unwrap(), Method::Exact);
        assert!(matches!(
            auto.resolve(&builtin("conjunctive-example", 2).unwrap()).unwrap(),
            Method::MonteCarlo { .. }
        ));
        assert!(Method::Exact.resolve(&builtin("geometric-mean", 3).unwrap()).is_err());
        assert!(Method::ClosedForm.resolve(&builtin("min", 3).unwrap()).is_err());
    }
}
