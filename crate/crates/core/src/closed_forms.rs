//! Closed-form influence indices: multiplicative functions, their symmetric
//! special case, the power-product family and the variance statistic, plus the
//! subset-box integrals that express `<f, os_k>` and `I(f, k)` without order statistics.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{config, domain, Error, Result};
use crate::exact::{PlainPolynomial, MAX_SUBSET_ARITY};
use crate::function::FunctionSpec;
use crate::montecarlo::{tensor_box, MAX_TENSOR_ARITY};
use crate::quadrature::{gauss_legendre, integrate_adaptive, integrate_unit, DEFAULT_MAX_INTERVALS};
use crate::rational::{binomial, binomial_f64, to_f64, Rational};

/// Subset enumerations in the closed forms are capped at this arity.
pub const MAX_CLOSED_FORM_ARITY: usize = 20;

/// Below this magnitude a numerically computed `Φ(1)` cannot be told apart from zero.
pub const ZERO_MASS_THRESHOLD: f64 = 1e-12;

/// Tolerance of the nested quadrature computing `Φ(y)` for numeric factors.
const INNER_TOLERANCE: f64 = 1e-13;

/// Tolerance of the subset-box integrals.
pub const BOX_TOLERANCE: f64 = 1e-10;

/// Nodes per axis of the tensor rule used for black-box subset-box integrals.
const BOX_NODES: usize = 16;

/// `sum coef * y^power` with every `power > -1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries(pub Vec<(f64, f64)>);

impl PowerSeries {
    pub fn constant(c: f64) -> Self {
        PowerSeries(vec![(0.0, c)])
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.0.iter().map(|&(p, c)| if p == 0.0 { c } else { c * y.powf(p) }).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.0.len() * other.0.len());
        for &(pa, ca) in &self.0 {
            for &(pb, cb) in &other.0 {
                let p = pa + pb;
                match out.iter_mut().find(|(q, _)| *q == p) {
                    Some(slot) => slot.1 += ca * cb,
                    None => out.push((p, ca * cb)),
                }
            }
        }
        PowerSeries(out)
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(PowerSeries::constant(1.0), |acc, _| acc.mul(self))
    }

    /// `c - self`.
    pub fn reflect(&self, c: f64) -> Self {
        let mut out = vec![(0.0, c)];
        for &(p, k) in &self.0 {
            match out.iter_mut().find(|(q, _)| *q == p) {
                Some(slot) => slot.1 -= k,
                None => out.push((p, -k)),
            }
        }
        PowerSeries(out)
    }

    /// `∫_0^1`.
    pub fn integral(&self) -> f64 {
        self.0.iter().map(|&(p, c)| c / (p + 1.0)).sum()
    }
}

type UnaryFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A one-dimensional factor `φ` on `[0, 1]` with antiderivative `Φ(y) = ∫_0^y φ`.
#[derive(Clone)]
pub enum UnaryFactor {
    /// `φ(x) = x^c` with `c > -1/2`.
    Monomial { exponent: f64 },
    /// `φ(x) = sum_j a_j x^j` with exact coefficients.
    Polynomial(Vec<Rational>),
    /// Arbitrary square-integrable `φ`; `Φ` by adaptive quadrature.
    /// `zero_mass` declares `Φ(1) = 0` exactly.
    Numeric { phi: Arc<UnaryFn>, zero_mass: bool, label: String },
}

impl fmt::Debug for UnaryFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnaryFactor::Monomial { exponent } => write!(f, "Monomial(x^{exponent})"),
            UnaryFactor::Polynomial(c) => {
                let c: Vec<String> = c.iter().map(crate::rational::format_rational).collect();
                write!(f, "Polynomial({c:?})")
            }
            UnaryFactor::Numeric { label, zero_mass, .. } => {
                write!(f, "Numeric({label}, zero_mass={zero_mass})")
            }
        }
    }
}

impl UnaryFactor {
    pub fn monomial(exponent: f64) -> Result<Self> {
        if !(exponent > -0.5) || !exponent.is_finite() {
            return domain(format!("exponent {exponent} must exceed -1/2"));
        }
        Ok(UnaryFactor::Monomial { exponent })
    }

    pub fn polynomial(coefficients: Vec<Rational>) -> Self {
        UnaryFactor::Polynomial(coefficients)
    }

    pub fn numeric(label: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        UnaryFactor::Numeric { phi: Arc::new(phi), zero_mass: false, label: label.into() }
    }

    /// Numeric factor whose integral over `[0, 1]` is declared to be exactly zero.
    pub fn numeric_zero_mass(label: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        UnaryFactor::Numeric { phi: Arc::new(phi), zero_mass: true, label: label.into() }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self {
            UnaryFactor::Monomial { exponent } => x.powf(*exponent),
            UnaryFactor::Polynomial(c) => horner(c, x),
            UnaryFactor::Numeric { phi, .. } => phi(x),
        }
    }

    /// `φ'(x)` where available in closed form.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            UnaryFactor::Monomial { exponent } => {
                Some(if *exponent == 0.0 { 0.0 } else { exponent * x.powf(exponent - 1.0) })
            }
            UnaryFactor::Polynomial(c) => {
                let d: Vec<Rational> = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, a)| a * Rational::from_integer(BigInt::from(j)))
                    .collect();
                Some(horner(&d, x))
            }
            UnaryFactor::Numeric { .. } => None,
        }
    }

    /// `Φ` as a power series when it is known symbolically.
    pub fn antiderivative_series(&self) -> Option<PowerSeries> {
        match self {
            UnaryFactor::Monomial { exponent } => {
                Some(PowerSeries(vec![(exponent + 1.0, 1.0 / (exponent + 1.0))]))
            }
            UnaryFactor::Polynomial(c) => Some(PowerSeries(
                c.iter()
                    .enumerate()
                    .filter(|(_, a)| !a.is_zero())
                    .map(|(j, a)| (j as f64 + 1.0, to_f64(a) / (j as f64 + 1.0)))
                    .collect(),
            )),
            UnaryFactor::Numeric { .. } => None,
        }
    }

    pub fn antiderivative(&self, y: f64) -> Result<f64> {
        match self.antiderivative_series() {
            Some(series) => Ok(series.eval(y)),
            None => integrate_adaptive(|t| self.phi(t), 0.0, y, INNER_TOLERANCE, DEFAULT_MAX_INTERVALS)
                .map(|r| r.value),
        }
    }

    /// `Φ(1)`.
    pub fn total(&self) -> Result<f64> {
        match self {
            UnaryFactor::Polynomial(c) => Ok(to_f64(&exact_total(c))),
            UnaryFactor::Numeric { zero_mass: true, .. } => Ok(0.0),
            _ => self.antiderivative(1.0),
        }
    }

    /// Whether `Φ(1) = 0`, when it can be decided without rounding.
    pub fn total_is_zero(&self) -> Option<bool> {
        match self {
            UnaryFactor::Monomial { .. } => Some(false),
            UnaryFactor::Polynomial(c) => Some(exact_total(c).is_zero()),
            UnaryFactor::Numeric { zero_mass: true, .. } => Some(true),
            UnaryFactor::Numeric { .. } => None,
        }
    }

    /// `∫_0^1 φ^2`.
    pub fn square_integral(&self) -> Result<f64> {
        match self {
            UnaryFactor::Monomial { exponent } => Ok(1.0 / (2.0 * exponent + 1.0)),
            UnaryFactor::Polynomial(c) => {
                let sq = poly_mul(c, c);
                Ok(to_f64(&exact_total(&sq)))
            }
            UnaryFactor::Numeric { phi, .. } => integrate_unit(|t| {
                let v = phi(t);
                v * v
            }),
        }
    }

    /// Exact coefficients when `φ` is a polynomial with rational coefficients.
    pub fn exact_polynomial(&self) -> Option<Vec<Rational>> {
        match self {
            UnaryFactor::Polynomial(c) => Some(c.clone()),
            UnaryFactor::Monomial { exponent } if exponent.fract() == 0.0 && *exponent >= 0.0 => {
                let e = *exponent as usize;
                let mut c = vec![Rational::zero(); e + 1];
                c[e] = Rational::one();
                Some(c)
            }
            _ => None,
        }
    }
}

fn horner(c: &[Rational], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + to_f64(a))
}

fn exact_total(c: &[Rational]) -> Rational {
    c.iter()
        .enumerate()
        .map(|(j, a)| a / Rational::from_integer(BigInt::from(j + 1)))
        .fold(Rational::zero(), |acc, t| acc + t)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `f(x) = prod_i φ_i(x_i)`.
#[derive(Clone, Debug)]
pub struct MultiplicativeSpec {
    factors: Vec<UnaryFactor>,
    symmetric: bool,
}

impl MultiplicativeSpec {
    pub fn new(factors: Vec<UnaryFactor>) -> Result<Self> {
        if factors.is_empty() {
            return domain("at least one factor");
        }
        Ok(MultiplicativeSpec { factors, symmetric: false })
    }

    /// The same factor in every coordinate.
    pub fn symmetric(factor: UnaryFactor, arity: usize) -> Result<Self> {
        if arity == 0 {
            return domain("arity must be positive");
        }
        Ok(MultiplicativeSpec { factors: vec![factor; arity], symmetric: true })
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[UnaryFactor] {
        &self.factors
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().zip(x).map(|(f, &xi)| f.phi(xi)).product()
    }

    /// `prod_i Φ_i(1)`.
    pub fn mean(&self) -> Result<f64> {
        self.factors.iter().map(UnaryFactor::total).product()
    }

    /// `prod_i ∫ φ_i^2`.
    pub fn norm_sq(&self) -> Result<f64> {
        self.factors.iter().map(UnaryFactor::square_integral).product()
    }

    /// The product as a plain polynomial when every factor is an exact polynomial.
    pub fn to_plain_polynomial(&self) -> Option<PlainPolynomial> {
        let n = self.arity();
        let mut acc = PlainPolynomial::new(n, [(vec![0; n], Rational::one())]).ok()?;
        for (i, factor) in self.factors.iter().enumerate() {
            let coeffs = factor.exact_polynomial()?;
            let terms = coeffs.into_iter().enumerate().map(|(j, a)| {
                let mut e = vec![0u32; n];
                e[i] = j as u32;
                (e, a)
            });
            acc = acc.mul(&PlainPolynomial::new(n, terms).ok()?).ok()?;
        }
        Some(acc)
    }
}

/// `∫_0^1 prod_{lower} Φ_i(y) prod_{upper} (Φ_i(1) - Φ_i(y)) dy`.
fn integrate_factor_product(lower: &[&UnaryFactor], upper: &[&UnaryFactor]) -> Result<f64> {
    let series: Option<Vec<PowerSeries>> = lower
        .iter()
        .map(|f| f.antiderivative_series())
        .chain(upper.iter().map(|f| {
            let total = f.total().ok()?;
            f.antiderivative_series().map(|s| s.reflect(total))
        }))
        .collect();
    if let Some(series) = series {
        let product = series.iter().fold(PowerSeries::constant(1.0), |acc, s| acc.mul(s));
        return Ok(product.integral());
    }
    let totals: Vec<f64> = upper.iter().map(|f| f.total()).collect::<Result<_>>()?;
    let failure = std::cell::Cell::new(None);
    let value = integrate_adaptive(
        |y| {
            let mut v = 1.0;
            for f in lower {
                v *= f.antiderivative(y).unwrap_or_else(|e| {
                    failure.set(Some(e));
                    f64::NAN
                });
            }
            for (f, t) in upper.iter().zip(&totals) {
                v *= t - f.antiderivative(y).unwrap_or_else(|e| {
                    failure.set(Some(e));
                    f64::NAN
                });
            }
            v
        },
        0.0,
        1.0,
        BOX_TOLERANCE,
        DEFAULT_MAX_INTERVALS,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    value.map(|r| r.value)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return domain(format!("k = {k} outside [1, {n}]"));
    }
    Ok(())
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > MAX_CLOSED_FORM_ARITY {
        return config(format!("subset enumeration limited to arity {MAX_CLOSED_FORM_ARITY}, got {n}"));
    }
    Ok(())
}

fn parity(odd: bool) -> f64 {
    if odd {
        -1.0
    } else {
        1.0
    }
}

/// Influence index of `prod φ_i(x_i)` by enumeration over subsets:
/// `(n+1)(n+2) sum_{|S| >= k-1} (-1)^{|S|+1-k} C(|S|+1, k) prod_{i ∉ S} Φ_i(1) ∫ prod_{i ∈ S} Φ_i`.
pub fn influence_multiplicative(spec: &MultiplicativeSpec, k: usize) -> Result<f64> {
    let n = spec.arity();
    check_k(n, k)?;
    check_enumerable(n)?;
    let totals: Vec<f64> = spec.factors.iter().map(|f| f.total()).collect::<Result<_>>()?;
    let mut sum = 0.0;
    if spec.symmetric {
        // every subset of a given size contributes the same amount
        let factor = &spec.factors[0];
        for s in (k - 1)..=n {
            let lower = vec![factor; s];
            let weight = parity((s + 1 - k) % 2 == 1) * binomial_f64(s as u64 + 1, k as u64) * binomial_f64(n as u64, s as u64);
            sum += weight * totals[0].powi((n - s) as i32) * integrate_factor_product(&lower, &[])?;
        }
    } else {
        for mask in 0u64..(1u64 << n) {
            let s = mask.count_ones() as usize;
            if s + 1 < k {
                continue;
            }
            let rest: f64 = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| totals[i]).product();
            if rest == 0.0 {
                continue;
            }
            let lower: Vec<&UnaryFactor> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &spec.factors[i]).collect();
            let weight = parity((s + 1 - k) % 2 == 1) * binomial_f64(s as u64 + 1, k as u64);
            sum += weight * rest * integrate_factor_product(&lower, &[])?;
        }
    }
    Ok((n as f64 + 1.0) * (n as f64 + 2.0) * sum)
}

/// Influence index of `prod φ(x_i)` with a common factor, through the beta-density form.
///
/// When `Φ(1) ≠ 0` this evaluates
/// `(n+1)(n+2) ∫ [C(n,k-1) Φ^{k-1}(Φ(1)-Φ)^{n-k+1} - C(n,k) Φ^k (Φ(1)-Φ)^{n-k}] dy`;
/// when `Φ(1) = 0` it is `(-1)^{n-k+1} (n+1)(n+2) C(n+1, k) ∫ Φ^n dy`.
pub fn influence_symmetric_multiplicative(factor: &UnaryFactor, n: usize, k: usize) -> Result<f64> {
    check_k(n, k)?;
    let zero_mass = match factor.total_is_zero() {
        Some(z) => z,
        None => {
            let total = factor.total()?;
            if total.abs() < ZERO_MASS_THRESHOLD {
                return Err(Error::BranchAmbiguity(format!(
                    "Φ(1) = {total:e} is numerically indistinguishable from zero; declare the zero mass explicitly"
                )));
            }
            false
        }
    };
    let scale = (n as f64 + 1.0) * (n as f64 + 2.0);
    if zero_mass {
        let integral = match factor.antiderivative_series() {
            Some(series) => series.pow(n).integral(),
            None => {
                let failure = std::cell::Cell::new(None);
                let v = integrate_unit(|y| match factor.antiderivative(y) {
                    Ok(p) => p.powi(n as i32),
                    Err(e) => {
                        failure.set(Some(e));
                        f64::NAN
                    }
                });
                if let Some(e) = failure.take() {
                    return Err(e);
                }
                v?
            }
        };
        let c = binomial_f64(n as u64 + 1, k as u64);
        return Ok(parity((n + 1 - k) % 2 == 1) * scale * c * integral);
    }
    let total = factor.total()?;
    let c_low = binomial_f64(n as u64, k as u64 - 1);
    let c_high = binomial_f64(n as u64, k as u64);
    let integral = match factor.antiderivative_series() {
        Some(series) => {
            let rest = series.reflect(total);
            let a = series.pow(k - 1).mul(&rest.pow(n - k + 1)).integral();
            let b = series.pow(k).mul(&rest.pow(n - k)).integral();
            c_low * a - c_high * b
        }
        None => {
            let failure = std::cell::Cell::new(None);
            let v = integrate_unit(|y| match factor.antiderivative(y) {
                Ok(p) => {
                    let z = p / total;
                    total.powi(n as i32)
                        * (c_low * z.powi(k as i32 - 1) * (1.0 - z).powi((n - k + 1) as i32)
                            - c_high * z.powi(k as i32) * (1.0 - z).powi((n - k) as i32))
                }
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            });
            if let Some(e) = failure.take() {
                return Err(e);
            }
            v?
        }
    };
    Ok(scale * integral)
}

/// Beta density `z^{a-1} (1-z)^{b-1} / B(a, b)`.
pub fn beta_density(z: f64, a: f64, b: f64) -> f64 {
    let log_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    (log_norm + (a - 1.0) * z.ln() + (b - 1.0) * (1.0 - z).ln()).exp()
}

/// Influence index of `(prod x_i)^c`, in direct form and relative to `I(f, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerProductInfluence {
    pub value: f64,
    /// `I(f, 1)`.
    pub first: f64,
    /// `I(f, k) / I(f, 1) = Γ(k-1+r) / (Γ(k+1) Γ(r))` with `r = 1/(c+1)`.
    pub ratio: f64,
}

/// `I(f, k) = c r^{n+2} Γ(n+3) Γ(k-1+r) / (Γ(k+1) Γ(n+1+r))` for `f = (prod x_i)^c`, `r = 1/(c+1)`.
pub fn influence_power_product(c: f64, n: usize, k: usize) -> Result<PowerProductInfluence> {
    if !(c > -0.5) || !c.is_finite() {
        return domain(format!("exponent {c} must exceed -1/2"));
    }
    check_k(n, k)?;
    let r = 1.0 / (c + 1.0);
    let nf = n as f64;
    let kf = k as f64;
    let direct = |kk: f64| {
        if c == 0.0 {
            return 0.0;
        }
        let log_mag = (nf + 2.0) * r.ln() + ln_gamma(nf + 3.0) + ln_gamma(kk - 1.0 + r)
            - ln_gamma(kk + 1.0)
            - ln_gamma(nf + 1.0 + r);
        c * log_mag.exp()
    };
    let ratio = (ln_gamma(kf - 1.0 + r) - ln_gamma(kf + 1.0) - ln_gamma(r)).exp();
    Ok(PowerProductInfluence { value: direct(kf), first: direct(1.0), ratio })
}

/// Mean and squared norm of `(prod x_i)^c`.
pub fn power_product_moments(c: f64, n: usize) -> (f64, f64) {
    ((1.0 / (c + 1.0)).powi(n as i32), (1.0 / (2.0 * c + 1.0)).powi(n as i32))
}

/// Best shifted L-statistic of the variance statistic, in exact form.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProfile {
    pub arity: usize,
    /// `I(σ², k) = (n+2)(2k-n-1) / (n²(n+3))`.
    pub indices: Vec<Rational>,
    /// `(1-n²) / (12 n (n+3))`.
    pub intercept: Rational,
    /// The same approximation rewritten through Gini's mean difference matches coefficientwise.
    pub gini_identity_holds: bool,
}

pub fn variance_profile(n: usize) -> Result<VarianceProfile> {
    if n < 2 {
        return domain(format!("variance statistic needs n >= 2, got {n}"));
    }
    let r = |v: i64| Rational::from_integer(BigInt::from(v));
    let ni = n as i64;
    let indices: Vec<Rational> = (1..=ni)
        .map(|k| r((ni + 2) * (2 * k - ni - 1)) / r(ni * ni * (ni + 3)))
        .collect();
    let intercept = r(1 - ni * ni) / r(12 * ni * (ni + 3));

    // (n-1)/(12n(n+3)) (6(n+2) G - (n+1)) with G = 2/(n(n-1)) sum (2k-n-1) X_(k)
    let outer = r(ni - 1) / r(12 * ni * (ni + 3));
    let gini_intercept = -&outer * r(ni + 1);
    let gini_slopes: Vec<Rational> = (1..=ni)
        .map(|k| &outer * r(6 * (ni + 2)) * r(2) * r(2 * k - ni - 1) / r(ni * (ni - 1)))
        .collect();
    let gini_identity_holds = gini_intercept == intercept && gini_slopes == indices;
    Ok(VarianceProfile { arity: n, indices, intercept, gini_identity_holds })
}

/// Which box the coordinates in `S` (and outside it) range over, for the outer variable `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetBox {
    /// `[0, y]^S × [0, 1]^{[n] \ S}`.
    Lower,
    /// `[y, 1]^S × [0, 1]^{[n] \ S}`.
    Upper,
    /// `[0, y]^S × [y, 1]^{[n] \ S}`.
    Split,
}

/// `∫_0^1 ∫_{box(y)} f dx dy` for the requested subset box.
pub fn subset_box_integral(f: &FunctionSpec, subset: u64, form: SubsetBox) -> Result<f64> {
    let n = f.arity();
    if n < 64 && subset >> n != 0 {
        return domain(format!("subset {subset:#b} not contained in [{n}]"));
    }
    if let Some(p) = f.plain_polynomial() {
        return Ok(to_f64(&plain_box_integral(&p, subset, form)));
    }
    if let Some(spec) = f.multiplicative() {
        return multiplicative_box_integral(&spec, subset, form);
    }
    if n > MAX_TENSOR_ARITY {
        return config(format!(
            "subset-box integrals of this function class are limited to arity {MAX_TENSOR_ARITY}"
        ));
    }
    let evaluator = f.evaluator();
    let (nodes, weights) = gauss_legendre(BOX_NODES);
    let mut lo = vec![0.0; n];
    let mut hi = vec![1.0; n];
    let outer = integrate_adaptive(
        |y| {
            let mut lo = lo.clone();
            let mut hi = hi.clone();
            for i in 0..n {
                let inside = subset >> i & 1 == 1;
                let (a, b) = match (form, inside) {
                    (SubsetBox::Lower, true) | (SubsetBox::Split, true) => (0.0, y),
                    (SubsetBox::Upper, true) | (SubsetBox::Split, false) => (y, 1.0),
                    (_, false) => (0.0, 1.0),
                };
                lo[i] = a;
                hi[i] = b;
            }
            tensor_box(&lo, &hi, &nodes, &weights, &|x| evaluator.eval(x))
        },
        0.0,
        1.0,
        BOX_TOLERANCE,
        DEFAULT_MAX_INTERVALS,
    )?;
    lo.clear();
    hi.clear();
    Ok(outer.value)
}

fn multiplicative_box_integral(spec: &MultiplicativeSpec, subset: u64, form: SubsetBox) -> Result<f64> {
    let n = spec.arity();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut constant = 1.0;
    for i in 0..n {
        let f = &spec.factors[i];
        let inside = subset >> i & 1 == 1;
        match (form, inside) {
            (SubsetBox::Lower, true) | (SubsetBox::Split, true) => lower.push(f),
            (SubsetBox::Upper, true) | (SubsetBox::Split, false) => upper.push(f),
            (_, false) => constant *= f.total()?,
        }
    }
    if constant == 0.0 {
        return Ok(0.0);
    }
    Ok(constant * integrate_factor_product(&lower, &upper)?)
}

/// Exact subset-box integral of a plain polynomial: each monomial factorizes
/// into univariate pieces `y^{e+1}/(e+1)` or `(1 - y^{e+1})/(e+1)`.
pub fn plain_box_integral(p: &PlainPolynomial, subset: u64, form: SubsetBox) -> Rational {
    let n = p.arity();
    let mut total = Rational::zero();
    for (exps, coeff) in p.terms() {
        // univariate polynomial in y, exact coefficients
        let mut poly = vec![coeff.clone()];
        for i in 0..n {
            let e = exps[i] as usize;
            let scale = Rational::new(BigInt::one(), BigInt::from(e + 1));
            let inside = subset >> i & 1 == 1;
            let piece: Vec<Rational> = match (form, inside) {
                (SubsetBox::Lower, true) | (SubsetBox::Split, true) => {
                    let mut v = vec![Rational::zero(); e + 2];
                    v[e + 1] = scale;
                    v
                }
                (SubsetBox::Upper, true) | (SubsetBox::Split, false) => {
                    let mut v = vec![Rational::zero(); e + 2];
                    v[0] = scale.clone();
                    v[e + 1] = -scale;
                    v
                }
                (_, false) => vec![scale],
            };
            poly = poly_mul(&poly, &piece);
        }
        total += poly
            .iter()
            .enumerate()
            .map(|(j, a)| a / Rational::from_integer(BigInt::from(j + 1)))
            .fold(Rational::zero(), |acc, t| acc + t);
    }
    total
}

/// Order-statistic-free expressions for `<f, os_k>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentFormula {
    /// `∫f - sum_{|S|>=k} (-1)^{|S|-k} C(|S|-1, k-1) ∫∫_{Lower(S)} f`.
    MaxExpansion,
    /// `sum_{|S|>=n-k+1} (-1)^{|S|-n+k-1} C(|S|-1, n-k) ∫∫_{Upper(S)} f`.
    MinExpansion,
    /// `∫f - sum_{|S|>=k} ∫∫_{Split(S)} f`.
    SplitAbove,
    /// `sum_{|S|<k} ∫∫_{Split(S)} f`.
    SplitBelow,
}

/// Order-statistic-free expressions for `I(f, k) / ((n+1)(n+2))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlternativeFormula {
    /// `sum_{|S|>=k-1} (-1)^{|S|+1-k} C(|S|+1, k) ∫∫_{Lower(S)} f`.
    LowerBoxes,
    /// `sum_{|S|>=n-k} (-1)^{|S|-n+k-1} C(|S|+1, n-k+1) ∫∫_{Upper(S)} f`.
    UpperBoxes,
    /// `(sum_{|S|=k-1} - sum_{|S|=k}) ∫∫_{Split(S)} f`.
    SplitBoxes,
}

impl std::str::FromStr for AlternativeFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower-boxes" => Ok(AlternativeFormula::LowerBoxes),
            "upper-boxes" => Ok(AlternativeFormula::UpperBoxes),
            "split-boxes" => Ok(AlternativeFormula::SplitBoxes),
            other => config(format!("unknown formula {other:?}")),
        }
    }
}

fn subsets_of_size(n: usize, size: usize) -> impl Iterator<Item = u64> {
    (0u64..(1u64 << n)).filter(move |m| m.count_ones() as usize == size)
}

/// Sums `weight(|S|) * box(S)` over subsets, grouping by size when `f` is symmetric.
fn weighted_box_sum(
    f: &FunctionSpec,
    form: SubsetBox,
    sizes: impl Iterator<Item = usize>,
    weight: impl Fn(usize) -> f64,
) -> Result<f64> {
    let n = f.arity();
    let symmetric = f.is_symmetric();
    let mut sum = 0.0;
    for s in sizes {
        let w = weight(s);
        if w == 0.0 {
            continue;
        }
        if symmetric {
            let representative = (1u64 << s) - 1;
            sum += w * binomial_f64(n as u64, s as u64) * subset_box_integral(f, representative, form)?;
        } else {
            for mask in subsets_of_size(n, s) {
                sum += w * subset_box_integral(f, mask, form)?;
            }
        }
    }
    Ok(sum)
}

/// `<f, os_k>` through subset-box integrals.
pub fn order_stat_moment_via_boxes(f: &FunctionSpec, k: usize, formula: MomentFormula) -> Result<f64> {
    let n = f.arity();
    check_k(n, k)?;
    check_enumerable(n.min(MAX_SUBSET_ARITY + 1))?;
    match formula {
        MomentFormula::MaxExpansion => {
            let whole = subset_box_integral(f, 0, SubsetBox::Lower)?;
            let s = weighted_box_sum(f, SubsetBox::Lower, k..=n, |s| {
                parity((s - k) % 2 == 1) * binomial_f64(s as u64 - 1, k as u64 - 1)
            })?;
            Ok(whole - s)
        }
        MomentFormula::MinExpansion => weighted_box_sum(f, SubsetBox::Upper, (n - k + 1)..=n, |s| {
            parity((s + k - n - 1) % 2 == 1) * binomial_f64(s as u64 - 1, (n - k) as u64)
        }),
        MomentFormula::SplitAbove => {
            let whole = subset_box_integral(f, 0, SubsetBox::Lower)?;
            Ok(whole - weighted_box_sum(f, SubsetBox::Split, k..=n, |_| 1.0)?)
        }
        MomentFormula::SplitBelow => weighted_box_sum(f, SubsetBox::Split, 0..k, |_| 1.0),
    }
}

/// `I(f, k)` assembled from subset-box integrals.
pub fn influence_via_alternative(f: &FunctionSpec, k: usize, formula: AlternativeFormula) -> Result<f64> {
    let n = f.arity();
    check_k(n, k)?;
    check_enumerable(n)?;
    let scale = (n as f64 + 1.0) * (n as f64 + 2.0);
    let sum = match formula {
        AlternativeFormula::LowerBoxes => weighted_box_sum(f, SubsetBox::Lower, (k - 1)..=n, |s| {
            parity((s + 1 - k) % 2 == 1) * binomial_f64(s as u64 + 1, k as u64)
        })?,
        AlternativeFormula::UpperBoxes => weighted_box_sum(f, SubsetBox::Upper, (n - k)..=n, |s| {
            // (-1)^{|S| - n + k - 1}, with |S| - n + k - 1 >= -1
            parity((s + k + 1 - n) % 2 == 1) * binomial_f64(s as u64 + 1, (n - k + 1) as u64)
        })?,
        AlternativeFormula::SplitBoxes => {
            weighted_box_sum(f, SubsetBox::Split, [k - 1, k].into_iter().filter(|&s| s <= n), |s| {
                if s == k - 1 {
                    1.0
                } else {
                    -1.0
                }
            })?
        }
    };
    Ok(scale * sum)
}

/// Exact version of the split-box formula for plain polynomials.
pub fn influence_via_split_boxes_exact(p: &PlainPolynomial, k: usize) -> Result<Rational> {
    let n = p.arity();
    check_k(n, k)?;
    check_enumerable(n)?;
    let mut sum = Rational::zero();
    for mask in subsets_of_size(n, k - 1) {
        sum += plain_box_integral(p, mask, SubsetBox::Split);
    }
    for mask in subsets_of_size(n, k) {
        sum -= plain_box_integral(p, mask, SubsetBox::Split);
    }
    Ok(sum * Rational::from_integer(BigInt::from((n + 1) * (n + 2))))
}

/// `Γ` at a positive integer or half-integer, exactly as `(rational, has_sqrt_pi)`.
pub fn gamma_exact(two_x: u64) -> Option<(Rational, bool)> {
    if two_x == 0 {
        return None;
    }
    if two_x % 2 == 0 {
        let m = two_x / 2;
        return Some((Rational::from_integer(crate::rational::factorial(m - 1)), false));
    }
    // Γ(m + 1/2) = (2m)! / (4^m m!) sqrt(pi)
    let m = (two_x - 1) / 2;
    let num = crate::rational::factorial(2 * m);
    let den = num_traits::pow(BigInt::from(4), m as usize) * crate::rational::factorial(m);
    Some((Rational::new(num, den), true))
}

/// Sanity value used by tests: `∫_0^1 beta_density(z; a, b) dz`.
pub fn beta_density_mass(a: f64, b: f64) -> Result<f64> {
    integrate_unit(|z| beta_density(z, a, b))
}

/// Binomial coefficient as `f64`, exposed for report formatting.
pub fn binomial_value(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn x_factor() -> UnaryFactor {
        UnaryFactor::monomial(1.0).unwrap()
    }

    #[test]
    fn product_of_two_coordinates() {
        let spec = MultiplicativeSpec::new(vec![x_factor(), x_factor()]).unwrap();
        assert!((influence_multiplicative(&spec, 1).unwrap() - 0.8).abs() < 1e-12);
        assert!((influence_multiplicative(&spec, 2).unwrap() - 0.2).abs() < 1e-12);
        let sym = MultiplicativeSpec::symmetric(x_factor(), 2).unwrap();
        assert!((influence_multiplicative(&sym, 1).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn constant_factors_have_no_influence() {
        let one = UnaryFactor::monomial(0.0).unwrap();
        let spec = MultiplicativeSpec::new(vec![one.clone(), one.clone(), one.clone()]).unwrap();
        for k in 1..=3 {
            assert!(influence_multiplicative(&spec, k).unwrap().abs() < 1e-12);
            assert!(influence_symmetric_multiplicative(&one, 3, k).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_projection_via_factors() {
        let spec = MultiplicativeSpec::new(vec![x_factor(), UnaryFactor::monomial(0.0).unwrap()]).unwrap();
        assert!((influence_multiplicative(&spec, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!((influence_multiplicative(&spec, 2).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_form_matches_enumeration() {
        for (n, k) in [(2, 1), (2, 2), (3, 2), (4, 1), (4, 4)] {
            let e = influence_multiplicative(&MultiplicativeSpec::new(vec![x_factor(); n]).unwrap(), k).unwrap();
            let s = influence_symmetric_multiplicative(&x_factor(), n, k).unwrap();
            assert!((e - s).abs() < 1e-12, "n={n} k={k}: {e} vs {s}");
        }
    }

    #[test]
    fn numeric_factor_matches_symbolic() {
        let numeric = UnaryFactor::numeric("x", |x| x);
        for k in 1..=3 {
            let a = influence_symmetric_multiplicative(&numeric, 3, k).unwrap();
            let b = influence_symmetric_multiplicative(&x_factor(), 3, k).unwrap();
            assert!((a - b).abs() < 1e-8, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_mass_branch_and_ambiguity() {
        let centered = UnaryFactor::polynomial(vec![int(1), int(-2)]);
        assert_eq!(centered.total_is_zero(), Some(true));
        // Φ = y - y², ∫Φ² = 1/30, so I(f, k) = (-1)^{3-k} 12 C(3, k) / 30 at n = 2
        let i1 = influence_symmetric_multiplicative(&centered, 2, 1).unwrap();
        let i2 = influence_symmetric_multiplicative(&centered, 2, 2).unwrap();
        assert!((i1 - 12.0 * 3.0 / 30.0).abs() < 1e-12);
        assert!((i2 + 12.0 * 3.0 / 30.0).abs() < 1e-12);
        let spec = MultiplicativeSpec::symmetric(centered.clone(), 2).unwrap();
        let spec_general = MultiplicativeSpec::new(vec![centered.clone(), centered]).unwrap();
        assert!((influence_multiplicative(&spec, 1).unwrap() - i1).abs() < 1e-12);
        assert!((influence_multiplicative(&spec_general, 2).unwrap() - i2).abs() < 1e-12);

        let ambiguous = UnaryFactor::numeric("1-2x", |x| 1.0 - 2.0 * x);
        assert!(matches!(
            influence_symmetric_multiplicative(&ambiguous, 2, 1),
            Err(Error::BranchAmbiguity(_))
        ));
        let declared = UnaryFactor::numeric_zero_mass("1-2x", |x| 1.0 - 2.0 * x);
        let v = influence_symmetric_multiplicative(&declared, 2, 1).unwrap();
        assert!((v - i1).abs() < 1e-8);
    }

    #[test]
    fn power_product_examples() {
        let p1 = influence_power_product(1.0, 2, 1).unwrap();
        let p2 = influence_power_product(1.0, 2, 2).unwrap();
        assert!((p1.value - 0.8).abs() < 1e-12);
        assert!((p2.value - 0.2).abs() < 1e-12);
        assert!((p2.ratio * p2.first - p2.value).abs() < 1e-12);
        let near = influence_power_product(-0.4999, 5, 4).unwrap();
        assert!((near.ratio - 1.0).abs() < 1e-3);
        assert!(influence_power_product(-0.5, 2, 1).is_err());
        assert!(influence_power_product(1.0, 2, 3).is_err());
        assert_eq!(influence_power_product(0.0, 3, 2).unwrap().value, 0.0);
    }

    #[test]
    fn power_product_matches_symmetric_form() {
        for &c in &[-0.3, 0.25, 0.5, 2.0] {
            let factor = UnaryFactor::monomial(c).unwrap();
            for k in 1..=3 {
                let a = influence_power_product(c, 3, k).unwrap().value;
                let b = influence_symmetric_multiplicative(&factor, 3, k).unwrap();
                assert!((a - b).abs() < 1e-10, "c={c} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn variance_closed_form() {
        let v = variance_profile(2).unwrap();
        assert_eq!(v.indices, vec![rat(-1, 5), rat(1, 5)]);
        assert_eq!(v.intercept, rat(-1, 40));
        assert!(v.gini_identity_holds);
        let v3 = variance_profile(3).unwrap();
        assert_eq!(v3.intercept, rat(-1, 27));
        for n in 2..10 {
            let v = variance_profile(n).unwrap();
            assert!(v.gini_identity_holds);
            for k in 1..=n {
                assert_eq!(v.indices[k - 1], -v.indices[n - k].clone());
            }
        }
        assert!(variance_profile(1).is_err());
    }

    #[test]
    fn beta_density_normalized() {
        for (a, b) in [(2.0, 3.0), (3.0, 2.0), (4.0, 5.0), (2.0, 7.0)] {
            assert!((beta_density_mass(a, b).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma_exact_values() {
        assert_eq!(gamma_exact(8), Some((int(6), false)));
        assert_eq!(gamma_exact(1), Some((int(1), true)));
        assert_eq!(gamma_exact(5), Some((rat(3, 4), true)));
        assert_eq!(gamma_exact(0), None);
    }

    #[test]
    fn power_series_algebra() {
        let s = PowerSeries(vec![(1.0, 1.0)]);
        let r = s.reflect(1.0);
        assert!((r.eval(0.25) - 0.75).abs() < 1e-15);
        assert!((s.mul(&r).integral() - (0.5 - 1.0 / 3.0)).abs() < 1e-15);
        assert!((s.pow(3).integral() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn monomial_domain() {
        assert!(UnaryFactor::monomial(-0.5).is_err());
        assert!(UnaryFactor::monomial(f64::NAN).is_err());
        assert!((UnaryFactor::monomial(-0.25).unwrap().square_integral().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn plain_product_conversion() {
        let spec = MultiplicativeSpec::new(vec![x_factor(), UnaryFactor::polynomial(vec![int(1), int(-2)])]).unwrap();
        let p = spec.to_plain_polynomial().unwrap();
        assert!((p.eval(&[0.3, 0.4]) - spec.eval(&[0.3, 0.4])).abs() < 1e-15);
        let frac = MultiplicativeSpec::new(vec![UnaryFactor::monomial(0.5).unwrap()]).unwrap();
        assert!(frac.to_plain_polynomial().is_none());
    }
}
