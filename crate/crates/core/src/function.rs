//! The analyzable function classes and their floating-point evaluators.

use std::fmt;
use std::sync::Arc;

use crate::closed_forms::{MultiplicativeSpec, UnaryFactor};
use crate::error::{config, domain, Result};
use crate::exact::{sorted, OrderStatPolynomial, PlainPolynomial};
use crate::lovasz::{eval_lovasz_unchecked, lovasz_slot_derivative, SetFunction};
use crate::montecarlo::{sort_indices, Evaluator, FnEvaluator};
use crate::rational::{rat, to_f64, Rational};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 8] = [
    "variance",
    "arithmetic-mean",
    "geometric-mean",
    "product",
    "min",
    "max",
    "median",
    "conjunctive-example",
];

/// A function on `[0, 1]^n` together with the structure the engines can exploit.
#[derive(Clone)]
pub enum FunctionSpec {
    /// Polynomial in the order statistics.
    OrderStat(OrderStatPolynomial),
    /// Polynomial in the plain coordinates.
    Plain(PlainPolynomial),
    /// Lovász extension of a set function.
    SetFunction(SetFunction),
    Multiplicative(MultiplicativeSpec),
    /// `(prod x_i)^exponent`.
    PowerProduct { arity: usize, exponent: f64 },
    /// `(1/n) sum x_i^2 - ((1/n) sum x_i)^2`.
    Variance { arity: usize },
    BlackBox { name: String, evaluator: Arc<dyn Evaluator> },
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::OrderStat(p) => write!(f, "OrderStat({p})"),
            FunctionSpec::Plain(p) => write!(f, "Plain({p:?})"),
            FunctionSpec::SetFunction(v) => write!(f, "SetFunction(arity {})", v.arity()),
            FunctionSpec::Multiplicative(m) => write!(f, "Multiplicative({:?})", m.factors()),
            FunctionSpec::PowerProduct { arity, exponent } => {
                write!(f, "PowerProduct(n={arity}, c={exponent})")
            }
            FunctionSpec::Variance { arity } => write!(f, "Variance(n={arity})"),
            FunctionSpec::BlackBox { name, evaluator } => {
                write!(f, "BlackBox({name}, n={})", evaluator.arity())
            }
        }
    }
}

impl FunctionSpec {
    pub fn black_box(name: impl Into<String>, evaluator: impl Evaluator + 'static) -> Self {
        FunctionSpec::BlackBox { name: name.into(), evaluator: Arc::new(evaluator) }
    }

    pub fn power_product(arity: usize, exponent: f64) -> Result<Self> {
        if arity == 0 {
            return domain("arity must be positive");
        }
        UnaryFactor::monomial(exponent)?;
        Ok(FunctionSpec::PowerProduct { arity, exponent })
    }

    pub fn variance(arity: usize) -> Result<Self> {
        if arity < 2 {
            return domain(format!("variance statistic needs n >= 2, got {arity}"));
        }
        Ok(FunctionSpec::Variance { arity })
    }

    pub fn arity(&self) -> usize {
        match self {
            FunctionSpec::OrderStat(p) => p.arity(),
            FunctionSpec::Plain(p) => p.arity(),
            FunctionSpec::SetFunction(v) => v.arity(),
            FunctionSpec::Multiplicative(m) => m.arity(),
            FunctionSpec::PowerProduct { arity, .. } | FunctionSpec::Variance { arity } => *arity,
            FunctionSpec::BlackBox { evaluator, .. } => evaluator.arity(),
        }
    }

    /// Short name of the function class.
    pub fn class_name(&self) -> &'static str {
        match self {
            FunctionSpec::OrderStat(_) => "orderstat-polynomial",
            FunctionSpec::Plain(_) => "plain-polynomial",
            FunctionSpec::SetFunction(_) => "set-function",
            FunctionSpec::Multiplicative(_) => "multiplicative",
            FunctionSpec::PowerProduct { .. } => "power-product",
            FunctionSpec::Variance { .. } => "variance",
            FunctionSpec::BlackBox { .. } => "black-box",
        }
    }

    /// Whether `f` is invariant under permutations of its arguments.
    pub fn is_symmetric(&self) -> bool {
        match self {
            FunctionSpec::OrderStat(_) | FunctionSpec::PowerProduct { .. } | FunctionSpec::Variance { .. } => true,
            FunctionSpec::SetFunction(v) => v.is_symmetric(),
            FunctionSpec::Multiplicative(m) => m.is_symmetric(),
            FunctionSpec::Plain(p) => {
                let n = p.arity();
                (0..n.saturating_sub(1)).all(|i| {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.swap(i, i + 1);
                    p.permute(&perm).map(|q| &q == p).unwrap_or(false)
                })
            }
            FunctionSpec::BlackBox { .. } => false,
        }
    }

    /// `f` as a polynomial in the plain coordinates, when it is one.
    pub fn plain_polynomial(&self) -> Option<PlainPolynomial> {
        match self {
            FunctionSpec::Plain(p) => Some(p.clone()),
            FunctionSpec::Variance { arity } => PlainPolynomial::variance(*arity).ok(),
            FunctionSpec::Multiplicative(m) => m.to_plain_polynomial(),
            FunctionSpec::PowerProduct { .. } => self.multiplicative()?.to_plain_polynomial(),
            _ => None,
        }
    }

    /// `f` as a product of unary factors, when it is one.
    pub fn multiplicative(&self) -> Option<MultiplicativeSpec> {
        match self {
            FunctionSpec::Multiplicative(m) => Some(m.clone()),
            FunctionSpec::PowerProduct { arity, exponent } => {
                MultiplicativeSpec::symmetric(UnaryFactor::monomial(*exponent).ok()?, *arity).ok()
            }
            _ => None,
        }
    }

    /// An order-statistic polynomial with the same influence profile and mean as `f`.
    ///
    /// For plain polynomials this is `Sym(f)`; the squared norm is generally different.
    pub fn symmetric_order_stat_form(&self) -> Option<OrderStatPolynomial> {
        match self {
            FunctionSpec::OrderStat(p) => Some(p.clone()),
            FunctionSpec::SetFunction(v) => Some(crate::lovasz::symmetrized_order_stat_expansion(v)),
            _ => self.plain_polynomial().map(|p| crate::exact::symmetrize(&p)),
        }
    }

    /// Floating-point evaluator, with the directional derivative map when one is known.
    pub fn evaluator(&self) -> Arc<dyn Evaluator> {
        let n = self.arity();
        match self {
            FunctionSpec::OrderStat(p) => Arc::new(CompiledOrderStat::new(p)),
            FunctionSpec::Plain(p) => Arc::new(CompiledPlain::new(p)),
            FunctionSpec::Variance { arity } => {
                Arc::new(CompiledPlain::new(&PlainPolynomial::variance(*arity).expect("arity >= 2")))
            }
            FunctionSpec::SetFunction(v) => {
                let value = v.clone();
                let derivative = v.clone();
                Arc::new(
                    FnEvaluator::new(n, move |x| eval_lovasz_unchecked(&value, x))
                        .with_slot_derivative(move |x, k| lovasz_slot_derivative(&derivative, x, k)),
                )
            }
            FunctionSpec::Multiplicative(m) => multiplicative_evaluator(m.clone()),
            FunctionSpec::PowerProduct { exponent, .. } => {
                let c = *exponent;
                Arc::new(
                    FnEvaluator::new(n, move |x| x.iter().product::<f64>().powf(c)).with_slot_derivative(
                        move |x, k| {
                            let mut order = Vec::with_capacity(x.len());
                            sort_indices(x, &mut order);
                            let i = order[k - 1];
                            let rest: f64 = x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product();
                            c * x[i].powf(c - 1.0) * rest.powf(c)
                        },
                    ),
                )
            }
            FunctionSpec::BlackBox { evaluator, .. } => evaluator.clone(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return domain(format!("point of dimension {} for arity {}", x.len(), self.arity()));
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return domain(format!("coordinate {bad} outside [0, 1]"));
        }
        Ok(self.evaluator().eval(x))
    }
}

fn multiplicative_evaluator(m: MultiplicativeSpec) -> Arc<dyn Evaluator> {
    let n = m.arity();
    let has_derivative = m.factors().iter().all(|f| f.derivative(0.5).is_some());
    let value = m.clone();
    let eval = FnEvaluator::new(n, move |x| value.eval(x));
    if !has_derivative {
        return Arc::new(eval);
    }
    Arc::new(eval.with_slot_derivative(move |x, k| {
        let mut order = Vec::with_capacity(x.len());
        sort_indices(x, &mut order);
        let i = order[k - 1];
        m.factors()
            .iter()
            .enumerate()
            .map(|(j, f)| if j == i { f.derivative(x[j]).unwrap_or(f64::NAN) } else { f.phi(x[j]) })
            .product()
    }))
}

/// Order-statistic polynomial with coefficients converted once.
struct CompiledOrderStat {
    arity: usize,
    terms: Vec<(Vec<(usize, i32)>, f64)>,
    derivatives: Vec<Vec<(Vec<(usize, i32)>, f64)>>,
}

fn compile_order_stat(p: &OrderStatPolynomial) -> Vec<(Vec<(usize, i32)>, f64)> {
    p.terms()
        .map(|(e, c)| (e.iter().map(|&(k, c)| (k, c as i32)).collect(), to_f64(c)))
        .collect()
}

fn eval_compiled(terms: &[(Vec<(usize, i32)>, f64)], sorted: &[f64]) -> f64 {
    terms
        .iter()
        .map(|(e, c)| c * e.iter().map(|&(k, p)| sorted[k - 1].powi(p)).product::<f64>())
        .sum()
}

impl CompiledOrderStat {
    fn new(p: &OrderStatPolynomial) -> Self {
        let n = p.arity();
        CompiledOrderStat {
            arity: n,
            terms: compile_order_stat(p),
            derivatives: (1..=n).map(|k| compile_order_stat(&p.slot_derivative(k))).collect(),
        }
    }
}

impl Evaluator for CompiledOrderStat {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> f64 {
        eval_compiled(&self.terms, &sorted(x))
    }

    fn slot_derivative(&self, x: &[f64], k: usize) -> Option<f64> {
        Some(eval_compiled(&self.derivatives[k - 1], &sorted(x)))
    }

    fn has_slot_derivative(&self) -> bool {
        true
    }
}

/// Plain polynomial with coefficients converted once.
struct CompiledPlain {
    arity: usize,
    terms: Vec<(Vec<i32>, f64)>,
    partials: Vec<Vec<(Vec<i32>, f64)>>,
}

fn compile_plain(p: &PlainPolynomial) -> Vec<(Vec<i32>, f64)> {
    p.terms().map(|(e, c)| (e.iter().map(|&v| v as i32).collect(), to_f64(c))).collect()
}

fn eval_plain(terms: &[(Vec<i32>, f64)], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|(e, c)| c * e.iter().zip(x).map(|(&p, &v)| v.powi(p)).product::<f64>())
        .sum()
}

impl CompiledPlain {
    fn new(p: &PlainPolynomial) -> Self {
        CompiledPlain {
            arity: p.arity(),
            terms: compile_plain(p),
            partials: (0..p.arity()).map(|i| compile_plain(&p.partial(i))).collect(),
        }
    }
}

impl Evaluator for CompiledPlain {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> f64 {
        eval_plain(&self.terms, x)
    }

    fn slot_derivative(&self, x: &[f64], k: usize) -> Option<f64> {
        let mut order = Vec::with_capacity(x.len());
        sort_indices(x, &mut order);
        Some(eval_plain(&self.partials[order[k - 1]], x))
    }

    fn has_slot_derivative(&self) -> bool {
        true
    }
}

/// The two-variable conjunctive aggregation function that vanishes when both
/// coordinates are below 3/4 and equals `min(x_1, x_2, 1/4)` otherwise.
pub fn conjunctive_example() -> FunctionSpec {
    FunctionSpec::black_box(
        "conjunctive-example",
        FnEvaluator::new(2, |x| {
            if x[0].max(x[1]) < 0.75 {
                0.0
            } else {
                x[0].min(x[1]).min(0.25)
            }
        }),
    )
}

/// `f(x_1, x_2) = f1(x_1)` when `x_1 > x_2` and `f2(x_2)` otherwise; the smallest
/// variable never moves the value.
pub fn ineffective_example(
    f1: impl Fn(f64) -> f64 + Send + Sync + 'static,
    f2: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> FunctionSpec {
    FunctionSpec::black_box(
        "ineffective-smallest",
        FnEvaluator::new(2, move |x| if x[0] > x[1] { f1(x[0]) } else { f2(x[1]) }),
    )
}

/// Named functions of arity `n`.
pub fn builtin(name: &str, n: usize) -> Result<FunctionSpec> {
    if n == 0 {
        return domain("arity must be positive");
    }
    let os = |k: usize| OrderStatPolynomial::order_stat(n, k);
    match name {
        "variance" => FunctionSpec::variance(n),
        "arithmetic-mean" => Ok(FunctionSpec::SetFunction(SetFunction::additive(n)?)),
        "geometric-mean" => FunctionSpec::power_product(n, 1.0 / n as f64),
        "product" => FunctionSpec::power_product(n, 1.0),
        "min" => Ok(FunctionSpec::OrderStat(os(1)?)),
        "max" => Ok(FunctionSpec::OrderStat(os(n)?)),
        "median" => {
            if n % 2 == 1 {
                Ok(FunctionSpec::OrderStat(os(n.div_ceil(2))?))
            } else {
                let half = rat(1, 2);
                let p = &os(n / 2)? + &os(n / 2 + 1)?;
                Ok(FunctionSpec::OrderStat(p.scale(&half)))
            }
        }
        // versioned aliases such as `conjunctive-example-<tag>` name the same function
        _ if name == "conjunctive-example" || name.starts_with("conjunctive-example-") => {
            if n != 2 {
                return domain(format!("conjunctive-example is binary, got n = {n}"));
            }
            Ok(conjunctive_example())
        }
        other => config(format!("unknown builtin {other:?}; expected one of {BUILTIN_NAMES:?}")),
    }
}

/// `c + sum_k slopes[k-1] x_(k)` as a function spec.
pub fn shifted_l_statistic(constant: Rational, slopes: &[Rational]) -> Result<FunctionSpec> {
    Ok(FunctionSpec::OrderStat(OrderStatPolynomial::linear(slopes.len(), constant, slopes)?))
}

/// `x_i` in arity `n`, `i` 1-based.
pub fn coordinate(n: usize, i: usize) -> Result<FunctionSpec> {
    Ok(FunctionSpec::Plain(PlainPolynomial::coordinate(n, i)?))
}

/// The constant function.
pub fn constant(n: usize, value: Rational) -> Result<FunctionSpec> {
    if n == 0 {
        return domain("arity must be positive");
    }
    Ok(FunctionSpec::OrderStat(OrderStatPolynomial::constant(n, value)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_evaluate() {
        let x = [0.2, 0.9, 0.5];
        assert!((builtin("min", 3).unwrap().eval(&x).unwrap() - 0.2).abs() < 1e-15);
        assert!((builtin("max", 3).unwrap().eval(&x).unwrap() - 0.9).abs() < 1e-15);
        assert!((builtin("median", 3).unwrap().eval(&x).unwrap() - 0.5).abs() < 1e-15);
        assert!((builtin("median", 4).unwrap().eval(&[0.1, 0.4, 0.2, 0.8]).unwrap() - 0.3).abs() < 1e-15);
        assert!((builtin("arithmetic-mean", 3).unwrap().eval(&x).unwrap() - 1.6 / 3.0).abs() < 1e-15);
        assert!((builtin("product", 3).unwrap().eval(&x).unwrap() - 0.09).abs() < 1e-15);
        let g = builtin("geometric-mean", 3).unwrap().eval(&x).unwrap();
        assert!((g - 0.09f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let v = builtin("variance", 3).unwrap().eval(&x).unwrap();
        let mean = 1.6 / 3.0;
        let expect = x.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / 3.0;
        assert!((v - expect).abs() < 1e-15);
        assert!(builtin("conjunctive-example", 3).is_err());
        assert!(builtin("nope", 3).is_err());
    }

    #[test]
    fn conjunctive_values() {
        let f = conjunctive_example();
        assert_eq!(f.eval(&[0.5, 0.7]).unwrap(), 0.0);
        assert_eq!(f.eval(&[0.1, 0.8]).unwrap(), 0.1);
        assert_eq!(f.eval(&[0.5, 0.8]).unwrap(), 0.25);
    }

    #[test]
    fn symmetry_detection() {
        assert!(builtin("variance", 3).unwrap().is_symmetric());
        assert!(!coordinate(3, 1).unwrap().is_symmetric());
        let sym = FunctionSpec::Plain(PlainPolynomial::variance(3).unwrap());
        assert!(sym.is_symmetric());
        assert!(!conjunctive_example().is_symmetric());
    }

    #[test]
    fn derivative_maps() {
        // D_(1) of x_(1) x_(2) is x_(2)
        let p = &OrderStatPolynomial::order_stat(2, 1).unwrap() * &OrderStatPolynomial::order_stat(2, 2).unwrap();
        let e = FunctionSpec::OrderStat(p).evaluator();
        assert!((e.slot_derivative(&[0.7, 0.2], 1).unwrap() - 0.7).abs() < 1e-15);
        let plain = coordinate(2, 1).unwrap().evaluator();
        assert_eq!(plain.slot_derivative(&[0.7, 0.2], 2), Some(1.0));
        assert_eq!(plain.slot_derivative(&[0.7, 0.2], 1), Some(0.0));
        let pp = FunctionSpec::power_product(2, 2.0).unwrap().evaluator();
        assert!((pp.slot_derivative(&[0.5, 0.25], 1).unwrap() - 2.0 * 0.25 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn point_validation() {
        assert!(builtin("min", 2).unwrap().eval(&[0.1]).is_err());
        assert!(builtin("min", 2).unwrap().eval(&[0.1, 1.5]).is_err());
    }
}
