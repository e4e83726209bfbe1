//! JSON function description files (spec files).
//!
//! One document declares one function:
//!
//! ```json
//! {"kind": "set-function", "arity": 2, "values": ["0", "1/2", "1/2", "1"]}
//! ```
//!
//! Set-function values are listed in bitmask order, bit `i-1` standing for element `i`.
//! Rationals may be written as JSON numbers or as strings such as `"3/4"` or `"0.25"`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closed_forms::{MultiplicativeSpec, UnaryFactor};
use crate::error::{Error, Result};
use crate::exact::{OrderStatMonomial, OrderStatPolynomial, PlainPolynomial};
use crate::function::{builtin, FunctionSpec};
use crate::lovasz::SetFunction;
use crate::rational::{parse_rational, to_f64, Rational};

/// A rational written either as a JSON number or as a string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Number(f64),
    Text(String),
}

impl RationalText {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            // shortest round-trip decimal, so 0.1 reads as 1/10
            RationalText::Number(v) if v.is_finite() => parse_rational(&format!("{v}")),
            RationalText::Number(v) => Err(Error::Domain(format!("non-finite number {v}"))),
            RationalText::Text(s) => parse_rational(s),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            RationalText::Number(v) => Ok(*v),
            RationalText::Text(s) => parse_rational(s).map(|r| to_f64(&r)),
        }
    }
}

impl fmt::Display for RationalText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalText::Number(v) => write!(f, "{v}"),
            RationalText::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderStatTerm {
    pub coefficient: RationalText,
    /// Slot `k` (1-based, written as a string key) to exponent.
    pub exponents: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlainTerm {
    pub coefficient: RationalText,
    /// One exponent per coordinate.
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FactorSpec {
    /// `x^exponent`.
    Monomial { exponent: RationalText },
    /// `sum_j coefficients[j] x^j`.
    Polynomial { coefficients: Vec<RationalText> },
}

impl FactorSpec {
    fn build(&self) -> Result<UnaryFactor> {
        match self {
            FactorSpec::Monomial { exponent } => UnaryFactor::monomial(exponent.to_f64()?),
            FactorSpec::Polynomial { coefficients } => Ok(UnaryFactor::polynomial(
                coefficients.iter().map(RationalText::to_rational).collect::<Result<_>>()?,
            )),
        }
    }
}

/// The document format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpecFile {
    OrderstatPolynomial {
        arity: usize,
        #[serde(default)]
        constant: Option<RationalText>,
        terms: Vec<OrderStatTerm>,
    },
    PlainPolynomial {
        arity: usize,
        #[serde(default)]
        constant: Option<RationalText>,
        terms: Vec<PlainTerm>,
    },
    SetFunction {
        arity: usize,
        values: Vec<RationalText>,
    },
    Multiplicative {
        arity: usize,
        /// One factor per coordinate.
        #[serde(default)]
        factors: Option<Vec<FactorSpec>>,
        /// A single factor used in every coordinate.
        #[serde(default)]
        factor: Option<FactorSpec>,
    },
    PowerProduct {
        arity: usize,
        exponent: RationalText,
    },
    Builtin {
        arity: usize,
        name: String,
    },
}

fn invalid<T>(location: &str, msg: impl fmt::Display) -> Result<T> {
    Err(Error::Domain(format!("{location}: {msg}")))
}

fn located<T>(location: String, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Domain(format!("{location}: {e}")))
}

impl FunctionSpecFile {
    pub fn arity(&self) -> usize {
        match self {
            FunctionSpecFile::OrderstatPolynomial { arity, .. }
            | FunctionSpecFile::PlainPolynomial { arity, .. }
            | FunctionSpecFile::SetFunction { arity, .. }
            | FunctionSpecFile::Multiplicative { arity, .. }
            | FunctionSpecFile::PowerProduct { arity, .. }
            | FunctionSpecFile::Builtin { arity, .. } => *arity,
        }
    }

    /// Parses a document; errors carry the line and column or the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("invalid spec: {e}")))
    }

    /// Validates shapes against the arity and builds the function.
    pub fn build(&self) -> Result<FunctionSpec> {
        let n = self.arity();
        if n == 0 {
            return invalid("arity", "must be positive");
        }
        match self {
            FunctionSpecFile::OrderstatPolynomial { constant, terms, .. } => {
                let mut monomials = Vec::with_capacity(terms.len() + 1);
                if let Some(c) = constant {
                    let c = located("constant".into(), c.to_rational())?;
                    monomials.push(OrderStatMonomial::new(n, Vec::new(), c)?);
                }
                for (i, t) in terms.iter().enumerate() {
                    let c = located(format!("terms[{i}].coefficient"), t.coefficient.to_rational())?;
                    let mut exps = Vec::with_capacity(t.exponents.len());
                    for (key, &e) in &t.exponents {
                        match key.trim().parse::<usize>() {
                            Ok(k) => exps.push((k, e)),
                            Err(_) => return invalid(&format!("terms[{i}].exponents"), format!("slot `{key}` is not an integer")),
                        }
                    }
                    monomials.push(located(format!("terms[{i}].exponents"), OrderStatMonomial::new(n, exps, c))?);
                }
                Ok(FunctionSpec::OrderStat(OrderStatPolynomial::from_monomials(n, monomials)?))
            }
            FunctionSpecFile::PlainPolynomial { constant, terms, .. } => {
                let mut list = Vec::with_capacity(terms.len() + 1);
                if let Some(c) = constant {
                    list.push((vec![0; n], located("constant".into(), c.to_rational())?));
                }
                for (i, t) in terms.iter().enumerate() {
                    if t.exponents.len() != n {
                        return invalid(
                            &format!("terms[{i}].exponents"),
                            format!("expected {n} exponents, got {}", t.exponents.len()),
                        );
                    }
                    let c = located(format!("terms[{i}].coefficient"), t.coefficient.to_rational())?;
                    list.push((t.exponents.clone(), c));
                }
                Ok(FunctionSpec::Plain(PlainPolynomial::new(n, list)?))
            }
            FunctionSpecFile::SetFunction { values, .. } => {
                if n > crate::lovasz::MAX_SET_ARITY {
                    return invalid("arity", format!("set functions are limited to arity {}", crate::lovasz::MAX_SET_ARITY));
                }
                let expected = 1usize << n;
                if values.len() != expected {
                    return invalid("values", format!("expected {expected} entries for arity {n}, got {}", values.len()));
                }
                let v = values
                    .iter()
                    .enumerate()
                    .map(|(i, t)| located(format!("values[{i}]"), t.to_rational()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FunctionSpec::SetFunction(SetFunction::new(n, v)?))
            }
            FunctionSpecFile::Multiplicative { factors, factor, .. } => match (factors, factor) {
                (Some(list), None) => {
                    if list.len() != n {
                        return invalid("factors", format!("expected {n} factors, got {}", list.len()));
                    }
                    let built = list
                        .iter()
                        .enumerate()
                        .map(|(i, f)| located(format!("factors[{i}]"), f.build()))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(FunctionSpec::Multiplicative(MultiplicativeSpec::new(built)?))
                }
                (None, Some(f)) => Ok(FunctionSpec::Multiplicative(MultiplicativeSpec::symmetric(
                    located("factor".into(), f.build())?,
                    n,
                )?)),
                _ => invalid("factors", "give exactly one of `factors` (per coordinate) or `factor` (shared)"),
            },
            FunctionSpecFile::PowerProduct { exponent, .. } => {
                located("exponent".into(), FunctionSpec::power_product(n, exponent.to_f64()?))
            }
            FunctionSpecFile::Builtin { name, .. } => located("name".into(), builtin(name, n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let docs = [
            r#"{"kind":"orderstat-polynomial","arity":2,"constant":"1/2","terms":[{"coefficient":1,"exponents":{"1":1,"2":1}}]}"#,
            r#"{"kind":"plain-polynomial","arity":2,"terms":[{"coefficient":"3/4","exponents":[2,0]}]}"#,
            r#"{"kind":"set-function","arity":2,"values":[0,"1/2",0.5,1]}"#,
            r#"{"kind":"multiplicative","arity":2,"factors":[{"type":"monomial","exponent":"1/2"},{"type":"polynomial","coefficients":[1,-2]}]}"#,
            r#"{"kind":"multiplicative","arity":3,"factor":{"type":"monomial","exponent":2}}"#,
            r#"{"kind":"power-product","arity":3,"exponent":"1/3"}"#,
            r#"{"kind":"builtin","arity":2,"name":"conjunctive-example"}"#,
        ];
        for d in docs {
            let spec = FunctionSpecFile::parse(d).unwrap();
            let f = spec.build().unwrap();
            assert_eq!(f.arity(), spec.arity());
        }
    }

    #[test]
    fn decimal_numbers_are_exact() {
        assert_eq!(RationalText::Number(0.1).to_rational().unwrap(), crate::rational::rat(1, 10));
    }

    #[test]
    fn shape_errors_name_the_field() {
        let bad = FunctionSpecFile::parse(r#"{"kind":"set-function","arity":2,"values":[0,1,1]}"#).unwrap();
        let msg = bad.build().unwrap_err().to_string();
        assert!(msg.contains("values"), "{msg}");
        let bad = FunctionSpecFile::parse(r#"{"kind":"plain-polynomial","arity":2,"terms":[{"coefficient":1,"exponents":[1]}]}"#)
            .unwrap();
        assert!(bad.build().unwrap_err().to_string().contains("terms[0].exponents"));
        let err = FunctionSpecFile::parse(r#"{"kind":"set-function","arity":2,"valuez":[]}"#).unwrap_err();
        assert!(err.to_string().contains("valuez"));
        let err = FunctionSpecFile::parse("{\"kind\":\n  \"set-function\",,}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let bad = FunctionSpecFile::parse(r#"{"kind":"orderstat-polynomial","arity":2,"terms":[{"coefficient":1,"exponents":{"3":1}}]}"#)
            .unwrap();
        assert!(bad.build().is_err());
        let bad = FunctionSpecFile::parse(r#"{"kind":"power-product","arity":2,"exponent":-0.5}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
