//! Exact rational kernel: order statistics, polynomials in order statistics and
//! their integrals over the unit cube, symmetrization, dualization and the
//! subset order-statistic expansions.
//!
//! Order-statistic slots are 1-based: slot `k` is the k-th smallest coordinate.
//! Slot `0` is the constant `0` and slot `n + 1` is the constant `1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{domain, Result};
use crate::rational::{binomial, factorial_ratio, format_rational, sign, to_f64, Rational};

/// Largest ground set handled by subset enumerations.
pub const MAX_SUBSET_ARITY: usize = 24;

/// Exponent map of a monomial: `(slot, exponent)` pairs, slots strictly ascending, exponents `>= 1`.
pub type SlotExponents = Vec<(usize, u32)>;

/// `k`-th smallest coordinate of `x`, with `os_0 = 0` and `os_{n+1} = 1`.
pub fn eval_order_stat(x: &[f64], k: usize) -> Result<f64> {
    let n = x.len();
    if k > n + 1 {
        return domain(format!("order statistic index {k} outside [0, {}]", n + 1));
    }
    if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return domain(format!("coordinate {bad} outside [0, 1]"));
    }
    Ok(match k {
        0 => 0.0,
        k if k == n + 1 => 1.0,
        k => sorted(x)[k - 1],
    })
}

pub(crate) fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Value of slot `k` on an ascending vector, honoring the boundary conventions.
#[inline]
pub(crate) fn slot(sorted: &[f64], k: usize) -> f64 {
    if k == 0 {
        0.0
    } else if k > sorted.len() {
        1.0
    } else {
        sorted[k - 1]
    }
}

/// `c * prod_j x_(k_j)^(c_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderStatMonomial {
    arity: usize,
    exponents: SlotExponents,
    coefficient: Rational,
}

impl OrderStatMonomial {
    /// Builds a monomial; repeated slots are merged and zero exponents dropped.
    pub fn new(
        arity: usize,
        exponents: impl IntoIterator<Item = (usize, u32)>,
        coefficient: Rational,
    ) -> Result<Self> {
        if arity == 0 {
            return domain("arity must be positive");
        }
        let mut map = BTreeMap::new();
        for (k, c) in exponents {
            if k == 0 || k > arity {
                return domain(format!("slot {k} outside [1, {arity}]"));
            }
            *map.entry(k).or_insert(0u32) += c;
        }
        let exponents = map.into_iter().filter(|&(_, c)| c > 0).collect();
        Ok(OrderStatMonomial { arity, exponents, coefficient })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn exponents(&self) -> &[(usize, u32)] {
        &self.exponents
    }

    pub fn coefficient(&self) -> &Rational {
        &self.coefficient
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().map(|&(_, c)| c).sum()
    }

    pub fn eval_sorted(&self, sorted: &[f64]) -> f64 {
        to_f64(&self.coefficient) * eval_exponents(&self.exponents, sorted)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_sorted(&sorted(x))
    }
}

fn eval_exponents(exponents: &[(usize, u32)], sorted: &[f64]) -> f64 {
    exponents
        .iter()
        .map(|&(k, c)| sorted[k - 1].powi(c as i32))
        .product()
}

/// Integral over the unit cube of a monomial in order statistics, exactly.
///
/// For slots `k_1 < ... < k_m` with exponents `c_j` and partial sums `C_j`:
/// `n!/(n + C_m)! * prod_j (k_j - 1 + C_j)! / (k_j - 1 + C_{j-1})!`.
pub fn moment(n: usize, monomial: &OrderStatMonomial) -> Result<Rational> {
    if monomial.arity != n {
        return domain(format!(
            "monomial arity {} does not match {n}",
            monomial.arity
        ));
    }
    Ok(&monomial.coefficient * raw_moment(n, &monomial.exponents))
}

fn raw_moment(n: usize, exponents: &[(usize, u32)]) -> Rational {
    let mut cumulative = 0u64;
    let mut numer = BigInt::one();
    for &(k, c) in exponents {
        let base = k as u64 - 1 + cumulative;
        cumulative += c as u64;
        numer *= factorial_ratio(base + c as u64, base);
    }
    let denom = factorial_ratio(n as u64 + cumulative, n as u64);
    Rational::new(numer, denom)
}

/// Polynomial in the order statistics `x_(1), ..., x_(n)` with exact coefficients.
///
/// Terms are kept in a canonical map keyed by exponent maps; the empty key is
/// the constant term. Zero coefficients are never stored, so structural
/// equality is equality of functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderStatPolynomial {
    arity: usize,
    terms: BTreeMap<SlotExponents, Rational>,
}

impl OrderStatPolynomial {
    pub fn zero(arity: usize) -> Self {
        OrderStatPolynomial { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, value: Rational) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(Vec::new(), value);
        p
    }

    /// `os_k` for `k` in `[0, n + 1]`.
    pub fn order_stat(arity: usize, k: usize) -> Result<Self> {
        if arity == 0 {
            return domain("arity must be positive");
        }
        match k {
            0 => Ok(Self::zero(arity)),
            k if k == arity + 1 => Ok(Self::constant(arity, Rational::one())),
            k if k <= arity => {
                let mut p = Self::zero(arity);
                p.add_term(vec![(k, 1)], Rational::one());
                Ok(p)
            }
            k => domain(format!("order statistic index {k} outside [0, {}]", arity + 1)),
        }
    }

    /// Linear combination `constant + sum_k slopes[k-1] * os_k`.
    pub fn linear(arity: usize, constant: Rational, slopes: &[Rational]) -> Result<Self> {
        if slopes.len() != arity {
            return domain(format!("expected {arity} slopes, got {}", slopes.len()));
        }
        let mut p = Self::constant(arity, constant);
        for (k, a) in slopes.iter().enumerate() {
            p.add_term(vec![(k + 1, 1)], a.clone());
        }
        Ok(p)
    }

    pub fn from_monomials(arity: usize, monomials: impl IntoIterator<Item = OrderStatMonomial>) -> Result<Self> {
        let mut p = Self::zero(arity);
        for m in monomials {
            if m.arity != arity {
                return domain(format!("monomial arity {} does not match {arity}", m.arity));
            }
            p.add_term(m.exponents, m.coefficient);
        }
        Ok(p)
    }

    fn add_term(&mut self, key: SlotExponents, coefficient: Rational) {
        if coefficient.is_zero() {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coefficient);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coefficient;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[(usize, u32)], &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn monomials(&self) -> Vec<OrderStatMonomial> {
        self.terms
            .iter()
            .map(|(k, v)| OrderStatMonomial { arity: self.arity, exponents: k.clone(), coefficient: v.clone() })
            .collect()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().map(|&(_, c)| c).sum())
            .max()
            .unwrap_or(0)
    }

    /// Coefficient of `os_k` when the polynomial is a shifted L-statistic.
    pub fn linear_coefficient(&self, k: usize) -> Rational {
        self.terms.get(&vec![(k, 1)]).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero(self.arity);
        }
        OrderStatPolynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
        }
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut acc = Self::constant(self.arity, Rational::one());
        for _ in 0..exponent {
            acc = &acc * self;
        }
        acc
    }

    fn check_arity(&self, other: &Self) -> Result<()> {
        if self.arity != other.arity {
            return domain(format!("arity mismatch: {} vs {}", self.arity, other.arity));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        Ok(self * other)
    }

    /// Value at an ascending-sorted point.
    pub fn eval_sorted(&self, sorted: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| to_f64(v) * eval_exponents(k, sorted))
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_sorted(&sorted(x))
    }

    /// Partial derivative with respect to the slot variable `x_(k)`.
    ///
    /// On each open simplex this is the derivative of the function in the
    /// direction of its k-th smallest variable.
    pub fn slot_derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.arity);
        for (key, coeff) in &self.terms {
            if let Some(pos) = key.iter().position(|&(s, _)| s == k) {
                let c = key[pos].1;
                let mut next = key.clone();
                if c == 1 {
                    next.remove(pos);
                } else {
                    next[pos].1 = c - 1;
                }
                out.add_term(next, coeff * Rational::from_integer(BigInt::from(c)));
            }
        }
        out
    }

    /// Exact integral over the unit cube.
    pub fn integral(&self) -> Rational {
        self.terms
            .iter()
            .map(|(k, v)| v * raw_moment(self.arity, k))
            .fold(Rational::zero(), |a, b| a + b)
    }
}

impl Add for &OrderStatPolynomial {
    type Output = OrderStatPolynomial;

    fn add(self, rhs: &OrderStatPolynomial) -> OrderStatPolynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }
}

impl Sub for &OrderStatPolynomial {
    type Output = OrderStatPolynomial;

    fn sub(self, rhs: &OrderStatPolynomial) -> OrderStatPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &OrderStatPolynomial {
    type Output = OrderStatPolynomial;

    fn neg(self) -> OrderStatPolynomial {
        OrderStatPolynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

impl Mul for &OrderStatPolynomial {
    type Output = OrderStatPolynomial;

    fn mul(self, rhs: &OrderStatPolynomial) -> OrderStatPolynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = OrderStatPolynomial::zero(self.arity);
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                out.add_term(merge_exponents(ka, kb), va * vb);
            }
        }
        out
    }
}

fn merge_exponents(a: &[(usize, u32)], b: &[(usize, u32)]) -> SlotExponents {
    let mut map: BTreeMap<usize, u32> = a.iter().copied().collect();
    for &(k, c) in b {
        *map.entry(k).or_insert(0) += c;
    }
    map.into_iter().collect()
}

impl fmt::Display for OrderStatPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (key, coeff)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_rational(coeff))?;
            for &(k, c) in key {
                if c == 1 {
                    write!(f, "*x({k})")?;
                } else {
                    write!(f, "*x({k})^{c}")?;
                }
            }
        }
        Ok(())
    }
}

/// Exact `<f, g>` over the unit cube.
pub fn inner_product_exact(f: &OrderStatPolynomial, g: &OrderStatPolynomial) -> Result<Rational> {
    Ok(f.try_mul(g)?.integral())
}

/// Polynomial in the plain coordinates `x_1, ..., x_n`.
///
/// Keys are full exponent vectors of length `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainPolynomial {
    arity: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl PlainPolynomial {
    pub fn zero(arity: usize) -> Self {
        PlainPolynomial { arity, terms: BTreeMap::new() }
    }

    pub fn new(arity: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Result<Self> {
        if arity == 0 {
            return domain("arity must be positive");
        }
        let mut p = Self::zero(arity);
        for (exps, c) in terms {
            if exps.len() != arity {
                return domain(format!(
                    "exponent vector of length {} for arity {arity}",
                    exps.len()
                ));
            }
            p.add_term(exps, c);
        }
        Ok(p)
    }

    /// The coordinate projection `x_i` (1-based).
    pub fn coordinate(arity: usize, i: usize) -> Result<Self> {
        if i == 0 || i > arity {
            return domain(format!("coordinate {i} outside [1, {arity}]"));
        }
        let mut e = vec![0; arity];
        e[i - 1] = 1;
        Self::new(arity, [(e, Rational::one())])
    }

    /// `(1/n) sum x_i^2 - ((1/n) sum x_i)^2`.
    pub fn variance(arity: usize) -> Result<Self> {
        if arity == 0 {
            return domain("arity must be positive");
        }
        let n = Rational::from_integer(BigInt::from(arity));
        let mut terms = Vec::new();
        for i in 0..arity {
            let mut e = vec![0; arity];
            e[i] = 2;
            terms.push((e, Rational::one() / &n - Rational::one() / (&n * &n)));
            for j in i + 1..arity {
                let mut e = vec![0; arity];
                e[i] = 1;
                e[j] = 1;
                terms.push((e, -Rational::from_integer(BigInt::from(2)) / (&n * &n)));
            }
        }
        Self::new(arity, terms)
    }

    fn add_term(&mut self, key: Vec<u32>, coefficient: Rational) {
        if coefficient.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(Rational::zero);
        *slot += coefficient;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        let mut out = Self::zero(self.arity);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * factor);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return domain("arity mismatch");
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return domain("arity mismatch");
        }
        let mut out = Self::zero(self.arity);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let key = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.add_term(key, va * vb);
            }
        }
        Ok(out)
    }

    /// `pi(f)(x) = f(x_pi(1), ..., x_pi(n))` for a 0-based permutation `perm`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.arity {
            return domain("permutation length mismatch");
        }
        let mut seen = vec![false; self.arity];
        for &p in perm {
            if p >= self.arity || seen[p] {
                return domain("not a permutation");
            }
            seen[p] = true;
        }
        // x_{perm[i]} carries the exponent of position i.
        let mut out = Self::zero(self.arity);
        for (k, v) in &self.terms {
            let mut key = vec![0; self.arity];
            for (i, &e) in k.iter().enumerate() {
                key[perm[i]] += e;
            }
            out.add_term(key, v.clone());
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| {
                to_f64(v) * k.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>()
            })
            .sum()
    }

    /// Partial derivative with respect to coordinate `i` (0-based).
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.arity);
        for (k, v) in &self.terms {
            if k[i] > 0 {
                let mut key = k.clone();
                key[i] -= 1;
                out.add_term(key, v * Rational::from_integer(BigInt::from(k[i])));
            }
        }
        out
    }

    /// Exact integral over the unit cube.
    pub fn integral(&self) -> Rational {
        self.terms
            .iter()
            .map(|(k, v)| {
                let denom = k.iter().fold(BigInt::one(), |acc, &e| acc * (e as u64 + 1));
                v / Rational::from_integer(denom)
            })
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// `Sym(f)` expressed in order statistics.
///
/// Each plain monomial is spread uniformly over the distinct arrangements of
/// its exponent multiset across the slots `1..=n`.
pub fn symmetrize(f: &PlainPolynomial) -> OrderStatPolynomial {
    let n = f.arity;
    let mut out = OrderStatPolynomial::zero(n);
    for (exps, coeff) in &f.terms {
        let mut arrangement = exps.clone();
        arrangement.sort_unstable();
        let mut arrangements = Vec::new();
        loop {
            arrangements.push(arrangement.clone());
            if !next_permutation(&mut arrangement) {
                break;
            }
        }
        let weight = coeff / Rational::from_integer(BigInt::from(arrangements.len()));
        for a in arrangements {
            let key = a
                .iter()
                .enumerate()
                .filter(|&(_, &e)| e > 0)
                .map(|(i, &e)| (i + 1, e))
                .collect();
            out.add_term(key, weight.clone());
        }
    }
    out
}

/// Advances to the next lexicographic permutation; `false` once the last one is reached.
pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `f^d(x) = 1 - f(1 - x)` in canonical order-statistic form.
pub fn dualize(f: &OrderStatPolynomial) -> OrderStatPolynomial {
    let n = f.arity;
    let one = OrderStatPolynomial::constant(n, Rational::one());
    let mut reflected = OrderStatPolynomial::zero(n);
    for (key, coeff) in &f.terms {
        let mut term = OrderStatPolynomial::constant(n, coeff.clone());
        for &(k, c) in key {
            // os_k(1 - x) = 1 - os_{n-k+1}(x)
            let mirrored = OrderStatPolynomial::order_stat(n, n - k + 1).expect("slot in range");
            term = &term * &(&one - &mirrored).pow(c);
        }
        reflected = &reflected + &term;
    }
    &one - &reflected
}

/// Element of a signed combination of subset order statistics: `coefficient * x_{rank:S}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetTerm {
    /// Bit `i - 1` set iff element `i` belongs to the subset.
    pub subset: u64,
    pub rank: usize,
    pub coefficient: Rational,
}

/// `sum coefficient * x_{rank:S}` over subsets `S` of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedSubsetCombination {
    pub arity: usize,
    pub terms: Vec<SubsetTerm>,
}

impl SignedSubsetCombination {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut buf = Vec::with_capacity(self.arity);
        self.terms
            .iter()
            .map(|t| {
                buf.clear();
                buf.extend((0..self.arity).filter(|i| t.subset >> i & 1 == 1).map(|i| x[i]));
                buf.sort_by(f64::total_cmp);
                to_f64(&t.coefficient) * buf[t.rank - 1]
            })
            .sum()
    }
}

/// `x_{k:S}`: the k-th smallest of the coordinates selected by `subset`.
pub fn eval_subset_order_stat(x: &[f64], subset: u64, k: usize) -> Result<f64> {
    let mut vals: Vec<f64> = (0..x.len()).filter(|i| subset >> i & 1 == 1).map(|i| x[i]).collect();
    if k == 0 || k > vals.len() {
        return domain(format!("rank {k} outside [1, {}]", vals.len()));
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals[k - 1])
}

/// Coefficients `c_j = C(j-1, k-1) C(n-j, s-k)` (index `j - 1`) with
/// `sum_{|S| = s} x_{k:S} = sum_j c_j x_{j:n}`.
pub fn expand_subset_sum(n: usize, s: usize, k: usize) -> Result<Vec<BigInt>> {
    if !(1 <= k && k <= s && s <= n) {
        return domain(format!("need 1 <= k <= s <= n, got n={n}, s={s}, k={k}"));
    }
    Ok((1..=n)
        .map(|j| {
            if j < k {
                BigInt::zero()
            } else {
                binomial((j - 1) as u64, (k - 1) as u64) * binomial((n - j) as u64, (s - k) as u64)
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    /// Through subset maxima `x_{|S|:S}`.
    ViaMax,
    /// Through subset minima `x_{1:S}`.
    ViaMin,
}

/// Expresses `x_{k:n}` as a signed combination of subset maxima or minima.
pub fn expand_min_max(n: usize, k: usize, mode: Extremum) -> Result<SignedSubsetCombination> {
    if k == 0 || k > n {
        return domain(format!("k = {k} outside [1, {n}]"));
    }
    if n > MAX_SUBSET_ARITY {
        return domain(format!("arity {n} exceeds subset enumeration limit {MAX_SUBSET_ARITY}"));
    }
    let mut terms = Vec::new();
    for mask in 1u64..(1u64 << n) {
        let s = mask.count_ones() as usize;
        let (rank, coefficient) = match mode {
            Extremum::ViaMax if s >= k => {
                let c = binomial((s - 1) as u64, (k - 1) as u64);
                (s, sign((s - k) % 2 == 1) * Rational::from_integer(c))
            }
            Extremum::ViaMin if s + k > n => {
                let c = binomial((s - 1) as u64, (n - k) as u64);
                (1, sign((s + k - n - 1) % 2 == 1) * Rational::from_integer(c))
            }
            _ => continue,
        };
        if !coefficient.is_zero() {
            terms.push(SubsetTerm { subset: mask, rank, coefficient });
        }
    }
    Ok(SignedSubsetCombination { arity: n, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn os(n: usize, k: usize) -> OrderStatPolynomial {
        OrderStatPolynomial::order_stat(n, k).unwrap()
    }

    fn mono(n: usize, e: &[(usize, u32)]) -> OrderStatMonomial {
        OrderStatMonomial::new(n, e.iter().copied(), Rational::one()).unwrap()
    }

    #[test]
    fn order_stat_values() {
        assert_eq!(eval_order_stat(&[0.3, 0.1, 0.7], 2).unwrap(), 0.3);
        assert_eq!(eval_order_stat(&[0.5, 0.5], 1).unwrap(), 0.5);
        assert_eq!(eval_order_stat(&[0.5, 0.5], 2).unwrap(), 0.5);
        assert_eq!(eval_order_stat(&[0.2, 0.9], 0).unwrap(), 0.0);
        assert_eq!(eval_order_stat(&[0.2, 0.9], 3).unwrap(), 1.0);
        assert!(matches!(eval_order_stat(&[0.2, 0.9], 4), Err(crate::Error::Domain(_))));
        assert!(eval_order_stat(&[1.2], 1).is_err());
    }

    #[test]
    fn moment_single_factor() {
        for n in 1..8 {
            for k in 1..=n {
                assert_eq!(moment(n, &mono(n, &[(k, 1)])).unwrap(), rat(k as i64, n as i64 + 1));
            }
        }
    }

    #[test]
    fn moment_products_n2() {
        assert_eq!(moment(2, &mono(2, &[(1, 1), (2, 1)])).unwrap(), rat(1, 4));
        assert_eq!(moment(2, &mono(2, &[(1, 1), (2, 2)])).unwrap(), rat(1, 5));
        assert_eq!(moment(2, &mono(2, &[(1, 2), (2, 1)])).unwrap(), rat(2, 15));
    }

    #[test]
    fn moment_rejects_arity_mismatch() {
        assert!(moment(3, &mono(2, &[(1, 1)])).is_err());
    }

    #[test]
    fn monomial_validation() {
        assert!(OrderStatMonomial::new(2, [(3, 1)], Rational::one()).is_err());
        let m = OrderStatMonomial::new(3, [(2, 1), (1, 0), (2, 2)], int(5)).unwrap();
        assert_eq!(m.exponents(), &[(2, 3)]);
    }

    #[test]
    fn inner_products() {
        assert_eq!(inner_product_exact(&os(3, 1), &os(3, 2)).unwrap(), rat(3, 20));
        let one = os(4, 5);
        assert_eq!(inner_product_exact(&one, &one).unwrap(), int(1));
        assert_eq!(inner_product_exact(&os(2, 1), &os(2, 1)).unwrap(), rat(1, 6));
        assert!(inner_product_exact(&os(2, 1), &os(3, 1)).is_err());
    }

    #[test]
    fn canonical_cancellation() {
        let p = &os(3, 2) - &os(3, 2);
        assert!(p.is_zero());
        assert_eq!(p, OrderStatPolynomial::zero(3));
    }

    #[test]
    fn symmetrize_examples() {
        let n = 4;
        let x2 = PlainPolynomial::coordinate(n, 2).unwrap();
        let expected = OrderStatPolynomial::linear(n, Rational::zero(), &vec![rat(1, 4); 4]).unwrap();
        assert_eq!(symmetrize(&x2), expected);

        let prod = PlainPolynomial::new(2, [(vec![1, 1], Rational::one())]).unwrap();
        assert_eq!(symmetrize(&prod), OrderStatPolynomial::from_monomials(2, [mono(2, &[(1, 1), (2, 1)])]).unwrap());

        let sq = PlainPolynomial::new(2, [(vec![2, 0], Rational::one())]).unwrap();
        let half = OrderStatPolynomial::from_monomials(
            2,
            [
                OrderStatMonomial::new(2, [(1, 2)], rat(1, 2)).unwrap(),
                OrderStatMonomial::new(2, [(2, 2)], rat(1, 2)).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(symmetrize(&sq), half);
    }

    #[test]
    fn dualize_examples() {
        for n in 1..6 {
            assert_eq!(dualize(&os(n, 1)), os(n, n));
            let mid = (&os(n, 1) + &os(n, n)).scale(&rat(1, 2));
            assert_eq!(dualize(&mid), mid);
        }
        // f(1 - x) = 1 - x_(1) - x_(2) + x_(1) x_(2) for f = x_(1) x_(2), so f^d = x_(1) + x_(2) - x_(1) x_(2)
        let prod = &os(2, 1) * &os(2, 2);
        let reflected = &(&(&OrderStatPolynomial::constant(2, int(1)) - &os(2, 1)) - &os(2, 2)) + &prod;
        let one = OrderStatPolynomial::constant(2, int(1));
        assert_eq!(dualize(&prod), &one - &reflected);
        assert_eq!(dualize(&prod), &(&os(2, 1) + &os(2, 2)) - &prod);
    }

    #[test]
    fn slot_derivative_power() {
        let p = (&os(3, 2) * &os(3, 2)).scale(&int(3));
        assert_eq!(p.slot_derivative(2), os(3, 2).scale(&int(6)));
        assert!(p.slot_derivative(1).is_zero());
    }

    #[test]
    fn subset_sum_coefficients() {
        let big = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        assert_eq!(expand_subset_sum(2, 1, 1).unwrap(), big(&[1, 1]));
        assert_eq!(expand_subset_sum(3, 2, 1).unwrap(), big(&[2, 1, 0]));
        assert_eq!(expand_subset_sum(3, 2, 2).unwrap(), big(&[0, 1, 2]));
        assert!(expand_subset_sum(3, 4, 1).is_err());
        assert!(expand_subset_sum(3, 2, 3).is_err());
    }

    #[test]
    fn min_max_small_cases() {
        let via_max = expand_min_max(2, 1, Extremum::ViaMax).unwrap();
        let expected = vec![
            SubsetTerm { subset: 0b01, rank: 1, coefficient: int(1) },
            SubsetTerm { subset: 0b10, rank: 1, coefficient: int(1) },
            SubsetTerm { subset: 0b11, rank: 2, coefficient: int(-1) },
        ];
        assert_eq!(via_max.terms, expected);

        let via_min = expand_min_max(2, 2, Extremum::ViaMin).unwrap();
        let expected = vec![
            SubsetTerm { subset: 0b01, rank: 1, coefficient: int(1) },
            SubsetTerm { subset: 0b10, rank: 1, coefficient: int(1) },
            SubsetTerm { subset: 0b11, rank: 1, coefficient: int(-1) },
        ];
        assert_eq!(via_min.terms, expected);

        let mid = expand_min_max(3, 2, Extremum::ViaMax).unwrap();
        let pairs: Vec<_> = mid.terms.iter().map(|t| (t.subset, t.coefficient.clone())).collect();
        assert_eq!(pairs, vec![(0b011, int(1)), (0b101, int(1)), (0b110, int(1)), (0b111, int(-2))]);
        assert!(expand_min_max(3, 0, Extremum::ViaMin).is_err());
    }

    #[test]
    fn next_permutation_counts_multiset() {
        let mut v = vec![0, 0, 1, 2];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 12);
    }
}
