//! Set functions on `2^[n]`, their Möbius transform and Lovász extensions.
//!
//! Subsets are bitmasks: bit `i - 1` is set iff element `i` belongs to the set.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{domain, Result};
use crate::exact::{expand_subset_sum, OrderStatPolynomial};
use crate::rational::{binomial, binomial_signed, to_f64, Rational};

/// Dense tables are limited to this many elements.
pub const MAX_SET_ARITY: usize = 24;

/// Largest arity for which the exact `<f, f>` of a Lovász extension is computed.
pub const MAX_NORM_ARITY: usize = 12;

/// `v: 2^[n] -> Q`, stored densely in bitmask order.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction {
    arity: usize,
    values: Vec<Rational>,
    floats: Vec<f64>,
}

impl SetFunction {
    pub fn new(arity: usize, values: Vec<Rational>) -> Result<Self> {
        check_arity(arity)?;
        if values.len() != 1usize << arity {
            return domain(format!(
                "set function of arity {arity} needs {} values, got {}",
                1usize << arity,
                values.len()
            ));
        }
        let floats = values.iter().map(to_f64).collect();
        Ok(SetFunction { arity, values, floats })
    }

    pub fn from_fn(arity: usize, f: impl Fn(u64) -> Rational) -> Result<Self> {
        check_arity(arity)?;
        Self::new(arity, (0..1u64 << arity).map(f).collect())
    }

    /// `v(S) = |S| / n`; its extension is the arithmetic mean.
    pub fn additive(arity: usize) -> Result<Self> {
        Self::from_fn(arity, |s| Rational::new(BigInt::from(s.count_ones()), BigInt::from(arity)))
    }

    /// `v(S) = 1` iff `S = [n]`; its extension is the minimum.
    pub fn min_capacity(arity: usize) -> Result<Self> {
        let full = full_mask(arity);
        Self::from_fn(arity, |s| if s == full { Rational::one() } else { Rational::zero() })
    }

    /// `v(S) = 1` iff `S` is nonempty; its extension is the maximum.
    pub fn max_capacity(arity: usize) -> Result<Self> {
        Self::from_fn(arity, |s| if s != 0 { Rational::one() } else { Rational::zero() })
    }

    /// Vertex values of `os_{j:S}`: `x_{j:S}(1_T) = 1` iff `|T ∩ S| > |S| - j`.
    pub fn subset_order_stat(arity: usize, subset: u64, j: usize) -> Result<Self> {
        check_arity(arity)?;
        let s = subset.count_ones() as usize;
        if subset == 0 || subset > full_mask(arity) {
            return domain(format!("subset {subset:#b} is empty or not contained in [{arity}]"));
        }
        if j == 0 || j > s {
            return domain(format!("rank {j} outside [1, {s}]"));
        }
        Self::from_fn(arity, |t| {
            if (t & subset).count_ones() as usize + j > s {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, subset: u64) -> &Rational {
        &self.values[subset as usize]
    }

    pub(crate) fn value_f64(&self, subset: u64) -> f64 {
        self.floats[subset as usize]
    }

    /// `v^d(S) = 1 - v([n] \ S)`; the vertex function of the dual extension.
    pub fn dual(&self) -> Self {
        let full = full_mask(self.arity);
        Self::from_fn(self.arity, |s| Rational::one() - self.value(full & !s)).expect("same arity")
    }

    /// Relabels the ground set: element `i` (0-based) becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
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
        let mut values = vec![Rational::zero(); self.values.len()];
        for (s, v) in self.values.iter().enumerate() {
            let image = (0..self.arity)
                .filter(|i| s >> i & 1 == 1)
                .fold(0usize, |acc, i| acc | 1 << perm[i]);
            values[image] = v.clone();
        }
        Self::new(self.arity, values)
    }

    /// Nondecreasing with `v(∅) = 0`, i.e. the extension is a discrete Choquet integral.
    pub fn is_choquet_capacity(&self) -> bool {
        if !self.values[0].is_zero() {
            return false;
        }
        (0..self.values.len()).all(|s| {
            (0..self.arity)
                .filter(|i| s >> i & 1 == 0)
                .all(|i| self.values[s | 1 << i] >= self.values[s])
        })
    }

    /// `v(S)` depends on `|S|` only.
    pub fn is_symmetric(&self) -> bool {
        let mut by_size: Vec<Option<&Rational>> = vec![None; self.arity + 1];
        self.values.iter().enumerate().all(|(s, v)| {
            let slot = &mut by_size[(s as u64).count_ones() as usize];
            match slot {
                Some(prev) => *prev == v,
                None => {
                    *slot = Some(v);
                    true
                }
            }
        })
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 {
        return domain("arity must be positive");
    }
    if arity > MAX_SET_ARITY {
        return domain(format!("arity {arity} exceeds dense set-function limit {MAX_SET_ARITY}"));
    }
    Ok(())
}

pub(crate) fn full_mask(arity: usize) -> u64 {
    (1u64 << arity) - 1
}

/// Möbius transform `m(S) = sum_{T ⊆ S} (-1)^{|S|-|T|} v(T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusRepresentation {
    arity: usize,
    values: Vec<Rational>,
}

impl MobiusRepresentation {
    pub fn new(arity: usize, values: Vec<Rational>) -> Result<Self> {
        check_arity(arity)?;
        if values.len() != 1usize << arity {
            return domain(format!("expected {} Möbius values, got {}", 1usize << arity, values.len()));
        }
        Ok(MobiusRepresentation { arity, values })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, subset: u64) -> &Rational {
        &self.values[subset as usize]
    }
}

// Subset-sum recursion over one bit at a time: Θ(n 2^n).
fn subset_transform(values: &mut [Rational], arity: usize, subtract: bool) {
    for bit in 0..arity {
        let step = 1usize << bit;
        for s in 0..values.len() {
            if s & step != 0 {
                let lower = values[s ^ step].clone();
                if subtract {
                    values[s] -= lower;
                } else {
                    values[s] += lower;
                }
            }
        }
    }
}

pub fn mobius(v: &SetFunction) -> MobiusRepresentation {
    let mut values = v.values.clone();
    subset_transform(&mut values, v.arity, true);
    MobiusRepresentation { arity: v.arity, values }
}

/// `v(S) = sum_{T ⊆ S} m(T)`.
pub fn zeta(m: &MobiusRepresentation) -> SetFunction {
    let mut values = m.values.clone();
    subset_transform(&mut values, m.arity, false);
    SetFunction::new(m.arity, values).expect("arity already validated")
}

/// Ascending permutation of coordinate indices (ties keep index order).
pub(crate) fn ascending_indices(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    idx
}

/// Lovász extension at `x` in the telescoping form
/// `v(∅) + sum_i (v({π(i..n)}) - v({π(i+1..n)})) x_π(i)` with `π` sorting `x` ascending.
pub fn eval_lovasz(v: &SetFunction, x: &[f64]) -> Result<f64> {
    if x.len() != v.arity {
        return domain(format!("point of dimension {} for arity {}", x.len(), v.arity));
    }
    Ok(eval_lovasz_unchecked(v, x))
}

pub(crate) fn eval_lovasz_unchecked(v: &SetFunction, x: &[f64]) -> f64 {
    let order = ascending_indices(x);
    let mut upper = 0u64;
    let mut total = v.value_f64(0);
    // walk from the largest coordinate down, growing the upper set
    for &i in order.iter().rev() {
        let next = upper | 1 << i;
        total += (v.value_f64(next) - v.value_f64(upper)) * x[i];
        upper = next;
    }
    total
}

/// `D_(k) f` of the Lovász extension at a point with distinct coordinates.
pub(crate) fn lovasz_slot_derivative(v: &SetFunction, x: &[f64], k: usize) -> f64 {
    let order = ascending_indices(x);
    let upper_from = |start: usize| order[start..].iter().fold(0u64, |acc, &i| acc | 1 << i);
    v.value_f64(upper_from(k - 1)) - v.value_f64(upper_from(k))
}

/// `sum_S m(S) min_{i ∈ S} x_i`, the empty set contributing `m(∅)`.
pub fn eval_lovasz_mobius(m: &MobiusRepresentation, x: &[f64]) -> Result<f64> {
    if x.len() != m.arity {
        return domain(format!("point of dimension {} for arity {}", x.len(), m.arity));
    }
    let mut total = 0.0;
    for (s, coeff) in m.values.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let min = (0..m.arity)
            .filter(|i| s >> i & 1 == 1)
            .map(|i| x[i])
            .fold(1.0, f64::min);
        total += to_f64(coeff) * min;
    }
    Ok(total)
}

/// Per-cardinality averages of `v` and of its Möbius transform.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelAverages {
    pub v_bar: Vec<Rational>,
    pub m_bar: Vec<Rational>,
}

fn level_average(values: &[Rational], arity: usize) -> Vec<Rational> {
    let mut sums = vec![Rational::zero(); arity + 1];
    for (s, v) in values.iter().enumerate() {
        sums[(s as u64).count_ones() as usize] += v;
    }
    sums.into_iter()
        .enumerate()
        .map(|(s, total)| total / Rational::from_integer(binomial(arity as u64, s as u64)))
        .collect()
}

pub fn level_averages(v: &SetFunction) -> LevelAverages {
    LevelAverages {
        v_bar: level_average(&v.values, v.arity),
        m_bar: level_average(&mobius(v).values, v.arity),
    }
}

impl LevelAverages {
    pub fn arity(&self) -> usize {
        self.v_bar.len() - 1
    }

    /// `v̄(n-k+1) - v̄(n-k)`.
    pub fn influence_by_levels(&self, k: usize) -> Rational {
        let n = self.arity();
        &self.v_bar[n - k + 1] - &self.v_bar[n - k]
    }

    /// `sum_{s=1}^{n-k+1} C(n-k, s-1) m̄(s)`.
    pub fn influence_by_mobius(&self, k: usize) -> Rational {
        let n = self.arity();
        (1..=n - k + 1)
            .map(|s| Rational::from_integer(binomial((n - k) as u64, (s - 1) as u64)) * &self.m_bar[s])
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// Influence of the k-th smallest variable on the Lovász extension of `v`.
pub fn influence_lovasz(v: &SetFunction, k: usize) -> Result<Rational> {
    if k == 0 || k > v.arity {
        return domain(format!("k = {k} outside [1, {}]", v.arity));
    }
    let levels = level_averages(v);
    let by_levels = levels.influence_by_levels(k);
    debug_assert_eq!(by_levels, levels.influence_by_mobius(k));
    Ok(by_levels)
}

/// All `n` indices at once.
pub fn lovasz_profile(v: &SetFunction) -> Vec<Rational> {
    let levels = level_averages(v);
    (1..=v.arity).map(|k| levels.influence_by_levels(k)).collect()
}

/// `I(os_{j:S}, k) = C(k-1, j-1) C(n-k, |S|-j) / C(n, |S|)` when `0 <= k - j <= n - |S|`, else 0.
pub fn influence_os_subset(n: usize, subset: u64, j: usize, k: usize) -> Result<Rational> {
    check_arity(n)?;
    if subset == 0 || subset > full_mask(n) {
        return domain(format!("subset {subset:#b} is empty or not contained in [{n}]"));
    }
    let s = subset.count_ones() as usize;
    if j == 0 || j > s {
        return domain(format!("rank {j} outside [1, {s}]"));
    }
    if k == 0 || k > n {
        return domain(format!("k = {k} outside [1, {n}]"));
    }
    if k < j || k - j > n - s {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(
        binomial_signed(k as i64 - 1, j as i64 - 1) * binomial_signed((n - k) as i64, (s - j) as i64),
        binomial(n as u64, s as u64),
    ))
}

/// Which of the three equivalent equal-influence conditions hold, and where each first fails.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EqualInfluenceDiagnosis {
    pub equal: bool,
    /// `I(f, k) = I(f, 1)` for all `k`; otherwise the first offending `k`.
    pub flat_profile: bool,
    pub flat_profile_violation: Option<usize>,
    /// `v̄(0), ..., v̄(n)` is an arithmetic progression; otherwise the first level `s`
    /// where `v̄(s) - v̄(s-1)` departs from `v̄(1) - v̄(0)`.
    pub arithmetic_progression: bool,
    pub arithmetic_progression_violation: Option<usize>,
    /// `m̄(s) = 0` for `s = 2..n`; otherwise the first nonzero level.
    pub vanishing_higher_mobius: bool,
    pub vanishing_higher_mobius_violation: Option<usize>,
}

impl EqualInfluenceDiagnosis {
    pub fn conditions_agree(&self) -> bool {
        self.flat_profile == self.arithmetic_progression
            && self.arithmetic_progression == self.vanishing_higher_mobius
    }

    /// Smallest level at which any condition fails.
    pub fn first_violation(&self) -> Option<usize> {
        [
            self.flat_profile_violation,
            self.arithmetic_progression_violation,
            self.vanishing_higher_mobius_violation,
        ]
        .into_iter()
        .flatten()
        .min()
    }
}

pub fn equal_influence_class(v: &SetFunction) -> EqualInfluenceDiagnosis {
    let n = v.arity;
    let levels = level_averages(v);
    let profile: Vec<Rational> = (1..=n).map(|k| levels.influence_by_levels(k)).collect();

    let flat_profile_violation = (2..=n).find(|&k| profile[k - 1] != profile[0]);
    let step = &levels.v_bar[1] - &levels.v_bar[0];
    let arithmetic_progression_violation =
        (2..=n).find(|&s| &levels.v_bar[s] - &levels.v_bar[s - 1] != step);
    let vanishing_higher_mobius_violation = (2..=n).find(|&s| !levels.m_bar[s].is_zero());

    let flat_profile = flat_profile_violation.is_none();
    let arithmetic_progression = arithmetic_progression_violation.is_none();
    let vanishing_higher_mobius = vanishing_higher_mobius_violation.is_none();
    EqualInfluenceDiagnosis {
        equal: flat_profile && arithmetic_progression && vanishing_higher_mobius,
        flat_profile,
        flat_profile_violation,
        arithmetic_progression,
        arithmetic_progression_violation,
        vanishing_higher_mobius,
        vanishing_higher_mobius_violation,
    }
}

/// `constant + sum_k slopes[k-1] x_(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedLStatistic {
    pub constant: Rational,
    pub slopes: Vec<Rational>,
}

impl ShiftedLStatistic {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let sorted = crate::exact::sorted(x);
        to_f64(&self.constant)
            + self.slopes.iter().zip(&sorted).map(|(a, xi)| to_f64(a) * xi).sum::<f64>()
    }

    pub fn to_polynomial(&self) -> OrderStatPolynomial {
        OrderStatPolynomial::linear(self.slopes.len(), self.constant.clone(), &self.slopes)
            .expect("slope count equals arity")
    }
}

/// Symmetric part of the Lovász extension: `v(∅) + sum_k I(f, k) os_k`.
pub fn symmetric_part(v: &SetFunction) -> ShiftedLStatistic {
    ShiftedLStatistic { constant: v.value(0).clone(), slopes: lovasz_profile(v) }
}

/// `Sym(f)` as an order-statistic polynomial, built from the Möbius form and
/// `Sym(x_{1:S}) = C(n, |S|)^{-1} sum_j C(n - j, |S| - 1) x_{j:n}`.
pub fn symmetrized_order_stat_expansion(v: &SetFunction) -> OrderStatPolynomial {
    let n = v.arity;
    let m = mobius(v);
    let mut by_size = vec![Rational::zero(); n + 1];
    for (s, coeff) in m.values.iter().enumerate() {
        by_size[(s as u64).count_ones() as usize] += coeff;
    }
    let mut slopes = vec![Rational::zero(); n];
    for (s, total) in by_size.iter().enumerate().skip(1) {
        if total.is_zero() {
            continue;
        }
        let coeffs = expand_subset_sum(n, s, 1).expect("1 <= s <= n");
        let denom = Rational::from_integer(binomial(n as u64, s as u64));
        for (j, c) in coeffs.into_iter().enumerate() {
            slopes[j] += total * Rational::from_integer(c) / &denom;
        }
    }
    OrderStatPolynomial::linear(n, by_size[0].clone(), &slopes).expect("n slopes")
}

/// `<f, 1>` for the Lovász extension: `sum_S m(S) / (|S| + 1)`.
pub fn lovasz_mean(v: &SetFunction) -> Rational {
    mobius(v)
        .values
        .iter()
        .enumerate()
        .map(|(s, m)| m / Rational::from_integer(BigInt::from((s as u64).count_ones() + 1)))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `E[min_S min_T]` for uniform coordinates, with `a = |S \ T|`, `b = |T \ S|`, `c = |S ∩ T|`.
fn min_product_moment(a: u32, b: u32, c: u32) -> Rational {
    let r = |p: u32, q: u32| Rational::new(BigInt::from(p), BigInt::from(q));
    let total = a + b + c + 2;
    r(1, a + 1) * (r(1, b + c + 1) - r(1, total)) + r(1, b + 1) * (r(1, a + c + 1) - r(1, total))
}

/// Exact `<f, f>` for the Lovász extension.
pub fn lovasz_norm_sq(v: &SetFunction) -> Result<Rational> {
    if v.arity > MAX_NORM_ARITY {
        return crate::error::config(format!(
            "exact norm of a Lovász extension limited to arity {MAX_NORM_ARITY}"
        ));
    }
    let m = mobius(v);
    let support: Vec<(u64, &Rational)> = m
        .values
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(s, c)| (s as u64, c))
        .collect();
    let mut total = Rational::zero();
    for &(s, ms) in &support {
        for &(t, mt) in &support {
            let moment = min_product_moment((s & !t).count_ones(), (t & !s).count_ones(), (s & t).count_ones());
            total += ms * mt * moment;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn random_set_function(n: usize, seed: u64) -> SetFunction {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let values = (0..1u64 << n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                rat((state >> 33) as i64 % 19 - 9, 1 + (state >> 20) as i64 % 7)
            })
            .collect();
        SetFunction::new(n, values).unwrap()
    }

    #[test]
    fn mobius_of_additive() {
        let n = 4;
        let m = mobius(&SetFunction::additive(n).unwrap());
        for (s, val) in m.values().iter().enumerate() {
            let expected = if (s as u64).count_ones() == 1 { rat(1, n as i64) } else { int(0) };
            assert_eq!(val, &expected);
        }
    }

    #[test]
    fn mobius_constant_empty() {
        let v = SetFunction::from_fn(3, |s| if s == 0 { int(5) } else { int(0) }).unwrap();
        assert_eq!(mobius(&v).value(0), &int(5));
        let m = MobiusRepresentation::new(3, (0..8).map(|s| if s == 0 { int(2) } else { int(0) }).collect()).unwrap();
        assert!(zeta(&m).values().iter().all(|x| *x == int(2)));
    }

    #[test]
    fn mobius_of_min_capacity_alternates() {
        let n = 4;
        let m = mobius(&SetFunction::min_capacity(n).unwrap());
        for (s, val) in m.values().iter().enumerate() {
            let sign = if (n - (s as u64).count_ones() as usize) % 2 == 0 { 1 } else { -1 };
            // v = indicator of [n]: m(S) = 0 unless S = [n]
            let expected = if s == 15 { int(sign) } else { int(0) };
            assert_eq!(val, &expected);
        }
        let m_max = mobius(&SetFunction::max_capacity(3).unwrap());
        // max = sum of singletons - pairs + triple
        assert_eq!(m_max.value(0b111), &int(1));
        assert_eq!(m_max.value(0b011), &int(-1));
        assert_eq!(m_max.value(0b001), &int(1));
    }

    #[test]
    fn zeta_round_trip() {
        for n in 1..=6 {
            let v = random_set_function(n, n as u64);
            assert_eq!(zeta(&mobius(&v)), v);
        }
    }

    #[test]
    fn lovasz_vertices_and_mean() {
        let v = random_set_function(3, 11);
        for s in 0..8u64 {
            let x: Vec<f64> = (0..3).map(|i| (s >> i & 1) as f64).collect();
            assert!((eval_lovasz(&v, &x).unwrap() - to_f64(v.value(s))).abs() < 1e-12);
        }
        let add = SetFunction::additive(3).unwrap();
        let x = [0.2, 0.9, 0.4];
        assert!((eval_lovasz(&add, &x).unwrap() - 0.5).abs() < 1e-12);
        assert!(eval_lovasz(&add, &[0.1]).is_err());
    }

    #[test]
    fn influence_examples() {
        for n in 1..=6 {
            let add = SetFunction::additive(n).unwrap();
            for k in 1..=n {
                assert_eq!(influence_lovasz(&add, k).unwrap(), rat(1, n as i64));
            }
            let min = SetFunction::min_capacity(n).unwrap();
            assert_eq!(lovasz_profile(&min)[0], int(1));
            assert!(lovasz_profile(&min)[1..].iter().all(|x| x.is_zero()));
        }
        let median = SetFunction::subset_order_stat(3, 0b111, 2).unwrap();
        assert_eq!(lovasz_profile(&median), vec![int(0), int(1), int(0)]);
        assert!(influence_lovasz(&median, 0).is_err());
    }

    #[test]
    fn both_influence_formulas_agree() {
        for n in 1..=6 {
            let v = random_set_function(n, 100 + n as u64);
            let levels = level_averages(&v);
            for k in 1..=n {
                assert_eq!(levels.influence_by_levels(k), levels.influence_by_mobius(k));
            }
        }
    }

    #[test]
    fn os_subset_formula() {
        assert_eq!(influence_os_subset(4, 0b0011, 1, 2).unwrap(), rat(1, 3));
        for j in 1..=4 {
            for k in 1..=4 {
                let expected = if j == k { int(1) } else { int(0) };
                assert_eq!(influence_os_subset(4, 0b1111, j, k).unwrap(), expected);
            }
        }
        let total: Rational = (1..=5).map(|k| influence_os_subset(5, 0b10101, 2, k).unwrap()).sum();
        assert_eq!(total, int(1));
        assert!(influence_os_subset(4, 0b0011, 3, 1).is_err());
        assert!(influence_os_subset(4, 0, 1, 1).is_err());
    }

    #[test]
    fn equal_influence_examples() {
        let d = equal_influence_class(&SetFunction::additive(4).unwrap());
        assert!(d.equal && d.conditions_agree());
        let d = equal_influence_class(&SetFunction::min_capacity(3).unwrap());
        assert!(!d.equal && d.conditions_agree());
        assert_eq!(d.flat_profile_violation, Some(2));
        assert_eq!(d.first_violation(), Some(2));
    }

    #[test]
    fn symmetric_part_constant() {
        let v = SetFunction::from_fn(2, |s| if s == 0 { int(3) } else { int(s as i64) }).unwrap();
        assert_eq!(symmetric_part(&v).constant, int(3));
    }

    #[test]
    fn dual_and_relabel() {
        let min = SetFunction::min_capacity(3).unwrap();
        assert_eq!(min.dual(), SetFunction::max_capacity(3).unwrap());
        let v = random_set_function(3, 5);
        let r = v.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(r.value(0b100), v.value(0b001));
        assert!(v.relabel(&[0, 0, 1]).is_err());
    }

    #[test]
    fn exact_mean_and_norm() {
        // arithmetic mean of two uniforms: mean 1/2, E[((x+y)/2)^2] = 7/24
        let add = SetFunction::additive(2).unwrap();
        assert_eq!(lovasz_mean(&add), rat(1, 2));
        assert_eq!(lovasz_norm_sq(&add).unwrap(), rat(7, 24));
        // min of two uniforms: E[min^2] = 1/6
        assert_eq!(lovasz_norm_sq(&SetFunction::min_capacity(2).unwrap()).unwrap(), rat(1, 6));
        let c = SetFunction::from_fn(2, |_| int(3)).unwrap();
        assert_eq!(lovasz_norm_sq(&c).unwrap(), int(9));
    }

    #[test]
    fn flags() {
        assert!(SetFunction::additive(3).unwrap().is_choquet_capacity());
        assert!(SetFunction::additive(3).unwrap().is_symmetric());
        let v = SetFunction::from_fn(2, |s| int(2 - s as i64)).unwrap();
        assert!(!v.is_choquet_capacity());
        assert!(SetFunction::new(2, vec![int(0); 3]).is_err());
        assert!(SetFunction::new(25, vec![]).is_err());
    }
}
