#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use osinfluence::exact::{eval_subset_order_stat, Extremum};
use osinfluence::rational::{rat, to_f64};
use osinfluence::{
    dualize, equal_influence_class, eval_lovasz, eval_order_stat, expand_min_max, expand_subset_sum, influence_exact,
    influence_lovasz, influence_profile, inner_product_exact, project, symmetrize, tensor_quadrature, FnEvaluator,
    FunctionSpec, Method, OrderStatMonomial, OrderStatPolynomial, PlainPolynomial, Rational, SetFunction,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 256;
pub const MAX_ARITY: usize = 5;

/// Runs `check` on `CASES` deterministic draws of `strategy`.
pub fn run_property<S, F>(strategy: S, check: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

pub fn order_stat_poly(n: usize) -> impl Strategy<Value = OrderStatPolynomial> {
    let monomial = (prop::collection::vec((1..=n, 1u32..=2), 0..=2), small_rational());
    prop::collection::vec(monomial, 1..=4).prop_map(move |terms| {
        let monomials = terms.into_iter().map(|(exps, c)| {
            let mut merged = BTreeMap::new();
            for (k, e) in exps {
                *merged.entry(k).or_insert(0) += e;
            }
            OrderStatMonomial::new(n, merged, c).unwrap()
        });
        OrderStatPolynomial::from_monomials(n, monomials).unwrap()
    })
}

pub fn plain_poly(n: usize) -> impl Strategy<Value = PlainPolynomial> {
    let term = (prop::collection::vec(0u32..=2, n), small_rational());
    prop::collection::vec(term, 1..=3).prop_map(move |terms| PlainPolynomial::new(n, terms).unwrap())
}

pub fn set_function(n: usize) -> impl Strategy<Value = SetFunction> {
    prop::collection::vec(small_rational(), 1usize << n).prop_map(move |v| SetFunction::new(n, v).unwrap())
}

/// Set functions that often have a flat profile: `v(S) = a + b|S| + sum_{i in S} w_i`, sometimes
/// perturbed on one subset.
pub fn nearly_additive_set_function(n: usize) -> impl Strategy<Value = SetFunction> {
    (
        small_rational(),
        small_rational(),
        prop::collection::vec(small_rational(), n),
        prop::option::of((0u64..(1u64 << n), small_rational())),
    )
        .prop_map(move |(a, b, w, bump)| {
            let values = (0..1u64 << n)
                .map(|s| {
                    let mut v = &a + &b * Rational::from_integer(s.count_ones().into());
                    for (i, wi) in w.iter().enumerate() {
                        if s >> i & 1 == 1 {
                            v += wi;
                        }
                    }
                    if let Some((mask, delta)) = &bump {
                        if *mask == s {
                            v += delta;
                        }
                    }
                    v
                })
                .collect();
            SetFunction::new(n, values).unwrap()
        })
}

pub fn arity() -> impl Strategy<Value = usize> {
    1..=MAX_ARITY
}

pub fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, n)
}

pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn exact_indices(f: &FunctionSpec) -> Vec<Rational> {
    influence_profile(f, Method::Exact)
        .unwrap()
        .indices
        .into_iter()
        .map(|q| q.exact.expect("exact path yields rationals"))
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn check_linearity() -> Result<(), String> {
    let strategy = arity().prop_flat_map(|n| (order_stat_poly(n), order_stat_poly(n), small_rational(), small_rational()));
    run_property(strategy, |(f, g, alpha, beta)| {
        let n = f.arity();
        let combo = &f.scale(&alpha) + &g.scale(&beta);
        for k in 1..=n {
            let lhs = influence_exact(&combo, k).unwrap();
            let rhs = &alpha * influence_exact(&f, k).unwrap() + &beta * influence_exact(&g, k).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
        Ok(())
    })
}

/// `I(p∘π, k) = I(p, k) = I(Sym p, k)`, with the permuted side evaluated by box integrals
/// that never symmetrize.
pub fn check_permutation_invariance() -> Result<(), String> {
    let strategy = arity().prop_flat_map(|n| (plain_poly(n), permutation(n)));
    run_property(strategy, |(p, perm)| {
        let n = p.arity();
        let permuted = p.permute(&perm).unwrap();
        let sym = symmetrize(&p);
        let direct = exact_indices(&FunctionSpec::Plain(p.clone()));
        for k in 1..=n {
            let by_boxes = osinfluence::closed_forms::influence_via_split_boxes_exact(&permuted, k).unwrap();
            prop_assert_eq!(&by_boxes, &direct[k - 1]);
            prop_assert_eq!(influence_exact(&sym, k).unwrap(), direct[k - 1].clone());
        }
        Ok(())
    })
}

pub fn check_duality() -> Result<(), String> {
    let polys = arity().prop_flat_map(order_stat_poly);
    run_property(polys, |f| {
        let n = f.arity();
        let d = dualize(&f);
        for k in 1..=n {
            prop_assert_eq!(influence_exact(&d, k).unwrap(), influence_exact(&f, n - k + 1).unwrap());
        }
        Ok(())
    })?;
    let sets = arity().prop_flat_map(set_function);
    run_property(sets, |v| {
        let n = v.arity();
        let d = v.dual();
        for k in 1..=n {
            prop_assert_eq!(influence_lovasz(&d, k).unwrap(), influence_lovasz(&v, n - k + 1).unwrap());
        }
        Ok(())
    })
}

/// `<f - f_L, os_i> = 0` for `i = 1..n+1`.
pub fn check_orthogonality() -> Result<(), String> {
    let strategy = arity().prop_flat_map(order_stat_poly);
    run_property(strategy, |f| {
        let n = f.arity();
        let fl = project(&FunctionSpec::OrderStat(f.clone()), Method::Exact).unwrap().to_polynomial().unwrap();
        let residual = &f + &fl.scale(&rat(-1, 1));
        for i in 1..=n {
            let os = OrderStatPolynomial::order_stat(n, i).unwrap();
            prop_assert!(inner_product_exact(&residual, &os).unwrap().is_zero());
        }
        let one = OrderStatPolynomial::constant(n, Rational::one());
        prop_assert!(inner_product_exact(&residual, &one).unwrap().is_zero());
        Ok(())
    })
}

/// `<f_L, 1> = <f, 1>`, for order-statistic polynomials and Lovász extensions.
pub fn check_mean_preservation() -> Result<(), String> {
    let polys = arity().prop_flat_map(order_stat_poly);
    run_property(polys, |f| {
        let p = influence_profile(&FunctionSpec::OrderStat(f.clone()), Method::Exact).unwrap();
        prop_assert!(p.mean_preservation_gap_exact().unwrap().is_zero());
        prop_assert_eq!(p.mean.exact.clone().unwrap(), f.integral());
        Ok(())
    })?;
    let sets = arity().prop_flat_map(set_function);
    run_property(sets, |v| {
        let p = influence_profile(&FunctionSpec::SetFunction(v), Method::Exact).unwrap();
        prop_assert!(p.mean_preservation_gap_exact().unwrap().is_zero());
        Ok(())
    })
}

/// Flat profile, arithmetic level averages and vanishing higher Möbius levels agree.
pub fn check_equal_influence_equivalence() -> Result<(), String> {
    let strategy = arity().prop_flat_map(|n| prop_oneof![set_function(n), nearly_additive_set_function(n)]);
    run_property(strategy, |v| {
        let d = equal_influence_class(&v);
        prop_assert!(d.conditions_agree(), "{:?}", d);
        let profile: Vec<Rational> = (1..=v.arity()).map(|k| influence_lovasz(&v, k).unwrap()).collect();
        prop_assert_eq!(d.equal, profile.iter().all(|i| *i == profile[0]));
        Ok(())
    })
}

/// Subset sums of order statistics, and order statistics through subset maxima and minima.
pub fn check_subset_expansions() -> Result<(), String> {
    let strategy = arity().prop_flat_map(|n| (point(n), 1..=n, 1..=n, 1..=n));
    run_property(strategy, |(x, s, k, j)| {
        let n = x.len();
        let (s, k) = (s.max(k), s.min(k));
        let coeffs = expand_subset_sum(n, s, k).unwrap();
        let lhs: f64 = (0u64..1 << n)
            .filter(|m| m.count_ones() as usize == s)
            .map(|m| eval_subset_order_stat(&x, m, k).unwrap())
            .sum();
        let rhs: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| to_f64(&Rational::from_integer(c.clone())) * eval_order_stat(&x, i + 1).unwrap())
            .sum();
        prop_assert!(close(lhs, rhs, 1e-12), "{} vs {}", lhs, rhs);
        let target = eval_order_stat(&x, j).unwrap();
        for mode in [Extremum::ViaMax, Extremum::ViaMin] {
            let e = expand_min_max(n, j, mode).unwrap().eval(&x);
            prop_assert!(close(e, target, 1e-12), "{:?}: {} vs {}", mode, e, target);
        }
        Ok(())
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// The average of `x_{j:S}` over relabelings equals the Lovász extension of the level averages.
pub fn check_symmetrized_level_averages() -> Result<(), String> {
    let strategy = arity().prop_flat_map(|n| (point(n), 1u64..(1u64 << n), 1..=n));
    run_property(strategy, |(x, subset, j)| {
        let n = x.len();
        let j = j.min(subset.count_ones() as usize);
        let perms = permutations(n);
        let sym = perms
            .iter()
            .map(|p| {
                let y: Vec<f64> = p.iter().map(|&i| x[i]).collect();
                eval_subset_order_stat(&y, subset, j).unwrap()
            })
            .sum::<f64>()
            / perms.len() as f64;
        let v = SetFunction::subset_order_stat(n, subset, j).unwrap();
        let levels = osinfluence::level_averages(&v);
        let averaged = SetFunction::from_fn(n, |m| levels.v_bar[m.count_ones() as usize].clone()).unwrap();
        let by_levels = eval_lovasz(&averaged, &x).unwrap();
        prop_assert!(close(sym, by_levels, 1e-12), "{} vs {}", sym, by_levels);
        Ok(())
    })
}

fn cubic(c: [f64; 4]) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
    move |t| c[0] + t * (c[1] + t * (c[2] + t * c[3]))
}

/// `I(f, 1) = 0` when the smaller variable never changes the value, by tensor quadrature.
pub fn check_ineffective_smallest() -> Result<(), String> {
    let coeff = || prop::array::uniform4(-3.0f64..3.0);
    run_property((coeff(), coeff()), |(c1, c2)| {
        let f = osinfluence::ineffective_example(cubic(c1), cubic(c2));
        let evaluator = f.evaluator();
        let g1 = osinfluence::g_basis(2, 1).unwrap();
        let integrand = FnEvaluator::new(2, move |x| evaluator.eval(x) * g1.eval(x));
        let i1 = tensor_quadrature(&integrand, 8).unwrap();
        prop_assert!(i1.abs() < 1e-10, "I(f,1) = {}", i1);
        Ok(())
    })
}

pub type Property = (&'static str, fn() -> Result<(), String>);

pub const PROPERTIES: [Property; 9] = [
    ("linearity of I", check_linearity),
    ("permutation invariance and symmetrization", check_permutation_invariance),
    ("duality", check_duality),
    ("orthogonality of the residual", check_orthogonality),
    ("mean preservation", check_mean_preservation),
    ("equal-influence three-way equivalence", check_equal_influence_equivalence),
    ("subset order-statistic expansions", check_subset_expansions),
    ("symmetrized subset order statistics", check_symmetrized_level_averages),
    ("zero index of an ineffective variable", check_ineffective_smallest),
];
