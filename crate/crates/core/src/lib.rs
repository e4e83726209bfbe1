//! Influence of the k-th smallest variable on square-integrable functions over
//! `[0, 1]^n`, and the best approximation of a function by a shifted L-statistic.
//!
//! The influence index `I(f, k)` is the coefficient of `x_(k)` in the orthogonal
//! projection of `f` onto `span{1, x_(1), ..., x_(n)}`. It is computed
//!
//! * exactly, for polynomials in the order statistics or in the coordinates and for
//!   Lovász extensions of set functions ([`exact`], [`projection`], [`lovasz`]);
//! * by closed formulas for products of unary factors, the power product and the
//!   variance statistic ([`closed_forms`]);
//! * by seeded, thread-count independent Monte-Carlo estimators for any
//!   evaluator ([`montecarlo`]).
//!
//! ```
//! use osinfluence::{builtin, influence_profile, Method};
//!
//! let f = builtin("variance", 2).unwrap();
//! let p = influence_profile(&f, Method::Exact).unwrap();
//! assert_eq!(p.indices[0].value, -0.2);
//! ```

pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod exact;
pub mod function;
pub mod lovasz;
pub mod montecarlo;
pub mod projection;
pub mod quadrature;
pub mod rational;

pub use closed_forms::{
    influence_multiplicative, influence_power_product, influence_symmetric_multiplicative,
    influence_via_alternative, subset_box_integral, variance_profile, AlternativeFormula, MultiplicativeSpec,
    SubsetBox, UnaryFactor,
};
pub use error::{Error, Result};
pub use exact::{
    dualize, eval_order_stat, expand_min_max, expand_subset_sum, inner_product_exact, moment, symmetrize,
    OrderStatMonomial, OrderStatPolynomial, PlainPolynomial, SignedSubsetCombination,
};
pub use function::{builtin, conjunctive_example, ineffective_example, FunctionSpec};
pub use lovasz::{
    equal_influence_class, eval_lovasz, influence_lovasz, level_averages, mobius, zeta, MobiusRepresentation,
    SetFunction,
};
pub use montecarlo::{
    influence_mc, influence_mc_covariance, influence_mc_derivative, influence_mc_diffquotient, mc_inner_product,
    tensor_quadrature, DiffQuotientVariant, EstimatorKind, Evaluator, FnEvaluator, IntegrationEstimate,
};
pub use projection::{
    best_approximation, g_basis, gram_system, h_density, influence_exact, influence_profile, normalized_index,
    project, ApproximationResult, GramSystem, InfluenceProfile, Method, MethodTag, Quantity,
};
pub use rational::Rational;
