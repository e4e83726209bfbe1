//! Report documents emitted by the command-line tool, and their renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lovasz::EqualInfluenceDiagnosis;
use crate::projection::Quantity;
use crate::rational::format_rational;

pub const TOOL_NAME: &str = "osinfluence";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A number as reported: decimal value, exact rational when known, standard error when estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub value: f64,
    pub rational: Option<String>,
    pub se: Option<f64>,
}

impl From<&Quantity> for ValueReport {
    fn from(q: &Quantity) -> Self {
        ValueReport { value: q.value, rational: q.exact.as_ref().map(format_rational), se: q.std_error }
    }
}

/// `I(f, k)` for one `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub k: usize,
    pub method: String,
    pub value: f64,
    pub rational: Option<String>,
    pub se: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    /// `a_1, ..., a_{n+1}` of `sum_k a_k os_k` with `os_{n+1} = 1`.
    pub coefficients: Vec<ValueReport>,
    /// `<f, 1>`, the constant of the recentered form.
    pub mean: ValueReport,
    /// `I(f, k)`, the slopes of the recentered form `<f,1> + sum_k I(f,k)(x_(k) - k/(n+1))`.
    pub slopes: Vec<ValueReport>,
    pub r_squared: Option<ValueReport>,
    pub residual_norm_sq: Option<ValueReport>,
    /// `r(f, k)` for `k = 1..n`.
    pub normalized_indices: Option<Vec<ValueReport>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricPartReport {
    pub constant: String,
    pub slopes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LovaszReport {
    /// `I(f, 1..n)` as rationals.
    pub profile: Vec<String>,
    /// Möbius transform in bitmask order.
    pub mobius: Option<Vec<String>>,
    pub symmetric_part: Option<SymmetricPartReport>,
    pub equal_influence: Option<EqualInfluenceDiagnosis>,
    pub choquet_capacity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub value: f64,
    pub se: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub method: String,
    pub value: f64,
    pub rational: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    /// `null` when a zero standard error meets a nonzero difference.
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub k: usize,
    pub reference: Option<ReferenceReport>,
    pub estimates: Vec<EstimateReport>,
    pub pairs: Vec<PairReport>,
    pub threshold: f64,
    pub agree: bool,
}

/// Everything one command invocation produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub spec: serde_json::Value,
    pub arity: usize,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub results: Vec<IndexResult>,
    pub approximation: Option<ApproximationReport>,
    pub lovasz: Option<LovaszReport>,
    pub crosscheck: Option<CrosscheckReport>,
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: &str, spec: serde_json::Value, arity: usize) -> Self {
        ReportDocument {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            spec,
            arity,
            method: None,
            seed: None,
            samples: None,
            results: Vec::new(),
            approximation: None,
            lovasz: None,
            crosscheck: None,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Per-k rows: `k,value,rational,se,method`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,value,rational,se,method\n");
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.k,
                r.value,
                r.rational.as_deref().unwrap_or(""),
                r.se.map(|s| s.to_string()).unwrap_or_default(),
                r.method
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}  {}  n = {}", self.tool, self.version, self.command, self.arity);
        if let Some(m) = &self.method {
            let _ = write!(out, "method: {m}");
            if let (Some(s), Some(seed)) = (self.samples, self.seed) {
                let _ = write!(out, "  samples: {s}  seed: {seed}");
            }
            out.push('\n');
        }
        if !self.results.is_empty() {
            let _ = writeln!(out, "\n{:>4}  {:>22}  {:>24}  {:>12}  method", "k", "I(f,k)", "exact", "se");
            for r in &self.results {
                let _ = writeln!(
                    out,
                    "{:>4}  {:>22}  {:>24}  {:>12}  {}",
                    r.k,
                    format!("{:.15}", r.value),
                    r.rational.as_deref().unwrap_or("-"),
                    r.se.map(|s| format!("{s:.3e}")).unwrap_or_else(|| "-".into()),
                    r.method
                );
            }
        }
        if let Some(a) = &self.approximation {
            out.push_str("\nbest shifted L-statistic\n");
            let _ = writeln!(out, "  mean <f,1>          {}", value_text(&a.mean));
            for (i, c) in a.coefficients.iter().enumerate() {
                let _ = writeln!(out, "  {:<20}{}", format!("a_{}", i + 1), value_text(c));
            }
            if let Some(r2) = &a.r_squared {
                let _ = writeln!(out, "  R^2                 {}", value_text(r2));
            }
            if let Some(res) = &a.residual_norm_sq {
                let _ = writeln!(out, "  ||f - f_L||^2       {}", value_text(res));
            }
            if let Some(rs) = &a.normalized_indices {
                for (i, r) in rs.iter().enumerate() {
                    let _ = writeln!(out, "  {:<20}{}", format!("r(f,{})", i + 1), value_text(r));
                }
            }
        }
        if let Some(l) = &self.lovasz {
            out.push_str("\nLovász extension\n");
            let _ = writeln!(out, "  profile             {}", l.profile.join("  "));
            let _ = writeln!(out, "  Choquet capacity    {}", l.choquet_capacity);
            if let Some(m) = &l.mobius {
                let _ = writeln!(out, "  Möbius              {}", m.join("  "));
            }
            if let Some(s) = &l.symmetric_part {
                let _ = writeln!(out, "  symmetric part      {} + [{}] . x_()", s.constant, s.slopes.join(", "));
            }
            if let Some(d) = &l.equal_influence {
                let _ = writeln!(out, "  equal influence     {}", d.equal);
                let _ = writeln!(
                    out,
                    "    flat profile {}  arithmetic levels {}  higher Möbius vanish {}",
                    d.flat_profile, d.arithmetic_progression, d.vanishing_higher_mobius
                );
                if let Some(level) = d.first_violation() {
                    let _ = writeln!(out, "    first violation at level {level}");
                }
            }
        }
        if let Some(c) = &self.crosscheck {
            let _ = writeln!(out, "\ncrosscheck k = {}", c.k);
            if let Some(r) = &c.reference {
                let _ = writeln!(
                    out,
                    "  reference ({})  {:.15}  {}",
                    r.method,
                    r.value,
                    r.rational.as_deref().unwrap_or("")
                );
            }
            for e in &c.estimates {
                let _ = writeln!(out, "  {:<24} {:>20.15}  se {:.3e}", e.estimator, e.value, e.se);
            }
            for p in &c.pairs {
                let z = p.z.map(|z| format!("{z:+.3}")).unwrap_or_else(|| "inf".into());
                let _ = writeln!(out, "  z({}, {}) = {}", p.a, p.b, z);
            }
            let _ = writeln!(out, "  {} (|z| <= {})", if c.agree { "agree" } else { "DISAGREE" }, c.threshold);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn value_text(v: &ValueReport) -> String {
    let mut s = format!("{:.15}", v.value);
    if let Some(r) = &v.rational {
        let _ = write!(s, "  ({r})");
    }
    if let Some(se) = v.se {
        let _ = write!(s, "  ± {se:.3e}");
    }
    s
}
