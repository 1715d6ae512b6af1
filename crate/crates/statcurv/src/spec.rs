//! Serializable manifold descriptions. Canonical encoding is JSON with
//! keys `dimension`, `domain`, `metric` {kind, ...}, `connection`
//! {kind, ...}; all component functions are expression strings in the DSL
//! grammar documented in [`crate::expr`].

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifoldSpec {
    pub dimension: usize,
    /// Per-axis [lo, hi] chart box.
    pub domain: Vec<[f64; 2]>,
    pub metric: MetricSpec,
    pub connection: ConnectionSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    /// Explicit symmetric n x n matrix of expressions.
    ClosedForm { components: Vec<Vec<String>> },
    /// g = factor * identity.
    Conformal { factor: String },
    /// g = Hessian of a convex potential.
    Potential { potential: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConnectionSpec {
    /// All coefficients identically zero in this chart.
    Flat,
    /// Metric connection of `metric`.
    LeviCivita,
    /// Explicit coefficients[k][i][j] = Γ^k_ij, symmetric in i,j.
    Coefficients { components: Vec<Vec<Vec<String>>> },
    /// Totally symmetric cubic field C_kij; Γ = Γ^LC - (1/2) g^{-1} C.
    Cubic { components: Vec<Vec<Vec<String>>> },
}

impl ManifoldSpec {
    pub fn to_canonical_json(&self) -> String {
        // serde_json preserves struct field order; this string is the
        // fingerprint input and the `gallery emit` file content.
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }
}
