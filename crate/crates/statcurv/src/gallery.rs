//! Built-in example structures: space forms, dually flat exponential-family
//! structures, and Codazzi-preserving seeded perturbations. These are the
//! corpus every test suite runs against.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::sample::split_rng;
use crate::spec::{ConnectionSpec, ManifoldSpec, MetricSpec};
use crate::structure::lower_metric;
use rand::Rng;
use serde::Serialize;

/// Amplitude and seed of the perturbed entries exposed by name
/// (`perturbed_<family><n>`); frozen so tests never depend on unrecorded
/// randomness.
pub const FROZEN_PERTURB_AMPLITUDE: f64 = 0.4;
pub const FROZEN_PERTURB_SEED: u64 = 7;

#[derive(Debug, Clone, Serialize)]
pub struct Expected {
    pub k: f64,
    pub sigma: f64,
    pub flat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GalleryEntry {
    pub name: String,
    pub spec: ManifoldSpec,
    pub expected: Option<Expected>,
}

pub const FAMILIES: [&str; 5] = [
    "euclidean",
    "poincare_ball",
    "sphere_stereographic",
    "exp_family",
    "hessian_potential",
];

/// Construct a gallery entry. `psi` is only consulted by
/// `hessian_potential`; σ expectations use σ = n(n-1)K.
pub fn construct(family: &str, n: usize, psi: Option<&str>) -> Result<GalleryEntry> {
    if n < 2 {
        return Err(Error::BadSpec(format!("gallery dimension {} < 2", n)));
    }
    let nn = n as f64;
    let (spec, expected) = match family {
        "euclidean" => (
            ManifoldSpec {
                dimension: n,
                domain: vec![[-1.0, 1.0]; n],
                metric: MetricSpec::Conformal { factor: "1".into() },
                connection: ConnectionSpec::Flat,
            },
            Some(Expected {
                k: 0.0,
                sigma: 0.0,
                flat: true,
            }),
        ),
        "poincare_ball" => (
            ManifoldSpec {
                dimension: n,
                // Box kept well inside the unit ball: |x|^2 <= n * 0.4^2.
                domain: vec![[-0.4, 0.4]; n],
                metric: MetricSpec::Conformal {
                    factor: "4/pow(1-normsq,2)".into(),
                },
                connection: ConnectionSpec::LeviCivita,
            },
            Some(Expected {
                k: -1.0,
                sigma: -nn * (nn - 1.0),
                flat: true,
            }),
        ),
        "sphere_stereographic" => (
            ManifoldSpec {
                dimension: n,
                domain: vec![[-0.8, 0.8]; n],
                metric: MetricSpec::Conformal {
                    factor: "4/pow(1+normsq,2)".into(),
                },
                connection: ConnectionSpec::LeviCivita,
            },
            Some(Expected {
                k: 1.0,
                sigma: nn * (nn - 1.0),
                flat: true,
            }),
        ),
        "exp_family" => (
            ManifoldSpec {
                dimension: n,
                domain: vec![[-1.0, 1.0]; n],
                metric: MetricSpec::Potential {
                    potential: (1..=n)
                        .map(|i| format!("exp(x{})", i))
                        .collect::<Vec<_>>()
                        .join(" + "),
                },
                connection: ConnectionSpec::Flat,
            },
            Some(Expected {
                k: 0.0,
                sigma: 0.0,
                flat: true,
            }),
        ),
        "hessian_potential" => {
            let potential =
                psi.ok_or_else(|| Error::BadSpec("hessian_potential requires a potential".into()))?;
            (
                ManifoldSpec {
                    dimension: n,
                    domain: vec![[-1.0, 1.0]; n],
                    metric: MetricSpec::Potential {
                        potential: potential.to_string(),
                    },
                    connection: ConnectionSpec::Flat,
                },
                None,
            )
        }
        _ => {
            return Err(Error::BadSpec(format!(
                "unknown gallery family `{}` (known: {:?})",
                family, FAMILIES
            )))
        }
    };
    Ok(GalleryEntry {
        name: format!("{}{}", family, n),
        spec,
        expected,
    })
}

/// Codazzi-preserving perturbation: a conformal bump multiplies the metric
/// and a random totally symmetric low-order cubic field C replaces the
/// base's own ∇g, both scaled by `amplitude`. The connection is rebuilt as
/// Γ = Γ^LC - (1/2) g^{-1} C, so the output is a statistical structure by
/// construction; amplitude = 0 reproduces the base exactly.
pub fn perturb(entry: &GalleryEntry, amplitude: f64, rng_seed: u64) -> Result<GalleryEntry> {
    let n = entry.spec.dimension;
    let mut rng = split_rng(rng_seed, 0x9e37);

    // Bump factor exp(amplitude * Σ d_m x_m): SPD is preserved for free.
    let bump = {
        let terms: Vec<String> = (1..=n)
            .map(|i| format!("{:.6}*x{}", rng.gen_range(-1.0..1.0), i))
            .collect();
        format!("exp({:.6}*({}))", amplitude, terms.join(" + "))
    };
    let base_metric = lower_metric(&entry.spec)?;
    let metric_components: Vec<Vec<String>> = base_metric
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    if e.is_zero() {
                        "0".to_string()
                    } else {
                        format!("{}*({})", bump, e)
                    }
                })
                .collect()
        })
        .collect();

    // Base cubic field ∇g in closed form. Γ = Γ^LC - (1/2) g^{-1} C holds
    // for every statistical structure, so expressing the base this way is
    // exact: flat connections have C = ∂g, Levi-Civita has C = 0.
    let base_cubic: Vec<Vec<Vec<Expr>>> = match &entry.spec.connection {
        ConnectionSpec::LeviCivita => {
            vec![vec![vec![Expr::constant(0.0); n]; n]; n]
        }
        ConnectionSpec::Flat => (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| base_metric[i][j].diff(k)).collect())
                    .collect()
            })
            .collect(),
        ConnectionSpec::Cubic { components } => {
            let mut out = vec![vec![vec![Expr::constant(0.0); n]; n]; n];
            for (k, a) in components.iter().enumerate() {
                for (i, r) in a.iter().enumerate() {
                    for (j, s) in r.iter().enumerate() {
                        out[k][i][j] = crate::expr::parse_expression(s, n)?;
                    }
                }
            }
            out
        }
        ConnectionSpec::Coefficients { .. } => {
            return Err(Error::BadSpec(
                "perturb does not support raw-coefficient connections".into(),
            ))
        }
    };

    // Random totally symmetric constant+linear field, one draw per sorted
    // index triple, copied to all permutations.
    let mut cubic_strings = vec![vec![vec![String::new(); n]; n]; n];
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                let c0: f64 = rng.gen_range(-1.0..1.0);
                let lin: Vec<String> = (1..=n)
                    .map(|i| format!("{:.6}*x{}", rng.gen_range(-1.0..1.0), i))
                    .collect();
                let rand_part = format!("{:.6}*({:.6} + {})", amplitude, c0, lin.join(" + "));
                for (k, i, j) in [
                    (a, b, c),
                    (a, c, b),
                    (b, a, c),
                    (b, c, a),
                    (c, a, b),
                    (c, b, a),
                ] {
                    let base = &base_cubic[k][i][j];
                    cubic_strings[k][i][j] = if base.is_zero() {
                        rand_part.clone()
                    } else {
                        format!("{} + {}", base, rand_part)
                    };
                }
            }
        }
    }

    Ok(GalleryEntry {
        name: format!("perturbed_{}", entry.name),
        spec: ManifoldSpec {
            dimension: n,
            domain: entry.spec.domain.clone(),
            metric: MetricSpec::ClosedForm {
                components: metric_components,
            },
            connection: ConnectionSpec::Cubic {
                components: cubic_strings,
            },
        },
        expected: None,
    })
}

/// Resolve a `gallery:<name>` reference: a family name with the dimension
/// as suffix (`poincare_ball4`), optionally prefixed `perturbed_` for the
/// frozen seeded perturbation.
pub fn lookup(name: &str) -> Result<GalleryEntry> {
    let (perturbed, rest) = match name.strip_prefix("perturbed_") {
        Some(r) => (true, r),
        None => (false, name),
    };
    let trimmed = rest.trim_end_matches(|c: char| c.is_ascii_digit());
    let digits = &rest[trimmed.len()..];
    let n: usize = digits
        .parse()
        .map_err(|_| Error::BadSpec(format!("gallery name `{}` lacks a dimension suffix", name)))?;
    let entry = construct(trimmed, n, None)?;
    if perturbed {
        perturb(&entry, FROZEN_PERTURB_AMPLITUDE, FROZEN_PERTURB_SEED)
    } else {
        Ok(entry)
    }
}

/// Names accepted by `gallery emit` at the canonical dimension 4.
pub fn canonical_names() -> Vec<String> {
    let mut names: Vec<String> = FAMILIES
        .iter()
        .filter(|f| **f != "hessian_potential")
        .map(|f| format!("{}4", f))
        .collect();
    let perturbed: Vec<String> = names.iter().map(|n| format!("perturbed_{}", n)).collect();
    names.extend(perturbed);
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{build_structure, validate_structure};

    #[test]
    fn all_entries_validate() {
        for name in canonical_names() {
            let entry = lookup(&name).unwrap();
            let s = build_structure(&entry.spec).unwrap();
            let report = validate_structure(&s, &s.sample_points(20), 1e-9).unwrap();
            assert!(report.pass, "{}: {:?}", name, report);
        }
    }

    #[test]
    fn zero_amplitude_perturbation_is_identity() {
        let base = construct("exp_family", 4, None).unwrap();
        let same = perturb(&base, 0.0, 3).unwrap();
        let s0 = build_structure(&base.spec).unwrap();
        let s1 = build_structure(&same.spec).unwrap();
        for p in s0.sample_points(10) {
            let (g0, _) = s0.metric_at(&p).unwrap();
            let (g1, _) = s1.metric_at(&p).unwrap();
            assert!((&g0 - &g1).abs().max() < 1e-12);
            let a = s0.gamma_at(&p, crate::structure::Which::Primal).unwrap();
            let b = s1.gamma_at(&p, crate::structure::Which::Primal).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn exp_family_is_non_self_dual_but_dually_flat() {
        let entry = construct("exp_family", 4, None).unwrap();
        let s = build_structure(&entry.spec).unwrap();
        let origin_ish = vec![1e-9; 4]; // strictly interior
        let c = s.cubic_at(&origin_ish).unwrap();
        assert!(c.max_abs() >= 0.5);
    }

    #[test]
    fn unknown_family_rejected() {
        assert!(construct("elliptic", 4, None).is_err());
        assert!(lookup("poincare_ball").is_err()); // missing dimension
    }

    #[test]
    fn lookup_is_deterministic() {
        let a = lookup("perturbed_euclidean4").unwrap();
        let b = lookup("perturbed_euclidean4").unwrap();
        assert_eq!(a.spec, b.spec);
    }
}
