//! Conformal-projective and α-conformal changes of statistical structure.
//!
//! Transforms compose evaluators at the jet level (chain rule through
//! e^{φ+ψ}, dφ, grad_g ψ) rather than materializing new expression trees,
//! so derivative exactness is preserved. `emit_transformed` separately
//! materializes a closed-form spec for the kinds where that is possible.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{eval_jet2, Jet1, Jet2};
use crate::spec::{ConnectionSpec, ManifoldSpec, MetricSpec};
use crate::structure::{inverse_jets, GammaJets, MetricEval, MetricJets, StatisticalStructure};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum TransformParams {
    /// ḡ = e^{φ+ψ} g; ∇̄_X Y = ∇_X Y + dφ(X)Y + dφ(Y)X - g(X,Y) grad_g ψ.
    Cp { phi: Expr, psi: Expr },
    /// ḡ = e^φ g; the ∇ change interpolated by α.
    Alpha { alpha: f64, phi: Expr },
}

/// (grad_g ψ)^k with first derivatives, from the base metric jets.
fn grad_field_jet1(g: &MetricJets, psi_jet: &Jet2, p: &[f64]) -> Result<Vec<Jet1>> {
    let n = g.n;
    let ginv = inverse_jets(g, p)?;
    Ok((0..n)
        .map(|k| {
            let mut acc = Jet1::zero(n);
            for l in 0..n {
                acc = acc.add(&ginv[k * n + l].mul(&psi_jet.partial_jet1(l)));
            }
            acc
        })
        .collect())
}

fn scaled_metric_eval(
    s: &StatisticalStructure,
    scale_exponent: Expr,
) -> MetricEval {
    let base = s.metric_eval();
    let n = s.dim();
    Arc::new(move |p: &[f64]| {
        let g = base(p)?;
        let factor = eval_jet2(&scale_exponent, p)?.exp();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(factor.mul(g.get(i, j)));
            }
        }
        Ok(MetricJets::from_raw(n, data))
    })
}

/// Conformal-projective change by (φ, ψ).
pub fn cp_transform(
    s: &StatisticalStructure,
    phi: &Expr,
    psi: &Expr,
) -> Result<StatisticalStructure> {
    let n = s.dim();
    check_params_dim(n, &[phi, psi])?;
    let metric = scaled_metric_eval(s, Expr::add(phi.clone(), psi.clone()));

    let base_metric = s.metric_eval();
    let base_conn = s.connection_eval();
    let (phi, psi) = (phi.clone(), psi.clone());
    let connection = Arc::new(move |p: &[f64]| -> Result<GammaJets> {
        let g = base_metric(p)?;
        let gamma = base_conn(p)?;
        let phi_jet = eval_jet2(&phi, p)?;
        let psi_jet = eval_jet2(&psi, p)?;
        let grad_psi = grad_field_jet1(&g, &psi_jet, p)?;
        let mut out = GammaJets::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = gamma.get(k, i, j).clone();
                    if k == j {
                        v = v.add(&phi_jet.partial_jet1(i));
                    }
                    if k == i {
                        v = v.add(&phi_jet.partial_jet1(j));
                    }
                    v = v.sub(&g.get(i, j).to_jet1().mul(&grad_psi[k]));
                    out.set(k, i, j, v);
                }
            }
        }
        Ok(out)
    });

    Ok(StatisticalStructure::from_evaluators(
        n,
        s.domain().to_vec(),
        metric,
        connection,
    ))
}

/// α-conformal change by φ.
pub fn alpha_transform(
    s: &StatisticalStructure,
    alpha: f64,
    phi: &Expr,
) -> Result<StatisticalStructure> {
    let n = s.dim();
    check_params_dim(n, &[phi])?;
    let metric = scaled_metric_eval(s, phi.clone());

    let base_metric = s.metric_eval();
    let base_conn = s.connection_eval();
    let phi = phi.clone();
    let c_grad = (1.0 + alpha) / 2.0;
    let c_sym = (1.0 - alpha) / 2.0;
    let connection = Arc::new(move |p: &[f64]| -> Result<GammaJets> {
        let g = base_metric(p)?;
        let gamma = base_conn(p)?;
        let phi_jet = eval_jet2(&phi, p)?;
        let grad_phi = grad_field_jet1(&g, &phi_jet, p)?;
        let mut out = GammaJets::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = gamma.get(k, i, j).clone();
                    v = v.sub(&g.get(i, j).to_jet1().mul(&grad_phi[k]).scale(c_grad));
                    if k == j {
                        v = v.add(&phi_jet.partial_jet1(i).scale(c_sym));
                    }
                    if k == i {
                        v = v.add(&phi_jet.partial_jet1(j).scale(c_sym));
                    }
                    out.set(k, i, j, v);
                }
            }
        }
        Ok(out)
    });

    Ok(StatisticalStructure::from_evaluators(
        n,
        s.domain().to_vec(),
        metric,
        connection,
    ))
}

/// The α = 1 change is the conformal-projective change with (φ, ψ) = (0, φ).
/// No embedding is claimed for any other α.
pub fn one_conformal_embed(alpha: f64, phi: &Expr) -> Result<(Expr, Expr)> {
    if alpha != 1.0 {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    Ok((Expr::constant(0.0), phi.clone()))
}

fn check_params_dim(n: usize, exprs: &[&Expr]) -> Result<()> {
    for e in exprs {
        let m = e.max_coord();
        if m > n {
            return Err(Error::CoordOutOfRange { index: m, dim: n });
        }
    }
    Ok(())
}

/// Try to materialize the transformed structure as a spec file. Succeeds
/// when the base connection has closed-form coefficients (flat or explicit)
/// and the metric-gradient term is symbolically invertible (diagonal metric)
/// or absent; otherwise the composed evaluator is flagged non-serializable.
pub fn emit_transformed(spec: &ManifoldSpec, params: &TransformParams) -> Result<ManifoldSpec> {
    let n = spec.dimension;
    let base_metric = crate::structure::lower_metric(spec)?;

    let (scale, phi, grad_coeff, sym_coeff, grad_field) = match params {
        TransformParams::Cp { phi, psi } => (
            Expr::add(phi.clone(), psi.clone()),
            phi.clone(),
            1.0,
            1.0,
            psi.clone(),
        ),
        TransformParams::Alpha { alpha, phi } => (
            phi.clone(),
            phi.clone(),
            (1.0 + alpha) / 2.0,
            (1.0 - alpha) / 2.0,
            phi.clone(),
        ),
    };

    let metric_components: Vec<Vec<String>> = base_metric
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| Expr::mul(Expr::Exp(Box::new(scale.clone())), e.clone()).to_string())
                .collect()
        })
        .collect();

    let base_gamma: Vec<Vec<Vec<Expr>>> = match &spec.connection {
        ConnectionSpec::Flat => vec![vec![vec![Expr::constant(0.0); n]; n]; n],
        ConnectionSpec::Coefficients { components } => {
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
        _ => {
            return Err(Error::NonSerializable(
                "base connection has no closed-form coefficients".into(),
            ))
        }
    };

    // (grad field)^k symbolically: needs g^{-1}, supported for diagonal
    // metrics. Skipped entirely when the field term has zero weight or the
    // field is constant.
    let needs_grad = grad_coeff != 0.0 && (0..n).any(|i| !grad_field.diff(i).is_zero());
    let grad_exprs: Option<Vec<Expr>> = if needs_grad {
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || base_metric[i][j].is_zero()));
        if !diagonal {
            return Err(Error::NonSerializable(
                "grad term needs a symbolic inverse metric; metric is not diagonal".into(),
            ));
        }
        Some(
            (0..n)
                .map(|k| Expr::div(grad_field.diff(k), base_metric[k][k].clone()))
                .collect(),
        )
    } else {
        None
    };

    let mut conn = vec![vec![vec![String::new(); n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut e = base_gamma[k][i][j].clone();
                if k == j {
                    e = Expr::add(e, Expr::mul(Expr::constant(sym_coeff), phi.diff(i)));
                }
                if k == i {
                    e = Expr::add(e, Expr::mul(Expr::constant(sym_coeff), phi.diff(j)));
                }
                if let Some(grad) = &grad_exprs {
                    e = Expr::sub(
                        e,
                        Expr::mul(
                            Expr::constant(grad_coeff),
                            Expr::mul(base_metric[i][j].clone(), grad[k].clone()),
                        ),
                    );
                }
                let text = e.to_string();
                conn[k][i][j] = text.clone();
                conn[k][j][i] = text;
            }
        }
    }

    Ok(ManifoldSpec {
        dimension: n,
        domain: spec.domain.clone(),
        metric: MetricSpec::ClosedForm {
            components: metric_components,
        },
        connection: ConnectionSpec::Coefficients { components: conn },
    })
}
