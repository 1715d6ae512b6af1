//! Statistical structures (g, ∇): construction from a [`ManifoldSpec`],
//! pointwise evaluation with exact derivatives, the dual connection ∇*,
//! the cubic tensor C = ∇g, and sampled validation.
//!
//! Index convention, fixed repo-wide: the contravariant index is stored
//! first, Γ^k_ij = gamma.get(k, i, j), and ∇_{∂_i} ∂_j = Γ^k_ij ∂_k.

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::jet::{eval_jet2, Jet1, Jet2};
use crate::sample::low_discrepancy_points;
use crate::spec::{ConnectionSpec, ManifoldSpec, MetricSpec};
use crate::tensor::Tensor3;
use nalgebra::DMatrix;
use std::sync::Arc;

/// n x n matrix of second-order jets (the metric with ∂g and ∂∂g).
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub n: usize,
    data: Vec<Jet2>,
}

impl MetricJets {
    /// `data` is row-major n x n, already symmetric.
    pub fn from_raw(n: usize, data: Vec<Jet2>) -> MetricJets {
        debug_assert_eq!(data.len(), n * n);
        MetricJets { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet2 {
        &self.data[i * self.n + j]
    }

    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).value)
    }
}

/// Connection coefficients with exact first derivatives: (k, i, j) -> Γ^k_ij.
#[derive(Debug, Clone)]
pub struct GammaJets {
    pub n: usize,
    data: Vec<Jet1>,
}

impl GammaJets {
    pub fn zeros(n: usize) -> GammaJets {
        GammaJets {
            n,
            data: vec![Jet1::zero(n); n * n * n],
        }
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Jet1 {
        &self.data[(k * self.n + i) * self.n + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: Jet1) {
        self.data[(k * self.n + i) * self.n + j] = v;
    }

    pub fn values(&self) -> Tensor3 {
        let mut t = Tensor3::zeros(self.n);
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    t.set(k, i, j, self.get(k, i, j).value);
                }
            }
        }
        t
    }
}

/// Which connection of the dual pair an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Primal,
    Dual,
}

pub(crate) type MetricEval = Arc<dyn Fn(&[f64]) -> Result<MetricJets> + Send + Sync>;
pub(crate) type GammaEval = Arc<dyn Fn(&[f64]) -> Result<GammaJets> + Send + Sync>;

/// An evaluable (g, ∇) pair. Immutable after construction; all `*_at`
/// methods are pure and safe to call from parallel sweeps.
#[derive(Clone)]
pub struct StatisticalStructure {
    dim: usize,
    domain: Vec<(f64, f64)>,
    spec: Option<ManifoldSpec>,
    metric: MetricEval,
    connection: GammaEval,
}

/// Pointwise component arrays of the structure and its dual.
#[derive(Debug, Clone)]
pub struct PointTensors {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub gamma: Tensor3,
    pub gamma_star: Tensor3,
    pub cubic: Tensor3,
}

/// Max residuals over a sample; verdict criteria per check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub points: usize,
    pub spd_ok: bool,
    pub max_torsion: f64,
    pub max_codazzi: f64,
    pub max_dual_torsion: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn build_structure(spec: &ManifoldSpec) -> Result<StatisticalStructure> {
    let n = spec.dimension;
    if n < 2 {
        return Err(Error::BadSpec(format!("dimension must be >= 2, got {}", n)));
    }
    if spec.domain.len() != n {
        return Err(Error::BadSpec(format!(
            "domain has {} axes, dimension is {}",
            spec.domain.len(),
            n
        )));
    }
    for ax in &spec.domain {
        if !ax[0].is_finite() || !ax[1].is_finite() || ax[0] >= ax[1] {
            return Err(Error::BadSpec(format!("degenerate domain axis {:?}", ax)));
        }
    }

    let metric_exprs = lower_metric(spec)?;
    let metric = make_metric_eval(metric_exprs, n);
    let connection = make_connection_eval(spec, &metric, n)?;

    Ok(StatisticalStructure {
        dim: n,
        domain: spec.domain.iter().map(|a| (a[0], a[1])).collect(),
        spec: Some(spec.clone()),
        metric,
        connection,
    })
}

/// All metric kinds collapse to an n x n Expr matrix: conformal puts the
/// factor on the diagonal, potential takes exact symbolic second partials.
pub fn lower_metric(spec: &ManifoldSpec) -> Result<Vec<Vec<Expr>>> {
    let n = spec.dimension;
    match &spec.metric {
        MetricSpec::ClosedForm { components } => {
            if components.len() != n || components.iter().any(|r| r.len() != n) {
                return Err(Error::BadSpec("metric matrix shape != n x n".into()));
            }
            let mut m = Vec::with_capacity(n);
            for row in components {
                let mut r = Vec::with_capacity(n);
                for s in row {
                    r.push(parse_expression(s, n)?);
                }
                m.push(r);
            }
            for i in 0..n {
                for j in 0..i {
                    if m[i][j] != m[j][i] {
                        return Err(Error::BadSpec(format!(
                            "metric not symmetric as written: g[{}][{}] != g[{}][{}]",
                            i, j, j, i
                        )));
                    }
                }
            }
            Ok(m)
        }
        MetricSpec::Conformal { factor } => {
            let f = parse_expression(factor, n)?;
            Ok((0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                f.clone()
                            } else {
                                Expr::constant(0.0)
                            }
                        })
                        .collect()
                })
                .collect())
        }
        MetricSpec::Potential { potential } => {
            let psi = parse_expression(potential, n)?;
            Ok((0..n)
                .map(|i| (0..n).map(|j| psi.diff(i).diff(j)).collect())
                .collect())
        }
    }
}

fn make_metric_eval(exprs: Vec<Vec<Expr>>, n: usize) -> MetricEval {
    Arc::new(move |p: &[f64]| {
        let mut data = vec![Jet2::constant(0.0, n); n * n];
        for i in 0..n {
            for j in i..n {
                let jet = eval_jet2(&exprs[i][j], p)?;
                data[j * n + i] = jet.clone();
                data[i * n + j] = jet;
            }
        }
        Ok(MetricJets { n, data })
    })
}

fn make_connection_eval(spec: &ManifoldSpec, metric: &MetricEval, n: usize) -> Result<GammaEval> {
    match &spec.connection {
        ConnectionSpec::Flat => Ok(Arc::new(move |_p: &[f64]| Ok(GammaJets::zeros(n)))),
        ConnectionSpec::LeviCivita => {
            let metric = Arc::clone(metric);
            Ok(Arc::new(move |p: &[f64]| {
                let g = metric(p)?;
                levi_civita_jets(&g, p)
            }))
        }
        ConnectionSpec::Coefficients { components } => {
            let exprs = parse_cube(components, n)?;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..i {
                        if exprs[k][i][j] != exprs[k][j][i] {
                            return Err(Error::Torsion(format!(
                                "Γ^{}_{}{} != Γ^{}_{}{} as written",
                                k + 1,
                                i + 1,
                                j + 1,
                                k + 1,
                                j + 1,
                                i + 1
                            )));
                        }
                    }
                }
            }
            Ok(Arc::new(move |p: &[f64]| {
                let mut jets = GammaJets::zeros(n);
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            jets.set(k, i, j, eval_jet2(&exprs[k][i][j], p)?.to_jet1());
                        }
                    }
                }
                Ok(jets)
            }))
        }
        ConnectionSpec::Cubic { components } => {
            let exprs = parse_cube(components, n)?;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let c = &exprs[k][i][j];
                        if *c != exprs[k][j][i] || *c != exprs[i][k][j] || *c != exprs[j][i][k] {
                            return Err(Error::BadSpec(format!(
                                "cubic field not totally symmetric as written at ({},{},{})",
                                k + 1,
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
            let metric = Arc::clone(metric);
            Ok(Arc::new(move |p: &[f64]| {
                let g = metric(p)?;
                let lc = levi_civita_jets(&g, p)?;
                let ginv = inverse_jets(&g, p)?;
                let mut jets = GammaJets::zeros(n);
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            // Γ^k_ij = Γ^LC,k_ij - (1/2) g^{km} C_ijm
                            let mut corr = Jet1::zero(n);
                            for m in 0..n {
                                let c = eval_jet2(&exprs[i][j][m], p)?.to_jet1();
                                corr = corr.add(&ginv[k * n + m].mul(&c));
                            }
                            jets.set(k, i, j, lc.get(k, i, j).sub(&corr.scale(0.5)));
                        }
                    }
                }
                Ok(jets)
            }))
        }
    }
}

fn parse_cube(components: &[Vec<Vec<String>>], n: usize) -> Result<Vec<Vec<Vec<Expr>>>> {
    if components.len() != n
        || components.iter().any(|a| a.len() != n)
        || components.iter().flatten().any(|r| r.len() != n)
    {
        return Err(Error::BadSpec("connection array shape != n x n x n".into()));
    }
    components
        .iter()
        .map(|a| {
            a.iter()
                .map(|r| r.iter().map(|s| parse_expression(s, n)).collect())
                .collect()
        })
        .collect()
}

/// Inverse metric with first derivatives: ∂(g^{-1}) = -g^{-1} (∂g) g^{-1}.
/// Returned flat, entry (i, j) at [i * n + j].
pub fn inverse_jets(g: &MetricJets, p: &[f64]) -> Result<Vec<Jet1>> {
    let n = g.n;
    let values = g.values();
    let chol = values
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotSpd { point: p.to_vec() })?;
    let inv = chol.inverse();
    let mut out = vec![Jet1::zero(n); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut grad = vec![0.0; n];
            for (a, ga) in grad.iter_mut().enumerate() {
                let mut s = 0.0;
                for m in 0..n {
                    for q in 0..n {
                        s -= inv[(i, m)] * g.get(m, q).grad[a] * inv[(q, j)];
                    }
                }
                *ga = s;
            }
            out[i * n + j] = Jet1 {
                value: inv[(i, j)],
                grad,
            };
        }
    }
    Ok(out)
}

/// Γ^k_ij = (1/2) g^{kl} (∂_i g_jl + ∂_j g_il - ∂_l g_ij), with exact
/// first derivatives (consumes ∂∂g through the metric jets).
pub fn levi_civita_jets(g: &MetricJets, p: &[f64]) -> Result<GammaJets> {
    let n = g.n;
    let ginv = inverse_jets(g, p)?;
    let mut out = GammaJets::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet1::zero(n);
                for l in 0..n {
                    let term = g
                        .get(j, l)
                        .partial_jet1(i)
                        .add(&g.get(i, l).partial_jet1(j))
                        .sub(&g.get(i, j).partial_jet1(l));
                    acc = acc.add(&ginv[k * n + l].mul(&term));
                }
                out.set(k, i, j, acc.scale(0.5));
            }
        }
    }
    Ok(out)
}

/// Dual coefficients from the duality equation
/// ∂_k g_ij = Γ^l_ki g_lj + Γ*^l_kj g_il, solved as
/// Γ*^l_kj = g^{li} (∂_k g_ij - Γ^m_ki g_mj).
pub fn dual_gamma_jets(g: &MetricJets, gamma: &GammaJets, p: &[f64]) -> Result<GammaJets> {
    let n = g.n;
    let ginv = inverse_jets(g, p)?;
    let mut out = GammaJets::zeros(n);
    for l in 0..n {
        for k in 0..n {
            for j in 0..n {
                let mut acc = Jet1::zero(n);
                for i in 0..n {
                    let mut inner = g.get(i, j).partial_jet1(k);
                    for m in 0..n {
                        inner = inner.sub(&gamma.get(m, k, i).mul(&g.get(m, j).to_jet1()));
                    }
                    acc = acc.add(&ginv[l * n + i].mul(&inner));
                }
                out.set(l, k, j, acc);
            }
        }
    }
    Ok(out)
}

impl StatisticalStructure {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// The spec this structure was built from; None for composed
    /// (transformed or dual) structures, which have no closed form.
    pub fn spec(&self) -> Option<&ManifoldSpec> {
        self.spec.as_ref()
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::OutsideDomain { point: p.to_vec() });
        }
        for (x, (lo, hi)) in p.iter().zip(&self.domain) {
            if !(x > lo && x < hi) {
                return Err(Error::OutsideDomain { point: p.to_vec() });
            }
        }
        Ok(())
    }

    pub fn metric_jets(&self, p: &[f64]) -> Result<MetricJets> {
        self.check_point(p)?;
        (self.metric)(p)
    }

    /// Connection jets of ∇ or ∇*.
    pub fn gamma_jets(&self, p: &[f64], which: Which) -> Result<GammaJets> {
        self.check_point(p)?;
        match which {
            Which::Primal => (self.connection)(p),
            Which::Dual => {
                let g = (self.metric)(p)?;
                let gamma = (self.connection)(p)?;
                dual_gamma_jets(&g, &gamma, p)
            }
        }
    }

    /// The dual statistical structure (M, g, ∇*), as a composed evaluator.
    pub fn dual(&self) -> StatisticalStructure {
        let metric = Arc::clone(&self.metric);
        let metric2 = Arc::clone(&self.metric);
        let conn = Arc::clone(&self.connection);
        StatisticalStructure {
            dim: self.dim,
            domain: self.domain.clone(),
            spec: None,
            metric,
            connection: Arc::new(move |p: &[f64]| {
                let g = metric2(p)?;
                let gamma = conn(p)?;
                dual_gamma_jets(&g, &gamma, p)
            }),
        }
    }

    /// Build a composed structure from raw evaluators (used by transforms).
    pub(crate) fn from_evaluators(
        dim: usize,
        domain: Vec<(f64, f64)>,
        metric: MetricEval,
        connection: GammaEval,
    ) -> StatisticalStructure {
        StatisticalStructure {
            dim,
            domain,
            spec: None,
            metric,
            connection,
        }
    }

    pub(crate) fn metric_eval(&self) -> MetricEval {
        Arc::clone(&self.metric)
    }

    pub(crate) fn connection_eval(&self) -> GammaEval {
        Arc::clone(&self.connection)
    }

    /// (g, g^{-1}) at p; the inverse goes through Cholesky, so failure
    /// doubles as the SPD check.
    pub fn metric_at(&self, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let g = self.metric_jets(p)?;
        let values = g.values();
        let inv = values
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotSpd { point: p.to_vec() })?
            .inverse();
        Ok((values, inv))
    }

    pub fn levi_civita_at(&self, p: &[f64]) -> Result<Tensor3> {
        let g = self.metric_jets(p)?;
        Ok(levi_civita_jets(&g, p)?.values())
    }

    pub fn gamma_at(&self, p: &[f64], which: Which) -> Result<Tensor3> {
        Ok(self.gamma_jets(p, which)?.values())
    }

    pub fn dual_connection_at(&self, p: &[f64]) -> Result<Tensor3> {
        self.gamma_at(p, Which::Dual)
    }

    /// Cubic tensor C_kij = (∇_k g)_ij = ∂_k g_ij - Γ^l_ki g_lj - Γ^l_kj g_il.
    /// Total symmetry is a validation concern, not enforced here.
    pub fn cubic_at(&self, p: &[f64]) -> Result<Tensor3> {
        let n = self.dim;
        let g = self.metric_jets(p)?;
        let gamma = self.gamma_jets(p, Which::Primal)?;
        let mut c = Tensor3::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = g.get(i, j).grad[k];
                    for l in 0..n {
                        v -= gamma.get(l, k, i).value * g.get(l, j).value;
                        v -= gamma.get(l, k, j).value * g.get(i, l).value;
                    }
                    c.set(k, i, j, v);
                }
            }
        }
        Ok(c)
    }

    /// Contravariant gradient (grad_g ψ)^k = g^{kl} ∂_l ψ.
    pub fn grad_scalar_at(&self, psi: &Expr, p: &[f64]) -> Result<Vec<f64>> {
        let (_, ginv) = self.metric_at(p)?;
        let jet = eval_jet2(psi, p)?;
        Ok((0..self.dim)
            .map(|k| (0..self.dim).map(|l| ginv[(k, l)] * jet.grad[l]).sum())
            .collect())
    }

    pub fn point_tensors_at(&self, p: &[f64]) -> Result<PointTensors> {
        let (g, g_inv) = self.metric_at(p)?;
        Ok(PointTensors {
            g,
            g_inv,
            gamma: self.gamma_at(p, Which::Primal)?,
            gamma_star: self.gamma_at(p, Which::Dual)?,
            cubic: self.cubic_at(p)?,
        })
    }

    /// Default low-discrepancy sample over the (shrunk) domain box.
    pub fn sample_points(&self, count: usize) -> Vec<Vec<f64>> {
        low_discrepancy_points(&self.domain, count)
    }
}

/// Sampled validation of the statistical-manifold requirements: SPD metric,
/// torsion-free ∇ and ∇*, and the Codazzi condition (C totally symmetric).
pub fn validate_structure(
    s: &StatisticalStructure,
    sample: &[Vec<f64>],
    tol: f64,
) -> Result<ValidationReport> {
    let per_point = crate::exec::map_items(sample, |p| -> Result<(bool, f64, f64, f64)> {
        let spd = s.metric_at(p).is_ok();
        if !spd {
            return Ok((false, f64::INFINITY, f64::INFINITY, f64::INFINITY));
        }
        let gamma = s.gamma_at(p, Which::Primal)?;
        let gamma_star = s.gamma_at(p, Which::Dual)?;
        let cubic = s.cubic_at(p)?;
        Ok((
            true,
            gamma.lower_asymmetry(),
            cubic.total_asymmetry(),
            gamma_star.lower_asymmetry(),
        ))
    });

    let mut report = ValidationReport {
        points: sample.len(),
        spd_ok: true,
        max_torsion: 0.0,
        max_codazzi: 0.0,
        max_dual_torsion: 0.0,
        tolerance: tol,
        pass: false,
    };
    for r in per_point {
        let (spd, torsion, codazzi, dual_torsion) = r?;
        report.spd_ok &= spd;
        report.max_torsion = report.max_torsion.max(torsion);
        report.max_codazzi = report.max_codazzi.max(codazzi);
        report.max_dual_torsion = report.max_dual_torsion.max(dual_torsion);
    }
    report.pass = report.spd_ok
        && report.max_torsion <= tol
        && report.max_codazzi <= tol
        && report.max_dual_torsion <= tol;
    Ok(report)
}
