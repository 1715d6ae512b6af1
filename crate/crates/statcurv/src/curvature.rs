//! Curvature of ∇ and ∇*: Riemann tensors, Ricci tensors and operators,
//! scalar curvatures, the σ = σ* check, the R/R* pairing identity, and
//! constant-curvature detection.
//!
//! Sign convention: R(X,Y)Z = ∇_X ∇_Y Z - ∇_Y ∇_X Z in a coordinate frame,
//! so R^l_kij = ∂_i Γ^l_jk - ∂_j Γ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik.
//! Ricci contracts the direction slot: Ric_jk = R^i_kij, which makes the
//! sphere carry K = +1 and Ric = (n-1) K g on space forms.

use crate::error::Result;
use crate::exec::map_items;
use crate::sample::{random_direction, split_rng};
use crate::structure::{StatisticalStructure, Which};
use crate::tensor::Tensor4;
use nalgebra::DMatrix;

/// Everything the conformal-projective formulas consume at one point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub riemann: Tensor4,
    pub riemann_star: Tensor4,
    pub ricci: DMatrix<f64>,
    pub ricci_star: DMatrix<f64>,
    pub ricci_op: DMatrix<f64>,
    pub ricci_star_op: DMatrix<f64>,
    pub sigma: f64,
    pub sigma_star: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConstantCurvatureFit {
    pub k: f64,
    pub residual: f64,
}

pub fn riemann_at(s: &StatisticalStructure, p: &[f64], which: Which) -> Result<Tensor4> {
    let gamma = s.gamma_jets(p, which)?;
    let n = s.dim();
    let mut r = Tensor4::zeros(n);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..=i {
                    if i == j {
                        continue;
                    }
                    let mut v = gamma.get(l, j, k).grad[i] - gamma.get(l, i, k).grad[j];
                    for m in 0..n {
                        v += gamma.get(l, i, m).value * gamma.get(m, j, k).value;
                        v -= gamma.get(l, j, m).value * gamma.get(m, i, k).value;
                    }
                    r.set(l, k, i, j, v);
                    r.set(l, k, j, i, -v);
                }
            }
        }
    }
    Ok(r)
}

/// Ric_jk = tr{X -> R(X, ∂_j)∂_k} = Σ_i R^i_kij.
pub fn ricci_from_riemann(r: &Tensor4) -> DMatrix<f64> {
    let n = r.n;
    DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| r.get(i, k, i, j)).sum())
}

pub fn ricci_at(s: &StatisticalStructure, p: &[f64], which: Which) -> Result<DMatrix<f64>> {
    Ok(ricci_from_riemann(&riemann_at(s, p, which)?))
}

/// Ricci operator: g(Ric♯ X, Y) = Ric(X, Y), i.e. (Ric♯)^m_j = g^{my} Ric_jy.
pub fn ricci_operator_at(
    s: &StatisticalStructure,
    p: &[f64],
    which: Which,
) -> Result<DMatrix<f64>> {
    let (_, ginv) = s.metric_at(p)?;
    let ric = ricci_at(s, p, which)?;
    Ok(sharp(&ginv, &ric))
}

/// (B♯)^m_j = g^{my} B_jy for a bilinear form B (first slot = column j input).
pub fn sharp(ginv: &DMatrix<f64>, bilinear: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ginv.nrows();
    DMatrix::from_fn(n, n, |m, j| {
        (0..n).map(|y| ginv[(m, y)] * bilinear[(j, y)]).sum()
    })
}

pub fn scalar_at(s: &StatisticalStructure, p: &[f64], which: Which) -> Result<f64> {
    let (_, ginv) = s.metric_at(p)?;
    let ric = ricci_at(s, p, which)?;
    Ok(scalar_from(&ginv, &ric))
}

fn scalar_from(ginv: &DMatrix<f64>, ric: &DMatrix<f64>) -> f64 {
    let n = ginv.nrows();
    (0..n)
        .map(|j| (0..n).map(|k| ginv[(j, k)] * ric[(j, k)]).sum::<f64>())
        .sum()
}

pub fn bundle_at(s: &StatisticalStructure, p: &[f64]) -> Result<CurvatureBundle> {
    let (_, ginv) = s.metric_at(p)?;
    let riemann = riemann_at(s, p, Which::Primal)?;
    let riemann_star = riemann_at(s, p, Which::Dual)?;
    let ricci = ricci_from_riemann(&riemann);
    let ricci_star = ricci_from_riemann(&riemann_star);
    let sigma = scalar_from(&ginv, &ricci);
    let sigma_star = scalar_from(&ginv, &ricci_star);
    Ok(CurvatureBundle {
        ricci_op: sharp(&ginv, &ricci),
        ricci_star_op: sharp(&ginv, &ricci_star),
        riemann,
        riemann_star,
        ricci,
        ricci_star,
        sigma,
        sigma_star,
    })
}

/// Max over the sample of |σ - σ*| / (1 + |σ|); the two scalar curvatures
/// of a statistical structure always coincide.
pub fn sigma_duality_residual(s: &StatisticalStructure, sample: &[Vec<f64>]) -> Result<f64> {
    let per_point = map_items(sample, |p| -> Result<f64> {
        let sigma = scalar_at(s, p, Which::Primal)?;
        let sigma_star = scalar_at(s, p, Which::Dual)?;
        Ok((sigma - sigma_star).abs() / (1.0 + sigma.abs()))
    });
    let mut worst: f64 = 0.0;
    for r in per_point {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// g(R(X,Y)Z, U) for component tensors, with g-unit random vectors.
fn pair_with_metric(
    r: &Tensor4,
    g: &DMatrix<f64>,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    u: &[f64],
) -> f64 {
    let n = r.n;
    let mut acc = 0.0;
    for l in 0..n {
        let mut w_l = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    w_l += r.get(l, k, i, j) * x[i] * y[j] * z[k];
                }
            }
        }
        for m in 0..n {
            acc += g[(l, m)] * w_l * u[m];
        }
    }
    acc
}

fn g_normalize(g: &DMatrix<f64>, v: &mut [f64]) {
    let n = v.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += g[(i, j)] * v[i] * v[j];
        }
    }
    let s = q.sqrt();
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Max over `trials` random g-unit quadruples at `p` of
/// Max over random g-unit quadruples of |g(R(X,Y)Z,U) + g(R*(X,Y)U,Z)|;
/// the pairing vanishes identically for dual connections.
pub fn dual_curvature_residual(
    s: &StatisticalStructure,
    p: &[f64],
    trials: usize,
    rng_seed: u64,
) -> Result<f64> {
    let (g, _) = s.metric_at(p)?;
    let r = riemann_at(s, p, Which::Primal)?;
    let r_star = riemann_at(s, p, Which::Dual)?;
    let n = s.dim();
    let mut rng = split_rng(rng_seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut vecs: Vec<Vec<f64>> = (0..4).map(|_| random_direction(&mut rng, n)).collect();
        for v in vecs.iter_mut() {
            g_normalize(&g, v);
        }
        let (x, y, z, u) = (&vecs[0], &vecs[1], &vecs[2], &vecs[3]);
        let lhs = pair_with_metric(&r, &g, x, y, z, u);
        let rhs = pair_with_metric(&r_star, &g, x, y, u, z);
        worst = worst.max((lhs + rhs).abs());
    }
    Ok(worst)
}

/// Least-squares K in R^l_kij ≈ K (g_jk δ^l_i - g_ik δ^l_j) over the
/// sample; residual is the max absolute deviation from the fitted pattern.
pub fn constant_curvature_fit(
    s: &StatisticalStructure,
    sample: &[Vec<f64>],
) -> Result<ConstantCurvatureFit> {
    let n = s.dim();
    let per_point = map_items(sample, |p| -> Result<(Tensor4, Tensor4)> {
        let r = riemann_at(s, p, Which::Primal)?;
        let (g, _) = s.metric_at(p)?;
        let mut pattern = Tensor4::zeros(n);
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 0.0;
                        if l == i {
                            v += g[(j, k)];
                        }
                        if l == j {
                            v -= g[(i, k)];
                        }
                        pattern.set(l, k, i, j, v);
                    }
                }
            }
        }
        Ok((r, pattern))
    });

    let mut num = 0.0;
    let mut den = 0.0;
    let mut tensors = Vec::with_capacity(sample.len());
    for item in per_point {
        let (r, pattern) = item?;
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        num += r.get(l, k, i, j) * pattern.get(l, k, i, j);
                        den += pattern.get(l, k, i, j) * pattern.get(l, k, i, j);
                    }
                }
            }
        }
        tensors.push((r, pattern));
    }
    let k_fit = if den > 0.0 { num / den } else { 0.0 };

    let mut residual: f64 = 0.0;
    for (r, pattern) in &tensors {
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        residual = residual
                            .max((r.get(l, k, i, j) - k_fit * pattern.get(l, k, i, j)).abs());
                    }
                }
            }
        }
    }
    Ok(ConstantCurvatureFit { k: k_fit, residual })
}
