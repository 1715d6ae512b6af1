//! The conformal-projective curvature tensor W, its ingredients L, L*,
//! their sharps, the dual tensor W*, the W/W* duality residual, and the
//! flatness decision.
//!
//! Two independent assemblies of W are kept permanently: `w_at` follows
//! the compact L-based expression and is the production path; `w_direct_at`
//! assembles the raw definition with the (n-1)Ric + Ric* groupings and the
//! σ term. On valid statistical structures they agree because σ = σ*.

use crate::curvature::{bundle_at, sharp, CurvatureBundle};
use crate::error::{Error, Result};
use crate::exec::map_items;
use crate::sample::{random_direction, split_rng};
use crate::structure::{StatisticalStructure, Which};
use crate::tensor::Tensor4;
use nalgebra::DMatrix;
use serde::Serialize;

/// L, L*, their sharp forms, and both conformal-projective tensors at a point.
#[derive(Debug, Clone)]
pub struct CPTensors {
    pub l: DMatrix<f64>,
    pub l_star: DMatrix<f64>,
    pub l_sharp: DMatrix<f64>,
    pub l_star_sharp: DMatrix<f64>,
    pub w: Tensor4,
    pub w_star: Tensor4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatnessVerdict {
    Flat,
    NotFlat,
    /// The characterization of flatness by W = 0 is stated for n >= 4.
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    pub max_residual: f64,
    pub points: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub verdict: FlatnessVerdict,
}

fn require_dim(s: &StatisticalStructure, required: usize) -> Result<()> {
    if s.dim() < required {
        Err(Error::Dimension {
            required,
            actual: s.dim(),
        })
    } else {
        Ok(())
    }
}

/// L = (1/(n-2)) { (1/n)[(n-1)Ric + Ric*] - (σ/(2(n-1))) g }; the dual
/// tensor L* swaps Ric with Ric* and uses σ*.
pub fn l_at(s: &StatisticalStructure, p: &[f64], which: Which) -> Result<DMatrix<f64>> {
    require_dim(s, 3)?;
    let (g, _) = s.metric_at(p)?;
    let b = bundle_at(s, p)?;
    Ok(match which {
        Which::Primal => l_from(&b.ricci, &b.ricci_star, b.sigma, &g),
        Which::Dual => l_from(&b.ricci_star, &b.ricci, b.sigma_star, &g),
    })
}

fn l_from(
    ric: &DMatrix<f64>,
    ric_star: &DMatrix<f64>,
    sigma: f64,
    g: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = g.nrows() as f64;
    let mix = ric.map(|x| (n - 1.0) * x) + ric_star;
    (mix.map(|x| x / n) - g.map(|x| sigma / (2.0 * (n - 1.0)) * x)).map(|x| x / (n - 2.0))
}

/// Raise the first slot of a bilinear form: g(sharp(X), Y) = bilinear(X, Y).
pub fn sharp_at(
    s: &StatisticalStructure,
    p: &[f64],
    bilinear: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (_, ginv) = s.metric_at(p)?;
    Ok(sharp(&ginv, bilinear))
}

/// All conformal-projective tensors at a point. W* is W of the dual
/// structure: swapping Γ with Γ* swaps Ric with Ric* and L with L*.
pub fn cp_tensors_at(s: &StatisticalStructure, p: &[f64]) -> Result<CPTensors> {
    require_dim(s, 3)?;
    let (g, ginv) = s.metric_at(p)?;
    let b = bundle_at(s, p)?;
    let l = l_from(&b.ricci, &b.ricci_star, b.sigma, &g);
    let l_star = l_from(&b.ricci_star, &b.ricci, b.sigma_star, &g);
    let l_sharp = sharp(&ginv, &l);
    let l_star_sharp = sharp(&ginv, &l_star);
    let w = assemble_w(&b.riemann, &l, &l_star_sharp, &g);
    let w_star = assemble_w(&b.riemann_star, &l_star, &l_sharp, &g);
    Ok(CPTensors {
        l,
        l_star,
        l_sharp,
        l_star_sharp,
        w,
        w_star,
    })
}

/// W(X,Y)Z = R(X,Y)Z + Y L(X,Z) - X L(Y,Z) + L*♯(Y) g(X,Z) - L*♯(X) g(Y,Z),
/// in components with X = ∂_i, Y = ∂_j, Z = ∂_k:
/// W^l_kij = R^l_kij + δ^l_j L_ik - δ^l_i L_jk + (L*♯)^l_j g_ik - (L*♯)^l_i g_jk.
fn assemble_w(
    riemann: &Tensor4,
    l: &DMatrix<f64>,
    l_star_sharp: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> Tensor4 {
    let n = riemann.n;
    let mut w = Tensor4::zeros(n);
    for lidx in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = riemann.get(lidx, k, i, j);
                    if lidx == j {
                        v += l[(i, k)];
                    }
                    if lidx == i {
                        v -= l[(j, k)];
                    }
                    v += l_star_sharp[(lidx, j)] * g[(i, k)];
                    v -= l_star_sharp[(lidx, i)] * g[(j, k)];
                    w.set(lidx, k, i, j, v);
                }
            }
        }
    }
    w
}

/// Production path for W (the compact L-based form).
pub fn w_at(s: &StatisticalStructure, p: &[f64]) -> Result<Tensor4> {
    Ok(cp_tensors_at(s, p)?.w)
}

/// Independent assembly of W straight from the defining formula, with the
/// raw (n-1)Ric + Ric* groupings and σ (not the symmetrized (σ+σ*)/2).
/// Kept as a permanent in-repo cross-check of `w_at`.
pub fn w_direct_at(s: &StatisticalStructure, p: &[f64]) -> Result<Tensor4> {
    require_dim(s, 3)?;
    let nf = s.dim() as f64;
    let n = s.dim();
    let (g, _) = s.metric_at(p)?;
    let CurvatureBundle {
        riemann,
        ricci,
        ricci_star,
        ricci_op,
        ricci_star_op,
        sigma,
        ..
    } = bundle_at(s, p)?;

    // A_xz = (n-1) Ric(X,Z) + Ric*(X,Z);  B = (n-1) Ric*♯ + Ric♯.
    let a = ricci.map(|x| (nf - 1.0) * x) + &ricci_star;
    let b_op = ricci_star_op.map(|x| (nf - 1.0) * x) + &ricci_op;
    let c1 = 1.0 / (nf * (nf - 2.0));
    let c2 = sigma / ((nf - 1.0) * (nf - 2.0));

    let mut w = Tensor4::zeros(n);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = riemann.get(l, k, i, j);
                    if l == j {
                        v += c1 * a[(i, k)];
                        v -= c2 * g[(i, k)];
                    }
                    if l == i {
                        v -= c1 * a[(j, k)];
                        v += c2 * g[(j, k)];
                    }
                    v += c1 * (b_op[(l, j)] * g[(i, k)] - b_op[(l, i)] * g[(j, k)]);
                    w.set(l, k, i, j, v);
                }
            }
        }
    }
    Ok(w)
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

fn pair(t: &Tensor4, g: &DMatrix<f64>, x: &[f64], y: &[f64], z: &[f64], u: &[f64]) -> f64 {
    let n = t.n;
    let mut acc = 0.0;
    for l in 0..n {
        let mut comp = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    comp += t.get(l, k, i, j) * x[i] * y[j] * z[k];
                }
            }
        }
        for m in 0..n {
            acc += g[(l, m)] * comp * u[m];
        }
    }
    acc
}

/// Max over random g-unit quadruples of |g(W(X,Y)Z,U) + g(W*(X,Y)U,Z)|.
/// The identity holds for every statistical structure, flat or not.
pub fn cp_duality_residual(
    s: &StatisticalStructure,
    p: &[f64],
    trials: usize,
    rng_seed: u64,
) -> Result<f64> {
    require_dim(s, 3)?;
    let (g, _) = s.metric_at(p)?;
    let t = cp_tensors_at(s, p)?;
    let n = s.dim();
    let mut rng = split_rng(rng_seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut vecs: Vec<Vec<f64>> = (0..4).map(|_| random_direction(&mut rng, n)).collect();
        for v in vecs.iter_mut() {
            g_normalize(&g, v);
        }
        let (x, y, z, u) = (&vecs[0], &vecs[1], &vecs[2], &vecs[3]);
        let lhs = pair(&t.w, &g, x, y, z, u);
        let rhs = pair(&t.w_star, &g, x, y, u, z);
        worst = worst.max((lhs + rhs).abs());
    }
    Ok(worst)
}

/// Sample low-discrepancy points and random g-unit quadruples; residual is
/// max |g(W(X,Y)Z,U)| (already chart-scale invariant since the vectors are
/// g-unit). Verdict is `Undetermined` for n < 4 regardless of residual.
pub fn flatness_report(
    s: &StatisticalStructure,
    points: usize,
    trials: usize,
    tol: f64,
    rng_seed: u64,
) -> Result<FlatnessReport> {
    require_dim(s, 3)?;
    let n = s.dim();
    let sample = s.sample_points(points);
    let indexed: Vec<(usize, Vec<f64>)> = sample.into_iter().enumerate().collect();
    let per_point = map_items(&indexed, |(idx, p)| -> Result<f64> {
        let (g, _) = s.metric_at(p)?;
        let t = cp_tensors_at(s, p)?;
        let mut rng = split_rng(rng_seed, *idx as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let mut vecs: Vec<Vec<f64>> = (0..4).map(|_| random_direction(&mut rng, n)).collect();
            for v in vecs.iter_mut() {
                g_normalize(&g, v);
            }
            worst = worst.max(pair(&t.w, &g, &vecs[0], &vecs[1], &vecs[2], &vecs[3]).abs());
        }
        Ok(worst)
    });

    let mut max_residual: f64 = 0.0;
    for r in per_point {
        max_residual = max_residual.max(r?);
    }
    let verdict = if n < 4 {
        FlatnessVerdict::Undetermined
    } else if max_residual <= tol {
        FlatnessVerdict::Flat
    } else {
        FlatnessVerdict::NotFlat
    };
    Ok(FlatnessReport {
        max_residual,
        points,
        trials,
        tolerance: tol,
        verdict,
    })
}
