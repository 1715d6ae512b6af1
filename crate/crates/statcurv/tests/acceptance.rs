//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a single pass/fail line with the measured quantity and pinned
//! tolerance, so a full run reads as a checklist:
//!
//! ```text
//! cargo test --test acceptance -- --nocapture --test-threads 1
//! ```

use rand::Rng;

use statcurv::conformal::{self, FlatnessVerdict};
use statcurv::curvature;
use statcurv::expr::{parse_expression, Expr};
use statcurv::gallery::{self, GalleryEntry, FROZEN_PERTURB_AMPLITUDE, FROZEN_PERTURB_SEED};
use statcurv::jet::eval_jet2;
use statcurv::sample::split_rng;
use statcurv::structure::{build_structure, validate_structure, StatisticalStructure, Which};
use statcurv::transform::{alpha_transform, cp_transform, one_conformal_embed};

const SEED: u64 = 42;

/// The hessian_potential family needs an explicit convex potential; this one
/// has a genuinely non-diagonal Hessian on [-1, 1]^4.
const TEST_POTENTIAL: &str = "exp(x1) + exp(x2) + exp(x3) + exp(x4) + 0.1 * pow(x1 + x2, 2)";

fn five_families() -> Vec<GalleryEntry> {
    vec![
        gallery::lookup("euclidean4").unwrap(),
        gallery::lookup("poincare_ball4").unwrap(),
        gallery::lookup("sphere_stereographic4").unwrap(),
        gallery::lookup("exp_family4").unwrap(),
        gallery::construct("hessian_potential", 4, Some(TEST_POTENTIAL)).unwrap(),
    ]
}

/// The five base families plus their frozen seeded perturbations.
fn ten_structures() -> Vec<(String, StatisticalStructure)> {
    let mut out = Vec::new();
    for entry in five_families() {
        let perturbed =
            gallery::perturb(&entry, FROZEN_PERTURB_AMPLITUDE, FROZEN_PERTURB_SEED).unwrap();
        out.push((entry.name.clone(), build_structure(&entry.spec).unwrap()));
        out.push((
            format!("perturbed_{}", entry.name),
            build_structure(&perturbed.spec).unwrap(),
        ));
    }
    out
}

fn report(criterion: u32, name: &str, pass: bool, details: &str) {
    println!(
        "acceptance {:02} {:<28} {} ({})",
        criterion,
        name,
        if pass { "PASS" } else { "FAIL" },
        details
    );
    assert!(
        pass,
        "criterion {} ({}) failed: {}",
        criterion, name, details
    );
}

#[test]
fn criterion_01_scalar_curvature_duality() {
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for (_, s) in ten_structures() {
        let sample = s.sample_points(20);
        worst = worst.max(curvature::sigma_duality_residual(&s, &sample).unwrap());
    }
    report(
        1,
        "sigma equals sigma-star",
        worst <= TOL,
        &format!(
            "max normalized |sigma - sigma*| = {:.3e} <= {:.0e}",
            worst, TOL
        ),
    );
}

#[test]
fn criterion_02_w_pairing_duality() {
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for (_, s) in ten_structures() {
        for (idx, p) in s.sample_points(10).iter().enumerate() {
            let r = conformal::cp_duality_residual(&s, p, 50, SEED + idx as u64).unwrap();
            worst = worst.max(r);
        }
    }
    report(
        2,
        "W/W-star pairing",
        worst <= TOL,
        &format!(
            "max |g(W(X,Y)Z,U) + g(W*(X,Y)U,Z)| = {:.3e} <= {:.0e}",
            worst, TOL
        ),
    );
}

#[test]
fn criterion_03_two_w_routes_agree() {
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for (_, s) in ten_structures() {
        for p in s.sample_points(10) {
            let w = conformal::w_at(&s, &p).unwrap();
            let w_direct = conformal::w_direct_at(&s, &p).unwrap();
            worst = worst.max(w.max_abs_diff(&w_direct));
        }
    }
    report(
        3,
        "W assembly routes",
        worst <= TOL,
        &format!("max componentwise route gap = {:.3e} <= {:.0e}", worst, TOL),
    );
}

#[test]
fn criterion_04_space_forms_flat_with_expected_k() {
    const FLAT_TOL: f64 = 1e-8;
    const K_TOL: f64 = 1e-8;
    const SIGMA_TOL: f64 = 1e-7;
    let cases = [
        ("euclidean4", 0.0),
        ("poincare_ball4", -1.0),
        ("sphere_stereographic4", 1.0),
        ("exp_family4", 0.0),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, k_expected) in cases {
        let s = build_structure(&gallery::lookup(name).unwrap().spec).unwrap();
        let flat = conformal::flatness_report(&s, 10, 50, FLAT_TOL, SEED).unwrap();
        let fit = curvature::constant_curvature_fit(&s, &s.sample_points(20)).unwrap();
        let mut max_sigma_err: f64 = 0.0;
        for p in s.sample_points(10) {
            let sigma = curvature::scalar_at(&s, &p, Which::Primal).unwrap();
            max_sigma_err = max_sigma_err.max((sigma - 12.0 * k_expected).abs());
        }
        let ok = flat.verdict == FlatnessVerdict::Flat
            && fit.residual <= K_TOL
            && (fit.k - k_expected).abs() <= K_TOL
            && max_sigma_err <= SIGMA_TOL;
        pass &= ok;
        details.push(format!(
            "{}: verdict {:?}, K = {:.3e} (want {}), fit residual {:.1e}, |sigma - 12K| {:.1e}",
            name, flat.verdict, fit.k, k_expected, fit.residual, max_sigma_err
        ));
    }
    report(4, "space forms are flat", pass, &details.join("; "));
}

#[test]
fn criterion_05_perturbed_euclidean_not_flat() {
    const FLAT_TOL: f64 = 1e-8;
    const FLOOR: f64 = 1e-3;
    const ID_TOL: f64 = 1e-9;
    let s = build_structure(&gallery::lookup("perturbed_euclidean4").unwrap().spec).unwrap();
    let flat = conformal::flatness_report(&s, 10, 50, FLAT_TOL, SEED).unwrap();

    let sigma = curvature::sigma_duality_residual(&s, &s.sample_points(20)).unwrap();
    let mut pairing: f64 = 0.0;
    for (idx, p) in s.sample_points(10).iter().enumerate() {
        pairing =
            pairing.max(conformal::cp_duality_residual(&s, p, 50, SEED + idx as u64).unwrap());
    }

    let pass = flat.verdict == FlatnessVerdict::NotFlat
        && flat.max_residual >= FLOOR
        && sigma <= ID_TOL
        && pairing <= ID_TOL;
    report(
        5,
        "negative control",
        pass,
        &format!(
            "verdict {:?}, W residual {:.3e} >= {:.0e}; identities still hold ({:.1e}, {:.1e})",
            flat.verdict, flat.max_residual, FLOOR, sigma, pairing
        ),
    );
}

#[test]
fn criterion_06_proof_chain_tensors() {
    const TOL: f64 = 1e-7;
    let cases = [
        ("euclidean4", 0.0),
        ("poincare_ball4", -1.0),
        ("sphere_stereographic4", 1.0),
    ];
    let mut worst: f64 = 0.0;
    for (name, k) in cases {
        let s = build_structure(&gallery::lookup(name).unwrap().spec).unwrap();
        for p in s.sample_points(10) {
            let (g, ginv) = s.metric_at(&p).unwrap();
            let ric = curvature::ricci_at(&s, &p, Which::Primal).unwrap();
            let l = conformal::l_at(&s, &p, Which::Primal).unwrap();
            let l_sharp = curvature::sharp(&ginv, &l);
            let n = s.dim() as f64;
            worst = worst.max((&ric - &g * ((n - 1.0) * k)).abs().max());
            worst = worst.max((&l - &g * (k / 2.0)).abs().max());
            let identity = nalgebra::DMatrix::<f64>::identity(s.dim(), s.dim());
            worst = worst.max((&l_sharp - identity * (k / 2.0)).abs().max());
        }
    }
    report(
        6,
        "Ric, L, L-sharp on space forms",
        worst <= TOL,
        &format!("max deviation = {:.3e} <= {:.0e}", worst, TOL),
    );
}

#[test]
fn criterion_07_alpha_one_embedding() {
    const EMBED_TOL: f64 = 1e-12;
    const CODAZZI_TOL: f64 = 1e-9;
    let phis = [
        "0.3 * x1",
        "0.2 * x1 * x2 - 0.1 * x3",
        "0.1 * sin(x1) + 0.1 * x4 * x4",
    ];
    let bases = ["euclidean4", "poincare_ball4", "exp_family4"];
    let mut worst_gap: f64 = 0.0;
    let mut worst_codazzi: f64 = 0.0;
    for base in bases {
        let s = build_structure(&gallery::lookup(base).unwrap().spec).unwrap();
        for phi_src in phis {
            let phi = parse_expression(phi_src, 4).unwrap();
            let via_alpha = alpha_transform(&s, 1.0, &phi).unwrap();
            let (cp_phi, cp_psi) = one_conformal_embed(1.0, &phi).unwrap();
            let via_cp = cp_transform(&s, &cp_phi, &cp_psi).unwrap();
            for p in s.sample_points(10) {
                let (ga, _) = via_alpha.metric_at(&p).unwrap();
                let (gc, _) = via_cp.metric_at(&p).unwrap();
                worst_gap = worst_gap.max((&ga - &gc).abs().max());
                let ca = via_alpha.gamma_at(&p, Which::Primal).unwrap();
                let cc = via_cp.gamma_at(&p, Which::Primal).unwrap();
                worst_gap = worst_gap.max(ca.max_abs_diff(&cc));
            }
            let v = validate_structure(&via_cp, &via_cp.sample_points(20), CODAZZI_TOL).unwrap();
            worst_codazzi = worst_codazzi.max(v.max_codazzi.max(v.max_torsion));
            assert!(
                v.pass,
                "transformed structure failed validation on {}",
                base
            );
        }
    }
    let pass = worst_gap <= EMBED_TOL && worst_codazzi <= CODAZZI_TOL;
    report(
        7,
        "alpha=1 embedding",
        pass,
        &format!(
            "max component gap = {:.3e} <= {:.0e}; max Codazzi defect = {:.3e} <= {:.0e}",
            worst_gap, EMBED_TOL, worst_codazzi, CODAZZI_TOL
        ),
    );
}

#[test]
fn criterion_08_flatness_preserved_by_cp_transforms() {
    const FLAT_TOL: f64 = 1e-8;
    let flat_entries = [
        "euclidean4",
        "poincare_ball4",
        "sphere_stereographic4",
        "exp_family4",
    ];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for name in flat_entries {
        let s = build_structure(&gallery::lookup(name).unwrap().spec).unwrap();
        for pair_idx in 0..2u64 {
            let (phi, psi) = seeded_pair(SEED + pair_idx, s.dim());
            let t = cp_transform(&s, &phi, &psi).unwrap();
            let flat = conformal::flatness_report(&t, 10, 50, FLAT_TOL, SEED).unwrap();
            worst = worst.max(flat.max_residual);
            pass &= flat.verdict == FlatnessVerdict::Flat;
        }
    }
    report(
        8,
        "flatness preservation",
        pass,
        &format!(
            "max W residual after transform = {:.3e} <= {:.0e}",
            worst, FLAT_TOL
        ),
    );
}

/// Random smooth (φ, ψ) with small linear-plus-quadratic coefficients.
fn seeded_pair(seed: u64, n: usize) -> (Expr, Expr) {
    let mut rng = split_rng(seed, 0);
    let build = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut e = Expr::constant(0.0);
        for i in 0..n {
            let c: f64 = rng.gen_range(-0.3..0.3);
            e = Expr::add(e, Expr::mul(Expr::constant(c), Expr::Coord(i)));
        }
        let c: f64 = rng.gen_range(-0.2..0.2);
        e = Expr::add(e, Expr::mul(Expr::constant(c), Expr::NormSq));
        e
    };
    let phi = build(&mut rng);
    let psi = build(&mut rng);
    (phi, psi)
}

#[test]
fn criterion_09_jets_match_finite_differences() {
    const H: f64 = 1e-4;
    const TOL: f64 = 1e-6;
    let n = 3;
    let mut rng = split_rng(SEED, 9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let expr = random_expr(&mut rng, n, 3);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let jet = match eval_jet2(&expr, &p) {
            Ok(j) if j.is_finite() => j,
            _ => continue,
        };
        let value_at = |q: &[f64]| eval_jet2(&expr, q).map(|j| j.value);
        for i in 0..n {
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[i] += H;
            lo[i] -= H;
            let (fh, fl) = match (value_at(&hi), value_at(&lo)) {
                (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => (a, b),
                _ => continue,
            };
            let fd = (fh - fl) / (2.0 * H);
            worst = worst.max((jet.grad[i] - fd).abs() / (1.0 + jet.grad[i].abs()));
            // Hessian row i from central differences of the AD gradient.
            let (jh, jl) = match (eval_jet2(&expr, &hi), eval_jet2(&expr, &lo)) {
                (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => (a, b),
                _ => continue,
            };
            for j in 0..n {
                let fd2 = (jh.grad[j] - jl.grad[j]) / (2.0 * H);
                let ad2 = jet.hess_at(i, j);
                worst = worst.max((ad2 - fd2).abs() / (1.0 + ad2.abs()));
            }
        }
    }
    report(
        9,
        "jets vs finite differences",
        worst <= TOL,
        &format!("max relative deviation = {:.3e} <= {:.0e}", worst, TOL),
    );
}

/// Random expression over `n` coordinates, built from operations that stay
/// finite and well-conditioned on (-1, 1)^n.
fn random_expr(rng: &mut rand_chacha::ChaCha8Rng, n: usize, depth: usize) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => Expr::Coord(rng.gen_range(0..n)),
            1 => Expr::constant(rng.gen_range(-2.0..2.0)),
            _ => Expr::NormSq,
        };
    }
    match rng.gen_range(0..8) {
        0 => Expr::add(
            random_expr(rng, n, depth - 1),
            random_expr(rng, n, depth - 1),
        ),
        1 => Expr::sub(
            random_expr(rng, n, depth - 1),
            random_expr(rng, n, depth - 1),
        ),
        2 => Expr::mul(
            random_expr(rng, n, depth - 1),
            random_expr(rng, n, depth - 1),
        ),
        3 => Expr::Sin(Box::new(random_expr(rng, n, depth - 1))),
        4 => Expr::Cos(Box::new(random_expr(rng, n, depth - 1))),
        5 => Expr::Exp(Box::new(Expr::mul(
            Expr::constant(0.3),
            random_expr(rng, n, depth - 1),
        ))),
        6 => Expr::pow(random_expr(rng, n, depth - 1), rng.gen_range(2..4)),
        // 4 + |x|^2 keeps division and sqrt away from their singularities.
        _ => {
            let safe = Expr::add(Expr::constant(4.0), Expr::NormSq);
            if rng.gen_bool(0.5) {
                Expr::div(random_expr(rng, n, depth - 1), safe)
            } else {
                Expr::Sqrt(Box::new(safe))
            }
        }
    }
}

#[test]
fn criterion_10_identities_reports_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_statcurv");
    let run = || {
        let out = std::process::Command::new(bin)
            .args([
                "identities",
                "gallery:perturbed_poincare_ball4",
                "--seed",
                "42",
                "--points",
                "5",
                "--trials",
                "10",
            ])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "identities run failed");
        out.stdout
    };
    let first = run();
    let second = run();
    let pass = first == second && !first.is_empty();
    report(
        10,
        "report determinism",
        pass,
        &format!(
            "two runs, {} bytes each, byte-identical = {}",
            first.len(),
            pass
        ),
    );
}
