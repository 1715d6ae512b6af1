//! Command-line front end. Exit codes: 0 = all checks within tolerance,
//! 1 = a mathematical check failed, 2 = input or spec error. Reports go to
//! stdout (or `--out`); timing and diagnostics go to stderr.

use crate::conformal::{cp_duality_residual, flatness_report, w_at, w_direct_at, FlatnessVerdict};
use crate::curvature::{
    bundle_at, constant_curvature_fit, dual_curvature_residual, sigma_duality_residual,
};
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::gallery;
use crate::report::RunReport;
use crate::spec::ManifoldSpec;
use crate::structure::{build_structure, validate_structure, StatisticalStructure};
use crate::transform::{alpha_transform, cp_transform, emit_transformed, TransformParams};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Parser, Debug)]
#[command(
    name = "statcurv",
    about = "Numerical laboratory for statistical manifolds: dual connections, curvature, and conformal-projective flatness"
)]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the statistical-manifold requirements on sampled points.
    Validate {
        /// `gallery:<name>` or a spec file path.
        spec: String,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Curvature tensors and scalars at one chart point.
    Curvature {
        spec: String,
        /// Comma-separated coordinates, e.g. `0.1,0,-0.2,0`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Run the identity suite: sigma_eq, rr_star, ww_star, w_forms.
    Identities {
        spec: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Conformal-projective flatness decision.
    Flatness {
        spec: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Fail (exit 1) when the verdict differs.
        #[arg(long, value_parser = ["flat", "not_flat", "undetermined"])]
        expect: Option<String>,
    },
    /// Apply a conformal-projective or α-conformal change.
    Transform {
        spec: String,
        #[command(flatten)]
        params: TransformArgs,
        /// Re-emit the transformed structure as a spec file when it has a
        /// closed form; reported as non-serializable otherwise.
        #[arg(long)]
        emit: Option<std::path::PathBuf>,
    },
    /// Built-in example structures.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(long)]
    phi: String,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long, conflicts_with = "psi", allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum GalleryAction {
    /// List the canonical entry names.
    List,
    /// Write the canonical spec file for an entry.
    Emit { name: String },
}

/// Entry point shared by main() and the test harness.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with exit 0 internally.
            if e.use_stderr() {
                eprintln!("{}", e);
                return 2;
            }
            print!("{}", e);
            return 0;
        }
    };
    crate::exec::init_thread_cap_from_env();
    let started = std::time::Instant::now();
    let out = cli.out.clone();
    match execute(cli) {
        Ok((code, body)) => {
            match &out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body + "\n") {
                        eprintln!("error: {}", e);
                        return 2;
                    }
                }
                None => println!("{}", body),
            }
            eprintln!("wall time: {:.1} ms", started.elapsed().as_secs_f64() * 1e3);
            code
        }
        Err(e) => {
            eprintln!("error: {}", e);
            2
        }
    }
}

fn load_spec(reference: &str) -> Result<ManifoldSpec> {
    if let Some(name) = reference.strip_prefix("gallery:") {
        Ok(gallery::lookup(name)?.spec)
    } else {
        let text = std::fs::read_to_string(reference)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn build(reference: &str) -> Result<(ManifoldSpec, StatisticalStructure)> {
    let spec = load_spec(reference)?;
    let s = build_structure(&spec)?;
    Ok((spec, s))
}

fn execute(cli: Cli) -> Result<(i32, String)> {
    match cli.command {
        Command::Validate { spec, points, tol } => {
            let (mspec, s) = build(&spec)?;
            let sample = s.sample_points(points);
            let v = validate_structure(&s, &sample, tol)?;
            let mut report = RunReport::new(format!("validate {}", spec), spec, &mspec);
            report.points = points;
            report.push_residual("torsion", v.max_torsion, tol);
            report.push_residual("codazzi", v.max_codazzi, tol);
            report.push_residual("dual_torsion", v.max_dual_torsion, tol);
            report
                .verdicts
                .insert("spd".into(), if v.spd_ok { "pass" } else { "fail" }.into());
            report
                .verdicts
                .insert("valid".into(), if v.pass { "pass" } else { "fail" }.into());
            let code = i32::from(!(v.pass));
            Ok((code, report.to_json()))
        }
        Command::Curvature { spec, at } => {
            let (mspec, s) = build(&spec)?;
            let p: Vec<f64> = at
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::BadSpec(format!("bad coordinate `{}`", t)))
                })
                .collect::<Result<_>>()?;
            let body = curvature_report(&mspec, &spec, &s, &p)?;
            Ok((0, body))
        }
        Command::Identities {
            spec,
            seed,
            points,
            trials,
            tol,
        } => {
            let (mspec, s) = build(&spec)?;
            let mut report = RunReport::new(
                format!(
                    "identities {} --seed {} --points {} --trials {}",
                    spec, seed, points, trials
                ),
                spec,
                &mspec,
            );
            report.seed = seed;
            report.points = points;
            report.trials = trials;
            let sample = s.sample_points(points);

            report.push_residual("sigma_eq", sigma_duality_residual(&s, &sample)?, tol);

            let mut rr: f64 = 0.0;
            let mut ww: f64 = 0.0;
            let mut forms: f64 = 0.0;
            for p in &sample {
                rr = rr.max(dual_curvature_residual(&s, p, trials, seed)?);
                ww = ww.max(cp_duality_residual(&s, p, trials, seed)?);
                forms = forms.max(w_at(&s, p)?.max_abs_diff(&w_direct_at(&s, p)?));
            }
            report.push_residual("rr_star", rr, tol);
            report.push_residual("ww_star", ww, tol);
            report.push_residual("w_forms", forms, tol);
            let code = i32::from(!report.all_pass());
            Ok((code, report.to_json()))
        }
        Command::Flatness {
            spec,
            tol,
            points,
            trials,
            seed,
            expect,
        } => {
            let (mspec, s) = build(&spec)?;
            let fr = flatness_report(&s, points, trials, tol, seed)?;
            let verdict = match fr.verdict {
                FlatnessVerdict::Flat => "flat",
                FlatnessVerdict::NotFlat => "not_flat",
                FlatnessVerdict::Undetermined => "undetermined",
            };
            let mut report = RunReport::new(
                format!(
                    "flatness {} --tol {} --points {} --trials {} --seed {}",
                    spec, tol, points, trials, seed
                ),
                spec,
                &mspec,
            );
            report.seed = seed;
            report.points = points;
            report.trials = trials;
            report.push_residual("w_max", fr.max_residual, tol);
            report.verdicts.insert("flatness".into(), verdict.into());
            let code = match expect {
                Some(e) => i32::from(e != verdict),
                None => 0,
            };
            Ok((code, report.to_json()))
        }
        Command::Transform { spec, params, emit } => {
            let mspec = load_spec(&spec)?;
            let s = build_structure(&mspec)?;
            let n = s.dim();
            let phi = parse_expression(&params.phi, n)?;
            let tp = match (params.alpha, &params.psi) {
                (Some(alpha), None) => TransformParams::Alpha { alpha, phi },
                (None, Some(psi)) => TransformParams::Cp {
                    phi,
                    psi: parse_expression(psi, n)?,
                },
                (None, None) => TransformParams::Cp {
                    phi,
                    psi: Expr::constant(0.0),
                },
                (Some(_), Some(_)) => {
                    return Err(Error::BadSpec("--alpha conflicts with --psi".into()))
                }
            };
            let transformed = match &tp {
                TransformParams::Cp { phi, psi } => cp_transform(&s, phi, psi)?,
                TransformParams::Alpha { alpha, phi } => alpha_transform(&s, *alpha, phi)?,
            };
            let tol = 1e-9;
            let v = validate_structure(&transformed, &transformed.sample_points(20), tol)?;
            let mut report = RunReport::new(format!("transform {}", spec), spec, &mspec);
            report.points = 20;
            report.push_residual("torsion", v.max_torsion, tol);
            report.push_residual("codazzi", v.max_codazzi, tol);
            report.push_residual("dual_torsion", v.max_dual_torsion, tol);
            report
                .verdicts
                .insert("valid".into(), if v.pass { "pass" } else { "fail" }.into());
            // Informational only: W is not claimed to be invariant under
            // these changes, so the measured drift never affects the exit
            // code.
            let mut w_change: f64 = 0.0;
            for p in transformed.sample_points(20) {
                let before = w_at(&s, &p)?;
                let after = w_at(&transformed, &p)?;
                w_change = w_change.max(before.max_abs_diff(&after));
            }
            report
                .verdicts
                .insert("w_change_max".into(), format!("{:.6e}", w_change));
            if let Some(path) = emit {
                match emit_transformed(&mspec, &tp) {
                    Ok(out_spec) => {
                        std::fs::write(&path, out_spec.to_canonical_json() + "\n")?;
                        report
                            .verdicts
                            .insert("emit".into(), format!("written:{}", path.display()));
                    }
                    Err(Error::NonSerializable(why)) => {
                        report
                            .verdicts
                            .insert("emit".into(), format!("non_serializable: {}", why));
                    }
                    Err(e) => return Err(e),
                }
            }
            let code = i32::from(!v.pass);
            Ok((code, report.to_json()))
        }
        Command::Gallery { action } => match action {
            GalleryAction::List => Ok((0, gallery::canonical_names().join("\n"))),
            GalleryAction::Emit { name } => {
                let entry = gallery::lookup(&name)?;
                Ok((0, entry.spec.to_canonical_json()))
            }
        },
    }
}

#[derive(Serialize)]
struct CurvatureReport {
    command: String,
    spec: String,
    fingerprint: String,
    point: Vec<f64>,
    g: Vec<Vec<f64>>,
    g_inv: Vec<Vec<f64>>,
    gamma: Vec<Vec<Vec<f64>>>,
    gamma_star: Vec<Vec<Vec<f64>>>,
    cubic: Vec<Vec<Vec<f64>>>,
    ricci: Vec<Vec<f64>>,
    ricci_star: Vec<Vec<f64>>,
    sigma: f64,
    sigma_star: f64,
    riemann_max_abs: f64,
    constant_curvature: BTreeMap<String, f64>,
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn tensor3_rows(t: &crate::tensor::Tensor3) -> Vec<Vec<Vec<f64>>> {
    (0..t.n)
        .map(|k| {
            (0..t.n)
                .map(|i| (0..t.n).map(|j| t.get(k, i, j)).collect())
                .collect()
        })
        .collect()
}

fn curvature_report(
    mspec: &ManifoldSpec,
    spec_ref: &str,
    s: &StatisticalStructure,
    p: &[f64],
) -> Result<String> {
    let tensors = s.point_tensors_at(p)?;
    let b = bundle_at(s, p)?;
    let fit = constant_curvature_fit(s, &s.sample_points(20))?;
    let mut constant_curvature = BTreeMap::new();
    constant_curvature.insert("k".into(), fit.k);
    constant_curvature.insert("residual".into(), fit.residual);
    let report = CurvatureReport {
        command: format!("curvature {} --at {:?}", spec_ref, p),
        spec: spec_ref.to_string(),
        fingerprint: crate::report::fingerprint(mspec),
        point: p.to_vec(),
        g: matrix_rows(&tensors.g),
        g_inv: matrix_rows(&tensors.g_inv),
        gamma: tensor3_rows(&tensors.gamma),
        gamma_star: tensor3_rows(&tensors.gamma_star),
        cubic: tensor3_rows(&tensors.cubic),
        ricci: matrix_rows(&b.ricci),
        ricci_star: matrix_rows(&b.ricci_star),
        sigma: b.sigma,
        sigma_star: b.sigma_star,
        riemann_max_abs: b.riemann.max_abs(),
        constant_curvature,
    };
    Ok(serde_json::to_string_pretty(&report)?)
}
