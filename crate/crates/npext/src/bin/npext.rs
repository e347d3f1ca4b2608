//! Command-line front end: sampling, realization, extension with
//! verification, the Bergman linear extension, and the no-linear-extension
//! counterexample scans.  Every report embeds the config, tool version, and
//! tolerance set, and is byte-stable under a fixed seed.
//!
//! Exit codes: 0 success (for counterexample runs this includes
//! `violation_found: true`, the expected outcome); 1 check failure;
//! 2 input error; 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::json;

use npext::bergman::{
    apply_extension, build_bergman_operator, eval_poly, sublevel_estimate, BergmanProblem,
};
use npext::counterexample::{
    case2_witness, check_eqe5, contradiction_margin, eq8_gap, omega_fourier, CaseTag, SideArg,
};
use npext::domains::{sample_domain, Branch, DomainTag, SampleKind};
use npext::extension::{build_extension, verify_extension, RealizeParams, VarietyFunction};
use npext::schur::{realize, MatrixPolynomial};
use npext::Error;

#[derive(Parser)]
#[command(name = "npext", version, about = "Norm-preserving extensions from crossed discs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_domain(s: &str) -> Result<DomainTag, String> {
    match s {
        "g2" => Ok(DomainTag::G2),
        "diamond" => Ok(DomainTag::Diamond),
        other => Err(format!("unknown domain '{other}', expected g2 or diamond")),
    }
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected RE,IM, got '{s}'"));
    }
    let re = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(C64::new(re, im))
}

#[derive(Args)]
struct OutArg {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a reproducible batch of domain, boundary, or variety samples.
    Sample {
        #[arg(long, value_parser = parse_domain)]
        domain: DomainTag,
        #[arg(long, default_value = "interior")]
        kind: String,
        #[arg(short = 'n', long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Realize a matrix polynomial in the disc Schur class as a unitary
    /// colligation.
    Realize {
        /// Matrix polynomial JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 16)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Extend a crossed-disc variety function to the full domain and verify
    /// the restriction and the sup-norm estimate.
    Extend {
        #[arg(long, value_parser = parse_domain)]
        domain: DomainTag,
        /// Variety function JSON (domain tag, two branch polynomials).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Base-point parameter of the variety; only 0,0 is supported (other
        /// base points are holomorphically equivalent but not automated).
        #[arg(long, value_parser = parse_complex, default_value = "0,0")]
        beta: C64,
        /// Also export the extension data for later `eval`.
        #[arg(long)]
        export_extension: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluate an exported extension at a point of its domain.
    Eval {
        /// Extension JSON from `extend --export-extension`.
        #[arg(long)]
        extension: PathBuf,
        /// First coordinate as RE,IM.
        #[arg(long, value_parser = parse_complex)]
        z1: C64,
        /// Second coordinate as RE,IM.
        #[arg(long, value_parser = parse_complex)]
        z2: C64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Minimal-norm polynomial extension in a discretized weighted Bergman
    /// space.
    Bergman {
        #[arg(long, value_parser = parse_domain)]
        domain: DomainTag,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 2000)]
        domain_samples: usize,
        /// Variety samples per branch.
        #[arg(long, default_value_t = 8)]
        variety_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Scalar variety function JSON; defaults to the identity pair.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also write the sampled sublevel region as CSV.
        #[arg(long)]
        region_csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the no-linear-isometric-extension scans.
    Counterexample {
        /// Which base-point case: i (flat disc) or ii (royal disc).
        #[arg(long, default_value = "i")]
        case: String,
        #[arg(long, value_parser = parse_complex, default_value = "0.5,0")]
        lambda0: C64,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

fn write_output(out: &Option<PathBuf>, content: &str) -> npext::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => println!("{content}"),
    }
    Ok(())
}

fn report_header(config: serde_json::Value, tolerances: serde_json::Value) -> serde_json::Value {
    json!({
        "tool": "npext",
        "version": npext::VERSION,
        "config": config,
        "tolerances": tolerances,
    })
}

fn complex_json(z: C64) -> serde_json::Value {
    json!([z.re, z.im])
}

/// Exit classes: check failure (1), bad input (2), numerical failure (3).
fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalFailure(_)
        | Error::IllConditionedFeedback { .. }
        | Error::SingularEvaluation(_)
        | Error::OrderTooLow(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> npext::Result<u8> {
    match cli.command {
        Command::Sample {
            domain,
            kind,
            samples,
            seed,
            csv,
            out,
        } => {
            let kind = match kind.as_str() {
                "interior" => SampleKind::Interior,
                "boundary" => SampleKind::Boundary,
                "variety" => SampleKind::Variety,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown sample kind '{other}'"
                    )))
                }
            };
            let set = sample_domain(domain, samples, seed, kind);
            let content = if csv {
                set.to_csv()
            } else {
                serde_json::to_string_pretty(&set)?
            };
            write_output(&out.out, &content)?;
            Ok(0)
        }
        Command::Realize {
            input,
            nodes,
            tol,
            out,
        } => {
            let poly: MatrixPolynomial = serde_json::from_str(&std::fs::read_to_string(input)?)?;
            let col = realize(&poly, nodes, tol)?;
            let report = json!({
                "header": report_header(
                    json!({"command": "realize", "nodes": nodes, "tol": tol}),
                    json!({"unitarity": 1e-10, "interpolation": tol}),
                ),
                "unitarity_residual": col.unitarity_residual(),
                "dim_h": col.dim_h(),
                "dim_k": col.dim_k(),
                "colligation": serde_json::to_value(&col)?,
            });
            write_output(&out.out, &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Extend {
            domain,
            input,
            samples,
            seed,
            beta,
            export_extension,
            out,
        } => {
            if beta.norm() != 0.0 {
                return Err(Error::InvalidParameter(
                    "only the base point beta = 0 is automated; conjugate by the \
                     holomorphic equivalence moving your base point to 0 first"
                        .into(),
                ));
            }
            let f: VarietyFunction = serde_json::from_str(&std::fs::read_to_string(input)?)?;
            if f.domain() != domain {
                return Err(Error::InvalidParameter(format!(
                    "input is tagged for domain {}, but --domain says {domain}",
                    f.domain()
                )));
            }
            let ext = build_extension(&f, &RealizeParams::default())?;
            let rep = verify_extension(&ext, &f, samples, seed)?;
            let restriction_pass = rep.restriction_max_error <= 1e-8;
            let supnorm_pass = rep.supnorm_estimate <= 1.0 + 1e-8;
            let report = json!({
                "header": report_header(
                    json!({
                        "command": "extend",
                        "domain": domain.to_string(),
                        "samples": samples,
                        "seed": seed,
                    }),
                    json!({"restriction": 1e-8, "supnorm": 1.0 + 1e-8}),
                ),
                "verification": serde_json::to_value(&rep)?,
                "restriction_pass": restriction_pass,
                "supnorm_pass": supnorm_pass,
            });
            if let Some(path) = export_extension {
                std::fs::write(path, serde_json::to_string_pretty(&ext)?)?;
            }
            write_output(&out.out, &serde_json::to_string_pretty(&report)?)?;
            Ok(if restriction_pass && supnorm_pass { 0 } else { 1 })
        }
        Command::Eval {
            extension,
            z1,
            z2,
            out,
        } => {
            let ext: npext::extension::ExtensionFunction =
                serde_json::from_str(&std::fs::read_to_string(extension)?)?;
            let value = ext.eval([z1, z2])?;
            let report = json!({
                "header": report_header(
                    json!({"command": "eval", "z1": complex_json(z1), "z2": complex_json(z2)}),
                    json!({}),
                ),
                "value": (0..value.nrows())
                    .map(|i| (0..value.ncols()).map(|j| complex_json(value[(i, j)])).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "norm": npext::schur::spectral_norm(&value),
            });
            write_output(&out.out, &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Bergman {
            domain,
            degree,
            domain_samples,
            variety_samples,
            seed,
            input,
            region_csv,
            out,
        } => {
            let problem =
                BergmanProblem::new(domain, degree, domain_samples, variety_samples, seed)?;
            let op = build_bergman_operator(&problem)?;
            let values = match input {
                Some(path) => {
                    let f: VarietyFunction =
                        serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    if f.dim() != 1 {
                        return Err(Error::InvalidParameter(
                            "the Bergman command takes scalar variety functions".into(),
                        ));
                    }
                    if f.domain() != domain {
                        return Err(Error::InvalidParameter(
                            "input domain tag disagrees with --domain".into(),
                        ));
                    }
                    problem.variety_values(
                        |l| f.eval_branch(Branch::Branch1, l)[(0, 0)],
                        |l| f.eval_branch(Branch::Branch2, l)[(0, 0)],
                    )
                }
                None => problem.variety_values(|l| l, |l| l),
            };
            let coeffs = apply_extension(&op, &values)?;
            let mut residual = 0.0_f64;
            for (&z, &v) in problem.variety_samples().points.iter().zip(&values) {
                residual = residual.max((eval_poly(&coeffs, degree, z) - v).norm());
            }
            if let Some(path) = region_csv {
                let grid = sample_domain(
                    domain,
                    1000,
                    seed.wrapping_add(7),
                    SampleKind::Interior,
                )
                .points;
                let region = sublevel_estimate(&op, &[values.clone()], &grid)?;
                std::fs::write(path, region.to_csv())?;
            }
            let report = json!({
                "header": report_header(
                    json!({
                        "command": "bergman",
                        "domain": domain.to_string(),
                        "degree": degree,
                        "domain_samples": domain_samples,
                        "variety_samples_per_branch": variety_samples,
                        "seed": seed,
                    }),
                    json!({"interpolation": 1e-8, "gram_regularization": 1e-12}),
                ),
                "coefficients": coeffs.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
                "objective": op.objective(&coeffs)?,
                "interpolation_residual": residual,
            });
            write_output(&out.out, &serde_json::to_string_pretty(&report)?)?;
            Ok(if residual <= 1e-8 { 0 } else { 1 })
        }
        Command::Counterexample {
            case,
            lambda0,
            grid,
            seed,
            out,
        } => {
            if lambda0.norm() >= 1.0 {
                return Err(Error::InvalidParameter(
                    "lambda0 must lie in the open unit disc".into(),
                ));
            }
            match case.as_str() {
                "i" => {
                    let (margin, witness) = contradiction_margin(lambda0, grid.max(16), seed)?;
                    // coefficient tables at a representative royal point
                    let lam = C64::new(0.3, 0.0);
                    let lhs1 = omega_fourier(
                        CaseTag::I,
                        lambda0,
                        SideArg::Lhs {
                            branch: Branch::Branch1,
                            lambda: lam,
                        },
                        48,
                        256,
                    )?;
                    let lhs2 = omega_fourier(
                        CaseTag::I,
                        lambda0,
                        SideArg::Lhs {
                            branch: Branch::Branch2,
                            lambda: lam,
                        },
                        48,
                        256,
                    )?;
                    let rhs = omega_fourier(
                        CaseTag::I,
                        lambda0,
                        SideArg::Rhs {
                            s: 2.0 * lam,
                            p: lam * lam,
                        },
                        48,
                        256,
                    )?;
                    let table = |s: &npext::counterexample::CoefficientSeries| {
                        s.coeffs
                            .iter()
                            .take(4)
                            .map(|&z| complex_json(z))
                            .collect::<Vec<_>>()
                    };
                    let violation_found = margin > 1e-6;
                    let report = json!({
                        "header": report_header(
                            json!({
                                "command": "counterexample",
                                "case": "i",
                                "lambda0": complex_json(lambda0),
                                "grid": grid,
                                "seed": seed,
                            }),
                            json!({"fourier": 1e-6}),
                        ),
                        "violation_found": violation_found,
                        "contradiction_margin": margin,
                        "margin_witness_lambda": complex_json(witness),
                        "coefficients": {
                            "lhs_branch1": table(&lhs1),
                            "lhs_branch2": table(&lhs2),
                            "rhs_royal_point": table(&rhs),
                        },
                    });
                    write_output(&out.out, &serde_json::to_string_pretty(&report)?)?;
                    Ok(if violation_found { 0 } else { 1 })
                }
                "ii" => {
                    let t = lambda0.norm();
                    let (lhs_max, rhs_bound, gap) = eq8_gap(t)?;
                    let eqe5 = check_eqe5(lambda0, grid.max(16));
                    let candidate = case2_witness(lambda0, grid.max(16))?;
                    let violation_found = eqe5.is_some() && candidate.is_some();
                    let report = json!({
                        "header": report_header(
                            json!({
                                "command": "counterexample",
                                "case": "ii",
                                "lambda0": complex_json(lambda0),
                                "grid": grid,
                                "seed": seed,
                            }),
                            json!({"gap_closed_form": 1e-12}),
                        ),
                        "violation_found": violation_found,
                        "eq8": {"lhs_max": lhs_max, "rhs": rhs_bound, "gap": gap},
                        "boundary_witness": eqe5.map(|w| json!({
                            "lambda": complex_json(w.lambda),
                            "mu": complex_json(w.mu),
                            "lhs": w.lhs,
                            "rhs": w.rhs,
                            "gap": w.gap,
                        })),
                        "candidate_witness": candidate.map(|w| json!({
                            "s": complex_json(w.s),
                            "p": complex_json(w.p),
                            "modulus": w.modulus,
                        })),
                    });
                    write_output(&out.out, &serde_json::to_string_pretty(&report)?)?;
                    Ok(if violation_found { 0 } else { 1 })
                }
                other => Err(Error::InvalidParameter(format!(
                    "unknown case '{other}', expected i or ii"
                ))),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}
