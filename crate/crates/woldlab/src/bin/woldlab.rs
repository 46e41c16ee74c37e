//! Command-line surface: Wold-type decompositions, identity checks and
//! model-space operations over JSON documents or the built-in gallery.
//!
//! Exit codes: 0 pass, 2 mathematical check failed, 3 invalid input,
//! 4 internal numerical failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use woldlab::dirichlet::{gram_matrix, mz_operators, recover_measure, verify_model_equivalence, ModelSpec};
use woldlab::error::{Result, WoldlabError};
use woldlab::gallery::make_example;
use woldlab::measure::OpValuedMeasure;
use woldlab::operator::{
    adjoint, check_left_inverse_commuting, check_toral_two_isometry, check_two_isometry, Operator,
};
use woldlab::report::{
    matrix_to_json, OperatorDocument, PieceDocument, ReportDocument, SCHEMA,
};
use woldlab::space::Space;
use woldlab::subspace::{intersect, kernel};
use woldlab::tol::TolerancePolicy;
use woldlab::wold::{structural_decomposition_pair, wold_single, wold_tuple};

#[derive(Parser)]
#[command(name = "woldlab", version, about = "Wold-type decompositions and Dirichlet-type model spaces at finite truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// relative singular-value cutoff for rank decisions
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// pass threshold for identity residuals (operator norm)
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// stabilization iteration cap
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,
    /// seed echoed into the report for property-test drivers
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    TwoIsometry,
    Toral,
    Lic,
}

#[derive(Subcommand)]
enum Command {
    /// Wold-type decomposition: single operator, joint tuple, or the
    /// four-block structural decomposition of a pair
    Decompose {
        #[arg(long)]
        gallery: Option<String>,
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
        /// run the four-block structural decomposition (pairs only)
        #[arg(long)]
        structural: bool,
        /// measure-recovery window for the structural decomposition
        #[arg(long)]
        window: Option<usize>,
        /// run the tuple decomposition even if the left-inverse
        /// commuting prerequisite fails
        #[arg(long)]
        force: bool,
    },
    /// Pointwise operator identity checks
    Check {
        #[arg(long)]
        gallery: Option<String>,
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_enum)]
        identity: Identity,
        /// also report the left-inverse commuting residual of a model
        /// pair (never gates the exit code)
        #[arg(long)]
        experimental_converse: bool,
    },
    /// Model-space operations on D_E(mu1, mu2)
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
}

#[derive(Subcommand)]
enum ModelAction {
    /// Assemble the model Gram from two measures
    Build {
        /// measure spec: zero | lebesgue[:scale] | atom:theta:weight | atoms:t:w,t:w,...
        #[arg(long)]
        mu1: String,
        #[arg(long)]
        mu2: String,
        #[arg(long)]
        cap: usize,
        /// write the Gram matrix as JSON to this path
        #[arg(long)]
        dump_gram: Option<PathBuf>,
    },
    /// Recover the measures of a model pair from its wandering subspace
    Recover {
        #[arg(long)]
        gallery: Option<String>,
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Verify unitary equivalence with the model pair on the recovered measures
    Verify {
        #[arg(long)]
        gallery: Option<String>,
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
    },
}

fn exit_code_for(e: &WoldlabError) -> u8 {
    match e {
        WoldlabError::InvalidInput(_)
        | WoldlabError::UnknownExample(_)
        | WoldlabError::UnsupportedMeasureKind
        | WoldlabError::PointOutsideDisc
        | WoldlabError::CapTooSmall
        | WoldlabError::NotPSD(_) => 3,
        WoldlabError::NoStabilization(_) | WoldlabError::GramSingular => 4,
        _ => 2,
    }
}

fn policy(cli: &Cli) -> Result<TolerancePolicy> {
    let mut residual_tol = 1e-8;
    if let Ok(v) = std::env::var("WOLDLAB_TOL") {
        residual_tol = v
            .parse::<f64>()
            .map_err(|_| WoldlabError::InvalidInput("WOLDLAB_TOL must be a number".into()))?;
    }
    if let Some(v) = cli.tol_residual {
        residual_tol = v;
    }
    TolerancePolicy::new(cli.tol_rank.unwrap_or(1e-10), residual_tol, cli.max_iter.unwrap_or(256))
}

/// Operators plus the truncation cap relevant to them (0 = untruncated).
struct LoadedInput {
    ops: Vec<Operator>,
    cap: usize,
    label: String,
}

fn load_input(
    gallery: &Option<String>,
    op: &Option<PathBuf>,
    cap: Option<usize>,
    tol: &TolerancePolicy,
) -> Result<LoadedInput> {
    match (gallery, op) {
        (Some(name), None) => {
            let ex = make_example(name, cap, tol)?;
            Ok(LoadedInput { ops: ex.ops, cap: ex.cap, label: format!("gallery:{name}") })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| WoldlabError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let doc: OperatorDocument = serde_json::from_str(&text)
                .map_err(|e| WoldlabError::InvalidInput(format!("invalid operator document: {e}")))?;
            doc.validate_schema()?;
            match doc {
                OperatorDocument::Dense { matrix, gram, .. } => {
                    let m = woldlab::report::matrix_from_json(&matrix)?;
                    if m.nrows() != m.ncols() {
                        return Err(WoldlabError::InvalidInput(
                            "field 'matrix': decomposition needs a square matrix".into(),
                        ));
                    }
                    let space = match gram {
                        Some(g) => Space::with_gram(woldlab::report::matrix_from_json(&g)?, tol)?,
                        None => Space::euclidean(m.nrows()),
                    };
                    Ok(LoadedInput {
                        ops: vec![Operator::endo(m, space)?],
                        cap: 0,
                        label: format!("dense:{}", path.display()),
                    })
                }
                OperatorDocument::Graded { cap: doc_cap, mu1, mu2, .. } => {
                    let spec = ModelSpec::new(mu1.to_measure(tol)?, mu2.to_measure(tol)?, doc_cap)?;
                    let space = gram_matrix(&spec, tol)?;
                    let (t1, t2) = mz_operators(&space)?;
                    Ok(LoadedInput {
                        ops: vec![t1, t2],
                        cap: doc_cap,
                        label: format!("graded:{}", path.display()),
                    })
                }
                OperatorDocument::Gallery { name, cap: doc_cap, .. } => {
                    let ex = make_example(&name, cap.or(doc_cap), tol)?;
                    Ok(LoadedInput { ops: ex.ops, cap: ex.cap, label: format!("gallery:{name}") })
                }
            }
        }
        _ => Err(WoldlabError::InvalidInput("provide exactly one of --gallery or --op".into())),
    }
}

fn parse_measure(spec: &str, window: usize, tol: &TolerancePolicy) -> Result<OpValuedMeasure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad_num = |f: &str| WoldlabError::InvalidInput(format!("invalid number {f:?} in measure spec {spec:?}"));
    match parts[0] {
        "zero" => Ok(OpValuedMeasure::zero(1, window)),
        "lebesgue" => {
            let scale = match parts.get(1) {
                Some(s) => s.parse::<f64>().map_err(|_| bad_num(s))?,
                None => 1.0,
            };
            OpValuedMeasure::lebesgue_scalar(scale, window, tol)
        }
        "atom" if parts.len() == 3 => {
            let theta = parts[1].parse::<f64>().map_err(|_| bad_num(parts[1]))?;
            let weight = parts[2].parse::<f64>().map_err(|_| bad_num(parts[2]))?;
            OpValuedMeasure::atom_scalar(theta, weight, window, tol)
        }
        "atoms" if parts.len() == 2 => {
            let atoms = parts[1]
                .split(',')
                .map(|pair| {
                    let mut it = pair.split(';');
                    match (it.next(), it.next(), it.next()) {
                        (Some(t), Some(w), None) => {
                            let theta = t.parse::<f64>().map_err(|_| bad_num(t))?;
                            let weight = w.parse::<f64>().map_err(|_| bad_num(w))?;
                            Ok((theta, nalgebra::DMatrix::from_element(1, 1, woldlab::C64::new(weight, 0.0))))
                        }
                        _ => Err(WoldlabError::InvalidInput(format!("atom entry {pair:?} must be theta;weight"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            OpValuedMeasure::atoms(&atoms, window, tol)
        }
        _ => Err(WoldlabError::UnsupportedMeasureKind),
    }
}

fn joint_wandering(t1: &Operator, t2: &Operator, tol: &TolerancePolicy) -> woldlab::subspace::Subspace {
    intersect(&kernel(&adjoint(t1), tol), &kernel(&adjoint(t2), tol), tol)
}

fn run(cli: &Cli, tol: &TolerancePolicy) -> Result<ReportDocument> {
    match &cli.command {
        Command::Decompose { gallery, op, cap, structural, window, force } => {
            let input = load_input(gallery, op, *cap, tol)?;
            if input.ops.len() == 1 {
                let mut rep = ReportDocument::new(&format!("decompose {}", input.label), tol);
                let w = wold_single(&input.ops[0], tol)?;
                rep.dim("ambient", input.ops[0].domain.dim());
                rep.dim("h_inf", w.h_inf.dim());
                rep.dim("wandering", w.wandering.dim());
                rep.residual("completeness", w.completeness_residual);
                rep.residual("orthogonality", w.orthogonality_residual);
                rep.residual("unitary", w.unitary_residual);
                rep.residual("reducing", w.reducing_residual);
                rep.truncation_limited = Some(w.truncation_limited);
                rep.pass = w.pass;
                Ok(rep)
            } else if *structural {
                if input.ops.len() != 2 {
                    return Err(WoldlabError::InvalidInput("--structural needs an operator pair".into()));
                }
                let mut rep = ReportDocument::new(&format!("decompose --structural {}", input.label), tol);
                let w = window.unwrap_or(input.cap.saturating_sub(1)).max(1);
                let s = structural_decomposition_pair(&input.ops[0], &input.ops[1], w, tol)?;
                rep.dim("ambient", input.ops[0].domain.dim());
                rep.dim("h00", s.h00.dim());
                rep.dim("h01", s.h01.dim());
                rep.dim("h10", s.h10.dim());
                rep.dim("h11", s.h11.dim());
                rep.dim("e", s.e.dim());
                rep.dim("e01", s.e01.dim());
                rep.dim("e10", s.e10.dim());
                rep.residual("completeness", s.completeness_residual);
                rep.residual("orthogonality", s.orthogonality_residual);
                rep.residual("off_diagonal", s.off_diagonal_residual);
                rep.residual("unitary_t1_h00", s.unitary_residuals[0]);
                rep.residual("unitary_t1_h01", s.unitary_residuals[1]);
                rep.residual("unitary_t2_h00", s.unitary_residuals[2]);
                rep.residual("unitary_t2_h10", s.unitary_residuals[3]);
                for (key, mu) in [("mu1", &s.mu1), ("mu2", &s.mu2), ("nu1", &s.nu1), ("nu2", &s.nu2)] {
                    if let Some(mu) = mu {
                        rep.measure(key, mu);
                    }
                }
                rep.pass = s.pass;
                Ok(rep)
            } else {
                let mut rep = ReportDocument::new(&format!("decompose {}", input.label), tol);
                let w = wold_tuple(&input.ops, *force, tol)?;
                rep.dim("ambient", input.ops[0].domain.dim());
                rep.residual("completeness", w.completeness_residual);
                rep.residual("orthogonality", w.orthogonality_residual);
                rep.residual("lic", w.prerequisite.lic_residual);
                rep.residual("commutator", w.prerequisite.commutator_residual);
                let mut pieces = BTreeMap::new();
                for p in &w.pieces {
                    let key: String = p.alpha.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
                    pieces.insert(
                        key,
                        PieceDocument {
                            dim: p.subspace.dim(),
                            unitary_residuals: p
                                .unitary_residuals
                                .iter()
                                .map(|&r| woldlab::report::residual_string(r))
                                .collect(),
                            reducing_residuals: p
                                .reducing_residuals
                                .iter()
                                .map(|&r| woldlab::report::residual_string(r))
                                .collect(),
                        },
                    );
                }
                rep.pieces = Some(pieces);
                rep.pass = w.pass;
                Ok(rep)
            }
        }
        Command::Check { gallery, op, cap, identity, experimental_converse } => {
            let input = load_input(gallery, op, *cap, tol)?;
            let mut rep = ReportDocument::new(&format!("check {}", input.label), tol);
            match identity {
                Identity::TwoIsometry => {
                    let r = check_two_isometry(&input.ops[0], tol)?;
                    rep.residual("two_isometry", r);
                    rep.pass = r < tol.residual_tol;
                }
                Identity::Toral => {
                    if input.ops.len() < 2 {
                        return Err(WoldlabError::InvalidInput("toral check needs an operator pair".into()));
                    }
                    let r = check_toral_two_isometry(&input.ops[0], &input.ops[1], tol)?;
                    for i in 0..2 {
                        for j in 0..2 {
                            rep.residual(&format!("toral_{}{}", i + 1, j + 1), r.residuals[i][j]);
                        }
                    }
                    rep.residual("toral_max", r.max_residual);
                    rep.pass = r.pass;
                }
                Identity::Lic => {
                    let r = check_left_inverse_commuting(&input.ops, tol)?;
                    rep.residual("lic", r.lic_residual);
                    rep.residual("commutator", r.commutator_residual);
                    rep.pass = r.pass;
                }
            }
            if *experimental_converse && input.ops.len() >= 2 {
                // reported as an experiment only; never gates the verdict
                match check_left_inverse_commuting(&input.ops, tol) {
                    Ok(r) => {
                        rep.residual("experimental_lic", r.lic_residual);
                        rep.residual("experimental_commutator", r.commutator_residual);
                    }
                    Err(e) => {
                        rep.error = Some(format!("experimental converse: {e}"));
                    }
                }
            }
            Ok(rep)
        }
        Command::Model { action } => match action {
            ModelAction::Build { mu1, mu2, cap, dump_gram } => {
                let mut rep = ReportDocument::new(&format!("model build --cap {cap}"), tol);
                let window = cap.saturating_sub(1).max(1);
                let spec = ModelSpec::new(
                    parse_measure(mu1, window, tol)?,
                    parse_measure(mu2, window, tol)?,
                    *cap,
                )?;
                let space = gram_matrix(&spec, tol)?;
                rep.dim("ambient", space.dim());
                rep.dim("cap", *cap);
                rep.dim("coeff_dim", spec.coeff_dim());
                if let Some(path) = dump_gram {
                    let doc = serde_json::json!({
                        "schema": SCHEMA,
                        "gram": matrix_to_json(space.gram()),
                    });
                    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("gram serialization"))
                        .map_err(|e| WoldlabError::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
                }
                rep.pass = true;
                Ok(rep)
            }
            ModelAction::Recover { gallery, op, cap, window } => {
                let input = load_input(gallery, op, *cap, tol)?;
                if input.ops.len() != 2 {
                    return Err(WoldlabError::InvalidInput("measure recovery needs an operator pair".into()));
                }
                let mut rep = ReportDocument::new(&format!("model recover {}", input.label), tol);
                let w = window.unwrap_or(input.cap.saturating_sub(1)).max(1);
                let e = joint_wandering(&input.ops[0], &input.ops[1], tol);
                if e.is_zero() {
                    return Err(WoldlabError::EmptyWanderingSubspace);
                }
                let mu1 = recover_measure(&input.ops[0], &e, w, tol)?;
                let mu2 = recover_measure(&input.ops[1], &e, w, tol)?;
                rep.dim("wandering", e.dim());
                let (p1, ok1) = mu1.psd_check(tol);
                let (p2, ok2) = mu2.psd_check(tol);
                rep.residual("mu1_psd_min", p1);
                rep.residual("mu2_psd_min", p2);
                rep.measure("mu1", &mu1);
                rep.measure("mu2", &mu2);
                rep.pass = ok1 && ok2;
                Ok(rep)
            }
            ModelAction::Verify { gallery, op, cap } => {
                let input = load_input(gallery, op, *cap, tol)?;
                if input.ops.len() != 2 {
                    return Err(WoldlabError::InvalidInput("model verification needs an operator pair".into()));
                }
                let mut rep = ReportDocument::new(&format!("model verify {}", input.label), tol);
                let e = joint_wandering(&input.ops[0], &input.ops[1], tol);
                let cap_used = cap.unwrap_or(input.cap);
                let v = verify_model_equivalence(&input.ops[0], &input.ops[1], &e, cap_used, tol)?;
                rep.dim("wandering", e.dim());
                rep.dim("cap", cap_used);
                rep.residual("gram", v.gram_residual);
                rep.residual("intertwining", v.intertwining_residual);
                rep.residual("lic", v.lic_residual);
                rep.residual("toral", v.toral_residual);
                rep.residual("mu1_psd_min", v.mu1_psd_min);
                rep.residual("mu2_psd_min", v.mu2_psd_min);
                rep.measure("mu1", &v.recovered_mu1);
                rep.measure("mu2", &v.recovered_mu2);
                rep.pass = v.pass;
                Ok(rep)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match policy(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let (report, code) = match run(&cli, &tol) {
        Ok(rep) => {
            let code = if rep.pass { 0 } else { 2 };
            (rep, code)
        }
        Err(e) => {
            let mut rep = ReportDocument::new("error", &tol);
            rep.error = Some(e.to_string());
            rep.pass = false;
            (rep, exit_code_for(&e))
        }
    };
    let mut report = report;
    if let Some(seed) = cli.seed {
        report.command = format!("{} --seed {seed}", report.command);
    }
    match cli.report {
        ReportFormat::Json => println!("{}", report.to_json()),
        ReportFormat::Text => print!("{}", report.to_text()),
    }
    ExitCode::from(code)
}
