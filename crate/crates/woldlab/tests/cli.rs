//! End-to-end tests of the command-line surface: exit-code contract,
//! report determinism, schema round-trips, and document inputs.

use std::process::{Command, Output};

use woldlab::report::{OperatorDocument, ReportDocument, SCHEMA};

fn woldlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_woldlab"))
        .args(args)
        .env_remove("WOLDLAB_TOL")
        .output()
        .expect("spawn woldlab")
}

fn parse_report(out: &Output) -> ReportDocument {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not a report: {e}\n{}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn passing_checks_exit_zero() {
    for args in [
        vec!["check", "--gallery", "dirichlet-pair", "--identity", "toral"],
        vec!["check", "--gallery", "hardy-bidisc", "--identity", "lic"],
        vec!["check", "--gallery", "hardy-shift", "--identity", "two-isometry"],
        vec!["decompose", "--gallery", "u-plus-shift"],
        vec!["decompose", "--gallery", "hardy-bidisc"],
        vec!["model", "verify", "--gallery", "dirichlet-pair"],
    ] {
        let out = woldlab(&args);
        let rep = parse_report(&out);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", rep.to_text());
        assert!(rep.pass);
        assert_eq!(rep.schema, SCHEMA);
    }
}

#[test]
fn failing_checks_exit_two() {
    for args in [
        vec!["check", "--gallery", "scalar-2i", "--identity", "two-isometry"],
        vec!["check", "--gallery", "bergman-pair", "--identity", "toral"],
        vec!["check", "--gallery", "perturbed-pair", "--identity", "lic"],
        vec!["model", "verify", "--gallery", "perturbed-pair"],
    ] {
        let out = woldlab(&args);
        let rep = parse_report(&out);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", rep.to_text());
        assert!(!rep.pass);
    }
}

#[test]
fn invalid_input_exits_three() {
    let out = woldlab(&["decompose", "--gallery", "no-such-example"]);
    assert_eq!(out.status.code(), Some(3));
    let rep = parse_report(&out);
    assert!(rep.error.as_deref().unwrap_or("").contains("no-such-example"));

    // both input flags at once is also invalid
    let out = woldlab(&["decompose", "--gallery", "unitary", "--op", "x.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn non_left_invertible_dense_input_exits_two_with_report() {
    let dir = std::env::temp_dir().join("woldlab-cli-zero");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("zero.json");
    let doc = serde_json::json!({
        "kind": "dense",
        "schema": SCHEMA,
        "matrix": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
    });
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = woldlab(&["decompose", "--op", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let rep = parse_report(&out);
    assert!(rep.error.as_deref().unwrap_or("").contains("left invertible"), "{:?}", rep.error);
}

#[test]
fn malformed_and_wrong_schema_documents_exit_three() {
    let dir = std::env::temp_dir().join("woldlab-cli-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let garbled = dir.join("garbled.json");
    std::fs::write(&garbled, "{not json").unwrap();
    let out = woldlab(&["decompose", "--op", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let wrong = dir.join("wrong-schema.json");
    let doc = serde_json::json!({
        "kind": "gallery",
        "schema": "woldlab/999",
        "name": "unitary",
    });
    std::fs::write(&wrong, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = woldlab(&["decompose", "--op", wrong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rep = parse_report(&out);
    assert!(rep.error.as_deref().unwrap_or("").contains("schema"), "{:?}", rep.error);
}

#[test]
fn reports_are_byte_deterministic() {
    let a = woldlab(&["decompose", "--gallery", "four-block", "--report", "json"]);
    let b = woldlab(&["decompose", "--gallery", "four-block", "--report", "json"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn report_schema_roundtrip() {
    let out = woldlab(&["model", "verify", "--gallery", "dirichlet-pair"]);
    let rep = parse_report(&out);
    let again: ReportDocument = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn four_block_piece_table() {
    let out = woldlab(&["decompose", "--gallery", "four-block"]);
    let rep = parse_report(&out);
    let pieces = rep.pieces.expect("tuple report has pieces");
    assert_eq!(pieces["00"].dim, 4);
    assert_eq!(pieces["10"].dim, 8);
    assert_eq!(pieces["01"].dim, 8);
    assert_eq!(pieces["11"].dim, 10);
}

#[test]
fn model_build_dumps_expected_gram() {
    let dir = std::env::temp_dir().join("woldlab-cli-gram");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.json");
    let out = woldlab(&[
        "model", "build", "--mu1", "lebesgue", "--mu2", "lebesgue", "--cap", "4",
        "--dump-gram", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let gram = doc["gram"].as_array().unwrap();
    assert_eq!(gram.len(), 15);
    // first diagonal entries in graded-lex order: 1, 2, 2, 3, 3, 3, ...
    for (i, expect) in [1.0, 2.0, 2.0, 3.0, 3.0, 3.0].iter().enumerate() {
        let entry = gram[i][i].as_array().unwrap();
        assert_eq!(entry[0].as_f64().unwrap(), *expect);
        assert_eq!(entry[1].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn model_recover_reports_lebesgue_coefficients() {
    let out = woldlab(&["model", "recover", "--gallery", "dirichlet-pair", "--window", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = parse_report(&out);
    let mu1 = &rep.measures["mu1"];
    assert_eq!(mu1.window, 2);
    assert!((mu1.fourier[0][0][0][0] - 1.0).abs() < 1e-10);
    for k in 1..=2 {
        assert!(mu1.fourier[k][0][0][0].abs() < 1e-10);
        assert!(mu1.fourier[k][0][0][1].abs() < 1e-10);
    }
}

#[test]
fn graded_document_input_is_accepted() {
    // a model spec document drives the same verification as the gallery
    let out = woldlab(&["model", "build", "--mu1", "atom:0.4:1.0", "--mu2", "zero", "--cap", "3"]);
    assert_eq!(out.status.code(), Some(0));

    let doc = OperatorDocument::Gallery {
        schema: SCHEMA.to_string(),
        name: "dirichlet-pair".to_string(),
        cap: Some(3),
    };
    let dir = std::env::temp_dir().join("woldlab-cli-doc");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gallery.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = woldlab(&["check", "--op", path.to_str().unwrap(), "--identity", "toral"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn tolerance_env_and_flags_change_verdicts() {
    // a huge residual tolerance lets the bergman control pass
    let out = Command::new(env!("CARGO_BIN_EXE_woldlab"))
        .args(["check", "--gallery", "bergman-pair", "--identity", "toral"])
        .env("WOLDLAB_TOL", "10.0")
        .output()
        .expect("spawn woldlab");
    assert_eq!(out.status.code(), Some(0));
    // the explicit flag wins over the environment
    let out = Command::new(env!("CARGO_BIN_EXE_woldlab"))
        .args(["check", "--gallery", "bergman-pair", "--identity", "toral", "--tol-residual", "1e-8"])
        .env("WOLDLAB_TOL", "10.0")
        .output()
        .expect("spawn woldlab");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experimental_converse_reports_residual_without_gating() {
    let out = woldlab(&[
        "check", "--gallery", "dirichlet-pair", "--identity", "toral", "--experimental-converse",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = parse_report(&out);
    assert!(rep.residuals.contains_key("experimental_lic"));
}

#[test]
fn text_report_renders_pass_line() {
    let out = woldlab(&["check", "--gallery", "unitary", "--identity", "two-isometry", "--report", "text"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pass: true"), "{text}");
    assert_eq!(out.status.code(), Some(0));
}
