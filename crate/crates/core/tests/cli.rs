use std::path::PathBuf;
use std::process::Command;

use clap::Parser;
use mck::cli::*;
use mck::exactalg::int;
use mck::variety::{build_product, build_projective_space};
use mck::{Error, Rat};

fn recipe(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../recipes").join(name)
}

fn run_args(args: &[&str]) -> Outcome {
    run(&Cli::try_parse_from(std::iter::once("mck").chain(args.iter().copied())).unwrap())
}

fn parse_err(text: &str) -> (usize, usize, String) {
    match Recipe::parse(text) {
        Err(Error::Parse { line, col, msg }) => (line, col, msg),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn cyclic_recipe_is_a_parse_error() {
    let text = std::fs::read_to_string(recipe("bad.mck")).unwrap();
    let (line, col, msg) = parse_err(&text);
    assert_eq!((line, col), (3, 22));
    assert!(msg.contains("A -> B -> A"), "{msg}");
    let out = run_args(&["build", recipe("bad.mck").to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert_eq!(out.output.error.as_ref().unwrap().kind, "parse");
}

#[test]
fn parse_diagnostics_point_at_the_token() {
    assert_eq!(parse_err("let X = projective_space n=2\nlet Y = product left=X right=Z\n").0, 2);
    assert_eq!(parse_err("let Y = product left=X right=Z\nlet X = point").1, 30);
    assert_eq!(parse_err("let X = projective_spac n=2").1, 9);
    assert_eq!(parse_err("let X = projective_space").1, 9);
    assert_eq!(parse_err("let X = projective_space n=two").1, 28);
    assert_eq!(parse_err("X = point").1, 1);
    assert_eq!(parse_err("let X point").1, 7);
    assert_eq!(parse_err("let X = point\nlet X = point").0, 2);
    assert_eq!(parse_err("let X = point n=1").1, 15);
    assert_eq!(parse_err("let X = projective_space n=2\nlet B = blow_up base=X center=line").1, 31);
    assert_eq!(parse_err("let E = projective_bundle base=X chern=[1,h rank=2").1, 34);
    assert_eq!(parse_err("# nothing\n\n").0, 1);
}

#[test]
fn forward_references_are_allowed() {
    let r = Recipe::parse("let Q = product left=L right=L  # quadric\nlet L = projective_space n=1\n").unwrap();
    assert_eq!(r.order().unwrap(), vec![1, 0]);
    assert_eq!(r.target().name.text, "L");
    let ev = evaluate(&r).unwrap();
    assert_eq!(ev.get("Q").unwrap().variety.ranks(), vec![1, 2, 1]);
}

#[test]
fn chern_literals() {
    let p2 = build_projective_space::<Rat>(2);
    let pos = Pos { line: 1, col: 1 };
    assert_eq!(parse_class(&p2, "1 + 3h + 3hh", pos).unwrap(), p2.tangent);
    assert_eq!(parse_class(&p2, "3h^2", pos).unwrap(), vec![int(0), int(0), int(3)]);
    assert_eq!(parse_class(&p2, "-1/2 h*h + h - 2", pos).unwrap(), vec![int(-2), int(1), mck::exactalg::rat(-1, 2)]);
    assert_eq!(parse_class(&p2, "hhh", pos).unwrap(), vec![int(0); 3]);
    let q = build_product(&build_projective_space::<Rat>(1), &build_projective_space::<Rat>(1)).variety;
    assert_eq!(parse_class(&q, "2 h⊗1 + 1⊗h", pos).unwrap(), vec![int(0), int(1), int(2), int(0)]);
    assert_eq!(parse_class(&q, "h⊗1 1⊗h", pos).unwrap(), vec![int(0), int(0), int(0), int(1)]);
    for (bad, col) in [("3k", 2), ("h +", 4), ("1/0", 3), ("", 1), ("h h^", 5)] {
        match parse_class(&p2, bad, pos) {
            Err(Error::Parse { col: c, .. }) => assert_eq!(c, col, "{bad}"),
            other => panic!("{bad}: {other:?}"),
        }
    }
}

#[test]
fn bundle_entries_must_be_homogeneous() {
    let r = Recipe::parse("let X = projective_space n=2\nlet E = projective_bundle base=X chern=[1, hh] rank=2").unwrap();
    match evaluate(&r) {
        Err(Error::Parse { line: 2, col, .. }) => assert_eq!(col, 44),
        other => panic!("{other:?}"),
    }
}

#[test]
fn every_builder_evaluates() {
    let out = run_args(&["build", recipe("tour.mck").to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.summary);
    let ranks = |name: &str| out.output.varieties.iter().find(|v| v.variety == name).unwrap().codim_ranks.clone();
    assert_eq!(ranks("Sym"), vec![1, 1, 1]);
    assert_eq!(ranks("S"), vec![1, 2, 1]);
    assert_eq!(ranks("N"), vec![1, 3, 4, 3, 1]);
    assert_eq!(ranks("H"), vec![1, 2, 3, 2, 1]);
    assert_eq!(ranks("E"), vec![1, 2, 2, 1]);
}

#[test]
fn verify_selected_suites() {
    let out = run_args(&["verify", recipe("p1xp1.mck").to_str().unwrap(), "--checks", "ck,mult"]);
    assert_eq!(out.code, 0, "{}", out.summary);
    let ids: Vec<&str> = out.output.stages.iter().flat_map(|s| &s.checks).map(|c| c.check_id.as_str()).collect();
    assert!(ids.iter().any(|i| i.starts_with("ck.")));
    assert!(ids.iter().any(|i| i.starts_with("mult")));
    assert!(!ids.iter().any(|i| i.starts_with("chern")));
}

#[test]
fn quotient_of_a_singular_square_is_refused() {
    let dir = std::env::temp_dir().join(format!("mck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sq.mck");
    std::fs::write(&path, "let X = projective_space n=2\nlet S = product left=X right=X\nlet Q = quotient cover=S group=swap\n").unwrap();
    let out = run_args(&["build", path.to_str().unwrap()]);
    assert_eq!(out.code, 3);
    assert_eq!(out.output.error.as_ref().unwrap().kind, "precondition");
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&Error::Parse { line: 1, col: 1, msg: String::new() }), 2);
    assert_eq!(exit_code(&Error::Precondition(String::new())), 3);
    assert_eq!(exit_code(&Error::Verification(String::new())), 4);
}

#[test]
fn reports_are_deterministic() {
    let base = recipe("p1xp1.mck");
    let args = ["hilb", "--base", base.to_str().unwrap(), "--skip-capstone"];
    let a = run_args(&args);
    let b = run_args(&args);
    assert_eq!(a.code, 0, "{}", a.summary);
    assert_eq!(a.json(), b.json());
    let v: serde_json::Value = serde_json::from_str(&a.json()).unwrap();
    assert_eq!(v["schema"], 1);
    assert!(v["stages"][0]["checks"][0].get("millis").is_none());
    let stages: Vec<&str> = v["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["base", "square", "nested12", "nested23"]);
    let timed = run_args(&["--timings", "build", recipe("p2.mck").to_str().unwrap()]);
    assert!(timed.output.stages[0].checks[0].millis.is_some());
}

#[test]
fn binary_round_trip() {
    let exe = env!("CARGO_BIN_EXE_mck");
    let dir = std::env::temp_dir().join(format!("mck-bin-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("report.json");
    let status = Command::new(exe)
        .args(["hilb", "--pipeline", "square,nested12", "--base"])
        .arg(recipe("p2.mck"))
        .arg("--out")
        .arg(&out_path)
        .env("MCK_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stdout));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.contains("X^[2]"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let ranks: Vec<u64> = v["varieties"][1]["codim_ranks"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(ranks, [1, 2, 3, 2, 1]);

    let bad = Command::new(exe).arg("build").arg(recipe("bad.mck")).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("3:22"));
    let usage = Command::new(exe).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
