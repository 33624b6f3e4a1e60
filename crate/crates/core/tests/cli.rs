mod common;

use std::fs;

use common::*;

#[test]
fn render_writes_the_full_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, _, _) = run(&["render", "--scenarios-dir", path_str(&fixture_scenarios()), "--out", path_str(&out)]);
    assert_eq!(code, 0);
    let files: Vec<String> = read_tree(&out).into_keys().collect();
    let mut expected = vec!["index.html".to_string(), "ontology.svg".to_string()];
    for id in rasaeco::fixtures::FIXTURE_SCENARIOS {
        expected.push(format!("{id}/scenario.html"));
        expected.push(format!("{id}/volumetric.svg"));
    }
    expected.sort();
    assert_eq!(files, expected);
}

#[test]
fn check_and_render_report_the_same() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture_scenarios();
    let (_, check, _) = run(&["check", "--scenarios-dir", path_str(&dir)]);
    let (_, render, _) = run(&["render", "--scenarios-dir", path_str(&dir), "--out", path_str(&tmp.path().join("o"))]);
    assert_eq!(check, render);
}

#[test]
fn render_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let dir = fixture_scenarios();
    let args = ["render", "--scenarios-dir", path_str(&dir), "--out", path_str(&out)];
    assert_eq!(run(&args).0, 0);
    let first = hash_tree(&out);
    assert_eq!(run(&args).0, 0);
    assert_eq!(hash_tree(&out), first);
}

#[test]
fn errors_leave_output_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_corpus(&corpus, &[("a", scenario("A", "", "See <ref name=\"missing\"/>."))]);
    let out = tmp.path().join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("keep.txt"), "previous").unwrap();

    let (code, stdout, _) = run(&["render", "--scenarios-dir", path_str(&corpus), "--out", path_str(&out)]);
    assert_eq!(code, 2);
    assert_eq!(stdout.lines().filter(|l| l.contains(" E006 ")).count(), 1);
    assert_eq!(read_tree(&out).into_keys().collect::<Vec<_>>(), vec!["keep.txt"]);

    let missing = tmp.path().join("never");
    assert_eq!(run(&["render", "--scenarios-dir", path_str(&corpus), "--out", path_str(&missing)]).0, 2);
    assert!(!missing.exists());
}

#[test]
fn strict_render_still_writes() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_corpus(&corpus, &[("a", scenario("A", r#"{"target":"a","nature":"inspired-by"}"#, "x"))]);
    let out = tmp.path().join("out");
    let (code, _, _) = run(&["render", "--strict", "--scenarios-dir", path_str(&corpus), "--out", path_str(&out)]);
    assert_eq!(code, 1);
    assert!(out.join("a/scenario.html").exists());
}

#[test]
fn config_file_natures() {
    let tmp = tempfile::tempdir().unwrap();
    copy_tree(&fixture_scenarios(), tmp.path());
    fs::write(tmp.path().join("rasaeco.config.json"), r#"{"nature_vocabulary":["uses"]}"#).unwrap();
    let dir = path_str(tmp.path());
    let (code, out, _) = run(&["check", "--scenarios-dir", dir]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.contains(" W102 ")).count(), 4);

    // The flag overrides the file.
    let (_, out, _) = run(&["check", "--scenarios-dir", dir, "--nature-vocabulary", "uses,refines"]);
    assert_eq!(out.lines().filter(|l| l.contains(" W102 ")).count(), 0);
}

#[test]
fn ifc_vocabulary_file() {
    let tmp = tempfile::tempdir().unwrap();
    copy_tree(&fixture_scenarios(), tmp.path());
    let vocab = tmp.path().join("ifc.txt");
    fs::write(&vocab, "# names\nIfcCostItem\nIfcRelAssignsToControl\nIfcPerfromanceHistory\n").unwrap();
    let (_, out, _) = run(&["check", "--scenarios-dir", path_str(tmp.path()), "--ifc-vocabulary", path_str(&vocab)]);
    let w101: Vec<&str> = out.lines().filter(|l| l.contains(" W101 ")).collect();
    // The logistics and risk definitions use names outside this smaller set.
    assert!(w101.iter().all(|l| !l.contains("IfcPerfromanceHistory")), "{out}");
    assert!(w101.iter().any(|l| l.contains("IfcZone")));

    let (code, _, err) = run(&["check", "--scenarios-dir", path_str(tmp.path()), "--ifc-vocabulary", "/nonexistent/ifc.txt"]);
    assert_eq!(code, 66);
    assert!(err.contains("IFC vocabulary"));
}

#[test]
fn binary_exit_codes() {
    let dir = fixture_scenarios();
    assert_eq!(run_binary(&["check", "--scenarios-dir", path_str(&dir)], &[]).0, 0);
    assert_eq!(run_binary(&["check", "--strict", "--scenarios-dir", path_str(&dir)], &[]).0, 1);
    assert_eq!(run_binary(&["check", "--scenarios-dir", "/nonexistent"], &[]).0, 66);
    assert_eq!(run_binary(&["frobnicate"], &[]).0, 64);
    let (code, out, _) = run_binary(&["--help"], &[]);
    assert_eq!(code, 0);
    assert!(out.contains("render") && out.contains("check") && out.contains("stats"));
}

#[test]
fn json_report_round_trips() {
    let (code, out, _) = run(&["check", "--scenarios-dir", path_str(&fixture_scenarios()), "--format", "json"]);
    assert_eq!(code, 0);
    let report = rasaeco::Report::from_json(out.trim_end()).unwrap();
    assert_eq!((report.errors(), report.warnings()), (0, 1));
    assert_eq!(rasaeco::diagnostics::format_json(&report), out.trim_end());
}

#[test]
fn stats_text_format() {
    let (code, out, _) = run(&["stats", "--scenarios-dir", path_str(&fixture_scenarios()), "--format", "text"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().last().unwrap().starts_with("7 scenario(s), 5 edge(s)"));
}
