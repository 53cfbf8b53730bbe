use std::fs;
use std::path::Path;

use shockstab::bundle::{read_field, sha256_hex, write_bundle, SUMMARY};
use shockstab::experiment::run_all;
use shockstab::ExperimentConfig;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

const MARCH: &str =
    "run.mode = validate\nrun.end_time = 1\nscheme.solver = vanleer\nscheme.order = 1\n";

#[test]
fn identical_configurations_give_identical_bundles() {
    let c = cfg(MARCH);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_bundle(a.path(), &c, &run_all(&c)).unwrap();
    write_bundle(b.path(), &c, &run_all(&c)).unwrap();
    let (la, lb) = (listing(a.path()), listing(b.path()));
    let names: Vec<&str> = la.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "eigvec.csv",
            "field.txt",
            "monitor.csv",
            "spectrum.csv",
            SUMMARY
        ]
    );
    assert_eq!(la, lb);
}

#[test]
fn summary_hashes_match_the_files() {
    let c = cfg(MARCH);
    let dir = tempfile::tempdir().unwrap();
    write_bundle(dir.path(), &c, &run_all(&c)).unwrap();
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join(SUMMARY)).unwrap()).unwrap();
    let files = summary["files"].as_array().unwrap();
    assert_eq!(files.len(), 4);
    for f in files {
        let bytes = fs::read(dir.path().join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
}

#[test]
fn rerunning_from_the_summary_reproduces_the_bundle() {
    let c = cfg(MARCH);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_bundle(a.path(), &c, &run_all(&c)).unwrap();
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join(SUMMARY)).unwrap()).unwrap();
    let again = cfg(summary["config"].as_str().unwrap());
    assert_eq!(again, c);
    write_bundle(b.path(), &again, &run_all(&again)).unwrap();
    assert_eq!(listing(a.path()), listing(b.path()));
}

#[test]
fn field_file_round_trips() {
    let c = cfg("scheme.solver = vanleer\nscheme.order = 1\n");
    let dir = tempfile::tempdir().unwrap();
    let out = run_all(&c);
    write_bundle(dir.path(), &c, &out).unwrap();
    let rows = read_field(&fs::read_to_string(dir.path().join("field.txt")).unwrap()).unwrap();
    let base = out[0].base.as_ref().unwrap();
    let expected = shockstab::experiment::primitive_rows(&base.field, &base.problem.gas).unwrap();
    assert_eq!(rows, expected);
    assert_eq!(rows.len(), 121);
}

#[test]
fn sweeps_write_a_table_and_per_point_files() {
    let c = cfg("scheme.order = 1\nsweep.scheme.solver = vanleer, hll\n");
    let dir = tempfile::tempdir().unwrap();
    write_bundle(dir.path(), &c, &run_all(&c)).unwrap();
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("point,scheme.solver,scheme,max_real"));
    assert!(lines[1].starts_with("0,vanleer,vanleer-1,"));
    assert!(lines[2].contains(",stable,"));
    for k in ["000", "001"] {
        assert!(dir.path().join(format!("spectrum-{k}.csv")).exists());
    }
}

#[test]
fn failed_sweep_points_are_recorded() {
    let c = cfg("problem.steady = march\nproblem.max_steps = 1\nscheme.order = 1\nsweep.scheme.solver = vanleer, hll\n");
    let out = run_all(&c);
    assert_eq!(out.len(), 2);
    assert!(out
        .iter()
        .all(|o| o.summary.error.is_some() && o.summary.analysis.is_none()));
}
