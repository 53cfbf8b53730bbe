use std::process::Command;

fn shockstab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_shockstab"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn analyze_succeeds_and_reports_the_verdict() {
    let out = shockstab(&[
        "analyze",
        "--set",
        "scheme.solver=vanleer",
        "--set",
        "scheme.order=1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Stable"), "{text}");
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["analyze", "--preset", "nope"][..],
        &["analyze", "--set", "problem.nope=1"],
        &["analyze", "--set", "scheme.order=3"],
        &["analyze", "--set", "problem.mach=0.5"],
        &["analyze", "--set", "noequals"],
    ] {
        let out = shockstab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    // a steady solve with no iterations cannot converge
    let out = shockstab(&[
        "analyze",
        "--set",
        "problem.steady=march",
        "--set",
        "problem.max_steps=1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = shockstab(&["analyze", "--config", "/nonexistent/shockstab.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.cfg");
    std::fs::write(&path, "problem.epsilon = 0.3\nrun.seed = 4\n").unwrap();
    let p = path.to_str().unwrap();
    let out = shockstab(&[
        "config",
        "--preset",
        "near-shock-cap",
        "--config",
        p,
        "--set",
        "run.seed=5",
        "--seed",
        "6",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("scheme.solver = hll\n"));
    assert!(text.contains("problem.epsilon = 0.3\n"));
    assert!(text.contains("run.seed = 6\n"));
    assert!(text.contains("sweep.scheme.cap = none, first, second, smoothest-third\n"));
}

#[test]
fn presets_are_listed() {
    let text = String::from_utf8(shockstab(&["presets"]).stdout).unwrap();
    for name in [
        "validation-sweep",
        "solver-grid",
        "hybrid",
        "entropy-eps",
        "char-vs-prim",
        "localization",
    ] {
        assert!(text.contains(name), "{name}");
    }
}
