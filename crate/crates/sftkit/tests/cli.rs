//! End-to-end checks of the command-line interface: report contents, exit
//! codes, and parse/reference diagnostics.

use std::path::PathBuf;
use std::process::Output;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_sftkit"))
        .args(args)
        .env("SFTKIT_THREADS", "0")
        .output()
        .expect("failed to spawn sftkit")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn invariants_of_the_standard_fixture() {
    let out = run(&[
        "invariants",
        "-i",
        fixture("standard.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let u_w = text.lines().find(|l| l.contains("curve=u_w")).unwrap();
    assert!(u_w.contains("ind=2"));
    assert!(u_w.contains("c_N=0"));
    assert!(u_w.contains("self_int=0"));
    assert!(u_w.contains("nice=true"));
}

#[test]
fn winding_violation_exits_with_one() {
    let out = run(&[
        "invariants",
        "-i",
        fixture("violating.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("violation="));
}

#[test]
fn undefined_orbit_reference_exits_with_two() {
    let dir = std::env::temp_dir().join("sftkit_cli_test_badref");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("badref.json");
    std::fs::write(
        &path,
        r#"{
  "format_version": 1,
  "orbits": [],
  "curves": [
    {"name": "u", "n": 2, "c1_rel": 0, "somewhere_injective": true,
     "embedded": true, "delta": 0, "delta_infinity": 0,
     "punctures": [{"sign": "positive", "orbit": "ghost"}]}
  ]
}"#,
    )
    .unwrap();
    let out = run(&["invariants", "-i", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ghost"), "{err}");
    assert!(err.contains("curves[0].punctures[0].orbit"), "{err}");
}

#[test]
fn malformed_document_exits_with_two() {
    let dir = std::env::temp_dir().join("sftkit_cli_test_parse");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["invariants", "-i", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_reports_the_fixture_types() {
    let out = run(&["classify", "-i", fixture("standard.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("building=bldg_type_i type=TypeI"));
    assert!(text.contains("building=bldg_type_vi type=TypeVI"));
}

#[test]
fn enumerate_emits_five_shapes_for_index_two() {
    let out = run(&["enumerate", "--total-index", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for ty in ["TypeII", "TypeIII", "TypeIV", "TypeV", "TypeVI"] {
        assert_eq!(
            lines.iter().filter(|l| l.ends_with(&format!("type={ty}"))).count(),
            1,
            "{ty}"
        );
    }
}

#[test]
fn unknown_command_exits_with_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_flags_exit_with_two() {
    for args in [
        vec!["enumerate", "--total-index", "3"],
        vec!["enumerate", "--total-index", "2", "--max-levels", "2"],
        vec!["ellipsoid", "--a2", "1", "--b2", "1.4142135623730951", "--grid", "1"],
        vec!["ellipsoid", "--a2", "1", "--b2", "1.0"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn spectrum_and_local_adjunction_reports() {
    let out = run(&["spectrum", "--constant", "1.0", "--window", "15"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("eig lambda=-1.0000000000000000e0 winding=0 cover=1"));
    assert!(text.lines().last().unwrap().contains("monotone=pass two_to_one=pass"));

    let out = run(&[
        "local-adjunction",
        "-i",
        fixture("standard.json").to_str().unwrap(),
        "--orbit",
        "gamma_odd",
        "-m",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("delta=0 class=BadDoubleCover"));
}

#[test]
fn spectrum_accepts_sampled_loops() {
    let dir = std::env::temp_dir().join("sftkit_cli_test_samples");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.json");
    // A smooth loop sampled at 128 points, as [s11, s12, s22] triples.
    let rows: Vec<[f64; 3]> = (0..128)
        .map(|i| {
            let t = i as f64 / 128.0 * std::f64::consts::TAU;
            [0.3 + 0.2 * t.cos(), 0.1 * t.sin(), -0.4 + 0.2 * t.cos()]
        })
        .collect();
    std::fs::write(&path, serde_json::to_string(&rows).unwrap()).unwrap();
    let out = run(&[
        "spectrum",
        "--samples",
        path.to_str().unwrap(),
        "--window",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().contains("monotone=pass two_to_one=pass"));
}

#[test]
fn verify_passes_on_the_bundled_fixtures() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().contains("result=PASS"));
    assert!(!text.contains("FAIL"));
}
