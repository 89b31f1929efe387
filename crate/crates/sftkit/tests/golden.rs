//! Golden-file regression tests: the canonical reports of the deterministic
//! commands are pinned byte for byte.  Regenerate a file by running the
//! command and copying stdout over `tests/golden/<name>.txt`.

fn run(args: &[&str]) -> String {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_sftkit"))
        .args(args)
        .env("SFTKIT_THREADS", "0")
        .output()
        .expect("failed to spawn sftkit");
    assert_eq!(out.status.code(), Some(0), "args {args:?}");
    String::from_utf8(out.stdout).expect("report is not UTF-8")
}

#[test]
fn enumerate_index_one_matches_golden() {
    let expected = include_str!("golden/enumerate_index1.txt");
    assert_eq!(run(&["enumerate", "--total-index", "1"]), expected);
}

#[test]
fn enumerate_index_two_matches_golden() {
    let expected = include_str!("golden/enumerate_index2.txt");
    assert_eq!(run(&["enumerate", "--total-index", "2"]), expected);
}

#[test]
fn verify_matches_golden() {
    let expected = include_str!("golden/verify.txt");
    assert_eq!(run(&["verify"]), expected);
}
