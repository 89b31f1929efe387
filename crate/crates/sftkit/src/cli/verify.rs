//! The `verify` command: a deterministic self-test over the bundled fixture
//! set, covering the invariant calculus, the building classification and
//! enumeration, and quick passes of both numerical oracles.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{fmt_f, parse};
use crate::buildings::{
    classify_embedded_breaking, enumerate_degenerations, local_adjunction, BreakingClass,
    BuildingType, Classification, CnBudgetReport, SearchBounds,
};
use crate::orbits::{OrbitClass, OrbitInstance};
use crate::reeb::{
    disk_frame_winding, find_closed_orbits, lens_quotient_report, self_linking_via_pushoff,
    EllipsoidParams, LensParams,
};
use crate::spectrum::{extremal_data, solve_spectrum, verify_spectral_axioms, MatrixLoop};

const FIXTURES: &str = include_str!("../../fixtures/standard.json");

type Check = (&'static str, fn(usize) -> Result<(), String>);

fn fail(msg: String) -> Result<(), String> {
    Err(msg)
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        fail(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn expect_close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        fail(format!("{what}: got {}, want {}", fmt_f(got), fmt_f(want)))
    }
}

fn fixture_curves(_threads: usize) -> Result<(), String> {
    let doc = parse(FIXTURES).map_err(|e| e.to_string())?;
    let u_w = doc.curve("u_w").ok_or("fixture u_w missing")?;
    expect("ind(u_w)", u_w.fredholm_index().map_err(|e| e.to_string())?, 2)?;
    expect("c_N(u_w)", u_w.normal_chern().map_err(|e| e.to_string())?, 0)?;
    expect(
        "u_w * u_w",
        u_w.self_intersection().map_err(|e| e.to_string())?,
        0,
    )?;
    let nice = u_w.nicely_embedded().map_err(|e| e.to_string())?;
    expect("nice(u_w)", nice.nice, true)?;
    expect("auto_transversal(u_w)", nice.auto_transversal, true)?;
    let sl = u_w.self_linking_of_plane().map_err(|e| e.to_string())?;
    expect("cz_disk(u_w)", sl.cz_disk, 3)?;
    expect("sl(u_w)", sl.sl, -1)?;
    for name in ["u_plus", "u_minus", "u_infty"] {
        let u = doc.curve(name).ok_or("fixture plane missing")?;
        expect("ind", u.fredholm_index().map_err(|e| e.to_string())?, 1)?;
        expect("c_N", u.normal_chern().map_err(|e| e.to_string())?, 0)?;
        expect(
            "self_int",
            u.self_intersection().map_err(|e| e.to_string())?,
            0,
        )?;
        let sl = u.self_linking_of_plane().map_err(|e| e.to_string())?;
        expect("(cz_disk, sl)", (sl.cz_disk, sl.sl), (2, -1))?;
    }
    let cyl = doc.curve("cyl_even").ok_or("fixture cyl_even missing")?;
    expect("ind(cyl)", cyl.fredholm_index().map_err(|e| e.to_string())?, 0)?;
    expect("c_N(cyl)", cyl.normal_chern().map_err(|e| e.to_string())?, 0)?;
    Ok(())
}

fn index_scaling(_threads: usize) -> Result<(), String> {
    // ind = 2n - 2 across ambient dimensions for the standard plane data.
    for n in 2..=5u32 {
        let orbit = OrbitInstance::new(OrbitClass::elliptic("gamma", 0.25), 1);
        let p = crate::curves::Puncture::morse_bott(
            crate::curves::PunctureSign::Positive,
            orbit,
            n as i64 - 1,
        );
        let u = crate::curves::PuncturedCurve {
            half_dim_n: n,
            genus: 0,
            punctures: vec![p],
            c1_rel: 1,
            somewhere_injective: true,
            embedded: true,
            delta: Some(0),
            delta_infinity: Some(0),
            immersed: None,
            cover_of: None,
        };
        expect(
            "ind",
            u.fredholm_index().map_err(|e| e.to_string())?,
            2 * n as i64 - 2,
        )?;
    }
    Ok(())
}

fn fixture_buildings(_threads: usize) -> Result<(), String> {
    let doc = parse(FIXTURES).map_err(|e| e.to_string())?;
    let (_, b1) = doc
        .buildings
        .iter()
        .find(|(n, _)| n == "bldg_type_i")
        .ok_or("fixture bldg_type_i missing")?;
    expect("validate", b1.validate().pass(), true)?;
    expect(
        "classify",
        b1.classify(),
        Classification::Type(BuildingType::I),
    )?;
    expect(
        "cn_budget",
        b1.cn_budget(0).map_err(|e| e.to_string())?,
        CnBudgetReport::AllEvenBreakings,
    )?;
    let (_, b6) = doc
        .buildings
        .iter()
        .find(|(n, _)| n == "bldg_type_vi")
        .ok_or("fixture bldg_type_vi missing")?;
    expect(
        "classify",
        b6.classify(),
        Classification::Type(BuildingType::VI),
    )?;
    expect(
        "cn_budget",
        b6.cn_budget(0).map_err(|e| e.to_string())?,
        CnBudgetReport::OddCylinderMain,
    )?;
    Ok(())
}

fn adjunction_table(_threads: usize) -> Result<(), String> {
    let simple = OrbitInstance::new(OrbitClass::hyperbolic("h", 1), 1);
    expect(
        "class(simple)",
        classify_embedded_breaking(&simple).map_err(|e| e.to_string())?,
        BreakingClass::Simple,
    )?;
    let bad = OrbitInstance::new(OrbitClass::hyperbolic("h", 1), 2);
    expect(
        "class(bad)",
        classify_embedded_breaking(&bad).map_err(|e| e.to_string())?,
        BreakingClass::BadDoubleCover,
    )?;
    let forb = OrbitInstance::new(OrbitClass::elliptic("e", 0.3), 2);
    expect(
        "class(elliptic double)",
        classify_embedded_breaking(&forb).map_err(|e| e.to_string())?,
        BreakingClass::Forbidden,
    )?;
    let bad_data = bad.spectral_data().map_err(|e| e.to_string())?;
    expect(
        "delta(bad)",
        local_adjunction(&bad_data, 2, 0, 0).map_err(|e| e.to_string())?,
        0,
    )?;
    let triple = OrbitInstance::new(OrbitClass::elliptic("e", 0.4), 3)
        .spectral_data()
        .map_err(|e| e.to_string())?;
    expect(
        "delta(elliptic triple)",
        local_adjunction(&triple, 3, 0, 0).map_err(|e| e.to_string())?,
        1,
    )?;
    Ok(())
}

fn enumeration(threads: usize) -> Result<(), String> {
    let bounds = SearchBounds::default();
    let one = enumerate_degenerations(1, &bounds, threads).map_err(|e| e.to_string())?;
    let mut types_one: Vec<String> = one.iter().map(|s| s.classify().to_string()).collect();
    types_one.sort();
    types_one.dedup();
    expect("types(index 1)", types_one, vec!["TypeI".to_string()])?;
    let two = enumerate_degenerations(2, &bounds, threads).map_err(|e| e.to_string())?;
    let mut types_two: Vec<String> = two.iter().map(|s| s.classify().to_string()).collect();
    types_two.sort();
    types_two.dedup();
    expect(
        "types(index 2)",
        types_two,
        ["TypeII", "TypeIII", "TypeIV", "TypeV", "TypeVI"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    )?;
    Ok(())
}

fn spectrum_oracle(_threads: usize) -> Result<(), String> {
    let theta = 0.35f64;
    for m in 1..=4u64 {
        let loop_ = MatrixLoop::constant(2.0 * PI * theta, 256, m).map_err(|e| e.to_string())?;
        let records = solve_spectrum(&loop_, 16.0).map_err(|e| e.to_string())?;
        let report = verify_spectral_axioms(&records).map_err(|e| e.to_string())?;
        if !report.pass() {
            return fail(format!("spectral axioms failed at m = {m}"));
        }
        let numeric = extremal_data(&records, m).map_err(|e| e.to_string())?;
        let closed = OrbitInstance::new(OrbitClass::elliptic("e", theta), m)
            .spectral_data()
            .map_err(|e| e.to_string())?;
        expect("extremal data", numeric, closed)?;
    }
    Ok(())
}

fn ellipsoid_oracle(threads: usize) -> Result<(), String> {
    let params = EllipsoidParams::new(1.0, std::f64::consts::SQRT_2, true)
        .map_err(|e| e.to_string())?;
    let orbits = find_closed_orbits(&params, 10.0, 12, 1e-8, threads).map_err(|e| e.to_string())?;
    expect("orbit count", orbits.len(), 2)?;
    expect_close("period 1", orbits[0].period, PI, 1e-9)?;
    expect_close("period 2", orbits[1].period, PI * std::f64::consts::SQRT_2, 1e-9)?;
    expect("cz_disk(gamma1)", orbits[0].cz_disk, 3)?;
    let lens = LensParams::new(3, 1).map_err(|e| e.to_string())?;
    let report = lens_quotient_report(&params, &lens).map_err(|e| e.to_string())?;
    if report.residual > 1e-10 {
        return fail(format!("lens invariance residual {}", fmt_f(report.residual)));
    }
    expect("noncontractible", report.noncontractible, true)?;
    Ok(())
}

fn disk_frame(_threads: usize) -> Result<(), String> {
    expect("disk frame winding", disk_frame_winding(512), -1)?;
    expect("pushoff self-linking", self_linking_via_pushoff(1e-3, 2048), -1)?;
    Ok(())
}

/// Runs every check, printing one line per check and a summary.
pub fn run(threads: usize) -> (String, bool) {
    let checks: Vec<Check> = vec![
        ("fixture_curves", fixture_curves),
        ("index_scaling", index_scaling),
        ("fixture_buildings", fixture_buildings),
        ("adjunction_table", adjunction_table),
        ("enumeration", enumeration),
        ("spectrum_oracle", spectrum_oracle),
        ("ellipsoid_oracle", ellipsoid_oracle),
        ("disk_frame", disk_frame),
    ];
    let mut out = String::new();
    let mut failures = 0usize;
    let total = checks.len();
    for (name, check) in checks {
        match check(threads) {
            Ok(()) => writeln!(out, "check {name}: PASS").unwrap(),
            Err(msg) => {
                failures += 1;
                writeln!(out, "check {name}: FAIL ({msg})").unwrap();
            }
        }
    }
    writeln!(
        out,
        "verify checks={total} failures={failures} result={}",
        if failures == 0 { "PASS" } else { "FAIL" }
    )
    .unwrap();
    (out, failures > 0)
}
