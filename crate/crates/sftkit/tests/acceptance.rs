//! Acceptance suite: one test per criterion, each printing a pass line with
//! its runtime.  Tolerances and budgets are pinned in the assertions.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sftkit::buildings::{
    classify_embedded_breaking, enumerate_degenerations, local_adjunction, thm_templates,
    BreakingClass, BuildingType, Classification, SearchBounds,
};
use sftkit::curves::{CoverData, Puncture, PuncturedCurve, PunctureSign};
use sftkit::orbits::{OrbitClass, OrbitInstance};
use sftkit::reeb::{
    disk_frame_winding, find_closed_orbits, floquet_and_cz, lens_quotient_report,
    self_linking_via_pushoff, EllipsoidParams, LensParams,
};
use sftkit::spectrum::{extremal_data, solve_spectrum, verify_spectral_axioms, MatrixLoop};

fn plane_fixture(n: u32) -> PuncturedCurve {
    let orbit = OrbitInstance::new(OrbitClass::elliptic("gamma_inf", 0.26179938779914946), 1);
    let puncture =
        Puncture::morse_bott(PunctureSign::Positive, orbit, n as i64 - 1).with_wind_infinity(0);
    PuncturedCurve {
        half_dim_n: n,
        genus: 0,
        punctures: vec![puncture],
        c1_rel: 1,
        somewhere_injective: true,
        embedded: true,
        delta: Some(0),
        delta_infinity: Some(0),
        immersed: None,
        cover_of: None,
    }
}

fn even_end_plane(name: &str) -> PuncturedCurve {
    let orbit = OrbitInstance::new(OrbitClass::hyperbolic(name, 2), 1);
    let puncture = Puncture::nondegenerate(PunctureSign::Positive, orbit)
        .unwrap()
        .with_wind_infinity(1);
    PuncturedCurve {
        half_dim_n: 2,
        genus: 0,
        punctures: vec![puncture],
        c1_rel: 0,
        somewhere_injective: true,
        embedded: true,
        delta: Some(0),
        delta_infinity: Some(0),
        immersed: None,
        cover_of: None,
    }
}

fn report(criterion: usize, name: &str, start: Instant, budget_secs: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion {criterion} ({name}): PASS in {elapsed:.3}s (budget {budget_secs}s)");
    assert!(
        elapsed < budget_secs,
        "criterion {criterion} exceeded its {budget_secs}s budget: {elapsed:.3}s"
    );
}

#[test]
fn criterion_01_index_fixtures() {
    let start = Instant::now();
    for n in 2..=5u32 {
        let u = plane_fixture(n);
        assert_eq!(u.fredholm_index().unwrap(), 2 * n as i64 - 2, "n = {n}");
    }
    report(1, "index fixtures ind = 2n-2", start, 1.0);
}

#[test]
fn criterion_02_adjunction_fixtures() {
    let start = Instant::now();
    let u_w = plane_fixture(2);
    assert_eq!(u_w.self_intersection().unwrap(), 0);
    assert!(u_w.nicely_embedded().unwrap().nice);
    for name in ["u_plus", "u_minus", "u_infty"] {
        let u = even_end_plane(name);
        assert_eq!(u.fredholm_index().unwrap(), 1);
        assert_eq!(u.normal_chern().unwrap(), 0);
        assert_eq!(u.self_intersection().unwrap(), 0);
        assert!(u.nicely_embedded().unwrap().nice);
    }
    report(2, "adjunction fixtures", start, 1.0);
}

#[test]
fn criterion_03_index_chern_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 10_000 {
        let genus = rng.random_range(0..3u32);
        let n_punct = rng.random_range(1..=5usize);
        let mut punctures = Vec::new();
        let mut ok = true;
        for i in 0..n_punct {
            let sign = if rng.random_bool(0.5) {
                PunctureSign::Positive
            } else {
                PunctureSign::Negative
            };
            let orbit = if rng.random_bool(0.5) {
                OrbitClass::elliptic(format!("e{i}"), rng.random_range(-3.0..3.0))
            } else {
                OrbitClass::hyperbolic(format!("h{i}"), rng.random_range(-6..=6))
            };
            let m = rng.random_range(1..=4u64);
            match Puncture::nondegenerate(sign, OrbitInstance::new(orbit, m)) {
                Ok(p) => punctures.push(p),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let u = PuncturedCurve {
            half_dim_n: 2,
            genus,
            punctures,
            c1_rel: rng.random_range(-3..=3),
            somewhere_injective: true,
            embedded: false,
            delta: None,
            delta_infinity: None,
            immersed: None,
            cover_of: None,
        };
        // Independent route: the defining formula for c_N.
        let chi = u.euler_characteristic();
        let direct = u.c1_rel - chi
            + u.positive_punctures()
                .map(|p| p.spectral.alpha_minus)
                .sum::<i64>()
            - u.negative_punctures()
                .map(|p| p.spectral.alpha_plus)
                .sum::<i64>();
        let ind = u.fredholm_index().unwrap();
        let gamma0 = u.even_punctures() as i64;
        assert_eq!(2 * direct, ind - 2 + 2 * genus as i64 + gamma0);
        // The library operation must agree with the direct formula.
        assert_eq!(u.normal_chern().unwrap(), direct);
        checked += 1;
    }
    report(3, "index/normal-Chern identity on 10^4 curves", start, 5.0);
}

fn pair_of_pants(orbit: &OrbitClass, k: u64, l: u64, two_positive: bool) -> PuncturedCurve {
    let underlying = PuncturedCurve {
        half_dim_n: 2,
        genus: 0,
        punctures: vec![
            Puncture::nondegenerate(
                PunctureSign::Positive,
                OrbitInstance::new(orbit.clone(), 1),
            )
            .unwrap(),
            Puncture::nondegenerate(
                PunctureSign::Negative,
                OrbitInstance::new(orbit.clone(), 1),
            )
            .unwrap(),
        ],
        c1_rel: 0,
        somewhere_injective: true,
        embedded: true,
        delta: Some(0),
        delta_infinity: Some(0),
        immersed: None,
        cover_of: None,
    };
    let (lone, pair) = if two_positive {
        (PunctureSign::Negative, PunctureSign::Positive)
    } else {
        (PunctureSign::Positive, PunctureSign::Negative)
    };
    PuncturedCurve {
        half_dim_n: 2,
        genus: 0,
        punctures: vec![
            Puncture::nondegenerate(pair, OrbitInstance::new(orbit.clone(), k)).unwrap(),
            Puncture::nondegenerate(pair, OrbitInstance::new(orbit.clone(), l)).unwrap(),
            Puncture::nondegenerate(lone, OrbitInstance::new(orbit.clone(), k + l)).unwrap(),
        ],
        c1_rel: 0,
        somewhere_injective: false,
        embedded: false,
        delta: None,
        delta_infinity: None,
        immersed: None,
        cover_of: Some(CoverData {
            underlying: Box::new(underlying),
            degree: k + l,
            branch_count: 1,
        }),
    }
}

#[test]
fn criterion_04_cover_index_bounds() {
    let start = Instant::now();
    // Pair-of-pants covers of elliptic trivial cylinders, both orientations.
    let mut rng = ChaCha8Rng::seed_from_u64(7_771);
    let mut thetas = 0;
    while thetas < 100 {
        let theta: f64 = rng.random_range(0.001..4.0);
        let orbit = OrbitClass::elliptic("e", theta);
        if orbit.check_nondegenerate().is_err()
            || (1..=40).any(|j| orbit.cz_of_cover(j).is_err())
        {
            continue;
        }
        for k in 1..=20u64 {
            for l in 1..=20u64 {
                for two_positive in [true, false] {
                    let u = pair_of_pants(&orbit, k, l, two_positive);
                    let report = u.cover_index_check().unwrap();
                    assert!(report.pass, "theta={theta} k={k} l={l}");
                    assert!(report.ind_cover >= 0);
                }
            }
        }
        thetas += 1;
    }

    // Synthetic covers of curves with hyperbolic ends: equality iff unbranched.
    let mut built = 0;
    while built < 1000 {
        let n_ends = rng.random_range(1..=3usize);
        let mut v_punctures = Vec::new();
        for i in 0..n_ends {
            let sign = if i == 0 || rng.random_bool(0.5) {
                PunctureSign::Positive
            } else {
                PunctureSign::Negative
            };
            let orbit = OrbitClass::hyperbolic(format!("o{i}"), rng.random_range(-4..=4));
            v_punctures.push(
                Puncture::nondegenerate(sign, OrbitInstance::new(orbit, 1)).unwrap(),
            );
        }
        let v = PuncturedCurve {
            half_dim_n: 2,
            genus: 0,
            punctures: v_punctures,
            c1_rel: rng.random_range(-2..=2),
            somewhere_injective: true,
            embedded: true,
            delta: Some(0),
            delta_infinity: Some(0),
            immersed: None,
            cover_of: None,
        };
        let k = rng.random_range(2..=4u64);
        // Random partition of k over each end of v.
        let mut u_punctures = Vec::new();
        for p in &v.punctures {
            let mut left = k;
            while left > 0 {
                let part = rng.random_range(1..=left);
                u_punctures.push(
                    Puncture::nondegenerate(
                        p.sign,
                        OrbitInstance::new(p.instance.orbit.clone(), part),
                    )
                    .unwrap(),
                );
                left -= part;
            }
        }
        let chi_v = v.euler_characteristic();
        let n_gamma_u = u_punctures.len() as i64;
        // Z = -chi_u + k chi_v with chi_u = 2 - 2 g_u - #Gamma_u; raise the
        // genus until the branch count is admissible.
        let z0 = -(2 - n_gamma_u) + k as i64 * chi_v;
        let g_min = if z0 >= 0 { 0 } else { (-z0 + 1) / 2 };
        let g_u = g_min + rng.random_range(0..=1);
        let z = z0 + 2 * g_u;
        if z < 0 {
            continue;
        }
        let u = PuncturedCurve {
            half_dim_n: 2,
            genus: g_u as u32,
            punctures: u_punctures,
            c1_rel: k as i64 * v.c1_rel,
            somewhere_injective: false,
            embedded: false,
            delta: None,
            delta_infinity: None,
            immersed: None,
            cover_of: Some(CoverData {
                underlying: Box::new(v),
                degree: k,
                branch_count: z as u64,
            }),
        };
        let report = u.cover_index_check().unwrap();
        assert!(report.pass);
        assert_eq!(report.branch_count, z as u64);
        assert_eq!(report.equality, z == 0);
        built += 1;
    }
    report(4, "cover index bounds (exhaustive + synthetic)", start, 10.0);
}

#[test]
fn criterion_05_local_adjunction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut orbits: Vec<OrbitClass> = Vec::new();
    while orbits.len() < 100 {
        let orbit = OrbitClass::elliptic(format!("e{}", orbits.len()), rng.random_range(0.0..3.0));
        if orbit.check_nondegenerate().is_ok() {
            orbits.push(orbit);
        }
    }
    for cz in -5..=5i64 {
        orbits.push(OrbitClass::hyperbolic(format!("h{cz}"), cz));
    }
    for orbit in &orbits {
        for m in 1..=6u64 {
            let inst = OrbitInstance::new(orbit.clone(), m);
            let s = match inst.spectral_data() {
                Ok(s) => s,
                Err(_) => continue, // resonant cover of an elliptic orbit
            };
            // Correction terms are individually nonnegative.
            let t1 = s.sigma_plus as i64 - 1;
            let t2 = s.sigma_minus as i64 - 1;
            let t3 = (m as i64 - 1) * s.parity as i64;
            assert!(t1 >= 0 && t2 >= 0 && t3 >= 0);
            let rhs = t1 + t2 + t3;
            let delta = local_adjunction(&s, m, 0, 0).unwrap();
            assert_eq!(2 * delta as i64, rhs);
            let class = classify_embedded_breaking(&inst).unwrap();
            assert_eq!(
                class == BreakingClass::Forbidden,
                rhs > 0,
                "orbit {:?} m={m}",
                orbit.kind
            );
            // Only the two allowed cases escape Forbidden.
            let allowed = m == 1 || (m == 2 && inst.is_bad_orbit());
            assert_eq!(class != BreakingClass::Forbidden, allowed);
        }
    }
    report(5, "local adjunction and breaking classification", start, 5.0);
}

#[test]
fn criterion_06_enumeration_oracle_equivalence() {
    let start = Instant::now();
    let bounds = SearchBounds::default();
    let one = enumerate_degenerations(1, &bounds, 0).unwrap();
    let two = enumerate_degenerations(2, &bounds, 0).unwrap();
    let types = |shapes: &[sftkit::buildings::BuildingShape]| -> Vec<BuildingType> {
        let mut out = Vec::new();
        for s in shapes {
            match s.classify() {
                Classification::Type(t) => {
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
                Classification::Rejected(r) => panic!("shape rejected: {r}"),
            }
        }
        out.sort();
        out
    };
    assert_eq!(types(&one), vec![BuildingType::I]);
    assert_eq!(
        types(&two),
        vec![
            BuildingType::II,
            BuildingType::III,
            BuildingType::IV,
            BuildingType::V,
            BuildingType::VI
        ]
    );
    for (ty, template) in thm_templates(&bounds) {
        let pool = if ty == BuildingType::I { &one } else { &two };
        assert!(
            pool.iter()
                .any(|s| s.canonical_string() == template.canonical_string()),
            "template {ty} not rediscovered"
        );
    }
    report(6, "enumeration matches the degeneration list", start, 60.0);
}

#[test]
fn criterion_07_spectral_oracle_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut done = 0;
    while done < 50 {
        let theta: f64 = rng.random_range(0.05..0.95);
        if (1..=4).any(|k| {
            let kt = theta * k as f64;
            (kt - kt.round()).abs() < 1e-3
        }) {
            continue;
        }
        let m = (done % 4 + 1) as u64;
        let c = 2.0 * PI * theta;
        let loop_ = MatrixLoop::constant(c, 2048, m).unwrap();
        let records = solve_spectrum(&loop_, 16.0).unwrap();
        // Eigenvalues match the closed form 2 pi l - m c to 1e-6.
        for r in &records {
            let l = ((r.eigenvalue + m as f64 * c) / (2.0 * PI)).round();
            let closed = 2.0 * PI * l - m as f64 * c;
            assert!(
                (r.eigenvalue - closed).abs() < 1e-6,
                "lambda {} vs {closed}",
                r.eigenvalue
            );
            assert_eq!(r.winding, l as i64);
        }
        // Monotone 2-to-1 winding axiom on every solved spectrum.
        let axioms = verify_spectral_axioms(&records).unwrap();
        assert!(axioms.pass(), "{axioms:?}");
        // Extremal data matches the closed-form rules exactly.
        let numeric = extremal_data(&records, m).unwrap();
        let closed = OrbitInstance::new(OrbitClass::elliptic("e", theta), m)
            .spectral_data()
            .unwrap();
        assert_eq!(numeric, closed, "theta={theta} m={m}");
        done += 1;
    }
    report(7, "spectral oracle agreement (50 loops, N=2048)", start, 120.0);
}

#[test]
fn criterion_08_ellipsoid_dynamics() {
    let start = Instant::now();
    let params = EllipsoidParams::new(1.0, SQRT_2, true).unwrap();
    let orbits = find_closed_orbits(&params, 10.0, 32, 1e-8, 0).unwrap();
    assert_eq!(orbits.len(), 2);
    assert!((orbits[0].period - PI).abs() < 1e-9);
    assert!((orbits[1].period - PI * SQRT_2).abs() < 1e-9);
    // Floquet multipliers of gamma_1: e^{+-2 pi i / sqrt 2} to 1e-7.
    let expected = num_complex::Complex64::from_polar(1.0, 2.0 * PI / SQRT_2);
    let (m1, m2) = orbits[0].floquet_multipliers;
    let err = (m1 - expected).norm().min((m1 - expected.conj()).norm());
    assert!(err < 1e-7);
    assert!((m2 - m1.conj()).norm() < 1e-7);
    // All covers k <= 10 nondegenerate.
    for orbit in &orbits {
        for k in 1..=10u64 {
            floquet_and_cz(orbit, &params, k).unwrap();
        }
    }
    // L(3,1) quotient report passes invariance at residual < 1e-10.
    let lens = LensParams::new(3, 1).unwrap();
    let rep = lens_quotient_report(&params, &lens).unwrap();
    assert!(rep.residual < 1e-10);
    report(8, "ellipsoid Reeb dynamics", start, 120.0);
}

#[test]
fn criterion_09_self_linking() {
    let start = Instant::now();
    let u1 = even_end_plane("gamma_even");
    let sl1 = u1.self_linking_of_plane().unwrap();
    assert_eq!((sl1.cz_disk, sl1.sl), (2, -1));
    let u2 = plane_fixture(2);
    let sl2 = u2.self_linking_of_plane().unwrap();
    assert_eq!((sl2.cz_disk, sl2.sl), (3, -1));
    // Disk-frame-shift oracle on the ellipsoid: the Seifert-disk frame makes
    // one negative twist relative to the constant frame, and the push-off
    // count gives sl(gamma_1) = -1.
    assert_eq!(disk_frame_winding(4096), -1);
    assert_eq!(self_linking_via_pushoff(1e-3, 4096), -1);
    let params = EllipsoidParams::new(1.0, SQRT_2, true).unwrap();
    let orbits = find_closed_orbits(&params, 10.0, 16, 1e-8, 0).unwrap();
    let gamma1 = &orbits[0];
    // theta_D = rho + 1; alpha_minus in the disk frame gives sl = -1.
    let theta_d = gamma1.rotation_number + 1.0;
    assert_eq!(gamma1.cz_disk, 2 * theta_d.floor() as i64 + 1);
    let alpha_minus_disk = (gamma1.cz_disk - gamma1.cz_disk.rem_euclid(2)) / 2;
    assert_eq!(-alpha_minus_disk, -1);
    report(9, "self-linking values", start, 120.0);
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_sftkit");
    let run = |args: &[&str], threads: &str| -> (Vec<u8>, i32) {
        let out = std::process::Command::new(bin)
            .args(args)
            .env("SFTKIT_THREADS", threads)
            .output()
            .expect("failed to spawn sftkit");
        (out.stdout, out.status.code().unwrap_or(-1))
    };
    for args in [
        vec!["verify"],
        vec!["enumerate", "--total-index", "1"],
        vec!["enumerate", "--total-index", "2"],
    ] {
        let mut outputs = Vec::new();
        for threads in ["0", "8"] {
            for _ in 0..2 {
                outputs.push(run(&args, threads));
            }
        }
        let (first, code) = &outputs[0];
        assert_eq!(*code, 0, "args {args:?}");
        assert!(!first.is_empty());
        for (bytes, c) in &outputs[1..] {
            assert_eq!(c, code);
            assert_eq!(bytes, first, "output differs for {args:?}");
        }
    }
    report(10, "byte-identical output across thread counts", start, 120.0);
}

// Auxiliary intersection-parity property: u*u - c_N - sum(sigma_end - 1) is
// always even for curves with singularity data.
#[test]
fn self_intersection_parity_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut done = 0;
    while done < 500 {
        let orbit = if rng.random_bool(0.5) {
            OrbitClass::elliptic("e", rng.random_range(0.0..2.0))
        } else {
            OrbitClass::hyperbolic("h", rng.random_range(-4..=4))
        };
        let m = rng.random_range(1..=4u64);
        let inst = OrbitInstance::new(orbit, m);
        let puncture = match Puncture::nondegenerate(PunctureSign::Positive, inst) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let u = PuncturedCurve {
            half_dim_n: 2,
            genus: 0,
            punctures: vec![puncture],
            c1_rel: rng.random_range(-2..=2),
            somewhere_injective: true,
            embedded: false,
            delta: Some(rng.random_range(0..3)),
            delta_infinity: Some(rng.random_range(0..2)),
            immersed: None,
            cover_of: None,
        };
        let self_int = u.self_intersection().unwrap();
        let cn = u.normal_chern().unwrap();
        let sigma: i64 = u
            .punctures
            .iter()
            .map(|p| match p.sign {
                PunctureSign::Positive => p.spectral.sigma_minus as i64 - 1,
                PunctureSign::Negative => p.spectral.sigma_plus as i64 - 1,
            })
            .sum();
        assert_eq!((self_int - cn - sigma).rem_euclid(2), 0);
        done += 1;
    }
}
