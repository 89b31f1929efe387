//! Batch front end: parse one input document, dispatch to the computational
//! modules, and emit deterministic reports.
//!
//! Output discipline: one record per line, fixed key order, floats printed
//! with 17 significant digits, records sorted canonically.  Exit codes: 0 on
//! success, 1 on any invariant or budget violation, 2 on input errors.  The
//! `SFTKIT_THREADS` environment variable caps concurrency (0 = serial); the
//! output is byte-identical regardless of the thread count.

mod input;
mod verify;

pub use input::{parse, InputDocument};

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::buildings::{
    classify_embedded_breaking, enumerate_degenerations, local_adjunction, BuildingShape,
    Classification, SearchBounds,
};
use crate::curves::CurveError;
use crate::orbits::OrbitInstance;
use crate::reeb::{
    find_closed_orbits, floquet_and_cz, lens_quotient_report, EllipsoidParams, LensParams,
};
use crate::spectrum::{solve_spectrum, verify_spectral_axioms, MatrixLoop};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("reference error: {0}")]
    Reference(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Formats a float with 17 significant digits, deterministically.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Parser, Debug)]
#[command(
    name = "sftkit",
    about = "Invariant calculus for punctured holomorphic curves, building enumeration, and numerical spectral/Reeb oracles",
    version
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report the integer invariants of every curve in the input document.
    Invariants {
        /// Input document (JSON).
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Classify every building in the input document against the six
    /// degeneration templates.
    Classify {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Enumerate the admissible degeneration shapes of the given total index.
    Enumerate {
        #[arg(long)]
        total_index: i64,
        #[arg(long, default_value_t = 4)]
        max_levels: usize,
        #[arg(long, default_value_t = 4)]
        max_components: usize,
    },
    /// Evaluate the local adjunction formula for a breaking orbit from the
    /// input document.
    LocalAdjunction {
        #[arg(short, long)]
        input: PathBuf,
        /// Name of the breaking orbit.
        #[arg(long)]
        orbit: String,
        #[arg(short, long, default_value_t = 1)]
        multiplicity: u64,
        #[arg(long, default_value_t = 0)]
        delta_inf_plus: u64,
        #[arg(long, default_value_t = 0)]
        delta_inf_minus: u64,
    },
    /// Solve the asymptotic-operator spectrum of a coefficient loop and
    /// check the spectral axioms.
    Spectrum {
        /// Constant loop S = c * Id.
        #[arg(long, conflicts_with_all = ["diagonal", "samples"])]
        constant: Option<f64>,
        /// Constant diagonal loop S = diag(c1, c2), passed as "c1,c2".
        #[arg(long, conflicts_with = "samples")]
        diagonal: Option<String>,
        /// JSON file with an array of [s11, s12, s22] samples.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1)]
        multiplicity: u64,
        #[arg(long, default_value_t = 15.0)]
        window: f64,
        /// Sample count for constant/diagonal loops.
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Detect the closed Reeb orbits of an irrational ellipsoid and report
    /// Floquet data, covers, and the lens quotient.
    Ellipsoid {
        #[arg(long)]
        a2: f64,
        #[arg(long)]
        b2: f64,
        /// Lens parameters "p,q".
        #[arg(long)]
        lens: Option<String>,
        /// Also report data of covers up to this multiplicity.
        #[arg(long)]
        cover: Option<u64>,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Period cap; defaults to 4 pi max(a2, b2).
        #[arg(long)]
        cap: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run the bundled fixture self-test.
    Verify,
}

/// Number of worker threads from `SFTKIT_THREADS` (0 or unset = serial).
pub fn thread_cap() -> usize {
    std::env::var("SFTKIT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

/// Executes a command; returns the report text and the process exit code.
pub fn run(command: &Command) -> (String, i32) {
    match dispatch(command) {
        Ok((text, violations)) => (text, i32::from(violations)),
        Err(e) => (format!("error: {e}\n"), 2),
    }
}

fn read_document(path: &PathBuf) -> Result<InputDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

fn dispatch(command: &Command) -> Result<(String, bool), CliError> {
    let threads = thread_cap();
    match command {
        Command::Invariants { input } => {
            let doc = read_document(input)?;
            Ok(invariants_report(&doc))
        }
        Command::Classify { input } => {
            let doc = read_document(input)?;
            Ok(classify_report(&doc))
        }
        Command::Enumerate {
            total_index,
            max_levels,
            max_components,
        } => enumerate_report(*total_index, *max_levels, *max_components, threads),
        Command::LocalAdjunction {
            input,
            orbit,
            multiplicity,
            delta_inf_plus,
            delta_inf_minus,
        } => {
            let doc = read_document(input)?;
            local_adjunction_report(&doc, orbit, *multiplicity, *delta_inf_plus, *delta_inf_minus)
        }
        Command::Spectrum {
            constant,
            diagonal,
            samples,
            multiplicity,
            window,
            n,
        } => {
            let loop_ = build_loop(constant, diagonal, samples, *multiplicity, *n)?;
            spectrum_report(&loop_, *window)
        }
        Command::Ellipsoid {
            a2,
            b2,
            lens,
            cover,
            grid,
            cap,
            tol,
        } => ellipsoid_report(*a2, *b2, lens, *cover, *grid, *cap, *tol, threads),
        Command::Verify => Ok(verify::run(threads)),
    }
}

fn is_violation(e: &CurveError) -> bool {
    matches!(
        e,
        CurveError::InternalInconsistency(_)
            | CurveError::NegativeDefect(_)
            | CurveError::NegativeWindPi(_)
    )
}

/// Integer invariants of all curves, one line each, fixed key order.
fn invariants_report(doc: &InputDocument) -> (String, bool) {
    let mut out = String::new();
    let mut violations = false;
    for (name, curve) in &doc.curves {
        let mut fields: Vec<(&str, String)> = vec![("curve", name.clone())];
        let mut errors: Vec<String> = Vec::new();
        let push_err = |e: &CurveError, errors: &mut Vec<String>, violations: &mut bool| {
            if is_violation(e) {
                *violations = true;
                errors.push(e.to_string());
            }
        };

        match curve.fredholm_index() {
            Ok(v) => fields.push(("ind", v.to_string())),
            Err(e) => {
                fields.push(("ind", "na".into()));
                push_err(&e, &mut errors, &mut violations);
            }
        }
        if curve.half_dim_n == 2 {
            match curve.normal_chern() {
                Ok(v) => fields.push(("c_N", v.to_string())),
                Err(e) => {
                    fields.push(("c_N", "na".into()));
                    push_err(&e, &mut errors, &mut violations);
                }
            }
        } else {
            fields.push(("c_N", "na".into()));
        }

        let has_windings = curve.punctures.iter().all(|p| p.wind_infinity.is_some());
        if curve.half_dim_n == 2 && curve.genus == 0 && has_windings && !curve.is_trivial_cylinder()
        {
            match curve.asymptotic_defect_and_windpi() {
                Ok(d) => {
                    fields.push(("d0", d.d0.to_string()));
                    fields.push(("wind_pi", d.wind_pi.to_string()));
                }
                Err(e) => {
                    fields.push(("d0", "na".into()));
                    fields.push(("wind_pi", "na".into()));
                    push_err(&e, &mut errors, &mut violations);
                }
            }
        } else {
            fields.push(("d0", "na".into()));
            fields.push(("wind_pi", "na".into()));
        }

        let mut self_int = None;
        if curve.half_dim_n == 2 && curve.genus == 0 && curve.somewhere_injective {
            match curve.self_intersection() {
                Ok(v) => {
                    self_int = Some(v);
                    fields.push(("self_int", v.to_string()));
                }
                Err(e) => {
                    fields.push(("self_int", "na".into()));
                    push_err(&e, &mut errors, &mut violations);
                }
            }
        } else {
            fields.push(("self_int", "na".into()));
        }

        if self_int.is_some() {
            match curve.nicely_embedded() {
                Ok(r) => {
                    fields.push(("nice", r.nice.to_string()));
                    fields.push(("auto_transversal", r.auto_transversal.to_string()));
                }
                Err(e) => {
                    fields.push(("nice", "na".into()));
                    fields.push(("auto_transversal", "na".into()));
                    push_err(&e, &mut errors, &mut violations);
                }
            }
        } else {
            fields.push(("nice", "na".into()));
            fields.push(("auto_transversal", "na".into()));
        }

        match curve.self_linking_of_plane() {
            Ok(sl) => {
                fields.push(("cz_disk", sl.cz_disk.to_string()));
                fields.push(("sl", sl.sl.to_string()));
            }
            Err(e) => {
                fields.push(("cz_disk", "na".into()));
                fields.push(("sl", "na".into()));
                if matches!(e, CurveError::InternalInconsistency(_)) {
                    push_err(&e, &mut errors, &mut violations);
                }
            }
        }

        let line: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(out, "{}", line.join(" ")).unwrap();
        errors.dedup();
        if !errors.is_empty() {
            write!(out, " violation=\"{}\"", errors.join("; ")).unwrap();
        }
        out.push('\n');
    }
    (out, violations)
}

fn classify_report(doc: &InputDocument) -> (String, bool) {
    let mut out = String::new();
    let mut violations = false;
    for (name, building) in &doc.buildings {
        match building.classify() {
            Classification::Type(t) => {
                writeln!(out, "building={name} type=Type{t}").unwrap();
            }
            Classification::Rejected(reason) => {
                violations = true;
                writeln!(out, "building={name} rejected=\"{reason}\"").unwrap();
            }
        }
    }
    (out, violations)
}

/// One canonical line per enumerated shape, tagged with its matched type.
pub(crate) fn shape_line(shape: &BuildingShape) -> String {
    let skel = shape.skeleton();
    let levels: Vec<String> = skel
        .levels
        .iter()
        .map(|level| {
            let comps: Vec<String> = level
                .iter()
                .map(|c| {
                    if c.trivial {
                        "trivial_cylinder".to_string()
                    } else {
                        let kind = match c.neg {
                            0 => "plane".to_string(),
                            1 => "cylinder".to_string(),
                            n => format!("curve{n}neg"),
                        };
                        format!("{kind}(ind={})", c.index)
                    }
                })
                .collect();
            format!("[{}]", comps.join(" "))
        })
        .collect();
    // Skeleton breakings are laid out breadth-first; walk the tree the same
    // way to pair each with its admissible multiplicities.
    let mut bf_mults: Vec<Vec<u64>> = Vec::new();
    let mut frontier = vec![&shape.root];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for node in frontier {
            for (b, c) in &node.children {
                bf_mults.push(b.multiplicities.clone());
                next.push(c);
            }
        }
        frontier = next;
    }
    let breakings: Vec<String> = skel
        .breakings
        .iter()
        .zip(&bf_mults)
        .map(|(b, m)| {
            let ms: Vec<String> = m.iter().map(|x| x.to_string()).collect();
            format!(
                "({}.{}->{}.{} p={} m={{{}}})",
                b.upper.0,
                b.upper.1,
                b.lower.0,
                b.lower.1,
                if b.parity == 1 { "odd" } else { "even" },
                ms.join(",")
            )
        })
        .collect();
    let ty = match shape.classify() {
        Classification::Type(t) => format!("Type{t}"),
        Classification::Rejected(_) => "unmatched".to_string(),
    };
    format!(
        "shape total_index={} levels={} breakings=[{}] type={}",
        shape.total_index,
        levels.join(";"),
        breakings.join(" "),
        ty
    )
}

fn enumerate_report(
    total_index: i64,
    max_levels: usize,
    max_components: usize,
    threads: usize,
) -> Result<(String, bool), CliError> {
    if !(1..=2).contains(&total_index) {
        return Err(CliError::Parse(format!(
            "--total-index must be 1 or 2, got {total_index}"
        )));
    }
    if max_levels < 3 || max_components < 3 {
        return Err(CliError::Parse(format!(
            "--max-levels and --max-components must be >= 3, got {max_levels} and {max_components}"
        )));
    }
    let bounds = SearchBounds {
        max_levels,
        max_components_per_level: max_components,
        ..SearchBounds::default()
    };
    let shapes = enumerate_degenerations(total_index, &bounds, threads)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let mut out = String::new();
    for s in &shapes {
        writeln!(out, "{}", shape_line(s)).unwrap();
    }
    Ok((out, false))
}

fn local_adjunction_report(
    doc: &InputDocument,
    orbit: &str,
    multiplicity: u64,
    dplus: u64,
    dminus: u64,
) -> Result<(String, bool), CliError> {
    let class = doc
        .orbit(orbit)
        .ok_or_else(|| CliError::Reference(format!("unknown orbit \"{orbit}\"")))?;
    let instance = OrbitInstance::new(class.clone(), multiplicity);
    let spectral = instance
        .spectral_data()
        .map_err(|e| CliError::Reference(e.to_string()))?;
    let mut out = String::new();
    let mut violation = false;
    match local_adjunction(&spectral, multiplicity, dplus, dminus) {
        Ok(delta) => {
            let class = classify_embedded_breaking(&instance)
                .map_err(|e| CliError::Reference(e.to_string()))?;
            writeln!(
                out,
                "local_adjunction orbit={orbit} multiplicity={multiplicity} parity={} sigma_minus={} sigma_plus={} delta={delta} class={class}",
                spectral.parity, spectral.sigma_minus, spectral.sigma_plus
            )
            .unwrap();
        }
        Err(e) => {
            violation = true;
            writeln!(out, "local_adjunction orbit={orbit} violation=\"{e}\"").unwrap();
        }
    }
    Ok((out, violation))
}

fn build_loop(
    constant: &Option<f64>,
    diagonal: &Option<String>,
    samples: &Option<PathBuf>,
    multiplicity: u64,
    n: usize,
) -> Result<MatrixLoop, CliError> {
    let loop_ = if let Some(c) = constant {
        MatrixLoop::constant(*c, n, multiplicity)
    } else if let Some(d) = diagonal {
        let parts: Vec<&str> = d.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Parse(format!(
                "--diagonal expects \"c1,c2\", got \"{d}\""
            )));
        }
        let c1: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("--diagonal c1: {e}")))?;
        let c2: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("--diagonal c2: {e}")))?;
        MatrixLoop::diagonal(c1, c2, n, multiplicity)
    } else if let Some(path) = samples {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let rows: Vec<[f64; 3]> =
            serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
        let mats: Vec<[[f64; 2]; 2]> = rows
            .iter()
            .map(|r| [[r[0], r[1]], [r[1], r[2]]])
            .collect();
        MatrixLoop::from_samples(&mats, multiplicity)
    } else {
        return Err(CliError::Parse(
            "one of --constant, --diagonal, --samples is required".into(),
        ));
    };
    loop_.map_err(|e| CliError::Parse(e.to_string()))
}

fn spectrum_report(loop_: &MatrixLoop, window: f64) -> Result<(String, bool), CliError> {
    let records = solve_spectrum(loop_, window).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut out = String::new();
    for r in &records {
        writeln!(
            out,
            "eig lambda={} winding={} cover={}",
            fmt_f(r.eigenvalue),
            r.winding,
            r.cover_multiplicity
        )
        .unwrap();
    }
    let violation;
    match verify_spectral_axioms(&records) {
        Ok(report) => {
            violation = !report.pass();
            writeln!(
                out,
                "axioms count={} monotone={} two_to_one={}",
                report.eigenvalue_count,
                if report.monotone_failures.is_empty() {
                    "pass".to_string()
                } else {
                    format!("fail({})", report.monotone_failures.len())
                },
                if report.two_to_one_failures.is_empty() {
                    "pass".to_string()
                } else {
                    format!("fail({})", report.two_to_one_failures.len())
                }
            )
            .unwrap();
        }
        Err(e) => {
            writeln!(out, "axioms error=\"{e}\"").unwrap();
            violation = true;
        }
    }
    Ok((out, violation))
}

#[allow(clippy::too_many_arguments)]
fn ellipsoid_report(
    a2: f64,
    b2: f64,
    lens: &Option<String>,
    cover: Option<u64>,
    grid: usize,
    cap: Option<f64>,
    tol: f64,
    threads: usize,
) -> Result<(String, bool), CliError> {
    let params =
        EllipsoidParams::new(a2, b2, true).map_err(|e| CliError::Parse(e.to_string()))?;
    if grid < 2 {
        return Err(CliError::Parse(format!("--grid must be >= 2, got {grid}")));
    }
    if !(tol > 0.0) {
        return Err(CliError::Parse(format!("--tol must be positive, got {tol}")));
    }
    let cap = cap.unwrap_or(4.0 * std::f64::consts::PI * a2.max(b2));
    if !(cap > 0.0) {
        return Err(CliError::Parse(format!("--cap must be positive, got {cap}")));
    }
    let orbits = find_closed_orbits(&params, cap, grid, tol, threads)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let mut out = String::new();
    for (i, o) in orbits.iter().enumerate() {
        writeln!(
            out,
            "orbit index={} initial=({},{},{},{}) period={} mult1=({},{}) mult2=({},{}) rotation={} cz_disk={} simple={}",
            i + 1,
            fmt_f(o.initial_point[0]),
            fmt_f(o.initial_point[1]),
            fmt_f(o.initial_point[2]),
            fmt_f(o.initial_point[3]),
            fmt_f(o.period),
            fmt_f(o.floquet_multipliers.0.re),
            fmt_f(o.floquet_multipliers.0.im),
            fmt_f(o.floquet_multipliers.1.re),
            fmt_f(o.floquet_multipliers.1.im),
            fmt_f(o.rotation_number),
            o.cz_disk,
            o.simple
        )
        .unwrap();
    }
    if let Some(kmax) = cover {
        for (i, o) in orbits.iter().enumerate() {
            for k in 2..=kmax {
                let fd = floquet_and_cz(o, &params, k)
                    .map_err(|e| CliError::Parse(e.to_string()))?;
                writeln!(
                    out,
                    "cover orbit={} k={} mult1=({},{}) mult2=({},{}) cz_disk={}",
                    i + 1,
                    k,
                    fmt_f(fd.multipliers.0.re),
                    fmt_f(fd.multipliers.0.im),
                    fmt_f(fd.multipliers.1.re),
                    fmt_f(fd.multipliers.1.im),
                    fd.cz_disk
                )
                .unwrap();
            }
        }
    }
    if let Some(spec) = lens {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Parse(format!(
                "--lens expects \"p,q\", got \"{spec}\""
            )));
        }
        let p: u64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("--lens p: {e}")))?;
        let q: u64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("--lens q: {e}")))?;
        let lens = LensParams::new(p, q).map_err(|e| CliError::Parse(e.to_string()))?;
        let report =
            lens_quotient_report(&params, &lens).map_err(|e| CliError::Parse(e.to_string()))?;
        writeln!(
            out,
            "lens p={p} q={q} residual={} periods_downstairs=({},{}) noncontractible={} note=\"{}\"",
            fmt_f(report.residual),
            fmt_f(report.downstairs_periods.0),
            fmt_f(report.downstairs_periods.1),
            report.noncontractible,
            report.note
        )
        .unwrap();
    }
    Ok((out, false))
}
