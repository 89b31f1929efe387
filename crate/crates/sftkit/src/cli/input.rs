//! The batch input document: a strict JSON object with `format_version: 1`
//! and lists of orbit, curve and building records.  Curves reference orbits
//! by name; buildings reference curves by name and trivial cylinders by
//! orbit.  All references are resolved and all module invariants checked at
//! load time, with diagnostics naming the first offending path.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::buildings::{Breaking, Building, Component, ComponentRef};
use crate::curves::{CoverData, Puncture, PuncturedCurve, PunctureSign};
use crate::orbits::{OrbitClass, OrbitInstance};

use super::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: u32,
    #[serde(default)]
    orbits: Vec<RawOrbit>,
    #[serde(default)]
    curves: Vec<RawCurve>,
    #[serde(default)]
    buildings: Vec<RawBuilding>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrbit {
    name: String,
    kind: String,
    theta: Option<f64>,
    cz: Option<i64>,
    period: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPuncture {
    sign: String,
    orbit: String,
    #[serde(default = "one")]
    multiplicity: u64,
    #[serde(default)]
    morse_bott: bool,
    perturbed_cz: Option<i64>,
    wind_infinity: Option<i64>,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    name: String,
    #[serde(default = "two")]
    n: u32,
    #[serde(default)]
    genus: u32,
    punctures: Vec<RawPuncture>,
    c1_rel: i64,
    somewhere_injective: bool,
    embedded: bool,
    delta: Option<u64>,
    delta_infinity: Option<u64>,
    immersed: Option<bool>,
    cover_of: Option<RawCover>,
}

fn two() -> u32 {
    2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    underlying: String,
    degree: u64,
    #[serde(default)]
    branch_count: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    curve: Option<String>,
    trivial_cylinder: Option<RawTrivial>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrivial {
    orbit: String,
    #[serde(default = "one")]
    multiplicity: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBreaking {
    orbit: String,
    #[serde(default = "one")]
    multiplicity: u64,
    upper: [usize; 2],
    lower: [usize; 2],
    #[serde(default)]
    decoration_index: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBuilding {
    name: String,
    main_level: Vec<RawComponent>,
    #[serde(default)]
    lower_levels: Vec<Vec<RawComponent>>,
    #[serde(default)]
    breakings: Vec<RawBreaking>,
}

/// A fully resolved input document.
#[derive(Debug, Clone, Default)]
pub struct InputDocument {
    pub orbits: Vec<OrbitClass>,
    pub curves: Vec<(String, PuncturedCurve)>,
    pub buildings: Vec<(String, Building)>,
}

impl InputDocument {
    pub fn orbit(&self, name: &str) -> Option<&OrbitClass> {
        self.orbits.iter().find(|o| o.name == name)
    }

    pub fn curve(&self, name: &str) -> Option<&PuncturedCurve> {
        self.curves
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
    }
}

/// Parses and resolves a document, returning the first offending path on
/// failure.
pub fn parse(text: &str) -> Result<InputDocument, CliError> {
    let raw: RawDocument =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if raw.format_version != 1 {
        return Err(CliError::Parse(format!(
            "format_version: expected 1, got {}",
            raw.format_version
        )));
    }

    let mut orbits: Vec<OrbitClass> = Vec::new();
    let mut names: BTreeMap<&str, ()> = BTreeMap::new();
    for (i, o) in raw.orbits.iter().enumerate() {
        if names.insert(&o.name, ()).is_some() {
            return Err(CliError::Reference(format!(
                "orbits[{i}].name: duplicate orbit \"{}\"",
                o.name
            )));
        }
        let kind = match o.kind.as_str() {
            "elliptic" => {
                let theta = o.theta.ok_or_else(|| {
                    CliError::Parse(format!("orbits[{i}].theta: required for elliptic orbits"))
                })?;
                crate::orbits::OrbitKind::Elliptic { theta }
            }
            "hyperbolic" => {
                let cz = o.cz.ok_or_else(|| {
                    CliError::Parse(format!("orbits[{i}].cz: required for hyperbolic orbits"))
                })?;
                crate::orbits::OrbitKind::Hyperbolic { cz }
            }
            other => {
                return Err(CliError::Parse(format!(
                    "orbits[{i}].kind: expected \"elliptic\" or \"hyperbolic\", got \"{other}\""
                )))
            }
        };
        if let Some(t) = o.period {
            if !(t > 0.0) {
                return Err(CliError::Parse(format!(
                    "orbits[{i}].period: must be positive, got {t}"
                )));
            }
        }
        let orbit = OrbitClass {
            name: o.name.clone(),
            kind,
            period: o.period,
        };
        orbit
            .check_nondegenerate()
            .map_err(|e| CliError::Reference(format!("orbits[{i}]: {e}")))?;
        orbits.push(orbit);
    }
    let doc_orbits = InputDocument {
        orbits,
        curves: Vec::new(),
        buildings: Vec::new(),
    };

    let mut curves: Vec<(String, PuncturedCurve)> = Vec::new();
    for (i, c) in raw.curves.iter().enumerate() {
        if curves.iter().any(|(n, _)| *n == c.name) {
            return Err(CliError::Reference(format!(
                "curves[{i}].name: duplicate curve \"{}\"",
                c.name
            )));
        }
        let mut punctures = Vec::new();
        for (j, p) in c.punctures.iter().enumerate() {
            let path = format!("curves[{i}].punctures[{j}]");
            let sign = match p.sign.as_str() {
                "positive" => PunctureSign::Positive,
                "negative" => PunctureSign::Negative,
                other => {
                    return Err(CliError::Parse(format!(
                        "{path}.sign: expected \"positive\" or \"negative\", got \"{other}\""
                    )))
                }
            };
            let orbit = doc_orbits.orbit(&p.orbit).ok_or_else(|| {
                CliError::Reference(format!("{path}.orbit: unknown orbit \"{}\"", p.orbit))
            })?;
            let instance = OrbitInstance::new(orbit.clone(), p.multiplicity);
            let puncture = if p.morse_bott {
                let cz = p.perturbed_cz.ok_or_else(|| {
                    CliError::Parse(format!("{path}.perturbed_cz: required when morse_bott"))
                })?;
                Puncture::morse_bott(sign, instance, cz)
            } else {
                Puncture::nondegenerate(sign, instance)
                    .map_err(|e| CliError::Reference(format!("{path}: {e}")))?
            };
            punctures.push(match p.wind_infinity {
                Some(w) => puncture.with_wind_infinity(w),
                None => puncture,
            });
        }
        let cover_of = match &c.cover_of {
            None => None,
            Some(cov) => {
                let underlying = curves
                    .iter()
                    .find(|(n, _)| *n == cov.underlying)
                    .map(|(_, u)| u.clone())
                    .ok_or_else(|| {
                        CliError::Reference(format!(
                            "curves[{i}].cover_of.underlying: unknown curve \"{}\" (must be declared earlier)",
                            cov.underlying
                        ))
                    })?;
                Some(CoverData {
                    underlying: Box::new(underlying),
                    degree: cov.degree,
                    branch_count: cov.branch_count,
                })
            }
        };
        let curve = PuncturedCurve {
            half_dim_n: c.n,
            genus: c.genus,
            punctures,
            c1_rel: c.c1_rel,
            somewhere_injective: c.somewhere_injective,
            embedded: c.embedded,
            delta: c.delta,
            delta_infinity: c.delta_infinity,
            immersed: c.immersed,
            cover_of,
        };
        curve
            .validate()
            .map_err(|e| CliError::Reference(format!("curves[{i}] (\"{}\"): {e}", c.name)))?;
        curves.push((c.name.clone(), curve));
    }

    let doc = InputDocument {
        orbits: doc_orbits.orbits,
        curves,
        buildings: Vec::new(),
    };

    let mut buildings: Vec<(String, Building)> = Vec::new();
    for (i, b) in raw.buildings.iter().enumerate() {
        if buildings.iter().any(|(n, _)| *n == b.name) {
            return Err(CliError::Reference(format!(
                "buildings[{i}].name: duplicate building \"{}\"",
                b.name
            )));
        }
        let resolve_level = |level: &[RawComponent], path: &str| -> Result<Vec<Component>, CliError> {
            level
                .iter()
                .enumerate()
                .map(|(j, rc)| match (&rc.curve, &rc.trivial_cylinder) {
                    (Some(name), None) => doc
                        .curve(name)
                        .cloned()
                        .map(Component::Curve)
                        .ok_or_else(|| {
                            CliError::Reference(format!(
                                "{path}[{j}].curve: unknown curve \"{name}\""
                            ))
                        }),
                    (None, Some(t)) => {
                        let orbit = doc.orbit(&t.orbit).ok_or_else(|| {
                            CliError::Reference(format!(
                                "{path}[{j}].trivial_cylinder.orbit: unknown orbit \"{}\"",
                                t.orbit
                            ))
                        })?;
                        Ok(Component::TrivialCylinder(OrbitInstance::new(
                            orbit.clone(),
                            t.multiplicity,
                        )))
                    }
                    _ => Err(CliError::Parse(format!(
                        "{path}[{j}]: exactly one of curve/trivial_cylinder required"
                    ))),
                })
                .collect()
        };
        let main_level = resolve_level(&b.main_level, &format!("buildings[{i}].main_level"))?;
        let mut lower_levels = Vec::new();
        for (l, level) in b.lower_levels.iter().enumerate() {
            lower_levels.push(resolve_level(
                level,
                &format!("buildings[{i}].lower_levels[{l}]"),
            )?);
        }
        let mut breakings = Vec::new();
        for (j, brk) in b.breakings.iter().enumerate() {
            let orbit = doc.orbit(&brk.orbit).ok_or_else(|| {
                CliError::Reference(format!(
                    "buildings[{i}].breakings[{j}].orbit: unknown orbit \"{}\"",
                    brk.orbit
                ))
            })?;
            breakings.push(Breaking {
                orbit: OrbitInstance::new(orbit.clone(), brk.multiplicity),
                upper: ComponentRef {
                    level: brk.upper[0],
                    index: brk.upper[1],
                },
                lower: ComponentRef {
                    level: brk.lower[0],
                    index: brk.lower[1],
                },
                decoration_index: brk.decoration_index,
            });
        }
        buildings.push((
            b.name.clone(),
            Building {
                main_level,
                lower_levels,
                breakings,
            },
        ));
    }

    Ok(InputDocument {
        orbits: doc.orbits,
        curves: doc.curves,
        buildings,
    })
}
