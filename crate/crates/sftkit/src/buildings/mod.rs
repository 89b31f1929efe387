//! Holomorphic-building data model and budget checks: validation of the
//! tree structure, normal-Chern and intersection budgets across levels, the
//! local adjunction formula for annuli breaking along a Reeb orbit, the
//! classification of admissible breaking orbits under embeddedness, template
//! matching against the six degeneration types, and an exhaustive enumerator
//! of admissible degeneration shapes.

mod shapes;

pub use shapes::{
    enumerate_degenerations, thm_templates, BuildingShape, SearchBounds, ShapeBreaking, ShapeNode,
};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::curves::{CurveError, PuncturedCurve};
use crate::orbits::{OrbitError, OrbitInstance, SpectralData};

#[derive(Debug, Error)]
pub enum BuildingError {
    #[error("budget violation: {0}")]
    BudgetViolation(String),
    #[error("parity arithmetic error: {0}")]
    ParityArithmeticError(String),
    #[error("search budget exceeded after exploring {explored} nodes")]
    SearchBudgetExceeded { explored: usize },
    #[error("invalid building: {0}")]
    Invalid(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// One curve in one level of a building.
#[derive(Debug, Clone)]
pub enum Component {
    Curve(PuncturedCurve),
    TrivialCylinder(OrbitInstance),
}

impl Component {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Component::TrivialCylinder(_))
    }

    pub fn positive_instances(&self) -> Vec<&OrbitInstance> {
        match self {
            Component::Curve(c) => c.positive_punctures().map(|p| &p.instance).collect(),
            Component::TrivialCylinder(i) => vec![i],
        }
    }

    pub fn negative_instances(&self) -> Vec<&OrbitInstance> {
        match self {
            Component::Curve(c) => c.negative_punctures().map(|p| &p.instance).collect(),
            Component::TrivialCylinder(i) => vec![i],
        }
    }

    /// Trivial cylinders have index 0.
    pub fn index(&self) -> Result<i64, BuildingError> {
        match self {
            Component::Curve(c) => Ok(c.fredholm_index()?),
            Component::TrivialCylinder(_) => Ok(0),
        }
    }

    /// Trivial cylinders have `c_N = -1` over odd orbits and `0` over even
    /// ones, matching the index relation with `ind = 0` and two equal ends.
    pub fn normal_chern(&self) -> Result<i64, BuildingError> {
        match self {
            Component::Curve(c) => Ok(c.normal_chern()?),
            Component::TrivialCylinder(i) => {
                let p = i.spectral_data()?.parity;
                Ok(if p == 1 { -1 } else { 0 })
            }
        }
    }
}

/// Coordinates of a component: level 0 is the main level, level `l >= 1` is
/// `lower_levels[l - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ComponentRef {
    pub level: usize,
    pub index: usize,
}

impl fmt::Display for ComponentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.level, self.index)
    }
}

/// A breaking orbit gluing the negative puncture of `upper` to the positive
/// puncture of `lower`, with one of `m` decorations chosen.
#[derive(Debug, Clone)]
pub struct Breaking {
    pub orbit: OrbitInstance,
    pub upper: ComponentRef,
    pub lower: ComponentRef,
    pub decoration_index: u64,
}

/// A leveled holomorphic building of genus zero.
#[derive(Debug, Clone)]
pub struct Building {
    pub main_level: Vec<Component>,
    pub lower_levels: Vec<Vec<Component>>,
    pub breakings: Vec<Breaking>,
}

/// Pass/fail outcome of structural validation, naming the first violated
/// invariant.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violation: Option<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

impl Building {
    pub fn level_count(&self) -> usize {
        1 + self.lower_levels.len()
    }

    pub fn component(&self, r: ComponentRef) -> Option<&Component> {
        if r.level == 0 {
            self.main_level.get(r.index)
        } else {
            self.lower_levels.get(r.level - 1)?.get(r.index)
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (ComponentRef, &Component)> {
        std::iter::once(&self.main_level)
            .chain(self.lower_levels.iter())
            .enumerate()
            .flat_map(|(level, comps)| {
                comps
                    .iter()
                    .enumerate()
                    .map(move |(index, c)| (ComponentRef { level, index }, c))
            })
    }

    /// Checks the tree invariants: one positive puncture per component, a
    /// connected top level, breakings matching negative to positive punctures
    /// across adjacent levels with identical orbits, capping planes at the
    /// bottom, stability, and decoration indices in range.
    pub fn validate(&self) -> ValidationReport {
        let fail = |msg: String| ValidationReport {
            violation: Some(msg),
        };

        for (r, c) in self.components() {
            if let Component::Curve(curve) = c {
                if let Err(e) = curve.validate() {
                    return fail(format!("component {r}: {e}"));
                }
            }
            if c.positive_instances().len() != 1 {
                return fail(format!(
                    "tree: component {r} must have exactly one positive puncture"
                ));
            }
        }

        if self.main_level.len() != 1 {
            return fail(format!(
                "tree: top level must be connected, found {} components",
                self.main_level.len()
            ));
        }

        for (i, b) in self.breakings.iter().enumerate() {
            if b.lower.level != b.upper.level + 1 {
                return fail(format!(
                    "tree: breaking {i} connects non-adjacent levels {} and {}",
                    b.upper, b.lower
                ));
            }
            if self.component(b.upper).is_none() || self.component(b.lower).is_none() {
                return fail(format!("tree: breaking {i} references a missing component"));
            }
            if b.decoration_index >= b.orbit.multiplicity {
                return fail(format!(
                    "decoration: breaking {i} has decoration_index {} >= multiplicity {}",
                    b.decoration_index, b.orbit.multiplicity
                ));
            }
        }

        for (level, comps) in std::iter::once(&self.main_level)
            .chain(self.lower_levels.iter())
            .enumerate()
        {
            if comps.is_empty() {
                return fail(format!("level {level} is empty"));
            }
            if comps.iter().all(|c| c.is_trivial()) {
                return fail(format!(
                    "stability: level {level} consists only of trivial cylinders"
                ));
            }
        }

        if let Some(last) = self.lower_levels.last() {
            for (i, c) in last.iter().enumerate() {
                if !c.negative_instances().is_empty() {
                    return fail(format!(
                        "capping: lowest-level component {}.{i} has negative punctures",
                        self.lower_levels.len()
                    ));
                }
            }
        }

        // Every non-root component hangs below exactly one breaking, whose
        // orbit matches its positive puncture.
        for (r, c) in self.components() {
            if r.level == 0 {
                continue;
            }
            let incoming: Vec<&Breaking> =
                self.breakings.iter().filter(|b| b.lower == r).collect();
            if incoming.len() != 1 {
                return fail(format!(
                    "tree: component {r} is attached by {} breakings, expected 1",
                    incoming.len()
                ));
            }
            if incoming[0].orbit != *c.positive_instances()[0] {
                return fail(format!(
                    "tree: breaking orbit at {r} does not match the positive puncture"
                ));
            }
        }

        // Every negative puncture of every component is a breaking orbit.
        for (r, c) in self.components() {
            let mut negatives: Vec<&OrbitInstance> = c.negative_instances();
            for b in self.breakings.iter().filter(|b| b.upper == r) {
                match negatives.iter().position(|inst| **inst == b.orbit) {
                    Some(pos) => {
                        negatives.remove(pos);
                    }
                    None => {
                        return fail(format!(
                            "tree: breaking below {r} does not match any free negative puncture"
                        ))
                    }
                }
            }
            if !negatives.is_empty() {
                return fail(format!(
                    "tree: component {r} has {} unmatched negative punctures",
                    negatives.len()
                ));
            }
        }

        ValidationReport { violation: None }
    }

    /// Evaluates the level-wise normal-Chern budget.
    ///
    /// With `c^(v) = c_N(v) + sum of parities over the negative punctures of
    /// v`, the budget is `total_cn = c^(main) + sum c^(lower components)`.
    /// Admissible buildings fall into one of two cases: all breakings even
    /// with `c_N(main) = 0`, or an odd-ends main cylinder with `c_N(main) =
    /// -1` and every other breaking even.
    pub fn cn_budget(&self, total_cn: i64) -> Result<CnBudgetReport, BuildingError> {
        if !(-1..=0).contains(&total_cn) {
            return Err(BuildingError::BudgetViolation(format!(
                "total_cn must be -1 or 0, got {total_cn}"
            )));
        }
        let mut sum = 0;
        let mut main_cn = 0;
        for (r, c) in self.components() {
            let cn = c.normal_chern()?;
            if r.level == 0 {
                main_cn = cn;
            }
            let mut hat = cn;
            for inst in c.negative_instances() {
                hat += inst.spectral_data()?.parity as i64;
            }
            sum += hat;
        }
        if sum != total_cn {
            return Err(BuildingError::BudgetViolation(format!(
                "hat-c_N sums to {sum}, expected {total_cn}"
            )));
        }

        let mut parities = Vec::new();
        for b in &self.breakings {
            parities.push((b.upper.level, b.orbit.spectral_data()?.parity));
        }
        let odd: Vec<&(usize, u8)> = parities.iter().filter(|(_, p)| *p == 1).collect();
        let main_is_cylinder = self.main_level.len() == 1
            && self.main_level[0].negative_instances().len() == 1
            && self.main_level[0].positive_instances().len() == 1;
        if odd.is_empty() && main_cn == 0 {
            Ok(CnBudgetReport::AllEvenBreakings)
        } else if odd.len() == 1 && odd[0].0 == 0 && main_is_cylinder && main_cn == -1 {
            Ok(CnBudgetReport::OddCylinderMain)
        } else {
            Err(BuildingError::BudgetViolation(format!(
                "{} odd breakings with c_N(main) = {main_cn} fit neither budget case",
                odd.len()
            )))
        }
    }

    /// Lower bound for the self-intersection of the limit curve:
    ///
    /// ```text
    /// sum of component self-intersections + sum over breakings m(orbit) p(orbit)
    /// ```
    ///
    /// Self-intersections are supplied per component; omitted components
    /// contribute 0 (trivial-cylinder pairs over even orbits contribute
    /// nothing).
    pub fn intersection_lower_bound(
        &self,
        level_self_ints: &BTreeMap<ComponentRef, i64>,
    ) -> Result<i64, BuildingError> {
        let mut bound: i64 = level_self_ints.values().sum();
        for b in &self.breakings {
            let p = b.orbit.spectral_data()?.parity as i64;
            bound += b.orbit.multiplicity as i64 * p;
        }
        Ok(bound)
    }

    /// Matches the building against the six degeneration templates.
    pub fn classify(&self) -> Classification {
        let report = self.validate();
        if let Some(v) = report.violation {
            return Classification::Rejected(v);
        }
        let skeleton = match self.skeleton() {
            Ok(s) => s,
            Err(e) => return Classification::Rejected(e.to_string()),
        };
        match match_templates(&skeleton) {
            Ok(t) => Classification::Type(t),
            Err(reason) => Classification::Rejected(reason),
        }
    }

    fn skeleton(&self) -> Result<Skeleton, BuildingError> {
        let mut levels = Vec::new();
        for comps in std::iter::once(&self.main_level).chain(self.lower_levels.iter()) {
            let mut level = Vec::new();
            for c in comps {
                level.push(SkelComp {
                    trivial: c.is_trivial(),
                    neg: c.negative_instances().len(),
                    index: c.index()?,
                });
            }
            levels.push(level);
        }
        let mut breakings = Vec::new();
        for b in &self.breakings {
            breakings.push(SkelBreak {
                upper: (b.upper.level, b.upper.index),
                lower: (b.lower.level, b.lower.index),
                parity: b.orbit.spectral_data()?.parity,
            });
        }
        Ok(Skeleton { levels, breakings })
    }
}

/// Which case of the normal-Chern budget a building realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnBudgetReport {
    /// All breaking orbits even, `c_N(main) = 0`.
    AllEvenBreakings,
    /// The main level is a cylinder with `c_N = -1` and an odd negative end;
    /// all other breakings even.
    OddCylinderMain,
}

/// The local adjunction formula for a pair of embedded half-cylinders
/// breaking along an orbit of multiplicity `m`:
///
/// ```text
/// delta = delta_inf_plus + delta_inf_minus
///         + ([sigma_plus - 1] + [sigma_minus - 1] + (m - 1) p) / 2
/// ```
///
/// Every bracketed term is nonnegative, and their sum must be even; an odd
/// sum means the spectral data is inconsistent.
pub fn local_adjunction(
    breaking: &SpectralData,
    multiplicity: u64,
    delta_inf_plus: u64,
    delta_inf_minus: u64,
) -> Result<u64, BuildingError> {
    breaking
        .validate(multiplicity)
        .map_err(BuildingError::Orbit)?;
    let s_plus = breaking.sigma_plus - 1;
    let s_minus = breaking.sigma_minus - 1;
    let mp = (multiplicity - 1) * breaking.parity as u64;
    let sum = s_plus + s_minus + mp;
    if sum % 2 != 0 {
        return Err(BuildingError::ParityArithmeticError(format!(
            "[sigma_plus - 1] + [sigma_minus - 1] + (m-1)p = {s_plus} + {s_minus} + {mp} is odd"
        )));
    }
    Ok(delta_inf_plus + delta_inf_minus + sum / 2)
}

/// Admissibility of a breaking orbit when the degenerating annuli are
/// embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakingClass {
    Simple,
    BadDoubleCover,
    /// The local adjunction right-hand side is positive, so hidden double
    /// points would be forced.
    Forbidden,
}

impl fmt::Display for BreakingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BreakingClass::Simple => "Simple",
            BreakingClass::BadDoubleCover => "BadDoubleCover",
            BreakingClass::Forbidden => "Forbidden",
        };
        f.write_str(s)
    }
}

/// Classifies a breaking orbit of embedded annuli: simple orbits and double
/// covers of odd hyperbolic orbits are the only cases in which the local
/// adjunction correction vanishes.
pub fn classify_embedded_breaking(instance: &OrbitInstance) -> Result<BreakingClass, BuildingError> {
    let s = instance.spectral_data()?;
    let m = instance.multiplicity;
    let rhs = (s.sigma_plus - 1) + (s.sigma_minus - 1) + (m - 1) * s.parity as u64;
    if rhs > 0 {
        return Ok(BreakingClass::Forbidden);
    }
    Ok(match m {
        1 => BreakingClass::Simple,
        2 => {
            debug_assert!(instance.is_bad_orbit());
            debug_assert_eq!((s.parity, s.sigma_minus, s.sigma_plus), (0, 1, 1));
            BreakingClass::BadDoubleCover
        }
        // rhs = 0 with m >= 3 has no consistent realization.
        _ => BreakingClass::Forbidden,
    })
}

/// The six admissible degeneration types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BuildingType {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl fmt::Display for BuildingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BuildingType::I => "I",
            BuildingType::II => "II",
            BuildingType::III => "III",
            BuildingType::IV => "IV",
            BuildingType::V => "V",
            BuildingType::VI => "VI",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Type(BuildingType),
    Rejected(String),
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Type(t) => write!(f, "Type{t}"),
            Classification::Rejected(r) => write!(f, "Rejected({r})"),
        }
    }
}

pub(crate) struct Skeleton {
    pub levels: Vec<Vec<SkelComp>>,
    pub breakings: Vec<SkelBreak>,
}

#[derive(Clone, Copy)]
pub(crate) struct SkelComp {
    pub trivial: bool,
    pub neg: usize,
    pub index: i64,
}

pub(crate) struct SkelBreak {
    pub upper: (usize, usize),
    pub lower: (usize, usize),
    pub parity: u8,
}

impl SkelComp {
    fn is_plane(&self, index: i64) -> bool {
        !self.trivial && self.neg == 0 && self.index == index
    }

    fn is_cylinder(&self, index: i64) -> bool {
        !self.trivial && self.neg == 1 && self.index == index
    }
}

/// Template matcher shared by concrete buildings and abstract shapes.
pub(crate) fn match_templates(s: &Skeleton) -> Result<BuildingType, String> {
    if s.levels.len() < 2 {
        return Err("needs >= 1 lower level".into());
    }
    if s.levels.len() > 3 {
        return Err("more than two lower levels".into());
    }
    if s.levels[0].len() != 1 {
        return Err("main level must consist of one component".into());
    }
    let main = s.levels[0][0];
    if main.trivial {
        return Err("main level is a trivial cylinder".into());
    }
    let parity_between = |upper: usize, lower: usize| -> Vec<u8> {
        s.breakings
            .iter()
            .filter(|b| b.upper.0 == upper && b.lower.0 == lower)
            .map(|b| b.parity)
            .collect()
    };

    if s.levels.len() == 2 {
        let lower = &s.levels[1];
        let parities = parity_between(0, 1);
        if main.neg == 1 && lower.len() == 1 && parities.len() == 1 {
            let p = parities[0];
            if main.is_cylinder(0) && lower[0].is_plane(1) && p == 0 {
                return Ok(BuildingType::I);
            }
            if main.is_cylinder(0) && lower[0].is_plane(2) && p == 1 {
                return Ok(BuildingType::II);
            }
            if main.is_cylinder(1) && lower[0].is_plane(1) && p == 0 {
                return Ok(BuildingType::III);
            }
            return Err(format!(
                "no two-level template with main (neg={}, ind={}), lower (neg={}, ind={}), parity {p}",
                main.neg, main.index, lower[0].neg, lower[0].index
            ));
        }
        if main.neg == 2
            && main.index == 0
            && !main.trivial
            && lower.len() == 2
            && lower.iter().all(|c| c.is_plane(1))
            && parities.len() == 2
            && parities.iter().all(|&p| p == 0)
        {
            return Ok(BuildingType::IV);
        }
        return Err("no matching two-level template".into());
    }

    // Three levels: Types V and VI.
    let l1 = &s.levels[1];
    let l2 = &s.levels[2];
    let upper = parity_between(0, 1);
    let lower = parity_between(1, 2);
    if main.neg == 2
        && main.index == 0
        && l1.len() == 2
        && l1.iter().any(|c| c.trivial)
        && l1.iter().any(|c| c.is_plane(1))
        && l2.len() == 1
        && l2[0].is_plane(1)
        && upper.iter().all(|&p| p == 0)
        && lower.iter().all(|&p| p == 0)
    {
        // The bottom plane must hang below the trivial cylinder.
        let triv_pos = l1.iter().position(|c| c.trivial).unwrap();
        let attached = s
            .breakings
            .iter()
            .any(|b| b.upper == (1, triv_pos) && b.lower.0 == 2);
        if attached {
            return Ok(BuildingType::V);
        }
        return Err("bottom plane is not attached below the trivial cylinder".into());
    }
    if main.is_cylinder(0)
        && l1.len() == 1
        && !l1[0].trivial
        && l1[0].is_cylinder(1)
        && l2.len() == 1
        && l2[0].is_plane(1)
        && upper == vec![1]
        && lower == vec![0]
    {
        return Ok(BuildingType::VI);
    }
    Err("no matching three-level template".into())
}
