//! Invariant calculus for punctured genus-0 curves in completed symplectic
//! cobordisms: Fredholm index, normal Chern number, asymptotic defect,
//! the Siefring self-intersection number, nice-embeddedness and automatic
//! transversality, index bounds for multiple covers, and self-linking of
//! planes.
//!
//! Curves are plain data records; no map is ever represented.  Analytic
//! content enters only through the spectral data of the asymptotic orbits
//! and, optionally, measured asymptotic winding numbers and singularity
//! counts.

use thiserror::Error;

use crate::orbits::{OrbitInstance, SpectralData};

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("missing or invalid spectral data: {0}")]
    MissingSpectralData(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("negative asymptotic defect at puncture {0}: winding exceeds the extremal bound")]
    NegativeDefect(usize),
    #[error("wind_pi = {0} < 0: input data violates the winding inequality")]
    NegativeWindPi(i64),
    #[error("missing singularity data: {0}")]
    MissingSingularityData(String),
    #[error("unsupported cover: {0}")]
    UnsupportedCover(String),
    #[error("not a plane: {0}")]
    NotAPlane(String),
    #[error("index {0} out of range {{1, 2}} for a self-linking computation")]
    IndexOutOfRange(i64),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PunctureSign {
    Positive,
    Negative,
}

/// One puncture of a curve: the asymptotic orbit cover, its spectral data,
/// and optionally the measured asymptotic winding of the curve at this end.
///
/// When `morse_bott` is set, `spectral` stores the data of the perturbed
/// operator `A + epsilon`, which is what every formula here consumes.
#[derive(Debug, Clone)]
pub struct Puncture {
    pub sign: PunctureSign,
    pub instance: OrbitInstance,
    pub spectral: SpectralData,
    pub morse_bott: bool,
    pub wind_infinity: Option<i64>,
}

impl Puncture {
    /// A nondegenerate puncture with spectral data derived from the orbit.
    pub fn nondegenerate(sign: PunctureSign, instance: OrbitInstance) -> Result<Self, CurveError> {
        let spectral = instance
            .spectral_data()
            .map_err(|e| CurveError::MissingSpectralData(e.to_string()))?;
        Ok(Puncture {
            sign,
            instance,
            spectral,
            morse_bott: false,
            wind_infinity: None,
        })
    }

    /// A Morse-Bott puncture carrying the perturbed index `cz(orbit + eps)`.
    pub fn morse_bott(sign: PunctureSign, instance: OrbitInstance, perturbed_cz: i64) -> Self {
        let spectral = SpectralData::from_cz(perturbed_cz, instance.multiplicity);
        Puncture {
            sign,
            instance,
            spectral,
            morse_bott: true,
            wind_infinity: None,
        }
    }

    pub fn with_wind_infinity(mut self, wind: i64) -> Self {
        self.wind_infinity = Some(wind);
        self
    }

    /// Checks the extremal-winding bound on the measured asymptotic winding:
    /// at a positive puncture `wind_inf <= alpha_minus`, at a negative one
    /// `wind_inf >= alpha_plus`.
    fn check_wind_bound(&self, index: usize) -> Result<(), CurveError> {
        if let Some(w) = self.wind_infinity {
            let ok = match self.sign {
                PunctureSign::Positive => w <= self.spectral.alpha_minus,
                PunctureSign::Negative => w >= self.spectral.alpha_plus,
            };
            if !ok {
                return Err(CurveError::NegativeDefect(index));
            }
        }
        Ok(())
    }
}

/// Covering data for a multiply covered curve.
#[derive(Debug, Clone)]
pub struct CoverData {
    pub underlying: Box<PuncturedCurve>,
    pub degree: u64,
    pub branch_count: u64,
}

/// A genus-0 (unless only the index is wanted) asymptotically cylindrical
/// curve, recorded through its topological and intersection data.
#[derive(Debug, Clone)]
pub struct PuncturedCurve {
    /// Half the ambient dimension; all operations except the index require 2.
    pub half_dim_n: u32,
    pub genus: u32,
    pub punctures: Vec<Puncture>,
    /// Relative first Chern number of the pulled-back tangent bundle in the
    /// asymptotic trivializations fixed by the orbit data.
    pub c1_rel: i64,
    pub somewhere_injective: bool,
    pub embedded: bool,
    /// Algebraic count of double points and critical points, when measured.
    pub delta: Option<u64>,
    /// Count of double points hidden at infinity, when measured.
    pub delta_infinity: Option<u64>,
    /// Explicit immersedness flag, used for the automatic-transversality
    /// criterion when no winding data is available.
    pub immersed: Option<bool>,
    pub cover_of: Option<CoverData>,
}

impl PuncturedCurve {
    pub fn validate(&self) -> Result<(), CurveError> {
        if self.half_dim_n < 2 {
            return Err(CurveError::Unsupported(format!(
                "ambient half-dimension {} < 2",
                self.half_dim_n
            )));
        }
        if self.punctures.is_empty() {
            return Err(CurveError::Unsupported(
                "closed curves (no punctures) are not supported".into(),
            ));
        }
        if self.embedded && self.delta.unwrap_or(0) != 0 {
            return Err(CurveError::InternalInconsistency(
                "embedded curve with delta > 0".into(),
            ));
        }
        if !self.somewhere_injective {
            match &self.cover_of {
                Some(c) if c.degree >= 2 => {}
                _ => {
                    return Err(CurveError::InternalInconsistency(
                        "multiply covered curve needs cover data with degree >= 2".into(),
                    ))
                }
            }
        }
        for (i, p) in self.punctures.iter().enumerate() {
            p.spectral
                .validate(p.instance.multiplicity)
                .map_err(|e| CurveError::MissingSpectralData(e.to_string()))?;
            p.check_wind_bound(i)?;
        }
        Ok(())
    }

    fn require_dim2(&self, what: &str) -> Result<(), CurveError> {
        if self.half_dim_n != 2 {
            return Err(CurveError::Unsupported(format!(
                "{what} requires ambient dimension 4, got 2n = {}",
                2 * self.half_dim_n
            )));
        }
        Ok(())
    }

    fn require_genus0(&self, what: &str) -> Result<(), CurveError> {
        if self.genus != 0 {
            return Err(CurveError::Unsupported(format!(
                "{what} requires genus 0, got {}",
                self.genus
            )));
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.punctures.len() as i64
    }

    pub fn positive_punctures(&self) -> impl Iterator<Item = &Puncture> {
        self.punctures
            .iter()
            .filter(|p| p.sign == PunctureSign::Positive)
    }

    pub fn negative_punctures(&self) -> impl Iterator<Item = &Puncture> {
        self.punctures
            .iter()
            .filter(|p| p.sign == PunctureSign::Negative)
    }

    /// True when the record describes a trivial cylinder: one positive and
    /// one negative end on the same orbit cover, trivial relative Chern
    /// number.
    pub fn is_trivial_cylinder(&self) -> bool {
        if self.genus != 0 || self.punctures.len() != 2 || self.c1_rel != 0 {
            return false;
        }
        let pos: Vec<_> = self.positive_punctures().collect();
        let neg: Vec<_> = self.negative_punctures().collect();
        pos.len() == 1 && neg.len() == 1 && pos[0].instance == neg[0].instance
    }

    /// Fredholm index
    ///
    /// ```text
    /// ind(u) = (n-3) chi + 2 c1_rel + sum_+ cz - sum_- cz
    /// ```
    ///
    /// with `chi = 2 - 2g - #punctures`.  Morse-Bott positive ends use their
    /// stored perturbed index, so the result is the constrained index with
    /// fixed asymptotic orbits.  Negative Morse-Bott ends are not supported.
    pub fn fredholm_index(&self) -> Result<i64, CurveError> {
        for p in self.negative_punctures() {
            if p.morse_bott {
                return Err(CurveError::MissingSpectralData(
                    "negative punctures must be nondegenerate".into(),
                ));
            }
        }
        let chi = self.euler_characteristic();
        let cz_pos: i64 = self.positive_punctures().map(|p| p.spectral.cz).sum();
        let cz_neg: i64 = self.negative_punctures().map(|p| p.spectral.cz).sum();
        Ok((self.half_dim_n as i64 - 3) * chi + 2 * self.c1_rel + cz_pos - cz_neg)
    }

    /// Number of punctures of even (perturbed, for Morse-Bott ends) parity.
    pub fn even_punctures(&self) -> usize {
        self.punctures.iter().filter(|p| p.spectral.parity == 0).count()
    }

    /// Normal Chern number
    ///
    /// ```text
    /// c_N(u) = c1_rel - chi + sum_+ alpha_minus - sum_- alpha_plus
    /// ```
    ///
    /// Cross-checked against the index relation `2 c_N = ind - 2 + 2g +
    /// #Gamma_0`; a mismatch means the stored spectral data is inconsistent.
    pub fn normal_chern(&self) -> Result<i64, CurveError> {
        self.require_dim2("normal_chern")?;
        let chi = self.euler_characteristic();
        let wind_pos: i64 = self.positive_punctures().map(|p| p.spectral.alpha_minus).sum();
        let wind_neg: i64 = self.negative_punctures().map(|p| p.spectral.alpha_plus).sum();
        let cn = self.c1_rel - chi + wind_pos - wind_neg;
        let ind = self.fredholm_index()?;
        let gamma0 = self.even_punctures() as i64;
        if 2 * cn != ind - 2 + 2 * self.genus as i64 + gamma0 {
            return Err(CurveError::InternalInconsistency(format!(
                "2 c_N = {} but ind - 2 + 2g + #Gamma_0 = {}",
                2 * cn,
                ind - 2 + 2 * self.genus as i64 + gamma0
            )));
        }
        Ok(cn)
    }

    /// Asymptotic defect `d0 >= 0` and `wind_pi = c_N - d0 >= 0`.
    ///
    /// Requires measured asymptotic windings at every puncture, and the curve
    /// must not be a cover of a trivial cylinder (where neither quantity is
    /// defined).  Both inequalities are theorems for genuine curves; failing
    /// them flags inconsistent input.
    pub fn asymptotic_defect_and_windpi(&self) -> Result<DefectData, CurveError> {
        self.require_dim2("asymptotic_defect_and_windpi")?;
        self.require_genus0("asymptotic_defect_and_windpi")?;
        if self.is_trivial_cylinder()
            || self
                .cover_of
                .as_ref()
                .is_some_and(|c| c.underlying.is_trivial_cylinder())
        {
            return Err(CurveError::Unsupported(
                "asymptotic defect is undefined for covers of trivial cylinders".into(),
            ));
        }
        let mut d0 = 0i64;
        for (i, p) in self.punctures.iter().enumerate() {
            let w = p.wind_infinity.ok_or_else(|| {
                CurveError::MissingSpectralData(format!("puncture {i} has no wind_infinity"))
            })?;
            let term = match p.sign {
                PunctureSign::Positive => p.spectral.alpha_minus - w,
                PunctureSign::Negative => w - p.spectral.alpha_plus,
            };
            if term < 0 {
                return Err(CurveError::NegativeDefect(i));
            }
            d0 += term;
        }
        let wind_pi = self.normal_chern()? - d0;
        if wind_pi < 0 {
            return Err(CurveError::NegativeWindPi(wind_pi));
        }
        Ok(DefectData { d0, wind_pi })
    }

    /// Contribution `sigma_end` of a puncture to the adjunction correction:
    /// the covering number of the eigenspace governing the approach, which is
    /// `sigma_minus` at positive and `sigma_plus` at negative punctures.
    fn sigma_end(p: &Puncture) -> u64 {
        match p.sign {
            PunctureSign::Positive => p.spectral.sigma_minus,
            PunctureSign::Negative => p.spectral.sigma_plus,
        }
    }

    /// Whether the singularity counts are forced to vanish: an embedded curve
    /// all of whose asymptotic orbits are distinct simple orbits has no
    /// hidden intersections.
    fn singularities_derivable(&self) -> bool {
        if !self.embedded {
            return false;
        }
        let mut seen: Vec<&str> = Vec::new();
        for p in &self.punctures {
            if p.instance.multiplicity != 1 {
                return false;
            }
            let name = p.instance.orbit.name.as_str();
            if seen.contains(&name) {
                return false;
            }
            seen.push(name);
        }
        true
    }

    fn delta_total(&self) -> Result<u64, CurveError> {
        match (self.delta, self.delta_infinity) {
            (Some(d), Some(di)) => Ok(d + di),
            _ if self.singularities_derivable() => Ok(0),
            _ => Err(CurveError::MissingSingularityData(
                "delta/delta_infinity not supplied and not derivable".into(),
            )),
        }
    }

    /// Siefring self-intersection number
    ///
    /// ```text
    /// u*u = 2 (delta + delta_inf) + c_N + sum_ends (sigma_end - 1)
    /// ```
    pub fn self_intersection(&self) -> Result<i64, CurveError> {
        self.require_dim2("self_intersection")?;
        self.require_genus0("self_intersection")?;
        if !self.somewhere_injective {
            return Err(CurveError::Unsupported(
                "self_intersection requires a somewhere injective curve".into(),
            ));
        }
        let delta_total = self.delta_total()?;
        let cn = self.normal_chern()?;
        let sigma: i64 = self.punctures.iter().map(|p| Self::sigma_end(p) as i64 - 1).sum();
        Ok(2 * delta_total as i64 + cn + sigma)
    }

    /// Nice-embeddedness (`u*u <= 0` and no singularities) and the automatic
    /// transversality criterion `ind > c_N` for immersed curves.
    ///
    /// Immersedness is proxied by `wind_pi = 0` when winding data is present,
    /// otherwise by the explicit `immersed` flag.  A nice curve must satisfy
    /// `c_N <= 0` and `ind <= 2`; violations flag inconsistent input.
    pub fn nicely_embedded(&self) -> Result<NiceReport, CurveError> {
        self.require_dim2("nicely_embedded")?;
        self.require_genus0("nicely_embedded")?;
        let delta_total = self.delta_total()?;
        let self_int = self.self_intersection()?;
        let nice = self.somewhere_injective && delta_total == 0 && self_int <= 0;
        let cn = self.normal_chern()?;
        let ind = self.fredholm_index()?;
        if nice && (cn > 0 || ind > 2) {
            return Err(CurveError::InternalInconsistency(format!(
                "nicely embedded curve with c_N = {cn}, ind = {ind}"
            )));
        }
        let immersed = if self.punctures.iter().all(|p| p.wind_infinity.is_some())
            && !self.is_trivial_cylinder()
        {
            self.asymptotic_defect_and_windpi()?.wind_pi == 0
        } else {
            self.immersed.unwrap_or(false)
        };
        Ok(NiceReport {
            nice,
            auto_transversal: immersed && ind > cn,
        })
    }

    /// Index bounds for multiple covers.
    ///
    /// For covers of curves with only hyperbolic asymptotic orbits the bound
    /// is `ind(u) >= k ind(v)`, with equality exactly when the cover is
    /// unbranched (Riemann-Hurwitz count `Z = -chi(u) + k chi(v)`).  For
    /// covers of trivial cylinders the bound is `ind(u) >= 0`.  Mixed cases
    /// are not bounded here.
    pub fn cover_index_check(&self) -> Result<CoverReport, CurveError> {
        let cover = self.cover_of.as_ref().ok_or_else(|| {
            CurveError::UnsupportedCover("cover_index_check requires cover data".into())
        })?;
        let k = cover.degree as i64;
        let ind_u = self.fredholm_index()?;
        let z = -self.euler_characteristic() + k * cover.underlying.euler_characteristic();
        if z < 0 {
            return Err(CurveError::UnsupportedCover(format!(
                "Riemann-Hurwitz count is negative ({z})"
            )));
        }
        let all_hyperbolic = self
            .punctures
            .iter()
            .chain(cover.underlying.punctures.iter())
            .all(|p| matches!(p.instance.orbit.kind, crate::orbits::OrbitKind::Hyperbolic { .. }));
        if all_hyperbolic {
            let ind_v = cover.underlying.fredholm_index()?;
            let pass = ind_u >= k * ind_v && (ind_u == k * ind_v) == (z == 0);
            Ok(CoverReport {
                ind_cover: ind_u,
                bound: k * ind_v,
                branch_count: z as u64,
                equality: ind_u == k * ind_v,
                pass,
            })
        } else if cover.underlying.is_trivial_cylinder() {
            Ok(CoverReport {
                ind_cover: ind_u,
                bound: 0,
                branch_count: z as u64,
                equality: ind_u == 0,
                pass: ind_u >= 0,
            })
        } else {
            Err(CurveError::UnsupportedCover(
                "bounds are known only for hyperbolic ends or trivial-cylinder covers".into(),
            ))
        }
    }

    /// Index and self-linking data of a nicely embedded plane over a simple
    /// orbit, in the trivialization determined by the Seifert disk that the
    /// plane fills (`c1_rel = 0` there).
    ///
    /// ```text
    /// cz_disk = ind + 1,    sl = -alpha_minus(disk frame) = -1
    /// ```
    pub fn self_linking_of_plane(&self) -> Result<SelfLinking, CurveError> {
        self.require_dim2("self_linking_of_plane")?;
        self.require_genus0("self_linking_of_plane")?;
        let is_plane = self.punctures.len() == 1
            && self.punctures[0].sign == PunctureSign::Positive
            && self.punctures[0].instance.multiplicity == 1;
        if !is_plane {
            return Err(CurveError::NotAPlane(
                "need exactly one positive puncture on a simple orbit".into(),
            ));
        }
        let ind = self.fredholm_index()?;
        if !(1..=2).contains(&ind) {
            return Err(CurveError::IndexOutOfRange(ind));
        }
        if !self.nicely_embedded()?.nice {
            return Err(CurveError::NotAPlane("plane is not nicely embedded".into()));
        }
        // In the disk trivialization the index formula reads ind = -1 + cz,
        // and alpha_minus = (cz - cz mod 2) / 2 = 1 for cz in {2, 3}.
        let cz_disk = ind + 1;
        let parity = cz_disk.rem_euclid(2);
        let sl = -(cz_disk - parity) / 2;
        Ok(SelfLinking { cz_disk, sl })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefectData {
    pub d0: i64,
    pub wind_pi: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NiceReport {
    pub nice: bool,
    pub auto_transversal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverReport {
    pub ind_cover: i64,
    pub bound: i64,
    pub branch_count: u64,
    pub equality: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfLinking {
    pub cz_disk: i64,
    pub sl: i64,
}
