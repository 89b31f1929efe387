//! Closed-form spectral and index data for nondegenerate Reeb orbits in
//! dimension three, and for their multiple covers.
//!
//! # Conventions
//!
//! All winding data is stored relative to one fixed unitary trivialization per
//! simple orbit; the `m`-fold cover always uses the pullback trivialization.
//! Changing the trivialization shifts windings by multiples of the degree and
//! the Conley-Zehnder index by twice that; trivialization changes are not
//! modelled here.
//!
//! An elliptic orbit is described by its rotation number `theta` (irrational,
//! in particular non-integer): the `k`-fold cover has Conley-Zehnder index
//! `2*floor(k*theta) + 1`.  A hyperbolic orbit is described by its integer
//! index `cz`, and covers scale it linearly.

use thiserror::Error;

/// Tolerance for detecting resonant (near-rational) elliptic rotation numbers.
pub const TOL_RAT: f64 = 1e-9;

/// Largest denominator probed by [`OrbitClass::check_nondegenerate`].
pub const MAX_RESONANCE_DENOM: u64 = 64;

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    /// `k*theta` is within [`TOL_RAT`] of an integer, so the `k`-fold cover of
    /// the elliptic orbit is (numerically) degenerate.
    #[error("degenerate cover: {k}*theta = {ktheta} is within {TOL_RAT} of an integer")]
    DegenerateCover { k: u64, ktheta: f64 },
    /// An elliptic rotation number too close to a rational with small
    /// denominator; flagged rather than silently accepted.
    #[error("elliptic rotation number {theta} is within {TOL_RAT} of {p}/{q}")]
    NearRational { theta: f64, p: i64, q: u64 },
    /// Spectral data whose fields violate the winding relations.
    #[error("inconsistent spectral data: {0}")]
    InconsistentSpectralData(String),
}

/// Dynamical type of a simple nondegenerate Reeb orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitKind {
    /// Irrational rotation number relative to the reference trivialization.
    Elliptic { theta: f64 },
    /// Conley-Zehnder index of the simple orbit relative to the reference
    /// trivialization; parity of the orbit is `cz mod 2`.
    Hyperbolic { cz: i64 },
}

/// A simple closed Reeb orbit with a name, its dynamical type and an optional
/// period (units of time).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitClass {
    pub name: String,
    pub kind: OrbitKind,
    pub period: Option<f64>,
}

impl OrbitClass {
    pub fn elliptic(name: impl Into<String>, theta: f64) -> Self {
        OrbitClass {
            name: name.into(),
            kind: OrbitKind::Elliptic { theta },
            period: None,
        }
    }

    pub fn hyperbolic(name: impl Into<String>, cz: i64) -> Self {
        OrbitClass {
            name: name.into(),
            kind: OrbitKind::Hyperbolic { cz },
            period: None,
        }
    }

    /// Parity of the simple orbit: `cz mod 2`.  Elliptic orbits are always
    /// odd, hyperbolic orbits inherit the parity of their index.
    pub fn parity(&self) -> u8 {
        match self.kind {
            OrbitKind::Elliptic { .. } => 1,
            OrbitKind::Hyperbolic { cz } => cz.rem_euclid(2) as u8,
        }
    }

    /// Rejects elliptic rotation numbers within [`TOL_RAT`] of a rational
    /// `p/q` with `q <= MAX_RESONANCE_DENOM`.  Hyperbolic orbits always pass.
    pub fn check_nondegenerate(&self) -> Result<(), OrbitError> {
        if let OrbitKind::Elliptic { theta } = self.kind {
            for q in 1..=MAX_RESONANCE_DENOM {
                let p = (theta * q as f64).round();
                if (theta - p / q as f64).abs() < TOL_RAT {
                    return Err(OrbitError::NearRational {
                        theta,
                        p: p as i64,
                        q,
                    });
                }
            }
        }
        Ok(())
    }

    /// Conley-Zehnder index of the `k`-fold cover in the pullback
    /// trivialization:
    ///
    /// ```text
    /// cz(orbit^k) = k * cz          (hyperbolic)
    /// cz(orbit^k) = 2*floor(k*theta) + 1   (elliptic)
    /// ```
    pub fn cz_of_cover(&self, k: u64) -> Result<i64, OrbitError> {
        assert!(k >= 1, "cover multiplicity must be positive");
        match self.kind {
            OrbitKind::Hyperbolic { cz } => Ok(k as i64 * cz),
            OrbitKind::Elliptic { theta } => {
                let ktheta = k as f64 * theta;
                if (ktheta - ktheta.round()).abs() < TOL_RAT {
                    return Err(OrbitError::DegenerateCover { k, ktheta });
                }
                Ok(2 * ktheta.floor() as i64 + 1)
            }
        }
    }
}

/// The `multiplicity`-fold cover of a simple orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitInstance {
    pub orbit: OrbitClass,
    pub multiplicity: u64,
}

impl OrbitInstance {
    pub fn new(orbit: OrbitClass, multiplicity: u64) -> Self {
        assert!(multiplicity >= 1, "multiplicity must be positive");
        OrbitInstance {
            orbit,
            multiplicity,
        }
    }

    /// Extremal winding numbers, Conley-Zehnder index, parity and spectral
    /// covering numbers of the covered orbit.
    pub fn spectral_data(&self) -> Result<SpectralData, OrbitError> {
        let cz = self.orbit.cz_of_cover(self.multiplicity)?;
        Ok(SpectralData::from_cz(cz, self.multiplicity))
    }

    /// A bad orbit is an even cover of a hyperbolic orbit with odd index: its
    /// parity flips under covering.
    pub fn is_bad_orbit(&self) -> bool {
        self.multiplicity % 2 == 0
            && matches!(self.orbit.kind, OrbitKind::Hyperbolic { cz } if cz.rem_euclid(2) == 1)
    }

    /// Number of decorations a breaking along this orbit admits.
    pub fn decoration_count(&self) -> u64 {
        self.multiplicity
    }
}

/// Winding-number data of the asymptotic operator of a covered orbit:
/// extremal winding numbers `alpha_minus`/`alpha_plus` (largest negative and
/// smallest positive eigenvalue), the index `cz = alpha_minus + alpha_plus`,
/// the parity `p = alpha_plus - alpha_minus` and the spectral covering
/// numbers of the two extremal eigenspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralData {
    pub alpha_minus: i64,
    pub alpha_plus: i64,
    pub cz: i64,
    pub parity: u8,
    pub sigma_minus: u64,
    pub sigma_plus: u64,
}

impl SpectralData {
    /// Derives the full record from the Conley-Zehnder index of the
    /// `multiplicity`-fold cover.
    ///
    /// The covering number of the extremal eigenspace with winding `w` on the
    /// `m`-fold cover is `gcd(m, w)`: the model eigenfunction of winding `w`
    /// satisfies `eta(t + 1/j) = eta(t)` exactly when `j` divides `w`, and
    /// this is invariant under the winding shifts (multiples of `m`) induced
    /// by changing the trivialization of the simple orbit.
    pub fn from_cz(cz: i64, multiplicity: u64) -> Self {
        let parity = cz.rem_euclid(2) as u8;
        let alpha_minus = (cz - parity as i64) / 2;
        let alpha_plus = (cz + parity as i64) / 2;
        SpectralData {
            alpha_minus,
            alpha_plus,
            cz,
            parity,
            sigma_minus: gcd(multiplicity, alpha_minus.unsigned_abs()).max(1),
            sigma_plus: gcd(multiplicity, alpha_plus.unsigned_abs()).max(1),
        }
    }

    /// Checks the winding relations against the stored fields, and that the
    /// covering numbers divide `multiplicity` (and equal 1 for simple orbits).
    pub fn validate(&self, multiplicity: u64) -> Result<(), OrbitError> {
        if self.cz != self.alpha_minus + self.alpha_plus {
            return Err(OrbitError::InconsistentSpectralData(format!(
                "cz = {} but alpha_minus + alpha_plus = {}",
                self.cz,
                self.alpha_minus + self.alpha_plus
            )));
        }
        let p = self.alpha_plus - self.alpha_minus;
        if !(0..=1).contains(&p) || p as u8 != self.parity {
            return Err(OrbitError::InconsistentSpectralData(format!(
                "parity {} does not match alpha_plus - alpha_minus = {}",
                self.parity, p
            )));
        }
        for (label, sigma) in [("sigma_minus", self.sigma_minus), ("sigma_plus", self.sigma_plus)]
        {
            if sigma == 0 || multiplicity % sigma != 0 {
                return Err(OrbitError::InconsistentSpectralData(format!(
                    "{label} = {sigma} does not divide multiplicity {multiplicity}"
                )));
            }
            if multiplicity == 1 && sigma != 1 {
                return Err(OrbitError::InconsistentSpectralData(format!(
                    "{label} = {sigma} on a simple orbit"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cz_of_cover_hyperbolic_scales_linearly() {
        let orbit = OrbitClass::hyperbolic("h", 1);
        assert_eq!(orbit.cz_of_cover(2).unwrap(), 2);
        assert_eq!(orbit.cz_of_cover(7).unwrap(), 7);
        let neg = OrbitClass::hyperbolic("h2", -3);
        assert_eq!(neg.cz_of_cover(4).unwrap(), -12);
    }

    #[test]
    fn cz_of_cover_elliptic_floor_formula() {
        let orbit = OrbitClass::elliptic("e", 0.4142);
        assert_eq!(orbit.cz_of_cover(1).unwrap(), 1);
        // floor(5 * 0.4142) = floor(2.071) = 2
        assert_eq!(orbit.cz_of_cover(5).unwrap(), 5);
    }

    #[test]
    fn cz_of_cover_rejects_resonant_cover() {
        let orbit = OrbitClass::elliptic("e", 0.5 + 1e-12);
        match orbit.cz_of_cover(2) {
            Err(OrbitError::DegenerateCover { k: 2, .. }) => {}
            other => panic!("expected DegenerateCover, got {other:?}"),
        }
    }

    #[test]
    fn near_rational_rotation_numbers_are_flagged() {
        let orbit = OrbitClass::elliptic("e", 1.0 / 3.0 + 1e-10);
        assert!(matches!(
            orbit.check_nondegenerate(),
            Err(OrbitError::NearRational { q: 3, .. })
        ));
        let ok = OrbitClass::elliptic("e2", 0.41421356237);
        assert!(ok.check_nondegenerate().is_ok());
    }

    #[test]
    fn spectral_data_simple_elliptic() {
        let inst = OrbitInstance::new(OrbitClass::elliptic("e", 0.4142), 1);
        let s = inst.spectral_data().unwrap();
        assert_eq!(
            s,
            SpectralData {
                alpha_minus: 0,
                alpha_plus: 1,
                cz: 1,
                parity: 1,
                sigma_minus: 1,
                sigma_plus: 1
            }
        );
    }

    #[test]
    fn spectral_data_bad_double_cover() {
        // Double cover of an odd hyperbolic orbit: p(cover) = 0, sigma = 1.
        let inst = OrbitInstance::new(OrbitClass::hyperbolic("h", 1), 2);
        let s = inst.spectral_data().unwrap();
        assert_eq!(
            s,
            SpectralData {
                alpha_minus: 1,
                alpha_plus: 1,
                cz: 2,
                parity: 0,
                sigma_minus: 1,
                sigma_plus: 1
            }
        );
    }

    #[test]
    fn spectral_data_triple_elliptic_cover() {
        // theta = 0.7, m = 3: cz = 2*floor(2.1) + 1 = 5.
        let inst = OrbitInstance::new(OrbitClass::elliptic("e", 0.7), 3);
        let s = inst.spectral_data().unwrap();
        assert_eq!(s.cz, 5);
        assert_eq!((s.alpha_minus, s.alpha_plus), (2, 3));
        assert_eq!((s.sigma_minus, s.sigma_plus), (1, 3));
        s.validate(3).unwrap();
    }

    #[test]
    fn bad_orbit_predicate() {
        let hyp = OrbitClass::hyperbolic("h", 1);
        assert!(OrbitInstance::new(hyp.clone(), 2).is_bad_orbit());
        assert!(!OrbitInstance::new(hyp, 1).is_bad_orbit());
        let ell = OrbitClass::elliptic("e", 0.3);
        assert!(!OrbitInstance::new(ell, 2).is_bad_orbit());
        let even = OrbitClass::hyperbolic("h2", 2);
        assert!(!OrbitInstance::new(even, 2).is_bad_orbit());
    }

    #[test]
    fn spectral_relations_hold_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let orbit = if rng.random_bool(0.5) {
                OrbitClass::elliptic("e", rng.random_range(-3.0..3.0))
            } else {
                OrbitClass::hyperbolic("h", rng.random_range(-9..9))
            };
            let m = rng.random_range(1..=8);
            let inst = OrbitInstance::new(orbit, m);
            let s = match inst.spectral_data() {
                Ok(s) => s,
                Err(OrbitError::DegenerateCover { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            s.validate(m).unwrap();
            assert_eq!(s.cz, s.alpha_minus + s.alpha_plus);
            assert!(s.parity == (s.alpha_plus - s.alpha_minus) as u8);
            if m == 1 {
                assert_eq!((s.sigma_minus, s.sigma_plus), (1, 1));
            }
            // Elliptic covers always have odd index.
            if matches!(inst.orbit.kind, OrbitKind::Elliptic { .. }) {
                assert_eq!(s.cz.rem_euclid(2), 1);
            }
        }
    }

    #[test]
    fn floor_subadditivity_for_elliptic_covers() {
        // 2*floor((k+l)theta)+1 <= (2*floor(k theta)+1) + (2*floor(l theta)+1) + 1,
        // the estimate behind nonnegativity of covers of trivial cylinders.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let theta: f64 = rng.random_range(0.001..5.0);
            let orbit = OrbitClass::elliptic("e", theta);
            for _ in 0..40 {
                let k = rng.random_range(1..=20u64);
                let l = rng.random_range(1..=20u64);
                let (a, b, ab) = match (
                    orbit.cz_of_cover(k),
                    orbit.cz_of_cover(l),
                    orbit.cz_of_cover(k + l),
                ) {
                    (Ok(a), Ok(b), Ok(ab)) => (a, b, ab),
                    _ => continue,
                };
                assert!(ab <= a + b - 1 + 2, "theta={theta} k={k} l={l}");
                // Lower companion bound: floor(a)+floor(b) <= floor(a+b).
                assert!(ab >= a + b - 1);
            }
        }
    }
}
