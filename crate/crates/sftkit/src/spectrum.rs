//! Numerical oracle for the asymptotic operator of a Reeb orbit.
//!
//! In a unitary trivialization the operator takes the form
//!
//! ```text
//! A eta = -J0 (d/dt) eta - S(t) eta
//! ```
//!
//! acting on loops `eta : R/Z -> R^2`, where `S(t)` is a loop of symmetric
//! 2x2 matrices and `J0` is the standard complex structure.  On the `m`-fold
//! cover (reparametrized back to period 1) the coefficient becomes
//! `m * S(m t)`.
//!
//! Identifying `R^2` with `C`, the operator is `A z = -i z' - a(t) z - b(t)
//! conj(z)` with `a = tr S / 2` real and `b = (S11 - S22)/2 + i S12`.  We
//! discretize by a Fourier-Galerkin truncation: on modes `|k| <= K` the
//! operator is a real symmetric matrix of size `2(2K+1)`, block-diagonal for
//! constant coefficients (hence exact there) and spectrally accurate for
//! smooth loops.  All eigenpairs in a window around zero are extracted with a
//! dense symmetric eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

use crate::orbits::SpectralData;

/// Eigenvalues this close to zero mean the orbit is degenerate.
pub const TOL_EIG: f64 = 1e-8;
/// Eigenfunction samples below this fraction of the L2 norm violate the
/// nowhere-zero property and trigger a refine-and-retry.
pub const TOL_ZERO: f64 = 1e-6;
/// Tolerance for detecting that an eigenfunction is a `j`-fold cover.
pub const TOL_COVER: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("invalid matrix loop: {0}")]
    InvalidLoop(String),
    #[error("degenerate operator: eigenvalue {lambda:e} within {TOL_EIG:e} of zero")]
    DegenerateOperator { lambda: f64 },
    #[error("eigenfunction of eigenvalue {lambda:e} dips below the zero tolerance")]
    ZeroCrossing { lambda: f64 },
    #[error("window too small: {found} eigenvalues found, need {need}")]
    InsufficientWindow { found: usize, need: usize },
}

/// A loop of symmetric 2x2 coefficient matrices sampled at `t_i = i/N`,
/// together with the cover multiplicity of the orbit it describes.
#[derive(Debug, Clone)]
pub struct MatrixLoop {
    samples: Vec<[f64; 3]>, // (s11, s12, s22)
    multiplicity: u64,
}

impl MatrixLoop {
    /// Builds a loop from samples `[[s11, s12], [s21, s22]]`; the matrices
    /// must be symmetric to within 1e-12 and there must be at least 64 of
    /// them, an even number.
    pub fn from_samples(samples: &[[[f64; 2]; 2]], multiplicity: u64) -> Result<Self, SpectrumError> {
        let n = samples.len();
        if n < 64 || n % 2 != 0 {
            return Err(SpectrumError::InvalidLoop(format!(
                "need an even number >= 64 of samples, got {n}"
            )));
        }
        if multiplicity == 0 {
            return Err(SpectrumError::InvalidLoop("multiplicity must be >= 1".into()));
        }
        let mut flat = Vec::with_capacity(n);
        for (i, s) in samples.iter().enumerate() {
            if (s[0][1] - s[1][0]).abs() > 1e-12 {
                return Err(SpectrumError::InvalidLoop(format!(
                    "sample {i} is not symmetric: s12 = {}, s21 = {}",
                    s[0][1], s[1][0]
                )));
            }
            flat.push([s[0][0], 0.5 * (s[0][1] + s[1][0]), s[1][1]]);
        }
        Ok(MatrixLoop {
            samples: flat,
            multiplicity,
        })
    }

    /// Constant loop `S(t) = c * Id`; models an elliptic orbit with rotation
    /// number `c / 2 pi`.
    pub fn constant(c: f64, n: usize, multiplicity: u64) -> Result<Self, SpectrumError> {
        Self::from_samples(&vec![[[c, 0.0], [0.0, c]]; n], multiplicity)
    }

    /// Constant diagonal loop `S(t) = diag(c1, c2)`.
    pub fn diagonal(c1: f64, c2: f64, n: usize, multiplicity: u64) -> Result<Self, SpectrumError> {
        Self::from_samples(&vec![[[c1, 0.0], [0.0, c2]]; n], multiplicity)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    /// Fourier coefficients of `a = tr S / 2` and `b = (S11 - S22)/2 + i S12`
    /// for the base loop, indexed `-N/2 < j <= N/2`.
    fn coefficient_modes(&self) -> (Vec<(i64, Complex64)>, Vec<(i64, Complex64)>) {
        let n = self.samples.len();
        let mut a: Vec<Complex64> = self
            .samples
            .iter()
            .map(|s| Complex64::new(0.5 * (s[0] + s[2]), 0.0))
            .collect();
        let mut b: Vec<Complex64> = self
            .samples
            .iter()
            .map(|s| Complex64::new(0.5 * (s[0] - s[2]), s[1]))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        fft.process(&mut a);
        fft.process(&mut b);
        let scale = 1.0 / n as f64;
        let index = |i: usize| -> i64 {
            if i <= n / 2 {
                i as i64
            } else {
                i as i64 - n as i64
            }
        };
        let pack = |v: Vec<Complex64>| -> Vec<(i64, Complex64)> {
            v.into_iter()
                .enumerate()
                .map(|(i, c)| (index(i), c * scale))
                .collect()
        };
        (pack(a), pack(b))
    }

    fn max_norm(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (0.5 * (s[0] + s[2])).abs() + ((0.5 * (s[0] - s[2])).powi(2) + s[1] * s[1]).sqrt())
            .fold(0.0, f64::max)
    }
}

/// One eigenpair of the asymptotic operator.
#[derive(Debug, Clone)]
pub struct EigenRecord {
    pub eigenvalue: f64,
    /// Samples of the eigenfunction at `t_i = i/N`, normalized in the
    /// discrete L2 norm, identifying the trivialized plane with `C`.
    pub eigenfunction: Vec<Complex64>,
    /// Total argument winding over one period.
    pub winding: i64,
    /// Largest divisor `j` of the cover multiplicity such that the
    /// eigenfunction is invariant under `t -> t + 1/j`.
    pub cover_multiplicity: u64,
}

/// Outcome of checking the spectral axioms on a solved window.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub eigenvalue_count: usize,
    pub monotone_failures: Vec<(f64, i64, f64, i64)>,
    pub two_to_one_failures: Vec<(i64, usize)>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.monotone_failures.is_empty() && self.two_to_one_failures.is_empty()
    }
}

struct ModeTable {
    k_max: i64,
    a: Vec<Complex64>, // index j + 2*k_max, |j| <= 2*k_max
    b: Vec<Complex64>,
}

impl ModeTable {
    fn get(v: &[Complex64], k_max: i64, j: i64) -> Complex64 {
        if j.abs() > 2 * k_max {
            Complex64::new(0.0, 0.0)
        } else {
            v[(j + 2 * k_max) as usize]
        }
    }
}

/// Builds the coefficient modes of `m * S(m t)` and picks the truncation
/// order: large enough to clear the window plus the coefficient sup-norm and
/// to resolve the (cover-stretched) content of the loop.
fn cover_modes(loop_: &MatrixLoop, window: f64) -> ModeTable {
    let m = loop_.multiplicity as i64;
    let (a_modes, b_modes) = loop_.coefficient_modes();
    let sup = loop_.multiplicity as f64 * loop_.max_norm();
    let mag = a_modes
        .iter()
        .chain(b_modes.iter())
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    let j_sig = a_modes
        .iter()
        .chain(b_modes.iter())
        .filter(|(_, c)| c.norm() > 1e-13 * (1.0 + mag))
        .map(|(j, _)| j.abs())
        .max()
        .unwrap_or(0);
    let k_window = ((window + sup + 2.0 * PI) / (2.0 * PI)).ceil() as i64 + 8;
    // Cap the truncation so rough sampled input cannot blow up the dense
    // eigenproblem; smooth loops stay far below the cap.
    let k_max = (2 * m * j_sig + 8).max(k_window).max(32).min(384);

    let mut a = vec![Complex64::new(0.0, 0.0); (4 * k_max + 1) as usize];
    let mut b = vec![Complex64::new(0.0, 0.0); (4 * k_max + 1) as usize];
    for (j, c) in a_modes {
        let jm = j * m;
        if jm.abs() <= 2 * k_max {
            a[(jm + 2 * k_max) as usize] += c * m as f64;
        }
    }
    for (j, c) in b_modes {
        let jm = j * m;
        if jm.abs() <= 2 * k_max {
            b[(jm + 2 * k_max) as usize] += c * m as f64;
        }
    }
    ModeTable { k_max, a, b }
}

/// Assembles the real symmetric Galerkin matrix on modes `|k| <= k_max`.
///
/// With unknowns `(Re z_k, Im z_k)`, multiplication by a complex scalar `c`
/// is the block `[[re, -im], [im, re]]` and `z -> c conj(z)` the symmetric
/// block `[[re, im], [im, -re]]`; the derivative term contributes `2 pi k` on
/// the diagonal.
fn assemble(modes: &ModeTable) -> DMatrix<f64> {
    let k_max = modes.k_max;
    let dim = 2 * (2 * k_max + 1) as usize;
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    for k in -k_max..=k_max {
        let row = 2 * (k + k_max) as usize;
        for j in -k_max..=k_max {
            let col = 2 * (j + k_max) as usize;
            let mut e00 = 0.0;
            let mut e01 = 0.0;
            let mut e10 = 0.0;
            let mut e11 = 0.0;
            if k == j {
                let d = 2.0 * PI * k as f64;
                e00 += d;
                e11 += d;
            }
            let a = ModeTable::get(&modes.a, k_max, k - j);
            e00 -= a.re;
            e01 -= -a.im;
            e10 -= a.im;
            e11 -= a.re;
            let b = ModeTable::get(&modes.b, k_max, k + j);
            e00 -= b.re;
            e01 -= b.im;
            e10 -= b.im;
            e11 -= -b.re;
            mat[(row, col)] += e00;
            mat[(row, col + 1)] += e01;
            mat[(row + 1, col)] += e10;
            mat[(row + 1, col + 1)] += e11;
        }
    }
    // Kill the roundoff asymmetry of the FFT-derived entries.
    let mat_t = mat.transpose();
    (mat + mat_t) * 0.5
}

struct ModeVector {
    k_max: i64,
    coeffs: Vec<Complex64>,
}

impl ModeVector {
    fn from_eigenvector(col: &[f64], k_max: i64) -> Self {
        let coeffs = col
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        ModeVector { k_max, coeffs }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = i as i64 - self.k_max;
            z += c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * t);
        }
        z
    }
}

fn winding_of_samples(samples: &[Complex64]) -> i64 {
    let mut total = 0.0;
    for i in 0..samples.len() {
        let a = samples[i];
        let b = samples[(i + 1) % samples.len()];
        total += (b * a.conj()).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

fn cover_multiplicity_of(vector: &ModeVector, samples: &[Complex64], m: u64) -> u64 {
    let n = samples.len();
    let mut best = 1;
    for j in 2..=m {
        if m % j != 0 {
            continue;
        }
        let shift = 1.0 / j as f64;
        let max_dev = (0..n)
            .map(|i| (vector.eval(i as f64 / n as f64 + shift) - samples[i]).norm())
            .fold(0.0, f64::max);
        if max_dev < TOL_COVER {
            best = j;
        }
    }
    best
}

/// Solves for all eigenpairs with `|lambda| <= window`, sorted by eigenvalue.
///
/// Fails with [`SpectrumError::DegenerateOperator`] if the spectrum meets
/// zero, and with [`SpectrumError::ZeroCrossing`] if an eigenfunction sample
/// dips below [`TOL_ZERO`] even after doubling the sample resolution.
pub fn solve_spectrum(loop_: &MatrixLoop, window: f64) -> Result<Vec<EigenRecord>, SpectrumError> {
    assert!(window > 0.0, "window must be positive");
    let modes = cover_modes(loop_, window);
    let mat = assemble(&modes);
    let eig = mat.symmetric_eigen();

    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    for &(lambda, _) in &pairs {
        if lambda.abs() < TOL_EIG {
            return Err(SpectrumError::DegenerateOperator { lambda });
        }
    }

    let n = loop_.len();
    let m = loop_.multiplicity;
    let mut records = Vec::new();
    for &(lambda, idx) in pairs.iter().filter(|(l, _)| l.abs() <= window) {
        let col: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let vector = ModeVector::from_eigenvector(&col, modes.k_max);
        let record = sample_record(&vector, lambda, n, m)
            .or_else(|_| sample_record(&vector, lambda, 2 * n, m))?;
        records.push(record);
    }
    Ok(records)
}

fn sample_record(
    vector: &ModeVector,
    lambda: f64,
    n: usize,
    m: u64,
) -> Result<EigenRecord, SpectrumError> {
    let mut samples: Vec<Complex64> = (0..n).map(|i| vector.eval(i as f64 / n as f64)).collect();
    let norm = (samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    if norm == 0.0 {
        return Err(SpectrumError::ZeroCrossing { lambda });
    }
    for z in &mut samples {
        *z /= norm;
    }
    let min = samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min < TOL_ZERO {
        return Err(SpectrumError::ZeroCrossing { lambda });
    }
    let scaled = ModeVector {
        k_max: vector.k_max,
        coeffs: vector.coeffs.iter().map(|c| c / norm).collect(),
    };
    let winding = winding_of_samples(&samples);
    let cover_multiplicity = cover_multiplicity_of(&scaled, &samples, m);
    Ok(EigenRecord {
        eigenvalue: lambda,
        eigenfunction: samples,
        winding,
        cover_multiplicity,
    })
}

/// Checks that winding is non-decreasing in the eigenvalue and that every
/// winding value strictly inside the solved window is attained by exactly two
/// eigenvalues counting multiplicity.
pub fn verify_spectral_axioms(records: &[EigenRecord]) -> Result<AxiomReport, SpectrumError> {
    if records.len() < 8 {
        return Err(SpectrumError::InsufficientWindow {
            found: records.len(),
            need: 8,
        });
    }
    let mut monotone_failures = Vec::new();
    for w in records.windows(2) {
        if w[1].winding < w[0].winding {
            monotone_failures.push((
                w[0].eigenvalue,
                w[0].winding,
                w[1].eigenvalue,
                w[1].winding,
            ));
        }
    }
    let w_min = records.iter().map(|r| r.winding).min().unwrap();
    let w_max = records.iter().map(|r| r.winding).max().unwrap();
    let mut two_to_one_failures = Vec::new();
    for w in (w_min + 1)..w_max {
        let count = records.iter().filter(|r| r.winding == w).count();
        if count != 2 {
            two_to_one_failures.push((w, count));
        }
    }
    Ok(AxiomReport {
        eigenvalue_count: records.len(),
        monotone_failures,
        two_to_one_failures,
    })
}

/// Reads off the trivialization data carried by the extremal eigenvalues:
/// the winding of the largest negative and smallest positive eigenvalue, the
/// index and parity they determine, and the cover multiplicities of the two
/// extremal eigenfunctions.
pub fn extremal_data(records: &[EigenRecord], m: u64) -> Result<SpectralData, SpectrumError> {
    let neg = records
        .iter()
        .filter(|r| r.eigenvalue < 0.0)
        .max_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    let pos = records
        .iter()
        .filter(|r| r.eigenvalue > 0.0)
        .min_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    let (neg, pos) = match (neg, pos) {
        (Some(n), Some(p)) => (n, p),
        _ => {
            return Err(SpectrumError::InsufficientWindow {
                found: records.len(),
                need: records.len() + 1,
            })
        }
    };
    let alpha_minus = neg.winding;
    let alpha_plus = pos.winding;
    let data = SpectralData {
        alpha_minus,
        alpha_plus,
        cz: alpha_minus + alpha_plus,
        parity: (alpha_plus - alpha_minus) as u8,
        sigma_minus: neg.cover_multiplicity,
        sigma_plus: pos.cover_multiplicity,
    };
    if data.validate(m).is_err() {
        // Winding or covering data incompatible with a genuine spectrum on
        // an m-fold cover: the window was too narrow to see both extremal
        // eigenvalues of the same operator.
        return Err(SpectrumError::InsufficientWindow {
            found: records.len(),
            need: records.len() + 1,
        });
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{OrbitClass, OrbitInstance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn closed_form_eigenvalues(c: f64, m: u64, window: f64) -> Vec<f64> {
        // A = -i d/dt - m c on the m-fold cover: eigenvalues 2 pi l - m c,
        // each with a two-dimensional eigenspace of winding l.
        let mut out = Vec::new();
        let mc = m as f64 * c;
        let mut l = ((-window + mc) / (2.0 * PI)).floor() as i64 - 1;
        loop {
            let lambda = 2.0 * PI * l as f64 - mc;
            if lambda > window {
                break;
            }
            if lambda >= -window {
                out.push(lambda);
                out.push(lambda);
            }
            l += 1;
        }
        out
    }

    #[test]
    fn constant_loop_matches_closed_form() {
        let c = 1.0;
        let loop_ = MatrixLoop::constant(c, 256, 1).unwrap();
        let records = solve_spectrum(&loop_, 15.0).unwrap();
        let expected = closed_form_eigenvalues(c, 1, 15.0);
        assert_eq!(records.len(), expected.len());
        for (r, e) in records.iter().zip(&expected) {
            assert!((r.eigenvalue - e).abs() < 1e-6, "{} vs {}", r.eigenvalue, e);
            let l = ((r.eigenvalue + c) / (2.0 * PI)).round() as i64;
            assert_eq!(r.winding, l);
        }
    }

    #[test]
    fn zero_loop_is_degenerate() {
        let loop_ = MatrixLoop::constant(0.0, 128, 1).unwrap();
        assert!(matches!(
            solve_spectrum(&loop_, 10.0),
            Err(SpectrumError::DegenerateOperator { .. })
        ));
    }

    #[test]
    fn triple_cover_winding_and_cover_multiplicity() {
        let c = 1.0;
        let loop_ = MatrixLoop::constant(c, 256, 3).unwrap();
        // Window wide enough to reach the winding-3 eigenvalue 2 pi 3 - 3.
        let records = solve_spectrum(&loop_, 17.0).unwrap();
        for r in &records {
            let l = ((r.eigenvalue + 3.0 * c) / (2.0 * PI)).round() as i64;
            assert_eq!(r.winding, l);
            let expected_cover = crate::orbits::gcd(3, l.unsigned_abs()).max(1);
            assert_eq!(r.cover_multiplicity, expected_cover, "winding {l}");
        }
        assert!(records.iter().any(|r| r.winding == 3 && r.cover_multiplicity == 3));
    }

    #[test]
    fn axioms_pass_on_constant_and_diagonal_loops() {
        for loop_ in [
            MatrixLoop::constant(1.0, 128, 1).unwrap(),
            MatrixLoop::diagonal(0.5, -0.5, 128, 1).unwrap(),
        ] {
            let records = solve_spectrum(&loop_, 20.0).unwrap();
            let report = verify_spectral_axioms(&records).unwrap();
            assert!(report.pass(), "{report:?}");
        }
    }

    #[test]
    fn diagonal_loop_splits_eigenvalues_within_winding() {
        let loop_ = MatrixLoop::diagonal(0.5, -0.5, 128, 1).unwrap();
        let records = solve_spectrum(&loop_, 20.0).unwrap();
        // Some winding is shared by two distinct eigenvalues.
        let mut split = false;
        for w in records.windows(2) {
            if w[0].winding == w[1].winding && (w[0].eigenvalue - w[1].eigenvalue).abs() > 1e-6 {
                split = true;
            }
        }
        assert!(split);
    }

    #[test]
    fn corrupted_windings_fail_the_axioms() {
        let loop_ = MatrixLoop::constant(1.0, 128, 1).unwrap();
        let mut records = solve_spectrum(&loop_, 20.0).unwrap();
        let last = records.len() - 1;
        records[last].winding = records[0].winding - 5;
        let report = verify_spectral_axioms(&records).unwrap();
        assert!(!report.pass());
        assert!(!report.monotone_failures.is_empty());
    }

    #[test]
    fn extremal_data_constant_loop() {
        let loop_ = MatrixLoop::constant(1.0, 128, 1).unwrap();
        let records = solve_spectrum(&loop_, 15.0).unwrap();
        let data = extremal_data(&records, 1).unwrap();
        assert_eq!((data.alpha_minus, data.alpha_plus), (0, 1));
        assert_eq!((data.cz, data.parity), (1, 1));
    }

    #[test]
    fn extremal_data_double_cover_matches_floor_formula() {
        // theta = c / 2 pi with c = 1: cz(cover^2) = 2 floor(2 theta) + 1 = 1.
        let loop_ = MatrixLoop::constant(1.0, 128, 2).unwrap();
        let records = solve_spectrum(&loop_, 15.0).unwrap();
        let data = extremal_data(&records, 2).unwrap();
        assert_eq!(data.cz, 1);
    }

    #[test]
    fn window_without_positive_spectrum_is_insufficient() {
        let loop_ = MatrixLoop::constant(1.0, 128, 1).unwrap();
        let records = solve_spectrum(&loop_, 15.0).unwrap();
        let negatives: Vec<EigenRecord> =
            records.into_iter().filter(|r| r.eigenvalue < 0.0).collect();
        assert!(matches!(
            extremal_data(&negatives, 1),
            Err(SpectrumError::InsufficientWindow { .. })
        ));
    }

    #[test]
    fn oracle_agrees_with_closed_form_on_random_loops() {
        // 50 random loops, alternating constant (with the exact elliptic
        // comparison) and diagonal (axioms and window structure only).
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut done = 0;
        while done < 50 {
            let m = (done % 4 + 1) as u64;
            if done % 2 == 1 {
                let c1: f64 = rng.random_range(0.2..1.5);
                let c2: f64 = rng.random_range(-1.5..-0.2);
                let loop_ = MatrixLoop::diagonal(c1, c2, 256, m).unwrap();
                let records = match solve_spectrum(&loop_, 16.0) {
                    Ok(r) => r,
                    Err(SpectrumError::DegenerateOperator { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                assert!(verify_spectral_axioms(&records).unwrap().pass());
                let data = extremal_data(&records, m).unwrap();
                data.validate(m).unwrap();
                done += 1;
                continue;
            }
            let theta: f64 = rng.random_range(0.05..0.95);
            if (1..=4).any(|k| {
                let kt = theta * k as f64;
                (kt - kt.round()).abs() < 1e-3
            }) {
                continue;
            }
            let c = 2.0 * PI * theta;
            let loop_ = MatrixLoop::constant(c, 256, m).unwrap();
            let records = solve_spectrum(&loop_, 16.0).unwrap();
            assert!(verify_spectral_axioms(&records).unwrap().pass());
            let numeric = extremal_data(&records, m).unwrap();
            let closed = OrbitInstance::new(OrbitClass::elliptic("e", theta), m)
                .spectral_data()
                .unwrap();
            assert_eq!(numeric, closed, "theta={theta} m={m}");
            done += 1;
        }
    }

    #[test]
    fn eigenvalues_satisfy_the_floquet_condition() {
        // Independent route: lambda is an eigenvalue iff the monodromy of
        // eta' = J0 (S(t) + lambda) eta has a 1-periodic solution, i.e.
        // tr Psi_lambda = 2 (the flow is area-preserving).  Check every
        // Galerkin eigenvalue of a non-constant loop against it.
        let s = |t: f64| -> [[f64; 2]; 2] {
            let d = 0.3 + 0.2 * (2.0 * PI * t).cos();
            let o = 0.1 * (2.0 * PI * t).sin();
            let e = -0.4 + 0.2 * (4.0 * PI * t).cos();
            [[d, o], [o, e]]
        };
        let samples: Vec<[[f64; 2]; 2]> = (0..256).map(|i| s(i as f64 / 256.0)).collect();
        let loop_ = MatrixLoop::from_samples(&samples, 1).unwrap();
        let records = solve_spectrum(&loop_, 12.0).unwrap();
        assert!(records.len() >= 6);

        let monodromy_trace = |lambda: f64| -> f64 {
            let field = |t: f64, v: [f64; 2]| -> [f64; 2] {
                let m = s(t);
                let w = [
                    m[0][0] * v[0] + m[0][1] * v[1] + lambda * v[0],
                    m[1][0] * v[0] + m[1][1] * v[1] + lambda * v[1],
                ];
                [-w[1], w[0]] // J0 w
            };
            let n = 8192;
            let h = 1.0 / n as f64;
            let mut cols = [[1.0, 0.0], [0.0, 1.0]];
            for i in 0..n {
                let t = i as f64 * h;
                for col in &mut cols {
                    let v = *col;
                    let k1 = field(t, v);
                    let k2 = field(t + 0.5 * h, [v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
                    let k3 = field(t + 0.5 * h, [v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
                    let k4 = field(t + h, [v[0] + h * k3[0], v[1] + h * k3[1]]);
                    col[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                    col[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                }
            }
            cols[0][0] + cols[1][1]
        };
        for r in &records {
            let trace = monodromy_trace(r.eigenvalue);
            assert!(
                (trace - 2.0).abs() < 1e-6,
                "lambda = {}: tr Psi = {trace}",
                r.eigenvalue
            );
        }
    }

    #[test]
    fn grid_convergence_on_a_smooth_loop() {
        let smooth = |n: usize| {
            let samples: Vec<[[f64; 2]; 2]> = (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let d = 0.3 + 0.2 * (2.0 * PI * t).cos();
                    let o = 0.1 * (2.0 * PI * t).sin();
                    let e = -0.4 + 0.2 * (4.0 * PI * t).cos();
                    [[d, o], [o, e]]
                })
                .collect();
            MatrixLoop::from_samples(&samples, 1).unwrap()
        };
        let coarse = solve_spectrum(&smooth(256), 12.0).unwrap();
        let fine = solve_spectrum(&smooth(512), 12.0).unwrap();
        assert_eq!(coarse.len(), fine.len());
        for (c, f) in coarse.iter().zip(&fine) {
            assert!((c.eigenvalue - f.eigenvalue).abs() < 1e-6);
        }
    }

    #[test]
    fn loop_validation_rejects_bad_input() {
        assert!(MatrixLoop::constant(1.0, 32, 1).is_err());
        assert!(MatrixLoop::constant(1.0, 65, 1).is_err());
        let mut samples = vec![[[1.0, 0.0], [0.0, 1.0]]; 64];
        samples[3] = [[1.0, 0.5], [0.2, 1.0]];
        assert!(MatrixLoop::from_samples(&samples, 1).is_err());
    }
}
