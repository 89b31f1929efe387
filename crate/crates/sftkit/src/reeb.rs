//! Reeb dynamics on irrational ellipsoid boundaries, presented on the unit
//! sphere in `C^2`.
//!
//! The contact form is `alpha_H = alpha_std / H` with
//! `H(z1, z2) = |z1|^2 / a^2 + |z2|^2 / b^2`; its Reeb field on the sphere is
//! the linear field `(dz1/dt, dz2/dt) = (2i z1 / a^2, 2i z2 / b^2)`, verified
//! against the defining conditions `alpha_H(R) = 1` and `d alpha_H(R, .) = 0`
//! at construction time.  Because the field is linear, the flow has a closed
//! form (a rotation in each coordinate plane) which serves as the oracle for
//! the RK4 integrator used by orbit detection and Floquet analysis.
//!
//! For an irrational ratio `a^2 / b^2` the only simple closed orbits are the
//! two coordinate circles, with periods `pi a^2` and `pi b^2`.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::parallel::parallel_map;

/// Residual tolerance for the defining conditions of the Reeb field.
pub const TOL_FIELD: f64 = 1e-10;
/// Points this far from the unit sphere are rejected.
pub const TOL_SPHERE: f64 = 1e-9;
/// Floquet multipliers within this distance of 1 flag a degenerate orbit.
pub const TOL_DEGENERATE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ReebError {
    #[error("point is off the unit sphere by {0:e}")]
    NotOnSphere(f64),
    #[error("resonance suspected: {0}")]
    ResonanceSuspected(String),
    #[error("degenerate orbit: Floquet multiplier within {TOL_DEGENERATE:e} of 1 (cover {cover})")]
    DegenerateOrbit { cover: u64 },
    #[error("contact form is not invariant under the lens action: residual {residual:e}")]
    NotInvariant { residual: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("Reeb field fails its defining conditions: residual {residual:e}")]
    DefiningConditions { residual: f64 },
}

/// Parameters of the ellipsoid `|z1|^2/a^2 + |z2|^2/b^2 = 1`, stored as the
/// squares `a_sq`, `b_sq`.
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidParams {
    pub a_sq: f64,
    pub b_sq: f64,
    pub irrational_ratio: bool,
}

impl EllipsoidParams {
    /// Validates positivity, checks the ratio against small rationals when
    /// `irrational_ratio` is asserted, and verifies the defining conditions
    /// of the closed-form Reeb field on a deterministic sample set.
    pub fn new(a_sq: f64, b_sq: f64, irrational_ratio: bool) -> Result<Self, ReebError> {
        if !(a_sq > 0.0 && b_sq > 0.0) {
            return Err(ReebError::InvalidParams(format!(
                "a_sq = {a_sq}, b_sq = {b_sq} must be positive"
            )));
        }
        if irrational_ratio {
            let ratio = a_sq / b_sq;
            for q in 1..=64u64 {
                let p = (ratio * q as f64).round();
                if (ratio - p / q as f64).abs() < 1e-9 {
                    return Err(ReebError::InvalidParams(format!(
                        "a_sq/b_sq = {ratio} is within 1e-9 of {p}/{q}"
                    )));
                }
            }
        }
        let params = EllipsoidParams {
            a_sq,
            b_sq,
            irrational_ratio,
        };
        let residual = verify_reeb_conditions(&params, 128);
        if residual > TOL_FIELD {
            return Err(ReebError::DefiningConditions { residual });
        }
        Ok(params)
    }
}

/// Lens-space quotient data `L(p, q)`: the cyclic unitary group of order `p`
/// acting by `(z1, z2) -> (e^{2 pi i k / p} z1, e^{2 pi i k q / p} z2)`.
#[derive(Debug, Clone, Copy)]
pub struct LensParams {
    pub p: u64,
    pub q: u64,
}

impl LensParams {
    pub fn new(p: u64, q: u64) -> Result<Self, ReebError> {
        if p == 0 || q == 0 || crate::orbits::gcd(p, q) != 1 || (p != 1 && q >= p) {
            return Err(ReebError::InvalidParams(format!(
                "need p > q >= 1 coprime (or p = q = 1), got p = {p}, q = {q}"
            )));
        }
        Ok(LensParams { p, q })
    }
}

/// A detected simple closed Reeb orbit.
#[derive(Debug, Clone)]
pub struct ClosedOrbitRecord {
    /// Unit vector in `C^2`, stored as `(x1, y1, x2, y2)`.
    pub initial_point: [f64; 4],
    pub period: f64,
    pub floquet_multipliers: (Complex64, Complex64),
    /// Transverse rotation number per period in the constant coordinate
    /// frame.
    pub rotation_number: f64,
    /// Conley-Zehnder index in the Seifert-disk trivialization.
    pub cz_disk: i64,
    pub simple: bool,
}

impl ClosedOrbitRecord {
    /// Unit initial point (within 1e-12) and elliptic Floquet multipliers:
    /// a conjugate pair on the unit circle with product 1 (within 1e-8).
    pub fn validate(&self) -> Result<(), ReebError> {
        let off = (norm4(&self.initial_point) - 1.0).abs();
        if off > 1e-12 {
            return Err(ReebError::NotOnSphere(off));
        }
        let (m1, m2) = self.floquet_multipliers;
        if (m1 - m2.conj()).norm() > 1e-8 || (m1 * m2 - 1.0).norm() > 1e-8 {
            return Err(ReebError::InvalidParams(format!(
                "Floquet multipliers {m1}, {m2} are not a unit conjugate pair"
            )));
        }
        Ok(())
    }
}

pub(crate) fn norm4(p: &[f64; 4]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt()
}

fn dist4(p: &[f64; 4], q: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        s += (p[i] - q[i]) * (p[i] - q[i]);
    }
    s.sqrt()
}

/// The Reeb vector of `alpha_H` at a point of the sphere: rotation at rate
/// `2 / a_sq` in the first coordinate plane and `2 / b_sq` in the second.
pub fn reeb_field(state: &[f64; 4], params: &EllipsoidParams) -> Result<[f64; 4], ReebError> {
    let err = (norm4(state) - 1.0).abs();
    if err > TOL_SPHERE {
        return Err(ReebError::NotOnSphere(err));
    }
    Ok(reeb_field_unchecked(state, params))
}

fn reeb_field_unchecked(state: &[f64; 4], params: &EllipsoidParams) -> [f64; 4] {
    let wa = 2.0 / params.a_sq;
    let wb = 2.0 / params.b_sq;
    [
        -wa * state[1],
        wa * state[0],
        -wb * state[3],
        wb * state[2],
    ]
}

fn alpha_std(p: &[f64; 4], v: &[f64; 4]) -> f64 {
    0.5 * (p[0] * v[1] - p[1] * v[0] + p[2] * v[3] - p[3] * v[2])
}

fn hamiltonian(p: &[f64; 4], params: &EllipsoidParams) -> f64 {
    (p[0] * p[0] + p[1] * p[1]) / params.a_sq + (p[2] * p[2] + p[3] * p[3]) / params.b_sq
}

fn grad_h(p: &[f64; 4], params: &EllipsoidParams) -> [f64; 4] {
    [
        2.0 * p[0] / params.a_sq,
        2.0 * p[1] / params.a_sq,
        2.0 * p[2] / params.b_sq,
        2.0 * p[3] / params.b_sq,
    ]
}

fn omega_std(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2]
}

fn dot4(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn alpha_h(p: &[f64; 4], v: &[f64; 4], params: &EllipsoidParams) -> f64 {
    alpha_std(p, v) / hamiltonian(p, params)
}

/// `d alpha_H (u, v)` at `p`, from `d(alpha/H) = dalpha/H - (dH/H^2) ^ alpha`.
fn d_alpha_h(p: &[f64; 4], u: &[f64; 4], v: &[f64; 4], params: &EllipsoidParams) -> f64 {
    let h = hamiltonian(p, params);
    let dh = grad_h(p, params);
    omega_std(u, v) / h
        - (dot4(&dh, u) * alpha_std(p, v) - dot4(&dh, v) * alpha_std(p, u)) / (h * h)
}

/// Maximum residual of `alpha_H(R) = 1` and `d alpha_H(R, v) = 0` over a
/// deterministic set of sample states and tangent directions.
pub fn verify_reeb_conditions(params: &EllipsoidParams, samples: usize) -> f64 {
    let mut residual: f64 = 0.0;
    let mut x = 0.123_456_789_f64;
    let mut next = || {
        // Small deterministic LCG; statistical quality is irrelevant here.
        x = (x * 9_301.0 + 49_297.0) % 233_280.0;
        x / 233_280.0
    };
    for _ in 0..samples {
        let mut p = [next() - 0.5, next() - 0.5, next() - 0.5, next() - 0.5];
        let n = norm4(&p);
        if n < 1e-3 {
            continue;
        }
        for c in &mut p {
            *c /= n;
        }
        let r = reeb_field_unchecked(&p, params);
        residual = residual.max((alpha_h(&p, &r, params) - 1.0).abs());
        for _ in 0..3 {
            let mut v = [next() - 0.5, next() - 0.5, next() - 0.5, next() - 0.5];
            // Project onto the tangent space of the sphere.
            let vp = dot4(&v, &p);
            for i in 0..4 {
                v[i] -= vp * p[i];
            }
            residual = residual.max(d_alpha_h(&p, &r, &v, params).abs());
        }
    }
    residual
}

/// Closed-form flow: rotation by `2 t / a_sq` and `2 t / b_sq` in the two
/// coordinate planes.
pub fn flow_exact(state: &[f64; 4], t: f64, params: &EllipsoidParams) -> [f64; 4] {
    let (ca, sa) = ((2.0 * t / params.a_sq).cos(), (2.0 * t / params.a_sq).sin());
    let (cb, sb) = ((2.0 * t / params.b_sq).cos(), (2.0 * t / params.b_sq).sin());
    [
        ca * state[0] - sa * state[1],
        sa * state[0] + ca * state[1],
        cb * state[2] - sb * state[3],
        sb * state[2] + cb * state[3],
    ]
}

fn rk4_step(state: &[f64; 4], h: f64, params: &EllipsoidParams) -> [f64; 4] {
    let f = |s: &[f64; 4]| reeb_field_unchecked(s, params);
    let k1 = f(state);
    let mut s2 = *state;
    for i in 0..4 {
        s2[i] += 0.5 * h * k1[i];
    }
    let k2 = f(&s2);
    let mut s3 = *state;
    for i in 0..4 {
        s3[i] += 0.5 * h * k2[i];
    }
    let k3 = f(&s3);
    let mut s4 = *state;
    for i in 0..4 {
        s4[i] += h * k3[i];
    }
    let k4 = f(&s4);
    let mut out = *state;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Flows for time `t` with fixed-step RK4 (step size `h`, final partial step
/// as needed).
pub fn flow_rk4(state: &[f64; 4], t: f64, h: f64, params: &EllipsoidParams) -> [f64; 4] {
    let mut s = *state;
    let steps = (t / h).floor() as u64;
    for _ in 0..steps {
        s = rk4_step(&s, h, params);
    }
    let rest = t - steps as f64 * h;
    if rest > 0.0 {
        s = rk4_step(&s, rest, params);
    }
    s
}

/// Scans trajectories from a `grid x grid` lattice of initial conditions for
/// returns `|phi_T(x) - x| < tol` with `T <= period_cap`, deduplicates by
/// orbit image, and reports the simple closed orbits found.
///
/// For an irrational ratio the result is exactly the two coordinate circles;
/// a confirmed return anywhere else aborts with `ResonanceSuspected`.
pub fn find_closed_orbits(
    params: &EllipsoidParams,
    period_cap: f64,
    grid: usize,
    tol: f64,
    threads: usize,
) -> Result<Vec<ClosedOrbitRecord>, ReebError> {
    if !params.irrational_ratio {
        return Err(ReebError::ResonanceSuspected(
            "caller did not assert an irrational axis ratio".into(),
        ));
    }
    assert!(grid >= 2 && period_cap > 0.0 && tol > 0.0);

    let lattice: Vec<[f64; 4]> = (0..grid)
        .flat_map(|i| {
            (0..grid).map(move |j| {
                let r_sq = i as f64 / (grid - 1) as f64;
                let phi = 2.0 * PI * j as f64 / grid as f64;
                let r = r_sq.sqrt();
                let s = (1.0 - r_sq).max(0.0).sqrt();
                [r * phi.cos(), r * phi.sin(), s, 0.0]
            })
        })
        .collect();

    let detections = parallel_map(lattice, threads, |start| detect_return(&start, params, period_cap, tol));

    let mut orbits: Vec<([f64; 4], f64)> = Vec::new();
    for det in detections.into_iter().flatten() {
        let (start, period) = det;
        let on_circle = {
            let r1 = start[0] * start[0] + start[1] * start[1];
            r1 < 1e-12 || (1.0 - r1).abs() < 1e-12
        };
        if !on_circle {
            return Err(ReebError::ResonanceSuspected(format!(
                "return of period {period} found at ({}, {}, {}, {})",
                start[0], start[1], start[2], start[3]
            )));
        }
        let duplicate = orbits
            .iter()
            .any(|(s, p)| hausdorff(s, *p, &start, period, params) < 10.0 * tol);
        if !duplicate {
            orbits.push((start, period));
        }
    }
    orbits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0[0].total_cmp(&b.0[0])));

    let mut records = Vec::new();
    for (start, period) in orbits {
        let mut record = ClosedOrbitRecord {
            initial_point: start,
            period,
            floquet_multipliers: (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            rotation_number: 0.0,
            cz_disk: 0,
            simple: true,
        };
        let fd = floquet_and_cz(&record, params, 1)?;
        record.floquet_multipliers = fd.multipliers;
        record.rotation_number = fd.rotation_number;
        record.cz_disk = fd.cz_disk;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

/// First confirmed return of the trajectory from `start`, as `(start, T)`.
///
/// The trajectory is integrated with RK4 at step 1e-3; local minima of the
/// return distance are polished by golden-section search and accepted when
/// the refined distance (cross-checked against the closed-form flow) is
/// below `tol`.
fn detect_return(
    start: &[f64; 4],
    params: &EllipsoidParams,
    period_cap: f64,
    tol: f64,
) -> Option<([f64; 4], f64)> {
    const H: f64 = 1e-3;
    let mut state = *start;
    let mut d_prev2 = 0.0f64;
    let mut d_prev = 0.0f64;
    let mut checkpoint = *start; // state at (n-2) steps
    let mut step: u64 = 0;
    let total_steps = (period_cap / H).ceil() as u64;
    while step < total_steps {
        state = rk4_step(&state, H, params);
        step += 1;
        let d = dist4(&state, start);
        let t = step as f64 * H;
        // Interior local minimum of the return distance at t - H.
        if step >= 3 && d_prev < d_prev2 && d_prev < d && t - 2.0 * H > 10.0 * H {
            let t0 = t - 2.0 * H;
            if let Some(period) = refine_return(&checkpoint, t0, 2.0 * H, start, params, tol) {
                return Some((*start, period));
            }
        }
        if step >= 2 {
            checkpoint = rk4_step(&checkpoint, H, params);
        }
        d_prev2 = d_prev;
        d_prev = d;
    }
    None
}

/// Golden-section refinement of the return time within `[t0, t0 + span]`,
/// evaluating the distance through RK4 continuation from the checkpointed
/// state and validating against the closed-form flow.
fn refine_return(
    checkpoint: &[f64; 4],
    t0: f64,
    span: f64,
    start: &[f64; 4],
    params: &EllipsoidParams,
    tol: f64,
) -> Option<f64> {
    let dist_at = |dt: f64| -> f64 {
        let s = flow_rk4(checkpoint, dt, 1e-4, params);
        dist4(&s, start)
    };
    let golden = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0, span);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (dist_at(x1), dist_at(x2));
    for _ in 0..90 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = dist_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = dist_at(x2);
        }
    }
    let dt = 0.5 * (lo + hi);
    let period = t0 + dt;
    let d_rk4 = dist_at(dt);
    let exact = flow_exact(start, period, params);
    let d_exact = dist4(&exact, start);
    (d_rk4 < tol && d_exact < tol).then_some(period)
}

/// Hausdorff distance between the images of two orbits.  Points are sampled
/// on one orbit and their distance to the other is minimized over the
/// continuous flow parameter (coarse scan plus golden-section polish), so
/// coinciding images measure as zero regardless of sampling phase.
fn hausdorff(s1: &[f64; 4], p1: f64, s2: &[f64; 4], p2: f64, params: &EllipsoidParams) -> f64 {
    const N: usize = 64;
    const SCAN: usize = 256;
    let point_to_orbit = |p: &[f64; 4], s: &[f64; 4], period: f64| -> f64 {
        let d = |t: f64| dist4(&flow_exact(s, t, params), p);
        let mut best_t = 0.0;
        let mut best = f64::INFINITY;
        for i in 0..SCAN {
            let t = period * i as f64 / SCAN as f64;
            let v = d(t);
            if v < best {
                best = v;
                best_t = t;
            }
        }
        let golden = 0.618_033_988_749_894_9;
        let (mut lo, mut hi) = (best_t - period / SCAN as f64, best_t + period / SCAN as f64);
        let mut x1 = hi - golden * (hi - lo);
        let mut x2 = lo + golden * (hi - lo);
        let (mut f1, mut f2) = (d(x1), d(x2));
        for _ in 0..60 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = d(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = d(x2);
            }
        }
        d(0.5 * (lo + hi))
    };
    let one_sided = |sa: &[f64; 4], pa: f64, sb: &[f64; 4], pb: f64| -> f64 {
        (0..N)
            .map(|i| {
                let p = flow_exact(sa, pa * i as f64 / N as f64, params);
                point_to_orbit(&p, sb, pb)
            })
            .fold(0.0, f64::max)
    };
    one_sided(s1, p1, s2, p2).max(one_sided(s2, p2, s1, p1))
}

/// Floquet data of a cover of a detected orbit.
#[derive(Debug, Clone)]
pub struct FloquetData {
    pub multipliers: (Complex64, Complex64),
    /// Rotation number per period of the underlying simple orbit, in the
    /// constant coordinate frame.
    pub rotation_number: f64,
    /// `2 floor(k theta_D) + 1` with `theta_D = rotation_number + 1`, the
    /// rotation number in the Seifert-disk frame.
    pub cz_disk: i64,
}

/// Integrates the variational equation transverse to the orbit over `k`
/// periods and extracts multipliers, rotation number, and the disk-frame
/// Conley-Zehnder index.
pub fn floquet_and_cz(
    orbit: &ClosedOrbitRecord,
    params: &EllipsoidParams,
    cover_k: u64,
) -> Result<FloquetData, ReebError> {
    assert!(cover_k >= 1);
    let p = &orbit.initial_point;
    let r1 = p[0] * p[0] + p[1] * p[1];
    // Transverse plane: the other coordinate plane; its linearized rotation
    // rate is constant because the field is linear and diagonal.
    let w_trans = if r1 > 0.5 {
        2.0 / params.b_sq
    } else {
        2.0 / params.a_sq
    };
    let t_final = cover_k as f64 * orbit.period;

    // RK4 on y' = w J0 y for the two basis columns, tracking the continuous
    // rotation angle of the first column.
    let mut y = [[1.0, 0.0], [0.0, 1.0]]; // columns (y[0], y[1])
    let mut angle = 0.0f64;
    let mut prev = (1.0f64, 0.0f64);
    let h = 1e-3;
    let steps = (t_final / h).ceil() as u64;
    let f = |v: [f64; 2]| [-w_trans * v[1], w_trans * v[0]];
    let dt_last = t_final - (steps - 1) as f64 * h;
    for s in 0..steps {
        let dt = if s + 1 == steps { dt_last } else { h };
        for col in &mut y {
            let v = [col[0], col[1]];
            let k1 = f(v);
            let k2 = f([v[0] + 0.5 * dt * k1[0], v[1] + 0.5 * dt * k1[1]]);
            let k3 = f([v[0] + 0.5 * dt * k2[0], v[1] + 0.5 * dt * k2[1]]);
            let k4 = f([v[0] + dt * k3[0], v[1] + dt * k3[1]]);
            col[0] += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            col[1] += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        let cur = (y[0][0], y[0][1]);
        let cross = prev.0 * cur.1 - prev.1 * cur.0;
        let dot = prev.0 * cur.0 + prev.1 * cur.1;
        angle += cross.atan2(dot);
        prev = cur;
    }

    // Monodromy matrix columns y[0], y[1]; for a linear rotation flow it is
    // elliptic with unit-circle multipliers.
    let tr = y[0][0] + y[1][1];
    let det = y[0][0] * y[1][1] - y[0][1] * y[1][0];
    let disc = det - 0.25 * tr * tr;
    let multipliers = if disc >= 0.0 {
        (
            Complex64::new(0.5 * tr, disc.sqrt()),
            Complex64::new(0.5 * tr, -disc.sqrt()),
        )
    } else {
        (
            Complex64::new(0.5 * tr + (-disc).sqrt(), 0.0),
            Complex64::new(0.5 * tr - (-disc).sqrt(), 0.0),
        )
    };
    if (multipliers.0 - 1.0).norm() < TOL_DEGENERATE
        || (multipliers.1 - 1.0).norm() < TOL_DEGENERATE
    {
        return Err(ReebError::DegenerateOrbit { cover: cover_k });
    }
    let rotation_number = angle / (2.0 * PI * cover_k as f64);
    let theta_disk = rotation_number + 1.0;
    let cz_disk = 2 * (cover_k as f64 * theta_disk).floor() as i64 + 1;
    Ok(FloquetData {
        multipliers,
        rotation_number,
        cz_disk,
    })
}

/// Lens quotient report: invariance of the contact form under the cyclic
/// action, the downstairs periods, and contractibility of the projected
/// orbits.
#[derive(Debug, Clone)]
pub struct LensReport {
    pub residual: f64,
    /// Periods of the simple orbits downstairs: `T_i / p`, whose `p`-fold
    /// covers are the projections of the two circle orbits.
    pub downstairs_periods: (f64, f64),
    pub noncontractible: bool,
    pub note: String,
}

/// Evaluates the invariance residual of an arbitrary 1-form sampler under
/// the `L(p, q)` action: `max |form(g p)(g v) - form(p)(v)|`.
pub fn invariance_residual<F>(form: F, lens: &LensParams, samples: usize) -> f64
where
    F: Fn(&[f64; 4], &[f64; 4]) -> f64,
{
    let rotate = |p: &[f64; 4], k: u64| -> [f64; 4] {
        let t1 = 2.0 * PI * k as f64 / lens.p as f64;
        let t2 = 2.0 * PI * k as f64 * lens.q as f64 / lens.p as f64;
        [
            t1.cos() * p[0] - t1.sin() * p[1],
            t1.sin() * p[0] + t1.cos() * p[1],
            t2.cos() * p[2] - t2.sin() * p[3],
            t2.sin() * p[2] + t2.cos() * p[3],
        ]
    };
    let mut residual: f64 = 0.0;
    let mut x = 0.987_654_321_f64;
    let mut next = || {
        x = (x * 9_301.0 + 49_297.0) % 233_280.0;
        x / 233_280.0
    };
    for _ in 0..samples {
        let mut p = [next() - 0.5, next() - 0.5, next() - 0.5, next() - 0.5];
        let n = norm4(&p);
        if n < 1e-3 {
            continue;
        }
        for c in &mut p {
            *c /= n;
        }
        let v = [next() - 0.5, next() - 0.5, next() - 0.5, next() - 0.5];
        let base = form(&p, &v);
        for k in 1..lens.p {
            let gp = rotate(&p, k);
            let gv = rotate(&v, k);
            residual = residual.max((form(&gp, &gv) - base).abs());
        }
    }
    residual
}

/// Verifies that `alpha_H` descends to the lens space and reports the
/// downstairs orbit data.
pub fn lens_quotient_report(
    params: &EllipsoidParams,
    lens: &LensParams,
) -> Result<LensReport, ReebError> {
    if !params.irrational_ratio {
        return Err(ReebError::ResonanceSuspected(
            "caller did not assert an irrational axis ratio".into(),
        ));
    }
    let p = *params;
    let residual = invariance_residual(
        move |pt, v| alpha_h(pt, v, &p),
        lens,
        512,
    );
    if residual > TOL_FIELD {
        return Err(ReebError::NotInvariant { residual });
    }
    let (t1, t2) = (PI * params.a_sq, PI * params.b_sq);
    Ok(LensReport {
        residual,
        downstairs_periods: (t1 / lens.p as f64, t2 / lens.p as f64),
        noncontractible: lens.p > 1,
        note: if lens.p > 1 {
            "downstairs orbits are noncontractible: their lifts to the universal cover are non-closed paths".into()
        } else {
            "trivial quotient: orbits remain contractible".into()
        },
    })
}

/// Relative winding of the Seifert-disk frame against the constant frame
/// along the first coordinate circle, computed from the explicit section
/// `X_D(z1, h) = (-h, conj(z1))` of the contact structure over the disk
/// `D = {(z1, sqrt(1 - |z1|^2))}`.
pub fn disk_frame_winding(samples: usize) -> i64 {
    let mut angle = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        // gamma(t) = (e^{2 pi i t}, 0); X_D there is (0, e^{-2 pi i t}),
        // whose constant-frame component is the second complex coordinate.
        let w = ((2.0 * PI * t).cos(), -(2.0 * PI * t).sin());
        if let Some(p) = prev {
            let cross = p.0 * w.1 - p.1 * w.0;
            let dot = p.0 * w.0 + p.1 * w.1;
            angle += cross.atan2(dot);
        }
        prev = Some(w);
    }
    (angle / (2.0 * PI)).round() as i64
}

/// Self-linking number of the first coordinate circle, framed by the Seifert
/// disk: the signed count of intersections of the push-off along the disk
/// frame with the disk itself.
pub fn self_linking_via_pushoff(eps: f64, samples: usize) -> i64 {
    let gamma = |t: f64| -> [f64; 4] {
        [(2.0 * PI * t).cos(), (2.0 * PI * t).sin(), 0.0, 0.0]
    };
    let frame = |t: f64| -> [f64; 4] {
        [0.0, 0.0, (2.0 * PI * t).cos(), -(2.0 * PI * t).sin()]
    };
    let pushoff = |t: f64| -> [f64; 4] {
        let g = gamma(t);
        let x = frame(t);
        let mut c = [0.0; 4];
        for i in 0..4 {
            c[i] = g[i] + eps * x[i];
        }
        let n = norm4(&c);
        for v in &mut c {
            *v /= n;
        }
        c
    };

    // Crossings of the disk {Im z2 = 0, Re z2 > 0}; sample points are offset
    // by half a step so the zeros fall strictly between samples.
    let mut total = 0i64;
    for i in 0..samples {
        let t0 = (i as f64 + 0.5) / samples as f64;
        let t1 = (i as f64 + 1.5) / samples as f64;
        let (c0, c1) = (pushoff(t0), pushoff(t1));
        if c0[3].signum() == c1[3].signum() {
            continue;
        }
        // Bisection on Im z2.
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if pushoff(mid)[3].signum() == pushoff(lo)[3].signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let q = pushoff(t);
        if q[2] <= 0.0 {
            continue;
        }
        // Intersection sign: orientation of (q, c', D_rho, D_psi) in R^4,
        // with the disk D(rho, psi) = (rho e^{i psi}, sqrt(1 - rho^2))
        // oriented so that its boundary is the orbit.
        let dt = 1e-6;
        let (qp, qm) = (pushoff(t + dt), pushoff(t - dt));
        let mut cdot = [0.0; 4];
        for i in 0..4 {
            cdot[i] = (qp[i] - qm[i]) / (2.0 * dt);
        }
        let rho = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let psi = q[1].atan2(q[0]);
        let h = (1.0 - rho * rho).max(1e-300).sqrt();
        let d_rho = [psi.cos(), psi.sin(), -rho / h, 0.0];
        let d_psi = [-rho * psi.sin(), rho * psi.cos(), 0.0, 0.0];
        let det = det4(&[q, cdot, d_rho, d_psi]);
        total += if det > 0.0 { 1 } else { -1 };
    }
    total
}

fn det4(cols: &[[f64; 4]; 4]) -> f64 {
    let m = cols;
    let minor = |r: [usize; 3], c: [usize; 3]| -> f64 {
        m[c[0]][r[0]] * (m[c[1]][r[1]] * m[c[2]][r[2]] - m[c[1]][r[2]] * m[c[2]][r[1]])
            - m[c[1]][r[0]] * (m[c[0]][r[1]] * m[c[2]][r[2]] - m[c[0]][r[2]] * m[c[2]][r[1]])
            + m[c[2]][r[0]] * (m[c[0]][r[1]] * m[c[1]][r[2]] - m[c[0]][r[2]] * m[c[1]][r[1]])
    };
    m[0][0] * minor([1, 2, 3], [1, 2, 3]) - m[1][0] * minor([1, 2, 3], [0, 2, 3])
        + m[2][0] * minor([1, 2, 3], [0, 1, 3])
        - m[3][0] * minor([1, 2, 3], [0, 1, 2])
}
