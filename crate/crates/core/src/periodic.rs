//! Periodic points of `f_λ(z) = z² + λ`: the exact period curves
//! `f_λ^k(z) − z` and their dynatomic factors, numeric cycles with
//! multipliers, continuation in `λ`, and the equidistribution potential.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bipoly::BiPoly;
use crate::green::{in_K_test, GreenError, InKVerdict};
use crate::roots::{aberth_iterate, circle_guesses, RootError};
use crate::scalar::{is_finite_complex, pow2_neg, Real};
use crate::Rat;

pub const MAX_PERIOD_POLY: usize = 16;
pub const MAX_PERIODIC_POINTS: usize = 14;
pub const MAX_DYNATOMIC: usize = 12;
pub const MAX_EQUIDIST_STEPS: usize = 40;

/// A root is assigned period `d` when it lies within this distance of a
/// root of `f^d(z) − z`.
pub const PERIOD_TOL: f64 = 1e-8;
/// Roots within `AMBIGUITY_FACTOR·PERIOD_TOL` of a lower-period root are
/// flagged as ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 1e3;
/// `|m| < 1 − ATTRACTING_BAND` is attracting.
pub const ATTRACTING_BAND: f64 = 1e-8;
/// `|m| ≥ 1 + REPELLING_BAND` is repelling.
pub const REPELLING_BAND: f64 = 1e-6;
/// Residual bound `|f^k(z) − z| ≤ RESIDUAL_TOL·(1 + |λ|)^k` on returned points.
pub const RESIDUAL_TOL: f64 = 1e-9;

pub const DEFAULT_FOLLOW_STEPS: usize = 64;
pub const MAX_HALVINGS: usize = 20;
/// Newton stops once `|f^k(z) − z|` is this small.
pub const NEWTON_TOL: f64 = 1e-12;
/// `|(f^k)'(z) − 1|` below this is treated as a bifurcation.
pub const BIFURCATION_TOL: f64 = 1e-8;

/// A substep that still fails after all halvings is attributed to a
/// bifurcation when `|(f^k)'(z) − 1|` at its start is below this.
const NEAR_BIFURCATION: f64 = 1e-3;
const MAX_NEWTON_ITERATIONS: usize = 60;
const RATIO_SWITCH: f64 = 1e60;

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("root iteration stalled: largest residual {max_residual:e} exceeds {bound:e}")]
    Residual { max_residual: f64, bound: f64 },
    #[error("Newton iteration diverged at substep {substep}")]
    NewtonDivergence { substep: usize },
    #[error("multiplier reached 1 at substep {substep} (bifurcation)")]
    Bifurcation { substep: usize },
    #[error("w is not certified to escape")]
    NotEscaping,
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error("inexact division computing the dynatomic factor of period {0}")]
    InexactDivision(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stability {
    Attracting,
    Indifferent,
    Repelling,
}

impl Stability {
    pub fn of<F: Real>(multiplier: Complex<F>) -> Self {
        let m = multiplier.norm();
        if m < F::one() - F::lit(ATTRACTING_BAND) {
            Stability::Attracting
        } else if m >= F::one() + F::lit(REPELLING_BAND) {
            Stability::Repelling
        } else {
            Stability::Indifferent
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Attracting => "attracting",
            Stability::Indifferent => "indifferent",
            Stability::Repelling => "repelling",
        })
    }
}

/// A root of `f_λ^k(z) − z` with the data of its cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicPoint<F> {
    pub z: Complex<F>,
    /// Exact period, a divisor of `k`.
    pub period: usize,
    /// `(f_λ^period)'(z) = ∏ 2·f_λ^i(z)` over one cycle.
    pub multiplier: Complex<F>,
    pub stability: Stability,
    /// The root is close to a root of lower period too.
    pub ambiguous: bool,
}

fn check_range(name: &str, k: usize, max: usize) -> Result<(), PeriodicError> {
    if (1..=max).contains(&k) {
        Ok(())
    } else {
        Err(PeriodicError::InvalidArgument(format!(
            "{name} must lie in 1..={max}, got {k}"
        )))
    }
}

/// `f_λ^k(z) − z` in exact arithmetic.
pub fn period_poly(k: usize) -> Result<BiPoly, PeriodicError> {
    check_range("period", k, MAX_PERIOD_POLY)?;
    Ok(rows_to_poly(&period_rows(k)))
}

/// Dense integer polynomial in `z` over `ℤ[λ]`: `rows[j][i]` multiplies `z^j λ^i`.
type IntRows = Vec<Vec<BigInt>>;

/// `f_λ^k(z) − z` for `k ≥ 1`. The iterate is even in `z`, so it is squared
/// as a grid in `(z², λ)`.
fn period_rows(k: usize) -> IntRows {
    let mut grid = vec![vec![BigInt::zero(), BigInt::one()], vec![BigInt::one()]];
    for _ in 1..k {
        let mut sq: IntRows = vec![Vec::new(); 2 * grid.len() - 1];
        for (j1, r1) in grid.iter().enumerate() {
            for (j2, r2) in grid.iter().enumerate().skip(j1) {
                let row = &mut sq[j1 + j2];
                for (i1, a) in r1.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
                    for (i2, b) in r2.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                        let prod = a * b;
                        add_at(row, i1 + i2, if j1 == j2 { prod } else { prod << 1 });
                    }
                }
            }
        }
        add_at(&mut sq[0], 1, BigInt::one());
        grid = sq;
    }
    let mut rows: IntRows = vec![Vec::new(); 2 * grid.len() - 1];
    for (j, row) in grid.into_iter().enumerate() {
        rows[2 * j] = row;
    }
    add_at(&mut rows[1], 0, -BigInt::one());
    rows
}

fn add_at(row: &mut Vec<BigInt>, i: usize, v: BigInt) {
    if row.len() <= i {
        row.resize(i + 1, BigInt::zero());
    }
    row[i] += v;
}

fn rows_to_poly(rows: &IntRows) -> BiPoly {
    BiPoly::from_terms(rows.iter().enumerate().flat_map(|(j, row)| {
        row.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (i as u32, j as u32, Rat::from_integer(c.clone())))
    }))
}

fn rows_mul(a: &IntRows, b: &IntRows) -> IntRows {
    let mut out: IntRows = vec![Vec::new(); a.len() + b.len() - 1];
    for (ja, ra) in a.iter().enumerate() {
        for (jb, rb) in b.iter().enumerate() {
            for (ia, x) in ra.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (ib, y) in rb.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                    add_at(&mut out[ja + jb], ia + ib, x * y);
                }
            }
        }
    }
    out
}

/// `a / b` for `b` monic in `z`; `None` when the division leaves a remainder.
fn rows_div_monic(a: &IntRows, b: &IntRows) -> Option<IntRows> {
    let db = b.len() - 1;
    let mut rem = a.clone();
    if rem.len() <= db {
        return rem.iter().flatten().all(Zero::is_zero).then(Vec::new);
    }
    let mut quot: IntRows = vec![Vec::new(); rem.len() - db];
    for k in (0..quot.len()).rev() {
        let c = std::mem::take(&mut rem[k + db]);
        for (i, bi) in b.iter().enumerate().take(db) {
            for (x, cx) in c.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                for (y, by) in bi.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                    add_at(&mut rem[k + i], x + y, -(cx * by));
                }
            }
        }
        quot[k] = c;
    }
    rem.iter().flatten().all(Zero::is_zero).then_some(quot)
}

fn divisors(k: usize) -> Vec<usize> {
    (1..=k).filter(|d| k.is_multiple_of(*d)).collect()
}

fn mobius(mut n: usize) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

/// `Φ*_k = ∏_{d|k} (f_λ^d(z) − z)^{μ(k/d)}`.
pub fn dynatomic(k: usize) -> Result<BiPoly, PeriodicError> {
    check_range("period", k, MAX_DYNATOMIC)?;
    let one: IntRows = vec![vec![BigInt::one()]];
    let (mut num, mut den) = (one.clone(), one);
    for d in divisors(k) {
        match mobius(k / d) {
            1 => num = rows_mul(&num, &period_rows(d)),
            -1 => den = rows_mul(&den, &period_rows(d)),
            _ => {}
        }
    }
    // every factor f^d − z is monic in z, hence so is den
    rows_div_monic(&num, &den)
        .map(|q| rows_to_poly(&q))
        .ok_or(PeriodicError::InexactDivision(k))
}

/// Whether `P` divides `f_λ^k(z) − z` in `ℚ[λ, z]`.
pub fn divides_period_curve(p: &BiPoly, k: usize) -> Result<bool, PeriodicError> {
    check_range("period", k, MAX_PERIOD_POLY)?;
    if p.is_zero() {
        return Err(PeriodicError::InvalidArgument("zero polynomial".into()));
    }
    // deg_z(f^k − z) = 2^k and deg_λ = 2^{k−1}
    if p.deg_z().unwrap_or(0) as u64 > 1 << k || p.deg_lambda().unwrap_or(0) as u64 > 1 << (k - 1) {
        return Ok(false);
    }
    let target = period_rows(k);
    let monic_integer = p
        .normalize()
        .ok()
        .filter(|q| q.leading().is_some_and(|(e, c)| e.lam == 0 && c.is_one()));
    if let Some(q) = monic_integer {
        let dz = q.deg_z().unwrap_or(0) as usize;
        let mut rows: IntRows = vec![Vec::new(); dz + 1];
        for (e, c) in q.terms() {
            add_at(&mut rows[e.z as usize], e.lam as usize, c.to_integer());
        }
        return Ok(rows_div_monic(&target, &rows).is_some());
    }
    Ok(rows_to_poly(&target).div_exact(p).is_some())
}

/// `(f^k(z), (f^k)'(z))`.
fn orbit_derivative<F: Real>(z: Complex<F>, lam: Complex<F>, k: usize) -> (Complex<F>, Complex<F>) {
    let two = F::lit(2.0);
    let mut n = z;
    let mut d = Complex::new(F::one(), F::zero());
    for _ in 0..k {
        d = d * n * two;
        n = n * n + lam;
    }
    (n, d)
}

/// `(f^k(z) − z)/((f^k)'(z) − 1)`, switching to the ratio recursion
/// `q_{m+1} = q_m/2·(1 + λ/N_m²)` for `q_m = N_m/D_m` once the orbit is
/// far out, so that large starting guesses do not overflow.
fn newton_ratio<F: Real>(z: Complex<F>, lam: Complex<F>, k: usize) -> Complex<F> {
    let two = F::lit(2.0);
    let one = Complex::new(F::one(), F::zero());
    let mut n = z;
    let mut d = one;
    for m in 0..k {
        if n.norm() > F::lit(RATIO_SWITCH) {
            let mut q = n / d;
            for _ in m..k {
                q = q / two;
                // past 1e150 the correction λ/N² is below rounding
                if n.norm() < F::lit(1e150) {
                    q = q * (one + lam / (n * n));
                    n = n * n + lam;
                }
            }
            return q;
        }
        d = d * n * two;
        n = n * n + lam;
    }
    (n - z) / (d - one)
}

/// Multiplier of the cycle through `z` of the given period.
pub fn cycle_multiplier<F: Real>(z: Complex<F>, lam: Complex<F>, period: usize) -> Complex<F> {
    orbit_derivative(z, lam, period).1
}

/// Every root of `f_λ^k(z) − z` (with multiplicity), with exact period,
/// multiplier and stability.
pub fn periodic_points<F: Real>(
    lam: Complex<F>,
    k: usize,
) -> Result<Vec<PeriodicPoint<F>>, PeriodicError> {
    check_range("period", k, MAX_PERIODIC_POINTS)?;
    if !is_finite_complex(lam) {
        return Err(PeriodicError::InvalidArgument(
            "non-finite parameter".into(),
        ));
    }
    // every periodic point lies in |z| ≤ 1/2 + √(1/4 + |λ|)
    let half = F::lit(0.5);
    let bound = half + (F::lit(0.25) + lam.norm()).sqrt();
    let init = circle_guesses(1 << k, bound * F::lit(1.1));
    let run = aberth_iterate(
        init,
        |z| newton_ratio(z, lam, k),
        F::epsilon() * F::lit(4.0),
    )?;

    let residual_bound = F::lit(RESIDUAL_TOL).max(F::epsilon() * F::lit(1e7))
        * (F::one() + lam.norm()).powi(k as i32);
    let residuals: Vec<F> = run
        .roots
        .iter()
        .map(|&z| (orbit_derivative(z, lam, k).0 - z).norm())
        .collect();
    if !residuals.iter().all(|&r| r <= residual_bound) {
        let max_residual =
            residuals
                .iter()
                .fold(F::zero(), |m, &r| if r.is_nan() || r > m { r } else { m });
        return Err(PeriodicError::Residual {
            max_residual: max_residual.to_f64().unwrap_or(f64::NAN),
            bound: residual_bound.to_f64().unwrap_or(f64::NAN),
        });
    }

    let tol = F::lit(PERIOD_TOL);
    let loose = tol * F::lit(AMBIGUITY_FACTOR);
    let divs = divisors(k);
    Ok(run
        .roots
        .into_iter()
        .map(|z| {
            let dist: Vec<F> = divs
                .iter()
                .map(|&d| newton_ratio(z, lam, d).norm())
                .collect();
            let idx = dist
                .iter()
                .position(|&e| e <= tol)
                .unwrap_or(divs.len() - 1);
            let period = divs[idx];
            let ambiguous = dist[..idx].iter().any(|&e| e <= loose) || dist[idx] > tol;
            let multiplier = cycle_multiplier(z, lam, period);
            PeriodicPoint {
                z,
                period,
                multiplier,
                stability: Stability::of(multiplier),
                ambiguous,
            }
        })
        .collect())
}

/// CSV with columns `re_z,im_z,period,re_mult,im_mult,stability`.
pub fn periodic_points_csv<F: Real>(points: &[PeriodicPoint<F>]) -> String {
    let mut out = String::from("re_z,im_z,period,re_mult,im_mult,stability\n");
    for p in points {
        let _ = writeln!(
            out,
            "{:?},{:?},{},{:?},{:?},{}",
            p.z.re, p.z.im, p.period, p.multiplier.re, p.multiplier.im, p.stability
        );
    }
    out
}

/// `g = f^k(z) − z`, `∂g/∂z` and `∂g/∂λ`.
fn period_equation<F: Real>(
    z: Complex<F>,
    lam: Complex<F>,
    k: usize,
) -> (Complex<F>, Complex<F>, Complex<F>) {
    let two = F::lit(2.0);
    let one = Complex::new(F::one(), F::zero());
    let mut n = z;
    let mut dz = one;
    let mut dlam = Complex::new(F::zero(), F::zero());
    for _ in 0..k {
        dz = dz * n * two;
        dlam = dlam * n * two + one;
        n = n * n + lam;
    }
    (n - z, dz - one, dlam)
}

/// Newton on `g(·, λ)` from `start`. Fails when a correction does not
/// shrink, which means `start` was outside the basin of the tracked root.
fn newton_correct<F: Real>(start: Complex<F>, lam: Complex<F>, k: usize) -> Option<Complex<F>> {
    let mut z = start;
    let mut prev = F::infinity();
    let tiny = F::lit(1e-15).max(F::epsilon() * F::lit(8.0));
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let (g, gz, _) = period_equation(z, lam, k);
        if g.norm() <= F::lit(NEWTON_TOL) {
            return Some(z);
        }
        let step = g / gz;
        let size = step.norm();
        if !size.is_finite() || size > prev {
            return None;
        }
        z = z - step;
        if size <= tiny * (F::one() + z.norm()) {
            return Some(z);
        }
        prev = size;
    }
    None
}

/// Holomorphic continuation of a period-`k` point from `lam0` to `lam1`
/// along the segment: Euler predictor with `dz/dλ = −g_λ/g_z`, Newton
/// corrector, and up to [`MAX_HALVINGS`] bisections of a failing substep.
pub fn follow_periodic<F: Real>(
    lam0: Complex<F>,
    z0: Complex<F>,
    k: usize,
    lam1: Complex<F>,
    steps: usize,
) -> Result<Complex<F>, PeriodicError> {
    if k == 0 || steps == 0 {
        return Err(PeriodicError::InvalidArgument(
            "period and steps must be at least 1".into(),
        ));
    }
    if ![lam0, z0, lam1].iter().all(|&c| is_finite_complex(c)) {
        return Err(PeriodicError::InvalidArgument("non-finite input".into()));
    }
    let mut z =
        newton_correct(z0, lam0, k).ok_or(PeriodicError::NewtonDivergence { substep: 0 })?;
    check_multiplier(z, lam0, k, 0)?;
    if lam0 == lam1 {
        return Ok(z);
    }
    let nsteps = F::from_usize(steps).unwrap();
    for i in 1..=steps {
        let t0 = F::from_usize(i - 1).unwrap() / nsteps;
        let t1 = F::from_usize(i).unwrap() / nsteps;
        let a = lam0 + (lam1 - lam0) * t0;
        let b = lam0 + (lam1 - lam0) * t1;
        z = advance(z, a, b, k, i, 0)?;
    }
    Ok(z)
}

fn check_multiplier<F: Real>(
    z: Complex<F>,
    lam: Complex<F>,
    k: usize,
    substep: usize,
) -> Result<(), PeriodicError> {
    let (_, gz, _) = period_equation(z, lam, k);
    if gz.norm() < F::lit(BIFURCATION_TOL) {
        return Err(PeriodicError::Bifurcation { substep });
    }
    Ok(())
}

fn advance<F: Real>(
    z: Complex<F>,
    a: Complex<F>,
    b: Complex<F>,
    k: usize,
    substep: usize,
    depth: usize,
) -> Result<Complex<F>, PeriodicError> {
    let (_, gz, glam) = period_equation(z, a, k);
    let predicted = z - glam / gz * (b - a);
    let moved = (predicted - z).norm();
    let accepted = newton_correct(predicted, b, k)
        .filter(|&zn| (zn - predicted).norm() <= F::lit(0.5) * moved + F::lit(1e-10));
    match accepted {
        Some(zn) => {
            check_multiplier(zn, b, k, substep)?;
            Ok(zn)
        }
        None if depth < MAX_HALVINGS => {
            let mid = (a + b) * F::lit(0.5);
            let zm = advance(z, a, mid, k, substep, depth + 1)?;
            advance(zm, mid, b, k, substep, depth + 1)
        }
        None if gz.norm() < F::lit(NEAR_BIFURCATION) => Err(PeriodicError::Bifurcation { substep }),
        None => Err(PeriodicError::NewtonDivergence { substep }),
    }
}

/// `|2^{-n} log|f_λ^n(w) − w| − G(w, λ)|`.
///
/// The left term is the potential at `w` of the uniform measure on the
/// roots of `f_λ^n(z) − z`. The iterate is carried as `e^L·u` with `|u| = 1`
/// once it is large, so `n` up to 40 does not overflow.
pub fn equidist_check<F: Real>(
    lam: Complex<F>,
    w: Complex<F>,
    n: usize,
) -> Result<F, PeriodicError> {
    check_range("n", n, MAX_EQUIDIST_STEPS)?;
    let InKVerdict::Escapes(g) = in_K_test(w, lam, F::lit(1e-12))? else {
        return Err(PeriodicError::NotEscaping);
    };
    let big = F::lit(1e50);
    let mut v = w;
    let mut done = 0;
    while done < n && v.norm() <= big {
        v = v * v + lam;
        done += 1;
    }
    let log_diff = if done == n {
        (v - w).norm().ln()
    } else {
        let one = Complex::new(F::one(), F::zero());
        let mut log_mod = v.norm().ln();
        let mut unit = v / v.norm();
        for _ in done..n {
            // w² + λ = e^{2L}·u²·(1 + λ e^{−2L} ū²)
            let t = lam * (-F::lit(2.0) * log_mod).exp() * unit.conj() * unit.conj();
            let s = one + t;
            log_mod = F::lit(2.0) * log_mod + s.norm().ln();
            unit = unit * unit * s / s.norm();
        }
        log_mod + (unit - w * (-log_mod).exp()).norm().ln()
    };
    Ok((pow2_neg::<F>(n) * log_diff - g.estimate).abs())
}
