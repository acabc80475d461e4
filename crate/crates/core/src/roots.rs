//! Simultaneous polynomial root finding (Aberth–Ehrlich).
//!
//! The engine only needs the Newton correction `p(z)/p'(z)` at each
//! approximation, so callers can evaluate through a recursion instead of
//! expanded coefficients.

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::{is_finite_complex, Real};

/// Iteration cap for [`aberth`].
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("polynomial has no roots (degree {0})")]
    Degenerate(usize),
    #[error("non-finite coefficient or iterate")]
    NonFinite,
    #[error(
        "root iteration did not converge in {iterations} iterations (largest step {max_step:e})"
    )]
    NoConvergence { iterations: usize, max_step: f64 },
}

/// `n` points on the circle of the given radius, rotated off the real axis.
pub fn circle_guesses<F: Real>(n: usize, radius: F) -> Vec<Complex<F>> {
    let tau = F::TAU();
    (0..n)
        .map(|j| {
            let t = tau * (F::from_usize(j).unwrap() + F::lit(0.3)) / F::from_usize(n).unwrap();
            Complex::from_polar(radius, t + F::lit(0.1))
        })
        .collect()
}

/// Outcome of [`aberth_iterate`].
#[derive(Clone, Debug, PartialEq)]
pub struct AberthRun<F> {
    pub roots: Vec<Complex<F>>,
    pub converged: bool,
    pub iterations: usize,
}

/// Refines `init` (one approximation per root) with Aberth steps until each
/// correction is below `tol·(1 + |z|)`. `newton(z)` must return `p(z)/p'(z)`.
pub fn aberth<F, N>(init: Vec<Complex<F>>, newton: N, tol: F) -> Result<Vec<Complex<F>>, RootError>
where
    F: Real,
    N: Fn(Complex<F>) -> Complex<F> + Sync,
{
    let run = aberth_iterate(init, &newton, tol)?;
    if run.converged {
        return Ok(run.roots);
    }
    let max_step = run
        .roots
        .iter()
        .map(|&z| newton(z).norm())
        .fold(F::zero(), F::max);
    Err(RootError::NoConvergence {
        iterations: run.iterations,
        max_step: max_step.to_f64().unwrap_or(f64::NAN),
    })
}

/// [`aberth`] without the convergence verdict: returns the last iterate
/// even when some corrections never dropped below the tolerance, which
/// happens at multiple roots.
///
/// Updates are computed from the previous iterate (Jacobi order), so the
/// result does not depend on how the work is split across threads.
pub fn aberth_iterate<F, N>(
    init: Vec<Complex<F>>,
    newton: N,
    tol: F,
) -> Result<AberthRun<F>, RootError>
where
    F: Real,
    N: Fn(Complex<F>) -> Complex<F> + Sync,
{
    let n = init.len();
    if n == 0 {
        return Err(RootError::Degenerate(0));
    }
    if !init.iter().all(|&z| is_finite_complex(z)) {
        return Err(RootError::NonFinite);
    }
    let mut z = init;
    let mut done = vec![false; n];
    let one = Complex::new(F::one(), F::zero());
    for iteration in 1..=MAX_ITERATIONS {
        let steps: Vec<Option<Complex<F>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if done[i] {
                    return None;
                }
                let zi = z[i];
                let ratio = newton(zi);
                let repulsion = z
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .fold(Complex::new(F::zero(), F::zero()), |acc, (_, &zj)| {
                        acc + (zi - zj).inv()
                    });
                let w = ratio / (one - ratio * repulsion);
                Some(if is_finite_complex(w) { w } else { ratio })
            })
            .collect();
        let mut all_done = true;
        for (i, step) in steps.into_iter().enumerate() {
            let Some(w) = step else { continue };
            if !is_finite_complex(w) {
                // p' vanished at an iterate: nudge it off the critical point
                z[i] = z[i] + Complex::new(tol.sqrt(), tol.sqrt());
                all_done = false;
                continue;
            }
            z[i] = z[i] - w;
            if w.norm() <= tol * (F::one() + z[i].norm()) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(AberthRun {
                roots: z,
                converged: true,
                iterations: iteration,
            });
        }
    }
    Ok(AberthRun {
        roots: z,
        converged: false,
        iterations: MAX_ITERATIONS,
    })
}

/// Horner evaluation of `p` and `p'` for ascending coefficients.
pub fn eval_with_derivative<F: Real>(
    coeffs: &[Complex<F>],
    z: Complex<F>,
) -> (Complex<F>, Complex<F>) {
    let zero = Complex::new(F::zero(), F::zero());
    coeffs
        .iter()
        .rev()
        .fold((zero, zero), |(p, dp), &c| (p * z + c, dp * z + p))
}

/// All roots of the polynomial with the given ascending coefficients.
/// Trailing zero coefficients are dropped first.
pub fn poly_roots<F: Real>(coeffs: &[Complex<F>]) -> Result<Vec<Complex<F>>, RootError> {
    if !coeffs.iter().all(|&c| is_finite_complex(c)) {
        return Err(RootError::NonFinite);
    }
    let len = coeffs
        .iter()
        .rposition(|c| c.norm() != F::zero())
        .map_or(0, |i| i + 1);
    let c = &coeffs[..len];
    let n = len.saturating_sub(1);
    if n == 0 {
        return Err(RootError::Degenerate(0));
    }
    let lead = c[n];
    // Fujiwara bound on the root moduli
    let bound = (1..=n)
        .map(|i| {
            let r = (c[n - i] / lead).norm();
            let r = if i == n { r / F::lit(2.0) } else { r };
            r.powf(F::one() / F::from_usize(i).unwrap())
        })
        .fold(F::zero(), F::max)
        * F::lit(2.0);
    let radius = if bound > F::zero() { bound } else { F::one() };
    let tol = F::epsilon() * F::lit(4.0);
    aberth(
        circle_guesses(n, radius),
        |z| {
            let (p, dp) = eval_with_derivative(c, z);
            p / dp
        },
        tol,
    )
}

/// Radius of a disk around `z` that contains a root: `n·|p(z)|/|p'(z)|`,
/// with `|p(z)|` inflated by a bound on the rounding error of Horner's rule.
pub fn root_radius<F: Real>(coeffs: &[Complex<F>], z: Complex<F>) -> F {
    let n = coeffs.len().saturating_sub(1);
    let (p, dp) = eval_with_derivative(coeffs, z);
    let r = z.norm();
    let abs_sum = coeffs
        .iter()
        .rev()
        .fold(F::zero(), |acc, c| acc * r + c.norm());
    let rounding = F::from_usize(4 * n + 4).unwrap() * F::epsilon() * abs_sum;
    let nf = F::from_usize(n.max(1)).unwrap();
    nf * (p.norm() + rounding) / dp.norm()
}
