//! Certified evaluation of the Green function
//! `G(z, λ) = lim 2^{-n} log⁺|f_λ^n(z)|` and the membership tests built on it.
//!
//! For every `n`, `|G(z, λ) − 2^{-n} log⁺|f_λ^n(z)|| ≤ (log⁺|λ| + log 2)/2^{n−1}`.
//! Orbits are followed with a running bound `δ` on the distance between the
//! floating-point iterate and the true one, so an escape is only declared
//! when the whole disk of radius `δ` has left `|w| ≤ 1 + max(|λ|, 2)`. Past
//! `|w| > 10⁸` the iteration continues on `log|w|` alone as an interval.

use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bipoly::BiPoly;
use crate::roots::{self, RootError};
use crate::scalar::{is_finite_complex, log_plus, pow2_neg, Real};

/// Default tolerance for `G`.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Curve scans sample `λ` in the disk of this radius.
pub const SAMPLING_RADIUS: f64 = 4.0;

/// Minimum number of iterations before giving up on an escape. Slow escapes
/// near parabolic parameters need far more steps than the accuracy target.
pub const ITERATION_FLOOR: usize = 1000;

const TAIL_THRESHOLD: f64 = 1e8;
const PRECISION_LIMIT: f64 = 1e-3;
const MAX_TAIL_STEPS: usize = 16;

/// A value of `G` together with a rigorous error radius.
///
/// The true value lies in `[max(0, estimate − radius), estimate + radius]`.
/// `resolved` is true when an escape was certified; otherwise the enclosure
/// only comes from the global bound and the orbit may well be bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedValue<F> {
    pub estimate: F,
    pub radius: F,
    pub resolved: bool,
}

impl<F: Real> CertifiedValue<F> {
    pub fn lower(&self) -> F {
        (self.estimate - self.radius).max(F::zero())
    }

    pub fn upper(&self) -> F {
        self.estimate + self.radius
    }

    /// `G > 0` is certified.
    pub fn is_positive(&self) -> bool {
        self.estimate - self.radius > F::zero()
    }
}

#[derive(Debug, Error)]
pub enum GreenError {
    #[error("non-finite input")]
    NonFinite,
    #[error("eps must be positive and finite")]
    InvalidEps,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("orbit overflowed before the logarithmic phase")]
    Overflow,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `N(eps) = ⌈log₂((log⁺|λ| + log 2)/eps)⌉ + 1`, at least 1.
pub fn iterations_for<F: Real>(lam_abs: F, eps: F) -> usize {
    let c = log_plus(lam_abs) + F::LN_2();
    let n = (c / eps).log2().ceil().to_f64().unwrap_or(0.0);
    (n.max(0.0) as usize) + 1
}

/// The iteration cap: `N(eps)`, raised to [`ITERATION_FLOOR`] but kept small
/// enough that `2^{-n}` stays a normal number of `F`.
fn iteration_cap<F: Real>(n_eps: usize) -> usize {
    let representable = -F::min_positive_value().log2().to_f64().unwrap_or(-1000.0) * 0.9;
    n_eps.max(ITERATION_FLOOR.min(representable as usize))
}

pub fn green_value<F: Real>(
    z: Complex<F>,
    lam: Complex<F>,
    eps: F,
) -> Result<CertifiedValue<F>, GreenError> {
    green_value_ball(z, F::zero(), lam, eps)
}

/// [`green_value`] for every point of the closed disk of radius `z_radius`
/// around `z`: the returned enclosure holds for all of them.
pub fn green_value_ball<F: Real>(
    z: Complex<F>,
    z_radius: F,
    lam: Complex<F>,
    eps: F,
) -> Result<CertifiedValue<F>, GreenError> {
    if !is_finite_complex(z)
        || !is_finite_complex(lam)
        || !z_radius.is_finite()
        || z_radius < F::zero()
    {
        return Err(GreenError::NonFinite);
    }
    if !(eps > F::zero() && eps.is_finite()) {
        return Err(GreenError::InvalidEps);
    }
    let u = F::epsilon();
    let four = F::lit(4.0);
    let lam_abs = lam.norm();
    let ln_lam = lam_abs.ln();
    let c = log_plus(lam_abs) + F::LN_2();
    let cap = iteration_cap::<F>(iterations_for(lam_abs, eps));
    let escape_radius = F::one() + lam_abs.max(F::lit(2.0));
    let tail_start = F::lit(TAIL_THRESHOLD);

    let mut w = z;
    let mut delta = z_radius;
    let mut n = 0usize;
    let mut escaped = false;
    let (mut lo, mut hi) = loop {
        let a = w.norm();
        escaped |= a - delta > escape_radius;
        if escaped {
            if a > tail_start && F::lit(2.0) * a.ln() - ln_lam >= F::LN_2() {
                break ((a - delta).ln(), (a + delta).ln());
            }
        } else if delta > F::lit(PRECISION_LIMIT) || n >= cap {
            let scale = pow2_neg::<F>(n);
            let lo = scale * log_plus((a - delta).max(F::zero()));
            let hi = scale * log_plus(a + delta);
            let global = c * F::lit(2.0) * scale;
            return Ok(CertifiedValue {
                estimate: (lo + hi) / F::lit(2.0),
                radius: ((hi - lo) / F::lit(2.0) + global) * (F::one() + four * u),
                resolved: false,
            });
        }
        w = w * w + lam;
        delta = (F::lit(2.0) * a + delta) * delta + four * u * (a * a + lam_abs);
        n += 1;
        if !is_finite_complex(w) {
            return Err(GreenError::Overflow);
        }
    };

    // log|w_{m+1}| = 2 log|w_m| + log|1 + λ/w_m²|, the last term bounded by
    // s/(1 − s) with s = |λ|/|w_m|² ≤ 1/2.
    let correction = |lo: F| {
        let s = (ln_lam - F::lit(2.0) * lo).exp();
        s / (F::one() - s)
    };
    let mut steps = 0;
    loop {
        let b = correction(lo);
        let radius = pow2_neg::<F>(n) * ((hi - lo) / F::lit(2.0) + b);
        if radius <= eps / F::lit(2.0) && b <= u * lo || b == F::zero() || steps >= MAX_TAIL_STEPS {
            let estimate = pow2_neg::<F>(n) * (lo + hi) / F::lit(2.0);
            return Ok(CertifiedValue {
                estimate,
                radius: radius + four * u * estimate,
                resolved: true,
            });
        }
        lo = (F::lit(2.0) * lo - b) * (F::one() - four * u);
        hi = (F::lit(2.0) * hi + b) * (F::one() + four * u);
        n += 1;
        steps += 1;
    }
}

/// Outcome of a membership test for `K_λ`. Membership itself is never
/// certified: a bounded orbit only yields an upper bound on `G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InKVerdict<F> {
    Escapes(CertifiedValue<F>),
    NoEscapeWithin { bound: F },
}

impl<F> InKVerdict<F> {
    pub fn escapes(&self) -> bool {
        matches!(self, InKVerdict::Escapes(_))
    }
}

#[allow(non_snake_case)]
pub fn in_K_test<F: Real>(
    z: Complex<F>,
    lam: Complex<F>,
    eps: F,
) -> Result<InKVerdict<F>, GreenError> {
    Ok(classify(green_value(z, lam, eps)?))
}

fn classify<F: Real>(g: CertifiedValue<F>) -> InKVerdict<F> {
    if g.resolved && g.is_positive() {
        InKVerdict::Escapes(g)
    } else {
        InKVerdict::NoEscapeWithin { bound: g.upper() }
    }
}

/// Tests the critical orbit: `Escapes` certifies `λ` outside the Mandelbrot set.
pub fn mandelbrot_test<F: Real>(lam: Complex<F>, eps: F) -> Result<InKVerdict<F>, GreenError> {
    in_K_test(Complex::new(F::zero(), F::zero()), lam, eps)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScanVerdict<F> {
    /// A point of the curve whose orbit certifiably escapes.
    NotContained {
        z: Complex<F>,
        lam: Complex<F>,
        green: CertifiedValue<F>,
        /// Index of the `λ` sample that produced the witness.
        sample: usize,
    },
    NoWitnessFound {
        tested: usize,
        /// Samples where root finding failed.
        skipped: Vec<(Complex<F>, RootError)>,
    },
}

/// `count` parameters spread over the disk `|λ| ≤ 4` along a golden-angle
/// spiral with a seed-dependent rotation.
pub fn sample_lambdas<F: Real>(count: usize, seed: u64) -> Vec<Complex<F>> {
    let rotation: f64 = ChaCha8Rng::seed_from_u64(seed).gen::<f64>() * std::f64::consts::TAU;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let r = SAMPLING_RADIUS * ((i as f64 + 0.5) / count as f64).sqrt();
            let t = rotation + golden * i as f64;
            Complex::new(F::lit(r * t.cos()), F::lit(r * t.sin()))
        })
        .collect()
}

/// Looks for a point of `{P = 0}` outside `𝒦` at sampled parameters.
/// Each root is tested together with a disk known to contain a true root,
/// so a witness is a certified escape, not a rounding artifact.
#[allow(non_snake_case)]
pub fn curve_in_K_scan<F: Real>(
    p: &BiPoly,
    num_lambda: usize,
    eps: F,
    seed: u64,
) -> Result<ScanVerdict<F>, GreenError> {
    if num_lambda == 0 {
        return Err(GreenError::InvalidArgument(
            "num_lambda must be at least 1".into(),
        ));
    }
    if p.deg_z().unwrap_or(0) == 0 {
        return Err(GreenError::InvalidArgument(
            "curve must not be vertical".into(),
        ));
    }
    let mut skipped = Vec::new();
    for (sample, lam) in sample_lambdas::<F>(num_lambda, seed)
        .into_iter()
        .enumerate()
    {
        let coeffs = p.z_coeffs_at(lam);
        let zs = match roots::poly_roots(&coeffs) {
            Ok(zs) => zs,
            Err(RootError::Degenerate(_)) => continue,
            Err(e) => {
                skipped.push((lam, e));
                continue;
            }
        };
        for z in zs {
            let radius = roots::root_radius(&coeffs, z);
            if !radius.is_finite() {
                continue;
            }
            let green = green_value_ball(z, radius, lam, eps)?;
            if let InKVerdict::Escapes(green) = classify(green) {
                return Ok(ScanVerdict::NotContained {
                    z,
                    lam,
                    green,
                    sample,
                });
            }
        }
    }
    Ok(ScanVerdict::NoWitnessFound {
        tested: num_lambda,
        skipped,
    })
}

/// A rectangle of the complex plane sampled on a pixel grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region<F> {
    pub re_min: F,
    pub re_max: F,
    pub im_min: F,
    pub im_max: F,
    pub width_px: usize,
    pub height_px: usize,
}

impl<F: Real> Region<F> {
    pub fn new(
        re: (F, F),
        im: (F, F),
        width_px: usize,
        height_px: usize,
    ) -> Result<Self, GreenError> {
        let finite = [re.0, re.1, im.0, im.1].iter().all(|v| v.is_finite());
        if !finite || re.0 >= re.1 || im.0 >= im.1 || width_px == 0 || height_px == 0 {
            return Err(GreenError::InvalidArgument(
                "region needs re_min < re_max, im_min < im_max and a nonempty grid".into(),
            ));
        }
        Ok(Region {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            width_px,
            height_px,
        })
    }

    /// Center of pixel `(x, y)`; row 0 is the top edge.
    pub fn pixel_center(&self, x: usize, y: usize) -> Complex<F> {
        let fx = (F::from_usize(x).unwrap() + F::lit(0.5)) / F::from_usize(self.width_px).unwrap();
        let fy = (F::from_usize(y).unwrap() + F::lit(0.5)) / F::from_usize(self.height_px).unwrap();
        Complex::new(
            self.re_min + fx * (self.re_max - self.re_min),
            self.im_max - fy * (self.im_max - self.im_min),
        )
    }

    /// The pixel containing `c`, if it lies in the region.
    pub fn pixel_of(&self, c: Complex<F>) -> Option<(usize, usize)> {
        let fx = (c.re - self.re_min) / (self.re_max - self.re_min);
        let fy = (self.im_max - c.im) / (self.im_max - self.im_min);
        if !(F::zero()..=F::one()).contains(&fx) || !(F::zero()..=F::one()).contains(&fy) {
            return None;
        }
        let x = (fx * F::from_usize(self.width_px).unwrap())
            .floor()
            .to_usize()?;
        let y = (fy * F::from_usize(self.height_px).unwrap())
            .floor()
            .to_usize()?;
        Some((x.min(self.width_px - 1), y.min(self.height_px - 1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenderKind<F> {
    /// Pixels are parameters `λ`; the critical orbit is tested.
    Parameter,
    /// Pixels are starting points `z` for the fixed parameter.
    Dynamical(Complex<F>),
}

/// Grayscale escape image: 0 where no escape is certified, otherwise
/// `⌈255·G/G_max⌉` with `G_max` the largest certified value in view.
///
/// `workers = 0` uses all available cores. Every pixel is computed
/// independently, so the bytes do not depend on `workers`.
pub fn render_pixels<F: Real>(
    kind: RenderKind<F>,
    region: &Region<F>,
    eps: F,
    workers: usize,
) -> Result<Vec<u8>, GreenError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| GreenError::ThreadPool(e.to_string()))?;
    let (w, h) = (region.width_px, region.height_px);
    let values: Vec<Option<F>> = pool.install(|| {
        (0..w * h)
            .into_par_iter()
            .map(|i| {
                let c = region.pixel_center(i % w, i / w);
                let (z, lam) = match kind {
                    RenderKind::Parameter => (Complex::new(F::zero(), F::zero()), c),
                    RenderKind::Dynamical(lam) => (c, lam),
                };
                Ok(match in_K_test(z, lam, eps)? {
                    InKVerdict::Escapes(g) => Some(g.estimate),
                    InKVerdict::NoEscapeWithin { .. } => None,
                })
            })
            .collect::<Result<_, GreenError>>()
    })?;
    let g_max = values.iter().flatten().fold(F::zero(), |m, &g| m.max(g));
    let full = F::lit(255.0);
    Ok(values
        .into_iter()
        .map(|v| match v {
            None => 0,
            Some(g) => {
                let level = (full * (g / g_max).min(F::one())).ceil();
                level.to_u8().unwrap_or(255).max(1)
            }
        })
        .collect())
}

/// [`render_pixels`] wrapped as a binary PGM (P5, maxval 255).
pub fn render_pgm<F: Real>(
    kind: RenderKind<F>,
    region: &Region<F>,
    eps: F,
    workers: usize,
) -> Result<Vec<u8>, GreenError> {
    let mut out = format!("P5\n{} {}\n255\n", region.width_px, region.height_px).into_bytes();
    out.extend(render_pixels(kind, region, eps, workers)?);
    Ok(out)
}

pub fn render_escape<F: Real>(
    kind: RenderKind<F>,
    region: &Region<F>,
    eps: F,
    workers: usize,
    out_path: impl AsRef<Path>,
) -> Result<(), GreenError> {
    std::fs::write(out_path, render_pgm(kind, region, eps, workers)?)?;
    Ok(())
}
