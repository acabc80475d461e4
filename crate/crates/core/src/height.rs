//! Rational sections `z(λ) = p(λ)/q(λ)` and their canonical height
//! `ĥ(z) = lim 2^{-n} deg(z_n)`, where `z_n(λ) = f_λ^n(z(λ))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::bipoly::{parse_fraction, BiPoly, PolyError};
use crate::unipoly::UniPoly;
use crate::Rat;

/// Default cap on `deg(z_n)`.
pub const DEFAULT_DEGREE_BUDGET: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeightError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("section denominator is zero")]
    ZeroDenominator,
    #[error("section must be a rational function of `lam` only")]
    NotASection,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degree {degree} of z_{step} exceeds the budget {budget}")]
    BudgetExceeded {
        step: usize,
        degree: usize,
        budget: usize,
    },
}

/// A point of ℙ¹(ℚ(λ)): `p/q` in lowest terms with `q` monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatSection {
    p: UniPoly,
    q: UniPoly,
}

impl RatSection {
    /// Reduces `p/q` to lowest terms with monic denominator.
    pub fn new(p: UniPoly, q: UniPoly) -> Result<Self, HeightError> {
        if q.is_zero() {
            return Err(HeightError::ZeroDenominator);
        }
        let g = UniPoly::gcd(&p, &q);
        let g = if g.is_zero() { UniPoly::one() } else { g };
        let p = p.div_exact(&g).expect("gcd divides numerator");
        let q = q.div_exact(&g).expect("gcd divides denominator");
        let inv = q.lead().recip();
        Ok(RatSection {
            p: p.scale(&inv),
            q: q.scale(&inv),
        })
    }

    pub fn polynomial(p: UniPoly) -> Self {
        RatSection {
            p,
            q: UniPoly::one(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        Self::polynomial(UniPoly::constant(c))
    }

    pub fn numerator(&self) -> &UniPoly {
        &self.p
    }

    pub fn denominator(&self) -> &UniPoly {
        &self.q
    }

    /// `z_1 = (p² + λq²)/q²`. Coprimality is preserved, so no reduction.
    pub fn iterate(&self) -> RatSection {
        let q2 = &self.q * &self.q;
        RatSection {
            p: &(&self.p * &self.p) + &(&UniPoly::x() * &q2),
            q: q2,
        }
    }

    /// Degree as a map ℙ¹ → ℙ¹: `max(deg p, deg q)`.
    pub fn degree(&self) -> usize {
        self.p
            .degree()
            .unwrap_or(0)
            .max(self.q.degree().unwrap_or(0))
    }

    /// The curve `q(λ)·z − p(λ) = 0`, normalized.
    pub fn graph_curve(&self) -> BiPoly {
        let qz = &BiPoly::from_lam_poly(&self.q) * &BiPoly::z();
        (&qz - &BiPoly::from_lam_poly(&self.p))
            .normalize()
            .expect("graph equation is nonzero")
    }
}

impl fmt::Display for RatSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn part(u: &UniPoly) -> String {
            let s = u.to_string();
            if s.trim_start_matches('-').contains(['+', '-', '*']) {
                format!("({s})")
            } else {
                s
            }
        }
        if self.q.is_constant() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", part(&self.p), part(&self.q))
        }
    }
}

impl FromStr for RatSection {
    type Err = HeightError;

    /// `p(lam)/q(lam)` in the polynomial grammar, e.g. `(lam^2+1)/lam`.
    fn from_str(s: &str) -> Result<Self, HeightError> {
        let (num, den) = parse_fraction(s)?;
        let p = num.as_lam_poly().ok_or(HeightError::NotASection)?;
        let q = den.as_lam_poly().ok_or(HeightError::NotASection)?;
        RatSection::new(p, q)
    }
}

pub fn iterate_section(s: &RatSection) -> RatSection {
    s.iterate()
}

pub fn section_degree(s: &RatSection) -> usize {
    s.degree()
}

pub fn graph_curve(s: &RatSection) -> BiPoly {
    s.graph_curve()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeightStatus {
    /// Two consecutive exact estimates coincided at index `at`.
    Stabilized {
        at: usize,
        height: Rat,
    },
    Unstabilized,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightReport {
    /// `deg(z_m)` for `m = 0..=n`.
    pub degrees: Vec<usize>,
    /// `2^{-m}·deg(z_m)`.
    pub estimates: Vec<Rat>,
    /// `|e_n − e_{n−1}|`.
    pub cauchy_diff: Rat,
    pub status: HeightStatus,
}

impl HeightReport {
    /// The stabilized value, or the last estimate.
    pub fn height(&self) -> &Rat {
        match &self.status {
            HeightStatus::Stabilized { height, .. } => height,
            HeightStatus::Unstabilized => self.estimates.last().expect("n ≥ 1"),
        }
    }
}

pub fn canonical_height_section(s: &RatSection, n: usize) -> Result<HeightReport, HeightError> {
    canonical_height_section_with_budget(s, n, DEFAULT_DEGREE_BUDGET)
}

pub fn canonical_height_section_with_budget(
    s: &RatSection,
    n: usize,
    budget: usize,
) -> Result<HeightReport, HeightError> {
    if n == 0 {
        return Err(HeightError::InvalidArgument("n must be at least 1".into()));
    }
    let mut degrees = Vec::with_capacity(n + 1);
    let mut cur = s.clone();
    for step in 0..=n {
        let degree = cur.degree();
        if degree > budget {
            return Err(HeightError::BudgetExceeded {
                step,
                degree,
                budget,
            });
        }
        degrees.push(degree);
        if step < n {
            cur = cur.iterate();
        }
    }
    let estimates: Vec<Rat> = degrees
        .iter()
        .enumerate()
        .map(|(m, &d)| Rat::new(BigInt::from(d), BigInt::one() << m))
        .collect();
    let cauchy_diff = (&estimates[n] - &estimates[n - 1]).abs();
    let status = (1..=n).find(|&m| estimates[m] == estimates[m - 1]).map_or(
        HeightStatus::Unstabilized,
        |at| HeightStatus::Stabilized {
            at,
            height: estimates[at].clone(),
        },
    );
    Ok(HeightReport {
        degrees,
        estimates,
        cauchy_diff,
        status,
    })
}
