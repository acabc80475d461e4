//! Sparse bivariate polynomials in `(lam, z)` over ℚ.
//!
//! A [`BiPoly`] is the defining equation of a plane curve. Besides ring
//! arithmetic this module provides the canonical normal form used for cycle
//! detection, exact gcd and squarefree reduction, removal of vertical
//! components, and the even/odd decomposition
//! `P(λ, z) = A(λ, z²+λ) + z·B(λ, z²+λ)` on which the pushforward is built.

mod gcd;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::Real;
use crate::unipoly::{primitive_scale, rat_to_real, UniPoly};
use crate::Rat;

pub use parse::parse_fraction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { pos: usize, name: String },
}

/// Exponent pair of a monomial `lam^lam · z^z`.
///
/// Ordered by `z` first, then `lam`: the largest exponent of a polynomial in
/// this order carries its leading coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent {
    pub z: u32,
    pub lam: u32,
}

impl Exponent {
    pub fn new(lam: u32, z: u32) -> Self {
        Exponent { z, lam }
    }
}

/// Bidegree of a nonzero polynomial. `deg_sum` is the degree of the curve
/// (intersections with a generic vertical plus a generic horizontal line).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Degrees {
    pub deg_lambda: u32,
    pub deg_z: u32,
    pub deg_sum: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BiPoly {
    terms: BTreeMap<Exponent, Rat>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: Rat, lam: u32, z: u32) -> Self {
        let mut p = BiPoly::zero();
        if !c.is_zero() {
            p.terms.insert(Exponent::new(lam, z), c);
        }
        p
    }

    pub fn z() -> Self {
        Self::monomial(Rat::one(), 0, 1)
    }

    pub fn lam() -> Self {
        Self::monomial(Rat::one(), 1, 0)
    }

    /// Builds from `(lam_exp, z_exp, coeff)` triples, summing duplicates.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, Rat)>>(terms: I) -> Self {
        let mut p = BiPoly::zero();
        for (lam, z, c) in terms {
            p.add_term(Exponent::new(lam, z), c);
        }
        p
    }

    /// Integer-coefficient shorthand for [`BiPoly::from_terms`].
    pub fn from_int_terms(terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(
            terms
                .iter()
                .map(|&(l, z, c)| (l, z, Rat::from_integer(c.into()))),
        )
    }

    /// Embeds a polynomial in `lam`.
    pub fn from_lam_poly(p: &UniPoly) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| (i as u32, 0, c.clone())),
        )
    }

    fn add_term(&mut self, e: Exponent, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for constants, including zero.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.z == 0 && e.lam == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing `(z, lam)` order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (Exponent, &Rat)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, lam: u32, z: u32) -> Rat {
        self.terms
            .get(&Exponent::new(lam, z))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Leading term in the `(z, lam)` order.
    pub fn leading(&self) -> Option<(Exponent, &Rat)> {
        self.terms.last_key_value().map(|(e, c)| (*e, c))
    }

    pub fn deg_z(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.z).max()
    }

    pub fn deg_lambda(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.lam).max()
    }

    pub fn degrees(&self) -> Result<Degrees, PolyError> {
        let (deg_lambda, deg_z) = match (self.deg_lambda(), self.deg_z()) {
            (Some(l), Some(z)) => (l, z),
            _ => return Err(PolyError::ZeroPolynomial),
        };
        Ok(Degrees {
            deg_lambda,
            deg_z,
            deg_sum: deg_lambda + deg_z,
        })
    }

    /// True if the polynomial does not involve `z`.
    pub fn is_lam_only(&self) -> bool {
        self.terms.keys().all(|e| e.z == 0)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return BiPoly::zero();
        }
        BiPoly {
            terms: self.terms.iter().map(|(e, a)| (*e, a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = BiPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `P(λ, -z)`.
    pub fn reflect_z(&self) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, if e.z % 2 == 1 { -c } else { c.clone() }))
                .collect(),
        }
    }

    pub fn derivative_z(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e.z > 0)
                .map(|(e, c)| (e.lam, e.z - 1, c * Rat::from_integer(e.z.into()))),
        )
    }

    pub fn derivative_lam(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e.lam > 0)
                .map(|(e, c)| (e.lam - 1, e.z, c * Rat::from_integer(e.lam.into()))),
        )
    }

    /// Coefficients in `z` as polynomials in `lam`; index is the `z` exponent.
    pub fn to_rows(&self) -> Vec<UniPoly> {
        let Some(dz) = self.deg_z() else {
            return Vec::new();
        };
        let mut rows: Vec<Vec<Rat>> = vec![Vec::new(); dz as usize + 1];
        for (e, c) in &self.terms {
            let row = &mut rows[e.z as usize];
            let i = e.lam as usize;
            if row.len() <= i {
                row.resize(i + 1, Rat::zero());
            }
            row[i] = c.clone();
        }
        rows.into_iter().map(UniPoly::from_coeffs).collect()
    }

    pub fn from_rows(rows: &[UniPoly]) -> Self {
        Self::from_terms(rows.iter().enumerate().flat_map(|(j, row)| {
            row.coeffs()
                .iter()
                .enumerate()
                .map(move |(i, c)| (i as u32, j as u32, c.clone()))
        }))
    }

    /// The polynomial in `lam` when `z` does not occur.
    pub fn as_lam_poly(&self) -> Option<UniPoly> {
        if !self.is_lam_only() {
            return None;
        }
        Some(self.to_rows().into_iter().next().unwrap_or_default())
    }

    /// Substitutes `z ↦ q`, keeping `lam`.
    pub fn subst_z(&self, q: &BiPoly) -> BiPoly {
        let rows = self.to_rows();
        let mut acc = BiPoly::zero();
        for row in rows.iter().rev() {
            acc = &(&acc * q) + &BiPoly::from_lam_poly(row);
        }
        acc
    }

    /// Simultaneous substitution `lam ↦ lam_to`, `z ↦ z_to`; a ring
    /// homomorphism.
    pub fn compose(&self, lam_to: &BiPoly, z_to: &BiPoly) -> BiPoly {
        let mut acc = BiPoly::zero();
        for row in self.to_rows().iter().rev() {
            let c = row.coeffs().iter().rev().fold(BiPoly::zero(), |a, ci| {
                &(&a * lam_to) + &BiPoly::constant(ci.clone())
            });
            acc = &(&acc * z_to) + &c;
        }
        acc
    }

    pub fn eval_exact(&self, lam: &Rat, z: &Rat) -> Rat {
        self.to_rows()
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, row| acc * z + row.eval_exact(lam))
    }

    /// Horner evaluation at a complex point.
    pub fn eval<F: Real>(&self, lam: Complex<F>, z: Complex<F>) -> Complex<F> {
        self.z_coeffs_at(lam)
            .iter()
            .rev()
            .fold(Complex::new(F::zero(), F::zero()), |acc, &c| acc * z + c)
    }

    /// Numeric coefficients in `z` at a fixed `lam`, lowest degree first.
    pub fn z_coeffs_at<F: Real>(&self, lam: Complex<F>) -> Vec<Complex<F>> {
        self.to_rows().iter().map(|r| r.eval_complex(lam)).collect()
    }

    /// Maximum absolute coefficient as a float.
    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| rat_to_real::<f64>(&c.abs()))
            .fold(0.0, f64::max)
    }

    /// Canonical representative of the curve `{P = 0}`: coprime integer
    /// coefficients with a positive leading coefficient in the `(z, lam)`
    /// order. Idempotent and invariant under nonzero rational scaling.
    pub fn normalize(&self) -> Result<BiPoly, PolyError> {
        let (_, lead) = self.leading().ok_or(PolyError::ZeroPolynomial)?;
        let s = primitive_scale(self.terms.values(), lead.is_negative());
        Ok(self.scale(&s))
    }

    /// `Some(self / d)` when `d` divides `self` exactly in ℚ[lam, z].
    pub fn div_exact(&self, d: &BiPoly) -> Option<BiPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(BiPoly::zero());
        }
        gcd::rows_div_exact(&self.to_rows(), &d.to_rows()).map(|q| BiPoly::from_rows(&q))
    }

    /// Normalized greatest common divisor. Errors only if both are zero.
    pub fn gcd(&self, other: &BiPoly) -> Result<BiPoly, PolyError> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Err(PolyError::ZeroPolynomial),
            (true, false) => other.normalize(),
            (false, true) => self.normalize(),
            (false, false) => {
                let g = gcd::rows_gcd(&self.to_rows(), &other.to_rows());
                BiPoly::from_rows(&g).normalize()
            }
        }
    }

    /// Splits `P = V·H` where `V(lam)` is the content of `P` over ℚ[lam]
    /// (normalized) and `H` has no factor depending on `lam` alone.
    pub fn strip_vertical(&self) -> Result<(BiPoly, BiPoly), PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let rows = self.to_rows();
        let content = gcd::content(&rows).primitive();
        let h = gcd::rows_div_scalar(&rows, &content).expect("content divides every row");
        Ok((BiPoly::from_lam_poly(&content), BiPoly::from_rows(&h)))
    }

    /// Normalized product of the distinct irreducible factors of `P`.
    pub fn squarefree_part(&self) -> Result<BiPoly, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let rows = self.to_rows();
        let content = gcd::content(&rows);
        let v = content
            .div_exact(&UniPoly::gcd(&content, &content.derivative()))
            .expect("gcd divides");
        let h = gcd::rows_div_scalar(&rows, &content).expect("content divides every row");
        let h = if gcd::is_squarefree_primitive(&h) {
            h
        } else {
            let g = gcd::primitive_gcd(&h, &gcd::rows_derivative(&h));
            gcd::rows_div_exact(&h, &g).expect("gcd divides")
        };
        (&BiPoly::from_lam_poly(&v) * &BiPoly::from_rows(&h)).normalize()
    }

    /// Even/odd decomposition: the unique `(A, B)` with
    /// `P(λ, z) = A(λ, z²+λ) + z·B(λ, z²+λ)`. In `A` and `B` the `z` slot
    /// holds the image variable `w = z² + λ`.
    pub fn decompose(&self) -> (BiPoly, BiPoly) {
        let mut even = BiPoly::zero();
        let mut odd = BiPoly::zero();
        for (e, c) in &self.terms {
            let target = if e.z % 2 == 0 { &mut even } else { &mut odd };
            target.add_term(Exponent::new(e.lam, e.z / 2), c.clone());
        }
        // u = z² = w - λ
        let shift = &BiPoly::z() - &BiPoly::lam();
        (even.subst_z(&shift), odd.subst_z(&shift))
    }
}

impl FromStr for BiPoly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, PolyError> {
        parse::parse_poly(s)
    }
}

/// Parses the polynomial grammar (`z`, `lam`, `+ - * ^`, parentheses,
/// integer and `a/b` coefficients) into normalized-term form.
pub fn parse_poly(text: &str) -> Result<BiPoly, PolyError> {
    parse::parse_poly(text)
}

/// Writes a sum of terms given in display order.
pub(crate) fn write_terms<'v>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (Rat, Vec<(&'v str, u32)>)>,
) -> fmt::Result {
    let mut first = true;
    for (c, vars) in terms {
        let vars: Vec<_> = vars.into_iter().filter(|(_, e)| *e > 0).collect();
        let neg = c.is_negative();
        let mag = c.abs();
        match (first, neg) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        first = false;
        let mut parts = Vec::new();
        if !mag.is_one() || vars.is_empty() {
            parts.push(mag.to_string());
        }
        for (v, e) in vars {
            parts.push(if e == 1 {
                v.to_string()
            } else {
                format!("{v}^{e}")
            });
        }
        write!(f, "{}", parts.join("*"))?;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Canonical text: terms in decreasing `(deg_z, deg_lambda)` order, e.g.
/// `z^2 - z + lam`.
impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.terms
                .iter()
                .rev()
                .map(|(e, c)| (c.clone(), vec![("z", e.z), ("lam", e.lam)])),
        )
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut acc: BTreeMap<Exponent, Rat> = BTreeMap::new();
        for (ea, a) in &self.terms {
            for (eb, b) in &rhs.terms {
                let e = Exponent::new(ea.lam + eb.lam, ea.z + eb.z);
                *acc.entry(e).or_insert_with(Rat::zero) += a * b;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        BiPoly { terms: acc }
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BiPoly {
            type Output = BiPoly;
            fn $m(self, rhs: BiPoly) -> BiPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        -&self
    }
}
