//! Gcd machinery on the dense "rows" view: a polynomial in `z` whose
//! coefficients are polynomials in `lam` (index = `z` exponent).

use num_traits::Zero;

use crate::unipoly::UniPoly;
use crate::Rat;

type Rows = Vec<UniPoly>;

fn trim(mut r: Rows) -> Rows {
    while r.last().is_some_and(UniPoly::is_zero) {
        r.pop();
    }
    r
}

fn deg(r: &[UniPoly]) -> Option<usize> {
    r.len().checked_sub(1)
}

/// Monic gcd over ℚ[lam] of all coefficients; zero for the zero polynomial.
pub(super) fn content(rows: &[UniPoly]) -> UniPoly {
    if rows.iter().any(|r| !r.is_zero()) && modp::content_is_trivial(rows) {
        return UniPoly::one();
    }
    let mut g = UniPoly::zero();
    for r in rows {
        if g.is_constant() && !g.is_zero() {
            break;
        }
        g = UniPoly::gcd(&g, r);
    }
    g
}

pub(super) fn rows_div_scalar(rows: &[UniPoly], c: &UniPoly) -> Option<Rows> {
    rows.iter().map(|r| r.div_exact(c)).collect()
}

fn rows_mul_scalar(rows: &[UniPoly], c: &UniPoly) -> Rows {
    trim(rows.iter().map(|r| r * c).collect())
}

fn primitive_part(rows: &[UniPoly]) -> Rows {
    let c = content(rows);
    rows_div_scalar(rows, &c).expect("content divides every row")
}

pub(super) fn rows_derivative(rows: &[UniPoly]) -> Rows {
    trim(
        rows.iter()
            .enumerate()
            .skip(1)
            .map(|(j, r)| r.scale(&Rat::from_integer(j.into())))
            .collect(),
    )
}

/// Exact division in ℚ[lam][z]. Leading-coefficient divisions in ℚ[lam]
/// must be exact at every step, otherwise `b` cannot divide `a`.
pub(super) fn rows_div_exact(a: &[UniPoly], b: &[UniPoly]) -> Option<Rows> {
    let db = deg(b)?;
    let lb = &b[db];
    let mut rem: Rows = a.to_vec();
    let Some(da) = deg(&rem) else {
        return Some(Vec::new());
    };
    if da < db {
        return None;
    }
    let mut quot = vec![UniPoly::zero(); da - db + 1];
    for k in (0..=da - db).rev() {
        let top = &rem[k + db];
        if top.is_zero() {
            continue;
        }
        let c = top.div_exact(lb)?;
        for (i, bi) in b.iter().enumerate() {
            rem[k + i] = &rem[k + i] - &(&c * bi);
        }
        quot[k] = c;
    }
    rem.iter().all(UniPoly::is_zero).then(|| trim(quot))
}

/// Pseudo-remainder `lc(b)^(deg a − deg b + 1)·a mod b`.
fn prem(a: &[UniPoly], b: &[UniPoly]) -> Rows {
    let db = deg(b).expect("nonzero divisor");
    let lb = b[db].clone();
    let mut r: Rows = a.to_vec();
    let mut e = (deg(a).unwrap_or(0) + 1).saturating_sub(db) as u32;
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let t = r[dr].clone();
        let shift = dr - db;
        let mut next = rows_mul_scalar(&r, &lb);
        next.resize(next.len().max(dr + 1), UniPoly::zero());
        for (i, bi) in b.iter().enumerate() {
            next[shift + i] = &next[shift + i] - &(&t * bi);
        }
        r = trim(next);
        e = e.saturating_sub(1);
    }
    rows_mul_scalar(&r, &lb.pow(e))
}

/// Gcd of two nonzero polynomials with trivial ℚ[lam]-content, by the
/// subresultant PRS in `z`. Returns the primitive part of the last nonzero
/// subresultant.
pub(super) fn primitive_gcd(a: &[UniPoly], b: &[UniPoly]) -> Rows {
    let (mut a, mut b) = if deg(a) >= deg(b) {
        (primitive_part(a), primitive_part(b))
    } else {
        (primitive_part(b), primitive_part(a))
    };
    let one = vec![UniPoly::one()];
    if deg(&b) == Some(0) {
        return one;
    }
    let mut g = UniPoly::one();
    let mut h = UniPoly::one();
    loop {
        let delta = (deg(&a).unwrap() - deg(&b).unwrap()) as u32;
        let r = prem(&a, &b);
        match deg(&r) {
            None => break,
            Some(0) => return one,
            Some(_) => {}
        }
        let divisor = &g * &h.pow(delta);
        a = b;
        b = rows_div_scalar(&r, &divisor).expect("subresultant division is exact");
        g = a.last().unwrap().clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => g
                .pow(d)
                .div_exact(&h.pow(d - 1))
                .expect("subresultant h update is exact"),
        };
    }
    primitive_part(&b)
}

/// Gcd in ℚ[lam, z] up to a rational unit.
pub(super) fn rows_gcd(a: &[UniPoly], b: &[UniPoly]) -> Rows {
    let ca = content(a);
    let cb = content(b);
    let c = UniPoly::gcd(&ca, &cb);
    let pa = rows_div_scalar(a, &ca).expect("content divides");
    let pb = rows_div_scalar(b, &cb).expect("content divides");
    let g = if deg(&pa) == Some(0) || deg(&pb) == Some(0) {
        vec![UniPoly::one()]
    } else {
        primitive_gcd(&pa, &pb)
    };
    rows_mul_scalar(&g, &c)
}

/// Sufficient test that a content-free polynomial has no repeated factor.
///
/// At a rational `λ₀` where the leading `z` coefficient does not vanish every
/// factor keeps its `z` degree, so a repeated factor would survive
/// specialization. A squarefree specialization therefore proves the
/// polynomial squarefree. A `false` answer is inconclusive.
pub(super) fn is_squarefree_primitive(rows: &[UniPoly]) -> bool {
    let Some(d) = deg(rows) else {
        return true;
    };
    if d == 0 {
        return true;
    }
    if modp::is_squarefree(rows) {
        return true;
    }
    let lead = &rows[d];
    for k in 0..8i64 {
        let lam0 = Rat::from_integer(((k + 1) / 2 * if k % 2 == 0 { 1 } else { -1 }).into());
        if lead.eval_exact(&lam0).is_zero() {
            continue;
        }
        let u = UniPoly::from_coeffs(rows.iter().map(|r| r.eval_exact(&lam0)).collect());
        return UniPoly::gcd(&u, &u.derivative()).degree() == Some(0);
    }
    false
}

/// Word-size modular images used as certificates for the exact paths.
mod modp {
    use num_bigint::BigInt;
    use num_traits::{ToPrimitive, Zero};

    use crate::unipoly::UniPoly;
    use crate::Rat;

    const PRIMES: [u64; 2] = [2_147_483_647, 1_000_000_007];

    fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    }

    fn inv(a: u64, p: u64) -> u64 {
        pow_mod(a, p - 2, p)
    }

    fn int_mod(n: &BigInt, p: u64) -> u64 {
        let r = n % BigInt::from(p);
        let r = if r < BigInt::zero() {
            r + BigInt::from(p)
        } else {
            r
        };
        r.to_u64().expect("residue fits in u64")
    }

    fn rat_mod(c: &Rat, p: u64) -> Option<u64> {
        let d = int_mod(c.denom(), p);
        (d != 0).then(|| int_mod(c.numer(), p) * inv(d, p) % p)
    }

    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn reduce(u: &UniPoly, p: u64) -> Option<Vec<u64>> {
        u.coeffs()
            .iter()
            .map(|c| rat_mod(c, p))
            .collect::<Option<Vec<_>>>()
            .map(trim)
    }

    /// Gcd over F_p (not normalized); empty when both inputs are zero.
    fn gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
        while !b.is_empty() {
            let db = b.len() - 1;
            let inv_lead = inv(b[db], p);
            while a.len() > db {
                let da = a.len() - 1;
                let c = a[da] * inv_lead % p;
                let shift = da - db;
                for (i, bi) in b.iter().enumerate() {
                    a[shift + i] = (a[shift + i] + p - c * bi % p) % p;
                }
                a = trim(a);
            }
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    /// Certifies that the nonzero rows have trivial gcd over ℚ[lam]: the
    /// gcd over F_p has degree 0 and reduction keeps the degree of a row
    /// the rational gcd divides.
    pub(super) fn content_is_trivial(rows: &[UniPoly]) -> bool {
        let nonzero: Vec<&UniPoly> = rows.iter().filter(|r| !r.is_zero()).collect();
        if nonzero.iter().any(|r| r.is_constant()) {
            return true;
        }
        'prime: for p in PRIMES {
            let mut g: Option<Vec<u64>> = None;
            let mut anchored = false;
            for r in &nonzero {
                let Some(rp) = reduce(r, p) else {
                    continue 'prime;
                };
                anchored |= rp.len() == r.coeffs().len();
                g = Some(match g {
                    None => rp,
                    Some(g) => gcd(g, rp, p),
                });
                if anchored && g.as_ref().is_some_and(|g| g.len() == 1) {
                    return true;
                }
            }
        }
        false
    }

    /// Certifies squarefreeness of a content-free polynomial in `z` via a
    /// squarefree specialization at `lam = λ₀ ∈ F_p` that keeps the degree.
    pub(super) fn is_squarefree(rows: &[UniPoly]) -> bool {
        let d = rows.len() - 1;
        'prime: for p in PRIMES {
            let Some(reduced) = rows
                .iter()
                .map(|r| reduce(r, p))
                .collect::<Option<Vec<_>>>()
            else {
                continue 'prime;
            };
            for lam0 in 1..6u64 {
                let eval = |c: &Vec<u64>| c.iter().rev().fold(0u64, |acc, &x| (acc * lam0 + x) % p);
                let f: Vec<u64> = reduced.iter().map(eval).collect();
                if f[d] == 0 {
                    continue;
                }
                let df: Vec<u64> = trim(
                    f.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(j, c)| (j as u64 % p) * c % p)
                        .collect(),
                );
                if gcd(f, df, p).len() == 1 {
                    return true;
                }
            }
        }
        false
    }
}
