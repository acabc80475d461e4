//! Pushforward of plane curves under `f(z, λ) = (z² + λ, λ)`.
//!
//! For `P = A(λ, z²+λ) + z·B(λ, z²+λ)` the image `f({P = 0})` is cut out by
//! `A(λ, z)² − (z − λ)·B(λ, z)²`. Orbits are iterated on the reduced form
//! (squarefree, vertical content stripped, normalized), and a repeated
//! canonical form certifies preperiodicity.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::bipoly::{BiPoly, Degrees, PolyError};
use crate::Rat;

/// Default number of pushforward steps for orbits.
pub const DEFAULT_MAX_STEPS: usize = 24;

/// Default degree budget is this multiple of the starting `deg_sum`.
pub const DEFAULT_BUDGET_FACTOR: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("constant polynomial does not define a curve")]
    Constant,
    #[error("curve is a union of vertical lines")]
    PurelyVertical,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degree budget {budget} exceeded at step {step}")]
    BudgetExceeded { step: usize, budget: u64 },
}

/// Image of a curve under `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushResult {
    /// `A² − (z − λ)·B²`, unreduced.
    pub raw: BiPoly,
    /// Normalized squarefree part of `raw` with vertical content removed.
    pub reduced: BiPoly,
    /// `raw` and `reduced` differ beyond scaling.
    pub multiplicity_collapsed: bool,
}

/// The unreduced image equation `A(λ,z)² − (z − λ)·B(λ,z)²`.
///
/// Satisfies `raw(λ, z²+λ) = P(λ, z)·P(λ, −z)`.
pub fn image_equation(p: &BiPoly) -> BiPoly {
    let (a, b) = p.decompose();
    let shift = &BiPoly::z() - &BiPoly::lam();
    &(&a * &a) - &(&shift * &(&b * &b))
}

pub fn pushforward(p: &BiPoly) -> Result<PushResult, DynamicsError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial.into());
    }
    if p.is_constant() {
        return Err(DynamicsError::Constant);
    }
    let (_, h) = p.strip_vertical()?;
    if h.is_constant() {
        return Err(DynamicsError::PurelyVertical);
    }
    let raw = image_equation(p);
    let (_, raw_h) = raw.strip_vertical()?;
    let reduced = raw_h.squarefree_part()?;
    let multiplicity_collapsed = raw.normalize()? != reduced;
    Ok(PushResult {
        raw,
        reduced,
        multiplicity_collapsed,
    })
}

/// Preimage `P(λ, z² + λ)`.
pub fn pullback(p: &BiPoly) -> BiPoly {
    p.subst_z(&(&BiPoly::z().pow(2) + &BiPoly::lam()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitEntry {
    pub n: usize,
    pub poly: BiPoly,
    pub degrees: Degrees,
}

impl OrbitEntry {
    /// `2^{-n}·deg_sum`.
    pub fn height_estimate(&self) -> Rat {
        Rat::new(BigInt::from(self.degrees.deg_sum), BigInt::one() << self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitOutcome {
    /// `f^{preperiod + period}(Z) = f^{preperiod}(Z)`, certified by exact equality.
    Preperiodic { preperiod: usize, period: usize },
    /// The next image exceeded the degree budget.
    DegreeGrowth { height_estimates: Vec<Rat> },
    /// `max_steps` pushforwards without repetition or budget overflow.
    BudgetExceeded { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveOrbit {
    pub entries: Vec<OrbitEntry>,
    pub outcome: OrbitOutcome,
}

impl CurveOrbit {
    pub fn height_estimates(&self) -> Vec<Rat> {
        self.entries
            .iter()
            .map(OrbitEntry::height_estimate)
            .collect()
    }

    /// CSV with columns `n,deg_lambda,deg_z,deg_sum,height_estimate,poly`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,deg_lambda,deg_z,deg_sum,height_estimate,poly\n");
        for e in &self.entries {
            let h = e.height_estimate();
            let _ = writeln!(
                out,
                "{},{},{},{},{}/{},{}",
                e.n,
                e.degrees.deg_lambda,
                e.degrees.deg_z,
                e.degrees.deg_sum,
                h.numer(),
                h.denom(),
                e.poly
            );
        }
        out
    }
}

/// Default degree budget for a starting curve: `64·deg_sum(P)`.
pub fn default_budget(p: &BiPoly) -> Result<u64, DynamicsError> {
    Ok(DEFAULT_BUDGET_FACTOR * u64::from(p.degrees()?.deg_sum))
}

/// Iterates reduced pushforwards until an exact repetition, a degree above
/// `degree_budget`, or `max_steps` steps.
pub fn orbit(
    p: &BiPoly,
    max_steps: usize,
    degree_budget: u64,
) -> Result<CurveOrbit, DynamicsError> {
    if max_steps == 0 {
        return Err(DynamicsError::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    let start = p.normalize()?;
    let degrees = start.degrees()?;
    if u64::from(degrees.deg_sum) > degree_budget {
        return Err(DynamicsError::InvalidArgument(format!(
            "degree budget {degree_budget} is below deg_sum {}",
            degrees.deg_sum
        )));
    }
    let mut seen: HashMap<BiPoly, usize> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut entries = vec![OrbitEntry {
        n: 0,
        poly: start,
        degrees,
    }];
    for step in 1..=max_steps {
        let next = pushforward(&entries[step - 1].poly)?.reduced;
        let degrees = next.degrees()?;
        if let Some(&first) = seen.get(&next) {
            entries.push(OrbitEntry {
                n: step,
                poly: next,
                degrees,
            });
            return Ok(CurveOrbit {
                entries,
                outcome: OrbitOutcome::Preperiodic {
                    preperiod: first,
                    period: step - first,
                },
            });
        }
        if u64::from(degrees.deg_sum) > degree_budget {
            let height_estimates = entries.iter().map(OrbitEntry::height_estimate).collect();
            return Ok(CurveOrbit {
                entries,
                outcome: OrbitOutcome::DegreeGrowth { height_estimates },
            });
        }
        seen.insert(next.clone(), step);
        entries.push(OrbitEntry {
            n: step,
            poly: next,
            degrees,
        });
    }
    Ok(CurveOrbit {
        entries,
        outcome: OrbitOutcome::BudgetExceeded {
            reason: format!("no repetition within {max_steps} steps"),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Rigorous: exact equality of canonical forms.
    Preperiodic { preperiod: usize, period: usize },
    /// Heuristic: height estimates settled at a positive value.
    NotPreperiodic {
        height_estimates: Vec<Rat>,
        cauchy_diff: Rat,
    },
    Inconclusive {
        height_estimates: Vec<Rat>,
        reason: String,
    },
}

/// Preperiodicity test by bounded degree growth.
///
/// `NotPreperiodic` requires the last height estimate to be at least `1/4`
/// with last consecutive difference at most a quarter of it.
pub fn detect_preperiodic(
    p: &BiPoly,
    max_steps: usize,
    degree_budget: u64,
) -> Result<Verdict, DynamicsError> {
    let orb = orbit(p, max_steps, degree_budget)?;
    let est = orb.height_estimates();
    let reason = match orb.outcome {
        OrbitOutcome::Preperiodic { preperiod, period } => {
            return Ok(Verdict::Preperiodic { preperiod, period })
        }
        OrbitOutcome::DegreeGrowth { .. } => format!("degree budget {degree_budget} reached"),
        OrbitOutcome::BudgetExceeded { reason } => reason,
    };
    if let [.., prev, last] = est.as_slice() {
        let diff = (last - prev).abs();
        let quarter = Rat::new(1.into(), 4.into());
        if *last >= quarter && diff <= last * &quarter {
            return Ok(Verdict::NotPreperiodic {
                cauchy_diff: diff,
                height_estimates: est,
            });
        }
    }
    Ok(Verdict::Inconclusive {
        height_estimates: est,
        reason,
    })
}

/// `(2^{-m}·deg_sum(f^m(Z)))` for `m = 0..=n`, continuing through a detected
/// cycle without recomputation.
pub fn height_estimate_curve(p: &BiPoly, n: usize) -> Result<Vec<Rat>, DynamicsError> {
    let start_deg = u64::from(p.degrees()?.deg_sum);
    // deg_sum at most doubles per step, so this budget is never hit.
    let budget = start_deg.saturating_mul(1u64.checked_shl(n as u32).unwrap_or(u64::MAX));
    let orb = orbit(p, n.max(1), budget)?;
    let mut sums: Vec<u32> = orb.entries.iter().map(|e| e.degrees.deg_sum).collect();
    match orb.outcome {
        OrbitOutcome::Preperiodic { preperiod, period } => {
            while sums.len() <= n {
                let m = sums.len();
                sums.push(sums[preperiod + (m - preperiod) % period]);
            }
        }
        OrbitOutcome::DegreeGrowth { .. } => {
            return Err(DynamicsError::BudgetExceeded {
                step: sums.len(),
                budget,
            })
        }
        OrbitOutcome::BudgetExceeded { .. } => {}
    }
    Ok(sums
        .into_iter()
        .take(n + 1)
        .enumerate()
        .map(|(m, d)| Rat::new(BigInt::from(d), BigInt::one() << m))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> BiPoly {
        s.parse().unwrap()
    }

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn pushforward_examples() {
        for c in [-3i64, 0, 2, 7] {
            let line = BiPoly::z() - BiPoly::constant(r(c, 1));
            let expected = p(&format!("z - lam - {}", c * c));
            assert_eq!(pushforward(&line).unwrap().reduced, expected);
        }
        let fixed = p("z^2 + lam - z");
        let res = pushforward(&fixed).unwrap();
        assert_eq!(res.reduced, fixed);
        assert!(!res.multiplicity_collapsed);

        let sym = pushforward(&p("z^2 - lam")).unwrap();
        assert_eq!(sym.raw, p("(z - 2lam)^2"));
        assert_eq!(sym.reduced, p("z - 2lam"));
        assert!(sym.multiplicity_collapsed);

        let dyn2 = p("z^2 + z + lam + 1");
        let res = pushforward(&dyn2).unwrap();
        assert_eq!(res.raw, dyn2);
        assert_eq!(res.reduced, dyn2);
    }

    #[test]
    fn pushforward_rejects_degenerate_input() {
        assert_eq!(
            pushforward(&BiPoly::zero()),
            Err(DynamicsError::Poly(PolyError::ZeroPolynomial))
        );
        assert_eq!(pushforward(&p("5")), Err(DynamicsError::Constant));
        assert_eq!(
            pushforward(&p("lam^2 - 1")),
            Err(DynamicsError::PurelyVertical)
        );
    }

    #[test]
    fn pushforward_drops_vertical_components() {
        let res = pushforward(&p("(lam - 1) (z - 2)")).unwrap();
        assert_eq!(res.reduced, p("z - lam - 4"));
    }

    #[test]
    fn pullback_examples() {
        assert_eq!(pullback(&p("z - 2lam")), p("z^2 - lam"));
        assert_eq!(pullback(&p("lam - 5")), p("lam - 5"));
        assert_eq!(pullback(&p("z")), p("z^2 + lam"));
    }

    #[test]
    fn orbit_of_fixed_curves() {
        for s in ["z^2 + lam - z", "z^2 + z + lam + 1"] {
            let o = orbit(&p(s), 10, 100).unwrap();
            assert_eq!(
                o.outcome,
                OrbitOutcome::Preperiodic {
                    preperiod: 0,
                    period: 1
                }
            );
            assert_eq!(o.entries.len(), 2);
            assert_eq!(o.entries[0].poly, o.entries[1].poly);
        }
    }

    #[test]
    fn orbit_of_critical_section() {
        let o = orbit(&p("z"), 10, 40).unwrap();
        let sums: Vec<u32> = o.entries.iter().map(|e| e.degrees.deg_sum).collect();
        assert_eq!(sums, [1, 2, 3, 5, 9, 17, 33]);
        let OrbitOutcome::DegreeGrowth { height_estimates } = &o.outcome else {
            panic!("expected degree growth, got {:?}", o.outcome);
        };
        assert_eq!(height_estimates[6], r(33, 64));
        assert_eq!(o.entries[2].poly, p("z - lam^2 - lam"));
    }

    #[test]
    fn orbit_budget_and_arguments() {
        let o = orbit(&p("z"), 3, 1000).unwrap();
        assert!(matches!(o.outcome, OrbitOutcome::BudgetExceeded { .. }));
        assert_eq!(o.entries.len(), 4);
        assert!(orbit(&p("z"), 0, 10).is_err());
        assert!(orbit(&p("z^3 + lam"), 5, 2).is_err());
    }

    #[test]
    fn orbit_detects_preperiod() {
        // the full preimage of the fixed curve lands on it after one step
        let fixed = p("z^2 + lam - z");
        let pre = pullback(&fixed);
        let o = orbit(&pre, 10, 200).unwrap();
        assert_eq!(
            o.outcome,
            OrbitOutcome::Preperiodic {
                preperiod: 1,
                period: 1
            }
        );
        assert_eq!(o.entries[1].poly, fixed);
    }

    #[test]
    fn orbit_csv_format() {
        let o = orbit(&p("z"), 2, 100).unwrap();
        assert_eq!(
            o.to_csv(),
            "n,deg_lambda,deg_z,deg_sum,height_estimate,poly\n\
             0,0,1,1,1/1,z\n\
             1,1,1,2,1/1,z - lam\n\
             2,2,1,3,3/4,z - lam^2 - lam\n"
        );
    }

    #[test]
    fn detect_examples() {
        let d = |s: &str| {
            let q = p(s);
            detect_preperiodic(&q, DEFAULT_MAX_STEPS, default_budget(&q).unwrap()).unwrap()
        };
        assert_eq!(
            d("z^2 + lam - z"),
            Verdict::Preperiodic {
                preperiod: 0,
                period: 1
            }
        );
        assert_eq!(
            d("(z^2 + lam - z)(z^2 + z + lam + 1)"),
            Verdict::Preperiodic {
                preperiod: 0,
                period: 1
            }
        );
        let Verdict::NotPreperiodic {
            height_estimates,
            cauchy_diff,
        } = d("z - 1")
        else {
            panic!("expected a heuristic non-preperiodic verdict");
        };
        assert_eq!(height_estimates.last().unwrap(), &r(33, 64));
        assert_eq!(cauchy_diff, r(1, 64));
        assert!(matches!(
            detect_preperiodic(&p("z"), 2, 100).unwrap(),
            Verdict::Inconclusive { .. }
        ));
    }

    #[test]
    fn curve_height_examples() {
        let rs = |v: &[(i64, i64)]| v.iter().map(|&(a, b)| r(a, b)).collect::<Vec<_>>();
        assert_eq!(
            height_estimate_curve(&p("z"), 6).unwrap(),
            rs(&[(1, 1), (1, 1), (3, 4), (5, 8), (9, 16), (17, 32), (33, 64)])
        );
        assert_eq!(
            height_estimate_curve(&p("z^2 + lam - z"), 4).unwrap(),
            rs(&[(3, 1), (3, 2), (3, 4), (3, 8), (3, 16)])
        );
        // z = λ is the graph of the section λ, whose height is 1
        assert_eq!(
            height_estimate_curve(&p("z - lam"), 4).unwrap(),
            rs(&[(2, 1), (3, 2), (5, 4), (9, 8), (17, 16)])
        );
    }

    prop_compose! {
        fn arb_curve(max_deg: u32)
            (terms in prop::collection::vec((0..=max_deg, 0..=max_deg, -9i64..=9), 1..8))
            -> BiPoly
        {
            BiPoly::from_terms(
                terms
                    .into_iter()
                    .filter(|(l, z, _)| l + z <= max_deg)
                    .map(|(l, z, c)| (l, z, Rat::from_integer(c.into()))),
            )
        }
    }

    fn admissible(q: &BiPoly) -> bool {
        !q.is_constant() && !q.strip_vertical().unwrap().1.is_constant()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn composition_identity(q in arb_curve(6)) {
            prop_assume!(admissible(&q));
            let res = pushforward(&q).unwrap();
            prop_assert_eq!(pullback(&res.raw), &q * &q.reflect_z());
        }

        #[test]
        fn degree_at_most_doubles(q in arb_curve(6)) {
            prop_assume!(admissible(&q));
            let res = pushforward(&q).unwrap();
            let before = q.degrees().unwrap().deg_sum;
            prop_assert!(res.reduced.degrees().unwrap().deg_sum <= 2 * before);
        }

        #[test]
        fn even_curves_collapse(q in arb_curve(6)) {
            let even = &q + &q.reflect_z();
            prop_assume!(admissible(&even));
            let (_, b) = even.decompose();
            prop_assert!(b.is_zero());
            let res = pushforward(&even).unwrap();
            let (a, _) = even.decompose();
            prop_assert_eq!(res.raw, &a * &a);
        }

        #[test]
        fn orbit_is_independent_of_extra_steps(q in arb_curve(3), extra in 1usize..4) {
            prop_assume!(admissible(&q));
            let budget = 16 * u64::from(q.degrees().unwrap().deg_sum);
            let short = orbit(&q, 4, budget).unwrap();
            if !matches!(short.outcome, OrbitOutcome::BudgetExceeded { .. }) {
                let long = orbit(&q, 4 + extra, budget).unwrap();
                prop_assert_eq!(short, long);
            }
        }
    }
}
