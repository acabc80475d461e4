//! Exact and certified computations for the quadratic family
//! `f(z, λ) = (z² + λ, λ)`.
//!
//! The algebraic modules ([`bipoly`], [`dynamics`], [`height`]) work over
//! exact rationals. The numeric modules ([`green`], [`periodic`], [`roots`])
//! are generic over a [`Real`] scalar, with `f64` aliases below.

pub mod bipoly;
pub mod dynamics;
pub mod green;
pub mod height;
pub mod periodic;
pub mod roots;
pub mod scalar;
pub mod unipoly;

pub use bipoly::{BiPoly, Degrees, Exponent, PolyError};
pub use dynamics::{CurveOrbit, OrbitOutcome, PushResult, Verdict};
pub use green::{CertifiedValue, InKVerdict, Region, RenderKind, ScanVerdict};
pub use height::{HeightReport, HeightStatus, RatSection};
pub use periodic::{PeriodicPoint, Stability};
pub use scalar::Real;
pub use unipoly::UniPoly;

/// Arbitrary-precision rational.
pub type Rat = num_rational::BigRational;

pub type C64 = num_complex::Complex64;
pub type CertifiedValue64 = CertifiedValue<f64>;
pub type InKVerdict64 = InKVerdict<f64>;
pub type ScanVerdict64 = ScanVerdict<f64>;
pub type Region64 = Region<f64>;
pub type RenderKind64 = RenderKind<f64>;
pub type PeriodicPoint64 = PeriodicPoint<f64>;
