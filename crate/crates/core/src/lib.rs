//! Exact and numeric machinery for negative-index meromorphic Jacobi forms.
//!
//! - [`series`]: truncated q/ζ Puiseux–Laurent series over ℚ(i)
//! - [`special`]: θ, η, Appell–Lerch sums, partial theta, rank/crank and friends
//! - [`jets`]: Laurent jets in `x = 2πi(z-u)` and the principal-part data `D_{n,u}`
//! - [`decomposition`]: exact verification of the decomposition identities
//! - [`numerics`]: complex evaluation, Fourier quadrature and radial-limit probes
//! - [`suites`]: named verification suites used by the CLI and the acceptance tests

pub mod decomposition;
pub mod error;
pub mod gaussian;
pub mod jets;
pub mod numerics;
pub mod quotient;
pub mod rational;
pub mod report;
pub mod series;
pub mod special;
pub mod suites;

pub use error::{Error, Result};
pub use gaussian::{GaussianRational, ValuePair, GQ};
pub use jets::{Jet, LaurentData};
pub use quotient::{JacobiQuotient, KacWakimotoSpec, PoleInventory};
pub use rational::Q;
pub use report::{Discrepancy, Status, VerificationReport};
pub use series::{DVar, QZSeries, SeriesPrecision};
pub use special::appell::AppellJet;
