//! Analysis toolkit for limit cycles of planar autonomous systems.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. [`reduction`] — cast a two-variable kinetic system into the
//!    generalized Lienard (LLS) form `ξ̈ + F(ξ,ξ̇)ξ̇ + G(ξ) = 0` by a
//!    linear change of variables, and classify the result.
//! 2. [`averaging`] — rescale to a weakly nonlinear oscillator and derive
//!    the first-order Krylov-Bogoliubov amplitude/phase equations with
//!    exact rational coefficients.
//! 3. [`cycles`] — count, locate and classify the limit cycles predicted
//!    by the averaged radial polynomial, including the parity bound on
//!    the maximum cycle count.
//!
//! [`odeverify`] provides an independent numerical oracle (adaptive
//! Runge-Kutta integration plus Poincare-section cycle detection) used to
//! cross-check the averaged predictions, and [`modelzoo`] bundles the
//! standard benchmark oscillators with their known cycle structure.
//!
//! All symbolic computation is carried out over arbitrary-precision
//! rationals; floating point enters only in root finding and numerical
//! integration.
//!
//! ```
//! use cyclekit::averaging::{kb_average, rescale};
//! use cyclekit::cycles::{classify_cycles, radial_roots, OriginNature, ORIGIN_RHO_TOL};
//! use cyclekit::poly::{rat, rat_int, CoeffKind};
//! use cyclekit::reduction::LLSSystem;
//! use std::collections::BTreeMap;
//!
//! // xi_ddot = (1/10) xi_dot - (1/10) xi^2 xi_dot - xi
//! let table: BTreeMap<(u32, u32), _> = [
//!     ((0, 1), rat(1, 10)),
//!     ((2, 1), rat(-1, 10)),
//!     ((1, 0), rat_int(-1)),
//! ]
//! .into_iter()
//! .collect();
//! let lls = LLSSystem::from_a_table(table, CoeffKind::Exact, None)?;
//! let avg = kb_average(&rescale(&lls)?);
//! let roots = radial_roots(&avg, ORIGIN_RHO_TOL)?;
//! let report = classify_cycles(&avg, &roots);
//! assert_eq!(report.origin, OriginNature::UnstableFocus);
//! assert_eq!(report.cycles.len(), 1);
//! assert_eq!(report.cycles[0].radius, 2.0); // exact rational root rho = 4
//! # Ok::<(), cyclekit::Error>(())
//! ```

pub mod averaging;
pub mod cycles;
pub mod error;
pub mod modelzoo;
pub mod odeverify;
pub mod poly;
pub mod reduction;
pub mod report;

pub use error::Error;
pub use poly::{BiPoly, CoeffKind, Rat, UniPoly};
