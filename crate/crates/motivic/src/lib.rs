//! Computer algebra for height zeta functions of compactified vector groups
//! over global function fields.
//!
//! The crate stacks up in layers:
//!
//! * [`motive`] — a computable model of the Grothendieck ring of varieties
//!   with the Lefschetz class `L` inverted, carrying a weight filtration
//!   bound and counting specializations.
//! * [`mvseries`] — multivariate power series over that ring, truncated to a
//!   finite degree bound along a positive linear form.
//! * [`curvezeta`] — zeta functions of smooth projective curves, plethystic
//!   exponentiation of classes, and Euler products over the places of a
//!   curve.
//! * [`convergence`] — weight-linear convergence certificates: machine-checked
//!   sufficient conditions for geometric convergence of normalized
//!   coefficients.
//! * [`heightzeta`] — the trivial-character height zeta pipeline: local
//!   factors from stratum data, global assembly, predicted limits of moduli
//!   classes, and convergence reports.
//!
//! Heavy loops run on rayon when the default `parallel` feature is enabled;
//! [`exec::set_parallel`] switches to the sequential fallback at runtime.

pub mod convergence;
pub mod curvezeta;
pub mod exec;
pub mod heightzeta;
pub mod motive;
pub mod mvseries;
