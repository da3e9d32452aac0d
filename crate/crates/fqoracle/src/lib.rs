//! Finite-field ground truth for the symbolic pipeline.
//!
//! Everything in this crate recomputes quantities from first principles over
//! small prime fields: closed points of the projective line by sieving,
//! truncated Euler products by literal multiplication over places, section
//! counts by exhaustive enumeration, and Poisson summation by summing both
//! sides in an exact cyclotomic field. Nothing here shares code with the
//! symbolic route, so agreement between the two is evidence, not tautology.

pub mod cyclo;
pub mod euler;
pub mod gf;
pub mod laurent;
pub mod points;
pub mod sb;
pub mod sections;

pub use cyclo::Cyclo;
pub use euler::{euler_coeff_bruteforce, OracleError, PlacePosition};
pub use gf::{Poly, Prime};
pub use points::{closed_points, necklace_count, ClosedPoint};
pub use sb::{poisson_check, HarnessPlace, PoissonProblem, PoissonReport, SBFunction};
pub use sections::{count_sections, SectionError, SectionModel};
