//! Numerical analysis of composition operators `C_phi f = f ∘ phi` on the
//! harmonic alpha-Bloch spaces of the unit disk.
//!
//! * [`disk`]: automorphisms, pseudohyperbolic distance, probe lattices.
//! * [`function`]: analytic maps as expression trees and harmonic pairs.
//! * [`norms`]: Bloch seminorms, little-Bloch profiles, growth bounds.
//! * [`operator`]: the weight `tau`, its boundary behaviour, classification.
//! * [`closed_range`]: level sets, nets, annulus tests, sampling estimates.
//! * [`document`]: the JSON map-description format read by the CLI.

mod cmath;
pub mod closed_range;
pub mod disk;
pub mod document;
pub mod error;
pub mod function;
pub mod norms;
pub mod operator;
pub mod sup;

pub use disk::DiskPoint;
pub use error::{Error, Result};
pub use function::{AnalyticMap, HarmonicMap};
pub use norms::Alpha;
pub use operator::{ClassificationReport, Criterion, TauParams, Verdict};
pub use sup::{Budget, DecayProfile, DecayVerdict, SupEstimate, SupStatus};

pub use num_complex::Complex64;
