//! Spectral machinery for a quantum particle in a box with moving walls.
//!
//! The library covers five layers, each usable on its own:
//!
//! - [`spectrum`]: exact Dirichlet eigenvalues λ(m,n) = π²(m²/a² + n²/b²) of a
//!   rectangle, energy-ordered indexes, resonant side lengths, and eigenvalue
//!   crossings along wall motions.
//! - [`permutation`]: the rank permutation σ induced by one compression/expansion
//!   pump cycle between two boxes, its periodic orbits, and the mean entropy
//!   production δE(K) together with its closed-form limit.
//! - [`evolution`]: Galerkin propagation of the wall-motion Schrödinger equation
//!   mapped to the unit square (implicit midpoint, exactly norm-preserving),
//!   symmetry-breaking potentials, and the pumping / splitting protocols built
//!   on avoided crossings.
//! - [`control`]: the one-dimensional bilinear-control chain: integrate the
//!   auxiliary profile U, synthesize a wall trajectory f(t) from it, propagate
//!   the decoupled 1-D factors, and align phases by free waiting.
//! - [`sah2`]: boundary functionals ∫ ∂νφ_k ∂νφ_l ⟨g|ν⟩ dσ for a catalogue of
//!   wall deformations at a double eigenvalue, with closed forms and a rank test.
//!
//! Everything is deterministic: random ingredients (the symmetry breaker) are
//! seeded, and all quadratures and solvers run at fixed, documented tolerances.

pub mod control;
pub mod error;
pub mod evolution;
pub mod ode;
pub mod path;
pub mod permutation;
pub mod quad;
pub mod sah2;
pub mod spectrum;

pub use error::{BoxError, Result};
pub use path::{AxisLaw, DeformationPath};
pub use spectrum::{Mode, Rect, SpectrumIndex};

/// Complex scalar used throughout the propagation code.
pub type C64 = num_complex::Complex64;
