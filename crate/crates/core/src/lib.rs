//! Numerical toolkit for quantum stochastic convolution cocycles and
//! quantum Lévy processes on finite-dimensional C*-bialgebras.
//!
//! Every algebra handled here is finite-dimensional, hence unital, and every
//! linear map on it is automatically bounded, strict and normal. The
//! multiplier algebra, the strict extension and the enveloping von Neumann
//! algebra all coincide with the algebra itself, so no separate types exist
//! for them.
//!
//! Module map:
//!
//! * [`bialgebra`]: structure-constant descriptors, validation, the
//!   function-algebra and group-algebra families, positivity and states.
//! * [`convolution`]: the convolution product on functionals and kernel maps,
//!   the R- and E-maps and convolution exponentials.
//! * [`schurmann`]: generating functionals, the GNS triple, structure maps
//!   and implementing pairs, generator classification.
//! * [`cocycle`]: exact matrix elements of the cocycle between exponential
//!   vectors of step functions.
//! * [`walk`]: repeated-interaction unitaries, walk maps and convergence
//!   to the cocycle.
//! * [`levy`]: discrete Fock-space Lévy processes and the axiom suite.
//! * [`cli`]: experiment configs, runner and report emission.

pub mod bialgebra;
pub mod cli;
pub mod cocycle;
pub mod convolution;
mod error;
pub mod json;
pub mod kernel;
pub mod levy;
pub mod linalg;
pub mod schurmann;
pub mod walk;

pub use bialgebra::{BialgebraDescriptor, Element, Functional, ValidationReport};
pub use error::{Error, Result};
pub use kernel::KernelMap;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Default tolerance for axiom residuals.
pub const DEFAULT_TOL: f64 = 1e-9;
