//! Numerical shadow toolkit: the probability measure induced on the
//! numerical range W(M) of a complex matrix by uniformly random unit
//! vectors, computed by Monte Carlo sampling, exact moment calculus, and
//! closed-form densities where they exist.

pub mod cartesian;
pub mod dd;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod moments;
pub mod radial;
pub mod range;
pub mod sampler;
pub mod util;
pub mod xi;
pub mod zernike;

pub use error::{Result, ShadowError};
pub use matrix::{ComplexMatrix, HermitianMatrix, Spectrum, WordLetter};
pub use xi::BivariatePoly;
