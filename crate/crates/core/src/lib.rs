//! Walsh–Fourier analysis on dyadic rationals and exact certificates that the
//! fractal uncertainty principle fails for the Walsh transform.
//!
//! * [`dyadic`]: carryless arithmetic, the Walsh character and Walsh functions.
//! * [`transform`]: fast Walsh–Hadamard transform, the exact Walsh–Fourier
//!   transform on dyadic cells, and a unitary DFT.
//! * [`fractal`]: digit-alphabet Cantor sets, their measures and regularity.
//! * [`certificate`]: the counterexample space of functions supported on
//!   `X_n` whose Walsh spectrum is supported on `Y_n`.
//! * [`fup`]: restricted operator norms, parameter sweeps, decay fits.
//! * [`verify`]: the invariant suite behind `walsh-fup verify`.

pub mod certificate;
pub mod dyadic;
pub mod fractal;
pub mod fup;
pub mod transform;
pub mod verify;

pub use dyadic::{DyadicRational, Sign};

pub use fractal::{CellSet, FractalParams, Side};
