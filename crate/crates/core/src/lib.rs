//! Numerical laboratory for resonance-method lower bounds on character sums.

pub mod bounds;
pub mod characters;
pub mod error;
pub mod numeric;
pub mod parallel;
pub mod primes;
pub mod report;
pub mod resonators;
pub mod saddle;
pub mod smooth;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
