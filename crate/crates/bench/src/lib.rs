//! Shared fixtures for the criterion benches.

use reslab::characters::{build_group, CharacterGroup};
use reslab::resonators::{Resonator, ResonatorSpec};

/// Prime modulus used by the character benches.
pub const Q_PRIME: u64 = 9973;
/// Composite modulus with several cyclic components.
pub const Q_COMPOSITE: u64 = 2310 * 4;

pub fn group(q: u64) -> CharacterGroup {
    build_group(q).expect("bench modulus in range")
}

/// The WINDOW_PSIGMA resonator of the saddle checks (M = 20, σ = 3/4).
pub fn window_resonator() -> Resonator {
    Resonator::build(&ResonatorSpec::window_psigma(20.0, 0.75, 0.0).unwrap()).unwrap()
}

/// Squarefree SQRT_WINDOW resonator at λ = 30.
pub fn sqrt_resonator() -> Resonator {
    Resonator::build(&ResonatorSpec::sqrt_window(30.0).unwrap().squarefree(true)).unwrap()
}
