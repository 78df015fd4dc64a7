//! Exact sparse simulation of few-photon linear-optical circuits.
//!
//! States live in a multimode occupation-number basis ([`FockKet`]) over an
//! ordered [`ModeRegister`] of (spatial, polarization) modes. Passive optics
//! act as creation-operator substitutions ([`ModeTransform`]); weak cross-Kerr
//! couplings to a coherent probe are tracked exactly as integer phase indices
//! ([`ProbeTaggedState`]) and read out by X-quadrature homodyne detection.
//!
//! On top of these primitives sit the twin-beam symmetry detector and its
//! cascade analysis ([`symmetry`]), down-conversion source models ([`pdc`]),
//! and the six-photon polarization-entanglement pipelines ([`schemes`]).

pub mod error;
pub mod fock;
pub mod kerr;
pub mod optics;
pub mod pdc;
pub mod schemes;
pub mod symmetry;

pub use error::{FockError, Result};
pub use fock::{
    BilinearForm, FockKet, Mode, ModeRegister, Occupation, OccupationPattern, PatternConstraint,
    Polarization,
};
pub use kerr::{HomodyneOutcome, ProbeTaggedState};
pub use optics::ModeTransform;

pub use num_complex::Complex64;

/// Counter-based generator used for every sampled draw.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
