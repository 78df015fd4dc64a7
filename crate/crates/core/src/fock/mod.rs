//! Sparse multimode Fock-space states.

mod bilinear;
mod format;
mod ket;
mod register;

pub use bilinear::{BilinearForm, DEFAULT_MAX_ORDER};
pub use ket::{
    sqrt_factorial, FockKet, Occupation, OccupationPattern, PatternConstraint, MAX_PER_MODE,
    NORM_TOLERANCE, PRUNE_THRESHOLD,
};
pub use register::{Mode, ModeRegister, Polarization};

pub(crate) use ket::{accumulate, apply_linear_creation, TermMap};
