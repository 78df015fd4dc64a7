//! Parametric down-conversion emission models.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::fock::{BilinearForm, FockKet, ModeRegister};
use crate::symmetry::twin_beam_register;

/// Highest emission order for which [`psi_n`] is provided.
pub const MAX_EMISSION_ORDER: u32 = 5;

/// Truncated two-mode squeezed expansion `Σ_n w_n |ψₙ⁻⟩` with
/// `w_n = √(n+1)·tanhⁿτ / cosh²τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedExpansion {
    /// Interaction parameter `τ = κt/ℏ`.
    pub tau: f64,
    pub n_max: u32,
    pub weights: Vec<f64>,
}

impl SqueezedExpansion {
    /// `Σ_{n ≤ n_max} w_n²`, the probability captured by the truncation.
    pub fn captured_probability(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// Mean emission order `2 sinh²τ` of the untruncated source.
    pub fn mean_order(&self) -> f64 {
        2.0 * self.tau.sinh().powi(2)
    }

    /// `Σ n·w_n²` over the truncated expansion.
    pub fn truncated_mean_order(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| n as f64 * w * w)
            .sum()
    }

    /// Mean photon count `2·⟨order⟩` (each order emits a pair per unit).
    pub fn mean_photon_count(&self) -> f64 {
        2.0 * self.mean_order()
    }

    /// Upper bound `(n_max+2)·x^{n_max+1}/((1−x)² cosh⁴τ)` on the probability
    /// left out by the truncation, with `x = tanh²τ`.
    pub fn truncation_bound(&self) -> f64 {
        let x = self.tau.tanh().powi(2);
        let n = self.n_max as f64;
        (n + 2.0) * x.powf(n + 1.0) / (1.0 - x).powi(2) / self.tau.cosh().powi(4)
    }
}

pub fn squeezed_weights(tau: f64, n_max: u32) -> Result<SqueezedExpansion> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(FockError::InvalidInput(format!("τ must be ≥ 0, got {tau}")));
    }
    let t = tau.tanh();
    let c2 = tau.cosh().powi(2);
    let weights = (0..=n_max)
        .map(|n| ((n + 1) as f64).sqrt() * t.powi(n as i32) / c2)
        .collect();
    Ok(SqueezedExpansion {
        tau,
        n_max,
        weights,
    })
}

/// Normalized `|ψₙ⁻⟩ ∝ (a†_H b†_V − a†_V b†_H)ⁿ|0⟩` on paths `a`, `b` of `register`.
pub fn psi_n_on(register: Arc<ModeRegister>, a: &str, b: &str, n: u32) -> Result<FockKet> {
    if n > MAX_EMISSION_ORDER {
        return Err(FockError::Capacity(format!(
            "emission order {n} exceeds {MAX_EMISSION_ORDER}"
        )));
    }
    BilinearForm::singlet(&register, a, b)?
        .power(n, register)?
        .normalize()
}

/// `|ψₙ⁻⟩` on the register `(aH, aV, bH, bV)`.
pub fn psi_n(n: u32) -> Result<FockKet> {
    psi_n_on(twin_beam_register(), "a", "b", n)
}

/// Six-photon content of a pulse spanning `k` independent down-conversion
/// windows: a single third-order emission, a second- plus a first-order
/// emission, and three first-order emissions.
///
/// The squared coefficients `6/D`, `6(k−1)/D` and `(k−1)(k−2)/D` with
/// `D = (k+1)(k+2)` sum to one identically. For `1 < k < 2` the three-pair
/// coefficient is negative, so its amplitude is imaginary and no physical
/// state exists; the weights are still reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixPhotonMixtureWeights {
    pub k: f64,
    /// Squared coefficients (third order, second × first, first³).
    pub squared: [f64; 3],
}

pub fn six_photon_mixture(k: f64) -> Result<SixPhotonMixtureWeights> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(FockError::InvalidInput(format!(
            "window ratio k must be ≥ 1, got {k}"
        )));
    }
    let d = (k + 1.0) * (k + 2.0);
    Ok(SixPhotonMixtureWeights {
        k,
        squared: [6.0 / d, 6.0 * (k - 1.0) / d, (k - 1.0) * (k - 2.0) / d],
    })
}

impl SixPhotonMixtureWeights {
    /// Principal square roots of the squared coefficients.
    pub fn amplitudes(&self) -> [Complex64; 3] {
        self.squared.map(|s| Complex64::new(s, 0.0).sqrt())
    }

    /// `Σ amplitude²` (not `|amplitude|²`), identically 1.
    pub fn squared_sum(&self) -> f64 {
        self.squared.iter().sum()
    }

    pub fn is_physical(&self) -> bool {
        self.squared.iter().all(|&s| s >= 0.0)
    }

    /// Real amplitudes, when every squared coefficient is non-negative.
    pub fn real_amplitudes(&self) -> Option<[f64; 3]> {
        self.is_physical().then(|| self.squared.map(f64::sqrt))
    }

    /// Register of three independent emission windows `(a1, b1, a2, b2, a3, b3)`.
    pub fn register() -> Arc<ModeRegister> {
        Arc::new(
            ModeRegister::from_spatial(&["a1", "b1", "a2", "b2", "a3", "b3"])
                .expect("static labels"),
        )
    }

    /// `a₃|ψ₃⁻⟩|0⟩|0⟩ + a₂₁|ψ₂⁻⟩|ψ₁⁻⟩|0⟩ + a₁₁₁|ψ₁⁻⟩|ψ₁⁻⟩|ψ₁⁻⟩` over
    /// [`register`](Self::register).
    pub fn state(&self) -> Result<FockKet> {
        let [a3, a21, a111] = self.real_amplitudes().ok_or_else(|| {
            FockError::InvalidInput(format!(
                "k = {} gives a negative three-pair weight; no physical state",
                self.k
            ))
        })?;
        let window = |i: usize| -> Result<Arc<ModeRegister>> {
            Ok(Arc::new(ModeRegister::from_spatial(&[
                format!("a{i}"),
                format!("b{i}"),
            ])?))
        };
        let psi = |i: usize, n: u32| -> Result<FockKet> {
            psi_n_on(window(i)?, &format!("a{i}"), &format!("b{i}"), n)
        };
        let term = |orders: [u32; 3]| -> Result<FockKet> {
            psi(1, orders[0])?
                .tensor(&psi(2, orders[1])?)?
                .tensor(&psi(3, orders[2])?)
        };
        let total = term([3, 0, 0])?
            .scale(Complex64::new(a3, 0.0))
            .add(&term([2, 1, 0])?.scale(Complex64::new(a21, 0.0)))?
            .add(&term([1, 1, 1])?.scale(Complex64::new(a111, 0.0)))?;
        total.restrict_to(Self::register())
    }
}
