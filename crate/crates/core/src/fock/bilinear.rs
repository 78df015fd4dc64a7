use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::ket::{accumulate, FockKet, TermMap, MAX_PER_MODE};
use super::register::{ModeRegister, Polarization};
use crate::error::{FockError, Result};

/// Highest power accepted by [`BilinearForm::power`].
pub const DEFAULT_MAX_ORDER: u32 = 8;

/// Quadratic creation-operator polynomial `Σ c_ij a†_i a†_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BilinearForm {
    coefficients: BTreeMap<(usize, usize), Complex64>,
}

impl BilinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c·a†_i a†_j`, stored under `(min, max)`.
    pub fn with_term(mut self, i: usize, j: usize, c: Complex64) -> Self {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.coefficients.entry(key).or_default() += c;
        self
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&(usize, usize), &Complex64)> {
        self.coefficients.iter()
    }

    /// The pair-emission operator `a†_H b†_V − a†_V b†_H` between spatial
    /// paths `a` and `b`.
    pub fn singlet(register: &ModeRegister, a: &str, b: &str) -> Result<Self> {
        let ah = register.require(a, Polarization::H)?;
        let av = register.require(a, Polarization::V)?;
        let bh = register.require(b, Polarization::H)?;
        let bv = register.require(b, Polarization::V)?;
        Ok(Self::new()
            .with_term(ah, bv, Complex64::new(1.0, 0.0))
            .with_term(av, bh, Complex64::new(-1.0, 0.0)))
    }

    fn check(&self, register: &ModeRegister) -> Result<()> {
        match self
            .coefficients
            .keys()
            .find(|(i, j)| *i >= register.len() || *j >= register.len())
        {
            Some((i, j)) => Err(FockError::InvalidInput(format!(
                "form term ({i},{j}) outside a {}-mode register",
                register.len()
            ))),
            None => Ok(()),
        }
    }

    /// Applies the form once to `ket`.
    pub fn apply(&self, ket: &FockKet) -> Result<FockKet> {
        self.check(ket.register())?;
        let mut out = TermMap::new();
        for (occ, amp) in ket.term_map() {
            for (&(i, j), &c) in &self.coefficients {
                let mut next = occ.clone();
                let counts = next.counts_mut();
                let ni = counts[i] as u32;
                counts[i] += 1;
                let nj = counts[j] as u32;
                counts[j] += 1;
                if counts[i] > MAX_PER_MODE || counts[j] > MAX_PER_MODE {
                    return Err(FockError::Capacity(format!(
                        "bilinear term ({i},{j}) exceeds {MAX_PER_MODE} photons per mode"
                    )));
                }
                let factor = ((ni + 1) as f64).sqrt() * ((nj + 1) as f64).sqrt();
                accumulate(&mut out, next, amp * c * factor);
            }
        }
        Ok(FockKet::from_map(ket.register().clone(), out))
    }

    /// Unnormalized `(form)ⁿ|0⟩` on `register`, for `n ≤ DEFAULT_MAX_ORDER`.
    pub fn power(&self, n: u32, register: Arc<ModeRegister>) -> Result<FockKet> {
        self.power_with_limit(n, register, DEFAULT_MAX_ORDER)
    }

    pub fn power_with_limit(
        &self,
        n: u32,
        register: Arc<ModeRegister>,
        max_order: u32,
    ) -> Result<FockKet> {
        if n > max_order {
            return Err(FockError::Capacity(format!(
                "bilinear power {n} exceeds the configured maximum {max_order}"
            )));
        }
        self.check(&register)?;
        let mut ket = FockKet::vacuum(register);
        for _ in 0..n {
            ket = self.apply(&ket)?;
        }
        Ok(ket)
    }
}
