//! Weak cross-Kerr coupling to a coherent probe and X-quadrature homodyne
//! readout.
//!
//! Every signal branch is tagged with an integer phase index `k`; the probe
//! attached to that branch is the coherent state `|α e^{ikθ/2}⟩`. Keeping the
//! index integral makes branch merging exact.
//!
//! Quadrature convention: `|⟨x|β⟩|²` is a unit-variance Gaussian centred at
//! `2 Re β`, and the conditioned amplitude carries the phase
//! `Im β · (x − 2 Re β)`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{FockError, Result};
use crate::fock::{FockKet, ModeRegister};
use crate::optics::ModeTransform;

/// Outcomes with a homodyne density below this are reported as empty.
pub const MIN_PDF: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTaggedState {
    register: Arc<ModeRegister>,
    groups: BTreeMap<i64, FockKet>,
    alpha: f64,
    theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneOutcome {
    pub x: f64,
    /// Index of the peak cell containing `x`, counting peaks by increasing position.
    pub interval_index: usize,
    /// Normalized signal state after the probe is measured and discarded.
    pub conditional: FockKet,
    pub probability_density: f64,
}

/// Attaches a coherent probe `|α⟩` (phase index 0) to every branch of `ket`.
pub fn attach_probe(ket: &FockKet, alpha: f64, theta: f64) -> Result<ProbeTaggedState> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(FockError::InvalidInput(format!(
            "probe amplitude must be ≥ 0, got {alpha}"
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(FockError::InvalidInput(format!(
            "Kerr phase must be > 0, got {theta}"
        )));
    }
    let mut groups = BTreeMap::new();
    if !ket.is_empty() {
        groups.insert(0, ket.clone());
    }
    Ok(ProbeTaggedState {
        register: ket.register().clone(),
        groups,
        alpha,
        theta,
    })
}

impl ProbeTaggedState {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn register(&self) -> &Arc<ModeRegister> {
        &self.register
    }

    /// Signal component attached to each probe phase index.
    pub fn branches(&self) -> impl Iterator<Item = (i64, &FockKet)> {
        self.groups.iter().map(|(k, v)| (*k, v))
    }

    pub fn branch(&self, index: i64) -> Option<&FockKet> {
        self.groups.get(&index)
    }

    /// Total squared amplitude `W_k` at each phase index.
    pub fn weights(&self) -> Vec<(i64, f64)> {
        self.groups
            .iter()
            .map(|(k, v)| (*k, v.norm_sqr()))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.groups.values().map(FockKet::norm_sqr).sum()
    }

    /// Probe phase of index `k` in radians (`k·θ/2`).
    pub fn phase_of(&self, index: i64) -> f64 {
        index as f64 * self.theta / 2.0
    }

    /// Homodyne peak position `2α cos(kθ/2)` of index `k`.
    pub fn peak_of(&self, index: i64) -> f64 {
        2.0 * self.alpha * self.phase_of(index).cos()
    }

    fn with_groups(&self, groups: BTreeMap<i64, FockKet>) -> Self {
        let groups = groups.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        Self {
            register: self.register.clone(),
            groups,
            alpha: self.alpha,
            theta: self.theta,
        }
    }

    /// Cross-Kerr interaction: a branch with occupation `n` moves by
    /// `Σ_i weights[i]·n_i` phase units (θ/2 each). Amplitudes are unchanged.
    pub fn apply_cross_kerr(&self, weights: &[i64]) -> Result<Self> {
        if weights.len() != self.register.len() {
            return Err(FockError::RegisterMismatch(format!(
                "{} Kerr weights for a {}-mode register",
                weights.len(),
                self.register.len()
            )));
        }
        let mut buckets: BTreeMap<i64, Vec<_>> = BTreeMap::new();
        for (&k, ket) in &self.groups {
            for (occ, amp) in ket.terms() {
                let shift: i64 = occ
                    .as_slice()
                    .iter()
                    .zip(weights)
                    .map(|(&n, &w)| n as i64 * w)
                    .sum();
                buckets
                    .entry(k + shift)
                    .or_default()
                    .push((occ.clone(), *amp));
            }
        }
        let groups = buckets
            .into_iter()
            .map(|(k, terms)| Ok((k, FockKet::from_terms(self.register.clone(), terms)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(self.with_groups(groups))
    }

    /// Linear phase shifter on the probe: every index moves by `shift`.
    pub fn apply_probe_phase(&self, shift: i64) -> Self {
        let groups = self
            .groups
            .iter()
            .map(|(k, v)| (k + shift, v.clone()))
            .collect();
        self.with_groups(groups)
    }

    /// Applies a passive element to the signal; probe indices are untouched.
    pub fn apply_mode_transform(&self, t: &ModeTransform) -> Result<Self> {
        self.map_signal(|k| t.apply(k))
    }

    /// Applies a linear map to the signal of every branch. The map must send
    /// all branches to kets over one common register.
    pub fn map_signal(&self, mut f: impl FnMut(&FockKet) -> Result<FockKet>) -> Result<Self> {
        let mut groups = BTreeMap::new();
        let mut register = None;
        for (&k, v) in &self.groups {
            let out = f(v)?;
            register.get_or_insert_with(|| out.register().clone());
            groups.insert(k, out);
        }
        let mut next = self.with_groups(groups);
        if let Some(r) = register {
            next.register = r;
        }
        Ok(next)
    }

    /// True when the signal kets of distinct phase indices are mutually
    /// orthogonal, i.e. the homodyne density is a plain Gaussian mixture.
    pub fn branches_orthogonal(&self) -> bool {
        let kets: Vec<&FockKet> = self.groups.values().collect();
        for (i, a) in kets.iter().enumerate() {
            for b in &kets[i + 1..] {
                let overlap = a
                    .inner_product(b)
                    .map(|z| z.norm())
                    .unwrap_or(f64::INFINITY);
                if overlap > 1e-12 * (a.norm() * b.norm()).max(f64::MIN_POSITIVE) {
                    return false;
                }
            }
        }
        true
    }

    /// `Σ_k ⟨x|β_k⟩ψ_k` with every Gaussian factor divided by the largest one,
    /// together with the log of that largest factor.
    fn conditioned_scaled(&self, x: f64) -> (FockKet, f64) {
        let exponents: Vec<(i64, f64, f64)> = self
            .groups
            .keys()
            .map(|&k| {
                let (s, c) = self.phase_of(k).sin_cos();
                let (re, im) = (self.alpha * c, self.alpha * s);
                let d = x - 2.0 * re;
                (k, -d * d / 4.0, im * d)
            })
            .collect();
        let emax = exponents
            .iter()
            .map(|e| e.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut acc = FockKet::zero(self.register.clone());
        for (k, e, phase) in exponents {
            let factor = Complex64::from_polar((e - emax).exp(), phase);
            acc = acc
                .add(&self.groups[&k].scale(factor))
                .expect("branches share the register");
        }
        (acc, emax)
    }

    /// Probability density of quadrature outcome `x`.
    pub fn homodyne_pdf(&self, x: f64) -> f64 {
        if self.groups.is_empty() {
            return 0.0;
        }
        let (scaled, emax) = self.conditioned_scaled(x);
        (2.0 * PI).sqrt().recip() * (2.0 * emax).exp() * scaled.norm_sqr()
    }

    /// Signal state conditioned on quadrature outcome `x`, probe discarded.
    pub fn homodyne_condition(&self, x: f64) -> Result<FockKet> {
        if self.homodyne_pdf(x) < MIN_PDF {
            return Err(FockError::EmptyOutcome(format!(
                "homodyne density at x = {x} is below {MIN_PDF:e}"
            )));
        }
        self.conditioned_scaled(x).0.normalize()
    }

    /// Distinct homodyne peak positions of the occupied indices, ascending.
    pub fn peaks(&self) -> Vec<f64> {
        let mut peaks: Vec<f64> = self.groups.keys().map(|&k| self.peak_of(k)).collect();
        peaks.sort_by(f64::total_cmp);
        peaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        peaks
    }

    /// Which peak cell `x` falls into, with cells split at midpoints between
    /// neighbouring peaks.
    pub fn interval_index(&self, x: f64) -> usize {
        self.peaks()
            .windows(2)
            .filter(|w| x > 0.5 * (w[0] + w[1]))
            .count()
    }

    /// Probability that the quadrature lands in `(lo, hi)`. Requires
    /// [`branches_orthogonal`](Self::branches_orthogonal).
    pub fn interval_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        if !self.branches_orthogonal() {
            return Err(FockError::InvalidInput(
                "interval mass needs mutually orthogonal probe branches".into(),
            ));
        }
        Ok(self
            .weights()
            .into_iter()
            .map(|(k, w)| w * gaussian_interval_mass(self.peak_of(k), lo, hi))
            .sum())
    }

    /// Draws a quadrature value from [`homodyne_pdf`](Self::homodyne_pdf) and
    /// conditions the signal on it.
    pub fn sample_homodyne<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<HomodyneOutcome> {
        let weights = self.weights();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if weights.is_empty() || total == 0.0 {
            return Err(FockError::EmptyOutcome(
                "no probe branches to measure".into(),
            ));
        }
        let draw_mixture = |rng: &mut R| -> f64 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = weights[weights.len() - 1].0;
            for &(k, w) in &weights {
                if u < w {
                    chosen = k;
                    break;
                }
                u -= w;
            }
            let z: f64 = rng.sample(StandardNormal);
            self.peak_of(chosen) + z
        };
        let x = if self.branches_orthogonal() {
            draw_mixture(rng)
        } else {
            // Rejection against G × mixture.
            let envelope = weights.len() as f64;
            loop {
                let x = draw_mixture(rng);
                let mixture: f64 = weights
                    .iter()
                    .map(|&(k, w)| w * gaussian_pdf(x - self.peak_of(k)))
                    .sum::<f64>()
                    / total;
                let accept = self.homodyne_pdf(x) / total / (envelope * mixture);
                if rng.random::<f64>() < accept {
                    break x;
                }
            }
        };
        Ok(HomodyneOutcome {
            x,
            interval_index: self.interval_index(x),
            conditional: self.homodyne_condition(x)?,
            probability_density: self.homodyne_pdf(x),
        })
    }

    /// [`sample_homodyne`](Self::sample_homodyne) with a fresh generator from `seed`.
    pub fn sample_homodyne_seeded(&self, seed: u64) -> Result<HomodyneOutcome> {
        self.sample_homodyne(&mut crate::rng_from_seed(seed))
    }
}

fn gaussian_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Mass of a unit-variance Gaussian centred at `mu` inside `(lo, hi)`,
/// evaluated from the nearer tail.
pub fn gaussian_interval_mass(mu: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let upper = |a: f64| 0.5 * erfc(a / SQRT_2);
    if lo >= mu {
        upper(lo - mu) - upper(hi - mu)
    } else if hi <= mu {
        upper(mu - hi) - upper(mu - lo)
    } else {
        1.0 - upper(mu - lo) - upper(hi - mu)
    }
}

/// Misassignment probability between the peaks at `2α` and `2α cos θ` with the
/// decision threshold at their midpoint: `erfc(2α(1−cosθ)/(2√2))/2`.
pub fn discrimination_error(alpha: f64, theta: f64) -> f64 {
    0.5 * erfc(discrimination_argument(alpha, theta))
}

/// Natural log of [`discrimination_error`], accurate where the error itself
/// underflows.
pub fn ln_discrimination_error(alpha: f64, theta: f64) -> f64 {
    0.5f64.ln() + ln_erfc(discrimination_argument(alpha, theta))
}

fn discrimination_argument(alpha: f64, theta: f64) -> f64 {
    // 1 − cos θ = 2 sin²(θ/2)
    let gap = 2.0 * alpha * 2.0 * (theta / 2.0).sin().powi(2);
    gap / (2.0 * SQRT_2)
}

/// `ln erfc(x)`, switching to the Laplace continued fraction once `erfc`
/// nears the bottom of the double range.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        return erfc(x).ln();
    }
    // √π e^{x²} erfc x = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut tail = x;
    for n in (1..=80).rev() {
        tail = x + (n as f64 / 2.0) / tail;
    }
    -x * x - 0.5 * PI.ln() - tail.ln()
}
