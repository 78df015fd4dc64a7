//! Twin-beam symmetry detector and the closed-form cascade analysis.
//!
//! The detector mixes the two spatial beams of a six-photon state on a
//! balanced splitter, imprints a Kerr phase of θ per photon in path `a` and
//! θ/2 per photon in path `b`, shifts the probe by −9θ/2 and reads it out by
//! homodyne detection. States with three photons per path return the probe to
//! phase 0 ("symmetric"); the other components of the twin-beam family end up
//! at ±θ.
//!
//! Repeating the symmetric outcome maps the family coefficients as
//! `(m, n) → (m + 3n, 3m + n)` up to normalization, so a cascade converges to
//! the `m = n` state.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{FockError, Result};
use crate::fock::{FockKet, ModeRegister, Occupation};
use crate::kerr::{attach_probe, ProbeTaggedState};
use crate::optics::{bs_5050, phase_shift};

/// Kerr weights in θ/2 units for the register `(aH, aV, bH, bV)`.
pub const DETECTOR_KERR_WEIGHTS: [i64; 4] = [2, 2, 1, 1];
/// Probe phase shifter, −9θ/2.
pub const DETECTOR_PROBE_SHIFT: i64 = -9;
/// Largest cascade depth handled in exact 64-bit arithmetic.
pub const MAX_CASCADE_DEPTH: u32 = 30;

pub fn twin_beam_register() -> Arc<ModeRegister> {
    Arc::new(ModeRegister::from_spatial(&["a", "b"]).expect("static labels"))
}

fn occ(v: [u8; 4]) -> Occupation {
    Occupation::new(v.to_vec())
}

/// Coefficients `(m, n)` of
/// `m(|3,0;0,3⟩ − |0,3;3,0⟩) + n(|1,2;2,1⟩ − |2,1;1,2⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPair {
    pub m: f64,
    pub n: f64,
}

impl CoefficientPair {
    pub fn new(m: f64, n: f64) -> Self {
        Self { m, n }
    }

    /// Rescales so that `m² + n² = 1/2`.
    pub fn normalized(m: f64, n: f64) -> Result<Self> {
        let s = m * m + n * n;
        if s == 0.0 || !s.is_finite() {
            return Err(FockError::InvalidInput("coefficient pair is zero".into()));
        }
        let f = (0.5 / s).sqrt();
        Ok(Self::new(m * f, n * f))
    }

    pub fn is_normalized(&self) -> bool {
        (self.m * self.m + self.n * self.n - 0.5).abs() <= 1e-12
    }

    /// The normalized six-photon ket on `(aH, aV, bH, bV)`.
    pub fn twin_beam_state(&self) -> Result<FockKet> {
        if !self.is_normalized() {
            return Err(FockError::InvalidInput(format!(
                "m² + n² = {} (expected 1/2)",
                self.m * self.m + self.n * self.n
            )));
        }
        let (m, n) = (Complex64::new(self.m, 0.0), Complex64::new(self.n, 0.0));
        FockKet::from_terms(
            twin_beam_register(),
            [
                (occ([3, 0, 0, 3]), m),
                (occ([0, 3, 3, 0]), -m),
                (occ([1, 2, 2, 1]), n),
                (occ([2, 1, 1, 2]), -n),
            ],
        )
    }

    /// Reads `(m, n)` off a ket, assuming it lies in the twin-beam family.
    pub fn from_state(ket: &FockKet) -> Self {
        Self::new(
            ket.amplitude(&occ([3, 0, 0, 3])).re,
            ket.amplitude(&occ([1, 2, 2, 1])).re,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeSelector {
    /// Draw the quadrature from a generator seeded with this value and decide
    /// by the threshold `α(1 + cos θ)`.
    Sampled(u64),
    /// Take the given branch exactly (ideal threshold).
    Forced(Branch),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutcome {
    pub branch: Branch,
    pub state: FockKet,
    /// Probability of `branch`: exact branch weight when forced, the
    /// threshold-side mass when sampled.
    pub probability: f64,
    pub measured_x: Option<f64>,
    /// The `φ(x)` fed to the phase correction (0 when forced or symmetric).
    pub correction_phase: f64,
}

/// Multiplies every term by `e^{iφ/2}` per photon on `spatial`.
pub fn apply_phase_correction(state: &FockKet, phi: f64, spatial: &str) -> Result<FockKet> {
    phase_shift(state.register(), spatial, phi / 2.0)?.apply(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryDetector {
    pub alpha: f64,
    pub theta: f64,
}

impl SymmetryDetector {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(theta > 0.0 && theta.is_finite()) {
            return Err(FockError::InvalidInput(format!(
                "detector needs α > 0 and θ > 0, got α = {alpha}, θ = {theta}"
            )));
        }
        Ok(Self { alpha, theta })
    }

    /// Decision threshold `α(1 + cos θ)` between the symmetric peak at `2α`
    /// and the asymmetric peaks at `2α cos θ`.
    pub fn threshold(&self) -> f64 {
        self.alpha * (1.0 + self.theta.cos())
    }

    /// `φ(x) = α sin θ (x − 2α cos θ)`, reduced mod 2π.
    pub fn conditioned_phase(&self, x: f64) -> f64 {
        let (s, c) = self.theta.sin_cos();
        (self.alpha * s * (x - 2.0 * self.alpha * c)).rem_euclid(std::f64::consts::TAU)
    }

    /// The probe-tagged state just before the homodyne measurement.
    pub fn entangle(&self, input: &FockKet) -> Result<ProbeTaggedState> {
        let register = twin_beam_register();
        if **input.register() != *register {
            return Err(FockError::RegisterMismatch(format!(
                "detector expects register [{register}], got [{}]",
                input.register()
            )));
        }
        if input.photon_number() != Some(6) {
            return Err(FockError::InvalidInput(
                "symmetry detector accepts six-photon states only".into(),
            ));
        }
        let mixed = bs_5050(&register, "a", "b")?.apply(input)?;
        Ok(attach_probe(&mixed, self.alpha, self.theta)?
            .apply_cross_kerr(&DETECTOR_KERR_WEIGHTS)?
            .apply_probe_phase(DETECTOR_PROBE_SHIFT))
    }

    pub fn detect(&self, input: &FockKet, selector: OutcomeSelector) -> Result<DetectorOutcome> {
        match selector {
            OutcomeSelector::Forced(branch) => self.detect_forced(input, branch),
            OutcomeSelector::Sampled(seed) => {
                self.detect_sampled(input, &mut crate::rng_from_seed(seed))
            }
        }
    }

    fn detect_forced(&self, input: &FockKet, branch: Branch) -> Result<DetectorOutcome> {
        let tagged = self.entangle(input)?;
        let total = tagged.norm_sqr();
        let mut selected = FockKet::zero(tagged.register().clone());
        for (k, ket) in tagged.branches() {
            if (k == 0) == (branch == Branch::Symmetric) {
                selected = selected.add(ket)?;
            }
        }
        let probability = selected.norm_sqr() / total;
        if probability == 0.0 {
            return Err(FockError::EmptyOutcome(format!(
                "{branch:?} branch has zero weight"
            )));
        }
        Ok(DetectorOutcome {
            branch,
            state: selected.normalize()?,
            probability,
            measured_x: None,
            correction_phase: 0.0,
        })
    }

    /// Sampled readout using an external generator.
    pub fn detect_sampled<R: Rng + ?Sized>(
        &self,
        input: &FockKet,
        rng: &mut R,
    ) -> Result<DetectorOutcome> {
        let tagged = self.entangle(input)?;
        let outcome = tagged.sample_homodyne(rng)?;
        let x0 = self.threshold();
        let (branch, probability) = if outcome.x > x0 {
            (Branch::Symmetric, tagged.interval_mass(x0, f64::INFINITY)?)
        } else {
            (
                Branch::Asymmetric,
                tagged.interval_mass(f64::NEG_INFINITY, x0)?,
            )
        };
        let (state, correction_phase) = match branch {
            Branch::Symmetric => (outcome.conditional, 0.0),
            Branch::Asymmetric => {
                let phi = self.conditioned_phase(outcome.x);
                (apply_phase_correction(&outcome.conditional, phi, "b")?, phi)
            }
        };
        Ok(DetectorOutcome {
            branch,
            state,
            probability,
            measured_x: Some(outcome.x),
            correction_phase,
        })
    }
}

/// State left by the symmetric outcome: the family member with
/// coefficients `(m + 3n, 3m + n)/√(10 + 24mn)`.
pub fn symmetric_outcome_state(pair: CoefficientPair) -> Result<FockKet> {
    let s = (10.0 + 24.0 * pair.m * pair.n).sqrt();
    CoefficientPair::new((pair.m + 3.0 * pair.n) / s, (3.0 * pair.m + pair.n) / s).twin_beam_state()
}

/// The phase-corrected asymmetric outcome
/// `(|3,2;0,1⟩ − |0,1;3,2⟩ + |1,0;2,3⟩ − |2,3;1,0⟩)/2`.
pub fn collected_asymmetric_state() -> FockKet {
    let h = Complex64::new(0.5, 0.0);
    FockKet::from_terms(
        twin_beam_register(),
        [
            (occ([3, 2, 0, 1]), h),
            (occ([0, 1, 3, 2]), -h),
            (occ([1, 0, 2, 3]), h),
            (occ([2, 3, 1, 0]), -h),
        ],
    )
    .expect("static terms")
}

/// `A^k` for `A = [[1,3],[3,1]]`, exactly:
/// diagonal `(4^k + (−2)^k)/2`, off-diagonal `(4^k − (−2)^k)/2`.
pub fn a_matrix_power(k: u32) -> Result<[[i64; 2]; 2]> {
    if k > MAX_CASCADE_DEPTH {
        return Err(FockError::Capacity(format!(
            "A^{k} overflows 64-bit integers (k ≤ {MAX_CASCADE_DEPTH})"
        )));
    }
    let four = 4i64.pow(k);
    let minus_two = (-2i64).pow(k);
    let diag = (four + minus_two) / 2;
    let off = (four - minus_two) / 2;
    Ok([[diag, off], [off, diag]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeClosedForm {
    pub k: u32,
    /// Unnormalized `m_k`.
    pub m: f64,
    /// Unnormalized `n_k`.
    pub n: f64,
    /// `m_k / n_k`; signed infinity when `n_k = 0`.
    pub ratio: f64,
    /// Normalization `C_k`, with `(m_k, n_k)/√C_k` back in the family.
    pub c: f64,
}

impl CascadeClosedForm {
    pub fn normalized_pair(&self) -> CoefficientPair {
        let s = self.c.sqrt();
        CoefficientPair::new(self.m / s, self.n / s)
    }

    /// Fidelity with the `m = n` state, `(m_k + n_k)²/C_k`.
    pub fn fidelity_with_fixed_point(&self) -> f64 {
        (self.m + self.n).powi(2) / self.c
    }
}

pub fn cascade_closed_form(pair0: CoefficientPair, k: u32) -> Result<CascadeClosedForm> {
    if !pair0.is_normalized() {
        return Err(FockError::InvalidInput(
            "initial pair must satisfy m² + n² = 1/2".into(),
        ));
    }
    let a = a_matrix_power(k)?;
    let (m0, n0) = (pair0.m, pair0.n);
    let m = a[0][0] as f64 * m0 + a[0][1] as f64 * n0;
    let n = a[1][0] as f64 * m0 + a[1][1] as f64 * n0;
    let kk = k as i32;
    let c = 2f64.powi(2 * kk - 1) * (4f64.powi(kk) + 1.0)
        + 2f64.powi(2 * kk + 1) * (4f64.powi(kk) - 1.0) * m0 * n0;
    let decay = (-2f64).powi(-kk);
    let num = m0 + n0 + decay * (m0 - n0);
    let den = m0 + n0 - decay * (m0 - n0);
    let ratio = if den == 0.0 || n == 0.0 {
        if m >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        num / den
    };
    Ok(CascadeClosedForm { k, m, n, ratio, c })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRun {
    pub state: FockKet,
    /// Symmetric-outcome probability of each detector pass.
    pub step_probabilities: Vec<f64>,
    /// State after each pass (index 0 is after the first detector).
    pub states: Vec<FockKet>,
}

impl CascadeRun {
    pub fn cumulative_probability(&self) -> f64 {
        self.step_probabilities.iter().product()
    }
}

/// Passes the twin-beam state through `k` detectors, keeping the symmetric
/// outcome each time.
pub fn cascade_simulate(
    pair0: CoefficientPair,
    k: u32,
    alpha: f64,
    theta: f64,
) -> Result<CascadeRun> {
    if k > MAX_CASCADE_DEPTH {
        return Err(FockError::Capacity(format!(
            "cascade depth {k} exceeds {MAX_CASCADE_DEPTH}"
        )));
    }
    let detector = SymmetryDetector::new(alpha, theta)?;
    let mut state = pair0.twin_beam_state()?;
    let mut step_probabilities = Vec::with_capacity(k as usize);
    let mut states = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let out = detector.detect(&state, OutcomeSelector::Forced(Branch::Symmetric))?;
        step_probabilities.push(out.probability);
        state = out.state;
        states.push(state.clone());
    }
    Ok(CascadeRun {
        state,
        step_probabilities,
        states,
    })
}

/// Symmetric-outcome probability `(5 + 12mn)/8` for a normalized pair.
pub fn symmetric_probability(pair: CoefficientPair) -> f64 {
    (5.0 + 12.0 * pair.m * pair.n) / 8.0
}
