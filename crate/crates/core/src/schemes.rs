//! Six-photon polarization-entanglement pipelines.
//!
//! [`build_psi_theta`] prepares the six-path state `|Ψ(θ)⟩` from a
//! third-order down-conversion emission, and [`GhzCircuit`] converts
//! `|Ψ(π/2)⟩` into `|GHZ₆⟩` with cross-Kerr probing, homodyne readout and
//! interval-dependent corrections.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, LazyLock};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{FockError, Result};
use crate::fock::{FockKet, ModeRegister, Occupation, OccupationPattern, Polarization};
use crate::kerr::{attach_probe, ProbeTaggedState};
use crate::optics::{apply_all, bs_unbalanced, mode_phase_shift, pbs, polarization_rotation};
use crate::pdc::psi_n_on;

/// Output paths in register order.
pub const SIX_PATHS: [&str; 6] = ["c1", "c2", "c3", "d1", "d2", "d3"];

/// Kerr phases (units of θ/2) picked up by the H arm of each path in
/// [`SIX_PATHS`] order.
pub const GHZ_KERR_WEIGHTS: [i64; 6] = [2, 4, 6, 6, 12, 18];

/// Probe phase shifter, in units of θ/2.
pub const GHZ_PROBE_SHIFT: i64 = -24;

/// Largest Kerr phase for which the ten decode intervals stay ordered.
pub const MAX_GHZ_THETA: f64 = PI / 12.0;

static SIX_PATH_REGISTER: LazyLock<Arc<ModeRegister>> =
    LazyLock::new(|| Arc::new(ModeRegister::from_spatial(&SIX_PATHS).expect("static labels")));

/// The 12-mode register `(c1H, c1V, …, d3H, d3V)`.
pub fn six_path_register() -> Arc<ModeRegister> {
    SIX_PATH_REGISTER.clone()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    /// Post-selected, normalized state over [`six_path_register`].
    pub state: FockKet,
    pub postselect_probability: f64,
    pub theta: f64,
}

/// Runs the preparation circuit: `|ψ₃⁻⟩` on paths `a`, `b`, polarization
/// rotation by `theta` on `b`, a 2/3 : 1/3 splitter on each of `a`, `b`, a
/// 50:50 splitter on each transmitted arm, then post-selection of one photon
/// in each of the six output paths.
pub fn build_psi_theta(theta: f64) -> Result<SchemeResult> {
    if !theta.is_finite() {
        return Err(FockError::InvalidInput(format!(
            "θ must be finite, got {theta}"
        )));
    }
    let full = Arc::new(ModeRegister::from_spatial(&[
        "c1", "c2", "c3", "d1", "d2", "d3", "a", "b", "c0", "d0",
    ])?);
    let source = psi_n_on(full.clone(), "a", "b", 3)?;
    let elements = [
        polarization_rotation(&full, "b", theta)?,
        bs_unbalanced(&full, "a", "c1", "c0", 2.0 / 3.0)?,
        bs_unbalanced(&full, "b", "d1", "d0", 2.0 / 3.0)?,
        bs_unbalanced(&full, "c0", "c3", "c2", 0.5)?,
        bs_unbalanced(&full, "d0", "d3", "d2", 0.5)?,
    ];
    let evolved = apply_all(&source, &elements)?;
    let (selected, postselect_probability) =
        evolved.project(&OccupationPattern::one_per_spatial(&SIX_PATHS))?;
    Ok(SchemeResult {
        state: selected.restrict_to(six_path_register())?,
        postselect_probability,
        theta,
    })
}

/// One photon per path with polarizations given by `pattern`, a string of six
/// `H`/`V` letters in [`SIX_PATHS`] order.
pub fn polarization_ket(pattern: &str) -> Result<FockKet> {
    FockKet::basis(six_path_register(), pattern_occupation(pattern)?)
}

fn pattern_occupation(pattern: &str) -> Result<Occupation> {
    let letters: Vec<char> = pattern.chars().collect();
    if letters.len() != 6 {
        return Err(FockError::InvalidInput(format!(
            "polarization pattern `{pattern}` must have six letters"
        )));
    }
    let mut counts = vec![0u8; 12];
    for (i, c) in letters.iter().enumerate() {
        match c {
            'H' => counts[2 * i] = 1,
            'V' => counts[2 * i + 1] = 1,
            _ => {
                return Err(FockError::InvalidInput(format!(
                    "polarization pattern `{pattern}` has letter `{c}`"
                )))
            }
        }
    }
    Ok(Occupation::new(counts))
}

fn superpose(terms: &[(&str, f64)]) -> Result<FockKet> {
    let terms = terms
        .iter()
        .map(|&(p, c)| Ok((pattern_occupation(p)?, Complex64::new(c, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    FockKet::from_terms(six_path_register(), terms)?.normalize()
}

/// `(|HHHHHH⟩ + |VVVVVV⟩)/√2`.
pub fn ghz6() -> FockKet {
    superpose(&[("HHHHHH", 1.0), ("VVVVVV", 1.0)]).expect("static pattern")
}

/// `|W₃⟩|W₃⟩` over the c and d triples.
pub fn w_pair() -> FockKet {
    let w = ["HHV", "HVH", "VHH"];
    let terms: Vec<(String, f64)> = w
        .iter()
        .flat_map(|c| w.iter().map(move |d| (format!("{c}{d}"), 1.0)))
        .collect();
    let refs: Vec<(&str, f64)> = terms.iter().map(|(p, c)| (p.as_str(), *c)).collect();
    superpose(&refs).expect("static pattern")
}

/// Spin-flipped [`w_pair`], `|W̃₃⟩|W̃₃⟩`.
pub fn w_tilde_pair() -> FockKet {
    spin_flip(&w_pair(), &SIX_PATHS).expect("six-path register")
}

/// `|⟨GHZ₆|ψ⟩|²`.
pub fn ghz_weight(state: &FockKet) -> Result<f64> {
    Ok(ghz6().inner_product(state)?.norm_sqr())
}

/// `|⟨W₃W₃|ψ⟩|²` and `|⟨W̃₃W̃₃|ψ⟩|²`.
pub fn w_pair_weights(state: &FockKet) -> Result<(f64, f64)> {
    Ok((
        w_pair().inner_product(state)?.norm_sqr(),
        w_tilde_pair().inner_product(state)?.norm_sqr(),
    ))
}

/// `|ψ⟩` with its polarization fixed on the c triple and the d triple
/// separately, summed over the listed path orderings. Each ordering names
/// which path receives the first, second and third letter.
fn path_sum(
    c: &str,
    d: &str,
    c_orders: &[[usize; 3]],
    d_orders: &[[usize; 3]],
) -> Vec<(String, f64)> {
    let place = |letters: &str, order: &[usize; 3]| -> String {
        let l: Vec<char> = letters.chars().collect();
        let mut out = ['?'; 3];
        for (slot, &path) in order.iter().enumerate() {
            out[path] = l[slot];
        }
        out.iter().collect()
    };
    let mut terms = Vec::new();
    for co in c_orders {
        for dord in d_orders {
            terms.push((format!("{}{}", place(c, co), place(d, dord)), 1.0));
        }
    }
    terms
}

/// `|Ψ(θ)⟩` assembled directly from its closed-form coefficient families and
/// path-ordering sums, normalized.
pub fn psi_theta_reference(theta: f64) -> Result<FockKet> {
    const ID: [[usize; 3]; 1] = [[0, 1, 2]];
    // |p1p2p3⟩ on (c1c2c3), (c1c3c2), (c2c3c1).
    const SUM: [[usize; 3]; 3] = [[0, 1, 2], [0, 2, 1], [1, 2, 0]];
    let (s, c) = theta.sin_cos();
    // (c letters, d letters, sign, sum over c orderings, sum over d orderings)
    type Member = (&'static str, &'static str, f64, bool, bool);
    let families: [(f64, Vec<Member>); 6] = [
        (
            c.powi(3),
            vec![
                ("HHH", "VVV", 1.0, false, false),
                ("VVV", "HHH", -1.0, false, false),
            ],
        ),
        (
            s.powi(3),
            vec![
                ("HHH", "HHH", 1.0, false, false),
                ("VVV", "VVV", 1.0, false, false),
            ],
        ),
        (
            c * (2.0 * s * s - c * c) / 3.0,
            vec![
                ("HHV", "VVH", 1.0, true, true),
                ("VVH", "HHV", -1.0, true, true),
            ],
        ),
        (
            s * (s * s - 2.0 * c * c) / 3.0,
            vec![
                ("HHV", "HHV", 1.0, true, true),
                ("VVH", "VVH", 1.0, true, true),
            ],
        ),
        (
            c * c * s,
            vec![
                ("HHV", "VVV", 1.0, true, false),
                ("VVH", "HHH", 1.0, true, false),
                ("HHH", "VVH", 1.0, false, true),
                ("VVV", "HHV", 1.0, false, true),
            ],
        ),
        (
            c * s * s,
            vec![
                ("HHH", "HHV", 1.0, false, true),
                ("VVV", "VVH", -1.0, false, true),
                ("HHV", "HHH", -1.0, true, false),
                ("VVH", "VVV", 1.0, true, false),
            ],
        ),
    ];
    let mut terms = Vec::new();
    for (coef, members) in &families {
        for &(cp, dp, sign, c_sum, d_sum) in members {
            let co: &[[usize; 3]] = if c_sum { &SUM } else { &ID };
            let dord: &[[usize; 3]] = if d_sum { &SUM } else { &ID };
            for (p, w) in path_sum(cp, dp, co, dord) {
                terms.push((
                    pattern_occupation(&p)?,
                    Complex64::new(0.5 * coef * sign * w, 0.0),
                ));
            }
        }
    }
    FockKet::from_terms(six_path_register(), terms)?.normalize()
}

/// Swaps the H and V occupations of every named spatial path.
pub fn spin_flip<S: AsRef<str>>(state: &FockKet, spatial: &[S]) -> Result<FockKet> {
    let register = state.register();
    let pairs = spatial
        .iter()
        .map(|s| {
            let s = s.as_ref();
            Ok((
                register.require(s, Polarization::H)?,
                register.require(s, Polarization::V)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let terms = state.terms().map(|(occ, amp)| {
        let mut counts = occ.as_slice().to_vec();
        for &(h, v) in &pairs {
            counts.swap(h, v);
        }
        (Occupation::new(counts), *amp)
    });
    FockKet::from_terms(register.clone(), terms.collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeInterval {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    /// Branch `k`: the probe phases `±kθ` decoded by this interval.
    pub k: u32,
    /// 1-based positions in [`SIX_PATHS`] whose polarization is flipped.
    pub flips: Vec<usize>,
}

impl DecodeInterval {
    pub fn flip_labels(&self) -> Vec<&'static str> {
        self.flips.iter().map(|&p| SIX_PATHS[p - 1]).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }
}

/// The ten homodyne intervals of the GHZ circuit, ordered by increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzDecodeTable {
    pub alpha: f64,
    pub theta: f64,
    pub intervals: Vec<DecodeInterval>,
}

/// Flip sets taking the `+kθ` branch ket to `|HHHHHH⟩`.
fn flips_for(k: u32) -> Vec<usize> {
    match k {
        12 => vec![],
        0 => vec![3, 6],
        1 => vec![2, 6],
        2 => vec![1, 6],
        3 => vec![3, 5],
        4 => vec![2, 5],
        5 => vec![1, 5],
        6 => vec![3, 4],
        7 => vec![2, 4],
        8 => vec![1, 4],
        _ => unreachable!("no branch with k = {k}"),
    }
}

pub fn decode_table(alpha: f64, theta: f64) -> Result<GhzDecodeTable> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FockError::InvalidInput(format!(
            "α must be > 0, got {alpha}"
        )));
    }
    if !(theta > 0.0 && theta <= MAX_GHZ_THETA) {
        return Err(FockError::InvalidInput(format!(
            "θ = {theta} breaks the threshold ordering; need 0 < θ ≤ π/12"
        )));
    }
    let bound = |i: u32| alpha * (((9 - i) as f64 * theta).cos() + ((8 - i) as f64 * theta).cos());
    let mut edges = vec![
        f64::NEG_INFINITY,
        alpha * ((12.0 * theta).cos() + (8.0 * theta).cos()),
    ];
    edges.extend((1..=8).map(bound));
    edges.push(f64::INFINITY);
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FockError::InvalidInput(format!(
            "θ = {theta} gives non-monotone thresholds"
        )));
    }
    let intervals = (0..10)
        .map(|i| {
            let k = match i {
                0 => 12,
                9 => 0,
                i => 9 - i as u32,
            };
            DecodeInterval {
                index: i,
                lo: edges[i],
                hi: edges[i + 1],
                k,
                flips: flips_for(k),
            }
        })
        .collect();
    Ok(GhzDecodeTable {
        alpha,
        theta,
        intervals,
    })
}

impl GhzDecodeTable {
    pub fn locate(&self, x: f64) -> &DecodeInterval {
        self.intervals
            .iter()
            .find(|iv| iv.contains(x))
            .unwrap_or(&self.intervals[0])
    }

    /// Homodyne peak `2α cos kθ` of an interval's branch.
    pub fn peak_center(&self, interval: usize) -> f64 {
        2.0 * self.alpha * (self.intervals[interval].k as f64 * self.theta).cos()
    }

    /// `φ_k(x) = α sin kθ (x − 2α cos kθ)`, reduced mod 2π.
    pub fn correction_phase(&self, k: u32, x: f64) -> f64 {
        let (s, c) = (k as f64 * self.theta).sin_cos();
        (self.alpha * s * (x - 2.0 * self.alpha * c)).rem_euclid(std::f64::consts::TAU)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzReadout {
    pub x: f64,
    pub interval: usize,
    pub k: u32,
    /// Signal state straight after the measurement.
    pub conditioned: FockKet,
    /// After spin flips and the phase correction.
    pub corrected: FockKet,
    pub correction_phase: f64,
    /// Fidelity of `corrected` with `|GHZ₆⟩`.
    pub fidelity: f64,
}

/// How the homodyne outcome is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GhzMeasurement {
    At(f64),
    Sampled(u64),
}

/// The GHZ extraction circuit, with the probe-entangled state precomputed.
#[derive(Debug, Clone)]
pub struct GhzCircuit {
    table: GhzDecodeTable,
    tagged: ProbeTaggedState,
}

impl GhzCircuit {
    /// Circuit fed with the post-selected `|Ψ(π/2)⟩`.
    pub fn standard(alpha: f64, theta: f64) -> Result<Self> {
        Self::new(&build_psi_theta(FRAC_PI_2)?.state, alpha, theta)
    }

    /// Each path is split by a PBS, the H arm drives a Kerr cell on the probe,
    /// and a second PBS recombines the arms; the probe then passes the fixed
    /// phase shifter.
    pub fn new(input: &FockKet, alpha: f64, theta: f64) -> Result<Self> {
        let table = decode_table(alpha, theta)?;
        let register = six_path_register();
        if **input.register() != *register {
            return Err(FockError::RegisterMismatch(format!(
                "GHZ circuit expects register [{register}], got [{}]",
                input.register()
            )));
        }
        let one_each = OccupationPattern::one_per_spatial(&SIX_PATHS);
        let (_, p) = input.project(&one_each)?;
        if (p - 1.0).abs() > 1e-12 {
            return Err(FockError::InvalidInput(
                "GHZ circuit needs one photon in each path".into(),
            ));
        }
        let arms: Vec<String> = (1..=6)
            .flat_map(|i| [format!("e{i}h"), format!("e{i}v")])
            .collect();
        let extra = ModeRegister::from_spatial(&arms)?;
        let extended = input.with_vacuum_modes(&extra)?;
        let big = extended.register().clone();

        let mut split = Vec::new();
        for (i, path) in SIX_PATHS.iter().enumerate() {
            split.push(pbs(&big, path, &arms[2 * i], &arms[2 * i + 1])?);
        }
        let split = split
            .iter()
            .skip(1)
            .try_fold(split[0].clone(), |acc, t| acc.then(t))?;

        let mut weights = vec![0i64; big.len()];
        for (i, w) in GHZ_KERR_WEIGHTS.iter().enumerate() {
            weights[big.require(&arms[2 * i], Polarization::H)?] = *w;
        }
        let tagged = attach_probe(&extended, alpha, theta)?
            .apply_mode_transform(&split)?
            .apply_cross_kerr(&weights)?
            .apply_mode_transform(&split.inverse())?
            .apply_probe_phase(GHZ_PROBE_SHIFT)
            .map_signal(|k| k.restrict_to(register.clone()))?;
        Ok(Self { table, tagged })
    }

    pub fn table(&self) -> &GhzDecodeTable {
        &self.table
    }

    /// Signal branches keyed by probe phase index (units of θ/2).
    pub fn tagged(&self) -> &ProbeTaggedState {
        &self.tagged
    }

    pub fn homodyne_pdf(&self, x: f64) -> f64 {
        self.tagged.homodyne_pdf(x)
    }

    /// Exact probability mass of each interval.
    pub fn interval_probabilities(&self) -> Result<Vec<f64>> {
        let total = self.tagged.norm_sqr();
        self.table
            .intervals
            .iter()
            .map(|iv| Ok(self.tagged.interval_mass(iv.lo, iv.hi)? / total))
            .collect()
    }

    /// Conditions on outcome `x`, decodes its interval and applies the corrections.
    pub fn readout(&self, x: f64) -> Result<GhzReadout> {
        let conditioned = self.tagged.homodyne_condition(x)?;
        self.correct(x, conditioned)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GhzReadout> {
        let outcome = self.tagged.sample_homodyne(rng)?;
        self.correct(outcome.x, outcome.conditional)
    }

    pub fn measure(&self, how: GhzMeasurement) -> Result<GhzReadout> {
        match how {
            GhzMeasurement::At(x) => self.readout(x),
            GhzMeasurement::Sampled(seed) => self.sample(&mut crate::rng_from_seed(seed)),
        }
    }

    fn correct(&self, x: f64, conditioned: FockKet) -> Result<GhzReadout> {
        let interval = self.table.locate(x);
        let flipped = spin_flip(&conditioned, &interval.flip_labels())?;
        let phi = self.table.correction_phase(interval.k, x);
        let c1h = flipped.register().require("c1", Polarization::H)?;
        let corrected = mode_phase_shift(flipped.register(), c1h, -2.0 * phi)?.apply(&flipped)?;
        let fidelity = corrected.fidelity(&ghz6())?;
        Ok(GhzReadout {
            x,
            interval: interval.index,
            k: interval.k,
            conditioned,
            corrected,
            correction_phase: phi,
            fidelity,
        })
    }
}

/// Convenience wrapper over [`GhzCircuit`] for a single readout.
pub fn ghz_circuit(
    input: &FockKet,
    alpha: f64,
    theta: f64,
    how: GhzMeasurement,
) -> Result<(FockKet, usize)> {
    let r = GhzCircuit::new(input, alpha, theta)?.measure(how)?;
    Ok((r.corrected, r.interval))
}
