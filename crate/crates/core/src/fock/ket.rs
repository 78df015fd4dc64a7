use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock};

use num_complex::Complex64;

use super::register::ModeRegister;
use crate::error::{FockError, Result};

/// Amplitudes with magnitude below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Largest occupation a single mode may hold.
pub const MAX_PER_MODE: u8 = 15;

/// Tolerance on Σ|amplitude|² for a ket to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

static SQRT_FACTORIAL: LazyLock<[f64; 17]> = LazyLock::new(|| {
    let mut table = [1.0; 17];
    let mut f = 1u64;
    for (n, slot) in table.iter_mut().enumerate().skip(1) {
        f *= n as u64;
        *slot = (f as f64).sqrt();
    }
    table
});

/// √(n!) for n ≤ 16.
pub fn sqrt_factorial(n: u8) -> f64 {
    SQRT_FACTORIAL[n as usize]
}

/// Photon count per mode, ordered like the owning register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<u8>);

impl Occupation {
    pub fn new(counts: Vec<u8>) -> Self {
        Self(counts)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl From<Vec<u8>> for Occupation {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

impl From<&[u8]> for Occupation {
    fn from(v: &[u8]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

pub(crate) type TermMap = BTreeMap<Occupation, Complex64>;

pub(crate) fn accumulate(map: &mut TermMap, occ: Occupation, amp: Complex64) {
    *map.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
}

fn prune(map: &mut TermMap) {
    map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
}

/// Applies `Σ_j coeffs[j]·a†_j` to every term of `map`.
pub(crate) fn apply_linear_creation(
    map: &TermMap,
    coeffs: &[(usize, Complex64)],
) -> Result<TermMap> {
    let mut out = TermMap::new();
    for (occ, amp) in map {
        for &(mode, c) in coeffs {
            let n = occ.get(mode);
            if n >= MAX_PER_MODE {
                return Err(FockError::Capacity(format!(
                    "mode {mode} would exceed {MAX_PER_MODE} photons"
                )));
            }
            let mut next = occ.clone();
            next.counts_mut()[mode] = n + 1;
            accumulate(&mut out, next, amp * c * ((n + 1) as f64).sqrt());
        }
    }
    Ok(out)
}

/// Per-mode or per-spatial-path photon-count requirement used by
/// [`FockKet::project`].
#[derive(Debug, Clone, PartialEq)]
pub enum PatternConstraint {
    /// Register index `mode` holds exactly `count` photons.
    Mode { mode: usize, count: u32 },
    /// All modes on spatial path `spatial` together hold exactly `count` photons.
    Spatial { spatial: String, count: u32 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OccupationPattern {
    pub constraints: Vec<PatternConstraint>,
}

impl OccupationPattern {
    pub fn new(constraints: Vec<PatternConstraint>) -> Self {
        Self { constraints }
    }

    /// Exactly one photon on each listed spatial path.
    pub fn one_per_spatial<S: AsRef<str>>(spatial: &[S]) -> Self {
        Self::new(
            spatial
                .iter()
                .map(|s| PatternConstraint::Spatial {
                    spatial: s.as_ref().to_string(),
                    count: 1,
                })
                .collect(),
        )
    }

    /// Exactly `occ[i]` photons in every mode `i`.
    pub fn exact(occ: &Occupation) -> Self {
        Self::new(
            occ.as_slice()
                .iter()
                .enumerate()
                .map(|(mode, &n)| PatternConstraint::Mode {
                    mode,
                    count: n as u32,
                })
                .collect(),
        )
    }
}

/// Sparse pure state over a [`ModeRegister`]: a map from occupation vectors
/// to complex amplitudes, kept in lexicographic occupation order.
///
/// Values are immutable; every operation returns a new ket.
#[derive(Debug, Clone, PartialEq)]
pub struct FockKet {
    register: Arc<ModeRegister>,
    terms: TermMap,
}

impl FockKet {
    pub fn vacuum(register: Arc<ModeRegister>) -> Self {
        let mut terms = TermMap::new();
        terms.insert(Occupation::zeros(register.len()), Complex64::new(1.0, 0.0));
        Self { register, terms }
    }

    pub fn zero(register: Arc<ModeRegister>) -> Self {
        Self {
            register,
            terms: TermMap::new(),
        }
    }

    pub fn basis(register: Arc<ModeRegister>, occ: impl Into<Occupation>) -> Result<Self> {
        Self::from_terms(register, [(occ.into(), Complex64::new(1.0, 0.0))])
    }

    /// Builds a ket from (occupation, amplitude) pairs. Repeated occupations
    /// add coherently.
    pub fn from_terms<I>(register: Arc<ModeRegister>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut map = TermMap::new();
        for (occ, amp) in terms {
            if occ.len() != register.len() {
                return Err(FockError::RegisterMismatch(format!(
                    "occupation of length {} on a {}-mode register",
                    occ.len(),
                    register.len()
                )));
            }
            if let Some(&n) = occ.as_slice().iter().find(|&&n| n > MAX_PER_MODE) {
                return Err(FockError::Capacity(format!(
                    "occupation {n} exceeds {MAX_PER_MODE} photons per mode"
                )));
            }
            accumulate(&mut map, occ, amp);
        }
        Ok(Self::from_map(register, map))
    }

    pub(crate) fn from_map(register: Arc<ModeRegister>, mut terms: TermMap) -> Self {
        prune(&mut terms);
        Self { register, terms }
    }

    pub fn register(&self) -> &Arc<ModeRegister> {
        &self.register
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub(crate) fn term_map(&self) -> &TermMap {
        &self.terms
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(FockError::EmptyOutcome(
                "cannot normalize a zero ket".into(),
            ));
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| (o.clone(), a * factor))
            .collect();
        Self::from_map(self.register.clone(), terms)
    }

    /// Multiplies each term by `f(occupation)`.
    pub fn map_amplitudes(&self, f: impl Fn(&Occupation) -> Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| (o.clone(), a * f(o)))
            .collect();
        Self::from_map(self.register.clone(), terms)
    }

    /// Keeps only the terms whose occupation satisfies `keep`, unnormalized.
    pub fn filter(&self, keep: impl Fn(&Occupation) -> bool) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(o, _)| keep(o))
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        Self::from_map(self.register.clone(), terms)
    }

    pub fn add(&self, other: &FockKet) -> Result<Self> {
        self.check_register(other)?;
        let mut terms = self.terms.clone();
        for (o, a) in &other.terms {
            accumulate(&mut terms, o.clone(), *a);
        }
        Ok(Self::from_map(self.register.clone(), terms))
    }

    pub(crate) fn check_register(&self, other: &FockKet) -> Result<()> {
        if Arc::ptr_eq(&self.register, &other.register) || self.register == other.register {
            Ok(())
        } else {
            Err(FockError::RegisterMismatch(format!(
                "[{}] vs [{}]",
                self.register, other.register
            )))
        }
    }

    /// Applies `Π_i (a†_i)^{powers[i]}`; each term |m⟩ picks up
    /// `Π_i √((m_i+p_i)!/m_i!)`.
    pub fn apply_creation_monomial(&self, powers: &[u8]) -> Result<Self> {
        if powers.len() != self.register.len() {
            return Err(FockError::RegisterMismatch(format!(
                "monomial of length {} on a {}-mode register",
                powers.len(),
                self.register.len()
            )));
        }
        let mut terms = TermMap::new();
        for (occ, amp) in &self.terms {
            let mut next = occ.clone();
            let mut factor = 1.0;
            for (mode, (&m, &p)) in occ.as_slice().iter().zip(powers).enumerate() {
                let total = m as u32 + p as u32;
                if total > MAX_PER_MODE as u32 {
                    return Err(FockError::Capacity(format!(
                        "mode {mode} would hold {total} photons (max {MAX_PER_MODE})"
                    )));
                }
                factor *= sqrt_factorial(total as u8) / sqrt_factorial(m);
                next.counts_mut()[mode] = total as u8;
            }
            accumulate(&mut terms, next, amp * factor);
        }
        Ok(Self::from_map(self.register.clone(), terms))
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &FockKet) -> Result<Complex64> {
        self.check_register(other)?;
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, a) in &small.terms {
            if let Some(b) = large.terms.get(occ) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        Ok(acc)
    }

    /// |⟨a|b⟩|² / (‖a‖²‖b‖²); insensitive to global phase and scale.
    pub fn fidelity(&self, other: &FockKet) -> Result<f64> {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(FockError::EmptyOutcome("fidelity with a zero ket".into()));
        }
        Ok(self.inner_product(other)?.norm_sqr() / denom)
    }

    /// Largest |amplitude difference| over the union of supports.
    pub fn max_abs_diff(&self, other: &FockKet) -> Result<f64> {
        self.check_register(other)?;
        let mut worst: f64 = 0.0;
        for (o, a) in &self.terms {
            worst = worst.max((a - other.amplitude(o)).norm());
        }
        for (o, b) in &other.terms {
            if !self.terms.contains_key(o) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// Tensor product; the result register is `self.register ⊕ other.register`.
    pub fn tensor(&self, other: &FockKet) -> Result<Self> {
        let register = Arc::new(self.register.concat(&other.register)?);
        let mut terms = TermMap::new();
        for (oa, a) in &self.terms {
            for (ob, b) in &other.terms {
                let mut counts = oa.as_slice().to_vec();
                counts.extend_from_slice(ob.as_slice());
                accumulate(&mut terms, Occupation::new(counts), a * b);
            }
        }
        Ok(Self::from_map(register, terms))
    }

    fn satisfies(&self, occ: &Occupation, pattern: &OccupationPattern) -> bool {
        pattern.constraints.iter().all(|c| match c {
            PatternConstraint::Mode { mode, count } => occ.get(*mode) as u32 == *count,
            PatternConstraint::Spatial { spatial, count } => {
                self.register
                    .modes()
                    .iter()
                    .zip(occ.as_slice())
                    .filter(|(m, _)| &m.spatial == spatial)
                    .map(|(_, &n)| n as u32)
                    .sum::<u32>()
                    == *count
            }
        })
    }

    /// Post-selects on `pattern`: returns the renormalized conditional ket and
    /// the Born probability of the pattern.
    pub fn project(&self, pattern: &OccupationPattern) -> Result<(Self, f64)> {
        for c in &pattern.constraints {
            match c {
                PatternConstraint::Mode { mode, .. } if *mode >= self.register.len() => {
                    return Err(FockError::InvalidInput(format!(
                        "pattern refers to mode {mode} outside a {}-mode register",
                        self.register.len()
                    )))
                }
                PatternConstraint::Spatial { spatial, .. }
                    if self.register.spatial_indices(spatial).is_empty() =>
                {
                    return Err(FockError::InvalidInput(format!(
                        "pattern refers to unknown spatial mode `{spatial}`"
                    )))
                }
                _ => {}
            }
        }
        let total = self.norm_sqr();
        let kept = self.filter(|o| self.satisfies(o, pattern));
        let p = kept.norm_sqr();
        if total == 0.0 || p == 0.0 {
            return Err(FockError::EmptyOutcome(
                "occupation pattern has zero probability".into(),
            ));
        }
        Ok((kept.normalize()?, p / total))
    }

    /// Total-photon expectation ⟨N⟩ / ⟨ψ|ψ⟩.
    pub fn mean_photon_number(&self) -> f64 {
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|(o, a)| o.total() as f64 * a.norm_sqr())
            .sum::<f64>()
            / norm
    }

    /// The common photon number of every term, if the ket has one.
    pub fn photon_number(&self) -> Option<u32> {
        let mut totals = self.terms.keys().map(Occupation::total);
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }

    /// Appends vacuum modes from `extra` to the register.
    pub fn with_vacuum_modes(&self, extra: &ModeRegister) -> Result<Self> {
        self.tensor(&FockKet::vacuum(Arc::new(extra.clone())))
    }

    /// Re-expresses the ket on `target`, whose modes must be a subset of this
    /// register. Every dropped mode must be empty in every term.
    pub fn restrict_to(&self, target: Arc<ModeRegister>) -> Result<Self> {
        let mapping = target
            .modes()
            .iter()
            .map(|m| self.register.require(&m.spatial, m.polarization))
            .collect::<Result<Vec<usize>>>()?;
        let mut terms = TermMap::new();
        for (occ, amp) in &self.terms {
            if occ.total() != mapping.iter().map(|&i| occ.get(i) as u32).sum::<u32>() {
                return Err(FockError::InvalidInput(format!(
                    "term {occ} occupies a mode outside the target register"
                )));
            }
            let counts = mapping.iter().map(|&i| occ.get(i)).collect();
            accumulate(&mut terms, Occupation::new(counts), *amp);
        }
        Ok(Self::from_map(target, terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::register::ModeRegister;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reg(n: usize) -> Arc<ModeRegister> {
        let names: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let labels: Vec<String> = names.iter().map(|s| format!("{s}H")).collect();
        Arc::new(ModeRegister::parse_labels(&labels).unwrap())
    }

    #[test]
    fn zero_powers_is_identity() {
        let r = reg(2);
        let k = FockKet::from_terms(
            r,
            [
                (vec![1, 2].into(), c(0.6, 0.0)),
                (vec![0, 3].into(), c(0.0, 0.8)),
            ],
        )
        .unwrap();
        assert_eq!(k.apply_creation_monomial(&[0, 0]).unwrap(), k);
    }

    #[test]
    fn cube_of_creation_on_vacuum() {
        let k = FockKet::vacuum(reg(1))
            .apply_creation_monomial(&[3])
            .unwrap();
        assert_eq!(k.len(), 1);
        assert!((k.amplitude(&vec![3].into()) - c(6f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn composition_against_direct_power() {
        // a†a†|1⟩ = √2√3|3⟩ = √6|3⟩ = (a†)²|1⟩, over every occupation ≤ 4.
        for m in 0..=4u8 {
            for p in 0..=4u8 {
                for q in 0..=4u8 {
                    let k = FockKet::basis(reg(1), vec![m]).unwrap();
                    let two_step = k
                        .apply_creation_monomial(&[p])
                        .unwrap()
                        .apply_creation_monomial(&[q])
                        .unwrap();
                    let direct = k.apply_creation_monomial(&[p + q]).unwrap();
                    let mut expected = 1.0;
                    for j in (m + 1)..=(m + p + q) {
                        expected *= (j as f64).sqrt();
                    }
                    let occ: Occupation = vec![m + p + q].into();
                    assert!((two_step.amplitude(&occ).re - expected).abs() < 1e-12 * expected);
                    assert!((direct.amplitude(&occ).re - expected).abs() < 1e-12 * expected);
                }
            }
        }
    }

    #[test]
    fn monomial_register_mismatch() {
        let k = FockKet::vacuum(reg(2));
        assert!(matches!(
            k.apply_creation_monomial(&[1]),
            Err(FockError::RegisterMismatch(_))
        ));
    }

    #[test]
    fn occupancy_capacity() {
        let k = FockKet::basis(reg(1), vec![14]).unwrap();
        assert!(matches!(
            k.apply_creation_monomial(&[2]),
            Err(FockError::Capacity(_))
        ));
        assert!(FockKet::basis(reg(1), vec![16]).is_err());
    }

    #[test]
    fn basis_kets_orthogonal() {
        let a = FockKet::basis(reg(2), vec![1, 0]).unwrap();
        let b = FockKet::basis(reg(2), vec![0, 1]).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
        assert_eq!(a.inner_product(&a).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first() {
        let r = reg(1);
        let a = FockKet::from_terms(r.clone(), [(vec![1].into(), c(0.0, 1.0))]).unwrap();
        let b = FockKet::basis(r, vec![1]).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, -1.0));
        assert_eq!(b.inner_product(&a).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn inner_product_register_mismatch() {
        let a = FockKet::vacuum(reg(1));
        let b = FockKet::vacuum(reg(2));
        assert!(a.inner_product(&b).is_err());
    }

    #[test]
    fn projection_born_rule() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let k = FockKet::from_terms(
            reg(2),
            [
                (vec![2, 0].into(), c(s, 0.0)),
                (vec![1, 1].into(), c(s, 0.0)),
            ],
        )
        .unwrap();
        let pattern = OccupationPattern::new(vec![
            PatternConstraint::Mode { mode: 0, count: 1 },
            PatternConstraint::Mode { mode: 1, count: 1 },
        ]);
        let (out, p) = k.project(&pattern).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(out, FockKet::basis(reg(2), vec![1, 1]).unwrap());
    }

    #[test]
    fn projection_onto_own_support() {
        let k = FockKet::from_terms(
            reg(2),
            [
                (vec![2, 0].into(), c(0.6, 0.0)),
                (vec![1, 1].into(), c(0.0, 0.8)),
            ],
        )
        .unwrap();
        let pattern = OccupationPattern::new(vec![PatternConstraint::Spatial {
            spatial: "m0".into(),
            count: 0,
        }]);
        assert!(matches!(
            k.project(&pattern),
            Err(FockError::EmptyOutcome(_))
        ));
        let (same, p) = k.project(&OccupationPattern::default()).unwrap();
        assert_eq!(p, 1.0);
        assert!(same.max_abs_diff(&k).unwrap() < 1e-15);
    }

    #[test]
    fn tiny_amplitudes_are_pruned() {
        let k = FockKet::from_terms(
            reg(1),
            [
                (vec![0].into(), c(1.0, 0.0)),
                (vec![1].into(), c(1e-15, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(k.len(), 1);
    }

    #[test]
    fn restrict_requires_vacant_dropped_modes() {
        let k = FockKet::basis(reg(3), vec![1, 0, 2]).unwrap();
        let sub = Arc::new(ModeRegister::parse_labels(&["m2H", "m0H"]).unwrap());
        let r = k.restrict_to(sub.clone()).unwrap();
        assert_eq!(r.amplitude(&vec![2, 1].into()), c(1.0, 0.0));
        let k2 = FockKet::basis(reg(3), vec![1, 1, 0]).unwrap();
        assert!(k2.restrict_to(sub).is_err());
    }
}
