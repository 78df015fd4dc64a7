//! Passive linear-optical elements as creation-operator substitutions.
//!
//! A [`ModeTransform`] over an `n`-mode register is an `n × n` unitary whose
//! row `i` lists the substitution `a†_i → Σ_j M[i][j] a†_j`. Applying it to a
//! ket re-expands every term exactly, so photon number is conserved term by
//! term.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::fock::{
    accumulate, apply_linear_creation, sqrt_factorial, FockKet, ModeRegister, Occupation,
    Polarization, TermMap,
};

/// Unitarity tolerance on `M M†` at construction.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    matrix: DMatrix<Complex64>,
}

impl ModeTransform {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(FockError::InvalidInput(format!(
                "mode transform must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = matrix.nrows();
        let defect = (&matrix * matrix.adjoint() - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > UNITARY_TOLERANCE {
            return Err(FockError::InvalidInput(format!(
                "mode transform is not unitary (max |MM† − I| = {defect:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The element that applies `self` first and `next` afterwards.
    ///
    /// In the row-substitution convention this is the matrix product
    /// `self · next`.
    pub fn then(&self, next: &ModeTransform) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(FockError::RegisterMismatch(format!(
                "cannot compose {}-mode and {}-mode transforms",
                self.dim(),
                next.dim()
            )));
        }
        Ok(Self {
            matrix: &self.matrix * &next.matrix,
        })
    }

    /// The inverse element, `M†`.
    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    fn sparse_rows(&self) -> Vec<Vec<(usize, Complex64)>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .filter_map(|j| {
                        let c = self.matrix[(i, j)];
                        (c != ZERO).then_some((j, c))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn apply(&self, ket: &FockKet) -> Result<FockKet> {
        let n = ket.register().len();
        if self.dim() != n {
            return Err(FockError::RegisterMismatch(format!(
                "{}-mode transform on a {n}-mode register",
                self.dim()
            )));
        }
        let rows = self.sparse_rows();
        let mut out = TermMap::new();
        for (occ, amp) in ket.terms() {
            // |m⟩ = Π_i (a†_i)^{m_i}/√(m_i!) |0⟩, substitute each a†_i by its row.
            let norm: f64 = occ.as_slice().iter().map(|&m| sqrt_factorial(m)).product();
            let mut partial = TermMap::new();
            partial.insert(Occupation::zeros(n), amp / norm);
            for (mode, &count) in occ.as_slice().iter().enumerate() {
                for _ in 0..count {
                    partial = apply_linear_creation(&partial, &rows[mode])?;
                }
            }
            for (o, a) in partial {
                accumulate(&mut out, o, a);
            }
        }
        Ok(FockKet::from_map(ket.register().clone(), out))
    }
}

fn spatial_pair(register: &ModeRegister, spatial: &str) -> Result<(usize, usize)> {
    Ok((
        register.require(spatial, Polarization::H)?,
        register.require(spatial, Polarization::V)?,
    ))
}

fn distinct(labels: &[&str]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(FockError::InvalidInput(format!(
                "spatial label `{l}` used twice"
            )));
        }
    }
    Ok(())
}

/// Balanced beam splitter between spatial paths `a` and `b`, acting the same
/// way on both polarizations: `a† → (a† + b†)/√2`, `b† → (b† − a†)/√2`.
pub fn bs_5050(register: &ModeRegister, a: &str, b: &str) -> Result<ModeTransform> {
    distinct(&[a, b])?;
    let (ah, av) = spatial_pair(register, a)?;
    let (bh, bv) = spatial_pair(register, b)?;
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut m = DMatrix::identity(register.len(), register.len());
    for (x, y) in [(ah, bh), (av, bv)] {
        m[(x, x)] = s;
        m[(x, y)] = s;
        m[(y, x)] = -s;
        m[(y, y)] = s;
    }
    ModeTransform::new(m)
}

/// Unbalanced beam splitter with transmissivity `t_coef` fed on path `input`:
/// `in† → √T·t† + √R·r†` with `R = 1 − T`, on both polarizations.
///
/// When `input`, `reflected` and `transmitted` are three distinct paths the
/// element also maps the dark port `r† → √R·t† − √T·r†` and returns
/// `t† → in†`, which completes the unitary on the three paths. When
/// `transmitted == input` it is the ordinary two-path splitter.
pub fn bs_unbalanced(
    register: &ModeRegister,
    input: &str,
    reflected: &str,
    transmitted: &str,
    t_coef: f64,
) -> Result<ModeTransform> {
    if !(t_coef > 0.0 && t_coef < 1.0) {
        return Err(FockError::InvalidInput(format!(
            "transmissivity must lie in (0,1), got {t_coef}"
        )));
    }
    distinct(&[input, reflected])?;
    let st = Complex64::new(t_coef.sqrt(), 0.0);
    let sr = Complex64::new((1.0 - t_coef).sqrt(), 0.0);
    let mut m = DMatrix::identity(register.len(), register.len());
    let (ih, iv) = spatial_pair(register, input)?;
    let (rh, rv) = spatial_pair(register, reflected)?;
    if transmitted == input {
        for (i, r) in [(ih, rh), (iv, rv)] {
            m[(i, i)] = st;
            m[(i, r)] = sr;
            m[(r, i)] = -sr;
            m[(r, r)] = st;
        }
    } else {
        distinct(&[input, reflected, transmitted])?;
        let (th, tv) = spatial_pair(register, transmitted)?;
        for (i, r, t) in [(ih, rh, th), (iv, rv, tv)] {
            m[(i, i)] = ZERO;
            m[(i, t)] = st;
            m[(i, r)] = sr;
            m[(r, r)] = -st;
            m[(r, t)] = sr;
            m[(t, t)] = ZERO;
            m[(t, i)] = ONE;
        }
    }
    ModeTransform::new(m)
}

/// Polarization rotation by `theta` on one spatial path:
/// `V† → cosθ·V† + sinθ·H†`, `H† → cosθ·H† − sinθ·V†`.
pub fn polarization_rotation(
    register: &ModeRegister,
    spatial: &str,
    theta: f64,
) -> Result<ModeTransform> {
    let (h, v) = spatial_pair(register, spatial)?;
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::identity(register.len(), register.len());
    m[(h, h)] = Complex64::new(c, 0.0);
    m[(h, v)] = Complex64::new(-s, 0.0);
    m[(v, h)] = Complex64::new(s, 0.0);
    m[(v, v)] = Complex64::new(c, 0.0);
    ModeTransform::new(m)
}

/// Polarizing beam splitter: the H component of `input` is routed to path
/// `out_h`, the V component to `out_v`.
///
/// Realized as the swaps `inH ↔ out_hH` and `inV ↔ out_vV`, so the element is
/// its own inverse and applying it twice recombines the paths.
pub fn pbs(
    register: &ModeRegister,
    input: &str,
    out_h: &str,
    out_v: &str,
) -> Result<ModeTransform> {
    distinct(&[input, out_h, out_v])?;
    let ih = register.require(input, Polarization::H)?;
    let iv = register.require(input, Polarization::V)?;
    let oh = register.require(out_h, Polarization::H)?;
    let ov = register.require(out_v, Polarization::V)?;
    let mut m = DMatrix::identity(register.len(), register.len());
    for (x, y) in [(ih, oh), (iv, ov)] {
        m[(x, x)] = ZERO;
        m[(y, y)] = ZERO;
        m[(x, y)] = ONE;
        m[(y, x)] = ONE;
    }
    ModeTransform::new(m)
}

/// Phase shifter: every photon on `spatial` (either polarization) picks up `e^{iφ}`.
pub fn phase_shift(register: &ModeRegister, spatial: &str, phi: f64) -> Result<ModeTransform> {
    let indices = register.spatial_indices(spatial);
    if indices.is_empty() {
        return Err(FockError::InvalidInput(format!(
            "unknown spatial mode `{spatial}`"
        )));
    }
    let mut m = DMatrix::identity(register.len(), register.len());
    for i in indices {
        m[(i, i)] = Complex64::from_polar(1.0, phi);
    }
    ModeTransform::new(m)
}

/// Phase shifter on a single (spatial, polarization) mode.
pub fn mode_phase_shift(register: &ModeRegister, mode: usize, phi: f64) -> Result<ModeTransform> {
    if mode >= register.len() {
        return Err(FockError::InvalidInput(format!(
            "mode index {mode} out of range"
        )));
    }
    let mut m = DMatrix::identity(register.len(), register.len());
    m[(mode, mode)] = Complex64::from_polar(1.0, phi);
    ModeTransform::new(m)
}

/// Convenience: applies `elements` in order.
pub fn apply_all(ket: &FockKet, elements: &[ModeTransform]) -> Result<FockKet> {
    elements.iter().try_fold(ket.clone(), |k, t| t.apply(&k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn reg(spatial: &[&str]) -> Arc<ModeRegister> {
        Arc::new(ModeRegister::from_spatial(spatial).unwrap())
    }

    fn single_pol(labels: &[&str]) -> Arc<ModeRegister> {
        Arc::new(ModeRegister::parse_labels(labels).unwrap())
    }

    #[test]
    fn single_photon_through_balanced_splitter() {
        let r = reg(&["a", "b"]);
        let bs = bs_5050(&r, "a", "b").unwrap();
        let out = bs
            .apply(&FockKet::basis(r.clone(), vec![1, 0, 0, 0]).unwrap())
            .unwrap();
        let expected = FockKet::from_terms(
            r,
            [
                (vec![1, 0, 0, 0].into(), c(FRAC_1_SQRT_2)),
                (vec![0, 0, 1, 0].into(), c(FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        // Oracle: (a†+b†)(b†−a†)/2 |0⟩ = (b†² − a†²)/2 |0⟩ = (|0,2⟩ − |2,0⟩)/√2.
        let r = reg(&["a", "b"]);
        let bs = bs_5050(&r, "a", "b").unwrap();
        let out = bs
            .apply(&FockKet::basis(r.clone(), vec![1, 0, 1, 0]).unwrap())
            .unwrap();
        let expected = FockKet::from_terms(
            r,
            [
                (vec![0, 0, 2, 0].into(), c(FRAC_1_SQRT_2)),
                (vec![2, 0, 0, 0].into(), c(-FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn balanced_splitter_then_inverse_is_identity() {
        let r = reg(&["a", "b"]);
        let bs = bs_5050(&r, "a", "b").unwrap();
        let round = bs.then(&bs.inverse()).unwrap();
        assert!((round.matrix() - DMatrix::<Complex64>::identity(4, 4)).norm() < 1e-15);
        // Squared, this convention is the mode swap a → b, b → −a.
        let sq = bs.then(&bs).unwrap();
        let m = sq.matrix();
        assert!((m[(0, 2)] - c(1.0)).norm() < 1e-15);
        assert!((m[(2, 0)] - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn unbalanced_two_thirds() {
        let r = reg(&["a", "c0", "c1"]);
        let bs = bs_unbalanced(&r, "a", "c1", "c0", 2.0 / 3.0).unwrap();
        let out = bs
            .apply(&FockKet::basis(r.clone(), vec![1, 0, 0, 0, 0, 0]).unwrap())
            .unwrap();
        let expected = FockKet::from_terms(
            r,
            [
                (vec![0, 0, 1, 0, 0, 0].into(), c((2.0f64 / 3.0).sqrt())),
                (vec![0, 0, 0, 0, 1, 0].into(), c((1.0f64 / 3.0).sqrt())),
            ],
        )
        .unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn unbalanced_rejects_bad_transmissivity() {
        let r = reg(&["a", "b"]);
        for t in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(bs_unbalanced(&r, "a", "b", "a", t).is_err());
        }
    }

    #[test]
    fn splitters_are_unitary_for_random_transmissivity() {
        let r = reg(&["a", "b", "c"]);
        let mut t: f64 = 0.0073;
        for _ in 0..100 {
            t = (t * 7.31 + 0.113).fract();
            let t = t.clamp(1e-6, 1.0 - 1e-6);
            assert!(bs_unbalanced(&r, "a", "b", "c", t).is_ok());
            assert!(bs_unbalanced(&r, "a", "b", "a", t).is_ok());
        }
        assert!(bs_5050(&r, "a", "c").is_ok());
    }

    #[test]
    fn rotation_zero_is_identity() {
        let r = reg(&["a", "b"]);
        let rot = polarization_rotation(&r, "b", 0.0).unwrap();
        assert_eq!(rot, ModeTransform::identity(4));
    }

    #[test]
    fn rotation_needs_both_polarizations() {
        let r = single_pol(&["aH", "bH", "bV"]);
        assert!(polarization_rotation(&r, "a", 0.3).is_err());
    }

    #[test]
    fn rotation_quarter_turn_on_singlet_pair() {
        // sin = 1, cos = 0: a_H b_V − a_V b_H → a_H b_H + a_V b_V.
        let r = reg(&["a", "b"]);
        let singlet = FockKet::from_terms(
            r.clone(),
            [
                (vec![1, 0, 0, 1].into(), c(FRAC_1_SQRT_2)),
                (vec![0, 1, 1, 0].into(), c(-FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        let rot = polarization_rotation(&r, "b", std::f64::consts::FRAC_PI_2).unwrap();
        let out = rot.apply(&singlet).unwrap();
        let expected = FockKet::from_terms(
            r,
            [
                (vec![1, 0, 1, 0].into(), c(FRAC_1_SQRT_2)),
                (vec![0, 1, 0, 1].into(), c(FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
        let rot45 = polarization_rotation(
            &expected.register().clone(),
            "b",
            std::f64::consts::FRAC_PI_4,
        )
        .unwrap();
        assert!((rot45.apply(&singlet).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pbs_routes_polarizations() {
        let r = reg(&["c", "h", "v"]);
        let p = pbs(&r, "c", "h", "v").unwrap();
        let h_in = FockKet::basis(r.clone(), vec![1, 0, 0, 0, 0, 0]).unwrap();
        let v_in = FockKet::basis(r.clone(), vec![0, 1, 0, 0, 0, 0]).unwrap();
        let h_out = p.apply(&h_in).unwrap();
        let v_out = p.apply(&v_in).unwrap();
        assert_eq!(
            h_out,
            FockKet::basis(r.clone(), vec![0, 0, 1, 0, 0, 0]).unwrap()
        );
        assert_eq!(
            v_out,
            FockKet::basis(r.clone(), vec![0, 0, 0, 0, 0, 1]).unwrap()
        );
        let diag = h_in.add(&v_in).unwrap().normalize().unwrap();
        let out = p.apply(&diag).unwrap();
        let expected = h_out.add(&v_out).unwrap().normalize().unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
        assert_eq!(p.apply(&out).unwrap(), diag);
    }

    #[test]
    fn pbs_label_collision() {
        let r = reg(&["c", "h"]);
        assert!(pbs(&r, "c", "h", "h").is_err());
        assert!(pbs(&r, "c", "c", "h").is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_element(2, 2, c(1.0));
        assert!(ModeTransform::new(m).is_err());
        assert!(ModeTransform::new(DMatrix::from_element(2, 3, c(0.0))).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = reg(&["a"]);
        let t = ModeTransform::identity(3);
        assert!(t.apply(&FockKet::vacuum(r)).is_err());
    }
}
