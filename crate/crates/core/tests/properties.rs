mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::sync::Arc;

use focksim::fock::{FockKet, ModeRegister, Occupation};
use focksim::optics::{bs_5050, bs_unbalanced, polarization_rotation, ModeTransform};
use focksim::schemes::{build_psi_theta, polarization_ket, GhzCircuit};
use focksim::symmetry::{
    cascade_closed_form, cascade_simulate, symmetric_probability, Branch, CoefficientPair,
    OutcomeSelector, SymmetryDetector,
};
use focksim::{rng_from_seed, Complex64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn register(n: usize) -> Arc<ModeRegister> {
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}H")).collect();
    Arc::new(ModeRegister::parse_labels(&labels).unwrap())
}

fn random_unitary(n: usize, seed: u64) -> ModeTransform {
    let mut rng = rng_from_seed(seed);
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    ModeTransform::new(m.qr().q()).unwrap()
}

fn random_ket(reg: Arc<ModeRegister>, seed: u64, photons: u8) -> FockKet {
    let mut rng = rng_from_seed(seed);
    let n = reg.len();
    let terms: Vec<(Occupation, Complex64)> = (0..6)
        .map(|_| {
            let mut counts = vec![0u8; n];
            for _ in 0..photons {
                counts[rng.random_range(0..n)] += 1;
            }
            (
                Occupation::new(counts),
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            )
        })
        .collect();
    FockKet::from_terms(reg, terms)
        .unwrap()
        .normalize()
        .unwrap()
}

fn pair(phi: f64) -> CoefficientPair {
    CoefficientPair::new(FRAC_1_SQRT_2 * phi.cos(), FRAC_1_SQRT_2 * phi.sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unitaries_preserve_norm(seed in any::<u64>(), modes in 2usize..5, photons in 1u8..4) {
        let reg = register(modes);
        let psi = random_ket(reg, seed, photons);
        let out = random_unitary(modes, seed ^ 0xabc).apply(&psi).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(out.photon_number(), psi.photon_number());
    }

    #[test]
    fn composition_matches_sequential_application(seed in any::<u64>(), modes in 2usize..4) {
        let psi = random_ket(register(modes), seed, 3);
        let (t1, t2) = (random_unitary(modes, seed + 1), random_unitary(modes, seed + 2));
        let direct = t2.apply(&t1.apply(&psi).unwrap()).unwrap();
        let composed = t1.then(&t2).unwrap().apply(&psi).unwrap();
        prop_assert!(direct.max_abs_diff(&composed).unwrap() < 1e-12);
        let back = t1.inverse().apply(&t1.apply(&psi).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(seed in any::<u64>()) {
        let reg = register(3);
        let a = random_ket(reg.clone(), seed, 2);
        let b = random_ket(reg, seed.wrapping_add(7), 2);
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-15);
        prop_assert!(a.fidelity(&b).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn unbalanced_splitter_is_unitary(t in 0.01f64..0.99) {
        let reg = ModeRegister::from_spatial(&["a", "b", "c"]).unwrap();
        let m = bs_unbalanced(&reg, "a", "b", "c", t).unwrap();
        let prod = m.matrix() * m.matrix().adjoint();
        prop_assert!((prod - DMatrix::<Complex64>::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn simulated_cascade_matches_closed_form(phi in 0.0f64..FRAC_PI_2, k in 1u32..6) {
        let p0 = pair(phi);
        let run = cascade_simulate(p0, k, 1000.0, 0.1).unwrap();
        let cf = cascade_closed_form(p0, k).unwrap().normalized_pair();
        let sim = CoefficientPair::from_state(&run.state);
        prop_assert!((sim.m - cf.m).abs() < 1e-12 && (sim.n - cf.n).abs() < 1e-12);
        prop_assert!((run.step_probabilities[0] - symmetric_probability(p0)).abs() < 1e-12);
    }

    #[test]
    fn normalization_constant_identity(phi in 0.0f64..FRAC_PI_2, k in 0u32..20) {
        let cf = cascade_closed_form(pair(phi), k).unwrap();
        let direct = 2.0 * (cf.m * cf.m + cf.n * cf.n);
        prop_assert!((cf.c - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn ratio_converges_with_corrected_bound(phi in 0.01f64..(FRAC_PI_2 - 0.01), k in 1u32..25) {
        let p = pair(phi);
        let cf = cascade_closed_form(p, k).unwrap();
        let bound = 2.0 / (2f64.powi(k as i32) - 1.0) * (p.m - p.n).abs() / (p.m + p.n);
        prop_assert!((cf.ratio - 1.0).abs() <= bound * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn postselection_symmetric_under_supplement(theta in 0.0f64..FRAC_PI_2) {
        let a = build_psi_theta(theta).unwrap();
        let b = build_psi_theta(PI - theta).unwrap();
        prop_assert!(a.postselect_probability > 0.0);
        prop_assert!((a.postselect_probability - b.postselect_probability).abs() < 1e-12);
    }
}

#[test]
fn ratios_alternate_around_one() {
    let p = pair(0.2);
    let mut prev_sign = 0.0;
    for k in 1..=12 {
        let s = (cascade_closed_form(p, k).unwrap().ratio - 1.0).signum();
        if k > 1 {
            assert_eq!(s, -prev_sign, "k = {k}");
        }
        prev_sign = s;
    }
}

#[test]
fn stated_ratio_bound_fails_at_first_step() {
    // Starting from (0, 1/√2) the first ratio is 3, while 2^{1−k}·|m0−n0|/(m0+n0) = 1.
    let p = CoefficientPair::new(0.0, FRAC_1_SQRT_2);
    let dev = (cascade_closed_form(p, 1).unwrap().ratio - 1.0).abs();
    assert!(dev > 1.0);
    assert!(dev <= 2.0 / (2.0 - 1.0));
}

#[test]
fn detector_pdf_integrates_to_one() {
    let det = SymmetryDetector::new(20.0, 0.4).unwrap();
    let input = pair(0.3).twin_beam_state().unwrap();
    let tagged = det.entangle(&input).unwrap();
    let total = common::simpson(&|x| tagged.homodyne_pdf(x), -10.0, 60.0, 1e-12);
    assert!((total - 1.0).abs() < 1e-9, "∫ pdf = {total}");
    let x0 = det.threshold();
    let upper = common::simpson(&|x| tagged.homodyne_pdf(x), x0, 60.0, 1e-12);
    let mass = tagged.interval_mass(x0, f64::INFINITY).unwrap();
    assert!((upper - mass).abs() < 1e-9);
}

#[test]
fn sampled_branch_frequency_matches_probability() {
    let det = SymmetryDetector::new(1000.0, 0.1).unwrap();
    let p = pair(0.9);
    let input = p.twin_beam_state().unwrap();
    let mut rng = rng_from_seed(5);
    let draws = 4000;
    let sym = (0..draws)
        .filter(|_| det.detect_sampled(&input, &mut rng).unwrap().branch == Branch::Symmetric)
        .count();
    let expected = symmetric_probability(p);
    let f = sym as f64 / draws as f64;
    let sigma = (expected * (1.0 - expected) / draws as f64).sqrt();
    assert!((f - expected).abs() < 4.0 * sigma, "{f} vs {expected}");
}

#[test]
fn forced_and_sampled_agree_on_symmetric_state() {
    let det = SymmetryDetector::new(1000.0, 0.1).unwrap();
    let input = pair(0.5).twin_beam_state().unwrap();
    let forced = det
        .detect(&input, OutcomeSelector::Forced(Branch::Symmetric))
        .unwrap();
    let mut rng = rng_from_seed(11);
    loop {
        let s = det.detect_sampled(&input, &mut rng).unwrap();
        if s.branch == Branch::Symmetric {
            assert!(s.state.fidelity(&forced.state).unwrap() > 1.0 - 1e-9);
            break;
        }
    }
}

#[test]
fn antisymmetric_weight_at_zero_rotation() {
    let s = build_psi_theta(0.0).unwrap();
    let a = polarization_ket("HHHVVV").unwrap();
    let b = polarization_ket("VVVHHH").unwrap();
    let anti = a
        .add(&b.scale(Complex64::new(-1.0, 0.0)))
        .unwrap()
        .normalize()
        .unwrap();
    let w = anti.inner_product(&s.state).unwrap().norm_sqr();
    assert!((w - 0.5).abs() < 1e-10, "{w}");
}

#[test]
fn rotation_then_inverse_rotation_is_identity() {
    let reg = ModeRegister::from_spatial(&["a"]).unwrap();
    let r = polarization_rotation(&reg, "a", 0.7).unwrap();
    let back = polarization_rotation(&reg, "a", -0.7).unwrap();
    let id = r.then(&back).unwrap();
    assert!((id.matrix() - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-15);
}

#[test]
fn balanced_splitter_followed_by_inverse() {
    let reg = Arc::new(ModeRegister::from_spatial(&["a", "b"]).unwrap());
    let bs = bs_5050(&reg, "a", "b").unwrap();
    let psi = FockKet::basis(reg, vec![1, 0, 2, 0]).unwrap();
    let out = bs.inverse().apply(&bs.apply(&psi).unwrap()).unwrap();
    assert!(out.max_abs_diff(&psi).unwrap() < 1e-14);
}

#[test]
fn ghz_interval_masses() {
    let c = GhzCircuit::standard(1000.0, 0.1).unwrap();
    let p = c.interval_probabilities().unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((p[0] - 0.5).abs() < 1e-6);
    for q in &p[1..] {
        assert!((q - 1.0 / 18.0).abs() < 1e-6);
    }
}

#[test]
fn ghz_readout_in_empty_region_is_reported() {
    let c = GhzCircuit::standard(1000.0, 0.1).unwrap();
    assert!(matches!(
        c.readout(-1.0e6),
        Err(focksim::FockError::EmptyOutcome(_))
    ));
}
