//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use focksim::{BilinearForm, Complex64};

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `ln P(Z > d)` for a standard normal `Z` and `d ≥ 0`, from quadrature of
/// the scaled tail `∫₀^∞ e^{−ds − s²/2} ds`.
pub fn ln_gaussian_tail(d: f64) -> f64 {
    let g = |s: f64| (-d * s - 0.5 * s * s).exp();
    let upper = 40.0f64.min(60.0 / d.max(1e-3)).max(1.0);
    let mut integral = 0.0;
    let pieces = 64;
    for i in 0..pieces {
        let a = upper * (i as f64 / pieces as f64).powi(3);
        let b = upper * ((i + 1) as f64 / pieces as f64).powi(3);
        integral += simpson(&g, a, b, 1e-17);
    }
    -0.5 * d * d - 0.5 * (2.0 * std::f64::consts::PI).ln() + integral.ln()
}

/// Brute-force expansion of `(Σ c_ij a†_i a†_j)ⁿ|0⟩`: every ordered choice of
/// `n` terms is multiplied out into a monomial, and the monomial
/// `Π (a†_i)^{e_i}|0⟩` contributes `√(Π e_i!)` to the occupation `e`.
pub fn multinomial_power(
    form: &BilinearForm,
    modes: usize,
    n: u32,
) -> BTreeMap<Vec<u8>, Complex64> {
    let terms: Vec<((usize, usize), Complex64)> =
        form.coefficients().map(|(k, v)| (*k, *v)).collect();
    let mut monomials: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    let mut choice = vec![0usize; n as usize];
    loop {
        let mut e = vec![0u8; modes];
        let mut c = Complex64::new(1.0, 0.0);
        for &t in &choice {
            let ((i, j), coef) = terms[t];
            e[i] += 1;
            e[j] += 1;
            c *= coef;
        }
        *monomials.entry(e).or_default() += c;
        // Odometer over all ordered choices.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return monomials
                    .into_iter()
                    .map(|(e, c)| {
                        let f: f64 = e
                            .iter()
                            .map(|&k| (1..=k as u64).product::<u64>() as f64)
                            .product();
                        (e, c * f.sqrt())
                    })
                    .filter(|(_, c)| c.norm() > 0.0)
                    .collect();
            }
            choice[pos] += 1;
            if choice[pos] < terms.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
