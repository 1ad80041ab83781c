//! Complex susceptibilities and the auxiliary functions built on them.
//!
//! Fourier convention: a time derivative maps to `+iω`. Differences of
//! squares near resonance are formed as `(a − b)(a + b)` so that they keep
//! full relative precision at `Q_m ~ 10⁷`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SensorParams;

/// A single complex sample of a susceptibility or transfer function.
pub type ComplexResponse = Complex64;

/// How the atomic-to-mechanical response ratio `R = χ_d/χ_m` is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RForm {
    /// `R = −(1 + r)`, dropping the `Γ²/4` shift of the atomic resonance.
    #[default]
    HighQ,
    /// The literal ratio `χ_d/χ_m`.
    ExactRatio,
}

#[inline]
fn diff_sq(a: f64, b: f64) -> f64 {
    (a - b) * (a + b)
}

pub fn chi_a(omega: f64, kappa: f64) -> ComplexResponse {
    Complex64::new(0.5 * kappa, omega).inv()
}

pub fn chi_m(omega: f64, omega_m: f64, gamma_m: f64) -> ComplexResponse {
    inv_chi_m(omega, omega_m, gamma_m).inv()
}

/// `1/χ_m = ((ω_m² − ω²) + iωγ_m)/ω_m`.
pub fn inv_chi_m(omega: f64, omega_m: f64, gamma_m: f64) -> Complex64 {
    Complex64::new(diff_sq(omega_m, omega) / omega_m, omega * gamma_m / omega_m)
}

/// `|χ_m|⁻²` without forming `χ_m`.
pub fn inv_chi_m_norm_sqr(omega: f64, omega_m: f64, gamma_m: f64) -> f64 {
    inv_chi_m(omega, omega_m, gamma_m).norm_sqr()
}

pub fn chi_d(omega: f64, omega_m: f64, dephasing: f64) -> ComplexResponse {
    -omega_m / atomic_denominator(omega, omega_m, dephasing)
}

/// `(ω_m² − ω² + Γ²/4) + iωΓ`.
fn atomic_denominator(omega: f64, omega_m: f64, dephasing: f64) -> Complex64 {
    Complex64::new(
        diff_sq(omega_m, omega) + 0.25 * dephasing * dephasing,
        omega * dephasing,
    )
}

/// `r = iω(γ_m − Γ)/((ω_m² − ω²) + iωΓ)`.
pub fn r_small(omega: f64, omega_m: f64, gamma_m: f64, dephasing: f64) -> Complex64 {
    Complex64::new(0.0, omega * (gamma_m - dephasing))
        / Complex64::new(diff_sq(omega_m, omega), omega * dephasing)
}

/// `R` in the representation selected by the parameters.
pub fn r_ratio(omega: f64, params: &SensorParams) -> Complex64 {
    let (wm, gm, gam) = (
        params.mechanical.omega_m,
        params.mechanical.gamma_m,
        params.atomic.dephasing,
    );
    match params.options.r_form {
        RForm::HighQ => -(1.0 + r_small(omega, wm, gm, gam)),
        RForm::ExactRatio => {
            -Complex64::new(diff_sq(wm, omega), omega * gm) / atomic_denominator(omega, wm, gam)
        }
    }
}

/// `g² + G²R`, evaluated so that it vanishes exactly at perfect matching.
fn matching_residual(omega: f64, params: &SensorParams) -> Complex64 {
    let (g, big_g) = (params.coupling_g, params.atomic.coupling);
    let (wm, gm, gam) = (
        params.mechanical.omega_m,
        params.mechanical.gamma_m,
        params.atomic.dephasing,
    );
    let dg2 = diff_sq(g, big_g);
    match params.options.r_form {
        RForm::HighQ => dg2 - big_g * big_g * r_small(omega, wm, gm, gam),
        RForm::ExactRatio => {
            // g²D_d − G²D_m with D_d, D_m the atomic and mechanical denominators.
            let re = dg2 * diff_sq(wm, omega) + 0.25 * g * g * gam * gam;
            let im = omega * (g * g * (gam - gm) + dg2 * gm);
            Complex64::new(re, im) / atomic_denominator(omega, wm, gam)
        }
    }
}

/// `g²χ_m + G²χ_d`, the atomic-plus-mechanical load on the cavity.
pub fn atomic_load(omega: f64, params: &SensorParams) -> Complex64 {
    let m = &params.mechanical;
    chi_m(omega, m.omega_m, m.gamma_m) * matching_residual(omega, params)
}

/// Modified cavity susceptibility `χ'_a`.
///
/// `1/χ'_a = 1/χ_a − χ_a Δ_c (g²χ_m + G²χ_d − Δ_c)`. At perfect matching the
/// load vanishes identically and this is `(1/χ_a + χ_a Δ_c²)⁻¹`.
pub fn chi_a_eff(omega: f64, params: &SensorParams) -> ComplexResponse {
    let ca = chi_a(omega, params.cavity.kappa);
    let d = params.cavity.detuning;
    if d == 0.0 {
        return ca;
    }
    (ca.inv() - ca * d * (atomic_load(omega, params) - d)).inv()
}

/// `(1/χ_a + χ_a Δ_c²)⁻¹`.
pub fn chi_a_eff_cqnc(omega: f64, kappa: f64, detuning: f64) -> ComplexResponse {
    let ca = chi_a(omega, kappa);
    (ca.inv() + ca * detuning * detuning).inv()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchFunctions {
    pub r: Complex64,
    pub big_r: Complex64,
    /// `1 + (G²/g²) R`.
    pub backaction: Complex64,
    pub z: Complex64,
    pub a: Complex64,
}

pub fn mismatch_functions(omega: f64, params: &SensorParams) -> Result<MismatchFunctions> {
    let g = params.coupling_g;
    if !(g > 0.0) {
        return Err(Error::Domain(
            "mismatch functions need g > 0 (A and 1 + (G/g)^2 R divide by g)".into(),
        ));
    }
    let (wm, gm, gam) = (
        params.mechanical.omega_m,
        params.mechanical.gamma_m,
        params.atomic.dephasing,
    );
    let kappa = params.cavity.kappa;
    let big_r = r_ratio(omega, params);
    let ca = chi_a(omega, kappa);
    let cae = chi_a_eff(omega, params);
    Ok(MismatchFunctions {
        r: r_small(omega, wm, gm, gam),
        big_r,
        backaction: matching_residual(omega, params) / (g * g),
        z: ca * (1.0 - (kappa * cae.conj()).inv()),
        a: big_r * (params.atomic.coupling / g) * (gam / gm).sqrt(),
    })
}

/// Compares the literal ratio `χ_d/χ_m` with `−(1 + r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioDiagnostic {
    pub exact: Complex64,
    pub high_q: Complex64,
    /// `|χ_d/χ_m + 1 + r|`, of order `Γ²/ω_m²` away from resonance.
    pub deviation: f64,
}

pub fn exact_ratio_diagnostic(omega: f64, params: &SensorParams) -> RatioDiagnostic {
    let (wm, gm, gam) = (
        params.mechanical.omega_m,
        params.mechanical.gamma_m,
        params.atomic.dephasing,
    );
    let exact = chi_d(omega, wm, gam) / chi_m(omega, wm, gm);
    let high_q = -(1.0 + r_small(omega, wm, gm, gam));
    RatioDiagnostic {
        exact,
        high_q,
        deviation: (exact - high_q).norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hz;
    use crate::testutil::fig2_params;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(a.norm())
    }

    #[test]
    fn chi_a_examples() {
        let k = hz(1e6);
        assert_eq!(chi_a(0.0, k), Complex64::new(2.0 / k, 0.0));
        assert!((chi_a(k / 2.0, k).norm() - 2f64.sqrt() / k).abs() < 1e-20);
        assert!(close(chi_a(-3.0e5, k), chi_a(3.0e5, k).conj(), 1e-15));
    }

    #[test]
    fn chi_m_examples() {
        let (wm, gm) = (hz(3e5), hz(0.03));
        assert!(close(chi_m(wm, wm, gm), Complex64::new(0.0, -1.0 / gm), 1e-15));
        assert!(close(chi_m(0.0, wm, gm), Complex64::new(1.0 / wm, 0.0), 1e-15));
        let peak = chi_m(wm, wm, gm).norm_sqr();
        for s in [-1.0, 1.0] {
            let half = chi_m(wm + s * gm / 2.0, wm, gm).norm_sqr();
            assert!((half / peak - 0.5).abs() < 1e-6, "{}", half / peak);
        }
    }

    #[test]
    fn chi_d_examples() {
        let (wm, gm) = (hz(3e5), hz(0.03));
        assert!(close(chi_d(0.0, wm, 1e-9), -chi_m(0.0, wm, gm), 1e-15));
        let expect = -wm / Complex64::new(gm * gm / 4.0, wm * gm);
        assert!(close(chi_d(wm, wm, gm), expect, 1e-15));
        let w = 1.05 * wm;
        let rel = (chi_d(w, wm, gm) + chi_m(w, wm, gm)).norm() / chi_m(w, wm, gm).norm();
        assert!(rel < 10.0 * (gm / wm).powi(2));
    }

    #[test]
    fn chi_a_eff_examples() {
        let p = fig2_params().with_coupling(5.5e6).unwrap().cqnc_matched().unwrap();
        let w = 1.01 * p.mechanical.omega_m;
        assert_eq!(chi_a_eff(w, &p), chi_a(w, p.cavity.kappa));

        let k = p.cavity.kappa;
        let pd = p.with_detuning(k).unwrap();
        let cq = chi_a_eff_cqnc(w, k, k);
        assert!(close(chi_a_eff(w, &pd), cq, 1e-14));
        let pe = pd.with_r_form(RForm::ExactRatio);
        let eps = (p.mechanical.gamma_m / p.mechanical.omega_m).powi(2);
        let d = (chi_a_eff(w, &pe) - cq).norm() / cq.norm();
        assert!(d < 1e4 * eps, "{d:e}");

        let free = pd.with_coupling(0.0).unwrap().with_atoms(0.0, p.atomic.dephasing).unwrap();
        assert!(close(chi_a_eff(w, &free), chi_a_eff_cqnc(w, k, k), 1e-15));
    }

    #[test]
    fn cqnc_identity_and_static_r() {
        let p = fig2_params().with_coupling(5.5e6).unwrap().cqnc_matched().unwrap();
        for w in [0.0, 1.0e5, p.mechanical.omega_m, 3.0e6] {
            let f = mismatch_functions(w, &p).unwrap();
            assert_eq!(f.r, Complex64::new(0.0, 0.0));
            assert_eq!(f.big_r, Complex64::new(-1.0, 0.0));
            assert_eq!(f.backaction, Complex64::new(0.0, 0.0));
        }
        let q = p.with_atoms(p.coupling_g, 1.5 * p.mechanical.gamma_m).unwrap();
        assert_eq!(r_small(0.0, q.mechanical.omega_m, q.mechanical.gamma_m, q.atomic.dephasing).norm(), 0.0);
    }

    #[test]
    fn r_at_resonance_with_decay_mismatch() {
        let p = fig2_params();
        let (wm, gm) = (p.mechanical.omega_m, p.mechanical.gamma_m);
        // At ω = ω_m the real part of the denominator vanishes: r = (γ_m − Γ)/Γ.
        let r = r_small(wm, wm, gm, 1.5 * gm);
        assert!(close(r, Complex64::new(-1.0 / 3.0, 0.0), 1e-15), "{r}");
    }

    #[test]
    fn a_requires_coupling() {
        let p = fig2_params();
        assert!(matches!(mismatch_functions(1.0, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn ratio_diagnostic_is_second_order() {
        let p = fig2_params();
        let d = exact_ratio_diagnostic(0.9 * p.mechanical.omega_m, &p);
        assert!(d.deviation > 0.0);
        assert!(d.deviation < 1e-10);
        let pe = p.with_r_form(RForm::ExactRatio);
        assert!(close(r_ratio(1.2e6, &pe), exact_ratio_diagnostic(1.2e6, &p).exact, 1e-14));
    }

    #[test]
    fn chi_m_peak_location() {
        // Stronger damping so the shift of the peak is resolvable.
        let (wm, gm) = (1.0, 0.2);
        let peak = (wm * wm - gm * gm / 2.0_f64).sqrt();
        let at = chi_m(peak, wm, gm).norm_sqr();
        for dw in [-1e-3, 1e-3, -1e-2, 1e-2] {
            assert!(chi_m(peak + dw, wm, gm).norm_sqr() < at);
        }
    }
}
