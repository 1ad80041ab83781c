//! Closed-form force-noise spectra and reference limits.
//!
//! Every value is dimensionless, in units of `ħ m ω_m γ_m` per Hz; multiply by
//! [`si_scale_factor`](crate::model::si_scale_factor) for N²/Hz. All spectra
//! are symmetrized in frequency, so only even-in-ω pieces survive.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{thermal_term, MechanicalParams, SensorParams, SqueezingParams};
use crate::response::{chi_a, chi_a_eff, inv_chi_m, inv_chi_m_norm_sqr, mismatch_functions};

/// A force-noise spectrum split into its physical contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumBreakdown {
    pub total: f64,
    pub thermal: f64,
    /// Measurement (shot) noise of the phase quadrature.
    pub field: f64,
    /// Radiation-pressure backaction left over after cancellation.
    pub backaction: f64,
    pub atomic: f64,
    /// Cross-correlation between shot noise and backaction; may be negative.
    pub interference: f64,
}

impl SpectrumBreakdown {
    pub fn from_parts(thermal: f64, field: f64, backaction: f64, atomic: f64, interference: f64) -> Self {
        SpectrumBreakdown {
            total: thermal + field + backaction + atomic + interference,
            thermal,
            field,
            backaction,
            atomic,
            interference,
        }
    }

    /// Every component NaN, used for points that could not be evaluated.
    pub fn nan() -> Self {
        Self::from_parts(f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    }

    /// Total non-negative; the split itself is not clamped.
    pub fn is_physical(&self) -> bool {
        self.total >= 0.0
    }

    pub fn components(&self) -> [f64; 6] {
        [
            self.total,
            self.thermal,
            self.field,
            self.backaction,
            self.atomic,
            self.interference,
        ]
    }
}

/// Relative deviations from perfect matching of the atomic ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MismatchSpec {
    /// `(G − g)/g`.
    pub coupling_mismatch: f64,
    /// `(Γ − γ_m)/γ_m`.
    pub decay_mismatch: f64,
}

impl MismatchSpec {
    pub fn new(coupling_mismatch: f64, decay_mismatch: f64) -> Result<Self> {
        if !(coupling_mismatch >= -1.0) || !coupling_mismatch.is_finite() {
            return Err(Error::invalid("coupling_mismatch", "must be finite and >= -1 (G >= 0)"));
        }
        if !(decay_mismatch > -1.0) || !decay_mismatch.is_finite() {
            return Err(Error::invalid("decay_mismatch", "must be finite and > -1 (Gamma > 0)"));
        }
        Ok(MismatchSpec {
            coupling_mismatch,
            decay_mismatch,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coupling_mismatch == 0.0 && self.decay_mismatch == 0.0
    }

    /// Sets `G = (1 + ε) g` and `Γ = (1 + δ) γ_m`.
    pub fn apply(&self, params: &SensorParams) -> Result<SensorParams> {
        let spec = Self::new(self.coupling_mismatch, self.decay_mismatch)?;
        params.with_atoms(
            (1.0 + spec.coupling_mismatch) * params.coupling_g,
            (1.0 + spec.decay_mismatch) * params.mechanical.gamma_m,
        )
    }
}

fn require_coupling(params: &SensorParams) -> Result<f64> {
    let g = params.coupling_g;
    if g > 0.0 {
        Ok(g)
    } else {
        Err(Error::Domain(format!(
            "force estimator needs g > 0 (it divides by g), got g = {g}"
        )))
    }
}

fn thermal(params: &SensorParams) -> f64 {
    thermal_term(&params.mechanical, params.options.thermal)
}

/// General spectrum for arbitrary detuning, matching and squeezing.
///
/// The backaction prefactor keeps the full cavity filter `κ g² |χ_a|²/γ_m`
/// rather than its `κ ≫ ω` limit.
pub fn spectrum_exact(omega: f64, params: &SensorParams, squeezing: &SqueezingParams) -> Result<SpectrumBreakdown> {
    let g = require_coupling(params)?;
    let (wm, gm) = (params.mechanical.omega_m, params.mechanical.gamma_m);
    let (kappa, delta) = (params.cavity.kappa, params.cavity.detuning);
    let gam = params.atomic.dephasing;
    let n = squeezing.n_sq();
    let (re_m, im_m) = (squeezing.re_m(), squeezing.im_m());

    let f = mismatch_functions(omega, params)?;
    let ca2 = chi_a(omega, kappa).norm_sqr();
    let cae = chi_a_eff(omega, params);
    let inv_cm = inv_chi_m(omega, wm, gm);
    let inv_cm_conj = inv_cm.conj();
    let n_minus = n + 0.5 - re_m;
    let n_plus = n + 0.5 + re_m;

    let k = kappa / (g * g * gm) * inv_chi_m_norm_sqr(omega, wm, gm);
    let shot_factor = (1.0 - (kappa * cae).inv()).norm_sqr();
    let field = k * (-2.0 * delta * im_m * f.z.re + shot_factor * n_minus + delta * delta * ca2 * n_plus);
    let backaction = kappa / gm * g * g * ca2 * n_plus * f.backaction.norm_sqr();
    let atomic = 0.5 * f.a.norm_sqr() * (1.0 + (omega * omega + 0.25 * gam * gam) / (wm * wm));
    let interference = kappa / gm * 2.0 * im_m * (f.z * f.backaction * inv_cm_conj).re
        - 2.0 * kappa / gm * delta * ca2 * n_plus * (f.backaction * inv_cm_conj).re;

    Ok(SpectrumBreakdown::from_parts(thermal(params), field, backaction, atomic, interference))
}

/// Resonant-cavity spectrum in the `κ ≫ ω` limit.
pub fn spectrum_zero_detuning(
    omega: f64,
    params: &SensorParams,
    squeezing: &SqueezingParams,
) -> Result<SpectrumBreakdown> {
    if params.cavity.detuning != 0.0 {
        return Err(Error::Domain(format!(
            "zero-detuning spectrum needs detuning = 0 (got {}); use spectrum_exact",
            params.cavity.detuning
        )));
    }
    let g = require_coupling(params)?;
    let (wm, gm) = (params.mechanical.omega_m, params.mechanical.gamma_m);
    let kappa = params.cavity.kappa;
    let gam = params.atomic.dephasing;
    let n = squeezing.n_sq();
    let (re_m, im_m) = (squeezing.re_m(), squeezing.im_m());
    let f = mismatch_functions(omega, params)?;

    let field = kappa / (4.0 * g * g * gm) * inv_chi_m_norm_sqr(omega, wm, gm) * (n + 0.5 - re_m);
    let backaction = 4.0 * g * g / (kappa * gm) * (n + 0.5 + re_m) * f.backaction.norm_sqr();
    let atomic = 0.5 * f.a.norm_sqr() * (1.0 + (omega * omega + 0.25 * gam * gam) / (wm * wm));
    let interference = 2.0 * im_m * (f.backaction * inv_chi_m(omega, wm, gm).conj()).re / gm;
    Ok(SpectrumBreakdown::from_parts(thermal(params), field, backaction, atomic, interference))
}

/// Squeezing contribution `Σ` to the shot-noise bracket at `y = Δ_c/κ`.
pub fn sigma_squeezing(n_sq: f64, m: Complex64, y: f64) -> f64 {
    let w = 0.5 + 2.0 * y * y;
    n_sq * w * w + 2.0 * y * m.im * (4.0 * y * y - 1.0) + m.re * (8.0 * y * y - w * w)
}

/// Spectrum with perfect cancellation in the `κ ≫ ω` limit.
///
/// Backaction and interference vanish; what remains is thermal noise, the
/// atomic floor and the shot-noise bracket `½(½ + 2y²)² + Σ`.
pub fn spectrum_cqnc(omega: f64, params: &SensorParams, squeezing: &SqueezingParams) -> Result<SpectrumBreakdown> {
    let g = require_coupling(params)?;
    let m = &params.mechanical;
    let y = params.normalized_detuning();
    let w = 0.5 + 2.0 * y * y;
    let mc = Complex64::new(squeezing.re_m(), squeezing.im_m());
    let bracket = 0.5 * w * w + sigma_squeezing(squeezing.n_sq(), mc, y);
    let field = params.cavity.kappa / (g * g * m.gamma_m) * inv_chi_m_norm_sqr(omega, m.omega_m, m.gamma_m) * bracket;
    Ok(SpectrumBreakdown::from_parts(
        thermal(params),
        field,
        0.0,
        cqnc_floor(omega, m),
        0.0,
    ))
}

/// Single resonant cavity without atoms or squeezing.
pub fn spectrum_standard(omega: f64, params: &SensorParams) -> Result<SpectrumBreakdown> {
    let g = require_coupling(params)?;
    let m = &params.mechanical;
    let kappa = params.cavity.kappa;
    let field = 0.125 * kappa / (g * g * m.gamma_m) * inv_chi_m_norm_sqr(omega, m.omega_m, m.gamma_m);
    let backaction = 2.0 * g * g / (kappa * m.gamma_m);
    Ok(SpectrumBreakdown::from_parts(thermal(params), field, backaction, 0.0, 0.0))
}

/// Single resonant cavity with squeezed-vacuum injection.
pub fn spectrum_standard_squeezed(
    omega: f64,
    params: &SensorParams,
    squeezing: &SqueezingParams,
) -> Result<SpectrumBreakdown> {
    let g = require_coupling(params)?;
    let m = &params.mechanical;
    let kappa = params.cavity.kappa;
    let n = squeezing.n_sq();
    let (re_m, im_m) = (squeezing.re_m(), squeezing.im_m());
    let inv_cm = inv_chi_m(omega, m.omega_m, m.gamma_m);
    let field = kappa / (4.0 * g * g * m.gamma_m) * inv_cm.norm_sqr() * (n + 0.5 - re_m);
    let backaction = 4.0 * g * g / (kappa * m.gamma_m) * (n + 0.5 + re_m);
    let interference = 2.0 * im_m * inv_cm.re / m.gamma_m;
    Ok(SpectrumBreakdown::from_parts(thermal(params), field, backaction, 0.0, interference))
}

/// Standard quantum limit `1/(γ_m |χ_m|)`.
pub fn sql(omega: f64, mech: &MechanicalParams) -> f64 {
    inv_chi_m_norm_sqr(omega, mech.omega_m, mech.gamma_m).sqrt() / mech.gamma_m
}

/// Quantum limit with squeezed input, `sqrt((2N+1)² − 4 Re M²) · S_SQL`.
pub fn sql_squeezed(omega: f64, mech: &MechanicalParams, n_sq: f64, re_m: f64) -> f64 {
    let a = 2.0 * n_sq + 1.0;
    ((a - 2.0 * re_m) * (a + 2.0 * re_m)).sqrt() * sql(omega, mech)
}

/// Ultimate limit `|Im χ_m| / (γ_m |χ_m|²)`, equal to `|Im(1/χ_m)|/γ_m`.
pub fn ultimate_limit(omega: f64, mech: &MechanicalParams) -> f64 {
    inv_chi_m(omega, mech.omega_m, mech.gamma_m).im.abs() / mech.gamma_m
}

/// Residual atomic noise under perfect cancellation.
pub fn cqnc_floor(omega: f64, mech: &MechanicalParams) -> f64 {
    0.5 * (1.0 + (omega * omega + 0.25 * mech.gamma_m * mech.gamma_m) / (mech.omega_m * mech.omega_m))
}

/// Ratio `ω/κ` controlling the error of the `κ ≫ ω` closed forms.
pub fn markov_ratio(omega: f64, kappa: f64) -> f64 {
    omega.abs() / kappa
}
