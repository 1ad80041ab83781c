//! Physical parameters, unit conventions, steady state and validity checks.
//!
//! Every rate is stored in angular units (rad/s). Configuration files quote
//! ordinary frequencies (Hz) and are converted on ingest with [`hz`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::response::RForm;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Effective membrane mass used when none is configured (10 ng).
pub const DEFAULT_MASS_KG: f64 = 1.0e-11;

/// Converts an ordinary frequency in Hz to an angular rate in rad/s.
pub fn hz(f: f64) -> f64 {
    std::f64::consts::TAU * f
}

fn require(name: &str, ok: bool, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(name, reason))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    require(name, v.is_finite(), "must be finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechanicalParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub mass: f64,
    pub temperature: f64,
}

impl MechanicalParams {
    pub fn new(omega_m: f64, gamma_m: f64, mass: f64, temperature: f64) -> Result<Self> {
        let p = MechanicalParams {
            omega_m,
            gamma_m,
            mass,
            temperature,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        for (n, v) in [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("mass", self.mass),
            ("temperature", self.temperature),
        ] {
            finite(n, v)?;
        }
        require("omega_m", self.omega_m > 0.0, "must be > 0")?;
        require("gamma_m", self.gamma_m > 0.0, "must be > 0")?;
        require("mass", self.mass > 0.0, "must be > 0")?;
        require("temperature", self.temperature >= 0.0, "must be >= 0")
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityParams {
    pub kappa: f64,
    pub kappa_in: f64,
    /// Effective detuning Δ_c.
    pub detuning: f64,
    pub g0: f64,
    pub wavelength: f64,
    pub power: f64,
}

impl CavityParams {
    pub fn new(
        kappa: f64,
        kappa_in: f64,
        detuning: f64,
        g0: f64,
        wavelength: f64,
        power: f64,
    ) -> Result<Self> {
        let p = CavityParams {
            kappa,
            kappa_in,
            detuning,
            g0,
            wavelength,
            power,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        for (n, v) in [
            ("kappa", self.kappa),
            ("kappa_in", self.kappa_in),
            ("detuning", self.detuning),
            ("g0", self.g0),
            ("wavelength", self.wavelength),
            ("power", self.power),
        ] {
            finite(n, v)?;
        }
        require("kappa", self.kappa > 0.0, "must be > 0")?;
        require(
            "kappa_in",
            self.kappa_in > 0.0 && self.kappa_in <= self.kappa,
            "must satisfy 0 < kappa_in <= kappa",
        )?;
        require("g0", self.g0 >= 0.0, "must be >= 0")?;
        require("power", self.power >= 0.0, "must be >= 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomicParams {
    /// Collective coupling G.
    pub coupling: f64,
    /// Collective dephasing Γ.
    pub dephasing: f64,
    /// Effective splitting ω_σ.
    pub transition_rate: f64,
}

impl AtomicParams {
    pub fn new(coupling: f64, dephasing: f64, transition_rate: f64) -> Result<Self> {
        let p = AtomicParams {
            coupling,
            dephasing,
            transition_rate,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        for (n, v) in [
            ("coupling_G", self.coupling),
            ("dephasing_Gamma", self.dephasing),
            ("transition_rate", self.transition_rate),
        ] {
            finite(n, v)?;
        }
        require("coupling_G", self.coupling >= 0.0, "must be >= 0")?;
        require("dephasing_Gamma", self.dephasing > 0.0, "must be > 0")?;
        require("transition_rate", self.transition_rate > 0.0, "must be > 0")
    }
}

/// Second moments of the injected squeezed vacuum in the white-noise limit.
///
/// Fields are private so that `|M|² ≤ N(N+1)` cannot be broken after
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingParams {
    n_sq: f64,
    m_mag: f64,
    phi: f64,
    bandwidth_x: f64,
    bandwidth_y: f64,
}

impl SqueezingParams {
    /// Purity is checked with a relative slack of a few ulps so that
    /// `m_mag = sqrt(n(n+1))` computed by the caller is accepted.
    pub fn new(n_sq: f64, m_mag: f64, phi: f64, bandwidth_x: f64, bandwidth_y: f64) -> Result<Self> {
        for (n, v) in [
            ("n_sq", n_sq),
            ("m_mag", m_mag),
            ("phi", phi),
            ("bandwidth_x", bandwidth_x),
            ("bandwidth_y", bandwidth_y),
        ] {
            if n == "bandwidth_x" || n == "bandwidth_y" {
                require(n, !v.is_nan(), "must not be NaN")?;
            } else {
                finite(n, v)?;
            }
        }
        require("n_sq", n_sq >= 0.0, "must be >= 0")?;
        require("m_mag", m_mag >= 0.0, "must be >= 0")?;
        let bound = (n_sq * (n_sq + 1.0)).sqrt();
        require(
            "m_mag",
            m_mag <= bound * (1.0 + 4.0 * f64::EPSILON),
            &format!("|M|^2 <= N(N+1) violated: |M| = {m_mag}, sqrt(N(N+1)) = {bound}"),
        )?;
        require("bandwidth_x", bandwidth_x >= 0.0, "must be >= 0")?;
        require(
            "bandwidth_y",
            bandwidth_y >= bandwidth_x,
            "must be >= bandwidth_x",
        )?;
        Ok(SqueezingParams {
            n_sq,
            m_mag: m_mag.min(bound),
            phi,
            bandwidth_x,
            bandwidth_y,
        })
    }

    /// Vacuum input, `N = M = 0`, with infinite OPO bandwidth.
    pub fn vacuum() -> Self {
        SqueezingParams {
            n_sq: 0.0,
            m_mag: 0.0,
            phi: 0.0,
            bandwidth_x: f64::INFINITY,
            bandwidth_y: f64::INFINITY,
        }
    }

    /// Pure squeezing, `|M| = sqrt(N(N+1))`, infinite bandwidth.
    pub fn pure(n_sq: f64, phi: f64) -> Result<Self> {
        Self::new(
            n_sq,
            (n_sq * (n_sq + 1.0)).sqrt(),
            phi,
            f64::INFINITY,
            f64::INFINITY,
        )
    }

    /// Pure squeezing from the squeeze factor: `N = sinh² r`, `|M| = sinh(2r)/2`.
    pub fn from_squeeze_factor(r: f64, phi: f64) -> Result<Self> {
        require("squeeze_r", r.is_finite() && r >= 0.0, "must be finite and >= 0")?;
        let n = r.sinh().powi(2);
        Self::new(n, (2.0 * r).sinh() / 2.0, phi, f64::INFINITY, f64::INFINITY)
    }

    pub fn with_bandwidths(self, bandwidth_x: f64, bandwidth_y: f64) -> Result<Self> {
        Self::new(self.n_sq, self.m_mag, self.phi, bandwidth_x, bandwidth_y)
    }

    pub fn with_phase(self, phi: f64) -> Result<Self> {
        Self::new(self.n_sq, self.m_mag, phi, self.bandwidth_x, self.bandwidth_y)
    }

    pub fn n_sq(&self) -> f64 {
        self.n_sq
    }
    pub fn m_mag(&self) -> f64 {
        self.m_mag
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn bandwidth_x(&self) -> f64 {
        self.bandwidth_x
    }
    pub fn bandwidth_y(&self) -> f64 {
        self.bandwidth_y
    }
    pub fn re_m(&self) -> f64 {
        self.m_mag * self.phi.cos()
    }
    pub fn im_m(&self) -> f64 {
        self.m_mag * self.phi.sin()
    }
    pub fn is_pure(&self) -> bool {
        let bound = (self.n_sq * (self.n_sq + 1.0)).sqrt();
        (bound - self.m_mag).abs() <= 8.0 * f64::EPSILON * bound.max(f64::MIN_POSITIVE)
    }
}

/// Which expression is used for the thermal force noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalModel {
    /// `n̄_m + 1/2` with the Bose factor.
    #[default]
    Exact,
    /// `k_B T / ħω_m`.
    HighTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    pub thermal: ThermalModel,
    pub r_form: RForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorParams {
    pub mechanical: MechanicalParams,
    pub cavity: CavityParams,
    pub atomic: AtomicParams,
    /// Linearized optomechanical coupling g.
    pub coupling_g: f64,
    pub options: ModelOptions,
}

impl SensorParams {
    pub fn new(
        mechanical: MechanicalParams,
        cavity: CavityParams,
        atomic: AtomicParams,
        coupling_g: f64,
    ) -> Result<Self> {
        let p = SensorParams {
            mechanical,
            cavity,
            atomic,
            coupling_g,
            options: ModelOptions::default(),
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        self.mechanical.check()?;
        self.cavity.check()?;
        self.atomic.check()?;
        finite("coupling_g", self.coupling_g)?;
        require("coupling_g", self.coupling_g >= 0.0, "must be >= 0")
    }

    pub fn with_options(mut self, options: ModelOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_r_form(mut self, r_form: RForm) -> Self {
        self.options.r_form = r_form;
        self
    }

    pub fn with_thermal(mut self, thermal: ThermalModel) -> Self {
        self.options.thermal = thermal;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        self.cavity.detuning = detuning;
        self.check()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, g: f64) -> Result<Self> {
        self.coupling_g = g;
        self.check()?;
        Ok(self)
    }

    pub fn with_atoms(mut self, coupling: f64, dephasing: f64) -> Result<Self> {
        self.atomic.coupling = coupling;
        self.atomic.dephasing = dephasing;
        self.check()?;
        Ok(self)
    }

    /// Perfect matching: `G = g`, `Γ = γ_m`.
    pub fn cqnc_matched(self) -> Result<Self> {
        let (g, gm) = (self.coupling_g, self.mechanical.gamma_m);
        self.with_atoms(g, gm)
    }

    pub fn is_cqnc_matched(&self) -> bool {
        self.atomic.coupling == self.coupling_g && self.atomic.dephasing == self.mechanical.gamma_m
    }

    /// `y = Δ_c / κ`.
    pub fn normalized_detuning(&self) -> f64 {
        self.cavity.detuning / self.cavity.kappa
    }
}

/// Bose occupation of the mechanical mode and its high-temperature proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalOccupation {
    pub n_bar: f64,
    /// `k_B T / ħω_m`.
    pub high_temperature: f64,
    /// Whether `k_B T/ħω_m` matches `n̄ + 1/2` within 1%.
    pub high_temperature_valid: bool,
}

pub fn thermal_number(mech: &MechanicalParams) -> ThermalOccupation {
    let kt = K_B * mech.temperature;
    let quantum = HBAR * mech.omega_m;
    let (n_bar, high) = if kt == 0.0 {
        (0.0, 0.0)
    } else {
        (1.0 / (quantum / kt).exp_m1(), kt / quantum)
    };
    let exact = n_bar + 0.5;
    ThermalOccupation {
        n_bar,
        high_temperature: high,
        high_temperature_valid: (high - exact).abs() <= 0.01 * exact,
    }
}

/// Thermal force-noise term in units of `ħ m ω_m γ_m`.
pub fn thermal_term(mech: &MechanicalParams, model: ThermalModel) -> f64 {
    let occ = thermal_number(mech);
    match model {
        ThermalModel::Exact => occ.n_bar + 0.5,
        ThermalModel::HighTemperature => occ.high_temperature,
    }
}

/// Multiplies a dimensionless spectrum into N²/Hz.
pub fn si_scale_factor(mech: &MechanicalParams) -> f64 {
    HBAR * mech.mass * mech.omega_m * mech.gamma_m
}

/// Drive rate `E_L = sqrt(P κ_in / ħω_L)`.
pub fn drive_amplitude(cavity: &CavityParams) -> Result<f64> {
    if !(cavity.wavelength > 0.0) || !cavity.wavelength.is_finite() {
        return Err(Error::Domain(format!(
            "laser wavelength must be positive, got {}",
            cavity.wavelength
        )));
    }
    if !(cavity.power >= 0.0) {
        return Err(Error::Domain(format!(
            "laser power must be >= 0, got {}",
            cavity.power
        )));
    }
    let photon_energy = HBAR * std::f64::consts::TAU * C_LIGHT / cavity.wavelength;
    Ok((cavity.power * cavity.kappa_in / photon_energy).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Closed,
    FixedPoint,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub amplitude: f64,
    /// `|α |κ/2 + i(Δ_c + c)| − E_L|` at the returned amplitude.
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

const SS_RTOL: f64 = 1e-12;
const SS_MAX_FIXED: usize = 500;
const SS_MAX_BISECT: usize = 400;

/// Frequency pull `c = G² ω_m / (Γ²/4 + ω_m²)` exerted by the atoms.
fn atomic_pull(coupling: f64, dephasing: f64, omega_m: f64) -> f64 {
    coupling * coupling * omega_m / (0.25 * dephasing * dephasing + omega_m * omega_m)
}

/// Solves `α |κ/2 + i(Δ_c + pull(α))| = E_L` for real `α ≥ 0`.
///
/// The phase of the intracavity field is absorbed into the drive, so the
/// returned amplitude is real. `pull` may depend on α when the atomic
/// coupling tracks g.
fn solve_amplitude(kappa: f64, detuning: f64, e_l: f64, pull: impl Fn(f64) -> f64) -> Result<SteadyState> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be > 0, got {kappa}")));
    }
    if !(e_l >= 0.0) || !e_l.is_finite() {
        return Err(Error::Domain(format!("drive rate must be finite and >= 0, got {e_l}")));
    }
    if e_l == 0.0 {
        return Ok(SteadyState {
            amplitude: 0.0,
            residual: 0.0,
            iterations: 0,
            method: SolveMethod::Closed,
        });
    }
    let f = |a: f64| a * (0.5 * kappa).hypot(detuning + pull(a)) - e_l;
    let tol = SS_RTOL * e_l;
    let hi_bound = 2.0 * e_l / kappa;

    let mut a = hi_bound;
    for it in 1..=SS_MAX_FIXED {
        let target = e_l / (0.5 * kappa).hypot(detuning + pull(a));
        a = 0.5 * (a + target);
        let r = f(a);
        if r.abs() <= tol {
            return Ok(SteadyState {
                amplitude: a,
                residual: r.abs(),
                iterations: it,
                method: SolveMethod::FixedPoint,
            });
        }
        if !a.is_finite() {
            break;
        }
    }

    // f(0) = −E_L < 0 and f(2E_L/κ) ≥ 0, so the bracket always holds.
    let (mut lo, mut hi) = (0.0_f64, hi_bound);
    let mut best = (hi, f(hi).abs());
    for it in 1..=SS_MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        let r = f(mid);
        if r.abs() < best.1 {
            best = (mid, r.abs());
        }
        if r.abs() <= tol {
            return Ok(SteadyState {
                amplitude: mid,
                residual: r.abs(),
                iterations: it,
                method: SolveMethod::Bisection,
            });
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::SteadyState {
        residual: best.1,
        iterations: SS_MAX_FIXED + SS_MAX_BISECT,
    })
}

/// Steady-state amplitude with the atomic coupling G held fixed.
pub fn steady_state_amplitude(params: &SensorParams, e_l: f64) -> Result<SteadyState> {
    let pull = atomic_pull(
        params.atomic.coupling,
        params.atomic.dephasing,
        params.mechanical.omega_m,
    );
    solve_amplitude(params.cavity.kappa, params.cavity.detuning, e_l, |_| pull)
}

/// Steady-state amplitude when the atomic coupling tracks the optical one,
/// `G = (1 + ε) · 2 g0 α`.
pub fn steady_state_amplitude_matched(
    params: &SensorParams,
    e_l: f64,
    coupling_mismatch: f64,
) -> Result<SteadyState> {
    let k = (1.0 + coupling_mismatch) * 2.0 * params.cavity.g0;
    let (gam, wm) = (params.atomic.dephasing, params.mechanical.omega_m);
    solve_amplitude(params.cavity.kappa, params.cavity.detuning, e_l, |a| {
        atomic_pull(k * a, gam, wm)
    })
}

/// `g = 2 g0 α_s` for the configured drive, with G held fixed.
pub fn coupling_from_power(params: &SensorParams) -> Result<f64> {
    let e_l = drive_amplitude(&params.cavity)?;
    let ss = steady_state_amplitude(params, e_l)?;
    Ok(2.0 * params.cavity.g0 * ss.amplitude)
}

/// `(g, G)` for the configured drive when `G = (1 + ε) g`.
pub fn matched_coupling_from_power(params: &SensorParams, coupling_mismatch: f64) -> Result<(f64, f64)> {
    let e_l = drive_amplitude(&params.cavity)?;
    let ss = steady_state_amplitude_matched(params, e_l, coupling_mismatch)?;
    let g = 2.0 * params.cavity.g0 * ss.amplitude;
    Ok((g, (1.0 + coupling_mismatch) * g))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub ratio: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
    /// `|M|² = N(N+1)` within rounding.
    pub pure_squeezing: bool,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// OPO bandwidths must exceed `max(ω_m, κ)` by at least this factor.
pub const WHITE_NOISE_MIN_RATIO: f64 = 10.0;
/// `Γ/ω_m` and `γ_m/ω_m` must stay below this.
pub const HIGH_Q_MAX_RATIO: f64 = 1e-2;
/// Minimum mechanical quality factor.
pub const MIN_QUALITY_FACTOR: f64 = 100.0;
/// `|ω_σ − ω_m| / ω_m` must stay below this for the rotating-wave picture.
pub const RWA_MAX_DETUNING: f64 = 1e-2;

pub fn validate(params: &SensorParams, squeezing: &SqueezingParams) -> ValidityReport {
    let wm = params.mechanical.omega_m;
    let scale = wm.max(params.cavity.kappa);
    let b_min = squeezing.bandwidth_x().min(squeezing.bandwidth_y());
    let white = b_min / scale;
    let gamma_ratio = params.atomic.dephasing / wm;
    let q = params.mechanical.quality_factor();
    let rwa = (params.atomic.transition_rate - wm).abs() / wm;
    let bound = squeezing.n_sq() * (squeezing.n_sq() + 1.0);
    let purity = if bound > 0.0 {
        squeezing.m_mag().powi(2) / bound
    } else {
        1.0
    };

    let checks = vec![
        ValidityCheck {
            name: "white_noise_limit",
            passed: white >= WHITE_NOISE_MIN_RATIO,
            ratio: white,
            threshold: WHITE_NOISE_MIN_RATIO,
            detail: "min(b_x, b_y) / max(omega_m, kappa) >= threshold".into(),
        },
        ValidityCheck {
            name: "atomic_high_q",
            passed: gamma_ratio <= HIGH_Q_MAX_RATIO,
            ratio: gamma_ratio,
            threshold: HIGH_Q_MAX_RATIO,
            detail: "Gamma / omega_m <= threshold".into(),
        },
        ValidityCheck {
            name: "mechanical_quality_factor",
            passed: q >= MIN_QUALITY_FACTOR,
            ratio: q,
            threshold: MIN_QUALITY_FACTOR,
            detail: "omega_m / gamma_m >= threshold".into(),
        },
        ValidityCheck {
            name: "rotating_wave",
            passed: rwa <= RWA_MAX_DETUNING,
            ratio: rwa,
            threshold: RWA_MAX_DETUNING,
            detail: "|omega_sigma - omega_m| / omega_m <= threshold".into(),
        },
        ValidityCheck {
            name: "squeezing_purity_bound",
            passed: purity <= 1.0 + 8.0 * f64::EPSILON,
            ratio: purity,
            threshold: 1.0,
            detail: "|M|^2 / N(N+1) <= threshold".into(),
        },
    ];
    ValidityReport {
        checks,
        pure_squeezing: squeezing.is_pure(),
    }
}
