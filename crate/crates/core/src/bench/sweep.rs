//! Sweep specification, per-point resolution and parallel evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    coupling_from_power, matched_coupling_from_power, validate, AtomicParams, CavityParams, MechanicalParams,
    ModelOptions, SensorParams, SqueezingParams, ValidityReport,
};
use crate::optimal::phi_opt;
use crate::oracle::{stability, Oracle};
use crate::spectra::{
    cqnc_floor, markov_ratio, spectrum_cqnc, spectrum_exact, spectrum_standard_squeezed, spectrum_zero_detuning,
    sql, sql_squeezed, ultimate_limit, MismatchSpec, SpectrumBreakdown,
};

/// Closed forms beyond this `ω/κ` are flagged in the advisories.
const MARKOV_ADVISORY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// `ω/ω_m`.
    Frequency,
    /// `(g/g0)²`.
    PowerRatio,
    CouplingMismatch,
    DecayMismatch,
    SqueezingN,
}

impl AxisKind {
    pub fn column_name(self) -> &'static str {
        match self {
            AxisKind::Frequency => "omega_over_omega_m",
            AxisKind::PowerRatio => "g_over_g0_sq",
            AxisKind::CouplingMismatch => "coupling_mismatch",
            AxisKind::DecayMismatch => "decay_mismatch",
            AxisKind::SqueezingN => "n_sq",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub kind: AxisKind,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn check(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::invalid("sweep.count", format!("must be >= 2, got {}", self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::invalid(
                "sweep.min",
                format!("need finite min < max, got [{}, {}]", self.min, self.max),
            ));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(Error::invalid("sweep.min", "log spacing needs min > 0"));
        }
        if self.kind == AxisKind::Frequency && !(self.min > 0.0) {
            return Err(Error::invalid("sweep.min", "frequency axis needs min > 0"));
        }
        Ok(())
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Exact,
    ZeroDetuning,
    Cqnc,
    /// Atom-free resonant cavity with squeezed input.
    Standard,
    Oracle,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::ZeroDetuning => "zero_detuning",
            Engine::Cqnc => "cqnc",
            Engine::Standard => "standard",
            Engine::Oracle => "oracle",
        }
    }

    fn assumes_markov(self) -> bool {
        matches!(self, Engine::ZeroDetuning | Engine::Cqnc | Engine::Standard)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlay {
    Sql,
    SqlSqueezed,
    Ultimate,
    CqncFloor,
}

impl Overlay {
    pub fn name(self) -> &'static str {
        match self {
            Overlay::Sql => "sql",
            Overlay::SqlSqueezed => "sql_squeezed",
            Overlay::Ultimate => "ultimate",
            Overlay::CqncFloor => "cqnc_floor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CouplingSource {
    /// Steady state of the configured drive.
    FromPower,
    Fixed { g: f64 },
    /// `g = g0 √x`.
    PowerRatio { g_over_g0_sq: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AtomicTracking {
    /// `G = (1 + ε) g`, `Γ = (1 + δ) γ_m`.
    Matched(MismatchSpec),
    Fixed { coupling: f64, dephasing: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomicSetup {
    pub enabled: bool,
    pub tracking: AtomicTracking,
    pub transition_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseChoice {
    Fixed(f64),
    /// `φ_opt(Δ_c/κ)` for the resolved detuning.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingSpec {
    pub n_sq: f64,
    /// `None` means pure squeezing.
    pub m_mag: Option<f64>,
    pub phase: PhaseChoice,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
}

/// Unresolved parameter template; couplings may still depend on the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub mechanical: MechanicalParams,
    pub cavity: CavityParams,
    pub coupling: CouplingSource,
    pub atoms: AtomicSetup,
    pub squeezing: SqueezingSpec,
    pub options: ModelOptions,
}

impl Scenario {
    pub fn resolve(&self) -> Result<(SensorParams, SqueezingParams)> {
        let gm = self.mechanical.gamma_m;
        let dephasing = match self.atoms.tracking {
            AtomicTracking::Matched(m) => (1.0 + m.decay_mismatch) * gm,
            AtomicTracking::Fixed { dephasing, .. } => dephasing,
        };
        let base = SensorParams::new(
            self.mechanical,
            self.cavity,
            AtomicParams::new(0.0, dephasing, self.atoms.transition_rate)?,
            0.0,
        )?
        .with_options(self.options);
        let g0 = self.cavity.g0;
        let (g, big_g) = match (self.atoms.enabled, self.atoms.tracking, self.coupling) {
            (false, _, CouplingSource::FromPower) => (coupling_from_power(&base)?, 0.0),
            (false, _, CouplingSource::Fixed { g }) => (g, 0.0),
            (false, _, CouplingSource::PowerRatio { g_over_g0_sq }) => (g0 * g_over_g0_sq.sqrt(), 0.0),
            (true, AtomicTracking::Matched(m), CouplingSource::FromPower) => {
                matched_coupling_from_power(&base, m.coupling_mismatch)?
            }
            (true, AtomicTracking::Matched(m), CouplingSource::Fixed { g }) => (g, (1.0 + m.coupling_mismatch) * g),
            (true, AtomicTracking::Matched(m), CouplingSource::PowerRatio { g_over_g0_sq }) => {
                let g = g0 * g_over_g0_sq.sqrt();
                (g, (1.0 + m.coupling_mismatch) * g)
            }
            (true, AtomicTracking::Fixed { coupling, .. }, CouplingSource::FromPower) => {
                (coupling_from_power(&base.with_atoms(coupling, dephasing)?)?, coupling)
            }
            (true, AtomicTracking::Fixed { coupling, .. }, CouplingSource::Fixed { g }) => (g, coupling),
            (true, AtomicTracking::Fixed { coupling, .. }, CouplingSource::PowerRatio { g_over_g0_sq }) => {
                (g0 * g_over_g0_sq.sqrt(), coupling)
            }
        };
        let params = base.with_coupling(g)?.with_atoms(big_g, dephasing)?;

        let s = &self.squeezing;
        let phi = match s.phase {
            PhaseChoice::Fixed(p) => p,
            PhaseChoice::Optimal => phi_opt(params.normalized_detuning()),
        };
        let m_mag = s.m_mag.unwrap_or_else(|| (s.n_sq * (s.n_sq + 1.0)).sqrt());
        let sq = SqueezingParams::new(s.n_sq, m_mag, phi, s.bandwidth_x, s.bandwidth_y)?;
        Ok((params, sq))
    }

    fn set_mismatch(&mut self, coupling: Option<f64>, decay: Option<f64>) -> Result<()> {
        match &mut self.atoms.tracking {
            AtomicTracking::Matched(m) => {
                *m = MismatchSpec::new(
                    coupling.unwrap_or(m.coupling_mismatch),
                    decay.unwrap_or(m.decay_mismatch),
                )?;
                Ok(())
            }
            AtomicTracking::Fixed { .. } => Err(Error::Config(
                "mismatch overrides need atoms that track the optical coupling (no atomic.coupling_hz)".into(),
            )),
        }
    }

    fn set_n_sq(&mut self, n: f64) {
        self.squeezing.n_sq = n;
        self.squeezing.m_mag = None;
    }
}

/// Per-curve changes to the shared scenario. Setting `n_sq` also resets
/// `|M|` to the pure value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CurveOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_over_kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_mismatch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_mismatch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSpec {
    pub label: String,
    pub engine: Engine,
    pub overrides: CurveOverrides,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub name: String,
    pub axis: AxisSpec,
    /// rad/s; used by every axis except frequency.
    pub probe_omega: f64,
    pub scenario: Scenario,
    pub curves: Vec<CurveSpec>,
    pub overlays: Vec<Overlay>,
    /// Fully merged configuration document, echoed into the metadata.
    pub document: toml::Table,
}

impl SweepSpec {
    pub fn check(&self) -> Result<()> {
        self.axis.check()?;
        if self.curves.is_empty() {
            return Err(Error::Config("sweep has no curves".into()));
        }
        for (i, c) in self.curves.iter().enumerate() {
            if c.label.is_empty() {
                return Err(Error::Config(format!("curve {i} has an empty label")));
            }
            if self.curves[..i].iter().any(|d| d.label == c.label) {
                return Err(Error::Config(format!("duplicate curve label `{}`", c.label)));
            }
            self.curve_scenario(c)?;
        }
        Ok(())
    }

    fn curve_scenario(&self, curve: &CurveSpec) -> Result<Scenario> {
        let mut s = self.scenario;
        let o = &curve.overrides;
        if let Some(n) = o.n_sq {
            s.set_n_sq(n);
        }
        if let Some(y) = o.detuning_over_kappa {
            s.cavity.detuning = y * s.cavity.kappa;
        }
        if o.coupling_mismatch.is_some() || o.decay_mismatch.is_some() {
            s.set_mismatch(o.coupling_mismatch, o.decay_mismatch)?;
        }
        if let Some(a) = o.atoms {
            s.atoms.enabled = a;
        }
        if let Some(p) = o.phase {
            s.squeezing.phase = p;
        }
        Ok(s)
    }

    /// Scenario and probe frequency for one axis value.
    fn point(&self, template: &Scenario, x: f64) -> Result<(Scenario, f64)> {
        let mut s = *template;
        let omega = match self.axis.kind {
            AxisKind::Frequency => return Ok((s, x * s.mechanical.omega_m)),
            AxisKind::PowerRatio => {
                s.coupling = CouplingSource::PowerRatio { g_over_g0_sq: x };
                self.probe_omega
            }
            AxisKind::CouplingMismatch => {
                s.set_mismatch(Some(x), None)?;
                self.probe_omega
            }
            AxisKind::DecayMismatch => {
                s.set_mismatch(None, Some(x))?;
                self.probe_omega
            }
            AxisKind::SqueezingN => {
                s.set_n_sq(x);
                self.probe_omega
            }
        };
        Ok((s, omega))
    }
}

/// A resolved point set ready for evaluation by one engine.
struct Prepared {
    engine: Engine,
    params: SensorParams,
    squeezing: SqueezingParams,
    oracle: Option<Oracle>,
    unstable: bool,
}

impl Prepared {
    fn new(engine: Engine, params: SensorParams, squeezing: SqueezingParams) -> Result<Self> {
        let mismatch = |reason: String| Error::EngineMismatch {
            engine: engine.name().into(),
            reason,
        };
        let detuning = params.cavity.detuning;
        match engine {
            Engine::Cqnc if !params.is_cqnc_matched() => {
                return Err(mismatch(format!(
                    "closed form assumes perfect matching, got G = {:e}, g = {:e}, Gamma = {:e}, gamma_m = {:e}",
                    params.atomic.coupling, params.coupling_g, params.atomic.dephasing, params.mechanical.gamma_m
                )))
            }
            Engine::ZeroDetuning | Engine::Standard if detuning != 0.0 => {
                return Err(mismatch(format!("closed form needs detuning = 0, got {detuning:e}")))
            }
            Engine::Standard if params.atomic.coupling != 0.0 => {
                return Err(mismatch("closed form has no atoms; set atoms = false".into()))
            }
            _ => {}
        }
        let (oracle, unstable) = if engine == Engine::Oracle {
            (Some(Oracle::new(&params, &squeezing)?), !stability(&params).stable)
        } else {
            (None, false)
        };
        Ok(Prepared {
            engine,
            params,
            squeezing,
            oracle,
            unstable,
        })
    }

    /// `None` marks a flagged point.
    fn eval(&self, omega: f64) -> Result<Option<SpectrumBreakdown>> {
        let (p, s) = (&self.params, &self.squeezing);
        let b = match self.engine {
            Engine::Exact => spectrum_exact(omega, p, s)?,
            Engine::ZeroDetuning => spectrum_zero_detuning(omega, p, s)?,
            Engine::Cqnc => spectrum_cqnc(omega, p, s)?,
            Engine::Standard => spectrum_standard_squeezed(omega, p, s)?,
            Engine::Oracle => {
                if self.unstable {
                    return Ok(None);
                }
                let oracle = self.oracle.as_ref().expect("oracle engine prepared without oracle");
                match oracle.spectrum(omega) {
                    Ok(o) => o.breakdown(),
                    Err(e) if e.is_numeric() => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(Some(b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMetadata {
    pub label: String,
    pub engine: Engine,
    pub overrides: CurveOverrides,
    pub scenario: Scenario,
    /// Parameters with the curve overrides applied and the axis at its
    /// configured template value.
    pub resolved: SensorParams,
    pub squeezing: SqueezingParams,
    pub validity: ValidityReport,
    pub flagged: Vec<usize>,
    pub unphysical_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub code_version: &'static str,
    pub name: String,
    pub axis: AxisSpec,
    pub axis_column: &'static str,
    pub probe_omega: f64,
    pub overlays: Vec<Overlay>,
    pub config: serde_json::Value,
    pub validity: ValidityReport,
    pub curves: Vec<CurveMetadata>,
    pub advisories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub label: String,
    pub engine: Engine,
    pub points: Vec<SpectrumBreakdown>,
    pub flagged: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub axis: Vec<f64>,
    pub curves: Vec<CurveResult>,
    pub overlays: Vec<(Overlay, Vec<f64>)>,
}

pub const COMPONENTS: [&str; 6] = ["total", "thermal", "field", "backaction", "atomic", "interference"];

impl SweepResult {
    /// Column names in output order: axis, curve components, overlays.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![self.metadata.axis_column.to_owned()];
        let single = self.curves.len() == 1;
        for c in &self.curves {
            for comp in COMPONENTS {
                names.push(if single {
                    comp.to_owned()
                } else {
                    format!("{}.{comp}", c.label)
                });
            }
        }
        names.extend(self.overlays.iter().map(|(o, _)| o.name().to_owned()));
        names
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut cols = vec![self.axis.clone()];
        for c in &self.curves {
            for k in 0..COMPONENTS.len() {
                cols.push(c.points.iter().map(|b| b.components()[k]).collect());
            }
        }
        cols.extend(self.overlays.iter().map(|(_, v)| v.clone()));
        cols
    }

    pub fn curve(&self, label: &str) -> Option<&CurveResult> {
        self.curves.iter().find(|c| c.label == label)
    }
}

fn overlay_value(o: Overlay, omega: f64, mech: &MechanicalParams, sq: &SqueezingParams) -> f64 {
    match o {
        Overlay::Sql => sql(omega, mech),
        Overlay::SqlSqueezed => sql_squeezed(omega, mech, sq.n_sq(), sq.re_m()),
        Overlay::Ultimate => ultimate_limit(omega, mech),
        Overlay::CqncFloor => cqnc_floor(omega, mech),
    }
}

fn evaluate_curve(spec: &SweepSpec, curve: &CurveSpec, xs: &[f64]) -> Result<(CurveResult, CurveMetadata)> {
    let template = spec.curve_scenario(curve)?;
    let (params, squeezing) = template.resolve()?;
    let shared = if spec.axis.kind == AxisKind::Frequency {
        Some(Prepared::new(curve.engine, params, squeezing)?)
    } else {
        None
    };
    let results: Vec<Option<SpectrumBreakdown>> = xs
        .par_iter()
        .map(|&x| -> Result<Option<SpectrumBreakdown>> {
            let (s, omega) = spec.point(&template, x)?;
            match &shared {
                Some(p) => p.eval(omega),
                None => {
                    let (pp, ss) = s.resolve()?;
                    Prepared::new(curve.engine, pp, ss)?.eval(omega)
                }
            }
        })
        .collect::<Result<_>>()?;
    let flagged: Vec<usize> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.is_none().then_some(i))
        .collect();
    let points: Vec<SpectrumBreakdown> = results
        .into_iter()
        .map(|r| r.unwrap_or_else(SpectrumBreakdown::nan))
        .collect();
    let unphysical_points = points.iter().filter(|b| b.total < 0.0).count();
    let meta = CurveMetadata {
        label: curve.label.clone(),
        engine: curve.engine,
        overrides: curve.overrides,
        scenario: template,
        resolved: params,
        squeezing,
        validity: validate(&params, &squeezing),
        flagged: flagged.clone(),
        unphysical_points,
    };
    Ok((
        CurveResult {
            label: curve.label.clone(),
            engine: curve.engine,
            points,
            flagged,
        },
        meta,
    ))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.check()?;
    let xs = spec.axis.values();
    let (base, base_sq) = spec.scenario.resolve()?;
    let mech = spec.scenario.mechanical;

    let mut curves = Vec::with_capacity(spec.curves.len());
    let mut curve_meta = Vec::with_capacity(spec.curves.len());
    for c in &spec.curves {
        let (r, m) = evaluate_curve(spec, c, &xs)?;
        curves.push(r);
        curve_meta.push(m);
    }

    let omegas: Vec<f64> = xs
        .iter()
        .map(|&x| match spec.axis.kind {
            AxisKind::Frequency => x * mech.omega_m,
            _ => spec.probe_omega,
        })
        .collect();
    let overlays = spec
        .overlays
        .iter()
        .map(|&o| (o, omegas.iter().map(|&w| overlay_value(o, w, &mech, &base_sq)).collect()))
        .collect();

    let mut advisories = Vec::new();
    let max_markov = omegas
        .iter()
        .map(|&w| markov_ratio(w, spec.scenario.cavity.kappa))
        .fold(0.0_f64, f64::max);
    let mut markov: Vec<&str> = curve_meta
        .iter()
        .filter(|m| m.engine.assumes_markov())
        .map(|m| m.engine.name())
        .collect();
    markov.sort_unstable();
    markov.dedup();
    if !markov.is_empty() && max_markov > MARKOV_ADVISORY {
        advisories.push(format!(
            "engine(s) {} assume kappa >> omega; max omega/kappa = {max_markov:.3}",
            markov.join(", ")
        ));
    }
    for m in &curve_meta {
        for f in m.validity.failures() {
            advisories.push(format!(
                "curve `{}`: validity check `{}` failed (ratio {:e}, threshold {:e})",
                m.label, f.name, f.ratio, f.threshold
            ));
        }
        if !m.flagged.is_empty() {
            advisories.push(format!(
                "curve `{}`: {} point(s) flagged by the oracle and set to NaN",
                m.label,
                m.flagged.len()
            ));
        }
        if m.unphysical_points > 0 {
            advisories.push(format!(
                "curve `{}`: {} point(s) with negative total",
                m.label, m.unphysical_points
            ));
        }
    }

    let metadata = Metadata {
        schema_version: super::config::SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION"),
        name: spec.name.clone(),
        axis: spec.axis,
        axis_column: spec.axis.kind.column_name(),
        probe_omega: spec.probe_omega,
        overlays: spec.overlays.clone(),
        config: serde_json::to_value(&spec.document).map_err(|e| Error::Config(e.to_string()))?,
        validity: validate(&base, &base_sq),
        curves: curve_meta,
        advisories,
    };
    Ok(SweepResult {
        metadata,
        axis: xs,
        curves,
        overlays,
    })
}
