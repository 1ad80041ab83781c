//! TOML configuration: schema, preset expansion, dotted-path overrides and
//! conversion to a [`SweepSpec`].
//!
//! Frequencies are quoted in Hz (ω/2π) and converted to rad/s here. A
//! document may name a `preset`; the preset is expanded first and the rest of
//! the document is merged over it, table by table. Command-line overrides are
//! applied last.

use std::path::Path;

use serde::Deserialize;

use super::presets;
use super::sweep::{
    AtomicSetup, AtomicTracking, AxisKind, AxisSpec, CouplingSource, CurveOverrides, CurveSpec, Engine, Overlay,
    PhaseChoice, Scenario, Spacing, SqueezingSpec, SweepSpec,
};
use crate::error::{Error, Result};
use crate::model::{
    hz, CavityParams, MechanicalParams, ModelOptions, SqueezingParams, ThermalModel, DEFAULT_MASS_KG,
};
use crate::optimal::g2_sql_optimum;
use crate::response::RForm;
use crate::spectra::MismatchSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub mechanical: MechanicalConfig,
    pub cavity: CavityConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub atomic: AtomicConfig,
    #[serde(default)]
    pub squeezing: SqueezingConfig,
    #[serde(default)]
    pub options: OptionsConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicalConfig {
    pub omega_m_hz: f64,
    pub gamma_m_hz: f64,
    #[serde(default = "default_mass")]
    pub mass_kg: f64,
    #[serde(default)]
    pub temperature_k: f64,
}

fn default_mass() -> f64 {
    DEFAULT_MASS_KG
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub kappa_hz: f64,
    #[serde(default)]
    pub kappa_in_hz: Option<f64>,
    #[serde(default)]
    pub detuning_hz: Option<f64>,
    #[serde(default)]
    pub detuning_over_kappa: Option<f64>,
    pub g0_hz: f64,
    pub wavelength_m: f64,
    pub power_w: f64,
}

/// Leave both unset to derive g from the drive power.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default)]
    pub g_hz: Option<f64>,
    #[serde(default)]
    pub g_over_g0_sq: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomicConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub coupling_mismatch: f64,
    #[serde(default)]
    pub decay_mismatch: f64,
    /// Fixed G; when unset G tracks g.
    #[serde(default)]
    pub coupling_hz: Option<f64>,
    /// Fixed Γ; when unset Γ tracks γ_m.
    #[serde(default)]
    pub dephasing_hz: Option<f64>,
    #[serde(default)]
    pub transition_hz: Option<f64>,
}

impl Default for AtomicConfig {
    fn default() -> Self {
        AtomicConfig {
            enabled: true,
            coupling_mismatch: 0.0,
            decay_mismatch: 0.0,
            coupling_hz: None,
            dephasing_hz: None,
            transition_hz: None,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PhaseConfig {
    Radians(f64),
    Named(String),
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig::Radians(0.0)
    }
}

impl PhaseConfig {
    fn resolve(&self, field: &str) -> Result<PhaseChoice> {
        match self {
            PhaseConfig::Radians(v) if v.is_finite() => Ok(PhaseChoice::Fixed(*v)),
            PhaseConfig::Named(s) if s == "optimal" => Ok(PhaseChoice::Optimal),
            _ => Err(Error::Config(format!(
                "{field}: expected a phase in radians or \"optimal\""
            ))),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingConfig {
    #[serde(default)]
    pub n_sq: Option<f64>,
    #[serde(default)]
    pub squeeze_r: Option<f64>,
    /// Defaults to pure squeezing, `sqrt(N(N+1))`.
    #[serde(default)]
    pub m_mag: Option<f64>,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub bandwidth_x_hz: Option<f64>,
    #[serde(default)]
    pub bandwidth_y_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    #[serde(default)]
    pub thermal: ThermalModel,
    #[serde(default)]
    pub r_form: RForm,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: AxisKind,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    /// Power axis only: span this many decades centred on the optimum
    /// coupling of the atom-free cavity without squeezing.
    #[serde(default)]
    pub decades: Option<f64>,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default = "one")]
    pub probe_omega_over_omega_m: f64,
    #[serde(default)]
    pub probe_offset_gamma_m: f64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub overlays: Vec<Overlay>,
    #[serde(default)]
    pub curves: Vec<CurveConfig>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub label: String,
    #[serde(default)]
    pub engine: Option<Engine>,
    #[serde(default)]
    pub n_sq: Option<f64>,
    #[serde(default)]
    pub detuning_over_kappa: Option<f64>,
    #[serde(default)]
    pub coupling_mismatch: Option<f64>,
    #[serde(default)]
    pub decay_mismatch: Option<f64>,
    #[serde(default)]
    pub atoms: Option<bool>,
    #[serde(default)]
    pub phase: Option<PhaseConfig>,
}

/// Reads a document, expanding a `preset` key and applying overrides.
pub fn load_document(path: Option<&Path>, preset: Option<&str>, overrides: &[String]) -> Result<(toml::Table, Option<String>)> {
    let user = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(parse_toml(&text, &p.display().to_string())?)
        }
        None => None,
    };
    let file_preset = user
        .as_ref()
        .and_then(|t| t.get("preset"))
        .map(|v| {
            v.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::Config("preset: expected a string".into()))
        })
        .transpose()?;
    let preset = preset.map(str::to_owned).or(file_preset);
    let mut doc = match &preset {
        Some(name) => preset_table(name)?,
        None => toml::Table::new(),
    };
    if let Some(mut user) = user {
        user.remove("preset");
        merge(&mut doc, user);
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    if doc.is_empty() {
        return Err(Error::Config("no configuration given: pass a config file or a preset".into()));
    }
    Ok((doc, preset))
}

fn preset_table(name: &str) -> Result<toml::Table> {
    let text = presets::document(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset `{name}` (available: {})",
            presets::names().join(", ")
        ))
    })?;
    parse_toml(text, &format!("preset {name}"))
}

fn parse_toml(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `a.b.c=value`; the value is read as TOML and falls back to a bare string.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}`: expected key.path=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}`: empty key in path")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
    let mut node = doc;
    for k in &keys[..keys.len() - 1] {
        let entry = node
            .entry((*k).to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{assignment}`: `{k}` is not a table")))?;
    }
    node.insert(keys[keys.len() - 1].to_owned(), value);
    Ok(())
}

/// Loads a config file (which may itself name a preset) into a sweep.
pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let (doc, preset) = load_document(Some(path), None, &[])?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    // Without a preset the document is the file itself, so re-parse the text
    // to get line numbers in schema errors.
    if preset.is_none() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ConfigFile =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        return build_spec(file, doc, stem);
    }
    spec_from_document(doc, stem)
}

/// Builds a sweep from an already merged document.
pub fn spec_from_document(doc: toml::Table, default_name: &str) -> Result<SweepSpec> {
    let text = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("resolved configuration: {e}")))?;
    build_spec(file, doc, default_name)
}

pub fn preset_spec(name: &str) -> Result<SweepSpec> {
    let (doc, _) = load_document(None, Some(name), &[])?;
    spec_from_document(doc, name)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn build_spec(file: ConfigFile, doc: toml::Table, default_name: &str) -> Result<SweepSpec> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    let name = file.name.clone().unwrap_or_else(|| default_name.to_owned());

    let m = &file.mechanical;
    let mechanical = MechanicalParams::new(hz(m.omega_m_hz), hz(m.gamma_m_hz), m.mass_kg, m.temperature_k)?;

    let c = &file.cavity;
    let kappa = hz(c.kappa_hz);
    let detuning = match (c.detuning_hz, c.detuning_over_kappa) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "cavity: set only one of detuning_hz and detuning_over_kappa".into(),
            ))
        }
        (Some(d), None) => hz(d),
        (None, Some(y)) => y * kappa,
        (None, None) => 0.0,
    };
    let cavity = CavityParams::new(
        kappa,
        c.kappa_in_hz.map_or(kappa, hz),
        detuning,
        hz(c.g0_hz),
        c.wavelength_m,
        c.power_w,
    )?;

    let coupling = match (file.coupling.g_hz, file.coupling.g_over_g0_sq) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("coupling: set only one of g_hz and g_over_g0_sq".into()))
        }
        (Some(g), None) => CouplingSource::Fixed { g: hz(g) },
        (None, Some(x)) => CouplingSource::PowerRatio { g_over_g0_sq: x },
        (None, None) => CouplingSource::FromPower,
    };

    let a = &file.atomic;
    let tracking = match (a.coupling_hz, a.dephasing_hz) {
        (None, None) => AtomicTracking::Matched(MismatchSpec::new(a.coupling_mismatch, a.decay_mismatch)?),
        (Some(big_g), dephasing) => {
            if a.coupling_mismatch != 0.0 || a.decay_mismatch != 0.0 {
                return Err(Error::Config(
                    "atomic: mismatch fields apply only when G and Gamma track g and gamma_m".into(),
                ));
            }
            AtomicTracking::Fixed {
                coupling: hz(big_g),
                dephasing: dephasing.map_or(mechanical.gamma_m, hz),
            }
        }
        (None, Some(_)) => {
            return Err(Error::Config(
                "atomic: dephasing_hz requires coupling_hz (fixed atoms); use decay_mismatch otherwise".into(),
            ))
        }
    };
    let atoms = AtomicSetup {
        enabled: a.enabled,
        tracking,
        transition_rate: a.transition_hz.map_or(mechanical.omega_m, hz),
    };

    let s = &file.squeezing;
    let n_sq = match (s.n_sq, s.squeeze_r) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("squeezing: set only one of n_sq and squeeze_r".into()))
        }
        (Some(n), None) => n,
        (None, Some(r)) => {
            if !(r >= 0.0) {
                return Err(Error::invalid("squeezing.squeeze_r", "must be >= 0"));
            }
            r.sinh().powi(2)
        }
        (None, None) => 0.0,
    };
    let squeezing = SqueezingSpec {
        n_sq,
        m_mag: s.m_mag,
        phase: s.phase.resolve("squeezing.phase")?,
        bandwidth_x: s.bandwidth_x_hz.map_or(f64::INFINITY, hz),
        bandwidth_y: s.bandwidth_y_hz.map_or(f64::INFINITY, hz),
    };
    // Surface the purity bound at load time with the configured numbers.
    SqueezingParams::new(
        n_sq,
        squeezing.m_mag.unwrap_or(0.0),
        0.0,
        squeezing.bandwidth_x,
        squeezing.bandwidth_y,
    )
    .map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name: format!("squeezing.{name}"),
            reason,
        },
        other => other,
    })?;

    let scenario = Scenario {
        mechanical,
        cavity,
        coupling,
        atoms,
        squeezing,
        options: ModelOptions {
            thermal: file.options.thermal,
            r_form: file.options.r_form,
        },
    };

    let sw = &file.sweep;
    let probe_omega =
        sw.probe_omega_over_omega_m * mechanical.omega_m + sw.probe_offset_gamma_m * mechanical.gamma_m;
    positive("sweep.probe", probe_omega)?;
    let (min, max) = match (sw.min, sw.max, sw.decades) {
        (Some(lo), Some(hi), None) => (lo, hi),
        (None, None, Some(d)) if sw.axis == AxisKind::PowerRatio => {
            let d = positive("sweep.decades", d)?;
            let g0 = scenario.cavity.g0;
            positive("cavity.g0_hz", g0)?;
            let centre = g2_sql_optimum(probe_omega, &mechanical, kappa, 0.0, 0.0)? / (g0 * g0);
            let half = 10f64.powf(0.5 * d);
            (centre / half, centre * half)
        }
        (None, None, Some(_)) => {
            return Err(Error::Config("sweep.decades is only available on the power_ratio axis".into()))
        }
        _ => {
            return Err(Error::Config(
                "sweep: give either both min and max, or decades (power_ratio axis)".into(),
            ))
        }
    };
    let axis = AxisSpec {
        kind: sw.axis,
        min,
        max,
        count: sw.count,
        spacing: sw.spacing,
    };
    axis.check()?;

    let mut curves = Vec::with_capacity(sw.curves.len().max(1));
    for cc in &sw.curves {
        curves.push(CurveSpec {
            label: cc.label.clone(),
            engine: cc.engine.unwrap_or(sw.engine),
            overrides: CurveOverrides {
                n_sq: cc.n_sq,
                detuning_over_kappa: cc.detuning_over_kappa,
                coupling_mismatch: cc.coupling_mismatch,
                decay_mismatch: cc.decay_mismatch,
                atoms: cc.atoms,
                phase: cc
                    .phase
                    .as_ref()
                    .map(|p| p.resolve(&format!("curve `{}`.phase", cc.label)))
                    .transpose()?,
            },
        });
    }
    if curves.is_empty() {
        curves.push(CurveSpec {
            label: "spectrum".into(),
            engine: sw.engine,
            overrides: CurveOverrides::default(),
        });
    }

    let spec = SweepSpec {
        name,
        axis,
        probe_omega,
        scenario,
        curves,
        overlays: sw.overlays.clone(),
        document: doc,
    };
    spec.check()?;
    Ok(spec)
}
