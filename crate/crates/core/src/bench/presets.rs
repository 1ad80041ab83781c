//! Built-in figure presets as TOML documents.
//!
//! All presets share the membrane-in-the-middle parameters below at T = 0,
//! resonant drive, pure squeezing at phase 0 and atoms that track the optical
//! coupling. Frequency sweeps use 2001 log-spaced points on
//! `ω/ω_m ∈ [0.9, 1.1]`; power sweeps use 2001 log-spaced points over six
//! decades of `(g/g0)²` centred on the atom-free optimum.

macro_rules! shared {
    () => {
        r#"schema_version = 1

[mechanical]
omega_m_hz = 3.0e5
gamma_m_hz = 0.03
mass_kg = 1.0e-11
temperature_k = 0.0

[cavity]
kappa_hz = 1.0e6
g0_hz = 300.0
wavelength_m = 780e-9
power_w = 24e-6
detuning_over_kappa = 0.0

[atomic]
enabled = true

[squeezing]
n_sq = 10.0
phase = 0.0

[options]
thermal = "high_temperature"
r_form = "high_q"
"#
    };
}

macro_rules! frequency_axis {
    ($engine:literal) => {
        concat!(
            r#"
[sweep]
axis = "frequency"
min = 0.9
max = 1.1
count = 2001
spacing = "log"
engine = ""#,
            $engine,
            r#""
overlays = ["sql"]
"#
        )
    };
}

macro_rules! power_axis {
    ($offset:literal) => {
        concat!(
            r#"
[sweep]
axis = "power_ratio"
decades = 6.0
count = 2001
spacing = "log"
probe_omega_over_omega_m = 1.0
probe_offset_gamma_m = "#,
            $offset,
            r#"
engine = "zero_detuning"
overlays = ["sql"]
"#
        )
    };
}

macro_rules! curve {
    ($label:literal $(, $key:literal = $val:literal)*) => {
        concat!("\n[[sweep.curves]]\nlabel = \"", $label, "\"\n" $(, $key, " = ", $val, "\n")*)
    };
}

const FIG2A: &str = concat!(
    "name = \"fig2a\"\ndescription = \"Perfect CQNC versus frequency, N = 10, detuning 0, kappa/2, kappa\"\n",
    shared!(),
    frequency_axis!("cqnc"),
    curve!("detuning_0", "detuning_over_kappa" = "0.0"),
    curve!("detuning_half", "detuning_over_kappa" = "0.5"),
    curve!("detuning_1", "detuning_over_kappa" = "1.0"),
);

const FIG2B: &str = concat!(
    "name = \"fig2b\"\ndescription = \"Perfect CQNC versus frequency at zero detuning, N = 0, 10, 100\"\n",
    shared!(),
    frequency_axis!("cqnc"),
    curve!("N0", "n_sq" = "0.0"),
    curve!("N10", "n_sq" = "10.0"),
    curve!("N100", "n_sq" = "100.0"),
);

macro_rules! fig3_curves {
    () => {
        concat!(
            curve!("standard_N0", "engine" = "\"standard\"", "atoms" = "false", "n_sq" = "0.0"),
            curve!("cqnc_N0", "engine" = "\"cqnc\"", "n_sq" = "0.0"),
            curve!("standard_N1", "engine" = "\"standard\"", "atoms" = "false", "n_sq" = "1.0"),
            curve!("cqnc_N1", "engine" = "\"cqnc\"", "n_sq" = "1.0"),
            curve!("standard_N10", "engine" = "\"standard\"", "atoms" = "false", "n_sq" = "10.0"),
            curve!("cqnc_N10", "engine" = "\"cqnc\"", "n_sq" = "10.0"),
        )
    };
}

const FIG3A: &str = concat!(
    "name = \"fig3a\"\ndescription = \"Versus (g/g0)^2 at omega_m, with and without atoms, N = 0, 1, 10\"\n",
    shared!(),
    power_axis!("0.0"),
    fig3_curves!(),
);

const FIG3B: &str = concat!(
    "name = \"fig3b\"\ndescription = \"Versus (g/g0)^2 at omega_m + 4 gamma_m, with and without atoms, N = 0, 1, 10\"\n",
    shared!(),
    power_axis!("4.0"),
    fig3_curves!(),
);

const FIG4: &str = concat!(
    "name = \"fig4\"\ndescription = \"Versus frequency with coupling and decay-rate mismatch, N = 10\"\n",
    shared!(),
    frequency_axis!("zero_detuning"),
    curve!("cqnc"),
    curve!("eps_1e-3_plus", "coupling_mismatch" = "1e-3"),
    curve!("eps_1e-3_minus", "coupling_mismatch" = "-1e-3"),
    curve!("eps_1e-5_plus", "coupling_mismatch" = "1e-5"),
    curve!("eps_1e-5_minus", "coupling_mismatch" = "-1e-5"),
    curve!("delta_half_plus", "decay_mismatch" = "0.5"),
    curve!("delta_half_minus", "decay_mismatch" = "-0.5"),
    curve!("eps_1e-5_delta_half_plus", "coupling_mismatch" = "1e-5", "decay_mismatch" = "0.5"),
    curve!("eps_1e-5_delta_half_minus", "coupling_mismatch" = "-1e-5", "decay_mismatch" = "-0.5"),
);

const FIG5A: &str = concat!(
    "name = \"fig5a\"\ndescription = \"Versus (g/g0)^2 at omega_m with mismatch, N = 10\"\n",
    shared!(),
    power_axis!("0.0"),
    curve!("curve1"),
    curve!("curve2", "decay_mismatch" = "0.1"),
    curve!("curve3_plus", "coupling_mismatch" = "0.1", "decay_mismatch" = "0.1"),
    curve!("curve3_minus", "coupling_mismatch" = "-0.1", "decay_mismatch" = "-0.1"),
    curve!("curve4", "decay_mismatch" = "-0.1"),
    curve!("curve5", "coupling_mismatch" = "-0.1"),
    curve!("curve6", "coupling_mismatch" = "0.1"),
    curve!("curve7", "coupling_mismatch" = "-0.1", "decay_mismatch" = "0.1"),
    curve!("curve8", "coupling_mismatch" = "0.1", "decay_mismatch" = "-0.1"),
    curve!("curve9", "engine" = "\"standard\"", "atoms" = "false"),
);

const FIG5B: &str = concat!(
    "name = \"fig5b\"\ndescription = \"Versus (g/g0)^2 at omega_m + 4 gamma_m with mismatch, N = 10\"\n",
    shared!(),
    power_axis!("4.0"),
    curve!("curve1"),
    curve!("curve2_plus", "decay_mismatch" = "0.1"),
    curve!("curve2_minus", "decay_mismatch" = "-0.1"),
    curve!("curve3_d0", "coupling_mismatch" = "-0.1"),
    curve!("curve3_dminus", "coupling_mismatch" = "-0.1", "decay_mismatch" = "-0.1"),
    curve!("curve3_dplus", "coupling_mismatch" = "-0.1", "decay_mismatch" = "0.1"),
    curve!("curve4_d0", "coupling_mismatch" = "0.1"),
    curve!("curve4_dplus", "coupling_mismatch" = "0.1", "decay_mismatch" = "0.1"),
    curve!("curve4_dminus", "coupling_mismatch" = "0.1", "decay_mismatch" = "-0.1"),
    curve!("curve5", "engine" = "\"standard\"", "atoms" = "false"),
);

const PRESETS: [(&str, &str); 7] = [
    ("fig2a", FIG2A),
    ("fig2b", FIG2B),
    ("fig3a", FIG3A),
    ("fig3b", FIG3B),
    ("fig4", FIG4),
    ("fig5a", FIG5A),
    ("fig5b", FIG5B),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn document(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}

/// One-line description from the document header.
pub fn description(name: &str) -> Option<&'static str> {
    let doc = document(name)?;
    doc.lines()
        .find_map(|l| l.strip_prefix("description = \""))
        .and_then(|l| l.strip_suffix('"'))
}
