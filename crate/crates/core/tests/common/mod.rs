#![allow(dead_code)]

use cqnc::model::*;

pub const OMEGA_M: f64 = 3e5;
pub const GAMMA_M: f64 = 0.03;

/// Reference membrane, cavity and drive at T = 0, no atoms, g = 0.
pub fn fig2_base() -> SensorParams {
    let mech = MechanicalParams::new(hz(OMEGA_M), hz(GAMMA_M), DEFAULT_MASS_KG, 0.0).unwrap();
    let cav = CavityParams::new(hz(1e6), hz(1e6), 0.0, hz(300.0), 780e-9, 24e-6).unwrap();
    let atoms = AtomicParams::new(0.0, hz(GAMMA_M), hz(OMEGA_M)).unwrap();
    SensorParams::new(mech, cav, atoms, 0.0)
        .unwrap()
        .with_thermal(ThermalModel::HighTemperature)
}

/// Perfect CQNC at detuning `y·κ`, g from the drive power with G tracking it.
pub fn fig2_matched(y: f64) -> SensorParams {
    let p = fig2_base();
    let p = p.with_detuning(y * p.cavity.kappa).unwrap();
    let (g, big_g) = matched_coupling_from_power(&p, 0.0).unwrap();
    p.with_coupling(g).unwrap().with_atoms(big_g, p.mechanical.gamma_m).unwrap()
}

/// No atoms, g from the drive power.
pub fn fig2_free() -> SensorParams {
    let p = fig2_base();
    let g = coupling_from_power(&p).unwrap();
    p.with_coupling(g).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
