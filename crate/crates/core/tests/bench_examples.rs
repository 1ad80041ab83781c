//! Sweep, emit and compare behaviour on the figure presets.

mod common;

use common::rel;
use cqnc::bench::sweep::COMPONENTS;
use cqnc::bench::{compare, emit, load_document, load_table, presets, run_sweep, spec_from_document, Format, SweepResult};
use cqnc::optimal::g2_sql_optimum;
use cqnc::spectra::cqnc_floor;
use cqnc::Error;

fn run(preset: &str, sets: &[&str]) -> SweepResult {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    let (doc, _) = load_document(None, Some(preset), &sets).unwrap();
    run_sweep(&spec_from_document(doc, preset).unwrap()).unwrap()
}

fn totals<'a>(r: &'a SweepResult, label: &str) -> Vec<f64> {
    r.curve(label).unwrap().points.iter().map(|b| b.total).collect()
}

#[test]
fn fig2b_squeezing_lowers_off_resonance_noise() {
    // Single probe at ω_m + 10γ_m with Q_m = 1e7.
    let r = run(
        "fig2b",
        &["sweep.min=1.000001", "sweep.max=1.1", "sweep.count=2", "sweep.spacing=\"linear\""],
    );
    let at = |l: &str| totals(&r, l)[0];
    assert!(at("N0") > at("N10") && at("N10") > at("N100"), "{} {} {}", at("N0"), at("N10"), at("N100"));
}

#[test]
fn fig3b_cqnc_monotone_and_standard_has_interior_minimum() {
    let r = run("fig3b", &["sweep.count=601"]);
    let spec = &r.metadata;
    let w = spec.probe_omega;
    let mech = spec.curves[0].resolved.mechanical;
    let kappa = spec.curves[0].resolved.cavity.kappa;
    let g0 = spec.curves[0].resolved.cavity.g0;
    let floor = cqnc_floor(w, &mech);
    for n in [0.0_f64, 1.0, 10.0] {
        let c = totals(&r, &format!("cqnc_N{n}"));
        assert!(c.windows(2).all(|p| p[1] < p[0]), "N = {n}");
        assert!(c.iter().all(|&v| v >= floor));

        let s = totals(&r, &format!("standard_N{n}"));
        let i = (0..s.len()).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        assert!(i > 0 && i < s.len() - 1);
        let x_opt = g2_sql_optimum(w, &mech, kappa, n, (n * (n + 1.0)).sqrt()).unwrap() / (g0 * g0);
        let step = (r.axis[1] / r.axis[0]).ln();
        assert!((r.axis[i] / x_opt).ln().abs() <= step, "N = {n}: {} vs {x_opt}", r.axis[i]);
    }
}

#[test]
fn fig4_coupling_mismatch_broadband_decay_mismatch_local() {
    let r = run("fig4", &["sweep.count=401"]);
    let cqnc = totals(&r, "cqnc");
    let eps = totals(&r, "eps_1e-3_plus");
    let delta = totals(&r, "delta_half_plus");
    let last = r.axis.len() - 1;
    for i in [0, last] {
        assert!(eps[i] > 10.0 * cqnc[i]);
        assert!((delta[i] - cqnc[i]).abs() < 1e-2 * cqnc[i]);
    }
    let mid = r.axis.iter().position(|&x| x >= 1.0).unwrap();
    assert!((delta[mid] - cqnc[mid]).abs() > 1e-2 * cqnc[mid]);
}

#[test]
fn mismatch_signs_are_separate_columns() {
    let r = run("fig4", &["sweep.count=11"]);
    let names = r.column_names();
    assert!(names.contains(&"eps_1e-3_plus.total".to_owned()));
    assert!(names.contains(&"eps_1e-3_minus.total".to_owned()));
    let plus = totals(&r, "eps_1e-3_plus");
    let minus = totals(&r, "eps_1e-3_minus");
    assert!(plus.iter().zip(&minus).all(|(a, b)| rel(*a, *b) < 0.05));
}

#[test]
fn exact_and_oracle_agree_on_fig2b_grid() {
    let base = ["sweep.count=201"];
    let exact = run("fig2b", &[base[0], "sweep.engine=\"exact\""]).to_table().unwrap();
    let oracle = run("fig2b", &[base[0], "sweep.engine=\"oracle\""]).to_table().unwrap();
    let rep = compare(&exact, &oracle, 1e-9, &["total".into()]).unwrap();
    assert_eq!(rep.columns.len(), 3);
    assert!(rep.passed(), "{:?}", rep.columns);
}

#[test]
fn zero_detuning_converges_to_exact_with_large_kappa() {
    let sets = ["sweep.count=101", "cavity.kappa_hz=1e9", "coupling.g_hz=1e6", "atomic.coupling_mismatch=1e-3"];
    let exact = run("fig4", &[sets[0], sets[1], sets[2], sets[3], "sweep.engine=\"exact\"", "sweep.curves=[]"]);
    let markov = run("fig4", &[sets[0], sets[1], sets[2], sets[3], "sweep.curves=[]"]);
    let rep = compare(&exact.to_table().unwrap(), &markov.to_table().unwrap(), 1e-2, &["total".into()]).unwrap();
    assert!(rep.passed(), "{:?}", rep.columns);
}

#[test]
fn self_comparison_is_zero() {
    let t = run("fig5b", &["sweep.count=21"]).to_table().unwrap();
    let rep = compare(&t, &t, 0.0, &[]).unwrap();
    assert!(rep.passed());
    assert_eq!(rep.max_rel(), 0.0);
}

#[test]
fn compare_rejects_different_axes() {
    let a = run("fig2b", &["sweep.count=21"]).to_table().unwrap();
    let b = run("fig2b", &["sweep.count=22"]).to_table().unwrap();
    assert!(matches!(compare(&a, &b, 1.0, &[]), Err(Error::AxisMismatch(_))));
}

#[test]
fn empty_overlay_set_gives_seven_columns() {
    let r = run("fig2b", &["sweep.count=5", "sweep.overlays=[]", "sweep.curves=[]"]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    emit(&r, Format::Csv, &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 7);
    assert_eq!(&header[1..], &COMPONENTS);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 7));
}

#[test]
fn fig5a_matches_curve_inventory() {
    let r = run("fig5a", &["sweep.count=11"]);
    let mut ids: Vec<String> = r.curves.iter().map(|c| c.label.split('_').next().unwrap().to_owned()).collect();
    ids.dedup();
    assert_eq!(ids, (1..=9).map(|i| format!("curve{i}")).collect::<Vec<_>>());
    assert_eq!(r.column_names().len(), 1 + 6 * 10 + 1);
}

#[test]
fn json_and_csv_round_trip_to_same_table() {
    let r = run("fig2a", &["sweep.count=31"]);
    let dir = tempfile::tempdir().unwrap();
    let (c, j) = (dir.path().join("a.csv"), dir.path().join("a.json"));
    emit(&r, Format::Csv, &c).unwrap();
    emit(&r, Format::Json, &j).unwrap();
    let (tc, tj) = (load_table(&c).unwrap(), load_table(&j).unwrap());
    let orig = r.to_table().unwrap();
    assert_eq!(tc.columns, orig.columns);
    assert_eq!(tj.columns, orig.columns);
    assert_eq!(tj.metadata, orig.metadata);
}

#[test]
fn every_preset_runs_and_echoes_parameters() {
    for name in presets::names() {
        let r = run(name, &["sweep.count=5"]);
        assert_eq!(r.metadata.curves.len(), r.curves.len());
        for (c, m) in r.curves.iter().zip(&r.metadata.curves) {
            assert_eq!(c.points.len(), r.axis.len());
            assert!(c.flagged.is_empty());
            assert!(m.resolved.coupling_g > 0.0, "{name}/{}", m.label);
            assert_eq!(m.resolved.mechanical.omega_m, cqnc::model::hz(3e5));
        }
        assert!(r.metadata.config.get("mechanical").is_some());
    }
}
