//! Brute-force frequency-domain solution of the six-variable linearized
//! Langevin system.
//!
//! Nothing here uses a closed-form spectrum. At each frequency the state
//! response `(sI − A)⁻¹ B` is obtained by dense LU, refined twice against a
//! residual accumulated in double-double precision, pushed through the
//! homodyne output `√κ δP_a − P_a^in` and rescaled by the solved response to
//! the force port. The ordered input table keeps the `±i/2` commutator
//! entries; symmetrization happens on the scalar output.

use nalgebra::{Matrix6, RowVector5, RowVector6, SMatrix, SVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{thermal_term, SensorParams, SqueezingParams};
use crate::spectra::SpectrumBreakdown;

pub type TransferMatrix = SMatrix<Complex64, 6, 5>;

pub const STATE_LABELS: [&str; 6] = ["X", "P", "X_a", "P_a", "X_d", "P_d"];
pub const INPUT_LABELS: [&str; 5] = ["f", "X_a_in", "P_a_in", "X_d_in", "P_d_in"];

const X: usize = 0;
const P: usize = 1;
const XA: usize = 2;
const PA: usize = 3;
const XD: usize = 4;
const PD: usize = 5;

/// Drift matrices above this condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e15;
const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix6<f64>);

pub fn build_drift(params: &SensorParams) -> DriftMatrix {
    let (wm, gm) = (params.mechanical.omega_m, params.mechanical.gamma_m);
    let (kappa, delta) = (params.cavity.kappa, params.cavity.detuning);
    let (g, big_g, gam) = (params.coupling_g, params.atomic.coupling, params.atomic.dephasing);
    let mut a = Matrix6::zeros();
    a[(X, P)] = wm;
    a[(P, X)] = -wm;
    a[(P, P)] = -gm;
    a[(P, XA)] = -g;
    a[(XA, XA)] = -0.5 * kappa;
    a[(XA, PA)] = delta;
    a[(PA, XA)] = -delta;
    a[(PA, X)] = -g;
    a[(PA, XD)] = -big_g;
    a[(PA, PA)] = -0.5 * kappa;
    a[(XD, PD)] = -wm;
    a[(XD, XD)] = -0.5 * gam;
    a[(PD, XD)] = wm;
    a[(PD, XA)] = -big_g;
    a[(PD, PD)] = -0.5 * gam;
    DriftMatrix(a)
}

/// Input couplings and the ordered correlation table `⟨n_i(ω) n_j(−ω')⟩ = C_ij δ(ω − ω')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub coupling: SMatrix<f64, 6, 5>,
    pub correlations: SMatrix<Complex64, 5, 5>,
}

pub fn input_spectral_matrix(params: &SensorParams, squeezing: &SqueezingParams) -> NoiseModel {
    let mut b = SMatrix::<f64, 6, 5>::zeros();
    b[(P, 0)] = params.mechanical.gamma_m.sqrt();
    b[(XA, 1)] = params.cavity.kappa.sqrt();
    b[(PA, 2)] = params.cavity.kappa.sqrt();
    b[(XD, 3)] = params.atomic.dephasing.sqrt();
    b[(PD, 4)] = params.atomic.dephasing.sqrt();

    let n = squeezing.n_sq();
    let (re_m, im_m) = (squeezing.re_m(), squeezing.im_m());
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut corr = SMatrix::<Complex64, 5, 5>::zeros();
    corr[(0, 0)] = c(thermal_term(&params.mechanical, params.options.thermal), 0.0);
    corr[(1, 1)] = c(n + 0.5 + re_m, 0.0);
    corr[(2, 2)] = c(n + 0.5 - re_m, 0.0);
    corr[(1, 2)] = c(im_m, 0.5);
    corr[(2, 1)] = c(im_m, -0.5);
    corr[(3, 3)] = c(0.5, 0.0);
    corr[(4, 4)] = c(0.5, 0.0);
    corr[(4, 3)] = c(0.0, 0.5);
    corr[(3, 4)] = c(0.0, -0.5);
    NoiseModel {
        coupling: b,
        correlations: corr,
    }
}

/// Maps the solved state and the direct input feedthrough to the force estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorWeights {
    /// `√κ` on `δP_a`.
    pub readout: RowVector6<f64>,
    /// `−1` on `P_a^in`.
    pub feedthrough: RowVector5<f64>,
    /// Inverse of the output response to the force port.
    pub gain: Complex64,
}

/// Sign of the exponent in the Fourier kernel: a time derivative maps to `±iω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierConvention {
    #[default]
    PlusIOmega,
    MinusIOmega,
}

/// Symmetrized added-force spectrum split by input channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpectrum {
    pub total: f64,
    pub thermal: f64,
    /// Both quadratures of the optical input, including their correlation.
    pub optical: f64,
    pub atomic: f64,
    /// Unsymmetrized `⟨F(ω) F(−ω)⟩`.
    pub ordered: Complex64,
}

impl OracleSpectrum {
    /// The optical channel is reported as `field`; backaction and
    /// interference are not separable at this level and are left at zero.
    pub fn breakdown(&self) -> SpectrumBreakdown {
        SpectrumBreakdown::from_parts(self.thermal, self.optical, 0.0, self.atomic, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    drift: DriftMatrix,
    noise: NoiseModel,
    readout: RowVector6<f64>,
    feedthrough: RowVector5<f64>,
    convention: FourierConvention,
}

impl Oracle {
    pub fn new(params: &SensorParams, squeezing: &SqueezingParams) -> Result<Self> {
        if !(params.coupling_g > 0.0) {
            return Err(Error::Domain(format!(
                "force estimator diverges as 1/g; got g = {}",
                params.coupling_g
            )));
        }
        let mut readout = RowVector6::zeros();
        readout[PA] = params.cavity.kappa.sqrt();
        let mut feedthrough = RowVector5::zeros();
        feedthrough[2] = -1.0;
        Ok(Oracle {
            drift: build_drift(params),
            noise: input_spectral_matrix(params, squeezing),
            readout,
            feedthrough,
            convention: FourierConvention::PlusIOmega,
        })
    }

    /// Switches the Fourier convention and conjugates the correlation table to match.
    pub fn with_convention(mut self, convention: FourierConvention) -> Self {
        if convention != self.convention {
            self.noise.correlations = self.noise.correlations.map(|c| c.conj());
            self.convention = convention;
        }
        self
    }

    pub fn drift(&self) -> &DriftMatrix {
        &self.drift
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    fn sigma(&self, omega: f64) -> f64 {
        match self.convention {
            FourierConvention::PlusIOmega => omega,
            FourierConvention::MinusIOmega => -omega,
        }
    }

    /// State response to each input, `(sI − A)⁻¹ B` with `s = ±iω`.
    pub fn transfer(&self, omega: f64) -> Result<TransferMatrix> {
        let sigma = self.sigma(omega);
        let a = &self.drift.0;
        let m = Matrix6::from_fn(|i, j| {
            Complex64::new(-a[(i, j)], if i == j { sigma } else { 0.0 })
        });
        let b = self.noise.coupling.map(|v| Complex64::new(v, 0.0));
        let lu = m.lu();
        let singular = |condition| Error::Singular { omega, condition };
        let inv = lu.try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
        let condition = norm1(&m) * norm1(&inv);
        if !(condition <= MAX_CONDITION) {
            return Err(singular(condition));
        }
        let mut x = lu.solve(&b).ok_or_else(|| singular(condition))?;
        for _ in 0..REFINEMENT_STEPS {
            let r = residual(a, sigma, &self.noise.coupling, &x);
            let dx = lu.solve(&r).ok_or_else(|| singular(condition))?;
            x += dx;
        }
        Ok(x)
    }

    pub fn weights(&self, omega: f64) -> Result<EstimatorWeights> {
        let t = self.transfer(omega)?;
        self.weights_from(&t, omega)
    }

    fn weights_from(&self, t: &TransferMatrix, omega: f64) -> Result<EstimatorWeights> {
        let signal = self.readout_row(t, 0);
        if !(signal.norm() > 0.0) || !signal.norm().is_finite() {
            return Err(Error::Domain(format!(
                "output carries no force signal at omega = {omega:e}"
            )));
        }
        Ok(EstimatorWeights {
            readout: self.readout,
            feedthrough: self.feedthrough,
            gain: signal.inv(),
        })
    }

    fn readout_row(&self, t: &TransferMatrix, j: usize) -> Complex64 {
        (0..6).map(|i| t[(i, j)] * self.readout[i]).sum::<Complex64>() + self.feedthrough[j]
    }

    /// Weights `c_j(ω)` of each input in the force estimate, `F_N = Σ c_j n_j`.
    pub fn coefficients(&self, omega: f64) -> Result<SVector<Complex64, 5>> {
        let t = self.transfer(omega)?;
        let w = self.weights_from(&t, omega)?;
        Ok(SVector::<Complex64, 5>::from_fn(|j, _| w.gain * self.readout_row(&t, j)))
    }

    pub fn spectrum(&self, omega: f64) -> Result<OracleSpectrum> {
        let cp = self.coefficients(omega)?;
        let cm = self.coefficients(-omega)?;
        let corr = &self.noise.correlations;
        let ordered = |a: &SVector<Complex64, 5>, b: &SVector<Complex64, 5>, range: std::ops::Range<usize>| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in range.clone() {
                for j in range.clone() {
                    s += a[i] * b[j] * corr[(i, j)];
                }
            }
            s
        };
        let sym = |range: std::ops::Range<usize>| {
            0.5 * (ordered(&cp, &cm, range.clone()) + ordered(&cm, &cp, range)).re
        };
        let thermal = sym(0..1);
        let optical = sym(1..3);
        let atomic = sym(3..5);
        Ok(OracleSpectrum {
            total: thermal + optical + atomic,
            thermal,
            optical,
            atomic,
            ordered: ordered(&cp, &cm, 0..5),
        })
    }
}

fn norm1(m: &Matrix6<Complex64>) -> f64 {
    (0..6)
        .map(|j| (0..6).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Dot product evaluated as if in twice the working precision.
fn dot2(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (a, b) in terms {
        let (p, q) = two_prod(a, b);
        let (t, r) = two_sum(s, p);
        s = t;
        c += q + r;
    }
    s + c
}

/// `B − (iσI − A) X`, column by column.
fn residual(a: &Matrix6<f64>, sigma: f64, b: &SMatrix<f64, 6, 5>, x: &TransferMatrix) -> TransferMatrix {
    TransferMatrix::from_fn(|i, j| {
        let re = dot2(
            std::iter::once((b[(i, j)], 1.0))
                .chain((0..6).map(|k| (a[(i, k)], x[(k, j)].re)))
                .chain(std::iter::once((sigma, x[(i, j)].im))),
        );
        let im = dot2(
            (0..6)
                .map(|k| (a[(i, k)], x[(k, j)].im))
                .chain(std::iter::once((-sigma, x[(i, j)].re))),
        );
        Complex64::new(re, im)
    })
}

/// Symmetrized added-force spectrum at one frequency.
pub fn estimator_spectrum(omega: f64, params: &SensorParams, squeezing: &SqueezingParams) -> Result<OracleSpectrum> {
    Oracle::new(params, squeezing)?.spectrum(omega)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Every eigenvalue has a strictly negative real part.
    pub stable: bool,
    /// The largest real part is zero to within rounding.
    pub marginal: bool,
    pub max_real: f64,
    pub eigenvalues: Vec<(f64, f64)>,
}

pub fn stability(params: &SensorParams) -> StabilityReport {
    let a = build_drift(params).0;
    let eig = a.complex_eigenvalues();
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    let max_real = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    StabilityReport {
        stable: max_real < -tol,
        marginal: max_real.abs() <= tol,
        max_real,
        eigenvalues: eig.iter().map(|z| (z.re, z.im)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hz;
    use crate::response::{chi_a_eff, chi_m, RForm};
    use crate::spectra::{spectrum_exact, spectrum_standard};
    use crate::testutil::fig2_params;

    const G_FIG2: f64 = 5.537e6;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(a.abs())
    }

    #[test]
    fn drift_structure() {
        let p = fig2_params();
        let a = build_drift(&p).0;
        for i in 0..2 {
            for j in 2..6 {
                assert_eq!(a[(i, j)], 0.0);
                assert_eq!(a[(j, i)], 0.0);
            }
        }
        for i in 2..4 {
            for j in 4..6 {
                assert_eq!(a[(i, j)], 0.0);
                assert_eq!(a[(j, i)], 0.0);
            }
        }
        let q = p.with_coupling(G_FIG2).unwrap().cqnc_matched().unwrap();
        let tr = build_drift(&q).0.trace();
        let expect = -(q.mechanical.gamma_m + q.cavity.kappa + q.atomic.dephasing);
        assert!(rel(tr, expect) < 1e-15);
    }

    #[test]
    fn fig2_is_stable() {
        let p = fig2_params().with_coupling(G_FIG2).unwrap().cqnc_matched().unwrap();
        for d in [0.0, 0.5, 1.0] {
            let r = stability(&p.with_detuning(d * p.cavity.kappa).unwrap());
            assert!(r.stable && !r.marginal, "{r:?}");
        }
        assert!(stability(&fig2_params()).stable);
    }

    #[test]
    fn zero_dephasing_is_marginal() {
        let mut p = fig2_params();
        p.atomic.dephasing = 0.0;
        let r = stability(&p);
        assert!(!r.stable && r.marginal);
    }

    #[test]
    fn vacuum_table() {
        let n = input_spectral_matrix(&fig2_params(), &SqueezingParams::vacuum());
        let c = n.correlations;
        assert_eq!(c[(1, 1)].re, 0.5);
        assert_eq!(c[(2, 2)].re, 0.5);
        assert_eq!(c[(1, 2)], Complex64::new(0.0, 0.5));
        assert_eq!(c[(3, 3)].re, 0.5);
        assert_eq!(c[(4, 4)].re, 0.5);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(c[(i, j)], c[(j, i)].conj());
            }
        }
        let sq = SqueezingParams::pure(2.0, std::f64::consts::FRAC_PI_2).unwrap();
        let c = input_spectral_matrix(&fig2_params(), &sq).correlations;
        assert!((c[(1, 1)].re - c[(2, 2)].re).abs() < 1e-15);
        assert!((c[(1, 2)].re - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mechanical_transfer_is_chi_m() {
        let p = fig2_params().with_coupling(1.0).unwrap();
        let mut p0 = p;
        p0.coupling_g = 0.0;
        let o = Oracle {
            drift: build_drift(&p0),
            ..Oracle::new(&p, &SqueezingParams::vacuum()).unwrap()
        };
        let m = p.mechanical;
        for w in [0.0, 0.5 * m.omega_m, m.omega_m, 1.0001 * m.omega_m, 3.0 * m.omega_m] {
            let t = o.transfer(w).unwrap();
            let x = t[(X, 0)] / m.gamma_m.sqrt();
            let chi = chi_m(w, m.omega_m, m.gamma_m);
            assert!((x - chi).norm() < 1e-12 * chi.norm(), "{w}: {x} vs {chi}");
        }
    }

    #[test]
    fn gain_matches_closed_form_calibration() {
        let p = fig2_params()
            .with_coupling(G_FIG2)
            .unwrap()
            .with_atoms(1.01 * G_FIG2, 1.2 * hz(0.03))
            .unwrap()
            .with_detuning(0.5 * hz(1e6))
            .unwrap()
            .with_r_form(RForm::ExactRatio);
        let o = Oracle::new(&p, &SqueezingParams::vacuum()).unwrap();
        let m = p.mechanical;
        for w in [0.93 * m.omega_m, m.omega_m, 1.07 * m.omega_m] {
            let gain = o.weights(w).unwrap().gain;
            let closed = -1.0
                / (p.coupling_g * chi_a_eff(w, &p) * chi_m(w, m.omega_m, m.gamma_m) * (p.cavity.kappa * m.gamma_m).sqrt());
            assert!((gain - closed).norm() < 1e-10 * closed.norm());
        }
    }

    #[test]
    fn matches_standard_cavity() {
        let p = fig2_params().with_coupling(G_FIG2).unwrap();
        let mut big = p;
        big.cavity.kappa *= 1e4;
        big.cavity.kappa_in = big.cavity.kappa;
        let sq = SqueezingParams::vacuum();
        for w in [0.95, 1.0, 1.05].map(|r| r * p.mechanical.omega_m) {
            let o = estimator_spectrum(w, &p, &sq).unwrap();
            let e = spectrum_exact(w, &p, &sq).unwrap();
            assert!(rel(o.total, e.total) < 1e-9);
            // Far in the Markov regime the exact form tends to the textbook one.
            let ob = estimator_spectrum(w, &big, &sq).unwrap();
            let st = spectrum_standard(w, &big).unwrap();
            assert!(rel(ob.total - ob.thermal, st.total - st.thermal) < 1e-6);
        }
    }

    #[test]
    fn convention_flip_is_invisible() {
        let p = fig2_params()
            .with_coupling(G_FIG2)
            .unwrap()
            .with_atoms(0.999 * G_FIG2, 1.1 * hz(0.03))
            .unwrap()
            .with_detuning(0.3 * hz(1e6))
            .unwrap();
        let sq = SqueezingParams::pure(5.0, 0.8).unwrap();
        let plus = Oracle::new(&p, &sq).unwrap();
        let minus = plus.clone().with_convention(FourierConvention::MinusIOmega);
        for w in [0.9, 0.999, 1.0, 1.02].map(|r| r * p.mechanical.omega_m) {
            let a = plus.spectrum(w).unwrap();
            let b = minus.spectrum(w).unwrap();
            assert!(rel(a.total, b.total) < 1e-12);
            assert!(a.total > 0.0);
        }
    }

    #[test]
    fn vanishing_coupling_is_rejected() {
        let p = fig2_params();
        assert!(matches!(estimator_spectrum(1.0, &p, &SqueezingParams::vacuum()), Err(Error::Domain(_))));
    }

    #[test]
    fn singular_frequency_reports_condition() {
        // Undamped decoupled mechanics is singular exactly at ω = ω_m.
        let p = fig2_params().with_coupling(1.0).unwrap();
        let mut p0 = p;
        p0.coupling_g = 0.0;
        p0.mechanical.gamma_m = 0.0;
        let o = Oracle {
            drift: build_drift(&p0),
            ..Oracle::new(&p, &SqueezingParams::vacuum()).unwrap()
        };
        match o.transfer(p.mechanical.omega_m) {
            Err(Error::Singular { condition, .. }) => assert!(condition > MAX_CONDITION),
            other => panic!("expected singular, got {other:?}"),
        }
    }
}
