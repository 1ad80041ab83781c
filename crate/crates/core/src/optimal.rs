//! Analytic optima over squeezing phase, purity, detuning and drive power,
//! and derivative-free minimizers that cross-check them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MechanicalParams, SensorParams};
use crate::response::inv_chi_m;

/// Squeezing and detuning inputs of the shot-noise bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotNoiseObjective {
    pub n_sq: f64,
    pub m_mag: f64,
    pub phi: f64,
    /// `y = Δ_c/κ`.
    pub y: f64,
}

impl ShotNoiseObjective {
    pub fn new(n_sq: f64, m_mag: f64, phi: f64, y: f64) -> Result<Self> {
        if !(n_sq >= 0.0) || !(m_mag >= 0.0) || !phi.is_finite() || !y.is_finite() {
            return Err(Error::invalid("shot_noise_objective", "need N >= 0, |M| >= 0, finite phi and y"));
        }
        if m_mag * m_mag > n_sq * (n_sq + 1.0) * (1.0 + 8.0 * f64::EPSILON) {
            return Err(Error::invalid("m_mag", "|M|^2 <= N(N+1) violated"));
        }
        Ok(ShotNoiseObjective { n_sq, m_mag, phi, y })
    }

    pub fn value(&self) -> f64 {
        h(self.m_mag, self.n_sq, self.y, self.phi)
    }
}

/// `(a, b)` with `a = 2y(1 − 4y²)` and `b = (½ + 2y²)² − 8y²`.
pub fn detuning_coefficients(y: f64) -> (f64, f64) {
    let y2 = y * y;
    let w = 0.5 + 2.0 * y2;
    (2.0 * y * (1.0 - 4.0 * y2), w * w - 8.0 * y2)
}

/// Squeezing phase that maximizes the subtracted term of the bracket.
pub fn phi_opt(y: f64) -> f64 {
    let (a, b) = detuning_coefficients(y);
    a.atan2(b)
}

/// Shot-noise bracket `(N + ½)(½ + 2y²)² − |M| sqrt(a² + b²) cos(φ − φ_opt)`.
pub fn h(m_mag: f64, n_sq: f64, y: f64, phi: f64) -> f64 {
    let (a, b) = detuning_coefficients(y);
    let w = 0.5 + 2.0 * y * y;
    (n_sq + 0.5) * w * w - m_mag * a.hypot(b) * (phi - phi_opt(y)).cos()
}

/// The bracket at `φ = φ_opt(y)`.
pub fn h_opt_phase(m_mag: f64, n_sq: f64, y: f64) -> f64 {
    let w = 0.5 + 2.0 * y * y;
    (n_sq + 0.5 - m_mag) * w * w
}

/// `N + ½ − sqrt(N(N+1))`, written as `¼ / (N + ½ + sqrt(N(N+1)))` to avoid
/// cancellation at large N.
fn pure_excess(n_sq: f64) -> f64 {
    0.25 / (n_sq + 0.5 + (n_sq * (n_sq + 1.0)).sqrt())
}

/// Minimum of the bracket over phase, purity and detuning.
pub fn h_min(n_sq: f64) -> f64 {
    0.25 * pure_excess(n_sq)
}

/// Shot noise after optimizing phase, purity and detuning.
pub fn shot_noise_optimized(omega: f64, params: &SensorParams, n_sq: f64) -> Result<f64> {
    let g = params.coupling_g;
    if !(g > 0.0) {
        return Err(Error::Domain(format!("shot noise needs g > 0, got {g}")));
    }
    let m = &params.mechanical;
    let k = params.cavity.kappa / (g * g * m.gamma_m) * inv_chi_m(omega, m.omega_m, m.gamma_m).norm_sqr();
    Ok(k * h_min(n_sq))
}

/// Coupling `g²` minimizing the no-atom spectrum with squeezed input.
pub fn g2_sql_optimum(omega: f64, mech: &MechanicalParams, kappa: f64, n_sq: f64, re_m: f64) -> Result<f64> {
    let a = 2.0 * n_sq + 1.0;
    let (lo, hi) = (a - 2.0 * re_m, a + 2.0 * re_m);
    if !(lo > 0.0 && hi > 0.0) {
        return Err(Error::Domain(format!(
            "optimal coupling needs 2N+1 > 2|Re M| (N = {n_sq}, Re M = {re_m})"
        )));
    }
    let inv = inv_chi_m(omega, mech.omega_m, mech.gamma_m).norm();
    Ok(0.25 * kappa * inv * (lo / hi).sqrt())
}

/// Squeezing phase that lets the no-atom spectrum reach the ultimate limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum UltimatePhase {
    Feasible { phi: f64, im_m: f64 },
    /// The phase condition needs `|sin φ| > 1`.
    Infeasible { required_sin_phi: f64 },
}

impl UltimatePhase {
    pub fn phi(&self) -> Option<f64> {
        match *self {
            UltimatePhase::Feasible { phi, .. } => Some(phi),
            UltimatePhase::Infeasible { .. } => None,
        }
    }
}

/// Solves `2 Im M = −Re(1/χ_m)/|Im(1/χ_m)|` for pure squeezing,
/// `Im M = sqrt(N(N+1)) sin φ`, on the branch `cos φ ≥ 0`.
///
/// For `ω > 0` the right-hand side equals `Re χ_m / Im χ_m`.
pub fn ultimate_phase(omega: f64, mech: &MechanicalParams, n_sq: f64) -> UltimatePhase {
    let inv = inv_chi_m(omega, mech.omega_m, mech.gamma_m);
    let m_mag = (n_sq * (n_sq + 1.0)).sqrt();
    let target = if inv.re == 0.0 {
        0.0
    } else {
        -0.5 * inv.re / inv.im.abs()
    };
    if target == 0.0 {
        return UltimatePhase::Feasible { phi: 0.0, im_m: 0.0 };
    }
    let s = target / m_mag;
    if s.is_finite() && s.abs() <= 1.0 {
        UltimatePhase::Feasible {
            phi: s.asin(),
            im_m: target,
        }
    } else {
        UltimatePhase::Infeasible {
            required_sin_phi: if s.is_nan() { target.signum() * f64::INFINITY } else { s },
        }
    }
}

/// Quantity a search axis represents; used only for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    CouplingSq,
    Phase,
    MMag,
    Detuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    /// Searches in `ln x`; the interval must be positive.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchAxis {
    pub variable: Variable,
    pub lo: f64,
    pub hi: f64,
    pub scale: Scale,
}

impl SearchAxis {
    pub fn linear(variable: Variable, lo: f64, hi: f64) -> Self {
        SearchAxis {
            variable,
            lo,
            hi,
            scale: Scale::Linear,
        }
    }

    pub fn log(variable: Variable, lo: f64, hi: f64) -> Self {
        SearchAxis {
            variable,
            lo,
            hi,
            scale: Scale::Log,
        }
    }

    fn bounds(&self) -> Result<(f64, f64)> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi;
        match self.scale {
            Scale::Linear if ok => Ok((self.lo, self.hi)),
            Scale::Log if ok && self.lo > 0.0 => Ok((self.lo.ln(), self.hi.ln())),
            _ => Err(Error::invalid(
                format!("{:?} search interval", self.variable),
                format!("need finite lo < hi (and lo > 0 for log scale), got [{}, {}]", self.lo, self.hi),
            )),
        }
    }

    fn to_value(&self, t: f64) -> f64 {
        match self.scale {
            Scale::Linear => t,
            Scale::Log => t.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub rel_tol: f64,
    /// Golden-section iterations per line search.
    pub max_iter: usize,
    /// Uniform pre-scan that brackets the global minimum before refinement.
    pub scan_points: usize,
    /// Coordinate-descent sweeps for two or more axes.
    pub max_sweeps: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            rel_tol: 1e-10,
            max_iter: 200,
            scan_points: 64,
            max_sweeps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    /// One value per axis, in the axis' own units.
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search of a function of the transformed coordinate `t`.
fn golden(f: &mut dyn FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, opts: &MinimizeOptions) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..opts.max_iter {
        if (b - a).abs() <= opts.rel_tol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Scan `[lo, hi]` on a uniform grid, then refine around the best sample.
fn line_search(f: &mut dyn FnMut(f64) -> Result<f64>, lo: f64, hi: f64, opts: &MinimizeOptions) -> Result<(f64, f64)> {
    let n = opts.scan_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..n {
        let v = f(lo + step * i as f64)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let i = best.0;
    let a = lo + step * i.saturating_sub(1) as f64;
    let b = lo + step * (i + 1).min(n - 1) as f64;
    let (t, v) = golden(f, a, b, opts)?;
    let grid_t = lo + step * i as f64;
    Ok(if v <= best.1 { (t, v) } else { (grid_t, best.1) })
}

/// Deterministic minimization over bounded axes.
///
/// One axis uses a uniform pre-scan followed by golden-section refinement;
/// more axes use coordinate descent with that line search. A non-finite
/// objective value aborts with the offending point.
pub fn minimize_numeric(objective: impl Fn(&[f64]) -> f64, axes: &[SearchAxis], opts: &MinimizeOptions) -> Result<Optimum> {
    if axes.is_empty() {
        return Err(Error::invalid("axes", "at least one search axis is required"));
    }
    let bounds = axes.iter().map(SearchAxis::bounds).collect::<Result<Vec<_>>>()?;
    let mut t: Vec<f64> = bounds.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
    let mut evaluations = 0usize;
    let mut current = f64::INFINITY;

    let sweeps = if axes.len() == 1 { 1 } else { opts.max_sweeps };
    for _ in 0..sweeps {
        let before = current;
        let t_before = t.clone();
        for k in 0..axes.len() {
            let mut eval = |tk: f64| -> Result<f64> {
                let x: Vec<f64> = t
                    .iter()
                    .enumerate()
                    .map(|(j, &tj)| axes[j].to_value(if j == k { tk } else { tj }))
                    .collect();
                evaluations += 1;
                let v = objective(&x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { at: x })
                }
            };
            let (tk, v) = line_search(&mut eval, bounds[k].0, bounds[k].1, opts)?;
            t[k] = tk;
            current = v;
        }
        let moved = t
            .iter()
            .zip(&t_before)
            .zip(&bounds)
            .all(|((a, b), (lo, hi))| (a - b).abs() <= opts.rel_tol * (hi - lo));
        if (before - current).abs() <= opts.rel_tol * current.abs() && moved {
            break;
        }
    }
    Ok(Optimum {
        point: t.iter().zip(axes).map(|(&ti, ax)| ax.to_value(ti)).collect(),
        value: current,
        evaluations,
    })
}
