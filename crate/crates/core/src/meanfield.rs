//! Mean-field dynamics of the cavity amplitude `α = ⟨a⟩/√N` and one
//! representative atom:
//!
//! ```text
//! dα/dt = −(iω0 + κ)α − 2ig Tr[σ^x ρ]
//! dρ/dt = L_atom ρ − i[2g(α + α*)σ^x, ρ]
//! ```
//!
//! The normal state `α = 0`, `ρ = ρ_ss` loses linear stability at `g*`, which
//! coincides with the critical coupling of the static self-consistency.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::baths::CavityParams;
use crate::lindblad::{max_rate, steady_state, SpinModel};
use crate::ode::{integrate, Tolerance};
use crate::qops::{pauli, Axis, DensityMatrix, OperatorMatrix};
use crate::{Error, Result, C64};

/// Finite-difference step of the Jacobian.
pub const FD_STEP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    pub alpha: C64,
    pub rho: DensityMatrix,
}

/// Real coordinates `(Re α, Im α, ρ00, ρ11, Re ρ01, Im ρ01)`.
fn pack(alpha: C64, rho: &OperatorMatrix) -> [f64; 6] {
    let r01 = rho.get(0, 1);
    [alpha.re, alpha.im, rho.get(0, 0).re, rho.get(1, 1).re, r01.re, r01.im]
}

fn unpack(y: &[f64]) -> (C64, OperatorMatrix) {
    let r01 = C64::new(y[4], y[5]);
    let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => C64::new(y[2], 0.0),
        (1, 1) => C64::new(y[3], 0.0),
        (0, 1) => r01,
        _ => r01.conj(),
    });
    (C64::new(y[0], y[1]), OperatorMatrix::from_mat_unchecked(m))
}

struct Rhs<'a> {
    generator: &'a Mat<C64>,
    omega0: f64,
    kappa: f64,
    g: f64,
}

impl Rhs<'_> {
    fn new<'a>(model: &'a SpinModel, cavity: &CavityParams, g: f64) -> Rhs<'a> {
        Rhs { generator: model.generator().as_mat(), omega0: cavity.omega0, kappa: cavity.kappa, g }
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        let alpha = C64::new(y[0], y[1]);
        let r01 = C64::new(y[4], y[5]);
        // vec(ρ) in column-stacked order
        let v = [C64::new(y[2], 0.0), r01.conj(), r01, C64::new(y[3], 0.0)];
        let mut lv = [C64::new(0.0, 0.0); 4];
        for (i, out) in lv.iter_mut().enumerate() {
            *out = (0..4).map(|k| self.generator[(i, k)] * v[k]).sum();
        }
        let sx = r01.re;
        let da = -C64::new(self.kappa, self.omega0) * alpha - C64::new(0.0, 2.0 * self.g * sx);
        // −i c [σ^x, ρ] with c = 4g Re α and σ^x = X/2
        let c = 4.0 * self.g * alpha.re;
        let i = C64::new(0.0, 1.0);
        let d00 = -i * c * 0.5 * (r01.conj() - r01);
        let d01 = -i * c * 0.5 * (C64::new(y[3] - y[2], 0.0));
        dy[0] = da.re;
        dy[1] = da.im;
        dy[2] = lv[0].re + d00.re;
        dy[3] = lv[3].re - d00.re;
        dy[4] = lv[2].re + d01.re;
        dy[5] = lv[2].im + d01.im;
    }
}

/// Time derivative `(dα/dt, dρ/dt)`.
pub fn mf_derivative(state: &MeanFieldState, cavity: &CavityParams, model: &SpinModel, g: f64) -> (C64, OperatorMatrix) {
    let y = pack(state.alpha, state.rho.op());
    let mut dy = [0.0; 6];
    Rhs::new(model, cavity, g).eval(&y, &mut dy);
    unpack(&dy)
}

/// Normal fixed point `α = 0`, `ρ = ρ_ss`.
pub fn normal_state(model: &SpinModel) -> Result<MeanFieldState> {
    Ok(MeanFieldState { alpha: C64::new(0.0, 0.0), rho: steady_state(model)?.rho().clone() })
}

/// Jacobian at the normal fixed point on the trace-preserving subspace
/// `(Re α, Im α, ρ00 − ρ11, Re ρ01, Im ρ01)`, by forward differences.
pub fn normal_jacobian(cavity: &CavityParams, model: &SpinModel, g: f64) -> Result<Mat<f64>> {
    let ns = normal_state(model)?;
    let rhs = Rhs::new(model, cavity, g);
    let y0 = pack(ns.alpha, ns.rho.op());
    let mut f0 = [0.0; 6];
    rhs.eval(&y0, &mut f0);
    let mut full = Mat::<f64>::zeros(6, 6);
    for j in 0..6 {
        let mut y = y0;
        y[j] += FD_STEP;
        let mut f = [0.0; 6];
        rhs.eval(&y, &mut f);
        for i in 0..6 {
            full[(i, j)] = (f[i] - f0[i]) / FD_STEP;
        }
    }
    // rows: z output is ρ00 − ρ11; columns: δz moves ρ00 by +½ and ρ11 by −½
    let row = |i: usize, j: usize| -> f64 {
        match i {
            2 => full[(2, j)] - full[(3, j)],
            0 | 1 => full[(i, j)],
            _ => full[(i + 1, j)],
        }
    };
    Ok(Mat::from_fn(5, 5, |i, j| match j {
        2 => 0.5 * (row(i, 2) - row(i, 3)),
        0 | 1 => row(i, j),
        _ => row(i, j + 1),
    }))
}

/// Largest real part of the Jacobian spectrum at the normal fixed point.
pub fn stability_exponent(cavity: &CavityParams, model: &SpinModel, g: f64) -> Result<f64> {
    let j = normal_jacobian(cavity, model, g)?;
    let ev = j.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

fn growth_floor(cavity: &CavityParams, model: &SpinModel, g: f64) -> Result<f64> {
    let scale = [cavity.omega0, cavity.kappa, model.omega_z().abs(), g, max_rate(model)?]
        .into_iter()
        .fold(1e-300, f64::max);
    Ok(1e-7 * scale)
}

/// Coupling at which the normal state turns unstable, by bisection of the
/// leading stability exponent to relative width `tol`.
///
/// Exponents below a small floor relative to the system's rates count as
/// marginal: conserved quantities (dephasing) and undamped oscillations leave
/// eigenvalues on the imaginary axis.
pub fn stability_threshold(cavity: &CavityParams, model: &SpinModel, g_lo: f64, g_hi: f64, tol: f64) -> Result<f64> {
    if !(g_lo >= 0.0 && g_hi > g_lo && g_hi.is_finite()) {
        return Err(Error::InvalidParameter { name: "g bracket", reason: format!("[{g_lo}, {g_hi}]") });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("{tol}") });
    }
    let unstable = |g: f64| -> Result<bool> {
        Ok(stability_exponent(cavity, model, g)? > growth_floor(cavity, model, g_hi)?)
    };
    if unstable(g_lo)? || !unstable(g_hi)? {
        return Err(Error::NoSignChange { g_lo, g_hi });
    }
    let (mut lo, mut hi) = (g_lo, g_hi);
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`stability_threshold`] with the bracket found automatically: the lower end
/// is a small fraction of the undamped estimate `½√(ω_z(ω0² + κ²)/ω0)` and the
/// upper end doubles until the normal state is unstable.
pub fn find_threshold(cavity: &CavityParams, model: &SpinModel, tol: f64) -> Result<f64> {
    let g_ref = (0.5 * (model.omega_z().abs() * cavity.weight()).sqrt()).max(1e-3 * cavity.omega0);
    let lo = 1e-3 * g_ref;
    let floor = |g: f64| growth_floor(cavity, model, g);
    let mut hi = g_ref;
    while stability_exponent(cavity, model, hi)? <= floor(hi)? {
        hi *= 2.0;
        if hi > 1e4 * g_ref {
            return Err(Error::NoSignChange { g_lo: lo, g_hi: hi });
        }
    }
    stability_threshold(cavity, model, lo, hi, tol)
}

/// Mean-field time series; `sx`, `sy`, `sz` are spin expectation values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub alpha: Vec<C64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
    pub trace: Vec<f64>,
}

/// Integrates the mean-field equations with an adaptive 5(4) scheme
/// (relative tolerance 1e-10), recording every `dt`.
pub fn simulate(
    state0: &MeanFieldState,
    cavity: &CavityParams,
    model: &SpinModel,
    g: f64,
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidGrid(format!("duration = {duration} must be non-negative")));
    }
    let n = (duration / dt - 1e-9).ceil().max(0.0) as usize;
    let times: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).min(duration)).collect();
    let rhs = Rhs::new(model, cavity, g);
    let tol = Tolerance { rtol: 1e-10, atol: 1e-12 };
    let ys = integrate(|_, y, dy| rhs.eval(y, dy), &pack(state0.alpha, state0.rho.op()), &times, &tol)?;
    let (sx_op, sy_op, sz_op) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
    let mut tr = Trajectory { t: times, alpha: vec![], sx: vec![], sy: vec![], sz: vec![], trace: vec![] };
    for y in &ys {
        let (a, rho) = unpack(y);
        tr.alpha.push(a);
        tr.sx.push(sx_op.expectation(&rho).re);
        tr.sy.push(sy_op.expectation(&rho).re);
        tr.sz.push(sz_op.expectation(&rho).re);
        tr.trace.push(rho.trace().re);
    }
    Ok(tr)
}
