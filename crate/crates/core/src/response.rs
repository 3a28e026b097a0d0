//! Cavity self-energy from spin correlators, the cavity determinant and
//! polariton frequencies.
//!
//! Per atom, `χ(ω) = Σ_a^R(ω)/g² = −8 ∫₀^∞ Im S_x(t) e^{iωt} dt`. The
//! determinant of the inverse cavity Green function with the self-energy in
//! all four Nambu entries is
//!
//! ```text
//! det(ω) = ω0² − (ω + iκ)² + 2 ω0 g² χ(ω)
//! ```
//!
//! so that `det(0) = 0` is the critical condition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baths::CavityParams;
use crate::lindblad::{default_sx_grid, steady_state, steady_sx, two_time_sx, CorrelationSeries, SampleGrid, SpinModel};
use crate::quad::boole;
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const STEPS_PER_PERIOD: f64 = 40.0;

/// `χ(ω)` tabulated on real frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiGrid {
    pub omegas: Vec<f64>,
    pub values: Vec<C64>,
}

/// Static susceptibility `χ(0) = Σ_a^R(0)/g²` and optionally `χ(ω)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    pub chi0: f64,
    pub chi_of_omega: Option<ChiGrid>,
}

impl Susceptibility {
    pub fn from_chi0(chi0: f64) -> Self {
        Self { chi0, chi_of_omega: None }
    }

    /// `χ` at `omega`: `chi0` at zero, otherwise an exact grid point.
    pub fn at(&self, omega: f64) -> Result<C64> {
        if omega == 0.0 {
            return Ok(C64::new(self.chi0, 0.0));
        }
        let grid = self.chi_of_omega.as_ref().ok_or(Error::MissingFrequency(omega))?;
        grid.omegas
            .iter()
            .position(|&w| w == omega)
            .map(|k| grid.values[k])
            .ok_or(Error::MissingFrequency(omega))
    }
}

/// Closed-form response of one spin whose `σ^x`, `σ^y` decay at `rate_x`,
/// `rate_y` and precess at `omega_z`:
/// `χ(ω) = 4⟨σ^z⟩ω_z / ((γ_x − iω)(γ_y − iω) + ω_z²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseResponse {
    pub sz: f64,
    pub omega_z: f64,
    pub rate_x: f64,
    pub rate_y: f64,
}

impl TransverseResponse {
    /// Denominator `D(ω)`; valid for complex `ω`.
    pub fn denominator(&self, omega: C64) -> C64 {
        (self.rate_x - I * omega) * (self.rate_y - I * omega) + self.omega_z * self.omega_z
    }

    pub fn chi(&self, omega: C64) -> C64 {
        4.0 * self.sz * self.omega_z / self.denominator(omega)
    }

    pub fn chi0(&self) -> f64 {
        4.0 * self.sz * self.omega_z / (self.rate_x * self.rate_y + self.omega_z * self.omega_z)
    }

    pub fn susceptibility(&self, omegas: &[f64]) -> Susceptibility {
        Susceptibility {
            chi0: self.chi0(),
            chi_of_omega: Some(ChiGrid {
                omegas: omegas.to_vec(),
                values: omegas.iter().map(|&w| self.chi(C64::new(w, 0.0))).collect(),
            }),
        }
    }
}

/// `∫_{t1}^∞ t^p e^{μt} dt` for `Re μ ≤ 0`, `μ ≠ 0` (Abel limit when `Re μ = 0`).
fn tail_integral(mu: C64, p: u32, t1: f64) -> C64 {
    let e = (mu * t1).exp();
    let mut j = -e / mu;
    for k in 1..=p {
        j = -(t1.powi(k as i32)) * e / mu - (k as f64) / mu * j;
    }
    j
}

/// `χ(ω) = −8 ∫₀^∞ Im S(t) e^{iωt} dt`: Boole quadrature over the samples and
/// the exact integral of the analytic tail beyond them.
pub fn chi_from_correlator(corr: &CorrelationSeries, omega: f64) -> Result<C64> {
    if !omega.is_finite() {
        return Err(Error::InvalidParameter { name: "omega", reason: format!("{omega}") });
    }
    let dt = corr.dt();
    let f: Vec<C64> = corr
        .values()
        .iter()
        .enumerate()
        .map(|(k, s)| s.im * (I * omega * (k as f64 * dt)).exp())
        .collect();
    let (head, used) = boole(&f, dt);
    let t1 = used as f64 * dt;

    // Im(a t^p e^{λt}) = (a t^p e^{λt} − ā t^p e^{λ̄t}) / 2i
    let mut terms: Vec<(C64, C64, u32)> = Vec::new();
    let scale = corr.tail().iter().map(|m| m.amplitude.norm()).fold(0.0, f64::max);
    for m in corr.tail() {
        for (c, lam) in [(m.amplitude / (2.0 * I), m.exponent), (-m.amplitude.conj() / (2.0 * I), m.exponent.conj())] {
            let mu = lam + I * omega;
            match terms.iter_mut().find(|(_, u, p)| *p == m.power && (u - mu).norm() < 1e-12 * (1.0 + mu.norm())) {
                Some(t) => t.0 += c,
                None => terms.push((c, mu, m.power)),
            }
        }
    }
    let mut tail = C64::new(0.0, 0.0);
    for (c, mu, p) in terms {
        if c.norm() <= 1e-13 * scale {
            continue;
        }
        let rate_scale = 1.0 + (mu - I * omega).norm() + omega.abs();
        if mu.norm() <= 1e-12 * rate_scale || mu.re > 1e-12 * rate_scale {
            return Err(Error::NonIntegrable { omega });
        }
        tail += c * tail_integral(mu, p, t1);
    }
    let chi = -8.0 * (head + tail);
    if !(chi.re.is_finite() && chi.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if omega == 0.0 {
        if chi.im.abs() >= 1e-10 * chi.re.abs().max(1.0) {
            return Err(Error::ComplexStatic(chi.im));
        }
        return Ok(C64::new(chi.re, 0.0));
    }
    Ok(chi)
}

/// `χ(0)` of a single spin from its steady-state correlator.
pub fn static_susceptibility(model: &SpinModel) -> Result<Susceptibility> {
    let corr = steady_sx(model)?;
    Ok(Susceptibility::from_chi0(chi_from_correlator(&corr, 0.0)?.re))
}

/// `χ(0)` plus `χ(ω)` on `omegas`, from one steady-state correlator.
///
/// The sampling step is refined so that the fastest `e^{iωt}` is resolved as
/// finely as the correlator itself.
pub fn susceptibility_spectrum(model: &SpinModel, omegas: &[f64]) -> Result<Susceptibility> {
    let ss = steady_state(model)?;
    let mut grid = default_sx_grid(model, ss.rho())?;
    let w_max = omegas.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let dt = 1.0 / (STEPS_PER_PERIOD * w_max);
    if w_max > 0.0 && dt < grid.dt {
        let panels = (grid.tmax / (4.0 * dt)).ceil();
        grid = SampleGrid { tmax: panels * 4.0 * dt, dt };
    }
    let corr = two_time_sx(model, ss.rho(), grid.tmax, grid.dt)?;
    let chi0 = chi_from_correlator(&corr, 0.0)?.re;
    let values = omegas.par_iter().map(|&w| chi_from_correlator(&corr, w)).collect::<Result<Vec<_>>>()?;
    Ok(Susceptibility { chi0, chi_of_omega: Some(ChiGrid { omegas: omegas.to_vec(), values }) })
}

/// Weighted average over independent atoms.
pub fn ensemble_chi(members: &[(f64, Susceptibility)]) -> Result<Susceptibility> {
    if members.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if let Some((w, _)) = members.iter().find(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or non-finite")));
    }
    let total: f64 = members.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    let chi0 = members.iter().map(|(w, s)| w * s.chi0).sum();
    let first = &members[0].1.chi_of_omega;
    let grid = match first {
        None => {
            if members.iter().any(|(_, s)| s.chi_of_omega.is_some()) {
                return Err(Error::MismatchedGrids);
            }
            None
        }
        Some(g0) => {
            let mut values = vec![C64::new(0.0, 0.0); g0.values.len()];
            for (w, s) in members {
                let g = s.chi_of_omega.as_ref().ok_or(Error::MismatchedGrids)?;
                if g.omegas != g0.omegas {
                    return Err(Error::MismatchedGrids);
                }
                for (acc, v) in values.iter_mut().zip(&g.values) {
                    *acc += *w * v;
                }
            }
            Some(ChiGrid { omegas: g0.omegas.clone(), values })
        }
    };
    Ok(Susceptibility { chi0, chi_of_omega: grid })
}

/// Inverse retarded Nambu Green function of the cavity at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGreenSample {
    pub omega: f64,
    pub matrix: [[C64; 2]; 2],
    pub det: C64,
}

fn nambu(omega: C64, cavity: &CavityParams, sigma: C64) -> [[C64; 2]; 2] {
    let w = omega + I * cavity.kappa;
    [[w - cavity.omega0 - sigma, -sigma], [-sigma, -w - cavity.omega0 - sigma]]
}

fn det2(m: &[[C64; 2]; 2]) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `(ω+iκ)τ_z − ω0 − g²χ(ω)(1 + τ_x)` and its determinant.
pub fn cavity_det(omega: f64, cavity: &CavityParams, g: f64, chi: &Susceptibility) -> Result<CavityGreenSample> {
    let x = chi.at(omega)?;
    let matrix = nambu(C64::new(omega, 0.0), cavity, g * g * x);
    let det = if omega == 0.0 {
        let d = C64::new(
            cavity.omega0 * cavity.omega0 + cavity.kappa * cavity.kappa + 2.0 * cavity.omega0 * g * g * chi.chi0,
            0.0,
        );
        debug_assert!((det2(&matrix) - d).norm() <= 1e-12 * (1.0 + d.norm() + (g * g * chi.chi0).abs()));
        d
    } else {
        det2(&matrix)
    };
    Ok(CavityGreenSample { omega, matrix, det })
}

/// Determinant at complex `ω` with a closed-form response.
pub fn det_closed_form(omega: C64, cavity: &CavityParams, g: f64, resp: &TransverseResponse) -> C64 {
    det2(&nambu(omega, cavity, g * g * resp.chi(omega)))
}

type Poly = Vec<C64>;

fn poly_mul(a: &[C64], b: &[C64]) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(p: &[C64], x: C64) -> (C64, C64) {
    let mut v = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for c in p.iter().rev() {
        d = d * x + v;
        v = v * x + c;
    }
    (v, d)
}

/// Newton's method on `p(x)/Π(x − r)` over the already located roots `r`.
fn newton(p: &[C64], mut x: C64, found: &[C64], tol: f64) -> Result<C64> {
    const MAX_ITER: usize = 200;
    let (mut fx, _) = poly_eval(p, x);
    for _ in 0..MAX_ITER {
        let (_, dfx) = poly_eval(p, x);
        let pull: C64 = found.iter().map(|r| 1.0 / (x - r)).sum();
        let denom = dfx - fx * pull;
        if denom.norm() == 0.0 || !denom.re.is_finite() {
            break;
        }
        let step = fx / denom;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = x - step * lambda;
            let (ft, _) = poly_eval(p, trial);
            if ft.norm() < fx.norm() || ft.norm() == 0.0 {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || (step * lambda).norm() <= tol {
            return Ok(x);
        }
    }
    let (fx, _) = poly_eval(p, x);
    let scale = poly_eval(p, C64::new(0.0, 0.0)).0.norm().max(1.0);
    if fx.norm() <= 1e-10 * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence { iterations: MAX_ITER, residual: fx.norm() })
    }
}

/// Complex zeros of `det(ω)` with the closed-form `χ(ω)`.
///
/// `det(ω) = P(ω)/D(ω)` with the quartic `P = [ω0² − (ω+iκ)²]D + 8ω0g²⟨σ^z⟩ω_z`.
/// The four roots of `P` are followed by damped Newton continuation in `g²`
/// from the `g = 0` poles `±ω0 − iκ` and the zeros of `D`; roots that sit on a
/// zero of `D` are not zeros of `det` and are dropped.
pub fn polariton_roots(cavity: &CavityParams, g: f64, resp: &TransverseResponse) -> Result<Vec<C64>> {
    let (w0, k) = (cavity.omega0, cavity.kappa);
    let bare = vec![C64::new(w0 * w0 + k * k, 0.0), C64::new(0.0, -2.0 * k), C64::new(-1.0, 0.0)];
    let (a, b, wz) = (resp.rate_x, resp.rate_y, resp.omega_z);
    let d = vec![C64::new(a * b + wz * wz, 0.0), C64::new(0.0, -(a + b)), C64::new(-1.0, 0.0)];
    let base = poly_mul(&bare, &d);
    let coupling = 8.0 * w0 * resp.sz * wz;
    let poly_at = |g2: f64| {
        let mut p = base.clone();
        p[0] += coupling * g2;
        p
    };
    let scale = 1.0 + w0 + k + a + b + wz;
    let tol = 1e-15 * scale;

    let half = (a + b) / 2.0;
    let disc = C64::new(((a - b) / 2.0).powi(2) - wz * wz, 0.0).sqrt();
    let mut roots = vec![
        C64::new(w0, -k),
        C64::new(-w0, -k),
        -I * (C64::new(half, 0.0) - disc),
        -I * (C64::new(half, 0.0) + disc),
    ];
    let g2 = g * g;
    let steps = 64;
    for s in 1..=steps {
        let p = poly_at(g2 * s as f64 / steps as f64);
        for k in 0..roots.len() {
            roots[k] = newton(&p, roots[k], &roots[..k], tol)?;
        }
    }
    // polish each root on the undeflated polynomial
    let p = poly_at(g2);
    for r in roots.iter_mut() {
        *r = newton(&p, *r, &[], tol)?;
    }
    let d_scale = scale * scale;
    roots.retain(|&r| resp.denominator(r).norm() > 1e-9 * d_scale || coupling * g2 != 0.0);
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(roots)
}
