//! Critical coupling from the static susceptibility, and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baths::{closed_form_chi0, closed_form_gc, spin_model, BathSpec, CavityParams, Mode};
use crate::response::{ensemble_chi, static_susceptibility, Susceptibility};
use crate::{Error, Result};

/// `|χ(0)|·ω0` below which the spins count as unpolarized.
pub const CHI_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoTransitionReason {
    /// `χ(0) = 0`.
    Unpolarized,
    /// `χ(0) > 0`: population-inverted spins.
    WrongSign,
}

impl fmt::Display for NoTransitionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoTransitionReason::Unpolarized => "unpolarized",
            NoTransitionReason::WrongSign => "wrong-sign",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CriticalResult {
    Transition { g_c: f64 },
    NoTransition { reason: NoTransitionReason },
}

impl CriticalResult {
    pub fn g_c(&self) -> Option<f64> {
        match *self {
            CriticalResult::Transition { g_c } => Some(g_c),
            CriticalResult::NoTransition { .. } => None,
        }
    }
}

/// Solves `ω0² + κ² + 2ω0 g² χ(0) = 0`.
pub fn solve_gc(chi0: f64, cavity: &CavityParams) -> CriticalResult {
    if chi0.abs() * cavity.omega0 <= CHI_ZERO_TOL {
        return CriticalResult::NoTransition { reason: NoTransitionReason::Unpolarized };
    }
    if chi0 > 0.0 {
        return CriticalResult::NoTransition { reason: NoTransitionReason::WrongSign };
    }
    let num = cavity.omega0 * cavity.omega0 + cavity.kappa * cavity.kappa;
    CriticalResult::Transition { g_c: (-num / (2.0 * cavity.omega0 * chi0)).sqrt() }
}

/// `ω0² + κ² + 2ω0 g² χ(0)`.
pub fn residual(g: f64, chi0: f64, cavity: &CavityParams) -> f64 {
    cavity.omega0 * cavity.omega0 + cavity.kappa * cavity.kappa + 2.0 * cavity.omega0 * g * g * chi0
}

/// Critical coupling of fully polarized, undamped spins, `½√(ω_z(ω0² + κ²)/ω0)`.
pub fn g0(omega_z: f64, cavity: &CavityParams) -> f64 {
    0.5 * (omega_z * cavity.weight()).sqrt()
}

/// `g_c(κ)/g_c(0)` at the same `χ(0)` and `ω0`; `None` without a transition.
pub fn kappa_scaling(at_zero: &CriticalResult, cavity: &CavityParams) -> Option<f64> {
    let g = at_zero.g_c()?;
    let chi0 = -cavity.omega0 / (2.0 * g * g);
    Some(solve_gc(chi0, cavity).g_c()? / g)
}

/// How `χ(0)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiMethod {
    ClosedForm(Mode),
    /// Quadrature of the numerically propagated correlator.
    Quadrature,
}

/// `χ(0)` and `g_c` for one spin species.
pub fn critical_point(bath: &BathSpec, omega_z: f64, cavity: &CavityParams, method: ChiMethod) -> Result<(f64, CriticalResult)> {
    match method {
        ChiMethod::ClosedForm(mode) => {
            Ok((closed_form_chi0(bath, omega_z, mode)?, closed_form_gc(bath, omega_z, cavity, mode)?))
        }
        ChiMethod::Quadrature => {
            let chi0 = static_susceptibility(&spin_model(bath, omega_z)?)?.chi0;
            Ok((chi0, solve_gc(chi0, cavity)))
        }
    }
}

/// `g_c` of independent atoms in different baths, weighted by population.
pub fn ensemble_gc(
    members: &[(f64, BathSpec)],
    omega_z: f64,
    cavity: &CavityParams,
    method: ChiMethod,
) -> Result<(f64, CriticalResult)> {
    let chis = members
        .iter()
        .map(|(w, b)| Ok((*w, Susceptibility::from_chi0(critical_point(b, omega_z, cavity, method)?.0))))
        .collect::<Result<Vec<_>>>()?;
    let chi = ensemble_chi(&chis)?;
    Ok((chi.chi0, solve_gc(chi.chi0, cavity)))
}

/// Sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    #[serde(rename = "omega_z")]
    OmegaZ,
    #[serde(rename = "omega0")]
    Omega0,
    #[serde(rename = "kappa")]
    Kappa,
    /// The bath rate (`γ_φ` or `γ_t`).
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "T")]
    Temperature,
    #[serde(rename = "t")]
    Mixing,
    #[serde(rename = "sz")]
    Sz,
}

impl Param {
    pub fn label(&self) -> &'static str {
        match self {
            Param::OmegaZ => "omega_z",
            Param::Omega0 => "omega0",
            Param::Kappa => "kappa",
            Param::Gamma => "gamma",
            Param::Temperature => "T",
            Param::Mixing => "t",
            Param::Sz => "sz",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "omega_z" => Param::OmegaZ,
            "omega0" => Param::Omega0,
            "kappa" => Param::Kappa,
            "gamma" => Param::Gamma,
            "T" => Param::Temperature,
            "t" => Param::Mixing,
            "sz" => Param::Sz,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "sweep axis",
                    reason: format!("`{s}` (expected omega_z, omega0, kappa, gamma, T, t or sz)"),
                })
            }
        })
    }
}

/// One point of parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub bath: BathSpec,
    pub omega_z: f64,
    pub cavity: CavityParams,
}

impl Point {
    pub fn with(&self, p: Param, v: f64) -> Result<Point> {
        let mut out = self.clone();
        let mismatch = || Error::InvalidParameter {
            name: "sweep axis",
            reason: format!("`{p}` does not apply to a {} bath", self.bath.name()),
        };
        match (p, &mut out.bath) {
            (Param::OmegaZ, _) => out.omega_z = v,
            (Param::Omega0, _) => out.cavity = CavityParams::new(v, self.cavity.kappa)?,
            (Param::Kappa, _) => out.cavity = CavityParams::new(self.cavity.omega0, v)?,
            (Param::Gamma, BathSpec::Dephasing { gamma_phi, .. }) => *gamma_phi = v,
            (Param::Gamma, BathSpec::Thermal { gamma_t, .. } | BathSpec::Generalized { gamma_t, .. }) => *gamma_t = v,
            (Param::Temperature, BathSpec::Thermal { temperature, .. }) => *temperature = v,
            (Param::Mixing, BathSpec::Generalized { t, .. }) => *t = v,
            (Param::Sz, BathSpec::Dephasing { sz, .. }) => *sz = v,
            _ => return Err(mismatch()),
        }
        if !out.omega_z.is_finite() {
            return Err(Error::InvalidParameter { name: "omega_z", reason: format!("{}", out.omega_z) });
        }
        out.bath.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub base: Point,
    /// One or two axes; the first is the outer loop.
    pub axes: Vec<(Param, Vec<f64>)>,
    pub method: ChiMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Swept values in axis order.
    pub values: Vec<f64>,
    pub chi0: f64,
    pub result: CriticalResult,
    pub g0: f64,
    /// `g_c/g_0`; absent without a transition.
    pub ratio: Option<f64>,
}

/// Evaluates one row per grid point, in grid order.
pub fn sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    if plan.axes.is_empty() || plan.axes.len() > 2 {
        return Err(Error::InvalidParameter {
            name: "sweep axis",
            reason: format!("{} axes given, expected 1 or 2", plan.axes.len()),
        });
    }
    if plan.axes.iter().any(|(_, g)| g.is_empty()) {
        return Err(Error::EmptyGrid);
    }
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for (_, grid) in &plan.axes {
        points = points
            .into_iter()
            .flat_map(|prefix| grid.iter().map(move |&v| [prefix.clone(), vec![v]].concat()))
            .collect();
    }
    points
        .par_iter()
        .map(|values| {
            let mut pt = plan.base.clone();
            for ((param, _), &v) in plan.axes.iter().zip(values) {
                pt = pt.with(*param, v)?;
            }
            let (chi0, result) = critical_point(&pt.bath, pt.omega_z, &pt.cavity, plan.method)?;
            let g0 = g0(pt.omega_z, &pt.cavity);
            Ok(SweepRow { values: values.clone(), chi0, result, g0, ratio: result.g_c().map(|g| g / g0) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cav(w0: f64, k: f64) -> CavityParams {
        CavityParams::new(w0, k).unwrap()
    }

    #[test]
    fn solve_examples() {
        assert_relative_eq!(solve_gc(-1.6, &cav(1.0, 0.0)).g_c().unwrap(), 0.5590169943749474, max_relative = 1e-15);
        assert_eq!(
            solve_gc(0.0, &cav(1.0, 0.0)),
            CriticalResult::NoTransition { reason: NoTransitionReason::Unpolarized }
        );
        assert_eq!(
            solve_gc(0.3, &cav(1.0, 0.0)),
            CriticalResult::NoTransition { reason: NoTransitionReason::WrongSign }
        );
        let wz = 1.7;
        assert_relative_eq!(solve_gc(-2.0 / wz, &cav(wz, 0.0)).g_c().unwrap(), 0.5 * wz, max_relative = 1e-15);
        let g = solve_gc(-1.0, &cav(1.0, 1.0)).g_c().unwrap();
        assert_relative_eq!(g, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn residual_vanishes() {
        for &(chi0, w0, k) in &[(-1.6, 1.0, 0.0), (-0.03, 2.5, 0.7), (-12.0, 0.1, 3.0)] {
            let c = cav(w0, k);
            let g = solve_gc(chi0, &c).g_c().unwrap();
            assert!(residual(g, chi0, &c).abs() < 1e-12 * (w0 * w0 + k * k));
        }
    }

    #[test]
    fn kappa_ratios() {
        let r0 = solve_gc(-0.8, &cav(1.3, 0.0));
        assert_relative_eq!(kappa_scaling(&r0, &cav(1.3, 1.3)).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(kappa_scaling(&r0, &cav(1.3, 2.6)).unwrap(), 5f64.sqrt(), max_relative = 1e-14);
        assert_eq!(kappa_scaling(&r0, &cav(1.3, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn mixed_ensemble_raises_gc_by_sqrt2() {
        let c = cav(1.0, 0.2);
        let pol = BathSpec::dephasing(0.3, -0.5).unwrap();
        let unpol = BathSpec::dephasing(0.3, 0.0).unwrap();
        let m = ChiMethod::ClosedForm(Mode::SelfConsistent);
        let single = critical_point(&pol, 1.0, &c, m).unwrap().1.g_c().unwrap();
        let same = ensemble_gc(&[(0.5, pol.clone()), (0.5, pol.clone())], 1.0, &c, m).unwrap().1.g_c().unwrap();
        assert_eq!(same, single);
        let mixed = ensemble_gc(&[(0.5, pol), (0.5, unpol)], 1.0, &c, m).unwrap().1.g_c().unwrap();
        assert_relative_eq!(mixed / single, 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn sweep_order_and_shape() {
        let base = Point { bath: BathSpec::generalized(0.2, 0.0).unwrap(), omega_z: 1.0, cavity: cav(1.0, 0.5) };
        let plan = SweepPlan {
            base,
            axes: vec![(Param::Mixing, vec![0.0, 0.5, 1.0]), (Param::Kappa, vec![0.0, 1.0])],
            method: ChiMethod::ClosedForm(Mode::SelfConsistent),
        };
        let rows = sweep(&plan).unwrap();
        let vals: Vec<_> = rows.iter().map(|r| r.values.clone()).collect();
        assert_eq!(vals, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.0], vec![0.5, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(rows[4].ratio.is_none());
        assert!(rows.iter().all(|r| r.g0 > 0.0));
        let empty = SweepPlan { axes: vec![(Param::Mixing, vec![])], ..plan.clone() };
        assert_eq!(sweep(&empty), Err(Error::EmptyGrid));
        let wrong = SweepPlan { axes: vec![(Param::Temperature, vec![1.0])], ..plan };
        assert!(sweep(&wrong).is_err());
    }

    #[test]
    fn unit_normalization_point() {
        let base = Point { bath: BathSpec::generalized(0.3, 0.0).unwrap(), omega_z: 1.0, cavity: cav(1.0, 0.0) };
        let plan = SweepPlan {
            base,
            axes: vec![(Param::Gamma, vec![0.0])],
            method: ChiMethod::ClosedForm(Mode::SelfConsistent),
        };
        assert_eq!(sweep(&plan).unwrap()[0].ratio, Some(1.0));
    }

    #[test]
    fn param_labels_round_trip() {
        for p in [Param::OmegaZ, Param::Omega0, Param::Kappa, Param::Gamma, Param::Temperature, Param::Mixing, Param::Sz] {
            assert_eq!(p.label().parse::<Param>().unwrap(), p);
        }
        assert!("beta".parse::<Param>().is_err());
    }
}
