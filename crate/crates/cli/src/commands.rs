//! Subcommands. Each returns a table plus the exit status it implies.

use dicke_critic::baths::{closed_form_gc, closed_form_response, spin_model};
use dicke_critic::critical::{critical_point, g0, solve_gc, sweep as run_sweep, ChiMethod, Param, Point, SweepPlan};
use dicke_critic::lindblad::{default_sx_grid, steady_state, two_time_sx};
use dicke_critic::exactn::{full_steady_observables, FullSystemSpec};
use dicke_critic::meanfield::{find_threshold, normal_state, simulate};
use rayon::prelude::*;
use dicke_critic::response::{cavity_det, static_susceptibility, susceptibility_spectrum};
use dicke_critic::{BathSpec, CavityParams, CriticalResult, Error, Mode, C64};

use crate::config::{Method, RunConfig};
use crate::output::{Cell, Table};
use crate::{exit, CliError};

pub struct Outcome {
    pub table: Table,
    pub status: i32,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
}

fn status_cell(r: &CriticalResult) -> Cell {
    Cell::Text(match r {
        CriticalResult::Transition { .. } => "transition".into(),
        CriticalResult::NoTransition { reason } => reason.to_string(),
    })
}

fn chi_method(cfg: &RunConfig) -> Result<ChiMethod, CliError> {
    Ok(match cfg.method()? {
        Method::Numeric => ChiMethod::Quadrature,
        Method::ClosedForm => ChiMethod::ClosedForm(cfg.mode),
    })
}

pub fn gc(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if !cfg.axes.is_empty() {
        return Err(CliError::Usage("gc takes no sweep axis; use the sweep subcommand".into()));
    }
    let bath = cfg.bath()?;
    let cavity = cfg.cavity()?;
    let u = cfg.unit(cfg.omega_z)?;
    let (chi0, result) = match chi_method(cfg)? {
        ChiMethod::Quadrature => {
            let chi0 = static_susceptibility(&spin_model(bath, cfg.omega_z)?)?.chi0;
            (chi0, solve_gc(chi0, &cavity))
        }
        m => critical_point(bath, cfg.omega_z, &cavity, m)?,
    };
    let g_c = result.g_c().unwrap_or(f64::INFINITY);
    let mut table = Table::new(&["chi0", "g_c", "g_c_over_g0", "status"]);
    table.rows.push(vec![
        Cell::Num(chi0 * u),
        Cell::Num(g_c / u),
        Cell::Num(g_c / g0(cfg.omega_z, &cavity)),
        status_cell(&result),
    ]);
    let (status, notes) = match result {
        CriticalResult::Transition { .. } => (exit::OK, vec![]),
        CriticalResult::NoTransition { reason } => (exit::NO_TRANSITION, vec![format!("no transition: {reason}")]),
    };
    Ok(Outcome { table, status, notes })
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate_sweep()?;
    let plan = SweepPlan {
        base: Point { bath: cfg.bath()?.clone(), omega_z: cfg.omega_z, cavity: cfg.cavity()? },
        axes: cfg.axes.clone(),
        method: chi_method(cfg)?,
    };
    let rows = run_sweep(&plan)?;
    let mut columns: Vec<&str> = cfg.axes.iter().map(|(p, _)| p.label()).collect();
    columns.extend(["chi0", "g_c", "g_c_over_g0", "status"]);
    let mut table = Table::new(&columns);
    let wz_axis = cfg.axes.iter().position(|(p, _)| *p == Param::OmegaZ);
    for r in rows {
        let u = cfg.unit(wz_axis.map_or(cfg.omega_z, |k| r.values[k]))?;
        let mut cells: Vec<Cell> = r.values.iter().map(|&v| Cell::Num(v)).collect();
        cells.push(Cell::Num(r.chi0 * u));
        cells.push(Cell::Num(r.result.g_c().unwrap_or(f64::INFINITY) / u));
        cells.push(Cell::Num(r.ratio.unwrap_or(f64::INFINITY)));
        cells.push(status_cell(&r.result));
        table.rows.push(cells);
    }
    Ok(Outcome { table, status: exit::OK, notes: vec![] })
}

pub fn corr(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = spin_model(cfg.bath()?, cfg.omega_z)?;
    let u = cfg.unit(cfg.omega_z)?;
    let ss = steady_state(&model)?;
    let grid = default_sx_grid(&model, ss.rho())?;
    // A non-decaying correlator has no sampled part by default; show ten periods.
    let fallback = if cfg.omega_z != 0.0 { 20.0 * std::f64::consts::PI / cfg.omega_z.abs() } else { 10.0 };
    let tmax = cfg.tmax.unwrap_or(if grid.tmax > 0.0 { grid.tmax } else { fallback });
    let dt = cfg.dt.unwrap_or(grid.dt);
    if !(tmax > 0.0 && dt > 0.0 && dt <= tmax) {
        return Err(CliError::Usage(format!("need 0 < dt <= tmax, got dt = {dt}, tmax = {tmax}")));
    }
    let series = two_time_sx(&model, ss.rho(), tmax, dt)?;
    let mut table = Table::new(&["t", "re_sx", "im_sx"]);
    for (t, v) in series.times().zip(series.values()) {
        table.rows.push(vec![Cell::Num(t * u), Cell::Num(v.re), Cell::Num(v.im)]);
    }
    Ok(Outcome { table, status: exit::OK, notes: vec![] })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let bath = cfg.bath()?;
    let cavity = cfg.cavity()?;
    let u = cfg.unit(cfg.omega_z)?;
    let omegas = match &cfg.omegas {
        Some(w) => w.clone(),
        None => {
            let s = 3.0 * cavity.omega0.abs().max(cfg.omega_z.abs());
            (0..=600).map(|k| -s + k as f64 * s / 300.0).collect()
        }
    };
    let chi = match cfg.method()? {
        Method::Numeric => susceptibility_spectrum(&spin_model(bath, cfg.omega_z)?, &omegas)?,
        Method::ClosedForm if cfg.mode == Mode::PaperLiteral => {
            return Err(CliError::Usage("the paper-literal closed form is static only; use self-consistent".into()));
        }
        Method::ClosedForm => closed_form_response(bath, cfg.omega_z)?.susceptibility(&omegas),
    };
    let mut table = Table::new(&["omega", "re_det", "im_det", "re_chi", "im_chi"]);
    for &w in &omegas {
        let s = cavity_det(w, &cavity, cfg.g, &chi)?;
        let x = chi.at(w)?;
        table.rows.push(vec![
            Cell::Num(w / u),
            Cell::Num(s.det.re / (u * u)),
            Cell::Num(s.det.im / (u * u)),
            Cell::Num(x.re * u),
            Cell::Num(x.im * u),
        ]);
    }
    Ok(Outcome { table, status: exit::OK, notes: vec![] })
}

pub fn exact(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = spin_model(cfg.bath()?, cfg.omega_z)?;
    let cavity = cfg.cavity()?;
    let u = cfg.unit(cfg.omega_z)?;
    let gs = cfg.g_grid.as_ref().ok_or_else(|| CliError::Usage("no coupling grid (use --g-grid)".into()))?;
    let base = FullSystemSpec::new(cfg.atoms, cfg.cutoff, gs[0], cavity, model)?;
    let obs = gs
        .par_iter()
        .map(|&g| full_steady_observables(&base.with_g(g)?))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["g", "photon_number", "sz_mean"]);
    for (g, o) in gs.iter().zip(obs) {
        table.rows.push(vec![Cell::Num(g / u), Cell::Num(o.photon_number), Cell::Num(o.sz_mean)]);
    }
    Ok(Outcome { table, status: exit::OK, notes: vec![] })
}

pub fn trajectory(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = spin_model(cfg.bath()?, cfg.omega_z)?;
    let cavity = cfg.cavity()?;
    let u = cfg.unit(cfg.omega_z)?;
    let mut state = normal_state(&model)?;
    state.alpha = C64::new(cfg.alpha0, 0.0);
    let tr = simulate(&state, &cavity, &model, cfg.g, cfg.duration, cfg.dt.unwrap_or(0.1))?;
    let mut table = Table::new(&["t", "re_alpha", "im_alpha", "sx", "sy", "sz"]);
    for k in 0..tr.t.len() {
        table.rows.push(vec![
            Cell::Num(tr.t[k] * u),
            Cell::Num(tr.alpha[k].re),
            Cell::Num(tr.alpha[k].im),
            Cell::Num(tr.sx[k]),
            Cell::Num(tr.sy[k]),
            Cell::Num(tr.sz[k]),
        ]);
    }
    Ok(Outcome { table, status: exit::OK, notes: vec![] })
}

/// Nine points across the three bath families.
pub fn oracle_suite() -> Vec<Point> {
    let pt = |bath: BathSpec, omega_z: f64, omega0: f64, kappa: f64| Point {
        bath,
        omega_z,
        cavity: CavityParams::new(omega0, kappa).expect("valid cavity"),
    };
    vec![
        pt(BathSpec::Dephasing { gamma_phi: 0.3, sz: -0.5 }, 1.0, 1.0, 0.5),
        pt(BathSpec::Dephasing { gamma_phi: 1.0, sz: -0.3 }, 0.7, 1.3, 0.2),
        pt(BathSpec::Dephasing { gamma_phi: 0.05, sz: -0.5 }, 1.5, 0.8, 1.0),
        pt(BathSpec::Thermal { gamma_t: 0.1, temperature: 0.5 }, 1.0, 1.0, 0.5),
        pt(BathSpec::Thermal { gamma_t: 0.4, temperature: 1.5 }, 0.8, 1.2, 0.0),
        pt(BathSpec::Thermal { gamma_t: 0.05, temperature: 0.2 }, 2.0, 0.5, 1.0),
        pt(BathSpec::Generalized { gamma_t: 0.2, t: 0.4 }, 1.0, 1.0, 0.5),
        pt(BathSpec::Generalized { gamma_t: 0.5, t: 0.7 }, 1.0, 1.0, 0.3),
        pt(BathSpec::Generalized { gamma_t: 1.0, t: 0.2 }, 0.6, 1.5, 0.8),
    ]
}

/// Relative deviation of `other` from `reference`; agreeing "no transition"
/// counts as zero.
fn deviation(reference: Option<f64>, other: Option<f64>) -> f64 {
    match (reference, other) {
        (Some(a), Some(b)) => (b - a).abs() / a,
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

fn label(p: &Point) -> String {
    format!("{} omega_z={} omega0={} kappa={}", p.bath, p.omega_z, p.cavity.omega0, p.cavity.kappa)
}

pub fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let points = if cfg.oracle_suite {
        oracle_suite()
    } else {
        vec![Point { bath: cfg.bath()?.clone(), omega_z: cfg.omega_z, cavity: cfg.cavity()? }]
    };
    if !(cfg.tol > 0.0 && cfg.oracle_threshold > 0.0) {
        return Err(CliError::Usage("tol and oracle_threshold must be positive".into()));
    }
    let mut table = Table::new(&[
        "case",
        "g_c_closed_form",
        "g_c_quadrature",
        "g_star_meanfield",
        "dev_quadrature",
        "dev_meanfield",
        "status",
    ]);
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for p in &points {
        let u = cfg.unit(p.omega_z)?;
        let closed = closed_form_gc(&p.bath, p.omega_z, &p.cavity, cfg.mode)?.g_c();
        let quad = if cfg.oracle_quadrature {
            Some(critical_point(&p.bath, p.omega_z, &p.cavity, ChiMethod::Quadrature)?.1.g_c())
        } else {
            None
        };
        let mf = if cfg.oracle_meanfield {
            let model = spin_model(&p.bath, p.omega_z)?;
            match find_threshold(&p.cavity, &model, cfg.tol) {
                Ok(g) => Some(Some(g)),
                Err(Error::NoSignChange { .. }) => Some(None),
                Err(e) => return Err(e.into()),
            }
        } else {
            None
        };
        let dq = quad.map(|q| deviation(closed, q));
        let dm = mf.map(|m| deviation(closed, m));
        let dev = dq.unwrap_or(0.0).max(dm.unwrap_or(0.0));
        worst = worst.max(dev);
        let agree = dev <= cfg.oracle_threshold;
        if !agree {
            notes.push(format!("disagreement at {}: relative deviation {dev:e}", label(p)));
        }
        let g = |x: Option<Option<f64>>| Cell::Num(x.map_or(f64::NAN, |v| v.unwrap_or(f64::INFINITY) / u));
        table.rows.push(vec![
            Cell::Text(label(p)),
            g(Some(closed)),
            g(quad),
            g(mf),
            Cell::Num(dq.unwrap_or(f64::NAN)),
            Cell::Num(dm.unwrap_or(f64::NAN)),
            Cell::Text(if agree { "agree" } else { "disagree" }.into()),
        ]);
    }
    let status = if worst > cfg.oracle_threshold { exit::DISAGREEMENT } else { exit::OK };
    Ok(Outcome { table, status, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_rules() {
        assert!((deviation(Some(2.0), Some(2.002)) - 1e-3).abs() < 1e-15);
        assert_eq!(deviation(None, None), 0.0);
        assert!(deviation(Some(1.0), None).is_infinite());
    }

    #[test]
    fn suite_points_are_valid() {
        for p in oracle_suite() {
            p.bath.validate().unwrap();
        }
    }
}
