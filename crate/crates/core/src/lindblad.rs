//! Single-spin open-system engine.
//!
//! A [`SpinModel`] is the atom `h = ω_z σ^z` plus its dissipation channels.
//! Two-time correlators come from the quantum regression theorem: the
//! perturbed state is propagated with the same generator as `ρ` itself.
//!
//! Correlator convention: [`two_time_sx`] returns
//! `S_x(t) = Tr[σ^x e^{Lt}(ρ σ^x)] = ⟨σ^x(0) σ^x(t)⟩`, which is the complex
//! conjugate of `⟨σ^x(t) σ^x(0)⟩` (see [`CorrelatorOrder`]). For dephasing
//! this is `(1/4) e^{−γt} (cos ω_z t − 2i⟨σ^z⟩ sin ω_z t)`, and it is the
//! ordering for which `χ = −8 ∫ Im S_x` has the sign of `⟨σ^z⟩ ω_z`.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::expm::{self, Propagator};
use crate::qops::{
    devectorize, lindblad_generator, pauli, vectorize, Axis, DensityMatrix, LindbladChannel,
    OperatorMatrix, SuperOperator, SPECTRAL_TOL,
};
use crate::{Error, Result, C64};

/// Samples per unit of the fastest correlator time scale in the default grid.
const DEFAULT_STEPS_PER_UNIT: f64 = 40.0;
/// Envelope e-folds covered by the sampled part of the default grid.
const DEFAULT_EFOLDS: f64 = 12.0;
/// Upper bound on the number of samples of a default grid.
const MAX_SAMPLES: usize = 1 << 20;

/// One atom: detuning, dissipation and, when the steady state is not unique,
/// the conserved `⟨σ^z⟩` selecting it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    omega_z: f64,
    channels: Vec<LindbladChannel>,
    initial_sz: Option<f64>,
    generator: SuperOperator,
    nullity: usize,
}

impl SpinModel {
    pub fn new(omega_z: f64, channels: Vec<LindbladChannel>, initial_sz: Option<f64>) -> Result<Self> {
        if !omega_z.is_finite() {
            return Err(Error::InvalidParameter { name: "omega_z", reason: "not finite".into() });
        }
        if let Some(sz) = initial_sz {
            if !(-0.5..=0.5).contains(&sz) {
                return Err(Error::InvalidParameter {
                    name: "sz",
                    reason: format!("{sz} outside [-1/2, 1/2]"),
                });
            }
        }
        for ch in &channels {
            if ch.op.dim() != 2 {
                return Err(Error::DimensionMismatch { left: ch.op.dim(), right: 2 });
            }
        }
        let h = pauli(Axis::Z).scale(C64::new(omega_z, 0.0));
        let generator = lindblad_generator(&h, &channels)?;
        let nullity = generator.nullity()?;
        match (nullity > 1, initial_sz.is_some()) {
            (true, false) => return Err(Error::MissingInitialSz { nullity }),
            (false, true) => return Err(Error::UnexpectedInitialSz),
            _ => {}
        }
        Ok(Self { omega_z, channels, initial_sz, generator, nullity })
    }

    pub fn omega_z(&self) -> f64 {
        self.omega_z
    }

    pub fn channels(&self) -> &[LindbladChannel] {
        &self.channels
    }

    pub fn initial_sz(&self) -> Option<f64> {
        self.initial_sz
    }

    pub fn hamiltonian(&self) -> OperatorMatrix {
        pauli(Axis::Z).scale(C64::new(self.omega_z, 0.0))
    }

    pub fn generator(&self) -> &SuperOperator {
        &self.generator
    }

    /// Dimension of the generator's null space.
    pub fn nullity(&self) -> usize {
        self.nullity
    }
}

/// Result of [`steady_state`].
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyState {
    Unique(DensityMatrix),
    /// Null space larger than one; the state was selected by `initial_sz`.
    Degenerate { rho: DensityMatrix, nullity: usize },
}

impl SteadyState {
    pub fn rho(&self) -> &DensityMatrix {
        match self {
            SteadyState::Unique(r) | SteadyState::Degenerate { rho: r, .. } => r,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, SteadyState::Degenerate { .. })
    }
}

pub fn steady_state(model: &SpinModel) -> Result<SteadyState> {
    let gen = model.generator();
    if model.nullity > 1 {
        let sz = model.initial_sz.ok_or(Error::MissingInitialSz { nullity: model.nullity })?;
        let rho = DensityMatrix::diagonal(sz)?;
        let residual = gen.apply(rho.op()).max_abs();
        if residual > SPECTRAL_TOL * gen.frobenius_norm().max(1.0) {
            return Err(Error::DegenerateSteadyState(format!(
                "diagonal state with <sz> = {sz} is not stationary (residual {residual:e})"
            )));
        }
        return Ok(SteadyState::Degenerate { rho, nullity: model.nullity });
    }
    let svd = gen.as_mat().svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = svd.S();
    let n = gen.as_mat().nrows();
    let k = (0..n).min_by(|&a, &b| s[a].re.total_cmp(&s[b].re)).unwrap_or(0);
    let v: Vec<C64> = (0..n).map(|i| svd.V()[(i, k)]).collect();
    let op = devectorize(&v, gen.dim())?;
    Ok(SteadyState::Unique(DensityMatrix::from_numeric(&op)?))
}

/// `e^{Lt} ρ0`.
pub fn propagate(model: &SpinModel, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let p = Propagator::new(model.generator().as_mat())?.at(t);
    let v = expm::matvec(&p, &vectorize(rho0.op()));
    DensityMatrix::from_numeric(&devectorize(&v, rho0.dim())?)
}

/// Operator ordering of a two-time correlator `⟨·⟩` of `A` at time `t` and
/// `B` at time 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelatorOrder {
    /// `⟨A(t) B(0)⟩ = Tr[A e^{Lt}(B ρ)]`.
    OperatorFirst,
    /// `⟨B(0) A(t)⟩ = Tr[A e^{Lt}(ρ B)]`.
    StateFirst,
}

/// One term `amplitude · t^power · e^{exponent·t}` of the analytic tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMode {
    pub amplitude: C64,
    pub exponent: C64,
    pub power: u32,
}

impl TailMode {
    pub fn eval(&self, t: f64) -> C64 {
        self.amplitude * t.powi(self.power as i32) * (self.exponent * t).exp()
    }
}

/// Uniformly sampled two-time correlator plus an analytic tail that
/// reproduces it beyond the last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    dt: f64,
    values: Vec<C64>,
    tail: Vec<TailMode>,
}

impl CorrelationSeries {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.dt)
    }

    /// Time of the last sample; the tail takes over from here.
    pub fn t_end(&self) -> f64 {
        (self.values.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn tail(&self) -> &[TailMode] {
        &self.tail
    }

    pub fn tail_value(&self, t: f64) -> C64 {
        self.tail.iter().map(|m| m.eval(t)).sum()
    }

    /// Slowest decay rate among the tail modes (0 for a non-decaying tail).
    pub fn decay_rate(&self) -> f64 {
        if self.tail.is_empty() {
            return 0.0;
        }
        self.tail.iter().map(|m| (-m.exponent.re).max(0.0)).fold(f64::INFINITY, f64::min)
    }

    /// Oscillation frequency of the slowest tail mode.
    pub fn frequency(&self) -> f64 {
        self.tail
            .iter()
            .min_by(|a, b| (-a.exponent.re).total_cmp(&(-b.exponent.re)))
            .map(|m| m.exponent.im.abs())
            .unwrap_or(0.0)
    }

    /// Largest `max(|Re λ|, |Im λ|)` over the tail; sets the sampling step bound.
    pub fn fastest_scale(&self) -> f64 {
        fastest_scale(&self.tail)
    }
}

fn fastest_scale(tail: &[TailMode]) -> f64 {
    tail.iter().map(|m| m.exponent.re.abs().max(m.exponent.im.abs())).fold(0.0, f64::max)
}

/// Sampling grid for a correlator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub tmax: f64,
    pub dt: f64,
}

/// Correlator `Tr[A e^{Lt} X0]` of a dense generator, written as the row
/// functional `w = vec(Aᵀ)` applied to the propagated vector.
pub(crate) struct LinearCorrelator<'a> {
    pub generator: &'a Mat<C64>,
    pub functional: Vec<C64>,
    pub x0: Vec<C64>,
}

impl LinearCorrelator<'_> {
    pub fn new<'a>(
        generator: &'a Mat<C64>,
        observable: &OperatorMatrix,
        x0: &OperatorMatrix,
    ) -> LinearCorrelator<'a> {
        LinearCorrelator {
            generator,
            functional: vectorize(&observable.transpose()),
            x0: vectorize(x0),
        }
    }

    fn dot(&self, x: &[C64]) -> C64 {
        self.functional.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Exponential-mode decomposition of the correlator.
    fn modes(&self, prop: &Propagator) -> Result<Vec<TailMode>> {
        let s0 = self.dot(&self.x0).norm().max(f64::MIN_POSITIVE);
        let cutoff = 1e-13 * s0;
        match prop {
            Propagator::Spectral(e) => {
                let coeffs = expm::matvec(&e.inverse, &self.x0);
                let n = e.values.len();
                let mut modes = Vec::new();
                for (k, &c) in coeffs.iter().enumerate().take(n) {
                    let wv: C64 = (0..n).map(|i| self.functional[i] * e.vectors[(i, k)]).sum();
                    let amp = wv * c;
                    if amp.norm() > cutoff {
                        modes.push(TailMode { amplitude: amp, exponent: e.values[k], power: 0 });
                    }
                }
                Ok(merge_modes(modes, cutoff))
            }
            Propagator::Pade(_) => self.fitted_modes(cutoff),
        }
    }

    /// Near an exceptional point the eigenbasis is unusable; eigenvalues are
    /// clustered into Jordan blocks `t^p e^{λt}` and amplitudes fitted to
    /// exactly propagated samples.
    fn fitted_modes(&self, cutoff: f64) -> Result<Vec<TailMode>> {
        let vals = self.generator.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let scale = vals.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let mut clusters: Vec<(C64, u32)> = Vec::new();
        for v in vals {
            match clusters.iter_mut().find(|(c, _)| (c - v).norm() < 1e-6 * scale) {
                Some((c, m)) => {
                    *c = (*c * (*m as f64) + v) / (*m as f64 + 1.0);
                    *m += 1;
                }
                None => clusters.push((v, 1)),
            }
        }
        let basis: Vec<(C64, u32)> =
            clusters.iter().flat_map(|&(c, m)| (0..m).map(move |p| (c, p))).collect();
        let nb = basis.len();
        let k = (4 * nb).max(16);
        let h = 0.25 / scale;
        let n = self.generator.nrows();
        let p = expm::expm_pade(&Mat::from_fn(n, n, |i, j| self.generator[(i, j)] * h));
        let mut x = self.x0.clone();
        let mut ys = Vec::with_capacity(k);
        for _ in 0..k {
            ys.push(self.dot(&x));
            x = expm::matvec(&p, &x);
        }
        let a = Mat::from_fn(k, nb, |r, c| {
            let (lam, pw) = basis[c];
            let t = r as f64 * h;
            t.powi(pw as i32) * (lam * t).exp()
        });
        let ah = a.adjoint().to_owned();
        let normal = &ah * &a;
        let rhs = &ah * &Mat::from_fn(k, 1, |r, _| ys[r]);
        let coef = normal.partial_piv_lu().solve(&rhs);
        let modes = basis
            .iter()
            .enumerate()
            .filter(|(c, _)| coef[(*c, 0)].norm() > cutoff)
            .map(|(c, &(lam, pw))| TailMode { amplitude: coef[(c, 0)], exponent: lam, power: pw })
            .collect();
        Ok(modes)
    }

    pub fn default_grid(&self) -> Result<SampleGrid> {
        let prop = Propagator::new(self.generator)?;
        let modes = self.modes(&prop)?;
        Ok(default_grid_for(&modes))
    }

    pub fn series(&self, grid: SampleGrid) -> Result<CorrelationSeries> {
        let SampleGrid { tmax, dt } = grid;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        if !(tmax.is_finite() && tmax >= 0.0) {
            return Err(Error::InvalidGrid(format!("tmax = {tmax} must be non-negative")));
        }
        let prop = Propagator::new(self.generator)?;
        let tail = self.modes(&prop)?;
        let bound = fastest_scale(&tail);
        if bound > 0.0 && dt > 0.1 / bound * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "dt = {dt} exceeds 0.1 / {bound} (fastest correlator scale)"
            )));
        }
        let steps = (tmax / dt - 1e-9).ceil().max(0.0) as usize;
        if steps + 1 > MAX_SAMPLES {
            return Err(Error::InvalidGrid(format!("{} samples exceed the limit", steps + 1)));
        }
        let p = prop.at(dt);
        let mut x = self.x0.clone();
        let mut values = Vec::with_capacity(steps + 1);
        values.push(self.dot(&x));
        for _ in 0..steps {
            x = expm::matvec(&p, &x);
            values.push(self.dot(&x));
        }
        Ok(CorrelationSeries { dt, values, tail })
    }
}

fn merge_modes(modes: Vec<TailMode>, cutoff: f64) -> Vec<TailMode> {
    let mut out: Vec<TailMode> = Vec::new();
    for m in modes {
        match out.iter_mut().find(|o| o.power == m.power && (o.exponent - m.exponent).norm() < 1e-12) {
            Some(o) => o.amplitude += m.amplitude,
            None => out.push(m),
        }
    }
    out.retain(|m| m.amplitude.norm() > cutoff);
    out
}

fn default_grid_for(modes: &[TailMode]) -> SampleGrid {
    let fast = fastest_scale(modes);
    if fast == 0.0 {
        return SampleGrid { tmax: 0.0, dt: 1.0 };
    }
    let dt = 1.0 / (DEFAULT_STEPS_PER_UNIT * fast);
    let slow = modes.iter().map(|m| -m.exponent.re).filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
    let any_undamped = modes.iter().any(|m| m.exponent.re >= 0.0);
    let mut tmax = if slow.is_finite() && !any_undamped { DEFAULT_EFOLDS / slow } else { 0.0 };
    let quantum = 4.0 * dt;
    tmax = (tmax / quantum).ceil() * quantum;
    let cap = (MAX_SAMPLES - 1) as f64 * dt;
    if tmax > cap {
        tmax = ((cap / quantum).floor()) * quantum;
    }
    SampleGrid { tmax, dt }
}

fn sx_correlator<'a>(
    model: &'a SpinModel,
    rho: &DensityMatrix,
    order: CorrelatorOrder,
) -> LinearCorrelator<'a> {
    let sx = pauli(Axis::X);
    let x0 = match order {
        CorrelatorOrder::OperatorFirst => &sx * rho.op(),
        CorrelatorOrder::StateFirst => rho.op() * &sx,
    };
    LinearCorrelator::new(model.generator().as_mat(), &sx, &x0)
}

/// `S_x(t) = Tr[σ^x e^{Lt}(ρ σ^x)]` sampled on `[0, tmax]` with step `dt`.
///
/// `dt` must not exceed a tenth of the fastest time scale present in the
/// correlator. The tail is exact beyond `tmax`, so `tmax` only controls how
/// much of the integral is done by quadrature.
pub fn two_time_sx(model: &SpinModel, rho: &DensityMatrix, tmax: f64, dt: f64) -> Result<CorrelationSeries> {
    two_time_sx_ordered(model, rho, SampleGrid { tmax, dt }, CorrelatorOrder::StateFirst)
}

pub fn two_time_sx_ordered(
    model: &SpinModel,
    rho: &DensityMatrix,
    grid: SampleGrid,
    order: CorrelatorOrder,
) -> Result<CorrelationSeries> {
    sx_correlator(model, rho, order).series(grid)
}

/// Default grid for `S_x`: step 1/40 of the fastest mode scale, 12 e-folds of
/// the slowest decaying mode, no sampled part for a non-decaying tail.
pub fn default_sx_grid(model: &SpinModel, rho: &DensityMatrix) -> Result<SampleGrid> {
    sx_correlator(model, rho, CorrelatorOrder::StateFirst).default_grid()
}

/// [`two_time_sx`] on the default grid, starting from the model's steady state.
pub fn steady_sx(model: &SpinModel) -> Result<CorrelationSeries> {
    let ss = steady_state(model)?;
    let grid = default_sx_grid(model, ss.rho())?;
    two_time_sx_ordered(model, ss.rho(), grid, CorrelatorOrder::StateFirst)
}

/// `max(|Re λ|, |Im λ|)` over the eigenvalues of the model's generator.
pub fn max_rate(model: &SpinModel) -> Result<f64> {
    let ev = model.generator().eigenvalues()?;
    Ok(ev.iter().map(|l| l.re.abs().max(l.im.abs())).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn dephasing(wz: f64, g: f64, sz: f64) -> SpinModel {
        let ch = LindbladChannel::new(pauli(Axis::Z), g).unwrap();
        SpinModel::new(wz, vec![ch], Some(sz)).unwrap()
    }

    fn generalized(wz: f64, g: f64, t: f64) -> SpinModel {
        let l = &pauli(Axis::Minus) + &pauli(Axis::Plus).scale(c(t));
        SpinModel::new(wz, vec![LindbladChannel::new(l, g).unwrap()], None).unwrap()
    }

    fn thermal(wz: f64, g: f64, temp: f64) -> SpinModel {
        let n = if temp == 0.0 { 0.0 } else { 1.0 / ((wz / temp).exp() - 1.0) };
        let chans = vec![
            LindbladChannel::new(pauli(Axis::Minus), (1.0 + n) * g).unwrap(),
            LindbladChannel::new(pauli(Axis::Plus), n * g).unwrap(),
        ];
        SpinModel::new(wz, chans, None).unwrap()
    }

    fn methods_sx(t: f64, wz: f64, g: f64, sz: f64) -> C64 {
        C64::new((wz * t).cos(), -2.0 * sz * (wz * t).sin()) * (0.25 * (-g * t).exp())
    }

    #[test]
    fn degeneracy_detection() {
        let m = dephasing(1.0, 0.3, -0.5);
        assert_eq!(m.nullity(), 2);
        let ch = LindbladChannel::new(pauli(Axis::Z), 0.3).unwrap();
        assert_eq!(
            SpinModel::new(1.0, vec![ch.clone()], None).unwrap_err(),
            Error::MissingInitialSz { nullity: 2 }
        );
        let l = pauli(Axis::Minus);
        let decay = LindbladChannel::new(l, 0.3).unwrap();
        assert_eq!(SpinModel::new(1.0, vec![decay], Some(0.1)).unwrap_err(), Error::UnexpectedInitialSz);
        assert!(SpinModel::new(f64::NAN, vec![ch], Some(0.0)).is_err());
    }

    #[test]
    fn steady_polarizations() {
        for temp in [0.0, 0.3, 1.0, 5.0] {
            let ss = steady_state(&thermal(1.0, 0.2, temp)).unwrap();
            let expect = if temp == 0.0 { -0.5 } else { -0.5 * (1.0 / (2.0 * temp)).tanh() };
            assert!(!ss.is_degenerate());
            assert_abs_diff_eq!(ss.rho().sz(), expect, epsilon = 1e-12);
        }
        for t in [0.0, 0.25, 0.6, 1.0] {
            let ss = steady_state(&generalized(1.0, 0.2, t)).unwrap();
            assert_abs_diff_eq!(ss.rho().sz(), -0.5 * (1.0 - t * t) / (1.0 + t * t), epsilon = 1e-12);
        }
        let ss = steady_state(&dephasing(1.0, 0.3, -0.2)).unwrap();
        assert!(ss.is_degenerate());
        assert_abs_diff_eq!(ss.rho().sz(), -0.2, epsilon = 1e-15);
    }

    #[test]
    fn propagation_basics() {
        let m = dephasing(1.0, 0.3, 0.0);
        let rho0 = DensityMatrix::from_bloch(0.3, 0.1, -0.2).unwrap();
        assert_eq!(propagate(&m, &rho0, 0.0).unwrap(), rho0);
        assert!(matches!(propagate(&m, &rho0, -1.0), Err(Error::NegativeTime(_))));

        // coherence ρ_{↑↓} evolves as c e^{(−γ − iω)t}
        let t = 2.3;
        let rho = propagate(&m, &rho0, t).unwrap();
        let expect = rho0.op().get(0, 1) * C64::new(-0.3, -1.0).scale(t).exp();
        assert!((rho.op().get(0, 1) - expect).norm() < 1e-12);
        assert_abs_diff_eq!(rho.sz(), -0.2, epsilon = 1e-12);

        let th = thermal(1.0, 0.1, 0.7);
        let late = propagate(&th, &rho0, 50.0 / 0.1).unwrap();
        let ss = steady_state(&th).unwrap();
        assert!(late.op().max_abs_diff(ss.rho().op()) < 1e-10);
    }

    #[test]
    fn dephasing_correlator_matches_closed_form() {
        let (wz, g, sz) = (1.2, 0.25, -0.4);
        let m = dephasing(wz, g, sz);
        let ss = steady_state(&m).unwrap();
        let dt = 0.01;
        let series = two_time_sx(&m, ss.rho(), 12.0 / g, dt).unwrap();
        assert_abs_diff_eq!(series.values()[0].re, 0.25, epsilon = 1e-12);
        for (t, v) in series.times().zip(series.values()) {
            assert!((v - methods_sx(t, wz, g, sz)).norm() < 1e-10, "t = {t}");
            assert!(v.norm() <= 0.25 + 1e-12);
        }
        for t in [0.0, 3.0, 100.0] {
            assert!((series.tail_value(t) - methods_sx(t, wz, g, sz)).norm() < 1e-12);
        }
        assert_abs_diff_eq!(series.decay_rate(), g, epsilon = 1e-12);
        assert_abs_diff_eq!(series.frequency(), wz, epsilon = 1e-12);
    }

    #[test]
    fn undamped_unpolarized_is_real_cosine() {
        let m = SpinModel::new(0.8, vec![], Some(0.0)).unwrap();
        let ss = steady_state(&m).unwrap();
        let s = two_time_sx(&m, ss.rho(), 20.0, 0.05).unwrap();
        for (t, v) in s.times().zip(s.values()) {
            assert_abs_diff_eq!(v.re, 0.25 * (0.8 * t).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
        assert_eq!(s.decay_rate(), 0.0);
    }

    #[test]
    fn orderings_are_conjugate() {
        for m in [thermal(1.0, 0.3, 0.8), generalized(0.7, 0.4, 0.3), dephasing(1.0, 0.2, 0.3)] {
            let ss = steady_state(&m).unwrap();
            let grid = SampleGrid { tmax: 10.0, dt: 0.01 };
            let a = two_time_sx_ordered(&m, ss.rho(), grid, CorrelatorOrder::StateFirst).unwrap();
            let b = two_time_sx_ordered(&m, ss.rho(), grid, CorrelatorOrder::OperatorFirst).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y.conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn grid_preconditions() {
        let m = dephasing(1.0, 0.3, -0.5);
        let ss = steady_state(&m).unwrap();
        assert!(matches!(two_time_sx(&m, ss.rho(), 10.0, 0.2), Err(Error::InvalidGrid(_))));
        assert!(matches!(two_time_sx(&m, ss.rho(), -1.0, 0.01), Err(Error::InvalidGrid(_))));
        assert!(matches!(two_time_sx(&m, ss.rho(), 1.0, 0.0), Err(Error::InvalidGrid(_))));
        assert!(two_time_sx(&m, ss.rho(), 10.0, 0.1).is_ok());
    }

    #[test]
    fn thermal_envelope_rate() {
        let (wz, g, temp): (f64, f64, f64) = (1.0, 0.15, 0.6);
        let n = 1.0 / ((wz / temp).exp() - 1.0);
        let s = steady_sx(&thermal(wz, g, temp)).unwrap();
        assert_abs_diff_eq!(s.decay_rate(), (1.0 + 2.0 * n) * g, epsilon = 1e-10);
    }

    #[test]
    fn generalized_transverse_rates() {
        // σˣ damps at γ(1−t)², σʸ at γ(1+t)²; Re S_x starts decaying at γ(1−t)²/4
        // while the long-time modes decay at γ(1+t²) when underdamped.
        let (wz, g, t) = (1.0, 0.2, 0.4);
        let m = generalized(wz, g, t);
        let s = steady_sx(&m).unwrap();
        assert_abs_diff_eq!(s.decay_rate(), g * (1.0 + t * t), epsilon = 1e-10);
        let slope: C64 = s.tail().iter().map(|m| m.amplitude * m.exponent).sum();
        assert_abs_diff_eq!(slope.re, -g * (1.0 - t).powi(2) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn exceptional_point_uses_jordan_tail() {
        // generalized bath is critically damped at ω_z = 2γt
        let (g, t) = (0.5, 0.6);
        let m = generalized(2.0 * g * t, g, t);
        let ss = steady_state(&m).unwrap();
        let grid = default_sx_grid(&m, ss.rho()).unwrap();
        let s = two_time_sx(&m, ss.rho(), grid.tmax, grid.dt).unwrap();
        for (time, v) in s.times().zip(s.values()).step_by(37) {
            assert!((s.tail_value(time) - v).norm() < 1e-10, "t = {time}");
        }
    }

    #[test]
    fn sigma_x_channel_with_zero_detuning_does_not_decay() {
        // σˣ-noise at ω_z = 0 conserves σˣ as well, so the null space is 2-dimensional
        let l = &pauli(Axis::Minus) + &pauli(Axis::Plus);
        let m = SpinModel::new(0.0, vec![LindbladChannel::new(l, 0.3).unwrap()], Some(0.0)).unwrap();
        let ss = steady_state(&m).unwrap();
        let s = two_time_sx(&m, ss.rho(), 20.0, 0.05).unwrap();
        for v in s.values() {
            assert!((v - c(0.25)).norm() < 1e-12);
        }
        assert_eq!(s.decay_rate(), 0.0);
    }
}
