//! Exact Liouvillian of `N` identical atoms coupled to one truncated cavity
//! mode:
//!
//! ```text
//! H = ω0 a†a + ω_z Σ_j σ^z_j + (2g/√N) Σ_j σ^x_j (a + a†)
//! ```
//!
//! with cavity decay `a` at rate `κ` and each atom's channels, all in the
//! doubled dissipator convention. The basis is `|n⟩ ⊗ |s_1⟩ ⊗ … ⊗ |s_N⟩`.

use std::collections::BTreeMap;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::baths::CavityParams;
use crate::lindblad::{steady_state, CorrelationSeries, LinearCorrelator, SampleGrid, SpinModel};
use crate::qops::{pauli, Axis, OperatorMatrix, SuperOperator};
use crate::{Error, Result, C64};

/// Largest Hilbert-space dimension accepted.
pub const MAX_HILBERT_DIM: usize = 128;
/// Largest atom count accepted.
pub const MAX_ATOMS: usize = 4;
/// Largest Hilbert dimension whose steady state is found by dense LU.
const DENSE_STEADY_DIM: usize = 32;
/// Largest generator dimension propagated densely for correlators.
const DENSE_CORRELATOR_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct FullSystemSpec {
    pub n_atoms: usize,
    /// Photon states `0..n_c`.
    pub n_c: usize,
    pub g: f64,
    pub cavity: CavityParams,
    pub model: SpinModel,
}

impl FullSystemSpec {
    pub fn new(n_atoms: usize, n_c: usize, g: f64, cavity: CavityParams, model: SpinModel) -> Result<Self> {
        if !(1..=MAX_ATOMS).contains(&n_atoms) {
            return Err(Error::InvalidParameter { name: "N", reason: format!("{n_atoms} outside 1..={MAX_ATOMS}") });
        }
        if n_c == 0 {
            return Err(Error::InvalidParameter { name: "n_c", reason: "must be >= 1".into() });
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidParameter { name: "g", reason: format!("{g} must be >= 0") });
        }
        let d = hilbert_dim(n_atoms, n_c);
        if d > MAX_HILBERT_DIM {
            return Err(Error::DimensionGuard(d));
        }
        Ok(Self { n_atoms, n_c, g, cavity, model })
    }

    pub fn hilbert_dim(&self) -> usize {
        hilbert_dim(self.n_atoms, self.n_c)
    }

    pub fn with_cutoff(&self, n_c: usize) -> Result<Self> {
        Self::new(self.n_atoms, n_c, self.g, self.cavity, self.model.clone())
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.n_atoms, self.n_c, g, self.cavity, self.model.clone())
    }
}

fn hilbert_dim(n_atoms: usize, n_c: usize) -> usize {
    n_c.saturating_mul(1usize.checked_shl(n_atoms as u32).unwrap_or(usize::MAX))
}

fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

fn annihilation(n_c: usize) -> Mat<C64> {
    Mat::from_fn(n_c, n_c, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

fn eye(n: usize) -> Mat<C64> {
    Mat::identity(n, n)
}

/// Single-atom operator `op` on atom `j` (0-based) in the full space.
fn atom_op(spec: &FullSystemSpec, op: &Mat<C64>, j: usize) -> Mat<C64> {
    let id2 = eye(2);
    let mut m = eye(spec.n_c);
    for k in 0..spec.n_atoms {
        m = kron(&m, if k == j { op } else { &id2 });
    }
    m
}

fn cavity_op(spec: &FullSystemSpec, op: &Mat<C64>) -> Mat<C64> {
    kron(op, &eye(1 << spec.n_atoms))
}

fn hamiltonian(spec: &FullSystemSpec) -> Mat<C64> {
    let a = annihilation(spec.n_c);
    let ad = a.adjoint().to_owned();
    let n_op = cavity_op(spec, &(&ad * &a));
    let quad = cavity_op(spec, &(&a + &ad));
    let h_atom = spec.model.hamiltonian();
    let sx = pauli(Axis::X);
    let coupling = 2.0 * spec.g / (spec.n_atoms as f64).sqrt();
    let d = spec.hilbert_dim();
    let mut h = Mat::from_fn(d, d, |i, j| n_op[(i, j)] * spec.cavity.omega0);
    for j in 0..spec.n_atoms {
        let hj = atom_op(spec, h_atom.as_mat(), j);
        let xj = atom_op(spec, sx.as_mat(), j);
        let xq = &xj * &quad;
        h = Mat::from_fn(d, d, |r, c| h[(r, c)] + hj[(r, c)] + xq[(r, c)] * coupling);
    }
    h
}

fn channels(spec: &FullSystemSpec) -> Vec<(Mat<C64>, f64)> {
    let mut out = Vec::new();
    if spec.cavity.kappa > 0.0 {
        out.push((cavity_op(spec, &annihilation(spec.n_c)), spec.cavity.kappa));
    }
    for ch in spec.model.channels() {
        if ch.rate == 0.0 {
            continue;
        }
        for j in 0..spec.n_atoms {
            out.push((atom_op(spec, ch.op.as_mat(), j), ch.rate));
        }
    }
    out
}

/// Sparse Liouvillian in column-stacked vectorization.
#[derive(Debug, Clone)]
pub struct FullGenerator {
    d: usize,
    entries: BTreeMap<(usize, usize), C64>,
}

fn nonzeros(m: &Mat<C64>) -> Vec<(usize, usize, C64)> {
    let mut v = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != C64::new(0.0, 0.0) {
                v.push((i, j, z));
            }
        }
    }
    v
}

impl FullGenerator {
    /// Hilbert-space dimension.
    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    fn add(&mut self, r: usize, c: usize, z: C64) {
        *self.entries.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += z;
    }

    /// `kron(x, y)` scaled by `s`.
    fn add_kron(&mut self, x: &[(usize, usize, C64)], y: &[(usize, usize, C64)], s: C64) {
        let d = self.d;
        for &(p, q, xv) in x {
            for &(i, j, yv) in y {
                self.add(p * d + i, q * d + j, s * xv * yv);
            }
        }
    }

    /// `max_col |Σ_i L[(i,i), col]|`: deviation from trace preservation.
    pub fn trace_defect(&self) -> f64 {
        let mut sums = vec![C64::new(0.0, 0.0); self.d * self.d];
        for (&(r, c), &z) in &self.entries {
            if r % (self.d + 1) == 0 {
                sums[c] += z;
            }
        }
        sums.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.d * self.d;
        let mut m = Mat::<C64>::zeros(n, n);
        for (&(r, c), &z) in &self.entries {
            m[(r, c)] = z;
        }
        m
    }

    pub fn to_super_operator(&self) -> Result<SuperOperator> {
        SuperOperator::from_mat(self.d, self.to_dense())
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for (&(r, c), &z) in &self.entries {
            y[r] += z * x[c];
        }
        y
    }
}

/// `−i(I⊗H − Hᵀ⊗I) + Σ γ(2 L̄⊗L − I⊗L†L − (L†L)ᵀ⊗I)`.
pub fn build_full_generator(spec: &FullSystemSpec) -> Result<FullGenerator> {
    let d = spec.hilbert_dim();
    if d > MAX_HILBERT_DIM {
        return Err(Error::DimensionGuard(d));
    }
    let mut gen = FullGenerator { d, entries: BTreeMap::new() };
    let id = nonzeros(&eye(d));
    let mut k = hamiltonian(spec);
    k = Mat::from_fn(d, d, |i, j| k[(i, j)] * C64::new(0.0, -1.0));
    for (l, rate) in channels(spec) {
        let ldl = l.adjoint() * &l;
        k = Mat::from_fn(d, d, |i, j| k[(i, j)] - ldl[(i, j)] * rate);
        let lbar = nonzeros(&l.conjugate().to_owned());
        gen.add_kron(&lbar, &nonzeros(&l), C64::new(2.0 * rate, 0.0));
    }
    // −iH − γL†L acts from the left; its adjoint from the right
    let kt = nonzeros(&k);
    let kd = nonzeros(&k.adjoint().to_owned().transpose().to_owned());
    let one = C64::new(1.0, 0.0);
    gen.add_kron(&id, &kt, one);
    gen.add_kron(&kd, &id, one);
    gen.entries.retain(|_, z| *z != C64::new(0.0, 0.0));
    Ok(gen)
}

/// Observables of the exact steady state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SteadyObservables {
    pub photon_number: f64,
    /// `(1/N) Σ_j ⟨σ^z_j⟩`.
    pub sz_mean: f64,
    /// `(1/N) Σ_j ⟨σ^x_j⟩`.
    pub sx_mean: f64,
}

/// Steady state as a `d × d` matrix, by solving `L ρ = 0` with the first
/// equation replaced by `Tr ρ = 1`.
pub fn full_steady_state(spec: &FullSystemSpec) -> Result<Mat<C64>> {
    if spec.g == 0.0 && (spec.model.nullity() > 1 || (spec.cavity.kappa == 0.0 && spec.n_c > 1)) {
        return Err(Error::DegenerateSteadyState("uncoupled atoms or cavity keep a conserved quantity".into()));
    }
    let gen = build_full_generator(spec)?;
    let d = gen.d;
    let n = d * d;
    let trace_row: Vec<usize> = (0..d).map(|i| i * (d + 1)).collect();
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    let x = if d <= DENSE_STEADY_DIM {
        let mut m = gen.to_dense();
        for c in 0..n {
            m[(0, c)] = C64::new(0.0, 0.0);
        }
        for &c in &trace_row {
            m[(0, c)] = C64::new(1.0, 0.0);
        }
        m.partial_piv_lu().solve(&rhs)
    } else {
        let mut trip: Vec<Triplet<usize, usize, C64>> =
            gen.entries.iter().filter(|((r, _), _)| *r != 0).map(|(&(r, c), &z)| Triplet::new(r, c, z)).collect();
        trip.extend(trace_row.iter().map(|&c| Triplet::new(0, c, C64::new(1.0, 0.0))));
        let m = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let lu = m.sp_lu().map_err(|e| Error::Linalg(format!("{e:?}")))?;
        lu.solve(&rhs)
    };
    let v: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !max.is_finite() || max > 1.0 + 1e-6 {
        return Err(Error::DegenerateSteadyState(format!("bordered system is singular (max |ρ_ij| = {max:e})")));
    }
    let resid = gen.apply(&v).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = gen.entries.values().map(|z| z.norm()).fold(1.0, f64::max);
    if resid > 1e-8 * scale {
        return Err(Error::DegenerateSteadyState(format!("residual {resid:e}")));
    }
    let rho = Mat::from_fn(d, d, |i, j| 0.5 * (v[i + j * d] + v[j + i * d].conj()));
    Ok(rho)
}

fn expect(op: &Mat<C64>, rho: &Mat<C64>) -> f64 {
    let d = rho.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += op[(i, k)] * rho[(k, i)];
        }
    }
    acc.re
}

pub fn full_steady_observables(spec: &FullSystemSpec) -> Result<SteadyObservables> {
    let rho = full_steady_state(spec)?;
    let a = annihilation(spec.n_c);
    let n_op = cavity_op(spec, &(a.adjoint() * &a));
    let (sz, sx) = (pauli(Axis::Z), pauli(Axis::X));
    let n = spec.n_atoms as f64;
    let mut out = SteadyObservables { photon_number: expect(&n_op, &rho), sz_mean: 0.0, sx_mean: 0.0 };
    for j in 0..spec.n_atoms {
        out.sz_mean += expect(&atom_op(spec, sz.as_mat(), j), &rho) / n;
        out.sx_mean += expect(&atom_op(spec, sx.as_mat(), j), &rho) / n;
    }
    Ok(out)
}

/// Relative change of the photon number when the cutoff grows by `extra`.
pub fn cutoff_change(spec: &FullSystemSpec, extra: usize) -> Result<f64> {
    let a = full_steady_observables(spec)?.photon_number;
    let b = full_steady_observables(&spec.with_cutoff(spec.n_c + extra)?)?.photon_number;
    Ok((b - a).abs() / b.abs().max(f64::MIN_POSITIVE))
}

/// Atomic `S_x(t) = Tr[σ^x e^{Lt}(ρ σ^x)]` computed in the full atom-cavity
/// space for one uncoupled atom, starting from the vacuum times the atom's
/// steady state.
pub fn full_regression_sx(spec: &FullSystemSpec, grid: SampleGrid) -> Result<CorrelationSeries> {
    if spec.n_atoms != 1 {
        return Err(Error::InvalidParameter { name: "N", reason: "correlator check needs N = 1".into() });
    }
    if spec.g != 0.0 {
        return Err(Error::InvalidParameter { name: "g", reason: "correlator check needs g = 0".into() });
    }
    let d = spec.hilbert_dim();
    if d * d > DENSE_CORRELATOR_DIM {
        return Err(Error::DimensionGuard(d));
    }
    let gen = build_full_generator(spec)?.to_dense();
    let atom = steady_state(&spec.model)?;
    let mut vac = Mat::<C64>::zeros(spec.n_c, spec.n_c);
    vac[(0, 0)] = C64::new(1.0, 0.0);
    let rho = kron(&vac, atom.rho().op().as_mat());
    let sx = atom_op(spec, pauli(Axis::X).as_mat(), 0);
    let x0 = OperatorMatrix::from_mat(&rho * &sx)?;
    let obs = OperatorMatrix::from_mat(sx)?;
    LinearCorrelator::new(&gen, &obs, &x0).series(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::{spin_model, BathSpec};
    use crate::lindblad::two_time_sx;

    fn cav(w0: f64, k: f64) -> CavityParams {
        CavityParams::new(w0, k).unwrap()
    }

    #[test]
    fn dimension_guard() {
        let m = spin_model(&BathSpec::generalized(0.2, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!(FullSystemSpec::new(4, 9, 0.1, cav(1.0, 0.5), m.clone()).unwrap_err(), Error::DimensionGuard(144));
        assert!(FullSystemSpec::new(4, 8, 0.1, cav(1.0, 0.5), m.clone()).is_ok());
        assert!(FullSystemSpec::new(5, 1, 0.1, cav(1.0, 0.5), m).is_err());
    }

    #[test]
    fn generator_preserves_trace() {
        let m = spin_model(&BathSpec::thermal(0.2, 0.7).unwrap(), 1.0).unwrap();
        let spec = FullSystemSpec::new(2, 4, 0.4, cav(1.0, 0.3), m).unwrap();
        let gen = build_full_generator(&spec).unwrap();
        assert!(gen.trace_defect() < 1e-12);
    }

    #[test]
    fn single_atom_block_matches_engine() {
        // one photon state: the generator is the bare atomic one
        let m = spin_model(&BathSpec::generalized(0.3, 0.4).unwrap(), 0.8).unwrap();
        let spec = FullSystemSpec::new(1, 1, 0.0, cav(1.0, 0.0), m.clone()).unwrap();
        let dense = build_full_generator(&spec).unwrap().to_dense();
        let atom = m.generator().as_mat();
        for i in 0..4 {
            for j in 0..4 {
                assert!((dense[(i, j)] - atom[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn decoupled_vacuum_is_stationary() {
        let m = SpinModel::new(1.0, vec![], Some(-0.3)).unwrap();
        let spec = FullSystemSpec::new(1, 3, 0.0, cav(1.0, 0.5), m).unwrap();
        let gen = build_full_generator(&spec).unwrap();
        let d = spec.hilbert_dim();
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        v[0] = C64::new(0.8, 0.0);
        v[1 + d] = C64::new(0.2, 0.0);
        assert!(gen.apply(&v).iter().all(|z| z.norm() < 1e-15));
        let ev = gen.to_super_operator().unwrap().eigenvalues().unwrap();
        let zeros = ev.iter().filter(|z| z.norm() < 1e-9).count();
        // populations of the two spin levels with the cavity in vacuum
        assert_eq!(zeros, 2);
        assert!(matches!(full_steady_state(&spec), Err(Error::DegenerateSteadyState(_))));
    }

    #[test]
    fn empty_cavity_without_coupling() {
        let m = spin_model(&BathSpec::generalized(0.2, 0.0).unwrap(), 1.0).unwrap();
        let spec = FullSystemSpec::new(2, 3, 0.0, cav(1.0, 0.5), m).unwrap();
        let o = full_steady_observables(&spec).unwrap();
        assert!(o.photon_number.abs() < 1e-14);
        assert!((o.sz_mean + 0.5).abs() < 1e-12);
        assert!(o.sx_mean.abs() < 1e-14);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let m = spin_model(&BathSpec::thermal(0.2, 0.5).unwrap(), 1.0).unwrap();
        let spec = FullSystemSpec::new(2, 9, 0.45, cav(1.0, 0.5), m).unwrap();
        assert!(spec.hilbert_dim() > DENSE_STEADY_DIM);
        let sparse = full_steady_observables(&spec).unwrap();
        let gen = build_full_generator(&spec).unwrap();
        let dense = gen.to_super_operator().unwrap();
        let rho = full_steady_state(&spec).unwrap();
        let r = dense.apply(&OperatorMatrix::from_mat(rho).unwrap());
        assert!(r.max_abs() < 1e-10);
        assert!(sparse.photon_number > 0.0);
    }

    #[test]
    fn correlator_matches_single_spin() {
        let m = spin_model(&BathSpec::thermal(0.2, 0.6).unwrap(), 1.0).unwrap();
        let spec = FullSystemSpec::new(1, 3, 0.0, cav(1.0, 0.5), m.clone()).unwrap();
        let grid = SampleGrid { tmax: 10.0, dt: 0.01 };
        let full = full_regression_sx(&spec, grid).unwrap();
        let rho = steady_state(&m).unwrap();
        let single = two_time_sx(&m, rho.rho(), grid.tmax, grid.dt).unwrap();
        let err = full.values().iter().zip(single.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(full_regression_sx(&spec.with_g(0.1).unwrap(), grid).is_err());
    }
}
