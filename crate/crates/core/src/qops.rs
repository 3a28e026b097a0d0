//! Dense complex operator algebra for few-level systems.
//!
//! Spin operators follow the spin-1/2 convention `σ^α = (Pauli α)/2`, so that
//! `σ^z` has eigenvalues `±1/2` and `[σ^x, σ^y] = iσ^z`. Basis index 0 is spin
//! up (`σ^z = +1/2`), index 1 is spin down. The ladder operators are the full
//! matrices `σ^+ = |↑⟩⟨↓|` and `σ^- = |↓⟩⟨↑|`.
//!
//! Superoperators act on `vec(ρ)`, the columns of `ρ` stacked in order, so
//! that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use faer::Mat;

use crate::{Error, Result, C64};

/// Tolerance for structural checks (hermiticity, trace, unitarity).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for spectral checks (zero eigenvalues, null spaces).
pub const SPECTRAL_TOL: f64 = 1e-9;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Square complex matrix over a few-level Hilbert space.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    m: Mat<C64>,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        let mut list = f.debug_list();
        for i in 0..d {
            let row: Vec<C64> = (0..d).map(|j| self.m[(i, j)]).collect();
            list.entry(&row);
        }
        list.finish()
    }
}

impl OperatorMatrix {
    /// Builds an operator from a faer matrix, rejecting non-square or
    /// non-finite input.
    pub fn from_mat(m: Mat<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(Self { m })
    }

    pub(crate) fn from_mat_unchecked(m: Mat<C64>) -> Self {
        Self { m }
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            if r.len() != d {
                return Err(Error::NotSquare { rows: d, cols: r.len() });
            }
        }
        Self::from_mat(Mat::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_mat(Mat::from_fn(d, d, f))
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: Mat::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: Mat::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint().to_owned() }
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose().to_owned() }
    }

    pub fn conj(&self) -> Self {
        Self { m: self.m.conjugate().to_owned() }
    }

    pub fn scale(&self, z: C64) -> Self {
        let d = self.dim();
        Self { m: Mat::from_fn(d, d, |i, j| self.m[(i, j)] * z) }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.m[(i, i)]).sum()
    }

    /// `Tr[self · rho]`.
    pub fn expectation(&self, rho: &OperatorMatrix) -> C64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.m[(i, k)] * rho.m[(k, i)];
            }
        }
        acc
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                worst = worst.max((self.m[(i, j)] - other.m[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::zeros(self.dim()))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = &self.adjoint() * self;
        prod.max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        let h = Mat::from_fn(d, d, |i, j| (self.m[(i, j)] + self.m[(j, i)].conj()) * 0.5);
        let mut ev = h
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Hermitian with all eigenvalues `≥ −tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && self
                .hermitian_eigenvalues()
                .map(|ev| ev.iter().all(|&l| l >= -tol))
                .unwrap_or(false)
    }

    pub fn kron(&self, other: &OperatorMatrix) -> Self {
        let (a, b) = (self.dim(), other.dim());
        Self {
            m: Mat::from_fn(a * b, a * b, |i, j| {
                self.m[(i / b, j / b)] * other.m[(i % b, j % b)]
            }),
        }
    }

    /// Matrix product with a dimension check.
    pub fn checked_mul(&self, other: &OperatorMatrix) -> Result<Self> {
        check_dims(self, other)?;
        Ok(self * other)
    }
}

fn check_dims(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { m: &self.m * &rhs.m }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { m: &self.m - &rhs.m }
    }
}

/// Spin-1/2 operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            "plus" | "+" => Ok(Axis::Plus),
            "minus" | "-" => Ok(Axis::Minus),
            _ => Err(Error::UnknownAxis(s.to_string())),
        }
    }
}

/// Spin-1/2 operator for `which`.
pub fn pauli(which: Axis) -> OperatorMatrix {
    let z = C64::new(0.0, 0.0);
    let h = c(0.5);
    let m = match which {
        Axis::X => [[z, h], [h, z]],
        Axis::Y => [[z, -I * 0.5], [I * 0.5, z]],
        Axis::Z => [[h, z], [z, -h]],
        Axis::Plus => [[z, c(1.0)], [z, z]],
        Axis::Minus => [[z, z], [c(1.0), z]],
    };
    OperatorMatrix { m: Mat::from_fn(2, 2, |i, j| m[i][j]) }
}

/// `ab − ba`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    check_dims(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// Single-atom state: unit trace, hermitian, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: OperatorMatrix,
}

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let tr = op.trace();
        if (tr - c(1.0)).norm() > STRUCTURAL_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let herm = op.hermiticity_defect();
        if herm > STRUCTURAL_TOL {
            return Err(Error::InvalidDensityMatrix(format!("hermiticity defect {herm:e}")));
        }
        let min = op.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < -STRUCTURAL_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    /// Spin-1/2 state from the Bloch components `(⟨σ^x⟩, ⟨σ^y⟩, ⟨σ^z⟩)`,
    /// each in `[−1/2, 1/2]` with `x² + y² + z² ≤ 1/4`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let m = [[c(0.5 + z), C64::new(x, -y)], [C64::new(x, y), c(0.5 - z)]];
        Self::new(OperatorMatrix::from_fn(2, |i, j| m[i][j])?)
    }

    /// Diagonal spin-1/2 state with the given `⟨σ^z⟩`.
    pub fn diagonal(sz: f64) -> Result<Self> {
        Self::from_bloch(0.0, 0.0, sz)
    }

    /// Rebuilds a state from a numerically produced matrix: the hermitian part
    /// is taken and the trace renormalized before validation.
    pub fn from_numeric(op: &OperatorMatrix) -> Result<Self> {
        let tr = op.trace();
        if tr.norm() < f64::EPSILON {
            return Err(Error::InvalidDensityMatrix("zero trace".into()));
        }
        let herm = (op + &op.adjoint()).scale(c(0.5));
        let tr = herm.trace().re;
        Self::new(herm.scale(c(1.0 / tr)))
    }

    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `Tr[a ρ]`.
    pub fn expect(&self, a: &OperatorMatrix) -> C64 {
        a.expectation(&self.op)
    }

    /// `⟨σ^z⟩` for a single spin.
    pub fn sz(&self) -> f64 {
        self.expect(&pauli(Axis::Z)).re
    }
}

/// Stacks the columns of `a`.
pub fn vectorize(a: &OperatorMatrix) -> Vec<C64> {
    let d = a.dim();
    let mut v = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            v.push(a.m[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &[C64], d: usize) -> Result<OperatorMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch { left: v.len(), right: d * d });
    }
    OperatorMatrix::from_fn(d, |i, j| v[i + d * j])
}

/// Dense linear map on `vec(ρ)` for a `d`-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    d: usize,
    m: Mat<C64>,
}

impl SuperOperator {
    pub fn from_mat(d: usize, m: Mat<C64>) -> Result<Self> {
        if m.nrows() != d * d || m.ncols() != d * d {
            return Err(Error::DimensionMismatch { left: m.nrows(), right: d * d });
        }
        Ok(Self { d, m })
    }

    /// Hilbert-space dimension `d` (the matrix is `d² × d²`).
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.m
    }

    /// `vec⁻¹(L vec(x))`.
    pub fn apply(&self, x: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(x.dim(), self.d, "operator dimension");
        let v = vectorize(x);
        let n = self.d * self.d;
        let out: Vec<C64> = (0..n).map(|r| (0..n).map(|k| self.m[(r, k)] * v[k]).sum()).collect();
        devectorize(&out, self.d).expect("dimension checked above")
    }

    /// Norm of the row functional `Tr ∘ L`; zero for trace-preserving maps.
    pub fn trace_defect(&self) -> f64 {
        let n = self.d * self.d;
        let mut acc = 0.0;
        for col in 0..n {
            let s: C64 = (0..self.d).map(|i| self.m[(i + self.d * i, col)]).sum();
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        self.m.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let mut s = self.m.singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))?;
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// Dimension of the numerical null space (singular values below
    /// `SPECTRAL_TOL` relative to the largest, floored at 1).
    pub fn nullity(&self) -> Result<usize> {
        let s = self.singular_values()?;
        let scale = s.first().copied().unwrap_or(0.0).max(1.0);
        Ok(s.iter().filter(|&&x| x <= SPECTRAL_TOL * scale).count())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm_l2()
    }
}

/// Dissipation channel `(L, γ)` in the doubled convention
/// `γ(2LρL† − L†Lρ − ρL†L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    pub op: OperatorMatrix,
    pub rate: f64,
}

impl LindbladChannel {
    pub fn new(op: OperatorMatrix, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidRate(rate));
        }
        Ok(Self { op, rate })
    }
}

/// Generator of `dρ/dt = −i[h, ρ] + Σ γ (2LρL† − L†Lρ − ρL†L)`.
pub fn lindblad_generator(
    h: &OperatorMatrix,
    channels: &[LindbladChannel],
) -> Result<SuperOperator> {
    let herm = h.hermiticity_defect();
    if herm > STRUCTURAL_TOL {
        return Err(Error::NonHermitian(herm));
    }
    for ch in channels {
        if !ch.rate.is_finite() || ch.rate < 0.0 {
            return Err(Error::InvalidRate(ch.rate));
        }
        check_dims(h, &ch.op)?;
    }
    let d = h.dim();
    let id = OperatorMatrix::identity(d);
    // −i(I ⊗ H − Hᵀ ⊗ I)
    let mut m = &id.kron(h).m - &h.transpose().kron(&id).m;
    m = Mat::from_fn(d * d, d * d, |i, j| -I * m[(i, j)]);
    for ch in channels {
        if ch.rate == 0.0 {
            continue;
        }
        let l = &ch.op;
        let ldl = &l.adjoint() * l;
        let jump = l.conj().kron(l);
        let left = id.kron(&ldl);
        let right = ldl.transpose().kron(&id);
        let g = ch.rate;
        m = Mat::from_fn(d * d, d * d, |i, j| {
            m[(i, j)] + (jump.m[(i, j)] * 2.0 - left.m[(i, j)] - right.m[(i, j)]) * g
        });
    }
    Ok(SuperOperator { d, m })
}
