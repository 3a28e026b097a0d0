//! Matrix exponentials of small dense generators.
//!
//! The default route diagonalizes the generator once and reuses the
//! eigenbasis for every time. If the eigenvector matrix is ill-conditioned
//! (near an exceptional point) the propagator falls back to Padé(13)
//! scaling-and-squaring.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;

use crate::{Error, Result, C64};

/// Eigenvector condition number above which the spectral route is abandoned.
pub(crate) const MAX_EIGVEC_COND: f64 = 1e8;

pub(crate) struct Eigen {
    pub values: Vec<C64>,
    pub vectors: Mat<C64>,
    pub inverse: Mat<C64>,
    pub cond: f64,
}

fn norm_1(m: &Mat<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn eigen(a: &Mat<C64>) -> Result<Eigen> {
    let evd = a.eigen().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let n = a.nrows();
    let values: Vec<C64> = (0..n).map(|i| evd.S()[i]).collect();
    let vectors = evd.U().to_owned();
    let inverse = vectors.partial_piv_lu().inverse();
    let mut cond = norm_1(&vectors) * norm_1(&inverse);
    if !cond.is_finite() {
        cond = f64::INFINITY;
    }
    Ok(Eigen { values, vectors, inverse, cond })
}

/// `exp(a)` by Padé(13) scaling and squaring.
pub(crate) fn expm_pade(a: &Mat<C64>) -> Mat<C64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = norm_1(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let id = Mat::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c: &[f64; 4], m: [&Mat<C64>; 4]| {
        Mat::from_fn(n, n, |i, j| {
            m[0][(i, j)] * c[0] + m[1][(i, j)] * c[1] + m[2][(i, j)] * c[2] + m[3][(i, j)] * c[3]
        })
    };
    let zero = Mat::<C64>::zeros(n, n);
    let u_inner = lin(&[B[13], B[11], B[9], 0.0], [&a6, &a4, &a2, &zero]);
    let u_tail = lin(&[B[7], B[5], B[3], B[1]], [&a6, &a4, &a2, &id]);
    let u = &a * &(&(&a6 * &u_inner) + &u_tail);
    let v_inner = lin(&[B[12], B[10], B[8], 0.0], [&a6, &a4, &a2, &zero]);
    let v_tail = lin(&[B[6], B[4], B[2], B[0]], [&a6, &a4, &a2, &id]);
    let v = &(&a6 * &v_inner) + &v_tail;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Reusable `t ↦ exp(A t)`.
pub(crate) enum Propagator {
    Spectral(Eigen),
    Pade(Mat<C64>),
}

impl Propagator {
    pub fn new(a: &Mat<C64>) -> Result<Self> {
        let e = eigen(a)?;
        if e.cond <= MAX_EIGVEC_COND {
            Ok(Propagator::Spectral(e))
        } else {
            Ok(Propagator::Pade(a.clone()))
        }
    }

    pub fn at(&self, t: f64) -> Mat<C64> {
        match self {
            Propagator::Spectral(e) => {
                let n = e.values.len();
                let scaled = Mat::from_fn(n, n, |i, j| e.vectors[(i, j)] * (e.values[j] * t).exp());
                &scaled * &e.inverse
            }
            Propagator::Pade(a) => {
                let n = a.nrows();
                expm_pade(&Mat::from_fn(n, n, |i, j| a[(i, j)] * t))
            }
        }
    }
}

pub(crate) fn matvec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|k| m[(i, k)] * v[k]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
        let mut w = 0.0f64;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                w = w.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        w
    }

    /// Truncated Taylor series with many terms; only used on small-norm input.
    fn taylor(a: &Mat<C64>) -> Mat<C64> {
        let n = a.nrows();
        let mut term = Mat::<C64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a;
            term = Mat::from_fn(n, n, |i, j| term[(i, j)] / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn pade_matches_taylor() {
        let a = Mat::from_fn(4, 4, |i, j| C64::new(0.3 * (i as f64 - j as f64), 0.1 * (i * j) as f64));
        assert!(max_diff(&expm_pade(&a), &taylor(&a)) < 1e-13);
        // large norm exercises the squaring phase
        let big = Mat::from_fn(3, 3, |i, j| C64::new(if i == j { -4.0 } else { 1.5 }, (i + j) as f64));
        let half = Mat::from_fn(3, 3, |i, j| big[(i, j)] * 0.5);
        let e_half = expm_pade(&half);
        assert!(max_diff(&expm_pade(&big), &(&e_half * &e_half)) < 1e-10);
    }

    #[test]
    fn jordan_block_falls_back() {
        // [[λ, 1], [0, λ]] is defective: exp = e^λ [[1, t], [0, 1]]
        let l = C64::new(-0.5, 0.2);
        let a = Mat::from_fn(2, 2, |i, j| if i == j { l } else if j == i + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let p = Propagator::new(&a).unwrap();
        assert!(matches!(p, Propagator::Pade(_)));
        let t = 1.7;
        let e = p.at(t);
        let f = (l * t).exp();
        assert!((e[(0, 0)] - f).norm() < 1e-14);
        assert!((e[(0, 1)] - f * t).norm() < 1e-14);
        assert!(e[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn spectral_matches_pade() {
        let a = Mat::from_fn(4, 4, |i, j| C64::new(-(i as f64) + 0.2 * j as f64, 0.3 * (i as f64 - j as f64)));
        let p = Propagator::new(&a).unwrap();
        assert!(matches!(p, Propagator::Spectral(_)));
        let t = 2.5;
        let at = Mat::from_fn(4, 4, |i, j| a[(i, j)] * t);
        assert!(max_diff(&p.at(t), &expm_pade(&at)) < 1e-11);
    }
}
