//! Dormand–Prince 5(4) with adaptive steps.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

/// Integrates `y' = f(t, y)` from `t_out[0]` and records `y` at every `t_out`.
pub(crate) fn integrate<F>(f: F, y0: &[f64], t_out: &[f64], tol: &Tolerance) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut out = Vec::with_capacity(t_out.len());
    let Some(&t0) = t_out.first() else { return Ok(out) };
    let mut t = t0;
    let mut y = y0.to_vec();
    out.push(y.clone());
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut h = t_out.get(1).map(|t1| (t1 - t0) / 10.0).unwrap_or(0.0);
    f(t, &y, &mut k[0]);
    for &target in &t_out[1..] {
        while t < target {
            let last = h >= target - t;
            let hs = if last { target - t } else { h };
            if hs <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow(t));
            }
            for s in 1..7 {
                for i in 0..n {
                    tmp[i] = y[i] + hs * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                f(t + C[s] * hs, &tmp, &mut k[s]);
            }
            let mut err = 0.0f64;
            for i in 0..n {
                y5[i] = y[i] + hs * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>();
                let e = hs * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::NonFinite);
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut y5);
                // first-same-as-last: stage 7 is f at the new point
                let k6 = k[6].clone();
                k[0].copy_from_slice(&k6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(err <= 1.0 && last) {
                h = hs * factor;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow(t));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
