//! Composite Newton–Cotes quadrature on uniform samples.

use crate::C64;

const BOOLE: [f64; 5] = [7.0, 32.0, 12.0, 32.0, 7.0];

/// Composite Boole rule over the first `4⌊(n−1)/4⌋` intervals of `f`.
/// Returns the integral and the number of intervals used.
pub(crate) fn boole(f: &[C64], h: f64) -> (C64, usize) {
    let panels = f.len().saturating_sub(1) / 4;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let base = 4 * p;
        for (k, w) in BOOLE.iter().enumerate() {
            acc += f[base + k] * *w;
        }
    }
    (acc * (2.0 * h / 45.0), 4 * panels)
}
