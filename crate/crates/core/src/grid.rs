//! Amplitude grids clustered toward the end of the admissible range.

use crate::error::{Error, Result};
use crate::roots;

/// `n` points in `(0, end]` whose spacings shrink geometrically so that the
/// last spacing equals `last_interval`. When `n·last_interval` exceeds `end`
/// the spacings grow instead.
pub fn clustered(n: usize, end: f64, last_interval: f64) -> Result<Vec<f64>> {
    if n == 0 || !(end > 0.0) || !(last_interval > 0.0) {
        return Err(Error::InvalidParameter(
            "clustered grid needs n >= 1, end > 0, last_interval > 0".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![end]);
    }
    // Σ_{j<n} d·ρ^j = end, with d the last spacing and ρ the growth toward β = 0
    let sum = |rho: f64| -> f64 {
        if (rho - 1.0).abs() < 1e-12 {
            last_interval * n as f64
        } else {
            last_interval * (rho.powi(n as i32) - 1.0) / (rho - 1.0)
        }
    };
    let rho = if sum(1.0) >= end {
        roots::bisect("clustered grid", |r| Ok(sum(r) - end), 1e-9, 1.0, 1e-15)?
    } else {
        let mut hi = 2.0;
        while sum(hi) < end {
            hi *= 2.0;
        }
        roots::bisect("clustered grid", |r| Ok(sum(r) - end), 1.0, hi, 1e-15)?
    };
    let mut out = Vec::with_capacity(n);
    let mut x = end;
    let mut d = last_interval;
    for _ in 0..n {
        out.push(x);
        x -= d;
        d *= rho;
    }
    out.reverse();
    // the first point absorbs the rounding of the geometric sum
    if out[0] <= 0.0 {
        out[0] = 0.5 * out[1];
    }
    Ok(out)
}

/// The default primary-branch grid: `n` points ending at `β₀(1 − 1e−6)` with
/// last spacing `1e−6·β₀`.
pub fn default_branch_grid(beta0: f64, n: usize) -> Result<Vec<f64>> {
    clustered(n, beta0 * (1.0 - 1e-6), 1e-6 * beta0)
}
