//! Bracketed scalar root finders shared by the solver modules.

use crate::error::{Error, Result};

/// Plain bisection until the bracket is narrower than `xtol` (or cannot shrink further).
pub fn bisect<F>(op: &'static str, mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoSignChange { op, lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton iteration kept inside a sign-change bracket, falling back to
/// bisection whenever the Newton step leaves the bracket or stalls.
///
/// `f` returns the function value and its derivative. Converged when
/// `|f| <= ftol` and the last step is below `xtol`, or when the bracket
/// has collapsed below `xtol`.
pub fn safeguarded_newton<F>(
    op: &'static str,
    mut f: F,
    lo: f64,
    hi: f64,
    x0: f64,
    ftol: f64,
    xtol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { op, lo, hi });
    }
    let lo_sign = flo.signum();
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut last_step = hi - lo;
    let mut best = (f64::INFINITY, x);
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        if fx.abs() <= ftol && last_step.abs() <= xtol {
            return Ok(x);
        }
        if hi - lo <= xtol {
            return if best.0 <= ftol {
                Ok(best.1)
            } else {
                Err(Error::ToleranceNotMet {
                    op,
                    estimate: best.0,
                    requested: ftol,
                })
            };
        }
        let newton = if dfx != 0.0 && dfx.is_finite() {
            x - fx / dfx
        } else {
            f64::NAN
        };
        let step_ok = newton > lo && newton < hi && (newton - x).abs() < 0.5 * last_step.abs().max(xtol);
        let next = if step_ok { newton } else { 0.5 * (lo + hi) };
        last_step = next - x;
        if next == x {
            return if fx.abs() <= ftol {
                Ok(x)
            } else {
                Err(Error::ToleranceNotMet {
                    op,
                    estimate: fx.abs(),
                    requested: ftol,
                })
            };
        }
        x = next;
    }
    if best.0 <= ftol {
        Ok(best.1)
    } else {
        Err(Error::ToleranceNotMet {
            op,
            estimate: best.0,
            requested: ftol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_pi() {
        let r = bisect("t", |x| Ok(x.sin()), 3.0, 4.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(
            bisect("t", |x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn newton_converges_on_cubic() {
        let r = safeguarded_newton(
            "t",
            |x| Ok((x * x * x - 2.0, 3.0 * x * x)),
            0.0,
            2.0,
            0.1,
            1e-14,
            1e-14,
        )
        .unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }
}
