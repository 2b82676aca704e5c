//! Deterministic one-dimensional searches.

use crate::error::{Error, Result};

/// Locates where `pred` flips between `lo` and `hi` by bisection, stopping
/// once the bracket is narrower than `abs_tol + rel_tol * |hi|`.
pub fn bisect_transition<F>(mut pred: F, lo: f64, hi: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(lo < hi) {
        return Err(Error::Bracket(format!("empty bracket [{lo}, {hi}]")));
    }
    let at_lo = pred(lo)?;
    let at_hi = pred(hi)?;
    if at_lo == at_hi {
        return Err(Error::Bracket(format!(
            "no transition on [{lo}, {hi}]: condition is {at_lo} at both ends"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > abs_tol + rel_tol * b.abs() {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if pred(mid)? == at_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    // 200 steps shrink any bracket below double resolution
    for _ in 0..200 {
        if b - a <= x_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    let best = [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bisection_finds_sqrt_two() {
        let x = bisect_transition(|x| Ok(x * x > 2.0), 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert_abs_diff_eq!(x, 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn bisection_needs_a_flip() {
        let err = bisect_transition(|x| Ok(x > 5.0), 0.0, 2.0, 1e-9, 0.0).unwrap_err();
        assert!(matches!(err, Error::Bracket(_)));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_max(|x| Ok(-(x - 0.3) * (x - 0.3) + 1.0), -2.0, 5.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(fx, 1.0, epsilon = 1e-13);
    }
}
