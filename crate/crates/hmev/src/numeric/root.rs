//! Bracketed scalar root finding.

/// Plain bisection on `[lo, hi]`; requires `f(lo)` and `f(hi)` to straddle
/// zero. Converges to absolute tolerance `tol` on the argument.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid <= lo || mid >= hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Newton iteration safeguarded by a maintained bracket.
///
/// `f` returns `(value, derivative)`. Steps that leave the bracket fall back
/// to bisection, so convergence is guaranteed whenever the initial bracket
/// straddles the root. Terminates when `|value| <= f_tol` or when the
/// bracket width drops below `rel_tol` relative to its endpoints.
pub fn brent_newton<F: Fn(f64) -> (f64, f64)>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    mut x: f64,
    rel_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Option<f64> {
    let flo = f(lo).0;
    let fhi = f(hi).0;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let increasing = fhi > 0.0;
    if !(lo..=hi).contains(&x) {
        x = 0.5 * (lo + hi);
    }
    let mut best = x;
    for _ in 0..max_iter {
        let (v, d) = f(x);
        best = x;
        if v == 0.0 || v.abs() <= f_tol {
            return Some(x);
        }
        // tighten the bracket with the new sign information
        if (v > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if (hi - lo).abs() <= rel_tol * scale {
            return Some(0.5 * (lo + hi));
        }
        let newton = x - v / d;
        x = if d.is_finite() && d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if x == lo || x == hi {
            // bracket exhausted at floating-point resolution
            return Some(best);
        }
    }
    Some(best)
}

/// Grow `hi` geometrically from `start` until `f(hi) >= 0`, for monotone
/// nondecreasing `f` crossing zero. Returns the bracket `(lo, hi)` or `None`
/// if the function never reaches zero before the growth cap.
pub fn grow_upper_bracket<F: Fn(f64) -> f64>(f: F, start: f64, max_doublings: usize) -> Option<(f64, f64)> {
    let mut lo = 0.0_f64;
    let mut hi = if start > 0.0 { start } else { 1.0 };
    for _ in 0..max_doublings {
        if f(hi) >= 0.0 {
            return Some((lo, hi));
        }
        lo = hi;
        hi *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_finds_cubic_root() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert_relative_eq!(r, 2.0_f64.cbrt(), epsilon = 1e-10);
    }

    #[test]
    fn newton_is_fast_and_safe() {
        let r = brent_newton(|x| (x.exp() - 5.0, x.exp()), 0.0, 10.0, 9.0, 1e-13, 0.0, 100).unwrap();
        assert_relative_eq!(r, 5.0_f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn no_bracket_returns_none() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9, 50).is_none());
    }

    #[test]
    fn bracket_growth() {
        let (lo, hi) = grow_upper_bracket(|y| y - 37.0, 1.0, 64).unwrap();
        assert!(lo < 37.0 && hi >= 37.0);
    }
}
