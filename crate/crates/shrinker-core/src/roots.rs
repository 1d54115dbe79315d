//! Bracketed scalar root finding: Brent's method and a safeguarded Newton.

use crate::error::{Error, Result};

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub f: f64,
    pub iterations: u32,
}

/// Brent's method on `[a, b]` with `f(a) f(b) <= 0`.
///
/// Iterates until the bracket width shrinks below `xtol + 4 eps |x|` and the
/// residual is below `ftol`, or `max_iter` is reached. Returns the best point
/// found either way, with its residual; callers gate on `f`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    ftol: f64,
    max_iter: u32,
) -> Result<Root> {
    let mut a = a;
    let mut b = b;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Root { x: a, f: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, f: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "brent: no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if (xm.abs() <= tol1 && fb.abs() <= ftol) || fb == 0.0 {
            return Ok(Root { x: b, f: fb, iterations });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, falling back to secant.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Ok(Root { x: b, f: fb, iterations })
}

/// Newton iteration constrained to `[lo, hi]`, bisecting whenever the Newton
/// step leaves the bracket or fails to shrink it. `f` returns `(value,
/// derivative)`. The bracket must satisfy `f(lo) f(hi) <= 0`; the function
/// must be monotone enough that sign information stays usable.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    lo: f64,
    hi: f64,
    x0: f64,
    ftol: f64,
    max_iter: u32,
) -> Result<Root> {
    let (mut flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        return Err(Error::Domain(format!(
            "newton_bracketed: no sign change on [{lo}, {hi}]"
        )));
    }
    // Orient so that f(lo) <= 0.
    let (mut lo, mut hi) = if flo <= 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = x0.clamp(lo.min(hi), lo.max(hi));
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let (fx, dfx) = f(x);
        if fx.abs() <= ftol {
            return Ok(Root { x, f: fx, iterations });
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step_ok = dfx != 0.0 && {
            let xn = x - fx / dfx;
            let (a, b) = (lo.min(hi), lo.max(hi));
            xn > a && xn < b
        };
        x = if step_ok {
            x - fx / dfx
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() < 4.0 * f64::EPSILON * x.abs().max(1.0) {
            let (fx, _) = f(x);
            flo = fx;
            return Ok(Root { x, f: flo, iterations });
        }
    }
    let (fx, _) = f(x);
    Ok(Root { x, f: fx, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-14, 1e-13, 100).unwrap();
        assert!((r.x - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 1e-12, 50).is_err());
    }

    #[test]
    fn newton_contracts_to_sqrt2() {
        let r = newton_bracketed(
            |x| (x * x - 2.0, 2.0 * x),
            1.0,
            2.0,
            1.5,
            1e-14,
            60,
        )
        .unwrap();
        assert!((r.x - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn newton_survives_bad_seed_via_bisection() {
        // Derivative vanishes at the seed; bisection must take over.
        let r = newton_bracketed(
            |x| (x * x * x - x - 2.0, 3.0 * x * x - 1.0),
            1.0,
            2.0,
            (1f64 / 3.0).sqrt(),
            1e-13,
            80,
        )
        .unwrap();
        assert!((r.x - 1.5213797068045676).abs() < 1e-11);
    }
}
