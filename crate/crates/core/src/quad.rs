//! Adaptive Gauss-Kronrod quadrature (7-15 pair) for smooth integrands.

use crate::error::{Error, Result};

// Kronrod abscissae and weights on [-1, 1]; Gauss weights for the
// embedded 7-point rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod panel over [a, b]; returns (kronrod, |kronrod - gauss|).
pub fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, (kronrod * h - gauss * h).abs())
}

/// Bisecting adaptive integration to absolute tolerance `tol`.
pub fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let (value, err) = gauss_kronrod(f, a, b);
        if err <= tol || b - a < 1e-14 * (a.abs() + b.abs() + 1.0) {
            return Ok(value);
        }
        if depth >= 48 {
            return Err(Error::Internal(format!(
                "quadrature failed to converge on [{a}, {b}] (err {err:.3e} > tol {tol:.3e})"
            )));
        }
        let mid = 0.5 * (a + b);
        Ok(recurse(f, a, mid, 0.5 * tol, depth + 1)?
            + recurse(f, mid, b, 0.5 * tol, depth + 1)?)
    }
    recurse(f, a, b, tol, 0)
}
