//! Adaptive 7/15-point Gauss–Kronrod quadrature.

use serde::Serialize;

use crate::error::{Error, Result};

/// Positive Kronrod abscissae, descending; the last entry is the centre.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for `XGK[1], XGK[3], XGK[5]` and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

pub(crate) const GK_POINTS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
}

/// The 15 Kronrod nodes on `[a, b]`: left half, centre, right half.
pub(crate) fn gk15_nodes(a: f64, b: f64) -> [f64; GK_POINTS] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; GK_POINTS];
    for i in 0..7 {
        x[i] = c - h * XGK[i];
        x[GK_POINTS - 1 - i] = c + h * XGK[i];
    }
    x
}

/// Kronrod estimate and its error from integrand values at [`gk15_nodes`].
pub(crate) fn gk15_combine(f: &[f64; GK_POINTS], a: f64, b: f64) -> QuadratureEstimate {
    let h = 0.5 * (b - a);
    let fc = f[7];
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let pair = f[i] + f[GK_POINTS - 1 - i];
        kronrod += WGK[i] * pair;
        abs += WGK[i] * (f[i].abs() + f[GK_POINTS - 1 - i].abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        asc += WGK[i] * ((f[i] - mean).abs() + (f[GK_POINTS - 1 - i] - mean).abs());
    }
    let (value, abs, asc) = (kronrod * h, abs * h.abs(), asc * h.abs());
    let mut error = ((kronrod - gauss) * h).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs);
    }
    QuadratureEstimate { value, error }
}

pub(crate) fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> QuadratureEstimate {
    let x = gk15_nodes(a, b);
    let mut v = [0.0; GK_POINTS];
    for (vi, xi) in v.iter_mut().zip(x) {
        *vi = f(xi);
    }
    gk15_combine(&v, a, b)
}

/// Globally adaptive bisection until the summed error is at most
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadratureEstimate> {
    let first = gk15(&mut f, a, b);
    integrate_from(&mut f, first, a, b, abs_tol, rel_tol, max_intervals)
}

/// As [`integrate`], starting from an existing estimate on `[a, b]`.
pub(crate) fn integrate_from<F: FnMut(f64) -> f64>(
    f: &mut F,
    first: QuadratureEstimate,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadratureEstimate> {
    let mut parts = vec![(a, b, first)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2.value).sum();
        let error: f64 = parts.iter().map(|p| p.2.error).sum();
        let requested = abs_tol.max(rel_tol * value.abs());
        if error <= requested {
            return Ok(QuadratureEstimate { value, error });
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].2.error.total_cmp(&parts[j].2.error)).unwrap();
        let (lo, hi, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if parts.len() >= max_intervals || !(lo < mid && mid < hi) {
            return Err(Error::QuadratureNotConverged { a, b, error, requested });
        }
        parts[worst] = (lo, mid, gk15(f, lo, mid));
        parts.push((mid, hi, gk15(f, mid, hi)));
    }
}
