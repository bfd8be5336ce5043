//! Double real pole: `∫₀ᵗ |(c_i τ + c_{i+1}) e^{λτ}| dτ`.

use serde::Serialize;

use super::horizon;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleRealWork {
    pub c_i: f64,
    pub c_ip1: f64,
    pub lambda: f64,
    /// `ν = c_i − c_{i+1} λ`.
    pub nu: f64,
    /// Root `−c_{i+1}/c_i` of the polynomial factor, when strictly positive.
    pub t_s: Option<f64>,
}

impl DoubleRealWork {
    pub fn new(c_i: f64, c_ip1: f64, lambda: f64) -> Self {
        let t_s = if c_i != 0.0 { Some(-c_ip1 / c_i).filter(|t| *t > 0.0 && t.is_finite()) } else { None };
        Self { c_i, c_ip1, lambda, nu: c_i - c_ip1 * lambda, t_s }
    }

    /// `λ²(Ψ(a) − Ψ(0))` with `Ψ(τ) = e^{λτ}(c_i λ τ − ν)/λ²`.
    fn scaled_delta(&self, a: Option<f64>) -> f64 {
        match a {
            None => self.nu,
            Some(a) => {
                let e = (self.lambda * a).exp();
                // e(c_i λ a − ν) + ν, rearranged to keep precision for small a
                self.c_i * self.lambda * a * e - self.nu * (self.lambda * a).exp_m1()
            }
        }
    }
}

/// Exact `∫₀ᵗ |(c_i τ + c_{i+1}) e^{λτ}| dτ`.
///
/// With an interior switch this is
/// `(1/λ²)|e^{λt}(ν − c_i λ t) − 2c_i e^{−(c_{i+1}/c_i)λ} + ν|`, otherwise
/// `(1/λ²)|e^{λt}(c_i λ t − ν) + ν|` (with `e^{λt} → 0` as `t → ∞`).
pub fn bound_double_real_pair(w: &DoubleRealWork, t: Option<f64>) -> Result<f64> {
    if !(w.lambda < 0.0 && w.lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("double pole must satisfy λ < 0, got {}", w.lambda)));
    }
    let t = horizon(t)?;
    let l2 = w.lambda * w.lambda;
    match w.t_s {
        Some(ts) if t.is_none_or(|t| ts < t) => {
            // λ²(2Ψ(t_s) − Ψ(0) − Ψ(t)); at the root t_s = −c_{i+1}/c_i the first
            // term reduces to −2c_i e^{λ t_s}
            let tail = t.map_or(0.0, |t| (w.lambda * t).exp() * (w.nu - w.c_i * w.lambda * t));
            let at_switch = 2.0 * (w.lambda * ts).exp() * (w.c_i * w.lambda * ts - w.nu);
            Ok((tail + at_switch + w.nu).abs() / l2)
        }
        _ => Ok(w.scaled_delta(t).abs() / l2),
    }
}

/// `∫₀ᵗ |c| τ e^{λτ} dτ`, the split bound for a lone polynomial term.
pub fn bound_poly_term(c: f64, lambda: f64, t: Option<f64>) -> Result<f64> {
    bound_double_real_pair(&DoubleRealWork::new(c.abs(), 0.0, lambda), t)
}
