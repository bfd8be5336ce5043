//! Complex conjugate pole pair: `∫₀ᵗ |c e^{λτ} + c* e^{λ*τ}| dτ` with `λ = σ + jω`.
//!
//! The integrand equals `2|c| e^{στ} |cos(ωτ + φ)|` with `φ = arctan(Im c / Re c)`.
//! Splitting at the zeros `n_k` of the cosine factor, the antiderivative
//! `F(τ) = e^{στ}(σ cos(ωτ+φ) + ω sin(ωτ+φ)) / |λ|²` takes the values
//! `±(ω/|λ|²) e^{σ n_k}` there, so the interior contributions collapse into a
//! geometric series in `q = e^{σπ/ω}` and only the two boundary values of `F`
//! remain.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Complex;
use serde::Serialize;

use super::horizon;
use crate::error::{Error, Result};

/// `sgn(a) = +1` for `a ≥ 0`.
fn sgn(a: f64) -> f64 {
    if a >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Phase `φ ∈ [−π/2, π/2]` of `c` and the sign of the pair's sum just right of `τ = 0`.
pub fn complex_phase(c: Complex<f64>) -> Result<(f64, f64)> {
    if c.re == 0.0 && c.im == 0.0 {
        return Err(Error::InvalidParameter("complex pair coefficient must be nonzero".into()));
    }
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite coefficient {c}")));
    }
    let phi = if c.re == 0.0 { FRAC_PI_2.copysign(c.im) } else { (c.im / c.re).atan() };
    let s = sgn(c.re);
    let cos0 = phi.cos() * s;
    // cos(π/2) is not exactly zero in floating point
    let boundary_sign = if phi.abs() != FRAC_PI_2 && cos0 != 0.0 { sgn(cos0) } else { sgn(-phi.sin() * s) };
    Ok((phi, boundary_sign))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexPairWork {
    #[serde(serialize_with = "crate::export::ser_complex")]
    pub c: Complex<f64>,
    pub sigma: f64,
    pub omega: f64,
    pub phi: f64,
    /// Sign of `c e^{λτ} + c* e^{λ*τ}` just right of `τ = 0`.
    pub boundary_sign: f64,
}

impl ComplexPairWork {
    pub fn new(c: Complex<f64>, sigma: f64, omega: f64) -> Result<Self> {
        if !(sigma < 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("complex pair requires σ < 0, got {sigma}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("complex pair requires ω > 0, got {omega}")));
        }
        let (phi, boundary_sign) = complex_phase(c)?;
        Ok(Self { c, sigma, omega, phi, boundary_sign })
    }

    pub fn modulus_sq(&self) -> f64 {
        self.sigma * self.sigma + self.omega * self.omega
    }

    /// `(π/2 − φ) mod π`, the phase offset of the first zero.
    fn first_zero_phase(&self) -> f64 {
        (FRAC_PI_2 - self.phi).rem_euclid(PI)
    }

    /// `c e^{λτ} + c* e^{λ*τ}` evaluated through its real cosine/sine form.
    pub fn eval(&self, tau: f64) -> f64 {
        let (s, c) = (self.omega * tau).sin_cos();
        2.0 * (self.sigma * tau).exp() * (self.c.re * c - self.c.im * s)
    }

    /// Sign of `cos(ωτ + φ)` just before its first zero at `τ ≥ 0`. This is
    /// `+1` unless the first zero sits at the origin with `φ = −π/2`, where the
    /// cosine factor rises through zero.
    fn lead_sign(&self) -> f64 {
        if self.first_zero_phase() == 0.0 && self.phi < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// `N(t) = ⌊(ωt − (π/2 − φ) mod π)/π⌋`; the number of zeros in `[0, t]` is `N(t) + 1`.
/// Negative (−1) before the first zero.
pub fn zero_count(w: &ComplexPairWork, t: f64) -> i64 {
    ((w.omega * t - w.first_zero_phase()) / PI).floor() as i64
}

/// Zeros `n_k = ((π/2 − φ) mod π + kπ)/ω` lying in `[0, t]`, ascending.
pub fn zero_locations(w: &ComplexPairWork, t: f64) -> Vec<f64> {
    let n = zero_count(w, t);
    let base = w.first_zero_phase();
    (0..=n).map(|k| (base + k as f64 * PI) / w.omega).collect()
}

/// `F(t) = e^{σt}(σ cos(ωt+φ) + ω sin(ωt+φ)) / |λ|²`; zero at `t = ∞`.
pub fn antiderivative_f(w: &ComplexPairWork, t: f64) -> f64 {
    if t == f64::INFINITY {
        return 0.0;
    }
    let (s, c) = (w.omega * t + w.phi).sin_cos();
    (w.sigma * t).exp() * (w.sigma * c + w.omega * s) / w.modulus_sq()
}

/// Exact `∫₀ᵗ |c e^{λτ} + c* e^{λ*τ}| dτ`:
///
/// `2|c| [ (2ω/|λ|²) e^{σ n_0} (1 − q^{N+1})/(1 − q) + s((−1)^{N+1} F(t) − F(0)) ]`
///
/// where `s` is the sign of the cosine factor before its first zero. For
/// `t = ∞` the `F(t)` term vanishes and `q^{N+1} → 0`.
pub fn bound_complex_pair(w: &ComplexPairWork, t: Option<f64>) -> Result<f64> {
    let t = horizon(t)?;
    if t == Some(0.0) {
        return Ok(0.0);
    }
    let ratio = w.sigma / w.omega;
    let one_minus_q = -(ratio * PI).exp_m1();
    let n0 = w.first_zero_phase() / w.omega;
    let lead = w.lead_sign();
    let f0 = antiderivative_f(w, 0.0);
    let scale = 2.0 * w.c.norm();
    let interior = 2.0 * w.omega / w.modulus_sq() * (w.sigma * n0).exp();
    let inner = match t {
        None => interior / one_minus_q - lead * f0,
        Some(t) => {
            let n = zero_count(w, t);
            let partial = if n >= 0 { -(ratio * PI * (n + 1) as f64).exp_m1() / one_minus_q } else { 0.0 };
            let parity = if (n + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            interior * partial + lead * (parity * antiderivative_f(w, t) - f0)
        }
    };
    Ok(scale * inner.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn work(c: Complex<f64>, sigma: f64, omega: f64) -> ComplexPairWork {
        ComplexPairWork::new(c, sigma, omega).unwrap()
    }

    #[test]
    fn phases() {
        let (phi, b) = complex_phase(Complex::new(1.0, 1.0)).unwrap();
        assert!((phi - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(b, 1.0);
        let (phi, b) = complex_phase(Complex::new(0.0, -10.2597)).unwrap();
        assert_eq!(phi, -FRAC_PI_2);
        assert_eq!(b, 1.0);
        assert_eq!(complex_phase(Complex::new(5.0, 0.0)).unwrap(), (0.0, 1.0));
        assert_eq!(complex_phase(Complex::new(-1.0, 1.0)).unwrap().1, -1.0);
        assert_eq!(complex_phase(Complex::new(0.0, 2.0)).unwrap(), (FRAC_PI_2, -1.0));
        assert!(complex_phase(Complex::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn cosine_form_identity() {
        for c in [Complex::new(1.3, -0.4), Complex::new(-2.0, 0.7), Complex::new(0.0, 1.0), Complex::new(-0.5, 0.0)] {
            let w = work(c, -0.8, 2.3);
            for tau in [0.0, 0.1, 0.77, 2.5, 6.0] {
                let cos_form = 2.0 * sgn(c.re) * c.norm() * (w.sigma * tau).exp() * (w.omega * tau + w.phi).cos();
                let direct = 2.0 * (c * Complex::new(w.sigma, w.omega).scale(tau).exp()).re;
                assert!((w.eval(tau) - direct).abs() < 1e-12, "{c} {tau}");
                assert!((cos_form - direct).abs() < 1e-12, "{c} {tau}");
            }
            let q = (w.sigma * PI / w.omega).exp();
            assert!(q > 0.0 && q < 1.0);
        }
    }

    #[test]
    fn zero_lattice() {
        let w = work(Complex::new(1.0, 0.0), -0.1, PI);
        let z = zero_locations(&w, 3.2);
        assert_eq!(z.len(), 3);
        for (got, want) in z.iter().zip([0.5, 1.5, 2.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(zero_count(&w, 3.2), 2);
        assert_eq!(zero_count(&w, 0.4), -1);
        assert!(zero_locations(&w, 0.4).is_empty());

        let w = work(Complex::new(0.0, 1.0), -0.1, 1.0);
        assert_eq!(w.phi, FRAC_PI_2);
        let z = zero_locations(&w, 7.0);
        assert_eq!(z.len(), 3);
        assert_eq!(z[0], 0.0);
        assert!((z[1] - PI).abs() < 1e-15 && (z[2] - 2.0 * PI).abs() < 1e-15);
        assert_eq!(zero_count(&w, 0.0), 0);
    }

    #[test]
    fn antiderivative_values() {
        let w = work(Complex::new(1.0, 0.0), -1.0, 1.0);
        assert!((antiderivative_f(&w, 0.0) + 0.5).abs() < 1e-15);
        let w = work(Complex::new(0.0, -1.0), -2.5, 23.75f64.sqrt());
        assert!((antiderivative_f(&w, 0.0) + 23.75f64.sqrt() / 30.0).abs() < 1e-15);
        assert!((antiderivative_f(&w, 0.0) + 0.16245).abs() < 1e-5);
        assert_eq!(antiderivative_f(&w, f64::INFINITY), 0.0);
        assert!(antiderivative_f(&w, 50.0).abs() < 1e-50);
    }

    #[test]
    fn tfc_channel_closed_form() {
        let omega = 23.75f64.sqrt();
        let w = work(Complex::new(0.0, -100.0 / (2.0 * omega)), -2.5, omega);
        let q = (-2.5 * PI / omega).exp();
        assert!((q - 0.19957).abs() < 1e-5);
        let expected = 100.0 / 30.0 * (1.0 + q) / (1.0 - q);
        let got = bound_complex_pair(&w, None).unwrap();
        assert!((got - expected).abs() < 1e-13 * expected);
        assert!((got - 4.9955).abs() < 1e-4);
    }

    #[test]
    fn zero_horizon_and_errors() {
        let w = work(Complex::new(0.3, 0.2), -1.0, 2.0);
        assert_eq!(bound_complex_pair(&w, Some(0.0)).unwrap(), 0.0);
        assert!(ComplexPairWork::new(Complex::new(1.0, 0.0), 0.0, 1.0).is_err());
        assert!(ComplexPairWork::new(Complex::new(1.0, 0.0), -1.0, 0.0).is_err());
        assert!(ComplexPairWork::new(Complex::new(1.0, 0.0), -1.0, -2.0).is_err());
    }

    #[test]
    fn continuous_in_horizon_across_zeros() {
        let w = work(Complex::new(0.8, -1.1), -0.3, 2.0);
        for n in zero_locations(&w, 10.0) {
            let below = bound_complex_pair(&w, Some(n - 1e-9)).unwrap();
            let above = bound_complex_pair(&w, Some(n + 1e-9)).unwrap();
            assert!((above - below).abs() < 1e-8);
        }
    }
}
