//! Distinct real modes: `∫₀ᵗ |c_i e^{λ_i τ} + c_j e^{λ_j τ}| dτ` and the lone-mode case.

use serde::Serialize;

use super::horizon;
use crate::error::{Error, Result};

fn check_stable(lambda: f64) -> Result<()> {
    if lambda < 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("real mode must satisfy λ < 0, got {lambda}")))
    }
}

/// `∫₀ᵗ |c e^{λτ}| dτ = |c/λ| (1 − e^{λt})`.
pub fn bound_singleton(c: f64, lambda: f64, t: Option<f64>) -> Result<f64> {
    check_stable(lambda)?;
    Ok(match horizon(t)? {
        None => (c / lambda).abs(),
        Some(t) => (c / lambda).abs() * -(lambda * t).exp_m1(),
    })
}

/// Zero of `c_i e^{λ_i τ} + c_j e^{λ_j τ}` on `τ > 0`, if any.
pub fn switch_time_real_pair(c_i: f64, c_j: f64, lambda_i: f64, lambda_j: f64) -> Option<f64> {
    if c_j == 0.0 || lambda_i == lambda_j {
        return None;
    }
    let ratio = -c_i / c_j;
    if !(ratio > 0.0) {
        return None;
    }
    let ts = ratio.ln() / (lambda_j - lambda_i);
    (ts > 0.0 && ts.is_finite()).then_some(ts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealPairWork {
    pub c_i: f64,
    pub c_j: f64,
    pub lambda_i: f64,
    pub lambda_j: f64,
    pub t_s: Option<f64>,
    /// `−2 c_j / c_i`, used only by [`bound_distinct_real_pair_cbar`].
    pub c_bar: f64,
}

impl RealPairWork {
    pub fn new(c_i: f64, c_j: f64, lambda_i: f64, lambda_j: f64) -> Self {
        Self {
            c_i,
            c_j,
            lambda_i,
            lambda_j,
            t_s: switch_time_real_pair(c_i, c_j, lambda_i, lambda_j),
            c_bar: -2.0 * c_j / c_i,
        }
    }

    fn validate(&self) -> Result<()> {
        check_stable(self.lambda_i)?;
        check_stable(self.lambda_j)?;
        if self.lambda_i == self.lambda_j {
            return Err(Error::InvalidParameter("distinct real pair requires λ_i ≠ λ_j".into()));
        }
        Ok(())
    }

    /// `Φ(a) − Φ(0)` for the antiderivative `Φ(τ) = Σ (c/λ) e^{λτ}`; `None` is `a = ∞`.
    fn delta(&self, a: Option<f64>) -> f64 {
        let term = |c: f64, l: f64| match a {
            None => -c / l,
            Some(a) => c / l * (l * a).exp_m1(),
        };
        term(self.c_i, self.lambda_i) + term(self.c_j, self.lambda_j)
    }
}

/// Selects how a distinct-real pair with an interior sign switch is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RealPairFormula {
    /// `|2Φ(t_s) − Φ(0) − Φ(t)|`.
    #[default]
    SplitAntiderivative,
    /// The compact `c̄`-power expression. Only kept for comparison: it does
    /// not match direct integration when a switch is present.
    CBar,
}

/// Exact `∫₀ᵗ |c_i e^{λ_i τ} + c_j e^{λ_j τ}| dτ`.
pub fn bound_distinct_real_pair(w: &RealPairWork, t: Option<f64>) -> Result<f64> {
    w.validate()?;
    let t = horizon(t)?;
    let total = w.delta(t);
    match w.t_s {
        Some(ts) if t.is_none_or(|t| ts < t) => Ok((2.0 * w.delta(Some(ts)) - total).abs()),
        _ => Ok(total.abs()),
    }
}

pub fn bound_distinct_real_pair_with(w: &RealPairWork, t: Option<f64>, formula: RealPairFormula) -> Result<f64> {
    match formula {
        RealPairFormula::SplitAntiderivative => bound_distinct_real_pair(w, t),
        RealPairFormula::CBar => bound_distinct_real_pair_cbar(w, t),
    }
}

/// `|c_i/λ_i (c̄^{λ_i/(λ_i−λ_j)} − e^{λ_i t} − 1) + c_j/λ_j (c̄^{λ_j/(λ_i−λ_j)} − e^{λ_j t} − 1)|`
/// on the switching branch, the plain integral otherwise.
pub fn bound_distinct_real_pair_cbar(w: &RealPairWork, t: Option<f64>) -> Result<f64> {
    w.validate()?;
    let t = horizon(t)?;
    match w.t_s {
        Some(ts) if t.is_none_or(|t| ts < t) => {
            let gap = w.lambda_i - w.lambda_j;
            let decay = |l: f64| t.map_or(0.0, |t| (l * t).exp());
            let part = |c: f64, l: f64| c / l * (w.c_bar.powf(l / gap) - decay(l) - 1.0);
            Ok((part(w.c_i, w.lambda_i) + part(w.c_j, w.lambda_j)).abs())
        }
        _ => Ok(w.delta(t).abs()),
    }
}
