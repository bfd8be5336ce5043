//! Cross-validation of the closed-form bounds against the oracle.

use std::f64::consts::PI;

use serde::Serialize;

use super::{quadrature_bound_with, simulate_final, worst_case_disturbance, DEFAULT_REFINE_TOL};
use crate::bounds::{assemble_channel_bound, loose_bound, paired_channels, BoundOptions};
use crate::error::{Error, Result};
use crate::lti::{
    ensure_hurwitz, ClosedLoopSystem, DisturbanceBounds, PairGroup, PairingStrategy, DEFAULT_EPS_MULTIPLICITY,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Relative tolerance for analytic versus quadrature.
    pub tol: f64,
    /// Relative tolerance requested from the quadrature.
    pub quad_tol: f64,
    pub refine_tol: f64,
    /// RK4 step; defaults to `min(1e-3, T_min/50)` with `T_min` the fastest modal period.
    pub sim_dt: Option<f64>,
    pub sim_rel_tol: f64,
    pub strategy: PairingStrategy,
    pub eps_multiplicity: f64,
    /// Scales the first modal coefficient of the first channel; for exercising the harness.
    pub perturb_coefficients: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            quad_tol: 1e-11,
            refine_tol: DEFAULT_REFINE_TOL,
            sim_dt: None,
            sim_rel_tol: 1e-6,
            strategy: PairingStrategy::Default,
            eps_multiplicity: DEFAULT_EPS_MULTIPLICITY,
            perturb_coefficients: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationEntry {
    /// `None` is the time-independent case.
    pub horizon: Option<f64>,
    pub analytic: f64,
    pub loose: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
    /// `x_k(t)` simulated under the synthesized worst-case profiles.
    pub simulated: Option<f64>,
    /// `analytic / quadrature`; `1` when both vanish.
    pub gap_ratio: f64,
    /// Every channel reduces to a single group, so the bound should be exact.
    pub exact_expected: bool,
    pub analytic_ok: bool,
    pub loose_ok: bool,
    pub simulation_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub output: usize,
    pub options: VerifyOptions,
    pub entries: Vec<VerificationEntry>,
    pub pass: bool,
}

fn perturb(group: &mut PairGroup, factor: f64) {
    match group {
        PairGroup::RealPair { c_i, .. } | PairGroup::DoubleRealPair { c_i, .. } => *c_i *= factor,
        PairGroup::ComplexPair { c, .. } => *c *= factor,
        PairGroup::Singleton { c, .. } => *c *= factor,
    }
}

/// Compares analytic, loose, quadrature and simulated values at every `t`
/// in `t_samples` and at `t = ∞`.
pub fn verify(
    sys: &ClosedLoopSystem,
    k: usize,
    z: &DisturbanceBounds,
    t_samples: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    ensure_hurwitz(sys)?;
    sys.check_channel(k, 0)?;
    if let Some(bad) = t_samples.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("time samples must be finite and nonnegative, got {bad}")));
    }
    let rho = sys.eigenvalues()?.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let dt = opts.sim_dt.unwrap_or_else(|| (2.0 * PI / (50.0 * rho)).min(1e-3));
    let bound_opts =
        BoundOptions { eps_multiplicity: opts.eps_multiplicity, strategy: opts.strategy, ..Default::default() };

    let horizons = t_samples.iter().map(|t| Some(*t)).chain(std::iter::once(None));
    let mut entries = Vec::new();
    for t in horizons {
        let mut paired = paired_channels(sys, k, z, t, &bound_opts)?;
        if let Some(f) = opts.perturb_coefficients {
            if let Some(g) = paired.first_mut().and_then(|p| p.groups.first_mut()) {
                perturb(g, f);
            }
        }
        let mut analytic = 0.0;
        let mut loose = 0.0;
        let mut quadrature = 0.0;
        let mut quadrature_error = 0.0;
        for (j, (p, &zj)) in paired.iter().zip(z.as_slice()).enumerate() {
            analytic += assemble_channel_bound(p, zj, t)?.value;
            loose += loose_bound(p, zj, t)?;
            let q = quadrature_bound_with(sys, k, j, zj, t, opts.quad_tol, opts.refine_tol)?;
            quadrature += q.value;
            quadrature_error += q.error;
        }
        let exact_expected = paired.iter().all(|p| p.groups.len() <= 1);

        let simulated = match t {
            Some(t) if t > 0.0 => {
                let profiles = (0..sys.n_z())
                    .map(|j| worst_case_disturbance(sys, k, j, z.as_slice()[j], t, opts.refine_tol))
                    .collect::<Result<Vec<_>>>()?;
                Some(simulate_final(sys, &profiles, t, dt)?[k])
            }
            Some(_) => Some(0.0),
            None => None,
        };

        let gap_ratio = if quadrature > 0.0 {
            analytic / quadrature
        } else if analytic == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        let analytic_ok = if exact_expected {
            (analytic - quadrature).abs() <= opts.tol * quadrature.max(analytic) + quadrature_error
        } else {
            analytic >= quadrature * (1.0 - opts.tol) - quadrature_error
        };
        let loose_ok = loose >= analytic * (1.0 - opts.tol);
        let simulation_ok = simulated.is_none_or(|s| {
            let rel = opts.sim_rel_tol.max(5.0 * (rho * dt).powi(4));
            (s - quadrature).abs() <= rel * quadrature + quadrature_error + 1e-12
        });
        entries.push(VerificationEntry {
            horizon: t,
            analytic,
            loose,
            quadrature,
            quadrature_error,
            simulated,
            gap_ratio,
            exact_expected,
            analytic_ok,
            loose_ok,
            simulation_ok,
            pass: analytic_ok && loose_ok && simulation_ok,
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(VerificationReport { output: k, options: *opts, entries, pass })
}
