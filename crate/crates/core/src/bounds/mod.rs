//! Closed-form worst-case offsets.
//!
//! For one output `k` and disturbance channel `j` the worst-case offset is
//! `z_j ∫₀ᵗ |Σ_i g_i(τ)| dτ`. Grouping the modal terms into pairs and applying
//! `|a + b| ≤ |a| + |b|` between groups gives an upper bound whose every group
//! integral has a closed form; for two-state systems there is a single group
//! and the bound is exact.

mod complex;
mod double;
mod real;

pub use complex::{antiderivative_f, bound_complex_pair, complex_phase, zero_count, zero_locations, ComplexPairWork};
pub use double::{bound_double_real_pair, bound_poly_term, DoubleRealWork};
pub use real::{
    bound_distinct_real_pair, bound_distinct_real_pair_cbar, bound_distinct_real_pair_with, bound_singleton,
    switch_time_real_pair, RealPairFormula, RealPairWork,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lti::{
    eigendecompose_and_classify, modal_coefficients, pair_terms_at, ClosedLoopSystem, DisturbanceBounds, PairGroup,
    PairedExpansion, PairingStrategy, DEFAULT_EPS_MULTIPLICITY,
};

/// Validates a horizon; `None` and `+∞` both mean time-independent.
pub(crate) fn horizon(t: Option<f64>) -> Result<Option<f64>> {
    match t {
        None => Ok(None),
        Some(t) if t == f64::INFINITY => Ok(None),
        Some(t) if t >= 0.0 && t.is_finite() => Ok(Some(t)),
        Some(t) => Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {t}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    TimeDependent(f64),
    TimeIndependent,
}

impl From<Option<f64>> for Horizon {
    fn from(t: Option<f64>) -> Self {
        match t {
            Some(t) if t.is_finite() => Horizon::TimeDependent(t),
            _ => Horizon::TimeIndependent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupContribution {
    pub group: usize,
    pub kind: &'static str,
    /// The group integral `μ` (before scaling by `z_max`).
    pub mu: f64,
}

/// Bound for one `(k, j)` channel: `value = z_max_j · Σ μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub horizon: Horizon,
    pub per_group: Vec<GroupContribution>,
    pub output: usize,
    pub disturbance: usize,
    pub z_max: f64,
}

/// `x_{k,max} = Σ_j x_{k,j,max}` with the per-channel results retained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalBound {
    pub value: f64,
    pub horizon: Horizon,
    pub output: usize,
    pub channels: Vec<BoundResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundOptions {
    pub eps_multiplicity: f64,
    pub strategy: PairingStrategy,
    pub real_pair_formula: RealPairFormula,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            eps_multiplicity: DEFAULT_EPS_MULTIPLICITY,
            strategy: PairingStrategy::Default,
            real_pair_formula: RealPairFormula::SplitAntiderivative,
        }
    }
}

/// `μ` for a single group.
pub fn group_bound(group: &PairGroup, t: Option<f64>, formula: RealPairFormula) -> Result<f64> {
    match *group {
        PairGroup::RealPair { c_i, c_j, lambda_i, lambda_j, .. } => {
            bound_distinct_real_pair_with(&RealPairWork::new(c_i, c_j, lambda_i, lambda_j), t, formula)
        }
        PairGroup::DoubleRealPair { c_i, c_ip1, lambda, .. } => {
            bound_double_real_pair(&DoubleRealWork::new(c_i, c_ip1, lambda), t)
        }
        PairGroup::ComplexPair { c, sigma, omega, .. } => {
            if c.re == 0.0 && c.im == 0.0 {
                horizon(t)?;
                return Ok(0.0);
            }
            bound_complex_pair(&ComplexPairWork::new(c, sigma, omega)?, t)
        }
        PairGroup::Singleton { c, lambda, .. } => bound_singleton(c, lambda, t),
    }
}

pub fn assemble_channel_bound(p: &PairedExpansion, z_max_j: f64, t: Option<f64>) -> Result<BoundResult> {
    assemble_channel_bound_with(p, z_max_j, t, RealPairFormula::SplitAntiderivative)
}

pub fn assemble_channel_bound_with(
    p: &PairedExpansion,
    z_max_j: f64,
    t: Option<f64>,
    formula: RealPairFormula,
) -> Result<BoundResult> {
    if !(z_max_j >= 0.0 && z_max_j.is_finite()) {
        return Err(Error::InvalidParameter(format!("z_max must be nonnegative, got {z_max_j}")));
    }
    let t = horizon(t)?;
    let per_group = p
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| Ok(GroupContribution { group: i, kind: g.kind_name(), mu: group_bound(g, t, formula)? }))
        .collect::<Result<Vec<_>>>()?;
    let value = z_max_j * per_group.iter().map(|g| g.mu).sum::<f64>();
    Ok(BoundResult {
        value,
        horizon: t.into(),
        per_group,
        output: p.output,
        disturbance: p.disturbance,
        z_max: z_max_j,
    })
}

/// Fully split bound `z_j Σ_i ∫|g_i|`; conjugate halves stay together.
pub fn loose_bound(p: &PairedExpansion, z_max_j: f64, t: Option<f64>) -> Result<f64> {
    let t = horizon(t)?;
    let mut sum = 0.0;
    for g in &p.groups {
        sum += match *g {
            PairGroup::RealPair { c_i, c_j, lambda_i, lambda_j, .. } => {
                bound_singleton(c_i, lambda_i, t)? + bound_singleton(c_j, lambda_j, t)?
            }
            PairGroup::DoubleRealPair { c_i, c_ip1, lambda, .. } => {
                bound_poly_term(c_i, lambda, t)? + bound_singleton(c_ip1, lambda, t)?
            }
            _ => group_bound(g, t, RealPairFormula::SplitAntiderivative)?,
        };
    }
    Ok(z_max_j * sum)
}

/// Pairwise bound on state `k` summed over all disturbance channels.
pub fn total_bound(
    sys: &ClosedLoopSystem,
    k: usize,
    z: &DisturbanceBounds,
    t: Option<f64>,
    strategy: PairingStrategy,
) -> Result<TotalBound> {
    total_bound_with(sys, k, z, t, &BoundOptions { strategy, ..BoundOptions::default() })
}

pub fn total_bound_with(
    sys: &ClosedLoopSystem,
    k: usize,
    z: &DisturbanceBounds,
    t: Option<f64>,
    opts: &BoundOptions,
) -> Result<TotalBound> {
    let paired = paired_channels(sys, k, z, t, opts)?;
    let channels = paired
        .iter()
        .zip(z.as_slice())
        .map(|(p, &zj)| assemble_channel_bound_with(p, zj, t, opts.real_pair_formula))
        .collect::<Result<Vec<_>>>()?;
    Ok(TotalBound { value: channels.iter().map(|c| c.value).sum(), horizon: horizon(t)?.into(), output: k, channels })
}

/// Loose (fully split) bound on state `k` summed over all channels.
pub fn total_loose_bound(
    sys: &ClosedLoopSystem,
    k: usize,
    z: &DisturbanceBounds,
    t: Option<f64>,
    opts: &BoundOptions,
) -> Result<f64> {
    let paired = paired_channels(sys, k, z, t, opts)?;
    paired.iter().zip(z.as_slice()).map(|(p, &zj)| loose_bound(p, zj, t)).sum()
}

/// Classifies the spectrum once and pairs every channel `j` of output `k`.
pub fn paired_channels(
    sys: &ClosedLoopSystem,
    k: usize,
    z: &DisturbanceBounds,
    t: Option<f64>,
    opts: &BoundOptions,
) -> Result<Vec<PairedExpansion>> {
    if z.len() != sys.n_z() {
        return Err(Error::DimensionMismatch(format!("z_max has {} entries, E has {} columns", z.len(), sys.n_z())));
    }
    let t = horizon(t)?;
    let eig = eigendecompose_and_classify(sys, opts.eps_multiplicity)?;
    (0..sys.n_z()).map(|j| pair_terms_at(&modal_coefficients(sys, &eig, k, j)?, opts.strategy, t)).collect()
}
