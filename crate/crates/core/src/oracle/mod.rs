//! Numerical ground truth for the closed-form bounds.

mod channel;
mod expm;
mod quadrature;
mod simulate;
mod verify;

pub use channel::{quadrature_bound, quadrature_bound_with, ChannelScan, QuadratureResult, SAMPLES_PER_PERIOD};
pub use expm::matrix_exponential;
pub use quadrature::{integrate, QuadratureEstimate};
pub use simulate::{simulate, simulate_final, SimulationTrace};
pub use verify::{verify, VerificationEntry, VerificationReport, VerifyOptions};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lti::ClosedLoopSystem;

/// Default bisection width for channel sign changes.
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;

/// Bang-bang signal `z_j(s) = ±amplitude`, flipping at each switch time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisturbanceProfile {
    pub channel: usize,
    pub amplitude: f64,
    pub switch_times: Vec<f64>,
    pub initial_sign: f64,
    pub horizon: f64,
}

impl DisturbanceProfile {
    pub fn new(
        channel: usize,
        amplitude: f64,
        switch_times: Vec<f64>,
        initial_sign: f64,
        horizon: f64,
    ) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be nonnegative, got {amplitude}")));
        }
        if initial_sign != 1.0 && initial_sign != -1.0 {
            return Err(Error::InvalidParameter(format!("initial sign must be ±1, got {initial_sign}")));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be finite and nonnegative, got {horizon}")));
        }
        if switch_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("switch times must be strictly ascending".into()));
        }
        if switch_times.iter().any(|s| !(*s >= 0.0 && *s <= horizon)) {
            return Err(Error::InvalidParameter("switch times must lie in [0, horizon]".into()));
        }
        Ok(Self { channel, amplitude, switch_times, initial_sign, horizon })
    }

    /// `z(s) = +amplitude` on the whole horizon.
    pub fn constant(channel: usize, amplitude: f64, horizon: f64) -> Self {
        Self { channel, amplitude, switch_times: Vec::new(), initial_sign: 1.0, horizon }
    }

    /// Right-continuous value at time `s`.
    pub fn value(&self, s: f64) -> f64 {
        let flips = self.switch_times.partition_point(|&w| w <= s);
        let sign = if flips % 2 == 0 { self.initial_sign } else { -self.initial_sign };
        sign * self.amplitude
    }
}

/// The profile maximising `x_k(horizon)` through channel `j`:
/// `z_j(s) = z_max sgn(y(horizon − s))`. Switches sit at `horizon − τ_m` for
/// each sign change `τ_m` of the channel.
pub fn worst_case_disturbance(
    sys: &ClosedLoopSystem,
    k: usize,
    j: usize,
    z_max: f64,
    horizon: f64,
    refine_tol: f64,
) -> Result<DisturbanceProfile> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive and finite, got {horizon}")));
    }
    let scan = ChannelScan::new(sys, k, j, horizon, refine_tol)?;
    let zeros = scan.zeros();
    let first = if scan.initial_sign() == 0.0 { 1.0 } else { scan.initial_sign() };
    let initial_sign = if zeros.len() % 2 == 0 { first } else { -first };
    let mut switch_times: Vec<f64> = zeros.iter().rev().map(|z| horizon - z).collect();
    switch_times.dedup();
    DisturbanceProfile::new(j, z_max, switch_times, initial_sign, horizon)
}

/// Signed response `z_max ∫₀ᵗ [e^{Aτ} e_j]_k dτ` to a constant disturbance.
pub fn fixed_response_bound(sys: &ClosedLoopSystem, k: usize, j: usize, z_max: f64, t: Option<f64>) -> Result<f64> {
    sys.check_channel(k, j)?;
    let n = sys.n_x();
    let e = sys.e_column(j)?;
    match t {
        Some(t) if t.is_finite() => {
            if t < 0.0 {
                return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {t}")));
            }
            if t == 0.0 {
                return Ok(0.0);
            }
            // e^{M t} with M = [[A, e], [0, 0]] carries ∫₀ᵗ e^{Aτ} e dτ in its last column
            let mut m = DMatrix::zeros(n + 1, n + 1);
            m.view_mut((0, 0), (n, n)).copy_from(sys.a_cl());
            m.view_mut((0, n), (n, 1)).copy_from(&e);
            Ok(z_max * matrix_exponential(&m, t)[(k, n)])
        }
        Some(t) if t < 0.0 => Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {t}"))),
        _ => {
            crate::lti::ensure_hurwitz(sys)?;
            let x = sys.a_cl().clone().lu().solve(&(-e)).ok_or(Error::EigenFailure)?;
            Ok(z_max * x[k])
        }
    }
}
