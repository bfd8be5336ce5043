//! Fixed-step RK4 integration of `ẋ = A x + E z(t)`, `x(0) = 0`.

use nalgebra::DVector;

use super::DisturbanceProfile;
use crate::error::{Error, Result};
use crate::lti::ClosedLoopSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub disturbance_values: Vec<DVector<f64>>,
    pub dt: f64,
}

impl SimulationTrace {
    pub fn state_series(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[k]).collect()
    }

    /// `(t, x_k(t))` at the largest `x_k`.
    pub fn peak(&self, k: usize) -> (f64, f64) {
        self.times.iter().zip(&self.states).map(|(t, x)| (*t, x[k])).fold((0.0, f64::NEG_INFINITY), |best, p| {
            if p.1 > best.1 {
                p
            } else {
                best
            }
        })
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trace always holds x(0)")
    }
}

struct Rk4<'a> {
    sys: &'a ClosedLoopSystem,
    k: [DVector<f64>; 4],
    stage: DVector<f64>,
    input: DVector<f64>,
}

impl<'a> Rk4<'a> {
    fn new(sys: &'a ClosedLoopSystem) -> Self {
        let n = sys.n_x();
        let z = || DVector::zeros(n);
        Self { sys, k: [z(), z(), z(), z()], stage: z(), input: z() }
    }

    /// One classic RK4 step with the input `E z` held constant.
    fn step(&mut self, x: &mut DVector<f64>, z: &DVector<f64>, h: f64) {
        let a = self.sys.a_cl();
        self.input.gemv(1.0, self.sys.e_mat(), z, 0.0);
        let offsets = [0.0, 0.5 * h, 0.5 * h, h];
        for s in 0..4 {
            self.stage.copy_from(x);
            if s > 0 {
                self.stage.axpy(offsets[s], &self.k[s - 1], 1.0);
            }
            self.k[s].copy_from(&self.input);
            self.k[s].gemv(1.0, a, &self.stage, 1.0);
        }
        x.axpy(h / 6.0, &self.k[0], 1.0);
        x.axpy(h / 3.0, &self.k[1], 1.0);
        x.axpy(h / 3.0, &self.k[2], 1.0);
        x.axpy(h / 6.0, &self.k[3], 1.0);
    }
}

fn disturbance_at(profiles: &[DisturbanceProfile], s: f64, out: &mut DVector<f64>) {
    out.fill(0.0);
    for p in profiles {
        out[p.channel] = p.value(s);
    }
}

fn check_profiles(sys: &ClosedLoopSystem, profiles: &[DisturbanceProfile]) -> Result<()> {
    let mut seen = vec![false; sys.n_z()];
    for p in profiles {
        if p.channel >= sys.n_z() {
            return Err(Error::IndexOutOfRange(format!("profile channel {} >= n_z = {}", p.channel, sys.n_z())));
        }
        if std::mem::replace(&mut seen[p.channel], true) {
            return Err(Error::InvalidParameter(format!("two profiles drive channel {}", p.channel)));
        }
    }
    Ok(())
}

/// Runs RK4 on a uniform grid over `[0, horizon]`, calling `record` at every
/// grid point. Steps are split at disturbance switch times so that each
/// RK4 sub-step sees a constant input. Returns the step actually used.
pub(crate) fn run_rk4<F: FnMut(f64, &DVector<f64>, &DVector<f64>)>(
    sys: &ClosedLoopSystem,
    profiles: &[DisturbanceProfile],
    horizon: f64,
    dt: f64,
    mut record: F,
) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    check_profiles(sys, profiles)?;
    let n_z = sys.n_z();
    let mut switches: Vec<f64> = profiles.iter().flat_map(|p| p.switch_times.iter().copied()).collect();
    switches.sort_by(f64::total_cmp);
    switches.dedup();

    let steps = ((horizon / dt - 1e-9).ceil().max(0.0)) as usize;
    let h = if steps == 0 { dt } else { horizon / steps as f64 };
    let mut x = DVector::zeros(sys.n_x());
    let mut z = DVector::zeros(n_z);
    let mut rk = Rk4::new(sys);
    disturbance_at(profiles, 0.0, &mut z);
    record(0.0, &x, &z);

    let mut next_switch = 0;
    for i in 0..steps {
        let t0 = i as f64 * h;
        let t1 = if i + 1 == steps { horizon } else { (i + 1) as f64 * h };
        let mut a = t0;
        while next_switch < switches.len() && switches[next_switch] <= t0 {
            next_switch += 1;
        }
        while next_switch < switches.len() && switches[next_switch] < t1 {
            let b = switches[next_switch];
            disturbance_at(profiles, 0.5 * (a + b), &mut z);
            rk.step(&mut x, &z, b - a);
            a = b;
            next_switch += 1;
        }
        disturbance_at(profiles, 0.5 * (a + t1), &mut z);
        rk.step(&mut x, &z, t1 - a);
        disturbance_at(profiles, t1, &mut z);
        record(t1, &x, &z);
    }
    Ok(h)
}

/// RK4 simulation from `x(0) = 0`. Channels without a profile see `z = 0`.
pub fn simulate(
    sys: &ClosedLoopSystem,
    profiles: &[DisturbanceProfile],
    horizon: f64,
    dt: f64,
) -> Result<SimulationTrace> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut disturbance_values = Vec::new();
    let h = run_rk4(sys, profiles, horizon, dt, |t, x, z| {
        times.push(t);
        states.push(x.clone());
        disturbance_values.push(z.clone());
    })?;
    Ok(SimulationTrace { times, states, disturbance_values, dt: h })
}

/// `x(horizon)` only.
pub fn simulate_final(
    sys: &ClosedLoopSystem,
    profiles: &[DisturbanceProfile],
    horizon: f64,
    dt: f64,
) -> Result<DVector<f64>> {
    let mut last = DVector::zeros(sys.n_x());
    run_rk4(sys, profiles, horizon, dt, |_, x, _| last.copy_from(x))?;
    Ok(last)
}
