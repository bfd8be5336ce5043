//! Lateral trajectory-following controller on a double-integrator offset
//! model: state `(Δd, Δθ)`, gains `(K_d, K_θ)`, speed `v`, curvature
//! disturbance `|z| ≤ z_max`.

use std::f64::consts::PI;

use nalgebra::{dmatrix, Complex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::ClosedLoopSystem;

pub const DEFAULT_KD_RANGE: (f64, f64) = (0.01, 1.5);
pub const DEFAULT_KTHETA_RANGE: (f64, f64) = (0.01, 2.5);
pub const DEFAULT_RESOLUTION: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfcParams {
    /// Speed (m/s).
    pub v: f64,
    /// Position gain (1/m²).
    pub k_d: f64,
    /// Heading gain (1/m).
    pub k_theta: f64,
    /// Curvature disturbance bound (1/m).
    pub z_max: f64,
    /// Allowed lateral offset (m).
    pub d_max: f64,
}

impl TfcParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive("v", self.v)?;
        positive("k_d", self.k_d)?;
        positive("k_theta", self.k_theta)?;
        if !(self.z_max >= 0.0 && self.z_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("z_max must be nonnegative, got {}", self.z_max)));
        }
        if !(self.d_max >= 0.0) {
            return Err(Error::InvalidParameter(format!("d_max must be nonnegative, got {}", self.d_max)));
        }
        Ok(())
    }

    pub fn with_gains(&self, k_d: f64, k_theta: f64) -> Self {
        Self { k_d, k_theta, ..*self }
    }

    /// `K_θ² − 4K_d`.
    pub fn discriminant(&self) -> f64 {
        self.k_theta * self.k_theta - 4.0 * self.k_d
    }

    pub fn regime(&self) -> Regime {
        let d = self.discriminant();
        if d > 0.0 {
            Regime::RealDistinct
        } else if d == 0.0 {
            Regime::DoubleReal
        } else {
            Regime::Complex
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    RealDistinct,
    DoubleReal,
    Complex,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::RealDistinct => "real_distinct",
            Regime::DoubleReal => "double_real",
            Regime::Complex => "complex",
        }
    }
}

/// `A_cl = [[0, v], [−vK_d, −vK_θ]]`, `E = [0, v]ᵀ`.
pub fn build_tfc(p: &TfcParams) -> Result<ClosedLoopSystem> {
    p.validate()?;
    ClosedLoopSystem::new(dmatrix![0.0, p.v; -p.v * p.k_d, -p.v * p.k_theta], dmatrix![0.0; p.v])
}

/// `λ_{1,2} = −(v/2)(K_θ ∓ √(K_θ² − 4K_d))`; the slower real root, or the root
/// with positive imaginary part, comes first.
pub fn tfc_eigenvalues(p: &TfcParams) -> (Complex<f64>, Complex<f64>) {
    let d = p.discriminant();
    let half_v = 0.5 * p.v;
    if d >= 0.0 {
        let fast = -half_v * (p.k_theta + d.sqrt());
        // product of the roots is v²K_d
        let slow = p.v * p.v * p.k_d / fast;
        (Complex::new(slow, 0.0), Complex::new(fast, 0.0))
    } else {
        let im = half_v * (-d).sqrt();
        (Complex::new(-half_v * p.k_theta, im), Complex::new(-half_v * p.k_theta, -im))
    }
}

/// Time-independent worst-case lateral offset `x_{1,max}` (m):
/// `z/K_d` for `K_θ² ≥ 4K_d`, else `(z/K_d)(2/(1 − e^{−K_θπ/√(4K_d − K_θ²)}) − 1)`.
pub fn tfc_bound_closed_form(p: &TfcParams) -> f64 {
    let dc = p.z_max / p.k_d;
    let d = p.discriminant();
    if d >= 0.0 {
        return dc;
    }
    let x = -p.k_theta * PI / (-d).sqrt();
    dc * (2.0 / -x.exp_m1() - 1.0)
}

/// Peak of `x_1` under the constant disturbance `z = z_max`:
/// `(z/K_d)(e^{−ξπ/√(1−ξ²)} + 1)` with `ξ = −Re λ/|λ|` in the complex regime,
/// `z/K_d` otherwise.
pub fn overshoot_constant_disturbance(p: &TfcParams) -> f64 {
    let dc = p.z_max / p.k_d;
    if p.discriminant() >= 0.0 {
        return dc;
    }
    let (l, _) = tfc_eigenvalues(p);
    let xi = -l.re / l.norm();
    dc * ((-xi * PI / (1.0 - xi * xi).sqrt()).exp() + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafeRegionMap {
    pub kd_grid: Vec<f64>,
    pub ktheta_grid: Vec<f64>,
    /// `bound[i][j]` at `(kd_grid[i], ktheta_grid[j])`.
    pub bound: Vec<Vec<f64>>,
    pub safe: Vec<Vec<bool>>,
    pub regime: Vec<Vec<Regime>>,
    pub d_max: f64,
}

impl SafeRegionMap {
    /// `(k_d, k_θ, bound, safe, regime)` with `k_d` as the outer index.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, bool, Regime)> + '_ {
        self.kd_grid.iter().enumerate().flat_map(move |(i, &kd)| {
            self.ktheta_grid
                .iter()
                .enumerate()
                .map(move |(j, &kt)| (kd, kt, self.bound[i][j], self.safe[i][j], self.regime[i][j]))
        })
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    let step = (range.1 - range.0) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { range.1 } else { range.0 + i as f64 * step }).collect()
}

/// Closed-form bound over a `resolution.0 × resolution.1` grid of `(K_d, K_θ)`.
pub fn sweep(
    p_base: &TfcParams,
    kd_range: (f64, f64),
    ktheta_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<SafeRegionMap> {
    for (name, r) in [("k_d", kd_range), ("k_theta", ktheta_range)] {
        if !(r.0 > 0.0 && r.0 <= r.1 && r.1.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} range must be positive and ascending, got {r:?}")));
        }
    }
    if resolution.0 == 0 || resolution.1 == 0 {
        return Err(Error::InvalidParameter("sweep resolution must be at least 1".into()));
    }
    p_base.with_gains(kd_range.0, ktheta_range.0).validate()?;
    let kd_grid = linspace(kd_range, resolution.0);
    let ktheta_grid = linspace(ktheta_range, resolution.1);
    let rows: Vec<(Vec<f64>, Vec<bool>, Vec<Regime>)> = kd_grid
        .par_iter()
        .map(|&kd| {
            let mut b = Vec::with_capacity(ktheta_grid.len());
            let mut s = Vec::with_capacity(ktheta_grid.len());
            let mut r = Vec::with_capacity(ktheta_grid.len());
            for &kt in &ktheta_grid {
                let p = p_base.with_gains(kd, kt);
                let bound = tfc_bound_closed_form(&p);
                b.push(bound);
                s.push(bound <= p.d_max);
                r.push(p.regime());
            }
            (b, s, r)
        })
        .collect();
    let mut map = SafeRegionMap {
        kd_grid,
        ktheta_grid,
        bound: Vec::with_capacity(rows.len()),
        safe: Vec::with_capacity(rows.len()),
        regime: Vec::with_capacity(rows.len()),
        d_max: p_base.d_max,
    };
    for (b, s, r) in rows {
        map.bound.push(b);
        map.safe.push(s);
        map.regime.push(r);
    }
    Ok(map)
}
