//! Fixed systems shared by the benchmarks.

use nalgebra::{DMatrix, DVector};
use wcbound::tfc::build_tfc;
use wcbound::{ClosedLoopSystem, DisturbanceBounds, TfcParams};

/// Reference gains of the trajectory-following controller (complex regime).
pub fn tfc_params() -> TfcParams {
    TfcParams { v: 10.0, k_d: 0.3, k_theta: 0.5, z_max: 0.1, d_max: 0.4 }
}

pub fn tfc_system() -> ClosedLoopSystem {
    build_tfc(&tfc_params()).expect("valid gains")
}

/// `n`-state chain with distinct real and lightly damped complex modes,
/// mixed by a fixed well-conditioned similarity, and `n_z` disturbance channels.
pub fn mixed_system(n: usize, n_z: usize) -> ClosedLoopSystem {
    let mut j = DMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        let s = -0.4 - 0.3 * i as f64;
        if i + 1 < n && i % 3 == 0 {
            let w = 1.0 + 0.5 * i as f64;
            j[(i, i)] = s;
            j[(i + 1, i + 1)] = s;
            j[(i, i + 1)] = w;
            j[(i + 1, i)] = -w;
            i += 2;
        } else {
            j[(i, i)] = s;
            i += 1;
        }
    }
    let p = DMatrix::from_fn(n, n, |r, c| if r == c { 2.0 } else { 0.3 * (((r * 7 + c * 3) % 5) as f64 - 2.0) / 2.0 });
    let p_inv = p.clone().try_inverse().expect("diagonally dominant");
    let e = DMatrix::from_fn(n, n_z, |r, c| 1.0 / (1.0 + r as f64 + c as f64));
    ClosedLoopSystem::new(&p * j * p_inv, e).expect("square system")
}

pub fn uniform_bounds(n_z: usize) -> DisturbanceBounds {
    DisturbanceBounds::new(vec![0.1; n_z]).expect("nonnegative")
}

/// A dense test matrix for the exponential with norm about `scale`.
pub fn dense_matrix(n: usize, scale: f64) -> DMatrix<f64> {
    let v = DVector::from_fn(n, |r, _| (r as f64 + 1.0).sin());
    DMatrix::from_fn(n, n, |r, c| scale * ((r + 2 * c) as f64).cos() / n as f64 - if r == c { v[r].abs() } else { 0.0 })
}
