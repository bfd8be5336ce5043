//! Closed-loop LTI systems, their spectra, and the modal decomposition of
//! individual impulse-response channels.

mod eigen;
mod modal;
mod pairing;

pub use eigen::{eigendecompose_and_classify, EigenClass, EigenEntry, Eigenstructure};
pub use modal::{evaluate_impulse_channel, modal_coefficients, ModalExpansion, ModalKind, ModalTerm};
pub use pairing::{pair_terms, pair_terms_at, PairGroup, PairedExpansion, PairingStrategy};

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Default clustering tolerance for repeated eigenvalues, relative to the spectral radius.
pub const DEFAULT_EPS_MULTIPLICITY: f64 = 1e-7;

/// `ẋ = A_cl x + E z` with `x ∈ ℝ^{n_x}` and `z ∈ ℝ^{n_z}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopSystem {
    a_cl: DMatrix<f64>,
    e_mat: DMatrix<f64>,
}

impl ClosedLoopSystem {
    pub fn new(a_cl: DMatrix<f64>, e_mat: DMatrix<f64>) -> Result<Self> {
        if a_cl.nrows() == 0 || !a_cl.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A_cl must be square and non-empty, got {}x{}",
                a_cl.nrows(),
                a_cl.ncols()
            )));
        }
        if e_mat.nrows() != a_cl.nrows() || e_mat.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "E must have {} rows and at least one column, got {}x{}",
                a_cl.nrows(),
                e_mat.nrows(),
                e_mat.ncols()
            )));
        }
        if a_cl.iter().chain(e_mat.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("system matrices contain non-finite entries".into()));
        }
        Ok(Self { a_cl, e_mat })
    }

    pub fn a_cl(&self) -> &DMatrix<f64> {
        &self.a_cl
    }

    pub fn e_mat(&self) -> &DMatrix<f64> {
        &self.e_mat
    }

    pub fn n_x(&self) -> usize {
        self.a_cl.nrows()
    }

    pub fn n_z(&self) -> usize {
        self.e_mat.ncols()
    }

    /// Disturbance input column `e_j` (0-based).
    pub fn e_column(&self, j: usize) -> Result<DVector<f64>> {
        self.check_channel(0, j)?;
        Ok(self.e_mat.column(j).into_owned())
    }

    pub(crate) fn check_channel(&self, k: usize, j: usize) -> Result<()> {
        if k >= self.n_x() {
            return Err(Error::IndexOutOfRange(format!("state index {k} >= n_x = {}", self.n_x())));
        }
        if j >= self.n_z() {
            return Err(Error::IndexOutOfRange(format!("disturbance index {j} >= n_z = {}", self.n_z())));
        }
        Ok(())
    }

    /// Eigenvalues of `A_cl`. Two-state systems use the closed-form quadratic
    /// roots so that conjugate pairs are exact mirror images.
    pub fn eigenvalues(&self) -> Result<Vec<Complex<f64>>> {
        let a = &self.a_cl;
        if a.nrows() == 1 {
            return Ok(vec![Complex::new(a[(0, 0)], 0.0)]);
        }
        if a.nrows() == 2 {
            let half_trace = 0.5 * (a[(0, 0)] + a[(1, 1)]);
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let disc = half_trace * half_trace - det;
            return Ok(if disc >= 0.0 {
                let root = disc.sqrt();
                // avoid cancellation in the smaller-magnitude root
                let big = if half_trace >= 0.0 { half_trace + root } else { half_trace - root };
                let small = if big != 0.0 { det / big } else { 0.0 };
                let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
                vec![Complex::new(hi, 0.0), Complex::new(lo, 0.0)]
            } else {
                let im = (-disc).sqrt();
                vec![Complex::new(half_trace, im), Complex::new(half_trace, -im)]
            });
        }
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
        Ok(schur.complex_eigenvalues().iter().copied().collect())
    }
}

/// Per-channel amplitude bounds `z_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceBounds {
    z_max: Vec<f64>,
}

impl DisturbanceBounds {
    pub fn new(z_max: Vec<f64>) -> Result<Self> {
        if let Some(bad) = z_max.iter().find(|z| !(z.is_finite() && **z >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "disturbance bounds must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self { z_max })
    }

    pub fn uniform(n_z: usize, z: f64) -> Result<Self> {
        Self::new(vec![z; n_z])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z_max
    }

    pub fn len(&self) -> usize {
        self.z_max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_max.is_empty()
    }
}

/// `A_cl = A − b kᵀ`.
pub fn build_closed_loop(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    k_gain: &DVector<f64>,
    e_mat: &DMatrix<f64>,
) -> Result<ClosedLoopSystem> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("A must be square, got {}x{}", n, a.ncols())));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("b has length {}, expected {n}", b.len())));
    }
    if k_gain.len() != n {
        return Err(Error::DimensionMismatch(format!("k has length {}, expected {n}", k_gain.len())));
    }
    let a_cl = a - b * k_gain.transpose();
    ClosedLoopSystem::new(a_cl, e_mat.clone())
}

/// True iff every eigenvalue has real part `< -tol`.
pub fn check_hurwitz(sys: &ClosedLoopSystem, tol: f64) -> Result<bool> {
    Ok(sys.eigenvalues()?.iter().all(|l| l.re < -tol))
}

/// `Err(NotHurwitz)` naming the eigenvalue with the largest real part, unless all are in the open left half-plane.
pub fn ensure_hurwitz(sys: &ClosedLoopSystem) -> Result<()> {
    let eigs = sys.eigenvalues()?;
    let worst = eigs.iter().max_by(|a, b| a.re.total_cmp(&b.re)).expect("non-empty system");
    if worst.re < 0.0 {
        Ok(())
    } else {
        Err(Error::NotHurwitz { re: worst.re, im: worst.im })
    }
}
