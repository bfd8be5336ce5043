//! Dense sampling of one impulse channel `y(τ) = [e^{Aτ} e_j]_k`, its sign
//! changes, and the quadrature of `|y|`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::expm::matrix_exponential;
use super::quadrature::{gk15_combine, gk15_nodes, integrate_from, QuadratureEstimate, GK_POINTS};
use crate::error::{Error, Result};
use crate::lti::{
    eigendecompose_and_classify, ensure_hurwitz, modal_coefficients, ClosedLoopSystem, ModalKind,
    DEFAULT_EPS_MULTIPLICITY,
};

/// Samples per period of the fastest mode.
pub const SAMPLES_PER_PERIOD: f64 = 40.0;

const MAX_REFINE_INTERVALS: usize = 200;

/// Largest `‖A‖₁ d` propagated by Taylor series rather than `expm`.
const TAYLOR_LIMIT: f64 = 0.5;

/// The channel sampled on a uniform grid over `[0, end]`, with its sign
/// changes located by bisection.
#[derive(Debug, Clone)]
pub struct ChannelScan {
    a: DMatrix<f64>,
    a_norm: f64,
    k: usize,
    h: f64,
    end: f64,
    /// Column `i` is `e^{A τ_i} e_j`.
    states: DMatrix<f64>,
    zeros: Vec<f64>,
    initial_sign: f64,
    /// Row `m` is row `k` of `e^{A δ_m}` for the Kronrod nodes `δ_m` of `[0, h]`.
    kernel: DMatrix<f64>,
}

fn strict_sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ChannelScan {
    pub fn new(sys: &ClosedLoopSystem, k: usize, j: usize, end: f64, refine_tol: f64) -> Result<Self> {
        sys.check_channel(k, j)?;
        if !(end >= 0.0 && end.is_finite()) {
            return Err(Error::InvalidParameter(format!("scan end must be finite and nonnegative, got {end}")));
        }
        if !(refine_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("refine_tol must be positive, got {refine_tol}")));
        }
        let a = sys.a_cl().clone();
        let rho = sys.eigenvalues()?.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let h_max = if rho > 0.0 { 2.0 * PI / (SAMPLES_PER_PERIOD * rho) } else { end.max(1.0) };
        let cells = ((end / h_max).ceil() as usize).max(1);
        let h = end / cells as f64;

        let phi = matrix_exponential(&a, h);
        let mut states = DMatrix::zeros(a.nrows(), cells + 1);
        states.set_column(0, &sys.e_column(j)?);
        for i in 0..cells {
            let (done, mut rest) = states.columns_range_pair_mut(i, i + 1..);
            rest.column_mut(0).gemv(1.0, &phi, &done, 0.0);
        }

        let nodes = gk15_nodes(0.0, h);
        let mut kernel = DMatrix::zeros(GK_POINTS, a.nrows());
        for (m, d) in nodes.iter().enumerate() {
            kernel.set_row(m, &matrix_exponential(&a, *d).row(k));
        }

        let a_norm = (0..a.ncols()).map(|c| a.column(c).lp_norm(1)).fold(0.0, f64::max);
        let mut scan = Self { a, a_norm, k, h, end, states, zeros: Vec::new(), initial_sign: 0.0, kernel };
        scan.locate_zeros(refine_tol);
        Ok(scan)
    }

    fn locate_zeros(&mut self, refine_tol: f64) {
        let mut last: Option<(usize, f64)> = None;
        let mut zeros = Vec::new();
        for i in 0..self.states.ncols() {
            let s = strict_sign(self.states[(self.k, i)]);
            if s == 0.0 {
                continue;
            }
            match last {
                None => self.initial_sign = s,
                Some((base, s_base)) if s != s_base => zeros.push(self.bisect(base, i, s_base, refine_tol)),
                _ => {}
            }
            last = Some((i, s));
        }
        self.zeros = zeros;
    }

    /// Safeguarded secant on a sign-change bracket: each secant point is
    /// followed by a probe `tol/2` past it, and a step that fails to halve
    /// the bracket is followed by a bisection.
    fn bisect(&self, base: usize, upper: usize, s_base: f64, refine_tol: f64) -> f64 {
        let (mut lo, mut hi) = (self.time(base), self.time(upper));
        let (mut f_lo, mut f_hi) = (self.states[(self.k, base)], self.states[(self.k, upper)]);
        let mut bisect_next = false;
        while hi - lo > refine_tol {
            let width = hi - lo;
            let x = if bisect_next {
                0.5 * (lo + hi)
            } else {
                let secant = lo + width * f_lo / (f_lo - f_hi);
                secant.clamp(lo + 0.25 * refine_tol, hi - 0.25 * refine_tol)
            };
            if !(lo < x && x < hi) {
                break;
            }
            let fx = self.value_from(base, x);
            if fx == 0.0 {
                return x;
            }
            let on_low_side = strict_sign(fx) == s_base;
            if on_low_side {
                (lo, f_lo) = (x, fx);
            } else {
                (hi, f_hi) = (x, fx);
            }
            if !bisect_next && hi - lo > refine_tol {
                let probe = if on_low_side { x + 0.5 * refine_tol } else { x - 0.5 * refine_tol };
                if lo < probe && probe < hi {
                    let fp = self.value_from(base, probe);
                    if fp == 0.0 {
                        return probe;
                    }
                    if strict_sign(fp) == s_base {
                        (lo, f_lo) = (probe, fp);
                    } else {
                        (hi, f_hi) = (probe, fp);
                    }
                }
            }
            bisect_next = hi - lo > 0.5 * width;
        }
        0.5 * (lo + hi)
    }

    fn time(&self, i: usize) -> f64 {
        if i + 1 == self.states.ncols() {
            self.end
        } else {
            i as f64 * self.h
        }
    }

    fn value_from(&self, base: usize, tau: f64) -> f64 {
        let mut out = [0.0];
        self.values_from(base, &[tau], &mut out);
        out[0]
    }

    /// `y` at each of `taus`, propagated from sample `base`.
    fn values_from(&self, base: usize, taus: &[f64], out: &mut [f64]) {
        let x = self.states.column(base);
        let t0 = self.time(base);
        let scale = x.amax();
        let mut term = DVector::zeros(x.len());
        let mut next = DVector::zeros(x.len());
        for (tau, o) in taus.iter().zip(out.iter_mut()) {
            let d = tau - t0;
            if d == 0.0 {
                *o = x[self.k];
                continue;
            }
            if self.a_norm * d > TAYLOR_LIMIT {
                let e = matrix_exponential(&self.a, d);
                *o = e.row(self.k).transpose().dot(&x);
                continue;
            }
            // Taylor series of e^{Ad}x; terms fall by at least a factor of 2
            term.copy_from(&x);
            let mut acc = x[self.k];
            for m in 1..=40 {
                next.gemv(d / m as f64, &self.a, &term, 0.0);
                std::mem::swap(&mut term, &mut next);
                acc += term[self.k];
                if term.amax() <= f64::EPSILON * 1e-2 * scale {
                    break;
                }
            }
            *o = acc;
        }
    }

    fn gk15_from(&self, base: usize, a: f64, b: f64) -> QuadratureEstimate {
        let nodes = gk15_nodes(a, b);
        let mut v = [0.0; GK_POINTS];
        self.values_from(base, &nodes, &mut v);
        for vi in v.iter_mut() {
            *vi = vi.abs();
        }
        gk15_combine(&v, a, b)
    }

    /// `y(τ)` for `τ ∈ [0, end]`, propagated from the nearest sample at or below `τ`.
    pub fn value_at(&self, tau: f64) -> f64 {
        let base = ((tau / self.h).floor().max(0.0) as usize).min(self.states.ncols() - 1);
        self.value_from(base, tau)
    }

    /// Sign changes in `(0, end)`, ascending.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    /// Sign of the channel just right of `τ = 0`; `0` if it vanishes on every sample.
    pub fn initial_sign(&self) -> f64 {
        self.initial_sign
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// States `e^{A τ_i} e_j` at the grid points `τ_i = i·h`, one per column.
    pub fn samples(&self) -> &DMatrix<f64> {
        &self.states
    }

    /// `∫₀^end |y(τ)| dτ` with error at most `max(abs_tol, rel_tol·value)`.
    pub fn integrate_abs(&self, abs_tol: f64, rel_tol: f64) -> Result<QuadratureEstimate> {
        if self.end == 0.0 {
            return Ok(QuadratureEstimate { value: 0.0, error: 0.0 });
        }
        let cells = self.states.ncols() - 1;
        let mut y = DVector::zeros(GK_POINTS);
        let mut pieces: Vec<(usize, f64, f64, QuadratureEstimate)> = Vec::with_capacity(cells + 2 * self.zeros.len());
        let mut z = 0;
        for i in 0..cells {
            let (l, r) = (self.time(i), self.time(i + 1));
            let first = z;
            while z < self.zeros.len() && self.zeros[z] < r {
                z += 1;
            }
            let inner = self.zeros[first..z].iter().copied().filter(|&c| c > l);
            if inner.clone().next().is_none() {
                y.gemv(1.0, &self.kernel, &self.states.column(i), 0.0);
                let mut v = [0.0; GK_POINTS];
                for (vm, ym) in v.iter_mut().zip(y.iter()) {
                    *vm = ym.abs();
                }
                pieces.push((i, l, r, gk15_combine(&v, l, r)));
            } else {
                let mut left = l;
                for c in inner.chain(std::iter::once(r)) {
                    pieces.push((i, left, c, self.gk15_from(i, left, c)));
                    left = c;
                }
            }
        }

        let value: f64 = pieces.iter().map(|p| p.3.value).sum();
        let error: f64 = pieces.iter().map(|p| p.3.error).sum();
        let target = abs_tol.max(rel_tol * value);
        if error <= target {
            return Ok(QuadratureEstimate { value, error });
        }
        let share = 0.5 * target / pieces.len() as f64;
        for p in pieces.iter_mut() {
            if p.3.error > share {
                let (i, l, r) = (p.0, p.1, p.2);
                p.3 =
                    integrate_from(&mut |t| self.value_from(i, t).abs(), p.3, l, r, share, 0.0, MAX_REFINE_INTERVALS)?;
            }
        }
        let value: f64 = pieces.iter().map(|p| p.3.value).sum();
        let error: f64 = pieces.iter().map(|p| p.3.error).sum();
        let target = abs_tol.max(rel_tol * value);
        if error > target {
            return Err(Error::QuadratureNotConverged { a: 0.0, b: self.end, error, requested: target });
        }
        Ok(QuadratureEstimate { value, error })
    }
}

/// Quadrature of `z_max ∫₀ᵗ |y(τ)| dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Quadrature error plus, for `t = ∞`, the truncation tail bound.
    pub error: f64,
    /// Upper integration limit actually used.
    pub horizon_used: f64,
    pub tail: f64,
    pub sign_changes: usize,
}

/// `∫_T^∞ |y|` bounded termwise from the modal expansion.
fn tail_bound(sys: &ClosedLoopSystem, k: usize, j: usize, t: f64) -> Result<f64> {
    let eig = eigendecompose_and_classify(sys, DEFAULT_EPS_MULTIPLICITY)?;
    let exp = modal_coefficients(sys, &eig, k, j)?;
    Ok(exp
        .terms
        .iter()
        .map(|term| {
            let (c, l) = (term.coeff.norm(), term.lambda.re);
            let decay = (l * t).exp();
            match term.kind {
                ModalKind::PolyReal => c * decay * (t / -l + 1.0 / (l * l)),
                _ => c * decay / -l,
            }
        })
        .sum())
}

/// Truncation point for the infinite-horizon integral.
fn initial_truncation(sigma_max: f64, tol: f64) -> f64 {
    tol.min(1e-12).ln() / sigma_max
}

/// `z_max ∫₀ᵗ |[e^{A τ} e_j]_k| dτ` by adaptive Gauss–Kronrod quadrature split at
/// the detected sign changes. `t = None` integrates to a truncation point and
/// accounts for the remainder in `error`.
pub fn quadrature_bound(
    sys: &ClosedLoopSystem,
    k: usize,
    j: usize,
    z_max: f64,
    t: Option<f64>,
    tol: f64,
) -> Result<QuadratureResult> {
    quadrature_bound_with(sys, k, j, z_max, t, tol, super::DEFAULT_REFINE_TOL)
}

pub fn quadrature_bound_with(
    sys: &ClosedLoopSystem,
    k: usize,
    j: usize,
    z_max: f64,
    t: Option<f64>,
    tol: f64,
    refine_tol: f64,
) -> Result<QuadratureResult> {
    sys.check_channel(k, j)?;
    if !(z_max >= 0.0 && z_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("z_max must be nonnegative, got {z_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let eigs = sys.eigenvalues()?;
    let sigma_max = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let finite = match t {
        Some(t) if t.is_finite() => {
            if t < 0.0 {
                return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {t}")));
            }
            Some(t)
        }
        _ => {
            ensure_hurwitz(sys)?;
            None
        }
    };

    if let Some(t) = finite {
        let scan = ChannelScan::new(sys, k, j, t, refine_tol)?;
        let q = scan.integrate_abs(f64::MIN_POSITIVE, tol)?;
        return Ok(QuadratureResult {
            value: z_max * q.value,
            error: z_max * q.error,
            horizon_used: t,
            tail: 0.0,
            sign_changes: scan.zeros().len(),
        });
    }

    let mut end = initial_truncation(sigma_max, tol);
    for _ in 0..40 {
        let scan = ChannelScan::new(sys, k, j, end, refine_tol)?;
        let q = scan.integrate_abs(f64::MIN_POSITIVE, 0.5 * tol)?;
        let tail = tail_bound(sys, k, j, end)?;
        if tail <= 0.5 * tol * q.value || (q.value == 0.0 && tail == 0.0) {
            return Ok(QuadratureResult {
                value: z_max * q.value,
                error: z_max * (q.error + tail),
                horizon_used: end,
                tail: z_max * tail,
                sign_changes: scan.zeros().len(),
            });
        }
        end *= 1.5;
    }
    Err(Error::QuadratureNotConverged { a: 0.0, b: f64::INFINITY, error: f64::NAN, requested: tol })
}
