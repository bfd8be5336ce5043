use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::{ClosedLoopSystem, EigenClass, Eigenstructure};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModalKind {
    /// `c·τ·e^{λτ}`, the leading term of a double real pole.
    PolyReal,
    /// `c·e^{λτ}` with real `c` and `λ`.
    PlainReal,
    /// `c·e^{λτ}` with `λ ∉ ℝ`; always accompanied by its conjugate.
    ComplexHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModalTerm {
    pub kind: ModalKind,
    #[serde(serialize_with = "crate::export::ser_complex")]
    pub coeff: Complex<f64>,
    #[serde(serialize_with = "crate::export::ser_complex")]
    pub lambda: Complex<f64>,
}

impl ModalTerm {
    pub fn eval(&self, tau: f64) -> Complex<f64> {
        let e = (self.lambda * tau).exp() * self.coeff;
        match self.kind {
            ModalKind::PolyReal => e * tau,
            _ => e,
        }
    }
}

/// The channel `τ ↦ [e^{A_cl τ} e_j]_k` written as a sum of modal terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalExpansion {
    pub terms: Vec<ModalTerm>,
    pub output: usize,
    pub disturbance: usize,
}

impl ModalExpansion {
    pub fn eval(&self, tau: f64) -> f64 {
        evaluate_impulse_channel(self, tau)
    }
}

/// Coefficients of `adj(sI − A)` as `Σ_m s^{n−1−m} B_m` (Faddeev–LeVerrier).
fn adjugate_coefficients(a: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(n);
    out.push(id.clone());
    for m in 1..n {
        let ab = a * out.last().unwrap();
        let coeff = -ab.trace() / m as f64;
        out.push(ab + &id * coeff);
    }
    out
}

/// Horner evaluation of `p(s) = Σ_m p[m] s^{deg−m}` together with `p'(s)`.
fn horner(p: &[f64], s: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let mut val = Complex::new(0.0, 0.0);
    let mut der = Complex::new(0.0, 0.0);
    for &c in p {
        der = der * s + val;
        val = val * s + c;
    }
    (val, der)
}

/// Residues of `H(s) = [(sI − A_cl)^{-1} e_j]_k` at the classified poles.
///
/// A simple pole `λ` contributes `c = N(λ)/Q(λ)`. A double pole contributes
/// `N(λ)/Q(λ)` as the `τe^{λτ}` coefficient and
/// `(N'(λ) − N(λ) Σ 1/(λ−μ)) / Q(λ)` as the `e^{λτ}` coefficient, where `Q`
/// is the characteristic polynomial with the pole removed.
pub fn modal_coefficients(sys: &ClosedLoopSystem, eig: &Eigenstructure, k: usize, j: usize) -> Result<ModalExpansion> {
    sys.check_channel(k, j)?;
    let e_j = sys.e_mat().column(j);
    let numerator: Vec<f64> = adjugate_coefficients(sys.a_cl()).iter().map(|b| (b * e_j)[k]).collect();

    let others = |skip: &[usize], s: Complex<f64>| {
        let mut q = Complex::new(1.0, 0.0);
        let mut log_der = Complex::new(0.0, 0.0);
        for (idx, e) in eig.entries.iter().enumerate() {
            if !skip.contains(&idx) {
                q *= s - e.value;
                log_der += (s - e.value).inv();
            }
        }
        (q, log_der)
    };

    let mut terms = Vec::with_capacity(eig.len());
    let mut idx = 0;
    while idx < eig.entries.len() {
        let entry = eig.entries[idx];
        let lambda = entry.value;
        match entry.class {
            EigenClass::DoubleReal => {
                let (q, log_der) = others(&[idx, idx + 1], lambda);
                let (n_val, n_der) = horner(&numerator, lambda);
                let lead = n_val / q;
                let plain = (n_der - n_val * log_der) / q;
                terms.push(ModalTerm { kind: ModalKind::PolyReal, coeff: Complex::new(lead.re, 0.0), lambda });
                terms.push(ModalTerm { kind: ModalKind::PlainReal, coeff: Complex::new(plain.re, 0.0), lambda });
                idx += 2;
            }
            EigenClass::ComplexPair => {
                let (q, _) = others(&[idx], lambda);
                let c = horner(&numerator, lambda).0 / q;
                terms.push(ModalTerm { kind: ModalKind::ComplexHalf, coeff: c, lambda });
                terms.push(ModalTerm { kind: ModalKind::ComplexHalf, coeff: c.conj(), lambda: lambda.conj() });
                idx += 2;
            }
            EigenClass::DistinctReal => {
                let (q, _) = others(&[idx], lambda);
                let c = horner(&numerator, lambda).0 / q;
                terms.push(ModalTerm { kind: ModalKind::PlainReal, coeff: Complex::new(c.re, 0.0), lambda });
                idx += 1;
            }
        }
    }
    Ok(ModalExpansion { terms, output: k, disturbance: j })
}

/// Real part of `Σ g_i(τ)`.
pub fn evaluate_impulse_channel(exp: &ModalExpansion, tau: f64) -> f64 {
    let sum: Complex<f64> = exp.terms.iter().map(|t| t.eval(tau)).sum();
    debug_assert!(
        sum.im.abs() <= 1e-10 * exp.terms.iter().map(|t| t.eval(tau).norm()).sum::<f64>().max(f64::MIN_POSITIVE),
        "modal sum has imaginary residue {}",
        sum.im
    );
    sum.re
}
