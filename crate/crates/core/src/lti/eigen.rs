use nalgebra::Complex;
use serde::Serialize;

use super::ClosedLoopSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenClass {
    DistinctReal,
    DoubleReal,
    ComplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenEntry {
    #[serde(serialize_with = "crate::export::ser_complex")]
    pub value: Complex<f64>,
    pub class: EigenClass,
    /// Index of the conjugate (complex) or repeated (double real) partner.
    pub partner: Option<usize>,
}

/// Classified spectrum, sorted as: double real pairs, then conjugate pairs
/// (positive imaginary part first), then distinct reals in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenstructure {
    pub entries: Vec<EigenEntry>,
    pub n_r: usize,
    pub n_d: usize,
    pub n_c: usize,
}

impl Eigenstructure {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest real part (the slowest decay rate, negative for Hurwitz systems).
    pub fn max_real_part(&self) -> f64 {
        self.entries.iter().map(|e| e.value.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm()).fold(0.0, f64::max)
    }

    pub fn values(&self) -> impl Iterator<Item = Complex<f64>> + '_ {
        self.entries.iter().map(|e| e.value)
    }
}

/// Computes, validates and classifies the spectrum of `A_cl`.
///
/// Eigenvalues whose imaginary part is below `eps_multiplicity · ρ(A_cl)` are
/// made exactly real, and real eigenvalues closer than the same threshold
/// are merged into one exact double eigenvalue at their mean.
pub fn eigendecompose_and_classify(sys: &ClosedLoopSystem, eps_multiplicity: f64) -> Result<Eigenstructure> {
    let raw = sys.eigenvalues()?;
    if let Some(bad) = raw.iter().find(|l| !(l.re < 0.0)) {
        return Err(Error::NotHurwitz { re: bad.re, im: bad.im });
    }
    let scale = raw.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let tol = eps_multiplicity * scale;

    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut n_lower = 0usize;
    for l in &raw {
        if l.im.abs() <= tol {
            reals.push(l.re);
        } else if l.im > 0.0 {
            upper.push(*l);
        } else {
            n_lower += 1;
        }
    }
    if upper.len() != n_lower {
        return Err(Error::EigenFailure);
    }

    reals.sort_by(f64::total_cmp);
    let mut doubles = Vec::new();
    let mut distinct = Vec::new();
    let mut i = 0;
    while i < reals.len() {
        let mut end = i + 1;
        while end < reals.len() && reals[end] - reals[end - 1] <= tol {
            end += 1;
        }
        let cluster = &reals[i..end];
        match cluster.len() {
            1 => distinct.push(cluster[0]),
            2 => doubles.push(0.5 * (cluster[0] + cluster[1])),
            m => {
                let mean = cluster.iter().sum::<f64>() / m as f64;
                return Err(Error::UnsupportedMultiplicity { re: mean, im: 0.0, multiplicity: m });
            }
        }
        i = end;
    }

    upper.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for w in upper.windows(2) {
        if (w[1] - w[0]).norm() <= tol {
            return Err(Error::UnsupportedMultiplicity { re: w[0].re, im: w[0].im, multiplicity: 2 });
        }
    }

    let mut entries = Vec::with_capacity(raw.len());
    for &d in &doubles {
        let idx = entries.len();
        entries.push(EigenEntry { value: Complex::new(d, 0.0), class: EigenClass::DoubleReal, partner: Some(idx + 1) });
        entries.push(EigenEntry { value: Complex::new(d, 0.0), class: EigenClass::DoubleReal, partner: Some(idx) });
    }
    for &c in &upper {
        let idx = entries.len();
        entries.push(EigenEntry { value: c, class: EigenClass::ComplexPair, partner: Some(idx + 1) });
        entries.push(EigenEntry { value: c.conj(), class: EigenClass::ComplexPair, partner: Some(idx) });
    }
    for &r in &distinct {
        entries.push(EigenEntry { value: Complex::new(r, 0.0), class: EigenClass::DistinctReal, partner: None });
    }

    Ok(Eigenstructure { entries, n_r: distinct.len(), n_d: 2 * doubles.len(), n_c: 2 * upper.len() })
}
