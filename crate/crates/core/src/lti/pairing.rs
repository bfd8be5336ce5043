use nalgebra::Complex;
use serde::Serialize;

use super::{ModalExpansion, ModalKind};
use crate::bounds::{bound_distinct_real_pair, bound_singleton, RealPairWork};
use crate::error::{Error, Result};

/// Largest number of distinct real modes for which `Optimal` pairing is enumerated.
pub const OPTIMAL_PAIRING_MAX_REALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PairingStrategy {
    /// Consecutive pairing of distinct real modes in sorted order.
    #[default]
    Default,
    /// Exhaustive search over perfect matchings of the distinct real modes,
    /// minimising the summed pair bound. Falls back to `Default` above
    /// [`OPTIMAL_PAIRING_MAX_REALS`] modes.
    Optimal,
}

/// One analytically solvable group `|g_a + g_b|` (or a lone `|g_a|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PairGroup {
    RealPair {
        c_i: f64,
        c_j: f64,
        lambda_i: f64,
        lambda_j: f64,
        terms: [usize; 2],
    },
    /// `(c_i τ + c_ip1) e^{λτ}`.
    DoubleRealPair {
        c_i: f64,
        c_ip1: f64,
        lambda: f64,
        terms: [usize; 2],
    },
    /// `c e^{λτ} + c* e^{λ*τ}` with `λ = σ + jω`, `ω > 0`.
    ComplexPair {
        #[serde(serialize_with = "crate::export::ser_complex")]
        c: Complex<f64>,
        sigma: f64,
        omega: f64,
        terms: [usize; 2],
    },
    Singleton {
        c: f64,
        lambda: f64,
        term: usize,
    },
}

impl PairGroup {
    /// Indices into the parent expansion's term list.
    pub fn members(&self) -> Vec<usize> {
        match *self {
            PairGroup::RealPair { terms, .. }
            | PairGroup::DoubleRealPair { terms, .. }
            | PairGroup::ComplexPair { terms, .. } => terms.to_vec(),
            PairGroup::Singleton { term, .. } => vec![term],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PairGroup::RealPair { .. } => "real_pair",
            PairGroup::DoubleRealPair { .. } => "double_real_pair",
            PairGroup::ComplexPair { .. } => "complex_pair",
            PairGroup::Singleton { .. } => "singleton",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedExpansion {
    pub groups: Vec<PairGroup>,
    pub n_terms: usize,
    pub output: usize,
    pub disturbance: usize,
}

/// Pairs terms for the time-independent bound.
pub fn pair_terms(exp: &ModalExpansion, strategy: PairingStrategy) -> Result<PairedExpansion> {
    pair_terms_at(exp, strategy, None)
}

/// Pairs terms; `Optimal` minimises the bound at horizon `t` (`None` = ∞).
pub fn pair_terms_at(exp: &ModalExpansion, strategy: PairingStrategy, t: Option<f64>) -> Result<PairedExpansion> {
    let terms = &exp.terms;
    let mut groups = Vec::new();
    let mut distinct = Vec::new();
    let mut i = 0;
    while i < terms.len() {
        let term = terms[i];
        match term.kind {
            ModalKind::PolyReal => {
                let next = terms.get(i + 1).filter(|n| n.kind == ModalKind::PlainReal && n.lambda == term.lambda);
                let next =
                    next.ok_or_else(|| Error::InvalidParameter("double pole term without its partner".into()))?;
                groups.push(PairGroup::DoubleRealPair {
                    c_i: term.coeff.re,
                    c_ip1: next.coeff.re,
                    lambda: term.lambda.re,
                    terms: [i, i + 1],
                });
                i += 2;
            }
            ModalKind::ComplexHalf => {
                let next = terms.get(i + 1).filter(|n| n.kind == ModalKind::ComplexHalf);
                if next.is_none() {
                    return Err(Error::InvalidParameter("complex term without its conjugate".into()));
                }
                let (lead, idx) = if term.lambda.im > 0.0 { (term, [i, i + 1]) } else { (*next.unwrap(), [i + 1, i]) };
                groups.push(PairGroup::ComplexPair {
                    c: lead.coeff,
                    sigma: lead.lambda.re,
                    omega: lead.lambda.im,
                    terms: idx,
                });
                i += 2;
            }
            ModalKind::PlainReal => {
                distinct.push(i);
                i += 1;
            }
        }
    }

    let matching = match strategy {
        PairingStrategy::Optimal if distinct.len() <= OPTIMAL_PAIRING_MAX_REALS && distinct.len() > 2 => {
            optimal_matching(exp, &distinct, t)
        }
        _ => consecutive_matching(&distinct),
    };
    for (a, b) in matching {
        let ta = terms[a];
        match b {
            Some(b) => {
                let tb = terms[b];
                groups.push(PairGroup::RealPair {
                    c_i: ta.coeff.re,
                    c_j: tb.coeff.re,
                    lambda_i: ta.lambda.re,
                    lambda_j: tb.lambda.re,
                    terms: [a, b],
                });
            }
            None => groups.push(PairGroup::Singleton { c: ta.coeff.re, lambda: ta.lambda.re, term: a }),
        }
    }
    Ok(PairedExpansion { groups, n_terms: terms.len(), output: exp.output, disturbance: exp.disturbance })
}

fn consecutive_matching(items: &[usize]) -> Vec<(usize, Option<usize>)> {
    items.chunks(2).map(|c| (c[0], c.get(1).copied())).collect()
}

fn optimal_matching(exp: &ModalExpansion, items: &[usize], t: Option<f64>) -> Vec<(usize, Option<usize>)> {
    let n = items.len();
    let term = |i: usize| exp.terms[items[i]];
    let mut pair_cost = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let w = RealPairWork::new(term(a).coeff.re, term(b).coeff.re, term(a).lambda.re, term(b).lambda.re);
            let cost = bound_distinct_real_pair(&w, t).unwrap_or(f64::INFINITY);
            pair_cost[a][b] = cost;
            pair_cost[b][a] = cost;
        }
    }
    let single_cost: Vec<f64> =
        (0..n).map(|a| bound_singleton(term(a).coeff.re, term(a).lambda.re, t).unwrap_or(f64::INFINITY)).collect();

    let mut best = (f64::INFINITY, Vec::new());
    let mut current = Vec::new();
    let mut used = vec![false; n];
    search(&pair_cost, &single_cost, n % 2 == 1, &mut used, &mut current, 0.0, &mut best);

    let mut out: Vec<_> = best.1.into_iter().map(|(a, b)| (items[a], b.map(|b| items[b]))).collect();
    // singletons last, matching the default layout
    out.sort_by_key(|(a, b)| (b.is_none(), *a));
    out
}

fn search(
    pair_cost: &[Vec<f64>],
    single_cost: &[f64],
    singleton_left: bool,
    used: &mut [bool],
    current: &mut Vec<(usize, Option<usize>)>,
    acc: f64,
    best: &mut (f64, Vec<(usize, Option<usize>)>),
) {
    let Some(first) = used.iter().position(|u| !u) else {
        if acc < best.0 {
            *best = (acc, current.clone());
        }
        return;
    };
    used[first] = true;
    if singleton_left {
        current.push((first, None));
        search(pair_cost, single_cost, false, used, current, acc + single_cost[first], best);
        current.pop();
    }
    for other in (first + 1)..used.len() {
        if used[other] {
            continue;
        }
        used[other] = true;
        current.push((first, Some(other)));
        search(pair_cost, single_cost, singleton_left, used, current, acc + pair_cost[first][other], best);
        current.pop();
        used[other] = false;
    }
    used[first] = false;
}
