#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wcbound::oracle::integrate;
use wcbound::ClosedLoopSystem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    Real(f64),
    Double(f64),
    Complex(f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Mix {
    pub double: bool,
    pub complex: bool,
}

pub const ANY: Mix = Mix { double: true, complex: true };
pub const SIMPLE: Mix = Mix { double: false, complex: true };

fn far_from(used: &[f64], x: f64, gap: f64) -> bool {
    used.iter().all(|u| (u - x).abs() >= gap)
}

/// Spectrum of `n` eigenvalues in real Jordan blocks with well separated
/// distinct values.
pub fn random_blocks(rng: &mut ChaCha8Rng, n: usize, mix: Mix) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut reals = Vec::new();
    let mut sigmas = Vec::new();
    let mut filled = 0;
    while filled < n {
        let left = n - filled;
        let pick = rng.random_range(0..3);
        if left >= 2 && pick == 1 && mix.complex {
            let sigma = -rng.random_range(0.2..2.5);
            if !far_from(&sigmas, sigma, 0.15) {
                continue;
            }
            sigmas.push(sigma);
            blocks.push(Block::Complex(sigma, rng.random_range(0.5..4.0)));
            filled += 2;
        } else if left >= 2 && pick == 2 && mix.double {
            let l = -rng.random_range(0.3..3.0);
            if !far_from(&reals, l, 0.2) {
                continue;
            }
            reals.push(l);
            blocks.push(Block::Double(l));
            filled += 2;
        } else {
            let l = -rng.random_range(0.2..5.0);
            if !far_from(&reals, l, 0.2) {
                continue;
            }
            reals.push(l);
            blocks.push(Block::Real(l));
            filled += 1;
        }
    }
    blocks
}

pub fn jordan(blocks: &[Block]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| if matches!(b, Block::Real(_)) { 1 } else { 2 }).sum();
    let mut j = DMatrix::zeros(n, n);
    let mut i = 0;
    for b in blocks {
        match *b {
            Block::Real(l) => {
                j[(i, i)] = l;
                i += 1;
            }
            Block::Double(l) => {
                j[(i, i)] = l;
                j[(i + 1, i + 1)] = l;
                j[(i, i + 1)] = 1.0;
                i += 2;
            }
            Block::Complex(s, w) => {
                j[(i, i)] = s;
                j[(i + 1, i + 1)] = s;
                j[(i, i + 1)] = w;
                j[(i + 1, i)] = -w;
                i += 2;
            }
        }
    }
    j
}

pub fn eigenvalues_of(blocks: &[Block]) -> Vec<Complex<f64>> {
    blocks
        .iter()
        .flat_map(|b| match *b {
            Block::Real(l) => vec![Complex::new(l, 0.0)],
            Block::Double(l) => vec![Complex::new(l, 0.0); 2],
            Block::Complex(s, w) => vec![Complex::new(s, w), Complex::new(s, -w)],
        })
        .collect()
}

/// Random similarity transform with condition number at most `max_cond`.
pub fn random_similarity(rng: &mut ChaCha8Rng, n: usize, max_cond: f64) -> DMatrix<f64> {
    loop {
        let p = DMatrix::from_fn(n, n, |i, j| rng.random_range(-1.0..1.0) + if i == j { 1.5 } else { 0.0 });
        let sv = p.clone().singular_values();
        if sv.min() > 0.0 && sv.max() / sv.min() <= max_cond {
            return p;
        }
    }
}

pub struct RandomSystem {
    pub sys: ClosedLoopSystem,
    pub blocks: Vec<Block>,
}

/// `A = P J P⁻¹` with a random `E` of `n_z` columns.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize, n_z: usize, mix: Mix) -> RandomSystem {
    let blocks = random_blocks(rng, n, mix);
    let p = random_similarity(rng, n, 8.0);
    let a = &p * jordan(&blocks) * p.clone().try_inverse().unwrap();
    let e = DMatrix::from_fn(n, n_z, |_, _| rng.random_range(-1.0..1.0));
    RandomSystem { sys: ClosedLoopSystem::new(a, e).unwrap(), blocks }
}

/// Sign changes of `f` on `(0, end)` found by sampling every `step` and bisecting to `tol`.
pub fn sign_changes<F: Fn(f64) -> f64>(f: F, end: f64, step: f64, tol: f64) -> Vec<f64> {
    let n = (end / step).ceil() as usize;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let t = (i as f64 * step).min(end);
        let v = f(t);
        if v == 0.0 {
            continue;
        }
        if let Some((pt, pv)) = prev {
            if pv.signum() != v.signum() {
                let (mut lo, mut hi) = (pt, t);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if f(mid).signum() == pv.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
        }
        prev = Some((t, v));
    }
    out
}

/// `∫₀^end |f|` by adaptive Gauss–Kronrod on each sign-constant piece.
pub fn abs_integral<F: Fn(f64) -> f64>(f: F, zeros: &[f64], end: f64, rel_tol: f64) -> f64 {
    let mut cuts = vec![0.0];
    cuts.extend(zeros.iter().copied().filter(|z| *z > 0.0 && *z < end));
    cuts.push(end);
    cuts.windows(2).map(|w| integrate(|x| f(x).abs(), w[0], w[1], 1e-300, rel_tol, 10_000).unwrap().value).sum()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
