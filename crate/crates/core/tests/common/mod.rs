//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use phonodist::lexicon::PhonemizedLexicon;
use rand::prelude::*;
use rand_distr::{Distribution, Gamma};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `ψ(x)` from the recurrence up to `x + 10` and the asymptotic series there.
pub fn digamma_series(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    for _ in 0..10 {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let y2 = 1.0 / (y * y);
    // Bernoulli terms B_2k / (2k y^2k), k = 1..7.
    let series = y2
        * (1.0 / 12.0
            - y2 * (1.0 / 120.0
                - y2 * (1.0 / 252.0
                    - y2 * (1.0 / 240.0 - y2 * (1.0 / 132.0 - y2 * (691.0 / 32760.0 - y2 / 12.0))))));
    shift + y.ln() - 0.5 / y - series
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Mean of the rank-`r` share (1 = largest) of a uniform draw on the
/// `n`-simplex: `(1/n) Σ_{k=r}^{n} 1/k`.
pub fn whitworth_mean(n: usize, r: usize) -> f64 {
    (r..=n).map(|k| 1.0 / k as f64).sum::<f64>() / n as f64
}

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

pub fn plugin(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    shannon(&p)
}

/// Observed-part sum `Σ (X_i/N) Σ_{k=X_i}^{N-1} 1/k` over `1 ≤ X_i ≤ N-1`.
pub fn cwj_observed_part(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .filter(|&&x| x >= 1 && x < n)
        .map(|&x| (x as f64 / n as f64) * (x..n).map(|k| 1.0 / k as f64).sum::<f64>())
        .sum()
}

/// The coverage-adjusted estimator evaluated term by term as written:
/// `(f1/N)(1-A)^{1-N}(-ln A - Σ_{r=1}^{N-1} (1-A)^r / r)` plus the observed part.
/// Only usable for small `N`, where `(1-A)^{1-N}` does not overflow.
pub fn cwj_literal(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let f1 = counts.iter().filter(|&&c| c == 1).count() as f64;
    let f2 = counts.iter().filter(|&&c| c == 2).count() as f64;
    let mut h = cwj_observed_part(counts);
    if f1 > 1.0 {
        let a = if f2 > 0.0 {
            2.0 * f2 / ((nf - 1.0) * f1 + 2.0 * f2)
        } else {
            2.0 / ((nf - 1.0) * (f1 - 1.0) + 2.0)
        };
        let q = 1.0 - a;
        let partial: f64 = (1..n).map(|r| q.powi(r as i32) / r as f64).sum();
        h += (f1 / nf) * q.powf(1.0 - nf) * (-a.ln() - partial);
    }
    h
}

/// Multinomial sample of `tokens` draws from `p`.
pub fn multinomial(rng: &mut StdRng, p: &[f64], tokens: usize) -> Vec<u64> {
    let dist = rand::distr::weighted::WeightedIndex::new(p).unwrap();
    let mut counts = vec![0u64; p.len()];
    for _ in 0..tokens {
        counts[dist.sample(rng)] += 1;
    }
    counts
}

/// Symmetric Dirichlet draw via normalized Gamma variates.
pub fn dirichlet(rng: &mut StdRng, n: usize, alpha: f64) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    (1..=order)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre over `panels` equal panels of [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|j| {
            let (lo, hi) = (a + j as f64 * h, a + (j + 1) as f64 * h);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            rule.iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
        })
        .sum()
}

/// Random homophone-free lexicon over `alphabet` symbols.
pub fn random_lexicon(rng: &mut StdRng, words: usize, alphabet: usize, max_len: usize) -> PhonemizedLexicon {
    let symbols: Vec<String> = (0..alphabet).map(|i| format!("s{i}")).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut entries = Vec::new();
    while entries.len() < words {
        let len = rng.random_range(1..=max_len);
        let w: Vec<String> = (0..len)
            .map(|_| symbols[rng.random_range(0..alphabet)].clone())
            .collect();
        if seen.insert(w.clone()) {
            entries.push((w, rng.random_range(1..=50u64)));
        }
    }
    PhonemizedLexicon::new(entries, None).unwrap()
}

/// Plug-in entropy of the words whose phoneme sequence starts with `prefix`.
pub fn prefix_entropy(words: &[(Vec<u32>, u64)], prefix: &[u32], ended: bool) -> f64 {
    let counts: Vec<u64> = words
        .iter()
        .filter(|(w, _)| w.starts_with(prefix) && (!ended || w.len() == prefix.len()))
        .map(|&(_, c)| c)
        .collect();
    if counts.is_empty() {
        0.0
    } else {
        plugin(&counts)
    }
}

/// `Σ_w (c_w/W) Σ_steps [H(prefix) - H(prefix + next)]`, word-end included,
/// by scanning the word list at every step.
pub fn telescoped_by_scan(lex: &PhonemizedLexicon) -> f64 {
    let words: Vec<(Vec<u32>, u64)> = lex.words().iter().map(|w| (w.phonemes.clone(), w.count)).collect();
    let total = lex.total_tokens() as f64;
    let mut sum = 0.0;
    for (w, c) in &words {
        for i in 0..w.len() {
            sum += (*c as f64 / total)
                * (prefix_entropy(&words, &w[..i], false) - prefix_entropy(&words, &w[..=i], false));
        }
        sum += (*c as f64 / total)
            * (prefix_entropy(&words, w, false) - prefix_entropy(&words, w, true));
    }
    sum
}

/// Segmental information by scanning every occurrence: the mean over
/// occurrences of `p` of `ln(words continuing the prefix / words continuing
/// with p)`, token weighted.
pub fn segmental_by_scan(lex: &PhonemizedLexicon, p: u32) -> Option<f64> {
    let words: Vec<(&[u32], u64)> = lex.words().iter().map(|w| (w.phonemes.as_slice(), w.count)).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, c) in &words {
        for i in 0..w.len() {
            if w[i] != p {
                continue;
            }
            let prefix = &w[..i];
            let with_prefix: u64 = words.iter().filter(|(v, _)| v.starts_with(prefix)).map(|x| x.1).sum();
            let with_next: u64 = words.iter().filter(|(v, _)| v.starts_with(&w[..=i])).map(|x| x.1).sum();
            num += *c as f64 * (with_prefix as f64 / with_next as f64).ln();
            den += *c as f64;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Feasible points of `{p ≥ 0, Σp = 1, Fᵀp = Fᵀp0}` by hit-and-run from `p0`.
pub fn hit_and_run(rng: &mut StdRng, p0: &[f64], features: &[f64], k: usize, samples: usize) -> Vec<Vec<f64>> {
    use nalgebra::DMatrix;
    let m = p0.len();
    // Constraint matrix rows: ones, then each feature column.
    let a = DMatrix::from_fn(k + 1, m, |r, c| if r == 0 { 1.0 } else { features[c * k + r - 1] });
    let svd = a.clone().svd(true, true);
    let v_t = svd.v_t.unwrap();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10).count();
    // Full V needed: complete the basis of the null space by projecting unit vectors.
    let row_space: Vec<Vec<f64>> = (0..rank).map(|i| v_t.row(i).iter().copied().collect()).collect();
    let project = |mut d: Vec<f64>| {
        for b in &row_space {
            let dot: f64 = d.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in d.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        d
    };
    let mut p = p0.to_vec();
    let mut out = Vec::new();
    while out.len() < samples {
        let d = project((0..m).map(|_| rng.random::<f64>() - 0.5).collect());
        let norm: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (pi, di) in p.iter().zip(&d) {
            if *di > 1e-15 {
                lo = lo.max(-pi / di);
            } else if *di < -1e-15 {
                hi = hi.min(-pi / di);
            }
        }
        let t = lo + (hi - lo) * rng.random::<f64>();
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi = (*pi + t * di).max(0.0);
        }
        out.push(p.clone());
    }
    out
}
