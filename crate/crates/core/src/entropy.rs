//! Shannon entropy estimates from count data.
//!
//! [`plugin_entropy`] is the maximum-likelihood estimate, biased low under
//! undersampling. [`cwj_entropy`] is the Chao–Wang–Jost estimator, which
//! adds an unseen-species term driven by singleton and doubleton counts.

use std::collections::HashSet;

use crate::dirichlet::InventorySize;
use crate::error::{Error, Result};
use crate::special::digamma_unchecked;

/// Labelled non-negative integer counts with at least two positive entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    labels: Vec<String>,
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (label, _) in &entries {
            if !seen.insert(label.as_str()) {
                return Err(Error::domain(format!("duplicate label {label:?}")));
            }
        }
        let (labels, counts): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let positive = counts.iter().filter(|&&c| c > 0).count();
        if positive < 2 {
            return Err(Error::domain(format!(
                "need at least two positive counts, got {positive}"
            )));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::domain("count total overflows u64"))?;
        Ok(Self {
            labels,
            counts,
            total,
        })
    }

    /// Counts labelled `0, 1, 2, ...`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        Self::new(
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (i.to_string(), c))
                .collect(),
        )
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of entries with a positive count.
    pub fn observed_support(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Relative frequencies sorted from most to least frequent.
    pub fn ranked_probabilities(&self) -> Vec<f64> {
        let n = self.total as f64;
        let mut p: Vec<f64> = self.counts.iter().map(|&c| c as f64 / n).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyMethod {
    PlugIn,
    Cwj,
}

impl EntropyMethod {
    pub fn name(self) -> &'static str {
        match self {
            EntropyMethod::PlugIn => "plug_in",
            EntropyMethod::Cwj => "cwj",
        }
    }
}

/// An entropy estimate in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: EntropyMethod,
    /// Observed support (entries with positive count).
    pub support_size: usize,
}

/// Maximum-likelihood entropy `-Σ (c/N) ln(c/N)`.
pub fn plugin_entropy(counts: &CountVector) -> EntropyEstimate {
    EntropyEstimate {
        value: plugin_from_counts(counts.counts()),
        method: EntropyMethod::PlugIn,
        support_size: counts.observed_support(),
    }
}

/// Chao–Wang–Jost bias-corrected entropy.
pub fn cwj_entropy(counts: &CountVector) -> EntropyEstimate {
    EntropyEstimate {
        value: cwj_from_counts(counts.counts()),
        method: EntropyMethod::Cwj,
        support_size: counts.observed_support(),
    }
}

/// Plug-in entropy of raw counts; zero counts are ignored and an empty or
/// single-category vector has entropy 0.
pub fn plugin_from_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let sum_c_ln_c: f64 = counts
        .iter()
        .filter(|&&c| c > 1)
        .map(|&c| {
            let c = c as f64;
            c * c.ln()
        })
        .sum();
    (n.ln() - sum_c_ln_c / n).max(0.0)
}

/// Chao–Wang–Jost entropy of raw counts.
///
/// With sample size `N`, `f1` singletons and `f2` doubletons:
///
/// ```text
/// H = Σ_{1≤X_i≤N-1} (X_i/N) Σ_{k=X_i}^{N-1} 1/k
///   + (f1/N) (1-A)^(1-N) [ -ln A - Σ_{r=1}^{N-1} (1-A)^r / r ]
/// ```
///
/// where `A = 2 f2 / ((N-1) f1 + 2 f2)` if `f2 > 0`, `A = 2 / ((N-1)(f1-1) + 2)`
/// if `f2 = 0, f1 > 1`; the second term vanishes when `f1 ≤ 1`.
pub fn cwj_from_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total < 2 {
        return 0.0;
    }
    let n = total as f64;
    let psi_n = digamma_unchecked(n);
    let mut observed = 0.0;
    let (mut f1, mut f2) = (0u64, 0u64);
    for &c in counts {
        match c {
            1 => f1 += 1,
            2 => f2 += 1,
            _ => {}
        }
        if c >= 1 && c < total {
            // Σ_{k=c}^{N-1} 1/k = ψ(N) - ψ(c).
            let x = c as f64;
            observed += x / n * (psi_n - digamma_unchecked(x));
        }
    }
    observed + unseen_term(total, f1, f2)
}

// The bracketed term equals Σ_{r≥N} (1-A)^r / r, so the whole correction is
// (f1/N) Σ_{j≥1} (1-A)^j / (N-1+j), with no cancellation. That tail needs
// about 37/A terms; when N·A < 1 the direct O(N) form is used instead, whose
// cancellation is then mild.
fn unseen_term(total: u64, f1: u64, f2: u64) -> f64 {
    if f1 <= 1 {
        return 0.0;
    }
    let n = total as f64;
    let nm1 = n - 1.0;
    let (f1f, f2f) = (f1 as f64, f2 as f64);
    // A and 1 - A from one shared denominator to keep 1 - A exact near 1.
    let (a, one_minus_a) = if f2 > 0 {
        let d = nm1 * f1f + 2.0 * f2f;
        (2.0 * f2f / d, nm1 * f1f / d)
    } else {
        let d = nm1 * (f1f - 1.0) + 2.0;
        (2.0 / d, nm1 * (f1f - 1.0) / d)
    };
    if one_minus_a == 0.0 {
        return 0.0;
    }
    let sum = if n * a >= 1.0 {
        let mut sum = 0.0;
        let mut power = 1.0;
        let mut j = 1.0;
        loop {
            power *= one_minus_a;
            let term = power / (nm1 + j);
            sum += term;
            if term <= 1e-17 * sum || power == 0.0 {
                break;
            }
            j += 1.0;
        }
        sum
    } else {
        let mut partial = 0.0;
        let mut power = 1.0;
        for r in 1..total {
            power *= one_minus_a;
            partial += power / r as f64;
        }
        let bracket = (-a.ln() - partial).max(0.0);
        (-nm1 * one_minus_a.ln()).exp() * bracket
    };
    f1f / n * sum
}

/// An entropy divided by `ln n`, clamped into `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeEntropy {
    pub value: f64,
    /// Whether the raw ratio fell outside `(0, 1]`.
    pub clamped: bool,
}

pub fn relative_entropy(estimate: &EntropyEstimate, n: InventorySize) -> RelativeEntropy {
    relative_entropy_value(estimate.value, n)
}

pub fn relative_entropy_value(value: f64, n: InventorySize) -> RelativeEntropy {
    let raw = value / n.max_entropy();
    if raw > 1.0 {
        RelativeEntropy {
            value: 1.0,
            clamped: true,
        }
    } else if raw.is_nan() || raw <= 0.0 {
        RelativeEntropy {
            value: f64::MIN_POSITIVE,
            clamped: true,
        }
    } else {
        RelativeEntropy {
            value: raw,
            clamped: false,
        }
    }
}
