//! Per-phoneme feature functions extracted from a phonemized lexicon.
//!
//! Three features feed the maximum-entropy model:
//!
//! * physical cost, `-ln p_i(p)` from a cross-linguistic incidence table;
//! * segmental information, the mean surprisal of `p` after the word-initial
//!   prefixes it follows;
//! * lexical diversity given `p`, the entropy of the words containing `p`.
//!
//! Prefix statistics come from [`PrefixTrie`], in which a word-final edge
//! makes every word a leaf. The end marker takes part in the surprisal
//! denominators and in the lexical-gain identity, but gets no features.

use std::collections::BTreeMap;

use crate::entropy::cwj_from_counts;
use crate::error::{Error, Result};
use crate::lexicon::{PhonemizedLexicon, END};
use crate::maxent::MaxEntProblem;

/// Token-weighted relative frequency of every inventory phoneme.
pub fn phoneme_probabilities(lex: &PhonemizedLexicon) -> BTreeMap<String, f64> {
    let counts = lex.phoneme_counts();
    let total: u64 = counts.iter().sum();
    lex.inventory()
        .iter()
        .zip(&counts)
        .map(|(p, &c)| (p.clone(), c as f64 / total as f64))
        .collect()
}

/// Cross-linguistic incidence probabilities `p_i(p) ∈ (0, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IncidenceTable {
    probs: BTreeMap<String, f64>,
}

/// How much of an inventory an incidence table covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub matched: usize,
    pub total: usize,
    pub fraction: f64,
    pub unmatched: Vec<String>,
}

impl IncidenceTable {
    pub fn new(probs: BTreeMap<String, f64>) -> Result<Self> {
        for (p, &v) in &probs {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!(
                    "incidence of {p:?} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(Self { probs })
    }

    /// From `(phoneme, languages_with, languages_total)` rows.
    pub fn from_counts(rows: Vec<(String, u64, u64)>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (p, with, total) in rows {
            if with == 0 || with > total {
                return Err(Error::domain(format!(
                    "incidence of {p:?}: need 0 < languages_with <= languages_total, got {with}/{total}"
                )));
            }
            if probs.insert(p.clone(), with as f64 / total as f64).is_some() {
                return Err(Error::domain(format!("duplicate incidence row for {p:?}")));
            }
        }
        Self::new(probs)
    }

    pub fn get(&self, phoneme: &str) -> Option<f64> {
        self.probs.get(phoneme).copied()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn coverage(&self, phonemes: &[String]) -> Coverage {
        let unmatched: Vec<String> = phonemes
            .iter()
            .filter(|p| !self.probs.contains_key(p.as_str()))
            .cloned()
            .collect();
        let total = phonemes.len();
        let matched = total - unmatched.len();
        Coverage {
            matched,
            total,
            fraction: if total == 0 { 0.0 } else { matched as f64 / total as f64 },
            unmatched,
        }
    }
}

/// `-ln p_i(p)`; `None` when the phoneme is missing and must be excluded.
pub fn physical_cost(phoneme: &str, table: &IncidenceTable) -> Option<f64> {
    table.get(phoneme).map(|p| -p.ln())
}

fn require_id(lex: &PhonemizedLexicon, phoneme: &str) -> Result<u32> {
    lex.phoneme_id(phoneme)
        .ok_or_else(|| Error::domain(format!("phoneme {phoneme:?} is not in the inventory")))
}

/// Segmental information of every phoneme, indexed by id; `None` for
/// phonemes that never occur.
///
/// `I_s(p) = Σ_o [Freq(o+p) / Occ(p)] ln(Freq(o+·) / Freq(o+p))`, where `o`
/// ranges over word-initial prefixes, `Freq(o+·)` counts every continuation
/// of `o` including word end, and `Occ(p) = Σ_o Freq(o+p)`.
pub fn segmental_information_all(lex: &PhonemizedLexicon) -> Vec<Option<f64>> {
    let k = lex.inventory().len();
    let mut weighted = vec![0.0f64; k];
    let mut occ = vec![0u64; k];
    lex.prefix_trie().for_each_edge(|_, sym, parent, child| {
        if sym == END {
            return;
        }
        let (fp, fc) = (parent.freq as f64, child.freq as f64);
        weighted[sym as usize] += fc * (fp / fc).ln();
        occ[sym as usize] += child.freq;
    });
    weighted
        .into_iter()
        .zip(occ)
        .map(|(w, o)| (o > 0).then(|| (w / o as f64).max(0.0)))
        .collect()
}

pub fn segmental_information(lex: &PhonemizedLexicon, phoneme: &str) -> Result<f64> {
    let id = require_id(lex, phoneme)?;
    segmental_information_all(lex)[id as usize]
        .ok_or_else(|| Error::domain(format!("phoneme {phoneme:?} does not occur")))
}

/// Token counts of the word types containing each phoneme at least once.
fn containing_counts(lex: &PhonemizedLexicon) -> Vec<Vec<u64>> {
    let mut by_phoneme = vec![Vec::new(); lex.inventory().len()];
    let mut seen = vec![usize::MAX; lex.inventory().len()];
    for (wi, w) in lex.words().iter().enumerate() {
        for &p in &w.phonemes {
            if seen[p as usize] != wi {
                seen[p as usize] = wi;
                by_phoneme[p as usize].push(w.count);
            }
        }
    }
    by_phoneme
}

/// `H(W|p)` for every phoneme: CWJ entropy of the token counts of word
/// types containing `p`. `None` for phonemes that never occur.
pub fn lexical_conditional_diversity_all(lex: &PhonemizedLexicon) -> Vec<Option<f64>> {
    containing_counts(lex)
        .into_iter()
        .map(|c| (!c.is_empty()).then(|| cwj_from_counts(&c)))
        .collect()
}

pub fn lexical_conditional_diversity(lex: &PhonemizedLexicon, phoneme: &str) -> Result<f64> {
    let id = require_id(lex, phoneme)?;
    lexical_conditional_diversity_all(lex)[id as usize]
        .ok_or_else(|| Error::domain(format!("phoneme {phoneme:?} does not occur")))
}

/// Information about the word gained by one phoneme in one prefix context.
#[derive(Debug, Clone, PartialEq)]
pub struct GainEntry {
    pub phoneme: String,
    pub prefix: Vec<String>,
    /// `p(o, p) = Freq(o+p) / W` with `W` the total word tokens.
    pub joint: f64,
    /// `H(W|o) - H(W|o+p)`, plug-in.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalGain {
    pub entries: Vec<GainEntry>,
    /// Context-weighted mean gain per occurring phoneme.
    pub per_phoneme: BTreeMap<String, f64>,
    /// `Σ_o p(o, end) H(W|o)`: what the word boundary itself disambiguates.
    pub end_contribution: f64,
    /// Plug-in `H(W)`.
    pub word_entropy: f64,
}

impl LexicalGain {
    /// `Σ_{o,s} p(o, s) I(s; o)` over phonemes and the end marker; equals
    /// [`LexicalGain::word_entropy`].
    pub fn telescoped_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.joint * e.gain).sum::<f64>() + self.end_contribution
    }
}

/// Exact lexical information gain of every (phoneme, prefix) pair.
pub fn lexical_information_gain_exact(lex: &PhonemizedLexicon) -> LexicalGain {
    let trie = lex.prefix_trie();
    let w = lex.total_tokens() as f64;
    let mut entries = Vec::new();
    let mut end_contribution = 0.0;
    let k = lex.inventory().len();
    let mut weighted = vec![0.0f64; k];
    let mut occ = vec![0u64; k];
    trie.for_each_edge(|prefix, sym, parent, child| {
        let gain = parent.word_entropy() - child.word_entropy();
        let joint = child.freq as f64 / w;
        if sym == END {
            end_contribution += joint * gain;
            return;
        }
        weighted[sym as usize] += child.freq as f64 * gain;
        occ[sym as usize] += child.freq;
        entries.push(GainEntry {
            phoneme: lex.label(sym).to_string(),
            prefix: prefix.iter().map(|&p| lex.label(p).to_string()).collect(),
            joint,
            gain,
        });
    });
    let per_phoneme = (0..k)
        .filter(|&i| occ[i] > 0)
        .map(|i| (lex.label(i as u32).to_string(), weighted[i] / occ[i] as f64))
        .collect();
    LexicalGain {
        entries,
        per_phoneme,
        end_contribution,
        word_entropy: trie.root().word_entropy(),
    }
}

/// Plug-in quantities of the word–phoneme joint `p(w, p) ∝ c_w · m_{w,p}`,
/// with `m_{w,p}` the occurrences of `p` in `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordPhonemeDecomposition {
    pub word_entropy: f64,
    pub mutual_information: f64,
    pub conditional_entropy: f64,
}

pub fn word_phoneme_decomposition(lex: &PhonemizedLexicon) -> WordPhonemeDecomposition {
    let k = lex.inventory().len();
    // Joint mass entries (word index, phoneme, weight).
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for (wi, word) in lex.words().iter().enumerate() {
        let mut m: BTreeMap<u32, u64> = BTreeMap::new();
        for &p in &word.phonemes {
            *m.entry(p).or_insert(0) += 1;
        }
        for (p, mult) in m {
            cells.push((wi, p as usize, (word.count * mult) as f64));
        }
    }
    let total: f64 = cells.iter().map(|c| c.2).sum();
    let mut pw = vec![0.0; lex.words().len()];
    let mut pp = vec![0.0; k];
    for &(wi, p, v) in &cells {
        pw[wi] += v / total;
        pp[p] += v / total;
    }
    let entropy = |v: &[f64]| -> f64 {
        v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
    };
    let word_entropy = entropy(&pw);
    let mut mutual_information = 0.0;
    let mut conditional_entropy = 0.0;
    for &(wi, p, v) in &cells {
        let j = v / total;
        mutual_information += j * (j / (pw[wi] * pp[p])).ln();
        conditional_entropy -= j * (j / pp[p]).ln();
    }
    WordPhonemeDecomposition {
        word_entropy,
        mutual_information,
        conditional_entropy,
    }
}

/// Names of the three constructed features, in column order.
pub const FEATURE_NAMES: [&str; 3] = ["cost", "seg_info", "lex_div"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionReason {
    /// No row in the incidence table.
    NoIncidence,
    /// Declared in the inventory but absent from the lexicon.
    Unobserved,
}

impl ExclusionReason {
    pub fn name(self) -> &'static str {
        match self {
            ExclusionReason::NoIncidence => "no_incidence",
            ExclusionReason::Unobserved => "unobserved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub phoneme: String,
    pub reason: ExclusionReason,
}

/// Observed probabilities and feature values for one language.
///
/// Rows are phonemes; observed probabilities are renormalized over the
/// included rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    phonemes: Vec<String>,
    observed: Vec<f64>,
    feature_names: Vec<String>,
    // Row-major, phonemes × features.
    values: Vec<f64>,
    pub excluded: Vec<Exclusion>,
    /// Fraction of observed phonemes matched in the incidence table.
    pub coverage: Option<f64>,
}

impl FeatureTable {
    /// `observed` must be non-negative with a positive sum; it is rescaled to
    /// sum to 1. `rows[i]` holds the feature values of `phonemes[i]`.
    pub fn new(
        phonemes: Vec<String>,
        observed: Vec<f64>,
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = phonemes.len();
        let k = feature_names.len();
        if m == 0 {
            return Err(Error::domain("feature table has no phonemes"));
        }
        if observed.len() != m || rows.len() != m {
            return Err(Error::domain("feature table dimensions disagree"));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &phonemes {
            if !seen.insert(p.as_str()) {
                return Err(Error::domain(format!("duplicate phoneme {p:?} in feature table")));
            }
        }
        if observed.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::domain("observed probabilities must be finite and non-negative"));
        }
        let sum: f64 = observed.iter().sum();
        if sum <= 0.0 {
            return Err(Error::domain("observed probabilities sum to zero"));
        }
        let mut values = Vec::with_capacity(m * k);
        for (p, row) in phonemes.iter().zip(&rows) {
            if row.len() != k {
                return Err(Error::domain(format!(
                    "phoneme {p:?} has {} feature values, expected {k}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::domain(format!("phoneme {p:?} has non-finite feature {v}")));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            phonemes,
            observed: observed.iter().map(|p| p / sum).collect(),
            feature_names,
            values,
            excluded: Vec::new(),
            coverage: None,
        })
    }

    pub fn phonemes(&self) -> &[String] {
        &self.phonemes
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.num_features();
        &self.values[i * k..(i + 1) * k]
    }

    /// Column `k` of the feature matrix.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.row(i)[k]).collect()
    }

    /// Maxent problem whose targets are the observed expectations.
    pub fn to_problem(&self) -> Result<MaxEntProblem> {
        self.to_problem_with(&constraint_expectations(self))
    }

    pub fn to_problem_with(&self, targets: &ConstraintVector) -> Result<MaxEntProblem> {
        if targets.values.len() != self.num_features() {
            return Err(Error::domain(format!(
                "{} targets for {} features",
                targets.values.len(),
                self.num_features()
            )));
        }
        MaxEntProblem::new(
            self.phonemes.clone(),
            self.values.clone(),
            self.num_features(),
            targets.values.clone(),
        )
    }
}

/// Expected feature values `c_k = Σ_p p_L(p) f_k(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

pub fn constraint_expectations(table: &FeatureTable) -> ConstraintVector {
    let values = (0..table.num_features())
        .map(|k| {
            table
                .observed()
                .iter()
                .enumerate()
                .map(|(i, p)| p * table.row(i)[k])
                .sum()
        })
        .collect();
    ConstraintVector {
        names: table.feature_names().to_vec(),
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Minimum fraction of observed phonemes that must have an incidence row.
    pub coverage_floor: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            coverage_floor: 0.85,
        }
    }
}

/// Observed probabilities plus cost, segmental information and lexical
/// diversity for every observed phoneme with an incidence row.
///
/// Features are computed on the full lexicon; only the table rows (and the
/// renormalized probabilities) drop excluded phonemes.
pub fn build_feature_table(
    lex: &PhonemizedLexicon,
    incidence: &IncidenceTable,
    opts: &BuildOptions,
) -> Result<FeatureTable> {
    let counts = lex.phoneme_counts();
    let mut excluded = Vec::new();
    let mut observed_ids = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            excluded.push(Exclusion {
                phoneme: lex.label(i as u32).to_string(),
                reason: ExclusionReason::Unobserved,
            });
        } else {
            observed_ids.push(i);
        }
    }
    let observed_labels: Vec<String> = observed_ids
        .iter()
        .map(|&i| lex.label(i as u32).to_string())
        .collect();
    let coverage = incidence.coverage(&observed_labels);
    if coverage.fraction < opts.coverage_floor {
        return Err(Error::domain(format!(
            "incidence coverage {:.4} is below the floor {}; unmatched: {}",
            coverage.fraction,
            opts.coverage_floor,
            coverage.unmatched.join(" ")
        )));
    }

    let seg = segmental_information_all(lex);
    let div = lexical_conditional_diversity_all(lex);
    let mut phonemes = Vec::new();
    let mut observed = Vec::new();
    let mut rows = Vec::new();
    for &i in &observed_ids {
        let label = lex.label(i as u32);
        match physical_cost(label, incidence) {
            Some(cost) => {
                phonemes.push(label.to_string());
                observed.push(counts[i] as f64);
                rows.push(vec![
                    cost,
                    seg[i].expect("observed phoneme"),
                    div[i].expect("observed phoneme"),
                ]);
            }
            None => excluded.push(Exclusion {
                phoneme: label.to_string(),
                reason: ExclusionReason::NoIncidence,
            }),
        }
    }
    let mut table = FeatureTable::new(
        phonemes,
        observed,
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
    )?;
    excluded.sort_by(|a, b| a.phoneme.cmp(&b.phoneme));
    table.excluded = excluded;
    table.coverage = Some(coverage.fraction);
    Ok(table)
}
