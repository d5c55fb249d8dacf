//! Phonemized lexicons and their word-initial prefix tree.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Word-final marker used as a trie edge; never a phoneme.
pub const END: u32 = u32::MAX;

/// One merged word type: phoneme ids into the inventory and its token count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub phonemes: Vec<u32>,
    pub count: u64,
}

/// A token-weighted word list over a fixed phoneme inventory.
///
/// Homophones (identical phoneme sequences) are merged with counts summed,
/// so every word is a distinct leaf of the prefix tree. Words are kept in
/// lexicographic order of their phoneme ids.
#[derive(Debug, Clone)]
pub struct PhonemizedLexicon {
    inventory: Vec<String>,
    index: HashMap<String, u32>,
    words: Vec<Word>,
    tokens: u64,
}

impl PhonemizedLexicon {
    /// Build from `(phoneme labels, token count)` entries.
    ///
    /// With `inventory = None` the inventory is every phoneme that occurs.
    /// A declared inventory must contain every phoneme used.
    pub fn new(entries: Vec<(Vec<String>, u64)>, inventory: Option<Vec<String>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("lexicon has no entries"));
        }
        let set: BTreeSet<String> = match inventory {
            Some(inv) => inv.into_iter().collect(),
            None => entries.iter().flat_map(|(w, _)| w.iter().cloned()).collect(),
        };
        if set.len() >= END as usize {
            return Err(Error::domain("inventory too large"));
        }
        let inventory: Vec<String> = set.into_iter().collect();
        let index: HashMap<String, u32> = inventory
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();

        let mut merged: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (i, (word, count)) in entries.into_iter().enumerate() {
            if word.is_empty() {
                return Err(Error::domain(format!("entry {} is an empty word", i + 1)));
            }
            if count == 0 {
                return Err(Error::domain(format!("entry {} has zero token count", i + 1)));
            }
            let ids = word
                .iter()
                .map(|p| {
                    index.get(p).copied().ok_or_else(|| {
                        Error::domain(format!(
                            "entry {}: phoneme {p:?} is not in the declared inventory",
                            i + 1
                        ))
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            let slot = merged.entry(ids).or_insert(0);
            *slot = slot
                .checked_add(count)
                .ok_or_else(|| Error::domain("token count overflows u64"))?;
        }
        let words: Vec<Word> = merged
            .into_iter()
            .map(|(phonemes, count)| Word { phonemes, count })
            .collect();
        let tokens = words
            .iter()
            .try_fold(0u64, |acc, w| acc.checked_add(w.count))
            .ok_or_else(|| Error::domain("token count overflows u64"))?;
        Ok(Self {
            inventory,
            index,
            words,
            tokens,
        })
    }

    /// Sorted phoneme labels; position is the phoneme id.
    pub fn inventory(&self) -> &[String] {
        &self.inventory
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Total word tokens.
    pub fn total_tokens(&self) -> u64 {
        self.tokens
    }

    pub fn phoneme_id(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> &str {
        &self.inventory[id as usize]
    }

    /// Token-weighted occurrence count of every phoneme, by id.
    pub fn phoneme_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.inventory.len()];
        for w in &self.words {
            for &p in &w.phonemes {
                counts[p as usize] += w.count;
            }
        }
        counts
    }

    pub fn prefix_trie(&self) -> PrefixTrie {
        PrefixTrie::build(self)
    }
}

#[derive(Debug, Clone)]
pub struct TrieNode {
    /// Tokens of words having this node's prefix.
    pub freq: u64,
    /// `Σ c ln c` over those word types; gives the plug-in entropy of the
    /// words consistent with the prefix.
    pub sum_c_ln_c: f64,
    /// Children keyed by phoneme id, [`END`] last.
    pub children: BTreeMap<u32, usize>,
}

impl TrieNode {
    /// Plug-in entropy of the word distribution restricted to this prefix.
    pub fn word_entropy(&self) -> f64 {
        if self.freq == 0 {
            return 0.0;
        }
        let f = self.freq as f64;
        (f.ln() - self.sum_c_ln_c / f).max(0.0)
    }
}

/// Prefix tree of a lexicon with an explicit word-final edge, so that every
/// word type ends at its own leaf. Node 0 is the empty prefix.
#[derive(Debug, Clone)]
pub struct PrefixTrie {
    nodes: Vec<TrieNode>,
}

impl PrefixTrie {
    fn build(lex: &PhonemizedLexicon) -> Self {
        let mut nodes = vec![TrieNode {
            freq: 0,
            sum_c_ln_c: 0.0,
            children: BTreeMap::new(),
        }];
        for w in lex.words() {
            let c = w.count as f64;
            let c_ln_c = c * c.ln();
            let mut at = 0usize;
            nodes[0].freq += w.count;
            nodes[0].sum_c_ln_c += c_ln_c;
            for &sym in w.phonemes.iter().chain(std::iter::once(&END)) {
                let next = match nodes[at].children.get(&sym) {
                    Some(&i) => i,
                    None => {
                        nodes.push(TrieNode {
                            freq: 0,
                            sum_c_ln_c: 0.0,
                            children: BTreeMap::new(),
                        });
                        let i = nodes.len() - 1;
                        nodes[at].children.insert(sym, i);
                        i
                    }
                };
                nodes[next].freq += w.count;
                nodes[next].sum_c_ln_c += c_ln_c;
                at = next;
            }
        }
        Self { nodes }
    }

    pub fn root(&self) -> &TrieNode {
        &self.nodes[0]
    }

    pub fn node(&self, i: usize) -> &TrieNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Visit every edge `(prefix, symbol, parent, child)` in depth-first,
    /// symbol-sorted order. `prefix` holds the phoneme ids leading to `parent`.
    pub fn for_each_edge<F>(&self, mut f: F)
    where
        F: FnMut(&[u32], u32, &TrieNode, &TrieNode),
    {
        let mut prefix = Vec::new();
        self.walk(0, &mut prefix, &mut f);
    }

    fn walk<F>(&self, at: usize, prefix: &mut Vec<u32>, f: &mut F)
    where
        F: FnMut(&[u32], u32, &TrieNode, &TrieNode),
    {
        let parent = &self.nodes[at];
        for (&sym, &child) in &parent.children {
            f(prefix, sym, parent, &self.nodes[child]);
            if sym != END {
                prefix.push(sym);
                self.walk(child, prefix, f);
                prefix.pop();
            }
        }
    }
}
