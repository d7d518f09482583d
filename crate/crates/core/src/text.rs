//! Tokenization, word and skill vocabularies, and embedding-matrix assembly.

use alloc::{
    collections::{BTreeMap, BTreeSet},
    string::{String, ToString},
    vec,
    vec::Vec,
};

use crate::{
    error::{Result, SesaError},
    linalg::DenseMatrix,
    rng::SeededRng,
};

pub const UNK: u32 = 0;
pub const UNK_TOKEN: &str = "<unk>";
pub const DEFAULT_MAX_LEN: usize = 256;
/// Half-width of the uniform range for embedding rows not covered by a file.
pub const EMBEDDING_INIT_BOUND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub source_len: usize,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_token_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '+' || c == '#'
}

/// Lowercases and splits on every character outside `[a-z0-9+#]`.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        let c = c.to_ascii_lowercase();
        if is_token_char(c) {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenSeq {
        tokens,
        source_len: text.chars().count(),
    }
}

/// Canonical form used for skill lookups: trimmed and lowercased.
pub fn normalize_skill(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Sorts `(key, count)` by descending count, then key.
fn frequency_order(counts: BTreeMap<String, usize>, min_count: usize) -> Vec<(String, usize)> {
    let mut kept: Vec<(String, usize)> = counts.into_iter().filter(|(_, n)| *n >= min_count).collect();
    // BTreeMap iteration is already lexicographic, so a stable sort keeps the tie order
    kept.sort_by(|a, b| b.1.cmp(&a.1));
    kept
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordVocab {
    id_of: BTreeMap<String, u32>,
    token_of: Vec<String>,
}

impl WordVocab {
    /// Index 0 is always UNK; remaining tokens with count ≥ `min_count`
    /// follow in descending frequency, ties lexicographic.
    pub fn build(corpus: &[TokenSeq], min_count: usize) -> Result<Self> {
        if min_count == 0 {
            return Err(SesaError::Precondition("min_count must be at least 1".into()));
        }
        let mut counts = BTreeMap::new();
        for seq in corpus {
            for t in &seq.tokens {
                *counts.entry(t.clone()).or_insert(0usize) += 1;
            }
        }
        let tokens = frequency_order(counts, min_count).into_iter().map(|(t, _)| t);
        Ok(Self::from_tokens(tokens))
    }

    /// Rebuilds a vocabulary from its non-UNK tokens in index order.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut token_of = vec![UNK_TOKEN.to_string()];
        token_of.extend(tokens);
        let id_of = token_of
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { id_of, token_of }
    }

    pub fn len(&self) -> usize {
        self.token_of.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> u32 {
        self.id_of.get(token).copied().unwrap_or(UNK)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.id_of.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.token_of.get(id as usize).map(String::as_str)
    }

    /// Tokens in index order, UNK excluded.
    pub fn tokens(&self) -> &[String] {
        &self.token_of[1..]
    }

    /// OOV tokens map to UNK, output is truncated to `max_len`, and an empty
    /// sequence becomes `[UNK]`.
    pub fn encode(&self, seq: &TokenSeq, max_len: usize) -> Vec<u32> {
        let max_len = max_len.max(1);
        let mut ids: Vec<u32> = seq.tokens.iter().take(max_len).map(|t| self.id(t)).collect();
        if ids.is_empty() {
            ids.push(UNK);
        }
        ids
    }
}

pub fn build_word_vocab(corpus: &[TokenSeq], min_count: usize) -> Result<WordVocab> {
    WordVocab::build(corpus, min_count)
}

pub fn encode_tokens(vocab: &WordVocab, seq: &TokenSeq, max_len: usize) -> Vec<u32> {
    vocab.encode(seq, max_len)
}

/// The explicit dimensions: one per retained skill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillVocab {
    id_of: BTreeMap<String, usize>,
    names: Vec<String>,
    counts: Vec<usize>,
}

impl SkillVocab {
    /// Counts each skill once per profile (after normalization) and keeps
    /// those seen at least `min_count` times.
    pub fn build<S: AsRef<str>>(profiles: &[Vec<S>], min_count: usize) -> Result<Self> {
        if min_count == 0 {
            return Err(SesaError::Precondition("min_count must be at least 1".into()));
        }
        let mut counts = BTreeMap::new();
        for profile in profiles {
            let unique: BTreeSet<String> = profile
                .iter()
                .map(|s| normalize_skill(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect();
            for s in unique {
                *counts.entry(s).or_insert(0usize) += 1;
            }
        }
        let kept = frequency_order(counts, min_count);
        if kept.is_empty() {
            return Err(SesaError::EmptyVocabulary { min_count });
        }
        Self::from_entries(kept)
    }

    /// Rebuilds from `(name, count)` pairs in dimension order.
    pub fn from_entries(entries: Vec<(String, usize)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(SesaError::EmptyVocabulary { min_count: 0 });
        }
        let mut id_of = BTreeMap::new();
        let mut names = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (name, count)) in entries.into_iter().enumerate() {
            let key = normalize_skill(&name);
            if id_of.insert(key.clone(), i).is_some() {
                return Err(SesaError::Precondition(alloc::format!("duplicate skill {key:?}")));
            }
            names.push(key);
            counts.push(count);
        }
        Ok(Self { id_of, names, counts })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.id_of.get(&normalize_skill(name)).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn count(&self, id: usize) -> Option<usize> {
        self.counts.get(id).copied()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

pub fn build_skill_vocab<S: AsRef<str>>(profiles: &[Vec<S>], min_count: usize) -> Result<SkillVocab> {
    SkillVocab::build(profiles, min_count)
}

/// Word-embedding table, one row per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix(pub DenseMatrix);

impl EmbeddingMatrix {
    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }
}

/// Copies rows for vocabulary words found in `pretrained` and draws the rest
/// (UNK included) uniformly in ±[`EMBEDDING_INIT_BOUND`], in index order.
/// Returns the matrix together with the number of covered rows.
pub fn assemble_embeddings(
    vocab: &WordVocab,
    d_emb: usize,
    pretrained: &BTreeMap<String, Vec<f64>>,
    rng: &mut SeededRng,
) -> Result<(EmbeddingMatrix, usize)> {
    if d_emb == 0 {
        return Err(SesaError::Precondition("embedding dimension must be positive".into()));
    }
    let mut m = DenseMatrix::zeros(vocab.len(), d_emb);
    let mut coverage = 0;
    for id in 0..vocab.len() {
        let found = if id == UNK as usize {
            None
        } else {
            pretrained.get(&vocab.token_of[id])
        };
        match found {
            Some(v) => {
                if v.len() != d_emb {
                    return Err(SesaError::Dimension {
                        expected: d_emb,
                        actual: v.len(),
                    });
                }
                crate::linalg::check_finite(v)?;
                m.row_mut(id).copy_from_slice(v);
                coverage += 1;
            }
            None => rng.fill_uniform(m.row_mut(id), EMBEDDING_INIT_BOUND),
        }
    }
    Ok((EmbeddingMatrix(m), coverage))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> TokenSeq {
        TokenSeq {
            tokens: words.iter().map(|s| s.to_string()).collect(),
            source_len: 0,
        }
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Software Engineer, Internship!").tokens,
            ["software", "engineer", "internship"]
        );
        assert_eq!(tokenize("C++ and C# devs").tokens, ["c++", "and", "c#", "devs"]);
        let empty = tokenize("");
        assert!(empty.is_empty());
        assert_eq!(empty.source_len, 0);
        assert_eq!(tokenize("naïve café").tokens, ["na", "ve", "caf"]);
    }

    #[test]
    fn skill_vocab_threshold() {
        let profiles = vec![vec!["a", "b"], vec!["a"], vec![" A "]];
        let v = SkillVocab::build(&profiles, 2).unwrap();
        assert_eq!(v.names(), ["a"]);
        assert_eq!(v.count(0), Some(3));
        assert!(matches!(
            SkillVocab::build(&profiles, 5),
            Err(SesaError::EmptyVocabulary { min_count: 5 })
        ));
    }

    #[test]
    fn skill_vocab_tie_break_and_case() {
        let profiles = vec![vec!["Zeta", "beta"], vec!["alpha", "zeta"], vec!["beta"]];
        let v = SkillVocab::build(&profiles, 1).unwrap();
        assert_eq!(v.names(), ["beta", "zeta", "alpha"]);
        assert_eq!(v.id("ZETA  "), Some(1));
    }

    #[test]
    fn word_vocab_threshold_and_empty() {
        let v = WordVocab::build(&[tokenize("a a b")], 2).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.id("a"), 1);
        assert_eq!(v.id("b"), UNK);
        let empty = WordVocab::build(&[], 3).unwrap();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty.token(0), Some(UNK_TOKEN));
    }

    #[test]
    fn encode_rules() {
        let v = WordVocab::from_tokens(["a".to_string()]);
        assert_eq!(v.encode(&toks(&["a", "z", "a"]), 10), [1, 0, 1]);
        assert_eq!(v.encode(&toks(&[]), 10), [0]);
        let long: Vec<&str> = (0..500).map(|i| if i % 3 == 0 { "a" } else { "q" }).collect();
        let ids = v.encode(&toks(&long), 256);
        assert_eq!(ids.len(), 256);
        let full = v.encode(&toks(&long), 1000);
        assert_eq!(ids[..], full[..256]);
    }

    #[test]
    fn embeddings_full_and_empty_coverage() {
        let v = WordVocab::from_tokens(["a".to_string(), "b".to_string()]);
        let mut table = BTreeMap::new();
        table.insert("a".to_string(), vec![1.0, 2.0]);
        table.insert("b".to_string(), vec![3.0, 4.0]);
        let (m, cov) = assemble_embeddings(&v, 2, &table, &mut SeededRng::new(1)).unwrap();
        assert_eq!(cov, v.len() - 1);
        assert_eq!(m.0.row(2), &[3.0, 4.0]);
        assert!(m.0.row(0).iter().all(|x| x.abs() <= EMBEDDING_INIT_BOUND));

        let (m, cov) = assemble_embeddings(&v, 2, &BTreeMap::new(), &mut SeededRng::new(1)).unwrap();
        assert_eq!(cov, 0);
        assert!(m.0.as_slice().iter().all(|x| x.abs() <= EMBEDDING_INIT_BOUND));

        table.insert("a".to_string(), vec![1.0]);
        assert!(assemble_embeddings(&v, 2, &table, &mut SeededRng::new(1)).is_err());
    }
}
