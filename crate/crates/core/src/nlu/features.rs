use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::tokenize::Token;

/// Boundary mark padded around each token before taking char n-grams.
pub const BOUNDARY: char = '#';

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKey {
    Word(String),
    Chars(String),
}

/// Closed feature vocabulary. Column `i` of the classifier is `features[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    features: Vec<FeatureKey>,
    char_ngram_range: Option<(usize, usize)>,
    index: HashMap<FeatureKey, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    features: Vec<FeatureKey>,
    char_ngram_range: Option<(usize, usize)>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::new(r.features, r.char_ngram_range)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            features: v.features,
            char_ngram_range: v.char_ngram_range,
        }
    }
}

/// Sparse count vector over a [`Vocabulary`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector {
    pub values: BTreeMap<usize, u32>,
    pub dimension: usize,
}

impl FeatureVector {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// L2-normalized `(index, value)` pairs; empty for the zero vector.
    pub fn normalized(&self) -> Vec<(usize, f64)> {
        let norm = self.values.values().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Vec::new();
        }
        self.values.iter().map(|(&i, &c)| (i, c as f64 / norm)).collect()
    }
}

/// Word form used for the bag-of-words feature: the token with surrounding
/// punctuation removed.
pub fn word_form(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

fn char_grams(word: &str, (lo, hi): (usize, usize), mut emit: impl FnMut(String)) {
    let padded: Vec<char> = std::iter::once(BOUNDARY)
        .chain(word.chars())
        .chain(std::iter::once(BOUNDARY))
        .collect();
    for n in lo..=hi {
        if n > padded.len() {
            break;
        }
        for w in padded.windows(n) {
            emit(w.iter().collect());
        }
    }
}

/// Every feature key an utterance produces, with multiplicity.
pub fn feature_keys(tokens: &[Token], char_ngram_range: Option<(usize, usize)>) -> Vec<FeatureKey> {
    let mut out = Vec::new();
    for t in tokens {
        let word = word_form(&t.text);
        if word.is_empty() {
            continue;
        }
        out.push(FeatureKey::Word(word.to_string()));
        if let Some(range) = char_ngram_range {
            char_grams(word, range, |g| out.push(FeatureKey::Chars(g)));
        }
    }
    out
}

impl Vocabulary {
    pub fn new(features: Vec<FeatureKey>, char_ngram_range: Option<(usize, usize)>) -> Self {
        let index = features.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        Vocabulary {
            features,
            char_ngram_range,
            index,
        }
    }

    /// Builds a sorted vocabulary from training token sequences.
    pub fn build<'a>(corpus: impl IntoIterator<Item = &'a [Token]>, char_ngram_range: Option<(usize, usize)>) -> Self {
        let set: BTreeSet<FeatureKey> = corpus
            .into_iter()
            .flat_map(|tokens| feature_keys(tokens, char_ngram_range))
            .collect();
        Vocabulary::new(set.into_iter().collect(), char_ngram_range)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureKey] {
        &self.features
    }

    pub fn char_ngram_range(&self) -> Option<(usize, usize)> {
        self.char_ngram_range
    }

    pub fn get(&self, key: &FeatureKey) -> Option<usize> {
        self.index.get(key).copied()
    }
}

/// Counts in-vocabulary word and char n-gram features; unknown ones are dropped.
pub fn featurize(tokens: &[Token], vocab: &Vocabulary) -> FeatureVector {
    let mut values = BTreeMap::new();
    for key in feature_keys(tokens, vocab.char_ngram_range) {
        if let Some(i) = vocab.get(&key) {
            *values.entry(i).or_insert(0) += 1;
        }
    }
    FeatureVector {
        values,
        dimension: vocab.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlu::tokenize;

    fn word(s: &str) -> FeatureKey {
        FeatureKey::Word(s.into())
    }

    #[test]
    fn word_counts() {
        let vocab = Vocabulary::new(vec![word("play"), word("music")], None);
        let fv = featurize(&tokenize("play play music"), &vocab);
        assert_eq!(fv.values, BTreeMap::from([(0, 2), (1, 1)]));
        assert_eq!(fv.dimension, 2);
    }

    #[test]
    fn empty_tokens_give_empty_vector() {
        let vocab = Vocabulary::new(vec![word("play")], Some((3, 3)));
        assert!(featurize(&[], &vocab).is_empty());
    }

    #[test]
    fn boundary_padded_char_grams() {
        let keys = feature_keys(&tokenize("Sunlight"), Some((3, 3)));
        let grams: Vec<_> = keys
            .iter()
            .filter_map(|k| match k {
                FeatureKey::Chars(g) => Some(g.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(grams, ["#su", "sun", "unl", "nli", "lig", "igh", "ght", "ht#"]);
        let vocab = Vocabulary::build([tokenize("sunlight").as_slice()], Some((3, 3)));
        let fv = featurize(&tokenize("Sunlight"), &vocab);
        let su = vocab.get(&FeatureKey::Chars("#su".into())).unwrap();
        assert_eq!(fv.values[&su], 1);
    }

    #[test]
    fn unknown_features_dropped_and_punctuation_trimmed() {
        let vocab = Vocabulary::build([tokenize("weather").as_slice()], None);
        let fv = featurize(&tokenize("Weather? xyz"), &vocab);
        assert_eq!(fv.values, BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn normalization_is_unit_length() {
        let fv = FeatureVector {
            values: BTreeMap::from([(0, 3), (4, 4)]),
            dimension: 5,
        };
        assert_eq!(fv.normalized(), vec![(0, 0.6), (4, 0.8)]);
    }
}
