use std::collections::{BTreeSet, HashMap};

use super::{ModelError, TokenId, Vocabulary};

/// Whitespace word tokenizer with a corpus-built id table.
///
/// Words get ids in lexicographic order; the end-of-text token takes the last
/// id. Decoding joins words with single spaces, so `decode(encode(s))`
/// reproduces `s` up to whitespace normalization.
#[derive(Debug, Clone)]
pub struct WordTokenizer {
    words: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl WordTokenizer {
    pub const EOT: &'static str = "<eot>";

    pub fn from_corpus<'a, I>(lines: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let set: BTreeSet<&str> = lines
            .into_iter()
            .flat_map(str::split_whitespace)
            .filter(|w| *w != Self::EOT)
            .collect();
        if set.is_empty() {
            return Err(ModelError::Vocabulary("corpus has no words".into()));
        }
        let words: Vec<String> = set.into_iter().map(str::to_owned).collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as TokenId))
            .collect();
        Ok(Self { words, index })
    }

    pub fn vocab(&self) -> Vocabulary {
        Vocabulary::new(self.words.len() + 1, self.eot()).expect("at least one word plus eot")
    }

    pub fn eot(&self) -> TokenId {
        self.words.len() as TokenId
    }

    /// Word ids of `text`, without a trailing eot.
    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>, ModelError> {
        text.split_whitespace()
            .map(|w| {
                self.index
                    .get(w)
                    .copied()
                    .ok_or_else(|| ModelError::UnknownWord(w.to_owned()))
            })
            .collect()
    }

    /// Space-joined words; eot is dropped, out-of-range ids render as `<?>`.
    pub fn decode(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .filter(|&&t| t != self.eot())
            .map(|&t| self.words.get(t as usize).map_or("<?>", String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}
