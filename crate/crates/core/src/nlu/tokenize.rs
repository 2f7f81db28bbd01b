use serde::{Deserialize, Serialize};

/// A lowercased whitespace token with char offsets into the original text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

pub type TokenSeq = Vec<Token>;

/// Splits on runs of Unicode whitespace and lowercases each token.
pub fn tokenize(utterance: &str) -> TokenSeq {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let mut pos = 0;
    for c in utterance.chars() {
        if c.is_whitespace() {
            if let Some((start, raw)) = current.take() {
                tokens.push(Token {
                    text: raw.to_lowercase(),
                    start,
                    end: pos,
                });
            }
        } else {
            current.get_or_insert_with(|| (pos, String::new())).1.push(c);
        }
        pos += 1;
    }
    if let Some((start, raw)) = current {
        tokens.push(Token {
            text: raw.to_lowercase(),
            start,
            end: pos,
        });
    }
    tokens
}
