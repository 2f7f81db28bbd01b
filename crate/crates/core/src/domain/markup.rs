//! `[text](entity)` span markup inside training examples.

use super::{EntitySpan, Example};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("char {offset}: {message}")]
pub struct MarkupError {
    /// Char offset into the annotated source string.
    pub offset: usize,
    pub message: String,
}

/// Splits an annotated example into plain text plus entity spans.
pub fn parse_annotated(src: &str) -> Result<Example, MarkupError> {
    let chars: Vec<char> = src.chars().collect();
    let mut text = String::new();
    let mut text_len = 0usize;
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '[' => {
                let open = i;
                let close = chars[i + 1..]
                    .iter()
                    .position(|&c| c == ']')
                    .map(|p| p + i + 1)
                    .ok_or_else(|| MarkupError {
                        offset: open,
                        message: "unclosed `[`".into(),
                    })?;
                let inner: String = chars[open + 1..close].iter().collect();
                if inner.contains('[') {
                    return Err(MarkupError {
                        offset: open,
                        message: "nested `[` in annotation".into(),
                    });
                }
                if inner.trim().is_empty() {
                    return Err(MarkupError {
                        offset: open,
                        message: "empty annotated text".into(),
                    });
                }
                if chars.get(close + 1) != Some(&'(') {
                    return Err(MarkupError {
                        offset: close,
                        message: "expected `(entity)` after `]`".into(),
                    });
                }
                let paren_end = chars[close + 2..]
                    .iter()
                    .position(|&c| c == ')')
                    .map(|p| p + close + 2)
                    .ok_or_else(|| MarkupError {
                        offset: close + 1,
                        message: "unclosed `(`".into(),
                    })?;
                let entity: String = chars[close + 2..paren_end].iter().collect();
                if entity.is_empty() {
                    return Err(MarkupError {
                        offset: close + 1,
                        message: "empty entity name".into(),
                    });
                }
                let start = text_len;
                text.push_str(&inner);
                text_len += inner.chars().count();
                spans.push(EntitySpan {
                    start,
                    end: text_len,
                    entity,
                });
                i = paren_end + 1;
            }
            ']' => {
                return Err(MarkupError {
                    offset: i,
                    message: "unmatched `]`".into(),
                })
            }
            c => {
                text.push(c);
                text_len += 1;
                i += 1;
            }
        }
    }
    Ok(Example { text, spans })
}

/// Inverse of [`parse_annotated`].
pub fn render_annotated(example: &Example) -> String {
    let chars: Vec<char> = example.text.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    for span in &example.spans {
        out.extend(&chars[pos..span.start]);
        out.push('[');
        out.extend(&chars[span.start..span.end]);
        out.push_str("](");
        out.push_str(&span.entity);
        out.push(')');
        pos = span.end;
    }
    out.extend(&chars[pos..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_use_plain_text_offsets() {
        let ex = parse_annotated("navigate to [New York](location) now").unwrap();
        assert_eq!(ex.text, "navigate to New York now");
        assert_eq!(
            ex.spans,
            vec![EntitySpan {
                start: 12,
                end: 20,
                entity: "location".into()
            }]
        );
        assert_eq!(render_annotated(&ex), "navigate to [New York](location) now");
    }

    #[test]
    fn malformed_markup() {
        assert_eq!(parse_annotated("play [Stan").unwrap_err().offset, 5);
        assert!(parse_annotated("play [Stan] now").is_err());
        assert!(parse_annotated("play [Stan](song").is_err());
        assert!(parse_annotated("play Stan]").is_err());
        assert!(parse_annotated("play [](song)").is_err());
    }

    #[test]
    fn plain_text_passes_through() {
        let ex = parse_annotated("what's the weather (today)").unwrap();
        assert_eq!(ex.text, "what's the weather (today)");
        assert!(ex.spans.is_empty());
    }
}
