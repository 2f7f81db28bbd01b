//! A small YAML subset reader that keeps source positions on every node.
//!
//! Supported: block mappings, block sequences (including `- key: value`
//! items), one-line flow sequences and mappings, plain / single-quoted /
//! double-quoted scalars, `#` comments and a leading `---` marker.
//! Anchors, tags, block scalars and multi-document streams are rejected.

use std::fmt;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarStyle {
    Plain,
    Quoted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Null,
    Scalar(String, ScalarStyle),
    Seq(Vec<Node>),
    Map(Vec<(Key, Node)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Key {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub pos: Pos,
}

impl Node {
    pub fn describe(&self) -> &'static str {
        match self.kind {
            NodeKind::Null => "null",
            NodeKind::Scalar(..) => "scalar",
            NodeKind::Seq(_) => "sequence",
            NodeKind::Map(_) => "mapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct YamlError {
    pub pos: Pos,
    pub message: String,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, YamlError> {
    Err(YamlError {
        pos: Pos { line, column },
        message: message.into(),
    })
}

#[derive(Debug, Clone)]
struct Line {
    no: usize,
    indent: usize,
    text: String,
}

impl Line {
    fn col(&self, char_offset: usize) -> usize {
        self.indent + char_offset + 1
    }
}

/// Parses one document. An empty (or comment-only) document yields `Null`.
pub fn parse(src: &str) -> Result<Node, YamlError> {
    let lines = split_lines(src)?;
    if lines.is_empty() {
        return Ok(Node {
            kind: NodeKind::Null,
            pos: Pos { line: 1, column: 1 },
        });
    }
    let mut parser = Parser { lines, cur: 0 };
    let first_indent = parser.lines[0].indent;
    if first_indent != 0 {
        let l = &parser.lines[0];
        return err(l.no, 1, "document root must not be indented");
    }
    let node = parser.block(0)?;
    if let Some(l) = parser.lines.get(parser.cur) {
        return err(l.no, l.indent + 1, "unexpected content after document root");
    }
    Ok(node)
}

fn split_lines(src: &str) -> Result<Vec<Line>, YamlError> {
    let mut out = Vec::new();
    let mut seen_content = false;
    for (i, raw) in src.split('\n').enumerate() {
        let no = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = raw.trim_start_matches(' ');
        let indent = raw.len() - trimmed.len();
        if trimmed.starts_with('\t') {
            return err(no, indent + 1, "tabs are not allowed for indentation");
        }
        let body = trimmed.trim_end();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if body == "---" && indent == 0 {
            if seen_content {
                return err(no, 1, "multiple documents are not supported");
            }
            continue;
        }
        if body == "..." && indent == 0 {
            return err(no, 1, "document end markers are not supported");
        }
        seen_content = true;
        out.push(Line {
            no,
            indent,
            text: body.to_string(),
        });
    }
    Ok(out)
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ")
}

struct Parser {
    lines: Vec<Line>,
    cur: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Line> {
        self.lines.get(self.cur)
    }

    fn block(&mut self, indent: usize) -> Result<Node, YamlError> {
        let line = self.peek().expect("block called at end of input").clone();
        if is_seq_item(&line.text) {
            self.seq(indent)
        } else if split_key(&line.text, &line)?.is_some() {
            self.map(indent)
        } else {
            // A lone scalar (or flow collection) as a block.
            self.cur += 1;
            let (node, rest) = scalar_or_flow(&line.text, 0, &line, false)?;
            trailing(&line, rest)?;
            Ok(node)
        }
    }

    fn seq(&mut self, indent: usize) -> Result<Node, YamlError> {
        let start = self.peek().map(|l| Pos { line: l.no, column: l.indent + 1 }).unwrap();
        let mut items = Vec::new();
        while let Some(line) = self.peek().cloned() {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return err(line.no, line.indent + 1, "unexpected indentation");
            }
            if !is_seq_item(&line.text) {
                break;
            }
            let after_dash = &line.text[1..];
            let content = after_dash.trim_start();
            if content.is_empty() {
                self.cur += 1;
                match self.peek() {
                    Some(next) if next.indent > indent => {
                        let child = next.indent;
                        items.push(self.block(child)?);
                    }
                    _ => items.push(Node {
                        kind: NodeKind::Null,
                        pos: Pos { line: line.no, column: line.col(1) },
                    }),
                }
                continue;
            }
            let offset = line.text.len() - content.len();
            let item_indent = line.indent + offset;
            // Re-seat the item content as if it were its own line so nested
            // keys line up with it.
            self.lines[self.cur] = Line {
                no: line.no,
                indent: item_indent,
                text: content.to_string(),
            };
            items.push(self.block(item_indent)?);
        }
        Ok(Node {
            kind: NodeKind::Seq(items),
            pos: start,
        })
    }

    fn map(&mut self, indent: usize) -> Result<Node, YamlError> {
        let start = self.peek().map(|l| Pos { line: l.no, column: l.indent + 1 }).unwrap();
        let mut entries: Vec<(Key, Node)> = Vec::new();
        while let Some(line) = self.peek().cloned() {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return err(line.no, line.indent + 1, "unexpected indentation");
            }
            if is_seq_item(&line.text) {
                return err(line.no, line.indent + 1, "sequence item where a mapping key was expected");
            }
            let Some((key, value_at)) = split_key(&line.text, &line)? else {
                return err(line.no, line.indent + 1, "expected `key: value`");
            };
            if entries.iter().any(|(k, _)| k.name == key.name) {
                return err(key.pos.line, key.pos.column, format!("duplicate key `{}`", key.name));
            }
            self.cur += 1;
            let rest = &line.text[value_at..];
            let value = if rest.trim().is_empty() || rest.trim_start().starts_with('#') {
                match self.peek() {
                    Some(next) if next.indent > indent => {
                        let child = next.indent;
                        self.block(child)?
                    }
                    Some(next) if next.indent == indent && is_seq_item(&next.text) => self.seq(indent)?,
                    _ => Node {
                        kind: NodeKind::Null,
                        pos: key.pos,
                    },
                }
            } else {
                let skip = rest.len() - rest.trim_start().len();
                let char_off = line.text[..value_at + skip].chars().count();
                let value_text = rest.trim_start();
                if is_seq_item(value_text) {
                    return err(line.no, line.col(char_off), "block sequence cannot start on a key line");
                }
                let (node, after) = scalar_or_flow(value_text, char_off, &line, false)?;
                if let NodeKind::Scalar(_, ScalarStyle::Plain) = node.kind {
                    if split_key(value_text, &line)?.is_some() {
                        return err(line.no, line.col(char_off), "nested mappings must start on a new line");
                    }
                }
                trailing(&line, after)?;
                // Indented continuation lines are not part of the subset.
                if let Some(next) = self.peek() {
                    if next.indent > indent {
                        return err(next.no, next.indent + 1, "unexpected indentation");
                    }
                }
                node
            };
            entries.push((key, value));
        }
        Ok(Node {
            kind: NodeKind::Map(entries),
            pos: start,
        })
    }
}

/// Checks that only whitespace or a comment follows a value. `rest` is the
/// remaining text and its char offset within the line.
fn trailing(line: &Line, rest: (usize, &str)) -> Result<(), YamlError> {
    let (off, text) = rest;
    let trimmed = text.trim_start();
    if trimmed.is_empty() || (trimmed.starts_with('#') && trimmed.len() < text.len()) {
        return Ok(());
    }
    let skipped = text.len() - trimmed.len();
    err(line.no, line.col(off + skipped), "unexpected trailing content")
}

/// Recognizes `key:` at the start of `text`. Returns the key and the byte
/// index where the value begins.
fn split_key(text: &str, line: &Line) -> Result<Option<(Key, usize)>, YamlError> {
    let first = text.chars().next();
    match first {
        Some('"') | Some('\'') => {
            let (name, consumed) = quoted(text, 0, line)?;
            let after = &text[consumed..];
            let trimmed = after.trim_start_matches(' ');
            if let Some(rest) = trimmed.strip_prefix(':') {
                if rest.is_empty() || rest.starts_with(' ') {
                    let value_at = text.len() - rest.len();
                    return Ok(Some((
                        Key {
                            name,
                            pos: Pos { line: line.no, column: line.col(0) },
                        },
                        value_at,
                    )));
                }
            }
            Ok(None)
        }
        Some('[') | Some('{') | None => Ok(None),
        Some(_) => {
            let bytes = text.as_bytes();
            for (i, &b) in bytes.iter().enumerate() {
                if b == b'#' && i > 0 && bytes[i - 1] == b' ' {
                    return Ok(None);
                }
                if b == b':' && (i + 1 == bytes.len() || bytes[i + 1] == b' ') {
                    let name = text[..i].trim_end().to_string();
                    if name.is_empty() {
                        return Ok(None);
                    }
                    return Ok(Some((
                        Key {
                            name,
                            pos: Pos { line: line.no, column: line.col(0) },
                        },
                        i + 1,
                    )));
                }
            }
            Ok(None)
        }
    }
}

/// Parses a quoted scalar starting at byte 0 of `text`. Returns the decoded
/// value and the number of bytes consumed.
fn quoted(text: &str, char_off: usize, line: &Line) -> Result<(String, usize), YamlError> {
    let mut chars = text.char_indices();
    let (_, q) = chars.next().unwrap();
    let mut out = String::new();
    let mut it = chars.peekable();
    while let Some((i, c)) = it.next() {
        if q == '\'' {
            if c == '\'' {
                if let Some(&(_, '\'')) = it.peek() {
                    it.next();
                    out.push('\'');
                    continue;
                }
                return Ok((out, i + 1));
            }
            out.push(c);
        } else {
            match c {
                '"' => return Ok((out, i + 1)),
                '\\' => {
                    let Some((j, e)) = it.next() else { break };
                    let col = line.col(char_off + text[..j].chars().count());
                    match e {
                        '"' => out.push('"'),
                        '\\' => out.push('\\'),
                        '/' => out.push('/'),
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        '0' => out.push('\0'),
                        ' ' => out.push(' '),
                        'u' => {
                            let mut hex = String::new();
                            for _ in 0..4 {
                                match it.next() {
                                    Some((_, h)) if h.is_ascii_hexdigit() => hex.push(h),
                                    _ => return err(line.no, col, "invalid \\u escape"),
                                }
                            }
                            let cp = u32::from_str_radix(&hex, 16).unwrap();
                            match char::from_u32(cp) {
                                Some(ch) => out.push(ch),
                                None => return err(line.no, col, "invalid \\u escape"),
                            }
                        }
                        other => return err(line.no, col, format!("unknown escape `\\{other}`")),
                    }
                }
                _ => out.push(c),
            }
        }
    }
    err(line.no, line.col(char_off), "unterminated quoted string")
}

/// Parses a scalar or a one-line flow collection starting at the beginning
/// of `text` (which sits at `char_off` within `line`). Returns the node and
/// the unconsumed remainder with its char offset.
fn scalar_or_flow<'a>(
    text: &'a str,
    char_off: usize,
    line: &Line,
    in_flow: bool,
) -> Result<(Node, (usize, &'a str)), YamlError> {
    let pos = Pos { line: line.no, column: line.col(char_off) };
    let Some(first) = text.chars().next() else {
        return Ok((Node { kind: NodeKind::Null, pos }, (char_off, text)));
    };
    match first {
        '"' | '\'' => {
            let (value, used) = quoted(text, char_off, line)?;
            let rest = &text[used..];
            Ok((
                Node {
                    kind: NodeKind::Scalar(value, ScalarStyle::Quoted),
                    pos,
                },
                (char_off + text[..used].chars().count(), rest),
            ))
        }
        '[' | '{' => flow(text, char_off, line),
        '&' | '*' | '!' | '|' | '>' | '%' | '@' | '`' => err(
            line.no,
            pos.column,
            format!("unsupported YAML feature starting with `{first}`"),
        ),
        _ => {
            let bytes = text.as_bytes();
            let mut end = bytes.len();
            for (i, &b) in bytes.iter().enumerate() {
                if b == b'#' && i > 0 && bytes[i - 1] == b' ' {
                    end = i;
                    break;
                }
                if in_flow && matches!(b, b',' | b']' | b'}') {
                    end = i;
                    break;
                }
            }
            let raw = text[..end].trim_end();
            let rest = &text[raw.len()..];
            let rest_off = char_off + raw.chars().count();
            let kind = if raw == "~" || raw == "null" {
                NodeKind::Null
            } else {
                NodeKind::Scalar(raw.to_string(), ScalarStyle::Plain)
            };
            Ok((Node { kind, pos }, (rest_off, rest)))
        }
    }
}

fn flow<'a>(text: &'a str, char_off: usize, line: &Line) -> Result<(Node, (usize, &'a str)), YamlError> {
    let pos = Pos { line: line.no, column: line.col(char_off) };
    let open = text.chars().next().unwrap();
    let close = if open == '[' { ']' } else { '}' };
    let mut idx = 1usize;
    let mut items = Vec::new();
    let mut entries: Vec<(Key, Node)> = Vec::new();
    let off_of = |i: usize| char_off + text[..i].chars().count();
    loop {
        let rest = &text[idx..];
        let trimmed = rest.trim_start();
        idx += rest.len() - trimmed.len();
        let Some(c) = trimmed.chars().next() else {
            return err(line.no, line.col(char_off), format!("unclosed `{open}`"));
        };
        if c == close {
            idx += 1;
            break;
        }
        if open == '{' {
            let Some((key, value_at)) = split_key(trimmed, line)? else {
                return err(line.no, line.col(off_of(idx)), "expected `key: value` in flow mapping");
            };
            let key = Key {
                name: key.name,
                pos: Pos { line: line.no, column: line.col(off_of(idx)) },
            };
            let mut vstart = idx + value_at;
            let vrest = &text[vstart..];
            vstart += vrest.len() - vrest.trim_start().len();
            let (node, (_, after)) = scalar_or_flow(&text[vstart..], off_of(vstart), line, true)?;
            entries.push((key, node));
            idx = text.len() - after.len();
        } else {
            let (node, (_, after)) = scalar_or_flow(trimmed, off_of(idx), line, true)?;
            items.push(node);
            idx = text.len() - after.len();
        }
        let rest = &text[idx..];
        let trimmed = rest.trim_start();
        idx += rest.len() - trimmed.len();
        match trimmed.chars().next() {
            Some(',') => idx += 1,
            Some(c) if c == close => {
                idx += 1;
                break;
            }
            None => return err(line.no, line.col(char_off), format!("unclosed `{open}`")),
            _ => return err(line.no, line.col(off_of(idx)), format!("expected `,` or `{close}`")),
        }
    }
    let kind = if open == '[' {
        NodeKind::Seq(items)
    } else {
        NodeKind::Map(entries)
    };
    Ok((Node { kind, pos }, (off_of(idx), &text[idx..])))
}

/// Renders a string as a double-quoted scalar that this reader (and any
/// YAML 1.2 parser) decodes back to the same value.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
