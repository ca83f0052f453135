//! Lexer turning a code block into the "words" of the embedding corpus.
//!
//! Identifiers are kept whole and case-sensitive, numeric literals become
//! `<NUM>`, string and char literals become `<STR>`, a small set of two-char
//! operators stay together and every other non-whitespace char is a token.

use std::ops::Range;

pub const NUM: &str = "<NUM>";
pub const STR: &str = "<STR>";

const OPERATORS: [&str; 10] = ["==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "->"];

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(tokens: Vec<String>) -> Self {
        TokenSequence { tokens }
    }
}

/// Which lexical rule produced a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Number,
    Str,
    Placeholder,
    Operator,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedToken {
    pub text: String,
    pub kind: TokenKind,
    /// Byte range of the input consumed by this token.
    pub span: Range<usize>,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

pub fn tokenize(code: &str) -> TokenSequence {
    TokenSequence {
        tokens: tokenize_spanned(code).into_iter().map(|t| t.text).collect(),
    }
}

/// Instrumented tokenizer: same tokens as [`tokenize`], plus the byte span
/// and rule behind each one.
pub fn tokenize_spanned(code: &str) -> Vec<SpannedToken> {
    let bytes = code.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < code.len() {
        let c = code[i..].chars().next().expect("in bounds");
        let start = i;
        let (kind, text, end) = if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        } else if is_ident_start(c) {
            let end = scan_while(code, i, is_ident_continue);
            (TokenKind::Identifier, code[i..end].to_string(), end)
        } else if c.is_ascii_digit() {
            (TokenKind::Number, NUM.to_string(), scan_number(bytes, i))
        } else if c == '"' || c == '\'' {
            (TokenKind::Str, STR.to_string(), scan_quoted(bytes, i))
        } else if code[i..].starts_with(NUM) || code[i..].starts_with(STR) {
            (TokenKind::Placeholder, code[i..i + 5].to_string(), i + 5)
        } else if let Some(op) = OPERATORS.iter().find(|op| code[i..].starts_with(**op)) {
            (TokenKind::Operator, op.to_string(), i + op.len())
        } else {
            (TokenKind::Symbol, c.to_string(), i + c.len_utf8())
        };
        out.push(SpannedToken {
            text,
            kind,
            span: start..end,
        });
        i = end;
    }
    out
}

fn scan_while(code: &str, from: usize, pred: fn(char) -> bool) -> usize {
    code[from..]
        .char_indices()
        .find(|&(_, c)| !pred(c))
        .map_or(code.len(), |(off, _)| from + off)
}

/// Decimal, hex, binary, octal, fractional and exponent forms with suffixes
/// and `_` separators all collapse to one literal.
fn scan_number(b: &[u8], from: usize) -> usize {
    let mut i = from;
    let hex = b[i] == b'0' && matches!(b.get(i + 1), Some(b'x' | b'X'));
    if hex {
        i += 2;
    }
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_alphanumeric() || c == b'_' {
            let exponent = !hex && (c == b'e' || c == b'E');
            i += 1;
            if exponent
                && matches!(b.get(i), Some(b'+' | b'-'))
                && b.get(i + 1).is_some_and(u8::is_ascii_digit)
            {
                i += 1;
            }
        } else if c == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
            i += 1;
        } else {
            break;
        }
    }
    i
}

/// Quoted literal with backslash escapes; unterminated runs to the end.
fn scan_quoted(b: &[u8], from: usize) -> usize {
    let quote = b[from];
    let mut i = from + 1;
    while i < b.len() {
        match b[i] {
            b'\\' => i += 2,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    b.len()
}
