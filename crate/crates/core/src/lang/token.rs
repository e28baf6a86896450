//! Lexer for the Java method subset.
//!
//! Comments and whitespace are dropped. Every other character belongs to
//! exactly one token, and every token records the byte span it came from.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Literal,
    Operator,
    Punctuation,
    AnnotationMarker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_identifier(&self) -> bool {
        self.kind == TokenKind::Identifier
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal at byte {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated char literal at byte {offset}")]
    UnterminatedChar { offset: usize },
    #[error("unterminated block comment at byte {offset}")]
    UnterminatedComment { offset: usize },
    #[error("illegal character {ch:?} at byte {offset}")]
    IllegalChar { ch: char, offset: usize },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match *self {
            LexError::UnterminatedString { offset }
            | LexError::UnterminatedChar { offset }
            | LexError::UnterminatedComment { offset }
            | LexError::IllegalChar { offset, .. } => offset,
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

const WORD_LITERALS: &[&str] = &["true", "false", "null"];

// Longest first so that maximal munch is a simple prefix scan.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">",
    "!", "~", "?", ":", "&", "|", "^",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.'];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_part(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

/// Splits `source` into tokens, failing on the first lexical error.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source, false).run()
}

/// Like [`tokenize`] but never fails: illegal characters become single
/// punctuation tokens and unterminated literals run to the end of the line.
/// Used for counting tokens of mangled text and for scanning whole files.
pub fn tokenize_lenient(source: &str) -> Vec<Token> {
    Lexer::new(source, true)
        .run()
        .expect("lenient lexing never fails")
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    lenient: bool,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, lenient: bool) -> Self {
        Lexer {
            src,
            pos: 0,
            lenient,
            out: Vec::new(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.out.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            span: Span {
                offset: start,
                len: self.pos - start,
            },
        });
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if self.rest().starts_with("//") {
                let line_end = self.rest().find('\n').map_or(self.src.len(), |i| self.pos + i);
                self.pos = line_end;
            } else if self.rest().starts_with("/*") {
                match self.rest()[2..].find("*/") {
                    Some(i) => self.pos += i + 4,
                    None if self.lenient => self.pos = self.src.len(),
                    None => return Err(LexError::UnterminatedComment { offset: start }),
                }
            } else if is_ident_start(c) {
                while self.peek().is_some_and(is_ident_part) {
                    self.pos += self.peek().unwrap().len_utf8();
                }
                let word = &self.src[start..self.pos];
                let kind = if WORD_LITERALS.contains(&word) {
                    TokenKind::Literal
                } else if is_keyword(word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                };
                self.push(kind, start);
            } else if c.is_ascii_digit() {
                self.number();
                self.push(TokenKind::Literal, start);
            } else if c == '"' || c == '\'' {
                self.quoted(c)?;
                self.push(TokenKind::Literal, start);
            } else if c == '@' {
                self.pos += 1;
                self.push(TokenKind::AnnotationMarker, start);
            } else if PUNCTUATION.contains(&c) {
                self.pos += 1;
                self.push(TokenKind::Punctuation, start);
            } else if let Some(op) = OPERATORS.iter().find(|op| self.rest().starts_with(*op)) {
                self.pos += op.len();
                self.push(TokenKind::Operator, start);
            } else if self.lenient {
                self.pos += c.len_utf8();
                self.push(TokenKind::Punctuation, start);
            } else {
                return Err(LexError::IllegalChar { ch: c, offset: start });
            }
        }
        Ok(self.out)
    }

    fn eat_digits(&mut self, radix: u32) {
        while self
            .peek()
            .is_some_and(|c| c.is_digit(radix) || c == '_')
        {
            self.pos += 1;
        }
    }

    fn number(&mut self) {
        if self.rest().starts_with("0x") || self.rest().starts_with("0X") {
            self.pos += 2;
            self.eat_digits(16);
        } else {
            self.eat_digits(10);
            // A dot belongs to the literal only when a digit follows it, so
            // `1 .5` and `a.5` never fuse into one float token.
            if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
                self.eat_digits(10);
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                let digit_at = if matches!(self.peek_at(1), Some('+' | '-')) { 2 } else { 1 };
                if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += digit_at;
                    self.eat_digits(10);
                }
            }
        }
        if matches!(self.peek(), Some('l' | 'L' | 'f' | 'F' | 'd' | 'D')) {
            self.pos += 1;
        }
    }

    fn quoted(&mut self, quote: char) -> Result<(), LexError> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek() {
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some('\n') | None => {}
                        Some(c) => self.pos += c.len_utf8(),
                    }
                }
                Some('\n') | None => {
                    if self.lenient {
                        return Ok(());
                    }
                    return Err(if quote == '"' {
                        LexError::UnterminatedString { offset: start }
                    } else {
                        LexError::UnterminatedChar { offset: start }
                    });
                }
                Some(c) => self.pos += c.len_utf8(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn minimal_method_header() {
        assert_eq!(texts("void f(){}"), ["void", "f", "(", ")", "{", "}"]);
    }

    #[test]
    fn declaration_statement() {
        assert_eq!(texts("int temp = a;"), ["int", "temp", "=", "a", ";"]);
    }

    #[test]
    fn comments_are_dropped() {
        assert_eq!(texts("a = b; // note"), ["a", "=", "b", ";"]);
        assert_eq!(texts("a /* x */ b"), ["a", "b"]);
    }

    #[test]
    fn kinds() {
        let toks = tokenize("@Override public int x = 1.5e3 + 'c' + \"s\\\"t\" >>>= null;").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        use TokenKind::*;
        assert_eq!(
            kinds,
            [
                AnnotationMarker,
                Identifier,
                Keyword,
                Keyword,
                Identifier,
                Operator,
                Literal,
                Operator,
                Literal,
                Operator,
                Literal,
                Operator,
                Literal,
                Punctuation
            ]
        );
        assert_eq!(toks[10].text, "\"s\\\"t\"");
    }

    #[test]
    fn dots_and_numbers() {
        assert_eq!(texts("a.b"), ["a", ".", "b"]);
        assert_eq!(texts("1 .5"), ["1", ".", "5"]);
        assert_eq!(texts("x[0].y"), ["x", "[", "0", "]", ".", "y"]);
        assert_eq!(texts("10L 0xFF 3.14f"), ["10L", "0xFF", "3.14f"]);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            tokenize("a = \"abc"),
            Err(LexError::UnterminatedString { offset: 4 })
        );
        assert_eq!(
            tokenize("x #"),
            Err(LexError::IllegalChar { ch: '#', offset: 2 })
        );
        assert_eq!(tokenize("'a"), Err(LexError::UnterminatedChar { offset: 0 }));
        assert!(matches!(
            tokenize("/* open"),
            Err(LexError::UnterminatedComment { offset: 0 })
        ));
    }

    #[test]
    fn lenient_never_fails() {
        let toks = tokenize_lenient("d f(Sg[]r){y(C,\"\");Main(ar);} # \"open");
        assert!(toks.iter().any(|t| t.text == "#"));
        assert_eq!(toks.last().unwrap().text, "\"open");
    }

    #[test]
    fn spans_strictly_increase() {
        let toks = tokenize("void f(int a, int b){int temp=a; a=b; b=temp;}").unwrap();
        for w in toks.windows(2) {
            assert!(w[0].span.end() <= w[1].span.offset);
        }
    }
}
