//! Lexer for preprocessed C text. Comments are kept as trivia tokens
//! because specification annotations live inside them.

use std::fmt;

use super::diag::{Diagnostic, Loc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Keyword {
    Void,
    Char,
    Short,
    Int,
    Long,
    Signed,
    Unsigned,
    Float,
    Double,
    Bool,
    Struct,
    Union,
    Enum,
    Typedef,
    Static,
    Extern,
    Const,
    Volatile,
    Inline,
    Register,
    Auto,
    If,
    Else,
    While,
    For,
    Do,
    Return,
    Goto,
    Switch,
    Case,
    Default,
    Break,
    Continue,
    Sizeof,
}

const KEYWORDS: &[(&str, Keyword)] = &[
    ("void", Keyword::Void),
    ("char", Keyword::Char),
    ("short", Keyword::Short),
    ("int", Keyword::Int),
    ("long", Keyword::Long),
    ("signed", Keyword::Signed),
    ("unsigned", Keyword::Unsigned),
    ("float", Keyword::Float),
    ("double", Keyword::Double),
    ("_Bool", Keyword::Bool),
    ("struct", Keyword::Struct),
    ("union", Keyword::Union),
    ("enum", Keyword::Enum),
    ("typedef", Keyword::Typedef),
    ("static", Keyword::Static),
    ("extern", Keyword::Extern),
    ("const", Keyword::Const),
    ("volatile", Keyword::Volatile),
    ("inline", Keyword::Inline),
    ("register", Keyword::Register),
    ("auto", Keyword::Auto),
    ("if", Keyword::If),
    ("else", Keyword::Else),
    ("while", Keyword::While),
    ("for", Keyword::For),
    ("do", Keyword::Do),
    ("return", Keyword::Return),
    ("goto", Keyword::Goto),
    ("switch", Keyword::Switch),
    ("case", Keyword::Case),
    ("default", Keyword::Default),
    ("break", Keyword::Break),
    ("continue", Keyword::Continue),
    ("sizeof", Keyword::Sizeof),
];

impl Keyword {
    pub fn as_str(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Punct {
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Arrow,
    PlusPlus,
    MinusMinus,
    Amp,
    Star,
    Plus,
    Minus,
    Tilde,
    Bang,
    Slash,
    Percent,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Caret,
    Pipe,
    AndAnd,
    OrOr,
    Question,
    Colon,
    Assign,
    StarAssign,
    SlashAssign,
    PercentAssign,
    PlusAssign,
    MinusAssign,
    ShlAssign,
    ShrAssign,
    AmpAssign,
    PipeAssign,
    CaretAssign,
    /// `==>`, implication inside annotations.
    Implies,
    Ellipsis,
}

// Longest spellings first so the lexer can match greedily.
const PUNCTS: &[(&str, Punct)] = &[
    ("...", Punct::Ellipsis),
    ("<<=", Punct::ShlAssign),
    (">>=", Punct::ShrAssign),
    ("==>", Punct::Implies),
    ("->", Punct::Arrow),
    ("++", Punct::PlusPlus),
    ("--", Punct::MinusMinus),
    ("<<", Punct::Shl),
    (">>", Punct::Shr),
    ("<=", Punct::Le),
    (">=", Punct::Ge),
    ("==", Punct::EqEq),
    ("!=", Punct::Ne),
    ("&&", Punct::AndAnd),
    ("||", Punct::OrOr),
    ("*=", Punct::StarAssign),
    ("/=", Punct::SlashAssign),
    ("%=", Punct::PercentAssign),
    ("+=", Punct::PlusAssign),
    ("-=", Punct::MinusAssign),
    ("&=", Punct::AmpAssign),
    ("|=", Punct::PipeAssign),
    ("^=", Punct::CaretAssign),
    ("(", Punct::LParen),
    (")", Punct::RParen),
    ("{", Punct::LBrace),
    ("}", Punct::RBrace),
    ("[", Punct::LBracket),
    ("]", Punct::RBracket),
    (";", Punct::Semi),
    (",", Punct::Comma),
    (".", Punct::Dot),
    ("&", Punct::Amp),
    ("*", Punct::Star),
    ("+", Punct::Plus),
    ("-", Punct::Minus),
    ("~", Punct::Tilde),
    ("!", Punct::Bang),
    ("/", Punct::Slash),
    ("%", Punct::Percent),
    ("<", Punct::Lt),
    (">", Punct::Gt),
    ("^", Punct::Caret),
    ("|", Punct::Pipe),
    ("?", Punct::Question),
    (":", Punct::Colon),
    ("=", Punct::Assign),
];

impl Punct {
    pub fn as_str(self) -> &'static str {
        PUNCTS.iter().find(|(_, p)| *p == self).map(|(s, _)| *s).unwrap()
    }

    fn tag(self) -> &'static str {
        match self {
            Punct::LParen => "lparen",
            Punct::RParen => "rparen",
            Punct::LBrace => "lbrace",
            Punct::RBrace => "rbrace",
            Punct::LBracket => "lbracket",
            Punct::RBracket => "rbracket",
            Punct::Semi => "semi",
            Punct::Comma => "comma",
            Punct::Dot => "dot",
            Punct::Arrow => "arrow",
            Punct::PlusPlus => "plusplus",
            Punct::MinusMinus => "minusminus",
            Punct::Amp => "amp",
            Punct::Star => "star",
            Punct::Plus => "plus",
            Punct::Minus => "minus",
            Punct::Tilde => "tilde",
            Punct::Bang => "bang",
            Punct::Slash => "slash",
            Punct::Percent => "percent",
            Punct::Shl => "shl",
            Punct::Shr => "shr",
            Punct::Lt => "lt",
            Punct::Gt => "gt",
            Punct::Le => "le",
            Punct::Ge => "ge",
            Punct::EqEq => "eqeq",
            Punct::Ne => "ne",
            Punct::Caret => "caret",
            Punct::Pipe => "pipe",
            Punct::AndAnd => "andand",
            Punct::OrOr => "oror",
            Punct::Question => "question",
            Punct::Colon => "colon",
            Punct::Assign => "assign",
            Punct::StarAssign => "star-assign",
            Punct::SlashAssign => "slash-assign",
            Punct::PercentAssign => "percent-assign",
            Punct::PlusAssign => "plus-assign",
            Punct::MinusAssign => "minus-assign",
            Punct::ShlAssign => "shl-assign",
            Punct::ShrAssign => "shr-assign",
            Punct::AmpAssign => "amp-assign",
            Punct::PipeAssign => "pipe-assign",
            Punct::CaretAssign => "caret-assign",
            Punct::Implies => "implies",
            Punct::Ellipsis => "ellipsis",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntSuffix {
    pub unsigned: bool,
    /// Number of `l`/`L` characters (0, 1 or 2).
    pub longs: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    Int {
        value: u64,
        suffix: IntSuffix,
        radix: u32,
    },
    Float(String),
    Char(u64),
    Str(String),
    Punct(Punct),
    /// Block or line comment; `annotation` is set for `/*@ ... @*/`.
    Comment {
        text: String,
        annotation: bool,
    },
}

impl TokenKind {
    pub fn is_trivia(&self) -> bool {
        matches!(self, TokenKind::Comment { .. })
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "ident-{s}"),
            TokenKind::Keyword(k) => write!(f, "kw-{}", k.as_str()),
            TokenKind::Int { value, .. } => write!(f, "int-{value:#x}"),
            TokenKind::Float(s) => write!(f, "float-{s}"),
            TokenKind::Char(c) => write!(f, "char-{c}"),
            TokenKind::Str(_) => f.write_str("string"),
            TokenKind::Punct(p) => f.write_str(p.tag()),
            TokenKind::Comment { annotation: true, .. } => f.write_str("annotation"),
            TokenKind::Comment { .. } => f.write_str("comment"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: Loc,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn loc(&self) -> Loc {
        Loc { line: self.line, col: self.col }
    }

    fn peek(&self, off: usize) -> u8 {
        self.bytes.get(self.pos + off).copied().unwrap_or(0)
    }

    fn bump(&mut self) -> u8 {
        let c = self.bytes[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if (c & 0xC0) != 0x80 {
            self.col += 1;
        }
        c
    }

    fn err(&self, loc: Loc, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error("lex", loc, msg)
    }

    fn run(mut self) -> Result<Vec<Token>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.bytes.len() && self.peek(0).is_ascii_whitespace() {
                self.bump();
            }
            if self.pos >= self.bytes.len() {
                return Ok(out);
            }
            let loc = self.loc();
            let start = self.pos;
            let kind = self.token(loc)?;
            out.push(Token { kind, loc, start, end: self.pos });
        }
    }

    fn token(&mut self, loc: Loc) -> Result<TokenKind, Diagnostic> {
        let c = self.peek(0);
        if c == b'/' && self.peek(1) == b'*' {
            let annotation = self.peek(2) == b'@';
            self.bump();
            self.bump();
            let body_start = self.pos;
            loop {
                if self.pos >= self.bytes.len() {
                    return Err(self.err(loc, "unterminated comment"));
                }
                if self.peek(0) == b'*' && self.peek(1) == b'/' {
                    let text = self.src[body_start..self.pos].to_string();
                    self.bump();
                    self.bump();
                    return Ok(TokenKind::Comment { text, annotation });
                }
                self.bump();
            }
        }
        if c == b'/' && self.peek(1) == b'/' {
            let body_start = self.pos + 2;
            while self.pos < self.bytes.len() && self.peek(0) != b'\n' {
                self.bump();
            }
            return Ok(TokenKind::Comment { text: self.src[body_start..self.pos].to_string(), annotation: false });
        }
        if c == b'#' {
            // Line markers left by the preprocessor (`# 1 "file.c"`).
            while self.pos < self.bytes.len() && self.peek(0) != b'\n' {
                self.bump();
            }
            return Ok(TokenKind::Comment { text: String::new(), annotation: false });
        }
        if c.is_ascii_alphabetic() || c == b'_' || (c == b'\\' && self.peek(1).is_ascii_alphabetic()) {
            let s = self.pos;
            self.bump();
            while self.peek(0).is_ascii_alphanumeric() || self.peek(0) == b'_' {
                self.bump();
            }
            let word = &self.src[s..self.pos];
            if let Some((_, k)) = KEYWORDS.iter().find(|(w, _)| *w == word) {
                return Ok(TokenKind::Keyword(*k));
            }
            return Ok(TokenKind::Ident(word.to_string()));
        }
        if c.is_ascii_digit() || (c == b'.' && self.peek(1).is_ascii_digit()) {
            return self.number(loc);
        }
        if c == b'\'' {
            self.bump();
            let v = self.escaped_char(loc)?;
            if self.peek(0) != b'\'' {
                return Err(self.err(loc, "unterminated character literal"));
            }
            self.bump();
            return Ok(TokenKind::Char(v));
        }
        if c == b'"' {
            self.bump();
            let mut s = String::new();
            loop {
                match self.peek(0) {
                    0 | b'\n' => return Err(self.err(loc, "unterminated string literal")),
                    b'"' => {
                        self.bump();
                        return Ok(TokenKind::Str(s));
                    }
                    _ => {
                        let v = self.escaped_char(loc)?;
                        s.push(char::from_u32(v as u32).unwrap_or('?'));
                    }
                }
            }
        }
        for (spelling, p) in PUNCTS {
            if self.src[self.pos..].starts_with(spelling) {
                for _ in 0..spelling.len() {
                    self.bump();
                }
                return Ok(TokenKind::Punct(*p));
            }
        }
        let ch = self.src[self.pos..].chars().next().unwrap();
        Err(self.err(loc, format!("unexpected character `{ch}`")))
    }

    fn escaped_char(&mut self, loc: Loc) -> Result<u64, Diagnostic> {
        let c = self.peek(0);
        if c == 0 {
            return Err(self.err(loc, "unexpected end of input in literal"));
        }
        self.bump();
        if c != b'\\' {
            return Ok(c as u64);
        }
        let e = self.bump();
        Ok(match e {
            b'n' => 10,
            b't' => 9,
            b'r' => 13,
            b'0'..=b'7' => {
                let mut v = (e - b'0') as u64;
                while matches!(self.peek(0), b'0'..=b'7') {
                    v = v * 8 + (self.bump() - b'0') as u64;
                }
                v
            }
            b'x' => {
                let mut v = 0u64;
                while self.peek(0).is_ascii_hexdigit() {
                    v = v * 16 + (self.bump() as char).to_digit(16).unwrap() as u64;
                }
                v
            }
            b'\\' | b'\'' | b'"' | b'?' => e as u64,
            b'a' => 7,
            b'b' => 8,
            b'f' => 12,
            b'v' => 11,
            other => return Err(self.err(loc, format!("unknown escape `\\{}`", other as char))),
        })
    }

    fn number(&mut self, loc: Loc) -> Result<TokenKind, Diagnostic> {
        let s = self.pos;
        while self.peek(0).is_ascii_alphanumeric()
            || self.peek(0) == b'.'
            || ((self.peek(0) == b'+' || self.peek(0) == b'-')
                && matches!(self.bytes[self.pos - 1], b'e' | b'E')
                && !self.src[s..self.pos].starts_with("0x"))
        {
            self.bump();
        }
        let text = &self.src[s..self.pos];
        let lower = text.to_ascii_lowercase();
        let is_hex = lower.starts_with("0x");
        if !is_hex && (lower.contains('.') || lower.contains('e')) {
            return Ok(TokenKind::Float(text.to_string()));
        }
        let digits_end = lower
            .char_indices()
            .skip(if is_hex { 2 } else { 0 })
            .find(|(_, c)| !(if is_hex { c.is_ascii_hexdigit() } else { c.is_ascii_digit() }))
            .map(|(i, _)| i)
            .unwrap_or(lower.len());
        let suffix_text = &lower[digits_end..];
        if !is_hex && suffix_text == "f" {
            return Ok(TokenKind::Float(text.to_string()));
        }
        let mut suffix = IntSuffix::default();
        for ch in suffix_text.chars() {
            match ch {
                'u' if !suffix.unsigned => suffix.unsigned = true,
                'l' if suffix.longs < 2 => suffix.longs += 1,
                _ => return Err(self.err(loc, format!("malformed integer literal `{text}`"))),
            }
        }
        let (radix, digits) = if is_hex {
            (16, &lower[2..digits_end])
        } else if lower.len() > 1 && lower.starts_with('0') {
            (8, &lower[1..digits_end])
        } else {
            (10, &lower[..digits_end])
        };
        if digits.is_empty() && radix != 8 {
            return Err(self.err(loc, format!("malformed integer literal `{text}`")));
        }
        let value = if digits.is_empty() {
            0
        } else {
            u64::from_str_radix(digits, radix)
                .map_err(|_| self.err(loc, format!("integer literal `{text}` out of range")))?
        };
        Ok(TokenKind::Int { value, suffix, radix })
    }
}

/// Tokenize preprocessed C source. Comments are returned as trivia tokens.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    Lexer { src, bytes: src.as_bytes(), pos: 0, line: 1, col: 1 }.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(src: &str) -> Vec<String> {
        tokenize(src).unwrap().iter().map(|t| t.kind.to_string()).collect()
    }

    #[test]
    fn minimal_declaration() {
        assert_eq!(tags("int x;"), ["kw-int", "ident-x", "semi"]);
    }

    #[test]
    fn postfix_increment() {
        assert_eq!(tags("counter++;"), ["ident-counter", "plusplus", "semi"]);
    }

    #[test]
    fn wide_hex_literal() {
        let toks = tokenize("0x0001180040000000").unwrap();
        assert_eq!(toks.len(), 1);
        match toks[0].kind {
            TokenKind::Int { value, radix, .. } => {
                assert_eq!(value, 0x1180040000000);
                assert_eq!(radix, 16);
            }
            ref k => panic!("unexpected {k}"),
        }
    }

    #[test]
    fn suffixes_and_floats() {
        let toks = tokenize("10UL 3u 1.5 2.0f 1e3 07").unwrap();
        assert!(matches!(
            toks[0].kind,
            TokenKind::Int { value: 10, suffix: IntSuffix { unsigned: true, longs: 1 }, .. }
        ));
        assert!(matches!(toks[1].kind, TokenKind::Int { suffix: IntSuffix { unsigned: true, longs: 0 }, .. }));
        assert!(matches!(toks[2].kind, TokenKind::Float(_)));
        assert!(matches!(toks[3].kind, TokenKind::Float(_)));
        assert!(matches!(toks[4].kind, TokenKind::Float(_)));
        assert!(matches!(toks[5].kind, TokenKind::Int { value: 7, radix: 8, .. }));
    }

    #[test]
    fn comments_are_trivia() {
        let toks = tokenize("/*@ requires true; @*/ int /* c */ x; // tail").unwrap();
        assert!(matches!(&toks[0].kind, TokenKind::Comment { annotation: true, text } if text.contains("requires")));
        assert!(toks[2].kind.is_trivia());
        assert!(toks.last().unwrap().kind.is_trivia());
    }

    #[test]
    fn locations_are_one_based() {
        let toks = tokenize("int\n  x;").unwrap();
        assert_eq!(toks[1].loc, Loc { line: 2, col: 3 });
    }

    #[test]
    fn malformed_token_reports_location() {
        let e = tokenize("int x = 12zz;").unwrap_err();
        assert_eq!(e.loc, Loc { line: 1, col: 9 });
        let e = tokenize("int @x;").unwrap_err();
        assert_eq!(e.loc.col, 5);
        assert!(tokenize("/* open").is_err());
    }

    #[test]
    fn annotation_operators() {
        assert_eq!(tags("a ==> \\old(b)"), ["ident-a", "implies", "ident-\\old", "lparen", "ident-b", "rparen"]);
    }
}
