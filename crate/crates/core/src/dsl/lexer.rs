use num_bigint::BigInt;

use super::DslError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) const KEYWORDS: [&str; 14] = [
    "def", "sum", "let", "in", "clear", "encap", "select", "eps", "delta", "test", "ntest", "leq",
    "inv", "abs",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

const SYMBOLS: &str = "(){},;.=+-*/^&$@";

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        let tok = if c.is_ascii_alphabetic() {
            let j = scan(&chars, i, |c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
            let s: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let j = scan(&chars, i, |c| c.is_ascii_digit());
            let s: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            Tok::Int(s.parse().expect("digits"))
        } else if SYMBOLS.contains(c) {
            i += 1;
            col += 1;
            Tok::Sym(c)
        } else {
            return Err(DslError::Syntax {
                line,
                col,
                msg: format!("unexpected character {:?}", c),
            });
        };
        out.push(Token {
            tok,
            line: start.0,
            col: start.1,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn scan(chars: &[char], mut i: usize, pred: impl Fn(char) -> bool) -> usize {
    while i < chars.len() && pred(chars[i]) {
        i += 1;
    }
    i
}
