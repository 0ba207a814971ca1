use super::ast::Pos;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Magnitude of an unsigned literal; the sign is applied by the parser.
    Int(u64),
    Ident(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Kw(k) => format!("`{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "tell", "when", "do", "unless", "next", "star", "bang", "local", "in", "sum", "for", "skip",
    "par", "def", "system", "var", "const", "stream", "set", "persistent", "oracle", "out", "true",
    "false", "bool", "int",
];

// Longest first so that `<=` wins over `<`.
const SYMBOLS: &[&str] = &[
    "/\\", "||", "&&", "..", "<>", "!=", "<=", ">=", "(", ")", "{", "}", "[", "]", ",", ";", ":",
    "=", "<", ">", "+", "-", "*", ".",
];

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
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
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<u64>().map_err(|_| ParseError {
                line,
                column: col,
                expected: "an integer that fits in 64 bits".into(),
                found: text.clone(),
            })?;
            col += (i - start) as u32;
            out.push(Token { tok: Tok::Int(n), pos });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let tok = match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(text),
            };
            out.push(Token { tok, pos });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len() as u32;
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => {
                return Err(ParseError {
                    line,
                    column: col,
                    expected: "a token".into(),
                    found: format!("`{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
