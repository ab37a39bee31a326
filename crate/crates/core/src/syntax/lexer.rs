//! Tokens carry their position and whether they start a line, which the
//! parser uses for layout.

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lower-case identifier or keyword.
    Ident(String),
    /// Upper-case identifier: sorts, constructors, aliases, `True`/`False`.
    Upper(String),
    Int(i64),
    /// Maximal run of symbol characters, e.g. `->`, `>>=`, `=`.
    Sym(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Backslash,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    pub line_start: bool,
}

const SYMBOL_CHARS: &str = "!#$%&*+./<=>?@^|-~:";

pub fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_start = true;
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
        let start = (line, col);
        let take = |tok: Tok, len: usize, out: &mut Vec<Token>| {
            out.push(Token { tok, line: start.0, col: start.1, line_start });
            len
        };
        let len = match c {
            '(' => take(Tok::LParen, 1, &mut out),
            ')' => take(Tok::RParen, 1, &mut out),
            '[' => take(Tok::LBracket, 1, &mut out),
            ']' => take(Tok::RBracket, 1, &mut out),
            '{' => take(Tok::LBrace, 1, &mut out),
            '}' => take(Tok::RBrace, 1, &mut out),
            ',' => take(Tok::Comma, 1, &mut out),
            ';' => take(Tok::Semi, 1, &mut out),
            '\\' => take(Tok::Backslash, 1, &mut out),
            c if c.is_ascii_digit() => {
                let text: String = chars[i..].iter().take_while(|c| c.is_ascii_digit()).collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| SyntaxError::new(line, col, format!("integer literal `{text}` out of range")))?;
                take(Tok::Int(n), text.len(), &mut out)
            }
            c if c.is_alphabetic() || c == '_' => {
                let text: String =
                    chars[i..].iter().take_while(|c| c.is_alphanumeric() || **c == '_' || **c == '\'').collect();
                let len = text.chars().count();
                let tok = if c.is_uppercase() { Tok::Upper(text) } else { Tok::Ident(text) };
                take(tok, len, &mut out)
            }
            c if is_symbol_char(c) => {
                let text: String = chars[i..].iter().take_while(|c| is_symbol_char(**c)).collect();
                let len = text.chars().count();
                take(Tok::Sym(text), len, &mut out)
            }
            c => return Err(SyntaxError::new(line, col, format!("unexpected character `{c}`"))),
        };
        i += len;
        col += len as u32;
        line_start = false;
    }
    out.push(Token { tok: Tok::Eof, line, col, line_start: true });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_munch() {
        assert_eq!(
            toks("m >>= \\x -> x"),
            vec![
                Tok::Ident("m".into()),
                Tok::Sym(">>=".into()),
                Tok::Backslash,
                Tok::Ident("x".into()),
                Tok::Sym("->".into()),
                Tok::Ident("x".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_layout_flags() {
        let ts = lex("f = 1 -- one\n  + 2\ng = 3").unwrap();
        let starts: Vec<(u32, bool)> = ts.iter().map(|t| (t.col, t.line_start)).collect();
        assert_eq!(starts[3], (3, true));
        assert_eq!(starts[5], (1, true));
    }

    #[test]
    fn primes_in_names() {
        assert_eq!(toks("t'")[0], Tok::Ident("t'".into()));
    }
}
