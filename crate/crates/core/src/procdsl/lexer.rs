use super::DslError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// longest first
const SYMBOLS: &[&str] = &[
    "->", ":=", "==", "!=", "<=", ">=", "&&", "||", ":", ",", ";", "(", ")", "{", "}", "<", ">", "+", "-", "*", "/", "!", "=",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    for (ln, text) in src.lines().enumerate() {
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (ln + 1, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                // the system name may contain dashes
                let dashed = matches!(out.last(), Some(Token { tok: Tok::Ident(k), .. }) if k == "system");
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || dashed && chars[i] == '-') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                out.push(Token { tok: Tok::Num(chars[start..i].iter().collect()), line, col });
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), line, col });
                    i += s.len();
                }
                None => return Err(DslError::new(line, col, format!("unexpected character '{c}'"))),
            }
        }
    }
    // end of input sits just past the last character
    let (line, col) = match src.lines().last() {
        Some(last) if !src.ends_with('\n') => (src.lines().count(), last.chars().count() + 1),
        _ => (src.lines().count() + 1, 1),
    };
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
