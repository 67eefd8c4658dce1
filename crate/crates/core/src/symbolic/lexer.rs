//! S-expression lexer with line/column tracking and `;` comments.

use alloc::string::String;
use alloc::vec::Vec;

use super::PddlError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    /// Symbols are lowercased: PDDL names are case-insensitive.
    Symbol(String),
    Number(i64),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, PddlError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                // Comment to end of line.
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, line, col });
                chars.next();
                col += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, line, col });
                chars.next();
                col += 1;
            }
            _ => {
                let (start_line, start_col) = (line, col);
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    col += 1;
                }
                let first = word.chars().next().unwrap_or(' ');
                if first.is_ascii_digit() || (first == '-' && word.len() > 1) {
                    match word.parse::<i64>() {
                        Ok(n) => out.push(Token { tok: Tok::Number(n), line: start_line, col: start_col }),
                        Err(_) => {
                            // Fluents are integers; reject floats and malformed
                            // numerics instead of guessing.
                            return Err(PddlError::Syntax {
                                line: start_line,
                                col: start_col,
                                message: {
                                    let mut m = String::from("expected integer literal, got `");
                                    m.push_str(&word);
                                    m.push('`');
                                    m
                                },
                            });
                        }
                    }
                } else {
                    out.push(Token {
                        tok: Tok::Symbol(word.to_ascii_lowercase()),
                        line: start_line,
                        col: start_col,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_symbols_numbers_comments() {
        let toks = lex("(foo ?Bar 42) ; trailing\n(:baz -1)").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            alloc::vec![
                Tok::LParen,
                Tok::Symbol("foo".into()),
                Tok::Symbol("?bar".into()),
                Tok::Number(42),
                Tok::RParen,
                Tok::LParen,
                Tok::Symbol(":baz".into()),
                Tok::Number(-1),
                Tok::RParen,
            ]
        );
    }

    #[test]
    fn rejects_float_literals() {
        assert!(matches!(lex("(x 3.5)"), Err(PddlError::Syntax { .. })));
    }

    #[test]
    fn tracks_positions() {
        let toks = lex("(a\n  b)").unwrap();
        assert_eq!((toks[2].line, toks[2].col), (2, 3));
    }
}
