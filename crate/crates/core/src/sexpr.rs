//! A small s-expression reader with source positions, shared by all of the
//! textual formats (`.fol`, `.sst`, `.prof`, `.fin`).

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    /// A bare symbol or number.
    Atom(String, Position),
    /// A double-quoted string literal (used for regexes and file paths).
    Str(String, Position),
    List(Vec<Sexpr>, Position),
}

impl Sexpr {
    pub fn pos(&self) -> Position {
        match self {
            Sexpr::Atom(_, p) | Sexpr::Str(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Result<&str, Error> {
        match self {
            Sexpr::Atom(s, _) => Ok(s),
            _ => Err(Error::syntax(self.pos(), "expected a symbol")),
        }
    }

    pub fn as_list(&self) -> Result<&[Sexpr], Error> {
        match self {
            Sexpr::List(items, _) => Ok(items),
            _ => Err(Error::syntax(self.pos(), "expected a parenthesized list")),
        }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    at: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src: src.as_bytes(), at: 0, line: 1, col: 1 }
    }

    fn pos(&self) -> Position {
        Position { line: self.line, column: self.col }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<Sexpr, Error> {
        self.skip_trivia();
        let pos = self.pos();
        match self.peek() {
            None => Err(Error::syntax(pos, "unexpected end of input")),
            Some(b'(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        Some(b')') => {
                            self.bump();
                            return Ok(Sexpr::List(items, pos));
                        }
                        None => return Err(Error::syntax(pos, "unclosed '('")),
                        _ => items.push(self.read()?),
                    }
                }
            }
            Some(b')') => Err(Error::syntax(pos, "unexpected ')'")),
            Some(b'"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(Error::syntax(pos, "unterminated string literal")),
                        Some(b'"') => return Ok(Sexpr::Str(s, pos)),
                        Some(c) => s.push(c as char),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b'"' || c == b';' {
                        break;
                    }
                    s.push(c as char);
                    self.bump();
                }
                Ok(Sexpr::Atom(s, pos))
            }
        }
    }
}

/// Reads a single s-expression from `src`.
pub fn parse_one(src: &str) -> Result<Sexpr, Error> {
    let mut r = Reader::new(src);
    let e = r.read()?;
    r.skip_trivia();
    if r.peek().is_some() {
        return Err(Error::syntax(r.pos(), "trailing input after expression"));
    }
    Ok(e)
}

/// Reads all top-level s-expressions from `src`.
pub fn parse_all(src: &str) -> Result<Vec<Sexpr>, Error> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists() {
        let e = parse_one("(forall (x int) (< x x))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items[0].as_atom().unwrap(), "forall");
        assert_eq!(items.len(), 3);
    }

    #[test]
    fn reports_position_of_unclosed_paren() {
        let err = parse_one("(and (or a").unwrap_err();
        assert!(err.to_string().contains("1:6"), "{err}");
    }

    #[test]
    fn comments_and_strings() {
        let all = parse_all("; header\n(re \"1*\" x) atom").unwrap();
        assert_eq!(all.len(), 2);
    }
}
