//! Regular expressions over numeric alphabets.
//!
//! Letters are non-negative integers. In the concrete syntax single-digit
//! letters are written directly (`(1|2)*`), and letters `>= 10` are written
//! parenthesized (`(12)`); a parenthesized group whose content is a number
//! greater than 9 is read as a letter, anything else as grouping. `|` is
//! alternation, juxtaposition (optionally separated by `.` or spaces) is
//! concatenation, and `*`, `+`, `?` are the usual postfix operators. The
//! empty regex denotes the empty word.

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Epsilon,
    Letter(u32),
    Concat(Box<Regex>, Box<Regex>),
    Alt(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    pub fn concat(a: Regex, b: Regex) -> Regex {
        match (a, b) {
            (Regex::Epsilon, b) => b,
            (a, Regex::Epsilon) => a,
            (a, b) => Regex::Concat(Box::new(a), Box::new(b)),
        }
    }

    pub fn alt(a: Regex, b: Regex) -> Regex {
        Regex::Alt(Box::new(a), Box::new(b))
    }

    pub fn star(r: Regex) -> Regex {
        Regex::Star(Box::new(r))
    }

    /// `(r+) = r . r*`
    pub fn plus(r: Regex) -> Regex {
        Regex::concat(r.clone(), Regex::star(r))
    }

    /// `(r?) = r | eps`
    pub fn opt(r: Regex) -> Regex {
        Regex::alt(r, Regex::Epsilon)
    }

    /// Alternation of all letters in `lo..=hi`; empty ranges give a
    /// never-matching star-free impossibility, so callers must keep `lo <= hi`.
    pub fn letter_range(lo: u32, hi: u32) -> Regex {
        assert!(lo <= hi, "empty letter range");
        let mut r = Regex::Letter(lo);
        for l in lo + 1..=hi {
            r = Regex::alt(r, Regex::Letter(l));
        }
        r
    }

    pub fn nullable(&self) -> bool {
        match self {
            Regex::Epsilon | Regex::Star(_) => true,
            Regex::Letter(_) => false,
            Regex::Concat(a, b) => a.nullable() && b.nullable(),
            Regex::Alt(a, b) => a.nullable() || b.nullable(),
        }
    }

    /// Brzozowski derivative with respect to `letter`; `None` encodes the
    /// empty language.
    fn derive(&self, letter: u32) -> Option<Regex> {
        match self {
            Regex::Epsilon => None,
            Regex::Letter(l) => (*l == letter).then_some(Regex::Epsilon),
            Regex::Concat(a, b) => {
                let left = a.derive(letter).map(|da| Regex::concat(da, (**b).clone()));
                let right = if a.nullable() { b.derive(letter) } else { None };
                match (left, right) {
                    (Some(l), Some(r)) => Some(Regex::alt(l, r)),
                    (l, r) => l.or(r),
                }
            }
            Regex::Alt(a, b) => match (a.derive(letter), b.derive(letter)) {
                (Some(l), Some(r)) => Some(Regex::alt(l, r)),
                (l, r) => l.or(r),
            },
            Regex::Star(r) => {
                r.derive(letter).map(|dr| Regex::concat(dr, Regex::star((**r).clone())))
            }
        }
    }

    pub fn matches(&self, word: &[u32]) -> bool {
        let mut r = self.clone();
        for &a in word {
            match r.derive(a) {
                Some(d) => r = d,
                None => return false,
            }
        }
        r.nullable()
    }

    /// Largest letter mentioned, if any.
    pub fn max_letter(&self) -> Option<u32> {
        match self {
            Regex::Epsilon => None,
            Regex::Letter(l) => Some(*l),
            Regex::Concat(a, b) | Regex::Alt(a, b) => match (a.max_letter(), b.max_letter()) {
                (x, None) => x,
                (None, y) => y,
                (Some(x), Some(y)) => Some(x.max(y)),
            },
            Regex::Star(r) => r.max_letter(),
        }
    }
}

struct ReParser<'a> {
    src: &'a [u8],
    at: usize,
}

impl<'a> ReParser<'a> {
    fn peek(&self) -> Option<u8> {
        let mut i = self.at;
        while let Some(&c) = self.src.get(i) {
            if c == b' ' || c == b'.' {
                i += 1;
            } else {
                return Some(c);
            }
        }
        None
    }

    fn bump(&mut self) -> Option<u8> {
        while let Some(&c) = self.src.get(self.at) {
            self.at += 1;
            if c != b' ' && c != b'.' {
                return Some(c);
            }
        }
        None
    }

    fn err(&self, msg: &str) -> Error {
        Error::Invalid(format!("regex: {msg} (at byte {})", self.at))
    }

    fn alternation(&mut self) -> Result<Regex, Error> {
        let mut r = self.concatenation()?;
        while self.peek() == Some(b'|') {
            self.bump();
            r = Regex::alt(r, self.concatenation()?);
        }
        Ok(r)
    }

    fn concatenation(&mut self) -> Result<Regex, Error> {
        let mut r = Regex::Epsilon;
        loop {
            match self.peek() {
                None | Some(b'|') | Some(b')') => return Ok(r),
                _ => r = Regex::concat(r, self.postfix()?),
            }
        }
    }

    fn postfix(&mut self) -> Result<Regex, Error> {
        let mut r = self.primary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    r = Regex::star(r);
                }
                Some(b'+') => {
                    self.bump();
                    r = Regex::plus(r);
                }
                Some(b'?') => {
                    self.bump();
                    r = Regex::opt(r);
                }
                _ => return Ok(r),
            }
        }
    }

    fn primary(&mut self) -> Result<Regex, Error> {
        match self.bump() {
            Some(c) if c.is_ascii_digit() => Ok(Regex::Letter((c - b'0') as u32)),
            Some(b'(') => {
                // A parenthesized number >= 10 is a multi-digit letter.
                let start = self.at;
                let mut digits = String::new();
                let mut i = start;
                while let Some(&c) = self.src.get(i) {
                    if c.is_ascii_digit() {
                        digits.push(c as char);
                        i += 1;
                    } else {
                        break;
                    }
                }
                if self.src.get(i) == Some(&b')') && digits.len() >= 2 {
                    self.at = i + 1;
                    let n: u32 = digits.parse().map_err(|_| self.err("letter overflow"))?;
                    return Ok(Regex::Letter(n));
                }
                let r = self.alternation()?;
                match self.bump() {
                    Some(b')') => Ok(r),
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of pattern")),
        }
    }
}

pub fn parse_regex(src: &str) -> Result<Regex, Error> {
    let mut p = ReParser { src: src.as_bytes(), at: 0 };
    let r = p.alternation()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(r)
}

pub fn print_regex(r: &Regex) -> String {
    fn letter(l: u32) -> String {
        if l < 10 {
            l.to_string()
        } else {
            format!("({l})")
        }
    }
    // prec: 0 = alternation, 1 = concatenation, 2 = postfix
    fn go(r: &Regex, prec: u8, out: &mut String) {
        match r {
            Regex::Epsilon => out.push_str("()"),
            Regex::Letter(l) => out.push_str(&letter(*l)),
            Regex::Concat(a, b) => {
                if prec > 1 {
                    out.push('(');
                }
                go(a, 1, out);
                go(b, 1, out);
                if prec > 1 {
                    out.push(')');
                }
            }
            Regex::Alt(a, b) => {
                if prec > 0 {
                    out.push('(');
                }
                go(a, 0, out);
                out.push('|');
                go(b, 0, out);
                if prec > 0 {
                    out.push(')');
                }
            }
            Regex::Star(r) => {
                go(r, 2, out);
                out.push('*');
            }
        }
    }
    let mut s = String::new();
    go(r, 0, &mut s);
    s
}
