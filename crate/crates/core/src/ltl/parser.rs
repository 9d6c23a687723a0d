//! Recursive-descent parser for specification text.
//!
//! Binding strength, loosest first: `->`, `|`, `&`, `U`, then the prefix
//! operators `G F N !`. All binary connectives associate to the right.
//! `#` starts a comment that runs to the end of the line.

use super::ast::{Cmp, Formula, InputSchema, Term};
use super::LtlError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Plus,
    Minus,
    Star,
    Amp,
    Pipe,
    Arrow,
    Bang,
    Cmp(Cmp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number {x}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Cmp(c) => format!("`{}`", c.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, LtlError> {
        let mut lx = Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_trivia();
            let start = lx.pos;
            let tok = lx.next_tok()?;
            let done = tok == Tok::Eof;
            out.push((tok, start));
            if done {
                return Ok(out);
            }
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn peek_byte(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn next_tok(&mut self) -> Result<Tok, LtlError> {
        let Some(b) = self.peek_byte(0) else {
            return Ok(Tok::Eof);
        };
        let two = |lx: &mut Self, t: Tok| {
            lx.pos += 2;
            Ok(t)
        };
        let one = |lx: &mut Self, t: Tok| {
            lx.pos += 1;
            Ok(t)
        };
        match b {
            b'(' => one(self, Tok::LParen),
            b')' => one(self, Tok::RParen),
            b'[' => one(self, Tok::LBracket),
            b']' => one(self, Tok::RBracket),
            b',' => one(self, Tok::Comma),
            b'.' => one(self, Tok::Dot),
            b':' => one(self, Tok::Colon),
            b'+' => one(self, Tok::Plus),
            b'*' => one(self, Tok::Star),
            b'&' => one(self, Tok::Amp),
            b'|' => one(self, Tok::Pipe),
            b'-' if self.peek_byte(1) == Some(b'>') => two(self, Tok::Arrow),
            b'-' => one(self, Tok::Minus),
            b'!' if self.peek_byte(1) == Some(b'=') => two(self, Tok::Cmp(Cmp::Ne)),
            b'!' => one(self, Tok::Bang),
            b'<' if self.peek_byte(1) == Some(b'=') => two(self, Tok::Cmp(Cmp::Le)),
            b'<' => one(self, Tok::Cmp(Cmp::Lt)),
            b'>' if self.peek_byte(1) == Some(b'=') => two(self, Tok::Cmp(Cmp::Ge)),
            b'>' => one(self, Tok::Cmp(Cmp::Gt)),
            b'=' if self.peek_byte(1) == Some(b'=') => two(self, Tok::Cmp(Cmp::Eq)),
            b'=' => one(self, Tok::Cmp(Cmp::Eq)),
            b'0'..=b'9' => self.number(),
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while matches!(self.peek_byte(0), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                Ok(Tok::Ident(self.src[start..self.pos].to_string()))
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                Err(syntax_error(self.src, self.pos, "a token", &format!("`{ch}`")))
            }
        }
    }

    fn number(&mut self) -> Result<Tok, LtlError> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            while matches!(lx.peek_byte(0), Some(b'0'..=b'9')) {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.peek_byte(0) == Some(b'.') && matches!(self.peek_byte(1), Some(b'0'..=b'9')) {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.peek_byte(0), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_byte(0), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek_byte(0), Some(b'0'..=b'9')) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Tok::Number)
            .map_err(|_| syntax_error(self.src, start, "a number", &format!("`{text}`")))
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |nl| before[nl + 1..].chars().count()) + 1;
    (line, col)
}

fn syntax_error(src: &str, offset: usize, expected: &str, found: &str) -> LtlError {
    let (line, column) = line_col(src, offset);
    LtlError::Syntax {
        offset,
        line,
        column,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    schema: InputSchema,
}

type PResult<T> = Result<T, LtlError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn unbump(&mut self, t: &Tok) {
        if *t != Tok::Eof {
            self.pos -= 1;
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &str) -> PResult<T> {
        Err(syntax_error(self.src, self.offset(), expected, &self.peek().describe()))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.fail(&t.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let lhs = self.conjunction()?;
        if self.eat(&Tok::Pipe) {
            let rhs = self.disjunction()?;
            return Ok(Formula::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let lhs = self.until()?;
        if self.eat(&Tok::Amp) {
            let rhs = self.conjunction()?;
            return Ok(Formula::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        if self.is_keyword("U") {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        for (kw, ctor) in [
            ("G", Formula::always as fn(Formula) -> Formula),
            ("F", Formula::eventually),
            ("N", Formula::next),
        ] {
            if self.is_keyword(kw) {
                self.bump();
                return Ok(ctor(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            let attempt = self.implication().and_then(|f| {
                self.expect(Tok::RParen)?;
                Ok(f)
            });
            match attempt {
                // A parenthesised formula must not be followed by term syntax.
                Ok(f) if !self.continues_term() => return Ok(f),
                Ok(_) => self.pos = save,
                Err(first) => {
                    self.pos = save;
                    return self.atom().map_err(|second| furthest(first, second));
                }
            }
        }
        self.atom()
    }

    fn continues_term(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Cmp(_) | Tok::Plus | Tok::Minus | Tok::Star | Tok::Dot
        )
    }

    fn atom(&mut self) -> PResult<Formula> {
        let start = self.offset();
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Cmp(c) => *c,
            _ => return self.fail("a comparison operator"),
        };
        self.bump();
        let rhs = self.term()?;
        let f = Formula::atom(lhs, op, rhs);
        f.check(&self.schema).map_err(|e| e.at(start))?;
        Ok(f)
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = lhs.plus(self.product()?);
            } else if self.eat(&Tok::Minus) {
                lhs = lhs.minus(self.product()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let negative = self.eat(&Tok::Minus);
        if let Tok::Number(x) = *self.peek() {
            self.bump();
            let c = if negative { -x } else { x };
            if self.eat(&Tok::Star) {
                return Ok(Term::Scale(c, Box::new(self.postfix()?)));
            }
            return self.selectors(Term::Scalar(c));
        }
        let t = self.postfix()?;
        Ok(if negative { Term::Scale(-1.0, Box::new(t)) } else { t })
    }

    fn postfix(&mut self) -> PResult<Term> {
        let base = self.operand()?;
        self.selectors(base)
    }

    fn selectors(&mut self, mut t: Term) -> PResult<Term> {
        while self.eat(&Tok::Dot) {
            let tok = self.bump();
            t = match &tok {
                Tok::Ident(name) => match name.as_str() {
                    "x" => t.component(0),
                    "y" => t.component(1),
                    "z" => t.component(2),
                    "roll" => t.component(3),
                    "pitch" => t.component(4),
                    "yaw" => t.component(5),
                    "xyz" => Term::Slice(Box::new(t), 0, 3),
                    "rpy" => Term::Slice(Box::new(t), 3, 3),
                    _ => {
                        self.unbump(&tok);
                        return self.fail("an axis selector (x, y, z, roll, pitch, yaw, xyz, rpy)");
                    }
                },
                Tok::Number(n) if n.fract() == 0.0 && *n >= 0.0 => {
                    let start = *n as usize;
                    if self.eat(&Tok::Colon) {
                        let len_tok = self.bump();
                        match len_tok {
                            Tok::Number(len) if len.fract() == 0.0 && len >= 1.0 => {
                                Term::Slice(Box::new(t), start, len as usize)
                            }
                            _ => {
                                self.unbump(&len_tok);
                                return self.fail("a slice length");
                            }
                        }
                    } else {
                        t.component(start)
                    }
                }
                _ => {
                    self.unbump(&tok);
                    return self.fail("an axis selector");
                }
            };
        }
        Ok(t)
    }

    fn operand(&mut self) -> PResult<Term> {
        let start = self.offset();
        let tok = self.bump();
        match tok {
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBracket => {
                let mut xs = vec![self.signed_number()?];
                while self.eat(&Tok::Comma) {
                    xs.push(self.signed_number()?);
                }
                self.expect(Tok::RBracket)?;
                Ok(Term::Vector(xs))
            }
            Tok::Number(x) => Ok(Term::Scalar(x)),
            Tok::Ident(name) => match name.as_str() {
                "p" => Ok(Term::Pos),
                "dp" => Ok(Term::Vel),
                "speed" => Ok(Term::Vel.norm()),
                "sqnorm" | "norm" => {
                    self.expect(Tok::LParen)?;
                    let inner = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(if name == "sqnorm" { inner.sqnorm() } else { inner.norm() })
                }
                _ => match object_index(&name) {
                    Some(k) if k < self.schema.objects => Ok(Term::Object(k)),
                    _ => Err(LtlError::UnknownIdentifier {
                        name,
                        offset: Some(start),
                    }),
                },
            },
            other => {
                self.unbump(&other);
                self.fail("a term")
            }
        }
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let negative = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Number(x) => {
                self.bump();
                Ok(if negative { -x } else { x })
            }
            _ => self.fail("a number"),
        }
    }
}

fn object_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('o')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}

fn furthest(a: LtlError, b: LtlError) -> LtlError {
    match (&a, &b) {
        (LtlError::Syntax { offset: oa, .. }, LtlError::Syntax { offset: ob, .. }) if oa > ob => a,
        (LtlError::Syntax { .. }, _) => b,
        _ => a,
    }
}

/// Parses specification text into a formula checked against `schema`.
pub fn parse_formula(text: &str, schema: &InputSchema) -> Result<Formula, LtlError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        src: text,
        toks,
        pos: 0,
        schema: *schema,
    };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return p.fail("end of input or a binary operator");
    }
    Ok(f)
}
