use super::{Expr, Func, Num, Rat};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared symbol `{name}` at offset {pos}")]
    Undeclared { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Num),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let chars: Vec<(usize, char)> = src.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.1.is_ascii_digit())) {
                let start = pos;
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_ascii_digit() || chars[j].1 == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j].1 == 'e' || chars[j].1 == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k].1 == '+' || chars[k].1 == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].1.is_ascii_digit() {
                        while k < chars.len() && chars[k].1.is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let end = chars.get(j).map_or(src.len(), |c| c.0);
                let text = &src[start..end];
                let n = literal(text).ok_or_else(|| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{}`", text),
                })?;
                lx.toks.push((Tok::Num(n), start));
                i = j;
            } else if c.is_alphabetic() || c == '_' {
                let start = pos;
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                    j += 1;
                }
                let end = chars.get(j).map_or(src.len(), |c| c.0);
                lx.toks.push((Tok::Ident(src[start..end].to_string()), start));
                i = j;
            } else if "+-*/^(),".contains(c) {
                lx.toks.push((Tok::Op(c), pos));
                i += 1;
            } else {
                return Err(ParseError::Syntax { pos, msg: format!("unexpected character `{}`", c) });
            }
        }
        lx.toks.push((Tok::End, lx.src.len()));
        Ok(lx.toks)
    }
}

/// Decimal literals become exact rationals when they fit.
fn literal(text: &str) -> Option<Num> {
    let value: f64 = text.parse().ok()?;
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(k) => (&mant[..k], &mant[k + 1..]),
        None => (mant, ""),
    };
    let digits = format!("{}{}", int_part, frac_part);
    let scale = exp - frac_part.len() as i32;
    let exact = (|| {
        let m: i64 = digits.trim_start_matches('0').parse().ok().or(Some(0))?;
        if m.abs() > 1 << 53 || scale.abs() > 18 {
            return None;
        }
        let p = 10i64.checked_pow(scale.unsigned_abs())?;
        Some(if scale >= 0 { Rat::from_integer(m.checked_mul(p)?) } else { Rat::new(m, p) })
    })();
    Some(match exact {
        Some(r) => Num::Rat(r),
        None => Num::from_f64(value),
    })
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    coords: &'a [String],
    params: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        let what = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(n) => format!("number `{}`", n),
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Op(c) => format!("`{}`", c),
        };
        Err(ParseError::Syntax { pos: self.pos(), msg: format!("{}, found {}", msg, what) })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("expected `{}`", c))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.product()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.product()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(-self.product()?);
                }
                _ => break,
            }
        }
        Ok(Expr::add_all(terms))
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    acc = acc / self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let ex = self.unary()?;
        Ok(match ex.as_num() {
            Some(n) => base.pow(n),
            None => (ex * base.ln()).exp(),
        })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::number(n))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::Op('(') {
                    let f = match name.as_str() {
                        "exp" => Some(Func::Exp),
                        "log" | "ln" => Some(Func::Log),
                        "sin" => Some(Func::Sin),
                        "cos" => Some(Func::Cos),
                        "sqrt" => None,
                        _ => {
                            return Err(ParseError::Syntax {
                                pos,
                                msg: format!("unknown function `{}`", name),
                            })
                        }
                    };
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return Ok(match f {
                        Some(f) => Expr::apply(f, arg),
                        None => arg.sqrt(),
                    });
                }
                if self.coords.contains(&name) || self.params.contains(&name) {
                    Ok(Expr::sym(&name))
                } else {
                    Err(ParseError::Undeclared { name, pos })
                }
            }
            _ => self.err("expected a number, symbol or `(`"),
        }
    }
}

/// Parse infix text over the given coordinates and parameters.
pub fn parse<S: AsRef<str>, T: AsRef<str>>(src: &str, coords: &[S], params: &[T]) -> Result<Expr, ParseError> {
    let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
    let params: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
    let toks = Lexer::run(src)?;
    let mut p = Parser { toks, at: 0, coords: &coords, params: &params };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("expected an operator");
    }
    Ok(e)
}
