//! Text grammar for generator expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | primary
//! primary := number | number 'i' | 'i' | atom | '(' expr ')'
//! atom    := 'a(' m ')' | 'adag(' m ')' | 'E(' m ',' m ')' | 'Edag(' m ',' m ')'
//!          | 'H(' m ',' m ')' | 'Mp(' m ',' m ')' | 'Mp_tilde(' m ',' m ')'
//!          | 'Mq(' m ',' m ')' | 'Mq_tilde(' m ',' m ')' | 'L(' p ',' q ')'
//!          | 'K1' | 'K2' | 'K3' | 'Km' | 'Kp' | 'I'
//!          | 'BgKm(' twok ')' | 'BgKp(' twok ')' | 'BgK3(' twok ')'
//!          | 'Sum(' list ')' | 'Product(' list ')' | 'Scale(' real ',' real ',' expr ')'
//! list    := (expr (',' expr)*)?
//! real    := '-'? number
//! ```
//!
//! Mode indices are 1-based. `Display` on [`GeneratorSpec`] prints the
//! function-call form, which parses back to an identical value.

use num_complex::Complex64 as C64;

use super::GeneratorSpec;
use crate::error::{Error, Result};

const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Imag(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        pos,
        msg: msg.into(),
    })
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_char = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b',' => out.push((start, Tok::Comma)),
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = match text.parse() {
                    Ok(v) => v,
                    Err(_) => return err(start, format!("malformed number '{text}'")),
                };
                if !value.is_finite() {
                    return err(start, format!("number '{text}' is not finite"));
                }
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !(i + 1 < bytes.len() && ident_char(bytes[i + 1]));
                if imaginary {
                    i += 1;
                    out.push((start, Tok::Imag(value)));
                } else {
                    out.push((start, Tok::Num(value, text.to_string())));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && ident_char(bytes[i]) {
                    i += 1;
                }
                let word = &src[start..i];
                if word == "i" {
                    out.push((start, Tok::Imag(1.0)));
                } else {
                    out.push((start, Tok::Ident(word.to_string())));
                }
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return err(start, format!("unexpected character '{ch}'"));
            }
        }
        i += 1;
    }
    Ok(out)
}

enum Value {
    Scalar(C64),
    Op(GeneratorSpec),
}

impl Value {
    fn into_op(self) -> GeneratorSpec {
        match self {
            Value::Scalar(c) => GeneratorSpec::Scale(c, Box::new(GeneratorSpec::Identity)),
            Value::Op(g) => g,
        }
    }

    fn negate(self) -> Value {
        match self {
            Value::Scalar(c) => Value::Scalar(-c),
            Value::Op(GeneratorSpec::Scale(c, g)) => Value::Op(GeneratorSpec::Scale(-c, g)),
            Value::Op(g) => Value::Op(GeneratorSpec::Scale(C64::new(-1.0, 0.0), Box::new(g))),
        }
    }
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    at: usize,
    end: usize,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let pos = self.pos();
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => err(pos, format!("expected {what}, found {t:?}")),
            None => err(pos, format!("expected {what}, found end of input")),
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return err(self.pos(), format!("nesting deeper than {MAX_DEPTH}"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Value> {
        self.enter()?;
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    terms.push(self.term()?.negate());
                }
                _ => break,
            }
        }
        self.depth -= 1;
        if terms.len() == 1 {
            return Ok(terms.pop().expect("one term"));
        }
        if terms.iter().all(|t| matches!(t, Value::Scalar(_))) {
            let s = terms
                .into_iter()
                .map(|t| match t {
                    Value::Scalar(c) => c,
                    Value::Op(_) => unreachable!(),
                })
                .sum();
            return Ok(Value::Scalar(s));
        }
        Ok(Value::Op(GeneratorSpec::Sum(
            terms.into_iter().map(Value::into_op).collect(),
        )))
    }

    fn term(&mut self) -> Result<Value> {
        let mut coef = C64::new(1.0, 0.0);
        let mut scaled = false;
        let mut ops = Vec::new();
        let mut push = |v: Value, coef: &mut C64, scaled: &mut bool| match v {
            Value::Scalar(c) => {
                *coef *= c;
                *scaled = true;
            }
            Value::Op(g) => ops.push(g),
        };
        push(self.unary()?, &mut coef, &mut scaled);
        while let Some(Tok::Star) = self.peek() {
            self.at += 1;
            push(self.unary()?, &mut coef, &mut scaled);
        }
        let op = match ops.len() {
            0 => return Ok(Value::Scalar(coef)),
            1 => ops.pop().expect("one factor"),
            _ => GeneratorSpec::Product(ops),
        };
        if scaled {
            Ok(Value::Op(GeneratorSpec::Scale(coef, Box::new(op))))
        } else {
            Ok(Value::Op(op))
        }
    }

    fn unary(&mut self) -> Result<Value> {
        if let Some(Tok::Minus) = self.peek() {
            self.at += 1;
            self.enter()?;
            let v = self.unary()?.negate();
            self.depth -= 1;
            return Ok(v);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Value> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(v, _)) => Ok(Value::Scalar(C64::new(v, 0.0))),
            Some(Tok::Imag(v)) => Ok(Value::Scalar(C64::new(0.0, v))),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => self.atom(&name, pos).map(Value::Op),
            Some(t) => err(pos, format!("unexpected token {t:?}")),
            None => err(pos, "unexpected end of input"),
        }
    }

    fn integer(&mut self, what: &str) -> Result<usize> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(_, text)) if text.bytes().all(|b| b.is_ascii_digit()) => {
                match text.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= u32::MAX as usize => Ok(v),
                    _ => err(pos, format!("{what} must be a positive integer, got '{text}'")),
                }
            }
            _ => err(pos, format!("expected {what}")),
        }
    }

    fn real(&mut self) -> Result<f64> {
        let neg = if let Some(Tok::Minus) = self.peek() {
            self.at += 1;
            true
        } else {
            false
        };
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(v, _)) => Ok(if neg { -v } else { v }),
            _ => err(pos, "expected a real number"),
        }
    }

    fn pair(&mut self, what: &str) -> Result<(usize, usize)> {
        self.expect(Tok::LParen, "'('")?;
        let i = self.integer(what)?;
        self.expect(Tok::Comma, "','")?;
        let j = self.integer(what)?;
        self.expect(Tok::RParen, "')'")?;
        Ok((i, j))
    }

    fn single(&mut self, what: &str) -> Result<usize> {
        self.expect(Tok::LParen, "'('")?;
        let i = self.integer(what)?;
        self.expect(Tok::RParen, "')'")?;
        Ok(i)
    }

    fn list(&mut self) -> Result<Vec<GeneratorSpec>> {
        self.expect(Tok::LParen, "'('")?;
        let mut items = Vec::new();
        if let Some(Tok::RParen) = self.peek() {
            self.at += 1;
            return Ok(items);
        }
        loop {
            items.push(self.expr()?.into_op());
            let pos = self.pos();
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(items),
                _ => return err(pos, "expected ',' or ')'"),
            }
        }
    }

    fn atom(&mut self, name: &str, pos: usize) -> Result<GeneratorSpec> {
        use GeneratorSpec::*;
        let g = match name {
            "I" => Identity,
            "K1" => K1,
            "K2" => K2,
            "K3" => K3,
            "Km" => Kminus,
            "Kp" => Kplus,
            "a" => Annihilate(self.single("mode index")?),
            "adag" => Create(self.single("mode index")?),
            "E" => {
                let (i, j) = self.pair("mode index")?;
                E(i, j)
            }
            "Edag" => {
                let (i, j) = self.pair("mode index")?;
                Edag(i, j)
            }
            "H" => {
                let (i, j) = self.pair("mode index")?;
                H(i, j)
            }
            "Mp" => {
                let (i, j) = self.pair("mode index")?;
                Mp(i, j)
            }
            "Mp_tilde" => {
                let (i, j) = self.pair("mode index")?;
                MpTilde(i, j)
            }
            "Mq" => {
                let (i, j) = self.pair("mode index")?;
                Mq(i, j)
            }
            "Mq_tilde" => {
                let (i, j) = self.pair("mode index")?;
                MqTilde(i, j)
            }
            "L" => {
                let (p, q) = self.pair("split size")?;
                L { p, q }
            }
            "BgKm" | "BgKp" | "BgK3" => {
                let two_k = self.single("2k")? as u32;
                match name {
                    "BgKm" => BgLower { two_k },
                    "BgKp" => BgRaise { two_k },
                    _ => BgWeight { two_k },
                }
            }
            "Sum" => {
                self.enter()?;
                let v = Sum(self.list()?);
                self.depth -= 1;
                v
            }
            "Product" => {
                self.enter()?;
                let v = Product(self.list()?);
                self.depth -= 1;
                v
            }
            "Scale" => {
                self.enter()?;
                self.expect(Tok::LParen, "'('")?;
                let re = self.real()?;
                self.expect(Tok::Comma, "','")?;
                let im = self.real()?;
                self.expect(Tok::Comma, "','")?;
                let inner = self.expr()?.into_op();
                self.expect(Tok::RParen, "')'")?;
                self.depth -= 1;
                Scale(C64::new(re, im), Box::new(inner))
            }
            other => return err(pos, format!("unknown generator '{other}'")),
        };
        Ok(g)
    }
}

/// Parse a generator expression. A bare scalar parses to `Scale(c, I)`.
pub fn parse_generator(src: &str) -> Result<GeneratorSpec> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return err(0, "empty expression");
    }
    let mut p = Parser {
        toks: &toks,
        at: 0,
        end: src.len(),
        depth: 0,
    };
    let v = p.expr()?;
    if p.at < toks.len() {
        return err(p.pos(), "trailing input");
    }
    Ok(v.into_op())
}

impl std::str::FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_generator(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use GeneratorSpec::*;

    #[test]
    fn parses_atoms() {
        assert_eq!(parse_generator("a(1)").unwrap(), Annihilate(1));
        assert_eq!(parse_generator(" E(1, 2) ").unwrap(), E(1, 2));
        assert_eq!(parse_generator("Mq_tilde(3,4)").unwrap(), MqTilde(3, 4));
        assert_eq!(parse_generator("BgK3(3)").unwrap(), BgWeight { two_k: 3 });
        assert_eq!(parse_generator("L(2,1)").unwrap(), L { p: 2, q: 1 });
    }

    #[test]
    fn infix_forms() {
        let g = parse_generator("0.5*a(1)*adag(1) - i*H(1,2) + 2").unwrap();
        let want = Sum(vec![
            Scale(C64::new(0.5, 0.0), Box::new(Product(vec![Annihilate(1), Create(1)]))),
            Scale(C64::new(-0.0, -1.0), Box::new(H(1, 2))),
            Scale(C64::new(2.0, 0.0), Box::new(Identity)),
        ]);
        assert_eq!(g, want);
        assert_eq!(parse_generator("-K1").unwrap(), Scale(C64::new(-1.0, 0.0), Box::new(K1)));
        assert_eq!(
            parse_generator("2.5i").unwrap(),
            Scale(C64::new(0.0, 2.5), Box::new(Identity))
        );
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "Sum(K1,Scale(-0.25,1e-7,Product(Km,Kp)),Sum())",
            "Product(E(1,2),Edag(2,1),H(2,2))",
            "Scale(-0.0,5e-324,Mp_tilde(1,2))",
            "0.1*a(1) + 3*(adag(2) - I)",
        ] {
            let g = parse_generator(src).unwrap();
            let again = parse_generator(&g.to_string()).unwrap();
            assert_eq!(g, again, "{src}");
            assert_eq!(g.to_string(), again.to_string());
        }
    }

    #[test]
    fn rejects_bad_input() {
        for src in [
            "", "a(0)", "a(1.5)", "E(1)", "Foo", "a(1) +", "(K1", "K1)", "1e999", "Scale(1,K1)",
            "a(1) $", "BgKm(0)",
        ] {
            assert!(parse_generator(src).is_err(), "{src:?}");
        }
        let deep = "(".repeat(200) + "K1" + &")".repeat(200);
        assert!(matches!(parse_generator(&deep), Err(Error::Parse { .. })));
    }

    #[test]
    fn error_positions() {
        match parse_generator("K1 + Zz") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
    }
}
