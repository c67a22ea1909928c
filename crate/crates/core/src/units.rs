//! Parsing of dimensioned quantities such as `"0.5 ps^2/km"` into the
//! internal ps/m/W system.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponents of (time, length, power).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dimension {
    pub time: i32,
    pub length: i32,
    pub power: i32,
}

impl Dimension {
    pub const fn new(time: i32, length: i32, power: i32) -> Self {
        Self { time, length, power }
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.time + o.time, self.length + o.length, self.power + o.power)
    }

    fn pow(self, n: i32) -> Self {
        Self::new(self.time * n, self.length * n, self.power * n)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (sym, e) in [("ps", self.time), ("m", self.length), ("W", self.power)] {
            match e {
                0 => {}
                1 => parts.push(sym.to_string()),
                _ => parts.push(format!("{sym}^{e}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

/// The physical quantities accepted in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Time,
    Length,
    Power,
    /// ps²/m
    Beta2,
    /// ps³/m
    Beta3,
    /// 1/(W·m)
    Gamma,
    /// 1/m, power attenuation
    Attenuation,
    /// ps/m, inverse group velocity mismatch
    Delta,
}

impl Kind {
    pub fn dimension(self) -> Dimension {
        match self {
            Kind::Time => Dimension::new(1, 0, 0),
            Kind::Length => Dimension::new(0, 1, 0),
            Kind::Power => Dimension::new(0, 0, 1),
            Kind::Beta2 => Dimension::new(2, -1, 0),
            Kind::Beta3 => Dimension::new(3, -1, 0),
            Kind::Gamma => Dimension::new(0, -1, -1),
            Kind::Attenuation => Dimension::new(0, -1, 0),
            Kind::Delta => Dimension::new(1, -1, 0),
        }
    }
}

/// A number with a unit expression, converted to internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Dimension,
}

fn unit(sym: &str) -> Option<(f64, Dimension)> {
    const T: Dimension = Dimension::new(1, 0, 0);
    const L: Dimension = Dimension::new(0, 1, 0);
    const P: Dimension = Dimension::new(0, 0, 1);
    const ONE: Dimension = Dimension::new(0, 0, 0);
    Some(match sym {
        "fs" => (1e-3, T),
        "ps" => (1.0, T),
        "ns" => (1e3, T),
        "us" | "µs" => (1e6, T),
        "ms" => (1e9, T),
        "s" => (1e12, T),
        "nm" => (1e-9, L),
        "um" | "µm" => (1e-6, L),
        "mm" => (1e-3, L),
        "cm" => (1e-2, L),
        "m" => (1.0, L),
        "km" => (1e3, L),
        "uW" | "µW" => (1e-6, P),
        "mW" => (1e-3, P),
        "W" => (1.0, P),
        "kW" => (1e3, P),
        // power ratio in decibels, as a natural-log attenuation
        "dB" => (std::f64::consts::LN_10 / 10.0, ONE),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Mul,
    Div,
    Pow,
    Open,
    Close,
}

fn tokenize(s: &str) -> std::result::Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '*' | '·' => {
                out.push(Token::Mul);
                i += 1
            }
            '/' => {
                out.push(Token::Div);
                i += 1
            }
            '^' => {
                out.push(Token::Pow);
                i += 1
            }
            '(' => {
                out.push(Token::Open);
                i += 1
            }
            ')' => {
                out.push(Token::Close);
                i += 1
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || exp_sign || ((d == 'e' || d == 'E') && out_is_number_context(&chars, i)) {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = f64::from_str(&text).map_err(|_| format!("bad number `{text}`"))?;
                out.push(Token::Num(v));
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_alphabetic() {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

// `e` continues a number only when followed by a digit or a sign and digit.
fn out_is_number_context(chars: &[char], i: usize) -> bool {
    match chars.get(i + 1) {
        Some(d) if d.is_ascii_digit() => true,
        Some('-') | Some('+') => chars.get(i + 2).is_some_and(|d| d.is_ascii_digit()),
        _ => false,
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    // expr := term (('*' | '/' | juxtaposition) term)*
    fn expr(&mut self) -> std::result::Result<(f64, Dimension), String> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Mul) => {
                    self.pos += 1;
                    let (s, d) = self.term()?;
                    acc = (acc.0 * s, acc.1.mul(d));
                }
                Some(Token::Div) => {
                    self.pos += 1;
                    let (s, d) = self.term()?;
                    acc = (acc.0 / s, acc.1.mul(d.pow(-1)));
                }
                Some(Token::Ident(_)) | Some(Token::Open) => {
                    let (s, d) = self.term()?;
                    acc = (acc.0 * s, acc.1.mul(d));
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := factor ('^' integer)?
    fn term(&mut self) -> std::result::Result<(f64, Dimension), String> {
        let (s, d) = self.factor()?;
        if self.peek() == Some(&Token::Pow) {
            self.pos += 1;
            let n = match self.next() {
                Some(Token::Num(n)) if n.fract() == 0.0 && n.abs() < 16.0 => n as i32,
                _ => return Err("exponent must be a small integer".into()),
            };
            return Ok((s.powi(n), d.pow(n)));
        }
        Ok((s, d))
    }

    fn factor(&mut self) -> std::result::Result<(f64, Dimension), String> {
        match self.next() {
            Some(Token::Ident(name)) => unit(&name).ok_or_else(|| format!("unknown unit `{name}`")),
            Some(Token::Num(1.0)) => Ok((1.0, Dimension::default())),
            Some(Token::Open) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(t) => Err(format!("unexpected {t:?} in unit")),
            None => Err("unit expression ends early".into()),
        }
    }
}

/// Parses `"<number> <unit expression>"`.
pub fn parse_quantity(text: &str) -> std::result::Result<Quantity, String> {
    let tokens = tokenize(text.trim())?;
    let (value, rest) = match tokens.split_first() {
        Some((Token::Num(v), rest)) => (*v, rest.to_vec()),
        _ => return Err(format!("`{text}` does not start with a number")),
    };
    if rest.is_empty() {
        return Ok(Quantity { value, dimension: Dimension::default() });
    }
    let mut p = Parser { tokens: rest, pos: 0 };
    let (scale, dimension) = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input in `{text}`"));
    }
    Ok(Quantity { value: value * scale, dimension })
}

/// Parses `text` and checks that it has the dimension of `kind`.
pub fn parse_as(field: &str, text: &str, kind: Kind) -> Result<f64> {
    let q = parse_quantity(text).map_err(|reason| Error::Unit { field: field.to_string(), reason })?;
    if q.dimension != kind.dimension() {
        return Err(Error::Unit {
            field: field.to_string(),
            reason: format!("`{text}` has dimension {} but {} is expected", q.dimension, kind.dimension()),
        });
    }
    if !q.value.is_finite() {
        return Err(Error::Unit { field: field.to_string(), reason: format!("`{text}` is not finite") });
    }
    Ok(q.value)
}
