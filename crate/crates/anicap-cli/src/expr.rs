//! Arithmetic over the cap coordinates `ξ1..ξ{n+1}`, `ℓ`, the kernel
//! functions `k1..kn` and constants.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names: `ξ1`, `xi1`, `ξ₁` (coordinates), `ℓ` or `ell`, `k1` (kernel),
//! `pi`, and the functions `sqrt exp ln sin cos abs`.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Xi(usize),
    Ell,
    Kernel(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at character {}", self.msg, self.pos)
    }
}

/// Values a compiled expression can read at one node.
pub struct Vars<'a> {
    pub xi: &'a [f64; 3],
    pub ell: f64,
    pub kernel: &'a [f64],
}

impl Expr {
    /// Parses and checks that every coordinate and kernel index exists in
    /// dimension `n`.
    pub fn parse(src: &str, n: usize) -> Result<Expr, ParseError> {
        let chars: Vec<char> = src.chars().collect();
        let mut p = Parser { c: &chars, i: 0, n };
        let e = p.expr()?;
        p.skip_ws();
        if p.i < chars.len() {
            return Err(p.err(format!("unexpected '{}'", chars[p.i])));
        }
        Ok(e)
    }

    pub fn eval(&self, v: &Vars<'_>) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Xi(i) => v.xi[*i],
            Expr::Ell => v.ell,
            Expr::Kernel(a) => v.kernel[*a],
            Expr::Neg(e) => -e.eval(v),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(v), b.eval(v));
                match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Div => x / y,
                    Op::Pow => {
                        if y.fract() == 0.0 && y.abs() <= 64.0 {
                            x.powi(y as i32)
                        } else {
                            x.powf(y)
                        }
                    }
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval(v);
                match f {
                    Func::Sqrt => x.sqrt(),
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Abs => x.abs(),
                }
            }
        }
    }

    pub fn uses_kernel(&self) -> bool {
        match self {
            Expr::Kernel(_) => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses_kernel(),
            Expr::Bin(_, a, b) => a.uses_kernel() || b.uses_kernel(),
            _ => false,
        }
    }
}

struct Parser<'a> {
    c: &'a [char],
    i: usize,
    n: usize,
}

impl Parser<'_> {
    fn err(&self, msg: String) -> ParseError {
        ParseError { pos: self.i, msg }
    }

    fn skip_ws(&mut self) {
        while self.i < self.c.len() && self.c[self.i].is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.c.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(ch @ ('+' | '-')) = self.peek() {
            self.i += 1;
            let rhs = self.term()?;
            let op = if ch == '+' { Op::Add } else { Op::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(ch @ ('*' | '/' | '·')) = self.peek() {
            self.i += 1;
            let rhs = self.unary()?;
            let op = if ch == '/' { Op::Div } else { Op::Mul };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('-' | '−') => {
                self.i += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.i += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression".into())),
            Some('(') => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'".into()));
                }
                self.i += 1;
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == '.' => self.number(),
            Some(ch) if ch.is_alphabetic() => self.name(),
            Some(ch) => Err(self.err(format!("unexpected '{ch}'"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.i;
        let c = self.c;
        let mut j = self.i;
        while j < c.len() && (c[j].is_ascii_digit() || c[j] == '.') {
            j += 1;
        }
        if j < c.len() && (c[j] == 'e' || c[j] == 'E') {
            let mut k = j + 1;
            if k < c.len() && (c[k] == '+' || c[k] == '-') {
                k += 1;
            }
            if k < c.len() && c[k].is_ascii_digit() {
                j = k;
                while j < c.len() && c[j].is_ascii_digit() {
                    j += 1;
                }
            }
        }
        let text: String = c[start..j].iter().collect();
        self.i = j;
        text.parse::<f64>().map(Expr::Num).map_err(|_| ParseError { pos: start, msg: format!("bad number '{text}'") })
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.i;
        let c = self.c;
        let mut j = self.i;
        while j < c.len() && (c[j].is_alphanumeric() || c[j] == '_') {
            j += 1;
        }
        let raw: String = c[start..j].iter().collect();
        self.i = j;
        // subscript digits read as plain digits
        let word: String = raw
            .chars()
            .map(|ch| match ch {
                '₀'..='₉' => char::from(b'0' + (ch as u32 - '₀' as u32) as u8),
                _ => ch,
            })
            .collect();
        let index = |prefix: &str, limit: usize| -> Option<Result<usize, ParseError>> {
            let rest = word.strip_prefix(prefix)?;
            let rest = rest.strip_prefix('_').unwrap_or(rest);
            let k: usize = rest.parse().ok()?;
            Some(if k >= 1 && k <= limit {
                Ok(k - 1)
            } else {
                Err(ParseError { pos: start, msg: format!("'{raw}' is out of range (1..={limit})") })
            })
        };
        if let Some(r) = index("ξ", self.n + 1).or_else(|| index("xi", self.n + 1)) {
            return r.map(Expr::Xi);
        }
        if let Some(r) = index("k", self.n) {
            return r.map(Expr::Kernel);
        }
        match word.as_str() {
            "ℓ" | "ell" => return Ok(Expr::Ell),
            "pi" | "π" => return Ok(Expr::Num(std::f64::consts::PI)),
            _ => {}
        }
        let func = match word.as_str() {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => return Err(ParseError { pos: start, msg: format!("unknown name '{raw}'") }),
        };
        if self.peek() != Some('(') {
            return Err(self.err(format!("'{raw}' needs an argument in parentheses")));
        }
        self.i += 1;
        let arg = self.expr()?;
        if self.peek() != Some(')') {
            return Err(self.err("expected ')'".into()));
        }
        self.i += 1;
        Ok(Expr::Call(func, Box::new(arg)))
    }
}
