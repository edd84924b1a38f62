//! Complex arithmetic expressions for configuration values.
//!
//! Grammar: `+ - * / ^`, parentheses, unary signs, numbers, the constants
//! `pi`, `e`, `i`, `L` (model length), the coordinate `x`, and the functions
//! `exp sin cos sqrt abs re im conj`, `exp_mode(k)` (`= exp(i pi k x / L)`),
//! `const(v)` and `sample_file("path"[, comp])`.
//!
//! `sample_file` reads a CSV with header and columns `x, re_1, im_1[, re_2,
//! im_2]`, sorted by `x`, and interpolates linearly.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("{0}")]
    Eval(String),
}

type Result<T> = std::result::Result<T, ExprError>;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(Complex64),
    X,
    Length,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
    Sample(Box<Samples>, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Re,
    Im,
    Conj,
    ExpMode,
    Const,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "re" => Func::Re,
            "im" => Func::Im,
            "conj" => Func::Conj,
            "exp_mode" => Func::ExpMode,
            "const" => Func::Const,
            _ => return None,
        })
    }
}

/// Tabulated complex samples, one column pair per component.
#[derive(Debug, Clone, PartialEq)]
struct Samples {
    path: PathBuf,
    xs: Vec<f64>,
    columns: Vec<Vec<Complex64>>,
}

impl Samples {
    fn load(path: &Path) -> Result<Self> {
        let fail = |m: String| ExprError::Eval(format!("sample_file {}: {m}", path.display()));
        let mut rdr = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
        let mut xs = Vec::new();
        let mut columns: Vec<Vec<Complex64>> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| fail(e.to_string()))?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| fail(format!("row {}: {e}", row + 2)))?;
            if vals.len() < 3 || vals.len().is_multiple_of(2) {
                return Err(fail(format!(
                    "row {} has {} columns, expected x followed by re/im pairs",
                    row + 2,
                    vals.len()
                )));
            }
            let comps = (vals.len() - 1) / 2;
            if columns.is_empty() {
                columns = vec![Vec::new(); comps];
            } else if columns.len() != comps {
                return Err(fail(format!("row {} changes the column count", row + 2)));
            }
            if xs.last().is_some_and(|&last| vals[0] <= last) {
                return Err(fail(format!("x not increasing at row {}", row + 2)));
            }
            xs.push(vals[0]);
            for (c, col) in columns.iter_mut().enumerate() {
                col.push(Complex64::new(vals[1 + 2 * c], vals[2 + 2 * c]));
            }
        }
        if xs.len() < 2 {
            return Err(fail("needs at least two rows".into()));
        }
        Ok(Self {
            path: path.to_path_buf(),
            xs,
            columns,
        })
    }

    fn at(&self, comp: usize, x: f64) -> Result<Complex64> {
        let (lo, hi) = (self.xs[0], *self.xs.last().expect("two rows"));
        let tol = 1e-12 * (hi - lo);
        if x < lo - tol || x > hi + tol {
            return Err(ExprError::Eval(format!(
                "sample_file {}: x = {x} outside [{lo}, {hi}]",
                self.path.display()
            )));
        }
        let col = &self.columns[comp];
        let j = self
            .xs
            .partition_point(|&t| t <= x)
            .clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        Ok(col[j - 1] * (1.0 - t) + col[j] * t)
    }
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

/// Variables available during evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Scope {
    pub x: Option<f64>,
    pub length: Option<f64>,
}

impl Expr {
    /// Parses `text`; `sample_file` paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            base,
            end: text.len(),
        };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(ExprError::Syntax {
                pos: t.pos,
                msg: format!("unexpected {}", t.kind.describe()),
            });
        }
        Ok(Self {
            source: text.trim().to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// True when the expression does not reference `x` or samples.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) | Node::Length => true,
                Node::X | Node::Sample(..) => false,
                Node::Call(Func::ExpMode, _) => false,
                Node::Neg(a) => walk(a),
                Node::Bin(_, a, b) => walk(a) && walk(b),
                Node::Call(_, args) => args.iter().all(walk),
            }
        }
        walk(&self.root)
    }

    pub fn eval(&self, scope: Scope) -> Result<Complex64> {
        let v = eval(&self.root, scope)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Eval(format!(
                "`{}` evaluates to {v}",
                self.source
            )))
        }
    }

    /// Evaluates with `x` undefined and requires a real result.
    pub fn eval_real(&self, scope: Scope) -> Result<f64> {
        let v = self.eval(scope)?;
        if v.im != 0.0 {
            return Err(ExprError::Eval(format!(
                "`{}` must be real, got {v}",
                self.source
            )));
        }
        Ok(v.re)
    }
}

/// Shorthand for constant expressions.
pub fn eval_str(text: &str) -> Result<Complex64> {
    Expr::parse(text, Path::new("."))?.eval(Scope::default())
}

fn eval(n: &Node, s: Scope) -> Result<Complex64> {
    let re = |v: f64| Complex64::new(v, 0.0);
    Ok(match n {
        Node::Num(v) => *v,
        Node::X => re(s
            .x
            .ok_or_else(|| ExprError::Eval("x is only defined in field expressions".into()))?),
        Node::Length => re(s
            .length
            .ok_or_else(|| ExprError::Eval("L is not defined here".into()))?),
        Node::Neg(a) => -eval(a, s)?,
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, s)?, eval(b, s)?);
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => {
                    if b == Complex64::new(0.0, 0.0) {
                        return Err(ExprError::Eval("division by zero".into()));
                    }
                    a / b
                }
                _ => power(a, b),
            }
        }
        Node::Call(f, args) => {
            let v = eval(&args[0], s)?;
            match f {
                Func::Exp => v.exp(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sqrt => v.sqrt(),
                Func::Abs => re(v.norm()),
                Func::Re => re(v.re),
                Func::Im => re(v.im),
                Func::Conj => v.conj(),
                Func::Const => v,
                Func::ExpMode => {
                    let x = s
                        .x
                        .ok_or_else(|| ExprError::Eval("exp_mode needs the coordinate x".into()))?;
                    let l = s.length.unwrap_or(1.0);
                    (Complex64::new(0.0, PI * x / l) * v).exp()
                }
            }
        }
        Node::Sample(samples, comp) => {
            let x =
                s.x.ok_or_else(|| ExprError::Eval("sample_file needs the coordinate x".into()))?;
            samples.at(*comp, x)?
        }
    })
}

/// Integer powers are exact; others use the principal branch.
fn power(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= 64.0 {
        a.powi(b.re as i32)
    } else if a.im == 0.0 && a.re >= 0.0 && b.im == 0.0 {
        Complex64::new(a.re.powf(b.re), 0.0)
    } else {
        a.powc(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Ident(String),
    Str(String),
    Op(char),
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Num(v) => format!("number {v}"),
            Kind::Ident(s) => format!("identifier `{s}`"),
            Kind::Str(s) => format!("string \"{s}\""),
            Kind::Op(c) => format!("`{c}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
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
            let lit = &text[start..i];
            let v = lit.parse::<f64>().map_err(|_| ExprError::Syntax {
                pos: start,
                msg: format!("malformed number `{lit}`"),
            })?;
            out.push(Token {
                kind: Kind::Num(v),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Ident(text[start..i].to_string()),
                pos: start,
            });
        } else if c == '"' {
            let close = text[i + 1..].find('"').ok_or(ExprError::Syntax {
                pos: start,
                msg: "unterminated string".into(),
            })?;
            out.push(Token {
                kind: Kind::Str(text[i + 1..i + 1 + close].to_string()),
                pos: start,
            });
            i += close + 2;
        } else if "+-*/^(),".contains(c) {
            out.push(Token {
                kind: Kind::Op(c),
                pos: start,
            });
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                pos: start,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    base: &'a Path,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: Kind::Op(o), .. }) if *o == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, c: char) -> Result<()> {
        if self.eat_op(c) {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                pos: self.here(),
                msg: format!("expected `{c}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_op('+') {
                '+'
            } else if self.eat_op('-') {
                '-'
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_op('*') {
                '*'
            } else if self.eat_op('/') {
                '/'
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_op('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_op('^') {
            // right associative, binds tighter than unary minus on the left
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.peek().cloned().ok_or(ExprError::Syntax {
            pos: self.end,
            msg: "unexpected end of expression".into(),
        })?;
        self.pos += 1;
        match tok.kind {
            Kind::Num(v) => Ok(Node::Num(Complex64::new(v, 0.0))),
            Kind::Op('(') => {
                let inner = self.expr()?;
                self.expect_op(')')?;
                Ok(inner)
            }
            Kind::Ident(name) => self.ident(&name, tok.pos),
            other => Err(ExprError::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn ident(&mut self, name: &str, pos: usize) -> Result<Node> {
        match name {
            "pi" => return Ok(Node::Num(Complex64::new(PI, 0.0))),
            "e" => return Ok(Node::Num(Complex64::new(std::f64::consts::E, 0.0))),
            "i" => return Ok(Node::Num(Complex64::new(0.0, 1.0))),
            "x" => return Ok(Node::X),
            "L" => return Ok(Node::Length),
            "sample_file" => return self.sample_file(pos),
            _ => {}
        }
        let func = Func::lookup(name).ok_or_else(|| ExprError::Syntax {
            pos,
            msg: format!("unknown name `{name}`"),
        })?;
        self.expect_op('(')?;
        let arg = self.expr()?;
        self.expect_op(')')?;
        Ok(Node::Call(func, vec![arg]))
    }

    fn sample_file(&mut self, pos: usize) -> Result<Node> {
        self.expect_op('(')?;
        let path = match self.peek().cloned() {
            Some(Token {
                kind: Kind::Str(s), ..
            }) => {
                self.pos += 1;
                s
            }
            _ => {
                return Err(ExprError::Syntax {
                    pos: self.here(),
                    msg: "sample_file expects a quoted path".into(),
                })
            }
        };
        let comp = if self.eat_op(',') {
            match self.peek().cloned() {
                Some(Token {
                    kind: Kind::Num(v), ..
                }) if v.fract() == 0.0 && v >= 1.0 => {
                    self.pos += 1;
                    v as usize - 1
                }
                _ => {
                    return Err(ExprError::Syntax {
                        pos: self.here(),
                        msg: "component must be a positive integer".into(),
                    })
                }
            }
        } else {
            0
        };
        self.expect_op(')')?;
        let full = self.base.join(&path);
        let samples = Samples::load(&full).map_err(|e| match e {
            ExprError::Eval(msg) => ExprError::Syntax { pos, msg },
            other => other,
        })?;
        if comp >= samples.columns.len() {
            return Err(ExprError::Syntax {
                pos,
                msg: format!(
                    "{} has {} component(s), requested {}",
                    full.display(),
                    samples.columns.len(),
                    comp + 1
                ),
            });
        }
        Ok(Node::Sample(Box::new(samples), comp))
    }
}
