//! The expression language used to define structure functions from the CLI
//! and config files.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;              (* right associative *)
//! atom    = number | "pi" | variable
//!         | function "(" expr ")" | "(" expr ")" ;
//! function = "sin" | "cos" | "tan" | "atan" | "exp" | "sqrt" ;
//! variable = "x" | "y" | "alpha" | "p" ;      (* chart-restricted *)
//! ```
//!
//! Precedence is `^` above unary minus above `*`,`/` above `+`,`-`, so
//! `-2^2 = -(2^2)` and `2^3^2 = 2^(3^2) = 512`. There is no implicit
//! multiplication: `2x` is a syntax error. Error positions are byte offsets
//! into the source.

use std::fmt;
use thiserror::Error;

use crate::field::{GridSpec, PeriodicScalarField};

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("variable `{name}` at offset {offset} is not legal in the {chart} chart")]
    WrongChart { offset: usize, name: String, chart: &'static str },
    #[error("division by zero at grid node while evaluating the operator at offset {offset}")]
    DivisionByZero { offset: usize },
    #[error("non-finite value at grid node while evaluating the operator at offset {offset}")]
    NonFinite { offset: usize },
    #[error("field is not periodic along {axis}: max wrap jump {jump:.3e} exceeds {limit:.3e}")]
    NonPeriodic { axis: char, jump: f64, limit: f64 },
}

/// Which variables an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Variables x, y, alpha.
    Torus,
    /// Variables x, y, p.
    PChart,
}

impl Chart {
    fn name(self) -> &'static str {
        match self {
            Chart::Torus => "torus",
            Chart::PChart => "p",
        }
    }

    fn allows(self, v: Var) -> bool {
        match self {
            Chart::Torus => matches!(v, Var::X | Var::Y | Var::Alpha),
            Chart::PChart => matches!(v, Var::X | Var::Y | Var::P),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Alpha,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Sqrt,
}

impl Func {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Atan => v.atan(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Parsed expression node. Every node keeps the byte offset it started at so
/// evaluation errors can point back into the source.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num { value: f64, offset: usize },
    Pi { offset: usize },
    Var { var: Var, offset: usize },
    Neg { arg: Box<ExprAst>, offset: usize },
    Bin { op: BinOp, lhs: Box<ExprAst>, rhs: Box<ExprAst>, offset: usize },
    Fun { func: Func, arg: Box<ExprAst>, offset: usize },
}

impl ExprAst {
    pub fn offset(&self) -> usize {
        match self {
            ExprAst::Num { offset, .. }
            | ExprAst::Pi { offset }
            | ExprAst::Var { offset, .. }
            | ExprAst::Neg { offset, .. }
            | ExprAst::Bin { offset, .. }
            | ExprAst::Fun { offset, .. } => *offset,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ExprAst::Num { .. } | ExprAst::Pi { .. } | ExprAst::Var { .. } => 1,
            ExprAst::Neg { arg, .. } | ExprAst::Fun { arg, .. } => 1 + arg.depth(),
            ExprAst::Bin { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }

    /// Evaluate at a point. `vars = (x, y, alpha-or-p)`; the chart decided at
    /// parse time which third variable is legal, both map to the same slot.
    pub fn eval(&self, x: f64, y: f64, third: f64) -> Result<f64, ExprError> {
        match self {
            ExprAst::Num { value, .. } => Ok(*value),
            ExprAst::Pi { .. } => Ok(std::f64::consts::PI),
            ExprAst::Var { var, .. } => Ok(match var {
                Var::X => x,
                Var::Y => y,
                Var::Alpha | Var::P => third,
            }),
            ExprAst::Neg { arg, .. } => Ok(-arg.eval(x, y, third)?),
            ExprAst::Fun { func, arg, offset } => {
                let v = func.apply(arg.eval(x, y, third)?);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ExprError::NonFinite { offset: *offset })
                }
            }
            ExprAst::Bin { op, lhs, rhs, offset } => {
                let a = lhs.eval(x, y, third)?;
                let b = rhs.eval(x, y, third)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(ExprError::DivisionByZero { offset: *offset });
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                };
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ExprError::NonFinite { offset: *offset })
                }
            }
        }
    }
}

impl fmt::Display for ExprAst {
    /// Fully parenthesized printer; `parse(print(ast))` is the identity on
    /// structure.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Num { value, .. } => write!(f, "{value:?}"),
            ExprAst::Pi { .. } => write!(f, "pi"),
            ExprAst::Var { var, .. } => match var {
                Var::X => write!(f, "x"),
                Var::Y => write!(f, "y"),
                Var::Alpha => write!(f, "alpha"),
                Var::P => write!(f, "p"),
            },
            ExprAst::Neg { arg, .. } => write!(f, "(-{arg})"),
            ExprAst::Fun { func, arg, .. } => write!(f, "{}({arg})", func.name()),
            ExprAst::Bin { op, lhs, rhs, .. } => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({lhs}{sym}{rhs})")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    chart: Chart,
}

/// Parse an expression for the given chart.
pub fn parse(src: &str, chart: Chart) -> Result<ExprAst, ExprError> {
    let mut p = Parser { src, bytes: src.as_bytes(), pos: 0, chart };
    p.skip_ws();
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(ExprError::Syntax {
            offset: p.pos,
            msg: format!("unexpected trailing input `{}`", &p.src[p.pos..]),
        });
    }
    Ok(ast)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let offset = self.pos;
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = ExprAst::Bin { op: BinOp::Add, lhs: Box::new(lhs), rhs: Box::new(rhs), offset };
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = ExprAst::Bin { op: BinOp::Sub, lhs: Box::new(lhs), rhs: Box::new(rhs), offset };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            let offset = self.pos;
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    lhs = ExprAst::Bin { op: BinOp::Mul, lhs: Box::new(lhs), rhs: Box::new(rhs), offset };
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    lhs = ExprAst::Bin { op: BinOp::Div, lhs: Box::new(lhs), rhs: Box::new(rhs), offset };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            let offset = self.pos;
            self.pos += 1;
            let arg = self.unary()?;
            return Ok(ExprAst::Neg { arg: Box::new(arg), offset });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            let offset = self.pos;
            self.pos += 1;
            self.skip_ws();
            // right associative; exponent may carry a unary minus
            let exp = self.unary()?;
            return Ok(ExprAst::Bin {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
                offset,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        self.skip_ws();
        let offset = self.pos;
        match self.peek() {
            None => Err(ExprError::Syntax { offset, msg: "unexpected end of input".into() }),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(ExprError::Syntax { offset: self.pos, msg: "expected `)`".into() })
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(ExprError::Syntax {
                offset,
                msg: format!("unexpected character `{}`", c as char),
            }),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ExprError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                // exponent part: e[+-]?digits
                let mut probe = self.pos + 1;
                if matches!(self.bytes.get(probe), Some(b'+') | Some(b'-')) {
                    probe += 1;
                }
                if matches!(self.bytes.get(probe), Some(d) if d.is_ascii_digit()) {
                    self.pos = probe + 1;
                    while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
                break;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(|value| ExprAst::Num { value, offset: start })
            .map_err(|_| ExprError::Syntax { offset: start, msg: format!("bad number literal `{text}`") })
    }

    fn ident(&mut self) -> Result<ExprAst, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if name == "pi" {
            return Ok(ExprAst::Pi { offset: start });
        }
        let var = match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "alpha" => Some(Var::Alpha),
            "p" => Some(Var::P),
            _ => None,
        };
        if let Some(var) = var {
            if !self.chart.allows(var) {
                return Err(ExprError::WrongChart {
                    offset: start,
                    name: name.to_string(),
                    chart: self.chart.name(),
                });
            }
            return Ok(ExprAst::Var { var, offset: start });
        }
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "atan" => Some(Func::Atan),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(func) = func {
            self.skip_ws();
            if self.peek() != Some(b'(') {
                return Err(ExprError::Syntax {
                    offset: self.pos.min(self.bytes.len()),
                    msg: format!("expected `(` after function `{name}`"),
                });
            }
            self.pos += 1;
            let arg = self.expr()?;
            self.skip_ws();
            if self.peek() != Some(b')') {
                return Err(ExprError::Syntax { offset: self.pos, msg: "expected `)`".into() });
            }
            self.pos += 1;
            return Ok(ExprAst::Fun { func, arg: Box::new(arg), offset: start });
        }
        Err(ExprError::UnknownIdent { offset: start, name: name.to_string() })
    }
}

/// Periodicity handling for [`evaluate_on_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeriodicityCheck {
    /// Collect a warning when the wrap-around continuity check fails.
    #[default]
    Warn,
    /// Fail with [`ExprError::NonPeriodic`].
    Strict,
}

/// Result of a grid evaluation, with any periodicity warnings.
pub struct GridEvaluation {
    pub field: PeriodicScalarField,
    pub warnings: Vec<String>,
}

/// Evaluate a torus-chart expression on a grid, checking wrap-around
/// continuity `|f(0) - f(period)| <= 1e-9 * scale` per axis; periodicity of
/// the input is the user's responsibility.
pub fn evaluate_on_grid(
    ast: &ExprAst,
    spec: GridSpec,
    mode: PeriodicityCheck,
) -> Result<GridEvaluation, ExprError> {
    let mut samples = Vec::with_capacity(spec.len());
    for i in 0..spec.nx {
        for j in 0..spec.ny {
            for k in 0..spec.na {
                samples.push(ast.eval(spec.x(i), spec.y(j), spec.alpha(k))?);
            }
        }
    }
    let field = PeriodicScalarField::from_samples(spec, samples)
        .expect("eval already rejected non-finite values");
    let scale = field.max_abs().max(1.0);
    let limit = 1e-9 * scale;
    let mut warnings = Vec::new();
    let subgrid = 5usize;
    let mut check_axis = |axis: char, jump: f64| -> Result<(), ExprError> {
        if jump > limit {
            match mode {
                PeriodicityCheck::Warn => {
                    warnings.push(format!(
                        "expression is not periodic along {axis}: wrap jump {jump:.3e} exceeds {limit:.3e}"
                    ));
                    Ok(())
                }
                PeriodicityCheck::Strict => Err(ExprError::NonPeriodic { axis, jump, limit }),
            }
        } else {
            Ok(())
        }
    };
    let mut jump_x: f64 = 0.0;
    let mut jump_y: f64 = 0.0;
    let mut jump_a: f64 = 0.0;
    for u in 0..subgrid {
        for v in 0..subgrid {
            let s = u as f64 / subgrid as f64;
            let t = v as f64 / subgrid as f64;
            let two_pi = 2.0 * std::f64::consts::PI;
            jump_x = jump_x.max((ast.eval(0.0, s, two_pi * t)? - ast.eval(1.0, s, two_pi * t)?).abs());
            jump_y = jump_y.max((ast.eval(s, 0.0, two_pi * t)? - ast.eval(s, 1.0, two_pi * t)?).abs());
            jump_a = jump_a.max((ast.eval(s, t, 0.0)? - ast.eval(s, t, two_pi)?).abs());
        }
    }
    check_axis('x', jump_x)?;
    check_axis('y', jump_y)?;
    check_axis('a', jump_a)?;
    Ok(GridEvaluation { field, warnings })
}
