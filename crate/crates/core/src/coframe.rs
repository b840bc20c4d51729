//! Exterior algebra of scalar- and matrix-valued forms in the fixed coframe
//! basis `(theta, theta^1, theta^2)`.
//!
//! Forms are stored by basis coefficients only; a coefficient is either a
//! constant or a grid field, and constants broadcast implicitly to the common
//! grid. The module culminates in the transgression 3-form
//! `(1/24 pi^2) tr(pi ^ pi ^ pi)` of an sl(3,R)-valued connection matrix.

use crate::field::{FieldError, GridSpec, PeriodicScalarField};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoframeError {
    #[error("grid mismatch between form coefficients: {0:?} vs {1:?}")]
    GridMismatch(GridSpec, GridSpec),
    #[error("matrix is not sl(3)-valued: max |trace coefficient| = {0:.3e}")]
    NotTraceFree(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A form coefficient: a constant or a sampled field.
#[derive(Debug, Clone)]
pub enum Coeff {
    Const(f64),
    Field(PeriodicScalarField),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Const(0.0)
    }

    pub fn grid(&self) -> Option<GridSpec> {
        match self {
            Coeff::Const(_) => None,
            Coeff::Field(f) => Some(f.spec()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Coeff::Const(c) => c.abs(),
            Coeff::Field(f) => f.max_abs(),
        }
    }

    /// Value as a constant, if it is one.
    pub fn as_const(&self) -> Option<f64> {
        match self {
            Coeff::Const(c) => Some(*c),
            Coeff::Field(_) => None,
        }
    }

    pub fn to_field(&self, spec: GridSpec) -> PeriodicScalarField {
        match self {
            Coeff::Const(c) => PeriodicScalarField::constant(spec, *c),
            Coeff::Field(f) => f.clone(),
        }
    }

    fn combine(
        a: &Coeff,
        b: &Coeff,
        op: impl Fn(f64, f64) -> f64,
    ) -> Result<Coeff, CoframeError> {
        Ok(match (a, b) {
            (Coeff::Const(x), Coeff::Const(y)) => Coeff::Const(op(*x, *y)),
            (Coeff::Const(x), Coeff::Field(g)) => Coeff::Field(g.map(|v| op(*x, v))),
            (Coeff::Field(f), Coeff::Const(y)) => Coeff::Field(f.map(|v| op(v, *y))),
            (Coeff::Field(f), Coeff::Field(g)) => {
                if f.spec() != g.spec() {
                    return Err(CoframeError::GridMismatch(f.spec(), g.spec()));
                }
                Coeff::Field(f.zip(g, &op))
            }
        })
    }

    pub fn mul(a: &Coeff, b: &Coeff) -> Result<Coeff, CoframeError> {
        Coeff::combine(a, b, |x, y| x * y)
    }

    pub fn add(a: &Coeff, b: &Coeff) -> Result<Coeff, CoframeError> {
        Coeff::combine(a, b, |x, y| x + y)
    }

    pub fn sub(a: &Coeff, b: &Coeff) -> Result<Coeff, CoframeError> {
        Coeff::combine(a, b, |x, y| x - y)
    }

    pub fn scale(&self, c: f64) -> Coeff {
        match self {
            Coeff::Const(x) => Coeff::Const(c * x),
            Coeff::Field(f) => Coeff::Field(f.scale(c)),
        }
    }
}

impl From<f64> for Coeff {
    fn from(c: f64) -> Self {
        Coeff::Const(c)
    }
}

impl From<PeriodicScalarField> for Coeff {
    fn from(f: PeriodicScalarField) -> Self {
        Coeff::Field(f)
    }
}

/// 1-form `c0 theta + c1 theta^1 + c2 theta^2`.
#[derive(Debug, Clone)]
pub struct Form1 {
    pub c0: Coeff,
    pub c1: Coeff,
    pub c2: Coeff,
}

/// 2-form `c01 theta^theta1 + c02 theta^theta2 + c12 theta1^theta2`.
#[derive(Debug, Clone)]
pub struct Form2 {
    pub c01: Coeff,
    pub c02: Coeff,
    pub c12: Coeff,
}

/// Top-degree form `c012 theta ^ theta1 ^ theta2`.
#[derive(Debug, Clone)]
pub struct Form3 {
    pub c012: Coeff,
}

impl Form1 {
    pub fn new(c0: impl Into<Coeff>, c1: impl Into<Coeff>, c2: impl Into<Coeff>) -> Self {
        Form1 { c0: c0.into(), c1: c1.into(), c2: c2.into() }
    }

    pub fn zero() -> Self {
        Form1::new(0.0, 0.0, 0.0)
    }

    /// Basis coframe forms theta, theta^1, theta^2.
    pub fn basis(i: usize) -> Self {
        match i {
            0 => Form1::new(1.0, 0.0, 0.0),
            1 => Form1::new(0.0, 1.0, 0.0),
            2 => Form1::new(0.0, 0.0, 1.0),
            _ => panic!("coframe basis index out of range"),
        }
    }

    pub fn add(&self, other: &Form1) -> Result<Form1, CoframeError> {
        Ok(Form1 {
            c0: Coeff::add(&self.c0, &other.c0)?,
            c1: Coeff::add(&self.c1, &other.c1)?,
            c2: Coeff::add(&self.c2, &other.c2)?,
        })
    }

    pub fn sub(&self, other: &Form1) -> Result<Form1, CoframeError> {
        Ok(Form1 {
            c0: Coeff::sub(&self.c0, &other.c0)?,
            c1: Coeff::sub(&self.c1, &other.c1)?,
            c2: Coeff::sub(&self.c2, &other.c2)?,
        })
    }

    pub fn scale(&self, c: f64) -> Form1 {
        Form1 { c0: self.c0.scale(c), c1: self.c1.scale(c), c2: self.c2.scale(c) }
    }

    pub fn max_abs(&self) -> f64 {
        self.c0.max_abs().max(self.c1.max_abs()).max(self.c2.max_abs())
    }
}

impl Form3 {
    pub fn max_abs(&self) -> f64 {
        self.c012.max_abs()
    }
}

/// `a ^ b` for 1-forms.
pub fn wedge11(a: &Form1, b: &Form1) -> Result<Form2, CoframeError> {
    let det = |p: &Coeff, q: &Coeff, r: &Coeff, s: &Coeff| -> Result<Coeff, CoframeError> {
        Coeff::sub(&Coeff::mul(p, s)?, &Coeff::mul(q, r)?)
    };
    Ok(Form2 {
        c01: det(&a.c0, &a.c1, &b.c0, &b.c1)?,
        c02: det(&a.c0, &a.c2, &b.c0, &b.c2)?,
        c12: det(&a.c1, &a.c2, &b.c1, &b.c2)?,
    })
}

/// `a ^ b` for a 1-form against a 2-form.
pub fn wedge12(a: &Form1, b: &Form2) -> Result<Form3, CoframeError> {
    let t0 = Coeff::mul(&a.c0, &b.c12)?;
    let t1 = Coeff::mul(&a.c1, &b.c02)?;
    let t2 = Coeff::mul(&a.c2, &b.c01)?;
    Ok(Form3 { c012: Coeff::add(&Coeff::sub(&t0, &t1)?, &t2)? })
}

/// 3x3 matrix of 1-forms representing the pulled-back sl(3,R)-valued
/// connection.
#[derive(Debug, Clone)]
pub struct ConnectionMatrix {
    pub entries: [[Form1; 3]; 3],
}

impl ConnectionMatrix {
    pub fn zero() -> Self {
        ConnectionMatrix {
            entries: std::array::from_fn(|_| std::array::from_fn(|_| Form1::zero())),
        }
    }

    /// Max absolute value of the coefficient-wise trace; zero for an
    /// sl(3,R)-valued matrix.
    pub fn trace_max_abs(&self) -> Result<f64, CoframeError> {
        let mut worst: f64 = 0.0;
        let e = &self.entries;
        let tr0 = Coeff::add(&Coeff::add(&e[0][0].c0, &e[1][1].c0)?, &e[2][2].c0)?;
        let tr1 = Coeff::add(&Coeff::add(&e[0][0].c1, &e[1][1].c1)?, &e[2][2].c1)?;
        let tr2 = Coeff::add(&Coeff::add(&e[0][0].c2, &e[1][1].c2)?, &e[2][2].c2)?;
        worst = worst.max(tr0.max_abs()).max(tr1.max_abs()).max(tr2.max_abs());
        Ok(worst)
    }

    pub fn check_traceless(&self, tol: f64) -> Result<(), CoframeError> {
        let t = self.trace_max_abs()?;
        if t > tol {
            Err(CoframeError::NotTraceFree(t))
        } else {
            Ok(())
        }
    }

    /// Conjugation `M^-1 pi M` by a constant invertible matrix.
    pub fn conjugate(&self, m: &[[f64; 3]; 3]) -> Result<ConnectionMatrix, CoframeError> {
        let minv = invert3(m).expect("conjugation matrix must be invertible");
        let mut out = ConnectionMatrix::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Form1::zero();
                for p in 0..3 {
                    for q in 0..3 {
                        let c = minv[i][p] * m[q][j];
                        if c != 0.0 {
                            acc = acc.add(&self.entries[p][q].scale(c))?;
                        }
                    }
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    Some([
        [cof(1, 1, 2, 2) * inv_det, -cof(0, 1, 2, 2) * inv_det, cof(0, 1, 1, 2) * inv_det],
        [-cof(1, 0, 2, 2) * inv_det, cof(0, 0, 2, 2) * inv_det, -cof(0, 0, 1, 2) * inv_det],
        [cof(1, 0, 2, 1) * inv_det, -cof(0, 0, 2, 1) * inv_det, cof(0, 0, 1, 1) * inv_det],
    ])
}

/// The transgression 3-form `(1/24 pi^2) tr(pi ^ pi ^ pi)`.
///
/// The matrix wedge is assembled entrywise: `wedge11` on the first two
/// factors and `wedge12` against the third, summed over all index cycles.
pub fn transgression3(pi: &ConnectionMatrix) -> Result<Form3, CoframeError> {
    let mut acc = Coeff::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let two = wedge11(&pi.entries[i][j], &pi.entries[j][k])?;
                let three = wedge12(&pi.entries[k][i], &two)?;
                // pi_ij ^ pi_jk ^ pi_ki = pi_ki ^ (pi_ij ^ pi_jk) for 1-forms
                acc = Coeff::add(&acc, &three.c012)?;
            }
        }
    }
    Ok(Form3 { c012: acc.scale(1.0 / (24.0 * PI * PI)) })
}
