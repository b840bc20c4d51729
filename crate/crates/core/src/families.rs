//! Closed-form homogeneous families: the tight-torus structures
//! `T^3_n(a,b,c,f)`, the SU(2) family, and the flat Heisenberg model.
//!
//! Each family carries analytic invariants and routes its constant enriched
//! data through the generic evaluator of the section-level invariant
//! integrand, so the analytic value doubles as an oracle for the connection
//! machinery. The tight torus additionally assembles a constant connection
//! matrix and runs it through the full transgression engine.

use crate::coframe::{transgression3, CoframeError, ConnectionMatrix, Form1};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("determinant constraint violated: |{0} - 1| > 1e-12")]
    Determinant(f64),
    #[error("tight torus winding number must be nonzero")]
    ZeroWinding,
}

/// Constant curvature data of an enriched structure at a section, enough to
/// evaluate the invariant integrand
///
/// ```text
/// 8 pi^2 mu = [ n1 - (3/4) S0 + 2 tau12 tau21
///               - ((3/2) S1 + 6C) w2 + ((3/2) S2 + 6D) w1 - (9/2) S w0 ] * Vol
/// ```
///
/// where `w = w0 omega + w1 omega^1 + w2 omega^2` at the section and `Vol`
/// is the oriented volume of `omega ^ omega^1 ^ omega^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantEnrichedData {
    pub tau12: f64,
    pub tau21: f64,
    pub c: f64,
    pub d: f64,
    pub s: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub n1: f64,
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl ConstantEnrichedData {
    /// Coefficient of `omega ^ omega^1 ^ omega^2` in `8 pi^2 s* TC_2(pi)`.
    pub fn invariant_integrand(&self) -> f64 {
        self.n1 - 0.75 * self.s0 + 2.0 * self.tau12 * self.tau21
            - (1.5 * self.s1 + 6.0 * self.c) * self.w2
            + (1.5 * self.s2 + 6.0 * self.d) * self.w1
            - 4.5 * self.s * self.w0
    }

    /// Global invariant for the given oriented total volume.
    pub fn mu(&self, oriented_volume: f64) -> f64 {
        self.invariant_integrand() * oriented_volume / (8.0 * PI * PI)
    }
}

/// Path structure on the tight contact torus `theta = cos(2 pi n t) dx -
/// sin(2 pi n t) dy`, with the line fields rotated by a constant
/// determinant-one matrix `[[a, b], [c, f]]`.
#[derive(Debug, Clone, Copy)]
pub struct TightTorusStructure {
    pub n: i32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub f: f64,
}

/// Invariant report for a closed-form family member.
#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub q1: f64,
    pub q2: f64,
    pub mu_analytic: f64,
    pub mu_numeric: f64,
    pub flat: bool,
    pub data: ConstantEnrichedData,
}

impl TightTorusStructure {
    pub fn new(n: i32, a: f64, b: f64, c: f64, f: f64) -> Result<Self, FamilyError> {
        if n == 0 {
            return Err(FamilyError::ZeroWinding);
        }
        let det = a * f - b * c;
        if (det - 1.0).abs() > 1e-12 {
            return Err(FamilyError::Determinant(det));
        }
        Ok(TightTorusStructure { n, a, b, c, f })
    }

    /// Oriented volume of `theta ^ theta^1 ^ theta^2` over the torus.
    pub fn oriented_volume(&self) -> f64 {
        2.0 * PI * self.n as f64
    }

    /// Constant enriched data at the section `a1 = a2 = 1`:
    /// `tau12' = -b^2`, `tau21' = -f^2`, `S = bf/3`, `C = D = 0`,
    /// `3w = ... + bf theta`.
    pub fn enriched_data(&self) -> ConstantEnrichedData {
        let bf = self.b * self.f;
        ConstantEnrichedData {
            tau12: -self.b * self.b,
            tau21: -self.f * self.f,
            s: bf / 3.0,
            w0: bf / 3.0,
            ..Default::default()
        }
    }

    /// Constant connection matrix of the pulled-back Cartan connection.
    pub fn connection(&self) -> ConnectionMatrix {
        let data = self.enriched_data();
        let m = -data.s / 4.0;
        // w~ = (bf/3 + m) theta = (bf/4) theta; n = P = 0;
        // q = -tau12 tau21 + (9/16) S^2 = -(15/16)(bf)^2
        let q = -data.tau12 * data.tau21 + 9.0 / 16.0 * data.s * data.s;
        let w_tilde = Form1::new(data.w0 + m, 0.0, 0.0);
        let phi1 = Form1::new(0.0, -3.0 * m, data.tau12);
        let phi2 = Form1::new(0.0, data.tau21, -3.0 * m);
        let psi = Form1::new(q, 0.0, 0.0);
        let mut pi = ConnectionMatrix::zero();
        pi.entries[0][0] = w_tilde.clone();
        pi.entries[0][1] = phi2;
        pi.entries[0][2] = psi;
        pi.entries[1][0] = Form1::basis(1);
        pi.entries[1][1] = w_tilde.scale(-2.0);
        pi.entries[1][2] = phi1;
        pi.entries[2][0] = Form1::basis(0);
        pi.entries[2][1] = Form1::basis(2);
        pi.entries[2][2] = w_tilde;
        pi
    }

    /// Invariant through the constant-integrand evaluator.
    pub fn numeric_mu(&self) -> f64 {
        self.enriched_data().mu(self.oriented_volume())
    }

    /// Invariant through the full transgression engine on the constant
    /// connection matrix.
    pub fn transgression_mu(&self) -> Result<f64, CoframeError> {
        let t = transgression3(&self.connection())?;
        Ok(t.c012.as_const().expect("constant coefficients") * self.oriented_volume())
    }

    /// Analytic values: `Q^1 = (3/2) b^3 f`, `Q^2 = -(3/2) b f^3`,
    /// `mu = (3n / 8 pi) (bf)^2`, flat iff `bf = 0`.
    pub fn invariants(&self) -> FamilyReport {
        let bf = self.b * self.f;
        FamilyReport {
            q1: 1.5 * self.b.powi(3) * self.f,
            q2: -1.5 * self.b * self.f.powi(3),
            mu_analytic: 3.0 * self.n as f64 / (8.0 * PI) * bf * bf,
            mu_numeric: self.numeric_mu(),
            flat: bf == 0.0,
            data: self.enriched_data(),
        }
    }
}

/// Homogeneous strict path structure on SU(2) defined by a constant
/// determinant-one frame change `Z^1 = r1 beta + r2 alpha`,
/// `Z^2 = s1 beta + s2 alpha`.
#[derive(Debug, Clone, Copy)]
pub struct Su2Structure {
    pub r1: f64,
    pub r2: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Su2Structure {
    pub fn new(r1: f64, r2: f64, s1: f64, s2: f64) -> Result<Self, FamilyError> {
        let det = r1 * s2 - r2 * s1;
        if (det - 1.0).abs() > 1e-12 {
            return Err(FamilyError::Determinant(det));
        }
        Ok(Su2Structure { r1, r2, s1, s2 })
    }

    pub fn x(&self) -> f64 {
        self.r1 * self.s1 + self.r2 * self.s2
    }

    pub fn y(&self) -> f64 {
        -(self.r1 * self.r1 + self.r2 * self.r2)
    }

    pub fn z(&self) -> f64 {
        self.s1 * self.s1 + self.s2 * self.s2
    }

    /// The family is never discretized; its only numeric ingredient is the
    /// total volume. The coframe ordering (gamma, Z^1, Z^2) is negatively
    /// oriented against the orientation with integral alpha^beta^gamma =
    /// +2 pi^2, so the oriented volume is -2 pi^2.
    pub fn oriented_volume(&self) -> f64 {
        -2.0 * PI * PI
    }

    /// Constant enriched data: `tau12 = y`, `tau21 = -z`, `S = x/3`,
    /// `3w = ... + x theta`, everything else zero at the section.
    pub fn enriched_data(&self) -> ConstantEnrichedData {
        ConstantEnrichedData {
            tau12: self.y(),
            tau21: -self.z(),
            s: self.x() / 3.0,
            w0: self.x() / 3.0,
            ..Default::default()
        }
    }

    /// Analytic values: `Q^1 = -x y`, `Q^2 = -x z`,
    /// `mu = -1/2 - (3/8) x^2`, flat iff `x = 0`.
    pub fn invariants(&self) -> FamilyReport {
        let x = self.x();
        FamilyReport {
            q1: -x * self.y(),
            q2: -x * self.z(),
            mu_analytic: -0.5 - 0.375 * x * x,
            mu_numeric: self.enriched_data().mu(self.oriented_volume()),
            flat: x == 0.0,
            data: self.enriched_data(),
        }
    }
}

/// The flat Heisenberg baseline: all torsion and curvature vanish and the
/// invariant is zero.
pub fn heisenberg_model() -> FamilyReport {
    let data = ConstantEnrichedData::default();
    FamilyReport {
        q1: 0.0,
        q2: 0.0,
        mu_analytic: 0.0,
        mu_numeric: data.mu(2.0 * PI),
        flat: true,
        data,
    }
}
