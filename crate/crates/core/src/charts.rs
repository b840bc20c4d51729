//! Cartan's point-equivalence invariants in the `(x, y, p)` chart, for
//! equations `y'' = G(x, y, p)`, and the chart conversion from torus
//! structure functions `F(x, y, alpha)`.
//!
//! `Q^1 = -(1/6) G_pppp` vanishes exactly when `G` is at most cubic in `p`;
//! `Q^2` involves total x-derivatives along the equation. Derivatives are
//! exact: polynomial coefficients are differentiated analytically and
//! expression-backed charts go through degree-4 jet arithmetic, because
//! fourth p-derivatives are noise-sensitive under difference schemes.
//!
//! The torus model is a double cover of the projective cotangent bundle, so
//! the chart relation is `p = tan(alpha)` on the principal sheet
//! `alpha in (-pi/2, pi/2)` and
//! `G(x, y, p) = F(x, y, arctan p) (1 + p^2)^{3/2}`. Under this map the
//! `Q^1`-kernel family `A cos a + B sin a + C cos 3a + D sin 3a` lands
//! exactly on the cubics in `p`.
//!
//! Chart weights are not transported: only section-level values at
//! `a1 = a2 = 1` and vanishing loci are comparable across charts.

use crate::expr::{ExprAst, ExprError, Var};
use crate::field::PeriodicScalarField;
use crate::jet::Jet3;
use rustfft::num_complex::Complex64;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("p = {0} is outside the configured chart box")]
    OutsideBox(f64),
    #[error("chart function backed by a sampled field must be evaluated at torus grid nodes in (x, y); got ({0}, {1})")]
    OffGrid(f64, f64),
    #[error("polynomial coefficient {index} mentions the slope variable p")]
    CoefficientUsesP { index: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Sampling box for chart functions: Chebyshev-clustered p-nodes over
/// `[p_min, p_max]` and uniform `(x, y)` samples over the torus.
#[derive(Debug, Clone, Copy)]
pub struct PBox {
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Default for PBox {
    fn default() -> Self {
        PBox { p_min: -4.0, p_max: 4.0, np: 257, nx: 16, ny: 16 }
    }
}

impl PBox {
    pub fn p_nodes(&self) -> Vec<f64> {
        let mid = 0.5 * (self.p_min + self.p_max);
        let half = 0.5 * (self.p_max - self.p_min);
        (0..self.np)
            .map(|k| mid + half * (std::f64::consts::PI * k as f64 / (self.np - 1) as f64).cos())
            .collect()
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.p_min - 1e-12 && p <= self.p_max + 1e-12
    }
}

/// A second-order equation `y'' = G(x, y, p)` in the slope chart.
pub enum PChartOde {
    /// `G` as a parsed expression in x, y, p.
    Expr { ast: ExprAst, boxx: PBox },
    /// `G` as a polynomial in p with (x, y)-coefficient expressions;
    /// the degree is tracked so cubic flatness is exact.
    Poly { coeffs: Vec<ExprAst>, boxx: PBox },
    /// `G` induced from a torus structure function via the chart map.
    AlphaField(AlphaChartOde),
}

fn ast_uses_p(ast: &ExprAst) -> bool {
    match ast {
        ExprAst::Var { var, .. } => *var == Var::P,
        ExprAst::Num { .. } | ExprAst::Pi { .. } => false,
        ExprAst::Neg { arg, .. } | ExprAst::Fun { arg, .. } => ast_uses_p(arg),
        ExprAst::Bin { lhs, rhs, .. } => ast_uses_p(lhs) || ast_uses_p(rhs),
    }
}

impl PChartOde {
    pub fn from_expr(ast: ExprAst, boxx: PBox) -> Self {
        PChartOde::Expr { ast, boxx }
    }

    /// Coefficients are ordered by ascending power of p and must not
    /// mention p themselves.
    pub fn from_poly(coeffs: Vec<ExprAst>, boxx: PBox) -> Result<Self, ChartError> {
        for (index, c) in coeffs.iter().enumerate() {
            if ast_uses_p(c) {
                return Err(ChartError::CoefficientUsesP { index });
            }
        }
        Ok(PChartOde::Poly { coeffs, boxx })
    }

    pub fn sample_box(&self) -> PBox {
        match self {
            PChartOde::Expr { boxx, .. } | PChartOde::Poly { boxx, .. } => *boxx,
            PChartOde::AlphaField(a) => a.boxx,
        }
    }

    pub fn eval(&self, x: f64, y: f64, p: f64) -> Result<f64, ChartError> {
        if !self.sample_box().contains(p) {
            return Err(ChartError::OutsideBox(p));
        }
        match self {
            PChartOde::Expr { ast, .. } => Ok(ast.eval(x, y, p)?),
            PChartOde::Poly { coeffs, .. } => {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * p + c.eval(x, y, 0.0)?;
                }
                Ok(acc)
            }
            PChartOde::AlphaField(a) => a.eval(x, y, p),
        }
    }

    /// Degree-4 jet of `G` at a point. With `seed_xy = false` only
    /// p-derivatives are propagated (x and y enter as constants).
    pub fn jet(&self, x: f64, y: f64, p: f64, seed_xy: bool) -> Result<Jet3, ChartError> {
        if !self.sample_box().contains(p) {
            return Err(ChartError::OutsideBox(p));
        }
        // plain evaluation first: domain failures (division by zero,
        // fractional powers of negative bases) surface as errors here
        // instead of inside the jet arithmetic
        self.eval(x, y, p)?;
        let jx = if seed_xy { Jet3::var_x(x) } else { Jet3::constant(x) };
        let jy = if seed_xy { Jet3::var_y(y) } else { Jet3::constant(y) };
        let jp = Jet3::var_p(p);
        match self {
            PChartOde::Expr { ast, .. } => Ok(eval_jet(ast, &jx, &jy, &jp)?),
            PChartOde::Poly { coeffs, .. } => {
                let mut acc = Jet3::constant(0.0);
                for c in coeffs.iter().rev() {
                    acc = acc.mul(&jp).add(&eval_jet(c, &jx, &jy, &Jet3::constant(0.0))?);
                }
                Ok(acc)
            }
            PChartOde::AlphaField(a) => a.jet(x, y, p, seed_xy),
        }
    }
}

/// Evaluate an expression over jets. Powers with a constant exponent go
/// through `powi`/`powf`; general exponents use `exp(b ln a)`.
pub fn eval_jet(ast: &ExprAst, x: &Jet3, y: &Jet3, p: &Jet3) -> Result<Jet3, ExprError> {
    use crate::expr::{BinOp, Func};
    Ok(match ast {
        ExprAst::Num { value, .. } => Jet3::constant(*value),
        ExprAst::Pi { .. } => Jet3::constant(std::f64::consts::PI),
        ExprAst::Var { var, .. } => match var {
            Var::X => *x,
            Var::Y => *y,
            Var::Alpha | Var::P => *p,
        },
        ExprAst::Neg { arg, .. } => eval_jet(arg, x, y, p)?.neg(),
        ExprAst::Fun { func, arg, .. } => {
            let a = eval_jet(arg, x, y, p)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Atan => a.atan(),
                Func::Exp => a.exp(),
                Func::Sqrt => a.sqrt(),
            }
        }
        ExprAst::Bin { op, lhs, rhs, offset } => {
            let a = eval_jet(lhs, x, y, p)?;
            match op {
                BinOp::Add => a.add(&eval_jet(rhs, x, y, p)?),
                BinOp::Sub => a.sub(&eval_jet(rhs, x, y, p)?),
                BinOp::Mul => a.mul(&eval_jet(rhs, x, y, p)?),
                BinOp::Div => {
                    let b = eval_jet(rhs, x, y, p)?;
                    if b.value() == 0.0 {
                        return Err(ExprError::DivisionByZero { offset: *offset });
                    }
                    a.div(&b)
                }
                BinOp::Pow => {
                    let b = eval_jet(rhs, x, y, p)?;
                    let nilpotent = b.c[1..].iter().all(|&c| c == 0.0);
                    if nilpotent {
                        a.powf(b.value())
                    } else {
                        b.mul(&a.ln()).exp()
                    }
                }
            }
        }
    })
}

/// `df/dx` along the equation: `f_x + p f_y + G f_p`.
pub fn total_x_derivative(
    f: &ExprAst,
    ode: &PChartOde,
    x: f64,
    y: f64,
    p: f64,
) -> Result<f64, ChartError> {
    let jet = eval_jet(f, &Jet3::var_x(x), &Jet3::var_y(y), &Jet3::var_p(p))?;
    let g = ode.eval(x, y, p)?;
    Ok(jet.partial(1, 0, 0) + p * jet.partial(0, 1, 0) + g * jet.partial(0, 0, 1))
}

/// `Q^1 = -(1/6) G_pppp` at the section `a1 = a2 = 1`.
///
/// For polynomial charts of degree <= 3 this is exactly zero by
/// construction, without any evaluation.
pub fn q1_p(ode: &PChartOde, x: f64, y: f64, p: f64) -> Result<f64, ChartError> {
    if let PChartOde::Poly { coeffs, boxx } = ode {
        if !boxx.contains(p) {
            return Err(ChartError::OutsideBox(p));
        }
        if coeffs.len() <= 4 {
            return Ok(0.0);
        }
        // analytic fourth derivative of the polynomial part
        let mut acc = 0.0;
        for (k, c) in coeffs.iter().enumerate().skip(4) {
            let fall = (k * (k - 1) * (k - 2) * (k - 3)) as f64;
            acc += fall * c.eval(x, y, 0.0)? * p.powi(k as i32 - 4);
        }
        return Ok(-acc / 6.0);
    }
    let jet = ode.jet(x, y, p, false)?;
    Ok(-jet.partial(0, 0, 4) / 6.0)
}

/// `Q^2` at the section, with total derivatives expanded through the jet:
///
/// ```text
/// 6 Q^2 = 6 G_yy - 3 G_y G_pp + 4 G_p G_yp
///         - G_p Dx(G_pp) - 4 Dx(G_yp) + Dx^2(G_pp)
/// ```
pub fn q2_p(ode: &PChartOde, x: f64, y: f64, p: f64) -> Result<f64, ChartError> {
    let j = ode.jet(x, y, p, true)?;
    let g = j.value();
    let g_x = j.partial(1, 0, 0);
    let g_y = j.partial(0, 1, 0);
    let g_p = j.partial(0, 0, 1);
    let g_yy = j.partial(0, 2, 0);
    let g_yp = j.partial(0, 1, 1);
    let g_pp = j.partial(0, 0, 2);
    let g_ppp = j.partial(0, 0, 3);
    let g_pppp = j.partial(0, 0, 4);
    let g_ppx = j.partial(1, 0, 2);
    let g_ppy = j.partial(0, 1, 2);
    let g_ypx = j.partial(1, 1, 1);
    let g_ypy = j.partial(0, 2, 1);
    let g_ppxx = j.partial(2, 0, 2);
    let g_ppxy = j.partial(1, 1, 2);
    let g_ppyy = j.partial(0, 2, 2);
    let g_pppx = j.partial(1, 0, 3);
    let g_pppy = j.partial(0, 1, 3);

    let dx_gpp = g_ppx + p * g_ppy + g * g_ppp;
    let dx_gyp = g_ypx + p * g_ypy + g * g_ppy;
    let dx2_gpp = g_ppxx + p * g_ppxy + g_x * g_ppp + g * g_pppx
        + p * (g_ppxy + p * g_ppyy + g_y * g_ppp + g * g_pppy)
        + g * (g_pppx + g_ppy + p * g_pppy + g_p * g_ppp + g * g_pppp);

    Ok((6.0 * g_yy - 3.0 * g_y * g_pp + 4.0 * g_p * g_yp - g_p * dx_gpp - 4.0 * dx_gyp
        + dx2_gpp)
        / 6.0)
}

/// Max |f| over the sampling box, for flatness-locus checks.
pub fn max_abs_on_box(
    ode: &PChartOde,
    f: impl Fn(&PChartOde, f64, f64, f64) -> Result<f64, ChartError>,
) -> Result<f64, ChartError> {
    let boxx = ode.sample_box();
    let mut worst: f64 = 0.0;
    let (xs, ys) = match ode {
        // field-backed charts evaluate on the nodes of their own grid
        PChartOde::AlphaField(a) => {
            let spec = a.f.spec();
            let step_x = (spec.nx / boxx.nx.min(spec.nx)).max(1);
            let step_y = (spec.ny / boxx.ny.min(spec.ny)).max(1);
            (
                (0..spec.nx).step_by(step_x).map(|i| spec.x(i)).collect::<Vec<_>>(),
                (0..spec.ny).step_by(step_y).map(|j| spec.y(j)).collect::<Vec<_>>(),
            )
        }
        _ => (
            (0..boxx.nx).map(|i| i as f64 / boxx.nx as f64).collect(),
            (0..boxx.ny).map(|j| j as f64 / boxx.ny as f64).collect(),
        ),
    };
    for &x in &xs {
        for &y in &ys {
            for &p in &boxx.p_nodes() {
                worst = worst.max(f(ode, x, y, p)?.abs());
            }
        }
    }
    Ok(worst)
}

/// Chart conversion: sample `G(x, y, p) = F(x, y, arctan p) (1 + p^2)^{3/2}`
/// with `F` evaluated by spectral (trigonometric) interpolation along alpha.
pub fn alpha_to_p(f: &PeriodicScalarField, boxx: PBox) -> PChartOde {
    PChartOde::AlphaField(AlphaChartOde {
        f: f.clone(),
        boxx,
        xy_partials: OnceLock::new(),
    })
}

/// Torus structure function seen through the slope chart.
pub struct AlphaChartOde {
    f: PeriodicScalarField,
    boxx: PBox,
    /// `d^i_x d^j_y F` for i + j <= 4, computed on first q2 use.
    xy_partials: OnceLock<Vec<(u8, u8, PeriodicScalarField)>>,
}

impl AlphaChartOde {
    fn grid_node(&self, x: f64, y: f64) -> Result<(usize, usize), ChartError> {
        let spec = self.f.spec();
        let fx = x * spec.nx as f64;
        let fy = y * spec.ny as f64;
        let i = fx.round() as isize;
        let j = fy.round() as isize;
        if (fx - i as f64).abs() > 1e-9 || (fy - j as f64).abs() > 1e-9 {
            return Err(ChartError::OffGrid(x, y));
        }
        Ok((
            (i.rem_euclid(spec.nx as isize)) as usize,
            (j.rem_euclid(spec.ny as isize)) as usize,
        ))
    }

    /// Trig-interpolated alpha-derivatives (orders 0..=max_order) of a field
    /// along the (i, j) alpha-line, at off-grid angle `alpha0`.
    fn alpha_jet_of(
        field: &PeriodicScalarField,
        i: usize,
        j: usize,
        alpha0: f64,
        max_order: usize,
    ) -> Vec<f64> {
        let spec = field.spec();
        let n = spec.na;
        let mut line = vec![Complex64::default(); n];
        let base = spec.idx(i, j, 0);
        for (k, c) in line.iter_mut().enumerate() {
            *c = Complex64::new(field.samples()[base + k], 0.0);
        }
        let fft = {
            let mut planner = rustfft::FftPlanner::new();
            planner.plan_fft_forward(n)
        };
        fft.process(&mut line);
        let mut out = vec![0.0; max_order + 1];
        for (order, slot) in out.iter_mut().enumerate() {
            let mut acc = line[0].re * if order == 0 { 1.0 } else { 0.0 };
            for m in 1..n / 2 {
                let ik = Complex64::new(0.0, m as f64).powu(order as u32);
                let term = line[m] * ik * Complex64::from_polar(1.0, m as f64 * alpha0);
                acc += 2.0 * term.re;
            }
            // Nyquist as a pure cosine mode
            let m = n / 2;
            let nyq = line[m].re;
            let phase = (m as f64 * alpha0) + order as f64 * std::f64::consts::FRAC_PI_2;
            acc += nyq * (m as f64).powi(order as i32) * phase.cos();
            *slot = acc / n as f64;
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64, p: f64) -> Result<f64, ChartError> {
        if !self.boxx.contains(p) {
            return Err(ChartError::OutsideBox(p));
        }
        let (i, j) = self.grid_node(x, y)?;
        let alpha0 = p.atan();
        let f_val = Self::alpha_jet_of(&self.f, i, j, alpha0, 0)[0];
        Ok(f_val * (1.0 + p * p).powf(1.5))
    }

    fn xy_fields(&self) -> &Vec<(u8, u8, PeriodicScalarField)> {
        self.xy_partials.get_or_init(|| {
            let mut out = Vec::new();
            for total in 0..=4u8 {
                for i in 0..=total {
                    let j = total - i;
                    let mut g = self.f.clone();
                    for _ in 0..i {
                        g = g.dx();
                    }
                    for _ in 0..j {
                        g = g.dy();
                    }
                    out.push((i, j, g));
                }
            }
            out
        })
    }

    pub fn jet(&self, x: f64, y: f64, p: f64, seed_xy: bool) -> Result<Jet3, ChartError> {
        if !self.boxx.contains(p) {
            return Err(ChartError::OutsideBox(p));
        }
        let (i, j) = self.grid_node(x, y)?;
        let jp = Jet3::var_p(p);
        let alpha0 = p.atan();
        let alpha_jet = jp.atan(); // value alpha0, nilpotent part in p
        let mut shift = alpha_jet;
        shift.c[0] = 0.0;

        let f_jet = if seed_xy {
            // full Taylor in (x, y, alpha) composed with alpha(p)
            let mut acc = Jet3::constant(0.0);
            let ex = {
                let mut e = Jet3::var_x(x);
                e.c[0] = 0.0;
                e
            };
            let ey = {
                let mut e = Jet3::var_y(y);
                e.c[0] = 0.0;
                e
            };
            for (dx_ord, dy_ord, field) in self.xy_fields() {
                let rem = 4 - (dx_ord + dy_ord) as usize;
                let avals = Self::alpha_jet_of(field, i, j, alpha0, rem);
                let mut coeff_jet = Jet3::constant(0.0);
                for (k, &v) in avals.iter().enumerate() {
                    coeff_jet = coeff_jet.add(&shift.powi(k as i32).scale(v / factorial(k)));
                }
                let fx = factorial(*dx_ord as usize);
                let fy = factorial(*dy_ord as usize);
                let mono = ex.powi(*dx_ord as i32).mul(&ey.powi(*dy_ord as i32));
                acc = acc.add(&mono.mul(&coeff_jet).scale(1.0 / (fx * fy)));
            }
            acc
        } else {
            let avals = Self::alpha_jet_of(&self.f, i, j, alpha0, 4);
            let mut acc = Jet3::constant(0.0);
            for (k, &v) in avals.iter().enumerate() {
                acc = acc.add(&shift.powi(k as i32).scale(v / factorial(k)));
            }
            acc
        };
        let weight = Jet3::constant(1.0).add(&jp.mul(&jp)).powf(1.5);
        Ok(f_jet.mul(&weight))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product::<f64>().max(1.0)
}
