//! Periodic scalar fields on the 3-torus with spectral derivatives.
//!
//! Fields live on a rectangular grid over `[0,1) x [0,1) x [0,2pi)` in the
//! coordinates `(x, y, alpha)`. Coordinate derivatives are computed by FFT
//! (exact for band-limited data), frame derivatives follow the coframe
//! relation `df = f0 theta + f1 theta^1 + f2 theta^2` of the torus coframe
//! `theta = cos(a) dy - sin(a) dx`, `theta^1 = sin(a) dy + cos(a) dx`,
//! `theta^2 = da - F theta^1`, and volume integration uses the trapezoid
//! rule, which is spectrally exact on periodic grids.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

/// Axis periods are fixed: x and y have period 1, alpha has period 2*pi.
pub const PERIODS: [f64; 3] = [1.0, 1.0, 2.0 * PI];

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("grid counts must be even and at least 4, got {0}x{1}x{2}")]
    BadGrid(usize, usize, usize),
    #[error("grid mismatch: {0:?} vs {1:?}")]
    GridMismatch(GridSpec, GridSpec),
    #[error("field contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample count {got} does not match grid size {want}")]
    BadSampleCount { got: usize, want: usize },
    #[error("under-resolved grid: {axis}-axis spectral tail fraction {tail:.3e} exceeds {limit:.1e}")]
    UnderResolved { axis: char, tail: f64, limit: f64 },
    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Sample counts for the periodic grid. Periods are fixed by [`PERIODS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
}

impl GridSpec {
    /// Grid counts must be even and >= 4 on every axis.
    pub fn new(nx: usize, ny: usize, na: usize) -> Result<Self, FieldError> {
        let ok = |n: usize| n >= 4 && n % 2 == 0;
        if ok(nx) && ok(ny) && ok(na) {
            Ok(GridSpec { nx, ny, na })
        } else {
            Err(FieldError::BadGrid(nx, ny, na))
        }
    }

    /// Default resolution; the alpha axis is finer because the invariants
    /// involve fourth alpha-derivatives.
    pub fn default_grid() -> Self {
        GridSpec { nx: 64, ny: 64, na: 128 }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.na
    }

    /// Flat index with alpha fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.na + k
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.nx as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 / self.ny as f64
    }

    #[inline]
    pub fn alpha(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.na as f64
    }
}

/// Real scalar field sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicScalarField {
    spec: GridSpec,
    samples: Vec<f64>,
}

// FFT plans are cached per length; rustfft plans are cheap to clone via Arc.
thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn rustfft::Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn fft_plan(n: usize, inverse: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Axis selector for derivatives and spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Alpha,
}

impl Axis {
    fn period(self) -> f64 {
        match self {
            Axis::X => PERIODS[0],
            Axis::Y => PERIODS[1],
            Axis::Alpha => PERIODS[2],
        }
    }
}

impl PeriodicScalarField {
    pub fn from_samples(spec: GridSpec, samples: Vec<f64>) -> Result<Self, FieldError> {
        if samples.len() != spec.len() {
            return Err(FieldError::BadSampleCount { got: samples.len(), want: spec.len() });
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(pos));
        }
        Ok(PeriodicScalarField { spec, samples })
    }

    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(spec: GridSpec, f: F) -> Self {
        let mut samples = Vec::with_capacity(spec.len());
        for i in 0..spec.nx {
            for j in 0..spec.ny {
                for k in 0..spec.na {
                    samples.push(f(spec.x(i), spec.y(j), spec.alpha(k)));
                }
            }
        }
        PeriodicScalarField { spec, samples }
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        PeriodicScalarField { spec, samples: vec![value; spec.len()] }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.samples[self.spec.idx(i, j, k)]
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        PeriodicScalarField {
            spec: self.spec,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.spec, other.spec, "grid mismatch in pointwise operation");
        PeriodicScalarField {
            spec: self.spec,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Spectral derivative along one axis (n-th order).
    ///
    /// Multiplies the line spectrum by (ik)^n; for odd n the Nyquist mode is
    /// zeroed, the standard choice for real data on even grids.
    pub fn derivative_n(&self, axis: Axis, order: u32) -> Self {
        let (nlines, n, stride) = self.axis_layout(axis);
        let period = axis.period();
        let fwd = fft_plan(n, false);
        let inv = fft_plan(n, true);
        let mut out = vec![0.0; self.samples.len()];
        let mut line = vec![Complex64::default(); n];

        // precompute the multiplier (ik)^order per frequency bin
        let mut mult = vec![Complex64::default(); n];
        for (m, slot) in mult.iter_mut().enumerate() {
            let signed = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
            if order % 2 == 1 && m == n / 2 {
                *slot = Complex64::new(0.0, 0.0);
                continue;
            }
            let k = 2.0 * PI * signed as f64 / period;
            *slot = Complex64::new(0.0, k).powu(order);
        }

        for line_idx in 0..nlines {
            let base = self.line_base(axis, line_idx);
            for (t, c) in line.iter_mut().enumerate() {
                *c = Complex64::new(self.samples[base + t * stride], 0.0);
            }
            fwd.process(&mut line);
            for (c, m) in line.iter_mut().zip(&mult) {
                *c *= m;
            }
            inv.process(&mut line);
            let scale = 1.0 / n as f64;
            for (t, c) in line.iter().enumerate() {
                out[base + t * stride] = c.re * scale;
            }
        }
        PeriodicScalarField { spec: self.spec, samples: out }
    }

    pub fn dx(&self) -> Self {
        self.derivative_n(Axis::X, 1)
    }

    pub fn dy(&self) -> Self {
        self.derivative_n(Axis::Y, 1)
    }

    pub fn dalpha(&self) -> Self {
        self.derivative_n(Axis::Alpha, 1)
    }

    fn axis_layout(&self, axis: Axis) -> (usize, usize, usize) {
        let GridSpec { nx, ny, na } = self.spec;
        match axis {
            Axis::X => (ny * na, nx, ny * na),
            Axis::Y => (nx * na, ny, na),
            Axis::Alpha => (nx * ny, na, 1),
        }
    }

    fn line_base(&self, axis: Axis, line_idx: usize) -> usize {
        let GridSpec { ny, na, .. } = self.spec;
        match axis {
            Axis::X => line_idx,
            Axis::Y => {
                let i = line_idx / na;
                let k = line_idx % na;
                i * ny * na + k
            }
            Axis::Alpha => line_idx * na,
        }
    }

    /// Fraction of (weighted) spectral energy above two thirds of the Nyquist
    /// frequency on one axis. The alpha axis is weighted by k^4 because the
    /// invariants take fourth alpha-derivatives.
    pub fn spectral_tail_fraction(&self, axis: Axis) -> f64 {
        let (nlines, n, stride) = self.axis_layout(axis);
        let fwd = fft_plan(n, false);
        let mut line = vec![Complex64::default(); n];
        let cutoff = n / 3;
        let mut tail = 0.0;
        let mut total = 0.0;
        for line_idx in 0..nlines {
            let base = self.line_base(axis, line_idx);
            for (t, c) in line.iter_mut().enumerate() {
                *c = Complex64::new(self.samples[base + t * stride], 0.0);
            }
            fwd.process(&mut line);
            for (m, c) in line.iter().enumerate() {
                let signed = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
                let k = signed.unsigned_abs() as usize;
                let w = if axis == Axis::Alpha {
                    let kk = k.max(1) as f64;
                    kk * kk * kk * kk
                } else {
                    1.0
                };
                let e = w * c.norm_sqr();
                total += e;
                if k > cutoff {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Error if the weighted tail fraction exceeds `limit` on any axis.
    pub fn check_resolved(&self, limit: f64) -> Result<(), FieldError> {
        for (axis, name) in [(Axis::X, 'x'), (Axis::Y, 'y'), (Axis::Alpha, 'a')] {
            let tail = self.spectral_tail_fraction(axis);
            if tail > limit {
                return Err(FieldError::UnderResolved { axis: name, tail, limit });
            }
        }
        Ok(())
    }

    /// Integral against the positive volume of theta ^ theta^1 ^ theta^2,
    /// i.e. the plain integral over `[0,1]^2 x [0,2pi]` by the trapezoid
    /// rule.
    ///
    /// The coframe triple is declared positively oriented, so the total
    /// volume is +2pi even though theta^theta1^theta2 = -dx^dy^da in
    /// coordinates.
    pub fn integrate_volume(&self) -> f64 {
        let sum: f64 = self.samples.iter().sum();
        sum / self.samples.len() as f64 * (2.0 * PI)
    }

    /// Mean value over the torus.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// CSV dump: header `x,y,alpha,value`, rows with x varying fastest.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 32);
        out.push_str("x,y,alpha,value\n");
        let spec = self.spec;
        for k in 0..spec.na {
            for j in 0..spec.ny {
                for i in 0..spec.nx {
                    let _ = writeln!(
                        out,
                        "{:.17e},{:.17e},{:.17e},{:.17e}",
                        spec.x(i),
                        spec.y(j),
                        spec.alpha(k),
                        self.at(i, j, k)
                    );
                }
            }
        }
        out
    }

    /// Parse a CSV dump produced by [`Self::to_csv`]. The rows must cover a
    /// complete rectangular grid in the dump ordering (x fastest).
    pub fn from_csv(text: &str) -> Result<Self, FieldError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "x,y,alpha,value" => {}
            _ => {
                return Err(FieldError::Csv { line: 1, msg: "expected header x,y,alpha,value".into() })
            }
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut als: Vec<f64> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut coords: Vec<(f64, f64, f64)> = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut next = |what: &str| -> Result<f64, FieldError> {
                it.next()
                    .ok_or_else(|| FieldError::Csv { line: lineno + 1, msg: format!("missing {what}") })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| FieldError::Csv { line: lineno + 1, msg: format!("bad {what}: {e}") })
            };
            let xv = next("x")?;
            let yv = next("y")?;
            let av = next("alpha")?;
            let vv = next("value")?;
            coords.push((xv, yv, av));
            vals.push(vv);
            let push_unique = |list: &mut Vec<f64>, v: f64| {
                if !list.iter().any(|&u| (u - v).abs() < 1e-12) {
                    list.push(v);
                }
            };
            push_unique(&mut xs, xv);
            push_unique(&mut ys, yv);
            push_unique(&mut als, av);
        }
        let (nx, ny, na) = (xs.len(), ys.len(), als.len());
        let spec = GridSpec::new(nx, ny, na)
            .map_err(|e| FieldError::Csv { line: 0, msg: e.to_string() })?;
        if vals.len() != spec.len() {
            return Err(FieldError::Csv {
                line: 0,
                msg: format!("{} rows do not fill a {nx}x{ny}x{na} grid", vals.len()),
            });
        }
        // rows are x-fastest, alpha slowest
        let mut samples = vec![f64::NAN; spec.len()];
        let mut row = 0;
        for k in 0..na {
            for j in 0..ny {
                for i in 0..nx {
                    let (xv, yv, av) = coords[row];
                    let expect = (spec.x(i), spec.y(j), spec.alpha(k));
                    if (xv - expect.0).abs() > 1e-9
                        || (yv - expect.1).abs() > 1e-9
                        || (av - expect.2).abs() > 1e-9
                    {
                        return Err(FieldError::Csv {
                            line: row + 2,
                            msg: format!(
                                "coordinates ({xv},{yv},{av}) do not match the uniform grid node {expect:?}"
                            ),
                        });
                    }
                    samples[spec.idx(i, j, k)] = vals[row];
                    row += 1;
                }
            }
        }
        PeriodicScalarField::from_samples(spec, samples)
    }
}

/// Frame-derivative coefficients of `df = f0 theta + f1 theta^1 + f2 theta^2`
/// for the torus coframe with structure function `F`:
/// `f0 = -f_x sin(a) + f_y cos(a)`, `f1 = f_x cos(a) + f_y sin(a) + F f_a`,
/// `f2 = f_a`.
pub fn frame_derivatives(
    f: &PeriodicScalarField,
    big_f: &PeriodicScalarField,
) -> Result<(PeriodicScalarField, PeriodicScalarField, PeriodicScalarField), FieldError> {
    if f.spec() != big_f.spec() {
        return Err(FieldError::GridMismatch(f.spec(), big_f.spec()));
    }
    let spec = f.spec();
    let fx = f.dx();
    let fy = f.dy();
    let fa = f.dalpha();
    let mut f0 = vec![0.0; spec.len()];
    let mut f1 = vec![0.0; spec.len()];
    for i in 0..spec.nx {
        for j in 0..spec.ny {
            for k in 0..spec.na {
                let (sa, ca) = spec.alpha(k).sin_cos();
                let idx = spec.idx(i, j, k);
                f0[idx] = -fx.samples[idx] * sa + fy.samples[idx] * ca;
                f1[idx] = fx.samples[idx] * ca + fy.samples[idx] * sa
                    + big_f.samples[idx] * fa.samples[idx];
            }
        }
    }
    Ok((
        PeriodicScalarField { spec, samples: f0 },
        PeriodicScalarField { spec, samples: f1 },
        fa,
    ))
}

impl std::ops::Add for &PeriodicScalarField {
    type Output = PeriodicScalarField;
    fn add(self, rhs: Self) -> PeriodicScalarField {
        self.zip(rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for &PeriodicScalarField {
    type Output = PeriodicScalarField;
    fn sub(self, rhs: Self) -> PeriodicScalarField {
        self.zip(rhs, |a, b| a - b)
    }
}

impl std::ops::Mul for &PeriodicScalarField {
    type Output = PeriodicScalarField;
    fn mul(self, rhs: Self) -> PeriodicScalarField {
        self.zip(rhs, |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(GridSpec::new(3, 8, 8).is_err());
        assert!(GridSpec::new(8, 7, 8).is_err());
        assert!(GridSpec::new(8, 8, 2).is_err());
        assert!(GridSpec::new(4, 4, 4).is_ok());
        assert!(GridSpec::new(6, 10, 12).is_ok());
    }

    #[test]
    fn dalpha_of_sin_is_cos() {
        let spec = GridSpec::new(4, 4, 32).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |_, _, a| a.sin());
        let df = f.dalpha();
        let expect = PeriodicScalarField::from_fn(spec, |_, _, a| a.cos());
        assert!((&df - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn dx_of_cos_2pix() {
        let spec = GridSpec::new(16, 4, 4).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |x, _, _| (2.0 * PI * x).cos());
        let df = f.dx();
        let expect =
            PeriodicScalarField::from_fn(spec, |x, _, _| -2.0 * PI * (2.0 * PI * x).sin());
        assert!((&df - &expect).max_abs() < 1e-11);
    }

    #[test]
    fn dalpha_of_constant_is_zero() {
        let spec = GridSpec::new(4, 4, 8).unwrap();
        let f = PeriodicScalarField::constant(spec, 3.25);
        assert!(f.dalpha().max_abs() < 1e-14);
    }

    #[test]
    fn fourth_alpha_derivative_single_multiplier() {
        // d^4/da^4 cos(2a) = 16 cos(2a)
        let spec = GridSpec::new(4, 4, 32).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |_, _, a| (2.0 * a).cos());
        let d4 = f.derivative_n(Axis::Alpha, 4);
        let expect = PeriodicScalarField::from_fn(spec, |_, _, a| 16.0 * (2.0 * a).cos());
        assert!((&d4 - &expect).max_abs() < 1e-10);
    }

    #[test]
    fn frame_derivatives_of_y() {
        // f = sin(2 pi y) has fx = 0, fa = 0, so f0 = fy cos(a), f1 = fy sin(a).
        let spec = GridSpec::new(8, 16, 16).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |_, y, _| (2.0 * PI * y).sin());
        let big_f = PeriodicScalarField::from_fn(spec, |x, _, a| a.sin() + x.cos());
        let (f0, f1, f2) = frame_derivatives(&f, &big_f).unwrap();
        let fy = |y: f64| 2.0 * PI * (2.0 * PI * y).cos();
        let e0 = PeriodicScalarField::from_fn(spec, |_, y, a| fy(y) * a.cos());
        let e1 = PeriodicScalarField::from_fn(spec, |_, y, a| fy(y) * a.sin());
        assert!((&f0 - &e0).max_abs() < 1e-10);
        assert!((&f1 - &e1).max_abs() < 1e-10);
        assert!(f2.max_abs() < 1e-11);
    }

    #[test]
    fn frame_derivatives_of_constant_vanish() {
        let spec = GridSpec::new(4, 4, 8).unwrap();
        let f = PeriodicScalarField::constant(spec, -2.0);
        let big_f = PeriodicScalarField::from_fn(spec, |_, _, a| a.cos());
        let (f0, f1, f2) = frame_derivatives(&f, &big_f).unwrap();
        assert!(f0.max_abs() < 1e-14);
        assert!(f1.max_abs() < 1e-14);
        assert!(f2.max_abs() < 1e-14);
    }

    #[test]
    fn frame_derivatives_alpha_only_with_f_zero() {
        let spec = GridSpec::new(4, 4, 32).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |_, _, a| (2.0 * a).sin());
        let big_f = PeriodicScalarField::zeros(spec);
        let (f0, f1, f2) = frame_derivatives(&f, &big_f).unwrap();
        let expect = PeriodicScalarField::from_fn(spec, |_, _, a| 2.0 * (2.0 * a).cos());
        assert!(f0.max_abs() < 1e-12);
        assert!(f1.max_abs() < 1e-12);
        assert!((&f2 - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn forward_relation_reconstructs_coordinate_partials() {
        // f_x = -f0 sin(a) + (f1 - f2 F) cos(a) and the y companion.
        let spec = GridSpec::new(16, 16, 32).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |x, y, a| {
            (2.0 * PI * x).sin() * a.cos() + (2.0 * PI * y).cos()
        });
        let big_f = PeriodicScalarField::from_fn(spec, |x, _, a| 0.3 * a.sin() + 0.1 * (2.0 * PI * x).cos());
        let (f0, f1, f2) = frame_derivatives(&f, &big_f).unwrap();
        let fx = f.dx();
        let fy = f.dy();
        let mut worst: f64 = 0.0;
        for i in 0..spec.nx {
            for j in 0..spec.ny {
                for k in 0..spec.na {
                    let (sa, ca) = spec.alpha(k).sin_cos();
                    let idx = spec.idx(i, j, k);
                    let fx_rec = -f0.samples()[idx] * sa
                        + (f1.samples()[idx] - f2.samples()[idx] * big_f.samples()[idx]) * ca;
                    let fy_rec = f0.samples()[idx] * ca
                        + (f1.samples()[idx] - f2.samples()[idx] * big_f.samples()[idx]) * sa;
                    worst = worst.max((fx_rec - fx.samples()[idx]).abs());
                    worst = worst.max((fy_rec - fy.samples()[idx]).abs());
                }
            }
        }
        assert!(worst < 1e-11, "forward relation residual {worst}");
    }

    #[test]
    fn integrate_constant_is_two_pi() {
        let spec = GridSpec::new(4, 4, 8).unwrap();
        let f = PeriodicScalarField::constant(spec, 1.0);
        assert!((f.integrate_volume() - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn integrate_sin_alpha_is_zero() {
        let spec = GridSpec::new(4, 4, 16).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |_, _, a| a.sin());
        assert!(f.integrate_volume().abs() < 1e-13);
    }

    #[test]
    fn integrate_separable_product() {
        // sin^2(2 pi x) cos^2(a) integrates to (1/2) * 1 * pi = pi/2
        let spec = GridSpec::new(16, 4, 16).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |x, _, a| {
            (2.0 * PI * x).sin().powi(2) * a.cos().powi(2)
        });
        assert!((f.integrate_volume() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn integral_of_exact_derivative_vanishes() {
        let spec = GridSpec::new(16, 8, 32).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |x, y, a| {
            (2.0 * PI * x).cos() * (2.0 * a).sin() + (2.0 * PI * y).sin()
        });
        assert!(f.dx().integrate_volume().abs() < 1e-11);
        assert!(f.dy().integrate_volume().abs() < 1e-11);
        assert!(f.dalpha().integrate_volume().abs() < 1e-11);
    }

    #[test]
    fn tail_check_flags_high_mode() {
        let spec = GridSpec::new(4, 4, 16).unwrap();
        // mode 7 on a 16-point axis is above the 16/3 cutoff
        let f = PeriodicScalarField::from_fn(spec, |_, _, a| (7.0 * a).cos());
        assert!(matches!(
            f.check_resolved(1e-8),
            Err(FieldError::UnderResolved { axis: 'a', .. })
        ));
        let ok = PeriodicScalarField::from_fn(spec, |_, _, a| (3.0 * a).cos());
        assert!(ok.check_resolved(1e-8).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let spec = GridSpec::new(4, 6, 8).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |x, y, a| x + 2.0 * y + a.sin());
        let text = f.to_csv();
        let g = PeriodicScalarField::from_csv(&text).unwrap();
        assert_eq!(g.spec(), spec);
        assert!((&g - &f).max_abs() < 1e-12);
    }

    #[test]
    fn spectral_round_trip_is_identity() {
        // order-0 "derivative" is a forward + inverse transform
        let spec = GridSpec::new(8, 6, 16).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |x, y, a| {
            (2.0 * PI * x).cos() + 0.5 * (2.0 * PI * y).sin() * a.cos() + 0.25
        });
        for axis in [Axis::X, Axis::Y, Axis::Alpha] {
            let back = f.derivative_n(axis, 0);
            assert!((&back - &f).max_abs() < 1e-12);
        }
    }

    #[test]
    fn leibniz_rule_for_spectral_derivative() {
        let spec = GridSpec::new(4, 4, 64).unwrap();
        let f = PeriodicScalarField::from_fn(spec, |_, _, a| (3.0 * a).cos());
        let g = PeriodicScalarField::from_fn(spec, |_, _, a| (2.0 * a).sin());
        let lhs = (&f * &g).dalpha();
        let rhs = &(&f.dalpha() * &g) + &(&f * &g.dalpha());
        assert!((&lhs - &rhs).max_abs() < 1e-10);
    }
}
