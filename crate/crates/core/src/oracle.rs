//! Independent low-tech verifiers backing the self-test and acceptance
//! suites: central finite differences, midpoint-rule integration of the
//! invariant, and a seeded randomized property harness.
//!
//! Nothing here calls the spectral engine or the coframe algebra on its own
//! behalf; the oracles work from closures and elementary arithmetic so a
//! defect in the primary path cannot hide in its own verifier. Oracle
//! tolerances are looser than primary-path tolerances by design: they check
//! the correctness class, not spectral precision.

use crate::field::{Axis, GridSpec, PeriodicScalarField, PERIODS};
use std::f64::consts::PI;

/// Configuration for the finite-difference and Riemann-sum oracles.
///
/// The step must be positive and the Riemann subdivisions should be at
/// least as fine as the spectral grid they are checked against (the
/// defaults match the default grid).
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Central stencil order, 2 or 4.
    pub stencil_order: u32,
    /// Step as a fraction of the axis period.
    pub step_fraction: f64,
    /// Midpoint subdivisions per axis for [`riemann_mu`].
    pub riemann: (usize, usize, usize),
    pub seed: u64,
    pub corpus_size: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            stencil_order: 2,
            step_fraction: 1.0 / 4096.0,
            riemann: (64, 64, 128),
            seed: 42,
            corpus_size: 25,
        }
    }
}

/// Central finite difference of a periodic closure along one axis, sampled
/// on the grid.
pub fn fd_derivative(
    f: &dyn Fn(f64, f64, f64) -> f64,
    axis: Axis,
    cfg: &OracleConfig,
    spec: GridSpec,
) -> PeriodicScalarField {
    assert!(cfg.step_fraction > 0.0, "oracle step must be positive");
    let period = match axis {
        Axis::X => PERIODS[0],
        Axis::Y => PERIODS[1],
        Axis::Alpha => PERIODS[2],
    };
    let h = cfg.step_fraction * period;
    let sample = |x: f64, y: f64, a: f64, offset: f64| match axis {
        Axis::X => f(x + offset, y, a),
        Axis::Y => f(x, y + offset, a),
        Axis::Alpha => f(x, y, a + offset),
    };
    PeriodicScalarField::from_fn(spec, |x, y, a| match cfg.stencil_order {
        2 => (sample(x, y, a, h) - sample(x, y, a, -h)) / (2.0 * h),
        4 => {
            (-sample(x, y, a, 2.0 * h) + 8.0 * sample(x, y, a, h) - 8.0 * sample(x, y, a, -h)
                + sample(x, y, a, -2.0 * h))
                / (12.0 * h)
        }
        other => panic!("unsupported stencil order {other}"),
    })
}

/// Midpoint-rule evaluation of the reduced invariant integral,
/// `(1/96 pi^2) * integral(-20 F_a^2 + 2 F_aa^2 + 18 F^2)`, from a closure,
/// with finite-difference alpha-derivatives only.
pub fn riemann_mu(f: &dyn Fn(f64, f64, f64) -> f64, cfg: &OracleConfig) -> f64 {
    let (nx, ny, na) = cfg.riemann;
    let h = cfg.step_fraction * PERIODS[2];
    let mut total = 0.0;
    for i in 0..nx {
        let x = (i as f64 + 0.5) / nx as f64;
        for j in 0..ny {
            let y = (j as f64 + 0.5) / ny as f64;
            for k in 0..na {
                let a = 2.0 * PI * (k as f64 + 0.5) / na as f64;
                let v = f(x, y, a);
                let (fa, faa) = match cfg.stencil_order {
                    4 => {
                        let m2 = f(x, y, a - 2.0 * h);
                        let m1 = f(x, y, a - h);
                        let p1 = f(x, y, a + h);
                        let p2 = f(x, y, a + 2.0 * h);
                        (
                            (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h),
                            (-p2 + 16.0 * p1 - 30.0 * v + 16.0 * m1 - m2) / (12.0 * h * h),
                        )
                    }
                    _ => {
                        let m1 = f(x, y, a - h);
                        let p1 = f(x, y, a + h);
                        ((p1 - m1) / (2.0 * h), (p1 - 2.0 * v + m1) / (h * h))
                    }
                };
                total += -20.0 * fa * fa + 2.0 * faa * faa + 18.0 * v * v;
            }
        }
    }
    let volume = 2.0 * PI;
    total / (nx * ny * na) as f64 * volume / (96.0 * PI * PI)
}

/// Deterministic splitmix64 stream; identical seeds give identical corpora
/// on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// One separable trigonometric product term.
#[derive(Debug, Clone, Copy)]
struct TrigTerm {
    amp: f64,
    mx: f64,
    my: f64,
    ma: f64,
    px: f64,
    py: f64,
    pa: f64,
}

/// Band-limited random structure function, evaluable both as a closure (for
/// the oracles) and as a sampled field (for the spectral path).
#[derive(Debug, Clone)]
pub struct RandomField {
    terms: Vec<TrigTerm>,
}

impl RandomField {
    /// Sum of up to `terms` separable trig products with integer frequencies
    /// bounded by `bw_xy` in x, y and `bw_alpha` in alpha, scaled to max
    /// amplitude roughly `amplitude`.
    pub fn band_limited(
        rng: &mut SplitMix64,
        terms: usize,
        bw_xy: usize,
        bw_alpha: usize,
        amplitude: f64,
    ) -> Self {
        let mut list = Vec::with_capacity(terms);
        for _ in 0..terms {
            list.push(TrigTerm {
                amp: rng.uniform(-1.0, 1.0),
                mx: rng.below(bw_xy + 1) as f64,
                my: rng.below(bw_xy + 1) as f64,
                ma: rng.below(bw_alpha + 1) as f64,
                px: rng.uniform(0.0, 2.0 * PI),
                py: rng.uniform(0.0, 2.0 * PI),
                pa: rng.uniform(0.0, 2.0 * PI),
            });
        }
        let scale = amplitude / list.iter().map(|t| t.amp.abs()).sum::<f64>().max(1e-9);
        for t in &mut list {
            t.amp *= scale;
        }
        RandomField { terms: list }
    }

    /// Member of the Q^1-kernel family
    /// `A cos a + B sin a + C cos 3a + D sin 3a` with band-limited
    /// (x, y)-coefficients.
    pub fn kernel_member(rng: &mut SplitMix64, bw_xy: usize, amplitude: f64) -> Self {
        let mut list = Vec::new();
        for &(ma, pa) in &[(1.0, 0.0), (1.0, PI / 2.0), (3.0, 0.0), (3.0, PI / 2.0)] {
            // each alpha-mode gets its own (x, y)-coefficient
            for _ in 0..2 {
                list.push(TrigTerm {
                    amp: rng.uniform(-1.0, 1.0),
                    mx: rng.below(bw_xy + 1) as f64,
                    my: rng.below(bw_xy + 1) as f64,
                    ma,
                    px: rng.uniform(0.0, 2.0 * PI),
                    py: rng.uniform(0.0, 2.0 * PI),
                    pa,
                });
            }
        }
        let scale = amplitude / list.iter().map(|t| t.amp.abs()).sum::<f64>().max(1e-9);
        for t in &mut list {
            t.amp *= scale;
        }
        RandomField { terms: list }
    }

    /// Alpha-independent variant.
    pub fn alpha_independent(rng: &mut SplitMix64, bw_xy: usize, amplitude: f64) -> Self {
        let mut f = Self::band_limited(rng, 4, bw_xy, 0, amplitude);
        for t in &mut f.terms {
            t.ma = 0.0;
            t.pa = 0.0;
        }
        f
    }

    pub fn eval(&self, x: f64, y: f64, a: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.amp
                    * (2.0 * PI * t.mx * x + t.px).cos()
                    * (2.0 * PI * t.my * y + t.py).cos()
                    * (t.ma * a + t.pa).cos()
            })
            .sum()
    }

    pub fn sample(&self, spec: GridSpec) -> PeriodicScalarField {
        PeriodicScalarField::from_fn(spec, |x, y, a| self.eval(x, y, a))
    }

    pub fn closure(&self) -> impl Fn(f64, f64, f64) -> f64 + '_ {
        move |x, y, a| self.eval(x, y, a)
    }
}

/// Outcome of one registered property.
#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Aggregate result of the harness.
#[derive(Debug, Clone)]
pub struct HarnessSummary {
    pub seed: u64,
    pub corpus_size: usize,
    pub outcomes: Vec<PropertyOutcome>,
}

impl HarnessSummary {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

fn outcome(name: &'static str, worst: f64, tolerance: f64, detail: String) -> PropertyOutcome {
    PropertyOutcome { name, passed: worst <= tolerance, worst, tolerance, detail }
}

/// Run the full randomized property suite. Identical `(seed, size)` produce
/// identical corpora and verdicts.
pub fn property_harness(seed: u64, size: usize) -> HarnessSummary {
    use crate::coframe::{transgression3, wedge11, wedge12, Form1};
    use crate::families::{Su2Structure, TightTorusStructure};
    use crate::ode;
    use crate::ode::OdeTorusStructure;

    let mut rng = SplitMix64::new(seed);
    let mut outcomes = Vec::new();
    let spec = GridSpec::new(32, 32, 64).expect("valid harness grid");
    // order-4 stencils: the corpus has x-modes up to frequency 2, where the
    // order-2 truncation error already exceeds the 1e-6 oracle tolerance
    let cfg = OracleConfig { seed, corpus_size: size, stencil_order: 4, ..Default::default() };

    // -- spectral vs finite differences ------------------------------------
    {
        let mut worst: f64 = 0.0;
        for _ in 0..size.min(5) {
            let f = RandomField::band_limited(&mut rng, 4, 2, 3, 1.0);
            let field = f.sample(spec);
            for axis in [Axis::X, Axis::Y, Axis::Alpha] {
                let spectral = field.derivative_n(axis, 1);
                let fd = fd_derivative(&f.closure(), axis, &cfg, spec);
                worst = worst.max((&spectral - &fd).max_abs());
            }
        }
        outcomes.push(outcome("spectral_vs_fd_derivative", worst, 1e-6, String::new()));
    }

    // -- riemann vs spectral invariant -------------------------------------
    {
        let mut worst: f64 = 0.0;
        for _ in 0..size.min(4) {
            let f = RandomField::band_limited(&mut rng, 4, 2, 3, 1.0);
            let s = OdeTorusStructure::new(f.sample(spec));
            let mu = ode::mu(&s).expect("resolved corpus");
            let rm = riemann_mu(&f.closure(), &cfg);
            worst = worst.max((mu - rm).abs() / mu.abs().max(1e-3));
        }
        outcomes.push(outcome("riemann_mu_vs_mu", worst, 1e-5, String::new()));
    }

    // -- dual-route Q1 and Q2 ----------------------------------------------
    {
        let mut worst_q1: f64 = 0.0;
        let mut worst_q2: f64 = 0.0;
        for _ in 0..size.min(6) {
            let f = RandomField::band_limited(&mut rng, 5, 2, 3, 1.0);
            let s = OdeTorusStructure::new(f.sample(spec));
            let b = ode::curvature_chain(&s).expect("resolved corpus");
            let q1_direct = ode::q1(&s).expect("resolved");
            let q2_direct = ode::q2(&s).expect("resolved");
            worst_q1 = worst_q1.max((&q1_direct - &b.q1).max_abs());
            let rel = (&q2_direct - &b.q2).max_abs() / q2_direct.max_abs().max(1e-6);
            worst_q2 = worst_q2.max(rel);
        }
        outcomes.push(outcome("dual_route_q1", worst_q1, 1e-9, String::new()));
        outcomes.push(outcome("dual_route_q2_relative", worst_q2, 1e-9, String::new()));
    }

    // -- dual-route invariant and integration by parts ---------------------
    {
        let mut worst_mu: f64 = 0.0;
        let mut worst_ibp: f64 = 0.0;
        for _ in 0..size.min(5) {
            let f = RandomField::band_limited(&mut rng, 4, 2, 3, 1.0);
            let s = OdeTorusStructure::new(f.sample(spec));
            let mu = ode::mu(&s).expect("resolved");
            let mu_t = ode::mu_via_transgression(&s).expect("resolved");
            worst_mu = worst_mu.max((mu - mu_t).abs() / mu.abs().max(1e-3));
            let pw = ode::mu_integrand_pointwise(&s)
                .expect("resolved")
                .c012
                .to_field(spec)
                .integrate_volume();
            worst_ibp = worst_ibp.max((pw - mu).abs() / (1.0 + mu.abs()));
        }
        outcomes.push(outcome("dual_route_mu_transgression", worst_mu, 1e-8, String::new()));
        outcomes.push(outcome("integration_by_parts", worst_ibp, 1e-9, String::new()));
    }

    // -- Bianchi: S-coefficients are frame derivatives of S ----------------
    {
        let f = RandomField::band_limited(&mut rng, 4, 2, 3, 1.0);
        let s = OdeTorusStructure::new(f.sample(spec));
        let b = ode::curvature_chain(&s).expect("resolved");
        let (s0, s1, s2) = crate::field::frame_derivatives(&b.s, s.f()).expect("same grid");
        let worst = (&s0 - &b.s0)
            .max_abs()
            .max((&s1 - &b.s1).max_abs())
            .max((&s2 - &b.s2).max_abs());
        outcomes.push(outcome("bianchi_s_frame_derivatives", worst, 1e-10, String::new()));
    }

    // -- structure equations of the assembled connection -------------------
    {
        let f = RandomField::band_limited(&mut rng, 4, 2, 3, 0.8);
        let s = OdeTorusStructure::new(f.sample(spec));
        let res = ode::structure_equation_residual(&s).expect("resolved");
        outcomes.push(outcome("cartan_structure_equations", res.off_shape, 1e-9, String::new()));
    }

    // -- Q1 kernel ----------------------------------------------------------
    {
        let mut worst: f64 = 0.0;
        for _ in 0..size.min(6) {
            let f = RandomField::kernel_member(&mut rng, 3, 1.0);
            let field = f.sample(spec);
            let scale = field.max_abs().max(1.0);
            let s = OdeTorusStructure::new(field);
            worst = worst.max(ode::q1(&s).expect("resolved").max_abs() / scale);
        }
        outcomes.push(outcome("q1_kernel_family", worst, 1e-9, String::new()));
    }

    // -- sign structure: alpha-independent invariants are positive ----------
    {
        let mut worst_violation: f64 = 0.0;
        let mut detail = String::new();
        for _ in 0..size.min(6) {
            let f = RandomField::alpha_independent(&mut rng, 2, 1.0);
            let s = OdeTorusStructure::new(f.sample(spec));
            let mu = ode::mu(&s).expect("resolved");
            let l2 = s.f().l2_norm();
            if l2 > 1e-8 && mu <= 0.0 {
                worst_violation = worst_violation.max(-mu + 1e-300);
                detail = format!("mu = {mu:.3e} for nonzero alpha-independent F");
            }
        }
        outcomes.push(outcome("mu_positive_alpha_independent", worst_violation, 0.0, detail));
    }

    // -- family identities ---------------------------------------------------
    {
        let mut worst: f64 = 0.0;
        for _ in 0..size.min(8) {
            let r1 = rng.uniform(0.2, 2.0);
            let r2 = rng.uniform(-1.0, 1.0);
            let s1 = rng.uniform(-1.0, 1.0);
            // solve r1 s2 - r2 s1 = 1 for s2
            let s2 = (1.0 + r2 * s1) / r1;
            let u = Su2Structure::new(r1, r2, s1, s2).expect("det solved");
            worst = worst.max((u.x() * u.x() + u.y() * u.z() + 1.0).abs());
            let rep = u.invariants();
            worst = worst.max((rep.mu_numeric - rep.mu_analytic).abs());
            if rep.mu_analytic > -0.5 + 1e-12 && u.x().abs() > 1e-9 {
                worst = worst.max(1.0);
            }
        }
        outcomes.push(outcome("su2_identity_and_bound", worst, 1e-12, String::new()));

        let mut worst_tt: f64 = 0.0;
        for _ in 0..size.min(8) {
            let n = if rng.next_f64() < 0.5 { 1 } else { 2 };
            let b = rng.uniform(-1.5, 1.5);
            let f = rng.uniform(-1.5, 1.5);
            let a = rng.uniform(0.5, 2.0);
            // a f - b c = 1 -> c = (a f - 1)/b when b != 0
            let t1 = if b.abs() > 1e-3 {
                TightTorusStructure::new(n, a, b, (a * f - 1.0) / b, f).expect("det solved")
            } else {
                TightTorusStructure::new(n, 1.0, 0.0, 0.0, 1.0).expect("identity")
            };
            // gauge partner with the same (n, b*f)
            let bf = t1.b * t1.f;
            let t2 = if bf.abs() > 1e-9 {
                TightTorusStructure::new(n, 1.0, bf, 0.0, 1.0).expect("det")
            } else {
                TightTorusStructure::new(n, 1.0, 0.0, 0.0, 1.0).expect("det")
            };
            worst_tt = worst_tt.max((t1.numeric_mu() - t2.numeric_mu()).abs());
            worst_tt = worst_tt.max((t1.numeric_mu() - t1.invariants().mu_analytic).abs());
            worst_tt =
                worst_tt.max((t1.transgression_mu().expect("constant") - t1.numeric_mu()).abs());
        }
        outcomes.push(outcome("tight_torus_gauge_and_routes", worst_tt, 1e-10, String::new()));
    }

    // -- wedge algebra -------------------------------------------------------
    {
        let mut worst: f64 = 0.0;
        for _ in 0..size.min(10) {
            let rand_form = |rng: &mut SplitMix64| {
                Form1::new(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))
            };
            let a = rand_form(&mut rng);
            let b = rand_form(&mut rng);
            let c = rand_form(&mut rng);
            let lam = rng.uniform(-2.0, 2.0);
            // antisymmetry
            let ab = wedge11(&a, &b).expect("consts");
            let ba = wedge11(&b, &a).expect("consts");
            worst = worst.max((ab.c01.as_const().unwrap() + ba.c01.as_const().unwrap()).abs());
            worst = worst.max((ab.c02.as_const().unwrap() + ba.c02.as_const().unwrap()).abs());
            worst = worst.max((ab.c12.as_const().unwrap() + ba.c12.as_const().unwrap()).abs());
            // bilinearity in the first slot
            let scaled = wedge11(&a.scale(lam).add(&c).expect("consts"), &b).expect("consts");
            let expect_c01 = lam * ab.c01.as_const().unwrap()
                + wedge11(&c, &b).expect("consts").c01.as_const().unwrap();
            worst = worst.max((scaled.c01.as_const().unwrap() - expect_c01).abs());
            // trilinearity/alternation of the triple wedge
            let abc = wedge12(&a, &wedge11(&b, &c).expect("consts")).expect("consts");
            let bac = wedge12(&b, &wedge11(&a, &c).expect("consts")).expect("consts");
            worst = worst
                .max((abc.c012.as_const().unwrap() + bac.c012.as_const().unwrap()).abs());
            let aac = wedge12(&a, &wedge11(&a, &c).expect("consts")).expect("consts");
            worst = worst.max(aac.c012.as_const().unwrap().abs());
        }
        outcomes.push(outcome("wedge_bilinear_antisymmetric", worst, 1e-13, String::new()));
    }

    // -- conjugation invariance of the transgression -------------------------
    {
        let f = RandomField::band_limited(&mut rng, 3, 1, 2, 0.8);
        let s = OdeTorusStructure::new(f.sample(GridSpec::new(16, 16, 32).expect("grid")));
        let pi = ode::assemble_connection(&s).expect("resolved");
        let m = [[1.0, 0.3, -0.2], [0.1, 1.2, 0.4], [-0.3, 0.2, 0.9]];
        let t0 = transgression3(&pi).expect("algebra").c012.to_field(s.spec()).integrate_volume();
        let conj = pi.conjugate(&m).expect("invertible");
        let t1 =
            transgression3(&conj).expect("algebra").c012.to_field(s.spec()).integrate_volume();
        outcomes.push(outcome(
            "transgression_conjugation_invariant",
            (t0 - t1).abs() / t0.abs().max(1e-6),
            1e-10,
            String::new(),
        ));
    }

    // -- frame derivative forward reconstruction ----------------------------
    {
        let f = RandomField::band_limited(&mut rng, 4, 2, 3, 1.0);
        let g = RandomField::band_limited(&mut rng, 4, 2, 3, 1.0);
        let field = f.sample(spec);
        let big_f = g.sample(spec);
        let (f0, f1, f2) =
            crate::field::frame_derivatives(&field, &big_f).expect("same grid");
        let fx = field.derivative_n(Axis::X, 1);
        let fy = field.derivative_n(Axis::Y, 1);
        let mut worst: f64 = 0.0;
        for i in 0..spec.nx {
            for j in 0..spec.ny {
                for k in 0..spec.na {
                    let (sa, ca) = spec.alpha(k).sin_cos();
                    let idx = spec.idx(i, j, k);
                    let combo = f1.samples()[idx] - f2.samples()[idx] * big_f.samples()[idx];
                    worst = worst
                        .max((-f0.samples()[idx] * sa + combo * ca - fx.samples()[idx]).abs());
                    worst = worst
                        .max((f0.samples()[idx] * ca + combo * sa - fy.samples()[idx]).abs());
                }
            }
        }
        outcomes.push(outcome("frame_forward_relations", worst, 1e-11, String::new()));
    }

    // -- mutation sanity: a sign error in the wedge is caught ----------------
    {
        let f = RandomField::band_limited(&mut rng, 3, 1, 2, 0.9);
        let s = OdeTorusStructure::new(f.sample(GridSpec::new(16, 16, 32).expect("grid")));
        let pi = ode::assemble_connection(&s).expect("resolved");
        let mu_good = ode::mu(&s).expect("resolved");
        // transgression with wedge12 replaced by a sign-flipped variant
        let mut acc = crate::coframe::Coeff::Const(0.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let two = wedge11(&pi.entries[i][j], &pi.entries[j][k]).expect("grids");
                    let three_flipped = {
                        let a = &pi.entries[k][i];
                        // deliberately wrong middle sign
                        let t0 = crate::coframe::Coeff::mul(&a.c0, &two.c12).expect("grids");
                        let t1 = crate::coframe::Coeff::mul(&a.c1, &two.c02).expect("grids");
                        let t2 = crate::coframe::Coeff::mul(&a.c2, &two.c01).expect("grids");
                        crate::coframe::Coeff::add(
                            &crate::coframe::Coeff::add(&t0, &t1).expect("grids"),
                            &t2,
                        )
                        .expect("grids")
                    };
                    acc = crate::coframe::Coeff::add(&acc, &three_flipped).expect("grids");
                }
            }
        }
        let broken =
            acc.to_field(s.spec()).integrate_volume() / (24.0 * std::f64::consts::PI.powi(2));
        let deviation = (broken - mu_good).abs() / mu_good.abs().max(1e-6);
        outcomes.push(PropertyOutcome {
            name: "mutation_detected_by_dual_route",
            passed: deviation > 1e-6,
            worst: deviation,
            tolerance: 1e-6,
            detail: "deviation must EXCEED tolerance: a broken wedge must not slip through".into(),
        });
    }

    // -- p-chart flatness locus ----------------------------------------------
    {
        let f = RandomField::kernel_member(&mut rng, 2, 1.0);
        let field = f.sample(spec);
        let s = OdeTorusStructure::new(field.clone());
        let alpha_flat = ode::q1(&s).expect("resolved").max_abs() <= 1e-9;
        let ode_p = crate::charts::alpha_to_p(&field, crate::charts::PBox {
            np: 65,
            nx: 8,
            ny: 8,
            ..Default::default()
        });
        let p_flat = crate::charts::max_abs_on_box(&ode_p, crate::charts::q1_p)
            .expect("on-box evaluation");
        let consistent = alpha_flat == (p_flat <= 1e-6);
        outcomes.push(PropertyOutcome {
            name: "flatness_locus_chart_consistency",
            passed: consistent,
            worst: p_flat,
            tolerance: 1e-6,
            detail: format!("alpha-chart flat: {alpha_flat}, p-box max |Q1| = {p_flat:.3e}"),
        });
    }

    HarnessSummary { seed, corpus_size: size, outcomes }
}
