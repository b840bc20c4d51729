//! Truncated multivariate Taylor arithmetic (jets) in three variables up to
//! total degree 4.
//!
//! A jet carries the value and all mixed partial derivatives of an
//! expression at a point, propagated exactly through arithmetic and
//! elementary functions. This is what makes fourth p-derivatives of chart
//! functions noise-free: no step sizes, only rounding.

/// Total truncation degree.
pub const DEGREE: usize = 4;

/// Number of monomials x^i y^j p^k with i + j + k <= 4.
pub const TERMS: usize = 35;

// monomial table in graded order
const MONOMIALS: [(u8, u8, u8); TERMS] = build_monomials();

const fn build_monomials() -> [(u8, u8, u8); TERMS] {
    let mut out = [(0u8, 0u8, 0u8); TERMS];
    let mut idx = 0;
    let mut total = 0;
    while total <= DEGREE {
        let mut i = 0;
        while i <= total {
            let mut j = 0;
            while j + i <= total {
                let k = total - i - j;
                out[idx] = (i as u8, j as u8, k as u8);
                idx += 1;
                j += 1;
            }
            i += 1;
        }
        total += 1;
    }
    out
}

const fn build_index() -> [[[usize; DEGREE + 1]; DEGREE + 1]; DEGREE + 1] {
    let mut table = [[[usize::MAX; DEGREE + 1]; DEGREE + 1]; DEGREE + 1];
    let mut t = 0;
    while t < TERMS {
        let (i, j, k) = MONOMIALS[t];
        table[i as usize][j as usize][k as usize] = t;
        t += 1;
    }
    table
}

const INDEX: [[[usize; DEGREE + 1]; DEGREE + 1]; DEGREE + 1] = build_index();

/// Taylor coefficients `c[i,j,k] = (d^i_x d^j_y d^k_p f) / (i! j! k!)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub c: [f64; TERMS],
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; TERMS];
        c[0] = v;
        Jet3 { c }
    }

    fn seed(slot: usize, v: f64) -> Self {
        let mut c = [0.0; TERMS];
        c[0] = v;
        c[slot] = 1.0;
        Jet3 { c }
    }

    /// The x-variable jet at base point `x0` (graded order puts the linear
    /// monomials at indices 1..=3 as x, y, p).
    pub fn var_x(x0: f64) -> Self {
        Jet3::seed(INDEX[1][0][0], x0)
    }

    pub fn var_y(y0: f64) -> Self {
        Jet3::seed(INDEX[0][1][0], y0)
    }

    pub fn var_p(p0: f64) -> Self {
        Jet3::seed(INDEX[0][0][1], p0)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Mixed partial derivative `d^i_x d^j_y d^k_p` at the base point.
    pub fn partial(&self, i: usize, j: usize, k: usize) -> f64 {
        let idx = INDEX[i][j][k];
        self.c[idx] * (fact(i) * fact(j) * fact(k))
    }

    pub fn add(&self, o: &Jet3) -> Jet3 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(&o.c) {
            *a += b;
        }
        Jet3 { c }
    }

    pub fn sub(&self, o: &Jet3) -> Jet3 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        Jet3 { c }
    }

    pub fn neg(&self) -> Jet3 {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Jet3 { c }
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a *= s;
        }
        Jet3 { c }
    }

    pub fn mul(&self, o: &Jet3) -> Jet3 {
        let mut c = [0.0; TERMS];
        for (ta, &(ia, ja, ka)) in MONOMIALS.iter().enumerate() {
            if self.c[ta] == 0.0 {
                continue;
            }
            for (tb, &(ib, jb, kb)) in MONOMIALS.iter().enumerate() {
                let (i, j, k) = ((ia + ib) as usize, (ja + jb) as usize, (ka + kb) as usize);
                if i + j + k > DEGREE {
                    continue;
                }
                c[INDEX[i][j][k]] += self.c[ta] * o.c[tb];
            }
        }
        Jet3 { c }
    }

    /// Split into constant part and nilpotent remainder.
    fn nilpotent(&self) -> Jet3 {
        let mut n = *self;
        n.c[0] = 0.0;
        n
    }

    /// Compose a scalar function given its derivatives at the base value:
    /// `f(u0 + h) = sum_m derivs[m]/m! h^m` with `h` nilpotent.
    fn compose(&self, derivs: [f64; DEGREE + 1]) -> Jet3 {
        let h = self.nilpotent();
        let mut acc = Jet3::constant(derivs[DEGREE] / fact(DEGREE));
        for m in (0..DEGREE).rev() {
            acc = acc.mul(&h);
            acc.c[0] += derivs[m] / fact(m);
        }
        acc
    }

    pub fn recip(&self) -> Jet3 {
        let u = self.value();
        assert!(u != 0.0, "jet reciprocal at zero");
        // d^m (1/u) = (-1)^m m! / u^{m+1}
        let mut d = [0.0; DEGREE + 1];
        for (m, slot) in d.iter_mut().enumerate() {
            *slot = if m % 2 == 0 { 1.0 } else { -1.0 } * fact(m) / u.powi(m as i32 + 1);
        }
        self.compose(d)
    }

    pub fn div(&self, o: &Jet3) -> Jet3 {
        self.mul(&o.recip())
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn tan(&self) -> Jet3 {
        self.sin().div(&self.cos())
    }

    pub fn atan(&self) -> Jet3 {
        let u = self.value();
        let q = 1.0 + u * u;
        self.compose([
            u.atan(),
            1.0 / q,
            -2.0 * u / (q * q),
            (6.0 * u * u - 2.0) / (q * q * q),
            24.0 * u * (1.0 - u * u) / (q * q * q * q),
        ])
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value().exp();
        self.compose([e, e, e, e, e])
    }

    pub fn ln(&self) -> Jet3 {
        let u = self.value();
        assert!(u > 0.0, "jet logarithm of non-positive value");
        self.compose([
            u.ln(),
            1.0 / u,
            -1.0 / (u * u),
            2.0 / (u * u * u),
            -6.0 / (u * u * u * u),
        ])
    }

    pub fn sqrt(&self) -> Jet3 {
        self.powf(0.5)
    }

    pub fn powi(&self, n: i32) -> Jet3 {
        if n == 0 {
            return Jet3::constant(1.0);
        }
        let (mut base, mut n_abs) = (*self, n.unsigned_abs());
        let mut acc = Jet3::constant(1.0);
        while n_abs > 0 {
            if n_abs & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n_abs >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn powf(&self, r: f64) -> Jet3 {
        if r.fract() == 0.0 && r.abs() <= 64.0 {
            return self.powi(r as i32);
        }
        let u = self.value();
        assert!(u > 0.0, "jet non-integer power of non-positive base");
        let mut d = [0.0; DEGREE + 1];
        let mut coef = 1.0;
        for (m, slot) in d.iter_mut().enumerate() {
            *slot = coef * u.powf(r - m as f64);
            coef *= r - m as f64;
        }
        self.compose(d)
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product::<f64>().max(1.0)
}
