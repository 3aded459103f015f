//! Truncated Taylor jets for forward-mode differentiation.
//!
//! [`Jet3`] carries a value and its first three derivatives in one variable.
//! [`BiJet`] carries the full bivariate Taylor polynomial to total order 4.
//! Both (and plain `f64`) implement [`Scalar`], which is all the expression
//! evaluator needs.

use std::ops::{Add, Mul, Neg, Sub};

/// Numeric type the expression evaluator and the frame computations run on.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(value: f64) -> Self;

    fn value(&self) -> f64;

    /// True when every derivative component vanishes.
    fn is_constant(&self) -> bool;

    /// Applies a scalar function `f` given `[f, f', f'', f''', f'''']` at
    /// `self.value()`.
    fn compose(&self, f: [f64; 5]) -> Self;

    fn is_finite(&self) -> bool;

    fn scale(self, k: f64) -> Self {
        self * Self::constant(k)
    }

    /// `1/self`; the caller guarantees a nonzero value.
    fn recip(self) -> Self {
        let x = self.value();
        let r = 1.0 / x;
        let r2 = r * r;
        self.compose([r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2, 24.0 * r2 * r2 * r])
    }

    /// `sqrt(self)`; the caller guarantees a positive value.
    fn sqrt(self) -> Self {
        let x = self.value();
        let s = x.sqrt();
        self.compose([
            s,
            0.5 / s,
            -0.25 / (x * s),
            0.375 / (x * x * s),
            -0.9375 / (x * x * x * s),
        ])
    }
}

impl Scalar for f64 {
    fn constant(value: f64) -> Self {
        value
    }

    fn value(&self) -> f64 {
        *self
    }

    fn is_constant(&self) -> bool {
        true
    }

    fn compose(&self, f: [f64; 5]) -> Self {
        f[0]
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Value and first three derivatives with respect to one variable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub const fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet3 { value, d1, d2, d3 }
    }

    /// The independent variable seeded at `x`.
    pub const fn variable(x: f64) -> Self {
        Jet3::new(x, 1.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.value, self.d1, self.d2, self.d3]
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, b: Jet3) -> Jet3 {
        Jet3::new(
            self.value + b.value,
            self.d1 + b.d1,
            self.d2 + b.d2,
            self.d3 + b.d3,
        )
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, b: Jet3) -> Jet3 {
        Jet3::new(
            self.value - b.value,
            self.d1 - b.d1,
            self.d2 - b.d2,
            self.d3 - b.d3,
        )
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        Jet3::new(-self.value, -self.d1, -self.d2, -self.d3)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, b: Jet3) -> Jet3 {
        let a = self;
        Jet3::new(
            a.value * b.value,
            a.d1 * b.value + a.value * b.d1,
            a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2,
            a.d3 * b.value + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.value * b.d3,
        )
    }
}

impl Scalar for Jet3 {
    fn constant(value: f64) -> Self {
        Jet3::new(value, 0.0, 0.0, 0.0)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn is_constant(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.d3 == 0.0
    }

    // Faa di Bruno to third order.
    fn compose(&self, f: [f64; 5]) -> Self {
        let (a1, a2, a3) = (self.d1, self.d2, self.d3);
        Jet3::new(
            f[0],
            f[1] * a1,
            f[2] * a1 * a1 + f[1] * a2,
            f[3] * a1 * a1 * a1 + 3.0 * f[2] * a1 * a2 + f[1] * a3,
        )
    }

    fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

const BI_LEN: usize = 15;
const BI_ORDER: usize = 4;

/// Monomial exponents `(i, j)` of `x^i y^j`, graded by total degree.
const BI_POWERS: [(usize, usize); BI_LEN] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

const fn bi_index(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

const MUL_TERMS: usize = 70;

const fn build_mul_table() -> [(u8, u8, u8); MUL_TERMS] {
    let mut table = [(0u8, 0u8, 0u8); MUL_TERMS];
    let mut n = 0;
    let mut a = 0;
    while a < BI_LEN {
        let mut b = 0;
        while b < BI_LEN {
            let (ia, ja) = BI_POWERS[a];
            let (ib, jb) = BI_POWERS[b];
            if ia + ja + ib + jb <= BI_ORDER {
                table[n] = (a as u8, b as u8, bi_index(ia + ib, ja + jb) as u8);
                n += 1;
            }
            b += 1;
        }
        a += 1;
    }
    table
}

const MUL_TABLE: [(u8, u8, u8); MUL_TERMS] = build_mul_table();

const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Bivariate Taylor polynomial truncated at total degree 4.
///
/// Coefficients are stored in Taylor form (`c[i,j] = ∂^{i+j}f / ∂x^i∂y^j / (i! j!)`).
/// Coefficients of degree `k` of any result depend only on coefficients of
/// degree `<= k` of the operands, so a jet that is only trusted to a lower
/// order (for instance after [`BiJet::partial`]) still propagates correctly
/// at that order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BiJet {
    c: [f64; BI_LEN],
}

impl BiJet {
    /// Coordinate `axis` (0 = x, 1 = y) seeded at `x`.
    pub fn variable(x: f64, axis: usize) -> Self {
        let mut c = [0.0; BI_LEN];
        c[0] = x;
        c[1 + axis.min(1)] = 1.0;
        BiJet { c }
    }

    /// Partial derivative `∂^{i+j} / ∂x^i ∂y^j` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= BI_ORDER, "derivative order exceeds jet order");
        self.c[bi_index(i, j)] * FACTORIAL[i] * FACTORIAL[j]
    }

    /// The jet of `∂f/∂(axis)`. Valid to one order less than `self`.
    pub fn partial(&self, axis: usize) -> BiJet {
        let mut c = [0.0; BI_LEN];
        for (n, &(i, j)) in BI_POWERS.iter().enumerate() {
            if i + j == BI_ORDER {
                continue;
            }
            let (src, factor) = if axis == 0 {
                (bi_index(i + 1, j), (i + 1) as f64)
            } else {
                (bi_index(i, j + 1), (j + 1) as f64)
            };
            c[n] = factor * self.c[src];
        }
        BiJet { c }
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.derivative(1, 0), self.derivative(0, 1)]
    }
}

impl Add for BiJet {
    type Output = BiJet;
    fn add(mut self, b: BiJet) -> BiJet {
        for (x, y) in self.c.iter_mut().zip(b.c) {
            *x += y;
        }
        self
    }
}

impl Sub for BiJet {
    type Output = BiJet;
    fn sub(mut self, b: BiJet) -> BiJet {
        for (x, y) in self.c.iter_mut().zip(b.c) {
            *x -= y;
        }
        self
    }
}

impl Neg for BiJet {
    type Output = BiJet;
    fn neg(mut self) -> BiJet {
        for x in self.c.iter_mut() {
            *x = -*x;
        }
        self
    }
}

impl Mul for BiJet {
    type Output = BiJet;
    fn mul(self, b: BiJet) -> BiJet {
        let mut c = [0.0; BI_LEN];
        for &(ia, ib, out) in MUL_TABLE.iter() {
            c[out as usize] += self.c[ia as usize] * b.c[ib as usize];
        }
        BiJet { c }
    }
}

impl Scalar for BiJet {
    fn constant(value: f64) -> Self {
        let mut c = [0.0; BI_LEN];
        c[0] = value;
        BiJet { c }
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&x| x == 0.0)
    }

    fn compose(&self, f: [f64; 5]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let mut out = BiJet::constant(f[0]);
        for n in 1..BI_LEN {
            out.c[n] = f[1] * delta.c[n]
                + 0.5 * f[2] * d2.c[n]
                + f[3] / 6.0 * d3.c[n]
                + f[4] / 24.0 * d4.c[n];
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet3_product_rule() {
        let a = Jet3::new(1.5, -0.3, 2.0, 0.7);
        let b = Jet3::new(-0.4, 1.1, 0.2, -3.0);
        let p = a * b;
        assert_eq!(p.d1, a.d1 * b.value + a.value * b.d1);
        assert_eq!(p.d2, a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2);
        assert_eq!(
            p.d3,
            a.d3 * b.value + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.value * b.d3
        );
    }

    #[test]
    fn jet3_cube() {
        let x = Jet3::variable(2.0);
        let y = x * x * x;
        assert_eq!(y.as_array(), [8.0, 12.0, 12.0, 6.0]);
    }

    #[test]
    fn bijet_polynomial_derivatives() {
        // f = x^2 y + 3 x y^2 at (1, 2)
        let x = BiJet::variable(1.0, 0);
        let y = BiJet::variable(2.0, 1);
        let f = x * x * y + BiJet::constant(3.0) * x * y * y;
        assert_eq!(f.value(), 2.0 + 12.0);
        assert_eq!(f.derivative(1, 0), 2.0 * 2.0 + 3.0 * 4.0);
        assert_eq!(f.derivative(0, 1), 1.0 + 12.0);
        assert_eq!(f.derivative(2, 0), 4.0);
        assert_eq!(f.derivative(1, 1), 2.0 + 12.0);
        assert_eq!(f.derivative(0, 2), 6.0);
        assert_eq!(f.derivative(2, 1), 2.0);
        assert_eq!(f.derivative(1, 2), 6.0);
        assert_eq!(f.derivative(3, 0), 0.0);
        assert_eq!(f.derivative(0, 3), 0.0);
        let g = f * x * y;
        // g = x^3 y^2 + 3 x^2 y^3
        assert_eq!(g.derivative(2, 2), 6.0 * 2.0 + 3.0 * 2.0 * 6.0 * 2.0);
        assert_eq!(g.derivative(3, 1), 6.0 * 2.0 * 2.0);
        assert_eq!(g.derivative(1, 3), 3.0 * 2.0 * 6.0);
        assert_eq!(g.derivative(4, 0), 0.0);
    }

    #[test]
    fn bijet_partial_shifts_order() {
        let x = BiJet::variable(0.5, 0);
        let y = BiJet::variable(-1.0, 1);
        let f = x * x * y;
        let fx = f.partial(0);
        assert_eq!(fx.value(), 2.0 * 0.5 * -1.0);
        assert_eq!(fx.derivative(1, 0), -2.0);
        assert_eq!(fx.derivative(0, 1), 1.0);
        assert_eq!(fx.derivative(1, 1), 2.0);
    }

    #[test]
    fn bijet_compose_matches_univariate() {
        let x = BiJet::variable(0.3, 0);
        let s = x.compose([
            0.3f64.sin(),
            0.3f64.cos(),
            -0.3f64.sin(),
            -0.3f64.cos(),
            0.3f64.sin(),
        ]);
        assert!((s.derivative(3, 0) + 0.3f64.cos()).abs() < 1e-15);
        assert!((s.derivative(4, 0) - 0.3f64.sin()).abs() < 1e-15);
        assert_eq!(s.derivative(0, 1), 0.0);
    }

    #[test]
    fn recip_and_sqrt() {
        let x = Jet3::variable(4.0);
        let r = x.recip();
        assert!((r.d1 + 1.0 / 16.0).abs() < 1e-15);
        let s = x.sqrt();
        assert!((s.value - 2.0).abs() < 1e-15);
        assert!((s.d1 - 0.25).abs() < 1e-15);
        assert!((s.d2 + 1.0 / 32.0).abs() < 1e-15);
        assert!((s.d3 - 3.0 / 256.0).abs() < 1e-15);
    }
}
