//! Forward-mode automatic differentiation.
//!
//! Every numerical kernel in the crate is written once against the [`Real`]
//! trait and then evaluated with one of three scalar types:
//!
//! - `f64` for plain values,
//! - [`Dual`] for one directional first derivative,
//! - [`HyperDual`] for a mixed second derivative `∂²f/∂u∂v` along two
//!   (possibly equal) directions.
//!
//! Derivatives obtained this way are exact up to rounding; no step sizes are
//! involved. Elementary functions are lifted through [`Real::lift`], which only
//! needs the value and the first two derivatives of the outer function, so the
//! same code path serves both dual types.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

/// Value and derivatives up to second order of a function of two arguments
/// `g(a, b)` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub f: f64,
    pub fa: f64,
    pub fb: f64,
    pub faa: f64,
    pub fab: f64,
    pub fbb: f64,
}

impl Jet2 {
    pub fn constant(c: f64) -> Self {
        Jet2 {
            f: c,
            ..Default::default()
        }
    }

    /// The first argument as a jet.
    pub fn var_a(a: f64) -> Self {
        Jet2 {
            f: a,
            fa: 1.0,
            ..Default::default()
        }
    }

    /// The second argument as a jet.
    pub fn var_b(b: f64) -> Self {
        Jet2 {
            f: b,
            fb: 1.0,
            ..Default::default()
        }
    }

    /// `h ∘ self` for a unary `h` with value `h0` and derivatives `h1`, `h2`.
    pub fn chain(self, h0: f64, h1: f64, h2: f64) -> Self {
        Jet2 {
            f: h0,
            fa: h1 * self.fa,
            fb: h1 * self.fb,
            faa: h2 * self.fa * self.fa + h1 * self.faa,
            fab: h2 * self.fa * self.fb + h1 * self.fab,
            fbb: h2 * self.fb * self.fb + h1 * self.fbb,
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.f.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.f))
    }

    pub fn recip(self) -> Self {
        let v = self.f;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn scale(self, c: f64) -> Self {
        Jet2 {
            f: c * self.f,
            fa: c * self.fa,
            fb: c * self.fb,
            faa: c * self.faa,
            fab: c * self.fab,
            fbb: c * self.fbb,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.f, self.fa, self.fb, self.faa, self.fab, self.fbb]
            .iter()
            .all(|v| v.is_finite())
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            f: self.f + o.f,
            fa: self.fa + o.fa,
            fb: self.fb + o.fb,
            faa: self.faa + o.faa,
            fab: self.fab + o.fab,
            fbb: self.fbb + o.fbb,
        }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        Jet2 { f: self.f + c, ..self }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            f: self.f * o.f,
            fa: self.fa * o.f + self.f * o.fa,
            fb: self.fb * o.f + self.f * o.fb,
            faa: self.faa * o.f + 2.0 * self.fa * o.fa + self.f * o.faa,
            fab: self.fab * o.f + self.fa * o.fb + self.fb * o.fa + self.f * o.fab,
            fbb: self.fbb * o.f + 2.0 * self.fb * o.fb + self.f * o.fbb,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

/// Scalar type usable by the generic kernels.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn cst(c: f64) -> Self;

    /// The primal (non-derivative) part.
    fn value(self) -> f64;

    /// Applies a unary function given its value `f` and derivatives `d1`, `d2`
    /// at `self.value()`.
    fn lift(self, f: f64, d1: f64, d2: f64) -> Self;

    /// Applies a binary function given its second-order jet at the primal
    /// values of `a` and `b`.
    fn lift2(a: Self, b: Self, jet: &Jet2) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn sqrt(self) -> Self {
        let v = self.value();
        let s = v.sqrt();
        self.lift(s, 0.5 / s, -0.25 / (s * v))
    }

    fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.lift(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.lift(c, -s, -c)
    }

    fn tan(self) -> Self {
        let t = self.value().tan();
        let d1 = 1.0 + t * t;
        self.lift(t, d1, 2.0 * t * d1)
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.lift(e, e, e)
    }

    fn ln(self) -> Self {
        let v = self.value();
        self.lift(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    fn sinh(self) -> Self {
        let v = self.value();
        self.lift(v.sinh(), v.cosh(), v.sinh())
    }

    fn cosh(self) -> Self {
        let v = self.value();
        self.lift(v.cosh(), v.sinh(), v.cosh())
    }

    fn tanh(self) -> Self {
        let t = self.value().tanh();
        let d1 = 1.0 - t * t;
        self.lift(t, d1, -2.0 * t * d1)
    }

    fn acos(self) -> Self {
        let v = self.value();
        let w = 1.0 - v * v;
        self.lift(v.acos(), -1.0 / w.sqrt(), -v / (w * w.sqrt()))
    }

    fn atan(self) -> Self {
        let v = self.value();
        let w = 1.0 + v * v;
        self.lift(v.atan(), 1.0 / w, -2.0 * v / (w * w))
    }

    fn recip(self) -> Self {
        let v = self.value();
        self.lift(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn powi(self, n: i32) -> Self {
        let v = self.value();
        let nf = f64::from(n);
        let d1 = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
        let d2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * v.powi(n - 2)
        };
        self.lift(v.powi(n), d1, d2)
    }

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Four-quadrant arctangent of `self / x`.
    fn atan2(self, x: Self) -> Self {
        let (yv, xv) = (self.value(), x.value());
        let r2 = xv * xv + yv * yv;
        let r4 = r2 * r2;
        let jet = Jet2 {
            f: yv.atan2(xv),
            fa: xv / r2,
            fb: -yv / r2,
            faa: -2.0 * xv * yv / r4,
            fab: (yv * yv - xv * xv) / r4,
            fbb: 2.0 * xv * yv / r4,
        };
        Self::lift2(self, x, &jet)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(c: f64) -> Self {
        c
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn lift(self, f: f64, _d1: f64, _d2: f64) -> Self {
        f
    }

    #[inline]
    fn lift2(_a: Self, _b: Self, jet: &Jet2) -> Self {
        jet.f
    }

    // Plain libm calls avoid the derivative bookkeeping of the defaults.
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn ln(self) -> Self {
        f64::ln(self)
    }

    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }

    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// First-order dual number `re + eps·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }

    pub fn var(re: f64) -> Self {
        Dual { re, eps: 1.0 }
    }
}

impl Real for Dual {
    fn cst(c: f64) -> Self {
        Dual { re: c, eps: 0.0 }
    }

    fn value(self) -> f64 {
        self.re
    }

    fn lift(self, f: f64, d1: f64, _d2: f64) -> Self {
        Dual {
            re: f,
            eps: d1 * self.eps,
        }
    }

    fn lift2(a: Self, b: Self, jet: &Jet2) -> Self {
        Dual {
            re: jet.f,
            eps: jet.fa * a.eps + jet.fb * b.eps,
        }
    }
}

/// Hyper-dual number `re + e1·ε₁ + e2·ε₂ + e12·ε₁ε₂` with `ε₁² = ε₂² = 0`.
///
/// Seeding `ε₁` along direction `u` and `ε₂` along `v` yields `∂_u f` in `e1`,
/// `∂_v f` in `e2` and `∂_u ∂_v f` in `e12`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HyperDual {
    pub re: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl HyperDual {
    pub fn new(re: f64, e1: f64, e2: f64, e12: f64) -> Self {
        HyperDual { re, e1, e2, e12 }
    }

    /// A variable seeded in both directions, so `e12` of any function of it is
    /// the second derivative.
    pub fn var2(re: f64) -> Self {
        HyperDual {
            re,
            e1: 1.0,
            e2: 1.0,
            e12: 0.0,
        }
    }
}

impl Real for HyperDual {
    fn cst(c: f64) -> Self {
        HyperDual {
            re: c,
            ..Default::default()
        }
    }

    fn value(self) -> f64 {
        self.re
    }

    fn lift(self, f: f64, d1: f64, d2: f64) -> Self {
        HyperDual {
            re: f,
            e1: d1 * self.e1,
            e2: d1 * self.e2,
            e12: d1 * self.e12 + d2 * self.e1 * self.e2,
        }
    }

    fn lift2(a: Self, b: Self, jet: &Jet2) -> Self {
        HyperDual {
            re: jet.f,
            e1: jet.fa * a.e1 + jet.fb * b.e1,
            e2: jet.fa * a.e2 + jet.fb * b.e2,
            e12: jet.fa * a.e12
                + jet.fb * b.e12
                + jet.faa * a.e1 * a.e2
                + jet.fab * (a.e1 * b.e2 + b.e1 * a.e2)
                + jet.fbb * b.e1 * b.e2,
        }
    }
}

macro_rules! impl_ops {
    ($t:ident { $($field:ident),* }) => {
        impl Add for $t {
            type Output = $t;
            #[inline]
            fn add(self, o: $t) -> $t {
                $t { $($field: self.$field + o.$field),* }
            }
        }

        impl Sub for $t {
            type Output = $t;
            #[inline]
            fn sub(self, o: $t) -> $t {
                $t { $($field: self.$field - o.$field),* }
            }
        }

        impl Neg for $t {
            type Output = $t;
            #[inline]
            fn neg(self) -> $t {
                $t { $($field: -self.$field),* }
            }
        }

        impl Mul<f64> for $t {
            type Output = $t;
            #[inline]
            fn mul(self, c: f64) -> $t {
                $t { $($field: self.$field * c),* }
            }
        }

        impl Div<f64> for $t {
            type Output = $t;
            #[inline]
            fn div(self, c: f64) -> $t {
                $t { $($field: self.$field / c),* }
            }
        }

        impl Add<f64> for $t {
            type Output = $t;
            #[inline]
            fn add(mut self, c: f64) -> $t {
                self.re += c;
                self
            }
        }

        impl Sub<f64> for $t {
            type Output = $t;
            #[inline]
            fn sub(mut self, c: f64) -> $t {
                self.re -= c;
                self
            }
        }

        impl Div for $t {
            type Output = $t;
            #[inline]
            fn div(self, o: $t) -> $t {
                self * o.recip()
            }
        }

        impl AddAssign for $t {
            #[inline]
            fn add_assign(&mut self, o: $t) {
                *self = *self + o;
            }
        }

        impl SubAssign for $t {
            #[inline]
            fn sub_assign(&mut self, o: $t) {
                *self = *self - o;
            }
        }

        impl MulAssign for $t {
            #[inline]
            fn mul_assign(&mut self, o: $t) {
                *self = *self * o;
            }
        }
    };
}

impl_ops!(Dual { re, eps });
impl_ops!(HyperDual { re, e1, e2, e12 });

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual {
            re: self.re * o.re,
            eps: self.eps * o.re + self.re * o.eps,
        }
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    #[inline]
    fn mul(self, o: HyperDual) -> HyperDual {
        HyperDual {
            re: self.re * o.re,
            e1: self.e1 * o.re + self.re * o.e1,
            e2: self.e2 * o.re + self.re * o.e2,
            e12: self.e12 * o.re + self.e1 * o.e2 + self.e2 * o.e1 + self.re * o.e12,
        }
    }
}

/// A scalar function of several variables that can be evaluated with any
/// [`Real`] type.
pub trait MultiFn {
    type Error;

    fn eval<T: Real>(&self, x: &[T]) -> Result<T, Self::Error>;
}

/// Value and gradient by `n` first-order passes.
pub fn gradient<F: MultiFn>(f: &F, x: &[f64]) -> Result<(f64, Vec<f64>), F::Error> {
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut value = 0.0;
    let mut seeded: Vec<Dual> = x.iter().map(|&v| Dual::cst(v)).collect();
    for i in 0..n {
        seeded[i].eps = 1.0;
        let out = f.eval(&seeded)?;
        seeded[i].eps = 0.0;
        value = out.re;
        grad[i] = out.eps;
    }
    if n == 0 {
        value = f.eval::<f64>(x)?;
    }
    Ok((value, grad))
}

/// Value, gradient and Hessian by `n(n+1)/2` hyper-dual passes.
pub fn hessian<F: MultiFn>(
    f: &F,
    x: &[f64],
) -> Result<(f64, Vec<f64>, DMatrix<f64>), F::Error> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    let mut grad = vec![0.0; n];
    let mut value = f.eval::<f64>(x)?;
    let mut seeded: Vec<HyperDual> = x.iter().map(|&v| HyperDual::cst(v)).collect();
    for i in 0..n {
        for j in i..n {
            seeded[i].e1 = 1.0;
            seeded[j].e2 = 1.0;
            let out = f.eval(&seeded)?;
            seeded[i].e1 = 0.0;
            seeded[j].e2 = 0.0;
            h[(i, j)] = out.e12;
            h[(j, i)] = out.e12;
            if i == j {
                grad[i] = out.e1;
                value = out.re;
            }
        }
    }
    Ok((value, grad, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly<T: Real>(x: T, y: T) -> T {
        x * x * y + (x * y).sin() + (x / y).sqrt()
    }

    #[test]
    fn dual_matches_analytic_derivative() {
        let (x, y) = (0.7, 1.3);
        let d = poly(Dual::var(x), Dual::cst(y));
        let expected = 2.0 * x * y + y * (x * y).cos() + 0.5 / (x * y).sqrt();
        assert!((d.eps - expected).abs() < 1e-14);
        assert!((d.re - poly(x, y)).abs() < 1e-15);
    }

    #[test]
    fn hyperdual_mixed_second_derivative() {
        let (x, y) = (0.7, 1.3);
        let hx = HyperDual::new(x, 1.0, 0.0, 0.0);
        let hy = HyperDual::new(y, 0.0, 1.0, 0.0);
        let out = poly(hx, hy);
        // ∂x f = 2xy + y cos(xy) + ½ x^{-1/2} y^{-1/2}
        let xy = x * y;
        let expected = 2.0 * x + xy.cos() - xy * xy.sin() - 0.25 / (x.sqrt() * y.powf(1.5));
        assert!((out.e12 - expected).abs() < 1e-13, "{} vs {}", out.e12, expected);
    }

    #[test]
    fn second_derivative_of_univariate() {
        let t = HyperDual::var2(0.4);
        let out = (t * 3.0).tanh();
        let th = (1.2f64).tanh();
        let d2 = 9.0 * (-2.0 * th * (1.0 - th * th));
        assert!((out.e12 - d2).abs() < 1e-13);
    }

    #[test]
    fn atan2_derivatives() {
        let t = HyperDual::var2(0.3);
        let y = t.sin();
        let x = t.cos();
        // atan2(sin t, cos t) = t
        let out = y.atan2(x);
        assert!((out.re - 0.3).abs() < 1e-15);
        assert!((out.e1 - 1.0).abs() < 1e-14);
        assert!(out.e12.abs() < 1e-14);
    }

    struct Rosen;

    impl MultiFn for Rosen {
        type Error = ();

        fn eval<T: Real>(&self, x: &[T]) -> Result<T, ()> {
            let a = T::one() - x[0];
            let b = x[1] - x[0] * x[0];
            Ok(a * a + b * b * 100.0)
        }
    }

    #[test]
    fn gradient_and_hessian_of_rosenbrock() {
        let x = [1.2, 0.8];
        let (v, g, h) = hessian(&Rosen, &x).unwrap();
        let (_, g1) = gradient(&Rosen, &x).unwrap();
        assert!((v - (0.04 + 100.0 * (0.8f64 - 1.44).powi(2))).abs() < 1e-12);
        let gx = -2.0 * (1.0 - 1.2) - 400.0 * 1.2 * (0.8 - 1.44);
        assert!((g[0] - gx).abs() < 1e-10 && (g1[0] - gx).abs() < 1e-10);
        assert!((h[(0, 0)] - (2.0 - 400.0 * (0.8 - 3.0 * 1.44))).abs() < 1e-10);
        assert!((h[(0, 1)] + 480.0).abs() < 1e-10);
        assert!((h[(1, 1)] - 200.0).abs() < 1e-12);
    }

    #[test]
    fn jet_arithmetic_matches_hyperdual() {
        let (a, b) = (0.6, 1.7);
        // g(a, b) = sqrt(a·b + 2) / b
        let j = ((Jet2::var_a(a) * Jet2::var_b(b) + 2.0).sqrt()) * Jet2::var_b(b).recip();
        let g = |x: HyperDual, y: HyperDual| (x * y + 2.0).sqrt() / y;
        let d = |e1: [f64; 2], e2: [f64; 2]| {
            g(
                HyperDual::new(a, e1[0], e2[0], 0.0),
                HyperDual::new(b, e1[1], e2[1], 0.0),
            )
        };
        let aa = d([1.0, 0.0], [1.0, 0.0]);
        let ab = d([1.0, 0.0], [0.0, 1.0]);
        let bb = d([0.0, 1.0], [0.0, 1.0]);
        for (x, y) in [
            (j.f, aa.re),
            (j.fa, aa.e1),
            (j.fb, bb.e1),
            (j.faa, aa.e12),
            (j.fab, ab.e12),
            (j.fbb, bb.e12),
        ] {
            assert!((x - y).abs() < 1e-14, "{x} vs {y}");
        }
    }
}
