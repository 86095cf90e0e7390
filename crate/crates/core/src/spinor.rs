//! Two-component spinors, their null vectors and the gauge family of spinor
//! tetrads `(k, m, a, b)`.
//!
//! Pauli matrices are in the standard basis with `σ⁰ = 1`. A spinor `κ` and a
//! mate `τ` with `κ⁰τ¹ − κ¹τ⁰ = 1` give
//!
//! ```text
//! k = κ⁺σκ,  m = τ⁺στ,  a + ib = τ⁺σκ.
//! ```

use std::ops::{Add, Mul, Neg, Sub};

use crate::ad::Real;
use crate::algebra::FourVector;
use crate::error::{Error, Result};

/// Minimal complex arithmetic over any [`Real`] scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex<T = f64> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }

    pub fn real(re: T) -> Self {
        Complex { re, im: T::zero() }
    }

    /// `e^{iθ}`.
    pub fn cis(theta: T) -> Self {
        Complex {
            re: theta.cos(),
            im: theta.sin(),
        }
    }

    pub fn conj(self) -> Self {
        Complex {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, s: T) -> Self {
        Complex {
            re: self.re * s,
            im: self.im * s,
        }
    }

    /// Multiplication by `i`.
    pub fn mul_i(self) -> Self {
        Complex {
            re: -self.im,
            im: self.re,
        }
    }

    pub fn value(self) -> Complex<f64> {
        Complex {
            re: self.re.value(),
            im: self.im.value(),
        }
    }
}

impl<T: Real> Add for Complex<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl<T: Real> Sub for Complex<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl<T: Real> Mul for Complex<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl<T: Real> Neg for Complex<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

/// Spinor `κ = (κ⁰, κ¹)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor<T = f64> {
    pub c0: Complex<T>,
    pub c1: Complex<T>,
}

impl<T: Real> Spinor<T> {
    pub fn new(c0: Complex<T>, c1: Complex<T>) -> Self {
        Spinor { c0, c1 }
    }

    /// `κ⁺κ`.
    pub fn norm_sqr(&self) -> T {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Spinor {
            c0: self.c0 * z,
            c1: self.c1 * z,
        }
    }

    /// The antisymmetric volume form `κ⁰τ¹ − κ¹τ⁰`.
    pub fn volume(&self, tau: &Spinor<T>) -> Complex<T> {
        self.c0 * tau.c1 - self.c1 * tau.c0
    }

    pub fn value(&self) -> Spinor<f64> {
        Spinor {
            c0: self.c0.value(),
            c1: self.c1.value(),
        }
    }

    fn check_nonzero(&self) -> Result<()> {
        if self.norm_sqr().value() > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("zero spinor"))
        }
    }
}

impl<T: Real> Add for Spinor<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Spinor {
            c0: self.c0 + o.c0,
            c1: self.c1 + o.c1,
        }
    }
}

/// Complex bilinear `u⁺σ^μ v` for μ = 0..3.
pub fn sigma_bilinear<T: Real>(u: &Spinor<T>, v: &Spinor<T>) -> [Complex<T>; 4] {
    let (u0, u1) = (u.c0.conj(), u.c1.conj());
    let s0 = u0 * v.c0 + u1 * v.c1;
    let s1 = u0 * v.c1 + u1 * v.c0;
    let s2 = (u1 * v.c0 - u0 * v.c1).mul_i();
    let s3 = u0 * v.c0 - u1 * v.c1;
    [s0, s1, s2, s3]
}

/// Spinor from the direction angles of its null vector, magnitude parameter
/// `psi` and phase `phase`:
///
/// `κ = e^{iΦ/2} √Ψ (e^{−iφ/2} cos(θ/2), e^{iφ/2} sin(θ/2))`.
pub fn spinor_from_angles<T: Real>(theta: T, phi: T, psi: T, phase: T) -> Result<Spinor<T>> {
    if !(psi.value() > 0.0) {
        return Err(Error::domain(format!("spinor magnitude {} must be positive", psi.value())));
    }
    let pre = Complex::cis(phase * 0.5).scale(psi.sqrt());
    let half = theta * 0.5;
    Ok(Spinor {
        c0: pre * Complex::cis(-phi * 0.5).scale(half.cos()),
        c1: pre * Complex::cis(phi * 0.5).scale(half.sin()),
    })
}

/// The explicit mate written in the same angle data,
/// `τ = e^{−iΦ/2}/√Ψ (−e^{−iφ/2} sin(θ/2), e^{iφ/2} cos(θ/2))`.
pub fn mate_from_angles<T: Real>(theta: T, phi: T, psi: T, phase: T) -> Result<Spinor<T>> {
    if !(psi.value() > 0.0) {
        return Err(Error::domain(format!("spinor magnitude {} must be positive", psi.value())));
    }
    let pre = Complex::cis(-phase * 0.5).scale(psi.sqrt().recip());
    let half = theta * 0.5;
    Ok(Spinor {
        c0: -(pre * Complex::cis(-phi * 0.5).scale(half.sin())),
        c1: pre * Complex::cis(phi * 0.5).scale(half.cos()),
    })
}

/// `k^μ = κ⁺σ^μκ`.
pub fn null_vector<T: Real>(kappa: &Spinor<T>) -> FourVector<T> {
    let s = sigma_bilinear(kappa, kappa);
    FourVector([s[0].re, s[1].re, s[2].re, s[3].re])
}

/// Canonical mate `τ = (−κ̄¹, κ̄⁰)/(κ⁺κ)`, which coincides with
/// [`mate_from_angles`] for spinors built by [`spinor_from_angles`].
pub fn mate<T: Real>(kappa: &Spinor<T>) -> Result<Spinor<T>> {
    kappa.check_nonzero()?;
    let inv = kappa.norm_sqr().recip();
    Ok(Spinor {
        c0: -kappa.c1.conj().scale(inv),
        c1: kappa.c0.conj().scale(inv),
    })
}

/// Mate shifted by the residual freedom `τ̃ = τ + λ e^{−iν} κ`.
pub fn shifted_mate<T: Real>(kappa: &Spinor<T>, lambda: T, nu: T) -> Result<Spinor<T>> {
    Ok(mate(kappa)? + kappa.scale(Complex::cis(-nu).scale(lambda)))
}

/// Spinor tetrad `(k, m, a, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tetrad<T = f64> {
    pub k: FourVector<T>,
    pub m: FourVector<T>,
    pub a: FourVector<T>,
    pub b: FourVector<T>,
}

impl<T: Real> Tetrad<T> {
    pub fn vectors(&self) -> [FourVector<T>; 4] {
        [self.k, self.m, self.a, self.b]
    }

    pub fn value(&self) -> Tetrad<f64> {
        Tetrad {
            k: self.k.value(),
            m: self.m.value(),
            a: self.a.value(),
            b: self.b.value(),
        }
    }

    /// Reconstructs `v = ½(mv)k + ½(kv)m − (av)a − (bv)b`.
    pub fn expand(&self, v: &FourVector<T>) -> FourVector<T> {
        self.k.scale(self.m.dot(v) * 0.5) + self.m.scale(self.k.dot(v) * 0.5)
            - self.a.scale(self.a.dot(v))
            - self.b.scale(self.b.dot(v))
    }

    /// `uv = ½(kv)(mu) + ½(ku)(mv) − (au)(av) − (bu)(bv)`.
    pub fn product(&self, u: &FourVector<T>, v: &FourVector<T>) -> T {
        (self.k.dot(v) * self.m.dot(u) + self.k.dot(u) * self.m.dot(v)) * 0.5
            - self.a.dot(u) * self.a.dot(v)
            - self.b.dot(u) * self.b.dot(v)
    }
}

impl Tetrad<f64> {
    /// Largest deviation of the nine scalar products from
    /// `aa = bb = −1, km = 2`, all others zero.
    pub fn relation_defect(&self) -> f64 {
        let Tetrad { k, m, a, b } = self;
        let checks = [
            (a.dot(a), -1.0),
            (b.dot(b), -1.0),
            (a.dot(b), 0.0),
            (a.dot(m), 0.0),
            (a.dot(k), 0.0),
            (b.dot(m), 0.0),
            (b.dot(k), 0.0),
            (k.dot(k), 0.0),
            (m.dot(m), 0.0),
            (k.dot(m), 2.0),
        ];
        checks
            .iter()
            .map(|(got, want)| (got - want).abs())
            .fold(0.0, f64::max)
    }

    /// Product of the largest components of `k` and `m`; the natural magnitude
    /// of every scalar product that enters [`Tetrad::relation_defect`].
    pub fn scale(&self) -> f64 {
        let s = self.k.max_abs().max(1.0) * self.m.max_abs().max(1.0);
        s.max(self.a.max_abs().powi(2)).max(self.b.max_abs().powi(2))
    }
}

/// Tetrad of a spinor and a chosen mate.
pub fn tetrad_of_pair<T: Real>(kappa: &Spinor<T>, tau: &Spinor<T>) -> Tetrad<T> {
    let ab = sigma_bilinear(tau, kappa);
    Tetrad {
        k: null_vector(kappa),
        m: null_vector(tau),
        a: FourVector([ab[0].re, ab[1].re, ab[2].re, ab[3].re]),
        b: FourVector([ab[0].im, ab[1].im, ab[2].im, ab[3].im]),
    }
}

/// Tetrad of `κ` with its canonical mate.
pub fn tetrad<T: Real>(kappa: &Spinor<T>) -> Result<Tetrad<T>> {
    Ok(tetrad_of_pair(kappa, &mate(kappa)?))
}

/// `k̃ = k, ã = a + αk, b̃ = b + βk, m̃ = m + 2αa + 2βb + (α² + β²)k`.
pub fn gauge_transform<T: Real>(t: &Tetrad<T>, alpha: T, beta: T) -> Tetrad<T> {
    Tetrad {
        k: t.k,
        a: t.a + t.k.scale(alpha),
        b: t.b + t.k.scale(beta),
        m: t.m + t.a.scale(alpha * 2.0) + t.b.scale(beta * 2.0)
            + t.k.scale(alpha * alpha + beta * beta),
    }
}

/// Rotation of `(a, b)` through `delta`, the effect of a spinor phase shift.
pub fn phase_rotate<T: Real>(t: &Tetrad<T>, delta: T) -> Tetrad<T> {
    let (s, c) = (delta.sin(), delta.cos());
    Tetrad {
        k: t.k,
        m: t.m,
        a: t.a.scale(c) - t.b.scale(s),
        b: t.a.scale(s) + t.b.scale(c),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::algebra::gram_det;

    fn close(a: &FourVector, b: &FourVector, tol: f64) -> bool {
        (0..4).all(|i| (a[i] - b[i]).abs() <= tol)
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn spinor_from_angles_examples() {
        let k = spinor_from_angles(0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(k, Spinor::new(c(1.0, 0.0), c(0.0, 0.0)));
        let k = spinor_from_angles(PI, 0.0, 1.0, 0.0).unwrap();
        assert!((k.c0.re).abs() < 1e-16 && (k.c1.re - 1.0).abs() < 1e-16);
        assert!(matches!(spinor_from_angles(0.3, 0.1, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(spinor_from_angles(0.3, 0.1, -1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn phase_period_is_four_pi() {
        let a = spinor_from_angles(0.7, 1.9, 2.5, 0.4).unwrap();
        let b = spinor_from_angles(0.7, 1.9, 2.5, 0.4 + 4.0 * PI).unwrap();
        assert!((a.c0 - b.c0).norm_sqr() < 1e-28 && (a.c1 - b.c1).norm_sqr() < 1e-28);
        let b = spinor_from_angles(0.7, 1.9, 2.5, 0.4 + 2.0 * PI).unwrap();
        assert!((a.c0 + b.c0).norm_sqr() < 1e-28);
    }

    #[test]
    fn null_vector_examples() {
        let up = Spinor::new(c(1.0, 0.0), c(0.0, 0.0));
        let down = Spinor::new(c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(null_vector(&up), FourVector::new(1.0, 0.0, 0.0, 1.0));
        assert_eq!(null_vector(&down), FourVector::new(1.0, 0.0, 0.0, -1.0));
        let kap = spinor_from_angles(1.1, 0.3, 1.7, 0.2).unwrap();
        let k1 = null_vector(&kap);
        let k2 = null_vector(&kap.scale(Complex::cis(0.77)));
        assert!(close(&k1, &k2, 1e-15));
        assert!(k1.norm_sqr().abs() < 1e-14);
    }

    #[test]
    fn mate_examples() {
        let up = Spinor::new(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(mate(&up).unwrap(), Spinor::new(c(0.0, 0.0), c(1.0, 0.0)));
        let zero = Spinor::new(c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(mate(&zero), Err(Error::Domain(_))));

        let (th, ph, psi, phase) = (1.1, 4.0, 0.6, 2.9);
        let kap = spinor_from_angles(th, ph, psi, phase).unwrap();
        let t1 = mate(&kap).unwrap();
        let t2 = mate_from_angles(th, ph, psi, phase).unwrap();
        assert!((t1.c0 - t2.c0).norm_sqr() < 1e-28 && (t1.c1 - t2.c1).norm_sqr() < 1e-28);
        let v = kap.volume(&t1);
        assert!((v.re - 1.0).abs() < 1e-14 && v.im.abs() < 1e-14);
        let shifted = shifted_mate(&kap, 1.3, 0.4).unwrap();
        let v = kap.volume(&shifted);
        assert!((v.re - 1.0).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn standard_tetrad() {
        let up = Spinor::new(c(1.0, 0.0), c(0.0, 0.0));
        let t = tetrad(&up).unwrap();
        assert_eq!(t.k, FourVector::new(1.0, 0.0, 0.0, 1.0));
        assert_eq!(t.m, FourVector::new(1.0, 0.0, 0.0, -1.0));
        assert_eq!(t.a, FourVector::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(t.b, FourVector::new(0.0, 0.0, 1.0, 0.0));
        assert!((gram_det(&t.k, &t.m, &t.a, &t.b) + 4.0).abs() < 1e-14);
    }

    #[test]
    fn gauge_examples() {
        let up = Spinor::new(c(1.0, 0.0), c(0.0, 0.0));
        let t = tetrad(&up).unwrap();
        assert_eq!(gauge_transform(&t, 0.0, 0.0), t);
        let g = gauge_transform(&t, 1.0, 0.0);
        assert_eq!(g.a, FourVector::new(1.0, 1.0, 0.0, 1.0));
        assert_eq!(g.m, FourVector::new(2.0, 2.0, 0.0, 0.0));
        assert_eq!(g.m.norm_sqr(), 0.0);
        assert_eq!(g.k.dot(&g.m), 2.0);
        assert!(g.relation_defect() < 1e-15);
    }

    #[test]
    fn gauge_composition_adds_parameters() {
        let kap = spinor_from_angles(0.4, 2.2, 1.3, 0.9).unwrap();
        let t = tetrad(&kap).unwrap();
        let two = gauge_transform(&gauge_transform(&t, 0.3, -1.2), -0.8, 0.5);
        let one = gauge_transform(&t, -0.5, -0.7);
        for (x, y) in two.vectors().iter().zip(one.vectors().iter()) {
            assert!(close(x, y, 1e-14));
        }
    }

    #[test]
    fn shifted_mate_is_a_gauge_transformation() {
        let kap = spinor_from_angles(0.4, 2.2, 1.3, 0.9).unwrap();
        let (lambda, nu) = (0.7, 1.1);
        let shifted = tetrad_of_pair(&kap, &shifted_mate(&kap, lambda, nu).unwrap());
        let gauged = gauge_transform(&tetrad(&kap).unwrap(), lambda * nu.cos(), lambda * nu.sin());
        for (x, y) in shifted.vectors().iter().zip(gauged.vectors().iter()) {
            assert!(close(x, y, 1e-13));
        }
    }

    #[test]
    fn phase_rotation_examples() {
        let up = Spinor::new(c(1.0, 0.0), c(0.0, 0.0));
        let t = tetrad(&up).unwrap();
        assert_eq!(phase_rotate(&t, 0.0), t);
        let r = phase_rotate(&t, PI / 2.0);
        // a → a cosΔ − b sinΔ, b → a sinΔ + b cosΔ
        assert!(close(&r.a, &FourVector::new(0.0, 0.0, -1.0, 0.0), 1e-16));
        assert!(close(&r.b, &FourVector::new(0.0, 1.0, 0.0, 0.0), 1e-16));
    }

    #[test]
    fn phase_shift_of_spinor_rotates_tetrad() {
        let (th, ph, psi, phase, delta) = (0.9, 0.4, 2.0, 0.3, 0.75);
        let t0 = tetrad(&spinor_from_angles(th, ph, psi, phase).unwrap()).unwrap();
        let t1 = tetrad(&spinor_from_angles(th, ph, psi, phase + delta).unwrap()).unwrap();
        let r = phase_rotate(&t0, delta);
        for (x, y) in t1.vectors().iter().zip(r.vectors().iter()) {
            assert!(close(x, y, 1e-14));
        }
    }
}
