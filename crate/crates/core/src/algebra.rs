//! Minkowski four-vectors with signature (+,−,−,−).
//!
//! The Levi-Civita symbol is fixed by `ε^{0123} = +1`; contractions lower the
//! indices of their vector arguments with the metric before summing.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::ad::Real;
use crate::error::{Error, Result};

/// Real four-vector `(c0, c1, c2, c3)`, contravariant components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourVector<T = f64>(pub [T; 4]);

const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

impl<T: Real> FourVector<T> {
    pub fn new(c0: T, c1: T, c2: T, c3: T) -> Self {
        FourVector([c0, c1, c2, c3])
    }

    pub fn zero() -> Self {
        FourVector([T::zero(); 4])
    }

    pub fn from_f64(v: FourVector<f64>) -> Self {
        FourVector(v.0.map(T::cst))
    }

    pub fn value(&self) -> FourVector<f64> {
        FourVector(self.0.map(|c| c.value()))
    }

    /// Minkowski product `u⁰v⁰ − u⃗·v⃗`.
    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] - self.0[1] * other.0[1] - self.0[2] * other.0[2]
            - self.0[3] * other.0[3]
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    /// Covariant components `v_μ = η_{μν} v^ν`.
    pub fn lower(&self) -> [T; 4] {
        [self.0[0], -self.0[1], -self.0[2], -self.0[3]]
    }

    pub fn scale(&self, s: T) -> Self {
        FourVector(self.0.map(|c| c * s))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        FourVector(self.0.map(f))
    }

    pub fn spatial(&self) -> [T; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }
}

impl FourVector<f64> {
    /// Largest absolute component, used as a scale for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

impl<T> Index<usize> for FourVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for FourVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> Add for FourVector<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        FourVector([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }
}

impl<T: Real> Sub for FourVector<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        FourVector([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }
}

impl<T: Real> Neg for FourVector<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

impl<T: Real> Mul<f64> for FourVector<T> {
    type Output = Self;

    fn mul(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
}

pub fn dot<T: Real>(u: &FourVector<T>, v: &FourVector<T>) -> T {
    u.dot(v)
}

/// Sign of the permutation `(a, b, c, d)` of `(0, 1, 2, 3)`, zero when an
/// index repeats. This is `ε^{abcd}` with `ε^{0123} = +1`.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    let mut inversions = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `v^μ = ε^{μναβ} n_ν w_α p_β`.
pub fn epsilon_contract<T: Real>(
    n: &FourVector<T>,
    w: &FourVector<T>,
    p: &FourVector<T>,
) -> FourVector<T> {
    let (nl, wl, pl) = (n.lower(), w.lower(), p.lower());
    let mut out = FourVector::<T>::zero();
    for mu in 0..4 {
        let mut acc = T::zero();
        for nu in 0..4 {
            for al in 0..4 {
                for be in 0..4 {
                    let e = levi_civita(mu, nu, al, be);
                    if e != 0.0 {
                        acc += nl[nu] * wl[al] * pl[be] * e;
                    }
                }
            }
        }
        out.0[mu] = acc;
    }
    out
}

/// Antisymmetric rank-2 tensor with upper indices, `M^{μν} = −M^{νμ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bivector<T = f64>(pub [[T; 4]; 4]);

impl<T: Real> Bivector<T> {
    /// `u^μ v^ν − u^ν v^μ`.
    pub fn wedge(u: &FourVector<T>, v: &FourVector<T>) -> Self {
        let mut m = [[T::zero(); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = u.0[i] * v.0[j] - u.0[j] * v.0[i];
            }
        }
        Bivector(m)
    }

    pub fn lower(&self) -> [[T; 4]; 4] {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = *e * (METRIC[i] * METRIC[j]);
            }
        }
        m
    }

    /// Pauli–Lubański contraction `W^μ = −½ ε^{μαβγ} M_{αβ} p_γ`.
    pub fn pauli_lubanski(&self, p: &FourVector<T>) -> FourVector<T> {
        let ml = self.lower();
        let pl = p.lower();
        let mut out = FourVector::<T>::zero();
        for mu in 0..4 {
            let mut acc = T::zero();
            for al in 0..4 {
                for be in 0..4 {
                    for ga in 0..4 {
                        let e = levi_civita(mu, al, be, ga);
                        if e != 0.0 {
                            acc += ml[al][be] * pl[ga] * e;
                        }
                    }
                }
            }
            out.0[mu] = acc * -0.5;
        }
        out
    }
}

impl<T: Real> Add for Bivector<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += o.0[i][j];
            }
        }
        Bivector(m)
    }
}

/// Proper orthochronous Lorentz transformation `Λ = B(v)·R(ω)`: a rotation by
/// the axis-angle vector `ω` followed by a pure boost with velocity `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorentz {
    pub matrix: Matrix4<f64>,
}

impl Lorentz {
    pub fn identity() -> Self {
        Lorentz {
            matrix: Matrix4::identity(),
        }
    }

    pub fn new(boost: [f64; 3], rotation: [f64; 3]) -> Result<Self> {
        let v = Vector3::from(boost);
        let speed2 = v.norm_squared();
        if !(speed2 < 1.0) {
            return Err(Error::domain(format!(
                "boost speed {} is not below 1",
                speed2.sqrt()
            )));
        }
        let rot = nalgebra::Rotation3::from_scaled_axis(Vector3::from(rotation));
        let mut r4 = Matrix4::identity();
        r4.fixed_view_mut::<3, 3>(1, 1).copy_from(rot.matrix());

        let gamma = 1.0 / (1.0 - speed2).sqrt();
        let mut b = Matrix4::identity();
        b[(0, 0)] = gamma;
        for i in 0..3 {
            b[(0, i + 1)] = gamma * v[i];
            b[(i + 1, 0)] = gamma * v[i];
            for j in 0..3 {
                let outer = if speed2 > 0.0 {
                    (gamma - 1.0) * v[i] * v[j] / speed2
                } else {
                    0.0
                };
                b[(i + 1, j + 1)] += outer;
            }
        }
        Ok(Lorentz { matrix: b * r4 })
    }

    /// Pure boost along `axis` (unit 3-vector) with rapidity `chi`.
    pub fn boost_rapidity(axis: [f64; 3], chi: f64) -> Result<Self> {
        let a = Vector3::from(axis).normalize();
        let beta = chi.tanh();
        Lorentz::new((a * beta).into(), [0.0; 3])
    }

    pub fn apply<T: Real>(&self, v: &FourVector<T>) -> FourVector<T> {
        let mut out = FourVector::<T>::zero();
        for i in 0..4 {
            let mut acc = T::zero();
            for j in 0..4 {
                acc += v.0[j] * self.matrix[(i, j)];
            }
            out.0[i] = acc;
        }
        out
    }

    pub fn compose(&self, other: &Lorentz) -> Lorentz {
        Lorentz {
            matrix: self.matrix * other.matrix,
        }
    }
}

pub fn lorentz_transform(v: &FourVector, boost: [f64; 3], rotation: [f64; 3]) -> Result<FourVector> {
    Ok(Lorentz::new(boost, rotation)?.apply(v))
}

/// Determinant of the matrix of mutual Minkowski products of four vectors.
pub fn gram_det(k: &FourVector, m: &FourVector, a: &FourVector, b: &FourVector) -> f64 {
    let vs = [k, m, a, b];
    let g = Matrix4::from_fn(|i, j| vs[i].dot(vs[j]));
    g.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(a: f64, b: f64, c: f64, d: f64) -> FourVector {
        FourVector::new(a, b, c, d)
    }

    #[test]
    fn dot_examples() {
        assert_eq!(fv(1., 0., 0., 1.).dot(&fv(1., 0., 0., -1.)), 2.0);
        assert_eq!(fv(0., 1., 0., 0.).dot(&fv(0., 1., 0., 0.)), -1.0);
        assert_eq!(fv(1., 0., 0., 1.).dot(&fv(1., 0., 0., 1.)), 0.0);
    }

    #[test]
    fn epsilon_worked_example() {
        let out = epsilon_contract(&fv(0., 1., 0., 0.), &fv(0., 0., 0., 0.5), &fv(1., 0., 0., 0.));
        assert_eq!(out, fv(0., 0., 0.5, 0.));
    }

    #[test]
    fn epsilon_antisymmetry() {
        let (a, b, c) = (fv(0.25, -1.0, 2.0, 0.5), fv(1.125, 0.75, -0.625, 0.375), fv(-0.5, 3.0, 0.125, 1.5));
        assert_eq!(epsilon_contract(&a, &a, &c), FourVector::zero());
        assert_eq!(epsilon_contract(&a, &c, &c), FourVector::zero());
        let x = epsilon_contract(&a, &b, &c);
        let y = epsilon_contract(&b, &a, &c);
        let z = epsilon_contract(&a, &c, &b);
        for i in 0..4 {
            assert_eq!(x[i], -y[i]);
            assert_eq!(x[i], -z[i]);
        }
    }

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita(0, 1, 2, 3), 1.0);
        assert_eq!(levi_civita(1, 0, 2, 3), -1.0);
        assert_eq!(levi_civita(2, 1, 3, 0), 1.0);
        assert_eq!(levi_civita(0, 0, 2, 3), 0.0);
    }

    #[test]
    fn boost_of_rest_vector() {
        let chi = 0.8f64;
        let l = Lorentz::boost_rapidity([0., 0., 1.], chi).unwrap();
        let out = l.apply(&fv(1., 0., 0., 0.));
        assert!((out[0] - chi.cosh()).abs() < 1e-14);
        assert!((out[3] - chi.sinh()).abs() < 1e-14);
        assert!(out[1].abs() < 1e-15 && out[2].abs() < 1e-15);
    }

    #[test]
    fn identity_and_superluminal() {
        let v = fv(1.5, -0.2, 0.3, 0.9);
        assert_eq!(lorentz_transform(&v, [0.; 3], [0.; 3]).unwrap(), v);
        assert!(matches!(
            lorentz_transform(&v, [0.6, 0.8, 0.0], [0.; 3]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gram_examples() {
        let (k, m, a, b) = (fv(1., 0., 0., 1.), fv(1., 0., 0., -1.), fv(0., 1., 0., 0.), fv(0., 0., 1., 0.));
        assert!((gram_det(&k, &m, &a, &b) + 4.0).abs() < 1e-14);
        assert_eq!(gram_det(&k, &m, &a, &(k + a)), 0.0);
    }

    #[test]
    fn pauli_lubanski_of_pure_orbital_part_vanishes() {
        let x = fv(0.3, 1.0, -2.0, 0.5);
        let p = fv(2.0, 0.1, 0.3, -0.4);
        let w = Bivector::wedge(&x, &p).pauli_lubanski(&p);
        assert!(w.max_abs() < 1e-15);
    }
}
