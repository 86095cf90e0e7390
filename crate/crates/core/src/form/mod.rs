//! The Lagrangian family `L = −M√(ẋẋ)·F(P, Q)` with
//! `P = ℓ(k̇ẋ)/((kẋ)√(ẋẋ))` and `Q = −ℓ²(k̇k̇)/(kẋ)²`.
//!
//! A member of the family is a [`FormKernel`]: anything able to produce the
//! second-order jet of `F` at a point `(P, Q)`. Kernels are built by name
//! through a [`FormRegistry`], or parsed from an expression. Because the
//! kernel hands out exact partials, the Lagrangian can be evaluated with any
//! [`Real`] type and differentiated twice more with respect to velocities.

mod builtin;
pub mod expr;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use builtin::{
    ExprFn, FofQ, FormBuilder, FormParams, FormRegistry, NuFamily, Parsed, PointParticle, Rotator,
    RotatorS, ScalarFn, Sign, SqrtS, Starlike,
};

use crate::ad::{Jet2, Real};
use crate::algebra::FourVector;
use crate::error::{Error, Result};
use crate::invariants::KinematicJet;

/// Rectangle of `(P, Q)` used for sweeps; the true domain may be larger.
#[derive(Clone, Debug, Serialize)]
pub struct DomainBox {
    pub p: (f64, f64),
    pub q: (f64, f64),
    pub description: String,
}

impl DomainBox {
    pub fn new(p: (f64, f64), q: (f64, f64), description: &str) -> Self {
        DomainBox {
            p,
            q,
            description: description.to_string(),
        }
    }

    /// `n × n` grid including the corners.
    pub fn grid(&self, n: usize) -> Vec<PQPoint> {
        let lerp = |(lo, hi): (f64, f64), i: usize| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(PQPoint {
                    p: lerp(self.p, i),
                    q: lerp(self.q, j),
                });
            }
        }
        out
    }
}

/// One member `F(P, Q)` of the family.
pub trait FormKernel: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// `F` and its partials to second order; a domain error outside the
    /// region where `F` is real and twice differentiable.
    fn jet(&self, p: f64, q: f64) -> Result<Jet2>;

    fn domain(&self) -> DomainBox;

    /// Coefficient `ν` of a term `νP` that makes the amplitude of `k` a gauge
    /// variable.
    fn linear_p_coefficient(&self) -> f64 {
        0.0
    }

    /// Degrees of freedom in the lab-time chart: 5 when the amplitude of `k`
    /// drops out of the dynamics, 6 otherwise.
    fn natural_dof(&self) -> usize {
        6
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PQPoint {
    pub p: f64,
    pub q: f64,
}

/// A kernel together with the mass and length scales.
#[derive(Clone, Debug)]
pub struct Form {
    kernel: Arc<dyn FormKernel>,
    pub mass: f64,
    pub ell: f64,
}

impl Form {
    pub fn new(kernel: Arc<dyn FormKernel>, mass: f64, ell: f64) -> Result<Form> {
        if !(mass > 0.0) || !(ell > 0.0) || !mass.is_finite() || !ell.is_finite() {
            return Err(Error::Config(format!(
                "mass and length must be positive (got M = {mass}, ℓ = {ell})"
            )));
        }
        Ok(Form { kernel, mass, ell })
    }

    /// Unit mass and length.
    pub fn unit(kernel: Arc<dyn FormKernel>) -> Form {
        Form {
            kernel,
            mass: 1.0,
            ell: 1.0,
        }
    }

    /// Builds `spec` from the builtin registry at unit scales.
    pub fn named(spec: &str, params: &FormParams) -> Result<Form> {
        Ok(Form::unit(FormRegistry::builtin().build(spec, params)?))
    }

    pub fn kernel(&self) -> &dyn FormKernel {
        self.kernel.as_ref()
    }

    pub fn name(&self) -> String {
        self.kernel.name()
    }

    pub fn jet(&self, p: f64, q: f64) -> Result<Jet2> {
        let j = self.kernel.jet(p, q)?;
        if !j.is_finite() {
            return Err(Error::domain(format!(
                "{} is not finite at (P, Q) = ({p}, {q})",
                self.name()
            )));
        }
        Ok(j)
    }

    /// `F(P, Q)` for any scalar type.
    pub fn eval<T: Real>(&self, p: T, q: T) -> Result<T> {
        let j = self.jet(p.value(), q.value())?;
        Ok(T::lift2(p, q, &j))
    }

    pub fn with_scales(&self, mass: f64, ell: f64) -> Result<Form> {
        Form::new(self.kernel.clone(), mass, ell)
    }
}

/// `(P, Q)` from velocities, generic over the scalar type.
pub fn pq_of<T: Real>(
    xdot: &FourVector<T>,
    k: &FourVector<T>,
    kdot: &FourVector<T>,
    ell: f64,
) -> Result<(T, T)> {
    let xx = xdot.norm_sqr();
    let kx = k.dot(xdot);
    if !(xx.value() > 0.0) {
        return Err(Error::domain(format!("ẋẋ = {} is not timelike", xx.value())));
    }
    if !(kx.value() > 0.0) {
        return Err(Error::domain(format!("kẋ = {} must be positive", kx.value())));
    }
    let p = kdot.dot(xdot) * ell / (kx * xx.sqrt());
    let q = -(kdot.norm_sqr() * (ell * ell)) / (kx * kx);
    Ok((p, q))
}

pub fn pq_from_jet(j: &KinematicJet, ell: f64) -> Result<PQPoint> {
    if !(ell > 0.0) {
        return Err(Error::domain("length scale must be positive"));
    }
    let (p, q) = pq_of(&j.xdot, &j.k, &j.kdot, ell)?;
    // k̇k̇ ≤ 0 for a consistent jet; clear rounding noise around Q = 0
    Ok(PQPoint { p, q: q.max(0.0) })
}

/// `L = −M√(ẋẋ)·F(P, Q)`, generic over the scalar type.
pub fn lagrangian<T: Real>(
    form: &Form,
    xdot: &FourVector<T>,
    k: &FourVector<T>,
    kdot: &FourVector<T>,
) -> Result<T> {
    let (p, q) = pq_of(xdot, k, kdot, form.ell)?;
    let f = form.eval(p, q)?;
    Ok(-(xdot.norm_sqr().sqrt() * f) * form.mass)
}

pub fn lagrangian_density(form: &Form, j: &KinematicJet) -> Result<f64> {
    lagrangian(form, &j.xdot, &j.k, &j.kdot)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RescalingCheck {
    pub before: f64,
    pub after: f64,
    /// `L[x, e^ψk] − L[x, k] + Mℓνψ̇`.
    pub residual: f64,
    pub scale: f64,
}

/// Compares the Lagrangian before and after `k → e^ψ k` with rate `ψ̇`.
pub fn rescaling_shift_check(form: &Form, j: &KinematicJet, psi: f64, psi_dot: f64) -> Result<RescalingCheck> {
    let before = lagrangian_density(form, j)?;
    let after = lagrangian_density(form, &j.rescale_k(psi, psi_dot))?;
    let shift = form.mass * form.ell * form.kernel().linear_p_coefficient() * psi_dot;
    Ok(RescalingCheck {
        before,
        after,
        residual: after - before + shift,
        scale: before.abs().max(after.abs()).max(shift.abs()),
    })
}

/// Central finite-difference jet with step `∛ε·max(1, |P|, |Q|)`, the oracle
/// for coded partials.
pub fn finite_difference_jet(form: &Form, p: f64, q: f64) -> Result<Jet2> {
    let h = f64::EPSILON.cbrt() * 1f64.max(p.abs()).max(q.abs());
    let f = |a: f64, b: f64| form.jet(a, b).map(|j| j.f);
    let d1 = |a: f64, b: f64| form.jet(a, b).map(|j| (j.fa, j.fb));
    let f0 = f(p, q)?;
    let (pp, pm) = (d1(p + h, q)?, d1(p - h, q)?);
    let (qp, qm) = (d1(p, q + h)?, d1(p, q - h)?);
    Ok(Jet2 {
        f: f0,
        fa: (f(p + h, q)? - f(p - h, q)?) / (2.0 * h),
        fb: (f(p, q + h)? - f(p, q - h)?) / (2.0 * h),
        faa: (pp.0 - pm.0) / (2.0 * h),
        fab: 0.5 * ((pp.1 - pm.1) + (qp.0 - qm.0)) / (2.0 * h),
        fbb: (qp.1 - qm.1) / (2.0 * h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::reference_rotator_jet as rotator_point;

    fn unit(spec: &str) -> Form {
        Form::named(spec, &FormParams::default()).unwrap()
    }

    #[test]
    fn pq_at_worked_point() {
        let pq = pq_from_jet(&rotator_point(), 1.0).unwrap();
        assert!(pq.p.abs() < 1e-15);
        assert!((pq.q - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rotator_values() {
        let f = unit("rotator_f");
        let j = f.jet(0.0, 4.0).unwrap();
        assert!((j.f - 3f64.sqrt()).abs() < 1e-15);
        assert!((j.fb - 1.0 / (8.0 * 3f64.sqrt())).abs() < 1e-15);
        let l = lagrangian_density(&f, &rotator_point()).unwrap();
        assert!((l + 1.5).abs() < 1e-14);
    }

    #[test]
    fn parsed_examples() {
        let f = unit("sqrt(1+sqrt(Q))");
        assert!((f.jet(0.0, 4.0).unwrap().f - 3f64.sqrt()).abs() < 1e-15);
        let one = unit("1").jet(0.3, 2.0).unwrap();
        assert_eq!(one, Jet2::constant(1.0));
        let g = unit("sqrt((1+sqrt(Q))*(1+P^2/Q))");
        assert!((g.jet(0.0, 4.0).unwrap().f - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unknown_builtin_and_domain() {
        let r = FormRegistry::builtin();
        assert!(matches!(
            r.get("nope", &FormParams::default()),
            Err(Error::Unknown { .. })
        ));
        let minus = FormParams {
            inner: Sign::Minus,
            ..Default::default()
        };
        let f = Form::unit(r.get("rotator", &minus).unwrap());
        assert!(matches!(f.jet(0.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn nu_zero_is_rotator() {
        let nu = unit("nu_family");
        let rot = unit("rotator_f");
        for q in [0.1, 1.0, 4.0, 17.0] {
            for p in [-1.0, 0.0, 0.7] {
                let (a, b) = (nu.jet(p, q).unwrap(), rot.jet(p, q).unwrap());
                for (x, y) in [(a.f, b.f), (a.fa, b.fa), (a.fb, b.fb), (a.faa, b.faa), (a.fab, b.fab), (a.fbb, b.fbb)] {
                    assert!((x - y).abs() <= 1e-14 * y.abs().max(1.0), "{p} {q}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn rescaling_with_constant_psi() {
        let f = Form::named(
            "nu_family",
            &FormParams {
                nu: 0.4,
                ..Default::default()
            },
        )
        .unwrap();
        let c = rescaling_shift_check(&f, &rotator_point(), 0.7, 0.0).unwrap();
        assert!(c.residual.abs() < 1e-14 && (c.before - c.after).abs() < 1e-14);
    }

    #[test]
    fn grid_covers_corners() {
        let g = DomainBox::new((0.0, 1.0), (2.0, 3.0), "").grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], PQPoint { p: 0.0, q: 2.0 });
        assert_eq!(g[8], PQPoint { p: 1.0, q: 3.0 });
    }
}
