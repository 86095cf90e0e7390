//! Conserved charges of the family and the two Poincaré Casimirs.
//!
//! Momenta are velocity gradients of the Lagrangian taken by forward-mode
//! differentiation, with the overall sign fixed so a point particle at rest
//! has positive energy: `P_μ = −∂L/∂ẋ^μ`, `π_μ = −∂L/∂k̇^μ`.

use serde::Serialize;

use crate::ad::{gradient, Jet2, MultiFn, Real};
use crate::algebra::{Bivector, FourVector};
use crate::error::{Error, Result};
use crate::form::{lagrangian, Form, PQPoint, ScalarFn};
use crate::invariants::KinematicJet;

#[derive(Clone, Copy, Debug)]
pub struct MomentumSet {
    pub p: FourVector,
    pub pi: FourVector,
    pub m: Bivector,
    pub w: FourVector,
}

impl MomentumSet {
    pub fn pp(&self) -> f64 {
        self.p.norm_sqr()
    }

    pub fn ww(&self) -> f64 {
        self.w.norm_sqr()
    }

    /// `|W·P|` relative to `|W||P|`.
    pub fn wp_defect(&self) -> f64 {
        let scale = (self.w.max_abs() * self.p.max_abs()).max(f64::MIN_POSITIVE);
        self.w.dot(&self.p).abs() / scale
    }
}

struct VelocityLagrangian<'a> {
    form: &'a Form,
    k: FourVector,
}

impl MultiFn for VelocityLagrangian<'_> {
    type Error = Error;

    fn eval<T: Real>(&self, v: &[T]) -> Result<T> {
        let xdot = FourVector::new(v[0], v[1], v[2], v[3]);
        let kdot = FourVector::new(v[4], v[5], v[6], v[7]);
        lagrangian(self.form, &xdot, &FourVector::from_f64(self.k), &kdot)
    }
}

fn raise(lower: [f64; 4]) -> FourVector {
    FourVector::new(lower[0], -lower[1], -lower[2], -lower[3])
}

/// Charges at position `x` with velocity `ẋ`, null vector `k` and `k̇`.
pub fn momenta_at(
    form: &Form,
    x: &FourVector,
    xdot: &FourVector,
    k: &FourVector,
    kdot: &FourVector,
) -> Result<MomentumSet> {
    let f = VelocityLagrangian { form, k: *k };
    let v: Vec<f64> = xdot.0.iter().chain(kdot.0.iter()).copied().collect();
    let (_, g) = gradient(&f, &v)?;
    let p = raise([-g[0], -g[1], -g[2], -g[3]]);
    let pi = raise([-g[4], -g[5], -g[6], -g[7]]);
    let m = Bivector::wedge(x, &p) + Bivector::wedge(k, &pi);
    let w = m.pauli_lubanski(&p);
    Ok(MomentumSet { p, pi, m, w })
}

/// Charges of a jet placed at the origin.
pub fn momenta(form: &Form, j: &KinematicJet) -> Result<MomentumSet> {
    momenta_at(form, &FourVector::zero(), &j.xdot, &j.k, &j.kdot)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CasimirPair {
    pub pp: f64,
    pub ww: f64,
}

impl CasimirPair {
    pub fn is_physical(&self) -> bool {
        self.pp > 0.0 && self.ww <= 0.0
    }
}

fn casimirs_from_jet(j: &Jet2, pq: PQPoint, mass: f64, ell: f64) -> CasimirPair {
    let (p, q) = (pq.p, pq.q);
    let a = j.f - p * j.fa;
    let b = j.fa * j.fa + 2.0 * j.fb * a;
    let m2 = mass * mass;
    CasimirPair {
        pp: m2 * (a * (a - 4.0 * q * j.fb) - q * j.fa * j.fa),
        ww: -m2 * m2 * ell * ell * q * b * b,
    }
}

/// `PP = M²[(F−PF_P)(F−PF_P−4QF_Q) − QF_P²]`,
/// `WW = −M⁴ℓ²Q[F_P² + 2F_Q(F−PF_P)]²`.
pub fn casimirs_closed_form(form: &Form, at: PQPoint) -> Result<CasimirPair> {
    let j = form.jet(at.p, at.q)?;
    Ok(casimirs_from_jet(&j, at, form.mass, form.ell))
}

/// `∂(PP, WW)/∂(P, Q)` as `[[PP_P, PP_Q], [WW_P, WW_Q]]`, differentiating the
/// closed forms by hand; only second partials of `F` enter.
pub fn casimir_jacobian(form: &Form, at: PQPoint) -> Result<[[f64; 2]; 2]> {
    let j = form.jet(at.p, at.q)?;
    let (p, q) = (at.p, at.q);
    let m2 = form.mass * form.mass;
    let c = m2 * m2 * form.ell * form.ell;
    let a = j.f - p * j.fa;
    let a_p = -p * j.faa;
    let a_q = j.fb - p * j.fab;
    let pp_p = a_p * (a - 4.0 * q * j.fb) + a * (a_p - 4.0 * q * j.fab) - 2.0 * q * j.fa * j.faa;
    let pp_q = a_q * (a - 4.0 * q * j.fb) + a * (a_q - 4.0 * j.fb - 4.0 * q * j.fbb)
        - j.fa * j.fa
        - 2.0 * q * j.fa * j.fab;
    let b = j.fa * j.fa + 2.0 * j.fb * a;
    let b_p = 2.0 * j.fa * j.faa + 2.0 * j.fab * a + 2.0 * j.fb * a_p;
    let b_q = 2.0 * j.fa * j.fab + 2.0 * j.fbb * a + 2.0 * j.fb * a_q;
    Ok([
        [m2 * pp_p, m2 * pp_q],
        [-c * 2.0 * q * b * b_p, -c * (b * b + 2.0 * q * b * b_q)],
    ])
}

/// `PP = M²S(S − 4QS′)`, `WW = −(2M²ℓS√Q S′)²` for `F = √(1+P²/Q)·S(Q)`.
pub fn casimirs_special_s(s: &dyn ScalarFn, q: f64, mass: f64, ell: f64) -> Result<CasimirPair> {
    if !(q > 0.0) {
        return Err(Error::domain(format!("Q must be positive, got {q}")));
    }
    let [s0, s1, _] = s.eval3(q)?;
    let m2 = mass * mass;
    let w = 2.0 * m2 * ell * s0 * q.sqrt() * s1;
    Ok(CasimirPair {
        pp: m2 * s0 * (s0 - 4.0 * q * s1),
        ww: -w * w,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalReport {
    pub form: String,
    pub points: usize,
    /// `max |PP/M² − 1|`.
    pub pp_residual: f64,
    /// `max |WW/(−¼M⁴ℓ²) − 1|`.
    pub ww_residual: f64,
    pub worst_pp: Option<PQPoint>,
    pub worst_ww: Option<PQPoint>,
}

impl FundamentalReport {
    pub fn max_residual(&self) -> f64 {
        self.pp_residual.max(self.ww_residual)
    }
}

/// How far a form is from `PP ≡ M²`, `WW ≡ −¼M⁴ℓ²` over a grid.
pub fn fundamental_residuals(form: &Form, grid: &[PQPoint]) -> Result<FundamentalReport> {
    let m2 = form.mass * form.mass;
    let ww0 = -0.25 * m2 * m2 * form.ell * form.ell;
    let mut rep = FundamentalReport {
        form: form.name(),
        points: grid.len(),
        pp_residual: 0.0,
        ww_residual: 0.0,
        worst_pp: None,
        worst_ww: None,
    };
    for &pt in grid {
        let c = casimirs_closed_form(form, pt)?;
        let rp = (c.pp / m2 - 1.0).abs();
        let rw = (c.ww / ww0 - 1.0).abs();
        if rp > rep.pp_residual || rep.worst_pp.is_none() {
            rep.pp_residual = rp.max(rep.pp_residual);
            rep.worst_pp = Some(pt);
        }
        if rw > rep.ww_residual || rep.worst_ww.is_none() {
            rep.ww_residual = rw.max(rep.ww_residual);
            rep.worst_ww = Some(pt);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{FormParams, RotatorS, Sign};
    use crate::invariants::reference_rotator_jet;

    fn unit(spec: &str) -> Form {
        Form::named(spec, &FormParams::default()).unwrap()
    }

    #[test]
    fn point_particle_at_rest() {
        let f = unit("1");
        let z = FourVector::zero();
        let k = FourVector::new(1.0, 0.0, 0.0, 1.0);
        let m = momenta_at(&f, &z, &FourVector::new(1.0, 0.0, 0.0, 0.0), &k, &z).unwrap();
        assert_eq!(m.p, FourVector::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(m.pi, FourVector::zero());
    }

    #[test]
    fn rotator_reference_point() {
        let f = unit("rotator");
        let m = momenta(&f, &reference_rotator_jet()).unwrap();
        let c = casimirs_closed_form(&f, PQPoint { p: 0.0, q: 4.0 }).unwrap();
        assert!((m.pp() - 1.0).abs() < 1e-13, "{}", m.pp());
        assert!((m.ww() + 0.25).abs() < 1e-13, "{}", m.ww());
        assert!((c.pp - 1.0).abs() < 1e-14 && (c.ww + 0.25).abs() < 1e-14);
    }

    #[test]
    fn starlike_plus_at_reference() {
        let c = casimirs_closed_form(&unit("starlike"), PQPoint { p: 0.0, q: 4.0 }).unwrap();
        assert!((c.pp - 1.0).abs() < 1e-14 && (c.ww + 0.25).abs() < 1e-14);
    }

    #[test]
    fn special_s_examples() {
        let c = casimirs_special_s(&RotatorS(Sign::Plus), 2.3, 1.0, 1.0).unwrap();
        assert!((c.pp - 1.0).abs() < 1e-14 && (c.ww + 0.25).abs() < 1e-14);
        let one = crate::form::ExprFn::parse("1").unwrap();
        let c = casimirs_special_s(&one, 2.3, 2.0, 1.0).unwrap();
        assert_eq!(c, CasimirPair { pp: 4.0, ww: 0.0 });
    }

    #[test]
    fn point_particle_is_not_fundamental() {
        let f = unit("1");
        let r = fundamental_residuals(&f, &f.kernel().domain().grid(4)).unwrap();
        assert_eq!(r.pp_residual, 0.0);
        assert_eq!(r.ww_residual, 1.0);
    }

    #[test]
    fn linear_form_relation() {
        // F = P has F − PF_P = 0 and then WW = M²ℓ²·PP
        let f = unit("P").with_scales(1.3, 0.7).unwrap();
        let c = casimirs_closed_form(&f, PQPoint { p: 0.4, q: 1.7 }).unwrap();
        let rhs = 1.3f64.powi(2) * 0.49 * c.pp;
        assert!((c.ww - rhs).abs() < 1e-14 * rhs.abs());
        assert!(!c.is_physical());
    }
}
