//! Motion: the free rotator in closed form, Euler–Lagrange residuals along
//! arbitrary trajectories, and numerical integration of nondegenerate
//! members of the family.

mod demo;
mod free;
mod integrate;

pub use demo::{indeterminacy_demo, integration_rows, write_csv, DemoEntry, IndeterminacyReport, TrajectoryRow};
pub use free::{FreeMotion, Phase, SolutionParams};
pub use integrate::{acceleration_at, integrate, Drift, Integration, IntegrationOptions, Sample};

use serde::Serialize;

use crate::ad::{hessian, HyperDual, MultiFn, Real};
use crate::algebra::FourVector;
use crate::chart::{check_poles, chart_lagrangian, coordinates, DofSpec};
use crate::error::{Error, Result};
use crate::form::Form;

/// Position and null vector with their first two derivatives at one time.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: [FourVector; 3],
    pub k: [FourVector; 3],
}

impl TrajectoryPoint {
    fn hyper(v: &[FourVector; 3]) -> FourVector<HyperDual> {
        FourVector([0, 1, 2, 3].map(|i| HyperDual::new(v[0][i], v[1][i], v[1][i], v[2][i])))
    }

    /// Lab-time chart coordinates with their first and second derivatives
    /// with respect to `x⁰`.
    pub fn chart(&self, dof: DofSpec) -> Result<LabJet> {
        let x = Self::hyper(&self.x);
        let k = Self::hyper(&self.k);
        let c = coordinates(&x, &k, 0.0);
        let n = dof.count();
        let (s1, s2) = (self.x[1][0], self.x[2][0]);
        if !(s1 > 0.0) {
            return Err(Error::domain("worldline is not future directed"));
        }
        let mut q = Vec::with_capacity(n);
        let mut qd = Vec::with_capacity(n);
        let mut qdd = Vec::with_capacity(n);
        for ci in c.iter().take(n) {
            q.push(ci.re);
            qd.push(ci.e1 / s1);
            qdd.push((ci.e12 * s1 - ci.e1 * s2) / (s1 * s1 * s1));
        }
        Ok(LabJet {
            lab_time: self.x[0][0],
            q,
            qdot: qd,
            qddot: qdd,
        })
    }
}

/// Something that can be sampled with exact derivatives.
pub trait Trajectory: Send + Sync {
    fn point(&self, t: f64) -> Result<TrajectoryPoint>;
}

/// Chart coordinates, lab-time velocities and accelerations.
#[derive(Clone, Debug, Serialize)]
pub struct LabJet {
    pub lab_time: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub qddot: Vec<f64>,
}

struct FullLagrangian<'a> {
    form: &'a Form,
    n: usize,
}

impl MultiFn for FullLagrangian<'_> {
    type Error = Error;

    fn eval<T: Real>(&self, z: &[T]) -> Result<T> {
        chart_lagrangian(self.form, &z[..self.n], &z[self.n..])
    }
}

/// Pieces of the Euler–Lagrange operator at `(q, q̇)`.
pub(crate) struct ElParts {
    /// `∂L/∂q`.
    pub grad_q: Vec<f64>,
    /// `∂²L/∂q̇∂q̇`.
    pub h_vv: nalgebra::DMatrix<f64>,
    /// `∂²L/∂q̇ⁱ∂qʲ`.
    pub h_vq: nalgebra::DMatrix<f64>,
}

pub(crate) fn el_parts(form: &Form, q: &[f64], qdot: &[f64]) -> Result<ElParts> {
    let n = q.len();
    check_poles(q[3])?;
    let z: Vec<f64> = q.iter().chain(qdot.iter()).copied().collect();
    let (_, g, h) = hessian(&FullLagrangian { form, n }, &z)?;
    Ok(ElParts {
        grad_q: g[..n].to_vec(),
        h_vv: h.view((n, n), (n, n)).into_owned(),
        h_vq: h.view((n, 0), (n, n)).into_owned(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ElResidual {
    pub t: f64,
    pub residual: Vec<f64>,
    /// Largest individual term entering any component.
    pub scale: f64,
}

impl ElResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn relative(&self) -> f64 {
        self.max_abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// `d/dt(∂L/∂q̇) − ∂L/∂q` at a lab-time jet.
pub fn el_residual_at(form: &Form, jet: &LabJet) -> Result<ElResidual> {
    let n = jet.q.len();
    let parts = el_parts(form, &jet.q, &jet.qdot)?;
    let mut residual = vec![0.0; n];
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let mut acc = -parts.grad_q[i];
        scale = scale.max(parts.grad_q[i].abs());
        for j in 0..n {
            let a = parts.h_vq[(i, j)] * jet.qdot[j];
            let b = parts.h_vv[(i, j)] * jet.qddot[j];
            scale = scale.max(a.abs()).max(b.abs());
            acc += a + b;
        }
        residual[i] = acc;
    }
    Ok(ElResidual {
        t: jet.lab_time,
        residual,
        scale,
    })
}

/// Euler–Lagrange residuals of `form` along `traj` at parameter `t`.
pub fn el_residuals(form: &Form, traj: &dyn Trajectory, t: f64, dof: DofSpec) -> Result<ElResidual> {
    let jet = traj.point(t)?.chart(dof)?;
    el_residual_at(form, &jet)
}

/// `|dφ/dt| = (2/ℓ)·√Q/(√Q + 2)`, the pointer's angular speed in the rest
/// frame as a function of `Q`.
pub fn angular_speed(q: f64, ell: f64) -> Result<f64> {
    if !(q > 0.0) || !(ell > 0.0) {
        return Err(Error::domain(format!("need Q > 0 and ℓ > 0 (got {q}, {ell})")));
    }
    let r = q.sqrt();
    Ok(2.0 / ell * r / (r + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_speed_values() {
        assert!((angular_speed(4.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(angular_speed(1e-12, 1.0).unwrap() < 1e-5);
        assert!((angular_speed(1e12, 1.0).unwrap() - 2.0).abs() < 1e-5);
        assert!(angular_speed(0.0, 1.0).is_err());
        // tanh form with e^{2Ψ} = √Q + 1
        let q: f64 = 2.7;
        let psi = 0.5 * (q.sqrt() + 1.0).ln();
        assert!((angular_speed(q, 0.5).unwrap() - 4.0 * psi.tanh()).abs() < 1e-14);
    }
}
