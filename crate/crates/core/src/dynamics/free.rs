use serde::Serialize;

use crate::ad::{Dual, HyperDual, Real};
use crate::algebra::{epsilon_contract, FourVector, Lorentz};
use crate::error::{Error, Result};
use crate::form::expr::{Bindings, Expr, Var};
use crate::form::Form;
use crate::noether::{momenta_at, MomentumSet};

use super::{Trajectory, TrajectoryPoint};

/// The pointer's angular position `φ(t)` as an expression in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Phase {
    expr: Expr,
}

impl Phase {
    pub fn parse(src: &str) -> Result<Phase> {
        let expr = Expr::parse(src)?;
        expr.require_only(&[Var::T])?;
        Ok(Phase { expr })
    }

    pub fn source(&self) -> &str {
        self.expr.source()
    }

    pub fn eval<T: Real>(&self, t: T) -> Result<T> {
        self.expr.eval(&Bindings {
            t: Some(t),
            ..Default::default()
        })
    }

    /// `(φ, φ̇)` at `t`.
    pub fn value_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        let d = self.eval(Dual::var(t))?;
        Ok((d.re, d.eps))
    }

    /// Checks `0 < |φ̇| < 2/ℓ` with a constant sign on `n` points of a
    /// window; returns the sign.
    pub fn check_rate(&self, window: (f64, f64), n: usize, ell: f64) -> Result<f64> {
        let bound = 2.0 / ell;
        let mut sign = 0.0;
        for i in 0..n.max(2) {
            let t = window.0 + (window.1 - window.0) * i as f64 / (n.max(2) - 1) as f64;
            let (_, rate) = self.value_and_rate(t)?;
            if !(rate != 0.0 && rate.abs() < bound) {
                return Err(Error::domain(format!(
                    "phase `{}` has φ̇({t}) = {rate}, outside 0 < |φ̇| < 2/ℓ = {bound}",
                    self.source()
                )));
            }
            if sign == 0.0 {
                sign = rate.signum();
            } else if rate.signum() != sign {
                return Err(Error::domain(format!("phase `{}` reverses direction", self.source())));
            }
        }
        Ok(sign)
    }
}

/// Constants of a free-motion solution.
#[derive(Clone, Debug)]
pub struct SolutionParams {
    pub p: FourVector,
    pub w: FourVector,
    pub n: FourVector,
    pub x0: FourVector,
    pub phase: Phase,
    pub mass: f64,
    pub ell: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstraintDefects {
    pub pp: f64,
    pub ww: f64,
    pub wp: f64,
    pub nn: f64,
    pub nw: f64,
    pub np: f64,
}

impl ConstraintDefects {
    pub fn max(&self) -> f64 {
        [self.pp, self.ww, self.wp, self.nn, self.nw, self.np]
            .iter()
            .fold(0.0f64, |m, v| m.max(*v))
    }
}

impl SolutionParams {
    /// Rest frame, spin along `z`, `N` along `x`, starting at the origin.
    pub fn rest_frame(mass: f64, ell: f64, phase: Phase) -> SolutionParams {
        SolutionParams {
            p: FourVector::new(mass, 0.0, 0.0, 0.0),
            w: FourVector::new(0.0, 0.0, 0.0, 0.5 * mass * mass * ell),
            n: FourVector::new(0.0, 1.0, 0.0, 0.0),
            x0: FourVector::zero(),
            phase,
            mass,
            ell,
        }
    }

    /// Relative defects of `PP = M²`, `WW = −¼M⁴ℓ²`, `WP = NN + 1 = NW = NP = 0`.
    pub fn defects(&self) -> ConstraintDefects {
        let (m, l) = (self.mass, self.ell);
        let (sp, sw, sn) = (self.p.max_abs(), self.w.max_abs(), self.n.max_abs());
        let rel = |v: f64, s: f64| v.abs() / s.max(f64::MIN_POSITIVE);
        ConstraintDefects {
            pp: rel(self.p.norm_sqr() - m * m, sp * sp),
            ww: rel(self.w.norm_sqr() + 0.25 * m.powi(4) * l * l, sw * sw),
            wp: rel(self.w.dot(&self.p), sw * sp),
            nn: rel(self.n.norm_sqr() + 1.0, sn * sn),
            nw: rel(self.n.dot(&self.w), sn * sw),
            np: rel(self.n.dot(&self.p), sn * sp),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !(self.ell > 0.0) {
            return Err(Error::Config("mass and length must be positive".into()));
        }
        let d = self.defects();
        if d.max() > 1e-12 {
            return Err(Error::precondition(format!(
                "free-motion constants violate their constraints: {d:?}"
            )));
        }
        Ok(())
    }

    /// All four constant vectors mapped by `lambda`.
    pub fn transformed(&self, lambda: &Lorentz) -> SolutionParams {
        SolutionParams {
            p: lambda.apply(&self.p),
            w: lambda.apply(&self.w),
            n: lambda.apply(&self.n),
            x0: lambda.apply(&self.x0),
            ..self.clone()
        }
    }
}

/// The free rotator: `x = (P/M)t + (ℓ/2)r(t) + x(0)`, `k = P/M + ṙ/√(−ṙṙ)`
/// with `r = N sinφ + ε(N, W, P)/(½M³ℓ) cosφ`.
#[derive(Clone, Debug)]
pub struct FreeMotion {
    pub params: SolutionParams,
    second_axis: FourVector,
    sign: f64,
    window: (f64, f64),
}

impl FreeMotion {
    /// Validates the constants and the phase on `window`.
    pub fn new(params: SolutionParams, window: (f64, f64)) -> Result<FreeMotion> {
        params.validate()?;
        let sign = params.phase.check_rate(window, 2001, params.ell)?;
        let e = epsilon_contract(&params.n, &params.w, &params.p)
            * (1.0 / (0.5 * params.mass.powi(3) * params.ell));
        Ok(FreeMotion {
            params,
            second_axis: e,
            sign,
            window,
        })
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// `ε^{μναβ}N_νW_αP_β/(½M³ℓ)`.
    pub fn second_axis(&self) -> FourVector {
        self.second_axis
    }

    pub fn eval<T: Real>(&self, t: T) -> Result<(FourVector<T>, FourVector<T>)> {
        let p = &self.params;
        let phi = p.phase.eval(t)?;
        let (s, c) = (phi.sin(), phi.cos());
        let lift = FourVector::<T>::from_f64;
        let (n, e, pm) = (lift(p.n), lift(self.second_axis), lift(p.p * (1.0 / p.mass)));
        let r = n.scale(s) + e.scale(c);
        let x = pm.scale(t) + r * (0.5 * p.ell) + lift(p.x0);
        // ṙ/√(−ṙṙ) = sign(φ̇)(N cosφ − E sinφ) since N and E are orthonormal
        let k = pm + (n.scale(c) - e.scale(s)) * self.sign;
        Ok((x, k))
    }

    /// Noether charges of `form` recomputed from the trajectory at `t`.
    pub fn charges(&self, form: &Form, t: f64) -> Result<MomentumSet> {
        let pt = self.point(t)?;
        momenta_at(form, &pt.x[0], &pt.x[1], &pt.k[0], &pt.k[1])
    }

    /// Largest relative deviation of recomputed `P` and `W` from the
    /// constants over `ts`.
    pub fn charge_drift(&self, form: &Form, ts: &[f64]) -> Result<f64> {
        let (p0, w0) = (self.params.p, self.params.w);
        let mut worst: f64 = 0.0;
        for &t in ts {
            let m = self.charges(form, t)?;
            let dp = (m.p - p0).max_abs() / p0.max_abs();
            let dw = (m.w - w0).max_abs() / w0.max_abs();
            worst = worst.max(dp).max(dw);
        }
        Ok(worst)
    }
}

impl Trajectory for FreeMotion {
    fn point(&self, t: f64) -> Result<TrajectoryPoint> {
        let (x, k) = self.eval(HyperDual::var2(t))?;
        let split = |v: FourVector<HyperDual>| {
            [
                FourVector(v.0.map(|c| c.re)),
                FourVector(v.0.map(|c| c.e1)),
                FourVector(v.0.map(|c| c.e12)),
            ]
        };
        Ok(TrajectoryPoint {
            t,
            x: split(x),
            k: split(k),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> FreeMotion {
        FreeMotion::new(SolutionParams::rest_frame(1.0, 1.0, Phase::parse("t").unwrap()), (0.0, 20.0)).unwrap()
    }

    #[test]
    fn worked_example() {
        let fm = reference();
        assert_eq!(fm.second_axis(), FourVector::new(0.0, 0.0, 1.0, 0.0));
        for t in [0.0, 0.7, 3.1] {
            let (x, k) = fm.eval(t).unwrap();
            let want_x = FourVector::new(t, 0.5 * t.sin(), 0.5 * t.cos(), 0.0);
            let want_k = FourVector::new(1.0, t.cos(), -t.sin(), 0.0);
            assert!((x - want_x).max_abs() < 1e-15 && (k - want_k).max_abs() < 1e-15);
            assert!(k.norm_sqr().abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = SolutionParams::rest_frame(1.0, 1.0, Phase::parse("t").unwrap());
        p.n = FourVector::new(0.0, 0.0, 0.0, 1.0);
        assert!(matches!(FreeMotion::new(p, (0.0, 1.0)), Err(Error::Precondition(_))));
        let fast = SolutionParams::rest_frame(1.0, 1.0, Phase::parse("2.5*t").unwrap());
        assert!(matches!(FreeMotion::new(fast, (0.0, 1.0)), Err(Error::Domain(_))));
        let stalls = SolutionParams::rest_frame(1.0, 1.0, Phase::parse("t - sin(t)").unwrap());
        assert!(FreeMotion::new(stalls, (0.0, 1.0)).is_err());
    }
}
