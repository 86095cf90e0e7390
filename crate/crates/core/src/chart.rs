//! Lab-time chart for the worldline and null direction.
//!
//! The worldline parameter is fixed to `x⁰`, so `ẋ = (1, v⃗)`, and the null
//! vector is written `k = K(1, n⃗(θ, φ))`. Generalized coordinates are
//! `(x¹, x², x³, θ, φ)`, plus `K` when its amplitude is dynamical.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ad::Real;
use crate::algebra::FourVector;
use crate::error::{Error, Result};
use crate::form::{lagrangian, pq_of, Form, PQPoint};

/// Smallest allowed distance of `θ` from the poles.
pub const POLE_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DofSpec {
    /// `x¹, x², x³, θ, φ`; the amplitude of `k` is fixed to 1.
    Five,
    /// `x¹, x², x³, θ, φ, K`.
    Six,
}

impl DofSpec {
    pub fn count(self) -> usize {
        match self {
            DofSpec::Five => 5,
            DofSpec::Six => 6,
        }
    }

    pub fn from_count(n: usize) -> Result<DofSpec> {
        match n {
            5 => Ok(DofSpec::Five),
            6 => Ok(DofSpec::Six),
            _ => Err(Error::Config(format!("degrees of freedom must be 5 or 6, got {n}"))),
        }
    }

    pub fn for_form(form: &Form) -> DofSpec {
        if form.kernel().natural_dof() == 5 {
            DofSpec::Five
        } else {
            DofSpec::Six
        }
    }
}

/// Coordinates and lab-time velocities at lab time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartState {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl ChartState {
    pub fn new(t: f64, q: Vec<f64>, qdot: Vec<f64>) -> Result<ChartState> {
        if q.len() != qdot.len() || !(q.len() == 5 || q.len() == 6) {
            return Err(Error::Config(format!(
                "chart state needs 5 or 6 coordinates and as many velocities (got {} and {})",
                q.len(),
                qdot.len()
            )));
        }
        Ok(ChartState { t, q, qdot })
    }

    pub fn dof(&self) -> DofSpec {
        if self.q.len() == 6 {
            DofSpec::Six
        } else {
            DofSpec::Five
        }
    }

    /// Same state with the amplitude coordinate dropped or added (`K = 1`,
    /// `K̇ = 0`).
    pub fn with_dof(&self, dof: DofSpec) -> ChartState {
        let mut s = self.clone();
        s.q.resize(5, 0.0);
        s.qdot.resize(5, 0.0);
        if dof == DofSpec::Six {
            let (k, kd) = if self.q.len() == 6 {
                (self.q[5], self.qdot[5])
            } else {
                (1.0, 0.0)
            };
            s.q.push(k);
            s.qdot.push(kd);
        }
        s
    }

    pub fn check_poles(&self) -> Result<()> {
        check_poles(self.q[3])
    }

    pub fn kinematics(&self) -> Kinematics<f64> {
        kinematics(self.t, &self.q, &self.qdot)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.q.iter().chain(self.qdot.iter()).copied().collect()
    }
}

pub fn check_poles(theta: f64) -> Result<()> {
    if !(theta >= POLE_MARGIN && theta <= PI - POLE_MARGIN) {
        return Err(Error::precondition(format!(
            "θ = {theta} is within {POLE_MARGIN} of a pole of the chart"
        )));
    }
    Ok(())
}

/// Four-dimensional data of a chart point.
#[derive(Clone, Copy, Debug)]
pub struct Kinematics<T> {
    pub x: FourVector<T>,
    pub xdot: FourVector<T>,
    pub k: FourVector<T>,
    pub kdot: FourVector<T>,
}

pub fn kinematics<T: Real>(t: T, q: &[T], qdot: &[T]) -> Kinematics<T> {
    let (th, ph) = (q[3], q[4]);
    let (thd, phd) = (qdot[3], qdot[4]);
    let (amp, ampd) = if q.len() == 6 {
        (q[5], qdot[5])
    } else {
        (T::one(), T::zero())
    };
    let (st, ct, sp, cp) = (th.sin(), th.cos(), ph.sin(), ph.cos());
    let n = [st * cp, st * sp, ct];
    let ndot = [
        ct * cp * thd - st * sp * phd,
        ct * sp * thd + st * cp * phd,
        -(st * thd),
    ];
    Kinematics {
        x: FourVector::new(t, q[0], q[1], q[2]),
        xdot: FourVector::new(T::one(), qdot[0], qdot[1], qdot[2]),
        k: FourVector::new(amp, amp * n[0], amp * n[1], amp * n[2]),
        kdot: FourVector::new(
            ampd,
            ampd * n[0] + amp * ndot[0],
            ampd * n[1] + amp * ndot[1],
            ampd * n[2] + amp * ndot[2],
        ),
    }
}

/// Chart coordinates `(x¹, x², x³, θ, φ, K)` of a position and null vector.
/// `φ` is continued from `phi_ref` so it does not jump across the branch cut.
pub fn coordinates<T: Real>(x: &FourVector<T>, k: &FourVector<T>, phi_ref: f64) -> [T; 6] {
    let amp = k[0];
    let th = (k[3] / amp).acos();
    let mut ph = k[2].atan2(k[1]);
    let turns = ((phi_ref - ph.value()) / (2.0 * PI)).round();
    ph = ph + 2.0 * PI * turns;
    [x[1], x[2], x[3], th, ph, amp]
}

/// `L(q, q̇)` in the chart.
pub fn chart_lagrangian<T: Real>(form: &Form, q: &[T], qdot: &[T]) -> Result<T> {
    let kin = kinematics(T::zero(), q, qdot);
    lagrangian(form, &kin.xdot, &kin.k, &kin.kdot)
}

pub fn chart_pq(form: &Form, s: &ChartState) -> Result<PQPoint> {
    let kin = s.kinematics();
    let (p, q) = pq_of(&kin.xdot, &kin.k, &kin.kdot, form.ell)?;
    Ok(PQPoint { p, q })
}

/// Ranges for [`random_state`].
#[derive(Clone, Debug)]
pub struct StateSampler {
    pub max_speed: f64,
    pub theta_margin: f64,
    pub angular_rate: f64,
    pub amplitude: (f64, f64),
    pub amplitude_rate: f64,
}

impl Default for StateSampler {
    fn default() -> Self {
        StateSampler {
            max_speed: 0.6,
            theta_margin: 0.4,
            angular_rate: 1.0,
            amplitude: (0.5, 2.0),
            amplitude_rate: 0.5,
        }
    }
}

impl StateSampler {
    /// A random state; when `target_q` is given the angular velocities are
    /// rescaled so that `Q` takes that value.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        dof: DofSpec,
        ell: f64,
        target_q: Option<f64>,
    ) -> ChartState {
        loop {
            let mut q: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut qdot: Vec<f64> = loop {
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-self.max_speed..self.max_speed)).collect();
                if v.iter().map(|c| c * c).sum::<f64>() < self.max_speed * self.max_speed {
                    break v;
                }
            };
            q.push(rng.gen_range(self.theta_margin..PI - self.theta_margin));
            q.push(rng.gen_range(0.0..2.0 * PI));
            qdot.push(rng.gen_range(-self.angular_rate..self.angular_rate));
            qdot.push(rng.gen_range(-self.angular_rate..self.angular_rate));
            if dof == DofSpec::Six {
                q.push(rng.gen_range(self.amplitude.0..self.amplitude.1));
                qdot.push(rng.gen_range(-self.amplitude_rate..self.amplitude_rate));
            }
            let mut s = ChartState { t: 0.0, q, qdot };
            let kin = s.kinematics();
            let Ok((_, qv)) = pq_of(&kin.xdot, &kin.k, &kin.kdot, ell) else {
                continue;
            };
            if qv < 1e-3 {
                continue;
            }
            if let Some(target) = target_q {
                let r = (target / qv).sqrt();
                s.qdot[3] *= r;
                s.qdot[4] *= r;
            }
            return s;
        }
    }
}

/// [`StateSampler::default`] with `Q` drawn uniformly from the form's sweep
/// box, capped at 4.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, form: &Form, dof: DofSpec) -> ChartState {
    let (lo, hi) = form.kernel().domain().q;
    let lo = lo.max(1e-2);
    let hi = hi.min(4.0);
    let target = lo + (hi - lo) * rng.gen_range(0.1..0.9);
    StateSampler::default().sample(rng, dof, form.ell, Some(target))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::form::FormParams;

    #[test]
    fn k_is_null_and_kdot_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = StateSampler::default().sample(&mut rng, DofSpec::Six, 1.0, None);
            let kin = s.kinematics();
            assert!(kin.k.norm_sqr().abs() < 1e-14 * s.q[5] * s.q[5]);
            assert!(kin.k.dot(&kin.kdot).abs() < 1e-13);
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let s = ChartState::new(0.3, vec![0.1, -0.2, 0.5, 1.1, 5.9, 1.7], vec![0.0; 6]).unwrap();
        let kin = s.kinematics();
        let c = coordinates(&kin.x, &kin.k, 6.0);
        for i in 0..6 {
            assert!((c[i] - s.q[i]).abs() < 1e-14, "{i}");
        }
    }

    #[test]
    fn target_q_is_hit() {
        let f = Form::named("rotator", &FormParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = StateSampler::default().sample(&mut rng, DofSpec::Five, 1.0, Some(0.7));
        assert!((chart_pq(&f, &s).unwrap().q - 0.7).abs() < 1e-12);
    }

    #[test]
    fn pole_guard() {
        let s = ChartState::new(0.0, vec![0.0, 0.0, 0.0, 1e-4, 0.0], vec![0.0; 5]).unwrap();
        assert!(matches!(s.check_poles(), Err(Error::Precondition(_))));
    }
}
