use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::FourVector;
use crate::chart::{kinematics, ChartState};
use crate::degeneracy::analyse;
use crate::error::{Error, Result};
use crate::form::Form;
use crate::noether::momenta_at;

use super::el_parts;

#[derive(Clone, Debug, Serialize)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    /// Spacing of recorded samples in lab time.
    pub sample_every: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: 1e-3,
            max_steps: 2_000_000,
            sample_every: 0.05,
        }
    }
}

/// A recorded state with the charges evaluated there.
#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub p: FourVector,
    pub pp: f64,
    pub ww: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Drift {
    /// `max |PP(t) − PP(0)| / |PP(0)|`.
    pub pp: f64,
    pub ww: f64,
    /// `max ‖P(t) − P(0)‖∞ / ‖P(0)‖∞`.
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Integration {
    pub form: String,
    pub dof: usize,
    pub samples: Vec<Sample>,
    pub steps: usize,
    pub rejected: usize,
    /// Coordinates that do not enter the Lagrangian at all and move freely.
    pub decoupled: Vec<usize>,
    pub drift: Drift,
}

fn sample(form: &Form, t: f64, y: &[f64]) -> Result<Sample> {
    let n = y.len() / 2;
    let (q, qdot) = (&y[..n], &y[n..]);
    let kin = kinematics(t, q, qdot);
    let m = momenta_at(form, &kin.x, &kin.xdot, &kin.k, &kin.kdot)?;
    Ok(Sample {
        t,
        q: q.to_vec(),
        qdot: qdot.to_vec(),
        p: m.p,
        pp: m.pp(),
        ww: m.ww(),
    })
}

/// `q̈` from `H_vv q̈ = ∂L/∂q − H_vq q̇`.
fn acceleration(form: &Form, t: f64, y: &[f64], decoupled: &mut Vec<usize>) -> Result<Vec<f64>> {
    let n = y.len() / 2;
    let (q, qdot) = (&y[..n], &y[n..]);
    let parts = el_parts(form, q, qdot)?;
    let active: Vec<usize> = (0..n)
        .filter(|&i| {
            let idle = parts.grad_q[i] == 0.0
                && (0..n).all(|j| parts.h_vv[(i, j)] == 0.0 && parts.h_vv[(j, i)] == 0.0 && parts.h_vq[(i, j)] == 0.0);
            if idle && !decoupled.contains(&i) {
                decoupled.push(i);
            }
            !idle
        })
        .collect();
    let m = active.len();
    let h = DMatrix::from_fn(m, m, |a, b| parts.h_vv[(active[a], active[b])]);
    let rhs = DVector::from_fn(m, |a, _| {
        let i = active[a];
        parts.grad_q[i] - (0..n).map(|j| parts.h_vq[(i, j)] * qdot[j]).sum::<f64>()
    });
    let (_, _, det, thr) = analyse(&h);
    if det.abs() <= thr {
        return Err(Error::SingularHessian {
            t,
            det,
            state: y.to_vec(),
        });
    }
    let sol = h
        .qr()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularHessian { t, det, state: y.to_vec() })?;
    let mut acc = vec![0.0; n];
    for (a, &i) in active.iter().enumerate() {
        acc[i] = sol[a];
    }
    Ok(acc)
}

/// Accelerations the integrator would use at `(q, q̇)`.
pub fn acceleration_at(form: &Form, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
    let y: Vec<f64> = q.iter().chain(qdot).copied().collect();
    acceleration(form, t, &y, &mut Vec::new())
}

fn rhs(form: &Form, t: f64, y: &[f64], decoupled: &mut Vec<usize>) -> Result<Vec<f64>> {
    let n = y.len() / 2;
    let acc = acceleration(form, t, y, decoupled)?;
    Ok(y[n..].iter().copied().chain(acc).collect())
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the Euler–Lagrange equations of `form` in the lab-time chart
/// from `initial` over `duration`. Aborts with [`Error::SingularHessian`] as
/// soon as the velocity Hessian degenerates.
pub fn integrate(form: &Form, initial: &ChartState, duration: f64, opts: &IntegrationOptions) -> Result<Integration> {
    if !(duration > 0.0) || !(opts.rtol > 0.0) || !(opts.sample_every > 0.0) {
        return Err(Error::Config("duration, rtol and sample spacing must be positive".into()));
    }
    let n = initial.q.len();
    let t0 = initial.t;
    let t_end = t0 + duration;
    let mut decoupled = Vec::new();
    let mut y = initial.to_vec();
    let mut t = t0;
    let mut k0 = rhs(form, t, &y, &mut decoupled)?;
    let mut samples = vec![sample(form, t, &y)?];
    let mut next_sample = t0 + opts.sample_every;
    let mut h = opts.initial_step.min(opts.sample_every);
    let (mut steps, mut rejected) = (0usize, 0usize);
    while t < t_end - 1e-14 * t_end.abs().max(1.0) {
        if steps + rejected >= opts.max_steps {
            return Err(Error::StepControl {
                t,
                msg: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let target = next_sample.min(t_end);
        let hit = h >= target - t;
        let step = if hit { target - t } else { h };
        let mut ks: Vec<Vec<f64>> = vec![k0.clone()];
        for s in 1..7 {
            let ys: Vec<f64> = (0..2 * n)
                .map(|i| y[i] + step * (0..s).map(|j| A[s][j] * ks[j][i]).sum::<f64>())
                .collect();
            ks.push(rhs(form, t + C[s] * step, &ys, &mut decoupled)?);
        }
        let y5: Vec<f64> = (0..2 * n)
            .map(|i| y[i] + step * (0..7).map(|j| B5[j] * ks[j][i]).sum::<f64>())
            .collect();
        let mut err: f64 = 0.0;
        for i in 0..2 * n {
            let e = step * (0..7).map(|j| (B5[j] - B4[j]) * ks[j][i]).sum::<f64>();
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / (2 * n) as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::StepControl {
                t,
                msg: "non-finite error estimate".into(),
            });
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t += step;
            y = y5;
            k0 = ks.pop().unwrap_or_default();
            steps += 1;
            if hit {
                t = target;
                if target == next_sample || t >= t_end {
                    samples.push(sample(form, t, &y)?);
                    next_sample += opts.sample_every;
                }
            }
            if !hit {
                h = step * factor;
            }
        } else {
            rejected += 1;
            h = step * factor.min(1.0);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepControl {
                    t,
                    msg: format!("step size underflow ({h:e})"),
                });
            }
        }
    }
    let first = samples[0].clone();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let drift = samples.iter().fold(Drift { pp: 0.0, ww: 0.0, p: 0.0 }, |d, s| Drift {
        pp: d.pp.max(rel(s.pp, first.pp)),
        ww: d.ww.max(if first.ww == 0.0 { s.ww.abs() } else { rel(s.ww, first.ww) }),
        p: d.p.max((s.p - first.p).max_abs() / first.p.max_abs()),
    });
    decoupled.sort_unstable();
    Ok(Integration {
        form: form.name(),
        dof: n,
        samples,
        steps,
        rejected,
        decoupled,
        drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::FormParams;

    #[test]
    fn point_particle_moves_straight() {
        let f = Form::named("1", &FormParams::default()).unwrap();
        let s = ChartState::new(0.0, vec![0.0, 0.0, 0.0, 1.0, 0.0], vec![0.3, -0.2, 0.1, 0.0, 0.4]).unwrap();
        let r = integrate(&f, &s, 2.0, &IntegrationOptions::default()).unwrap();
        let last = r.samples.last().unwrap();
        assert!((last.t - 2.0).abs() < 1e-12);
        assert!((last.q[0] - 0.6).abs() < 1e-10 && (last.q[4] - 0.8).abs() < 1e-10);
        assert_eq!(r.decoupled, vec![3, 4]);
        assert!(r.drift.p < 1e-12);
    }

    #[test]
    fn rotator_aborts() {
        let f = Form::named("rotator", &FormParams::default()).unwrap();
        let s = ChartState::new(0.0, vec![0.0, 0.0, 0.0, 1.57, 0.0], vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            integrate(&f, &s, 1.0, &IntegrationOptions::default()),
            Err(Error::SingularHessian { .. })
        ));
    }
}
