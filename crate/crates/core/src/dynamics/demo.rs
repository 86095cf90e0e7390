use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::FourVector;
use crate::chart::DofSpec;
use crate::error::{Error, Result};
use crate::form::Form;

use super::free::{FreeMotion, Phase, SolutionParams};
use super::integrate::{acceleration_at, Integration};
use super::{el_residual_at, LabJet, Trajectory};
use crate::chart::kinematics;

/// One row of an exported trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: FourVector,
    pub k: FourVector,
    /// Euler–Lagrange residual relative to its scale.
    pub residual: f64,
    pub pp: f64,
    pub ww: f64,
}

impl TrajectoryRow {
    /// Samples `traj` at `ts`, with residuals and Casimirs for `form`.
    pub fn sample(form: &Form, traj: &FreeMotion, ts: &[f64]) -> Result<Vec<TrajectoryRow>> {
        let dof = DofSpec::for_form(form);
        ts.iter()
            .map(|&t| {
                let pt = traj.point(t)?;
                let res = el_residual_at(form, &pt.chart(dof)?)?;
                let m = traj.charges(form, t)?;
                Ok(TrajectoryRow {
                    t,
                    x: pt.x[0],
                    k: pt.k[0],
                    residual: res.relative(),
                    pp: m.pp(),
                    ww: m.ww(),
                })
            })
            .collect()
    }
}

/// Rows for the samples of an integration run; the residual uses the
/// accelerations from the linear solve.
pub fn integration_rows(form: &Form, run: &Integration) -> Result<Vec<TrajectoryRow>> {
    run.samples
        .iter()
        .map(|s| {
            let qddot = acceleration_at(form, s.t, &s.q, &s.qdot)?;
            let jet = LabJet {
                lab_time: s.t,
                q: s.q.clone(),
                qdot: s.qdot.clone(),
                qddot,
            };
            let kin = kinematics(s.t, &s.q, &s.qdot);
            Ok(TrajectoryRow {
                t: s.t,
                x: kin.x,
                k: kin.k,
                residual: el_residual_at(form, &jet)?.relative(),
                pp: s.pp,
                ww: s.ww,
            })
        })
        .collect()
}

/// Writes rows as comma-separated text with a header.
pub fn write_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "t,x0,x1,x2,x3,k0,k1,k2,k3,residual,PP,WW").map_err(io)?;
    for r in rows {
        let cols: Vec<String> = std::iter::once(r.t)
            .chain(r.x.0)
            .chain(r.k.0)
            .chain([r.residual, r.pp, r.ww])
            .map(|v| format!("{v:.17e}"))
            .collect();
        writeln!(out, "{}", cols.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoEntry {
    pub phase: String,
    pub initial: LabJet,
    /// Largest relative Euler–Lagrange residual over the sweep.
    pub max_residual: f64,
    pub worst_t: f64,
    /// Relative drift of recomputed `P` and `W`.
    pub charge_drift: f64,
    pub final_x: FourVector,
    pub final_phase: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndeterminacyReport {
    pub form: String,
    pub t_end: f64,
    pub entries: Vec<DemoEntry>,
    /// Largest difference between any two initial `(q, q̇)`.
    pub initial_spread: f64,
    /// Largest sup-norm distance between any two trajectories `(x, k)` over
    /// the sweep.
    pub divergence: f64,
    pub max_residual: f64,
    pub max_drift: f64,
}

/// Runs the free rotator of `params` once per phase, all sharing the same
/// `φ(0)` and `φ̇(0)`, and compares them.
pub fn indeterminacy_demo(
    form: &Form,
    params: &SolutionParams,
    phases: &[Phase],
    t_end: f64,
    sweep: usize,
) -> Result<IndeterminacyReport> {
    if phases.is_empty() || !(t_end > 0.0) || sweep < 2 {
        return Err(Error::Config("need at least one phase, t_end > 0 and two sweep points".into()));
    }
    let (phi0, rate0) = phases[0].value_and_rate(0.0)?;
    for ph in &phases[1..] {
        let (p, r) = ph.value_and_rate(0.0)?;
        let tol = 1e-12 * (1.0 + phi0.abs().max(rate0.abs()));
        if (p - phi0).abs() > tol || (r - rate0).abs() > tol {
            return Err(Error::precondition(format!(
                "phase `{}` starts at (φ, φ̇) = ({p}, {r}), not ({phi0}, {rate0})",
                ph.source()
            )));
        }
    }
    let motions: Vec<FreeMotion> = phases
        .iter()
        .map(|ph| {
            FreeMotion::new(
                SolutionParams {
                    phase: ph.clone(),
                    ..params.clone()
                },
                (0.0, t_end),
            )
        })
        .collect::<Result<_>>()?;
    let ts: Vec<f64> = (0..sweep).map(|i| t_end * i as f64 / (sweep - 1) as f64).collect();
    let dof = DofSpec::for_form(form);

    let runs: Vec<(DemoEntry, Vec<(FourVector, FourVector)>)> = motions
        .par_iter()
        .map(|fm| {
            let mut worst = (0.0f64, 0.0);
            let mut path = Vec::with_capacity(ts.len());
            for &t in &ts {
                let pt = fm.point(t)?;
                let r = el_residual_at(form, &pt.chart(dof)?)?.relative();
                if r > worst.0 {
                    worst = (r, t);
                }
                path.push((pt.x[0], pt.k[0]));
            }
            let (final_phase, _) = fm.params.phase.value_and_rate(t_end)?;
            Ok((
                DemoEntry {
                    phase: fm.params.phase.source().to_string(),
                    initial: fm.point(0.0)?.chart(dof)?,
                    max_residual: worst.0,
                    worst_t: worst.1,
                    charge_drift: fm.charge_drift(form, &ts)?,
                    final_x: path.last().map(|p| p.0).unwrap_or_else(FourVector::zero),
                    final_phase,
                },
                path,
            ))
        })
        .collect::<Result<_>>()?;

    let mut spread: f64 = 0.0;
    let mut divergence: f64 = 0.0;
    for (i, (a, pa)) in runs.iter().enumerate() {
        for (b, pb) in &runs[i + 1..] {
            let ja = a.initial.q.iter().chain(&a.initial.qdot);
            let jb = b.initial.q.iter().chain(&b.initial.qdot);
            spread = ja.zip(jb).fold(spread, |m, (u, v)| m.max((u - v).abs()));
            for ((xa, ka), (xb, kb)) in pa.iter().zip(pb) {
                divergence = divergence.max((*xa - *xb).max_abs()).max((*ka - *kb).max_abs());
            }
        }
    }
    let entries: Vec<DemoEntry> = runs.into_iter().map(|(e, _)| e).collect();
    Ok(IndeterminacyReport {
        form: form.name(),
        t_end,
        initial_spread: spread,
        divergence,
        max_residual: entries.iter().fold(0.0, |m, e| m.max(e.max_residual)),
        max_drift: entries.iter().fold(0.0, |m, e| m.max(e.charge_drift)),
        entries,
    })
}
