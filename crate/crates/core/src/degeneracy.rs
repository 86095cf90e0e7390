//! Velocity Hessians in the lab-time chart and their relation to the
//! Casimir map `(P, Q) ↦ (PP, WW)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ad::{hessian as ad_hessian, MultiFn, Real};
use crate::chart::{chart_lagrangian, chart_pq, ChartState, DofSpec};
use crate::error::{Error, Result};
use crate::form::{FofQ, Form, PQPoint, ScalarFn};
use crate::noether::casimir_jacobian;

/// Relative singular-value threshold for the rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct HessianReport {
    pub form: String,
    pub dof: usize,
    pub pq: PQPoint,
    pub matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub det: f64,
    /// `1e−10·∏max(σᵢ, 1)`; `det` below this counts as zero.
    pub det_threshold: f64,
    pub singular: bool,
    pub symmetry_defect: f64,
}

struct VelocityHessianFn<'a> {
    form: &'a Form,
    q: &'a [f64],
}

impl MultiFn for VelocityHessianFn<'_> {
    type Error = Error;

    fn eval<T: Real>(&self, v: &[T]) -> Result<T> {
        let q: Vec<T> = self.q.iter().map(|&c| T::cst(c)).collect();
        chart_lagrangian(self.form, &q, v)
    }
}

/// Singular values, rank, determinant and the zero test for a square matrix.
pub fn analyse(m: &DMatrix<f64>) -> (Vec<f64>, usize, f64, f64) {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * max).count();
    let det = m.determinant();
    let threshold = RANK_TOL * sv.iter().map(|s| s.max(1.0)).product::<f64>();
    (sv, rank, det, threshold)
}

/// `∂²L/∂q̇ⁱ∂q̇ʲ` for the chart degrees of freedom in `dof`.
pub fn hessian(form: &Form, state: &ChartState, dof: DofSpec) -> Result<HessianReport> {
    let s = state.with_dof(dof);
    s.check_poles()?;
    let pq = chart_pq(form, &s)?;
    let f = VelocityHessianFn { form, q: &s.q };
    let (_, _, h) = ad_hessian(&f, &s.qdot)?;
    let n = h.nrows();
    let mut sym: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            sym = sym.max((h[(i, j)] - h[(j, i)]).abs());
            scale = scale.max(h[(i, j)].abs());
        }
    }
    let (sv, rank, det, thr) = analyse(&h);
    Ok(HessianReport {
        form: form.name(),
        dof: dof.count(),
        pq,
        matrix: (0..n).map(|i| (0..n).map(|j| h[(i, j)]).collect()).collect(),
        singular_values: sv,
        rank,
        det,
        det_threshold: thr,
        singular: det.abs() <= thr,
        symmetry_defect: sym / scale.max(f64::MIN_POSITIVE),
    })
}

/// `det ∂(PP, WW)/∂(P, Q)`.
pub fn jacobian_pq(form: &Form, at: PQPoint) -> Result<f64> {
    let j = casimir_jacobian(form, at)?;
    Ok(j[0][0] * j[1][1] - j[0][1] * j[1][0])
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationEntry {
    pub form: String,
    pub det: f64,
    /// `(F − PF_P)/(F_P(P² + Q) − PF)`.
    pub ratio: Option<f64>,
    pub jacobian: f64,
    /// Extracted kinematical factor.
    pub k: Option<f64>,
    /// Why the form was left out, if it was.
    pub excluded: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub pq: PQPoint,
    pub entries: Vec<RelationEntry>,
    /// Largest pairwise relative deviation among the extracted factors.
    pub max_deviation: f64,
    pub admissible: usize,
}

/// Extracts `𝒦 = det𝓗 / [(F − PF_P)/(F_P(P²+Q) − PF) · J]` in the
/// six-dimensional chart for each form at one state. Forms for which either
/// factor of the denominator degenerates are flagged instead.
pub fn relation_check(forms: &[Form], state: &ChartState) -> Result<RelationReport> {
    let s = state.with_dof(DofSpec::Six);
    let mut entries = Vec::with_capacity(forms.len());
    let mut pq = None;
    for form in forms {
        let h = hessian(form, &s, DofSpec::Six)?;
        let at = h.pq;
        pq.get_or_insert(at);
        let j = form.jet(at.p, at.q)?;
        let num = j.f - at.p * j.fa;
        let den = j.fa * (at.p * at.p + at.q) - at.p * j.f;
        let jm = casimir_jacobian(form, at)?;
        let jac = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0];
        let jac_scale = (jm[0][0] * jm[1][1]).abs() + (jm[0][1] * jm[1][0]).abs();
        let fscale = j.f.abs() + (at.p * j.fa).abs();
        let excluded = if num.abs() <= 1e-8 * fscale.max(f64::MIN_POSITIVE) {
            Some("F − P·F_P vanishes".to_string())
        } else if den.abs() <= 1e-8 * (j.fa.abs() * (at.p * at.p + at.q) + (at.p * j.f).abs()).max(f64::MIN_POSITIVE) {
            Some("F_P(P² + Q) − P·F vanishes".to_string())
        } else if jac.abs() <= 1e-8 * jac_scale || jac_scale == 0.0 {
            Some("Jacobian of the Casimir map vanishes".to_string())
        } else {
            None
        };
        let ratio = (den != 0.0).then(|| num / den);
        let k = match (&excluded, ratio) {
            (None, Some(r)) => Some(h.det / (r * jac)),
            _ => None,
        };
        entries.push(RelationEntry {
            form: form.name(),
            det: h.det,
            ratio,
            jacobian: jac,
            k,
            excluded,
        });
    }
    let ks: Vec<f64> = entries.iter().filter_map(|e| e.k).collect();
    let mut dev: f64 = 0.0;
    for (i, a) in ks.iter().enumerate() {
        for b in &ks[i + 1..] {
            dev = dev.max((a - b).abs() / a.abs().max(b.abs()));
        }
    }
    Ok(RelationReport {
        pq: pq.unwrap_or(PQPoint { p: 0.0, q: 0.0 }),
        admissible: ks.len(),
        entries,
        max_deviation: dev,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FqDetReport {
    pub f: String,
    pub q: f64,
    /// `B(Q) = 1 + 2Q(f′/f + f″/f′)`.
    pub bracket: f64,
    /// `f³f′²B`, the determinant up to the kinematical factor.
    pub formula: f64,
    pub direct: f64,
    pub direct_singular: bool,
    /// `direct / formula` when `B ≠ 0`.
    pub kinematic_factor: Option<f64>,
}

/// The bracket `B(Q) = 1 + 2Q(f′/f + f″/f′)`.
pub fn fq_bracket(f: &dyn ScalarFn, q: f64) -> Result<f64> {
    let [f0, f1, f2] = f.eval3(q)?;
    if f1 == 0.0 {
        return Err(Error::precondition(format!("f′ vanishes at Q = {q}")));
    }
    Ok(1.0 + 2.0 * q * (f1 / f0 + f2 / f1))
}

/// Compares `f³f′²B` with the five-dimensional Hessian determinant of
/// `F = f(Q)` at `state`.
pub fn fq_det_formula(f: std::sync::Arc<dyn ScalarFn>, state: &ChartState, mass: f64, ell: f64) -> Result<FqDetReport> {
    let form = Form::new(std::sync::Arc::new(FofQ { f: f.clone() }), mass, ell)?;
    let h = hessian(&form, state, DofSpec::Five)?;
    let q = h.pq.q;
    let [f0, f1, _] = f.eval3(q)?;
    let b = fq_bracket(f.as_ref(), q)?;
    let formula = f0.powi(3) * f1 * f1 * b;
    let bscale = 1.0 + 2.0 * q * (f1 / f0).abs();
    let kinematic_factor = (b.abs() > 1e-10 * bscale).then(|| h.det / formula);
    Ok(FqDetReport {
        f: f.name(),
        q,
        bracket: b,
        formula,
        direct: h.det,
        direct_singular: h.singular,
        kinematic_factor,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::chart::random_state;
    use crate::form::{ExprFn, FormParams, RotatorS, Sign};

    fn unit(spec: &str) -> Form {
        Form::named(spec, &FormParams::default()).unwrap()
    }

    #[test]
    fn rotator_is_degenerate_and_q_is_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rot = unit("rotator");
        let fq = unit("fq");
        for _ in 0..5 {
            let s = random_state(&mut rng, &rot, DofSpec::Five);
            let h = hessian(&rot, &s, DofSpec::Five).unwrap();
            assert!(h.singular && h.rank < 5, "{h:?}");
            assert!(h.symmetry_defect < 1e-12);
            let g = hessian(&fq, &s, DofSpec::Five).unwrap();
            assert!(!g.singular && g.rank == 5, "{g:?}");
        }
    }

    #[test]
    fn brackets() {
        let b = fq_bracket(&ExprFn::parse("Q").unwrap(), 1.0).unwrap();
        assert!((b - 3.0).abs() < 1e-15);
        for q in [0.1, 0.5, 0.9] {
            for s in [Sign::Plus, Sign::Minus] {
                assert!(fq_bracket(&RotatorS(s), q).unwrap().abs() < 1e-14);
            }
        }
        assert!(matches!(
            fq_bracket(&ExprFn::parse("2").unwrap(), 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rotator_jacobian_vanishes() {
        for p in [-0.5, 0.0, 1.0] {
            assert!(jacobian_pq(&unit("rotator"), PQPoint { p, q: 2.0 }).unwrap().abs() < 1e-14);
            assert_eq!(jacobian_pq(&unit("1"), PQPoint { p, q: 2.0 }).unwrap(), 0.0);
        }
    }
}
