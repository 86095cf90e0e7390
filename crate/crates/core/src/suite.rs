//! Named verification suites. Each suite produces a list of [`Report`]s;
//! suites are looked up by name in a [`SuiteRegistry`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::gram_det;
use crate::chart::{random_state, ChartState, DofSpec, StateSampler};
use crate::degeneracy::{fq_bracket, fq_det_formula, hessian, relation_check};
use crate::dynamics::{
    angular_speed, el_residual_at, indeterminacy_demo, integrate, FreeMotion, IntegrationOptions, Phase,
    SolutionParams, Trajectory,
};
use crate::error::{Error, Result};
use crate::form::{pq_from_jet, ExprFn, Form, FormParams, RotatorS, ScalarFn, Sign};
use crate::invariants::{
    basic_scalars, gauge_jet_transform, gauge_table, identity_checks, iota, random_jet, random_spinor,
    reproduce_invariant_count, CountingConfig, GaugeJet,
};
use crate::noether::{casimirs_closed_form, fundamental_residuals, momenta};
use crate::report::Report;
use crate::spinor::tetrad;

/// Physical scales, seed and tolerance overrides shared by all suites.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub mass: f64,
    pub ell: f64,
    pub nu: f64,
    pub seed: u64,
    /// Overrides keyed by report name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            mass: 1.0,
            ell: 1.0,
            nu: 0.5,
            seed: 7,
            tolerances: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Independent stream per check so results do not depend on run order.
    pub fn rng(&self, salt: &str) -> ChaCha8Rng {
        let h = salt
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    pub fn form(&self, spec: &str, outer: Sign, inner: Sign, nu: f64) -> Result<Form> {
        let params = FormParams {
            nu,
            outer,
            inner,
            ..Default::default()
        };
        Form::named(spec, &params)?.with_scales(self.mass, self.ell)
    }

    /// Wraps a fallible check into a report named `name`.
    fn check(&self, name: &str, default_tol: f64, inputs: &str, f: impl FnOnce(&SuiteConfig) -> Result<(f64, serde_json::Value)>) -> Report {
        let tol = self.tol(name, default_tol);
        match f(self) {
            Ok((r, d)) => Report::new(name, r, tol, self.seed, inputs).with_details(d),
            Err(e) => Report::error(name, tol, self.seed, &e),
        }
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, cfg: &SuiteConfig) -> Vec<Report>;
}

/// Suites in registration order.
pub struct SuiteRegistry {
    suites: Vec<Arc<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        SuiteRegistry { suites: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = SuiteRegistry::empty();
        r.register(Arc::new(TetradSuite));
        r.register(Arc::new(InvariantsSuite));
        r.register(Arc::new(CountSuite));
        r.register(Arc::new(CasimirSuite));
        r.register(Arc::new(DegeneracySuite));
        r.register(Arc::new(DynamicsSuite));
        r
    }

    /// Adds a suite, replacing one of the same name.
    pub fn register(&mut self, suite: Arc<dyn Suite>) {
        self.suites.retain(|s| s.name() != suite.name());
        self.suites.push(suite);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Suite>> {
        self.suites.iter().find(|s| s.name() == name).cloned().ok_or_else(|| Error::Unknown {
            kind: "suite",
            name: name.to_string(),
        })
    }

    /// Runs one suite, or every suite for `all`. Suites run in parallel and
    /// reports come back in registration order.
    pub fn run(&self, selector: &str, cfg: &SuiteConfig) -> Result<Vec<Report>> {
        let chosen: Vec<Arc<dyn Suite>> = if selector == "all" {
            self.suites.clone()
        } else {
            vec![self.get(selector)?]
        };
        let out: Vec<Vec<Report>> = chosen.par_iter().map(|s| s.run(cfg)).collect();
        Ok(out.into_iter().flatten().collect())
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        SuiteRegistry::builtin()
    }
}

fn json(v: impl serde::Serialize) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

struct TetradSuite;

impl Suite for TetradSuite {
    fn name(&self) -> &'static str {
        "tetrad"
    }

    fn summary(&self) -> &'static str {
        "scalar products and volume of the spinor tetrad"
    }

    fn run(&self, cfg: &SuiteConfig) -> Vec<Report> {
        let mut rng = cfg.rng("tetrad");
        let tetrads: Vec<_> = (0..1000).map(|_| tetrad(&random_spinor(&mut rng))).collect();
        vec![
            cfg.check("tetrad.relations", 1e-12, "spinors=1000", |_| {
                let mut worst: f64 = 0.0;
                for t in &tetrads {
                    let t = t.as_ref().map_err(Clone::clone)?;
                    worst = worst.max(t.relation_defect() / t.scale());
                }
                Ok((worst, serde_json::Value::Null))
            }),
            cfg.check("tetrad.gram_det", 1e-11, "spinors=1000", |_| {
                let mut worst: f64 = 0.0;
                for t in &tetrads {
                    let t = t.as_ref().map_err(Clone::clone)?;
                    worst = worst.max((gram_det(&t.k, &t.m, &t.a, &t.b) + 4.0).abs());
                }
                Ok((worst, serde_json::Value::Null))
            }),
        ]
    }
}

struct InvariantsSuite;

fn random_gauge(rng: &mut ChaCha8Rng) -> GaugeJet {
    GaugeJet {
        alpha: rng.gen_range(-2.0..2.0),
        beta: rng.gen_range(-2.0..2.0),
        alpha_dot: rng.gen_range(-2.0..2.0),
        beta_dot: rng.gen_range(-2.0..2.0),
    }
}

impl Suite for InvariantsSuite {
    fn name(&self) -> &'static str {
        "invariants"
    }

    fn summary(&self) -> &'static str {
        "gauge invariance of the six invariants, the transformation table and algebraic identities"
    }

    fn run(&self, cfg: &SuiteConfig) -> Vec<Report> {
        let mut rng = cfg.rng("invariants");
        let cases: Vec<_> = (0..1000).map(|_| (random_jet(&mut rng), random_gauge(&mut rng))).collect();
        vec![
            cfg.check("invariants.gauge_invariance", 1e-10, "jets=1000", |_| {
                let mut worst: f64 = 0.0;
                for (j, g) in &cases {
                    let (a, b) = (iota(j), iota(&gauge_jet_transform(j, g)));
                    for i in 0..6 {
                        let s = a[i].abs().max(j.scale().powi(2)).max(1.0);
                        worst = worst.max((a[i] - b[i]).abs() / s);
                    }
                }
                Ok((worst, serde_json::Value::Null))
            }),
            cfg.check("invariants.gauge_table", 1e-10, "jets=1000", |_| {
                let mut worst: f64 = 0.0;
                for (j, g) in &cases {
                    let want = gauge_table(&basic_scalars(j), g).to_array();
                    let got = basic_scalars(&gauge_jet_transform(j, g)).to_array();
                    let s = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                    for i in 0..10 {
                        worst = worst.max((want[i] - got[i]).abs() / s);
                    }
                }
                Ok((worst, serde_json::Value::Null))
            }),
            cfg.check("invariants.identities", 1e-10, "jets=1000", |_| {
                let mut worst: f64 = 0.0;
                for (j, _) in &cases {
                    let r = identity_checks(j, false)?;
                    worst = worst.max(r.max_residual() / r.scale);
                }
                Ok((worst, serde_json::Value::Null))
            }),
        ]
    }
}

struct CountSuite;

impl Suite for CountSuite {
    fn name(&self) -> &'static str {
        "count-invariants"
    }

    fn summary(&self) -> &'static str {
        "rank and null space of the gauge-invariance system"
    }

    fn run(&self, cfg: &SuiteConfig) -> Vec<Report> {
        vec![cfg.check("count-invariants", 0.0, "samples=64", |cfg| {
            let r = reproduce_invariant_count(&CountingConfig::with_seed(cfg.seed))?;
            let got = [r.rank, r.nullity, r.zero_combinations, r.functional_rank, r.total_independent];
            let want = [5, 10, 2, 3, 6];
            let miss = got.iter().zip(want).filter(|(g, w)| **g != *w).count() + usize::from(!r.consistent);
            Ok((miss as f64, json(&r)))
        })]
    }
}

/// Members of the family that satisfy the fundamental conditions.
pub fn fundamental_forms(cfg: &SuiteConfig) -> Result<Vec<Form>> {
    let mut out = Vec::new();
    for inner in [Sign::Plus, Sign::Minus] {
        out.push(cfg.form("rotator_f", Sign::Plus, inner, 0.0)?);
        for outer in [Sign::Plus, Sign::Minus] {
            out.push(cfg.form("starlike", outer, inner, 0.0)?);
        }
    }
    for nu in [-1.0, -0.3, 0.0, 0.5, 2.0] {
        for inner in [Sign::Plus, Sign::Minus] {
            for outer in [Sign::Plus, Sign::Minus] {
                out.push(cfg.form("nu_family", outer, inner, nu)?);
            }
        }
    }
    Ok(out)
}

/// One of each registered builtin.
pub fn builtin_forms(cfg: &SuiteConfig) -> Result<Vec<Form>> {
    let mut out = vec![cfg.form("point_particle", Sign::Plus, Sign::Plus, 0.0)?];
    for inner in [Sign::Plus, Sign::Minus] {
        out.push(cfg.form("rotator_f", Sign::Plus, inner, 0.0)?);
        out.push(cfg.form("starlike", Sign::Plus, inner, 0.0)?);
        out.push(cfg.form("nu_family", Sign::Plus, inner, cfg.nu)?);
    }
    out.push(cfg.form("sqrtS", Sign::Plus, Sign::Plus, 0.0)?);
    out.push(cfg.form("fq", Sign::Plus, Sign::Plus, 0.0)?);
    Ok(out)
}

struct CasimirSuite;

impl Suite for CasimirSuite {
    fn name(&self) -> &'static str {
        "casimir"
    }

    fn summary(&self) -> &'static str {
        "fundamental conditions over domain grids and Noether cross-checks"
    }

    fn run(&self, cfg: &SuiteConfig) -> Vec<Report> {
        let forms = match fundamental_forms(cfg) {
            Ok(f) => f,
            Err(e) => return vec![Report::error("casimir.fundamental", 1e-10, cfg.seed, &e)],
        };
        let mut out: Vec<Report> = forms
            .par_iter()
            .map(|f| {
                cfg.check(&format!("casimir.fundamental.{}", f.name()), 1e-10, "grid=20x20", |_| {
                    let r = fundamental_residuals(f, &f.kernel().domain().grid(20))?;
                    Ok((r.max_residual(), json(&r)))
                })
            })
            .collect();
        let builtins = match builtin_forms(cfg) {
            Ok(f) => f,
            Err(e) => return vec![Report::error("casimir.noether", 1e-9, cfg.seed, &e)],
        };
        out.par_extend(builtins.par_iter().flat_map_iter(|f| noether_reports(cfg, f)));
        out
    }
}

fn noether_reports(cfg: &SuiteConfig, form: &Form) -> Vec<Report> {
    let name = form.name();
    let dom = form.kernel().domain();
    let mut rng = cfg.rng(&format!("noether.{name}"));
    let mut jets = Vec::new();
    let mut tries = 0;
    while jets.len() < 100 && tries < 200_000 {
        tries += 1;
        let j = random_jet(&mut rng);
        let Ok(pq) = pq_from_jet(&j, form.ell) else { continue };
        if pq.p >= dom.p.0 && pq.p <= dom.p.1 && pq.q >= dom.q.0 && pq.q <= dom.q.1 {
            jets.push((j, pq));
        }
    }
    let inputs = format!("jets={}", jets.len());
    let enough = jets.len() == 100;
    let m2 = form.mass * form.mass;
    let w2 = m2 * m2 * form.ell * form.ell;
    let (mut cas, mut wp): (f64, f64) = (0.0, 0.0);
    let mut failure = None;
    for (j, pq) in &jets {
        match (momenta(form, j), casimirs_closed_form(form, *pq)) {
            (Ok(m), Ok(c)) => {
                cas = cas
                    .max((m.pp() - c.pp).abs() / c.pp.abs().max(m2))
                    .max((m.ww() - c.ww).abs() / c.ww.abs().max(w2));
                wp = wp.max(m.wp_defect());
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(e),
        }
    }
    if !enough {
        failure.get_or_insert(Error::precondition("too few jets inside the sweep box"));
    }
    let mk = |suffix: &str, r: f64, tol: f64| {
        let n = format!("casimir.noether.{suffix}.{name}");
        match &failure {
            Some(e) => Report::error(n.clone(), cfg.tol(&n, tol), cfg.seed, e),
            None => Report::new(n.clone(), r, cfg.tol(&n, tol), cfg.seed, inputs.clone()),
        }
    };
    vec![mk("casimirs", cas, 1e-9), mk("wp", wp, 1e-10)]
}

struct DegeneracySuite;

/// `F = f(Q)` examples with nonvanishing bracket.
pub fn nondegenerate_fq() -> Vec<&'static str> {
    vec!["Q", "Q^2", "1+Q", "sqrt(Q)*(2+Q)"]
}

/// Forms admissible in the Hessian–Jacobian relation at generic states.
pub fn relation_forms() -> Vec<&'static str> {
    vec![
        "Q+P^2",
        "sqrt(1+Q)*(1+P^2)",
        "exp(P)*(1+Q)",
        "1+Q+P*Q+P^2/2",
        "(1+Q)^2+P^2*Q",
        "cosh(P)*Q",
    ]
}

impl Suite for DegeneracySuite {
    fn name(&self) -> &'static str {
        "degeneracy"
    }

    fn summary(&self) -> &'static str {
        "Hessian determinants, ranks and their relation to the Casimir map"
    }

    fn run(&self, cfg: &SuiteConfig) -> Vec<Report> {
        let mut out = Vec::new();
        let families = [
            ("rotator_f", Sign::Plus, 0.0),
            ("starlike", Sign::Plus, 0.0),
            ("nu_family", Sign::Plus, cfg.nu),
        ];
        for (spec, sign, nu) in families {
            let name = format!("degeneracy.singular.{spec}");
            let mut ranks = Vec::new();
            out.push(cfg.check(&name, 1.0, "states=10", |cfg| {
                let f = cfg.form(spec, Sign::Plus, sign, nu)?;
                let dof = DofSpec::for_form(&f);
                let mut rng = cfg.rng(&name);
                let mut worst: f64 = 0.0;
                for _ in 0..10 {
                    let h = hessian(&f, &random_state(&mut rng, &f, dof), dof)?;
                    worst = worst.max(h.det.abs() / h.det_threshold);
                    ranks.push(h.rank);
                }
                Ok((worst, json(serde_json::json!({ "dof": dof.count(), "ranks": ranks }))))
            }));
            if spec == "nu_family" {
                let rn = "degeneracy.rank.nu_family";
                let miss = if ranks.len() == 10 {
                    ranks.iter().filter(|&&r| r != 4).count() as f64
                } else {
                    f64::INFINITY
                };
                out.push(Report::new(rn, miss, cfg.tol(rn, 0.0), cfg.seed, "states=10").with_details(json(&ranks)));
            }
        }
        for src in nondegenerate_fq() {
            let name = format!("degeneracy.nonsingular.{src}");
            out.push(cfg.check(&name, 1.0, "states=10", |cfg| {
                let f = cfg.form(src, Sign::Plus, Sign::Plus, 0.0)?;
                let mut rng = cfg.rng(&name);
                let mut worst: f64 = 0.0;
                for _ in 0..10 {
                    let h = hessian(&f, &random_state(&mut rng, &f, DofSpec::Five), DofSpec::Five)?;
                    worst = worst.max(h.det_threshold / h.det.abs());
                }
                Ok((worst, serde_json::Value::Null))
            }));
        }
        out.push(cfg.check("degeneracy.relation", 1e-7, "states=10", |cfg| {
            let forms: Vec<Form> = relation_forms()
                .into_iter()
                .map(|s| cfg.form(s, Sign::Plus, Sign::Plus, 0.0))
                .collect::<Result<_>>()?;
            let mut rng = cfg.rng("degeneracy.relation");
            let sampler = StateSampler::default();
            let mut worst: f64 = 0.0;
            let mut min_admissible = usize::MAX;
            for _ in 0..10 {
                let target = rng.gen_range(0.3..3.0);
                let s = sampler.sample(&mut rng, DofSpec::Six, cfg.ell, Some(target));
                let r = relation_check(&forms, &s)?;
                worst = worst.max(r.max_deviation);
                min_admissible = min_admissible.min(r.admissible);
            }
            if min_admissible < 5 {
                return Err(Error::precondition(format!("only {min_admissible} admissible forms at some state")));
            }
            Ok((worst, json(serde_json::json!({ "min_admissible": min_admissible }))))
        }));
        out.push(cfg.check("degeneracy.fq_bracket", 1e-10, "Q grid=50", |_| {
            let mut worst: f64 = 0.0;
            for sign in [Sign::Plus, Sign::Minus] {
                let s = RotatorS(sign);
                let hi = if sign == Sign::Plus { 20.0 } else { 0.95 };
                for i in 1..=50 {
                    worst = worst.max(fq_bracket(&s, hi * i as f64 / 50.0)?.abs());
                }
            }
            Ok((worst, serde_json::Value::Null))
        }));
        out.push(cfg.check("degeneracy.fq_formula", 1e-7, "states=10", |cfg| {
            let fs: Vec<Arc<dyn ScalarFn>> = nondegenerate_fq()
                .into_iter()
                .map(|s| ExprFn::parse(s).map(|f| Arc::new(f) as Arc<dyn ScalarFn>))
                .collect::<Result<_>>()?;
            let mut rng = cfg.rng("degeneracy.fq_formula");
            let sampler = StateSampler::default();
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let target = rng.gen_range(0.1..0.9);
                let s = sampler.sample(&mut rng, DofSpec::Five, cfg.ell, Some(target));
                let mut ks = Vec::new();
                for f in &fs {
                    let r = fq_det_formula(f.clone(), &s, cfg.mass, cfg.ell)?;
                    match (r.direct_singular, r.kinematic_factor) {
                        (false, Some(k)) => ks.push(k),
                        _ => return Err(Error::precondition(format!("{} has a vanishing determinant", r.f))),
                    }
                }
                for sign in [Sign::Plus, Sign::Minus] {
                    let r = fq_det_formula(Arc::new(RotatorS(sign)), &s, cfg.mass, cfg.ell)?;
                    if !r.direct_singular || r.kinematic_factor.is_some() {
                        return Err(Error::precondition(format!("{} should be degenerate", r.f)));
                    }
                }
                for a in &ks {
                    for b in &ks {
                        worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
                    }
                }
            }
            Ok((worst, serde_json::Value::Null))
        }));
        out
    }
}

/// Phases sharing `φ(0) = 0`, `φ̇(0) = 1` with `0 < φ̇ < 2`.
pub fn demo_phases() -> Vec<Phase> {
    ["t", "t + 0.1*(t - sin(t))", "t + 0.2*sin(t)^2"]
        .iter()
        .map(|s| Phase::parse(s).expect("builtin phase parses"))
        .collect()
}

/// Initial data for the `f(Q) = Q` runs: nearly at rest with the pointer
/// rotating at `ω`. Returns the state and `ω`.
pub fn rotating_pointer_states() -> Vec<(ChartState, f64)> {
    [(PI / 2.0, 0.0, 1.0), (1.2, 0.1, 0.5)]
        .into_iter()
        .map(|(th, thd, w)| {
            let s = ChartState::new(0.0, vec![0.0, 0.0, 0.0, th, 0.0], vec![0.05, 0.0, 0.0, thd, w])
                .expect("five coordinates");
            (s, w)
        })
        .collect()
}

struct DynamicsSuite;

impl Suite for DynamicsSuite {
    fn name(&self) -> &'static str {
        "dynamics"
    }

    fn summary(&self) -> &'static str {
        "free rotator, indeterminism, integration of f(Q) = Q and the angular speed"
    }

    fn run(&self, cfg: &SuiteConfig) -> Vec<Report> {
        let mut out = Vec::new();
        let rot = cfg.form("rotator_f", Sign::Plus, Sign::Plus, 0.0);
        let demo = rot.clone().and_then(|rot| {
            let params = SolutionParams::rest_frame(cfg.mass, cfg.ell, Phase::parse("t")?);
            let phases = demo_phases();
            let long = indeterminacy_demo(&rot, &params, &phases, 20.0, 801)?;
            let short = indeterminacy_demo(&rot, &params, &phases, 5.0 * cfg.ell, 201)?;
            Ok((long, short))
        });
        let inputs = "phases=3 t=[0,20]";
        match &demo {
            Ok((long, short)) => {
                let t = |n: &str, d: f64| cfg.tol(n, d);
                out.push(Report::new("dynamics.free.residual", long.max_residual, t("dynamics.free.residual", 1e-8), cfg.seed, inputs).with_details(json(long)));
                out.push(Report::new("dynamics.free.charges", long.max_drift, t("dynamics.free.charges", 1e-9), cfg.seed, inputs));
                out.push(Report::new("dynamics.free.initial_state", short.initial_spread, t("dynamics.free.initial_state", 1e-12), cfg.seed, inputs));
                out.push(
                    Report::new("dynamics.free.divergence", 0.05 / short.divergence, t("dynamics.free.divergence", 1.0), cfg.seed, "t_end=5l")
                        .with_details(serde_json::json!({ "divergence": short.divergence })),
                );
            }
            Err(e) => {
                for n in ["residual", "charges", "initial_state", "divergence"] {
                    out.push(Report::error(format!("dynamics.free.{n}"), 0.0, cfg.seed, e));
                }
            }
        }
        out.push(cfg.check("dynamics.free.non_solution", 1.0, "f(Q)=Q on the free rotator", |cfg| {
            let f = cfg.form("Q", Sign::Plus, Sign::Plus, 0.0)?;
            let fm = FreeMotion::new(SolutionParams::rest_frame(cfg.mass, cfg.ell, Phase::parse("t")?), (0.0, 20.0))?;
            let r = el_residual_at(&f, &fm.point(1.3)?.chart(DofSpec::Five)?)?;
            Ok((1e-3 / r.relative(), json(&r)))
        }));
        out.push(cfg.check("dynamics.rotator_abort", 0.0, "rotator_f", |cfg| {
            let f = cfg.form("rotator_f", Sign::Plus, Sign::Plus, 0.0)?;
            let (s, _) = &rotating_pointer_states()[0];
            match integrate(&f, s, 1.0, &IntegrationOptions::default()) {
                Err(Error::SingularHessian { .. }) => Ok((0.0, serde_json::Value::Null)),
                other => Ok((1.0, json(format!("{:?}", other.map(|r| r.steps))))),
            }
        }));
        let runs: Vec<Result<crate::dynamics::Integration>> = rotating_pointer_states()
            .par_iter()
            .map(|(s, w)| {
                let f = cfg.form("Q", Sign::Plus, Sign::Plus, 0.0)?;
                integrate(&f, s, 10.0 * 2.0 * PI / w, &IntegrationOptions::default())
            })
            .collect();
        out.push(cfg.check("dynamics.integrate.conservation", 1e-6, "f(Q)=Q, 10 periods, 2 initial states", |_| {
            let mut worst: f64 = 0.0;
            let mut drifts = Vec::new();
            for r in &runs {
                let r = r.as_ref().map_err(Clone::clone)?;
                worst = worst.max(r.drift.pp).max(r.drift.ww);
                drifts.push(&r.drift);
            }
            Ok((worst, json(drifts)))
        }));
        out.push(cfg.check("dynamics.integrate.ww_dependence", 1.0, "f(Q)=Q, 2 initial states", |_| {
            let ww: Vec<f64> = runs
                .iter()
                .map(|r| r.as_ref().map(|r| r.samples[0].ww).map_err(Clone::clone))
                .collect::<Result<_>>()?;
            let rel = (ww[0] - ww[1]).abs() / ww[0].abs().max(ww[1].abs());
            Ok((0.1 / rel, json(serde_json::json!({ "ww": ww, "relative_difference": rel }))))
        }));
        out.push(cfg.check("dynamics.angular_speed", 1e-10, "rate in {0.2,0.5,1,1.5}", |cfg| {
            let f = cfg.form("rotator_f", Sign::Plus, Sign::Plus, 0.0)?;
            let mut worst: f64 = 0.0;
            for w in [0.2, 0.5, 1.0, 1.5] {
                let phase = Phase::parse(&format!("{w}*t"))?;
                let fm = FreeMotion::new(SolutionParams::rest_frame(cfg.mass, cfg.ell, phase), (0.0, 10.0))?;
                for t in [0.0, 2.5, 7.0] {
                    let j = fm.point(t)?.chart(DofSpec::Five)?;
                    let q = crate::chart::chart_pq(&f, &ChartState::new(j.lab_time, j.q.clone(), j.qdot.clone())?)?.q;
                    worst = worst.max((angular_speed(q, cfg.ell)? - j.qdot[4].abs()).abs());
                }
            }
            Ok((worst, serde_json::Value::Null))
        }));
        out
    }
}
