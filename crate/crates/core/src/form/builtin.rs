use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ad::{HyperDual, Jet2, Real};
use crate::error::{Error, Result};

use super::expr::{Bindings, Expr, Var};
use super::{DomainBox, FormKernel};

/// Branch sign of a square root.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(Error::Config(format!("`{other}` is not a sign (use + or -)"))),
        }
    }
}

/// A function of one variable with two derivatives, used for `S(Q)` and
/// `f(Q)`.
pub trait ScalarFn: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// `[f, f′, f″]` at `q`.
    fn eval3(&self, q: f64) -> Result<[f64; 3]>;
}

/// `√(1 ± √Q)`, with analytic derivatives.
#[derive(Clone, Copy, Debug)]
pub struct RotatorS(pub Sign);

impl ScalarFn for RotatorS {
    fn name(&self) -> String {
        format!("sqrt(1{}sqrt(Q))", self.0.symbol())
    }

    fn eval3(&self, q: f64) -> Result<[f64; 3]> {
        let s = self.0.value();
        let r = q.sqrt();
        let g = 1.0 + s * r;
        if !(q > 0.0) || !(g > 0.0) {
            return Err(Error::domain(format!("{} undefined at Q = {q}", self.name())));
        }
        let f = g.sqrt();
        let f1 = s / (4.0 * r * f);
        let f2 = -s / (8.0 * q * r * f) - 1.0 / (16.0 * q * f * g);
        Ok([f, f1, f2])
    }
}

/// A one-variable function of `Q` given as an expression.
#[derive(Clone, Debug)]
pub struct ExprFn {
    expr: Expr,
}

impl ExprFn {
    pub fn parse(src: &str) -> Result<ExprFn> {
        let expr = Expr::parse(src)?;
        expr.require_only(&[Var::Q])?;
        Ok(ExprFn { expr })
    }
}

impl ScalarFn for ExprFn {
    fn name(&self) -> String {
        self.expr.source().to_string()
    }

    fn eval3(&self, q: f64) -> Result<[f64; 3]> {
        let out = self.expr.eval(&Bindings {
            q: Some(HyperDual::var2(q)),
            ..Default::default()
        })?;
        Ok([out.re, out.e1, out.e12])
    }
}

fn rotator_domain(inner: Sign) -> (f64, f64) {
    match inner {
        Sign::Plus => (0.05, 20.0),
        Sign::Minus => (0.01, 0.95),
    }
}

/// `F ≡ 1`.
#[derive(Clone, Copy, Debug)]
pub struct PointParticle;

impl FormKernel for PointParticle {
    fn name(&self) -> String {
        "point_particle".into()
    }

    fn jet(&self, _p: f64, _q: f64) -> Result<Jet2> {
        Ok(Jet2::constant(1.0))
    }

    fn domain(&self) -> DomainBox {
        DomainBox::new((-2.0, 2.0), (0.0, 20.0), "all (P, Q)")
    }

    fn natural_dof(&self) -> usize {
        5
    }
}

/// `F = √(1 ± √Q)`, the fundamental relativistic rotator for the `+` sign.
#[derive(Clone, Copy, Debug)]
pub struct Rotator {
    pub inner: Sign,
}

impl FormKernel for Rotator {
    fn name(&self) -> String {
        match self.inner {
            Sign::Plus => "rotator_f".into(),
            Sign::Minus => "rotator_f(-)".into(),
        }
    }

    fn jet(&self, _p: f64, q: f64) -> Result<Jet2> {
        let [f, f1, f2] = RotatorS(self.inner).eval3(q)?;
        Ok(Jet2 {
            f,
            fb: f1,
            fbb: f2,
            ..Default::default()
        })
    }

    fn domain(&self) -> DomainBox {
        let desc = match self.inner {
            Sign::Plus => "Q > 0",
            Sign::Minus => "0 < Q < 1",
        };
        DomainBox::new((-2.0, 2.0), rotator_domain(self.inner), desc)
    }

    fn natural_dof(&self) -> usize {
        5
    }
}

fn sqrt_q_jet(q: f64) -> Jet2 {
    Jet2::var_b(q).sqrt()
}

/// `F = ±√((1 ± √Q)(1 + P²/Q))`.
#[derive(Clone, Copy, Debug)]
pub struct Starlike {
    pub outer: Sign,
    pub inner: Sign,
}

impl FormKernel for Starlike {
    fn name(&self) -> String {
        format!("starlike({},{})", self.outer.symbol(), self.inner.symbol())
    }

    fn jet(&self, p: f64, q: f64) -> Result<Jet2> {
        let h = sqrt_q_jet(q) * self.inner.value() + 1.0;
        if !(q > 0.0) || !(h.f > 0.0) {
            return Err(Error::domain(format!("{} undefined at Q = {q}", self.name())));
        }
        let pj = Jet2::var_a(p);
        let ratio = pj * pj * Jet2::var_b(q).recip() + 1.0;
        Ok((h * ratio).sqrt().scale(self.outer.value()))
    }

    fn domain(&self) -> DomainBox {
        let desc = match self.inner {
            Sign::Plus => "Q > 0",
            Sign::Minus => "0 < Q < 1",
        };
        DomainBox::new((-2.0, 2.0), rotator_domain(self.inner), desc)
    }
}

/// `F = νP ± √(1 ± √Q − ν²Q)`.
#[derive(Clone, Copy, Debug)]
pub struct NuFamily {
    pub nu: f64,
    pub outer: Sign,
    pub inner: Sign,
}

impl NuFamily {
    /// Largest `Q` with a real square root.
    pub fn q_max(&self) -> f64 {
        let s = self.inner.value();
        let n2 = self.nu * self.nu;
        if n2 == 0.0 {
            return if s > 0.0 { f64::INFINITY } else { 1.0 };
        }
        // positive root of ν²x² − s x − 1 = 0 with x = √Q
        let x = (s + (1.0 + 4.0 * n2).sqrt()) / (2.0 * n2);
        x * x
    }
}

impl FormKernel for NuFamily {
    fn name(&self) -> String {
        format!("nu_family(nu={},{},{})", self.nu, self.outer.symbol(), self.inner.symbol())
    }

    fn jet(&self, p: f64, q: f64) -> Result<Jet2> {
        let g = sqrt_q_jet(q) * self.inner.value() + 1.0 - Jet2::var_b(q) * (self.nu * self.nu);
        if !(q > 0.0) || !(g.f > 0.0) {
            return Err(Error::domain(format!("{} undefined at Q = {q}", self.name())));
        }
        Ok(Jet2::var_a(p) * self.nu + g.sqrt().scale(self.outer.value()))
    }

    fn domain(&self) -> DomainBox {
        let (lo, hi) = rotator_domain(self.inner);
        let hi = hi.min(0.95 * self.q_max());
        DomainBox::new((-2.0, 2.0), (lo.min(0.05 * hi), hi), "Q > 0 and 1 ± √Q − ν²Q > 0")
    }

    fn linear_p_coefficient(&self) -> f64 {
        self.nu
    }

    fn natural_dof(&self) -> usize {
        5
    }
}

/// `F = √(1 + P²/Q)·S(Q)`.
#[derive(Clone, Debug)]
pub struct SqrtS {
    pub s: Arc<dyn ScalarFn>,
}

impl FormKernel for SqrtS {
    fn name(&self) -> String {
        format!("sqrtS[{}]", self.s.name())
    }

    fn jet(&self, p: f64, q: f64) -> Result<Jet2> {
        if !(q > 0.0) {
            return Err(Error::domain(format!("{} needs Q > 0, got {q}", self.name())));
        }
        let [s0, s1, s2] = self.s.eval3(q)?;
        let sj = Jet2 {
            f: s0,
            fb: s1,
            fbb: s2,
            ..Default::default()
        };
        let pj = Jet2::var_a(p);
        Ok((pj * pj * Jet2::var_b(q).recip() + 1.0).sqrt() * sj)
    }

    fn domain(&self) -> DomainBox {
        DomainBox::new((-2.0, 2.0), (0.05, 4.0), "Q > 0 and S defined")
    }
}

/// `F = f(Q)`.
#[derive(Clone, Debug)]
pub struct FofQ {
    pub f: Arc<dyn ScalarFn>,
}

impl FormKernel for FofQ {
    fn name(&self) -> String {
        format!("fq[{}]", self.f.name())
    }

    fn jet(&self, _p: f64, q: f64) -> Result<Jet2> {
        let [f0, f1, f2] = self.f.eval3(q)?;
        Ok(Jet2 {
            f: f0,
            fb: f1,
            fbb: f2,
            ..Default::default()
        })
    }

    fn domain(&self) -> DomainBox {
        DomainBox::new((-2.0, 2.0), (0.05, 4.0), "f defined")
    }

    fn natural_dof(&self) -> usize {
        5
    }
}

/// A user-supplied `F(P, Q)`; `nu` in the expression is bound to a fixed
/// parameter.
#[derive(Clone, Debug)]
pub struct Parsed {
    expr: Expr,
    nu: f64,
}

impl Parsed {
    pub fn new(src: &str, nu: f64) -> Result<Parsed> {
        let expr = Expr::parse(src)?;
        expr.require_only(&[Var::P, Var::Q, Var::Nu])?;
        Ok(Parsed { expr, nu })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl FormKernel for Parsed {
    fn name(&self) -> String {
        self.expr.source().to_string()
    }

    fn jet(&self, p: f64, q: f64) -> Result<Jet2> {
        let nu = Some(HyperDual::cst(self.nu));
        let at = |pe: [f64; 2], qe: [f64; 2]| {
            self.expr.eval(&Bindings {
                p: Some(HyperDual::new(p, pe[0], pe[1], 0.0)),
                q: Some(HyperDual::new(q, qe[0], qe[1], 0.0)),
                t: None,
                nu,
            })
        };
        let aa = at([1.0, 1.0], [0.0, 0.0])?;
        let ab = at([1.0, 0.0], [0.0, 1.0])?;
        let bb = at([0.0, 0.0], [1.0, 1.0])?;
        let jet = Jet2 {
            f: aa.re,
            fa: aa.e1,
            fb: bb.e1,
            faa: aa.e12,
            fab: ab.e12,
            fbb: bb.e12,
        };
        if !jet.is_finite() {
            return Err(Error::domain(format!(
                "`{}` has no finite second derivatives at (P, Q) = ({p}, {q})",
                self.name()
            )));
        }
        Ok(jet)
    }

    fn domain(&self) -> DomainBox {
        DomainBox::new((-1.0, 1.0), (0.1, 4.0), "where the expression evaluates")
    }

    fn natural_dof(&self) -> usize {
        if self.expr.variables().contains(&Var::P) {
            6
        } else {
            5
        }
    }
}

/// Parameters a builder may consult.
#[derive(Clone, Debug, Default)]
pub struct FormParams {
    pub nu: f64,
    pub outer: Sign,
    pub inner: Sign,
    /// `S(Q)` for `sqrtS`.
    pub s: Option<String>,
    /// `f(Q)` for `fq`.
    pub f: Option<String>,
}

pub type FormBuilder = fn(&FormParams) -> Result<Arc<dyn FormKernel>>;

struct Entry {
    builder: FormBuilder,
    summary: &'static str,
}

/// Named form constructors. Names not found here are parsed as expressions.
pub struct FormRegistry {
    entries: BTreeMap<&'static str, Entry>,
    aliases: BTreeMap<&'static str, &'static str>,
}

impl FormRegistry {
    pub fn empty() -> Self {
        FormRegistry {
            entries: BTreeMap::new(),
            aliases: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = FormRegistry::empty();
        r.register("point_particle", "F = 1", |_| Ok(Arc::new(PointParticle)));
        r.register("rotator_f", "F = sqrt(1 ± sqrt(Q)), sign from `inner`", |p| {
            Ok(Arc::new(Rotator { inner: p.inner }))
        });
        r.register("starlike", "F = ±sqrt((1 ± sqrt(Q))(1 + P²/Q))", |p| {
            Ok(Arc::new(Starlike {
                outer: p.outer,
                inner: p.inner,
            }))
        });
        r.register("nu_family", "F = νP ± sqrt(1 ± sqrt(Q) − ν²Q)", |p| {
            if !p.nu.is_finite() {
                return Err(Error::Config("nu must be finite".into()));
            }
            Ok(Arc::new(NuFamily {
                nu: p.nu,
                outer: p.outer,
                inner: p.inner,
            }))
        });
        r.register("sqrtS", "F = sqrt(1 + P²/Q)·S(Q), S from `s` (default the rotator)", |p| {
            let s: Arc<dyn ScalarFn> = match &p.s {
                Some(src) => Arc::new(ExprFn::parse(src)?),
                None => Arc::new(RotatorS(Sign::Plus)),
            };
            Ok(Arc::new(SqrtS { s }))
        });
        r.register("fq", "F = f(Q), f from `f` (default Q)", |p| {
            let f = ExprFn::parse(p.f.as_deref().unwrap_or("Q"))?;
            Ok(Arc::new(FofQ { f: Arc::new(f) }))
        });
        r.alias("rotator", "rotator_f");
        r.alias("point", "point_particle");
        r
    }

    pub fn register(&mut self, name: &'static str, summary: &'static str, builder: FormBuilder) {
        self.entries.insert(name, Entry { builder, summary });
    }

    pub fn alias(&mut self, alias: &'static str, target: &'static str) {
        self.aliases.insert(alias, target);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn summaries(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|(k, e)| (*k, e.summary)).collect()
    }

    fn resolve<'a>(&self, name: &'a str) -> Option<&Entry> {
        let name = self.aliases.get(name).copied().unwrap_or(name);
        self.entries.get(name)
    }

    /// Builds a registered form by name.
    pub fn get(&self, name: &str, params: &FormParams) -> Result<Arc<dyn FormKernel>> {
        match self.resolve(name) {
            Some(e) => (e.builder)(params),
            None => Err(Error::Unknown {
                kind: "form",
                name: name.to_string(),
            }),
        }
    }

    /// A registered name, or else an expression in `P`, `Q`, `nu`.
    pub fn build(&self, spec: &str, params: &FormParams) -> Result<Arc<dyn FormKernel>> {
        match self.resolve(spec.trim()) {
            Some(e) => (e.builder)(params),
            None => Ok(Arc::new(Parsed::new(spec, params.nu)?)),
        }
    }
}

impl Default for FormRegistry {
    fn default() -> Self {
        FormRegistry::builtin()
    }
}
