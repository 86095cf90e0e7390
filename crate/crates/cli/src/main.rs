mod config;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rotorlab::algebra::{FourVector, Lorentz};
use rotorlab::chart::{random_state, ChartState, DofSpec, StateSampler};
use rotorlab::degeneracy::{hessian, relation_check};
use rotorlab::dynamics::{
    indeterminacy_demo, integrate, integration_rows, write_csv, FreeMotion, IntegrationOptions, Phase,
    SolutionParams, TrajectoryRow,
};
use rotorlab::form::{Form, FormParams, FormRegistry, PQPoint, Sign};
use rotorlab::noether::{casimirs_closed_form, fundamental_residuals, momenta_at};
use rotorlab::report::{all_pass, to_json, Report};
use rotorlab::suite::{relation_forms, SuiteRegistry};

use config::{RunConfig, SEED_ENV};

#[derive(Parser, Debug)]
#[command(name = "rotorlab", version, about = "Checks and simulations for relativistic rotators")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// key=value configuration file (mass, ell, nu, seed, report, tol.<check>)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    #[arg(long, global = true)]
    ell: Option<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Defaults to $ROTORLAB_SEED, then 7
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override, `<check>=<value>`; repeatable
    #[arg(long = "tol", global = true, value_name = "CHECK=VALUE")]
    tol: Vec<String>,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct FormArgs {
    /// Registered form name or an expression in P, Q and nu
    #[arg(long = "f")]
    f: Option<String>,
    /// Sign in front of the square root (starlike, nu_family)
    #[arg(long, default_value = "+")]
    outer: Sign,
    /// Sign in front of sqrt(Q)
    #[arg(long, default_value = "+")]
    inner: Sign,
    /// S(Q) for sqrtS
    #[arg(long = "s-expr")]
    s_expr: Option<String>,
    /// f(Q) for fq
    #[arg(long = "f-expr")]
    f_expr: Option<String>,
}

impl FormArgs {
    fn build(&self, cfg: &RunConfig, default: &str) -> Result<Form> {
        let spec = self.f.as_deref().unwrap_or(default);
        build_form(spec, self, cfg)
    }
}

fn build_form(spec: &str, a: &FormArgs, cfg: &RunConfig) -> Result<Form> {
    let params = FormParams {
        nu: cfg.nu,
        outer: a.outer,
        inner: a.inner,
        s: a.s_expr.clone(),
        f: a.f_expr.clone(),
    };
    let kernel = FormRegistry::builtin()
        .build(spec, &params)
        .with_context(|| format!("building form `{spec}`"))?;
    Ok(Form::new(kernel, cfg.mass, cfg.ell)?)
}

#[derive(Args, Debug)]
struct StateArgs {
    /// `random` draws a state from the seed; `given` uses --q and --qdot
    #[arg(long, default_value = "random")]
    state: String,
    /// Comma-separated coordinates x1,x2,x3,theta,phi[,K]
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    qdot: Option<String>,
    /// 5 or 6; defaults to the form's natural count
    #[arg(long)]
    dof: Option<usize>,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("`{c}` is not a number")))
        .collect()
}

impl StateArgs {
    fn dof(&self, form: &Form) -> Result<DofSpec> {
        Ok(match self.dof {
            Some(n) => DofSpec::from_count(n)?,
            None => DofSpec::for_form(form),
        })
    }

    fn resolve(&self, form: &Form, dof: DofSpec, seed: u64) -> Result<ChartState> {
        match self.state.as_str() {
            "random" => Ok(random_state(&mut ChaCha8Rng::seed_from_u64(seed), form, dof)),
            "given" => {
                let (Some(q), Some(qd)) = (&self.q, &self.qdot) else {
                    bail!("--state given needs --q and --qdot");
                };
                Ok(ChartState::new(0.0, parse_list(q)?, parse_list(qd)?)?.with_dof(dof))
            }
            other => bail!("unknown state `{other}` (use random or given)"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run named verification suites
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Casimirs of one form at one (P, Q), cross-checked against Noether charges
    Casimir {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long = "P", default_value_t = 0.0)]
        p: f64,
        #[arg(long = "Q")]
        q: f64,
    },
    /// Whether a form satisfies PP = M², WW = −¼M⁴ℓ² over its domain grid
    FundamentalCheck {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Velocity Hessian in the lab-time chart
    Hessian {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        state: StateArgs,
        /// Fail unless the rank equals this
        #[arg(long)]
        expect_rank: Option<usize>,
    },
    /// Kinematical factor of the Hessian–Jacobian relation across forms
    Relation {
        /// Forms to compare; repeatable
        #[arg(long = "f")]
        forms: Vec<String>,
        #[arg(long, default_value_t = 10)]
        states: usize,
    },
    /// Integrate a nondegenerate form from rotating-pointer initial data
    Simulate {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 10.0)]
        periods: f64,
        /// Initial pointer angular velocity
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = PI / 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        theta_dot: f64,
        /// Initial speed along x
        #[arg(long, default_value_t = 0.05)]
        speed: f64,
        #[arg(long, default_value_t = 0.05)]
        sample_every: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free rotator for one or more phase functions φ(t)
    Freemotion {
        /// Phase expression in t; repeatable
        #[arg(long = "phase")]
        phases: Vec<String>,
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        /// Boost velocity vx,vy,vz applied to all constant vectors
        #[arg(long)]
        boost: Option<String>,
        /// CSV for the first phase; further phases get `.1`, `.2`, … inserted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the count of gauge-invariant scalars
    CountInvariants,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_env(std::env::var(SEED_ENV).ok())?;
    if let Some(p) = &g.config {
        cfg.apply_file(p)?;
    }
    if let Some(v) = g.mass {
        cfg.mass = v;
    }
    if let Some(v) = g.ell {
        cfg.ell = v;
    }
    if let Some(v) = g.nu {
        cfg.nu = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(p) = &g.report {
        cfg.report = Some(p.clone());
    }
    for t in &g.tol {
        let Some((k, v)) = t.split_once('=') else {
            bail!("--tol expects CHECK=VALUE, got `{t}`");
        };
        cfg.set(&format!("tol.{k}"), v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = load_config(&cli.global)?;
    let reports = dispatch(cli.cmd, &cfg)?;
    for r in &reports {
        eprintln!("{}", r.line());
    }
    let doc = to_json(&reports) + "\n";
    match &cfg.report {
        Some(p) => std::fs::write(p, doc).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{doc}"),
    }
    Ok(all_pass(&reports))
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Vec<Report>> {
    match cmd {
        Command::Verify { suite } => Ok(SuiteRegistry::builtin().run(&suite, &cfg.suite())?),
        Command::CountInvariants => Ok(SuiteRegistry::builtin().run("count-invariants", &cfg.suite())?),
        Command::Casimir { form, p, q } => casimir(cfg, &form, p, q),
        Command::FundamentalCheck { form, grid } => {
            let f = form.build(cfg, "rotator_f")?;
            let r = fundamental_residuals(&f, &f.kernel().domain().grid(grid))?;
            let name = format!("fundamental.{}", f.name());
            let tol = cfg.tol(&name, 1e-10);
            Ok(vec![Report::new(&name, r.max_residual(), tol, cfg.seed, format!("grid={grid}x{grid}")).with_details(r)])
        }
        Command::Hessian { form, state, expect_rank } => {
            let f = form.build(cfg, "rotator_f")?;
            let dof = state.dof(&f)?;
            let s = state.resolve(&f, dof, cfg.seed)?;
            let h = hessian(&f, &s, dof)?;
            let name = format!("hessian.{}", f.name());
            let (residual, tol) = match expect_rank {
                Some(r) => ((h.rank as f64 - r as f64).abs(), cfg.tol(&name, 0.0)),
                None => (h.symmetry_defect, cfg.tol(&name, 1e-12)),
            };
            let inputs = format!("state={} dof={}", state.state, dof.count());
            Ok(vec![Report::new(&name, residual, tol, cfg.seed, inputs).with_details(serde_json::json!({
                "state": s,
                "hessian": h,
            }))])
        }
        Command::Relation { forms, states } => {
            let specs: Vec<String> = if forms.is_empty() {
                relation_forms().into_iter().map(String::from).collect()
            } else {
                forms
            };
            let args = FormArgs {
                f: None,
                outer: Sign::Plus,
                inner: Sign::Plus,
                s_expr: None,
                f_expr: None,
            };
            let fs: Vec<Form> = specs.iter().map(|s| build_form(s, &args, cfg)).collect::<Result<_>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut worst: f64 = 0.0;
            let mut details = Vec::new();
            for _ in 0..states {
                let target = rand::Rng::gen_range(&mut rng, 0.3..3.0);
                let s = StateSampler::default().sample(&mut rng, DofSpec::Six, cfg.ell, Some(target));
                let r = relation_check(&fs, &s)?;
                if r.admissible < 2 {
                    bail!("fewer than two admissible forms at {:?}", r.pq);
                }
                worst = worst.max(r.max_deviation);
                details.push(r);
            }
            let tol = cfg.tol("relation", 1e-7);
            Ok(vec![Report::new("relation", worst, tol, cfg.seed, format!("forms={} states={states}", fs.len()))
                .with_details(details)])
        }
        Command::Simulate {
            form,
            periods,
            omega,
            theta,
            theta_dot,
            speed,
            sample_every,
            out,
        } => {
            let f = form.build(cfg, "Q")?;
            if omega == 0.0 {
                bail!("--omega must be nonzero");
            }
            let mut q = vec![0.0, 0.0, 0.0, theta, 0.0];
            let mut qd = vec![speed, 0.0, 0.0, theta_dot, omega];
            if DofSpec::for_form(&f) == DofSpec::Six {
                q.push(1.0);
                qd.push(0.0);
            }
            let s = ChartState::new(0.0, q, qd)?;
            let opts = IntegrationOptions {
                sample_every,
                ..Default::default()
            };
            let run = integrate(&f, &s, periods * 2.0 * PI / omega.abs(), &opts)?;
            if let Some(path) = &out {
                write_csv(path, &integration_rows(&f, &run)?)?;
            }
            let name = format!("simulate.{}.conservation", f.name());
            let tol = cfg.tol(&name, 1e-6);
            let first = &run.samples[0];
            Ok(vec![Report::new(&name, run.drift.pp.max(run.drift.ww), tol, cfg.seed, format!("periods={periods} omega={omega}"))
                .with_details(serde_json::json!({
                    "drift": run.drift,
                    "PP": first.pp,
                    "WW": first.ww,
                    "steps": run.steps,
                    "rejected": run.rejected,
                    "decoupled": run.decoupled,
                }))])
        }
        Command::Freemotion {
            phases,
            tmax,
            samples,
            boost,
            out,
        } => freemotion(cfg, phases, tmax, samples, boost, out),
    }
}

fn casimir(cfg: &RunConfig, form: &FormArgs, p: f64, q: f64) -> Result<Vec<Report>> {
    let f = form.build(cfg, "rotator_f")?;
    if !(q > 0.0) {
        bail!("--Q must be positive");
    }
    let at = PQPoint { p, q };
    let jet = f.jet(p, q)?;
    let c = casimirs_closed_form(&f, at)?;
    // rest frame, k = (1, 0, 0, 1); k̇ chosen to realise (P, Q)
    let l = cfg.ell;
    let kdot = FourVector::new(p / l, q.sqrt() / l, 0.0, p / l);
    let m = momenta_at(
        &f,
        &FourVector::zero(),
        &FourVector::new(1.0, 0.0, 0.0, 0.0),
        &FourVector::new(1.0, 0.0, 0.0, 1.0),
        &kdot,
    )?;
    let m2 = cfg.mass * cfg.mass;
    let w2 = m2 * m2 * l * l;
    let residual = ((m.pp() - c.pp).abs() / c.pp.abs().max(m2)).max((m.ww() - c.ww).abs() / c.ww.abs().max(w2));
    let fund = fundamental_residuals(&f, &[at])?;
    let name = format!("casimir.{}", f.name());
    let tol = cfg.tol(&name, 1e-9);
    Ok(vec![Report::new(&name, residual, tol, cfg.seed, format!("P={p} Q={q}")).with_details(serde_json::json!({
        "F": jet.f,
        "F_P": jet.fa,
        "F_Q": jet.fb,
        "F_PP": jet.faa,
        "F_PQ": jet.fab,
        "F_QQ": jet.fbb,
        "PP": c.pp,
        "WW": c.ww,
        "noether_PP": m.pp(),
        "noether_WW": m.ww(),
        "fundamental_pp_residual": fund.pp_residual,
        "fundamental_ww_residual": fund.ww_residual,
    }))])
}

fn indexed(path: &std::path::Path, i: usize) -> PathBuf {
    if i == 0 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{i}"),
    };
    path.with_file_name(name)
}

fn freemotion(
    cfg: &RunConfig,
    phases: Vec<String>,
    tmax: f64,
    samples: usize,
    boost: Option<String>,
    out: Option<PathBuf>,
) -> Result<Vec<Report>> {
    let srcs = if phases.is_empty() { vec!["t".to_string()] } else { phases };
    let phases: Vec<Phase> = srcs.iter().map(|s| Phase::parse(s)).collect::<rotorlab::Result<_>>()?;
    let form = Form::named("rotator_f", &FormParams::default())?.with_scales(cfg.mass, cfg.ell)?;
    let mut params = SolutionParams::rest_frame(cfg.mass, cfg.ell, phases[0].clone());
    if let Some(b) = &boost {
        let v = parse_list(b)?;
        let [vx, vy, vz] = v[..] else { bail!("--boost needs three components") };
        params = params.transformed(&Lorentz::new([vx, vy, vz], [0.0; 3])?);
    }
    let demo = indeterminacy_demo(&form, &params, &phases, tmax, samples.max(2))?;
    if let Some(path) = &out {
        let ts: Vec<f64> = (0..samples.max(2)).map(|i| tmax * i as f64 / (samples.max(2) - 1) as f64).collect();
        for (i, ph) in phases.iter().enumerate() {
            let fm = FreeMotion::new(SolutionParams { phase: ph.clone(), ..params.clone() }, (0.0, tmax))?;
            write_csv(&indexed(path, i), &TrajectoryRow::sample(&form, &fm, &ts)?)?;
        }
    }
    let inputs = format!("phases={} tmax={tmax}", phases.len());
    let mut reports = vec![
        Report::new("freemotion.residual", demo.max_residual, cfg.tol("freemotion.residual", 1e-8), cfg.seed, &inputs)
            .with_details(&demo),
        Report::new("freemotion.charges", demo.max_drift, cfg.tol("freemotion.charges", 1e-9), cfg.seed, &inputs),
    ];
    if phases.len() > 1 {
        reports.push(
            Report::new("freemotion.initial_state", demo.initial_spread, cfg.tol("freemotion.initial_state", 1e-12), cfg.seed, &inputs)
                .with_details(serde_json::json!({ "divergence": demo.divergence })),
        );
    }
    Ok(reports)
}
