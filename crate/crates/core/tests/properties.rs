use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rotorlab::algebra::{gram_det, Lorentz};
use rotorlab::dynamics::{angular_speed, FreeMotion, Phase, SolutionParams, Trajectory};
use rotorlab::form::{finite_difference_jet, lagrangian_density, pq_from_jet, Form, FormParams, Sign};
use rotorlab::invariants::{
    basic_scalars, gauge_jet_transform, gauge_table, identity_checks, iota, phase_jet_transform, random_jet,
    reproduce_invariant_count, CountingConfig, GaugeJet, KinematicJet,
};
use rotorlab::noether::{casimirs_closed_form, momenta};
use rotorlab::spinor::{tetrad, Complex, Spinor};

fn jet(seed: u64) -> KinematicJet {
    random_jet(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn coeff() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn spinor() -> impl Strategy<Value = Spinor> {
    (coeff(), coeff(), coeff(), coeff())
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-2)
        .prop_map(|(a, b, c, d)| Spinor::new(Complex::new(a, b), Complex::new(c, d)))
}

fn gauge_jet() -> impl Strategy<Value = GaugeJet> {
    (coeff(), coeff(), coeff(), coeff()).prop_map(|(alpha, beta, alpha_dot, beta_dot)| GaugeJet {
        alpha,
        beta,
        alpha_dot,
        beta_dot,
    })
}

fn builtin(name: &'static str, inner: Sign) -> Form {
    Form::named(
        name,
        &FormParams {
            nu: 0.5,
            inner,
            ..Default::default()
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tetrad_is_null_and_normalised(s in spinor()) {
        let t = tetrad(&s).unwrap();
        prop_assert!(t.relation_defect() <= 1e-12 * t.scale().max(1.0));
        prop_assert!((gram_det(&t.k, &t.m, &t.a, &t.b) + 4.0).abs() <= 1e-10);
    }

    #[test]
    fn iota_survive_gauge_and_phase(seed in any::<u64>(), g in gauge_jet(), d in coeff(), dd in coeff()) {
        let j = jet(seed);
        let base = iota(&j);
        let moved = iota(&gauge_jet_transform(&j, &g));
        let turned = iota(&phase_jet_transform(&j, d, dd));
        for n in 0..6 {
            prop_assert!(rel(base[n], moved[n]) <= 1e-10);
        }
        let (c, s) = (d.cos(), d.sin());
        prop_assert!(rel(base[0] * c - base[1] * s, turned[0]) <= 1e-10);
        prop_assert!(rel(base[0] * s + base[1] * c, turned[1]) <= 1e-10);
        for n in 2..5 {
            prop_assert!(rel(base[n], turned[n]) <= 1e-10);
        }
        // a' = a cosΔ − b sinΔ with aa = −1 makes a'ḃ' = aḃ − Δ̇
        prop_assert!(rel(base[5] - base[2] * dd, turned[5]) <= 1e-10);
    }

    #[test]
    fn gauge_table_matches_transformed_jet(seed in any::<u64>(), g in gauge_jet()) {
        let j = jet(seed);
        let want = basic_scalars(&gauge_jet_transform(&j, &g)).to_array();
        let got = gauge_table(&basic_scalars(&j), &g).to_array();
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for n in 0..10 {
            prop_assert!((want[n] - got[n]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn iota_are_lorentz_scalars(seed in any::<u64>(), v in prop::array::uniform3(-0.6..0.6f64), r in prop::array::uniform3(coeff())) {
        let j = jet(seed);
        let l = Lorentz::new(v, r).unwrap();
        let moved = KinematicJet {
            xdot: l.apply(&j.xdot), k: l.apply(&j.k), kdot: l.apply(&j.kdot),
            m: l.apply(&j.m), mdot: l.apply(&j.mdot), a: l.apply(&j.a),
            adot: l.apply(&j.adot), b: l.apply(&j.b), bdot: l.apply(&j.bdot),
        };
        let (p, q) = (iota(&j), iota(&moved));
        let scale = j.scale().powi(3).max(1.0);
        for n in 0..6 {
            prop_assert!((p[n] - q[n]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn scalar_identities_hold(seed in any::<u64>()) {
        let r = identity_checks(&jet(seed), false).unwrap();
        prop_assert!(r.max_residual() <= 1e-10 * r.scale);
    }

    #[test]
    fn coded_partials_match_differences(p in -0.9..0.9f64, q in 0.05..0.9f64, idx in 0usize..4) {
        let (name, inner) = [("rotator_f", Sign::Plus), ("rotator_f", Sign::Minus), ("starlike", Sign::Plus), ("nu_family", Sign::Minus)][idx];
        let f = builtin(name, inner);
        let dom = f.kernel().domain();
        prop_assume!(p >= dom.p.0 && p <= dom.p.1 && q >= dom.q.0 && q <= dom.q.1);
        let exact = f.jet(p, q).unwrap();
        let fd = finite_difference_jet(&f, p, q).unwrap();
        for (a, b) in [(exact.fa, fd.fa), (exact.fb, fd.fb), (exact.faa, fd.faa), (exact.fab, fd.fab), (exact.fbb, fd.fbb)] {
            prop_assert!(rel(a, b) <= 1e-6, "{name}: {a} vs {b}");
        }
    }

    #[test]
    fn lagrangian_gauge_invariant_and_homogeneous(seed in any::<u64>(), g in gauge_jet(), s in 0.2..5.0f64) {
        let j = jet(seed);
        let f = builtin("nu_family", Sign::Plus);
        let Ok(l0) = lagrangian_density(&f, &j) else { return Ok(()) };
        let l1 = lagrangian_density(&f, &gauge_jet_transform(&j, &g)).unwrap();
        prop_assert!(rel(l0, l1) <= 1e-10);
        // L dτ is parameter independent, so L scales like d/dτ
        let ls = lagrangian_density(&f, &j.reparametrize(s)).unwrap();
        prop_assert!(rel(ls, s * l0) <= 1e-10, "{ls} vs {}", s * l0);
    }

    #[test]
    fn noether_charges_match_closed_form(seed in any::<u64>(), idx in 0usize..3) {
        let f = builtin(["rotator_f", "starlike", "nu_family"][idx], Sign::Plus);
        let j = jet(seed);
        let Ok(pq) = pq_from_jet(&j, f.ell) else { return Ok(()) };
        let dom = f.kernel().domain();
        prop_assume!(pq.p > dom.p.0 && pq.p < dom.p.1 && pq.q > dom.q.0 && pq.q < dom.q.1);
        let m = momenta(&f, &j).unwrap();
        let c = casimirs_closed_form(&f, pq).unwrap();
        prop_assert!(rel(m.pp(), c.pp) <= 1e-9);
        prop_assert!(rel(m.ww(), c.ww) <= 1e-9);
        prop_assert!(m.w.dot(&m.p).abs() <= 1e-10 * (m.w.max_abs() * m.p.max_abs()).max(1.0));
    }

    #[test]
    fn angular_speed_is_increasing_and_bounded(q in 1e-6..1e6f64, dq in 1e-3..10.0f64, ell in 0.1..10.0f64) {
        let a = angular_speed(q, ell).unwrap();
        let b = angular_speed(q + dq, ell).unwrap();
        prop_assert!(a > 0.0 && a < b && b < 2.0 / ell);
    }

    #[test]
    fn free_motion_pointer_stays_null(c in 0.0..0.3f64, t in 0.0..20.0f64, v in prop::array::uniform3(-0.5..0.5f64)) {
        let phase = Phase::parse(&format!("t + {c}*(t - sin(t))")).unwrap();
        let params = SolutionParams::rest_frame(1.0, 1.0, phase).transformed(&Lorentz::new(v, [0.0; 3]).unwrap());
        let fm = FreeMotion::new(params, (0.0, 20.0)).unwrap();
        let k = fm.point(t).unwrap().k[0];
        prop_assert!(k.norm_sqr().abs() <= 1e-10 * k.max_abs().powi(2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counting_ignores_labels(seed in any::<u64>(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let cfg = CountingConfig { seed, labels: perm.try_into().unwrap(), samples: 16, ..Default::default() };
        let r = reproduce_invariant_count(&cfg).unwrap();
        prop_assert_eq!((r.rank, r.nullity, r.zero_combinations, r.functional_rank), (5, 10, 2, 3));
    }
}
