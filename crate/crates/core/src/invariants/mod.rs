//! Lorentz scalars of a spinor tetrad interacting with its worldline.
//!
//! A [`KinematicJet`] holds the worldline velocity together with a tetrad and
//! its parameter derivatives at one instant. From it we form the ten basic
//! (gauge-variant) scalars, the six gauge invariants `ι₁…ι₆`, and the
//! reparametrization-invariant set `I₀…I₄`.

mod count;
mod sample;

pub use count::{reproduce_invariant_count, CountingConfig, CountingReport};
pub use sample::{random_jet, random_spinor, JetSampler, SpinorPath};

use serde::Serialize;

use crate::ad::{Dual, Real};
use crate::algebra::FourVector;
use crate::error::{Error, Result};
use crate::spinor::{gauge_transform, phase_rotate, Tetrad};

/// Velocity, tetrad and tetrad velocities at one parameter instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicJet {
    pub xdot: FourVector,
    pub k: FourVector,
    pub m: FourVector,
    pub a: FourVector,
    pub b: FourVector,
    pub kdot: FourVector,
    pub mdot: FourVector,
    pub adot: FourVector,
    pub bdot: FourVector,
}

/// Gauge functions `α, β` and their parameter derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GaugeJet {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BasicScalars {
    pub a_kdot: f64,
    pub b_kdot: f64,
    pub k_xdot: f64,
    pub a_xdot: f64,
    pub b_xdot: f64,
    pub a_bdot: f64,
    pub m_kdot: f64,
    pub m_xdot: f64,
    pub a_mdot: f64,
    pub b_mdot: f64,
}

impl BasicScalars {
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.a_kdot,
            self.b_kdot,
            self.k_xdot,
            self.a_xdot,
            self.b_xdot,
            self.a_bdot,
            self.m_kdot,
            self.m_xdot,
            self.a_mdot,
            self.b_mdot,
        ]
    }
}

impl KinematicJet {
    /// Builds a jet from a tetrad whose components carry one derivative.
    pub fn from_dual(xdot: FourVector, t: &Tetrad<Dual>) -> Self {
        let re = |v: &FourVector<Dual>| FourVector(v.0.map(|c| c.re));
        let eps = |v: &FourVector<Dual>| FourVector(v.0.map(|c| c.eps));
        KinematicJet {
            xdot,
            k: re(&t.k),
            m: re(&t.m),
            a: re(&t.a),
            b: re(&t.b),
            kdot: eps(&t.k),
            mdot: eps(&t.m),
            adot: eps(&t.a),
            bdot: eps(&t.b),
        }
    }

    pub fn to_dual(&self) -> Tetrad<Dual> {
        let pack = |v: &FourVector, d: &FourVector| {
            FourVector([0, 1, 2, 3].map(|i| Dual::new(v[i], d[i])))
        };
        Tetrad {
            k: pack(&self.k, &self.kdot),
            m: pack(&self.m, &self.mdot),
            a: pack(&self.a, &self.adot),
            b: pack(&self.b, &self.bdot),
        }
    }

    pub fn tetrad(&self) -> Tetrad {
        Tetrad {
            k: self.k,
            m: self.m,
            a: self.a,
            b: self.b,
        }
    }

    /// Scales every velocity by `s` (a linear reparametrization `τ → τ/s`).
    pub fn reparametrize(&self, s: f64) -> Self {
        KinematicJet {
            xdot: self.xdot * s,
            kdot: self.kdot * s,
            mdot: self.mdot * s,
            adot: self.adot * s,
            bdot: self.bdot * s,
            ..*self
        }
    }

    /// Rescales the null vector `k → e^ψ k` with rate `ψ̇`; `m` is rescaled
    /// by `e^{−ψ}` so the tetrad relations keep holding.
    pub fn rescale_k(&self, psi: f64, psi_dot: f64) -> Self {
        let e = psi.exp();
        KinematicJet {
            k: self.k * e,
            kdot: (self.kdot + self.k * psi_dot) * e,
            m: self.m * (1.0 / e),
            mdot: (self.mdot - self.m * psi_dot) * (1.0 / e),
            ..*self
        }
    }

    /// Largest violation of the differentiated tetrad relations, e.g.
    /// `k·k̇ = 0`, `k·ṁ + m·k̇ = 0`.
    pub fn constraint_defect(&self) -> f64 {
        let j = self;
        let pairs = [
            j.k.dot(&j.kdot),
            j.m.dot(&j.mdot),
            j.a.dot(&j.adot),
            j.b.dot(&j.bdot),
            j.k.dot(&j.mdot) + j.m.dot(&j.kdot),
            j.k.dot(&j.adot) + j.a.dot(&j.kdot),
            j.k.dot(&j.bdot) + j.b.dot(&j.kdot),
            j.m.dot(&j.adot) + j.a.dot(&j.mdot),
            j.m.dot(&j.bdot) + j.b.dot(&j.mdot),
            j.a.dot(&j.bdot) + j.b.dot(&j.adot),
        ];
        pairs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Magnitude of the largest vector entering the jet.
    pub fn scale(&self) -> f64 {
        [
            self.xdot, self.k, self.m, self.a, self.b, self.kdot, self.mdot, self.adot, self.bdot,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.max_abs()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xdot.norm_sqr() > 0.0) || !(self.xdot[0] > 0.0) {
            return Err(Error::domain("worldline velocity is not future timelike"));
        }
        if !(self.k.dot(&self.xdot) > 0.0) {
            return Err(Error::domain("k·ẋ must be positive"));
        }
        Ok(())
    }
}

/// Jet of the free rotator at `t = 0` with `M = ℓ = 1`, `φ(t) = t`:
/// `ẋ = (1, ½, 0, 0)`, `k = (1, 1, 0, 0)`, `k̇ = (0, 0, −1, 0)`.
pub fn reference_rotator_jet() -> KinematicJet {
    // k = (1, cos t, −sin t, 0) has direction angles θ = π/2, φ = −t.
    let th = Dual::cst(std::f64::consts::FRAC_PI_2);
    let ph = Dual::new(0.0, -1.0);
    let kap = crate::spinor::spinor_from_angles(th, ph, Dual::cst(1.0), Dual::cst(0.0))
        .expect("positive magnitude");
    let t = crate::spinor::tetrad(&kap).expect("nonzero spinor");
    KinematicJet::from_dual(FourVector::new(1.0, 0.5, 0.0, 0.0), &t)
}

pub fn basic_scalars(j: &KinematicJet) -> BasicScalars {
    BasicScalars {
        a_kdot: j.a.dot(&j.kdot),
        b_kdot: j.b.dot(&j.kdot),
        k_xdot: j.k.dot(&j.xdot),
        a_xdot: j.a.dot(&j.xdot),
        b_xdot: j.b.dot(&j.xdot),
        a_bdot: j.a.dot(&j.bdot),
        m_kdot: j.m.dot(&j.kdot),
        m_xdot: j.m.dot(&j.xdot),
        a_mdot: j.a.dot(&j.mdot),
        b_mdot: j.b.dot(&j.mdot),
    }
}

/// Applies a parameter-dependent gauge transformation to the tetrad and its
/// derivatives. The worldline velocity is untouched.
pub fn gauge_jet_transform(j: &KinematicJet, g: &GaugeJet) -> KinematicJet {
    let t = gauge_transform(
        &j.to_dual(),
        Dual::new(g.alpha, g.alpha_dot),
        Dual::new(g.beta, g.beta_dot),
    );
    KinematicJet::from_dual(j.xdot, &t)
}

/// Rotates `(a, b)` by a parameter-dependent phase `Δ` with rate `Δ̇`.
pub fn phase_jet_transform(j: &KinematicJet, delta: f64, delta_dot: f64) -> KinematicJet {
    let t = phase_rotate(&j.to_dual(), Dual::new(delta, delta_dot));
    KinematicJet::from_dual(j.xdot, &t)
}

/// `ι₁ … ι₆`.
pub fn iota(j: &KinematicJet) -> [f64; 6] {
    let s = basic_scalars(j);
    [
        s.a_kdot,
        s.b_kdot,
        s.k_xdot,
        j.xdot.norm_sqr(),
        j.kdot.dot(&j.xdot),
        s.a_xdot * s.b_kdot - s.a_kdot * s.b_xdot + s.a_bdot * s.k_xdot,
    ]
}

/// `I₀ … I₄` for length scale `ell`.
pub fn capital_invariants(j: &KinematicJet, ell: f64) -> Result<[f64; 5]> {
    if !(ell > 0.0) {
        return Err(Error::domain("length scale must be positive"));
    }
    let io = iota(j);
    let (kx, xx) = (io[2], io[3]);
    if !(kx > 0.0) || !(xx > 0.0) {
        return Err(Error::domain(format!(
            "invariants need k·ẋ > 0 and ẋ·ẋ > 0 (got {kx}, {xx})"
        )));
    }
    let root = xx.sqrt();
    Ok([
        xx,
        -j.kdot.norm_sqr() / (kx * kx),
        io[5] / (kx * root),
        io[4] / (kx * root),
        kx / root,
    ])
}

/// Residuals of the algebraic identities among the scalars.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdentityReport {
    /// `k̇k̇ + (ak̇)² + (bk̇)²`.
    pub kdot_square: f64,
    /// `ẋẋ − [(kẋ)(mẋ) − (aẋ)² − (bẋ)²]`.
    pub xdot_square: f64,
    /// `k̇ẋ − [½(kẋ)(mk̇) − (ak̇)(aẋ) − (bk̇)(bẋ)]`.
    pub kdot_xdot: f64,
    /// `(aṁ)(bk̇) − (ak̇)(bṁ)`, only in the special gauge.
    pub special_gauge: Option<f64>,
    pub scale: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        let base = self
            .kdot_square
            .abs()
            .max(self.xdot_square.abs())
            .max(self.kdot_xdot.abs());
        base.max(self.special_gauge.map_or(0.0, f64::abs))
    }
}

/// Whether the tetrad has the form `k = K[1, n⃗]`, `m = K⁻¹[1, −n⃗]`,
/// `a = [0, a⃗]`, `b = [0, ±a⃗×n⃗]`.
pub fn in_special_gauge(j: &KinematicJet, tol: f64) -> bool {
    let kk = j.k[0];
    if !(kk > 0.0) {
        return false;
    }
    let n = [j.k[1] / kk, j.k[2] / kk, j.k[3] / kk];
    let a = j.a.spatial();
    let b = j.b.spatial();
    let cross = [
        a[1] * n[2] - a[2] * n[1],
        a[2] * n[0] - a[0] * n[2],
        a[0] * n[1] - a[1] * n[0],
    ];
    let m_ok = (j.m[0] * kk - 1.0).abs() <= tol
        && (0..3).all(|i| (j.m[i + 1] + j.m[0] * n[i]).abs() <= tol);
    let b_ok = (0..3).all(|i| (b[i] - cross[i]).abs() <= tol)
        || (0..3).all(|i| (b[i] + cross[i]).abs() <= tol);
    j.a[0].abs() <= tol && j.b[0].abs() <= tol && m_ok && b_ok
}

pub fn identity_checks(j: &KinematicJet, special_gauge: bool) -> Result<IdentityReport> {
    let s = basic_scalars(j);
    let special = if special_gauge {
        if !in_special_gauge(j, 1e-10 * j.scale().max(1.0)) {
            return Err(Error::precondition(
                "jet is not in the gauge k = K[1,n], m = K⁻¹[1,−n], a = [0,a], b = [0,a×n]",
            ));
        }
        Some(s.a_mdot * s.b_kdot - s.a_kdot * s.b_mdot)
    } else {
        None
    };
    let kdot_xdot_expansion =
        0.5 * s.k_xdot * s.m_kdot - s.a_kdot * s.a_xdot - s.b_kdot * s.b_xdot;
    Ok(IdentityReport {
        kdot_square: j.kdot.norm_sqr() + s.a_kdot * s.a_kdot + s.b_kdot * s.b_kdot,
        xdot_square: j.xdot.norm_sqr()
            - (s.k_xdot * s.m_xdot - s.a_xdot * s.a_xdot - s.b_xdot * s.b_xdot),
        kdot_xdot: j.kdot.dot(&j.xdot) - kdot_xdot_expansion,
        special_gauge: special,
        scale: j.scale().powi(2).max(1.0),
    })
}

/// Basic scalars after a gauge transformation predicted row by row from the
/// transformation table.
pub fn gauge_table(s: &BasicScalars, g: &GaugeJet) -> BasicScalars {
    let (al, be) = (g.alpha, g.beta);
    let d2 = al * al - be * be;
    BasicScalars {
        a_kdot: s.a_kdot,
        b_kdot: s.b_kdot,
        k_xdot: s.k_xdot,
        a_xdot: s.a_xdot + al * s.k_xdot,
        b_xdot: s.b_xdot + be * s.k_xdot,
        a_bdot: s.a_bdot - al * s.b_kdot + be * s.a_kdot,
        m_kdot: s.m_kdot + 2.0 * al * s.a_kdot + 2.0 * be * s.b_kdot,
        m_xdot: s.m_xdot + 2.0 * al * s.a_xdot + 2.0 * be * s.b_xdot + (al * al + be * be) * s.k_xdot,
        a_mdot: s.a_mdot - d2 * s.a_kdot - al * s.m_kdot + 2.0 * be * s.a_bdot
            - 2.0 * al * be * s.b_kdot
            - 2.0 * g.alpha_dot,
        b_mdot: s.b_mdot + d2 * s.b_kdot - 2.0 * al * s.a_bdot - be * s.m_kdot
            - 2.0 * al * be * s.a_kdot
            - 2.0 * g.beta_dot,
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::spinor::{spinor_from_angles, tetrad};

    fn fv(a: f64, b: f64, c: f64, d: f64) -> FourVector {
        FourVector::new(a, b, c, d)
    }

    #[test]
    fn rotator_point_scalars() {
        let j = reference_rotator_jet();
        assert!((j.k[0] - 1.0).abs() < 1e-15 && (j.k[1] - 1.0).abs() < 1e-15);
        assert!((j.kdot[2] + 1.0).abs() < 1e-15);
        let s = basic_scalars(&j);
        assert!((s.k_xdot - 0.5).abs() < 1e-15);
        let io = iota(&j);
        assert!((io[2] - 0.5).abs() < 1e-15);
        assert!((io[3] - 0.75).abs() < 1e-15);
        assert!(io[4].abs() < 1e-15);
        let ci = capital_invariants(&j, 1.0).unwrap();
        assert!((ci[1] - 4.0).abs() < 1e-14);
        assert!(ci[3].abs() < 1e-15);
        assert!((ci[4] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn static_jet() {
        let t = tetrad(&spinor_from_angles(0.0, 0.0, 1.0, 0.0).unwrap()).unwrap();
        let z = FourVector::zero();
        let j = KinematicJet {
            xdot: fv(1.0, 0.0, 0.0, 0.0),
            k: t.k,
            m: t.m,
            a: t.a,
            b: t.b,
            kdot: z,
            mdot: z,
            adot: z,
            bdot: z,
        };
        let s = basic_scalars(&j);
        assert_eq!(s.k_xdot, 1.0);
        assert_eq!(s.m_xdot, 1.0);
        for v in [s.a_kdot, s.b_kdot, s.a_bdot, s.m_kdot, s.a_mdot, s.b_mdot] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn gauge_jet_identity_and_alpha_dot_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let j = random_jet(&mut rng);
        let same = gauge_jet_transform(&j, &GaugeJet::default());
        assert_eq!(same, j);

        let g = GaugeJet {
            alpha: 0.0,
            beta: 0.0,
            alpha_dot: 1.0,
            beta_dot: 0.0,
        };
        let shifted = basic_scalars(&gauge_jet_transform(&j, &g));
        assert!((shifted.a_mdot - (basic_scalars(&j).a_mdot - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn capital_invariants_reject_bad_jets() {
        let mut j = reference_rotator_jet();
        j.xdot = fv(0.0, 1.0, 0.0, 0.0);
        assert!(matches!(capital_invariants(&j, 1.0), Err(Error::Domain(_))));
        assert!(matches!(capital_invariants(&reference_rotator_jet(), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reparametrization_scales_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = random_jet(&mut rng);
        let a = capital_invariants(&j, 1.3).unwrap();
        let b = capital_invariants(&j.reparametrize(2.0), 1.3).unwrap();
        assert!((b[0] - 4.0 * a[0]).abs() <= 1e-12 * a[0].abs());
        for i in 1..5 {
            assert!((a[i] - b[i]).abs() <= 1e-12 * a[i].abs().max(1.0), "I{i}");
        }
    }

    #[test]
    fn k_rescaling_shifts_i3_and_scales_i4() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let j = random_jet(&mut rng);
        let (psi, psi_dot) = (0.4, -0.9);
        let a = capital_invariants(&j, 1.0).unwrap();
        let r = j.rescale_k(psi, psi_dot);
        assert!(r.tetrad().relation_defect() < 1e-12);
        let b = capital_invariants(&r, 1.0).unwrap();
        for i in [1, 2] {
            assert!((a[i] - b[i]).abs() <= 1e-11 * a[i].abs().max(1.0), "I{i}");
        }
        // I₄ carries the dimension of k
        assert!((b[4] - psi.exp() * a[4]).abs() <= 1e-12 * b[4].abs());
        let expected = a[3] + psi_dot / a[0].sqrt();
        assert!((b[3] - expected).abs() <= 1e-11 * expected.abs().max(1.0));
    }

    #[test]
    fn special_gauge_precondition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let j = random_jet(&mut rng);
        let g = gauge_jet_transform(
            &j,
            &GaugeJet {
                alpha: 0.5,
                beta: -0.2,
                alpha_dot: 0.0,
                beta_dot: 0.0,
            },
        );
        assert!(matches!(identity_checks(&g, true), Err(Error::Precondition(_))));
        assert!(identity_checks(&g, false).is_ok());
    }
}
