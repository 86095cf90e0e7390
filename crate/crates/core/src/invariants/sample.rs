use std::f64::consts::PI;

use rand::Rng;

use crate::ad::{Dual, Real};
use crate::algebra::FourVector;
use crate::spinor::{spinor_from_angles, tetrad, Complex, Spinor};

use super::KinematicJet;

/// Spinor path `κ(τ) = e^{iΔ(τ)/2} Σₙ cₙ τⁿ` with polynomial phase `Δ`.
///
/// Jets are read off by exact differentiation, so the derivative consistency
/// of the tetrad relations holds to rounding.
#[derive(Clone, Debug)]
pub struct SpinorPath {
    pub coeffs: Vec<Spinor>,
    pub phase: Vec<f64>,
}

impl SpinorPath {
    pub fn eval<T: Real>(&self, tau: T) -> Spinor<T> {
        let lift = |c: Complex| Complex::new(T::cst(c.re), T::cst(c.im));
        let mut acc = Spinor::new(Complex::real(T::zero()), Complex::real(T::zero()));
        let mut pow = T::one();
        for c in &self.coeffs {
            acc = acc + Spinor::new(lift(c.c0), lift(c.c1)).scale(Complex::real(pow));
            pow *= tau;
        }
        let mut delta = T::zero();
        let mut pow = T::one();
        for &d in &self.phase {
            delta += pow * d;
            pow *= tau;
        }
        acc.scale(Complex::cis(delta * 0.5))
    }

    /// Jet at `tau` with the canonical mate along the path.
    pub fn jet(&self, tau: f64, xdot: FourVector) -> KinematicJet {
        let kap = self.eval(Dual::var(tau));
        let t = tetrad(&kap).expect("path spinor vanishes");
        KinematicJet::from_dual(xdot, &t)
    }
}

/// Ranges for random jets.
#[derive(Clone, Debug)]
pub struct JetSampler {
    /// Range of the spinor magnitude parameter.
    pub psi: (f64, f64),
    /// Bound on each component of the spinor velocity.
    pub spinor_rate: f64,
    /// Bound on the spatial speed of the worldline.
    pub max_speed: f64,
    /// Range of the overall velocity scale (parametrization freedom).
    pub velocity_scale: (f64, f64),
}

impl Default for JetSampler {
    fn default() -> Self {
        JetSampler {
            psi: (0.3, 3.0),
            spinor_rate: 1.0,
            max_speed: 0.8,
            velocity_scale: (0.5, 2.0),
        }
    }
}

impl JetSampler {
    pub fn path<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinorPath {
        let base = random_spinor_in(rng, self.psi);
        let rc = |r: &mut R| {
            Complex::new(
                r.gen_range(-self.spinor_rate..self.spinor_rate),
                r.gen_range(-self.spinor_rate..self.spinor_rate),
            )
        };
        let c1 = Spinor::new(rc(rng), rc(rng));
        let c2 = Spinor::new(rc(rng), rc(rng));
        SpinorPath {
            coeffs: vec![base, c1, c2],
            phase: vec![],
        }
    }

    pub fn velocity<R: Rng + ?Sized>(&self, rng: &mut R) -> FourVector {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-self.max_speed..self.max_speed));
            if v.iter().map(|c| c * c).sum::<f64>() < self.max_speed * self.max_speed {
                let s = rng.gen_range(self.velocity_scale.0..self.velocity_scale.1);
                return FourVector::new(s, s * v[0], s * v[1], s * v[2]);
            }
        }
    }

    pub fn jet<R: Rng + ?Sized>(&self, rng: &mut R) -> KinematicJet {
        let path = self.path(rng);
        let xdot = self.velocity(rng);
        path.jet(0.0, xdot)
    }
}

fn random_spinor_in<R: Rng + ?Sized>(rng: &mut R, psi: (f64, f64)) -> Spinor {
    let th = rng.gen_range(0.0..PI);
    let ph = rng.gen_range(0.0..2.0 * PI);
    let ps = rng.gen_range(psi.0..psi.1);
    let phase = rng.gen_range(0.0..4.0 * PI);
    spinor_from_angles(th, ph, ps, phase).expect("positive magnitude")
}

/// Spinor with `θ ∈ [0, π]`, `φ ∈ [0, 2π)`, `Ψ ∈ [0.1, 10]`, `Φ ∈ [0, 4π)`.
pub fn random_spinor<R: Rng + ?Sized>(rng: &mut R) -> Spinor {
    random_spinor_in(rng, (0.1, 10.0))
}

/// A jet from [`JetSampler::default`].
pub fn random_jet<R: Rng + ?Sized>(rng: &mut R) -> KinematicJet {
    JetSampler::default().jet(rng)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn random_jets_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let j = random_jet(&mut rng);
            j.validate().unwrap();
            assert!(j.tetrad().relation_defect() < 1e-12 * j.tetrad().scale());
            assert!(j.constraint_defect() < 1e-10 * j.scale().powi(2));
        }
    }
}
