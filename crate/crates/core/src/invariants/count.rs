//! Numerical reproduction of the invariant count.
//!
//! The five gauge-variant scalars of the upper-right block of the gauge table,
//! `J₁…J₅`, enter the most general binomial
//!
//! ```text
//! B = Σᵢ₌₁⁴ [cᵢ + Σⱼ₌ᵢ⁴ dᵢⱼ Jⱼ] Jᵢ + c₅ J₅
//! ```
//!
//! with 15 unknown coefficients `V = (c₁…c₅, d₁₁…d₄₄)`. Requiring the
//! coefficients of `α, β, αβ, α², β²` in `B(J̃) − B(J)` to vanish gives a 5×15
//! system `A V = 0` whose entries are functions of the scalars. The null
//! vectors are taken in reduced row-echelon form (free columns seeded with unit
//! vectors), which makes each of them a rational function of the scalars; the
//! whole pipeline is differentiated with dual numbers to get the functional
//! rank of the resulting invariants.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ad::{Dual, Real};
use crate::error::{Error, Result};

const N_UNKNOWNS: usize = 15;
const N_MONOMIALS: usize = 5;

// Indices into the basic-scalar array, see `BasicScalars::to_array`.
const AK: usize = 0;
const BK: usize = 1;
const KX: usize = 2;
const AX: usize = 3;
const BX: usize = 4;
const AB: usize = 5;
const MK: usize = 6;
const MX: usize = 7;

/// Polynomial in the gauge parameters, coefficients of
/// `[1, α, β, αβ, α², β²]`.
#[derive(Clone, Copy, Debug)]
struct GaugePoly<T>([T; 6]);

impl<T: Real> GaugePoly<T> {
    fn constant(c: T) -> Self {
        let mut p = [T::zero(); 6];
        p[0] = c;
        GaugePoly(p)
    }

    fn is_linear(&self) -> bool {
        self.0[3..].iter().all(|c| c.value() == 0.0)
    }

    /// Product of two polynomials of degree at most one.
    fn mul_linear(self, o: Self) -> Self {
        debug_assert!(self.is_linear() && o.is_linear());
        let [a0, a1, a2, ..] = self.0;
        let [b0, b1, b2, ..] = o.0;
        GaugePoly([
            a0 * b0,
            a0 * b1 + a1 * b0,
            a0 * b2 + a2 * b0,
            a1 * b2 + a2 * b1,
            a1 * b1,
            a2 * b2,
        ])
    }
}

/// Transformed gauge-variant scalars as polynomials in `(α, β)`.
fn transformed<T: Real>(s: &[T; 10]) -> [GaugePoly<T>; 8] {
    let z = T::zero();
    let (u, w, kx) = (s[AK], s[BK], s[KX]);
    let mut out = [GaugePoly::constant(z); 8];
    for (i, o) in out.iter_mut().enumerate() {
        *o = GaugePoly::constant(s[i]);
    }
    out[AX].0[1] = kx;
    out[BX].0[2] = kx;
    out[AB].0[1] = -w;
    out[AB].0[2] = u;
    out[MK].0[1] = u * 2.0;
    out[MK].0[2] = w * 2.0;
    out[MX].0[1] = s[AX] * 2.0;
    out[MX].0[2] = s[BX] * 2.0;
    out[MX].0[4] = kx;
    out[MX].0[5] = kx;
    out
}

/// Index pairs `(i, j)`, `i ≤ j`, of the quadratic part.
fn quadratic_pairs() -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(10);
    for i in 0..4 {
        for j in i..4 {
            v.push((i, j));
        }
    }
    v
}

/// Monomials `(J₁…J₅, J₁J₁, J₁J₂, …, J₄J₄)` as gauge polynomials.
fn monomials<T: Real>(s: &[T; 10], labels: &[usize; 5]) -> [GaugePoly<T>; N_UNKNOWNS] {
    let t = transformed(s);
    let j: [GaugePoly<T>; 5] = std::array::from_fn(|i| t[labels[i]]);
    let mut out = [GaugePoly::constant(T::zero()); N_UNKNOWNS];
    out[..5].copy_from_slice(&j);
    for (slot, (a, b)) in quadratic_pairs().into_iter().enumerate() {
        out[5 + slot] = j[a].mul_linear(j[b]);
    }
    out
}

/// The 5×15 matrix `A` at one scalar point and the untransformed monomials.
fn system<T: Real>(s: &[T; 10], labels: &[usize; 5]) -> ([[T; N_UNKNOWNS]; N_MONOMIALS], [T; N_UNKNOWNS]) {
    let mons = monomials(s, labels);
    let mut a = [[T::zero(); N_UNKNOWNS]; N_MONOMIALS];
    for (v, m) in mons.iter().enumerate() {
        for r in 0..N_MONOMIALS {
            a[r][v] = m.0[r + 1];
        }
    }
    (a, mons.map(|m| m.0[0]))
}

struct Echelon<T> {
    pivots: Vec<usize>,
    free: Vec<usize>,
    /// Null vectors, one per free column.
    basis: Vec<[T; N_UNKNOWNS]>,
}

/// Reduced row-echelon nullspace; pivots are chosen column by column from
/// left to right, rows by largest magnitude.
fn echelon_nullspace<T: Real>(mut a: [[T; N_UNKNOWNS]; N_MONOMIALS], tol: f64) -> Echelon<T> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.value().abs()))
        .max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..N_UNKNOWNS {
        if row == N_MONOMIALS {
            break;
        }
        let best = (row..N_MONOMIALS)
            .max_by(|&x, &y| a[x][col].value().abs().total_cmp(&a[y][col].value().abs()))
            .unwrap();
        if a[best][col].value().abs() <= tol * scale {
            continue;
        }
        a.swap(row, best);
        let inv = a[row][col].recip();
        for c in 0..N_UNKNOWNS {
            a[row][c] *= inv;
        }
        for r in 0..N_MONOMIALS {
            if r != row {
                let f = a[r][col];
                if f.value() != 0.0 {
                    for c in 0..N_UNKNOWNS {
                        let sub = f * a[row][c];
                        a[r][c] -= sub;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..N_UNKNOWNS).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = [T::zero(); N_UNKNOWNS];
            v[f] = T::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -a[i][f];
            }
            v
        })
        .collect();
    Echelon { pivots, free, basis }
}

struct PointInvariants<T> {
    pivots: Vec<usize>,
    free: Vec<usize>,
    values: Vec<T>,
    /// Σ |Vᵥ mᵥ| per invariant, for cancellation-aware zero tests.
    scales: Vec<f64>,
}

fn invariants_at<T: Real>(s: &[T; 10], labels: &[usize; 5]) -> PointInvariants<T> {
    let (a, mons) = system(s, labels);
    let ech = echelon_nullspace(a, 1e-10);
    let mut values = Vec::with_capacity(ech.basis.len());
    let mut scales = Vec::with_capacity(ech.basis.len());
    for v in &ech.basis {
        let mut acc = T::zero();
        let mut sc = 0.0;
        for (c, m) in v.iter().zip(mons.iter()) {
            acc += *c * *m;
            sc += (c.value() * m.value()).abs();
        }
        values.push(acc);
        scales.push(sc);
    }
    PointInvariants {
        pivots: ech.pivots,
        free: ech.free,
        values,
        scales,
    }
}

fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

#[derive(Clone, Debug)]
pub struct CountingConfig {
    pub seed: u64,
    pub samples: usize,
    /// Which gauge-variant scalars play `J₁…J₄`, as a permutation of
    /// `[aẋ, bẋ, aḃ, mk̇]`; `J₅ = mẋ` always.
    pub labels: [usize; 4],
    /// Relative singular-value threshold.
    pub rank_tol: f64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        CountingConfig {
            seed: 0,
            samples: 64,
            labels: [0, 1, 2, 3],
            rank_tol: 1e-8,
        }
    }
}

impl CountingConfig {
    pub fn with_seed(seed: u64) -> Self {
        CountingConfig {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CountingReport {
    pub seed: u64,
    pub samples: usize,
    /// Generic rank of `A`.
    pub rank: usize,
    pub nullity: usize,
    /// Null vectors whose invariant vanishes at every sample.
    pub zero_combinations: usize,
    /// Independent invariants beyond `ak̇, bk̇, kẋ`.
    pub functional_rank: usize,
    pub total_independent: usize,
    /// Whether rank, pivots and functional rank agreed at every sample.
    pub consistent: bool,
}

/// Builds and analyses the gauge-invariance system at `config.samples` random
/// scalar points drawn uniformly from `[−2, 2]`.
pub fn reproduce_invariant_count(config: &CountingConfig) -> Result<CountingReport> {
    if config.samples < 1 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    let mut perm = config.labels;
    perm.sort_unstable();
    if perm != [0, 1, 2, 3] {
        return Err(Error::Config(format!("labels {:?} are not a permutation of 0..4", config.labels)));
    }
    let variant = [AX, BX, AB, MK];
    let labels: [usize; 5] = [
        variant[config.labels[0]],
        variant[config.labels[1]],
        variant[config.labels[2]],
        variant[config.labels[3]],
        MX,
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points: Vec<[f64; 10]> = Vec::with_capacity(config.samples);
    while points.len() < config.samples {
        let s: [f64; 10] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        if s[KX].abs() < 0.1 || s[AK].abs() < 0.05 || s[BK].abs() < 0.05 {
            continue;
        }
        points.push(s);
    }

    let mut ranks = Vec::new();
    let mut pivot_sets = Vec::new();
    let mut zero_flags: Option<Vec<bool>> = None;
    for s in &points {
        let (a, _) = system(s, &labels);
        let m = DMatrix::from_fn(N_MONOMIALS, N_UNKNOWNS, |r, c| a[r][c]);
        ranks.push(numeric_rank(&m, config.rank_tol));
        let inv = invariants_at(s, &labels);
        let flags: Vec<bool> = inv
            .values
            .iter()
            .zip(&inv.scales)
            .map(|(v, sc)| v.abs() <= config.rank_tol * sc.max(f64::MIN_POSITIVE))
            .collect();
        zero_flags = Some(match zero_flags {
            None => flags,
            Some(prev) if prev.len() == flags.len() => {
                prev.iter().zip(&flags).map(|(a, b)| *a && *b).collect()
            }
            Some(prev) => prev,
        });
        pivot_sets.push(inv.pivots);
    }
    let zero_flags = zero_flags.unwrap_or_default();

    let mut functional = Vec::new();
    for s in &points {
        let mut rows: Vec<[f64; 10]> = Vec::new();
        let mut upper_left: Vec<[f64; 10]> = Vec::new();
        let mut grads: Vec<Vec<f64>> = Vec::new();
        let mut free_ref: Vec<usize> = Vec::new();
        for d in 0..10 {
            let seeded: [Dual; 10] =
                std::array::from_fn(|i| Dual::new(s[i], if i == d { 1.0 } else { 0.0 }));
            let inv = invariants_at(&seeded, &labels);
            free_ref = inv.free.clone();
            grads.push(inv.values.iter().map(|v| v.eps).collect());
        }
        for (k, _) in free_ref.iter().enumerate() {
            if zero_flags.get(k).copied().unwrap_or(false) {
                continue;
            }
            rows.push(std::array::from_fn(|d| grads[d][k]));
        }
        for idx in [AK, BK, KX] {
            let mut r = [0.0; 10];
            r[idx] = 1.0;
            upper_left.push(r);
        }
        let all: Vec<[f64; 10]> = rows.iter().chain(upper_left.iter()).cloned().collect();
        let m = DMatrix::from_fn(all.len(), 10, |r, c| all[r][c]);
        functional.push(numeric_rank(&m, config.rank_tol).saturating_sub(3));
    }

    let rank = ranks.iter().copied().max().unwrap_or(0);
    let functional_rank = functional.iter().copied().max().unwrap_or(0);
    let consistent = ranks.iter().all(|&r| r == rank)
        && functional.iter().all(|&r| r == functional_rank)
        && pivot_sets.windows(2).all(|w| w[0] == w[1]);

    Ok(CountingReport {
        seed: config.seed,
        samples: config.samples,
        rank,
        nullity: N_UNKNOWNS - rank,
        zero_combinations: zero_flags.iter().filter(|z| **z).count(),
        functional_rank,
        total_independent: functional_rank + 3,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The matrix entries at a fixed point, written out by hand from the
    /// transformation table.
    #[test]
    fn system_matches_hand_expansion() {
        let s = [0.3, -0.7, 1.1, 0.4, -1.2, 0.9, 1.7, -0.5, 0.0, 0.0];
        let (a, _) = system(&s, &[AX, BX, AB, MK, MX]);
        let (u, w, k) = (s[AK], s[BK], s[KX]);
        let (j1, j2, j3, j4) = (s[AX], s[BX], s[AB], s[MK]);
        // coefficient of α
        let alpha_row = [
            k, 0.0, -w, 2.0 * u, 2.0 * j1,
            2.0 * j1 * k, j2 * k, -j1 * w + j3 * k, 2.0 * j1 * u + j4 * k,
            0.0, -j2 * w, 2.0 * j2 * u, -2.0 * j3 * w, 2.0 * j3 * u - j4 * w, 4.0 * j4 * u,
        ];
        for c in 0..N_UNKNOWNS {
            assert!((a[0][c] - alpha_row[c]).abs() < 1e-14, "column {c}");
        }
        // coefficient of α²
        let a2_row = [
            0.0, 0.0, 0.0, 0.0, k, k * k, 0.0, -k * w, 2.0 * k * u, 0.0, 0.0, 0.0, w * w,
            -2.0 * u * w, 4.0 * u * u,
        ];
        for c in 0..N_UNKNOWNS {
            assert!((a[3][c] - a2_row[c]).abs() < 1e-14, "column {c}");
        }
    }

    #[test]
    fn counts_for_default_labels() {
        let r = reproduce_invariant_count(&CountingConfig::with_seed(42)).unwrap();
        assert_eq!((r.rank, r.nullity, r.zero_combinations, r.functional_rank), (5, 10, 2, 3));
        assert_eq!(r.total_independent, 6);
        assert!(r.consistent);
    }

    #[test]
    fn rejects_bad_labels() {
        let cfg = CountingConfig {
            labels: [0, 0, 1, 2],
            ..Default::default()
        };
        assert!(reproduce_invariant_count(&cfg).is_err());
    }
}
