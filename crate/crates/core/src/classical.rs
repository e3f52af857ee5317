//! Fisher–Rao geometry on the probability simplex.
//!
//! The line element carries the factor 1/4, `ds² = ¼ Σ dp²/p`, so that the
//! geodesic distance is the great-circle angle between the octant images
//! `x = √p` and agrees with the quantum (Bures) angle on commuting states.

use nalgebra::DMatrix;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rng::{substream, Rng};
use crate::sampling::{flat_dirichlet, random_dim};

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Entries must be finite and non-negative (ulps below zero are clamped);
    /// the vector is renormalized to unit sum.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Invalid("empty probability vector".into()));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
            return Err(Error::Invalid(format!("invalid probability entry {x}")));
        }
        let p: Vec<f64> = p.into_iter().map(|x| x.max(0.0)).collect();
        let s: f64 = p.iter().sum();
        if s <= 0.0 {
            return Err(Error::Invalid("probability vector sums to zero".into()));
        }
        Ok(ProbabilityVector(p.into_iter().map(|x| x / s).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::Boundary("probability vector has a zero component".into()))
        }
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        ProbabilityVector::new(v).map_err(serde::de::Error::custom)
    }
}

/// Column-stochastic `M × N` matrix: `T_ij ≥ 0`, `Σ_i T_ij = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        if t.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Invalid("stochastic matrix entries must be non-negative".into()));
        }
        let mut t = t;
        for mut col in t.column_iter_mut() {
            let s: f64 = col.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Invalid(format!("stochastic matrix column sums to {s}")));
            }
            col /= s;
        }
        Ok(StochasticMatrix(t))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::mismatch(n, r.len()));
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        StochasticMatrix(DMatrix::identity(n, n))
    }

    /// Coarse graining of three outcomes into two: outcomes 2 and 3 merge.
    pub fn coarse_graining_3_to_2() -> Self {
        Self::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]]).expect("valid")
    }

    /// Columns drawn independently from the flat Dirichlet distribution.
    pub fn random(rng: &mut Rng, rows: usize, cols: usize) -> Self {
        let mut t = DMatrix::zeros(rows, cols);
        for j in 0..cols {
            for (i, x) in flat_dirichlet(rng, rows).into_iter().enumerate() {
                t[(i, j)] = x;
            }
        }
        StochasticMatrix(t)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Tangent vector of the simplex, `Σ dp = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector(Vec<f64>);

impl TangentVector {
    pub fn new(dp: Vec<f64>) -> Result<Self> {
        let s: f64 = dp.iter().sum();
        let scale = dp.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        if s.abs() > 1e-12 * scale {
            return Err(Error::Invalid(format!("tangent vector sums to {s:e}")));
        }
        Ok(TangentVector(dp))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `ds² = ¼ Σ (dp^i)² / p^i`.
pub fn fisher_rao_ds2(p: &ProbabilityVector, dp: &TangentVector) -> Result<f64> {
    if p.len() != dp.0.len() {
        return Err(Error::mismatch(p.len(), dp.0.len()));
    }
    p.require_interior()?;
    Ok(0.25 * p.0.iter().zip(&dp.0).map(|(p, d)| d * d / p).sum::<f64>())
}

/// Octant embedding `x^i = √p^i`.
pub fn sphere_embed(p: &ProbabilityVector) -> Vec<f64> {
    p.0.iter().map(|x| x.sqrt()).collect()
}

/// Bhattacharyya coefficient `Σ √(p^i q^i)`.
pub fn bhattacharyya(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::mismatch(p.len(), q.len()));
    }
    Ok(p.0.iter().zip(&q.0).map(|(a, b)| (a * b).sqrt()).sum())
}

/// Geodesic distance `arccos Σ √(p^i q^i)`, in `[0, π/2]`.
///
/// Near zero distance `arccos` loses half the significant digits, so there
/// the same angle is taken from the chord, `2 asin(‖√p − √q‖ / 2)`.
pub fn fr_geodesic_distance(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    let cos = bhattacharyya(p, q)?.clamp(0.0, 1.0);
    if cos < 0.9 {
        return Ok(cos.acos());
    }
    let chord = p.0.iter().zip(&q.0).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum::<f64>().sqrt();
    Ok(2.0 * (0.5 * chord).min(1.0).asin())
}

/// Euclidean distance on the flat simplex (not monotone).
pub fn flat_distance(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::mismatch(p.len(), q.len()));
    }
    Ok(p.0.iter().zip(&q.0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

pub fn apply_stochastic(t: &StochasticMatrix, p: &ProbabilityVector) -> Result<ProbabilityVector> {
    if t.cols() != p.len() {
        return Err(Error::mismatch(t.cols(), p.len()));
    }
    let q = &t.0 * nalgebra::DVector::from_column_slice(&p.0);
    ProbabilityVector::new(q.iter().copied().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `D(TP,TQ) − D(P,Q)` observed (negative when every trial contracted).
    pub max_excess: f64,
}

/// Tolerance for counting a monotonicity violation.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// Random `(T, P, Q)` triples with `N, M ∈ {2..5}`; counts trials where the
/// distance grows by more than [`MONOTONICITY_TOL`].
pub fn monotonicity_stress_with<D>(seed: u64, trials: usize, distance: D) -> MonotonicityReport
where
    D: Fn(&ProbabilityVector, &ProbabilityVector) -> Result<f64> + Sync + Send,
{
    let excess = par::map_indices(trials, |i| {
        let mut rng = substream(seed, "classical-monotonicity", i as u64);
        let n = random_dim(&mut rng, 2, 5);
        let m = random_dim(&mut rng, 2, 5);
        let p = ProbabilityVector(flat_dirichlet(&mut rng, n));
        let q = ProbabilityVector(flat_dirichlet(&mut rng, n));
        let t = StochasticMatrix::random(&mut rng, m, n);
        let before = distance(&p, &q).expect("same length");
        let tp = apply_stochastic(&t, &p).expect("dims");
        let tq = apply_stochastic(&t, &q).expect("dims");
        distance(&tp, &tq).expect("same length") - before
    });
    MonotonicityReport {
        trials,
        violations: excess.iter().filter(|&&e| e > MONOTONICITY_TOL).count(),
        max_excess: excess.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Monotonicity stress test of the Fisher–Rao geodesic distance.
pub fn monotonicity_stress(seed: u64, trials: usize) -> MonotonicityReport {
    let mut r = monotonicity_stress_with(seed, trials, fr_geodesic_distance);
    if trials == 0 {
        r.max_excess = 0.0;
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultinomialReport {
    pub samples_per_trial: u64,
    pub trials: usize,
    pub empirical_cov: Vec<Vec<f64>>,
    pub predicted_cov: Vec<Vec<f64>>,
    pub max_rel_err: f64,
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial_counts(rng: &mut Rng, n: u64, p: &[f64]) -> Vec<u64> {
    let mut counts = vec![0; p.len()];
    let mut remaining = n;
    let mut mass = 1.0;
    for (k, &pk) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == p.len() {
            counts[k] = remaining;
            break;
        }
        let prob = (pk / mass).clamp(0.0, 1.0);
        let x = Binomial::new(remaining, prob).expect("valid binomial").sample(rng);
        counts[k] = x;
        remaining -= x;
        mass -= pk;
    }
    counts
}

/// Frequency-covariance experiment: draws `trials` multinomial frequency
/// vectors of `samples` outcomes each and compares the empirical covariance
/// of `f − p` with `(δ_ij p^i − p^i p^j)/samples`.
pub fn multinomial_ellipse_experiment(
    p: &ProbabilityVector,
    samples: u64,
    trials: usize,
    seed: u64,
) -> Result<MultinomialReport> {
    p.require_interior()?;
    if samples < 100 {
        return Err(Error::Invalid("at least 100 samples per trial required".into()));
    }
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let n = p.len();
    let probs = p.as_slice().to_vec();
    let freqs = par::map_indices(trials, |i| {
        let mut rng = substream(seed, "multinomial", i as u64);
        multinomial_counts(&mut rng, samples, &probs)
            .into_iter()
            .map(|c| c as f64 / samples as f64)
            .collect::<Vec<f64>>()
    });
    let mut emp = vec![vec![0.0; n]; n];
    for f in &freqs {
        for i in 0..n {
            for j in 0..n {
                emp[i][j] += (f[i] - probs[i]) * (f[j] - probs[j]);
            }
        }
    }
    let inv = 1.0 / trials as f64;
    emp.iter_mut().flatten().for_each(|x| *x *= inv);
    let pred = multinomial_covariance(p, samples);
    let max_rel_err = emp
        .iter()
        .flatten()
        .zip(pred.iter().flatten())
        .map(|(e, q)| ((e - q) / q).abs())
        .fold(0.0, f64::max);
    Ok(MultinomialReport {
        samples_per_trial: samples,
        trials,
        empirical_cov: emp,
        predicted_cov: pred,
        max_rel_err,
    })
}

/// Exact multinomial covariance of the frequency vector.
pub fn multinomial_covariance(p: &ProbabilityVector, samples: u64) -> Vec<Vec<f64>> {
    let n = p.len();
    let s = samples as f64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { p.0[i] } else { 0.0 };
                    (d - p.0[i] * p.0[j]) / s
                })
                .collect()
        })
        .collect()
}

/// `Γ(k/2)` for positive integer `k`.
fn gamma_half_integer(k: u32) -> f64 {
    assert!(k > 0);
    if k.is_multiple_of(2) {
        (1..k / 2).map(f64::from).product()
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x)
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < f64::from(k) / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Normalized Jeffreys density on the simplex (Lebesgue measure on the first
/// `N−1` coordinates): `Γ(N/2) / π^{N/2} · Π (p^i)^{−1/2}`.
pub fn jeffreys_density(p: &ProbabilityVector) -> Result<f64> {
    p.require_interior()?;
    let n = p.len() as u32;
    let norm = gamma_half_integer(n) / std::f64::consts::PI.powf(f64::from(n) / 2.0);
    Ok(norm / p.0.iter().product::<f64>().sqrt())
}
