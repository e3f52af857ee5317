//! Operator means `A#B = √A f(A^{-1/2} B A^{-1/2}) √A` and numerical checks
//! of the mean axioms and of operator monotonicity.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig, matrix_function, psd_order_geq, rel_diff, require_positive_definite, HermitianMatrix,
};
use crate::par;
use crate::rng::substream;
use crate::sampling::{haar_unitary, log_uniform, random_dim, random_pd, random_psd, random_psd_rank};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    Custom(String),
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanKind::Arithmetic => write!(f, "arithmetic"),
            MeanKind::Geometric => write!(f, "geometric"),
            MeanKind::Harmonic => write!(f, "harmonic"),
            MeanKind::Custom(name) => write!(f, "{name}"),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function on `(0, ∞)` selecting a mean (and a monotone metric).
#[derive(Clone)]
pub struct MonotoneFunction {
    kind: MeanKind,
    eval: ScalarFn,
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFunction").field("kind", &self.kind).finish()
    }
}

/// Grid of `t ∈ [1e-3, 1e3]`, log-spaced.
pub fn symmetry_grid() -> impl Iterator<Item = f64> {
    (0..=120).map(|k| 10f64.powf(-3.0 + 6.0 * f64::from(k) / 120.0))
}

impl MonotoneFunction {
    /// `f(t) = (1+t)/2`.
    pub fn arithmetic() -> Self {
        Self { kind: MeanKind::Arithmetic, eval: Arc::new(|t| 0.5 * (1.0 + t)) }
    }

    /// `f(t) = √t`.
    pub fn geometric() -> Self {
        Self { kind: MeanKind::Geometric, eval: Arc::new(f64::sqrt) }
    }

    /// `f(t) = 2t/(1+t)`.
    pub fn harmonic() -> Self {
        Self { kind: MeanKind::Harmonic, eval: Arc::new(|t| 2.0 * t / (1.0 + t)) }
    }

    pub fn named(kind: &MeanKind) -> Option<Self> {
        match kind {
            MeanKind::Arithmetic => Some(Self::arithmetic()),
            MeanKind::Geometric => Some(Self::geometric()),
            MeanKind::Harmonic => Some(Self::harmonic()),
            MeanKind::Custom(_) => None,
        }
    }

    /// Custom function; only the normalization `f(1) = 1` is enforced.
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let f1 = f(1.0);
        if (f1 - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("{name}: f(1) = {f1}, expected 1")));
        }
        Ok(Self { kind: MeanKind::Custom(name.to_string()), eval: Arc::new(f) })
    }

    /// Custom function for symmetric-mean use: additionally requires
    /// `f(1/t) = f(t)/t` on the log grid over `[1e-3, 1e3]`.
    pub fn custom_symmetric(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let m = Self::custom(name, f)?;
        if !m.is_symmetric() {
            return Err(Error::Invalid(format!("{name}: f(1/t) ≠ f(t)/t")));
        }
        Ok(m)
    }

    pub fn kind(&self) -> &MeanKind {
        &self.kind
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn is_normalized(&self) -> bool {
        (self.eval(1.0) - 1.0).abs() <= 1e-12
    }

    /// `f(1/t) = f(t)/t` within `1e-10` (relative) on [`symmetry_grid`].
    pub fn is_symmetric(&self) -> bool {
        symmetry_grid().all(|t| {
            let lhs = self.eval(1.0 / t);
            let rhs = self.eval(t) / t;
            (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0)
        })
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.eval(0.0).abs() <= 1e-12
    }
}

/// `A#B` for positive definite `A` and PSD `B`.
pub fn operator_mean(a: &HermitianMatrix, b: &HermitianMatrix, f: &MonotoneFunction) -> Result<HermitianMatrix> {
    mean_with(a, b, |t| f.eval(t))
}

pub(crate) fn mean_with(a: &HermitianMatrix, b: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    crate::linalg::check_dims(a.dim(), b.dim())?;
    let es = eig(a);
    require_positive_definite(&es, "first argument of the mean")?;
    let sqrt_a = es.reconstruct_with(f64::sqrt);
    let inv_sqrt_a = es.reconstruct_with(|w| 1.0 / w.sqrt());
    let inner = inv_sqrt_a.sandwich(b)?;
    let f_inner = matrix_function(&inner, f, 0.0)?;
    sqrt_a.sandwich(&f_inner)
}

/// Geometric mean `√A √(A^{-1/2} B A^{-1/2}) √A`.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    mean_with(a, b, f64::sqrt)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomTally {
    pub violations: usize,
    pub max_residual: f64,
}

impl AxiomTally {
    fn record(&mut self, residual: f64, tol: f64) {
        if residual > tol || residual.is_nan() {
            self.violations += 1;
        }
        self.max_residual = self.max_residual.max(residual);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanAxiomsReport {
    pub mean: String,
    pub trials: usize,
    /// `A#A = A`
    pub idempotence: AxiomTally,
    /// `(αA)#(αB) = α(A#B)`
    pub homogeneity: AxiomTally,
    /// `A ≥ C, B ≥ D ⇒ A#B ≥ C#D`; residual is `max(0, −λ_min)`
    pub monotonicity: AxiomTally,
    /// `(UAU†)#(UBU†) = U(A#B)U†`, checked as an equality
    pub unitary_covariance: AxiomTally,
}

impl MeanAxiomsReport {
    pub fn total_violations(&self) -> usize {
        self.idempotence.violations
            + self.homogeneity.violations
            + self.monotonicity.violations
            + self.unitary_covariance.violations
    }
}

pub const AXIOM_TOL: f64 = 1e-8;

struct AxiomTrial {
    idem: f64,
    homog: f64,
    mono: f64,
    unitary: f64,
}

fn axiom_trial(f: &MonotoneFunction, seed: u64, i: usize) -> Result<AxiomTrial> {
    let mut rng = substream(seed, "mean-axioms", i as u64);
    let n = random_dim(&mut rng, 2, 6);
    let c = random_pd(&mut rng, n);
    let d = random_pd(&mut rng, n);
    let a = c.add(&random_psd_rank(&mut rng, n, 1 + i % n))?;
    let b = d.add(&random_psd_rank(&mut rng, n, 1 + (i / n) % n))?;
    let alpha = log_uniform(&mut rng, 0.1, 10.0);
    let u = haar_unitary(&mut rng, n);

    let ab = operator_mean(&a, &b, f)?;
    let idem = rel_diff(operator_mean(&a, &a, f)?.as_matrix(), a.as_matrix());
    let scaled = operator_mean(&a.scale(alpha), &b.scale(alpha), f)?;
    let homog = rel_diff(scaled.as_matrix(), ab.scale(alpha).as_matrix());
    let cd = operator_mean(&c, &d, f)?;
    let gap = ab.sub(&cd)?.min_eigenvalue() / ab.hs_norm().max(1.0);
    let mono = (-gap).max(0.0);
    let rotated = operator_mean(&a.congruence(&u)?, &b.congruence(&u)?, f)?;
    let unitary = rel_diff(rotated.as_matrix(), ab.congruence(&u)?.as_matrix());
    Ok(AxiomTrial { idem, homog, mono, unitary })
}

/// Random-pair check of the four mean axioms at [`AXIOM_TOL`].
pub fn mean_axioms_check(f: &MonotoneFunction, seed: u64, trials: usize) -> MeanAxiomsReport {
    let results = par::map_indices(trials, |i| axiom_trial(f, seed, i));
    let mut report = MeanAxiomsReport {
        mean: f.kind().to_string(),
        trials,
        idempotence: AxiomTally::default(),
        homogeneity: AxiomTally::default(),
        monotonicity: AxiomTally::default(),
        unitary_covariance: AxiomTally::default(),
    };
    for r in results {
        match r {
            Ok(t) => {
                report.idempotence.record(t.idem, AXIOM_TOL);
                report.homogeneity.record(t.homog, AXIOM_TOL);
                report.monotonicity.record(t.mono, AXIOM_TOL);
                report.unitary_covariance.record(t.unitary, AXIOM_TOL);
            }
            Err(_) => {
                for tally in [
                    &mut report.idempotence,
                    &mut report.homogeneity,
                    &mut report.monotonicity,
                    &mut report.unitary_covariance,
                ] {
                    tally.record(f64::NAN, AXIOM_TOL);
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    /// `λ_min(f(A) − f(B))`, negative.
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMonotoneReport {
    pub dim: usize,
    pub trials: usize,
    pub counterexample: Option<Counterexample>,
}

/// `λ_min(f(A) − f(B))` scaled by `max(1, ‖f(A)‖)`.
pub fn monotonicity_gap(f: &dyn Fn(f64) -> f64, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let fa = matrix_function(a, f, 0.0)?;
    let fb = matrix_function(b, f, 0.0)?;
    Ok(fa.sub(&fb)?.min_eigenvalue() / fa.hs_norm().max(1.0))
}

pub const OPERATOR_MONOTONE_TOL: f64 = 1e-9;

/// Samples PSD pairs `A ≥ B` and reports the first (lowest-index) pair with
/// `f(A) ≱ f(B)`.
pub fn operator_monotone_test(
    f: &(dyn Fn(f64) -> f64 + Sync),
    dim: usize,
    seed: u64,
    trials: usize,
) -> Result<OperatorMonotoneReport> {
    if dim < 2 {
        return Err(Error::Invalid("operator monotonicity test needs dim ≥ 2".into()));
    }
    let results = par::map_indices(trials, |i| -> Result<Option<Counterexample>> {
        let mut rng = substream(seed, "operator-monotone", i as u64);
        let b = random_psd(&mut rng, dim);
        let rank = 1 + i % dim;
        let a = b.add(&random_psd_rank(&mut rng, dim, rank))?;
        let gap = monotonicity_gap(f, &a, &b)?;
        Ok((gap < -OPERATOR_MONOTONE_TOL).then_some(Counterexample { trial: i, a, b, min_eigenvalue: gap }))
    });
    let mut counterexample = None;
    for r in results {
        if let Some(cx) = r? {
            counterexample = Some(cx);
            break;
        }
    }
    Ok(OperatorMonotoneReport { dim, trials, counterexample })
}

/// `true` iff `A ≥ B` and `f(A) ≱ f(B)` at the given tolerance.
pub fn is_counterexample(f: &dyn Fn(f64) -> f64, a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(psd_order_geq(a, b, tol)? && monotonicity_gap(f, a, b)? < -tol)
}

/// Three-way comparison helper: `λ_min(hi − lo)`.
pub fn order_slack(hi: &HermitianMatrix, lo: &HermitianMatrix) -> Result<f64> {
    Ok(hi.sub(lo)?.min_eigenvalue())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, inverse_pd, CMatrix};

    #[test]
    fn functions_satisfy_conditions() {
        for f in [MonotoneFunction::arithmetic(), MonotoneFunction::geometric(), MonotoneFunction::harmonic()] {
            assert!(f.is_normalized());
            assert!(f.is_symmetric(), "{:?}", f.kind());
        }
        assert!(!MonotoneFunction::arithmetic().vanishes_at_zero());
        assert!(MonotoneFunction::geometric().vanishes_at_zero());
        assert!(MonotoneFunction::harmonic().vanishes_at_zero());
        assert!(MonotoneFunction::custom("twice", |t| 2.0 * t).is_err());
        assert!(MonotoneFunction::custom_symmetric("square", |t| t * t).is_err());
        assert!(MonotoneFunction::custom("square", |t| t * t).is_ok());
    }

    #[test]
    fn mean_of_equal_arguments() {
        let mut rng = substream(2, "mean-eq", 0);
        let a = random_pd(&mut rng, 4);
        for f in [MonotoneFunction::arithmetic(), MonotoneFunction::geometric(), MonotoneFunction::harmonic()] {
            let m = operator_mean(&a, &a, &f).unwrap();
            assert!(rel_diff(m.as_matrix(), a.as_matrix()) < 1e-12);
        }
    }

    #[test]
    fn commuting_geometric_mean() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 4.0]);
        let b = HermitianMatrix::from_real_diagonal(&[4.0, 1.0]);
        let g = operator_mean(&a, &b, &MonotoneFunction::geometric()).unwrap();
        assert!(rel_diff(g.as_matrix(), HermitianMatrix::from_real_diagonal(&[2.0, 2.0]).as_matrix()) < 1e-14);

        let l = [0.3, 2.0, 5.0];
        let m = [1.7, 0.2, 5.0];
        let g = geometric_mean(&HermitianMatrix::from_real_diagonal(&l), &HermitianMatrix::from_real_diagonal(&m))
            .unwrap();
        let expected: Vec<f64> = l.iter().zip(&m).map(|(x, y)| (x * y).sqrt()).collect();
        assert!(rel_diff(g.as_matrix(), HermitianMatrix::from_real_diagonal(&expected).as_matrix()) < 1e-14);
    }

    #[test]
    fn arithmetic_mean_with_identity() {
        let mut rng = substream(2, "am", 0);
        let b = random_psd(&mut rng, 3);
        let m = operator_mean(&HermitianMatrix::identity(3), &b, &MonotoneFunction::arithmetic()).unwrap();
        let expected = HermitianMatrix::identity(3).add(&b).unwrap().scale(0.5);
        assert!(rel_diff(m.as_matrix(), expected.as_matrix()) < 1e-13);
    }

    #[test]
    fn geometric_mean_with_inverse_is_identity() {
        let mut rng = substream(2, "gm-inv", 0);
        let a = random_pd(&mut rng, 4);
        let g = geometric_mean(&a, &inverse_pd(&a).unwrap()).unwrap();
        assert!(rel_diff(g.as_matrix(), &CMatrix::identity(4, 4)) < 1e-10);
    }

    #[test]
    fn geometric_mean_riccati() {
        for i in 0..50 {
            let mut rng = substream(2, "gm-riccati", i);
            let n = random_dim(&mut rng, 2, 6);
            let a = random_pd(&mut rng, n);
            let b = random_pd(&mut rng, n);
            let g = geometric_mean(&a, &b).unwrap();
            let gag = g.as_matrix() * inverse_pd(&a).unwrap().as_matrix() * g.as_matrix();
            assert!((gag - b.as_matrix()).norm() < 1e-9 * b.hs_norm());
        }
    }

    #[test]
    fn mean_errors() {
        let singular = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        let f = MonotoneFunction::geometric();
        assert!(matches!(operator_mean(&singular, &singular, &f), Err(Error::Singular(_))));
        assert!(matches!(
            operator_mean(&HermitianMatrix::identity(2), &HermitianMatrix::identity(3), &f),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn axioms_hold_for_named_means() {
        for f in [MonotoneFunction::arithmetic(), MonotoneFunction::geometric(), MonotoneFunction::harmonic()] {
            let r = mean_axioms_check(&f, 4, 200);
            assert_eq!(r.total_violations(), 0, "{r:?}");
        }
    }

    #[test]
    fn square_breaks_monotonicity_axiom() {
        let f = MonotoneFunction::custom("square", |t| t * t).unwrap();
        let r = mean_axioms_check(&f, 4, 200);
        assert!(r.monotonicity.violations > 0);
    }

    #[test]
    fn hand_counterexample_for_square() {
        let a = HermitianMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let b = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(is_counterexample(&|t| t * t, &a, &b, 1e-9).unwrap());
        assert!(!is_counterexample(&f64::sqrt, &a, &b, 1e-9).unwrap());
        // A² − B² = [[4,3],[3,2]] has determinant −1
        let a2 = a.as_matrix() * a.as_matrix() - b.as_matrix() * b.as_matrix();
        assert_eq!(a2[(0, 1)], c(3.0, 0.0));
        assert!((a2.determinant() - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn operator_monotone_search() {
        let r = operator_monotone_test(&f64::sqrt, 2, 9, 10_000).unwrap();
        assert!(r.counterexample.is_none());
        let r = operator_monotone_test(&|t| t, 3, 9, 500).unwrap();
        assert!(r.counterexample.is_none());
        let r = operator_monotone_test(&|t| t * t, 2, 9, 10_000).unwrap();
        let cx = r.counterexample.expect("t² is not operator monotone");
        assert!(cx.min_eigenvalue < 0.0);
        assert!(operator_monotone_test(&|t| t, 1, 9, 10).is_err());
        assert!(matches!(operator_monotone_test(&|t: f64| (t - 100.0).sqrt(), 2, 9, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn scalar_reduction() {
        let a = HermitianMatrix::from_real_diagonal(&[3.0]);
        let b = HermitianMatrix::from_real_diagonal(&[12.0]);
        let am = operator_mean(&a, &b, &MonotoneFunction::arithmetic()).unwrap();
        let gm = operator_mean(&a, &b, &MonotoneFunction::geometric()).unwrap();
        let hm = operator_mean(&a, &b, &MonotoneFunction::harmonic()).unwrap();
        assert!((am.as_matrix()[(0, 0)].re - 7.5).abs() < 1e-12);
        assert!((gm.as_matrix()[(0, 0)].re - 6.0).abs() < 1e-12);
        assert!((hm.as_matrix()[(0, 0)].re - 4.8).abs() < 1e-12);
    }
}
