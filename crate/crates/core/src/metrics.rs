//! Monotone Riemannian metrics on density matrices.
//!
//! In the eigenbasis of `ρ = diag(λ)` the squared line element is
//!
//! ```text
//! ds² = ¼ [ Σ_i dσ_ii² / λ_i + 2 Σ_{i<j} |dσ_ij|² / (λ_j f(λ_i/λ_j)) ]
//! ```
//!
//! with `dσ = V† dρ V`. Arbitrary `ρ` are handled by conjugating into that
//! basis; the value does not depend on which eigenbasis is picked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dims, CMatrix, HermitianMatrix};
use crate::means::{operator_monotone_test, MonotoneFunction};
use crate::state::{DensityMatrix, TangentPerturbation};

/// Eigenvalues at or below this are treated as singular.
pub const SINGULAR_FLOOR: f64 = 1e-10;

pub fn monotone_ds2(rho: &DensityMatrix, drho: &TangentPerturbation, f: &MonotoneFunction) -> Result<f64> {
    check_dims(rho.dim(), drho.dim())?;
    let es = rho.eig();
    let lam = &es.eigenvalues;
    if lam[0] <= SINGULAR_FLOOR {
        return Err(Error::Boundary(format!(
            "density matrix is singular (min eigenvalue {:e}); the metric diverges",
            lam[0]
        )));
    }
    let v = &es.eigenvectors;
    let ds = v.adjoint() * drho.as_matrix() * v;
    let n = rho.dim();
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..n {
        diag += ds[(i, i)].re.powi(2) / lam[i];
        for j in (i + 1)..n {
            let mag2 = 0.5 * (ds[(i, j)].norm_sqr() + ds[(j, i)].norm_sqr());
            off += mag2 / (lam[j] * f.eval(lam[i] / lam[j]));
        }
    }
    Ok(0.25 * (diag + 2.0 * off))
}

/// `Φ(X) = Σ_k K_k X K_k†`.
pub fn apply_kraus(kraus: &[CMatrix], x: &CMatrix) -> CMatrix {
    kraus
        .iter()
        .fold(CMatrix::zeros(x.nrows(), x.ncols()), |acc, k| acc + k * x * k.adjoint())
}

pub fn channel_state(kraus: &[CMatrix], rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_unnormalized(apply_kraus(kraus, rho.as_matrix()))
}

pub fn channel_tangent(kraus: &[CMatrix], d: &TangentPerturbation) -> Result<TangentPerturbation> {
    TangentPerturbation::new(HermitianMatrix::symmetrize(apply_kraus(kraus, d.as_matrix())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub function: String,
    /// Condition i): no counterexample in the sampled dims 2–4.
    pub operator_monotone: bool,
    /// Condition ii): `f(1/t) = f(t)/t`.
    pub symmetric: bool,
    /// Condition iii): `f(1) = 1`.
    pub normalized: bool,
    /// `f(0) = 0`: the metric diverges on the boundary of the state space.
    pub boundary_divergent: bool,
}

impl ConditionsReport {
    pub fn all_pass(&self) -> bool {
        self.operator_monotone && self.symmetric && self.normalized
    }
}

/// Trials per dimension in the operator-monotonicity part of
/// [`f_conditions_check`].
pub const CONDITION_TRIALS: usize = 2000;

pub fn f_conditions_check(f: &MonotoneFunction, seed: u64) -> Result<ConditionsReport> {
    let eval = |t: f64| f.eval(t);
    let mut operator_monotone = true;
    for dim in 2..=4 {
        let r = operator_monotone_test(&eval, dim, seed ^ dim as u64, CONDITION_TRIALS)?;
        if r.counterexample.is_some() {
            operator_monotone = false;
            break;
        }
    }
    Ok(ConditionsReport {
        function: f.kind().to_string(),
        operator_monotone,
        symmetric: f.is_symmetric(),
        normalized: f.is_normalized(),
        boundary_divergent: f.vanishes_at_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{fisher_rao_ds2, ProbabilityVector, TangentVector};
    use crate::linalg::c;
    use crate::rng::substream;
    use crate::sampling::{haar_unitary, invertible_floor, random_invertible_density, random_kraus, random_tangent};
    use approx::assert_abs_diff_eq;

    fn named() -> [MonotoneFunction; 3] {
        [MonotoneFunction::arithmetic(), MonotoneFunction::geometric(), MonotoneFunction::harmonic()]
    }

    #[test]
    fn maximally_mixed_qubit_diagonal() {
        let eps = 1e-3;
        let rho = DensityMatrix::maximally_mixed(2);
        let d = TangentPerturbation::new(HermitianMatrix::from_real_diagonal(&[eps, -eps])).unwrap();
        for f in named() {
            assert_abs_diff_eq!(monotone_ds2(&rho, &d, &f).unwrap(), eps * eps, epsilon = 1e-18);
        }
    }

    #[test]
    fn off_diagonal_arithmetic() {
        let (l1, l2, x) = (0.3, 0.7, 0.01);
        let rho = DensityMatrix::from_diagonal(&[l1, l2]).unwrap();
        let d = TangentPerturbation::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(x, 0.0), c(x, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let v = monotone_ds2(&rho, &d, &MonotoneFunction::arithmetic()).unwrap();
        assert_abs_diff_eq!(v, x * x / (l1 + l2), epsilon = 1e-18);
    }

    #[test]
    fn zero_direction() {
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let d = TangentPerturbation::new(HermitianMatrix::zeros(3)).unwrap();
        assert_eq!(monotone_ds2(&rho, &d, &MonotoneFunction::geometric()).unwrap(), 0.0);
    }

    #[test]
    fn singular_and_mismatch() {
        let rho = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let d = TangentPerturbation::new(HermitianMatrix::from_real_diagonal(&[0.1, -0.1])).unwrap();
        assert!(matches!(monotone_ds2(&rho, &d, &MonotoneFunction::arithmetic()), Err(Error::Boundary(_))));
        let rho3 = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            monotone_ds2(&rho3, &d, &MonotoneFunction::arithmetic()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classical_reduction() {
        let p = [0.1, 0.25, 0.3, 0.35];
        let dp = [0.02, -0.01, 0.005, -0.015];
        let expected = fisher_rao_ds2(
            &ProbabilityVector::new(p.to_vec()).unwrap(),
            &TangentVector::new(dp.to_vec()).unwrap(),
        )
        .unwrap();
        let rho = DensityMatrix::from_diagonal(&p).unwrap();
        let d = TangentPerturbation::new(HermitianMatrix::from_real_diagonal(&dp)).unwrap();
        for f in named() {
            let v = monotone_ds2(&rho, &d, &f).unwrap();
            assert!((v - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn near_degenerate_spectrum_is_stable() {
        let rho = DensityMatrix::from_diagonal(&[0.25, 0.25 + 1e-8, 0.5 - 1e-8]).unwrap();
        let mut rng = substream(1, "near-degenerate", 0);
        let d = random_tangent(&mut rng, 3);
        let exact_deg = DensityMatrix::from_diagonal(&[0.25, 0.25, 0.5]).unwrap();
        for f in named() {
            let a = monotone_ds2(&rho, &d, &f).unwrap();
            let b = monotone_ds2(&exact_deg, &d, &f).unwrap();
            assert!((a - b).abs() < 1e-6 * b, "{a} {b}");
        }
    }

    #[test]
    fn unitary_invariance() {
        for i in 0..100 {
            let mut rng = substream(8, "metric-unitary", i);
            let n = 2 + (i as usize % 4);
            let rho = random_invertible_density(&mut rng, n, invertible_floor(n));
            let d = random_tangent(&mut rng, n);
            let u = haar_unitary(&mut rng, n);
            let rho_u = rho.conjugate(&u).unwrap();
            let d_u = TangentPerturbation::new(d.hermitian().congruence(&u).unwrap()).unwrap();
            for f in named() {
                let a = monotone_ds2(&rho, &d, &f).unwrap();
                let b = monotone_ds2(&rho_u, &d_u, &f).unwrap();
                assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn channels_contract_the_metric() {
        for i in 0..200 {
            let mut rng = substream(8, "metric-cptp", i);
            let n = 2 + (i as usize % 3);
            let rho = random_invertible_density(&mut rng, n, invertible_floor(n));
            let d = random_tangent(&mut rng, n);
            let ks = random_kraus(&mut rng, n, n);
            let out = channel_state(&ks, &rho);
            let dout = channel_tangent(&ks, &d).unwrap();
            for f in named() {
                let before = monotone_ds2(&rho, &d, &f).unwrap();
                let after = monotone_ds2(&out, &dout, &f).unwrap();
                assert!(after <= before + 1e-9 * before.max(1.0), "{:?}: {after} > {before}", f.kind());
            }
        }
    }

    #[test]
    fn conditions_report() {
        let r = f_conditions_check(&MonotoneFunction::arithmetic(), 1).unwrap();
        assert!(r.all_pass() && !r.boundary_divergent);
        let r = f_conditions_check(&MonotoneFunction::harmonic(), 1).unwrap();
        assert!(r.all_pass() && r.boundary_divergent);
        let sq = MonotoneFunction::custom("square", |t| t * t).unwrap();
        let r = f_conditions_check(&sq, 1).unwrap();
        assert!(!r.operator_monotone);
        assert!(!r.symmetric);
        assert!(r.normalized);
    }
}
