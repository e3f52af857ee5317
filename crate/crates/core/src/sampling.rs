//! Random matrix ensembles used by the stress tests and experiments.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{c, eig, CMatrix, CVector, HermitianMatrix};
use crate::rng::Rng;
use crate::state::{DensityMatrix, TangentPerturbation};

/// Complex Ginibre matrix, entries with `E|z|² = 1`.
pub fn ginibre(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * s, im * s)
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase of `R` removed).
pub fn haar_unitary(rng: &mut Rng, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        q.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    q
}

/// Haar-random isometry `V` (`rows × cols`, `V†V = 1`).
pub fn haar_isometry(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols);
    haar_unitary(rng, rows).columns(0, cols).into_owned()
}

pub fn random_hermitian(rng: &mut Rng, n: usize) -> HermitianMatrix {
    let g = ginibre(rng, n, n);
    HermitianMatrix::symmetrize(&g + g.adjoint())
}

/// Wishart-type PSD matrix `G G† / n`.
pub fn random_psd(rng: &mut Rng, n: usize) -> HermitianMatrix {
    let g = ginibre(rng, n, n);
    HermitianMatrix::symmetrize(&g * g.adjoint() / c(n as f64, 0.0))
}

/// PSD matrix of the given rank, `G G† / n` with `G` of shape `n × rank`.
pub fn random_psd_rank(rng: &mut Rng, n: usize, rank: usize) -> HermitianMatrix {
    let g = ginibre(rng, n, rank);
    HermitianMatrix::symmetrize(&g * g.adjoint() / c(n as f64, 0.0))
}

/// Positive definite matrix `G G†/n + 0.05·1`, spectrum bounded away from zero.
pub fn random_pd(rng: &mut Rng, n: usize) -> HermitianMatrix {
    random_psd(rng, n).add(&HermitianMatrix::identity(n).scale(0.05)).expect("same dims")
}

/// Density matrix from the Hilbert–Schmidt (Ginibre) ensemble.
pub fn random_density(rng: &mut Rng, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n, n);
    DensityMatrix::from_unnormalized(&g * g.adjoint())
}

/// Hilbert–Schmidt density matrix conditioned on `λ_min ≥ floor`.
pub fn random_invertible_density(rng: &mut Rng, n: usize, floor: f64) -> DensityMatrix {
    loop {
        let rho = random_density(rng, n);
        if rho.min_eigenvalue() >= floor {
            return rho;
        }
    }
}

/// Default eigenvalue floor for "random invertible" states of dimension `n`.
pub fn invertible_floor(n: usize) -> f64 {
    1e-3 / n as f64
}

pub fn random_unit_vector(rng: &mut Rng, n: usize) -> CVector {
    let g = ginibre(rng, n, 1).column(0).into_owned();
    let norm = g.norm();
    g / c(norm, 0.0)
}

pub fn random_pure(rng: &mut Rng, n: usize) -> DensityMatrix {
    DensityMatrix::pure(&random_unit_vector(rng, n)).expect("nonzero")
}

/// Traceless Hermitian direction with unit HS norm.
pub fn random_tangent(rng: &mut Rng, n: usize) -> TangentPerturbation {
    let h = random_hermitian(rng, n);
    let shift = HermitianMatrix::identity(n).scale(h.trace() / n as f64);
    let h = h.sub(&shift).expect("same dims");
    let norm = h.hs_norm();
    TangentPerturbation::new(h.scale(1.0 / norm)).expect("traceless")
}

/// A matrix `A` with `Tr AA† = 1`.
pub fn random_purification_matrix(rng: &mut Rng, n: usize) -> CMatrix {
    let g = ginibre(rng, n, n);
    let norm = g.norm();
    g / c(norm, 0.0)
}

/// Flat Dirichlet point of the `(n−1)`-simplex.
pub fn flat_dirichlet(rng: &mut Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Kraus operators of a random channel via a Haar isometry
/// `C^n → C^n ⊗ C^env`.
pub fn random_kraus(rng: &mut Rng, n: usize, env: usize) -> Vec<CMatrix> {
    let v = haar_isometry(rng, n * env, n);
    (0..env).map(|k| v.rows(k * n, n).into_owned()).collect()
}

/// Random POVM with `outcomes` elements, each built from a block of rows of
/// a Haar isometry.
pub fn random_povm_elements(rng: &mut Rng, n: usize, outcomes: usize) -> Vec<HermitianMatrix> {
    let v = haar_isometry(rng, n * outcomes, n);
    (0..outcomes)
        .map(|k| {
            let block = v.rows(k * n, n);
            HermitianMatrix::symmetrize(block.adjoint() * block)
        })
        .collect()
}

pub fn random_dim(rng: &mut Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Log-uniform scalar in `[lo, hi]`.
pub fn log_uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Min eigenvalue convenience for diagnostics.
pub fn spectrum(h: &HermitianMatrix) -> Vec<f64> {
    eig(h).eigenvalues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = substream(5, "haar", 0);
        let u = haar_unitary(&mut rng, 4);
        assert!((u.adjoint() * &u - CMatrix::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn kraus_is_trace_preserving() {
        let mut rng = substream(5, "kraus", 0);
        let ks = random_kraus(&mut rng, 3, 3);
        let sum = ks.iter().fold(CMatrix::zeros(3, 3), |acc, k| acc + k.adjoint() * k);
        assert!((sum - CMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn povm_resolves_identity() {
        let mut rng = substream(5, "povm", 0);
        let es = random_povm_elements(&mut rng, 3, 4);
        let sum = es.iter().fold(CMatrix::zeros(3, 3), |acc, e| acc + e.as_matrix());
        assert!((sum - CMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn invertible_density_respects_floor() {
        let mut rng = substream(5, "inv", 0);
        for n in 2..6 {
            let rho = random_invertible_density(&mut rng, n, invertible_floor(n));
            assert!(rho.min_eigenvalue() >= invertible_floor(n));
        }
    }
}
