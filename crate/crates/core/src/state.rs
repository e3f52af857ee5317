//! Density matrices and tangent perturbations.

use crate::error::{Error, Result};
use crate::linalg::{c, eig, CMatrix, CVector, EigenSystem, HermitianMatrix};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

const TRACE_INPUT_TOL: f64 = 1e-6;
const NEG_EIG_TOL: f64 = 1e-12;

impl DensityMatrix {
    /// Validates positivity and unit trace; a trace within `1e-6` of one
    /// is renormalized to exactly one.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_INPUT_TOL {
            return Err(Error::Invalid(format!("density matrix trace {tr} is not 1")));
        }
        let h = h.scale(1.0 / tr);
        let lo = h.min_eigenvalue();
        if lo < -NEG_EIG_TOL {
            return Err(Error::Invalid(format!("density matrix has negative eigenvalue {lo:e}")));
        }
        Ok(DensityMatrix(h))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Normalizes `m` by its trace (used for outputs of channels and paths,
    /// whose trace is one up to rounding).
    pub(crate) fn from_unnormalized(m: CMatrix) -> Self {
        let h = HermitianMatrix::symmetrize(m);
        let tr = h.trace();
        DensityMatrix(h.scale(1.0 / tr))
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(p))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix(HermitianMatrix::identity(n).scale(1.0 / n as f64))
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(DensityMatrix(HermitianMatrix::outer(&(psi / c(norm, 0.0)))))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.0.as_matrix()
    }

    pub fn eig(&self) -> EigenSystem {
        eig(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.min_eigenvalue()
    }

    /// Conjugation by a unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        Ok(DensityMatrix::from_unnormalized(self.0.congruence(u)?.into_matrix()))
    }
}

/// Traceless Hermitian direction `dρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentPerturbation(HermitianMatrix);

impl TangentPerturbation {
    /// Accepts a trace up to `1e-9·max(1, ‖dρ‖)` and projects it away.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let n = h.dim();
        let tr = h.trace();
        if tr.abs() > 1e-9 * h.hs_norm().max(1.0) {
            return Err(Error::Invalid(format!("tangent perturbation has trace {tr:e}")));
        }
        let shift = HermitianMatrix::identity(n).scale(tr / n as f64);
        Ok(TangentPerturbation(h.sub(&shift)?))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.0.as_matrix()
    }

    pub fn scale(&self, t: f64) -> Self {
        TangentPerturbation(self.0.scale(t))
    }
}

/// `ρ + dρ` as a density matrix (fails if the step leaves the state space).
pub fn displace(rho: &DensityMatrix, d: &TangentPerturbation) -> Result<DensityMatrix> {
    DensityMatrix::new(rho.hermitian().add(d.hermitian())?)
}
