//! Hermitian matrix kernel: eigendecomposition, spectral matrix functions,
//! Löwner ordering and the Hilbert–Schmidt inner product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative tolerance for matrix comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack allowed below a domain floor before a matrix function refuses.
pub const DOMAIN_SLACK: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A complex Hermitian matrix.
///
/// Construction symmetrizes the input as `(H + H†)/2`, so the stored
/// entries are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::mismatch(m.nrows(), m.ncols()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        Ok(Self::symmetrize(m))
    }

    /// Hermitian part of a square matrix. Panics on non-square input.
    pub fn symmetrize(m: CMatrix) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "square matrix required");
        let mut h = m;
        for i in 0..n {
            h[(i, i)] = c(h[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
        }
        HermitianMatrix(h)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0)));
        HermitianMatrix(CMatrix::from_diagonal(&v))
    }

    /// Real symmetric matrix given as rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::mismatch(n, r.len()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| c(rows[i][j], 0.0)))
    }

    /// Outer product |ψ⟩⟨ψ|.
    pub fn outer(psi: &CVector) -> Self {
        Self::symmetrize(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        HermitianMatrix(self.0.map(|z| z * alpha))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(HermitianMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(HermitianMatrix(&self.0 - &other.0))
    }

    /// `X H X†` for any square `X` of matching size.
    pub fn congruence(&self, x: &CMatrix) -> Result<Self> {
        check_dims(self.dim(), x.ncols())?;
        Ok(Self::symmetrize(x * &self.0 * x.adjoint()))
    }

    /// `√Hᵃ K √Hᵃ`-style sandwich `S K S` for Hermitian `S`.
    pub fn sandwich(&self, inner: &Self) -> Result<Self> {
        check_dims(self.dim(), inner.dim())?;
        Ok(Self::symmetrize(&self.0 * &inner.0 * &self.0))
    }

    pub fn hs_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig(self).eigenvalues[0]
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::mismatch(expected, found))
    }
}

/// Spectral decomposition `H = V diag(w) V†` with ascending `w`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `V diag(g(w)) V†`.
    pub fn reconstruct_with(&self, mut g: impl FnMut(f64) -> f64) -> HermitianMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            let gw = g(w);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= gw);
        }
        HermitianMatrix::symmetrize(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|w| w)
    }
}

/// Rotate `v` so its first component of largest modulus is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("non-empty vector");
    let phase = v[pivot].conj() / v[pivot].norm();
    v.iter_mut().for_each(|z| *z *= phase);
}

/// Hermitian eigendecomposition, eigenvalues ascending, phases fixed.
pub fn eig(h: &HermitianMatrix) -> EigenSystem {
    let n = h.dim();
    if n == 0 {
        return EigenSystem { eigenvalues: vec![], eigenvectors: CMatrix::zeros(0, 0) };
    }
    let se = SymmetricEigen::new(h.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]).then(a.cmp(&b)));
    let eigenvalues = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = se.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        eigenvectors.set_column(dst, &col);
    }
    EigenSystem { eigenvalues, eigenvectors }
}

/// `f(H) = V f(diag(w)) V†`.
///
/// Fails with a domain error when an eigenvalue sits below `domain_floor`
/// by more than [`DOMAIN_SLACK`]; eigenvalues inside the slack are clamped
/// up to the floor before `f` is applied.
pub fn matrix_function(
    h: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    domain_floor: f64,
) -> Result<HermitianMatrix> {
    let es = eig(h);
    if let Some(&w) = es.eigenvalues.first() {
        if w < domain_floor - DOMAIN_SLACK {
            return Err(Error::Domain(format!(
                "eigenvalue {w:e} below domain floor {domain_floor:e}"
            )));
        }
    }
    let mut bad = None;
    let out = es.reconstruct_with(|w| {
        let y = f(w.max(domain_floor));
        if !y.is_finite() {
            bad = Some(w);
        }
        y
    });
    match bad {
        Some(w) => Err(Error::Domain(format!("function undefined at eigenvalue {w:e}"))),
        None => Ok(out),
    }
}

/// Positive square root of a PSD matrix.
pub fn sqrtm(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_function(h, f64::sqrt, 0.0)
}

/// Fails with `Singular` unless `λ_min > 1e-12·λ_max`.
pub fn require_positive_definite(es: &EigenSystem, what: &str) -> Result<()> {
    let lo = es.eigenvalues.first().copied().unwrap_or(0.0);
    let hi = es.eigenvalues.last().copied().unwrap_or(0.0).abs();
    if lo > 1e-12 * hi.max(f64::MIN_POSITIVE) && lo > 0.0 {
        Ok(())
    } else {
        Err(Error::Singular(format!("{what} is not positive definite (min eigenvalue {lo:e})")))
    }
}

/// `(√H, H^{-1/2})` for a positive definite `H`.
pub fn sqrt_and_inv_sqrt(h: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let es = eig(h);
    require_positive_definite(&es, "matrix")?;
    Ok((es.reconstruct_with(f64::sqrt), es.reconstruct_with(|w| 1.0 / w.sqrt())))
}

pub fn inverse_pd(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let es = eig(h);
    require_positive_definite(&es, "matrix")?;
    Ok(es.reconstruct_with(|w| 1.0 / w))
}

/// True iff `λ_min(A − B) ≥ −tol`.
pub fn psd_order_geq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(a.sub(b)?.min_eigenvalue() >= -tol)
}

/// Hilbert–Schmidt inner product `⟨A|B⟩ = Tr(B A†)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::mismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| y * x.conj()).sum())
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.norm()
}

/// Relative HS distance `‖A − B‖ / max(‖B‖, 1e-300)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}
