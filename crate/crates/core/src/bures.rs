//! Bures–Uhlmann geometry: fidelity, purifications, the horizontal lift and
//! geodesics as projected great circles of the Hilbert–Schmidt unit sphere.

use crate::error::{Error, Result};
use crate::linalg::{
    c, check_dims, hs_inner, require_positive_definite, sqrtm, CMatrix, CVector, HermitianMatrix,
};
use crate::means::MonotoneFunction;
use crate::metrics::monotone_ds2;
use crate::state::{DensityMatrix, TangentPerturbation};

/// Eigenvalues below this multiple of `λ_max` are treated as zero when
/// factoring `ρ = BB†`.
const RANK_CUTOFF: f64 = 64.0 * f64::EPSILON;

/// `B = V diag(√λ)` with `ρ = BB†`, dropping eigenvalues at rounding level.
fn half_factor(rho: &DensityMatrix) -> CMatrix {
    let es = rho.eig();
    let cut = RANK_CUTOFF * es.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let mut b = es.eigenvectors.clone();
    for (k, &w) in es.eigenvalues.iter().enumerate() {
        let s = if w > cut { w.sqrt() } else { 0.0 };
        b.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    b
}

/// Root fidelity `Tr √(√ρ₂ ρ₁ √ρ₂)`, clamped to `[0, 1]`.
///
/// Evaluated as the trace norm of `B₁†B₂` for factors `ρ_k = B_k B_k†`, which
/// keeps rank-deficient states accurate.
pub fn root_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_dims(rho1.dim(), rho2.dim())?;
    let overlap = half_factor(rho1).adjoint() * half_factor(rho2);
    let tr: f64 = overlap.singular_values().iter().sum();
    Ok(tr.clamp(0.0, 1.0))
}

/// Fidelity `F = (Tr √(√ρ₂ ρ₁ √ρ₂))²`.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(root_fidelity(rho1, rho2)?.powi(2))
}

/// Bures angle `arccos √F ∈ [0, π/2]`.
pub fn bures_angle(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(root_fidelity(rho1, rho2)?.acos())
}

/// A point `A` of the Hilbert–Schmidt unit sphere, projecting to `AA†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Purification(CMatrix);

impl Purification {
    pub fn new(a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::mismatch(a.nrows(), a.ncols()));
        }
        let n2 = a.norm_squared();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("purification has Tr AA† = {n2}")));
        }
        Ok(Purification(a / c(n2.sqrt(), 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Right action of a unitary on the fibre.
    pub fn gauge(&self, u: &CMatrix) -> Result<Self> {
        check_dims(self.dim(), u.nrows())?;
        Ok(Purification(&self.0 * u))
    }
}

/// Canonical purification `A = √ρ`.
pub fn purify(rho: &DensityMatrix) -> Purification {
    let s = sqrtm(rho.hermitian()).expect("density matrices are PSD");
    Purification(s.into_matrix())
}

/// `Π: A ↦ AA†`.
pub fn project(a: &Purification) -> DensityMatrix {
    DensityMatrix::from_unnormalized(&a.0 * a.0.adjoint())
}

/// `ρ₁^{-1/2} √(√ρ₁ ρ₂ √ρ₁) ρ₁^{-1/2}`: the geometric mean of `ρ₁⁻¹` and `ρ₂`.
///
/// Requires `ρ₁` positive definite.
pub fn transition_operator(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<HermitianMatrix> {
    check_dims(rho1.dim(), rho2.dim())?;
    let es = rho1.eig();
    require_positive_definite(&es, "ρ₁")?;
    let s1 = es.reconstruct_with(|w| w.sqrt());
    let inv_s1 = es.reconstruct_with(|w| 1.0 / w.sqrt());
    let middle = sqrtm(&s1.sandwich(rho2.hermitian())?)?;
    inv_s1.sandwich(&middle)
}

/// Horizontal lift `A₂ = M(ρ₁, ρ₂) A₁` of the geodesic from `ρ₁` to `ρ₂`.
pub fn horizontal_lift(rho1: &DensityMatrix, rho2: &DensityMatrix, a1: &Purification) -> Result<Purification> {
    check_dims(rho1.dim(), a1.dim())?;
    let m = transition_operator(rho1, rho2)?;
    let proj = &a1.0 * a1.0.adjoint();
    if (proj - rho1.as_matrix()).norm() > 1e-8 {
        return Err(Error::Invalid("A₁ does not purify ρ₁".into()));
    }
    Ok(Purification(m.as_matrix() * &a1.0))
}

/// Great circle through `A₁ = √ρ₁` and its horizontal lift to `ρ₂`,
/// parametrized by arc length: `A(t) = cos t Ā₁ + sin t Ā₂` with `Ā₁, Ā₂`
/// orthonormal in the real HS inner product.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    a1: CMatrix,
    a2: CMatrix,
    t_star: f64,
}

impl GeodesicPath {
    pub fn dim(&self) -> usize {
        self.a1.nrows()
    }

    /// Parameter at which the path reaches `ρ₂`; equals the Bures angle.
    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn start(&self) -> &CMatrix {
        &self.a1
    }

    pub fn orthonormal_partner(&self) -> &CMatrix {
        &self.a2
    }

    pub fn amplitude(&self, t: f64) -> CMatrix {
        &self.a1 * c(t.cos(), 0.0) + &self.a2 * c(t.sin(), 0.0)
    }

    pub fn amplitude_velocity(&self, t: f64) -> CMatrix {
        &self.a1 * c(-t.sin(), 0.0) + &self.a2 * c(t.cos(), 0.0)
    }

    /// `ρ(t) = A(t) A(t)†` (as a Hermitian matrix; unit trace by construction).
    pub fn rho_at(&self, t: f64) -> HermitianMatrix {
        let a = self.amplitude(t);
        HermitianMatrix::symmetrize(&a * a.adjoint())
    }

    pub fn state_at(&self, t: f64) -> DensityMatrix {
        DensityMatrix::from_unnormalized(self.rho_at(t).into_matrix())
    }

    /// `dρ/dt = A' A† + A A'†`.
    pub fn rho_velocity(&self, t: f64) -> HermitianMatrix {
        let a = self.amplitude(t);
        let da = self.amplitude_velocity(t);
        let x = &da * a.adjoint();
        HermitianMatrix::symmetrize(&x + x.adjoint())
    }

    /// Bures length of `ρ(t)` over `[t0, t1]` by composite Simpson quadrature
    /// of `√ds²` with the arithmetic-mean metric.
    pub fn bures_length(&self, t0: f64, t1: f64, intervals: usize) -> Result<f64> {
        let n = intervals.max(2) & !1;
        let h = (t1 - t0) / n as f64;
        let f = MonotoneFunction::arithmetic();
        let speed = |t: f64| -> Result<f64> {
            let d = TangentPerturbation::new(self.rho_velocity(t))?;
            Ok(monotone_ds2(&self.state_at(t), &d, &f)?.sqrt())
        };
        let mut sum = speed(t0)? + speed(t1)?;
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * speed(t0 + k as f64 * h)?;
        }
        Ok(sum * h / 3.0)
    }
}

/// Bures–Uhlmann geodesic from `ρ₁` through `ρ₂` (both positive definite).
pub fn geodesic(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<GeodesicPath> {
    check_dims(rho1.dim(), rho2.dim())?;
    require_positive_definite(&rho2.eig(), "ρ₂")?;
    if (rho1.as_matrix() - rho2.as_matrix()).norm() <= 1e-12 {
        return Err(Error::Degenerate("geodesic endpoints coincide".into()));
    }
    let a1 = purify(rho1);
    let lifted = horizontal_lift(rho1, rho2, &a1)?;
    let a1 = a1.0;
    let a2 = lifted.0;
    let cos = hs_inner(&a1, &a2)?.re;
    let perp = &a2 - &a1 * c(cos, 0.0);
    let sin = perp.norm();
    if sin <= 1e-14 {
        return Err(Error::Degenerate("endpoints are not separated on the HS sphere".into()));
    }
    let t_star = sin.atan2(cos);
    Ok(GeodesicPath { a1, a2: perp / c(sin, 0.0), t_star })
}

/// Fubini–Study distance `arccos(|⟨ψ|φ⟩| / (‖ψ‖‖φ‖))`.
pub fn fubini_study_distance(psi: &CVector, phi: &CVector) -> Result<f64> {
    check_dims(psi.len(), phi.len())?;
    let (np, nf) = (psi.norm(), phi.norm());
    if np == 0.0 || nf == 0.0 {
        return Err(Error::ZeroVector);
    }
    let overlap = psi.dotc(phi).norm() / (np * nf);
    Ok(overlap.clamp(0.0, 1.0).acos())
}

/// Qubit state `½[[1+z, x−iy], [x+iy, 1−z]]` for a Bloch vector `(x, y, z)`.
pub fn qubit_state(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y), c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
    ))
}

/// Tangent direction of [`qubit_state`] for a Bloch displacement.
pub fn qubit_tangent(dx: f64, dy: f64, dz: f64) -> TangentPerturbation {
    TangentPerturbation::from_matrix(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.5 * dz, 0.0), c(0.5 * dx, -0.5 * dy), c(0.5 * dx, 0.5 * dy), c(-0.5 * dz, 0.0)],
    ))
    .expect("traceless by construction")
}

/// Bloch vector of a qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    check_dims(2, rho.dim())?;
    let m = rho.as_matrix();
    Ok([2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re])
}

/// Closed-form Bures metric inside the Bloch ball:
/// `¼ [dx² + dy² + dz² + (x dx + y dy + z dz)² / (1 − r²)]`.
pub fn qubit_bures_ds2(pos: [f64; 3], d: [f64; 3]) -> Result<f64> {
    let r2: f64 = pos.iter().map(|v| v * v).sum();
    if r2 >= 1.0 {
        return Err(Error::Boundary(format!("Bloch vector of length {} is not interior", r2.sqrt())));
    }
    let flat: f64 = d.iter().map(|v| v * v).sum();
    let radial: f64 = pos.iter().zip(&d).map(|(p, v)| p * v).sum();
    Ok(0.25 * (flat + radial * radial / (1.0 - r2)))
}
