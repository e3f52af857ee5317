//! POVMs, measurement-induced distributions and the optimal (Fuchs–Caves)
//! measurement for distinguishing two states.

use serde::{Deserialize, Serialize};

use crate::bures::{bloch_vector, bures_angle, transition_operator};
use crate::classical::{fr_geodesic_distance, ProbabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{c, check_dims, eig, CMatrix, CVector, EigenSystem, HermitianMatrix};
use crate::par;
use crate::state::DensityMatrix;

/// Positive operators resolving the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::Invalid("empty POVM".into()))?;
        let n = first.dim();
        let mut sum = CMatrix::zeros(n, n);
        for e in &elements {
            check_dims(n, e.dim())?;
            let lo = e.min_eigenvalue();
            if lo < -1e-12 {
                return Err(Error::Invalid(format!("POVM element has eigenvalue {lo:e}")));
            }
            sum += e.as_matrix();
        }
        let defect = (sum - CMatrix::identity(n, n)).norm();
        if defect > 1e-10 * (n as f64).sqrt() {
            return Err(Error::Invalid(format!("POVM elements sum to identity only within {defect:e}")));
        }
        Ok(Povm { elements })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(v: &CMatrix) -> Result<Self> {
        Self::new((0..v.ncols()).map(|k| HermitianMatrix::outer(&v.column(k).into_owned())).collect())
    }

    /// Computational-basis measurement.
    pub fn computational(n: usize) -> Self {
        Self::from_basis(&CMatrix::identity(n, n)).expect("identity is unitary")
    }

    /// Qubit trine `{⅔|ψ_k⟩⟨ψ_k|}` with Bloch vectors 120° apart in the x–z plane.
    pub fn trine() -> Self {
        let elems = (0..3)
            .map(|k| {
                let half = std::f64::consts::PI * f64::from(k) / 3.0;
                let psi = CVector::from_vec(vec![c(half.cos(), 0.0), c(half.sin(), 0.0)]);
                HermitianMatrix::outer(&psi).scale(2.0 / 3.0)
            })
            .collect();
        Self::new(elems).expect("trine resolves the identity")
    }

    /// Projective qubit measurement along a Bloch axis.
    pub fn qubit_axis(axis: [f64; 3]) -> Result<Self> {
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let [x, y, z] = axis.map(|v| v / norm);
        let proj = |s: f64| {
            HermitianMatrix::new(CMatrix::from_row_slice(
                2,
                2,
                &[c(0.5 * (1.0 + s * z), 0.0), c(0.5 * s * x, -0.5 * s * y), c(0.5 * s * x, 0.5 * s * y), c(0.5 * (1.0 - s * z), 0.0)],
            ))
        };
        Self::new(vec![proj(1.0)?, proj(-1.0)?])
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }
}

/// `p_i = Tr E_i ρ`.
pub fn induced_distribution(povm: &Povm, rho: &DensityMatrix) -> Result<ProbabilityVector> {
    check_dims(povm.dim(), rho.dim())?;
    let p = povm
        .elements
        .iter()
        .map(|e| {
            // Tr(Eρ) = Σ_ij E_ij ρ_ji
            e.as_matrix().iter().zip(rho.as_matrix().transpose().iter()).map(|(a, b)| (a * b).re).sum::<f64>()
        })
        .map(|x: f64| x.max(0.0))
        .collect();
    ProbabilityVector::new(p)
}

/// Fisher–Rao angle between the outcome distributions of one POVM.
pub fn povm_classical_angle(povm: &Povm, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    fr_geodesic_distance(&induced_distribution(povm, rho1)?, &induced_distribution(povm, rho2)?)
}

/// `M(ρ₁, ρ₂) = ρ₁^{-1/2} √(√ρ₁ ρ₂ √ρ₁) ρ₁^{-1/2}`; satisfies `ρ₂ = M ρ₁ M`.
pub fn fuchs_caves_operator(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<HermitianMatrix> {
    transition_operator(rho1, rho2)
}

/// Relative gap below which eigenvalues of `M` are grouped into one eigenspace.
pub const EIGENSPACE_GROUPING_TOL: f64 = 1e-8;

/// Eigenvalue clusters of an eigensystem: index ranges of (near-)equal eigenvalues.
pub fn eigenspaces(es: &EigenSystem) -> Vec<std::ops::Range<usize>> {
    let scale = es.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs())).max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=es.dim() {
        if k == es.dim() || es.eigenvalues[k] - es.eigenvalues[k - 1] > EIGENSPACE_GROUPING_TOL * scale {
            out.push(start..k);
            start = k;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct OptimalMeasurement {
    pub m: HermitianMatrix,
    pub eigen: EigenSystem,
    pub povm: Povm,
}

/// Projective measurement onto the eigenspaces of `M(ρ₁, ρ₂)`; degenerate
/// eigenvalues give one higher-rank projector per eigenspace.
pub fn optimal_measurement_full(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<OptimalMeasurement> {
    let m = fuchs_caves_operator(rho1, rho2)?;
    let es = eig(&m);
    let n = m.dim();
    let elems = eigenspaces(&es)
        .into_iter()
        .map(|r| {
            let v = es.eigenvectors.columns(r.start, r.len());
            HermitianMatrix::symmetrize(v.clone() * v.adjoint())
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(elems.iter().map(|e| e.trace().round() as usize).sum::<usize>(), n);
    let povm = Povm::new(elems)?;
    Ok(OptimalMeasurement { m, eigen: es, povm })
}

pub fn optimal_measurement(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Povm> {
    Ok(optimal_measurement_full(rho1, rho2)?.povm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmSearchReport {
    pub bures_angle: f64,
    pub best_angle: f64,
    pub best_axis: [f64; 3],
    /// Near-optimal axes exist far from the best one (the optimum is not unique).
    pub non_unique: bool,
    pub evaluations: usize,
}

fn axis_angle(r1: &[f64; 3], r2: &[f64; 3], n: &[f64; 3]) -> f64 {
    let d1: f64 = r1.iter().zip(n).map(|(a, b)| a * b).sum();
    let d2: f64 = r2.iter().zip(n).map(|(a, b)| a * b).sum();
    let plus = ((1.0 + d1) * (1.0 + d2)).max(0.0).sqrt();
    let minus = ((1.0 - d1) * (1.0 - d2)).max(0.0).sqrt();
    (0.5 * (plus + minus)).clamp(0.0, 1.0).acos()
}

fn spherical(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

/// Unsigned angle between two measurement axes (`n` and `−n` are the same axis).
pub fn axis_separation(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d: f64 = normalize(*a).iter().zip(&normalize(*b)).map(|(x, y)| x * y).sum();
    d.abs().clamp(0.0, 1.0).acos()
}

fn tangent_frame(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let cross = |a: &[f64; 3], b: &[f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let e1 = normalize(cross(n, &helper));
    let e2 = cross(n, &e1);
    (e1, e2)
}

/// Exhaustive search over projective qubit measurements: an axis grid over
/// the upper hemisphere (`grid_resolution` polar steps, twice as many in
/// azimuth) followed by `refine_iters` steps of compass search.
pub fn qubit_povm_search(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    grid_resolution: usize,
    refine_iters: usize,
) -> Result<PovmSearchReport> {
    check_dims(2, rho1.dim())?;
    check_dims(2, rho2.dim())?;
    if grid_resolution == 0 {
        return Err(Error::Invalid("grid resolution must be positive".into()));
    }
    let r1 = bloch_vector(rho1)?;
    let r2 = bloch_vector(rho2)?;
    let g = grid_resolution;
    let rows = par::map_indices(g + 1, |i| {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / g as f64;
        (0..2 * g)
            .map(|j| {
                let n = spherical(theta, std::f64::consts::PI * j as f64 / g as f64);
                (axis_angle(&r1, &r2, &n), n)
            })
            .collect::<Vec<_>>()
    });
    let grid: Vec<(f64, [f64; 3])> = rows.into_iter().flatten().collect();
    let mut evaluations = grid.len();
    let (mut best, mut axis) = grid
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, [0.0, 0.0, 1.0]), |acc, x| if x.0 > acc.0 { x } else { acc });

    let mut step = std::f64::consts::PI / g as f64;
    for _ in 0..refine_iters {
        let (e1, e2) = tangent_frame(&axis);
        let mut improved = false;
        for (dir, s) in [(e1, 1.0), (e1, -1.0), (e2, 1.0), (e2, -1.0)] {
            let cand = normalize([0, 1, 2].map(|k| axis[k] + s * step * dir[k]));
            let val = axis_angle(&r1, &r2, &cand);
            evaluations += 1;
            if val > best {
                best = val;
                axis = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let cell = std::f64::consts::PI / g as f64;
    let non_unique = grid
        .iter()
        .any(|(v, n)| best - v <= cell * cell && axis_separation(n, &axis) > 8.0 * cell);
    Ok(PovmSearchReport {
        bures_angle: bures_angle(rho1, rho2)?,
        best_angle: best,
        best_axis: if axis[2] < 0.0 { axis.map(|x| -x) } else { axis },
        non_unique,
        evaluations,
    })
}

/// Bloch axis of the eigenbasis of a qubit Hermitian operator.
pub fn qubit_eigenaxis(m: &HermitianMatrix) -> Result<[f64; 3]> {
    check_dims(2, m.dim())?;
    let es = eig(m);
    let top = DensityMatrix::pure(&es.eigenvector(1))?;
    bloch_vector(&top)
}

/// Where a measurement diameter sits relative to the arc joining two pure states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiameterPlacement {
    /// One end of the diameter lies on the arc between the states.
    Inside,
    /// Neither end of the diameter lies on that arc.
    Outside,
}

fn check_pure_geometry(theta: f64, theta_a: f64, placement: DiameterPlacement) -> Result<()> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::Domain(format!("Bloch angle θ = {theta} outside (0, π)")));
    }
    let max = match placement {
        DiameterPlacement::Inside => theta / 2.0,
        DiameterPlacement::Outside => (std::f64::consts::PI - theta) / 2.0,
    };
    if !(0.0..=max + 1e-15).contains(&theta_a) {
        return Err(Error::Domain(format!(
            "θ_A = {theta_a} is not the angle to the closest state for this placement (max {max})"
        )));
    }
    Ok(())
}

/// Classical statistical angle between two pure qubit states a Bloch angle
/// `theta` apart, measured along a diameter at angle `theta_a` from the
/// closer state: `θ/2 − θ_A` inside the arc, `θ/2` outside.
pub fn pure_state_qubit_angle(theta: f64, theta_a: f64, placement: DiameterPlacement) -> Result<f64> {
    check_pure_geometry(theta, theta_a, placement)?;
    Ok(match placement {
        DiameterPlacement::Inside => theta / 2.0 - theta_a,
        DiameterPlacement::Outside => theta / 2.0,
    })
}

fn real_plane_state(bloch_angle: f64) -> CVector {
    CVector::from_vec(vec![c((bloch_angle / 2.0).cos(), 0.0), c((bloch_angle / 2.0).sin(), 0.0)])
}

/// Same quantity computed from explicit states and measurement: pure states
/// at Bloch angles `0` and `theta` in the x–z plane, diameter endpoint at
/// `+theta_a` (inside) or `−theta_a` (outside).
pub fn pure_state_qubit_angle_constructed(theta: f64, theta_a: f64, placement: DiameterPlacement) -> Result<f64> {
    check_pure_geometry(theta, theta_a, placement)?;
    let rho1 = DensityMatrix::pure(&real_plane_state(0.0))?;
    let rho2 = DensityMatrix::pure(&real_plane_state(theta))?;
    let end = match placement {
        DiameterPlacement::Inside => theta_a,
        DiameterPlacement::Outside => -theta_a,
    };
    let a = real_plane_state(end);
    let b = real_plane_state(end + std::f64::consts::PI);
    let mut basis = CMatrix::zeros(2, 2);
    basis.set_column(0, &a);
    basis.set_column(1, &b);
    povm_classical_angle(&Povm::from_basis(&basis)?, &rho1, &rho2)
}
