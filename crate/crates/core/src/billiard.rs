//! The Uhlmann geodesic billiard.
//!
//! A Bures–Uhlmann geodesic is the projection of a great circle
//! `A(t) = cos t Ā₁ + sin t Ā₂` of the Hilbert–Schmidt sphere. Over one
//! half-period `t ∈ [0, π)` the projected path `ρ(t) = A(t)A(t)†` touches
//! the boundary of the state space at `N` points (generically), where `ρ(t)`
//! has a one-dimensional kernel. Those kernel states coincide with the
//! eigenvectors of `M(ρ₁, ρ₂)`.
//!
//! Bounces are located on `λ_min(ρ(t))`, which touches zero quadratically.
//! A dense scan brackets each local minimum and bisection on the sign of
//! `dλ_min/dt = ⟨v|ρ'(t)|v⟩` pins it down.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assignment::min_cost_assignment;
use crate::bures::{geodesic, GeodesicPath};
use crate::error::{Error, Result};
use crate::linalg::{eig, CVector};
use crate::measurement::optimal_measurement_full;
use crate::par;
use crate::rng::substream;
use crate::sampling::{invertible_floor, random_invertible_density};
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Initial number of samples over `[0, π)`.
    pub samples: usize,
    /// Grid is doubled up to this many samples when bounces are missing.
    pub max_samples: usize,
    /// A refined minimum counts as a bounce when `λ_min ≤ zero_tol`.
    pub zero_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { samples: 2048, max_samples: 1 << 16, zero_tol: 1e-10 }
    }
}

/// Eigenvalues at or below this count toward a bounce's multiplicity.
pub const MULTIPLICITY_TOL: f64 = 1e-8;
/// A simple bounce needs its second-smallest eigenvalue above this.
pub const SIMPLE_GAP: f64 = 1e-6;
/// Bounce parameters closer than this are reported as a degenerate root.
pub const DEGENERATE_ROOT_SEPARATION: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct BouncePoint {
    pub t: f64,
    pub rho: DensityMatrix,
    pub kernel_state: CVector,
    pub min_eigenvalue: f64,
    pub second_eigenvalue: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BilliardFlag {
    /// Two bounce parameters closer than [`DEGENERATE_ROOT_SEPARATION`].
    DegenerateRoot { t1: f64, t2: f64 },
    /// A bounce where more than one eigenvalue vanishes.
    MultipleRoot { t: f64, multiplicity: usize },
    /// Second-smallest eigenvalue in `(MULTIPLICITY_TOL, SIMPLE_GAP]`.
    NearDegenerate { t: f64, second_eigenvalue: f64 },
}

#[derive(Clone, Debug)]
pub struct BounceScan {
    pub points: Vec<BouncePoint>,
    pub flags: Vec<BilliardFlag>,
    pub samples: usize,
}

impl BounceScan {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn ts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// `dλ_min/dt = ⟨v|ρ'(t)|v⟩` for the lowest eigenvector `v`.
fn lambda_min_slope(path: &GeodesicPath, t: f64) -> f64 {
    let v = eig(&path.rho_at(t)).eigenvector(0);
    let drho = path.rho_velocity(t);
    (v.adjoint() * drho.as_matrix() * &v)[(0, 0)].re
}

/// Bisection on the sign of `dλ_min/dt` inside a bracket around a minimum.
fn refine_minimum(path: &GeodesicPath, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if lambda_min_slope(path, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `λ_min(ρ(t))` on `samples` points of `[0, π)`.
pub fn lambda_min_profile(path: &GeodesicPath, samples: usize) -> Vec<(f64, f64)> {
    par::map_indices(samples, |k| {
        let t = PI * k as f64 / samples as f64;
        (t, eig(&path.rho_at(t)).eigenvalues[0])
    })
}

fn bounce_at(path: &GeodesicPath, t: f64) -> BouncePoint {
    let t = t.rem_euclid(PI);
    let rho = path.rho_at(t);
    let es = eig(&rho);
    let multiplicity = es.eigenvalues.iter().filter(|&&w| w <= MULTIPLICITY_TOL).count();
    BouncePoint {
        t,
        rho: DensityMatrix::from_unnormalized(rho.into_matrix()),
        kernel_state: es.eigenvector(0),
        min_eigenvalue: es.eigenvalues[0],
        second_eigenvalue: es.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY),
        multiplicity,
    }
}

fn scan_once(path: &GeodesicPath, samples: usize, zero_tol: f64) -> Vec<BouncePoint> {
    let lam: Vec<f64> = lambda_min_profile(path, samples).into_iter().map(|(_, l)| l).collect();
    let h = PI / samples as f64;
    let minima: Vec<usize> = (0..samples)
        .filter(|&k| {
            let prev = lam[(k + samples - 1) % samples];
            let next = lam[(k + 1) % samples];
            lam[k] <= prev && lam[k] < next
        })
        .collect();
    let refined = par::map_indices(minima.len(), |i| {
        let k = minima[i] as f64;
        refine_minimum(path, (k - 1.0) * h, (k + 1.0) * h)
    });
    let mut points: Vec<BouncePoint> = refined
        .into_iter()
        .map(|t| bounce_at(path, t))
        .filter(|b| b.min_eigenvalue <= zero_tol)
        .collect();
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    points.dedup_by(|a, b| (a.t - b.t).abs() < 1e-12);
    points
}

fn collect_flags(points: &[BouncePoint]) -> Vec<BilliardFlag> {
    let mut flags = Vec::new();
    for b in points {
        if b.multiplicity > 1 {
            flags.push(BilliardFlag::MultipleRoot { t: b.t, multiplicity: b.multiplicity });
        } else if b.second_eigenvalue <= SIMPLE_GAP {
            flags.push(BilliardFlag::NearDegenerate { t: b.t, second_eigenvalue: b.second_eigenvalue });
        }
    }
    let n = points.len();
    if n > 1 {
        for i in 0..n {
            let (a, b) = (points[i].t, points[(i + 1) % n].t);
            let gap = (b - a).rem_euclid(PI);
            if gap < DEGENERATE_ROOT_SEPARATION {
                flags.push(BilliardFlag::DegenerateRoot { t1: a, t2: b });
            }
        }
    }
    flags
}

/// Boundary points of the full great circle over one half-period.
pub fn bounce_points(path: &GeodesicPath, opts: &ScanOptions) -> Result<BounceScan> {
    let n = path.dim();
    let mut samples = opts.samples.max(8);
    loop {
        let points = scan_once(path, samples, opts.zero_tol);
        let found: usize = points.iter().map(|p| p.multiplicity.max(1)).sum();
        if found >= n {
            let flags = collect_flags(&points);
            return Ok(BounceScan { points, flags, samples });
        }
        if samples * 2 > opts.max_samples {
            return Err(Error::ScanFailure { expected: n, found });
        }
        samples *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub bounce: usize,
    pub eigenvector: usize,
    /// `|⟨bounce|eigenvector⟩|²`
    pub overlap: f64,
}

#[derive(Clone, Debug)]
pub struct BilliardReport {
    pub dim: usize,
    pub bounce_ts: Vec<f64>,
    pub kernel_states: Vec<CVector>,
    pub m_eigenvalues: Vec<f64>,
    pub m_eigenvectors: Vec<CVector>,
    pub pairings: Vec<Pairing>,
    pub max_infidelity: f64,
    pub flags: Vec<BilliardFlag>,
    pub matched: bool,
    pub t_star: f64,
}

impl BilliardReport {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Required overlap between each bounce state and its eigenvector of `M`.
pub const MATCH_INFIDELITY: f64 = 1e-6;

/// Matches the bounce kernel states with the eigenvectors of `M(ρ₁, ρ₂)`
/// by an optimal assignment on `1 − |⟨b|v⟩|²`.
pub fn verify_billiard_theorem(rho1: &DensityMatrix, rho2: &DensityMatrix, opts: &ScanOptions) -> Result<BilliardReport> {
    let path = geodesic(rho1, rho2)?;
    let scan = bounce_points(&path, opts)?;
    let om = optimal_measurement_full(rho1, rho2)?;
    let n = path.dim();
    let m_vecs: Vec<CVector> = (0..n).map(|k| om.eigen.eigenvector(k)).collect();
    let states: Vec<CVector> = scan.points.iter().map(|p| p.kernel_state.clone()).collect();
    let cost: Vec<Vec<f64>> = states
        .iter()
        .map(|b| m_vecs.iter().map(|v| 1.0 - b.dotc(v).norm_sqr()).collect())
        .collect();
    let assignment = if states.len() <= n { min_cost_assignment(&cost) } else { vec![] };
    let pairings: Vec<Pairing> = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| Pairing { bounce: i, eigenvector: j, overlap: 1.0 - cost[i][j] })
        .collect();
    let max_infidelity = pairings.iter().map(|p| 1.0 - p.overlap).fold(0.0, f64::max);
    let matched = pairings.len() == n && max_infidelity <= MATCH_INFIDELITY;
    Ok(BilliardReport {
        dim: n,
        bounce_ts: scan.ts(),
        kernel_states: states,
        m_eigenvalues: om.eigen.eigenvalues.clone(),
        m_eigenvectors: m_vecs,
        pairings,
        max_infidelity,
        flags: scan.flags,
        matched,
        t_star: path.t_star(),
    })
}

/// Random invertible pair for billiard run `index` under `seed`.
pub fn random_pair(dim: usize, seed: u64, index: u64) -> (DensityMatrix, DensityMatrix) {
    let mut rng = substream(seed, "billiard-pair", index);
    let floor = invertible_floor(dim);
    (random_invertible_density(&mut rng, dim, floor), random_invertible_density(&mut rng, dim, floor))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealRootsReport {
    pub dim: usize,
    /// Sign changes of `det A(t) / det Ā₁` over `[0, π]`.
    pub sign_changes: usize,
    /// `max |det A(t_b)| / |det Ā₁|` over the located bounce parameters.
    pub complex_det_residual: f64,
    /// `max |Im r(t)| / max |r(t)|` for `r(t) = det A(t) / det Ā₁` (zero in exact arithmetic).
    pub imaginary_residual: f64,
    pub flags: Vec<BilliardFlag>,
}

/// Counts real roots of the characteristic equation `det A(t) = 0` along the
/// half-period and checks that the ratio `det A(t)/det Ā₁` stays real.
pub fn real_roots_check(path: &GeodesicPath, samples: usize, opts: &ScanOptions) -> RealRootsReport {
    let det0 = path.start().determinant();
    let ratio: Vec<_> = par::map_indices(samples + 1, |k| {
        let t = PI * k as f64 / samples as f64;
        path.amplitude(t).determinant() / det0
    });
    let scale = ratio.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let imaginary_residual = ratio.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
    let sign_changes = ratio.windows(2).filter(|w| (w[0].re > 0.0) != (w[1].re > 0.0)).count();
    let (complex_det_residual, flags) = match bounce_points(path, opts) {
        Ok(scan) => {
            let res = scan
                .points
                .iter()
                .map(|b| path.amplitude(b.t).determinant().norm() / det0.norm())
                .fold(0.0, f64::max);
            (res, scan.flags)
        }
        Err(_) => (f64::NAN, vec![]),
    };
    RealRootsReport { dim: path.dim(), sign_changes, complex_det_residual, imaginary_residual, flags }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bures::fubini_study_distance;

    #[test]
    fn qubit_has_two_orthogonal_bounces() {
        for i in 0..20 {
            let (r1, r2) = random_pair(2, 3, i);
            let path = geodesic(&r1, &r2).unwrap();
            let scan = bounce_points(&path, &ScanOptions::default()).unwrap();
            assert_eq!(scan.points.len(), 2);
            let overlap = scan.points[0].kernel_state.dotc(&scan.points[1].kernel_state).norm();
            assert!(overlap < 1e-6);
            for b in &scan.points {
                let resid = (b.rho.as_matrix() * &b.kernel_state).norm();
                assert!(resid < 1e-7);
                assert!(b.min_eigenvalue <= 1e-8);
            }
        }
    }

    #[test]
    fn qutrit_has_three_bounces_matching_m() {
        for i in 0..10 {
            let (r1, r2) = random_pair(3, 3, i);
            let rep = verify_billiard_theorem(&r1, &r2, &ScanOptions::default()).unwrap();
            assert_eq!(rep.bounce_ts.len(), 3);
            assert!(rep.matched, "{:?}", rep.max_infidelity);
            assert!(rep.max_infidelity <= 1e-6);
        }
    }

    #[test]
    fn commuting_pair_bounces_on_shared_basis() {
        let r1 = DensityMatrix::from_diagonal(&[0.3, 0.33, 0.37]).unwrap();
        let r2 = DensityMatrix::from_diagonal(&[0.36, 0.31, 0.33]).unwrap();
        let path = geodesic(&r1, &r2).unwrap();
        let scan = bounce_points(&path, &ScanOptions::default()).unwrap();
        assert_eq!(scan.points.len(), 3);
        let mut hits = [false; 3];
        for b in &scan.points {
            let k = (0..3).max_by(|&a, &c| b.kernel_state[a].norm().total_cmp(&b.kernel_state[c].norm())).unwrap();
            assert!(b.kernel_state[k].norm() > 1.0 - 1e-9);
            hits[k] = true;
        }
        assert!(hits.iter().all(|&h| h));
    }

    #[test]
    fn equal_states_are_degenerate() {
        let r = DensityMatrix::maximally_mixed(3);
        assert!(matches!(verify_billiard_theorem(&r, &r, &ScanOptions::default()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn real_roots_counts() {
        for (dim, i) in [(2usize, 0u64), (3, 1), (4, 2)] {
            let (r1, r2) = random_pair(dim, 5, i);
            let path = geodesic(&r1, &r2).unwrap();
            let rep = real_roots_check(&path, 4096, &ScanOptions::default());
            assert_eq!(rep.sign_changes, dim);
            assert!(rep.imaginary_residual < 1e-10, "{}", rep.imaginary_residual);
            assert!(rep.complex_det_residual < 1e-5, "{}", rep.complex_det_residual);
        }
    }

    #[test]
    fn degenerate_m_is_flagged() {
        // M = diag(√(μ/λ)) has a repeated eigenvalue: a double bounce
        let r1 = DensityMatrix::from_diagonal(&[0.2, 0.2, 0.6]).unwrap();
        let r2 = DensityMatrix::from_diagonal(&[0.1, 0.1, 0.8]).unwrap();
        let path = geodesic(&r1, &r2).unwrap();
        let scan = bounce_points(&path, &ScanOptions::default()).unwrap();
        assert!(scan.is_flagged());
        assert_eq!(scan.points.len(), 2);
        let rep = real_roots_check(&path, 4096, &ScanOptions::default());
        assert!(rep.sign_changes < 3);
        assert!(!rep.flags.is_empty());
    }

    #[test]
    fn swapping_endpoints_keeps_bounce_states() {
        for i in 0..10 {
            let (r1, r2) = random_pair(3, 9, i);
            let a = verify_billiard_theorem(&r1, &r2, &ScanOptions::default()).unwrap();
            let b = verify_billiard_theorem(&r2, &r1, &ScanOptions::default()).unwrap();
            for s in &a.kernel_states {
                let best = b.kernel_states.iter().map(|x| 1.0 - s.dotc(x).norm_sqr()).fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-6);
            }
            for (x, y) in a.kernel_states.iter().zip(a.kernel_states.iter().skip(1)) {
                assert!(fubini_study_distance(x, y).unwrap() > 1e-3);
            }
        }
    }
}
