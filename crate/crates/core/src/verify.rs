//! The acceptance suite: ten numerical criteria, each with an oracle that
//! does not share code paths with the quantity under test.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::billiard::{random_pair, verify_billiard_theorem, ScanOptions};
use crate::bures::{
    bures_angle, fidelity, horizontal_lift, purify, qubit_bures_ds2, qubit_state, qubit_tangent, transition_operator,
};
use crate::classical::{
    apply_stochastic, fisher_rao_ds2, flat_distance, fr_geodesic_distance, monotonicity_stress,
    multinomial_ellipse_experiment, sphere_embed, ProbabilityVector, StochasticMatrix, TangentVector,
};
use crate::linalg::{hs_inner, CMatrix, HermitianMatrix};
use crate::means::{mean_axioms_check, operator_mean, operator_monotone_test, order_slack, MonotoneFunction};
use crate::measurement::{
    axis_separation, optimal_measurement, povm_classical_angle, pure_state_qubit_angle,
    pure_state_qubit_angle_constructed, qubit_eigenaxis, qubit_povm_search, DiameterPlacement, Povm,
};
use crate::metrics::monotone_ds2;
use crate::par;
use crate::rng::substream;
use crate::sampling::{
    flat_dirichlet, haar_unitary, invertible_floor, random_dim, random_invertible_density, random_pd,
    random_povm_elements, random_tangent,
};
use crate::state::{DensityMatrix, TangentPerturbation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub elapsed_s: f64,
    pub runtime_limit_s: Option<f64>,
    pub detail: Value,
}

impl CriterionResult {
    pub fn summary_line(&self) -> String {
        let limit = self.runtime_limit_s.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
        format!(
            "criterion {:>2} {:<40} {} in {:.2} s{}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed_s,
            limit
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "fisher-rao sphere equivalence"),
    (2, "classical monotonicity"),
    (3, "multinomial ellipse"),
    (4, "operator mean ordering and axioms"),
    (5, "monotone metric consistency"),
    (6, "qubit hemisphere closed form"),
    (7, "fidelity and lift contracts"),
    (8, "optimal measurement"),
    (9, "pure state ambiguity"),
    (10, "billiard theorem"),
];

fn runtime_limit(id: u8) -> Option<f64> {
    match id {
        1 => Some(5.0),
        2 => Some(10.0),
        3 => Some(60.0),
        8 => Some(120.0),
        10 => Some(300.0),
        _ => None,
    }
}

/// Runs one criterion. Passing requires both the numerical checks and the runtime limit.
pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionResult> {
    let (_, name) = CRITERIA.iter().find(|(i, _)| *i == id)?;
    let start = Instant::now();
    let (ok, detail) = match id {
        1 => fisher_rao_sphere(seed),
        2 => classical_monotonicity(seed),
        3 => multinomial_ellipse(seed),
        4 => mean_ordering(seed),
        5 => metric_consistency(seed),
        6 => qubit_hemisphere(seed),
        7 => fidelity_contracts(seed),
        8 => optimal_measurement_check(seed),
        9 => pure_state_ambiguity(),
        10 => billiard(seed),
        _ => unreachable!(),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let limit = runtime_limit(id);
    Some(CriterionResult {
        id,
        name: name.to_string(),
        passed: ok && limit.is_none_or(|l| elapsed_s < l),
        elapsed_s,
        runtime_limit_s: limit,
        detail,
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|(id, _)| run_criterion(*id, seed)).collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// Length of the great-circle arc between unit vectors, measured as the
/// limit of inscribed polylines (Richardson-extrapolated over 3 levels).
fn polyline_arc(x: &[f64], y: &[f64]) -> f64 {
    let length = |k: usize| -> f64 {
        let point = |s: f64| {
            let v: Vec<f64> = x.iter().zip(y).map(|(a, b)| (1.0 - s) * a + s * b).collect();
            let n = v.iter().map(|z| z * z).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / n).collect::<Vec<f64>>()
        };
        let mut prev = point(0.0);
        let mut total = 0.0;
        for i in 1..=k {
            let next = point(i as f64 / k as f64);
            total += prev.iter().zip(&next).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prev = next;
        }
        total
    };
    let (l1, l2, l4) = (length(256), length(512), length(1024));
    let r1 = (4.0 * l2 - l1) / 3.0;
    let r2 = (4.0 * l4 - l2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

fn fisher_rao_sphere(seed: u64) -> (bool, Value) {
    let errs = par::map_indices(1000, |i| {
        let mut rng = substream(seed, "c1", i as u64);
        let n = random_dim(&mut rng, 2, 6);
        let p = ProbabilityVector::new(flat_dirichlet(&mut rng, n)).unwrap();
        let q = ProbabilityVector::new(flat_dirichlet(&mut rng, n)).unwrap();
        let d = fr_geodesic_distance(&p, &q).unwrap();
        (d - polyline_arc(&sphere_embed(&p), &sphere_embed(&q))).abs()
    });
    let worst = max_of(errs);
    (worst <= 1e-10, json!({ "pairs": 1000, "max_abs_err": worst, "tol": 1e-10 }))
}

fn classical_monotonicity(seed: u64) -> (bool, Value) {
    let stress = monotonicity_stress(seed, 10_000);
    let p = ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap();
    let q = ProbabilityVector::new(vec![0.0, 0.5, 0.5]).unwrap();
    let t = StochasticMatrix::coarse_graining_3_to_2();
    let (tp, tq) = (apply_stochastic(&t, &p).unwrap(), apply_stochastic(&t, &q).unwrap());
    let before = flat_distance(&p, &q).unwrap();
    let after = flat_distance(&tp, &tq).unwrap();
    let fr_before = fr_geodesic_distance(&p, &q).unwrap();
    let fr_after = fr_geodesic_distance(&tp, &tq).unwrap();
    let flat_ok = (before - 1.5f64.sqrt()).abs() < 1e-12 && (after - 2f64.sqrt()).abs() < 1e-12;
    let fr_ok = fr_after <= fr_before + 1e-12;
    (
        stress.violations == 0 && flat_ok && fr_ok,
        json!({
            "trials": stress.trials,
            "violations": stress.violations,
            "max_excess": stress.max_excess,
            "flat_before": before,
            "flat_after": after,
            "fisher_rao_before": fr_before,
            "fisher_rao_after": fr_after,
        }),
    )
}

fn multinomial_ellipse(seed: u64) -> (bool, Value) {
    let p = ProbabilityVector::uniform(3);
    match multinomial_ellipse_experiment(&p, 100_000, 10_000, seed) {
        Ok(r) => (
            r.max_rel_err <= 0.05,
            json!({ "p": p.as_slice(), "samples": 100_000, "trials": 10_000, "max_rel_err": r.max_rel_err,
                    "empirical_cov": r.empirical_cov, "predicted_cov": r.predicted_cov }),
        ),
        Err(e) => (false, json!({ "error": e.to_string() })),
    }
}

fn mean_ordering(seed: u64) -> (bool, Value) {
    let fs = [MonotoneFunction::harmonic(), MonotoneFunction::geometric(), MonotoneFunction::arithmetic()];
    let slacks = par::map_indices(1000, |i| {
        let mut rng = substream(seed, "c4-order", i as u64);
        let n = random_dim(&mut rng, 2, 6);
        let a = random_pd(&mut rng, n);
        let b = random_pd(&mut rng, n);
        let m: Vec<HermitianMatrix> = fs.iter().map(|f| operator_mean(&a, &b, f).unwrap()).collect();
        order_slack(&m[1], &m[0]).unwrap().min(order_slack(&m[2], &m[1]).unwrap())
    });
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let axioms: Vec<_> = fs.iter().map(|f| mean_axioms_check(f, seed, 1000)).collect();
    let axioms_ok = axioms.iter().all(|r| r.total_violations() == 0);
    let square = operator_monotone_test(&|t: f64| t * t, 2, seed, 10_000);
    let found = matches!(&square, Ok(r) if r.counterexample.is_some());
    let trial = square.ok().and_then(|r| r.counterexample.map(|c| c.trial));
    (
        min_slack >= -1e-9 && axioms_ok && found,
        json!({ "pairs": 1000, "min_order_slack": min_slack, "axioms": axioms, "square_counterexample_trial": trial }),
    )
}

/// Observed convergence order of `D_BU(ρ, ρ + ε dρ)² − ε² ds²` under halving ε.
fn convergence_order(rho: &DensityMatrix, d: &TangentPerturbation) -> (f64, f64) {
    let ds2 = monotone_ds2(rho, d, &MonotoneFunction::arithmetic()).unwrap();
    let eps0 = 0.25 * rho.min_eigenvalue() / d.hermitian().hs_norm();
    let err = |eps: f64| {
        let moved = DensityMatrix::new(rho.hermitian().add(&d.hermitian().scale(eps)).unwrap()).unwrap();
        (bures_angle(rho, &moved).unwrap().powi(2) - eps * eps * ds2).abs()
    };
    let errs: Vec<(f64, f64)> = (0..4).map(|k| eps0 / f64::powi(2.0, k)).map(|e| (e.ln(), err(e).ln())).collect();
    // least-squares slope of ln err against ln ε
    let mx = errs.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = errs.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let sxy: f64 = errs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = errs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx, ds2)
}

fn metric_consistency(seed: u64) -> (bool, Value) {
    let orders = par::map_indices(100, |i| {
        let mut rng = substream(seed, "c5-order", i as u64);
        let n = random_dim(&mut rng, 2, 4);
        let rho = random_invertible_density(&mut rng, n, invertible_floor(n));
        let d = random_tangent(&mut rng, n);
        convergence_order(&rho, &d).0
    });
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let fs = [MonotoneFunction::arithmetic(), MonotoneFunction::geometric(), MonotoneFunction::harmonic()];
    let diag_errs = par::map_indices(100, |i| {
        let mut rng = substream(seed, "c5-diag", i as u64);
        let n = random_dim(&mut rng, 2, 4);
        let p = flat_dirichlet(&mut rng, n);
        let mut dp: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = dp.iter().sum::<f64>() / n as f64;
        dp.iter_mut().for_each(|x| *x -= mean);
        let fr = fisher_rao_ds2(&ProbabilityVector::new(p.clone()).unwrap(), &TangentVector::new(dp.clone()).unwrap()).unwrap();
        let rho = DensityMatrix::from_diagonal(&p).unwrap();
        let d = TangentPerturbation::new(HermitianMatrix::from_real_diagonal(&dp)).unwrap();
        max_of(fs.iter().map(|f| ((monotone_ds2(&rho, &d, f).unwrap() - fr) / fr).abs()))
    });
    let diag_worst = max_of(diag_errs);
    (
        min_order >= 2.5 && diag_worst <= 1e-12,
        json!({ "pairs": 100, "min_observed_order": min_order, "diagonal_max_rel_err": diag_worst }),
    )
}

fn random_bloch_point(rng: &mut crate::rng::Rng) -> [f64; 3] {
    loop {
        let v = [0, 1, 2].map(|_| 2.0 * rng.random::<f64>() - 1.0);
        if v.iter().map(|x| x * x).sum::<f64>() < 0.999 {
            return v;
        }
    }
}

fn qubit_hemisphere(seed: u64) -> (bool, Value) {
    let errs = par::map_indices(1000, |i| {
        let mut rng = substream(seed, "c6", i as u64);
        let pos = random_bloch_point(&mut rng);
        let d = [0, 1, 2].map(|_| 2.0 * rng.random::<f64>() - 1.0);
        let closed = qubit_bures_ds2(pos, d).unwrap();
        let rho = qubit_state(pos[0], pos[1], pos[2]).unwrap();
        let general = monotone_ds2(&rho, &qubit_tangent(d[0], d[1], d[2]), &MonotoneFunction::arithmetic()).unwrap();
        ((closed - general) / general).abs()
    });
    let worst = max_of(errs);
    (worst <= 1e-10, json!({ "points": 1000, "max_rel_err": worst, "tol": 1e-10 }))
}

fn fidelity_contracts(seed: u64) -> (bool, Value) {
    let rows = par::map_indices(1000, |i| {
        let mut rng = substream(seed, "c7", i as u64);
        let n = random_dim(&mut rng, 2, 5);
        let r1 = random_invertible_density(&mut rng, n, invertible_floor(n));
        let r2 = random_invertible_density(&mut rng, n, invertible_floor(n));
        let sym = (fidelity(&r1, &r2).unwrap() - fidelity(&r2, &r1).unwrap()).abs();
        let a1 = purify(&r1).gauge(&haar_unitary(&mut rng, n)).unwrap();
        let a2 = horizontal_lift(&r1, &r2, &a1).unwrap();
        let overlap = hs_inner(a2.as_matrix(), a1.as_matrix()).unwrap();
        let lift = (overlap - crate::linalg::c(fidelity(&r1, &r2).unwrap().sqrt(), 0.0)).norm();
        let m12 = transition_operator(&r1, &r2).unwrap();
        let m21 = transition_operator(&r2, &r1).unwrap();
        let sandwich = (m12.as_matrix() * r1.as_matrix() * m12.as_matrix() - r2.as_matrix()).camax();
        let inverse = (m12.as_matrix() * m21.as_matrix() - CMatrix::identity(n, n)).camax();
        [sym, lift, sandwich, inverse]
    });
    let worst = [0, 1, 2, 3].map(|k| max_of(rows.iter().map(|r| r[k])));
    let ok = worst[0] <= 1e-10 && worst[1] <= 1e-9 && worst[2] <= 1e-9 && worst[3] <= 1e-9;
    (
        ok,
        json!({ "pairs": 1000, "fidelity_asymmetry": worst[0], "lift_overlap_err": worst[1],
                "m_rho_m_err": worst[2], "m_inverse_err": worst[3] }),
    )
}

fn optimal_measurement_check(seed: u64) -> (bool, Value) {
    let qubit = par::map_indices(100, |i| {
        let mut rng = substream(seed, "c8-qubit", i as u64);
        let r1 = random_invertible_density(&mut rng, 2, invertible_floor(2));
        let r2 = random_invertible_density(&mut rng, 2, invertible_floor(2));
        let search = qubit_povm_search(&r1, &r2, 200, 60).unwrap();
        let axis = qubit_eigenaxis(&transition_operator(&r1, &r2).unwrap()).unwrap();
        ((search.bures_angle - search.best_angle).abs(), axis_separation(&search.best_axis, &axis))
    });
    let angle_gap = max_of(qubit.iter().map(|q| q.0));
    let axis_gap = max_of(qubit.iter().map(|q| q.1));
    let random = par::map_indices(1000, |i| {
        let mut rng = substream(seed, "c8-povm", i as u64);
        let n = random_dim(&mut rng, 2, 4);
        let outcomes = random_dim(&mut rng, 2, 6);
        let r1 = random_invertible_density(&mut rng, n, invertible_floor(n));
        let r2 = random_invertible_density(&mut rng, n, invertible_floor(n));
        let povm = Povm::new(random_povm_elements(&mut rng, n, outcomes)).unwrap();
        let bound = bures_angle(&r1, &r2).unwrap();
        let attained = povm_classical_angle(&optimal_measurement(&r1, &r2).unwrap(), &r1, &r2).unwrap();
        (povm_classical_angle(&povm, &r1, &r2).unwrap() - bound, (attained - bound).abs())
    });
    let max_excess = random.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let optimal_gap = max_of(random.iter().map(|r| r.1));
    let ok = angle_gap <= 1e-4 && axis_gap <= PI / 200.0 && max_excess <= 1e-9 && optimal_gap <= 1e-9;
    (
        ok,
        json!({ "qubit_pairs": 100, "max_angle_gap": angle_gap, "max_axis_gap": axis_gap,
                "random_povms": 1000, "max_excess_over_bures": max_excess, "optimal_povm_gap": optimal_gap }),
    )
}

fn pure_state_ambiguity() -> (bool, Value) {
    let mut points = Vec::with_capacity(1000);
    for placement in [DiameterPlacement::Inside, DiameterPlacement::Outside] {
        for i in 0..25 {
            let theta = PI * (i as f64 + 0.5) / 25.0;
            let max = match placement {
                DiameterPlacement::Inside => theta / 2.0,
                DiameterPlacement::Outside => (PI - theta) / 2.0,
            };
            for j in 0..20 {
                points.push((theta, max * j as f64 / 19.0, placement));
            }
        }
    }
    let errs = par::map_indices(points.len(), |k| {
        let (theta, theta_a, placement) = points[k];
        let analytic = pure_state_qubit_angle(theta, theta_a, placement).unwrap();
        let built = pure_state_qubit_angle_constructed(theta, theta_a, placement).unwrap();
        (analytic - built).abs()
    });
    let worst = max_of(errs);
    (worst <= 1e-9, json!({ "grid_points": points.len(), "max_abs_err": worst, "tol": 1e-9 }))
}

fn billiard(seed: u64) -> (bool, Value) {
    let dims = [2usize, 3, 4, 5];
    let runs = par::map_indices(dims.len() * 200, |k| {
        let dim = dims[k / 200];
        let (r1, r2) = random_pair(dim, seed, k as u64);
        verify_billiard_theorem(&r1, &r2, &ScanOptions::default())
    });
    let total = runs.len();
    let mut flagged = 0;
    let mut failures = 0;
    let mut errors = 0;
    let mut worst = 0.0f64;
    let mut per_dim = vec![json!(null); dims.len()];
    for (d, chunk) in runs.chunks(200).enumerate() {
        let (mut f, mut ok) = (0, 0);
        for r in chunk {
            match r {
                Ok(rep) if rep.is_flagged() => f += 1,
                Ok(rep) => {
                    worst = worst.max(rep.max_infidelity);
                    if rep.bounce_ts.len() == rep.dim && rep.matched {
                        ok += 1;
                    } else {
                        failures += 1;
                    }
                }
                Err(_) => errors += 1,
            }
        }
        flagged += f;
        per_dim[d] = json!({ "dim": dims[d], "runs": chunk.len(), "flagged": f, "matched": ok });
    }
    let flagged_frac = flagged as f64 / total as f64;
    (
        failures == 0 && errors == 0 && flagged_frac < 0.05,
        json!({ "runs": total, "flagged_fraction": flagged_frac, "unmatched": failures, "errors": errors,
                "max_infidelity": worst, "per_dim": per_dim }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_arc_matches_known_angles() {
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        assert!((polyline_arc(&x, &y) - PI / 2.0).abs() < 1e-12);
        let s = 0.3f64;
        let z = [s.cos(), s.sin(), 0.0];
        assert!((polyline_arc(&x, &z) - s).abs() < 1e-13);
    }

    #[test]
    fn criterion_table_is_complete() {
        assert_eq!(CRITERIA.len(), 10);
        assert!(run_criterion(11, 0).is_none());
        assert_eq!(runtime_limit(10), Some(300.0));
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [6, 9] {
            let r = run_criterion(id, 2024).unwrap();
            assert!(r.passed, "{}", r.detail);
        }
    }
}
