//! Monte Carlo check that the Jeffreys density integrates to one.

use qinfogeom::classical::{jeffreys_density, ProbabilityVector};
use qinfogeom::rng::substream;
use rand_distr::{Dirichlet, Distribution};
use statrs::function::gamma::ln_gamma;

/// Importance sampling from Dirichlet(α): the weight J/q ∝ Π p^{1/2 − α} is bounded for α ≤ 1/2.
fn integral<const N: usize>(samples: usize, seed: u64) -> (f64, f64) {
    let n = N;
    let alpha = 0.25;
    let dist = Dirichlet::new([alpha; N]).unwrap();
    let ln_norm = ln_gamma(n as f64 * alpha) - n as f64 * ln_gamma(alpha);
    let mut rng = substream(seed, "jeffreys-mc", n as u64);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let p: Vec<f64> = dist.sample(&mut rng).to_vec();
        if p.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let ln_q = ln_norm + p.iter().map(|x| (alpha - 1.0) * x.ln()).sum::<f64>();
        let w = jeffreys_density(&ProbabilityVector::new(p).unwrap()).unwrap() / ln_q.exp();
        sum += w;
        sum2 += w * w;
    }
    let mean = sum / samples as f64;
    let var = sum2 / samples as f64 - mean * mean;
    (mean, (var / samples as f64).sqrt())
}

#[test]
fn jeffreys_normalizes() {
    let runs = [integral::<2>(200_000, 42), integral::<3>(200_000, 42), integral::<4>(200_000, 42), integral::<5>(200_000, 42)];
    for (k, (mean, se)) in runs.into_iter().enumerate() {
        assert!((mean - 1.0).abs() < 5.0 * se.max(1e-4), "N = {}: {mean} ± {se}", k + 2);
    }
}
