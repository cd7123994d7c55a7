//! Statistical validation of the split distributions against first
//! principles: rejection-sampled conditionals, regression slopes, and the
//! additive property of stable sums.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use seqcomp::stabledist::{
    cauchy_split_cdf, gaussian_split_moments, split_sample, stable_draw, sum_width, Law, SplitSpec,
};
use seqcomp::stats::{cauchy_cdf, ks_critical, ks_statistic, normal_cdf};

/// Conditional-law check: among pairs (A, B) of independent stable draws
/// with A + B close to s, the distribution of A approaches the split law.
fn rejection_conditional(law: Law, s: f64, s1: f64, s2: f64, eps: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut accepted = Vec::new();
    let mut tries = 0u64;
    while accepted.len() < 10_000 && tries < 200_000_000 {
        let a = stable_draw(s1, law, &mut rng);
        let b = stable_draw(s2, law, &mut rng);
        if (a + b - s).abs() < eps {
            accepted.push(a);
        }
        tries += 1;
    }
    assert!(accepted.len() >= 10_000, "rejection sampler starved");
    accepted
}

#[test]
fn gaussian_conditional_matches_split_law() {
    let (s, s1, s2) = (1.0, 1.0, 2.0);
    let spec = SplitSpec::new(s, s1, s2, Law::Gaussian).unwrap();
    let (mean, var) = gaussian_split_moments(&spec);
    let sample = rejection_conditional(Law::Gaussian, s, s1, s2, 0.02, 101);
    let n = sample.len();
    let d = ks_statistic(&sample, |x| normal_cdf(x - mean, var.sqrt()));
    // desk-scale: the eps-window bias is second order, KS at 1%
    assert!(
        d < ks_critical(n, 0.01) * 1.5,
        "KS statistic {d} vs critical {}",
        ks_critical(n, 0.01)
    );
}

#[test]
fn gaussian_regression_slope() {
    // Regression of A on A + B has slope S1^2 / (S1^2 + S2^2).
    let (s1, s2) = (1.5, 1.0);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let n = 200_000;
    let (mut sxy, mut sxx, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let a = stable_draw(s1, Law::Gaussian, &mut rng);
        let b = stable_draw(s2, Law::Gaussian, &mut rng);
        let t = a + b;
        sxy += t * a;
        sxx += t * t;
        sx += t;
        sy += a;
    }
    let nf = n as f64;
    let slope = (sxy - sx * sy / nf) / (sxx - sx * sx / nf);
    let expected = s1 * s1 / (s1 * s1 + s2 * s2);
    // 3 standard errors of the slope estimate
    let resid_var = (s1 * s1 * s2 * s2) / (s1 * s1 + s2 * s2);
    let se = (resid_var / (nf * (s1 * s1 + s2 * s2))).sqrt();
    assert!(
        (slope - expected).abs() < 3.0 * se,
        "slope {slope} vs {expected} (se {se})"
    );
}

#[test]
fn cauchy_conditional_matches_split_law() {
    let (s, s1, s2) = (1.0, 1.0, 2.0);
    let spec = SplitSpec::new(s, s1, s2, Law::Cauchy).unwrap();
    let sample = rejection_conditional(Law::Cauchy, s, s1, s2, 0.02, 55);
    let n = sample.len();
    let d = ks_statistic(&sample, |x| cauchy_split_cdf(x, &spec).unwrap());
    assert!(
        d < ks_critical(n, 0.01) * 1.5,
        "KS statistic {d} vs critical {}",
        ks_critical(n, 0.01)
    );
}

#[test]
fn sum_of_stable_draws_matches_sum_width() {
    let widths = [0.5, 1.25, 2.0];
    for law in [Law::Gaussian, Law::Cauchy] {
        let total = sum_width(&widths, law);
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let sums: Vec<f64> = (0..100_000)
            .map(|_| widths.iter().map(|&w| stable_draw(w, law, &mut rng)).sum())
            .collect();
        let d = match law {
            Law::Gaussian => ks_statistic(&sums, |x| normal_cdf(x, total)),
            Law::Cauchy => ks_statistic(&sums, |x| cauchy_cdf(x, total)),
        };
        assert!(
            d < ks_critical(sums.len(), 0.01),
            "{law:?}: KS {d} vs {}",
            ks_critical(sums.len(), 0.01)
        );
    }
}

#[test]
fn cauchy_split_sampler_self_consistent() {
    // Empirical CDF of inversion draws against the analytic CDF.
    let spec = SplitSpec::new(1.7, 0.6, 2.4, Law::Cauchy).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| seqcomp::stabledist::cauchy_split_sample(&spec, &mut rng).unwrap())
        .collect();
    let d = ks_statistic(&draws, |x| cauchy_split_cdf(x, &spec).unwrap());
    let crit = ks_critical(draws.len(), 0.01);
    assert!(d < crit, "KS {d} vs critical {crit}");
}

#[test]
fn split_parts_recompose_exactly() {
    // s^t + (s - s^t) = s trivially, but the bookkeeping around degenerate
    // splits must be exact: t_g = 0 contributes 0 and t_g = n_g contributes s.
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for law in [Law::Gaussian, Law::Cauchy] {
        let spec = SplitSpec::new(2.5, 1.0, 1.5, law).unwrap();
        for _ in 0..100 {
            let part = split_sample(&spec, &mut rng).unwrap();
            let complement = spec.s - part;
            assert!((part + complement - spec.s).abs() < 1e-15);
        }
    }
}
