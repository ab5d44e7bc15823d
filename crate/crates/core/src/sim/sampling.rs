//! Poisson and multinomial samplers over [`SimRng`].

use thiserror::Error;

use super::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("poisson rate {0} must be finite and non-negative")]
    BadRate(f64),
    #[error("probabilities must be non-negative and sum to 1 (sum = {0})")]
    BadProbabilities(f64),
}

/// Above this rate the product-of-uniforms counter gets slow and `e^-λ`
/// starts losing precision, so sampling switches to CDF inversion.
const COUNTING_LIMIT: f64 = 30.0;

/// Rates above this are split into independent chunks; a sum of independent
/// Poisson variables is Poisson with the summed rate.
const INVERSION_CHUNK: f64 = 500.0;

/// Draws from Poisson(`lambda`).
///
/// Small rates count exponential inter-arrival times (equivalently, multiply
/// uniforms until the product drops below `e^-λ`). Larger rates invert the
/// CDF sequentially from zero. Neither path uses a normal approximation.
pub fn poisson_sample(lambda: f64, rng: &mut SimRng) -> Result<u64, SamplingError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(SamplingError::BadRate(lambda));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda < COUNTING_LIMIT {
        return Ok(poisson_counting(lambda, rng));
    }
    let chunks = (lambda / INVERSION_CHUNK).ceil();
    let part = lambda / chunks;
    Ok((0..chunks as u64)
        .map(|_| poisson_inversion(part, rng))
        .sum())
}

fn poisson_counting(lambda: f64, rng: &mut SimRng) -> u64 {
    let limit = (-lambda).exp();
    let mut k = 0;
    let mut prod = rng.uniform_open0();
    while prod > limit {
        k += 1;
        prod *= rng.uniform_open0();
    }
    k
}

fn poisson_inversion(lambda: f64, rng: &mut SimRng) -> u64 {
    let u = rng.uniform();
    let mut k = 0u64;
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    // The tail beyond λ + 40√λ carries no representable mass.
    let cutoff = (lambda + 40.0 * lambda.sqrt() + 40.0) as u64;
    while u >= cdf && k < cutoff {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
    }
    k
}

/// Poisson probability mass `λ^k e^-λ / k!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    (k as f64 * lambda.ln() - lambda - ln_fact).exp()
}

/// Distributes `total` draws over categories with the given probabilities.
/// The counts always sum to `total`.
pub fn multinomial_sample(
    total: u64,
    probs: &[f64],
    rng: &mut SimRng,
) -> Result<Vec<u64>, SamplingError> {
    let sum: f64 = probs.iter().sum();
    if probs.is_empty()
        || probs.iter().any(|p| !p.is_finite() || *p < 0.0)
        || (sum - 1.0).abs() > 1e-9
    {
        return Err(SamplingError::BadProbabilities(sum));
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    // Rounding can leave the last cumulative slightly under 1; draws landing
    // in that sliver go to the last category with positive mass.
    let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..total {
        let u = rng.uniform();
        let idx = cumulative.partition_point(|&c| c <= u);
        counts[idx.min(last_positive)] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_always_zero() {
        let mut rng = SimRng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(poisson_sample(0.0, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn rejects_bad_rates() {
        let mut rng = SimRng::seed_from_u64(3);
        assert!(poisson_sample(-1.0, &mut rng).is_err());
        assert!(poisson_sample(f64::NAN, &mut rng).is_err());
        assert!(poisson_sample(f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn pmf_matches_closed_form() {
        // P(X=2 | λ=1) = e^-1 / 2
        let expected = (-1.0f64).exp() / 2.0;
        assert!((poisson_pmf(1.0, 2) - expected).abs() < 1e-15);
        assert!((expected - 0.18394).abs() < 1e-5);
        let total: f64 = (0..200).map(|k| poisson_pmf(50.0, k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    /// Pearson chi-square of 10^5 draws against the closed-form PMF.
    fn chi_square(lambda: f64, seed: u64, bins: u64) -> (f64, usize) {
        let draws = 100_000u64;
        let mut rng = SimRng::seed_from_u64(seed);
        let lo = (lambda - 4.0 * lambda.sqrt()).max(0.0).floor() as u64;
        let mut observed = vec![0u64; bins as usize];
        for _ in 0..draws {
            let k = poisson_sample(lambda, &mut rng).unwrap();
            let b = k.saturating_sub(lo).min(bins - 1);
            observed[b as usize] += 1;
        }
        let mut expected = vec![0.0; bins as usize];
        for k in 0..(lo + bins + 400) {
            let b = k.saturating_sub(lo).min(bins - 1);
            expected[b as usize] += poisson_pmf(lambda, k) * draws as f64;
        }
        let stat = observed
            .iter()
            .zip(&expected)
            .filter(|(_, e)| **e > 0.0)
            .map(|(o, e)| (*o as f64 - e).powi(2) / e)
            .sum();
        (stat, bins as usize - 1)
    }

    #[test]
    fn counting_path_chi_square() {
        // 7 bins (0..=5, 6+), 6 dof; 99.9% critical value 22.46
        let (stat, dof) = chi_square(1.0, 11, 7);
        assert_eq!(dof, 6);
        assert!(stat < 22.46, "chi2 = {stat}");
    }

    #[test]
    fn inversion_path_chi_square() {
        // bins lo..lo+56 with open ends, 56 dof; 99.9% critical value 95.75
        let (stat, dof) = chi_square(50.0, 12, 57);
        assert_eq!(dof, 56);
        assert!(stat < 95.75, "chi2 = {stat}");
    }

    #[test]
    fn large_rates_are_chunked() {
        let mut rng = SimRng::seed_from_u64(5);
        let n = 2000;
        let mean = (0..n)
            .map(|_| poisson_sample(1200.0, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / n as f64;
        // std of the mean is sqrt(1200/2000) ≈ 0.77
        assert!((mean - 1200.0).abs() < 4.0, "mean = {mean}");
    }

    #[test]
    fn multinomial_degenerate() {
        let mut rng = SimRng::seed_from_u64(9);
        assert_eq!(
            multinomial_sample(0, &[0.2, 0.8], &mut rng).unwrap(),
            vec![0, 0]
        );
        assert_eq!(
            multinomial_sample(7, &[1.0, 0.0, 0.0], &mut rng).unwrap(),
            vec![7, 0, 0]
        );
        assert_eq!(
            multinomial_sample(7, &[0.0, 0.0, 1.0], &mut rng).unwrap(),
            vec![0, 0, 7]
        );
    }

    #[test]
    fn multinomial_rejects_bad_probs() {
        let mut rng = SimRng::seed_from_u64(9);
        assert!(multinomial_sample(3, &[0.5, 0.4], &mut rng).is_err());
        assert!(multinomial_sample(3, &[1.5, -0.5], &mut rng).is_err());
        assert!(multinomial_sample(3, &[], &mut rng).is_err());
    }

    #[test]
    fn multinomial_fair_coin() {
        let mut rng = SimRng::seed_from_u64(21);
        let c = multinomial_sample(100_000, &[0.5, 0.5], &mut rng).unwrap();
        assert_eq!(c[0] + c[1], 100_000);
        assert!(c[0].abs_diff(50_000) <= 700, "{c:?}");
    }
}
