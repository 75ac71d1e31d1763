use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::signal::SampledSignal;

/// Which parts of each sample receive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    RealOnly,
    #[default]
    BothParts,
}

/// I.i.d. Gaussian noise. The stream is ChaCha20 seeded from `seed`, drawn
/// sample by sample (real part first), so a fixed seed reproduces the same
/// noise on every run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
    pub target: NoiseTarget,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { sigma: 0.0, seed: 1, target: NoiseTarget::BothParts }
    }
}

pub fn add_noise(s: &SampledSignal, noise: &NoiseSpec) -> Result<SampledSignal> {
    if !(noise.sigma.is_finite() && noise.sigma >= 0.0) {
        return invalid(format!("noise sigma must be nonnegative, got {}", noise.sigma));
    }
    if noise.sigma == 0.0 {
        return Ok(s.clone());
    }
    let normal = Normal::new(0.0, noise.sigma).expect("sigma validated");
    let mut rng = ChaCha20Rng::seed_from_u64(noise.seed);
    let values = s
        .values()
        .iter()
        .map(|v| {
            let re = normal.sample(&mut rng);
            let im = match noise.target {
                NoiseTarget::BothParts => normal.sample(&mut rng),
                NoiseTarget::RealOnly => 0.0,
            };
            v + Complex64::new(re, im)
        })
        .collect();
    SampledSignal::new(s.dt(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> SampledSignal {
        SampledSignal::from_real(0.1, &vec![1.0; n]).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = flat(10);
        assert_eq!(add_noise(&s, &NoiseSpec { sigma: 0.0, ..Default::default() }).unwrap(), s);
    }

    #[test]
    fn deterministic_for_seed() {
        let s = flat(50);
        let spec = NoiseSpec { sigma: 0.1, seed: 99, target: NoiseTarget::BothParts };
        assert_eq!(add_noise(&s, &spec).unwrap(), add_noise(&s, &spec).unwrap());
        let other = NoiseSpec { seed: 100, ..spec };
        assert_ne!(add_noise(&s, &spec).unwrap(), add_noise(&s, &other).unwrap());
    }

    #[test]
    fn real_only_leaves_imaginary_parts() {
        let s = flat(20);
        let spec = NoiseSpec { sigma: 0.2, seed: 3, target: NoiseTarget::RealOnly };
        assert!(add_noise(&s, &spec).unwrap().is_real());
    }

    #[test]
    fn sample_standard_deviation() {
        // For n = 10^4 draws the sample variance has relative standard error
        // sqrt(2 / (n - 1)) ~ 1.4%, so the std is within ~0.7% at one sigma;
        // 3% is more than four standard errors.
        let n = 10_000;
        let s = flat(n);
        let spec = NoiseSpec { sigma: 0.1, seed: 7, target: NoiseTarget::BothParts };
        let noisy = add_noise(&s, &spec).unwrap();
        let d: Vec<f64> = noisy.values().iter().map(|v| v.re - 1.0).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 0.1).abs() <= 0.03 * 0.1, "std = {}", var.sqrt());
        assert!(mean.abs() < 4.0 * 0.1 / (n as f64).sqrt());
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(add_noise(&flat(3), &NoiseSpec { sigma: -1.0, ..Default::default() }).is_err());
    }
}
