use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of the cross-link interference-to-noise ratios INR.
///
/// `Constant` is the degenerate point mass; fixed-strength networks
/// (e.g. every bottleneck example) are expressed through it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum CrossDist {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    PointMass { values: Vec<f64>, weights: Vec<f64> },
}

impl CrossDist {
    pub fn constant(value: f64) -> Self {
        CrossDist::Constant { value }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        CrossDist::Uniform { low, high }
    }

    pub fn point_mass(values: Vec<f64>, weights: Vec<f64>) -> Self {
        CrossDist::PointMass { values, weights }
    }

    /// Checks the support is a subset of [0, inf) and parameters are coherent.
    pub fn validate(&self) -> Result<()> {
        match self {
            CrossDist::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::Config(format!(
                        "constant cross distribution requires a finite non-negative value, got {value}"
                    )));
                }
            }
            CrossDist::Uniform { low, high } => {
                if !low.is_finite() || !high.is_finite() || *high < *low {
                    return Err(Error::Config(format!(
                        "uniform cross distribution requires finite high >= low, got [{low}, {high}]"
                    )));
                }
                if *low < 0.0 {
                    return Err(Error::Config(format!(
                        "uniform cross distribution support must be non-negative, got low {low}"
                    )));
                }
            }
            CrossDist::PointMass { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(Error::Config(
                        "point-mass cross distribution needs matching non-empty values and weights".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Config(
                        "point-mass cross distribution values must be finite and non-negative".into(),
                    ));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                    || weights.iter().sum::<f64>() <= 0.0
                {
                    return Err(Error::Config(
                        "point-mass cross distribution weights must be non-negative with positive total".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Draws one INR value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            CrossDist::Constant { value } => *value,
            CrossDist::Uniform { low, high } => low + rng.random::<f64>() * (high - low),
            CrossDist::PointMass { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut target = rng.random::<f64>() * total;
                for (v, w) in values.iter().zip(weights) {
                    target -= w;
                    if target < 0.0 {
                        return *v;
                    }
                }
                *values.last().expect("validated non-empty")
            }
        }
    }

    /// Mean of the distribution.
    pub fn mean(&self) -> f64 {
        match self {
            CrossDist::Constant { value } => *value,
            CrossDist::Uniform { low, high } => 0.5 * (low + high),
            CrossDist::PointMass { values, weights } => {
                let total: f64 = weights.iter().sum();
                values
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| v * w / total)
                    .sum()
            }
        }
    }

    /// Probability mass of the closed interval [lo, hi].
    pub fn interval_prob(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        match self {
            CrossDist::Constant { value } => {
                if *value >= lo && *value <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            CrossDist::Uniform { low, high } => {
                if high == low {
                    if *low >= lo && *low <= hi {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let overlap = (hi.min(*high) - lo.max(*low)).max(0.0);
                    overlap / (high - low)
                }
            }
            CrossDist::PointMass { values, weights } => {
                let total: f64 = weights.iter().sum();
                values
                    .iter()
                    .zip(weights)
                    .filter(|(v, _)| **v >= lo && **v <= hi)
                    .map(|(_, w)| w / total)
                    .sum()
            }
        }
    }
}

/// Parameters of a K-user network: direct-link SNR, the cross-strength
/// distribution, the phase quantization resolution and the RNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub snr: f64,
    pub cross_dist: CrossDist,
    pub phase_bins: u32,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(k: usize, snr: f64, cross_dist: CrossDist, phase_bins: u32, seed: u64) -> Result<Self> {
        let config = NetworkConfig { k, snr, cross_dist, phase_bins, seed };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("K must be at least 2, got {}", self.k)));
        }
        if !self.snr.is_finite() || self.snr <= 0.0 {
            return Err(Error::Config(format!("snr must be positive, got {}", self.snr)));
        }
        if self.phase_bins < 2 || self.phase_bins % 2 != 0 {
            return Err(Error::Config(format!(
                "phase_bins must be even and at least 2, got {}",
                self.phase_bins
            )));
        }
        self.cross_dist.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_dist_samples_its_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = CrossDist::constant(3.5);
        for _ in 0..10 {
            assert_eq!(d.sample(&mut rng), 3.5);
        }
    }

    #[test]
    fn uniform_rejects_inverted_bounds() {
        assert!(CrossDist::uniform(2.0, 1.0).validate().is_err());
        assert!(CrossDist::uniform(-1.0, 1.0).validate().is_err());
        assert!(CrossDist::uniform(0.0, 2.0).validate().is_ok());
    }

    #[test]
    fn point_mass_sampling_and_mean() {
        let d = CrossDist::point_mass(vec![1.0, 3.0], vec![1.0, 3.0]);
        d.validate().unwrap();
        assert!((d.mean() - 2.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let hits = (0..n).filter(|_| d.sample(&mut rng) == 3.0).count();
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.75).abs() < 0.01, "frac {frac}");
    }

    #[test]
    fn interval_prob_closed_forms() {
        let u = CrossDist::uniform(0.0, 2.0);
        assert!((u.interval_prob(1.0, 1.5) - 0.25).abs() < 1e-12);
        assert_eq!(u.interval_prob(3.0, 4.0), 0.0);
        let c = CrossDist::constant(1.0);
        assert_eq!(c.interval_prob(1.0, 2.0), 1.0);
        assert_eq!(c.interval_prob(1.1, 2.0), 0.0);
        let p = CrossDist::point_mass(vec![0.5, 1.5, 2.5], vec![1.0, 1.0, 2.0]);
        assert!((p.interval_prob(1.0, 3.0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn config_validation_catches_bad_parameters() {
        let ok = NetworkConfig::new(3, 10.0, CrossDist::constant(10.0), 64, 7);
        assert!(ok.is_ok());
        assert!(NetworkConfig::new(1, 10.0, CrossDist::constant(10.0), 64, 7).is_err());
        assert!(NetworkConfig::new(3, 0.0, CrossDist::constant(10.0), 64, 7).is_err());
        assert!(NetworkConfig::new(3, 10.0, CrossDist::constant(10.0), 7, 7).is_err());
        assert!(NetworkConfig::new(3, 10.0, CrossDist::constant(-1.0), 64, 7).is_err());
    }

    #[test]
    fn config_json_round_trip_uses_fixed_field_names() {
        let config = NetworkConfig::new(3, 10.0, CrossDist::uniform(0.0, 20.0), 64, 7).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        assert!(json.contains("\"K\":3"));
        assert!(json.contains("\"snr\":10.0"));
        assert!(json.contains("\"cross_dist\":{\"kind\":\"uniform\",\"params\":{\"low\":0.0,\"high\":20.0}}"));
        assert!(json.contains("\"phase_bins\":64"));
        assert!(json.contains("\"seed\":7"));
        let back: NetworkConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }
}
