//! Symbol-level Monte Carlo of ergodic interference alignment: pair
//! channel uses with complementary states, repeat each symbol across the
//! pair, add the receiver outputs, and measure the post-combining SINR.
//!
//! Two pairing modes are provided. `Exact` emulates infinitely fine
//! quantization by explicitly drawing the complementary partner of every
//! state, so interference cancels to numerical precision. `Quantized`
//! plays the finite-resolution scheme: every cross link keeps a
//! first-in-first-out table of waiting channel uses keyed by its
//! receiver-compensated phase bin (and its amplitude), so a use pairs with
//! the oldest use whose bin sits exactly B/2 bins away. Running one
//! matcher per link keeps the key space at B bins per link instead of
//! B^(K(K-1)) per joint state, which is what makes the finite-sample
//! matched fraction usable at desk scale; the dropped-use penalty is still
//! reported through `matched_fraction`. The whole-state matcher of
//! `pair_states` is the same greedy machinery applied to the joint key.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{sample_state, QuantizedState};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// How channel uses are paired before combining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// Each drawn state is paired with its exact complementary state.
    Exact,
    /// Greedy FIFO matching of quantized complementary phases, one matcher
    /// per cross link.
    Quantized,
}

/// Outcome of one alignment run.
#[derive(Debug, Clone, Serialize)]
pub struct MatchStats {
    pub n_uses: u64,
    pub n_matched_pairs: u64,
    /// 2 * n_matched_pairs / n_uses.
    pub matched_fraction: f64,
    /// Effective post-combining SINR per user.
    pub per_user_sinr: Vec<f64>,
    /// matched_fraction * (1/2) * log2(1 + sinr) per user.
    pub per_user_rate: Vec<f64>,
    /// Mean measured post-combining interference power per user.
    pub residual_interference_power: Vec<f64>,
}

impl MatchStats {
    fn from_measurements(
        n_uses: u64,
        n_matched_pairs: u64,
        per_user_desired: Vec<f64>,
        residual_interference_power: Vec<f64>,
    ) -> MatchStats {
        let matched_fraction = if n_uses == 0 {
            0.0
        } else {
            2.0 * n_matched_pairs as f64 / n_uses as f64
        };
        let per_user_sinr: Vec<f64> = per_user_desired
            .iter()
            .zip(&residual_interference_power)
            .map(|(&desired, &residual)| {
                if n_matched_pairs == 0 {
                    0.0
                } else {
                    // Two unit-variance noise samples add across the pair.
                    desired / (2.0 + residual)
                }
            })
            .collect();
        let per_user_rate = per_user_sinr
            .iter()
            .map(|&sinr| matched_fraction * 0.5 * (1.0 + sinr).log2())
            .collect();
        MatchStats {
            n_uses,
            n_matched_pairs,
            matched_fraction,
            per_user_sinr,
            per_user_rate,
            residual_interference_power,
        }
    }

    pub fn mean_rate(&self) -> f64 {
        self.per_user_rate.iter().sum::<f64>() / self.per_user_rate.len() as f64
    }
}

/// Rate each user sustains under ergodic alignment: (1/2) * log2(1 + 2*snr).
pub fn ergodic_alignment_rate(snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::Domain(format!("snr must be non-negative, got {snr}")));
    }
    Ok(0.5 * (1.0 + 2.0 * snr).log2())
}

/// Result of the whole-state greedy pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    /// (earlier index, later index) per formed pair.
    pub pairs: Vec<(usize, usize)>,
    /// Indices that never found a partner, ascending.
    pub unmatched: Vec<usize>,
}

/// Greedy online matching of whole quantized states: each arriving state
/// either matches the oldest waiting state whose off-diagonal key equals
/// the complement of its own, or joins the wait table.
pub fn pair_states(states: &[QuantizedState]) -> Pairing {
    if let Some(first) = states.first() {
        assert!(
            states.iter().all(|q| q.b() == first.b() && q.k() == first.k()),
            "all states must share K and B"
        );
    }
    let mut table: HashMap<Vec<u32>, VecDeque<usize>> = HashMap::new();
    let mut matched = vec![false; states.len()];
    let mut pairs = Vec::new();
    for (i, q) in states.iter().enumerate() {
        let key = q.off_diagonal_key();
        let half = q.b() / 2;
        let complement: Vec<u32> = key.iter().map(|&bin| (bin + half) % q.b()).collect();
        let waiting = table.get_mut(&complement).and_then(VecDeque::pop_front);
        match waiting {
            Some(j) => {
                matched[i] = true;
                matched[j] = true;
                pairs.push((j, i));
            }
            None => table.entry(key).or_default().push_back(i),
        }
    }
    let unmatched = (0..states.len()).filter(|&i| !matched[i]).collect();
    Pairing { pairs, unmatched }
}

/// Runs one alignment simulation over `n_uses` channel uses.
pub fn run_alignment(config: &NetworkConfig, n_uses: u64, mode: PairingMode) -> Result<MatchStats> {
    config.validate()?;
    if n_uses == 0 {
        return Err(Error::Domain("cannot simulate zero channel uses".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match mode {
        PairingMode::Exact => Ok(run_exact(config, n_uses, &mut rng)),
        PairingMode::Quantized => Ok(run_quantized(config, n_uses, &mut rng)),
    }
}

/// Runs independent seeded trials (config.seed is mixed with the trial
/// index), in parallel, returned in trial order.
pub fn run_alignment_trials(
    config: &NetworkConfig,
    n_uses: u64,
    mode: PairingMode,
    trials: u64,
) -> Result<Vec<MatchStats>> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut cfg = config.clone();
            cfg.seed = derive_seed(config.seed, 0x616c69676e, trial);
            run_alignment(&cfg, n_uses, mode)
        })
        .collect()
}

/// splitmix64-style mixing for reproducible substreams.
pub(crate) fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn run_exact<R: Rng + ?Sized>(config: &NetworkConfig, n_uses: u64, rng: &mut R) -> MatchStats {
    let k = config.k;
    let n_pairs = n_uses / 2;
    let mut desired_sum = vec![0.0; k];
    let mut residual_sum = vec![0.0; k];
    for _ in 0..n_pairs {
        let first = sample_state(config, rng);
        let second = first.complementary();
        for r in 0..k {
            // The receiver rotates each use by its known direct-link phase,
            // then adds.
            let rot1 = Complex64::from_polar(1.0, -first.phase(r, r));
            let rot2 = Complex64::from_polar(1.0, -second.phase(r, r));
            let desired = rot1 * first.coefficient(r, r) + rot2 * second.coefficient(r, r);
            desired_sum[r] += desired.norm_sqr();
            for t in 0..k {
                if t != r {
                    let cross = rot1 * first.coefficient(r, t) + rot2 * second.coefficient(r, t);
                    residual_sum[r] += cross.norm_sqr();
                }
            }
        }
    }
    let (desired, residual) = if n_pairs == 0 {
        (vec![0.0; k], vec![0.0; k])
    } else {
        (
            desired_sum.iter().map(|s| s / n_pairs as f64).collect(),
            residual_sum.iter().map(|s| s / n_pairs as f64).collect(),
        )
    };
    MatchStats::from_measurements(n_uses, n_pairs, desired, residual)
}

/// One waiting channel use at a cross link.
struct WaitingUse {
    phase: f64,
    amplitude: f64,
}

fn run_quantized<R: Rng + ?Sized>(config: &NetworkConfig, n_uses: u64, rng: &mut R) -> MatchStats {
    let k = config.k;
    let b = config.phase_bins;
    let bin_width = TAU / f64::from(b);
    let n_links = k * (k - 1);
    // Per link: waiting uses keyed by (phase bin, exact amplitude bits).
    // Keying on the amplitude restricts pairing to uses whose strength
    // matrices agree on that link, mirroring the complementary-state
    // construction where paired states share all strengths.
    let mut tables: Vec<HashMap<(u32, u64), VecDeque<WaitingUse>>> =
        (0..n_links).map(|_| HashMap::new()).collect();
    let mut residual_sum = vec![0.0; n_links];
    let mut pair_count = vec![0u64; n_links];

    for _ in 0..n_uses {
        let state = sample_state(config, rng);
        let mut link = 0;
        for r in 0..k {
            for t in 0..k {
                if t == r {
                    continue;
                }
                let phase = (state.phase(r, t) - state.phase(r, r)).rem_euclid(TAU) % TAU;
                let amplitude = state.strength(r, t);
                let bin = (((phase * f64::from(b)) / TAU).floor() as u32).min(b - 1);
                let complement_bin = (bin + b / 2) % b;
                let table = &mut tables[link];
                let waiting = table
                    .get_mut(&(complement_bin, amplitude.to_bits()))
                    .and_then(VecDeque::pop_front);
                match waiting {
                    Some(partner) => {
                        let combined = Complex64::from_polar(partner.amplitude, partner.phase)
                            + Complex64::from_polar(amplitude, phase);
                        let residual = combined.norm_sqr();
                        // Complementary bins keep the pair phases within one
                        // bin width of pi apart, so the leakage obeys the
                        // small-angle bound INR * (2*pi/B)^2.
                        let inr = partner.amplitude * amplitude;
                        let amp_gap = partner.amplitude - amplitude;
                        assert!(
                            residual <= amp_gap * amp_gap + inr * bin_width * bin_width + 1e-9,
                            "pair residual {residual} exceeds its quantization bound"
                        );
                        residual_sum[link] += residual;
                        pair_count[link] += 1;
                    }
                    None => {
                        table
                            .entry((bin, amplitude.to_bits()))
                            .or_default()
                            .push_back(WaitingUse { phase, amplitude });
                    }
                }
                link += 1;
            }
        }
    }

    let n_matched_pairs = pair_count.iter().copied().min().unwrap_or(0);
    let desired = vec![4.0 * config.snr; k];
    let mut residual = vec![0.0; k];
    if n_matched_pairs > 0 {
        let mut link = 0;
        for user_residual in residual.iter_mut().take(k) {
            for _ in 0..(k - 1) {
                *user_residual += residual_sum[link] / pair_count[link] as f64;
                link += 1;
            }
        }
    }
    MatchStats::from_measurements(n_uses, n_matched_pairs, desired, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelState;
    use crate::config::CrossDist;

    fn config(k: usize, snr: f64, cross: CrossDist, bins: u32, seed: u64) -> NetworkConfig {
        NetworkConfig::new(k, snr, cross, bins, seed).unwrap()
    }

    #[test]
    fn alignment_rate_values() {
        assert_eq!(ergodic_alignment_rate(0.0).unwrap(), 0.0);
        assert!((ergodic_alignment_rate(1.0).unwrap() - 0.792481250360578).abs() < 1e-12);
        assert!((ergodic_alignment_rate(10.0).unwrap() - 2.19615871138380).abs() < 1e-10);
        assert!(ergodic_alignment_rate(-0.1).is_err());
    }

    #[test]
    fn pair_states_pairs_a_state_with_its_complement() {
        let q = QuantizedState::new(vec![vec![0, 1], vec![3, 2]], 4).unwrap();
        let pairing = pair_states(&[q.clone(), q.complement_key()]);
        assert_eq!(pairing.pairs, vec![(0, 1)]);
        assert!(pairing.unmatched.is_empty());
    }

    #[test]
    fn pair_states_without_complements_matches_nothing() {
        let q = QuantizedState::new(vec![vec![0, 1], vec![3, 2]], 4).unwrap();
        let copies = vec![q; 17];
        let pairing = pair_states(&copies);
        assert!(pairing.pairs.is_empty());
        assert_eq!(pairing.unmatched, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn pair_states_fifo_prefers_the_oldest_partner() {
        let q = QuantizedState::new(vec![vec![0, 1], vec![3, 2]], 4).unwrap();
        let c = q.complement_key();
        let pairing = pair_states(&[q.clone(), q.clone(), c.clone(), c.clone()]);
        assert_eq!(pairing.pairs, vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn iid_uniform_keys_match_almost_everything() {
        // K=3, B=2: 64 possible off-diagonal keys, so the unmatched count
        // stays around sqrt(N * #keys) and the fraction clears 0.95.
        let mut rng = ChaCha8Rng::seed_from_u64(31337);
        let n = 100_000;
        let states: Vec<QuantizedState> = (0..n)
            .map(|_| {
                let bins = (0..3)
                    .map(|_| (0..3).map(|_| rng.random_range(0..2u32)).collect())
                    .collect();
                QuantizedState::new(bins, 2).unwrap()
            })
            .collect();
        let pairing = pair_states(&states);
        let matched_fraction = 2.0 * pairing.pairs.len() as f64 / n as f64;
        assert!(matched_fraction >= 0.95, "matched fraction {matched_fraction}");
        assert_eq!(2 * pairing.pairs.len() + pairing.unmatched.len(), n);
        for &(i, j) in &pairing.pairs {
            assert_eq!(states[i].complement_key().off_diagonal_key(), states[j].off_diagonal_key());
        }
    }

    #[test]
    fn exact_mode_hits_the_alignment_rate_to_numerical_precision() {
        let cfg = config(3, 1.0, CrossDist::constant(1.0), 8, 7);
        let stats = run_alignment(&cfg, 2_000, PairingMode::Exact).unwrap();
        assert_eq!(stats.matched_fraction, 1.0);
        let expected = ergodic_alignment_rate(1.0).unwrap();
        for rate in &stats.per_user_rate {
            assert!((rate - expected).abs() < 1e-9, "rate {rate} vs {expected}");
        }
        for residual in &stats.residual_interference_power {
            assert!(*residual < 1e-20);
        }
    }

    #[test]
    fn exact_mode_rate_ignores_cross_strengths() {
        let snr = 10.0;
        let dists = [
            CrossDist::constant(0.0),
            CrossDist::constant(snr),
            CrossDist::constant(100.0 * snr),
            CrossDist::uniform(0.0, 2.0 * snr),
        ];
        let rates: Vec<f64> = dists
            .iter()
            .map(|d| {
                let cfg = config(3, snr, d.clone(), 8, 11);
                run_alignment(&cfg, 1_000, PairingMode::Exact).unwrap().mean_rate()
            })
            .collect();
        for rate in &rates {
            assert!((rate - rates[0]).abs() < 1e-9, "rates {rates:?}");
        }
        assert!((rates[0] - ergodic_alignment_rate(snr).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn exact_mode_with_odd_uses_leaves_one_use_unmatched() {
        let cfg = config(2, 1.0, CrossDist::constant(1.0), 8, 3);
        let stats = run_alignment(&cfg, 101, PairingMode::Exact).unwrap();
        assert_eq!(stats.n_matched_pairs, 50);
        assert!((stats.matched_fraction - 100.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn zero_uses_is_an_error() {
        let cfg = config(2, 1.0, CrossDist::constant(1.0), 8, 3);
        assert!(run_alignment(&cfg, 0, PairingMode::Exact).is_err());
        assert!(run_alignment(&cfg, 0, PairingMode::Quantized).is_err());
    }

    #[test]
    fn quantized_mode_converges_to_the_alignment_rate() {
        let snr = 10.0;
        let cfg = config(3, snr, CrossDist::constant(snr), 64, 21);
        let stats = run_alignment(&cfg, 150_000, PairingMode::Quantized).unwrap();
        let theory = ergodic_alignment_rate(snr).unwrap();
        assert!(stats.matched_fraction >= 0.95, "mf {}", stats.matched_fraction);
        for rate in &stats.per_user_rate {
            assert!((rate - theory).abs() / theory < 0.03, "rate {rate} vs {theory}");
        }
        // Per-user residual stays under the aggregate quantization bound.
        let bin_width = TAU / 64.0;
        let bound = 2.0 * snr * bin_width * bin_width;
        for residual in &stats.residual_interference_power {
            assert!(*residual <= bound + 1e-12);
        }
    }

    #[test]
    fn quantized_rate_varies_only_through_the_residual_bound() {
        // Constant cross distributions of very different strengths: each
        // rate must sit between the bound-degraded SINR value and theory.
        let snr = 10.0;
        let b = 64u32;
        let bin_width = TAU / f64::from(b);
        for inr in [0.0, snr, 100.0 * snr] {
            let cfg = config(3, snr, CrossDist::constant(inr), b, 5);
            let stats = run_alignment(&cfg, 40_000, PairingMode::Quantized).unwrap();
            let bound = 2.0 * inr * bin_width * bin_width;
            let floor_rate =
                stats.matched_fraction * 0.5 * (1.0 + 4.0 * snr / (2.0 + bound)).log2();
            let ceil_rate = stats.matched_fraction * ergodic_alignment_rate(snr).unwrap();
            let rate = stats.mean_rate();
            assert!(
                rate >= floor_rate - 1e-12 && rate <= ceil_rate + 1e-12,
                "inr {inr}: rate {rate} outside [{floor_rate}, {ceil_rate}]"
            );
        }
    }

    #[test]
    fn quantized_rate_is_monotone_in_bin_count() {
        let snr = 10.0;
        let n = 20_000;
        let trials = 3;
        let mut previous: Option<(f64, f64)> = None;
        for b in [2u32, 4, 8, 16, 32, 64] {
            let cfg = config(3, snr, CrossDist::constant(snr), b, 77);
            let stats = run_alignment_trials(&cfg, n, PairingMode::Quantized, trials).unwrap();
            let rates: Vec<f64> = stats.iter().map(MatchStats::mean_rate).collect();
            let mean = rates.iter().sum::<f64>() / trials as f64;
            let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                / (trials as f64 - 1.0);
            let se = (var / trials as f64).sqrt();
            if let Some((prev_mean, prev_se)) = previous {
                assert!(
                    mean >= prev_mean - 2.0 * (se + prev_se),
                    "rate fell from {prev_mean} to {mean} at B={b}"
                );
            }
            previous = Some((mean, se));
        }
    }

    #[test]
    fn match_stats_rate_formula_is_consistent() {
        let cfg = config(3, 2.0, CrossDist::constant(2.0), 16, 9);
        let stats = run_alignment(&cfg, 10_000, PairingMode::Quantized).unwrap();
        assert!(stats.matched_fraction >= 0.0 && stats.matched_fraction <= 1.0);
        for (rate, sinr) in stats.per_user_rate.iter().zip(&stats.per_user_sinr) {
            let expected = stats.matched_fraction * 0.5 * (1.0 + sinr).log2();
            assert_eq!(*rate, expected);
        }
        assert_eq!(
            stats.matched_fraction,
            2.0 * stats.n_matched_pairs as f64 / stats.n_uses as f64
        );
    }

    #[test]
    fn trials_are_deterministic_and_distinct() {
        let cfg = config(3, 10.0, CrossDist::constant(10.0), 16, 123);
        let a = run_alignment_trials(&cfg, 5_000, PairingMode::Quantized, 4).unwrap();
        let b = run_alignment_trials(&cfg, 5_000, PairingMode::Quantized, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.per_user_rate, y.per_user_rate);
        }
        assert_ne!(a[0].per_user_rate, a[1].per_user_rate);
    }

    #[test]
    fn receiver_compensation_matches_state_quantization_for_zero_diagonals() {
        // With zero diagonal phases the per-link bins equal the raw state
        // quantization bins.
        let strengths = vec![vec![1.0; 3]; 3];
        let mut phases = vec![vec![0.0; 3]; 3];
        phases[0][1] = 1.0;
        phases[1][2] = 2.0;
        phases[2][0] = 3.0;
        let s = ChannelState::new(strengths, phases).unwrap();
        let q = s.quantize(8).unwrap();
        let rel = s.receiver_compensated().quantize(8).unwrap();
        assert_eq!(q, rel);
    }
}
