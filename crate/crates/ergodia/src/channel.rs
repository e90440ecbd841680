use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// One channel use of the K-user network: link amplitudes (square roots of
/// SNR/INR power ratios) and link phases in [0, 2*pi).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    strengths: Vec<Vec<f64>>,
    phases: Vec<Vec<f64>>,
}

/// Per-link phase bins of a channel state, `bins[r][t] in [0, B)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantizedState {
    bins: Vec<Vec<u32>>,
    b: u32,
}

fn canonical_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if p >= TAU {
        0.0
    } else {
        p
    }
}

impl ChannelState {
    /// Builds a state from raw matrices; phases are reduced mod 2*pi.
    pub fn new(strengths: Vec<Vec<f64>>, phases: Vec<Vec<f64>>) -> Result<Self> {
        let k = strengths.len();
        if k == 0
            || strengths.iter().any(|row| row.len() != k)
            || phases.len() != k
            || phases.iter().any(|row| row.len() != k)
        {
            return Err(Error::Config("channel state matrices must be square and same size".into()));
        }
        if strengths.iter().flatten().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Config("channel strengths must be finite and non-negative".into()));
        }
        if phases.iter().flatten().any(|p| !p.is_finite()) {
            return Err(Error::Config("channel phases must be finite".into()));
        }
        let phases = phases
            .into_iter()
            .map(|row| row.into_iter().map(canonical_phase).collect())
            .collect();
        Ok(ChannelState { strengths, phases })
    }

    pub fn k(&self) -> usize {
        self.strengths.len()
    }

    pub fn strength(&self, r: usize, t: usize) -> f64 {
        self.strengths[r][t]
    }

    pub fn phase(&self, r: usize, t: usize) -> f64 {
        self.phases[r][t]
    }

    /// Complex fading coefficient of link (r, t).
    pub fn coefficient(&self, r: usize, t: usize) -> Complex64 {
        Complex64::from_polar(self.strengths[r][t], self.phases[r][t])
    }

    /// The complementary state: identical strengths, off-diagonal phases
    /// shifted by pi, diagonal phases untouched. The complex matrices of a
    /// state and its complement sum to twice the diagonal.
    pub fn complementary(&self) -> ChannelState {
        let k = self.k();
        let mut phases = self.phases.clone();
        for (r, row) in phases.iter_mut().enumerate().take(k) {
            for (t, p) in row.iter_mut().enumerate() {
                if r != t {
                    *p = canonical_phase(*p + PI);
                }
            }
        }
        ChannelState { strengths: self.strengths.clone(), phases }
    }

    /// Phase bins: `floor(phase * B / 2*pi)`, clamped to B-1 at the boundary.
    pub fn quantize(&self, b: u32) -> Result<QuantizedState> {
        if b < 2 || b % 2 != 0 {
            return Err(Error::Config(format!("phase_bins must be even and at least 2, got {b}")));
        }
        let bins = self
            .phases
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| (((p * f64::from(b)) / TAU).floor() as u32).min(b - 1))
                    .collect()
            })
            .collect();
        Ok(QuantizedState { bins, b })
    }

    /// The state seen after each receiver rotates away its own direct-link
    /// phase: cross phases become relative to the row diagonal, diagonal
    /// phases become zero. Strengths are unchanged.
    pub fn receiver_compensated(&self) -> ChannelState {
        let k = self.k();
        let phases = (0..k)
            .map(|r| {
                (0..k)
                    .map(|t| {
                        if r == t {
                            0.0
                        } else {
                            canonical_phase(self.phases[r][t] - self.phases[r][r])
                        }
                    })
                    .collect()
            })
            .collect();
        ChannelState { strengths: self.strengths.clone(), phases }
    }
}

impl QuantizedState {
    pub fn new(bins: Vec<Vec<u32>>, b: u32) -> Result<Self> {
        if b < 2 || b % 2 != 0 {
            return Err(Error::Config(format!("phase_bins must be even and at least 2, got {b}")));
        }
        let k = bins.len();
        if k == 0 || bins.iter().any(|row| row.len() != k) {
            return Err(Error::Config("quantized state must be a square matrix".into()));
        }
        if bins.iter().flatten().any(|&bin| bin >= b) {
            return Err(Error::Config(format!("all bins must lie in [0, {b})")));
        }
        Ok(QuantizedState { bins, b })
    }

    pub fn k(&self) -> usize {
        self.bins.len()
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn bin(&self, r: usize, t: usize) -> u32 {
        self.bins[r][t]
    }

    /// Discrete analogue of the complementary state, used as the hash key
    /// for pairing: off-diagonal bins shift by B/2 (mod B), diagonal bins
    /// stay. Involutive.
    pub fn complement_key(&self) -> QuantizedState {
        let half = self.b / 2;
        let bins = self
            .bins
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(t, &bin)| if r == t { bin } else { (bin + half) % self.b })
                    .collect()
            })
            .collect();
        QuantizedState { bins, b: self.b }
    }

    /// Off-diagonal bins in row-major order; the pairing key. Diagonal bins
    /// are excluded because alignment only needs off-diagonal
    /// complementarity (each receiver compensates its own diagonal phase).
    pub fn off_diagonal_key(&self) -> Vec<u32> {
        let k = self.k();
        let mut key = Vec::with_capacity(k * (k - 1));
        for r in 0..k {
            for t in 0..k {
                if r != t {
                    key.push(self.bins[r][t]);
                }
            }
        }
        key
    }
}

/// Samples one channel state: diagonal amplitudes sqrt(snr), off-diagonal
/// amplitudes sqrt(INR) with INR drawn fresh from `cross_dist`, and every
/// phase i.i.d. uniform over [0, 2*pi).
pub fn sample_state<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> ChannelState {
    let k = config.k;
    let direct = config.snr.sqrt();
    let mut strengths = vec![vec![0.0; k]; k];
    let mut phases = vec![vec![0.0; k]; k];
    for r in 0..k {
        for t in 0..k {
            strengths[r][t] = if r == t {
                direct
            } else {
                config.cross_dist.sample(rng).sqrt()
            };
            phases[r][t] = rng.random::<f64>() * TAU;
        }
    }
    ChannelState { strengths, phases }
}
