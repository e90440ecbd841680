//! Large-network behaviour: sample networks whose cross strengths are
//! drawn once and frozen, detect eps-bottleneck links, aggregate the
//! pairwise-constraint statistics with their Chebyshev concentration
//! bound, and sweep the per-user gap between the LP outer bound and the
//! alignment inner bound as the user count grows.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::alignment::{derive_seed, ergodic_alignment_rate};
use crate::bounds::lp_outer_bound;
use crate::config::CrossDist;
use crate::error::{Error, Result};

/// A K-user network with cross strengths drawn i.i.d. once and held fixed;
/// only phases keep varying.
#[derive(Debug, Clone)]
pub struct DenseNetwork {
    k: usize,
    snr: f64,
    /// INR of link (r, t), row r = receiver; the diagonal is unused.
    inr: Vec<Vec<f64>>,
    cross_dist: CrossDist,
}

impl DenseNetwork {
    pub fn sample<R: Rng + ?Sized>(k: usize, snr: f64, cross_dist: &CrossDist, rng: &mut R) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("dense network needs K >= 2, got {k}")));
        }
        if !snr.is_finite() || snr <= 0.0 {
            return Err(Error::Config(format!("snr must be positive, got {snr}")));
        }
        cross_dist.validate()?;
        let inr = (0..k)
            .map(|r| {
                (0..k)
                    .map(|t| if r == t { 0.0 } else { cross_dist.sample(rng) })
                    .collect()
            })
            .collect();
        Ok(DenseNetwork { k, snr, inr, cross_dist: cross_dist.clone() })
    }

    /// A network with every cross INR set explicitly (tests, demos).
    pub fn from_inr(snr: f64, inr: Vec<Vec<f64>>, cross_dist: CrossDist) -> Result<Self> {
        let k = inr.len();
        if k < 2 || inr.iter().any(|row| row.len() != k) {
            return Err(Error::Config("INR matrix must be square with K >= 2".into()));
        }
        if inr.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("INR values must be finite and non-negative".into()));
        }
        Ok(DenseNetwork { k, snr, inr, cross_dist })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn inr(&self, r: usize, t: usize) -> f64 {
        self.inr[r][t]
    }

    pub fn cross_dist(&self) -> &CrossDist {
        &self.cross_dist
    }
}

/// Largest INR that keeps the pair bound within eps of the bottleneck
/// value: solves log2(1 + snr + inr) = log2(1 + 2*snr) + eps.
pub fn eps_bottleneck_inr_max(snr: f64, eps: f64) -> f64 {
    (1.0 + 2.0 * snr) * 2f64.powf(eps) - 1.0 - snr
}

fn indicator(inr: f64, snr: f64, eps: f64) -> bool {
    // Strong-interference surrogate for the two-user Z-channel sum
    // capacity: for inr >= snr the pair rate is capped by
    // log2(1 + snr + inr), which equals log2(1 + 2*snr) at inr = snr.
    inr >= snr && inr <= eps_bottleneck_inr_max(snr, eps)
}

/// True iff the cross link is an eps-bottleneck: its strength at least
/// matches the direct link and its pair bound stays within eps of
/// log2(1 + 2*snr).
pub fn is_eps_bottleneck(inr: f64, snr: f64, eps: f64) -> Result<bool> {
    if !inr.is_finite() || inr < 0.0 || !snr.is_finite() || snr < 0.0 {
        return Err(Error::Domain("inr and snr must be non-negative".into()));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok(indicator(inr, snr, eps))
}

/// Elementwise eps-bottleneck test; the diagonal is always false.
pub fn bottleneck_indicators(net: &DenseNetwork, eps: f64) -> Result<Vec<Vec<bool>>> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Domain(format!("eps must be non-negative, got {eps}")));
    }
    Ok((0..net.k)
        .map(|r| {
            (0..net.k)
                .map(|t| r != t && indicator(net.inr[r][t], net.snr, eps))
                .collect()
        })
        .collect())
}

/// Undirected pairs covered by at least one indicated directed link.
pub fn indicated_edges(indicators: &[Vec<bool>]) -> BTreeSet<(usize, usize)> {
    let k = indicators.len();
    let mut edges = BTreeSet::new();
    for r in 0..k {
        for t in 0..k {
            if r != t && indicators[r][t] {
                edges.insert((r.min(t) + 1, r.max(t) + 1));
            }
        }
    }
    edges
}

/// Normalized masses of the indicated pairwise constraints together with
/// their analytic moments.
#[derive(Debug, Clone, Serialize)]
pub struct UvStatistics {
    /// Measured mass of the constraint bound: the indicated fraction times
    /// log2(1+2*snr)+eps.
    pub u: f64,
    /// Measured mass of the supplied rates over the indicated pairs.
    pub v: f64,
    pub u_mean: f64,
    pub v_mean: f64,
    pub u_var: f64,
    pub v_var: f64,
    /// Analytic eps-bottleneck probability of the cross distribution.
    pub delta: f64,
}

/// Computes U = (1/(K(K-1))) * sum I_rt * (log2(1+2snr)+eps) and
/// V = (1/(K(K-1))) * sum I_rt * (R_r + R_t) over the network's
/// indicators, plus their analytic means and variances at the
/// distribution's true eps-bottleneck probability.
pub fn uv_statistics(net: &DenseNetwork, eps: f64, rates: &[f64]) -> Result<UvStatistics> {
    let k = net.k;
    if rates.len() != k {
        return Err(Error::Domain(format!("need {k} rates, got {}", rates.len())));
    }
    let cap = (1.0 + net.snr).log2() + 1e-9;
    if rates.iter().any(|&r| !r.is_finite() || r < 0.0 || r > cap) {
        return Err(Error::Domain("rates must lie within the single-user capacity".into()));
    }
    let indicators = bottleneck_indicators(net, eps)?;
    let c2 = (1.0 + 2.0 * net.snr).log2() + eps;
    let pairs = (k * (k - 1)) as f64;
    let mut u = 0.0;
    let mut v = 0.0;
    let mut all_indicated_within_bound = true;
    for r in 0..k {
        for t in 0..k {
            if r != t && indicators[r][t] {
                u += c2;
                v += rates[r] + rates[t];
                if rates[r] + rates[t] > c2 {
                    all_indicated_within_bound = false;
                }
            }
        }
    }
    u /= pairs;
    v /= pairs;
    if all_indicated_within_bound {
        assert!(v <= u, "indicated rate mass {v} exceeded bound mass {u}");
    }

    let delta = analytic_delta(&net.cross_dist, net.snr, eps);
    let rate_sum: f64 = rates.iter().sum();
    let u_mean = delta * c2;
    // Each rate appears in 2*(K-1) of the K(K-1) ordered pairs.
    let v_mean = delta * 2.0 * rate_sum / k as f64;
    let (u_var, v_var) = uv_variances(k, net.snr, eps, delta, rates);
    Ok(UvStatistics { u, v, u_mean, v_mean, u_var, v_var, delta })
}

/// Analytic variances of the U and V masses at bottleneck probability
/// delta, for independent indicators.
pub fn uv_variances(k: usize, snr: f64, eps: f64, delta: f64, rates: &[f64]) -> (f64, f64) {
    let pairs = (k * (k - 1)) as f64;
    let bernoulli = delta * (1.0 - delta);
    let u_term = 0.5 * (1.0 + 2.0 * snr).log2() + eps;
    let u_var = bernoulli / pairs * u_term * u_term;
    let mut pair_square_sum = 0.0;
    for r in 0..k {
        for t in 0..k {
            if r != t {
                let s = rates[r] + rates[t];
                pair_square_sum += s * s;
            }
        }
    }
    let v_var = bernoulli / (pairs * pairs) * pair_square_sum;
    (u_var, v_var)
}

/// Analytic probability that one cross link is an eps-bottleneck.
pub fn analytic_delta(cross_dist: &CrossDist, snr: f64, eps: f64) -> f64 {
    cross_dist.interval_prob(snr, eps_bottleneck_inr_max(snr, eps))
}

/// Chebyshev-style failure bound: min(1, 4*(var_u + var_v)/(eps^2 * delta^2)).
pub fn chebyshev_bound(delta: f64, eps: f64, var_u: f64, var_v: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if var_u < 0.0 || var_v < 0.0 {
        return Err(Error::Domain("variances must be non-negative".into()));
    }
    Ok((4.0 * (var_u + var_v) / (eps * eps * delta * delta)).min(1.0))
}

/// One sampled network of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingTrial {
    pub k: usize,
    pub trial: u64,
    /// Observed fraction of indicated cross links.
    pub delta_hat: f64,
    pub outer_per_user: f64,
    pub inner_per_user: f64,
    pub gap_per_user: f64,
}

/// Aggregate over the trials of one K.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRecord {
    pub k: usize,
    pub trials: u64,
    pub delta_hat: f64,
    pub outer_per_user: f64,
    pub inner_per_user: f64,
    pub gap_per_user: f64,
    /// Fraction of trials whose per-user gap exceeded eps.
    pub freq_gap_gt_eps: f64,
    /// Analytic Chebyshev bound at this K (1.0 when degenerate).
    pub cheb_bound: f64,
    /// True when the cross distribution carries no eps-bottleneck mass.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingOutcome {
    pub trials: Vec<ScalingTrial>,
    pub summary: Vec<ScalingRecord>,
}

/// Sweeps network sizes: per (K, trial) draws a frozen dense network,
/// turns its eps-bottleneck links into pair constraints, and compares the
/// LP outer bound per user against the alignment inner bound.
pub fn scaling_experiment(
    ks: &[usize],
    cross_dist: &CrossDist,
    snr: f64,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<ScalingOutcome> {
    if ks.is_empty() {
        return Err(Error::Config("need at least one network size".into()));
    }
    if ks.iter().any(|&k| k < 2) {
        return Err(Error::Config("every K must be at least 2".into()));
    }
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if !snr.is_finite() || snr <= 0.0 {
        return Err(Error::Config(format!("snr must be positive, got {snr}")));
    }
    cross_dist.validate()?;

    let inner_per_user = ergodic_alignment_rate(snr)?;
    let jobs: Vec<(usize, u64)> = ks
        .iter()
        .flat_map(|&k| (0..trials).map(move |trial| (k, trial)))
        .collect();
    let mut trial_rows: Vec<ScalingTrial> = jobs
        .par_iter()
        .map(|&(k, trial)| -> Result<ScalingTrial> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64, trial));
            let net = DenseNetwork::sample(k, snr, cross_dist, &mut rng)?;
            let indicators = bottleneck_indicators(&net, eps)?;
            let indicated = indicators.iter().flatten().filter(|&&b| b).count();
            let delta_hat = indicated as f64 / (k * (k - 1)) as f64;
            let edges = indicated_edges(&indicators);
            let outer_per_user = lp_outer_bound(k, snr, eps, &edges)? / k as f64;
            let gap_per_user = outer_per_user - inner_per_user;
            assert!(gap_per_user >= -1e-9, "outer bound fell below the inner bound");
            Ok(ScalingTrial { k, trial, delta_hat, outer_per_user, inner_per_user, gap_per_user })
        })
        .collect::<Result<_>>()?;
    trial_rows.sort_by_key(|row| (row.k, row.trial));

    let delta = analytic_delta(cross_dist, snr, eps);
    let degenerate = delta == 0.0;
    let ia_rates_for = |k: usize| vec![inner_per_user; k];
    let summary = ks
        .iter()
        .map(|&k| {
            let rows: Vec<&ScalingTrial> = trial_rows.iter().filter(|row| row.k == k).collect();
            let n = rows.len() as f64;
            let mean = |f: fn(&ScalingTrial) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            let freq_gap_gt_eps =
                rows.iter().filter(|r| r.gap_per_user > eps).count() as f64 / n;
            let cheb_bound = if degenerate {
                1.0
            } else {
                let (var_u, var_v) = uv_variances(k, snr, eps, delta, &ia_rates_for(k));
                chebyshev_bound(delta, eps, var_u, var_v).expect("delta > 0 checked")
            };
            ScalingRecord {
                k,
                trials,
                delta_hat: mean(|r| r.delta_hat),
                outer_per_user: mean(|r| r.outer_per_user),
                inner_per_user,
                gap_per_user: mean(|r| r.gap_per_user),
                freq_gap_gt_eps,
                cheb_bound,
                degenerate,
            }
        })
        .collect();
    Ok(ScalingOutcome { trials: trial_rows, summary })
}
