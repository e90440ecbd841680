//! Closed-form capacity values and bounds, plus a sum-rate LP outer bound
//! from pairwise bottleneck constraints with an independent brute-force
//! oracle. All rates are in bits per channel use (log base 2).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::fractional_matching_number;

/// A scalar rate constraint with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub value: f64,
    pub kind: BoundKind,
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SingleUser,
    PairBottleneck,
    SumMinimalState,
    LpOuter,
    AchievableIA,
}

fn require_nonnegative(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::Domain(format!("{name} must be finite and non-negative, got {value}")));
    }
    Ok(())
}

/// Interference-free capacity of one user: log2(1 + snr).
pub fn single_user_capacity(snr: f64) -> Result<f64> {
    require_nonnegative("snr", snr)?;
    Ok((1.0 + snr).log2())
}

/// Sum-rate cap of a pair joined by a bottleneck link:
/// log2(1 + 2*snr) + eps (the two-user Z-channel value, eps-relaxed).
pub fn pair_bound(snr: f64, eps: f64) -> Result<f64> {
    require_nonnegative("snr", snr)?;
    require_nonnegative("eps", eps)?;
    Ok((1.0 + 2.0 * snr).log2() + eps)
}

/// Ergodic sum capacity of a minimal bottleneck state:
/// (K/2) * log2(1 + 2*snr).
pub fn sum_capacity_minimal(k: usize, snr: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("sum capacity needs K >= 2, got {k}")));
    }
    require_nonnegative("snr", snr)?;
    Ok(k as f64 / 2.0 * (1.0 + 2.0 * snr).log2())
}

fn validate_edges(k: usize, edges: &BTreeSet<(usize, usize)>) -> Result<()> {
    for &(u, v) in edges {
        if u == v || u < 1 || v < 1 || u > k || v > k {
            return Err(Error::Domain(format!("edge ({u},{v}) invalid for K={k}")));
        }
    }
    Ok(())
}

fn normalize_edges(edges: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
}

/// Maximum of sum(R_k) subject to 0 <= R_k <= c1 = log2(1+snr) and
/// R_r + R_t <= c2 = log2(1+2*snr) + eps for each edge {r, t}.
///
/// Solved in closed form through matching duality:
/// K*c1 - max(0, 2*c1 - c2) * nu_f, where nu_f is the fractional matching
/// number of the edge set. Valid because c1 <= c2, so each unit of
/// fractional matching trades exactly max(0, 2*c1 - c2) of slack.
pub fn lp_outer_bound(k: usize, snr: f64, eps: f64, edges: &BTreeSet<(usize, usize)>) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("lp bound needs K >= 1".into()));
    }
    require_nonnegative("snr", snr)?;
    require_nonnegative("eps", eps)?;
    validate_edges(k, edges)?;
    let edges = normalize_edges(edges);
    let c1 = (1.0 + snr).log2();
    let c2 = (1.0 + 2.0 * snr).log2() + eps;
    let nu_f = fractional_matching_number(k, &edges);
    Ok(k as f64 * c1 - (2.0 * c1 - c2).max(0.0) * nu_f)
}

const LP_ORACLE_MAX_K: usize = 12;

/// Independent oracle for `lp_outer_bound`: direct enumeration of the LP's
/// basic feasible points.
///
/// Every vertex of the polytope {0 <= R <= c1, R_r + R_t <= c2 on edges}
/// has coordinates in {0, c2 - c1, c2/2, c1}: tight pair constraints chain
/// values along trees (pinned by a box bound at some vertex) or force c2/2
/// on odd cycles. Enumerating those assignments and keeping the feasible
/// maximum therefore recovers the exact LP optimum.
pub fn lp_oracle(k: usize, snr: f64, eps: f64, edges: &BTreeSet<(usize, usize)>) -> Result<f64> {
    if k > LP_ORACLE_MAX_K {
        return Err(Error::Resource(format!(
            "lp oracle is limited to K <= {LP_ORACLE_MAX_K}, got {k}"
        )));
    }
    if k < 1 {
        return Err(Error::Domain("lp oracle needs K >= 1".into()));
    }
    require_nonnegative("snr", snr)?;
    require_nonnegative("eps", eps)?;
    validate_edges(k, edges)?;
    let edges = normalize_edges(edges);
    let c1 = (1.0 + snr).log2();
    let c2 = (1.0 + 2.0 * snr).log2() + eps;

    let mut levels = vec![0.0, c1];
    for candidate in [c2 - c1, c2 / 2.0] {
        if candidate > 0.0 && candidate < c1 {
            levels.push(candidate);
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();

    let adjacency: Vec<Vec<usize>> = (1..=k)
        .map(|v| {
            edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b - 1)
                    } else if b == v {
                        Some(a - 1)
                    } else {
                        None
                    }
                })
                .filter(|&other| other < v - 1)
                .collect()
        })
        .collect();

    let mut assignment = vec![0.0; k];
    let mut best = 0.0;
    search_assignments(0, k, c1, c2, &levels, &adjacency, &mut assignment, &mut best);
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn search_assignments(
    v: usize,
    k: usize,
    c1: f64,
    c2: f64,
    levels: &[f64],
    adjacency: &[Vec<usize>],
    assignment: &mut Vec<f64>,
    best: &mut f64,
) {
    if v == k {
        let total: f64 = assignment.iter().sum();
        if total > *best {
            *best = total;
        }
        return;
    }
    let fixed: f64 = assignment[..v].iter().sum();
    if fixed + (k - v) as f64 * c1 <= *best {
        return; // cannot beat the incumbent
    }
    'level: for &value in levels.iter().rev() {
        for &earlier in &adjacency[v] {
            // Tolerance absorbs roundoff in c2; candidate levels are exact
            // combinations of c1 and c2 so true vertices stay feasible.
            if assignment[earlier] + value > c2 + 1e-12 {
                continue 'level;
            }
        }
        assignment[v] = value;
        search_assignments(v + 1, k, c1, c2, levels, adjacency, assignment, best);
    }
    assignment[v] = 0.0;
}

/// The three-user two-state example where joint coding beats per-state
/// coding: returns (separate, joint) sum rates over the state pair,
/// 2*log2(1+3*snr) vs 3*log2(1+2*snr).
pub fn inseparability_example(snr: f64) -> Result<(f64, f64)> {
    require_nonnegative("snr", snr)?;
    let separate = 2.0 * (1.0 + 3.0 * snr).log2();
    let joint = 3.0 * (1.0 + 2.0 * snr).log2();
    Ok((separate, joint))
}

/// The three parallel two-user states where cross-state coding can beat
/// per-state coding only when the strong cross link clears
/// log2(1+alpha) >= 2*log2(1+snr). Returns (separate, joint, feasible).
pub fn separability_example(snr: f64, alpha: f64) -> Result<(f64, f64, bool)> {
    require_nonnegative("snr", snr)?;
    require_nonnegative("alpha", alpha)?;
    let separate = 3.0 * (1.0 + 2.0 * snr).log2();
    let joint = 4.0 * (1.0 + snr).log2();
    // log2(1+alpha) >= 2*log2(1+snr), compared in linear form so the
    // boundary alpha = snr^2 + 2*snr is decided exactly.
    let feasible = 1.0 + alpha >= (1.0 + snr) * (1.0 + snr);
    Ok((separate, joint, feasible))
}

/// Sum capacity of M parallel channels all in the same minimal bottleneck
/// state: M * (K/2) * log2(1 + 2*snr), achieved with separate coding.
pub fn parallel_same_state_capacity(m: usize, k: usize, snr: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain(format!("need at least one sub-channel, got {m}")));
    }
    Ok(m as f64 * sum_capacity_minimal(k, snr)?)
}

/// Total rate achieved by ergodic interference alignment across K users.
pub fn achievable_ia_sum(k: usize, snr: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("need K >= 1".into()));
    }
    require_nonnegative("snr", snr)?;
    Ok(k as f64 * 0.5 * (1.0 + 2.0 * snr).log2())
}

impl RateBound {
    pub fn single_user(snr: f64) -> Result<RateBound> {
        Ok(RateBound {
            value: single_user_capacity(snr)?,
            kind: BoundKind::SingleUser,
            provenance: "interference-free point-to-point capacity log2(1+SNR)".into(),
        })
    }

    pub fn pair_bottleneck(snr: f64, eps: f64) -> Result<RateBound> {
        Ok(RateBound {
            value: pair_bound(snr, eps)?,
            kind: BoundKind::PairBottleneck,
            provenance: "two-user Z-channel bottleneck sum capacity log2(1+2SNR)+eps".into(),
        })
    }

    pub fn sum_minimal_state(k: usize, snr: f64) -> Result<RateBound> {
        Ok(RateBound {
            value: sum_capacity_minimal(k, snr)?,
            kind: BoundKind::SumMinimalState,
            provenance: "minimal bottleneck state sum capacity (K/2)log2(1+2SNR)".into(),
        })
    }

    pub fn lp_outer(k: usize, snr: f64, eps: f64, edges: &BTreeSet<(usize, usize)>) -> Result<RateBound> {
        Ok(RateBound {
            value: lp_outer_bound(k, snr, eps, edges)?,
            kind: BoundKind::LpOuter,
            provenance: "LP outer bound from per-pair bottleneck constraints and single-user caps".into(),
        })
    }

    pub fn achievable_ia(k: usize, snr: f64) -> Result<RateBound> {
        Ok(RateBound {
            value: achievable_ia_sum(k, snr)?,
            kind: BoundKind::AchievableIA,
            provenance: "ergodic interference alignment sum rate K*(1/2)log2(1+2SNR)".into(),
        })
    }
}
