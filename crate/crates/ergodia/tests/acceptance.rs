//! Acceptance suite: one test per headline claim, each printing a
//! pass/fail line. Run with `cargo test -p ergodia --test acceptance --
//! --nocapture` to see the lines; failures carry the criterion number in
//! the panic message.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ergodia::{
    brute_fpm, classify, count_minimal_states, enumerate_minimal_states, ergodic_alignment_rate,
    has_fpm, inseparability_example, lp_oracle, lp_outer_bound, minimal_link_count,
    parallel_same_state_capacity, run_alignment, run_alignment_trials, scaling_experiment,
    separability_example, BottleneckGraph, CrossDist, NetworkConfig, PairingMode, StateClass,
};

fn pass(criterion: u32, detail: &str) {
    println!("acceptance criterion {criterion}: PASS — {detail}");
}

#[test]
fn criterion_1_alignment_reproduces_the_ergodic_rate() {
    let start = Instant::now();
    let snr: f64 = 10.0;
    let theory = 0.5 * (1.0 + 2.0 * snr).log2();
    let config = NetworkConfig::new(3, snr, CrossDist::constant(snr), 64, 7).unwrap();

    let trials = run_alignment_trials(&config, 200_000, PairingMode::Quantized, 10).unwrap();
    let mean_rate: f64 = trials.iter().map(|s| s.mean_rate()).sum::<f64>() / trials.len() as f64;
    let min_matched = trials
        .iter()
        .map(|s| s.matched_fraction)
        .fold(f64::INFINITY, f64::min);
    assert!(
        (mean_rate - theory).abs() / theory <= 0.03,
        "criterion 1: mean rate {mean_rate} outside 3% of {theory}"
    );
    assert!(
        min_matched >= 0.95,
        "criterion 1: matched fraction {min_matched} below 0.95"
    );

    let exact = run_alignment(&config, 200_000, PairingMode::Exact).unwrap();
    for rate in &exact.per_user_rate {
        assert!(
            (rate - theory).abs() <= 1e-9,
            "criterion 1: exact-pairing rate {rate} deviates from {theory}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 1: runtime {elapsed:?} exceeded 60 s"
    );
    pass(
        1,
        &format!(
            "quantized mean rate {mean_rate:.4} vs theory {theory:.4}, matched fraction {min_matched:.4}, exact mode at 1e-9, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_2_exact_rate_ignores_cross_strengths() {
    let snr = 10.0;
    let n = 50_000;
    let rates: Vec<f64> = [
        CrossDist::constant(0.0),
        CrossDist::constant(snr),
        CrossDist::constant(100.0 * snr),
    ]
    .iter()
    .map(|dist| {
        let config = NetworkConfig::new(3, snr, dist.clone(), 64, 99).unwrap();
        run_alignment(&config, n, PairingMode::Exact).unwrap().mean_rate()
    })
    .collect();
    for rate in &rates {
        assert!(
            (rate - rates[0]).abs() <= 1e-9,
            "criterion 2: rates differ across cross strengths: {rates:?}"
        );
    }
    pass(2, &format!("exact-pairing rates {rates:?} agree to 1e-9"));
}

#[test]
fn criterion_3_fpm_oracle_equivalence() {
    let start = Instant::now();

    // Exhaustive sweep of all undirected graphs on six users.
    let pairs: Vec<(usize, usize)> = (1..=6)
        .flat_map(|u| ((u + 1)..=6usize).map(move |v| (u, v)))
        .collect();
    assert_eq!(pairs.len(), 15);
    let exhaustive_mismatches: usize = (0u32..(1 << 15))
        .into_par_iter()
        .map(|mask| {
            let links: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &e)| e)
                .collect();
            let g = BottleneckGraph::new(6, links).unwrap();
            usize::from(has_fpm(&g) != brute_fpm(&g).unwrap())
        })
        .sum();
    assert_eq!(exhaustive_mismatches, 0, "criterion 3: exhaustive K=6 sweep disagreed");

    // Ten thousand random graphs on 7..=10 users at mixed densities.
    let random_mismatches: usize = (0u64..10_000)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xf83a11 ^ i);
            let k = rng.random_range(7..=10usize);
            let p = rng.random_range(0.05..0.95);
            let mut links = Vec::new();
            for u in 1..=k {
                for v in (u + 1)..=k {
                    if rng.random::<f64>() < p {
                        links.push((u, v));
                    }
                }
            }
            let g = BottleneckGraph::new(k, links).unwrap();
            usize::from(has_fpm(&g) != brute_fpm(&g).unwrap())
        })
        .sum();
    assert_eq!(random_mismatches, 0, "criterion 3: random sweep disagreed");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "criterion 3: runtime {elapsed:?} exceeded 60 s");
    pass(3, &format!("32768 exhaustive + 10000 random graphs, zero mismatches, {elapsed:.2?}"));
}

#[test]
fn criterion_4_minimal_state_counts() {
    assert_eq!(minimal_link_count(10).unwrap(), 5, "criterion 4");
    assert_eq!(
        count_minimal_states(10).unwrap().to_string(),
        "30240",
        "criterion 4: ten-user count"
    );
    for (k, expected) in [(2usize, 2usize), (4, 12), (6, 120)] {
        let enumerated = enumerate_minimal_states(k).unwrap();
        assert_eq!(
            enumerated.len(),
            expected,
            "criterion 4: enumeration for K={k}"
        );
        assert_eq!(
            count_minimal_states(k).unwrap().to_string(),
            expected.to_string(),
            "criterion 4: formula for K={k}"
        );
    }
    pass(4, "minimal link counts and state counts match enumeration (2, 12, 120; K=10: 30240)");
}

#[test]
fn criterion_5_lemma_suite() {
    let triangle = BottleneckGraph::new(3, [(1, 2), (2, 3), (3, 1)]).unwrap();
    assert!(
        classify(&triangle).is_certified(),
        "criterion 5: triangle must certify as a bottleneck state"
    );

    let path = BottleneckGraph::new(3, [(1, 2), (2, 3)]).unwrap();
    assert_eq!(
        classify(&path),
        StateClass::NotCertified,
        "criterion 5: two links cannot pin three users"
    );

    let matching = BottleneckGraph::new(4, [(1, 2), (3, 4)]).unwrap();
    assert_eq!(
        classify(&matching),
        StateClass::MinimalBottleneck,
        "criterion 5: disjoint pair on four users"
    );

    let two_triangles =
        BottleneckGraph::new(6, [(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4)]).unwrap();
    let class = classify(&two_triangles);
    assert_eq!(
        class,
        StateClass::IrreducibleBottleneck,
        "criterion 5: six-user double triangle is irreducible"
    );
    assert!(!class.is_minimal(), "criterion 5: double triangle is not minimal");
    pass(5, "triangle certified, path rejected, 4-user matching minimal, 6-user double triangle irreducible only");
}

#[test]
fn criterion_6_lp_duality() {
    let results: Vec<(f64, f64, bool, usize, f64, f64)> = (0u64..10_000)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x1b0dd ^ i);
            let k = rng.random_range(2..=8usize);
            // snr >= 10^0.5 keeps 2*c1 - c2 >= 0 for every eps in [0, 1],
            // the regime where spanning edge sets pin the bound exactly.
            let snr = 10f64.powf(rng.random_range(0.5..2.0));
            let eps = rng.random_range(0.0..1.0);
            let p = rng.random_range(0.1..0.9);
            let mut edges = BTreeSet::new();
            for u in 1..=k {
                for v in (u + 1)..=k {
                    if rng.random::<f64>() < p {
                        edges.insert((u, v));
                    }
                }
            }
            let closed = lp_outer_bound(k, snr, eps, &edges).unwrap();
            let oracle = lp_oracle(k, snr, eps, &edges).unwrap();
            let spanning = has_fpm(&BottleneckGraph::new(k, edges.clone()).unwrap());
            (closed, oracle, spanning, k, snr, eps)
        })
        .collect();

    let mut spanning_count = 0;
    for (closed, oracle, spanning, k, snr, eps) in results {
        assert!(
            (closed - oracle).abs() < 1e-9,
            "criterion 6: duality gap at K={k} snr={snr} eps={eps}: {closed} vs {oracle}"
        );
        if spanning {
            spanning_count += 1;
            let pinned = k as f64 / 2.0 * ((1.0 + 2.0 * snr).log2() + eps);
            assert!(
                (closed - pinned).abs() < 1e-9,
                "criterion 6: spanning edge set not pinned at K={k}: {closed} vs {pinned}"
            );
        }
    }
    assert!(spanning_count > 1_000, "criterion 6: too few spanning instances to be meaningful");
    pass(6, &format!("10000 instances match the oracle to 1e-9 ({spanning_count} of them spanning and pinned)"));
}

#[test]
fn criterion_7_dense_scaling() {
    let start = Instant::now();
    let snr = 1.0;
    let eps = 0.3;
    let ks = [10usize, 20, 40, 80];
    let trials = 200;
    let outcome = scaling_experiment(
        &ks,
        &CrossDist::uniform(0.0, 2.0 * snr),
        snr,
        eps,
        trials,
        20_260_809,
    )
    .unwrap();

    let mut previous_freq = f64::INFINITY;
    let mut previous_var_sum = f64::INFINITY;
    let mut previous_scaled: Option<f64> = None;
    for record in &outcome.summary {
        assert!(
            record.freq_gap_gt_eps <= previous_freq,
            "criterion 7: gap frequency increased at K={}",
            record.k
        );
        previous_freq = record.freq_gap_gt_eps;

        let freq = record.freq_gap_gt_eps;
        let se = (freq * (1.0 - freq) / trials as f64).sqrt();
        assert!(
            freq <= record.cheb_bound + 3.0 * se,
            "criterion 7: frequency {freq} exceeds Chebyshev bound {} at K={}",
            record.cheb_bound,
            record.k
        );
        assert!(!record.degenerate, "criterion 7: distribution unexpectedly degenerate");

        // Analytic variances must shrink like 1/K^2: strictly decreasing
        // with K(K-1)-scaled values constant.
        let k = record.k;
        let rates = vec![ergodic_alignment_rate(snr).unwrap(); k];
        let delta = ergodia::analytic_delta(&CrossDist::uniform(0.0, 2.0 * snr), snr, eps);
        let (var_u, var_v) = ergodia::scaling::uv_variances(k, snr, eps, delta, &rates);
        let var_sum = var_u + var_v;
        assert!(var_sum < previous_var_sum, "criterion 7: variances did not decrease");
        previous_var_sum = var_sum;
        let scaled = var_sum * (k * (k - 1)) as f64;
        if let Some(prev) = previous_scaled {
            assert!(
                (scaled - prev).abs() < 1e-12,
                "criterion 7: variances do not scale as 1/K^2"
            );
        }
        previous_scaled = Some(scaled);

        // The observed bottleneck fraction tracks the closed-form interval
        // mass of the uniform law.
        let n_links = (k * (k - 1) * trials as usize) as f64;
        let delta_se = (delta * (1.0 - delta) / n_links).sqrt();
        assert!(
            (record.delta_hat - delta).abs() <= 3.0 * delta_se,
            "criterion 7: delta_hat {} far from analytic {delta} at K={k}",
            record.delta_hat
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "criterion 7: runtime {elapsed:?} exceeded 5 min");
    let freqs: Vec<f64> = outcome.summary.iter().map(|r| r.freq_gap_gt_eps).collect();
    let bounds: Vec<f64> = outcome.summary.iter().map(|r| r.cheb_bound).collect();
    pass(7, &format!("gap frequencies {freqs:?} under Chebyshev bounds {bounds:?}, variances ~ 1/K^2, {elapsed:.2?}"));
}

#[test]
fn criterion_8_example_calculators() {
    let tol = 1e-4;

    let (sep1, joint1) = inseparability_example(1.0).unwrap();
    assert!((sep1 - 4.0).abs() <= tol, "criterion 8: inseparable separate rate {sep1}");
    assert!(
        (joint1 - 4.754887502163468).abs() <= tol,
        "criterion 8: inseparable joint rate {joint1}"
    );
    assert!(joint1 > sep1, "criterion 8: joint must beat separate");

    let (sep, joint, feasible) = separability_example(10.0, 120.0).unwrap();
    assert!(
        (sep - 13.176952268336283).abs() <= tol,
        "criterion 8: separable separate rate {sep}"
    );
    assert!(
        (joint - 13.837726474549189).abs() <= tol,
        "criterion 8: separable joint rate {joint}"
    );
    assert!(feasible, "criterion 8: alpha=120 sits on the feasibility boundary");
    assert!(joint > sep, "criterion 8: joint must beat separate");

    for snr in [0.5f64, 1.0, 10.0, 42.0] {
        let expected = 24.0 * (1.0 + 2.0 * snr).log2();
        let value = parallel_same_state_capacity(12, 4, snr).unwrap();
        assert!(
            (value - expected).abs() <= tol,
            "criterion 8: 12 parallel 4-user states at snr={snr}: {value} vs {expected}"
        );
    }
    pass(8, "inseparability, separability and parallel-state calculators match their closed forms at 1e-4");
}
