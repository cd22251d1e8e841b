//! The analytic energy chains against protocol simulation: transition
//! frequencies, stationary occupancy, the channel-condition probability,
//! the power-iteration route to the stationary law, and the continuous
//! infinite-capacity bound.

mod common;

use anj::channels::{dbm_to_watts, sample_exponential, RngStream};
use anj::energy_chain::{
    channel_ready_prob, fd_transition_matrix, hd_transition_matrix, infinite_capacity_ready_prob,
    mean_oeh_transfer, stationary_distribution, EnergyStorageSpec, TransitionMatrix,
};
use anj::mc_sim::{estimate, simulate_batched, SimScheme, TrialStats, DEFAULT_BATCHES};
use common::{
    continuous_ready_fraction, default_params, default_storage, power_iteration, tv_distance,
};

/// Every analytic transition probability must match the observed frequency
/// within 3 binomial standard errors (computed with the analytic p, rows
/// with zero visits carry no evidence and are skipped).
fn assert_transitions_match(m: &TransitionMatrix, stats: &TrialStats, label: &str) {
    let dim = m.dim();
    let mut checked = 0;
    for i in 0..dim {
        let visits = stats.transition_row_total(i);
        if visits == 0 {
            continue;
        }
        for j in 0..dim {
            let p = m.get(i, j);
            let emp = stats.transition(i, j) as f64 / visits as f64;
            let se = (p * (1.0 - p) / visits as f64).sqrt();
            assert!(
                (emp - p).abs() <= 3.0 * se + 1e-12,
                "{label}: p[{i},{j}] = {p} vs empirical {emp} over {visits} visits"
            );
            checked += 1;
        }
    }
    assert!(checked > 0, "{label}: no transitions observed at all");
}

#[test]
fn fd_transition_matrix_matches_simulated_frequencies() {
    let p = default_params();
    let storage = default_storage(10, &p);
    let m = fd_transition_matrix(&p, &storage).unwrap();
    let (stats, _) = simulate_batched(
        SimScheme::FullDuplex,
        &p,
        &storage,
        1_000_000,
        31,
        DEFAULT_BATCHES,
    )
    .unwrap();
    assert_transitions_match(&m, &stats, "fd L=10");
}

#[test]
fn hd_transition_matrix_matches_simulated_frequencies() {
    let p = default_params();
    let storage = default_storage(10, &p);
    let m = hd_transition_matrix(&p, &storage).unwrap();
    let (stats, _) = simulate_batched(
        SimScheme::HalfDuplex,
        &p,
        &storage,
        1_000_000,
        37,
        DEFAULT_BATCHES,
    )
    .unwrap();
    assert_transitions_match(&m, &stats, "hd L=10");
}

#[test]
fn stationary_solve_matches_power_iteration() {
    let p = default_params();
    for levels in [10usize, 50, 100] {
        let storage = default_storage(levels, &p);
        for (m, label) in [
            (fd_transition_matrix(&p, &storage).unwrap(), "fd"),
            (hd_transition_matrix(&p, &storage).unwrap(), "hd"),
        ] {
            let lu = stationary_distribution(&m, storage.tau()).unwrap();
            let pi = power_iteration(&m, 100_000);
            for i in 0..m.dim() {
                assert!(
                    (lu.xi[i] - pi[i]).abs() < 1e-9,
                    "{label} L={levels}: level {i}: LU {} vs power iteration {}",
                    lu.xi[i],
                    pi[i]
                );
            }
        }
    }
}

#[test]
fn occupancy_histogram_concentrates_on_the_stationary_law() {
    let p = default_params();
    let storage = default_storage(100, &p);
    let m = fd_transition_matrix(&p, &storage).unwrap();
    let sd = stationary_distribution(&m, storage.tau()).unwrap();
    let (stats, _) = simulate_batched(
        SimScheme::FullDuplex,
        &p,
        &storage,
        1_000_000,
        41,
        DEFAULT_BATCHES,
    )
    .unwrap();
    let emp = estimate(&stats).unwrap();
    let tv = tv_distance(&emp.occupancy, &sd.xi);
    assert!(tv < 0.02, "TV(occupancy, xi) = {tv}");
}

#[test]
fn channel_ready_prob_matches_gain_sampling() {
    // q_c is the chance the sampled source-destination gain clears the gate
    let mut p = default_params();
    p.p_s = 10f64.powf(-0.5);
    let q = channel_ready_prob(&p).unwrap();
    let threshold = (2f64.powf(p.r_s) - 1.0) * p.sigma2_d / p.p_s;
    let mut rng = RngStream::new(51, 0);
    let n = 1_000_000;
    let hits = (0..n)
        .filter(|_| sample_exponential(p.omega_sd, &mut rng) >= threshold)
        .count();
    let emp = hits as f64 / n as f64;
    let se = (q * (1.0 - q) / n as f64).sqrt();
    assert!((emp - q).abs() <= 3.0 * se, "q_c = {q} vs empirical {emp}");
}

#[test]
fn mode_frequency_factorizes_into_channel_and_energy_conditions() {
    // the two gates are independent, so the jamming-block frequency is
    // their product
    let p = default_params();
    let storage = default_storage(100, &p);
    let q_c = channel_ready_prob(&p).unwrap();
    let ready = {
        let m = fd_transition_matrix(&p, &storage).unwrap();
        stationary_distribution(&m, storage.tau())
            .unwrap()
            .ready_prob
    };
    let (stats, _) = simulate_batched(
        SimScheme::FullDuplex,
        &p,
        &storage,
        1_000_000,
        43,
        DEFAULT_BATCHES,
    )
    .unwrap();
    let emp = estimate(&stats).unwrap();
    let expect = q_c * ready;
    let se = (expect * (1.0 - expect) / emp.blocks as f64).sqrt();
    assert!(
        (emp.oeh_freq - expect).abs() <= 3.0 * se + 1e-9,
        "oeh freq {} vs q_c * ready = {expect} (3 s.e. = {})",
        emp.oeh_freq,
        3.0 * se
    );
}

#[test]
fn infinite_bound_matches_continuous_storage_simulation() {
    // deficit regime: threshold above the mean opportunistic recovery
    let mut p = default_params();
    p.p_s = dbm_to_watts(30.0);
    p.p_j = dbm_to_watts(15.0);
    assert!(p.energy_threshold() > mean_oeh_transfer(&p));
    let q_b = infinite_capacity_ready_prob(&p).unwrap();
    assert!(q_b < 1.0);
    let (frac, se) = continuous_ready_fraction(&p, 10_000_000, 61, 1e4);
    assert!(
        (frac - q_b).abs() <= 3.0 * se.max(1e-5),
        "q_b = {q_b} vs simulated {frac} (3 s.e. = {})",
        3.0 * se.max(1e-5)
    );

    // accumulation regime: the store drifts to its cap and stays ready
    let mut pa = default_params();
    pa.p_s = dbm_to_watts(30.0);
    assert_eq!(infinite_capacity_ready_prob(&pa).unwrap(), 1.0);
    let (frac_acc, _) = continuous_ready_fraction(&pa, 200_000, 67, 1e4);
    assert!(frac_acc > 0.999, "accumulation regime fraction {frac_acc}");
}

#[test]
fn finite_ready_prob_approaches_the_infinite_bound_from_below() {
    // The discretized store loses up to one quantization step per harvest
    // and rounds its consumption up, so its ready probability sits below
    // the continuous bound and climbs toward it as the resolution grows.
    let mut p = default_params();
    p.p_j = dbm_to_watts(10.0);
    for p_s_dbm in [20.0, 25.0] {
        p.p_s = dbm_to_watts(p_s_dbm);
        let q_b = infinite_capacity_ready_prob(&p).unwrap();
        let mut gaps = Vec::new();
        let mut prev = 0.0;
        for levels in [100usize, 200, 400] {
            let storage = EnergyStorageSpec::for_params(0.1, 0.05, levels, &p).unwrap();
            let m = fd_transition_matrix(&p, &storage).unwrap();
            let ready = stationary_distribution(&m, storage.tau())
                .unwrap()
                .ready_prob;
            assert!(
                ready <= q_b + 1e-9,
                "L={levels}: ready {ready} above bound {q_b}"
            );
            assert!(
                ready >= prev - 1e-9,
                "L={levels}: refinement went backwards"
            );
            prev = ready;
            gaps.push((q_b - ready) / q_b);
        }
        // quantization penalty scales like 1/L: quadrupling the resolution
        // must cut the residual gap well below half
        assert!(
            gaps[2] < 0.45 * gaps[0] && gaps[2] < 0.10,
            "P_S = {p_s_dbm} dBm: gaps {gaps:?} do not shrink like 1/L"
        );
    }
}
