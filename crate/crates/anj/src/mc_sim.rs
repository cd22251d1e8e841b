//! Block-level Monte Carlo simulation of the jamming protocol.
//!
//! The simulator replays the protocol decision-by-decision: sample the
//! source-destination gain, pick the block mode from the energy and channel
//! conditions, harvest or jam accordingly, and score secrecy outcomes from
//! freshly drawn eavesdropper-side gains. It estimates every quantity the
//! closed forms predict -- outage rate, non-zero-secrecy rate, mode
//! frequencies, level occupancy, and transition frequencies -- without
//! touching any of the analytic machinery, so agreement is meaningful.

use crate::channels::{
    sample_exponential, sample_gamma, sample_rician_power, RngStream, SystemParams,
};
use crate::energy_chain::EnergyStorageSpec;
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Block operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dedicated energy harvesting: no data, all antennas charge.
    Deh,
    /// Opportunistic block: data plus jamming, residual harvesting.
    Oeh,
}

/// Which jammer the simulator replays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimScheme {
    FullDuplex,
    HalfDuplex,
}

/// Discretized state of the jammer's primary store during a run.
///
/// The level index is the source of truth; the stored energy is always an
/// exact multiple of the discretization step, mirroring the level dynamics
/// the transition matrices describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JammerState {
    level: usize,
    mode_last: Option<Mode>,
}

impl JammerState {
    pub fn empty() -> Self {
        Self {
            level: 0,
            mode_last: None,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn mode_last(&self) -> Option<Mode> {
        self.mode_last
    }

    pub fn pes_energy(&self, storage: &EnergyStorageSpec) -> f64 {
        storage.level_energy(self.level)
    }

    /// Energy condition: stored energy at or above the threshold level.
    pub fn ready(&self, tau: usize) -> bool {
        self.level >= tau
    }

    fn charge(&mut self, gained: usize, max_level: usize) {
        self.level = (self.level + gained).min(max_level);
    }

    fn discharge(&mut self, tau: usize) {
        debug_assert!(self.level >= tau);
        self.level -= tau;
    }
}

/// Raw counters accumulated over the recorded (post burn-in) blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialStats {
    /// Recorded blocks (the first 1% of simulated blocks are burn-in).
    pub blocks: u64,
    pub outage_count: u64,
    pub nzsc_count: u64,
    pub deh_count: u64,
    pub oeh_count: u64,
    /// Occupancy of each start-of-block level, length L+1.
    pub level_histogram: Vec<u64>,
    /// Start-level to start-level transition counts, (L+1)² row-major.
    pub transition_counts: Vec<u64>,
}

impl TrialStats {
    pub fn new(levels: usize) -> Self {
        let dim = levels + 1;
        Self {
            blocks: 0,
            outage_count: 0,
            nzsc_count: 0,
            deh_count: 0,
            oeh_count: 0,
            level_histogram: vec![0; dim],
            transition_counts: vec![0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.level_histogram.len()
    }

    pub fn transition(&self, i: usize, j: usize) -> u64 {
        self.transition_counts[i * self.dim() + j]
    }

    /// Visits recorded as transition sources for level i.
    pub fn transition_row_total(&self, i: usize) -> u64 {
        let d = self.dim();
        self.transition_counts[i * d..(i + 1) * d].iter().sum()
    }

    /// Fold another batch into this one; counts just add up, so the merge
    /// order can never change the result.
    pub fn merge(&mut self, other: &TrialStats) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "merging stats of different level counts"
        );
        self.blocks += other.blocks;
        self.outage_count += other.outage_count;
        self.nzsc_count += other.nzsc_count;
        self.deh_count += other.deh_count;
        self.oeh_count += other.oeh_count;
        for (a, b) in self.level_histogram.iter_mut().zip(&other.level_histogram) {
            *a += b;
        }
        for (a, b) in self
            .transition_counts
            .iter_mut()
            .zip(&other.transition_counts)
        {
            *a += b;
        }
    }
}

/// Frequencies with binomial standard errors, derived from [`TrialStats`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    pub blocks: u64,
    pub p_so: f64,
    pub p_so_se: f64,
    pub p_nzsc: f64,
    pub p_nzsc_se: f64,
    pub oeh_freq: f64,
    pub oeh_freq_se: f64,
    /// Normalized level occupancy, sums to 1.
    pub occupancy: Vec<f64>,
    /// Row-normalized transition frequencies; rows without visits stay 0.
    pub transition_freq: Vec<f64>,
}

impl EmpiricalReport {
    pub fn dim(&self) -> usize {
        self.occupancy.len()
    }
}

/// Maximum-likelihood frequency estimates from raw counters.
pub fn estimate(stats: &TrialStats) -> Result<EmpiricalReport> {
    if stats.blocks == 0 {
        return Err(Error::Usage(
            "cannot estimate from zero recorded blocks".into(),
        ));
    }
    let n = stats.blocks as f64;
    let ratio_se = |p: f64| (p * (1.0 - p) / n).sqrt();
    let p_so = stats.outage_count as f64 / n;
    let p_nzsc = stats.nzsc_count as f64 / n;
    let oeh = stats.oeh_count as f64 / n;
    let hist_total: u64 = stats.level_histogram.iter().sum();
    let occupancy = stats
        .level_histogram
        .iter()
        .map(|&c| c as f64 / hist_total as f64)
        .collect();
    let dim = stats.dim();
    let mut transition_freq = vec![0.0; dim * dim];
    for i in 0..dim {
        let total = stats.transition_row_total(i);
        if total > 0 {
            for j in 0..dim {
                transition_freq[i * dim + j] = stats.transition(i, j) as f64 / total as f64;
            }
        }
    }
    Ok(EmpiricalReport {
        blocks: stats.blocks,
        p_so,
        p_so_se: ratio_se(p_so),
        p_nzsc,
        p_nzsc_se: ratio_se(p_nzsc),
        oeh_freq: oeh,
        oeh_freq_se: ratio_se(oeh),
        occupancy,
        transition_freq,
    })
}

/// Simulate the full-duplex protocol for `n_blocks` blocks.
pub fn simulate_fd(
    params: &SystemParams,
    storage: &EnergyStorageSpec,
    n_blocks: u64,
    rng: &mut RngStream,
) -> Result<TrialStats> {
    simulate(SimScheme::FullDuplex, params, storage, n_blocks, rng)
}

/// Simulate the half-duplex benchmark for `n_blocks` blocks.
pub fn simulate_hd(
    params: &SystemParams,
    storage: &EnergyStorageSpec,
    n_blocks: u64,
    rng: &mut RngStream,
) -> Result<TrialStats> {
    simulate(SimScheme::HalfDuplex, params, storage, n_blocks, rng)
}

/// Protocol replay shared by both schemes.
pub fn simulate(
    scheme: SimScheme,
    params: &SystemParams,
    storage: &EnergyStorageSpec,
    n_blocks: u64,
    rng: &mut RngStream,
) -> Result<TrialStats> {
    if n_blocks == 0 {
        return Err(Error::Usage("n_blocks must be >= 1".into()));
    }
    let levels = storage.levels;
    let tau = storage.tau();
    let step = storage.step();

    // number of antennas radiating noise while jamming
    let n_jam = match scheme {
        SimScheme::FullDuplex => params.n_t,
        SimScheme::HalfDuplex => params.n_j,
    };
    if n_jam < 2 {
        return Err(Error::Domain(format!(
            "need >= 2 jamming antennas, got {n_jam}"
        )));
    }

    // channel condition threshold on the raw source-destination gain
    let h_min = if params.p_s > 0.0 {
        (2f64.powf(params.r_s) - 1.0) * params.sigma2_d / params.p_s
    } else {
        f64::INFINITY
    };
    // destination SINR denominator: leakage (deterministic variance) + noise
    let nm1 = (n_jam - 1) as f64;
    let gamma_d_den = (1.0 - params.rho) * params.p_j * params.sigma2_err / nm1 + params.sigma2_d;
    let eve_signal_mean = params.p_s * params.omega_se;
    let eve_interf_scale = params.p_j * params.omega_je / nm1;

    let burn_in = n_blocks / 100;
    let mut stats = TrialStats::new(levels);
    let mut state = JammerState::empty();
    let mut prev_start_level: usize = 0;

    for k in 0..n_blocks {
        let start_level = state.level();
        let h_sd = sample_exponential(params.omega_sd, rng);
        let channel_ok = h_sd >= h_min;
        let oeh = channel_ok && state.ready(tau);

        let (mode, outage, nzsc) = if oeh {
            state.discharge(tau);
            // secrecy outcome of the data block
            let gamma_d = params.p_s * h_sd / gamma_d_den;
            let x = sample_exponential(eve_signal_mean, rng);
            let y = sample_gamma(n_jam - 1, eve_interf_scale, rng)?;
            let gamma_e = x / (y + params.sigma2_e);
            let c_s = if gamma_d > gamma_e {
                ((1.0 + gamma_d) / (1.0 + gamma_e)).log2()
            } else {
                0.0
            };
            // residual harvesting through the secondary store (FD only)
            if scheme == SimScheme::FullDuplex {
                let harvested =
                    params.eta * params.p_s * sample_rician_power(params.n_r, params, rng);
                let transferred = params.eta_prime * harvested.min(storage.c2);
                state.charge(levels_gained(transferred, step, levels), levels);
            }
            (Mode::Oeh, c_s < params.r_s, c_s > 0.0)
        } else {
            // dedicated harvesting with every antenna; always an outage,
            // never a secrecy event, because no data is sent
            let harvested = params.eta * params.p_s * sample_rician_power(params.n_j, params, rng);
            state.charge(levels_gained(harvested, step, levels), levels);
            (Mode::Deh, true, false)
        };
        state.mode_last = Some(mode);
        debug_assert!(state.level() <= levels);

        if k >= burn_in {
            stats.blocks += 1;
            stats.outage_count += outage as u64;
            stats.nzsc_count += nzsc as u64;
            match mode {
                Mode::Deh => stats.deh_count += 1,
                Mode::Oeh => stats.oeh_count += 1,
            }
            stats.level_histogram[start_level] += 1;
            if k > burn_in {
                stats.transition_counts[prev_start_level * (levels + 1) + start_level] += 1;
            }
        }
        prev_start_level = start_level;
    }
    Ok(stats)
}

/// Discretize harvested energy to whole levels, capped at the store size.
fn levels_gained(energy: f64, step: f64, levels: usize) -> usize {
    let g = (energy / step).floor();
    if g >= levels as f64 {
        levels
    } else {
        g as usize
    }
}

/// Per-batch output of a parallel run.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub seed: u64,
    pub stream_id: u64,
    pub stats: TrialStats,
}

/// Fixed batch count so results do not depend on the machine's core count.
pub const DEFAULT_BATCHES: u64 = 32;

/// Run a simulation split into independent seeded batches, merged by
/// summation. Identical (scheme, params, storage, n_blocks, seed, batches)
/// yield bit-identical totals regardless of thread scheduling.
pub fn simulate_batched(
    scheme: SimScheme,
    params: &SystemParams,
    storage: &EnergyStorageSpec,
    n_blocks: u64,
    seed: u64,
    batches: u64,
) -> Result<(TrialStats, Vec<BatchResult>)> {
    if n_blocks == 0 {
        return Err(Error::Usage("n_blocks must be >= 1".into()));
    }
    let batches = batches.clamp(1, n_blocks);
    let base = n_blocks / batches;
    let extra = n_blocks % batches;
    let results: Vec<Result<BatchResult>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let blocks = base + u64::from(b < extra);
            let mut rng = RngStream::new(seed, b);
            let stats = simulate(scheme, params, storage, blocks, &mut rng)?;
            Ok(BatchResult {
                seed,
                stream_id: b,
                stats,
            })
        })
        .collect();
    let mut batch_rows = Vec::with_capacity(results.len());
    for r in results {
        batch_rows.push(r?);
    }
    let mut total = TrialStats::new(storage.levels);
    for row in &batch_rows {
        total.merge(&row.stats);
    }
    Ok((total, batch_rows))
}

/// Serialize raw per-batch counters as CSV (one row per batch).
pub fn batch_csv(batches: &[BatchResult]) -> String {
    let mut out =
        String::from("seed,stream_id,blocks,outage_count,nzsc_count,deh_count,oeh_count\n");
    for b in batches {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.seed,
            b.stream_id,
            b.stats.blocks,
            b.stats.outage_count,
            b.stats.nzsc_count,
            b.stats.deh_count,
            b.stats.oeh_count
        ));
    }
    out
}
