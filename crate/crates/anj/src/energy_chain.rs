//! Energy storage discretization and the finite-state Markov chains that
//! govern the jammer's battery level, for both the full-duplex jammer and
//! the half-duplex benchmark, plus the infinite-capacity upper bound.
//!
//! The primary energy store is split into L+1 levels ε_i = i·C₁/L. Every
//! block the jammer either harvests from a dedicated power signal (all N_J
//! antennas) or, when its level clears the threshold τ and the main channel
//! supports the target rate, spends τ levels on jamming while recovering
//! whatever the secondary store captured from the overheard signal.

use crate::channels::{rayleigh_power_cdf, rician_power_cdf, SystemParams};
use crate::error::{Error, Result};

/// Discretized hybrid energy storage description.
///
/// Block length is normalized to one time unit, so energies and powers are
/// numerically interchangeable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStorageSpec {
    /// Primary store capacity (J); must exceed the threshold.
    pub c1: f64,
    /// Secondary store capacity (J).
    pub c2: f64,
    /// Number of discretization steps (levels run 0..=levels).
    pub levels: usize,
    /// Energy needed to jam for one block, `p_j + p_c` (J).
    pub e_th: f64,
    /// Threshold in level units: τ = ⌈e_th/(c1/levels)⌉.
    tau: usize,
}

impl EnergyStorageSpec {
    pub fn new(c1: f64, c2: f64, levels: usize, e_th: f64) -> Result<Self> {
        if !(e_th > 0.0) {
            return Err(Error::Domain(format!("e_th must be > 0, got {e_th}")));
        }
        if !(c1 > e_th) {
            return Err(Error::Domain(format!(
                "primary capacity c1 = {c1} must exceed the threshold e_th = {e_th}, \
                 otherwise the jammer can never transmit"
            )));
        }
        if !(c2 > 0.0) {
            return Err(Error::Domain(format!("c2 must be > 0, got {c2}")));
        }
        if levels < 1 {
            return Err(Error::Domain(
                "need at least one discretization level".into(),
            ));
        }
        // snap near-integer ratios before the ceiling to absorb float noise
        let ratio = e_th * levels as f64 / c1;
        let tau = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        };
        let tau = tau.max(1);
        debug_assert!(tau <= levels);
        Ok(Self {
            c1,
            c2,
            levels,
            e_th,
            tau,
        })
    }

    /// Convenience constructor taking the threshold from the parameters.
    pub fn for_params(c1: f64, c2: f64, levels: usize, params: &SystemParams) -> Result<Self> {
        Self::new(c1, c2, levels, params.energy_threshold())
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Energy step between adjacent levels, C₁/L.
    pub fn step(&self) -> f64 {
        self.c1 / self.levels as f64
    }

    /// Energy at level i, ε_i = i·C₁/L.
    pub fn level_energy(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// True when jamming requires a completely full store (τ = L), in which
    /// case opportunistic blocks can only fire from the top level.
    pub fn is_degenerate_tau(&self) -> bool {
        self.tau == self.levels
    }
}

/// Row-stochastic transition matrix over the L+1 energy levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Wrap raw row-major entries, enforcing stochasticity.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Domain(format!(
                "expected {dim}x{dim} entries, got {}",
                entries.len()
            )));
        }
        for (idx, &p) in entries.iter().enumerate() {
            if !(-1e-15..=1.0 + 1e-12).contains(&p) || p.is_nan() {
                return Err(Error::Consistency(format!(
                    "entry ({}, {}) = {p} outside [0, 1]",
                    idx / dim,
                    idx % dim
                )));
            }
        }
        for i in 0..dim {
            let sum: f64 = entries[i * dim..(i + 1) * dim].iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Consistency(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// Plain-text dump: one row per line, comma-separated, 17 significant
    /// digits, for external verification of the chain construction.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Reject chains with an absorbing state or disconnected level sets.
    fn check_irreducible(&self) -> Result<()> {
        for i in 0..self.dim {
            if self.get(i, i) >= 1.0 - 1e-15 {
                return Err(Error::ReducibleChain(format!(
                    "energy level {i} is absorbing (p[{i},{i}] = {})",
                    self.get(i, i)
                )));
            }
        }
        let forward = self.reach(false);
        let backward = self.reach(true);
        for i in 0..self.dim {
            if !forward[i] {
                return Err(Error::ReducibleChain(format!(
                    "energy level {i} unreachable from level 0"
                )));
            }
            if !backward[i] {
                return Err(Error::ReducibleChain(format!(
                    "energy level {i} cannot return to level 0"
                )));
            }
        }
        Ok(())
    }

    fn reach(&self, transpose: bool) -> Vec<bool> {
        let mut seen = vec![false; self.dim];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.dim {
                let p = if transpose {
                    self.get(v, u)
                } else {
                    self.get(u, v)
                };
                if p > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Long-run distribution of the battery level plus the probability mass at
/// or above the jamming threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    /// Probability of each energy level, indices 0..=L.
    pub xi: Vec<f64>,
    /// Σ_{i=τ}^{L} ξ_i — probability the energy condition holds.
    pub ready_prob: f64,
}

/// Probability q_c that the source-destination channel supports the target
/// secrecy rate: exp(-(2^{r_s} - 1) σ_D² / (P_S Ω_SD)).
pub fn channel_ready_prob(params: &SystemParams) -> Result<f64> {
    if !(params.r_s >= 0.0) {
        return Err(Error::Domain(format!(
            "r_s must be >= 0, got {}",
            params.r_s
        )));
    }
    if params.p_s == 0.0 {
        return Ok(if params.r_s == 0.0 { 1.0 } else { 0.0 });
    }
    let threshold = (2f64.powf(params.r_s) - 1.0) * params.sigma2_d / params.p_s;
    Ok(1.0 - rayleigh_power_cdf(threshold, params.omega_sd)?)
}

/// Mean energy captured in one dedicated harvesting block, η P_S N_J Ω_SJ.
pub fn mean_deh_harvest(params: &SystemParams) -> f64 {
    params.eta * params.p_s * params.n_j as f64 * params.omega_sj
}

/// Mean energy reaching the primary store from one opportunistic block with
/// unbounded secondary capacity, η η' P_S N_r Ω_SJ.
pub fn mean_oeh_transfer(params: &SystemParams) -> f64 {
    params.eta * params.eta_prime * params.p_s * params.n_r as f64 * params.omega_sj
}

/// Level-increment distributions shared by both chain constructions.
struct HarvestLaw {
    /// F_d evaluated at n·step/(η P_S) for n = 0..=L (dedicated harvest).
    deh_cdf: Vec<f64>,
    /// F_o evaluated at n·step/(η η' P_S) for n = 0..=L (opportunistic).
    oeh_cdf: Vec<f64>,
    /// Secondary-store cap expressed against level boundaries: η'·C₂.
    transfer_cap: f64,
    step: f64,
    levels: usize,
}

impl HarvestLaw {
    fn build(params: &SystemParams, storage: &EnergyStorageSpec) -> Result<Self> {
        let l = storage.levels;
        let step = storage.step();
        let deh_scale = params.eta * params.p_s;
        let oeh_scale = params.eta * params.eta_prime * params.p_s;
        let mut deh_cdf = Vec::with_capacity(l + 1);
        let mut oeh_cdf = Vec::with_capacity(l + 1);
        for n in 0..=l {
            let e = n as f64 * step;
            let deh_arg = if deh_scale > 0.0 {
                e / deh_scale
            } else {
                f64::INFINITY
            };
            let oeh_arg = if oeh_scale > 0.0 {
                e / oeh_scale
            } else {
                f64::INFINITY
            };
            // at n = 0 both arguments are 0 regardless of the scales
            let deh_arg = if n == 0 { 0.0 } else { deh_arg };
            let oeh_arg = if n == 0 { 0.0 } else { oeh_arg };
            deh_cdf.push(rician_power_cdf(deh_arg, params.n_j, params)?);
            oeh_cdf.push(rician_power_cdf(oeh_arg, params.n_r, params)?);
        }
        Ok(Self {
            deh_cdf,
            oeh_cdf,
            transfer_cap: params.eta_prime * storage.c2,
            step,
            levels: l,
        })
    }

    /// Pr{dedicated harvest discretizes to exactly n levels}.
    fn deh_exact(&self, n: usize) -> f64 {
        if n >= self.levels {
            return self.deh_at_least(n);
        }
        // CDF differences can leave ~1e-15 negative dust in deep tails
        (self.deh_cdf[n + 1] - self.deh_cdf[n]).max(0.0)
    }

    /// Pr{dedicated harvest discretizes to at least n levels}.
    fn deh_at_least(&self, n: usize) -> f64 {
        1.0 - self.deh_cdf[n.min(self.levels)]
    }

    /// Pr{energy recovered through the secondary store discretizes to
    /// exactly n levels}, honoring the η'·C₂ transfer cap. Regime
    /// boundaries are half-open, closed at the lower endpoint.
    fn oeh_exact(&self, n: usize) -> f64 {
        if n >= self.levels {
            return self.oeh_at_least(n);
        }
        if self.transfer_cap < n as f64 * self.step {
            0.0
        } else if self.transfer_cap < (n + 1) as f64 * self.step {
            // everything at or above ε_n lumps at n because the cap binds
            1.0 - self.oeh_cdf[n]
        } else {
            (self.oeh_cdf[n + 1] - self.oeh_cdf[n]).max(0.0)
        }
    }

    /// Pr{recovered energy discretizes to at least n levels}.
    fn oeh_at_least(&self, n: usize) -> f64 {
        if n > self.levels || self.transfer_cap < n as f64 * self.step {
            0.0
        } else {
            1.0 - self.oeh_cdf[n]
        }
    }
}

/// Transition matrix of the full-duplex jammer's primary store.
///
/// Rows below the threshold harvest unconditionally; rows at or above it
/// split between a failed channel condition (dedicated harvesting, weight
/// 1 - q_c) and an opportunistic block (weight q_c) that drains τ levels
/// while recovering whatever survives the secondary store.
pub fn fd_transition_matrix(
    params: &SystemParams,
    storage: &EnergyStorageSpec,
) -> Result<TransitionMatrix> {
    let l = storage.levels;
    let tau = storage.tau();
    let q_c = channel_ready_prob(params)?;
    let law = HarvestLaw::build(params, storage)?;
    let dim = l + 1;
    let mut entries = vec![0.0; dim * dim];
    for i in 0..=l {
        let row = &mut entries[i * dim..(i + 1) * dim];
        if i < tau {
            for j in i..l {
                row[j] = law.deh_exact(j - i);
            }
            row[l] = law.deh_at_least(l - i);
        } else {
            for j in i.saturating_sub(tau)..i {
                row[j] = q_c * law.oeh_exact(tau - (i - j));
            }
            for j in i..l {
                row[j] = (1.0 - q_c) * law.deh_exact(j - i) + q_c * law.oeh_exact(j - i + tau);
            }
            row[l] = (1.0 - q_c) * law.deh_at_least(l - i) + q_c * law.oeh_at_least(l - i + tau);
        }
    }
    let m = TransitionMatrix::new(dim, entries)?;
    m.check_irreducible()?;
    Ok(m)
}

/// Transition matrix of the half-duplex benchmark jammer.
///
/// Identical harvesting rows below the threshold; above it, a jamming block
/// harvests nothing and therefore drops exactly τ levels with weight q_c.
pub fn hd_transition_matrix(
    params: &SystemParams,
    storage: &EnergyStorageSpec,
) -> Result<TransitionMatrix> {
    let l = storage.levels;
    let tau = storage.tau();
    let q_c = channel_ready_prob(params)?;
    let law = HarvestLaw::build(params, storage)?;
    let dim = l + 1;
    let mut entries = vec![0.0; dim * dim];
    for i in 0..=l {
        let row = &mut entries[i * dim..(i + 1) * dim];
        if i < tau {
            for j in i..l {
                row[j] = law.deh_exact(j - i);
            }
            row[l] = law.deh_at_least(l - i);
        } else {
            row[i - tau] = q_c;
            for j in i..l {
                row[j] = (1.0 - q_c) * law.deh_exact(j - i);
            }
            row[l] += (1.0 - q_c) * law.deh_at_least(l - i);
        }
    }
    let m = TransitionMatrix::new(dim, entries)?;
    m.check_irreducible()?;
    Ok(m)
}

/// Solve for the stationary distribution via (Mᵀ - I + B) ξ = 1, where B is
/// the all-ones matrix; dense LU with partial pivoting.
pub fn stationary_distribution(m: &TransitionMatrix, tau: usize) -> Result<StationaryDistribution> {
    let n = m.dim();
    if tau >= n {
        return Err(Error::Domain(format!(
            "tau = {tau} out of range for {n} levels"
        )));
    }
    let mut a = vec![0.0f64; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut v = m.get(c, r) + 1.0; // transpose plus the rank-one B
            if r == c {
                v -= 1.0;
            }
            a[r * n + c] = v;
        }
    }
    let mut xi = vec![1.0f64; n];
    lu_solve(&mut a, &mut xi, n)?;

    for (i, v) in xi.iter_mut().enumerate() {
        if *v < -1e-12 {
            return Err(Error::Consistency(format!(
                "stationary probability of level {i} came out negative: {v}"
            )));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = xi.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Consistency(format!(
            "stationary masses sum to {sum}, not 1"
        )));
    }
    // residual ‖Mᵀξ - ξ‖∞ certifies the solve
    let mut residual = 0.0f64;
    for r in 0..n {
        let mut acc = 0.0;
        for c in 0..n {
            acc += m.get(c, r) * xi[c];
        }
        residual = residual.max((acc - xi[r]).abs());
    }
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "stationary solve residual {residual:.3e} exceeds 1e-10"
        )));
    }
    let ready_prob = xi[tau..].iter().sum::<f64>().clamp(0.0, 1.0);
    Ok(StationaryDistribution { xi, ready_prob })
}

/// In-place LU factorization with partial pivoting, solving a·x = b.
fn lu_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    let mut max_pivot = 0.0f64;
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < 1e-300 {
            return Err(Error::Numerical(format!(
                "singular system: pivot {pivot_val:.3e} at column {col}, \
                 condition estimate >= {:.3e}",
                if pivot_val > 0.0 {
                    max_pivot / pivot_val
                } else {
                    f64::INFINITY
                }
            )));
        }
        max_pivot = max_pivot.max(pivot_val);
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            b.swap(col, pivot_row);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor != 0.0 {
                a[r * n + col] = factor;
                for c in col + 1..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col * n + c] * b[c];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Long-run probability q_b that the energy condition holds when both
/// stores have unbounded capacity.
///
/// When the threshold sits below the mean opportunistic recovery the store
/// drifts upward without bound and the condition eventually always holds.
/// Otherwise the harvested and consumed energy balance in the long run,
/// giving q_b = E{E_h^d} / (q_c (E_th + E{E_h^d} - E{Ẽ_h^o})), clamped to 1.
pub fn infinite_capacity_ready_prob(params: &SystemParams) -> Result<f64> {
    let e_th = params.energy_threshold();
    if !(e_th > 0.0) {
        return Err(Error::Domain(format!(
            "energy threshold must be > 0, got {e_th}"
        )));
    }
    let mean_deh = mean_deh_harvest(params);
    let mean_oeh = mean_oeh_transfer(params);
    if e_th < mean_oeh {
        return Ok(1.0);
    }
    let q_c = channel_ready_prob(params)?;
    if q_c == 0.0 {
        return Err(Error::DegenerateRegime(
            "channel condition never holds (q_c = 0), so no jamming block ever occurs \
             and the energy balance is undefined"
                .into(),
        ));
    }
    Ok((mean_deh / (q_c * (e_th + mean_deh - mean_oeh))).min(1.0))
}
