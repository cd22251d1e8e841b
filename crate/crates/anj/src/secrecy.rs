//! Closed-form secrecy metrics: secrecy outage probability and probability
//! of non-zero secrecy capacity for the full-duplex jammer, its half-duplex
//! benchmark, and the infinite-capacity bound, plus the one-dimensional
//! exhaustive search for the jamming power that minimizes the outage.

use crate::channels::{eve_interference_ratio, eve_sinr_cdf, SystemParams};
use crate::energy_chain::{
    fd_transition_matrix, hd_transition_matrix, infinite_capacity_ready_prob,
    stationary_distribution, EnergyStorageSpec,
};
use crate::error::{Error, Result};
use crate::specfun::{exp_scaled_ei, Tolerance};
use rayon::prelude::*;

/// Which jammer/storage combination a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecrecyVariant {
    /// Full-duplex jammer with finite discretized storage.
    FdFinite,
    /// Half-duplex benchmark jammer with finite discretized storage.
    HdFinite,
    /// Full-duplex jammer with unbounded continuous storage.
    FdInfinite,
}

impl SecrecyVariant {
    pub fn label(&self) -> &'static str {
        match self {
            SecrecyVariant::FdFinite => "fd-finite",
            SecrecyVariant::HdFinite => "hd-finite",
            SecrecyVariant::FdInfinite => "fd-infinite",
        }
    }

    /// Number of antennas radiating artificial noise under this variant.
    pub fn jamming_antennas(&self, params: &SystemParams) -> u32 {
        match self {
            SecrecyVariant::FdFinite | SecrecyVariant::FdInfinite => params.n_t,
            SecrecyVariant::HdFinite => params.n_j,
        }
    }
}

/// The derived scalars the closed forms are built from.
///
/// κ₁ folds the artificial-noise leakage into an effective SNR scale at the
/// destination, κ₂ is the leak-free scale (κ₁ = κ₂ iff ρ = 1), φ compares
/// jamming to signal power at the eavesdropper, and (β, μ) parameterize the
/// exponential-times-rational integrals solved by the Ψ kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyConstants {
    pub kappa1: f64,
    pub kappa2: f64,
    pub varphi: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl SecrecyConstants {
    pub fn new(params: &SystemParams, n_jam_antennas: u32) -> Result<Self> {
        if n_jam_antennas < 2 {
            return Err(Error::Domain(format!(
                "closed forms need >= 2 jamming antennas, got {n_jam_antennas}"
            )));
        }
        for (name, v) in [
            ("p_s", params.p_s),
            ("p_j", params.p_j),
            ("sigma2_d", params.sigma2_d),
            ("omega_sd", params.omega_sd),
            ("omega_se", params.omega_se),
            ("omega_je", params.omega_je),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!(
                    "secrecy constants need {name} > 0, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&params.rho) {
            return Err(Error::Domain(format!(
                "rho must lie in [0,1], got {}",
                params.rho
            )));
        }
        let nm1 = (n_jam_antennas - 1) as f64;
        let leak = (1.0 - params.rho) * params.p_j * params.sigma2_err / nm1;
        let kappa1 = params.p_s / (leak + params.sigma2_d);
        let kappa2 = params.p_s / params.sigma2_d;
        let varphi = eve_interference_ratio(params);
        let beta1 = nm1 / varphi;
        let rate_gain = 2f64.powf(params.r_s);
        let noise_ratio = params.sigma2_e / (params.p_s * params.omega_se);
        Ok(Self {
            kappa1,
            kappa2,
            varphi,
            beta1,
            beta2: (rate_gain - 1.0) * kappa1 / kappa2,
            mu1: rate_gain / (kappa1 * params.omega_sd) + noise_ratio,
            mu2: 1.0 / (kappa1 * params.omega_sd) + noise_ratio,
        })
    }
}

/// Ψ₁(n, μ, β) = (n-1) β⁻¹ - (-μ)^{n-1} e^{βμ} Ei(-βμ), defined for n ∈ {1, 2}.
///
/// Equals ∫₀^∞ e^{-μx} (x+β)^{-n} dx for these orders; the e^{βμ} Ei(-βμ)
/// product is evaluated fused so large βμ cannot overflow.
pub fn psi1(n: u32, mu: f64, beta: f64) -> Result<f64> {
    if n != 1 && n != 2 {
        return Err(Error::Domain(format!(
            "psi1 is defined for n in {{1, 2}}, got {n}"
        )));
    }
    check_mu_beta(mu, beta)?;
    let scaled = exp_scaled_ei(beta * mu, Tolerance::default())?;
    Ok((n - 1) as f64 / beta - neg_pow(mu, n - 1) * scaled)
}

/// Ψ₂(n, μ, β) = [Σ_{k=1}^{n-1} (k-1)! (-μ)^{n-k-1} β^{-k}
///               - (-μ)^{n-1} e^{βμ} Ei(-βμ)] / (n-1)!,  n ≥ 2.
///
/// The general-order sibling of Ψ₁ (they coincide at n = 2), equal to
/// ∫₀^∞ e^{-μx} (x+β)^{-n} dx.
pub fn psi2(n: u32, mu: f64, beta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("psi2 needs n >= 2, got {n}")));
    }
    if n > 170 {
        // (n-1)! leaves f64 range
        return Err(Error::Domain(format!(
            "psi2 order {n} overflows the factorial scale"
        )));
    }
    check_mu_beta(mu, beta)?;
    let scaled = exp_scaled_ei(beta * mu, Tolerance::default())?;
    let mut sum = 0.0;
    let mut k_minus_1_fact = 1.0; // (k-1)! running value
    for k in 1..n {
        if k > 1 {
            k_minus_1_fact *= (k - 1) as f64;
        }
        sum += k_minus_1_fact * neg_pow(mu, n - k - 1) * beta.powi(-(k as i32));
    }
    let mut n_minus_1_fact = 1.0;
    for k in 2..n {
        n_minus_1_fact *= k as f64;
    }
    Ok((sum - neg_pow(mu, n - 1) * scaled) / n_minus_1_fact)
}

fn neg_pow(mu: f64, e: u32) -> f64 {
    (-mu).powi(e as i32)
}

fn check_mu_beta(mu: f64, beta: f64) -> Result<()> {
    if !(mu > 0.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "psi kernels need mu, beta > 0, got {mu}, {beta}"
        )));
    }
    Ok(())
}

/// The bracketed eavesdropper factor shared by both metrics:
/// (σ_E²/(P_S Ω_SE) Ψ(n-1, μ, β) + (n-1) Ψ(n, μ, β)) · β₁^{n-1},
/// with the Ψ₁ pair at n = 2 and Ψ₂ beyond (β₁^{n-1} = φ⁻¹ at n = 2).
fn eavesdropper_bracket(
    params: &SystemParams,
    c: &SecrecyConstants,
    n_jam: u32,
    mu: f64,
    beta: f64,
) -> Result<f64> {
    let noise_ratio = params.sigma2_e / (params.p_s * params.omega_se);
    let nm1 = (n_jam - 1) as f64;
    let pair = if n_jam == 2 {
        noise_ratio * psi1(1, mu, beta)? + psi1(2, mu, beta)?
    } else {
        noise_ratio * psi2(n_jam - 1, mu, beta)? + nm1 * psi2(n_jam, mu, beta)?
    };
    Ok(pair * c.beta1.powi(n_jam as i32 - 1))
}

/// Exact secrecy outage probability Pr{C_s < R_s}.
///
/// `ready_prob` is the probability the energy condition holds: Σξ over the
/// threshold levels for a finite store, or q_b for the infinite bound. The
/// half-duplex benchmark passes `n_jam_antennas = N_J` (it jams with every
/// antenna); the full-duplex protocol passes `N_t`.
pub fn secrecy_outage(params: &SystemParams, ready_prob: f64, n_jam_antennas: u32) -> Result<f64> {
    check_ready(ready_prob)?;
    let c = SecrecyConstants::new(params, n_jam_antennas)?;
    let bracket = eavesdropper_bracket(params, &c, n_jam_antennas, c.mu1, c.beta1)?;
    let rate_term = ((1.0 - 2f64.powf(params.r_s)) / (c.kappa1 * params.omega_sd)).exp();
    Ok((1.0 - bracket * rate_term * ready_prob).clamp(0.0, 1.0))
}

/// Probability of non-zero secrecy capacity Pr{C_s > 0}.
pub fn prob_nonzero_secrecy(
    params: &SystemParams,
    ready_prob: f64,
    n_jam_antennas: u32,
) -> Result<f64> {
    check_ready(ready_prob)?;
    let c = SecrecyConstants::new(params, n_jam_antennas)?;
    let bracket = eavesdropper_bracket(params, &c, n_jam_antennas, c.mu2, c.beta1 + c.beta2)?;
    let wiretap_term = bracket * (-c.beta2 * c.mu2).exp();
    let rate_term = ((1.0 - 2f64.powf(params.r_s)) / (c.kappa2 * params.omega_sd)).exp();
    let crossing_term = if c.beta2 > 0.0 {
        rate_term * eve_sinr_cdf(c.beta2, params, n_jam_antennas)?
    } else {
        0.0 // zero-rate threshold: F_{γE}(0) vanishes
    };
    Ok(((wiretap_term + crossing_term) * ready_prob).clamp(0.0, 1.0))
}

fn check_ready(ready_prob: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&ready_prob) {
        return Err(Error::Domain(format!(
            "ready_prob must be a probability, got {ready_prob}"
        )));
    }
    Ok(())
}

/// Both secrecy metrics for one variant, with the scalars used to get them.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub variant: SecrecyVariant,
    pub p_so: f64,
    pub p_nzsc: f64,
    /// Probability of the energy condition that entered the closed forms.
    pub ready_prob: f64,
    pub constants: SecrecyConstants,
}

/// Assemble a report from an already-computed energy-ready probability.
pub fn secrecy_report(
    params: &SystemParams,
    ready_prob: f64,
    variant: SecrecyVariant,
) -> Result<SecrecyReport> {
    let n_jam = variant.jamming_antennas(params);
    Ok(SecrecyReport {
        variant,
        p_so: secrecy_outage(params, ready_prob, n_jam)?,
        p_nzsc: prob_nonzero_secrecy(params, ready_prob, n_jam)?,
        ready_prob,
        constants: SecrecyConstants::new(params, n_jam)?,
    })
}

/// Full pipeline for one variant: build the matching energy model, extract
/// its ready probability, and evaluate both closed forms.
pub fn evaluate(
    params: &SystemParams,
    storage: &EnergyStorageSpec,
    variant: SecrecyVariant,
) -> Result<SecrecyReport> {
    let ready = match variant {
        SecrecyVariant::FdFinite => {
            let m = fd_transition_matrix(params, storage)?;
            stationary_distribution(&m, storage.tau())?.ready_prob
        }
        SecrecyVariant::HdFinite => {
            let m = hd_transition_matrix(params, storage)?;
            stationary_distribution(&m, storage.tau())?.ready_prob
        }
        SecrecyVariant::FdInfinite => infinite_capacity_ready_prob(params)?,
    };
    secrecy_report(params, ready, variant)
}

/// Outcome of the exhaustive jamming-power search.
#[derive(Debug, Clone)]
pub struct PjOptimum {
    /// Grid candidate minimizing the outage (W).
    pub p_j: f64,
    /// The minimized secrecy outage probability.
    pub p_so: f64,
    /// Candidates that could not be evaluated, with their diagnostics.
    pub rejected: Vec<(f64, String)>,
}

/// One-dimensional exhaustive search over jamming-power candidates.
///
/// Every candidate rebuilds the threshold, the energy chain, and the closed
/// form (the threshold moves with P_J, so nothing can be reused). Infeasible
/// candidates -- e.g. a threshold beyond the storage capacity -- are skipped
/// with a diagnostic. Ties break toward the smaller power.
pub fn optimal_jamming_power(
    params: &SystemParams,
    storage: &EnergyStorageSpec,
    grid: &[f64],
    variant: SecrecyVariant,
) -> Result<PjOptimum> {
    if grid.is_empty() {
        return Err(Error::Usage("jamming-power grid is empty".into()));
    }
    let evaluations: Vec<(f64, Result<f64>)> = grid
        .par_iter()
        .map(|&p_j| {
            if !(p_j > 0.0) {
                return (
                    p_j,
                    Err(Error::Domain(format!("candidate p_j = {p_j} not > 0"))),
                );
            }
            let mut candidate = params.clone();
            candidate.p_j = p_j;
            let outcome = EnergyStorageSpec::new(
                storage.c1,
                storage.c2,
                storage.levels,
                candidate.energy_threshold(),
            )
            .and_then(|st| evaluate(&candidate, &st, variant))
            .map(|report| report.p_so);
            (p_j, outcome)
        })
        .collect();

    let mut best: Option<(f64, f64)> = None;
    let mut rejected = Vec::new();
    for (p_j, outcome) in evaluations {
        match outcome {
            Ok(p_so) => {
                let better = match best {
                    None => true,
                    Some((_, best_so)) => {
                        p_so < best_so || (p_so == best_so && p_j < best.unwrap().0)
                    }
                };
                if better {
                    best = Some((p_j, p_so));
                }
            }
            Err(e) => rejected.push((p_j, e.to_string())),
        }
    }
    match best {
        Some((p_j, p_so)) => Ok(PjOptimum {
            p_j,
            p_so,
            rejected,
        }),
        None => Err(Error::Usage(format!(
            "no feasible jamming-power candidate among {} grid points \
             (first diagnostic: {})",
            grid.len(),
            rejected.first().map(|(_, d)| d.as_str()).unwrap_or("none")
        ))),
    }
}
