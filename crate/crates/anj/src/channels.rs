//! Channel models and samplers for every random quantity in the analysis:
//! Rician harvest-channel power gains, Rayleigh information-channel gains,
//! Gamma-distributed jamming interference at the eavesdropper, and the
//! eavesdropper SINR law they induce.

use crate::error::{Error, Result};
use crate::specfun::{marcum_q, Tolerance};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Convert a power from dBm to watts: W = 10^((dBm - 30)/10).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Convert a power from watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Convert a ratio from dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// All physical and protocol scalars of the scenario.
///
/// Powers are in watts, variances in watts, distances are folded into the
/// per-link average gains Ω. `n_j = n_t + n_r` always holds.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Source transmit power (W).
    pub p_s: f64,
    /// Jamming transmit power (W).
    pub p_j: f64,
    /// Constant circuitry power drawn while jamming (W).
    pub p_c: f64,
    /// Receiver noise power at the destination (W).
    pub sigma2_d: f64,
    /// Receiver noise power at the eavesdropper (W).
    pub sigma2_e: f64,
    /// Variance of the jammer-destination channel estimation error.
    pub sigma2_err: f64,
    /// CSI correlation coefficient in [0, 1]; 1 means perfect estimates.
    pub rho: f64,
    /// Target secrecy rate (bits/s/Hz).
    pub r_s: f64,
    /// Total jammer antennas, `n_t + n_r`.
    pub n_j: u32,
    /// Jammer antennas transmitting artificial noise.
    pub n_t: u32,
    /// Jammer antennas harvesting while jamming.
    pub n_r: u32,
    /// Rician K-factor of the source-jammer link (linear, ≥ 0).
    pub k_rician: f64,
    /// Per-link average channel power gains.
    pub omega_sj: f64,
    pub omega_sd: f64,
    pub omega_se: f64,
    pub omega_jd: f64,
    pub omega_je: f64,
    /// RF-to-DC conversion efficiency in (0, 1].
    pub eta: f64,
    /// SES-to-PES transfer efficiency in (0, 1].
    pub eta_prime: f64,
}

impl SystemParams {
    /// Enforce the structural invariants of a fully-specified scenario.
    ///
    /// The distribution functions and the simulator tolerate boundary cases
    /// (`p_s = 0`, `p_j = 0`) individually; this check is the strict gate
    /// used before running the analytic pipeline.
    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 {
            return Err(Error::Domain(format!(
                "null-space jamming needs n_t >= 2, got {}",
                self.n_t
            )));
        }
        if self.n_r < 1 {
            return Err(Error::Domain("n_r must be >= 1".into()));
        }
        if self.n_j != self.n_t + self.n_r {
            return Err(Error::Domain(format!(
                "antenna split inconsistent: n_j = {} but n_t + n_r = {}",
                self.n_j,
                self.n_t + self.n_r
            )));
        }
        for (name, v) in [
            ("p_s", self.p_s),
            ("p_j", self.p_j),
            ("p_c", self.p_c),
            ("sigma2_d", self.sigma2_d),
            ("sigma2_e", self.sigma2_e),
            ("sigma2_err", self.sigma2_err),
            ("omega_sj", self.omega_sj),
            ("omega_sd", self.omega_sd),
            ("omega_se", self.omega_se),
            ("omega_jd", self.omega_jd),
            ("omega_je", self.omega_je),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Domain(format!(
                "rho must lie in [0,1], got {}",
                self.rho
            )));
        }
        if !(self.r_s >= 0.0) {
            return Err(Error::Domain(format!("r_s must be >= 0, got {}", self.r_s)));
        }
        if !(self.k_rician >= 0.0) {
            return Err(Error::Domain(format!(
                "k_rician must be >= 0, got {}",
                self.k_rician
            )));
        }
        for (name, v) in [("eta", self.eta), ("eta_prime", self.eta_prime)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0,1], got {v}")));
            }
        }
        Ok(())
    }

    /// Energy drained by one jamming block: transmit plus circuitry power.
    pub fn energy_threshold(&self) -> f64 {
        self.p_j + self.p_c
    }
}

/// Node placement: source, jammer, eavesdropper and destination sit in
/// this order on a line, so the jammer-side distances follow by subtraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    pub d_sj: f64,
    pub d_se: f64,
    pub d_sd: f64,
    /// Path-loss exponent.
    pub alpha: f64,
}

impl Topology {
    pub fn new(d_sj: f64, d_se: f64, d_sd: f64, alpha: f64) -> Result<Self> {
        if !(0.0 < d_sj && d_sj < d_se && d_se < d_sd) {
            return Err(Error::Domain(format!(
                "distances must satisfy 0 < d_sj < d_se < d_sd, got {d_sj}, {d_se}, {d_sd}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
        }
        Ok(Self {
            d_sj,
            d_se,
            d_sd,
            alpha,
        })
    }

    pub fn d_je(&self) -> f64 {
        self.d_se - self.d_sj
    }

    pub fn d_jd(&self) -> f64 {
        self.d_sd - self.d_sj
    }
}

/// Average power gain of a link of length `d`: Ω = 1/(1 + d^α).
pub fn path_gain(d: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + d.powf(alpha))
}

/// Per-link average channel power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub sj: f64,
    pub sd: f64,
    pub se: f64,
    pub jd: f64,
    pub je: f64,
}

/// Derive every per-link Ω from the line topology.
pub fn omegas_from_topology(topo: &Topology) -> LinkGains {
    LinkGains {
        sj: path_gain(topo.d_sj, topo.alpha),
        sd: path_gain(topo.d_sd, topo.alpha),
        se: path_gain(topo.d_se, topo.alpha),
        jd: path_gain(topo.d_jd(), topo.alpha),
        je: path_gain(topo.d_je(), topo.alpha),
    }
}

/// Reproducible random stream. Identical `(seed, stream_id)` pairs replay
/// the identical sample sequence; distinct stream ids are independent, which
/// is what lets Monte Carlo batches run in parallel without sharing state.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// One Box-Muller pair of independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps the log finite
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

/// CDF of the squared norm of `n_antennas` i.i.d. Rician entries with
/// K-factor `K` and per-entry mean power Ω_SJ:
///
///   F(x) = 1 - Q_n(√(2nK), √(2(K+1)x/Ω_SJ)).
pub fn rician_power_cdf(x: f64, n_antennas: u32, params: &SystemParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("gain must be >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let k = params.k_rician;
    let a = (2.0 * n_antennas as f64 * k).sqrt();
    let b = (2.0 * (k + 1.0) * x / params.omega_sj).sqrt();
    Ok(1.0 - marcum_q(n_antennas, a, b, Tolerance::default())?)
}

/// CDF of an exponential power gain with mean Ω: F(x) = 1 - e^{-x/Ω}.
pub fn rayleigh_power_cdf(x: f64, omega: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("gain must be >= 0, got {x}")));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    Ok(-(-x / omega).exp_m1())
}

/// Sample ‖h‖² for `n_antennas` i.i.d. Rician entries.
///
/// Each entry carries a deterministic line-of-sight amplitude √(KΩ/(K+1))
/// plus a scattered complex Gaussian of total variance Ω/(K+1), so the
/// per-entry mean power is exactly Ω and the squared norm follows the
/// noncentral chi-square law behind [`rician_power_cdf`].
pub fn sample_rician_power(n_antennas: u32, params: &SystemParams, rng: &mut RngStream) -> f64 {
    let k = params.k_rician;
    let omega = params.omega_sj;
    let los = (k * omega / (k + 1.0)).sqrt();
    let sigma = (omega / (2.0 * (k + 1.0))).sqrt();
    let mut power = 0.0;
    for _ in 0..n_antennas {
        let (g1, g2) = rng.normal_pair();
        let re = los + sigma * g1;
        let im = sigma * g2;
        power += re * re + im * im;
    }
    power
}

/// Sample an exponential gain with the given mean (zero mean gives zero).
pub fn sample_exponential(mean: f64, rng: &mut RngStream) -> f64 {
    -mean * (1.0 - rng.uniform()).ln()
}

/// Sample a Gamma(shape, scale) gain with integer shape, as the sum of
/// `shape` independent exponentials of mean `scale`.
pub fn sample_gamma(shape: u32, scale: f64, rng: &mut RngStream) -> Result<f64> {
    if shape < 1 {
        return Err(Error::Domain(format!(
            "gamma shape must be >= 1, got {shape}"
        )));
    }
    let mut sum = 0.0;
    for _ in 0..shape {
        sum += sample_exponential(scale, rng);
    }
    Ok(sum)
}

/// Jamming-to-signal scale at the eavesdropper: φ = P_J Ω_JE / (P_S Ω_SE).
pub fn eve_interference_ratio(params: &SystemParams) -> f64 {
    params.p_j * params.omega_je / (params.p_s * params.omega_se)
}

/// CDF of the eavesdropper SINR γ_E = X/(Y + σ_E²), with X exponential of
/// mean P_S Ω_SE and Y ~ Gamma(n-1, P_J Ω_JE/(n-1)):
///
///   F(z) = 1 - e^{-z σ_E²/(P_S Ω_SE)} ((n-1)/(φz + n-1))^{n-1}.
///
/// `n_jam_antennas` is the number of antennas radiating artificial noise
/// (N_t for the full-duplex jammer, N_J for the half-duplex benchmark).
pub fn eve_sinr_cdf(z: f64, params: &SystemParams, n_jam_antennas: u32) -> Result<f64> {
    let (a, phi, nm1) = eve_sinr_factors(params, n_jam_antennas)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("SINR must be >= 0, got {z}")));
    }
    Ok(1.0 - (-z * a).exp() * (nm1 / (phi * z + nm1)).powi(nm1 as i32))
}

/// Density of the eavesdropper SINR (derivative of [`eve_sinr_cdf`]).
pub fn eve_sinr_pdf(z: f64, params: &SystemParams, n_jam_antennas: u32) -> Result<f64> {
    let (a, phi, nm1) = eve_sinr_factors(params, n_jam_antennas)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("SINR must be >= 0, got {z}")));
    }
    let g = nm1 / (phi * z + nm1);
    let e = (-z * a).exp();
    Ok(a * e * g.powi(nm1 as i32) + phi * e * g.powi(nm1 as i32 + 1))
}

fn eve_sinr_factors(params: &SystemParams, n_jam_antennas: u32) -> Result<(f64, f64, f64)> {
    if n_jam_antennas < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 jamming antennas, got {n_jam_antennas}"
        )));
    }
    if !(params.p_s > 0.0) || !(params.omega_se > 0.0) {
        return Err(Error::Domain(
            "eavesdropper SINR needs p_s > 0 and omega_se > 0".into(),
        ));
    }
    let a = params.sigma2_e / (params.p_s * params.omega_se);
    let phi = eve_interference_ratio(params);
    Ok((a, phi, (n_jam_antennas - 1) as f64))
}
