//! Shared oracle machinery for the validation suites: double-double
//! arithmetic, adaptive quadrature, an independent noncentral chi-square
//! route to the Marcum Q-function, power iteration, KS statistics, and the
//! reference scenario every suite perturbs.
//!
//! Everything here deliberately avoids the crate's own evaluation paths so
//! that agreement between the two is evidence, not tautology.
#![allow(dead_code)]

use anj::channels::{db_to_linear, dbm_to_watts, omegas_from_topology, SystemParams, Topology};
use anj::energy_chain::{EnergyStorageSpec, TransitionMatrix};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;

// ---------------------------------------------------------------------------
// reference scenario
// ---------------------------------------------------------------------------

/// The default line-topology scenario: distances 5/20/30 m, path-loss
/// exponent 3, -80 dBm noise, R_s = 1, K = 5 dB, N_J = 8 split 4+4,
/// eta = 0.5, eta' = 0.9, P_c = 0.1 mW, P_S = 20 dBm, P_J = 0 dBm.
pub fn default_params() -> SystemParams {
    params_at(20.0, 0.0)
}

/// Default scenario with the two transmit powers overridden (dBm).
pub fn params_at(p_s_dbm: f64, p_j_dbm: f64) -> SystemParams {
    let topo = Topology::new(5.0, 20.0, 30.0, 3.0).unwrap();
    let om = omegas_from_topology(&topo);
    SystemParams {
        p_s: dbm_to_watts(p_s_dbm),
        p_j: dbm_to_watts(p_j_dbm),
        p_c: 1e-4,
        sigma2_d: dbm_to_watts(-80.0),
        sigma2_e: dbm_to_watts(-80.0),
        sigma2_err: om.jd,
        rho: 1.0,
        r_s: 1.0,
        n_j: 8,
        n_t: 4,
        n_r: 4,
        k_rician: db_to_linear(5.0),
        omega_sj: om.sj,
        omega_sd: om.sd,
        omega_se: om.se,
        omega_jd: om.jd,
        omega_je: om.je,
        eta: 0.5,
        eta_prime: 0.9,
    }
}

/// Default storage: C1 = 0.02 J, C2 = 0.01 J, threshold from the params.
pub fn default_storage(levels: usize, params: &SystemParams) -> EnergyStorageSpec {
    EnergyStorageSpec::for_params(0.02, 0.01, levels, params).unwrap()
}

/// Deterministic uniform source for building randomized-but-repeatable grids.
pub fn lcg(state: &mut u64) -> f64 {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

// ---------------------------------------------------------------------------
// double-double arithmetic (for extended-precision series oracles)
// ---------------------------------------------------------------------------

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2: ~31 significant digits.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        quick_two_sum(s, e + self.lo + other.lo)
    }

    pub fn mul_f64(self, c: f64) -> Dd {
        let (p, e) = two_prod(self.hi, c);
        quick_two_sum(p, e + self.lo * c)
    }

    pub fn div_f64(self, c: f64) -> Dd {
        let q1 = self.hi / c;
        let (p, e) = two_prod(q1, c);
        let r = self.add(Dd { hi: -p, lo: -e });
        let q2 = (r.hi + r.lo) / c;
        quick_two_sum(q1, q2)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Series oracle for the exponential integral at x < 0:
/// Ei(x) = γ + ln|x| + Σ_{k>=1} x^k/(k·k!), with the cancellation-prone sum
/// carried in double-double precision.
pub fn ei_series_oracle(x: f64) -> f64 {
    assert!(x < 0.0);
    let mut pow = Dd::from(1.0); // x^k / k!
    let mut sum = Dd::from(0.0);
    for k in 1..=500 {
        pow = pow.mul_f64(x).div_f64(k as f64);
        sum = sum.add(pow.div_f64(k as f64));
        if k as f64 > 2.0 * x.abs() && pow.hi.abs() < 1e-40 {
            break;
        }
    }
    EULER_GAMMA + x.abs().ln() + sum.to_f64()
}

/// Finite-sum oracle for the regularized upper gamma at integer shape,
/// accumulated in double-double precision.
pub fn upper_gamma_oracle(shape: u32, x: f64) -> f64 {
    let mut term = Dd::from(1.0); // x^k / k!
    let mut sum = Dd::from(1.0);
    for k in 1..shape {
        term = term.mul_f64(x).div_f64(k as f64);
        sum = sum.add(term);
    }
    (-x).exp() * sum.to_f64()
}

// ---------------------------------------------------------------------------
// adaptive quadrature
// ---------------------------------------------------------------------------

fn simpson_est(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson_est(f, a, fa, m, fm);
    let (right, rm, frm) = simpson_est(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adapt(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + adapt(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson_est(f, a, fa, b, fb);
    adapt(f, a, fa, b, fb, whole, m, fm, tol, 28)
}

// ---------------------------------------------------------------------------
// Marcum Q oracle: quadrature of the noncentral chi-square density
// ---------------------------------------------------------------------------

/// Modified Bessel function of the first kind, integer order, by its
/// ascending series (independent of the crate's Poisson-mixture route).
pub fn bessel_i(order: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    // (z/2)^order / order!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let mut sum = term;
    let h2 = half * half;
    for j in 1u32..=600 {
        term *= h2 / (j as f64 * (j + order) as f64);
        sum += term;
        if term < sum * 1e-18 && (j as f64) > half {
            break;
        }
    }
    sum
}

/// Density of a noncentral chi-square with 2m degrees of freedom and
/// noncentrality lambda = a².
pub fn noncentral_chi2_pdf(x: f64, m: u32, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        // central chi-square with 2m dof
        let mut log_norm = 0.0;
        for k in 1..m {
            log_norm += (k as f64).ln();
        }
        return ((m as f64 - 1.0) * x.ln()
            - 0.5 * x
            - m as f64 * std::f64::consts::LN_2
            - log_norm)
            .exp();
    }
    let nu = m as i32 - 1;
    0.5 * (-(x + lambda) / 2.0).exp()
        * (x / lambda).powf(nu as f64 / 2.0)
        * bessel_i(nu as u32, (lambda * x).sqrt())
}

/// Quadrature oracle for Q_m(a, b): integrate the noncentral chi-square
/// density over [b², upper) where the upper limit is pushed far into the
/// exponentially-dead tail.
pub fn marcum_oracle(m: u32, a: f64, b: f64) -> f64 {
    let lambda = a * a;
    let lo = b * b;
    let mean = 2.0 * m as f64 + lambda;
    let sd = (2.0 * (2.0 * m as f64 + 2.0 * lambda)).sqrt();
    let hi = (mean + 45.0 * sd).max(lo * 1.5 + 60.0);
    if lo >= hi {
        return 0.0;
    }
    let f = |x: f64| noncentral_chi2_pdf(x, m, lambda);
    integrate(&f, lo, hi, 1e-12).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Markov-chain oracles
// ---------------------------------------------------------------------------

/// Stationary distribution by brute-force power iteration on Mᵀ.
pub fn power_iteration(m: &TransitionMatrix, iterations: usize) -> Vec<f64> {
    let n = m.dim();
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..iterations {
        for x in next.iter_mut() {
            *x = 0.0;
        }
        for i in 0..n {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let row = m.row(i);
            for j in 0..n {
                next[j] += vi * row[j];
            }
        }
        let sum: f64 = next.iter().sum();
        let mut diff = 0.0f64;
        for j in 0..n {
            next[j] /= sum;
            diff = diff.max((next[j] - v[j]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        if diff < 1e-16 {
            break;
        }
    }
    v
}

/// Kolmogorov-Smirnov distance between sorted samples and an analytic CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Total-variation distance between two distributions on the same support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

// ---------------------------------------------------------------------------
// total-probability double-integral oracles
// ---------------------------------------------------------------------------

/// Eavesdropper SINR density per the analytic law, written out locally so
/// the oracle does not touch the crate's own implementation.
fn gamma_e_pdf(z: f64, p: &SystemParams, n_jam: u32) -> f64 {
    let a = p.sigma2_e / (p.p_s * p.omega_se);
    let phi = p.p_j * p.omega_je / (p.p_s * p.omega_se);
    let nm1 = (n_jam - 1) as f64;
    let g = nm1 / (phi * z + nm1);
    let e = (-a * z).exp();
    a * e * g.powf(nm1) + phi * e * g.powf(nm1 + 1.0)
}

/// Complementary CDF bound used only to truncate the outer integral.
fn gamma_e_tail(z: f64, p: &SystemParams, n_jam: u32) -> f64 {
    let a = p.sigma2_e / (p.p_s * p.omega_se);
    let phi = p.p_j * p.omega_je / (p.p_s * p.omega_se);
    let nm1 = (n_jam - 1) as f64;
    (-a * z).exp() * (nm1 / (phi * z + nm1)).powf(nm1)
}

fn kappa1(p: &SystemParams, n_jam: u32) -> f64 {
    p.p_s / ((1.0 - p.rho) * p.p_j * p.sigma2_err / (n_jam - 1) as f64 + p.sigma2_d)
}

/// Inner quadrature of the destination-gain density over [lo, hi],
/// integrated in the normalized variable u = h/Ω so the integrand is O(1)
/// and the absolute tolerance is attainable.
fn h_sd_mass(p: &SystemParams, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let om = p.omega_sd;
    let u_lo = lo / om;
    // cut the upper limit where the exponential is numerically dead
    let u_hi = (hi / om).min(u_lo + 60.0);
    let f = move |u: f64| (-u).exp();
    integrate(&f, u_lo, u_hi, tol)
}

/// Integrate g(z) over [z0, inf), chasing the eavesdropper tail with
/// doubling segments until the remaining mass bound drops below 1e-11.
fn integrate_gamma_e_axis(
    p: &SystemParams,
    n_jam: u32,
    z0: f64,
    g: &dyn Fn(f64) -> f64,
    extra_decay: &dyn Fn(f64) -> f64,
) -> f64 {
    let mut lo = z0;
    let mut width = ((n_jam - 1) as f64 / (p.p_j * p.omega_je / (p.p_s * p.omega_se)).max(1e-300))
        .max(1.0)
        / 8.0;
    let mut total = 0.0;
    for _ in 0..80 {
        let hi = lo + width;
        total += integrate(g, lo, hi, 2e-11);
        if gamma_e_tail(hi, p, n_jam) * extra_decay(hi) < 1e-11 {
            break;
        }
        lo = hi;
        width *= 2.0;
    }
    total
}

/// Secrecy outage by 2-D quadrature of the total-probability split:
/// P_so = (1 - q_c·R) + R·∬ f_HSD f_γE over the outage region.
pub fn pso_quadrature(p: &SystemParams, ready: f64, n_jam: u32) -> f64 {
    let k1 = kappa1(p, n_jam);
    let k2 = p.p_s / p.sigma2_d;
    let rate = 2f64.powf(p.r_s);
    let lo_h = (rate - 1.0) / k2;
    let q_c = (-(rate - 1.0) * p.sigma2_d / (p.p_s * p.omega_sd)).exp();
    let outer = |z: f64| {
        let hi_h = ((1.0 + z) * rate - 1.0) / k1;
        gamma_e_pdf(z, p, n_jam) * h_sd_mass(p, lo_h, hi_h, 1e-12)
    };
    let ell_a = integrate_gamma_e_axis(p, n_jam, 0.0, &outer, &|_| 1.0);
    1.0 - q_c * ready + ell_a * ready
}

/// Non-zero secrecy capacity by 2-D quadrature of the two-piece region.
pub fn pnzsc_quadrature(p: &SystemParams, ready: f64, n_jam: u32) -> f64 {
    let k1 = kappa1(p, n_jam);
    let k2 = p.p_s / p.sigma2_d;
    let rate = 2f64.powf(p.r_s);
    let beta2 = k1 * (rate - 1.0) / k2;
    let om = p.omega_sd;
    // piece 1: gamma_E above beta2, destination gain above gamma_E/kappa1
    let piece1 = {
        let outer = |z: f64| {
            let lo = z / k1;
            gamma_e_pdf(z, p, n_jam) * h_sd_mass(p, lo, lo + 60.0 * om, 1e-12)
        };
        let decay = |z: f64| (-z / (k1 * om)).exp();
        integrate_gamma_e_axis(p, n_jam, beta2, &outer, &decay)
    };
    // piece 2: gamma_E below beta2, destination gain above the rate gate
    let piece2 = {
        let lo = (rate - 1.0) / k2;
        let h_tail = h_sd_mass(p, lo, lo + 60.0 * om, 1e-12);
        let outer = |z: f64| gamma_e_pdf(z, p, n_jam) * h_tail;
        if beta2 > 0.0 {
            integrate(&outer, 0.0, beta2, 1e-11)
        } else {
            0.0
        }
    };
    ready * (piece1 + piece2)
}

// ---------------------------------------------------------------------------
// continuous-storage protocol simulator (infinite-capacity oracle)
// ---------------------------------------------------------------------------

/// Long-run fraction of blocks meeting the energy condition when the store
/// is effectively unbounded (capacity `cap_factor`·E_th) and energy stays
/// continuous. Returns (ready fraction, batch-mean standard error).
pub fn continuous_ready_fraction(
    p: &SystemParams,
    n_blocks: u64,
    seed: u64,
    cap_factor: f64,
) -> (f64, f64) {
    use anj::channels::{sample_exponential, sample_rician_power, RngStream};
    let e_th = p.energy_threshold();
    let cap = cap_factor * e_th;
    let h_min = (2f64.powf(p.r_s) - 1.0) * p.sigma2_d / p.p_s;
    let mut rng = RngStream::new(seed, 0);
    let mut energy = 0.0f64;
    let burn = n_blocks / 100;
    let n_batches = 100u64;
    let per_batch = (n_blocks - burn) / n_batches;
    let mut batch_means = Vec::with_capacity(n_batches as usize);
    let mut ready_count = 0u64;
    let mut counted = 0u64;
    for k in 0..n_blocks {
        let ready = energy >= e_th;
        if k >= burn {
            ready_count += ready as u64;
            counted += 1;
            if counted == per_batch {
                batch_means.push(ready_count as f64 / counted as f64);
                ready_count = 0;
                counted = 0;
            }
        }
        let h_sd = sample_exponential(p.omega_sd, &mut rng);
        if ready && h_sd >= h_min {
            // secondary store is unbounded here, only the primary caps
            energy -= e_th;
            energy += p.eta_prime * p.eta * p.p_s * sample_rician_power(p.n_r, p, &mut rng);
        } else {
            energy += p.eta * p.p_s * sample_rician_power(p.n_j, p, &mut rng);
        }
        energy = energy.min(cap);
    }
    let n = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / n;
    let var = batch_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}
