//! Special-function kernel backing the closed-form secrecy expressions.
//!
//! Everything here is self-contained f64 numerics: the generalized Marcum
//! Q-function, the exponential integral Ei for negative arguments (plus an
//! exponentially-scaled variant that never overflows), and the regularized
//! upper incomplete gamma function at integer shape.

use crate::error::{Error, Result};

/// Truncation control for the iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute truncation target for series tails.
    pub abs_tol: f64,
    /// Hard cap on series / continued-fraction iterations.
    pub max_terms: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::Domain(format!("abs_tol must be > 0, got {abs_tol}")));
        }
        if max_terms == 0 {
            return Err(Error::Domain("max_terms must be >= 1".into()));
        }
        Ok(Self { abs_tol, max_terms })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;

/// Largest exponent for which `exp(-x)` is comfortably normal.
const EXP_UNDERFLOW_EDGE: f64 = 708.0;

/// Series / continued-fraction crossover for the exponential integral.
///
/// The alternating series cancels catastrophically for large |x| (its
/// largest term grows like e^|x|), so it is only used where plain f64
/// accumulation keeps the absolute error near machine precision.
const EI_SERIES_CROSSOVER: f64 = 4.0;

/// Regularized upper incomplete gamma function Q(n, x) = Γ(n, x)/Γ(n)
/// for integer shape n ≥ 1.
///
/// Evaluates the finite sum e^{-x} Σ_{k=0}^{n-1} x^k/k!, exact for integer
/// shape. Equals the CDF complement of an Erlang(n) variable and the
/// probability that a Poisson(x) count stays below n.
pub fn regularized_upper_gamma(shape: u32, x: f64) -> Result<f64> {
    if shape < 1 {
        return Err(Error::Domain(format!("shape must be >= 1, got {shape}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }

    let n = shape as usize;
    let sum = if x <= EXP_UNDERFLOW_EDGE {
        // term_k = e^{-x} x^k / k!; never exceeds 1, no overflow possible.
        let mut term = (-x).exp();
        let mut acc = term;
        for k in 1..n {
            term *= x / k as f64;
            acc += term;
        }
        acc
    } else {
        // e^{-x} underflows; assemble each term in log space instead.
        let ln_x = x.ln();
        let mut ln_kfact = 0.0;
        let mut acc = 0.0;
        for k in 1..n {
            ln_kfact += (k as f64).ln();
            acc += (-x + k as f64 * ln_x - ln_kfact).exp();
        }
        acc
    };
    Ok(sum.clamp(0.0, 1.0))
}

/// e^{-y} y^m / m!, the increment linking Q(m, y) to Q(m+1, y).
fn poisson_pmf(m: u32, y: f64) -> f64 {
    if y == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let mut t = (-y).exp();
    for k in 1..=m as usize {
        t *= y / k as f64;
    }
    t
}

/// Generalized Marcum Q-function Q_m(a, b) of integer order m ≥ 1.
///
/// This is the tail probability beyond b² of a noncentral chi-square law
/// with 2m degrees of freedom and noncentrality a². Computed with the
/// Poisson-mixture series
///
///   Q_m(a, b) = Σ_{k≥0} e^{-a²/2} (a²/2)^k / k! · Q(m + k, b²/2),
///
/// truncated once the unaccumulated Poisson mass drops below `tol.abs_tol`
/// (each mixed-in gamma tail is at most 1, so that mass bounds the error).
pub fn marcum_q(order: u32, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if order < 1 {
        return Err(Error::Domain(format!("order must be >= 1, got {order}")));
    }
    if !(a >= 0.0) || !(b >= 0.0) {
        return Err(Error::Domain(format!(
            "a and b must be >= 0, got a={a}, b={b}"
        )));
    }

    if b == 0.0 {
        return Ok(1.0); // the tail beyond the origin carries all the mass
    }
    let h = 0.5 * a * a; // Poisson rate of the mixture
    let y = 0.5 * b * b; // gamma-tail argument
    if h > EXP_UNDERFLOW_EDGE {
        // e^{-h} underflows and the forward-summed mixture weights vanish.
        return Err(Error::Overflow(format!(
            "noncentrality a²/2 = {h} too large for the mixture series"
        )));
    }

    let mut gamma_tail = regularized_upper_gamma(order, y)?;
    let mut gamma_step = poisson_pmf(order, y);

    let mut weight = (-h).exp(); // Poisson weight at k = 0
    let mut weight_cum = weight;
    let mut acc = weight * gamma_tail;
    for k in 1..=tol.max_terms {
        if 1.0 - weight_cum <= tol.abs_tol {
            return Ok(acc.clamp(0.0, 1.0));
        }
        // advance the gamma tail to order m + k and the weight to k
        gamma_tail = (gamma_tail + gamma_step).min(1.0);
        gamma_step *= y / (order as usize + k) as f64;
        weight *= h / k as f64;
        weight_cum += weight;
        acc += weight * gamma_tail;
    }
    if 1.0 - weight_cum <= tol.abs_tol {
        return Ok(acc.clamp(0.0, 1.0));
    }
    Err(Error::Convergence(format!(
        "Marcum Q series did not absorb the Poisson mass within {} terms",
        tol.max_terms
    )))
}

/// Exponential integral Ei(x) for strictly negative arguments.
///
/// Small |x| uses the convergent series γ + ln|x| + Σ x^k/(k·k!); beyond the
/// crossover a modified-Lentz continued fraction for E₁(|x|) takes over,
/// staying accurate to machine precision where the series would cancel.
pub fn exp_integral_ei(x: f64, tol: Tolerance) -> Result<f64> {
    if x.is_nan() || x > 0.0 {
        return Err(Error::Domain(format!(
            "Ei implemented for x < 0 only, got {x}"
        )));
    }
    if x == 0.0 {
        return Err(Error::Overflow("Ei(x) diverges to -inf as x -> 0-".into()));
    }
    let t = -x;
    if t <= EI_SERIES_CROSSOVER {
        Ok(EULER_GAMMA + t.ln() + ei_series(x, tol)?)
    } else {
        // Ei(-t) = -e^{-t} / K(t) with K the continued fraction below.
        Ok(-(-t).exp() / e1_lentz(t, tol)?)
    }
}

/// Exponentially scaled variant: e^t · Ei(-t) for t > 0.
///
/// The closed forms need the product e^{βμ} Ei(-βμ), whose factors overflow
/// and underflow separately once βμ exceeds ~709 even though the product
/// stays near -1/(βμ). Fusing the two keeps every intermediate finite.
pub fn exp_scaled_ei(t: f64, tol: Tolerance) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("exp_scaled_ei needs t > 0, got {t}")));
    }
    if t <= EI_SERIES_CROSSOVER {
        Ok(t.exp() * (EULER_GAMMA + t.ln() + ei_series(-t, tol)?))
    } else {
        Ok(-1.0 / e1_lentz(t, tol)?)
    }
}

/// Power series Σ_{k≥1} x^k/(k·k!), convergent everywhere (used for |x| small).
fn ei_series(x: f64, tol: Tolerance) -> Result<f64> {
    let mut pow = 1.0; // x^k / k!
    let mut sum = 0.0;
    for k in 1..=tol.max_terms {
        pow *= x / k as f64;
        let term = pow / k as f64;
        sum += term;
        if term.abs() < 1e-4 * tol.abs_tol {
            return Ok(sum);
        }
    }
    Err(Error::Convergence(format!(
        "Ei series did not converge within {} terms at x = {x}",
        tol.max_terms
    )))
}

/// Modified Lentz evaluation of the continued fraction K(t) with
/// E₁(t) = e^{-t}/K(t):  K = t + 1 - 1²/(t + 3 - 2²/(t + 5 - ...)).
fn e1_lentz(t: f64, tol: Tolerance) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let b0 = t + 1.0;
    let mut f = if b0.abs() < TINY { TINY } else { b0 };
    let mut c = f;
    let mut d = 0.0;
    for n in 1..=tol.max_terms {
        let an = -((n * n) as f64);
        let bn = t + (2 * n + 1) as f64;
        d = bn + an * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = bn + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(f);
        }
    }
    Err(Error::Convergence(format!(
        "E1 continued fraction stalled at t = {t} after {} iterations",
        tol.max_terms
    )))
}
