//! Probability that an adversarial full node answers the request a light node
//! follows.
//!
//! A light node queries `M` distinct full nodes out of `N`, `C` of them
//! adversarial; the number of adversaries among the queried nodes is
//! hypergeometric, and the light node follows each response with probability
//! `1/M`. Evaluation is exact (arbitrary-precision rationals, correctly rounded
//! once at the end) whenever the binomials stay small enough; beyond that it
//! switches to log-gamma arithmetic with compensated summation.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::factorial::ln_binomial;

use super::{AttackParams, MathError, Probability, Result};

/// Largest total binomial "width" evaluated with big integers.
const EXACT_WIDTH_LIMIT: u64 = 4096;

/// Largest `M` for which the attack probability is summed exactly.
const EXACT_REQUEST_LIMIT: u64 = 256;

fn width(n: u64, k: u64) -> u64 {
    k.min(n - k)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = width(n, k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // acc = C(n, i) here, so the division is exact.
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn ratio_to_f64(num: BigUint, den: BigUint) -> f64 {
    Ratio::new_raw(num, den).to_f64().unwrap_or(f64::NAN)
}

/// True when `k` adversaries among the `M` queried nodes is possible at all.
fn in_support(params: &AttackParams, k: u64) -> bool {
    let (n, c, m) = (params.total_full_nodes, params.adversary_count, params.request_count);
    k <= c && m - k <= n - c
}

/// `P(N_s = k)`: probability that exactly `k` of the `M` queried full nodes are
/// adversarial.
pub fn hypergeom_pmf(params: &AttackParams, k: u64) -> Result<Probability> {
    let (n, c, m) = (params.total_full_nodes, params.adversary_count, params.request_count);
    if k > m {
        return Err(MathError::InvalidParams(format!("k = {k} exceeds M = {m}")));
    }
    if !in_support(params, k) {
        return Ok(Probability::ZERO);
    }
    let w = width(c, k) + width(n - c, m - k) + width(n, m);
    if w <= EXACT_WIDTH_LIMIT {
        let num = binomial(c, k) * binomial(n - c, m - k);
        Ok(Probability::clamped(ratio_to_f64(num, binomial(n, m))))
    } else {
        Ok(Probability::clamped(ln_pmf(params, k).exp()))
    }
}

fn ln_pmf(params: &AttackParams, k: u64) -> f64 {
    let (n, c, m) = (params.total_full_nodes, params.adversary_count, params.request_count);
    ln_binomial(c, k) + ln_binomial(n - c, m - k) - ln_binomial(n, m)
}

/// `P(A | B_i) = sum_k (k / M) P(N_s = k)`.
///
/// By the hypergeometric mean this equals `C / N` for every `M`; the sum is
/// still evaluated term by term so it can serve as an independent check of
/// the simulator.
pub fn deanon_probability(params: &AttackParams) -> Result<Probability> {
    let (n, c, m) = (params.total_full_nodes, params.adversary_count, params.request_count);
    let top = m.min(c);
    if m <= EXACT_REQUEST_LIMIT && width(n, m) <= EXACT_WIDTH_LIMIT {
        // sum_k k * C(c, k) * C(n - c, m - k), walked with exact ratio updates.
        let mut total = BigUint::zero();
        let mut adv = BigUint::one(); // C(c, k)
        let mut honest = binomial(n - c, m); // C(n - c, m - k)
        for k in 0..=top {
            if k > 0 {
                adv *= c - (k - 1);
                adv /= k;
                // C(h, j - 1) = C(h, j) * j / (h - j + 1), with j = m - k + 1.
                let j = m - k + 1;
                let h = n - c;
                if j <= h {
                    honest *= j;
                    honest /= h - j + 1;
                } else {
                    honest = binomial(h, m - k);
                }
            }
            if k > 0 && !honest.is_zero() {
                total += &adv * &honest * k;
            }
        }
        let den = binomial(n, m) * m;
        return Ok(Probability::clamped(ratio_to_f64(total, den)));
    }

    // Neumaier-compensated sum in the log domain.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 1..=top {
        if !in_support(params, k) {
            continue;
        }
        let term = (k as f64 / m as f64) * ln_pmf(params, k).exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    Ok(Probability::clamped(sum + comp))
}
