//! Concentration bounds, the constants of the rate theorem, and the
//! empirical rate experiment.

mod experiment;
mod gc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use experiment::{run_rate_experiment, Envelope, RateExperiment, RateRecord, RateReport, TargetFunction, TrialOutcome};
pub use gc::{gc_sup_error, gc_sup_error_stream};

/// Bernstein's inequality for `n` centered variables bounded by `m_abs` with
/// variance at most `variance`: `min(1, 2 exp(−nε² / (2V + (2/3)ε M)))`.
pub fn bernstein_bound(m_abs: f64, variance: f64, n: u64, epsilon: f64) -> Result<f64> {
    if !(m_abs > 0.0 && variance > 0.0) || n == 0 {
        return Err(Error::domain(format!(
            "Bernstein needs M > 0, V > 0 and n ≥ 1 (got M = {m_abs}, V = {variance}, n = {n})"
        )));
    }
    if !(epsilon > 0.0) {
        return Ok(1.0);
    }
    let exponent = n as f64 * epsilon * epsilon / (2.0 * variance + 2.0 / 3.0 * epsilon * m_abs);
    Ok((2.0 * (-exponent).exp()).min(1.0))
}

/// `Σ_{n ≥ N} n^{−σ} ≤ 1 / ((σ − 1)(N − 1)^{σ−1})`.
pub fn sum_tail_bound(sigma: f64, start: u64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(Error::Divergent(format!("Σ n^(−σ) diverges for σ = {sigma}")));
    }
    if start < 2 {
        return Err(Error::domain(format!("tail start N = {start} < 2")));
    }
    Ok(1.0 / ((sigma - 1.0) * ((start - 1) as f64).powf(sigma - 1.0)))
}

/// `Σ_{n ≥ N} exp(−n C_e) ≤ exp(−(N − 1) C_e) / C_e`.
pub fn exp_tail(c_e: f64, start: u64) -> Result<f64> {
    if !(c_e > 0.0) {
        return Err(Error::domain(format!("C_e = {c_e} must be positive")));
    }
    if start < 2 {
        return Err(Error::domain(format!("tail start N = {start} < 2")));
    }
    Ok((-((start - 1) as f64) * c_e).exp() / c_e)
}

/// Hypotheses of the rate theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateInputs {
    #[serde(rename = "M")]
    pub m_upper: f64,
    pub a: f64,
    /// Covering constant: `N(𝒳, δ) ≤ C_L δ^{−m}`.
    #[serde(rename = "C_L")]
    pub c_l: f64,
    pub m: f64,
    #[serde(rename = "C_omega")]
    pub c_omega: f64,
    pub m_prime: f64,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n_start: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateConstants {
    pub inputs: RateInputs,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub c_tilde: f64,
    pub c_a: f64,
    pub c_e: f64,
    /// `α/γ̃ − m/(2m′)`, the decay exponent of the polynomial term.
    pub exponent: f64,
    /// `α/γ̃ − m/(2m′) > 1`.
    pub admissible: bool,
    /// `αm′ − γ̃m − γ̃m′ > 0`, the denominator of the polynomial term.
    pub series_convergent: bool,
    /// Lower bound on the probability of the uniform error event, when both
    /// flags hold.
    pub probability_bound: Option<f64>,
}

/// Evaluates every constant of the rate theorem.
pub fn rate_constants(inputs: &RateInputs) -> Result<RateConstants> {
    let RateInputs {
        m_upper: big_m,
        a,
        c_l,
        m,
        c_omega,
        m_prime,
        alpha,
        n_start,
    } = *inputs;
    if !(0.0 < a && a <= 1.0 && 1.0 <= big_m && big_m.is_finite()) {
        return Err(Error::domain(format!("need 0 < a ≤ 1 ≤ M < ∞ (a = {a}, M = {big_m})")));
    }
    if !(c_l > 0.0 && c_omega > 0.0 && m > 0.0 && m_prime > 0.0) {
        return Err(Error::domain("C_L, C_omega, m and m_prime must be positive"));
    }
    if !(alpha >= 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} < 1")));
    }
    if n_start < 2 {
        return Err(Error::domain(format!("N = {n_start} < 2")));
    }
    let ratio = m / m_prime;
    let gamma = 32.0 * big_m * big_m / (a * a) + 8.0 / 3.0 * big_m / a;
    let gamma_tilde = big_m * big_m * gamma / a;
    let c_tilde = c_l * (8.0 * big_m * c_omega / (a * std::f64::consts::LN_2) * (1.0 / a + 2.0 * big_m / a)).powf(ratio);
    let c_a = c_l * (16.0 * c_omega / a).powf(ratio);
    let half_a = a / 2.0;
    let c_e = half_a * half_a / (32.0 * big_m * big_m + 8.0 / 3.0 * big_m * half_a);
    let exponent = alpha / gamma_tilde - m / (2.0 * m_prime);
    let admissible = exponent > 1.0;
    let denominator = alpha * m_prime - gamma_tilde * m - gamma_tilde * m_prime;
    let series_convergent = denominator > 0.0;
    let probability_bound = (admissible && series_convergent).then(|| {
        let shifted = (n_start - 1) as f64;
        let polynomial = 16.0 * c_tilde / alpha.powf(2.0 * ratio) * (gamma_tilde * m_prime / denominator) * shifted.powf(-exponent);
        let exponential = 4.0 * (c_a / c_e) * (-shifted * c_e).exp();
        1.0 - polynomial - exponential
    });
    Ok(RateConstants {
        inputs: *inputs,
        gamma,
        gamma_tilde,
        c_tilde,
        c_a,
        c_e,
        exponent,
        admissible,
        series_convergent,
        probability_bound,
    })
}
