//! Closed-form BER floors, coding rate, spectral efficiency and complexity.
//!
//! Floors are the BER left by phase noise alone (no additive noise), as a
//! function of the total per-symbol phase-noise variance σ².

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::AlgorithmKind;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// ln erfc(x), finite far beyond the point where erfc underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 10.0 {
        return libm::erfc(x).ln();
    }
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + 0.5 * k as f64 / tail;
    }
    -x * x - 0.5 * PI.ln() - tail.ln()
}

/// erfc, switching to the log-domain form only where libm nears underflow.
fn erfc_wide(x: f64) -> f64 {
    if x < 26.0 {
        libm::erfc(x)
    } else {
        ln_erfc(x).exp()
    }
}

fn check_order(order: usize) -> Result<f64> {
    if order < 2 {
        return Err(invalid(format!("modulation order must be >= 2, got {order}")));
    }
    Ok((order as f64).log2())
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(invalid(format!(
            "phase-noise variance must be finite and >= 0, got {sigma2}"
        )));
    }
    Ok(())
}

/// Argument of erfc for an n-PSK decision threshold π/n and a Gaussian
/// phase error of variance `var`.
fn threshold_arg(order: usize, var: f64) -> f64 {
    PI / (order as f64 * std::f64::consts::SQRT_2 * var.sqrt())
}

/// NLMS floor: (1/log₂n)·erfc(π/(n·√(2σ²))).
pub fn floor_nlms(order: usize, sigma2: f64) -> Result<f64> {
    let bits = check_order(order)?;
    check_sigma2(sigma2)?;
    Ok(erfc_wide(threshold_arg(order, sigma2)) / bits)
}

fn ln_floor_nlms(order: usize, sigma2: f64) -> Result<f64> {
    let bits = check_order(order)?;
    check_sigma2(sigma2)?;
    Ok(ln_erfc(threshold_arg(order, sigma2)) - bits.ln())
}

/// Phase-error variance at position `p` (1-based) of a block of length `n`:
/// σ²·[2(p−1)³ + 3(p−1)² + 2(N−p)³ + 3(N−p)² + N − 1]/(6N²).
pub fn bwa_symbol_variance(p: usize, block_length: usize, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    if block_length == 0 || p == 0 || p > block_length {
        return Err(invalid(format!(
            "block position must satisfy 1 <= p <= N, got p={p}, N={block_length}"
        )));
    }
    let n = block_length as f64;
    let a = (p - 1) as f64;
    let b = (block_length - p) as f64;
    let num = 2.0 * a.powi(3) + 3.0 * a * a + 2.0 * b.powi(3) + 3.0 * b * b + n - 1.0;
    Ok(sigma2 * num / (6.0 * n * n))
}

/// BWA floor: the NLMS-form floor averaged over block positions with the
/// position-dependent variance of [`bwa_symbol_variance`].
pub fn floor_bwa(order: usize, sigma2: f64, block_length: usize) -> Result<f64> {
    let bits = check_order(order)?;
    check_sigma2(sigma2)?;
    if block_length == 0 {
        return Err(invalid("N_BWA must be >= 1"));
    }
    let mut sum = 0.0;
    for p in 1..=block_length {
        sum += erfc_wide(threshold_arg(order, bwa_symbol_variance(p, block_length, sigma2)?));
    }
    Ok(sum / (block_length as f64 * bits))
}

fn ln_floor_bwa(order: usize, sigma2: f64, block_length: usize) -> Result<f64> {
    let bits = check_order(order)?;
    check_sigma2(sigma2)?;
    if block_length == 0 {
        return Err(invalid("N_BWA must be >= 1"));
    }
    let terms = (1..=block_length)
        .map(|p| bwa_symbol_variance(p, block_length, sigma2).map(|v| ln_erfc(threshold_arg(order, v))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_sum_exp(&terms) - (block_length as f64).ln() - bits.ln())
}

/// VV floor: (1/log₂n)·erfc(π/(n·√((N²−1)/(6N))·σ)). `block_length` must be odd.
pub fn floor_vv(order: usize, sigma2: f64, block_length: usize) -> Result<f64> {
    let (x, bits) = vv_arg(order, sigma2, block_length)?;
    Ok(erfc_wide(x) / bits)
}

fn ln_floor_vv(order: usize, sigma2: f64, block_length: usize) -> Result<f64> {
    let (x, bits) = vv_arg(order, sigma2, block_length)?;
    Ok(ln_erfc(x) - bits.ln())
}

fn vv_arg(order: usize, sigma2: f64, block_length: usize) -> Result<(f64, f64)> {
    let bits = check_order(order)?;
    check_sigma2(sigma2)?;
    if block_length == 0 || block_length.is_multiple_of(2) {
        return Err(invalid(format!("N_VV must be odd, got {block_length}")));
    }
    let n = block_length as f64;
    let spread = ((n * n - 1.0) / (6.0 * n)).sqrt() * sigma2.sqrt();
    Ok((PI / (order as f64 * spread), bits))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// A floor evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorQuery {
    pub order: usize,
    pub sigma2: f64,
    pub kind: AlgorithmKind,
    /// Ignored for NLMS.
    pub block_length: usize,
}

impl FloorQuery {
    pub fn floor(&self) -> Result<f64> {
        match self.kind {
            AlgorithmKind::Nlms => floor_nlms(self.order, self.sigma2),
            AlgorithmKind::Bwa => floor_bwa(self.order, self.sigma2, self.block_length),
            AlgorithmKind::Vv => floor_vv(self.order, self.sigma2, self.block_length),
        }
    }

    /// Natural log of the floor; stays finite where the floor underflows.
    pub fn ln_floor(&self) -> Result<f64> {
        match self.kind {
            AlgorithmKind::Nlms => ln_floor_nlms(self.order, self.sigma2),
            AlgorithmKind::Bwa => ln_floor_bwa(self.order, self.sigma2, self.block_length),
            AlgorithmKind::Vv => ln_floor_vv(self.order, self.sigma2, self.block_length),
        }
    }
}

/// Binary-symmetric-channel coding rate 1 + p·log₂p + (1−p)·log₂(1−p).
pub fn coding_rate(ber: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ber) {
        return Err(invalid(format!("BER must lie in [0, 1], got {ber}")));
    }
    let h = |p: f64| if p == 0.0 { 0.0 } else { p * p.log2() };
    Ok(1.0 + h(ber) + h(1.0 - ber))
}

/// Spectral efficiency R_c·N_p·log₂n in bit/s/Hz.
pub fn spectral_efficiency(ber: f64, order: usize, polarizations: u32) -> Result<f64> {
    let bits = check_order(order)?;
    if polarizations == 0 {
        return Err(invalid("number of polarizations must be >= 1"));
    }
    Ok(coding_rate(ber)? * polarizations as f64 * bits)
}

/// Complex multiplications per recovered symbol.
pub fn complexity(kind: AlgorithmKind, order: usize) -> usize {
    match kind {
        AlgorithmKind::Nlms => 5,
        AlgorithmKind::Bwa | AlgorithmKind::Vv => order,
    }
}
