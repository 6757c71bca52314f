//! Symbol-rate fiber channel: chromatic dispersion, carrier phase, AWGN and
//! the receiver-side dispersion compensation that turns LO phase noise into
//! equalization-enhanced phase noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::modem::SymbolFrame;
use crate::noise::{LinkParams, PhaseTrack, SPEED_OF_LIGHT};

/// Which way the dispersion filter is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdDirection {
    /// Fiber transfer function H(ω) = exp(jβω²).
    Fiber,
    /// Electronic compensation, the conjugate all-pass filter.
    Compensation,
}

/// Additive noise level as per-symbol SNR (Es/N0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Noiseless,
    EsN0Db(f64),
}

impl Snr {
    /// Eb/N0 in dB for `bits_per_symbol` bits per symbol.
    pub fn eb_n0_db(&self, bits_per_symbol: u32) -> Option<f64> {
        match *self {
            Snr::Noiseless => None,
            Snr::EsN0Db(db) => Some(db - 10.0 * (bits_per_symbol as f64).log10()),
        }
    }
}

/// Quadratic phase coefficient β = λ²DL/(4πc) in s².
pub fn cd_coefficient(link: &LinkParams) -> f64 {
    link.wavelength() * link.wavelength() * link.dispersion() * link.fiber_length() / (4.0 * PI * SPEED_OF_LIGHT)
}

/// Group-delay spread across the signal band, in symbol periods.
pub fn dispersion_spread_symbols(link: &LinkParams) -> f64 {
    // Δτ = 2β·(2π R_S)
    let delta_tau = 2.0 * cd_coefficient(link) * 2.0 * PI * link.symbol_rate();
    delta_tau * link.symbol_rate()
}

/// Symbols discarded at each frame edge to avoid cyclic-convolution wrap.
pub fn guard_symbols(link: &LinkParams) -> usize {
    (2.0 * dispersion_spread_symbols(link)).ceil() as usize
}

/// Applies the all-pass dispersion filter over the whole frame by FFT
/// (cyclic convolution), one sample per symbol.
pub fn apply_cd(samples: &[Complex64], link: &LinkParams, direction: CdDirection) -> Vec<Complex64> {
    let beta = cd_coefficient(link);
    if beta == 0.0 || samples.is_empty() {
        return samples.to_vec();
    }
    let n = samples.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf = samples.to_vec();
    fft.process(&mut buf);
    let sign = match direction {
        CdDirection::Fiber => 1.0,
        CdDirection::Compensation => -1.0,
    };
    let df = link.symbol_rate() / n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        let bin = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = 2.0 * PI * bin * df;
        *v *= Complex64::from_polar(1.0, sign * beta * omega * omega);
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Multiplies each sample by exp(jφ(k)).
pub fn apply_phase(samples: &[Complex64], track: &PhaseTrack) -> Result<Vec<Complex64>> {
    if samples.len() != track.len() {
        return Err(Error::LengthMismatch {
            expected: samples.len(),
            actual: track.len(),
        });
    }
    Ok(samples
        .iter()
        .zip(&track.phases)
        .map(|(s, &p)| {
            let (sin, cos) = p.sin_cos();
            s * Complex64::new(cos, sin)
        })
        .collect())
}

/// Adds circular complex Gaussian noise with variance P/SNR, where P is the
/// measured mean power of `samples`.
pub fn add_awgn(samples: &[Complex64], snr: Snr, seed: u64) -> Vec<Complex64> {
    let db = match snr {
        Snr::Noiseless => return samples.to_vec(),
        Snr::EsN0Db(db) => db,
    };
    if samples.is_empty() {
        return Vec::new();
    }
    let power = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64;
    let sigma = (power / 10f64.powf(db / 10.0) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    samples
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

/// Transmitter phase, fiber dispersion, AWGN, LO phase, then electronic
/// dispersion compensation. The returned frame carries the post-EDC samples
/// and the combined Tx+LO phase as its genie track.
pub fn eepn_path(
    frame: &SymbolFrame,
    link: &LinkParams,
    tx_track: &PhaseTrack,
    lo_track: &PhaseTrack,
    snr: Snr,
    seed: u64,
) -> Result<SymbolFrame> {
    let launched = apply_phase(&frame.tx_symbols, tx_track)?;
    let dispersed = apply_cd(&launched, link, CdDirection::Fiber);
    let noisy = add_awgn(&dispersed, snr, seed);
    let mixed = apply_phase(&noisy, lo_track)?;
    let equalized = apply_cd(&mixed, link, CdDirection::Compensation);
    Ok(SymbolFrame {
        rx_symbols: equalized,
        true_phase: tx_track.combined(lo_track)?,
        ..frame.clone()
    })
}
