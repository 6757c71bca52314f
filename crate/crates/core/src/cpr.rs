//! Carrier phase recovery: one-tap normalized LMS, block-wise average and
//! Viterbi-Viterbi.
//!
//! The two feed-forward estimators raise samples to the n-th power to strip
//! the modulation, which leaves a 2π/n ambiguity in every estimate. That
//! ambiguity is resolved by [`unwrap_ambiguity`] either against the previous
//! estimate or against a genie reference derived from the true phase.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;

use rayon::prelude::*;

use crate::channel::{add_awgn, apply_phase, Snr};
use crate::error::{invalid, Error, Result};
use crate::modem::{count_errors_in, random_frame, Coding, Constellation};
use crate::noise::generate_wiener_phase;
use crate::seed;
use crate::AlgorithmKind;

/// Known-symbol prefix used to pull the NLMS loop in before it runs
/// decision-directed.
pub const DEFAULT_TRAINING_SYMBOLS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Nlms { mu: f64 },
    Bwa { block_length: usize },
    Vv { block_length: usize },
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::Nlms { .. } => AlgorithmKind::Nlms,
            Algorithm::Bwa { .. } => AlgorithmKind::Bwa,
            Algorithm::Vv { .. } => AlgorithmKind::Vv,
        }
    }

    pub fn block_length(&self) -> Option<usize> {
        match *self {
            Algorithm::Nlms { .. } => None,
            Algorithm::Bwa { block_length } | Algorithm::Vv { block_length } => Some(block_length),
        }
    }

    pub fn mu(&self) -> Option<f64> {
        match *self {
            Algorithm::Nlms { mu } => Some(mu),
            _ => None,
        }
    }
}

/// How the n-fold ambiguity of an n-th-power estimate is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnwrapPolicy {
    /// Pick the branch closest to the previous estimate.
    PreviousEstimate,
    /// Pick the branch closest to a reference built from the true phase.
    Genie,
}

/// How the n-th-power samples inside a block or window are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    /// φ = arg(Σ xⁿ)/n, ambiguity resolved on the block estimate.
    Phasor,
    /// Per-sample phases arg(xⁿ)/n are ambiguity-resolved first and then
    /// averaged linearly.
    PhaseAverage,
}

impl fmt::Display for UnwrapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnwrapPolicy::PreviousEstimate => "previous",
            UnwrapPolicy::Genie => "genie",
        })
    }
}

impl FromStr for UnwrapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "previous" | "previous-estimate" => Ok(UnwrapPolicy::PreviousEstimate),
            "genie" => Ok(UnwrapPolicy::Genie),
            other => Err(invalid(format!(
                "unknown unwrap policy `{other}` (expected previous or genie)"
            ))),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Phasor => "phasor",
            Estimator::PhaseAverage => "phase-average",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phasor" => Ok(Estimator::Phasor),
            "phase-average" | "phase" => Ok(Estimator::PhaseAverage),
            other => Err(invalid(format!(
                "unknown estimator `{other}` (expected phasor or phase-average)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CprConfig {
    pub algorithm: Algorithm,
    pub unwrap: UnwrapPolicy,
    pub estimator: Estimator,
    pub training_symbols: usize,
}

impl CprConfig {
    pub fn new(algorithm: Algorithm) -> Result<Self> {
        let config = Self {
            algorithm,
            unwrap: UnwrapPolicy::PreviousEstimate,
            estimator: Estimator::Phasor,
            training_symbols: DEFAULT_TRAINING_SYMBOLS,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn nlms(mu: f64) -> Result<Self> {
        Self::new(Algorithm::Nlms { mu })
    }

    pub fn bwa(block_length: usize) -> Result<Self> {
        Self::new(Algorithm::Bwa { block_length })
    }

    pub fn vv(block_length: usize) -> Result<Self> {
        Self::new(Algorithm::Vv { block_length })
    }

    /// Builds the configuration for an algorithm family; `block_length` is
    /// ignored for NLMS and `mu` for the block estimators.
    pub fn for_kind(kind: AlgorithmKind, mu: f64, block_length: usize) -> Result<Self> {
        match kind {
            AlgorithmKind::Nlms => Self::nlms(mu),
            AlgorithmKind::Bwa => Self::bwa(block_length),
            AlgorithmKind::Vv => Self::vv(block_length),
        }
    }

    pub fn with_unwrap(mut self, unwrap: UnwrapPolicy) -> Self {
        self.unwrap = unwrap;
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_training(mut self, symbols: usize) -> Self {
        self.training_symbols = symbols;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.algorithm {
            Algorithm::Nlms { mu } => {
                if !(mu > 0.0 && mu <= 1.0) {
                    return Err(invalid(format!("NLMS step size must satisfy 0 < mu <= 1, got {mu}")));
                }
            }
            Algorithm::Bwa { block_length } => {
                if block_length == 0 {
                    return Err(invalid("N_BWA must be >= 1"));
                }
            }
            Algorithm::Vv { block_length } => {
                if block_length == 0 || block_length % 2 == 0 {
                    return Err(invalid(format!("N_VV must be odd, got {block_length}")));
                }
            }
        }
        Ok(())
    }
}

/// Side information available to the receiver model.
#[derive(Debug, Clone, Copy, Default)]
pub struct Genie<'a> {
    /// True carrier phase per symbol.
    pub phase: Option<&'a [f64]>,
    /// Transmitted symbols, used for the NLMS training prefix.
    pub tx: Option<&'a [Complex64]>,
}

/// Per-algorithm trace.
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    /// NLMS tap weight w(k) applied to symbol k.
    Taps(Vec<Complex64>),
    /// BWA block boundaries.
    Blocks(Vec<Range<usize>>),
    /// VV window half width (N_VV - 1)/2.
    Window { half_width: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CprOutput {
    pub estimated_phase: Vec<f64>,
    pub corrected_symbols: Vec<Complex64>,
    pub decisions: Vec<usize>,
    pub trace: Trace,
}

/// Runs the configured algorithm.
pub fn recover(
    rx: &[Complex64],
    constellation: &Constellation,
    config: &CprConfig,
    genie: &Genie<'_>,
) -> Result<CprOutput> {
    config.validate()?;
    match config.algorithm {
        Algorithm::Nlms { mu } => {
            let training = genie
                .tx
                .map(|tx| &tx[..config.training_symbols.min(tx.len())])
                .unwrap_or(&[]);
            nlms(rx, constellation, mu, training)
        }
        Algorithm::Bwa { block_length } => bwa(
            rx,
            constellation,
            block_length,
            config.estimator,
            config.unwrap,
            genie.phase,
        ),
        Algorithm::Vv { block_length } => vv(
            rx,
            constellation,
            block_length,
            config.estimator,
            config.unwrap,
            genie.phase,
        ),
    }
}

/// One-tap normalized LMS:
///
/// ```text
/// y(k)   = w(k)·x(k)
/// e(k)   = d(k) − y(k)
/// w(k+1) = w(k) + μ·e(k)·x*(k)/|x(k)|²,   w(0) = 1
/// ```
///
/// `d(k)` is the `training` symbol while one is available and the hard
/// decision on `y(k)` afterwards.
pub fn nlms(rx: &[Complex64], constellation: &Constellation, mu: f64, training: &[Complex64]) -> Result<CprOutput> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(invalid(format!("NLMS step size must satisfy 0 < mu <= 1, got {mu}")));
    }
    let len = rx.len();
    let mut taps = Vec::with_capacity(len);
    let mut estimated_phase = Vec::with_capacity(len);
    let mut corrected_symbols = Vec::with_capacity(len);
    let mut decisions = Vec::with_capacity(len);
    let mut w = Complex64::new(1.0, 0.0);
    let mut phase = 0.0;
    for (k, &x) in rx.iter().enumerate() {
        let power = x.norm_sqr();
        if power == 0.0 {
            return Err(Error::ZeroSample(k));
        }
        taps.push(w);
        phase = nearest_branch(-w.arg(), phase, 2.0 * PI);
        estimated_phase.push(phase);
        let y = w * x;
        if y.norm_sqr() == 0.0 {
            return Err(invalid(format!("NLMS output collapsed to zero at symbol {k}")));
        }
        let decided = constellation.decide_angle(y.arg());
        let desired = training.get(k).copied().unwrap_or_else(|| constellation.point(decided));
        let e = desired - y;
        w += mu * e * x.conj() / power;
        corrected_symbols.push(y);
        decisions.push(decided);
    }
    Ok(CprOutput {
        estimated_phase,
        corrected_symbols,
        decisions,
        trace: Trace::Taps(taps),
    })
}

/// Block-wise average: one estimate per block of `block_length` symbols,
/// applied to every symbol of the block. A short final block is estimated
/// from the symbols it has.
pub fn bwa(
    rx: &[Complex64],
    constellation: &Constellation,
    block_length: usize,
    estimator: Estimator,
    unwrap: UnwrapPolicy,
    genie: Option<&[f64]>,
) -> Result<CprOutput> {
    if block_length == 0 {
        return Err(invalid("N_BWA must be >= 1"));
    }
    check_genie(rx.len(), unwrap, genie)?;
    let n = constellation.order();
    let period = constellation.phase_step();
    let blocks: Vec<Range<usize>> = (0..rx.len())
        .step_by(block_length)
        .map(|start| start..(start + block_length).min(rx.len()))
        .collect();

    let angles: Vec<f64> = rx.iter().map(|x| x.arg()).collect();
    let mut estimated_phase = vec![0.0; rx.len()];
    match estimator {
        Estimator::Phasor => {
            let powers = nth_powers(rx, n);
            let raw: Vec<f64> = blocks
                .iter()
                .map(|b| powers[b.clone()].iter().sum::<Complex64>().arg() / n as f64)
                .collect();
            let reference: Option<Vec<f64>> = genie.map(|g| blocks.iter().map(|b| mean(&g[b.clone()])).collect());
            let resolved = unwrap_ambiguity(&raw, period, unwrap, reference.as_deref())?;
            for (b, phi) in blocks.iter().zip(resolved) {
                estimated_phase[b.clone()].fill(phi);
            }
        }
        Estimator::PhaseAverage => {
            let resolved = resolved_sample_phases(&angles, period, unwrap, genie)?;
            for b in &blocks {
                let phi = mean(&resolved[b.clone()]);
                estimated_phase[b.clone()].fill(phi);
            }
        }
    }
    Ok(finish(
        rx,
        &angles,
        constellation,
        estimated_phase,
        Trace::Blocks(blocks),
    ))
}

/// Viterbi-Viterbi: each symbol gets the estimate of the `block_length`
/// window centred on it. Windows are truncated at the frame edges.
pub fn vv(
    rx: &[Complex64],
    constellation: &Constellation,
    block_length: usize,
    estimator: Estimator,
    unwrap: UnwrapPolicy,
    genie: Option<&[f64]>,
) -> Result<CprOutput> {
    if block_length == 0 || block_length.is_multiple_of(2) {
        return Err(invalid(format!("N_VV must be odd, got {block_length}")));
    }
    check_genie(rx.len(), unwrap, genie)?;
    let n = constellation.order();
    let period = constellation.phase_step();
    let half = (block_length - 1) / 2;
    let len = rx.len();
    let window = |k: usize| k.saturating_sub(half)..(k + half + 1).min(len);
    let angles: Vec<f64> = rx.iter().map(|x| x.arg()).collect();

    let estimated_phase = match estimator {
        Estimator::Phasor => {
            let powers = nth_powers(rx, n);
            let raw: Vec<f64> = (0..len)
                .map(|k| powers[window(k)].iter().sum::<Complex64>().arg() / n as f64)
                .collect();
            let reference: Option<Vec<f64>> = genie.map(|g| (0..len).map(|k| mean(&g[window(k)])).collect());
            unwrap_ambiguity(&raw, period, unwrap, reference.as_deref())?
        }
        Estimator::PhaseAverage => {
            let resolved = resolved_sample_phases(&angles, period, unwrap, genie)?;
            (0..len).map(|k| mean(&resolved[window(k)])).collect()
        }
    };
    Ok(finish(
        rx,
        &angles,
        constellation,
        estimated_phase,
        Trace::Window { half_width: half },
    ))
}

/// Adds to each raw phase the multiple of `period` that brings it closest
/// to its reference: the previous resolved value (initialised from the
/// genie's first sample when given, else left as is), or the genie track.
pub fn unwrap_ambiguity(raw: &[f64], period: f64, policy: UnwrapPolicy, genie: Option<&[f64]>) -> Result<Vec<f64>> {
    if let Some(g) = genie {
        if g.len() != raw.len() {
            return Err(Error::LengthMismatch {
                expected: raw.len(),
                actual: g.len(),
            });
        }
    }
    match policy {
        UnwrapPolicy::Genie => {
            let g = genie.ok_or(Error::MissingGenie)?;
            Ok(raw.iter().zip(g).map(|(&r, &t)| nearest_branch(r, t, period)).collect())
        }
        UnwrapPolicy::PreviousEstimate => {
            let mut out = Vec::with_capacity(raw.len());
            let mut reference = match (genie, raw.first()) {
                (Some(g), Some(_)) => g[0],
                (None, Some(&r)) => r,
                (_, None) => return Ok(out),
            };
            for &r in raw {
                reference = nearest_branch(r, reference, period);
                out.push(reference);
            }
            Ok(out)
        }
    }
}

/// Principal value of `x` modulo `period`, in [-period/2, period/2].
pub fn wrap_to_period(x: f64, period: f64) -> f64 {
    x - period * round_half_away(x / period)
}

fn nearest_branch(value: f64, reference: f64, period: f64) -> f64 {
    value + period * round_half_away((reference - value) / period)
}

/// Same as `f64::round` for |x| < 2⁵²; the integer cast avoids a libm call
/// on baseline x86-64.
#[inline]
fn round_half_away(x: f64) -> f64 {
    if x.abs() < 4_503_599_627_370_496.0 {
        let a = x.abs();
        let t = a as i64 as f64;
        // a - t is exact below 2^52, so the half comparison is too
        let r = if a - t >= 0.5 { t + 1.0 } else { t };
        r.copysign(x)
    } else {
        x.round()
    }
}

fn check_genie(len: usize, unwrap: UnwrapPolicy, genie: Option<&[f64]>) -> Result<()> {
    match genie {
        None if unwrap == UnwrapPolicy::Genie => Err(Error::MissingGenie),
        Some(g) if g.len() != len => Err(Error::LengthMismatch {
            expected: len,
            actual: g.len(),
        }),
        _ => Ok(()),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// xⁿ of the unit-normalised samples by repeated squaring; zero samples
/// contribute nothing.
fn nth_powers(rx: &[Complex64], n: usize) -> Vec<Complex64> {
    debug_assert!(n.is_power_of_two());
    let squarings = n.trailing_zeros();
    rx.iter()
        .map(|&x| {
            let mag = x.norm();
            if mag == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut u = x / mag;
            for _ in 0..squarings {
                u = u * u;
            }
            u
        })
        .collect()
}

/// Per-sample phases arg(xⁿ)/n, ambiguity-resolved sample by sample.
fn resolved_sample_phases(
    angles: &[f64],
    period: f64,
    unwrap: UnwrapPolicy,
    genie: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let raw: Vec<f64> = angles.iter().map(|&a| wrap_to_period(a, period)).collect();
    unwrap_ambiguity(&raw, period, unwrap, genie)
}

fn finish(
    rx: &[Complex64],
    angles: &[f64],
    constellation: &Constellation,
    estimated_phase: Vec<f64>,
    trace: Trace,
) -> CprOutput {
    let mut corrected_symbols = Vec::with_capacity(rx.len());
    let mut decisions = Vec::with_capacity(rx.len());
    for ((&x, &theta), &phi) in rx.iter().zip(angles).zip(&estimated_phase) {
        let (sin, cos) = phi.sin_cos();
        corrected_symbols.push(x * Complex64::new(cos, -sin));
        decisions.push(constellation.decide_angle(theta - phi));
    }
    CprOutput {
        estimated_phase,
        corrected_symbols,
        decisions,
        trace,
    }
}

/// Probe run used by [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuProbe {
    pub symbols: usize,
    pub seed: u64,
    pub snr: Snr,
}

impl Default for MuProbe {
    fn default() -> Self {
        Self {
            symbols: 100_000,
            seed: 0,
            snr: Snr::Noiseless,
        }
    }
}

/// μ from 0.01 to 1 in steps of 0.005.
pub fn default_mu_grid() -> Vec<f64> {
    (0..=198).map(|i| (2.0 + i as f64) * 0.005).collect()
}

/// Grid step size with the lowest probe BER under differential decoding.
/// Ties go to the lower mean squared decision error, then to the smaller μ.
/// Every μ sees the same frame.
pub fn optimize_mu(order: usize, sigma2: f64, grid: &[f64], probe: &MuProbe) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid("step-size grid"));
    }
    if let Some(&bad) = grid.iter().find(|&&mu| !(mu > 0.0 && mu <= 1.0)) {
        return Err(invalid(format!("step-size grid values must lie in (0, 1], got {bad}")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() == 1 {
        return Ok(sorted[0]);
    }
    let training = DEFAULT_TRAINING_SYMBOLS;
    let len = probe.symbols + training;
    let c = Constellation::new(order)?;
    let mut frame = random_frame(len, &c, Coding::Differential, seed::substream(probe.seed, 0))?;
    let track = generate_wiener_phase(len, sigma2, seed::substream(probe.seed, 1))?;
    let rotated = apply_phase(&frame.tx_symbols, &track)?;
    frame.rx_symbols = add_awgn(&rotated, probe.snr, seed::substream(probe.seed, 2));
    frame.true_phase = track;

    let scores = sorted
        .par_iter()
        .map(|&mu| {
            let out = nlms(&frame.rx_symbols, &c, mu, &frame.tx_symbols[..training])?;
            let counts = count_errors_in(&frame, &out.decisions, &c, training..len)?;
            let mse: f64 = (training..len)
                .map(|k| (c.point(out.decisions[k]) - out.corrected_symbols[k]).norm_sqr())
                .sum();
            Ok((counts.bit_errors, mse))
        })
        .collect::<Result<Vec<(u64, f64)>>>()?;

    let mut best = 0;
    for (i, score) in scores.iter().enumerate().skip(1) {
        let current = scores[best];
        if score.0 < current.0 || (score.0 == current.0 && score.1 < current.1) {
            best = i;
        }
    }
    Ok(sorted[best])
}
