//! Monte-Carlo floor measurement, the physical EEPN check, and named
//! parameter sweeps.
//!
//! Every frame draws its randomness from a seed derived from the base seed,
//! the sweep point index and the frame index, so results do not depend on
//! how rayon schedules the frames.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytics::FloorQuery;
use crate::channel::{add_awgn, apply_phase, eepn_path, guard_symbols, Snr};
use crate::cpr::{self, Algorithm, CprConfig, Estimator, Genie, MuProbe, UnwrapPolicy};
use crate::error::{invalid, Error, Result};
use crate::modem::{count_errors_in, random_frame, Coding, Constellation, ErrorCounts};
use crate::noise::{self, generate_wiener_phase, LinkParams};
use crate::seed;
use crate::AlgorithmKind;

/// Default frame length, 2¹⁶ symbols.
pub const DEFAULT_FRAME_LEN: usize = 1 << 16;
/// Smallest symbol budget accepted for a Monte-Carlo point.
pub const MIN_MC_SYMBOLS: u64 = 10_000;
/// Lowest finite Es/N0 accepted when measuring a floor.
pub const MIN_FLOOR_SNR_DB: f64 = 40.0;
/// Expected bit errors targeted by the default symbol budget.
pub const TARGET_ERRORS: f64 = 100.0;

const Z_95: f64 = 1.959_963_984_540_054;

/// How decisions are turned into data before counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoding {
    /// Differential coding; data rides on decision increments.
    Differential,
    /// Absolute coding with the estimator ambiguity resolved by the genie.
    GenieReferenced,
}

impl fmt::Display for Decoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoding::Differential => "differential",
            Decoding::GenieReferenced => "genie",
        })
    }
}

impl FromStr for Decoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "differential" => Ok(Decoding::Differential),
            "genie" | "genie-referenced" => Ok(Decoding::GenieReferenced),
            other => Err(invalid(format!(
                "unknown decoding `{other}` (expected differential or genie)"
            ))),
        }
    }
}

/// How EEPN enters a Monte-Carlo run that is described by a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EepnInjection {
    /// One Wiener track with the total per-symbol variance.
    VarianceEquivalent,
    /// Separate Tx and LO tracks through fiber dispersion and EDC.
    Physical,
}

impl fmt::Display for EepnInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EepnInjection::VarianceEquivalent => "variance-equivalent",
            EepnInjection::Physical => "physical",
        })
    }
}

impl FromStr for EepnInjection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "variance-equivalent" | "variance" => Ok(EepnInjection::VarianceEquivalent),
            "physical" => Ok(EepnInjection::Physical),
            other => Err(invalid(format!(
                "unknown EEPN injection `{other}` (expected variance-equivalent or physical)"
            ))),
        }
    }
}

/// Source of carrier phase noise for a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseNoise {
    /// Total per-symbol Wiener increment variance (rad²).
    Variance(f64),
    /// Lasers and fiber; the variance follows from the link.
    Link(LinkParams),
}

impl PhaseNoise {
    pub fn total_variance(&self) -> f64 {
        match self {
            PhaseNoise::Variance(v) => *v,
            PhaseNoise::Link(link) => noise::total_variance(link),
        }
    }
}

/// One algorithm on one constellation under one phase-noise condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub order: usize,
    pub cpr: CprConfig,
    pub noise: PhaseNoise,
}

impl Scenario {
    pub fn floor_query(&self) -> FloorQuery {
        FloorQuery {
            order: self.order,
            sigma2: self.noise.total_variance(),
            kind: self.cpr.algorithm.kind(),
            block_length: self.cpr.algorithm.block_length().unwrap_or(1),
        }
    }

    pub fn analytic_floor(&self) -> Result<f64> {
        self.floor_query().floor()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub frame_len: usize,
    /// Counted symbols per point; `None` applies the error-target budget.
    pub symbols: Option<u64>,
    /// Frame count; with `symbols` set it fixes the frame length instead.
    pub frames: Option<u64>,
    /// Upper bound of the error-target budget.
    pub max_symbols: u64,
    pub base_seed: u64,
    pub decoding: Decoding,
    pub snr: Snr,
    pub eepn: EepnInjection,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            frame_len: DEFAULT_FRAME_LEN,
            symbols: None,
            frames: None,
            max_symbols: 100_000_000,
            base_seed: 0,
            decoding: Decoding::Differential,
            snr: Snr::Noiseless,
            eepn: EepnInjection::VarianceEquivalent,
        }
    }
}

impl McSettings {
    fn validate(&self) -> Result<()> {
        if let Snr::EsN0Db(db) = self.snr {
            if !(db >= MIN_FLOOR_SNR_DB) {
                return Err(invalid(format!(
                    "floor measurement needs a noiseless channel or Es/N0 >= {MIN_FLOOR_SNR_DB} dB, got {db} dB"
                )));
            }
        }
        if self.frame_len == 0 || self.frames == Some(0) {
            return Err(invalid("frame length and frame count must be >= 1"));
        }
        if let Some(s) = self.symbols {
            if s < MIN_MC_SYMBOLS {
                return Err(invalid(format!(
                    "Monte-Carlo runs need at least {MIN_MC_SYMBOLS} symbols per point, got {s}"
                )));
            }
        }
        Ok(())
    }

    /// Counted symbols for a point: the explicit budget, or enough for
    /// [`TARGET_ERRORS`] expected bit errors (at least 10⁶, at most
    /// `max_symbols`).
    pub fn symbol_budget(&self, analytic_floor: f64, bits_per_symbol: u32) -> u64 {
        if let Some(s) = self.symbols {
            return s;
        }
        if let Some(f) = self.frames {
            return f.saturating_mul(self.frame_len as u64);
        }
        let needed = TARGET_ERRORS / (analytic_floor * bits_per_symbol as f64);
        let needed = if needed.is_finite() {
            needed.ceil()
        } else {
            f64::INFINITY
        };
        let capped = needed.min(self.max_symbols as f64).max(1e6);
        capped as u64
    }
}

/// Monte-Carlo outcome for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub counts: ErrorCounts,
    /// `None` when no bit error was seen.
    pub ber: Option<f64>,
    /// One bit error over the counted bits.
    pub resolution: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Measured {
    fn from_counts(counts: ErrorCounts) -> Self {
        let (ci_low, ci_high) = wilson_interval(counts.bit_errors, counts.bits);
        Self {
            counts,
            ber: (counts.bit_errors > 0).then(|| counts.ber()),
            resolution: 1.0 / counts.bits as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn below_resolution(&self) -> bool {
        self.ber.is_none()
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

/// Parameters of a sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub algorithm: AlgorithmKind,
    pub order: usize,
    pub block_length: Option<usize>,
    pub sigma2: f64,
    /// Linewidth of each laser, for link-driven points.
    pub linewidth_hz: Option<f64>,
    pub distance_km: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct FloorResult {
    pub point: Point,
    /// NLMS step size used by the Monte-Carlo run, or the fixed value.
    pub mu: Option<f64>,
    pub analytic_floor: f64,
    pub measured: Option<Measured>,
    pub seed: u64,
    pub elapsed: Duration,
}

impl PartialEq for FloorResult {
    fn eq(&self, other: &Self) -> bool {
        self.point == other.point
            && self.mu == other.mu
            && self.analytic_floor.to_bits() == other.analytic_floor.to_bits()
            && self.measured == other.measured
            && self.seed == other.seed
    }
}

impl FloorResult {
    /// measured/analytic, when both are positive.
    pub fn ratio(&self) -> Option<f64> {
        let ber = self.measured?.ber?;
        (self.analytic_floor > 0.0).then(|| ber / self.analytic_floor)
    }
}

/// Measures the BER floor of a scenario with the point index fixed at 0.
pub fn measure_floor(scenario: &Scenario, settings: &McSettings) -> Result<FloorResult> {
    let point = Point {
        algorithm: scenario.cpr.algorithm.kind(),
        order: scenario.order,
        block_length: scenario.cpr.algorithm.block_length(),
        sigma2: scenario.noise.total_variance(),
        linewidth_hz: None,
        distance_km: None,
    };
    measure_point(scenario, settings, point, 0)
}

fn measure_point(scenario: &Scenario, settings: &McSettings, point: Point, index: u64) -> Result<FloorResult> {
    settings.validate()?;
    scenario.cpr.validate()?;
    let start = Instant::now();
    let analytic_floor = scenario.analytic_floor()?;
    let c = Constellation::new(scenario.order)?;

    let mut cfg = scenario.cpr;
    if settings.decoding == Decoding::GenieReferenced {
        cfg.unwrap = UnwrapPolicy::Genie;
    }
    let guard = match (scenario.noise, settings.eepn) {
        (PhaseNoise::Link(link), EepnInjection::Physical) => guard_symbols(&link),
        _ => 0,
    };
    let (lead, tail) = match cfg.algorithm {
        Algorithm::Nlms { .. } => (cfg.training_symbols, 0),
        Algorithm::Bwa { .. } => (0, 0),
        Algorithm::Vv { block_length } => ((block_length - 1) / 2, (block_length - 1) / 2),
    };
    let skipped = 2 * guard + lead + tail;

    let budget = settings.symbol_budget(analytic_floor, c.bits_per_symbol());
    let (frames, counted_per_frame) = match (settings.symbols, settings.frames) {
        (Some(s), Some(f)) => (f, s.div_ceil(f)),
        (None, Some(f)) => (f, settings.frame_len.saturating_sub(skipped) as u64),
        _ => {
            let per = settings.frame_len.saturating_sub(skipped) as u64;
            (if per == 0 { 1 } else { budget.div_ceil(per) }, per)
        }
    };
    if counted_per_frame == 0 {
        return Err(invalid(format!(
            "frame length {} leaves no counted symbols after discarding {skipped} edge symbols",
            settings.frame_len
        )));
    }
    let frame_len = counted_per_frame as usize + skipped;

    let counts = (0..frames)
        .into_par_iter()
        .map(|f| {
            let frame_seed = seed::derive(settings.base_seed, index, f);
            simulate_frame(
                scenario,
                settings,
                &cfg,
                &c,
                frame_len,
                guard + lead..frame_len - guard - tail,
                frame_seed,
            )
        })
        .try_reduce(ErrorCounts::default, |a, b| Ok(a + b))?;

    let mu = cfg.algorithm.mu();
    Ok(FloorResult {
        point,
        mu,
        analytic_floor,
        measured: Some(Measured::from_counts(counts)),
        seed: settings.base_seed,
        elapsed: start.elapsed(),
    })
}

fn simulate_frame(
    scenario: &Scenario,
    settings: &McSettings,
    cfg: &CprConfig,
    c: &Constellation,
    len: usize,
    counted: std::ops::Range<usize>,
    frame_seed: u64,
) -> Result<ErrorCounts> {
    let coding = match settings.decoding {
        Decoding::Differential => Coding::Differential,
        Decoding::GenieReferenced => Coding::Absolute,
    };
    let mut frame = random_frame(len, c, coding, seed::substream(frame_seed, 0))?;
    match (scenario.noise, settings.eepn) {
        (PhaseNoise::Link(link), EepnInjection::Physical) => {
            let t = link.symbol_period();
            let tx_var = 2.0 * std::f64::consts::PI * link.delta_f_tx() * t;
            let lo_var = 2.0 * std::f64::consts::PI * link.delta_f_lo() * t;
            let tx_track = generate_wiener_phase(len, tx_var, seed::substream(frame_seed, 1))?;
            let lo_track = generate_wiener_phase(len, lo_var, seed::substream(frame_seed, 3))?;
            frame = eepn_path(
                &frame,
                &link,
                &tx_track,
                &lo_track,
                settings.snr,
                seed::substream(frame_seed, 2),
            )?;
        }
        (noise, _) => {
            let track = generate_wiener_phase(len, noise.total_variance(), seed::substream(frame_seed, 1))?;
            let rotated = apply_phase(&frame.tx_symbols, &track)?;
            frame.rx_symbols = add_awgn(&rotated, settings.snr, seed::substream(frame_seed, 2));
            frame.true_phase = track;
        }
    }
    let genie = Genie {
        phase: Some(&frame.true_phase.phases),
        tx: Some(&frame.tx_symbols),
    };
    let out = cpr::recover(&frame.rx_symbols, c, cfg, &genie)?;
    count_errors_in(&frame, &out.decisions, c, counted)
}

/// Phase and power of the EEPN produced by the physical path with a quiet
/// transmitter laser and no additive noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EepnMeasurement {
    pub distance_km: f64,
    /// Variance of arg(rx·tx*·e^{-jφ_LO}) over the counted symbols.
    pub phase_variance: f64,
    /// Mean |rx·tx*·e^{-jφ_LO} − 1|².
    pub noise_power: f64,
    /// Closed-form EEPN variance for the link.
    pub predicted: f64,
    pub symbols: u64,
}

/// Runs QPSK frames through the physical EEPN path and measures the noise
/// left around the LO phase.
pub fn measure_eepn(link: &LinkParams, frames: u64, frame_len: usize, base_seed: u64) -> Result<EepnMeasurement> {
    let guard = guard_symbols(link);
    if frame_len <= 2 * guard {
        return Err(invalid(format!(
            "frame length {frame_len} must exceed twice the dispersion guard of {guard} symbols"
        )));
    }
    let c = Constellation::new(4)?;
    let lo_var = 2.0 * std::f64::consts::PI * link.delta_f_lo() * link.symbol_period();
    let sums = (0..frames)
        .into_par_iter()
        .map(|f| -> Result<(f64, f64, f64, u64)> {
            let frame_seed = seed::derive(base_seed, 0, f);
            let frame = random_frame(frame_len, &c, Coding::Absolute, seed::substream(frame_seed, 0))?;
            let tx_track = noise::PhaseTrack::zeros(frame_len);
            let lo_track = generate_wiener_phase(frame_len, lo_var, seed::substream(frame_seed, 3))?;
            let rx = eepn_path(&frame, link, &tx_track, &lo_track, Snr::Noiseless, 0)?;
            let (mut s1, mut s2, mut p) = (0.0, 0.0, 0.0);
            for k in guard..frame_len - guard {
                let err =
                    rx.rx_symbols[k] * frame.tx_symbols[k].conj() * Complex64::from_polar(1.0, -lo_track.phases[k]);
                let phi = err.arg();
                s1 += phi;
                s2 += phi * phi;
                p += (err - 1.0).norm_sqr();
            }
            Ok((s1, s2, p, (frame_len - 2 * guard) as u64))
        })
        .try_reduce(
            || (0.0, 0.0, 0.0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3)),
        )?;
    let n = sums.3 as f64;
    let mean = sums.0 / n;
    Ok(EepnMeasurement {
        distance_km: noise::m_to_km(link.fiber_length()),
        phase_variance: sums.1 / n - mean * mean,
        noise_power: sums.2 / n,
        predicted: noise::eepn_variance(link),
        symbols: sums.3,
    })
}

/// The swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// Total phase-noise variance σ² (rad²).
    Variance(Vec<f64>),
    /// Linewidth of each laser (Hz), back-to-back.
    Linewidth(Vec<f64>),
    /// Fiber length (km) with the sweep's laser linewidths.
    Distance(Vec<f64>),
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Variance(_) => "sigma2",
            Axis::Linewidth(_) => "linewidth_hz",
            Axis::Distance(_) => "distance_km",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Axis::Variance(v) | Axis::Linewidth(v) | Axis::Distance(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Analytic,
    MonteCarlo,
    Both,
}

impl Mode {
    pub fn includes_mc(self) -> bool {
        !matches!(self, Mode::Analytic)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Analytic => "analytic",
            Mode::MonteCarlo => "mc",
            Mode::Both => "both",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(Mode::Analytic),
            "mc" | "montecarlo" | "monte-carlo" => Ok(Mode::MonteCarlo),
            "both" => Ok(Mode::Both),
            other => Err(invalid(format!(
                "unknown mode `{other}` (expected analytic, mc or both)"
            ))),
        }
    }
}

/// NLMS step size selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuChoice {
    Fixed(f64),
    /// Chosen per point by [`cpr::optimize_mu`] over the default grid.
    Optimized,
}

impl fmt::Display for MuChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuChoice::Fixed(mu) => write!(f, "{mu}"),
            MuChoice::Optimized => f.write_str("optimized"),
        }
    }
}

impl FromStr for MuChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("optimized") || s.eq_ignore_ascii_case("opt") {
            return Ok(MuChoice::Optimized);
        }
        let mu: f64 = s
            .parse()
            .map_err(|_| invalid(format!("step size must be a number or `optimized`, got `{s}`")))?;
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(invalid(format!("NLMS step size must satisfy 0 < mu <= 1, got {mu}")));
        }
        Ok(MuChoice::Fixed(mu))
    }
}

/// A Cartesian sweep: algorithms × orders × block lengths × axis values.
/// NLMS ignores the block lengths and contributes one series per order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub algorithms: Vec<AlgorithmKind>,
    pub orders: Vec<usize>,
    pub block_lengths: Vec<usize>,
    pub axis: Axis,
    /// Baud rate, wavelength, dispersion and laser linewidths for link axes.
    pub link: LinkParams,
    pub mode: Mode,
    pub mu: MuChoice,
    pub estimator: Estimator,
    pub unwrap: UnwrapPolicy,
    pub mc: McSettings,
    pub probe: MuProbe,
}

impl SweepSpec {
    /// An analytic sweep over `axis` with default settings.
    pub fn new(
        name: impl Into<String>,
        algorithms: Vec<AlgorithmKind>,
        orders: Vec<usize>,
        block_lengths: Vec<usize>,
        axis: Axis,
    ) -> Self {
        Self {
            name: name.into(),
            algorithms,
            orders,
            block_lengths,
            axis,
            link: LinkParams::ssmf_32gbd(),
            mode: Mode::Analytic,
            mu: MuChoice::Optimized,
            estimator: Estimator::Phasor,
            unwrap: UnwrapPolicy::PreviousEstimate,
            mc: McSettings::default(),
            probe: MuProbe::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::EmptyGrid("algorithms"));
        }
        if self.orders.is_empty() {
            return Err(Error::EmptyGrid("orders"));
        }
        if self.axis.values().is_empty() {
            return Err(Error::EmptyGrid(self.axis.name()));
        }
        let needs_blocks = self.algorithms.iter().any(|a| a.uses_block_length());
        if needs_blocks && self.block_lengths.is_empty() {
            return Err(Error::EmptyGrid("block lengths"));
        }
        for &order in &self.orders {
            Constellation::new(order)?;
        }
        for &alg in &self.algorithms {
            for &n in &self.block_lengths {
                if alg.uses_block_length() {
                    CprConfig::for_kind(alg, 1.0, n)?;
                }
            }
        }
        for &x in self.axis.values() {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid(format!(
                    "{} values must be finite and >= 0, got {x}",
                    self.axis.name()
                )));
            }
        }
        if let MuChoice::Fixed(mu) = self.mu {
            CprConfig::nlms(mu)?;
        }
        if self.mode.includes_mc() {
            self.mc.validate()?;
        }
        Ok(())
    }

    fn noise_at(&self, x: f64) -> Result<(PhaseNoise, Option<f64>, Option<f64>)> {
        Ok(match self.axis {
            Axis::Variance(_) => (PhaseNoise::Variance(x), None, None),
            Axis::Linewidth(_) => {
                let link = self.link.with_linewidths(x, x)?.with_fiber_length(0.0)?;
                (PhaseNoise::Link(link), Some(x), Some(0.0))
            }
            Axis::Distance(_) => {
                let link = self.link.with_fiber_length(noise::km_to_m(x))?;
                (PhaseNoise::Link(link), Some(self.link.delta_f_lo()), Some(x))
            }
        })
    }

    /// Expands the sweep into scenarios in output order.
    pub fn scenarios(&self) -> Result<Vec<(Point, Scenario)>> {
        self.validate()?;
        let mut out = Vec::new();
        for &alg in &self.algorithms {
            let blocks: Vec<Option<usize>> = if alg.uses_block_length() {
                self.block_lengths.iter().map(|&n| Some(n)).collect()
            } else {
                vec![None]
            };
            for &order in &self.orders {
                for &block in &blocks {
                    for &x in self.axis.values() {
                        let (noise, linewidth_hz, distance_km) = self.noise_at(x)?;
                        let mu = match self.mu {
                            MuChoice::Fixed(mu) => mu,
                            MuChoice::Optimized => 1.0,
                        };
                        let cpr = CprConfig::for_kind(alg, mu, block.unwrap_or(1))?
                            .with_estimator(self.estimator)
                            .with_unwrap(self.unwrap);
                        let point = Point {
                            algorithm: alg,
                            order,
                            block_length: block,
                            sigma2: noise.total_variance(),
                            linewidth_hz,
                            distance_km,
                        };
                        out.push((point, Scenario { order, cpr, noise }));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Evaluates every point of a sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<FloorResult>> {
    let scenarios = spec.scenarios()?;
    let mut results = Vec::with_capacity(scenarios.len());
    for (index, (point, mut scenario)) in scenarios.into_iter().enumerate() {
        let index = index as u64;
        if !spec.mode.includes_mc() {
            let mu = match (point.algorithm, spec.mu) {
                (AlgorithmKind::Nlms, MuChoice::Fixed(mu)) => Some(mu),
                _ => None,
            };
            results.push(FloorResult {
                point,
                mu,
                analytic_floor: scenario.analytic_floor()?,
                measured: None,
                seed: spec.mc.base_seed,
                elapsed: Duration::ZERO,
            });
            continue;
        }
        if point.algorithm == AlgorithmKind::Nlms && spec.mu == MuChoice::Optimized {
            let probe = MuProbe {
                seed: seed::derive(spec.mc.base_seed, index, u64::MAX),
                ..spec.probe
            };
            let mu = cpr::optimize_mu(point.order, point.sigma2, &cpr::default_mu_grid(), &probe)?;
            scenario.cpr = CprConfig::nlms(mu)?.with_training(scenario.cpr.training_symbols);
        }
        results.push(measure_point(&scenario, &spec.mc, point, index)?);
    }
    Ok(results)
}

/// Names and one-line descriptions of the built-in sweeps.
pub const PRESETS: [(&str, &str); 16] = [
    ("fig5", "NLMS floor vs phase-noise variance, n = 4, 8, 16, 32"),
    ("fig6", "NLMS floor vs laser linewidth, back-to-back"),
    ("fig7", "NLMS floor vs distance, 1 MHz lasers"),
    ("fig8a", "BWA floor vs phase-noise variance, 8-PSK, N = 5, 11, 17, 23"),
    ("fig8b", "BWA floor vs phase-noise variance, N = 11, n = 4, 8, 16, 32"),
    ("fig9", "BWA floor vs laser linewidth, N = 11, back-to-back"),
    ("fig10", "BWA floor vs distance, N = 11, 1 MHz lasers"),
    ("fig11a", "VV floor vs phase-noise variance, 8-PSK, N = 5, 11, 17, 23"),
    ("fig11b", "VV floor vs phase-noise variance, N = 11, n = 4, 8, 16, 32"),
    ("fig12", "VV floor vs laser linewidth, N = 11, back-to-back"),
    ("fig13", "VV floor vs distance, N = 11, 1 MHz lasers"),
    ("fig14a", "NLMS, BWA and VV vs phase-noise variance, 8-PSK, N = 5"),
    ("fig14b", "NLMS, BWA and VV vs phase-noise variance, 8-PSK, N = 11"),
    ("fig14c", "NLMS, BWA and VV vs phase-noise variance, 8-PSK, N = 17"),
    (
        "fig15",
        "NLMS, BWA and VV vs phase-noise variance, N = 11, n = 4, 8, 16, 32",
    ),
    (
        "fig16",
        "NLMS, BWA and VV vs distance, N = 11, n = 4, 8, 16, 32, 1 MHz lasers",
    ),
];

/// σ² from 0.0025 to 0.3 rad² in steps of 0.0025.
pub fn variance_grid() -> Vec<f64> {
    (1..=120).map(|k| 0.0025 * k as f64).collect()
}

/// Linewidth from 0.1 to 10 MHz in steps of 0.1 MHz.
pub fn linewidth_grid() -> Vec<f64> {
    (1..=100).map(|k| 1e5 * k as f64).collect()
}

/// Distance from 0 to 5000 km in steps of 100 km.
pub fn distance_grid() -> Vec<f64> {
    (0..=50).map(|k| 100.0 * k as f64).collect()
}

/// Builds a named preset sweep.
pub fn preset(name: &str) -> Result<SweepSpec> {
    use AlgorithmKind::{Bwa, Nlms, Vv};
    let orders = vec![4, 8, 16, 32];
    let spec = |algs: Vec<AlgorithmKind>, orders: Vec<usize>, blocks: Vec<usize>, axis: Axis| {
        SweepSpec::new(name, algs, orders, blocks, axis)
    };
    let sweep_blocks = vec![5, 11, 17, 23];
    Ok(match name {
        "fig5" => spec(vec![Nlms], orders, vec![], Axis::Variance(variance_grid())),
        "fig6" => spec(vec![Nlms], orders, vec![], Axis::Linewidth(linewidth_grid())),
        "fig7" => spec(vec![Nlms], orders, vec![], Axis::Distance(distance_grid())),
        "fig8a" => spec(vec![Bwa], vec![8], sweep_blocks, Axis::Variance(variance_grid())),
        "fig8b" => spec(vec![Bwa], orders, vec![11], Axis::Variance(variance_grid())),
        "fig9" => spec(vec![Bwa], orders, vec![11], Axis::Linewidth(linewidth_grid())),
        "fig10" => spec(vec![Bwa], orders, vec![11], Axis::Distance(distance_grid())),
        "fig11a" => spec(vec![Vv], vec![8], sweep_blocks, Axis::Variance(variance_grid())),
        "fig11b" => spec(vec![Vv], orders, vec![11], Axis::Variance(variance_grid())),
        "fig12" => spec(vec![Vv], orders, vec![11], Axis::Linewidth(linewidth_grid())),
        "fig13" => spec(vec![Vv], orders, vec![11], Axis::Distance(distance_grid())),
        "fig14a" => spec(vec![Nlms, Bwa, Vv], vec![8], vec![5], Axis::Variance(variance_grid())),
        "fig14b" => spec(vec![Nlms, Bwa, Vv], vec![8], vec![11], Axis::Variance(variance_grid())),
        "fig14c" => spec(vec![Nlms, Bwa, Vv], vec![8], vec![17], Axis::Variance(variance_grid())),
        "fig15" => spec(vec![Nlms, Bwa, Vv], orders, vec![11], Axis::Variance(variance_grid())),
        "fig16" => spec(vec![Nlms, Bwa, Vv], orders, vec![11], Axis::Distance(distance_grid())),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                known: PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
            })
        }
    })
}
