//! Gray-coded n-PSK modulation, hard decisions and error counting.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Range};

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::noise::PhaseTrack;

/// Modulation orders covered by the toolkit.
pub const SUPPORTED_ORDERS: [usize; 4] = [4, 8, 16, 32];

/// Binary-reflected Gray code of `m`.
pub fn gray_encode(m: u32) -> u32 {
    m ^ (m >> 1)
}

/// Unit-circle n-PSK alphabet with zero phase offset and Gray labels.
///
/// Point `m` sits at angle 2πm/n and carries label `gray_encode(m)`, so
/// neighbouring points differ in exactly one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: u32,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    index_of_label: Vec<usize>,
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return Err(invalid(format!(
                "modulation order must be one of {SUPPORTED_ORDERS:?}, got {order}"
            )));
        }
        let bits_per_symbol = order.trailing_zeros();
        let points = (0..order)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / order as f64))
            .collect();
        let labels: Vec<u32> = (0..order as u32).map(gray_encode).collect();
        let mut index_of_label = vec![0; order];
        for (m, &l) in labels.iter().enumerate() {
            index_of_label[l as usize] = m;
        }
        Ok(Self {
            order,
            bits_per_symbol,
            points,
            labels,
            index_of_label,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn index_of_label(&self, label: u32) -> usize {
        self.index_of_label[label as usize]
    }

    /// Angular spacing 2π/n, also the n-fold phase ambiguity.
    pub fn phase_step(&self) -> f64 {
        2.0 * PI / self.order as f64
    }

    /// Nearest point to a sample of the given angle (rad). Ties go to the
    /// lower index.
    pub fn decide_angle(&self, angle: f64) -> usize {
        let n = self.order as f64;
        let x = angle * n / (2.0 * PI);
        // truncating cast, corrected for negatives; avoids a libm call
        let t = x as i64 as f64;
        let floor = if t > x { t - 1.0 } else { t };
        let frac = x - floor;
        let lo = (floor as i64).rem_euclid(self.order as i64) as usize;
        let hi = (lo + 1) % self.order;
        if (frac - 0.5).abs() <= 1e-12 {
            lo.min(hi)
        } else if frac < 0.5 {
            lo
        } else {
            hi
        }
    }
}

/// Whether symbol indices carry data directly or in their increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coding {
    Absolute,
    Differential,
}

/// Transmitted and received symbols with the genie carrier phase attached.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub tx_indices: Vec<usize>,
    pub tx_symbols: Vec<Complex64>,
    pub rx_symbols: Vec<Complex64>,
    pub true_phase: PhaseTrack,
    pub bits: Vec<u8>,
    pub coding: Coding,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.tx_symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx_symbols.is_empty()
    }
}

/// Maps bits (MSB first within each symbol) to a frame. The received side
/// starts as a copy of the transmitted side with a zero phase track.
pub fn modulate(bits: &[u8], constellation: &Constellation, coding: Coding) -> Result<SymbolFrame> {
    let k = constellation.bits_per_symbol() as usize;
    if !bits.len().is_multiple_of(k) {
        return Err(invalid(format!(
            "bit length {} is not a multiple of {k} bits per symbol",
            bits.len()
        )));
    }
    if let Some(pos) = bits.iter().position(|&b| b > 1) {
        return Err(invalid(format!("bit {pos} is not 0 or 1")));
    }
    let n = constellation.order();
    let mut tx_indices = Vec::with_capacity(bits.len() / k);
    let mut state = 0usize;
    for chunk in bits.chunks_exact(k) {
        let label = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        let data = constellation.index_of_label(label);
        let index = match coding {
            Coding::Absolute => data,
            Coding::Differential => {
                state = (state + data) % n;
                state
            }
        };
        tx_indices.push(index);
    }
    let tx_symbols: Vec<Complex64> = tx_indices.iter().map(|&i| constellation.point(i)).collect();
    Ok(SymbolFrame {
        rx_symbols: tx_symbols.clone(),
        true_phase: PhaseTrack::zeros(tx_indices.len()),
        tx_indices,
        tx_symbols,
        bits: bits.to_vec(),
        coding,
    })
}

/// Uniform random bits, seed-deterministic.
pub fn random_bits(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(len);
    while bits.len() < len {
        let word = rng.next_u64();
        let take = (len - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    bits
}

/// A frame of `symbols` uniformly random symbols.
pub fn random_frame(symbols: usize, constellation: &Constellation, coding: Coding, seed: u64) -> Result<SymbolFrame> {
    let bits = random_bits(symbols * constellation.bits_per_symbol() as usize, seed);
    modulate(&bits, constellation, coding)
}

fn data_index(decisions: &[usize], k: usize, n: usize, coding: Coding) -> usize {
    match coding {
        Coding::Absolute => decisions[k],
        Coding::Differential => {
            let prev = if k == 0 { 0 } else { decisions[k - 1] };
            (decisions[k] + n - prev) % n
        }
    }
}

/// Recovers bits from decided point indices.
pub fn demodulate(decisions: &[usize], constellation: &Constellation, coding: Coding) -> Vec<u8> {
    let k = constellation.bits_per_symbol();
    let n = constellation.order();
    let mut bits = Vec::with_capacity(decisions.len() * k as usize);
    for s in 0..decisions.len() {
        let label = constellation.label(data_index(decisions, s, n, coding));
        bits.extend((0..k).rev().map(|b| ((label >> b) & 1) as u8));
    }
    bits
}

/// Index of the point with the smallest angular distance to `sample`.
pub fn hard_decide(sample: Complex64, constellation: &Constellation) -> Result<usize> {
    if sample.norm_sqr() == 0.0 {
        return Err(invalid("cannot decide on a zero-magnitude sample"));
    }
    Ok(constellation.decide_angle(sample.arg()))
}

/// Symbol and bit error tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub symbols: u64,
    pub symbol_errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
}

impl ErrorCounts {
    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.symbol_errors as f64 / self.symbols as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

impl Add for ErrorCounts {
    type Output = ErrorCounts;

    fn add(self, rhs: ErrorCounts) -> ErrorCounts {
        ErrorCounts {
            symbols: self.symbols + rhs.symbols,
            symbol_errors: self.symbol_errors + rhs.symbol_errors,
            bits: self.bits + rhs.bits,
            bit_errors: self.bit_errors + rhs.bit_errors,
        }
    }
}

impl AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: ErrorCounts) {
        *self = *self + rhs;
    }
}

/// Counts errors over the whole frame.
pub fn count_errors(frame: &SymbolFrame, decisions: &[usize], constellation: &Constellation) -> Result<ErrorCounts> {
    count_errors_in(frame, decisions, constellation, 0..frame.len())
}

/// Counts errors over the symbols in `range`. Bit errors compare Gray labels
/// of the data symbols, so multi-step slips count every flipped bit.
pub fn count_errors_in(
    frame: &SymbolFrame,
    decisions: &[usize],
    constellation: &Constellation,
    range: Range<usize>,
) -> Result<ErrorCounts> {
    if decisions.len() != frame.len() {
        return Err(Error::LengthMismatch {
            expected: frame.len(),
            actual: decisions.len(),
        });
    }
    if range.end > frame.len() || range.start > range.end {
        return Err(invalid(format!(
            "count range {range:?} outside frame of length {}",
            frame.len()
        )));
    }
    let n = constellation.order();
    let mut counts = ErrorCounts::default();
    for k in range {
        let sent = data_index(&frame.tx_indices, k, n, frame.coding);
        let got = data_index(decisions, k, n, frame.coding);
        counts.symbols += 1;
        if sent != got {
            counts.symbol_errors += 1;
            counts.bit_errors += (constellation.label(sent) ^ constellation.label(got)).count_ones() as u64;
        }
    }
    counts.bits = counts.symbols * constellation.bits_per_symbol() as u64;
    Ok(counts)
}
