//! Phase noise variance models and Wiener phase generation.
//!
//! All quantities are held in SI units. Engineering units (MHz, nm,
//! ps/nm/km, km) are converted once, at construction.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// ps/(nm km) to s/m².
pub fn ps_per_nm_km_to_si(d: f64) -> f64 {
    d / 1e6
}

/// s/m² to ps/(nm km).
pub fn si_to_ps_per_nm_km(d: f64) -> f64 {
    d * 1e6
}

pub fn km_to_m(km: f64) -> f64 {
    km * 1e3
}

pub fn m_to_km(m: f64) -> f64 {
    m / 1e3
}

pub fn nm_to_m(nm: f64) -> f64 {
    nm / 1e9
}

/// Physical description of a coherent link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    delta_f_tx: f64,
    delta_f_lo: f64,
    symbol_rate: f64,
    wavelength: f64,
    dispersion: f64,
    fiber_length: f64,
}

impl LinkParams {
    /// Builds a link from SI values: linewidths in Hz, symbol rate in baud,
    /// wavelength in m, dispersion in s/m², fiber length in m.
    pub fn new(
        delta_f_tx: f64,
        delta_f_lo: f64,
        symbol_rate: f64,
        wavelength: f64,
        dispersion: f64,
        fiber_length: f64,
    ) -> Result<Self> {
        let nonneg = |v: f64, name: &str| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        let positive = |v: f64, name: &str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        nonneg(delta_f_tx, "tx linewidth")?;
        nonneg(delta_f_lo, "LO linewidth")?;
        positive(symbol_rate, "symbol rate")?;
        positive(wavelength, "wavelength")?;
        nonneg(dispersion, "dispersion")?;
        nonneg(fiber_length, "fiber length")?;
        Ok(Self {
            delta_f_tx,
            delta_f_lo,
            symbol_rate,
            wavelength,
            dispersion,
            fiber_length,
        })
    }

    /// Builds a link from engineering units: linewidths in Hz, symbol rate
    /// in baud, wavelength in nm, dispersion in ps/nm/km, length in km.
    pub fn from_engineering(
        delta_f_tx_hz: f64,
        delta_f_lo_hz: f64,
        symbol_rate_baud: f64,
        wavelength_nm: f64,
        dispersion_ps_nm_km: f64,
        length_km: f64,
    ) -> Result<Self> {
        Self::new(
            delta_f_tx_hz,
            delta_f_lo_hz,
            symbol_rate_baud,
            nm_to_m(wavelength_nm),
            ps_per_nm_km_to_si(dispersion_ps_nm_km),
            km_to_m(length_km),
        )
    }

    /// Standard single-mode fiber at 1550 nm (17 ps/nm/km), 32 GBd,
    /// 1 MHz lasers, zero length.
    pub fn ssmf_32gbd() -> Self {
        Self::from_engineering(1e6, 1e6, 32e9, 1550.0, 17.0, 0.0).expect("valid constants")
    }

    pub fn with_linewidths(self, tx_hz: f64, lo_hz: f64) -> Result<Self> {
        Self::new(
            tx_hz,
            lo_hz,
            self.symbol_rate,
            self.wavelength,
            self.dispersion,
            self.fiber_length,
        )
    }

    pub fn with_fiber_length(self, meters: f64) -> Result<Self> {
        Self::new(
            self.delta_f_tx,
            self.delta_f_lo,
            self.symbol_rate,
            self.wavelength,
            self.dispersion,
            meters,
        )
    }

    pub fn delta_f_tx(&self) -> f64 {
        self.delta_f_tx
    }

    pub fn delta_f_lo(&self) -> f64 {
        self.delta_f_lo
    }

    pub fn symbol_rate(&self) -> f64 {
        self.symbol_rate
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.symbol_rate
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Dispersion coefficient in s/m².
    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    /// Fiber length in m.
    pub fn fiber_length(&self) -> f64 {
        self.fiber_length
    }
}

impl Default for LinkParams {
    fn default() -> Self {
        Self::ssmf_32gbd()
    }
}

/// Per-symbol phase variance of the Tx and LO lasers: 2π(Δf_Tx + Δf_LO)·T_S.
pub fn laser_pn_variance(link: &LinkParams) -> f64 {
    2.0 * PI * (link.delta_f_tx + link.delta_f_lo) * link.symbol_period()
}

/// Equalization-enhanced phase noise variance: πλ²·D·L·Δf_LO / (2c·T_S).
pub fn eepn_variance(link: &LinkParams) -> f64 {
    PI * link.wavelength * link.wavelength * link.dispersion * link.fiber_length * link.delta_f_lo
        / (2.0 * SPEED_OF_LIGHT * link.symbol_period())
}

/// Total (effective) phase noise variance.
pub fn total_variance(link: &LinkParams) -> f64 {
    laser_pn_variance(link) + eepn_variance(link)
}

/// Linewidth whose pure laser phase noise would produce [`total_variance`].
pub fn effective_linewidth(link: &LinkParams) -> f64 {
    total_variance(link) / (2.0 * PI * link.symbol_period())
}

/// Fiber length at which EEPN equals laser phase noise for equal Tx and LO
/// linewidths: 8c·T_S² / (λ²·D).
pub fn crossover_distance(link: &LinkParams) -> Result<f64> {
    if link.dispersion == 0.0 {
        return Err(Error::NoCrossover);
    }
    let ts = link.symbol_period();
    Ok(8.0 * SPEED_OF_LIGHT * ts * ts / (link.wavelength * link.wavelength * link.dispersion))
}

/// A realisation of the cumulative carrier phase, one value per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrack {
    pub phases: Vec<f64>,
    pub increment_variance: f64,
    pub seed: u64,
}

impl PhaseTrack {
    pub fn zeros(len: usize) -> Self {
        Self::constant(len, 0.0)
    }

    pub fn constant(len: usize, phase: f64) -> Self {
        Self {
            phases: vec![phase; len],
            increment_variance: 0.0,
            seed: 0,
        }
    }

    pub fn from_phases(phases: Vec<f64>) -> Self {
        Self {
            phases,
            increment_variance: 0.0,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            phases: self.phases.iter().map(|p| -p).collect(),
            ..self.clone()
        }
    }

    /// Sample-wise sum of two independent tracks.
    pub fn combined(&self, other: &PhaseTrack) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self {
            phases: self.phases.iter().zip(&other.phases).map(|(a, b)| a + b).collect(),
            increment_variance: self.increment_variance + other.increment_variance,
            seed: self.seed,
        })
    }
}

/// Discrete Wiener phase: `phases[0] = 0`, then i.i.d. Gaussian increments
/// of the given variance.
pub fn generate_wiener_phase(n_symbols: usize, increment_variance: f64, seed: u64) -> Result<PhaseTrack> {
    if n_symbols == 0 {
        return Err(invalid("phase track needs at least one symbol"));
    }
    if !(increment_variance.is_finite() && increment_variance >= 0.0) {
        return Err(invalid(format!(
            "increment variance must be finite and >= 0, got {increment_variance}"
        )));
    }
    let sigma = increment_variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases = Vec::with_capacity(n_symbols);
    let mut phi = 0.0;
    phases.push(phi);
    for _ in 1..n_symbols {
        let g: f64 = StandardNormal.sample(&mut rng);
        phi += sigma * g;
        phases.push(phi);
    }
    Ok(PhaseTrack {
        phases,
        increment_variance,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn long_haul() -> LinkParams {
        LinkParams::from_engineering(1e6, 1e6, 32e9, 1550.0, 17.0, 1000.0).unwrap()
    }

    #[test]
    fn zero_linewidth_has_no_laser_noise() {
        let link = LinkParams::ssmf_32gbd().with_linewidths(0.0, 0.0).unwrap();
        assert_eq!(laser_pn_variance(&link), 0.0);
    }

    #[test]
    fn laser_variance_hand_value() {
        // 2π·2e6/32e9
        let v = laser_pn_variance(&LinkParams::ssmf_32gbd());
        assert!(rel(v, 3.926_990_816_987_241_5e-4) < 1e-14, "{v}");
    }

    #[test]
    fn laser_variance_halves_with_doubled_rate() {
        let a = LinkParams::ssmf_32gbd();
        let b = LinkParams::from_engineering(1e6, 1e6, 64e9, 1550.0, 17.0, 0.0).unwrap();
        assert!(rel(laser_pn_variance(&b), laser_pn_variance(&a) / 2.0) < 1e-15);
    }

    #[test]
    fn eepn_reference_values() {
        let link = long_haul();
        // independent mpmath evaluation with explicit unit tracking
        assert!(rel(eepn_variance(&link), 6.847_964_024_724_925e-3) < 1e-13);
        assert!(rel(total_variance(&link), 7.240_663_106_423_649e-3) < 1e-13);
        assert!(rel(effective_linewidth(&link), 3.687_639_438_881_414e7) < 1e-13);

        assert_eq!(eepn_variance(&LinkParams::ssmf_32gbd()), 0.0);
        let other_tx = link.with_linewidths(5e6, 1e6).unwrap();
        assert_eq!(eepn_variance(&other_tx), eepn_variance(&link));
    }

    #[test]
    fn total_is_additive() {
        let b2b = LinkParams::ssmf_32gbd();
        assert_eq!(total_variance(&b2b), laser_pn_variance(&b2b));
        let link = long_haul();
        assert_eq!(total_variance(&link), laser_pn_variance(&link) + eepn_variance(&link));
    }

    #[test]
    fn effective_linewidth_back_to_back() {
        let link = LinkParams::ssmf_32gbd().with_linewidths(3e6, 3e6).unwrap();
        assert!(rel(effective_linewidth(&link), 6e6) < 1e-14);
    }

    #[test]
    fn crossover_matches_formula() {
        let link = LinkParams::ssmf_32gbd();
        let l0 = crossover_distance(&link).unwrap();
        assert!(rel(l0, 57_345.377_440_778_6) < 1e-12, "{l0}");

        let slow = LinkParams::from_engineering(1e6, 1e6, 16e9, 1550.0, 17.0, 0.0).unwrap();
        assert!(rel(crossover_distance(&slow).unwrap(), 4.0 * l0) < 1e-14);

        let at = link.with_fiber_length(l0).unwrap();
        let gap = (laser_pn_variance(&at) - eepn_variance(&at)).abs() / total_variance(&at);
        assert!(gap < 1e-12, "{gap}");
    }

    #[test]
    fn crossover_needs_dispersion() {
        let link = LinkParams::from_engineering(1e6, 1e6, 32e9, 1550.0, 0.0, 100.0).unwrap();
        assert!(matches!(crossover_distance(&link), Err(Error::NoCrossover)));
    }

    #[test]
    fn rejects_invalid_links() {
        assert!(LinkParams::new(-1.0, 0.0, 1e9, 1e-6, 0.0, 0.0).is_err());
        assert!(LinkParams::new(0.0, 0.0, 0.0, 1e-6, 0.0, 0.0).is_err());
        assert!(LinkParams::new(0.0, 0.0, 1e9, 0.0, 0.0, 0.0).is_err());
        assert!(LinkParams::new(0.0, 0.0, 1e9, 1e-6, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn wiener_zero_variance_is_constant() {
        let t = generate_wiener_phase(1000, 0.0, 3).unwrap();
        assert!(t.phases.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn wiener_is_seed_deterministic() {
        let a = generate_wiener_phase(4096, 1e-3, 11).unwrap();
        let b = generate_wiener_phase(4096, 1e-3, 11).unwrap();
        let c = generate_wiener_phase(4096, 1e-3, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.phases, c.phases);
    }

    #[test]
    fn wiener_rejects_bad_input() {
        assert!(generate_wiener_phase(0, 1e-3, 0).is_err());
        assert!(generate_wiener_phase(10, -1e-3, 0).is_err());
    }

    #[test]
    fn wiener_increment_variance_chi_square() {
        let n = 1_000_000;
        let var = 1e-4;
        let t = generate_wiener_phase(n, var, 2024).unwrap();
        let inc: Vec<f64> = t.phases.windows(2).map(|w| w[1] - w[0]).collect();
        let m = inc.len() as f64;
        let mean = inc.iter().sum::<f64>() / m;
        let s2 = inc.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (m - 1.0);
        // sample variance of Gaussian data: std = var·sqrt(2/(m-1))
        let sd = var * (2.0 / (m - 1.0)).sqrt();
        assert!((s2 - var).abs() < 3.0 * sd, "s2={s2} sd={sd}");
    }

    #[test]
    fn wiener_multi_step_variance_grows_linearly() {
        let realizations = 10_000;
        let var = 2e-3;
        for &m in &[1usize, 4, 16] {
            let diffs: Vec<f64> = (0..realizations)
                .map(|r| {
                    let t = generate_wiener_phase(40, var, 1_000 + r as u64).unwrap();
                    t.phases[20 + m] - t.phases[20]
                })
                .collect();
            let k = diffs.len() as f64;
            let s2 = diffs.iter().map(|d| d * d).sum::<f64>() / k;
            let expected = m as f64 * var;
            let se = expected * (2.0 / k).sqrt();
            assert!((s2 - expected).abs() < 5.0 * se, "m={m} s2={s2} expected={expected}");
        }
    }

    proptest! {
        #[test]
        fn unit_conversions_round_trip(d in 0.0f64..1e3, km in 0.0f64..1e5) {
            let back = si_to_ps_per_nm_km(ps_per_nm_km_to_si(d));
            prop_assert!((back - d).abs() <= f64::EPSILON * d);
            let back = m_to_km(km_to_m(km));
            prop_assert!((back - km).abs() <= f64::EPSILON * km);
        }

        #[test]
        fn effective_linewidth_round_trip(
            tx in 0.0f64..1e7, lo in 0.0f64..1e7, rate in 1e9f64..1e11, km in 0.0f64..1e4
        ) {
            let link = LinkParams::from_engineering(tx, lo, rate, 1550.0, 17.0, km).unwrap();
            let sigma2 = total_variance(&link);
            let back = 2.0 * PI * effective_linewidth(&link) * link.symbol_period();
            prop_assert!((back - sigma2).abs() <= 4.0 * f64::EPSILON * sigma2.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn monotone_in_link_parameters(
            rate in 1e9f64..1e11, km in 1.0f64..1e4, d in 1.0f64..30.0, lo in 1e3f64..1e7
        ) {
            let link = LinkParams::from_engineering(lo, lo, rate, 1550.0, d, km).unwrap();
            let faster = LinkParams::from_engineering(lo, lo, rate * 1.5, 1550.0, d, km).unwrap();
            prop_assert!(laser_pn_variance(&faster) < laser_pn_variance(&link));
            prop_assert!(eepn_variance(&faster) > eepn_variance(&link));
            let longer = LinkParams::from_engineering(lo, lo, rate, 1550.0, d, km * 1.5).unwrap();
            prop_assert!(eepn_variance(&longer) > eepn_variance(&link));
            let more_d = LinkParams::from_engineering(lo, lo, rate, 1550.0, d * 1.5, km).unwrap();
            prop_assert!(eepn_variance(&more_d) > eepn_variance(&link));
            let wider = LinkParams::from_engineering(lo, lo * 1.5, rate, 1550.0, d, km).unwrap();
            prop_assert!(eepn_variance(&wider) > eepn_variance(&link));
        }
    }
}
