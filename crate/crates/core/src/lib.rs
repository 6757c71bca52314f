//! Carrier phase recovery for n-PSK coherent optical links.
//!
//! The crate is organised along the receiver chain:
//!
//! * [`noise`]: laser and equalization-enhanced phase noise variance models
//!   and a Wiener phase generator.
//! * [`modem`]: Gray-coded n-PSK mapping, hard decisions and error counting.
//! * [`channel`]: chromatic dispersion, phase rotation, AWGN and the EEPN
//!   signal path.
//! * [`cpr`]: one-tap normalized LMS, block-wise average and Viterbi-Viterbi
//!   carrier phase recovery.
//! * [`analytics`]: closed-form BER floors, coding rate, spectral efficiency
//!   and complexity counts.
//! * [`experiments`]: Monte-Carlo floor measurement and figure sweep presets.
//! * [`cli`]: the `cprlab` command-line front end.

pub mod analytics;
pub mod channel;
pub mod cli;
pub mod cpr;
mod error;
pub mod experiments;
pub mod modem;
pub mod noise;
pub(crate) mod seed;

pub use error::{Error, Result};

use std::fmt;
use std::str::FromStr;

/// Carrier phase recovery algorithm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    /// One-tap normalized LMS (decision-directed feedback).
    Nlms,
    /// Block-wise average n-th power estimator.
    Bwa,
    /// Viterbi-Viterbi sliding-window n-th power estimator.
    Vv,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [AlgorithmKind::Nlms, AlgorithmKind::Bwa, AlgorithmKind::Vv];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Nlms => "nlms",
            AlgorithmKind::Bwa => "bwa",
            AlgorithmKind::Vv => "vv",
        }
    }

    /// Whether the algorithm is parameterised by a block length.
    pub fn uses_block_length(self) -> bool {
        !matches!(self, AlgorithmKind::Nlms)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nlms" | "lms" => Ok(AlgorithmKind::Nlms),
            "bwa" => Ok(AlgorithmKind::Bwa),
            "vv" | "viterbi-viterbi" => Ok(AlgorithmKind::Vv),
            other => Err(error::invalid(format!(
                "unknown algorithm `{other}` (expected nlms, bwa or vv)"
            ))),
        }
    }
}
