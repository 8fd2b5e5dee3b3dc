//! Budget caps for every search the underlying constructions leave unbounded.
//!
//! The existence results behind the pipelines give no effective bounds, so
//! each scan (find n, find m, find g, expand a ball) runs against a cap and
//! fails with [`BudgetExceeded`] instead of diverging.

use crate::ratio::Rational;
use num::ToPrimitive;

/// Raised when a search or enumeration hits its configured cap.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("budget exceeded: {0}")]
pub struct BudgetExceeded(pub String);

pub fn exceeded(what: impl Into<String>) -> BudgetExceeded {
    BudgetExceeded(what.into())
}

/// Checks `needed <= cap`, reporting both numbers on failure.
pub fn check(what: &str, needed: u128, cap: u128) -> Result<(), BudgetExceeded> {
    if needed > cap {
        Err(BudgetExceeded(format!("{what}: needs {needed}, cap {cap}")))
    } else {
        Ok(())
    }
}

/// All caps used across the crate. Defaults are generous for desk scale.
#[derive(Debug, Clone)]
pub struct Budget {
    /// Largest finite carrier (including tensor-power carriers and 2^n models).
    pub max_carrier: usize,
    /// Cap on the number of reduced words an enumeration may produce.
    pub max_words: usize,
    /// Largest |position| a subshift point may be expanded to.
    pub max_window: usize,
    /// Cap on the size of a computed language fragment.
    pub max_language: usize,
    /// Largest repetitivity window the certified search will try.
    pub max_repetitivity: usize,
    /// Cap on scan lengths (modulus scans, moved-point scans, witness scans).
    pub max_scan: usize,
    /// Largest Schreier ball, in vertices.
    pub max_vertices: u64,
    /// Longest word the displacing-element search will try.
    pub max_word_len: usize,
    /// Sample count for randomized verification modes.
    pub max_samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_carrier: 1 << 22,
            max_words: 200_000,
            max_window: 1 << 20,
            max_language: 200_000,
            max_repetitivity: 64,
            max_scan: 1 << 20,
            max_vertices: 1 << 27,
            max_word_len: 16,
            max_samples: 512,
        }
    }
}

impl Budget {
    /// Uniformly rescales all caps by a positive rational factor.
    /// Every cap stays at least 1.
    pub fn scaled(&self, factor: &Rational) -> Budget {
        fn scale_usize(v: usize, f: &Rational) -> usize {
            let scaled = Rational::from_integer(v.into()) * f;
            scaled.floor().to_integer().to_usize().unwrap_or(usize::MAX).max(1)
        }
        fn scale_u64(v: u64, f: &Rational) -> u64 {
            let scaled = Rational::from_integer(v.into()) * f;
            scaled.floor().to_integer().to_u64().unwrap_or(u64::MAX).max(1)
        }
        Budget {
            max_carrier: scale_usize(self.max_carrier, factor),
            max_words: scale_usize(self.max_words, factor),
            max_window: scale_usize(self.max_window, factor),
            max_language: scale_usize(self.max_language, factor),
            max_repetitivity: scale_usize(self.max_repetitivity, factor),
            max_scan: scale_usize(self.max_scan, factor),
            max_vertices: scale_u64(self.max_vertices, factor),
            max_word_len: scale_usize(self.max_word_len, factor),
            max_samples: scale_usize(self.max_samples, factor),
        }
    }
}
