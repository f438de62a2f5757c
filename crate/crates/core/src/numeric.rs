//! Signed log-domain scalars.
//!
//! Partition functions of strongly coupled models span hundreds of orders of
//! magnitude, and loop-series corrections can be negative, so every estimate
//! is carried as a sign together with the log of its magnitude.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg};

/// A real number stored as `sign * exp(log_abs)`.
///
/// Zero is represented as `sign == 0` with `log_abs == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        log_abs: 0.0,
    };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    /// Positive value from its logarithm.
    pub fn from_ln(log_abs: f64) -> Self {
        Self::new(1, log_abs)
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.log_abs)
    }

    /// Natural log of the value, defined only for positive values.
    pub fn ln(self) -> Option<f64> {
        (self.sign > 0).then_some(self.log_abs)
    }

    /// Orders by absolute magnitude, zero smallest.
    pub fn cmp_magnitude(&self, other: &SignedLog) -> Ordering {
        self.log_abs.total_cmp(&other.log_abs)
    }
}

impl Default for SignedLog {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Add for SignedLog {
    type Output = SignedLog;

        /// Sum of two signed values, computed without leaving log space.
        fn add(self, other: SignedLog) -> SignedLog {
            if self.is_zero() {
                return other;
            }
            if other.is_zero() {
                return self;
            }
            let (big, small) = if self.log_abs >= other.log_abs {
                (self, other)
            } else {
                (other, self)
            };
            let ratio = (small.log_abs - big.log_abs).exp();
            if big.sign == small.sign {
                SignedLog::new(big.sign, big.log_abs + ratio.ln_1p())
            } else if ratio >= 1.0 {
                SignedLog::ZERO
            } else {
                SignedLog::new(big.sign, big.log_abs + (-ratio).ln_1p())
            }
        }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        SignedLog::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;

    fn neg(self) -> SignedLog {
        SignedLog::new(-self.sign, self.log_abs)
    }
}

impl std::iter::Sum for SignedLog {
    fn sum<I: Iterator<Item = SignedLog>>(iter: I) -> SignedLog {
        iter.fold(SignedLog::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            1 => '+',
            -1 => '-',
            _ => '0',
        };
        write!(f, "{s}exp({})", self.log_abs)
    }
}

/// `ln(sum(exp(x)))` over a slice, robust to `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl LogAccumulator {
    pub fn new() -> Self {
        LogAccumulator {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}
