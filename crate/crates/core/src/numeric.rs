//! Float helpers shared across modules.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

/// `num / 2^log2_den` as an `f64`, for numerators far beyond the `f64` range.
///
/// `log2_den` is the base-2 logarithm of the (positive) denominator.
pub fn scaled_to_f64(num: &BigInt, log2_den: f64) -> f64 {
    let bits = num.bits();
    if bits <= 960 && log2_den < 960.0 {
        return num.to_f64().unwrap() / log2_den.exp2();
    }
    let shift = bits.saturating_sub(64);
    let mant = (num.abs() >> shift).to_f64().unwrap();
    let v = mant * (shift as f64 - log2_den).exp2();
    if num.is_negative() {
        -v
    } else {
        v
    }
}

/// `num / n^h` as an `f64`; direct division when everything fits a double.
pub fn normalize(num: &BigInt, n: u64, h: f64) -> f64 {
    let log2_den = h * (n as f64).log2();
    if num.bits() <= 960 && log2_den < 960.0 {
        num.to_f64().unwrap() / (n as f64).powf(h)
    } else {
        scaled_to_f64(num, log2_den)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
