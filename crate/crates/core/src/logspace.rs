//! Signed log-magnitude scalars and log-domain reductions.

use std::fmt;
use std::ops::{Mul, Neg};

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Zero is represented as `sign == 0` with `ln_abs == -inf`; whenever the sign
/// is nonzero the log-magnitude is finite.
#[derive(Clone, Copy, PartialEq)]
pub struct SignedLog {
    sign: i8,
    ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        ln_abs: 0.0,
    };

    /// Builds a value from its parts. Returns `None` when the parts violate the
    /// representation invariant (nonzero sign with non-finite magnitude, or a
    /// sign outside `{-1, 0, 1}`).
    pub fn from_parts(sign: i8, ln_abs: f64) -> Option<Self> {
        match sign {
            0 => Some(Self::ZERO),
            -1 | 1 if ln_abs.is_finite() => Some(SignedLog { sign, ln_abs }),
            _ => None,
        }
    }

    /// Positive value with the given log-magnitude; `-inf` maps to zero.
    pub fn from_ln(ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            debug_assert!(ln_abs.is_finite(), "log-magnitude must be finite: {ln_abs}");
            SignedLog { sign: 1, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x < 0.0 { -1 } else { 1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn ln_abs(self) -> f64 {
        self.ln_abs
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        SignedLog {
            sign: self.sign.abs(),
            ln_abs: self.ln_abs,
        }
    }

    /// Sum of many signed values, stabilized around the largest magnitude and
    /// accumulated with Neumaier compensation.
    pub fn sum<I: IntoIterator<Item = SignedLog>>(values: I) -> SignedLog
    where
        I::IntoIter: Clone,
    {
        let iter = values.into_iter();
        let max = iter
            .clone()
            .filter(|v| v.sign != 0)
            .map(|v| v.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let mut acc = CompensatedSum::default();
        for v in iter {
            if v.sign != 0 {
                acc.add(f64::from(v.sign) * (v.ln_abs - max).exp());
            }
        }
        let total = acc.value();
        if total == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if total < 0.0 { -1 } else { 1 },
                ln_abs: total.abs().ln() + max,
            }
        }
    }

    pub fn add(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (lo.ln_abs - hi.ln_abs).exp();
        if hi.sign == lo.sign {
            SignedLog {
                sign: hi.sign,
                ln_abs: hi.ln_abs + ratio.ln_1p(),
            }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: hi.sign,
                ln_abs: hi.ln_abs + (-ratio).ln_1p(),
            }
        }
    }
}

impl Default for SignedLog {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    #[inline]
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: self.sign * rhs.sign,
                ln_abs: self.ln_abs + rhs.ln_abs,
            }
        }
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;

    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }
}

impl fmt::Debug for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "+exp({})", self.ln_abs),
            _ => write!(f, "-exp({})", self.ln_abs),
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy, Debug)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln Σ exp(x_i)`. Empty input and all-`-inf` input give `-inf`; any `+inf`
/// entry gives `+inf`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Weighted absolute summation `(Σ |ψ|^{1/w})^w` on log-magnitudes:
/// `w · logsumexp(ln|ψ| / w)`.
///
/// For negative weights a zero entry (`-inf`) drives the result to zero.
pub fn weighted_logsumexp(ln_abs: &[f64], w: f64) -> f64 {
    debug_assert!(w != 0.0);
    let inv = 1.0 / w;
    let mut max = f64::NEG_INFINITY;
    for &x in ln_abs {
        let s = x * inv;
        if s > max {
            max = s;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return w * f64::INFINITY;
    }
    let s: f64 = ln_abs.iter().map(|&x| (x * inv - max).exp()).sum();
    w * (max + s.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_and_one() {
        assert_eq!(SignedLog::from_f64(0.0), SignedLog::ZERO);
        assert_eq!(SignedLog::from_f64(1.0), SignedLog::ONE);
        assert!(SignedLog::from_parts(1, f64::NEG_INFINITY).is_none());
        assert!(SignedLog::from_parts(2, 0.0).is_none());
    }

    #[test]
    fn cancellation_gives_exact_zero() {
        let a = SignedLog::from_f64(3.5);
        assert!(a.add(-a).is_zero());
        assert!(SignedLog::sum([a, -a]).is_zero());
    }

    #[test]
    fn weighted_logsumexp_matches_definition() {
        let v = [3f64.ln(), 4f64.ln()];
        assert_relative_eq!(weighted_logsumexp(&v, 0.5).exp(), 5.0, max_relative = 1e-14);
        assert_relative_eq!(weighted_logsumexp(&v, 1.0).exp(), 7.0, max_relative = 1e-14);
        // negative weight: (3^-2 + 4^-2)^-0.5
        let expect = (1.0 / 9.0 + 1.0 / 16.0f64).powf(-0.5);
        assert_relative_eq!(weighted_logsumexp(&v, -0.5).exp(), expect, max_relative = 1e-14);
        assert_eq!(
            weighted_logsumexp(&[f64::NEG_INFINITY, 0.0], -0.5),
            f64::NEG_INFINITY
        );
    }

    proptest! {
        #[test]
        fn add_and_sum_agree_with_linear(xs in prop::collection::vec(-1e3f64..1e3, 1..20)) {
            let logs: Vec<SignedLog> = xs.iter().map(|&x| SignedLog::from_f64(x)).collect();
            let total: f64 = xs.iter().sum();
            let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
            let folded = logs.iter().fold(SignedLog::ZERO, |acc, &v| acc.add(v));
            prop_assert!((SignedLog::sum(logs.iter().copied()).to_f64() - total).abs() <= 1e-12 * scale * xs.len() as f64);
            prop_assert!((folded.to_f64() - total).abs() <= 1e-12 * scale * xs.len() as f64);
        }

        #[test]
        fn mul_matches_linear(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let p = (SignedLog::from_f64(a) * SignedLog::from_f64(b)).to_f64();
            prop_assert!((p - a * b).abs() <= 1e-12 * (a * b).abs().max(1e-300));
        }
    }
}
