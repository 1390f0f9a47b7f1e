//! Log-domain arithmetic and combinatorial helpers.
//!
//! Partition functions grow like `λ^N`, so every quantity that can overflow is
//! carried as a (sign, log-magnitude) pair and accumulated with log-sum-exp.

use statrs::function::gamma::ln_gamma;

/// A real number stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    sign: i8,
    ln_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue { sign: 1, ln_abs: 0.0 };

    /// Positive value `exp(ln)`.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue { sign: 1, ln_abs: ln }
        }
    }

    pub fn from_signed_ln(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    /// Natural log of a positive value; `NaN` for negative values.
    pub fn ln(&self) -> f64 {
        match self.sign {
            1 => self.ln_abs,
            0 => f64::NEG_INFINITY,
            _ => f64::NAN,
        }
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: LogValue) -> LogValue {
        LogValue::from_signed_ln(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    pub fn add(self, other: LogValue) -> LogValue {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            LogValue::from_signed_ln(big.sign, big.ln_abs + ratio.ln_1p())
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            LogValue::from_signed_ln(big.sign, big.ln_abs + (-ratio).ln_1p())
        }
    }
}

/// Streaming log-sum-exp accumulator for positive terms given by their logs.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term <= self.max {
            self.scaled += (ln_term - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - ln_term).exp() + 1.0;
            self.max = ln_term;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
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

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = LogSumExp::new();
    for t in terms {
        acc.push(t);
    }
    acc.value()
}

/// `ln cosh(x)` without overflow.
#[inline]
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln(2 cosh x)`.
#[inline]
pub fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

#[inline]
pub fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

/// Table of `ln n!` for `0 <= n <= max`, each entry from the log-gamma function.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let table = (0..=max).map(|n| ln_gamma(n as f64 + 1.0)).collect();
        LnFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)` with `C(-1, 0) = 1` and zero (`-inf`) outside the support.
    #[inline]
    pub fn ln_binomial(&self, n: i64, k: i64) -> f64 {
        if k == 0 && n >= -1 {
            return 0.0;
        }
        if n < 0 || k < 0 || k > n {
            return f64::NEG_INFINITY;
        }
        let (n, k) = (n as usize, k as usize);
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// `ln (2k-1)!!`, the log of the number of perfect matchings of `2k` items.
    pub fn ln_double_factorial_odd(&self, k: usize) -> f64 {
        self.table[2 * k] - self.table[k] - k as f64 * std::f64::consts::LN_2
    }
}

pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln C(n, k)` via log-gamma, with the same conventions as [`LnFactorials::ln_binomial`].
pub fn ln_binomial(n: i64, k: i64) -> f64 {
    if k == 0 && n >= -1 {
        return 0.0;
    }
    if n < 0 || k < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n as usize) - ln_factorial(k as usize) - ln_factorial((n - k) as usize)
}

/// `(2k-1)!!` as an exact integer for small `k`.
pub fn double_factorial_odd(k: usize) -> u128 {
    (1..=k as u128).map(|j| 2 * j - 1).product()
}

/// Central difference of `f` at `x` with one Richardson step.
pub fn richardson_first_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let coarse = d(h);
    let fine = d(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Second central difference of `f` at `x` with one Richardson step.
pub fn richardson_second_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |h: f64| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    let coarse = d(h);
    let fine = d(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}
