//! Numerical primitives shared by the closed forms.
//!
//! The closed forms with direct links contain alternating binomial sums
//! `Σ C(N, n) (-a)^n g(n)` whose partial terms grow like `(1 + a)^N` while the
//! total stays in `[0, 1]`. Every term of those sums is formed and accumulated
//! in double-double arithmetic ([`Dd`]), which is built from error-free
//! transformations (`two_sum`, `two_prod`) and carries roughly 106 bits.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact binomial coefficient `C(n, k)`; `0` when `k > n`.
///
/// Exact in `u128` for every `n <= 64` (the multiplicative recurrence keeps
/// each intermediate below `C(64, 32) * 64 < 2^70`).
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    c
}

/// `expm1(x) / x`, continuous through its removable singularity at `0`.
pub fn expm1_over_x(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_u128(x: u128) -> Self {
        let hi = x as f64;
        // hi is within 2^(bits-53) of x, so the remainder fits a double exactly
        let lo = if hi >= 2f64.powi(127) {
            0.0
        } else {
            (x as i128 - hi as i128) as f64
        };
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    /// Multiply by `2^k` exactly (barring overflow/underflow).
    pub fn mul_pow2(self, k: i32) -> Self {
        let scale = |x: f64, k: i32| -> f64 {
            if (-1022..=1023).contains(&k) {
                x * 2f64.powi(k)
            } else {
                let half = k / 2;
                x * 2f64.powi(half) * 2f64.powi(k - half)
            }
        };
        Dd {
            hi: scale(self.hi, k),
            lo: scale(self.lo, k),
        }
    }

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// `exp(x) - 1` for `|x| <= 0.5`: Taylor series on `x / 2^12`, then
    /// twelve applications of `expm1(2t) = expm1(t) * (expm1(t) + 2)`.
    fn expm1_reduced(self) -> Self {
        const HALVINGS: i32 = 12;
        let r = self.mul_pow2(-HALVINGS);
        let mut sum = r;
        let mut term = r;
        for k in 2..30u32 {
            term = term * r / Dd::new(f64::from(k));
            sum = sum + term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        for _ in 0..HALVINGS {
            sum = sum * (sum + Dd::new(2.0));
        }
        sum
    }

    pub fn exp(self) -> Self {
        if self.hi.is_nan() {
            return Dd::new(f64::NAN);
        }
        if self.hi > 709.78 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * Dd::new(k);
        (Dd::ONE + r.expm1_reduced()).mul_pow2(k as i32)
    }

    pub fn exp_m1(self) -> Self {
        if self.hi.abs() <= 0.5 {
            self.expm1_reduced()
        } else {
            self.exp() - Dd::ONE
        }
    }

    /// `expm1(x) / x` with the removable singularity at `0` filled in.
    pub fn expm1_over_x(self) -> Self {
        if self.hi == 0.0 {
            Dd::ONE
        } else if self.hi < -745.2 {
            // expm1 is exactly -1 in double-double range
            -self.recip()
        } else {
            self.exp_m1() / self
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        if hi.is_finite() {
            Dd { hi, lo }
        } else {
            Dd::new(hi)
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        if hi.is_finite() {
            Dd { hi, lo }
        } else {
            Dd::new(hi)
        }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || q1 == 0.0 {
            return Dd::new(q1);
        }
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::new(q3)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        self * Dd::new(b)
    }
}
