//! Exact p-adic valuations of integers, factorials and binomial coefficients.
//!
//! Valuations of factorials and binomials use base-p digit sums and never
//! build the factorial itself.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("the valuation of 0 is undefined")]
    ZeroValuation,
    #[error("k = {k} is outside [0, {n}]")]
    BinomialRange { n: u64, k: u64 },
    #[error("k = {k} is outside [1, p^N - 1] = [1, {max}]")]
    StepRange { k: u64, max: u64 },
    #[error("p^N = {p}^{n} is too large")]
    TooLarge { p: u64, n: u32 },
}

/// Rejects anything that is not a prime, by trial division.
pub fn check_prime(p: u64) -> Result<(), PadicError> {
    if p < 2 {
        return Err(PadicError::NotPrime(p));
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return Err(PadicError::NotPrime(p));
        }
        d += 1;
    }
    Ok(())
}

/// `p^n` as a `u64`, or `None` on overflow.
pub fn checked_pow(p: u64, n: u32) -> Option<u64> {
    p.checked_pow(n)
}

/// An integer written as `unit * p^valuation` with `p` not dividing `unit`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValuedInteger {
    Zero,
    NonZero { unit: BigInt, valuation: u32 },
}

impl ValuedInteger {
    pub fn new(n: &BigInt, p: u64) -> Result<Self, PadicError> {
        check_prime(p)?;
        if n.is_zero() {
            return Ok(ValuedInteger::Zero);
        }
        let (unit, valuation) = split_valuation(n, p);
        Ok(ValuedInteger::NonZero { unit, valuation })
    }

    pub fn one() -> Self {
        ValuedInteger::NonZero {
            unit: BigInt::one(),
            valuation: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ValuedInteger::Zero)
    }

    pub fn valuation(&self) -> Option<u32> {
        match self {
            ValuedInteger::Zero => None,
            ValuedInteger::NonZero { valuation, .. } => Some(*valuation),
        }
    }

    pub fn unit(&self) -> Option<&BigInt> {
        match self {
            ValuedInteger::Zero => None,
            ValuedInteger::NonZero { unit, .. } => Some(unit),
        }
    }

    /// `unit * p^valuation`.
    pub fn reconstruct(&self, p: u64) -> BigInt {
        match self {
            ValuedInteger::Zero => BigInt::zero(),
            ValuedInteger::NonZero { unit, valuation } => unit * BigInt::from(p).pow(*valuation),
        }
    }

    /// Lowers the valuation by `w`; `None` if that would leave a negative exponent.
    pub fn shift_down(&self, w: u32) -> Option<Self> {
        match self {
            ValuedInteger::Zero => Some(ValuedInteger::Zero),
            ValuedInteger::NonZero { unit, valuation } => {
                valuation.checked_sub(w).map(|v| ValuedInteger::NonZero {
                    unit: unit.clone(),
                    valuation: v,
                })
            }
        }
    }

    /// Residue of the value modulo `modulus`, in `[0, modulus)`.
    pub fn residue(&self, p: u64, modulus: &BigInt) -> BigInt {
        self.reconstruct(p).mod_floor(modulus)
    }
}

fn split_valuation(n: &BigInt, p: u64) -> (BigInt, u32) {
    let pb = BigInt::from(p);
    let mut unit = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = unit.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        unit = q;
        v += 1;
    }
    (unit, v)
}

/// Largest `v` with `p^v | n`.
pub fn valuation(n: &BigInt, p: u64) -> Result<u32, PadicError> {
    check_prime(p)?;
    if n.is_zero() {
        return Err(PadicError::ZeroValuation);
    }
    Ok(split_valuation(&n.abs(), p).1)
}

/// [`valuation`] for machine integers.
pub fn valuation_u64(n: u64, p: u64) -> Result<u32, PadicError> {
    check_prime(p)?;
    if n == 0 {
        return Err(PadicError::ZeroValuation);
    }
    let mut n = n;
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    Ok(v)
}

/// Sum of the base-`p` digits of `m`.
pub fn digit_sum(m: u64, p: u64) -> Result<u64, PadicError> {
    check_prime(p)?;
    let mut m = m;
    let mut s = 0;
    while m > 0 {
        s += m % p;
        m /= p;
    }
    Ok(s)
}

/// `v_p(m!) = (m - S(m)) / (p - 1)`.
pub fn factorial_valuation(m: u64, p: u64) -> Result<u64, PadicError> {
    Ok((m - digit_sum(m, p)?) / (p - 1))
}

/// `v_p(C(n, k))`.
pub fn binomial_valuation(n: u64, k: u64, p: u64) -> Result<u64, PadicError> {
    if k > n {
        return Err(PadicError::BinomialRange { n, k });
    }
    Ok(factorial_valuation(n, p)? - factorial_valuation(k, p)? - factorial_valuation(n - k, p)?)
}

/// `floor(log_p k)` for `k >= 1`.
pub fn floor_log(k: u64, p: u64) -> u32 {
    debug_assert!(k >= 1 && p >= 2);
    k.ilog(p)
}

/// `f(k) = N - floor(log_p k)` for `k` in `[1, p^N - 1]`.
pub fn f_step(k: u64, n: u32, p: u64) -> Result<u32, PadicError> {
    check_prime(p)?;
    let pn = checked_pow(p, n).ok_or(PadicError::TooLarge { p, n })?;
    if k < 1 || k >= pn {
        return Err(PadicError::StepRange { k, max: pn - 1 });
    }
    Ok(n - floor_log(k, p))
}

/// The row `C(n, 0), ..., C(n, n)` built by the exact multiplicative recurrence.
pub fn binomial_row(n: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for i in 1..=n {
        c = c * BigInt::from(n - i + 1) / BigInt::from(i);
        row.push(c.clone());
    }
    row
}
