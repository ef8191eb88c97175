//! Small helpers for arithmetic modulo `q < 2^63`.

use num_integer::Integer;

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    add_mod(a, q - b % q, q)
}

/// Inverse of a unit modulo `q`.
pub(crate) fn inv_mod(a: u64, q: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(q as i128));
    debug_assert_eq!(e.gcd, 1, "{a} is not a unit mod {q}");
    e.x.rem_euclid(q as i128) as u64
}

/// Splits `n > 0` as `(unit, v)` with `n = unit * p^v`.
pub(crate) fn split(mut n: u64, p: u64) -> (u64, u32) {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    (n, v)
}

/// `v_p(n)`, with `v_p(0)` reported as `cap`.
pub(crate) fn val_capped(n: u64, p: u64, cap: u32) -> u32 {
    if n == 0 {
        cap
    } else {
        split(n, p).1.min(cap)
    }
}
