//! The algebraic norm `ν = Σ_{i=1}^{p^N} C(p^N, i) x^{i-1}` written in `x = σ - 1`,
//! its splittings `ν = x^k A + p^{f(k)} B`, and reductions modulo `(x^m, p^e)`.
//!
//! Coefficients are kept as [`ValuedInteger`]s so that `p` can be printed
//! symbolically. The printed shape is the one produced by the usual PARI
//! decomposition script:
//!
//! ```
//! use capnorm::normpoly::build_nu;
//!
//! let nu = build_nu(2, 2).unwrap();
//! assert_eq!(nu.to_string(), "x^3+p^2*x^2+3*p*x+p^2");
//! let d = nu.decompose(2).unwrap();
//! assert_eq!(d.header(), "P=x^2.A+p^1.B");
//! assert_eq!(d.a_string(), "x+p^2");
//! assert_eq!(d.b_string(), "3*x+p");
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::modarith::{inv_mod, mul_mod, split};
use crate::padic::{self, binomial_row, check_prime, PadicError, ValuedInteger};

/// Largest admissible `p^N`.
pub const MAX_DEGREE: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("p^N = {p}^{n} exceeds the supported size {MAX_DEGREE}")]
    Oversize { p: u64, n: u32 },
    #[error("N must be at least 1")]
    ZeroDepth,
    #[error("k = {k} is outside [1, {max}]")]
    KRange { k: u64, max: u64 },
}

/// `ν` for the cyclic extension of degree `p^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormPolynomial {
    p: u64,
    n: u32,
    coeffs: Vec<ValuedInteger>,
}

/// `ν = x^k A + p^{f_k} B` with `deg B < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuDecomposition {
    pub k: u64,
    pub f_k: u32,
    pub a: Vec<ValuedInteger>,
    pub b: Vec<ValuedInteger>,
}

fn degree_of(p: u64, n: u32) -> Result<u64, NormError> {
    check_prime(p)?;
    if n == 0 {
        return Err(NormError::ZeroDepth);
    }
    match p.checked_pow(n) {
        Some(d) if d <= MAX_DEGREE => Ok(d),
        _ => Err(NormError::Oversize { p, n }),
    }
}

/// Builds `ν` for degree `p^N`.
pub fn build_nu(p: u64, n: u32) -> Result<NormPolynomial, NormError> {
    let q = degree_of(p, n)?;
    let row = binomial_row(q);
    let coeffs = row[1..]
        .iter()
        .map(|c| ValuedInteger::new(c, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NormPolynomial { p, n, coeffs })
}

impl NormPolynomial {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// The exponent `N` of the degree `p^N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `coeffs()[i]` is the coefficient of `x^i`, i.e. `C(p^N, i+1)`.
    pub fn coeffs(&self) -> &[ValuedInteger] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Integer coefficients with `p` substituted.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(|c| c.reconstruct(self.p)).collect()
    }

    /// Value at the integer `x`.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.integer_coeffs()
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn decompose(&self, k: u64) -> Result<NuDecomposition, NormError> {
        let max = self.coeffs.len() as u64 - 1;
        if k < 1 || k > max {
            return Err(NormError::KRange { k, max });
        }
        let low = &self.coeffs[..k as usize];
        let w = low
            .iter()
            .filter_map(ValuedInteger::valuation)
            .min()
            .expect("binomial coefficients are nonzero");
        let b = low
            .iter()
            .map(|c| c.shift_down(w).expect("w is the minimum"))
            .collect();
        let a = self.coeffs[k as usize..].to_vec();
        let f_k = padic::f_step(k, self.n, self.p)?;
        assert_eq!(w, f_k, "low-part valuation disagrees with f(k)");
        Ok(NuDecomposition { k, f_k, a, b })
    }

    /// All decompositions for `k = 1, ..., p^N - 1`.
    pub fn decompositions(&self) -> Vec<NuDecomposition> {
        (1..self.coeffs.len() as u64)
            .map(|k| self.decompose(k).expect("k in range"))
            .collect()
    }

    /// `ν` truncated below `x^m` with coefficients reduced into `[0, p^e)`.
    pub fn reduce_mod_ideal(&self, m: u64, e: u32) -> Vec<BigInt> {
        let modulus = BigInt::from(self.p).pow(e);
        self.coeffs
            .iter()
            .take(m.min(self.coeffs.len() as u64) as usize)
            .map(|c| c.residue(self.p, &modulus))
            .collect()
    }

    /// The whole printout of the decomposition script: `P=...` followed, for
    /// every `k`, by an empty line and the three lines of [`NuDecomposition::lines`].
    pub fn program_output(&self) -> String {
        let mut out = format!("P={self}\n");
        for d in self.decompositions() {
            out.push('\n');
            for line in d.lines() {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }
}

impl fmt::Display for NormPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbolic(&self.coeffs))
    }
}

impl NuDecomposition {
    pub fn header(&self) -> String {
        format!("P=x^{}.A+p^{}.B", self.k, self.f_k)
    }

    pub fn a_string(&self) -> String {
        format_symbolic(&self.a)
    }

    pub fn b_string(&self) -> String {
        format_symbolic(&self.b)
    }

    pub fn lines(&self) -> [String; 3] {
        [
            self.header(),
            format!("A={}", self.a_string()),
            format!("B={}", self.b_string()),
        ]
    }

    /// Expands `x^k A + p^{f_k} B` back into integer coefficients.
    pub fn expand(&self, p: u64) -> Vec<BigInt> {
        let len = self.k as usize + self.a.len();
        let mut out = vec![BigInt::zero(); len];
        let pw = BigInt::from(p).pow(self.f_k);
        for (i, c) in self.b.iter().enumerate() {
            out[i] += c.reconstruct(p) * &pw;
        }
        for (i, c) in self.a.iter().enumerate() {
            out[self.k as usize + i] += c.reconstruct(p);
        }
        out
    }
}

fn format_term(c: &ValuedInteger, i: usize) -> Option<String> {
    let ValuedInteger::NonZero { unit, valuation } = c else {
        return None;
    };
    let mut parts: Vec<String> = Vec::new();
    if !unit.is_one() {
        parts.push(unit.to_string());
    }
    match valuation {
        0 => {}
        1 => parts.push("p".into()),
        v => parts.push(format!("p^{v}")),
    }
    match i {
        0 => {}
        1 => parts.push("x".into()),
        _ => parts.push(format!("x^{i}")),
    }
    if parts.is_empty() {
        parts.push("1".into());
    }
    Some(parts.join("*"))
}

/// Prints a polynomial in `x` whose coefficients are monomials `c*p^v`,
/// by decreasing degree, with `p` left symbolic.
pub fn format_symbolic(coeffs: &[ValuedInteger]) -> String {
    let mut out = String::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if let Some(t) = format_term(c, i) {
            if !out.is_empty() && !t.starts_with('-') {
                out.push('+');
            }
            out.push_str(&t);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Smooth complexity: `m = 0`, or `1 <= m <= p^N - 1` and `e <= N - floor(log_p m)`.
pub fn is_smooth(m: u64, e: u32, n: u32, p: u64) -> bool {
    if m == 0 {
        return true;
    }
    match p.checked_pow(n) {
        Some(pn) if m >= pn => return false,
        _ => {}
    }
    let s = padic::floor_log(m, p);
    s < n && e <= n - s
}

/// Coefficients of `ν` reduced modulo `p^e`, computed from the recurrence
/// `C(q, i) = C(q, i-1) (q-i+1) / i` on units and valuations separately.
pub fn nu_coeffs_mod(p: u64, n: u32, e: u32) -> Result<Vec<u64>, NormError> {
    let q = degree_of(p, n)?;
    let modulus = p
        .checked_pow(e)
        .filter(|m| *m < 1 << 62)
        .ok_or(NormError::Oversize { p, n: e })?;
    let mut unit = 1u64;
    let mut val = 0u32;
    let mut out = Vec::with_capacity(q as usize);
    for i in 1..=q {
        let (ua, va) = split(q - i + 1, p);
        let (ub, vb) = split(i, p);
        unit = mul_mod(mul_mod(unit, ua % modulus, modulus), inv_mod(ub % modulus, modulus), modulus);
        val = val + va - vb;
        let c = if val >= e {
            0
        } else {
            mul_mod(unit, p.pow(val), modulus)
        };
        out.push(c);
    }
    Ok(out)
}

/// Same residues as [`nu_coeffs_mod`], via the big-integer coefficients.
pub fn nu_coeffs_mod_big(nu: &NormPolynomial, e: u32) -> Vec<u64> {
    let m = BigInt::from(nu.p).pow(e);
    nu.coeffs
        .iter()
        .map(|c| {
            let r = c.reconstruct(nu.p).mod_floor(&m);
            u64::try_from(r).expect("residue fits")
        })
        .collect()
}
