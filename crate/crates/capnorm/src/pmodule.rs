//! Finite abelian p-groups `H = ⊕ Z/p^{n_j}` with an automorphism `σ` of
//! order dividing `p^N`.
//!
//! Elements are row vectors of exponents on the generators `h_j`. Row `j` of
//! the matrix `D` is the exponent vector of `h_j^{σ-1}`, and `x = σ - 1` acts
//! by `v ↦ v·D` with column `t` reduced modulo `p^{n_t}`.

use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg;
use crate::modarith::{add_mod, mul_mod, val_capped};
use crate::normpoly::{self, NormError};
use crate::padic::{self, PadicError};

/// Modules above this many elements use the echelon kernel by default.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModuleError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("generator orders must be non-increasing")]
    Unsorted,
    #[error("generator {0} has order 1")]
    TrivialGenerator(usize),
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("p^{0} does not fit the 62-bit arithmetic")]
    TooLarge(u32),
    #[error("row {row} of σ-1 is not compatible with the order of h_{row} (column {col})", row = .row + 1, col = .col + 1)]
    IllDefinedRow { row: usize, col: usize },
    #[error("σ is not invertible modulo p")]
    NotInvertible,
    #[error("σ^(p^{0}) is not the identity")]
    WrongOrder(u32),
    #[error("ν-image of order p^{image} exceeds the base class group order p^{base}")]
    ImageExceedsBase { image: u32, base: u32 },
}

/// `H` together with `σ - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PGroupModule {
    p: u64,
    orders: Vec<u32>,
    delta: Vec<Vec<u64>>,
    n: u32,
}

/// The chain `H^i = ker (σ-1)^i`, as `log_p` of orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Filtration {
    /// `subgroup_orders[i] = log_p #H^i` for `i = 0..=m`.
    pub subgroup_orders: Vec<u32>,
    /// `quotient_orders[i] = log_p #(H^{i+1}/H^i)` for `i < m`.
    pub quotient_orders: Vec<u32>,
    pub m: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModuleInvariants {
    /// `log_p #H`.
    pub order: u32,
    pub p_rank: u32,
    /// `p^e` is the exponent of `H`.
    pub e: u32,
    pub m: u32,
    /// `floor(log_p m)`, absent when `m = 0`.
    pub s: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VerdictKind {
    Complete,
    Partial,
    None,
}

impl VerdictKind {
    /// The phrase used by the transcripts.
    pub fn phrase(self) -> &'static str {
        match self {
            VerdictKind::Complete => "Complete capitulation",
            VerdictKind::Partial => "Incomplete capitulation",
            VerdictKind::None => "No capitulation",
        }
    }

    pub fn from_word(w: &str) -> Option<Self> {
        match w {
            "Complete" => Some(VerdictKind::Complete),
            "Incomplete" => Some(VerdictKind::Partial),
            "No" => Some(VerdictKind::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    NuAnnihilation,
    SmoothCriterion,
    StabilityCriterion,
    IngestedNorms,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapitulationVerdict {
    pub kind: VerdictKind,
    /// `log_p` of the order of the subgroup generated by the witnesses.
    pub image_order: u32,
    /// `log_p` of the capitulation kernel, known when the base order is.
    pub kernel_order: Option<u32>,
    /// `ν(h_j)` for each generator (empty when a criterion decided).
    pub witnesses: Vec<Vec<u64>>,
    pub rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRoute {
    Enumeration,
    Echelon,
}

type Endo = Vec<Vec<u64>>;

impl PGroupModule {
    /// Validates and builds a module. `orders` are exponents `n_j >= 1`,
    /// non-increasing; `delta` is the `r x r` matrix of `σ - 1`.
    pub fn new(p: u64, orders: Vec<u32>, delta: Vec<Vec<u64>>, n: u32) -> Result<Self, ModuleError> {
        padic::check_prime(p)?;
        if orders.windows(2).any(|w| w[0] < w[1]) {
            return Err(ModuleError::Unsorted);
        }
        if let Some(j) = orders.iter().position(|&o| o == 0) {
            return Err(ModuleError::TrivialGenerator(j));
        }
        let r = orders.len();
        if delta.len() != r {
            return Err(ModuleError::DimensionMismatch { expected: r, found: delta.len() });
        }
        if let Some(row) = delta.iter().find(|row| row.len() != r) {
            return Err(ModuleError::DimensionMismatch { expected: r, found: row.len() });
        }
        let top = orders.first().copied().unwrap_or(0);
        if p.checked_pow(top).is_none_or(|q| q >= 1 << 62) {
            return Err(ModuleError::TooLarge(top));
        }
        let mut module = PGroupModule { p, orders, delta, n };
        module.delta = module.reduce_rows(&module.delta);
        for (j, row) in module.delta.iter().enumerate() {
            for (t, &x) in row.iter().enumerate() {
                let nj = module.orders[j];
                let nt = module.orders[t];
                if nt > nj && x % p.pow(nt - nj) != 0 {
                    return Err(ModuleError::IllDefinedRow { row: j, col: t });
                }
            }
        }
        if !module.sigma_invertible_mod_p() {
            return Err(ModuleError::NotInvertible);
        }
        if !module.sigma_order_divides(n) {
            return Err(ModuleError::WrongOrder(n));
        }
        Ok(module)
    }

    /// Like [`PGroupModule::new`] but accepts orders in any order, sorting the
    /// generators (rows and columns of `D` together). Returns the permutation
    /// used: new position `i` holds old generator `perm[i]`.
    pub fn from_unsorted(
        p: u64,
        orders: Vec<u32>,
        delta: Vec<Vec<u64>>,
        n: u32,
    ) -> Result<(Self, Vec<usize>), ModuleError> {
        let r = orders.len();
        if delta.len() != r || delta.iter().any(|row| row.len() != r) {
            return Err(ModuleError::DimensionMismatch { expected: r, found: delta.len() });
        }
        let perm = sorting_permutation(&orders);
        let orders2 = perm.iter().map(|&i| orders[i]).collect();
        let delta2 = perm
            .iter()
            .map(|&i| perm.iter().map(|&j| delta[i][j]).collect())
            .collect();
        Ok((PGroupModule::new(p, orders2, delta2, n)?, perm))
    }

    pub fn trivial(p: u64, n: u32) -> Result<Self, ModuleError> {
        PGroupModule::new(p, vec![], vec![], n)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Exponents `n_j` of the generator orders.
    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Rows of `σ - 1`.
    pub fn delta(&self) -> &[Vec<u64>] {
        &self.delta
    }

    /// The exponent `N` bounding the order of `σ`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// `log_p #H`.
    pub fn order(&self) -> u32 {
        self.orders.iter().sum()
    }

    /// Number of elements, if it fits in a `u64`.
    pub fn cardinality(&self) -> Option<u64> {
        self.p.checked_pow(self.order())
    }

    fn top(&self) -> u32 {
        self.orders.first().copied().unwrap_or(0)
    }

    fn modulus(&self, t: usize) -> u64 {
        self.p.pow(self.orders[t])
    }

    /// Reduces every coordinate into `[0, p^{n_t})`.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        v.iter().enumerate().map(|(t, &x)| x % self.modulus(t)).collect()
    }

    fn reduce_rows(&self, rows: &[Vec<u64>]) -> Vec<Vec<u64>> {
        rows.iter().map(|r| self.reduce(r)).collect()
    }

    fn check_len(&self, v: &[u64]) -> Result<(), ModuleError> {
        if v.len() != self.rank() {
            return Err(ModuleError::DimensionMismatch { expected: self.rank(), found: v.len() });
        }
        Ok(())
    }

    /// `v ↦ v·A` for an endomorphism given by rows.
    fn apply(&self, v: &[u64], a: &Endo) -> Vec<u64> {
        (0..self.rank())
            .map(|t| {
                let q = self.modulus(t);
                v.iter()
                    .zip(a)
                    .fold(0, |acc, (&x, row)| add_mod(acc, mul_mod(x, row[t], q), q))
            })
            .collect()
    }

    /// `A` followed by `B`.
    fn compose(&self, a: &Endo, b: &Endo) -> Endo {
        a.iter().map(|row| self.apply(row, b)).collect()
    }

    fn identity(&self) -> Endo {
        let r = self.rank();
        (0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect()
    }

    /// `M = I + D`.
    pub fn sigma(&self) -> Vec<Vec<u64>> {
        let mut m = self.delta.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = (row[i] + 1) % self.modulus(i);
        }
        m
    }

    /// `D^i`.
    pub fn delta_power(&self, i: u32) -> Vec<Vec<u64>> {
        let mut acc = self.identity();
        for _ in 0..i {
            acc = self.compose(&acc, &self.delta);
        }
        acc
    }

    fn pow(&self, a: &Endo, mut e: u64) -> Endo {
        let mut base = a.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.compose(&acc, &base);
            }
            base = self.compose(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn sigma_invertible_mod_p(&self) -> bool {
        let p = self.p;
        let mut m: Vec<Vec<u64>> = self.sigma().iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
        let r = self.rank();
        for c in 0..r {
            let Some(piv) = (c..r).find(|&i| m[i][c] != 0) else {
                return false;
            };
            m.swap(c, piv);
            let inv = crate::modarith::inv_mod(m[c][c], p);
            for i in 0..r {
                if i != c && m[i][c] != 0 {
                    let f = mul_mod(m[i][c], inv, p);
                    for j in 0..r {
                        let t = mul_mod(f, m[c][j], p);
                        m[i][j] = crate::modarith::sub_mod(m[i][j], t, p);
                    }
                }
            }
        }
        true
    }

    /// Whether `σ^{p^k} = 1`.
    pub fn sigma_order_divides(&self, k: u32) -> bool {
        let mut m = self.sigma();
        for _ in 0..k {
            m = self.pow(&m, self.p);
        }
        m == self.identity()
    }

    /// Smallest `k` with `σ^{p^k} = 1`.
    pub fn sigma_order_exponent(&self) -> u32 {
        let id = self.identity();
        let mut m = self.sigma();
        let mut k = 0;
        while m != id {
            m = self.pow(&m, self.p);
            k += 1;
        }
        k
    }

    /// The same group and action with a different bound `N`.
    pub fn with_n(&self, n: u32) -> Result<Self, ModuleError> {
        PGroupModule::new(self.p, self.orders.clone(), self.delta.clone(), n)
    }

    /// Evaluates `Σ c_i x^i` at `x = σ - 1` on `element` (Horner).
    pub fn apply_poly(&self, element: &[u64], coeffs: &[u64]) -> Result<Vec<u64>, ModuleError> {
        self.check_len(element)?;
        let v = self.reduce(element);
        let mut acc = vec![0; self.rank()];
        for &c in coeffs.iter().rev() {
            acc = self.apply(&acc, &self.delta);
            for (t, a) in acc.iter_mut().enumerate() {
                let q = self.modulus(t);
                *a = add_mod(*a, mul_mod(c % q, v[t], q), q);
            }
        }
        Ok(acc)
    }

    fn nu_coeffs(&self) -> Result<Vec<u64>, ModuleError> {
        Ok(normpoly::nu_coeffs_mod(self.p, self.n, self.top().max(1))?)
    }

    /// `ν(h_j)` for all generators, evaluating `ν` as a polynomial in `D`.
    pub fn nu_images_poly(&self) -> Result<Vec<Vec<u64>>, ModuleError> {
        let c = self.nu_coeffs()?;
        self.identity().iter().map(|h| self.apply_poly(h, &c)).collect()
    }

    /// `ν(h_j) = Σ_{i<p^N} h_j σ^i` for all generators.
    pub fn nu_images_sum(&self) -> Vec<Vec<u64>> {
        let m = self.sigma();
        let steps = self.p.pow(self.n);
        self.identity()
            .iter()
            .map(|h| {
                let mut w = h.clone();
                let mut total = vec![0; self.rank()];
                for _ in 0..steps {
                    for (t, x) in total.iter_mut().enumerate() {
                        *x = add_mod(*x, w[t], self.modulus(t));
                    }
                    w = self.apply(&w, &m);
                }
                total
            })
            .collect()
    }

    /// `ν(v)`.
    pub fn nu_of(&self, v: &[u64]) -> Result<Vec<u64>, ModuleError> {
        let c = self.nu_coeffs()?;
        self.apply_poly(v, &c)
    }

    /// `log_p` of the order of `v`.
    pub fn element_order(&self, v: &[u64]) -> u32 {
        v.iter()
            .enumerate()
            .map(|(t, &x)| {
                let nt = self.orders[t];
                nt - val_capped(x % self.modulus(t), self.p, nt)
            })
            .max()
            .unwrap_or(0)
    }

    /// Smallest `i` with `v (σ-1)^i = 0`.
    pub fn element_depth(&self, v: &[u64]) -> u32 {
        let mut w = self.reduce(v);
        let mut d = 0;
        while w.iter().any(|&x| x != 0) {
            w = self.apply(&w, &self.delta);
            d += 1;
        }
        d
    }

    /// `log_p` of the order of the subgroup generated by `vecs`.
    pub fn subgroup_order(&self, vecs: &[Vec<u64>]) -> u32 {
        let e = self.top();
        if e == 0 {
            return 0;
        }
        let rows: Vec<Vec<u64>> = vecs
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(t, &x)| (x % self.modulus(t)) * self.p.pow(e - self.orders[t]))
                    .collect()
            })
            .collect();
        linalg::row_span_valuation(&rows, self.rank(), self.p, e)
    }

    /// Filtration, by enumeration when the module is small enough.
    pub fn filtration(&self) -> Filtration {
        match self.cardinality() {
            Some(c) if c <= ENUMERATION_LIMIT => self.filtration_via(KernelRoute::Enumeration),
            _ => self.filtration_via(KernelRoute::Echelon),
        }
    }

    pub fn filtration_via(&self, route: KernelRoute) -> Filtration {
        let subgroup_orders = match route {
            KernelRoute::Enumeration => self.kernel_orders_enumerated(),
            KernelRoute::Echelon => self.kernel_orders_echelon(),
        };
        let quotient_orders = subgroup_orders.windows(2).map(|w| w[1] - w[0]).collect();
        let m = subgroup_orders.len() as u32 - 1;
        Filtration { subgroup_orders, quotient_orders, m }
    }

    fn kernel_orders_enumerated(&self) -> Vec<u32> {
        let card = self.cardinality().expect("enumeration needs a small module");
        let mut depth_counts: Vec<u64> = vec![0];
        let mut v = vec![0u64; self.rank()];
        for _ in 0..card {
            let d = self.element_depth(&v) as usize;
            if depth_counts.len() <= d {
                depth_counts.resize(d + 1, 0);
            }
            depth_counts[d] += 1;
            for (t, x) in v.iter_mut().enumerate() {
                *x += 1;
                if *x < self.modulus(t) {
                    break;
                }
                *x = 0;
            }
        }
        let mut acc = 0;
        depth_counts
            .iter()
            .map(|&c| {
                acc += c;
                let v = acc.ilog(self.p);
                assert_eq!(self.p.pow(v), acc, "kernel order is not a power of p");
                v
            })
            .collect()
    }

    /// `log_p #ker(D^i)` via diagonal reduction over `Z/p^{n_1}`.
    fn kernel_order_echelon(&self, a: &Endo) -> u32 {
        let e = self.top();
        let b: Vec<Vec<u64>> = a
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(t, &x)| x * self.p.pow(e - self.orders[t]))
                    .collect()
            })
            .collect();
        let (k, _) = linalg::left_kernel(&b, self.rank(), self.p, e);
        let lattice: u32 = self.orders.iter().map(|&n| e - n).sum();
        k - lattice
    }

    fn kernel_orders_echelon(&self) -> Vec<u32> {
        let total = self.order();
        let mut out = vec![0];
        let mut a = self.identity();
        while *out.last().unwrap() < total {
            a = self.compose(&a, &self.delta);
            out.push(self.kernel_order_echelon(&a));
            assert!(out.len() as u32 <= total + 1, "σ-1 is not nilpotent");
        }
        out
    }

    /// Generators of `H^i`, from the echelon route.
    pub fn kernel_generators(&self, i: u32) -> Vec<Vec<u64>> {
        let e = self.top();
        if e == 0 {
            return vec![];
        }
        let a = self.delta_power(i);
        let b: Vec<Vec<u64>> = a
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(t, &x)| x * self.p.pow(e - self.orders[t]))
                    .collect()
            })
            .collect();
        let (_, gens) = linalg::left_kernel(&b, self.rank(), self.p, e);
        gens.into_iter()
            .map(|g| self.reduce(&g))
            .filter(|g| g.iter().any(|&x| x != 0))
            .collect()
    }

    pub fn invariants(&self) -> ModuleInvariants {
        let f = self.filtration();
        ModuleInvariants {
            order: self.order(),
            p_rank: self.rank() as u32,
            e: self.top(),
            m: f.m,
            s: (f.m >= 1).then(|| padic::floor_log(f.m as u64, self.p)),
        }
    }

    /// Verdict from a list of `ν`-images. With `base` (= `log_p #H_K`) known,
    /// an image of full order `base` means no capitulation at all.
    pub fn verdict_from_witnesses(
        &self,
        witnesses: Vec<Vec<u64>>,
        base: Option<u32>,
        rule: Rule,
    ) -> Result<CapitulationVerdict, ModuleError> {
        let witnesses: Vec<Vec<u64>> = witnesses.iter().map(|w| self.reduce(w)).collect();
        let image_order = self.subgroup_order(&witnesses);
        if let Some(b) = base {
            if image_order > b {
                return Err(ModuleError::ImageExceedsBase { image: image_order, base: b });
            }
        }
        let kind = if witnesses.iter().all(|w| w.iter().all(|&x| x == 0)) {
            VerdictKind::Complete
        } else if base == Some(image_order) {
            VerdictKind::None
        } else {
            VerdictKind::Partial
        };
        Ok(CapitulationVerdict {
            kind,
            image_order,
            kernel_order: base.map(|b| b - image_order),
            witnesses,
            rule,
        })
    }

    /// `ν(H)` without knowledge of the base order: Complete or Partial.
    pub fn nu_image(&self) -> Result<CapitulationVerdict, ModuleError> {
        self.nu_image_with_base(None)
    }

    pub fn nu_image_with_base(&self, base: Option<u32>) -> Result<CapitulationVerdict, ModuleError> {
        let w = self.nu_images_poly()?;
        self.verdict_from_witnesses(w, base, Rule::NuAnnihilation)
    }

    /// Complete when `(m, e)` is smooth for `N`; `None` means the criterion is silent.
    pub fn check_sufficient_criterion(&self) -> Option<CapitulationVerdict> {
        let inv = self.invariants();
        normpoly::is_smooth(inv.m as u64, inv.e, self.n, self.p).then_some(CapitulationVerdict {
            kind: VerdictKind::Complete,
            image_order: 0,
            kernel_order: None,
            witnesses: vec![],
            rule: Rule::SmoothCriterion,
        })
    }

    /// Whether `ν(v) = 0`, trying the smooth test on `v`'s own `(m, e)` first.
    pub fn element_capitulates(&self, v: &[u64]) -> Result<bool, ModuleError> {
        self.check_len(v)?;
        let m = self.element_depth(v);
        let e = self.element_order(v);
        if normpoly::is_smooth(m as u64, e, self.n, self.p) {
            return Ok(true);
        }
        Ok(self.nu_of(v)?.iter().all(|&x| x == 0))
    }

    /// `H / H^{p^t}`.
    pub fn quotient_mod_pt(&self, t: u32) -> Result<Self, ModuleError> {
        let orders: Vec<u32> = self.orders.iter().map(|&n| n.min(t)).filter(|&n| n > 0).collect();
        let r = orders.len();
        let delta = self.delta[..r]
            .iter()
            .map(|row| {
                row[..r]
                    .iter()
                    .zip(&orders)
                    .map(|(&x, &n)| x % self.p.pow(n))
                    .collect()
            })
            .collect();
        PGroupModule::new(self.p, orders, delta, self.n)
    }
}

/// Stable permutation sorting exponents non-increasingly.
pub fn sorting_permutation(orders: &[u32]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..orders.len()).collect();
    perm.sort_by(|&a, &b| orders[b].cmp(&orders[a]));
    perm
}

impl fmt::Display for CapitulationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:?})", self.kind.phrase(), self.rule)
    }
}

/// `"Complete capitulation, m(K1)=2, e(K1)=2"`.
pub fn verdict_line(kind: VerdictKind, layer: u32, m: u32, e: u32) -> String {
    format!("{}, m(K{layer})={m}, e(K{layer})={e}", kind.phrase())
}

/// Random valid modules for property tests.
pub mod sample {
    use super::*;

    /// A random module with at most `max_elems` elements over `p`.
    ///
    /// `σ - 1` is strictly triangular modulo `p` (upper or lower at random),
    /// hence nilpotent, and `N` is set to the exact order exponent of `σ`
    /// plus `extra_n`.
    pub fn random_module<R: Rng + ?Sized>(rng: &mut R, p: u64, max_elems: u64, extra_n: u32) -> PGroupModule {
        let budget = max_elems.ilog(p);
        let mut orders = Vec::new();
        let mut used = 0;
        let rank_cap = rng.random_range(0..=4usize);
        while orders.len() < rank_cap && used < budget {
            let n = rng.random_range(1..=(budget - used).min(5));
            orders.push(n);
            used += n;
        }
        orders.sort_unstable_by(|a, b| b.cmp(a));
        let r = orders.len();
        let upper = rng.random_bool(0.5);
        let delta: Vec<Vec<u64>> = (0..r)
            .map(|j| {
                (0..r)
                    .map(|t| {
                        let nt = orders[t];
                        let nj = orders[j];
                        let q = p.pow(nt);
                        let mut x = rng.random_range(0..q);
                        if nt > nj {
                            x = (x * p.pow(nt - nj)) % q;
                        }
                        let strict = if upper { t > j } else { t < j };
                        if !strict {
                            x = (x * p) % q;
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        let probe = PGroupModule { p, orders: orders.clone(), delta: delta.clone(), n: 0 };
        let n = probe.sigma_order_exponent().max(1) + extra_n;
        PGroupModule::new(p, orders, delta, n).expect("construction yields a valid module")
    }
}
