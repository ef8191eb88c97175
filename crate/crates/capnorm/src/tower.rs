//! Towers `K = K_0 ⊂ K_1 ⊂ ... ⊂ K_N` of layer modules: stability,
//! predictions drawn from it, norm cross-checks, growth and order ledgers.
//!
//! Orders are handled as `log_p` valuations throughout.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pmodule::{
    verdict_line, CapitulationVerdict, ModuleError, ModuleInvariants, PGroupModule, Rule, VerdictKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("layer indices must run 1, 2, ...; found {found} at position {expected}")]
    NonContiguous { expected: u32, found: u32 },
    #[error("increasing-order law violated: #H(K{n}) = p^{next} is smaller than #H(K{prev_n}) = p^{prev}", prev_n = .n - 1)]
    DecreasingOrders { n: u32, prev: u32, next: u32 },
    #[error("layer {n}: module generator orders {module:?} disagree with the group type {group:?}")]
    TypeMismatch { n: u32, module: Vec<u32>, group: Vec<u32> },
    #[error("layer {n} uses p = {found}, tower uses p = {expected}")]
    PrimeMismatch { n: u32, expected: u64, found: u64 },
    #[error("layer {n} has no σ-action data")]
    NoModule { n: u32 },
    #[error("no layer {0}")]
    NoLayer(u32),
    #[error("layer {n}: {source}")]
    Module { n: u32, source: ModuleError },
    #[error("norm index {index} exceeds n(r-1) = {max}")]
    NormIndex { index: u32, max: u32 },
    #[error("at least {0} layers are required")]
    TooShort(usize),
}

/// Abelian p-group type as exponents, non-increasing, without zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct GroupType(Vec<u32>);

impl GroupType {
    pub fn new(mut exps: Vec<u32>) -> Self {
        exps.retain(|&e| e > 0);
        exps.sort_unstable_by(|a, b| b.cmp(a));
        GroupType(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `log_p` of the exponent of the group.
    pub fn exponent(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// `log_p #X[p^h]`.
    pub fn torsion(&self, h: u32) -> u32 {
        self.0.iter().map(|&a| a.min(h)).sum()
    }

    pub fn direct_sum(&self, other: &GroupType) -> GroupType {
        GroupType::new(self.0.iter().chain(&other.0).copied().collect())
    }
}

/// A verdict line as printed in a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrintedVerdict {
    pub kind: VerdictKind,
    pub m: Option<u32>,
    pub e: Option<u32>,
    /// Layer index quoted in the `m(Kn)` label.
    pub label_layer: Option<u32>,
    pub raw: String,
}

/// A forward-looking line such as "Complete capitulation in K3 (stability from K1)".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrintedPrediction {
    pub kind: VerdictKind,
    pub layer: u32,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerRecord {
    pub n: u32,
    pub group: GroupType,
    /// Absent when only the class structure was printed.
    pub module: Option<PGroupModule>,
    pub printed_norms: Option<Vec<Vec<u64>>>,
    /// Printed rows `h_j^{(σ-1)^i}` for `i >= 2`, as `(i, j, vector)` with `j` 0-based.
    pub printed_powers: Vec<(u32, usize, Vec<u64>)>,
    pub verdict: Option<PrintedVerdict>,
    pub label: Option<String>,
}

impl LayerRecord {
    pub fn order(&self) -> u32 {
        self.group.order()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerData {
    pub p: u64,
    /// Height `N` of the tower.
    pub n: u32,
    pub ell: Option<u64>,
    pub r: Option<u32>,
    pub base: GroupType,
    pub label: String,
    pub layers: Vec<LayerRecord>,
    pub predictions: Vec<PrintedPrediction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityPrediction {
    pub n0: u32,
    /// `(e, layer)`: `H_K[p^e]` capitulates in `K_layer`.
    pub schedule: Vec<(u32, u32)>,
    /// Layer where all of `H_K` capitulates, when inside the tower.
    pub complete_at: Option<u32>,
    pub beyond_tower: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NormCheck {
    Skipped(String),
    Checked { mismatches: Vec<NormMismatch>, checked: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormMismatch {
    /// 0-based generator index.
    pub generator: usize,
    pub printed: Vec<u64>,
    pub recomputed: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerNormReport {
    pub n: u32,
    pub norms: NormCheck,
    /// Mismatching printed `(σ-1)^i` rows, as `(i, j)`.
    pub power_mismatches: Vec<(u32, usize)>,
    pub powers_checked: usize,
}

/// Everything computed for one layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerAnalysis {
    pub n: u32,
    pub invariants: ModuleInvariants,
    pub filtration: crate::pmodule::Filtration,
    pub criterion: Option<CapitulationVerdict>,
    pub verdict: CapitulationVerdict,
}

impl LayerAnalysis {
    pub fn verdict_line(&self) -> String {
        verdict_line(self.verdict.kind, self.n, self.invariants.m, self.invariants.e)
    }
}

impl TowerData {
    /// Checks contiguity, primes, module orders and the increasing-order law.
    pub fn validate(&self) -> Result<(), TowerError> {
        let mut prev = self.base.order();
        for (i, layer) in self.layers.iter().enumerate() {
            let expected = i as u32 + 1;
            if layer.n != expected {
                return Err(TowerError::NonContiguous { expected, found: layer.n });
            }
            if let Some(m) = &layer.module {
                if m.p() != self.p {
                    return Err(TowerError::PrimeMismatch { n: layer.n, expected: self.p, found: m.p() });
                }
                if m.orders() != layer.group.exponents() {
                    return Err(TowerError::TypeMismatch {
                        n: layer.n,
                        module: m.orders().to_vec(),
                        group: layer.group.exponents().to_vec(),
                    });
                }
            }
            if layer.order() < prev {
                return Err(TowerError::DecreasingOrders { n: layer.n, prev, next: layer.order() });
            }
            prev = layer.order();
        }
        Ok(())
    }

    /// `log_p #H_{K_n}` for `n = 0, 1, ...`.
    pub fn orders(&self) -> Vec<u32> {
        std::iter::once(self.base.order())
            .chain(self.layers.iter().map(LayerRecord::order))
            .collect()
    }

    pub fn layer(&self, n: u32) -> Result<&LayerRecord, TowerError> {
        self.layers.iter().find(|l| l.n == n).ok_or(TowerError::NoLayer(n))
    }

    pub fn module(&self, n: u32) -> Result<&PGroupModule, TowerError> {
        self.layer(n)?.module.as_ref().ok_or(TowerError::NoModule { n })
    }

    /// Invariants, filtration, smooth criterion and `ν`-verdict of layer `n`.
    pub fn analyze_layer(&self, n: u32) -> Result<LayerAnalysis, TowerError> {
        let module = self.module(n)?;
        let verdict = module
            .nu_image_with_base(Some(self.base.order()))
            .map_err(|source| TowerError::Module { n, source })?;
        Ok(LayerAnalysis {
            n,
            invariants: module.invariants(),
            filtration: module.filtration(),
            criterion: module.check_sufficient_criterion(),
            verdict,
        })
    }

    /// Verdict from the printed norm vectors of layer `n`.
    pub fn ingested_verdict(&self, n: u32) -> Result<Option<CapitulationVerdict>, TowerError> {
        let layer = self.layer(n)?;
        let (Some(module), Some(norms)) = (&layer.module, &layer.printed_norms) else {
            return Ok(None);
        };
        module
            .verdict_from_witnesses(norms.clone(), Some(self.base.order()), Rule::IngestedNorms)
            .map(Some)
            .map_err(|source| TowerError::Module { n, source })
    }

    pub fn stability_index(&self) -> Option<u32> {
        stability_index(&self.orders())
    }

    /// Capitulation schedule implied by stability from `K_{n0}`.
    pub fn predict_from_stability(&self) -> Option<StabilityPrediction> {
        let n0 = self.stability_index()?;
        let ek = self.base.exponent();
        let schedule: Vec<(u32, u32)> = (1..=ek).map(|e| (e, n0 + e)).collect();
        let target = n0 + ek;
        let inside = target <= self.n;
        Some(StabilityPrediction {
            n0,
            schedule,
            complete_at: inside.then_some(target),
            beyond_tower: !inside,
        })
    }

    /// The prediction as a verdict, with its layer.
    pub fn stability_verdict(&self) -> Option<(CapitulationVerdict, u32)> {
        let pred = self.predict_from_stability()?;
        let layer = pred.complete_at?;
        Some((
            CapitulationVerdict {
                kind: VerdictKind::Complete,
                image_order: 0,
                kernel_order: Some(self.base.order()),
                witnesses: vec![],
                rule: Rule::StabilityCriterion,
            },
            layer,
        ))
    }

    /// Recomputes `ν_n(h_j)` and `h_j D^i` in every layer and compares with the transcript.
    pub fn verify_norm_vectors(&self) -> Vec<LayerNormReport> {
        self.layers
            .iter()
            .map(|layer| {
                let Some(module) = &layer.module else {
                    return LayerNormReport {
                        n: layer.n,
                        norms: NormCheck::Skipped("no σ-action data".into()),
                        power_mismatches: vec![],
                        powers_checked: 0,
                    };
                };
                let norms = match &layer.printed_norms {
                    None => NormCheck::Skipped("no printed norms".into()),
                    Some(printed) => {
                        let recomputed = module.nu_images_sum();
                        let mismatches = printed
                            .iter()
                            .zip(&recomputed)
                            .enumerate()
                            .filter(|(_, (a, b))| module.reduce(a) != **b)
                            .map(|(generator, (a, b))| NormMismatch {
                                generator,
                                printed: a.clone(),
                                recomputed: b.clone(),
                            })
                            .collect();
                        NormCheck::Checked { mismatches, checked: printed.len() }
                    }
                };
                let mut power_mismatches = Vec::new();
                for (i, j, v) in &layer.printed_powers {
                    let row = &module.delta_power(*i)[*j];
                    if module.reduce(v) != *row {
                        power_mismatches.push((*i, *j));
                    }
                }
                LayerNormReport { n: layer.n, norms, power_mismatches, powers_checked: layer.printed_powers.len() }
            })
            .collect()
    }
}

/// Smallest `n0` with `orders[n0 + 1] = orders[n0]`.
pub fn stability_index(orders: &[u32]) -> Option<u32> {
    orders.windows(2).position(|w| w[0] == w[1]).map(|i| i as u32)
}

/// `log_p #H^{G_n} = hK + n(r-1) - norm_index`.
pub fn chevalley_herbrand(hk: u32, r: u32, n: u32, norm_index: u32) -> Result<u32, TowerError> {
    let max = n * r.saturating_sub(1);
    if norm_index > max {
        return Err(TowerError::NormIndex { index: norm_index, max });
    }
    Ok(hk + max - norm_index)
}

/// Valuations entering the order ledger of layer `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenusLedger {
    pub hk: u32,
    /// `log_p #(J(H_K) · H^ram)`, the combined subgroup.
    pub j_ram: u32,
    /// `log_p #H^ram` alone, when known separately.
    pub ram_order: Option<u32>,
    /// `log_p #J(H_K)` alone, when known separately.
    pub j_image: Option<u32>,
    /// `log_p #(E_K / N(E_L))`.
    pub unit_quotient: u32,
    /// `log_p (E_K : E_K ∩ N(L^×))`, informational.
    pub norm_index: Option<u32>,
    pub n: u32,
    pub r: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LedgerCheck {
    pub pass: bool,
    /// `(j_ram + unit_quotient) - (hk + n(r-1))`.
    pub residual: i64,
    /// `j_image + ram_order - j_ram`, when both parts are known: a positive
    /// value means the two subgroups intersect and the naive sum over-counts.
    pub overlap: Option<i64>,
}

/// `#(J·H^ram) · #(E_K/N(E_L)) = #H_K · p^{n(r-1)}` on valuations.
pub fn genus_ledger_check(l: &GenusLedger) -> LedgerCheck {
    let lhs = l.j_ram as i64 + l.unit_quotient as i64;
    let rhs = l.hk as i64 + (l.n as i64) * (l.r as i64 - 1).max(0);
    let overlap = match (l.j_image, l.ram_order) {
        (Some(j), Some(r)) => Some(j as i64 + r as i64 - l.j_ram as i64),
        _ => None,
    };
    LedgerCheck { pass: lhs == rhs, residual: lhs - rhs, overlap }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthViolation {
    pub n: usize,
    pub h: u32,
    /// `log_p #X_{n+h}`.
    pub lhs: u32,
    /// `log_p #X_n + log_p #X_n[p^h]`.
    pub rhs: u32,
}

/// Checks `#X_{n+h} >= #X_n · #X_n[p^h]` for all `n`, `h >= 1` in range.
pub fn nocap_growth_check(orders: &[u32], torsion: impl Fn(usize, u32) -> u32) -> Vec<GrowthViolation> {
    let mut out = Vec::new();
    for n in 0..orders.len() {
        for h in 1..(orders.len() - n) as u32 {
            let lhs = orders[n + h as usize];
            let rhs = orders[n] + torsion(n, h);
            if lhs < rhs {
                out.push(GrowthViolation { n, h, lhs, rhs });
            }
        }
    }
    out
}

/// [`nocap_growth_check`] with torsion read from group types.
pub fn nocap_growth_check_types(types: &[GroupType]) -> Vec<GrowthViolation> {
    let orders: Vec<u32> = types.iter().map(GroupType::order).collect();
    nocap_growth_check(&orders, |n, h| types[n].torsion(h))
}

/// Pairs `(n, h)` where the growth inequality holds with equality.
pub fn growth_equalities(types: &[GroupType]) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for n in 0..types.len() {
        for h in 1..(types.len() - n) as u32 {
            if types[n + h as usize].order() == types[n].order() + types[n].torsion(h) {
                out.push((n, h));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FitFlag {
    NonIntegral,
    Negative,
}

/// `log_p #H_{K_n} = λ n + μ p^n + ν`, solved on the last three layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IwasawaFit {
    pub lambda: BigRational,
    pub mu: BigRational,
    pub nu: BigRational,
    /// `orders[n] - (λ n + μ p^n + ν)` for every `n`.
    pub residuals: Vec<BigRational>,
    pub flags: Vec<FitFlag>,
}

impl IwasawaFit {
    pub fn is_exact(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }

    pub fn integers(&self) -> Option<(i64, i64, i64)> {
        let f = |x: &BigRational| -> Option<i64> { x.is_integer().then(|| x.to_integer().try_into().ok())? };
        Some((f(&self.lambda)?, f(&self.mu)?, f(&self.nu)?))
    }
}

/// `orders[n]` is `log_p #H_{K_n}` with `n = 0, 1, ...`.
pub fn iwasawa_fit(orders: &[u32], p: u64) -> Result<IwasawaFit, TowerError> {
    if orders.len() < 3 {
        return Err(TowerError::TooShort(3));
    }
    let r = |x: i64| BigRational::from_integer(BigInt::from(x));
    let pw = |n: usize| BigRational::from_integer(BigInt::from(p).pow(n as u32));
    let k = orders.len() - 3;
    let rows: Vec<[BigRational; 3]> = (k..k + 3).map(|n| [r(n as i64), pw(n), r(1)]).collect();
    let rhs: Vec<BigRational> = (k..k + 3).map(|n| r(orders[n] as i64)).collect();
    let det3 = |m: &[[BigRational; 3]]| -> BigRational {
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    };
    let d = det3(&rows);
    assert!(!d.is_zero(), "distinct layers give an invertible system");
    let solve = |col: usize| {
        let mut m = rows.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[col] = rhs[i].clone();
        }
        det3(&m) / &d
    };
    let (lambda, mu, nu) = (solve(0), solve(1), solve(2));
    let residuals = orders
        .iter()
        .enumerate()
        .map(|(n, &o)| r(o as i64) - (&lambda * r(n as i64) + &mu * pw(n) + &nu))
        .collect();
    let mut flags = Vec::new();
    if [&lambda, &mu, &nu].iter().any(|x| !x.is_integer()) {
        flags.push(FitFlag::NonIntegral);
    }
    if [&lambda, &mu, &nu].iter().any(|x| x.is_negative()) {
        flags.push(FitFlag::Negative);
    }
    Ok(IwasawaFit { lambda, mu, nu, residuals, flags })
}

/// Per-layer comparison of `type(H_{K_n})` with `type(H_K) ⊕ (Z/p^n)^λ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitCheck {
    pub holds: bool,
    /// `(n, observed, expected)` for layers that differ.
    pub differences: Vec<(u32, GroupType, GroupType)>,
}

pub fn grandet_jaulent_check(tower: &TowerData, lambda: u32) -> SplitCheck {
    let differences: Vec<(u32, GroupType, GroupType)> = tower
        .layers
        .iter()
        .filter_map(|l| {
            let expected = tower.base.direct_sum(&GroupType::new(vec![l.n; lambda as usize]));
            (expected != l.group).then(|| (l.n, l.group.clone(), expected))
        })
        .collect();
    SplitCheck { holds: differences.is_empty(), differences }
}
