//! Monte Carlo simulation of the filtration algorithm under a stated
//! probability model.
//!
//! The conjecture gives two per-event probabilities: the norm class of a
//! random ideal equals a given class of `H_K` with probability `1/#H_K`, and
//! a random element has trivial Hasse symbols at the `r - 1` independent
//! ramified places with probability `1/p^{N(r-1)}`. It does not give a full
//! stochastic process. Model `CP-1` fills that gap as follows.
//!
//! * `H_K` is modelled by `hK` class units and `G^{r-1}` by `N(r-1)` norm
//!   units, each of order `p`.
//! * In every round each unit that is still unhit survives with probability
//!   `1/p` (a uniform draw from `Z/p` landing on one value), so the whole
//!   draw avoids every unit with probability `1/#H_K`, resp. `1/p^{N(r-1)}`.
//!   Rounds are independent.
//! * Step `i` has class factor `p^{c_i}` and norm factor `p^{ρ_i}`, where
//!   `c_i`, `ρ_i` count the units unhit after `i` rounds, and
//!   `#(H^{i+1}/H^i) = p^{c_i + ρ_i}`. Thus `c_i ~ Bin(hK, p^{-i})`.
//! * `m` is the first `i` with a trivial quotient. The exponent `e` is the
//!   longest lifetime of a class unit, capped at `hK`.
//! * The trial counts as a capitulation when `hK = 0` or `(m, e)` is smooth
//!   for `N`.
//!
//! Trial `t` draws from `ChaCha8Rng::seed_from_u64(seed)` with stream `t`,
//! so any partition of the trial range reproduces the single run exactly.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::normpoly::is_smooth;
use crate::padic;

/// Tag written into every report.
pub const MODEL_VERSION: &str = "CP-1";

/// The assumption that goes beyond the conjecture's per-event probabilities.
pub const INDEPENDENCE_ASSUMPTION: &str =
    "draws at different filtration steps are independent, and each class or norm unit is hit independently";

/// Trials per rayon work item.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Prime(#[from] padic::PadicError),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("r must be at least 1")]
    NoRamification,
    #[error("unknown model version {0:?}")]
    Model(String),
    #[error("cannot merge reports with different configurations")]
    Incompatible,
    #[error("trial range {start}..{end} is empty or reversed")]
    Range { start: u64, end: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub r: u32,
    #[serde(rename = "hK_valuation")]
    pub hk: u32,
    pub trials: u64,
    pub seed: u64,
    pub model_version: String,
}

impl SimulationConfig {
    pub fn new(p: u64, n: u32, r: u32, hk: u32, trials: u64, seed: u64) -> Self {
        SimulationConfig {
            p,
            n,
            r,
            hk,
            trials,
            seed,
            model_version: MODEL_VERSION.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        padic::check_prime(self.p)?;
        if self.trials == 0 {
            return Err(SimulationError::NoTrials);
        }
        if self.r == 0 {
            return Err(SimulationError::NoRamification);
        }
        if self.model_version != MODEL_VERSION {
            return Err(SimulationError::Model(self.model_version.clone()));
        }
        Ok(())
    }

    /// Number of norm units, `N(r-1)`.
    pub fn norm_units(&self) -> u32 {
        self.n * (self.r - 1)
    }

    /// `E[c_i] = hK p^{-i}` under CP-1.
    pub fn expected_class_valuation(&self, i: usize) -> f64 {
        self.hk as f64 * survival(self.p, i)
    }

    /// `E[ρ_i] = N(r-1) p^{-i}` under CP-1.
    pub fn expected_norm_valuation(&self, i: usize) -> f64 {
        self.norm_units() as f64 * survival(self.p, i)
    }
}

fn survival(p: u64, i: usize) -> f64 {
    (p as f64).powi(-(i as i32))
}

/// Integer tallies of a batch of trials. Reports merge by adding tallies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub independence_assumption: String,
    /// Trials by their value of `m`.
    pub m_counts: BTreeMap<u32, u64>,
    pub capitulations: u64,
    /// `Σ c_i` and `Σ c_i²` over trials, indexed by step.
    pub class_sums: Vec<u64>,
    pub class_squares: Vec<u64>,
    /// `Σ ρ_i` and `Σ ρ_i²` over trials, indexed by step.
    pub norm_sums: Vec<u64>,
    pub norm_squares: Vec<u64>,
}

impl SimulationReport {
    fn empty(config: SimulationConfig) -> Self {
        SimulationReport {
            config,
            independence_assumption: INDEPENDENCE_ASSUMPTION.to_string(),
            m_counts: BTreeMap::new(),
            capitulations: 0,
            class_sums: Vec::new(),
            class_squares: Vec::new(),
            norm_sums: Vec::new(),
            norm_squares: Vec::new(),
        }
    }

    pub fn trials(&self) -> u64 {
        self.config.trials
    }

    pub fn capitulation_frequency(&self) -> f64 {
        self.capitulations as f64 / self.trials() as f64
    }

    /// Three binomial standard deviations of a frequency estimated from this run.
    pub fn radius(&self, frequency: f64) -> f64 {
        3.0 * (frequency * (1.0 - frequency) / self.trials() as f64).sqrt()
    }

    pub fn capitulation_radius(&self) -> f64 {
        self.radius(self.capitulation_frequency())
    }

    /// Empirical distribution of `m`.
    pub fn m_distribution(&self) -> BTreeMap<u32, f64> {
        let t = self.trials() as f64;
        self.m_counts.iter().map(|(&m, &c)| (m, c as f64 / t)).collect()
    }

    /// Number of steps with any recorded data.
    pub fn steps(&self) -> usize {
        self.class_sums.len()
    }

    pub fn mean_class_valuation(&self, i: usize) -> f64 {
        mean(&self.class_sums, i, self.trials())
    }

    pub fn mean_norm_valuation(&self, i: usize) -> f64 {
        mean(&self.norm_sums, i, self.trials())
    }

    /// Three standard errors of the mean class valuation at step `i`.
    pub fn class_radius(&self, i: usize) -> f64 {
        radius_of_mean(&self.class_sums, &self.class_squares, i, self.trials())
    }

    pub fn norm_radius(&self, i: usize) -> f64 {
        radius_of_mean(&self.norm_sums, &self.norm_squares, i, self.trials())
    }

    /// Adds the tallies of `other`; the configurations must agree except for `trials`.
    pub fn merge(&self, other: &SimulationReport) -> Result<SimulationReport, SimulationError> {
        let mut a = self.config.clone();
        let mut b = other.config.clone();
        a.trials = 0;
        b.trials = 0;
        if a != b {
            return Err(SimulationError::Incompatible);
        }
        let mut out = self.clone();
        out.config.trials += other.config.trials;
        out.absorb(other);
        Ok(out)
    }

    fn absorb(&mut self, other: &SimulationReport) {
        for (&m, &c) in &other.m_counts {
            *self.m_counts.entry(m).or_insert(0) += c;
        }
        self.capitulations += other.capitulations;
        add_into(&mut self.class_sums, &other.class_sums);
        add_into(&mut self.class_squares, &other.class_squares);
        add_into(&mut self.norm_sums, &other.norm_sums);
        add_into(&mut self.norm_squares, &other.norm_squares);
    }

    fn record(&mut self, trial: &Trial) {
        *self.m_counts.entry(trial.m).or_insert(0) += 1;
        if trial.capitulates {
            self.capitulations += 1;
        }
        for (i, (&c, &rho)) in trial.class.iter().zip(&trial.norm).enumerate() {
            bump(&mut self.class_sums, i, c as u64);
            bump(&mut self.class_squares, i, (c as u64).pow(2));
            bump(&mut self.norm_sums, i, rho as u64);
            bump(&mut self.norm_squares, i, (rho as u64).pow(2));
        }
    }

    /// Plain-text rendering. Identical reports render to identical bytes.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str(&format!("model {}\n", c.model_version));
        out.push_str(&format!("assumption {}\n", self.independence_assumption));
        out.push_str(&format!(
            "p={} N={} r={} hK_valuation={} trials={} seed={}\n",
            c.p, c.n, c.r, c.hk, c.trials, c.seed
        ));
        let f = self.capitulation_frequency();
        out.push_str(&format!(
            "capitulation frequency {:.6} +- {:.6} ({} of {})\n",
            f,
            self.capitulation_radius(),
            self.capitulations,
            c.trials
        ));
        out.push_str("m distribution\n");
        for (m, count) in &self.m_counts {
            let q = *count as f64 / c.trials as f64;
            out.push_str(&format!("  m={} {:.6} +- {:.6} ({})\n", m, q, self.radius(q), count));
        }
        out.push_str("step  mean class valuation  mean norm valuation\n");
        for i in 0..self.steps() {
            out.push_str(&format!(
                "  {:>2}  {:.6} +- {:.6}  {:.6} +- {:.6}\n",
                i,
                self.mean_class_valuation(i),
                self.class_radius(i),
                self.mean_norm_valuation(i),
                self.norm_radius(i)
            ));
        }
        out
    }
}

fn mean(sums: &[u64], i: usize, trials: u64) -> f64 {
    sums.get(i).copied().unwrap_or(0) as f64 / trials as f64
}

fn radius_of_mean(sums: &[u64], squares: &[u64], i: usize, trials: u64) -> f64 {
    let t = trials as f64;
    let mu = mean(sums, i, trials);
    let second = mean(squares, i, trials);
    let var = (second - mu * mu).max(0.0);
    3.0 * (var / t).sqrt()
}

fn bump(v: &mut Vec<u64>, i: usize, x: u64) {
    if v.len() <= i {
        v.resize(i + 1, 0);
    }
    v[i] += x;
}

fn add_into(a: &mut Vec<u64>, b: &[u64]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// One simulated run of the filtration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub m: u32,
    pub e: u32,
    /// `c_i` for `i = 0..m`.
    pub class: Vec<u32>,
    /// `ρ_i` for `i = 0..m`.
    pub norm: Vec<u32>,
    pub capitulates: bool,
}

/// Runs trial number `index` of `config`.
pub fn run_trial(config: &SimulationConfig, index: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let p = config.p;
    let mut class = config.hk;
    let mut norm = config.norm_units();
    let mut class_trace = Vec::new();
    let mut norm_trace = Vec::new();
    let mut class_life = 0u32;
    while class + norm > 0 {
        class_trace.push(class);
        norm_trace.push(norm);
        if class > 0 {
            class_life += 1;
        }
        class = (0..class).filter(|_| rng.random_range(0..p) == 0).count() as u32;
        norm = (0..norm).filter(|_| rng.random_range(0..p) == 0).count() as u32;
    }
    let m = class_trace.len() as u32;
    let e = class_life.min(config.hk);
    let capitulates = config.hk == 0 || is_smooth(m as u64, e, config.n, p);
    Trial {
        m,
        e,
        class: class_trace,
        norm: norm_trace,
        capitulates,
    }
}

/// Tallies trials `start..end` of `config`; the report's `trials` is `end - start`.
pub fn simulate_range(
    config: &SimulationConfig,
    start: u64,
    end: u64,
) -> Result<SimulationReport, SimulationError> {
    if start >= end {
        return Err(SimulationError::Range { start, end });
    }
    let mut part = config.clone();
    part.trials = end - start;
    part.validate()?;
    let chunks: Vec<u64> = (start..end).step_by(CHUNK as usize).collect();
    let mut template = config.clone();
    template.trials = 0;
    let partials: Vec<SimulationReport> = chunks
        .par_iter()
        .map(|&lo| {
            let hi = (lo + CHUNK).min(end);
            let mut rep = SimulationReport::empty(template.clone());
            for t in lo..hi {
                rep.record(&run_trial(config, t));
            }
            rep.config.trials = hi - lo;
            rep
        })
        .collect();
    let mut out = SimulationReport::empty(template);
    for rep in &partials {
        out.config.trials += rep.config.trials;
        out.absorb(rep);
    }
    Ok(out)
}

/// Runs all `config.trials` trials.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport, SimulationError> {
    config.validate()?;
    simulate_range(config, 0, config.trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u64, n: u32, r: u32, hk: u32, trials: u64) -> SimulationConfig {
        SimulationConfig::new(p, n, r, hk, trials, 7)
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(simulate(&cfg(4, 1, 1, 1, 10)), Err(SimulationError::Prime(_))));
        assert_eq!(simulate(&cfg(2, 1, 1, 1, 0)), Err(SimulationError::NoTrials));
        assert_eq!(simulate(&cfg(2, 1, 0, 1, 10)), Err(SimulationError::NoRamification));
        let mut c = cfg(2, 1, 1, 1, 10);
        c.model_version = "CP-0".into();
        assert_eq!(simulate(&c), Err(SimulationError::Model("CP-0".into())));
    }

    #[test]
    fn trivial_class_group_always_capitulates() {
        for r in 1..4 {
            let rep = simulate(&cfg(3, 2, r, 0, 2000)).unwrap();
            assert_eq!(rep.capitulations, 2000);
            assert_eq!(rep.class_sums.iter().sum::<u64>(), 0);
        }
        let rep = simulate(&cfg(3, 2, 1, 0, 100)).unwrap();
        assert_eq!(rep.m_counts, BTreeMap::from([(0, 100)]));
    }

    #[test]
    fn unramified_elsewhere_has_no_norm_factor() {
        let rep = simulate(&cfg(2, 3, 1, 3, 5000)).unwrap();
        assert!(rep.norm_sums.iter().all(|&s| s == 0));
    }

    #[test]
    fn step_zero_is_deterministic() {
        let c = cfg(5, 2, 3, 4, 1000);
        let rep = simulate(&c).unwrap();
        assert_eq!(rep.class_sums[0], 4000);
        assert_eq!(rep.norm_sums[0], 4000);
    }

    #[test]
    fn traces_are_consistent() {
        let c = cfg(2, 2, 2, 3, 1);
        for t in 0..200 {
            let tr = run_trial(&c, t);
            assert_eq!(tr.class.len(), tr.m as usize);
            assert!(tr.class.windows(2).all(|w| w[1] <= w[0]));
            assert!(tr.norm.windows(2).all(|w| w[1] <= w[0]));
            assert!(tr.e <= tr.m && tr.e <= 3);
        }
    }

    #[test]
    fn same_seed_same_report() {
        let c = cfg(2, 2, 2, 2, 20_000);
        assert_eq!(simulate(&c).unwrap().to_text(), simulate(&c).unwrap().to_text());
        let mut d = c.clone();
        d.seed = 8;
        assert_ne!(simulate(&c).unwrap(), simulate(&d).unwrap());
    }

    #[test]
    fn partitions_merge_to_the_full_run() {
        let c = cfg(3, 1, 2, 2, 10_000);
        let full = simulate(&c).unwrap();
        let a = simulate_range(&c, 0, 3_000).unwrap();
        let b = simulate_range(&c, 3_000, 8_500).unwrap();
        let d = simulate_range(&c, 8_500, 10_000).unwrap();
        assert_eq!(a.merge(&b).unwrap().merge(&d).unwrap(), full);
        assert_eq!(a.merge(&b.merge(&d).unwrap()).unwrap(), full);
        assert_eq!(d.merge(&a).unwrap().merge(&b).unwrap(), full);
    }

    #[test]
    fn merge_rejects_other_configs() {
        let a = simulate(&cfg(2, 1, 1, 1, 10)).unwrap();
        let b = simulate(&cfg(2, 2, 1, 1, 10)).unwrap();
        assert_eq!(a.merge(&b), Err(SimulationError::Incompatible));
    }

    #[test]
    fn distribution_sums_to_one() {
        let rep = simulate(&cfg(2, 2, 3, 2, 5000)).unwrap();
        let total: f64 = rep.m_distribution().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let f = rep.capitulation_frequency();
        assert!((0.0..=1.0).contains(&f));
    }
}
