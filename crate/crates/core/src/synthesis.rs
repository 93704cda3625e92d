//! Improving strategies, level sets and ranks on an improvement MDP.
//!
//! Reaching `𝓕` in the product means making an improving step in the base
//! model. The positive and almost-sure winning strategies for `𝓕` give SPI
//! and SASI strategies; iterating the construction on the flag-1 states
//! whose flag-0 twin can still win yields the level sets and, from them,
//! the number of improvements that can be guaranteed from each state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::improvement::{product_index, split_index, ImprovementMdp};
use crate::mdp::{ActionId, Mdp, StateId, StateSet};
use crate::reach::{almost_sure_unchecked, positive_region_unchecked, positive_winning_strategy};
use crate::strategy::Strategy;

/// Which qualitative guarantee a computation targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Positive probability: safe and positively improving.
    Spi,
    /// Probability one: safe and almost-surely improving.
    Sasi,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spi => "spi",
            Mode::Sasi => "sasi",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spi" | "positive" => Ok(Mode::Spi),
            "sasi" | "almost-sure" | "almost_sure" => Ok(Mode::Sasi),
            other => Err(Error::Format(format!("unknown mode `{other}` (expected spi or sasi)"))),
        }
    }
}

/// Winning region and permissive strategy for `target` in the product.
/// An empty target yields empty results rather than an error.
fn solve(product: &Mdp, target: &StateSet, mode: Mode) -> (StateSet, Strategy) {
    if target.is_empty() {
        return (StateSet::empty(product.num_states()), Strategy::empty(product.num_states()));
    }
    match mode {
        Mode::Sasi => almost_sure_unchecked(product, target),
        Mode::Spi => (positive_region_unchecked(product, target), positive_winning_strategy(product, target)),
    }
}

fn region(product: &Mdp, target: &StateSet, mode: Mode) -> StateSet {
    if target.is_empty() {
        return StateSet::empty(product.num_states());
    }
    match mode {
        Mode::Sasi => crate::reach::almost_sure_region_unchecked(product, target),
        Mode::Spi => positive_region_unchecked(product, target),
    }
}

/// Positive winning strategy for `𝓕` on the product.
pub fn spi_strategy(imdp: &ImprovementMdp) -> Strategy {
    solve(imdp.product(), imdp.final_states(), Mode::Spi).1
}

/// Almost-sure winning strategy for `𝓕` on the product.
pub fn sasi_strategy(imdp: &ImprovementMdp) -> Strategy {
    solve(imdp.product(), imdp.final_states(), Mode::Sasi).1
}

pub fn improving_strategy(imdp: &ImprovementMdp, mode: Mode) -> (StateSet, Strategy) {
    solve(imdp.product(), imdp.final_states(), mode)
}

/// Output of the level-set iteration.
///
/// `levels[i]` is `W_{i+1}` and `targets[i]` is `R_i`, with `R_0 = 𝓕`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSets {
    pub mode: Mode,
    pub levels: Vec<StateSet>,
    pub targets: Vec<StateSet>,
    /// False when the targets stopped shrinking while still nonempty.
    pub bounded: bool,
    num_states: usize,
}

impl LevelSets {
    pub fn num_product_states(&self) -> usize {
        self.num_states
    }

    /// `W_k` for `k >= 1`.
    pub fn level(&self, k: usize) -> Option<&StateSet> {
        k.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    /// States in no level: `V \ W_1`.
    pub fn level_zero(&self) -> StateSet {
        let mut rest = StateSet::full(self.num_states);
        if let Some(w1) = self.levels.first() {
            for v in w1.iter() {
                rest.remove(v);
            }
        }
        rest
    }

    pub fn is_nested(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].is_subset(&w[0])) && self.targets.windows(2).all(|w| w[1].is_subset(&w[0]))
    }
}

pub fn sasi_level_sets(imdp: &ImprovementMdp) -> LevelSets {
    level_sets(imdp, Mode::Sasi)
}

pub fn spi_level_sets(imdp: &ImprovementMdp) -> LevelSets {
    level_sets(imdp, Mode::Spi)
}

pub fn level_sets(imdp: &ImprovementMdp, mode: Mode) -> LevelSets {
    let product = imdp.product();
    let n = product.num_states();
    let mut levels = Vec::new();
    let mut targets = vec![imdp.final_states().clone()];
    let mut bounded = true;
    while let Some(current) = targets.last().filter(|r| !r.is_empty()) {
        let win = region(product, current, mode);
        let mut next = StateSet::empty(n);
        for s in 0..imdp.num_base_states() {
            if win.contains(product_index(s, false)) {
                next.insert(product_index(s, true));
            }
        }
        let stalled = &next == current;
        levels.push(win);
        targets.push(next);
        if stalled {
            bounded = false;
            break;
        }
    }
    LevelSets { mode, levels, targets, bounded, num_states: n }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(usize),
    Unbounded,
}

impl Rank {
    pub fn finite(self) -> Option<usize> {
        match self {
            Rank::Finite(k) => Some(k),
            Rank::Unbounded => None,
        }
    }

    pub fn at_least(self, k: usize) -> bool {
        match self {
            Rank::Finite(r) => r >= k,
            Rank::Unbounded => true,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::Unbounded => f.write_str("unbounded"),
        }
    }
}

fn rank_of_base(levels: &LevelSets, s: StateId) -> Rank {
    let v0 = product_index(s, false);
    let k = levels.levels.iter().take_while(|w| w.contains(v0)).count();
    if !levels.bounded && k == levels.levels.len() && k > 0 {
        Rank::Unbounded
    } else {
        Rank::Finite(k)
    }
}

/// Largest `k` with `(s, 0)` in `W_k`, for either copy of `s`.
pub fn rank_of(imdp: &ImprovementMdp, levels: &LevelSets, v: StateId) -> Result<Rank> {
    if levels.num_states != imdp.num_states() {
        return Err(Error::ProductMismatch { expected: levels.num_states, found: imdp.num_states() });
    }
    if v >= imdp.num_states() {
        return Err(Error::StateOutOfRange { index: v, len: imdp.num_states() });
    }
    Ok(rank_of_base(levels, split_index(v).0))
}

/// Ranks of all base states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTable {
    pub mode: Mode,
    pub ranks: Vec<Rank>,
}

impl RankTable {
    pub fn from_levels(levels: &LevelSets) -> Self {
        let n = levels.num_states / 2;
        Self { mode: levels.mode, ranks: (0..n).map(|s| rank_of_base(levels, s)).collect() }
    }

    pub fn get(&self, s: StateId) -> Rank {
        self.ranks[s]
    }

    pub fn max_rank(&self) -> Rank {
        self.ranks.iter().copied().max().unwrap_or(Rank::Finite(0))
    }

    pub fn has_unbounded(&self) -> bool {
        self.ranks.contains(&Rank::Unbounded)
    }

    /// `counts[k - 1]` = number of base states with rank at least `k`, for
    /// `k = 1..=max finite rank`. Unbounded states count towards every `k`.
    pub fn histogram(&self) -> Vec<usize> {
        let top = self.ranks.iter().filter_map(|r| r.finite()).max().unwrap_or(0);
        (1..=top).map(|k| self.ranks.iter().filter(|r| r.at_least(k)).count()).collect()
    }
}

/// Anything that picks allowed actions from the current product state and a
/// memory value.
pub trait Policy {
    fn initial_memory(&self, start: StateId) -> usize;
    fn allowed(&self, v: StateId, memory: usize) -> &[ActionId];
    /// Memory after moving into `next`.
    fn update(&self, memory: usize, next: StateId) -> usize;
}

impl Policy for Strategy {
    fn initial_memory(&self, _start: StateId) -> usize {
        0
    }

    fn allowed(&self, v: StateId, _memory: usize) -> &[ActionId] {
        Strategy::allowed(self, v)
    }

    fn update(&self, _memory: usize, _next: StateId) -> usize {
        0
    }
}

/// A strategy that owes `c` further improvements.
///
/// With `c = k > 0` it plays the permissive winning strategy for `R_{k-1}`,
/// always read at the flag-0 copy of the current base state. Both copies
/// offer the same successors, and the flag-0 copy is never itself a
/// target, so this forces a fresh entry into `R_{k-1}` even right after an
/// improvement. Entering `R_{k-1}` decrements the counter. At `c = 0` every
/// action of the product is allowed; the product has already removed the
/// unsafe ones.
#[derive(Clone, Debug)]
pub struct CounterStrategy {
    pub mode: Mode,
    phases: Vec<Strategy>,
    targets: Vec<StateSet>,
    safe: Strategy,
    ranks: RankTable,
}

pub fn composed_strategy(imdp: &ImprovementMdp, levels: &LevelSets) -> Result<CounterStrategy> {
    if !levels.bounded {
        return Err(Error::UnboundedRank);
    }
    if levels.num_states != imdp.num_states() {
        return Err(Error::ProductMismatch { expected: levels.num_states, found: imdp.num_states() });
    }
    let product = imdp.product();
    let phases = levels.targets[..levels.levels.len()]
        .iter()
        .map(|r| solve(product, r, levels.mode).1)
        .collect();
    Ok(CounterStrategy {
        mode: levels.mode,
        phases,
        targets: levels.targets[..levels.levels.len()].to_vec(),
        safe: Strategy::all_enabled(product),
        ranks: RankTable::from_levels(levels),
    })
}

/// Composed strategy over the almost-sure level sets.
pub fn composed_sasi_strategy(imdp: &ImprovementMdp, levels: &LevelSets) -> Result<CounterStrategy> {
    if levels.mode != Mode::Sasi {
        return Err(Error::ModeMismatch { expected: "sasi", found: levels.mode.as_str() });
    }
    composed_strategy(imdp, levels)
}

/// Composed strategy over the positive level sets.
pub fn composed_spi_strategy(imdp: &ImprovementMdp, levels: &LevelSets) -> Result<CounterStrategy> {
    if levels.mode != Mode::Spi {
        return Err(Error::ModeMismatch { expected: "spi", found: levels.mode.as_str() });
    }
    composed_strategy(imdp, levels)
}

impl CounterStrategy {
    pub fn max_counter(&self) -> usize {
        self.phases.len()
    }

    pub fn rank_table(&self) -> &RankTable {
        &self.ranks
    }

    /// Counter value at `start`: its rank.
    pub fn counter_init(&self, start: StateId) -> usize {
        self.ranks.get(split_index(start).0).finite().unwrap_or(0)
    }

    /// The memoryless strategy used while `c` improvements are owed.
    pub fn phase(&self, c: usize) -> &Strategy {
        if c == 0 {
            &self.safe
        } else {
            &self.phases[c - 1]
        }
    }

    pub fn target(&self, c: usize) -> Option<&StateSet> {
        c.checked_sub(1).map(|i| &self.targets[i])
    }
}

impl Policy for CounterStrategy {
    fn initial_memory(&self, start: StateId) -> usize {
        self.counter_init(start)
    }

    fn allowed(&self, v: StateId, c: usize) -> &[ActionId] {
        if c == 0 {
            self.safe.allowed(v)
        } else {
            self.phases[c - 1].allowed(product_index(split_index(v).0, false))
        }
    }

    fn update(&self, c: usize, next: StateId) -> usize {
        if c > 0 && self.targets[c - 1].contains(next) {
            c - 1
        } else {
            c
        }
    }
}
