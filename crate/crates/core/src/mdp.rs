//! Explicit-state Markov decision processes.
//!
//! States and actions are dense indices. Each state owns a list of
//! [`Choice`]s, one per enabled action, holding the sparse successor
//! distribution. Probabilities are exact rationals; the qualitative
//! algorithms only ever look at supports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use num_traits::{CheckedAdd, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type StateId = usize;
pub type ActionId = usize;

/// An exact transition probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(Ratio<u64>);

impl Probability {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidProbability(format!("{numer}/{denom}")));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        self.0.checked_add(&other.0).map(Self)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Probability {
    type Err = Error;

    /// Accepts `"p/q"`, integers and plain decimals such as `"0.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidProbability(s.to_string());
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Probability::new(p, q).map_err(|_| bad());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > 18 {
            return Err(bad());
        }
        let denom = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let numer = int
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        Probability::new(numer, denom)
    }
}

/// A set of states, stored as a bitset over `0..num_states`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(num_states: usize) -> Self {
        Self(FixedBitSet::with_capacity(num_states))
    }

    pub fn full(num_states: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(num_states);
        bits.insert_range(..);
        Self(bits)
    }

    pub fn from_states(num_states: usize, states: impl IntoIterator<Item = StateId>) -> Result<Self> {
        let mut set = Self::empty(num_states);
        for s in states {
            if s >= num_states {
                return Err(Error::StateOutOfRange { index: s, len: num_states });
            }
            set.insert(s);
        }
        Ok(set)
    }

    /// Size of the underlying state space, not the number of members.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.0.contains(s)
    }

    pub fn insert(&mut self, s: StateId) -> bool {
        !self.0.put(s)
    }

    pub fn remove(&mut self, s: StateId) {
        self.0.set(s, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union_with(&mut self, other: &Self) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.0.intersect_with(&other.0);
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !self.0.is_disjoint(&other.0)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The distribution reached by playing `action` in some state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice {
    pub action: ActionId,
    /// Sorted by successor index, without duplicates.
    pub successors: Vec<(StateId, Probability)>,
}

impl Choice {
    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.successors.iter().map(|&(t, _)| t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    actions: Vec<String>,
    initial: StateId,
    /// Per state, the enabled actions in increasing action order.
    choices: Vec<Vec<Choice>>,
}

impl Mdp {
    /// Assembles a model from per-state choice lists. Choices are sorted by
    /// action; successor lists must already be sorted and deduplicated.
    pub(crate) fn from_choices(actions: Vec<String>, initial: StateId, mut choices: Vec<Vec<Choice>>) -> Self {
        for cs in &mut choices {
            cs.sort_by_key(|c| c.action);
        }
        Self { actions, initial, choices }
    }

    pub fn num_states(&self) -> usize {
        self.choices.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn choices(&self, s: StateId) -> &[Choice] {
        &self.choices[s]
    }

    pub fn choice(&self, s: StateId, a: ActionId) -> Option<&Choice> {
        self.choices[s]
            .binary_search_by_key(&a, |c| c.action)
            .ok()
            .map(|i| &self.choices[s][i])
    }

    pub fn enabled(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.choices[s].iter().map(|c| c.action)
    }

    pub fn is_enabled(&self, s: StateId, a: ActionId) -> bool {
        self.choice(s, a).is_some()
    }

    /// Number of `(state, action, successor)` triples with positive probability.
    pub fn num_transitions(&self) -> usize {
        self.choices
            .iter()
            .flatten()
            .map(|c| c.successors.iter().filter(|(_, p)| !p.is_zero()).count())
            .sum()
    }

    /// Whether `to` can follow `from` under some enabled action.
    pub fn has_edge(&self, from: StateId, to: StateId) -> bool {
        self.choices[from]
            .iter()
            .any(|c| c.successors.iter().any(|&(t, p)| t == to && !p.is_zero()))
    }

    /// For every state, the `(predecessor, action)` pairs that can move into it.
    pub fn predecessors(&self) -> Vec<Vec<(StateId, ActionId)>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for (s, cs) in self.choices.iter().enumerate() {
            for c in cs {
                for &(t, p) in &c.successors {
                    if !p.is_zero() {
                        pred[t].push((s, c.action));
                    }
                }
            }
        }
        pred
    }

    /// Checks the model invariants and lists every violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.initial >= self.num_states() {
            violations.push(Violation::InitialOutOfRange { initial: self.initial });
        }
        for (s, cs) in self.choices.iter().enumerate() {
            if cs.is_empty() {
                violations.push(Violation::NoEnabledAction { state: s });
            }
            for c in cs {
                let mut exact = Some(Probability::zero());
                let mut approx = 0.0;
                for &(t, p) in &c.successors {
                    if t >= self.num_states() {
                        violations.push(Violation::SuccessorOutOfRange { state: s, action: c.action, successor: t });
                    }
                    if p.is_zero() {
                        violations.push(Violation::ZeroProbability { state: s, action: c.action, successor: t });
                    }
                    exact = exact.and_then(|acc| acc.checked_add(&p));
                    approx += p.to_f64();
                }
                let ok = match exact {
                    Some(sum) => sum.is_one(),
                    None => (approx - 1.0).abs() <= 1e-9,
                };
                if !ok {
                    let sum = exact.map_or_else(|| format!("{approx}"), |p| p.to_string());
                    violations.push(Violation::ProbabilitySum { state: s, action: c.action, sum });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report.violations))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    InitialOutOfRange { initial: StateId },
    NoEnabledAction { state: StateId },
    ProbabilitySum { state: StateId, action: ActionId, sum: String },
    ZeroProbability { state: StateId, action: ActionId, successor: StateId },
    SuccessorOutOfRange { state: StateId, action: ActionId, successor: StateId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialOutOfRange { initial } => write!(f, "initial state {initial} out of range"),
            Violation::NoEnabledAction { state } => write!(f, "state {state} has no enabled action"),
            Violation::ProbabilitySum { state, action, sum } => {
                write!(f, "state {state}, action {action}: probabilities sum to {sum}, expected 1")
            }
            Violation::ZeroProbability { state, action, successor } => {
                write!(f, "state {state}, action {action}: zero probability to {successor}")
            }
            Violation::SuccessorOutOfRange { state, action, successor } => {
                write!(f, "state {state}, action {action}: successor {successor} out of range")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Free-form construction of an [`Mdp`]. Repeated `(src, action, dst)`
/// entries are merged by adding their probabilities.
#[derive(Clone, Debug)]
pub struct MdpBuilder {
    num_states: usize,
    actions: Vec<String>,
    initial: StateId,
    transitions: BTreeMap<(StateId, ActionId), BTreeMap<StateId, Probability>>,
}

impl MdpBuilder {
    pub fn new<S: Into<String>>(num_states: usize, actions: impl IntoIterator<Item = S>) -> Self {
        Self {
            num_states,
            actions: actions.into_iter().map(Into::into).collect(),
            initial: 0,
            transitions: BTreeMap::new(),
        }
    }

    pub fn initial(mut self, s: StateId) -> Self {
        self.initial = s;
        self
    }

    pub fn add_transition(&mut self, src: StateId, action: ActionId, dst: StateId, p: Probability) -> Result<&mut Self> {
        for s in [src, dst] {
            if s >= self.num_states {
                return Err(Error::StateOutOfRange { index: s, len: self.num_states });
            }
        }
        if action >= self.actions.len() {
            return Err(Error::ActionOutOfRange { index: action, len: self.actions.len() });
        }
        let entry = self.transitions.entry((src, action)).or_default().entry(dst).or_insert(Probability::zero());
        *entry = entry
            .checked_add(&p)
            .ok_or_else(|| Error::InvalidProbability(format!("{entry} + {p}")))?;
        Ok(self)
    }

    /// Convenience for hand-written models: `p` is parsed like a file entry.
    pub fn transition(mut self, src: StateId, action: ActionId, dst: StateId, p: &str) -> Result<Self> {
        let p: Probability = p.parse()?;
        self.add_transition(src, action, dst, p)?;
        Ok(self)
    }

    pub fn build(self) -> Result<Mdp> {
        if self.num_states > 0 && self.initial >= self.num_states {
            return Err(Error::StateOutOfRange { index: self.initial, len: self.num_states });
        }
        let mut choices = vec![Vec::new(); self.num_states];
        for ((s, a), succ) in self.transitions {
            choices[s].push(Choice { action: a, successors: succ.into_iter().collect() });
        }
        Ok(Mdp::from_choices(self.actions, self.initial, choices))
    }
}

/// A finite state sequence in which every step is possible under some
/// enabled action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Play {
    states: Vec<StateId>,
}

impl Play {
    pub fn new(mdp: &Mdp, states: Vec<StateId>) -> Result<Self> {
        for (i, &s) in states.iter().enumerate() {
            if s >= mdp.num_states() {
                return Err(Error::StateOutOfRange { index: s, len: mdp.num_states() });
            }
            if i > 0 && !mdp.has_edge(states[i - 1], s) {
                return Err(Error::InvalidTransition { position: i, from: states[i - 1], to: s });
            }
        }
        Ok(Self { states })
    }

    pub(crate) fn from_trusted(states: Vec<StateId>) -> Self {
        Self { states }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<StateId> {
        self.states.last().copied()
    }

    /// The set of states occurring in the play.
    pub fn occurrences(&self, num_states: usize) -> StateSet {
        let mut occ = StateSet::empty(num_states);
        for &s in &self.states {
            occ.insert(s);
        }
        occ
    }

    pub fn prefix(&self, len: usize) -> Play {
        Play { states: self.states[..len.min(self.states.len())].to_vec() }
    }
}
