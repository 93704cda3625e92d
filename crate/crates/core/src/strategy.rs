//! Memoryless, set-valued strategies.

use crate::mdp::{ActionId, Mdp, StateId, StateSet};

/// A permissive memoryless strategy: for every state, the set of actions
/// the agent may pick. An empty set means the state is outside the
/// strategy's domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    allowed: Vec<Vec<ActionId>>,
}

impl Strategy {
    pub fn empty(num_states: usize) -> Self {
        Self { allowed: vec![Vec::new(); num_states] }
    }

    /// Every enabled action everywhere.
    pub fn all_enabled(mdp: &Mdp) -> Self {
        Self {
            allowed: (0..mdp.num_states()).map(|s| mdp.enabled(s).collect()).collect(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.allowed.len()
    }

    pub fn set(&mut self, s: StateId, mut actions: Vec<ActionId>) {
        actions.sort_unstable();
        actions.dedup();
        self.allowed[s] = actions;
    }

    pub fn allowed(&self, s: StateId) -> &[ActionId] {
        &self.allowed[s]
    }

    pub fn allows(&self, s: StateId, a: ActionId) -> bool {
        self.allowed[s].binary_search(&a).is_ok()
    }

    /// States with at least one allowed action.
    pub fn domain(&self) -> StateSet {
        let mut dom = StateSet::empty(self.allowed.len());
        for (s, acts) in self.allowed.iter().enumerate() {
            if !acts.is_empty() {
                dom.insert(s);
            }
        }
        dom
    }

    /// Fixed tie-breaking: the lowest allowed action index.
    pub fn deterministic(&self) -> Vec<Option<ActionId>> {
        self.allowed.iter().map(|a| a.first().copied()).collect()
    }

    /// Every allowed action is enabled in `mdp`.
    pub fn is_consistent_with(&self, mdp: &Mdp) -> bool {
        self.allowed.len() == mdp.num_states()
            && self
                .allowed
                .iter()
                .enumerate()
                .all(|(s, acts)| acts.iter().all(|&a| mdp.is_enabled(s, a)))
    }
}
