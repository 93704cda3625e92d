//! Reachability objectives `Reach(F)` over an MDP.

use crate::error::{Error, Result};
use crate::mdp::{StateId, StateSet};

/// Plays that eventually visit `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachabilityObjective {
    pub name: String,
    pub target: StateSet,
}

impl ReachabilityObjective {
    pub fn new(name: impl Into<String>, target: StateSet) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptyObjective);
        }
        Ok(Self { name: name.into(), target })
    }

    pub fn from_states(
        name: impl Into<String>,
        num_states: usize,
        states: impl IntoIterator<Item = StateId>,
    ) -> Result<Self> {
        Self::new(name, StateSet::from_states(num_states, states)?)
    }
}

/// An indexed list of objectives; the index is the objective id used by the
/// preference model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Objectives(Vec<ReachabilityObjective>);

impl Objectives {
    pub fn new(objectives: Vec<ReachabilityObjective>) -> Self {
        Self(objectives)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&ReachabilityObjective> {
        self.0.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReachabilityObjective> {
        self.0.iter()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|o| o.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|o| o.name.clone()).collect()
    }
}

impl std::ops::Index<usize> for Objectives {
    type Output = ReachabilityObjective;

    fn index(&self, i: usize) -> &Self::Output {
        &self.0[i]
    }
}
