//! Preorders over objectives and the most-preferred (MP) operator.
//!
//! A [`PreferenceModel`] is the reflexive-transitive closure of user edges
//! `i ⊵ j`. Strict preference is the one-directional part of the closure;
//! indifference (both directions) is allowed.
//!
//! With the bottom convention enabled, an empty set of outcomes is
//! represented by [`MpSet::Bottom`], which every objective strictly beats.
//! Gaining a first outcome then counts as an improvement and losing every
//! outcome as a weakening.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, Play, StateId};
use crate::objective::Objectives;

/// A subset of objective indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ObjectiveSet(FixedBitSet);

impl ObjectiveSet {
    pub fn empty(n: usize) -> Self {
        Self(FixedBitSet::with_capacity(n))
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(n);
        for i in indices {
            if i >= n {
                return Err(Error::ObjectiveOutOfRange { index: i, len: n });
            }
            set.0.insert(i);
        }
        Ok(set)
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }
}

impl fmt::Debug for ObjectiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    StrictlyPreferred,
    StrictlyWorse,
    Indifferent,
    Incomparable,
}

/// Ordering of two plays induced by their MP sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlayOrder {
    Better,
    Worse,
    Equivalent,
    Incomparable,
}

impl PlayOrder {
    pub fn mirror(self) -> Self {
        match self {
            PlayOrder::Better => PlayOrder::Worse,
            PlayOrder::Worse => PlayOrder::Better,
            other => other,
        }
    }
}

impl fmt::Display for PlayOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlayOrder::Better => "≻",
            PlayOrder::Worse => "≺",
            PlayOrder::Equivalent => "∼",
            PlayOrder::Incomparable => "∥",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceModel {
    n: usize,
    /// `weak[i]` holds every `j` with `i ⊵ j`.
    weak: Vec<FixedBitSet>,
    bottom: bool,
}

/// Reflexive-transitive closure of `edges`, where `(i, j)` reads
/// "`i` is weakly preferred to `j`". The bottom convention is on.
pub fn close_preorder(edges: &[(usize, usize)], n: usize) -> Result<PreferenceModel> {
    let mut weak: Vec<FixedBitSet> = (0..n)
        .map(|i| {
            let mut row = FixedBitSet::with_capacity(n);
            row.insert(i);
            row
        })
        .collect();
    for &(i, j) in edges {
        for k in [i, j] {
            if k >= n {
                return Err(Error::ObjectiveOutOfRange { index: k, len: n });
            }
        }
        weak[i].insert(j);
    }
    // Warshall over bit rows
    for k in 0..n {
        let row_k = weak[k].clone();
        for row in weak.iter_mut() {
            if row.contains(k) {
                row.union_with(&row_k);
            }
        }
    }
    Ok(PreferenceModel { n, weak, bottom: true })
}

impl PreferenceModel {
    /// Builds a model from named strict edges `(better, worse)`. Returns the
    /// model and one warning per edge that the closure turned into an
    /// indifference.
    pub fn from_named_edges(
        names: &[String],
        prefers: &[(String, String)],
        bottom: bool,
    ) -> Result<(Self, Vec<String>)> {
        let index = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownObjective(name.to_string()))
        };
        let edges = prefers
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let model = close_preorder(&edges, names.len())?.with_bottom(bottom);
        let warnings = edges
            .iter()
            .filter(|&&(i, j)| model.compare(i, j) != Comparison::StrictlyPreferred)
            .map(|&(i, j)| {
                format!("preference {} over {} collapses into indifference after closure", names[i], names[j])
            })
            .collect();
        Ok((model, warnings))
    }

    pub fn with_bottom(mut self, bottom: bool) -> Self {
        self.bottom = bottom;
        self
    }

    pub fn bottom_enabled(&self) -> bool {
        self.bottom
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weakly_prefers(&self, i: usize, j: usize) -> bool {
        self.weak[i].contains(j)
    }

    /// `i ▷ j`.
    pub fn strictly_prefers(&self, i: usize, j: usize) -> bool {
        self.weak[i].contains(j) && !self.weak[j].contains(i)
    }

    pub fn compare(&self, i: usize, j: usize) -> Comparison {
        match (self.weakly_prefers(i, j), self.weakly_prefers(j, i)) {
            (true, true) => Comparison::Indifferent,
            (true, false) => Comparison::StrictlyPreferred,
            (false, true) => Comparison::StrictlyWorse,
            (false, false) => Comparison::Incomparable,
        }
    }

    /// `MP(subset)`: the members with no strictly better member in `subset`.
    pub fn maximal_elements(&self, subset: &ObjectiveSet) -> MpSet {
        if subset.is_empty() {
            return if self.bottom { MpSet::Bottom } else { MpSet::Objectives(ObjectiveSet::empty(self.n)) };
        }
        let mut mp = ObjectiveSet::empty(self.n);
        for r in subset.iter() {
            if !subset.iter().any(|other| self.strictly_prefers(other, r)) {
                mp.insert(r);
            }
        }
        MpSet::Objectives(mp)
    }

    fn element_beats(&self, x: Elem, y: Elem) -> bool {
        match (x, y) {
            (Elem::Objective(i), Elem::Objective(j)) => self.strictly_prefers(i, j),
            (Elem::Objective(_), Elem::Bottom) => true,
            (Elem::Bottom, _) => false,
        }
    }

    fn any_pair(&self, better_side: &MpSet, worse_side: &MpSet) -> bool {
        better_side
            .elements()
            .any(|x| worse_side.elements().any(|y| self.element_beats(x, y)))
    }

    /// Flags for a change of MP set from `from` to `to`.
    pub fn classify_mp_transition(&self, from: &MpSet, to: &MpSet) -> TransitionFlags {
        TransitionFlags {
            improving: self.any_pair(to, from),
            weakening: self.any_pair(from, to),
        }
    }

    pub fn compare_plays(&self, a: &MpSet, b: &MpSet) -> PlayOrder {
        if a == b {
            return PlayOrder::Equivalent;
        }
        match (self.any_pair(a, b), self.any_pair(b, a)) {
            (true, false) => PlayOrder::Better,
            (false, true) => PlayOrder::Worse,
            _ => PlayOrder::Incomparable,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Elem {
    Bottom,
    Objective(usize),
}

/// An antichain of objectives, or the bottom marker.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MpSet {
    Bottom,
    Objectives(ObjectiveSet),
}

impl MpSet {
    pub fn is_bottom(&self) -> bool {
        matches!(self, MpSet::Bottom)
    }

    pub fn contains(&self, i: usize) -> bool {
        match self {
            MpSet::Bottom => false,
            MpSet::Objectives(set) => set.contains(i),
        }
    }

    pub fn objectives(&self) -> Vec<usize> {
        match self {
            MpSet::Bottom => Vec::new(),
            MpSet::Objectives(set) => set.iter().collect(),
        }
    }

    fn elements(&self) -> Box<dyn Iterator<Item = Elem> + '_> {
        match self {
            MpSet::Bottom => Box::new(std::iter::once(Elem::Bottom)),
            MpSet::Objectives(set) => Box::new(set.iter().map(Elem::Objective)),
        }
    }

    /// Pairs of members that are indifferent to each other. Maximality allows
    /// them to coexist even though they are not incomparable.
    pub fn indifferent_members(&self, prefs: &PreferenceModel) -> Vec<(usize, usize)> {
        let members = self.objectives();
        let mut pairs = Vec::new();
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if prefs.compare(i, j) == Comparison::Indifferent {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// No member strictly beats another.
    pub fn is_antichain(&self, prefs: &PreferenceModel) -> bool {
        let members = self.objectives();
        members
            .iter()
            .all(|&i| members.iter().all(|&j| !prefs.strictly_prefers(i, j)))
    }

    pub fn display_with(&self, names: &[String]) -> String {
        match self {
            MpSet::Bottom => "⊥".to_string(),
            MpSet::Objectives(set) => {
                let names: Vec<&str> = set.iter().map(|i| names[i].as_str()).collect();
                format!("{{{}}}", names.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransitionFlags {
    pub improving: bool,
    pub weakening: bool,
}

/// Objectives whose target intersects `visited`.
pub fn satisfied_objectives(objectives: &Objectives, visited: impl Fn(StateId) -> bool + Copy) -> ObjectiveSet {
    let mut sat = ObjectiveSet::empty(objectives.len());
    for (i, o) in objectives.iter().enumerate() {
        if o.target.iter().any(visited) {
            sat.insert(i);
        }
    }
    sat
}

/// MP of the objectives satisfied along a finite state sequence.
pub fn mp_of_play(mdp: &Mdp, objectives: &Objectives, prefs: &PreferenceModel, states: &[StateId]) -> Result<MpSet> {
    let play = Play::new(mdp, states.to_vec())?;
    let occ = play.occurrences(mdp.num_states());
    Ok(prefs.maximal_elements(&satisfied_objectives(objectives, |s| occ.contains(s))))
}
