//! Qualitative reachability: positive and almost-sure winning regions.
//!
//! Only transition supports matter here. Both algorithms work on a reverse
//! adjacency list over *choices* (a state/action pair), so that individual
//! actions can be switched off while the almost-sure fixpoint shrinks.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, StateId, StateSet};
use crate::strategy::Strategy;

/// Reverse support graph. A choice is addressed globally as
/// `choice_start[s] + i` for the `i`-th choice of state `s`.
struct SupportGraph<'a> {
    mdp: &'a Mdp,
    choice_start: Vec<usize>,
    pred_start: Vec<usize>,
    pred: Vec<(StateId, usize)>,
}

impl<'a> SupportGraph<'a> {
    fn new(mdp: &'a Mdp) -> Self {
        let n = mdp.num_states();
        let mut choice_start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for s in 0..n {
            choice_start.push(total);
            total += mdp.choices(s).len();
        }
        choice_start.push(total);

        let mut count = vec![0usize; n + 1];
        for s in 0..n {
            for c in mdp.choices(s) {
                for t in c.support() {
                    count[t + 1] += 1;
                }
            }
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let pred_start = count.clone();
        let mut fill = count;
        let mut pred = vec![(0, 0); pred_start[n]];
        for s in 0..n {
            for (i, c) in mdp.choices(s).iter().enumerate() {
                for t in c.support() {
                    pred[fill[t]] = (s, choice_start[s] + i);
                    fill[t] += 1;
                }
            }
        }
        Self { mdp, choice_start, pred_start, pred }
    }

    fn num_choices(&self) -> usize {
        *self.choice_start.last().unwrap_or(&0)
    }

    fn preds(&self, t: StateId) -> &[(StateId, usize)] {
        &self.pred[self.pred_start[t]..self.pred_start[t + 1]]
    }

    /// Backward BFS from `target`, restricted to states in `within` and to
    /// live choices. Returns the distance of every reached state.
    fn distances(&self, target: &StateSet, within: Option<&StateSet>, live: Option<&[bool]>) -> Vec<Option<u32>> {
        let n = self.mdp.num_states();
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for t in target.iter() {
            if within.is_none_or(|w| w.contains(t)) {
                dist[t] = Some(0);
                queue.push_back(t);
            }
        }
        while let Some(t) = queue.pop_front() {
            let d = dist[t].unwrap_or(0);
            for &(p, ch) in self.preds(t) {
                if dist[p].is_some() || within.is_some_and(|w| !w.contains(p)) || live.is_some_and(|l| !l[ch]) {
                    continue;
                }
                dist[p] = Some(d + 1);
                queue.push_back(p);
            }
        }
        dist
    }

    /// Allowed actions per state: everything enabled on the target, and
    /// elsewhere the live choices with a successor one layer closer.
    fn progress_strategy(&self, target: &StateSet, dist: &[Option<u32>], live: Option<&[bool]>) -> Strategy {
        let mdp = self.mdp;
        let mut strategy = Strategy::empty(mdp.num_states());
        for (s, d) in dist.iter().enumerate() {
            let Some(d) = *d else { continue };
            let actions = if target.contains(s) {
                mdp.enabled(s).collect()
            } else {
                mdp.choices(s)
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| live.is_none_or(|l| l[self.choice_start[s] + i]))
                    .filter(|(_, c)| c.support().any(|t| dist[t].is_some_and(|dt| dt < d)))
                    .map(|(_, c)| c.action)
                    .collect()
            };
            strategy.set(s, actions);
        }
        strategy
    }
}

fn reached(dist: &[Option<u32>]) -> StateSet {
    let mut set = StateSet::empty(dist.len());
    for (s, d) in dist.iter().enumerate() {
        if d.is_some() {
            set.insert(s);
        }
    }
    set
}

/// States from which `target` is reached with positive probability under
/// some strategy (`PWin`).
pub fn positive_reach_region(mdp: &Mdp, target: &StateSet) -> Result<StateSet> {
    if target.is_empty() {
        return Err(Error::EmptyObjective);
    }
    Ok(positive_region_unchecked(mdp, target))
}

pub(crate) fn positive_region_unchecked(mdp: &Mdp, target: &StateSet) -> StateSet {
    reached(&SupportGraph::new(mdp).distances(target, None, None))
}

/// The positive winning strategy: on the target every enabled action, in
/// the rest of `PWin` the actions that can move one BFS layer closer to the
/// target, and nothing outside the region.
pub fn positive_winning_strategy(mdp: &Mdp, target: &StateSet) -> Strategy {
    let graph = SupportGraph::new(mdp);
    let dist = graph.distances(target, None, None);
    graph.progress_strategy(target, &dist, None)
}

/// `ASWin(target)` together with a permissive strategy certifying it.
///
/// Alternating fixpoint: drop every action that may leave the candidate set,
/// then shrink the candidate set to the states that still reach the target
/// through the remaining actions, until nothing changes.
///
/// The returned strategy never leaves the region and, off the target, only
/// allows actions with a successor strictly closer to the target, so any
/// selection among the allowed actions reaches the target with probability
/// one.
pub fn almost_sure_reach_region(mdp: &Mdp, target: &StateSet) -> Result<(StateSet, Strategy)> {
    if target.is_empty() {
        return Err(Error::EmptyObjective);
    }
    Ok(almost_sure_unchecked(mdp, target))
}

pub(crate) fn almost_sure_unchecked(mdp: &Mdp, target: &StateSet) -> (StateSet, Strategy) {
    let graph = SupportGraph::new(mdp);
    let n = mdp.num_states();
    let mut live = vec![true; graph.num_choices()];
    let mut candidate = StateSet::full(n);
    loop {
        let dist = graph.distances(target, Some(&candidate), Some(&live));
        let next = reached(&dist);
        if next == candidate {
            let strategy = graph.progress_strategy(target, &dist, Some(&live));
            return (candidate, strategy);
        }
        for t in candidate.iter().filter(|&t| !next.contains(t)) {
            for &(_, ch) in graph.preds(t) {
                live[ch] = false;
            }
        }
        candidate = next;
    }
}

pub(crate) fn almost_sure_region_unchecked(mdp: &Mdp, target: &StateSet) -> StateSet {
    almost_sure_unchecked(mdp, target).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::MdpBuilder;
    use crate::scenarios::toy;

    fn set(n: usize, xs: &[usize]) -> StateSet {
        StateSet::from_states(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn toy_positive_regions() {
        let (mdp, _, _) = toy::build_toy_example();
        let pwin = positive_reach_region(&mdp, &set(6, &[2, 4])).unwrap();
        assert_eq!(pwin, set(6, &[0, 2, 4]));
        let pwin = positive_reach_region(&mdp, &set(6, &[1, 5])).unwrap();
        assert_eq!(pwin, set(6, &[0, 1, 5]));
        assert_eq!(positive_reach_region(&mdp, &StateSet::full(6)).unwrap(), StateSet::full(6));
    }

    #[test]
    fn toy_positive_strategy_for_f2() {
        let (mdp, _, _) = toy::build_toy_example();
        let (a, b, c) = (0, 1, 2);
        let strategy = positive_winning_strategy(&mdp, &set(6, &[2, 4]));
        assert!(strategy.allows(0, b) && strategy.allows(0, c));
        assert!(!strategy.allows(0, a));
        // already in the target: everything enabled
        assert_eq!(strategy.allowed(2), mdp.enabled(2).collect::<Vec<_>>().as_slice());
        // outside the region: nothing
        assert!(strategy.allowed(1).is_empty() && strategy.allowed(3).is_empty());
    }

    #[test]
    fn toy_almost_sure_regions() {
        let (mdp, _, _) = toy::build_toy_example();
        let (win, strategy) = almost_sure_reach_region(&mdp, &set(6, &[1, 5])).unwrap();
        assert_eq!(win, set(6, &[0, 1, 5]));
        assert_eq!(strategy.allowed(0), &[0]);
        let (win, _) = almost_sure_reach_region(&mdp, &set(6, &[2, 4])).unwrap();
        assert_eq!(win, set(6, &[2, 4]));
        let (win, _) = almost_sure_reach_region(&mdp, &set(6, &[3])).unwrap();
        assert_eq!(win, set(6, &[3]));
    }

    #[test]
    fn full_target_allows_everything() {
        let (mdp, _, _) = toy::build_toy_example();
        let (win, strategy) = almost_sure_reach_region(&mdp, &StateSet::full(6)).unwrap();
        assert_eq!(win, StateSet::full(6));
        assert_eq!(strategy, Strategy::all_enabled(&mdp));
    }

    #[test]
    fn empty_target_is_an_error() {
        let (mdp, _, _) = toy::build_toy_example();
        assert!(matches!(positive_reach_region(&mdp, &StateSet::empty(6)), Err(Error::EmptyObjective)));
        assert!(matches!(almost_sure_reach_region(&mdp, &StateSet::empty(6)), Err(Error::EmptyObjective)));
    }

    #[test]
    fn risky_action_is_pruned_but_safe_detour_kept() {
        // 0 -a-> {1 (goal), 2 (trap)}; 0 -b-> 3; 3 -a-> 1
        let mdp = MdpBuilder::new(4, ["a", "b"])
            .transition(0, 0, 1, "1/2")
            .unwrap()
            .transition(0, 0, 2, "1/2")
            .unwrap()
            .transition(0, 1, 3, "1")
            .unwrap()
            .transition(1, 0, 1, "1")
            .unwrap()
            .transition(2, 0, 2, "1")
            .unwrap()
            .transition(3, 0, 1, "1")
            .unwrap()
            .build()
            .unwrap();
        let (win, strategy) = almost_sure_reach_region(&mdp, &set(4, &[1])).unwrap();
        assert_eq!(win, set(4, &[0, 1, 3]));
        assert_eq!(strategy.allowed(0), &[1]);
        assert_eq!(strategy.allowed(3), &[0]);
    }

    #[test]
    fn stalling_loop_is_not_a_progress_action() {
        // 0 -a-> 0 (stall), 0 -b-> 1 (goal). Both stay inside ASWin, only b makes progress.
        let mdp = MdpBuilder::new(2, ["a", "b"])
            .transition(0, 0, 0, "1")
            .unwrap()
            .transition(0, 1, 1, "1")
            .unwrap()
            .transition(1, 0, 1, "1")
            .unwrap()
            .build()
            .unwrap();
        let (win, strategy) = almost_sure_reach_region(&mdp, &set(2, &[1])).unwrap();
        assert_eq!(win, StateSet::full(2));
        assert_eq!(strategy.allowed(0), &[1]);
    }

    #[test]
    fn dead_states_are_excluded_unless_targeted() {
        let mdp = MdpBuilder::new(3, ["a"])
            .transition(0, 0, 1, "1/2")
            .unwrap()
            .transition(0, 0, 2, "1/2")
            .unwrap()
            .build()
            .unwrap();
        let (win, _) = almost_sure_reach_region(&mdp, &set(3, &[1])).unwrap();
        assert_eq!(win, set(3, &[1]));
        assert_eq!(positive_reach_region(&mdp, &set(3, &[1])).unwrap(), set(3, &[0, 1]));
    }
}
