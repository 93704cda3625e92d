//! Exhaustive qualitative reachability by strategy enumeration.
//!
//! Independent of the fixpoint algorithms in [`crate::reach`]: every
//! memoryless deterministic strategy is expanded into a Markov chain with the
//! target made absorbing, and the chain is analysed with bitmask transitive
//! closure. Only usable on tiny models.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, MdpBuilder, StateId, StateSet};

pub const MAX_ORACLE_STATES: usize = 10;
pub const MAX_ORACLE_ACTIONS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReachTag {
    Zero,
    Positive,
    AlmostSure,
}

/// The best qualitative guarantee per state over all memoryless
/// deterministic strategies.
pub fn oracle_reach_qualitative(mdp: &Mdp, target: &StateSet) -> Result<Vec<ReachTag>> {
    let n = mdp.num_states();
    if n > MAX_ORACLE_STATES || mdp.num_actions() > MAX_ORACLE_ACTIONS {
        return Err(Error::OracleScaleExceeded { states: n, actions: mdp.num_actions() });
    }
    Ok(enumerate(mdp, target))
}

/// Same analysis with a bound on the number of strategies instead of on the
/// model dimensions. Models up to 64 states.
pub fn oracle_reach_budgeted(mdp: &Mdp, target: &StateSet, max_strategies: u64) -> Result<Vec<ReachTag>> {
    let n = mdp.num_states();
    let count = (0..n).try_fold(1u64, |acc, s| acc.checked_mul(mdp.choices(s).len().max(1) as u64));
    if n > 64 || count.is_none_or(|c| c > max_strategies) {
        return Err(Error::OracleScaleExceeded { states: n, actions: mdp.num_actions() });
    }
    Ok(enumerate(mdp, target))
}

fn enumerate(mdp: &Mdp, target: &StateSet) -> Vec<ReachTag> {
    let n = mdp.num_states();
    let mut best = vec![ReachTag::Zero; n];
    let target_mask: u64 = target.iter().fold(0, |m, s| m | 1 << s);
    let options: Vec<usize> = (0..n).map(|s| mdp.choices(s).len()).collect();
    let mut pick = vec![0usize; n];
    loop {
        let succ: Vec<u64> = (0..n)
            .map(|s| {
                if target_mask & (1 << s) != 0 {
                    1 << s
                } else if options[s] == 0 {
                    0
                } else {
                    mdp.choices(s)[pick[s]].support().fold(0, |m, t| m | 1 << t)
                }
            })
            .collect();
        let reach = closure(&succ);
        for s in 0..n {
            let tag = tag_state(s, &reach, target_mask);
            best[s] = best[s].max(tag);
        }
        // mixed-radix increment over the per-state choice indices
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            if options[i] > 1 && pick[i] + 1 < options[i] {
                pick[i] += 1;
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Whether some strategy, with unrestricted memory, enters `visits` states
/// of `final_states` with probability one when started in `start`.
///
/// Memory is made explicit by pairing each state with the number of entries
/// so far (capped at `visits`); on that unfolding memoryless strategies
/// suffice and the plain enumeration applies. Only the part reachable from
/// `start` is unfolded.
pub fn oracle_guarantees_visits(
    mdp: &Mdp,
    final_states: &StateSet,
    start: StateId,
    visits: usize,
    max_strategies: u64,
) -> Result<bool> {
    if visits == 0 {
        return Ok(true);
    }
    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut order = vec![(start, 0)];
    index.insert((start, 0), 0);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (s, c) = order[i];
        if c < visits {
            for choice in mdp.choices(s) {
                for &(t, p) in &choice.successors {
                    let c2 = if final_states.contains(t) { c + 1 } else { c };
                    let next = *index.entry((t, c2)).or_insert_with(|| {
                        order.push((t, c2));
                        order.len() - 1
                    });
                    edges.push((i, choice.action, next, p));
                }
            }
        }
        i += 1;
    }
    let n = order.len();
    let mut builder = MdpBuilder::new(n, mdp.action_names().to_vec());
    for (src, a, dst, p) in edges {
        builder.add_transition(src, a, dst, p)?;
    }
    let unfolded = builder.build()?;
    let goal = StateSet::from_states(n, (0..n).filter(|&j| order[j].1 == visits))?;
    if goal.is_empty() {
        return Ok(false);
    }
    let tags = oracle_reach_budgeted(&unfolded, &goal, max_strategies)?;
    Ok(tags[0] == ReachTag::AlmostSure)
}

/// Reflexive-transitive closure of a successor relation given as bitmasks.
fn closure(succ: &[u64]) -> Vec<u64> {
    let n = succ.len();
    let mut reach: Vec<u64> = (0..n).map(|s| succ[s] | 1 << s).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            let mut acc = reach[s];
            let mut rest = reach[s];
            while rest != 0 {
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                acc |= reach[t];
            }
            if acc != reach[s] {
                reach[s] = acc;
                changed = true;
            }
        }
        if !changed {
            return reach;
        }
    }
}

fn tag_state(s: usize, reach: &[u64], target: u64) -> ReachTag {
    if reach[s] & target == 0 {
        return ReachTag::Zero;
    }
    // t is in a bottom SCC iff everything reachable from t reaches back to t
    let bottom_outside_target = (0..reach.len()).any(|t| {
        reach[s] & (1 << t) != 0
            && target & (1 << t) == 0
            && (0..reach.len()).all(|u| reach[t] & (1 << u) == 0 || reach[u] & (1 << t) != 0)
    });
    if bottom_outside_target {
        ReachTag::Positive
    } else {
        ReachTag::AlmostSure
    }
}
