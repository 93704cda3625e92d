//! Seeded random instances shared by the property and acceptance tests.

#![allow(dead_code)]

use prefplan::{
    close_preorder, Mdp, MdpBuilder, Objectives, PreferenceModel, Probability, ReachabilityObjective, StateSet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random MDP with `1..=max_states` states and `1..=max_actions` actions.
/// Every state enables at least one action; supports are random and
/// probabilities uniform over the support. With `self_loops`, the last
/// action is a self-loop everywhere.
pub fn random_mdp(rng: &mut ChaCha8Rng, max_states: usize, max_actions: usize, self_loops: bool) -> Mdp {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_actions);
    let names: Vec<String> = (0..k).map(|a| format!("a{a}")).collect();
    let mut b = MdpBuilder::new(n, names).initial(rng.random_range(0..n));
    let moving = if self_loops { k - 1 } else { k };
    for s in 0..n {
        let mut enabled: Vec<usize> = (0..moving).filter(|_| rng.random_bool(0.7)).collect();
        if enabled.is_empty() && moving > 0 && !self_loops {
            enabled.push(rng.random_range(0..moving));
        }
        for a in enabled {
            let mut targets: Vec<usize> = (0..n).collect();
            targets.shuffle(rng);
            let len = rng.random_range(1..=n.min(3));
            for &t in &targets[..len] {
                b.add_transition(s, a, t, Probability::new(1, len as u64).unwrap()).unwrap();
            }
        }
        if self_loops {
            b.add_transition(s, k - 1, s, Probability::one()).unwrap();
        }
    }
    b.build().unwrap()
}

pub fn random_target(rng: &mut ChaCha8Rng, n: usize) -> StateSet {
    let mut set = StateSet::empty(n);
    for s in 0..n {
        if rng.random_bool(0.3) {
            set.insert(s);
        }
    }
    if set.is_empty() {
        set.insert(rng.random_range(0..n));
    }
    set
}

/// 1 to 4 objectives with random nonempty targets and random preference
/// edges, closed into a preorder.
pub fn random_objectives(rng: &mut ChaCha8Rng, n: usize) -> (Objectives, PreferenceModel) {
    let m = rng.random_range(1..=4);
    let objectives = Objectives::new(
        (0..m)
            .map(|i| ReachabilityObjective::new(format!("F{i}"), random_target(rng, n)).unwrap())
            .collect(),
    );
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && rng.random_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    (objectives, close_preorder(&edges, m).unwrap().with_bottom(rng.random_bool(0.8)))
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_actions: usize,
    self_loops: bool,
) -> (Mdp, Objectives, PreferenceModel) {
    let mdp = random_mdp(rng, max_states, max_actions, self_loops);
    let (objectives, prefs) = random_objectives(rng, mdp.num_states());
    (mdp, objectives, prefs)
}

/// Five or six states in layers `{0}`, `{1, 2}`, `{3, 4}` with an optional
/// sink 5. Action 0 moves to a random nonempty part of the next layer;
/// action 1, when present, is a random detour that may hit the sink. Each
/// layer-1 and layer-2 state has a singleton objective, layer 1 as a whole
/// is one more objective, and deeper objectives tend to be preferred, with
/// random edges dropped. Ranks up to 2 occur often.
pub fn layered_instance(rng: &mut ChaCha8Rng) -> (Mdp, Objectives, PreferenceModel) {
    let sink = rng.random_bool(0.5);
    let n = if sink { 6 } else { 5 };
    let k = if sink { 2 } else { 1 };
    let names: Vec<String> = (0..k).map(|a| format!("a{a}")).collect();
    let mut b = MdpBuilder::new(n, names);
    let layers: [&[usize]; 3] = [&[0], &[1, 2], &[3, 4]];
    let uniform = |b: &mut MdpBuilder, s: usize, a: usize, ts: &[usize]| {
        for &t in ts {
            b.add_transition(s, a, t, Probability::new(1, ts.len() as u64).unwrap()).unwrap();
        }
    };
    for i in 0..2 {
        for &s in layers[i] {
            let mut next: Vec<usize> = layers[i + 1].iter().copied().filter(|_| rng.random_bool(0.8)).collect();
            if next.is_empty() {
                next.push(layers[i + 1][rng.random_range(0..2)]);
            }
            uniform(&mut b, s, 0, &next);
        }
    }
    for &s in layers[2] {
        b.add_transition(s, 0, s, Probability::one()).unwrap();
    }
    if sink {
        b.add_transition(5, 0, 5, Probability::one()).unwrap();
        for s in 0..5 {
            if rng.random_bool(0.4) {
                let mut ts = vec![5];
                ts.push(rng.random_range(0..5));
                ts.dedup();
                uniform(&mut b, s, 1, &ts);
            }
        }
    }
    let mdp = b.build().unwrap();
    let mut list = vec![ReachabilityObjective::from_states("W", n, [1, 2]).unwrap()];
    for s in 1..5 {
        list.push(ReachabilityObjective::from_states(format!("X{s}"), n, [s]).unwrap());
    }
    // objective index of state s is s; W is 0
    let mut edges = Vec::new();
    for s in 1..3 {
        if rng.random_bool(0.9) {
            edges.push((s, 0));
        }
        for t in 3..5 {
            if rng.random_bool(0.85) {
                edges.push((t, s));
            }
        }
    }
    (mdp, Objectives::new(list), close_preorder(&edges, 5).unwrap())
}
