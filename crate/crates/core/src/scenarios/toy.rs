//! The six-state example with three ranked reachability objectives.

use crate::mdp::{Mdp, MdpBuilder};
use crate::objective::{Objectives, ReachabilityObjective};
use crate::preference::{close_preorder, PreferenceModel};

/// Returns the toy model, objectives `F1 = {s1,s5}`, `F2 = {s2,s4}`,
/// `F3 = {s3}` and the preferences `F2 ▷ F1`, `F3 ▷ F1`.
///
/// Action `a` splits evenly between `s1` and `s5` and then moves `s5` to
/// `s1`; `b` and `c` split evenly over `{s2,s3}` and `{s3,s4}`. States
/// `s1..s4` carry explicit self-loops under every action.
pub fn build_toy_example() -> (Mdp, Objectives, PreferenceModel) {
    let (a, b, c) = (0, 1, 2);
    let mut builder = MdpBuilder::new(6, ["a", "b", "c"]);
    let half = "1/2".parse().expect("literal");
    let one = "1".parse().expect("literal");
    let mut add = |s, act, t, p| {
        builder.add_transition(s, act, t, p).expect("toy indices are in range");
    };
    add(0, a, 1, half);
    add(0, a, 5, half);
    add(0, b, 2, half);
    add(0, b, 3, half);
    add(0, c, 3, half);
    add(0, c, 4, half);
    add(5, a, 1, one);
    for s in 1..=4 {
        for act in [a, b, c] {
            add(s, act, s, one);
        }
    }
    let mdp = builder.build().expect("toy model is well formed");

    let objectives = Objectives::new(
        [("F1", vec![1, 5]), ("F2", vec![2, 4]), ("F3", vec![3])]
            .into_iter()
            .map(|(name, states)| ReachabilityObjective::from_states(name, 6, states).expect("nonempty"))
            .collect(),
    );
    let prefs = close_preorder(&[(1, 0), (2, 0)], 3).expect("indices in range");
    (mdp, objectives, prefs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_is_valid() {
        let (mdp, objectives, prefs) = build_toy_example();
        assert!(mdp.validate().is_valid());
        assert_eq!(mdp.num_states(), 6);
        assert_eq!(objectives.len(), 3);
        assert!(prefs.strictly_prefers(1, 0));
    }
}
