//! The improvement MDP: the base model paired with a one-bit flag that is
//! raised exactly on steps that improve the most-preferred set of
//! almost-surely achievable objectives.
//!
//! Product states are laid out as `v = 2 * s + m`, so `(s, 0)` and `(s, 1)`
//! are adjacent. Actions keep their base indices.

use crate::error::{Error, Result};
use crate::mdp::{Choice, Mdp, StateId, StateSet};
use crate::objective::Objectives;
use crate::preference::{MpSet, PreferenceModel, TransitionFlags};
use crate::reach::almost_sure_region_unchecked;

/// `MP(s)` for every base state: the maximal objectives among those that are
/// almost-surely achievable from `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpTable {
    entries: Vec<MpSet>,
}

impl MpTable {
    pub fn get(&self, s: StateId) -> &MpSet {
        &self.entries[s]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MpSet> {
        self.entries.iter()
    }
}

fn check_dimensions(objectives: &Objectives, prefs: &PreferenceModel) -> Result<()> {
    if objectives.len() != prefs.len() {
        return Err(Error::Format(format!(
            "{} objectives but the preference model ranks {}",
            objectives.len(),
            prefs.len()
        )));
    }
    Ok(())
}

pub fn compute_mp_table(mdp: &Mdp, objectives: &Objectives, prefs: &PreferenceModel) -> Result<MpTable> {
    check_dimensions(objectives, prefs)?;
    let n = mdp.num_states();
    for o in objectives.iter() {
        if o.target.universe() != n {
            return Err(Error::Format(format!(
                "objective {} is defined over {} states, model has {n}",
                o.name,
                o.target.universe()
            )));
        }
    }
    let regions: Vec<StateSet> = objectives
        .iter()
        .map(|o| almost_sure_region_unchecked(mdp, &o.target))
        .collect();
    let entries = (0..n)
        .map(|s| {
            let achievable = crate::preference::ObjectiveSet::from_indices(
                objectives.len(),
                (0..objectives.len()).filter(|&i| regions[i].contains(s)),
            )
            .expect("indices below objective count");
            prefs.maximal_elements(&achievable)
        })
        .collect();
    Ok(MpTable { entries })
}

#[derive(Clone, Debug)]
pub struct ImprovementMdp {
    base: Mdp,
    product: Mdp,
    mp: MpTable,
    prefs: PreferenceModel,
    final_states: StateSet,
    dead: StateSet,
}

pub const fn product_index(s: StateId, flag: bool) -> StateId {
    2 * s + flag as usize
}

pub const fn split_index(v: StateId) -> (StateId, bool) {
    (v / 2, v % 2 == 1)
}

pub fn build_improvement_mdp(mdp: &Mdp, objectives: &Objectives, prefs: &PreferenceModel) -> Result<ImprovementMdp> {
    let mp = compute_mp_table(mdp, objectives, prefs)?;
    Ok(ImprovementMdp::from_mp_table(mdp, mp, prefs.clone()))
}

impl ImprovementMdp {
    /// Builds the product from a precomputed MP table.
    ///
    /// An action is kept at `(s, m)` only if none of its successors is a
    /// weakening step; dropping single branches would leave a
    /// sub-distribution. The kept choices are identical for both flag values.
    pub fn from_mp_table(mdp: &Mdp, mp: MpTable, prefs: PreferenceModel) -> Self {
        let n = mdp.num_states();
        let mut choices = Vec::with_capacity(2 * n);
        let mut dead = StateSet::empty(2 * n);
        for s in 0..n {
            let kept: Vec<Choice> = mdp
                .choices(s)
                .iter()
                .filter(|c| c.support().all(|t| !prefs.classify_mp_transition(mp.get(s), mp.get(t)).weakening))
                .map(|c| Choice {
                    action: c.action,
                    successors: c
                        .successors
                        .iter()
                        .map(|&(t, p)| {
                            let flag = prefs.classify_mp_transition(mp.get(s), mp.get(t)).improving;
                            (product_index(t, flag), p)
                        })
                        .collect(),
                })
                .collect();
            if kept.is_empty() {
                dead.insert(product_index(s, false));
                dead.insert(product_index(s, true));
            }
            choices.push(kept.clone());
            choices.push(kept);
        }
        let product = Mdp::from_choices(mdp.action_names().to_vec(), product_index(mdp.initial(), false), choices);
        let mut final_states = StateSet::empty(2 * n);
        for s in 0..n {
            final_states.insert(product_index(s, true));
        }
        Self { base: mdp.clone(), product, mp, prefs, final_states, dead }
    }

    pub fn base(&self) -> &Mdp {
        &self.base
    }

    /// The product as a plain MDP over `2 * |S|` states.
    pub fn product(&self) -> &Mdp {
        &self.product
    }

    pub fn mp_table(&self) -> &MpTable {
        &self.mp
    }

    pub fn preferences(&self) -> &PreferenceModel {
        &self.prefs
    }

    /// `𝓕`: every state carrying the improvement flag.
    pub fn final_states(&self) -> &StateSet {
        &self.final_states
    }

    /// Product states where safety disables every action.
    pub fn dead_states(&self) -> &StateSet {
        &self.dead
    }

    pub fn num_states(&self) -> usize {
        self.product.num_states()
    }

    pub fn num_base_states(&self) -> usize {
        self.base.num_states()
    }

    pub fn initial(&self) -> StateId {
        self.product.initial()
    }

    pub fn state_name(&self, v: StateId) -> String {
        let (s, m) = split_index(v);
        format!("s{s}|m{}", m as u8)
    }

    pub fn parse_state_name(&self, name: &str) -> Option<StateId> {
        let (s, m) = name.strip_prefix('s')?.split_once("|m")?;
        let s: StateId = s.parse().ok()?;
        let flag = match m {
            "0" => false,
            "1" => true,
            _ => return None,
        };
        (s < self.num_base_states()).then(|| product_index(s, flag))
    }

    /// Flags of the MP change along the base step `s -> t`.
    pub fn step_flags(&self, s: StateId, t: StateId) -> TransitionFlags {
        self.prefs.classify_mp_transition(self.mp.get(s), self.mp.get(t))
    }

    pub fn check_support_symmetry(&self) -> bool {
        check_support_symmetry(&self.product)
    }
}

/// Whether both flag copies of every base state offer the same actions with
/// the same successor distributions. Expects the `2 * s + m` layout.
pub fn check_support_symmetry(product: &Mdp) -> bool {
    if product.num_states() % 2 != 0 {
        return false;
    }
    (0..product.num_states() / 2).all(|s| {
        let low = product.choices(product_index(s, false));
        let high = product.choices(product_index(s, true));
        low.len() == high.len()
            && low.iter().zip(high).all(|(x, y)| {
                x.action == y.action
                    && x.successors.len() == y.successors.len()
                    && x.support().zip(y.support()).all(|(t, u)| t == u)
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::MdpBuilder;
    use crate::preference::ObjectiveSet;
    use crate::scenarios::toy;

    fn toy_product() -> ImprovementMdp {
        let (mdp, objectives, prefs) = toy::build_toy_example();
        build_improvement_mdp(&mdp, &objectives, &prefs).unwrap()
    }

    fn mp(n: usize, xs: &[usize]) -> MpSet {
        MpSet::Objectives(ObjectiveSet::from_indices(n, xs.iter().copied()).unwrap())
    }

    #[test]
    fn toy_mp_table() {
        let imdp = toy_product();
        let table = imdp.mp_table();
        assert_eq!(table.get(0), &mp(3, &[0]));
        assert_eq!(table.get(1), &mp(3, &[0]));
        assert_eq!(table.get(2), &mp(3, &[1]));
        assert_eq!(table.get(3), &mp(3, &[2]));
        assert_eq!(table.get(4), &mp(3, &[1]));
        assert_eq!(table.get(5), &mp(3, &[0]));
    }

    #[test]
    fn unreachable_objectives_give_bottom() {
        let mdp = MdpBuilder::new(2, ["a"])
            .transition(0, 0, 0, "1")
            .unwrap()
            .transition(1, 0, 1, "1")
            .unwrap()
            .build()
            .unwrap();
        let objectives = Objectives::new(vec![crate::objective::ReachabilityObjective::from_states("G", 2, [1]).unwrap()]);
        let prefs = crate::preference::close_preorder(&[], 1).unwrap();
        let table = compute_mp_table(&mdp, &objectives, &prefs).unwrap();
        assert!(table.get(0).is_bottom());
        assert_eq!(table.get(1), &mp(1, &[0]));
    }

    #[test]
    fn toy_product_edges() {
        let imdp = toy_product();
        let p = imdp.product();
        assert_eq!(p.num_states(), 12);
        let s0 = product_index(0, false);
        let b = p.choice(s0, 1).unwrap();
        assert_eq!(b.support().collect::<Vec<_>>(), vec![product_index(2, true), product_index(3, true)]);
        let a = p.choice(s0, 0).unwrap();
        assert_eq!(a.support().collect::<Vec<_>>(), vec![product_index(1, false), product_index(5, false)]);
        // absorbing state with constant MP: flag drops back to 0
        let loop2 = p.choice(product_index(2, true), 0).unwrap();
        assert_eq!(loop2.support().collect::<Vec<_>>(), vec![product_index(2, false)]);
        assert!(imdp.dead_states().is_empty());
        assert_eq!(imdp.final_states().len(), 6);
    }

    #[test]
    fn symmetry_holds_and_detects_corruption() {
        let imdp = toy_product();
        assert!(imdp.check_support_symmetry());
        // copy the toy product but drop one branch of b from (s0,1)
        let p = imdp.product();
        let mut builder = MdpBuilder::new(12, p.action_names().to_vec());
        for v in 0..12 {
            for c in p.choices(v) {
                for &(t, prob) in &c.successors {
                    if v == 1 && c.action == 1 && t == product_index(3, true) {
                        continue;
                    }
                    builder.add_transition(v, c.action, t, prob).unwrap();
                }
            }
        }
        assert!(!check_support_symmetry(&builder.build().unwrap()));
    }

    #[test]
    fn unsafe_action_is_disabled_whole() {
        // 0 -a-> {1 (keeps G), 2 (loses G)}; 0 -b-> 1
        let mdp = MdpBuilder::new(3, ["a", "b"])
            .transition(0, 0, 1, "1/2")
            .unwrap()
            .transition(0, 0, 2, "1/2")
            .unwrap()
            .transition(0, 1, 1, "1")
            .unwrap()
            .transition(1, 0, 1, "1")
            .unwrap()
            .transition(2, 0, 2, "1")
            .unwrap()
            .build()
            .unwrap();
        let objectives = Objectives::new(vec![crate::objective::ReachabilityObjective::from_states("G", 3, [1]).unwrap()]);
        let prefs = crate::preference::close_preorder(&[], 1).unwrap();
        let imdp = build_improvement_mdp(&mdp, &objectives, &prefs).unwrap();
        let p = imdp.product();
        assert_eq!(p.enabled(0).collect::<Vec<_>>(), vec![1]);
        assert_eq!(p.enabled(1).collect::<Vec<_>>(), vec![1]);
        // MP(2) is bottom and stays bottom: its self-loop is safe
        assert!(imdp.dead_states().is_empty());
    }

    #[test]
    fn state_names_round_trip() {
        let imdp = toy_product();
        for v in 0..imdp.num_states() {
            assert_eq!(imdp.parse_state_name(&imdp.state_name(v)), Some(v));
        }
        assert_eq!(imdp.state_name(5), "s2|m1");
        assert_eq!(imdp.parse_state_name("s9|m0"), None);
    }
}
