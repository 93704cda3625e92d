//! Seeded Monte Carlo runs of strategies on an improvement MDP.
//!
//! At every step an action is drawn uniformly from the allowed set and the
//! successor from the transition distribution. Run `i` of a batch uses a
//! ChaCha8 generator seeded with the batch seed on stream `i`, so batches
//! are reproducible and independent of evaluation order.
//!
//! Memoryless strategies are only defined on their winning region. Once a
//! run leaves it (typically right after the improvement it was built for),
//! the run continues with any action the product keeps, which are exactly
//! the safe ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::improvement::{split_index, ImprovementMdp};
use crate::mdp::{Play, StateId};
use crate::synthesis::Policy;

pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Samples `horizon` steps from `start`, giving `horizon + 1` states.
pub fn sample_play_with<P: Policy + ?Sized, R: Rng + ?Sized>(
    imdp: &ImprovementMdp,
    policy: &P,
    start: StateId,
    horizon: usize,
    rng: &mut R,
) -> Result<Play> {
    let product = imdp.product();
    if start >= product.num_states() {
        return Err(Error::StateOutOfRange { index: start, len: product.num_states() });
    }
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(start);
    let mut v = start;
    let mut memory = policy.initial_memory(start);
    if horizon > 0 && policy.allowed(start, memory).is_empty() {
        return Err(Error::OutsideDomain(imdp.state_name(start)));
    }
    for _ in 0..horizon {
        let allowed = policy.allowed(v, memory);
        let choice = if allowed.is_empty() {
            let choices = product.choices(v);
            if choices.is_empty() {
                return Err(Error::DeadState(imdp.state_name(v)));
            }
            &choices[rng.random_range(0..choices.len())]
        } else {
            let a = allowed[rng.random_range(0..allowed.len())];
            product.choice(v, a).ok_or_else(|| {
                Error::DeadState(format!("{} (action {} disabled)", imdp.state_name(v), product.action_name(a)))
            })?
        };
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = choice.successors.last().map(|&(t, _)| t).unwrap_or(v);
        for &(t, p) in &choice.successors {
            acc += p.to_f64();
            if u < acc {
                next = t;
                break;
            }
        }
        memory = policy.update(memory, next);
        states.push(next);
        v = next;
    }
    Ok(Play::from_trusted(states))
}

/// One seeded play from `start` (run index 0 of `seed`).
pub fn sample_play<P: Policy + ?Sized>(
    imdp: &ImprovementMdp,
    policy: &P,
    start: StateId,
    horizon: usize,
    seed: u64,
) -> Result<Play> {
    sample_play_with(imdp, policy, start, horizon, &mut run_rng(seed, 0))
}

/// Improving steps along a product play: positions `i >= 1` carrying the
/// flag. The start state is not counted.
pub fn count_improvements(play: &Play) -> usize {
    play.states().iter().skip(1).filter(|&&v| split_index(v).1).count()
}

/// Steps whose MP change contains a weakening pair. Zero for every play of
/// a well-formed improvement MDP.
pub fn count_weakenings(imdp: &ImprovementMdp, play: &Play) -> usize {
    play.states()
        .windows(2)
        .filter(|w| imdp.step_flags(split_index(w[0]).0, split_index(w[1]).0).weakening)
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    pub start: StateId,
    /// Improvements per run, in run order.
    pub improvements: Vec<usize>,
    /// Weakening steps over all runs; zero unless the product is broken.
    pub weakenings: usize,
}

impl RunSummary {
    /// Fraction of runs with at least `k` improvements.
    pub fn fraction_at_least(&self, k: usize) -> f64 {
        if self.runs == 0 {
            return 0.0;
        }
        self.improvements.iter().filter(|&&c| c >= k).count() as f64 / self.runs as f64
    }

    /// `fraction_at_least(k)` for `k = 0..=max observed`.
    pub fn fractions(&self) -> Vec<f64> {
        let top = self.improvements.iter().copied().max().unwrap_or(0);
        (0..=top).map(|k| self.fraction_at_least(k)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("run_index,improvements\n");
        for (i, c) in self.improvements.iter().enumerate() {
            out.push_str(&format!("{i},{c}\n"));
        }
        out
    }
}

pub fn improvement_statistics<P: Policy + ?Sized>(
    imdp: &ImprovementMdp,
    policy: &P,
    start: StateId,
    runs: usize,
    horizon: usize,
    seed: u64,
) -> Result<RunSummary> {
    let mut improvements = Vec::with_capacity(runs);
    let mut weakenings = 0;
    for i in 0..runs {
        let play = sample_play_with(imdp, policy, start, horizon, &mut run_rng(seed, i as u64))?;
        improvements.push(count_improvements(&play));
        weakenings += count_weakenings(imdp, &play);
    }
    Ok(RunSummary { runs, horizon, seed, start, improvements, weakenings })
}
