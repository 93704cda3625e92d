//! Searches over the under-determined gridworld knobs (obstacles, slip
//! models, recharge rules, objective scope) and prints, for every variant
//! with the target base transition count, its distance to the published
//! counts and whether the initial-state claims hold.
//!
//! cargo run --release --example gridworld_sweep > sweep.txt

use prefplan::build_improvement_mdp;
use prefplan::improvement::product_index;
use prefplan::scenarios::gridworld::{ObjectiveScope, SlipFrame, SlipSpec};
use prefplan::scenarios::{Gridworld, GridworldConfig};
use prefplan::synthesis::{composed_strategy, level_sets, Mode, Rank, RankTable};

const SLIP_CELLS: [(i64, i64); 4] = [(1, 1), (3, 1), (1, 3), (3, 3)];
const OBSTACLE_SETS: [&[(i64, i64)]; 4] = [&[], &[(0, 2)], &[(0, 4)], &[(0, 2), (0, 4)]];
const TARGET: [usize; 4] = [768, 98, 926, 167];

/// Slip models: grid vertical, grid horizontal, motion back/forward,
/// motion left/right. Each keeps the robot in the cell with probability 1/3.
fn slip_model(cell: (i64, i64), model: u32) -> SlipSpec {
    let (frame, a, b) = match model {
        0 => (SlipFrame::Grid, (1, 0), (-1, 0)),
        1 => (SlipFrame::Grid, (0, 1), (0, -1)),
        2 => (SlipFrame::Motion, (-1, 0), (1, 0)),
        _ => (SlipFrame::Motion, (0, 1), (0, -1)),
    };
    SlipSpec { cell, frame, outcomes: vec![((0, 0), "1/3".into()), (a, "1/3".into()), (b, "1/3".into())] }
}

struct Outcome {
    product_transitions: usize,
    counts: [usize; 4],
    max_rank: [Rank; 2],
    s0_rank: [Rank; 2],
    s0_actions: [String; 2],
}

fn evaluate(cfg: &GridworldConfig) -> prefplan::Result<Outcome> {
    let g = Gridworld::build(cfg)?;
    let imdp = build_improvement_mdp(&g.mdp, &g.objectives, &g.preferences)?;
    let s0 = g.mdp.initial();
    let v0 = product_index(s0, false);
    let mut counts = [0; 4];
    let mut max_rank = [Rank::Finite(0); 2];
    let mut s0_rank = [Rank::Finite(0); 2];
    let mut s0_actions = [String::new(), String::new()];
    for (i, mode) in [Mode::Sasi, Mode::Spi].into_iter().enumerate() {
        let levels = level_sets(&imdp, mode);
        let table = RankTable::from_levels(&levels);
        let hist = table.histogram();
        counts[2 * i] = hist.first().copied().unwrap_or(0);
        counts[2 * i + 1] = hist.get(1).copied().unwrap_or(0);
        max_rank[i] = table.max_rank();
        s0_rank[i] = table.get(s0);
        if levels.bounded {
            let cs = composed_strategy(&imdp, &levels)?;
            let c = cs.counter_init(v0);
            s0_actions[i] = cs.phase(c).allowed(v0).iter().map(|&a| g.mdp.action_name(a)).collect();
        }
    }
    Ok(Outcome { product_transitions: imdp.product().num_transitions(), counts, max_rank, s0_rank, s0_actions })
}

fn main() -> prefplan::Result<()> {
    let base = GridworldConfig::reference_default();
    let per_cell = std::env::var_os("PER_CELL").is_some();
    let slip_masks: Vec<u32> = if per_cell { (0..256).collect() } else { (0..4).map(|m| m * 0b0101_0101).collect() };
    for scope in [ObjectiveScope::Picked, ObjectiveScope::AtRegion] {
        for obstacles in OBSTACLE_SETS {
            for &slip in &slip_masks {
                for level in [5, 8] {
                    for on_empty in [false, true] {
                        let mut cfg = base.clone();
                        cfg.objective_scope = scope;
                        cfg.obstacles = obstacles.to_vec();
                        cfg.slippery = SLIP_CELLS
                            .iter()
                            .enumerate()
                            .map(|(i, &cell)| slip_model(cell, (slip >> (2 * i)) & 3))
                            .collect();
                        cfg.recharge_level = Some(level);
                        cfg.recharge_on_empty = on_empty;
                        let g = Gridworld::build(&cfg)?;
                        if g.mdp.num_transitions() != 18496 {
                            continue;
                        }
                        let out = evaluate(&cfg)?;
                        let distance: usize = out.counts.iter().zip(TARGET).map(|(a, b)| a.abs_diff(b)).sum::<usize>()
                            + out.product_transitions.abs_diff(35524) / 10;
                        let gate = out.s0_rank[0] == Rank::Finite(2)
                            && out.max_rank == [Rank::Finite(2); 2]
                            && out.s0_actions[0] == "N"
                            && out.s0_actions[1] == "NS"
                            && out.counts[0] <= out.counts[2]
                            && out.counts[1] <= out.counts[3];
                        println!(
                            "dist={distance} gate={gate} scope={scope:?} obst={obstacles:?} slip={slip:08b} level={level} empty={on_empty} prod={} counts={:?} max={:?} s0={:?} acts={:?}",
                            out.product_transitions, out.counts, out.max_rank, out.s0_rank, out.s0_actions
                        );
                    }
                }
            }
        }
    }
    Ok(())
}
