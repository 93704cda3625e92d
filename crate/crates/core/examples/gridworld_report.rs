//! Prints model sizes, rank counts and the strategies at the initial state
//! for a gridworld config (the bundled one by default).
//!
//! cargo run --release --example gridworld_report [config.json]

use prefplan::improvement::product_index;
use prefplan::scenarios::{Gridworld, GridworldConfig};
use prefplan::synthesis::{improving_strategy, level_sets, Mode, RankTable};
use prefplan::build_improvement_mdp;

fn main() -> prefplan::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => GridworldConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => GridworldConfig::reference_default(),
    };
    let g = Gridworld::build(&config)?;
    let imdp = build_improvement_mdp(&g.mdp, &g.objectives, &g.preferences)?;
    let s0 = g.mdp.initial();
    println!("mdp: {} states, {} transitions", g.mdp.num_states(), g.mdp.num_transitions());
    println!("product: {} states, {} transitions", imdp.num_states(), imdp.product().num_transitions());
    println!("MP(s0) = {}", imdp.mp_table().get(s0).display_with(&g.objectives.names()));
    for mode in [Mode::Sasi, Mode::Spi] {
        let levels = level_sets(&imdp, mode);
        let table = RankTable::from_levels(&levels);
        let (_, strategy) = improving_strategy(&imdp, mode);
        let names: Vec<&str> = strategy.allowed(product_index(s0, false)).iter().map(|&a| g.mdp.action_name(a)).collect();
        let phase: Vec<&str> = if levels.levels.len() >= 2 {
            let cs = prefplan::synthesis::composed_strategy(&imdp, &levels)?;
            let c = cs.counter_init(product_index(s0, false));
            cs.phase(c).allowed(product_index(s0, false)).iter().map(|&a| g.mdp.action_name(a)).collect()
        } else {
            Vec::new()
        };
        println!(
            "{mode}: rank>=k {:?}, rank(s0) = {}, bounded = {}, strategy(s0,0) = {:?}, composed(s0,0) = {:?}",
            table.histogram(),
            table.get(s0),
            levels.bounded,
            names,
            phase
        );
    }
    Ok(())
}
