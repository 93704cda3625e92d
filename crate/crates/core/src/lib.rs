//! Qualitative planning with incomplete preferences over reachability
//! objectives in Markov decision processes.
//!
//! The pipeline: build an [`Mdp`] with [`Objectives`] and a
//! [`PreferenceModel`], pair it with an improvement flag via
//! [`build_improvement_mdp`], then synthesize improving strategies and
//! rank states with the functions in [`synthesis`].

pub mod error;
pub mod improvement;
pub mod io;
pub mod mdp;
pub mod objective;
pub mod oracle;
pub mod preference;
pub mod reach;
pub mod scenarios;
pub mod simulate;
pub mod strategy;
pub mod synthesis;

pub use error::{Error, Result};
pub use improvement::{
    build_improvement_mdp, check_support_symmetry, compute_mp_table, product_index, split_index, ImprovementMdp,
    MpTable,
};
pub use mdp::{ActionId, Choice, Mdp, MdpBuilder, Play, Probability, StateId, StateSet, ValidationReport, Violation};
pub use objective::{Objectives, ReachabilityObjective};
pub use oracle::{oracle_reach_qualitative, ReachTag};
pub use preference::{close_preorder, mp_of_play, Comparison, MpSet, ObjectiveSet, PlayOrder, PreferenceModel};
pub use reach::{almost_sure_reach_region, positive_reach_region, positive_winning_strategy};
pub use simulate::{count_improvements, improvement_statistics, sample_play, RunSummary};
pub use strategy::Strategy;
pub use synthesis::{
    composed_sasi_strategy, composed_spi_strategy, rank_of, sasi_level_sets, sasi_strategy, spi_level_sets,
    spi_strategy, CounterStrategy, LevelSets, Mode, Policy, Rank, RankTable,
};

/// Validation report for `mdp`; an empty report means the model is valid.
pub fn validate_mdp(mdp: &Mdp) -> ValidationReport {
    mdp.validate()
}
