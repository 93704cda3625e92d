//! File formats: JSON for models, objectives, preferences, strategies and
//! run summaries; CSV for rank tables and per-run counts.
//!
//! Writers are canonical (fixed key order, one transition per line, `p/q`
//! probabilities) so that parse-then-write reproduces a written file byte
//! for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::improvement::ImprovementMdp;
use crate::mdp::{Mdp, MdpBuilder, Probability, StateSet};
use crate::objective::{Objectives, ReachabilityObjective};
use crate::preference::{Comparison, PreferenceModel};
use crate::simulate::RunSummary;
use crate::strategy::Strategy;
use crate::synthesis::{CounterStrategy, Mode, RankTable};

/// A probability as written in a file: `"1/3"`, `"0.25"` or a bare number.
#[derive(Deserialize)]
#[serde(untagged)]
enum ProbEntry {
    Text(String),
    Number(serde_json::Number),
}

impl ProbEntry {
    fn parse(&self) -> Result<Probability> {
        match self {
            ProbEntry::Text(s) => s.parse(),
            ProbEntry::Number(n) => n.to_string().parse(),
        }
    }
}

#[derive(Deserialize)]
struct MdpFile {
    states: usize,
    actions: Vec<String>,
    initial: usize,
    transitions: Vec<(usize, usize, usize, ProbEntry)>,
}

/// Parses an MDP file. The result is not validated; call
/// [`Mdp::validate`] for the violation list.
pub fn parse_mdp(text: &str) -> Result<Mdp> {
    let file: MdpFile = serde_json::from_str(text)?;
    let mut builder = MdpBuilder::new(file.states, file.actions).initial(file.initial);
    for (src, action, dst, p) in &file.transitions {
        builder.add_transition(*src, *action, *dst, p.parse()?)?;
    }
    builder.build()
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_transitions(out: &mut String, mdp: &Mdp) {
    out.push_str("  \"transitions\": [");
    let mut first = true;
    for s in 0..mdp.num_states() {
        for c in mdp.choices(s) {
            for &(t, p) in &c.successors {
                out.push_str(if first { "\n" } else { ",\n" });
                first = false;
                let _ = write!(out, "    [{s}, {}, {t}, \"{p}\"]", c.action);
            }
        }
    }
    out.push_str(if first { "]" } else { "\n  ]" });
}

fn write_mdp_header(out: &mut String, mdp: &Mdp) {
    let actions: Vec<String> = mdp.action_names().iter().map(|a| json_str(a)).collect();
    let _ = write!(
        out,
        "{{\n  \"states\": {},\n  \"actions\": [{}],\n  \"initial\": {},\n",
        mdp.num_states(),
        actions.join(", "),
        mdp.initial()
    );
}

pub fn mdp_to_json(mdp: &Mdp) -> String {
    let mut out = String::new();
    write_mdp_header(&mut out, mdp);
    write_transitions(&mut out, mdp);
    out.push_str("\n}\n");
    out
}

/// The product in the MDP schema, plus state names and the final states.
/// [`parse_mdp`] reads it back as a plain MDP.
pub fn product_to_json(imdp: &ImprovementMdp) -> String {
    let product = imdp.product();
    let mut out = String::new();
    write_mdp_header(&mut out, product);
    let names: Vec<String> = (0..product.num_states()).map(|v| json_str(&imdp.state_name(v))).collect();
    let _ = writeln!(out, "  \"state_names\": [{}],", names.join(", "));
    let finals: Vec<String> = imdp.final_states().iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "  \"final_states\": [{}],", finals.join(", "));
    write_transitions(&mut out, product);
    out.push_str("\n}\n");
    out
}

#[derive(Serialize, Deserialize)]
struct ObjectiveEntry {
    name: String,
    states: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ObjectivesFile {
    objectives: Vec<ObjectiveEntry>,
}

/// Parses objectives over a model with `num_states` states. Names must be
/// distinct and target sets nonempty.
pub fn parse_objectives(text: &str, num_states: usize) -> Result<Objectives> {
    let file: ObjectivesFile = serde_json::from_str(text)?;
    let mut list = Vec::with_capacity(file.objectives.len());
    for entry in file.objectives {
        if list.iter().any(|o: &ReachabilityObjective| o.name == entry.name) {
            return Err(Error::Format(format!("duplicate objective name `{}`", entry.name)));
        }
        list.push(ReachabilityObjective::from_states(entry.name, num_states, entry.states)?);
    }
    Ok(Objectives::new(list))
}

pub fn objectives_to_json(objectives: &Objectives) -> String {
    let mut out = String::from("{\n  \"objectives\": [");
    for (i, o) in objectives.iter().enumerate() {
        let states: Vec<String> = o.target.iter().map(|s| s.to_string()).collect();
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "    {{\"name\": {}, \"states\": [{}]}}", json_str(&o.name), states.join(", "));
    }
    out.push_str(if objectives.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
    out
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
struct PreferencesFile {
    objectives: Vec<String>,
    #[serde(default)]
    prefers: Vec<(String, String)>,
    /// Pairs declared equally good; each becomes two weak edges.
    #[serde(default)]
    indifferent: Vec<(String, String)>,
    #[serde(default = "default_true")]
    bottom_element: bool,
}

/// Parses a preference file against the objective order of `names`.
/// Returns the closed model and one warning per user edge that closure
/// turned into an indifference.
pub fn parse_preferences(text: &str, names: &[String]) -> Result<(PreferenceModel, Vec<String>)> {
    let file: PreferencesFile = serde_json::from_str(text)?;
    let mut listed = file.objectives.clone();
    listed.sort();
    let mut expected = names.to_vec();
    expected.sort();
    if listed != expected {
        return Err(Error::Format(format!(
            "preference file ranks objectives {:?}, objectives file defines {:?}",
            file.objectives, names
        )));
    }
    let mut edges = file.prefers.clone();
    for (a, b) in &file.indifferent {
        edges.push((a.clone(), b.clone()));
        edges.push((b.clone(), a.clone()));
    }
    let (model, _) = PreferenceModel::from_named_edges(names, &edges, file.bottom_element)?;
    let warnings = collapse_warnings(names, &model, &file.prefers);
    Ok((model, warnings))
}

/// Declared indifferences are not collapses, so only strict edges are checked.
fn collapse_warnings(names: &[String], model: &PreferenceModel, prefers: &[(String, String)]) -> Vec<String> {
    prefers
        .iter()
        .filter_map(|(a, b)| {
            let i = names.iter().position(|n| n == a)?;
            let j = names.iter().position(|n| n == b)?;
            (model.compare(i, j) != Comparison::StrictlyPreferred)
                .then(|| format!("preference {a} over {b} collapses into indifference after closure"))
        })
        .collect()
}

/// Writes the closed relation: every strict pair, and every indifferent
/// pair once with the lower index first.
pub fn preferences_to_json(model: &PreferenceModel, names: &[String]) -> String {
    let n = model.len();
    let mut strict = Vec::new();
    let mut indifferent = Vec::new();
    for i in 0..n {
        for j in 0..n {
            match model.compare(i, j) {
                Comparison::StrictlyPreferred => strict.push(format!("[{}, {}]", json_str(&names[i]), json_str(&names[j]))),
                Comparison::Indifferent if i < j => {
                    indifferent.push(format!("[{}, {}]", json_str(&names[i]), json_str(&names[j])))
                }
                _ => {}
            }
        }
    }
    let objs: Vec<String> = names.iter().map(|s| json_str(s)).collect();
    let mut out = format!("{{\n  \"objectives\": [{}],\n  \"prefers\": [", objs.join(", "));
    out.push_str(&strict.join(", "));
    out.push_str("],\n");
    if !indifferent.is_empty() {
        let _ = writeln!(out, "  \"indifferent\": [{}],", indifferent.join(", "));
    }
    let _ = write!(out, "  \"bottom_element\": {}\n}}\n", model.bottom_enabled());
    out
}

/// One allowed-action entry of a strategy file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub state: String,
    pub counter: usize,
    pub actions: Vec<String>,
}

/// Strategy export. A memoryless strategy is written with every entry at
/// counter 1. A composed strategy lists its phases from the top counter
/// down; counter 0, where every product action is allowed, is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub mode: Mode,
    pub counter_init: usize,
    pub choices: Vec<StrategyEntry>,
}

fn entries(imdp: &ImprovementMdp, strategy: &Strategy, counter: usize, out: &mut Vec<StrategyEntry>) {
    let product = imdp.product();
    for v in 0..strategy.num_states() {
        let allowed = strategy.allowed(v);
        if !allowed.is_empty() {
            out.push(StrategyEntry {
                state: imdp.state_name(v),
                counter,
                actions: allowed.iter().map(|&a| product.action_name(a).to_string()).collect(),
            });
        }
    }
}

pub fn strategy_file(imdp: &ImprovementMdp, strategy: &Strategy, mode: Mode) -> StrategyFile {
    let mut choices = Vec::new();
    entries(imdp, strategy, 1, &mut choices);
    let counter_init = usize::from(!strategy.allowed(imdp.initial()).is_empty());
    StrategyFile { mode, counter_init, choices }
}

pub fn counter_strategy_file(imdp: &ImprovementMdp, strategy: &CounterStrategy) -> StrategyFile {
    let mut choices = Vec::new();
    // counters above the largest rank are never used
    let top = strategy.rank_table().max_rank().finite().unwrap_or(0).min(strategy.max_counter());
    for c in (1..=top).rev() {
        entries(imdp, strategy.phase(c), c, &mut choices);
    }
    StrategyFile { mode: strategy.mode, counter_init: strategy.counter_init(imdp.initial()), choices }
}

pub fn strategy_to_json(file: &StrategyFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("strategy files always serialize");
    out.push('\n');
    out
}

pub fn parse_strategy(text: &str) -> Result<StrategyFile> {
    Ok(serde_json::from_str(text)?)
}

/// `state,rank` with base states named `s{i}`.
pub fn rank_csv(table: &RankTable) -> String {
    let mut out = String::from("state,rank\n");
    for (s, r) in table.ranks.iter().enumerate() {
        let _ = writeln!(out, "s{s},{r}");
    }
    out
}

/// `state,rank_sasi,rank_spi` for two tables over the same model.
pub fn rank_pair_csv(sasi: &RankTable, spi: &RankTable) -> Result<String> {
    if sasi.ranks.len() != spi.ranks.len() {
        return Err(Error::ProductMismatch { expected: sasi.ranks.len(), found: spi.ranks.len() });
    }
    let mut out = String::from("state,rank_sasi,rank_spi\n");
    for (s, (a, b)) in sasi.ranks.iter().zip(&spi.ranks).enumerate() {
        let _ = writeln!(out, "s{s},{a},{b}");
    }
    Ok(out)
}

/// Aggregate view of a [`RunSummary`] for JSON export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryReport<'a> {
    pub mode: &'a str,
    pub strategy: &'a str,
    pub start: String,
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    pub weakening_steps: usize,
    pub mean_improvements: f64,
    /// `fraction_at_least[k]` = share of runs with at least `k` improvements.
    pub fraction_at_least: Vec<f64>,
}

pub fn summary_to_json(imdp: &ImprovementMdp, summary: &RunSummary, mode: Mode, strategy: &str) -> String {
    let mean = if summary.runs == 0 {
        0.0
    } else {
        summary.improvements.iter().sum::<usize>() as f64 / summary.runs as f64
    };
    let report = SummaryReport {
        mode: mode.as_str(),
        strategy,
        start: imdp.state_name(summary.start),
        runs: summary.runs,
        horizon: summary.horizon,
        seed: summary.seed,
        weakening_steps: summary.weakenings,
        mean_improvements: mean,
        fraction_at_least: summary.fractions(),
    };
    let mut out = serde_json::to_string_pretty(&report).expect("summaries always serialize");
    out.push('\n');
    out
}

/// Per-run CSV; the seed is repeated on every row so the file stands alone.
pub fn summary_to_csv(summary: &RunSummary) -> String {
    let mut out = String::from("run_index,improvements,seed\n");
    for (i, c) in summary.improvements.iter().enumerate() {
        let _ = writeln!(out, "{i},{c},{}", summary.seed);
    }
    out
}

/// States of `set` written as product names.
pub fn state_names(imdp: &ImprovementMdp, set: &StateSet) -> Vec<String> {
    set.iter().map(|v| imdp.state_name(v)).collect()
}
