//! A battery-limited pickup robot on a grid, compiled from a declarative
//! config into an explicit MDP.
//!
//! A state is `(cell, battery, record)`, where the record stores for each
//! item group the item picked from it, if any. Which items (and whether the
//! charging station) are currently available is a function of the record,
//! so it is not stored separately.
//!
//! One step: the move is applied (leaving the grid, hitting an obstacle or
//! using a blocked action keeps the robot in place), a robot that actually
//! enters a slippery cell may be displaced, the battery drops by one, an
//! available item in the arrival cell is picked up, and arriving at an
//! available station recharges. A robot with an empty battery is stuck.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Mdp, MdpBuilder, Probability, StateId, StateSet};
use crate::objective::{Objectives, ReachabilityObjective};
use crate::preference::PreferenceModel;

pub type Cell = (i64, i64);

/// Name used for the charging station in availability lists.
pub const STATION: &str = "station";

/// How slip offsets are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlipFrame {
    /// `(row, col)` offsets on the grid.
    #[default]
    Grid,
    /// `(forward, left)` offsets relative to the move that entered the cell:
    /// `(-1, 0)` bounces back to where the robot came from, `(1, 0)`
    /// overshoots by one cell.
    Motion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlipSpec {
    pub cell: Cell,
    #[serde(default)]
    pub frame: SlipFrame,
    /// Offsets from the slippery cell with their probabilities. Outcomes off
    /// the grid or on an obstacle stay in the slippery cell.
    pub outcomes: Vec<(Cell, String)>,
}

/// Which states make up the target of the objective for item `X`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveScope {
    /// Every state whose record holds `X`.
    #[default]
    Picked,
    /// States whose record holds `X` while the robot is at `X`'s region.
    AtRegion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockedMode {
    /// The action stays enabled and leaves the robot in place.
    Stay,
    /// The action is not enabled in the cell.
    Disabled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridworldConfig {
    pub rows: i64,
    pub cols: i64,
    /// Action names with their `(row, col)` offsets, in action-index order.
    pub actions: Vec<(String, Cell)>,
    /// Pickup cell of every item.
    pub regions: BTreeMap<String, Cell>,
    pub station: Option<Cell>,
    #[serde(default)]
    pub obstacles: Vec<Cell>,
    #[serde(default)]
    pub slippery: Vec<SlipSpec>,
    #[serde(default)]
    pub blocked_actions: Vec<(Cell, Vec<String>)>,
    pub blocked_mode: BlockedMode,
    pub battery_capacity: u32,
    pub initial_battery: u32,
    /// Battery level after recharging; defaults to the capacity.
    #[serde(default)]
    pub recharge_level: Option<u32>,
    /// Whether arriving at the station with an empty battery still recharges.
    pub recharge_on_empty: bool,
    /// The station recharges at most once; a state flag records its use.
    #[serde(default)]
    pub station_single_use: bool,
    pub initial_cell: Cell,
    /// Items are picked at most once per group; the record keeps one slot
    /// per group.
    pub item_groups: Vec<Vec<String>>,
    pub initially_available: Vec<String>,
    /// Items (or the station) that become available once the key is picked.
    #[serde(default)]
    pub unlocks: BTreeMap<String, Vec<String>>,
    /// `(better, worse)` pairs.
    pub preferences: Vec<(String, String)>,
    pub bottom_element: bool,
    #[serde(default)]
    pub objective_scope: ObjectiveScope,
}

impl GridworldConfig {
    /// The configuration shipped with the crate.
    pub fn reference_default() -> Self {
        serde_json::from_str(include_str!("../../data/gridworld_reference.json")).expect("bundled config parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    fn in_grid(&self, (r, c): Cell) -> bool {
        (0..self.rows).contains(&r) && (0..self.cols).contains(&c)
    }

    fn items(&self) -> impl Iterator<Item = &String> {
        self.item_groups.iter().flatten()
    }

    /// Lists every problem with the config.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.rows < 1 || self.cols < 1 {
            errs.push(format!("grid must be at least 1x1, got {}x{}", self.rows, self.cols));
        }
        if self.battery_capacity < 1 {
            errs.push("battery capacity must be at least 1".into());
        }
        if self.initial_battery > self.battery_capacity {
            errs.push(format!("initial battery {} exceeds capacity {}", self.initial_battery, self.battery_capacity));
        }
        if let Some(level) = self.recharge_level {
            if level > self.battery_capacity {
                errs.push(format!("recharge level {level} exceeds capacity {}", self.battery_capacity));
            }
        }
        if self.actions.is_empty() {
            errs.push("at least one action is required".into());
        }
        let action_names: BTreeSet<&str> = self.actions.iter().map(|(n, _)| n.as_str()).collect();
        if action_names.len() != self.actions.len() {
            errs.push("duplicate action names".into());
        }
        let mut cells: Vec<(String, Cell)> = vec![("initial cell".into(), self.initial_cell)];
        cells.extend(self.regions.iter().map(|(n, &c)| (format!("region {n}"), c)));
        cells.extend(self.station.map(|c| ("station".to_string(), c)));
        cells.extend(self.obstacles.iter().map(|&c| ("obstacle".to_string(), c)));
        cells.extend(self.slippery.iter().map(|s| ("slippery cell".to_string(), s.cell)));
        cells.extend(self.blocked_actions.iter().map(|(c, _)| ("blocked cell".to_string(), *c)));
        for (what, cell) in cells {
            if !self.in_grid(cell) {
                errs.push(format!("{what} {cell:?} is outside the {}x{} grid", self.rows, self.cols));
            }
        }
        if self.obstacles.contains(&self.initial_cell) {
            errs.push("initial cell is an obstacle".into());
        }
        for spec in &self.slippery {
            let mut total = Probability::zero();
            for (offset, p) in &spec.outcomes {
                match p.parse::<Probability>() {
                    Ok(p) if !p.is_zero() => match total.checked_add(&p) {
                        Some(t) => total = t,
                        None => errs.push(format!("slip probabilities at {:?} overflow", spec.cell)),
                    },
                    _ => errs.push(format!("slip outcome {offset:?} at {:?} has invalid probability `{p}`", spec.cell)),
                }
            }
            if !total.is_one() {
                errs.push(format!("slip probabilities at {:?} sum to {total}, not 1", spec.cell));
            }
        }
        for (cell, acts) in &self.blocked_actions {
            for a in acts {
                if !action_names.contains(a.as_str()) {
                    errs.push(format!("blocked action {a} at {cell:?} is not an action"));
                }
            }
        }
        let items: Vec<&String> = self.items().collect();
        let unique: BTreeSet<&String> = items.iter().copied().collect();
        if items.is_empty() {
            errs.push("at least one item is required (objectives must be nonempty)".into());
        }
        if unique.len() != items.len() {
            errs.push("an item appears in more than one group".into());
        }
        if unique.iter().any(|i| i.as_str() == STATION) {
            errs.push(format!("`{STATION}` is reserved"));
        }
        for item in &unique {
            if !self.regions.contains_key(*item) {
                errs.push(format!("item {item} has no region"));
            }
        }
        for name in self.regions.keys() {
            if !unique.contains(name) {
                errs.push(format!("region {name} belongs to no item group"));
            }
        }
        let known = |n: &String| unique.contains(n) || n == STATION;
        for n in &self.initially_available {
            if !known(n) {
                errs.push(format!("initially available `{n}` is unknown"));
            }
        }
        for (key, vals) in &self.unlocks {
            if !unique.contains(key) {
                errs.push(format!("unlock key `{key}` is not an item"));
            }
            for v in vals.iter().filter(|v| !known(v)) {
                errs.push(format!("`{key}` unlocks unknown `{v}`"));
            }
        }
        for (a, b) in &self.preferences {
            for n in [a, b] {
                if !unique.contains(n) {
                    errs.push(format!("preference mentions unknown item `{n}`"));
                }
            }
        }
        errs
    }
}

/// Decoded gridworld state. `record[g]` is the index within group `g` of
/// the picked item.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridState {
    pub cell: Cell,
    pub battery: u32,
    pub record: Vec<Option<usize>>,
    /// Always false unless the station is single-use.
    pub station_used: bool,
}

/// A compiled gridworld.
#[derive(Clone, Debug)]
pub struct Gridworld {
    pub config: GridworldConfig,
    pub mdp: Mdp,
    pub objectives: Objectives,
    pub preferences: PreferenceModel,
    pub warnings: Vec<String>,
}

pub fn build_gridworld(config: &GridworldConfig) -> Result<(Mdp, Objectives, PreferenceModel)> {
    let g = Gridworld::build(config)?;
    Ok((g.mdp, g.objectives, g.preferences))
}

struct Layout<'a> {
    config: &'a GridworldConfig,
    /// Radix of each record slot: group size + 1.
    radix: Vec<usize>,
    records: usize,
}

impl<'a> Layout<'a> {
    fn new(config: &'a GridworldConfig) -> Self {
        let radix: Vec<usize> = config.item_groups.iter().map(|g| g.len() + 1).collect();
        let records = radix.iter().product();
        Self { config, radix, records }
    }

    fn batteries(&self) -> usize {
        self.config.battery_capacity as usize + 1
    }

    fn station_slots(&self) -> usize {
        1 + usize::from(self.config.station_single_use)
    }

    fn num_states(&self) -> usize {
        (self.config.rows * self.config.cols) as usize * self.batteries() * self.records * self.station_slots()
    }

    fn encode(&self, st: &GridState) -> StateId {
        let cfg = self.config;
        let cell = (st.cell.0 * cfg.cols + st.cell.1) as usize;
        let mut rec = 0;
        for (slot, &r) in st.record.iter().zip(&self.radix) {
            rec = rec * r + slot.map_or(0, |i| i + 1);
        }
        ((cell * self.batteries() + st.battery as usize) * self.records + rec) * self.station_slots()
            + usize::from(st.station_used)
    }

    fn decode(&self, mut id: StateId) -> GridState {
        let cfg = self.config;
        let station_used = id % self.station_slots() == 1;
        id /= self.station_slots();
        let mut rec = id % self.records;
        id /= self.records;
        let battery = (id % self.batteries()) as u32;
        let cell = (id / self.batteries()) as i64;
        let mut record = vec![None; self.radix.len()];
        for (slot, &r) in record.iter_mut().zip(&self.radix).rev() {
            let v = rec % r;
            rec /= r;
            *slot = v.checked_sub(1);
        }
        GridState { cell: (cell / cfg.cols, cell % cfg.cols), battery, record, station_used }
    }
}

impl Gridworld {
    pub fn build(config: &GridworldConfig) -> Result<Self> {
        let errs = config.violations();
        if !errs.is_empty() {
            return Err(Error::InvalidConfig(errs));
        }
        let layout = Layout::new(config);
        let n = layout.num_states();
        let names: Vec<String> = config.items().cloned().collect();
        let item_slot: BTreeMap<&str, (usize, usize)> = config
            .item_groups
            .iter()
            .enumerate()
            .flat_map(|(g, items)| items.iter().enumerate().map(move |(i, name)| (name.as_str(), (g, i))))
            .collect();
        let blocked: BTreeSet<(Cell, usize)> = config
            .blocked_actions
            .iter()
            .flat_map(|(cell, acts)| {
                acts.iter()
                    .map(move |a| (*cell, config.actions.iter().position(|(n, _)| n == a).expect("validated")))
            })
            .collect();
        let slips: BTreeMap<Cell, (SlipFrame, Vec<(Cell, Probability)>)> = config
            .slippery
            .iter()
            .map(|s| {
                let outs = s
                    .outcomes
                    .iter()
                    .map(|&((dr, dc), ref p)| ((dr, dc), p.parse().expect("validated")))
                    .collect();
                (s.cell, (s.frame, outs))
            })
            .collect();
        let obstacles: BTreeSet<Cell> = config.obstacles.iter().copied().collect();
        let free = |c: Cell| config.in_grid(c) && !obstacles.contains(&c);
        let recharge_level = config.recharge_level.unwrap_or(config.battery_capacity);

        // what is available given a record
        let available = |record: &[Option<usize>]| -> (BTreeSet<&str>, bool) {
            let mut open: BTreeSet<&str> = config.initially_available.iter().map(String::as_str).collect();
            for (g, slot) in record.iter().enumerate() {
                if let Some(i) = slot {
                    if let Some(vals) = config.unlocks.get(&config.item_groups[g][*i]) {
                        open.extend(vals.iter().map(String::as_str));
                    }
                }
            }
            let station = open.remove(STATION);
            open.retain(|item| record[item_slot[item].0].is_none());
            (open, station)
        };

        let mut builder = MdpBuilder::new(n, config.actions.iter().map(|(name, _)| name.clone()));
        for id in 0..n {
            let st = layout.decode(id);
            for (a, (_, (dr, dc))) in config.actions.iter().enumerate() {
                if st.battery == 0 {
                    builder.add_transition(id, a, id, Probability::one())?;
                    continue;
                }
                let is_blocked = blocked.contains(&(st.cell, a));
                if is_blocked && config.blocked_mode == BlockedMode::Disabled {
                    continue;
                }
                let target = (st.cell.0 + dr, st.cell.1 + dc);
                let entered = if !is_blocked && free(target) { target } else { st.cell };
                let landings: Vec<(Cell, Probability)> = match slips.get(&entered) {
                    Some((frame, outs)) if entered != st.cell => outs
                        .iter()
                        .map(|&((x, y), p)| {
                            let (or, oc) = match frame {
                                SlipFrame::Grid => (x, y),
                                // left of (dr, dc) is (dc, -dr)
                                SlipFrame::Motion => (x * dr + y * dc, x * dc - y * dr),
                            };
                            let c = (entered.0 + or, entered.1 + oc);
                            (if free(c) { c } else { entered }, p)
                        })
                        .collect(),
                    _ => vec![(entered, Probability::one())],
                };
                let (open, station_open) = available(&st.record);
                for (cell, p) in landings {
                    let mut next = GridState { cell, battery: st.battery - 1, ..st.clone() };
                    for item in &open {
                        if config.regions[*item] == cell {
                            let (g, i) = item_slot[item];
                            next.record[g] = Some(i);
                        }
                    }
                    if station_open
                        && !st.station_used
                        && config.station == Some(cell)
                        && (next.battery > 0 || config.recharge_on_empty)
                    {
                        next.battery = recharge_level;
                        next.station_used = config.station_single_use;
                    }
                    builder.add_transition(id, a, layout.encode(&next), p)?;
                }
            }
        }
        let initial = GridState {
            cell: config.initial_cell,
            battery: config.initial_battery,
            record: vec![None; config.item_groups.len()],
            station_used: false,
        };
        let mdp = builder.initial(layout.encode(&initial)).build()?;

        let mut targets: Vec<StateSet> = names.iter().map(|_| StateSet::empty(n)).collect();
        for id in 0..n {
            let st = layout.decode(id);
            for (g, slot) in st.record.iter().enumerate() {
                if let Some(i) = slot {
                    let name = &config.item_groups[g][*i];
                    if config.objective_scope == ObjectiveScope::AtRegion && config.regions[name] != st.cell {
                        continue;
                    }
                    let k = names.iter().position(|x| x == name).expect("item known");
                    targets[k].insert(id);
                }
            }
        }
        let objectives = Objectives::new(
            names
                .iter()
                .zip(targets)
                .map(|(name, t)| ReachabilityObjective::new(name.clone(), t))
                .collect::<Result<_>>()?,
        );
        let (preferences, warnings) =
            PreferenceModel::from_named_edges(&names, &config.preferences, config.bottom_element)?;
        Ok(Self { config: config.clone(), mdp, objectives, preferences, warnings })
    }

    pub fn decode(&self, id: StateId) -> GridState {
        Layout::new(&self.config).decode(id)
    }

    pub fn encode(&self, st: &GridState) -> StateId {
        Layout::new(&self.config).encode(st)
    }

    /// Human-readable state label such as `(2,2,8,[-,-])`.
    pub fn describe(&self, id: StateId) -> String {
        let st = self.decode(id);
        let rec: Vec<&str> = st
            .record
            .iter()
            .enumerate()
            .map(|(g, slot)| slot.map_or("-", |i| self.config.item_groups[g][i].as_str()))
            .collect();
        let used = if st.station_used { ",used" } else { "" };
        format!("({},{},{},[{}]{used})", st.cell.0, st.cell.1, st.battery, rec.join(","))
    }
}
