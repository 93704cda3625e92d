//! Python bindings: build a planning problem from JSON or a built-in
//! scenario, then query ranks and strategies and run simulations.

use prefplan::io;
use prefplan::scenarios::{build_toy_example, Gridworld, GridworldConfig};
use prefplan::synthesis::{composed_strategy, improving_strategy, level_sets, CounterStrategy, Mode, Rank, RankTable};
use prefplan::{build_improvement_mdp, improvement_statistics, ImprovementMdp, Mdp, Objectives, PreferenceModel};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: prefplan::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mode(name: &str) -> PyResult<Mode> {
    name.parse().map_err(err)
}

fn rank_value(r: Rank) -> Option<usize> {
    r.finite()
}

/// A planning problem and its improvement MDP.
#[pyclass(module = "prefplan", frozen)]
struct Problem {
    imdp: ImprovementMdp,
    objectives: Objectives,
    warnings: Vec<String>,
    descriptions: Option<Vec<String>>,
}

impl Problem {
    fn new(mdp: &Mdp, objectives: Objectives, prefs: &PreferenceModel, warnings: Vec<String>) -> PyResult<Self> {
        let imdp = build_improvement_mdp(mdp, &objectives, prefs).map_err(err)?;
        Ok(Self { imdp, objectives, warnings, descriptions: None })
    }

    fn composed(&self, m: Mode) -> PyResult<CounterStrategy> {
        composed_strategy(&self.imdp, &level_sets(&self.imdp, m)).map_err(err)
    }

    fn state(&self, name: Option<&str>) -> PyResult<usize> {
        match name {
            None => Ok(self.imdp.initial()),
            Some(n) => self
                .imdp
                .parse_state_name(n)
                .ok_or_else(|| PyValueError::new_err(format!("unknown state `{n}`"))),
        }
    }

    fn action_names(&self, actions: &[usize]) -> Vec<String> {
        actions.iter().map(|&a| self.imdp.product().action_name(a).to_string()).collect()
    }
}

#[pymethods]
impl Problem {
    /// Parses the three model files given as JSON text.
    #[staticmethod]
    fn from_json(mdp: &str, objectives: &str, preferences: &str) -> PyResult<Self> {
        let mdp = io::parse_mdp(mdp).map_err(err)?;
        mdp.check().map_err(err)?;
        let objectives = io::parse_objectives(objectives, mdp.num_states()).map_err(err)?;
        let (prefs, warnings) = io::parse_preferences(preferences, &objectives.names()).map_err(err)?;
        Self::new(&mdp, objectives, &prefs, warnings)
    }

    /// The six-state example with three objectives.
    #[staticmethod]
    fn toy() -> PyResult<Self> {
        let (mdp, objectives, prefs) = build_toy_example();
        Self::new(&mdp, objectives, &prefs, Vec::new())
    }

    /// The gridworld, from a JSON config or the bundled default.
    #[staticmethod]
    #[pyo3(signature = (config=None))]
    fn gridworld(config: Option<&str>) -> PyResult<Self> {
        let cfg = match config {
            Some(text) => GridworldConfig::from_json(text).map_err(err)?,
            None => GridworldConfig::reference_default(),
        };
        let grid = Gridworld::build(&cfg).map_err(err)?;
        let descriptions = (0..grid.mdp.num_states()).map(|s| grid.describe(s)).collect();
        let mut problem = Self::new(&grid.mdp, grid.objectives.clone(), &grid.preferences, grid.warnings.clone())?;
        problem.descriptions = Some(descriptions);
        Ok(problem)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.imdp.num_base_states()
    }

    #[getter]
    fn num_transitions(&self) -> usize {
        self.imdp.base().num_transitions()
    }

    #[getter]
    fn product_states(&self) -> usize {
        self.imdp.num_states()
    }

    #[getter]
    fn product_transitions(&self) -> usize {
        self.imdp.product().num_transitions()
    }

    #[getter]
    fn initial(&self) -> String {
        self.imdp.state_name(self.imdp.initial())
    }

    #[getter]
    fn objectives(&self) -> Vec<String> {
        self.objectives.names()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.warnings.clone()
    }

    /// Gridworld state description such as `(2,2,8,[-,-])`, if available.
    fn describe(&self, state: usize) -> Option<String> {
        self.descriptions.as_ref()?.get(state).cloned()
    }

    /// Most-preferred achievable objectives at a base state; `None` is ⊥.
    fn mp(&self, state: usize) -> PyResult<Option<Vec<String>>> {
        if state >= self.imdp.num_base_states() {
            return Err(PyValueError::new_err(format!("state {state} out of range")));
        }
        let names = self.objectives.names();
        let mp = self.imdp.mp_table().get(state);
        Ok((!mp.is_bottom()).then(|| mp.objectives().into_iter().map(|i| names[i].clone()).collect()))
    }

    /// Rank of every base state; `None` marks an unbounded rank.
    #[pyo3(signature = (mode="sasi"))]
    fn ranks(&self, mode: &str) -> PyResult<Vec<Option<usize>>> {
        let table = RankTable::from_levels(&level_sets(&self.imdp, self::mode(mode)?));
        Ok(table.ranks.iter().copied().map(rank_value).collect())
    }

    /// Number of base states with rank at least k, for k = 1, 2, ...
    #[pyo3(signature = (mode="sasi"))]
    fn histogram(&self, mode: &str) -> PyResult<Vec<usize>> {
        Ok(RankTable::from_levels(&level_sets(&self.imdp, self::mode(mode)?)).histogram())
    }

    /// Actions the one-improvement strategy allows at a product state.
    #[pyo3(signature = (mode="sasi", state=None))]
    fn allowed(&self, mode: &str, state: Option<&str>) -> PyResult<Vec<String>> {
        let v = self.state(state)?;
        let (_, strategy) = improving_strategy(&self.imdp, self::mode(mode)?);
        Ok(self.action_names(strategy.allowed(v)))
    }

    /// Initial counter and allowed actions of the composed strategy.
    #[pyo3(signature = (mode="sasi", state=None))]
    fn composed_allowed(&self, mode: &str, state: Option<&str>) -> PyResult<(usize, Vec<String>)> {
        let v = self.state(state)?;
        let composed = self.composed(self::mode(mode)?)?;
        let c = composed.counter_init(v);
        Ok((c, self.action_names(composed.phase(c).allowed(v))))
    }

    /// The composed strategy in the JSON strategy format.
    #[pyo3(signature = (mode="sasi"))]
    fn strategy_json(&self, mode: &str) -> PyResult<String> {
        let composed = self.composed(self::mode(mode)?)?;
        Ok(io::strategy_to_json(&io::counter_strategy_file(&self.imdp, &composed)))
    }

    /// Seeded simulation; returns the summary as a dict including the
    /// per-run improvement counts.
    #[pyo3(signature = (mode="sasi", runs=1000, horizon=None, seed=0, start=None, composed=true))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        mode: &str,
        runs: usize,
        horizon: Option<usize>,
        seed: u64,
        start: Option<&str>,
        composed: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        if runs == 0 || horizon == Some(0) {
            return Err(PyValueError::new_err("runs and horizon must be positive"));
        }
        let m = self::mode(mode)?;
        let v = self.state(start)?;
        let horizon = horizon.unwrap_or(10 * self.imdp.num_states());
        let summary = if composed {
            improvement_statistics(&self.imdp, &self.composed(m)?, v, runs, horizon, seed)
        } else {
            improvement_statistics(&self.imdp, &improving_strategy(&self.imdp, m).1, v, runs, horizon, seed)
        }
        .map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("mode", m.as_str())?;
        out.set_item("start", self.imdp.state_name(v))?;
        out.set_item("runs", summary.runs)?;
        out.set_item("horizon", summary.horizon)?;
        out.set_item("seed", summary.seed)?;
        out.set_item("weakening_steps", summary.weakenings)?;
        out.set_item("fraction_at_least", summary.fractions())?;
        out.set_item("improvements", summary.improvements)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(states={}, transitions={}, objectives={:?})",
            self.imdp.num_base_states(),
            self.imdp.base().num_transitions(),
            self.objectives.names()
        )
    }
}

/// Violations of an MDP given as JSON text; empty when valid.
#[pyfunction]
fn validate_mdp(mdp: &str) -> PyResult<Vec<String>> {
    let mdp = io::parse_mdp(mdp).map_err(err)?;
    Ok(mdp.validate().violations.iter().map(ToString::to_string).collect())
}

/// The bundled gridworld configuration as JSON text.
#[pyfunction]
fn default_gridworld_config() -> String {
    GridworldConfig::reference_default().to_json()
}

#[pymodule]
#[pyo3(name = "prefplan")]
fn prefplan_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(validate_mdp, m)?)?;
    m.add_function(wrap_pyfunction!(default_gridworld_config, m)?)?;
    Ok(())
}
